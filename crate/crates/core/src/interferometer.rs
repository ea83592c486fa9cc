//! Transfer matrices of optical elements and their composition.
//!
//! Rows index input spatial modes and columns index output modes, so a
//! creation operator on input `j` with internal level `s` maps to
//! `sum_l T^(s)[j, l] b†_{l,s}`. Every element keeps the internal level
//! of a photon; the per-level blocks only route it spatially.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Tolerance for row normalization and unitarity checks.
pub const UNITARY_TOL: f64 = 1e-10;

type Block = DMatrix<Complex64>;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransferMatrix {
    l_in: usize,
    l_out: usize,
    blocks: Vec<Block>,
    subnormalized: bool,
    unitary: bool,
}

impl TransferMatrix {
    /// Builds from one `l_in x l_out` block per internal level.
    ///
    /// Unless `subnormalized` is set, every row of every block must have unit
    /// norm.
    pub fn from_blocks(blocks: Vec<Block>, subnormalized: bool) -> Result<Self> {
        let first = blocks
            .first()
            .ok_or_else(|| Error::Dimension("a transfer matrix needs at least one level".into()))?;
        let (l_in, l_out) = first.shape();
        if l_in == 0 || l_out == 0 {
            return Err(Error::Dimension("empty transfer matrix".into()));
        }
        if blocks.iter().any(|b| b.shape() != (l_in, l_out)) {
            return Err(Error::Dimension(
                "level blocks have different shapes".into(),
            ));
        }
        if !subnormalized {
            for (s, b) in blocks.iter().enumerate() {
                for j in 0..l_in {
                    let norm: f64 = b.row(j).iter().map(|x| x.norm_sqr()).sum();
                    if (norm - 1.0).abs() > UNITARY_TOL {
                        return Err(Error::Parameter(format!(
                            "row {j} of level {s} has squared norm {norm}, expected 1"
                        )));
                    }
                }
            }
        }
        let unitary = l_in == l_out
            && blocks.iter().all(|b| {
                let prod = b * b.adjoint();
                let id = Block::identity(l_in, l_in);
                (prod - id).iter().all(|x| x.norm() <= UNITARY_TOL)
            });
        Ok(Self {
            l_in,
            l_out,
            blocks,
            subnormalized,
            unitary,
        })
    }

    /// The same spatial matrix for every internal level.
    pub fn level_independent(matrix: Block, levels: usize) -> Result<Self> {
        if levels == 0 {
            return Err(Error::Dimension(
                "at least one internal level required".into(),
            ));
        }
        Self::from_blocks(vec![matrix; levels], false)
    }

    pub fn identity(modes: usize, levels: usize) -> Result<Self> {
        Self::level_independent(Block::identity(modes, modes), levels)
    }

    pub fn l_in(&self) -> usize {
        self.l_in
    }

    pub fn l_out(&self) -> usize {
        self.l_out
    }

    pub fn levels(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn is_subnormalized(&self) -> bool {
        self.subnormalized
    }

    pub fn block(&self, level: usize) -> &Block {
        &self.blocks[level]
    }

    /// Entry `(input, output)` of the block for `level`.
    pub fn entry(&self, level: usize, input: usize, output: usize) -> Complex64 {
        self.blocks[level][(input, output)]
    }

    /// Largest deviation of `T T†` from the identity over all levels.
    pub fn unitarity_defect(&self) -> f64 {
        if self.l_in != self.l_out {
            return f64::INFINITY;
        }
        self.blocks
            .iter()
            .map(|b| {
                let prod = b * b.adjoint() - Block::identity(self.l_in, self.l_in);
                prod.iter().map(|x| x.norm()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max)
    }

    /// The inverse element for unitaries: conjugate transpose per level.
    pub fn adjoint(&self) -> Result<Self> {
        Self::from_blocks(
            self.blocks.iter().map(|b| b.adjoint()).collect(),
            self.subnormalized,
        )
    }

    /// Photons pass `self` first, then `next`.
    pub fn then(&self, next: &Self) -> Result<Self> {
        sequential(self, next)
    }

    /// Places a square element on the listed modes of a `total`-mode system,
    /// acting as the identity elsewhere. `targets[i]` receives the element's
    /// port `i`.
    pub fn embed(&self, targets: &[usize], total: usize) -> Result<Self> {
        if self.l_in != self.l_out || targets.len() != self.l_in {
            return Err(Error::Dimension(format!(
                "cannot embed a {}x{} element onto {} modes",
                self.l_in,
                self.l_out,
                targets.len()
            )));
        }
        let mut seen = vec![false; total];
        for &t in targets {
            if t >= total || std::mem::replace(&mut seen[t], true) {
                return Err(Error::Dimension(format!(
                    "embedding target {t} is out of range or repeated"
                )));
            }
        }
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                let mut m = Block::identity(total, total);
                for &t in targets {
                    m[(t, t)] = zero();
                }
                for (i, &ti) in targets.iter().enumerate() {
                    for (j, &tj) in targets.iter().enumerate() {
                        m[(ti, tj)] = b[(i, j)];
                    }
                }
                m
            })
            .collect();
        Self::from_blocks(blocks, self.subnormalized)
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::Dimension("port count must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Splits each input evenly into every output: all entries `1/sqrt(n)`.
/// Row-normalized but not unitary for `n >= 2`.
pub fn all_one(n: usize, levels: usize) -> Result<TransferMatrix> {
    check_n(n)?;
    let v = real(1.0 / (n as f64).sqrt());
    TransferMatrix::level_independent(Block::from_element(n, n, v), levels)
}

/// Symmetric multiport: `U[j, l] = exp(2 pi i j l / n) / sqrt(n)` (0-based).
pub fn dft(n: usize, levels: usize) -> Result<TransferMatrix> {
    check_n(n)?;
    let norm = 1.0 / (n as f64).sqrt();
    let m = Block::from_fn(n, n, |j, l| {
        // Exponent taken mod n.
        let k = (j * l) % n;
        Complex64::from_polar(norm, 2.0 * PI * k as f64 / n as f64)
    });
    TransferMatrix::level_independent(m, levels)
}

/// Two-port splitter with transmissivity `p`: `[[a, b], [b, -a]]`,
/// `a = sqrt(p)`, `b = sqrt(1 - p)`.
pub fn beam_splitter(p: f64, levels: usize) -> Result<TransferMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!(
            "transmissivity {p} outside [0, 1]"
        )));
    }
    let (a, b) = (p.sqrt(), (1.0 - p).sqrt());
    let m = Block::from_row_slice(2, 2, &[real(a), real(b), real(b), real(-a)]);
    TransferMatrix::level_independent(m, levels)
}

/// Operator-level ancilla element with `n + k` inputs and `n + 1` outputs.
///
/// Main input `j < n` goes to output `j` with amplitude `sqrt(p)` and to the
/// ancilla output `n` with `sqrt(1 - p)`. Ancilla input `m >= n` spreads
/// `1/sqrt(n)` over outputs `0..n` and never reaches output `n`.
pub fn ancilla_transfer(n: usize, k: usize, p: f64, levels: usize) -> Result<TransferMatrix> {
    if k < 1 || k > n {
        return Err(Error::Parameter(format!(
            "ancilla count {k} must lie in 1..={n}"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!(
            "transmissivity {p} outside [0, 1]"
        )));
    }
    let (a, b) = (p.sqrt(), (1.0 - p).sqrt());
    let fan = 1.0 / (n as f64).sqrt();
    let m = Block::from_fn(n + k, n + 1, |j, l| {
        if j < n {
            if l == j {
                real(a)
            } else if l == n {
                real(b)
            } else {
                zero()
            }
        } else if l < n {
            real(fan)
        } else {
            zero()
        }
    });
    if levels == 0 {
        return Err(Error::Dimension(
            "at least one internal level required".into(),
        ));
    }
    TransferMatrix::from_blocks(vec![m; levels], false)
}

/// Routes input `s` to output 0 for internal level `s`; the port-0 photon of
/// level `s` leaves through port `s`. Lossless merging of `levels` single-level
/// paths into one mode. For two levels this is a polarizing beam splitter.
pub fn level_multiplexer(levels: usize) -> Result<TransferMatrix> {
    check_n(levels)?;
    let blocks = (0..levels)
        .map(|s| {
            let mut m = Block::identity(levels, levels);
            m.swap_rows(0, s);
            m
        })
        .collect();
    TransferMatrix::from_blocks(blocks, false)
}

/// Polarizing beam splitter on two modes: level 0 (H) is transmitted,
/// level 1 (V) swaps spatial modes.
pub fn pbs() -> TransferMatrix {
    level_multiplexer(2).expect("two-level multiplexer is valid")
}

/// A `1 -> n` splitter tree of `n - 1` balanced beam splitters (`n` a power
/// of two). Input 0 reaches every output with amplitude `+1/sqrt(n)`.
pub fn bs_tree(n: usize, levels: usize) -> Result<TransferMatrix> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::Parameter(format!(
            "beam-splitter tree needs a power of two >= 2, got {n}"
        )));
    }
    let bs = beam_splitter(0.5, levels)?;
    let mut acc = TransferMatrix::identity(n, levels)?;
    let mut stride = n / 2;
    while stride >= 1 {
        for first in (0..n).step_by(2 * stride) {
            acc = acc.then(&bs.embed(&[first, first + stride], n)?)?;
        }
        stride /= 2;
    }
    Ok(acc)
}

/// Mode relabeling: input `i` leaves through output `perm[i]`.
pub fn permutation(perm: &[usize], levels: usize) -> Result<TransferMatrix> {
    let n = perm.len();
    check_n(n)?;
    let mut seen = vec![false; n];
    for &p in perm {
        if p >= n || std::mem::replace(&mut seen[p], true) {
            return Err(Error::Parameter(format!("{perm:?} is not a permutation")));
        }
    }
    let mut m = Block::zeros(n, n);
    for (i, &p) in perm.iter().enumerate() {
        m[(i, p)] = real(1.0);
    }
    TransferMatrix::level_independent(m, levels)
}

/// Diagonal element multiplying a photon in mode `m` with level `s` by
/// `phases[m][s]` (each of unit modulus).
pub fn phase_screen(phases: &[Vec<Complex64>]) -> Result<TransferMatrix> {
    let modes = phases.len();
    check_n(modes)?;
    let levels = phases[0].len();
    if phases.iter().any(|row| row.len() != levels) {
        return Err(Error::Dimension("ragged phase table".into()));
    }
    let blocks = (0..levels)
        .map(|s| {
            Block::from_fn(
                modes,
                modes,
                |i, j| if i == j { phases[i][s] } else { zero() },
            )
        })
        .collect();
    TransferMatrix::from_blocks(blocks, false)
}

/// Haar-random unitary from the QR decomposition of a complex Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(
    n: usize,
    levels: usize,
    rng: &mut R,
) -> Result<TransferMatrix> {
    check_n(n)?;
    let mut gaussian = || -> f64 { rng.sample(StandardNormal) };
    let z = Block::from_fn(n, n, |_, _| Complex64::new(gaussian(), gaussian()));
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    // Fix the phase freedom of QR so the distribution is Haar.
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            real(1.0)
        };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    TransferMatrix::level_independent(q, levels)
}

/// Composition in photon-flow order: `T^(s) = A^(s) B^(s)`.
pub fn sequential(a: &TransferMatrix, b: &TransferMatrix) -> Result<TransferMatrix> {
    if a.l_out != b.l_in || a.levels() != b.levels() {
        return Err(Error::Dimension(format!(
            "cannot feed {} outputs with {} levels into {} inputs with {} levels",
            a.l_out,
            a.levels(),
            b.l_in,
            b.levels()
        )));
    }
    let blocks = a.blocks.iter().zip(&b.blocks).map(|(x, y)| x * y).collect();
    TransferMatrix::from_blocks(blocks, a.subnormalized || b.subnormalized)
}

/// Direct sum over consecutive, disjoint spatial ranges.
pub fn parallel(parts: &[TransferMatrix]) -> Result<TransferMatrix> {
    let first = parts
        .first()
        .ok_or_else(|| Error::Dimension("parallel composition of nothing".into()))?;
    let levels = first.levels();
    if parts.iter().any(|p| p.levels() != levels) {
        return Err(Error::Dimension(
            "parallel parts have different level counts".into(),
        ));
    }
    let l_in: usize = parts.iter().map(|p| p.l_in).sum();
    let l_out: usize = parts.iter().map(|p| p.l_out).sum();
    let blocks = (0..levels)
        .map(|s| {
            let mut m = Block::zeros(l_in, l_out);
            let (mut r, mut c) = (0, 0);
            for p in parts {
                m.view_mut((r, c), (p.l_in, p.l_out))
                    .copy_from(&p.blocks[s]);
                r += p.l_in;
                c += p.l_out;
            }
            m
        })
        .collect();
    TransferMatrix::from_blocks(blocks, parts.iter().any(|p| p.subnormalized))
}
