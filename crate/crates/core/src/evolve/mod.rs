//! Evolution of Fock states through transfer matrices.
//!
//! Two independent engines are provided. [`apply_transfer`] substitutes every
//! input creation operator by its image and expands the product photon by
//! photon. [`transition_amplitude`] computes a single output amplitude as a
//! permanent and serves as the cross-check for the first.

mod permanent;

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;

pub use permanent::permanent;

use crate::error::{Error, Result};
use crate::fock::{FockState, ModeLabel, OccupationVector};
use crate::interferometer::{dft, TransferMatrix};

/// Largest permanent evaluated by [`transition_amplitude`].
pub const DEFAULT_PERMANENT_CAP: usize = 20;

fn check_input(t: &TransferMatrix, s: &FockState) -> Result<()> {
    if s.modes() != t.l_in() || s.levels() != t.levels() {
        return Err(Error::Dimension(format!(
            "state over ({} modes, {} levels) does not fit a {}-input, {}-level transfer",
            s.modes(),
            s.levels(),
            t.l_in(),
            t.levels()
        )));
    }
    Ok(())
}

/// Evolves `state` through `t`.
///
/// Each basis term is turned into its creation-operator monomial
/// (`|n> = prod (a†)^n / sqrt(n!) |vac>`), every `a†_{j,s}` is replaced by
/// `sum_l T^(s)[j, l] b†_{l,s}`, and the expanded monomials are converted back
/// with a factor `sqrt(prod m!)`.
pub fn apply_transfer(t: &TransferMatrix, state: &FockState) -> Result<FockState> {
    expand(t, state, None)
}

/// Like [`apply_transfer`], but only keeps output occupations with at most
/// `capacity[l]` photons in spatial mode `l`. Photons are only ever added
/// during the expansion, so partial terms over capacity are dropped as soon
/// as they appear. Every retained amplitude equals the unrestricted one.
pub fn apply_transfer_bounded(
    t: &TransferMatrix,
    state: &FockState,
    capacity: &[u32],
) -> Result<FockState> {
    if capacity.len() != t.l_out() {
        return Err(Error::Dimension(format!(
            "{} capacities for {} output modes",
            capacity.len(),
            t.l_out()
        )));
    }
    expand(t, state, Some(capacity))
}

fn expand(t: &TransferMatrix, state: &FockState, capacity: Option<&[u32]>) -> Result<FockState> {
    check_input(t, state)?;
    let open = |l: usize| capacity.is_none_or(|c| c[l] > 0);

    // Nonzero outputs of each (level, input) row.
    let rows: Vec<Vec<Vec<(usize, Complex64)>>> = (0..t.levels())
        .map(|s| {
            (0..t.l_in())
                .map(|j| {
                    (0..t.l_out())
                        .filter_map(|l| {
                            let v = t.entry(s, j, l);
                            (v != Complex64::new(0.0, 0.0) && open(l)).then_some((l, v))
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let mut out: BTreeMap<OccupationVector, Complex64> = BTreeMap::new();
    for (occ, amp) in state.terms() {
        let mut partial: BTreeMap<OccupationVector, Complex64> = BTreeMap::new();
        partial.insert(
            OccupationVector::vacuum(),
            amp / occ.factorial_product().sqrt(),
        );
        for (label, n) in occ.iter() {
            let row = &rows[label.internal][label.spatial];
            for _ in 0..n {
                let mut next = BTreeMap::new();
                for (o, c) in &partial {
                    for &(l, v) in row {
                        if let Some(cap) = capacity {
                            if o.count_in_mode(l) >= cap[l] {
                                continue;
                            }
                        }
                        let mut o2 = o.clone();
                        o2.add_photon(ModeLabel::new(l, label.internal));
                        *next.entry(o2).or_insert(Complex64::new(0.0, 0.0)) += c * v;
                    }
                }
                partial = next;
            }
        }
        for (o, c) in partial {
            let norm = o.factorial_product().sqrt();
            *out.entry(o).or_insert(Complex64::new(0.0, 0.0)) += c * norm;
        }
    }
    Ok(FockState::from_map_unchecked(
        t.l_out(),
        t.levels(),
        state.photon_number(),
        out,
    ))
}

/// `<output| T |input>` as the permanent of the row/column-repeated
/// submatrix divided by `sqrt(prod in! prod out!)`.
pub fn transition_amplitude(
    t: &TransferMatrix,
    input: &OccupationVector,
    output: &OccupationVector,
) -> Result<Complex64> {
    transition_amplitude_capped(t, input, output, DEFAULT_PERMANENT_CAP)
}

pub fn transition_amplitude_capped(
    t: &TransferMatrix,
    input: &OccupationVector,
    output: &OccupationVector,
    cap: usize,
) -> Result<Complex64> {
    input.validate(t.l_in(), t.levels())?;
    output.validate(t.l_out(), t.levels())?;
    if input.level_counts(t.levels()) != output.level_counts(t.levels()) {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let n = input.total() as usize;
    if n > cap {
        return Err(Error::Capacity(format!(
            "{n}-photon permanent exceeds the cap of {cap}"
        )));
    }
    let expand = |o: &OccupationVector| -> Vec<ModeLabel> {
        o.iter()
            .flat_map(|(l, k)| std::iter::repeat_n(l, k as usize))
            .collect()
    };
    let (rows, cols) = (expand(input), expand(output));
    let m = DMatrix::from_fn(n, n, |i, j| {
        let (a, b) = (rows[i], cols[j]);
        if a.internal == b.internal {
            t.entry(a.internal, a.spatial, b.spatial)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let norm = (input.factorial_product() * output.factorial_product()).sqrt();
    Ok(permanent(&m) / norm)
}

/// Outcome of a bunching stage: the probability that every photon leaves
/// through output port 0, and the state conditioned on that event.
#[derive(Clone, Debug)]
pub struct Bunching {
    pub probability: f64,
    pub state: FockState,
}

/// `k` single photons of one level enter the `k` ports of a `k`-port
/// multiport; returns the probability that all of them exit port 0.
pub fn prep_success(k: usize) -> Result<Bunching> {
    if k == 0 {
        return Err(Error::Parameter(
            "bunching needs at least one photon".into(),
        ));
    }
    prep_success_mixed(&[k])
}

/// Single photons enter the `N = sum(k)` ports of an `N`-port multiport, the
/// first `k[0]` at level 0, the next `k[1]` at level 1, and so on. Returns the
/// probability that all of them exit port 0.
pub fn prep_success_mixed(k: &[usize]) -> Result<Bunching> {
    let n: usize = k.iter().sum();
    if n == 0 || k.is_empty() {
        return Err(Error::Parameter(
            "bunching needs at least one photon".into(),
        ));
    }
    let levels = k.len();
    let mut input = Vec::with_capacity(n);
    let mut mode = 0;
    for (s, &count) in k.iter().enumerate() {
        for _ in 0..count {
            input.push((mode, s, 1));
            mode += 1;
        }
    }
    let input = FockState::basis_state(n, levels, OccupationVector::from_triples(&input))?;
    let out = apply_transfer(&dft(n, levels)?, &input)?;
    let target = OccupationVector::from_counts(
        k.iter()
            .enumerate()
            .map(|(s, &c)| (ModeLabel::new(0, s), c as u32)),
    );
    let amp = out.amplitude(&target);
    let state = FockState::basis_state(n, levels, target)?;
    Ok(Bunching {
        probability: amp.norm_sqr(),
        state,
    })
}
