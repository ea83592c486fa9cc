//! Detection-pattern projection, qudit extraction, Dicke targets and the
//! heralding phase correction.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{FockState, ModeLabel, OccupationVector};
use crate::interferometer::{phase_screen, TransferMatrix};

/// Largest dense qudit register, `d^N`.
pub const MAX_QUDIT_DIM: usize = 1 << 20;

/// Exactly `count` photons in the union of `modes`. With a level filter the
/// photons must also carry that internal level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub modes: Vec<usize>,
    pub level: Option<usize>,
    pub count: u32,
}

/// A detection event. Modes not covered by any constraint must stay empty.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PostselectionPattern {
    constraints: Vec<Constraint>,
    owner: BTreeMap<usize, usize>,
}

impl PostselectionPattern {
    pub fn new(constraints: Vec<Constraint>) -> Result<Self> {
        let mut pattern = Self::default();
        for c in constraints {
            pattern = pattern.with(c.modes, c.level, c.count)?;
        }
        Ok(pattern)
    }

    /// One photon, of any level, in each listed mode.
    pub fn one_per_mode(modes: &[usize]) -> Result<Self> {
        modes
            .iter()
            .try_fold(Self::default(), |p, &m| p.with(vec![m], None, 1))
    }

    pub fn with(mut self, modes: Vec<usize>, level: Option<usize>, count: u32) -> Result<Self> {
        let idx = self.constraints.len();
        for &m in &modes {
            if self.owner.insert(m, idx).is_some() {
                return Err(Error::Parameter(format!(
                    "mode {m} appears in two constraints"
                )));
            }
        }
        self.constraints.push(Constraint {
            modes,
            level,
            count,
        });
        Ok(self)
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    /// Total photon number the pattern asks for.
    pub fn photon_count(&self) -> u32 {
        self.constraints.iter().map(|c| c.count).sum()
    }

    pub fn accepts(&self, occ: &OccupationVector) -> bool {
        let mut seen = vec![0u32; self.constraints.len()];
        for (label, n) in occ.iter() {
            let Some(&i) = self.owner.get(&label.spatial) else {
                return false;
            };
            if let Some(level) = self.constraints[i].level {
                if label.internal != level {
                    return false;
                }
            }
            seen[i] += n;
        }
        seen.iter()
            .zip(&self.constraints)
            .all(|(n, c)| *n == c.count)
    }

    /// Most photons any accepted event can place in each of the first
    /// `modes` spatial modes.
    pub fn mode_capacity(&self, modes: usize) -> Vec<u32> {
        (0..modes)
            .map(|m| self.owner.get(&m).map_or(0, |&i| self.constraints[i].count))
            .collect()
    }

    fn max_mode(&self) -> Option<usize> {
        self.owner.keys().next_back().copied()
    }
}

/// The accepted branch of a state: unnormalized, with its weight.
#[derive(Clone, Debug)]
pub struct Projection {
    pub state: FockState,
    pub probability: f64,
}

impl Projection {
    /// The renormalized conditional state, if the event can happen at all.
    pub fn conditioned(&self) -> Option<FockState> {
        if self.probability > 0.0 {
            self.state.normalize().ok()
        } else {
            None
        }
    }
}

pub fn project(s: &FockState, pattern: &PostselectionPattern) -> Result<Projection> {
    if let Some(m) = pattern.max_mode() {
        if m >= s.modes() {
            return Err(Error::Dimension(format!(
                "pattern refers to mode {m} of a {}-mode state",
                s.modes()
            )));
        }
    }
    let kept = s
        .terms()
        .filter(|(o, _)| pattern.accepts(o))
        .map(|(o, a)| (o.clone(), *a));
    let state = FockState::from_terms(s.modes(), s.levels(), s.photon_number(), kept)?;
    let probability = state.norm_sq();
    Ok(Projection { state, probability })
}

/// The target multiset: `k[j]` qudits in level `j`, `N = sum(k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DickeSpec {
    n: usize,
    k: Vec<usize>,
}

impl DickeSpec {
    pub fn new(n: usize, k: Vec<usize>) -> Result<Self> {
        if k.is_empty() {
            return Err(Error::Spec("level counts must not be empty".into()));
        }
        let sum: usize = k.iter().sum();
        if sum != n {
            return Err(Error::Spec(format!(
                "level counts {k:?} sum to {sum}, expected {n}"
            )));
        }
        Ok(Self { n, k })
    }

    pub fn from_counts(k: Vec<usize>) -> Result<Self> {
        let n = k.iter().sum();
        Self::new(n, k)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> &[usize] {
        &self.k
    }

    pub fn levels(&self) -> usize {
        self.k.len()
    }

    /// Photons outside level 0.
    pub fn excited(&self) -> usize {
        self.n - self.k[0]
    }

    /// Number of distinct arrangements, `N! / prod k_j!`.
    pub fn term_count(&self) -> u128 {
        let mut out: u128 = 1;
        let mut placed: u128 = 0;
        for &kj in &self.k {
            for i in 1..=kj as u128 {
                placed += 1;
                out = out * placed / i;
            }
        }
        out
    }
}

/// Dense amplitudes over `|s_1 ... s_N>`, the first qudit most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct QuditState {
    levels: usize,
    qudits: usize,
    amplitudes: Vec<Complex64>,
}

fn register_dim(levels: usize, qudits: usize) -> Result<usize> {
    let mut dim: usize = 1;
    for _ in 0..qudits {
        dim = dim
            .checked_mul(levels)
            .filter(|&d| d <= MAX_QUDIT_DIM)
            .ok_or_else(|| {
                Error::Capacity(format!(
                    "{levels}^{qudits} amplitudes exceed the cap of {MAX_QUDIT_DIM}"
                ))
            })?;
    }
    Ok(dim)
}

impl QuditState {
    pub fn from_amplitudes(
        levels: usize,
        qudits: usize,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self> {
        let dim = register_dim(levels, qudits)?;
        if amplitudes.len() != dim {
            return Err(Error::Dimension(format!(
                "{} amplitudes for a {levels}^{qudits} register",
                amplitudes.len()
            )));
        }
        Ok(Self {
            levels,
            qudits,
            amplitudes,
        })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn qudits(&self) -> usize {
        self.qudits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits.iter().fold(0, |acc, &s| acc * self.levels + s)
    }

    pub fn digits_of(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.qudits];
        for slot in out.iter_mut().rev() {
            *slot = index % self.levels;
            index /= self.levels;
        }
        out
    }

    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Places qudit `i` as one photon in `register[i]` with its value as the
    /// internal level.
    pub fn to_fock(&self, register: &[usize], modes: usize) -> Result<FockState> {
        if register.len() != self.qudits {
            return Err(Error::Dimension(format!(
                "{} register modes for {} qudits",
                register.len(),
                self.qudits
            )));
        }
        let terms = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() > 0.0)
            .map(|(i, a)| {
                let occ = OccupationVector::from_counts(
                    self.digits_of(i)
                        .into_iter()
                        .zip(register)
                        .map(|(s, &m)| (ModeLabel::new(m, s), 1)),
                );
                (occ, *a)
            });
        FockState::from_terms(modes, self.levels, self.qudits as u32, terms)
    }

    fn fix_global_phase(&mut self) {
        if let Some(first) = self.amplitudes.iter().find(|a| a.norm() > 0.0) {
            let rot = first.conj() / first.norm();
            for a in &mut self.amplitudes {
                *a *= rot;
            }
        }
    }
}

/// Reads one qudit per register mode. The remaining modes must hold the same
/// occupation in every term; that factor is discarded.
pub fn extract_qudits(s: &FockState, register: &[usize]) -> Result<QuditState> {
    let levels = s.levels();
    let dim = register_dim(levels, register.len())?;
    let slot: BTreeMap<usize, usize> = register.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    if slot.len() != register.len() {
        return Err(Error::Parameter("register lists a mode twice".into()));
    }
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
    let mut rest: Option<OccupationVector> = None;
    for (occ, amp) in s.terms() {
        let mut digits = vec![None; register.len()];
        for (label, n) in occ.iter() {
            if let Some(&i) = slot.get(&label.spatial) {
                if n != 1 || digits[i].is_some() {
                    return Err(Error::Encoding(format!(
                        "register mode {} holds more than one photon in {occ}",
                        label.spatial
                    )));
                }
                digits[i] = Some(label.internal);
            }
        }
        let digits: Vec<usize> = digits
            .into_iter()
            .enumerate()
            .map(|(i, d)| {
                d.ok_or_else(|| {
                    Error::Encoding(format!("register mode {} is empty in {occ}", register[i]))
                })
            })
            .collect::<Result<_>>()?;
        let outside = occ.filter_modes(|m| !slot.contains_key(&m));
        match &rest {
            None => rest = Some(outside),
            Some(r) if *r != outside => {
                return Err(Error::EntangledAncilla(format!(
                    "ancilla occupation varies between {r} and {outside}"
                )))
            }
            Some(_) => {}
        }
        let index = digits.iter().fold(0, |acc, &d| acc * levels + d);
        amplitudes[index] += amp;
    }
    let mut q = QuditState {
        levels,
        qudits: register.len(),
        amplitudes,
    };
    let norm = q.norm_sq().sqrt();
    if norm == 0.0 {
        return Err(Error::DegenerateState("no register amplitude".into()));
    }
    for a in &mut q.amplitudes {
        *a /= norm;
    }
    q.fix_global_phase();
    Ok(q)
}

/// The symmetric Dicke state: every arrangement of the multiset with
/// amplitude `sqrt(prod k_j! / N!)`.
pub fn dicke(spec: &DickeSpec) -> Result<QuditState> {
    let (levels, qudits) = (spec.levels(), spec.n());
    let dim = register_dim(levels, qudits)?;
    let amp = Complex64::new(1.0 / (spec.term_count() as f64).sqrt(), 0.0);
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
    let mut digits = Vec::with_capacity(qudits);
    let mut left = spec.k().to_vec();
    fill_arrangements(&mut left, &mut digits, qudits, &mut |ds: &[usize]| {
        let idx = ds.iter().fold(0, |acc, &d| acc * levels + d);
        amplitudes[idx] = amp;
    });
    QuditState::from_amplitudes(levels, qudits, amplitudes)
}

// Enumerates the distinct permutations of a multiset without repeats.
fn fill_arrangements<F: FnMut(&[usize])>(
    left: &mut [usize],
    digits: &mut Vec<usize>,
    len: usize,
    emit: &mut F,
) {
    if digits.len() == len {
        emit(digits);
        return;
    }
    for s in 0..left.len() {
        if left[s] > 0 {
            left[s] -= 1;
            digits.push(s);
            fill_arrangements(left, digits, len, emit);
            digits.pop();
            left[s] += 1;
        }
    }
}

/// `|<a|b>|^2`.
pub fn fidelity(a: &QuditState, b: &QuditState) -> Result<f64> {
    if a.levels != b.levels || a.qudits != b.qudits {
        return Err(Error::Dimension(format!(
            "registers differ: {}^{} vs {}^{}",
            a.levels, a.qudits, b.levels, b.qudits
        )));
    }
    let overlap: Complex64 = a
        .amplitudes
        .iter()
        .zip(&b.amplitudes)
        .map(|(x, y)| x.conj() * y)
        .sum();
    Ok(overlap.norm_sqr().min(1.0))
}

/// Phases `omega_N^{-(l1-1)(l-1)}` for output modes `l1 = 1..=N` when the
/// heralding photons are detected in multiport output `l = herald_mode`.
pub fn phase_correction(n: usize, herald_mode: usize) -> Result<Vec<Complex64>> {
    if n == 0 || herald_mode < 1 || herald_mode > n {
        return Err(Error::Parameter(format!(
            "herald mode {herald_mode} outside 1..={n}"
        )));
    }
    Ok((0..n)
        .map(|l1| {
            let k = (l1 * (herald_mode - 1)) % n;
            Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64)
        })
        .collect())
}

/// Local feed-forward element for the register: in `register[i]` every photon
/// of level `s >= 1` picks up `phases[i]`, level 0 passes unchanged. Up to a
/// global phase this is the relative phase `conj(phases[i])` on `|0>`.
pub fn correction_screen(
    phases: &[Complex64],
    register: &[usize],
    modes: usize,
    levels: usize,
) -> Result<TransferMatrix> {
    if phases.len() != register.len() {
        return Err(Error::Dimension(
            "one phase per register mode required".into(),
        ));
    }
    let mut table = vec![vec![Complex64::new(1.0, 0.0); levels]; modes];
    for (&m, &ph) in register.iter().zip(phases) {
        let row = table
            .get_mut(m)
            .ok_or_else(|| Error::Dimension(format!("register mode {m} out of range")))?;
        for v in row.iter_mut().skip(1) {
            *v = ph;
        }
    }
    phase_screen(&table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::apply_transfer;
    use crate::interferometer::{all_one, dft};
    use proptest::prelude::*;

    fn occ(t: &[(usize, usize, u32)]) -> OccupationVector {
        OccupationVector::from_triples(t)
    }

    fn operator_output() -> FockState {
        let s = FockState::basis_state(4, 2, occ(&[(0, 0, 1), (1, 0, 1), (2, 1, 1), (3, 1, 1)]))
            .unwrap();
        apply_transfer(&all_one(4, 2).unwrap(), &s)
            .unwrap()
            .normalize()
            .unwrap()
    }

    #[test]
    fn operator_projection() {
        let pattern = PostselectionPattern::one_per_mode(&[0, 1, 2, 3]).unwrap();
        let proj = project(&operator_output(), &pattern).unwrap();
        assert!((proj.probability - 0.09375).abs() < 1e-14);
        assert_eq!(proj.state.len(), 6);

        let q = extract_qudits(&proj.conditioned().unwrap(), &[0, 1, 2, 3]).unwrap();
        let nonzero: Vec<_> = q.amplitudes().iter().filter(|a| a.norm() > 1e-12).collect();
        assert_eq!(nonzero.len(), 6);
        for a in nonzero {
            assert!((a - Complex64::new(1.0 / 6f64.sqrt(), 0.0)).norm() < 1e-12);
        }
        let target = dicke(&DickeSpec::new(4, vec![2, 2]).unwrap()).unwrap();
        assert!((fidelity(&q, &target).unwrap() - 1.0).abs() < 1e-12);

        let vac = FockState::vacuum(4, 2);
        let proj = project(&vac, &pattern).unwrap();
        assert_eq!(proj.probability, 0.0);
        assert!(proj.state.is_null());
        assert!(proj.conditioned().is_none());
    }

    #[test]
    fn hom_coincidence_is_rejected() {
        let s = FockState::basis_state(2, 1, occ(&[(0, 0, 1), (1, 0, 1)])).unwrap();
        let out = apply_transfer(&dft(2, 1).unwrap(), &s).unwrap();
        let proj = project(&out, &PostselectionPattern::one_per_mode(&[0, 1]).unwrap()).unwrap();
        assert!(proj.probability.abs() < 1e-12);
    }

    #[test]
    fn pattern_rules() {
        assert!(PostselectionPattern::one_per_mode(&[0, 0]).is_err());
        let p = PostselectionPattern::one_per_mode(&[0, 1])
            .unwrap()
            .with(vec![3], Some(0), 2)
            .unwrap();
        assert_eq!(p.photon_count(), 4);
        assert!(p.accepts(&occ(&[(0, 1, 1), (1, 0, 1), (3, 0, 2)])));
        // Stray photon in an uncovered mode.
        assert!(!p.accepts(&occ(&[(0, 1, 1), (1, 0, 1), (2, 0, 1), (3, 0, 1)])));
        // Wrong level in a filtered mode.
        assert!(!p.accepts(&occ(&[(0, 1, 1), (1, 0, 1), (3, 0, 1), (3, 1, 1)])));
        // Count mismatch.
        assert!(!p.accepts(&occ(&[(0, 1, 2), (3, 0, 2)])));

        let small = FockState::vacuum(2, 1);
        assert!(matches!(project(&small, &p), Err(Error::Dimension(_))));
    }

    #[test]
    fn patterns_partition_the_norm() {
        // Three photons in three modes: enumerate every occupation pattern.
        let s = FockState::basis_state(3, 1, occ(&[(0, 0, 2), (2, 0, 1)])).unwrap();
        let out = apply_transfer(&dft(3, 1).unwrap(), &s).unwrap();
        let mut total = 0.0;
        for a in 0..=3u32 {
            for b in 0..=(3 - a) {
                let c = 3 - a - b;
                let p = PostselectionPattern::new(vec![
                    Constraint {
                        modes: vec![0],
                        level: None,
                        count: a,
                    },
                    Constraint {
                        modes: vec![1],
                        level: None,
                        count: b,
                    },
                    Constraint {
                        modes: vec![2],
                        level: None,
                        count: c,
                    },
                ])
                .unwrap();
                total += project(&out, &p).unwrap().probability;
            }
        }
        assert!((total - out.norm_sq()).abs() < 1e-12);
    }

    #[test]
    fn extraction_errors_and_ancilla() {
        let s = FockState::basis_state(3, 2, occ(&[(0, 0, 1), (1, 1, 1)])).unwrap();
        let q = extract_qudits(&s, &[0, 1]).unwrap();
        assert_eq!(
            q.amplitudes()[q.index_of(&[0, 1])],
            Complex64::new(1.0, 0.0)
        );

        let doubled = FockState::basis_state(3, 2, occ(&[(0, 0, 2)])).unwrap();
        assert!(matches!(
            extract_qudits(&doubled, &[0, 1]),
            Err(Error::Encoding(_))
        ));

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let entangled = FockState::from_terms(
            3,
            2,
            3,
            [
                (
                    occ(&[(0, 0, 1), (1, 1, 1), (2, 0, 1)]),
                    Complex64::new(h, 0.0),
                ),
                (
                    occ(&[(0, 1, 1), (1, 0, 1), (2, 1, 1)]),
                    Complex64::new(h, 0.0),
                ),
            ],
        )
        .unwrap();
        assert!(matches!(
            extract_qudits(&entangled, &[0, 1]),
            Err(Error::EntangledAncilla(_))
        ));

        // A definite ancilla factor is stripped.
        let with_ancilla = FockState::from_terms(
            3,
            2,
            4,
            [
                (
                    occ(&[(0, 0, 1), (1, 1, 1), (2, 0, 2)]),
                    Complex64::new(0.0, h),
                ),
                (
                    occ(&[(0, 1, 1), (1, 0, 1), (2, 0, 2)]),
                    Complex64::new(0.0, h),
                ),
            ],
        )
        .unwrap();
        let stripped = FockState::from_terms(
            3,
            2,
            2,
            [
                (occ(&[(0, 0, 1), (1, 1, 1)]), Complex64::new(h, 0.0)),
                (occ(&[(0, 1, 1), (1, 0, 1)]), Complex64::new(h, 0.0)),
            ],
        )
        .unwrap();
        assert_eq!(
            extract_qudits(&with_ancilla, &[0, 1]).unwrap(),
            extract_qudits(&stripped, &[0, 1]).unwrap()
        );
    }

    #[test]
    fn dicke_targets() {
        let h = 1.0 / 2f64.sqrt();
        let d = dicke(&DickeSpec::new(2, vec![1, 1]).unwrap()).unwrap();
        assert!((d.amplitudes()[d.index_of(&[0, 1])].re - h).abs() < 1e-15);
        assert!((d.amplitudes()[d.index_of(&[1, 0])].re - h).abs() < 1e-15);
        assert_eq!(d.amplitudes()[d.index_of(&[0, 0])].norm(), 0.0);

        for k in [vec![2, 2], vec![1, 1, 1]] {
            let spec = DickeSpec::from_counts(k).unwrap();
            assert_eq!(spec.term_count(), 6);
            let d = dicke(&spec).unwrap();
            let nz: Vec<_> = d.amplitudes().iter().filter(|a| a.norm() > 0.0).collect();
            assert_eq!(nz.len(), 6);
            assert!(nz.iter().all(|a| (a.re - 1.0 / 6f64.sqrt()).abs() < 1e-15));
            assert!((d.norm_sq() - 1.0).abs() < 1e-14);
        }
        assert!(matches!(DickeSpec::new(3, vec![1, 1]), Err(Error::Spec(_))));
        assert!(matches!(
            dicke(&DickeSpec::new(21, vec![10, 11]).unwrap()),
            Err(Error::Capacity(_))
        ));
    }

    #[test]
    fn fidelities() {
        let a = dicke(&DickeSpec::new(3, vec![2, 1]).unwrap()).unwrap();
        assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-14);
        let mut e0 = vec![Complex64::new(0.0, 0.0); 4];
        let mut e1 = e0.clone();
        e0[0] = Complex64::new(1.0, 0.0);
        e1[3] = Complex64::new(0.0, 1.0);
        let (x, y) = (
            QuditState::from_amplitudes(2, 2, e0).unwrap(),
            QuditState::from_amplitudes(2, 2, e1).unwrap(),
        );
        assert_eq!(fidelity(&x, &y).unwrap(), 0.0);
        assert!(fidelity(&a, &x).is_err());
    }

    #[test]
    fn correction_phases() {
        let p = phase_correction(4, 1).unwrap();
        assert!(p
            .iter()
            .all(|z| (z - Complex64::new(1.0, 0.0)).norm() < 1e-15));
        let p = phase_correction(2, 2).unwrap();
        assert!((p[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((p[1] - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!(phase_correction(3, 0).is_err());
        assert!(phase_correction(3, 4).is_err());
    }

    fn arb_qudit_state() -> impl Strategy<Value = QuditState> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 9).prop_filter_map("nonzero", |v| {
            let amps: Vec<Complex64> = v.into_iter().map(|(r, i)| Complex64::new(r, i)).collect();
            let n: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            (n > 1e-3).then(|| {
                QuditState::from_amplitudes(3, 2, amps.into_iter().map(|a| a / n).collect())
                    .unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn embedding_round_trip(q in arb_qudit_state()) {
            let f = q.to_fock(&[3, 1], 4).unwrap();
            let back = extract_qudits(&f, &[3, 1]).unwrap();
            prop_assert!((fidelity(&q, &back).unwrap() - 1.0).abs() < 1e-12);
            let mut fixed = q.clone();
            fixed.fix_global_phase();
            for (a, b) in fixed.amplitudes().iter().zip(back.amplitudes()) {
                prop_assert!((a - b).norm() < 1e-12);
            }
        }

        #[test]
        fn dicke_is_permutation_symmetric(k0 in 0usize..3, k1 in 0usize..3, k2 in 0usize..3, seed in 0u64..1000) {
            prop_assume!(k0 + k1 + k2 > 0);
            let spec = DickeSpec::from_counts(vec![k0, k1, k2]).unwrap();
            let d = dicke(&spec).unwrap();
            let n = spec.n();
            // A pseudo-random permutation of the qudit positions.
            let mut perm: Vec<usize> = (0..n).collect();
            let mut x = seed;
            for i in (1..n).rev() {
                x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                perm.swap(i, (x >> 33) as usize % (i + 1));
            }
            for (i, a) in d.amplitudes().iter().enumerate() {
                let digits = d.digits_of(i);
                let permuted: Vec<usize> = perm.iter().map(|&p| digits[p]).collect();
                prop_assert_eq!(*a, d.amplitudes()[d.index_of(&permuted)]);
            }
        }
    }
}
