//! Sparse multi-photon Fock states with internal (qudit) labels.
//!
//! A photon lives in a spatial mode and carries an internal level. A basis
//! element is an [`OccupationVector`]; a [`FockState`] is a superposition of
//! basis elements that all share the same total photon number.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Amplitudes with modulus below this are dropped after every add/evolve.
pub const PRUNE_EPS: f64 = 1e-12;

/// A (spatial mode, internal level) pair. Orders by spatial mode first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ModeLabel {
    pub spatial: usize,
    pub internal: usize,
}

impl ModeLabel {
    pub const fn new(spatial: usize, internal: usize) -> Self {
        Self { spatial, internal }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.spatial, self.internal)
    }
}

/// Photon counts per occupied [`ModeLabel`], kept sorted and free of zeros.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OccupationVector {
    counts: Vec<(ModeLabel, u32)>,
    total: u32,
}

impl OccupationVector {
    pub fn vacuum() -> Self {
        Self::default()
    }

    /// Builds the canonical form: duplicate labels are merged, zero counts dropped.
    pub fn from_counts<I>(counts: I) -> Self
    where
        I: IntoIterator<Item = (ModeLabel, u32)>,
    {
        let mut merged: BTreeMap<ModeLabel, u32> = BTreeMap::new();
        for (label, n) in counts {
            if n > 0 {
                *merged.entry(label).or_insert(0) += n;
            }
        }
        let total = merged.values().sum();
        Self {
            counts: merged.into_iter().collect(),
            total,
        }
    }

    /// Convenience constructor from `(spatial, internal, count)` triples.
    pub fn from_triples(triples: &[(usize, usize, u32)]) -> Self {
        Self::from_counts(triples.iter().map(|&(m, s, n)| (ModeLabel::new(m, s), n)))
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn is_vacuum(&self) -> bool {
        self.total == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = (ModeLabel, u32)> + '_ {
        self.counts.iter().copied()
    }

    pub fn get(&self, label: ModeLabel) -> u32 {
        match self.counts.binary_search_by(|(l, _)| l.cmp(&label)) {
            Ok(i) => self.counts[i].1,
            Err(_) => 0,
        }
    }

    /// Photons in a spatial mode, summed over internal levels.
    pub fn count_in_mode(&self, spatial: usize) -> u32 {
        self.counts
            .iter()
            .filter(|(l, _)| l.spatial == spatial)
            .map(|(_, n)| n)
            .sum()
    }

    /// Photon count per internal level, for levels `0..levels`.
    pub fn level_counts(&self, levels: usize) -> Vec<u32> {
        let mut out = vec![0; levels];
        for (l, n) in &self.counts {
            if l.internal < levels {
                out[l.internal] += n;
            }
        }
        out
    }

    /// Adds one photon at `label`, keeping the canonical order.
    pub fn add_photon(&mut self, label: ModeLabel) {
        match self.counts.binary_search_by(|(l, _)| l.cmp(&label)) {
            Ok(i) => self.counts[i].1 += 1,
            Err(i) => self.counts.insert(i, (label, 1)),
        }
        self.total += 1;
    }

    /// The product of `n!` over all occupied labels.
    pub fn factorial_product(&self) -> f64 {
        self.counts
            .iter()
            .map(|&(_, n)| (1..=n).map(f64::from).product::<f64>())
            .product()
    }

    /// Restriction to the labels whose spatial mode satisfies `keep`.
    pub fn filter_modes<F: Fn(usize) -> bool>(&self, keep: F) -> Self {
        Self::from_counts(self.iter().filter(|(l, _)| keep(l.spatial)))
    }

    pub fn spatial_modes(&self) -> impl Iterator<Item = usize> + '_ {
        self.counts.iter().map(|(l, _)| l.spatial)
    }

    pub fn validate(&self, modes: usize, levels: usize) -> Result<()> {
        for (l, _) in &self.counts {
            if l.spatial >= modes || l.internal >= levels {
                return Err(Error::Dimension(format!(
                    "label {l} outside a system of {modes} modes and {levels} levels"
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for OccupationVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.counts.is_empty() {
            return write!(f, "vac");
        }
        for (i, (l, n)) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{l}:{n}")?;
        }
        Ok(())
    }
}

/// A number-homogeneous superposition of occupation vectors over a system of
/// `modes` spatial modes and `levels` internal levels.
#[derive(Clone, Debug, PartialEq)]
pub struct FockState {
    modes: usize,
    levels: usize,
    photon_number: u32,
    terms: BTreeMap<OccupationVector, Complex64>,
}

impl FockState {
    /// The normalized basis element `|occupation>`.
    pub fn basis_state(modes: usize, levels: usize, occupation: OccupationVector) -> Result<Self> {
        occupation.validate(modes, levels)?;
        let photon_number = occupation.total();
        let mut terms = BTreeMap::new();
        terms.insert(occupation, Complex64::new(1.0, 0.0));
        Ok(Self {
            modes,
            levels,
            photon_number,
            terms,
        })
    }

    pub fn vacuum(modes: usize, levels: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(OccupationVector::vacuum(), Complex64::new(1.0, 0.0));
        Self {
            modes,
            levels,
            photon_number: 0,
            terms,
        }
    }

    /// The zero vector of the given photon-number sector.
    pub fn null(modes: usize, levels: usize, photon_number: u32) -> Self {
        Self {
            modes,
            levels,
            photon_number,
            terms: BTreeMap::new(),
        }
    }

    /// Sums the given terms, rejecting occupations from another sector.
    pub fn from_terms<I>(modes: usize, levels: usize, photon_number: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (OccupationVector, Complex64)>,
    {
        let mut state = Self::null(modes, levels, photon_number);
        for (occ, amp) in terms {
            occ.validate(modes, levels)?;
            if occ.total() != photon_number {
                return Err(Error::Dimension(format!(
                    "occupation {occ} has {} photons, sector holds {photon_number}",
                    occ.total()
                )));
            }
            *state.terms.entry(occ).or_insert(Complex64::new(0.0, 0.0)) += amp;
        }
        state.prune();
        Ok(state)
    }

    /// Builds a state without re-validating labels. Callers guarantee the
    /// occupations are in range and in the right sector.
    pub(crate) fn from_map_unchecked(
        modes: usize,
        levels: usize,
        photon_number: u32,
        terms: BTreeMap<OccupationVector, Complex64>,
    ) -> Self {
        let mut state = Self {
            modes,
            levels,
            photon_number,
            terms,
        };
        state.prune();
        state
    }

    fn prune(&mut self) {
        self.terms.retain(|_, a| a.norm() >= PRUNE_EPS);
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn photon_number(&self) -> u32 {
        self.photon_number
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_null(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_null()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&OccupationVector, &Complex64)> {
        self.terms.iter()
    }

    pub fn amplitude(&self, occupation: &OccupationVector) -> Complex64 {
        self.terms
            .get(occupation)
            .copied()
            .unwrap_or_else(|| Complex64::new(0.0, 0.0))
    }

    pub fn norm_sq(&self) -> f64 {
        self.terms.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm_sq();
        if n <= 0.0 {
            return Err(Error::DegenerateState(
                "cannot normalize the null state".into(),
            ));
        }
        Ok(self.scale(Complex64::new(1.0 / n.sqrt(), 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let terms = self.terms.iter().map(|(o, a)| (o.clone(), a * c)).collect();
        Self::from_map_unchecked(self.modes, self.levels, self.photon_number, terms)
    }

    fn check_system(&self, other: &Self) -> Result<()> {
        if self.modes != other.modes || self.levels != other.levels {
            return Err(Error::Dimension(format!(
                "systems differ: ({}, {}) vs ({}, {})",
                self.modes, self.levels, other.modes, other.levels
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_system(other)?;
        if self.photon_number != other.photon_number {
            return Err(Error::Dimension(format!(
                "cannot add states with {} and {} photons",
                self.photon_number, other.photon_number
            )));
        }
        let mut terms = self.terms.clone();
        for (o, a) in &other.terms {
            *terms.entry(o.clone()).or_insert(Complex64::new(0.0, 0.0)) += a;
        }
        Ok(Self::from_map_unchecked(
            self.modes,
            self.levels,
            self.photon_number,
            terms,
        ))
    }

    /// `<self|other>`. States from different photon-number sectors are orthogonal.
    pub fn inner_product(&self, other: &Self) -> Result<Complex64> {
        self.check_system(other)?;
        if self.photon_number != other.photon_number {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let (small, large, flip) = if self.terms.len() <= other.terms.len() {
            (self, other, false)
        } else {
            (other, self, true)
        };
        let mut acc = Complex64::new(0.0, 0.0);
        for (o, a) in &small.terms {
            if let Some(b) = large.terms.get(o) {
                acc += if flip { b.conj() * a } else { a.conj() * b };
            }
        }
        Ok(acc)
    }

    /// Product of two states supported on disjoint spatial modes of the same system.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        self.check_system(other)?;
        let used = |s: &Self| {
            let mut v: Vec<usize> = s.terms.keys().flat_map(|o| o.spatial_modes()).collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        let ours = used(self);
        if let Some(m) = used(other)
            .into_iter()
            .find(|m| ours.binary_search(m).is_ok())
        {
            return Err(Error::ModeCollision(format!(
                "spatial mode {m} is occupied in both factors"
            )));
        }
        let mut terms = BTreeMap::new();
        for (oa, a) in &self.terms {
            for (ob, b) in &other.terms {
                let occ = OccupationVector::from_counts(oa.iter().chain(ob.iter()));
                *terms.entry(occ).or_insert(Complex64::new(0.0, 0.0)) += a * b;
            }
        }
        Ok(Self::from_map_unchecked(
            self.modes,
            self.levels,
            self.photon_number + other.photon_number,
            terms,
        ))
    }
}

impl fmt::Display for FockState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (o, a)) in self.terms.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{:+.6}{:+.6}i |{}>", a.re, a.im, o)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn basis_states() {
        let s = FockState::basis_state(2, 2, OccupationVector::from_triples(&[(0, 0, 1)])).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.photon_number(), 1);
        assert!((s.norm_sq() - 1.0).abs() < 1e-15);

        let vac = FockState::basis_state(2, 2, OccupationVector::vacuum()).unwrap();
        assert_eq!(vac.photon_number(), 0);
        assert_eq!(vac.amplitude(&OccupationVector::vacuum()), c(1.0, 0.0));

        let occ = OccupationVector::from_triples(&[(0, 0, 2), (1, 1, 1)]);
        let s = FockState::basis_state(2, 2, occ.clone()).unwrap();
        assert_eq!(s.photon_number(), 3);
        assert_eq!(s.amplitude(&occ), c(1.0, 0.0));
    }

    #[test]
    fn out_of_range_label() {
        let occ = OccupationVector::from_triples(&[(2, 0, 1)]);
        assert!(matches!(
            FockState::basis_state(2, 2, occ),
            Err(Error::Dimension(_))
        ));
        let occ = OccupationVector::from_triples(&[(0, 2, 1)]);
        assert!(matches!(
            FockState::basis_state(2, 2, occ),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn canonical_order() {
        let a = OccupationVector::from_triples(&[(1, 1, 1), (0, 0, 2), (1, 0, 0)]);
        let b = OccupationVector::from_triples(&[(0, 0, 1), (1, 1, 1), (0, 0, 1)]);
        assert_eq!(a, b);
        assert_eq!(a.total(), 3);
        assert_eq!(a.to_string(), "(0,0):2 (1,1):1");
        let mut c = OccupationVector::vacuum();
        c.add_photon(ModeLabel::new(1, 1));
        c.add_photon(ModeLabel::new(0, 0));
        c.add_photon(ModeLabel::new(0, 0));
        assert_eq!(a, c);
    }

    #[test]
    fn inner_products() {
        let n = OccupationVector::from_triples(&[(0, 0, 1)]);
        let m = OccupationVector::from_triples(&[(1, 0, 1)]);
        let sn = FockState::basis_state(2, 1, n.clone()).unwrap();
        let sm = FockState::basis_state(2, 1, m.clone()).unwrap();
        assert_eq!(sn.inner_product(&sn).unwrap(), c(1.0, 0.0));
        assert_eq!(sn.inner_product(&sm).unwrap(), c(0.0, 0.0));

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = FockState::from_terms(2, 1, 1, [(n, c(h, 0.0)), (m, c(0.0, h))]).unwrap();
        assert!((psi.inner_product(&psi).unwrap() - c(1.0, 0.0)).norm() < 1e-15);

        let vac = FockState::vacuum(2, 1);
        assert_eq!(vac.inner_product(&sn).unwrap(), c(0.0, 0.0));

        let other = FockState::vacuum(3, 1);
        assert!(matches!(
            vac.inner_product(&other),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn linear_algebra() {
        let n = OccupationVector::from_triples(&[(0, 0, 1)]);
        let s = FockState::basis_state(2, 1, n.clone()).unwrap();
        let two = s.scale(c(2.0, 0.0));
        assert_eq!(two.normalize().unwrap(), s);

        let cancelled = s.add(&s.scale(c(-1.0, 0.0))).unwrap();
        assert!(cancelled.is_null());
        assert_eq!(cancelled.photon_number(), 1);
        assert!(matches!(
            cancelled.normalize(),
            Err(Error::DegenerateState(_))
        ));

        let vac = FockState::vacuum(2, 1);
        assert!(matches!(s.add(&vac), Err(Error::Dimension(_))));
    }

    #[test]
    fn tensor_products() {
        let a = FockState::basis_state(2, 2, OccupationVector::from_triples(&[(0, 1, 1)])).unwrap();
        let b = FockState::basis_state(2, 2, OccupationVector::from_triples(&[(1, 0, 1)])).unwrap();
        let ab = a.tensor(&b).unwrap();
        let expected = FockState::basis_state(
            2,
            2,
            OccupationVector::from_triples(&[(0, 1, 1), (1, 0, 1)]),
        )
        .unwrap();
        assert_eq!(ab, expected);
        assert_eq!(ab.photon_number(), 2);
        assert!(matches!(a.tensor(&a), Err(Error::ModeCollision(_))));
    }

    #[test]
    fn from_terms_rejects_wrong_sector() {
        let occ = OccupationVector::from_triples(&[(0, 0, 2)]);
        assert!(FockState::from_terms(1, 1, 1, [(occ, c(1.0, 0.0))]).is_err());
    }

    fn arb_state() -> impl Strategy<Value = FockState> {
        // Two-photon states over three modes and two levels.
        let occ = (0usize..3, 0usize..2, 0usize..3, 0usize..2).prop_map(|(m1, s1, m2, s2)| {
            OccupationVector::from_triples(&[(m1, s1, 1), (m2, s2, 1)])
        });
        prop::collection::vec((occ, -1.0f64..1.0, -1.0f64..1.0), 1..6).prop_map(|terms| {
            FockState::from_terms(
                3,
                2,
                2,
                terms
                    .into_iter()
                    .map(|(o, re, im)| (o, Complex64::new(re, im))),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn inner_product_is_conjugate_symmetric(a in arb_state(), b in arb_state()) {
            let ab = a.inner_product(&b).unwrap();
            let ba = b.inner_product(&a).unwrap();
            prop_assert!((ab - ba.conj()).norm() < 1e-12);
        }

        #[test]
        fn pruning_bounds_lost_mass(a in arb_state(), scale in 1e-13f64..1e-10) {
            let raw: f64 = a.terms().map(|(_, x)| (x * scale).norm_sqr()).sum();
            let pruned = a.scale(Complex64::new(scale, 0.0));
            let dropped = a.len() - pruned.len();
            let bound = dropped as f64 * PRUNE_EPS * PRUNE_EPS;
            prop_assert!((pruned.norm_sq() - raw).abs() <= bound + 1e-300);
        }
    }
}
