//! Catalog of postselection circuits and the end-to-end runner.
//!
//! Every scheme is assembled from the elements in [`crate::interferometer`],
//! simulated exactly, projected on its detection pattern and compared with
//! the closed-form probability from [`crate::formulas`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolve::{apply_transfer, apply_transfer_bounded};
use crate::fock::{FockState, OccupationVector};
use crate::formulas;
use crate::interferometer::{
    all_one, beam_splitter, bs_tree, dft, level_multiplexer, parallel, pbs, permutation,
    phase_screen, TransferMatrix,
};
use crate::postselect::{
    correction_screen, dicke, extract_qudits, fidelity, phase_correction, project, DickeSpec,
    PostselectionPattern,
};

/// Largest photon number `N` accepted by the simulator.
pub const MAX_SIM_N: usize = 6;
/// Largest photon number accepted for closed-form tables.
pub const MAX_FORMULA_N: usize = 30;
/// Allowed gap between `probability * parallel_factor` and the formula.
pub const REPORT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    OperatorAllOne,
    FockSingleMode,
    PrepSingleMultiport,
    PrepPerLevel,
    Ancilla,
    AppendixD4,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 6] = [
        SchemeKind::OperatorAllOne,
        SchemeKind::FockSingleMode,
        SchemeKind::PrepSingleMultiport,
        SchemeKind::PrepPerLevel,
        SchemeKind::Ancilla,
        SchemeKind::AppendixD4,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::OperatorAllOne => "operator_all_one",
            SchemeKind::FockSingleMode => "fock_single_mode",
            SchemeKind::PrepSingleMultiport => "prep_single_multiport",
            SchemeKind::PrepPerLevel => "prep_per_level",
            SchemeKind::Ancilla => "ancilla",
            SchemeKind::AppendixD4 => "appendix_d4",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Spec(format!("unknown scheme '{s}'")))
    }
}

/// What to build and run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchemeSpec {
    pub scheme: SchemeKind,
    /// Level counts `k_0, k_1, ...`; `N` is their sum.
    pub k: Vec<usize>,
    /// Beam-splitter transmissivity of the ancilla scheme; `None` picks the
    /// optimum `(N - K)/N`.
    pub p: Option<f64>,
    /// 1-based herald multiport output of the ancilla scheme.
    pub herald_mode: usize,
    /// Ancilla scheme: feed each excited level as a ready-made Fock state
    /// instead of bunching single photons first.
    pub fock_ancilla: bool,
    /// Apply the phase feed-forward (ancilla) or phase screen (separate-input
    /// prep) before comparing with the target.
    pub phase_correction: bool,
    /// Per-level prep: send each level group into its own multiport input
    /// instead of merging them into one mode.
    pub separate_inputs: bool,
}

impl SchemeSpec {
    pub fn new(scheme: SchemeKind, k: Vec<usize>) -> Self {
        Self {
            scheme,
            k,
            p: None,
            herald_mode: 1,
            fock_ancilla: false,
            phase_correction: true,
            separate_inputs: false,
        }
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = Some(p);
        self
    }

    pub fn with_herald_mode(mut self, mode: usize) -> Self {
        self.herald_mode = mode;
        self
    }

    pub fn n(&self) -> usize {
        self.k.iter().sum()
    }

    /// Number of ancilla photons, `N - k_0`.
    pub fn ancilla_count(&self) -> usize {
        self.n() - self.k.first().copied().unwrap_or(0)
    }

    /// Transmissivity actually used by the ancilla scheme.
    pub fn effective_p(&self) -> Result<Option<f64>> {
        if self.scheme != SchemeKind::Ancilla {
            return Ok(None);
        }
        match self.p {
            Some(p) => Ok(Some(p)),
            None => formulas::p_opt(self.n(), self.ancilla_count()).map(Some),
        }
    }
}

/// Closed-form probability of a scheme and the parallelization factor it
/// includes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SchemeProbability {
    pub scheme: SchemeKind,
    pub n: usize,
    pub k: Vec<usize>,
    pub ancilla: Option<usize>,
    pub p: Option<f64>,
    pub value: f64,
    pub parallel_factor: f64,
}

fn check_spec(spec: &SchemeSpec) -> Result<()> {
    let n = spec.n();
    if spec.k.is_empty() || n == 0 {
        return Err(Error::Spec("need at least one photon and one level".into()));
    }
    let require_populated = |what: &str| -> Result<()> {
        if spec.k.contains(&0) {
            Err(Error::Spec(format!(
                "{what} needs every level populated, got k = {:?}",
                spec.k
            )))
        } else {
            Ok(())
        }
    };
    match spec.scheme {
        SchemeKind::PrepPerLevel => require_populated("prep_per_level")?,
        SchemeKind::Ancilla => {
            require_populated("ancilla")?;
            if spec.k.len() < 2 {
                return Err(Error::Spec(
                    "ancilla needs at least one excited level".into(),
                ));
            }
            if spec.herald_mode < 1 || spec.herald_mode > n {
                return Err(Error::Spec(format!(
                    "herald mode {} outside 1..={n}",
                    spec.herald_mode
                )));
            }
            if let Some(p) = spec.p {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::Spec(format!("transmissivity {p} outside [0, 1]")));
                }
            }
        }
        SchemeKind::AppendixD4 if spec.k != [2, 2] => {
            return Err(Error::Spec(format!(
                "appendix_d4 is fixed to N = 4, k = (2, 2), got k = {:?}",
                spec.k
            )));
        }
        _ => {}
    }
    if spec.scheme != SchemeKind::Ancilla && spec.p.is_some() {
        return Err(Error::Spec(format!(
            "--p only applies to the ancilla scheme, not {}",
            spec.scheme
        )));
    }
    Ok(())
}

/// Formula value and parallel factor for a spec.
pub fn scheme_probability(spec: &SchemeSpec) -> Result<SchemeProbability> {
    check_spec(spec)?;
    let n = spec.n();
    let k = &spec.k;
    let (value, parallel_factor) = match spec.scheme {
        SchemeKind::OperatorAllOne | SchemeKind::FockSingleMode => (formulas::p_op(n)?, 1.0),
        SchemeKind::PrepSingleMultiport => (formulas::p_single_multiport(n, k)?, n as f64),
        SchemeKind::PrepPerLevel => {
            let k_min = *k.iter().min().expect("non-empty");
            (formulas::p_per_level(n, k)?, k_min as f64)
        }
        SchemeKind::Ancilla => {
            let p = spec.effective_p()?.expect("ancilla has p");
            let mut v = formulas::p_ancilla_optical(n, spec.ancilla_count(), p)?;
            if !spec.fock_ancilla {
                v *= k[1..]
                    .iter()
                    .map(|&ki| formulas::bunching_probability(ki))
                    .product::<f64>();
            }
            (v, n as f64)
        }
        SchemeKind::AppendixD4 => {
            // One fixed merge window of the per-level scheme.
            let k_min = *k.iter().min().expect("non-empty");
            (formulas::p_per_level(n, k)? / k_min as f64, 1.0)
        }
    };
    Ok(SchemeProbability {
        scheme: spec.scheme,
        n,
        k: k.clone(),
        ancilla: (spec.scheme == SchemeKind::Ancilla).then(|| spec.ancilla_count()),
        p: spec.effective_p()?,
        value,
        parallel_factor,
    })
}

/// A fully assembled experiment.
#[derive(Clone, Debug)]
pub struct Scheme {
    pub circuit: TransferMatrix,
    pub input: FockState,
    pub pattern: PostselectionPattern,
    /// Output modes holding the qudits, in qudit order.
    pub register: Vec<usize>,
    pub target: DickeSpec,
    /// Applied to the conditioned state before extraction.
    pub correction: Option<TransferMatrix>,
    /// Divide the projected weight by the norm of the full output; set for
    /// the row-normalized all-one operator.
    pub renormalize: bool,
    pub parallel_factor: f64,
    pub formula: f64,
}

fn level_sequence(k: &[usize]) -> Vec<usize> {
    k.iter()
        .enumerate()
        .flat_map(|(s, &c)| std::iter::repeat_n(s, c))
        .collect()
}

fn single_photons(modes: usize, levels: usize, placement: &[(usize, usize)]) -> Result<FockState> {
    let triples: Vec<_> = placement.iter().map(|&(m, s)| (m, s, 1)).collect();
    FockState::basis_state(modes, levels, OccupationVector::from_triples(&triples))
}

fn chain(stages: &[TransferMatrix], modes: usize, levels: usize) -> Result<TransferMatrix> {
    stages
        .iter()
        .try_fold(TransferMatrix::identity(modes, levels)?, |acc, s| {
            acc.then(s)
        })
}

fn swaps(pairs: &[(usize, usize)], modes: usize, levels: usize) -> Result<TransferMatrix> {
    let mut perm: Vec<usize> = (0..modes).collect();
    for &(a, b) in pairs {
        perm.swap(a, b);
    }
    permutation(&perm, levels)
}

/// Assemble the circuit, input, detection pattern and target of a spec.
pub fn build_scheme(spec: &SchemeSpec) -> Result<Scheme> {
    let formula = scheme_probability(spec)?;
    let n = spec.n();
    if n > MAX_SIM_N {
        return Err(Error::Capacity(format!(
            "simulation is limited to N <= {MAX_SIM_N}, got N = {n}"
        )));
    }
    let d = spec.k.len();
    let k = &spec.k;
    let seq = level_sequence(k);
    let target = DickeSpec::new(n, k.clone())?;
    let mut correction = None;
    let mut renormalize = false;

    let (circuit, input, pattern, register) = match spec.scheme {
        SchemeKind::OperatorAllOne => {
            let placement: Vec<_> = seq.iter().copied().enumerate().collect();
            renormalize = true;
            let register: Vec<usize> = (0..n).collect();
            (
                all_one(n, d)?,
                single_photons(n, d, &placement)?,
                PostselectionPattern::one_per_mode(&register)?,
                register,
            )
        }
        SchemeKind::FockSingleMode => {
            let triples: Vec<_> = k
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(s, &c)| (0, s, c as u32))
                .collect();
            let register: Vec<usize> = (0..n).collect();
            (
                dft(n, d)?,
                FockState::basis_state(n, d, OccupationVector::from_triples(&triples))?,
                PostselectionPattern::one_per_mode(&register)?,
                register,
            )
        }
        SchemeKind::PrepSingleMultiport => {
            let modes = 2 * n;
            let first: Vec<usize> = (0..n).collect();
            let main: Vec<usize> = (n..modes).collect();
            let circuit = chain(
                &[
                    dft(n, d)?.embed(&first, modes)?,
                    swaps(&[(0, n)], modes, d)?,
                    dft(n, d)?.embed(&main, modes)?,
                ],
                modes,
                d,
            )?;
            let placement: Vec<_> = seq.iter().copied().enumerate().collect();
            (
                circuit,
                single_photons(modes, d, &placement)?,
                PostselectionPattern::one_per_mode(&main)?,
                main,
            )
        }
        SchemeKind::PrepPerLevel => {
            let modes = 2 * n;
            let main: Vec<usize> = (n..modes).collect();
            let offsets: Vec<usize> = k
                .iter()
                .scan(0, |acc, &c| {
                    let o = *acc;
                    *acc += c;
                    Some(o)
                })
                .collect();
            let mut groups: Vec<TransferMatrix> =
                k.iter().map(|&c| dft(c, d)).collect::<Result<_>>()?;
            groups.push(TransferMatrix::identity(n, d)?);
            let mut stages = vec![parallel(&groups)?];
            if spec.separate_inputs {
                let pairs: Vec<_> = offsets
                    .iter()
                    .enumerate()
                    .map(|(j, &o)| (o, n + j))
                    .collect();
                stages.push(swaps(&pairs, modes, d)?);
                stages.push(dft(n, d)?.embed(&main, modes)?);
                if spec.phase_correction {
                    let table: Vec<Vec<Complex64>> = (0..modes)
                        .map(|m| {
                            (0..d)
                                .map(|s| {
                                    if m < n {
                                        return Complex64::new(1.0, 0.0);
                                    }
                                    let l = m - n;
                                    let e = (s * l) % n;
                                    Complex64::from_polar(1.0, -2.0 * PI * e as f64 / n as f64)
                                })
                                .collect()
                        })
                        .collect();
                    stages.push(phase_screen(&table)?);
                }
            } else {
                stages.push(level_multiplexer(d)?.embed(&offsets, modes)?);
                stages.push(swaps(&[(0, n)], modes, d)?);
                stages.push(dft(n, d)?.embed(&main, modes)?);
            }
            let placement: Vec<_> = seq.iter().copied().enumerate().collect();
            (
                chain(&stages, modes, d)?,
                single_photons(modes, d, &placement)?,
                PostselectionPattern::one_per_mode(&main)?,
                main,
            )
        }
        SchemeKind::Ancilla => {
            let kk = spec.ancilla_count();
            let p = spec.effective_p()?.expect("ancilla has p");
            let modes = 2 * n + kk;
            // Excited level j occupies modes group[j-1] .. group[j-1] + k_j.
            let mut group = Vec::with_capacity(d - 1);
            let mut next = 2 * n;
            for &c in &k[1..] {
                group.push(next);
                next += c;
            }

            let mut first = Vec::new();
            let bs = beam_splitter(p, d)?;
            for i in 0..n {
                first.push(bs.embed(&[i, n + i], modes)?);
            }
            if !spec.fock_ancilla {
                for (j, &g) in group.iter().enumerate() {
                    let c = k[j + 1];
                    let ports: Vec<usize> = (g..g + c).collect();
                    first.push(dft(c, d)?.embed(&ports, modes)?);
                }
            }

            // Each bunched level leaves its group port 0 and is spread
            // evenly over the qudit modes.
            let fan = Complex64::new(1.0 / (n as f64).sqrt(), 0.0);
            let mut block = nalgebra::DMatrix::<Complex64>::identity(modes, modes);
            for &g in &group {
                block[(g, g)] = Complex64::new(0.0, 0.0);
                for l in 0..n {
                    block[(g, l)] = fan;
                }
            }
            let fan_out = TransferMatrix::level_independent(block, d)?;
            let herald: Vec<usize> = (n..2 * n).collect();
            let mut stages = first;
            stages.push(fan_out);
            stages.push(dft(n, d)?.embed(&herald, modes)?);

            let input = if spec.fock_ancilla {
                let mut triples: Vec<_> = (0..n).map(|i| (i, 0, 1)).collect();
                for (j, &g) in group.iter().enumerate() {
                    triples.push((g, j + 1, k[j + 1] as u32));
                }
                FockState::basis_state(modes, d, OccupationVector::from_triples(&triples))?
            } else {
                let mut placement: Vec<_> = (0..n).map(|i| (i, 0)).collect();
                for (j, &g) in group.iter().enumerate() {
                    placement.extend((g..g + k[j + 1]).map(|m| (m, j + 1)));
                }
                single_photons(modes, d, &placement)?
            };

            let register: Vec<usize> = (0..n).collect();
            let pattern = PostselectionPattern::one_per_mode(&register)?.with(
                vec![n + spec.herald_mode - 1],
                Some(0),
                kk as u32,
            )?;
            if spec.phase_correction {
                correction = Some(correction_screen(
                    &phase_correction(n, spec.herald_mode)?,
                    &register,
                    modes,
                    d,
                )?);
            }
            (chain(&stages, modes, d)?, input, pattern, register)
        }
        SchemeKind::AppendixD4 => {
            let modes = 16;
            let mut stages = vec![parallel(&vec![bs_tree(4, 2)?; 4])?];
            for j in 0..4 {
                stages.push(pbs().embed(&[j, 8 + j], modes)?);
                stages.push(pbs().embed(&[4 + j, 12 + j], modes)?);
            }
            let bs = beam_splitter(0.5, 2)?;
            for j in 0..4 {
                stages.push(bs.embed(&[j, 4 + j], modes)?);
            }
            let register: Vec<usize> = (0..4).collect();
            (
                chain(&stages, modes, d)?,
                single_photons(modes, d, &[(0, 0), (4, 0), (8, 1), (12, 1)])?,
                PostselectionPattern::one_per_mode(&register)?,
                register,
            )
        }
    };

    Ok(Scheme {
        circuit,
        input,
        pattern,
        register,
        target,
        correction,
        renormalize,
        parallel_factor: formula.parallel_factor,
        formula: formula.value,
    })
}

/// Outcome of one simulated experiment.
#[derive(Clone, Debug)]
pub struct RunReport {
    pub spec: SchemeSpec,
    /// Fixed-port, single-window postselection probability.
    pub probability: f64,
    pub parallel_factor: f64,
    pub formula: f64,
    /// Fidelity of the register with the Dicke target; `None` when the
    /// pattern is never observed.
    pub fidelity: Option<f64>,
    /// Normalized conditioned state after any correction.
    pub state: Option<FockState>,
    pub wall_time: Duration,
}

impl RunReport {
    pub fn n(&self) -> usize {
        self.spec.n()
    }

    /// `|probability * parallel_factor - formula|`.
    pub fn formula_gap(&self) -> f64 {
        (self.probability * self.parallel_factor - self.formula).abs()
    }
}

/// Build, evolve, postselect, correct and compare, without judging the
/// result.
pub fn simulate(spec: &SchemeSpec) -> Result<RunReport> {
    let start = Instant::now();
    let scheme = build_scheme(spec)?;
    let out = if scheme.renormalize {
        apply_transfer(&scheme.circuit, &scheme.input)?.normalize()?
    } else {
        let capacity = scheme.pattern.mode_capacity(scheme.circuit.l_out());
        apply_transfer_bounded(&scheme.circuit, &scheme.input, &capacity)?
    };
    let projection = project(&out, &scheme.pattern)?;
    let mut state = projection.conditioned();
    if let (Some(s), Some(c)) = (&state, &scheme.correction) {
        state = Some(apply_transfer(c, s)?);
    }
    let fidelity = match &state {
        Some(s) => {
            let register = extract_qudits(s, &scheme.register)?;
            Some(fidelity(&register, &dicke(&scheme.target)?)?)
        }
        None => None,
    };
    Ok(RunReport {
        spec: spec.clone(),
        probability: projection.probability,
        parallel_factor: scheme.parallel_factor,
        formula: scheme.formula,
        fidelity,
        state,
        wall_time: start.elapsed(),
    })
}

/// [`simulate`] and insist that the simulated probability reproduces the
/// closed form.
pub fn run(spec: &SchemeSpec) -> Result<RunReport> {
    let report = simulate(spec)?;
    if report.formula_gap() > REPORT_TOL {
        return Err(Error::Verification(format!(
            "{}: simulated {:.15} x {} = {:.15}, formula {:.15}",
            spec.scheme,
            report.probability,
            report.parallel_factor,
            report.probability * report.parallel_factor,
            report.formula
        )));
    }
    Ok(report)
}
