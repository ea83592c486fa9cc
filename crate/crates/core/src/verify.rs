//! Self-check suites: every scheme against its closed form, the two
//! evolution engines against each other, and the formula-level claims.

use std::fmt;
use std::str::FromStr;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolve::{apply_transfer, prep_success, transition_amplitude};
use crate::fock::{FockState, ModeLabel, OccupationVector};
use crate::formulas::{self, Contour, Panel};
use crate::interferometer::{dft, random_unitary};
use crate::schemes::{simulate, SchemeKind, SchemeSpec, REPORT_TOL};

/// Fidelity tolerance used throughout.
pub const FIDELITY_TOL: f64 = 1e-10;
/// Engine agreement tolerance.
pub const ORACLE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Schemes,
    Oracle,
    Formulas,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(Suite::All),
            "schemes" => Ok(Suite::Schemes),
            "oracle" => Ok(Suite::Oracle),
            "formulas" => Ok(Suite::Formulas),
            _ => Err(Error::Spec(format!("unknown suite '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{mark} [{}] {}: {}", self.suite, self.name, self.detail)
    }
}

fn check(suite: &'static str, name: impl Into<String>, passed: bool, detail: String) -> Check {
    Check {
        suite,
        name: name.into(),
        passed,
        detail,
    }
}

/// All length-`d` vectors of counts `>= min` summing to `n`.
pub fn compositions(n: usize, d: usize, min: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, slots: usize, min: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            if left >= min {
                cur.push(left);
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        for v in min..=left {
            if left - v < min * (slots - 1) {
                break;
            }
            cur.push(v);
            rec(left - v, slots - 1, min, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if d > 0 {
        rec(n, d, min, &mut Vec::new(), &mut out);
    }
    out
}

/// Specs covered by the scheme suite: `N <= max_n`, up to three levels,
/// ancilla transmissivities 0.3, 0.5 and the optimum, every herald mode.
pub fn scheme_grid(max_n: usize) -> Vec<SchemeSpec> {
    let mut specs = Vec::new();
    for n in 1..=max_n {
        for d in 1..=3 {
            for k in compositions(n, d, 0) {
                specs.push(SchemeSpec::new(SchemeKind::OperatorAllOne, k.clone()));
                specs.push(SchemeSpec::new(SchemeKind::FockSingleMode, k.clone()));
                specs.push(SchemeSpec::new(SchemeKind::PrepSingleMultiport, k));
            }
            for k in compositions(n, d, 1) {
                specs.push(SchemeSpec::new(SchemeKind::PrepPerLevel, k.clone()));
                let mut separate = SchemeSpec::new(SchemeKind::PrepPerLevel, k.clone());
                separate.separate_inputs = true;
                specs.push(separate);
                if d >= 2 {
                    let kk = n - k[0];
                    let p_opt = formulas::p_opt(n, kk).expect("valid ancilla count");
                    for p in [0.3, 0.5, p_opt] {
                        for h in 1..=n {
                            specs.push(
                                SchemeSpec::new(SchemeKind::Ancilla, k.clone())
                                    .with_p(p)
                                    .with_herald_mode(h),
                            );
                        }
                    }
                }
            }
        }
    }
    specs.push(SchemeSpec::new(SchemeKind::AppendixD4, vec![2, 2]));
    specs
}

fn describe(spec: &SchemeSpec) -> String {
    let mut s = format!("{} k={:?}", spec.scheme, spec.k);
    if let Some(p) = spec.p {
        s.push_str(&format!(" p={p:.4} herald={}", spec.herald_mode));
    }
    if spec.separate_inputs {
        s.push_str(" separate");
    }
    s
}

fn scheme_checks(max_n: usize) -> Vec<Check> {
    let mut out = Vec::new();
    for spec in scheme_grid(max_n) {
        let name = describe(&spec);
        let c = match simulate(&spec) {
            Ok(r) => {
                let gap = r.formula_gap();
                let fid_ok = r.fidelity.is_some_and(|f| (f - 1.0).abs() <= FIDELITY_TOL);
                check(
                    "schemes",
                    name,
                    gap <= REPORT_TOL && fid_ok,
                    format!(
                        "p={:.12} x{} vs formula {:.12} (gap {gap:.1e}), fidelity {:?}",
                        r.probability, r.parallel_factor, r.formula, r.fidelity
                    ),
                )
            }
            Err(e) => check("schemes", name, false, e.to_string()),
        };
        out.push(c);
    }
    out
}

fn random_occupation(
    rng: &mut StdRng,
    photons: usize,
    modes: usize,
    levels: usize,
) -> OccupationVector {
    OccupationVector::from_counts((0..photons).map(|_| {
        (
            ModeLabel::new(rng.random_range(0..modes), rng.random_range(0..levels)),
            1,
        )
    }))
}

/// Largest deviation between the expansion engine and the permanent formula
/// over `trials` random unitaries (seeded, reproducible).
pub fn oracle_deviation(trials: usize, seed: u64) -> Result<f64> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let modes = rng.random_range(1..=6);
        let levels = rng.random_range(1..=2);
        let photons = rng.random_range(1..=4);
        let t = random_unitary(modes, levels, &mut rng)?;
        let input = random_occupation(&mut rng, photons, modes, levels);
        let out = apply_transfer(&t, &FockState::basis_state(modes, levels, input.clone())?)?;
        for (o, a) in out.terms() {
            worst = worst.max((a - transition_amplitude(&t, &input, o)?).norm());
        }
        // Outputs the expansion pruned or never produced must have zero
        // amplitude in the oracle as well.
        for _ in 0..4 {
            let o = random_occupation(&mut rng, photons, modes, levels);
            worst = worst.max((out.amplitude(&o) - transition_amplitude(&t, &input, &o)?).norm());
        }
    }
    Ok(worst)
}

fn oracle_checks() -> Vec<Check> {
    let mut out = Vec::new();
    match oracle_deviation(200, 7) {
        Ok(dev) => out.push(check(
            "oracle",
            "random unitaries (200 trials, n <= 4, L <= 6)",
            dev <= ORACLE_TOL,
            format!("max deviation {dev:.2e}"),
        )),
        Err(e) => out.push(check("oracle", "random unitaries", false, e.to_string())),
    }

    let hom = (|| -> Result<f64> {
        let input = OccupationVector::from_triples(&[(0, 0, 1), (1, 0, 1)]);
        let s = apply_transfer(&dft(2, 1)?, &FockState::basis_state(2, 1, input)?)?;
        Ok(
            s.amplitude(&OccupationVector::from_triples(&[(0, 0, 1), (1, 0, 1)]))
                .norm_sqr(),
        )
    })();
    out.push(match hom {
        Ok(p) => check(
            "oracle",
            "two-photon coincidence",
            p <= 1e-12,
            format!("{p:.2e}"),
        ),
        Err(e) => check("oracle", "two-photon coincidence", false, e.to_string()),
    });

    for k in 1..=4 {
        let name = format!("bunching k={k}");
        out.push(match prep_success(k) {
            Ok(b) => {
                let expected = formulas::bunching_probability(k);
                check(
                    "oracle",
                    name,
                    (b.probability - expected).abs() <= 1e-12,
                    format!("{:.12} vs {expected:.12}", b.probability),
                )
            }
            Err(e) => check("oracle", name, false, e.to_string()),
        });
    }
    out
}

/// Published slopes of the four contour lines.
pub const REFERENCE_SLOPES: [(Panel, Contour, f64); 4] = [
    (Panel::Qubit, Contour::First, 2.41059),
    (Panel::Qubit, Contour::Second, 6.37539),
    (Panel::Qutrit, Contour::First, 4.8134),
    (Panel::Qutrit, Contour::Second, 12.6813),
];

/// First `N` in `K+3..=30` where `p_op(N) / p_ancilla_final(N)` fails to
/// drop below its value at `N - 1`, for the qubit family with `K` ancillas.
/// `None` means the ratio decreases strictly over `K+2..=30`.
pub fn boost_first_increase(kk: usize) -> Result<Option<usize>> {
    let ratio = |n: usize| -> Result<f64> {
        Ok(formulas::p_op(n)? / formulas::p_ancilla_final(n, &[n - kk, kk])?)
    };
    let mut prev = ratio(kk + 2)?;
    for n in kk + 3..=formulas_cap() {
        let r = ratio(n)?;
        if r >= prev {
            return Ok(Some(n));
        }
        prev = r;
    }
    Ok(None)
}

fn formulas_cap() -> usize {
    crate::schemes::MAX_FORMULA_N
}

fn formula_checks() -> Vec<Check> {
    let mut out = Vec::new();
    let first = formulas::first_integer_crossing(Panel::Qubit, Contour::First, 1, 30);
    out.push(check(
        "formulas",
        "qubit k1=1 ancilla beats per-level first at N=3",
        first == Some(3),
        format!("{first:?}"),
    ));
    let second = formulas::first_integer_crossing(Panel::Qubit, Contour::Second, 1, 30);
    out.push(check(
        "formulas",
        "qubit k1=1 ancilla beats the bound first at N=4",
        second == Some(4),
        format!("{second:?}"),
    ));

    for (panel, contour, reference) in REFERENCE_SLOPES {
        let name = format!("{panel:?} {contour:?} contour slope").to_lowercase();
        out.push(
            match formulas::contour_fit(
                panel,
                contour,
                panel.default_k1_range(),
                Some(formulas::DEFAULT_N_WINDOW),
            ) {
                Ok(fit) => {
                    let rel = (fit.a - reference).abs() / reference;
                    check(
                        "formulas",
                        name,
                        rel <= 0.10,
                        format!(
                            "a={:.6} b={:.6} rms={:.3e} vs {reference} ({:.2}% off)",
                            fit.a,
                            fit.b,
                            fit.rms_residual,
                            100.0 * rel
                        ),
                    )
                }
                Err(e) => check("formulas", name, false, e.to_string()),
            },
        );
    }

    for kk in 1..=3 {
        let name = format!("bound / ancilla ratio decreasing, K={kk}");
        out.push(match boost_first_increase(kk) {
            Ok(None) => check("formulas", name, true, format!("N in {}..=30", kk + 2)),
            Ok(Some(n)) => check(
                "formulas",
                name,
                false,
                format!("ratio rises from N={} to N={n}", n - 1),
            ),
            Err(e) => check("formulas", name, false, e.to_string()),
        });
    }

    let mut worst = f64::NEG_INFINITY;
    for n in 2..=12 {
        for kk in 1..n {
            if let (Ok(opt), Ok(best)) = (
                formulas::p_opt(n, kk),
                formulas::p_ancilla_optical_max(n, kk),
            ) {
                for p in [opt - 0.01, opt + 0.01] {
                    if (0.0..=1.0).contains(&p) {
                        let v = formulas::p_ancilla_optical(n, kk, p).unwrap_or(f64::INFINITY);
                        worst = worst.max(v - best);
                    }
                }
            }
        }
    }
    out.push(check(
        "formulas",
        "optimal transmissivity is a maximum",
        worst < 0.0,
        format!("largest neighbour excess {worst:.3e}"),
    ));
    out
}

/// Run one suite.
pub fn verify(suite: Suite) -> Vec<Check> {
    match suite {
        Suite::Schemes => scheme_checks(5),
        Suite::Oracle => oracle_checks(),
        Suite::Formulas => formula_checks(),
        Suite::All => {
            let mut all = oracle_checks();
            all.extend(formula_checks());
            all.extend(scheme_checks(5));
            all
        }
    }
}
