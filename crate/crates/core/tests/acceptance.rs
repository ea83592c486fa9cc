//! One PASS/FAIL line per acceptance criterion.
//!
//! Criterion 9 does not hold for K = 3 (the ratio rises from N = 5 to N = 6)
//! and is reported red. The target exits nonzero only if the set of red
//! criteria differs from that known set.

use std::time::{Duration, Instant};

use dicke_core::evolve::prep_success;
use dicke_core::formulas::{self, Contour, Panel};
use dicke_core::interferometer::dft;
use dicke_core::schemes::simulate;
use dicke_core::verify::{boost_first_increase, compositions, oracle_deviation};
use dicke_core::{apply_transfer, FockState, OccupationVector, SchemeKind, SchemeSpec};

const KNOWN_RED: &[u32] = &[9];

fn fact(n: usize) -> f64 {
    (1..=n).map(|x| x as f64).product()
}

fn oracle_p_op(n: usize) -> f64 {
    fact(n) / (n as f64).powi(n as i32)
}

fn oracle_bunching(k: usize) -> f64 {
    fact(k) / (k as f64).powi(k as i32)
}

fn oracle_ancilla(n: usize, kk: usize, p: f64) -> f64 {
    let nf = n as f64;
    fact(n) * fact(kk) / fact(n - kk) * p.powi((n - kk) as i32) * (1.0 - p).powi(kk as i32)
        / nf.powi(2 * kk as i32)
        * nf
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn criterion(
    id: u32,
    title: &str,
    budget: Option<Duration>,
    body: impl FnOnce() -> Outcome,
) -> bool {
    let start = Instant::now();
    let mut outcome = body();
    let elapsed = start.elapsed();
    if let Some(limit) = budget {
        if elapsed > limit {
            outcome.passed = false;
            outcome
                .detail
                .push_str(&format!(" (over the {limit:?} budget)"));
        }
    }
    println!(
        "criterion {id}: {} {title}: {} [{:.2?}]",
        if outcome.passed { "PASS" } else { "FAIL" },
        outcome.detail,
        elapsed
    );
    outcome.passed
}

fn operator_exactness() -> Outcome {
    let r = simulate(&SchemeSpec::new(SchemeKind::OperatorAllOne, vec![2, 2])).unwrap();
    let fid = r.fidelity.unwrap_or(0.0);
    Outcome {
        passed: (r.probability - 0.09375).abs() <= 1e-12 && (fid - 1.0).abs() <= 1e-10,
        detail: format!("p={:.15} fidelity={fid:.15}", r.probability),
    }
}

fn generic_bound() -> Outcome {
    let mut runs = 0;
    let mut worst_p: f64 = 0.0;
    let mut worst_f: f64 = 0.0;
    for n in 1..=5 {
        for d in 1..=3 {
            for k in compositions(n, d, 0) {
                for scheme in [SchemeKind::OperatorAllOne, SchemeKind::FockSingleMode] {
                    let r = simulate(&SchemeSpec::new(scheme, k.clone())).unwrap();
                    worst_p = worst_p.max((r.probability - oracle_p_op(n)).abs());
                    worst_f = worst_f.max((r.fidelity.unwrap_or(0.0) - 1.0).abs());
                    runs += 1;
                }
            }
        }
    }
    Outcome {
        passed: worst_p <= 1e-10 && worst_f <= 1e-10,
        detail: format!(
            "{runs} runs, max |p - N!/N^N| = {worst_p:.1e}, max |1 - F| = {worst_f:.1e}"
        ),
    }
}

fn appendix() -> Outcome {
    let r = simulate(&SchemeSpec::new(SchemeKind::AppendixD4, vec![2, 2])).unwrap();
    let fid = r.fidelity.unwrap_or(0.0);
    Outcome {
        passed: (r.probability - 0.0234375).abs() <= 1e-12 && (fid - 1.0).abs() <= 1e-10,
        detail: format!("p={:.15} fidelity={fid:.15}", r.probability),
    }
}

fn ancilla() -> Outcome {
    let mut runs = 0;
    let mut worst_p: f64 = 0.0;
    let mut worst_f: f64 = 0.0;
    for (n, kk) in [(3, 1), (4, 1), (3, 2), (4, 2)] {
        for excited in 1..=kk {
            for ks in compositions(kk, excited, 1) {
                let mut k = vec![n - kk];
                k.extend(&ks);
                let p_opt = (n - kk) as f64 / n as f64;
                for p in [0.3, 0.5, p_opt] {
                    for h in 1..=n {
                        for fock_ancilla in [false, true] {
                            let mut spec = SchemeSpec::new(SchemeKind::Ancilla, k.clone())
                                .with_p(p)
                                .with_herald_mode(h);
                            spec.fock_ancilla = fock_ancilla;
                            let r = simulate(&spec).unwrap();
                            let mut expected = oracle_ancilla(n, kk, p);
                            if !fock_ancilla {
                                expected *= ks.iter().map(|&c| oracle_bunching(c)).product::<f64>();
                            }
                            worst_p = worst_p.max((r.probability * n as f64 - expected).abs());
                            worst_f = worst_f.max((r.fidelity.unwrap_or(0.0) - 1.0).abs());
                            runs += 1;
                        }
                    }
                }
            }
        }
    }
    Outcome {
        passed: worst_p <= 1e-10 && worst_f <= 1e-10,
        detail: format!(
            "{runs} runs, max |p*N - formula| = {worst_p:.1e}, max |1 - F| = {worst_f:.1e}"
        ),
    }
}

fn oracle() -> Outcome {
    let dev = oracle_deviation(200, 2025).unwrap();
    Outcome {
        passed: dev <= 1e-9,
        detail: format!("200 random unitaries, max amplitude gap {dev:.1e}"),
    }
}

fn hom_and_bunching() -> Outcome {
    let pair = OccupationVector::from_triples(&[(0, 0, 1), (1, 0, 1)]);
    let out = apply_transfer(
        &dft(2, 1).unwrap(),
        &FockState::basis_state(2, 1, pair.clone()).unwrap(),
    )
    .unwrap();
    let coincidence = out.amplitude(&pair).norm_sqr();
    let mut worst: f64 = 0.0;
    for k in 1..=4 {
        worst = worst.max((prep_success(k).unwrap().probability - oracle_bunching(k)).abs());
    }
    Outcome {
        passed: coincidence <= 1e-12 && worst <= 1e-12,
        detail: format!("coincidence {coincidence:.1e}, max bunching gap {worst:.1e} (k <= 4)"),
    }
}

fn crossover_integers() -> Outcome {
    let anc3 = formulas::p_ancilla_final(3, &[2, 1]).unwrap();
    let per3 = formulas::p_per_level(3, &[2, 1]).unwrap();
    let anc4 = formulas::p_ancilla_final(4, &[3, 1]).unwrap();
    let op4 = formulas::p_op(4).unwrap();
    let values_ok = (anc3 - 4.0 / 27.0).abs() <= 1e-10
        && (per3 - 1.0 / 9.0).abs() <= 1e-10
        && (anc4 - 27.0 / 256.0).abs() <= 1e-10
        && (op4 - 0.09375).abs() <= 1e-10;
    let first = formulas::first_integer_crossing(Panel::Qubit, Contour::First, 1, 30);
    let second = formulas::first_integer_crossing(Panel::Qubit, Contour::Second, 1, 30);

    let sim = |scheme, k: Vec<usize>| {
        let r = simulate(&SchemeSpec::new(scheme, k)).unwrap();
        r.probability * r.parallel_factor
    };
    let s_anc3 = sim(SchemeKind::Ancilla, vec![2, 1]);
    let s_per3 = sim(SchemeKind::PrepPerLevel, vec![2, 1]);
    let s_anc4 = sim(SchemeKind::Ancilla, vec![3, 1]);
    let s_op4 = sim(SchemeKind::OperatorAllOne, vec![3, 1]);
    let s_anc2 = sim(SchemeKind::Ancilla, vec![1, 1]);
    let s_per2 = sim(SchemeKind::PrepPerLevel, vec![1, 1]);
    let s_op3 = sim(SchemeKind::OperatorAllOne, vec![2, 1]);
    let sim_ok = (s_anc3 - anc3).abs() <= 1e-10
        && (s_per3 - per3).abs() <= 1e-10
        && (s_anc4 - anc4).abs() <= 1e-10
        && (s_op4 - op4).abs() <= 1e-10
        && s_anc2 < s_per2
        && s_anc3 > s_per3
        && s_anc3 < s_op3
        && s_anc4 > s_op4;
    Outcome {
        passed: values_ok && sim_ok && first == Some(3) && second == Some(4),
        detail: format!(
            "first N over per-level {first:?} ({s_anc3:.6} vs {s_per3:.6}), first N over bound {second:?} ({s_anc4:.6} vs {s_op4:.6})"
        ),
    }
}

fn fits() -> Outcome {
    let reference = [
        (Panel::Qubit, Contour::First, 2.41),
        (Panel::Qubit, Contour::Second, 6.38),
        (Panel::Qutrit, Contour::First, 4.81),
        (Panel::Qutrit, Contour::Second, 12.68),
    ];
    let mut passed = true;
    let mut parts = Vec::new();
    for (panel, contour, a_ref) in reference {
        let fit = formulas::contour_fit(
            panel,
            contour,
            panel.default_k1_range(),
            Some(formulas::DEFAULT_N_WINDOW),
        )
        .unwrap();
        let rel = (fit.a - a_ref).abs() / a_ref;
        passed &= rel <= 0.10;
        parts.push(format!(
            "{panel:?}/{contour:?} a={:.4} ({:+.2}%) rms={:.3}",
            fit.a,
            100.0 * (fit.a - a_ref) / a_ref,
            fit.rms_residual
        ));
    }
    Outcome {
        passed,
        detail: parts.join("; "),
    }
}

fn asymptotic_boost() -> Outcome {
    let mut passed = true;
    let mut parts = Vec::new();
    for kk in 1..=3 {
        match boost_first_increase(kk).unwrap() {
            None => parts.push(format!("K={kk} decreasing on {}..=30", kk + 2)),
            Some(n) => {
                passed = false;
                let r = |m: usize| {
                    oracle_p_op(m) / formulas::p_ancilla_final(m, &[m - kk, kk]).unwrap()
                };
                parts.push(format!(
                    "K={kk} rises from N={} ({:.4}) to N={n} ({:.4})",
                    n - 1,
                    r(n - 1),
                    r(n)
                ));
            }
        }
    }
    Outcome {
        passed,
        detail: parts.join("; "),
    }
}

fn main() {
    let secs = Duration::from_secs;
    let results = [
        (
            1,
            criterion(
                1,
                "operator scheme exactness",
                Some(secs(1)),
                operator_exactness,
            ),
        ),
        (
            2,
            criterion(2, "generic bound N!/N^N", Some(secs(30)), generic_bound),
        ),
        (3, criterion(3, "appendix circuit", Some(secs(1)), appendix)),
        (4, criterion(4, "ancilla scheme", Some(secs(60)), ancilla)),
        (5, criterion(5, "oracle equivalence", None, oracle)),
        (
            6,
            criterion(
                6,
                "two-photon suppression and bunching",
                None,
                hom_and_bunching,
            ),
        ),
        (
            7,
            criterion(7, "crossover integers", None, crossover_integers),
        ),
        (8, criterion(8, "contour fit slopes", Some(secs(10)), fits)),
        (9, criterion(9, "asymptotic boost", None, asymptotic_boost)),
    ];
    let red: Vec<u32> = results
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(id, _)| *id)
        .collect();
    println!(
        "acceptance: {} of {} criteria pass; red: {red:?} (known red: {KNOWN_RED:?})",
        results.len() - red.len(),
        results.len()
    );
    if red != KNOWN_RED {
        std::process::exit(1);
    }
}
