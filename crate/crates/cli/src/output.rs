use std::fmt::Write as _;

use dicke_core::formulas::{ContourFit, CrossoverRow};
use dicke_core::RunReport;
use serde::Serialize;

/// `%.12g`: twelve significant digits, trailing zeros removed, exponent
/// notation outside `1e-4 <= |x| < 1e12`.
pub fn fmt_g(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt_g(x: Option<f64>) -> String {
    x.map(fmt_g).unwrap_or_default()
}

#[derive(Serialize)]
struct StateTerm {
    occupation: Vec<[usize; 3]>,
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct ReportJson<'a> {
    scheme: &'a str,
    n: usize,
    k: &'a [usize],
    p: Option<f64>,
    probability: f64,
    parallel_factor: f64,
    formula: f64,
    fidelity: Option<f64>,
    state: Vec<StateTerm>,
}

pub fn report_json(r: &RunReport) -> anyhow::Result<String> {
    let state = r
        .state
        .iter()
        .flat_map(|s| s.terms())
        .map(|(occ, amp)| StateTerm {
            occupation: occ
                .iter()
                .map(|(label, n)| [label.spatial, label.internal, n as usize])
                .collect(),
            re: amp.re,
            im: amp.im,
        })
        .collect();
    let body = ReportJson {
        scheme: r.spec.scheme.name(),
        n: r.n(),
        k: &r.spec.k,
        p: r.spec.effective_p()?,
        probability: r.probability,
        parallel_factor: r.parallel_factor,
        formula: r.formula,
        fidelity: r.fidelity,
        state,
    };
    Ok(serde_json::to_string_pretty(&body)? + "\n")
}

fn join_counts(k: &[usize]) -> String {
    k.iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

pub fn report_csv(r: &RunReport) -> anyhow::Result<String> {
    let mut out = String::from("scheme,n,k,p,probability,parallel_factor,formula,fidelity\n");
    writeln!(
        out,
        "{},{},{},{},{},{},{},{}",
        r.spec.scheme,
        r.n(),
        join_counts(&r.spec.k),
        opt_g(r.spec.effective_p()?),
        fmt_g(r.probability),
        fmt_g(r.parallel_factor),
        fmt_g(r.formula),
        opt_g(r.fidelity),
    )?;
    Ok(out)
}

pub fn crossover_csv(rows: &[CrossoverRow], levels: usize) -> String {
    let mut out = String::from("n");
    for s in 0..levels {
        write!(out, ",k{s}").unwrap();
    }
    out.push_str(",p_per_level,p_single_multiport,p_op,p_ancilla,diff_per_level,diff_op\n");
    for r in rows {
        out.push_str(&r.n.to_string());
        for c in &r.k {
            write!(out, ",{c}").unwrap();
        }
        writeln!(
            out,
            ",{},{},{},{},{},{}",
            fmt_g(r.p_per_level),
            fmt_g(r.p_single_multiport),
            fmt_g(r.p_op),
            fmt_g(r.p_ancilla),
            fmt_g(r.diff_per_level),
            fmt_g(r.diff_op)
        )
        .unwrap();
    }
    out
}

/// Long-format grid for contour plotting: one row per `(k1, n)`.
pub fn contour_csv(grid: &[(usize, Vec<CrossoverRow>)]) -> String {
    let mut out = String::from("k1,n,p_per_level,p_op,p_ancilla,diff_per_level,diff_op\n");
    for (k1, rows) in grid {
        for r in rows {
            writeln!(
                out,
                "{k1},{},{},{},{},{},{}",
                r.n,
                fmt_g(r.p_per_level),
                fmt_g(r.p_op),
                fmt_g(r.p_ancilla),
                fmt_g(r.diff_per_level),
                fmt_g(r.diff_op)
            )
            .unwrap();
        }
    }
    out
}

#[derive(Serialize)]
struct FitPoint {
    k1: usize,
    n_star: f64,
    residual: f64,
}

#[derive(Serialize)]
struct FitJson<'a> {
    panel: dicke_core::formulas::Panel,
    contour: dicke_core::formulas::Contour,
    a: f64,
    b: f64,
    a_stderr: f64,
    b_stderr: f64,
    rms_residual: f64,
    n_window: Option<f64>,
    points: Vec<FitPoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference_a: Option<&'a f64>,
}

pub fn fit_json(
    fit: &ContourFit,
    n_window: Option<f64>,
    reference_a: Option<&f64>,
) -> anyhow::Result<String> {
    let body = FitJson {
        panel: fit.panel,
        contour: fit.contour,
        a: fit.a,
        b: fit.b,
        a_stderr: fit.a_stderr,
        b_stderr: fit.b_stderr,
        rms_residual: fit.rms_residual,
        n_window,
        points: fit
            .points
            .iter()
            .zip(&fit.residuals)
            .map(|(&(k1, n_star), &residual)| FitPoint {
                k1,
                n_star,
                residual,
            })
            .collect(),
        reference_a,
    };
    Ok(serde_json::to_string_pretty(&body)? + "\n")
}
