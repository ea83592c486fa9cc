//! Closed-form success probabilities of the postselection schemes and the
//! comparison between ancilla-free and ancilla-assisted preparation.
//!
//! Everything is evaluated in log space. Factorials of integers up to 20 are
//! exact; larger or non-integer arguments go through `ln Gamma`, which also
//! gives the continuous-`N` extension used for the contour lines.

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// `ln(x!)`, exact for small integers and `ln Gamma(x + 1)` otherwise.
pub fn ln_factorial(x: f64) -> f64 {
    if (0.0..=20.0).contains(&x) && x.fract() == 0.0 {
        let n = x as u64;
        ((1..=n).product::<u64>() as f64).ln()
    } else {
        ln_gamma(x + 1.0)
    }
}

// x ln x with the 0^0 = 1 convention.
fn xlnx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

fn check_counts(n: usize, k: &[usize]) -> Result<()> {
    if n == 0 {
        return Err(Error::Spec("photon number must be at least 1".into()));
    }
    let sum: usize = k.iter().sum();
    if k.is_empty() || sum != n {
        return Err(Error::Spec(format!("level counts {k:?} do not sum to {n}")));
    }
    Ok(())
}

fn check_ancilla(n: usize, kk: usize, p: f64) -> Result<()> {
    if kk < 1 || kk > n {
        return Err(Error::Parameter(format!(
            "ancilla count {kk} outside 1..={n}"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!(
            "transmissivity {p} outside [0, 1]"
        )));
    }
    Ok(())
}

fn to_f64(k: &[usize]) -> Vec<f64> {
    k.iter().map(|&x| x as f64).collect()
}

fn ln_p_op(n: f64) -> f64 {
    ln_factorial(n) - n * n.ln()
}

fn ln_p_single_multiport(n: f64, k: &[f64]) -> f64 {
    ln_factorial(n) + k.iter().map(|&x| ln_factorial(x)).sum::<f64>() - 2.0 * n * n.ln() + n.ln()
}

fn ln_bunching(k: f64) -> f64 {
    ln_factorial(k) - xlnx(k)
}

fn ln_p_per_level(n: f64, k: &[f64]) -> f64 {
    let k_min = k.iter().copied().fold(f64::INFINITY, f64::min);
    ln_p_op(n) + k.iter().map(|&x| ln_bunching(x)).sum::<f64>() + k_min.ln()
}

fn ln_p_ancilla_max(n: f64, kk: f64) -> f64 {
    ln_factorial(n) + ln_factorial(kk) - ln_factorial(n - kk) + xlnx(n - kk) + xlnx(kk)
        - (n + 2.0 * kk) * n.ln()
        + n.ln()
}

fn ln_p_ancilla_final(n: f64, k: &[f64]) -> f64 {
    let kk: f64 = k[1..].iter().sum();
    ln_p_ancilla_max(n, kk) + k[1..].iter().map(|&x| ln_bunching(x)).sum::<f64>()
}

/// Operator-level bound `N! / N^N`, independent of the level counts.
pub fn p_op(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Spec("photon number must be at least 1".into()));
    }
    Ok(ln_p_op(n as f64).exp())
}

/// `k_j! / k_j^{k_j}`: all `k_j` photons of a `k_j`-port multiport leave
/// through one fixed port.
pub fn bunching_probability(k: usize) -> f64 {
    ln_bunching(k as f64).exp()
}

/// Single photons bunched by one `N`-port multiport, including the `xN`
/// parallel factor: `N! prod k_j! / N^{2N} * N`.
pub fn p_single_multiport(n: usize, k: &[usize]) -> Result<f64> {
    check_counts(n, k)?;
    Ok(ln_p_single_multiport(n as f64, &to_f64(k)).exp())
}

/// One `k_j`-port multiport per level, including the `x k_min` parallel
/// factor: `N!/N^N * prod(k_j!/k_j^{k_j}) * k_min`.
pub fn p_per_level(n: usize, k: &[usize]) -> Result<f64> {
    check_counts(n, k)?;
    if k.contains(&0) {
        return Err(Error::Spec(format!(
            "per-level preparation needs every level populated, got {k:?}"
        )));
    }
    Ok(ln_p_per_level(n as f64, &to_f64(k)).exp())
}

/// Operator-level ancilla scheme: `N!K!/(N-K)! p^{N-K} (1-p)^K / N^K`.
pub fn p_ancilla_operator(n: usize, kk: usize, p: f64) -> Result<f64> {
    check_ancilla(n, kk, p)?;
    let (nf, kf) = (n as f64, kk as f64);
    let ln = ln_factorial(nf) + ln_factorial(kf) - ln_factorial(nf - kf) - kf * nf.ln();
    Ok(ln.exp() * p.powi((n - kk) as i32) * (1.0 - p).powi(kk as i32))
}

/// Optical ancilla scheme with a multiport on the heralding modes, including
/// the `xN` parallel factor:
/// `N!K!/(N-K)! p^{N-K} (1-p)^K / N^{2K} * N`.
pub fn p_ancilla_optical(n: usize, kk: usize, p: f64) -> Result<f64> {
    check_ancilla(n, kk, p)?;
    let (nf, kf) = (n as f64, kk as f64);
    let ln =
        ln_factorial(nf) + ln_factorial(kf) - ln_factorial(nf - kf) - 2.0 * kf * nf.ln() + nf.ln();
    Ok(ln.exp() * p.powi((n - kk) as i32) * (1.0 - p).powi(kk as i32))
}

/// Transmissivity maximizing [`p_ancilla_optical`]: `(N - K)/N`.
pub fn p_opt(n: usize, kk: usize) -> Result<f64> {
    check_ancilla(n, kk, 0.0)?;
    Ok((n - kk) as f64 / n as f64)
}

/// [`p_ancilla_optical`] at [`p_opt`].
pub fn p_ancilla_optical_max(n: usize, kk: usize) -> Result<f64> {
    check_ancilla(n, kk, 0.0)?;
    Ok(ln_p_ancilla_max(n as f64, kk as f64).exp())
}

/// [`p_ancilla_optical_max`] with the single-photon bunching factors
/// `k_i!/k_i^{k_i}` of the excited levels.
pub fn p_ancilla_final(n: usize, k: &[usize]) -> Result<f64> {
    check_counts(n, k)?;
    if k.len() < 2 || k.contains(&0) {
        return Err(Error::Spec(format!(
            "ancilla scheme needs k_0 >= 1 and every excited level populated, got {k:?}"
        )));
    }
    Ok(ln_p_ancilla_final(n as f64, &to_f64(k)).exp())
}

/// The level-count families compared in the crossover analysis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Panel {
    /// `k = (N - k1, k1)`.
    Qubit,
    /// `k = (N - 2 k1, k1, k1)`.
    Qutrit,
}

impl Panel {
    fn excited_levels(self) -> usize {
        match self {
            Panel::Qubit => 1,
            Panel::Qutrit => 2,
        }
    }

    /// Integer level counts, or `None` when `k_0` would be below 1.
    pub fn counts(self, n: usize, k1: usize) -> Option<Vec<usize>> {
        let excited = self.excited_levels() * k1;
        if k1 == 0 || n < excited + 1 {
            return None;
        }
        let mut k = vec![n - excited];
        k.extend(std::iter::repeat_n(k1, self.excited_levels()));
        Some(k)
    }

    fn real_counts(self, n: f64, k1: f64) -> Vec<f64> {
        let e = self.excited_levels();
        let mut k = vec![n - e as f64 * k1];
        k.extend(std::iter::repeat_n(k1, e));
        k
    }

    /// Default `k1` grid of the contour fits.
    pub fn default_k1_range(self) -> std::ops::RangeInclusive<usize> {
        match self {
            Panel::Qubit => 1..=20,
            Panel::Qutrit => 1..=10,
        }
    }
}

/// Which ancilla-free probability the ancilla scheme is compared against.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Contour {
    /// Against [`p_per_level`] (single-photon inputs).
    First,
    /// Against the bound [`p_op`].
    Second,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossoverRow {
    pub n: usize,
    pub k: Vec<usize>,
    pub p_per_level: f64,
    pub p_single_multiport: f64,
    pub p_op: f64,
    pub p_ancilla: f64,
    /// `p_ancilla - p_per_level`.
    pub diff_per_level: f64,
    /// `p_ancilla - p_op`.
    pub diff_op: f64,
}

/// All probabilities for `n` in `n_range` along one family; sizes where
/// `k_0 < 1` are skipped.
pub fn crossover_table(
    panel: Panel,
    k1: usize,
    n_range: std::ops::RangeInclusive<usize>,
) -> Result<Vec<CrossoverRow>> {
    let mut rows = Vec::new();
    for n in n_range {
        let Some(k) = panel.counts(n, k1) else {
            continue;
        };
        let p_per_level = p_per_level(n, &k)?;
        let p_ancilla = p_ancilla_final(n, &k)?;
        let p_op = p_op(n)?;
        rows.push(CrossoverRow {
            p_single_multiport: p_single_multiport(n, &k)?,
            diff_per_level: p_ancilla - p_per_level,
            diff_op: p_ancilla - p_op,
            n,
            k,
            p_per_level,
            p_op,
            p_ancilla,
        });
    }
    Ok(rows)
}

/// Smallest integer `N <= n_max` where the ancilla scheme beats the chosen
/// ancilla-free probability.
pub fn first_integer_crossing(
    panel: Panel,
    contour: Contour,
    k1: usize,
    n_max: usize,
) -> Option<usize> {
    let start = panel.excited_levels() * k1 + 1;
    (start..=n_max).find(|&n| {
        let k = panel.counts(n, k1).expect("n above the family minimum");
        let ancilla = p_ancilla_final(n, &k).unwrap_or(0.0);
        let other = match contour {
            Contour::First => p_per_level(n, &k),
            Contour::Second => p_op(n),
        }
        .unwrap_or(1.0);
        ancilla > other
    })
}

/// `ln p_ancilla - ln p_other` along a family at real `n`.
pub fn log_advantage(panel: Panel, contour: Contour, k1: f64, n: f64) -> f64 {
    let k = panel.real_counts(n, k1);
    let ancilla = ln_p_ancilla_final(n, &k);
    let other = match contour {
        Contour::First => ln_p_per_level(n, &k),
        Contour::Second => ln_p_op(n),
    };
    ancilla - other
}

/// Real `N*` above `k_0 = 1` where the ancilla scheme starts to win, to 1e-9.
pub fn contour_root(panel: Panel, contour: Contour, k1: usize) -> Result<f64> {
    let f = |n: f64| log_advantage(panel, contour, k1 as f64, n);
    let lo = (panel.excited_levels() * k1 + 1) as f64;
    if f(lo) >= 0.0 {
        return Err(Error::RootNotFound(format!(
            "ancilla scheme already ahead at N = {lo} for k1 = {k1}"
        )));
    }
    // Walk up until the sign changes, then bisect.
    let step = 0.25;
    let limit = lo + 10_000.0;
    let mut a = lo;
    let mut b = lo + step;
    while f(b) < 0.0 {
        a = b;
        b += step;
        if b > limit {
            return Err(Error::RootNotFound(format!(
                "no sign change below N = {limit} for k1 = {k1}"
            )));
        }
    }
    while b - a > 1e-9 {
        let mid = 0.5 * (a + b);
        if f(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Contour points with `N*` above this are outside the plotted region and
/// left out of the fit by default.
pub const DEFAULT_N_WINDOW: f64 = 64.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContourFit {
    pub panel: Panel,
    pub contour: Contour,
    /// Slope of `N* = a k1 + b`.
    pub a: f64,
    pub b: f64,
    pub a_stderr: f64,
    pub b_stderr: f64,
    pub rms_residual: f64,
    /// `(k1, N*)` pairs used in the fit.
    pub points: Vec<(usize, f64)>,
    pub residuals: Vec<f64>,
}

/// Unweighted least-squares line through the contour roots for every `k1` in
/// the range whose root lies at or below `n_window`.
pub fn contour_fit(
    panel: Panel,
    contour: Contour,
    k1_range: std::ops::RangeInclusive<usize>,
    n_window: Option<f64>,
) -> Result<ContourFit> {
    let mut points = Vec::new();
    for k1 in k1_range {
        let root = contour_root(panel, contour, k1)?;
        if n_window.is_none_or(|w| root <= w) {
            points.push((k1, root));
        }
    }
    if points.len() < 2 {
        return Err(Error::Parameter(format!(
            "a line needs two contour points, found {}",
            points.len()
        )));
    }
    let m = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0 as f64).sum::<f64>() / m;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 as f64 - mean_x).powi(2)).sum();
    let sxy: f64 = points
        .iter()
        .map(|p| (p.0 as f64 - mean_x) * (p.1 - mean_y))
        .sum();
    let a = sxy / sxx;
    let b = mean_y - a * mean_x;
    let residuals: Vec<f64> = points.iter().map(|p| p.1 - (a * p.0 as f64 + b)).collect();
    let sse: f64 = residuals.iter().map(|r| r * r).sum();
    let rms_residual = (sse / m).sqrt();
    let (a_stderr, b_stderr) = if points.len() > 2 {
        let s2 = sse / (m - 2.0);
        let a_se = (s2 / sxx).sqrt();
        let b_se = (s2 * (1.0 / m + mean_x * mean_x / sxx)).sqrt();
        (a_se, b_se)
    } else {
        (0.0, 0.0)
    };
    Ok(ContourFit {
        panel,
        contour,
        a,
        b,
        a_stderr,
        b_stderr,
        rms_residual,
        points,
        residuals,
    })
}
