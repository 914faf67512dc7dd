//! Least-squares model fitting for degree distributions: single power law
//! vs. continuity-constrained two-regime power law, compared by AIC.
//!
//! Both fits run in log-log space over `(k, p)` points. The two-regime model
//! is `ln p = a - g1 ln k` up to the breakpoint and continues with slope
//! `-g2` past it; the breakpoint is found by exhaustive grid search over the
//! observed abscissas, with the continuity-constrained least-squares solution
//! computed in closed form per candidate.

use serde::Serialize;

use crate::error::{Error, Result};

use super::DegreeDistribution;

/// `(k, p)` pairs prepared for log-log fitting. `k >= 1`, `p > 0`, ascending.
pub type FitPoints = Vec<(f64, f64)>;

/// Unbinned fit points straight from a degree distribution.
pub fn unbinned_points(dist: &DegreeDistribution) -> FitPoints {
    dist.points().iter().map(|&(k, p)| (k as f64, p)).collect()
}

/// Width-normalized logarithmic binning.
///
/// Geometric bins with `bins_per_decade` bins per factor of ten, clipped to
/// the observed degree range; the bin estimate is the total probability mass
/// in the bin divided by the number of integer degrees the bin spans,
/// plotted at the geometric mean of those degrees. This keeps sparse
/// high-degree tails on the true curve instead of flattening them at `1/N`.
pub fn log_binned_points(dist: &DegreeDistribution, bins_per_decade: u32) -> FitPoints {
    let points = dist.points();
    if points.is_empty() {
        return Vec::new();
    }
    let pd = bins_per_decade.max(1) as f64;
    let k_min = points[0].0 as u64;
    let k_max = points[points.len() - 1].0 as u64;
    let b_lo = ((k_min as f64).log10() * pd).floor() as i64;
    let b_hi = ((k_max as f64).log10() * pd).ceil() as i64;

    let mut out = Vec::new();
    let mut cursor = 0usize;
    let mut prev_hi = None::<u64>;
    for b in b_lo..=b_hi {
        let lo_edge = 10f64.powf(b as f64 / pd);
        let hi_edge = 10f64.powf((b + 1) as f64 / pd);
        let mut lo_int = (lo_edge.ceil() as u64).max(k_min);
        let hi_int = (hi_edge.ceil() as u64).min(k_max + 1);
        if let Some(prev) = prev_hi {
            lo_int = lo_int.max(prev);
        }
        if hi_int <= lo_int {
            continue;
        }
        prev_hi = Some(hi_int);
        let width = (hi_int - lo_int) as f64;

        let mut mass = 0.0;
        while cursor < points.len() && (points[cursor].0 as u64) < hi_int {
            if points[cursor].0 as u64 >= lo_int {
                mass += points[cursor].1;
            }
            cursor += 1;
        }
        if mass <= 0.0 {
            continue;
        }
        let log_center = (lo_int..hi_int).map(|k| (k as f64).ln()).sum::<f64>() / width;
        out.push((log_center.exp(), mass / width));
    }
    out
}

/// Single power law `p(k) = C k^-gamma`, fitted by ordinary least squares of
/// `ln p` on `ln k`.
#[derive(Debug, Clone, Serialize)]
pub struct PowerLawFit {
    pub gamma: f64,
    pub log_intercept: f64,
    pub ssr: f64,
    /// `None` when the fit is exact (zero SSR makes AIC undefined).
    pub aic: Option<f64>,
    pub n_points: usize,
}

impl PowerLawFit {
    /// Model prediction for `ln p` at degree `k`.
    pub fn predict_ln(&self, k: f64) -> f64 {
        self.log_intercept - self.gamma * k.ln()
    }

    /// Recompute the SSR of the stored parameters on a point set.
    pub fn ssr_on(&self, points: &[(f64, f64)]) -> f64 {
        points
            .iter()
            .map(|&(k, p)| {
                let r = p.ln() - self.predict_ln(k);
                r * r
            })
            .sum()
    }
}

/// Two-regime power law, continuous at the breakpoint.
#[derive(Debug, Clone, Serialize)]
pub struct TwoRegimeFit {
    pub gamma1: f64,
    pub gamma2: f64,
    pub breakpoint_k: f64,
    pub log_intercept: f64,
    pub ssr: f64,
    pub aic: Option<f64>,
    pub n_points: usize,
}

impl TwoRegimeFit {
    pub fn predict_ln(&self, k: f64) -> f64 {
        let x = k.ln();
        let b = self.breakpoint_k.ln();
        self.log_intercept - self.gamma1 * x.min(b) - self.gamma2 * (x - b).max(0.0)
    }

    pub fn ssr_on(&self, points: &[(f64, f64)]) -> f64 {
        points
            .iter()
            .map(|&(k, p)| {
                let r = p.ln() - self.predict_ln(k);
                r * r
            })
            .sum()
    }
}

/// Akaike information criterion in its Gaussian least-squares form:
/// `n ln(ssr/n) + 2 (num_params + 1)`, the extra parameter counting the
/// noise variance.
pub fn aic(ssr: f64, n: usize, num_params: usize) -> Result<f64> {
    if n <= num_params + 1 {
        return Err(Error::invalid(format!(
            "AIC needs n > num_params + 1 (n = {n}, num_params = {num_params})"
        )));
    }
    if ssr < 0.0 || !ssr.is_finite() {
        return Err(Error::invalid(format!(
            "SSR must be non-negative, got {ssr}"
        )));
    }
    if ssr == 0.0 {
        return Err(Error::DegenerateFit);
    }
    Ok(n as f64 * (ssr / n as f64).ln() + 2.0 * (num_params as f64 + 1.0))
}

fn validate_points(points: &[(f64, f64)], needed: usize) -> Result<()> {
    if points.len() < needed {
        return Err(Error::InsufficientPoints {
            needed,
            got: points.len(),
        });
    }
    for &(k, p) in points {
        if !(k > 0.0 && p > 0.0) {
            return Err(Error::invalid(format!(
                "fit points need k > 0 and p > 0, got ({k}, {p})"
            )));
        }
    }
    Ok(())
}

/// OLS power-law fit on explicit points.
pub fn fit_power_law_points(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    validate_points(points, 3)?;
    let n = points.len();
    let xs: Vec<f64> = points.iter().map(|&(k, _)| k.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, p)| p.ln()).collect();
    let mean_x = xs.iter().sum::<f64>() / n as f64;
    let mean_y = ys.iter().sum::<f64>() / n as f64;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        let dx = xs[i] - mean_x;
        sxx += dx * dx;
        sxy += dx * (ys[i] - mean_y);
    }
    if sxx == 0.0 {
        return Err(Error::invalid(
            "all degrees identical; power-law slope undefined".to_string(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let fit = PowerLawFit {
        gamma: -slope,
        log_intercept: intercept,
        ssr: 0.0,
        aic: None,
        n_points: n,
    };
    let ssr = fit.ssr_on(points);
    Ok(PowerLawFit {
        ssr,
        aic: aic(ssr, n, 2).ok(),
        ..fit
    })
}

/// OLS power-law fit on the unbinned points of a degree distribution.
pub fn fit_power_law(dist: &DegreeDistribution) -> Result<PowerLawFit> {
    fit_power_law_points(&unbinned_points(dist))
}

/// Continuity-constrained two-regime fit on explicit points.
///
/// Needs at least 7 points (3 per regime plus an interior breakpoint). The
/// breakpoint grid is the observed abscissas; SSR ties break toward the
/// smaller breakpoint. The straight line is nested in the model, so the
/// returned SSR never exceeds the single power law's.
pub fn fit_two_regime_points(points: &[(f64, f64)]) -> Result<TwoRegimeFit> {
    validate_points(points, 7)?;
    let n = points.len();
    let xs: Vec<f64> = points.iter().map(|&(k, _)| k.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, p)| p.ln()).collect();

    let mut best: Option<TwoRegimeFit> = None;
    for (idx, &(k_x, _)) in points.iter().enumerate() {
        let left = idx + 1; // points with k <= k_x
        let right = n - left;
        if left < 3 || right < 3 {
            continue;
        }
        let b = k_x.ln();
        // Design: y = beta0 + beta1 * min(x, b) + beta2 * max(x - b, 0).
        let mut ata = [[0.0f64; 3]; 3];
        let mut aty = [0.0f64; 3];
        for i in 0..n {
            let row = [1.0, xs[i].min(b), (xs[i] - b).max(0.0)];
            for r in 0..3 {
                for c in 0..3 {
                    ata[r][c] += row[r] * row[c];
                }
                aty[r] += row[r] * ys[i];
            }
        }
        let Some(beta) = solve3(ata, aty) else {
            continue;
        };
        let mut candidate = TwoRegimeFit {
            gamma1: -beta[1],
            gamma2: -beta[2],
            breakpoint_k: k_x,
            log_intercept: beta[0],
            ssr: 0.0,
            aic: None,
            n_points: n,
        };
        candidate.ssr = candidate.ssr_on(points);
        if best.as_ref().is_none_or(|b| candidate.ssr < b.ssr) {
            best = Some(candidate);
        }
    }

    let mut best = best.ok_or(Error::InsufficientPoints { needed: 7, got: n })?;

    // The straight line is a member of the model family (equal slopes), so
    // never return a worse SSR than the nested single power law.
    let line = fit_power_law_points(points)?;
    if line.ssr < best.ssr {
        best = TwoRegimeFit {
            gamma1: line.gamma,
            gamma2: line.gamma,
            breakpoint_k: best.breakpoint_k,
            log_intercept: line.log_intercept,
            ssr: line.ssr,
            aic: None,
            n_points: n,
        };
    }
    best.aic = aic(best.ssr, n, 4).ok();
    Ok(best)
}

/// Two-regime fit on the unbinned points of a degree distribution.
pub fn fit_two_regime(dist: &DegreeDistribution) -> Result<TwoRegimeFit> {
    fit_two_regime_points(&unbinned_points(dist))
}

/// True when the single power law is the preferred model by AIC (lower is
/// better; an exact fit beats any inexact one; a tie prefers the model with
/// fewer parameters).
pub fn power_law_preferred(power: &PowerLawFit, two: &TwoRegimeFit) -> bool {
    match (power.aic, two.aic) {
        (Some(a), Some(b)) => a < b,
        (None, _) => true,
        (Some(_), None) => false,
    }
}

/// Gaussian elimination with partial pivoting for the 3x3 normal equations.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..3 {
            let f = a[row][col] / a[col][col];
            for c in col..3 {
                a[row][c] -= f * a[col][c];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut acc = b[row];
        for c in (row + 1)..3 {
            acc -= a[row][c] * x[c];
        }
        x[row] = acc / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}
