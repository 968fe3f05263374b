//! Lq partition sums over the β-adic partition, the scaling exponent τ(q),
//! and its Legendre conjugate f(α).
//!
//! `S_n(q) = Σ μ(I_w)^q` over admissible words of length n; τ(q) is the
//! least-squares slope of `ln S_n(q)` against `−n ln β`, so τ(1) = 0 and
//! τ(0) is minus the box dimension of the support.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::measure;
use crate::numberfield::{ln_rational, FieldElement};
use crate::par::Exec;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectrumError {
    #[error("empty q-grid")]
    EmptyGrid,
    #[error("bad q-grid: {0}")]
    BadGrid(String),
    #[error("regression window [{lo}, {hi}] needs 1 ≤ lo < hi ≤ {max}")]
    Window { lo: usize, hi: usize, max: usize },
}

/// Deepest partition level the engine will enumerate.
pub const MAX_LEVEL: usize = 16;

pub fn ln_beta() -> f64 {
    FieldElement::beta().to_f64().ln()
}

/// Exact masses of the order-n partition with their logarithms.
#[derive(Clone, Debug)]
pub struct Level {
    pub n: usize,
    pub masses: Vec<BigRational>,
    pub logs: Vec<f64>,
}

impl Level {
    pub fn new(n: usize, exec: Exec) -> Self {
        let masses: Vec<BigRational> = measure::level_masses(n, exec).into_iter().map(|(_, m)| m).collect();
        let logs = exec.map(&masses, ln_rational);
        Level { n, masses, logs }
    }

    /// `ln S_n(q)`, exact for nonnegative integer q.
    pub fn ln_sum(&self, q: f64) -> f64 {
        match self.exact_sum(q) {
            Some(s) => ln_rational(&s),
            None => log_sum_exp(self.logs.iter().map(|&l| q * l)),
        }
    }

    pub fn exact_sum(&self, q: f64) -> Option<BigRational> {
        if q < 0.0 || q.fract() != 0.0 || q > 64.0 {
            return None;
        }
        let k = q as u32;
        Some(self.masses.iter().map(|m| Pow::pow(m, k)).sum())
    }
}

/// Deterministic sequential log-sum-exp.
fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let top = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if !top.is_finite() {
        return top;
    }
    top + terms.map(|t| (t - top).exp()).sum::<f64>().ln()
}

/// Levels 1..=n_max, built once and reused across q.
#[derive(Clone, Debug)]
pub struct MassTable {
    levels: Vec<Level>,
}

impl MassTable {
    pub fn build(n_max: usize, exec: Exec) -> Result<Self, SpectrumError> {
        if n_max == 0 || n_max > MAX_LEVEL {
            return Err(SpectrumError::Window { lo: 1, hi: n_max, max: MAX_LEVEL });
        }
        Ok(MassTable {
            levels: (1..=n_max).map(|n| Level::new(n, exec)).collect(),
        })
    }

    pub fn n_max(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, n: usize) -> &Level {
        &self.levels[n - 1]
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PartitionSum {
    pub q: f64,
    pub n: usize,
    #[serde(serialize_with = "crate::serial::opt_rational")]
    pub exact: Option<BigRational>,
    #[serde(serialize_with = "crate::serial::float")]
    pub ln: f64,
}

pub fn partition_sum(q: f64, n: usize, exec: Exec) -> Result<PartitionSum, SpectrumError> {
    if n == 0 || n > MAX_LEVEL {
        return Err(SpectrumError::Window { lo: n, hi: n, max: MAX_LEVEL });
    }
    let level = Level::new(n, exec);
    Ok(PartitionSum {
        q,
        n,
        exact: level.exact_sum(q),
        ln: level.ln_sum(q),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumSample {
    #[serde(serialize_with = "crate::serial::float")]
    pub q: f64,
    #[serde(serialize_with = "crate::serial::float")]
    pub tau: f64,
    pub n_lo: usize,
    pub n_hi: usize,
    /// Root-mean-square residual of the fit.
    #[serde(serialize_with = "crate::serial::float")]
    pub residual: f64,
}

/// Least-squares slope and RMS residual of `ys` against `xs`.
fn fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - my - slope * (x - mx);
            e * e
        })
        .sum();
    (slope, (sse / n).sqrt())
}

pub fn check_window(table: &MassTable, n_lo: usize, n_hi: usize) -> Result<(), SpectrumError> {
    if n_lo == 0 || n_lo >= n_hi || n_hi > table.n_max() {
        return Err(SpectrumError::Window { lo: n_lo, hi: n_hi, max: table.n_max() });
    }
    Ok(())
}

pub fn tau_scale(table: &MassTable, q: f64, n_lo: usize, n_hi: usize) -> Result<SpectrumSample, SpectrumError> {
    check_window(table, n_lo, n_hi)?;
    let lb = ln_beta();
    let xs: Vec<f64> = (n_lo..=n_hi).map(|n| -(n as f64) * lb).collect();
    let ys: Vec<f64> = (n_lo..=n_hi).map(|n| table.level(n).ln_sum(q)).collect();
    // S_n(1) = 1 exactly, so the slope is exactly zero.
    let (tau, residual) = if ys.iter().all(|&y| y == 0.0) { (0.0, 0.0) } else { fit(&xs, &ys) };
    Ok(SpectrumSample { q, tau, n_lo, n_hi, residual })
}

/// Default regression window: the last seven levels.
pub fn default_window(n_hi: usize) -> (usize, usize) {
    (n_hi.saturating_sub(6).max(1), n_hi)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QGrid {
    values: Vec<f64>,
}

impl QGrid {
    pub fn range(qmin: f64, qmax: f64, qstep: f64) -> Result<Self, SpectrumError> {
        if !(qmin.is_finite() && qmax.is_finite() && qstep.is_finite()) {
            return Err(SpectrumError::BadGrid("non-finite bound".into()));
        }
        if qstep <= 0.0 {
            return Err(SpectrumError::BadGrid(format!("step {qstep} must be positive")));
        }
        if qmin > qmax {
            return Err(SpectrumError::EmptyGrid);
        }
        let steps = ((qmax - qmin) / qstep + 1e-9).floor() as usize;
        Ok(QGrid {
            values: (0..=steps).map(|k| qmin + k as f64 * qstep).collect(),
        })
    }

    pub fn from_values(mut values: Vec<f64>) -> Result<Self, SpectrumError> {
        if values.is_empty() {
            return Err(SpectrumError::EmptyGrid);
        }
        if values.iter().any(|q| !q.is_finite()) {
            return Err(SpectrumError::BadGrid("non-finite q".into()));
        }
        values.sort_by(f64::total_cmp);
        values.dedup();
        Ok(QGrid { values })
    }

    /// −10 to 10 in steps of 1/4.
    pub fn standard() -> Self {
        QGrid::range(-10.0, 10.0, 0.25).expect("valid default grid")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LegendrePoint {
    #[serde(serialize_with = "crate::serial::float")]
    pub q: f64,
    #[serde(serialize_with = "crate::serial::float")]
    pub alpha: f64,
    #[serde(serialize_with = "crate::serial::float")]
    pub f: f64,
}

/// `min_q (αq − τ(q))` over the sampled grid.
pub fn legendre_at(samples: &[SpectrumSample], alpha: f64) -> f64 {
    samples.iter().map(|s| alpha * s.q - s.tau).fold(f64::INFINITY, f64::min)
}

/// Conjugate evaluated at the slopes α(q) = τ′(q), estimated by central
/// differences (one-sided at the grid edges).
pub fn legendre(samples: &[SpectrumSample]) -> Vec<LegendrePoint> {
    let slopes = derivative(samples);
    samples
        .iter()
        .zip(slopes)
        .map(|(s, alpha)| LegendrePoint {
            q: s.q,
            alpha,
            f: legendre_at(samples, alpha),
        })
        .collect()
}

fn derivative(samples: &[SpectrumSample]) -> Vec<f64> {
    let k = samples.len();
    if k < 2 {
        return vec![f64::NAN; k];
    }
    (0..k)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(k - 1));
            (samples[b].tau - samples[a].tau) / (samples[b].q - samples[a].q)
        })
        .collect()
}

/// Second differences of `(x, y)` are ≥ `−tol` (sorted by x, duplicates skipped).
pub fn is_convex(points: &[(f64, f64)], tol: f64) -> bool {
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12);
    pts.windows(3).all(|w| {
        let s1 = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
        let s2 = (w[2].1 - w[1].1) / (w[2].0 - w[1].0);
        s2 - s1 >= -tol
    })
}

pub fn is_concave(points: &[(f64, f64)], tol: f64) -> bool {
    let neg: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x, -y)).collect();
    is_convex(&neg, tol)
}

#[derive(Clone, Debug, Serialize)]
pub struct Tangency {
    #[serde(serialize_with = "crate::serial::float")]
    pub alpha: f64,
    #[serde(serialize_with = "crate::serial::float")]
    pub f: f64,
    #[serde(serialize_with = "crate::serial::float")]
    pub gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumReport {
    pub n_lo: usize,
    pub n_hi: usize,
    pub samples: Vec<SpectrumSample>,
    pub legendre: Vec<LegendrePoint>,
    /// `q ↦ ln S_n(q)` convex on the grid for every n in the window.
    pub ln_sum_convex: bool,
    pub tau_concave: bool,
    pub legendre_concave: bool,
    #[serde(serialize_with = "crate::serial::float")]
    pub max_f: f64,
    #[serde(serialize_with = "crate::serial::float")]
    pub alpha_min: f64,
    #[serde(serialize_with = "crate::serial::float")]
    pub alpha_max: f64,
    /// τ(q)/q at the largest grid point.
    #[serde(serialize_with = "crate::serial::float")]
    pub edge_slope: f64,
    pub tangency: Option<Tangency>,
    /// max |τ(q; 4..10) − τ(q; 8..14)| over grid points with |q| ≤ 4.
    pub drift: Option<f64>,
    pub drift_flag: bool,
}

pub const DRIFT_LIMIT: f64 = 0.02;

pub fn spectrum_report(table: &MassTable, grid: &QGrid, n_lo: usize, n_hi: usize, exec: Exec) -> Result<SpectrumReport, SpectrumError> {
    check_window(table, n_lo, n_hi)?;
    let qs = grid.values();
    let samples: Vec<SpectrumSample> = exec
        .map(qs, |&q| tau_scale(table, q, n_lo, n_hi))
        .into_iter()
        .collect::<Result<_, _>>()?;
    let legendre = legendre(&samples);

    let ln_sum_convex = (n_lo..=n_hi).all(|n| {
        let level = table.level(n);
        let pts: Vec<(f64, f64)> = qs.iter().map(|&q| (q, level.ln_sum(q))).collect();
        let scale = pts.iter().map(|p| p.1.abs()).fold(1.0, f64::max);
        is_convex(&pts, 1e-9 * scale)
    });
    let tau_pts: Vec<(f64, f64)> = samples.iter().map(|s| (s.q, s.tau)).collect();
    let tau_concave = is_concave(&tau_pts, 1e-6);
    let leg_pts: Vec<(f64, f64)> = legendre.iter().filter(|p| p.alpha.is_finite()).map(|p| (p.alpha, p.f)).collect();
    let legendre_concave = is_concave(&leg_pts, 1e-6);
    let max_f = legendre.iter().map(|p| p.f).fold(f64::NEG_INFINITY, f64::max);
    let alpha_min = legendre.iter().map(|p| p.alpha).fold(f64::INFINITY, f64::min);
    let alpha_max = legendre.iter().map(|p| p.alpha).fold(f64::NEG_INFINITY, f64::max);
    let last = samples.last().expect("grid is nonempty");
    let edge_slope = last.tau / last.q;

    let tangency = qs.iter().position(|&q| q == 1.0).map(|i| {
        let alpha = legendre[i].alpha;
        let f = legendre_at(&samples, alpha);
        Tangency { alpha, f, gap: (f - alpha).abs() }
    });

    let drift = if table.n_max() >= 14 {
        let mut worst: f64 = 0.0;
        for &q in qs.iter().filter(|q| q.abs() <= 4.0) {
            let a = tau_scale(table, q, 4, 10)?.tau;
            let b = tau_scale(table, q, 8, 14)?.tau;
            worst = worst.max((a - b).abs());
        }
        Some(worst)
    } else {
        None
    };
    Ok(SpectrumReport {
        n_lo,
        n_hi,
        samples,
        legendre,
        ln_sum_convex,
        tau_concave,
        legendre_concave,
        max_f,
        alpha_min,
        alpha_max,
        edge_slope,
        tangency,
        drift_flag: drift.is_some_and(|d| d >= DRIFT_LIMIT),
        drift,
    })
}

/// Exact `S_n(q)` for a nonnegative integer q, as a convenience for callers
/// without a table.
pub fn exact_partition_sum(q: u32, n: usize, exec: Exec) -> BigRational {
    measure::level_masses(n, exec)
        .into_iter()
        .map(|(_, m)| Pow::pow(&m, q))
        .fold(BigRational::zero(), |acc, x| acc + x)
}

/// Admissible word count as a rational, for `q = 0` cross-checks.
pub fn word_count(n: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(crate::parry::admissible_count(n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use std::sync::OnceLock;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn table() -> &'static MassTable {
        static T: OnceLock<MassTable> = OnceLock::new();
        T.get_or_init(|| MassTable::build(10, Exec::default()).unwrap())
    }

    fn linear_samples() -> Vec<SpectrumSample> {
        QGrid::standard()
            .values()
            .iter()
            .map(|&q| SpectrumSample { q, tau: q - 1.0, n_lo: 0, n_hi: 0, residual: 0.0 })
            .collect()
    }

    #[test]
    fn pinned_partition_sums() {
        for n in 1..=6 {
            assert_eq!(partition_sum(1.0, n, Exec::default()).unwrap().exact, Some(BigRational::one()));
        }
        assert_eq!(partition_sum(0.0, 3, Exec::default()).unwrap().exact, Some(r(7, 1)));
        assert_eq!(partition_sum(2.0, 1, Exec::default()).unwrap().exact, Some(r(13, 25)));
        assert_eq!(exact_partition_sum(0, 5, Exec::default()), word_count(5));
        assert!(partition_sum(0.5, 3, Exec::default()).unwrap().exact.is_none());
    }

    #[test]
    fn float_sums_agree_with_exact() {
        let level = table().level(6);
        let exact = ln_rational(&level.exact_sum(3.0).unwrap());
        let float = log_sum_exp(level.logs.iter().map(|&l| 3.0 * l));
        assert!((exact - float).abs() < 1e-12);
    }

    #[test]
    fn tau_pins() {
        let (lo, hi) = default_window(10);
        assert_eq!(tau_scale(table(), 1.0, lo, hi).unwrap().tau, 0.0);
        let t0 = tau_scale(table(), 0.0, lo, hi).unwrap().tau;
        assert!((-1.05..=-0.95).contains(&t0), "{t0}");
        let t2 = tau_scale(table(), 2.0, lo, hi).unwrap().tau;
        assert!(t2 > 0.0 && t2 < 1.0, "{t2}");
    }

    #[test]
    fn window_errors() {
        assert!(tau_scale(table(), 1.0, 5, 5).is_err());
        assert!(tau_scale(table(), 1.0, 0, 5).is_err());
        assert!(tau_scale(table(), 1.0, 3, 11).is_err());
        assert!(MassTable::build(17, Exec::default()).is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(QGrid::standard().values().len(), 81);
        assert_eq!(QGrid::range(0.0, 1.0, 0.5).unwrap().values(), &[0.0, 0.5, 1.0]);
        assert_eq!(QGrid::range(1.0, 0.0, 0.5), Err(SpectrumError::EmptyGrid));
        assert_eq!(QGrid::from_values(vec![]), Err(SpectrumError::EmptyGrid));
        assert!(QGrid::range(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn linear_conjugate() {
        let s = linear_samples();
        assert_eq!(legendre_at(&s, 1.0), 1.0);
        assert_eq!(legendre_at(&s, 1.5), -4.0);
        assert!(legendre(&s).iter().all(|p| p.alpha == 1.0 && p.f == 1.0));
    }

    #[test]
    fn convexity_checks() {
        let pts: Vec<(f64, f64)> = (-5..=5).map(|i| (i as f64, (i * i) as f64)).collect();
        assert!(is_convex(&pts, 0.0));
        assert!(!is_concave(&pts, 0.0));
    }

    #[test]
    fn report_properties() {
        let (lo, hi) = default_window(10);
        let grid = QGrid::range(-4.0, 4.0, 0.5).unwrap();
        let rep = spectrum_report(table(), &grid, lo, hi, Exec::default()).unwrap();
        assert!(rep.ln_sum_convex);
        assert!(rep.tau_concave);
        assert!(rep.legendre_concave);
        assert!(rep.max_f <= 1.0 + 1e-3 && rep.max_f > 0.95, "{}", rep.max_f);
        let t = rep.tangency.unwrap();
        assert!(t.gap < 0.02);
        assert!(rep.drift.is_none());
    }
}
