//! Brute-force validator: the 2^N atoms of the N-fold convolution
//! `(β−1) Σ_{k≤N} ω_k β^{−k}`, each of weight 2^{−N}.
//!
//! Every point of the limit measure lies in `[p, p + β^{−N}]` for the atom p
//! that truncates it, so counting atoms whose window is inside (resp. meets)
//! `[a, b)` brackets μ[a, b) from below (resp. above).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::measure::{self, MeasureError};
use crate::numberfield::FieldElement;
use crate::par::Exec;
use crate::parry::{decompose_blocks, enumerate_admissible_with, interval_of, BlockWord, ParryError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("depth {0} exceeds the memory budget of {MAX_DEPTH}")]
    Budget(usize),
    #[error("translation index {0} is outside 1..=7")]
    Index(usize),
    #[error(transparent)]
    Parry(#[from] ParryError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

pub const MAX_DEPTH: usize = 26;

/// Absorbs rounding in atom positions and interval endpoints.
pub const FLOAT_SLACK: f64 = 1e-12;

#[derive(Clone, Debug)]
pub struct AtomCloud {
    depth: usize,
    positions: Vec<f64>,
    window: f64,
}

fn beta() -> f64 {
    FieldElement::beta().to_f64()
}

pub fn build_atoms(depth: usize, exec: Exec) -> Result<AtomCloud, OracleError> {
    if depth > MAX_DEPTH {
        return Err(OracleError::Budget(depth));
    }
    let b = beta();
    let weights: Vec<f64> = (1..=depth).map(|k| (b - 1.0) * b.powi(-(k as i32))).collect();
    // Shard on the leading digits; each shard doubles its list digit by digit.
    let lead = depth.min(4);
    let positions: Vec<f64> = exec
        .map_range(0..1 << lead, |code| {
            let base: f64 = (0..lead)
                .filter(|&k| code >> (lead - 1 - k) & 1 == 1)
                .map(|k| weights[k])
                .sum();
            let mut out = Vec::with_capacity(1 << (depth - lead));
            out.push(base);
            for &w in &weights[lead..] {
                let len = out.len();
                for i in 0..len {
                    out.push(out[i] + w);
                }
            }
            out
        })
        .into_iter()
        .flatten()
        .collect();
    let mut positions = positions;
    exec.sort_f64(&mut positions);
    Ok(AtomCloud {
        depth,
        positions,
        window: b.powi(-(depth as i32)),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Bounds {
    #[serde(serialize_with = "crate::serial::rational")]
    pub lower: BigRational,
    #[serde(serialize_with = "crate::serial::rational")]
    pub upper: BigRational,
}

impl Bounds {
    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lower <= x && x <= &self.upper
    }

    pub fn gap(&self) -> BigRational {
        &self.upper - &self.lower
    }
}

impl AtomCloud {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    fn weight(&self, count: usize) -> BigRational {
        BigRational::new(BigInt::from(count), BigInt::one() << self.depth)
    }

    /// Rigorous bracket of μ[a, b).
    pub fn interval_bounds(&self, a: f64, b: f64) -> Bounds {
        let (w, e) = (self.window, FLOAT_SLACK);
        let pos = &self.positions;
        // Windows [p − e, p + w + e] inside [a, b).
        let inner_lo = pos.partition_point(|&p| p - e < a);
        let inner_hi = pos.partition_point(|&p| p + w + e <= b);
        // Windows meeting [a, b).
        let outer_lo = pos.partition_point(|&p| p + w + e <= a);
        let outer_hi = pos.partition_point(|&p| p - e < b);
        Bounds {
            lower: self.weight(inner_hi.saturating_sub(inner_lo)),
            upper: self.weight(outer_hi.saturating_sub(outer_lo)),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleRow {
    pub word: String,
    #[serde(serialize_with = "crate::serial::rational")]
    pub mu_exact: BigRational,
    #[serde(flatten)]
    pub bounds: Bounds,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub n: usize,
    pub depth: usize,
    pub rows: Vec<OracleRow>,
    #[serde(serialize_with = "crate::serial::rational")]
    pub worst_gap: BigRational,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    fn from_rows(n: usize, depth: usize, rows: Vec<OracleRow>) -> Self {
        let worst_gap = rows.iter().map(|r| r.bounds.gap()).max().unwrap_or_default();
        OracleReport { n, depth, rows, worst_gap }
    }
}

/// Brackets μ(I_w) for every admissible word of length `n`.
pub fn compare_all(cloud: &AtomCloud, n: usize, exec: Exec) -> Result<OracleReport, OracleError> {
    let words = enumerate_admissible_with(n, exec);
    let rows = exec
        .map(&words, |w| -> Result<OracleRow, OracleError> {
            let iv = interval_of(w)?;
            let mu = measure::mu_interval(w)?;
            let bounds = cloud.interval_bounds(iv.left.to_f64(), iv.right().to_f64());
            Ok(OracleRow {
                word: w.to_string(),
                pass: bounds.contains(&mu),
                mu_exact: mu,
                bounds,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    Ok(OracleReport::from_rows(n, cloud.depth(), rows))
}

/// Brackets μ((1/β)(i_j + I)) against entry j of the translated measures.
pub fn translated_compare(cloud: &AtomCloud, j: usize, blocks: &BlockWord) -> Result<OracleRow, OracleError> {
    if !(1..=7).contains(&j) {
        return Err(OracleError::Index(j));
    }
    let grid = measure::translation_grid();
    let inv = FieldElement::beta_inv();
    let (left, len) = if blocks.is_empty() {
        (FieldElement::zero(), FieldElement::one())
    } else {
        let iv = interval_of(&blocks.to_binary())?;
        (iv.left.clone(), iv.length.clone())
    };
    let a = &(&grid[j - 1] + &left) * &inv;
    let b = &(&(&grid[j - 1] + &left) + &len) * &inv;
    let mu = measure::translated_measures(blocks).entry(j - 1).clone();
    let bounds = cloud.interval_bounds(a.to_f64(), b.to_f64());
    Ok(OracleRow {
        word: format!("j={j}:{}", blocks.to_binary()),
        pass: bounds.contains(&mu),
        mu_exact: mu,
        bounds,
    })
}

/// All seven translations of every full-block word of binary length `n`.
pub fn translated_compare_all(cloud: &AtomCloud, n: usize, exec: Exec) -> Result<OracleReport, OracleError> {
    let words: Vec<BlockWord> = enumerate_admissible_with(n, exec)
        .iter()
        .filter_map(|w| decompose_blocks(w).ok())
        .collect();
    let jobs: Vec<(usize, &BlockWord)> = words.iter().flat_map(|b| (1..=7).map(move |j| (j, b))).collect();
    let rows = exec
        .map(&jobs, |&(j, b)| translated_compare(cloud, j, b))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    Ok(OracleReport::from_rows(n, cloud.depth(), rows))
}

#[derive(Clone, Debug, Serialize)]
pub struct SelfSimilarity {
    pub intervals: usize,
    pub failures: Vec<(f64, f64)>,
}

/// μ[a,b) = ½μ[βa, βb) + ½μ[βa − (β−1), βb − (β−1)), checked up to the
/// bound gaps on `[k/2^m, (k+1)/2^m)`.
pub fn self_similarity(cloud: &AtomCloud, m: u32) -> SelfSimilarity {
    let b = beta();
    let shift = b - 1.0;
    let half = BigRational::new(1.into(), 2.into());
    let cells = 1usize << m;
    let mut failures = Vec::new();
    for k in 0..cells {
        let (lo, hi) = (k as f64 / cells as f64, (k + 1) as f64 / cells as f64);
        let lhs = cloud.interval_bounds(lo, hi);
        let r0 = cloud.interval_bounds(b * lo, b * hi);
        let r1 = cloud.interval_bounds(b * lo - shift, b * hi - shift);
        let rl = &half * (&r0.lower + &r1.lower);
        let ru = &half * (&r0.upper + &r1.upper);
        if lhs.lower > ru || rl > lhs.upper {
            failures.push((lo, hi));
        }
    }
    SelfSimilarity { intervals: cells, failures }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parry::Block;
    use std::sync::OnceLock;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn cloud(depth: usize) -> &'static AtomCloud {
        static C16: OnceLock<AtomCloud> = OnceLock::new();
        static C20: OnceLock<AtomCloud> = OnceLock::new();
        let cell = if depth == 16 { &C16 } else { &C20 };
        assert!(depth == 16 || depth == 20);
        cell.get_or_init(|| build_atoms(depth, Exec::default()).unwrap())
    }

    #[test]
    fn small_clouds() {
        let b = beta();
        let c1 = build_atoms(1, Exec::Sequential).unwrap();
        assert_eq!(c1.positions()[0], 0.0);
        assert!((c1.positions()[1] - (b - 1.0) / b).abs() < 1e-15);
        let c2 = build_atoms(2, Exec::Parallel).unwrap();
        let want = [0.0, (b - 1.0) / (b * b), (b - 1.0) / b, (b - 1.0) * (1.0 / b + 1.0 / (b * b))];
        for (x, y) in c2.positions().iter().zip(want) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn policies_agree() {
        let a = build_atoms(12, Exec::Sequential).unwrap();
        let b = build_atoms(12, Exec::Parallel).unwrap();
        assert_eq!(a.positions(), b.positions());
        assert!(a.positions().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn depth_twenty() {
        let c = cloud(20);
        assert_eq!(c.len(), 1 << 20);
        assert_eq!(c.positions()[0], 0.0);
        let top = c.positions()[c.len() - 1];
        let b = beta();
        assert!((top - (1.0 - b.powi(-20))).abs() < 1e-12 && top < 1.0);
        let whole = c.interval_bounds(-1.0, 2.0);
        assert!(whole.lower.is_one() && whole.upper.is_one());
        let i0 = c.interval_bounds(0.0, 1.0 / b);
        assert!(i0.contains(&r(3, 5)));
        assert!(i0.gap() < r(1, 100));
        let empty = c.interval_bounds(0.3, 0.3);
        assert_eq!(empty.lower, r(0, 1));
        assert!(empty.upper < r(1, 100));
    }

    #[test]
    fn gaps_shrink_with_depth() {
        let b = beta();
        let g16 = cloud(16).interval_bounds(0.0, 1.0 / b).gap();
        let g20 = cloud(20).interval_bounds(0.0, 1.0 / b).gap();
        assert!(g20 < g16);
    }

    #[test]
    fn level_four_brackets() {
        let rep = compare_all(cloud(20), 4, Exec::default()).unwrap();
        assert_eq!(rep.rows.len(), 12);
        assert!(rep.passed(), "{:?}", rep.rows.iter().filter(|r| !r.pass).collect::<Vec<_>>());
    }

    #[test]
    fn translated_examples() {
        let c = cloud(20);
        let empty = BlockWord::new(vec![]);
        let row = translated_compare(c, 1, &empty).unwrap();
        assert!(row.pass && row.mu_exact == r(3, 5));
        let row = translated_compare(c, 3, &empty).unwrap();
        assert!(row.pass && row.mu_exact == r(13, 20));
        let row = translated_compare(c, 6, &BlockWord::new(vec![Block::Zero])).unwrap();
        assert!(row.pass && row.mu_exact == r(3, 10));
        assert!(translated_compare(c, 8, &empty).is_err());
        assert!(translated_compare_all(c, 3, Exec::default()).unwrap().passed());
    }

    #[test]
    fn self_similar_masses() {
        let s = self_similarity(cloud(16), 4);
        assert!(s.failures.is_empty(), "{:?}", s.failures);
    }

    #[test]
    fn budget() {
        assert_eq!(build_atoms(27, Exec::default()).unwrap_err(), OracleError::Budget(27));
    }
}
