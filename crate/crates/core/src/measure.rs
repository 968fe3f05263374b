//! Exact values of μ and of the auxiliary measure μ′ on β-adic intervals.
//!
//! A full block word `w₁…w_k` over {0, 10, 1100} maps to the letter word
//! `t(w)` over {A, B, C}; every value below is a row functional applied to
//! `A(t(w))·V` divided by a power of two. The engine works with the integer
//! column `V·den` (den = 20 for the stationary vector) and only forms
//! rationals at the end.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::matrix::{Vector7, DIM};
use crate::numberfield::{ln_rational, FieldElement};
use crate::par::Exec;
use crate::parry::{
    enumerate_admissible_with, is_admissible_word, split_blocks, BinaryWord, Block, BlockWord,
    ParryError, Residue,
};
use crate::semigroup::{letter_matrix, Letter, TernaryWord, A_ROWS, B_ROWS, C_ROWS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeasureError {
    #[error("word {0} is not admissible")]
    NotAdmissible(String),
    #[error("word ends inside a block (residue {0})")]
    IncompleteBlock(Residue),
    #[error("stationary system is degenerate: {0}")]
    Degenerate(String),
    #[error("zero mass on {0}")]
    ZeroMass(String),
}

impl From<ParryError> for MeasureError {
    fn from(e: ParryError) -> Self {
        match e {
            ParryError::IncompleteBlock(r) => MeasureError::IncompleteBlock(r),
            other => MeasureError::NotAdmissible(other.to_string()),
        }
    }
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// `M(b) = A(letter)/2^|b|` for a block `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BlockMatrix {
    pub block: Block,
}

impl BlockMatrix {
    pub fn letter(self) -> Letter {
        block_letter(self.block)
    }

    pub fn denominator(self) -> i64 {
        1 << self.block.len()
    }

    pub fn apply(self, v: &Vector7) -> Vector7 {
        letter_matrix(self.letter())
            .apply(v)
            .scale(&rat(1, self.denominator()))
    }
}

pub fn block_letter(b: Block) -> Letter {
    match b {
        Block::Zero => Letter::Zero,
        Block::Ten => Letter::One,
        Block::ElevenHundred => Letter::Two,
    }
}

pub fn block_letters(blocks: &[Block]) -> TernaryWord {
    TernaryWord::new(blocks.iter().map(|&b| block_letter(b)).collect())
}

/// Exact solution of `(M(0)+M(10)+M(1100))V = V` with `V₁+V₂ = 1`.
pub fn stationary_v() -> Result<Vector7, MeasureError> {
    // Eight equations (seven eigen-rows plus the normalization) in seven unknowns.
    let mut rows: Vec<[BigRational; DIM + 1]> = (0..DIM)
        .map(|i| {
            std::array::from_fn(|j| {
                if j == DIM {
                    return BigRational::zero();
                }
                let m = rat(A_ROWS[i][j], 2) + rat(B_ROWS[i][j], 4) + rat(C_ROWS[i][j], 16);
                if i == j {
                    m - BigRational::one()
                } else {
                    m
                }
            })
        })
        .collect();
    let mut norm: [BigRational; DIM + 1] = std::array::from_fn(|_| BigRational::zero());
    norm[0] = BigRational::one();
    norm[1] = BigRational::one();
    norm[DIM] = BigRational::one();
    rows.push(norm);

    for (pivot_row, col) in (0..DIM).enumerate() {
        let Some(p) = (pivot_row..rows.len()).find(|&r| !rows[r][col].is_zero()) else {
            return Err(MeasureError::Degenerate(format!("no pivot in column {}", col + 1)));
        };
        rows.swap(pivot_row, p);
        let inv = rows[pivot_row][col].recip();
        for x in rows[pivot_row].iter_mut() {
            *x *= &inv;
        }
        let pivot = rows[pivot_row].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != pivot_row && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, y) in row.iter_mut().zip(pivot.iter()) {
                    *x -= &f * y;
                }
            }
        }
    }
    if rows[DIM..].iter().any(|r| !r[DIM].is_zero()) {
        return Err(MeasureError::Degenerate("inconsistent system".into()));
    }
    Ok(Vector7::new(std::array::from_fn(|i| rows[i][DIM].clone())))
}

struct Scaled {
    v: Vector7,
    column: [BigInt; DIM],
    den: BigInt,
}

fn scaled() -> &'static Scaled {
    static CELL: OnceLock<Scaled> = OnceLock::new();
    CELL.get_or_init(|| {
        let v = stationary_v().expect("stationary system has a unique solution");
        let den = v
            .entries()
            .iter()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let column = std::array::from_fn(|i| {
            (v.entry(i) * BigRational::from_integer(den.clone())).to_integer()
        });
        Scaled { v, column, den }
    })
}

/// The stationary vector, computed once.
pub fn v() -> &'static Vector7 {
    &scaled().v
}

/// `A(word)·V·den` as integers, plus `den`.
pub fn scaled_column(word: &TernaryWord) -> ([BigInt; DIM], &'static BigInt) {
    let s = scaled();
    let col = word
        .letters()
        .iter()
        .rev()
        .fold(s.column.clone(), |acc, &l| letter_matrix(l).apply_int(&acc));
    (col, &s.den)
}

/// Translation points i₁…i₇ of the seven shifted cylinder systems.
pub fn translation_grid() -> [FieldElement; DIM] {
    let b = FieldElement::beta();
    let one = FieldElement::one();
    let bm1 = &b - &one;
    let sq = &bm1 * &bm1;
    [
        FieldElement::zero(),
        one.clone(),
        &one - &sq,
        -&sq,
        bm1.clone(),
        &b - &sq,
        &b * &bm1,
    ]
}

/// `M(w₁)…M(w_k)·V`; entry j is μ((1/β)(i_j + I_w)).
pub fn translated_measures(blocks: &BlockWord) -> Vector7 {
    let (col, den) = scaled_column(&block_letters(blocks.blocks()));
    let scale = BigRational::new(BigInt::one(), den << blocks.binary_len());
    Vector7::from_big_ints(&col).scale(&scale)
}

fn full_block_mu(blocks: &[Block]) -> BigRational {
    let Some((&first, rest)) = blocks.split_first() else {
        return BigRational::one();
    };
    let (mut col, den) = scaled_column(&block_letters(rest));
    let row = match first {
        Block::Zero => 0,
        Block::Ten => {
            col = letter_matrix(Letter::Zero).apply_int(&col);
            1
        }
        Block::ElevenHundred => {
            col = letter_matrix(Letter::Zero).apply_int(&col);
            col = letter_matrix(Letter::One).apply_int(&col);
            1
        }
    };
    let bits: usize = blocks.iter().map(|b| b.len()).sum();
    BigRational::new(col[row].clone(), den << (bits - 1))
}

fn full_block_mu_prime(blocks: &[Block]) -> BigRational {
    let (col, den) = scaled_column(&block_letters(blocks));
    let bits: usize = blocks.iter().map(|b| b.len()).sum();
    let total: BigInt = col.iter().sum();
    BigRational::new(total, den << bits)
}

/// Extends a full-block value to residue endings by additivity.
fn with_residue(
    w: &BinaryWord,
    f: impl Fn(&[Block]) -> BigRational,
) -> Result<BigRational, MeasureError> {
    if !is_admissible_word(w) {
        return Err(MeasureError::NotAdmissible(w.to_string()));
    }
    let (blocks, residue) = split_blocks(w)?;
    let mut b = blocks.blocks().to_vec();
    Ok(match residue {
        None => f(&b),
        Some(Residue::One) => {
            b.push(Block::Ten);
            let ten = f(&b);
            *b.last_mut().expect("just pushed") = Block::ElevenHundred;
            ten + f(&b)
        }
        Some(Residue::OneOne) | Some(Residue::OneOneZero) => {
            b.push(Block::ElevenHundred);
            f(&b)
        }
    })
}

/// μ(I_w) for an admissible word.
pub fn mu_interval(w: &BinaryWord) -> Result<BigRational, MeasureError> {
    with_residue(w, full_block_mu)
}

/// μ′(I_w) = ‖M(w₁)…M(w_k)V‖ for an admissible word.
pub fn mu_prime_interval(w: &BinaryWord) -> Result<BigRational, MeasureError> {
    with_residue(w, full_block_mu_prime)
}

pub fn gibbs_ratio(w: &BinaryWord) -> Result<BigRational, MeasureError> {
    let m = mu_interval(w)?;
    if m.is_zero() {
        return Err(MeasureError::ZeroMass(w.to_string()));
    }
    Ok(mu_prime_interval(w)? / m)
}

/// Σ μ(I_w) over admissible words of length `n`.
pub fn level_sum(n: usize, exec: Exec) -> BigRational {
    level_masses(n, exec).into_iter().map(|(_, m)| m).sum()
}

/// `(w, μ(I_w))` for every admissible word of length `n`, lexicographic.
pub fn level_masses(n: usize, exec: Exec) -> Vec<(BinaryWord, BigRational)> {
    let words = enumerate_admissible_with(n, exec);
    let masses = exec.map(&words, |w| mu_interval(w).expect("enumerated words are admissible"));
    words.into_iter().zip(masses).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GibbsShape {
    ZeroRun,
    Ten,
    ElevenHundredRun,
}

/// `0^ν a w(n)`, `10 w(n)` or `(1100)^ν b w(n)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GibbsDecomposition {
    pub shape: GibbsShape,
    pub nu: usize,
    pub lead: Option<Block>,
    pub tail: Vec<Block>,
}

impl GibbsDecomposition {
    pub fn reassemble(&self) -> Vec<Block> {
        let head = match self.shape {
            GibbsShape::ZeroRun => Block::Zero,
            GibbsShape::Ten => Block::Ten,
            GibbsShape::ElevenHundredRun => Block::ElevenHundred,
        };
        let mut out = vec![head; self.nu];
        out.extend(self.lead);
        out.extend_from_slice(&self.tail);
        out
    }
}

pub fn gibbs_decompose(w: &BinaryWord) -> Result<GibbsDecomposition, MeasureError> {
    let blocks = crate::parry::decompose_blocks(w)?;
    let b = blocks.blocks();
    let Some(&first) = b.first() else {
        return Err(MeasureError::NotAdmissible("empty word".into()));
    };
    if first == Block::Ten {
        return Ok(GibbsDecomposition {
            shape: GibbsShape::Ten,
            nu: 1,
            lead: None,
            tail: b[1..].to_vec(),
        });
    }
    let nu = b.iter().take_while(|&&x| x == first).count();
    let shape = if first == Block::Zero {
        GibbsShape::ZeroRun
    } else {
        GibbsShape::ElevenHundredRun
    };
    Ok(GibbsDecomposition {
        shape,
        nu,
        lead: b.get(nu).copied(),
        tail: b.get(nu + 1..).map(<[Block]>::to_vec).unwrap_or_default(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GibbsBound {
    pub word: BinaryWord,
    pub decomposition: GibbsDecomposition,
    #[serde(serialize_with = "crate::serial::rational")]
    pub ratio: BigRational,
    #[serde(serialize_with = "crate::serial::rational")]
    pub m_plus: BigRational,
    #[serde(serialize_with = "crate::serial::rational")]
    pub m_minus: BigRational,
    #[serde(serialize_with = "crate::serial::rational")]
    pub bound: BigRational,
    pub holds: bool,
}

/// `21·ν·m⁺/m⁻` with `V_n` the normalized `M(w(n))V`.
pub fn gibbs_bound(w: &BinaryWord) -> Result<GibbsBound, MeasureError> {
    let decomposition = gibbs_decompose(w)?;
    let (col, _) = scaled_column(&block_letters(&decomposition.tail));
    let vn = Vector7::from_big_ints(&col)
        .normalized()
        .ok_or_else(|| MeasureError::ZeroMass(w.to_string()))?;
    let v_norm = v().normalized().expect("V is nonzero");
    let m_plus = vn.max_entry();
    let m_minus = [
        vn.entry(0) + vn.entry(6),
        vn.entry(2).clone(),
        v_norm.min_entry(),
    ]
    .into_iter()
    .min()
    .expect("three candidates");
    if !m_minus.is_positive() {
        return Err(MeasureError::ZeroMass(format!("lower functional on {w}")));
    }
    let bound = BigRational::from_integer(BigInt::from(21 * decomposition.nu)) * &m_plus / &m_minus;
    let ratio = gibbs_ratio(w)?;
    Ok(GibbsBound {
        word: w.clone(),
        holds: ratio <= bound,
        decomposition,
        ratio,
        m_plus,
        m_minus,
        bound,
    })
}

/// Row vectors U·A, U·B, U·C and U·B·A (U the all-ones row).
pub const UA: [i64; DIM] = [2, 1, 1, 1, 2, 0, 1];
pub const UB: [i64; DIM] = [1, 0, 2, 2, 1, 1, 0];
pub const UC: [i64; DIM] = [2, 0, 0, 1, 3, 0, 2];
pub const UBA: [i64; DIM] = [2, 0, 0, 2, 3, 0, 1];
pub const U: [i64; DIM] = [1; DIM];

#[derive(Clone, Debug, Serialize)]
pub struct PotentialCheck {
    pub word: BinaryWord,
    /// μ′(I_w)/μ′(I_{σw}).
    #[serde(serialize_with = "crate::serial::rational")]
    pub ratio: BigRational,
    /// Row-vector quotient predicted for `2·ratio`.
    #[serde(serialize_with = "crate::serial::rational")]
    pub closed_form: BigRational,
    pub matches: bool,
}

fn dot(row: &[i64; DIM], col: &[BigInt; DIM]) -> BigInt {
    row.iter().zip(col).map(|(&r, c)| BigInt::from(r) * c).sum()
}

/// exp φ_n for μ′ on a full block word, checked against the row-vector
/// closed form of the matching case.
pub fn n_step_potential_mu_prime(w: &BinaryWord) -> Result<PotentialCheck, MeasureError> {
    let blocks = crate::parry::decompose_blocks(w)?;
    let b = blocks.blocks();
    let Some((&first, rest)) = b.split_first() else {
        return Err(MeasureError::NotAdmissible("empty word".into()));
    };
    let shifted = w.shifted();
    let ratio = mu_prime_interval(w)? / mu_prime_interval(&shifted)?;
    let (col, _) = scaled_column(&block_letters(rest));
    let (num, den) = match first {
        Block::Zero => (UA, U),
        Block::Ten => (UB, UA),
        Block::ElevenHundred => (UC, UBA),
    };
    let closed_form = BigRational::new(dot(&num, &col), dot(&den, &col));
    let matches = &ratio * BigRational::from_integer(2.into()) == closed_form;
    Ok(PotentialCheck {
        word: w.clone(),
        ratio,
        closed_form,
        matches,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct GibbsRow {
    pub n: usize,
    pub words: usize,
    /// max |ln(μ′/μ)|/n.
    #[serde(serialize_with = "crate::serial::float")]
    pub delta: f64,
    pub argmax: BinaryWord,
    #[serde(serialize_with = "crate::serial::rational")]
    pub min_ratio: BigRational,
}

/// Δ(n) for `n = 1..=n_max`.
pub fn weak_gibbs_scan(n_max: usize, exec: Exec) -> Vec<GibbsRow> {
    (1..=n_max)
        .map(|n| {
            let words = enumerate_admissible_with(n, exec);
            let ratios = exec.map(&words, |w| gibbs_ratio(w).expect("admissible"));
            let mut best = (f64::NEG_INFINITY, 0usize);
            for (i, r) in ratios.iter().enumerate() {
                let d = ln_rational(r).abs() / n as f64;
                if d > best.0 {
                    best = (d, i);
                }
            }
            GibbsRow {
                n,
                words: words.len(),
                delta: best.0,
                argmax: words[best.1].clone(),
                min_ratio: ratios.into_iter().min().expect("nonempty level"),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::product;

    fn bw(s: &str) -> BinaryWord {
        s.parse().unwrap()
    }

    fn displayed_v() -> Vector7 {
        Vector7::from_fractions([(3, 5), (2, 5), (13, 20), (1, 5), (3, 5), (3, 10), (1, 5)])
    }

    #[test]
    fn stationary_vector() {
        let v = stationary_v().unwrap();
        assert_eq!(v, displayed_v());
        assert_eq!(v.norm_sum(), rat(59, 20));
        let sum = [Block::Zero, Block::Ten, Block::ElevenHundred]
            .iter()
            .fold(Vector7::zero(), |acc, &b| acc.add(&BlockMatrix { block: b }.apply(&v)));
        assert_eq!(sum, v);
    }

    #[test]
    fn translated_values() {
        assert_eq!(translated_measures(&BlockWord::new(vec![])), displayed_v());
        let av = Vector7::from_fractions([(3, 5), (13, 20), (4, 5), (0, 1), (4, 5), (3, 5), (2, 5)]);
        assert_eq!(translated_measures(&BlockWord::new(vec![Block::Zero])), av.scale(&rat(1, 2)));
        let cv = Vector7::from_fractions([(7, 5), (0, 1), (4, 5), (4, 5), (3, 5), (0, 1), (0, 1)]);
        assert_eq!(
            translated_measures(&BlockWord::new(vec![Block::ElevenHundred])),
            cv.scale(&rat(1, 16))
        );
    }

    #[test]
    fn grid_anchors() {
        let g = translation_grid();
        assert!(g[0].is_zero());
        assert_eq!(g[1], FieldElement::one());
        let b = FieldElement::beta();
        for x in &g {
            assert_eq!((x - &FieldElement::from_integer(-1)).sign(), std::cmp::Ordering::Greater);
            assert_eq!((&b - x).sign(), std::cmp::Ordering::Greater);
        }
    }

    #[test]
    fn interval_values() {
        assert_eq!(mu_interval(&bw("0")).unwrap(), rat(3, 5));
        assert_eq!(mu_interval(&bw("10")).unwrap(), rat(13, 40));
        assert_eq!(mu_interval(&bw("1100")).unwrap(), rat(3, 40));
        assert_eq!(mu_interval(&bw("1")).unwrap(), rat(2, 5));
        assert_eq!(mu_interval(&bw("11")).unwrap(), rat(3, 40));
        assert_eq!(mu_interval(&BinaryWord::empty()).unwrap(), BigRational::one());
        assert!(mu_interval(&bw("111")).is_err());
    }

    #[test]
    fn prime_values() {
        assert_eq!(mu_prime_interval(&BinaryWord::empty()).unwrap(), rat(59, 20));
        assert_eq!(mu_prime_interval(&bw("0")).unwrap(), rat(77, 40));
        assert_eq!(mu_prime_interval(&bw("1100")).unwrap(), rat(9, 40));
        assert_eq!(gibbs_ratio(&bw("0")).unwrap(), rat(77, 24));
        assert_eq!(gibbs_ratio(&bw("1100")).unwrap(), rat(3, 1));
    }

    #[test]
    fn partition_of_unity_small() {
        for n in 1..=9 {
            assert_eq!(level_sum(n, Exec::Sequential), BigRational::one(), "n={n}");
        }
    }

    #[test]
    fn additivity() {
        for n in 0..=8 {
            for w in enumerate_admissible_with(n, Exec::Sequential) {
                let kids: Vec<BinaryWord> =
                    [0, 1].iter().map(|&d| w.child(d)).filter(is_admissible_word).collect();
                let mu_sum: BigRational = kids.iter().map(|k| mu_interval(k).unwrap()).sum();
                let mup_sum: BigRational = kids.iter().map(|k| mu_prime_interval(k).unwrap()).sum();
                assert_eq!(mu_sum, mu_interval(&w).unwrap(), "{w}");
                assert_eq!(mup_sum, mu_prime_interval(&w).unwrap(), "{w}");
            }
        }
    }

    #[test]
    fn row_vectors() {
        let u: [BigInt; DIM] = std::array::from_fn(|_| BigInt::one());
        let check = |word: &str, want: [i64; DIM]| {
            let got = product(&word.parse().unwrap()).left_apply_int(&u);
            assert_eq!(got, want.map(BigInt::from), "{word}");
        };
        check("0", UA);
        check("1", UB);
        check("2", UC);
        check("10", UBA);
    }

    #[test]
    fn decompositions() {
        let d = gibbs_decompose(&bw("000010")).unwrap();
        assert_eq!((d.shape, d.nu, d.lead), (GibbsShape::ZeroRun, 4, Some(Block::Ten)));
        assert!(d.tail.is_empty());
        let d = gibbs_decompose(&bw("100")).unwrap();
        assert_eq!((d.shape, d.nu, d.lead), (GibbsShape::Ten, 1, None));
        assert_eq!(d.tail, vec![Block::Zero]);
        let d = gibbs_decompose(&bw("11001100100")).unwrap();
        assert_eq!((d.shape, d.nu, d.lead), (GibbsShape::ElevenHundredRun, 2, Some(Block::Ten)));
        assert_eq!(d.tail, vec![Block::Zero]);
        assert!(gibbs_decompose(&bw("11")).is_err());
    }

    #[test]
    fn decomposition_reassembles() {
        for n in 1..=10 {
            for w in enumerate_admissible_with(n, Exec::Sequential) {
                if let Ok(d) = gibbs_decompose(&w) {
                    assert_eq!(BlockWord::new(d.reassemble()).to_binary(), w);
                }
            }
        }
    }

    #[test]
    fn potentials() {
        let p = n_step_potential_mu_prime(&bw("0")).unwrap();
        assert_eq!(&p.ratio * BigRational::from_integer(2.into()), rat(77, 59));
        assert!(p.matches);
        assert!(n_step_potential_mu_prime(&bw("100")).unwrap().matches);
        assert!(n_step_potential_mu_prime(&bw("11000")).unwrap().matches);
        assert!(n_step_potential_mu_prime(&bw("1")).is_err());
    }

    #[test]
    fn bound_on_zero_runs() {
        for n in 1..=12 {
            let b = gibbs_bound(&BinaryWord::new(vec![0; n]).unwrap()).unwrap();
            assert!(b.holds, "0^{n}");
            assert_eq!(b.decomposition.nu, n);
        }
    }

    #[test]
    fn scan_shape() {
        let rows = weak_gibbs_scan(6, Exec::Sequential);
        assert_eq!(rows.len(), 6);
        assert!(rows.iter().all(|r| r.delta.is_finite() && r.min_ratio >= BigRational::one()));
        assert!(rows[5].delta < rows[1].delta);
    }
}
