//! Normalized products `P_n(ω, V) = A(ω₁…ωₙ)V / ‖A(ω₁…ωₙ)V‖`, Cauchy moduli
//! over cylinders, and limit vectors along eventually periodic ω.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::matrix::{int_support, Matrix7, SupportSet, Vector7, DIM};
use crate::measure;
use crate::par::Exec;
use crate::semigroup::{letter_matrix, product, Letter, TernaryWord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConvergenceError {
    #[error("product vector vanishes on prefix {0}")]
    NotInOmegaAV(String),
    #[error("{branches} branches exceed the budget of {budget}")]
    Budget { branches: u128, budget: u128 },
    #[error("depth {depth} is shorter than the prefix ({prefix})")]
    DepthBelowPrefix { depth: usize, prefix: usize },
    #[error("period must be nonempty")]
    EmptyPeriod,
    #[error("matrix family is malformed: {0}")]
    Family(String),
    #[error("integer overflow in the branch scan; lower the depth")]
    Overflow,
    #[error("limit support {0} is outside the admissible list")]
    Classification(SupportSet),
    #[error("limit did not stabilize within {0} steps")]
    Inconclusive(usize),
}

/// Default budget for exhaustive branch scans (3¹²).
pub const DEFAULT_BUDGET: u128 = 531_441;

pub fn p_n(prefix: &TernaryWord, v0: &Vector7) -> Result<Vector7, ConvergenceError> {
    product(prefix)
        .apply(v0)
        .normalized()
        .ok_or_else(|| ConvergenceError::NotInOmegaAV(prefix.to_string()))
}

type Col = [i128; DIM];
type Mat = [[i128; DIM]; DIM];

/// `m · A(l)`; A(l) has 0/1 entries, so each output column is a sum of input columns.
fn mul_letter(m: &Mat, l: Letter) -> Option<Mat> {
    let a = l.rows();
    let mut out = [[0i128; DIM]; DIM];
    for (k, arow) in a.iter().enumerate() {
        for (j, &x) in arow.iter().enumerate() {
            if x != 0 {
                for i in 0..DIM {
                    out[i][j] = out[i][j].checked_add(m[i][k])?;
                }
            }
        }
    }
    Some(out)
}

fn mat_col(m: &Mat, v: &Col) -> Option<Col> {
    let mut out = [0i128; DIM];
    for i in 0..DIM {
        for j in 0..DIM {
            out[i] = out[i].checked_add(m[i][j].checked_mul(v[j])?)?;
        }
    }
    Some(out)
}

/// Exact ‖u/|u| − v/|v|‖ as (numerator, denominator).
fn distance(u: &Col, v: &Col) -> Option<(i128, i128)> {
    let su: i128 = u.iter().sum();
    let sv: i128 = v.iter().sum();
    let mut num = 0i128;
    for i in 0..DIM {
        let t = u[i].checked_mul(sv)?.checked_sub(v[i].checked_mul(su)?)?;
        num = num.checked_add(t.abs())?;
    }
    Some((num, su.checked_mul(sv)?))
}

#[derive(Clone, Debug)]
struct Best {
    value: BigRational,
    approx: f64,
    branch: Vec<Letter>,
    r: usize,
    s: usize,
}

impl Best {
    fn zero() -> Self {
        Best {
            value: BigRational::zero(),
            approx: 0.0,
            branch: Vec::new(),
            r: 0,
            s: 0,
        }
    }

    fn offer(&mut self, num: i128, den: i128, branch: &[Letter], r: usize, s: usize) {
        if num == 0 {
            return;
        }
        let approx = num as f64 / den as f64;
        if approx < self.approx * (1.0 - 1e-9) {
            return;
        }
        let value = BigRational::new(num.into(), den.into());
        if value > self.value {
            self.value = value;
            self.approx = approx;
            self.branch = branch.to_vec();
            self.r = r;
            self.s = s;
        }
    }
}

struct Scan<'a> {
    column: &'a Col,
    depth: usize,
    start: usize,
}

impl Scan<'_> {
    /// `m` is the product of the current branch, `cols[k]` the column at
    /// length `start + k`.
    fn dfs(&self, m: &Mat, branch: &mut Vec<Letter>, cols: &mut Vec<Col>, best: &mut Best) -> Option<()> {
        let r = branch.len();
        let x = *cols.last().expect("column of the current node");
        for (k, y) in cols[..cols.len() - 1].iter().enumerate() {
            let (num, den) = distance(&x, y)?;
            best.offer(num, den, branch, r, self.start + k);
        }
        if r == self.depth {
            return Some(());
        }
        for l in Letter::ALL {
            let next = mul_letter(m, l)?;
            let col = mat_col(&next, self.column)?;
            branch.push(l);
            cols.push(col);
            self.dfs(&next, branch, cols, best)?;
            cols.pop();
            branch.pop();
        }
        Some(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CauchyModulus {
    pub prefix: TernaryWord,
    pub depth: usize,
    #[serde(serialize_with = "crate::serial::rational")]
    pub modulus: BigRational,
    #[serde(serialize_with = "crate::serial::float")]
    pub approx: f64,
    /// Extension realising the maximum, and the pair (r, s).
    pub witness: TernaryWord,
    pub r: usize,
    pub s: usize,
    pub branches: u128,
}

/// Exact `max ‖P_r(ξ,V) − P_s(ξ,V)‖` over extensions ξ of `prefix` to length
/// `depth` and `|prefix| ≤ r, s ≤ depth`.
pub fn cauchy_modulus(
    prefix: &TernaryWord,
    depth: usize,
    budget: u128,
    exec: Exec,
) -> Result<CauchyModulus, ConvergenceError> {
    let n = prefix.len();
    if depth < n {
        return Err(ConvergenceError::DepthBelowPrefix { depth, prefix: n });
    }
    let branches = 3u128
        .checked_pow((depth - n) as u32)
        .ok_or(ConvergenceError::Budget { branches: u128::MAX, budget })?;
    if branches > budget {
        return Err(ConvergenceError::Budget { branches, budget });
    }
    let (v20, _) = measure::scaled_column(&TernaryWord::empty());
    let column: Col = std::array::from_fn(|i| v20[i].to_i128().expect("small stationary column"));
    let mut m: Mat = std::array::from_fn(|i| std::array::from_fn(|j| i128::from(i == j)));
    for &l in prefix.letters() {
        m = mul_letter(&m, l).ok_or(ConvergenceError::Overflow)?;
    }
    let base = mat_col(&m, &column).ok_or(ConvergenceError::Overflow)?;
    let scan = Scan { column: &column, depth, start: n };

    // Shard on up to two extension letters.
    let split = (depth - n).min(2);
    let shards: Vec<Vec<Letter>> = TernaryWord::all_of_length(split)
        .into_iter()
        .map(|w| w.letters().to_vec())
        .collect();
    let results = exec.map(&shards, |shard| -> Option<Best> {
        let mut best = Best::zero();
        let mut branch = prefix.letters().to_vec();
        let mut cols = vec![base];
        let mut mm = m;
        // Inner nodes of the shard head; dfs covers the head's last node.
        for (i, &l) in shard.iter().enumerate() {
            if i > 0 {
                let x = cols[cols.len() - 1];
                for (k, y) in cols[..cols.len() - 1].iter().enumerate() {
                    let (num, den) = distance(&x, y)?;
                    best.offer(num, den, &branch, branch.len(), n + k);
                }
            }
            mm = mul_letter(&mm, l)?;
            cols.push(mat_col(&mm, &column)?);
            branch.push(l);
        }
        scan.dfs(&mm, &mut branch, &mut cols, &mut best)?;
        Some(best)
    });
    let mut best = Best::zero();
    for r in results {
        let r = r.ok_or(ConvergenceError::Overflow)?;
        if r.value > best.value {
            best = r;
        }
    }
    let witness = TernaryWord::new(best.branch.get(n..).map(<[Letter]>::to_vec).unwrap_or_default());
    Ok(CauchyModulus {
        prefix: prefix.clone(),
        depth,
        approx: crate::numberfield::rational_to_f64(&best.value),
        modulus: best.value,
        witness,
        r: best.r,
        s: best.s,
        branches,
    })
}

/// Modulus restricted to the single branch `prefix · extension`.
pub fn branch_modulus(prefix: &TernaryWord, extension: &TernaryWord) -> Result<BigRational, ConvergenceError> {
    let v = measure::v();
    let full = prefix.concat(extension);
    let n = prefix.len();
    let vecs: Vec<Vector7> = (n..=full.len())
        .map(|r| p_n(&full.slice(0..r), v))
        .collect::<Result<_, _>>()?;
    let mut best = BigRational::zero();
    for (i, a) in vecs.iter().enumerate() {
        for b in &vecs[..i] {
            best = best.max(a.distance(b));
        }
    }
    Ok(best)
}

/// A finite family of nonnegative square matrices of any size, with rational entries.
#[derive(Clone, Debug)]
pub struct GenericFamily {
    dim: usize,
    matrices: Vec<Vec<Vec<BigRational>>>,
}

impl GenericFamily {
    pub fn new(matrices: Vec<Vec<Vec<BigRational>>>) -> Result<Self, ConvergenceError> {
        let dim = matrices.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(ConvergenceError::Family("empty family".into()));
        }
        for m in &matrices {
            if m.len() != dim || m.iter().any(|r| r.len() != dim) {
                return Err(ConvergenceError::Family("matrices must be square of one size".into()));
            }
            if m.iter().flatten().any(Signed::is_negative) {
                return Err(ConvergenceError::Family("negative entry".into()));
            }
        }
        Ok(GenericFamily { dim, matrices })
    }

    /// `letters` copies of the identity.
    pub fn identity(dim: usize, letters: usize) -> Self {
        let id: Vec<Vec<BigRational>> = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
            .collect();
        GenericFamily { dim, matrices: vec![id; letters] }
    }

    /// The 3×3 pair whose products converge pointwise but not uniformly,
    /// with starting vector (1,1,1).
    pub fn nonuniform_example() -> (Self, Vec<BigRational>) {
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        let b0 = vec![
            vec![r(1, 1), r(0, 1), r(1, 1)],
            vec![r(0, 1), r(1, 1), r(0, 1)],
            vec![r(0, 1), r(0, 1), r(0, 1)],
        ];
        let b1 = vec![
            vec![r(1, 1), r(0, 1), r(1, 1)],
            vec![r(1, 2), r(0, 1), r(0, 1)],
            vec![r(0, 1), r(0, 1), r(0, 1)],
        ];
        let fam = GenericFamily::new(vec![b0, b1]).expect("well-formed example");
        (fam, vec![BigRational::one(); 3])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn letters(&self) -> usize {
        self.matrices.len()
    }

    fn apply(&self, letter: usize, v: &[BigRational]) -> Vec<BigRational> {
        self.matrices[letter]
            .iter()
            .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn check_word(&self, word: &[usize]) -> Result<(), ConvergenceError> {
        match word.iter().find(|&&l| l >= self.letters()) {
            Some(l) => Err(ConvergenceError::Family(format!("letter {l} out of range"))),
            None => Ok(()),
        }
    }
}

fn normalize(v: &[BigRational], label: &dyn Fn() -> String) -> Result<Vec<BigRational>, ConvergenceError> {
    let s: BigRational = v.iter().map(|x| x.abs()).sum();
    if s.is_zero() {
        return Err(ConvergenceError::NotInOmegaAV(label()));
    }
    Ok(v.iter().map(|x| x / &s).collect())
}

fn word_label(w: &[usize]) -> String {
    w.iter().map(|d| d.to_string()).collect()
}

fn l1(a: &[BigRational], b: &[BigRational]) -> BigRational {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn generic_p_n(
    family: &GenericFamily,
    v0: &[BigRational],
    prefix: &[usize],
) -> Result<Vec<BigRational>, ConvergenceError> {
    if v0.len() != family.dim() {
        return Err(ConvergenceError::Family("vector length differs from matrix size".into()));
    }
    family.check_word(prefix)?;
    let v = prefix.iter().rev().fold(v0.to_vec(), |acc, &l| family.apply(l, &acc));
    normalize(&v, &|| word_label(prefix))
}

/// Exhaustive modulus for a generic family (exact rationals, small sizes).
pub fn generic_cauchy_modulus(
    family: &GenericFamily,
    v0: &[BigRational],
    prefix: &[usize],
    depth: usize,
    budget: u128,
) -> Result<BigRational, ConvergenceError> {
    let n = prefix.len();
    if depth < n {
        return Err(ConvergenceError::DepthBelowPrefix { depth, prefix: n });
    }
    let branches = (family.letters() as u128)
        .checked_pow((depth - n) as u32)
        .unwrap_or(u128::MAX);
    if branches > budget {
        return Err(ConvergenceError::Budget { branches, budget });
    }
    let mut best = BigRational::zero();
    let mut stack: Vec<Vec<usize>> = vec![prefix.to_vec()];
    while let Some(word) = stack.pop() {
        if word.len() == depth {
            let vecs: Vec<Vec<BigRational>> = (n..=depth)
                .map(|r| generic_p_n(family, v0, &word[..r]))
                .collect::<Result<_, _>>()?;
            for (i, a) in vecs.iter().enumerate() {
                for b in &vecs[..i] {
                    best = best.max(l1(a, b));
                }
            }
            continue;
        }
        for l in 0..family.letters() {
            let mut w = word.clone();
            w.push(l);
            stack.push(w);
        }
    }
    Ok(best)
}

/// Iterates a generic family along `pre · period^∞` until successive
/// normalized vectors agree within `tol`.
pub fn generic_limit(
    family: &GenericFamily,
    v0: &[BigRational],
    pre: &[usize],
    period: &[usize],
    n_max: usize,
    tol: f64,
) -> Result<Vec<BigRational>, ConvergenceError> {
    if period.is_empty() {
        return Err(ConvergenceError::EmptyPeriod);
    }
    let mut word = pre.to_vec();
    let mut prev = generic_p_n(family, v0, &word)?;
    let mut calm = 0;
    while word.len() < n_max {
        word.push(period[(word.len() - pre.len()) % period.len()]);
        let cur = generic_p_n(family, v0, &word)?;
        let d = crate::numberfield::rational_to_f64(&l1(&cur, &prev));
        calm = if d < tol { calm + 1 } else { 0 };
        prev = cur;
        if calm >= period.len() {
            return Ok(prev);
        }
    }
    Err(ConvergenceError::Inconclusive(n_max))
}

/// `preperiod · period^∞`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PeriodicOmega {
    pub preperiod: TernaryWord,
    pub period: TernaryWord,
}

impl PeriodicOmega {
    pub fn new(preperiod: TernaryWord, period: TernaryWord) -> Result<Self, ConvergenceError> {
        if period.is_empty() {
            return Err(ConvergenceError::EmptyPeriod);
        }
        Ok(PeriodicOmega { preperiod, period })
    }

    pub fn pure(period: TernaryWord) -> Result<Self, ConvergenceError> {
        Self::new(TernaryWord::empty(), period)
    }

    pub fn letter(&self, i: usize) -> Letter {
        let p = self.preperiod.len();
        if i < p {
            self.preperiod.letters()[i]
        } else {
            self.period.letters()[(i - p) % self.period.len()]
        }
    }
}

impl fmt::Display for PeriodicOmega {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.preperiod, self.period)
    }
}

impl Serialize for PeriodicOmega {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// The seven possible limit supports.
pub fn limit_supports() -> [SupportSet; 7] {
    [
        SupportSet::from_indices(&[1, 2, 3, 4, 5]),
        SupportSet::from_indices(&[1, 2, 3, 5, 6, 7]),
        SupportSet::from_indices(&[1, 2, 3, 5, 6]),
        SupportSet::from_indices(&[1, 2, 3, 5]),
        SupportSet::from_indices(&[1, 3, 4, 5]),
        SupportSet::from_indices(&[1, 3, 4]),
        SupportSet::from_indices(&[2, 3, 5, 6, 7]),
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitMethod {
    /// Eventually periodic column sequence.
    Bounded,
    /// Column sequence grows exactly linearly along multiples of a period.
    Linear,
    /// Geometric regime; exact iteration with a float stop test.
    Iterated,
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitReport {
    pub omega: PeriodicOmega,
    pub method: LimitMethod,
    pub converged: bool,
    pub limit: Vector7,
    pub support: SupportSet,
    pub steps: usize,
}

type BigCol = [BigInt; DIM];

fn is_zero_col(v: &BigCol) -> bool {
    v.iter().all(Zero::is_zero)
}

fn sub_col(a: &BigCol, b: &BigCol) -> BigCol {
    std::array::from_fn(|i| &a[i] - &b[i])
}

/// Exact tail analysis: finds `k₀ ≤ 24`, `p′ ≤ 12` with `Q^{p′}d = d` for
/// `d = z_{k₀+p′} − z_{k₀}`, `z_k = Q^k·start`. Returns the limit direction
/// of `pre·z_k` if all residues mod p′ agree.
fn linear_tail(pre: &Matrix7, q: &Matrix7, start: &BigCol) -> Option<(LimitMethod, Vector7)> {
    const MAX_P: usize = 12;
    const MAX_K0: usize = 24;
    let mut z = vec![start.clone()];
    for _ in 0..MAX_K0 + MAX_P {
        let next = q.apply_int(z.last().expect("nonempty"));
        z.push(next);
    }
    // Exponential growth cannot be linear; skip the search.
    let bits = |v: &BigCol| v.iter().map(|x| x.bits()).max().unwrap_or(0);
    if bits(&z[MAX_K0 + MAX_P]) > bits(&z[0]) + 40 {
        return None;
    }
    let mut qp = Matrix7::identity();
    for p in 1..=MAX_P {
        qp = &qp * q;
        for k0 in 0..=MAX_K0 {
            let d = sub_col(&z[k0 + p], &z[k0]);
            if qp.apply_int(&d) != d {
                continue;
            }
            let mut dirs = Vec::with_capacity(p);
            let mut growing = false;
            for i in 0..p {
                let di = pre.apply_int(&sub_col(&z[k0 + i + p], &z[k0 + i]));
                let v = if is_zero_col(&di) {
                    pre.apply_int(&z[k0 + i])
                } else {
                    growing = true;
                    di
                };
                dirs.push(Vector7::from_big_ints(&v).normalized()?);
            }
            if dirs.iter().all(|x| x == &dirs[0]) {
                let m = if growing { LimitMethod::Linear } else { LimitMethod::Bounded };
                return Some((m, dirs.swap_remove(0)));
            }
            return None;
        }
    }
    None
}

fn col_to_f64(v: &BigCol) -> [f64; DIM] {
    let top = v.iter().map(|x| x.bits()).max().unwrap_or(0);
    let shift = top.saturating_sub(60);
    let f: [f64; DIM] = std::array::from_fn(|i| (&v[i] >> shift).to_f64().unwrap_or(0.0));
    let s: f64 = f.iter().sum();
    if s == 0.0 {
        f
    } else {
        f.map(|x| x / s)
    }
}

/// Limit of `P_n(ω, V)` along an eventually periodic ω.
pub fn limit_vector(omega: &PeriodicOmega, n_max: usize, tol: f64) -> LimitReport {
    let pre = product(&omega.preperiod);
    let q = product(&omega.period);
    let (v, _) = measure::scaled_column(&TernaryWord::empty());
    let p = omega.period.len();

    // Every residue of n modulo the period starts the tail at A(u₁…u_r)V.
    let mut tails = Vec::with_capacity(p);
    for r in 0..p {
        let start = product(&omega.period.slice(0..r)).apply_int(&v);
        match linear_tail(&pre, &q, &start) {
            Some(t) => tails.push(t),
            None => break,
        }
    }
    if tails.len() == p && tails.iter().all(|t| t.1 == tails[0].1) {
        let method = if tails.iter().any(|t| t.0 == LimitMethod::Linear) {
            LimitMethod::Linear
        } else {
            LimitMethod::Bounded
        };
        let limit = tails.swap_remove(0).1;
        return LimitReport {
            omega: omega.clone(),
            method,
            converged: true,
            support: limit.support(),
            limit,
            steps: 0,
        };
    }

    // Geometric regime: P_n = M_n V with M_n = A(ω₁)…A(ωₙ).
    let mut m = Matrix7::identity();
    let mut prev = col_to_f64(&v);
    let mut calm = 0;
    let mut supports = Vec::new();
    let mut x = v.clone();
    let mut n = 0;
    while n < n_max {
        m = &m * letter_matrix(omega.letter(n));
        n += 1;
        x = m.apply_int(&v);
        let cur = col_to_f64(&x);
        let d: f64 = cur.iter().zip(&prev).map(|(a, b)| (a - b).abs()).sum();
        prev = cur;
        supports.push(int_support(&x));
        calm = if d < tol { calm + 1 } else { 0 };
        if n >= omega.preperiod.len() && calm >= p && supports[supports.len() - p..].iter().all(|s| *s == supports[supports.len() - 1]) {
            break;
        }
    }
    let converged = n < n_max || calm >= p;
    let limit = Vector7::from_big_ints(&x).normalized().unwrap_or_else(Vector7::zero);
    LimitReport {
        omega: omega.clone(),
        method: LimitMethod::Iterated,
        converged,
        support: int_support(&x),
        limit,
        steps: n,
    }
}

pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_N_MAX: usize = 500;

/// Limit support of `ω`, required to be one of [`limit_supports`].
pub fn classify_support(omega: &PeriodicOmega) -> Result<SupportSet, ConvergenceError> {
    let report = limit_vector(omega, DEFAULT_N_MAX, DEFAULT_TOL);
    if !report.converged {
        return Err(ConvergenceError::Inconclusive(DEFAULT_N_MAX));
    }
    if limit_supports().contains(&report.support) {
        Ok(report.support)
    } else {
        Err(ConvergenceError::Classification(report.support))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SupportSurvey {
    pub max_period: usize,
    pub checked: usize,
    pub violations: Vec<(PeriodicOmega, String)>,
}

/// Classifies every pure-periodic ω with period length in `lengths`.
pub fn survey_supports(lengths: std::ops::RangeInclusive<usize>, exec: Exec) -> SupportSurvey {
    let max_period = *lengths.end();
    let omegas: Vec<PeriodicOmega> = lengths
        .flat_map(TernaryWord::all_of_length)
        .map(|w| PeriodicOmega::pure(w).expect("nonempty period"))
        .collect();
    let results = exec.map(&omegas, classify_support);
    let violations = omegas
        .iter()
        .zip(results)
        .filter_map(|(o, r)| r.err().map(|e| (o.clone(), e.to_string())))
        .collect();
    SupportSurvey {
        max_period,
        checked: omegas.len(),
        violations,
    }
}
