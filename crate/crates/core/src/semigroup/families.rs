//! Parametric word families and their closed-form products.
//!
//! Each family is `prefix · unit^(a·n + b)`; its product is a matrix whose
//! entries are affine in `n`. The closed forms are stored in
//! `fixtures/families.json`.

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{product, SemigroupError, TernaryWord};
use crate::matrix::{Matrix7, DIM};

const FIXTURE: &str = include_str!("../../fixtures/families.json");

/// Family label: `1..=12`, or the periodic (100)^(n+2) family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FamilyId {
    Indexed(u8),
    Ba2,
}

impl FamilyId {
    pub fn all() -> Vec<FamilyId> {
        (1..=12).map(FamilyId::Indexed).chain([FamilyId::Ba2]).collect()
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyId::Indexed(i) => write!(f, "{i}"),
            FamilyId::Ba2 => write!(f, "BA2"),
        }
    }
}

impl FromStr for FamilyId {
    type Err = SemigroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().trim_start_matches('w');
        if t.eq_ignore_ascii_case("ba2") {
            return Ok(FamilyId::Ba2);
        }
        match t.parse::<u8>() {
            Ok(i) if (1..=12).contains(&i) => Ok(FamilyId::Indexed(i)),
            _ => Err(SemigroupError::UnknownFamily(s.to_string())),
        }
    }
}

impl Serialize for FamilyId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `constant + slope·n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Affine {
    pub constant: i64,
    pub slope: i64,
}

impl Affine {
    pub fn eval(self, n: u64) -> BigInt {
        BigInt::from(self.constant) + BigInt::from(self.slope) * BigInt::from(n)
    }
}

impl FromStr for Affine {
    type Err = SemigroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SemigroupError::Fixture(format!("bad affine entry {s:?}"));
        let s = s.trim();
        let (lin, cst) = match s.split_once('+') {
            Some((l, c)) => (Some(l), c),
            None if s.contains('n') => (Some(s), "0"),
            None => (None, s),
        };
        let constant = cst.trim().parse::<i64>().map_err(|_| bad())?;
        let slope = match lin {
            None => 0,
            Some(l) => {
                let coef = l.trim().strip_suffix('n').ok_or_else(bad)?;
                if coef.is_empty() {
                    1
                } else {
                    coef.parse::<i64>().map_err(|_| bad())?
                }
            }
        };
        Ok(Affine { constant, slope })
    }
}

#[derive(Deserialize)]
struct RawFixture {
    families: Vec<RawFamily>,
}

#[derive(Deserialize)]
struct RawFamily {
    id: String,
    product: String,
    prefix: String,
    unit: String,
    repeat: [u64; 2],
    matrix: Vec<Vec<String>>,
}

#[derive(Clone, Debug)]
pub struct Family {
    pub id: FamilyId,
    /// Product written in letter-matrix notation, e.g. `A^2C^{n+2}`.
    pub product_name: String,
    pub prefix: TernaryWord,
    pub unit: TernaryWord,
    pub repeat_slope: u64,
    pub repeat_offset: u64,
    pub closed_form: [[Affine; DIM]; DIM],
}

impl Family {
    pub fn word(&self, n: u64) -> TernaryWord {
        let reps = (self.repeat_slope * n + self.repeat_offset) as usize;
        self.prefix.concat(&self.unit.repeat(reps))
    }

    pub fn matrix(&self, n: u64) -> Matrix7 {
        Matrix7::from_big_rows(std::array::from_fn(|i| {
            std::array::from_fn(|j| self.closed_form[i][j].eval(n))
        }))
    }
}

fn parse_fixture(text: &str) -> Result<Vec<Family>, SemigroupError> {
    let raw: RawFixture =
        serde_json::from_str(text).map_err(|e| SemigroupError::Fixture(e.to_string()))?;
    raw.families
        .into_iter()
        .map(|f| {
            if f.matrix.len() != DIM || f.matrix.iter().any(|r| r.len() != DIM) {
                return Err(SemigroupError::Fixture(format!("family {} is not 7x7", f.id)));
            }
            let mut closed_form = [[Affine { constant: 0, slope: 0 }; DIM]; DIM];
            for (i, row) in f.matrix.iter().enumerate() {
                for (j, cell) in row.iter().enumerate() {
                    closed_form[i][j] = cell.parse()?;
                }
            }
            Ok(Family {
                id: f.id.parse()?,
                product_name: f.product,
                prefix: f.prefix.parse()?,
                unit: f.unit.parse()?,
                repeat_slope: f.repeat[0],
                repeat_offset: f.repeat[1],
                closed_form,
            })
        })
        .collect()
}

pub fn families() -> &'static [Family] {
    static CELL: OnceLock<Vec<Family>> = OnceLock::new();
    CELL.get_or_init(|| parse_fixture(FIXTURE).expect("bundled family fixture is valid"))
}

pub fn family(id: FamilyId) -> &'static Family {
    families()
        .iter()
        .find(|f| f.id == id)
        .expect("every family id has a fixture entry")
}

pub fn family_word(id: FamilyId, n: u64) -> TernaryWord {
    family(id).word(n)
}

pub fn family_matrix(id: FamilyId, n: u64) -> Matrix7 {
    family(id).matrix(n)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyMismatch {
    pub n: u64,
    /// 1-based.
    pub row: usize,
    /// 1-based.
    pub col: usize,
    pub expected: String,
    pub actual: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilyReport {
    pub family: FamilyId,
    pub n_max: u64,
    pub mismatch: Option<FamilyMismatch>,
}

impl FamilyReport {
    pub fn passed(&self) -> bool {
        self.mismatch.is_none()
    }
}

/// Compares the word product against the closed form for `n = 0..=n_max`.
pub fn verify_family(id: FamilyId, n_max: u64) -> FamilyReport {
    let fam = family(id);
    let mut mismatch = None;
    'outer: for n in 0..=n_max {
        let actual = product(&fam.word(n));
        let expected = fam.matrix(n);
        for i in 0..DIM {
            for j in 0..DIM {
                if actual.entry(i, j) != expected.entry(i, j) {
                    mismatch = Some(FamilyMismatch {
                        n,
                        row: i + 1,
                        col: j + 1,
                        expected: expected.entry(i, j).to_string(),
                        actual: actual.entry(i, j).to_string(),
                    });
                    break 'outer;
                }
            }
        }
    }
    FamilyReport {
        family: id,
        n_max,
        mismatch,
    }
}

/// Word of the form `m₀ w_{i₁}(n₁) m₁ … w_{i_k}(n_k) m_k`.
#[derive(Clone, Debug)]
pub struct Template {
    pub glue: Vec<TernaryWord>,
    pub families: Vec<FamilyId>,
}

impl Template {
    pub fn new(glue: Vec<TernaryWord>, families: Vec<FamilyId>) -> Result<Self, SemigroupError> {
        if glue.len() != families.len() + 1 {
            return Err(SemigroupError::Template(format!(
                "{} glue words for {} families",
                glue.len(),
                families.len()
            )));
        }
        Ok(Template { glue, families })
    }

    /// Template with empty glue around the given families.
    pub fn bare(families: Vec<FamilyId>) -> Self {
        Template {
            glue: vec![TernaryWord::empty(); families.len() + 1],
            families,
        }
    }

    pub fn word(&self, ns: &[u64]) -> TernaryWord {
        let mut w = self.glue[0].clone();
        for (k, (&id, &n)) in self.families.iter().zip(ns).enumerate() {
            w = w.concat(&family_word(id, n)).concat(&self.glue[k + 1]);
        }
        w
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EntryFit {
    /// 1-based.
    pub row: usize,
    /// 1-based.
    pub col: usize,
    /// Coefficient of `∏_{j∈S} n_j`, indexed by the bitmask of `S`.
    pub coefficients: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MultiaffineReport {
    pub variables: usize,
    pub points_checked: usize,
    pub fits: Vec<EntryFit>,
    /// First disagreement as (sample point, row, col, predicted, actual).
    pub mismatch: Option<(Vec<u64>, usize, usize, String, String)>,
    pub negative_coefficients: bool,
}

impl MultiaffineReport {
    pub fn passed(&self) -> bool {
        self.mismatch.is_none()
    }

    pub fn fit(&self, row: usize, col: usize) -> &EntryFit {
        &self.fits[(row - 1) * DIM + (col - 1)]
    }
}

fn corner(mask: usize, k: usize) -> Vec<u64> {
    (0..k).map(|j| ((mask >> j) & 1) as u64).collect()
}

fn odometer(k: usize, lo: u64, hi: u64) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|p| {
                (lo..=hi).map(move |v| {
                    let mut q = p.clone();
                    q.push(v);
                    q
                })
            })
            .collect();
    }
    out
}

/// Fits every entry as a polynomial of degree ≤ 1 in each parameter from the
/// corners of `{0,1}^k`, then checks the fit on `{check_lo..=check_hi}^k`.
pub fn verify_multiaffine(template: &Template, check_lo: u64, check_hi: u64) -> MultiaffineReport {
    let k = template.families.len();
    let corners: Vec<Matrix7> = (0..1usize << k)
        .map(|m| product(&template.word(&corner(m, k))))
        .collect();

    // Möbius inversion over the subset lattice.
    let mut coeffs: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); 1 << k]; DIM * DIM];
    for (e, slot) in coeffs.iter_mut().enumerate() {
        let (i, j) = (e / DIM, e % DIM);
        for (s, out) in slot.iter_mut().enumerate() {
            let mut acc = BigInt::zero();
            let mut t = s;
            loop {
                let sign = (s.count_ones() - t.count_ones()) % 2 == 0;
                let v = corners[t].entry(i, j);
                if sign {
                    acc += v;
                } else {
                    acc -= v;
                }
                if t == 0 {
                    break;
                }
                t = (t - 1) & s;
            }
            *out = acc;
        }
    }

    let eval = |e: usize, point: &[u64]| -> BigInt {
        coeffs[e]
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(s, c)| {
                let mono: BigInt = (0..k)
                    .filter(|j| s >> j & 1 == 1)
                    .map(|j| BigInt::from(point[j]))
                    .product();
                c * mono
            })
            .sum()
    };

    let points = odometer(k, check_lo, check_hi);
    let mut mismatch = None;
    'outer: for p in &points {
        let actual = product(&template.word(p));
        for e in 0..DIM * DIM {
            let predicted = eval(e, p);
            let got = actual.entry(e / DIM, e % DIM);
            if &predicted != got {
                mismatch = Some((p.clone(), e / DIM + 1, e % DIM + 1, predicted.to_string(), got.to_string()));
                break 'outer;
            }
        }
    }

    let negative_coefficients = coeffs.iter().flatten().any(|c| c.is_negative());
    let fits = coeffs
        .iter()
        .enumerate()
        .map(|(e, c)| EntryFit {
            row: e / DIM + 1,
            col: e % DIM + 1,
            coefficients: c.iter().map(|x| x.to_string()).collect(),
        })
        .collect();
    MultiaffineReport {
        variables: k,
        points_checked: points.len(),
        fits,
        mismatch,
        negative_coefficients,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn affine_parsing() {
        let a: Affine = "2n+5".parse().unwrap();
        assert_eq!((a.constant, a.slope), (5, 2));
        let b: Affine = "n".parse().unwrap();
        assert_eq!((b.constant, b.slope), (0, 1));
        let c: Affine = "7".parse().unwrap();
        assert_eq!((c.constant, c.slope), (7, 0));
        assert!("x+1".parse::<Affine>().is_err());
    }

    #[test]
    fn fixture_is_complete() {
        assert_eq!(families().len(), 13);
        for id in FamilyId::all() {
            assert_eq!(family(id).id, id);
        }
    }

    #[test]
    fn family_words() {
        assert_eq!(family_word(FamilyId::Indexed(1), 0).to_string(), "010000");
        assert_eq!(family_word(FamilyId::Indexed(5), 1).to_string(), "00222");
        assert_eq!(family_word(FamilyId::Ba2, 0).to_string(), "100100");
        assert_eq!(family_word(FamilyId::Indexed(12), 0).to_string(), "122");
    }

    #[test]
    fn closed_form_spot_checks() {
        let m = family_matrix(FamilyId::Indexed(5), 1);
        assert_eq!(m.entry(1, 4), &BigInt::from(4));
        let ba = family_matrix(FamilyId::Ba2, 0);
        let col: Vec<i64> = (0..DIM).map(|i| i64::try_from(ba.entry(i, 0)).unwrap()).collect();
        assert_eq!(col, vec![1, 1, 2, 1, 1, 0, 0]);
    }

    #[test]
    fn every_family_matches_for_small_n() {
        for id in FamilyId::all() {
            let r = verify_family(id, 6);
            assert!(r.passed(), "{id}: {:?}", r.mismatch);
        }
    }

    #[test]
    fn ba2_family_is_constant() {
        for n in 0..10 {
            assert_eq!(product(&family_word(FamilyId::Ba2, n)), family_matrix(FamilyId::Ba2, 0));
        }
    }

    #[test]
    fn family_ids() {
        assert_eq!("w7".parse::<FamilyId>().unwrap(), FamilyId::Indexed(7));
        assert_eq!("BA2".parse::<FamilyId>().unwrap(), FamilyId::Ba2);
        assert!("13".parse::<FamilyId>().is_err());
    }

    #[test]
    fn single_family_fits() {
        let r = verify_multiaffine(&Template::bare(vec![FamilyId::Indexed(5)]), 2, 5);
        assert!(r.passed());
        assert_eq!(r.fit(2, 5).coefficients, vec!["3", "1"]);
        let r1 = verify_multiaffine(&Template::bare(vec![FamilyId::Indexed(1)]), 2, 5);
        assert_eq!(r1.fit(3, 1).coefficients, vec!["2", "1"]);
    }

    #[test]
    fn composite_fit() {
        let t = Template::bare(vec![FamilyId::Indexed(4), FamilyId::Indexed(12)]);
        let r = verify_multiaffine(&t, 2, 5);
        assert_eq!(r.points_checked, 16);
        assert!(r.passed(), "{:?}", r.mismatch);
        assert!(!r.negative_coefficients);
    }

    #[test]
    fn template_arity() {
        assert!(Template::new(vec![], vec![FamilyId::Indexed(1)]).is_err());
    }
}
