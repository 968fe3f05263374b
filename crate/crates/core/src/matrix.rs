//! 7×7 integer matrices, 7-dimensional rational vectors and index supports.
//!
//! Indices in the public API of [`SupportSet`] are 1-based to match the usual
//! row/column labels `1..=7`; array accessors are 0-based.

use std::fmt;
use std::ops::Mul;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::numberfield::rational_to_f64;

pub const DIM: usize = 7;

/// A subset of {1, …, 7}, stored as a bitmask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SupportSet(u8);

impl SupportSet {
    pub const EMPTY: SupportSet = SupportSet(0);

    /// Builds from 1-based indices; panics outside 1..=7.
    pub fn from_indices(indices: &[usize]) -> Self {
        let mut bits = 0u8;
        for &i in indices {
            assert!((1..=DIM).contains(&i), "support index {i} out of range");
            bits |= 1 << (i - 1);
        }
        SupportSet(bits)
    }

    pub fn from_mask(mask: u8) -> Self {
        SupportSet(mask & 0x7f)
    }

    pub fn mask(self) -> u8 {
        self.0
    }

    pub fn contains(self, i: usize) -> bool {
        (1..=DIM).contains(&i) && self.0 & (1 << (i - 1)) != 0
    }

    pub fn is_superset(self, other: SupportSet) -> bool {
        self.0 & other.0 == other.0
    }

    pub fn union(self, other: SupportSet) -> SupportSet {
        SupportSet(self.0 | other.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn indices(self) -> Vec<usize> {
        (1..=DIM).filter(|&i| self.contains(i)).collect()
    }
}

impl fmt::Display for SupportSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.indices().iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

impl Serialize for SupportSet {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let idx = self.indices();
        let mut seq = s.serialize_seq(Some(idx.len()))?;
        for i in idx {
            seq.serialize_element(&i)?;
        }
        seq.end()
    }
}

/// Square 7×7 matrix with arbitrary-precision integer entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix7 {
    rows: [[BigInt; DIM]; DIM],
}

impl Matrix7 {
    pub fn zero() -> Self {
        Matrix7 {
            rows: std::array::from_fn(|_| std::array::from_fn(|_| BigInt::zero())),
        }
    }

    pub fn identity() -> Self {
        let mut m = Matrix7::zero();
        for i in 0..DIM {
            m.rows[i][i] = BigInt::one();
        }
        m
    }

    pub fn from_rows(rows: [[i64; DIM]; DIM]) -> Self {
        Matrix7 {
            rows: rows.map(|r| r.map(BigInt::from)),
        }
    }

    pub fn from_big_rows(rows: [[BigInt; DIM]; DIM]) -> Self {
        Matrix7 { rows }
    }

    /// 0-based entry access.
    pub fn entry(&self, i: usize, j: usize) -> &BigInt {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[[BigInt; DIM]; DIM] {
        &self.rows
    }

    pub fn column(&self, j: usize) -> [BigInt; DIM] {
        std::array::from_fn(|i| self.rows[i][j].clone())
    }

    pub fn is_nonnegative(&self) -> bool {
        self.rows.iter().flatten().all(|x| !x.is_negative())
    }

    /// Integer matrix times integer column.
    pub fn apply_int(&self, v: &[BigInt; DIM]) -> [BigInt; DIM] {
        std::array::from_fn(|i| {
            self.rows[i]
                .iter()
                .zip(v)
                .filter(|(m, _)| !m.is_zero())
                .map(|(m, x)| m * x)
                .sum()
        })
    }

    /// Row vector times matrix.
    pub fn left_apply_int(&self, u: &[BigInt; DIM]) -> [BigInt; DIM] {
        std::array::from_fn(|j| (0..DIM).map(|i| &u[i] * &self.rows[i][j]).sum())
    }

    pub fn apply(&self, v: &Vector7) -> Vector7 {
        Vector7(std::array::from_fn(|i| {
            let mut acc = BigRational::zero();
            for (m, x) in self.rows[i].iter().zip(v.entries()) {
                if !m.is_zero() {
                    acc += x * BigRational::from_integer(m.clone());
                }
            }
            acc
        }))
    }

    pub fn max_entry(&self) -> BigInt {
        self.rows.iter().flatten().cloned().max().unwrap_or_default()
    }
}

impl Mul for &Matrix7 {
    type Output = Matrix7;

    fn mul(self, rhs: &Matrix7) -> Matrix7 {
        let mut out = Matrix7::zero();
        for i in 0..DIM {
            for k in 0..DIM {
                let a = &self.rows[i][k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..DIM {
                    let b = &rhs.rows[k][j];
                    if !b.is_zero() {
                        out.rows[i][j] += a * b;
                    }
                }
            }
        }
        out
    }
}

impl Mul for Matrix7 {
    type Output = Matrix7;
    fn mul(self, rhs: Matrix7) -> Matrix7 {
        &self * &rhs
    }
}

impl fmt::Display for Matrix7 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:>3}")).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

impl Serialize for Matrix7 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|x| x.to_string()).collect())
            .collect();
        rows.serialize(s)
    }
}

/// Column vector of seven exact rationals.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Vector7([BigRational; DIM]);

impl Vector7 {
    pub fn new(entries: [BigRational; DIM]) -> Self {
        Vector7(entries)
    }

    pub fn zero() -> Self {
        Vector7(std::array::from_fn(|_| BigRational::zero()))
    }

    /// From `(numerator, denominator)` pairs.
    pub fn from_fractions(entries: [(i64, i64); DIM]) -> Self {
        Vector7(entries.map(|(n, d)| BigRational::new(n.into(), d.into())))
    }

    pub fn from_ints(entries: [i64; DIM]) -> Self {
        Vector7(entries.map(|n| BigRational::from_integer(n.into())))
    }

    pub fn from_big_ints(entries: &[BigInt; DIM]) -> Self {
        Vector7(std::array::from_fn(|i| BigRational::from_integer(entries[i].clone())))
    }

    /// The unit vector E_i for a 1-based index.
    pub fn basis(i: usize) -> Self {
        let mut v = Vector7::zero();
        v.0[i - 1] = BigRational::one();
        v
    }

    pub fn entries(&self) -> &[BigRational; DIM] {
        &self.0
    }

    pub fn entry(&self, i: usize) -> &BigRational {
        &self.0[i]
    }

    /// Σ|vᵢ|.
    pub fn norm_sum(&self) -> BigRational {
        self.0.iter().map(|x| x.abs()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    /// `v / ‖v‖`, or `None` for the zero vector.
    pub fn normalized(&self) -> Option<Vector7> {
        let n = self.norm_sum();
        if n.is_zero() {
            return None;
        }
        Some(self.scale(&n.recip()))
    }

    pub fn scale(&self, k: &BigRational) -> Vector7 {
        Vector7(std::array::from_fn(|i| &self.0[i] * k))
    }

    pub fn add(&self, other: &Vector7) -> Vector7 {
        Vector7(std::array::from_fn(|i| &self.0[i] + &other.0[i]))
    }

    pub fn sub(&self, other: &Vector7) -> Vector7 {
        Vector7(std::array::from_fn(|i| &self.0[i] - &other.0[i]))
    }

    /// Norm-sum distance ‖self − other‖.
    pub fn distance(&self, other: &Vector7) -> BigRational {
        self.sub(other).norm_sum()
    }

    /// Row vector (given as small integers) times this column.
    pub fn dot_ints(&self, row: &[i64; DIM]) -> BigRational {
        self.0
            .iter()
            .zip(row)
            .filter(|(_, &r)| r != 0)
            .map(|(x, &r)| x * BigRational::from_integer(r.into()))
            .sum()
    }

    pub fn max_entry(&self) -> BigRational {
        self.0.iter().cloned().max().expect("seven entries")
    }

    pub fn min_entry(&self) -> BigRational {
        self.0.iter().cloned().min().expect("seven entries")
    }

    pub fn support(&self) -> SupportSet {
        let mut mask = 0u8;
        for (i, x) in self.0.iter().enumerate() {
            if !x.is_zero() {
                mask |= 1 << i;
            }
        }
        SupportSet(mask)
    }

    pub fn to_f64(&self) -> [f64; DIM] {
        std::array::from_fn(|i| rational_to_f64(&self.0[i]))
    }
}

impl fmt::Display for Vector7 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl Serialize for Vector7 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<String> = self.0.iter().map(|x| x.to_string()).collect();
        v.serialize(s)
    }
}

/// Support of an integer column, 1-based.
pub fn int_support(v: &[BigInt; DIM]) -> SupportSet {
    let mut mask = 0u8;
    for (i, x) in v.iter().enumerate() {
        if !x.is_zero() {
            mask |= 1 << i;
        }
    }
    SupportSet(mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_sets() {
        let s = SupportSet::from_indices(&[1, 3, 5]);
        assert_eq!(s.to_string(), "{1,3,5}");
        assert!(s.contains(3) && !s.contains(2) && !s.contains(8));
        assert!(SupportSet::from_indices(&[1, 2, 3, 5]).is_superset(s));
        assert_eq!(serde_json::to_string(&s).unwrap(), "[1,3,5]");
        assert_eq!(s.len(), 3);
    }

    #[test]
    fn identity_and_products() {
        let id = Matrix7::identity();
        let m = Matrix7::from_rows([
            [1, 2, 0, 0, 0, 0, 0],
            [0, 1, 0, 0, 0, 0, 3],
            [0, 0, 0, 0, 0, 0, 0],
            [0, 0, 0, 1, 0, 0, 0],
            [0, 0, 0, 0, 1, 0, 0],
            [0, 0, 0, 0, 0, 1, 0],
            [5, 0, 0, 0, 0, 0, 1],
        ]);
        assert_eq!(&id * &m, m);
        assert_eq!(&m * &id, m);
        let v = Vector7::from_ints([1, 1, 1, 1, 1, 1, 1]);
        assert_eq!(
            m.apply(&v),
            Vector7::from_ints([3, 4, 0, 1, 1, 1, 6])
        );
        let ones: [BigInt; DIM] = std::array::from_fn(|_| BigInt::one());
        assert_eq!(m.left_apply_int(&ones)[0], BigInt::from(6));
    }

    #[test]
    fn normalization() {
        let v = Vector7::from_fractions([(3, 5), (2, 5), (13, 20), (1, 5), (3, 5), (3, 10), (1, 5)]);
        assert_eq!(v.norm_sum(), BigRational::new(59.into(), 20.into()));
        assert_eq!(v.normalized().unwrap().norm_sum(), BigRational::one());
        assert!(Vector7::zero().normalized().is_none());
    }
}
