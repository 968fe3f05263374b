//! The letter matrices A = A(0), B = A(1), C = A(2), their products over
//! ternary words, and column-support analytics.

pub mod code;
pub mod families;
pub mod states;

use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::matrix::{int_support, Matrix7, DIM};
pub use crate::matrix::SupportSet;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SemigroupError {
    #[error("invalid ternary letter {0:?}")]
    InvalidLetter(char),
    #[error("unknown word family {0:?}")]
    UnknownFamily(String),
    #[error("malformed fixture: {0}")]
    Fixture(String),
    #[error("bad template: {0}")]
    Template(String),
}

/// 0/1 rows of the three letter matrices.
pub const A_ROWS: [[i64; DIM]; DIM] = [
    [1, 0, 0, 0, 0, 0, 0],
    [0, 0, 1, 0, 0, 0, 0],
    [0, 0, 0, 1, 1, 0, 0],
    [0, 0, 0, 0, 0, 0, 0],
    [1, 0, 0, 0, 0, 0, 1],
    [0, 0, 0, 0, 1, 0, 0],
    [0, 1, 0, 0, 0, 0, 0],
];

pub const B_ROWS: [[i64; DIM]; DIM] = [
    [0, 0, 1, 1, 0, 0, 0],
    [0, 0, 0, 0, 0, 1, 0],
    [0, 0, 0, 1, 1, 0, 0],
    [1, 0, 0, 0, 0, 0, 0],
    [0, 0, 1, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0],
];

pub const C_ROWS: [[i64; DIM]; DIM] = [
    [1, 0, 0, 0, 1, 0, 1],
    [0, 0, 0, 0, 0, 0, 0],
    [1, 0, 0, 0, 0, 0, 1],
    [0, 0, 0, 1, 1, 0, 0],
    [0, 0, 0, 0, 1, 0, 0],
    [0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0],
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    Zero,
    One,
    Two,
}

impl Letter {
    pub const ALL: [Letter; 3] = [Letter::Zero, Letter::One, Letter::Two];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Letter> {
        Letter::ALL.get(i).copied()
    }

    pub fn to_char(self) -> char {
        (b'0' + self as u8) as char
    }

    pub fn from_char(c: char) -> Result<Letter, SemigroupError> {
        match c {
            '0' => Ok(Letter::Zero),
            '1' => Ok(Letter::One),
            '2' => Ok(Letter::Two),
            _ => Err(SemigroupError::InvalidLetter(c)),
        }
    }

    pub fn rows(self) -> &'static [[i64; DIM]; DIM] {
        match self {
            Letter::Zero => &A_ROWS,
            Letter::One => &B_ROWS,
            Letter::Two => &C_ROWS,
        }
    }

    /// Conventional matrix name: A, B or C.
    pub fn matrix_name(self) -> char {
        (b'A' + self as u8) as char
    }
}

impl Serialize for Letter {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u8(*self as u8)
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TernaryWord(Vec<Letter>);

impl TernaryWord {
    pub fn new(letters: Vec<Letter>) -> Self {
        TernaryWord(letters)
    }

    pub fn empty() -> Self {
        TernaryWord(Vec::new())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l);
    }

    pub fn concat(&self, other: &TernaryWord) -> TernaryWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        TernaryWord(v)
    }

    pub fn repeat(&self, times: usize) -> TernaryWord {
        TernaryWord(self.0.repeat(times))
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> TernaryWord {
        TernaryWord(self.0[range].to_vec())
    }

    /// Every word of length `n`, in lexicographic order.
    pub fn all_of_length(n: usize) -> Vec<TernaryWord> {
        let total = 3usize.pow(n as u32);
        (0..total)
            .map(|mut code| {
                let mut v = vec![Letter::Zero; n];
                for slot in v.iter_mut().rev() {
                    *slot = Letter::ALL[code % 3];
                    code /= 3;
                }
                TernaryWord(v)
            })
            .collect()
    }
}

impl From<Vec<Letter>> for TernaryWord {
    fn from(v: Vec<Letter>) -> Self {
        TernaryWord(v)
    }
}

impl fmt::Display for TernaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.0 {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for TernaryWord {
    type Err = SemigroupError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(Letter::from_char)
            .collect::<Result<Vec<_>, _>>()
            .map(TernaryWord)
    }
}

impl Serialize for TernaryWord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

pub fn letter_matrix(l: Letter) -> &'static Matrix7 {
    static CELLS: OnceLock<[Matrix7; 3]> = OnceLock::new();
    let all = CELLS.get_or_init(|| {
        [
            Matrix7::from_rows(A_ROWS),
            Matrix7::from_rows(B_ROWS),
            Matrix7::from_rows(C_ROWS),
        ]
    });
    &all[l.index()]
}

/// A(ξ₁)…A(ξₙ), multiplied in word order.
pub fn product(w: &TernaryWord) -> Matrix7 {
    w.letters()
        .iter()
        .fold(Matrix7::identity(), |acc, &l| &acc * letter_matrix(l))
}

pub fn column_supports(m: &Matrix7) -> [SupportSet; DIM] {
    std::array::from_fn(|j| int_support(&m.column(j)))
}

/// Nonempty column supports are all equal, or take exactly two values
/// c ⊇ c′ ∪ {1,3,5}.
pub fn has_property_p(m: &Matrix7) -> bool {
    let mut values: Vec<SupportSet> = column_supports(m)
        .into_iter()
        .filter(|s| !s.is_empty())
        .collect();
    values.sort();
    values.dedup();
    let core = SupportSet::from_indices(&[1, 3, 5]);
    match values.as_slice() {
        [] | [_] => true,
        [x, y] => x.is_superset(y.union(core)) || y.is_superset(x.union(core)),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> TernaryWord {
        s.parse().unwrap()
    }

    fn sets(list: &[&[usize]]) -> Vec<SupportSet> {
        list.iter().map(|s| SupportSet::from_indices(s)).collect()
    }

    #[test]
    fn letter_rows() {
        assert_eq!(A_ROWS[4], [1, 0, 0, 0, 0, 0, 1]);
        assert_eq!(B_ROWS[3], [1, 0, 0, 0, 0, 0, 0]);
        assert_eq!(C_ROWS[0], [1, 0, 0, 0, 1, 0, 1]);
    }

    #[test]
    fn products() {
        assert_eq!(product(&TernaryWord::empty()), Matrix7::identity());
        let p = product(&w("100"));
        assert_eq!(product(&w("100100")), &p * &p);
        assert_eq!(product(&w("2")), *letter_matrix(Letter::Two));
    }

    #[test]
    fn supports_of_a() {
        let got = column_supports(letter_matrix(Letter::Zero));
        let want = sets(&[&[1, 5], &[7], &[2], &[3], &[3, 6], &[], &[5]]);
        assert_eq!(got.to_vec(), want);
    }

    #[test]
    fn supports_of_aba2() {
        let got = column_supports(&product(&w("0100")));
        assert_eq!(got[0], SupportSet::from_indices(&[1, 2, 3, 5, 6, 7]));
        assert_eq!(got[1], SupportSet::from_indices(&[2]));
        assert_eq!(got[6], SupportSet::from_indices(&[1, 3, 5, 6, 7]));
        assert!(got[2..6].iter().all(|s| s.is_empty()));
    }

    #[test]
    fn property_p_examples() {
        assert!(!has_property_p(&Matrix7::identity()));
        assert!(!has_property_p(&product(&w("0100"))));
        assert!(has_property_p(&product(&w("2000").repeat(6))));
    }

    #[test]
    fn word_parsing() {
        assert_eq!(w("0120").to_string(), "0120");
        assert!("013".parse::<TernaryWord>().is_err());
        assert_eq!(TernaryWord::all_of_length(3).len(), 27);
        assert_eq!(TernaryWord::all_of_length(2)[5].to_string(), "12");
    }
}
