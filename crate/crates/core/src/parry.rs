//! β-expansions: Parry digits, the admissibility automaton, the block code
//! {0, 10, 1100} and β-adic intervals with exact endpoints.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_traits::ToPrimitive;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::numberfield::FieldElement;
use crate::par::Exec;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParryError {
    #[error("{0} is outside [0, 1)")]
    OutOfRange(String),
    #[error("word {0} is not admissible")]
    NotAdmissible(String),
    #[error("word ends inside a block, residue {0}")]
    IncompleteBlock(Residue),
    #[error("invalid binary digit {0:?}")]
    InvalidDigit(char),
    #[error("period must be non-empty")]
    EmptyPeriod,
}

/// A digit string over {0, 1}. Only the alphabet is checked; admissibility
/// is a separate predicate.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BinaryWord(Vec<u8>);

impl BinaryWord {
    pub fn new(digits: Vec<u8>) -> Result<Self, ParryError> {
        if let Some(&d) = digits.iter().find(|&&d| d > 1) {
            return Err(ParryError::InvalidDigit(char::from(b'0' + d)));
        }
        Ok(BinaryWord(digits))
    }

    pub fn empty() -> Self {
        BinaryWord(Vec::new())
    }

    pub fn digits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, d: u8) {
        assert!(d <= 1, "binary digit");
        self.0.push(d);
    }

    pub fn concat(&self, other: &BinaryWord) -> BinaryWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        BinaryWord(v)
    }

    pub fn child(&self, d: u8) -> BinaryWord {
        let mut w = self.clone();
        w.push(d);
        w
    }

    /// Drops the first digit (the shift map).
    pub fn shifted(&self) -> BinaryWord {
        BinaryWord(self.0.iter().skip(1).copied().collect())
    }
}

impl fmt::Display for BinaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.0 {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl FromStr for BinaryWord {
    type Err = ParryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(ParryError::InvalidDigit(other)),
            })
            .collect::<Result<Vec<u8>, _>>()
            .map(BinaryWord)
    }
}

impl Serialize for BinaryWord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// States of the admissibility automaton. `Q2` is "just read 11", `Q3` is
/// "just read 110"; both force a 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum State {
    Q0,
    Q1,
    Q2,
    Q3,
}

/// Recognises prefixes of admissible sequences: every 11 is followed by 00.
#[derive(Clone, Copy, Debug, Default)]
pub struct AdmissibilityAutomaton;

impl AdmissibilityAutomaton {
    pub const STATES: [State; 4] = [State::Q0, State::Q1, State::Q2, State::Q3];

    pub fn next(state: State, digit: u8) -> Option<State> {
        match (state, digit) {
            (State::Q0, 0) | (State::Q1, 0) | (State::Q3, 0) => Some(State::Q0),
            (State::Q0, 1) => Some(State::Q1),
            (State::Q1, 1) => Some(State::Q2),
            (State::Q2, 0) => Some(State::Q3),
            _ => None,
        }
    }

    pub fn run(start: State, digits: &[u8]) -> Option<State> {
        digits
            .iter()
            .try_fold(start, |s, &d| AdmissibilityAutomaton::next(s, d))
    }

    pub fn accepts(digits: &[u8]) -> bool {
        AdmissibilityAutomaton::run(State::Q0, digits).is_some()
    }

    /// `t[i][j]` counts transitions from state j to state i.
    pub fn transfer_matrix() -> [[u64; 4]; 4] {
        let mut t = [[0u64; 4]; 4];
        for (j, &s) in Self::STATES.iter().enumerate() {
            for d in 0..2 {
                if let Some(next) = Self::next(s, d) {
                    t[next as usize][j] += 1;
                }
            }
        }
        t
    }
}

/// Number of admissible words of length `n`.
pub fn admissible_count(n: usize) -> u128 {
    let t = AdmissibilityAutomaton::transfer_matrix();
    let mut v = [1u128, 0, 0, 0];
    for _ in 0..n {
        let mut next = [0u128; 4];
        for (i, row) in t.iter().enumerate() {
            next[i] = row.iter().zip(v.iter()).map(|(&a, &b)| a as u128 * b).sum();
        }
        v = next;
    }
    v.iter().sum()
}

pub fn is_admissible_word(w: &BinaryWord) -> bool {
    AdmissibilityAutomaton::accepts(w.digits())
}

/// Admissibility of the eventually periodic sequence `preperiod · period^∞`:
/// automaton acceptance plus the exclusion of a (1100)^∞ tail.
pub fn is_admissible_tail(preperiod: &BinaryWord, period: &BinaryWord) -> Result<bool, ParryError> {
    if period.is_empty() {
        return Err(ParryError::EmptyPeriod);
    }
    let Some(mut state) = AdmissibilityAutomaton::run(State::Q0, preperiod.digits()) else {
        return Ok(false);
    };
    // The state at the start of each period repetition eventually cycles.
    let mut seen = Vec::new();
    while !seen.contains(&state) {
        seen.push(state);
        match AdmissibilityAutomaton::run(state, period.digits()) {
            Some(s) => state = s,
            None => return Ok(false),
        }
    }
    Ok(!is_eventually_1100(period.digits()))
}

/// Whether `p^∞` has a tail equal to (1100)^∞, i.e. `p^∞` is 4-periodic with
/// a rotation of 1100 as its block.
fn is_eventually_1100(p: &[u8]) -> bool {
    let len = p.len() + 8;
    let word: Vec<u8> = p.iter().copied().cycle().take(len).collect();
    let four_periodic = (0..len - 4).all(|i| word[i] == word[i + 4]);
    let block = &word[..4];
    four_periodic && (0..4).any(|r| (0..4).all(|i| block[(i + r) % 4] == [1, 1, 0, 0][i]))
}

/// Parry digits ε₁…εₙ of `x ∈ [0, 1)` via r₀ = x, εₖ = ⌊β rₖ₋₁⌋,
/// rₖ = β rₖ₋₁ − εₖ.
pub fn expand(x: &FieldElement, n: usize) -> Result<BinaryWord, ParryError> {
    let one = FieldElement::one();
    if x.sign() == Ordering::Less || (&one - x).sign() != Ordering::Greater {
        return Err(ParryError::OutOfRange(x.to_string()));
    }
    let beta = FieldElement::beta();
    let mut r = x.clone();
    let mut digits = Vec::with_capacity(n);
    for _ in 0..n {
        let scaled = &beta * &r;
        let eps = scaled.floor();
        let d = eps.to_u8().expect("Parry digit of a point in [0,1) is 0 or 1");
        r = &scaled - &FieldElement::from_integer(d as i64);
        digits.push(d);
    }
    BinaryWord::new(digits)
}

/// An element of the prefix code {0, 10, 1100}.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Block {
    Zero,
    Ten,
    ElevenHundred,
}

impl Block {
    pub const ALL: [Block; 3] = [Block::Zero, Block::Ten, Block::ElevenHundred];

    pub fn digits(self) -> &'static [u8] {
        match self {
            Block::Zero => &[0],
            Block::Ten => &[1, 0],
            Block::ElevenHundred => &[1, 1, 0, 0],
        }
    }

    pub fn len(self) -> usize {
        self.digits().len()
    }

    pub fn is_empty(self) -> bool {
        false
    }

    /// Matrix letter: 0 ↦ A, 10 ↦ B, 1100 ↦ C.
    pub fn letter_index(self) -> u8 {
        self as u8
    }

    pub fn from_letter_index(i: u8) -> Option<Block> {
        Block::ALL.get(i as usize).copied()
    }
}

impl fmt::Display for Block {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in self.digits() {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

impl Serialize for Block {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A sequence of blocks; its concatenation is always an admissible word.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
pub struct BlockWord(Vec<Block>);

impl BlockWord {
    pub fn new(blocks: Vec<Block>) -> Self {
        BlockWord(blocks)
    }

    pub fn blocks(&self) -> &[Block] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn binary_len(&self) -> usize {
        self.0.iter().map(|b| b.len()).sum()
    }

    pub fn to_binary(&self) -> BinaryWord {
        BinaryWord(self.0.iter().flat_map(|b| b.digits().iter().copied()).collect())
    }

    pub fn letter_indices(&self) -> Vec<u8> {
        self.0.iter().map(|b| b.letter_index()).collect()
    }
}

impl fmt::Display for BlockWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|b| b.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// What is left over when an admissible word stops inside a block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Residue {
    /// "1", a prefix of both 10 and 1100.
    One,
    /// "11".
    OneOne,
    /// "110".
    OneOneZero,
}

impl Residue {
    pub fn digits(self) -> &'static [u8] {
        match self {
            Residue::One => &[1],
            Residue::OneOne => &[1, 1],
            Residue::OneOneZero => &[1, 1, 0],
        }
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in self.digits() {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// Greedy left-to-right parse into blocks, returning the trailing residue if
/// the word stops mid-block.
pub fn split_blocks(w: &BinaryWord) -> Result<(BlockWord, Option<Residue>), ParryError> {
    let d = w.digits();
    let mut blocks = Vec::new();
    let mut i = 0;
    while i < d.len() {
        let rest = &d[i..];
        let block = match rest {
            [0, ..] => Block::Zero,
            [1, 0, ..] => Block::Ten,
            [1, 1, 0, 0, ..] => Block::ElevenHundred,
            [1] => return Ok((BlockWord(blocks), Some(Residue::One))),
            [1, 1] => return Ok((BlockWord(blocks), Some(Residue::OneOne))),
            [1, 1, 0] => return Ok((BlockWord(blocks), Some(Residue::OneOneZero))),
            _ => return Err(ParryError::NotAdmissible(w.to_string())),
        };
        blocks.push(block);
        i += block.len();
    }
    Ok((BlockWord(blocks), None))
}

/// Unique greedy decomposition of a full block concatenation.
pub fn decompose_blocks(w: &BinaryWord) -> Result<BlockWord, ParryError> {
    match split_blocks(w)? {
        (blocks, None) => Ok(blocks),
        (_, Some(res)) => Err(ParryError::IncompleteBlock(res)),
    }
}

/// All admissible words of length `n` in lexicographic order.
pub fn enumerate_admissible(n: usize) -> Vec<BinaryWord> {
    enumerate_admissible_with(n, Exec::default())
}

/// Sharded by the first few digits; shards are merged in prefix order, so
/// the output is lexicographic regardless of the policy.
pub fn enumerate_admissible_with(n: usize, exec: Exec) -> Vec<BinaryWord> {
    let split = n.min(6);
    let mut prefixes = Vec::new();
    extend_words(&mut Vec::new(), State::Q0, split, &mut |w, s| {
        prefixes.push((w.to_vec(), s))
    });
    let shards = exec.map(&prefixes, |(prefix, state)| {
        let mut out = Vec::new();
        let mut buf = prefix.clone();
        extend_words(&mut buf, *state, n - split, &mut |w, _| out.push(BinaryWord(w.to_vec())));
        out
    });
    shards.into_iter().flatten().collect()
}

fn extend_words(buf: &mut Vec<u8>, state: State, remaining: usize, emit: &mut dyn FnMut(&[u8], State)) {
    if remaining == 0 {
        emit(buf, state);
        return;
    }
    for d in 0..2 {
        if let Some(next) = AdmissibilityAutomaton::next(state, d) {
            buf.push(d);
            extend_words(buf, next, remaining - 1, emit);
            buf.pop();
        }
    }
}

/// The β-adic interval of an admissible word: `[s_n, s_n + ℓ)` with ℓ = β⁻ⁿ
/// for words that end on a block boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BetaInterval {
    pub word: BinaryWord,
    pub left: FieldElement,
    pub length: FieldElement,
}

impl BetaInterval {
    pub fn right(&self) -> FieldElement {
        &self.left + &self.length
    }

    pub fn midpoint(&self) -> FieldElement {
        let half = num_rational::BigRational::new(1.into(), 2.into());
        &self.left + &self.length.scale(&half)
    }

    pub fn contains(&self, x: &FieldElement) -> bool {
        (x - &self.left).sign() != Ordering::Less && (&self.right() - x).sign() == Ordering::Greater
    }
}

/// Length of the set of admissible tails that may follow a word ending in
/// `state`, as a fraction of β⁻ⁿ.
pub fn follower_length(state: State) -> FieldElement {
    match state {
        State::Q0 => FieldElement::one(),
        State::Q1 => &FieldElement::beta_inv() + &FieldElement::beta_pow_neg(3),
        State::Q2 => FieldElement::beta_pow_neg(2),
        State::Q3 => FieldElement::beta_inv(),
    }
}

/// The set of x ∈ [0, 1) whose greedy expansion starts with `w`. Words that
/// end inside a block (in 1, 11 or 110) have a shortened cylinder.
pub fn interval_of(w: &BinaryWord) -> Result<BetaInterval, ParryError> {
    let state = AdmissibilityAutomaton::run(State::Q0, w.digits())
        .ok_or_else(|| ParryError::NotAdmissible(w.to_string()))?;
    let inv = FieldElement::beta_inv();
    let mut power = FieldElement::one();
    let mut left = FieldElement::zero();
    for &d in w.digits() {
        power = &power * &inv;
        if d == 1 {
            left = &left + &power;
        }
    }
    Ok(BetaInterval {
        word: w.clone(),
        left,
        length: &power * &follower_length(state),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bw(s: &str) -> BinaryWord {
        s.parse().unwrap()
    }

    #[test]
    fn expansions() {
        assert_eq!(expand(&FieldElement::zero(), 5).unwrap(), bw("00000"));
        assert_eq!(expand(&FieldElement::beta_inv(), 4).unwrap(), bw("1000"));
        let bm1 = FieldElement::from_ints(-1, 1, 0);
        assert_eq!(expand(&bm1, 5).unwrap(), bw("10100"));
        assert!(matches!(
            expand(&FieldElement::one(), 3),
            Err(ParryError::OutOfRange(_))
        ));
        assert!(expand(&FieldElement::from_integer(-1), 3).is_err());
    }

    #[test]
    fn admissibility() {
        assert!(is_admissible_word(&bw("1100")));
        assert!(!is_admissible_word(&bw("111")));
        assert!(!is_admissible_word(&bw("110110")));
        assert!(is_admissible_word(&bw("11")));
        assert!(is_admissible_word(&bw("110")));
        assert!(is_admissible_word(&BinaryWord::empty()));
    }

    #[test]
    fn tails() {
        let e = BinaryWord::empty();
        assert!(!is_admissible_tail(&e, &bw("1100")).unwrap());
        assert!(!is_admissible_tail(&bw("10"), &bw("0011")).unwrap());
        assert!(is_admissible_tail(&bw("10"), &bw("0")).unwrap());
        assert!(is_admissible_tail(&e, &bw("10")).unwrap());
        assert!(is_admissible_tail(&e, &bw("11000")).unwrap());
        assert!(!is_admissible_tail(&e, &bw("1")).unwrap());
        assert!(!is_admissible_tail(&e, &bw("110")).unwrap());
        assert_eq!(is_admissible_tail(&e, &e), Err(ParryError::EmptyPeriod));
    }

    #[test]
    fn block_parsing() {
        assert_eq!(
            decompose_blocks(&bw("1100")).unwrap().blocks(),
            &[Block::ElevenHundred]
        );
        assert_eq!(
            decompose_blocks(&bw("0101100")).unwrap().blocks(),
            &[Block::Zero, Block::Ten, Block::ElevenHundred]
        );
        assert_eq!(
            decompose_blocks(&bw("11")),
            Err(ParryError::IncompleteBlock(Residue::OneOne))
        );
        assert_eq!(
            decompose_blocks(&bw("0110")),
            Err(ParryError::IncompleteBlock(Residue::OneOneZero))
        );
        assert_eq!(
            split_blocks(&bw("101")).unwrap(),
            (BlockWord::new(vec![Block::Ten]), Some(Residue::One))
        );
        assert!(matches!(split_blocks(&bw("1101")), Err(ParryError::NotAdmissible(_))));
    }

    #[test]
    fn enumeration_counts() {
        let two: Vec<String> = enumerate_admissible(2).iter().map(|w| w.to_string()).collect();
        assert_eq!(two, ["00", "01", "10", "11"]);
        assert_eq!(enumerate_admissible(3).len(), 7);
        assert_eq!(enumerate_admissible(4).len(), 12);
        for n in 1..=16 {
            assert_eq!(enumerate_admissible(n).len() as u128, admissible_count(n));
        }
        let brute = |n: usize| {
            (0u32..1 << n)
                .map(|m| (0..n).map(|i| ((m >> (n - 1 - i)) & 1) as u8).collect::<Vec<_>>())
                .filter(|d| {
                    let s: String = d.iter().map(|x| x.to_string()).collect();
                    !s.contains("111") && !s.contains("1101")
                })
                .count()
        };
        assert_eq!(brute(4), 12);
        assert_eq!(brute(10) as u128, admissible_count(10));
    }

    #[test]
    fn sequential_and_parallel_enumeration_agree() {
        assert_eq!(
            enumerate_admissible_with(13, Exec::Sequential),
            enumerate_admissible_with(13, Exec::Parallel)
        );
    }

    #[test]
    fn intervals() {
        let i0 = interval_of(&bw("0")).unwrap();
        assert!(i0.left.is_zero());
        assert_eq!(i0.length, FieldElement::beta_inv());
        let i10 = interval_of(&bw("10")).unwrap();
        assert_eq!(i10.left, FieldElement::beta_inv());
        assert_eq!(i10.length, FieldElement::beta_pow_neg(2));
        let i1100 = interval_of(&bw("1100")).unwrap();
        assert_eq!(
            i1100.left,
            &FieldElement::beta_inv() + &FieldElement::beta_pow_neg(2)
        );
        assert_eq!(i1100.right(), FieldElement::one());
        assert!(interval_of(&bw("111")).is_err());
        let i1 = interval_of(&bw("1")).unwrap();
        assert_eq!(i1.right(), FieldElement::one());
        assert_eq!(interval_of(&bw("11")).unwrap().right(), FieldElement::one());
    }

    #[test]
    fn intervals_tile_the_unit_interval() {
        for n in 1..=8 {
            let ivs: Vec<BetaInterval> = enumerate_admissible(n).iter().map(|w| interval_of(w).unwrap()).collect();
            assert!(ivs[0].left.is_zero());
            for pair in ivs.windows(2) {
                assert_eq!(pair[0].right(), pair[1].left, "n={n}");
            }
            assert_eq!(ivs[ivs.len() - 1].right(), FieldElement::one());
        }
    }

    #[test]
    fn greedy_expansion_lands_in_its_cylinder() {
        let x = FieldElement::beta_pow_neg(4).scale(&num_rational::BigRational::new(19.into(), 10.into()));
        let w = expand(&x, 8).unwrap();
        assert!(interval_of(&w).unwrap().contains(&x));
        assert!(!interval_of(&bw("0001")).unwrap().contains(&x));
    }
}
