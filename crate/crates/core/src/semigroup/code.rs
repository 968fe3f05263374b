//! The prefix code W: ternary words whose reversed reading drives the pattern
//! of E₁+E₃+E₅ to a final state, stopping at the first final state.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use super::states::{step, AbstractState};
use super::{column_supports, has_property_p, product, Letter, SupportSet, TernaryWord};
use crate::par::Exec;

pub fn initial_state() -> AbstractState {
    AbstractState::new([1, 0, 1, 0, 1, 0, 0])
}

pub fn final_supports() -> [SupportSet; 3] {
    [
        SupportSet::from_indices(&[1, 2, 3, 4, 5]),
        SupportSet::from_indices(&[1, 2, 3, 5, 6, 7]),
        SupportSet::from_indices(&[1, 3, 4, 5]),
    ]
}

/// Support is one of the three final supports and every nonzero entry is ≥2.
pub fn is_final(s: &AbstractState) -> bool {
    s.is_doubled() && final_supports().contains(&s.support())
}

pub fn is_w_word(w: &TernaryWord) -> bool {
    let n = w.len();
    let mut s = initial_state();
    for (k, &l) in w.letters().iter().rev().enumerate() {
        s = step(s, l);
        if is_final(&s) {
            return k + 1 == n;
        }
    }
    false
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WDecomposition {
    /// Leading part that does not complete a W-word.
    pub head: TernaryWord,
    /// W-words, left to right.
    pub factors: Vec<TernaryWord>,
}

impl WDecomposition {
    pub fn reassemble(&self) -> TernaryWord {
        self.factors.iter().fold(self.head.clone(), |acc, f| acc.concat(f))
    }
}

/// Reads `w` right to left, cutting off the shortest W-suffix each time.
pub fn decompose_w(w: &TernaryWord) -> WDecomposition {
    let letters = w.letters();
    let mut factors = Vec::new();
    let mut s = initial_state();
    let mut end = letters.len();
    for i in (0..letters.len()).rev() {
        s = step(s, letters[i]);
        if is_final(&s) {
            factors.push(w.slice(i..end));
            end = i;
            s = initial_state();
        }
    }
    factors.reverse();
    WDecomposition {
        head: w.slice(0..end),
        factors,
    }
}

/// Number of blocks in the factorization into maximal runs of 0, maximal
/// runs of 2, and single 1s.
pub fn ell_star(w: &TernaryWord) -> usize {
    let mut count = 0;
    let mut prev: Option<Letter> = None;
    for &l in w.letters() {
        if l == Letter::One || prev != Some(l) {
            count += 1;
        }
        prev = Some(l);
    }
    count
}

/// `2 0ⁿ` or `1 2ⁿ` with n ≥ 3.
pub fn is_short_exception(w: &TernaryWord) -> bool {
    match w.letters() {
        [first, rest @ ..] if rest.len() >= 3 => {
            let tail = match first {
                Letter::Two => Letter::Zero,
                Letter::One => Letter::Two,
                Letter::Zero => return false,
            };
            rest.iter().all(|&l| l == tail)
        }
        _ => false,
    }
}

fn extend_w(s: AbstractState, suffix: Vec<Letter>, max_len: usize, out: &mut Vec<TernaryWord>) {
    for l in Letter::ALL {
        let t = step(s, l);
        let mut word = Vec::with_capacity(suffix.len() + 1);
        word.push(l);
        word.extend_from_slice(&suffix);
        if is_final(&t) {
            out.push(TernaryWord::new(word));
        } else if word.len() < max_len {
            extend_w(t, word, max_len, out);
        }
    }
}

/// All W-words of length ≤ `max_len`, sorted by length then lexicographically.
pub fn enumerate_w_with(max_len: usize, exec: Exec) -> Vec<TernaryWord> {
    if max_len == 0 {
        return Vec::new();
    }
    let init = initial_state();
    let mut words: Vec<TernaryWord> = exec
        .map(&Letter::ALL, |&last| {
            let t = step(init, last);
            let mut out = Vec::new();
            if is_final(&t) {
                out.push(TernaryWord::new(vec![last]));
            } else if max_len > 1 {
                extend_w(t, vec![last], max_len, &mut out);
            }
            out
        })
        .into_iter()
        .flatten()
        .collect();
    words.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    words
}

pub fn enumerate_w(max_len: usize) -> Vec<TernaryWord> {
    enumerate_w_with(max_len, Exec::default())
}

#[derive(Clone, Debug, Serialize)]
pub struct SurveyEntry {
    pub word: TernaryWord,
    pub length: usize,
    pub ell_star: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct WSurvey {
    pub max_len: usize,
    pub members: usize,
    pub exceptions: usize,
    pub counterexamples: Vec<SurveyEntry>,
}

impl WSurvey {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Checks |w| ≥ 4 and ℓ*(w) ≥ 3 on every W-word up to `max_len`, allowing the
/// `20ⁿ` and `12ⁿ` exceptions.
pub fn survey_w(max_len: usize, exec: Exec) -> WSurvey {
    let words = enumerate_w_with(max_len, exec);
    let mut exceptions = 0;
    let mut counterexamples = Vec::new();
    for w in &words {
        let e = ell_star(w);
        if w.len() >= 4 && e >= 3 {
            continue;
        }
        if is_short_exception(w) {
            exceptions += 1;
        } else {
            counterexamples.push(SurveyEntry {
                word: w.clone(),
                length: w.len(),
                ell_star: e,
            });
        }
    }
    WSurvey {
        max_len,
        members: words.len(),
        exceptions,
        counterexamples,
    }
}

/// Draws a random W-word by prepending uniform letters until a final state;
/// restarts whenever `max_len` is exceeded.
pub fn random_w_word<R: Rng + ?Sized>(rng: &mut R, max_len: usize) -> TernaryWord {
    loop {
        let mut s = initial_state();
        let mut rev = Vec::new();
        while rev.len() < max_len {
            let l = Letter::ALL[rng.random_range(0..3)];
            s = step(s, l);
            rev.push(l);
            if is_final(&s) {
                rev.reverse();
                return TernaryWord::new(rev);
            }
        }
    }
}

pub fn random_word<R: Rng + ?Sized>(rng: &mut R, len: usize) -> TernaryWord {
    TernaryWord::new((0..len).map(|_| Letter::ALL[rng.random_range(0..3)]).collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyPRun {
    pub samples: usize,
    pub factors: usize,
    pub failures: Vec<TernaryWord>,
}

/// Property (P) on random words `u · ζ₁…ζ_k · v` with each ζ a W-word and
/// `u`, `v` random of length ≤ 8.
pub fn property_p_experiment(samples: usize, factors: usize, seed: u64, exec: Exec) -> PropertyPRun {
    use rand::SeedableRng;
    let seeds: Vec<u64> = (0..samples as u64).map(|i| seed.wrapping_add(i)).collect();
    let failures = exec
        .map(&seeds, |&s| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(s);
            let pre_len = rng.random_range(0..=8);
            let mut w = random_word(&mut rng, pre_len);
            for _ in 0..factors {
                w = w.concat(&random_w_word(&mut rng, 40));
            }
            let post_len = rng.random_range(0..=8);
            w = w.concat(&random_word(&mut rng, post_len));
            (!has_property_p(&product(&w))).then_some(w)
        })
        .into_iter()
        .flatten()
        .collect();
    PropertyPRun {
        samples,
        factors,
        failures,
    }
}

/// Random words `u · ζ₁…ζ_κ · v` as in [`property_p_experiment`]; when the
/// column supports take two values, every nonzero entry of a column on the
/// larger support must be at least 2^(κ−6).
pub fn great_columns_experiment(samples: usize, kappa: usize, seed: u64, exec: Exec) -> PropertyPRun {
    use rand::SeedableRng;
    let floor = BigInt::one() << kappa.saturating_sub(6);
    let seeds: Vec<u64> = (0..samples as u64).map(|i| seed.wrapping_add(i)).collect();
    let failures = exec
        .map(&seeds, |&s| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(s);
            let pre_len = rng.random_range(0..=8);
            let mut w = random_word(&mut rng, pre_len);
            for _ in 0..kappa {
                w = w.concat(&random_w_word(&mut rng, 40));
            }
            let post_len = rng.random_range(0..=8);
            w = w.concat(&random_word(&mut rng, post_len));
            let m = product(&w);
            let supports = column_supports(&m);
            let mut values: Vec<SupportSet> = supports.iter().copied().filter(|c| !c.is_empty()).collect();
            values.sort();
            values.dedup();
            let [x, y] = values.as_slice() else { return None };
            let big = if x.is_superset(*y) { *x } else { *y };
            let ok = (0..7)
                .filter(|&j| supports[j] == big)
                .flat_map(|j| m.column(j))
                .all(|e| e.is_zero() || e >= floor);
            (!ok).then_some(w)
        })
        .into_iter()
        .flatten()
        .collect();
    PropertyPRun {
        samples,
        factors: kappa,
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn w(s: &str) -> TernaryWord {
        s.parse().unwrap()
    }

    #[test]
    fn membership() {
        assert!(is_w_word(&w("2000")));
        assert!(is_w_word(&w("1222")));
        assert!(!is_w_word(&w("0")));
        assert!(!is_w_word(&w("20")));
        assert!(!is_w_word(&TernaryWord::empty()));
    }

    #[test]
    fn w_is_prefix_free_from_the_right() {
        // Prepending letters to a W-word never yields another W-word.
        for x in enumerate_w(6) {
            for l in Letter::ALL {
                let longer = TernaryWord::new(vec![l]).concat(&x);
                assert!(!is_w_word(&longer), "{longer}");
            }
        }
    }

    #[test]
    fn decompositions() {
        let d = decompose_w(&w("2000"));
        assert!(d.head.is_empty());
        assert_eq!(d.factors, vec![w("2000")]);
        let d = decompose_w(&w("00002000"));
        assert_eq!(d.head, w("0000"));
        assert_eq!(d.factors, vec![w("2000")]);
        let d = decompose_w(&TernaryWord::empty());
        assert!(d.head.is_empty() && d.factors.is_empty());
    }

    #[test]
    fn ell_star_values() {
        assert_eq!(ell_star(&w("2000")), 2);
        assert_eq!(ell_star(&w("0")), 1);
        assert_eq!(ell_star(&w("01022")), 4);
        assert_eq!(ell_star(&w("11")), 2);
        assert_eq!(ell_star(&TernaryWord::empty()), 0);
    }

    #[test]
    fn exceptions() {
        assert!(is_short_exception(&w("2000")));
        assert!(is_short_exception(&w("12222")));
        assert!(!is_short_exception(&w("200")));
        assert!(!is_short_exception(&w("2002")));
    }

    #[test]
    fn enumeration_agrees_with_membership() {
        let words = enumerate_w_with(7, Exec::Sequential);
        assert_eq!(words, enumerate_w_with(7, Exec::Parallel));
        let brute: Vec<TernaryWord> = (1..=7)
            .flat_map(TernaryWord::all_of_length)
            .filter(is_w_word)
            .collect();
        assert_eq!(words, brute);
        assert!(words.contains(&w("2000")));
    }

    #[test]
    fn random_w_words_are_members() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            assert!(is_w_word(&random_w_word(&mut rng, 40)));
        }
    }

    #[test]
    fn property_p_small_run() {
        let run = property_p_experiment(40, 6, 11, Exec::default());
        assert!(run.failures.is_empty(), "{:?}", run.failures);
    }

    #[test]
    fn great_columns_small_run() {
        for kappa in [7, 9] {
            let run = great_columns_experiment(40, kappa, 5, Exec::default());
            assert!(run.failures.is_empty(), "{:?}", run.failures);
        }
    }

    proptest! {
        #[test]
        fn decomposition_reassembles(letters in proptest::collection::vec(0usize..3, 0..30)) {
            let word = TernaryWord::new(letters.into_iter().map(|i| Letter::ALL[i]).collect());
            let d = decompose_w(&word);
            prop_assert_eq!(d.reassemble(), word);
            for f in &d.factors {
                prop_assert!(is_w_word(f));
            }
        }
    }
}
