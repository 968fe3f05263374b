//! Column patterns in {0, 1, ≥2}⁷ and the finite state graphs they span.
//!
//! Because A, B and C are 0/1 matrices, the pattern of `M·v` depends only on
//! the pattern of `v`, so the abstraction is exact.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::fmt::Write as _;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Serialize, Serializer};

use super::{Letter, SupportSet, TernaryWord};
use crate::matrix::{Vector7, DIM};

/// Saturated entry pattern; each coordinate is 0, 1 or 2 (meaning ≥2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AbstractState([u8; DIM]);

impl AbstractState {
    pub fn new(levels: [u8; DIM]) -> Self {
        AbstractState(levels.map(|x| x.min(2)))
    }

    pub fn levels(&self) -> [u8; DIM] {
        self.0
    }

    /// Pattern of a nonnegative integer column.
    pub fn of_ints(v: &[BigInt; DIM]) -> Self {
        AbstractState(std::array::from_fn(|i| {
            assert!(!v[i].is_negative(), "patterns need nonnegative entries");
            v[i].to_u8().map_or(2, |x| x.min(2))
        }))
    }

    /// Unit column E_i for a 1-based index.
    pub fn basis(i: usize) -> Self {
        let mut s = [0u8; DIM];
        s[i - 1] = 1;
        AbstractState(s)
    }

    pub fn support(&self) -> SupportSet {
        let idx: Vec<usize> = (0..DIM).filter(|&i| self.0[i] > 0).map(|i| i + 1).collect();
        SupportSet::from_indices(&idx)
    }

    /// Every nonzero coordinate is ≥2.
    pub fn is_doubled(&self) -> bool {
        self.0.iter().all(|&x| x != 1)
    }
}

/// Pattern of a nonnegative rational column after clearing denominators
/// (the column is scaled by the lcm of its denominators).
pub fn abstract_vector(v: &Vector7) -> AbstractState {
    let lcm = v
        .entries()
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: [BigInt; DIM] =
        std::array::from_fn(|i| (v.entry(i) * num_rational::BigRational::from_integer(lcm.clone())).to_integer());
    AbstractState::of_ints(&ints)
}

impl fmt::Display for AbstractState {
    /// Support digits with a `^2` mark on coordinates that are ≥2, e.g. `1^2 3 5`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &x) in self.0.iter().enumerate() {
            if x == 0 {
                continue;
            }
            if !first {
                f.write_char(' ')?;
            }
            first = false;
            write!(f, "{}", i + 1)?;
            if x == 2 {
                f.write_str("^2")?;
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl Serialize for AbstractState {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

/// Pattern of `A(σ)·v` given the pattern of `v`.
pub fn step(s: AbstractState, sigma: Letter) -> AbstractState {
    let rows = sigma.rows();
    AbstractState(std::array::from_fn(|i| {
        let mut t = 0u8;
        for (&a, &x) in rows[i].iter().zip(s.0.iter()) {
            if a != 0 {
                t = (t + x).min(2);
            }
        }
        t
    }))
}

/// Pattern of `A(w)·v`: the last letter acts first.
pub fn act(s: AbstractState, w: &TernaryWord) -> AbstractState {
    w.letters().iter().rev().fold(s, |acc, &l| step(acc, l))
}

/// Follows the path labelled by `w` in reading order: the first letter acts first.
pub fn follow(s: AbstractState, w: &TernaryWord) -> AbstractState {
    w.letters().iter().fold(s, |acc, &l| step(acc, l))
}

#[derive(Clone, Debug, Serialize)]
pub struct StateGraph {
    pub nodes: Vec<AbstractState>,
    /// `(from, label, to)` as node indices.
    pub edges: Vec<(usize, Letter, usize)>,
}

impl StateGraph {
    pub fn index_of(&self, s: &AbstractState) -> Option<usize> {
        self.nodes.iter().position(|n| n == s)
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph states {\n  rankdir=LR;\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let _ = writeln!(out, "  s{i} [label=\"{n}\"];");
        }
        for (a, l, b) in &self.edges {
            let _ = writeln!(out, "  s{a} -> s{b} [label=\"{l}\"];");
        }
        out.push_str("}\n");
        out
    }
}

/// Breadth-first closure of `starts` under the three letters.
pub fn reachable_graph(starts: &[AbstractState]) -> StateGraph {
    let mut nodes: Vec<AbstractState> = Vec::new();
    let mut index: HashMap<AbstractState, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    for &s in starts {
        if let std::collections::hash_map::Entry::Vacant(e) = index.entry(s) {
            e.insert(nodes.len());
            nodes.push(s);
            queue.push_back(s);
        }
    }
    let mut edges = Vec::new();
    while let Some(s) = queue.pop_front() {
        let from = index[&s];
        for l in Letter::ALL {
            let t = step(s, l);
            let to = *index.entry(t).or_insert_with(|| {
                nodes.push(t);
                queue.push_back(t);
                nodes.len() - 1
            });
            edges.push((from, l, to));
        }
    }
    StateGraph { nodes, edges }
}

/// States reachable from the unit columns whose support contains {1,3,5}.
pub fn core_states() -> &'static [AbstractState] {
    static CELL: OnceLock<Vec<AbstractState>> = OnceLock::new();
    CELL.get_or_init(|| {
        let starts: Vec<AbstractState> = (1..=DIM).map(AbstractState::basis).collect();
        let core = SupportSet::from_indices(&[1, 3, 5]);
        reachable_graph(&starts)
            .nodes
            .into_iter()
            .filter(|s| s.support().is_superset(core))
            .collect()
    })
}

/// Supports reached by following `w` from every core state.
pub fn image_supports(w: &TernaryWord) -> BTreeSet<SupportSet> {
    core_states().iter().map(|&s| follow(s, w).support()).collect()
}

/// Following `w` from any core state ends on one common support.
pub fn is_synchronizing(w: &TernaryWord) -> bool {
    image_supports(w).len() <= 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semigroup::{letter_matrix, product};
    use proptest::prelude::*;

    fn w(s: &str) -> TernaryWord {
        s.parse().unwrap()
    }

    fn e135() -> AbstractState {
        AbstractState::new([1, 0, 1, 0, 1, 0, 0])
    }

    #[test]
    fn abstraction() {
        let v = [1, 0, 2, 0, 5, 0, 0].map(BigInt::from);
        assert_eq!(AbstractState::of_ints(&v).levels(), [1, 0, 2, 0, 2, 0, 0]);
    }

    #[test]
    fn one_step_of_a() {
        let s = step(e135(), Letter::Zero);
        assert_eq!(s.levels(), [1, 1, 1, 0, 1, 1, 0]);
        assert_eq!(s.support(), SupportSet::from_indices(&[1, 2, 3, 5, 6]));
    }

    #[test]
    fn rational_columns_clear_denominators() {
        let v = Vector7::from_fractions([(3, 5), (2, 5), (13, 20), (1, 5), (3, 5), (3, 10), (1, 5)]);
        assert_eq!(abstract_vector(&v).levels(), [2; DIM]);
    }

    #[test]
    fn zero_iterates_from_v() {
        let v = Vector7::from_fractions([(3, 5), (2, 5), (13, 20), (1, 5), (3, 5), (3, 10), (1, 5)]);
        let mut s = abstract_vector(&v);
        let mut seen = BTreeSet::new();
        for _ in 0..12 {
            s = step(s, Letter::Zero);
            seen.insert(s.support());
        }
        assert!(seen.contains(&SupportSet::from_indices(&[1, 2, 3, 5, 6, 7])));
        assert!(seen.iter().all(|x| x.contains(1)));
    }

    #[test]
    fn graph_is_finite_and_core_closed() {
        let g = reachable_graph(&[e135()]);
        assert!(g.nodes.len() <= 2187);
        let core = SupportSet::from_indices(&[1, 3, 5]);
        for (a, _, b) in &g.edges {
            if g.nodes[*a].support().is_superset(core) {
                assert!(g.nodes[*b].support().is_superset(core));
            }
        }
        assert!(g.to_dot().starts_with("digraph"));
    }

    #[test]
    fn core_state_count() {
        assert_eq!(core_states().len(), 51);
    }

    #[test]
    fn synchronizing_words() {
        for s in ["00", "11", "01", "2"] {
            assert!(is_synchronizing(&w(s)), "{s}");
        }
        assert!(TernaryWord::all_of_length(3).iter().all(is_synchronizing));
        assert!(!is_synchronizing(&TernaryWord::empty()));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn step_commutes_with_abstraction(
            v in proptest::array::uniform7(0u32..5),
            l in 0usize..3,
        ) {
            let letter = Letter::from_index(l).unwrap();
            let big = v.map(BigInt::from);
            let image = letter_matrix(letter).apply_int(&big);
            prop_assert_eq!(AbstractState::of_ints(&image), step(AbstractState::of_ints(&big), letter));
        }

        #[test]
        fn act_matches_products(
            v in proptest::array::uniform7(0u32..4),
            letters in proptest::collection::vec(0usize..3, 0..8),
        ) {
            let word = TernaryWord::new(letters.into_iter().map(|i| Letter::from_index(i).unwrap()).collect());
            let big = v.map(BigInt::from);
            let image = product(&word).apply_int(&big);
            prop_assert_eq!(AbstractState::of_ints(&image), act(AbstractState::of_ints(&big), &word));
        }
    }

    #[test]
    fn display_marks_doubled_entries() {
        assert_eq!(AbstractState::new([0; DIM]).to_string(), "0");
        assert_eq!(AbstractState::new([2, 0, 1, 0, 0, 0, 0]).to_string(), "1^2 3");
    }
}
