//! End-to-end identity suite: twelve numbered checks, each pass/fail with a
//! serialized counterexample on failure.

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use serde::Serialize;
use serde_json::{json, Value};

use crate::convergence::{
    cauchy_modulus, generic_cauchy_modulus, limit_supports, limit_vector, GenericFamily, PeriodicOmega,
    DEFAULT_BUDGET, DEFAULT_N_MAX, DEFAULT_TOL,
};
use crate::matrix::{SupportSet, Vector7};
use crate::measure;
use crate::oracle;
use crate::par::Exec;
use crate::parry::{decompose_blocks, enumerate_admissible_with};
use crate::semigroup::code::{property_p_experiment, survey_w};
use crate::semigroup::families::{verify_family, FamilyId};
use crate::semigroup::states::is_synchronizing;
use crate::semigroup::{Letter, TernaryWord};
use crate::spectrum::{self, MassTable, QGrid};

#[derive(Clone, Copy, Debug, Serialize)]
pub struct VerifyOptions {
    /// Smaller sizes everywhere the check allows it.
    pub quick: bool,
    /// Number of W-factors in the great-columns sizing experiment.
    pub kappa: usize,
    pub seed: u64,
    #[serde(skip)]
    pub exec: Exec,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            quick: false,
            kappa: 7,
            seed: 20,
            exec: Exec::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
}

impl CheckResult {
    fn new(id: usize, passed: bool, detail: String, counterexample: Option<Value>) -> Self {
        CheckResult {
            id,
            name: NAMES[id - 1],
            passed,
            detail,
            counterexample: if passed { None } else { counterexample },
        }
    }

    pub fn line(&self) -> String {
        format!(
            "[{:>2}] {:<22} {}  {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

pub const NAMES: [&str; 12] = [
    "stationary-vector",
    "family-closed-forms",
    "partition-of-unity",
    "oracle-sandwich",
    "synchronizing-words",
    "two-column-property",
    "limit-supports",
    "cauchy-trend",
    "weak-gibbs",
    "potential-closed-forms",
    "spectrum-pins",
    "w-survey",
];

pub const COUNT: usize = 12;

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub quick: bool,
    pub results: Vec<CheckResult>,
    /// Supplementary κ-sized experiment; not one of the twelve checks.
    pub great_columns: CheckResult,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn table(&self) -> String {
        let mut out: String = self.results.iter().map(|r| r.line() + "\n").collect();
        out.push_str(&format!("     {:<22} {}  {}\n", "great-columns", pass_word(self.great_columns.passed), self.great_columns.detail));
        out
    }
}

fn pass_word(p: bool) -> &'static str {
    if p {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn run_all(opts: &VerifyOptions) -> VerifyReport {
    VerifyReport {
        quick: opts.quick,
        results: (1..=COUNT).map(|id| check(id, opts)).collect(),
        great_columns: great_columns(opts),
    }
}

/// Runs check `id` (1-based).
pub fn check(id: usize, opts: &VerifyOptions) -> CheckResult {
    match id {
        1 => stationary(),
        2 => families(opts),
        3 => partition(opts),
        4 => oracle_sandwich(opts),
        5 => synchronizing(),
        6 => two_columns(opts),
        7 => supports(),
        8 => cauchy_trend(opts),
        9 => weak_gibbs(opts),
        10 => potentials(opts),
        11 => spectrum_pins(opts),
        12 => w_survey(opts),
        _ => panic!("no check {id}"),
    }
}

pub fn displayed_v() -> Vector7 {
    Vector7::from_fractions([(3, 5), (2, 5), (13, 20), (1, 5), (3, 5), (3, 10), (1, 5)])
}

fn stationary() -> CheckResult {
    match measure::stationary_v() {
        Ok(v) => {
            let ok = v == displayed_v();
            CheckResult::new(1, ok, format!("V = {v}"), Some(json!({ "v": v })))
        }
        Err(e) => CheckResult::new(1, false, e.to_string(), None),
    }
}

fn families(opts: &VerifyOptions) -> CheckResult {
    let n_max = if opts.quick { 8 } else { 20 };
    let ids = FamilyId::all();
    let reports = opts.exec.map(&ids, |&id| verify_family(id, n_max));
    let bad: Vec<_> = reports.iter().filter(|r| !r.passed()).collect();
    CheckResult::new(
        2,
        bad.is_empty(),
        format!("{} families, n ≤ {n_max}", reports.len()),
        bad.first().map(|r| json!(r)),
    )
}

fn partition(opts: &VerifyOptions) -> CheckResult {
    let n_max = if opts.quick { 10 } else { 14 };
    let bad = (1..=n_max).find(|&n| !measure::level_sum(n, opts.exec).is_one());
    CheckResult::new(
        3,
        bad.is_none(),
        format!("Σμ(I_w) = 1 for n ≤ {n_max}"),
        bad.map(|n| json!({ "n": n, "sum": measure::level_sum(n, opts.exec).to_string() })),
    )
}

fn oracle_sandwich(opts: &VerifyOptions) -> CheckResult {
    let depth = if opts.quick { 20 } else { 24 };
    let cloud = match oracle::build_atoms(depth, opts.exec) {
        Ok(c) => c,
        Err(e) => return CheckResult::new(4, false, e.to_string(), None),
    };
    let limit = BigRational::new(1.into(), 100.into());
    let mut worst = BigRational::zero();
    for n in 1..=6 {
        match oracle::compare_all(&cloud, n, opts.exec) {
            Ok(rep) => {
                if let Some(row) = rep.rows.iter().find(|r| !r.pass) {
                    return CheckResult::new(4, false, format!("n = {n}, N = {depth}"), Some(json!(row)));
                }
                worst = worst.max(rep.worst_gap);
            }
            Err(e) => return CheckResult::new(4, false, e.to_string(), None),
        }
    }
    let gap = crate::numberfield::rational_to_f64(&worst);
    CheckResult::new(
        4,
        worst < limit,
        format!("words of length ≤ 6 at N = {depth}, worst gap {gap:.3e}"),
        Some(json!({ "worst_gap": worst.to_string() })),
    )
}

fn synchronizing() -> CheckResult {
    let words = TernaryWord::all_of_length(3);
    let bad: Vec<String> = words.iter().filter(|w| !is_synchronizing(w)).map(|w| w.to_string()).collect();
    CheckResult::new(5, bad.is_empty(), format!("{} words of length 3", words.len()), Some(json!(bad)))
}

fn two_columns(opts: &VerifyOptions) -> CheckResult {
    let samples = if opts.quick { 100 } else { 500 };
    let run = property_p_experiment(samples, 6, opts.seed, opts.exec);
    CheckResult::new(
        6,
        run.failures.is_empty(),
        format!("{samples} random words with six W-factors"),
        run.failures.first().map(|w| json!({ "word": w })),
    )
}

fn great_columns(opts: &VerifyOptions) -> CheckResult {
    let samples = if opts.quick { 50 } else { 200 };
    let run = crate::semigroup::code::great_columns_experiment(samples, opts.kappa, opts.seed, opts.exec);
    let mut r = CheckResult::new(
        1,
        run.failures.is_empty(),
        format!("{samples} random words with κ = {} W-factors", opts.kappa),
        run.failures.first().map(|w| json!({ "word": w })),
    );
    r.id = 0;
    r.name = "great-columns";
    r
}

fn supports() -> CheckResult {
    let allowed = limit_supports();
    let mut bad = Vec::new();
    for l in 1..=4 {
        for per in TernaryWord::all_of_length(l) {
            let o = PeriodicOmega::pure(per).expect("nonempty period");
            let r = limit_vector(&o, DEFAULT_N_MAX, DEFAULT_TOL);
            if !r.converged || !allowed.contains(&r.support) {
                bad.push(json!({ "omega": o, "support": r.support, "converged": r.converged }));
            }
        }
    }
    let specials = [
        ("0", SupportSet::from_indices(&[2, 3, 5, 6, 7])),
        ("2", SupportSet::from_indices(&[1, 3, 4])),
        ("100", SupportSet::from_indices(&[1, 2, 3, 4, 5])),
    ];
    for (per, want) in specials {
        let o = PeriodicOmega::pure(per.parse().expect("literal")).expect("nonempty");
        let r = limit_vector(&o, DEFAULT_N_MAX, DEFAULT_TOL);
        if r.support != want {
            bad.push(json!({ "omega": o, "support": r.support, "expected": want }));
        }
    }
    let zero = limit_vector(&PeriodicOmega::pure(TernaryWord::new(vec![Letter::Zero])).expect("nonempty"), DEFAULT_N_MAX, DEFAULT_TOL);
    let fifth = Vector7::from_fractions([(0, 1), (1, 5), (1, 5), (0, 1), (1, 5), (1, 5), (1, 5)]);
    if zero.limit != fifth {
        bad.push(json!({ "omega": zero.omega, "limit": zero.limit }));
    }
    CheckResult::new(
        7,
        bad.is_empty(),
        "120 periods of length ≤ 4 and three special tails".into(),
        bad.into_iter().next(),
    )
}

fn cauchy_trend(opts: &VerifyOptions) -> CheckResult {
    let samples = if opts.quick { 30 } else { 100 };
    let window = 8;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(opts.seed);
    let omegas: Vec<TernaryWord> = (0..samples)
        .map(|_| TernaryWord::new((0..10).map(|_| Letter::ALL[rng.random_range(0..3)]).collect()))
        .collect();
    let mut bad = None;
    for w in &omegas {
        let short = cauchy_modulus(&w.slice(0..4), 4 + window, DEFAULT_BUDGET, opts.exec);
        let long = cauchy_modulus(w, 10 + window, DEFAULT_BUDGET, opts.exec);
        match (short, long) {
            (Ok(s), Ok(l)) => {
                let ok = l.modulus < s.modulus || s.modulus.is_zero();
                if !ok {
                    bad = Some(json!({ "omega": w, "short": s, "long": l }));
                    break;
                }
            }
            (Err(e), _) | (_, Err(e)) => {
                bad = Some(json!({ "omega": w, "error": e.to_string() }));
                break;
            }
        }
    }
    let (fam, v0) = GenericFamily::nonuniform_example();
    let floor = BigRational::new(4.into(), 15.into());
    for n in 1..=10 {
        match generic_cauchy_modulus(&fam, &v0, &vec![0; n], n + 2, DEFAULT_BUDGET) {
            Ok(m) if m >= floor => {}
            Ok(m) => {
                bad.get_or_insert(json!({ "fixture_prefix_len": n, "modulus": m.to_string() }));
            }
            Err(e) => {
                bad.get_or_insert(json!({ "fixture_prefix_len": n, "error": e.to_string() }));
            }
        }
    }
    CheckResult::new(
        8,
        bad.is_none(),
        format!("{samples} random ω, window {window}; 3×3 witness ≥ 4/15"),
        bad,
    )
}

fn weak_gibbs(opts: &VerifyOptions) -> CheckResult {
    let n_max = if opts.quick { 12 } else { 14 };
    let rows = measure::weak_gibbs_scan(n_max, opts.exec);
    if let Some(r) = rows.iter().find(|r| r.min_ratio < BigRational::one()) {
        return CheckResult::new(9, false, format!("ratio below 1 at n = {}", r.n), Some(json!(r)));
    }
    for n in 1..=n_max {
        let words: Vec<_> = enumerate_admissible_with(n, opts.exec)
            .into_iter()
            .filter(|w| decompose_blocks(w).is_ok())
            .collect();
        let results = opts.exec.map(&words, measure::gibbs_bound);
        for (w, r) in words.iter().zip(results) {
            match r {
                Ok(b) if b.holds => {}
                Ok(b) => return CheckResult::new(9, false, format!("bound fails on {w}"), Some(json!(b))),
                Err(e) => return CheckResult::new(9, false, format!("{w}: {e}"), Some(json!({ "word": w }))),
            }
        }
    }
    let (d4, d12) = (rows[3].delta, rows[11].delta);
    CheckResult::new(
        9,
        d12 < d4,
        format!("n ≤ {n_max}; Δ(4) = {d4:.4}, Δ(12) = {d12:.4}"),
        Some(json!({ "delta4": d4, "delta12": d12 })),
    )
}

fn potentials(opts: &VerifyOptions) -> CheckResult {
    let n_max = if opts.quick { 10 } else { 12 };
    let mut checked = 0;
    for n in 1..=n_max {
        let words: Vec<_> = enumerate_admissible_with(n, opts.exec)
            .into_iter()
            .filter(|w| decompose_blocks(w).is_ok())
            .collect();
        let results = opts.exec.map(&words, measure::n_step_potential_mu_prime);
        for (w, r) in words.iter().zip(results) {
            checked += 1;
            match r {
                Ok(c) if c.matches => {}
                Ok(c) => return CheckResult::new(10, false, format!("mismatch on {w}"), Some(json!(c))),
                Err(e) => return CheckResult::new(10, false, format!("{w}: {e}"), Some(json!({ "word": w }))),
            }
        }
    }
    CheckResult::new(10, true, format!("{checked} block words of length ≤ {n_max}"), None)
}

fn spectrum_pins(opts: &VerifyOptions) -> CheckResult {
    let n_hi = 14;
    let table = match MassTable::build(n_hi, opts.exec) {
        Ok(t) => t,
        Err(e) => return CheckResult::new(11, false, e.to_string(), None),
    };
    let (lo, hi) = spectrum::default_window(n_hi);
    let grid = if opts.quick { QGrid::range(-4.0, 4.0, 0.25) } else { Ok(QGrid::standard()) };
    let rep = match grid.and_then(|g| spectrum::spectrum_report(&table, &g, lo, hi, opts.exec)) {
        Ok(r) => r,
        Err(e) => return CheckResult::new(11, false, e.to_string(), None),
    };
    let tau = |q: f64| rep.samples.iter().find(|s| s.q == q).map(|s| s.tau).unwrap_or(f64::NAN);
    let (t0, t1) = (tau(0.0), tau(1.0));
    let ok = t1.abs() <= 1e-10
        && (-1.05..=-0.95).contains(&t0)
        && rep.ln_sum_convex
        && rep.legendre_concave
        && (0.95..=1.0).contains(&rep.max_f);
    CheckResult::new(
        11,
        ok,
        format!(
            "window [{lo}, {hi}]: τ(1) = {t1:.1e}, τ(0) = {t0:.6}, max f = {:.6}, convex {}, concave {}",
            rep.max_f, rep.ln_sum_convex, rep.legendre_concave
        ),
        Some(json!({ "tau0": t0, "tau1": t1, "max_f": rep.max_f, "ln_sum_convex": rep.ln_sum_convex, "legendre_concave": rep.legendre_concave })),
    )
}

fn w_survey(opts: &VerifyOptions) -> CheckResult {
    let max_len = if opts.quick { 8 } else { 10 };
    let s = survey_w(max_len, opts.exec);
    CheckResult::new(
        12,
        s.passed(),
        format!(
            "{} W-words of length ≤ {max_len}, {} allowed exceptions, {} counterexamples",
            s.members,
            s.exceptions,
            s.counterexamples.len()
        ),
        Some(json!(s.counterexamples)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> VerifyOptions {
        VerifyOptions { quick: true, ..VerifyOptions::default() }
    }

    #[test]
    fn cheap_checks_pass() {
        for id in [1, 2, 5, 7] {
            let r = check(id, &quick());
            assert!(r.passed, "{}", r.line());
        }
    }

    #[test]
    fn lines_name_each_check() {
        let r = check(1, &quick());
        assert!(r.line().contains("stationary-vector") && r.line().contains("PASS"));
        assert!(r.counterexample.is_none());
    }

    #[test]
    fn w_survey_reports_counterexamples() {
        let r = check(12, &VerifyOptions { quick: true, ..VerifyOptions::default() });
        assert!(!r.passed);
        let ce = r.counterexample.unwrap();
        assert!(ce.as_array().is_some_and(|a| !a.is_empty()));
    }
}
