//! Falsifiability harness: every eventually periodic ω with short preperiod
//! and period must land on one of the seven listed limit supports.

use betagibbs::convergence::{
    classify_support, limit_supports, limit_vector, survey_supports, PeriodicOmega, DEFAULT_N_MAX, DEFAULT_TOL,
};
use betagibbs::{Exec, TernaryWord};

#[test]
fn pure_periods_up_to_eight() {
    let survey = survey_supports(1..=8, Exec::default());
    assert_eq!(survey.checked, (1..=8).map(|l| 3usize.pow(l)).sum::<usize>());
    assert!(survey.violations.is_empty(), "{:?}", &survey.violations[..survey.violations.len().min(10)]);
}

#[test]
fn preperiodic_tails() {
    let mut failures = Vec::new();
    for pl in 1..=3 {
        for pre in TernaryWord::all_of_length(pl) {
            for ql in 1..=4 {
                for per in TernaryWord::all_of_length(ql) {
                    let o = PeriodicOmega::new(pre.clone(), per).unwrap();
                    if let Err(e) = classify_support(&o) {
                        failures.push(format!("{o}: {e}"));
                    }
                }
            }
        }
    }
    assert!(failures.is_empty(), "{failures:?}");
}

#[test]
fn exact_support_matches_float_threshold() {
    // A coordinate that is exactly nonzero never decays below 1e-6 relative
    // to the others along a pure period of length ≤ 6.
    for l in 1..=6 {
        for per in TernaryWord::all_of_length(l) {
            let r = limit_vector(&PeriodicOmega::pure(per).unwrap(), DEFAULT_N_MAX, DEFAULT_TOL);
            let f = r.limit.to_f64();
            let thresholded: Vec<usize> = (0..7).filter(|&i| f[i] > 1e-6).map(|i| i + 1).collect();
            assert_eq!(thresholded, r.support.indices(), "{}", r.omega);
            assert!(limit_supports().contains(&r.support));
        }
    }
}
