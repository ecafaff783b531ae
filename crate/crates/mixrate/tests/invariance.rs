mod common;

use common::invariant_pairs;
use mixrate::codiff::{codiff_equal, codiff_notequal};
use mixrate::measures::{log_cf, Drift, MeasureSpec};
use mixrate::seqspace::{DualFunctional, IndexDomain};
use mixrate::shifts::WeightedShiftOperator;
use mixrate::Complex64;
use proptest::prelude::*;

fn functional(domain: IndexDomain, entries: &[(i64, f64, f64)]) -> DualFunctional {
    let shift = if domain == IndexDomain::Naturals { 15 } else { 0 };
    DualFunctional::new(
        domain,
        entries.iter().map(|&(i, re, im)| (i + shift, Complex64::new(re, im))),
    )
    .unwrap()
}

fn entries() -> impl Strategy<Value = Vec<(i64, f64, f64)>> {
    prop::collection::vec((-15i64..=15, -3.0..3.0_f64, -3.0..3.0_f64), 0..8)
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= 1e-10 * (1.0 + b.norm())
}

fn pairs() -> Vec<(MeasureSpec, WeightedShiftOperator)> {
    invariant_pairs().into_iter().map(|(_, m, t)| (m, t)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn log_cf_is_shift_invariant(e in entries()) {
        for (m, t) in pairs() {
            let f = functional(m.domain(), &e);
            for drift in [Drift::Full, Drift::DriftFree] {
                let before = log_cf(&m, &f, drift).unwrap();
                let after = log_cf(&m, &t.adjoint_power(1, &f).unwrap(), drift).unwrap();
                prop_assert!(close(after, before), "{before} vs {after}");
            }
        }
    }

    #[test]
    fn codifferences_are_stationary(ex in entries(), ey in entries(), n in 0u32..6) {
        for (m, t) in pairs() {
            let x = functional(m.domain(), &ex);
            let y = functional(m.domain(), &ey);
            let tx = t.adjoint_power(n, &x).unwrap();
            let ty = t.adjoint_power(n, &y).unwrap();
            prop_assert!(close(codiff_equal(&m, &tx, &ty).unwrap().value, codiff_equal(&m, &x, &y).unwrap().value));
            prop_assert!(close(codiff_notequal(&m, &tx, &ty).unwrap().value, codiff_notequal(&m, &x, &y).unwrap().value));
        }
    }

    #[test]
    fn adjoint_powers_compose(e in entries(), a in 0u32..5, b in 0u32..5) {
        for (m, t) in pairs() {
            let f = functional(m.domain(), &e);
            let two_steps = t.adjoint_power(a, &t.adjoint_power(b, &f).unwrap()).unwrap();
            let one_step = t.adjoint_power(a + b, &f).unwrap();
            for (i, c) in one_step.iter() {
                prop_assert!((two_steps.get(i) - c).norm() <= 1e-12 * (1.0 + c.norm()));
            }
            prop_assert_eq!(two_steps.len(), one_step.len());
        }
    }
}
