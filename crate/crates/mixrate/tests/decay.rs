mod common;

use common::{log_linear_fit, stable_forward};
use mixrate::codiff::{codiff_equal, exact_in, fit_decay, DecayModel, ExpSeriesObservable, Proj};
use mixrate::seqspace::{DualFunctional, IndexDomain};
use mixrate::Complex64;

fn envelope() -> f64 {
    0.5f64.powf(2.0 * 1.5 / 1.6 - 1.0).max(0.5).powf(0.75)
}

#[test]
fn stable_codifference_decays_geometrically() {
    let (m, t) = stable_forward();
    let x = DualFunctional::real(IndexDomain::Integers, (-80..=80).map(|l| (l, 1.0))).unwrap();
    let pts: Vec<(f64, f64)> = (5..=60)
        .map(|n| {
            (
                n as f64,
                codiff_equal(&m, &x, &t.adjoint_power(n, &x).unwrap())
                    .unwrap()
                    .value
                    .norm(),
            )
        })
        .collect();
    let fit = fit_decay(&pts).unwrap();
    let DecayModel::Geometric { rate } = fit.model else {
        panic!("{fit:?}")
    };
    assert!(rate <= envelope() + 0.02 && fit.r2 >= 0.98, "{fit:?}");
    let (oracle_rate, oracle_r2) = log_linear_fit(&pts);
    assert!((oracle_rate - rate).abs() < 1e-9 && (oracle_r2 - fit.r2).abs() < 1e-9);
}

#[test]
fn series_in_decays_geometrically() {
    let (m, t) = stable_forward();
    let base = DualFunctional::real(IndexDomain::Integers, [(0, 1.0), (1, 1.0)]).unwrap();
    let f = ExpSeriesObservable::geometric(Complex64::new(1.0, 0.0), 0.5, Proj::PlusRe, base.clone());
    let g = ExpSeriesObservable::geometric(Complex64::new(1.0, 0.0), 0.5, Proj::MinusRe, base);
    let pts: Vec<(f64, f64)> = (5..=60)
        .map(|n| (n as f64, exact_in(&m, &t, &f, &g, n).unwrap().norm()))
        .collect();
    let fit = fit_decay(&pts).unwrap();
    let DecayModel::Geometric { rate } = fit.model else {
        panic!("{fit:?}")
    };
    assert!(rate <= envelope() + 0.02 && fit.r2 >= 0.95, "{fit:?}");
}

#[test]
fn fit_recovers_synthetic_models() {
    let geo: Vec<(f64, f64)> = (1..40).map(|n| (n as f64, 3.0 * 0.7f64.powi(n))).collect();
    let fit = fit_decay(&geo).unwrap();
    assert!(matches!(fit.model, DecayModel::Geometric { rate } if (rate - 0.7).abs() < 1e-12));
    let pow: Vec<(f64, f64)> = (1..200).map(|n| (n as f64, 2.0 * (n as f64).powf(-1.5))).collect();
    let fit = fit_decay(&pow).unwrap();
    assert!(matches!(fit.model, DecayModel::PowerLaw { exponent } if (exponent + 1.5).abs() < 1e-12));
}
