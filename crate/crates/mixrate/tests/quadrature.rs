mod common;

use common::{rel, tempered_exponent_quad};
use mixrate::measures::{tempered_exponent, Sign, TemperedExponentParams};
use mixrate::Complex64;

#[test]
fn tempered_exponent_matches_quadrature_on_grid() {
    let mut worst: f64 = 0.0;
    for t in [-10.0, -1.0, -0.1, 0.1, 1.0, 10.0] {
        for lam in [0.5, 1.0, 2.0] {
            for alpha in [0.3, 0.5, 0.9] {
                for side in [Sign::Plus, Sign::Minus] {
                    let params = TemperedExponentParams {
                        a: 1.0,
                        lam,
                        alpha,
                        side,
                    };
                    let closed = tempered_exponent(&params, t).unwrap();
                    let quad = tempered_exponent_quad(1.0, lam, alpha, side, t);
                    let err = (closed - quad).norm() / quad.norm();
                    assert!(err < 1e-8, "t={t} lam={lam} alpha={alpha} {side:?}: {closed} vs {quad}");
                    worst = worst.max(err);
                }
            }
        }
    }
    assert!(worst < 1e-8);
}

#[test]
fn reference_point_against_high_precision_value() {
    let params = TemperedExponentParams {
        a: 1.0,
        lam: 1.0,
        alpha: 0.5,
        side: Sign::Plus,
    };
    let want = Complex64::new(-0.349_826_073_878_433_3, 1.613_251_551_723_148_3);
    let got = tempered_exponent(&params, 1.0).unwrap();
    assert!((got - want).norm() < 1e-13, "{got}");
    assert!(rel(tempered_exponent_quad(1.0, 1.0, 0.5, Sign::Plus, 1.0).re, want.re) < 1e-9);
}

#[test]
fn sides_are_mirror_images() {
    for t in [0.3, 2.0, 7.5] {
        let plus = TemperedExponentParams {
            a: 0.7,
            lam: 1.3,
            alpha: 0.4,
            side: Sign::Plus,
        };
        let minus = TemperedExponentParams {
            side: Sign::Minus,
            ..plus
        };
        let a = tempered_exponent(&plus, t).unwrap();
        let b = tempered_exponent(&minus, -t).unwrap();
        assert!((a - b).norm() < 1e-15);
        assert!((tempered_exponent(&minus, t).unwrap() - a.conj()).norm() < 1e-14);
    }
}
