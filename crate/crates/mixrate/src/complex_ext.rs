use num_complex::Complex64;

/// `e^{is} - 1` for real `s`, accurate near zero.
pub(crate) fn expm1_i(s: f64) -> Complex64 {
    let h = (0.5 * s).sin();
    Complex64::new(-2.0 * h * h, s.sin())
}

/// `e^z - 1`, accurate for small `|z|`.
pub(crate) fn cexpm1(z: Complex64) -> Complex64 {
    let em1 = z.re.exp_m1();
    let h = (0.5 * z.im).sin();
    let cos_m1 = -2.0 * h * h;
    Complex64::new(em1 * z.im.cos() + cos_m1, (em1 + 1.0) * z.im.sin())
}

/// `ln(1 + z)`, accurate for small `|z|`.
pub(crate) fn cln1p(z: Complex64) -> Complex64 {
    let re = 0.5 * (2.0 * z.re + z.norm_sqr()).ln_1p();
    Complex64::new(re, z.im.atan2(1.0 + z.re))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_arguments_keep_precision() {
        let s = 1e-9;
        let v = expm1_i(s);
        assert!((v.im - s).abs() < 1e-24);
        assert!((v.re + 0.5 * s * s).abs() < 1e-30);

        let z = Complex64::new(1e-10, -2e-10);
        let e = cexpm1(z);
        assert!((e - z - z * z / 2.0).norm() < 1e-25);
        let l = cln1p(z);
        assert!((l - z + z * z / 2.0).norm() < 1e-25);
    }

    #[test]
    fn large_arguments_match_direct_formula() {
        let z = Complex64::new(0.7, -1.3);
        assert!((cexpm1(z) - (z.exp() - 1.0)).norm() < 1e-15);
        assert!((cln1p(z) - (z + 1.0).ln()).norm() < 1e-15);
        assert!((expm1_i(2.5) - (Complex64::new(0.0, 2.5).exp() - 1.0)).norm() < 1e-15);
    }
}
