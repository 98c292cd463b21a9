//! Shared numeric machinery: standard-normal helpers, adaptive quadrature
//! against the Gaussian weight, and a golden-section maximizer.

use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Hard support cutoff for Gaussian-weighted integrals, in standard deviations.
pub const GAUSS_SUPPORT: f64 = 8.0;

/// Default relative tolerance for the adaptive quadrature.
pub const QUAD_REL_TOL: f64 = 1e-6;

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal is well formed")
}

/// Standard normal CDF.
pub fn phi(x: f64) -> f64 {
    std_normal().cdf(x)
}

/// Standard normal quantile function.
pub fn phi_inv(p: f64) -> f64 {
    std_normal().inverse_cdf(p)
}

/// Standard normal density.
pub fn dnorm(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Log density of N(mean, var) at x.
pub fn ln_normal_pdf(x: f64, mean: f64, var: f64) -> f64 {
    let z = x - mean;
    -0.5 * (var.ln() + (2.0 * std::f64::consts::PI).ln()) - 0.5 * z * z / var
}

/// Log density of a location-scale Student t with `df` degrees of freedom.
pub fn ln_student_pdf(x: f64, loc: f64, scale: f64, df: f64) -> f64 {
    let t = (x - loc) / scale;
    ln_gamma((df + 1.0) / 2.0)
        - ln_gamma(df / 2.0)
        - 0.5 * (df * std::f64::consts::PI).ln()
        - scale.ln()
        - 0.5 * (df + 1.0) * (t * t / df).ln_1p()
}

/// Adaptive Simpson integration of `f` on [a, b].
///
/// `tol` is interpreted relative to the accumulated integral magnitude, with an
/// absolute floor so that integrals near zero terminate.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> Result<f64> {
        if depth > 60 {
            return Err(Error::Quadrature(format!(
                "adaptive refinement exceeded depth 60 on [{a}, {b}]"
            )));
        }
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        let delta = left + right - whole;
        if delta.abs() <= 15.0 * tol {
            Ok(left + right + delta / 15.0)
        } else {
            let l = recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth + 1)?;
            let r = recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth + 1)?;
            Ok(l + r)
        }
    }

    let m = 0.5 * (a + b);
    let (fa, fb, fm) = (f(a), f(b), f(m));
    let whole = simpson(a, fa, b, fb, fm);
    let abs_tol = tol * whole.abs().max(1e-3);
    recurse(f, a, fa, b, fb, m, fm, whole, abs_tol, 0)
}

/// E[f(Z)] for Z ~ N(0,1), integrating phi(z) f(z) over [-GAUSS_SUPPORT, GAUSS_SUPPORT].
///
/// All integrands in this crate are bounded by 1, so the truncation error is
/// below 1e-15 and the relative tolerance of 1e-6 governs accuracy.
pub fn gauss_expect<F: Fn(f64) -> f64>(f: F) -> Result<f64> {
    let g = |z: f64| dnorm(z) * f(z);
    // Split at zero: many integrands have a kink or their peak there.
    let left = adaptive_simpson(&g, -GAUSS_SUPPORT, 0.0, QUAD_REL_TOL)?;
    let right = adaptive_simpson(&g, 0.0, GAUSS_SUPPORT, QUAD_REL_TOL)?;
    Ok(left + right)
}

/// Golden-section search for the maximum of a unimodal `f` on [a, b].
///
/// Returns (argmax, max). Tolerance is on the argument.
pub fn golden_section_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Sum of `terms` in descending magnitude order.
pub fn sum_descending(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(|x, y| y.abs().partial_cmp(&x.abs()).expect("finite terms"));
    terms.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn simpson_integrates_polynomials_exactly_enough() {
        let v = adaptive_simpson(&|x: f64| x * x, 0.0, 3.0, 1e-10).unwrap();
        assert_abs_diff_eq!(v, 9.0, epsilon = 1e-9);
    }

    #[test]
    fn gauss_expect_of_one_is_one() {
        let v = gauss_expect(|_| 1.0).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn gauss_expect_of_z_squared_is_one() {
        let v = gauss_expect(|z| z * z).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, fx) = golden_section_max(|x| -(x - 1.25) * (x - 1.25), -4.0, 4.0, 1e-10);
        assert_abs_diff_eq!(x, 1.25, epsilon = 1e-7);
        assert_abs_diff_eq!(fx, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn student_pdf_matches_normal_for_large_df() {
        let lt = ln_student_pdf(0.7, 0.0, 1.0, 1e8);
        let ln = ln_normal_pdf(0.7, 0.0, 1.0);
        assert_abs_diff_eq!(lt, ln, epsilon = 1e-6);
    }
}
