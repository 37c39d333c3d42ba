//! Small special-function helpers shared by the polynomial and
//! coherent-state modules.

use statrs::function::gamma::{digamma, ln_gamma};

/// ln(n!) for nonnegative integer n.
pub fn ln_factorial(n: u32) -> f64 {
    if n < 2 {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0)
}

/// ln of the binomial coefficient C(n, k) for integer n >= k >= 0.
pub fn ln_binomial(n: u32, k: u32) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// ln of the Pochhammer symbol (a)_k for a > 0.
pub fn ln_pochhammer(a: f64, k: u32) -> f64 {
    debug_assert!(a > 0.0);
    ln_gamma(a + k as f64) - ln_gamma(a)
}

/// Gauss hypergeometric 2F1(a, b; c; x) for x <= 1 and c > b > 0.
///
/// Direct series for |x| < 0.9 with a 1e-15 relative term cutoff; for
/// x in (-infinity, 0) the Pfaff transformation x -> x/(x-1) maps the
/// argument into (0, 1). When the transformed argument is still >= 0.9
/// (very negative x) the series converges too slowly and the Euler
/// integral representation is used instead.
pub fn hyp2f1(a: f64, b: f64, c: f64, x: f64) -> f64 {
    assert!(x <= 1.0, "hyp2f1: argument {x} > 1 unsupported");
    if x == 1.0 {
        // Gauss summation, requires c - a - b > 0 if the series does not
        // terminate; callers here only hit x = 1 via 1 - |zeta|^2 = 1.
        if a == 0.0 || b == 0.0 {
            return 1.0;
        }
        let cab = c - a - b;
        assert!(cab > 0.0, "hyp2f1 diverges at x = 1 for c - a - b <= 0");
        return (ln_gamma(c) + ln_gamma(cab) - ln_gamma(c - a) - ln_gamma(c - b)).exp();
    }
    if x.abs() < 0.9 {
        return hyp2f1_series(a, b, c, x);
    }
    if x < 0.0 {
        // Pfaff: 2F1(a,b;c;x) = (1-x)^{-a} 2F1(a, c-b; c; x/(x-1)).
        // Pick the variant that keeps c - a' - b' = |a - b| nonnegative so
        // that a deep-negative x (transformed argument near 1) can fall
        // through to the connection formula.
        let y = x / (x - 1.0); // in (0, 1)
        let (a1, b1) = if a >= b { (b, c - a) } else { (a, c - b) };
        let scale = (1.0 - x).powf(-a1);
        let terminating =
            (a1 <= 0.0 && a1.fract() == 0.0) || (b1 <= 0.0 && b1.fract() == 0.0);
        if y < 0.9 || terminating {
            return scale * hyp2f1_series(a1, b1, c, y);
        }
        let m = c - a1 - b1; // = |a - b|
        if (m - m.round()).abs() < 1e-9 && a1 > 0.0 && b1 > 0.0 {
            // pass the complement 1 - y = 1/(1 - x) exactly: for very
            // negative x the quotient y itself rounds to 1
            return scale * hyp2f1_near_one(a1, b1, m.round() as u32, 1.0 / (1.0 - x));
        }
        return hyp2f1_euler(a, b, c, x);
    }
    // x in [0.9, 1): the series is safe only when it terminates; otherwise
    // it needs O(1/(1-x)) terms. When c - a - b is a nonnegative integer
    // (every non-terminating call site in this crate) use the logarithmic
    // connection formula in 1 - x; otherwise fall back to the Euler
    // integral.
    let terminating =
        (a <= 0.0 && a.fract() == 0.0) || (b <= 0.0 && b.fract() == 0.0);
    if terminating {
        return hyp2f1_series(a, b, c, x);
    }
    let m = c - a - b;
    if m >= -0.5 && (m - m.round()).abs() < 1e-9 && a > 0.0 && b > 0.0 {
        return hyp2f1_near_one(a, b, m.round() as u32, 1.0 - x);
    }
    hyp2f1_euler(a, b, c, x)
}

/// Connection formula at x -> 1 for c = a + b + m with integer m >= 0
/// (Abramowitz & Stegun 15.3.10 / 15.3.11), convergent in w = 1 - x,
/// which the caller supplies directly to avoid cancellation.
fn hyp2f1_near_one(a: f64, b: f64, m: u32, w: f64) -> f64 {
    let mf = m as f64;
    let c = a + b + mf;
    let mut finite = 0.0f64;
    if m >= 1 {
        let mut term = 1.0f64;
        for k in 0..m {
            let kf = k as f64;
            if k > 0 {
                term *= (a + kf - 1.0) * (b + kf - 1.0) / (kf * (1.0 - mf + kf - 1.0)) * w;
            }
            finite += term;
        }
        finite *= (ln_gamma(mf) + ln_gamma(c) - ln_gamma(a + mf) - ln_gamma(b + mf)).exp();
    }
    let ln_w = w.ln();
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let scale = -sign * (ln_gamma(c) - ln_gamma(a) - ln_gamma(b)).exp() * w.powi(m as i32);
    let mut log_sum = 0.0f64;
    let mut coeff = (-ln_factorial(m)).exp();
    for k in 0..500u32 {
        let kf = k as f64;
        if k > 0 {
            coeff *= (a + mf + kf - 1.0) * (b + mf + kf - 1.0) / (kf * (kf + mf)) * w;
        }
        let term = coeff
            * (ln_w - digamma(kf + 1.0) - digamma(kf + mf + 1.0)
                + digamma(a + mf + kf)
                + digamma(b + mf + kf));
        log_sum += term;
        if term.abs() <= 1e-16 * log_sum.abs().max(1e-300) {
            break;
        }
    }
    finite + scale * log_sum
}

fn hyp2f1_series(a: f64, b: f64, c: f64, x: f64) -> f64 {
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for j in 0..10_000u32 {
        let jf = j as f64;
        term *= (a + jf) * (b + jf) / ((c + jf) * (jf + 1.0)) * x;
        sum += term;
        if term.abs() <= 1e-15 * sum.abs().max(1.0) {
            return sum;
        }
    }
    sum
}

/// Euler integral: 2F1(a,b;c;x) = B(b, c-b)^{-1} int_0^1 t^{b-1}
/// (1-t)^{c-b-1} (1-xt)^{-a} dt, valid for c > b > 0 and x < 1.
fn hyp2f1_euler(a: f64, b: f64, c: f64, x: f64) -> f64 {
    assert!(c > b && b > 0.0);
    let ln_norm = ln_gamma(c) - ln_gamma(b) - ln_gamma(c - b);
    let f = |t: f64| -> f64 {
        if t <= 0.0 || t >= 1.0 {
            // endpoint limits are finite for b >= 1 and c - b >= 1,
            // which holds for every call site in this crate
            return 0.0;
        }
        (ln_norm + (b - 1.0) * t.ln() + (c - b - 1.0) * (1.0 - t).ln() - a * (1.0 - x * t).ln())
            .exp()
    };
    adaptive_simpson(&f, 0.0, 1.0, 1e-14, 48)
}

/// Recursive adaptive Simpson quadrature.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let c = 0.5 * (a + b);
    let fa = f(a);
    let fb = f(b);
    let fc = f(c);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fc + fb);
    simpson_rec(f, a, b, fa, fb, fc, whole, tol, depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    fc: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let c = 0.5 * (a + b);
    let d = 0.5 * (a + c);
    let e = 0.5 * (c + b);
    let fd = f(d);
    let fe = f(e);
    let left = (c - a) / 6.0 * (fa + 4.0 * fd + fc);
    let right = (b - c) / 6.0 * (fc + 4.0 * fe + fb);
    let err = left + right - whole;
    if depth == 0 || err.abs() <= 15.0 * tol {
        left + right + err / 15.0
    } else {
        simpson_rec(f, a, c, fa, fc, fd, left, 0.5 * tol, depth - 1)
            + simpson_rec(f, c, b, fc, fb, fe, right, 0.5 * tol, depth - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn series_matches_closed_forms() {
        // 2F1(1, 1; 2; x) = -ln(1-x)/x
        let x = 0.5;
        assert_relative_eq!(
            hyp2f1(1.0, 1.0, 2.0, x),
            -(1.0 - x).ln() / x,
            max_relative = 1e-13
        );
        // 2F1(a, b; b; x) = (1-x)^{-a}
        assert_relative_eq!(
            hyp2f1(2.5, 3.0, 3.0, -0.4),
            (1.4f64).powf(-2.5),
            max_relative = 1e-13
        );
    }

    #[test]
    fn pfaff_and_euler_agree_deep_negative() {
        // 2F1(1, 1; 2; x) = -ln(1-x)/x holds for all x < 1
        for &x in &[-5.0, -50.0, -2000.0] {
            assert_relative_eq!(
                hyp2f1(1.0, 1.0, 2.0, x),
                -(1.0f64 - x).ln() / x,
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn terminating_series() {
        // 2F1(-2, b; c; x) is a quadratic polynomial
        let (b, c, x) = (1.7, 2.3, 0.95);
        let exact = 1.0 + (-2.0) * b / c * x + (-2.0) * (-1.0) * b * (b + 1.0)
            / (c * (c + 1.0) * 2.0)
            * x
            * x;
        assert_relative_eq!(hyp2f1(-2.0, b, c, x), exact, max_relative = 1e-13);
    }

    #[test]
    fn near_one_connection_formula() {
        // reference values from 25-digit arithmetic
        let cases = [
            (3.0, 3.0, 6.0, 0.999999, 324.4685969395771),
            (3.0, 3.0, 6.0, 0.99, 56.47180569242925),
            (3.0, 2.0, 6.0, 0.9999, 9.958709890727881),
            (4.0, 2.0, 9.0, 0.95, 3.938937627665078),
            (2.0, 5.0, 9.0, 0.999, 9.24350443925298),
        ];
        for (a, b, c, x, expect) in cases {
            assert_relative_eq!(hyp2f1(a, b, c, x), expect, max_relative = 1e-10);
        }
    }

    #[test]
    fn simpson_integrates_polynomial_exactly() {
        let v = adaptive_simpson(&|t: f64| t * t * t, 0.0, 2.0, 1e-14, 20);
        assert_relative_eq!(v, 4.0, max_relative = 1e-12);
    }
}
