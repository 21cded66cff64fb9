use crate::error::{domain, Result};

const REL_TOL: f64 = 1e-12;
const MAX_ITERATIONS: u32 = 100;

/// Principal branch of the Lambert W function on `(0, ∞)`: the solution of
/// `w e^w = x`, by Halley iteration.
pub fn lambert_w(x: f64) -> Result<f64> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(domain("lambert_w argument", x, "a finite positive real"));
    }
    let mut w = if x > std::f64::consts::E {
        let l = x.ln();
        l - l.ln()
    } else {
        x
    };
    for _ in 0..MAX_ITERATIONS {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= REL_TOL * w.abs() {
            break;
        }
    }
    Ok(w)
}

/// `(ln x − ln ln x, ln x − ln ln x + ln(1 + 1/e))`, which brackets `W(x)`
/// for `x > e`.
pub fn lambert_w_bracket(x: f64) -> Result<(f64, f64)> {
    if !(x > std::f64::consts::E) {
        return Err(domain("lambert_w_bracket argument", x, "(e, ∞)"));
    }
    let l = x.ln();
    let lower = l - l.ln();
    Ok((lower, lower + (-1.0f64).exp().ln_1p()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn fixed_points() {
        assert!((lambert_w(E).unwrap() - 1.0).abs() < 1e-14);
        // omega constant, from iterating w ← (1 + w) / (1 + e^w)
        let mut omega = 0.5f64;
        for _ in 0..100 {
            omega = (1.0 + omega) / (1.0 + omega.exp());
        }
        assert!((lambert_w(1.0).unwrap() - omega).abs() < 1e-14);
        assert!((omega - 0.567143).abs() < 1e-6);
    }

    #[test]
    fn e_cubed_is_bracketed() {
        let x = E.powi(3);
        let w = lambert_w(x).unwrap();
        let (lo, hi) = lambert_w_bracket(x).unwrap();
        assert!((lo - (3.0 - 3f64.ln())).abs() < 1e-12);
        assert!((lo - 1.9014).abs() < 1e-4);
        assert!((w - 2.2079).abs() < 1e-4);
        assert!((hi - 2.2146).abs() < 1e-4);
        assert!(lo <= w && w <= hi);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(lambert_w(0.0).is_err());
        assert!(lambert_w(-1.0).is_err());
        assert!(lambert_w(f64::NAN).is_err());
        assert!(lambert_w_bracket(2.0).is_err());
    }
}
