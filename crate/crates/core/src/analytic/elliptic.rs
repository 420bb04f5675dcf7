//! Jacobi elliptic functions by the descending Landen (AGM) ladder.
//!
//! `m` is the parameter (`k^2`). Real `m` outside `[0, 1]` is reached through
//! the imaginary-modulus (`m < 0`) and reciprocal-modulus (`m > 1`)
//! transformations.

use std::f64::consts::FRAC_PI_2;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EllipticError {
    #[error("parameter m = {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("non-finite input")]
    NonFinite,
}

const MAX_LADDER: usize = 40;

/// Complete elliptic integral of the first kind, `K(m)` for `m < 1`.
pub fn ellip_k(m: f64) -> f64 {
    if m == 1.0 {
        return f64::INFINITY;
    }
    let mut a = 1.0;
    let mut b = (1.0 - m).sqrt();
    for _ in 0..MAX_LADDER {
        if (a - b).abs() <= 1e-16 * a {
            break;
        }
        let an = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = an;
    }
    FRAC_PI_2 / a
}

/// `(sn, cn, dn)` for `0 <= m <= 1`.
fn sncndn_unit(u: f64, m: f64) -> (f64, f64, f64) {
    if m == 0.0 {
        let (s, c) = u.sin_cos();
        return (s, c, 1.0);
    }
    if m == 1.0 {
        let sech = 1.0 / u.cosh();
        return (u.tanh(), sech, sech);
    }
    let mut a = [0.0f64; MAX_LADDER + 1];
    let mut c = [0.0f64; MAX_LADDER + 1];
    a[0] = 1.0;
    let mut b = (1.0 - m).sqrt();
    c[0] = m.sqrt();
    let mut n = 0;
    while n < MAX_LADDER && c[n].abs() > f64::EPSILON * a[n] {
        a[n + 1] = 0.5 * (a[n] + b);
        c[n + 1] = 0.5 * (a[n] - b);
        b = (a[n] * b).sqrt();
        n += 1;
    }
    let mut phi = (1u64 << n) as f64 * a[n] * u;
    let mut prev = phi;
    for j in (1..=n).rev() {
        prev = phi;
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let (s, cphi) = phi.sin_cos();
    let dn = if n == 0 {
        1.0
    } else {
        cphi / (prev - phi).cos()
    };
    (s, cphi, dn)
}

/// `(sn, cn, dn)(u | m)` for any real `m`.
pub fn sncndn(u: f64, m: f64) -> Result<(f64, f64, f64), EllipticError> {
    if !u.is_finite() || !m.is_finite() {
        return Err(EllipticError::NonFinite);
    }
    if (0.0..=1.0).contains(&m) {
        return Ok(sncndn_unit(u, m));
    }
    if m < 0.0 {
        // imaginary modulus: argument sqrt(1 - m) u, parameter -m / (1 - m)
        let s = (1.0 - m).sqrt();
        let mu = -m / (1.0 - m);
        let (sn, cn, dn) = sncndn_unit(u * s, mu);
        return Ok((sn / (s * dn), cn / dn, 1.0 / dn));
    }
    // reciprocal modulus: argument sqrt(m) u, parameter 1/m
    let k = m.sqrt();
    let (sn, cn, dn) = sncndn_unit(u * k, 1.0 / m);
    Ok((sn / k, dn, cn))
}

/// `cn(x | m)` for `0 <= m <= 1`.
pub fn jacobi_cn(x: f64, m: f64) -> Result<f64, EllipticError> {
    if !(0.0..=1.0).contains(&m) {
        return Err(EllipticError::OutOfRange(m));
    }
    sncndn(x, m).map(|t| t.1)
}

pub fn jacobi_sn(x: f64, m: f64) -> Result<f64, EllipticError> {
    if !(0.0..=1.0).contains(&m) {
        return Err(EllipticError::OutOfRange(m));
    }
    sncndn(x, m).map(|t| t.0)
}

pub fn jacobi_dn(x: f64, m: f64) -> Result<f64, EllipticError> {
    if !(0.0..=1.0).contains(&m) {
        return Err(EllipticError::OutOfRange(m));
    }
    sncndn(x, m).map(|t| t.2)
}

/// `cn(x | m)` for any real `m < 1` or `m > 1`.
pub fn jacobi_cn_ext(x: f64, m: f64) -> Result<f64, EllipticError> {
    sncndn(x, m).map(|t| t.1)
}

/// Real period of `x -> cn(x | m)`; infinite at `m = 1`.
pub fn cn_period(m: f64) -> f64 {
    if m == 1.0 {
        f64::INFINITY
    } else if (0.0..1.0).contains(&m) {
        4.0 * ellip_k(m)
    } else if m < 0.0 {
        4.0 * ellip_k(-m / (1.0 - m)) / (1.0 - m).sqrt()
    } else {
        2.0 * ellip_k(1.0 / m) / m.sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circular_limit() {
        for x in [0.3, 1.0, 2.5] {
            assert!((jacobi_cn(x, 0.0).unwrap() - f64::cos(x)).abs() < 1e-14);
        }
        assert_eq!(jacobi_cn(0.0, 0.42).unwrap(), 1.0);
    }

    #[test]
    fn quarter_period_zero() {
        let k = ellip_k(0.7);
        assert!(jacobi_cn(k, 0.7).unwrap().abs() < 1e-14);
        // K(1/2) from the lemniscate constant
        assert!((ellip_k(0.5) - 1.854_074_677_301_372).abs() < 1e-14);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(matches!(
            jacobi_cn(0.1, 1.5),
            Err(EllipticError::OutOfRange(_))
        ));
        assert!(matches!(
            jacobi_cn(0.1, -0.5),
            Err(EllipticError::OutOfRange(_))
        ));
    }

    #[test]
    fn extended_parameter_keeps_identities() {
        for m in [-3.0, -0.4, 1.7, 6.0] {
            for x in [0.1, 0.9, 2.2] {
                let (s, c, d) = sncndn(x, m).unwrap();
                assert!((s * s + c * c - 1.0).abs() < 1e-13, "m={m} x={x}");
                assert!((d * d + m * s * s - 1.0).abs() < 1e-12, "m={m} x={x}");
            }
            let p = cn_period(m);
            assert!((jacobi_cn_ext(p, m).unwrap() - 1.0).abs() < 1e-12, "m={m}");
            assert!(
                (jacobi_cn_ext(0.37 + p, m).unwrap() - jacobi_cn_ext(0.37, m).unwrap()).abs()
                    < 1e-12
            );
        }
    }

    #[test]
    fn derivative_of_cn() {
        // d/dx cn = -sn dn, checked by central differences on both sides of [0, 1]
        for m in [-2.0, 0.3, 0.999, 3.0] {
            let x = 0.8;
            let h = 1e-5;
            let fd =
                (jacobi_cn_ext(x + h, m).unwrap() - jacobi_cn_ext(x - h, m).unwrap()) / (2.0 * h);
            let (s, _, d) = sncndn(x, m).unwrap();
            assert!((fd + s * d).abs() < 1e-9, "m={m}");
        }
    }
}
