//! Real roots of polynomials with `f64` coefficients.
//!
//! Every finite `f64` is a dyadic rational, so the coefficients are lifted to
//! exact rationals. Roots are isolated with a Sturm sequence, then each
//! isolating interval is shrunk by bisection and Newton in floating point on
//! the square-free part.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && *coeffs.last().unwrap() == 0.0 {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::new(vec![0.0]);
        }
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| k as f64 * c)
                .collect(),
        )
    }
}

type Q = BigRational;

fn to_rational(x: f64) -> Q {
    BigRational::from_float(x).expect("finite coefficient")
}

fn rational_to_f64(q: &Q) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or_else(|| {
        // very large numerator/denominator: scale through the bit lengths
        let n = q.numer().to_f64().unwrap_or(f64::NAN);
        let d = q.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

fn trim(mut p: Vec<Q>) -> Vec<Q> {
    while p.len() > 1 && p.last().unwrap().is_zero() {
        p.pop();
    }
    p
}

fn eval_q(p: &[Q], x: &Q) -> Q {
    let mut acc = Q::zero();
    for c in p.iter().rev() {
        acc = acc * x + c;
    }
    acc
}

fn deriv_q(p: &[Q]) -> Vec<Q> {
    if p.len() <= 1 {
        return vec![Q::zero()];
    }
    trim(
        p.iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c * Q::from_integer(BigInt::from(k)))
            .collect(),
    )
}

fn is_zero_poly(p: &[Q]) -> bool {
    p.iter().all(|c| c.is_zero())
}

/// Remainder of `a / b`.
fn rem_q(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead = b.last().unwrap().clone();
    while r.len() > db && !is_zero_poly(&r) {
        let dr = r.len() - 1;
        let f = r[dr].clone() / &lead;
        for (i, bc) in b.iter().enumerate() {
            r[dr - db + i] -= &f * bc;
        }
        r.pop();
        r = trim(r);
        if r.len() <= db {
            break;
        }
    }
    trim(r)
}

/// Quotient of `a / b` when `b` divides `a` exactly.
fn div_q(a: &[Q], b: &[Q]) -> Vec<Q> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    if r.len() <= db {
        return vec![Q::zero()];
    }
    let mut q = vec![Q::zero(); r.len() - db];
    let lead = b.last().unwrap().clone();
    for k in (0..q.len()).rev() {
        let f = r[k + db].clone() / &lead;
        for (i, bc) in b.iter().enumerate() {
            r[k + i] -= &f * bc;
        }
        q[k] = f;
    }
    trim(q)
}

fn gcd_q(a: &[Q], b: &[Q]) -> Vec<Q> {
    let (mut x, mut y) = (a.to_vec(), b.to_vec());
    while !is_zero_poly(&y) {
        let r = rem_q(&x, &y);
        x = y;
        y = r;
    }
    x
}

fn monic_content(p: Vec<Q>) -> Vec<Q> {
    let lead = p.last().unwrap().clone();
    if lead.is_zero() {
        return p;
    }
    p.into_iter().map(|c| c / &lead).collect()
}

/// Sturm sequence of a square-free polynomial.
fn sturm(p: &[Q]) -> Vec<Vec<Q>> {
    let mut seq = vec![p.to_vec(), deriv_q(p)];
    loop {
        let n = seq.len();
        let r = rem_q(&seq[n - 2], &seq[n - 1]);
        if is_zero_poly(&r) {
            break;
        }
        // normalise magnitude to keep rationals small; sign is what matters
        let r: Vec<Q> = r.into_iter().map(|c| -c).collect();
        let lead_abs = r.last().unwrap().abs();
        seq.push(r.into_iter().map(|c| c / &lead_abs).collect());
    }
    seq
}

fn sign_changes(seq: &[Vec<Q>], x: &Q) -> usize {
    let mut changes = 0;
    let mut last = 0i8;
    for p in seq {
        let v = eval_q(p, x);
        let s = if v.is_positive() {
            1
        } else if v.is_negative() {
            -1
        } else {
            0
        };
        if s != 0 {
            if last != 0 && s != last {
                changes += 1;
            }
            last = s;
        }
    }
    changes
}

/// Number of distinct real roots in `(a, b]`.
fn count_roots(seq: &[Vec<Q>], a: &Q, b: &Q) -> usize {
    sign_changes(seq, a).saturating_sub(sign_changes(seq, b))
}

/// Cauchy bound: every root has modulus below the returned value.
fn cauchy_bound(p: &[Q]) -> Q {
    let lead = p.last().unwrap().abs();
    let max = p[..p.len() - 1]
        .iter()
        .map(|c| c.abs())
        .fold(Q::zero(), |a, b| if b > a { b } else { a });
    Q::one() + max / lead
}

/// Real roots, ascending, each polished in `f64`. Multiple roots appear once.
pub fn real_roots(p: &Poly) -> Vec<f64> {
    real_roots_in(p, None, None)
}

/// Real roots in the open interval `(lo, hi)` (either end may be unbounded).
pub fn real_roots_in(p: &Poly, lo: Option<f64>, hi: Option<f64>) -> Vec<f64> {
    if p.degree() == 0 {
        return Vec::new();
    }
    let pq = trim(p.coeffs.iter().map(|&c| to_rational(c)).collect());
    let g = gcd_q(&pq, &deriv_q(&pq));
    let sqf = if g.len() > 1 {
        monic_content(div_q(&pq, &g))
    } else {
        monic_content(pq)
    };
    if sqf.len() <= 1 {
        return Vec::new();
    }
    let seq = sturm(&sqf);
    let bound = cauchy_bound(&sqf);
    let a = match lo {
        Some(v) => to_rational(v).max(-bound.clone()),
        None => -bound.clone(),
    };
    let b = match hi {
        Some(v) => to_rational(v).min(bound),
        None => bound,
    };
    if a >= b {
        return Vec::new();
    }
    // roots exactly at `b` are counted by (a, b]; the open interval excludes them
    let mut intervals = Vec::new();
    isolate(&seq, a, b.clone(), &mut intervals, 0);
    let sqf_f = Poly::new(sqf.iter().map(rational_to_f64).collect());
    let mut roots: Vec<f64> = intervals
        .into_iter()
        .filter(|(_, r)| !(r == &b && eval_q(&sqf, r).is_zero()))
        .map(|(l, r)| polish(&sqf, &sqf_f, &l, &r))
        .collect();
    roots.sort_by(f64::total_cmp);
    roots
}

fn isolate(seq: &[Vec<Q>], a: Q, b: Q, out: &mut Vec<(Q, Q)>, depth: usize) {
    let n = count_roots(seq, &a, &b);
    if n == 0 {
        return;
    }
    if n == 1 || depth > 200 {
        out.push((a, b));
        return;
    }
    let mid = (&a + &b) / Q::from_integer(BigInt::from(2));
    isolate(seq, a, mid.clone(), out, depth + 1);
    isolate(seq, mid, b, out, depth + 1);
}

/// Shrink `(l, r]` holding one simple root of `sqf` to full precision.
fn polish(sqf: &[Q], sqf_f: &Poly, l: &Q, r: &Q) -> f64 {
    if eval_q(sqf, r).is_zero() {
        return rational_to_f64(r);
    }
    let mut lq = l.clone();
    let mut rq = r.clone();
    let two = Q::from_integer(BigInt::from(2));
    let sr = eval_q(sqf, &rq).is_positive();
    // exact bisection until the bracket is narrow in f64 terms
    for _ in 0..80 {
        let lf = rational_to_f64(&lq);
        let rf = rational_to_f64(&rq);
        if (rf - lf).abs() <= 1e-6 * rf.abs().max(lf.abs()).max(1e-300) {
            break;
        }
        let mid = (&lq + &rq) / &two;
        let v = eval_q(sqf, &mid);
        if v.is_zero() {
            return rational_to_f64(&mid);
        }
        if v.is_positive() == sr {
            rq = mid;
        } else {
            lq = mid;
        }
    }
    let (mut lo, mut hi) = (rational_to_f64(&lq), rational_to_f64(&rq));
    let flo = sqf_f.eval(lo);
    let d = sqf_f.derivative();
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = sqf_f.eval(x);
        if fx == 0.0 {
            return x;
        }
        if (fx > 0.0) == (flo > 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        let dx = d.eval(x);
        let newton = x - fx / dx;
        let next = if dx != 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 4.0 * f64::EPSILON * x.abs().max(f64::MIN_POSITIVE)
            || hi - lo <= f64::EPSILON * x.abs()
        {
            return next;
        }
        x = next;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_with_known_roots() {
        // (x - 1)(x + 2)(x - 0.5)
        let p = Poly::new(vec![1.0, -2.5, 0.5, 1.0]);
        let r = real_roots(&p);
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([-2.0, 0.5, 1.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn double_root_reported_once() {
        // (x - 3)^2 (x + 1)
        let p = Poly::new(vec![9.0, 3.0, -5.0, 1.0]);
        let r = real_roots(&p);
        assert_eq!(r.len(), 2);
        assert!((r[0] + 1.0).abs() < 1e-14 && (r[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn no_real_roots() {
        assert!(real_roots(&Poly::new(vec![1.0, 0.0, 1.0])).is_empty());
    }

    #[test]
    fn window_restricts_roots() {
        let p = Poly::new(vec![1.0, -2.5, 0.5, 1.0]);
        let r = real_roots_in(&p, Some(0.0), None);
        assert_eq!(r.len(), 2);
        let r = real_roots_in(&p, Some(0.0), Some(1.0));
        assert_eq!(r, vec![0.5]);
    }
}
