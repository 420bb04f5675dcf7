//! Morales-Ramis eigenvalue test for homogeneous algebraic potentials.
//!
//! Given the degree `k` of a homogeneous potential and the Hessian spectrum at
//! a Darboux point (`grad V(d) = d`), integrability requires either `k` in
//! `K2 = {2/(2l+1)}` or every eigenvalue in a `k`-dependent union of the sets
//!
//! ```text
//! I1(k) = { p + (k/2) p (p - 1) }
//! Ij(k) = { (4 k^2 (p + s)^2 - (k - 2)^2) / (8 k) },  s = 1/2, 1/3, 1/4, 1/5, 2/5
//! ```
//!
//! with `p` ranging over the integers. All arithmetic is exact.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

pub type Rational = BigRational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrabilityError {
    #[error("degree of homogeneity must be nonzero")]
    ZeroDegree,
    #[error("family index {0} outside 1..=6")]
    NoSuchFamily(usize),
    #[error("cannot parse `{0}` as a rational")]
    Parse(String),
    #[error("{0}")]
    NotDarboux(String),
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `n`, `n/d` or a terminating decimal such as `-0.25`.
pub fn parse_rational(s: &str) -> Result<Rational, IntegrabilityError> {
    let t = s.trim();
    let err = || IntegrabilityError::Parse(s.to_string());
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = t.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let neg = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        let n: BigInt = digits.parse().map_err(|_| err())?;
        let q = Rational::new(n, BigInt::from(10u32).pow(frac.len() as u32));
        return Ok(if neg { -q } else { q });
    }
    t.parse::<BigInt>()
        .map(Rational::from_integer)
        .map_err(|_| err())
}

/// Exact square root of a non-negative rational, if it has one.
pub fn rational_sqrt(q: &Rational) -> Option<Rational> {
    if q.is_negative() {
        return None;
    }
    let n = q.numer().sqrt();
    let d = q.denom().sqrt();
    (&n * &n == *q.numer() && &d * &d == *q.denom()).then(|| Rational::new(n, d))
}

fn as_integer(q: &Rational) -> Option<BigInt> {
    q.is_integer().then(|| q.to_integer())
}

/// `k` in `K2`, i.e. `2/k` is an odd integer.
pub fn in_k2(k: &Rational) -> bool {
    if k.is_zero() {
        return false;
    }
    match as_integer(&(int(2) / k)) {
        Some(n) => n.is_odd(),
        None => false,
    }
}

/// Shift `s` of the families `I2..I6`.
pub fn family_shift(i: usize) -> Option<Rational> {
    match i {
        2 => Some(rat(1, 2)),
        3 => Some(rat(1, 3)),
        4 => Some(rat(1, 4)),
        5 => Some(rat(1, 5)),
        6 => Some(rat(2, 5)),
        _ => None,
    }
}

/// Element of `Ii(k)` for the integer `p`.
pub fn family_element(i: usize, k: &Rational, p: &BigInt) -> Result<Rational, IntegrabilityError> {
    if k.is_zero() {
        return Err(IntegrabilityError::ZeroDegree);
    }
    let p = Rational::from_integer(p.clone());
    if i == 1 {
        return Ok(&p + k / int(2) * &p * (&p - int(1)));
    }
    let s = family_shift(i).ok_or(IntegrabilityError::NoSuchFamily(i))?;
    let ps = &p + s;
    let km2 = k - int(2);
    Ok((int(4) * k * k * &ps * &ps - &km2 * &km2) / (int(8) * k))
}

/// Membership of `lambda` in `Ii(k)`; returns the integer witness `p`.
pub fn in_i_family(
    i: usize,
    k: &Rational,
    lambda: &Rational,
) -> Result<Option<BigInt>, IntegrabilityError> {
    if k.is_zero() {
        return Err(IntegrabilityError::ZeroDegree);
    }
    let candidates: Vec<Rational> = if i == 1 {
        // (k/2) p^2 + (1 - k/2) p - lambda = 0
        let b = int(1) - k / int(2);
        let disc = &b * &b + int(2) * k * lambda;
        match rational_sqrt(&disc) {
            Some(r) => vec![(-&b + &r) / k, (-&b - &r) / k],
            None => vec![],
        }
    } else {
        let s = family_shift(i).ok_or(IntegrabilityError::NoSuchFamily(i))?;
        let km2 = k - int(2);
        let q = (int(8) * k * lambda + &km2 * &km2) / (int(4) * k * k);
        match rational_sqrt(&q) {
            Some(r) => vec![&r - &s, -&r - &s],
            None => vec![],
        }
    };
    for c in candidates {
        if let Some(p) = as_integer(&c) {
            debug_assert_eq!(family_element(i, k, &p).as_ref(), Ok(lambda));
            return Ok(Some(p));
        }
    }
    Ok(None)
}

/// `k = ±a/(a l + b)` for some integer `l`.
fn in_special(k: &Rational, a: i64, b: i64) -> bool {
    match as_integer(&(int(a) / k)) {
        Some(n) => {
            let a = BigInt::from(a);
            let b = BigInt::from(b);
            (&n - &b).mod_floor(&a).is_zero() || (-&n - &b).mod_floor(&a).is_zero()
        }
        None => false,
    }
}

/// Families whose union bounds the eigenvalues when `k` is outside `K2`.
pub fn admissible_families(k: &Rational) -> Vec<usize> {
    let mut f = vec![1, 2];
    let mut add = |extra: &[usize]| {
        for &e in extra {
            if !f.contains(&e) {
                f.push(e);
            }
        }
    };
    if in_special(k, 3, 1) {
        add(&[3, 4, 5, 6]);
    }
    if in_special(k, 4, 1) {
        add(&[3]);
    }
    if in_special(k, 5, 1) {
        add(&[3, 5]);
    }
    if in_special(k, 5, 2) {
        add(&[3, 6]);
    }
    f.sort_unstable();
    f
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MembershipEntry {
    #[serde(serialize_with = "ser_rational")]
    pub lambda: Rational,
    pub family: usize,
    /// Whether the family is part of the admissible union for this `k`.
    pub admissible: bool,
    pub member: bool,
    #[serde(serialize_with = "ser_opt_int")]
    pub witness: Option<BigInt>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict")]
pub enum Verdict {
    /// Necessary conditions hold.
    Pass { via_k2: bool },
    /// The first eigenvalue outside the admissible union: not integrable.
    Fail {
        #[serde(serialize_with = "ser_rational")]
        witness: Rational,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictReport {
    #[serde(serialize_with = "ser_rational")]
    pub k: Rational,
    #[serde(serialize_with = "ser_rationals")]
    pub eigenvalues: Vec<Rational>,
    pub k_in_k2: bool,
    pub families_checked: Vec<usize>,
    pub verdict: Verdict,
    /// Membership of every eigenvalue in all six families.
    pub log: Vec<MembershipEntry>,
}

pub fn morales_ramis_verdict(
    k: &Rational,
    eigenvalues: &[Rational],
) -> Result<VerdictReport, IntegrabilityError> {
    if k.is_zero() {
        return Err(IntegrabilityError::ZeroDegree);
    }
    let k_in_k2 = in_k2(k);
    let families = admissible_families(k);
    let mut log = Vec::new();
    let mut first_bad = None;
    for lambda in eigenvalues {
        let mut ok = false;
        for i in 1..=6 {
            let witness = in_i_family(i, k, lambda)?;
            let admissible = families.contains(&i);
            ok |= admissible && witness.is_some();
            log.push(MembershipEntry {
                lambda: lambda.clone(),
                family: i,
                admissible,
                member: witness.is_some(),
                witness,
            });
        }
        if !ok && first_bad.is_none() {
            first_bad = Some(lambda.clone());
        }
    }
    let verdict = if k_in_k2 {
        Verdict::Pass { via_k2: true }
    } else {
        match first_bad {
            Some(witness) => Verdict::Fail { witness },
            None => Verdict::Pass { via_k2: false },
        }
    };
    Ok(VerdictReport {
        k: k.clone(),
        eigenvalues: eigenvalues.to_vec(),
        k_in_k2,
        families_checked: families,
        verdict,
        log,
    })
}

/// Darboux data for `V = sqrt(q^T A q)` with diagonal `A`, a potential of
/// degree one with minimal polynomial `F(q, u) = u^2 - q^T A q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DarbouxReport {
    #[serde(serialize_with = "ser_rationals")]
    pub d: Vec<Rational>,
    #[serde(serialize_with = "ser_rational")]
    pub c: Rational,
    /// `grad V(d) - d`, componentwise.
    #[serde(serialize_with = "ser_rationals")]
    pub gradient_residual: Vec<Rational>,
    #[serde(serialize_with = "ser_rational")]
    pub f_at_dc: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub du_f: Rational,
    /// `dF/dq + dF/du d`, which must vanish.
    #[serde(serialize_with = "ser_rationals")]
    pub dq_condition: Vec<Rational>,
    #[serde(skip)]
    pub hessian: [[Rational; 3]; 3],
    #[serde(serialize_with = "ser_rationals")]
    pub eigenvalues: Vec<Rational>,
    #[serde(serialize_with = "ser_rational")]
    pub k: Rational,
}

pub fn darboux_quadratic_root(
    a: &[Rational; 3],
    d: &[Rational; 3],
) -> Result<DarbouxReport, IntegrabilityError> {
    let ad: Vec<Rational> = a.iter().zip(d).map(|(a, x)| a * x).collect();
    let q: Rational = ad.iter().zip(d).map(|(u, x)| u * x).sum();
    let c = rational_sqrt(&q).ok_or_else(|| {
        IntegrabilityError::NotDarboux(format!("V(d)^2 = {q} is not a rational square"))
    })?;
    if c.is_zero() {
        return Err(IntegrabilityError::NotDarboux("d is a zero of V".into()));
    }
    let grad: Vec<Rational> = ad.iter().map(|u| u / &c).collect();
    let gradient_residual: Vec<Rational> = grad.iter().zip(d).map(|(g, x)| g - x).collect();
    let f_at_dc = &c * &c - &q;
    let du_f = int(2) * &c;
    let dq_condition: Vec<Rational> = ad
        .iter()
        .zip(d)
        .map(|(u, x)| -int(2) * u + &du_f * x)
        .collect();
    // H = A / V - (A q)(A q)^T / V^3
    let c3 = &c * &c * &c;
    let hessian: [[Rational; 3]; 3] = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let diag = if i == j { &a[i] / &c } else { Rational::zero() };
            diag - &ad[i] * &ad[j] / &c3
        })
    });
    let off_diagonal_zero = (0..3).all(|i| (0..3).all(|j| i == j || hessian[i][j].is_zero()));
    if !off_diagonal_zero {
        return Err(IntegrabilityError::NotDarboux(
            "Hessian is not diagonal at d; eigenvalues need a rational basis".into(),
        ));
    }
    let mut eigenvalues: Vec<Rational> = (0..3).map(|i| hessian[i][i].clone()).collect();
    eigenvalues.sort();
    Ok(DarbouxReport {
        d: d.to_vec(),
        c,
        gradient_residual,
        f_at_dc,
        du_f,
        dq_condition,
        hessian,
        eigenvalues,
        k: Rational::one(),
    })
}

/// The singular part `V1 = sqrt(z^2 + (x^2 + y^2)/4)` at `d = (1/2, 0, 0)`.
pub fn verify_darboux_v1() -> DarbouxReport {
    darboux_quadratic_root(
        &[rat(1, 4), rat(1, 4), int(1)],
        &[rat(1, 2), int(0), int(0)],
    )
    .expect("(1/2, 0, 0) is a Darboux point of V1")
}

fn ser_rational<S: serde::Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&q.to_string())
}

fn ser_rationals<S: serde::Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|q| q.to_string()))
}

fn ser_opt_int<S: serde::Serializer>(v: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
    match v {
        Some(p) => s.serialize_some(&p.to_string()),
        None => s.serialize_none(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k2_membership() {
        assert!(in_k2(&int(2)));
        assert!(!in_k2(&int(1)));
        assert!(in_k2(&rat(2, 5)));
        assert!(in_k2(&rat(-2, 3)));
        assert!(!in_k2(&rat(1, 2)));
    }

    #[test]
    fn family_examples() {
        assert_eq!(
            in_i_family(1, &int(1), &int(1)).unwrap(),
            Some(BigInt::from(1))
        );
        assert_eq!(in_i_family(1, &int(1), &int(4)).unwrap(), None);
        assert_eq!(
            in_i_family(2, &int(1), &int(3)).unwrap(),
            Some(BigInt::from(2))
        );
        for i in 1..=6 {
            assert_eq!(
                in_i_family(i, &int(1), &int(4)).unwrap(),
                None,
                "family {i}"
            );
        }
    }

    #[test]
    fn verdict_for_the_trap() {
        let r = morales_ramis_verdict(&int(1), &[int(0), int(1), int(4)]).unwrap();
        assert_eq!(r.verdict, Verdict::Fail { witness: int(4) });
        assert_eq!(r.families_checked, vec![1, 2]);
        let r = morales_ramis_verdict(&int(1), &[int(0), int(1), int(3)]).unwrap();
        assert_eq!(r.verdict, Verdict::Pass { via_k2: false });
        let r = morales_ramis_verdict(&int(2), &[int(7), rat(1, 3)]).unwrap();
        assert_eq!(r.verdict, Verdict::Pass { via_k2: true });
        assert!(morales_ramis_verdict(&int(0), &[]).is_err());
    }

    #[test]
    fn special_families() {
        assert_eq!(admissible_families(&int(3)), vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(admissible_families(&rat(-3, 2)), vec![1, 2, 3, 4, 5, 6]);
        assert_eq!(admissible_families(&int(4)), vec![1, 2, 3]);
        assert_eq!(admissible_families(&rat(5, 7)), vec![1, 2, 3, 6]);
        assert_eq!(admissible_families(&rat(5, 6)), vec![1, 2, 3, 5]);
        assert_eq!(admissible_families(&int(1)), vec![1, 2]);
    }

    #[test]
    fn darboux_point_of_v1() {
        let r = verify_darboux_v1();
        assert!(r.gradient_residual.iter().all(Zero::is_zero));
        assert!(r.dq_condition.iter().all(Zero::is_zero));
        assert!(r.f_at_dc.is_zero());
        assert!(!r.du_f.is_zero());
        assert_eq!(r.c, rat(1, 4));
        assert_eq!(r.eigenvalues, vec![int(0), int(1), int(4)]);
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("-0.25").unwrap(), rat(-1, 4));
        assert_eq!(parse_rational(" 7 ").unwrap(), int(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }
}
