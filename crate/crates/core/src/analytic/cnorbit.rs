//! Radial libration in the plane z = 0 written as a Mobius map of `cn`.
//!
//! Variables have sigma scaled to one and keep `eta`: the radial energy is
//! `p_r^2/2 + c^2/(2 r^2) + r/2 + eta r^2/2`. The orbit starts at the turning
//! point `u`. With `Q(r) = (r - u)/u^2 [c^2 (r + u) - r^2 u^2 (1 + eta (r + u))]`
//! the curve `r(s) = (N1 + N2 cn(omega s | m)) / (D1c + D2c cn(omega s | m))`
//! solves `(dr/ds)^2 = Q(r)`, and `Q = r^2 (dr/dtau)^2`, so the physical time
//! follows from `dtau = r ds`.

use serde::Serialize;

use super::elliptic::{cn_period, sncndn};
use super::poly::{real_roots_in, Poly};
use super::quad::GaussLegendre;
use super::AnalyticError;

const PANELS: usize = 64;
const GL_NODES: usize = 16;

/// One real solution of the `(m, omega)` system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CnCandidate {
    pub m: f64,
    pub omega: f64,
    pub p1: f64,
    pub p2: f64,
    /// Both residuals small relative to the size of their terms.
    pub consistent: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CnOrbit {
    pub u: f64,
    pub c_z: f64,
    pub eta: f64,
    pub h_r: f64,
    pub m: f64,
    pub omega: f64,
    pub n1: f64,
    pub n2: f64,
    pub d1c: f64,
    pub d2c: f64,
    /// Every real candidate examined, the chosen one included.
    pub candidates: Vec<CnCandidate>,
    /// Period in the Sundman parameter `s`.
    pub s_period: f64,
    /// Radial period in trap time.
    pub tau_period: f64,
    #[serde(skip)]
    panel_tau: Vec<f64>,
    #[serde(skip)]
    gl: GaussLegendre,
}

struct Coefficients {
    s: f64,
    c: f64,
}

fn bracket(u: f64, c2: f64, eta: f64) -> Coefficients {
    let u2 = u * u;
    let u3 = u2 * u;
    let u5 = u3 * u2;
    let u6 = u3 * u3;
    let s = c2 * c2 + 2.0 * c2 * u3 * (7.0 * eta * u + 1.0) + u6 * (eta * u + 1.0).powi(2);
    let a = 2.0 * eta * u2 * u2 + u3 - 2.0 * c2;
    let b = 4.0 * c2 * c2 * eta
        + c2 * u2 * (4.0 * eta * u * (5.0 - 2.0 * eta * u) + 1.0)
        + 4.0 * u5 * (eta * u + 1.0).powi(3);
    Coefficients {
        s,
        c: c2 * a * a * b,
    }
}

/// Degree-12 factor of the resultant in omega, ascending coefficients.
pub fn resultant_polynomial(u: f64, c_z: f64, eta: f64) -> Poly {
    let k = bracket(u, c_z * c_z, eta);
    let u4 = u.powi(4);
    let mut coeffs = vec![0.0; 13];
    coeffs[0] = k.c;
    coeffs[8] = -u4 * k.s;
    coeffs[12] = u4 * u4;
    Poly::new(coeffs)
}

fn p1_terms(m: f64, omega: f64, u: f64, c2: f64, eta: f64) -> (f64, f64) {
    let k = bracket(u, c2, eta);
    let t = (16.0 * (m - 1.0) * m + 1.0) * u.powi(4) * omega.powi(4);
    (k.s - t, k.s.abs() + t.abs())
}

fn p2_terms(m: f64, omega: f64, u: f64, c2: f64, eta: f64) -> (f64, f64) {
    let u3 = u * u * u;
    let u4 = u3 * u;
    let u6 = u3 * u3;
    let w2 = omega * omega;
    let w4 = w2 * w2;
    let terms = [
        96.0 * c2 * c2 * c2,
        96.0 * c2 * c2 * u3 * (13.0 * eta * u + 2.0),
        2.0 * (16.0 * (m - 1.0) * m + 1.0) * u4 * w4 * (eta * u4 + u3 - 47.0 * c2),
        3.0 * c2 * u6 * (32.0 * eta * u + 23.0),
        2.0 * (2.0 * m * (16.0 * m * (2.0 * m - 3.0) + 15.0) + 1.0) * u6 * w4 * w2,
    ];
    (terms.iter().sum(), terms.iter().map(|t| t.abs()).sum())
}

/// `p1(m, omega)`.
pub fn p1(m: f64, omega: f64, u: f64, c_z: f64, eta: f64) -> f64 {
    p1_terms(m, omega, u, c_z * c_z, eta).0
}

/// `p2(m, omega)`.
pub fn p2(m: f64, omega: f64, u: f64, c_z: f64, eta: f64) -> f64 {
    p2_terms(m, omega, u, c_z * c_z, eta).0
}

/// Newton on `(p1, p2) = 0`, kept only while the residual shrinks.
fn polish(m: f64, omega: f64, u: f64, c2: f64, eta: f64) -> (f64, f64) {
    let norm = |m: f64, w: f64| {
        let (a, sa) = p1_terms(m, w, u, c2, eta);
        let (b, sb) = p2_terms(m, w, u, c2, eta);
        (a / sa).abs().max((b / sb).abs())
    };
    let (mut m, mut w) = (m, omega);
    let mut best = norm(m, w);
    let u3 = u * u * u;
    let u4 = u3 * u;
    let u6 = u3 * u3;
    for _ in 0..8 {
        let (f1, _) = p1_terms(m, w, u, c2, eta);
        let (f2, _) = p2_terms(m, w, u, c2, eta);
        let q = 16.0 * m * m - 16.0 * m + 1.0;
        let cub = 64.0 * m * m * m - 96.0 * m * m + 30.0 * m + 1.0;
        let kk = eta * u4 + u3 - 47.0 * c2;
        let w3 = w * w * w;
        let j11 = -(32.0 * m - 16.0) * u4 * w3 * w;
        let j12 = -4.0 * q * u4 * w3;
        let j21 = 2.0 * (32.0 * m - 16.0) * u4 * w3 * w * kk
            + 2.0 * (192.0 * m * m - 192.0 * m + 30.0) * u6 * w3 * w3;
        let j22 = 8.0 * q * u4 * w3 * kk + 12.0 * cub * u6 * w3 * w * w;
        let det = j11 * j22 - j12 * j21;
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dm = (f1 * j22 - f2 * j12) / det;
        let dw = (j11 * f2 - j21 * f1) / det;
        let (nm, nw) = (m - dm, w - dw);
        let n = norm(nm, nw);
        if !(n < best) {
            break;
        }
        m = nm;
        w = nw;
        best = n;
    }
    (m, w)
}

/// All real `(m, omega)` with `omega > 0` from the resultant and `p1`.
pub fn candidates(u: f64, c_z: f64, eta: f64) -> Vec<CnCandidate> {
    let c2 = c_z * c_z;
    let k = bracket(u, c2, eta);
    let u4 = u.powi(4);
    let mut out = Vec::new();
    for omega in real_roots_in(&resultant_polynomial(u, c_z, eta), Some(0.0), None) {
        let w4 = omega.powi(4);
        let disc = 3.0 + k.s / (u4 * w4);
        if disc < 0.0 {
            continue;
        }
        for sign in [1.0, -1.0] {
            let m0 = 0.5 + sign * disc.sqrt() / 4.0;
            let (m, omega) = polish(m0, omega, u, c2, eta);
            let (r1, s1) = p1_terms(m, omega, u, c2, eta);
            let (r2, s2) = p2_terms(m, omega, u, c2, eta);
            let consistent = (r1 / s1).abs() < 1e-10 && (r2 / s2).abs() < 1e-10;
            out.push(CnCandidate {
                m,
                omega,
                p1: r1,
                p2: r2,
                consistent,
            });
        }
    }
    out
}

fn preference(m: f64) -> u8 {
    if (0.0..=1.0).contains(&m) {
        0
    } else if m < 0.0 {
        1
    } else {
        2
    }
}

pub fn solve_cn_orbit(u: f64, c_z: f64, eta: f64) -> Result<CnOrbit, AnalyticError> {
    if !(u.is_finite() && u > 0.0) {
        return Err(AnalyticError::Domain(format!(
            "turning radius must be positive, got {u}"
        )));
    }
    if !(c_z.is_finite() && c_z != 0.0) {
        return Err(AnalyticError::Domain(
            "a libration needs nonzero angular momentum".into(),
        ));
    }
    if !(eta.is_finite() && eta >= 0.0) {
        return Err(AnalyticError::Domain(format!(
            "eta must be non-negative, got {eta}"
        )));
    }
    let c2 = c_z * c_z;
    // V_eff'(u) = 0 is the circular orbit, which has no cn form
    let force = -c2 / u.powi(3) + 0.5 + eta * u;
    if force.abs() <= 1e-12 * (c2 / u.powi(3)).max(0.5) {
        return Err(AnalyticError::Domain(
            "turning radius is the circular-orbit radius".into(),
        ));
    }
    let all = candidates(u, c_z, eta);
    let chosen = all
        .iter()
        .filter(|c| c.consistent && (c.m - 1.0).abs() > 1e-12)
        .min_by(|a, b| {
            preference(a.m)
                .cmp(&preference(b.m))
                .then(a.p2.abs().total_cmp(&b.p2.abs()))
        })
        .copied()
        .ok_or_else(|| AnalyticError::NoRealSolution {
            candidates: all.clone(),
        })?;
    let (m, w) = (chosen.m, chosen.omega);
    let u2 = u * u;
    let u3 = u2 * u;
    let w2 = w * w;
    let n1 = 5.0 * c2 * u - u3 * ((eta * u + 1.0) * u + (4.0 * m - 5.0) * w2);
    let n2 = u3 * ((eta * u + 1.0) * u + (4.0 * m + 1.0) * w2) - 5.0 * c2 * u;
    let d1c = u2 * (u * (5.0 * eta * u + 2.0) + (5.0 - 4.0 * m) * w2) - c2;
    let d2c = c2 + u2 * ((4.0 * m + 1.0) * w2 - u * (5.0 * eta * u + 2.0));
    let s_period = cn_period(m) / w;
    let mut orbit = CnOrbit {
        u,
        c_z,
        eta,
        h_r: (c2 + eta * u2 * u2 + u3) / (2.0 * u2),
        m,
        omega: w,
        n1,
        n2,
        d1c,
        d2c,
        candidates: all,
        s_period,
        tau_period: 0.0,
        panel_tau: Vec::with_capacity(PANELS + 1),
        gl: GaussLegendre::new(GL_NODES),
    };
    let ds = s_period / PANELS as f64;
    let mut acc = 0.0;
    orbit.panel_tau.push(0.0);
    for k in 0..PANELS {
        let a = k as f64 * ds;
        acc += orbit.gl.integrate(a, a + ds, |s| orbit.r_of_s(s));
        orbit.panel_tau.push(acc);
    }
    orbit.tau_period = acc;
    if !orbit.tau_period.is_finite() || orbit.tau_period <= 0.0 {
        return Err(AnalyticError::Domain("radial period is not finite".into()));
    }
    Ok(orbit)
}

impl CnOrbit {
    fn cn_parts(&self, s: f64) -> (f64, f64, f64) {
        sncndn(self.omega * s, self.m).expect("finite argument")
    }

    pub fn r_of_s(&self, s: f64) -> f64 {
        let (_, cn, _) = self.cn_parts(s);
        (self.n1 + self.n2 * cn) / (self.d1c + self.d2c * cn)
    }

    pub fn dr_ds(&self, s: f64) -> f64 {
        let (sn, cn, dn) = self.cn_parts(s);
        let den = self.d1c + self.d2c * cn;
        let dcn = -self.omega * sn * dn;
        (self.n2 * self.d1c - self.n1 * self.d2c) / (den * den) * dcn
    }

    /// `Q(r)` of the printed first integral.
    pub fn q_of_r(&self, r: f64) -> f64 {
        let (u, c2, eta) = (self.u, self.c_z * self.c_z, self.eta);
        (r - u) / (u * u) * (c2 * (r + u) - r * r * u * u * (1.0 + eta * (r + u)))
    }

    /// Trap time elapsed at Sundman parameter `s`.
    pub fn tau_of_s(&self, s: f64) -> f64 {
        let n = (s / self.s_period).floor();
        let rem = s - n * self.s_period;
        let ds = self.s_period / PANELS as f64;
        let k = ((rem / ds) as usize).min(PANELS - 1);
        let a = k as f64 * ds;
        n * self.tau_period + self.panel_tau[k] + self.gl.integrate(a, rem, |x| self.r_of_s(x))
    }

    /// Inverse of [`Self::tau_of_s`].
    pub fn s_of_tau(&self, tau: f64) -> f64 {
        let n = (tau / self.tau_period).floor();
        let rem = tau - n * self.tau_period;
        let k = match self.panel_tau.binary_search_by(|v| v.total_cmp(&rem)) {
            Ok(i) => i.min(PANELS - 1),
            Err(i) => i.saturating_sub(1).min(PANELS - 1),
        };
        let ds = self.s_period / PANELS as f64;
        let (mut lo, mut hi) = (k as f64 * ds, (k + 1) as f64 * ds);
        let mut s =
            lo + ds * (rem - self.panel_tau[k]) / (self.panel_tau[k + 1] - self.panel_tau[k]);
        for _ in 0..60 {
            let f = self.tau_of_s(s) - rem;
            if f > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let next = s - f / self.r_of_s(s);
            let next = if next > lo && next < hi {
                next
            } else {
                0.5 * (lo + hi)
            };
            if (next - s).abs() <= 1e-15 * s.abs().max(ds) {
                s = next;
                break;
            }
            s = next;
        }
        n * self.s_period + s
    }

    pub fn r_of_tau(&self, tau: f64) -> f64 {
        self.r_of_s(self.s_of_tau(tau))
    }

    /// `dr/dtau` at trap time `tau`.
    pub fn rdot_of_tau(&self, tau: f64) -> f64 {
        let s = self.s_of_tau(tau);
        self.dr_ds(s) / self.r_of_s(s)
    }

    /// `|rdot^2 - 2 (h_r - V_eff(r))|` at trap time `tau`.
    pub fn ode_residual(&self, tau: f64) -> f64 {
        let s = self.s_of_tau(tau);
        let r = self.r_of_s(s);
        let rd = self.dr_ds(s) / r;
        let v = 0.5 * self.c_z * self.c_z / (r * r) + 0.5 * r + 0.5 * self.eta * r * r;
        (rd * rd - 2.0 * (self.h_r - v)).abs()
    }

    pub fn p1_residual(&self) -> f64 {
        p1(self.m, self.omega, self.u, self.c_z, self.eta)
    }

    pub fn p2_residual(&self) -> f64 {
        p2(self.m, self.omega, self.u, self.c_z, self.eta)
    }

    /// The other turning point, reached at half the period.
    pub fn opposite_turning_point(&self) -> f64 {
        self.r_of_s(0.5 * self.s_period)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn starts_at_turning_point() {
        let o = solve_cn_orbit(0.3, 0.01, 0.05).unwrap();
        assert!((o.r_of_s(0.0) - 0.3).abs() < 1e-15);
        assert!(o.dr_ds(0.0).abs() < 1e-15);
        assert!(o.p1_residual().abs() < 1e-10 && o.p2_residual().abs() < 1e-10);
    }

    #[test]
    fn sundman_form_satisfies_first_integral() {
        let o = solve_cn_orbit(0.3, 0.01, 0.05).unwrap();
        for k in 0..50 {
            let s = k as f64 * o.s_period / 50.0;
            let d = o.dr_ds(s);
            assert!((d * d - o.q_of_r(o.r_of_s(s))).abs() < 1e-12, "s={s}");
        }
    }

    #[test]
    fn time_map_round_trips() {
        let o = solve_cn_orbit(0.3, 0.01, 0.05).unwrap();
        for tau in [0.0, 0.4, 1.7, o.tau_period * 0.99, o.tau_period * 2.3] {
            let s = o.s_of_tau(tau);
            assert!((o.tau_of_s(s) - tau).abs() < 1e-12, "tau={tau}");
        }
    }

    #[test]
    fn every_consistent_candidate_gives_the_same_curve() {
        let all = candidates(0.3, 0.01, 0.05);
        let good: Vec<_> = all.iter().filter(|c| c.consistent).collect();
        assert!(good.len() >= 2);
        let o = solve_cn_orbit(0.3, 0.01, 0.05).unwrap();
        for c in good {
            let r = |s: f64| {
                let (_, cn, _) = sncndn(c.omega * s, c.m).unwrap();
                let (m, w, u, c2, eta): (f64, f64, f64, f64, f64) = (c.m, c.omega, 0.3, 1e-4, 0.05);
                let n1 = 5.0 * c2 * u - u.powi(3) * ((eta * u + 1.0) * u + (4.0 * m - 5.0) * w * w);
                let n2 = u.powi(3) * ((eta * u + 1.0) * u + (4.0 * m + 1.0) * w * w) - 5.0 * c2 * u;
                let d1 = u * u * (u * (5.0 * eta * u + 2.0) + (5.0 - 4.0 * m) * w * w) - c2;
                let d2 = c2 + u * u * ((4.0 * m + 1.0) * w * w - u * (5.0 * eta * u + 2.0));
                (n1 + n2 * cn) / (d1 + d2 * cn)
            };
            for s in [0.0, 0.3, 1.1, 2.9] {
                assert!((r(s) - o.r_of_s(s)).abs() < 1e-12, "m={} s={s}", c.m);
            }
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(solve_cn_orbit(-1.0, 0.01, 0.05).is_err());
        assert!(solve_cn_orbit(0.3, 0.0, 0.05).is_err());
    }
}
