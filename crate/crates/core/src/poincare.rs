//! Surface of section `z = 0` with upward crossings `p_z > 0`.
//!
//! Points are `(r, p_r)`. Crossings are bracketed between accepted steps,
//! located on the step interpolant and then polished with exact re-steps so
//! that `|z| < 1e-12`.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::analytic::radial::radial_turning_points;
use crate::dynamics::{
    cylindrical_system, CylindricalState, IntegrateOptions, PhaseState, StepFailure, Stepper,
};
use crate::potential::{PotentialParams, Rescaling};

/// Target for `|z|` at an emitted crossing.
pub const Z_TOL: f64 = 1e-12;
/// Default periodicity tolerance in the `(r, p_r)` plane.
pub const PERIODICITY_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SectionError {
    #[error("point outside energy surface: h - V_eff - p_r^2/2 = {0}")]
    OutsideEnergySurface(f64),
    #[error("crossing direction requires p_z > 0 (p_z = 0 here)")]
    ZeroVelocity,
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectionSpec {
    pub h: f64,
    pub p_phi: f64,
    pub n_crossings: usize,
}

impl SectionSpec {
    pub fn new(h: f64, p_phi: f64, n_crossings: usize) -> Result<Self, SectionError> {
        if n_crossings == 0 {
            return Err(SectionError::Invalid(
                "at least one crossing is required".into(),
            ));
        }
        if !(h.is_finite() && p_phi.is_finite()) {
            return Err(SectionError::Invalid(
                "energy and angular momentum must be finite".into(),
            ));
        }
        Ok(Self {
            h,
            p_phi,
            n_crossings,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectionPoint {
    pub seed_id: usize,
    pub crossing_index: usize,
    pub tau: f64,
    pub r: f64,
    pub p_r: f64,
    /// Integrated `p_z`, not the one reconstructed from the energy.
    pub p_z: f64,
    /// Residual `z` after polishing.
    pub z: f64,
}

/// Seed on the section: a point `(r, p_r)` with an id.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Seed {
    pub id: usize,
    pub r: f64,
    pub p_r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeedSection {
    pub seed: Seed,
    pub points: Vec<SectionPoint>,
    /// Set when the seed cannot cross the plane transversally.
    pub note: Option<String>,
    /// Set when integration stopped early; `points` holds what was found.
    pub aborted: Option<String>,
}

/// Total energy in the cylindrical chart. Negative `r` is allowed when
/// `p_phi = 0`, where the reduced system is the planar `(x, z)` flow.
pub fn energy(y: &[f64; 5], p_phi: f64, params: &PotentialParams) -> f64 {
    let [r, z, p_r, p_z, _] = *y;
    let cen = if p_phi == 0.0 {
        0.0
    } else {
        p_phi * p_phi / (r * r)
    };
    let q = r * r + 4.0 * z * z;
    0.5 * (p_r * p_r + p_z * p_z + cen) + 0.5 * params.sigma * q.sqrt() + 0.5 * params.delta * q
}

/// `2 (h - V_eff(r)) - p_r^2`, the `p_z^2` of the point on the section.
pub fn pz_squared(h: f64, p_phi: f64, r: f64, p_r: f64, params: &PotentialParams) -> f64 {
    2.0 * h - 2.0 * energy(&[r, 0.0, p_r, 0.0, 0.0], p_phi, params)
}

/// State on the section with `z = 0` and `p_z > 0` fixed by the energy.
pub fn seed_from_energy(
    h: f64,
    p_phi: f64,
    r: f64,
    p_r: f64,
    params: &PotentialParams,
) -> Result<PhaseState, SectionError> {
    if p_phi != 0.0 && r <= 0.0 {
        return Err(SectionError::Invalid(format!(
            "radius must be positive with p_phi != 0, got {r}"
        )));
    }
    let d = pz_squared(h, p_phi, r, p_r, params);
    if d < 0.0 {
        return Err(SectionError::OutsideEnergySurface(0.5 * d));
    }
    if d == 0.0 {
        return Err(SectionError::ZeroVelocity);
    }
    Ok(PhaseState::Cylindrical(CylindricalState {
        r,
        z: 0.0,
        phi: 0.0,
        p_r,
        p_z: d.sqrt(),
        p_phi,
    }))
}

/// Radii bounding the motion in the plane at `p_r = 0`.
pub fn plane_turning_points(
    h: f64,
    p_phi: f64,
    params: &PotentialParams,
) -> Result<(f64, f64), SectionError> {
    if params.eta > 0.0 {
        if let Ok(sc) = Rescaling::new(params) {
            if let Ok(tp) = radial_turning_points(sc.energy(h), sc.angular_momentum(p_phi)) {
                if !tp.degenerate {
                    // the closed form loses digits to cancellation when eta is small
                    let polish = |mut r: f64| {
                        for _ in 0..8 {
                            let v = energy(&[r, 0.0, 0.0, 0.0, 0.0], p_phi, params) - h;
                            let dv = -p_phi * p_phi / (r * r * r)
                                + 0.5 * params.sigma
                                + params.delta * r;
                            if dv == 0.0 {
                                break;
                            }
                            r -= v / dv;
                        }
                        r
                    };
                    let r1 = if p_phi == 0.0 {
                        0.0
                    } else {
                        polish(sc.length_back(tp.r1))
                    };
                    let r2 = polish(sc.length_back(tp.r2));
                    if r1.is_finite() && r2.is_finite() && (p_phi == 0.0 || r1 > 0.0) && r1 < r2 {
                        return Ok((r1, r2));
                    }
                }
            }
        }
    }
    // bracket both roots of h - V_eff around the minimum by bisection
    let v = |r: f64| energy(&[r, 0.0, 0.0, 0.0, 0.0], p_phi, params);
    let r_min = if p_phi == 0.0 {
        0.0
    } else {
        let (mut lo, mut hi) = (1e-300f64.max(p_phi.abs() * 1e-12), 1.0);
        let dv = |r: f64| -p_phi * p_phi / (r * r * r) + 0.5 * params.sigma + params.delta * r;
        while dv(hi) < 0.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if dv(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    if v(r_min) >= h {
        return Err(SectionError::OutsideEnergySurface(h - v(r_min)));
    }
    let root = |mut inside: f64, mut outside: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (inside + outside);
            if v(mid) < h {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        0.5 * (inside + outside)
    };
    let mut far = r_min.max(1.0);
    while v(far) < h {
        far *= 2.0;
    }
    let r2 = root(r_min, far);
    let r1 = if p_phi == 0.0 { 0.0 } else { root(r_min, 0.0) };
    Ok((r1, r2))
}

/// `n` seeds on `p_r = 0`, evenly spaced strictly inside the turning points.
pub fn default_seeds(
    h: f64,
    p_phi: f64,
    n: usize,
    params: &PotentialParams,
) -> Result<Vec<Seed>, SectionError> {
    let (r1, r2) = plane_turning_points(h, p_phi, params)?;
    Ok((0..n)
        .map(|k| Seed {
            id: k,
            r: r1 + (k as f64 + 0.5) / n as f64 * (r2 - r1),
            p_r: 0.0,
        })
        .collect())
}

/// Section of one seed.
pub fn section_for_seed(
    spec: &SectionSpec,
    seed: Seed,
    params: &PotentialParams,
    opts: &IntegrateOptions,
) -> SeedSection {
    let mut out = SeedSection {
        seed,
        points: Vec::new(),
        note: None,
        aborted: None,
    };
    if seed.r == 0.0 && seed.p_r == 0.0 && spec.p_phi == 0.0 {
        out.note = Some(
            "non-transversal: the seed moves on the z-axis and crosses the plane at the field zero"
                .into(),
        );
        return out;
    }
    let state = match seed_from_energy(spec.h, spec.p_phi, seed.r, seed.p_r, params) {
        Ok(PhaseState::Cylindrical(s)) => s,
        Ok(_) => unreachable!("section seeds are cylindrical"),
        Err(e) => {
            out.aborted = Some(e.to_string());
            return out;
        }
    };
    let p_phi = spec.p_phi;
    let tau_cap = 1e12;
    let mut st = match Stepper::new(
        cylindrical_system(p_phi, *params),
        0.0,
        state.reduced(),
        tau_cap,
        opts.stepper,
    ) {
        Ok(st) => st,
        Err(d) => {
            out.aborted = Some(d.to_string());
            return out;
        }
    };
    while out.points.len() < spec.n_crossings {
        if st.accepted >= opts.max_steps {
            out.aborted = Some("step budget exhausted".into());
            break;
        }
        let z_old = st.y[1];
        if let Err(d) = st.step(tau_cap) {
            out.aborted = Some(d.to_string());
            break;
        }
        if z_old < 0.0 && st.y[1] >= 0.0 {
            match refine(&mut st) {
                Ok((tau, y)) => out.points.push(SectionPoint {
                    seed_id: seed.id,
                    crossing_index: out.points.len(),
                    tau,
                    r: y[0],
                    p_r: y[2],
                    p_z: y[3],
                    z: y[1],
                }),
                Err(d) => {
                    out.aborted = Some(d.to_string());
                    break;
                }
            }
        }
    }
    out
}

/// Locate `z = 0` inside the last accepted step.
fn refine<F>(st: &mut Stepper<F, 5>) -> Result<(f64, [f64; 5]), StepFailure>
where
    F: FnMut(f64, &[f64; 5]) -> Result<[f64; 5], crate::dynamics::RhsFailure>,
{
    let (t0, _) = st.last_step_start();
    let (t1, y1) = (st.t, st.y);
    if y1[1] == 0.0 {
        return Ok((t1, y1));
    }
    let dense = st.dense()?;
    let (mut lo, mut hi) = (t0, t1);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if dense.eval(mid)[1] < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * t1.abs().max(1.0) {
            break;
        }
    }
    let mut t = 0.5 * (lo + hi);
    let mut y = st.restep_from_last(t - t0)?;
    for _ in 0..6 {
        if y[1].abs() < 0.01 * Z_TOL || y[3] == 0.0 {
            break;
        }
        let next = t - y[1] / y[3];
        if !(next > t0 && next <= t1) {
            break;
        }
        t = next;
        y = st.restep_from_last(t - t0)?;
    }
    Ok((t, y))
}

/// Sections of all seeds, in parallel on the current rayon pool. Results are
/// ordered by seed position in `seeds`.
pub fn compute_section(
    spec: &SectionSpec,
    seeds: &[Seed],
    params: &PotentialParams,
    opts: &IntegrateOptions,
) -> Vec<SeedSection> {
    seeds
        .par_iter()
        .map(|&s| section_for_seed(spec, s, params, opts))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Periodicity {
    pub periodic: bool,
    pub period: Option<usize>,
}

/// Smallest `k` with `|P_{i+k} - P_i| < tol` for every sampled `i`.
pub fn detect_periodicity(points: &[(f64, f64)], tol: f64) -> Periodicity {
    let n = points.len();
    for k in 1..n {
        let ok = (0..n - k).all(|i| {
            let (a, b) = (points[i], points[i + k]);
            ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt() < tol
        });
        if ok {
            return Periodicity {
                periodic: true,
                period: Some(k),
            };
        }
    }
    Periodicity {
        periodic: false,
        period: None,
    }
}

/// Mean distance `|P_{i+k} - P_i|` for `k = 1..=max_k`.
pub fn return_distances(points: &[(f64, f64)], max_k: usize) -> Vec<f64> {
    (1..=max_k.min(points.len().saturating_sub(1)))
        .map(|k| {
            let n = points.len() - k;
            (0..n)
                .map(|i| {
                    let (a, b) = (points[i], points[i + k]);
                    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
                })
                .sum::<f64>()
                / n as f64
        })
        .collect()
}

/// Number of islands visited in turn by an orbit on a resonant chain: the
/// smallest `k > 1` whose mean return distance is below `ratio` times the
/// one-step distance. `None` if no such `k <= max_k`.
pub fn island_count(points: &[(f64, f64)], max_k: usize, ratio: f64) -> Option<usize> {
    let d = return_distances(points, max_k);
    let first = *d.first()?;
    d.iter()
        .enumerate()
        .skip(1)
        .find(|(_, &dk)| dk < ratio * first)
        .map(|(i, _)| i + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::published_orbit;
    use crate::potential::DeltaSource;

    fn params() -> PotentialParams {
        PotentialParams::published(DeltaSource::Caption)
    }

    #[test]
    fn seed_reconstructs_published_momentum() {
        let s = seed_from_energy(0.125, 0.01, 0.112615, 0.0, &params())
            .unwrap()
            .cylindrical();
        assert!((s.p_z - 0.430698).abs() < 2e-6, "{}", s.p_z);
        let e = energy(&s.reduced(), 0.01, &params());
        assert!((e - 0.125).abs() < 1e-14);
    }

    #[test]
    fn zero_discriminant_is_rejected() {
        let p = params();
        let d = pz_squared(0.125, 0.01, 0.2, 0.0, &p);
        let p_r = d.sqrt();
        assert!(matches!(
            seed_from_energy(0.125, 0.01, 0.2, p_r, &p),
            Err(SectionError::ZeroVelocity) | Err(SectionError::OutsideEnergySurface(_))
        ));
        assert!(seed_from_energy(0.125, 0.01, 0.2, 1.0, &p).is_err());
    }

    #[test]
    fn crossings_lie_on_section_and_energy_surface() {
        let p = params();
        let spec = SectionSpec::new(0.125, 0.01, 20).unwrap();
        let c = published_orbit("Q1").unwrap().to_cylindrical();
        let seed = Seed {
            id: 3,
            r: c.r,
            p_r: c.p_r,
        };
        let out = section_for_seed(&spec, seed, &p, &IntegrateOptions::default());
        assert_eq!(out.points.len(), 20);
        let mut last = 0.0;
        for pt in &out.points {
            assert!(pt.z.abs() < Z_TOL);
            assert!(pt.p_z > 0.0);
            assert!(pt.tau > last);
            last = pt.tau;
            let e = energy(&[pt.r, pt.z, pt.p_r, pt.p_z, 0.0], 0.01, &p);
            assert!((e - 0.125).abs() < 1e-9);
        }
    }

    #[test]
    fn axis_seed_is_non_transversal() {
        let spec = SectionSpec::new(0.125, 0.0, 5).unwrap();
        let out = section_for_seed(
            &spec,
            Seed {
                id: 0,
                r: 0.0,
                p_r: 0.0,
            },
            &params(),
            &IntegrateOptions::default(),
        );
        assert!(out.points.is_empty());
        assert!(out.note.unwrap().contains("non-transversal"));
    }

    #[test]
    fn periodicity_of_fixed_point() {
        let pts = vec![(0.3, 0.1); 5];
        assert_eq!(
            detect_periodicity(&pts, 1e-6),
            Periodicity {
                periodic: true,
                period: Some(1)
            }
        );
        let pts: Vec<_> = (0..6)
            .map(|i| {
                if i % 3 == 0 {
                    (0.0, 0.0)
                } else {
                    (i as f64, 1.0)
                }
            })
            .collect();
        assert!(!detect_periodicity(&pts, 1e-6).periodic);
        let pts: Vec<_> = (0..9).map(|i| ((i % 3) as f64, 0.0)).collect();
        assert_eq!(detect_periodicity(&pts, 1e-6).period, Some(3));
    }

    #[test]
    fn turning_points_bound_the_plane() {
        let p = params();
        let (r1, r2) = plane_turning_points(0.125, 0.01, &p).unwrap();
        assert!(0.0 < r1 && r1 < r2);
        assert!(pz_squared(0.125, 0.01, r1, 0.0, &p).abs() < 1e-9);
        assert!(pz_squared(0.125, 0.01, r2, 0.0, &p).abs() < 1e-9);
        let seeds = default_seeds(0.125, 0.01, 4, &p).unwrap();
        assert!(seeds.iter().all(|s| s.r > r1 && s.r < r2));
    }
}
