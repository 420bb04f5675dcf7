//! Adaptive embedded Runge-Kutta stepper with dense output.

use serde::{Deserialize, Serialize};

use super::tableau::{dop853, dopri5};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Dormand-Prince 5(4) with a 4th-order interpolant.
    Dopri5,
    /// Dormand-Prince 8(5,3) with a 7th-order interpolant.
    #[default]
    Dop853,
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dopri5" => Ok(Self::Dopri5),
            "dop853" => Ok(Self::Dop853),
            _ => Err(format!("unknown method `{s}` (expected dopri5 or dop853)")),
        }
    }
}

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;

/// Failure reported by a right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub enum RhsFailure {
    /// The state is too close to a singular point; a shorter step may avoid it.
    NearSingular(String),
    /// Unrecoverable.
    Fatal(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepFailure {
    /// Step size fell below the floor.
    Underflow {
        t: f64,
        h: f64,
        reason: String,
    },
    Fatal {
        t: f64,
        reason: String,
    },
}

impl std::fmt::Display for StepFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StepFailure::Underflow { t, h, reason } => {
                write!(f, "step size underflow at tau = {t} (h = {h:e}): {reason}")
            }
            StepFailure::Fatal { t, reason } => {
                write!(f, "right-hand side failed at tau = {t}: {reason}")
            }
        }
    }
}

/// Interpolant over one accepted step.
#[derive(Debug, Clone, PartialEq)]
pub enum Dense<const N: usize> {
    /// `y(t0 + x h) = y0 + h * sum_k q[k] x^(k+1)`.
    Dopri5 {
        t0: f64,
        h: f64,
        y0: [f64; N],
        q: [[f64; N]; 4],
    },
    /// Nested Horner form over alternating `x` and `1 - x` factors.
    Dop853 {
        t0: f64,
        h: f64,
        y0: [f64; N],
        f: [[f64; N]; 7],
    },
}

impl<const N: usize> Dense<N> {
    pub fn t0(&self) -> f64 {
        match self {
            Dense::Dopri5 { t0, .. } | Dense::Dop853 { t0, .. } => *t0,
        }
    }

    pub fn h(&self) -> f64 {
        match self {
            Dense::Dopri5 { h, .. } | Dense::Dop853 { h, .. } => *h,
        }
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        match self {
            Dense::Dopri5 { t0, h, y0, q } => {
                let x = (t - t0) / h;
                let mut out = *y0;
                for i in 0..N {
                    let mut acc = 0.0;
                    for k in (0..4).rev() {
                        acc = (acc + q[k][i]) * x;
                    }
                    out[i] += h * acc;
                }
                out
            }
            Dense::Dop853 { t0, h, y0, f } => {
                let x = (t - t0) / h;
                let mut y = [0.0; N];
                for (j, fk) in f.iter().rev().enumerate() {
                    let w = if j % 2 == 0 { x } else { 1.0 - x };
                    for i in 0..N {
                        y[i] = (y[i] + fk[i]) * w;
                    }
                }
                for i in 0..N {
                    y[i] += y0[i];
                }
                y
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub method: Method,
    /// Smallest step attempted after a near-singular rejection.
    pub h_floor: f64,
    pub h_max: f64,
}

impl Default for StepperOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-12,
            method: Method::Dop853,
            h_floor: 1e-14,
            h_max: f64::INFINITY,
        }
    }
}

/// Forward-in-time adaptive integrator for `y' = f(t, y)`.
pub struct Stepper<F, const N: usize>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], RhsFailure>,
{
    f: F,
    opts: StepperOptions,
    pub t: f64,
    pub y: [f64; N],
    fy: [f64; N],
    h: f64,
    // stages of the last accepted step (FSAL stage last)
    k: Vec<[f64; N]>,
    t_old: f64,
    y_old: [f64; N],
    h_last: f64,
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

fn rms<const N: usize>(v: &[f64; N]) -> f64 {
    (v.iter().map(|x| x * x).sum::<f64>() / N as f64).sqrt()
}

impl<F, const N: usize> Stepper<F, N>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N], RhsFailure>,
{
    pub fn new(
        mut f: F,
        t0: f64,
        y0: [f64; N],
        t_end: f64,
        opts: StepperOptions,
    ) -> Result<Self, StepFailure> {
        let fy = f(t0, &y0).map_err(|e| match e {
            RhsFailure::NearSingular(reason) | RhsFailure::Fatal(reason) => {
                StepFailure::Fatal { t: t0, reason }
            }
        })?;
        let mut s = Self {
            f,
            opts,
            t: t0,
            y: y0,
            fy,
            h: 0.0,
            k: Vec::new(),
            t_old: t0,
            y_old: y0,
            h_last: 0.0,
            accepted: 0,
            rejected: 0,
            evaluations: 1,
        };
        s.h = s.initial_step(t_end - t0);
        Ok(s)
    }

    fn order(&self) -> f64 {
        match self.opts.method {
            Method::Dopri5 => 4.0,
            Method::Dop853 => 7.0,
        }
    }

    fn initial_step(&mut self, span: f64) -> f64 {
        if span <= 0.0 {
            return 0.0;
        }
        let scale: [f64; N] =
            std::array::from_fn(|i| self.opts.abs_tol + self.y[i].abs() * self.opts.rel_tol);
        let d0 = rms::<N>(&std::array::from_fn(|i| self.y[i] / scale[i]));
        let d1 = rms::<N>(&std::array::from_fn(|i| self.fy[i] / scale[i]));
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        h0 = h0.min(span);
        let y1: [f64; N] = std::array::from_fn(|i| self.y[i] + h0 * self.fy[i]);
        let f1 = (self.f)(self.t + h0, &y1);
        self.evaluations += 1;
        let d2 = match f1 {
            Ok(f1) => rms::<N>(&std::array::from_fn(|i| (f1[i] - self.fy[i]) / scale[i])) / h0,
            Err(_) => return h0.min(self.opts.h_max),
        };
        let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(1.0 / (self.order() + 1.0))
        };
        (100.0 * h0).min(h1).min(span).min(self.opts.h_max)
    }

    fn eval(&mut self, t: f64, y: &[f64; N]) -> Result<[f64; N], RhsFailure> {
        self.evaluations += 1;
        (self.f)(t, y)
    }

    /// Attempt a step of size `h`; returns (y_new, error_norm, stages).
    fn attempt(&mut self, h: f64) -> Result<([f64; N], f64, Vec<[f64; N]>), RhsFailure> {
        let t = self.t;
        let y = self.y;
        let scale_of = |yn: &[f64; N], opts: &StepperOptions| -> [f64; N] {
            std::array::from_fn(|i| opts.abs_tol + y[i].abs().max(yn[i].abs()) * opts.rel_tol)
        };
        match self.opts.method {
            Method::Dopri5 => {
                let mut k = vec![self.fy];
                for s in 1..6 {
                    let dy: [f64; N] = std::array::from_fn(|i| {
                        (0..s).map(|j| dopri5::A[s][j] * k[j][i]).sum::<f64>() * h
                    });
                    let ys: [f64; N] = std::array::from_fn(|i| y[i] + dy[i]);
                    k.push(self.eval(t + dopri5::C[s] * h, &ys)?);
                }
                let y_new: [f64; N] = std::array::from_fn(|i| {
                    y[i] + h * (0..6).map(|j| dopri5::B[j] * k[j][i]).sum::<f64>()
                });
                k.push(self.eval(t + h, &y_new)?);
                let scale = scale_of(&y_new, &self.opts);
                let err: [f64; N] = std::array::from_fn(|i| {
                    h * (0..7).map(|j| dopri5::E[j] * k[j][i]).sum::<f64>() / scale[i]
                });
                Ok((y_new, rms(&err), k))
            }
            Method::Dop853 => {
                let mut k = vec![self.fy];
                for s in 1..12 {
                    let dy: [f64; N] = std::array::from_fn(|i| {
                        (0..s).map(|j| dop853::A[s][j] * k[j][i]).sum::<f64>() * h
                    });
                    let ys: [f64; N] = std::array::from_fn(|i| y[i] + dy[i]);
                    k.push(self.eval(t + dop853::C[s] * h, &ys)?);
                }
                let y_new: [f64; N] = std::array::from_fn(|i| {
                    y[i] + h * (0..12).map(|j| dop853::B[j] * k[j][i]).sum::<f64>()
                });
                k.push(self.eval(t + h, &y_new)?);
                let scale = scale_of(&y_new, &self.opts);
                let e5: [f64; N] = std::array::from_fn(|i| {
                    (0..13).map(|j| dop853::E5[j] * k[j][i]).sum::<f64>() / scale[i]
                });
                let e3: [f64; N] = std::array::from_fn(|i| {
                    (0..13).map(|j| dop853::E3[j] * k[j][i]).sum::<f64>() / scale[i]
                });
                let n5: f64 = e5.iter().map(|x| x * x).sum();
                let n3: f64 = e3.iter().map(|x| x * x).sum();
                let norm = if n5 == 0.0 && n3 == 0.0 {
                    0.0
                } else {
                    h.abs() * n5 / ((n5 + 0.01 * n3) * N as f64).sqrt()
                };
                Ok((y_new, norm, k))
            }
        }
    }

    /// Advance by one accepted step, never past `t_end`.
    pub fn step(&mut self, t_end: f64) -> Result<(), StepFailure> {
        let exponent = -1.0 / (self.order() + 1.0);
        let mut h = self.h.min(self.opts.h_max);
        let mut rejected_once = false;
        loop {
            let min_step = 10.0 * (self.t.next_up() - self.t).abs();
            if h < min_step {
                return Err(StepFailure::Underflow {
                    t: self.t,
                    h,
                    reason: "adaptive step below machine resolution".into(),
                });
            }
            let mut t_new = self.t + h;
            if t_new > t_end {
                t_new = t_end;
            }
            let h_try = t_new - self.t;
            match self.attempt(h_try) {
                Ok((y_new, err, k)) => {
                    if err.is_finite() && err < 1.0 {
                        let mut factor = if err == 0.0 {
                            MAX_FACTOR
                        } else {
                            MAX_FACTOR.min(SAFETY * err.powf(exponent))
                        };
                        if rejected_once {
                            factor = factor.min(1.0);
                        }
                        self.t_old = self.t;
                        self.y_old = self.y;
                        self.h_last = h_try;
                        self.t = t_new;
                        self.y = y_new;
                        self.fy = *k.last().expect("stages");
                        self.k = k;
                        self.h = h_try * factor;
                        self.accepted += 1;
                        return Ok(());
                    }
                    let shrink = if err.is_finite() {
                        MIN_FACTOR.max(SAFETY * err.powf(exponent))
                    } else {
                        MIN_FACTOR
                    };
                    h = h_try * shrink;
                    rejected_once = true;
                    self.rejected += 1;
                }
                Err(RhsFailure::NearSingular(reason)) => {
                    h = 0.5 * h_try;
                    rejected_once = true;
                    self.rejected += 1;
                    if h < self.opts.h_floor {
                        return Err(StepFailure::Underflow {
                            t: self.t,
                            h,
                            reason,
                        });
                    }
                }
                Err(RhsFailure::Fatal(reason)) => {
                    return Err(StepFailure::Fatal { t: self.t, reason })
                }
            }
        }
    }

    /// Interpolant over the last accepted step.
    pub fn dense(&mut self) -> Result<Dense<N>, StepFailure> {
        let h = self.h_last;
        let t0 = self.t_old;
        let y0 = self.y_old;
        match self.opts.method {
            Method::Dopri5 => {
                let q: [[f64; N]; 4] = std::array::from_fn(|c| {
                    std::array::from_fn(|i| {
                        (0..7).map(|j| self.k[j][i] * dopri5::P[j][c]).sum::<f64>()
                    })
                });
                Ok(Dense::Dopri5 { t0, h, y0, q })
            }
            Method::Dop853 => {
                let mut k = self.k.clone();
                for s in 13..16 {
                    let dy: [f64; N] = std::array::from_fn(|i| {
                        (0..s).map(|j| dop853::A[s][j] * k[j][i]).sum::<f64>() * h
                    });
                    let ys: [f64; N] = std::array::from_fn(|i| y0[i] + dy[i]);
                    let ks = self.eval(t0 + dop853::C[s] * h, &ys).map_err(|e| match e {
                        RhsFailure::NearSingular(reason) | RhsFailure::Fatal(reason) => {
                            StepFailure::Fatal { t: t0, reason }
                        }
                    })?;
                    k.push(ks);
                }
                let f_old = k[0];
                let f_new = self.fy;
                let y1 = self.y;
                let mut f = [[0.0; N]; 7];
                for i in 0..N {
                    let dy = y1[i] - y0[i];
                    f[0][i] = dy;
                    f[1][i] = h * f_old[i] - dy;
                    f[2][i] = 2.0 * dy - h * (f_new[i] + f_old[i]);
                }
                for r in 0..4 {
                    for i in 0..N {
                        f[3 + r][i] = h * (0..16).map(|j| dop853::D[r][j] * k[j][i]).sum::<f64>();
                    }
                }
                Ok(Dense::Dop853 { t0, h, y0, f })
            }
        }
    }

    /// A single exact step of size `h` from the start of the last accepted step.
    /// Used to polish event locations beyond interpolation accuracy.
    pub fn restep_from_last(&mut self, h: f64) -> Result<[f64; N], StepFailure> {
        let (t, y, fy) = (self.t, self.y, self.fy);
        let (k_saved, opts) = (std::mem::take(&mut self.k), self.opts);
        self.t = self.t_old;
        self.y = self.y_old;
        self.fy = k_saved[0];
        let out = self.attempt(h);
        self.t = t;
        self.y = y;
        self.fy = fy;
        self.k = k_saved;
        self.opts = opts;
        out.map(|(y, _, _)| y).map_err(|e| match e {
            RhsFailure::NearSingular(reason) | RhsFailure::Fatal(reason) => StepFailure::Fatal {
                t: self.t_old,
                reason,
            },
        })
    }

    pub fn last_step_start(&self) -> (f64, [f64; N]) {
        (self.t_old, self.y_old)
    }

    pub fn rhs_at(&mut self, t: f64, y: &[f64; N]) -> Result<[f64; N], RhsFailure> {
        self.eval(t, y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(method: Method) -> (f64, usize) {
        let opts = StepperOptions {
            method,
            rel_tol: 1e-11,
            abs_tol: 1e-11,
            ..Default::default()
        };
        let f = |_t: f64, y: &[f64; 2]| Ok([y[1], -y[0]]);
        let mut s = Stepper::new(f, 0.0, [1.0, 0.0], 10.0, opts).unwrap();
        let mut worst = 0.0f64;
        while s.t < 10.0 {
            s.step(10.0).unwrap();
            let d = s.dense().unwrap();
            for j in 1..4 {
                let t = d.t0() + d.h() * j as f64 / 4.0;
                worst = worst.max((d.eval(t)[0] - t.cos()).abs());
            }
        }
        worst = worst.max((s.y[0] - 10f64.cos()).abs());
        (worst, s.accepted)
    }

    #[test]
    fn harmonic_oscillator_dopri5() {
        let (err, _) = run(Method::Dopri5);
        assert!(err < 1e-9, "{err}");
    }

    #[test]
    fn harmonic_oscillator_dop853() {
        let (err, n) = run(Method::Dop853);
        assert!(err < 1e-9, "{err}");
        assert!(n < run(Method::Dopri5).1);
    }

    #[test]
    fn dense_matches_endpoints() {
        for method in [Method::Dopri5, Method::Dop853] {
            let opts = StepperOptions {
                method,
                ..Default::default()
            };
            let f = |t: f64, y: &[f64; 1]| Ok([t.sin() * y[0]]);
            let mut s = Stepper::new(f, 0.0, [1.0], 3.0, opts).unwrap();
            s.step(3.0).unwrap();
            let d = s.dense().unwrap();
            assert!((d.eval(d.t0())[0] - 1.0).abs() < 1e-15);
            assert!((d.eval(d.t0() + d.h())[0] - s.y[0]).abs() < 1e-14);
        }
    }
}
