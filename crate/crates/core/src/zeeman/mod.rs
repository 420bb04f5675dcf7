//! Molecule and trap constants, Zeeman matrices and their spectra.

pub mod hermitian;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::potential::VibronicConstants;

/// A diatomic molecule A-B with `n_electrons` electrons.
///
/// Masses are nuclear masses in unified atomic mass units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MoleculeSpec {
    pub name: String,
    pub mass_a: f64,
    pub mass_b: f64,
    pub z_a: u32,
    pub z_b: u32,
    pub n_electrons: u32,
    /// Electron spin g-factor.
    pub g_s: f64,
    /// Rotational constant in cm^-1 (not used by any computation).
    pub rotational_constant: f64,
}

impl MoleculeSpec {
    /// Neutral homonuclear molecule with `g_S = 2`.
    pub fn homonuclear(name: &str, nuclear_mass: f64, z: u32) -> Self {
        Self {
            name: name.to_string(),
            mass_a: nuclear_mass,
            mass_b: nuclear_mass,
            z_a: z,
            z_b: z,
            n_electrons: 2 * z,
            g_s: 2.0,
            rotational_constant: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.mass_a.is_finite()
            && self.mass_a > 0.0
            && self.mass_b.is_finite()
            && self.mass_b > 0.0)
        {
            return Err("nuclear masses must be positive".into());
        }
        if self.z_a == 0 || self.z_b == 0 {
            return Err("atomic numbers must be at least 1".into());
        }
        if !self.g_s.is_finite() {
            return Err("g_S must be finite".into());
        }
        Ok(())
    }

    /// Total mass in electron masses.
    pub fn total_mass_in_electrons(&self, consts: &PhysicalConstants) -> f64 {
        let me = consts.electron_mass_u();
        (self.mass_a + self.mass_b) / me + self.n_electrons as f64
    }

    /// Total mass in kilograms.
    pub fn total_mass_kg(&self, consts: &PhysicalConstants) -> f64 {
        self.total_mass_in_electrons(consts) * consts.electron_mass
    }
}

/// Trap field: `B1_times_D` is the gradient times the chamber size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapSpec {
    /// Tesla.
    pub b1_times_d: f64,
    /// Chamber size in metres. Only the time conversion uses it.
    pub d: f64,
}

impl Default for TrapSpec {
    fn default() -> Self {
        Self {
            b1_times_d: 5.0,
            d: 0.04,
        }
    }
}

impl TrapSpec {
    pub fn new(b1_times_d: f64, d: f64) -> Result<Self, String> {
        if !(b1_times_d.is_finite() && b1_times_d >= 0.0) {
            return Err(format!("B1*D must be non-negative, got {b1_times_d}"));
        }
        if !(d.is_finite() && d > 0.0) {
            return Err(format!("chamber size must be positive, got {d}"));
        }
        Ok(Self { b1_times_d, d })
    }
}

/// Rotational quantum numbers plus the spin mixing weight `varpi = |a|^2 - |c|^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RotorState {
    pub j: u32,
    pub m: i32,
    pub varpi: f64,
}

impl RotorState {
    pub fn new(j: u32, m: i32, varpi: f64) -> Result<Self, String> {
        if m.unsigned_abs() > j {
            return Err(format!("|M| = {} exceeds J = {j}", m.unsigned_abs()));
        }
        if !(varpi.is_finite() && varpi.abs() <= 1.0) {
            return Err(format!(
                "spin mixing weight must lie in [-1, 1], got {varpi}"
            ));
        }
        Ok(Self { j, m, varpi })
    }

    /// `(2J^2 + 2J - 1 - 2M^2) / ((2J - 1)(2J + 3))`, the second-order angular factor.
    pub fn quadratic_factor(&self) -> f64 {
        quadratic_factor(self.j, self.m)
    }
}

/// Second-order angular factor for `(J, M)`; J = 0 gives 1/3.
pub fn quadratic_factor(j: u32, m: i32) -> f64 {
    let j = j as f64;
    let m = m as f64;
    (2.0 * j * j + 2.0 * j - 1.0 - 2.0 * m * m) / ((2.0 * j - 1.0) * (2.0 * j + 3.0))
}

/// Point in trap coordinates (units of the chamber size).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl FieldPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// Quadrupole field `(-x/2, -y/2, z)`.
    pub fn field(&self) -> [f64; 3] {
        [-0.5 * self.x, -0.5 * self.y, self.z]
    }

    pub fn field_norm_sq(&self) -> f64 {
        self.z * self.z + 0.25 * (self.x * self.x + self.y * self.y)
    }

    pub fn field_norm(&self) -> f64 {
        self.field_norm_sq().sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZeemanOrder {
    Linear,
    Quadratic,
}

/// Dense `(2J+1) x (2J+1)` Zeeman matrix, rows and columns ordered M = -J..J.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeemanMatrix {
    pub j: u32,
    pub order: ZeemanOrder,
    entries: Vec<Complex64>,
}

impl ZeemanMatrix {
    fn zeros(j: u32, order: ZeemanOrder) -> Self {
        let n = (2 * j + 1) as usize;
        Self {
            j,
            order,
            entries: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn dim(&self) -> usize {
        (2 * self.j + 1) as usize
    }

    fn index(&self, m: i32) -> usize {
        (m + self.j as i32) as usize
    }

    /// Element between `<Y_J^row|` and `|Y_J^col>`.
    pub fn get(&self, row: i32, col: i32) -> Complex64 {
        let n = self.dim();
        self.entries[self.index(row) * n + self.index(col)]
    }

    fn set(&mut self, row: i32, col: i32, v: Complex64) {
        let n = self.dim();
        let (r, c) = (self.index(row), self.index(col));
        self.entries[r * n + c] = v;
    }

    /// Row-major storage.
    pub fn as_slice(&self) -> &[Complex64] {
        &self.entries
    }

    /// Largest `|A[i][j] - conj(A[j][i])|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst =
                    worst.max((self.entries[i * n + j] - self.entries[j * n + i].conj()).norm());
            }
        }
        worst
    }

    pub fn trace(&self) -> Complex64 {
        // pair M with -M so antisymmetric diagonals cancel exactly
        let n = self.dim();
        let d = |i: usize| self.entries[i * n + i];
        let mut t = if n % 2 == 1 {
            d(n / 2)
        } else {
            Complex64::new(0.0, 0.0)
        };
        for i in 0..n / 2 {
            t += d(i) + d(n - 1 - i);
        }
        t
    }

    /// Spectrum from the Jacobi eigensolver, ascending.
    pub fn numeric_eigenvalues(&self) -> Vec<f64> {
        hermitian::eigh(&self.entries, self.dim()).values
    }

    /// Closed-form spectrum, ascending.
    pub fn analytic_eigenvalues(&self, p: &FieldPoint) -> Vec<f64> {
        match self.order {
            ZeemanOrder::Linear => linear_eigenvalues(self.j, p),
            ZeemanOrder::Quadratic => quadratic_eigenvalues(self.j, p),
        }
    }
}

/// `alpha_L = (m_e / 2m)(Z_B m_A/m_B + Z_A m_B/m_A + n m_e/m_B)`, `m` the total mass.
pub fn compute_alpha_l(mol: &MoleculeSpec, consts: &PhysicalConstants) -> f64 {
    let me = consts.electron_mass_u();
    let m = mol.mass_a + mol.mass_b + mol.n_electrons as f64 * me;
    let za = mol.z_a as f64;
    let zb = mol.z_b as f64;
    me / (2.0 * m)
        * (zb * mol.mass_a / mol.mass_b
            + za * mol.mass_b / mol.mass_a
            + mol.n_electrons as f64 * me / mol.mass_b)
}

/// `beta_L = e (B1 D) a0^2 / hbar`, the field strength in atomic units.
pub fn compute_beta_l(trap: &TrapSpec, consts: &PhysicalConstants) -> f64 {
    consts.elementary_charge * trap.b1_times_d * consts.bohr_radius * consts.bohr_radius
        / consts.hbar
}

/// Result of diagonalising the spin-1 Zeeman operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinEigensystem {
    /// Energies `(g_S/2) beta_L lambda` for lambda = +|B|, 0, -|B|.
    pub energies: [f64; 3],
    /// Dimensionless `lambda`, same order.
    pub lambdas: [f64; 3],
    /// Spinors chi_+, chi_0, chi_- in the (S_z = +1, 0, -1) basis.
    pub spinors: [[Complex64; 3]; 3],
    /// Set at the field zero, where all three levels coincide.
    pub degenerate: bool,
}

/// Spin-1 Zeeman Hamiltonian `(g_S/2) beta_L (S . B)` at `p`, row-major.
pub fn spin_zeeman_matrix(p: &FieldPoint, g_s: f64, beta_l: f64) -> [Complex64; 9] {
    let [bx, by, bz] = p.field();
    let k = 0.5 * g_s * beta_l;
    let r2 = std::f64::consts::FRAC_1_SQRT_2;
    let lo = Complex64::new(bx, -by) * r2;
    let hi = Complex64::new(bx, by) * r2;
    let zero = Complex64::new(0.0, 0.0);
    [
        Complex64::new(bz, 0.0) * k,
        lo * k,
        zero,
        hi * k,
        zero,
        lo * k,
        zero,
        hi * k,
        Complex64::new(-bz, 0.0) * k,
    ]
}

fn fix_phase(v: [Complex64; 3]) -> [Complex64; 3] {
    let scale = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let last = v
        .iter()
        .rev()
        .find(|z| z.norm() > 1e-14 * scale.max(1e-300));
    match last {
        Some(z) => {
            let ph = z.conj() / z.norm();
            let mut out = v.map(|c| c * ph);
            // kill the rounding residue so the pinned component is exactly real
            if let Some(w) = out
                .iter_mut()
                .rev()
                .find(|c| c.norm() > 1e-14 * scale.max(1e-300))
            {
                w.im = 0.0;
            }
            out
        }
        None => v,
    }
}

/// Eigenvalues and spinors of the spin-1 Zeeman operator.
pub fn spin_zeeman_eigensystem(p: &FieldPoint, g_s: f64, beta_l: f64) -> SpinEigensystem {
    let [bx, by, bz] = p.field();
    let b = p.field_norm();
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    if b == 0.0 {
        return SpinEigensystem {
            energies: [0.0; 3],
            lambdas: [0.0; 3],
            spinors: [[one, zero, zero], [zero, one, zero], [zero, zero, one]],
            degenerate: true,
        };
    }
    let bperp = bx.hypot(by);
    // unit phase of B_x - i B_y; any unit value works on the z axis
    let w = if bperp > 0.0 {
        Complex64::new(bx, -by) / bperp
    } else {
        one
    };
    let w2 = w * w;
    let s2 = std::f64::consts::SQRT_2;
    let plus = [
        w2 * ((b + bz) / (2.0 * b)),
        w * (bperp / (s2 * b)),
        Complex64::new((b - bz) / (2.0 * b), 0.0),
    ];
    let zero_state = [
        -w2 * (bperp / (s2 * b)),
        w * (bz / b),
        Complex64::new(bperp / (s2 * b), 0.0),
    ];
    let minus = [
        w2 * ((b - bz) / (2.0 * b)),
        -w * (bperp / (s2 * b)),
        Complex64::new((b + bz) / (2.0 * b), 0.0),
    ];
    let lambdas = [b, 0.0, -b];
    let k = 0.5 * g_s * beta_l;
    SpinEigensystem {
        energies: lambdas.map(|l| k * l),
        lambdas,
        spinors: [fix_phase(plus), fix_phase(zero_state), fix_phase(minus)],
        degenerate: false,
    }
}

/// First-order rotor matrix `<Y_J^N| B.L |Y_J^M>`.
pub fn linear_zeeman_matrix(j: u32, p: &FieldPoint) -> ZeemanMatrix {
    let mut mat = ZeemanMatrix::zeros(j, ZeemanOrder::Linear);
    let ji = j as i32;
    let jf = j as f64;
    let lower = Complex64::new(p.x, -p.y) * -0.25;
    let upper = Complex64::new(p.x, p.y) * -0.25;
    for m in -ji..=ji {
        let mf = m as f64;
        mat.set(m, m, Complex64::new(p.z * mf, 0.0));
        if m > -ji {
            mat.set(m, m - 1, lower * ((jf - mf + 1.0) * (jf + mf)).sqrt());
        }
        if m < ji {
            mat.set(m, m + 1, upper * ((jf + mf + 1.0) * (jf - mf)).sqrt());
        }
    }
    mat
}

/// Second-order rotor matrix `<Y_J^N| (B.n)^2 |Y_J^M>`.
///
/// J = 0 returns the 1x1 matrix `|B|^2 / 3`, the value of the closed-form
/// eigenvalue at J = M = 0.
pub fn quadratic_zeeman_matrix(j: u32, p: &FieldPoint) -> ZeemanMatrix {
    let mut mat = ZeemanMatrix::zeros(j, ZeemanOrder::Quadratic);
    if j == 0 {
        mat.set(0, 0, Complex64::new(p.field_norm_sq() / 3.0, 0.0));
        return mat;
    }
    let ji = j as i32;
    let jf = j as f64;
    let den = (2.0 * jf - 1.0) * (2.0 * jf + 3.0);
    let rho2 = p.x * p.x + p.y * p.y;
    let xm = Complex64::new(p.x, -p.y);
    let xp = Complex64::new(p.x, p.y);
    for m in -ji..=ji {
        let mf = m as f64;
        let diag = (jf * jf + jf - 1.0 + mf * mf) / den * rho2 / 4.0
            + (2.0 * jf * jf + 2.0 * jf - 1.0 - 2.0 * mf * mf) / den * p.z * p.z;
        mat.set(m, m, Complex64::new(diag, 0.0));
        if m > -ji {
            let r = ((jf - mf + 1.0) * (jf + mf)).sqrt() / den * (2.0 * mf - 1.0);
            mat.set(m, m - 1, xm * (0.5 * p.z * r));
        }
        if m < ji {
            let r = ((jf - mf) * (jf + mf + 1.0)).sqrt() / den * (2.0 * mf + 1.0);
            mat.set(m, m + 1, xp * (0.5 * p.z * r));
        }
        if m > -ji + 1 {
            let r = ((jf - mf + 1.0) * (jf - mf + 2.0) * (jf + mf - 1.0) * (jf + mf)).sqrt() / den;
            mat.set(m, m - 2, xm * xm * (-r / 8.0));
        }
        if m < ji - 1 {
            let r = ((jf - mf - 1.0) * (jf - mf) * (jf + mf + 1.0) * (jf + mf + 2.0)).sqrt() / den;
            mat.set(m, m + 2, xp * xp * (-r / 8.0));
        }
    }
    mat
}

/// `{M |B| : M = -J..J}`, ascending.
pub fn linear_eigenvalues(j: u32, p: &FieldPoint) -> Vec<f64> {
    let b = p.field_norm();
    let ji = j as i32;
    (-ji..=ji).map(|m| m as f64 * b).collect()
}

/// `{E_2^M : M = -J..J}`, ascending.
pub fn quadratic_eigenvalues(j: u32, p: &FieldPoint) -> Vec<f64> {
    let b2 = p.field_norm_sq();
    let ji = j as i32;
    let mut v: Vec<f64> = (-ji..=ji).map(|m| quadratic_factor(j, m) * b2).collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Trap depth contributions in kelvin.
///
/// `*_exact` are the three terms of the potential difference between the
/// trap centre and the corner (1, 1, 1) of the chamber, where |B|^2 = 3/2.
/// `*_rough` are the per-unit scale estimates `beta_L`, `alpha_L beta_L` and
/// `beta_L^2`, each times the atomic energy unit in kelvin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DepthReport {
    pub alpha_l: f64,
    pub beta_l: f64,
    pub spin_exact: f64,
    pub linear_exact: f64,
    pub quadratic_exact: f64,
    pub spin_rough: f64,
    pub linear_rough: f64,
    pub quadratic_rough: f64,
}

pub fn trap_depth_report(
    mol: &MoleculeSpec,
    trap: &TrapSpec,
    state: &RotorState,
    vib: &VibronicConstants,
    consts: &PhysicalConstants,
) -> DepthReport {
    let alpha = compute_alpha_l(mol, consts);
    let beta = compute_beta_l(trap, consts);
    let uk = consts.hartree_kelvin;
    let edge = 1.5f64.sqrt();
    let quad = vib.a1 - vib.a2 * state.quadratic_factor();
    DepthReport {
        alpha_l: alpha,
        beta_l: beta,
        spin_exact: 0.5 * mol.g_s * beta * state.varpi * edge * uk,
        linear_exact: -alpha * beta * state.m as f64 * edge * uk,
        quadratic_exact: beta * beta * quad * 1.5 * uk,
        spin_rough: beta * uk,
        linear_rough: alpha * beta * uk,
        quadratic_rough: beta * beta * uk,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_dev(a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn field_norm_matches_definition() {
        let p = FieldPoint::new(0.3, -0.2, 0.5);
        assert_eq!(p.field_norm_sq(), 0.25 + 0.25 * (0.09 + 0.04));
    }

    #[test]
    fn beta_is_linear_in_gradient() {
        let c = PhysicalConstants::default();
        let b5 = compute_beta_l(&TrapSpec::new(5.0, 0.04).unwrap(), &c);
        let b10 = compute_beta_l(&TrapSpec::new(10.0, 0.04).unwrap(), &c);
        assert_eq!(b10, 2.0 * b5);
        assert_eq!(compute_beta_l(&TrapSpec::new(0.0, 0.04).unwrap(), &c), 0.0);
        assert!((b5 - 2.12718e-5).abs() < 1.5e-10, "{b5}");
    }

    #[test]
    fn zero_field_is_degenerate() {
        let s = spin_zeeman_eigensystem(&FieldPoint::new(0.0, 0.0, 0.0), 2.0, 1.0);
        assert!(s.degenerate);
        assert_eq!(s.lambdas, [0.0; 3]);
    }

    #[test]
    fn field_along_z_gives_standard_basis() {
        let s = spin_zeeman_eigensystem(&FieldPoint::new(0.0, 0.0, 1.0), 2.0, 1.0);
        assert_eq!(s.lambdas, [1.0, 0.0, -1.0]);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        assert_eq!(s.spinors[0], [one, zero, zero]);
        assert_eq!(s.spinors[1], [zero, one, zero]);
        assert_eq!(s.spinors[2], [zero, zero, one]);
    }

    #[test]
    fn field_along_minus_z_keeps_positive_phase() {
        let s = spin_zeeman_eigensystem(&FieldPoint::new(0.0, 0.0, -2.0), 2.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        assert_eq!(s.spinors[0], [zero, zero, one]);
        assert_eq!(s.spinors[1], [zero, one, zero]);
        assert_eq!(s.spinors[2], [one, zero, zero]);
    }

    #[test]
    fn spinors_solve_the_eigenproblem() {
        let p = FieldPoint::new(0.3, -0.2, 0.5);
        let h = spin_zeeman_matrix(&p, 2.0, 1.0);
        let s = spin_zeeman_eigensystem(&p, 2.0, 1.0);
        for k in 0..3 {
            for i in 0..3 {
                let hv: Complex64 = (0..3).map(|j| h[i * 3 + j] * s.spinors[k][j]).sum();
                assert!((hv - s.spinors[k][i] * s.energies[k]).norm() < 1e-14);
            }
        }
        let oracle = hermitian::eigh(&h, 3).values;
        let b = (0.25f64 + 0.0325).sqrt();
        assert!(max_dev(&oracle, &[-b, 0.0, b]) < 1e-14);
    }

    #[test]
    fn j_zero_matrices() {
        let p = FieldPoint::new(0.7, 0.1, -0.4);
        let l = linear_zeeman_matrix(0, &p);
        assert_eq!(l.dim(), 1);
        assert_eq!(l.get(0, 0), Complex64::new(0.0, 0.0));
        let q = quadratic_zeeman_matrix(0, &p);
        assert!((q.get(0, 0).re - p.field_norm_sq() / 3.0).abs() < 1e-16);
    }

    #[test]
    fn quadratic_j1_on_axis() {
        let p = FieldPoint::new(0.0, 0.0, 1.0);
        let q = quadratic_zeeman_matrix(1, &p);
        assert!(max_dev(&q.numeric_eigenvalues(), &[0.2, 0.2, 0.6]) < 1e-15);
        assert!((quadratic_factor(1, 0) - 0.6).abs() < 1e-16);
        assert!((quadratic_factor(10, -10) - 19.0 / 437.0).abs() < 1e-17);
    }

    #[test]
    fn linear_j3_spectrum() {
        let p = FieldPoint::new(0.4, 0.1, -0.3);
        let l = linear_zeeman_matrix(3, &p);
        assert!(max_dev(&l.numeric_eigenvalues(), &l.analytic_eigenvalues(&p)) < 1e-10);
        assert_eq!(l.trace(), Complex64::new(0.0, 0.0));
    }
}
