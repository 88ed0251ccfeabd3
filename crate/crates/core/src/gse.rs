//! The generalized Schrödinger equation `-(φ'/m)' + vφ = qEφ`: backgrounds,
//! solutions, an RK4 initial-value solver and a finite-difference
//! eigensolver.

use crate::error::{arg, Error, Result};
use crate::field::{derive, integrate_cumulative, Grid, ScalarField};
use crate::jet::Jet;
use crate::tridiag;

/// Bisection stops once the bracket is below this times `max(1, |E|)`.
pub const EIGEN_TOL: f64 = 1e-10;

/// Nodes skipped at each end when measuring residuals.
pub const RESIDUAL_SKIP: usize = 2;

/// Blow-up threshold for the initial-value solver.
const OVERFLOW: f64 = 1e150;

#[derive(Clone, Debug)]
pub struct Background {
    m: ScalarField,
    q: ScalarField,
    v: ScalarField,
    label: String,
    singular: bool,
}

impl Background {
    pub fn new(m: ScalarField, q: ScalarField, v: ScalarField, label: impl Into<String>) -> Result<Self> {
        if m.grid() != q.grid() || m.grid() != v.grid() {
            return arg("m, q and v must share one grid");
        }
        for (name, f) in [("m", &m), ("q", &q)] {
            if let Some(i) = f.values().iter().position(|&x| !(x > 0.0)) {
                return arg(format!(
                    "{name} must be strictly positive, got {} at node {i} (x = {})",
                    f.values()[i],
                    f.grid().nodes()[i]
                ));
            }
        }
        v.check_finite()?;
        Ok(Background {
            m,
            q,
            v,
            label: label.into(),
            singular: false,
        })
    }

    /// Mark a potential built from a seed with nodes.
    pub fn flagged_singular(mut self, singular: bool) -> Self {
        self.singular |= singular;
        self
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// Same mass and weight, new potential.
    pub fn with_potential(&self, v: ScalarField, label: impl Into<String>) -> Result<Self> {
        Self::new(self.m.clone(), self.q.clone(), v, label)
    }

    pub fn grid(&self) -> &Grid {
        self.m.grid()
    }

    pub fn m(&self) -> &ScalarField {
        &self.m
    }

    pub fn q(&self) -> &ScalarField {
        &self.q
    }

    pub fn v(&self) -> &ScalarField {
        &self.v
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `√(q/m)`
    pub fn sqrt_q_over_m(&self) -> ScalarField {
        (&self.q / &self.m).sqrt()
    }

    /// `1/√(qm)`
    pub fn inv_sqrt_qm(&self) -> ScalarField {
        (&self.q * &self.m).sqrt().recip()
    }

    /// `S = √(q/m) [ (1/q) (√(q/m))' ]'`, the mass/weight correction term of
    /// the transformed potential.
    pub fn s_term(&self) -> Result<ScalarField> {
        let s = self.sqrt_q_over_m();
        let t = &derive(&s, 1)? / &self.q;
        Ok(&s * &derive(&t, 1)?)
    }

    /// `-(φ'/m)' + vφ`
    pub fn apply_raw(&self, phi: &ScalarField) -> Result<ScalarField> {
        self.same_grid(phi)?;
        Ok(&(-&flux_derivative(self, phi)?) + &(&self.v * phi))
    }

    /// `H φ = [-(φ'/m)' + vφ] / q`
    pub fn hamiltonian(&self, phi: &ScalarField) -> Result<ScalarField> {
        Ok(&self.apply_raw(phi)? / &self.q)
    }

    pub(crate) fn same_grid(&self, f: &ScalarField) -> Result<()> {
        if f.grid() != self.grid() {
            return arg(format!(
                "field on a {}-node grid does not match the {}-node background grid",
                f.len(),
                self.grid().len()
            ));
        }
        Ok(())
    }
}

/// `(φ'/m)'`. Exact when φ carries derivative data (the outer derivative
/// still falls back to central differences if the flux is sampled);
/// otherwise the compact three-point flux stencil with midpoint masses.
fn flux_derivative(bg: &Background, phi: &ScalarField) -> Result<ScalarField> {
    if phi.exact_order() >= 1 {
        let p = &derive(phi, 1)? / bg.m();
        return derive(&p, 1);
    }
    let n = phi.len();
    let h = bg.grid().h();
    let y = phi.values();
    let mid: Vec<f64> = (0..n - 1).map(|i| bg.m().midpoint(i)).collect();
    let mut out = vec![0.0; n];
    for i in 1..n - 1 {
        out[i] = ((y[i + 1] - y[i]) / mid[i] - (y[i] - y[i - 1]) / mid[i - 1]) / (h * h);
    }
    // one-sided at the ends
    let p = &derive(phi, 1)? / bg.m();
    let dp = derive(&p.sampled_only(), 1)?;
    out[0] = dp.values()[0];
    out[n - 1] = dp.values()[n - 1];
    ScalarField::from_values(bg.grid(), out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Role {
    Generic,
    Seed,
    Eta,
    EtaHat,
    Liouville,
    Bound,
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub phi: ScalarField,
    pub energy: f64,
    pub background: Background,
    pub role: Role,
    /// Measured `equation_residual` at construction.
    pub residual: f64,
}

impl Solution {
    /// Wrap an externally supplied function, recording its residual.
    pub fn new(bg: &Background, phi: ScalarField, energy: f64, role: Role) -> Result<Self> {
        bg.same_grid(&phi)?;
        let residual = equation_residual(bg, &phi, energy)?;
        Ok(Solution {
            phi,
            energy,
            background: bg.clone(),
            role,
            residual,
        })
    }

    /// As `new`, but rejects functions whose residual exceeds `tol`.
    pub fn checked(bg: &Background, phi: ScalarField, energy: f64, role: Role, tol: f64) -> Result<Self> {
        let s = Self::new(bg, phi, energy, role)?;
        if !(s.residual <= tol) {
            return Err(Error::NotASolution {
                energy,
                residual: s.residual,
                tol,
            });
        }
        Ok(s)
    }

    pub fn with_role(mut self, role: Role) -> Self {
        self.role = role;
        self
    }

    pub fn grid(&self) -> &Grid {
        self.phi.grid()
    }
}

fn rhs(m: f64, v: f64, q: f64, e: f64, phi: f64, p: f64) -> (f64, f64) {
    (m * p, (v - q * e) * phi)
}

/// Fixed-step RK4 for `φ' = m p`, `p' = (v - qE) φ` with `p = φ'/m`,
/// started at the node `x_start` and marched to both ends of the grid.
/// The result carries `φ' = m p` as exact first-derivative data.
pub fn integrate_solution(bg: &Background, energy: f64, phi0: f64, p0: f64, x_start: f64) -> Result<Solution> {
    if phi0 == 0.0 && p0 == 0.0 {
        return arg("initial state (phi, p) = (0, 0) gives the zero solution");
    }
    if !phi0.is_finite() || !p0.is_finite() || !energy.is_finite() {
        return arg("initial data and energy must be finite");
    }
    let grid = bg.grid();
    let Some(i0) = grid.node_index(x_start) else {
        return arg(format!("x_start = {x_start} is not a grid node"));
    };
    let n = grid.len();
    let h = grid.h();
    let (m, q, v) = (bg.m(), bg.q(), bg.v());
    let mid_m: Vec<f64> = (0..n - 1).map(|i| m.midpoint(i)).collect();
    let mid_q: Vec<f64> = (0..n - 1).map(|i| q.midpoint(i)).collect();
    let mid_v: Vec<f64> = (0..n - 1).map(|i| v.midpoint(i)).collect();
    let (mv, qv, vv) = (m.values(), q.values(), v.values());

    let mut phi = vec![0.0; n];
    let mut p = vec![0.0; n];
    phi[i0] = phi0;
    p[i0] = p0;

    let step = |from: usize, to: usize, y0: f64, z0: f64| -> (f64, f64) {
        let dir = if to > from { 1.0 } else { -1.0 };
        let dt = dir * h;
        let k = from.min(to);
        let (ma, qa, va) = (mv[from], qv[from], vv[from]);
        let (mm, qm, vm) = (mid_m[k], mid_q[k], mid_v[k]);
        let (mb, qb, vb) = (mv[to], qv[to], vv[to]);
        let k1 = rhs(ma, va, qa, energy, y0, z0);
        let k2 = rhs(mm, vm, qm, energy, y0 + 0.5 * dt * k1.0, z0 + 0.5 * dt * k1.1);
        let k3 = rhs(mm, vm, qm, energy, y0 + 0.5 * dt * k2.0, z0 + 0.5 * dt * k2.1);
        let k4 = rhs(mb, vb, qb, energy, y0 + dt * k3.0, z0 + dt * k3.1);
        (
            y0 + dt / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0),
            z0 + dt / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1),
        )
    };
    let blown = |a: f64, b: f64| !(a.abs() < OVERFLOW && b.abs() < OVERFLOW);

    for i in i0..n - 1 {
        let (a, b) = step(i, i + 1, phi[i], p[i]);
        if blown(a, b) {
            return Err(Error::Integration {
                last_valid: i,
                x: grid.nodes()[i],
            });
        }
        phi[i + 1] = a;
        p[i + 1] = b;
    }
    for i in (1..=i0).rev() {
        let (a, b) = step(i, i - 1, phi[i], p[i]);
        if blown(a, b) {
            return Err(Error::Integration {
                last_valid: i,
                x: grid.nodes()[i],
            });
        }
        phi[i - 1] = a;
        p[i - 1] = b;
    }
    let jets: Vec<Jet> = (0..n)
        .map(|i| Jet::from_coeffs(&[phi[i], mv[i] * p[i]]))
        .collect();
    let field = ScalarField::from_jets(grid, &jets);
    Solution::new(bg, field, energy, Role::Generic)
}

/// First node where `f` vanishes or differs in sign from its first sample.
pub(crate) fn first_node(f: &ScalarField) -> Option<usize> {
    let v = f.values();
    if v[0] == 0.0 {
        return Some(0);
    }
    let s = v[0] > 0.0;
    v.iter().position(|&x| x == 0.0 || (x > 0.0) != s)
}

/// `Û = U ∫_{x0}^{x} m/U² dx'`, the second solution at the same energy.
pub fn second_solution_liouville(bg: &Background, u: &Solution, x0: f64) -> Result<Solution> {
    bg.same_grid(&u.phi)?;
    if let Some(i) = first_node(&u.phi) {
        return Err(Error::NodalSeed {
            node: i,
            x: bg.grid().nodes()[i],
        });
    }
    let integrand = bg.m() / &u.phi.powi(2);
    let hat = &u.phi * &integrate_cumulative(&integrand, x0)?;
    Solution::new(bg, hat, u.energy, Role::Liouville)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryCondition {
    Dirichlet,
}

#[derive(Clone, Debug)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// q-normalized, zero at both ends.
    pub eigenfunctions: Vec<ScalarField>,
    pub n: usize,
    pub h: f64,
    pub bc: BoundaryCondition,
}

impl Spectrum {
    pub fn count_below(&self, e: f64) -> usize {
        self.eigenvalues.iter().filter(|&&x| x < e).count()
    }
}

/// Symmetric tridiagonal `Q^{-1/2} A Q^{-1/2}` on the interior nodes.
fn fd_matrix(bg: &Background) -> (Vec<f64>, Vec<f64>) {
    let n = bg.grid().len();
    let h2 = bg.grid().h().powi(2);
    let mid: Vec<f64> = (0..n - 1).map(|i| bg.m().midpoint(i)).collect();
    let q = bg.q().values();
    let v = bg.v().values();
    let diag: Vec<f64> = (1..n - 1)
        .map(|i| ((1.0 / mid[i - 1] + 1.0 / mid[i]) / h2 + v[i]) / q[i])
        .collect();
    let off: Vec<f64> = (1..n - 2)
        .map(|i| -1.0 / (mid[i] * h2) / (q[i] * q[i + 1]).sqrt())
        .collect();
    (diag, off)
}

/// Number of Dirichlet eigenvalues strictly below `e`.
pub fn count_eigenvalues_below(bg: &Background, e: f64) -> usize {
    let (diag, off) = fd_matrix(bg);
    tridiag::sturm_count(&diag, &off, e)
}

/// Lowest `k` Dirichlet eigenpairs of the three-point discretization.
pub fn spectrum_fd(bg: &Background, k: usize) -> Result<Spectrum> {
    let n = bg.grid().len();
    let size = n - 2;
    if k == 0 || k > size {
        return arg(format!("requested {k} eigenvalues from a matrix of size {size}"));
    }
    let (diag, off) = fd_matrix(bg);
    let pairs = tridiag::lowest_eigenpairs(&diag, &off, k, EIGEN_TOL);
    let q = bg.q().values();
    let mut eigenvalues = Vec::with_capacity(k);
    let mut eigenfunctions = Vec::with_capacity(k);
    for (e, y) in pairs {
        let mut phi = vec![0.0; n];
        for i in 1..n - 1 {
            phi[i] = y[i - 1] / q[i].sqrt();
        }
        let f = ScalarField::from_values(bg.grid(), phi)?;
        let norm = weighted_norm(bg, &f).sqrt();
        let big = f.max_abs();
        let first = f
            .values()
            .iter()
            .find(|v| v.abs() > 1e-8 * big)
            .copied()
            .unwrap_or(1.0);
        let s = if first < 0.0 { -1.0 / norm } else { 1.0 / norm };
        eigenvalues.push(e);
        eigenfunctions.push(f.scale(s).sampled_only());
    }
    Ok(Spectrum {
        eigenvalues,
        eigenfunctions,
        n,
        h: bg.grid().h(),
        bc: BoundaryCondition::Dirichlet,
    })
}

/// Composite Simpson for sampled values, with the trapezoid rule on the
/// final interval when the interval count is odd.
pub(crate) fn simpson(values: &[f64], h: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let intervals = n - 1;
    let even = intervals - intervals % 2;
    let mut s = 0.0;
    let mut i = 0;
    while i < even {
        s += values[i] + 4.0 * values[i + 1] + values[i + 2];
        i += 2;
    }
    s *= h / 3.0;
    if even < intervals {
        s += 0.5 * h * (values[n - 2] + values[n - 1]);
    }
    s
}

/// `∫ q φ ψ dx`
pub fn weighted_inner(bg: &Background, phi: &ScalarField, psi: &ScalarField) -> Result<f64> {
    bg.same_grid(phi)?;
    bg.same_grid(psi)?;
    let w: Vec<f64> = bg
        .q()
        .values()
        .iter()
        .zip(phi.values())
        .zip(psi.values())
        .map(|((q, a), b)| q * a * b)
        .collect();
    Ok(simpson(&w, bg.grid().h()))
}

/// `∫ q |φ|² dx`
pub fn weighted_norm(bg: &Background, phi: &ScalarField) -> f64 {
    let w: Vec<f64> = bg
        .q()
        .values()
        .iter()
        .zip(phi.values())
        .map(|(q, a)| q * a * a)
        .collect();
    simpson(&w, bg.grid().h())
}

/// `max |-(φ'/m)' + vφ - qEφ| / (1 + max|qEφ|)` over interior nodes.
pub fn equation_residual(bg: &Background, phi: &ScalarField, energy: f64) -> Result<f64> {
    let r = &bg.apply_raw(phi)? - &(bg.q() * phi).scale(energy);
    let scale = 1.0 + (bg.q() * phi).scale(energy).max_abs();
    Ok(r.max_abs_interior(RESIDUAL_SKIP) / scale)
}
