//! Integral forms of the transformations: solutions through quadratures of
//! seeds, the degenerate kernel and the one-state double transform that
//! yields fully isospectral families.

use crate::darboux_diff::Seed;
use crate::error::{arg, Error, Result};
use crate::field::{derive, integrate_cumulative, wronskian, ScalarField};
use crate::gse::{first_node, Background, Role, Solution};

/// Relative floor of kernel denominators, scaled by `1 + |constant|`.
pub const DENOM_EPS: f64 = 1e-10;

/// Separable kernel `K(x, x') = left(x) right(x') / denom(x)`.
#[derive(Clone, Debug)]
pub struct Kernel {
    /// `U₂` for two states, `ΓU₁` for one.
    pub left: ScalarField,
    /// `q U₁`
    pub right: ScalarField,
    /// `c₁ + ∫ q U₁U₂` or `1 + Γ ∫ q U₁²`
    pub denom: ScalarField,
    /// `c₁` or `Γ`.
    pub constant: f64,
    /// Lower limit of every integral.
    pub base: f64,
}

impl Kernel {
    /// Check `denom >= ε (1 + |constant|)` at every node.
    pub fn new(left: ScalarField, right: ScalarField, denom: ScalarField, constant: f64, base: f64) -> Result<Kernel> {
        Kernel::with_eps(left, right, denom, constant, base, DENOM_EPS)
    }

    pub fn with_eps(
        left: ScalarField,
        right: ScalarField,
        denom: ScalarField,
        constant: f64,
        base: f64,
        eps: f64,
    ) -> Result<Kernel> {
        if left.grid() != denom.grid() || right.grid() != denom.grid() {
            return arg("kernel parts live on different grids");
        }
        check_denominator(&denom, eps * (1.0 + constant.abs()))?;
        Ok(Kernel {
            left,
            right,
            denom,
            constant,
            base,
        })
    }

    /// Two-state kernel from seeds at `λ₁ ≠ λ₂`.
    pub fn two_state(bg: &Background, seed1: &Seed, seed2: &Seed, c1: f64, x0: f64) -> Result<Kernel> {
        let right = bg.q() * seed1.phi();
        let denom = &integrate_cumulative(&(&right * seed2.phi()), x0)? + c1;
        Kernel::new(seed2.phi().clone(), right, denom, c1, x0)
    }

    /// One-state kernel of the isospectral family.
    pub fn isospectral(bg: &Background, seed1: &Seed, gamma: f64, x0: f64) -> Result<Kernel> {
        let right = bg.q() * seed1.phi();
        let denom = &integrate_cumulative(&(&right * seed1.phi()), x0)?.scale(gamma) + 1.0;
        Kernel::new(seed1.phi().scale(gamma), right, denom, gamma, x0)
    }

    /// `K(x, x)`
    pub fn diagonal(&self) -> ScalarField {
        &(&self.left * &self.right) / &self.denom
    }
}

fn check_denominator(denom: &ScalarField, floor: f64) -> Result<()> {
    let x = denom.grid().nodes();
    match denom.values().iter().position(|d| !(*d >= floor)) {
        Some(i) => Err(Error::SingularDenominator {
            node: i,
            x: x[i],
            value: denom.values()[i],
        }),
        None => Ok(()),
    }
}

fn reject_nodes(bg: &Background, u: &ScalarField) -> Result<()> {
    match first_node(u) {
        Some(i) => Err(Error::NodalSeed {
            node: i,
            x: bg.grid().nodes()[i],
        }),
        None => Ok(()),
    }
}

/// `c₁ = W₁₂(x0) / (m(x0)(λ₁ - λ₂))`, the constant that makes the integral
/// and Wronskian two-state forms coincide.
pub fn matched_c1(bg: &Background, seed1: &Seed, seed2: &Seed, x0: f64) -> Result<f64> {
    if seed1.lambda == seed2.lambda {
        return arg("matching constant needs distinct energies");
    }
    let w = wronskian(seed1.phi(), seed2.phi())?.value_at(x0)?;
    Ok(w / (bg.m().value_at(x0)? * (seed1.lambda - seed2.lambda)))
}

/// `C = W(U₁, φ)(x0) / m(x0)`
pub fn matched_c(bg: &Background, seed1: &Seed, phi: &Solution, x0: f64) -> Result<f64> {
    let w = wronskian(seed1.phi(), &phi.phi)?.value_at(x0)?;
    Ok(w / bg.m().value_at(x0)?)
}

/// `φ₁ = √(m/q)(1/U₁)[C + (λ₁ - E) ∫_{x0} q U₁ φ]` on the partner of `bg`.
pub fn phi1_integral(bg: &Background, seed1: &Seed, phi: &Solution, c: f64, x0: f64) -> Result<Solution> {
    let u = seed1.phi();
    reject_nodes(bg, u)?;
    bg.same_grid(&phi.phi)?;
    let target = crate::darboux_diff::transformed_potential(bg, seed1)?;
    let shift = seed1.lambda - phi.energy;
    let integral = integrate_cumulative(&(&(bg.q() * u) * &phi.phi), x0)?;
    let bracket = &integral.scale(shift) + c;
    let out = &(&bg.sqrt_q_over_m().recip() / u) * &bracket;
    Solution::new(&target, out, phi.energy, Role::Generic)
}

/// `v - 2√(q/m) (d/dx)[K(x,x)/√(qm)]`
fn kernel_potential(bg: &Background, diag: &ScalarField) -> Result<ScalarField> {
    let inner = derive(&(diag * &bg.inv_sqrt_qm()), 1)?;
    Ok(bg.v() - &(&bg.sqrt_q_over_m() * &inner).scale(2.0))
}

/// Two-state transform in integral form. Returns the new background and
/// `φ₂ = (λ₁-E)φ - U₂[C + (λ₁-E)∫ q U₁φ] / (c₁ + ∫ q U₁U₂)`.
pub fn order2_integral_transform(
    bg: &Background,
    seed1: &Seed,
    seed2: &Seed,
    phi: &Solution,
    c: f64,
    c1: f64,
    x0: f64,
) -> Result<(Background, Solution)> {
    if seed1.lambda == seed2.lambda {
        return arg("two-state integral transform needs distinct energies");
    }
    bg.same_grid(&phi.phi)?;
    let kernel = Kernel::two_state(bg, seed1, seed2, c1, x0)?;
    let v2 = kernel_potential(bg, &kernel.diagonal())?;
    let label = format!("{} | integral {} {}", bg.label(), seed1.lambda, seed2.lambda);
    let bg2 = bg.with_potential(v2, label)?;
    let shift = seed1.lambda - phi.energy;
    let integral = integrate_cumulative(&(&kernel.right * &phi.phi), x0)?;
    let bracket = &integral.scale(shift) + c;
    let phi2 = &phi.phi.scale(shift) - &(&(&kernel.left * &bracket) / &kernel.denom);
    let sol = Solution::new(&bg2, phi2, phi.energy, Role::Generic)?;
    Ok((bg2, sol))
}

/// `v₂ = v - 2√(q/m)(d/dx)[K(x,x)/√(qm)]`, `φ₂ = φ - ∫_{x0} K(x,x') φ(x') dx'`.
pub fn kernel_apply(kernel: &Kernel, bg: &Background, phi: &ScalarField) -> Result<(Background, ScalarField)> {
    bg.same_grid(&kernel.denom)?;
    bg.same_grid(phi)?;
    let v2 = kernel_potential(bg, &kernel.diagonal())?;
    let label = format!("{} | kernel {}", bg.label(), kernel.constant);
    let bg2 = bg.with_potential(v2, label)?;
    let integral = integrate_cumulative(&(&kernel.right * phi), kernel.base)?;
    let phi2 = phi - &(&(&kernel.left * &integral) / &kernel.denom);
    Ok((bg2, phi2))
}

/// A member of the isospectral family generated from one state.
#[derive(Clone, Debug)]
pub struct IsospectralFamily {
    pub background: Background,
    /// `η₂ = -ΓU₁ / (1 + Γ∫ q U₁²)` at `λ₁`.
    pub bound: Solution,
    pub kernel: Kernel,
    pub gamma: f64,
    pub lambda: f64,
    seed: ScalarField,
}

impl IsospectralFamily {
    /// `φ₂ = (λ₁-E)φ - ΓU₁[C + (λ₁-E)∫ q U₁φ] / (1 + Γ∫ q U₁²)`
    pub fn map(&self, phi: &Solution, c: f64) -> Result<Solution> {
        self.background.same_grid(&phi.phi)?;
        let shift = self.lambda - phi.energy;
        let integral = integrate_cumulative(&(&self.kernel.right * &phi.phi), self.kernel.base)?;
        let bracket = &integral.scale(shift) + c;
        let out = &phi.phi.scale(shift) - &(&(&self.kernel.left * &bracket) / &self.kernel.denom);
        Solution::new(&self.background, out, phi.energy, Role::Generic)
    }

    /// `U₁ / (1 + Γ∫ q U₁²)`, the new state without the `-Γ` factor; a
    /// valid seed even at `Γ = 0`.
    pub fn bound_unscaled(&self) -> Result<Solution> {
        let f = &self.seed / &self.kernel.denom;
        Solution::new(&self.background, f, self.lambda, Role::Bound)
    }
}

/// `v₂ = v - 2√(q/m)(d/dx)[√(q/m) ΓU₁² / (1 + Γ∫ q U₁²)]`. Only the
/// normalization of the state at `λ₁` depends on `Γ`.
pub fn isospectral_family(bg: &Background, seed1: &Seed, gamma: f64, x0: f64) -> Result<IsospectralFamily> {
    if !gamma.is_finite() {
        return arg("gamma must be finite");
    }
    bg.same_grid(seed1.phi())?;
    let kernel = Kernel::isospectral(bg, seed1, gamma, x0)?;
    let v2 = kernel_potential(bg, &kernel.diagonal())?;
    let label = format!("{} | isospectral {} gamma={gamma}", bg.label(), seed1.lambda);
    let bg2 = bg.with_potential(v2, label)?;
    let eta2 = -&(&kernel.left / &kernel.denom);
    let bound = Solution::new(&bg2, eta2, seed1.lambda, Role::Bound)?;
    Ok(IsospectralFamily {
        background: bg2,
        bound,
        kernel,
        gamma,
        lambda: seed1.lambda,
        seed: seed1.phi().clone(),
    })
}

/// The one-state double transform through `χ₁ = √(m/q)(1/U₁)(c₁ + ∫ q U₁²)`.
/// Returns the new background and `K = -(ln√(m/q))' - q U₁² / (c₁ + ∫ q U₁²)`.
/// Seeds with nodes are allowed.
pub fn isospectral_one_state_chain(bg: &Background, seed1: &Seed, c1: f64, x0: f64) -> Result<(Background, ScalarField)> {
    let u = seed1.phi();
    bg.same_grid(u)?;
    let qu2 = &(bg.q() * u) * u;
    let denom = &integrate_cumulative(&qu2, x0)? + c1;
    check_denominator(&denom, DENOM_EPS * (1.0 + c1.abs()))?;
    let sqrt_m_over_q = bg.sqrt_q_over_m().recip();
    let log_term = derive(&sqrt_m_over_q.ln(), 1)?;
    let k = -&(&log_term + &(&qu2 / &denom));
    let inner = derive(&(&k * &bg.inv_sqrt_qm()), 1)?;
    let v2 = &(bg.v() + &(&bg.sqrt_q_over_m() * &inner).scale(2.0)) - &bg.s_term()?.scale(2.0);
    let label = format!("{} | one-state chain {} c1={c1}", bg.label(), seed1.lambda);
    Ok((bg.with_potential(v2, label)?, k))
}
