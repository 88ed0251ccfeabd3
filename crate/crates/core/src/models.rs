//! Closed-form backgrounds, solutions and transformed potentials for the
//! two worked families:
//!
//! * `CoulombX`: `m = 1/x`, `q = x`, `v = 1/(4x)`
//! * `EffmassLog`: `m = α²/x²`, `q = 1`, `v = 0`
//!
//! Everything here is built from jets, so all fields carry exact
//! derivatives.

use crate::error::{arg, Result};
use crate::field::{integrate_cumulative, Grid, ScalarField};
use crate::gse::{Background, Role, Solution};
use crate::jet::Jet;

/// Exact derivative order attached to model fields.
pub const MODEL_ORDER: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    CoulombX,
    EffmassLog,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::CoulombX => "coulomb_x",
            Family::EffmassLog => "effmass_log",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        match s {
            "coulomb_x" | "coulomb" => Some(Family::CoulombX),
            "effmass_log" | "effmass" => Some(Family::EffmassLog),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub family: Family,
    /// Bound-state design parameters, `λ_i = -κ_i²`.
    pub kappa: Vec<f64>,
    /// Mass scale of the effective-mass family.
    pub alpha: f64,
    /// Wavenumber for oscillatory solutions.
    pub k: f64,
    /// Normalization parameter of isospectral families.
    pub gamma: f64,
    /// Base point of the integrals; `None` means the left grid end.
    pub x0: Option<f64>,
}

impl ModelParams {
    pub fn coulomb(kappa: &[f64]) -> Self {
        ModelParams {
            family: Family::CoulombX,
            kappa: kappa.to_vec(),
            alpha: 1.0,
            k: 1.0,
            gamma: 0.0,
            x0: None,
        }
    }

    pub fn effmass(alpha: f64, kappa: &[f64]) -> Self {
        ModelParams {
            family: Family::EffmassLog,
            kappa: kappa.to_vec(),
            alpha,
            k: 1.0,
            gamma: 0.0,
            x0: None,
        }
    }

    /// `κ_i = √(-E_i)` from negative design energies.
    pub fn from_energies(family: Family, alpha: f64, energies: &[f64]) -> Result<Self> {
        if let Some(e) = energies.iter().find(|e| !(**e < 0.0)) {
            return arg(format!("design energy {e} must be negative"));
        }
        let kappa: Vec<f64> = energies.iter().map(|e| (-e).sqrt()).collect();
        let p = ModelParams {
            family,
            kappa,
            alpha,
            k: 1.0,
            gamma: 0.0,
            x0: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = gamma;
        self
    }

    pub fn with_x0(mut self, x0: f64) -> Self {
        self.x0 = Some(x0);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0) || !self.alpha.is_finite() {
            return arg(format!("alpha must be positive, got {}", self.alpha));
        }
        if let Some(k) = self.kappa.iter().find(|k| !(**k > 0.0) || !k.is_finite()) {
            return arg(format!("kappa must be positive, got {k}"));
        }
        if self.kappa.windows(2).any(|w| w[1] <= w[0]) {
            return arg("kappa must be strictly increasing");
        }
        Ok(())
    }

    pub fn energies(&self) -> Vec<f64> {
        self.kappa.iter().map(|k| -k * k).collect()
    }

    /// `γ_i = √((1 + 4α²κ_i²) / (4α²))` for the effective-mass seeds.
    pub fn gammas(&self) -> Vec<f64> {
        self.kappa
            .iter()
            .map(|k| log_rate(self.alpha, -k * k))
            .collect()
    }

    fn base(&self, grid: &Grid) -> f64 {
        self.x0.unwrap_or(grid.x_min())
    }
}

/// Rate `γ` with `γ² = (1 - 4α²E)/(4α²)` for `E < 1/(4α²)`.
fn log_rate(alpha: f64, e: f64) -> f64 {
    ((1.0 - 4.0 * alpha * alpha * e) / (4.0 * alpha * alpha)).sqrt()
}

/// Oscillation rate `ν` with `ν² = (4α²E - 1)/(4α²)` for `E > 1/(4α²)`.
fn log_frequency(alpha: f64, e: f64) -> f64 {
    ((4.0 * alpha * alpha * e - 1.0) / (4.0 * alpha * alpha)).sqrt()
}

/// Energy separating oscillatory from hyperbolic solutions.
pub fn threshold_energy(p: &ModelParams) -> f64 {
    match p.family {
        Family::CoulombX => 0.0,
        Family::EffmassLog => 1.0 / (4.0 * p.alpha * p.alpha),
    }
}

fn check_grid(grid: &Grid) -> Result<()> {
    if !(grid.x_min() > 0.0) {
        return arg(format!(
            "model families are singular at 0; grid must start above 0, got x_min = {}",
            grid.x_min()
        ));
    }
    Ok(())
}

pub fn model_background(p: &ModelParams, grid: &Grid) -> Result<Background> {
    p.validate()?;
    check_grid(grid)?;
    match p.family {
        Family::CoulombX => Background::new(
            ScalarField::analytic(grid, MODEL_ORDER, |x| x.recip())?,
            ScalarField::analytic(grid, MODEL_ORDER, |x| x)?,
            ScalarField::analytic(grid, MODEL_ORDER, |x| (x * 4.0).recip())?,
            "coulomb_x",
        ),
        Family::EffmassLog => {
            let a2 = p.alpha * p.alpha;
            Background::new(
                ScalarField::analytic(grid, MODEL_ORDER, |x| (x * x).recip() * a2)?,
                ScalarField::constant(grid, 1.0),
                ScalarField::zeros(grid),
                format!("effmass_log(alpha={})", p.alpha),
            )
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    Sin,
    Cos,
    Cosh,
    Sinh,
}

impl Branch {
    pub fn parse(s: &str) -> Option<Branch> {
        match s {
            "sin" => Some(Branch::Sin),
            "cos" => Some(Branch::Cos),
            "cosh" => Some(Branch::Cosh),
            "sinh" => Some(Branch::Sinh),
            _ => None,
        }
    }

    pub fn is_oscillatory(self) -> bool {
        matches!(self, Branch::Sin | Branch::Cos)
    }
}

/// Closed-form solution as a jet function of `x`.
fn solution_jet(p: &ModelParams, branch: Branch, e: f64) -> impl Fn(Jet) -> Jet {
    let family = p.family;
    let alpha = p.alpha;
    move |x: Jet| match family {
        Family::CoulombX => {
            if branch.is_oscillatory() {
                let k = e.sqrt();
                let (s, c) = (x * k).sin_cos();
                let f = if branch == Branch::Sin { s } else { c };
                f / (x.sqrt() * k)
            } else {
                let kappa = (-e).sqrt();
                let (s, c) = (x * kappa).sinh_cosh();
                let f = if branch == Branch::Cosh { c } else { s };
                f / (x * kappa).sqrt()
            }
        }
        Family::EffmassLog => {
            let t = x.ln();
            if branch.is_oscillatory() {
                let nu = log_frequency(alpha, e);
                let (s, c) = (t * (alpha * nu)).sin_cos();
                let f = if branch == Branch::Sin { s } else { c };
                f * alpha / x.sqrt()
            } else {
                let g = log_rate(alpha, e);
                let (s, c) = (t * (alpha * g)).sinh_cosh();
                let f = if branch == Branch::Cosh { c } else { s };
                f * (x.recip() * alpha).sqrt()
            }
        }
    }
}

/// Solution of the model equation at energy `e` on the requested branch,
/// with its measured residual.
pub fn model_solution(p: &ModelParams, branch: Branch, e: f64, grid: &Grid) -> Result<Solution> {
    let bg = model_background(p, grid)?;
    model_solution_on(&bg, p, branch, e)
}

/// As `model_solution`, reusing an existing model background.
pub fn model_solution_on(bg: &Background, p: &ModelParams, branch: Branch, e: f64) -> Result<Solution> {
    let th = threshold_energy(p);
    if !e.is_finite() {
        return arg("energy must be finite");
    }
    if branch.is_oscillatory() && !(e > th) {
        return arg(format!(
            "oscillatory branch needs E > {th} for {}, got {e}",
            p.family.name()
        ));
    }
    if !branch.is_oscillatory() && !(e < th) {
        return arg(format!(
            "hyperbolic branch needs E < {th} for {}, got {e}",
            p.family.name()
        ));
    }
    let phi = ScalarField::analytic(bg.grid(), MODEL_ORDER, solution_jet(p, branch, e))?;
    let role = if branch.is_oscillatory() {
        Role::Generic
    } else {
        Role::Seed
    };
    Solution::new(bg, phi, e, role)
}

/// Seed branches used by the multi-state closed forms.
pub fn seed_branches(p: &ModelParams) -> Vec<Branch> {
    let n = p.kappa.len();
    match (p.family, n) {
        // the printed three-state Wronskian uses (cosh, sinh, sinh)
        (Family::CoulombX, 3) => vec![Branch::Cosh, Branch::Sinh, Branch::Sinh],
        _ => (0..n)
            .map(|i| if i % 2 == 0 { Branch::Cosh } else { Branch::Sinh })
            .collect(),
    }
}

/// Hyperbolic seeds `η_i` at `λ_i = -κ_i²` with the branches of
/// `seed_branches`.
pub fn model_seeds(bg: &Background, p: &ModelParams) -> Result<Vec<Solution>> {
    p.energies()
        .into_iter()
        .zip(seed_branches(p))
        .map(|(e, b)| model_solution_on(bg, p, b, e))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ClosedForm {
    V1,
    V2,
    V3,
    /// Isospectral deformation of `V1` by `Γ`, consistent with the generic
    /// engine.
    Iso,
    /// The isospectral formula exactly as printed in the source material.
    IsoPrinted,
}

impl ClosedForm {
    fn states(self) -> usize {
        match self {
            ClosedForm::V1 | ClosedForm::Iso | ClosedForm::IsoPrinted => 1,
            ClosedForm::V2 => 2,
            ClosedForm::V3 => 3,
        }
    }
}

/// Wronskian of jets through their Taylor coefficients.
pub fn jet_wronskian(fs: &[Jet]) -> Jet {
    match fs.len() {
        1 => fs[0],
        2 => {
            let (a, b) = (fs[0], fs[1]);
            a * b.differentiate() - a.differentiate() * b
        }
        3 => {
            let d1: Vec<Jet> = fs.iter().map(Jet::differentiate).collect();
            let d2: Vec<Jet> = d1.iter().map(Jet::differentiate).collect();
            let minor = |i: usize, j: usize| d1[i] * d2[j] - d1[j] * d2[i];
            fs[0] * minor(1, 2) - fs[1] * minor(0, 2) + fs[2] * minor(0, 1)
        }
        n => panic!("jet_wronskian supports 1 to 3 functions, got {n}"),
    }
}

/// `(1/(x√(κ₁κ₂))) (κ₂ cosh κ₁x cosh κ₂x - κ₁ sinh κ₁x sinh κ₂x)`
fn coulomb_w12(x: Jet, k1: f64, k2: f64) -> Jet {
    let (s1, c1) = (x * k1).sinh_cosh();
    let (s2, c2) = (x * k2).sinh_cosh();
    (c1 * c2 * k2 - s1 * s2 * k1) / (x * (k1 * k2).sqrt())
}

/// The printed six-term three-state Wronskian.
fn coulomb_w123(x: Jet, k1: f64, k2: f64, k3: f64) -> Jet {
    let (s1, c1) = (x * k1).sinh_cosh();
    let (s2, c2) = (x * k2).sinh_cosh();
    let (s3, c3) = (x * k3).sinh_cosh();
    let bracket = c1 * c2 * s3 * (k2 * k3 * k3) - c1 * s2 * c3 * (k2 * k2 * k3) - s1 * s2 * s3 * (k1 * k3 * k3)
        + s1 * s3 * s2 * (k1 * k2 * k2)
        + c1 * s2 * c3 * (k1 * k1 * k3)
        - c1 * c2 * s3 * (k1 * k1 * k2);
    bracket / (x.powf(1.5) * (k1 * k2 * k3).sqrt())
}

/// `(α²/x²)(γ₂ cosh αγ₁t cosh αγ₂t - γ₁ sinh αγ₁t sinh αγ₂t)`, `t = ln x`
fn effmass_w12(x: Jet, alpha: f64, g1: f64, g2: f64) -> Jet {
    let t = x.ln();
    let (s1, c1) = (t * (alpha * g1)).sinh_cosh();
    let (s2, c2) = (t * (alpha * g2)).sinh_cosh();
    (c1 * c2 * g2 - s1 * s2 * g1) * (alpha * alpha) / (x * x)
}

fn effmass_seed(x: Jet, alpha: f64, g: f64, branch: Branch) -> Jet {
    let (s, c) = (x.ln() * (alpha * g)).sinh_cosh();
    let f = if branch == Branch::Cosh { c } else { s };
    f * (x.recip() * alpha).sqrt()
}

/// `-(2x/α) d/dx [ (x/α) d/dx f ]` for a field `f` with exact derivatives.
fn effmass_log_operator(grid: &Grid, alpha: f64, f: impl Fn(Jet) -> Jet) -> Result<ScalarField> {
    ScalarField::analytic(grid, MODEL_ORDER, move |x| {
        let inner = x * f(x).differentiate() / alpha;
        x * inner.differentiate() * (-2.0 / alpha)
    })
}

/// Closed-form potential of the requested kind.
pub fn model_closed_potential(p: &ModelParams, which: ClosedForm, grid: &Grid) -> Result<ScalarField> {
    p.validate()?;
    check_grid(grid)?;
    let need = which.states();
    if p.kappa.len() != need {
        return arg(format!(
            "{which:?} needs {need} kappa value(s), got {}",
            p.kappa.len()
        ));
    }
    let k = &p.kappa;
    let x0 = p.base(grid);
    let gamma = p.gamma;
    match p.family {
        Family::CoulombX => {
            let k1 = k[0];
            let v1 = move |x: Jet| (x * 4.0).recip() - x * (x * k1).sech2() * (2.0 * k1 * k1);
            match which {
                ClosedForm::V1 => ScalarField::analytic(grid, MODEL_ORDER, v1),
                ClosedForm::V2 => {
                    let k2 = k[1];
                    ScalarField::analytic(grid, MODEL_ORDER, move |x| {
                        let lw = coulomb_w12(x, k1, k2).ln();
                        (x * 4.0).recip() * 9.0 - x * lw.differentiate().differentiate() * 2.0
                    })
                }
                ClosedForm::V3 => {
                    let (k2, k3) = (k[1], k[2]);
                    ScalarField::analytic(grid, MODEL_ORDER, move |x| {
                        let lw = coulomb_w123(x, k1, k2, k3).ln();
                        (x * 4.0).recip() * 13.0 - x * lw.differentiate().differentiate() * 2.0
                    })
                }
                ClosedForm::Iso => {
                    let t0 = (k1 * x0).tanh();
                    ScalarField::analytic(grid, MODEL_ORDER, move |x| {
                        let p = ((x * k1).tanh() - t0) * gamma + 1.0;
                        v1(x) - x * p.ln().differentiate().differentiate() * 2.0
                    })
                }
                ClosedForm::IsoPrinted => ScalarField::analytic(grid, MODEL_ORDER, move |x| {
                    let p = (x * k1).tanh() * gamma + 1.0;
                    (x * 4.0).recip() - x * (x * k1).sech2() * (2.0 * k1) - x * p.ln().differentiate() * 2.0
                }),
            }
        }
        Family::EffmassLog => {
            let alpha = p.alpha;
            let g = p.gammas();
            let g1 = g[0];
            let v1 = move |x: Jet| (x.ln() * (alpha * g1)).sech2() * (-2.0 * g1 * g1);
            match which {
                ClosedForm::V1 => ScalarField::analytic(grid, MODEL_ORDER, v1),
                ClosedForm::V2 => {
                    let g2 = g[1];
                    effmass_log_operator(grid, alpha, move |x| effmass_w12(x, alpha, g1, g2).ln())
                }
                ClosedForm::V3 => {
                    let branches = seed_branches(p);
                    let g = g.clone();
                    effmass_log_operator(grid, alpha, move |x| {
                        let seeds: Vec<Jet> = (0..3)
                            .map(|i| effmass_seed(x, alpha, g[i], branches[i]))
                            .collect();
                        jet_wronskian(&seeds).ln()
                    })
                }
                ClosedForm::Iso => {
                    let t0 = (x0.ln() * alpha * g1).tanh();
                    let base = ScalarField::analytic(grid, MODEL_ORDER, v1)?;
                    let corr = effmass_log_operator(grid, alpha, move |x| {
                        let tanh = (x.ln() * (alpha * g1)).tanh();
                        ((tanh - t0) * (gamma / g1) + 1.0).ln()
                    })?;
                    Ok(&base + &corr)
                }
                ClosedForm::IsoPrinted => {
                    // P = 1 + Γ ∫ α²/(x² cosh²(αγ ln x)) dx, integrated numerically
                    let integrand = ScalarField::analytic(grid, MODEL_ORDER, move |x| {
                        (x.ln() * (alpha * g1)).sech2() * (alpha * alpha) / (x * x)
                    })?;
                    let p_field = &integrate_cumulative(&integrand, x0)?.scale(gamma) + 1.0;
                    let lp = p_field.ln();
                    let inner = &lp.derive(1)? * &ScalarField::analytic(grid, MODEL_ORDER, |x| x)?;
                    let outer = inner.derive(1)?;
                    let base = ScalarField::analytic(grid, MODEL_ORDER, v1)?;
                    let x = ScalarField::analytic(grid, MODEL_ORDER, |x| x)?;
                    Ok(&base - &(&x * &outer).scale(2.0 / (alpha * alpha)))
                }
            }
        }
    }
}

/// Bound state of `V1`: `U = √(m/q)/η₁`.
pub fn model_bound_state(p: &ModelParams, grid: &Grid) -> Result<ScalarField> {
    p.validate()?;
    check_grid(grid)?;
    if p.kappa.is_empty() {
        return arg("bound state needs one kappa value");
    }
    let k1 = p.kappa[0];
    match p.family {
        Family::CoulombX => ScalarField::analytic(grid, MODEL_ORDER, move |x| {
            (x.recip() * k1).sqrt() * (x * k1).cosh().recip()
        }),
        Family::EffmassLog => {
            let alpha = p.alpha;
            let g1 = p.gammas()[0];
            ScalarField::analytic(grid, MODEL_ORDER, move |x| {
                (x.recip() * alpha).sqrt() * (x.ln() * (alpha * g1)).cosh().recip()
            })
        }
    }
}

/// Number of strict interior local minima.
pub fn count_local_minima(v: &ScalarField) -> usize {
    let y = v.values();
    (1..y.len().saturating_sub(1))
        .filter(|&i| y[i] < y[i - 1] && y[i] < y[i + 1])
        .count()
}

/// Depth of the deepest well, `-min v`.
pub fn min_depth(v: &ScalarField) -> f64 {
    -v.values().iter().copied().fold(f64::INFINITY, f64::min)
}

/// What a figure scenario builds.
#[derive(Clone, Debug, PartialEq)]
pub enum FigureKind {
    /// One-state potentials, one curve per energy.
    SingleStates { energies: Vec<f64> },
    /// Chain of added states, one curve per prefix.
    Chain { energies: Vec<f64> },
    /// Isospectral family of the one-state potential.
    Isospectral { energy: f64, gammas: Vec<f64> },
    /// Two- or three-state potential, one curve per α.
    MultiState { energies: Vec<f64>, alphas: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FigureScenario {
    pub name: &'static str,
    pub family: Family,
    pub alpha: f64,
    pub kind: FigureKind,
    pub description: &'static str,
}

/// Parameter sets of every reproduced figure.
pub fn figure_registry() -> Vec<FigureScenario> {
    use FigureKind::*;
    let e2 = |a: f64, b: f64| vec![a, b];
    vec![
        FigureScenario {
            name: "fig1a",
            family: Family::CoulombX,
            alpha: 1.0,
            kind: SingleStates {
                energies: vec![-4.0, -9.0, -16.0],
            },
            description: "coulomb_x one-state potentials at several energies",
        },
        FigureScenario {
            name: "fig1b",
            family: Family::CoulombX,
            alpha: 1.0,
            kind: Isospectral {
                energy: -16.0,
                gammas: vec![0.5, 1.0, 2.0],
            },
            description: "coulomb_x isospectral family, bound state -16",
        },
        FigureScenario {
            name: "fig1c",
            family: Family::CoulombX,
            alpha: 1.0,
            kind: Chain {
                energies: vec![-4.0, -16.0, -25.0],
            },
            description: "coulomb_x potentials with one, two and three states",
        },
        FigureScenario {
            name: "fig2a",
            family: Family::EffmassLog,
            alpha: 1.0,
            kind: Isospectral {
                energy: -2.0,
                gammas: vec![0.5, 1.0, 2.0],
            },
            description: "effmass_log isospectral family, bound state -2",
        },
        FigureScenario {
            name: "fig2b1",
            family: Family::EffmassLog,
            alpha: 1.0,
            kind: MultiState {
                energies: e2(-2.0, -6.0),
                alphas: vec![1.0],
            },
            description: "effmass_log two states, distant levels",
        },
        FigureScenario {
            name: "fig2b2",
            family: Family::EffmassLog,
            alpha: 1.0,
            kind: MultiState {
                energies: e2(-2.0, -3.75),
                alphas: vec![1.0],
            },
            description: "effmass_log two states, close levels",
        },
        FigureScenario {
            name: "fig2c",
            family: Family::EffmassLog,
            alpha: 1.0,
            kind: MultiState {
                energies: e2(-2.0, -3.75),
                alphas: vec![0.8, 1.0, 1.25],
            },
            description: "effmass_log two states, mass scale sweep",
        },
        FigureScenario {
            name: "fig3a1",
            family: Family::EffmassLog,
            alpha: 1.0,
            kind: MultiState {
                energies: vec![-1.0, -3.75, -6.25],
                alphas: vec![1.0],
            },
            description: "effmass_log three states, distant levels",
        },
        FigureScenario {
            name: "fig3a2",
            family: Family::EffmassLog,
            alpha: 1.0,
            kind: MultiState {
                energies: vec![-1.0, -3.75, -5.0],
                alphas: vec![1.0],
            },
            description: "effmass_log three states, two close levels",
        },
        FigureScenario {
            name: "fig3b",
            family: Family::EffmassLog,
            alpha: 1.0,
            kind: MultiState {
                energies: vec![-2.0, -4.75, -6.0],
                alphas: vec![1.0],
            },
            description: "effmass_log three close states",
        },
        FigureScenario {
            name: "fig3c",
            family: Family::EffmassLog,
            alpha: 1.0,
            kind: MultiState {
                energies: vec![-2.0, -3.75, -5.0],
                alphas: vec![1.0],
            },
            description: "effmass_log three close states",
        },
    ]
}

pub fn figure(name: &str) -> Option<FigureScenario> {
    figure_registry().into_iter().find(|f| f.name == name)
}
