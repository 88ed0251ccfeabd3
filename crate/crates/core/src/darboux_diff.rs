//! First-order Darboux operators, their adjoints, chains of them and the
//! two-seed Wronskian form, plus the residual checks that certify them.

use crate::error::{arg, Error, Result};
use crate::field::{derive, integrate_cumulative, wronskian, ScalarField};
use crate::gse::{equation_residual, first_node, Background, Role, Solution};

/// Seed magnitudes below this fraction of the maximum are masked from
/// residual maxima.
pub const SEED_MASK: f64 = 1e-12;

/// Nodes skipped at each end by `susy_residuals`. Nested one-sided
/// stencils contaminate up to three boundary nodes in sampled mode.
pub const SUSY_SKIP: usize = 4;

/// A solution at the transformation energy, with its measured residual.
#[derive(Clone, Debug)]
pub struct Seed {
    pub solution: Solution,
    pub lambda: f64,
    pub nodeless: bool,
    pub residual: f64,
}

impl Seed {
    pub fn background(&self) -> &Background {
        &self.solution.background
    }

    pub fn phi(&self) -> &ScalarField {
        &self.solution.phi
    }

    /// Record without a tolerance check.
    pub(crate) fn measured(bg: &Background, lambda: f64, phi: ScalarField, role: Role) -> Result<Seed> {
        if phi.max_abs() == 0.0 {
            return arg("seed function is identically zero");
        }
        let solution = Solution::new(bg, phi, lambda, role)?;
        Ok(Seed {
            nodeless: first_node(&solution.phi).is_none(),
            residual: solution.residual,
            solution,
            lambda,
        })
    }
}

pub fn make_seed(bg: &Background, lambda: f64, u: &Solution, tol: f64) -> Result<Seed> {
    let seed = Seed::measured(bg, lambda, u.phi.clone(), Role::Seed)?;
    if !(seed.residual <= tol) {
        return Err(Error::NotASolution {
            energy: lambda,
            residual: seed.residual,
            tol,
        });
    }
    Ok(seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Adjoint,
}

/// `A + B d/dx` between two backgrounds.
#[derive(Clone, Debug)]
pub struct DarbouxOp {
    pub a: ScalarField,
    pub b: ScalarField,
    /// `K = -U'/U` of the seed that built the forward operator.
    pub k: ScalarField,
    pub lambda: f64,
    pub direction: Direction,
    /// True when the seed has a node and the coefficients blow up there.
    pub singular: bool,
    /// Function annihilated by the operator.
    pub kernel: ScalarField,
    pub source: Background,
    pub target: Background,
}

impl DarbouxOp {
    /// Apply to a bare field.
    pub fn apply_field(&self, phi: &ScalarField) -> Result<ScalarField> {
        self.source.same_grid(phi)?;
        Ok(&(&self.a * phi) + &(&self.b * &derive(phi, 1)?))
    }

    /// The operator of the other direction between the same pair of
    /// backgrounds.
    pub fn adjoint(&self) -> Result<DarbouxOp> {
        let fwd_bg = match self.direction {
            Direction::Forward => &self.source,
            Direction::Adjoint => &self.target,
        };
        let (a, b, kernel, direction) = match self.direction {
            Direction::Forward => {
                let (a, b) = adjoint_coeffs(fwd_bg, &self.k)?;
                let eta = &fwd_bg.sqrt_q_over_m().recip() / &self.kernel;
                (a, b, eta, Direction::Adjoint)
            }
            Direction::Adjoint => {
                let b = fwd_bg.inv_sqrt_qm();
                let a = &b * &self.k;
                let u = &fwd_bg.sqrt_q_over_m().recip() / &self.kernel;
                (a, b, u, Direction::Forward)
            }
        };
        Ok(DarbouxOp {
            a,
            b,
            k: self.k.clone(),
            lambda: self.lambda,
            direction,
            singular: self.singular,
            kernel,
            source: self.target.clone(),
            target: self.source.clone(),
        })
    }
}

/// Coefficients of `(1/√(qm))(-d/dx + K) - (1/q)(√(q/m))'`.
fn adjoint_coeffs(bg: &Background, k: &ScalarField) -> Result<(ScalarField, ScalarField)> {
    let b = bg.inv_sqrt_qm();
    let corr = &derive(&bg.sqrt_q_over_m(), 1)? / bg.q();
    let a = &(&b * k) - &corr;
    Ok((a, -&b))
}

/// `K = -U'/U`
fn superpotential(u: &ScalarField) -> Result<ScalarField> {
    Ok(-&(&derive(u, 1)? / u))
}

/// `ṽ = v + 2√(q/m) (K/√(qm))' - S`
fn potential_from_k(bg: &Background, k: &ScalarField) -> Result<ScalarField> {
    let inner = derive(&(k * &bg.inv_sqrt_qm()), 1)?;
    Ok(&(bg.v() + &(&bg.sqrt_q_over_m() * &inner).scale(2.0)) - &bg.s_term()?)
}

pub fn operator_from_seed(seed: &Seed, direction: Direction) -> Result<DarbouxOp> {
    let bg = seed.background();
    let target = transformed_potential(bg, seed)?;
    let k = superpotential(seed.phi())?;
    let b = bg.inv_sqrt_qm();
    let forward = DarbouxOp {
        a: &b * &k,
        b,
        k,
        lambda: seed.lambda,
        direction: Direction::Forward,
        singular: !seed.nodeless,
        kernel: seed.phi().clone(),
        source: bg.clone(),
        target,
    };
    match direction {
        Direction::Forward => Ok(forward),
        Direction::Adjoint => forward.adjoint(),
    }
}

/// Map a solution through the operator; the result lives on `op.target`.
pub fn apply(op: &DarbouxOp, phi: &Solution) -> Result<Solution> {
    let out = op.apply_field(&phi.phi)?;
    let residual = equation_residual(&op.target, &out, phi.energy)?;
    Ok(Solution {
        phi: out,
        energy: phi.energy,
        background: op.target.clone(),
        role: Role::Generic,
        residual,
    })
}

/// `ṽ = v - 2√(q/m) [(1/√(qm)) U'/U]' - S` with `m`, `q` kept. A seed with
/// a node yields a background flagged singular; a zero exactly on a grid
/// node is a nodal-seed error.
pub fn transformed_potential(bg: &Background, seed: &Seed) -> Result<Background> {
    bg.same_grid(seed.phi())?;
    let k = superpotential(seed.phi())?;
    let v = potential_from_k(bg, &k)?;
    if let Some(i) = v.values().iter().position(|x| !x.is_finite()) {
        return Err(Error::NodalSeed {
            node: i,
            x: bg.grid().nodes()[i],
        });
    }
    let label = format!("{} | remove {}", bg.label(), seed.lambda);
    Ok(bg.with_potential(v, label)?.flagged_singular(!seed.nodeless))
}

/// `ṽ = (1/m)(K² + K') + (q/m)(1/q)' K - S + qλ`, the same potential
/// computed from the Riccati form.
pub fn transformed_potential_from_riccati(bg: &Background, seed: &Seed) -> Result<ScalarField> {
    let k = superpotential(seed.phi())?;
    let m_inv = bg.m().recip();
    let kin = &(&k * &k) + &derive(&k, 1)?;
    let weight = &(bg.q() / bg.m()) * &derive(&bg.q().recip(), 1)?;
    let mut v = &(&m_inv * &kin) + &(&weight * &k);
    v = &v - &bg.s_term()?;
    Ok(&v + &bg.q().scale(seed.lambda))
}

/// `η = √(m/q)/U` and `η̂ = η ∫_{x0} q U²`, both at `λ` on the transformed
/// background.
pub fn eta_pair(bg: &Background, seed: &Seed, x0: f64) -> Result<(Solution, Solution)> {
    let u = seed.phi();
    if let Some(i) = first_node(u) {
        return Err(Error::NodalSeed {
            node: i,
            x: bg.grid().nodes()[i],
        });
    }
    let target = transformed_potential(bg, seed)?;
    let eta = &bg.sqrt_q_over_m().recip() / u;
    let integral = integrate_cumulative(&(bg.q() * &u.powi(2)), x0)?;
    let eta_hat = &eta * &integral;
    Ok((
        Solution::new(&target, eta, seed.lambda, Role::Eta)?,
        Solution::new(&target, eta_hat, seed.lambda, Role::EtaHat)?,
    ))
}

#[derive(Clone, Debug)]
pub struct AddedState {
    pub background: Background,
    /// `U = √(m/q)/η`, the new state at `λ`.
    pub bound: Solution,
    /// `Û = √(m/q)(1/η) ∫ q η²`
    pub second: Solution,
    /// Maps solutions of the input background to the new one.
    pub op: DarbouxOp,
    /// `η` is small at both ends, so `U` is not a new normalizable state.
    pub duplicate: bool,
}

/// Fraction of `max|η|` below which an endpoint value counts as decayed.
const DECAY_FRACTION: f64 = 1e-3;

/// Insert a state at the energy of a nodeless, growing solution `η`.
pub fn add_bound_state(bg: &Background, eta_seed: &Seed) -> Result<AddedState> {
    add_bound_state_from(bg, eta_seed, bg.grid().x_min())
}

/// As `add_bound_state`, with the base point of the integral in `Û`.
pub fn add_bound_state_from(bg: &Background, eta_seed: &Seed, x0: f64) -> Result<AddedState> {
    let eta = eta_seed.phi();
    bg.same_grid(eta)?;
    if let Some(i) = first_node(eta) {
        return Err(Error::NodalSeed {
            node: i,
            x: bg.grid().nodes()[i],
        });
    }
    let k_tilde = &derive(eta, 1)? / eta;
    let v_new = &(bg.v() - &(&bg.sqrt_q_over_m() * &derive(&(&k_tilde * &bg.inv_sqrt_qm()), 1)?).scale(2.0))
        - &bg.s_term()?;
    let label = format!("{} | add {}", bg.label(), eta_seed.lambda);
    let new_bg = bg.with_potential(v_new, label)?;

    let sqrt_m_over_q = bg.sqrt_q_over_m().recip();
    let u = &sqrt_m_over_q / eta;
    let u_hat = &u * &integrate_cumulative(&(bg.q() * &eta.powi(2)), x0)?;
    let bound = Solution::new(&new_bg, u.clone(), eta_seed.lambda, Role::Bound)?;
    let second = Solution::new(&new_bg, u_hat, eta_seed.lambda, Role::Liouville)?;

    // (1/√(qm)) (-d/dx + η'/η)
    let b = bg.inv_sqrt_qm();
    let op = DarbouxOp {
        a: &b * &k_tilde,
        b: -&b,
        k: superpotential(&u)?,
        lambda: eta_seed.lambda,
        direction: Direction::Adjoint,
        singular: false,
        kernel: eta.clone(),
        source: bg.clone(),
        target: new_bg.clone(),
    };

    let n = eta.len();
    let big = eta.max_abs();
    let v = eta.values();
    let duplicate = v[0].abs() <= DECAY_FRACTION * big && v[n - 1].abs() <= DECAY_FRACTION * big;
    Ok(AddedState {
        background: new_bg,
        bound,
        second,
        op,
        duplicate,
    })
}

/// One step of a chain.
#[derive(Clone, Debug)]
pub struct ChainStep {
    pub op: DarbouxOp,
    /// Transformation function used at this step (`U₁`, then `χ₁`, `χ₂`, ...).
    pub chi: ScalarField,
    pub background: Background,
}

#[derive(Clone, Debug)]
pub struct Chain {
    pub steps: Vec<ChainStep>,
    /// Sum of the per-step superpotentials.
    pub k_total: ScalarField,
    /// `v + 2√(q/m)(K/√(qm))' - nS` from the summed superpotential.
    pub closed_potential: ScalarField,
    /// `max|v_n - closed_potential| / max|v_n|` over interior nodes.
    pub closed_form_divergence: f64,
}

impl Chain {
    pub fn background(&self) -> &Background {
        &self.steps.last().expect("chain has at least one step").background
    }

    pub fn order(&self) -> usize {
        self.steps.len()
    }

    /// `L_n ... L_1 φ`
    pub fn map(&self, phi: &Solution) -> Result<Solution> {
        let mut cur = phi.clone();
        for s in &self.steps {
            cur = apply(&s.op, &cur)?;
        }
        Ok(cur)
    }
}

/// Iterated first-order transformations with seeds that all solve `bg`.
pub fn chain_transform(bg: &Background, seeds: &[Seed]) -> Result<Chain> {
    if seeds.is_empty() {
        return arg("chain needs at least one seed");
    }
    for (i, a) in seeds.iter().enumerate() {
        bg.same_grid(a.phi())?;
        for b in &seeds[i + 1..] {
            if a.lambda == b.lambda {
                return arg(format!(
                    "repeated transformation energy {}; use the isospectral integral construction",
                    a.lambda
                ));
            }
        }
    }
    let mut pending: Vec<ScalarField> = seeds.iter().map(|s| s.phi().clone()).collect();
    let mut current = bg.clone();
    let mut steps = Vec::with_capacity(seeds.len());
    let mut k_total = ScalarField::zeros(bg.grid());
    for (j, s) in seeds.iter().enumerate() {
        let chi = pending[j].clone();
        let scale = s.phi().max_abs();
        if chi.check_finite().is_err() || chi.max_abs() <= 1e-14 * scale {
            return Err(Error::DegenerateChain { step: j + 1 });
        }
        let seed = Seed::measured(&current, s.lambda, chi.clone(), Role::Seed)?;
        let op = operator_from_seed(&seed, Direction::Forward)?;
        for p in pending.iter_mut().skip(j + 1) {
            *p = op.apply_field(p)?;
        }
        k_total = &k_total + &op.k;
        current = op.target.clone();
        steps.push(ChainStep {
            op,
            chi,
            background: current.clone(),
        });
    }
    let n = seeds.len() as f64;
    let inner = derive(&(&k_total * &bg.inv_sqrt_qm()), 1)?;
    let closed = &(bg.v() + &(&bg.sqrt_q_over_m() * &inner).scale(2.0)) - &bg.s_term()?.scale(n);
    let divergence = crate::compare::relative_interior_error(&closed, current.v());
    Ok(Chain {
        steps,
        k_total,
        closed_potential: closed,
        closed_form_divergence: divergence,
    })
}

/// 3x3 Wronskian `W(f, g, h)`.
fn wronskian3(f: &ScalarField, g: &ScalarField, h: &ScalarField) -> Result<ScalarField> {
    let d1 = [derive(f, 1)?, derive(g, 1)?, derive(h, 1)?];
    let d2 = [derive(f, 2)?, derive(g, 2)?, derive(h, 2)?];
    let c0 = &(&d1[1] * &d2[2]) - &(&d1[2] * &d2[1]);
    let c1 = &(&d1[0] * &d2[2]) - &(&d1[2] * &d2[0]);
    let c2 = &(&d1[0] * &d2[1]) - &(&d1[1] * &d2[0]);
    Ok(&(&(f * &c0) - &(g * &c1)) + &(h * &c2))
}

/// Second-order transformation written through Wronskians of solutions of
/// `bg` only: `v₂ = v - 2√(q/m)[√m (W₁₂/m)' / (√q W₁₂)]'` and
/// `φ₂ = W(U₁, U₂, φ) / (q m W₁₂)`.
pub fn order2_wronskian_transform(
    bg: &Background,
    seed1: &Seed,
    seed2: &Seed,
    phi: &Solution,
) -> Result<(Background, Solution)> {
    if seed1.lambda == seed2.lambda {
        return arg("second-order transformation needs distinct energies");
    }
    let (u1, u2) = (seed1.phi(), seed2.phi());
    bg.same_grid(u1)?;
    bg.same_grid(u2)?;
    bg.same_grid(&phi.phi)?;
    let w12 = wronskian(u1, u2)?;
    let scale = (u1 * &derive(u2, 1)?).max_abs() + (&derive(u1, 1)? * u2).max_abs();
    let degenerate = w12.max_abs() <= 1e-10 * scale;
    if degenerate {
        return Err(Error::DegeneratePair {
            node: 0,
            x: bg.grid().x_min(),
        });
    }
    if let Some(i) = first_node(&w12) {
        return Err(Error::DegeneratePair {
            node: i,
            x: bg.grid().nodes()[i],
        });
    }
    let w_over_m = &w12 / bg.m();
    let inner = &(&bg.m().sqrt() * &derive(&w_over_m, 1)?) / &(&bg.q().sqrt() * &w12);
    let v2 = bg.v() - &(&bg.sqrt_q_over_m() * &derive(&inner, 1)?).scale(2.0);
    let label = format!("{} | wronskian {} {}", bg.label(), seed1.lambda, seed2.lambda);
    let bg2 = bg.with_potential(v2, label)?;
    let w3 = wronskian3(u1, u2, &phi.phi)?;
    let phi2 = &w3 / &(&(bg.q() * bg.m()) * &w12);
    let sol = Solution::new(&bg2, phi2, phi.energy, Role::Generic)?;
    Ok((bg2, sol))
}

/// Maxima of the scaled residual families certifying a forward operator.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SusyReport {
    /// `|L(Hφ) - H̃(Lφ)|`
    pub intertwining: f64,
    /// generalized Riccati equation for `K`
    pub riccati: f64,
    /// `|L†Lφ - (E-λ)φ|`
    pub factorization: f64,
    /// `|LL†φ̃ - (E-λ)φ̃|` with `φ̃ = Lφ`
    pub factorization_partner: f64,
    /// `|L U|`
    pub kernel: f64,
    /// `|L† η|`
    pub kernel_adjoint: f64,
}

impl SusyReport {
    pub fn max(&self) -> f64 {
        [
            self.intertwining,
            self.riccati,
            self.factorization,
            self.factorization_partner,
            self.kernel,
            self.kernel_adjoint,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Max over unmasked interior nodes of `|r|`, divided by `1 + max|reference|`.
fn scaled(r: &ScalarField, reference: &ScalarField, mask: &[bool]) -> f64 {
    let n = r.len();
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for i in SUSY_SKIP..n.saturating_sub(SUSY_SKIP) {
        if mask[i] {
            continue;
        }
        num = num.max(r.values()[i].abs());
        den = den.max(reference.values()[i].abs());
    }
    num / (1.0 + den)
}

/// Residuals of intertwining, Riccati, both factorizations and both kernels
/// for the forward operator `op` from `bg` to `bg_t`. Large values are data.
pub fn susy_residuals(bg: &Background, bg_t: &Background, op: &DarbouxOp, probes: &[Solution]) -> Result<SusyReport> {
    let fwd = match op.direction {
        Direction::Forward => op.clone(),
        Direction::Adjoint => op.adjoint()?,
    };
    let adj = fwd.adjoint()?;
    let u = &fwd.kernel;
    let big = u.max_abs();
    let mask: Vec<bool> = u.values().iter().map(|x| x.abs() < SEED_MASK * big).collect();
    let lambda = fwd.lambda;
    let mut rep = SusyReport::default();

    // Riccati: (1/qm)(-K' + K²) - v/q - (1/q)(1/m)' K + λ
    let k = &fwd.k;
    let qm_inv = (bg.q() * bg.m()).recip();
    let kin = &(k * k) - &derive(k, 1)?;
    let lead = &qm_inv * &kin;
    let mass_term = &(&derive(&bg.m().recip(), 1)? / bg.q()) * k;
    let ric = &(&(&lead - &(bg.v() / bg.q())) - &mass_term) + lambda;
    rep.riccati = scaled(&ric, &lead, &mask);

    rep.kernel = scaled(&fwd.apply_field(u)?, u, &mask);
    let eta = &adj.kernel;
    rep.kernel_adjoint = scaled(&adj.apply_field(eta)?, eta, &mask);

    for p in probes {
        let phi = &p.phi;
        let lphi = fwd.apply_field(phi)?;
        let lhs = fwd.apply_field(&bg.hamiltonian(phi)?)?;
        let rhs = bg_t.hamiltonian(&lphi)?;
        rep.intertwining = rep.intertwining.max(scaled(&(&lhs - &rhs), &rhs, &mask));

        let shift = p.energy - lambda;
        let back = adj.apply_field(&lphi)?;
        let expect = phi.scale(shift);
        rep.factorization = rep.factorization.max(scaled(&(&back - &expect), &expect, &mask));

        let partner = fwd.apply_field(&adj.apply_field(&lphi)?)?;
        let expect_t = lphi.scale(shift);
        rep.factorization_partner = rep
            .factorization_partner
            .max(scaled(&(&partner - &expect_t), &expect_t, &mask));
    }
    Ok(rep)
}
