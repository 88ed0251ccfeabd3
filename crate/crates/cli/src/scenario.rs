//! Executes a scenario plan: builds the base background, applies the
//! transformation steps and collects curves, states, spectra and checks.

use gendarboux::compare::relative_interior_error;
use gendarboux::darboux_diff::{
    apply, chain_transform, make_seed, operator_from_seed, susy_residuals, DarbouxOp, Direction, Seed,
};
use gendarboux::darboux_int::{isospectral_family, matched_c};
use gendarboux::gse::{equation_residual, spectrum_fd, Background, Role, Solution, Spectrum};
use gendarboux::models::{
    count_local_minima, min_depth, model_background, model_closed_potential, model_solution_on, seed_branches,
    threshold_energy, Branch, ClosedForm, Family, ModelParams, MODEL_ORDER,
};
use gendarboux::{make_grid, Grid, ScalarField};
use serde::Serialize;

use crate::config::{GridSpec, InlineSpec, ScenarioConfig, StepKind, StepSpec, VerifySpec};
use crate::error::CliError;
use crate::expr::Expr;

/// Fraction of `max|χ|` below which an endpoint value counts as decayed.
const DECAY_FRACTION: f64 = 1e-3;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: String, value: f64, threshold: f64) -> Check {
        Check {
            name,
            value,
            threshold,
            pass: value <= threshold,
        }
    }

    fn at_least(name: String, value: f64, threshold: f64) -> Check {
        Check {
            name,
            value,
            threshold,
            pass: value >= threshold,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum FlagKind {
    /// Built from a seed with a node.
    Singular,
    /// The inserted state is not normalizable.
    Duplicate,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Flag {
    pub curve: String,
    pub flag: FlagKind,
}

/// One produced potential with the states it carries.
#[derive(Clone, Debug)]
pub struct Curve {
    pub name: String,
    pub background: Background,
    /// `(column name, state)`
    pub states: Vec<(String, ScalarField)>,
    /// Designed bound-state energies, in insertion order.
    pub designed: Vec<f64>,
    /// Index of the `alphas` run that produced the curve.
    pub run: usize,
    /// A final curve of its run: every curve of a closing sweep or family,
    /// or the end of a closing chain.
    pub last: bool,
}

#[derive(Clone, Debug)]
pub struct SpectrumResult {
    pub curve: String,
    pub spectrum: Spectrum,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Report {
    pub scenario: String,
    pub checks: Vec<Check>,
    pub flags: Vec<Flag>,
    pub pass: bool,
}

impl Report {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[derive(Clone, Debug)]
pub struct ScenarioResult {
    pub name: String,
    pub grid: Grid,
    pub curves: Vec<Curve>,
    pub spectra: Vec<SpectrumResult>,
    pub report: Report,
}

/// Where the base background comes from.
enum Source {
    Model(ModelParams),
    Inline(InlineSpec),
}

impl Source {
    fn background(&self, grid: &Grid) -> Result<Background, CliError> {
        match self {
            Source::Model(p) => Ok(model_background(p, grid)?),
            Source::Inline(spec) => {
                let field = |s: &str| -> Result<ScalarField, CliError> {
                    let e = Expr::parse(s).map_err(|e| CliError::Config(e.to_string()))?;
                    Ok(ScalarField::analytic(grid, MODEL_ORDER, |x| e.eval(x))?)
                };
                Ok(Background::new(field(&spec.m)?, field(&spec.q)?, field(&spec.v)?, "inline")?)
            }
        }
    }

    fn params(&self) -> Option<&ModelParams> {
        match self {
            Source::Model(p) => Some(p),
            Source::Inline(_) => None,
        }
    }

    /// Branch used for the `index`-th designed state of a run with `total`
    /// states.
    fn default_branch(&self, index: usize, total: usize) -> Branch {
        match self {
            Source::Model(p) => {
                let mut q = p.clone();
                q.kappa = vec![1.0; total];
                seed_branches(&q)[index]
            }
            Source::Inline(_) => Branch::Cosh,
        }
    }

    /// Solution of the base background at `e`.
    fn base_solution(&self, bg0: &Background, step: &StepSpec, branch: Branch, e: f64) -> Result<Solution, CliError> {
        match self {
            Source::Model(p) => Ok(model_solution_on(bg0, p, branch, e)?),
            Source::Inline(_) => {
                let src = step.seed.as_deref().expect("validated: inline steps carry a seed");
                let expr = Expr::parse(src).map_err(|e| CliError::Config(e.to_string()))?;
                let phi = ScalarField::analytic(bg0.grid(), MODEL_ORDER, |x| expr.eval(x))?;
                Ok(Solution::new(bg0, phi, e, Role::Seed)?)
            }
        }
    }

    fn probes(&self, bg0: &Background) -> Result<Vec<Solution>, CliError> {
        match self {
            Source::Model(p) => {
                let th = threshold_energy(p);
                Ok(vec![
                    model_solution_on(bg0, p, Branch::Sin, th + 1.0)?,
                    model_solution_on(bg0, p, Branch::Cos, th + 4.0)?,
                ])
            }
            Source::Inline(spec) => spec
                .probes
                .iter()
                .map(|pr| {
                    let expr = Expr::parse(&pr.phi).map_err(|e| CliError::Config(e.to_string()))?;
                    let phi = ScalarField::analytic(bg0.grid(), MODEL_ORDER, |x| expr.eval(x))?;
                    Ok(Solution::new(bg0, phi, pr.energy, Role::Generic)?)
                })
                .collect(),
        }
    }
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

fn state_column(curve: &str, e: f64) -> String {
    format!("{curve}_psi_e{}", fmt_num(e))
}

/// Current state of a run: the background reached so far and everything
/// tracked on it.
#[derive(Clone)]
struct Track {
    bg0: Background,
    bg: Background,
    ops: Vec<DarbouxOp>,
    states: Vec<Solution>,
    probes: Vec<Solution>,
    designed: Vec<(f64, Branch)>,
    /// Only insertions at model seeds so far.
    pristine: bool,
    counter: usize,
}

impl Track {
    fn map_base(&self, sol: &Solution) -> gendarboux::Result<Solution> {
        let mut cur = sol.clone();
        for op in &self.ops {
            cur = apply(op, &cur)?;
        }
        Ok(cur)
    }
}

struct Runner<'a> {
    cfg: &'a ScenarioConfig,
    verify: &'a VerifySpec,
    source: Source,
    suffix: String,
    run: usize,
    curves: Vec<Curve>,
    checks: Vec<Check>,
    flags: Vec<Flag>,
}

fn decayed_at_both_ends(chi: &ScalarField) -> bool {
    let v = chi.values();
    let big = chi.max_abs();
    v[0].abs() <= DECAY_FRACTION * big && v[v.len() - 1].abs() <= DECAY_FRACTION * big
}

impl Runner<'_> {
    fn tol(&self) -> f64 {
        self.verify.residual_tol
    }

    fn check_max(&mut self, name: String, value: f64, threshold: f64) {
        self.checks.push(Check::at_most(name, value, threshold));
    }

    fn perturbed(&self, bg: &Background) -> gendarboux::Result<Background> {
        if self.verify.perturb == 0.0 {
            return Ok(bg.clone());
        }
        bg.with_potential(bg.v() + self.verify.perturb, format!("{} | perturbed", bg.label()))
    }

    fn closed_form_for(&self, designed: &[(f64, Branch)], pristine: bool) -> Option<(ClosedForm, ModelParams)> {
        let p = self.source.params()?;
        if !pristine || designed.is_empty() || designed.len() > 3 {
            return None;
        }
        let energies: Vec<f64> = designed.iter().map(|d| d.0).collect();
        let q = ModelParams::from_energies(p.family, p.alpha, &energies).ok()?;
        let branches: Vec<Branch> = designed.iter().map(|d| d.1).collect();
        if branches != seed_branches(&q) {
            return None;
        }
        let which = match designed.len() {
            1 => ClosedForm::V1,
            2 => ClosedForm::V2,
            _ => ClosedForm::V3,
        };
        Some((which, q))
    }

    /// Residual checks for one forward operator from `track.bg`.
    fn op_checks(&mut self, curve: &str, track: &Track, seed: &Seed, op: &DarbouxOp) -> gendarboux::Result<()> {
        if !self.verify.residuals {
            return Ok(());
        }
        let tol = self.tol();
        self.check_max(format!("{curve}.seed_residual"), seed.residual, tol);
        let target = self.perturbed(&op.target)?;
        let rep = susy_residuals(&track.bg, &target, op, &track.probes)?;
        for (what, v) in [
            ("intertwining", rep.intertwining),
            ("riccati", rep.riccati),
            ("factorization", rep.factorization),
            ("factorization_partner", rep.factorization_partner),
            ("kernel", rep.kernel),
            ("kernel_adjoint", rep.kernel_adjoint),
        ] {
            self.check_max(format!("{curve}.{what}"), v, tol);
        }
        Ok(())
    }

    fn solution_checks(&mut self, curve: &str, bg: &Background, states: &[Solution], probes: &[Solution]) -> gendarboux::Result<()> {
        if !self.verify.residuals {
            return Ok(());
        }
        let target = self.perturbed(bg)?;
        let tol = self.tol();
        for (what, list) in [("state_residual", states), ("probe_residual", probes)] {
            if list.is_empty() {
                continue;
            }
            let mut worst = 0.0f64;
            for s in list {
                worst = worst.max(equation_residual(&target, &s.phi, s.energy)?);
            }
            self.check_max(format!("{curve}.{what}"), worst, tol);
        }
        Ok(())
    }

    fn closed_checks(&mut self, curve: &str, bg: &Background, designed: &[(f64, Branch)], pristine: bool) -> gendarboux::Result<()> {
        if !self.verify.closed_form {
            return Ok(());
        }
        if let Some((which, p)) = self.closed_form_for(designed, pristine) {
            let closed = model_closed_potential(&p, which, bg.grid())?;
            let err = relative_interior_error(bg.v(), &closed);
            self.check_max(format!("{curve}.closed_form"), err, self.verify.closed_form_tol);
        }
        Ok(())
    }

    fn push_curve(&mut self, name: String, bg: Background, states: &[Solution], designed: &[(f64, Branch)]) {
        let columns = states
            .iter()
            .map(|s| (state_column(&name, s.energy), s.phi.clone()))
            .collect();
        self.curves.push(Curve {
            name,
            background: bg,
            states: columns,
            designed: designed.iter().map(|d| d.0).collect(),
            run: self.run,
            last: false,
        });
    }

    fn flag(&mut self, curve: &str, flag: FlagKind) {
        self.flags.push(Flag {
            curve: curve.to_string(),
            flag,
        });
    }

    /// Seed on the current background at `e`.
    fn seed(&self, track: &Track, step: &StepSpec, branch: Branch, e: f64) -> gendarboux::Result<Seed> {
        let base = self
            .source
            .base_solution(&track.bg0, step, branch, e)
            .map_err(|err| match err {
                CliError::Engine(e) => e,
                other => gendarboux::Error::Argument(other.to_string()),
            })?;
        let mapped = track.map_base(&base)?;
        make_seed(&track.bg, e, &mapped, f64::INFINITY)
    }

    /// Apply one forward operator and advance the track.
    fn advance(&mut self, track: &mut Track, name: &str, seed: &Seed, op: DarbouxOp, insert: Option<Branch>) -> gendarboux::Result<()> {
        self.op_checks(name, track, seed, &op)?;
        let target = op.target.clone();
        let removed = seed.lambda;
        let mut states = Vec::with_capacity(track.states.len() + 1);
        for s in &track.states {
            if insert.is_none() && s.energy == removed {
                continue;
            }
            states.push(apply(&op, s)?);
        }
        if let Some(branch) = insert {
            if seed.nodeless {
                let u = &target.sqrt_q_over_m().recip() / seed.phi();
                states.push(Solution::new(&target, u, removed, Role::Bound)?);
                if decayed_at_both_ends(seed.phi()) {
                    self.flag(name, FlagKind::Duplicate);
                }
            }
            track.designed.push((removed, branch));
        } else {
            track.designed.retain(|d| d.0 != removed);
            track.pristine = false;
        }
        if op.singular || target.is_singular() {
            self.flag(name, FlagKind::Singular);
        }
        let probes = track.probes.iter().map(|p| apply(&op, p)).collect::<gendarboux::Result<Vec<_>>>()?;
        self.solution_checks(name, &target, &states, &probes)?;
        self.closed_checks(name, &target, &track.designed, track.pristine)?;
        track.ops.push(op);
        track.bg = target;
        track.states = states;
        track.probes = probes;
        Ok(())
    }

    fn next_name(&self, track: &mut Track) -> String {
        track.counter += 1;
        format!("v{}{}", track.counter, self.suffix)
    }

    fn branch_for(&self, step: &StepSpec, index: usize, total: usize) -> Branch {
        step.branch
            .as_deref()
            .and_then(Branch::parse)
            .unwrap_or_else(|| self.source.default_branch(index, total))
    }

    fn add(&mut self, track: &mut Track, step: &StepSpec, e: f64) -> gendarboux::Result<String> {
        let n = track.designed.len();
        let branch = self.branch_for(step, n, n + 1);
        let seed = self.seed(track, step, branch, e)?;
        let op = operator_from_seed(&seed, Direction::Forward)?;
        let name = self.next_name(track);
        self.advance(track, &name, &seed, op, Some(branch))?;
        self.push_curve(name.clone(), track.bg.clone(), &track.states, &track.designed);
        Ok(name)
    }

    fn step(&mut self, track: &mut Track, step: &StepSpec) -> gendarboux::Result<()> {
        match step.kind {
            StepKind::Add => {
                self.add(track, step, step.energy.expect("validated"))?;
            }
            StepKind::AddSweep => {
                let base = track.clone();
                let counter = track.counter;
                for &e in &step.energies {
                    let mut t = base.clone();
                    let name = self.add(&mut t, step, e)?;
                    let renamed = format!("v{}_e{}{}", counter + 1, fmt_num(e), self.suffix);
                    let last = self.curves.last_mut().expect("curve pushed");
                    last.name = renamed.clone();
                    for (col, s) in last.states.iter_mut().zip(&t.states) {
                        *col = (state_column(&renamed, s.energy), s.phi.clone());
                    }
                    let prefix = format!("{name}.");
                    for c in self.checks.iter_mut().filter(|c| c.name.starts_with(&prefix)) {
                        c.name = format!("{renamed}.{}", &c.name[prefix.len()..]);
                    }
                    for f in self.flags.iter_mut().filter(|f| f.curve == name) {
                        f.curve = renamed.clone();
                    }
                    *track = t;
                }
            }
            StepKind::Remove => {
                let e = step.energy.expect("validated");
                let explicit = step.branch.is_some() || step.seed.is_some();
                let tracked = track.states.iter().find(|s| s.energy == e).cloned();
                let seed = match (tracked, explicit) {
                    (Some(s), false) => make_seed(&track.bg, e, &s, f64::INFINITY)?,
                    (None, false) if self.source.params().is_some() => {
                        return Err(gendarboux::Error::Argument(format!(
                            "no state at energy {e} to remove; give a seed branch"
                        )))
                    }
                    _ => {
                        let branch = self.branch_for(step, 0, 1);
                        self.seed(track, step, branch, e)?
                    }
                };
                let op = operator_from_seed(&seed, Direction::Forward)?;
                let name = self.next_name(track);
                self.advance(track, &name, &seed, op, None)?;
                self.push_curve(name, track.bg.clone(), &track.states, &track.designed);
            }
            StepKind::Chain => {
                let n = track.designed.len();
                let total = n + step.energies.len();
                let mut seeds = Vec::with_capacity(step.energies.len());
                let mut branches = Vec::with_capacity(step.energies.len());
                for (j, &e) in step.energies.iter().enumerate() {
                    let branch = self.branch_for(step, n + j, total);
                    seeds.push(self.seed(track, step, branch, e)?);
                    branches.push(branch);
                }
                let chain = chain_transform(&track.bg, &seeds)?;
                for (j, cs) in chain.steps.iter().enumerate() {
                    let seed = make_seed(&track.bg, seeds[j].lambda, &Solution::new(&track.bg, cs.chi.clone(), seeds[j].lambda, Role::Seed)?, f64::INFINITY)?;
                    let name = self.next_name(track);
                    self.advance(track, &name, &seed, cs.op.clone(), Some(branches[j]))?;
                    self.push_curve(name, track.bg.clone(), &track.states, &track.designed);
                }
                if self.verify.closed_form {
                    let name = self.curves.last().expect("chain produced curves").name.clone();
                    self.check_max(
                        format!("{name}.sum_form"),
                        chain.closed_form_divergence,
                        self.verify.closed_form_tol,
                    );
                }
            }
            StepKind::Iso => self.iso(track, step)?,
        }
        Ok(())
    }

    fn iso(&mut self, track: &mut Track, step: &StepSpec) -> gendarboux::Result<()> {
        let e = step.energy.expect("validated");
        let state = track
            .states
            .iter()
            .find(|s| s.energy == e)
            .cloned()
            .ok_or_else(|| gendarboux::Error::Argument(format!("no state at energy {e} for the isospectral family")))?;
        let seed = make_seed(&track.bg, e, &state, f64::INFINITY)?;
        let x0 = step.x0.unwrap_or(track.bg.grid().x_min());
        let single = track.pristine && track.designed.len() == 1 && track.designed[0] == (e, Branch::Cosh);
        for &gamma in &step.gammas {
            let fam = isospectral_family(&track.bg, &seed, gamma, x0)?;
            let name = format!("iso_g{}{}", fmt_num(gamma), self.suffix);
            let mut states: Vec<Solution> = vec![fam.bound.clone()];
            let others: Vec<Solution> = track.states.iter().filter(|s| s.energy != e).cloned().collect();
            for s in &others {
                let c = matched_c(&track.bg, &seed, s, x0)?;
                states.push(fam.map(s, c)?);
            }
            let mut probes = Vec::with_capacity(track.probes.len());
            for p in &track.probes {
                let c = matched_c(&track.bg, &seed, p, x0)?;
                probes.push(fam.map(p, c)?);
            }
            self.solution_checks(&name, &fam.background, &states, &probes)?;
            if self.verify.closed_form && single {
                if let Some(p) = self.source.params() {
                    let q = ModelParams::from_energies(p.family, p.alpha, &[e])?
                        .with_gamma(gamma)
                        .with_x0(x0);
                    let closed = model_closed_potential(&q, ClosedForm::Iso, track.bg.grid())?;
                    let err = relative_interior_error(fam.background.v(), &closed);
                    self.check_max(format!("{name}.closed_form"), err, self.verify.closed_form_tol);
                }
            }
            self.push_curve(name, fam.background.clone(), &states, &track.designed);
        }
        Ok(())
    }

    fn execute(&mut self, grid: &Grid) -> Result<(), CliError> {
        let bg0 = self.source.background(grid)?;
        let probes = self.source.probes(&bg0)?;
        let mut track = Track {
            bg0: bg0.clone(),
            bg: bg0,
            ops: Vec::new(),
            states: Vec::new(),
            probes,
            designed: Vec::new(),
            pristine: true,
            counter: 0,
        };
        let mut last_start = self.curves.len();
        for (i, step) in self.cfg.steps.iter().enumerate() {
            last_start = self.curves.len();
            self.step(&mut track, step)
                .map_err(|source| CliError::Step { step: i + 1, source })?;
            if step.kind == StepKind::Chain {
                last_start = self.curves.len() - 1;
            }
        }
        for c in &mut self.curves[last_start..] {
            c.last = true;
        }
        Ok(())
    }
}

fn grid_of(spec: &GridSpec) -> Result<Grid, CliError> {
    Ok(make_grid(spec.x_min, spec.x_max, spec.n)?)
}

/// One entry per `alphas` value, or just the configured model.
fn sources(cfg: &ScenarioConfig) -> Result<Vec<(Source, String)>, CliError> {
    if let Some(inline) = &cfg.inline {
        return Ok(vec![(Source::Inline(inline.clone()), String::new())]);
    }
    let model = cfg.model.as_ref().expect("validated: model or inline");
    let family = Family::parse(&model.family).expect("validated family");
    let params = |alpha: f64| {
        let mut p = match family {
            Family::CoulombX => ModelParams::coulomb(&[]),
            Family::EffmassLog => ModelParams::effmass(alpha, &[]),
        };
        p.alpha = alpha;
        p
    };
    if model.alphas.is_empty() {
        Ok(vec![(Source::Model(params(model.alpha)), String::new())])
    } else {
        Ok(model
            .alphas
            .iter()
            .map(|&a| (Source::Model(params(a)), format!("_a{}", fmt_num(a))))
            .collect())
    }
}

struct Plan {
    curves: Vec<Curve>,
    checks: Vec<Check>,
    flags: Vec<Flag>,
}

fn execute_plan(cfg: &ScenarioConfig, grid: &Grid) -> Result<Plan, CliError> {
    let mut plan = Plan {
        curves: Vec::new(),
        checks: Vec::new(),
        flags: Vec::new(),
    };
    for (run, (source, suffix)) in sources(cfg)?.into_iter().enumerate() {
        let mut r = Runner {
            cfg,
            verify: &cfg.verify,
            source,
            suffix,
            run,
            curves: std::mem::take(&mut plan.curves),
            checks: std::mem::take(&mut plan.checks),
            flags: std::mem::take(&mut plan.flags),
        };
        r.execute(grid)?;
        plan.curves = r.curves;
        plan.checks = r.checks;
        plan.flags = r.flags;
    }
    Ok(plan)
}

fn shape_checks(cfg: &ScenarioConfig, curves: &[Curve], checks: &mut Vec<Check>) {
    let v = &cfg.verify;
    for c in curves.iter().filter(|c| c.last) {
        let wells = count_local_minima(c.background.v()) as f64;
        if let Some(min) = v.min_wells {
            checks.push(Check::at_least(format!("{}.wells_min", c.name), wells, min as f64));
        }
        if let Some(max) = v.max_wells {
            checks.push(Check::at_most(format!("{}.wells_max", c.name), wells, max as f64));
        }
    }
    if v.depth_decreasing {
        let mut alphas: Vec<(f64, f64)> = Vec::new();
        let runs = cfg.model.as_ref().map(|m| m.alphas.clone()).unwrap_or_default();
        for (run, &a) in runs.iter().enumerate() {
            if let Some(c) = curves.iter().rev().find(|c| c.run == run && c.last) {
                alphas.push((a, min_depth(c.background.v())));
            }
        }
        alphas.sort_by(|x, y| x.0.total_cmp(&y.0));
        let worst = alphas
            .windows(2)
            .map(|w| w[1].1 - w[0].1)
            .fold(f64::NEG_INFINITY, f64::max);
        let value = if alphas.len() < 2 { f64::INFINITY } else { worst };
        checks.push(Check {
            name: "depth_decreasing".into(),
            value,
            threshold: 0.0,
            pass: value < 0.0,
        });
    }
}

fn spectrum_checks(cfg: &ScenarioConfig, spectra: &[SpectrumResult], curves: &[Curve], checks: &mut Vec<Check>) {
    if !cfg.verify.spectrum {
        return;
    }
    for s in spectra {
        let Some(c) = curves.iter().find(|c| c.name == s.curve) else {
            continue;
        };
        let mut designed = c.designed.clone();
        designed.sort_by(f64::total_cmp);
        for (i, e) in designed.iter().enumerate() {
            let value = match s.spectrum.eigenvalues.get(i) {
                Some(x) => ((x - e) / e).abs(),
                None => f64::INFINITY,
            };
            checks.push(Check::at_most(
                format!("{}.spectrum_e{}", c.name, fmt_num(*e)),
                value,
                cfg.verify.spectrum_tol,
            ));
        }
    }
}

fn compute_spectra(cfg: &ScenarioConfig, curves: &[Curve]) -> Result<Vec<SpectrumResult>, CliError> {
    let Some(sp) = &cfg.spectrum else {
        return Ok(Vec::new());
    };
    let spec_grid = GridSpec {
        x_min: cfg.grid.x_min,
        x_max: sp.x_max.unwrap_or(cfg.grid.x_max),
        n: sp.n.unwrap_or(cfg.grid.n),
    };
    let rebuilt;
    let source: &[Curve] = if spec_grid == cfg.grid {
        curves
    } else {
        let mut quiet = cfg.clone();
        quiet.verify = VerifySpec {
            residuals: false,
            closed_form: false,
            ..VerifySpec::default()
        };
        rebuilt = execute_plan(&quiet, &grid_of(&spec_grid)?)?.curves;
        &rebuilt
    };
    let mut out = Vec::new();
    for c in source {
        let k = sp.levels.unwrap_or(c.designed.len());
        if k == 0 {
            continue;
        }
        let spectrum = spectrum_fd(&c.background, k)?;
        out.push(SpectrumResult {
            curve: c.name.clone(),
            spectrum,
        });
    }
    Ok(out)
}

/// Run the whole scenario in memory.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioResult, CliError> {
    cfg.validate()?;
    let grid = grid_of(&cfg.grid)?;
    let Plan {
        curves,
        mut checks,
        flags,
    } = execute_plan(cfg, &grid)?;
    shape_checks(cfg, &curves, &mut checks);
    let spectra = compute_spectra(cfg, &curves)?;
    spectrum_checks(cfg, &spectra, &curves, &mut checks);
    let pass = checks.iter().all(|c| c.pass);
    Ok(ScenarioResult {
        name: cfg.name.clone(),
        grid,
        curves,
        spectra,
        report: Report {
            scenario: cfg.name.clone(),
            checks,
            flags,
            pass,
        },
    })
}

/// Report used by `verify`; strict mode also fails on flagged curves.
pub fn verify_report(result: &ScenarioResult, strict: bool) -> Report {
    let mut report = result.report.clone();
    if strict {
        for f in &report.flags {
            let what = match f.flag {
                FlagKind::Singular => "singular",
                FlagKind::Duplicate => "duplicate",
            };
            report.checks.push(Check {
                name: format!("{}.{what}", f.curve),
                value: 1.0,
                threshold: 0.0,
                pass: false,
            });
        }
    }
    report.pass = report.checks.iter().all(|c| c.pass);
    report
}
