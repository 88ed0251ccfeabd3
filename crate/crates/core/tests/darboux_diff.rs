use gendarboux::compare::{ray_distance, relative_interior_error};
use gendarboux::darboux_diff::{
    add_bound_state, apply, chain_transform, eta_pair, make_seed, operator_from_seed,
    order2_wronskian_transform, susy_residuals, transformed_potential,
    transformed_potential_from_riccati, Direction, Seed,
};
use gendarboux::gse::{equation_residual, Background, Role, Solution};
use gendarboux::models::{
    model_background, model_bound_state, model_closed_potential, model_seeds, model_solution_on,
    Branch, ClosedForm, ModelParams,
};
use gendarboux::{make_grid, wronskian, Error, Grid, ScalarField};

fn grid(n: usize) -> Grid {
    make_grid(0.05, 10.0, n).unwrap()
}

fn flat(grid: &Grid) -> Background {
    Background::new(
        ScalarField::constant(grid, 1.0),
        ScalarField::constant(grid, 1.0),
        ScalarField::zeros(grid),
        "free",
    )
    .unwrap()
}

fn seed_of(bg: &Background, p: &ModelParams, branch: Branch, e: f64) -> Seed {
    let s = model_solution_on(bg, p, branch, e).unwrap();
    make_seed(bg, e, &s, 1e-8).unwrap()
}

fn sampled(bg: &Background) -> Background {
    Background::new(
        bg.m().sampled_only(),
        bg.q().sampled_only(),
        bg.v().sampled_only(),
        bg.label(),
    )
    .unwrap()
}

#[test]
fn make_seed_checks_residual() {
    let g = grid(512);
    let p = ModelParams::coulomb(&[2.0]);
    let bg = model_background(&p, &g).unwrap();
    let s = model_solution_on(&bg, &p, Branch::Cosh, -4.0).unwrap();
    let seed = make_seed(&bg, -4.0, &s, 1e-8).unwrap();
    assert!(seed.nodeless);
    assert!(seed.residual < 1e-10);
    match make_seed(&bg, -4.5, &s, 1e-8) {
        Err(Error::NotASolution { energy, .. }) => assert_eq!(energy, -4.5),
        other => panic!("expected NotASolution, got {other:?}"),
    }
    let sinh = model_solution_on(&bg, &p, Branch::Sinh, -4.0).unwrap();
    assert!(make_seed(&bg, -4.0, &sinh, 1e-8).unwrap().nodeless);
}

#[test]
fn forward_operator_superpotential_and_image() {
    let g = grid(1024);
    let p = ModelParams::coulomb(&[2.0]);
    let bg = model_background(&p, &g).unwrap();
    let seed = seed_of(&bg, &p, Branch::Cosh, -4.0);
    let op = operator_from_seed(&seed, Direction::Forward).unwrap();
    // K = 1/(2x) - κ tanh κx
    let want = ScalarField::analytic(&g, 6, |x| (x * 2.0).recip() - (x * 2.0).tanh() * 2.0).unwrap();
    assert!(relative_interior_error(&op.k, &want) < 1e-12);

    // L maps sin(kx)/(k√x) at E = k² onto a solution of the partner
    let k = 3.0;
    let phi = model_solution_on(&bg, &p, Branch::Sin, k * k).unwrap();
    let out = apply(&op, &phi).unwrap();
    assert!(out.residual < 1e-10, "residual {}", out.residual);
    // closed form: (1/√x)(κ tanh κx sin kx - k cos kx) / k + ...
    let image = ScalarField::analytic(&g, 6, move |x| {
        let (s, c) = (x * k).sin_cos();
        ((x * 2.0).tanh() * s * 2.0 - c * k) / (x.sqrt() * k)
    })
    .unwrap();
    assert!(ray_distance(&out.phi, &image) < 1e-10);
}

#[test]
fn removing_cosh_state_matches_closed_form() {
    let g = grid(2048);
    let p = ModelParams::coulomb(&[2.0]);
    let bg = model_background(&p, &g).unwrap();
    let seed = seed_of(&bg, &p, Branch::Cosh, -4.0);
    let t = transformed_potential(&bg, &seed).unwrap();
    let v1 = model_closed_potential(&p, ClosedForm::V1, &g).unwrap();
    assert!(relative_interior_error(t.v(), &v1) < 1e-10);
    assert!(!t.is_singular());
    let ric = transformed_potential_from_riccati(&bg, &seed).unwrap();
    assert!(relative_interior_error(&ric, t.v()) < 1e-10);

    let sinh = seed_of(&bg, &p, Branch::Sinh, -4.0);
    let ts = transformed_potential(&bg, &sinh).unwrap();
    assert!(!ts.is_singular());
    let ric = transformed_potential_from_riccati(&bg, &sinh).unwrap();
    assert!(relative_interior_error(&ric, ts.v()) < 1e-10);
}

#[test]
fn classical_one_soliton() {
    let g = make_grid(-10.0, 10.0, 2001).unwrap();
    let bg = flat(&g);
    let u = ScalarField::analytic(&g, 8, |x| x.cosh()).unwrap();
    let sol = Solution::new(&bg, u, -1.0, Role::Seed).unwrap();
    let seed = make_seed(&bg, -1.0, &sol, 1e-10).unwrap();
    let t = transformed_potential(&bg, &seed).unwrap();
    let want = ScalarField::analytic(&g, 4, |x| x.sech2() * -2.0).unwrap();
    let err = (t.v() - &want).max_abs();
    assert!(err < 1e-10, "err {err}");
}

#[test]
fn nodal_seed_flags_singular_background() {
    let g = make_grid(-3.0, 3.0, 601).unwrap();
    let bg = flat(&g);
    let u = ScalarField::analytic(&g, 8, |x| (x + 0.005).sinh()).unwrap();
    let sol = Solution::new(&bg, u, -1.0, Role::Seed).unwrap();
    let seed = make_seed(&bg, -1.0, &sol, 1e-8).unwrap();
    assert!(!seed.nodeless);
    let op = operator_from_seed(&seed, Direction::Forward).unwrap();
    assert!(op.singular);
    assert!(op.target.is_singular());
    match eta_pair(&bg, &seed, -3.0) {
        Err(Error::NodalSeed { x, .. }) => assert!((x + 0.005).abs() < 0.02),
        other => panic!("expected NodalSeed, got {other:?}"),
    }
}

#[test]
fn eta_pair_solves_partner_and_adjoint_maps_eta_hat() {
    let checks: Vec<f64> = [400usize, 800]
        .iter()
        .map(|&n| {
            let g = grid(n);
            let p = ModelParams::coulomb(&[2.0]);
            let bg = model_background(&p, &g).unwrap();
            let seed = seed_of(&bg, &p, Branch::Cosh, -4.0);
            let (eta, eta_hat) = eta_pair(&bg, &seed, 0.05).unwrap();
            assert!(eta.residual < 1e-10, "eta residual {}", eta.residual);
            assert!(eta_hat.residual < 1e-4, "eta_hat residual {}", eta_hat.residual);
            // η = √(m/q)/U exactly
            let expect = &bg.sqrt_q_over_m().recip() / seed.phi();
            assert_eq!(eta.phi.values(), expect.values());
            let adj = operator_from_seed(&seed, Direction::Adjoint).unwrap();
            assert!((adj.apply_field(&eta.phi).unwrap()).max_abs_interior(2) < 1e-10 * eta.phi.max_abs());
            // L† η̂ = -U
            let back = adj.apply_field(&eta_hat.phi).unwrap();
            (&back + seed.phi()).max_abs_interior(2) / seed.phi().max_abs()
        })
        .collect();
    let h = 9.95 / 399.0;
    assert!(checks[0] < 10.0 * h * h, "{checks:?}");
    assert!(checks[1] < checks[0]);
}

#[test]
fn adding_state_reproduces_coulomb_closed_forms() {
    let g = grid(2048);
    let p = ModelParams::coulomb(&[2.0]);
    let bg = model_background(&p, &g).unwrap();
    let eta = seed_of(&bg, &p, Branch::Cosh, -4.0);
    let added = add_bound_state(&bg, &eta).unwrap();
    let v1 = model_closed_potential(&p, ClosedForm::V1, &g).unwrap();
    assert!(relative_interior_error(added.background.v(), &v1) < 1e-8);
    let bound = model_bound_state(&p, &g).unwrap();
    assert!(ray_distance(&added.bound.phi, &bound) < 1e-10);
    assert!(added.bound.residual < 1e-10);
    assert!(added.second.residual < 1e-4);
    assert!(!added.duplicate);
    // Wronskian of the pair equals m
    let w = wronskian(&added.bound.phi, &added.second.phi).unwrap();
    assert!(relative_interior_error(&w, bg.m()) < 1e-9);

    // the operator carries old solutions over
    let phi = model_solution_on(&bg, &p, Branch::Sin, 2.25).unwrap();
    let out = apply(&added.op, &phi).unwrap();
    assert!(out.residual < 1e-9, "{}", out.residual);
}

#[test]
fn adding_state_reproduces_effmass_closed_form() {
    let g = make_grid(0.05, 10.0, 2048).unwrap();
    let p = ModelParams::effmass(1.0, &[2f64.sqrt()]);
    let bg = model_background(&p, &g).unwrap();
    let eta = seed_of(&bg, &p, Branch::Cosh, -2.0);
    let added = add_bound_state(&bg, &eta).unwrap();
    let v1 = model_closed_potential(&p, ClosedForm::V1, &g).unwrap();
    assert!(relative_interior_error(added.background.v(), &v1) < 1e-8);
    let bound = model_bound_state(&p, &g).unwrap();
    assert!(ray_distance(&added.bound.phi, &bound) < 1e-10);
}

#[test]
fn chain_matches_two_and_three_state_closed_forms() {
    let g = grid(2048);
    for kappa in [vec![2.0, 4.0], vec![2.0, 4.0, 5.0]] {
        let p = ModelParams::coulomb(&kappa);
        let bg = model_background(&p, &g).unwrap();
        let seeds: Vec<Seed> = model_seeds(&bg, &p)
            .unwrap()
            .into_iter()
            .map(|s| make_seed(&bg, s.energy, &s, 1e-8).unwrap())
            .collect();
        let chain = chain_transform(&bg, &seeds).unwrap();
        let which = if kappa.len() == 2 { ClosedForm::V2 } else { ClosedForm::V3 };
        let closed = model_closed_potential(&p, which, &g).unwrap();
        let err = relative_interior_error(chain.background().v(), &closed);
        assert!(err < 1e-6, "{kappa:?}: {err}");
        assert!(chain.closed_form_divergence < 1e-8, "{}", chain.closed_form_divergence);
        assert_eq!(chain.order(), kappa.len());

        let phi = model_solution_on(&bg, &p, Branch::Sin, 1.0).unwrap();
        let out = chain.map(&phi).unwrap();
        assert!(out.residual < 1e-8, "{}", out.residual);
    }
}

#[test]
fn effmass_chain_matches_wronskian_forms() {
    let g = make_grid(0.05, 10.0, 2048).unwrap();
    for e in [vec![-2.0, -3.75], vec![-2.0, -3.75, -5.0]] {
        let p = ModelParams::from_energies(gendarboux::models::Family::EffmassLog, 1.0, &e).unwrap();
        let bg = model_background(&p, &g).unwrap();
        let seeds: Vec<Seed> = model_seeds(&bg, &p)
            .unwrap()
            .into_iter()
            .map(|s| make_seed(&bg, s.energy, &s, 1e-8).unwrap())
            .collect();
        let chain = chain_transform(&bg, &seeds).unwrap();
        let which = if e.len() == 2 { ClosedForm::V2 } else { ClosedForm::V3 };
        let closed = model_closed_potential(&p, which, &g).unwrap();
        let err = relative_interior_error(chain.background().v(), &closed);
        assert!(err < 1e-6, "{e:?}: {err}");
    }
}

#[test]
fn chain_rejects_repeated_energy() {
    let g = grid(256);
    let p = ModelParams::coulomb(&[2.0]);
    let bg = model_background(&p, &g).unwrap();
    let a = seed_of(&bg, &p, Branch::Cosh, -4.0);
    let b = seed_of(&bg, &p, Branch::Sinh, -4.0);
    assert!(matches!(chain_transform(&bg, &[a, b]), Err(Error::Argument(_))));
    assert!(matches!(chain_transform(&bg, &[]), Err(Error::Argument(_))));
}

#[test]
fn chain_reports_degenerate_step() {
    let g = grid(256);
    let p = ModelParams::coulomb(&[2.0]);
    let bg = model_background(&p, &g).unwrap();
    let a = seed_of(&bg, &p, Branch::Cosh, -4.0);
    // the second seed is annihilated by the first operator
    let mut b = a.clone();
    b.lambda = -9.0;
    assert!(matches!(
        chain_transform(&bg, &[a, b]),
        Err(Error::DegenerateChain { step: 2 })
    ));
}

#[test]
fn order_two_wronskian_agrees_with_chain() {
    let g = grid(2048);
    let p = ModelParams::coulomb(&[2.0, 4.0]);
    let bg = model_background(&p, &g).unwrap();
    let seeds: Vec<Seed> = model_seeds(&bg, &p)
        .unwrap()
        .into_iter()
        .map(|s| make_seed(&bg, s.energy, &s, 1e-8).unwrap())
        .collect();
    let chain = chain_transform(&bg, &seeds).unwrap();
    let phi = model_solution_on(&bg, &p, Branch::Sin, 4.0).unwrap();
    let (bg2, phi2) = order2_wronskian_transform(&bg, &seeds[0], &seeds[1], &phi).unwrap();
    assert!(relative_interior_error(bg2.v(), chain.background().v()) < 1e-9);
    assert!(phi2.residual < 1e-8);
    let via_chain = chain.map(&phi).unwrap();
    assert!(ray_distance(&phi2.phi, &via_chain.phi) < 1e-8);
}

#[test]
fn order_two_rejects_degenerate_pair() {
    let g = grid(256);
    let p = ModelParams::coulomb(&[2.0]);
    let bg = model_background(&p, &g).unwrap();
    let a = seed_of(&bg, &p, Branch::Cosh, -4.0);
    let mut b = a.clone();
    b.solution.phi = a.phi().scale(2.0);
    b.lambda = -4.5;
    let phi = model_solution_on(&bg, &p, Branch::Sin, 1.0).unwrap();
    assert!(matches!(
        order2_wronskian_transform(&bg, &a, &b, &phi),
        Err(Error::DegeneratePair { .. })
    ));
}

/// Sampled-mode checks use a window where `1/x` is resolved.
fn susy_setup(n: usize, sample: bool) -> (Background, Seed, Vec<Solution>) {
    let g = if sample { make_grid(0.5, 5.0, n).unwrap() } else { grid(n) };
    let p = ModelParams::coulomb(&[2.0]);
    let mut bg = model_background(&p, &g).unwrap();
    let mut u = model_solution_on(&bg, &p, Branch::Cosh, -4.0).unwrap().phi;
    let mut probes: Vec<ScalarField> = [1.0, 4.0]
        .iter()
        .map(|&e| model_solution_on(&bg, &p, Branch::Sin, e).unwrap().phi)
        .collect();
    if sample {
        bg = sampled(&bg);
        u = u.sampled_only();
        probes = probes.iter().map(|f| f.sampled_only()).collect();
    }
    let seed = make_seed(&bg, -4.0, &Solution::new(&bg, u, -4.0, Role::Seed).unwrap(), 1.0).unwrap();
    let probes = probes
        .into_iter()
        .zip([1.0, 4.0])
        .map(|(f, e)| Solution::new(&bg, f, e, Role::Generic).unwrap())
        .collect();
    (bg, seed, probes)
}

#[test]
fn susy_residuals_vanish_with_exact_derivatives() {
    let (bg, seed, probes) = susy_setup(2048, false);
    let op = operator_from_seed(&seed, Direction::Forward).unwrap();
    let rep = susy_residuals(&bg, &op.target, &op, &probes).unwrap();
    assert!(rep.max() <= 1e-8, "{rep:?}");
}

#[test]
fn susy_residuals_converge_in_sampled_mode() {
    let reps: Vec<_> = [1024usize, 2047]
        .iter()
        .map(|&n| {
            let (bg, seed, probes) = susy_setup(n, true);
            let op = operator_from_seed(&seed, Direction::Forward).unwrap();
            susy_residuals(&bg, &op.target, &op, &probes).unwrap()
        })
        .collect();
    let pairs = [
        (reps[0].intertwining, reps[1].intertwining),
        (reps[0].riccati, reps[1].riccati),
        (reps[0].factorization, reps[1].factorization),
        (reps[0].factorization_partner, reps[1].factorization_partner),
        (reps[0].kernel_adjoint, reps[1].kernel_adjoint),
    ];
    // L U cancels identically because K is built from the same stencil
    assert!(reps[1].kernel < 1e-12);
    for (coarse, fine) in pairs {
        assert!(coarse / fine >= 3.5, "{coarse} -> {fine}: {reps:?}");
    }
}

#[test]
fn perturbed_partner_fails_intertwining() {
    let (bg, seed, probes) = susy_setup(1024, false);
    let op = operator_from_seed(&seed, Direction::Forward).unwrap();
    let wrong = op
        .target
        .with_potential(op.target.v() + 0.1, "perturbed")
        .unwrap();
    let rep = susy_residuals(&bg, &wrong, &op, &probes).unwrap();
    assert!(rep.intertwining > 1e-3, "{rep:?}");
}

#[test]
fn add_then_remove_round_trip() {
    let errs: Vec<f64> = [512usize, 1024]
        .iter()
        .map(|&n| {
            let (bg, seed, _) = susy_setup(n, true);
            let added = add_bound_state(&bg, &seed).unwrap();
            let back = make_seed(&added.background, -4.0, &added.bound, 1e-2).unwrap();
            let t = transformed_potential(&added.background, &back).unwrap();
            (t.v() - bg.v()).max_abs_interior(4) / bg.v().max_abs_interior(4)
        })
        .collect();
    assert!(errs[1] < errs[0] / 3.0, "{errs:?}");
    let h = 4.5 / 511.0;
    assert!(errs[0] < 100.0 * h * h, "{errs:?}");
}

#[test]
fn adjoint_round_trip_is_identity() {
    let g = grid(512);
    let p = ModelParams::coulomb(&[2.0]);
    let bg = model_background(&p, &g).unwrap();
    let seed = seed_of(&bg, &p, Branch::Cosh, -4.0);
    let op = operator_from_seed(&seed, Direction::Forward).unwrap();
    let twice = op.adjoint().unwrap().adjoint().unwrap();
    assert_eq!(twice.direction, Direction::Forward);
    assert!((&twice.a - &op.a).max_abs() < 1e-12 * op.a.max_abs());
    assert!((&twice.b - &op.b).max_abs() < 1e-12);
    let adj = op.adjoint().unwrap();
    assert_eq!(adj.source.label(), op.target.label());
    // L†L φ = (E - λ) φ
    let phi = model_solution_on(&bg, &p, Branch::Sin, 1.0).unwrap();
    let back = adj.apply_field(&op.apply_field(&phi.phi).unwrap()).unwrap();
    let err = (&back - &phi.phi.scale(5.0)).max_abs_interior(2);
    assert!(err < 1e-9, "{err}");
    let r = equation_residual(&bg, &back, 1.0).unwrap();
    assert!(r < 1e-9);
}
