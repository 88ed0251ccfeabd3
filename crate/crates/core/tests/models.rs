use gendarboux::models::{
    count_local_minima, figure, figure_registry, jet_wronskian, min_depth, model_background,
    model_bound_state, model_closed_potential, model_solution, seed_branches, threshold_energy,
    Branch, ClosedForm, Family, FigureKind, ModelParams,
};
use gendarboux::compare::relative_interior_error;
use gendarboux::{integrate_cumulative, make_grid, Error, Grid, Jet, ScalarField};
use proptest::prelude::*;

fn grid(n: usize) -> Grid {
    make_grid(0.05, 10.0, n).unwrap()
}

fn effmass(e: &[f64], alpha: f64) -> ModelParams {
    ModelParams::from_energies(Family::EffmassLog, alpha, e).unwrap()
}

#[test]
fn backgrounds_match_definitions() {
    let g = grid(256);
    let bg = model_background(&ModelParams::coulomb(&[2.0]), &g).unwrap();
    for (i, &x) in g.nodes().iter().enumerate() {
        assert_eq!(bg.m().values()[i], 1.0 / x);
        assert_eq!(bg.q().values()[i], x);
        assert_eq!(bg.v().values()[i], 1.0 / (4.0 * x));
    }
    assert!(bg.m().has_analytic_derivative());

    let g = make_grid(1.0, 2.0, 101).unwrap();
    let bg = model_background(&ModelParams::effmass(1.0, &[1.0]), &g).unwrap();
    assert_eq!(bg.m().values()[0], 1.0);
    assert_eq!(bg.m().values()[100], 0.25);
    assert_eq!(bg.v().max_abs(), 0.0);
}

#[test]
fn grids_touching_zero_are_rejected() {
    let g = make_grid(0.0, 1.0, 64).unwrap();
    assert!(matches!(
        model_background(&ModelParams::coulomb(&[2.0]), &g),
        Err(Error::Argument(_))
    ));
}

#[test]
fn parameter_validation() {
    assert!(ModelParams::coulomb(&[2.0, 1.0]).validate().is_err());
    assert!(ModelParams::coulomb(&[0.0]).validate().is_err());
    assert!(ModelParams::effmass(-1.0, &[1.0]).validate().is_err());
    assert!(ModelParams::from_energies(Family::CoulombX, 1.0, &[-4.0, 1.0]).is_err());
    let p = ModelParams::from_energies(Family::CoulombX, 1.0, &[-4.0, -16.0]).unwrap();
    assert_eq!(p.kappa, vec![2.0, 4.0]);
    assert_eq!(p.energies(), vec![-4.0, -16.0]);
}

#[test]
fn solutions_have_small_residuals() {
    let g = grid(1024);
    let p = ModelParams::coulomb(&[2.0]);
    for (b, e) in [(Branch::Sin, 1.0), (Branch::Cos, 4.0), (Branch::Cosh, -4.0), (Branch::Sinh, -9.0)] {
        let s = model_solution(&p, b, e, &g).unwrap();
        assert!(s.residual <= 1e-9, "{b:?}: {}", s.residual);
    }
    let p = ModelParams::effmass(1.0, &[2f64.sqrt()]);
    for (b, e) in [(Branch::Sin, 1.0), (Branch::Cos, 3.0), (Branch::Cosh, -2.0), (Branch::Sinh, 0.1)] {
        let s = model_solution(&p, b, e, &g).unwrap();
        assert!(s.residual <= 1e-9, "{b:?}: {}", s.residual);
    }
}

#[test]
fn sampled_solution_residual_is_second_order() {
    let r: Vec<f64> = [512usize, 1023]
        .iter()
        .map(|&n| {
            let g = make_grid(0.5, 5.0, n).unwrap();
            let p = ModelParams::effmass(1.0, &[2f64.sqrt()]);
            let s = model_solution(&p, Branch::Cosh, -2.0, &g).unwrap();
            let bg = model_background(&p, &g).unwrap();
            gendarboux::gse::equation_residual(&bg, &s.phi.sampled_only(), -2.0).unwrap()
        })
        .collect();
    assert!(r[0] / r[1] > 3.5, "{r:?}");
}

#[test]
fn branch_energy_mismatch_is_an_error() {
    let g = grid(128);
    let c = ModelParams::coulomb(&[2.0]);
    assert!(matches!(model_solution(&c, Branch::Sin, -1.0, &g), Err(Error::Argument(_))));
    assert!(matches!(model_solution(&c, Branch::Cosh, 1.0, &g), Err(Error::Argument(_))));
    let e = ModelParams::effmass(1.0, &[1.0]);
    assert_eq!(threshold_energy(&e), 0.25);
    assert!(matches!(model_solution(&e, Branch::Sin, 0.2, &g), Err(Error::Argument(_))));
    assert!(model_solution(&e, Branch::Cosh, 0.2, &g).is_ok());
}

#[test]
fn coulomb_v1_closed_form() {
    let g = grid(512);
    let v = model_closed_potential(&ModelParams::coulomb(&[2.0]), ClosedForm::V1, &g).unwrap();
    for (i, &x) in g.nodes().iter().enumerate() {
        let want = 1.0 / (4.0 * x) - 8.0 * x / (2.0 * x).cosh().powi(2);
        assert!((v.values()[i] - want).abs() <= 1e-12 * want.abs().max(1.0));
    }
}

#[test]
fn printed_three_state_wronskian_is_cosh_sinh_sinh() {
    let (k1, k2, k3) = (2.0, 4.0, 5.0);
    for x in [0.1, 0.7, 2.3, 6.0] {
        let j = Jet::variable(x, 4);
        let seeds = [(j * k1).cosh(), (j * k2).sinh(), (j * k3).sinh()];
        let w = jet_wronskian(&seeds).value() * x.powf(-1.5) / (k1 * k2 * k3).sqrt();
        let (s1, c1) = ((k1 * x).sinh(), (k1 * x).cosh());
        let (s2, c2) = ((k2 * x).sinh(), (k2 * x).cosh());
        let (s3, c3) = ((k3 * x).sinh(), (k3 * x).cosh());
        let printed = (k2 * k3 * k3 * c1 * c2 * s3 - k2 * k2 * k3 * c1 * s2 * c3 - k1 * k3 * k3 * s1 * s2 * s3
            + k1 * k2 * k2 * s1 * s3 * s2
            + k1 * k1 * k3 * c1 * s2 * c3
            - k1 * k1 * k2 * c1 * c2 * s3)
            / (x.powf(1.5) * (k1 * k2 * k3).sqrt());
        assert!((w - printed).abs() <= 1e-12 * printed.abs(), "x = {x}");
    }
    let p = ModelParams::coulomb(&[2.0, 4.0, 5.0]);
    assert_eq!(seed_branches(&p), vec![Branch::Cosh, Branch::Sinh, Branch::Sinh]);
    let p = ModelParams::effmass(1.0, &[1.0, 2.0, 3.0]);
    assert_eq!(seed_branches(&p), vec![Branch::Cosh, Branch::Sinh, Branch::Cosh]);
}

#[test]
fn parameter_count_must_match_form() {
    let g = grid(128);
    let p = ModelParams::coulomb(&[2.0, 4.0]);
    assert!(matches!(model_closed_potential(&p, ClosedForm::V1, &g), Err(Error::Argument(_))));
    assert!(matches!(model_closed_potential(&p, ClosedForm::V3, &g), Err(Error::Argument(_))));
    assert!(model_closed_potential(&p, ClosedForm::V2, &g).is_ok());
}

#[test]
fn effmass_v1_closed_form() {
    let g = grid(512);
    let p = effmass(&[-2.0], 1.0);
    let gamma = (1.0f64 + 4.0 * 2.0).sqrt() / 2.0;
    assert!((p.gammas()[0] - gamma).abs() < 1e-15);
    let v = model_closed_potential(&p, ClosedForm::V1, &g).unwrap();
    for (i, &x) in g.nodes().iter().enumerate() {
        let want = -2.0 * gamma * gamma / (gamma * x.ln()).cosh().powi(2);
        assert!((v.values()[i] - want).abs() <= 1e-12);
    }
}

#[test]
fn bound_states_have_exact_weighted_norms() {
    let g = grid(1024);
    let (a, b) = (0.05f64, 10.0f64);
    let cases = [
        (ModelParams::coulomb(&[2.0]), (2.0 * b).tanh() - (2.0 * a).tanh()),
        (effmass(&[-2.0], 1.0), {
            let gm = 1.5;
            ((gm * b.ln()).tanh() - (gm * a.ln()).tanh()) / gm
        }),
    ];
    for (p, want) in cases {
        let bg = model_background(&p, &g).unwrap();
        let u = model_bound_state(&p, &g).unwrap();
        let w = integrate_cumulative(&(&(bg.q() * &u) * &u), a).unwrap();
        let got = w.values()[g.len() - 1];
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }
}

#[test]
fn printed_effmass_isospectral_form_differs() {
    let g = grid(1024);
    let p = effmass(&[-2.0], 1.0).with_gamma(1.0);
    let iso = model_closed_potential(&p, ClosedForm::Iso, &g).unwrap();
    let printed = model_closed_potential(&p, ClosedForm::IsoPrinted, &g).unwrap();
    assert!(relative_interior_error(&printed, &iso) > 1e-2);
    let zero = p.clone().with_gamma(0.0);
    let base = model_closed_potential(&zero, ClosedForm::V1, &g).unwrap();
    let iso0 = model_closed_potential(&zero, ClosedForm::Iso, &g).unwrap();
    assert!(relative_interior_error(&iso0, &base) < 1e-14);
}

#[test]
fn well_counts_of_two_and_three_state_potentials() {
    let g = grid(2048);
    let v = |e: &[f64], a: f64| {
        let which = if e.len() == 2 { ClosedForm::V2 } else { ClosedForm::V3 };
        model_closed_potential(&effmass(e, a), which, &g).unwrap()
    };
    assert!(count_local_minima(&v(&[-2.0, -3.75], 1.0)) >= 2);
    assert!(count_local_minima(&v(&[-2.0, -3.75, -5.0], 1.0)) >= 3);
    assert!(count_local_minima(&v(&[-2.0, -4.75, -6.0], 1.0)) >= 3);
    let depths: Vec<f64> = [0.8, 1.0, 1.25].iter().map(|&a| min_depth(&v(&[-2.0, -3.75], a))).collect();
    assert!(depths[0] > depths[1] && depths[1] > depths[2], "{depths:?}");
}

#[test]
fn minima_counting() {
    let g = make_grid(0.0, 1.0, 101).unwrap();
    let flat = ScalarField::constant(&g, 1.0);
    assert_eq!(count_local_minima(&flat), 0);
    let two = ScalarField::analytic(&g, 2, |x| (x * (4.0 * std::f64::consts::PI)).cos()).unwrap();
    assert_eq!(count_local_minima(&two), 2);
    assert_eq!(min_depth(&two), 1.0);
}

#[test]
fn registry_lists_every_figure() {
    let names: Vec<&str> = figure_registry().iter().map(|f| f.name).collect();
    assert_eq!(
        names,
        ["fig1a", "fig1b", "fig1c", "fig2a", "fig2b1", "fig2b2", "fig2c", "fig3a1", "fig3a2", "fig3b", "fig3c"]
    );
    let f = figure("fig1b").unwrap();
    assert_eq!(
        f.kind,
        FigureKind::Isospectral {
            energy: -16.0,
            gammas: vec![0.5, 1.0, 2.0]
        }
    );
    assert!(figure("nope").is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn effmass_seeds_solve_their_equation(kappa in 0.3f64..3.0, alpha in 0.5f64..2.0, cosh in any::<bool>()) {
        let g = make_grid(0.2, 5.0, 400).unwrap();
        let p = ModelParams::effmass(alpha, &[kappa]);
        let b = if cosh { Branch::Cosh } else { Branch::Sinh };
        let s = model_solution(&p, b, -kappa * kappa, &g).unwrap();
        prop_assert!(s.residual < 1e-9);
    }
}
