//! Named scenarios for every reproduced figure.

use gendarboux::models::{figure_registry, FigureKind, FigureScenario};

use crate::config::{
    GridSpec, ModelSpec, OutputSpec, ScenarioConfig, SpectrumSpec, StepKind, StepSpec, VerifySpec,
};

pub const PRESET_GRID: GridSpec = GridSpec {
    x_min: 0.05,
    x_max: 10.0,
    n: 2048,
};

fn step(kind: StepKind) -> StepSpec {
    StepSpec {
        kind,
        energy: None,
        energies: Vec::new(),
        branch: None,
        seed: None,
        gammas: Vec::new(),
        x0: None,
    }
}

/// Well-count claims attached to the multi-state figures.
fn wells(name: &str) -> (Option<usize>, Option<usize>) {
    match name {
        // "simple asymmetric potentials"
        "fig2b1" | "fig3a1" => (None, Some(1)),
        // double wells
        "fig2b2" | "fig2c" => (Some(2), None),
        "fig3a2" => (Some(2), Some(2)),
        // triple wells
        "fig3b" | "fig3c" => (Some(3), None),
        _ => (None, None),
    }
}

fn from_figure(f: &FigureScenario) -> ScenarioConfig {
    let mut steps = Vec::new();
    let mut alphas = Vec::new();
    match &f.kind {
        FigureKind::SingleStates { energies } => {
            let mut s = step(StepKind::AddSweep);
            s.energies = energies.clone();
            steps.push(s);
        }
        FigureKind::Chain { energies } => {
            let mut s = step(StepKind::Chain);
            s.energies = energies.clone();
            steps.push(s);
        }
        FigureKind::Isospectral { energy, gammas } => {
            let mut add = step(StepKind::Add);
            add.energy = Some(*energy);
            let mut iso = step(StepKind::Iso);
            iso.energy = Some(*energy);
            iso.gammas = gammas.clone();
            steps.push(add);
            steps.push(iso);
        }
        FigureKind::MultiState { energies, alphas: a } => {
            let mut s = step(StepKind::Chain);
            s.energies = energies.clone();
            steps.push(s);
            if a.len() > 1 {
                alphas = a.clone();
            }
        }
    }
    let (min_wells, max_wells) = wells(f.name);
    ScenarioConfig {
        name: f.name.to_string(),
        description: f.description.to_string(),
        model: Some(ModelSpec {
            family: f.family.name().to_string(),
            alpha: f.alpha,
            alphas: alphas.clone(),
        }),
        inline: None,
        grid: PRESET_GRID,
        steps,
        spectrum: Some(SpectrumSpec::default()),
        verify: VerifySpec {
            min_wells,
            max_wells,
            depth_decreasing: !alphas.is_empty(),
            ..VerifySpec::default()
        },
        output: OutputSpec::default(),
    }
}

pub fn presets() -> Vec<ScenarioConfig> {
    figure_registry().iter().map(from_figure).collect()
}

pub fn preset(name: &str) -> Option<ScenarioConfig> {
    presets().into_iter().find(|c| c.name == name)
}
