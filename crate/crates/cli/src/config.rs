//! Scenario configuration, read from TOML.

use gendarboux::models::{Branch, Family};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::expr::Expr;

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub description: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inline: Option<InlineSpec>,
    pub grid: GridSpec,
    #[serde(default)]
    pub steps: Vec<StepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumSpec>,
    #[serde(default)]
    pub verify: VerifySpec,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub family: String,
    #[serde(default = "one")]
    pub alpha: f64,
    /// Run the whole plan once per value; curve names get an `_a<α>` suffix.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub alphas: Vec<f64>,
}

/// Background given by expressions in `x`.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InlineSpec {
    pub m: String,
    pub q: String,
    pub v: String,
    /// Solutions used as residual probes.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub probes: Vec<InlineSolution>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InlineSolution {
    pub energy: f64,
    pub phi: String,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub n: usize,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum StepKind {
    /// Insert a state at `energy`.
    Add,
    /// Independent insertions from the current background, one curve per
    /// entry of `energies`. Must be last.
    AddSweep,
    /// Remove the state or seed at `energy`.
    Remove,
    /// Successive insertions at `energies`, one curve per prefix.
    Chain,
    /// Isospectral family of the state at `energy`, one curve per `gammas`
    /// entry. Must be last.
    Iso,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct StepSpec {
    pub kind: StepKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub energies: Vec<f64>,
    /// Seed branch (`cosh` or `sinh`) for model backgrounds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub branch: Option<String>,
    /// Seed expression on the base background (inline backgrounds).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gammas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSpec {
    /// Levels per curve; defaults to the number of designed states.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    /// Node count of the eigenvalue grid; defaults to the scenario grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Right end of the eigenvalue grid; defaults to the scenario grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_max: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct VerifySpec {
    #[serde(default = "yes")]
    pub residuals: bool,
    #[serde(default = "residual_tol")]
    pub residual_tol: f64,
    #[serde(default = "yes")]
    pub closed_form: bool,
    #[serde(default = "closed_form_tol")]
    pub closed_form_tol: f64,
    /// Compare each spectrum with the designed energies.
    #[serde(default)]
    pub spectrum: bool,
    #[serde(default = "spectrum_tol")]
    pub spectrum_tol: f64,
    /// Lower bound on strict local minima of the final curves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_wells: Option<usize>,
    /// Upper bound on strict local minima of the final curves.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_wells: Option<usize>,
    /// Well depth must decrease along the `alphas` sweep.
    #[serde(default)]
    pub depth_decreasing: bool,
    /// Constant added to every partner potential in the residual checks.
    #[serde(default)]
    pub perturb: f64,
    /// `run` exits nonzero when a check fails.
    #[serde(default)]
    pub strict: bool,
}

impl Default for VerifySpec {
    fn default() -> Self {
        VerifySpec {
            residuals: true,
            residual_tol: residual_tol(),
            closed_form: true,
            closed_form_tol: closed_form_tol(),
            spectrum: false,
            spectrum_tol: spectrum_tol(),
            min_wells: None,
            max_wells: None,
            depth_decreasing: false,
            perturb: 0.0,
            strict: false,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    #[serde(default = "formats")]
    pub formats: Vec<String>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec {
            dir: None,
            formats: formats(),
        }
    }
}

fn one() -> f64 {
    1.0
}
fn yes() -> bool {
    true
}
fn residual_tol() -> f64 {
    1e-8
}
fn closed_form_tol() -> f64 {
    1e-6
}
fn spectrum_tol() -> f64 {
    0.02
}
fn formats() -> Vec<String> {
    vec!["csv".into(), "json".into()]
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<ScenarioConfig, CliError> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn family(&self) -> Option<Family> {
        self.model.as_ref().and_then(|m| Family::parse(&m.family))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad(format!("invalid scenario name `{}`", self.name));
        }
        match (&self.model, &self.inline) {
            (Some(_), Some(_)) => return bad("give either [model] or [inline], not both".into()),
            (None, None) => return bad("missing [model] or [inline] section".into()),
            (Some(m), None) => {
                if Family::parse(&m.family).is_none() {
                    return bad(format!("unknown model family `{}`", m.family));
                }
                if !(m.alpha > 0.0) || m.alphas.iter().any(|a| !(*a > 0.0)) {
                    return bad("alpha values must be positive".into());
                }
            }
            (None, Some(i)) => {
                for (what, s) in [("m", &i.m), ("q", &i.q), ("v", &i.v)] {
                    Expr::parse(s).map_err(|e| CliError::Config(format!("inline {what}: {e}")))?;
                }
                for p in &i.probes {
                    Expr::parse(&p.phi).map_err(|e| CliError::Config(format!("probe: {e}")))?;
                }
            }
        }
        let g = &self.grid;
        if !(g.x_min < g.x_max) || !g.x_min.is_finite() || !g.x_max.is_finite() || g.n < 16 {
            return bad(format!(
                "invalid grid [{}, {}] with {} nodes (need x_min < x_max, n >= 16)",
                g.x_min, g.x_max, g.n
            ));
        }
        if self.steps.is_empty() {
            return bad("scenario has no steps".into());
        }
        let last = self.steps.len() - 1;
        for (i, s) in self.steps.iter().enumerate() {
            let at = |msg: &str| Err(CliError::Config(format!("step {}: {msg}", i + 1)));
            match s.kind {
                StepKind::Add | StepKind::Remove | StepKind::Iso => match s.energy {
                    Some(e) if e.is_finite() => {}
                    _ => return at("missing energy"),
                },
                StepKind::AddSweep | StepKind::Chain => {
                    if s.energies.is_empty() {
                        return at("missing energies");
                    }
                }
            }
            if matches!(s.kind, StepKind::Iso | StepKind::AddSweep) && i != last {
                return at("iso and add_sweep must be the last step");
            }
            if s.kind == StepKind::Iso && s.gammas.is_empty() {
                return at("missing gammas");
            }
            if let Some(b) = &s.branch {
                match Branch::parse(b) {
                    Some(Branch::Cosh) | Some(Branch::Sinh) => {}
                    _ => return at(&format!("seed branch must be cosh or sinh, got `{b}`")),
                }
            }
            if let Some(seed) = &s.seed {
                if self.inline.is_none() {
                    return at("seed expressions need an [inline] background");
                }
                Expr::parse(seed).map_err(|e| CliError::Config(format!("step {}: seed: {e}", i + 1)))?;
            } else if self.inline.is_some() {
                return at("inline backgrounds need a seed expression");
            }
            if s.kind == StepKind::Chain && s.seed.is_some() && s.energies.len() > 1 {
                return at("inline chains take one seed per step; use repeated add steps");
            }
            if let Some(x0) = s.x0 {
                if !(x0 >= g.x_min && x0 <= g.x_max) {
                    return at(&format!("x0 = {x0} outside the grid"));
                }
            }
        }
        if let Some(sp) = &self.spectrum {
            if sp.levels == Some(0) || sp.n.is_some_and(|n| n < 16) {
                return bad("spectrum needs levels >= 1 and n >= 16".into());
            }
            if sp.x_max.is_some_and(|x| !(x > g.x_min)) {
                return bad("spectrum x_max must exceed the grid x_min".into());
            }
        }
        for f in &self.output.formats {
            if f != "csv" && f != "json" {
                return bad(format!("unknown output format `{f}`"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
name = "demo"
[model]
family = "coulomb_x"
[grid]
x_min = 0.05
x_max = 10.0
n = 512
[[steps]]
kind = "add"
energy = -4.0
"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let c = ScenarioConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.steps[0].kind, StepKind::Add);
        assert!(c.verify.residuals);
        assert_eq!(c.output.formats, ["csv", "json"]);
        let again = ScenarioConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn missing_energy_is_rejected() {
        let text = MINIMAL.replace("energy = -4.0", "");
        let err = ScenarioConfig::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("step 1: missing energy"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("n = 512", "n = 512\nspacing = 2");
        assert!(ScenarioConfig::from_toml(&text).is_err());
    }

    #[test]
    fn iso_must_be_last() {
        let text = format!("{MINIMAL}\n[[steps]]\nkind = \"iso\"\nenergy = -4.0\ngammas = [1.0]\n[[steps]]\nkind = \"add\"\nenergy = -9.0\n");
        assert!(ScenarioConfig::from_toml(&text).is_err());
    }

    #[test]
    fn bad_grid_is_rejected() {
        let text = MINIMAL.replace("n = 512", "n = 4");
        assert!(ScenarioConfig::from_toml(&text).is_err());
    }
}
