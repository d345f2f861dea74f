//! Experiment configuration read from TOML.

use std::path::{Path, PathBuf};

use ballmax::perturb::{PerturbationFamily, PerturbationSpec};
use ballmax::problem::{Tolerances, DEFAULT_RADIUS_MULTIPLE};
use ballmax::radial::{ball_radius, default_directions, DEFAULT_RADIAL_CELLS};
use ballmax::integrand::Table;
use ballmax::{Family, Integrand64};
use serde::Deserialize;

use crate::RunError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub integrand: IntegrandConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    #[serde(default)]
    pub checks: ChecksConfig,
    #[serde(default)]
    pub families: Vec<FamilyConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrandConfig {
    pub family: String,
    pub m: Option<f64>,
    pub c: Option<f64>,
    pub gamma: Option<f64>,
    pub q: Option<f64>,
    pub a: f64,
    pub p: f64,
    pub n: usize,
    pub r_knots: Option<Vec<f64>>,
    pub s_knots: Option<Vec<f64>>,
    /// Row `i` holds `F(r_knots[i], ·)` at the `s_knots`.
    pub values: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Truncation in units of the maximizer radius; ignored when `r_max` is set.
    #[serde(default = "default_multiple")]
    pub r_max_multiple: f64,
    pub r_max: Option<f64>,
    #[serde(default = "default_cells")]
    pub n_r: usize,
    pub n_dir: Option<usize>,
}

fn default_multiple() -> f64 {
    DEFAULT_RADIUS_MULTIPLE
}

fn default_cells() -> usize {
    DEFAULT_RADIAL_CELLS
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            r_max_multiple: default_multiple(),
            r_max: None,
            n_r: default_cells(),
            n_dir: None,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    pub hypothesis: Option<f64>,
    pub strict: Option<f64>,
    pub mass: Option<f64>,
    pub chain_rel: Option<f64>,
    pub transport_mass: Option<f64>,
    pub max_trim: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChecksConfig {
    #[serde(default = "yes")]
    pub hypotheses: bool,
    #[serde(default = "yes")]
    pub chain: bool,
    #[serde(default = "yes")]
    pub stability: bool,
}

fn yes() -> bool {
    true
}

impl Default for ChecksConfig {
    fn default() -> Self {
        Self {
            hypotheses: true,
            chain: true,
            stability: true,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub family: String,
    pub tau: Vec<f64>,
    /// Seeds for `random_rays`; the global seed when empty. Other families run once per `τ`.
    #[serde(default)]
    pub seeds: Vec<u64>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, RunError> {
        toml::from_str(text).map_err(|e| RunError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = std::fs::read_to_string(path).map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn integrand(&self) -> Result<Integrand64, String> {
        let c = &self.integrand;
        let need = |v: Option<f64>, key: &str| v.ok_or_else(|| format!("integrand {} needs '{key}'", c.family));
        let family = match c.family.as_str() {
            "power_decay" => Family::PowerDecay {
                m: need(c.m, "m")?,
                q: need(c.q, "q")?,
            },
            "linear_cutoff" => Family::LinearCutoff {
                c: need(c.c, "c")?,
                q: need(c.q, "q")?,
            },
            "exponential" => Family::Exponential {
                gamma: need(c.gamma, "gamma")?,
                q: need(c.q, "q")?,
            },
            "tabulated" => {
                let (Some(r), Some(s), Some(v)) = (&c.r_knots, &c.s_knots, &c.values) else {
                    return Err("integrand tabulated needs 'r_knots', 's_knots' and 'values'".into());
                };
                Family::Tabulated(Table::new(r.clone(), s.clone(), v.clone()).map_err(|e| e.to_string())?)
            }
            other => return Err(format!("unknown integrand family '{other}'")),
        };
        Integrand64::new(family, c.a, c.p, c.n).map_err(|e| e.to_string())
    }

    /// Truncation radius given the maximizer radius.
    pub fn r_max(&self, radius: f64) -> f64 {
        self.grid.r_max.unwrap_or(self.grid.r_max_multiple * radius)
    }

    pub fn n_dir(&self) -> usize {
        self.grid.n_dir.unwrap_or_else(|| default_directions(self.integrand.n))
    }

    pub fn tolerances(&self, scale: f64) -> Tolerances<f64> {
        let mut t = Tolerances::<f64>::default();
        let o = &self.tolerances;
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        set(&mut t.hypothesis, o.hypothesis);
        set(&mut t.strict, o.strict);
        set(&mut t.mass, o.mass);
        set(&mut t.chain_rel, o.chain_rel);
        set(&mut t.transport_mass, o.transport_mass);
        set(&mut t.max_trim, o.max_trim);
        t.scaled(scale)
    }

    /// Competitor specs in config order.
    pub fn competitors(&self) -> Result<Vec<PerturbationSpec<f64>>, String> {
        let mut out = Vec::new();
        for fam in &self.families {
            let family: PerturbationFamily = fam.family.parse().map_err(|e: ballmax::Error| e.to_string())?;
            let seeds = match (family, fam.seeds.is_empty()) {
                (PerturbationFamily::RandomRays, false) => fam.seeds.clone(),
                _ => vec![self.seed],
            };
            for &tau in &fam.tau {
                for &seed in &seeds {
                    out.push(PerturbationSpec::new(family, tau).with_seed(seed));
                }
            }
        }
        Ok(out)
    }

    /// Every problem that would stop a run; empty when the run can start.
    pub fn validate(&self) -> Vec<String> {
        let mut issues = Vec::new();
        let n = self.integrand.n;
        if !(1..=3).contains(&n) {
            issues.push(format!("unsupported dimension {n} (expected 1, 2 or 3)"));
        }
        let integrand = match self.integrand() {
            Ok(f) => Some(f),
            Err(e) => {
                if !e.contains("unsupported dimension") {
                    issues.push(e);
                }
                None
            }
        };

        let g = &self.grid;
        if g.n_r < 16 {
            issues.push(format!("grid n_r must be at least 16, got {}", g.n_r));
        }
        if self.grid.n_dir == Some(0) {
            issues.push("grid n_dir must be positive".into());
        }
        if !(g.r_max_multiple > 0.0 && g.r_max_multiple.is_finite()) {
            issues.push(format!("grid r_max_multiple must be positive, got {}", g.r_max_multiple));
        }
        if let Some(r) = g.r_max {
            if !(r > 0.0 && r.is_finite()) {
                issues.push(format!("grid r_max must be positive, got {r}"));
            }
        }

        let t = &self.tolerances;
        for (key, v) in [
            ("hypothesis", t.hypothesis),
            ("strict", t.strict),
            ("mass", t.mass),
            ("chain_rel", t.chain_rel),
            ("transport_mass", t.transport_mass),
        ] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    issues.push(format!("tolerance {key} must be nonnegative, got {v}"));
                }
            }
        }
        if let Some(v) = t.max_trim {
            if !(0.0..1.0).contains(&v) {
                issues.push(format!("tolerance max_trim must lie in [0, 1), got {v}"));
            }
        }

        let ball = integrand.as_ref().and_then(|f| ball_radius(f, f64::INFINITY).ok());
        if let Some(b) = &ball {
            let r_max = self.r_max(b.radius);
            if r_max.is_finite() && r_max > 0.0 && r_max < b.radius {
                issues.push(format!(
                    "truncation smaller than maximizer: r_max = {r_max} < R = {}",
                    b.radius
                ));
            }
        }

        if self.families.is_empty() {
            issues.push("no perturbation families listed".into());
        }
        for fam in &self.families {
            let family = match fam.family.parse::<PerturbationFamily>() {
                Ok(f) => f,
                Err(_) => {
                    issues.push(format!("unknown perturbation family '{}'", fam.family));
                    continue;
                }
            };
            if fam.tau.is_empty() {
                issues.push(format!("family {family} lists no tau values"));
            }
            let Some(b) = &ball else { continue };
            let hi = PerturbationSpec::max_tau(family, b.n, b.radius, self.r_max(b.radius));
            for &tau in &fam.tau {
                if !(tau >= 0.0 && tau <= hi) {
                    issues.push(format!("family {family}: tau {tau} outside [0, {hi}]"));
                }
            }
        }
        issues
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
seed = 7

[integrand]
family = "linear_cutoff"
c = 3.0
q = 2.0
a = 1.0
p = 2.0
n = 1

[grid]
n_r = 64

[[families]]
family = "translate_ball"
tau = [0.0, 0.1]

[[families]]
family = "random_rays"
tau = [0.5]
seeds = [1, 2, 3]
"#;

    #[test]
    fn well_formed_config_is_clean() {
        let cfg = ExperimentConfig::parse(BASE).unwrap();
        assert!(cfg.validate().is_empty(), "{:?}", cfg.validate());
        assert_eq!(cfg.n_dir(), 2);
        assert_eq!(cfg.r_max(0.5), 2.0);
    }

    #[test]
    fn competitors_follow_config_order() {
        let cfg = ExperimentConfig::parse(BASE).unwrap();
        let specs = cfg.competitors().unwrap();
        assert_eq!(specs.len(), 5);
        assert_eq!(specs[0].family, PerturbationFamily::TranslateBall);
        assert_eq!(specs[0].seed, 7);
        let seeds: Vec<u64> = specs[2..].iter().map(|s| s.seed).collect();
        assert_eq!(seeds, [1, 2, 3]);
    }

    #[test]
    fn dimension_four_is_unsupported() {
        let cfg = ExperimentConfig::parse(&BASE.replace("n = 1", "n = 4")).unwrap();
        let issues = cfg.validate();
        assert_eq!(issues.len(), 1, "{issues:?}");
        assert!(issues[0].contains("unsupported dimension"));
    }

    #[test]
    fn short_truncation_is_reported() {
        let cfg = ExperimentConfig::parse(&BASE.replace("n_r = 64", "n_r = 64\nr_max = 0.3")).unwrap();
        let issues = cfg.validate();
        assert!(issues.iter().any(|s| s.contains("truncation smaller than maximizer")), "{issues:?}");
    }

    #[test]
    fn bad_names_and_ranges_are_reported() {
        let text = BASE
            .replace("\"random_rays\"", "\"wobble\"")
            .replace("tau = [0.0, 0.1]", "tau = [0.0, 9.0]");
        let issues = ExperimentConfig::parse(&text).unwrap().validate();
        assert!(issues.iter().any(|s| s.contains("unknown perturbation family 'wobble'")));
        assert!(issues.iter().any(|s| s.contains("tau 9 outside")));
    }

    #[test]
    fn missing_parameter_is_named() {
        let cfg = ExperimentConfig::parse(&BASE.replace("c = 3.0\n", "")).unwrap();
        assert_eq!(cfg.validate(), ["integrand linear_cutoff needs 'c'"]);
    }

    #[test]
    fn unknown_keys_fail_to_parse() {
        assert!(matches!(
            ExperimentConfig::parse(&BASE.replace("seed = 7", "sead = 7")),
            Err(RunError::Parse(_))
        ));
    }

    #[test]
    fn tolerance_overrides_then_scale() {
        let cfg = ExperimentConfig::parse(&format!("{BASE}\n[tolerances]\nmass = 1e-4\n")).unwrap();
        let t = cfg.tolerances(10.0);
        assert!((t.mass - 1e-3).abs() < 1e-15);
        assert_eq!(t.max_trim, 0.02);
    }
}
