use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::embedsolve::{FrameChoice, RicciPerturbation};
use crate::error::{Error, Result};
use crate::surfaces::{Chart, Family, DEFAULT_CHART_RADIUS};

pub const CHECKS: [&str; 7] = [
    "weyl",
    "guanli",
    "c2bound",
    "second-deriv",
    "gauss-residual",
    "codazzi-residual",
    "support-identities",
];

/// A run described as a TOML document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: Family,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "all_checks")]
    pub checks: Vec<String>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub solve: SolveConfig,
    #[serde(default)]
    pub reconstruct: ReconstructConfig,
    #[serde(default)]
    pub epsilon: EpsilonConfig,
}

fn all_checks() -> Vec<String> {
    CHECKS.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    /// Lattice points per axis in each chart.
    pub resolution: usize,
    pub chart_radius: f64,
    /// Extra uniformly random points drawn with the run seed.
    pub random_samples: usize,
    /// Resolution of the geodesic graph; defaults to `resolution`.
    pub geodesic_resolution: Option<usize>,
    /// Known diameter; skips the graph estimate.
    pub diameter: Option<f64>,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            resolution: 9,
            chart_radius: DEFAULT_CHART_RADIUS,
            random_samples: 0,
            geodesic_resolution: None,
            diameter: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Pointwise identity residuals.
    pub residual: f64,
    /// Relative error of the solved χ against the family's own.
    pub chi_relative: f64,
    /// RMS distance of a reconstruction to the embedded truth.
    pub reconstruction_rms: f64,
    /// Holonomy residual of embedded data.
    pub holonomy: f64,
    /// Smallest accepted RMS ratio when the step is halved.
    pub convergence_ratio: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: 1e-7,
            chi_relative: 1e-6,
            reconstruction_rms: 1e-4,
            holonomy: 1e-6,
            convergence_ratio: 12.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    /// JSON report.
    pub report: Option<PathBuf>,
    /// Tab-separated per-point table.
    pub grid_table: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expect {
    Embeddable,
    NotEmbeddable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    pub frame: FrameChoice,
    pub perturbation: Option<RicciPerturbation>,
    /// Expected verdict; defaults to embeddable unless Ricci is perturbed.
    pub expect: Option<Expect>,
    /// Compare the solved χ with the family's own.
    pub compare_truth: bool,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            frame: FrameChoice::Cholesky,
            perturbation: None,
            expect: None,
            compare_truth: true,
        }
    }
}

impl SolveConfig {
    pub fn expected(&self) -> Expect {
        self.expect.unwrap_or(if self.perturbation.is_some() {
            Expect::NotEmbeddable
        } else {
            Expect::Embeddable
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChiSource {
    /// Solve the contracted Gauss equation from the metric.
    Solved,
    /// Use the family's own second fundamental form.
    Embedded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReconstructConfig {
    pub chart: Chart,
    /// Patch center; defaults to the chart origin.
    pub center: Option<Vec<f64>>,
    pub half_width: f64,
    pub step: f64,
    pub chi: ChiSource,
    pub perturbation: Option<RicciPerturbation>,
    /// Also run with half the step and report the error ratio.
    pub refine: bool,
}

impl Default for ReconstructConfig {
    fn default() -> Self {
        ReconstructConfig {
            chart: Chart::North,
            center: None,
            half_width: 0.1,
            step: 0.01,
            chi: ChiSource::Solved,
            perturbation: None,
            refine: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EpsilonConfig {
    pub values: Vec<f64>,
}

impl Default for EpsilonConfig {
    fn default() -> Self {
        EpsilonConfig {
            values: vec![0.1, 0.05, 0.025],
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        self.family.validate().map_err(|e| Error::Config(e.to_string()))?;
        let res = self.grid.resolution;
        if res < 5 || res.is_multiple_of(2) {
            return bad(format!("grid.resolution must be odd and >= 5, got {res}"));
        }
        if let Some(g) = self.grid.geodesic_resolution {
            if g < 5 || g % 2 == 0 {
                return bad(format!("grid.geodesic_resolution must be odd and >= 5, got {g}"));
            }
        }
        let r = self.grid.chart_radius;
        if !(r > 1.0 && r <= DEFAULT_CHART_RADIUS) {
            return bad(format!("grid.chart_radius must lie in (1, {DEFAULT_CHART_RADIUS}], got {r}"));
        }
        if let Some(d) = self.grid.diameter {
            if !(d > 0.0 && d.is_finite()) {
                return bad(format!("grid.diameter must be positive, got {d}"));
            }
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("residual", t.residual),
            ("chi_relative", t.chi_relative),
            ("reconstruction_rms", t.reconstruction_rms),
            ("holonomy", t.holonomy),
            ("convergence_ratio", t.convergence_ratio),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("tolerances.{name} must be positive, got {v}"));
            }
        }
        for c in &self.checks {
            if !CHECKS.contains(&c.as_str()) {
                return bad(format!("unknown check '{c}'; valid checks: {}", CHECKS.join(", ")));
            }
        }
        let rc = &self.reconstruct;
        if !(rc.half_width > 0.0 && rc.step > 0.0) {
            return bad("reconstruct.half_width and reconstruct.step must be positive".into());
        }
        if rc.perturbation.is_some() && rc.chi != ChiSource::Solved {
            return bad("reconstruct.perturbation requires chi = \"solved\"".into());
        }
        if let Some(c) = &rc.center {
            if c.len() != self.family.dim() {
                return bad(format!("reconstruct.center needs {} coordinates", self.family.dim()));
            }
        }
        for p in [&self.solve.perturbation, &rc.perturbation].into_iter().flatten() {
            if p.diagonal.len() != self.family.dim() {
                return bad(format!("perturbation.diagonal needs {} entries", self.family.dim()));
            }
        }
        if self.epsilon.values.is_empty() || self.epsilon.values.iter().any(|e| !(*e > 0.0)) {
            return bad("epsilon.values must be a nonempty list of positive numbers".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SPHERE: &str = "[family]\nkind = \"round-sphere\"\ndim = 3\nradius = 1.0\n";

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::from_toml(SPHERE).unwrap();
        assert_eq!(c.grid.resolution, 9);
        assert_eq!(c.checks.len(), 7);
        assert_eq!(c.solve.expected(), Expect::Embeddable);
    }

    #[test]
    fn rejects_bad_values() {
        for extra in [
            "[grid]\nresolution = 4\n",
            "[grid]\nresolution = 7\nchart_radius = 2.5\n",
            "[tolerances]\nresidual = 0.0\n",
            "checks = [\"weyl\", \"nonsense\"]\n",
            "colour = 3\n",
        ] {
            let text = if extra.starts_with('[') {
                format!("{SPHERE}{extra}")
            } else {
                format!("{extra}{SPHERE}")
            };
            assert!(matches!(RunConfig::from_toml(&text), Err(Error::Config(_))), "{extra}");
        }
    }

    #[test]
    fn serializes_back_to_the_same_config() {
        let c = RunConfig::from_toml(&format!("{SPHERE}[grid]\nresolution = 7\n")).unwrap();
        let again = RunConfig::from_toml(&toml::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, again);
    }
}
