use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::bounds::{BoundReport, ResidualSummary, Sample};
use crate::embedsolve::Embeddability;
use crate::error::{Error, Result};
use crate::intrinsic::DiameterEstimate;
use crate::surfaces::{Chart, ChartPoint};

pub const SCHEMA: &str = "isoembed-report/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: String,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub sections: Vec<Section>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub name: String,
    pub pass: bool,
    pub wall_time_s: f64,
    pub body: SectionBody,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "data", rename_all = "kebab-case")]
pub enum SectionBody {
    Bound(BoundReport),
    Residual(ResidualSummary),
    Diameter(DiameterEstimate),
    Solve(SolveSummary),
    Embeddability(Embeddability),
    Reconstruction(ReconstructionSummary),
    EpsilonFamily(EpsilonTable),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub points: usize,
    /// Largest `‖Φ(frame χ) − frame Ricci‖`.
    pub max_residual: f64,
    pub min_eps_gap: f64,
    pub min_eps_gap_at: Option<ChartPoint>,
    /// Largest `‖χ − χ_true‖ / ‖χ_true‖` when compared with the family.
    pub max_relative_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionSummary {
    pub step: f64,
    pub half_width: f64,
    pub nodes: usize,
    pub isometry_residual: f64,
    pub holonomy_residual: f64,
    pub rms: f64,
    pub alignment_unstable: bool,
    pub refined_rms: Option<f64>,
    pub convergence_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonRow {
    pub epsilon: f64,
    /// Smallest eigenvalue of `χ^ε` relative to `g^ε`.
    pub min_chi_eigenvalue: f64,
    /// `max |g^ε − g|` over the grid, entrywise.
    pub metric_distance: f64,
    /// `(distance/ε) / (distance₀/ε₀)`; 1 for exactly linear decay.
    pub linearity_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonTable {
    pub rows: Vec<EpsilonRow>,
    pub monotone: bool,
}

impl RunReport {
    pub fn new(command: &str, config: &RunConfig, sections: Vec<Section>) -> Self {
        let pass = sections.iter().all(|s| s.pass);
        RunReport {
            schema: SCHEMA.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config: config.clone(),
            sections,
            pass,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed report: {e}")))
    }

    /// The report with every wall-time field zeroed.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        for s in &mut r.sections {
            s.wall_time_s = 0.0;
        }
        r
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "isoembed {} {} (schema {})", self.version, self.command, self.schema);
        for s in &self.sections {
            let tag = if s.pass { "PASS" } else { "FAIL" };
            let _ = write!(out, "[{tag}] {:<20}", s.name);
            match &s.body {
                SectionBody::Bound(b) => {
                    let _ = write!(out, " lhs {}  rhs {}  slack {}", g(b.lhs), g(b.rhs), g(b.slack));
                }
                SectionBody::Residual(r) => {
                    let _ = write!(out, " max {}  tol {}", g(r.max), g(r.tol));
                }
                SectionBody::Diameter(d) => {
                    let _ = write!(out, " value {}  resolution {}  sources {}", g(d.value), d.resolution, d.sources);
                }
                SectionBody::Solve(s) => {
                    let _ = write!(out, " residual {}  min eps gap {}", g(s.max_residual), g(s.min_eps_gap));
                    if let Some(e) = s.max_relative_error {
                        let _ = write!(out, "  relative error {}", g(e));
                    }
                }
                SectionBody::Embeddability(e) => {
                    let _ = write!(
                        out,
                        " codazzi {}  threshold {}  embeddable {}",
                        g(e.max_residual),
                        g(e.threshold),
                        e.embeddable
                    );
                }
                SectionBody::Reconstruction(r) => {
                    let _ = write!(
                        out,
                        " rms {}  holonomy {}  isometry {}",
                        g(r.rms),
                        g(r.holonomy_residual),
                        g(r.isometry_residual)
                    );
                    if let Some(q) = r.convergence_ratio {
                        let _ = write!(out, "  ratio {}", g(q));
                    }
                }
                SectionBody::EpsilonFamily(t) => {
                    let _ = writeln!(out, " monotone {}", t.monotone);
                    let _ = write!(out, "    epsilon\tmin_chi_eigenvalue\tmetric_distance\tlinearity_ratio");
                    for r in &t.rows {
                        let _ = write!(
                            out,
                            "\n    {}\t{}\t{}\t{}",
                            g(r.epsilon),
                            g(r.min_chi_eigenvalue),
                            g(r.metric_distance),
                            g(r.linearity_ratio)
                        );
                    }
                }
            }
            out.push('\n');
        }
        let _ = writeln!(out, "overall: {}", if self.pass { "PASS" } else { "FAIL" });
        out
    }
}

/// Seventeen significant digits.
pub fn g(v: f64) -> String {
    format!("{v:.16e}")
}

/// Per-point table with columns chart, coordinates, H, R, ΔR, ‖χ‖ and the
/// Gauss, Codazzi and support-identity residuals.
pub fn grid_table(sample: &Sample) -> String {
    let n = sample.dim();
    let mut out = String::from("chart");
    for i in 1..=n {
        let _ = write!(out, "\tx{i}");
    }
    out.push_str("\tH\tR\tlaplacian_R\tchi_norm\tgauss_residual\tcodazzi_residual\tsupport_residual\n");
    for p in &sample.points {
        out.push_str(match p.point.chart {
            Chart::North => "north",
            Chart::South => "south",
        });
        for c in &p.point.coords {
            let _ = write!(out, "\t{}", g(*c));
        }
        for v in [
            p.mean_curvature,
            p.scalar,
            p.laplacian_scalar,
            p.chi_norm_sq.max(0.0).sqrt(),
            p.gauss_residual,
            p.codazzi_residual,
            p.support_residuals.max(),
        ] {
            let _ = write!(out, "\t{}", g(v));
        }
        out.push('\n');
    }
    out
}
