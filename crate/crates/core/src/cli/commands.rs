use std::time::Instant;

use nalgebra::DMatrix;

use super::config::{ChiSource, Expect, RunConfig, CHECKS};
use super::report::{
    EpsilonRow, EpsilonTable, ReconstructionSummary, RunReport, Section, SectionBody, SolveSummary,
};
use crate::bounds::{
    c2bound_report, guanli_report, residual_summary, second_deriv_report, weyl_report, Sample,
};
use crate::embedsolve::{
    calibrate_threshold, embeddability_check, reconstruct, solve_contracted_gauss, ChiModel, FrameState,
    IntrinsicField, PathPlan,
};
use crate::error::{Error, Result};
use crate::intrinsic::{diameter, GeodesicGraph, MetricSource};
use crate::surfaces::{evaluate, evaluate_order, epsilon_family, sample_points, ChartGrid, ChartPoint, Family};

/// Grid points of both charts followed by the seeded random points.
pub fn run_points(config: &RunConfig) -> Result<Vec<ChartPoint>> {
    let dim = config.family.dim();
    let grid = ChartGrid::new(dim, config.grid.resolution, config.grid.chart_radius)?;
    let mut points = grid.points();
    if config.grid.random_samples > 0 {
        points.extend(sample_points(
            dim,
            config.grid.random_samples,
            config.grid.chart_radius,
            config.seed,
        ));
    }
    Ok(points)
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let value = f()?;
    Ok((value, start.elapsed().as_secs_f64()))
}

fn section(name: &str, pass: bool, wall_time_s: f64, body: SectionBody) -> Section {
    Section {
        name: name.to_string(),
        pass,
        wall_time_s,
        body,
    }
}

/// Runs the configured checks; also returns the evaluated sample for the
/// grid table.
pub fn cmd_verify(config: &RunConfig) -> Result<(RunReport, Sample)> {
    let points = run_points(config)?;
    let sample = Sample::evaluate(&config.family, &points, Some(config.grid.resolution))?;
    let mut sections = Vec::new();
    // Checks run in canonical order, each at most once.
    for &check in CHECKS.iter().filter(|c| config.checks.iter().any(|s| s == *c)) {
        let tol = config.tolerances.residual;
        match check {
            "weyl" => {
                let (r, t) = timed(|| weyl_report(&sample))?;
                sections.push(section(check, r.pass, t, SectionBody::Bound(r)));
            }
            "guanli" => {
                let d = match config.grid.diameter {
                    Some(d) => d,
                    None => {
                        let res = config.grid.geodesic_resolution.unwrap_or(config.grid.resolution);
                        let (est, t) = timed(|| {
                            diameter(&GeodesicGraph::build(&config.family, res, config.grid.chart_radius)?)
                        })?;
                        let d = est.value;
                        sections.push(section("diameter", true, t, SectionBody::Diameter(est)));
                        d
                    }
                };
                let (r, t) = timed(|| guanli_report(&sample, d))?;
                sections.push(section(check, r.pass, t, SectionBody::Bound(r)));
            }
            "c2bound" => {
                let (r, t) = timed(|| c2bound_report(&sample))?;
                sections.push(section(check, r.pass, t, SectionBody::Bound(r)));
            }
            "second-deriv" => {
                let (r, t) = timed(|| second_deriv_report(&sample))?;
                sections.push(section(check, r.pass, t, SectionBody::Bound(r)));
            }
            _ => {
                let (r, t) = timed(|| {
                    Ok(residual_summary(check, &sample, tol, |p| match check {
                        "gauss-residual" => p.gauss_residual,
                        "codazzi-residual" => p.codazzi_residual,
                        _ => p.support_residuals.max(),
                    }))
                })?;
                sections.push(section(check, r.pass, t, SectionBody::Residual(r)));
            }
        }
    }
    Ok((RunReport::new("verify", config, sections), sample))
}

/// Contracted Gauss solve followed by the Codazzi verdict.
pub fn cmd_solve(config: &RunConfig) -> Result<RunReport> {
    let points = run_points(config)?;
    let sc = &config.solve;
    let (field, t_field) = timed(|| {
        let field = IntrinsicField::from_source(&config.family, &points)?;
        match &sc.perturbation {
            Some(p) => field.perturbed(p.clone()),
            None => Ok(field),
        }
    })?;
    let (chi, t_solve) = timed(|| solve_contracted_gauss(&field, sc.frame))?;

    let max_relative_error = if sc.compare_truth && sc.perturbation.is_none() {
        let mut worst: f64 = 0.0;
        for cp in &chi.points {
            let truth = evaluate_order(&config.family, &cp.point, 2)?.chi_value();
            worst = worst.max((cp.chi_value() - &truth).norm() / truth.norm());
        }
        Some(worst)
    } else {
        None
    };
    let gap_at = chi
        .points
        .iter()
        .fold(None::<&crate::embedsolve::ChiPoint>, |best, p| match best {
            Some(b) if b.eps_gap <= p.eps_gap => Some(b),
            _ => Some(p),
        })
        .map(|p| p.point.clone());
    let summary = SolveSummary {
        points: chi.points.len(),
        max_residual: chi.max_residual(),
        min_eps_gap: chi.min_eps_gap(),
        min_eps_gap_at: gap_at,
        max_relative_error,
    };
    let solve_pass = max_relative_error.is_none_or(|e| e <= config.tolerances.chi_relative);
    let mut sections = vec![section(
        "contracted-gauss",
        solve_pass,
        t_field + t_solve,
        SectionBody::Solve(summary),
    )];

    let (verdict, t) = timed(|| {
        let theta = calibrate_threshold(&points, sc.frame)?;
        embeddability_check(&field, &chi, theta)
    })?;
    let pass = verdict.embeddable == (sc.expected() == Expect::Embeddable);
    sections.push(section("embeddability", pass, t, SectionBody::Embeddability(verdict)));
    Ok(RunReport::new("solve", config, sections))
}

/// Metric → χ → frame integration → rigid comparison with the family.
pub fn cmd_reconstruct(config: &RunConfig) -> Result<RunReport> {
    let rc = &config.reconstruct;
    let family = &config.family;
    let center = ChartPoint::new(rc.chart, rc.center.clone().unwrap_or_else(|| vec![0.0; family.dim()]));
    let plan = PathPlan {
        center,
        half_width: rc.half_width,
        step: rc.step,
    };
    plan.steps().map_err(|e| Error::Config(e.to_string()))?;
    let model = match rc.chi {
        ChiSource::Embedded => ChiModel::Embedded(family),
        ChiSource::Solved => ChiModel::Solved {
            perturbation: rc.perturbation.clone(),
            frame: config.solve.frame,
        },
    };
    let seed = FrameState::seed(&family.metric_value(&plan.center)?)?;
    let ((recon, alignment), t) = timed(|| {
        let r = reconstruct(family, &model, &seed, &plan)?;
        let a = r.compare(family)?;
        Ok((r, a))
    })?;
    let (refined_rms, t_refined) = if rc.refine {
        let (rms, t) = timed(|| Ok(reconstruct(family, &model, &seed, &plan.refined())?.compare(family)?.rms))?;
        (Some(rms), t)
    } else {
        (None, 0.0)
    };
    let convergence_ratio = refined_rms.map(|f| alignment.rms / f);
    let tol = &config.tolerances;
    let pass = if rc.perturbation.is_some() {
        recon.holonomy_residual > tol.holonomy
    } else {
        alignment.rms <= tol.reconstruction_rms
            && recon.holonomy_residual <= tol.holonomy
            && convergence_ratio.is_none_or(|q| q >= tol.convergence_ratio)
    };
    let summary = ReconstructionSummary {
        step: rc.step,
        half_width: rc.half_width,
        nodes: recon.points.len(),
        isometry_residual: recon.isometry_residual,
        holonomy_residual: recon.holonomy_residual,
        rms: alignment.rms,
        alignment_unstable: alignment.unstable,
        refined_rms,
        convergence_ratio,
    };
    Ok(RunReport::new(
        "reconstruct",
        config,
        vec![section("reconstruction", pass, t + t_refined, SectionBody::Reconstruction(summary))],
    ))
}

/// Convergence table of the shifted radial graphs `u + ε`.
pub fn cmd_family(config: &RunConfig) -> Result<RunReport> {
    let base = &config.family;
    if !matches!(base, Family::RadialGraph { .. }) {
        return Err(Error::Config("the family command needs a radial-graph family".into()));
    }
    let points = run_points(config)?;
    let (table, t) = timed(|| {
        let base_metric: Vec<DMatrix<f64>> =
            points.iter().map(|p| base.metric_value(p)).collect::<Result<_>>()?;
        let mut rows: Vec<EpsilonRow> = Vec::new();
        for &eps in &config.epsilon.values {
            let f = epsilon_family(base, eps)?;
            let mut min_eig = f64::INFINITY;
            let mut dist: f64 = 0.0;
            for (p, g0) in points.iter().zip(&base_metric) {
                let sp = evaluate(&f, p)?;
                min_eig = min_eig.min(sp.principal_curvatures()?.into_iter().fold(f64::INFINITY, f64::min));
                dist = dist.max((sp.metric_value() - g0).abs().max());
            }
            let first = rows.first().map_or(dist / eps, |r| r.metric_distance / r.epsilon);
            rows.push(EpsilonRow {
                epsilon: eps,
                min_chi_eigenvalue: min_eig,
                metric_distance: dist,
                linearity_ratio: (dist / eps) / first,
            });
        }
        let mut by_eps: Vec<&EpsilonRow> = rows.iter().collect();
        by_eps.sort_by(|a, b| b.epsilon.total_cmp(&a.epsilon));
        let monotone = by_eps.windows(2).all(|w| w[1].metric_distance < w[0].metric_distance);
        Ok(EpsilonTable { rows, monotone })
    })?;
    let pass = table.monotone
        && table
            .rows
            .iter()
            .all(|r| r.min_chi_eigenvalue > 0.0 && (0.5..=2.0).contains(&r.linearity_ratio));
    Ok(RunReport::new(
        "family",
        config,
        vec![section("epsilon-family", pass, t, SectionBody::EpsilonFamily(table))],
    ))
}
