//! CSV curves and the TOML summary of a [`ResultBundle`].

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;

use super::{ExperimentConfig, OrderingCheck, ResultBundle};
use crate::assumptions::AssumptionReport;
use crate::dynamics::StabilityProbe;
use crate::error::Result;
use crate::widths::{WidthPair, WidthSolution};
use crate::IterationTrace;

fn write_columns(path: &Path, header: &[String], columns: &[&[f64]]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "{}", header.join(","))?;
    let rows = columns.iter().map(|c| c.len()).min().unwrap_or(0);
    for i in 0..rows {
        let row: Vec<String> = columns.iter().map(|c| format!("{:e}", c[i])).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

fn names(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

fn write_trace(path: &Path, trace: &IterationTrace) -> Result<()> {
    let n: Vec<f64> = (1..=trace.errors.len()).map(|i| i as f64).collect();
    write_columns(path, &names(&["n", "epsilon"]), &[&n, &trace.errors])
}

#[derive(Serialize)]
struct Metadata {
    package: &'static str,
    version: &'static str,
    generated_unix_seconds: u64,
}

#[derive(Serialize)]
struct DirectSummary<'a> {
    trace: &'a IterationTrace,
    settles_below_1e_5: Option<usize>,
    lower_upper_gap: f64,
    decreasing: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    ordering: Option<OrderingCheck>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bump_delta_tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bump_delta_zero: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    bump_asymmetry: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stationarity_residual: Option<f64>,
}

#[derive(Serialize)]
struct WidthSummary<'a> {
    trace: &'a IterationTrace,
    settles_below_1e_5: Option<usize>,
    k: f64,
    m: f64,
    decreasing: bool,
    profile_at_0: f64,
    profile_at_tau: f64,
    posterior: &'a AssumptionReport,
}

#[derive(Serialize)]
struct ProbeSummary<'a> {
    name: &'a str,
    #[serde(flatten)]
    probe: &'a StabilityProbe,
}

#[derive(Serialize)]
struct Summary<'a> {
    metadata: Metadata,
    failures: &'a [String],
    assumptions_hold: bool,
    failed_assumptions: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cross_validation: Option<f64>,
    solutions_h: &'a [WidthSolution],
    solutions_h_tau: &'a [WidthSolution],
    #[serde(skip_serializing_if = "Option::is_none")]
    pair: Option<WidthPair>,
    #[serde(skip_serializing_if = "Option::is_none")]
    assumptions: Option<&'a AssumptionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    direct: Option<DirectSummary<'a>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    width: Option<WidthSummary<'a>>,
    probes: Vec<ProbeSummary<'a>>,
    config: &'a ExperimentConfig,
}

/// Scalars of the bundle as a TOML document.
pub fn summary_toml(bundle: &ResultBundle) -> String {
    let generated = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let direct = bundle.direct.as_ref().map(|d| DirectSummary {
        trace: &d.trace,
        settles_below_1e_5: d.trace.settles_below(1e-5),
        lower_upper_gap: d.upper.max_abs_diff(&d.lower),
        decreasing: d.decreasing,
        ordering: d.ordering,
        bump_delta_tau: d.bump.as_ref().map(|b| b.delta_tau),
        bump_delta_zero: d.bump.as_ref().map(|b| b.delta_zero),
        bump_asymmetry: d.bump.as_ref().map(|b| b.asymmetry()),
        stationarity_residual: d.stationarity_residual,
    });
    let width = bundle.width.as_ref().map(|w| WidthSummary {
        trace: &w.trace,
        settles_below_1e_5: w.trace.settles_below(1e-5),
        k: w.k,
        m: w.m,
        decreasing: w.decreasing,
        profile_at_0: w.upper.values()[0],
        profile_at_tau: *w.upper.values().last().expect("non-empty"),
        posterior: &w.posterior,
    });
    let summary = Summary {
        metadata: Metadata {
            package: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            generated_unix_seconds: generated,
        },
        failures: &bundle.failures,
        assumptions_hold: bundle.assumptions_hold(),
        failed_assumptions: bundle.failed_assumptions(),
        cross_validation: bundle.cross_validation,
        solutions_h: &bundle.solutions_h,
        solutions_h_tau: &bundle.solutions_h_tau,
        pair: bundle.pair,
        assumptions: bundle.assumptions.as_ref(),
        direct,
        width,
        probes: bundle
            .probes
            .iter()
            .map(|p| ProbeSummary {
                name: p.name,
                probe: &p.probe,
            })
            .collect(),
        config: &bundle.config,
    };
    toml::to_string(&summary).expect("summary serializes")
}

/// Writes `summary.toml` and one CSV per curve into `dir`. Returns the
/// written paths.
pub fn write_outputs(bundle: &ResultBundle, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let mut path = |name: &str| {
        let p = dir.join(name);
        written.push(p.clone());
        p
    };

    std::fs::write(path("summary.toml"), summary_toml(bundle))?;

    {
        let sols: Vec<&WidthSolution> = bundle
            .solutions_h
            .iter()
            .chain(&bundle.solutions_h_tau)
            .collect();
        let col = |f: fn(&WidthSolution) -> f64| sols.iter().map(|s| f(s)).collect::<Vec<f64>>();
        let level = col(|s| s.level);
        let hw = col(|s| s.half_width);
        let om = col(|s| s.omega_at_width);
        let margin = col(|s| s.existence.worst_margin);
        write_columns(
            &path("widths.csv"),
            &names(&["level", "half_width", "omega_at_width", "existence_margin"]),
            &[&level, &hw, &om, &margin],
        )?;
    }

    if let Some(d) = &bundle.direct {
        write_trace(&path("direct_errors.csv"), &d.trace)?;
        let x: Vec<f64> = d.upper.grid().points().collect();
        let mut header = vec!["x".to_string()];
        let mut cols: Vec<&[f64]> = vec![&x];
        for (n, (w, v)) in d.iterates.iter().enumerate() {
            header.push(format!("w_{n}"));
            header.push(format!("v_{n}"));
            cols.push(w.values());
            cols.push(v.values());
        }
        write_columns(&path("direct_iterates.csv"), &header, &cols)?;
        write_columns(
            &path("direct_solution.csv"),
            &names(&["x", "u_lower", "u_upper", "u_tau", "u_zero"]),
            &[&x, d.lower.values(), d.upper.values(), d.u_tau.values(), d.u_zero.values()],
        )?;
        if let Some(b) = &d.bump {
            let bx: Vec<f64> = b.profile.grid().points().collect();
            write_columns(&path("bump_direct.csv"), &names(&["x", "u"]), &[&bx, b.profile.values()])?;
        }
    }

    if let Some(w) = &bundle.width {
        write_trace(&path("width_errors.csv"), &w.trace)?;
        let t: Vec<f64> = w.upper.grid().points().collect();
        let mut header = names(&["t", "delta_lower", "delta_upper"]);
        let crossings = bundle
            .direct
            .as_ref()
            .and_then(|d| d.bump.as_ref())
            .and_then(|b| {
                let levels: Vec<f64> = t.iter().map(|t| t + b.h).collect();
                crate::scheme_direct::level_crossings(b, &levels).ok()
            });
        let mut cols: Vec<&[f64]> = vec![&t, w.lower.values(), w.upper.values()];
        if let Some(c) = &crossings {
            header.push("delta_from_direct".into());
            cols.push(c);
        }
        write_columns(&path("width_profile.csv"), &header, &cols)?;
        if let Some(b) = &w.bump {
            let bx: Vec<f64> = b.profile.grid().points().collect();
            write_columns(&path("bump_width.csv"), &names(&["x", "u"]), &[&bx, b.profile.values()])?;
        }
    }

    for p in &bundle.probes {
        let x: Vec<f64> = p.initial.grid().points().collect();
        write_columns(
            &path(&format!("simulate_{}.csv", p.name)),
            &names(&["x", "u_bump", "u_final"]),
            &[&x, p.initial.values(), p.last.field.values()],
        )?;
    }

    if let Ok(kernel) = bundle.config.kernel.build() {
        let upper = bundle
            .pair
            .map(|p| 2.0 * p.hi() + 5.0 * kernel.decay_length())
            .unwrap_or_else(|| 5.0 * kernel.decay_length());
        let grid = crate::numerics::Grid::new(0.0, upper, 1001)?;
        let x: Vec<f64> = grid.points().collect();
        let om: Vec<f64> = x.iter().map(|&x| kernel.omega(x)).collect();
        let w: Vec<f64> = x.iter().map(|&x| kernel.antiderivative(x)).collect();
        write_columns(&path("kernel.csv"), &names(&["x", "omega", "W"]), &[&x, &om, &w])?;
    }
    Ok(written)
}
