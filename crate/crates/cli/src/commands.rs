use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use porosplit_core::solver::{run_discretized, DivergencePolicy};
use porosplit_core::studies::{self, StudyAxis};
use porosplit_core::{Discretization, RunMode, ScenarioConfig, TimeScheme, Tuning};

use crate::output::{self, OutputFile};
use crate::plot;

fn load(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    ScenarioConfig::from_toml_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Writes all files at once, after every computation has succeeded.
fn write_all(out: &Path, files: &[OutputFile]) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    for f in files {
        let path = out.join(&f.name);
        fs::write(&path, &f.contents).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

pub fn solve(config_path: &Path, out: &Path, monolithic: bool, plots: bool) -> Result<bool> {
    let config = load(config_path)?;
    let disc = Discretization::new(&config).context("setting up the discretization")?;
    let mode = if monolithic {
        RunMode::Monolithic
    } else {
        RunMode::Split
    };
    let run = run_discretized(&disc, mode, DivergencePolicy::ContinueMonolithic)?;
    let mut files = vec![
        output::report_csv(&run)?,
        output::snapshots_csv(&disc, &run)?,
    ];
    if plots {
        for snap in &run.snapshots {
            files.push(plot::fields_svg(&disc, snap));
        }
    }
    write_all(out, &files)?;
    println!(
        "{} slabs, {} fixed-stress iterations in total, {}",
        run.snapshots.len(),
        run.total_iterations(),
        if run.converged() {
            "all converged"
        } else {
            "some slabs did not converge"
        }
    );
    Ok(run.converged())
}

pub fn sweep(config_path: &Path, out: &Path, omegas: &[f64], jobs: usize) -> Result<bool> {
    let config = load(config_path)?;
    if let Some(w) = omegas.iter().find(|w| w.is_nan() || **w <= 0.0) {
        bail!("omega values must be positive, got {w}");
    }
    let rows = studies::sweep_omega(&config, omegas, jobs)?;
    write_all(out, &[output::sweep_csv(&rows)?])?;
    if let Some(best) = studies::best_omega(&rows) {
        println!(
            "fewest iterations at omega = {} ({} in total)",
            best.omega, best.total_iters
        );
    }
    Ok(rows.iter().all(|r| r.converged))
}

pub fn study(
    config_path: &Path,
    out: &Path,
    vary: &str,
    values: &[String],
    omegas: &[f64],
    jobs: usize,
) -> Result<bool> {
    let config = load(config_path)?;
    let axis: StudyAxis = vary.parse()?;
    let omegas = if omegas.is_empty() {
        match config.tuning {
            Tuning::Relative(w) => vec![w],
            Tuning::Explicit(_) => bail!("the config gives an explicit tuning value; pass --omega"),
        }
    } else {
        omegas.to_vec()
    };
    // Reject bad values before any run starts.
    for v in values {
        studies::vary(&config, axis, v)?;
    }
    let rows = studies::study(&config, axis, values, &omegas, jobs)?;
    write_all(out, &[output::study_csv(axis, &rows)?])?;
    for r in &rows {
        println!(
            "{axis} = {}, omega = {}: {} iterations",
            r.value, r.row.omega, r.row.total_iters
        );
    }
    Ok(rows.iter().all(|r| r.row.converged))
}

pub fn mms(out: &Path, scheme: &str, degree: usize, space: bool, values: &[usize]) -> Result<bool> {
    let scheme: TimeScheme = scheme.parse()?;
    let values: Vec<usize> = match (values.is_empty(), space) {
        (false, _) => values.to_vec(),
        (true, false) => vec![8, 16, 32, 64],
        (true, true) => vec![4, 8, 16, 32],
    };
    if values.contains(&0) {
        bail!("refinement values must be positive");
    }
    let rows = if space {
        if scheme.degree() == 0 {
            log::warn!(
                "{scheme} is not exact for the linear-in-time solution; time errors will mix in"
            );
        }
        studies::mms_space_study(scheme, degree, &values)?
    } else {
        studies::mms_time_study(scheme, degree, &values)?
    };
    let exact = studies::mms_exactness(scheme, degree)?;
    log::info!("exactness errors (p, q, u): {exact:?}");
    let kind = if space { "space" } else { "time" };
    write_all(out, &[output::rates_csv(kind, scheme, degree, &rows)?])?;
    for r in &rows {
        if let Some(o) = r.orders {
            println!(
                "{kind} {}: orders p {:.3}, q {:.3}, u {:.3}",
                r.refinement, o[0], o[1], o[2]
            );
        }
    }
    Ok(true)
}
