//! CSV tables. Floats use Rust's shortest round-trip formatting.

use anyhow::Result;
use porosplit_core::fem::{displacement_l2_error, flux_l2_error, pressure_l2_error};
use porosplit_core::studies::{MmsRow, StudyAxis, StudyRow, SweepRow};
use porosplit_core::{Discretization, RunResult, Termination, TimeScheme};

use crate::plot;

/// Shortest round-trip decimal; exponent form for very small or large
/// magnitudes.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

pub struct OutputFile {
    pub name: String,
    pub contents: Vec<u8>,
}

fn table(
    name: &str,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<OutputFile> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    Ok(OutputFile {
        name: name.to_string(),
        contents: w.into_inner().map_err(|e| e.into_error())?,
    })
}

fn termination(t: Termination) -> &'static str {
    match t {
        Termination::Converged => "converged",
        Termination::MaxIters => "max-iters",
        Termination::Diverged => "diverged",
    }
}

pub fn report_csv(run: &RunResult) -> Result<OutputFile> {
    table(
        "report.csv",
        &[
            "slab",
            "iterations",
            "increment_p",
            "increment_q",
            "increment_u",
            "termination",
        ],
        run.reports.iter().map(|r| {
            let inc = r.final_increments();
            vec![
                r.slab.to_string(),
                r.iterations.to_string(),
                num(inc[0]),
                num(inc[1]),
                num(inc[2]),
                termination(r.termination).to_string(),
            ]
        }),
    )
}

pub fn snapshots_csv(disc: &Discretization, run: &RunResult) -> Result<OutputFile> {
    let sp = &disc.spaces;
    table(
        "snapshots.csv",
        &[
            "time",
            "norm_p",
            "norm_q",
            "norm_u",
            "max_abs_p",
            "max_abs_u",
        ],
        run.snapshots.iter().map(|s| {
            let (p_max, u_max) = plot::peaks(disc, s);
            vec![
                num(s.time),
                num(pressure_l2_error(&sp.pressure, &s.pressure, &|_| 0.0)),
                num(flux_l2_error(&sp.flux, &s.flux, &|_| [0.0; 2])),
                num(displacement_l2_error(
                    &sp.displacement,
                    &s.displacement,
                    &|_| [0.0; 2],
                )),
                num(p_max),
                num(u_max),
            ]
        }),
    )
}

fn sweep_fields(r: &SweepRow) -> [String; 5] {
    [
        num(r.omega),
        num(r.tuning),
        r.total_iters.to_string(),
        r.max_slab_iters.to_string(),
        r.converged.to_string(),
    ]
}

pub fn sweep_csv(rows: &[SweepRow]) -> Result<OutputFile> {
    table(
        "sweep.csv",
        &["omega", "L", "total_iters", "max_slab_iters", "converged"],
        rows.iter().map(|r| sweep_fields(r).to_vec()),
    )
}

pub fn study_csv(axis: StudyAxis, rows: &[StudyRow]) -> Result<OutputFile> {
    table(
        "study.csv",
        &[
            "axis",
            "value",
            "omega",
            "L",
            "total_iters",
            "max_slab_iters",
            "converged",
        ],
        rows.iter().map(|r| {
            let mut v = vec![axis.to_string(), r.value.clone()];
            v.extend(sweep_fields(&r.row));
            v
        }),
    )
}

pub fn rates_csv(
    kind: &str,
    scheme: TimeScheme,
    degree: usize,
    rows: &[MmsRow],
) -> Result<OutputFile> {
    table(
        "rates.csv",
        &[
            "study",
            "scheme",
            "space_degree",
            "refinement",
            "h",
            "tau",
            "error_p",
            "error_q",
            "error_u",
            "order_p",
            "order_q",
            "order_u",
        ],
        rows.iter().map(|r| {
            let mut v = vec![
                kind.to_string(),
                scheme.to_string(),
                degree.to_string(),
                r.refinement.to_string(),
                num(r.h),
                num(r.tau),
            ];
            v.extend(r.errors.iter().map(|&e| num(e)));
            match r.orders {
                Some(o) => v.extend(o.iter().map(|&e| num(e))),
                None => v.extend(std::iter::repeat_n(String::new(), 3)),
            }
            v
        }),
    )
}
