use super::config::SimulationConfig;
use super::run::{run, RunOutput};
use crate::error::{Error, Result};
use crate::solver::{relative_energy_errors, Energies, RelativeError};
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

/// Per-step relative energy errors of one run against the reference run.
#[derive(Clone, Debug)]
pub struct ComparedRun {
    pub label: String,
    pub output: RunOutput,
    pub eps_i: Vec<RelativeError>,
    pub eps_t: Vec<RelativeError>,
}

pub const COMPARISON_HEADER: &str =
    "mode,step,t,n_dofs,eps_total,E_i,E_T,eps_i,eps_T,eps_absolute,wall_ms,marked_r,marked_c,reactivated";

fn check_compatible(a: &SimulationConfig, b: &SimulationConfig) -> Result<()> {
    if a.dt != b.dt || a.n_steps != b.n_steps {
        return Err(Error::Config("compared configs must share dt and the number of steps".into()));
    }
    if a.material != b.material || a.source != b.source || a.side_length != b.side_length {
        return Err(Error::Config("compared configs must share material, source, path and geometry".into()));
    }
    Ok(())
}

/// Runs every config and computes relative energy errors against
/// `configs[reference]`. Energies are evaluated on each run's own space;
/// nested spaces give the same values on any common refinement.
pub fn run_comparison(
    configs: &[(String, SimulationConfig)],
    reference: usize,
    out: Option<&Path>,
) -> Result<Vec<ComparedRun>> {
    let (_, ref_cfg) =
        configs.get(reference).ok_or_else(|| Error::Config(format!("reference index {reference} out of range")))?;
    for (_, cfg) in configs {
        check_compatible(ref_cfg, cfg)?;
    }
    let mut outputs = Vec::with_capacity(configs.len());
    for (label, cfg) in configs {
        log::info!("running {label} ({})", cfg.mode);
        let dir = out.map(|d| d.join(label));
        outputs.push(run(cfg, dir.as_deref())?);
    }
    let reference_energies: Vec<Energies> =
        outputs[reference].records.iter().map(|r| Energies { internal: r.e_i, total: r.e_t }).collect();
    let runs: Vec<ComparedRun> = configs
        .iter()
        .zip(outputs)
        .map(|((label, _), output)| {
            let (eps_i, eps_t) = output
                .records
                .iter()
                .zip(&reference_energies)
                .map(|(r, e)| relative_energy_errors(Energies { internal: r.e_i, total: r.e_t }, *e))
                .unzip();
            ComparedRun { label: label.clone(), output, eps_i, eps_t }
        })
        .collect();
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        write_comparison(&runs, BufWriter::new(File::create(dir.join("comparison.csv"))?))?;
    }
    Ok(runs)
}

pub fn write_comparison<W: Write>(runs: &[ComparedRun], mut w: W) -> Result<()> {
    writeln!(w, "{COMPARISON_HEADER}")?;
    for run in runs {
        for ((r, ei), et) in run.output.records.iter().zip(&run.eps_i).zip(&run.eps_t) {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{:.3},{},{},{}",
                run.label,
                r.step,
                r.t,
                r.n_dofs,
                r.eps_total,
                r.e_i,
                r.e_t,
                ei.value,
                et.value,
                u8::from(ei.absolute || et.absolute),
                r.wall_ms,
                r.marked_r,
                r.marked_c,
                r.reactivated
            )?;
        }
    }
    w.flush()?;
    Ok(())
}
