//! Experiment runner behind the `spinguide` binary.
//!
//! One invocation runs one experiment from a TOML config and writes its CSV
//! artifacts plus a `manifest.json` into the output directory.

pub mod config;
pub mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use serde_json::{json, Value};
use spinguide::materials::{
    gap_phase_diagram, hydrogenic_j, hydrogenic_j_rydberg, reference_materials, speed_table, GapPoint, SpeedTableRow,
};
use spinguide::parallel::{with_jobs, Execution};
use spinguide::spectral::{gap_and_r_sweep, SWEEP_EIGENVALUES};
use spinguide::disorder::{SigmaGsRow, ThresholdReport};
use spinguide::dynamics::{run_transport, speed_phase_diagram};
use thiserror::Error;

pub use config::{parse_config, Experiment, Format, Overrides, Plan, RunConfig};
use output::{Artifact, Cell, Manifest, OutputEntry, Table};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SPINGUIDE_OUT";
pub const DEFAULT_OUT_DIR: &str = "spinguide-out";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),
    #[error("{0}")]
    Run(#[from] spinguide::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(match self {
            CliError::Validation(_) => 2,
            CliError::Run(e) if e.is_numerical() => 3,
            CliError::Run(_) => 2,
            CliError::Io { .. } => 1,
        })
    }
}

/// What a finished run left behind.
#[derive(Debug)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub manifest: PathBuf,
}

/// Read, validate and run `config_path`, writing into `out_dir`.
pub fn run_file(
    experiment: Experiment,
    config_path: &Path,
    out_dir: &Path,
    overrides: Overrides,
) -> Result<RunOutcome, CliError> {
    let text = std::fs::read_to_string(config_path).map_err(|source| CliError::Io {
        path: config_path.to_path_buf(),
        source,
    })?;
    let config = parse_config(experiment, &text, overrides).map_err(CliError::Validation)?;
    run(&config, &config_path.display().to_string(), out_dir)
}

pub fn run(config: &RunConfig, config_file: &str, out_dir: &Path) -> Result<RunOutcome, CliError> {
    let started = Instant::now();
    let exec = if config.jobs > 1 {
        Execution::Parallel
    } else {
        Execution::Sequential
    };
    log::info!("{} with {} worker(s)", config.experiment, config.jobs);
    let artifacts = with_jobs(Some(config.jobs), || execute(config, exec))?;
    let files = output::write_artifacts(out_dir, &artifacts).map_err(|source| CliError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;

    let manifest = Manifest {
        experiment: config.experiment.name().into(),
        spinguide_version: spinguide::VERSION.into(),
        cli_version: env!("CARGO_PKG_VERSION").into(),
        seed: config.seed,
        jobs: config.jobs,
        config_file: config_file.into(),
        params: config.params.clone().into_iter().collect(),
        outputs: artifacts
            .iter()
            .map(|a| OutputEntry {
                file: a.name.clone(),
                sha256: a.sha256(),
                bytes: a.contents.len(),
            })
            .collect(),
        wall_time_s: started.elapsed().as_secs_f64(),
    };
    let manifest_path = out_dir.join("manifest.json");
    let body = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    std::fs::write(&manifest_path, body + "\n").map_err(|source| CliError::Io {
        path: manifest_path.clone(),
        source,
    })?;
    Ok(RunOutcome {
        out_dir: out_dir.to_path_buf(),
        files,
        manifest: manifest_path,
    })
}

/// '#' lines heading every CSV: deterministic, so no timings here.
fn metadata(config: &RunConfig) -> Vec<String> {
    let mut lines = vec![
        format!("spinguide {} {}", spinguide::VERSION, config.experiment),
        format!("seed = {}", config.seed),
    ];
    lines.extend(config.params.iter().filter(|(k, _)| *k != "seed").map(|(k, v)| format!("{k} = {v}")));
    lines
}

/// CSV artifact, plus an aligned-text copy when the format asks for it.
fn emit(config: &RunConfig, out: &mut Vec<Artifact>, stem: &str, table: &Table, headings: Option<&[&str]>) {
    out.push(Artifact::new(format!("{stem}.csv"), table.to_csv(&metadata(config))));
    if config.format == Format::Table {
        out.push(Artifact::new(format!("{stem}.txt"), table.to_text(headings)));
    }
}

fn json_artifact(name: &str, value: &Value) -> Artifact {
    let body = serde_json::to_string_pretty(value).expect("summary serializes");
    Artifact::new(name, body + "\n")
}

fn execute(config: &RunConfig, exec: Execution) -> spinguide::Result<Vec<Artifact>> {
    let mut out = Vec::new();
    match &config.plan {
        Plan::SpectrumSweep {
            chain,
            kind,
            smoothing,
            widths,
            depths,
        } => {
            let rows = gap_and_r_sweep(chain, *kind, *smoothing, widths, depths, exec)?;
            let mut header: Vec<String> = spinguide::spectral::SweepRow::CSV_HEADER.split(',').map(String::from).collect();
            header.extend((0..SWEEP_EIGENVALUES).map(|i| format!("e{i}")));
            let mut table = Table::new(header);
            for r in rows {
                let mut row: Vec<Cell> = vec![
                    r.kind.label().into(),
                    r.width.into(),
                    r.depth.into(),
                    r.gap.into(),
                    r.bound_count.into(),
                    r.reduced_adiabaticity.into(),
                ];
                row.extend((0..SWEEP_EIGENVALUES).map(|i| r.eigenvalues.get(i).map_or(Cell::Empty, |&e| e.into())));
                table.push(row);
            }
            emit(config, &mut out, "spectrum_sweep", &table, None);
        }
        Plan::Transport(tc) => {
            let m = run_transport(tc)?;
            let mut table = Table::with_csv_header(spinguide::TransportMetrics::CSV_HEADER);
            for i in 0..m.times.len() {
                table.push(vec![
                    m.times[i].into(),
                    m.fidelity[i].into(),
                    m.confinement[i].into(),
                    m.position[i].into(),
                    m.energy[i].into(),
                ]);
            }
            emit(config, &mut out, "transport", &table, None);
            let summary = json!({
                "experiment": config.experiment.name(),
                "seed": config.seed,
                "params": config.params,
                "regime": m.regime.to_string(),
                "final_fidelity": m.final_fidelity(),
                "final_confinement": m.final_confinement(),
                "min_fidelity": m.min_fidelity(),
                "min_confinement": m.min_confinement(),
                "max_displacement": m.max_displacement(),
                "max_norm_drift": m.max_norm_drift,
                "steps": m.steps,
                "samples": m.times.len(),
            });
            out.push(json_artifact("transport_summary.json", &summary));
        }
        Plan::PhaseDiagram {
            spec,
            speed_mismatches,
            offsets,
        } => {
            let points = speed_phase_diagram(spec, speed_mismatches, offsets, exec)?;
            let mut table = Table::with_csv_header(spinguide::dynamics::PhasePoint::CSV_HEADER);
            let mut orbits = Table::with_csv_header("dv,offset,sample,displacement,velocity");
            for p in &points {
                table.push(vec![
                    p.speed_mismatch.into(),
                    p.offset.into(),
                    p.regime.to_string().into(),
                    p.final_fidelity.into(),
                    p.final_confinement.into(),
                    p.min_confinement.into(),
                    p.max_displacement.into(),
                ]);
                for (i, &(x, v)) in p.orbit.iter().enumerate() {
                    orbits.push(vec![p.speed_mismatch.into(), p.offset.into(), i.into(), x.into(), v.into()]);
                }
            }
            emit(config, &mut out, "phase_diagram", &table, None);
            emit(config, &mut out, "phase_orbits", &orbits, None);
        }
        Plan::DisorderSweep(sweep) => {
            let rows = sweep.run(exec)?;
            let mut table = Table::with_csv_header(SigmaGsRow::CSV_HEADER);
            for r in rows {
                table.push(vec![
                    r.kind.label().into(),
                    r.width.into(),
                    r.depth.into(),
                    r.sigma.into(),
                    r.seed.into(),
                    r.sigma_gs.into(),
                ]);
            }
            emit(config, &mut out, "sigma_gs", &table, None);
        }
        Plan::ThresholdSearch(search) => {
            let r = search.run(exec)?;
            let mut table = Table::with_csv_header(ThresholdReport::CSV_HEADER);
            table.push(vec![
                r.kind.label().into(),
                r.width.into(),
                r.depth.into(),
                r.sigma.into(),
                r.a_threshold.into(),
                r.bracket_lo.into(),
                r.bracket_hi.into(),
                r.n_realizations.into(),
            ]);
            emit(config, &mut out, "threshold", &table, None);
            let summary = json!({
                "experiment": config.experiment.name(),
                "seed": config.seed,
                "params": config.params,
                "report": r,
            });
            out.push(json_artifact("threshold_summary.json", &summary));
        }
        Plan::Materials { system, separations_nm } => {
            let rows = speed_table(&reference_materials())?;
            let mut table = Table::with_csv_header(SpeedTableRow::CSV_HEADER);
            for r in rows {
                table.push(vec![
                    r.name.into(),
                    r.coupling_kind.to_string().into(),
                    r.coupling_mev.into(),
                    r.spacing_angstrom.into(),
                    r.listed_m_per_s.into(),
                    r.listed_sites_per_s.into(),
                    r.listed_product_m_per_s.into(),
                    r.listed_consistent.into(),
                    r.computed.sites_per_s.into(),
                    r.computed.m_per_s.into(),
                ]);
            }
            let headings = [
                "system",
                "coupling",
                "J [meV]",
                "a [Å]",
                "listed v [m/s]",
                "listed v [sites/s]",
                "listed a·v [m/s]",
                "consistent",
                "2Ja/ħ [sites/s]",
                "2Ja/ħ [m/s]",
            ];
            out.push(Artifact::new("materials.csv", table.to_csv(&metadata(config))));
            out.push(Artifact::new("materials.txt", table.to_text(Some(&headings))));

            let mut coupling = Table::with_csv_header("r_nm,r_aB,J_Ry,J_meV");
            for &r in separations_nm {
                let x = r / system.bohr_radius_nm;
                coupling.push(vec![
                    r.into(),
                    x.into(),
                    hydrogenic_j_rydberg(x).into(),
                    hydrogenic_j(r, system)?.into(),
                ]);
            }
            let headings = ["r [nm]", "r [a_B]", "J [Ry*]", "J [meV]"];
            out.push(Artifact::new("hydrogenic_coupling.csv", coupling.to_csv(&metadata(config))));
            out.push(Artifact::new("hydrogenic_coupling.txt", coupling.to_text(Some(&headings))));
        }
        Plan::HydrogenicMap {
            kinds,
            separations,
            widths,
            depth_ry,
            system,
        } => {
            let mut table = Table::with_csv_header(GapPoint::CSV_HEADER);
            for &kind in kinds {
                for p in gap_phase_diagram(kind, separations, widths, *depth_ry, exec)? {
                    table.push(vec![
                        p.kind.label().into(),
                        p.separation.into(),
                        p.width.into(),
                        p.coupling.into(),
                        p.depth.into(),
                        p.gap.into(),
                        p.gap_mev(system).into(),
                    ]);
                }
            }
            let headings = ["kind", "r [a_B]", "w [a_B]", "J [Ry*]", "B0 [Ry*]", "gap [Ry*]", "gap [meV]"];
            emit(config, &mut out, "gap_map", &table, Some(&headings));
        }
    }
    Ok(out)
}
