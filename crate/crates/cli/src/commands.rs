use std::io::Write;

use serde::Serialize;
use serde_json::json;
use wgqed_core::experiments::{
    self, BareParams, ConvergenceSpec, DecayFit, Error, FrequencyWindow, PhysicalParams,
    PropagateOptions, Provenance, SimulationConfig, SweepSpec, SweepTable,
};
use wgqed_core::renorm;

use crate::config::RunConfigFile;
use crate::output::Artifacts;
use crate::{CliError, GlobalArgs, RenormArgs};

fn load(global: &GlobalArgs) -> Result<RunConfigFile, CliError> {
    match &global.config {
        Some(path) => RunConfigFile::load(path),
        None => Err(CliError::Input("this command needs --config <path>".into())),
    }
}

#[derive(Serialize)]
struct Summary<'a, T: Serialize> {
    command: &'a str,
    status: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    diagnostics: Option<serde_json::Value>,
    config: &'a RunConfigFile,
    record_every: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    provenance: Option<Provenance>,
    result: T,
}

/// Writes a summary with the abort diagnostics, then reports exit code 3.
fn abort(
    global: &GlobalArgs,
    command: &str,
    cfg: &RunConfigFile,
    provenance: Option<Provenance>,
    step: usize,
    norm: f64,
) -> CliError {
    let summary = Summary {
        command,
        status: "numerical_abort",
        diagnostics: Some(json!({ "step": step, "norm": norm })),
        config: cfg,
        record_every: global.record_every,
        provenance,
        result: serde_json::Value::Null,
    };
    let written = Artifacts::new(&global.out).and_then(|mut a| {
        a.add_json("summary.json", &summary)?;
        a.commit()
    });
    if let Err(e) = written {
        log::error!("could not write abort summary: {e}");
    }
    CliError::Numerical(format!("non-finite state at step {step} (norm = {norm})"))
}

const RENORM_HEADER: &str = "omega_0,gamma,lambda_ir,lambda_uv,omega_A,Gamma,f,H,valid";

fn renorm_row(
    bare: &BareParams,
    window: &FrequencyWindow,
) -> Result<(String, Option<Error>), CliError> {
    let h = renorm::harmonic_mean(
        bare.omega_0 - window.lambda_ir(),
        window.lambda_uv() - bare.omega_0,
    )?;
    let prefix = format!(
        "{},{},{},{}",
        bare.omega_0,
        bare.gamma,
        window.lambda_ir(),
        window.lambda_uv()
    );
    match renorm::renormalize(bare, window) {
        Ok(r) => Ok((
            format!(
                "{prefix},{},{},{},{h},true",
                r.physical.omega_a, r.physical.gamma_phys, r.f_factor
            ),
            None,
        )),
        Err(e @ Error::InvalidRegion { .. }) => {
            Ok((format!("{prefix},NaN,NaN,NaN,{h},false"), Some(e)))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn renorm(global: &GlobalArgs, args: &RenormArgs) -> Result<(), CliError> {
    let (bare, window) = if let Some(omega_a) = args.omega_a {
        let (Some(gamma_phys), Some(half_width)) = (args.gamma_phys, args.half_width) else {
            return Err(CliError::Input(
                "inverse mode needs --omega-a, --gamma-phys and --half-width".into(),
            ));
        };
        renorm::bare_from_physical(&PhysicalParams::new(omega_a, gamma_phys)?, half_width)?
    } else {
        match (args.omega0, args.gamma, args.lambda_ir, args.lambda_uv) {
            (Some(w0), Some(g), Some(ir), Some(uv)) => {
                (BareParams::new(w0, g)?, FrequencyWindow::new(ir, uv)?)
            }
            (None, None, None, None) if global.config.is_some() => {
                let model = load(global)?.model()?;
                (model.bare(), model.window())
            }
            _ => {
                return Err(CliError::Input(
                    "forward mode needs --omega0, --gamma, --lambda-ir and --lambda-uv".into(),
                ))
            }
        }
    };
    let (row, invalid) = renorm_row(&bare, &window)?;
    println!("{RENORM_HEADER}");
    println!("{row}");
    match invalid {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

pub fn scatter(global: &GlobalArgs) -> Result<(), CliError> {
    let cfg = load(global)?;
    let model = cfg.model()?;
    let packet = cfg.packet()?;
    let time = cfg.time()?;
    let tgrid = time.grid()?;
    let provenance = Provenance::of(&model)?;
    let mut artifacts = Artifacts::new(&global.out)?;

    let options = PropagateOptions {
        scheme: time.scheme,
        record_every: Some(global.record_every),
    };
    let record = match experiments::run_scattering_with(&model, &packet, &tgrid, &options) {
        Ok(r) => r,
        Err(Error::NonFinite { step, norm }) => {
            drop(artifacts);
            return Err(abort(global, "scatter", &cfg, Some(provenance), step, norm));
        }
        Err(e) => return Err(e.into()),
    };

    artifacts.add("trajectory.csv", |w| record.trajectory.write_csv(w))?;
    let mut state_csv = Vec::new();
    experiments::write_state_csv(&model, &record.trajectory.final_state, &mut state_csv)?;
    artifacts.add("final_state.csv", |w| w.write_all(&state_csv))?;
    artifacts.add_json(
        "summary.json",
        &Summary {
            command: "scatter",
            status: "ok",
            diagnostics: None,
            config: &cfg,
            record_every: global.record_every,
            provenance: Some(provenance),
            result: json!({
                "final_R": record.final_r,
                "final_T": record.final_t,
                "final_A": record.final_a,
                "relaxed": record.final_a <= experiments::RELAXATION_THRESHOLD,
            }),
        },
    )?;
    artifacts.commit()?;
    println!(
        "R = {} T = {} A = {} (written to {})",
        record.final_r,
        record.final_t,
        record.final_a,
        global.out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct WindowResult<'a> {
    directory: String,
    provenance: Provenance,
    table: &'a SweepTable,
}

pub fn sweep(global: &GlobalArgs) -> Result<(), CliError> {
    let cfg = load(global)?;
    let model = cfg.model()?;
    let packet = cfg.packet()?;
    let time = cfg.time()?;
    let block = cfg.sweep()?;

    let configs: Vec<(String, SimulationConfig)> = if block.windows.is_empty() {
        vec![(String::new(), model)]
    } else {
        block
            .windows
            .iter()
            .enumerate()
            .map(|(i, &[ir, uv])| {
                Ok((
                    format!("window_{i}"),
                    model.with_window(FrequencyWindow::new(ir, uv)?)?,
                ))
            })
            .collect::<Result<_, Error>>()?
    };
    let mut specs = Vec::with_capacity(configs.len());
    for (dir, config) in &configs {
        let mut spec = SweepSpec::new(
            block.variable,
            block.values.clone(),
            *config,
            packet,
            time.grid()?,
        )?;
        spec.options.scheme = time.scheme;
        specs.push((dir.clone(), Provenance::of(config)?, spec));
    }
    let mut artifacts = Artifacts::new(&global.out)?;

    let tables: Vec<SweepTable> = specs
        .iter()
        .map(|(_, _, spec)| experiments::sweep(spec))
        .collect();
    let mut windows = Vec::with_capacity(tables.len());
    for ((dir, provenance, _), table) in specs.iter().zip(&tables) {
        let path = if dir.is_empty() {
            "sweep.csv".to_string()
        } else {
            format!("{dir}/sweep.csv")
        };
        artifacts.add(&path, |w| table.write_csv(w))?;
        windows.push(WindowResult {
            directory: dir.clone(),
            provenance: *provenance,
            table,
        });
    }
    let diverged = tables.iter().any(SweepTable::any_diverged);
    artifacts.add_json(
        "summary.json",
        &Summary {
            command: "sweep",
            status: if diverged { "numerical_abort" } else { "ok" },
            diagnostics: None,
            config: &cfg,
            record_every: global.record_every,
            provenance: None,
            result: &windows,
        },
    )?;
    artifacts.commit()?;

    let failed: usize = tables.iter().map(|t| t.failures().count()).sum();
    println!(
        "{} table(s), {} row(s), {failed} failed (written to {})",
        tables.len(),
        block.values.len() * tables.len(),
        global.out.display()
    );
    if diverged {
        let msg = tables
            .iter()
            .flat_map(|t| &t.rows)
            .find(|r| r.diverged)
            .map(|r| {
                format!(
                    "sweep value {}: {}",
                    r.value,
                    r.error.as_deref().unwrap_or("diverged")
                )
            })
            .unwrap_or_default();
        return Err(CliError::Numerical(msg));
    }
    Ok(())
}

pub fn decay(global: &GlobalArgs) -> Result<(), CliError> {
    let cfg = load(global)?;
    let model = cfg.model()?;
    let tgrid = cfg.time()?.grid()?;
    let fit_window = cfg.decay.and_then(|d| d.fit_window).map(|[a, b]| (a, b));
    let provenance = Provenance::of(&model)?;
    let mut artifacts = Artifacts::new(&global.out)?;

    let fit: DecayFit = match experiments::decay_experiment(&model, &tgrid, fit_window) {
        Ok(f) => f,
        Err(Error::NonFinite { step, norm }) => {
            drop(artifacts);
            return Err(abort(global, "decay", &cfg, Some(provenance), step, norm));
        }
        Err(e) => return Err(e.into()),
    };
    artifacts.add_json(
        "summary.json",
        &Summary {
            command: "decay",
            status: "ok",
            diagnostics: None,
            config: &cfg,
            record_every: global.record_every,
            provenance: Some(provenance),
            result: &fit,
        },
    )?;
    artifacts.commit()?;
    println!(
        "omega_A_fit = {} Gamma_fit = {} residual = {}",
        fit.omega_a_fit, fit.gamma_fit, fit.residual
    );
    Ok(())
}

pub fn converge(global: &GlobalArgs) -> Result<(), CliError> {
    let cfg = load(global)?;
    let block = cfg.converge()?;
    let physical = PhysicalParams::new(block.omega_a, block.gamma_phys)?;
    let mut spec = ConvergenceSpec::new(
        physical,
        block.half_widths.clone(),
        block.omega_p.clone(),
        block.n_steps.clone(),
    );
    spec.length = block.length;
    spec.total_time = block.total;
    spec.delta_k = block.delta_k;
    spec.x_0 = block.x_0.unwrap_or(-block.length / 4.0);

    let bare: Vec<serde_json::Value> = block
        .half_widths
        .iter()
        .map(|&lam| {
            let (b, w) = renorm::bare_from_physical(&physical, lam)?;
            Ok(
                json!({ "half_width": lam, "omega_0": b.omega_0, "gamma": b.gamma,
                       "lambda_ir": w.lambda_ir(), "lambda_uv": w.lambda_uv() }),
            )
        })
        .collect::<Result<_, Error>>()?;
    let mut artifacts = Artifacts::new(&global.out)?;

    let table = experiments::convergence_study(&spec)?;
    artifacts.add("convergence.csv", |w| table.write_csv(w))?;
    artifacts.add_json(
        "summary.json",
        &Summary {
            command: "converge",
            status: "ok",
            diagnostics: None,
            config: &cfg,
            record_every: global.record_every,
            provenance: None,
            result: json!({
                "physical": physical,
                "bare": bare,
                "min_converged_n_steps": table.summary,
                "any_diverged": table.any_diverged(),
            }),
        },
    )?;
    artifacts.commit()?;
    for s in &table.summary {
        match s.min_converged_n_steps {
            Some(n) => println!("half_width {}: converged from n_steps = {n}", s.half_width),
            None => println!("half_width {}: not converged", s.half_width),
        }
    }
    Ok(())
}

pub fn grid_info(global: &GlobalArgs, n_excitations: u32) -> Result<(), CliError> {
    let model = load(global)?.model()?;
    let info = experiments::grid_info(&model, n_excitations)?;
    let out = json!({ "grid": info, "provenance": Provenance::of(&model)? });
    let mut stdout = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, &out).map_err(|e| CliError::Input(e.to_string()))?;
    writeln!(stdout).map_err(|e| CliError::Input(e.to_string()))?;
    Ok(())
}
