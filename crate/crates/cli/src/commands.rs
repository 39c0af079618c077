use std::fmt::Write;
use std::path::{Path, PathBuf};

use nicrn::dynamics::{class_drift, integrate, lyapunov_trace, IntegratorOptions, Termination, Trajectory};
use nicrn::equilibrium::{
    availability_gradient, equilibrium_in_class, reference_equilibrium, wegscheider_check,
    ReferenceEquilibrium,
};
use nicrn::kinetics::vector_field;
use nicrn::linalg::dense;
use nicrn::network::{build_matrices, validate_conditions, EnergyMode};
use nicrn::thermo::State;
use nicrn::{Network, NetworkMatrices};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Command, ConfigError, RunConfig};
use crate::format::{float_rows, fmt_num, fmt_vec, int_matrix, trajectory_csv};
use crate::{Format, Outcome, EXIT_CONFIG, EXIT_OK, EXIT_SEMANTIC};

pub fn execute(cfg: &RunConfig) -> Outcome {
    let result = match &cfg.command {
        Command::Validate => validate(cfg),
        Command::Matrices => matrices(cfg),
        Command::Balance => balance(cfg),
        Command::Equilibrium => equilibrium(cfg),
        Command::Simulate { .. } => simulate(cfg),
    };
    result.unwrap_or_else(|e| Outcome::error(EXIT_CONFIG, e))
}

fn json_text(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn render(cfg: &RunConfig, code: i32, value: Value, text: impl FnOnce() -> String) -> Outcome {
    let stdout = match cfg.format {
        Format::Json => json_text(&value),
        Format::Text => text(),
    };
    Outcome {
        code,
        stdout,
        stderr: String::new(),
    }
}

/// Loads a network whose conditions hold; a failing condition ends the run
/// with the semantic exit code.
fn strict_network(cfg: &RunConfig) -> Result<Result<Network, Outcome>, ConfigError> {
    Ok(cfg.load_network()?.map_err(|e| Outcome::error(EXIT_SEMANTIC, e)))
}

fn validate(cfg: &RunConfig) -> Result<Outcome, ConfigError> {
    let spec = cfg.load_document()?;
    let report = validate_conditions(&spec);
    let code = if report.all_passed() { EXIT_OK } else { EXIT_SEMANTIC };
    let mut value = serde_json::to_value(&report).expect("serializable");
    value["all_passed"] = json!(report.all_passed());
    Ok(render(cfg, code, value, || {
        let mut out = String::new();
        for c in &report.conditions {
            let _ = writeln!(
                out,
                "Condition {} {}  {}: {}",
                c.condition,
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            );
        }
        if report.unpaired.is_empty() {
            let _ = writeln!(out, "unpaired reactions: none");
        } else {
            let list: Vec<String> = report.unpaired.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "unpaired reactions: {}", list.join(", "));
        }
        out
    }))
}

fn matrices(cfg: &RunConfig) -> Result<Outcome, ConfigError> {
    let spec = cfg.load_document()?;
    let m = build_matrices(&spec);
    let value = m.to_json(&spec);
    Ok(render(cfg, EXIT_OK, value, || {
        let mut out = String::new();
        let names: Vec<&str> = spec.species().iter().map(|s| s.name.as_str()).collect();
        let complexes: Vec<String> = spec.complexes.iter().map(|c| c.render(spec.species())).collect();
        let _ = writeln!(out, "species: {}", names.join(", "));
        let _ = writeln!(out, "complexes: {}", complexes.join(", "));
        let _ = writeln!(out, "pairs: {:?}", m.pairs);
        int_matrix(&mut out, "Y", &m.y);
        int_matrix(&mut out, "D", &m.d);
        int_matrix(&mut out, "B", &m.b);
        int_matrix(&mut out, "Gamma", &m.gamma);
        let _ = writeln!(out, "Gamma~ form: {:?}", m.form);
        float_rows(&mut out, "Gamma~ (rows U, N)", &m.gamma_tilde.to_rows());
        match &m.ker_exact {
            Some(k) => int_matrix(&mut out, "ker Gamma~^T (rows)", k),
            None => float_rows(&mut out, "ker Gamma~^T (rows)", &m.ker_basis),
        }
        float_rows(&mut out, "Im Gamma~ (rows)", &m.im_basis);
        int_matrix(&mut out, "ker Gamma (rows)", &m.ker_gamma);
        out
    }))
}

fn reference_json(r: &ReferenceEquilibrium<f64>) -> Value {
    json!({
        "T_star": r.t_star,
        "U_star": r.state.energy,
        "N_star": r.state.amounts,
        "mu_star": r.mu_star,
    })
}

fn balance(cfg: &RunConfig) -> Result<Outcome, ConfigError> {
    let spec = match strict_network(cfg)? {
        Ok(s) => s,
        Err(o) => return Ok(o),
    };
    let mats = build_matrices(&spec);
    let weg = match wegscheider_check(&spec, &mats) {
        Ok(w) => w,
        Err(e) => return Ok(Outcome::error(EXIT_SEMANTIC, e)),
    };
    let reference = if weg.holds {
        reference_equilibrium(&spec, &mats)
    } else {
        Err(nicrn::Error::NoDetailedBalance {
            residual: weg.worst_residual,
        })
    };
    let code = if reference.is_ok() { EXIT_OK } else { EXIT_SEMANTIC };
    let value = json!({
        "wegscheider": weg,
        "reference": reference.as_ref().ok().map(reference_json),
        "error": reference.as_ref().err().map(ToString::to_string),
    });
    Ok(render(cfg, code, value, || {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "Wegscheider: {} (worst residual {} over {} kernel vectors)",
            if weg.holds { "holds" } else { "fails" },
            fmt_num(weg.worst_residual),
            weg.basis.len()
        );
        match &reference {
            Ok(r) => {
                let _ = writeln!(out, "T* = {}", fmt_num(r.t_star));
                let _ = writeln!(out, "U* = {}", fmt_num(r.state.energy));
                let _ = writeln!(out, "N* = {}", fmt_vec(&r.state.amounts));
                let _ = writeln!(out, "mu* = {}", fmt_vec(&r.mu_star));
            }
            Err(e) => {
                let _ = writeln!(out, "no reference equilibrium: {e}");
            }
        }
        out
    }))
}

fn equilibrium(cfg: &RunConfig) -> Result<Outcome, ConfigError> {
    let spec = match strict_network(cfg)? {
        Ok(s) => s,
        Err(o) => return Ok(o),
    };
    let origin = cfg.initial_state(&spec)?;
    let mats = build_matrices(&spec);
    let result = reference_equilibrium(&spec, &mats)
        .and_then(|r| equilibrium_in_class(&spec, &mats, &r, &origin).map(|e| (r, e)));
    let (reference, eq) = match result {
        Ok(x) => x,
        Err(e) => return Ok(Outcome::error(EXIT_SEMANTIC, e)),
    };
    let (du, dn) = vector_field(&spec, &eq.state).map_err(ConfigError::from)?;
    let field = dn.iter().fold(du.abs(), |m, x| m.max(x.abs()));
    let grad = availability_gradient(&spec, &reference, &eq.state).map_err(ConfigError::from)?;
    let projection = dense::orthonormalize(&mats.im_basis)
        .iter()
        .map(|b| b.iter().zip(&grad).map(|(x, y)| x * y).sum::<f64>().powi(2))
        .sum::<f64>()
        .sqrt();
    let max_rate = eq.rate_residuals.iter().copied().fold(0.0, f64::max);
    let max_energy = eq.energy_residuals.iter().copied().fold(0.0, f64::max);
    let value = json!({
        "U": eq.state.energy,
        "N": eq.state.amounts,
        "T": eq.temperature,
        "beta": eq.dual.beta,
        "gamma": eq.dual.gamma,
        "iterations": eq.iterations,
        "gradient_norm": eq.gradient_norm,
        "L_A": eq.value,
        "rate_residuals": eq.rate_residuals,
        "energy_residuals": eq.energy_residuals,
        "vector_field_norm": field,
        "availability_gradient_projection": projection,
        "reference": reference_json(&reference),
    });
    Ok(render(cfg, EXIT_OK, value, || {
        let mut out = String::new();
        let _ = writeln!(out, "U = {}", fmt_num(eq.state.energy));
        let _ = writeln!(out, "N = {}", fmt_vec(&eq.state.amounts));
        let _ = writeln!(out, "T = {}", fmt_num(eq.temperature));
        let _ = writeln!(out, "Newton iterations: {}", eq.iterations);
        let _ = writeln!(out, "projected gradient: {}", fmt_num(eq.gradient_norm));
        let _ = writeln!(out, "max pair rate residual: {}", fmt_num(max_rate));
        let _ = writeln!(out, "max pair energy residual: {}", fmt_num(max_energy));
        let _ = writeln!(out, "|f|_inf: {}", fmt_num(field));
        out
    }))
}

/// `N_i` scaled by a factor in `[1/2, 2]`; `T` by one in `[e^-1/2, e^1/2]`
/// unless the run is pinned to the bath surface.
fn perturb(spec: &Network, x0: &State<f64>, rng: &mut ChaCha8Rng) -> State<f64> {
    let ln2 = std::f64::consts::LN_2;
    let n: Vec<f64> = x0.amounts.iter().map(|&v| v * rng.gen_range(-ln2..ln2).exp()).collect();
    let t = match spec.energy_mode {
        EnergyMode::Isothermal => spec.bath_temperature(),
        EnergyMode::Isolated => {
            let t0 = spec.thermo.temperature_of(x0).expect("checked initial state");
            t0 * rng.gen_range(-0.5f64..0.5).exp()
        }
    };
    State::new(spec.thermo.internal_energy(t, &n), n)
}

fn csv_path(out: &Path, run: usize, sweep: bool) -> PathBuf {
    if !sweep {
        return out.to_path_buf();
    }
    let stem = out.file_stem().map_or_else(|| "traj".into(), |s| s.to_string_lossy().into_owned());
    let name = match out.extension() {
        Some(ext) => format!("{stem}_{run}.{}", ext.to_string_lossy()),
        None => format!("{stem}_{run}"),
    };
    out.with_file_name(name)
}

struct Run {
    traj: Trajectory<f64>,
    summary: Value,
    healthy: bool,
}

fn simulate_one(
    spec: &Network,
    mats: &NetworkMatrices,
    reference: Option<&ReferenceEquilibrium<f64>>,
    x0: &State<f64>,
    opts: &IntegratorOptions<f64>,
) -> Result<Run, nicrn::Error> {
    let mut traj = integrate(spec, x0, opts)?;
    let drift = class_drift(mats, &traj);
    let lyap = match reference {
        Some(r) => {
            traj.attach_reference(spec, r)?;
            Some(lyapunov_trace(spec, mats, r, &traj)?)
        }
        None => None,
    };
    let last = traj.last().clone();
    let finished = matches!(traj.termination, Termination::Finished | Termination::AtRest);
    let healthy = finished && lyap.as_ref().is_none_or(|l| l.monotone && l.dissipative);
    let summary = json!({
        "initial": { "U": x0.energy, "N": x0.amounts },
        "termination": traj.termination,
        "accepted_steps": traj.accepted,
        "rejected_steps": traj.rejected,
        "samples": traj.len(),
        "t_final": traj.times.last(),
        "terminal": { "U": last.energy, "N": last.amounts, "T": traj.temperatures.last() },
        "class_drift": drift,
        "lyapunov": lyap.as_ref().map(|l| json!({
            "monotone": l.monotone,
            "dissipative": l.dissipative,
            "worst_increase": l.worst_increase,
            "worst_rate": l.worst_rate,
            "S_A_initial": l.availability.first(),
            "S_A_final": l.availability.last(),
        })),
    });
    Ok(Run { traj, summary, healthy })
}

fn simulate(cfg: &RunConfig) -> Result<Outcome, ConfigError> {
    let Command::Simulate {
        t_end,
        rtol,
        atol,
        out,
        sweep,
        seed,
    } = &cfg.command
    else {
        unreachable!("dispatched on the command")
    };
    let spec = match strict_network(cfg)? {
        Ok(s) => s,
        Err(o) => return Ok(o),
    };
    let x0 = cfg.initial_state(&spec)?;
    let mats = build_matrices(&spec);
    let reference = reference_equilibrium(&spec, &mats).ok();
    let opts = IntegratorOptions::new(*t_end).tolerances(*rtol, *atol);

    let mut rng = ChaCha8Rng::seed_from_u64(*seed);
    let mut starts = vec![x0.clone()];
    starts.extend((0..*sweep).map(|_| perturb(&spec, &x0, &mut rng)));
    let runs: Vec<Result<Run, nicrn::Error>> = starts
        .par_iter()
        .map(|x| simulate_one(&spec, &mats, reference.as_ref(), x, &opts))
        .collect();

    let mut summaries = Vec::with_capacity(runs.len());
    let mut code = EXIT_OK;
    for (i, run) in runs.iter().enumerate() {
        match run {
            Ok(r) => {
                let mut s = r.summary.clone();
                s["run"] = json!(i);
                if let Some(path) = out {
                    let p = csv_path(path, i, *sweep > 0);
                    std::fs::write(&p, trajectory_csv(&spec, &r.traj))
                        .map_err(|e| ConfigError(format!("{}: {e}", p.display())))?;
                    s["csv"] = json!(p.display().to_string());
                }
                if !r.healthy {
                    code = EXIT_SEMANTIC;
                }
                summaries.push(s);
            }
            Err(e) => {
                code = EXIT_SEMANTIC;
                summaries.push(json!({ "run": i, "error": e.to_string() }));
            }
        }
    }
    let value = json!({
        "reference": reference.as_ref().map(reference_json),
        "runs": summaries,
    });
    Ok(render(cfg, code, value.clone(), || {
        let mut text = String::new();
        for s in &summaries {
            if let Some(err) = s.get("error") {
                let _ = writeln!(text, "run {}: error {}", s["run"], err);
                continue;
            }
            let num = |v: &Value| v.as_f64().map_or_else(|| "-".into(), fmt_num);
            let _ = writeln!(
                text,
                "run {}: {} after {} steps, t = {}, T = {}, drift = {}",
                s["run"],
                s["termination"].as_str().unwrap_or("?"),
                s["accepted_steps"],
                num(&s["t_final"]),
                num(&s["terminal"]["T"]),
                num(&s["class_drift"])
            );
            let n: Vec<f64> = s["terminal"]["N"]
                .as_array()
                .map(|a| a.iter().filter_map(Value::as_f64).collect())
                .unwrap_or_default();
            let _ = writeln!(text, "  U = {}, N = {}", num(&s["terminal"]["U"]), fmt_vec(&n));
            match s["lyapunov"].as_object() {
                Some(l) => {
                    let _ = writeln!(
                        text,
                        "  S_A: {} -> {}, monotone = {}, dissipative = {}",
                        num(&l["S_A_initial"]),
                        num(&l["S_A_final"]),
                        l["monotone"],
                        l["dissipative"]
                    );
                }
                None => {
                    let _ = writeln!(text, "  S_A: no detailed balanced reference");
                }
            }
            if let Some(p) = s["csv"].as_str() {
                let _ = writeln!(text, "  trajectory: {p}");
            }
        }
        text
    }))
}
