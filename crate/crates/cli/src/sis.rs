//! SIS experiments driven by a JSON run configuration.

use std::path::Path;

use clap::ValueEnum;
use laplace_sums::sis::{
    direct_generating_scaled, evolve_characteristics, hamiltonian_h, hamiltonian_theta, semiclassical_generating_fn,
    stationary_momentum_x, stationary_momentum_z, total_probability_drift, wkb_vs_master, Picture,
    SemiclassicalField, SisParams, SisRunConfig,
};
use laplace_sums::Error;
use serde_json::json;

use crate::manifest::Run;
use crate::CliError;

const DEFAULT_Z: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
const DEFAULT_LADDER: [u64; 3] = [100, 400, 1600];

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SisAction {
    Evolve,
    Generating,
    Stationary,
    Conservation,
    WkbCheck,
}

impl SisAction {
    fn name(self) -> &'static str {
        match self {
            SisAction::Evolve => "evolve",
            SisAction::Generating => "generating",
            SisAction::Stationary => "stationary",
            SisAction::Conservation => "conservation",
            SisAction::WkbCheck => "wkb-check",
        }
    }
}

pub fn run(action: SisAction, config: &Path, out: &Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(config).map_err(|e| CliError::input(format!("cannot read {}: {e}", config.display())))?;
    let cfg = SisRunConfig::from_json(&text)?;
    let inputs = serde_json::to_value(&cfg).expect("serializable");
    let mut run = Run::start(format!("sis {}", action.name()), inputs);
    let manifest = out.join(format!("sis_{}.manifest.json", action.name().replace('-', "_")));
    let result = match action {
        SisAction::Evolve => evolve(&cfg, out, &mut run),
        SisAction::Generating => generating(&cfg, out, &mut run),
        SisAction::Stationary => stationary(&cfg, out, &mut run),
        SisAction::Conservation => conservation(&cfg, out, &mut run),
        SisAction::WkbCheck => wkb_check(&cfg, out, &mut run),
    };
    match result {
        Ok(()) => run.finish(&manifest),
        Err(Error::CausticFormed { safe_time, requested, field }) => {
            run.write_csv(&out.join("field_safe.csv"), FIELD_HEADER, &field_rows(&field))?;
            run.flag_caustic(safe_time, requested);
            run.finish(&manifest)?;
            Err(Error::CausticFormed { safe_time, requested, field }.into())
        }
        Err(e) => Err(e.into()),
    }
}

type Outcome = Result<(), Error>;

const FIELD_HEADER: &[&str] = &["grid", "action", "amplitude"];

fn field_rows(f: &SemiclassicalField) -> Vec<(f64, f64, f64)> {
    (0..f.len()).map(|i| (f.grid()[i], f.action()[i], f.amplitude()[i])).collect()
}

fn io(e: CliError) -> Error {
    Error::InvalidInput(e.message)
}

fn evolve(cfg: &SisRunConfig, out: &Path, run: &mut Run) -> Outcome {
    let field0 = cfg.initial_field()?;
    run.write_csv(&out.join("field_initial.csv"), FIELD_HEADER, &field_rows(&field0)).map_err(io)?;
    let field = evolve_characteristics(&field0, cfg.t, &cfg.params()?, cfg.tol)?;
    run.write_csv(&out.join("field_final.csv"), FIELD_HEADER, &field_rows(&field)).map_err(io)
}

/// Compares on the configured `S0`, `L0`; `t` is not used. Evolved fields
/// only cover part of `[0, 1]`, outside the hypotheses of the asymptotic form.
fn generating(cfg: &SisRunConfig, out: &Path, run: &mut Run) -> Outcome {
    if cfg.picture != Picture::Probability {
        return Err(Error::InvalidInput("this subcommand needs the probability picture".into()));
    }
    let (s, l) = (&cfg.s0, &cfg.l0);
    let zs = cfg.z_values.clone().unwrap_or_else(|| DEFAULT_Z.to_vec());
    let mut rows = Vec::with_capacity(zs.len());
    for z in zs {
        let a = semiclassical_generating_fn(s, l, z)?;
        let d = direct_generating_scaled(s, l, cfg.n, z)?;
        let (m, log_scale) = a.prediction_scaled(cfg.n);
        let ratio = d.mantissa / m * (d.log_scale - log_scale).exp();
        let regime = serde_json::to_value(a.regime).expect("serializable");
        rows.push((z, a.sigma, a.lambda, regime.as_str().unwrap_or_default().to_string(), d.value(), ratio));
    }
    let header = ["z", "sigma", "lambda", "regime", "direct_gamma", "ratio"];
    run.write_csv(&out.join("generating.csv"), &header, &rows).map_err(io)
}

fn stationary(cfg: &SisRunConfig, out: &Path, run: &mut Run) -> Outcome {
    let p = cfg.params()?;
    let qx: Vec<(f64, f64)> = (0..100)
        .map(|i| {
            let x = i as f64 / 100.0;
            stationary_momentum_x(x, &p).map(|q| (x, q))
        })
        .collect::<Result<_, _>>()?;
    run.write_csv(&out.join("stationary_x.csv"), &["x", "q_star"], &qx).map_err(io)?;
    let qz: Vec<(f64, f64)> = (1..=100)
        .map(|i| {
            let z = i as f64 / 50.0;
            (z, stationary_momentum_z(z, &p))
        })
        .collect();
    run.write_csv(&out.join("stationary_z.csv"), &["z", "q_star"], &qz).map_err(io)?;
    let h = level_grid(&p, (0.0, 1.0, 50), (-2.0, 2.0, 100), hamiltonian_h);
    run.write_csv(&out.join("hamiltonian_h_grid.csv"), &["x", "q", "h"], &h).map_err(io)?;
    let th = level_grid(&p, (0.0, 2.0, 50), (-1.0, 1.0, 100), hamiltonian_theta);
    run.write_csv(&out.join("hamiltonian_theta_grid.csv"), &["z", "q", "theta"], &th).map_err(io)
}

fn level_grid(
    p: &SisParams,
    (r0, r1, nr): (f64, f64, usize),
    (q0, q1, nq): (f64, f64, usize),
    h: fn(f64, f64, &SisParams) -> f64,
) -> Vec<(f64, f64, f64)> {
    let mut rows = Vec::with_capacity((nr + 1) * (nq + 1));
    for i in 0..=nr {
        let r = r0 + (r1 - r0) * i as f64 / nr as f64;
        for j in 0..=nq {
            let q = q0 + (q1 - q0) * j as f64 / nq as f64;
            rows.push((r, q, h(r, q, p)));
        }
    }
    rows
}

fn conservation(cfg: &SisRunConfig, out: &Path, run: &mut Run) -> Outcome {
    let field0 = cfg.initial_field()?;
    let params = cfg.params()?;
    let ladder = cfg.n_ladder.clone().unwrap_or_else(|| DEFAULT_LADDER.to_vec());
    let mut rows = Vec::with_capacity(ladder.len());
    for n in ladder {
        let (a, b) = total_probability_drift(&field0, cfg.t, n, &params, cfg.tol)?;
        rows.push((n, a, b, b / a));
    }
    let header = ["n", "gamma_initial", "gamma_final", "ratio"];
    run.write_csv(&out.join("conservation.csv"), &header, &rows).map_err(io)
}

fn wkb_check(cfg: &SisRunConfig, out: &Path, run: &mut Run) -> Outcome {
    let report = wkb_vs_master(&cfg.initial_field()?, cfg.t, cfg.n, &cfg.params()?, cfg.tol)?;
    run.write_json(&out.join("wkb_report.json"), &json!(report)).map_err(io)
}
