use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use hypomix::couette::CouetteSpectrum;
use hypomix::experiments::{
    exit_status, oracle_trajectory, run_monitor, sample_times, simulate, sweep_enhanced_diffusion,
    MonitorKind, Trajectory,
};
use hypomix::functionals::self_test;
use hypomix::io::{self, unix_now, write_json, write_timeseries, RunConfig, RunManifest};
use hypomix::shear::{certify_hypothesis, Sampling};
use hypomix::{CoeffLedger, Error, Real, Result, Shear};

#[derive(Parser)]
#[command(name = "hypomix", version, about = "Passive-scalar mixing by monotone shear flows")]
struct Cli {
    /// Directory for CSV, JSON reports and manifests.
    #[arg(long, global = true, env = "HYPOMIX_OUT", default_value = "hypomix_out")]
    out_dir: PathBuf,

    /// Scalar type for simulate and verify.
    #[arg(long, global = true, value_enum, default_value_t = Precision::F64)]
    precision: Precision,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Precision {
    F32,
    F64,
}

#[derive(Subcommand)]
enum Command {
    /// One trajectory, its time series and the monitors listed in the config.
    Simulate { config: PathBuf },
    /// Couette closed-form diagnostics at the configured sample times.
    Oracle { config: PathBuf },
    /// One trajectory checked by every monitor.
    Verify { config: PathBuf },
    /// Threshold times over a viscosity grid and their power-law fit.
    Sweep { config: PathBuf },
    /// Checks hypothesis (H) for a profile on [-L, L].
    Certify {
        profile: String,
        #[arg(long = "L")]
        half_width: f64,
        /// Profile parameter, `name=value`; repeatable.
        #[arg(long = "param", value_parser = parse_param)]
        params: Vec<(String, f64)>,
    },
    /// Dumps the coefficient ledger.
    Constants {
        #[arg(long = "frakU")]
        frak_u: f64,
        #[arg(long, default_value_t = 0.0)]
        nu: f64,
        #[arg(long, default_value_t = 1)]
        k: u32,
    },
}

fn parse_param(s: &str) -> std::result::Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected name=value, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("`{v}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn print_json<S: Serialize>(v: &S) -> Result<()> {
    print!("{}", io::to_json(v)?);
    Ok(())
}

fn error_exit(kind: &str, message: String) -> ExitCode {
    eprintln!("{}", json!({ "error": kind, "message": message }));
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            return error_exit("Usage", e.to_string());
        }
    };
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => error_exit(e.kind(), e.to_string()),
    }
}

fn dispatch(cli: &Cli) -> Result<u8> {
    match &cli.command {
        Command::Simulate { config } => match cli.precision {
            Precision::F64 => run_trajectory::<f64>(&cli.out_dir, config, false),
            Precision::F32 => run_trajectory::<f32>(&cli.out_dir, config, false),
        },
        Command::Verify { config } => match cli.precision {
            Precision::F64 => run_trajectory::<f64>(&cli.out_dir, config, true),
            Precision::F32 => run_trajectory::<f32>(&cli.out_dir, config, true),
        },
        Command::Oracle { config } => run_oracle(&cli.out_dir, config),
        Command::Sweep { config } => run_sweep(&cli.out_dir, config),
        Command::Certify {
            profile,
            half_width,
            params,
        } => {
            let params: BTreeMap<String, f64> = params.iter().cloned().collect();
            let shear = Shear::<f64>::from_name(profile, &params)?;
            let cert = certify_hypothesis(&shear, *half_width, Sampling::default())?;
            print_json(&cert)?;
            Ok(0)
        }
        Command::Constants { frak_u, nu, k } => {
            let led = CoeffLedger::build(*frak_u, *nu, *k)?;
            print_json(&json!({
                "ledger": led,
                "decay_rate": led.decay_rate(),
                "regime": led.regime(),
            }))?;
            Ok(0)
        }
    }
}

/// Certificate on the run's domain and the ledger built from it.
fn constants_for<T: Real>(
    cfg: &RunConfig,
) -> Result<(hypomix::shear::HypothesisCertificate<T>, CoeffLedger<T>)> {
    let cert = certify_hypothesis(
        &cfg.shear::<T>()?,
        T::of(cfg.grid.half_width),
        Sampling::default(),
    )?;
    let led = CoeffLedger::build(cert.frak_u, cfg.nu_t(), cfg.k)?;
    Ok((cert, led))
}

/// Sandwich and balance identities on a few random states; catches a sign
/// error in the functionals before any run is trusted.
fn startup_self_test(seed: u64) -> Result<()> {
    let rep = self_test::<f64>(seed, 24)?;
    if rep.pass {
        Ok(())
    } else {
        Err(Error::ConstraintViolation {
            name: "self_test",
            detail: format!(
                "sandwich slack {:e}, balance defects {:?}",
                rep.worst_sandwich, rep.worst_balance
            ),
        })
    }
}

fn stem(out_dir: &Path, name: &str) -> PathBuf {
    out_dir.join(name)
}

fn rel(out_dir: &Path, p: &Path) -> String {
    p.strip_prefix(out_dir).unwrap_or(p).display().to_string()
}

fn run_trajectory<T: Real>(out_dir: &Path, path: &Path, all_monitors: bool) -> Result<u8> {
    let started = unix_now();
    let cfg = RunConfig::load(path)?;
    startup_self_test(cfg.seed)?;
    let (cert, led) = constants_for::<T>(&cfg)?;
    let (traj, summary) = simulate(cfg.state::<T>()?, &cfg.evolve(), &led)?;

    let mut outputs = Vec::new();
    let csv = stem(out_dir, &format!("{}.csv", traj.id));
    write_timeseries(&traj.records, &csv)?;
    outputs.push(rel(out_dir, &csv));

    let kinds = if all_monitors {
        MonitorKind::ALL.to_vec()
    } else {
        cfg.monitor_kinds()?
    };
    let mut reports = Vec::new();
    for kind in kinds {
        let rep = run_monitor(kind, &traj, &led)?;
        let p = stem(out_dir, &format!("{}.{}.json", traj.id, kind.name()));
        write_json(&p, &rep)?;
        outputs.push(rel(out_dir, &p));
        reports.push(rep);
    }
    let code = exit_status(&reports);

    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        command: if all_monitors { "verify" } else { "simulate" }.into(),
        source: path.display().to_string(),
        config: cfg,
        ledger: led,
        hypothesis: cert,
        started,
        finished: unix_now(),
        outputs,
        exit_status: code.into(),
    };
    manifest.write(&stem(out_dir, &format!("{}.manifest.json", traj.id)))?;
    print_json(&json!({
        "trajectory": traj.id,
        "steps": summary.steps,
        "samples": summary.samples,
        "t_final": summary.t_final.to_f64_lossy(),
        "monitors": reports
            .iter()
            .map(|r| json!({ "name": r.name, "pass": r.pass, "worst_margin": r.worst_margin, "advisory": r.advisory }))
            .collect::<Vec<_>>(),
        "exit_status": code,
    }))?;
    Ok(code)
}

fn run_oracle(out_dir: &Path, path: &Path) -> Result<u8> {
    let started = unix_now();
    let cfg = RunConfig::load(path)?;
    if cfg.profile.name != "couette" {
        return Err(Error::Invalid(format!(
            "the closed form exists only for couette, config has `{}`",
            cfg.profile.name
        )));
    }
    let (cert, led) = constants_for::<f64>(&cfg)?;
    let sp = CouetteSpectrum::from_initial(cfg.k, cfg.model, &cfg.initial(), cfg.eta_grid())?;
    let times = match cfg.oracle.as_ref().map(|o| o.times.clone()) {
        Some(t) if !t.is_empty() => t,
        _ => sample_times(&cfg.evolve::<f64>(), 0.0),
    };
    let traj: Trajectory<f64> = oracle_trajectory(&sp, &times, &led)?;
    let csv = stem(out_dir, &format!("{}.csv", traj.id));
    write_timeseries(&traj.records, &csv)?;
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        command: "oracle".into(),
        source: path.display().to_string(),
        config: cfg,
        ledger: led,
        hypothesis: cert,
        started,
        finished: unix_now(),
        outputs: vec![rel(out_dir, &csv)],
        exit_status: 0,
    };
    manifest.write(&stem(out_dir, &format!("{}.manifest.json", traj.id)))?;
    print_json(&json!({ "trajectory": traj.id, "samples": traj.records.len(), "exit_status": 0 }))?;
    Ok(0)
}

fn run_sweep(out_dir: &Path, path: &Path) -> Result<u8> {
    let started = unix_now();
    let cfg = RunConfig::load(path)?;
    let spec = cfg.sweep_spec::<f64>()?;
    let (cert, led) = constants_for::<f64>(&cfg)?;
    let report = sweep_enhanced_diffusion(&spec)?;
    let id = format!("sweep_{}_k{}_{}", cfg.profile.name, cfg.k, cfg.model.name());
    let p = stem(out_dir, &format!("{id}.json"));
    write_json(&p, &report)?;
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").into(),
        command: "sweep".into(),
        source: path.display().to_string(),
        config: cfg,
        ledger: led,
        hypothesis: cert,
        started,
        finished: unix_now(),
        outputs: vec![rel(out_dir, &p)],
        exit_status: 0,
    };
    manifest.write(&stem(out_dir, &format!("{id}.manifest.json")))?;
    print_json(&json!({ "sweep": id, "exponent": report.fit.exponent, "r_squared": report.fit.r_squared, "exit_status": 0 }))?;
    Ok(0)
}
