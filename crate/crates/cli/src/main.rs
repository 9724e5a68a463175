//! `qfc`: simulate and verify measurement-based feedback cooling models.
//!
//! Subcommands: `simulate` (run a Monte Carlo ensemble from a TOML config,
//! emit CSV), `verify` (model assumption checks and equilibrium analysis for
//! a preset), and `preset list`.

use qfc_cli::{config, run};

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigError, ModelSection, RunConfig};
use qfc_core::model::{check_assumptions, evolve_average};
use qfc_core::operators::{validate_density, Tolerances};

#[derive(Parser)]
#[command(name = "qfc", version, about = "Quantum feedback cooling simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo ensemble and write CSV output.
    Simulate(SimulateArgs),
    /// Check model assumptions and equilibrium structure for a preset.
    Verify(VerifyArgs),
    /// Preset utilities.
    Preset {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    /// List the bundled model presets.
    List,
}

#[derive(Args)]
struct SimulateArgs {
    /// TOML configuration file; flags below override its keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Model preset: qutrit or heisenberg.
    #[arg(long)]
    preset: Option<String>,
    /// Controller kind: free, ideal, ergodic, or windowed.
    #[arg(long)]
    controller: Option<String>,
    /// Window length in samples for the windowed controller.
    #[arg(long)]
    window_k: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_initial: Option<usize>,
    #[arg(long)]
    runs_per_initial: Option<usize>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    sample_every: Option<usize>,
    /// Initial-state scheme: haar_pure or ginibre_mixed.
    #[arg(long)]
    init: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Also write one CSV per trajectory under trajectories/.
    #[arg(long)]
    dump_trajectories: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Preset to verify: qutrit or heisenberg.
    preset: String,
    /// Control Hamiltonian variant: default or zero.
    #[arg(long, default_value = "default")]
    f0: String,
    #[arg(long)]
    jx: Option<f64>,
    #[arg(long)]
    jy: Option<f64>,
    #[arg(long)]
    jz: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.cmd {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Preset {
            action: PresetAction::List,
        } => {
            println!("qutrit      3-level cooling test bed, H0 = L = diag(-1, 2, 3)");
            println!("heisenberg  antiferromagnetic spin triangle, couplings --jx --jy --jz (default 1, 1, 2)");
            ExitCode::SUCCESS
        }
    }
}

fn merge_flags(cfg: &mut RunConfig, args: &SimulateArgs) {
    let m = &mut cfg.model;
    if args.preset.is_some() {
        m.preset = args.preset.clone();
    }
    let c = &mut cfg.controller;
    if args.controller.is_some() {
        c.kind = args.controller.clone();
    }
    if args.window_k.is_some() {
        c.window_k = args.window_k;
    }
    if args.gamma.is_some() {
        c.gamma = args.gamma;
    }
    if args.beta.is_some() {
        c.beta = args.beta;
    }
    if args.epsilon.is_some() {
        c.epsilon = args.epsilon;
    }
    let e = &mut cfg.ensemble;
    if args.seed.is_some() {
        e.master_seed = args.seed;
    }
    if args.n_initial.is_some() {
        e.n_initial = args.n_initial;
    }
    if args.runs_per_initial.is_some() {
        e.runs_per_initial = args.runs_per_initial;
    }
    if args.t_final.is_some() {
        e.t_final = args.t_final;
    }
    if args.dt.is_some() {
        e.dt = args.dt;
    }
    if args.sample_every.is_some() {
        e.sample_every = args.sample_every;
    }
    if args.init.is_some() {
        e.init = args.init.clone();
        e.init_diag = None;
    }
    let o = &mut cfg.output;
    if args.out.is_some() {
        o.dir = args.out.clone();
    }
    if args.dump_trajectories {
        o.dump_trajectories = Some(true);
    }
}

fn cmd_simulate(args: SimulateArgs) -> ExitCode {
    let mut cfg = match &args.config {
        Some(path) => match config::parse_config(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        },
        None => RunConfig::default(),
    };
    merge_flags(&mut cfg, &args);
    let resolved = match config::resolve(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };

    let dir = PathBuf::from(&resolved.output_dir);
    if let Err(e) = std::fs::create_dir_all(&dir) {
        eprintln!("error: cannot create output directory: {e}");
        return ExitCode::from(2);
    }
    // Audit trail: the fully-resolved config next to the outputs.
    if let Err(e) = std::fs::write(dir.join("config.toml"), config::emit_config(&resolved.echo))
    {
        eprintln!("error: cannot write resolved config: {e}");
        return ExitCode::from(2);
    }

    let res = match run::run_ensemble_parallel(&resolved.spec, &resolved.ensemble) {
        Ok(r) => r,
        Err(e @ qfc_core::Error::AssumptionViolation { .. }) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = run::write_ensemble_csv(&dir.join("ensemble.csv"), &res) {
        eprintln!("error: cannot write ensemble.csv: {e}");
        return ExitCode::from(2);
    }
    if let Err(e) = run::write_plot_stub(&dir) {
        eprintln!("error: cannot write plot stub: {e}");
        return ExitCode::from(2);
    }
    if resolved.dump_trajectories {
        if let Err(e) = run::dump_trajectories(&resolved.spec, &resolved.ensemble, &dir) {
            eprintln!("error: trajectory dump failed: {e}");
            return ExitCode::from(2);
        }
    }
    println!(
        "wrote {} sample rows for {} trajectories to {}",
        res.sample_times.len(),
        res.n_trajectories_total,
        dir.join("ensemble.csv").display()
    );
    ExitCode::SUCCESS
}

fn cmd_verify(args: VerifyArgs) -> ExitCode {
    let model = ModelSection {
        preset: Some(args.preset.clone()),
        jx: args.jx,
        jy: args.jy,
        jz: args.jz,
        f0: Some(args.f0.clone()),
    };
    let spec = match config::build_model(&model) {
        Ok(s) => s,
        Err(e @ ConfigError::MissingRequired(_)) | Err(e @ ConfigError::InvalidValue(_)) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };

    let report = check_assumptions(&spec);
    let pf = |p: bool| if p { "pass" } else { "FAIL" };
    println!("preset: {}", args.preset);
    println!(
        "measurement operator Hermitian: {} (residual {:.3e})",
        pf(report.a1_hermitian.pass),
        report.a1_hermitian.value
    );
    println!(
        "[H0, L] = 0: {} (residual {:.3e})",
        pf(report.a2_commute.pass),
        report.a2_commute.value
    );
    println!(
        "spectral separation: {} (margin {:.6})",
        pf(report.a3_spectral.pass),
        report.a3_spectral.value
    );
    println!(
        "unique controlled equilibrium: {}",
        pf(report.unique_equilibrium)
    );
    println!("liouvillian rank: {}", report.liouvillian_rank);
    let sd = &spec.spectrum;
    println!(
        "target eigenvalue {} (multiplicity {}), spectral gap {}",
        spec.target_eigenvalue(),
        sd.multiplicities[0],
        spec.gap()
    );

    if !report.all_pass() {
        println!("verification FAILED");
        return ExitCode::from(1);
    }

    // Settling-time witness: average dynamics with control on, started from
    // the extremal state farthest from the target eigenspace.
    let top = sd.top_projector();
    let mult = top.trace().re;
    let rho0 = match validate_density(
        &(top * num_complex::Complex64::new(1.0 / mult, 0.0)),
        &Tolerances::default(),
    ) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: extremal state construction failed: {e}");
            return ExitCode::from(2);
        }
    };
    match evolve_average(&spec, true, &rho0, 50.0, 1e-3) {
        Ok(avg) => match avg.first_below_gap {
            Some(t) => {
                println!("settling witness: V < gap at t = {t:.4} from worst-case extremal state");
            }
            None => {
                println!("settling witness: V never fell below the gap by t = 50");
                println!("verification FAILED");
                return ExitCode::from(1);
            }
        },
        Err(e) => {
            eprintln!("error: average-dynamics integration failed: {e}");
            return ExitCode::from(2);
        }
    }
    println!("verification passed");
    ExitCode::SUCCESS
}
