//! `v2psim` — scenario runner and message inspector for the cooperative
//! vehicle-to-pedestrian safety library.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use v2p_core::channel::ChannelMetrics;
use v2p_core::messages::{decode_message, describe};
use v2p_core::scenario::{
    build_scenario, emit_outputs, run, RunResult, ScenarioConfig, ScenarioKind, ScenarioOverrides,
};

#[derive(Parser)]
#[command(name = "v2psim", version, about = "Cooperative V2P safety simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its trace/metric files.
    Run(RunArgs),
    /// Run seed-matched pairs with a control toggled off and on, then
    /// print a comparison table.
    Ab(AbArgs),
    /// Decode and pretty-print a hex-encoded safety message.
    Msg {
        #[command(subcommand)]
        command: MsgCommand,
    },
}

#[derive(Subcommand)]
enum MsgCommand {
    /// Decode a message from hex bytes.
    Inspect { hex: String },
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Crossing,
    RightTurn,
    LeftTurn,
    AlongRoad,
    Congestion,
}

impl From<KindArg> for ScenarioKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Crossing => ScenarioKind::Crossing,
            KindArg::RightTurn => ScenarioKind::RightTurn,
            KindArg::LeftTurn => ScenarioKind::LeftTurn,
            KindArg::AlongRoad => ScenarioKind::AlongRoad,
            KindArg::Congestion => ScenarioKind::Congestion,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

impl From<Toggle> for bool {
    fn from(t: Toggle) -> bool {
        matches!(t, Toggle::On)
    }
}

#[derive(Args)]
struct ScenarioArgs {
    /// Canonical scenario geometry.
    #[arg(long, value_enum)]
    scenario: Option<KindArg>,
    /// Full scenario config as JSON (overrides --scenario).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Vehicle speed, km/h.
    #[arg(long)]
    speed_kmh: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Simulated duration, seconds.
    #[arg(long)]
    duration: Option<f64>,
    /// Pedestrian count (congestion scenario).
    #[arg(long)]
    peds: Option<usize>,
    #[arg(long, value_enum)]
    congestion_control: Option<Toggle>,
    #[arg(long, value_enum)]
    power_control: Option<Toggle>,
    /// Vehicles brake at d_mod from their first advisory.
    #[arg(long, value_enum)]
    braking_response: Option<Toggle>,
}

impl ScenarioArgs {
    fn to_config(&self) -> Result<ScenarioConfig> {
        let overrides = ScenarioOverrides {
            speed_kmh: self.speed_kmh,
            seed: self.seed,
            duration_s: self.duration,
            pedestrians: self.peds,
            congestion_control: self.congestion_control.map(bool::from),
            power_control: self.power_control.map(bool::from),
            braking_response: self.braking_response.map(bool::from),
        };
        let cfg = match (&self.config, self.scenario) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                let mut cfg: ScenarioConfig =
                    serde_json::from_str(&text).context("parsing scenario config")?;
                // Command-line toggles still apply on top of a config file.
                if let Some(s) = overrides.seed {
                    cfg.seed = s;
                }
                if let Some(d) = overrides.duration_s {
                    cfg.duration_s = d;
                }
                if let Some(c) = overrides.congestion_control {
                    cfg.congestion_control_on = c;
                }
                if let Some(p) = overrides.power_control {
                    cfg.power_control_on = p;
                }
                if let Some(b) = overrides.braking_response {
                    cfg.braking_response = b;
                }
                cfg
            }
            (None, Some(kind)) => build_scenario(kind.into(), &overrides)?,
            (None, None) => bail!("one of --scenario or --config is required"),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Output directory for the CSV traces and summary.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AbArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Which control the A/B pair toggles.
    #[arg(long, value_enum, default_value = "congestion")]
    toggle: AbToggle,
    /// Comma-separated seeds; each runs a control-off and a control-on arm.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
    seeds: Vec<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum AbToggle {
    Congestion,
    Power,
}

fn main() {
    if let Err(e) = real_main() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn real_main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => cmd_run(args),
        Command::Ab(args) => cmd_ab(args),
        Command::Msg { command: MsgCommand::Inspect { hex } } => cmd_inspect(&hex),
    }
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let cfg = args.scenario.to_config()?;
    let result = run(&cfg)?;
    emit_outputs(&result, &args.out)?;
    print_summary(&result);
    println!("outputs written to {}", args.out.display());
    Ok(())
}

fn print_summary(result: &RunResult) {
    match result.summary.first_advisory {
        Some((t, d)) => println!("first advisory: t={t:.1} s, d_lon={d:.2} m"),
        None => println!("first advisory: never"),
    }
    match result.summary.first_imminent {
        Some((t, d)) => println!("first imminent: t={t:.1} s, d_lon={d:.2} m"),
        None => println!("first imminent: never"),
    }
    if result.summary.min_separation_m.is_finite() {
        println!(
            "min separation: {:.2} m at t={:.1} s",
            result.summary.min_separation_m, result.summary.time_of_closest_approach_s
        );
    }
}

fn cmd_ab(args: AbArgs) -> Result<()> {
    let base = args.scenario.to_config()?;
    std::fs::create_dir_all(&args.out)?;

    let mut table = String::from("seed,window_s,cbp_off,cbp_on\n");
    let mut per_off: std::collections::BTreeMap<u32, (u64, u64)> = Default::default();
    let mut per_on = per_off.clone();

    for &seed in &args.seeds {
        let mut cfg_off = base.clone();
        cfg_off.seed = seed;
        let mut cfg_on = cfg_off.clone();
        match args.toggle {
            AbToggle::Congestion => {
                cfg_off.congestion_control_on = false;
                cfg_on.congestion_control_on = true;
            }
            AbToggle::Power => {
                cfg_off.power_control_on = false;
                cfg_on.power_control_on = true;
            }
        }
        let off = run(&cfg_off)?;
        let on = run(&cfg_on)?;
        emit_outputs(&off, &args.out.join(format!("seed{seed}-off")))?;
        emit_outputs(&on, &args.out.join(format!("seed{seed}-on")))?;

        let windows = off.duration_s.ceil() as u32;
        for w in 0..windows {
            let a = off.metrics.mean_cbp(w).unwrap_or(0.0);
            let b = on.metrics.mean_cbp(w).unwrap_or(0.0);
            table.push_str(&format!("{seed},{w},{a:.6},{b:.6}\n"));
        }
        for (bins, pool) in [
            (&off.metrics.per_bins_veh_to_vru, &mut per_off),
            (&on.metrics.per_bins_veh_to_vru, &mut per_on),
        ] {
            for (low, b) in ChannelMetrics::rebin(bins, 50) {
                let e = pool.entry(low).or_insert((0, 0));
                e.0 += b.attempted;
                e.1 += b.failed;
            }
        }
        println!("seed {seed}: done");
    }

    std::fs::write(args.out.join("cbp_comparison.csv"), table)?;
    let mut per = String::from("bin_low_m,attempted_off,per_off,attempted_on,per_on\n");
    for (bin, &(n_off, f_off)) in &per_off {
        let (n_on, f_on) = per_on.get(bin).copied().unwrap_or((0, 0));
        let p_off = if n_off > 0 { f_off as f64 / n_off as f64 } else { 0.0 };
        let p_on = if n_on > 0 { f_on as f64 / n_on as f64 } else { 0.0 };
        per.push_str(&format!("{bin},{n_off},{p_off:.6},{n_on},{p_on:.6}\n"));
    }
    std::fs::write(args.out.join("per_comparison.csv"), per)?;
    println!("comparison tables written to {}", args.out.display());
    Ok(())
}

fn cmd_inspect(hex_str: &str) -> Result<()> {
    let cleaned: String = hex_str.chars().filter(|c| !c.is_whitespace()).collect();
    let bytes = hex::decode(&cleaned).context("invalid hex")?;
    let msg = decode_message(&bytes).context("decoding message")?;
    print!("{}", describe(&msg));
    Ok(())
}
