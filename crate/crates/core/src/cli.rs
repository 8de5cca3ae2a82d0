//! Command-line front end. Every command writes plain data (CSV, JSON or
//! TOML) to stdout or `--out`, and a short summary to stderr.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::characterization::{
    characterize_scan, device_to_vector, generate_scan, identity_configuration, tritter_setting,
    ScanOptions, ScanProtocol, SettingOptions,
};
use crate::config::{DeviceConfig, CONFIG_ENV};
use crate::device::reference;
use crate::error::{Error, Result};
use crate::estimation::{crb_map, variance_experiment, BenchmarkKind};
use crate::grid::PhaseGrid;
use crate::photonics::{output_probs, DistinguishabilityModel, FockState};
use crate::thermal::ResistorId;
use crate::unitary::PhaseVector;

#[derive(Debug, Parser)]
#[command(name = "triphase", version, about = "Three-mode interferometer simulation and characterization")]
pub struct Cli {
    /// Device configuration: a TOML file, `paper-device` or `ideal`.
    #[arg(long, global = true, env = CONFIG_ENV)]
    pub config: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Output probabilities at one phase point or over a grid.
    Simulate(SimulateArgs),
    /// Cramér–Rao bound map with an optional classical benchmark mask.
    Crb(CrbArgs),
    /// Maximum-likelihood variance experiment.
    Mle(MleArgs),
    /// Simulate a power scan of the configured device and fit it.
    Characterize(CharacterizeArgs),
    /// Three-step balanced-tritter setting.
    TritterSet(OutArgs),
    /// Identity configuration of the two tritters.
    Identity(OutArgs),
    /// Print the configuration in canonical form.
    ShowConfig(OutArgs),
}

#[derive(Debug, clap::Args)]
pub struct OutArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    /// Occupied input modes, e.g. `3`, `2,3` or `1,2,3`.
    #[arg(long, default_value = "2,3")]
    pub input: FockState,
    /// Photon number; must match the input when given.
    #[arg(long)]
    pub photons: Option<usize>,
    /// Single phase point `Δφ1,Δφ2`.
    #[arg(long, value_parser = parse_phases, conflicts_with = "grid")]
    pub phases: Option<PhaseVector>,
    /// Grid `NxM` over [0, 2π)².
    #[arg(long)]
    pub grid: Option<PhaseGrid>,
    /// Indistinguishability; the configuration's value when absent.
    #[arg(long)]
    pub visibility: Option<f64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BenchmarkArg {
    Sim,
    Sep,
    None,
}

#[derive(Debug, clap::Args)]
pub struct CrbArgs {
    #[arg(long, default_value = "2,3")]
    pub input: FockState,
    #[arg(long)]
    pub photons: Option<usize>,
    #[arg(long, default_value = "100x100")]
    pub grid: PhaseGrid,
    #[arg(long, value_enum, default_value = "sim")]
    pub benchmark: BenchmarkArg,
    /// Indistinguishability; 1 when absent.
    #[arg(long)]
    pub visibility: Option<f64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, clap::Args)]
pub struct MleArgs {
    #[arg(long, value_parser = parse_phases, default_value = "-1.159,2.810")]
    pub phases: PhaseVector,
    #[arg(long, default_value = "2,3")]
    pub input: FockState,
    /// A single event number.
    #[arg(long, conflicts_with = "sweep")]
    pub events: Option<u64>,
    /// Event numbers: a list `200,400,800` or a range `start:stop:step`.
    #[arg(long, value_parser = parse_sweep)]
    pub sweep: Option<Sweep>,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    #[arg(long, default_value_t = 2021)]
    pub seed: u64,
    #[arg(long)]
    pub visibility: Option<f64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolArg {
    Internal,
    Tritter,
}

#[derive(Debug, clap::Args)]
pub struct CharacterizeArgs {
    #[arg(long, value_enum, default_value = "internal")]
    pub protocol: ProtocolArg,
    /// Detections per scan point, or `none` for exact probabilities.
    #[arg(long, default_value = "2000", value_parser = parse_noise)]
    pub noise: Noise,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Points per resistor sweep.
    #[arg(long, default_value_t = 60)]
    pub points: usize,
    /// Fit result as JSON; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the simulated scan as CSV.
    #[arg(long)]
    pub scan_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Noise {
    Counts(u64),
    None,
}

fn parse_pair(s: &str) -> std::result::Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(format!("expected two comma-separated numbers, got `{s}`"));
    }
    let a = parts[0].parse::<f64>().map_err(|e| format!("`{}`: {e}", parts[0]))?;
    let b = parts[1].parse::<f64>().map_err(|e| format!("`{}`: {e}", parts[1]))?;
    if !a.is_finite() || !b.is_finite() {
        return Err("phases must be finite".into());
    }
    Ok([a, b])
}

fn parse_phases(s: &str) -> std::result::Result<PhaseVector, String> {
    parse_pair(s).map(|[a, b]| PhaseVector::new(a, b))
}

/// Event numbers of an estimation sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sweep(pub Vec<u64>);

fn parse_sweep(s: &str) -> std::result::Result<Sweep, String> {
    let bad = |e: std::num::ParseIntError| format!("bad event number in `{s}`: {e}");
    let ms: Vec<u64> = if s.contains(':') {
        let p: Vec<u64> = s.split(':').map(|x| x.trim().parse().map_err(bad)).collect::<std::result::Result<_, _>>()?;
        if p.len() != 3 || p[2] == 0 || p[1] < p[0] {
            return Err(format!("range must be start:stop:step with step > 0, got `{s}`"));
        }
        (p[0]..=p[1]).step_by(p[2] as usize).collect()
    } else {
        s.split(',').map(|x| x.trim().parse().map_err(bad)).collect::<std::result::Result<_, _>>()?
    };
    if ms.is_empty() || ms.contains(&0) {
        return Err("event numbers must be positive".into());
    }
    Ok(Sweep(ms))
}

fn parse_noise(s: &str) -> std::result::Result<Noise, String> {
    if s.eq_ignore_ascii_case("none") {
        return Ok(Noise::None);
    }
    match s.parse::<u64>() {
        Ok(n) if n > 0 => Ok(Noise::Counts(n)),
        _ => Err(format!("noise must be a positive count or `none`, got `{s}`")),
    }
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn check_photons(input: &FockState, photons: Option<usize>) -> Result<()> {
    match photons {
        Some(n) if n != input.total() => Err(Error::Parse(format!(
            "--photons {n} does not match input {input} with {} photons",
            input.total()
        ))),
        _ => Ok(()),
    }
}

fn model(v: Option<f64>, default: f64) -> Result<DistinguishabilityModel> {
    DistinguishabilityModel::new(v.unwrap_or(default))
}

/// Run a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    let config = DeviceConfig::load(cli.config.as_deref())?;
    let device = &config.device;
    match cli.command {
        Command::Simulate(a) => {
            check_photons(&a.input, a.photons)?;
            let model = model(a.visibility, config.visibility)?;
            let points = match (a.phases, a.grid) {
                (Some(p), _) => vec![p],
                (None, Some(g)) => g.points(),
                (None, None) => vec![PhaseVector::new(0.0, 0.0)],
            };
            let mut w = csv::Writer::from_writer(output(&a.out.out)?);
            w.write_record(["dphi1", "dphi2", "input", "event", "probability"])?;
            for p in &points {
                let dist = output_probs(&device.unitary(p), &a.input, &model)?;
                for (e, q) in &dist.events {
                    w.write_record([
                        format!("{:.10}", p.dphi1),
                        format!("{:.10}", p.dphi2),
                        a.input.label(),
                        e.label(),
                        format!("{q:.12e}"),
                    ])?;
                }
            }
            w.flush()?;
            eprintln!("{} points, {} photons", points.len(), a.input.total());
        }
        Command::Crb(a) => {
            check_photons(&a.input, a.photons)?;
            let model = model(a.visibility, 1.0)?;
            let bench = match a.benchmark {
                BenchmarkArg::Sim => Some(BenchmarkKind::Simultaneous),
                BenchmarkArg::Sep => Some(BenchmarkKind::Separate),
                BenchmarkArg::None => None,
            };
            let map = crb_map(device, &a.input, &model, &a.grid, bench)?;
            let mut w = csv::Writer::from_writer(output(&a.out.out)?);
            w.write_record(["dphi1", "dphi2", "crb_trace", "singular", "beats_benchmark"])?;
            for p in &map.points {
                w.write_record([
                    format!("{:.10}", p.phases.dphi1),
                    format!("{:.10}", p.phases.dphi2),
                    p.trace.map_or_else(|| "nan".into(), |t| format!("{t:.10e}")),
                    (p.trace.is_none() as u8).to_string(),
                    (p.beats_benchmark as u8).to_string(),
                ])?;
            }
            w.flush()?;
            if let Some((ph, t)) = map.minimum {
                eprintln!("min Tr(I^-1) = {t:.6} at ({:.4}, {:.4})", ph.dphi1, ph.dphi2);
            }
            if let Some((k, b)) = map.benchmark {
                eprintln!("benchmark {k:?}: Tr = {b:.6}; {} points below", map.mask_count());
            }
            eprintln!("{} singular points", map.singular_count());
        }
        Command::Mle(a) => {
            let model = model(a.visibility, config.visibility)?;
            let ms = match (a.events, a.sweep) {
                (Some(m), _) => vec![m],
                (None, Some(s)) => s.0,
                (None, None) => (200..=1200).step_by(100).collect(),
            };
            let res = variance_experiment(device, &a.phases, &a.input, &model, &ms, a.reps, a.seed)?;
            let mut w = csv::Writer::from_writer(output(&a.out.out)?);
            w.write_record([
                "m", "reps", "total_variance", "var_dphi1", "var_dphi2", "mean_dphi1",
                "mean_dphi2", "bound_fisher", "bound_sim", "bound_sep",
            ])?;
            for r in &res {
                w.write_record([
                    r.m.to_string(),
                    r.repetitions.to_string(),
                    format!("{:.10e}", r.total_variance),
                    format!("{:.10e}", r.variances[0]),
                    format!("{:.10e}", r.variances[1]),
                    format!("{:.10}", r.mean_estimate[0]),
                    format!("{:.10}", r.mean_estimate[1]),
                    format!("{:.10e}", r.bound_fisher),
                    format!("{:.10e}", r.bound_simultaneous),
                    r.bound_separate.map_or_else(|| "nan".into(), |b| format!("{b:.10e}")),
                ])?;
            }
            w.flush()?;
            if let Some(r) = res.first() {
                eprintln!("Tr(I^-1) = {:.6}", r.bound_fisher * r.m as f64);
            }
        }
        Command::Characterize(a) => {
            let protocol = match a.protocol {
                ProtocolArg::Internal => ScanProtocol::InternalResistors,
                ProtocolArg::Tritter => ScanProtocol::TritterResistors,
            };
            let mut opts = match a.noise {
                Noise::None => ScanOptions::noiseless(),
                Noise::Counts(n) => ScanOptions {
                    counts: Some(n),
                    nominal_counts: n,
                    ..ScanOptions::default()
                },
            };
            opts.points = a.points;
            opts.seed = a.seed;
            let mut scan = generate_scan(device, protocol, &opts)?;
            scan.device_id = config.name.clone();
            if let Some(p) = &a.scan_out {
                scan.write_csv(BufWriter::new(File::create(p)?))?;
            }
            let fit = characterize_scan(&scan, protocol, device)?;
            let mut w = output(&a.out)?;
            fit.write_json(&mut w)?;
            w.flush()?;
            let truth = match protocol {
                ScanProtocol::InternalResistors => device_to_vector(device),
                ScanProtocol::TritterResistors => {
                    let t = &device.thermal;
                    let s = &t.static_phases;
                    vec![s.phi0_ta, s.phi0_tb, t.alpha_t[0], t.alpha_t[1], t.alpha_t_nl[0], t.alpha_t_nl[1]]
                }
            };
            let dmax = fit
                .values
                .iter()
                .zip(&truth)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            eprintln!(
                "chi2 = {:.3}, n = {}, chi2/nu = {:.4}, converged = {}, max |dparam| = {dmax:.3e}",
                fit.chi_square,
                fit.n_points,
                fit.reduced_chi_square(),
                fit.converged
            );
            if !fit.converged {
                return Err(Error::Convergence("characterization fit did not converge".into()));
            }
        }
        Command::TritterSet(a) => {
            let r = tritter_setting(device, &SettingOptions::default())?;
            let mut w = output(&a.out)?;
            for s in &r.steps {
                let res: Vec<String> = s
                    .resistors
                    .iter()
                    .zip(&s.powers)
                    .map(|(id, p)| format!("{id} {p:.5} W"))
                    .collect();
                writeln!(w, "{}: {} -> residual {:.3e}, branch {:+}", s.objective, res.join(", "), s.residual, s.branch)?;
            }
            for id in ResistorId::ALL {
                writeln!(w, "V_{id} = {:.4} V", r.voltages[id.index()])?;
            }
            writeln!(w, "phi1-phi2 = {:+.5}, phi2-phiref = {:+.5}", r.internal_differences[0], r.internal_differences[1])?;
            writeln!(w, "phiTA = {:+.5}, phiTB = {:+.5}", r.phi_ta, r.phi_tb)?;
            writeln!(w, "F_A = {:.4} (chip reference {:.4})", r.fidelity_a, reference::FIDELITY_A)?;
            writeln!(w, "F_B = {:.4} (chip reference {:.4})", r.fidelity_b, reference::FIDELITY_B)?;
            let refs: Vec<String> = reference::SETTING_VOLTAGES.iter().map(|(n, v)| format!("{n} {v} V")).collect();
            writeln!(w, "chip setting voltages (reference only): {}", refs.join(", "))?;
            for warn in &r.warnings {
                writeln!(w, "warning: {warn}")?;
            }
            w.flush()?;
        }
        Command::Identity(a) => {
            let r = identity_configuration(device)?;
            let mut w = output(&a.out)?;
            let s = &r.settings;
            writeln!(w, "S = {:.12}", r.similarity)?;
            writeln!(w, "phiTA = {:+.6}, phiTB = {:+.6}", s.phi_ta, s.phi_tb)?;
            writeln!(w, "internal offset = ({:+.6}, {:+.6})", s.offset.dphi1, s.offset.dphi2)?;
            if let Some(p) = r.powers {
                for id in ResistorId::ALL {
                    writeln!(w, "P_{id} = {:.6} W", p[id.index()])?;
                }
            }
            for n in &r.notes {
                writeln!(w, "note: {n}")?;
            }
            writeln!(w, "chip reference S = {}", reference::IDENTITY_SIMILARITY)?;
            w.flush()?;
        }
        Command::ShowConfig(a) => {
            let mut w = output(&a.out)?;
            w.write_all(config.to_toml_string().as_bytes())?;
            w.flush()?;
        }
    }
    Ok(())
}

/// Exit status for an error: 3 for numerical failures, 2 otherwise.
pub fn exit_code(e: &Error) -> u8 {
    if e.is_numerical() {
        3
    } else {
        2
    }
}

/// Parse `std::env::args`, run, and map the outcome to an exit status.
pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn every_flag_parses() {
        let parse = |args: &[&str]| Cli::try_parse_from(std::iter::once("triphase").chain(args.iter().copied()));
        let c = parse(&["mle", "--sweep", "200:400:100", "--phases=-1,2"]).unwrap();
        match c.command {
            Command::Mle(a) => {
                assert_eq!(a.sweep, Some(Sweep(vec![200, 300, 400])));
                assert_eq!(a.phases, PhaseVector::new(-1.0, 2.0));
            }
            other => panic!("{other:?}"),
        }
        assert!(parse(&["mle", "--sweep", "0,5"]).is_err());
        assert!(parse(&["mle", "--events", "5", "--sweep", "5"]).is_err());
        assert!(parse(&["simulate", "--grid", "3x4", "--photons", "2"]).is_ok());
        assert!(parse(&["crb", "--benchmark", "sep", "--input", "1,2"]).is_ok());
        assert!(parse(&["characterize", "--noise", "none", "--protocol", "tritter"]).is_ok());
        assert!(parse(&["characterize", "--noise", "-4"]).is_err());
        assert!(parse(&["tritter-set"]).is_ok() && parse(&["identity"]).is_ok());
    }
}
