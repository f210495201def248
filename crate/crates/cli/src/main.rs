use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use tracktrust::attack::{monte_carlo_confirm_time, t_min, t_min_surface, MonteCarloOptions, ThreatConfig};
use tracktrust::harness::{
    emit_trace, run, run_case, CaseId, PriorRegime, RunTrace, ScenarioFile, TraceFormat, DEFAULT_FRAMES, OUT_DIR_ENV,
};
use tracktrust::validate::invariant_suite;
use tracktrust::{Error, ScoringParams};

#[derive(Parser)]
#[command(name = "tracktrust", version, about = "Track scoring, attack bounds and trust estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

#[derive(Clone, Copy, ValueEnum)]
enum PriorArg {
    None,
    Agent1,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

#[derive(clap::Args, Clone, Copy)]
struct ParamArgs {
    /// Detection probability P_D.
    #[arg(long, default_value_t = 0.9)]
    pd: f64,
    /// False-positive spatial density β_FP.
    #[arg(long, default_value_t = 1e-6)]
    beta_fp: f64,
    /// New-target spatial density β_NT.
    #[arg(long, default_value_t = 1e-9)]
    beta_nt: f64,
    /// False-confirmation rate α.
    #[arg(long, default_value_t = 1e-6)]
    alpha: f64,
    /// Missed-confirmation rate β.
    #[arg(long, default_value_t = 1e-2)]
    beta: f64,
    /// Measurement dimension η.
    #[arg(long, default_value_t = 2)]
    eta: u32,
    /// Determinant of the measurement covariance |R|.
    #[arg(long, default_value_t = 5.0)]
    det_r: f64,
}

impl ParamArgs {
    fn threat(&self, k_a: u32, k_b: u32) -> ThreatConfig {
        let params = ScoringParams {
            p_d: self.pd,
            beta_fp: self.beta_fp,
            beta_nt: self.beta_nt,
            eta: self.eta,
            alpha_err: self.alpha,
            beta_err: self.beta,
            ..ScoringParams::default()
        };
        ThreatConfig { k_a, k_b, det_r: self.det_r, params }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a reference case or a scenario file end to end and write a trace.
    Run {
        #[arg(long, required_unless_present = "scenario", conflicts_with = "scenario")]
        case: Option<CaseArg>,
        /// Scenario JSON with optional tracker/trust settings.
        #[arg(long)]
        scenario: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "none", conflicts_with = "scenario")]
        prior: PriorArg,
        #[arg(long)]
        frames: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (CSV) or file (JSON lines). Defaults to a name
        /// under $TRACKTRUST_OUT_DIR, or ./out.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Minimum frames to confirm over a (K_a, K_b) grid, as CSV.
    Surface {
        #[arg(long, default_value_t = 5)]
        ka_max: u32,
        #[arg(long, default_value_t = 5)]
        kb_max: u32,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Minimum frames to confirm for one (K_a, K_b).
    Tmin {
        #[arg(long)]
        ka: u32,
        #[arg(long)]
        kb: u32,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Simulated confirmation times for one (K_a, K_b).
    Mc {
        #[arg(long)]
        ka: u32,
        #[arg(long)]
        kb: u32,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Jitter fabricated detections with measurement noise.
        #[arg(long)]
        noisy: bool,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Run the invariant suite.
    Validate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn default_out(stem: &str, format: TraceFormat) -> PathBuf {
    let base = std::env::var_os(OUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("out"));
    match format {
        TraceFormat::Csv => base.join(stem),
        TraceFormat::Jsonl => base.join(format!("{stem}.jsonl")),
    }
}

fn print_summary(trace: &RunTrace, out: &mut impl Write) -> io::Result<()> {
    let Some(last) = trace.frames().checked_sub(1) else {
        return writeln!(out, "no frames run");
    };
    writeln!(out, "final frame {last}")?;
    for r in trace.tracks_at(last) {
        let label = r.label.map_or("-".to_string(), |l| l.to_string());
        writeln!(
            out,
            "  {:<10} label {:>2} {:<14} {:<10} trust {:.3} (λ {:.2})",
            r.track_id.to_string(),
            label,
            format!("{:?}", r.truth).to_lowercase(),
            r.status.as_str(),
            r.trust_mean,
            r.trust_precision
        )?;
    }
    for r in trace.agents_at(last) {
        let tag = if r.compromised { "compromised" } else { "benign" };
        writeln!(out, "  {:<10} {tag:<11} trust {:.3} (λ {:.2})", r.agent_id.to_string(), r.trust_mean, r.trust_precision)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_run(
    case: Option<CaseArg>,
    scenario: Option<PathBuf>,
    prior: PriorArg,
    frames: Option<u64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: FormatArg,
) -> Result<()> {
    let format = match format {
        FormatArg::Csv => TraceFormat::Csv,
        FormatArg::Jsonl => TraceFormat::Jsonl,
    };
    let (trace, stem) = match (case, scenario) {
        (Some(case), _) => {
            let case = match case {
                CaseArg::One => CaseId::Case1,
                CaseArg::Two => CaseId::Case2,
            };
            let prior = match prior {
                PriorArg::None => PriorRegime::Uninformative,
                PriorArg::Agent1 => PriorRegime::StrongAgent1,
            };
            let seed = seed.unwrap_or(0);
            let trace = run_case(case, prior, seed, frames.unwrap_or(DEFAULT_FRAMES))?;
            (trace, format!("{case}_{prior}_seed{seed}"))
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            let mut file = ScenarioFile::from_json_str(&text).with_context(|| format!("parsing {}", path.display()))?;
            if let Some(seed) = seed {
                file.scenario.rng_seed = seed;
            }
            let frames = frames.unwrap_or(file.scenario.n_frames);
            let mut trace = run(&file.scenario, &file.config, frames)?;
            trace.meta.case = Some(CaseId::Custom);
            let stem = path.file_stem().map_or("custom".into(), |s| s.to_string_lossy().into_owned());
            (trace, format!("{stem}_seed{}", file.scenario.rng_seed))
        }
        (None, None) => bail!("either --case or --scenario is required"),
    };
    let out = out.unwrap_or_else(|| default_out(&stem, format));
    let written = emit_trace(&trace, format, &out).with_context(|| format!("writing trace to {}", out.display()))?;
    let mut stdout = io::stdout().lock();
    print_summary(&trace, &mut stdout)?;
    for path in written {
        writeln!(stdout, "wrote {}", path.display())?;
    }
    Ok(())
}

fn cmd_surface(ka_max: u32, kb_max: u32, out: Option<PathBuf>, params: ParamArgs) -> Result<()> {
    let cells = t_min_surface(1..=ka_max.max(1), 1..=kb_max.max(1), &params.threat(1, 1))?;
    let mut text = String::from("k_a,k_b,t_min_continuous,t_min_ceil\n");
    for c in cells {
        let ceil = c.t_min_ceil().map_or(String::new(), |v| v.to_string());
        text += &format!("{},{},{},{}\n", c.k_a, c.k_b, c.t_min, ceil);
    }
    match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent)?;
            }
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        }
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn cmd_tmin(ka: u32, kb: u32, params: ParamArgs) -> Result<()> {
    match t_min(&params.threat(ka, kb)) {
        Ok(t) => {
            println!("t_min = {t:.4} (at least {} frames)", t.ceil());
            Ok(())
        }
        Err(Error::AttackInfeasible { denominator }) => {
            println!("infeasible: best per-frame score change {denominator:.4} is not positive");
            Ok(())
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_mc(ka: u32, kb: u32, trials: u64, seed: u64, noisy: bool, params: ParamArgs) -> Result<()> {
    let cfg = params.threat(ka, kb);
    let bound = t_min(&cfg)?;
    let opts = MonteCarloOptions { noisy_placement: noisy, ..Default::default() };
    let res = monte_carlo_confirm_time(&cfg, trials, seed, &opts)?;
    println!("t_min = {bound:.4}");
    match (res.mean_frames, res.min_frames) {
        (Some(mean), Some(min)) => println!("confirmed in {} of {trials} trials: mean {mean:.3}, min {min}", trials - res.unconfirmed() as u64),
        _ => println!("no trial confirmed within {} frames", opts.max_frames),
    }
    Ok(())
}

fn cmd_validate(seed: u64) -> Result<bool> {
    let mut all = true;
    for c in invariant_suite(seed) {
        all &= c.passed;
        println!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(all)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { case, scenario, prior, frames, seed, out, format } => {
            cmd_run(case, scenario, prior, frames, seed, out, format).map(|_| true)
        }
        Command::Surface { ka_max, kb_max, out, params } => cmd_surface(ka_max, kb_max, out, params).map(|_| true),
        Command::Tmin { ka, kb, params } => cmd_tmin(ka, kb, params).map(|_| true),
        Command::Mc { ka, kb, trials, seed, noisy, params } => cmd_mc(ka, kb, trials, seed, noisy, params).map(|_| true),
        Command::Validate { seed } => cmd_validate(seed),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
