// SPDX-License-Identifier: Apache-2.0

//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 input file
//! error, 3 regression mismatch.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use hybist::bench;
use hybist::config::{parse_detection_mode, RunConfig};
use hybist::report::{
    closer_fault_count, emit_report_with_header, format_table1_checks, parse_json_report,
    verify_table1,
};
use hybist::scheduler::VectorSource;
use hybist::{
    build_deterministic_pool, collapse_faults, compute_cost_model, compute_improvements,
    enumerate_faults, load_vectors, run_campaign, ExternalBaseline, Netlist, Polynomial,
    ReportFormat,
};

#[derive(Parser)]
#[command(name = "hybist", version, about = "Hybrid BIST campaign simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Netlist statistics after the full-scan transform.
    Inspect { bench: String },
    /// Stuck-at fault list.
    Faults {
        bench: String,
        /// Print the uncollapsed universe.
        #[arg(long)]
        uncollapsed: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Build and export a compacted PODEM vector pool.
    Atpg {
        bench: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        backtrack_limit: Option<u64>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run one hybrid campaign.
    Campaign(CampaignArgs),
    /// Run a grid of campaigns over th1, th2 ratios and polynomial schedules.
    Sweep {
        #[command(flatten)]
        common: CampaignArgs,
        /// Comma-separated th1 values.
        #[arg(long, value_delimiter = ',')]
        th1_grid: Vec<f64>,
        /// Comma-separated th2 ratios.
        #[arg(long, value_delimiter = ',')]
        ratio_grid: Vec<f64>,
        /// Polynomial schedule, polynomials separated by `;`, e.g.
        /// "[7,1,0];[7,3,0]". Repeat for several schedules.
        #[arg(long)]
        schedule: Vec<String>,
        /// JSON report whose PWTC values (by circuit) are used as baseline.
        #[arg(long)]
        baseline: Option<PathBuf>,
    },
    /// Recompute the embedded reference table.
    #[command(name = "verify-table1")]
    VerifyTable1,
}

#[derive(Args, Clone)]
struct CampaignArgs {
    /// Benchmark path or name (searched in BENCH_DIR and bundled circuits).
    #[arg(long)]
    bench: Option<String>,
    /// `key = value` configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    th1: Option<f64>,
    #[arg(long)]
    th2_ratio: Option<f64>,
    #[arg(long)]
    th2: Option<usize>,
    /// Feedback polynomial as an exponent list; repeat for a schedule.
    #[arg(long)]
    poly: Vec<String>,
    /// direct or signature.
    #[arg(long)]
    detection_mode: Option<String>,
    #[arg(long)]
    unload_interval: Option<usize>,
    #[arg(long)]
    cycle_budget: Option<u64>,
    /// Deterministic vectors to use instead of PODEM.
    #[arg(long)]
    vector_file: Option<PathBuf>,
    #[arg(long)]
    backtrack_limit: Option<u64>,
    /// Coverage target as a fraction of testable faults.
    #[arg(long)]
    target: Option<f64>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    #[arg(long)]
    output: Option<PathBuf>,
    /// Event log CSV path.
    #[arg(long)]
    events: Option<PathBuf>,
    /// Signature trace path (signature mode).
    #[arg(long)]
    signatures: Option<PathBuf>,
    /// External baseline cycles.
    #[arg(long)]
    pwtc: Option<u64>,
    #[arg(long)]
    scan_vec: Option<u64>,
    #[arg(long)]
    circ_resp: Option<u64>,
}

enum Failure {
    Usage(String),
    Input(String),
    Regression(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Regression(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Regression(m) => m,
        }
    }
}

fn usage(e: impl std::fmt::Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn input(e: impl std::fmt::Display) -> Failure {
    Failure::Input(e.to_string())
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), Failure> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load(spec: &str, bench_dir: Option<&Path>) -> Result<Netlist, Failure> {
    let source = bench::resolve_in(spec, bench_dir)
        .ok_or_else(|| input(format!("benchmark `{spec}` not found")))?;
    let net = match source {
        bench::BenchSource::File(p) => Netlist::from_file(p).map_err(input)?,
        bench::BenchSource::Bundled(text) => {
            let stem = Path::new(spec)
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| spec.to_string());
            hybist::netlist::parse_bench_named(&stem, text).map_err(input)?
        }
    };
    Ok(hybist::full_scan_transform(&net))
}

impl CampaignArgs {
    fn layer(&self) -> Result<RunConfig, Failure> {
        let polynomials = if self.poly.is_empty() {
            None
        } else {
            Some(
                self.poly
                    .iter()
                    .map(|p| Polynomial::parse(p))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(usage)?,
            )
        };
        Ok(RunConfig {
            bench: self.bench.clone(),
            bench_dir: None,
            seed: self.seed,
            th1: self.th1,
            th2_ratio: self.th2_ratio,
            th2: self.th2,
            polynomials,
            detection_mode: self
                .detection_mode
                .as_deref()
                .map(parse_detection_mode)
                .transpose()
                .map_err(usage)?,
            unload_interval: self.unload_interval,
            cycle_budget: self.cycle_budget,
            vector_file: self.vector_file.clone(),
            backtrack_limit: self.backtrack_limit,
            target: self.target,
            format: self
                .format
                .as_deref()
                .map(str::parse::<ReportFormat>)
                .transpose()
                .map_err(usage)?,
            output: self.output.clone(),
            events: self.events.clone(),
        })
    }

    /// Flags over config file over environment.
    fn resolve(&self) -> Result<RunConfig, Failure> {
        let file = match &self.config {
            Some(p) => RunConfig::load(p).map_err(|e| match e {
                hybist::config::ConfigError::Io { .. } => input(e),
                e => usage(e),
            })?,
            None => RunConfig::default(),
        };
        let cfg = self.layer()?.over(file.over(RunConfig::from_env()));
        cfg.validate().map_err(usage)?;
        Ok(cfg)
    }

    fn baseline(&self) -> Option<ExternalBaseline> {
        (self.pwtc.is_some() || self.scan_vec.is_some() || self.circ_resp.is_some()).then_some(
            ExternalBaseline {
                scan_vec: self.scan_vec,
                circ_resp: self.circ_resp,
                pwtc: self.pwtc,
            },
        )
    }
}

struct CampaignRun {
    report: hybist::CostReport,
    header: Vec<(String, String)>,
    events_csv: String,
    signatures: Vec<String>,
}

fn run_one(
    cfg: &RunConfig,
    net: &Netlist,
    label: &str,
    baseline: Option<&ExternalBaseline>,
) -> Result<CampaignRun, Failure> {
    let source = match &cfg.vector_file {
        Some(path) => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
            Some(VectorSource::Pool(
                load_vectors(path, net.scan_length(), &mut rng).map_err(input)?,
            ))
        }
        None => None,
    };
    let ccfg = cfg.campaign_config(net, source).map_err(usage)?;
    let mut header = cfg.effective(net, &ccfg);
    let fs = collapse_faults(&enumerate_faults(net), net);
    let result = run_campaign(net, fs, ccfg).map_err(usage)?;
    let acct = &result.accounting;
    let report = compute_cost_model(label, acct.adv as u64, &net.profile(), acct, baseline)
        .map_err(usage)?;
    let report = compute_improvements(report);
    header.extend([
        (
            "terminated_by".to_string(),
            format!("{:?}", result.terminated_by),
        ),
        (
            "final_coverage".to_string(),
            format!("{:.6}", result.final_coverage),
        ),
        ("faults_total".to_string(), result.total_faults.to_string()),
        (
            "faults_detected".to_string(),
            result.detected_faults.to_string(),
        ),
        (
            "faults_untestable".to_string(),
            result.untestable_faults.to_string(),
        ),
        (
            "faults_aborted".to_string(),
            result.aborted_faults.to_string(),
        ),
    ]);
    Ok(CampaignRun {
        report,
        header,
        events_csv: result.events_csv(),
        signatures: result.signatures,
    })
}

fn bench_of(cfg: &RunConfig) -> Result<Netlist, Failure> {
    let spec = cfg
        .bench
        .as_deref()
        .ok_or_else(|| usage("no benchmark given (--bench or `bench =` in the config file)"))?;
    load(spec, cfg.bench_dir.as_deref())
}

fn execute(cli: Cli) -> Result<(), Failure> {
    let env = RunConfig::from_env();
    match cli.command {
        Command::Inspect { bench } => {
            let net = load(&bench, env.bench_dir.as_deref())?;
            let p = net.profile();
            println!("circuit      {}", net.name());
            println!("PIs          {}", p.pis);
            println!("POs          {}", p.pos);
            println!("PPIs         {}", p.ppis);
            println!("PPOs         {}", p.ppos);
            println!("gates        {}", p.gate_count);
            println!("nets         {}", net.net_count());
            println!("scan_length  {}", p.scan_length);
            let universe = enumerate_faults(&net);
            let collapsed = collapse_faults(&universe, &net);
            println!(
                "faults       {} ({} collapsed)",
                universe.len(),
                collapsed.len()
            );
            if let Some((reference, closer)) =
                closer_fault_count(net.name(), universe.len(), collapsed.len())
            {
                println!("reference    {reference} faults, closer to the {closer} count");
            }
            let dangling = net.dangling_nets();
            if !dangling.is_empty() {
                let names: Vec<&str> = dangling.iter().map(|&n| net.net_name(n)).collect();
                println!("dangling     {}", names.join(" "));
            }
            Ok(())
        }
        Command::Faults {
            bench,
            uncollapsed,
            output,
        } => {
            let net = load(&bench, env.bench_dir.as_deref())?;
            let universe = enumerate_faults(&net);
            let fs = if uncollapsed {
                universe
            } else {
                collapse_faults(&universe, &net)
            };
            write_out(output.as_deref(), &fs.export(&net))
        }
        Command::Atpg {
            bench,
            seed,
            backtrack_limit,
            output,
        } => {
            let net = load(&bench, env.bench_dir.as_deref())?;
            let cfg = RunConfig {
                seed,
                backtrack_limit,
                ..Default::default()
            };
            let fs = collapse_faults(&enumerate_faults(&net), &net);
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
            let build = build_deterministic_pool(&net, &fs, &cfg.budget(), &mut rng);
            eprintln!(
                "{}: {} vectors ({} before compaction), {} faults, {} untestable, {} aborted",
                net.name(),
                build.pool.len(),
                build.generated,
                fs.len(),
                build.untestable.len(),
                build.aborted.len()
            );
            write_out(output.as_deref(), &build.pool.export())
        }
        Command::Campaign(args) => {
            let cfg = args.resolve()?;
            let net = bench_of(&cfg)?;
            let run = run_one(&cfg, &net, net.name(), args.baseline().as_ref())?;
            let doc = emit_report_with_header(&[run.report], cfg.format(), &run.header);
            write_out(cfg.output.as_deref(), &doc)?;
            if let Some(p) = &cfg.events {
                write_out(Some(p), &run.events_csv)?;
            }
            if let Some(p) = &args.signatures {
                write_out(
                    Some(p),
                    &run.signatures
                        .iter()
                        .map(|s| s.clone() + "\n")
                        .collect::<String>(),
                )?;
            }
            Ok(())
        }
        Command::Sweep {
            common,
            th1_grid,
            ratio_grid,
            schedule,
            baseline,
        } => {
            let base = common.resolve()?;
            let net = bench_of(&base)?;
            let pwtc = match &baseline {
                Some(p) => {
                    let text = std::fs::read_to_string(p)
                        .map_err(|e| input(format!("{}: {e}", p.display())))?;
                    parse_json_report(&text)
                        .map_err(input)?
                        .into_iter()
                        .find(|r| r.circuit.eq_ignore_ascii_case(net.name()))
                        .and_then(|r| r.pwtc)
                }
                None => None,
            };
            let schedules: Vec<Option<Vec<Polynomial>>> = if schedule.is_empty() {
                vec![None]
            } else {
                schedule
                    .iter()
                    .map(|s| {
                        s.split(';')
                            .map(Polynomial::parse)
                            .collect::<Result<Vec<_>, _>>()
                            .map(Some)
                            .map_err(usage)
                    })
                    .collect::<Result<_, _>>()?
            };
            let th1s = if th1_grid.is_empty() {
                vec![base.th1]
            } else {
                th1_grid.into_iter().map(Some).collect()
            };
            let ratios = if ratio_grid.is_empty() {
                vec![base.th2_ratio]
            } else {
                ratio_grid.into_iter().map(Some).collect()
            };
            let mut grid = Vec::new();
            for (si, s) in schedules.iter().enumerate() {
                for &t in &th1s {
                    for &r in &ratios {
                        let mut cfg = base.clone();
                        cfg.th1 = t;
                        cfg.th2_ratio = r;
                        if r.is_some() {
                            cfg.th2 = None;
                        }
                        if s.is_some() {
                            cfg.polynomials = s.clone();
                        }
                        cfg.validate().map_err(usage)?;
                        let label = format!(
                            "{}:th1={}:ratio={}:schedule={}",
                            net.name(),
                            t.map(|v| v.to_string()).unwrap_or_else(|| "default".into()),
                            r.map(|v| v.to_string()).unwrap_or_else(|| "default".into()),
                            si
                        );
                        grid.push((label, cfg));
                    }
                }
            }
            let b = pwtc
                .map(ExternalBaseline::from_pwtc)
                .or_else(|| common.baseline());
            let runs: Vec<Result<CampaignRun, Failure>> = grid
                .par_iter()
                .map(|(label, cfg)| run_one(cfg, &net, label, b.as_ref()))
                .collect();
            let mut reports = Vec::new();
            for r in runs {
                reports.push(r?.report);
            }
            let mut header = vec![
                ("bench".to_string(), base.bench.clone().unwrap_or_default()),
                ("seed".to_string(), base.seed().to_string()),
                ("configurations".to_string(), grid.len().to_string()),
            ];
            for (label, cfg) in &grid {
                header.push((
                    label.clone(),
                    format!(
                        "th1={} th2_ratio={} th2={} polys={}",
                        opt(cfg.th1),
                        opt(cfg.th2_ratio),
                        opt(cfg.th2),
                        cfg.polynomials
                            .as_ref()
                            .map(|p| p
                                .iter()
                                .map(|q| q.exponent_list())
                                .collect::<Vec<_>>()
                                .join(";"))
                            .unwrap_or_else(|| "default".into())
                    ),
                ));
            }
            let doc = emit_report_with_header(&reports, base.format(), &header);
            write_out(base.output.as_deref(), &doc)
        }
        Command::VerifyTable1 => {
            let checks = verify_table1();
            print!("{}", format_table1_checks(&checks));
            let failed = checks.iter().filter(|c| !c.passed()).count();
            if failed > 0 {
                return Err(Failure::Regression(format!(
                    "{failed} reference rows failed"
                )));
            }
            println!("{} rows verified", checks.len());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "default".into())
}
