//! `cmi`: batch driver for the CMI-spreading experiments.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{bail, Context};
use clap::{Args, CommandFactory, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use cmi_core::analytics::normalized_samples;
use cmi_core::bell::DEFAULT_CANDIDATE_BUDGET;
use cmi_core::circuits::{partition_cuts, run_ensemble};
use cmi_core::{
    analytic_xdec_rescaled, collapse_curve, distill, find_bell_candidates, four_block_experiment,
    length_deviation_stats, oracle_suite, rng, toy_four_qudit, verify_distillation,
    CircuitConfig, Channel, Error, Evolution, Region, SpreadingField, XdecOptions,
};

mod config;

#[derive(Parser, Debug)]
#[command(name = "cmi", version, about = "Conditional mutual information in noisy random Clifford circuits")]
#[command(args_override_self = true)]
struct Cli {
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "CMI_THREADS")]
    threads: Option<usize>,
    /// Flat key=value file whose keys mirror flag names; flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Coarse-grained brickwork sweep; writes the averaged CMI field.
    Spread(SpreadArgs),
    /// Four-block example, one CSV row per seed.
    Fourblock(FourblockArgs),
    /// Length-deviation statistics of random stabilizer states.
    Ansatz(AnsatzArgs),
    /// x_dec extraction and rescaling over a list of error rates.
    Collapse(CollapseArgs),
    /// Bell-pair distillation on near-critical states.
    Bell(BellArgs),
    /// Four-qubit Haar example with both channel kinds.
    Toy(ToyArgs),
    /// Stabilizer engine against dense density matrices.
    OracleCheck(OracleArgs),
}

#[derive(Args, Debug, Serialize)]
struct SpreadArgs {
    #[arg(long, default_value_t = 256)]
    n_blocks: usize,
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long)]
    p: f64,
    #[arg(long)]
    t_max: usize,
    #[arg(long, default_value_t = 100)]
    realizations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated separations; defaults to 1..N/2.
    #[arg(long, value_delimiter = ',')]
    x_values: Option<Vec<usize>>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct FourblockArgs {
    #[arg(long, default_value_t = 64)]
    m: usize,
    #[arg(long, default_value_t = 0.25)]
    p: f64,
    #[arg(long, default_value_t = 20)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct AnsatzArgs {
    #[arg(long, default_value_t = 128)]
    n: usize,
    #[arg(long, default_value_t = 128)]
    k: usize,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct CollapseArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    p_list: Vec<f64>,
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = 256)]
    n_blocks: usize,
    #[arg(long, default_value_t = 100)]
    realizations: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest rescaled time 2pt to fit.
    #[arg(long, default_value_t = 0.6)]
    t_tilde_max: f64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct BellArgs {
    #[arg(long, default_value_t = 32)]
    n_blocks: usize,
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = 0.03125)]
    p: f64,
    /// Timestep of the state; defaults to t_c - 1.
    #[arg(long)]
    t: Option<usize>,
    /// Separation in blocks; defaults to N/4.
    #[arg(long)]
    x: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_CANDIDATE_BUDGET)]
    budget: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct ToyArgs {
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1")]
    p_grid: Vec<f64>,
    #[arg(long, default_value_t = 64)]
    seeds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug, Serialize)]
struct OracleArgs {
    #[arg(long, default_value_t = 200)]
    circuits: usize,
    #[arg(long, default_value_t = 6)]
    max_n: usize,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report file; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct RunManifest<'a, C: Serialize> {
    subcommand: &'a str,
    config: &'a C,
    seed: u64,
    version: &'static str,
    started_unix: f64,
    finished_unix: f64,
    outputs: Vec<String>,
}

fn now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

fn write_file(path: &Path, body: &str) -> anyhow::Result<()> {
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

/// Writes `<first output>.manifest.json` describing the run.
fn write_manifest<C: Serialize>(
    name: &str,
    config: &C,
    seed: u64,
    started: f64,
    outputs: &[PathBuf],
) -> anyhow::Result<()> {
    let manifest = RunManifest {
        subcommand: name,
        config,
        seed,
        version: env!("CARGO_PKG_VERSION"),
        started_unix: started,
        finished_unix: now(),
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let mut path = outputs[0].clone().into_os_string();
    path.push(".manifest.json");
    write_file(Path::new(&path), &serde_json::to_string_pretty(&manifest)?)
}

fn spread(a: &SpreadArgs) -> anyhow::Result<()> {
    let started = now();
    let cfg = CircuitConfig {
        n_blocks: a.n_blocks,
        m: a.m,
        p: a.p,
        t_max: a.t_max,
        x_values: a
            .x_values
            .clone()
            .unwrap_or_else(|| CircuitConfig::full_x_grid(a.n_blocks)),
        realizations: a.realizations,
        seed: a.seed,
    };
    let records = run_ensemble(&cfg)?;
    let field = SpreadingField::from_records(&cfg, &records);
    write_file(&a.out, &field.to_csv())?;
    write_manifest("spread", a, a.seed, started, std::slice::from_ref(&a.out))
}

fn fourblock(a: &FourblockArgs) -> anyhow::Result<()> {
    let started = now();
    let rows = (0..a.seeds)
        .into_par_iter()
        .map(|i| four_block_experiment(a.m, a.p, &mut rng::stream(a.seed, i as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = String::from("index,m,p,mi_ab,mi_bc,mi_a_bc,cmi\n");
    for (i, r) in rows.iter().enumerate() {
        csv += &format!("{i},{},{},{},{},{},{}\n", a.m, a.p, r.mi_ab, r.mi_bc, r.mi_a_bc, r.cmi);
    }
    write_file(&a.out, &csv)?;
    let mean = |f: fn(&cmi_core::FourBlockRecord) -> usize| {
        rows.iter().map(|r| f(r) as f64).sum::<f64>() / (rows.len().max(1) * a.m) as f64
    };
    eprintln!(
        "mean/m: I(A:B)={} I(A:BC)={} I(A:C|B)={}",
        mean(|r| r.mi_ab),
        mean(|r| r.mi_a_bc),
        mean(|r| r.cmi)
    );
    write_manifest("fourblock", a, a.seed, started, std::slice::from_ref(&a.out))
}

fn ansatz(a: &AnsatzArgs) -> anyhow::Result<()> {
    let started = now();
    let stats = length_deviation_stats(a.samples, a.n, a.k, a.seed)?;
    write_file(&a.out, &stats.to_csv())?;
    eprintln!(
        "mean |delta| = {}, P(|delta| > 10) = {}",
        stats.mean_abs_delta(),
        stats.tail_fraction(10)
    );
    write_manifest("ansatz", a, a.seed, started, std::slice::from_ref(&a.out))
}

fn collapse(a: &CollapseArgs) -> anyhow::Result<()> {
    let started = now();
    fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let x_values = CircuitConfig::full_x_grid(a.n_blocks);
    let opts = XdecOptions::default();
    let mut outputs = Vec::new();
    let mut merged = String::from("p,m,t,t_tilde,x_dec_tilde,x_dec_tilde_stderr,analytic_x_dec_tilde\n");
    for &p in &a.p_list {
        if !(p > 0.0 && p < 0.5) {
            return Err(Error::InvalidConfig(format!("p = {p} outside (0, 1/2)")).into());
        }
        let t_max = (a.t_tilde_max / (2.0 * p)).floor() as usize;
        let cfg = CircuitConfig {
            n_blocks: a.n_blocks,
            m: a.m,
            p,
            t_max: t_max + 1,
            x_values: x_values.clone(),
            realizations: a.realizations,
            seed: a.seed,
        };
        let records = run_ensemble(&cfg)?;
        let samples = normalized_samples::<f64>(&records, a.m);
        let t_values: Vec<usize> = (1..=t_max).collect();
        let curve = collapse_curve(p, a.m, a.n_blocks, &x_values, &samples, &t_values, &opts)?;
        let path = a.out_dir.join(format!("collapse_p{p}.csv"));
        write_file(&path, &curve.to_csv())?;
        outputs.push(path);
        for pt in &curve.points {
            if let Some(xt) = pt.x_dec_tilde(p) {
                merged += &format!(
                    "{p},{},{},{},{xt},{},{}\n",
                    a.m,
                    pt.t,
                    pt.t_tilde,
                    pt.x_dec_tilde_stderr,
                    analytic_xdec_rescaled(pt.t_tilde)?
                );
            }
        }
    }
    let path = a.out_dir.join("collapse_rescaled.csv");
    write_file(&path, &merged)?;
    outputs.insert(0, path);
    write_manifest("collapse", a, a.seed, started, &outputs)
}

fn bell(a: &BellArgs) -> anyhow::Result<()> {
    let started = now();
    if !(a.p > 0.0 && a.p < 0.5) {
        return Err(Error::InvalidConfig(format!("p = {} outside (0, 1/2)", a.p)).into());
    }
    let t_c = (1.0 / (2.0 * a.p)).round() as usize;
    let t = a.t.unwrap_or(t_c.saturating_sub(1));
    let x = a.x.unwrap_or(a.n_blocks / 4);
    if x == 0 || x >= a.n_blocks / 2 {
        return Err(Error::InvalidConfig(format!("x = {x} outside [1, {})", a.n_blocks / 2)).into());
    }
    let n = a.n_blocks * a.m;
    let (xl, xr) = partition_cuts(a.n_blocks, a.m, x);
    let (ra, rb, rc) = (Region::range(0..xl), Region::range(xl..xr), Region::range(xr..n));
    let rows = (0..a.trials)
        .into_par_iter()
        .map(|i| -> anyhow::Result<String> {
            let mut ev = Evolution::new(a.n_blocks, a.m, a.p, a.seed, i as u64)?;
            for _ in 0..=t {
                ev.step()?;
            }
            let tab = ev.state().tableau();
            let plan = find_bell_candidates(tab, &ra, &rb, &rc, a.budget)?;
            // Measurement streams sit past every realization's gate/noise pair.
            let mut mrng = rng::stream(a.seed, (a.trials + i) as u64 * 2);
            let (post, n_bell) = distill(tab, &plan, &mut mrng)?;
            let c = verify_distillation(tab, &post, &ra, &rb, &rc, n_bell)?;
            Ok(format!(
                "{i},{},{},{},{},{},{},{},{}\n",
                tab.k(),
                c.cmi_pre,
                n_bell,
                c.mi_ac_post,
                c.witness_pairs,
                c.clauses.mutual_information,
                c.clauses.witness,
                c.clauses.cmi_bound
            ))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    let mut csv =
        String::from("trial,k,cmi_pre,n_bell,mi_ac_post,witness_pairs,clause_mi,clause_witness,clause_cmi_bound\n");
    csv.extend(rows);
    write_file(&a.out, &csv)?;
    write_manifest("bell", a, a.seed, started, std::slice::from_ref(&a.out))
}

fn toy(a: &ToyArgs) -> anyhow::Result<()> {
    let started = now();
    let mut csv = String::from("p,channel,seed_count,mean_cmi2,stderr\n");
    for &p in &a.p_grid {
        for ch in [Channel::Depolarizing, Channel::Heralded] {
            let v = (0..a.seeds)
                .into_par_iter()
                .map(|i| toy_four_qudit(p, ch, &mut rng::stream(a.seed, i as u64)))
                .collect::<Result<Vec<f64>, _>>()?;
            let (mean, se) = cmi_core::circuits::mean_stderr(&v);
            csv += &format!("{p},{ch},{},{mean},{se}\n", a.seeds);
        }
    }
    write_file(&a.out, &csv)?;
    write_manifest("toy", a, a.seed, started, std::slice::from_ref(&a.out))
}

fn oracle_check(a: &OracleArgs) -> anyhow::Result<()> {
    let started = now();
    let report = oracle_suite(a.circuits, a.max_n, a.seed, a.tol)?;
    let body = serde_json::to_string_pretty(&report)?;
    match &a.out {
        Some(out) => {
            write_file(out, &body)?;
            write_manifest("oracle-check", a, a.seed, started, std::slice::from_ref(out))?;
        }
        None => println!("{body}"),
    }
    if !report.passed(a.tol) {
        return Err(Error::Invariant(format!(
            "{} entropy and {} endpoint mismatches",
            report.entropy_failures, report.endpoint_failures
        ))
        .into());
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!(Error::InvalidConfig("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match &cli.command {
        Command::Spread(a) => spread(a),
        Command::Fourblock(a) => fourblock(a),
        Command::Ansatz(a) => ansatz(a),
        Command::Collapse(a) => collapse(a),
        Command::Bell(a) => bell(a),
        Command::Toy(a) => toy(a),
        Command::OracleCheck(a) => oracle_check(a),
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Invariant(_)) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let argv = match config::merge_config(&argv, &Cli::command()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
