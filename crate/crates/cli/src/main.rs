use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rte_rbm::bench::output::{self, fmt_f64};
use rte_rbm::bench::{
    evaluate_errors, lookup, parse_size, registry, run_online, run_warm_start, test_set,
    Experiment, ExperimentPlan, OnlinePlan, Preset, ReferenceSet, WarmStartPlan,
};
use rte_rbm::dg::FomSystem;
use rte_rbm::greedy::InitialParameter;
use rte_rbm::rom::{LspgMode, RomKind};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

const THREADS_ENV: &str = "RTE_RBM_THREADS";

#[derive(Parser)]
#[command(
    name = "rte-rbm",
    version,
    about = "Reduced basis models for parametric radiative transfer"
)]
struct Cli {
    /// Worker threads (overridden by RTE_RBM_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a reduced model and write its error curves and artifacts.
    Train(TrainArgs),
    /// Solve a trained model at one parameter.
    Predict(PredictArgs),
    /// Errors of a trained model on a fresh random test set.
    Evaluate(EvaluateArgs),
    /// Online against full-order solve times over several mesh sizes.
    BenchOnline(OnlineArgs),
    /// Source iteration started from reduced scalar fluxes.
    DsaStudy(DsaArgs),
    /// Print the registered benchmarks as JSON.
    RegistryDump(DumpArgs),
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    problem: String,
    #[arg(long, default_value = "pg-res")]
    rom: RomKind,
    /// Candidates confirmed by full-order solves per step.
    #[arg(long, default_value_t = 1)]
    kpoint: usize,
    /// Spectral ratio tolerance; defaults to the benchmark's.
    #[arg(long)]
    tol_sratio: Option<f64>,
    #[arg(long, default_value_t = 100)]
    max_m: usize,
    /// `center` or a comma separated training point.
    #[arg(long, default_value = "center")]
    mu1: String,
    #[arg(long, default_value = "standard")]
    variant: LspgMode,
    #[arg(long, default_value = "quick")]
    preset: Preset,
    /// Seed of the random test set.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Test set size; defaults to the benchmark's.
    #[arg(long)]
    test_count: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    artifacts: PathBuf,
    #[arg(long)]
    mu: String,
    /// Use only the leading basis vectors.
    #[arg(long)]
    m: Option<usize>,
    /// Write the full-order coordinate vector to this file.
    #[arg(long)]
    lift: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    artifacts: PathBuf,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    test_count: Option<usize>,
    /// Directory for evaluate.csv; defaults to the artifacts directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OnlineArgs {
    /// Run directory whose problem and seed are reused.
    #[arg(long)]
    artifacts: Option<PathBuf>,
    #[arg(long, default_value = "lattice-2d")]
    problem: String,
    /// Full-order sizes such as `212k,847k,1.9M`; each maps to the nearest refinement.
    #[arg(long, default_value = "212k,847k,1.9M")]
    n_list: String,
    #[arg(long, default_value_t = 10)]
    repeat: usize,
    /// Reduced basis size.
    #[arg(long, default_value_t = 15)]
    max_m: usize,
    #[arg(long, default_value_t = 20)]
    test_count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DsaArgs {
    #[arg(long, default_value = "pin-cell-2d")]
    problem: String,
    /// Cells per axis of the target mesh; defaults to twice the quick preset.
    #[arg(long)]
    fine_cells: Option<usize>,
    /// Cells per axis of the coarse training mesh; defaults to the quick preset.
    #[arg(long)]
    coarse_cells: Option<usize>,
    #[arg(long, default_value = "5,10,15")]
    m_list: String,
    #[arg(long, default_value_t = 20)]
    test_count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DumpArgs {
    /// Also write the JSON to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<T>()
                .map_err(|_| anyhow::anyhow!("bad {what} '{v}' in '{s}'"))
        })
        .collect()
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => bail!("{THREADS_ENV} must be a positive integer, got '{v}'"),
        },
        Err(_) => match flag {
            Some(0) => bail!("--threads must be positive"),
            t => Ok(t),
        },
    }
}

fn train(a: TrainArgs) -> Result<()> {
    let mut plan = ExperimentPlan::new(&a.problem, a.rom);
    plan.preset = a.preset;
    plan.mode = a.variant;
    plan.tol_sratio = a.tol_sratio;
    plan.max_m = a.max_m;
    plan.k = a.kpoint;
    plan.seed = a.seed;
    plan.test_count = a.test_count;
    plan.initial = match a.mu1.trim() {
        "center" => InitialParameter::Center,
        s => InitialParameter::Explicit(parse_list(s, "parameter")?),
    };
    let exp = Experiment::run(&plan)?;
    output::write_run(&a.out, &exp).with_context(|| format!("writing {}", a.out.display()))?;
    let log = &exp.trained.log;
    println!(
        "{} {}: N = {}, m = {}, {} full-order solves, {:?}",
        exp.benchmark.name,
        plan.kind,
        exp.system.len(),
        exp.trained.basis.dim(),
        log.fom_solves,
        log.termination
    );
    if let Some(last) = exp.rows.last() {
        println!(
            "test errors at m = {}: L2 {:.3e}, residual {:.3e}",
            last.m, last.e_l2_test, last.e_res_test
        );
    }
    Ok(())
}

fn predict(a: PredictArgs) -> Result<()> {
    let art = output::load_run(&a.artifacts)?;
    let mu: Vec<f64> = parse_list(&a.mu, "parameter")?;
    let b = lookup(&art.meta.plan.problem)?;
    if !b.contains(&mu) {
        bail!("{mu:?} lies outside the parameter set of {}", b.name);
    }
    let model = match a.m {
        Some(m) if m == 0 || m > art.model.dim() => bail!("m must lie in 1..={}", art.model.dim()),
        Some(m) => art.model.truncated(m),
        None => art.model,
    };
    let e = model.evaluate(&mu, &art.basis)?;
    println!("j,c");
    for (j, c) in e.c.iter().enumerate() {
        println!("{},{}", j + 1, fmt_f64(*c));
    }
    println!("# residual {}", fmt_f64(e.residual));
    if let Some(path) = a.lift {
        let f = art.basis.lift(e.c.as_slice())?;
        let mut w = BufWriter::new(
            File::create(&path).with_context(|| format!("creating {}", path.display()))?,
        );
        for x in &f {
            writeln!(w, "{}", fmt_f64(*x))?;
        }
        w.flush()?;
        println!("# wrote {} values to {}", f.len(), path.display());
    }
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    let art = output::load_run(&a.artifacts)?;
    let b = lookup(&art.meta.plan.problem)?;
    let sys = FomSystem::assemble(&b.problem, &art.meta.discretization)?;
    let count = a.test_count.unwrap_or(b.test_count);
    let refs = ReferenceSet::solve(&sys, &b.solver, test_set(&b, count, a.seed)?);
    let errs = evaluate_errors(&sys, &art.model, &art.basis, &refs);
    let dir = a.out.unwrap_or(a.artifacts);
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("evaluate.csv");
    let mut w = BufWriter::new(File::create(&path)?);
    writeln!(w, "m,e_l2_test,e_res_test,max_cond")?;
    for m in 1..=art.model.dim() {
        writeln!(
            w,
            "{m},{},{},{}",
            fmt_f64(errs.max_l2(m)),
            fmt_f64(errs.max_residual(m)),
            fmt_f64(errs.max_condition(m))
        )?;
    }
    w.flush()?;
    let m = art.model.dim();
    println!(
        "{} test points (seed {}): at m = {m} L2 {:.3e}, residual {:.3e}; wrote {}",
        count,
        a.seed,
        errs.max_l2(m),
        errs.max_residual(m),
        path.display()
    );
    Ok(())
}

fn bench_online(a: OnlineArgs) -> Result<()> {
    let (problem, seed) = match &a.artifacts {
        Some(dir) => {
            let art = output::load_run(dir)?;
            (art.meta.plan.problem, art.meta.plan.seed)
        }
        None => (a.problem.clone(), a.seed),
    };
    let sizes = a
        .n_list
        .split(',')
        .map(parse_size)
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut plan = OnlinePlan::with_sizes(&problem, &sizes)?;
    plan.repeat = a.repeat;
    plan.m = a.max_m;
    plan.test_count = a.test_count;
    plan.seed = seed;
    let levels = run_online(&plan)?;

    print!("{:<8}", "method");
    for l in &levels {
        print!("{:>14}", format!("N={}", l.full_order_len));
    }
    println!();
    print!("{:<8}", "FOM");
    for l in &levels {
        print!("{:>14.4e}", l.fom_seconds);
    }
    println!();
    for (i, kind) in plan.kinds.iter().enumerate() {
        print!("{:<8}", kind.to_string());
        for l in &levels {
            print!("{:>14.4e}", l.roms[i].seconds);
        }
        println!();
    }
    if let Some(dir) = a.out {
        std::fs::create_dir_all(&dir)?;
        let mut w = BufWriter::new(File::create(dir.join("online.csv"))?);
        writeln!(w, "n,method,m,seconds")?;
        for l in &levels {
            writeln!(w, "{},fom,,{}", l.full_order_len, fmt_f64(l.fom_seconds))?;
            for r in &l.roms {
                writeln!(
                    w,
                    "{},{},{},{}",
                    l.full_order_len,
                    r.kind,
                    r.m,
                    fmt_f64(r.seconds)
                )?;
            }
        }
        w.flush()?;
    }
    Ok(())
}

fn dsa_study(a: DsaArgs) -> Result<()> {
    let mut plan = WarmStartPlan::new(&a.problem)?;
    if let Some(n) = a.fine_cells {
        plan.fine.cells = [n, n];
    }
    if let Some(n) = a.coarse_cells {
        plan.coarse.cells = [n, n];
    }
    plan.m_values = parse_list(&a.m_list, "basis size")?;
    plan.test_count = a.test_count;
    plan.seed = a.seed;
    let r = run_warm_start(&plan)?;
    println!(
        "mean source iterations over {} test points (N = {}, coarse N = {})",
        plan.test_count, r.fine_len, r.coarse_len
    );
    println!("{:<10}{:>10}{:>10}", "guess", "m", "mean");
    println!("{:<10}{:>10}{:>10.2}", "zero", "-", r.zero.mean);
    for (label, rows) in [("fine", &r.fine), ("coarse", &r.coarse)] {
        for (m, s) in rows {
            println!("{label:<10}{m:>10}{:>10.2}", s.mean);
        }
    }
    if let Some(dir) = a.out {
        write_dsa(&dir, &r)?;
    }
    Ok(())
}

fn write_dsa(dir: &Path, r: &rte_rbm::bench::WarmStartReport) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = BufWriter::new(File::create(dir.join("dsa_study.csv"))?);
    writeln!(w, "guess,m,mean_iterations,max_iterations")?;
    writeln!(w, "zero,0,{},{}", fmt_f64(r.zero.mean), r.zero.max)?;
    for (label, rows) in [("fine", &r.fine), ("coarse", &r.coarse)] {
        for (m, s) in rows {
            writeln!(w, "{label},{m},{},{}", fmt_f64(s.mean), s.max)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn registry_dump(a: DumpArgs) -> Result<()> {
    let text = serde_json::to_string_pretty(&registry())?;
    println!("{text}");
    if let Some(path) = a.out {
        std::fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = thread_count(cli.threads)? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
        log::info!("using {n} worker threads");
    }
    match cli.command {
        Command::Train(a) => train(a),
        Command::Predict(a) => predict(a),
        Command::Evaluate(a) => evaluate(a),
        Command::BenchOnline(a) => bench_online(a),
        Command::DsaStudy(a) => dsa_study(a),
        Command::RegistryDump(a) => registry_dump(a),
    }
}
