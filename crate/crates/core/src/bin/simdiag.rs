use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use simdiag::bench::{bench_hamiltonian, BenchRecord};
use simdiag::dense;
use simdiag::diagonalize::DiagonalGroupDoc;
use simdiag::error::{Error, Result};
use simdiag::evolution::{
    evolve_baseline, evolve_grouped, evolve_with_trace, EvolutionPlan, GroupedHamiltonian, Method,
    TermOrder, TraceRow, DEFAULT_DT,
};
use simdiag::hamiltonian::{greedy_partition, partition_stats, Hamiltonian};
use simdiag::models::{syk_candidate_count, ModelKind, ModelSpec};
use simdiag::statevec::StateVector;

const EXIT_INPUT: u8 = 2;
const EXIT_INVARIANT: u8 = 3;
/// Deficit `1 - |<a|b>|` above this fails `run --verify` and `verify`.
const VERIFY_TOLERANCE: f64 = 1e-10;

#[derive(Parser)]
#[command(name = "simdiag", version, about = "Trotter simulation with diagonalized commuting groups")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "SIMDIAG_THREADS")]
    threads: Option<usize>,

    /// Refuse state vectors above this many qubits.
    #[arg(long, global = true, env = "SIMDIAG_MAX_QUBITS", default_value_t = 26)]
    max_qubits: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a model Hamiltonian in the text format.
    Gen(GenArgs),
    /// Greedy partition into commuting groups.
    Partition(PartitionArgs),
    /// Synthesize diagonalizing circuits for every group (JSON).
    Diag(DiagArgs),
    /// Trotter evolution with an energy trace.
    Run(RunArgs),
    /// Time one Trotter step, baseline against grouped.
    Bench(BenchArgs),
    /// Check partition, diagonalization and driver equivalence.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Tfim,
    Syk,
}

impl From<ModelArg> for ModelKind {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Tfim => ModelKind::Tfim,
            ModelArg::Syk => ModelKind::Syk,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Baseline,
    Grouped,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Input,
    GroupMajor,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Zero,
    Plus,
    Random,
}

/// Hamiltonian file, given positionally or with `--hamiltonian`.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    #[arg(value_name = "FILE")]
    file: Option<PathBuf>,
    #[arg(long = "hamiltonian", value_name = "PATH")]
    flag: Option<PathBuf>,
}

impl Source {
    fn path(&self) -> &Path {
        self.file.as_deref().or(self.flag.as_deref()).expect("clap enforces one")
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    #[arg(long)]
    qubits: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PartitionArgs {
    #[command(flatten)]
    source: Source,
    /// Write the group assignment as JSON here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiagArgs {
    #[command(flatten)]
    source: Source,
    /// Output file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Total evolution time.
    #[arg(long = "t", default_value_t = 1.0)]
    time: f64,
    /// Trotter steps; defaults to t / 0.01.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, value_enum, default_value = "grouped")]
    method: MethodArg,
    /// Term order of the baseline.
    #[arg(long, value_enum, default_value = "input")]
    order: OrderArg,
    #[arg(long, value_enum, default_value = "zero")]
    init: InitArg,
    /// Seed of the random initial state.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also run the group-major baseline and report the fidelity.
    #[arg(long)]
    verify: bool,
    /// Trace CSV destination (stdout if omitted).
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Dump the final state as raw little-endian (re, im) pairs.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    model: ModelArg,
    /// Qubit count or inclusive range such as `8-12`.
    #[arg(long)]
    qubits: String,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV destination (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        })?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(path: Option<&Path>, value: &impl Serialize) -> Result<()> {
    let mut out = output(path)?;
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(|e| Error::InvalidInput(format!("JSON encoding failed: {e}")))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

fn check_cap(n: usize, cap: usize) -> Result<()> {
    if n > cap {
        return Err(Error::TooManyQubits {
            n_qubits: n,
            limit: cap,
        });
    }
    Ok(())
}

fn parse_range(text: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidInput(format!("bad qubit range {text:?}"));
    let (a, b) = match text.split_once('-') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (text.trim(), text.trim()),
    };
    let lo: usize = a.parse().map_err(|_| bad())?;
    let hi: usize = b.parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn cmd_gen(a: &GenArgs) -> Result<()> {
    let h = ModelSpec {
        kind: a.model.into(),
        n_qubits: a.qubits,
        seed: a.seed,
    }
    .generate()?;
    let mut out = output(a.out.as_deref())?;
    h.write_to(&mut out)?;
    out.flush()?;
    eprintln!("{} terms on {} qubits", h.len(), h.n_qubits());
    if let ModelArg::Syk = a.model {
        let merged = syk_candidate_count(a.qubits) - h.len();
        eprintln!("collisions = {merged}");
    }
    Ok(())
}

#[derive(Serialize)]
struct PartitionDoc {
    n_qubits: usize,
    m: usize,
    n_g: usize,
    predicted_speedup: f64,
    groups: Vec<GroupEntry>,
}

#[derive(Serialize)]
struct GroupEntry {
    group_index: usize,
    size: usize,
    term_indices: Vec<usize>,
}

fn cmd_partition(a: &PartitionArgs) -> Result<()> {
    let h = Hamiltonian::load(a.source.path())?;
    let groups = greedy_partition(&h);
    let stats = partition_stats(&groups, h.n_qubits());
    println!("m = {}", stats.n_terms);
    println!("n_g = {}", stats.n_groups);
    println!("max_group_size = {}", stats.max_group_size);
    println!("predicted_speedup = {:.4}", stats.predicted_speedup);
    let sizes: Vec<String> = groups.iter().map(|g| g.len().to_string()).collect();
    println!("group_sizes = {}", sizes.join(" "));
    if let Some(path) = &a.out {
        let doc = PartitionDoc {
            n_qubits: h.n_qubits(),
            m: stats.n_terms,
            n_g: stats.n_groups,
            predicted_speedup: stats.predicted_speedup,
            groups: groups
                .iter()
                .map(|g| GroupEntry {
                    group_index: g.group_index,
                    size: g.len(),
                    term_indices: g.term_indices.clone(),
                })
                .collect(),
        };
        write_json(Some(path), &doc)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct DiagDoc {
    n_qubits: usize,
    n_groups: usize,
    groups: Vec<DiagonalGroupDoc>,
}

fn cmd_diag(a: &DiagArgs) -> Result<()> {
    let h = Hamiltonian::load(a.source.path())?;
    let gh = GroupedHamiltonian::build(&h)?;
    let doc = DiagDoc {
        n_qubits: h.n_qubits(),
        n_groups: gh.groups.len(),
        groups: gh
            .groups
            .iter()
            .zip(&gh.diagonal)
            .map(|(g, d)| DiagonalGroupDoc::new(g, d))
            .collect(),
    };
    write_json(a.out.as_deref(), &doc)
}

fn initial_state(n: usize, init: InitArg, seed: u64) -> Result<StateVector> {
    match init {
        InitArg::Zero => StateVector::zero(n),
        InitArg::Plus => StateVector::plus(n),
        InitArg::Random => StateVector::random(n, seed),
    }
}

fn write_trace(out: &mut dyn Write, rows: &[TraceRow]) -> Result<()> {
    writeln!(out, "step,time,energy")?;
    for r in rows {
        writeln!(out, "{},{},{:.15e}", r.step, r.time, r.energy)?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_run(a: &RunArgs, cap: usize) -> Result<()> {
    let h = Hamiltonian::load(a.source.path())?;
    let n = h.n_qubits();
    check_cap(n, cap)?;
    if !a.time.is_finite() {
        return Err(Error::InvalidInput(format!("time {} is not finite", a.time)));
    }
    let steps = a
        .steps
        .unwrap_or_else(|| (a.time / DEFAULT_DT).round().max(1.0) as usize);
    let method = match a.method {
        MethodArg::Baseline => Method::Baseline,
        MethodArg::Grouped => Method::Grouped,
    };
    let order = match a.order {
        OrderArg::Input => TermOrder::Input,
        OrderArg::GroupMajor => TermOrder::GroupMajor,
    };
    let psi0 = initial_state(n, a.init, a.seed)?;
    let mut psi = psi0.clone();
    let grouped = match method {
        Method::Grouped => Some(GroupedHamiltonian::build(&h)?),
        Method::Baseline => None,
    };

    let (rows, plan) = if steps == 0 {
        let energy = simdiag::evolution::expectation(&h, &psi)?;
        eprintln!("dt = 0 (no steps)");
        (vec![TraceRow { step: 0, time: 0.0, energy }], None)
    } else {
        let plan = EvolutionPlan::new(a.time, steps, method)?.with_order(order);
        eprintln!("dt = {}", plan.dt());
        (evolve_with_trace(&h, grouped.as_ref(), &mut psi, &plan)?, Some(plan))
    };
    let mut out = output(a.csv.as_deref())?;
    write_trace(&mut out, &rows)?;

    eprintln!("method = {method}");
    eprintln!("steps = {steps}");
    eprintln!("norm = {:.15}", psi.norm());
    for (k, amp) in psi.amplitudes().iter().take(4).enumerate() {
        eprintln!("amp[{k}] = {:.15e} {:+.15e}i", amp.re, amp.im);
    }
    if let Some(path) = &a.dump {
        psi.dump(path)?;
    }
    if a.verify {
        let mut reference = psi0;
        if let Some(plan) = plan {
            let plan = EvolutionPlan {
                method: Method::Baseline,
                term_order: TermOrder::GroupMajor,
                ..plan
            };
            evolve_baseline(&h, &mut reference, &plan)?;
        }
        let fidelity = psi.fidelity(&reference)?;
        let deficit = 1.0 - fidelity;
        eprintln!("fidelity_vs_baseline = {fidelity:.15}");
        eprintln!("fidelity_deficit = {deficit:.3e}");
        if method == Method::Grouped && deficit > VERIFY_TOLERANCE {
            return Err(Error::Invariant(format!(
                "grouped evolution deviates from the group-major baseline by {deficit:.3e}"
            )));
        }
    }
    Ok(())
}

fn cmd_bench(a: &BenchArgs, cap: usize) -> Result<()> {
    let (lo, hi) = parse_range(&a.qubits)?;
    check_cap(hi, cap)?;
    let mut out = output(a.out.as_deref())?;
    writeln!(out, "{}", BenchRecord::CSV_HEADER)?;
    let kind: ModelKind = a.model.into();
    for n in lo..=hi {
        let h = ModelSpec {
            kind,
            n_qubits: n,
            seed: a.seed,
        }
        .generate()?;
        for r in bench_hamiltonian(&kind.to_string(), &h, a.repeats, DEFAULT_DT, a.seed)? {
            writeln!(out, "{}", r.csv_row())?;
        }
        out.flush()?;
    }
    Ok(())
}

fn report(ok: bool, what: &str) -> bool {
    println!("{} {what}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn cmd_verify(a: &VerifyArgs, cap: usize) -> Result<()> {
    let h = Hamiltonian::load(a.source.path())?;
    let n = h.n_qubits();
    let mut all = true;

    let groups = greedy_partition(&h);
    let commuting = groups.iter().all(|g| g.is_pairwise_commuting());
    all &= report(commuting, &format!("partition: {} groups pairwise commuting", groups.len()));

    let gh = GroupedHamiltonian::build(&h)?;
    all &= report(true, "diagonalization: every group maps to Z/I strings");

    if n <= 5 {
        let mut worst: f64 = 0.0;
        for (g, d) in gh.groups.iter().zip(&gh.diagonal) {
            worst = worst.max(dense::diagonalization_error(g, d)?);
        }
        all &= report(worst < 1e-12, &format!("dense circuit check: max deviation {worst:.2e}"));
    }

    if n <= cap.min(20) {
        let psi0 = StateVector::random(n, a.seed)?;
        let plan = EvolutionPlan::new(a.steps as f64 * DEFAULT_DT, a.steps.max(1), Method::Grouped)?
            .with_order(TermOrder::GroupMajor);
        let mut grouped = psi0.clone();
        evolve_grouped(&gh.diagonal, &mut grouped, &plan)?;
        let mut baseline = psi0;
        evolve_baseline(&h, &mut baseline, &plan)?;
        let deficit = 1.0 - grouped.fidelity(&baseline)?;
        all &= report(
            deficit < VERIFY_TOLERANCE,
            &format!("grouped vs group-major baseline: fidelity deficit {deficit:.2e}"),
        );
    }

    if all {
        Ok(())
    } else {
        Err(Error::Invariant("verification failed".into()))
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Partition(a) => cmd_partition(a),
        Command::Diag(a) => cmd_diag(a),
        Command::Run(a) => cmd_run(a, cli.max_qubits),
        Command::Bench(a) => cmd_bench(a, cli.max_qubits),
        Command::Verify(a) => cmd_verify(a, cli.max_qubits),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() {
                EXIT_INPUT
            } else {
                EXIT_INVARIANT
            })
        }
    }
}
