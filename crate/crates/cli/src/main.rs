mod bench;
mod io;

use anyhow::{bail, Context, Result};
use bench::{BenchConfig, Flow, Format, Outcome};
use clap::{Args, Parser, Subcommand};
use revamp::area::{map_lut_graph, map_minimal, AreaError};
use revamp::delay::map_delay;
use revamp::isa::{write_asm, Program};
use revamp::lut::{cover_klut, MIN_K};
use revamp::netlist::{aig_to_mig, normalize_mig, NetworkKind};
use revamp::report::MappingReport;
use revamp::simulator::{grid_dump, read_outputs, run, run_traced};
use revamp::verifier::{check_equivalence, CheckMode, EXHAUSTIVE_LIMIT};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

#[derive(Parser)]
#[command(name = "revamp", version, about = "Technology mapping and simulation for a ReRAM crossbar machine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cover an AIG with k-input LUTs and print the LUT graph as JSON.
    Cover {
        #[arg(long)]
        k: usize,
        aig: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Map an AIG with the area-constrained flow.
    MapArea {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        cols: usize,
        /// On an infeasible layout, retry with smaller k down to 2.
        #[arg(long)]
        auto_k: bool,
        netlist: PathBuf,
        #[command(flatten)]
        out: MapOutput,
    },
    /// Map a MIG (or AIG, converted first) with the delay-oriented flow.
    MapDelay {
        #[arg(long)]
        cols: usize,
        netlist: PathBuf,
        #[command(flatten)]
        out: MapOutput,
    },
    /// Map a single-output MIG onto two bitlines.
    MapMinimal {
        netlist: PathBuf,
        #[command(flatten)]
        out: MapOutput,
    },
    /// Run a program on input vectors and print the outputs.
    Simulate {
        program: PathBuf,
        /// One vector of 0/1 characters per line; all zeros if omitted.
        #[arg(long)]
        inputs: Option<PathBuf>,
        /// Write per-instruction traces (one per vector) as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Print the crossbar after every Apply for the first vector.
        #[arg(long)]
        grid: bool,
    },
    /// Check a program against a netlist. Exit code 0 on equivalence, 1 on a mismatch.
    Verify {
        netlist: PathBuf,
        program: PathBuf,
        #[arg(long, conflicts_with = "random")]
        exhaustive: bool,
        /// Number of random vectors.
        #[arg(long)]
        random: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print a program in assembly form.
    Disassemble { program: PathBuf },
    /// Map, verify and tabulate a corpus over a configuration matrix.
    Bench(BenchArgs),
}

#[derive(Args)]
struct MapOutput {
    /// Program file; `.json` writes JSON, anything else the binary container.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Report JSON file; printed to stdout when omitted.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of `.aag`/`.mig` files; the built-in corpus when unset.
    #[arg(long, env = "REVAMP_CORPUS")]
    corpus: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_values_t = [16])]
    rows: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [16])]
    cols: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [4])]
    k: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values = ["area", "delay"])]
    flow: Vec<Flow>,
    /// Fixed device count for area-flow layouts; rows become budget / cols.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long, default_value_t = 60)]
    limit_seconds: u64,
    /// Random vectors for circuits beyond the exhaustive limit.
    #[arg(long, default_value_t = 10_000)]
    vectors: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

/// Writes to stdout; a closed pipe (e.g. `| head`) ends output quietly.
fn print_out(text: &str) -> Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn emit_mapping(program: &Program, report: &MappingReport, out: &MapOutput) -> Result<()> {
    if let Some(p) = &out.output {
        io::save_program(p, program)?;
    }
    match &out.report {
        Some(p) => io::write_text(p, &report.to_json())?,
        None => print_out(&format!("{}\n", report.to_json()))?,
    }
    eprintln!(
        "{} flow: {} instructions ({} Apply, {} Read), {} cycles on {}x{}",
        report.flow, report.i_total, report.i_a, report.i_r, report.cycles, report.s_d, report.w_d
    );
    Ok(())
}

fn map_area_cmd(k: usize, rows: usize, cols: usize, auto_k: bool, netlist: &Path, out: &MapOutput) -> Result<()> {
    let net = io::load_netlist(netlist)?;
    let ks: Vec<usize> = if auto_k { (MIN_K..=k).rev().collect() } else { vec![k] };
    let mut last = None;
    for k in ks {
        let g = cover_klut(&net, k)?;
        match map_lut_graph(&g, rows, cols) {
            Ok((program, report)) => return emit_mapping(&program, &report, out),
            Err(e @ AreaError::Infeasible { .. }) if auto_k => {
                eprintln!("k = {k}: {e}");
                last = Some(e);
            }
            Err(e) => return Err(e.into()),
        }
    }
    Err(last.map(Into::into).unwrap_or_else(|| anyhow::anyhow!("no k to try")))
}

fn simulate_cmd(program: &Path, inputs: Option<&Path>, trace: Option<&Path>, grid: bool) -> Result<()> {
    let p = io::load_program(program)?;
    let vectors = match inputs {
        Some(f) => io::parse_vectors(&std::fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?, p.inputs.len())?,
        None => vec![vec![false; p.inputs.len()]],
    };
    let mut text = String::new();
    if grid {
        if let Some(v) = vectors.first() {
            text.push_str(&grid_dump(&p, v)?);
        }
    }
    let names: Vec<&str> = p.result_locations.iter().map(|r| r.name.as_str()).collect();
    text.push_str(&format!("# inputs: {}\n# outputs: {}\n", p.inputs.join(" "), names.join(" ")));
    let mut traces = Vec::new();
    for v in &vectors {
        let state = if trace.is_some() {
            let (s, t) = run_traced(&p, v)?;
            traces.push(t);
            s
        } else {
            run(&p, v)?
        };
        text.push_str(&format!("{} {}\n", io::bits_string(v), io::bits_string(&read_outputs(&state, &p))));
    }
    print_out(&text)?;
    if let Some(t) = trace {
        io::write_text(t, &serde_json::to_string_pretty(&traces)?)?;
    }
    eprintln!("{} cycles per run", p.cycles());
    Ok(())
}

fn verify_cmd(netlist: &Path, program: &Path, exhaustive: bool, random: Option<u64>, seed: u64) -> Result<bool> {
    let net = io::load_netlist(netlist)?;
    let p = io::load_program(program)?;
    let mode = match random {
        Some(n) => CheckMode::Random { vectors: n, seed },
        None if exhaustive || net.num_pis() <= EXHAUSTIVE_LIMIT => CheckMode::Exhaustive,
        None => CheckMode::Random { vectors: 10_000, seed },
    };
    let res = check_equivalence(&net, &p, mode)?;
    print_out(&format!("{}\n", res.to_json()))?;
    Ok(res.passed)
}

fn bench_cmd(a: BenchArgs) -> Result<bool> {
    let corpus = match &a.corpus {
        Some(dir) => bench::load_corpus(dir)?,
        None => revamp::generators::small_corpus(),
    };
    let cfg = BenchConfig {
        flows: a.flow,
        ks: a.k,
        rows: a.rows,
        cols: a.cols,
        budget: a.budget,
        limit: Duration::from_secs(a.limit_seconds),
        vectors: a.vectors,
        seed: a.seed,
    };
    let results = bench::run_bench(&corpus, &cfg);
    let mut rows = Vec::new();
    let mut ok = true;
    for (job, outcome) in results {
        let name = &corpus[job.bench].0;
        match outcome {
            Outcome::Row(r) => rows.push(r),
            Outcome::Skipped(why) => eprintln!("skip {name} {:?} {job:?}: {why}", job.flow),
            Outcome::Failed(why) => {
                eprintln!("FAIL {name} {:?} {job:?}: {why}", job.flow);
                ok = false;
            }
        }
    }
    match &a.output {
        Some(p) => {
            let f = std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
            bench::write_rows(&rows, a.format, f)?;
        }
        None => {
            let mut buf = Vec::new();
            bench::write_rows(&rows, a.format, &mut buf)?;
            print_out(&String::from_utf8(buf)?)?;
        }
    }
    for flow in [Flow::Area, Flow::Delay, Flow::Minimal] {
        let s: Vec<f64> = rows.iter().filter(|r| r.flow == flow).map(|r| r.speedup).collect();
        if !s.is_empty() {
            eprintln!("{flow:?}: {} rows, mean speedup over D_P* {:.2}x", s.len(), s.iter().sum::<f64>() / s.len() as f64);
        }
    }
    Ok(ok)
}

fn execute(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Cover { k, aig, output } => {
            let net = io::load_netlist(&aig)?;
            if net.kind() != NetworkKind::Aig {
                bail!("cover expects an AIG");
            }
            let json = io::lut_graph_json(&cover_klut(&net, k)?);
            match output {
                Some(p) => io::write_text(&p, &json)?,
                None => print_out(&format!("{json}\n"))?,
            }
        }
        Command::MapArea { k, rows, cols, auto_k, netlist, out } => map_area_cmd(k, rows, cols, auto_k, &netlist, &out)?,
        Command::MapDelay { cols, netlist, out } => {
            let (program, report) = map_delay(&io::load_netlist(&netlist)?, cols)?;
            emit_mapping(&program, &report, &out)?;
        }
        Command::MapMinimal { netlist, out } => {
            let net = io::load_netlist(&netlist)?;
            let mig = match net.kind() {
                NetworkKind::Mig => normalize_mig(&net)?,
                NetworkKind::Aig => normalize_mig(&aig_to_mig(&net)?)?,
            };
            let (program, report) = map_minimal(&mig)?;
            emit_mapping(&program, &report, &out)?;
        }
        Command::Simulate { program, inputs, trace, grid } => simulate_cmd(&program, inputs.as_deref(), trace.as_deref(), grid)?,
        Command::Verify { netlist, program, exhaustive, random, seed } => {
            return verify_cmd(&netlist, &program, exhaustive, random, seed);
        }
        Command::Disassemble { program } => {
            let p = io::load_program(&program)?;
            let mut text = format!("# S_D {} w_D {}\n# inputs {}\n", p.config.s_d, p.config.w_d, p.inputs.join(" "));
            for r in &p.result_locations {
                text.push_str(&format!("# output {} w{} b{}\n", r.name, r.word, r.bit));
            }
            text.push_str(&write_asm(&p.instructions));
            print_out(&text)?;
        }
        Command::Bench(a) => return bench_cmd(a),
    }
    Ok(true)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
