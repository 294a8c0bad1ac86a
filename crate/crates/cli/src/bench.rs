//! Benchmark matrix runner: maps every corpus circuit under every requested
//! flow and layout, verifies each program and tabulates the statistics.

use anyhow::{Context, Result};
use clap::ValueEnum;
use rayon::prelude::*;
use revamp::area::{map_area, map_minimal, AreaError};
use revamp::delay::{map_delay, DelayError};
use revamp::isa::Program;
use revamp::netlist::{aig_to_mig, normalize_mig, LogicNetwork, NetworkKind};
use revamp::report::{MappingReport, PLIM_CYCLES_PER_NODE};
use revamp::verifier::{check_equivalence, CheckMode, EXHAUSTIVE_LIMIT};
use serde::Serialize;
use std::path::Path;
use std::sync::{mpsc, Arc};
use std::time::Duration;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Flow {
    Area,
    Delay,
    Minimal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub benchmark: String,
    pub flow: Flow,
    pub k: Option<usize>,
    #[serde(rename = "S_D")]
    pub s_d: usize,
    #[serde(rename = "w_D")]
    pub w_d: usize,
    #[serde(rename = "#N_LUT")]
    pub n_lut: Option<usize>,
    #[serde(rename = "#L")]
    pub levels: Option<usize>,
    #[serde(rename = "Min_Dev")]
    pub min_dev: Option<usize>,
    #[serde(rename = "I_A")]
    pub i_a: usize,
    #[serde(rename = "I_R")]
    pub i_r: usize,
    #[serde(rename = "I_total")]
    pub i_total: usize,
    #[serde(rename = "#B")]
    pub blocks: Option<usize>,
    #[serde(rename = "W_Util")]
    pub w_util: Option<f64>,
    #[serde(rename = "#C")]
    pub cycles: usize,
    #[serde(rename = "D_P*")]
    pub d_p: usize,
    pub speedup: f64,
    /// Equivalence check that admitted the row.
    pub check: String,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub flows: Vec<Flow>,
    pub ks: Vec<usize>,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    /// Fixed device count; when set, area-flow rows are `budget / cols`.
    pub budget: Option<usize>,
    pub limit: Duration,
    pub vectors: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Job {
    pub bench: usize,
    pub flow: Flow,
    pub k: Option<usize>,
    pub s_d: Option<usize>,
    pub w_d: Option<usize>,
}

#[derive(Debug, Clone)]
pub enum Outcome {
    Row(BenchRow),
    /// The configuration does not apply (infeasible layout, wrong shape).
    Skipped(String),
    /// Mapping error, equivalence failure or timeout.
    Failed(String),
}

/// Netlists in `dir` with extension `.aag` or `.mig`, sorted by name.
pub fn load_corpus(dir: &Path) -> Result<Vec<(String, LogicNetwork)>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .with_context(|| format!("reading corpus {}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("aag" | "mig")))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let name = p.file_stem().and_then(|s| s.to_str()).unwrap_or("?").to_string();
            Ok((name, crate::io::load_netlist(p)?))
        })
        .collect()
}

/// Job list ordered by benchmark, flow, then configuration. Duplicate
/// configurations (flows that ignore a parameter) are dropped.
pub fn jobs(corpus_len: usize, cfg: &BenchConfig) -> Vec<Job> {
    let mut flows = cfg.flows.clone();
    flows.sort();
    flows.dedup();
    let mut out = Vec::new();
    for bench in 0..corpus_len {
        for &flow in &flows {
            let mut configs: Vec<(Option<usize>, Option<usize>, Option<usize>)> = match flow {
                Flow::Area => {
                    let mut v = Vec::new();
                    for &k in &cfg.ks {
                        for &w in &cfg.cols {
                            match cfg.budget {
                                Some(b) => v.push((Some(k), Some(b / w.max(1)), Some(w))),
                                None => v.extend(cfg.rows.iter().map(|&r| (Some(k), Some(r), Some(w)))),
                            }
                        }
                    }
                    v
                }
                Flow::Delay => cfg.cols.iter().map(|&w| (None, None, Some(w))).collect(),
                Flow::Minimal => vec![(None, None, None)],
            };
            configs.sort();
            configs.dedup();
            out.extend(configs.into_iter().map(|(k, s_d, w_d)| Job { bench, flow, k, s_d, w_d }));
        }
    }
    out
}

fn mig_gates(net: &LogicNetwork) -> usize {
    match net.kind() {
        NetworkKind::Mig => net.num_gates(),
        NetworkKind::Aig => aig_to_mig(net).map(|m| m.num_gates()).unwrap_or(0),
    }
}

fn map_job(net: &LogicNetwork, job: Job, check: CheckMode) -> Outcome {
    let mapped: Result<(Program, MappingReport), Outcome> = match job.flow {
        Flow::Area => {
            let (k, s_d, w_d) = (job.k.unwrap_or(4), job.s_d.unwrap_or(0), job.w_d.unwrap_or(0));
            if net.kind() != NetworkKind::Aig {
                return Outcome::Skipped("area flow needs an AIG".into());
            }
            map_area(net, k, s_d, w_d).map_err(|e| match e {
                AreaError::Infeasible { .. } | AreaError::Layout(_) => Outcome::Skipped(e.to_string()),
                e => Outcome::Failed(e.to_string()),
            })
        }
        Flow::Delay => map_delay(net, job.w_d.unwrap_or(0)).map_err(|e| match e {
            DelayError::WordLength(_) => Outcome::Skipped(e.to_string()),
            e => Outcome::Failed(e.to_string()),
        }),
        Flow::Minimal => {
            if net.outputs().len() != 1 {
                return Outcome::Skipped(format!("minimal flow needs one output, got {}", net.outputs().len()));
            }
            let mig = match net.kind() {
                NetworkKind::Mig => normalize_mig(net),
                NetworkKind::Aig => aig_to_mig(net).and_then(|m| normalize_mig(&m)),
            };
            match mig {
                Ok(m) => map_minimal(&m).map_err(|e| Outcome::Failed(e.to_string())),
                Err(e) => Err(Outcome::Failed(e.to_string())),
            }
        }
    };
    match mapped {
        Ok((program, report)) => finish_row(net, program, report, check),
        Err(o) => o,
    }
}

fn finish_row(net: &LogicNetwork, program: Program, report: MappingReport, mode: CheckMode) -> Outcome {
    let res = match check_equivalence(net, &program, mode) {
        Ok(r) => r,
        Err(e) => return Outcome::Failed(format!("verifier: {e}")),
    };
    if !res.passed {
        return Outcome::Failed(format!("equivalence failed: {}", res.to_json()));
    }
    let n = report.n_maj.unwrap_or_else(|| mig_gates(net));
    let d_p = report.d_p.unwrap_or(PLIM_CYCLES_PER_NODE * n);
    let flow = match report.flow.as_str() {
        "area" => Flow::Area,
        "delay" => Flow::Delay,
        _ => Flow::Minimal,
    };
    Outcome::Row(BenchRow {
        benchmark: String::new(),
        flow,
        k: report.k,
        s_d: report.s_d,
        w_d: report.w_d,
        n_lut: report.n_lut,
        levels: report.levels,
        min_dev: report.min_dev,
        i_a: report.i_a,
        i_r: report.i_r,
        i_total: report.i_total,
        blocks: report.blocks,
        w_util: report.w_util,
        cycles: report.cycles,
        d_p,
        speedup: if report.cycles == 0 { 0.0 } else { d_p as f64 / report.cycles as f64 },
        check: format!("{:?} {}", res.mode, res.vectors).to_lowercase(),
    })
}

/// Runs one job on its own thread, giving up after `limit`. A job that
/// times out keeps running detached until it finishes on its own.
fn run_limited(net: Arc<LogicNetwork>, job: Job, cfg: &BenchConfig) -> Outcome {
    let check = if net.num_pis() <= EXHAUSTIVE_LIMIT {
        CheckMode::Exhaustive
    } else {
        CheckMode::Random { vectors: cfg.vectors, seed: cfg.seed }
    };
    let limit = cfg.limit;
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let _ = tx.send(map_job(&net, job, check));
    });
    match rx.recv_timeout(limit) {
        Ok(o) => o,
        Err(mpsc::RecvTimeoutError::Timeout) => Outcome::Failed(format!("time limit of {:?} exceeded", limit)),
        Err(mpsc::RecvTimeoutError::Disconnected) => Outcome::Failed("mapping job panicked".into()),
    }
}

/// Runs every job in parallel. Results come back in job order.
///
/// The waiting side runs on its own pool: its threads block on job
/// completion while the verifier inside each job uses the global pool.
pub fn run_bench(corpus: &[(String, LogicNetwork)], cfg: &BenchConfig) -> Vec<(Job, Outcome)> {
    let nets: Vec<Arc<LogicNetwork>> = corpus.iter().map(|(_, n)| Arc::new(n.clone())).collect();
    let waiters = rayon::ThreadPoolBuilder::new()
        .num_threads(rayon::current_num_threads())
        .build()
        .expect("bench thread pool");
    waiters.install(|| {
        jobs(corpus.len(), cfg)
            .into_par_iter()
            .map(|job| {
                let mut o = run_limited(nets[job.bench].clone(), job, cfg);
                if let Outcome::Row(r) = &mut o {
                    r.benchmark = corpus[job.bench].0.clone();
                }
                (job, o)
            })
            .collect()
    })
}

pub fn write_rows(rows: &[BenchRow], format: Format, out: impl std::io::Write) -> Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
    }
    Ok(())
}
