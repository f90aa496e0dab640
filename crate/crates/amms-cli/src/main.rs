//! `amms`: solve, verify, and stress-test all-but-one maximin-share chore
//! allocations from the command line.
//!
//! Exit codes: 0 on success, 1 when a verification or suite check fails,
//! 2 on budget, degenerate-instance, or usage errors.

use amms_core::gen::{gen_paper_example, gen_random, CostModel};
use amms_core::instance::{Allocation, Instance, ReducedInstanceView};
use amms_core::matching::FeasibilityGraph;
use amms_core::oracle::{mms_with_budget, normalize_with_budget, DEFAULT_ITEM_BUDGET};
use amms_core::solver::solve_with_budget;
use amms_core::suite::{run_suite, SuiteConfig, SuiteKind, SuiteReport};
use amms_core::verify::verify_allocation_with_budget;
use amms_core::{ItemSet, Rational};
use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "amms",
    version,
    about = "Exact all-but-one maximin-share (AMMS) chore allocation"
)]
struct Cli {
    /// Instance JSON file (most subcommands).
    #[arg(long, global = true)]
    input: Option<PathBuf>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Seed for generation and suites.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Machine-readable JSON instead of the human summary.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute an allocation with n-1 agents at their MMS and one within
    /// the bound for n (1, 1, 9/8, 4/3, then (n+1)^2/4n).
    Solve {
        /// Write the solver's case tag and reduction trace here.
        #[arg(long)]
        trace: Option<PathBuf>,

        /// Dump the initial MMS-feasibility graph here (n >= 3).
        #[arg(long)]
        dump_graph: Option<PathBuf>,

        /// Item cap for the exact MMS search.
        #[arg(long, default_value_t = DEFAULT_ITEM_BUDGET)]
        budget: usize,
    },

    /// Check an allocation file against an instance at a given bound;
    /// exits 1 and prints the report when it fails.
    Verify {
        /// Allocation JSON file.
        #[arg(long)]
        allocation: PathBuf,

        /// Bound for the flexible agent, e.g. "9/8".
        #[arg(long)]
        alpha: String,

        #[arg(long, default_value_t = DEFAULT_ITEM_BUDGET)]
        budget: usize,
    },

    /// Exact MMS value and witness partition for one agent.
    Mms {
        #[arg(long)]
        agent: usize,

        /// Number of bundles.
        #[arg(long)]
        k: usize,

        /// Comma-separated item indices; all items when omitted.
        #[arg(long)]
        items: Option<String>,

        #[arg(long, default_value_t = DEFAULT_ITEM_BUDGET)]
        budget: usize,
    },

    /// Generate an instance.
    Gen {
        #[arg(long, default_value_t = 3)]
        n: usize,

        #[arg(long, default_value_t = 8)]
        m: usize,

        /// uniform | paper-like | adversarial.
        #[arg(long, default_value = "uniform")]
        model: String,

        /// Emit the worked three-agent example instead.
        #[arg(long)]
        paper_example: bool,
    },

    /// Run randomized verification suites; exits 1 on any failure.
    Suite {
        /// Comma-separated: oracle-cross-check, lemma-invariants,
        /// solver-by-n, tightness. All four when omitted.
        #[arg(long)]
        suites: Option<String>,

        /// Instances per agent count in the solver sweep.
        #[arg(long, default_value_t = 100)]
        solver_cases: usize,

        #[arg(long, default_value_t = 200)]
        oracle_cases: usize,

        #[arg(long, default_value_t = 200)]
        lemma_cases: usize,

        /// Failing instances are serialized here for replay.
        #[arg(long, default_value = "failures")]
        failures_dir: PathBuf,
    },

    /// Time the solver on seeded instances.
    Bench {
        /// Comma-separated agent counts.
        #[arg(long, default_value = "3,4,5,6,7")]
        n: String,

        /// Instances per agent count.
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
}

fn main() -> ExitCode {
    // Die quietly on closed pipes (`amms ... | head`) like other unix tools.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn read_instance(path: &Option<PathBuf>) -> Result<Instance> {
    let path = path
        .as_ref()
        .context("--input is required for this subcommand")?;
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let inst: Instance =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(inst)
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    std::fs::write(path, serde_json::to_string_pretty(value)?)
        .with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve {
            ref trace,
            ref dump_graph,
            budget,
        } => {
            let inst = read_instance(&cli.input)?;
            if let Some(path) = dump_graph {
                dump_initial_graph(&inst, budget, path)?;
            }
            let res = solve_with_budget(&inst, budget)?;
            let alloc_json = serde_json::to_string_pretty(&res.allocation)?;
            if let Some(path) = trace {
                #[derive(serde::Serialize)]
                struct TraceFile<'a> {
                    case: amms_core::CaseTag,
                    trace: &'a Option<amms_core::solver::ReductionTrace>,
                }
                write_json(
                    path,
                    &TraceFile {
                        case: res.case,
                        trace: &res.trace,
                    },
                )?;
            }
            match (&cli.output, cli.json) {
                (Some(path), _) => {
                    std::fs::write(path, &alloc_json)
                        .with_context(|| format!("writing {}", path.display()))?;
                    if cli.json {
                        println!("{alloc_json}");
                    } else {
                        print_solve_summary(&res);
                        println!("allocation written to {}", path.display());
                    }
                }
                (None, true) => println!("{alloc_json}"),
                (None, false) => {
                    print_solve_summary(&res);
                    println!("{alloc_json}");
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Verify {
            ref allocation,
            ref alpha,
            budget,
        } => {
            let inst = read_instance(&cli.input)?;
            let text = std::fs::read_to_string(allocation)
                .with_context(|| format!("reading {}", allocation.display()))?;
            let alloc: Allocation = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", allocation.display()))?;
            let alpha: Rational = alpha
                .parse()
                .map_err(|e| anyhow::anyhow!("invalid --alpha: {e}"))?;
            let report = verify_allocation_with_budget(&inst, &alloc, &alpha, budget)?;
            let json = serde_json::to_string_pretty(&report)?;
            emit(&cli.output, &json)?;
            if cli.output.is_some() {
                println!("{json}");
            }
            Ok(if report.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }

        Command::Mms {
            agent,
            k,
            ref items,
            budget,
        } => {
            let inst = read_instance(&cli.input)?;
            let set = match items {
                Some(list) => parse_items(list)?,
                None => inst.all_items(),
            };
            let res = mms_with_budget(&inst, agent, set, k, budget)?;
            #[derive(serde::Serialize)]
            struct MmsOut {
                value: Rational,
                witness: Vec<ItemSet>,
            }
            let out = MmsOut {
                value: res.value,
                witness: res.witness.bundles().to_vec(),
            };
            emit(&cli.output, &serde_json::to_string_pretty(&out)?)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Gen {
            n,
            m,
            ref model,
            paper_example,
        } => {
            let inst = if paper_example {
                gen_paper_example()
            } else {
                let model: CostModel = model
                    .parse()
                    .map_err(|e: String| anyhow::anyhow!(e))?;
                gen_random(n, m, model, cli.seed)
            };
            emit(&cli.output, &serde_json::to_string_pretty(&inst)?)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Suite {
            ref suites,
            solver_cases,
            oracle_cases,
            lemma_cases,
            ref failures_dir,
        } => {
            let kinds = match suites {
                Some(list) => list
                    .split(',')
                    .filter(|s| !s.is_empty())
                    .map(|s| s.trim().parse::<SuiteKind>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|e| anyhow::anyhow!(e))?,
                None => SuiteConfig::default().suites,
            };
            let config = SuiteConfig {
                suites: kinds,
                seed: cli.seed,
                solver_cases,
                oracle_cases,
                lemma_cases,
                failures_dir: Some(failures_dir.clone()),
            };
            let report = run_suite(&config)?;
            // One JSON line per suite outcome, then a human table.
            for outcome in &report.outcomes {
                println!("{}", serde_json::to_string(outcome)?);
            }
            if !cli.json {
                print_suite_table(&report);
            }
            Ok(if report.pass {
                ExitCode::SUCCESS
            } else {
                eprintln!(
                    "suite failures written under {}",
                    failures_dir.display()
                );
                ExitCode::from(1)
            })
        }

        Command::Bench { ref n, count } => {
            let ns = n
                .split(',')
                .filter(|s| !s.is_empty())
                .map(|s| s.trim().parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .context("parsing --n")?;
            bench(&ns, count, cli.seed, cli.json)
        }
    }
}

fn parse_items(list: &str) -> Result<ItemSet> {
    let mut set = ItemSet::empty();
    for part in list.split(',').filter(|s| !s.is_empty()) {
        let idx: usize = part.trim().parse().context("parsing --items")?;
        if idx >= amms_core::items::MAX_ITEMS {
            bail!("item index {idx} out of range");
        }
        set = set.with(idx);
    }
    Ok(set)
}

fn print_solve_summary(res: &amms_core::SolveResult) {
    println!("case: {}", serde_json::to_string(&res.case).unwrap_or_default());
    println!("alpha: {}", res.allocation.alpha);
    for (i, (bundle, ratio)) in res
        .allocation
        .bundles
        .iter()
        .zip(&res.allocation.ratios)
        .enumerate()
    {
        let marker = if res.allocation.flexible_agent == Some(i) {
            " (flexible)"
        } else {
            ""
        };
        println!("agent {i}: items {bundle:?}, cost/MMS = {ratio}{marker}");
    }
}

fn print_suite_table(report: &SuiteReport) {
    println!();
    println!(
        "{:<22} {:>8} {:>9} {:>12} {:>10}",
        "suite", "cases", "failures", "max ratio", "wall ms"
    );
    for o in &report.outcomes {
        let max = o
            .max_ratio_by_n
            .values()
            .max()
            .map(|r| r.to_string())
            .unwrap_or_else(|| "-".into());
        println!(
            "{:<22} {:>8} {:>9} {:>12} {:>10}",
            o.name,
            o.cases,
            o.failures.len(),
            max,
            o.wall_ms
        );
    }
    println!(
        "result: {}",
        if report.pass { "PASS" } else { "FAIL" }
    );
}

fn dump_initial_graph(inst: &Instance, budget: usize, path: &Path) -> Result<()> {
    if inst.n() < 3 {
        bail!("--dump-graph needs at least three agents");
    }
    let norm = normalize_with_budget(inst, budget)?;
    let view = ReducedInstanceView::full(&norm);
    let witness = norm.witness(inst.n() - 1).clone();
    let graph = FeasibilityGraph::build(&view, &witness, None, None)?;
    write_json(path, &graph)
}

fn bench(ns: &[usize], count: usize, seed: u64, json: bool) -> Result<ExitCode> {
    #[derive(serde::Serialize)]
    struct BenchRow {
        n: usize,
        instances: usize,
        total_ms: u128,
        avg_ms: f64,
        max_ms: u128,
    }
    let mut rows = Vec::new();
    for &n in ns {
        let max_m = amms_core::suite::max_items_for(n);
        let mut total = 0u128;
        let mut max = 0u128;
        for i in 0..count {
            let inst = gen_random(n, max_m, CostModel::Uniform, seed.wrapping_add(i as u64));
            let start = Instant::now();
            solve_with_budget(&inst, DEFAULT_ITEM_BUDGET)?;
            let ms = start.elapsed().as_millis();
            total += ms;
            max = max.max(ms);
        }
        rows.push(BenchRow {
            n,
            instances: count,
            total_ms: total,
            avg_ms: total as f64 / count as f64,
            max_ms: max,
        });
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&rows)?);
    } else {
        println!("{:<4} {:>10} {:>10} {:>10}", "n", "instances", "avg ms", "max ms");
        for r in &rows {
            println!(
                "{:<4} {:>10} {:>10.2} {:>10}",
                r.n, r.instances, r.avg_ms, r.max_ms
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}
