//! The `dyvar` command line. Exit codes: 0 success, 1 verification failure, 2 usage or
//! input error.

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use dyvar_core::io::{format_grid_text, load, load_cubes};
use dyvar_core::{exact, maximal_transform, variation, CubeFamily, Shape, VariationMode};

use crate::calibrate::{default_k_max, oracle_calibrate};
use crate::experiments::{reproduce_superadditive_example, search_gap};
use crate::fastpath::bench;
use crate::report::ReportStore;
use crate::suites::{replay, run_suite, theorem_sweep, Suite, Verdict, Witness};
use crate::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "dyvar", about = "Exact experiments with the dyadic maximal function")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the maximal transform of a grid file.
    Maximal {
        grid: PathBuf,
        /// `all`, or `explicit <cube-file>`.
        #[arg(long, num_args = 1..=2, value_names = ["KIND", "FILE"], default_values = ["all"])]
        family: Vec<String>,
        #[arg(long)]
        no_pointwise: bool,
    },
    /// Print the variation of a grid file.
    Variation {
        grid: PathBuf,
        #[arg(long, value_enum, default_value_t = Mode::Interior)]
        mode: Mode,
    },
    /// Run a randomized verification suite.
    Verify {
        suite: String,
        #[arg(long)]
        d: usize,
        #[arg(long = "K")]
        k: u32,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Recompute a golden example.
    Reproduce { example: Example },
    /// Hill-climb search.
    Search {
        target: SearchTarget,
        #[arg(long)]
        d: usize,
        #[arg(long = "K")]
        k: u32,
        #[arg(long)]
        steps: usize,
        #[arg(long)]
        seed: u64,
    },
    /// Exhaustive small-case constants.
    Calibrate {
        #[arg(long)]
        d: usize,
        #[arg(long = "K-max")]
        k_max: Option<u32>,
    },
    /// Re-run the check recorded in a witness file.
    Replay { witness: PathBuf },
    /// Time the double-precision transform.
    Bench {
        #[arg(long)]
        d: usize,
        #[arg(long = "K")]
        k: u32,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Interior,
    ZeroExtension,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Example {
    #[value(name = "example-5.2")]
    Superadditive,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SearchTarget {
    Gap,
}

/// Runs the command line with process stdout and stderr.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_cli_with(argv, &mut std::io::stdout(), &mut std::io::stderr())
}

pub fn run_cli_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn usage(msg: impl Into<String>) -> Error {
    Error::Usage(msg.into())
}

fn family_from(args: &[String], shape: Shape) -> Result<CubeFamily> {
    match args {
        [kind] if kind == "all" => Ok(CubeFamily::all()),
        [kind, file] if kind == "explicit" => {
            let (cube_shape, cubes) = load_cubes(file.as_ref())?;
            if cube_shape != shape {
                return Err(usage("cube file shape differs from grid shape"));
            }
            Ok(CubeFamily::explicit(cubes))
        }
        _ => Err(usage("--family expects `all` or `explicit <cube-file>`")),
    }
}

/// `Ok(false)` signals a verification failure.
fn execute(command: Command, out: &mut dyn Write) -> Result<bool> {
    match command {
        Command::Maximal {
            grid,
            family,
            no_pointwise,
        } => {
            let f = load(&grid)?;
            let fam = family_from(&family, f.shape())?.with_pointwise(!no_pointwise);
            let mf = maximal_transform(&f, &fam)?;
            out.write_all(format_grid_text(&mf).as_bytes())?;
            Ok(true)
        }
        Command::Variation { grid, mode } => {
            let f = load(&grid)?;
            let mode = match mode {
                Mode::Interior => VariationMode::interior(f.shape()),
                Mode::ZeroExtension => VariationMode::ZeroExtension,
            };
            writeln!(out, "{}", exact::format(&variation(&f, &mode)?))?;
            Ok(true)
        }
        Command::Verify {
            suite,
            d,
            k,
            count,
            seed,
        } => verify(suite.parse()?, d, k, count, seed, out),
        Command::Reproduce {
            example: Example::Superadditive,
        } => {
            let r = reproduce_superadditive_example();
            writeln!(out, "var M g = {}", exact::format(&r.var_mg))?;
            writeln!(out, "var M h = {}", exact::format(&r.var_mh))?;
            writeln!(out, "var M(g+h) = {}", exact::format(&r.var_m_sum))?;
            writeln!(out, "var g = {}", exact::format(&r.var_g))?;
            writeln!(out, "var h = {}", exact::format(&r.var_h))?;
            writeln!(out, "var M g + var M h = {}", exact::format(&r.var_mg_plus_var_mh))?;
            writeln!(
                out,
                "strictly superadditive: {}",
                if r.strictly_superadditive { "yes" } else { "no" }
            )?;
            ReportStore::from_env().append("reproduce", &r)?;
            Ok(r.strictly_superadditive)
        }
        Command::Search {
            target: SearchTarget::Gap,
            d,
            k,
            steps,
            seed,
        } => {
            let report = search_gap(Shape::new(d, k)?, steps, seed)?;
            writeln!(
                out,
                "gap search d={d} K={k} steps={steps} seed={seed}: {} pairs evaluated",
                report.records.len()
            )?;
            match (&report.sup, &report.witness) {
                (Some(sup), Some(w)) => {
                    writeln!(out, "sup (var M(g+h) - var M g) / var h = {}", exact::format(sup))?;
                    write!(out, "witness g:\n{}", format_grid_text(&w.g))?;
                    write!(out, "witness h:\n{}", format_grid_text(&w.h))?;
                }
                _ => writeln!(out, "no pair with var h > 0")?,
            }
            writeln!(
                out,
                "reference pair gap = {} ({})",
                exact::format(&report.reference.gap),
                if report.reference.constrained {
                    "constrained"
                } else {
                    "unconstrained"
                }
            )?;
            ReportStore::from_env().append("search-gap", &report)?;
            Ok(true)
        }
        Command::Calibrate { d, k_max } => {
            let table = oracle_calibrate(d, k_max.unwrap_or_else(|| default_k_max(d)))?;
            out.write_all(serde_json::to_string_pretty(&table)?.as_bytes())?;
            writeln!(out)?;
            ReportStore::from_env().write_json(&format!("calibration-d{d}"), &table)?;
            Ok(true)
        }
        Command::Replay { witness } => {
            let text = std::fs::read_to_string(&witness)?;
            let w: Witness = serde_json::from_str(&text)?;
            match replay(&w)? {
                Verdict::Pass(_) => {
                    writeln!(out, "{}: PASS", w.suite)?;
                    Ok(true)
                }
                Verdict::Skip(reason) => {
                    writeln!(out, "{}: SKIP ({reason})", w.suite)?;
                    Ok(true)
                }
                Verdict::Fail(detail) => {
                    writeln!(out, "{}: FAIL {detail}", w.suite)?;
                    Ok(false)
                }
            }
        }
        Command::Bench { d, k } => {
            let r = bench(Shape::new(d, k)?, 3, 0.2);
            writeln!(
                out,
                "bench d={d} K={k} cells={} runs={} best={:.6}s",
                r.cells, r.runs, r.seconds
            )?;
            ReportStore::from_env().append("bench", &r)?;
            Ok(true)
        }
    }
}

fn verify(suite: Suite, d: usize, k: u32, count: usize, seed: u64, out: &mut dyn Write) -> Result<bool> {
    let store = ReportStore::from_env();
    let outcome = run_suite(suite, d, k, count, seed)?;
    let mut passed = outcome.passed();
    writeln!(
        out,
        "verify {suite} d={d} K={k} count={count} seed={seed}: {} (checked {}, skipped {})",
        if passed { "PASS" } else { "FAIL" },
        outcome.checked,
        outcome.skipped
    )?;
    for (metric, v) in &outcome.observed_max {
        match outcome.ceilings.get(metric) {
            Some(c) => writeln!(
                out,
                "  max {metric} = {} (ceiling {})",
                exact::format(v),
                exact::format(c)
            )?,
            None => writeln!(out, "  max {metric} = {}", exact::format(v))?,
        }
    }
    for w in &outcome.failures {
        let path = store.write_json(&format!("witness-{suite}-{:016x}", w.seed), w)?;
        writeln!(out, "  witness: {} ({})", path.display(), w.detail)?;
    }
    store.append("verify", &outcome)?;
    if suite == Suite::Theorem {
        let sweep = theorem_sweep(d, k, count, seed)?;
        for row in &sweep.rows {
            writeln!(
                out,
                "  ensemble {:?} {}: max {} over {} records (ceiling {})",
                row.kind,
                row.mode,
                row.max.as_ref().map(exact::format).unwrap_or_else(|| "-".into()),
                row.records,
                exact::format(&row.ceiling)
            )?;
        }
        store.export_ratios("theorem-ratios", &sweep.records)?;
        store.append("theorem-sweep", &sweep.rows)?;
        passed &= sweep.passed();
    }
    Ok(passed)
}
