use std::path::{Path, PathBuf};

use goalpinn_core::adaptive::{run_into, RunOptions, Sampling, Trace, TrainConfig};
use goalpinn_core::nn::gradcheck::{run_suite, SuiteOptions, JET_TOLERANCE, PARAM_TOLERANCE};
use goalpinn_core::nn::{ActivationKind, NetworkSpec};
use goalpinn_core::problem::{case_table_json, CaseConfig};
use rayon::prelude::*;

use crate::args::{CompareArgs, GradcheckArgs, PlotArgs, ReplayArgs, RunArgs};
use crate::manifest::{RunManifest, RunStatus, MANIFEST_FILE};
use crate::plot::{default_label, final_abs_error, plot_traces, render_svg, Series};
use crate::resolve::{baseline_for, resolve};
use crate::summary::{median, SeedResult, Summary};
use crate::{CliError, CliResult, Command};

pub const TRACE_FILE: &str = "trace.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const PLOT_FILE: &str = "plot.svg";
pub const CHECKPOINT_DIR: &str = "checkpoints";

pub fn execute(command: &Command) -> CliResult<()> {
    match command {
        Command::Run(args) => cmd_run(args).map(|_| ()),
        Command::Compare(args) => cmd_compare(args).map(|_| ()),
        Command::Gradcheck(args) => cmd_gradcheck(args),
        Command::Plot(args) => cmd_plot(args),
        Command::Replay(args) => cmd_replay(args).map(|_| ()),
        Command::Cases => {
            println!("{}", case_table_json()?);
            Ok(())
        }
    }
}

fn sampling_name(s: Sampling) -> &'static str {
    match s {
        Sampling::Uniform => "uniform",
        Sampling::DwrResample => "dwr-resample",
        Sampling::DwrRefine => "dwr-refine",
    }
}

/// What a finished (or aborted) run leaves behind.
#[derive(Debug)]
pub struct RunRecord {
    pub trace: Trace,
    pub manifest: RunManifest,
    pub final_points: usize,
}

/// Trains one configuration into `out`: trace.csv, manifest.json and
/// checkpoints. A numerical abort still writes the rows computed so far and
/// a manifest marked as aborted.
pub fn execute_run(case: &CaseConfig, cfg: &TrainConfig, out: &Path) -> CliResult<RunRecord> {
    std::fs::create_dir_all(out)?;
    let options = RunOptions {
        checkpoint_dir: Some(out.join(CHECKPOINT_DIR)),
    };
    let mut trace = Trace::default();
    let result = run_into(case, cfg, &options, &mut trace);
    trace.save_csv(&out.join(TRACE_FILE))?;
    let mut manifest = RunManifest::new(case, cfg, out);
    manifest.trace_rows = trace.len();
    match result {
        Ok(nets) => {
            manifest.adjoint_epochs = nets.adjoint_epochs;
            manifest.z_prime_epochs = nets.z_prime_epochs;
            manifest.save(out)?;
            Ok(RunRecord {
                trace,
                manifest,
                final_points: nets.final_interior.len(),
            })
        }
        Err(err) => {
            if err.is_numerical() {
                manifest.status = RunStatus::NumericalAbort;
                manifest.save(out)?;
            }
            Err(err.into())
        }
    }
}

fn default_out(prefix: &str, case: u32, sampling: Sampling, seed: Option<u64>) -> PathBuf {
    let mut name = format!("{prefix}case{case}_{}", sampling_name(sampling));
    if let Some(s) = seed {
        name.push_str(&format!("_seed{s}"));
    }
    PathBuf::from("out").join(name)
}

pub fn cmd_run(args: &RunArgs) -> CliResult<RunRecord> {
    let (case, cfg) = resolve(&args.train, Sampling::DwrResample)?;
    if args.avg_window == 0 {
        return Err(CliError::Usage("--avg-window must be at least 1".into()));
    }
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| default_out("", case.case_id, cfg.sampling, Some(cfg.seed)));
    eprintln!(
        "case {} ({}), {:?} / {}, seed {}, {} epochs -> {}",
        case.case_id,
        case.title,
        cfg.mode,
        sampling_name(cfg.sampling),
        cfg.seed,
        cfg.epochs,
        out.display()
    );
    let record = execute_run(&case, &cfg, &out)?;
    if args.plot {
        let title = format!("Case {}: {}", case.case_id, case.title);
        let svg = plot_traces(&[(default_label(&record.trace), &record.trace)], args.avg_window, &title)?;
        std::fs::write(out.join(PLOT_FILE), svg)?;
    }
    if let Some(last) = record.trace.last() {
        eprintln!("final J error {:e} with {} points", last.j_error, last.points);
    }
    Ok(record)
}

/// Per-epoch median of |J error| across traces of equal length, then block
/// averaged.
fn median_curve(traces: &[&Trace], window: usize) -> Vec<(f64, f64)> {
    let len = traces.iter().map(|t| t.len()).min().unwrap_or(0);
    let rows = (0..len)
        .map(|i| {
            let errs: Vec<f64> = traces.iter().map(|t| t.rows[i].j_error.abs()).collect();
            (traces[0].rows[i].epoch, median(&errs))
        })
        .collect::<Vec<_>>();
    rows.chunks(window.max(1))
        .map(|b| (b[b.len() - 1].0 as f64, b.iter().map(|r| r.1).sum::<f64>() / b.len() as f64))
        .collect()
}

#[derive(Debug)]
pub struct CompareRecord {
    pub summary: Summary,
    pub baseline: Vec<Trace>,
    pub adaptive: Vec<Trace>,
}

pub fn cmd_compare(args: &CompareArgs) -> CliResult<CompareRecord> {
    let (case, adaptive) = resolve(&args.train, Sampling::DwrResample)?;
    if adaptive.sampling == Sampling::Uniform {
        return Err(CliError::Usage("compare needs an adaptive --sampling".into()));
    }
    if args.avg_window == 0 {
        return Err(CliError::Usage("--avg-window must be at least 1".into()));
    }
    let seeds = if args.seeds.is_empty() { vec![adaptive.seed] } else { args.seeds.clone() };
    let baseline = baseline_for(&adaptive);
    baseline.validate()?;
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| default_out("compare_", case.case_id, adaptive.sampling, None));

    let jobs: Vec<(u64, bool)> = seeds.iter().flat_map(|&s| [(s, false), (s, true)]).collect();
    let results: Vec<CliResult<RunRecord>> = jobs
        .par_iter()
        .map(|&(seed, is_adaptive)| {
            let mut cfg = if is_adaptive { adaptive.clone() } else { baseline.clone() };
            cfg.seed = seed;
            let dir = out.join(format!("seed{seed}")).join(if is_adaptive { "adaptive" } else { "baseline" });
            let record = execute_run(&case, &cfg, &dir)?;
            eprintln!(
                "seed {seed} {}: final |J error| {:e}",
                sampling_name(cfg.sampling),
                final_abs_error(&record.trace, args.avg_window).unwrap_or(f64::NAN)
            );
            Ok(record)
        })
        .collect();
    let mut records = Vec::with_capacity(results.len());
    for r in results {
        records.push(r?);
    }

    let mut rows = Vec::new();
    let mut base_traces = Vec::new();
    let mut adapt_traces = Vec::new();
    for (k, &seed) in seeds.iter().enumerate() {
        let b = &records[2 * k];
        let a = &records[2 * k + 1];
        rows.push(SeedResult {
            seed,
            baseline: final_abs_error(&b.trace, args.avg_window).unwrap_or(f64::NAN),
            adaptive: final_abs_error(&a.trace, args.avg_window).unwrap_or(f64::NAN),
            baseline_points: b.final_points,
            adaptive_points: a.final_points,
        });
    }
    for (k, r) in records.into_iter().enumerate() {
        if k % 2 == 0 {
            base_traces.push(r.trace);
        } else {
            adapt_traces.push(r.trace);
        }
    }
    let summary = Summary { rows };
    let mut file = std::fs::File::create(out.join(SUMMARY_FILE))?;
    summary.write_csv(&mut file)?;

    let series = vec![
        Series {
            label: "standard (uniform)".into(),
            points: median_curve(&base_traces.iter().collect::<Vec<_>>(), args.avg_window),
        },
        Series {
            label: format!("adaptive ({})", sampling_name(adaptive.sampling)),
            points: median_curve(&adapt_traces.iter().collect::<Vec<_>>(), args.avg_window),
        },
    ];
    let title = format!("Case {}: {} ({} seeds)", case.case_id, case.title, seeds.len());
    let svg = render_svg(&series, &adaptive.event_epochs(), &title)?;
    std::fs::write(out.join(PLOT_FILE), svg)?;
    println!(
        "median final |J error|: baseline {:e}, adaptive {:e}",
        summary.median_baseline(),
        summary.median_adaptive()
    );
    Ok(CompareRecord {
        summary,
        baseline: base_traces,
        adaptive: adapt_traces,
    })
}

pub fn gradcheck_options(args: &GradcheckArgs) -> CliResult<SuiteOptions> {
    if args.input_dim == 0 || args.width == 0 || args.nets == 0 || args.points == 0 {
        return Err(CliError::Usage("gradcheck sizes must be positive".into()));
    }
    let tanh = if args.inject_fault {
        ActivationKind::TanhFaultyCurvature
    } else {
        ActivationKind::Tanh
    };
    let mut specs = Vec::new();
    for act in [tanh, ActivationKind::Gelu] {
        specs.push(NetworkSpec::mlp(args.input_dim, vec![args.width; 2 * args.blocks + 1], act));
        specs.push(NetworkSpec::resnet(args.input_dim, args.width, args.blocks, act));
    }
    Ok(SuiteOptions {
        specs,
        nets_per_spec: args.nets,
        points_per_net: args.points,
        loss_points: 16,
    })
}

pub fn cmd_gradcheck(args: &GradcheckArgs) -> CliResult<()> {
    let options = gradcheck_options(args)?;
    let report = run_suite(&options, args.seed)?;
    println!(
        "jets:   {} checks, max rel err {:.3e} (tol {JET_TOLERANCE:e}), {} failures",
        report.jets.checked,
        report.jets.max_rel_err,
        report.jets.failures.len()
    );
    println!(
        "params: {} checks, max rel err {:.3e} (tol {PARAM_TOLERANCE:e}), {} failures",
        report.params.checked,
        report.params.max_rel_err,
        report.params.failures.len()
    );
    if report.passed() {
        return Ok(());
    }
    let all: Vec<_> = report.jets.failures.iter().chain(&report.params.failures).collect();
    for m in all.iter().take(20) {
        println!("  {}: computed {:e}, finite difference {:e}", m.what, m.computed, m.reference);
    }
    if all.len() > 20 {
        println!("  ... and {} more", all.len() - 20);
    }
    Err(CliError::Check(format!("{} gradient entries out of tolerance", all.len())))
}

pub fn cmd_plot(args: &PlotArgs) -> CliResult<()> {
    if args.avg_window == 0 {
        return Err(CliError::Usage("--avg-window must be at least 1".into()));
    }
    if !args.labels.is_empty() && args.labels.len() != args.traces.len() {
        return Err(CliError::Usage("give one --label per --trace or none".into()));
    }
    let mut traces = Vec::new();
    for path in &args.traces {
        let t = Trace::load_csv(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        traces.push(t);
    }
    let labelled: Vec<(String, &Trace)> = traces
        .iter()
        .enumerate()
        .map(|(k, t)| (args.labels.get(k).cloned().unwrap_or_else(|| default_label(t)), t))
        .collect();
    let title = args.title.clone().unwrap_or_else(|| "functional error".into());
    let svg = plot_traces(&labelled, args.avg_window, &title)?;
    if let Some(dir) = args.out.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(&args.out, svg)?;
    Ok(())
}

/// Re-runs a manifest into a fresh directory and checks that the new trace
/// matches the recorded one byte for byte.
pub fn cmd_replay(args: &ReplayArgs) -> CliResult<RunRecord> {
    let manifest = RunManifest::load(&args.manifest)?;
    let original = args
        .manifest
        .parent()
        .map(|d| d.join(TRACE_FILE))
        .filter(|p| p.exists())
        .ok_or_else(|| CliError::Usage(format!("no {TRACE_FILE} next to {}", args.manifest.display())))?;
    if args.out.join(MANIFEST_FILE) == args.manifest {
        return Err(CliError::Usage("replay needs an output directory distinct from the original".into()));
    }
    manifest.config.validate()?;
    let record = match execute_run(&manifest.case, &manifest.config, &args.out) {
        Ok(r) => r,
        Err(CliError::Numerical(msg)) if manifest.status == RunStatus::NumericalAbort => {
            eprintln!("replayed the recorded numerical abort: {msg}");
            return compare_traces(&original, &args.out.join(TRACE_FILE)).and_then(|_| {
                Err(CliError::Numerical(msg))
            });
        }
        Err(e) => return Err(e),
    };
    compare_traces(&original, &args.out.join(TRACE_FILE))?;
    println!("trace reproduced bitwise ({} rows)", record.trace.len());
    Ok(record)
}

fn compare_traces(a: &Path, b: &Path) -> CliResult<()> {
    let x = std::fs::read(a)?;
    let y = std::fs::read(b)?;
    if x == y {
        Ok(())
    } else {
        Err(CliError::Check(format!("{} and {} differ", a.display(), b.display())))
    }
}
