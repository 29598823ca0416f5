use std::path::PathBuf;

use anyhow::anyhow;
use clap::Args;
use hfvp_core::eval::DEFAULT_AUC_THRESHOLD;
use hfvp_core::fsio::write_atomic;
use hfvp_core::{run_benchmark, Ablation, Error};

use crate::{ensure_dir, AblationArg, CliError, CliResult, ParamArgs};

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Directory of `<id>.segments.txt`, `<id>.gt.json` and, for the
    /// prior-based modes, `<id>.prior.json`.
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_enum, default_value = "none-full")]
    ablation: AblationArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    jobs: Option<usize>,
    /// Report directory.
    #[arg(long)]
    out: PathBuf,
    /// Upper end of the cumulative error histogram.
    #[arg(long, default_value_t = DEFAULT_AUC_THRESHOLD)]
    auc_threshold: f64,
    #[command(flatten)]
    params: ParamArgs,
}

pub fn run(args: BenchArgs) -> CliResult<()> {
    let params = args.params.to_params()?;
    let mode: Ablation = args.ablation.into();
    if !(args.auc_threshold > 0.0 && args.auc_threshold.is_finite()) {
        return Err(CliError::usage(anyhow!("--auc-threshold must be positive")));
    }
    if !args.dataset.is_dir() {
        return Err(CliError::usage(anyhow!(
            "dataset directory not found: {}",
            args.dataset.display()
        )));
    }
    let report = crate::with_jobs(args.jobs, || {
        run_benchmark(&args.dataset, mode, &params, args.seed, args.auc_threshold)
    })?
    .map_err(|e| match e {
        Error::UndefinedInput(_) => CliError::usage(e),
        e => CliError::runtime(e),
    })?;

    ensure_dir(&args.out)?;
    let write = |name: String, text: String| {
        write_atomic(args.out.join(name), text).map_err(CliError::runtime)
    };
    write(format!("{mode}.records.csv"), report.records_csv())?;
    write(format!("{mode}.histogram.csv"), report.histogram_csv())?;
    write(format!("{mode}.summary.json"), report.summary_json())?;
    let mut failures = String::from("image_id,message\n");
    for f in &report.failures {
        failures += &format!("{},\"{}\"\n", f.image_id, f.message.replace('"', "'"));
    }
    write(format!("{mode}.failures.csv"), failures)?;

    for f in &report.failures {
        eprintln!("failed: {}: {}", f.image_id, f.message);
    }
    eprintln!(
        "{mode}: n = {}, failed = {}, AUC = {:.4}, median error = {:.4}, mean runtime = {:.3} s",
        report.summary.n,
        report.failures.len(),
        report.summary.auc,
        report.median_error().unwrap_or(f64::NAN),
        report.summary.mean_runtime_s
    );
    Ok(())
}
