//! `rblur sweep`: grid sweeps over noise scale, blur coefficient, viewing
//! distance and fixation count, reporting table statistics, transform
//! distortion, and (with a classifier) accuracy per combination.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use retina_blur::certify::Classifier;
use retina_blur::{aggregate_scores, any_correct, argmax_lowest, rng, Image, RBlur};

use crate::config::{sig6, Settings, SettingsArgs};
use crate::error::{CliError, CliResult};
use crate::imgio;
use crate::specs::{self, FixationSpec};

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Images for the distortion metric
    #[arg(long = "input", num_args = 0..)]
    pub inputs: Vec<PathBuf>,

    /// Manifest + classifier for the accuracy metrics
    #[arg(long)]
    pub manifest: Option<PathBuf>,

    #[arg(long)]
    pub classifier: Option<String>,

    /// Noise scales to sweep, comma-separated
    #[arg(long = "sweep-noise", default_value = "0.125")]
    pub sweep_sigma_t: String,

    /// Blur coefficients to sweep
    #[arg(long = "sweep-beta", default_value = "0.05")]
    pub sweep_beta: String,

    /// Viewing distances to sweep
    #[arg(long = "sweep-vd", default_value = "3")]
    pub sweep_vd: String,

    /// Fixation counts to sweep (1 = center, 5 = corners+center,
    /// a square number N*N = grid:N)
    #[arg(long = "sweep-fixations", default_value = "1,5")]
    pub sweep_fixations: String,

    /// Write the table here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub settings: SettingsArgs,
}

fn parse_list<T: std::str::FromStr>(name: &str, s: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<T>()
                .map_err(|_| CliError::usage(format!("bad {name} value '{v}'")))
        })
        .collect()
}

fn fixation_spec_for(count: usize) -> CliResult<FixationSpec> {
    match count {
        1 => Ok(FixationSpec::Center),
        5 => Ok(FixationSpec::Five),
        n => {
            let side = (n as f64).sqrt().round() as u32;
            if side as usize * side as usize == n && side >= 1 {
                Ok(FixationSpec::Grid(side))
            } else {
                Err(CliError::usage(format!(
                    "fixation count {n} must be 1, 5, or a square number"
                )))
            }
        }
    }
}

pub fn run(args: &SweepArgs) -> CliResult<()> {
    let base = args.settings.resolve()?;
    let sigma_ts: Vec<f64> = parse_list("sweep-noise", &args.sweep_sigma_t)?;
    let betas: Vec<f64> = parse_list("sweep-beta", &args.sweep_beta)?;
    let vds: Vec<u32> = parse_list("sweep-vd", &args.sweep_vd)?;
    let fixation_counts: Vec<usize> = parse_list("sweep-fixations", &args.sweep_fixations)?;
    for &c in &fixation_counts {
        fixation_spec_for(c)?;
    }

    let images: Vec<(PathBuf, Image)> = args
        .inputs
        .iter()
        .map(|p| imgio::load_image(p).map(|img| (p.clone(), img)))
        .collect::<CliResult<_>>()?;

    let labeled: Option<(Vec<(Image, usize)>, Box<dyn Classifier + Send + Sync>)> =
        match (&args.manifest, &args.classifier) {
            (Some(m), Some(c)) => {
                let loaded = specs::load_classifier(c)?;
                let entries = specs::parse_manifest(m)?;
                let mut dataset = Vec::with_capacity(entries.len());
                for e in &entries {
                    let img = imgio::load_image(&e.path)?;
                    dataset.push((img, e.label));
                }
                Some((dataset, loaded.classifier))
            }
            (None, None) => None,
            _ => {
                return Err(CliError::usage(
                    "--manifest and --classifier must be given together",
                ))
            }
        };
    if images.is_empty() && labeled.is_none() {
        return Err(CliError::usage(
            "sweep needs --input images and/or --manifest with --classifier",
        ));
    }

    let pool = super::worker_pool(base.jobs)?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "sigma_t\tbeta\tvd\tfixations\tmax_sigma_color\tin_focus_width\tmean_rmse\tacc_agg\tacc_any"
    );

    let mut rows = 0usize;
    let mut skipped = 0usize;
    for &sigma_t in &sigma_ts {
        for &beta in &betas {
            for &vd in &vds {
                for &fc in &fixation_counts {
                    let mut settings = base;
                    settings.sigma_t = sigma_t;
                    settings.beta = beta;
                    settings.vd = vd;
                    let pipeline = match RBlur::new(settings.rblur_config()) {
                        Ok(p) => p,
                        Err(e) => {
                            eprintln!(
                                "rblur sweep: skipping sigma_t={sigma_t} beta={beta} vd={vd}: {e}"
                            );
                            skipped += 1;
                            continue;
                        }
                    };
                    let row = pool.install(|| {
                        combo_row(&settings, &pipeline, fc, &images, labeled.as_ref())
                    })?;
                    out.push_str(&row);
                    rows += 1;
                }
            }
        }
    }
    if rows == 0 {
        return Err(CliError::usage(format!(
            "no sweep combination was valid ({skipped} skipped)"
        )));
    }
    super::write_output(args.out.as_deref(), &out)
}

fn combo_row(
    settings: &Settings,
    pipeline: &RBlur,
    fixation_count: usize,
    images: &[(PathBuf, Image)],
    labeled: Option<&(Vec<(Image, usize)>, Box<dyn Classifier + Send + Sync>)>,
) -> CliResult<String> {
    let spec = fixation_spec_for(fixation_count)?;
    let table = pipeline.table();

    let mean_rmse = if images.is_empty() {
        None
    } else {
        let total: CliResult<f64> = images
            .par_iter()
            .enumerate()
            .map(|(idx, (_, img))| -> CliResult<f64> {
                let fixations = spec.resolve(
                    img.width() as u32,
                    img.height() as u32,
                    5,
                    settings.mask_sigma(),
                    settings.seed,
                )?;
                let mut acc = 0.0;
                for &f in &fixations {
                    let mut stream = rng::image_rng(settings.seed, idx as u64);
                    let out = pipeline.apply(img, f, &mut stream).map_err(CliError::from)?;
                    acc += out.rmse(img).map_err(CliError::from)?;
                }
                Ok(acc / fixations.len() as f64)
            })
            .sum();
        Some(total? / images.len() as f64)
    };

    let (acc_agg, acc_any) = if let Some((dataset, classifier)) = labeled {
        let stats: CliResult<Vec<(bool, bool)>> = dataset
            .par_iter()
            .enumerate()
            .map(|(idx, (img, label))| -> CliResult<(bool, bool)> {
                let fixations = spec.resolve(
                    img.width() as u32,
                    img.height() as u32,
                    5,
                    settings.mask_sigma(),
                    settings.seed,
                )?;
                let mut per_fix_scores = Vec::with_capacity(fixations.len());
                let mut per_fix_preds = Vec::with_capacity(fixations.len());
                for &f in &fixations {
                    let mut stream = rng::image_rng(settings.seed, idx as u64);
                    let out = pipeline.apply(img, f, &mut stream).map_err(CliError::from)?;
                    let scores = classifier.scores(&out);
                    per_fix_preds.push(argmax_lowest(&scores));
                    per_fix_scores.push(scores);
                }
                let agg = aggregate_scores(&per_fix_scores).map_err(CliError::from)?;
                Ok((
                    argmax_lowest(&agg) == *label,
                    any_correct(&per_fix_preds, *label),
                ))
            })
            .collect();
        let stats = stats?;
        let n = stats.len() as f64;
        let agg = stats.iter().filter(|s| s.0).count() as f64 / n;
        let any = stats.iter().filter(|s| s.1).count() as f64 / n;
        (Some(agg), Some(any))
    } else {
        (None, None)
    };

    let opt = |v: Option<f64>| v.map_or("-".to_string(), sig6);
    Ok(format!(
        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
        sig6(settings.sigma_t),
        sig6(settings.beta),
        settings.vd,
        fixation_count,
        sig6(table.max_color_sigma()),
        table.in_focus_width(),
        opt(mean_rmse),
        opt(acc_agg),
        opt(acc_any),
    ))
}
