//! `rblur certify`: randomized-smoothing certification over a dataset
//! manifest with a bundled toy classifier, optionally wrapped behind the
//! foveation pipeline.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::Args;
use retina_blur::certify::{
    certified_accuracy_from, certify_dataset, CertificationResult, CertifyOutcome, CertifyParams,
    Classifier,
};
use retina_blur::{Image, RBlurClassifier, Scanpath};

use crate::config::{sig6, SettingsArgs};
use crate::error::{CliError, CliResult};
use crate::imgio;
use crate::specs::{self, FixationSpec, ManifestEntry};

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Dataset manifest: one `path<TAB>label` line per sample
    #[arg(long)]
    pub manifest: PathBuf,

    /// Classifier spec: constant:CLASS:NCLASSES:CxHxW | linear:FILE | centroid:FILE
    #[arg(long)]
    pub classifier: String,

    /// Wrap the classifier behind the foveation pipeline
    #[arg(long)]
    pub rblur: bool,

    /// Fixation spec for the wrapped classifier (center | five | grid:N)
    #[arg(long, default_value = "center")]
    pub fixation: String,

    /// Smoothing noise scale sigma_c (ignored with --compare-unmatched,
    /// which certifies at sigma_t and 2 sigma_t)
    #[arg(long)]
    pub sigma_c: Option<f64>,

    /// Estimation samples per input
    #[arg(long, default_value_t = 100_000)]
    pub n: u32,

    /// Selection samples per input
    #[arg(long, default_value_t = 100)]
    pub n0: u32,

    /// Failure probability of the certification bound
    #[arg(long = "cert-alpha", default_value_t = 0.001)]
    pub cert_alpha: f64,

    /// Radii for the certified-accuracy summary, comma-separated
    #[arg(long, default_value = "0.25,0.5,1.0")]
    pub radii: String,

    /// Certify at sigma_c = sigma_t and sigma_c = 2 sigma_t in one run
    #[arg(long)]
    pub compare_unmatched: bool,

    /// Write the report here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub settings: SettingsArgs,
}

fn parse_radii(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| CliError::usage(format!("bad radius '{v}'")))
        })
        .collect()
}

fn load_dataset(
    entries: &[ManifestEntry],
    shape: (usize, usize, usize),
) -> CliResult<Vec<(Image, usize)>> {
    let mut dataset = Vec::with_capacity(entries.len());
    for (i, entry) in entries.iter().enumerate() {
        let img = imgio::load_image(&entry.path)
            .map_err(|e| CliError::data(format!("manifest entry {i}: {e}")))?;
        let got = (img.channels(), img.height(), img.width());
        if got != shape {
            return Err(CliError::data(format!(
                "manifest entry {i} ({}): image shape {:?} does not match classifier {:?}",
                entry.path.display(),
                got,
                shape
            )));
        }
        dataset.push((img, entry.label));
    }
    Ok(dataset)
}

fn report_block(
    out: &mut String,
    label: &str,
    results: &[CertificationResult],
    entries: &[ManifestEntry],
    radii: &[f64],
) {
    let _ = writeln!(out, "# setting: {label}");
    let _ = writeln!(
        out,
        "# input\tpath\toutcome\tclass\tradius\tp_lower\tvotes\tsuccesses\tn0\tn\tsigma_c"
    );
    for (i, (r, entry)) in results.iter().zip(entries).enumerate() {
        let (outcome, class, radius) = match r.outcome {
            CertifyOutcome::Certified { class, radius } => {
                ("certified", class.to_string(), radius)
            }
            CertifyOutcome::Abstain => ("abstain", "-".to_string(), 0.0),
        };
        let _ = writeln!(
            out,
            "{i}\t{}\t{outcome}\t{class}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
            entry.path.display(),
            sig6(radius),
            sig6(r.p_lower),
            r.selection_votes,
            r.estimation_successes,
            r.n0,
            r.n,
            sig6(r.sigma_c),
        );
    }
    let labels: Vec<usize> = entries.iter().map(|e| e.label).collect();
    for &radius in radii {
        let acc = certified_accuracy_from(results, &labels, radius);
        let _ = writeln!(
            out,
            "# certified_accuracy\tr={}\t{}",
            sig6(radius),
            sig6(acc)
        );
    }
}

pub fn run(args: &CertifyArgs) -> CliResult<()> {
    let settings = args.settings.resolve()?;
    let radii = parse_radii(&args.radii)?;
    let loaded = specs::load_classifier(&args.classifier)?;
    let entries = specs::parse_manifest(&args.manifest)?;
    let dataset = load_dataset(&entries, (loaded.channels, loaded.height, loaded.width))?;

    let description = if args.rblur {
        format!("{} behind rblur ({})", loaded.description, args.fixation)
    } else {
        loaded.description.clone()
    };

    let wrapped: Box<dyn Classifier + Send + Sync> = if args.rblur {
        let spec = FixationSpec::parse(&args.fixation)?;
        if matches!(spec, FixationSpec::Scanpath(_)) {
            return Err(CliError::usage(
                "scanpath fixations are not supported for the certified wrapper; \
                 use center, five or grid:N",
            ));
        }
        let points = spec.resolve(
            loaded.width as u32,
            loaded.height as u32,
            5,
            settings.mask_sigma(),
            settings.seed,
        )?;
        let scanpath = Scanpath::new(points).map_err(CliError::from)?;
        Box::new(
            RBlurClassifier::new(loaded.classifier, settings.rblur_config(), scanpath)
                .map_err(CliError::from)?,
        )
    } else {
        loaded.classifier
    };

    let pool = super::worker_pool(settings.jobs)?;
    let mut out = String::new();
    let _ = writeln!(out, "# certify report");
    let _ = writeln!(out, "# classifier: {description}");
    let _ = writeln!(
        out,
        "# n0={} n={} alpha={} seed={}",
        args.n0,
        args.n,
        sig6(args.cert_alpha),
        settings.seed
    );

    if args.compare_unmatched {
        let sigma_t = settings.sigma_t;
        if sigma_t <= 0.0 {
            return Err(CliError::usage(
                "--compare-unmatched needs a positive sigma_t (--noise)",
            ));
        }
        for (label, sigma_c) in [
            (format!("matched sigma_c={}", sig6(sigma_t)), sigma_t),
            (format!("unmatched sigma_c={}", sig6(2.0 * sigma_t)), 2.0 * sigma_t),
        ] {
            let params = CertifyParams {
                sigma_c,
                n0: args.n0,
                n: args.n,
                alpha: args.cert_alpha,
            };
            let results = pool
                .install(|| certify_dataset(&wrapped, &dataset, &params, settings.seed))
                .map_err(CliError::from)?;
            report_block(&mut out, &label, &results, &entries, &radii);
        }
    } else {
        let sigma_c = args.sigma_c.ok_or_else(|| {
            CliError::usage("--sigma-c is required (or use --compare-unmatched)")
        })?;
        let params = CertifyParams {
            sigma_c,
            n0: args.n0,
            n: args.n,
            alpha: args.cert_alpha,
        };
        params.validate().map_err(CliError::from)?;
        let results = pool
            .install(|| certify_dataset(&wrapped, &dataset, &params, settings.seed))
            .map_err(CliError::from)?;
        report_block(
            &mut out,
            &format!("sigma_c={}", sig6(sigma_c)),
            &results,
            &entries,
            &radii,
        );
    }

    super::write_output(args.out.as_deref(), &out)
}
