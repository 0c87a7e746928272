//! `rblur apply`: run the foveation pipeline over a batch of images.

use std::path::PathBuf;
use std::sync::Mutex;

use clap::Args;
use rayon::prelude::*;
use retina_blur::{rng, RBlur};

use crate::config::SettingsArgs;
use crate::error::{CliError, CliResult};
use crate::imgio::{self, Format};
use crate::specs::FixationSpec;

#[derive(Debug, Args)]
pub struct ApplyArgs {
    /// Input image files (png, ppm, pgm, rbf)
    #[arg(long = "input", required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,

    /// Fixation spec: x,y | center | five | grid:N | scanpath:FILE
    #[arg(long, default_value = "center")]
    pub fixation: String,

    /// Points to sample for scanpath specs
    #[arg(long, default_value_t = 5)]
    pub count: usize,

    /// Output directory
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,

    /// Output format (png, ppm, pgm, raw); default png
    #[arg(long, default_value = "png")]
    pub format: String,

    #[command(flatten)]
    pub settings: SettingsArgs,
}

pub fn run(args: &ApplyArgs) -> CliResult<()> {
    let settings = args.settings.resolve()?;
    let spec = FixationSpec::parse(&args.fixation)?;
    let format = Format::parse(&args.format)?;
    let pipeline = RBlur::new(settings.rblur_config()).map_err(CliError::from)?;
    std::fs::create_dir_all(&args.out_dir)?;

    let failures: Mutex<Vec<String>> = Mutex::new(Vec::new());
    let pool = super::worker_pool(settings.jobs)?;
    pool.install(|| {
        args.inputs.par_iter().enumerate().for_each(|(index, input)| {
            if let Err(e) = process_one(input, index, &spec, format, &settings, &pipeline, args) {
                let msg = format!("{}: {e}", input.display());
                eprintln!("rblur apply: {msg}");
                failures.lock().unwrap().push(msg);
            }
        });
    });

    let failures = failures.into_inner().unwrap();
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::data(format!(
            "{} of {} inputs failed",
            failures.len(),
            args.inputs.len()
        )))
    }
}

fn process_one(
    input: &PathBuf,
    index: usize,
    spec: &FixationSpec,
    format: Format,
    settings: &crate::config::Settings,
    pipeline: &RBlur,
    args: &ApplyArgs,
) -> CliResult<()> {
    let img = imgio::load_image(input)?;
    let (w, h) = (img.width() as u32, img.height() as u32);
    let fixations = spec.resolve(
        w,
        h,
        args.count,
        settings.mask_sigma(),
        settings.seed.wrapping_add(index as u64),
    )?;
    let stem = input
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("image")
        .to_string();

    for (j, &fixation) in fixations.iter().enumerate() {
        // a fresh stream per fixation reproduces the same per-image noise,
        // so every fixation of one image sees one noise field
        let mut rng = rng::image_rng(settings.seed, index as u64);
        let result = pipeline
            .apply_detailed(&img, fixation, &mut rng)
            .map_err(CliError::from)?;
        if result.zero_weight_pixels > 0 {
            eprintln!(
                "rblur apply: {}: {} pixels had zero blend weight (gray fallback)",
                input.display(),
                result.zero_weight_pixels
            );
        }
        let out_path = args
            .out_dir
            .join(format!("{stem}_f{j}.{}", format.extension()));
        imgio::save_image(&result.image, &out_path, format)?;

        let mut sidecar = String::new();
        sidecar.push_str(&settings.echo());
        sidecar.push_str(&format!("input={}\n", input.display()));
        sidecar.push_str(&format!("fixation={},{}\n", fixation.x, fixation.y));
        std::fs::write(format!("{}.cfg", out_path.display()), sidecar)?;
    }
    Ok(())
}
