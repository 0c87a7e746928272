//! `rblur scanpath`: sample fixation points from a saliency heatmap.

use clap::Args;
use retina_blur::{argmax_scanpath, center_bias_heatmap, rng, sample_scanpath, VisualField};

use crate::config::SettingsArgs;
use crate::error::{CliError, CliResult};
use crate::imgio;

#[derive(Debug, Args)]
pub struct ScanpathArgs {
    /// Heatmap image file, or "center-bias" for the bundled stand-in
    /// generator (a Gaussian bump at the field center, filling in for an
    /// external saliency model such as DeepGaze)
    #[arg(long)]
    pub heatmap: String,

    /// Number of fixation points
    #[arg(long, default_value_t = 5)]
    pub count: usize,

    /// Take the argmax instead of sampling (reproducible demos)
    #[arg(long)]
    pub argmax: bool,

    #[command(flatten)]
    pub settings: SettingsArgs,
}

pub fn run(args: &ScanpathArgs) -> CliResult<()> {
    let settings = args.settings.resolve()?;
    let heatmap = if args.heatmap == "center-bias" {
        let field = VisualField::square(settings.w_v).map_err(CliError::from)?;
        center_bias_heatmap(&field)
    } else {
        imgio::load_heatmap(std::path::Path::new(&args.heatmap))?
    };
    let path = if args.argmax {
        argmax_scanpath(&heatmap, args.count, settings.mask_sigma())
    } else {
        let mut rng = rng::scanpath_rng(settings.seed, 0);
        sample_scanpath(&heatmap, args.count, settings.mask_sigma(), &mut rng)
    }
    .map_err(|e| CliError::data(e.to_string()))?;

    let mut out = String::new();
    for p in path.points() {
        out.push_str(&format!("{} {}\n", p.x, p.y));
    }
    super::write_output(None, &out)
}
