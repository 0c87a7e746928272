//! `rblur acuity-map`: dump the quantized acuity table and optionally
//! render the per-annulus blur sigmas as an image.

use std::path::PathBuf;

use clap::Args;
use retina_blur::{apply_viewing_distance, build_acuity_table, Image, VisualField};

use crate::config::{sig6, SettingsArgs};
use crate::error::{CliError, CliResult};
use crate::imgio::{self, Format};

#[derive(Debug, Args)]
pub struct AcuityMapArgs {
    /// Write the tabular dump here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Render each annulus shaded by its color-channel sigma (png)
    #[arg(long)]
    pub viz: Option<PathBuf>,

    #[command(flatten)]
    pub settings: SettingsArgs,
}

pub fn run(args: &AcuityMapArgs) -> CliResult<()> {
    let settings = args.settings.resolve()?;
    let cfg = settings.rblur_config();
    cfg.validate().map_err(CliError::from)?;
    let field = VisualField::square(settings.w_v).map_err(CliError::from)?;
    let base = build_acuity_table(&field, &cfg.acuity, settings.bins, settings.tau)
        .map_err(CliError::from)?;
    let table = apply_viewing_distance(&base, settings.vd).map_err(CliError::from)?;

    let mut text = String::new();
    text.push_str(&format!(
        "# w_v={} bins={} tau={} vd={}\n",
        settings.w_v, settings.bins, settings.tau, settings.vd
    ));
    text.push_str(&format!(
        "# color_bins={} gray_bins={} max_sigma_color={} max_sigma_gray={} in_focus_width={}\n",
        table.color_bins().len(),
        table.gray_bins().len(),
        sig6(table.max_color_sigma()),
        sig6(table.max_gray_sigma()),
        table.in_focus_width()
    ));
    text.push_str(&table.dump_to_string());
    super::write_output(args.out.as_deref(), &text)?;

    if let Some(viz) = &args.viz {
        let w = settings.w_v as usize;
        let center = settings.w_v / 2;
        let max_sigma = table.max_color_sigma().max(f64::EPSILON);
        let mut img = Image::zeros(1, w, w).map_err(CliError::from)?;
        for y in 0..w {
            for x in 0..w {
                let d = (x as u32).abs_diff(center).max((y as u32).abs_diff(center));
                let v = (table.color_sigma(d) / max_sigma) as f32;
                img.set(0, y, x, v);
            }
        }
        imgio::save_image(&img, viz, Format::from_extension(viz).unwrap_or(Format::Png))?;
    }
    Ok(())
}
