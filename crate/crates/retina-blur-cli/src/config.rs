//! Pipeline settings shared by every command: defaults, flat key=value
//! config files, command-line overrides, and the effective-config echo
//! written into output sidecars.

use std::fmt::Write as _;
use std::path::Path;

use clap::Args;
use retina_blur::{AcuityParams, RBlurConfig};

use crate::error::{CliError, CliResult};

/// Every pipeline tunable plus the batch knobs. Command-line flags override
/// config-file values, which override the defaults.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Settings {
    pub w_v: u32,
    pub cone_sigma: f64,
    pub rod_sigma: f64,
    pub alpha: f64,
    pub p_max: f64,
    pub beta: f64,
    pub sigma_t: f64,
    pub vd: u32,
    pub bins: u32,
    pub tau: u32,
    pub mask_sigma: Option<f64>,
    pub seed: u64,
    pub jobs: usize,
}

impl Default for Settings {
    fn default() -> Self {
        let acuity = AcuityParams::default();
        let pipeline = RBlurConfig::default();
        Settings {
            w_v: pipeline.field_width,
            cone_sigma: acuity.sigma_c,
            rod_sigma: acuity.sigma_r,
            alpha: acuity.alpha,
            p_max: acuity.p_max,
            beta: acuity.beta,
            sigma_t: pipeline.noise_scale,
            vd: pipeline.viewing_distance,
            bins: pipeline.bins,
            tau: pipeline.merge_threshold,
            mask_sigma: None,
            seed: 0,
            jobs: 1,
        }
    }
}

impl Settings {
    pub fn rblur_config(&self) -> RBlurConfig {
        RBlurConfig {
            acuity: AcuityParams {
                sigma_c: self.cone_sigma,
                sigma_r: self.rod_sigma,
                alpha: self.alpha,
                p_max: self.p_max,
                beta: self.beta,
            },
            field_width: self.w_v,
            noise_scale: self.sigma_t,
            viewing_distance: self.vd,
            bins: self.bins,
            merge_threshold: self.tau,
        }
    }

    /// Default inverted-Gaussian mask width: an eighth of the field.
    pub fn mask_sigma(&self) -> f64 {
        self.mask_sigma.unwrap_or(f64::from(self.w_v) / 8.0)
    }

    fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> CliResult<T> {
            v.parse()
                .map_err(|_| CliError::usage(format!("config key '{key}': bad value '{v}'")))
        }
        match key {
            "w_v" => self.w_v = num(key, value)?,
            "cone_sigma" => self.cone_sigma = num(key, value)?,
            "rod_sigma" => self.rod_sigma = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "p_max" => self.p_max = num(key, value)?,
            "beta" => self.beta = num(key, value)?,
            "sigma_t" => self.sigma_t = num(key, value)?,
            "vd" => self.vd = num(key, value)?,
            "bins" => self.bins = num(key, value)?,
            "tau" => self.tau = num(key, value)?,
            "mask_sigma" => self.mask_sigma = Some(num(key, value)?),
            "seed" => self.seed = num(key, value)?,
            "jobs" => self.jobs = num(key, value)?,
            other => {
                return Err(CliError::usage(format!("unknown config key '{other}'")));
            }
        }
        Ok(())
    }

    /// Parse a flat UTF-8 `key=value` file (blank lines and `#` comments
    /// allowed) on top of the current values.
    pub fn apply_file(&mut self, path: &Path) -> CliResult<()> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::data(format!("config file {}: {e}", path.display())))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::usage(format!(
                    "config file {} line {}: expected key=value",
                    path.display(),
                    lineno + 1
                ))
            })?;
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }

    /// The effective configuration, echoed into sidecar files.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "w_v={}", self.w_v);
        let _ = writeln!(s, "cone_sigma={}", self.cone_sigma);
        let _ = writeln!(s, "rod_sigma={}", self.rod_sigma);
        let _ = writeln!(s, "alpha={}", self.alpha);
        let _ = writeln!(s, "p_max={}", self.p_max);
        let _ = writeln!(s, "beta={}", self.beta);
        let _ = writeln!(s, "sigma_t={}", self.sigma_t);
        let _ = writeln!(s, "vd={}", self.vd);
        let _ = writeln!(s, "bins={}", self.bins);
        let _ = writeln!(s, "tau={}", self.tau);
        let _ = writeln!(s, "mask_sigma={}", self.mask_sigma());
        let _ = writeln!(s, "seed={}", self.seed);
        let _ = writeln!(s, "jobs={}", self.jobs);
        s
    }
}

/// Pipeline flags accepted by every command; unset flags fall back to the
/// config file and then to the defaults.
#[derive(Debug, Args, Clone, Default)]
pub struct SettingsArgs {
    /// Flat key=value config file applied before any flags
    #[arg(long)]
    pub config: Option<std::path::PathBuf>,

    /// Visual field width W_V (maximum image extent)
    #[arg(long)]
    pub wv: Option<u32>,

    /// Color (cone) acuity scale
    #[arg(long)]
    pub cone_sigma: Option<f64>,

    /// Gray (rod) acuity scale
    #[arg(long)]
    pub rod_sigma: Option<f64>,

    /// Cauchy tail width multiplier
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Peak rod acuity
    #[arg(long)]
    pub p_max: Option<f64>,

    /// Blur-sigma coefficient
    #[arg(long)]
    pub beta: Option<f64>,

    /// Photoreceptor noise scale sigma_t
    #[arg(long)]
    pub noise: Option<f64>,

    /// Viewing distance (low-eccentricity bins merged into bin 1)
    #[arg(long)]
    pub vd: Option<u32>,

    /// Histogram bin count for acuity quantization
    #[arg(long)]
    pub bins: Option<u32>,

    /// Merge threshold for underfull histogram bins
    #[arg(long)]
    pub tau: Option<u32>,

    /// Inverted-Gaussian mask width for scanpath sampling (default W_V/8)
    #[arg(long)]
    pub mask_sigma: Option<f64>,

    /// Master RNG seed
    #[arg(long)]
    pub seed: Option<u64>,

    /// Worker threads for batch processing
    #[arg(long)]
    pub jobs: Option<usize>,
}

impl SettingsArgs {
    pub fn resolve(&self) -> CliResult<Settings> {
        let mut s = Settings::default();
        if let Some(path) = &self.config {
            s.apply_file(path)?;
        }
        if let Some(v) = self.wv {
            s.w_v = v;
        }
        if let Some(v) = self.cone_sigma {
            s.cone_sigma = v;
        }
        if let Some(v) = self.rod_sigma {
            s.rod_sigma = v;
        }
        if let Some(v) = self.alpha {
            s.alpha = v;
        }
        if let Some(v) = self.p_max {
            s.p_max = v;
        }
        if let Some(v) = self.beta {
            s.beta = v;
        }
        if let Some(v) = self.noise {
            s.sigma_t = v;
        }
        if let Some(v) = self.vd {
            s.vd = v;
        }
        if let Some(v) = self.bins {
            s.bins = v;
        }
        if let Some(v) = self.tau {
            s.tau = v;
        }
        if let Some(v) = self.mask_sigma {
            s.mask_sigma = Some(v);
        }
        if let Some(v) = self.seed {
            s.seed = v;
        }
        if let Some(v) = self.jobs {
            s.jobs = v;
        }
        if s.jobs == 0 {
            return Err(CliError::usage("--jobs must be >= 1"));
        }
        Ok(s)
    }
}

/// Format with 6 significant digits, the report-field convention.
pub fn sig6(x: f64) -> String {
    if x == 0.0 {
        return "0.00000".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-4..=5).contains(&mag) {
        format!("{x:.5e}")
    } else {
        let decimals = (5 - mag).max(0) as usize;
        format!("{x:.decimals$}")
    }
}
