//! The foveation pipeline: photoreceptor noise, grayscale copy, adaptive
//! Gaussian blur of both copies, and the acuity-weighted blend.
//!
//! Every stage after the noise is a convex-combination operator, so output
//! values stay inside the noisy image's value range and constant images are
//! fixed points. Values are never clamped here; clamping to [0, 1] belongs
//! to integer-format export.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::acuity::{build_acuity_table, apply_viewing_distance, AcuityParams, AcuityTable};
use crate::error::{Error, Result};
use crate::geometry::{eccentricity_map_for, EccentricityMap, FixationPoint, VisualField};
use crate::image::Image;

/// Every tunable of the pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RBlurConfig {
    pub acuity: AcuityParams,
    /// Width of the (square) visual field; the maximum image extent.
    pub field_width: u32,
    /// Scale of the photoreceptor noise.
    pub noise_scale: f64,
    /// Viewing distance: number of low-eccentricity bins merged into bin 1.
    pub viewing_distance: u32,
    /// Histogram bin count for acuity quantization.
    pub bins: u32,
    /// Merge threshold for underfull histogram bins.
    pub merge_threshold: u32,
}

impl Default for RBlurConfig {
    fn default() -> Self {
        RBlurConfig {
            acuity: AcuityParams::default(),
            field_width: 224,
            noise_scale: 0.125,
            viewing_distance: 3,
            bins: 84,
            merge_threshold: 2,
        }
    }
}

impl RBlurConfig {
    pub fn validate(&self) -> Result<()> {
        self.acuity.validate()?;
        if self.field_width == 0 {
            return Err(Error::config("field width must be >= 1"));
        }
        if !self.noise_scale.is_finite() || self.noise_scale < 0.0 {
            return Err(Error::config("noise scale must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn field(&self) -> VisualField {
        VisualField::square(self.field_width).expect("validated field width")
    }
}

/// Add independent `N(0, sigma_t^2)` noise to every sample. Values are not
/// clamped; `sigma_t = 0` returns the input unchanged.
pub fn add_gaussian_noise<R: Rng + ?Sized>(img: &Image, sigma_t: f64, rng: &mut R) -> Result<Image> {
    if !sigma_t.is_finite() || sigma_t < 0.0 {
        return Err(Error::domain(
            "add_gaussian_noise",
            format!("noise scale must be finite and >= 0, got {sigma_t}"),
        ));
    }
    let mut out = img.clone();
    if sigma_t == 0.0 {
        return Ok(out);
    }
    let s = sigma_t as f32;
    for v in out.as_mut_slice() {
        let z: f32 = rng.sample(StandardNormal);
        *v += s * z;
    }
    Ok(out)
}

/// ITU-R BT.601 luma: `0.299 R + 0.587 G + 0.114 B`. A 1-channel input is
/// already gray and is returned unchanged.
pub fn to_grayscale(img: &Image) -> Image {
    if img.channels() == 1 {
        return img.clone();
    }
    let (h, w) = (img.height(), img.width());
    let n = h * w;
    let r = img.plane(0);
    let g = img.plane(1);
    let b = img.plane(2);
    let mut data = Vec::with_capacity(n);
    for i in 0..n {
        data.push(0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i]);
    }
    Image::from_vec(1, h, w, data).expect("finite luma from finite input")
}

/// Normalized 1-D Gaussian kernel with radius `ceil(3 sigma)`.
fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as usize;
    let mut k = Vec::with_capacity(2 * radius + 1);
    let denom = 2.0 * sigma * sigma;
    for i in 0..=(2 * radius) {
        let x = i as f64 - radius as f64;
        k.push((-x * x / denom).exp());
    }
    let sum: f64 = k.iter().sum();
    for v in &mut k {
        *v /= sum;
    }
    k
}

/// Reflect (symmetric, edge-repeating) index fold: ...cba|abc...|cba...
#[inline]
fn reflect(i: isize, n: usize) -> usize {
    let n = n as isize;
    let period = 2 * n;
    let mut m = i % period;
    if m < 0 {
        m += period;
    }
    if m < n {
        m as usize
    } else {
        (period - 1 - m) as usize
    }
}

/// Separable convolution of one plane, f64 accumulation.
fn blur_plane(src: &[f32], h: usize, w: usize, kernel: &[f64]) -> Vec<f32> {
    let radius = kernel.len() / 2;
    let mut tmp = vec![0.0f64; h * w];
    for y in 0..h {
        let row = &src[y * w..(y + 1) * w];
        for x in 0..w {
            let mut acc = 0.0f64;
            for (j, &kv) in kernel.iter().enumerate() {
                let xi = reflect(x as isize + j as isize - radius as isize, w);
                acc += kv * f64::from(row[xi]);
            }
            tmp[y * w + x] = acc;
        }
    }
    let mut out = vec![0.0f32; h * w];
    for y in 0..h {
        for x in 0..w {
            let mut acc = 0.0f64;
            for (j, &kv) in kernel.iter().enumerate() {
                let yi = reflect(y as isize + j as isize - radius as isize, h);
                acc += kv * tmp[yi * w + x];
            }
            out[y * w + x] = acc as f32;
        }
    }
    out
}

/// Blur every channel with one Gaussian of standard deviation `sigma`
/// (pixels). `sigma = 0` is the identity; borders use reflect padding.
pub fn gaussian_blur_fixed(img: &Image, sigma: f64) -> Result<Image> {
    if !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::domain(
            "gaussian_blur_fixed",
            format!("sigma must be finite and >= 0, got {sigma}"),
        ));
    }
    if sigma == 0.0 {
        return Ok(img.clone());
    }
    let kernel = gaussian_kernel(sigma);
    let (c, h, w) = (img.channels(), img.height(), img.width());
    let mut out = Image::zeros(c, h, w)?;
    for ch in 0..c {
        let blurred = blur_plane(img.plane(ch), h, w, &kernel);
        out.plane_mut(ch).copy_from_slice(&blurred);
    }
    Ok(out)
}

/// Which sigma lookup of the table applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlurChannel {
    Color,
    Gray,
}

fn check_emap_matches(img: &Image, emap: &EccentricityMap) -> Result<()> {
    if emap.width() as usize != img.width() || emap.height() as usize != img.height() {
        return Err(Error::domain(
            "adaptive blur",
            format!(
                "eccentricity map {}x{} does not match image {}x{}",
                emap.width(),
                emap.height(),
                img.width(),
                img.height()
            ),
        ));
    }
    Ok(())
}

/// Eccentricity-adaptive blur: for each distinct bin sigma, the whole image
/// is convolved once and the result is copied into that bin's pixel region.
/// Equivalently, every output pixel is the `sigma(d(p))`-kernel weighted sum
/// over the original image.
pub fn adaptive_blur(
    img: &Image,
    table: &AcuityTable,
    emap: &EccentricityMap,
    channel: BlurChannel,
) -> Result<Image> {
    check_emap_matches(img, emap)?;
    if emap.max_distance() > table.field_width() {
        return Err(Error::domain(
            "adaptive blur",
            "eccentricity map distances exceed the table's field width",
        ));
    }
    let sigma_of = |d: u32| match channel {
        BlurChannel::Color => table.color_sigma(d),
        BlurChannel::Gray => table.gray_sigma(d),
    };

    // one blurred copy per distinct sigma present in the map
    let max_d = emap.max_distance();
    let mut distinct: Vec<f64> = Vec::new();
    for d in 0..=max_d {
        let s = sigma_of(d);
        if !distinct.iter().any(|&x| x == s) {
            distinct.push(s);
        }
    }

    let (c, h, w) = (img.channels(), img.height(), img.width());
    let mut out = Image::zeros(c, h, w)?;
    for &sigma in &distinct {
        let blurred = if sigma == 0.0 {
            img.clone()
        } else {
            gaussian_blur_fixed(img, sigma)?
        };
        for y in 0..h {
            for x in 0..w {
                if sigma_of(emap.distance(x as u32, y as u32)) == sigma {
                    for ch in 0..c {
                        out.set(ch, y, x, blurred.get(ch, y, x));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Blend output plus the count of pixels whose acuity weights summed to
/// zero (possible only with pathological custom parameters; those pixels
/// fall back to the gray value).
#[derive(Debug, Clone)]
pub struct BlendResult {
    pub image: Image,
    pub zero_weight_pixels: usize,
}

/// Pixel-wise weighted combination of the blurred color and gray copies,
/// weighted by the quantized color and gray acuity at each pixel's
/// eccentricity: `(v_c * D_C + v_g * D_R) / (D_C + D_R)`.
pub fn blend(
    color_blurred: &Image,
    gray_blurred: &Image,
    table: &AcuityTable,
    emap: &EccentricityMap,
) -> Result<BlendResult> {
    check_emap_matches(color_blurred, emap)?;
    if gray_blurred.channels() != 1
        || gray_blurred.height() != color_blurred.height()
        || gray_blurred.width() != color_blurred.width()
    {
        return Err(Error::domain(
            "blend",
            "gray copy must be 1-channel with the color copy's extent",
        ));
    }
    let (c, h, w) = (
        color_blurred.channels(),
        color_blurred.height(),
        color_blurred.width(),
    );
    let mut out = Image::zeros(c, h, w)?;
    let gray = gray_blurred.plane(0);
    let mut zero_weight_pixels = 0usize;
    for y in 0..h {
        for x in 0..w {
            let d = emap.distance(x as u32, y as u32);
            let wc = table.color_acuity(d);
            let wg = table.gray_acuity(d);
            let denom = wc + wg;
            let g = f64::from(gray[y * w + x]);
            for ch in 0..c {
                let v = if denom > 0.0 {
                    (f64::from(color_blurred.get(ch, y, x)) * wc + g * wg) / denom
                } else {
                    g
                };
                out.set(ch, y, x, v as f32);
            }
            if denom <= 0.0 {
                zero_weight_pixels += 1;
            }
        }
    }
    Ok(BlendResult {
        image: out,
        zero_weight_pixels,
    })
}

/// A built pipeline: the config plus its quantized acuity table with the
/// viewing distance already applied. Immutable and safe to share across
/// threads.
#[derive(Debug, Clone)]
pub struct RBlur {
    config: RBlurConfig,
    table: AcuityTable,
}

impl RBlur {
    pub fn new(config: RBlurConfig) -> Result<Self> {
        config.validate()?;
        let field = config.field();
        let base = build_acuity_table(&field, &config.acuity, config.bins, config.merge_threshold)?;
        let table = apply_viewing_distance(&base, config.viewing_distance)?;
        Ok(RBlur { config, table })
    }

    pub fn config(&self) -> &RBlurConfig {
        &self.config
    }

    pub fn table(&self) -> &AcuityTable {
        &self.table
    }

    /// Noise, dual adaptive blur, and blend, fixated at `f`. Deterministic
    /// given the RNG stream; the fixation must lie in the field and the
    /// image must fit in it.
    pub fn apply<R: Rng + ?Sized>(
        &self,
        img: &Image,
        f: FixationPoint,
        rng: &mut R,
    ) -> Result<Image> {
        Ok(self.apply_detailed(img, f, rng)?.image)
    }

    /// Like [`RBlur::apply`] but keeps the blend diagnostics.
    pub fn apply_detailed<R: Rng + ?Sized>(
        &self,
        img: &Image,
        f: FixationPoint,
        rng: &mut R,
    ) -> Result<BlendResult> {
        let field = self.config.field();
        if img.width() > field.width() as usize || img.height() > field.width() as usize {
            return Err(Error::domain(
                "rblur",
                format!(
                    "image {}x{} exceeds the visual field width {}",
                    img.width(),
                    img.height(),
                    field.width()
                ),
            ));
        }
        let emap = eccentricity_map_for(f, &field, img.width() as u32, img.height() as u32)?;
        let noisy = add_gaussian_noise(img, self.config.noise_scale, rng)?;
        let gray = to_grayscale(&noisy);
        let color_blurred = adaptive_blur(&noisy, &self.table, &emap, BlurChannel::Color)?;
        let gray_blurred = adaptive_blur(&gray, &self.table, &emap, BlurChannel::Gray)?;
        blend(&color_blurred, &gray_blurred, &self.table, &emap)
    }
}

/// One-shot convenience wrapper: build the table and run the pipeline.
pub fn rblur<R: Rng + ?Sized>(
    img: &Image,
    f: FixationPoint,
    config: &RBlurConfig,
    rng: &mut R,
) -> Result<Image> {
    RBlur::new(*config)?.apply(img, f, rng)
}
