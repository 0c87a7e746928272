//! Photopic/scotopic acuity curves, their quantization into distance bins,
//! viewing-distance adjustment, and the acuity-to-blur-sigma mapping.
//!
//! The acuity envelope is the pointwise max of a Laplace PDF (sharp foveal
//! core) and a wider Cauchy PDF (heavy peripheral tail), normalized by its
//! peak so the value at eccentricity 0 is exactly 1. Color acuity follows
//! the envelope; gray (rod) acuity is its reflected complement scaled to
//! `p_max`.
//!
//! Quantization lists every acuity value reachable in the field (fixation at
//! the origin, distances `0..=W_V`), histograms the values into `B` uniform
//! bins, merges bins holding fewer than `tau` values into their left
//! neighbor, and assigns each distance the mean of its bin. Blur sigma for a
//! distance is `beta * W_V * (1 - quantized acuity)`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geometry::VisualField;

/// Tunables of the acuity model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcuityParams {
    /// Scale of the color (cone) envelope.
    pub sigma_c: f64,
    /// Scale of the gray (rod) envelope.
    pub sigma_r: f64,
    /// Width multiplier applied to the Cauchy tail.
    pub alpha: f64,
    /// Peak rod acuity.
    pub p_max: f64,
    /// Blur-sigma coefficient.
    pub beta: f64,
}

impl Default for AcuityParams {
    fn default() -> Self {
        AcuityParams {
            sigma_c: 0.12,
            sigma_r: 0.09,
            alpha: 2.5,
            p_max: 0.12,
            beta: 0.05,
        }
    }
}

impl AcuityParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma_c", self.sigma_c),
            ("sigma_r", self.sigma_r),
            ("alpha", self.alpha),
            ("p_max", self.p_max),
            ("beta", self.beta),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite { what: name, value: v });
            }
        }
        if self.sigma_c <= 0.0 || self.sigma_r <= 0.0 || self.alpha <= 0.0 {
            return Err(Error::config(
                "sigma_c, sigma_r and alpha must be strictly positive",
            ));
        }
        // p_max = 0 and beta = 0 are legal degenerate settings (no gray
        // contribution / no blur), used by the identity configuration.
        if self.p_max < 0.0 || self.p_max > 1.0 {
            return Err(Error::config("p_max must lie in [0, 1]"));
        }
        if self.beta < 0.0 {
            return Err(Error::config("beta must be >= 0"));
        }
        Ok(())
    }
}

#[inline]
fn laplace_pdf(e: f64, scale: f64) -> f64 {
    (-e.abs() / scale).exp() / (2.0 * scale)
}

#[inline]
fn cauchy_pdf(e: f64, scale: f64) -> f64 {
    let t = e / scale;
    1.0 / (std::f64::consts::PI * scale * (1.0 + t * t))
}

/// Acuity envelope at eccentricity `e`: peak-normalized
/// `max(Laplace(e; 0, sigma), Cauchy(e; 0, alpha * sigma))`.
///
/// Both PDFs attain their maximum at 0, so the normalized envelope is 1 at
/// the fovea and decays monotonically into (0, 1].
pub fn acuity_envelope(e: f64, sigma: f64, alpha: f64) -> Result<f64> {
    if !e.is_finite() {
        return Err(Error::NonFinite {
            what: "eccentricity",
            value: e,
        });
    }
    if !sigma.is_finite() || !alpha.is_finite() || sigma <= 0.0 || alpha <= 0.0 {
        return Err(Error::domain(
            "acuity_envelope",
            format!("sigma and alpha must be finite and positive (sigma={sigma}, alpha={alpha})"),
        ));
    }
    if e < 0.0 {
        return Err(Error::domain(
            "acuity_envelope",
            format!("eccentricity must be >= 0, got {e}"),
        ));
    }
    let peak = laplace_pdf(0.0, sigma).max(cauchy_pdf(0.0, alpha * sigma));
    Ok(laplace_pdf(e, sigma).max(cauchy_pdf(e, alpha * sigma)) / peak)
}

/// Color (cone) acuity, in [0, 1], non-increasing in `e`.
pub fn photopic_acuity(e: f64, params: &AcuityParams) -> Result<f64> {
    acuity_envelope(e, params.sigma_c, params.alpha)
}

/// Gray (rod) acuity, in [0, p_max], non-decreasing in `e`.
pub fn scotopic_acuity(e: f64, params: &AcuityParams) -> Result<f64> {
    Ok(params.p_max * (1.0 - acuity_envelope(e, params.sigma_r, params.alpha)?))
}

/// One quantization bin: a contiguous distance range sharing a quantized
/// acuity value and blur sigma.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AcuityBin {
    /// Smallest member distance.
    pub d_min: u32,
    /// Largest member distance (inclusive).
    pub d_max: u32,
    /// Quantized acuity assigned to every member distance.
    pub acuity: f64,
    /// Blur sigma in pixels for this bin's channel.
    pub sigma: f64,
}

impl AcuityBin {
    pub fn member_count(&self) -> u32 {
        self.d_max - self.d_min + 1
    }
}

#[derive(Debug, Clone, PartialEq)]
struct ChannelTable {
    /// Bins ordered by distance (bin 1 = lowest eccentricity first).
    bins: Vec<AcuityBin>,
    acuity_by_distance: Vec<f64>,
    sigma_by_distance: Vec<f64>,
}

impl ChannelTable {
    fn from_bins(bins: Vec<AcuityBin>, w_v: u32) -> Self {
        let mut acuity_by_distance = vec![0.0; w_v as usize + 1];
        let mut sigma_by_distance = vec![0.0; w_v as usize + 1];
        for bin in &bins {
            for d in bin.d_min..=bin.d_max {
                acuity_by_distance[d as usize] = bin.acuity;
                sigma_by_distance[d as usize] = bin.sigma;
            }
        }
        ChannelTable {
            bins,
            acuity_by_distance,
            sigma_by_distance,
        }
    }

    /// Reassign bin values for viewing distance `k`: a pixel in bin `i`
    /// (1-indexed) takes the value of bin `max(1, i - k)`; bins 1..=k+1
    /// collapse into a single bin carrying bin 1's value.
    fn shifted(&self, k: u32, w_v: u32) -> Self {
        let n = self.bins.len();
        let k = (k as usize).min(n - 1);
        if k == 0 {
            return self.clone();
        }
        let mut bins = Vec::with_capacity(n - k);
        bins.push(AcuityBin {
            d_min: self.bins[0].d_min,
            d_max: self.bins[k].d_max,
            acuity: self.bins[0].acuity,
            sigma: self.bins[0].sigma,
        });
        for i in (k + 1)..n {
            bins.push(AcuityBin {
                d_min: self.bins[i].d_min,
                d_max: self.bins[i].d_max,
                acuity: self.bins[i - k].acuity,
                sigma: self.bins[i - k].sigma,
            });
        }
        ChannelTable::from_bins(bins, w_v)
    }

    fn max_sigma(&self) -> f64 {
        self.bins.iter().fold(0.0f64, |m, b| m.max(b.sigma))
    }
}

/// Quantized per-eccentricity-distance acuity and blur-sigma lookup for both
/// channels. Immutable once built; cheap to share across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct AcuityTable {
    w_v: u32,
    beta: f64,
    bin_count: u32,
    merge_threshold: u32,
    viewing_distance: u32,
    color: ChannelTable,
    gray: ChannelTable,
}

/// Histogram + merge quantizer. Returns the surviving bins as contiguous
/// index ranges over `values` (ascending index order).
///
/// Bins are `bin_count` uniform intervals over `[min, max]` of the values.
/// A single left-to-right pass (in ascending value order) folds every bin
/// holding fewer than `tau` values into the accumulated bin on its left;
/// afterwards an underfull leftmost bin merges rightward. Monotone inputs
/// therefore always produce contiguous index ranges.
fn quantize_bins(values: &[f64], bin_count: u32, tau: u32) -> Result<Vec<(usize, usize)>> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || !hi.is_finite() {
        return Err(Error::NonFinite {
            what: "acuity value",
            value: if lo.is_finite() { hi } else { lo },
        });
    }
    if lo == hi {
        // degenerate channel (e.g. p_max = 0): one bin holding everything
        return Ok(vec![(0, values.len() - 1)]);
    }
    if bin_count < 2 {
        return Err(Error::config("bin count must be >= 2"));
    }

    let b = bin_count as usize;
    // sparse histogram: original bin index -> member value-indices; the
    // index formula floor((v - lo) / (hi - lo) * B), clamped to the last
    // bin, defines the histogram
    let mut original: std::collections::BTreeMap<usize, Vec<usize>> = std::collections::BTreeMap::new();
    for (i, &v) in values.iter().enumerate() {
        let idx = (((v - lo) / (hi - lo) * b as f64) as usize).min(b - 1);
        original.entry(idx).or_default().push(i);
    }

    // empty bins hold fewer than tau values and merge as no-ops, so only
    // the non-empty bins need visiting
    let mut merged: Vec<Vec<usize>> = Vec::new();
    for members in original.into_values() {
        if merged.is_empty() || members.len() >= tau as usize {
            merged.push(members);
        } else {
            merged.last_mut().unwrap().extend(members);
        }
    }
    while merged.len() > 1 && merged[0].len() < tau as usize {
        let first = merged.remove(0);
        let target = &mut merged[0];
        target.splice(0..0, first);
    }
    if merged.len() < 2 {
        return Err(Error::config(format!(
            "quantization left {} bin(s); reduce the merge threshold or increase the bin count",
            merged.len()
        )));
    }

    let mut ranges = Vec::with_capacity(merged.len());
    for members in merged {
        let d_min = *members.iter().min().unwrap();
        let d_max = *members.iter().max().unwrap();
        debug_assert_eq!(members.len(), d_max - d_min + 1, "bin members not contiguous");
        ranges.push((d_min, d_max));
    }
    ranges.sort_unstable_by_key(|r| r.0);
    Ok(ranges)
}

fn channel_from_values(values: &[f64], bin_count: u32, tau: u32, w_v: u32, beta: f64) -> Result<ChannelTable> {
    let ranges = quantize_bins(values, bin_count, tau)?;
    let bins = ranges
        .into_iter()
        .map(|(d_min, d_max)| {
            let mean = values[d_min..=d_max].iter().sum::<f64>() / (d_max - d_min + 1) as f64;
            AcuityBin {
                d_min: d_min as u32,
                d_max: d_max as u32,
                acuity: mean,
                sigma: beta * f64::from(w_v) * (1.0 - mean),
            }
        })
        .collect();
    Ok(ChannelTable::from_bins(bins, w_v))
}

/// Build the quantized acuity table for a field: raw curves sampled at
/// distances `0..=W_V`, histogrammed into `bin_count` bins per channel and
/// merged with threshold `tau`.
pub fn build_acuity_table(
    field: &VisualField,
    params: &AcuityParams,
    bin_count: u32,
    tau: u32,
) -> Result<AcuityTable> {
    params.validate()?;
    if bin_count < 2 {
        return Err(Error::config("bin count must be >= 2"));
    }
    let w = field.width();
    let n = w as usize + 1;
    let mut color_values = Vec::with_capacity(n);
    let mut gray_values = Vec::with_capacity(n);
    for d in 0..n {
        let e = d as f64 / f64::from(w);
        color_values.push(photopic_acuity(e, params)?);
        gray_values.push(scotopic_acuity(e, params)?);
    }
    Ok(AcuityTable {
        w_v: w,
        beta: params.beta,
        bin_count,
        merge_threshold: tau,
        viewing_distance: 0,
        color: channel_from_values(&color_values, bin_count, tau, w, params.beta)?,
        gray: channel_from_values(&gray_values, bin_count, tau, w, params.beta)?,
    })
}

/// Widen the in-focus region by `k` bins: every pixel's bin value moves to
/// that of bin `max(1, i - k)` in both channels. Errors when `k` reaches the
/// color channel's bin count (the gray channel may legitimately degenerate
/// to one bin, so its shift saturates instead).
pub fn apply_viewing_distance(table: &AcuityTable, k: u32) -> Result<AcuityTable> {
    if k == 0 {
        return Ok(table.clone());
    }
    if k as usize >= table.color.bins.len() {
        return Err(Error::config(format!(
            "viewing distance {k} must be smaller than the color bin count {}",
            table.color.bins.len()
        )));
    }
    Ok(AcuityTable {
        w_v: table.w_v,
        beta: table.beta,
        bin_count: table.bin_count,
        merge_threshold: table.merge_threshold,
        viewing_distance: table.viewing_distance + k,
        color: table.color.shifted(k, table.w_v),
        gray: table.gray.shifted(k, table.w_v),
    })
}

impl AcuityTable {
    pub fn field_width(&self) -> u32 {
        self.w_v
    }

    pub fn bin_count_requested(&self) -> u32 {
        self.bin_count
    }

    pub fn merge_threshold(&self) -> u32 {
        self.merge_threshold
    }

    pub fn viewing_distance(&self) -> u32 {
        self.viewing_distance
    }

    pub fn color_bins(&self) -> &[AcuityBin] {
        &self.color.bins
    }

    pub fn gray_bins(&self) -> &[AcuityBin] {
        &self.gray.bins
    }

    /// Quantized color acuity at integer distance `d <= W_V`.
    #[inline]
    pub fn color_acuity(&self, d: u32) -> f64 {
        self.color.acuity_by_distance[d as usize]
    }

    #[inline]
    pub fn gray_acuity(&self, d: u32) -> f64 {
        self.gray.acuity_by_distance[d as usize]
    }

    /// Blur sigma in pixels for the color copy at distance `d`.
    #[inline]
    pub fn color_sigma(&self, d: u32) -> f64 {
        self.color.sigma_by_distance[d as usize]
    }

    #[inline]
    pub fn gray_sigma(&self, d: u32) -> f64 {
        self.gray.sigma_by_distance[d as usize]
    }

    pub fn color_acuities(&self) -> &[f64] {
        &self.color.acuity_by_distance
    }

    pub fn gray_acuities(&self) -> &[f64] {
        &self.gray.acuity_by_distance
    }

    pub fn max_color_sigma(&self) -> f64 {
        self.color.max_sigma()
    }

    pub fn max_gray_sigma(&self) -> f64 {
        self.gray.max_sigma()
    }

    /// Side length in pixels of the full-acuity (bin 1) square region, i.e.
    /// the number of distances carrying bin 1's color value.
    pub fn in_focus_width(&self) -> u32 {
        self.color.bins[0].member_count()
    }

    /// Plain-text tabular dump: one row per distance with the quantized
    /// acuities and sigmas. Values are printed with shortest round-trip
    /// precision so the dump can back golden-file comparisons.
    pub fn dump_to_string(&self) -> String {
        let mut out = String::new();
        out.push_str("# distance\tD_C_q\tD_R_q\tsigma_color\tsigma_gray\n");
        for d in 0..=self.w_v {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                d,
                self.color_acuity(d),
                self.gray_acuity(d),
                self.color_sigma(d),
                self.gray_sigma(d)
            );
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // independent hand evaluation of the two PDFs, used as the oracle for
    // the envelope examples
    fn oracle_envelope(e: f64, sigma: f64, alpha: f64) -> f64 {
        let lap = |x: f64| (-x.abs() / sigma).exp() / (2.0 * sigma);
        let s = alpha * sigma;
        let cau = |x: f64| 1.0 / (std::f64::consts::PI * s * (1.0 + (x / s) * (x / s)));
        lap(e).max(cau(e)) / lap(0.0).max(cau(0.0))
    }

    #[test]
    fn envelope_is_one_at_fovea() {
        assert_eq!(acuity_envelope(0.0, 0.12, 2.5).unwrap(), 1.0);
    }

    #[test]
    fn envelope_vanishes_at_large_eccentricity() {
        assert!(acuity_envelope(1e6, 0.12, 2.5).unwrap() < 1e-9);
    }

    #[test]
    fn envelope_matches_pdf_oracle() {
        // at e=0.3 the Cauchy tail dominates the Laplace core
        let v = acuity_envelope(0.3, 0.12, 2.5).unwrap();
        assert!((v - oracle_envelope(0.3, 0.12, 2.5)).abs() < 1e-15);
        assert!((v - 0.127_323_954_473_516_24).abs() < 1e-15);
        for i in 0..200 {
            let e = i as f64 * 0.01;
            let got = acuity_envelope(e, 0.12, 2.5).unwrap();
            assert!((got - oracle_envelope(e, 0.12, 2.5)).abs() < 1e-15, "e={e}");
        }
    }

    #[test]
    fn envelope_rejects_bad_inputs() {
        assert!(acuity_envelope(f64::NAN, 0.12, 2.5).is_err());
        assert!(acuity_envelope(-0.1, 0.12, 2.5).is_err());
        assert!(acuity_envelope(0.1, 0.0, 2.5).is_err());
        assert!(acuity_envelope(0.1, 0.12, -1.0).is_err());
    }

    #[test]
    fn acuity_values_at_fovea_and_periphery() {
        let p = AcuityParams::default();
        assert_eq!(photopic_acuity(0.0, &p).unwrap(), 1.0);
        assert_eq!(scotopic_acuity(0.0, &p).unwrap(), 0.0);
        // envelope -> 0, so D_R -> p_max
        assert!((scotopic_acuity(1e6, &p).unwrap() - p.p_max).abs() < 1e-9);
    }

    #[test]
    fn photopic_at_half_matches_oracle() {
        let p = AcuityParams::default();
        let v = photopic_acuity(0.5, &p).unwrap();
        assert!((v - oracle_envelope(0.5, 0.12, 2.5)).abs() < 1e-15);
        assert!((v - 0.067_406_799_427_155_66).abs() < 1e-15);
    }

    #[test]
    fn acuity_curves_monotone_and_blend_safe() {
        let p = AcuityParams::default();
        let mut prev_c = f64::INFINITY;
        let mut prev_r = -1.0;
        for i in 0..=10_000 {
            let e = i as f64 / 10_000.0 * 2.0;
            let c = photopic_acuity(e, &p).unwrap();
            let r = scotopic_acuity(e, &p).unwrap();
            assert!(c <= prev_c + 1e-15, "D_C increased at e={e}");
            assert!(r >= prev_r - 1e-15, "D_R decreased at e={e}");
            assert!(c + r > 0.0);
            prev_c = c;
            prev_r = r;
        }
    }

    #[test]
    fn params_validation() {
        assert!(AcuityParams::default().validate().is_ok());
        let zeroed = AcuityParams {
            p_max: 0.0,
            beta: 0.0,
            ..AcuityParams::default()
        };
        assert!(zeroed.validate().is_ok());
        assert!(AcuityParams { sigma_c: 0.0, ..AcuityParams::default() }.validate().is_err());
        assert!(AcuityParams { p_max: 1.5, ..AcuityParams::default() }.validate().is_err());
        assert!(AcuityParams { beta: -0.1, ..AcuityParams::default() }.validate().is_err());
    }

    #[test]
    fn identity_quantization_when_every_value_isolated() {
        // tau = 0 and a bin count fine enough that each distinct value gets
        // its own bin makes quantization the identity
        let field = VisualField::square(8).unwrap();
        let p = AcuityParams::default();
        let table = build_acuity_table(&field, &p, 200_000, 0).unwrap();
        for d in 0..=8u32 {
            let e = f64::from(d) / 8.0;
            assert_eq!(table.color_acuity(d), photopic_acuity(e, &p).unwrap());
            assert_eq!(table.gray_acuity(d), scotopic_acuity(e, &p).unwrap());
        }
    }

    #[test]
    fn quantizer_matches_small_hand_oracle() {
        // W_V=8, B=3, tau=0: assign bins by explicit uniform edges
        let field = VisualField::square(8).unwrap();
        let p = AcuityParams::default();
        let values: Vec<f64> = (0..=8)
            .map(|d| photopic_acuity(d as f64 / 8.0, &p).unwrap())
            .collect();
        let (lo, hi) = (
            values.iter().copied().fold(f64::INFINITY, f64::min),
            values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        );
        let width = (hi - lo) / 3.0;
        let bin_of = |v: f64| -> usize {
            let mut b = ((v - lo) / width) as usize;
            if b > 2 {
                b = 2;
            }
            b
        };
        let mut expected = vec![0.0; values.len()];
        for target in 0..3 {
            let members: Vec<f64> = values.iter().copied().filter(|&v| bin_of(v) == target).collect();
            if members.is_empty() {
                continue;
            }
            let mean = members.iter().sum::<f64>() / members.len() as f64;
            for (i, &v) in values.iter().enumerate() {
                if bin_of(v) == target {
                    expected[i] = mean;
                }
            }
        }
        let table = build_acuity_table(&field, &p, 3, 0).unwrap();
        for d in 0..=8u32 {
            assert_eq!(table.color_acuity(d), expected[d as usize], "d={d}");
        }
    }

    #[test]
    fn default_calibration_hits_paper_anchors() {
        let field = VisualField::square(224).unwrap();
        let table = build_acuity_table(&field, &AcuityParams::default(), 84, 2).unwrap();
        assert_eq!(table.color_bins().len(), 17);
        assert_eq!(table.gray_bins().len(), 15);
        assert_eq!(table.in_focus_width(), 39);
        let ms = table.max_color_sigma();
        assert!((10.5..=11.2).contains(&ms), "max color sigma {ms}");
        let shifted = apply_viewing_distance(&table, 3).unwrap();
        assert_eq!(shifted.in_focus_width(), 48);
    }

    #[test]
    fn quantization_preserves_monotonicity() {
        for (w, b, tau) in [(224u32, 84u32, 2u32), (64, 10, 3), (32, 5, 1), (100, 40, 4)] {
            let field = VisualField::square(w).unwrap();
            let table = build_acuity_table(&field, &AcuityParams::default(), b, tau).unwrap();
            for d in 1..=w {
                assert!(
                    table.color_acuity(d) <= table.color_acuity(d - 1) + 1e-15,
                    "color not non-increasing at d={d} (w={w}, b={b}, tau={tau})"
                );
                assert!(
                    table.gray_acuity(d) >= table.gray_acuity(d - 1) - 1e-15,
                    "gray not non-decreasing at d={d}"
                );
            }
        }
    }

    #[test]
    fn quantized_values_stay_within_member_range() {
        let field = VisualField::square(64).unwrap();
        let p = AcuityParams::default();
        let table = build_acuity_table(&field, &p, 12, 3).unwrap();
        for bin in table.color_bins() {
            let raws: Vec<f64> = (bin.d_min..=bin.d_max)
                .map(|d| photopic_acuity(f64::from(d) / 64.0, &p).unwrap())
                .collect();
            let lo = raws.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = raws.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!(bin.acuity >= lo - 1e-15 && bin.acuity <= hi + 1e-15);
        }
    }

    #[test]
    fn sigma_bounded_by_beta_w() {
        let field = VisualField::square(96).unwrap();
        let p = AcuityParams::default();
        let table = build_acuity_table(&field, &p, 20, 2).unwrap();
        let bound = p.beta * 96.0;
        for d in 0..=96u32 {
            assert!(table.color_sigma(d) >= 0.0 && table.color_sigma(d) <= bound);
            assert!(table.gray_sigma(d) >= 0.0 && table.gray_sigma(d) <= bound);
        }
    }

    #[test]
    fn build_is_deterministic() {
        let field = VisualField::square(128).unwrap();
        let a = build_acuity_table(&field, &AcuityParams::default(), 30, 2).unwrap();
        let b = build_acuity_table(&field, &AcuityParams::default(), 30, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn viewing_distance_zero_is_identity() {
        let field = VisualField::square(64).unwrap();
        let table = build_acuity_table(&field, &AcuityParams::default(), 16, 2).unwrap();
        let same = apply_viewing_distance(&table, 0).unwrap();
        assert_eq!(table, same);
    }

    #[test]
    fn viewing_distance_matches_bin_shift_reference() {
        let field = VisualField::square(64).unwrap();
        let table = build_acuity_table(&field, &AcuityParams::default(), 16, 2).unwrap();
        let k = 2u32;
        let shifted = apply_viewing_distance(&table, k).unwrap();
        // reference: pixel in 1-indexed bin i takes the value of bin max(1, i-k)
        let old_bins = table.color_bins();
        for (i, bin) in old_bins.iter().enumerate() {
            let src = i.saturating_sub(k as usize);
            for d in bin.d_min..=bin.d_max {
                assert_eq!(shifted.color_acuity(d), old_bins[src].acuity, "d={d}");
            }
        }
        assert_eq!(shifted.color_bins().len(), old_bins.len() - k as usize);
    }

    #[test]
    fn viewing_distance_rejects_k_past_bins() {
        let field = VisualField::square(64).unwrap();
        let table = build_acuity_table(&field, &AcuityParams::default(), 16, 2).unwrap();
        let n = table.color_bins().len() as u32;
        assert!(apply_viewing_distance(&table, n).is_err());
        assert!(apply_viewing_distance(&table, n - 1).is_ok());
    }

    #[test]
    fn viewing_distance_monotone_in_k() {
        let field = VisualField::square(224).unwrap();
        let table = build_acuity_table(&field, &AcuityParams::default(), 84, 2).unwrap();
        let mut prev = table.clone();
        for k in 1..=6u32 {
            let cur = apply_viewing_distance(&table, k).unwrap();
            for d in 0..=224u32 {
                assert!(cur.color_acuity(d) >= prev.color_acuity(d) - 1e-15);
                assert!(cur.color_sigma(d) <= prev.color_sigma(d) + 1e-15);
            }
            assert!(cur.in_focus_width() >= prev.in_focus_width());
            prev = cur;
        }
    }

    #[test]
    fn shifts_compose() {
        let field = VisualField::square(128).unwrap();
        let table = build_acuity_table(&field, &AcuityParams::default(), 30, 2).unwrap();
        let once = apply_viewing_distance(&apply_viewing_distance(&table, 2).unwrap(), 1).unwrap();
        let direct = apply_viewing_distance(&table, 3).unwrap();
        assert_eq!(once, direct);
    }

    #[test]
    fn degenerate_gray_channel_builds_single_bin() {
        let field = VisualField::square(64).unwrap();
        let p = AcuityParams {
            p_max: 0.0,
            ..AcuityParams::default()
        };
        let table = build_acuity_table(&field, &p, 16, 2).unwrap();
        assert_eq!(table.gray_bins().len(), 1);
        assert_eq!(table.gray_acuity(0), 0.0);
        assert_eq!(table.gray_acuity(64), 0.0);
        // default-style viewing distance still applies
        let shifted = apply_viewing_distance(&table, 3).unwrap();
        assert_eq!(shifted.gray_bins().len(), 1);
    }

    #[test]
    fn overmerged_configuration_is_an_error() {
        let field = VisualField::square(16).unwrap();
        // tau larger than the total number of values collapses everything
        let err = build_acuity_table(&field, &AcuityParams::default(), 4, 100);
        assert!(err.is_err());
        let err = build_acuity_table(&field, &AcuityParams::default(), 1, 0);
        assert!(err.is_err());
    }

    #[test]
    fn dump_round_trips_exact_values() {
        let field = VisualField::square(16).unwrap();
        let table = build_acuity_table(&field, &AcuityParams::default(), 6, 1).unwrap();
        let dump = table.dump_to_string();
        for (d, line) in dump.lines().skip(1).enumerate() {
            let cols: Vec<&str> = line.split('\t').collect();
            assert_eq!(cols.len(), 5);
            assert_eq!(cols[0].parse::<u32>().unwrap(), d as u32);
            assert_eq!(cols[1].parse::<f64>().unwrap(), table.color_acuity(d as u32));
            assert_eq!(cols[4].parse::<f64>().unwrap(), table.gray_sigma(d as u32));
        }
    }
}
