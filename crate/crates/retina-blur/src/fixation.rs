//! Scanpath generation from saliency heatmaps, deterministic fixation
//! grids, and multi-fixation score aggregation.
//!
//! Heatmaps are consumed, never produced; any external saliency model can
//! supply them. A center-bias Gaussian generator is bundled so the CLI works
//! standalone as a stand-in for a learned model.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{FixationPoint, VisualField};

/// Nonnegative saliency weights over a pixel grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    height: u32,
    width: u32,
    weights: Vec<f64>,
}

impl Heatmap {
    /// Weights must be finite and nonnegative. An all-zero map is
    /// representable (masking can empty a map); samplers report exhaustion.
    pub fn new(height: u32, width: u32, weights: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::domain("heatmap", "dimensions must be >= 1"));
        }
        if weights.len() != (height as usize) * (width as usize) {
            return Err(Error::domain(
                "heatmap",
                format!(
                    "expected {} weights, got {}",
                    (height as usize) * (width as usize),
                    weights.len()
                ),
            ));
        }
        for &w in &weights {
            if !w.is_finite() {
                return Err(Error::NonFinite {
                    what: "heatmap weight",
                    value: w,
                });
            }
            if w < 0.0 {
                return Err(Error::domain(
                    "heatmap",
                    format!("weights must be >= 0, got {w}"),
                ));
            }
        }
        Ok(Heatmap {
            height,
            width,
            weights,
        })
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> f64 {
        self.weights[y as usize * self.width as usize + x as usize]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Ordered, pairwise-distinct fixation points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scanpath(Vec<FixationPoint>);

impl Scanpath {
    pub fn new(points: Vec<FixationPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::domain("scanpath", "must contain at least one point"));
        }
        for (i, a) in points.iter().enumerate() {
            for b in &points[i + 1..] {
                if a == b {
                    return Err(Error::domain(
                        "scanpath",
                        format!("duplicate fixation point ({}, {})", a.x, a.y),
                    ));
                }
            }
        }
        Ok(Scanpath(points))
    }

    pub fn points(&self) -> &[FixationPoint] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl<'a> IntoIterator for &'a Scanpath {
    type Item = &'a FixationPoint;
    type IntoIter = std::slice::Iter<'a, FixationPoint>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Suppress the neighborhood of a chosen fixation with an inverted Gaussian:
/// `h'(p) = h(p) * (1 - exp(-|p - f|^2 / (2 mask_sigma^2)))`. The weight at
/// `f` itself becomes exactly zero.
pub fn mask_heatmap(h: &Heatmap, f: FixationPoint, mask_sigma: f64) -> Result<Heatmap> {
    if !mask_sigma.is_finite() || mask_sigma <= 0.0 {
        return Err(Error::domain(
            "mask_heatmap",
            format!("mask sigma must be finite and > 0, got {mask_sigma}"),
        ));
    }
    if f.x >= h.width || f.y >= h.height {
        return Err(Error::OutOfField {
            x: i64::from(f.x),
            y: i64::from(f.y),
            width: h.width,
            height: h.height,
        });
    }
    let denom = 2.0 * mask_sigma * mask_sigma;
    let mut weights = Vec::with_capacity(h.weights.len());
    for y in 0..h.height {
        for x in 0..h.width {
            let dx = f64::from(x) - f64::from(f.x);
            let dy = f64::from(y) - f64::from(f.y);
            let factor = 1.0 - (-(dx * dx + dy * dy) / denom).exp();
            weights.push(h.get(x, y) * factor);
        }
    }
    Heatmap::new(h.height, h.width, weights)
}

fn draw_weighted<R: Rng + ?Sized>(h: &Heatmap, rng: &mut R) -> Option<FixationPoint> {
    let total = h.total_mass();
    if total <= 0.0 {
        return None;
    }
    let u: f64 = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    for (i, &w) in h.weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return Some(FixationPoint::new(
                (i % h.width as usize) as u32,
                (i / h.width as usize) as u32,
            ));
        }
    }
    // floating-point slack: fall back to the last positive weight
    h.weights
        .iter()
        .rposition(|&w| w > 0.0)
        .map(|i| FixationPoint::new((i % h.width as usize) as u32, (i / h.width as usize) as u32))
}

fn argmax_point(h: &Heatmap) -> Option<FixationPoint> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &w) in h.weights.iter().enumerate() {
        if w > 0.0 && best.map_or(true, |(_, bw)| w > bw) {
            best = Some((i, w));
        }
    }
    best.map(|(i, _)| {
        FixationPoint::new((i % h.width as usize) as u32, (i / h.width as usize) as u32)
    })
}

fn scanpath_loop(
    h: &Heatmap,
    n: usize,
    mask_sigma: f64,
    mut pick: impl FnMut(&Heatmap) -> Option<FixationPoint>,
) -> Result<Scanpath> {
    if n == 0 {
        return Err(Error::domain("scanpath", "must request at least one point"));
    }
    let mut current = h.clone();
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        match pick(&current) {
            Some(p) => {
                points.push(p);
                if points.len() < n {
                    current = mask_heatmap(&current, p, mask_sigma)?;
                }
            }
            None => {
                return Err(Error::HeatmapExhausted {
                    obtained: points.len(),
                    requested: n,
                })
            }
        }
    }
    Scanpath::new(points)
}

/// Sample an `n`-point scanpath: draw from the multinomial distribution
/// proportional to the current weights, then mask around the chosen point
/// before the next draw. Deterministic under a fixed RNG stream. Masking
/// zeroes each chosen point, so points are pairwise distinct; a map whose
/// mass runs out mid-loop yields [`Error::HeatmapExhausted`].
pub fn sample_scanpath<R: Rng + ?Sized>(
    h: &Heatmap,
    n: usize,
    mask_sigma: f64,
    rng: &mut R,
) -> Result<Scanpath> {
    scanpath_loop(h, n, mask_sigma, |cur| draw_weighted(cur, rng))
}

/// Deterministic variant of [`sample_scanpath`] that always takes the
/// current maximum-weight point (ties to the lowest pixel index).
pub fn argmax_scanpath(h: &Heatmap, n: usize, mask_sigma: f64) -> Result<Scanpath> {
    scanpath_loop(h, n, mask_sigma, argmax_point)
}

/// `side x side` points at the centers of a uniform partition of the field,
/// row-major order. Degenerate fields may collapse duplicate centers.
pub fn fixation_grid(field: &VisualField, side: u32) -> Result<Scanpath> {
    if side == 0 {
        return Err(Error::domain("fixation_grid", "side must be >= 1"));
    }
    let center = |extent: u32, i: u32| ((2 * i + 1) * extent) / (2 * side);
    let mut points = Vec::with_capacity((side as usize).pow(2));
    for row in 0..side {
        let y = center(field.height(), row);
        for col in 0..side {
            let x = center(field.width(), col);
            let p = FixationPoint::new(x, y);
            if !points.contains(&p) {
                points.push(p);
            }
        }
    }
    Scanpath::new(points)
}

/// The four corners plus the center of the field (deduplicated for
/// degenerate fields).
pub fn five_fixations(field: &VisualField) -> Scanpath {
    let (w, h) = (field.width(), field.height());
    let candidates = [
        FixationPoint::new(0, 0),
        FixationPoint::new(w - 1, 0),
        FixationPoint::new(0, h - 1),
        FixationPoint::new(w - 1, h - 1),
        FixationPoint::new(w / 2, h / 2),
    ];
    let mut points = Vec::with_capacity(5);
    for p in candidates {
        if !points.contains(&p) {
            points.push(p);
        }
    }
    Scanpath::new(points).expect("non-empty by construction")
}

/// Arithmetic mean of per-class score vectors.
pub fn aggregate_scores(score_vectors: &[Vec<f64>]) -> Result<Vec<f64>> {
    let first = score_vectors
        .first()
        .ok_or_else(|| Error::domain("aggregate_scores", "no score vectors"))?;
    let dim = first.len();
    for v in score_vectors {
        if v.len() != dim {
            return Err(Error::domain(
                "aggregate_scores",
                format!("vector length {} does not match {}", v.len(), dim),
            ));
        }
    }
    let mut mean = vec![0.0; dim];
    for v in score_vectors {
        for (m, x) in mean.iter_mut().zip(v) {
            *m += x;
        }
    }
    let n = score_vectors.len() as f64;
    for m in &mut mean {
        *m /= n;
    }
    Ok(mean)
}

/// True iff at least one prediction equals the true label.
pub fn any_correct(predictions: &[usize], truth: usize) -> bool {
    predictions.iter().any(|&p| p == truth)
}

/// Bundled stand-in for an external saliency model: a Gaussian bump at the
/// field center with scale `width / 4`.
pub fn center_bias_heatmap(field: &VisualField) -> Heatmap {
    let (w, h) = (field.width(), field.height());
    let cx = f64::from(w / 2);
    let cy = f64::from(h / 2);
    let sigma = f64::from(w) / 4.0;
    let denom = 2.0 * sigma * sigma;
    let mut weights = Vec::with_capacity((w as usize) * (h as usize));
    for y in 0..h {
        for x in 0..w {
            let dx = f64::from(x) - cx;
            let dy = f64::from(y) - cy;
            weights.push((-(dx * dx + dy * dy) / denom).exp());
        }
    }
    Heatmap::new(h, w, weights).expect("finite positive weights")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::scanpath_rng;

    fn uniform_map(w: u32, h: u32) -> Heatmap {
        Heatmap::new(h, w, vec![1.0; (w as usize) * (h as usize)]).unwrap()
    }

    #[test]
    fn heatmap_validation() {
        assert!(Heatmap::new(2, 2, vec![0.0, 1.0, 2.0, 3.0]).is_ok());
        assert!(Heatmap::new(2, 2, vec![0.0; 3]).is_err());
        assert!(Heatmap::new(2, 2, vec![0.0, -1.0, 0.0, 0.0]).is_err());
        assert!(Heatmap::new(2, 2, vec![0.0, f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn mask_zeroes_fixation_exactly() {
        let h = uniform_map(9, 9);
        let f = FixationPoint::new(4, 4);
        let masked = mask_heatmap(&h, f, 2.0).unwrap();
        assert_eq!(masked.get(4, 4), 0.0);
    }

    #[test]
    fn mask_leaves_far_points_unchanged() {
        let h = uniform_map(257, 257);
        let masked = mask_heatmap(&h, FixationPoint::new(0, 0), 2.0).unwrap();
        // 256 pixels away with sigma 2: the factor is 1 - exp(-8192)
        assert!((masked.get(256, 256) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn mask_matches_scalar_oracle() {
        let h = uniform_map(16, 12);
        let f = FixationPoint::new(5, 7);
        let sigma = 3.0;
        let masked = mask_heatmap(&h, f, sigma).unwrap();
        for y in 0..12u32 {
            for x in 0..16u32 {
                let d2 = (f64::from(x) - 5.0).powi(2) + (f64::from(y) - 7.0).powi(2);
                let want = 1.0 - (-d2 / (2.0 * sigma * sigma)).exp();
                assert!((masked.get(x, y) - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn mask_reduces_total_mass() {
        let h = uniform_map(9, 9);
        let masked = mask_heatmap(&h, FixationPoint::new(4, 4), 2.0).unwrap();
        assert!(masked.total_mass() < h.total_mass());
    }

    #[test]
    fn mask_factors_commute() {
        let h = uniform_map(24, 24);
        let (p1, p2) = (FixationPoint::new(3, 4), FixationPoint::new(20, 18));
        let ab = mask_heatmap(&mask_heatmap(&h, p1, 2.0).unwrap(), p2, 2.0).unwrap();
        let ba = mask_heatmap(&mask_heatmap(&h, p2, 2.0).unwrap(), p1, 2.0).unwrap();
        for (x, y) in ab.weights().iter().zip(ba.weights()) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn one_hot_yields_its_pixel() {
        let mut w = vec![0.0; 64];
        w[3 * 8 + 5] = 1.0;
        let h = Heatmap::new(8, 8, w).unwrap();
        let path = sample_scanpath(&h, 1, 2.0, &mut scanpath_rng(0, 0)).unwrap();
        assert_eq!(path.points(), &[FixationPoint::new(5, 3)]);
    }

    #[test]
    fn scanpath_points_distinct_and_deterministic() {
        let h = uniform_map(16, 16);
        let a = sample_scanpath(&h, 5, 2.0, &mut scanpath_rng(9, 0)).unwrap();
        let b = sample_scanpath(&h, 5, 2.0, &mut scanpath_rng(9, 0)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 5);
        // Scanpath::new enforces distinctness; also ensure in-bounds
        for p in &a {
            assert!(p.x < 16 && p.y < 16);
        }
    }

    #[test]
    fn exhausted_heatmap_reports_partial_progress() {
        let mut w = vec![0.0; 16];
        w[0] = 1.0;
        let h = Heatmap::new(4, 4, w).unwrap();
        let err = sample_scanpath(&h, 3, 2.0, &mut scanpath_rng(1, 0)).unwrap_err();
        match err {
            Error::HeatmapExhausted { obtained, requested } => {
                assert_eq!(obtained, 1);
                assert_eq!(requested, 3);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn argmax_mode_is_greedy() {
        let mut w = vec![0.0; 16];
        w[5] = 3.0;
        w[10] = 2.0;
        w[0] = 1.0;
        let h = Heatmap::new(4, 4, w).unwrap();
        // tiny mask sigma so the other peaks survive masking
        let path = argmax_scanpath(&h, 3, 0.25).unwrap();
        assert_eq!(
            path.points(),
            &[
                FixationPoint::new(1, 1),
                FixationPoint::new(2, 2),
                FixationPoint::new(0, 0)
            ]
        );
    }

    #[test]
    fn grid_examples() {
        let f224 = VisualField::square(224).unwrap();
        let single = fixation_grid(&f224, 1).unwrap();
        assert_eq!(single.points(), &[FixationPoint::new(112, 112)]);

        let grid7 = fixation_grid(&f224, 7).unwrap();
        assert_eq!(grid7.len(), 49);
        assert_eq!(grid7.points()[0], FixationPoint::new(16, 16));
        assert_eq!(grid7.points()[1], FixationPoint::new(48, 16));
        assert_eq!(grid7.points()[48], FixationPoint::new(208, 208));

        let f4 = VisualField::square(4).unwrap();
        let grid2 = fixation_grid(&f4, 2).unwrap();
        assert_eq!(
            grid2.points(),
            &[
                FixationPoint::new(1, 1),
                FixationPoint::new(3, 1),
                FixationPoint::new(1, 3),
                FixationPoint::new(3, 3)
            ]
        );
    }

    #[test]
    fn grid_respects_field_symmetry() {
        // both axes use the same strip centers, so the point set is closed
        // under transposition (the exact 90-degree rotation is broken by up
        // to one pixel because strip centers are floored)
        let field = VisualField::square(224).unwrap();
        let grid = fixation_grid(&field, 7).unwrap();
        let set: std::collections::HashSet<(u32, u32)> =
            grid.points().iter().map(|p| (p.x, p.y)).collect();
        for &(x, y) in &set {
            assert!(set.contains(&(y, x)), "({x},{y}) breaks transpose symmetry");
        }
        // rotation holds within the 1-pixel flooring slack
        for &(x, y) in &set {
            let rx = 223 - y;
            assert!(
                set.iter().any(|&(gx, gy)| gx.abs_diff(rx) <= 1 && gy == x),
                "({x},{y}) rotated image missing"
            );
        }
    }

    #[test]
    fn five_fixations_examples() {
        let field = VisualField::square(224).unwrap();
        let five = five_fixations(&field);
        assert_eq!(five.len(), 5);
        let expect = [
            FixationPoint::new(0, 0),
            FixationPoint::new(223, 0),
            FixationPoint::new(0, 223),
            FixationPoint::new(223, 223),
            FixationPoint::new(112, 112),
        ];
        assert_eq!(five.points(), &expect);

        let tiny = five_fixations(&VisualField::square(1).unwrap());
        assert_eq!(tiny.points(), &[FixationPoint::new(0, 0)]);

        assert_eq!(five_fixations(&VisualField::square(3).unwrap()).len(), 5);
    }

    #[test]
    fn aggregate_examples_and_invariance() {
        let one = vec![vec![0.3, 0.7]];
        assert_eq!(aggregate_scores(&one).unwrap(), vec![0.3, 0.7]);
        let two = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(aggregate_scores(&two).unwrap(), vec![0.5, 0.5]);
        assert!(aggregate_scores(&[vec![1.0], vec![1.0, 2.0]]).is_err());
        assert!(aggregate_scores(&[]).is_err());

        // mean of 5 random vectors vs a scalar loop
        let vs: Vec<Vec<f64>> = (0..5)
            .map(|i| (0..7).map(|j| ((i * 7 + j) as f64).sin()).collect())
            .collect();
        let got = aggregate_scores(&vs).unwrap();
        for j in 0..7 {
            let want: f64 = vs.iter().map(|v| v[j]).sum::<f64>() / 5.0;
            assert!((got[j] - want).abs() < 1e-9);
        }

        // affine rescaling commutes
        let scaled: Vec<Vec<f64>> = vs.iter().map(|v| v.iter().map(|x| 2.0 * x + 3.0).collect()).collect();
        let got_scaled = aggregate_scores(&scaled).unwrap();
        for j in 0..7 {
            assert!((got_scaled[j] - (2.0 * got[j] + 3.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn any_correct_cases() {
        assert!(!any_correct(&[1, 2, 3], 0));
        let mut preds = vec![9; 49];
        preds[17] = 4;
        assert!(any_correct(&preds, 4));
        assert!(any_correct(&[5, 5, 5], 5));
    }

    #[test]
    fn center_bias_peaks_at_center() {
        let field = VisualField::square(33).unwrap();
        let h = center_bias_heatmap(&field);
        let peak = h.get(16, 16);
        for y in 0..33u32 {
            for x in 0..33u32 {
                assert!(h.get(x, y) <= peak);
            }
        }
    }
}
