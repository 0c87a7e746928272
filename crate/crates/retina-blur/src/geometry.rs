//! Visual-field coordinates and the square-level-set eccentricity metric.
//!
//! Eccentricity of a pixel is the L-infinity (chessboard) distance to the
//! fixation point, normalized by the visual-field width. Level sets are
//! axis-aligned squares centered on the fixation, which lets downstream
//! stages slice out equal-eccentricity regions directly.

use crate::error::{Error, Result};

/// The square region the transform operates over. `width` is the
/// normalizer for eccentricity and the maximum image extent accepted by
/// the pipeline; `height <= width`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VisualField {
    width: u32,
    height: u32,
}

impl VisualField {
    pub fn new(width: u32, height: u32) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::config("visual field dimensions must be >= 1"));
        }
        if height > width {
            return Err(Error::config(format!(
                "visual field height {height} exceeds width {width}"
            )));
        }
        Ok(VisualField { width, height })
    }

    /// A `w x w` field, the common case.
    pub fn square(w: u32) -> Result<Self> {
        VisualField::new(w, w)
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x < self.width && y < self.height
    }
}

/// Gaze location in pixel coordinates, `0 <= x, y < field width`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FixationPoint {
    pub x: u32,
    pub y: u32,
}

impl FixationPoint {
    pub fn new(x: u32, y: u32) -> Self {
        FixationPoint { x, y }
    }
}

fn check_in_field(x: u32, y: u32, field: &VisualField) -> Result<()> {
    if !field.contains(x, y) {
        return Err(Error::OutOfField {
            x: x as i64,
            y: y as i64,
            width: field.width,
            height: field.height,
        });
    }
    Ok(())
}

/// Unnormalized L-infinity distance between two pixels.
#[inline]
pub fn chessboard_distance(ax: u32, ay: u32, bx: u32, by: u32) -> u32 {
    let dx = ax.abs_diff(bx);
    let dy = ay.abs_diff(by);
    dx.max(dy)
}

/// Eccentricity of pixel `p` relative to fixation `f`:
/// `max(|x_p - x_f|, |y_p - y_f|) / W_V`. Both points must lie inside the
/// field.
pub fn eccentricity(p: (u32, u32), f: FixationPoint, field: &VisualField) -> Result<f64> {
    check_in_field(p.0, p.1, field)?;
    check_in_field(f.x, f.y, field)?;
    let d = chessboard_distance(p.0, p.1, f.x, f.y);
    Ok(f64::from(d) / f64::from(field.width))
}

/// Per-pixel integer distances `d = max(|dx|, |dy|)` to a fixation point,
/// with eccentricity `e = d / W_V` derived on demand.
#[derive(Debug, Clone)]
pub struct EccentricityMap {
    width: u32,
    height: u32,
    field_width: u32,
    dist: Vec<u32>,
}

impl EccentricityMap {
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Integer L-infinity distance of pixel `(x, y)` from the fixation.
    #[inline]
    pub fn distance(&self, x: u32, y: u32) -> u32 {
        self.dist[y as usize * self.width as usize + x as usize]
    }

    /// Normalized eccentricity of pixel `(x, y)`.
    #[inline]
    pub fn value(&self, x: u32, y: u32) -> f64 {
        f64::from(self.distance(x, y)) / f64::from(self.field_width)
    }

    pub fn distances(&self) -> &[u32] {
        &self.dist
    }

    pub fn max_distance(&self) -> u32 {
        self.dist.iter().copied().max().unwrap_or(0)
    }
}

/// Eccentricity map over the whole visual field.
pub fn eccentricity_map(f: FixationPoint, field: &VisualField) -> Result<EccentricityMap> {
    check_in_field(f.x, f.y, field)?;
    eccentricity_map_for(f, field, field.width, field.height)
}

/// Eccentricity map over a `width x height` region laid out in the field's
/// frame (used for images smaller than the field). The fixation must lie in
/// the field; the region must not exceed it.
pub fn eccentricity_map_for(
    f: FixationPoint,
    field: &VisualField,
    width: u32,
    height: u32,
) -> Result<EccentricityMap> {
    check_in_field(f.x, f.y, field)?;
    if width == 0 || height == 0 || width > field.width || height > field.width {
        return Err(Error::domain(
            "eccentricity_map",
            format!(
                "region {width}x{height} must be non-empty and fit in the {}-wide field",
                field.width
            ),
        ));
    }
    let mut dist = Vec::with_capacity(width as usize * height as usize);
    for y in 0..height {
        let dy = y.abs_diff(f.y);
        for x in 0..width {
            dist.push(x.abs_diff(f.x).max(dy));
        }
    }
    Ok(EccentricityMap {
        width,
        height,
        field_width: field.width,
        dist,
    })
}
