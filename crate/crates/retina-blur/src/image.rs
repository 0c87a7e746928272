//! Planar floating-point raster, the unit every pipeline stage operates on.

use crate::error::{Error, Result};

/// A 1- or 3-channel image with `f32` samples in planar row-major layout
/// (`data[c][y][x]` flattened). Values are nominally in `[0, 1]` but stages
/// are free to move them outside that range; clamping happens only when
/// exporting to integer formats.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    channels: usize,
    height: usize,
    width: usize,
    data: Vec<f32>,
}

impl Image {
    /// All-zero image.
    pub fn zeros(channels: usize, height: usize, width: usize) -> Result<Self> {
        Self::check_dims(channels, height, width)?;
        Ok(Image {
            channels,
            height,
            width,
            data: vec![0.0; channels * height * width],
        })
    }

    /// Image filled with a single value.
    pub fn constant(channels: usize, height: usize, width: usize, value: f32) -> Result<Self> {
        let mut img = Self::zeros(channels, height, width)?;
        img.data.fill(value);
        Ok(img)
    }

    /// Wrap an existing planar buffer. Rejects wrong lengths and non-finite
    /// samples.
    pub fn from_vec(channels: usize, height: usize, width: usize, data: Vec<f32>) -> Result<Self> {
        Self::check_dims(channels, height, width)?;
        if data.len() != channels * height * width {
            return Err(Error::domain(
                "image buffer",
                format!(
                    "expected {} samples for {}x{}x{}, got {}",
                    channels * height * width,
                    channels,
                    height,
                    width,
                    data.len()
                ),
            ));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "image sample",
                value: f64::from(*bad),
            });
        }
        Ok(Image {
            channels,
            height,
            width,
            data,
        })
    }

    fn check_dims(channels: usize, height: usize, width: usize) -> Result<()> {
        if channels != 1 && channels != 3 {
            return Err(Error::domain(
                "image",
                format!("channels must be 1 or 3, got {channels}"),
            ));
        }
        if height == 0 || width == 0 {
            return Err(Error::domain("image", "dimensions must be >= 1"));
        }
        Ok(())
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn get(&self, c: usize, y: usize, x: usize) -> f32 {
        self.data[(c * self.height + y) * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, c: usize, y: usize, x: usize, v: f32) {
        self.data[(c * self.height + y) * self.width + x] = v;
    }

    /// One channel plane as a slice.
    pub fn plane(&self, c: usize) -> &[f32] {
        let n = self.height * self.width;
        &self.data[c * n..(c + 1) * n]
    }

    pub fn plane_mut(&mut self, c: usize) -> &mut [f32] {
        let n = self.height * self.width;
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn as_slice(&self) -> &[f32] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f32> {
        self.data
    }

    /// Min and max sample over all channels.
    pub fn value_range(&self) -> (f32, f32) {
        let mut lo = f32::INFINITY;
        let mut hi = f32::NEG_INFINITY;
        for &v in &self.data {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        (lo, hi)
    }

    /// Root-mean-square difference to another image of the same shape.
    pub fn rmse(&self, other: &Image) -> Result<f64> {
        if self.channels != other.channels || self.height != other.height || self.width != other.width
        {
            return Err(Error::domain("rmse", "image shapes differ"));
        }
        let sum: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| {
                let d = f64::from(a - b);
                d * d
            })
            .sum();
        Ok((sum / self.data.len() as f64).sqrt())
    }
}
