//! Image file formats: PNG (via the image crate), binary PPM/PGM for
//! bit-exact golden tests, and a trivial raw float format (`RBF1` magic,
//! dimensions, little-endian f32 samples) for oracle cross-checks.
//!
//! Floating-point samples are clamped to [0, 1] and quantized by
//! `round(255 v)` only when writing 8-bit formats.

use std::io::{Read, Write};
use std::path::Path;

use retina_blur::{Heatmap, Image};

use crate::error::{CliError, CliResult};

const RAW_MAGIC: &[u8; 4] = b"RBF1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Png,
    Ppm,
    Pgm,
    Raw,
}

impl Format {
    pub fn from_extension(path: &Path) -> CliResult<Format> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("png") => Ok(Format::Png),
            Some("ppm") => Ok(Format::Ppm),
            Some("pgm") => Ok(Format::Pgm),
            Some("rbf") => Ok(Format::Raw),
            other => Err(CliError::usage(format!(
                "unsupported image extension {other:?} for {}",
                path.display()
            ))),
        }
    }

    pub fn parse(name: &str) -> CliResult<Format> {
        match name.to_ascii_lowercase().as_str() {
            "png" => Ok(Format::Png),
            "ppm" => Ok(Format::Ppm),
            "pgm" => Ok(Format::Pgm),
            "raw" | "rbf" => Ok(Format::Raw),
            other => Err(CliError::usage(format!("unknown format '{other}'"))),
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            Format::Png => "png",
            Format::Ppm => "ppm",
            Format::Pgm => "pgm",
            Format::Raw => "rbf",
        }
    }
}

#[inline]
pub fn to_byte(v: f32) -> u8 {
    (255.0 * v.clamp(0.0, 1.0)).round() as u8
}

pub fn load_image(path: &Path) -> CliResult<Image> {
    let data_err = |e: String| CliError::data(format!("{}: {e}", path.display()));
    match Format::from_extension(path)? {
        Format::Png => {
            let dynimg = image::open(path).map_err(|e| data_err(e.to_string()))?;
            Ok(dynamic_to_image(dynimg))
        }
        Format::Ppm | Format::Pgm => read_pnm(path),
        Format::Raw => read_raw(path),
    }
}

fn dynamic_to_image(dynimg: image::DynamicImage) -> Image {
    use image::DynamicImage::*;
    match dynimg {
        ImageLuma8(g) => {
            let (w, h) = (g.width() as usize, g.height() as usize);
            let data: Vec<f32> = g.into_raw().iter().map(|&v| f32::from(v) / 255.0).collect();
            Image::from_vec(1, h, w, data).expect("finite u8 data")
        }
        ImageLuma16(g) => {
            let (w, h) = (g.width() as usize, g.height() as usize);
            let data: Vec<f32> = g
                .into_raw()
                .iter()
                .map(|&v| f32::from(v as u16) / 65535.0)
                .collect();
            Image::from_vec(1, h, w, data).expect("finite u16 data")
        }
        other => {
            let rgb = other.to_rgb8();
            let (w, h) = (rgb.width() as usize, rgb.height() as usize);
            let raw = rgb.into_raw(); // interleaved RGB
            let mut data = vec![0.0f32; 3 * h * w];
            for i in 0..h * w {
                for c in 0..3 {
                    data[c * h * w + i] = f32::from(raw[3 * i + c]) / 255.0;
                }
            }
            Image::from_vec(3, h, w, data).expect("finite u8 data")
        }
    }
}

pub fn save_image(img: &Image, path: &Path, format: Format) -> CliResult<()> {
    match format {
        Format::Png => write_png(img, path),
        Format::Ppm => write_ppm(img, path),
        Format::Pgm => write_pgm(img, path),
        Format::Raw => write_raw(img, path),
    }
}

fn write_png(img: &Image, path: &Path) -> CliResult<()> {
    let (h, w) = (img.height() as u32, img.width() as u32);
    let err = |e: image::ImageError| CliError::data(format!("{}: {e}", path.display()));
    if img.channels() == 1 {
        let buf: Vec<u8> = img.plane(0).iter().map(|&v| to_byte(v)).collect();
        let g = image::GrayImage::from_raw(w, h, buf).expect("sized buffer");
        g.save_with_format(path, image::ImageFormat::Png).map_err(err)
    } else {
        let n = (h * w) as usize;
        let mut buf = vec![0u8; 3 * n];
        for i in 0..n {
            for c in 0..3 {
                buf[3 * i + c] = to_byte(img.plane(c)[i]);
            }
        }
        let rgb = image::RgbImage::from_raw(w, h, buf).expect("sized buffer");
        rgb.save_with_format(path, image::ImageFormat::Png).map_err(err)
    }
}

fn write_ppm(img: &Image, path: &Path) -> CliResult<()> {
    let (h, w) = (img.height(), img.width());
    let mut out = Vec::with_capacity(3 * h * w + 32);
    out.extend_from_slice(format!("P6\n{w} {h}\n255\n").as_bytes());
    for i in 0..h * w {
        for c in 0..3 {
            // gray inputs replicate into all three planes
            let plane = if img.channels() == 3 { c } else { 0 };
            out.push(to_byte(img.plane(plane)[i]));
        }
    }
    std::fs::write(path, out).map_err(Into::into)
}

fn write_pgm(img: &Image, path: &Path) -> CliResult<()> {
    if img.channels() != 1 {
        return Err(CliError::usage(
            "PGM output requires a single-channel image; use ppm or png",
        ));
    }
    let (h, w) = (img.height(), img.width());
    let mut out = Vec::with_capacity(h * w + 32);
    out.extend_from_slice(format!("P5\n{w} {h}\n255\n").as_bytes());
    out.extend(img.plane(0).iter().map(|&v| to_byte(v)));
    std::fs::write(path, out).map_err(Into::into)
}

/// Read a binary PPM (P6) or PGM (P5) with maxval <= 255.
fn read_pnm(path: &Path) -> CliResult<Image> {
    let bytes = std::fs::read(path)?;
    let data_err = |m: &str| CliError::data(format!("{}: {m}", path.display()));
    let mut pos = 0usize;

    let mut token = |bytes: &[u8]| -> CliResult<String> {
        // skip whitespace and '#' comments
        loop {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if pos < bytes.len() && bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(CliError::data("truncated PNM header"));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };

    let magic = token(&bytes)?;
    let channels = match magic.as_str() {
        "P6" => 3usize,
        "P5" => 1usize,
        _ => return Err(data_err("expected binary PPM (P6) or PGM (P5)")),
    };
    let w: usize = token(&bytes)?.parse().map_err(|_| data_err("bad width"))?;
    let h: usize = token(&bytes)?.parse().map_err(|_| data_err("bad height"))?;
    let maxval: usize = token(&bytes)?.parse().map_err(|_| data_err("bad maxval"))?;
    if maxval == 0 || maxval > 255 {
        return Err(data_err("only 8-bit PNM supported"));
    }
    pos += 1; // single whitespace after maxval
    let need = channels * w * h;
    if bytes.len() < pos + need {
        return Err(data_err("truncated PNM pixel data"));
    }
    let raw = &bytes[pos..pos + need];
    let mut data = vec![0.0f32; need];
    let scale = 1.0 / maxval as f32;
    if channels == 3 {
        for i in 0..w * h {
            for c in 0..3 {
                data[c * w * h + i] = f32::from(raw[3 * i + c]) * scale;
            }
        }
    } else {
        for i in 0..w * h {
            data[i] = f32::from(raw[i]) * scale;
        }
    }
    Image::from_vec(channels, h, w, data).map_err(|e| data_err(&e.to_string()))
}

fn write_raw(img: &Image, path: &Path) -> CliResult<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(RAW_MAGIC)?;
    for dim in [img.channels() as u32, img.height() as u32, img.width() as u32] {
        f.write_all(&dim.to_le_bytes())?;
    }
    let mut buf = Vec::with_capacity(img.as_slice().len() * 4);
    for &v in img.as_slice() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    f.write_all(&buf)?;
    Ok(())
}

fn read_raw(path: &Path) -> CliResult<Image> {
    let data_err = |m: &str| CliError::data(format!("{}: {m}", path.display()));
    let mut f = std::fs::File::open(path)?;
    let mut magic = [0u8; 4];
    f.read_exact(&mut magic)
        .map_err(|_| data_err("truncated raw header"))?;
    if &magic != RAW_MAGIC {
        return Err(data_err("bad raw magic (expected RBF1)"));
    }
    let mut dims = [0u32; 3];
    for d in &mut dims {
        let mut b = [0u8; 4];
        f.read_exact(&mut b).map_err(|_| data_err("truncated raw dims"))?;
        *d = u32::from_le_bytes(b);
    }
    let (c, h, w) = (dims[0] as usize, dims[1] as usize, dims[2] as usize);
    let n = c
        .checked_mul(h)
        .and_then(|x| x.checked_mul(w))
        .ok_or_else(|| data_err("raw dims overflow"))?;
    let mut payload = Vec::new();
    f.read_to_end(&mut payload)?;
    if payload.len() != 4 * n {
        return Err(data_err("raw payload length mismatch"));
    }
    let data: Vec<f32> = payload
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
        .collect();
    Image::from_vec(c, h, w, data).map_err(|e| data_err(&e.to_string()))
}

/// Read a heatmap: a grayscale image file whose sample values are taken as
/// raw nonnegative weights.
pub fn load_heatmap(path: &Path) -> CliResult<Heatmap> {
    let img = load_image(path)?;
    let plane = if img.channels() == 1 {
        img.plane(0).to_vec()
    } else {
        retina_blur::to_grayscale(&img).plane(0).to_vec()
    };
    let weights: Vec<f64> = plane.iter().map(|&v| f64::from(v)).collect();
    Heatmap::new(img.height() as u32, img.width() as u32, weights)
        .map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}
