//! Parsers for the small text interfaces: fixation specs, dataset
//! manifests, and toy classifier parameter files.

use std::path::{Path, PathBuf};

use retina_blur::certify::{
    Classifier, ConstantClassifier, LinearClassifier, NearestCentroidClassifier,
};
use retina_blur::{sample_scanpath, FixationPoint, Scanpath};

use crate::error::{CliError, CliResult};
use crate::imgio;

/// How to choose fixation points for an image: explicit coordinates,
/// "center", "five" (corners + center), "grid:N", or
/// "scanpath:<heatmap file>" (sampled with masking).
#[derive(Debug, Clone)]
pub enum FixationSpec {
    Explicit(u32, u32),
    Center,
    Five,
    Grid(u32),
    Scanpath(PathBuf),
}

impl FixationSpec {
    pub fn parse(s: &str) -> CliResult<FixationSpec> {
        if s == "center" {
            return Ok(FixationSpec::Center);
        }
        if s == "five" {
            return Ok(FixationSpec::Five);
        }
        if let Some(n) = s.strip_prefix("grid:") {
            let side: u32 = n
                .parse()
                .map_err(|_| CliError::usage(format!("bad grid side '{n}'")))?;
            if side == 0 {
                return Err(CliError::usage("grid side must be >= 1"));
            }
            return Ok(FixationSpec::Grid(side));
        }
        if let Some(path) = s.strip_prefix("scanpath:") {
            return Ok(FixationSpec::Scanpath(PathBuf::from(path)));
        }
        if let Some((x, y)) = s.split_once(',') {
            let x: u32 = x
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("bad fixation x '{x}'")))?;
            let y: u32 = y
                .trim()
                .parse()
                .map_err(|_| CliError::usage(format!("bad fixation y '{y}'")))?;
            return Ok(FixationSpec::Explicit(x, y));
        }
        Err(CliError::usage(format!(
            "bad fixation spec '{s}' (expected x,y | center | five | grid:N | scanpath:FILE)"
        )))
    }

    /// Resolve to concrete points for a `width x height` image. Strip
    /// centers use the same integer arithmetic on each axis as the field
    /// grid; scanpaths are sampled from the named heatmap, which must match
    /// the image extent.
    pub fn resolve(
        &self,
        width: u32,
        height: u32,
        count: usize,
        mask_sigma: f64,
        seed: u64,
    ) -> CliResult<Vec<FixationPoint>> {
        let center = |extent: u32, i: u32, side: u32| ((2 * i + 1) * extent) / (2 * side);
        match self {
            FixationSpec::Explicit(x, y) => {
                if *x >= width || *y >= height {
                    return Err(CliError::data(format!(
                        "fixation ({x}, {y}) outside {width}x{height} image"
                    )));
                }
                Ok(vec![FixationPoint::new(*x, *y)])
            }
            FixationSpec::Center => Ok(vec![FixationPoint::new(width / 2, height / 2)]),
            FixationSpec::Five => {
                let mut pts = Vec::with_capacity(5);
                for p in [
                    FixationPoint::new(0, 0),
                    FixationPoint::new(width - 1, 0),
                    FixationPoint::new(0, height - 1),
                    FixationPoint::new(width - 1, height - 1),
                    FixationPoint::new(width / 2, height / 2),
                ] {
                    if !pts.contains(&p) {
                        pts.push(p);
                    }
                }
                Ok(pts)
            }
            FixationSpec::Grid(side) => {
                let mut pts = Vec::with_capacity((*side as usize).pow(2));
                for row in 0..*side {
                    let y = center(height, row, *side);
                    for col in 0..*side {
                        let x = center(width, col, *side);
                        let p = FixationPoint::new(x, y);
                        if !pts.contains(&p) {
                            pts.push(p);
                        }
                    }
                }
                Ok(pts)
            }
            FixationSpec::Scanpath(path) => {
                let heatmap = imgio::load_heatmap(path)?;
                if heatmap.width() != width || heatmap.height() != height {
                    return Err(CliError::data(format!(
                        "heatmap {} is {}x{} but the image is {width}x{height}",
                        path.display(),
                        heatmap.width(),
                        heatmap.height()
                    )));
                }
                let mut rng = retina_blur::rng::scanpath_rng(seed, 0);
                let path: Scanpath = sample_scanpath(&heatmap, count, mask_sigma, &mut rng)
                    .map_err(|e| CliError::data(e.to_string()))?;
                Ok(path.points().to_vec())
            }
        }
    }
}

/// One dataset sample: image path and integer label.
#[derive(Debug, Clone)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub label: usize,
}

/// Parse a manifest of `path<TAB>label` lines. Malformed lines report
/// their line number.
pub fn parse_manifest(path: &Path) -> CliResult<Vec<ManifestEntry>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("manifest {}: {e}", path.display())))?;
    let base = path.parent().unwrap_or_else(|| Path::new(""));
    let mut entries = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (p, label) = line.split_once('\t').ok_or_else(|| {
            CliError::data(format!(
                "manifest {} line {}: expected path<TAB>label",
                path.display(),
                lineno + 1
            ))
        })?;
        let label: usize = label.trim().parse().map_err(|_| {
            CliError::data(format!(
                "manifest {} line {}: bad label '{label}'",
                path.display(),
                lineno + 1
            ))
        })?;
        let sample_path = base.join(p);
        entries.push(ManifestEntry {
            path: sample_path,
            label,
        });
    }
    if entries.is_empty() {
        return Err(CliError::data(format!(
            "manifest {} lists no samples",
            path.display()
        )));
    }
    Ok(entries)
}

/// A bundled toy classifier plus the input shape it expects.
pub struct LoadedClassifier {
    pub classifier: Box<dyn Classifier + Send + Sync>,
    pub channels: usize,
    pub height: usize,
    pub width: usize,
    pub description: String,
}

/// Parse `constant:CLASS:NCLASSES:CxHxW`, `linear:FILE` or `centroid:FILE`.
pub fn load_classifier(spec: &str) -> CliResult<LoadedClassifier> {
    if let Some(rest) = spec.strip_prefix("constant:") {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(CliError::usage(
                "constant classifier spec is constant:CLASS:NCLASSES:CxHxW",
            ));
        }
        let class: usize = parts[0]
            .parse()
            .map_err(|_| CliError::usage("bad constant class".to_string()))?;
        let num: usize = parts[1]
            .parse()
            .map_err(|_| CliError::usage("bad constant class count".to_string()))?;
        let (c, h, w) = parse_shape(parts[2])?;
        let clf = ConstantClassifier::new(class, num)
            .map_err(|e| CliError::usage(e.to_string()))?;
        Ok(LoadedClassifier {
            classifier: Box::new(clf),
            channels: c,
            height: h,
            width: w,
            description: format!("constant class {class} of {num}"),
        })
    } else if let Some(path) = spec.strip_prefix("linear:") {
        load_matrix_classifier(Path::new(path), true)
    } else if let Some(path) = spec.strip_prefix("centroid:") {
        load_matrix_classifier(Path::new(path), false)
    } else {
        Err(CliError::usage(format!(
            "bad classifier spec '{spec}' (expected constant:.. | linear:FILE | centroid:FILE)"
        )))
    }
}

fn parse_shape(s: &str) -> CliResult<(usize, usize, usize)> {
    let dims: Vec<&str> = s.split('x').collect();
    if dims.len() != 3 {
        return Err(CliError::usage(format!("bad shape '{s}' (expected CxHxW)")));
    }
    let parse = |v: &str| -> CliResult<usize> {
        v.parse()
            .map_err(|_| CliError::usage(format!("bad shape component '{v}'")))
    };
    Ok((parse(dims[0])?, parse(dims[1])?, parse(dims[2])?))
}

/// Text parameter file for linear/centroid classifiers:
/// header `linear|centroid NCLASSES CHANNELS HEIGHT WIDTH`,
/// then one whitespace-separated row per class (linear rows start with the
/// bias, followed by the weights; centroid rows are the centroid itself).
fn load_matrix_classifier(path: &Path, linear: bool) -> CliResult<LoadedClassifier> {
    let data_err =
        |m: String| CliError::data(format!("classifier file {}: {m}", path.display()));
    let text = std::fs::read_to_string(path)
        .map_err(|e| data_err(e.to_string()))?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| data_err("empty file".to_string()))?
        .split_whitespace()
        .collect();
    let expected_kind = if linear { "linear" } else { "centroid" };
    if header.len() != 5 || header[0] != expected_kind {
        return Err(data_err(format!(
            "header must be '{expected_kind} NCLASSES CHANNELS HEIGHT WIDTH'"
        )));
    }
    let parse = |v: &str| -> CliResult<usize> {
        v.parse().map_err(|_| data_err(format!("bad header value '{v}'")))
    };
    let (nclasses, c, h, w) = (
        parse(header[1])?,
        parse(header[2])?,
        parse(header[3])?,
        parse(header[4])?,
    );
    let dim = c * h * w;
    let per_row = if linear { dim + 1 } else { dim };
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(nclasses);
    for (i, line) in lines.enumerate() {
        let vals: Result<Vec<f64>, _> = line.split_whitespace().map(str::parse::<f64>).collect();
        let vals = vals.map_err(|_| data_err(format!("bad number in class row {i}")))?;
        if vals.len() != per_row {
            return Err(data_err(format!(
                "class row {i} has {} values, expected {per_row}",
                vals.len()
            )));
        }
        rows.push(vals);
    }
    if rows.len() != nclasses {
        return Err(data_err(format!(
            "expected {nclasses} class rows, found {}",
            rows.len()
        )));
    }
    let classifier: Box<dyn Classifier + Send + Sync> = if linear {
        let biases: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let weights: Vec<Vec<f64>> = rows.iter().map(|r| r[1..].to_vec()).collect();
        Box::new(
            LinearClassifier::new(weights, biases, c, h, w)
                .map_err(|e| data_err(e.to_string()))?,
        )
    } else {
        Box::new(
            NearestCentroidClassifier::new(rows, c, h, w)
                .map_err(|e| data_err(e.to_string()))?,
        )
    };
    Ok(LoadedClassifier {
        classifier,
        channels: c,
        height: h,
        width: w,
        description: format!("{expected_kind} ({nclasses} classes) from {}", path.display()),
    })
}
