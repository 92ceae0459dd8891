//! MetaImage-style mask files: a `Key = Value` text header plus a separate
//! raw payload of one unsigned byte per pixel, row-major, width fastest.
//!
//! The writer emits header keys in a fixed order (`NDims`, `DimSize`,
//! `ElementType`, `ElementSpacing`, preserved extra keys, `ElementDataFile`)
//! so the output is byte-deterministic.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Largest valid annotation label (0 background, 1 LV cavity, 2 myocardium, 3 LA).
pub const MAX_LABEL: u8 = 3;

const REQUIRED_KEYS: [&str; 5] = [
    "NDims",
    "DimSize",
    "ElementType",
    "ElementSpacing",
    "ElementDataFile",
];

/// A 2D grid of small unsigned values with physical pixel spacing.
///
/// Annotation masks carry labels 0..=3; grayscale images reuse the container
/// with values 0..=255.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelMask {
    width: usize,
    height: usize,
    spacing_x: f64,
    spacing_z: f64,
    labels: Vec<u8>,
    extra_keys: Vec<(String, String)>,
}

impl LabelMask {
    pub fn new(
        width: usize,
        height: usize,
        spacing_x: f64,
        spacing_z: f64,
        labels: Vec<u8>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidMask(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if !(spacing_x > 0.0 && spacing_x.is_finite() && spacing_z > 0.0 && spacing_z.is_finite()) {
            return Err(Error::InvalidMask(format!(
                "spacing must be positive and finite, got ({spacing_x}, {spacing_z})"
            )));
        }
        if labels.len() != width * height {
            return Err(Error::InvalidMask(format!(
                "{} values for a {width}x{height} grid",
                labels.len()
            )));
        }
        Ok(Self {
            width,
            height,
            spacing_x,
            spacing_z,
            labels,
            extra_keys: Vec::new(),
        })
    }

    /// All-zero mask.
    pub fn zeros(width: usize, height: usize, spacing_x: f64, spacing_z: f64) -> Result<Self> {
        Self::new(width, height, spacing_x, spacing_z, vec![0; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// (lateral, axial) spacing in mm per pixel.
    pub fn spacing(&self) -> (f64, f64) {
        (self.spacing_x, self.spacing_z)
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn labels_mut(&mut self) -> &mut [u8] {
        &mut self.labels
    }

    pub fn get(&self, col: usize, row: usize) -> u8 {
        self.labels[row * self.width + col]
    }

    pub fn set(&mut self, col: usize, row: usize, value: u8) {
        self.labels[row * self.width + col] = value;
    }

    /// Header keys outside the required set, in file order.
    pub fn extra_keys(&self) -> &[(String, String)] {
        &self.extra_keys
    }

    pub fn with_extra_key(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.extra_keys.push((key.into(), value.into()));
        self
    }

    /// First pixel whose value exceeds [`MAX_LABEL`], as `(index, value)`.
    pub fn first_invalid_label(&self) -> Option<(usize, u8)> {
        self.labels
            .iter()
            .enumerate()
            .find(|(_, &v)| v > MAX_LABEL)
            .map(|(i, &v)| (i, v))
    }

    pub fn same_grid(&self, other: &LabelMask) -> bool {
        self.width == other.width
            && self.height == other.height
            && self.spacing_x == other.spacing_x
            && self.spacing_z == other.spacing_z
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MaskReadOptions {
    /// Reject values above [`MAX_LABEL`].
    pub strict_labels: bool,
}

/// Reads a mask without label validation (grayscale images are accepted).
pub fn read_mask(path: impl AsRef<Path>) -> Result<LabelMask> {
    read_mask_with(path, MaskReadOptions::default())
}

/// Reads an annotation mask, rejecting labels above 3.
pub fn read_label_mask(path: impl AsRef<Path>) -> Result<LabelMask> {
    read_mask_with(
        path,
        MaskReadOptions {
            strict_labels: true,
        },
    )
}

pub fn read_mask_with(path: impl AsRef<Path>, options: MaskReadOptions) -> Result<LabelMask> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let header = Header::parse(path, &text)?;

    let raw_path = match path.parent() {
        Some(dir) => dir.join(&header.data_file),
        None => PathBuf::from(&header.data_file),
    };
    let payload = fs::read(&raw_path).map_err(|e| Error::io(&raw_path, e))?;
    let expected = header.width * header.height;
    if payload.len() != expected {
        return Err(Error::Truncated {
            path: raw_path,
            expected,
            actual: payload.len(),
        });
    }

    let mut mask = LabelMask::new(
        header.width,
        header.height,
        header.spacing_x,
        header.spacing_z,
        payload,
    )
    .map_err(|e| format_error(path, "DimSize", e.to_string()))?;
    mask.extra_keys = header.extra;

    if options.strict_labels {
        if let Some((index, value)) = mask.first_invalid_label() {
            return Err(Error::InvalidLabel {
                path: path.to_path_buf(),
                value,
                index,
            });
        }
    }
    Ok(mask)
}

/// Writes `<path>` (header) and a sibling raw file named after the header
/// stem with a `.raw` extension.
pub fn write_mask(mask: &LabelMask, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let raw_path = path.with_extension("raw");
    let raw_name = raw_path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::InvalidArgument(format!("unusable mask path {}", path.display())))?
        .to_string();

    fs::write(path, render_header(mask, &raw_name)).map_err(|e| Error::io(path, e))?;
    fs::write(&raw_path, &mask.labels).map_err(|e| Error::io(&raw_path, e))?;
    Ok(())
}

/// Header text exactly as [`write_mask`] emits it.
pub fn render_header(mask: &LabelMask, data_file: &str) -> String {
    let mut out = String::new();
    out.push_str("NDims = 2\n");
    out.push_str(&format!("DimSize = {} {}\n", mask.width, mask.height));
    out.push_str("ElementType = MET_UCHAR\n");
    out.push_str(&format!(
        "ElementSpacing = {} {}\n",
        mask.spacing_x, mask.spacing_z
    ));
    for (key, value) in &mask.extra_keys {
        out.push_str(&format!("{key} = {value}\n"));
    }
    out.push_str(&format!("ElementDataFile = {data_file}\n"));
    out
}

struct Header {
    width: usize,
    height: usize,
    spacing_x: f64,
    spacing_z: f64,
    data_file: String,
    extra: Vec<(String, String)>,
}

fn format_error(path: &Path, key: &str, msg: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        key: key.to_string(),
        msg: msg.into(),
    }
}

impl Header {
    fn parse(path: &Path, text: &str) -> Result<Self> {
        let mut entries: Vec<(String, String)> = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format_error(path, line, "expected `Key = Value`"));
            };
            let key = key.trim().to_string();
            if entries.iter().any(|(k, _)| *k == key) {
                return Err(format_error(path, &key, "key appears twice"));
            }
            entries.push((key, value.trim().to_string()));
        }
        let lookup = |key: &str| -> Result<&str> {
            entries
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.as_str())
                .ok_or_else(|| format_error(path, key, "required key missing"))
        };

        if lookup("NDims")? != "2" {
            return Err(format_error(path, "NDims", "only 2D images are supported"));
        }
        let dims = parse_pair::<usize>(path, "DimSize", lookup("DimSize")?)?;
        if lookup("ElementType")? != "MET_UCHAR" {
            return Err(format_error(
                path,
                "ElementType",
                "only MET_UCHAR is supported",
            ));
        }
        let spacing = parse_pair::<f64>(path, "ElementSpacing", lookup("ElementSpacing")?)?;
        let data_file = lookup("ElementDataFile")?.to_string();
        if data_file.eq_ignore_ascii_case("LOCAL") || data_file.is_empty() {
            return Err(format_error(
                path,
                "ElementDataFile",
                "a separate raw file is required",
            ));
        }

        let extra: Vec<(String, String)> = entries
            .into_iter()
            .filter(|(k, _)| !REQUIRED_KEYS.contains(&k.as_str()))
            .collect();
        for (key, value) in &extra {
            let unsupported = match key.as_str() {
                "CompressedData" => value.eq_ignore_ascii_case("true"),
                "ElementNumberOfChannels" => value != "1",
                "HeaderSize" => value != "0",
                _ => false,
            };
            if unsupported {
                return Err(format_error(
                    path,
                    key,
                    format!("unsupported value `{value}`"),
                ));
            }
        }

        Ok(Header {
            width: dims.0,
            height: dims.1,
            spacing_x: spacing.0,
            spacing_z: spacing.1,
            data_file,
            extra,
        })
    }
}

fn parse_pair<T: std::str::FromStr>(path: &Path, key: &str, value: &str) -> Result<(T, T)> {
    let parts: Vec<&str> = value.split_whitespace().collect();
    if parts.len() != 2 {
        return Err(format_error(
            path,
            key,
            format!("expected two values, got `{value}`"),
        ));
    }
    let parse = |s: &str| {
        s.parse::<T>()
            .map_err(|_| format_error(path, key, format!("cannot parse `{s}`")))
    };
    Ok((parse(parts[0])?, parse(parts[1])?))
}
