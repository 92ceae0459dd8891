//! Polar (beam angle × depth) B-mode data and its scan conversion onto the
//! Cartesian grid used by the annotations.
//!
//! Geometry: the probe sits at the origin, `z` points away from the probe and
//! `x` runs parallel to it. Beam `i` leaves at angle
//! `angle_min + i·(angle_max − angle_min)/(n_beams − 1)` measured from the
//! `z` axis toward `+x`; sample `j` lies at depth `j·sample_spacing`.

use crate::error::{Error, Result};
use crate::io::mask::LabelMask;

/// Wavelength of the acquisition probe, mm. Output spacing is λ/2 × λ/4.
pub const DEFAULT_WAVELENGTH_MM: f64 = 0.6;

#[derive(Debug, Clone, PartialEq)]
pub struct PolarImage {
    n_beams: usize,
    n_samples: usize,
    angle_min: f64,
    angle_max: f64,
    sample_spacing: f64,
    wavelength: f64,
    /// Beam-major: `values[beam * n_samples + sample]`.
    values: Vec<u8>,
}

impl PolarImage {
    pub fn new(
        n_beams: usize,
        n_samples: usize,
        angle_min: f64,
        angle_max: f64,
        sample_spacing: f64,
        values: Vec<u8>,
    ) -> Result<Self> {
        if n_beams < 2 || n_samples < 2 {
            return Err(Error::InvalidArgument(format!(
                "polar grid needs at least 2 beams and 2 samples, got {n_beams}x{n_samples}"
            )));
        }
        if !(angle_max > angle_min)
            || angle_min < -std::f64::consts::PI
            || angle_max > std::f64::consts::PI
        {
            return Err(Error::InvalidArgument(format!(
                "invalid sector [{angle_min}, {angle_max}] rad"
            )));
        }
        if !(sample_spacing > 0.0 && sample_spacing.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "sample spacing must be positive, got {sample_spacing}"
            )));
        }
        if values.len() != n_beams * n_samples {
            return Err(Error::InvalidArgument(format!(
                "{} values for {n_beams} beams x {n_samples} samples",
                values.len()
            )));
        }
        Ok(Self {
            n_beams,
            n_samples,
            angle_min,
            angle_max,
            sample_spacing,
            wavelength: DEFAULT_WAVELENGTH_MM,
            values,
        })
    }

    pub fn with_wavelength(mut self, wavelength: f64) -> Result<Self> {
        if !(wavelength > 0.0 && wavelength.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "wavelength must be positive, got {wavelength}"
            )));
        }
        self.wavelength = wavelength;
        Ok(self)
    }

    pub fn n_beams(&self) -> usize {
        self.n_beams
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn angles(&self) -> (f64, f64) {
        (self.angle_min, self.angle_max)
    }

    pub fn sample_spacing(&self) -> f64 {
        self.sample_spacing
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn value(&self, beam: usize, sample: usize) -> u8 {
        self.values[beam * self.n_samples + sample]
    }

    pub fn max_depth(&self) -> f64 {
        (self.n_samples - 1) as f64 * self.sample_spacing
    }

    fn beam_step(&self) -> f64 {
        (self.angle_max - self.angle_min) / (self.n_beams - 1) as f64
    }

    /// Bilinear interpolation in (angle, depth) at Cartesian point `(x, z)`
    /// mm; `None` outside the sector.
    pub fn sample_at(&self, x: f64, z: f64) -> Option<f64> {
        let r = x.hypot(z);
        let theta = x.atan2(z);
        if theta < self.angle_min || theta > self.angle_max || r > self.max_depth() {
            return None;
        }
        let u = (theta - self.angle_min) / self.beam_step();
        let v = r / self.sample_spacing;
        let (i0, fu) = split_index(u, self.n_beams);
        let (j0, fv) = split_index(v, self.n_samples);
        let at = |i: usize, j: usize| f64::from(self.value(i, j));
        Some(
            (1.0 - fu) * (1.0 - fv) * at(i0, j0)
                + fu * (1.0 - fv) * at(i0 + 1, j0)
                + (1.0 - fu) * fv * at(i0, j0 + 1)
                + fu * fv * at(i0 + 1, j0 + 1),
        )
    }

    /// Nearest (beam, sample) value at `(x, z)` mm; `None` outside the sector.
    pub fn nearest_at(&self, x: f64, z: f64) -> Option<u8> {
        let r = x.hypot(z);
        let theta = x.atan2(z);
        if theta < self.angle_min || theta > self.angle_max || r > self.max_depth() {
            return None;
        }
        let i = ((theta - self.angle_min) / self.beam_step()).round() as usize;
        let j = (r / self.sample_spacing).round() as usize;
        Some(self.value(i.min(self.n_beams - 1), j.min(self.n_samples - 1)))
    }
}

fn split_index(pos: f64, len: usize) -> (usize, f64) {
    let base = (pos.floor().max(0.0) as usize).min(len - 2);
    (base, pos - base as f64)
}

/// Cartesian output grid covering a sector's bounding box. Pixel centres sit
/// on integer multiples of the spacing so the probe axis `x = 0` is a column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorGrid {
    pub width: usize,
    pub height: usize,
    pub spacing_x: f64,
    pub spacing_z: f64,
    first_col: i64,
    first_row: i64,
}

impl SectorGrid {
    pub fn for_polar(polar: &PolarImage) -> Self {
        let spacing_x = polar.wavelength / 2.0;
        let spacing_z = polar.wavelength / 4.0;
        let r = polar.max_depth();
        let (lo, hi) = polar.angles();

        let mut xs = vec![0.0];
        let mut zs = vec![0.0];
        let mut angles = vec![lo, hi];
        for special in [
            -std::f64::consts::FRAC_PI_2,
            0.0,
            std::f64::consts::FRAC_PI_2,
        ] {
            if special > lo && special < hi {
                angles.push(special);
            }
        }
        for a in angles {
            xs.push(r * a.sin());
            zs.push(r * a.cos());
        }
        let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
        let max = |v: &[f64]| v.iter().copied().fold(f64::NEG_INFINITY, f64::max);

        let first_col = (min(&xs) / spacing_x).floor() as i64;
        let last_col = (max(&xs) / spacing_x).floor() as i64;
        let first_row = (min(&zs) / spacing_z).floor() as i64;
        let last_row = (max(&zs) / spacing_z).floor() as i64;
        Self {
            width: (last_col - first_col + 1) as usize,
            height: (last_row - first_row + 1) as usize,
            spacing_x,
            spacing_z,
            first_col,
            first_row,
        }
    }

    /// Physical `(x, z)` of a pixel centre.
    pub fn pixel_center(&self, col: usize, row: usize) -> (f64, f64) {
        (
            (self.first_col + col as i64) as f64 * self.spacing_x,
            (self.first_row + row as i64) as f64 * self.spacing_z,
        )
    }

    /// Column holding `x = 0`, when the grid contains it.
    pub fn axis_col(&self) -> Option<usize> {
        usize::try_from(-self.first_col)
            .ok()
            .filter(|&c| c < self.width)
    }
}

/// Resamples a polar image onto the λ/2 × λ/4 Cartesian grid. In-sector
/// pixels are bilinearly interpolated and rounded; out-of-sector pixels are 0.
pub fn scan_convert(polar: &PolarImage) -> LabelMask {
    resample(polar, |x, z| {
        polar
            .sample_at(x, z)
            .map(|v| v.round().clamp(0.0, 255.0) as u8)
    })
}

/// Same grid as [`scan_convert`] with nearest-neighbour lookup, for label
/// masks whose values must not blend.
pub fn scan_convert_labels(polar: &PolarImage) -> LabelMask {
    resample(polar, |x, z| polar.nearest_at(x, z))
}

fn resample(polar: &PolarImage, lookup: impl Fn(f64, f64) -> Option<u8>) -> LabelMask {
    let grid = SectorGrid::for_polar(polar);
    let mut values = vec![0u8; grid.width * grid.height];
    for row in 0..grid.height {
        for col in 0..grid.width {
            let (x, z) = grid.pixel_center(col, row);
            if let Some(v) = lookup(x, z) {
                values[row * grid.width + col] = v;
            }
        }
    }
    LabelMask::new(
        grid.width,
        grid.height,
        grid.spacing_x,
        grid.spacing_z,
        values,
    )
    .expect("sector grid is never empty")
}
