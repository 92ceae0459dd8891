//! File formats and acquisition-geometry utilities.

pub mod contour_csv;
pub mod manifest;
pub mod mask;
pub mod polar;

pub use contour_csv::{parse_contour_csv, read_contour_csv};
pub use manifest::{
    load_manifest, parse_manifest, CaseKey, EfGroup, Instant, PatientCase, Quality, View,
};
pub use mask::{
    read_label_mask, read_mask, read_mask_with, write_mask, LabelMask, MaskReadOptions,
};
pub use polar::{scan_convert, scan_convert_labels, PolarImage, SectorGrid};
