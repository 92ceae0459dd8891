//! Mask-level operations: structure regions, connected components, hole
//! filling and boundary tracing.

pub mod components;
pub mod contour;
pub mod region;

pub use components::{fill_holes, keep_largest_fill_holes, label_components, largest_component};
pub use contour::{contour_from_pixels, trace_boundary_pixels, trace_contour, Contour, Point};
pub use region::{region_of, BinaryMask, StructureId};
