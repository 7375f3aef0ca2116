//! Piecewise-affine and piecewise-polynomial vector fields on axis-aligned
//! rational rectangle partitions.

mod geometry;
mod pa;
pub mod pp;
pub mod pw1d;
pub mod serial;

pub use geometry::{AffineMap, Rect};
pub use pa::{common_refine, find_interior_overlap, overlay_pairs, Caps, FieldError, PACell, PAField};
pub use pp::{
    blend, blend_with_bands, overlay_rects, rect_subtract, CutoffField, CutoffPiece, PPCell,
    PPField, PPMap, Poly2,
};
pub use pw1d::{Piece, Pw1D};
