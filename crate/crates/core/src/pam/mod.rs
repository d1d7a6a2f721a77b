//! Piecewise affine maps: data model, exact images, powers and conjugations.

pub mod graph;
pub mod interval;
pub mod map;
pub mod orbit;
pub mod text;

pub use graph::{classify, Classification, ReachGraph, Shape};
pub use interval::{Interval, IntervalSet, Preimage};
pub use map::{AffineMap, Pam, Piece, Transport, DEFAULT_PIECE_BOUND};
pub use orbit::{first_hit, OrbitCursor};
pub use text::{format_pam, parse_interval, parse_pam};
