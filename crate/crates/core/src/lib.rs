#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod anorm;
pub mod convex_geom;
pub mod error;
pub mod field;
pub mod geom;
pub mod manufactured;
pub mod par;
pub mod radial;
pub mod rearrange;
pub mod report;
