#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod exponents;
pub mod geometry;
pub mod oracles;
pub mod plot;
pub mod quadrature;
pub mod report;
pub mod sampling;
pub mod sde_mc;
pub mod special;
pub mod spectral;
pub mod verify;
pub mod weights;
