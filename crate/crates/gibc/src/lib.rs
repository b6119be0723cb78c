//! Recovery of obstacle shape and generalized impedance parameters from
//! multifrequency scattered-field data.

pub mod special;
pub mod fourier;
pub mod geometry;
pub mod layerpot;
pub mod linalg;
pub mod models;
pub mod forward;
pub mod frechet;
pub mod inverse;
pub mod harness;
