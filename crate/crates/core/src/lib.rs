//! Exact computational calculus for piecewise-affine vector fields on
//! rectangle partitions: rank-one laminates, staircase and Cantor
//! quantizers, strain-measure decompositions, and the counterexample
//! pipelines built from them.

pub mod fields;
pub mod numeric;

pub mod counterexamples;
pub mod fineprops;
pub mod laminate;
pub mod measures;
pub mod quantize;
pub mod render;
pub mod report;
