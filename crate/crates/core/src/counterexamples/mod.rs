//! End-to-end constructions and checks: the laminate iteration, pure-jump
//! assembly, the continuous Cantor pipeline, the disjoint-balls series, and
//! Caccioppoli-affine inequality batteries.

pub mod balls;
pub mod caccioppoli;
pub mod cantor;
pub mod ornstein;
pub mod pure_jump;
