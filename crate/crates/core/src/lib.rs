//! Evaporation-proton angular distributions from compound-nucleus
//! photoreactions and extraction of the cross-symmetry phase relaxation
//! width from their forward–backward asymmetry.

pub mod angmom;
pub mod xsection;
pub mod thermo;
pub mod fitkit;
pub mod app;
