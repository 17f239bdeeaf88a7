//! Experiment harnesses: the two-slit duality scan and energy-gap
//! spectroscopy. Parameter points run independently and results come back
//! in input order.

mod spectroscopy;
mod two_slit;

pub use spectroscopy::{gap_spectroscopy, gap_spectroscopy_with, GapMeasurement};
pub use two_slit::{
    duality_scan, duality_scan_with, fringe_visibility, interpolated_coefficients, make_screen_modes,
    make_two_slit_modes, particle_coefficients, two_slit_kernel, wave_coefficients, DualityPoint, TwoSlitFamily,
};
