//! Special-function kernel: gamma family, scaled Bessel K of real order, the
//! Bessel-type Kummer U family, a small Meijer G engine and the half-range
//! Gaussian rule for the weight `e^{-x²}`.

pub mod bessel;
pub mod gamma;
pub mod gauss;
pub mod kummer;
pub mod meijer;

pub use bessel::{bessel_k_scaled, ln_bessel_k_scaled, ln_bessel_k_scaled_ladder};
pub use gamma::{gamma, ln_gamma, ln_gamma_complex, ln_pochhammer, pochhammer, rgamma};
pub use gauss::{gauss_rule, gauss_rule_15, GaussRule, GaussRule15};
pub use kummer::{kummer_u_bessel_family, ln_kummer_u_bessel_family};
pub use meijer::{meijer_g, meijer_g_contour, meijer_g_contour_scaled, meijer_g_residues, ContourOptions, MeijerSpec};
