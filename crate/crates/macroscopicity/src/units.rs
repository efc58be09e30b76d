//! Physical constants (SI, CODATA 2018) and particle masses.
//!
//! Everything downstream works in SI units: seconds, metres, kilograms,
//! kg·m/s for momenta, joules for energies. Keeping one fixed unit system
//! avoids the silent factor errors that creep in when formulas are quoted
//! in mixed natural units.

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;

/// Electron mass, kg.
pub const M_E: f64 = 9.109_383_7015e-31;

/// Unified atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;

/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;

/// Electron volt, J.
pub const EV: f64 = 1.602_176_634e-19;

/// Mass of a silicon atom (28.0855 u averaged isotopic composition), kg.
pub const M_SILICON: f64 = 28.0855 * AMU;

/// Mass of a rubidium-87 atom, kg.
pub const M_RB87: f64 = 86.909_180_527 * AMU;

/// Mass of a caesium-133 atom, kg.
pub const M_CS133: f64 = 132.905_451_961 * AMU;

/// Squared mass-amplification ratio (m/m_e)² entering every modification
/// rate: heavier constituents decohere faster by this factor.
#[must_use]
pub fn mass_ratio_sq(mass_kg: f64) -> f64 {
    let r = mass_kg / M_E;
    r * r
}
