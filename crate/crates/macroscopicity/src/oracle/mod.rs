//! Independent brute-force validators for every analytic likelihood.
//!
//! Each submodule re-derives one experiment's outcome statistics from the
//! raw dynamics — exact Dicke-basis master-equation propagation, a
//! density-matrix walk simulation, direct quadrature of characteristic
//! functions and of the defining geometric-factor integral, and Monte Carlo
//! integration of the shear-diffusion Langevin equation.  None of them share
//! formula code with the closed-form model modules; they depend only on the
//! core domain types, special functions, quadrature, and seeded RNG, so an
//! agreement between the two routes genuinely checks the transcription of
//! the analytic likelihoods.

pub mod charfn;
pub mod dicke;
pub mod geom;
pub mod shear;
pub mod walk;

pub use charfn::{nanobeam_char_quadrature, CharFnSetup};
pub use dicke::{evolve_dicke, measure_after_recombiner, one_axis_squeeze, DickeState};
pub use geom::{atomic_u_quadrature, continuum_u_quadrature};
pub use shear::{shear_diffusion_mc, shear_variance_formula, ShearMcResult};
pub use walk::{qrw_density_matrix_walk, WalkProbabilities};
