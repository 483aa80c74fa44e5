//! Linear stability of streaming plasmas and self-gravitating fluids.
//!
//! The crate covers multi-fluid dielectrics, Penrose-Nyquist analysis of
//! smooth distributions, multi-contour waterbags, the symplectic normal form
//! of the linearized Hamiltonian and the classification of stability changes
//! along parameter sweeps by Kreĭn signature.
//!
//! Every numerical routine is generic over a [`Real`] scalar (`f32` or
//! `f64`); the aliases below fix `f64`.

pub mod bifurcation;
pub mod dispersion;
pub mod linalg;
pub mod normalform;
pub mod pairing;
pub mod penrose;
pub mod profile;
pub mod quadrature;
pub mod scalar;
pub mod search;
pub mod tolerance;
pub mod waterbag;

pub use scalar::{Cplx, Real};
pub use tolerance::Tolerances;

/// Double-precision multi-fluid equilibrium.
pub type MultiFluid = dispersion::MultiFluidEquilibrium<f64>;
/// Double-precision dielectric family.
pub type Family = dispersion::DispersionFamily<f64>;
/// Double-precision waterbag.
pub type Waterbag = waterbag::WaterbagEquilibrium<f64>;
/// Double-precision distribution profile.
pub type Distribution = profile::Profile<f64>;
/// Double-precision discrete mode.
pub type Mode = dispersion::ModeRecord<f64>;
/// Double-precision quadratic block.
pub type Block = normalform::QuadraticBlock<f64>;
/// Double-precision complex number.
pub type Complex64 = Cplx<f64>;
