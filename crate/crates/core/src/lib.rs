//! Spectra of a charged particle on a noncommutative plane in a uniform
//! magnetic field and an anisotropic harmonic trap.
//!
//! The pipeline is
//! [`representations`] → [`hamiltonian`] → [`spectra`], with
//! [`fock_oracle`] as an independent check and [`cli`] as the front end.

pub mod cli;
pub mod error;
pub mod fock_oracle;
pub mod hamiltonian;
pub mod representations;
pub mod spectra;

pub use error::{Error, Result};
pub use hamiltonian::{PhysicalSystem, Prescription, QuadraticForm};
pub use representations::{GaugePair, NcParameters, RepMatrix};
pub use spectra::{EigenFrequencies, ModeInvariants};
