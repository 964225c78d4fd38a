//! Two-photon spatial mode functions of type-I down-conversion with pump
//! walk-off: coincidence images, spiral (OAM) spectra, Schmidt numbers and
//! polarization entanglement of two-crystal sources.
//!
//! Internally lengths are in µm, angles in radians and transverse
//! wavevectors in rad/µm. Configuration types keep the file units (nm, µm,
//! mm, degrees) and convert through their accessors.

pub mod config;
pub mod error;
pub mod grid;
pub mod mode;
pub mod oam;
pub mod output;
pub mod params;
pub mod polarization;
pub mod schmidt;
pub mod selftest;
pub mod sweep;

pub use config::{GridSettings, RunConfig};
pub use error::{Error, Result};
pub use grid::{DetectorPlaneGrid, MomentumGrid};
pub use mode::{coincidence_image, ellipticity, mode_orientation_beta, Ellipticity, Image, ModeFunction, Orientation, Wavevector};
pub use oam::{spiral_spectrum, PolarGrid, SpiralSpectrum};
pub use params::{BiphotonConfig, CollectionOptics, CrystalGeometry, ModelConstants, PumpBeam};
pub use polarization::{two_crystal_state, PolarizationState, TwoCrystalConfig};
pub use schmidt::{schmidt_number, KernelGrid, SchmidtSpectrum};
pub use sweep::{SweepParam, SweepRange};
