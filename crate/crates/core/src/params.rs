//! Physical configuration of the down-conversion source.
//!
//! Values are held in the units of the configuration file (nm, µm, mm,
//! degrees) so that a configuration survives a write/read cycle bit for bit.
//! Every numerical routine goes through the accessors, which return lengths
//! in µm and angles in radians.

use crate::error::{Error, Result};

/// Sinc-to-Gaussian width factor of the phase-matching function.
pub const DEFAULT_GAMMA: f64 = 0.455;

fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite and > 0, got {value}"),
        })
    }
}

fn acute_deg(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && (0.0..90.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must lie in [0, 90) degrees, got {value}"),
        })
    }
}

/// Reduce an angle in degrees to [0, 360).
pub fn reduce_degrees(value: f64) -> f64 {
    let r = value.rem_euclid(360.0) + 0.0;
    if r >= 360.0 {
        0.0
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpBeam {
    wavelength_nm: f64,
    waist_um: f64,
}

impl PumpBeam {
    pub fn new(wavelength_nm: f64, waist_um: f64) -> Result<Self> {
        Ok(Self {
            wavelength_nm: positive("pump.wavelength_nm", wavelength_nm)?,
            waist_um: positive("pump.waist_um", waist_um)?,
        })
    }

    pub fn wavelength_nm(&self) -> f64 {
        self.wavelength_nm
    }

    pub fn waist_um(&self) -> f64 {
        self.waist_um
    }

    /// Pump wavelength in µm.
    pub fn wavelength(&self) -> f64 {
        self.wavelength_nm * 1e-3
    }

    /// Beam waist w₀ at the input face, in µm.
    pub fn waist(&self) -> f64 {
        self.waist_um
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CrystalGeometry {
    length_mm: f64,
    walkoff_deg: f64,
    noncollinear_deg: f64,
    alpha_deg: f64,
}

impl CrystalGeometry {
    pub fn new(length_mm: f64, walkoff_deg: f64, noncollinear_deg: f64, alpha_deg: f64) -> Result<Self> {
        if !alpha_deg.is_finite() {
            return Err(Error::InvalidParameter {
                name: "crystal.alpha_deg",
                reason: format!("must be finite, got {alpha_deg}"),
            });
        }
        Ok(Self {
            length_mm: positive("crystal.length_mm", length_mm)?,
            walkoff_deg: acute_deg("crystal.walkoff_deg", walkoff_deg)?,
            noncollinear_deg: acute_deg("crystal.noncollinear_deg", noncollinear_deg)?,
            alpha_deg: reduce_degrees(alpha_deg),
        })
    }

    pub fn length_mm(&self) -> f64 {
        self.length_mm
    }

    pub fn walkoff_deg(&self) -> f64 {
        self.walkoff_deg
    }

    pub fn noncollinear_deg(&self) -> f64 {
        self.noncollinear_deg
    }

    pub fn alpha_deg(&self) -> f64 {
        self.alpha_deg
    }

    /// Crystal length L in µm.
    pub fn length(&self) -> f64 {
        self.length_mm * 1e3
    }

    /// Pump Poynting-vector walk-off angle ρ₀ in radians.
    pub fn walkoff(&self) -> f64 {
        self.walkoff_deg.to_radians()
    }

    /// Internal non-collinear angle φ in radians.
    pub fn noncollinear(&self) -> f64 {
        self.noncollinear_deg.to_radians()
    }

    /// Azimuthal position α on the cone in radians, in [0, 2π).
    pub fn alpha(&self) -> f64 {
        self.alpha_deg.to_radians()
    }

    pub fn with_alpha_deg(self, alpha_deg: f64) -> Result<Self> {
        Self::new(self.length_mm, self.walkoff_deg, self.noncollinear_deg, alpha_deg)
    }

    pub fn with_length_mm(self, length_mm: f64) -> Result<Self> {
        Self::new(length_mm, self.walkoff_deg, self.noncollinear_deg, self.alpha_deg)
    }

    pub fn with_walkoff_deg(self, walkoff_deg: f64) -> Result<Self> {
        Self::new(self.length_mm, walkoff_deg, self.noncollinear_deg, self.alpha_deg)
    }

    pub fn with_noncollinear_deg(self, noncollinear_deg: f64) -> Result<Self> {
        Self::new(self.length_mm, self.walkoff_deg, noncollinear_deg, self.alpha_deg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollectionOptics {
    filter_waist_um: f64,
    focal_mm: f64,
    signal_nm: Option<f64>,
}

impl CollectionOptics {
    /// `signal_nm = None` selects the degenerate wavelength 2λ_p.
    pub fn new(filter_waist_um: f64, focal_mm: f64, signal_nm: Option<f64>) -> Result<Self> {
        if !(filter_waist_um.is_finite() && filter_waist_um >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "collection.ws_um",
                reason: format!("must be finite and >= 0, got {filter_waist_um}"),
            });
        }
        let signal_nm = signal_nm.map(|v| positive("collection.signal_nm", v)).transpose()?;
        Ok(Self {
            filter_waist_um,
            focal_mm: positive("collection.focal_mm", focal_mm)?,
            signal_nm,
        })
    }

    pub fn filter_waist_um(&self) -> f64 {
        self.filter_waist_um
    }

    pub fn focal_mm(&self) -> f64 {
        self.focal_mm
    }

    pub fn signal_nm(&self) -> Option<f64> {
        self.signal_nm
    }

    /// Collection-mode width w_s in µm; zero means no filtering.
    pub fn filter_waist(&self) -> f64 {
        self.filter_waist_um
    }

    /// Focal length of the 2-f system in µm.
    pub fn focal_length(&self) -> f64 {
        self.focal_mm * 1e3
    }

    pub fn with_filter_waist_um(self, filter_waist_um: f64) -> Result<Self> {
        Self::new(filter_waist_um, self.focal_mm, self.signal_nm)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelConstants {
    pub gamma: f64,
}

impl ModelConstants {
    pub fn new(gamma: f64) -> Result<Self> {
        Ok(Self {
            gamma: positive("model.gamma", gamma)?,
        })
    }
}

impl Default for ModelConstants {
    fn default() -> Self {
        Self { gamma: DEFAULT_GAMMA }
    }
}

/// Everything the two-photon mode function depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiphotonConfig {
    pub pump: PumpBeam,
    pub geom: CrystalGeometry,
    pub optics: CollectionOptics,
    pub constants: ModelConstants,
}

impl BiphotonConfig {
    /// Source used in the coincidence-imaging experiment: 405 nm pump
    /// focused to 136 µm on a 5 mm crystal, φ = 4°, ρ₀ = 4.9°, f = 50 cm,
    /// degenerate 810 nm signal and no collection filtering.
    pub fn reference() -> Self {
        Self {
            pump: PumpBeam::new(405.0, 136.0).unwrap(),
            geom: CrystalGeometry::new(5.0, 4.9, 4.0, 0.0).unwrap(),
            optics: CollectionOptics::new(0.0, 500.0, None).unwrap(),
            constants: ModelConstants::default(),
        }
    }

    /// Signal wavelength λ_s in µm.
    pub fn signal_wavelength(&self) -> f64 {
        match self.optics.signal_nm() {
            Some(nm) => nm * 1e-3,
            None => 2.0 * self.pump.wavelength(),
        }
    }

    pub fn with_alpha_deg(mut self, alpha_deg: f64) -> Result<Self> {
        self.geom = self.geom.with_alpha_deg(alpha_deg)?;
        Ok(self)
    }

    pub fn with_waist_um(mut self, waist_um: f64) -> Result<Self> {
        self.pump = PumpBeam::new(self.pump.wavelength_nm(), waist_um)?;
        Ok(self)
    }

    pub fn with_filter_waist_um(mut self, ws_um: f64) -> Result<Self> {
        self.optics = self.optics.with_filter_waist_um(ws_um)?;
        Ok(self)
    }

    pub fn with_length_mm(mut self, length_mm: f64) -> Result<Self> {
        self.geom = self.geom.with_length_mm(length_mm)?;
        Ok(self)
    }

    pub fn with_walkoff_deg(mut self, walkoff_deg: f64) -> Result<Self> {
        self.geom = self.geom.with_walkoff_deg(walkoff_deg)?;
        Ok(self)
    }

    pub fn with_noncollinear_deg(mut self, noncollinear_deg: f64) -> Result<Self> {
        self.geom = self.geom.with_noncollinear_deg(noncollinear_deg)?;
        Ok(self)
    }
}

/// Non-collinear and walk-off lengths of a configuration, in µm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicLengths {
    /// L_nc = w₀ / sin φ; infinite for collinear emission.
    pub noncollinear: f64,
    /// L_w = w₀ / tan ρ₀; infinite without walk-off.
    pub walkoff: f64,
    /// The crystal is longer than both lengths.
    pub walkoff_dominated: bool,
}

pub fn characteristic_lengths(pump: &PumpBeam, geom: &CrystalGeometry) -> CharacteristicLengths {
    let w0 = pump.waist();
    let sin_phi = geom.noncollinear().sin();
    let tan_rho = geom.walkoff().tan();
    let noncollinear = if sin_phi > 0.0 { w0 / sin_phi } else { f64::INFINITY };
    let walkoff = if tan_rho > 0.0 { w0 / tan_rho } else { f64::INFINITY };
    let length = geom.length();
    CharacteristicLengths {
        noncollinear,
        walkoff,
        walkoff_dominated: length > noncollinear && length > walkoff,
    }
}
