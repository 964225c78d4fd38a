//! Parameter sweeps shared by the OAM, Schmidt and concurrence drivers.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::params::BiphotonConfig;

/// Configuration parameter varied along a sweep, in configuration-file
/// units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Azimuth α, degrees.
    Alpha,
    /// Collection-mode width w_s, µm.
    FilterWaist,
    /// Pump waist w₀, µm.
    PumpWaist,
    /// Crystal length L, mm.
    Length,
    /// Pump walk-off ρ₀, degrees.
    Walkoff,
}

impl SweepParam {
    pub fn apply(self, cfg: &BiphotonConfig, value: f64) -> Result<BiphotonConfig> {
        match self {
            SweepParam::Alpha => cfg.with_alpha_deg(value),
            SweepParam::FilterWaist => cfg.with_filter_waist_um(value),
            SweepParam::PumpWaist => cfg.with_waist_um(value),
            SweepParam::Length => cfg.with_length_mm(value),
            SweepParam::Walkoff => cfg.with_walkoff_deg(value),
        }
    }

    /// Value of the parameter in `cfg`, in configuration-file units.
    pub fn current(self, cfg: &BiphotonConfig) -> f64 {
        match self {
            SweepParam::Alpha => cfg.geom.alpha_deg(),
            SweepParam::FilterWaist => cfg.optics.filter_waist_um(),
            SweepParam::PumpWaist => cfg.pump.waist_um(),
            SweepParam::Length => cfg.geom.length_mm(),
            SweepParam::Walkoff => cfg.geom.walkoff_deg(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Alpha => "alpha",
            SweepParam::FilterWaist => "ws",
            SweepParam::PumpWaist => "w0",
            SweepParam::Length => "L",
            SweepParam::Walkoff => "rho0",
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(SweepParam::Alpha),
            "ws" => Ok(SweepParam::FilterWaist),
            "w0" => Ok(SweepParam::PumpWaist),
            "L" => Ok(SweepParam::Length),
            "rho0" => Ok(SweepParam::Walkoff),
            other => Err(Error::InvalidParameter {
                name: "sweep",
                reason: format!("unknown sweep parameter `{other}`"),
            }),
        }
    }
}

/// Inclusive range `start:stop:step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepRange {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        let bad = |reason: String| Error::InvalidParameter { name: "range", reason };
        if !(start.is_finite() && stop.is_finite() && step.is_finite()) {
            return Err(bad("bounds and step must be finite".into()));
        }
        if step <= 0.0 {
            return Err(bad(format!("step must be > 0, got {step}")));
        }
        if stop < start {
            return Err(bad(format!("stop {stop} lies below start {start}")));
        }
        Ok(Self { start, stop, step })
    }

    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// start + k·step, computed without accumulation.
    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.start + k as f64 * self.step).collect()
    }
}

impl FromStr for SweepRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let parse = |t: &str| {
            t.trim().parse::<f64>().map_err(|_| Error::InvalidParameter {
                name: "range",
                reason: format!("cannot parse `{t}` in `{s}`"),
            })
        };
        match parts.as_slice() {
            [a, b, c] => SweepRange::new(parse(a)?, parse(b)?, parse(c)?),
            [a] => {
                let v = parse(a)?;
                SweepRange::new(v, v, 1.0)
            }
            _ => Err(Error::InvalidParameter {
                name: "range",
                reason: format!("expected START:STOP:STEP, got `{s}`"),
            }),
        }
    }
}
