//! Line-oriented `key = value` configuration files.
//!
//! ```text
//! # reference source
//! pump.wavelength_nm = 405
//! pump.waist_um = 136
//! crystal.length_mm = 5
//! crystal.walkoff_deg = 4.9
//! crystal.noncollinear_deg = 4
//! crystal.alpha_deg = 0
//! collection.ws_um = 0
//! collection.focal_mm = 500
//! grid.samples = 65
//! ```
//!
//! Optional keys: `collection.signal_nm` (default 2λ_p),
//! `grid.halfwidth_radperum` (default: decay rule), `model.gamma`
//! (default 0.455). Unknown and repeated keys are errors.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::params::{BiphotonConfig, CollectionOptics, CrystalGeometry, ModelConstants, PumpBeam, DEFAULT_GAMMA};

const PUMP_WAVELENGTH: &str = "pump.wavelength_nm";
const PUMP_WAIST: &str = "pump.waist_um";
const LENGTH: &str = "crystal.length_mm";
const WALKOFF: &str = "crystal.walkoff_deg";
const NONCOLLINEAR: &str = "crystal.noncollinear_deg";
const ALPHA: &str = "crystal.alpha_deg";
const FILTER: &str = "collection.ws_um";
const FOCAL: &str = "collection.focal_mm";
const SIGNAL: &str = "collection.signal_nm";
const SAMPLES: &str = "grid.samples";
const HALF_WIDTH: &str = "grid.halfwidth_radperum";
const GAMMA: &str = "model.gamma";

pub const KEYS: [&str; 12] = [
    PUMP_WAVELENGTH,
    PUMP_WAIST,
    LENGTH,
    WALKOFF,
    NONCOLLINEAR,
    ALPHA,
    FILTER,
    FOCAL,
    SIGNAL,
    SAMPLES,
    HALF_WIDTH,
    GAMMA,
];

/// Grid settings as written in a configuration file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSettings {
    pub samples: usize,
    /// Momentum half-width in rad/µm; `None` selects the decay rule.
    pub half_width: Option<f64>,
}

/// Contents of a configuration file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    pub source: BiphotonConfig,
    pub grid: GridSettings,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut values: BTreeMap<&'static str, String> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigSyntax {
                line: line_no,
                message: format!("expected `key = value`, got `{line}`"),
            })?;
            let key = key.trim();
            let value = value.trim();
            let known = KEYS.iter().find(|k| **k == key).ok_or_else(|| Error::UnknownKey {
                line: line_no,
                key: key.to_string(),
            })?;
            if value.is_empty() {
                return Err(Error::ConfigSyntax {
                    line: line_no,
                    message: format!("key `{key}` has no value"),
                });
            }
            if values.insert(known, value.to_string()).is_some() {
                return Err(Error::DuplicateKey {
                    line: line_no,
                    key: key.to_string(),
                });
            }
        }

        let float = |key: &'static str| -> Result<Option<f64>> {
            values
                .get(key)
                .map(|v| {
                    v.parse::<f64>().map_err(|_| Error::BadValue {
                        key: key.to_string(),
                        value: v.clone(),
                    })
                })
                .transpose()
        };
        let required = |key: &'static str| -> Result<f64> { float(key)?.ok_or(Error::MissingKey(key)) };

        let pump = PumpBeam::new(required(PUMP_WAVELENGTH)?, required(PUMP_WAIST)?)?;
        let geom = CrystalGeometry::new(required(LENGTH)?, required(WALKOFF)?, required(NONCOLLINEAR)?, required(ALPHA)?)?;
        let optics = CollectionOptics::new(required(FILTER)?, required(FOCAL)?, float(SIGNAL)?)?;
        let constants = ModelConstants::new(float(GAMMA)?.unwrap_or(DEFAULT_GAMMA))?;

        let samples_text = values.get(SAMPLES).ok_or(Error::MissingKey(SAMPLES))?;
        let samples = samples_text.parse::<usize>().map_err(|_| Error::BadValue {
            key: SAMPLES.to_string(),
            value: samples_text.clone(),
        })?;
        let half_width = float(HALF_WIDTH)?;
        // validates parity and the half-width
        crate::grid::MomentumGrid::new(half_width.unwrap_or(1.0), samples)?;

        Ok(Self {
            source: BiphotonConfig {
                pump,
                geom,
                optics,
                constants,
            },
            grid: GridSettings { samples, half_width },
        })
    }

    pub fn to_config_string(&self) -> String {
        let s = &self.source;
        let mut out = String::new();
        let mut put = |key: &str, value: String| {
            let _ = writeln!(out, "{key} = {value}");
        };
        put(PUMP_WAVELENGTH, s.pump.wavelength_nm().to_string());
        put(PUMP_WAIST, s.pump.waist_um().to_string());
        put(LENGTH, s.geom.length_mm().to_string());
        put(WALKOFF, s.geom.walkoff_deg().to_string());
        put(NONCOLLINEAR, s.geom.noncollinear_deg().to_string());
        put(ALPHA, s.geom.alpha_deg().to_string());
        put(FILTER, s.optics.filter_waist_um().to_string());
        put(FOCAL, s.optics.focal_mm().to_string());
        if let Some(nm) = s.optics.signal_nm() {
            put(SIGNAL, nm.to_string());
        }
        put(SAMPLES, self.grid.samples.to_string());
        if let Some(h) = self.grid.half_width {
            put(HALF_WIDTH, h.to_string());
        }
        put(GAMMA, s.constants.gamma.to_string());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const REFERENCE: &str = "\
# reference source
pump.wavelength_nm = 405
pump.waist_um = 136   # at the input face
crystal.length_mm = 5
crystal.walkoff_deg = 4.9
crystal.noncollinear_deg = 4
crystal.alpha_deg = 0

collection.ws_um = 0
collection.focal_mm = 500
grid.samples = 65
";

    #[test]
    fn parses_reference() {
        let cfg = RunConfig::parse(REFERENCE).unwrap();
        assert_eq!(cfg.source, BiphotonConfig::reference());
        assert_eq!(cfg.grid, GridSettings { samples: 65, half_width: None });
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::parse(&format!("{REFERENCE}crystal.colour = blue\n")).unwrap_err();
        assert!(err.to_string().contains("crystal.colour"));
        assert!(matches!(err, Error::UnknownKey { line: 12, .. }));
    }

    #[test]
    fn missing_key_is_named() {
        let text = REFERENCE.replace("crystal.walkoff_deg = 4.9\n", "");
        let err = RunConfig::parse(&text).unwrap_err();
        assert!(matches!(err, Error::MissingKey("crystal.walkoff_deg")));
        assert!(err.to_string().contains("crystal.walkoff_deg"));
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(
            RunConfig::parse(&format!("{REFERENCE}grid.samples = 33\n")),
            Err(Error::DuplicateKey { .. })
        ));
        assert!(matches!(RunConfig::parse("pump.waist_um 136"), Err(Error::ConfigSyntax { line: 1, .. })));
        assert!(matches!(
            RunConfig::parse(&REFERENCE.replace("= 136", "= wide")),
            Err(Error::BadValue { .. })
        ));
        assert!(matches!(
            RunConfig::parse(&REFERENCE.replace("grid.samples = 65", "grid.samples = 64")),
            Err(Error::EvenSamples(64))
        ));
        assert!(RunConfig::parse(&REFERENCE.replace("= 136", "= -136")).is_err());
    }

    #[test]
    fn optional_keys() {
        let text = format!("{REFERENCE}collection.signal_nm = 800\ngrid.halfwidth_radperum = 0.05\nmodel.gamma = 0.5\n");
        let cfg = RunConfig::parse(&text).unwrap();
        assert_eq!(cfg.source.signal_wavelength(), 0.8);
        assert_eq!(cfg.grid.half_width, Some(0.05));
        assert_eq!(cfg.source.constants.gamma, 0.5);
    }

    fn arb_config() -> impl Strategy<Value = RunConfig> {
        (
            (1.0f64..2000.0, 1.0f64..2000.0, 0.001f64..50.0),
            (0.0f64..89.9, 0.0f64..89.9, -720.0f64..720.0),
            (0.0f64..500.0, 1.0f64..5000.0, proptest::option::of(100.0f64..3000.0)),
            (1usize..100, proptest::option::of(1e-4f64..1.0), 0.1f64..2.0),
        )
            .prop_map(|((lp, w0, l), (rho, phi, alpha), (ws, f, sig), (half, hw, gamma))| RunConfig {
                source: BiphotonConfig {
                    pump: PumpBeam::new(lp, w0).unwrap(),
                    geom: CrystalGeometry::new(l, rho, phi, alpha).unwrap(),
                    optics: CollectionOptics::new(ws, f, sig).unwrap(),
                    constants: ModelConstants::new(gamma).unwrap(),
                },
                grid: GridSettings {
                    samples: 2 * half + 1,
                    half_width: hw,
                },
            })
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(cfg in arb_config()) {
            let text = cfg.to_config_string();
            let back = RunConfig::parse(&text).unwrap();
            prop_assert_eq!(back, cfg);
            prop_assert_eq!(back.to_config_string(), text);
        }
    }
}
