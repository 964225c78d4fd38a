//! Fast closed-form checks shipped with the binary.

use num_complex::Complex64;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::grid::{DetectorPlaneGrid, MomentumGrid};
use crate::mode::{coincidence_image, delta_k, ellipticity, mode_orientation_beta, signal_mode, ModeFunction, Wavevector};
use crate::oam::spiral_spectrum;
use crate::params::BiphotonConfig;
use crate::polarization::{overlap_xi, crystal_modes, polarization_state, TwoCrystalConfig};
use crate::schmidt::{schmidt_number, DEFAULT_KERNEL_CAP};
use crate::sweep::SweepRange;

#[derive(Debug, Clone, PartialEq)]
pub struct SelfCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Check = fn() -> Result<(bool, String)>;

const CHECKS: &[(&str, Check)] = &[
    ("grid_axis_symmetry", grid_axis),
    ("grid_rejects_even_samples", grid_parity),
    ("delta_k_vanishes_at_origin", delta_k_origin),
    ("delta_k_alpha_free_without_walkoff", delta_k_no_walkoff),
    ("amplitude_is_one_at_origin", amplitude_origin),
    ("filter_factor_unity_without_filter", filter_unity),
    ("isotropic_signal_mode_is_gaussian", isotropic_mode),
    ("image_normalized_to_unit_peak", image_normalized),
    ("images_alpha_free_without_walkoff", images_alpha_free),
    ("beta_vanishes_for_large_walkoff", beta_limit),
    ("isotropic_image_is_round", round_image),
    ("isotropic_spectrum_is_pure_m0", isotropic_oam),
    ("spectrum_alpha_free_without_walkoff", oam_alpha_free),
    ("separable_kernel_has_k_one", separable_kernel),
    ("schmidt_number_alpha_free_without_walkoff", schmidt_alpha_free),
    ("identical_crystals_give_unit_overlap", identical_crystals),
    ("polarization_limits", polarization_limits),
    ("full_turn_has_25_frames", frame_count),
    ("missing_key_is_named", missing_key),
];

pub fn run_selftest() -> Vec<SelfCheck> {
    CHECKS
        .iter()
        .map(|(name, check)| match check() {
            Ok((passed, detail)) => SelfCheck { name, passed, detail },
            Err(e) => SelfCheck {
                name,
                passed: false,
                detail: format!("error: {e}"),
            },
        })
        .collect()
}

fn isotropic() -> BiphotonConfig {
    BiphotonConfig::reference()
        .with_walkoff_deg(0.0)
        .and_then(|c| c.with_noncollinear_deg(0.0))
        .expect("valid angles")
}

fn no_walkoff() -> BiphotonConfig {
    BiphotonConfig::reference().with_walkoff_deg(0.0).expect("valid angle")
}

fn grid_axis() -> Result<(bool, String)> {
    let a = MomentumGrid::new(1.0, 3)?.axis();
    let b = MomentumGrid::new(2.0, 5)?.axis();
    Ok((a == [-1.0, 0.0, 1.0] && b == [-2.0, -1.0, 0.0, 1.0, 2.0], format!("{a:?} {b:?}")))
}

fn grid_parity() -> Result<(bool, String)> {
    let r = MomentumGrid::new(1.0, 4);
    Ok((matches!(r, Err(Error::EvenSamples(4))), format!("{r:?}")))
}

fn delta_k_origin() -> Result<(bool, String)> {
    let d = delta_k(Wavevector::ZERO, Wavevector::ZERO, &BiphotonConfig::reference().geom);
    Ok((d == 0.0, format!("{d}")))
}

fn delta_k_no_walkoff() -> Result<(bool, String)> {
    let base = no_walkoff();
    let (p, q) = (Wavevector::new(0.013, -0.021), Wavevector::new(-0.007, 0.017));
    let expected = -(p.y - q.y) * base.geom.noncollinear().sin();
    let mut worst = 0.0f64;
    for alpha in [0.0, 37.0, 90.0, 180.0, 270.0] {
        let d = delta_k(p, q, &base.with_alpha_deg(alpha)?.geom);
        worst = worst.max((d - expected).abs());
    }
    Ok((worst <= 1e-15, format!("max deviation {worst:e}")))
}

fn amplitude_origin() -> Result<(bool, String)> {
    let a = ModeFunction::new(&BiphotonConfig::reference()).amplitude(Wavevector::ZERO, Wavevector::ZERO);
    Ok((a == Complex64::new(1.0, 0.0), format!("{a}")))
}

fn filter_unity() -> Result<(bool, String)> {
    let mf = ModeFunction::new(&BiphotonConfig::reference());
    let f = mf.filter_factor(Wavevector::new(0.3, -0.2), Wavevector::new(-0.1, 0.4));
    Ok((f == 1.0, format!("{f}")))
}

fn isotropic_mode() -> Result<(bool, String)> {
    let cfg = isotropic().with_filter_waist_um(40.0)?;
    let grid = MomentumGrid::auto_signal(&cfg, 33)?;
    let mode = signal_mode(&cfg, &grid);
    let (w0, ws) = (cfg.pump.waist(), cfg.optics.filter_waist());
    let axis = grid.axis();
    let c = grid.centre();
    let peak = mode.at(c, c).norm();
    let mut worst = 0.0f64;
    for ix in 0..axis.len() {
        for iy in 0..axis.len() {
            let r2 = axis[ix] * axis[ix] + axis[iy] * axis[iy];
            let expected = peak * (-r2 * (w0 * w0 + ws * ws) / 4.0).exp();
            worst = worst.max((mode.at(ix, iy).norm() - expected).abs() / peak);
        }
    }
    Ok((worst <= 1e-12, format!("max relative deviation {worst:e}")))
}

fn image_normalized() -> Result<(bool, String)> {
    let cfg = BiphotonConfig::reference();
    let det = DetectorPlaneGrid::from_momentum(&MomentumGrid::auto_signal(&cfg, 33)?, &cfg)?;
    let img = coincidence_image(&cfg, &det)?;
    let min = img.data.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((min >= 0.0 && img.max() == 1.0, format!("min {min:e}, peak {}", img.max())))
}

fn images_alpha_free() -> Result<(bool, String)> {
    let base = no_walkoff();
    let det = DetectorPlaneGrid::from_momentum(&MomentumGrid::auto_signal(&base, 33)?, &base)?;
    let reference = coincidence_image(&base, &det)?;
    let mut worst = 0.0f64;
    for alpha in [45.0, 90.0, 180.0, 270.0] {
        let img = coincidence_image(&base.with_alpha_deg(alpha)?, &det)?;
        for (a, b) in img.data.iter().zip(&reference.data) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok((worst <= 1e-10, format!("max pixel difference {worst:e}")))
}

fn beta_limit() -> Result<(bool, String)> {
    let geom = BiphotonConfig::reference().with_walkoff_deg(89.99)?.geom;
    let o = mode_orientation_beta(&geom);
    Ok((!o.degenerate && o.beta.abs() < 1e-4, format!("beta {} rad", o.beta)))
}

fn round_image() -> Result<(bool, String)> {
    let cfg = isotropic();
    let det = DetectorPlaneGrid::from_momentum(&MomentumGrid::auto_signal(&cfg, 65)?, &cfg)?;
    let e = ellipticity(&coincidence_image(&cfg, &det)?)?;
    Ok(((e.ratio - 1.0).abs() <= 1e-6, format!("ratio {}", e.ratio)))
}

fn isotropic_oam() -> Result<(bool, String)> {
    let s = spiral_spectrum(&isotropic(), 10)?;
    let c0 = s.weight(0).unwrap_or(0.0);
    let others: f64 = s.m_values.iter().zip(&s.weights).filter(|(m, _)| **m != 0).map(|(_, w)| w).sum();
    Ok(((c0 - 1.0).abs() <= 1e-9 && others <= 1e-12, format!("C_0 {c0}, rest {others:e}")))
}

fn oam_alpha_free() -> Result<(bool, String)> {
    let base = no_walkoff();
    let reference = spiral_spectrum(&base, 10)?;
    let mut worst = 0.0f64;
    for alpha in [90.0, 180.0, 270.0] {
        let s = spiral_spectrum(&base.with_alpha_deg(alpha)?, 10)?;
        for (a, b) in s.weights.iter().zip(&reference.weights) {
            worst = worst.max((a - b).abs());
        }
    }
    Ok((worst <= 1e-10, format!("max weight difference {worst:e}")))
}

fn separable_kernel() -> Result<(bool, String)> {
    let cfg = BiphotonConfig::reference()
        .with_length_mm(1e-9)?
        .with_waist_um(1e-3)?
        .with_filter_waist_um(50.0)?;
    let grid = MomentumGrid::auto_kernel(&cfg, 9)?;
    let k = schmidt_number(&cfg, &grid, DEFAULT_KERNEL_CAP)?;
    Ok(((k - 1.0).abs() <= 1e-6, format!("K {k}")))
}

fn schmidt_alpha_free() -> Result<(bool, String)> {
    let base = no_walkoff().with_filter_waist_um(50.0)?.with_waist_um(100.0)?;
    let grid = MomentumGrid::auto_kernel(&base, 11)?;
    let k0 = schmidt_number(&base, &grid, DEFAULT_KERNEL_CAP)?;
    let k90 = schmidt_number(&base.with_alpha_deg(90.0)?, &grid, DEFAULT_KERNEL_CAP)?;
    let k270 = schmidt_number(&base.with_alpha_deg(270.0)?, &grid, DEFAULT_KERNEL_CAP)?;
    let spread = (k90 - k0).abs().max((k270 - k0).abs());
    Ok((spread <= 1e-9 * k0, format!("K {k0}, spread {spread:e}")))
}

fn identical_crystals() -> Result<(bool, String)> {
    let two = TwoCrystalConfig::new(no_walkoff().with_filter_waist_um(50.0)?).with_walkoffs_deg(0.0, 0.0)?;
    let grid = MomentumGrid::new(two.kernel_half_width()?, 11)?;
    let (a, b) = crystal_modes(&two, &grid, DEFAULT_KERNEL_CAP)?;
    let xi = overlap_xi(&a, &b)?;
    Ok(((xi - 1.0).norm() <= 1e-12, format!("xi {xi}")))
}

fn polarization_limits() -> Result<(bool, String)> {
    let one = polarization_state(Complex64::new(1.0, 0.0))?;
    let zero = polarization_state(Complex64::new(0.0, 0.0))?;
    let ok = (one.purity - 1.0).abs() <= 1e-15
        && (one.concurrence - 1.0).abs() <= 1e-15
        && (zero.purity - 0.5).abs() <= 1e-15
        && zero.concurrence == 0.0;
    Ok((
        ok,
        format!(
            "xi=1: P {} C {}; xi=0: P {} C {}",
            one.purity, one.concurrence, zero.purity, zero.concurrence
        ),
    ))
}

fn frame_count() -> Result<(bool, String)> {
    let n = SweepRange::new(0.0, 360.0, 15.0)?.len();
    Ok((n == 25, format!("{n} frames")))
}

fn missing_key() -> Result<(bool, String)> {
    let text = RunConfig {
        source: BiphotonConfig::reference(),
        grid: crate::config::GridSettings {
            samples: 65,
            half_width: None,
        },
    }
    .to_config_string()
    .replace("crystal.walkoff_deg", "# crystal.walkoff_deg");
    match RunConfig::parse(&text) {
        Err(e) => {
            let msg = e.to_string();
            Ok((msg.contains("crystal.walkoff_deg"), msg))
        }
        Ok(_) => Ok((false, "config accepted".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        let results = run_selftest();
        assert_eq!(results.len(), CHECKS.len());
        for r in &results {
            assert!(r.passed, "{}: {}", r.name, r.detail);
        }
    }
}
