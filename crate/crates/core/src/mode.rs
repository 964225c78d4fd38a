//! The two-photon mode function Φ(p, q) and the quantities read off it:
//! heralded signal modes, coincidence images, and the orientation and
//! ellipticity of those images.
//!
//! Φ(p, q) = exp{-(ΓL)²Δk²/4 + iΔk L/2}
//!         · exp{-[(p_x+q_x)² w₀² + (p_y+q_y)² w₀² cos²φ]/4}
//!         · exp{-(|p|² + |q|²) w_s²/4}
//!
//! with Δk = tan ρ₀ [(p_x+q_x) cos α + (p_y+q_y) cos φ sin α] - (p_y-q_y) sin φ.
//! The unnormalized amplitude is 1 at p = q = 0.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{detector_mm_to_wavevector, DetectorPlaneGrid, MomentumGrid};
use crate::params::{BiphotonConfig, CrystalGeometry};

/// Transverse wavevector in rad/µm.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Wavevector {
    pub x: f64,
    pub y: f64,
}

impl Wavevector {
    pub const ZERO: Wavevector = Wavevector { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y
    }
}

#[derive(Debug, Clone, Copy)]
struct PhaseMatching {
    sum_x: f64,
    sum_y: f64,
    diff_y: f64,
}

impl PhaseMatching {
    fn new(geom: &CrystalGeometry) -> Self {
        let tan_rho = geom.walkoff().tan();
        let phi = geom.noncollinear();
        let alpha = geom.alpha();
        Self {
            sum_x: tan_rho * alpha.cos(),
            sum_y: tan_rho * phi.cos() * alpha.sin(),
            diff_y: phi.sin(),
        }
    }

    #[inline]
    fn delta_k(&self, p: Wavevector, q: Wavevector) -> f64 {
        self.sum_x * (p.x + q.x) + self.sum_y * (p.y + q.y) - self.diff_y * (p.y - q.y)
    }
}

/// Phase mismatch Δk (rad/µm) between signal p and idler q.
pub fn delta_k(p: Wavevector, q: Wavevector, geom: &CrystalGeometry) -> f64 {
    PhaseMatching::new(geom).delta_k(p, q)
}

/// Φ(p, q) with every configuration-dependent coefficient precomputed.
#[derive(Debug, Clone, Copy)]
pub struct ModeFunction {
    pm: PhaseMatching,
    pm_width: f64,
    half_length: f64,
    pump_x: f64,
    pump_y: f64,
    filter: f64,
}

impl ModeFunction {
    pub fn new(cfg: &BiphotonConfig) -> Self {
        let gl = cfg.constants.gamma * cfg.geom.length();
        let w0 = cfg.pump.waist();
        let ws = cfg.optics.filter_waist();
        let cos_phi = cfg.geom.noncollinear().cos();
        Self {
            pm: PhaseMatching::new(&cfg.geom),
            pm_width: 0.25 * gl * gl,
            half_length: 0.5 * cfg.geom.length(),
            pump_x: 0.25 * w0 * w0,
            pump_y: 0.25 * w0 * w0 * cos_phi * cos_phi,
            filter: 0.25 * ws * ws,
        }
    }

    #[inline]
    pub fn delta_k(&self, p: Wavevector, q: Wavevector) -> f64 {
        self.pm.delta_k(p, q)
    }

    #[inline]
    fn log_magnitude(&self, p: Wavevector, q: Wavevector, dk: f64) -> f64 {
        let sx = p.x + q.x;
        let sy = p.y + q.y;
        -(self.pm_width * dk * dk
            + self.pump_x * sx * sx
            + self.pump_y * sy * sy
            + self.filter * (p.norm_sqr() + q.norm_sqr()))
    }

    #[inline]
    pub fn amplitude(&self, p: Wavevector, q: Wavevector) -> Complex64 {
        let dk = self.pm.delta_k(p, q);
        Complex64::from_polar(self.log_magnitude(p, q, dk).exp(), dk * self.half_length)
    }

    /// |Φ(p, q)|² without forming the phase.
    #[inline]
    pub fn intensity(&self, p: Wavevector, q: Wavevector) -> f64 {
        let dk = self.pm.delta_k(p, q);
        (2.0 * self.log_magnitude(p, q, dk)).exp()
    }

    /// Phase-matching factor exp{-(ΓL)²Δk²/4 + iΔk L/2}.
    pub fn phase_matching_factor(&self, p: Wavevector, q: Wavevector) -> Complex64 {
        let dk = self.pm.delta_k(p, q);
        Complex64::from_polar((-self.pm_width * dk * dk).exp(), dk * self.half_length)
    }

    /// Gaussian pump factor in p + q.
    pub fn pump_factor(&self, p: Wavevector, q: Wavevector) -> f64 {
        let sx = p.x + q.x;
        let sy = p.y + q.y;
        (-(self.pump_x * sx * sx + self.pump_y * sy * sy)).exp()
    }

    /// Collection-mode filter factor for both photons.
    pub fn filter_factor(&self, p: Wavevector, q: Wavevector) -> f64 {
        (-self.filter * (p.norm_sqr() + q.norm_sqr())).exp()
    }
}

/// Unnormalized Φ(p, q) for a single pair of wavevectors.
pub fn mode_amplitude(p: Wavevector, q: Wavevector, cfg: &BiphotonConfig) -> Complex64 {
    ModeFunction::new(cfg).amplitude(p, q)
}

/// Complex amplitudes sampled on a square momentum grid, stored row-major
/// over (p_x, p_y): index `ix * n + iy`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedMode {
    pub grid: MomentumGrid,
    pub amplitudes: Vec<Complex64>,
    /// Factor applied by [`DiscretizedMode::normalize`]; 1 until then.
    pub norm_constant: f64,
}

impl DiscretizedMode {
    /// Trapezoid quadrature of |amplitude|², accumulated in index order.
    pub fn power(&self) -> f64 {
        let w = self.grid.weights();
        let n = self.grid.samples();
        let mut total = 0.0;
        for ix in 0..n {
            for iy in 0..n {
                total += w[ix] * w[iy] * self.amplitudes[ix * n + iy].norm_sqr();
            }
        }
        total
    }

    pub fn normalize(&mut self) {
        let scale = 1.0 / self.power().sqrt();
        for a in &mut self.amplitudes {
            *a *= scale;
        }
        self.norm_constant *= scale;
    }

    pub fn at(&self, ix: usize, iy: usize) -> Complex64 {
        self.amplitudes[ix * self.grid.samples() + iy]
    }
}

/// Heralded signal mode Φ_s(p) = Φ(p, q = 0), normalized to unit power.
pub fn signal_mode(cfg: &BiphotonConfig, grid: &MomentumGrid) -> DiscretizedMode {
    let mf = ModeFunction::new(cfg);
    let axis = grid.axis();
    let n = grid.samples();
    let amplitudes: Vec<Complex64> = (0..n * n)
        .into_par_iter()
        .map(|k| mf.amplitude(Wavevector::new(axis[k / n], axis[k % n]), Wavevector::ZERO))
        .collect();
    let mut mode = DiscretizedMode {
        grid: *grid,
        amplitudes,
        norm_constant: 1.0,
    };
    mode.normalize();
    mode
}

/// Real image on the detector plane, row-major with rows along y:
/// `data[iy * nx + ix]`, rows in increasing y.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub data: Vec<f64>,
}

impl Image {
    pub fn width(&self) -> usize {
        self.x.len()
    }

    pub fn height(&self) -> usize {
        self.y.len()
    }

    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.data[iy * self.x.len() + ix]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Coincidence rate R_c(x₁, x₂ = 0) = |Φ(2π x₁/(λ_s f), 0)|² on the
/// detector grid, scaled to unit peak. Coordinates are in mm.
pub fn coincidence_image(cfg: &BiphotonConfig, det: &DetectorPlaneGrid) -> Result<Image> {
    let mf = ModeFunction::new(cfg);
    let axis = det.axis_mm();
    let k: Vec<f64> = axis.iter().map(|&x| detector_mm_to_wavevector(x, cfg)).collect();
    let n = det.samples();
    let mut data: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|idx| mf.intensity(Wavevector::new(k[idx % n], k[idx / n]), Wavevector::ZERO))
        .collect();
    let peak = data.iter().cloned().fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::ZeroMass);
    }
    for v in &mut data {
        *v /= peak;
    }
    Ok(Image {
        x: axis.clone(),
        y: axis,
        data,
    })
}

/// Orientation of the perfect-phase-matching locus in the (p_x, p_y) plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orientation {
    /// Angle of the locus measured from the p_y axis towards p_x, in
    /// (-π/2, π/2].
    pub beta: f64,
    /// tan ρ₀ cos α vanishes and β was set to π/2.
    pub degenerate: bool,
}

/// tan β = (sin φ - tan ρ₀ cos φ sin α) / (tan ρ₀ cos α).
///
/// With q = 0 the locus Δk = 0 satisfies p_x / p_y = tan β, so β is the
/// angle from the p_y axis.
pub fn mode_orientation_beta(geom: &CrystalGeometry) -> Orientation {
    let tan_rho = geom.walkoff().tan();
    let phi = geom.noncollinear();
    let alpha = geom.alpha();
    let num = phi.sin() - tan_rho * phi.cos() * alpha.sin();
    let den = tan_rho * alpha.cos();
    if den.abs() <= 1e-12 * (num.abs() + tan_rho.abs()).max(f64::MIN_POSITIVE) {
        return Orientation {
            beta: FRAC_PI_2,
            degenerate: true,
        };
    }
    Orientation {
        beta: wrap_half_turn((num / den).atan()),
        degenerate: false,
    }
}

/// Map an axis angle to (-π/2, π/2].
pub fn wrap_half_turn(angle: f64) -> f64 {
    let mut a = angle.rem_euclid(PI);
    if a > FRAC_PI_2 {
        a -= PI;
    }
    a
}

/// Smallest difference between two axis angles (modulo π).
pub fn axis_angle_difference(a: f64, b: f64) -> f64 {
    wrap_half_turn(a - b).abs()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipticity {
    /// sqrt(λ_max / λ_min) of the intensity second-moment matrix.
    pub ratio: f64,
    /// Major axis angle from the y axis towards x, in (-π/2, π/2]; the same
    /// convention as [`Orientation::beta`].
    pub major_axis_angle: f64,
}

pub fn ellipticity(image: &Image) -> Result<Ellipticity> {
    let (nx, ny) = (image.width(), image.height());
    let mut mass = 0.0;
    let mut mx = 0.0;
    let mut my = 0.0;
    for iy in 0..ny {
        for ix in 0..nx {
            let v = image.data[iy * nx + ix];
            mass += v;
            mx += v * image.x[ix];
            my += v * image.y[iy];
        }
    }
    if !(mass > 0.0) {
        return Err(Error::ZeroMass);
    }
    mx /= mass;
    my /= mass;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for iy in 0..ny {
        let dy = image.y[iy] - my;
        for ix in 0..nx {
            let v = image.data[iy * nx + ix];
            let dx = image.x[ix] - mx;
            sxx += v * dx * dx;
            syy += v * dy * dy;
            sxy += v * dx * dy;
        }
    }
    sxx /= mass;
    syy /= mass;
    sxy /= mass;

    let mean = 0.5 * (sxx + syy);
    let dev = (0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy).sqrt();
    let major = mean + dev;
    let minor = mean - dev;
    // eigenvector of the larger eigenvalue, angle from y towards x
    let angle = 0.5 * (2.0 * sxy).atan2(syy - sxx);
    Ok(Ellipticity {
        ratio: (major / minor).sqrt(),
        major_axis_angle: wrap_half_turn(angle),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{signal_half_width, DEFAULT_SAMPLES};
    use proptest::prelude::*;

    fn reference_at(alpha: f64) -> BiphotonConfig {
        BiphotonConfig::reference().with_alpha_deg(alpha).unwrap()
    }

    #[test]
    fn delta_k_examples() {
        let geom = reference_at(0.0).geom;
        assert_eq!(delta_k(Wavevector::ZERO, Wavevector::ZERO, &geom), 0.0);
        // tan(4.9°) · 0.01
        let dk = delta_k(Wavevector::new(0.01, 0.0), Wavevector::ZERO, &geom);
        assert!((dk - 8.573024177855005e-4).abs() < 1e-15);
    }

    #[test]
    fn delta_k_without_walkoff_ignores_alpha() {
        let p = Wavevector::new(0.013, -0.004);
        let q = Wavevector::new(-0.002, 0.007);
        for alpha in [0.0, 37.0, 90.0, 200.0] {
            let geom = CrystalGeometry::new(5.0, 0.0, 4.0, alpha).unwrap();
            let expected = -(p.y - q.y) * 4f64.to_radians().sin();
            assert!((delta_k(p, q, &geom) - expected).abs() < 1e-18);
        }
    }

    #[test]
    fn amplitude_at_origin_is_one() {
        let a = mode_amplitude(Wavevector::ZERO, Wavevector::ZERO, &reference_at(33.0));
        assert_eq!(a, Complex64::new(1.0, 0.0));
    }

    #[test]
    fn no_filtering_means_unit_filter() {
        let mf = ModeFunction::new(&reference_at(0.0));
        let p = Wavevector::new(0.5, -0.2);
        assert_eq!(mf.filter_factor(p, p), 1.0);
    }

    #[test]
    fn boundary_decay_of_default_grid() {
        for alpha in [0.0, 90.0, 180.0, 270.0] {
            let cfg = reference_at(alpha);
            let grid = MomentumGrid::auto_signal(&cfg, DEFAULT_SAMPLES).unwrap();
            let mf = ModeFunction::new(&cfg);
            let axis = grid.axis();
            let n = axis.len();
            let bound = (-8.0f64).exp() * (1.0 + 1e-9);
            for i in 0..n {
                for &(x, y) in &[(axis[0], axis[i]), (axis[n - 1], axis[i]), (axis[i], axis[0]), (axis[i], axis[n - 1])] {
                    let a = mf.amplitude(Wavevector::new(x, y), Wavevector::ZERO).norm();
                    assert!(a <= bound, "alpha {alpha}: |Φ| = {a} at ({x}, {y})");
                }
            }
        }
    }

    #[test]
    fn isotropic_signal_mode() {
        let cfg = reference_at(0.0)
            .with_walkoff_deg(0.0)
            .unwrap()
            .with_noncollinear_deg(0.0)
            .unwrap()
            .with_filter_waist_um(40.0)
            .unwrap();
        let grid = MomentumGrid::auto_signal(&cfg, 21).unwrap();
        let mode = signal_mode(&cfg, &grid);
        let axis = grid.axis();
        let c = (136.0f64.powi(2) + 40.0f64.powi(2)) / 4.0;
        for ix in 0..21 {
            for iy in 0..21 {
                let r2 = axis[ix].powi(2) + axis[iy].powi(2);
                let expected = mode.norm_constant * (-r2 * c).exp();
                assert!((mode.at(ix, iy).norm() - expected).abs() < 1e-12);
                assert!((mode.at(ix, iy).norm() - mode.at(iy, ix).norm()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn signal_mode_is_normalized() {
        let cfg = reference_at(0.0);
        let grid = MomentumGrid::auto_signal(&cfg, 33).unwrap();
        let mode = signal_mode(&cfg, &grid);
        assert!((mode.power() - 1.0).abs() < 1e-12);
        assert!(mode.norm_constant > 0.0);
    }

    #[test]
    fn orientation_examples() {
        let o = mode_orientation_beta(&reference_at(0.0).geom);
        assert!(!o.degenerate);
        // atan(sin 4° / tan 4.9°)
        assert!((o.beta.to_degrees() - 39.13435503964205).abs() < 1e-10);

        let g = CrystalGeometry::new(5.0, 4.9, 4.9, 90.0).unwrap();
        let o = mode_orientation_beta(&g);
        assert!(o.degenerate);
        assert_eq!(o.beta, FRAC_PI_2);

        let g = CrystalGeometry::new(5.0, 0.0, 4.0, 0.0).unwrap();
        assert!(mode_orientation_beta(&g).degenerate);

        let g = CrystalGeometry::new(5.0, 89.9, 4.0, 0.0).unwrap();
        assert!(mode_orientation_beta(&g).beta.abs() < 1e-3);
    }

    #[test]
    fn isotropic_image_has_unit_ellipticity() {
        let axis: Vec<f64> = (-20..=20).map(|i| i as f64 * 0.1).collect();
        let n = axis.len();
        let mut data = vec![0.0; n * n];
        for iy in 0..n {
            for ix in 0..n {
                data[iy * n + ix] = (-(axis[ix].powi(2) + axis[iy].powi(2)) / 0.5).exp();
            }
        }
        let e = ellipticity(&Image { x: axis.clone(), y: axis, data }).unwrap();
        assert!((e.ratio - 1.0).abs() < 1e-6);
    }

    #[test]
    fn ellipticity_reports_rotated_axis() {
        // Gaussian elongated along a direction 30° from y towards x
        let theta = 30f64.to_radians();
        let (u, v) = (theta.sin(), theta.cos());
        let axis: Vec<f64> = (-90..=90).map(|i| i as f64 * 0.1).collect();
        let n = axis.len();
        let mut data = vec![0.0; n * n];
        for iy in 0..n {
            for ix in 0..n {
                let along = axis[ix] * u + axis[iy] * v;
                let across = axis[ix] * v - axis[iy] * u;
                data[iy * n + ix] = (-(along * along) / 2.0 - across * across / 0.5).exp();
            }
        }
        let e = ellipticity(&Image { x: axis.clone(), y: axis, data }).unwrap();
        assert!((e.ratio - 2.0).abs() < 1e-6);
        assert!(axis_angle_difference(e.major_axis_angle, theta) < 1e-9);
    }

    #[test]
    fn zero_image_is_rejected() {
        let img = Image {
            x: vec![0.0, 1.0],
            y: vec![0.0, 1.0],
            data: vec![0.0; 4],
        };
        assert!(matches!(ellipticity(&img), Err(Error::ZeroMass)));
    }

    #[test]
    fn coincidence_image_contract() {
        let cfg = reference_at(180.0);
        let grid = MomentumGrid::new(signal_half_width(&cfg).unwrap(), 31).unwrap();
        let det = DetectorPlaneGrid::from_momentum(&grid, &cfg).unwrap();
        let img = coincidence_image(&cfg, &det).unwrap();
        assert!(img.data.iter().all(|&v| v >= 0.0));
        assert_eq!(img.max(), 1.0);
        // pixel (ix, iy) sits at the wavevector 2π x/(λ_s f)
        let mf = ModeFunction::new(&cfg);
        let p = Wavevector::new(
            detector_mm_to_wavevector(img.x[3], &cfg),
            detector_mm_to_wavevector(img.y[20], &cfg),
        );
        assert!((img.at(3, 20) - mf.intensity(p, Wavevector::ZERO)).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn alpha_irrelevant_without_walkoff(
            px in -0.05f64..0.05, py in -0.05f64..0.05,
            qx in -0.05f64..0.05, qy in -0.05f64..0.05,
            a1 in 0.0f64..360.0, a2 in 0.0f64..360.0,
        ) {
            let base = BiphotonConfig::reference().with_walkoff_deg(0.0).unwrap();
            let p = Wavevector::new(px, py);
            let q = Wavevector::new(qx, qy);
            let v1 = mode_amplitude(p, q, &base.with_alpha_deg(a1).unwrap());
            let v2 = mode_amplitude(p, q, &base.with_alpha_deg(a2).unwrap());
            prop_assert_eq!(v1, v2);
        }

        #[test]
        fn phase_is_half_delta_k_length(
            px in -0.02f64..0.02, py in -0.02f64..0.02,
            qx in -0.02f64..0.02, qy in -0.02f64..0.02,
            alpha in 0.0f64..360.0,
        ) {
            let cfg = BiphotonConfig::reference().with_alpha_deg(alpha).unwrap();
            let p = Wavevector::new(px, py);
            let q = Wavevector::new(qx, qy);
            let a = mode_amplitude(p, q, &cfg);
            let expected = delta_k(p, q, &cfg.geom) * cfg.geom.length() / 2.0;
            let diff = wrap_half_turn((a.arg() - expected) / 2.0) * 2.0;
            prop_assert!(diff.abs() < 1e-9);
            prop_assert!(a.norm() <= 1.0);
        }

        #[test]
        fn exchange_structure(
            px in -0.02f64..0.02, py in -0.02f64..0.02,
            qx in -0.02f64..0.02, qy in -0.02f64..0.02,
            alpha in 0.0f64..360.0,
        ) {
            // swapping p and q while mirroring p_y - q_y leaves the pump and
            // phase-matching factors unchanged: both only see p+q and p_y-q_y
            let cfg = BiphotonConfig::reference().with_alpha_deg(alpha).unwrap();
            let mf = ModeFunction::new(&cfg);
            let p = Wavevector::new(px, py);
            let q = Wavevector::new(qx, qy);
            let sum_y = py + qy;
            let diff_y = py - qy;
            // (p', q') with the same sums and the same y-difference
            let p2 = Wavevector::new(qx, 0.5 * (sum_y + diff_y));
            let q2 = Wavevector::new(px, 0.5 * (sum_y - diff_y));
            prop_assert!((mf.pump_factor(p, q) - mf.pump_factor(p2, q2)).abs() < 1e-12);
            prop_assert!((mf.phase_matching_factor(p, q) - mf.phase_matching_factor(p2, q2)).norm() < 1e-9);
            // plain exchange flips only the sign of p_y - q_y
            let swapped = ModeFunction::new(&cfg).delta_k(q, p);
            let mirrored = mf.delta_k(p, q) + 2.0 * cfg.geom.noncollinear().sin() * diff_y;
            prop_assert!((swapped - mirrored).abs() < 1e-15);
        }
    }
}
