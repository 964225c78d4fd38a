//! Sampling of transverse wavevector space and of the detection plane.

use crate::error::{Error, Result};
use crate::params::BiphotonConfig;

/// Amplitude decay, as an exponent, required at the edge of an automatic
/// grid: the slowest Gaussian direction falls to e^-8 of its peak.
pub const DECAY_EXPONENT: f64 = 8.0;

/// Samples per axis for signal-mode and image grids.
pub const DEFAULT_SAMPLES: usize = 65;

fn check_samples(samples: usize) -> Result<()> {
    if samples % 2 == 0 {
        return Err(Error::EvenSamples(samples));
    }
    if samples < 3 {
        return Err(Error::InvalidParameter {
            name: "grid.samples",
            reason: format!("need at least 3 samples per axis, got {samples}"),
        });
    }
    Ok(())
}

fn check_half_width(name: &'static str, half_width: f64) -> Result<()> {
    if half_width.is_finite() && half_width > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite and > 0, got {half_width}"),
        })
    }
}

/// Uniform axis on [-h, h] with an exact zero in the middle and exact
/// mirror symmetry.
fn symmetric_axis(half_width: f64, samples: usize) -> Vec<f64> {
    let centre = (samples / 2) as i64;
    (0..samples as i64)
        .map(|i| half_width * ((i - centre) as f64 / centre as f64))
        .collect()
}

/// One-dimensional trapezoid weights on a uniform axis.
pub fn trapezoid_weights(samples: usize, spacing: f64) -> Vec<f64> {
    let mut w = vec![spacing; samples];
    if samples > 1 {
        w[0] = 0.5 * spacing;
        w[samples - 1] = 0.5 * spacing;
    }
    w
}

/// Square grid of transverse wavevectors, shared by both axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumGrid {
    half_width: f64,
    samples: usize,
}

impl MomentumGrid {
    /// `half_width` in rad/µm.
    pub fn new(half_width: f64, samples: usize) -> Result<Self> {
        check_samples(samples)?;
        check_half_width("grid.halfwidth_radperum", half_width)?;
        Ok(Self { half_width, samples })
    }

    /// Grid wide enough for the heralded signal mode Φ(p, 0).
    pub fn auto_signal(cfg: &BiphotonConfig, samples: usize) -> Result<Self> {
        Self::new(signal_half_width(cfg)?, samples)
    }

    /// Grid wide enough for the full kernel Φ(p, q).
    pub fn auto_kernel(cfg: &BiphotonConfig, samples: usize) -> Result<Self> {
        Self::new(kernel_half_width(cfg)?, samples)
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn spacing(&self) -> f64 {
        self.half_width / (self.samples / 2) as f64
    }

    pub fn axis(&self) -> Vec<f64> {
        symmetric_axis(self.half_width, self.samples)
    }

    pub fn weights(&self) -> Vec<f64> {
        trapezoid_weights(self.samples, self.spacing())
    }

    /// Index of the q = 0 sample.
    pub fn centre(&self) -> usize {
        self.samples / 2
    }

    pub fn with_samples(&self, samples: usize) -> Result<Self> {
        Self::new(self.half_width, samples)
    }
}

/// Standalone axis constructor used by the CLI and tests.
pub fn momentum_axis(grid: &MomentumGrid) -> Vec<f64> {
    grid.axis()
}

/// Square grid in the detector plane behind the 2-f system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorPlaneGrid {
    half_width_mm: f64,
    samples: usize,
}

impl DetectorPlaneGrid {
    pub fn new(half_width_mm: f64, samples: usize) -> Result<Self> {
        check_samples(samples)?;
        check_half_width("detector half-width", half_width_mm)?;
        Ok(Self { half_width_mm, samples })
    }

    /// Detector grid that images exactly the given momentum grid.
    pub fn from_momentum(grid: &MomentumGrid, cfg: &BiphotonConfig) -> Result<Self> {
        Self::new(wavevector_to_detector_mm(grid.half_width(), cfg), grid.samples())
    }

    pub fn half_width_mm(&self) -> f64 {
        self.half_width_mm
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    /// Detector coordinates in mm.
    pub fn axis_mm(&self) -> Vec<f64> {
        symmetric_axis(self.half_width_mm, self.samples)
    }
}

/// Detector position (mm) reached by a transverse wavevector (rad/µm)
/// through the 2-f system: x = k λ_s f / 2π.
pub fn wavevector_to_detector_mm(k: f64, cfg: &BiphotonConfig) -> f64 {
    k * cfg.signal_wavelength() * cfg.optics.focal_length() / (2.0 * std::f64::consts::PI) * 1e-3
}

/// Transverse wavevector (rad/µm) seen at detector position x (mm):
/// k = 2π x / (λ_s f).
pub fn detector_mm_to_wavevector(x_mm: f64, cfg: &BiphotonConfig) -> f64 {
    2.0 * std::f64::consts::PI * (x_mm * 1e3) / (cfg.signal_wavelength() * cfg.optics.focal_length())
}

/// Real quadratic form M of the amplitude exponent, |Φ| = exp(-xᵀ M x)
/// with x = (p_x, p_y, q_x, q_y).
pub fn decay_form(cfg: &BiphotonConfig) -> [[f64; 4]; 4] {
    let tan_rho = cfg.geom.walkoff().tan();
    let phi = cfg.geom.noncollinear();
    let alpha = cfg.geom.alpha();
    let gl = cfg.constants.gamma * cfg.geom.length();
    let w0 = cfg.pump.waist();
    let ws = cfg.optics.filter_waist();

    let gx = tan_rho * alpha.cos();
    let gy = tan_rho * phi.cos() * alpha.sin();
    let g = [gx, gy - phi.sin(), gx, gy + phi.sin()];
    let sum_x = [1.0, 0.0, 1.0, 0.0];
    let sum_y = [0.0, 1.0, 0.0, 1.0];
    let pm = 0.25 * gl * gl;
    let px = 0.25 * w0 * w0;
    let py = px * phi.cos().powi(2);
    let filt = 0.25 * ws * ws;

    let mut m = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = pm * g[i] * g[j] + px * sum_x[i] * sum_x[j] + py * sum_y[i] * sum_y[j];
        }
        m[i][i] += filt;
    }
    m
}

/// Signal-only block of [`decay_form`] (q fixed at zero).
pub fn signal_decay_form(cfg: &BiphotonConfig) -> [[f64; 2]; 2] {
    let m = decay_form(cfg);
    [[m[0][0], m[0][1]], [m[1][0], m[1][1]]]
}

/// Diagonal of M⁻¹ by Cholesky; `None` when M is not positive definite.
fn inverse_diagonal<const D: usize>(m: &[[f64; D]; D]) -> Option<[f64; D]> {
    let scale = (0..D).map(|i| m[i][i].abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return None;
    }
    let mut l = [[0.0; D]; D];
    for j in 0..D {
        let mut d = m[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        if d <= 1e-12 * scale {
            return None;
        }
        l[j][j] = d.sqrt();
        for i in j + 1..D {
            let mut s = m[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / l[j][j];
        }
    }
    let mut diag = [0.0; D];
    for (c, out) in diag.iter_mut().enumerate() {
        // solve L y = e_c, then Lᵀ x = y; (M⁻¹)_cc = x_c
        let mut y = [0.0; D];
        for i in 0..D {
            let mut s = if i == c { 1.0 } else { 0.0 };
            for k in 0..i {
                s -= l[i][k] * y[k];
            }
            y[i] = s / l[i][i];
        }
        let mut x = [0.0; D];
        for i in (0..D).rev() {
            let mut s = y[i];
            for k in i + 1..D {
                s -= l[k][i] * x[k];
            }
            x[i] = s / l[i][i];
        }
        *out = x[c];
    }
    Some(diag)
}

/// Smallest half-width h such that on every face of the box [-h, h]^D the
/// amplitude exp(-xᵀMx) stays below exp(-DECAY_EXPONENT).
///
/// On the face x_i = h the maximum of exp(-xᵀMx) is exp(-h²/(M⁻¹)_ii).
pub fn decay_half_width<const D: usize>(m: &[[f64; D]; D]) -> Option<f64> {
    let diag = inverse_diagonal(m)?;
    let worst = diag.iter().cloned().fold(0.0, f64::max);
    Some((DECAY_EXPONENT * worst).sqrt())
}

pub fn signal_half_width(cfg: &BiphotonConfig) -> Result<f64> {
    decay_half_width(&signal_decay_form(cfg))
        .ok_or_else(|| Error::NoDecayExtent("signal mode does not decay in every direction".into()))
}

/// Fails when w_s = 0: the kernel is then constant along p_x - q_x and
/// has no finite decay extent.
pub fn kernel_half_width(cfg: &BiphotonConfig) -> Result<f64> {
    decay_half_width(&decay_form(cfg)).ok_or_else(|| {
        Error::NoDecayExtent(
            "two-photon kernel is not normalizable without collection filtering (w_s = 0); \
             set grid.halfwidth_radperum explicitly"
                .into(),
        )
    })
}

/// Radius beyond which the signal mode is below exp(-DECAY_EXPONENT) in
/// every direction.
pub fn signal_decay_radius(cfg: &BiphotonConfig) -> Result<f64> {
    let [[a, b], [_, d]] = signal_decay_form(cfg);
    let mean = 0.5 * (a + d);
    let dev = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let smallest = mean - dev;
    if smallest <= 1e-12 * mean.abs() {
        return Err(Error::NoDecayExtent("signal mode does not decay in every direction".into()));
    }
    Ok((DECAY_EXPONENT / smallest).sqrt())
}
