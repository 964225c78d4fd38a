//! Spiral-harmonic (orbital angular momentum) content of the heralded
//! signal mode.
//!
//! Φ_s(ρ, θ) = (2π)^(-1/2) Σ_m a_m(ρ) e^{imθ},
//! a_m(ρ) = (2π)^(-1/2) ∫ dθ Φ_s(ρ, θ) e^{-imθ},
//! C_m = ∫ ρ dρ |a_m(ρ)|².

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::signal_decay_radius;
use crate::mode::{ModeFunction, Wavevector};
use crate::params::BiphotonConfig;

/// Harmonic window |m| ≤ M used when none is requested.
pub const DEFAULT_M_MAX: usize = 20;

/// Out-of-window mass above which a decomposition is rejected.
pub const MAX_TRUNCATION: f64 = 1e-3;

pub const DEFAULT_RADIAL_SAMPLES: usize = 1601;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarGrid {
    pub radial_samples: usize,
    /// Outer radius in rad/µm.
    pub radial_max: f64,
    pub angular_samples: usize,
}

impl PolarGrid {
    /// Minimum angular sampling for harmonics up to `m_max`.
    pub fn required_angular_samples(m_max: usize) -> usize {
        8 * (m_max + 1)
    }

    /// Disk out to the e^-8 decay radius of the signal mode.
    pub fn auto(cfg: &BiphotonConfig, m_max: usize) -> Result<Self> {
        Ok(Self {
            radial_samples: DEFAULT_RADIAL_SAMPLES,
            radial_max: signal_decay_radius(cfg)?,
            angular_samples: Self::required_angular_samples(m_max).max(128),
        })
    }

    pub fn radii(&self) -> Vec<f64> {
        let last = (self.radial_samples - 1) as f64;
        (0..self.radial_samples)
            .map(|k| self.radial_max * (k as f64 / last))
            .collect()
    }

    /// ∫ ρ f(ρ) dρ with f interpolated linearly on each interval and the
    /// ρ factor integrated exactly.
    pub fn radial_weights(&self) -> Vec<f64> {
        let r = self.radii();
        let mut w = vec![0.0; r.len()];
        for k in 0..r.len() - 1 {
            let (a, b) = (r[k], r[k + 1]);
            let h = b - a;
            w[k] += h / 6.0 * (2.0 * a + b);
            w[k + 1] += h / 6.0 * (a + 2.0 * b);
        }
        w
    }

    fn validate(&self, m_max: usize) -> Result<()> {
        let required = Self::required_angular_samples(m_max);
        if self.angular_samples < required {
            return Err(Error::TooFewAngularSamples {
                angular: self.angular_samples,
                m_max,
                required,
            });
        }
        if self.radial_samples < 2 || !(self.radial_max.is_finite() && self.radial_max > 0.0) {
            return Err(Error::InvalidParameter {
                name: "polar grid",
                reason: format!(
                    "need >= 2 radial samples and a positive radius, got {} and {}",
                    self.radial_samples, self.radial_max
                ),
            });
        }
        Ok(())
    }
}

/// a_m(ρ) for m in [-M, M] on the radial axis of a polar grid.
#[derive(Debug, Clone)]
pub struct SpiralCoefficients {
    pub m_max: usize,
    pub grid: PolarGrid,
    /// `coeffs[m + M][k]` = a_m(ρ_k).
    pub coeffs: Vec<Vec<Complex64>>,
    /// (2π/N_θ) Σ_j |Φ_s(ρ_k, θ_j)|², the angular integral of each ring.
    pub ring_power: Vec<f64>,
}

impl SpiralCoefficients {
    pub fn m_values(&self) -> impl Iterator<Item = i64> {
        let m = self.m_max as i64;
        -m..=m
    }

    pub fn coefficient(&self, m: i64, k: usize) -> Complex64 {
        self.coeffs[(m + self.m_max as i64) as usize][k]
    }
}

/// e^{-i 2π j / n} for j in 0..n.
fn roots_of_unity(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / n as f64))
        .collect()
}

/// Angular Fourier coefficient (2π)^(-1/2) (2π/N) Σ_j v_j e^{-imθ_j}.
fn harmonic(values: &[Complex64], m: i64, roots: &[Complex64]) -> Complex64 {
    let n = values.len() as i64;
    let scale = (2.0 * PI).sqrt() / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, v) in values.iter().enumerate() {
        let idx = (m * j as i64).rem_euclid(n) as usize;
        acc += v * roots[idx];
    }
    acc * scale
}

/// Samples Φ_s = Φ(p, 0) directly on the polar grid.
fn sample_rings(cfg: &BiphotonConfig, grid: &PolarGrid) -> Vec<Vec<Complex64>> {
    let mf = ModeFunction::new(cfg);
    let radii = grid.radii();
    let n = grid.angular_samples;
    let dirs: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let t = 2.0 * PI * j as f64 / n as f64;
            (t.cos(), t.sin())
        })
        .collect();
    radii
        .par_iter()
        .map(|&r| {
            dirs.iter()
                .map(|&(c, s)| mf.amplitude(Wavevector::new(r * c, r * s), Wavevector::ZERO))
                .collect()
        })
        .collect()
}

pub fn spiral_coefficients(cfg: &BiphotonConfig, grid: &PolarGrid, m_max: usize) -> Result<SpiralCoefficients> {
    grid.validate(m_max)?;
    let rings = sample_rings(cfg, grid);
    Ok(decompose_rings(&rings, *grid, m_max))
}

fn decompose_rings(rings: &[Vec<Complex64>], grid: PolarGrid, m_max: usize) -> SpiralCoefficients {
    let n = grid.angular_samples;
    let roots = roots_of_unity(n);
    let m = m_max as i64;
    let coeffs = (-m..=m)
        .map(|mm| rings.iter().map(|ring| harmonic(ring, mm, &roots)).collect())
        .collect();
    let ring_power = rings
        .iter()
        .map(|ring| 2.0 * PI / n as f64 * ring.iter().map(|v| v.norm_sqr()).sum::<f64>())
        .collect();
    SpiralCoefficients {
        m_max,
        grid,
        coeffs,
        ring_power,
    }
}

/// OAM weights C_m over [-M, M], normalized to the total signal power.
#[derive(Debug, Clone, PartialEq)]
pub struct SpiralSpectrum {
    pub m_values: Vec<i64>,
    pub weights: Vec<f64>,
    /// Share of the power carried by harmonics outside the window.
    pub truncation_mass: f64,
}

impl SpiralSpectrum {
    pub fn weight(&self, m: i64) -> Option<f64> {
        self.m_values.iter().position(|&v| v == m).map(|i| self.weights[i])
    }

    pub fn m_max(&self) -> usize {
        (self.m_values.len() - 1) / 2
    }
}

/// Weights without the truncation check.
pub fn oam_weights_unchecked(coeffs: &SpiralCoefficients) -> SpiralSpectrum {
    let w = coeffs.grid.radial_weights();
    let total: f64 = w.iter().zip(&coeffs.ring_power).map(|(a, b)| a * b).sum();
    let weights: Vec<f64> = coeffs
        .coeffs
        .iter()
        .map(|am| w.iter().zip(am).map(|(wk, a)| wk * a.norm_sqr()).sum::<f64>() / total)
        .collect();
    let inside: f64 = weights.iter().sum();
    SpiralSpectrum {
        m_values: coeffs.m_values().collect(),
        weights,
        truncation_mass: (1.0 - inside).max(0.0),
    }
}

/// C_m = ∫ ρ dρ |a_m(ρ)|² / total power. Rejects spectra whose
/// out-of-window mass exceeds [`MAX_TRUNCATION`].
pub fn oam_weights(coeffs: &SpiralCoefficients) -> Result<SpiralSpectrum> {
    let spectrum = oam_weights_unchecked(coeffs);
    if spectrum.truncation_mass > MAX_TRUNCATION {
        return Err(Error::Truncation {
            mass: spectrum.truncation_mass,
            m_max: coeffs.m_max,
        });
    }
    Ok(spectrum)
}

/// Spectrum of the configuration at its own α on an automatic polar grid.
pub fn spiral_spectrum(cfg: &BiphotonConfig, m_max: usize) -> Result<SpiralSpectrum> {
    let grid = PolarGrid::auto(cfg, m_max)?;
    oam_weights(&spiral_coefficients(cfg, &grid, m_max)?)
}

/// One spectrum per azimuth (degrees), in input order.
pub fn oam_alpha_sweep(template: &BiphotonConfig, alphas_deg: &[f64], m_max: usize) -> Result<Vec<(f64, SpiralSpectrum)>> {
    alphas_deg
        .par_iter()
        .map(|&a| {
            let cfg = template.with_alpha_deg(a)?;
            Ok((a, spiral_spectrum(&cfg, m_max)?))
        })
        .collect()
}
