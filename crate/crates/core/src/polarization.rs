//! Polarization entanglement from two orthogonal type-I crystals.
//!
//! Crystal 1 emits H-polarized pairs seen at α = 0 which then cross the
//! second crystal and pick up the walk-off phase
//! exp(i p_y tan ρ_s L + i q_y tan ρ_i L); crystal 2 emits V-polarized pairs
//! at α = 90°. Tracing out the spatial variables leaves
//!
//! ρ_p = ½ (|HH⟩⟨HH| + |VV⟩⟨VV| + ξ |HH⟩⟨VV| + ξ* |VV⟩⟨HH|),
//! ξ = ∫ dp dq Φ₁(p, q) Φ₂*(p, q),
//!
//! with purity (1 + |ξ|²)/2 and concurrence |ξ|.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{kernel_half_width, MomentumGrid};
use crate::mode::{ModeFunction, Wavevector};
use crate::params::BiphotonConfig;
use crate::schmidt::{resolve_grids, schmidt_spectrum, KernelGrid, KernelMatrix};
use crate::sweep::SweepParam;

/// Slack allowed on |ξ| ≤ 1 before a value is rejected.
pub const OVERLAP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoCrystalConfig {
    /// Shared source parameters; the azimuth is ignored and replaced by
    /// 0° and 90° for the two crystals.
    pub base: BiphotonConfig,
    walkoff_signal_deg: f64,
    walkoff_idler_deg: f64,
}

impl TwoCrystalConfig {
    /// Down-converted walk-off angles default to the pump walk-off ρ₀.
    pub fn new(base: BiphotonConfig) -> Self {
        let rho = base.geom.walkoff_deg();
        Self {
            base,
            walkoff_signal_deg: rho,
            walkoff_idler_deg: rho,
        }
    }

    pub fn with_walkoffs_deg(mut self, signal_deg: f64, idler_deg: f64) -> Result<Self> {
        for (name, v) in [("rho_s", signal_deg), ("rho_i", idler_deg)] {
            if !(v.is_finite() && (0.0..90.0).contains(&v)) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must lie in [0, 90) degrees, got {v}"),
                });
            }
        }
        self.walkoff_signal_deg = signal_deg;
        self.walkoff_idler_deg = idler_deg;
        Ok(self)
    }

    /// Same second-crystal walk-offs on a different source.
    pub fn with_base(self, base: BiphotonConfig) -> Self {
        Self { base, ..self }
    }

    pub fn walkoff_signal_deg(&self) -> f64 {
        self.walkoff_signal_deg
    }

    pub fn walkoff_idler_deg(&self) -> f64 {
        self.walkoff_idler_deg
    }

    pub fn first_crystal(&self) -> BiphotonConfig {
        self.base.with_alpha_deg(0.0).expect("0° is a valid azimuth")
    }

    pub fn second_crystal(&self) -> BiphotonConfig {
        self.base.with_alpha_deg(90.0).expect("90° is a valid azimuth")
    }

    /// Kernel half-width covering both crystals' mode functions.
    pub fn kernel_half_width(&self) -> Result<f64> {
        Ok(kernel_half_width(&self.first_crystal())?.max(kernel_half_width(&self.second_crystal())?))
    }

    /// Phase slopes (tan ρ_s L, tan ρ_i L) in µm.
    fn walkoff_phase_slopes(&self) -> (f64, f64) {
        let length = self.base.geom.length();
        (
            self.walkoff_signal_deg.to_radians().tan() * length,
            self.walkoff_idler_deg.to_radians().tan() * length,
        )
    }
}

/// Φ(α = 0) with and without the walk-off phase picked up in crystal 2.
pub fn first_crystal_kernel(cfg: &TwoCrystalConfig, grid: &MomentumGrid, cap: usize, with_walkoff: bool) -> Result<KernelMatrix> {
    let mf = ModeFunction::new(&cfg.first_crystal());
    let (a, b) = if with_walkoff { cfg.walkoff_phase_slopes() } else { (0.0, 0.0) };
    let mut k = KernelMatrix::from_fn(grid, cap, |p: Wavevector, q: Wavevector| {
        mf.amplitude(p, q) * Complex64::from_polar(1.0, a * p.y + b * q.y)
    })?;
    k.normalize();
    Ok(k)
}

pub fn second_crystal_kernel(cfg: &TwoCrystalConfig, grid: &MomentumGrid, cap: usize) -> Result<KernelMatrix> {
    let mf = ModeFunction::new(&cfg.second_crystal());
    let mut k = KernelMatrix::from_fn(grid, cap, |p, q| mf.amplitude(p, q))?;
    k.normalize();
    Ok(k)
}

/// (Φ₁, Φ₂), each normalized to unit power on the shared grid.
pub fn crystal_modes(cfg: &TwoCrystalConfig, grid: &MomentumGrid, cap: usize) -> Result<(KernelMatrix, KernelMatrix)> {
    Ok((first_crystal_kernel(cfg, grid, cap, true)?, second_crystal_kernel(cfg, grid, cap)?))
}

/// ξ = Σ Φ₁ Φ₂* under the shared quadrature, accumulated column by column.
pub fn overlap_xi(first: &KernelMatrix, second: &KernelMatrix) -> Result<Complex64> {
    if first.grid != second.grid || first.dim() != second.dim() {
        return Err(Error::GridMismatch);
    }
    let n = first.dim();
    let mut xi = Complex64::new(0.0, 0.0);
    for j in 0..n {
        for i in 0..n {
            xi += first.matrix[(i, j)] * second.matrix[(i, j)].conj();
        }
    }
    Ok(xi)
}

/// Polarization density matrix in the basis {HH, HV, VH, VV}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationState {
    pub xi: Complex64,
    pub purity: f64,
    pub concurrence: f64,
    pub rho: [[Complex64; 4]; 4],
}

impl PolarizationState {
    /// Eigenvalues of ρ_p, descending: ((1+|ξ|)/2, (1-|ξ|)/2, 0, 0).
    pub fn eigenvalues(&self) -> [f64; 4] {
        let c = self.concurrence;
        [0.5 * (1.0 + c), 0.5 * (1.0 - c), 0.0, 0.0]
    }
}

pub fn polarization_state(xi: Complex64) -> Result<PolarizationState> {
    let magnitude = xi.norm();
    if !(magnitude <= 1.0 + OVERLAP_TOLERANCE) {
        return Err(Error::OverlapOutOfRange(magnitude));
    }
    let xi = if magnitude > 1.0 { xi / magnitude } else { xi };
    let concurrence = xi.norm();
    let zero = Complex64::new(0.0, 0.0);
    let half = Complex64::new(0.5, 0.0);
    let mut rho = [[zero; 4]; 4];
    rho[0][0] = half;
    rho[3][3] = half;
    rho[0][3] = 0.5 * xi;
    rho[3][0] = 0.5 * xi.conj();
    Ok(PolarizationState {
        xi,
        purity: 0.5 * (1.0 + concurrence * concurrence),
        concurrence,
        rho,
    })
}

pub fn two_crystal_state(cfg: &TwoCrystalConfig, grid: &MomentumGrid, cap: usize) -> Result<PolarizationState> {
    let (first, second) = crystal_modes(cfg, grid, cap)?;
    polarization_state(overlap_xi(&first, &second)?)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConcurrencePoint {
    pub param: f64,
    pub xi: Complex64,
    pub xi_abs: f64,
    pub purity: f64,
    pub concurrence: f64,
}

/// Concurrence along a sweep of a shared source parameter. The walk-off
/// angles ρ_s, ρ_i stay fixed; sweeping ρ₀ moves only the pump walk-off.
pub fn concurrence_sweep(
    template: &TwoCrystalConfig,
    param: SweepParam,
    values: &[f64],
    grid: KernelGrid,
    cap: usize,
) -> Result<Vec<ConcurrencePoint>> {
    if param == SweepParam::Alpha {
        return Err(Error::InvalidParameter {
            name: "sweep",
            reason: "the two crystals sit at fixed azimuths 0° and 90°".into(),
        });
    }
    let cfgs: Vec<TwoCrystalConfig> = values
        .iter()
        .map(|&v| {
            Ok(TwoCrystalConfig {
                base: param.apply(&template.base, v)?,
                ..*template
            })
        })
        .collect::<Result<_>>()?;
    let bases: Vec<BiphotonConfig> = cfgs.iter().map(|c| c.base).collect();
    let grids = resolve_grids(&bases, grid, |b| {
        TwoCrystalConfig { base: *b, ..*template }.kernel_half_width()
    })?;
    cfgs.par_iter()
        .zip(grids.par_iter())
        .zip(values.par_iter())
        .map(|((c, g), &v)| {
            let state = two_crystal_state(c, g, cap)?;
            Ok(ConcurrencePoint {
                param: v,
                xi: state.xi,
                xi_abs: state.xi.norm(),
                purity: state.purity,
                concurrence: state.concurrence,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalCheck {
    /// K of Φ(α = 0).
    pub without_walkoff: f64,
    /// K of Φ(α = 0) after the second crystal's walk-off phase.
    pub with_walkoff: f64,
    /// |overlap| between the two kernels.
    pub overlap: f64,
}

/// Spatial entanglement of the H photons before and after crossing the
/// second crystal.
pub fn marginal_schmidt_check(cfg: &TwoCrystalConfig, grid: &MomentumGrid, cap: usize) -> Result<MarginalCheck> {
    let before = first_crystal_kernel(cfg, grid, cap, false)?;
    let after = first_crystal_kernel(cfg, grid, cap, true)?;
    Ok(MarginalCheck {
        without_walkoff: schmidt_spectrum(&before)?.schmidt_number,
        with_walkoff: schmidt_spectrum(&after)?.schmidt_number,
        overlap: overlap_xi(&after, &before)?.norm(),
    })
}
