//! Schmidt decomposition of the spatial two-photon state.
//!
//! Φ(p, q) is sampled on a square momentum grid and flattened into a
//! matrix indexed by (p, q). Quadrature weights enter symmetrically, √w on
//! each side, so the singular values approximate the Schmidt coefficients
//! of the continuous state.

use faer::Mat;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{kernel_half_width, wavevector_to_detector_mm, MomentumGrid};
use crate::mode::{Image, ModeFunction, Wavevector};
use crate::params::BiphotonConfig;
use crate::sweep::SweepParam;

/// Samples per axis for kernel sweeps.
pub const DEFAULT_KERNEL_SAMPLES: usize = 33;

/// Largest samples-per-axis accepted unless a caller raises the cap.
pub const DEFAULT_KERNEL_CAP: usize = 33;

/// Schmidt weights below this are dropped after normalization.
pub const LAMBDA_FLOOR: f64 = 1e-12;

/// Largest grid accepted by the brute-force purity oracle.
pub const ORACLE_MAX_SAMPLES: usize = 17;

/// The kernel √w_p Φ(p, q) √w_q. Rows and columns are flattened as
/// `ix * n + iy` over (x, y) of p and q respectively.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub grid: MomentumGrid,
    pub matrix: Mat<Complex64>,
    /// Two-dimensional trapezoid weight of each flattened grid point.
    pub point_weights: Vec<f64>,
}

fn point_weights(grid: &MomentumGrid) -> Vec<f64> {
    let w = grid.weights();
    let n = grid.samples();
    (0..n * n).map(|k| w[k / n] * w[k % n]).collect()
}

fn grid_points(grid: &MomentumGrid) -> Vec<Wavevector> {
    let axis = grid.axis();
    let n = grid.samples();
    (0..n * n).map(|k| Wavevector::new(axis[k / n], axis[k % n])).collect()
}

impl KernelMatrix {
    /// Assemble √w_p f(p, q) √w_q, rows in parallel.
    pub fn from_fn<F>(grid: &MomentumGrid, cap: usize, f: F) -> Result<Self>
    where
        F: Fn(Wavevector, Wavevector) -> Complex64 + Sync,
    {
        if grid.samples() > cap {
            return Err(Error::KernelTooLarge {
                samples: grid.samples(),
                cap,
            });
        }
        let points = grid_points(grid);
        let weights = point_weights(grid);
        let sqrt_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
        let rows: Vec<Vec<Complex64>> = points
            .par_iter()
            .zip(sqrt_w.par_iter())
            .map(|(&p, &wp)| {
                points
                    .iter()
                    .zip(&sqrt_w)
                    .map(|(&q, &wq)| f(p, q) * (wp * wq))
                    .collect()
            })
            .collect();
        let size = points.len();
        let matrix = Mat::from_fn(size, size, |i, j| rows[i][j]);
        Ok(Self {
            grid: *grid,
            matrix,
            point_weights: weights,
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Σ|K|², the quadrature of |Φ|², accumulated column by column.
    pub fn power(&self) -> f64 {
        let n = self.dim();
        let mut total = 0.0;
        for j in 0..n {
            for i in 0..n {
                total += self.matrix[(i, j)].norm_sqr();
            }
        }
        total
    }

    pub fn normalize(&mut self) {
        let scale = 1.0 / self.power().sqrt();
        let n = self.dim();
        for j in 0..n {
            for i in 0..n {
                self.matrix[(i, j)] *= scale;
            }
        }
    }

    /// Unweighted Φ value at flattened indices.
    pub fn amplitude(&self, p: usize, q: usize) -> Complex64 {
        self.matrix[(p, q)] / (self.point_weights[p] * self.point_weights[q]).sqrt()
    }
}

pub fn build_kernel(cfg: &BiphotonConfig, grid: &MomentumGrid) -> Result<KernelMatrix> {
    build_kernel_with_cap(cfg, grid, DEFAULT_KERNEL_CAP)
}

pub fn build_kernel_with_cap(cfg: &BiphotonConfig, grid: &MomentumGrid, cap: usize) -> Result<KernelMatrix> {
    let mf = ModeFunction::new(cfg);
    KernelMatrix::from_fn(grid, cap, |p, q| mf.amplitude(p, q))
}

/// Singular values of the kernel, descending.
pub fn singular_values(kernel: &KernelMatrix) -> Result<Vec<f64>> {
    kernel.matrix.singular_values().map_err(|e| Error::Svd(format!("{e:?}")))
}

/// Number of leading modes written by the inspection dump.
pub const MODE_DUMP_COUNT: usize = 16;

/// Signal-side Schmidt mode u_n(p) on the kernel grid, `ix * n + iy`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtMode {
    pub lambda: f64,
    pub amplitudes: Vec<Complex64>,
}

impl SchmidtMode {
    /// |u_n|² on the detector plane, scaled to unit peak.
    pub fn intensity_image(&self, grid: &MomentumGrid, cfg: &BiphotonConfig) -> Image {
        let n = grid.samples();
        let axis: Vec<f64> = grid.axis().iter().map(|&k| wavevector_to_detector_mm(k, cfg)).collect();
        let mut data = vec![0.0; n * n];
        for ix in 0..n {
            for iy in 0..n {
                data[iy * n + ix] = self.amplitudes[ix * n + iy].norm_sqr();
            }
        }
        let peak = data.iter().cloned().fold(0.0, f64::max);
        if peak > 0.0 {
            for v in &mut data {
                *v /= peak;
            }
        }
        Image {
            x: axis.clone(),
            y: axis,
            data,
        }
    }
}

/// The `count` leading signal modes, with the quadrature weight removed.
pub fn schmidt_modes(kernel: &KernelMatrix, count: usize) -> Result<Vec<SchmidtMode>> {
    let svd = kernel.matrix.thin_svd().map_err(|e| Error::Svd(format!("{e:?}")))?;
    let sigma: Vec<f64> = svd.S().column_vector().iter().map(|z| z.re).collect();
    let total: f64 = sigma.iter().map(|s| s * s).sum();
    let u = svd.U();
    Ok((0..count.min(sigma.len()))
        .map(|m| SchmidtMode {
            lambda: sigma[m] * sigma[m] / total,
            amplitudes: (0..u.nrows())
                .map(|i| u[(i, m)] / kernel.point_weights[i].sqrt())
                .collect(),
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum {
    /// Schmidt weights λ_n, descending, summing to 1.
    pub lambdas: Vec<f64>,
    /// K = 1 / Σ λ_n².
    pub schmidt_number: f64,
}

impl SchmidtSpectrum {
    pub fn from_singular_values(sigma: &[f64]) -> Result<Self> {
        let total: f64 = sigma.iter().map(|s| s * s).sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::Svd(format!("degenerate singular values (Σσ² = {total})")));
        }
        let kept: Vec<f64> = sigma
            .iter()
            .map(|s| s * s / total)
            .filter(|&l| l >= LAMBDA_FLOOR)
            .collect();
        let kept_total: f64 = kept.iter().sum();
        let lambdas: Vec<f64> = kept.iter().map(|l| l / kept_total).collect();
        let purity: f64 = lambdas.iter().map(|l| l * l).sum();
        Ok(Self {
            lambdas,
            schmidt_number: 1.0 / purity,
        })
    }

    /// Tr ρ_s² = Σ λ_n².
    pub fn purity(&self) -> f64 {
        1.0 / self.schmidt_number
    }
}

pub fn schmidt_spectrum(kernel: &KernelMatrix) -> Result<SchmidtSpectrum> {
    SchmidtSpectrum::from_singular_values(&singular_values(kernel)?)
}

pub fn schmidt_number(cfg: &BiphotonConfig, grid: &MomentumGrid, cap: usize) -> Result<f64> {
    Ok(schmidt_spectrum(&build_kernel_with_cap(cfg, grid, cap)?)?.schmidt_number)
}

/// Tr(ρ²) with ρ = A A† / Tr(A A†), by explicit summation.
pub fn direct_purity(a: &Mat<Complex64>) -> f64 {
    let (rows, cols) = (a.nrows(), a.ncols());
    let mut dense = vec![Complex64::new(0.0, 0.0); rows * cols];
    for i in 0..rows {
        for j in 0..cols {
            dense[i * cols + j] = a[(i, j)];
        }
    }
    let mut trace = 0.0;
    let mut trace_sq = 0.0;
    for p in 0..rows {
        let row_p = &dense[p * cols..(p + 1) * cols];
        for pp in 0..rows {
            let row_pp = &dense[pp * cols..(pp + 1) * cols];
            let mut rho = Complex64::new(0.0, 0.0);
            for (x, y) in row_p.iter().zip(row_pp) {
                rho += x * y.conj();
            }
            trace_sq += rho.norm_sqr();
            if p == pp {
                trace += rho.re;
            }
        }
    }
    trace_sq / (trace * trace)
}

/// Tr ρ_s² by brute-force quadrature of Σ_{p,p'} |Σ_q Φ(p,q)Φ*(p',q)|²,
/// evaluated straight from the mode function on a small grid.
pub fn purity_oracle(cfg: &BiphotonConfig, grid: &MomentumGrid) -> Result<f64> {
    if grid.samples() > ORACLE_MAX_SAMPLES {
        return Err(Error::KernelTooLarge {
            samples: grid.samples(),
            cap: ORACLE_MAX_SAMPLES,
        });
    }
    let mf = ModeFunction::new(cfg);
    let points = grid_points(grid);
    let w = point_weights(grid);
    let n = points.len();
    let mut phi = vec![Complex64::new(0.0, 0.0); n * n];
    for (i, &p) in points.iter().enumerate() {
        for (j, &q) in points.iter().enumerate() {
            phi[i * n + j] = mf.amplitude(p, q);
        }
    }
    // ρ_s(p, p') = Σ_q w_q Φ(p,q) Φ*(p',q); Tr ρ = Σ_p w_p ρ(p,p),
    // Tr ρ² = Σ_{p,p'} w_p w_p' |ρ(p,p')|²
    let mut trace = 0.0;
    let mut trace_sq = 0.0;
    for p in 0..n {
        for pp in 0..n {
            let mut rho = Complex64::new(0.0, 0.0);
            for q in 0..n {
                rho += phi[p * n + q] * phi[pp * n + q].conj() * w[q];
            }
            trace_sq += w[p] * w[pp] * rho.norm_sqr();
            if p == pp {
                trace += w[p] * rho.re;
            }
        }
    }
    Ok(trace_sq / (trace * trace))
}

/// How a driver picks the momentum grid of each kernel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelGrid {
    /// Per-point decay-rule extent with this many samples per axis.
    /// Points whose kernel never decays (w_s = 0) borrow the widest
    /// finite extent of the batch.
    Auto { samples: usize },
    /// One grid for every point.
    Fixed(MomentumGrid),
}

impl Default for KernelGrid {
    fn default() -> Self {
        KernelGrid::Auto {
            samples: DEFAULT_KERNEL_SAMPLES,
        }
    }
}

/// Grids for a batch of configurations; each must satisfy `extent_of`'s
/// decay rule unless it has no finite extent.
pub fn resolve_grids<F>(cfgs: &[BiphotonConfig], choice: KernelGrid, extent_of: F) -> Result<Vec<MomentumGrid>>
where
    F: Fn(&BiphotonConfig) -> Result<f64>,
{
    match choice {
        KernelGrid::Fixed(grid) => Ok(vec![grid; cfgs.len()]),
        KernelGrid::Auto { samples } => {
            let extents: Vec<Option<f64>> = cfgs
                .iter()
                .map(|c| match extent_of(c) {
                    Ok(h) => Ok(Some(h)),
                    Err(Error::NoDecayExtent(_)) => Ok(None),
                    Err(e) => Err(e),
                })
                .collect::<Result<_>>()?;
            let widest = extents.iter().flatten().cloned().fold(None, |acc: Option<f64>, h| {
                Some(acc.map_or(h, |a| a.max(h)))
            });
            extents
                .iter()
                .map(|h| match h.or(widest) {
                    Some(h) => MomentumGrid::new(h, samples),
                    None => Err(Error::NoDecayExtent(
                        "no point of the batch has a finite kernel extent (all w_s = 0); \
                         set grid.halfwidth_radperum explicitly"
                            .into(),
                    )),
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchmidtPoint {
    pub param: f64,
    pub schmidt_number: f64,
}

/// K at each value of `param`, in input order.
pub fn schmidt_sweep(
    template: &BiphotonConfig,
    param: SweepParam,
    values: &[f64],
    grid: KernelGrid,
    cap: usize,
) -> Result<Vec<SchmidtPoint>> {
    let cfgs: Vec<BiphotonConfig> = values.iter().map(|&v| param.apply(template, v)).collect::<Result<_>>()?;
    let grids = resolve_grids(&cfgs, grid, kernel_half_width)?;
    cfgs.par_iter()
        .zip(grids.par_iter())
        .zip(values.par_iter())
        .map(|((cfg, g), &v)| {
            Ok(SchmidtPoint {
                param: v,
                schmidt_number: schmidt_number(cfg, g, cap)?,
            })
        })
        .collect()
}
