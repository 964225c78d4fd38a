use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;
use walkoff_core::grid::kernel_half_width;
use walkoff_core::oam::{oam_alpha_sweep, PolarGrid};
use walkoff_core::output;
use walkoff_core::polarization::{concurrence_sweep, polarization_state};
use walkoff_core::schmidt::{
    build_kernel_with_cap, resolve_grids, schmidt_modes, schmidt_sweep, DEFAULT_KERNEL_SAMPLES, MODE_DUMP_COUNT,
};
use walkoff_core::selftest::run_selftest;
use walkoff_core::{
    coincidence_image, BiphotonConfig, DetectorPlaneGrid, Image, KernelGrid, MomentumGrid, RunConfig, SweepParam,
    SweepRange, TwoCrystalConfig,
};

use crate::manifest::RunManifest;
use crate::{CommonArgs, SweepArgs};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] walkoff_core::Error),

    #[error("cannot read config {path}: {source}")]
    ConfigRead { path: String, source: io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: String, source: io::Error },

    #[error("{0}")]
    Usage(String),

    #[error("{failed} of {total} self-test checks failed")]
    SelfTest { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) if e.is_config_error() => 2,
            CliError::ConfigRead { .. } | CliError::Usage(_) => 2,
            CliError::Core(_) | CliError::Write { .. } | CliError::SelfTest { .. } => 3,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn load(common: &CommonArgs) -> Result<RunConfig> {
    let text = fs::read_to_string(&common.config).map_err(|source| CliError::ConfigRead {
        path: common.config.display().to_string(),
        source,
    })?;
    let mut rc = RunConfig::parse(&text)?;
    if let Some(w0) = common.w0 {
        rc.source = rc.source.with_waist_um(w0)?;
    }
    if let Some(ws) = common.ws {
        rc.source = rc.source.with_filter_waist_um(ws)?;
    }
    if let Some(l) = common.length_mm {
        rc.source = rc.source.with_length_mm(l)?;
    }
    Ok(rc)
}

/// Collects outputs of one run and writes the snapshot and manifest.
struct Run {
    subcommand: &'static str,
    prefix: String,
    started: Instant,
    outputs: Vec<String>,
    grids: Vec<String>,
}

impl Run {
    fn start(subcommand: &'static str, common: &CommonArgs) -> Result<Self> {
        let prefix = common.out.clone().unwrap_or_else(|| subcommand.to_string());
        if let Some(parent) = Path::new(&prefix).parent() {
            if !parent.as_os_str().is_empty() {
                fs::create_dir_all(parent).map_err(|source| CliError::Write {
                    path: parent.display().to_string(),
                    source,
                })?;
            }
        }
        Ok(Self {
            subcommand,
            prefix,
            started: Instant::now(),
            outputs: Vec::new(),
            grids: Vec::new(),
        })
    }

    fn path(&self, suffix: &str) -> String {
        format!("{}{suffix}", self.prefix)
    }

    fn write<F>(&mut self, suffix: &str, body: F) -> Result<()>
    where
        F: FnOnce(&mut BufWriter<File>) -> io::Result<()>,
    {
        let path = self.path(suffix);
        let io_err = |source| CliError::Write {
            path: path.clone(),
            source,
        };
        let mut w = BufWriter::new(File::create(&path).map_err(io_err)?);
        body(&mut w).map_err(io_err)?;
        w.flush().map_err(io_err)?;
        self.outputs.push(path);
        Ok(())
    }

    fn finish(mut self, snapshot: &RunConfig) -> Result<()> {
        let text = snapshot.to_config_string();
        self.write(".config", |w| w.write_all(text.as_bytes()))?;
        let config_snapshot = self.outputs.pop().expect("snapshot just written");
        let manifest = RunManifest {
            subcommand: self.subcommand,
            command_line: std::env::args().collect(),
            config_snapshot,
            outputs: self.outputs,
            grids: self.grids,
            wall_clock: self.started.elapsed(),
        };
        let path = format!("{}.manifest", self.prefix);
        manifest
            .write(Path::new(&path))
            .map_err(|source| CliError::Write { path, source })
    }
}

fn detector_description(det: &DetectorPlaneGrid, mgrid: &MomentumGrid) -> String {
    format!(
        "detector {n}x{n}, half-width {} mm ({} rad/um)",
        det.half_width_mm(),
        mgrid.half_width(),
        n = det.samples()
    )
}

fn write_image(run: &mut Run, img: &Image) -> Result<()> {
    run.write(".pgm", |w| output::write_pgm(img, w))?;
    run.write(".csv", |w| output::write_image_csv(img, w))
}

pub fn image(common: &CommonArgs, alpha: Option<f64>) -> Result<()> {
    let mut rc = load(common)?;
    let mut run = Run::start("image", common)?;
    if let Some(a) = alpha {
        rc.source = rc.source.with_alpha_deg(a)?;
    }
    rc.grid.samples = common.grid_samples.unwrap_or(rc.grid.samples);
    let mgrid = match rc.grid.half_width {
        Some(h) => MomentumGrid::new(h, rc.grid.samples)?,
        None => MomentumGrid::auto_signal(&rc.source, rc.grid.samples)?,
    };
    let det = DetectorPlaneGrid::from_momentum(&mgrid, &rc.source)?;
    let img = coincidence_image(&rc.source, &det)?;

    run.grids.push(detector_description(&det, &mgrid));
    write_image(&mut run, &img)?;
    run.finish(&rc)
}

pub fn movie(common: &CommonArgs, start: f64, stop: f64, step: f64) -> Result<()> {
    let mut rc = load(common)?;
    let mut run = Run::start("movie", common)?;
    rc.grid.samples = common.grid_samples.unwrap_or(rc.grid.samples);
    let alphas = SweepRange::new(start, stop, step)?.values();
    let frames_cfg: Vec<BiphotonConfig> = alphas
        .iter()
        .map(|&a| rc.source.with_alpha_deg(a))
        .collect::<walkoff_core::Result<_>>()?;
    // one detector grid for every frame
    let half_width = match rc.grid.half_width {
        Some(h) => h,
        None => frames_cfg
            .iter()
            .map(walkoff_core::grid::signal_half_width)
            .collect::<walkoff_core::Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max),
    };
    let mgrid = MomentumGrid::new(half_width, rc.grid.samples)?;
    let det = DetectorPlaneGrid::from_momentum(&mgrid, &rc.source)?;
    let frames: Vec<Image> = frames_cfg
        .par_iter()
        .map(|c| coincidence_image(c, &det))
        .collect::<walkoff_core::Result<_>>()?;

    run.grids.push(detector_description(&det, &mgrid));
    let digits = (frames.len().saturating_sub(1)).to_string().len().max(3);
    for (k, (img, a)) in frames.iter().zip(&alphas).enumerate() {
        run.write(&format!("_{k:0digits$}.pgm"), |w| output::write_pgm(img, w))?;
        run.grids.push(format!("frame {k:0digits$}: alpha {a} deg"));
    }
    run.finish(&rc)
}

fn sweep_values(sweep: &SweepArgs, param: SweepParam, cfg: &BiphotonConfig) -> Vec<f64> {
    match sweep.range {
        Some(r) => r.values(),
        None => vec![param.current(cfg)],
    }
}

pub fn oam(common: &CommonArgs, sweep: &SweepArgs, m_max: usize) -> Result<()> {
    let rc = load(common)?;
    let mut run = Run::start("oam", common)?;
    if let Some(p) = sweep.sweep.filter(|p| *p != SweepParam::Alpha) {
        return Err(CliError::Usage(format!("oam sweeps only alpha, got `{p}`")));
    }
    let alphas = sweep_values(sweep, SweepParam::Alpha, &rc.source);
    let rows = oam_alpha_sweep(&rc.source, &alphas, m_max)?;

    for &a in &alphas {
        let g = PolarGrid::auto(&rc.source.with_alpha_deg(a)?, m_max)?;
        run.grids.push(format!(
            "alpha {a} deg: polar {} radial x {} angular, radius {} rad/um, |m| <= {m_max}",
            g.radial_samples, g.angular_samples, g.radial_max
        ));
    }
    run.write(".csv", |w| output::write_oam_csv(&rows, w))?;
    run.finish(&rc)
}

fn kernel_choice(rc: &RunConfig, common: &CommonArgs) -> Result<KernelGrid> {
    let samples = common.grid_samples.unwrap_or(DEFAULT_KERNEL_SAMPLES);
    Ok(match rc.grid.half_width {
        Some(h) => KernelGrid::Fixed(MomentumGrid::new(h, samples)?),
        None => KernelGrid::Auto { samples },
    })
}

fn kernel_descriptions(param: SweepParam, values: &[f64], grids: &[MomentumGrid]) -> Vec<String> {
    values
        .iter()
        .zip(grids)
        .map(|(v, g)| {
            format!(
                "{param} {v}: kernel {n}x{n} per side, half-width {} rad/um",
                g.half_width(),
                n = g.samples()
            )
        })
        .collect()
}

pub fn schmidt(common: &CommonArgs, sweep: &SweepArgs, cap: usize, modes: bool) -> Result<()> {
    let rc = load(common)?;
    let mut run = Run::start("schmidt", common)?;
    let param = sweep.sweep.unwrap_or(SweepParam::Alpha);
    let values = sweep_values(sweep, param, &rc.source);
    let choice = kernel_choice(&rc, common)?;
    let cfgs: Vec<BiphotonConfig> = values
        .iter()
        .map(|&v| param.apply(&rc.source, v))
        .collect::<walkoff_core::Result<_>>()?;
    let grids = resolve_grids(&cfgs, choice, kernel_half_width)?;
    let points = schmidt_sweep(&rc.source, param, &values, choice, cap)?;

    run.grids = kernel_descriptions(param, &values, &grids);
    run.write(".csv", |w| output::write_schmidt_csv(&points, w))?;
    if modes {
        for (k, (cfg, g)) in cfgs.iter().zip(&grids).enumerate() {
            let kernel = build_kernel_with_cap(cfg, g, cap)?;
            for (n, mode) in schmidt_modes(&kernel, MODE_DUMP_COUNT)?.iter().enumerate() {
                let img = mode.intensity_image(g, cfg);
                run.write(&format!("_p{k:03}_mode{n:02}.pgm"), |w| output::write_pgm(&img, w))?;
                run.grids.push(format!("point {k:03} mode {n:02}: lambda {}", output::fmt_f64(mode.lambda)));
            }
        }
    }
    run.finish(&rc)
}

pub fn concurrence(
    common: &CommonArgs,
    sweep: &SweepArgs,
    rho_s_deg: Option<f64>,
    rho_i_deg: Option<f64>,
    cap: usize,
) -> Result<()> {
    let rc = load(common)?;
    let mut run = Run::start("concurrence", common)?;
    let rho0 = rc.source.geom.walkoff_deg();
    let two = TwoCrystalConfig::new(rc.source).with_walkoffs_deg(rho_s_deg.unwrap_or(rho0), rho_i_deg.unwrap_or(rho0))?;
    let param = sweep.sweep.unwrap_or(SweepParam::PumpWaist);
    let values = sweep_values(sweep, param, &rc.source);
    let choice = kernel_choice(&rc, common)?;
    let points = concurrence_sweep(&two, param, &values, choice, cap)?;
    let bases: Vec<BiphotonConfig> = values
        .iter()
        .map(|&v| param.apply(&rc.source, v))
        .collect::<walkoff_core::Result<_>>()?;
    let grids = resolve_grids(&bases, choice, |b| two.with_base(*b).kernel_half_width())?;
    let states = points
        .iter()
        .map(|p| polarization_state(p.xi))
        .collect::<walkoff_core::Result<Vec<_>>>()?;

    run.grids = kernel_descriptions(param, &values, &grids);
    run.grids.push(format!(
        "rho_s {} deg, rho_i {} deg",
        two.walkoff_signal_deg(),
        two.walkoff_idler_deg()
    ));
    run.write(".csv", |w| output::write_concurrence_csv(&points, w))?;
    run.write("_rho.txt", |w| {
        for (p, s) in points.iter().zip(&states) {
            writeln!(w, "# {param} = {}", p.param)?;
            output::write_density_matrix(s, &mut *w)?;
        }
        Ok(())
    })?;
    run.finish(&rc)
}

pub fn selftest() -> Result<()> {
    let results = run_selftest();
    let failed = results.iter().filter(|r| !r.passed).count();
    for r in &results {
        println!("{} {}: {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    if failed > 0 {
        return Err(CliError::SelfTest {
            failed,
            total: results.len(),
        });
    }
    Ok(())
}
