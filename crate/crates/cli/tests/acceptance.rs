//! Acceptance suite. Every criterion prints one PASS/FAIL line with the
//! measured values; the test fails if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;
use walkoff_core::grid::{kernel_half_width, DEFAULT_SAMPLES};
use walkoff_core::oam::{oam_alpha_sweep, DEFAULT_M_MAX};
use walkoff_core::polarization::overlap_xi;
use walkoff_core::schmidt::{
    build_kernel, build_kernel_with_cap, purity_oracle, schmidt_spectrum, schmidt_sweep, singular_values, KernelMatrix,
    DEFAULT_KERNEL_CAP, DEFAULT_KERNEL_SAMPLES, ORACLE_MAX_SAMPLES,
};
use walkoff_core::{
    coincidence_image, ellipticity, mode_orientation_beta, two_crystal_state, BiphotonConfig, DetectorPlaneGrid,
    KernelGrid, ModeFunction, MomentumGrid, SweepParam, TwoCrystalConfig,
};

struct Report {
    failed: Vec<String>,
}

impl Report {
    fn check(&mut self, id: &str, passed: bool, detail: String) {
        println!("{} [{id}] {detail}", if passed { "PASS" } else { "FAIL" });
        if !passed {
            self.failed.push(id.to_string());
        }
    }
}

fn fixture(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_str()
        .unwrap()
        .to_string()
}

fn image_at(cfg: &BiphotonConfig) -> walkoff_core::Image {
    let grid = MomentumGrid::auto_signal(cfg, DEFAULT_SAMPLES).unwrap();
    coincidence_image(cfg, &DetectorPlaneGrid::from_momentum(&grid, cfg).unwrap()).unwrap()
}

fn shape_suite(r: &mut Report) {
    let base = BiphotonConfig::reference();
    let t = Instant::now();
    let img90 = image_at(&base.with_alpha_deg(90.0).unwrap());
    let per_image = t.elapsed().as_secs_f64();
    let img0 = image_at(&base);
    let e90 = ellipticity(&img90).unwrap();
    let e0 = ellipticity(&img0).unwrap();
    let g = base.geom;
    let expected = (g.noncollinear().sin() / g.walkoff().tan()).atan().to_degrees();
    let measured = e0.major_axis_angle.to_degrees();
    let beta = mode_orientation_beta(&g).beta.to_degrees();
    r.check("1a", e90.ratio < 1.2, format!("ellipticity(alpha=90) = {:.4} < 1.2", e90.ratio));
    r.check("1b", e0.ratio > 2.0, format!("ellipticity(alpha=0) = {:.4} > 2", e0.ratio));
    r.check(
        "1c",
        (measured - expected).abs() <= 2.0,
        format!("major axis at alpha=0 = {measured:.3} deg vs atan(sin phi/tan rho0) = {expected:.3} deg (beta = {beta:.3}), tolerance 2 deg"),
    );
    r.check("1-runtime", per_image < 5.0, format!("65x65 image in {per_image:.3} s < 5 s"));
}

fn symmetry_restoration(r: &mut Report) {
    let base = BiphotonConfig::reference().with_walkoff_deg(0.0).unwrap();
    let alphas: Vec<f64> = (0..12).map(|k| 30.0 * k as f64).collect();

    let grid = MomentumGrid::auto_signal(&base, DEFAULT_SAMPLES).unwrap();
    let det = DetectorPlaneGrid::from_momentum(&grid, &base).unwrap();
    let reference = coincidence_image(&base, &det).unwrap();
    let mut image_dev = 0.0f64;
    for &a in &alphas {
        let img = coincidence_image(&base.with_alpha_deg(a).unwrap(), &det).unwrap();
        for (x, y) in img.data.iter().zip(&reference.data) {
            image_dev = image_dev.max((x - y).abs());
        }
    }
    r.check("2a", image_dev <= 1e-10, format!("rho0=0 images over 12 azimuths: max pixel deviation {image_dev:e} <= 1e-10"));

    let oam_base = base.with_waist_um(100.0).unwrap();
    let rows = oam_alpha_sweep(&oam_base, &alphas, DEFAULT_M_MAX).unwrap();
    let mut oam_dev = 0.0f64;
    for (_, s) in &rows {
        for (x, y) in s.weights.iter().zip(&rows[0].1.weights) {
            oam_dev = oam_dev.max((x - y).abs());
        }
    }
    r.check("2b", oam_dev <= 1e-10, format!("rho0=0 C_m over 12 azimuths: max deviation {oam_dev:e} <= 1e-10"));

    let k_base = oam_base.with_filter_waist_um(50.0).unwrap();
    let t = Instant::now();
    let points = schmidt_sweep(&k_base, SweepParam::Alpha, &alphas, KernelGrid::default(), DEFAULT_KERNEL_CAP).unwrap();
    let elapsed = t.elapsed().as_secs_f64();
    let k0 = points[0].schmidt_number;
    let k_dev = points.iter().map(|p| (p.schmidt_number - k0).abs()).fold(0.0, f64::max);
    r.check("2c", k_dev <= 1e-6, format!("rho0=0 K over 12 azimuths: K = {k0:.6}, max deviation {k_dev:e} <= 1e-6"));
    r.check("2-runtime", elapsed < 60.0, format!("12-point K sweep in {elapsed:.1} s < 60 s"));
}

fn oam_suite(r: &mut Report) {
    let alphas: Vec<f64> = (0..72).map(|k| 5.0 * k as f64).collect();
    let narrow = BiphotonConfig::reference().with_waist_um(100.0).unwrap();
    let wide = narrow.with_waist_um(600.0).unwrap();
    let rows_narrow = oam_alpha_sweep(&narrow, &alphas, DEFAULT_M_MAX).unwrap();
    let rows_wide = oam_alpha_sweep(&wide, &alphas, DEFAULT_M_MAX).unwrap();
    let c0 = |rows: &[(f64, walkoff_core::SpiralSpectrum)]| -> Vec<f64> { rows.iter().map(|(_, s)| s.weight(0).unwrap()).collect() };
    let cn = c0(&rows_narrow);
    let cw = c0(&rows_wide);
    let argmax = (0..cn.len()).max_by(|&a, &b| cn[a].total_cmp(&cn[b])).unwrap();
    let argmin = (0..cn.len()).min_by(|&a, &b| cn[a].total_cmp(&cn[b])).unwrap();
    r.check(
        "3a",
        alphas[argmax] == 90.0 && alphas[argmin] == 270.0,
        format!(
            "w0=100: C_0 max {:.4} at {} deg, min {:.4} at {} deg (want 90 and 270)",
            cn[argmax], alphas[argmax], cn[argmin], alphas[argmin]
        ),
    );
    let spread = |c: &[f64]| c.iter().cloned().fold(f64::MIN, f64::max) - c.iter().cloned().fold(f64::MAX, f64::min);
    let (sn, sw) = (spread(&cn), spread(&cw));
    r.check("3b", sw < sn, format!("C_0 peak-to-peak: w0=600 {sw:.4} < w0=100 {sn:.4}"));
    let closure = rows_narrow
        .iter()
        .chain(&rows_wide)
        .map(|(_, s)| (s.weights.iter().sum::<f64>() + s.truncation_mass - 1.0).abs())
        .fold(0.0, f64::max);
    r.check("3c", closure <= 1e-9, format!("max |sum C_m + truncation - 1| = {closure:e} <= 1e-9"));
}

fn schmidt_suite(r: &mut Report) {
    let base = BiphotonConfig::reference()
        .with_waist_um(100.0)
        .unwrap()
        .with_filter_waist_um(50.0)
        .unwrap();
    let mut all_k = Vec::new();

    let t = Instant::now();
    let cfg0 = base;
    let g0 = MomentumGrid::auto_kernel(&cfg0, DEFAULT_KERNEL_SAMPLES).unwrap();
    let k0 = schmidt_spectrum(&build_kernel(&cfg0, &g0).unwrap()).unwrap().schmidt_number;
    let per_k = t.elapsed().as_secs_f64();
    let cfg90 = base.with_alpha_deg(90.0).unwrap();
    let g90 = MomentumGrid::auto_kernel(&cfg90, DEFAULT_KERNEL_SAMPLES).unwrap();
    let k90 = schmidt_spectrum(&build_kernel(&cfg90, &g90).unwrap()).unwrap().schmidt_number;
    all_k.extend([k0, k90]);
    r.check("4a", k0 > k90, format!("K(0) = {k0:.4} > K(90) = {k90:.4}"));

    let ws = [0.0, 25.0, 50.0, 100.0];
    let pts = schmidt_sweep(&base, SweepParam::FilterWaist, &ws, KernelGrid::default(), DEFAULT_KERNEL_CAP).unwrap();
    let ks: Vec<f64> = pts.iter().map(|p| p.schmidt_number).collect();
    all_k.extend(&ks);
    let monotone = ks.windows(2).all(|w| w[1] <= w[0]);
    r.check("4b", monotone, format!("K over ws = {ws:?} um: {ks:.4?}, non-increasing"));

    let mut oracle_dev = 0.0f64;
    for cfg in [cfg0, cfg90] {
        let g = MomentumGrid::auto_kernel(&cfg, ORACLE_MAX_SAMPLES).unwrap();
        let spectrum = schmidt_spectrum(&build_kernel(&cfg, &g).unwrap()).unwrap();
        all_k.push(spectrum.schmidt_number);
        oracle_dev = oracle_dev.max((spectrum.purity() - purity_oracle(&cfg, &g).unwrap()).abs());
    }
    r.check("4d", oracle_dev <= 1e-6, format!("N=17 SVD purity vs brute-force oracle: max deviation {oracle_dev:e} <= 1e-6"));

    let mut worst = 0.0f64;
    let mut detail = Vec::new();
    for (cfg, g, k) in [(cfg0, g0, k0), (cfg90, g90, k90)] {
        let fine = g.with_samples(49).unwrap();
        let k49 = schmidt_spectrum(&build_kernel_with_cap(&cfg, &fine, 49).unwrap()).unwrap().schmidt_number;
        all_k.push(k49);
        let rel = (k49 - k).abs() / k;
        worst = worst.max(rel);
        detail.push(format!("alpha={}: {k:.4} -> {k49:.4}", cfg.geom.alpha_deg()));
    }
    r.check("4e", worst < 0.01, format!("K under N 33 -> 49 ({}): max relative change {worst:.2e} < 1%", detail.join(", ")));

    let min_k = all_k.iter().cloned().fold(f64::INFINITY, f64::min);
    r.check("4c", min_k >= 1.0, format!("min K over {} evaluations = {min_k:.4} >= 1", all_k.len()));
    r.check("4-runtime", per_k < 60.0, format!("one K at N=33 in {per_k:.2} s < 60 s"));
}

fn two_crystal(length_mm: f64) -> TwoCrystalConfig {
    TwoCrystalConfig::new(
        BiphotonConfig::reference()
            .with_waist_um(100.0)
            .unwrap()
            .with_noncollinear_deg(2.0)
            .unwrap()
            .with_filter_waist_um(50.0)
            .unwrap()
            .with_length_mm(length_mm)
            .unwrap(),
    )
}

fn state(cfg: &TwoCrystalConfig, samples: usize) -> walkoff_core::PolarizationState {
    let g = MomentumGrid::new(cfg.kernel_half_width().unwrap(), samples).unwrap();
    two_crystal_state(cfg, &g, DEFAULT_KERNEL_CAP).unwrap()
}

fn concurrence_suite(r: &mut Report) {
    let thin = state(&two_crystal(0.5), DEFAULT_KERNEL_SAMPLES);
    let thick = state(&two_crystal(5.0), DEFAULT_KERNEL_SAMPLES);
    r.check("5a", thin.concurrence >= 0.99, format!("C(L=0.5 mm) = {:.6} >= 0.99", thin.concurrence));
    r.check(
        "5b",
        thick.concurrence < thin.concurrence,
        format!("C(L=5 mm) = {:.6} < C(L=0.5 mm) = {:.6}", thick.concurrence, thin.concurrence),
    );
    let exact = [thin, thick]
        .iter()
        .all(|s| s.purity == 0.5 * (1.0 + s.concurrence * s.concurrence));
    r.check("5c", exact, format!("P = (1 + C^2)/2 exactly: P = {:.6}, {:.6}", thin.purity, thick.purity));

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0005);
    let mut max_xi = 0.0f64;
    for _ in 0..100 {
        let base = BiphotonConfig::reference()
            .with_waist_um(rng.gen_range(30.0..300.0))
            .unwrap()
            .with_filter_waist_um(rng.gen_range(10.0..150.0))
            .unwrap()
            .with_length_mm(rng.gen_range(0.1..8.0))
            .unwrap()
            .with_walkoff_deg(rng.gen_range(0.0..8.0))
            .unwrap()
            .with_noncollinear_deg(rng.gen_range(0.0..6.0))
            .unwrap();
        let cfg = TwoCrystalConfig::new(base)
            .with_walkoffs_deg(rng.gen_range(0.0..8.0), rng.gen_range(0.0..8.0))
            .unwrap();
        max_xi = max_xi.max(state(&cfg, 11).xi.norm());
    }
    r.check("5d", max_xi <= 1.0, format!("max |xi| over 100 random configs = {max_xi:.15} <= 1"));

    let flat = TwoCrystalConfig::new(two_crystal(5.0).base.with_walkoff_deg(0.0).unwrap())
        .with_walkoffs_deg(0.0, 0.0)
        .unwrap();
    let xi = state(&flat, DEFAULT_KERNEL_SAMPLES).xi.norm();
    r.check("5e", (xi - 1.0).abs() <= 1e-6, format!("rho0 = rho_s = rho_i = 0: |xi| = {xi:.15}, within 1e-6 of 1"));
}

fn phase_invariance(r: &mut Report) {
    let cfg = BiphotonConfig::reference()
        .with_waist_um(100.0)
        .unwrap()
        .with_filter_waist_um(50.0)
        .unwrap();
    let grid = MomentumGrid::new(kernel_half_width(&cfg).unwrap(), 21).unwrap();
    let mf = ModeFunction::new(&cfg);
    let mut plain = KernelMatrix::from_fn(&grid, DEFAULT_KERNEL_CAP, |p, q| mf.amplitude(p, q)).unwrap();
    plain.normalize();
    let sigma = singular_values(&plain).unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0006);
    let mut sv_dev = 0.0f64;
    let mut max_overlap = 0.0f64;
    for _ in 0..5 {
        let a = rng.gen_range(-900.0..900.0);
        let b = rng.gen_range(-900.0..900.0);
        let mut phased = KernelMatrix::from_fn(&grid, DEFAULT_KERNEL_CAP, |p, q| {
            mf.amplitude(p, q) * Complex64::from_polar(1.0, a * p.y + b * q.y)
        })
        .unwrap();
        phased.normalize();
        for (x, y) in singular_values(&phased).unwrap().iter().zip(&sigma) {
            sv_dev = sv_dev.max((x - y).abs());
        }
        max_overlap = max_overlap.max(overlap_xi(&plain, &phased).unwrap().norm());
    }
    r.check("6a", sv_dev <= 1e-8, format!("singular values under e^(i(a p_y + b q_y)), 5 random (a, b): max deviation {sv_dev:e} <= 1e-8"));
    r.check("6b", max_overlap < 1.0, format!("max |xi| between plain and phased kernels = {max_overlap:.6} < 1"));
}

fn run_cli(dir: &Path, threads: &str, name: &str, args: &[&str]) -> bool {
    let prefix = dir.join(threads).join(name);
    Command::new(env!("CARGO_BIN_EXE_walkoff"))
        .args(args)
        .args(["--threads", threads, "--out", prefix.to_str().unwrap()])
        .output()
        .expect("binary runs")
        .status
        .success()
}

fn outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e != "manifest"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism(r: &mut Report) {
    let tmp = TempDir::new().unwrap();
    let reference = fixture("reference.cfg");
    let schmidt = fixture("schmidt_w0_100_ws_50.cfg");
    let oam = fixture("oam_w0_100.cfg");
    let thin = fixture("two_crystal_L0.5.cfg");
    let runs: Vec<(&str, Vec<&str>)> = vec![
        ("image", vec!["image", "--config", &reference, "--alpha", "30"]),
        ("movie", vec!["movie", "--config", &reference, "--alpha-step", "45"]),
        ("oam", vec!["oam", "--config", &oam, "--sweep", "alpha", "--range", "0:330:30"]),
        ("schmidt", vec!["schmidt", "--config", &schmidt, "--sweep", "alpha", "--range", "0:90:45"]),
        ("concurrence", vec!["concurrence", "--config", &thin, "--sweep", "L", "--range", "0.5:5:4.5"]),
    ];
    let mut ok = true;
    let mut compared = 0;
    for (name, args) in &runs {
        for threads in ["1", "8"] {
            ok &= run_cli(tmp.path(), threads, name, args);
        }
    }
    // selftest takes no --out; compare stdout instead
    for threads in ["1", "8"] {
        let out = Command::new(env!("CARGO_BIN_EXE_walkoff"))
            .args(["selftest", "--threads", threads])
            .output()
            .unwrap();
        ok &= out.status.success();
        fs::write(tmp.path().join(threads).join("selftest.stdout"), &out.stdout).unwrap();
    }
    let one = outputs(&tmp.path().join("1"));
    let eight = outputs(&tmp.path().join("8"));
    let same_names = one.iter().map(|f| &f.0).eq(eight.iter().map(|f| &f.0));
    let mut differing = Vec::new();
    for ((n, a), (_, b)) in one.iter().zip(&eight) {
        compared += 1;
        if a != b {
            differing.push(n.clone());
        }
    }
    r.check(
        "7",
        ok && same_names && differing.is_empty(),
        format!(
            "--threads 1 vs --threads 8 over image, movie, oam, schmidt, concurrence, selftest: {compared} files compared, {} differ{}",
            differing.len(),
            if ok { "" } else { " (a run failed)" }
        ),
    );
}

#[test]
fn acceptance_criteria() {
    let mut r = Report { failed: Vec::new() };
    shape_suite(&mut r);
    symmetry_restoration(&mut r);
    oam_suite(&mut r);
    schmidt_suite(&mut r);
    concurrence_suite(&mut r);
    phase_invariance(&mut r);
    determinism(&mut r);
    assert!(r.failed.is_empty(), "failed criteria: {:?}", r.failed);
}
