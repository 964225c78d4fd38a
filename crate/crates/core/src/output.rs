//! Plain-text and image writers. Floats are printed with Rust's shortest
//! round-trip formatting so repeated runs produce identical bytes.

use std::io::{self, Write};

use crate::mode::Image;
use crate::oam::SpiralSpectrum;
use crate::polarization::{ConcurrencePoint, PolarizationState};
use crate::schmidt::SchmidtPoint;

/// Shortest round-trip decimal; exponent form outside [1e-4, 1e15).
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && a.is_finite() && !(1e-4..1e15).contains(&a) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// Binary 16-bit PGM (P5, maxval 65535, big-endian). Values are clamped
/// to [0, 1] and mapped linearly; the first row written is the highest y.
pub fn write_pgm<W: Write>(image: &Image, mut out: W) -> io::Result<()> {
    let (w, h) = (image.width(), image.height());
    write!(out, "P5\n{w} {h}\n65535\n")?;
    let mut buf = Vec::with_capacity(2 * w * h);
    for iy in (0..h).rev() {
        for ix in 0..w {
            let v = image.at(ix, iy);
            let v = if v.is_nan() { 0.0 } else { v.clamp(0.0, 1.0) };
            let level = (v * 65535.0).round() as u16;
            buf.extend_from_slice(&level.to_be_bytes());
        }
    }
    out.write_all(&buf)
}

/// `x_mm,y_mm,rate`, one line per pixel in storage order (x fastest,
/// increasing y).
pub fn write_image_csv<W: Write>(image: &Image, mut out: W) -> io::Result<()> {
    writeln!(out, "x_mm,y_mm,rate")?;
    for iy in 0..image.height() {
        for ix in 0..image.width() {
            writeln!(out, "{},{},{}", fmt_f64(image.x[ix]), fmt_f64(image.y[iy]), fmt_f64(image.at(ix, iy)))?;
        }
    }
    Ok(())
}

/// `alpha_deg,C_-M,...,C_M,truncation`. All rows must share the same M.
pub fn write_oam_csv<W: Write>(rows: &[(f64, SpiralSpectrum)], mut out: W) -> io::Result<()> {
    let Some((_, first)) = rows.first() else {
        return writeln!(out, "alpha_deg,truncation");
    };
    let m_values = &first.m_values;
    write!(out, "alpha_deg")?;
    for m in m_values {
        write!(out, ",C_{m}")?;
    }
    writeln!(out, ",truncation")?;
    for (alpha, spectrum) in rows {
        if &spectrum.m_values != m_values {
            return Err(io::Error::new(io::ErrorKind::InvalidInput, "rows use different harmonic windows"));
        }
        write!(out, "{}", fmt_f64(*alpha))?;
        for c in &spectrum.weights {
            write!(out, ",{}", fmt_f64(*c))?;
        }
        writeln!(out, ",{}", fmt_f64(spectrum.truncation_mass))?;
    }
    Ok(())
}

/// `param,K`.
pub fn write_schmidt_csv<W: Write>(points: &[SchmidtPoint], mut out: W) -> io::Result<()> {
    writeln!(out, "param,K")?;
    for p in points {
        writeln!(out, "{},{}", fmt_f64(p.param), fmt_f64(p.schmidt_number))?;
    }
    Ok(())
}

/// `param,xi_abs,purity,concurrence`.
pub fn write_concurrence_csv<W: Write>(points: &[ConcurrencePoint], mut out: W) -> io::Result<()> {
    writeln!(out, "param,xi_abs,purity,concurrence")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(p.param),
            fmt_f64(p.xi_abs),
            fmt_f64(p.purity),
            fmt_f64(p.concurrence)
        )?;
    }
    Ok(())
}

/// ρ_p in the basis HH, HV, VH, VV: one row per line, each entry written
/// as `re im` with 17 significant digits.
pub fn write_density_matrix<W: Write>(state: &PolarizationState, mut out: W) -> io::Result<()> {
    writeln!(out, "# basis HH HV VH VV; entries re im")?;
    for row in &state.rho {
        let cells: Vec<String> = row.iter().map(|z| format!("{:.16e} {:.16e}", z.re, z.im)).collect();
        writeln!(out, "{}", cells.join("  "))?;
    }
    Ok(())
}
