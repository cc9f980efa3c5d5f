//! Series-element two-port in a matched line.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model;
use crate::params::SwitchParams;

pub const Z0: f64 = 50.0;

/// Qubit band used by default for sweeps, Hz.
pub const BAND_LO: f64 = 4e9;
pub const BAND_HI: f64 = 8e9;

/// Floor applied to |S21| in dB so an ideal open reports a finite isolation.
pub const S_DB_FLOOR: f64 = -300.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPortPoint {
    pub frequency: f64,
    pub s21_mag: f64,
    pub s21_db: f64,
    pub s11_mag: f64,
    pub s11_db: f64,
}

impl TwoPortPoint {
    pub fn insertion_loss_db(&self) -> f64 {
        -self.s21_db
    }

    pub fn isolation_db(&self) -> f64 {
        -self.s21_db
    }
}

fn to_db(mag: f64) -> f64 {
    if mag > 0.0 {
        (20.0 * mag.log10()).max(S_DB_FLOOR)
    } else {
        S_DB_FLOOR
    }
}

/// `S21 = 2 z0 / (2 z0 + Z)`, `S11 = Z / (2 z0 + Z)`. An infinite `z_series`
/// is an ideal open.
pub fn s21_series(z_series: Complex64, z0: f64, f: f64) -> TwoPortPoint {
    let (s21, s11) = if z_series.is_finite() {
        let den = Complex64::new(2.0 * z0, 0.0) + z_series;
        (Complex64::new(2.0 * z0, 0.0) / den, z_series / den)
    } else {
        (Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))
    };
    let (s21_mag, s11_mag) = (s21.norm(), s11.norm());
    TwoPortPoint { frequency: f, s21_mag, s21_db: to_db(s21_mag), s11_mag, s11_db: to_db(s11_mag) }
}

/// Impedance of the off-state series capacitor; infinite for `c <= 0`.
pub fn capacitor_impedance(c: f64, f: f64) -> Complex64 {
    let w_c = std::f64::consts::TAU * f * c;
    if w_c > 0.0 {
        Complex64::new(0.0, -1.0 / w_c)
    } else {
        Complex64::new(0.0, f64::NEG_INFINITY)
    }
}

/// `n` evenly spaced frequencies including both ends.
pub fn frequencies(f_lo: f64, f_hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![f_lo],
        _ => (0..n).map(|i| f_lo + (f_hi - f_lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Closed switch: series `on_resistance(p, t)`.
pub fn insertion_loss_sweep(p: &SwitchParams, t: f64, f_lo: f64, f_hi: f64, n: usize) -> Vec<TwoPortPoint> {
    let r = model::on_resistance(p, t);
    frequencies(f_lo, f_hi, n).into_iter().map(|f| s21_series(Complex64::new(r, 0.0), Z0, f)).collect()
}

/// Open switch: series `c_off`. The capacitance carries no temperature
/// dependence in this model; `_t` keeps the signature symmetric.
pub fn isolation_sweep(p: &SwitchParams, _t: f64, f_lo: f64, f_hi: f64, n: usize) -> Vec<TwoPortPoint> {
    frequencies(f_lo, f_hi, n).into_iter().map(|f| s21_series(capacitor_impedance(p.c_off, f), Z0, f)).collect()
}

pub fn write_csv<W: Write>(points: &[TwoPortPoint], w: W) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["f_hz", "s21_db", "s11_db"])?;
    for pt in points {
        out.serialize((pt.frequency, pt.s21_db, pt.s11_db))?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn through_line() {
        let pt = s21_series(Complex64::new(0.0, 0.0), Z0, 1e9);
        assert_eq!(pt.s21_mag, 1.0);
        assert_eq!(pt.s21_db, 0.0);
    }

    #[test]
    fn three_ohm_loss() {
        let pt = s21_series(Complex64::new(3.0, 0.0), Z0, 6e9);
        assert_relative_eq!(pt.s21_mag, 100.0 / 103.0, max_relative = 1e-15);
        assert_relative_eq!(pt.insertion_loss_db(), -20.0 * (100.0f64 / 103.0).log10(), max_relative = 1e-14);
        assert!((pt.insertion_loss_db() - 0.2567).abs() < 1e-3);
    }

    #[test]
    fn two_femtofarad_isolation() {
        let z = capacitor_impedance(2e-15, 6e9);
        assert!((z.im.abs() - 13_263.0).abs() < 1.0);
        let iso = s21_series(z, Z0, 6e9).isolation_db();
        assert!((iso - 42.45).abs() < 0.01, "{iso}");
        let iso8 = s21_series(capacitor_impedance(2e-15, 8e9), Z0, 8e9).isolation_db();
        assert!((iso8 - 39.95).abs() < 0.01, "{iso8}");
    }

    #[test]
    fn open_is_capped() {
        let pt = s21_series(capacitor_impedance(0.0, 8e9), Z0, 8e9);
        assert_eq!(pt.s21_mag, 0.0);
        assert_eq!(pt.isolation_db(), -S_DB_FLOOR);
        assert_eq!(pt.s11_mag, 1.0);
    }

    #[test]
    fn zero_resistance_is_lossless() {
        let p = SwitchParams { r_on_295: 0.0, ..SwitchParams::default() };
        assert!(insertion_loss_sweep(&p, 295.0, BAND_LO, BAND_HI, 11).iter().all(|pt| pt.s21_db == 0.0));
    }

    #[test]
    fn csv_header() {
        let pts = isolation_sweep(&SwitchParams::default(), 295.0, BAND_LO, BAND_HI, 3);
        let mut buf = Vec::new();
        write_csv(&pts, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("f_hz,s21_db,s11_db\n"));
        assert_eq!(text.lines().count(), 4);
    }
}
