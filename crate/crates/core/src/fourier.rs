//! Riemann-sum Fourier transform `F(ω) ≈ dt Σ_k x_k e^{−iω t_k}` evaluated
//! through one FFT, for frequencies on the lattice dual to the input grid.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::signal::Grid;

/// Frequencies `ω` with `ω·n·dt/(2π)` within this distance of an integer are
/// treated as lattice frequencies.
const DUAL_TOL: f64 = 1e-6;

/// FFT index of `omega` on the lattice dual to `grid`, if it is a lattice frequency.
pub(crate) fn dual_index(grid: &Grid, omega: f64) -> Option<usize> {
    let pos = omega * grid.n as f64 * grid.dt / (2.0 * PI);
    let m = pos.round();
    if (pos - m).abs() > DUAL_TOL * pos.abs().max(1.0) {
        return None;
    }
    Some((m as i64).rem_euclid(grid.n as i64) as usize)
}

/// Forward DFT `Q_m = Σ_k x_k e^{−2πi mk/n}`.
pub(crate) fn dft(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    let fft = FftPlanner::new().plan_fft_forward(buf.len());
    fft.process(&mut buf);
    buf
}

/// `dt Σ_k x_k e^{−iω t_k}` for every `ω` in `omegas`.
///
/// Panics if some `ω` is off the dual lattice; callers route those through
/// [`riemann_at`].
pub(crate) fn riemann_on_dual(x: &[Complex64], grid: &Grid, omegas: &[f64]) -> Vec<Complex64> {
    let spectrum = dft(x);
    omegas
        .iter()
        .map(|&w| {
            let m = dual_index(grid, w).expect("frequency off the dual lattice");
            spectrum[m] * Complex64::from_polar(grid.dt, -w * grid.t0)
        })
        .collect()
}

/// `dt Σ_k x_k e^{−iω t_k}` at a single arbitrary `ω`.
pub(crate) fn riemann_at(x: &[Complex64], grid: &Grid, omega: f64) -> Complex64 {
    let sum: Complex64 = x
        .iter()
        .enumerate()
        .map(|(k, &v)| v * Complex64::from_polar(1.0, -omega * grid.point(k)))
        .sum();
    sum * grid.dt
}

/// Zero-padded linear convolution `c[m] = Σ_k x[k]·y[m−k]`, length `x.len() + y.len() − 1`.
pub(crate) fn linear_convolution(x: &[Complex64], y: &[Complex64]) -> Vec<Complex64> {
    let len = x.len() + y.len() - 1;
    let size = len.next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    let mut a = x.to_vec();
    a.resize(size, Complex64::new(0.0, 0.0));
    let mut b = y.to_vec();
    b.resize(size, Complex64::new(0.0, 0.0));
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (p, q) in a.iter_mut().zip(&b) {
        *p *= q;
    }
    inv.process(&mut a);
    let scale = 1.0 / size as f64;
    a.truncate(len);
    a.iter_mut().for_each(|z| *z *= scale);
    a
}
