//! Window functions and real-axis decay estimates.
//!
//! Windows are real polynomial-times-Gaussian functions. Each [`WindowSpec`]
//! carries a nominal envelope `(m, n)`: on the real line `|g(t)| ≲ e^{−m t²}`,
//! and its analytic extension grows at most like `e^{n y²}` off the axis.
//! Only the real-axis half is checked numerically, by [`envelope_fit`] and
//! [`check_fourier_decay`].

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lct::{lct_fast, LctParams, NormalizationMode};
use crate::signal::{Grid, Signal};

/// Highest supported Hermite order.
pub const HERMITE_MAX: u32 = 32;
/// Samples below this magnitude are ignored by [`envelope_fit`].
pub const FIT_FLOOR: f64 = 1e-14;
/// Transform samples below this fraction of the peak are ignored by [`check_fourier_decay`].
pub const DECAY_FLOOR: f64 = 1e-8;

/// Growth parameters `(m, n)`: decay `e^{−m x²}` along the real axis, growth `e^{n y²}` across it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeParams {
    pub m: f64,
    pub n: f64,
}

impl EnvelopeParams {
    pub fn new(m: f64, n: f64) -> Result<Self> {
        if !(m > 0.0 && n > 0.0 && m.is_finite() && n.is_finite()) {
            return Err(Error::Parameter(format!("envelope parameters must be positive, got m={m}, n={n}")));
        }
        Ok(EnvelopeParams { m, n })
    }
}

/// A window, described analytically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowSpec {
    /// `e^{−γt²}`
    Gaussian { gamma: f64 },
    /// L²-normalised Hermite function of order `k` built on `2^{1/4}e^{−πt²}`.
    Hermite { k: u32 },
    /// `(Σ_j coeffs[j]·t^j)·e^{−γt²}`
    PolyGaussian { coeffs: Vec<f64>, gamma: f64 },
}

impl WindowSpec {
    pub fn validate(&self) -> Result<()> {
        let check_gamma = |gamma: f64| {
            if gamma > 0.0 && gamma.is_finite() {
                Ok(())
            } else {
                Err(Error::Parameter(format!("window width gamma must be positive, got {gamma}")))
            }
        };
        match self {
            WindowSpec::Gaussian { gamma } => check_gamma(*gamma),
            WindowSpec::Hermite { k } if *k > HERMITE_MAX => {
                Err(Error::Parameter(format!("Hermite order {k} exceeds the cap {HERMITE_MAX}")))
            }
            WindowSpec::Hermite { .. } => Ok(()),
            WindowSpec::PolyGaussian { coeffs, gamma } => {
                check_gamma(*gamma)?;
                if coeffs.is_empty() || coeffs.iter().all(|&c| c == 0.0) {
                    return Err(Error::Parameter("polynomial factor must be nonzero".into()));
                }
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::Parameter("polynomial coefficients must be finite".into()));
                }
                Ok(())
            }
        }
    }

    /// Nominal `(m, n)`; a polynomial factor does not change the Gaussian rate.
    pub fn envelope(&self) -> EnvelopeParams {
        let rate = match self {
            WindowSpec::Gaussian { gamma } | WindowSpec::PolyGaussian { gamma, .. } => *gamma,
            WindowSpec::Hermite { .. } => PI,
        };
        EnvelopeParams { m: rate, n: rate }
    }

    /// Value at an arbitrary point. Assumes [`validate`](Self::validate) passed.
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            WindowSpec::Gaussian { gamma } => (-gamma * t * t).exp(),
            WindowSpec::Hermite { k } => hermite_value(*k, t),
            WindowSpec::PolyGaussian { coeffs, gamma } => {
                let poly = coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c);
                poly * (-gamma * t * t).exp()
            }
        }
    }

    pub fn sample(&self, grid: Grid) -> Result<Signal> {
        self.validate()?;
        Ok(Signal::from_fn(grid, |t| self.eval(t).into()))
    }
}

fn hermite_value(k: u32, t: f64) -> f64 {
    let x = (2.0 * PI).sqrt() * t;
    let mut prev = 0.0;
    let mut cur = 2f64.powf(0.25) * (-PI * t * t).exp();
    for j in 0..k {
        let j = j as f64;
        let next = (2.0 / (j + 1.0)).sqrt() * x * cur - (j / (j + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Samples of `e^{−γt²}`.
pub fn make_gaussian(gamma: f64, grid: Grid) -> Result<Signal> {
    WindowSpec::Gaussian { gamma }.sample(grid)
}

/// Samples of the order-`k` Hermite function, `k ≤ 32`.
pub fn make_hermite(k: u32, grid: Grid) -> Result<Signal> {
    WindowSpec::Hermite { k }.sample(grid)
}

/// Indices of the monotone tails: everything strictly outside the outermost
/// local maxima of `|f|`, restricted to samples above `floor`.
fn tail_indices(mags: &[f64], floor: f64) -> Vec<usize> {
    let n = mags.len();
    let is_max = |k: usize| {
        let left = if k == 0 { f64::NEG_INFINITY } else { mags[k - 1] };
        let right = if k + 1 == n { f64::NEG_INFINITY } else { mags[k + 1] };
        mags[k] >= left && mags[k] >= right && mags[k] > floor
    };
    let first = (0..n).find(|&k| is_max(k));
    let last = (0..n).rev().find(|&k| is_max(k));
    let (Some(first), Some(last)) = (first, last) else {
        return Vec::new();
    };
    (0..first).chain(last + 1..n).filter(|&k| mags[k] > floor).collect()
}

/// Least-squares fit of `ln|f| ≈ α + p·ln|t| − m·t²` over the given samples.
/// With `fixed_m` the rate is held and only `α`, `p` are fitted.
fn fit_log_envelope(ts: &[f64], logs: &[f64], fixed_m: Option<f64>) -> Option<(f64, f64, f64)> {
    let cols = if fixed_m.is_some() { 2 } else { 3 };
    if ts.len() < cols {
        return None;
    }
    let rows = ts.len();
    let mut design = DMatrix::zeros(rows, cols);
    let mut rhs = DVector::zeros(rows);
    for (r, (&t, &l)) in ts.iter().zip(logs).enumerate() {
        design[(r, 0)] = 1.0;
        design[(r, 1)] = t.abs().ln();
        match fixed_m {
            Some(m) => rhs[r] = l + m * t * t,
            None => {
                design[(r, 2)] = -t * t;
                rhs[r] = l;
            }
        }
    }
    let sol = design.svd(true, true).solve(&rhs, 1e-12).ok()?;
    let m = match fixed_m {
        Some(m) => m,
        None => sol[2],
    };
    Some((sol[0], sol[1], m))
}

/// Real-axis decay estimate `(m_hat, C)` with `|f(t)| ≤ C·e^{−m_hat t²}` on the grid.
///
/// `m_hat` comes from a least-squares fit of `ln|f| ≈ α + p·ln|t| − m t²` on
/// the monotone tails (samples above `1e-14`); the power term absorbs a
/// polynomial prefactor so that it does not bias the rate. `C` is the smallest
/// constant making the bound hold at every grid point.
pub fn envelope_fit(f: &Signal) -> Result<(f64, f64)> {
    if f.is_zero() {
        return Err(Error::Parameter("envelope fit of the zero signal".into()));
    }
    let mags: Vec<f64> = f.samples().iter().map(|z| z.norm()).collect();
    let tail: Vec<usize> = tail_indices(&mags, FIT_FLOOR)
        .into_iter()
        .filter(|&k| f.grid().point(k) != 0.0)
        .collect();
    let ts: Vec<f64> = tail.iter().map(|&k| f.grid().point(k)).collect();
    let logs: Vec<f64> = tail.iter().map(|&k| mags[k].ln()).collect();
    let (_, _, m_hat) = fit_log_envelope(&ts, &logs, None)
        .ok_or_else(|| Error::Parameter("too few decaying samples for an envelope fit".into()))?;
    let log_c = f
        .grid()
        .points()
        .zip(&mags)
        .filter(|&(_, &v)| v > 0.0)
        .map(|(t, &v)| v.ln() + m_hat * t * t)
        .fold(f64::NEG_INFINITY, f64::max);
    let c = log_c.exp();
    Ok((m_hat, c))
}

/// 2π-free Fourier transform of `f` on its induced frequency grid.
fn fourier_transform(f: &Signal) -> Result<Signal> {
    lct_fast(&LctParams::FOURIER, NormalizationMode::PaperKernel, f)
}

/// Decay rate of `𝓕f` along the real axis, via [`envelope_fit`].
pub fn fourier_decay_rate(f: &Signal) -> Result<f64> {
    envelope_fit(&fourier_transform(f)?).map(|(m, _)| m)
}

/// Checks that `|𝓕f(ω)| ≤ C·|ω|^p·e^{−ω²/(4n)}` with the rate held fixed.
///
/// `C` and `p` are fitted by least squares on the monotone tails of `|𝓕f|`
/// (samples above `1e-8` of the peak). Returns the largest log-excess of
/// `|𝓕f|` over that bound; values near or below zero mean the transform
/// decays at rate `1/(4n)`. A zero signal passes with `f64::NEG_INFINITY`.
pub fn check_fourier_decay(f: &Signal, n: f64) -> Result<f64> {
    if !(n > 0.0) {
        return Err(Error::Parameter(format!("envelope parameter n must be positive, got {n}")));
    }
    if f.is_zero() {
        return Ok(f64::NEG_INFINITY);
    }
    let big_f = fourier_transform(f)?;
    let mags: Vec<f64> = big_f.samples().iter().map(|z| z.norm()).collect();
    let floor = DECAY_FLOOR * big_f.peak();
    let tail: Vec<usize> = tail_indices(&mags, floor)
        .into_iter()
        .filter(|&k| big_f.grid().point(k) != 0.0)
        .collect();
    let ws: Vec<f64> = tail.iter().map(|&k| big_f.grid().point(k)).collect();
    let logs: Vec<f64> = tail.iter().map(|&k| mags[k].ln()).collect();
    let rate = 1.0 / (4.0 * n);
    let (alpha, p, _) = fit_log_envelope(&ws, &logs, Some(rate))
        .ok_or_else(|| Error::Parameter("too few decaying transform samples".into()))?;
    Ok(ws
        .iter()
        .zip(&logs)
        .map(|(&w, &l)| l - (alpha + p * w.abs().ln() - rate * w * w))
        .fold(f64::NEG_INFINITY, f64::max))
}
