//! Sampled signals on uniform time grids.
//!
//! Every continuous quantity in the crate is discretised the same way: a
//! [`Grid`] of `n` points `t0 + k·dt`, and integrals are left-endpoint Riemann
//! sums with weight `dt`. Keeping one convention everywhere is what lets the
//! operator identities in [`crate::lct`] and [`crate::stlct`] hold to near
//! machine precision on the discrete side.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floor used when a tolerance is taken relative to signal norms.
pub const EPS_FLOOR: f64 = 1e-300;

/// Uniform sampling grid `t_k = t0 + k·dt`, `0 ≤ k < n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub t0: f64,
    pub dt: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(t0: f64, dt: f64, n: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Malformed(format!(
                "grid step must be positive, got {dt}"
            )));
        }
        if n == 0 {
            return Err(Error::Malformed("grid must have at least one point".into()));
        }
        if !t0.is_finite() {
            return Err(Error::Malformed(format!(
                "grid origin must be finite, got {t0}"
            )));
        }
        Ok(Grid { t0, dt, n })
    }

    /// Grid of `n` points with step `dt` whose index `n/2` sits at the origin.
    pub fn centered(dt: f64, n: usize) -> Result<Self> {
        Grid::new(-((n / 2) as f64) * dt, dt, n)
    }

    #[inline]
    pub fn point(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(move |k| self.point(k))
    }

    /// Last sample position.
    pub fn last(&self) -> f64 {
        self.point(self.n - 1)
    }

    /// Index of the grid point at `t`, if `t` is a grid point up to `1e-9` relative.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let pos = (t - self.t0) / self.dt;
        let k = pos.round();
        if (pos - k).abs() > 1e-9 * pos.abs().max(1.0) || k < 0.0 || k >= self.n as f64 {
            return None;
        }
        Some(k as usize)
    }

    /// Whole number of steps that `shift` spans, or a [`Error::Misaligned`].
    pub fn steps_for(&self, shift: f64) -> Result<i64> {
        let pos = shift / self.dt;
        let k = pos.round();
        if !pos.is_finite() || (pos - k).abs() > 1e-9 * pos.abs().max(1.0) {
            return Err(Error::Misaligned {
                requested: shift,
                step: self.dt,
                nearest: k * self.dt,
            });
        }
        Ok(k as i64)
    }

    /// Offset of `t0` from the origin in whole steps, if the origin is a grid point.
    pub fn origin_offset(&self) -> Option<i64> {
        self.steps_for(-self.t0).ok()
    }

    /// Equality up to `1e-12` relative on `t0` and `dt`, exact on `n`.
    pub fn matches(&self, other: &Grid) -> bool {
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(self.dt);
        self.n == other.n && close(self.t0, other.t0) && close(self.dt, other.dt)
    }

    pub(crate) fn ensure_matches(&self, other: &Grid) -> Result<()> {
        if self.matches(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

/// Complex samples of a function on a [`Grid`].
///
/// Serialises as `{"grid": {...}, "re": [...], "im": [...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SignalRepr", into = "SignalRepr")]
pub struct Signal {
    grid: Grid,
    samples: Vec<Complex64>,
}

impl Signal {
    pub fn new(grid: Grid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.n {
            return Err(Error::Malformed(format!(
                "signal has {} samples but its grid has {} points",
                samples.len(),
                grid.n
            )));
        }
        if let Some(k) = samples
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::Malformed(format!("sample {k} is not finite")));
        }
        Ok(Signal { grid, samples })
    }

    pub fn zeros(grid: Grid) -> Self {
        Signal {
            grid,
            samples: vec![Complex64::new(0.0, 0.0); grid.n],
        }
    }

    /// Samples `f(t_k)` of a closure. Panics if `f` returns a non-finite value.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        let samples: Vec<_> = grid.points().map(f).collect();
        assert!(
            samples.iter().all(|z| z.re.is_finite() && z.im.is_finite()),
            "from_fn produced a non-finite sample"
        );
        Signal { grid, samples }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Maximum sample modulus.
    pub fn peak(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_zero(&self) -> bool {
        self.samples.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// Pointwise map keeping the grid. The closure receives `(t_k, f_k)`.
    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Signal {
        let samples = self
            .grid
            .points()
            .zip(&self.samples)
            .map(|(t, &z)| f(t, z))
            .collect();
        Signal {
            grid: self.grid,
            samples,
        }
    }

    pub fn scale(&self, c: Complex64) -> Signal {
        self.map(|_, z| c * z)
    }

    pub fn conj(&self) -> Signal {
        self.map(|_, z| z.conj())
    }

    /// `α·self + β·other` on a shared grid.
    pub fn combine(&self, alpha: Complex64, other: &Signal, beta: Complex64) -> Result<Signal> {
        self.grid.ensure_matches(&other.grid)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(&x, &y)| alpha * x + beta * y)
            .collect();
        Ok(Signal {
            grid: self.grid,
            samples,
        })
    }

    /// Pointwise product on a shared grid.
    pub fn mul(&self, other: &Signal) -> Result<Signal> {
        self.grid.ensure_matches(&other.grid)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(&x, &y)| x * y)
            .collect();
        Ok(Signal {
            grid: self.grid,
            samples,
        })
    }

    pub fn l2_norm(&self) -> f64 {
        l2_norm(self)
    }
}

#[derive(Serialize, Deserialize)]
struct SignalRepr {
    grid: Grid,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl TryFrom<SignalRepr> for Signal {
    type Error = Error;

    fn try_from(r: SignalRepr) -> Result<Self> {
        let grid = Grid::new(r.grid.t0, r.grid.dt, r.grid.n)?;
        if r.re.len() != r.im.len() {
            return Err(Error::Malformed(format!(
                "re has {} entries but im has {}",
                r.re.len(),
                r.im.len()
            )));
        }
        let samples =
            r.re.into_iter()
                .zip(r.im)
                .map(|(x, y)| Complex64::new(x, y))
                .collect();
        Signal::new(grid, samples)
    }
}

impl From<Signal> for SignalRepr {
    fn from(s: Signal) -> Self {
        SignalRepr {
            grid: s.grid,
            re: s.samples.iter().map(|z| z.re).collect(),
            im: s.samples.iter().map(|z| z.im).collect(),
        }
    }
}

/// `sqrt(dt · Σ|f_k|²)`.
pub fn l2_norm(f: &Signal) -> f64 {
    let sum: f64 = f.samples.iter().map(|z| z.norm_sqr()).sum();
    (f.grid.dt * sum).sqrt()
}

/// `dt · Σ f_k · conj(g_k)`.
pub fn inner_product(f: &Signal, g: &Signal) -> Result<Complex64> {
    f.grid.ensure_matches(&g.grid)?;
    let sum: Complex64 = f
        .samples
        .iter()
        .zip(&g.samples)
        .map(|(&x, &y)| x * y.conj())
        .sum();
    Ok(sum * f.grid.dt)
}

/// `min_α ‖f − e^{iα} g‖₂ = sqrt(‖f‖² + ‖g‖² − 2|⟨f, g⟩|)`.
///
/// The minimiser is `α* = arg⟨f, g⟩`; the norm is evaluated at `α*` directly
/// rather than through the expanded form, which cancels catastrophically when
/// the distance is small.
pub fn global_phase_distance(f: &Signal, g: &Signal) -> Result<f64> {
    let ip = inner_product(f, g)?;
    let rot = if ip.norm() > 0.0 {
        ip / ip.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    let sum: f64 = f
        .samples
        .iter()
        .zip(&g.samples)
        .map(|(&x, &y)| (x - rot * y).norm_sqr())
        .sum();
    Ok((f.grid.dt * sum).sqrt())
}

/// Whether `f ∼ g` up to `tol` relative to the larger norm.
pub fn is_equivalent(f: &Signal, g: &Signal, tol: f64) -> Result<bool> {
    let dist = global_phase_distance(f, g)?;
    let scale = l2_norm(f).max(l2_norm(g)).max(EPS_FLOOR);
    Ok(dist <= tol * scale)
}

/// `global_phase_distance(f, g) / max(‖f‖, ‖g‖)`, or 0 when both vanish.
pub fn relative_phase_distance(f: &Signal, g: &Signal) -> Result<f64> {
    let dist = global_phase_distance(f, g)?;
    let scale = l2_norm(f).max(l2_norm(g));
    Ok(if scale > 0.0 { dist / scale } else { 0.0 })
}

/// Formats `v` with 17 significant digits, enough to round-trip any `f64`.
pub fn format_sig17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Ranges from which [`mixture`] draws its three components.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureRanges {
    /// Centres lie in `[−centre, centre]`.
    pub centre: f64,
    pub width: (f64, f64),
    /// Carrier frequencies lie in `[−freq, freq]`.
    pub freq: f64,
}

impl MixtureRanges {
    /// Centres and carriers in `[−2, 2]`, widths in `[0.5, 1.5]`.
    pub const STANDARD: MixtureRanges = MixtureRanges { centre: 2.0, width: (0.5, 1.5), freq: 2.0 };
}

/// Seeded sum of three modulated Gaussians `a·e^{−(t−c)²/(2w²)}·e^{iξt}` with
/// complex amplitudes in the unit square.
pub fn mixture(seed: u64, grid: Grid, ranges: &MixtureRanges) -> Signal {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let symmetric = |rng: &mut rand_chacha::ChaCha8Rng, r: f64| if r > 0.0 { rng.gen_range(-r..r) } else { 0.0 };
    let comps: Vec<(Complex64, f64, f64, f64)> = (0..3)
        .map(|_| {
            let amp = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let mid = symmetric(&mut rng, ranges.centre);
            let width = rng.gen_range(ranges.width.0..ranges.width.1);
            let freq = symmetric(&mut rng, ranges.freq);
            (amp, mid, width, freq)
        })
        .collect();
    Signal::from_fn(grid, |t| {
        comps
            .iter()
            .map(|&(amp, mid, width, freq)| {
                amp * (-(t - mid).powi(2) / (2.0 * width * width)).exp()
                    * Complex64::from_polar(1.0, freq * t)
            })
            .sum()
    })
}

/// [`mixture`] with [`MixtureRanges::STANDARD`].
pub fn gaussian_mixture(seed: u64, grid: Grid) -> Signal {
    mixture(seed, grid, &MixtureRanges::STANDARD)
}
