//! Phaseless measurements and reconstruction from STLCT magnitudes.
//!
//! The forward model is `λ ↦ |V_g^{(A)} f(λ)|` over a [`SamplingSet`]. The
//! solver minimises
//!
//! ```text
//! L(h) = Σ_λ (|V_g^{(A)} h(λ)|² − m_λ²)² / Σ_λ m_λ⁴
//! ```
//!
//! from seeded random starts. Because `L(e^{iα}h) = L(h)`, a reconstruction
//! is judged by [`global_phase_distance`](crate::signal::global_phase_distance),
//! never by a sample-wise comparison.

use std::f64::consts::PI;

use log::{debug, warn};
use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattices::{bandlimited_lattice, check_sqrt_admissible, sqrt_lattice, SamplingSet, SqrtLatticeSpec};
use crate::lct::{dilation, generalized_modulation, lct_fast, LctParams, NormalizationMode};
use crate::signal::{mixture, relative_phase_distance, Grid, MixtureRanges, Signal};
use crate::stlct::{stlct, TfPoint, Window};
use crate::windows::WindowSpec;

/// Magnitudes of the STLCT of some signal at the points of a sampling set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMeasurementSet")]
pub struct MeasurementSet {
    pub params: LctParams,
    #[serde(default)]
    pub mode: NormalizationMode,
    pub window: WindowSpec,
    pub sampling: SamplingSet,
    pub magnitudes: Vec<f64>,
}

#[derive(Deserialize)]
struct RawMeasurementSet {
    params: LctParams,
    #[serde(default)]
    mode: NormalizationMode,
    window: WindowSpec,
    sampling: SamplingSet,
    magnitudes: Vec<f64>,
}

impl TryFrom<RawMeasurementSet> for MeasurementSet {
    type Error = Error;

    fn try_from(r: RawMeasurementSet) -> Result<Self> {
        MeasurementSet::new(r.params, r.mode, r.window, r.sampling, r.magnitudes)
    }
}

impl MeasurementSet {
    pub fn new(
        params: LctParams,
        mode: NormalizationMode,
        window: WindowSpec,
        sampling: SamplingSet,
        magnitudes: Vec<f64>,
    ) -> Result<Self> {
        window.validate()?;
        if magnitudes.len() != sampling.len() {
            return Err(Error::Malformed(format!(
                "{} magnitudes for {} sampling points",
                magnitudes.len(),
                sampling.len()
            )));
        }
        if let Some(m) = magnitudes.iter().find(|m| !(m.is_finite() && **m >= 0.0)) {
            return Err(Error::Malformed(format!("magnitude {m} is not a finite nonnegative number")));
        }
        Ok(MeasurementSet { params, mode, window, sampling, magnitudes })
    }

    pub fn peak(&self) -> f64 {
        self.magnitudes.iter().copied().fold(0.0, f64::max)
    }
}

/// `|V_g^{(A)} f|` at every point of `sampling`, in the set's order.
pub fn measure(
    f: &Signal,
    params: &LctParams,
    mode: NormalizationMode,
    window: &WindowSpec,
    sampling: &SamplingSet,
) -> Result<MeasurementSet> {
    let values = stlct(params, mode, window, f, sampling.points())?;
    MeasurementSet::new(*params, mode, window.clone(), sampling.clone(), values.values.moduli())
}

/// Linear map `h ↦ (V_g^{(A)} h(λ))_λ` on a fixed grid, stored in factored form.
///
/// With `X` the distinct abscissae and `M` the distinct frequencies of the
/// sampling set, `V = E·(h ⊙ W)` where `E` is the `|M|×n` kernel matrix
/// (prefactor, quadrature weight and chirps folded in) and `W` the `n×|X|`
/// matrix of conjugated shifted windows. Both directions are matrix products.
#[derive(Clone, Debug)]
pub struct MeasurementOperator {
    grid: Grid,
    kernel: Array2<Complex64>,
    kernel_adjoint: Array2<Complex64>,
    windows: Array2<Complex64>,
    index: Vec<(usize, usize)>,
}

fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

impl MeasurementOperator {
    pub fn new<W: Window + ?Sized>(
        params: &LctParams,
        mode: NormalizationMode,
        window: &W,
        grid: Grid,
        points: &[TfPoint],
    ) -> Result<Self> {
        params.require_nonzero_b()?;
        let xs = distinct(points.iter().map(|p| p.x));
        let mus = distinct(points.iter().map(|p| p.mu));
        let pre = mode.prefactor(params.b) * grid.dt;
        let kernel = Array2::from_shape_fn((mus.len(), grid.n), |(j, k)| {
            pre * Complex64::from_polar(1.0, params.kernel_phase(grid.point(k), mus[j]))
        });
        let kernel_adjoint = kernel.t().mapv(|z| z.conj());
        let mut windows = Array2::zeros((grid.n, xs.len()));
        for (i, &x) in xs.iter().enumerate() {
            let col = window.conj_shifted(x, &grid)?;
            windows.column_mut(i).iter_mut().zip(col).for_each(|(w, c)| *w = c);
        }
        let find = |list: &[f64], v: f64| list.binary_search_by(|p| p.total_cmp(&v)).expect("value collected above");
        let index = points.iter().map(|p| (find(&mus, p.mu), find(&xs, p.x))).collect();
        Ok(MeasurementOperator { grid, kernel, kernel_adjoint, windows, index })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    fn full(&self, h: &[Complex64]) -> Array2<Complex64> {
        let mut windowed = self.windows.clone();
        for (mut row, &v) in windowed.axis_iter_mut(Axis(0)).zip(h) {
            row.mapv_inplace(|w| w * v);
        }
        self.kernel.dot(&windowed)
    }

    /// `V h` at every point, in the order the points were given.
    pub fn apply(&self, h: &[Complex64]) -> Vec<Complex64> {
        let full = self.full(h);
        self.index.iter().map(|&(j, i)| full[(j, i)]).collect()
    }

    /// `W^H y` for a vector `y` indexed like the points.
    pub fn adjoint(&self, y: &[Complex64]) -> Vec<Complex64> {
        let mut spread = Array2::<Complex64>::zeros((self.kernel.nrows(), self.windows.ncols()));
        for (&(j, i), &v) in self.index.iter().zip(y) {
            spread[(j, i)] += v;
        }
        let back = self.kernel_adjoint.dot(&spread);
        back.axis_iter(Axis(0))
            .zip(self.windows.axis_iter(Axis(0)))
            .map(|(b, w)| b.iter().zip(w).map(|(x, y)| x * y.conj()).sum())
            .collect()
    }

    /// `(L(h), ∇L(h))` for target magnitudes `mags`, where the gradient is the
    /// complex vector `∂L/∂Re h + i ∂L/∂Im h`.
    pub fn loss_and_gradient(&self, h: &[Complex64], mags: &[f64]) -> (f64, Vec<Complex64>) {
        let values = self.apply(h);
        let denom = loss_denominator(mags);
        let mut loss = 0.0;
        let weighted: Vec<Complex64> = values
            .iter()
            .zip(mags)
            .map(|(v, m)| {
                let r = v.norm_sqr() - m * m;
                loss += r * r;
                v * r
            })
            .collect();
        let scale = 4.0 / denom;
        let grad = self.adjoint(&weighted).into_iter().map(|g| g * scale).collect();
        (loss / denom, grad)
    }

    pub fn loss(&self, h: &[Complex64], mags: &[f64]) -> f64 {
        let denom = loss_denominator(mags);
        let num: f64 = self
            .apply(h)
            .iter()
            .zip(mags)
            .map(|(v, m)| (v.norm_sqr() - m * m).powi(2))
            .sum();
        num / denom
    }
}

fn loss_denominator(mags: &[f64]) -> f64 {
    let s: f64 = mags.iter().map(|m| m.powi(4)).sum();
    if s > 0.0 {
        s
    } else {
        1.0
    }
}

/// Descent direction used by [`solve`].
const LBFGS_MEMORY: usize = 30;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMethod {
    /// Steepest descent with an adaptive step.
    Gd,
    /// Limited-memory BFGS directions; falls back to steepest descent when a
    /// direction fails to descend.
    #[default]
    Lbfgs,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub restarts: usize,
    pub max_iters: usize,
    /// Initial step, relative to the squared norm of the starting point.
    pub step: f64,
    pub grad_tol: f64,
    pub seed: u64,
    /// Restarts stop early once one reaches this loss.
    #[serde(default = "default_accept")]
    pub accept_residual: f64,
    #[serde(default)]
    pub method: SolverMethod,
    /// Damped Gauss-Newton steps applied to the selected restart.
    #[serde(default = "default_refine")]
    pub refine_iters: usize,
}

fn default_refine() -> usize {
    20
}

fn default_accept() -> f64 {
    1e-10
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            restarts: 8,
            max_iters: 500,
            step: 1.0,
            grad_tol: 1e-14,
            seed: 0,
            accept_residual: default_accept(),
            method: SolverMethod::default(),
            refine_iters: default_refine(),
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.max_iters == 0 {
            return Err(Error::Parameter("restarts and max_iters must be positive".into()));
        }
        if !(self.step > 0.0 && self.grad_tol > 0.0 && self.accept_residual >= 0.0) {
            return Err(Error::Parameter("step and grad_tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    pub estimate: Signal,
    /// Loss at `estimate`, recomputed through the STLCT evaluator.
    pub residual: f64,
    pub iterations_used: usize,
    pub restart_index: usize,
}

struct RestartOutcome {
    index: usize,
    estimate: Vec<Complex64>,
    loss: f64,
    iterations: usize,
    finite: bool,
}

fn re_dot(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

fn axpy(h: &[Complex64], s: f64, d: &[Complex64]) -> Vec<Complex64> {
    h.iter().zip(d).map(|(a, b)| a + b * s).collect()
}

/// Random three-component Gaussian mixture centred where the sampling set looks.
fn initial_guess(rng: &mut ChaCha8Rng, grid: &Grid, x_range: (f64, f64), freq_range: (f64, f64)) -> Vec<Complex64> {
    let comps: Vec<(Complex64, f64, f64, f64)> = (0..3)
        .map(|_| {
            let amp = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
            let mid = rng.gen_range(x_range.0..=x_range.1);
            let width = rng.gen_range(0.5..1.5);
            let freq = rng.gen_range(freq_range.0..=freq_range.1);
            (amp, mid, width, freq)
        })
        .collect();
    grid.points()
        .map(|t| {
            comps
                .iter()
                .map(|&(a, mid, w, fr)| a * (-(t - mid).powi(2) / (2.0 * w * w)).exp() * Complex64::from_polar(1.0, fr * t))
                .sum()
        })
        .collect()
}

fn run_restart(
    op: &MeasurementOperator,
    mags: &[f64],
    cfg: &SolverConfig,
    index: usize,
    ranges: ((f64, f64), (f64, f64)),
) -> RestartOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index as u64 + 1);
    let mut h = initial_guess(&mut rng, op.grid(), ranges.0, ranges.1);
    // best global scale for the squared magnitudes
    let p: Vec<f64> = op.apply(&h).iter().map(|v| v.norm_sqr()).collect();
    let pp: f64 = p.iter().map(|x| x * x).sum();
    let pm: f64 = p.iter().zip(mags).map(|(x, m)| x * m * m).sum();
    let c = if pp > 0.0 && pm > 0.0 { (pm / pp).sqrt() } else { 0.0 };
    h.iter_mut().for_each(|z| *z *= c);

    let (mut loss, mut grad) = op.loss_and_gradient(&h, mags);
    let mut step = cfg.step * h.iter().map(|z| z.norm_sqr()).sum::<f64>().max(f64::MIN_POSITIVE);
    let mut memory: Vec<(Vec<Complex64>, Vec<Complex64>, f64)> = Vec::new();
    let mut iterations = 0;
    let mut last_good = (h.clone(), loss);
    while iterations < cfg.max_iters {
        if !loss.is_finite() {
            warn!("restart {index}: loss became non-finite after {iterations} iterations; aborting");
            return RestartOutcome { index, estimate: last_good.0, loss: last_good.1, iterations, finite: false };
        }
        last_good = (h.clone(), loss);
        let gnorm2 = re_dot(&grad, &grad);
        if loss <= cfg.accept_residual * 1e-6 || gnorm2.sqrt() <= cfg.grad_tol {
            break;
        }
        iterations += 1;

        let (direction, quasi) = match cfg.method {
            SolverMethod::Lbfgs if !memory.is_empty() => (lbfgs_direction(&grad, &memory), true),
            _ => (grad.iter().map(|g| -g).collect::<Vec<_>>(), false),
        };
        let slope = re_dot(&grad, &direction);
        let (direction, quasi, slope) = if slope < 0.0 {
            (direction, quasi, slope)
        } else {
            memory.clear();
            (grad.iter().map(|g| -g).collect(), false, -gnorm2)
        };

        let mut s = if quasi { 1.0 } else { step };
        let mut accepted = None;
        for _ in 0..60 {
            let cand = axpy(&h, s, &direction);
            let (l, g) = op.loss_and_gradient(&cand, mags);
            if l.is_finite() && l <= loss + 1e-4 * s * slope {
                accepted = Some((cand, l, g));
                break;
            }
            s *= 0.5;
        }
        let Some((cand, l, g)) = accepted else {
            debug!("restart {index}: line search stalled at iteration {iterations}");
            break;
        };
        if !quasi {
            step = s * 2.0;
        }
        if cfg.method == SolverMethod::Lbfgs {
            let sv: Vec<Complex64> = cand.iter().zip(&h).map(|(a, b)| a - b).collect();
            let yv: Vec<Complex64> = g.iter().zip(&grad).map(|(a, b)| a - b).collect();
            let sy = re_dot(&sv, &yv);
            if sy > 1e-300 {
                memory.push((sv, yv, sy));
                if memory.len() > LBFGS_MEMORY {
                    memory.remove(0);
                }
            }
        }
        h = cand;
        loss = l;
        grad = g;
    }
    RestartOutcome { index, estimate: h, loss, iterations, finite: loss.is_finite() }
}

fn lbfgs_direction(grad: &[Complex64], memory: &[(Vec<Complex64>, Vec<Complex64>, f64)]) -> Vec<Complex64> {
    let mut q: Vec<Complex64> = grad.to_vec();
    let mut alphas = Vec::with_capacity(memory.len());
    for (s, y, sy) in memory.iter().rev() {
        let a = re_dot(s, &q) / sy;
        q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= yi * a);
        alphas.push(a);
    }
    let (s, y, sy) = memory.last().expect("non-empty memory");
    let gamma = sy / re_dot(y, y);
    q.iter_mut().for_each(|z| *z *= gamma);
    for ((s, y, sy), a) in memory.iter().zip(alphas.into_iter().rev()) {
        let b = re_dot(y, &q) / sy;
        q.iter_mut().zip(s).for_each(|(qi, si)| *qi += si * (a - b));
    }
    let _ = s;
    q.into_iter().map(|z| -z).collect()
}

/// Damped Gauss-Newton on the residuals `|V h|² − m²`.
///
/// Each step solves `(JᵀJ + λI) p = −Jᵀr` by conjugate gradients using only
/// operator applications. Returns the refined point, its loss and the number of
/// accepted steps.
fn refine_gauss_newton(
    op: &MeasurementOperator,
    mags: &[f64],
    start: Vec<Complex64>,
    iters: usize,
) -> (Vec<Complex64>, f64, usize) {
    let residuals = |v: &[Complex64]| -> Vec<f64> { v.iter().zip(mags).map(|(z, m)| z.norm_sqr() - m * m).collect() };
    let denom = loss_denominator(mags);
    let mut h = start;
    let mut values = op.apply(&h);
    let mut r = residuals(&values);
    let mut loss = r.iter().map(|x| x * x).sum::<f64>() / denom;
    let mut lambda: Option<f64> = None;
    let mut accepted = 0;
    for _ in 0..iters {
        if loss == 0.0 {
            break;
        }
        let jt = |s: &[f64], v: &[Complex64]| -> Vec<Complex64> {
            let y: Vec<Complex64> = v.iter().zip(s).map(|(z, x)| z * (2.0 * x)).collect();
            op.adjoint(&y)
        };
        let jv = |p: &[Complex64], v: &[Complex64]| -> Vec<f64> {
            op.apply(p).iter().zip(v).map(|(w, z)| 2.0 * (z.conj() * w).re).collect()
        };
        let g = jt(&r, &values);
        let gnorm2 = re_dot(&g, &g);
        if gnorm2 == 0.0 {
            break;
        }
        // damping scaled to the curvature along the gradient
        let lam = *lambda.get_or_insert_with(|| {
            let jg = jv(&g, &values);
            1e-3 * jg.iter().map(|x| x * x).sum::<f64>() / gnorm2
        });
        let normal = |p: &[Complex64]| -> Vec<Complex64> {
            let mut out = jt(&jv(p, &values), &values);
            out.iter_mut().zip(p).for_each(|(o, pi)| *o += pi * lam);
            out
        };
        let p = conjugate_gradient(normal, &g, 200, 1e-4);
        let cand: Vec<Complex64> = h.iter().zip(&p).map(|(a, b)| a - b).collect();
        let cand_values = op.apply(&cand);
        let cand_r = residuals(&cand_values);
        let cand_loss = cand_r.iter().map(|x| x * x).sum::<f64>() / denom;
        if cand_loss.is_finite() && cand_loss < loss {
            h = cand;
            values = cand_values;
            r = cand_r;
            loss = cand_loss;
            lambda = Some(lam / 3.0);
            accepted += 1;
        } else {
            lambda = Some(lam * 4.0);
        }
    }
    (h, loss, accepted)
}

/// Solves `A x = b` for a symmetric positive definite `A` given as a closure.
fn conjugate_gradient(
    a: impl Fn(&[Complex64]) -> Vec<Complex64>,
    b: &[Complex64],
    max_iters: usize,
    rel_tol: f64,
) -> Vec<Complex64> {
    let mut x = vec![Complex64::new(0.0, 0.0); b.len()];
    let mut res = b.to_vec();
    let mut dir = res.clone();
    let mut rr = re_dot(&res, &res);
    let stop = rel_tol * rel_tol * rr;
    for _ in 0..max_iters {
        if rr <= stop {
            break;
        }
        let ad = a(&dir);
        let curv = re_dot(&dir, &ad);
        if curv <= 0.0 {
            break;
        }
        let alpha = rr / curv;
        x.iter_mut().zip(&dir).for_each(|(xi, d)| *xi += d * alpha);
        res.iter_mut().zip(&ad).for_each(|(ri, q)| *ri -= q * alpha);
        let next = re_dot(&res, &res);
        let beta = next / rr;
        dir.iter_mut().zip(&res).for_each(|(d, ri)| *d = ri + *d * beta);
        rr = next;
    }
    x
}

/// Reconstructs a signal on `grid` from `meas`.
///
/// Restarts run in parallel batches, in index order. The returned restart is
/// the lowest index whose loss reaches `cfg.accept_residual`, or else the one
/// with the smallest `(loss, index)`; either way the choice does not depend on
/// scheduling or thread count.
pub fn solve(meas: &MeasurementSet, grid: Grid, cfg: &SolverConfig) -> Result<SolverResult> {
    cfg.validate()?;
    if meas.sampling.len() < 2 * grid.n {
        warn!(
            "{} measurements for {} unknowns; at least {} are recommended",
            meas.sampling.len(),
            grid.n,
            2 * grid.n
        );
    }
    let op = MeasurementOperator::new(&meas.params, meas.mode, &meas.window, grid, meas.sampling.points())?;
    let ranges = init_ranges(meas, &grid);
    let batch = rayon::current_num_threads().max(1);
    let mut outcomes: Vec<RestartOutcome> = Vec::new();
    let mut start = 0;
    while start < cfg.restarts {
        let end = (start + batch).min(cfg.restarts);
        let mut chunk: Vec<RestartOutcome> = (start..end)
            .into_par_iter()
            .map(|i| run_restart(&op, &meas.magnitudes, cfg, i, ranges))
            .collect();
        chunk.sort_by_key(|o| o.index);
        let done = chunk.iter().any(|o| o.finite && o.loss <= cfg.accept_residual);
        outcomes.extend(chunk);
        if done {
            break;
        }
        start = end;
    }
    let finite: Vec<&RestartOutcome> = outcomes.iter().filter(|o| o.finite).collect();
    let chosen = finite
        .iter()
        .find(|o| o.loss <= cfg.accept_residual)
        .or_else(|| finite.iter().min_by(|a, b| a.loss.total_cmp(&b.loss).then(a.index.cmp(&b.index))))
        .copied();
    let finish = |o: &RestartOutcome| -> Result<SolverResult> {
        let (refined, _, steps) = refine_gauss_newton(&op, &meas.magnitudes, o.estimate.clone(), cfg.refine_iters);
        debug!("restart {}: {steps} refinement steps accepted", o.index);
        let estimate = Signal::new(grid, refined)?;
        let residual = recompute_residual(meas, &estimate)?;
        Ok(SolverResult { estimate, residual, iterations_used: o.iterations, restart_index: o.index })
    };
    match chosen {
        Some(o) => finish(o),
        None => {
            let best = outcomes
                .iter()
                .filter(|o| o.loss.is_finite())
                .min_by(|a, b| a.loss.total_cmp(&b.loss).then(a.index.cmp(&b.index)))
                .map(finish)
                .transpose()?
                .map(Box::new);
            Err(Error::Solver { message: format!("all {} restarts produced non-finite losses", outcomes.len()), best })
        }
    }
}

fn init_ranges(meas: &MeasurementSet, grid: &Grid) -> ((f64, f64), (f64, f64)) {
    let pts = meas.sampling.points();
    let (lo, hi) = (grid.t0, grid.last());
    let xmin = pts.iter().map(|p| p.x).fold(f64::INFINITY, f64::min).clamp(lo, hi);
    let xmax = pts.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max).clamp(lo, hi);
    let b = meas.params.b;
    let fmin = pts.iter().map(|p| p.mu / b).fold(f64::INFINITY, f64::min);
    let fmax = pts.iter().map(|p| p.mu / b).fold(f64::NEG_INFINITY, f64::max);
    let span = |a: f64, b: f64| if a.is_finite() && b.is_finite() { (a, b) } else { (0.0, 0.0) };
    // the chirp shifts local frequencies by a·t/b, so the classical range is only a guide
    let (fmin, fmax) = span(fmin, fmax);
    (span(xmin, xmax), (fmin.min(fmax) * 0.5, fmax.max(fmin) * 0.5))
}

/// Loss of `estimate` against `meas`, evaluated through [`stlct`] rather than
/// the factored operator.
pub fn recompute_residual(meas: &MeasurementSet, estimate: &Signal) -> Result<f64> {
    let values = stlct(&meas.params, meas.mode, &meas.window, estimate, meas.sampling.points())?;
    let denom = loss_denominator(&meas.magnitudes);
    let num: f64 = values
        .values
        .moduli()
        .iter()
        .zip(&meas.magnitudes)
        .map(|(v, m)| (v * v - m * m).powi(2))
        .sum();
    Ok(num / denom)
}

/// Two signals with identical STLCT magnitudes on a line family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmbiguousPair {
    pub f_plus: Signal,
    pub f_minus: Signal,
    pub u: f64,
    pub params: LctParams,
}

/// The Gaussian `φ(t) = e^{−t²}` used by the ambiguous pair and its window.
pub const PAIR_WINDOW: WindowSpec = WindowSpec::Gaussian { gamma: 1.0 };

/// `f_± = (1 ± i)·M_u^{(A)}φ + (1 ∓ i)·M_{−u}^{(A)}φ` with `φ(t) = e^{−t²}`.
///
/// The grid must hold `φ`: edge values above `1e-12` trigger a warning and
/// above `1e-8` an error.
pub fn counterexample_pair(u: f64, params: &LctParams, grid: Grid) -> Result<AmbiguousPair> {
    if !u.is_finite() {
        return Err(Error::Parameter(format!("u = {u} must be finite")));
    }
    let phi = PAIR_WINDOW.sample(grid)?;
    let edge = (-grid.t0 * grid.t0).exp().max((-grid.last() * grid.last()).exp());
    if edge > 1e-8 {
        return Err(Error::Parameter(format!("grid too narrow: the Gaussian is still {edge:.3e} at its edge")));
    }
    if edge > 1e-12 {
        warn!("counterexample grid edge value {edge:.3e} exceeds 1e-12");
    }
    let plus = generalized_modulation(params, u, &phi)?;
    let minus = generalized_modulation(params, -u, &phi)?;
    let one_plus_i = Complex64::new(1.0, 1.0);
    let one_minus_i = Complex64::new(1.0, -1.0);
    Ok(AmbiguousPair {
        f_plus: plus.combine(one_plus_i, &minus, one_minus_i)?,
        f_minus: plus.combine(one_minus_i, &minus, one_plus_i)?,
        u,
        params: *params,
    })
}

/// Normalised magnitude gap and relative phase distance of a pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityReport {
    /// `max_λ ||V f₊(λ)| − |V f₋(λ)|| / max_λ max(|V f₊(λ)|, |V f₋(λ)|)`
    pub max_gap: f64,
    pub phase_distance: f64,
}

/// Measures both signals of `pair` with the window `e^{−t²}` at `points`.
pub fn verify_ambiguity(pair: &AmbiguousPair, mode: NormalizationMode, points: &[TfPoint]) -> Result<AmbiguityReport> {
    verify_ambiguity_with(pair, mode, &PAIR_WINDOW, points)
}

/// [`verify_ambiguity`] with an arbitrary window.
pub fn verify_ambiguity_with<W: Window + ?Sized>(
    pair: &AmbiguousPair,
    mode: NormalizationMode,
    window: &W,
    points: &[TfPoint],
) -> Result<AmbiguityReport> {
    let a = stlct(&pair.params, mode, window, &pair.f_plus, points)?.values.moduli();
    let b = stlct(&pair.params, mode, window, &pair.f_minus, points)?.values.moduli();
    Ok(AmbiguityReport {
        max_gap: normalized_gap(&a, &b),
        phase_distance: relative_phase_distance(&pair.f_plus, &pair.f_minus)?,
    })
}

/// `max |a − b| / max(max a, max b)`, or 0 when both vanish.
pub fn normalized_gap(a: &[f64], b: &[f64]) -> f64 {
    let peak = a.iter().chain(b).copied().fold(0.0, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / peak
}

fn gaussian_times(f: &Signal, gamma: f64, factor: impl Fn(f64) -> f64) -> Signal {
    f.map(|t, z| z * (factor(t) * (-gamma * t * t).exp()))
}

fn modulus(s: &Signal) -> Signal {
    s.map(|_, z| Complex64::new(z.norm(), 0.0))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!("gamma = {gamma} must be positive")))
    }
}

/// `|L_A(Pf)|, |L_A(QPf)|, |L_A((I+Q)Pf)|` with `P` multiplication by `e^{−γt²}`
/// and `Q` multiplication by `t`, on the induced grid.
pub fn lct_pr_triplet(f: &Signal, params: &LctParams, mode: NormalizationMode, gamma: f64) -> Result<[Signal; 3]> {
    check_gamma(gamma)?;
    let pf = gaussian_times(f, gamma, |_| 1.0);
    let qpf = gaussian_times(f, gamma, |t| t);
    let ipf = gaussian_times(f, gamma, |t| 1.0 + t);
    Ok([
        modulus(&lct_fast(params, mode, &pf)?),
        modulus(&lct_fast(params, mode, &qpf)?),
        modulus(&lct_fast(params, mode, &ipf)?),
    ])
}

/// Smallest `q ≤ 100` with `|r − p/q| < 1e-9·max(1, |r|)`, if any.
fn rational_witness(r: f64) -> Option<(i64, i64)> {
    (1..=100i64).find_map(|q| {
        let p = (r * q as f64).round();
        ((r - p / q as f64).abs() < 1e-9 * r.abs().max(1.0)).then_some((p as i64, q))
    })
}

/// `|L_A(Pf)|, |L_A(P₁f)|, |L_A(P₂f)|` with `P_j = sin(α_j π t)·e^{−γt²}`.
///
/// The ratio `α₁/α₂` should be irrational; a rational ratio with denominator
/// at most 100 is reported through `log::warn`.
pub fn lct_pr_sin_pair(
    f: &Signal,
    params: &LctParams,
    mode: NormalizationMode,
    gamma: f64,
    alpha1: f64,
    alpha2: f64,
) -> Result<[Signal; 3]> {
    check_gamma(gamma)?;
    if !(alpha1 >= 0.0 && alpha2 >= 0.0 && alpha1.is_finite() && alpha2.is_finite()) {
        return Err(Error::Parameter(format!("sine frequencies must be nonnegative, got {alpha1}, {alpha2}")));
    }
    if alpha2 > 0.0 {
        if let Some((p, q)) = rational_witness(alpha1 / alpha2) {
            warn!("alpha1/alpha2 = {p}/{q} is rational; the sine pair need not determine f");
        }
    }
    let pf = gaussian_times(f, gamma, |_| 1.0);
    let p1 = gaussian_times(f, gamma, |t| (alpha1 * PI * t).sin());
    let p2 = gaussian_times(f, gamma, |t| (alpha2 * PI * t).sin());
    Ok([
        modulus(&lct_fast(params, mode, &pf)?),
        modulus(&lct_fast(params, mode, &p1)?),
        modulus(&lct_fast(params, mode, &p2)?),
    ])
}

/// `|L_A(Pf)|` and `|L_A(𝐃₁·f)|` with `𝐃₁ = D_{a₁}φ − a₁^{1/2}φ`, `φ(t) = e^{−γt²}`.
pub fn lct_pr_dilation(
    f: &Signal,
    params: &LctParams,
    mode: NormalizationMode,
    gamma: f64,
    a1: f64,
) -> Result<[Signal; 2]> {
    check_gamma(gamma)?;
    if !(a1 > 0.0 && a1.is_finite()) {
        return Err(Error::Parameter(format!("dilation factor a1 = {a1} must be positive")));
    }
    if (a1 - 1.0).abs() <= 1e-6 {
        return Err(Error::Parameter(format!("dilation factor a1 = {a1} makes the window difference vanish")));
    }
    let pf = gaussian_times(f, gamma, |_| 1.0);
    let window = |t: f64| a1.powf(-0.5) * (-gamma * (t / a1).powi(2)).exp() - a1.sqrt() * (-gamma * t * t).exp();
    let df = f.map(|t, z| z * window(t));
    Ok([modulus(&lct_fast(params, mode, &pf)?), modulus(&lct_fast(params, mode, &df)?)])
}

/// Dilation of `φ` on the grid through sinc resampling; used to cross-check the
/// closed-form window of [`lct_pr_dilation`].
pub fn dilated_window_difference(grid: Grid, gamma: f64, a1: f64) -> Result<Signal> {
    let phi = WindowSpec::Gaussian { gamma }.sample(grid)?;
    dilation(a1, &phi)?.combine(Complex64::new(1.0, 0.0), &phi, Complex64::new(-a1.sqrt(), 0.0))
}

/// Largest pointwise gap between two families of magnitude signals, normalised by their joint peak.
pub fn family_gap(a: &[Signal], b: &[Signal]) -> f64 {
    let flat = |s: &[Signal]| s.iter().flat_map(|x| x.samples().iter().map(|z| z.norm())).collect::<Vec<_>>();
    normalized_gap(&flat(a), &flat(b))
}

/// Random band-limited signal `Σ_k c_k e^{iω_k t}` with complex Gaussian
/// `c_k` and `ω_k = −B + k·B/16`, `k = 0..=32`.
pub fn bandlimited_signal(rng: &mut ChaCha8Rng, bandwidth: f64, grid: Grid) -> Signal {
    let coeffs: Vec<(f64, Complex64)> = (0..=32)
        .map(|k| {
            let w = -bandwidth + k as f64 * bandwidth / 16.0;
            let c = Complex64::new(StandardNormal.sample(rng), StandardNormal.sample(rng)) / 2f64.sqrt();
            (w, c)
        })
        .collect();
    Signal::from_fn(grid, |t| coeffs.iter().map(|&(w, c)| c * Complex64::from_polar(1.0, w * t)).sum())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandlimitedConfig {
    #[serde(rename = "B")]
    pub bandwidth: f64,
    pub m: f64,
    pub params: LctParams,
    #[serde(default)]
    pub mode: NormalizationMode,
    pub trials: usize,
    pub seed: u64,
    /// Abscissae `0..=x_max`.
    pub x_max: u32,
    /// Frequencies `k·m·b` for `|k| ≤ mu_count`.
    pub mu_count: u32,
    /// Amplitude of the perturbation that makes the second signal non-equivalent.
    pub perturbation: f64,
}

impl Default for BandlimitedConfig {
    fn default() -> Self {
        BandlimitedConfig {
            bandwidth: 1.0,
            m: 0.2,
            params: LctParams { a: 1.0, b: 1.0, c: 0.0, d: 1.0 },
            mode: NormalizationMode::Unitary,
            trials: 100,
            seed: 0,
            x_max: 15,
            mu_count: 16,
            perturbation: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub trial: usize,
    pub equivalent: bool,
    pub gap: f64,
    pub phase_distance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandlimitedReport {
    pub pairs: Vec<PairRecord>,
    /// Fraction of globally-phased pairs with gap ≤ 1e-10.
    pub equivalent_rate: f64,
    /// Fraction of non-equivalent pairs with gap ≥ 1e-6.
    pub distinguish_rate: f64,
    pub passed: bool,
}

/// Equivalent pairs must stay below this normalised gap.
pub const EQUIVALENT_GAP: f64 = 1e-10;
/// Non-equivalent pairs must exceed this normalised gap.
pub const DISTINCT_GAP: f64 = 1e-6;

/// Grid used by [`bandlimited_experiment`]: step 1/16 covering `[−8, x_max + 8]`.
pub fn bandlimited_grid(x_max: u32) -> Grid {
    let dt = 1.0 / 16.0;
    let n = ((x_max as f64 + 16.0) / dt).ceil() as usize;
    Grid::new(-8.0, dt, n).expect("static grid")
}

/// Distinguishability of band-limited signals from Gabor magnitudes on `{0..x_max} × m·b·ℤ`.
///
/// Each trial draws `f` and builds an equivalent pair `(f, e^{0.7i}f)` and a
/// non-equivalent pair `(f, f + ε·p)`.
pub fn bandlimited_experiment(cfg: &BandlimitedConfig) -> Result<BandlimitedReport> {
    let sampling = bandlimited_lattice(cfg.bandwidth, cfg.m, cfg.params.b, cfg.x_max, cfg.mu_count)?;
    let grid = bandlimited_grid(cfg.x_max);
    let op = MeasurementOperator::new(&cfg.params, cfg.mode, &PAIR_WINDOW, grid, sampling.points())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut pairs = Vec::with_capacity(2 * cfg.trials);
    let phase = Complex64::from_polar(1.0, 0.7);
    for trial in 0..cfg.trials {
        let f = bandlimited_signal(&mut rng, cfg.bandwidth, grid);
        let p = bandlimited_signal(&mut rng, cfg.bandwidth, grid);
        let mf: Vec<f64> = op.apply(f.samples()).iter().map(|z| z.norm()).collect();
        let rotated = f.scale(phase);
        let mr: Vec<f64> = op.apply(rotated.samples()).iter().map(|z| z.norm()).collect();
        pairs.push(PairRecord {
            trial,
            equivalent: true,
            gap: normalized_gap(&mf, &mr),
            phase_distance: relative_phase_distance(&f, &rotated)?,
        });
        let other = f.combine(Complex64::new(1.0, 0.0), &p, Complex64::new(cfg.perturbation, 0.0))?;
        let mo: Vec<f64> = op.apply(other.samples()).iter().map(|z| z.norm()).collect();
        pairs.push(PairRecord {
            trial,
            equivalent: false,
            gap: normalized_gap(&mf, &mo),
            phase_distance: relative_phase_distance(&f, &other)?,
        });
    }
    let rate = |equivalent: bool, ok: &dyn Fn(f64) -> bool| {
        let group: Vec<&PairRecord> = pairs.iter().filter(|p| p.equivalent == equivalent).collect();
        if group.is_empty() {
            1.0
        } else {
            group.iter().filter(|p| ok(p.gap)).count() as f64 / group.len() as f64
        }
    };
    let equivalent_rate = rate(true, &|g| g <= EQUIVALENT_GAP);
    let distinguish_rate = rate(false, &|g| g >= DISTINCT_GAP);
    Ok(BandlimitedReport { passed: equivalent_rate == 1.0 && distinguish_rate >= 0.99, pairs, equivalent_rate, distinguish_rate })
}

/// Seeded mixture with centres and carriers in `[−spread, spread]` and widths in `[0.5, 1]`.
pub fn contained_mixture(seed: u64, grid: Grid, spread: f64) -> Signal {
    mixture(seed, grid, &MixtureRanges { centre: spread, width: (0.5, 1.0), freq: spread })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqrtExperimentConfig {
    pub gamma: f64,
    pub tau: f64,
    pub v: f64,
    #[serde(rename = "K")]
    pub k: u32,
    pub params: LctParams,
    #[serde(default)]
    pub mode: NormalizationMode,
    pub trials: usize,
    pub seed: u64,
    pub n: usize,
    pub dt: f64,
    /// Half-width of the region holding the test signals' centres and carriers.
    pub spread: f64,
    pub solver: SolverConfig,
    /// A trial succeeds when the relative global-phase distance is at most this.
    pub success_distance: f64,
    /// Use the smaller of the two readings of the time-step bound.
    #[serde(default)]
    pub strict: bool,
}

impl Default for SqrtExperimentConfig {
    fn default() -> Self {
        SqrtExperimentConfig {
            gamma: 0.5,
            tau: 0.4,
            v: 0.4,
            k: 20,
            params: LctParams { a: 0.0, b: 1.0, c: -1.0, d: 0.0 },
            mode: NormalizationMode::Unitary,
            trials: 10,
            seed: 0,
            n: 256,
            dt: 1.0 / 16.0,
            spread: 0.75,
            solver: SolverConfig::default(),
            success_distance: 1e-2,
            strict: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub signal_seed: u64,
    pub phase_distance: f64,
    pub residual: f64,
    pub restart_index: usize,
    pub iterations: usize,
    pub success: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqrtExperimentReport {
    pub trials: Vec<TrialRecord>,
    pub success_rate: f64,
    pub median_phase_distance: f64,
}

/// Reconstruction of seeded signals from Gabor magnitudes on a square-root lattice.
///
/// Fails with [`Error::Admissibility`] before any work if `(τ, v)` violate the
/// bounds for the Gaussian envelope `m = n = γ`.
pub fn sqrt_uniqueness_experiment(cfg: &SqrtExperimentConfig) -> Result<SqrtExperimentReport> {
    check_sqrt_admissible(cfg.gamma, cfg.gamma, cfg.params.b, cfg.tau, cfg.v, cfg.strict)?;
    let sampling = sqrt_lattice(&SqrtLatticeSpec { tau: cfg.tau, v: cfg.v, k: cfg.k })?;
    let grid = Grid::centered(cfg.dt, cfg.n)?;
    let window = WindowSpec::Gaussian { gamma: cfg.gamma };
    let mut trials = Vec::with_capacity(cfg.trials);
    for trial in 0..cfg.trials {
        let signal_seed = cfg.seed.wrapping_mul(1_000_003).wrapping_add(trial as u64);
        let f = contained_mixture(signal_seed, grid, cfg.spread);
        let meas = measure(&f, &cfg.params, cfg.mode, &window, &sampling)?;
        let solver = SolverConfig { seed: signal_seed, ..cfg.solver.clone() };
        let record = match solve(&meas, grid, &solver) {
            Ok(r) => {
                let d = relative_phase_distance(&r.estimate, &f)?;
                TrialRecord {
                    trial,
                    signal_seed,
                    phase_distance: d,
                    residual: r.residual,
                    restart_index: r.restart_index,
                    iterations: r.iterations_used,
                    success: d <= cfg.success_distance,
                }
            }
            Err(Error::Solver { message, .. }) => {
                warn!("trial {trial}: {message}");
                TrialRecord {
                    trial,
                    signal_seed,
                    phase_distance: f64::INFINITY,
                    residual: f64::INFINITY,
                    restart_index: 0,
                    iterations: 0,
                    success: false,
                }
            }
            Err(e) => return Err(e),
        };
        trials.push(record);
    }
    let success_rate = if trials.is_empty() {
        0.0
    } else {
        trials.iter().filter(|t| t.success).count() as f64 / trials.len() as f64
    };
    let mut d: Vec<f64> = trials.iter().map(|t| t.phase_distance).collect();
    d.sort_by(f64::total_cmp);
    let median_phase_distance = match d.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => d[n / 2],
        n => 0.5 * (d[n / 2 - 1] + d[n / 2]),
    };
    Ok(SqrtExperimentReport { trials, success_rate, median_phase_distance })
}

/// Which phaseless measurement family a Monte-Carlo record refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prop24Variant {
    Triplet,
    SinPair,
    Dilation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prop24Config {
    pub params: LctParams,
    #[serde(default)]
    pub mode: NormalizationMode,
    pub gamma: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub a1: f64,
    pub trials: usize,
    pub seed: u64,
    pub n: usize,
    pub dt: f64,
}

impl Default for Prop24Config {
    fn default() -> Self {
        Prop24Config {
            params: LctParams { a: 1.0, b: 1.0, c: 0.0, d: 1.0 },
            mode: NormalizationMode::Unitary,
            gamma: 0.5,
            alpha1: 1.0,
            alpha2: std::f64::consts::SQRT_2,
            a1: 2.0,
            trials: 100,
            seed: 0,
            n: 256,
            dt: 1.0 / 16.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prop24Record {
    pub trial: usize,
    pub variant: Prop24Variant,
    /// Gap between `f` and `e^{iα}f`.
    pub phase_gap: f64,
    /// Gap between `f` and an independent signal.
    pub pair_gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prop24Report {
    pub records: Vec<Prop24Record>,
    pub max_phase_gap: f64,
    pub triplet_rate: f64,
    pub sin_pair_rate: f64,
    pub dilation_rate: f64,
    pub passed: bool,
}

/// Global-phase gaps above this fail the invariance check.
pub const PHASE_BLIND_GAP: f64 = 1e-12;
/// Independent signals count as distinguished above this normalised gap.
pub const PROP24_DISTINCT_GAP: f64 = 1e-4;

/// Phase invariance and Monte-Carlo distinguishability of the three
/// measurement families built from Gaussian multipliers.
pub fn prop24_experiment(cfg: &Prop24Config) -> Result<Prop24Report> {
    let grid = Grid::centered(cfg.dt, cfg.n)?;
    let families = |f: &Signal| -> Result<Vec<(Prop24Variant, Vec<Signal>)>> {
        Ok(vec![
            (Prop24Variant::Triplet, lct_pr_triplet(f, &cfg.params, cfg.mode, cfg.gamma)?.to_vec()),
            (
                Prop24Variant::SinPair,
                lct_pr_sin_pair(f, &cfg.params, cfg.mode, cfg.gamma, cfg.alpha1, cfg.alpha2)?.to_vec(),
            ),
            (Prop24Variant::Dilation, lct_pr_dilation(f, &cfg.params, cfg.mode, cfg.gamma, cfg.a1)?.to_vec()),
        ])
    };
    let mut records = Vec::with_capacity(3 * cfg.trials);
    for trial in 0..cfg.trials {
        let base = cfg.seed.wrapping_mul(1_000_003).wrapping_add(2 * trial as u64);
        let f = crate::signal::gaussian_mixture(base, grid);
        let h = crate::signal::gaussian_mixture(base + 1, grid);
        let alpha = 0.3 + 2.0 * PI * (trial as f64 / cfg.trials.max(1) as f64);
        let rotated = f.scale(Complex64::from_polar(1.0, alpha));
        let (mf, mr, mh) = (families(&f)?, families(&rotated)?, families(&h)?);
        for ((variant, a), ((_, r), (_, o))) in mf.into_iter().zip(mr.into_iter().zip(mh)) {
            records.push(Prop24Record { trial, variant, phase_gap: family_gap(&a, &r), pair_gap: family_gap(&a, &o) });
        }
    }
    let max_phase_gap = records.iter().map(|r| r.phase_gap).fold(0.0, f64::max);
    let rate = |v: Prop24Variant| {
        let group: Vec<&Prop24Record> = records.iter().filter(|r| r.variant == v).collect();
        if group.is_empty() {
            1.0
        } else {
            group.iter().filter(|r| r.pair_gap >= PROP24_DISTINCT_GAP).count() as f64 / group.len() as f64
        }
    };
    let (triplet_rate, sin_pair_rate, dilation_rate) =
        (rate(Prop24Variant::Triplet), rate(Prop24Variant::SinPair), rate(Prop24Variant::Dilation));
    let passed = max_phase_gap <= PHASE_BLIND_GAP && triplet_rate.min(sin_pair_rate).min(dilation_rate) >= 0.99;
    Ok(Prop24Report { records, max_phase_gap, triplet_rate, sin_pair_rate, dilation_rate, passed })
}
