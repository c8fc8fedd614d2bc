//! Short-time LCT `V_g^{(A)} f(x, μ) = L_A(f·conj(T_x g))(μ)`.
//!
//! Points are grouped by their time shift `x`. Each column forms the windowed
//! product once; requested frequencies on the induced grid of [`lct_fast`]
//! share one FFT, and any other `μ` is evaluated by direct quadrature.
//! Columns are independent and run in parallel; output order always follows
//! the input order.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lct::{induced_grid, lct_fast, shift_samples, LctParams, NormalizationMode};
use crate::signal::{format_sig17, Grid, Signal};
use crate::windows::WindowSpec;

/// Columns with at least this many on-grid frequencies use the FFT path.
const FAST_MIN_POINTS: usize = 8;
/// Identity checks skip points whose reference is below this fraction of the peak.
pub const REFERENCE_FLOOR: f64 = 1e-9;

/// A time-frequency point `(x, μ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TfPoint {
    pub x: f64,
    pub mu: f64,
}

impl TfPoint {
    pub fn new(x: f64, mu: f64) -> Self {
        TfPoint { x, mu }
    }
}

/// Either complex transform values or their moduli.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrogramValues {
    Complex(Vec<Complex64>),
    Magnitudes(Vec<f64>),
}

impl SpectrogramValues {
    pub fn len(&self) -> usize {
        match self {
            SpectrogramValues::Complex(v) => v.len(),
            SpectrogramValues::Magnitudes(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn moduli(&self) -> Vec<f64> {
        match self {
            SpectrogramValues::Complex(v) => v.iter().map(|z| z.norm()).collect(),
            SpectrogramValues::Magnitudes(v) => v.clone(),
        }
    }
}

/// Transform values at a list of points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrogramSamples {
    pub params: LctParams,
    /// `None` when the window was a sampled signal rather than an analytic spec.
    pub window: Option<WindowSpec>,
    pub points: Vec<TfPoint>,
    pub values: SpectrogramValues,
}

impl SpectrogramSamples {
    /// CSV with header `x,mu,re,im,mag`; `re` and `im` are empty for magnitude-only data.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,mu,re,im,mag\n");
        for (k, p) in self.points.iter().enumerate() {
            let (re, im, mag) = match &self.values {
                SpectrogramValues::Complex(v) => (format_sig17(v[k].re), format_sig17(v[k].im), v[k].norm()),
                SpectrogramValues::Magnitudes(v) => (String::new(), String::new(), v[k]),
            };
            out.push_str(&format!(
                "{},{},{re},{im},{}\n",
                format_sig17(p.x),
                format_sig17(p.mu),
                format_sig17(mag)
            ));
        }
        out
    }
}

/// Something that can act as the window `g`.
pub trait Window: Sync {
    /// Samples of `conj(g(t_k − x))` on `grid`.
    fn conj_shifted(&self, x: f64, grid: &Grid) -> Result<Vec<Complex64>>;

    fn spec(&self) -> Option<WindowSpec> {
        None
    }
}

/// A sampled window; `x` must be a whole number of grid steps.
impl Window for Signal {
    fn conj_shifted(&self, x: f64, grid: &Grid) -> Result<Vec<Complex64>> {
        self.grid().ensure_matches(grid)?;
        let steps = grid.steps_for(x)?;
        Ok(shift_samples(self, steps).samples().iter().map(|z| z.conj()).collect())
    }
}

/// An analytic window, evaluated exactly at `t_k − x` for any real `x`.
impl Window for WindowSpec {
    fn conj_shifted(&self, x: f64, grid: &Grid) -> Result<Vec<Complex64>> {
        self.validate()?;
        Ok(grid.points().map(|t| Complex64::new(self.eval(t - x), 0.0)).collect())
    }

    fn spec(&self) -> Option<WindowSpec> {
        Some(self.clone())
    }
}

/// Groups point indices by the bit pattern of `x`, in first-seen order.
fn columns(points: &[TfPoint]) -> Vec<(f64, Vec<usize>)> {
    let mut order: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut slot: HashMap<u64, usize> = HashMap::new();
    for (k, p) in points.iter().enumerate() {
        let idx = *slot.entry(p.x.to_bits()).or_insert_with(|| {
            order.push((p.x, Vec::new()));
            order.len() - 1
        });
        order[idx].1.push(k);
    }
    order
}

/// `P(b)·dt·Σ_k K(t_k, μ) p_k` at one frequency.
fn direct_value(params: &LctParams, pre: Complex64, grid: &Grid, product: &[Complex64], mu: f64) -> Complex64 {
    let sum: Complex64 = product
        .iter()
        .enumerate()
        .map(|(k, &v)| v * Complex64::from_polar(1.0, params.kernel_phase(grid.point(k), mu)))
        .sum();
    pre * grid.dt * sum
}

/// `V_g^{(A)} f` at every point, in input order.
pub fn stlct<W: Window + ?Sized>(
    params: &LctParams,
    mode: NormalizationMode,
    window: &W,
    f: &Signal,
    points: &[TfPoint],
) -> Result<SpectrogramSamples> {
    params.require_nonzero_b()?;
    if let Some(p) = points.iter().find(|p| !p.x.is_finite() || !p.mu.is_finite()) {
        return Err(Error::Malformed(format!("non-finite time-frequency point {p:?}")));
    }
    let grid = *f.grid();
    let out_grid = induced_grid(params, &grid)?;
    let pre = mode.prefactor(params.b);
    let cols = columns(points);
    let results: Vec<Result<Vec<(usize, Complex64)>>> = cols
        .par_iter()
        .map(|(x, idxs)| {
            let window_conj = window.conj_shifted(*x, &grid)?;
            let product: Vec<Complex64> = f.samples().iter().zip(&window_conj).map(|(a, b)| a * b).collect();
            let on_grid = idxs.iter().filter(|&&k| out_grid.index_of(points[k].mu).is_some()).count();
            let fast = if on_grid >= FAST_MIN_POINTS {
                Some(lct_fast(params, mode, &Signal::new(grid, product.clone())?)?)
            } else {
                None
            };
            Ok(idxs
                .iter()
                .map(|&k| {
                    let mu = points[k].mu;
                    let value = match (&fast, out_grid.index_of(mu)) {
                        (Some(col), Some(j)) => col.samples()[j],
                        _ => direct_value(params, pre, &grid, &product, mu),
                    };
                    (k, value)
                })
                .collect())
        })
        .collect();
    let mut values = vec![Complex64::new(0.0, 0.0); points.len()];
    for col in results {
        for (k, v) in col? {
            values[k] = v;
        }
    }
    Ok(SpectrogramSamples {
        params: *params,
        window: window.spec(),
        points: points.to_vec(),
        values: SpectrogramValues::Complex(values),
    })
}

/// Classical short-time Fourier transform `V_g f(x, ω) = Σ_k dt·f_k·conj(g(t_k − x))·e^{−iωt_k}`.
pub fn stft<W: Window + ?Sized>(window: &W, f: &Signal, points: &[TfPoint]) -> Result<Vec<Complex64>> {
    let grid = *f.grid();
    points
        .iter()
        .map(|p| {
            let g = window.conj_shifted(p.x, &grid)?;
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, t) in grid.points().enumerate() {
                let (s, c) = (p.mu * t).sin_cos();
                acc += f.samples()[k] * g[k] * Complex64::new(c, -s);
            }
            Ok(acc * grid.dt)
        })
        .collect()
}

/// STFT of `e^{−t²}` with window `e^{−t²}`: `√(π/2)·e^{−ixω/2}·e^{−x²/2}·e^{−ω²/8}`.
pub fn gaussian_gabor_closed_form(x: f64, omega: f64) -> Complex64 {
    let amp = (std::f64::consts::PI / 2.0).sqrt() * (-x * x / 2.0 - omega * omega / 8.0).exp();
    Complex64::from_polar(amp, -x * omega / 2.0)
}

/// Pointwise modulus; idempotent.
pub fn magnitudes(s: &SpectrogramSamples) -> SpectrogramSamples {
    SpectrogramSamples {
        values: SpectrogramValues::Magnitudes(s.values.moduli()),
        ..s.clone()
    }
}

/// `max |value − reference| / |reference|` over points with
/// `|reference| > 1e-9·max|reference|`; 0 if the reference vanishes.
pub fn max_relative_residual(value: &[Complex64], reference: &[Complex64]) -> f64 {
    let peak = reference.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        return value.iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    value
        .iter()
        .zip(reference)
        .filter(|(_, r)| r.norm() > REFERENCE_FLOOR * peak)
        .map(|(v, r)| (v - r).norm() / r.norm())
        .fold(0.0, f64::max)
}

fn complex_values(s: SpectrogramSamples) -> Vec<Complex64> {
    match s.values {
        SpectrogramValues::Complex(v) => v,
        SpectrogramValues::Magnitudes(v) => v.into_iter().map(Complex64::from).collect(),
    }
}

/// Residual of `V_g^{(A)} f(x, μ) = e^{iμ(dμ−x)/b}·V^{(B)}_{L_C g}(L_A f)(μ, dμ − x)`
/// with `B = (0, b, −1/b, 0)` and `C = (0, b, −1/b, d)`.
///
/// The right side lives on the induced grid of `A`, so every `μ` must be a
/// whole number of its steps. The relation holds in `Unitary` mode; in
/// `PaperKernel` mode the two sides differ by the constant `2π`.
pub fn check_fundamental_identity(
    params: &LctParams,
    mode: NormalizationMode,
    g: &Signal,
    f: &Signal,
    points: &[TfPoint],
) -> Result<f64> {
    params.require_nonzero_b()?;
    f.grid().ensure_matches(g.grid())?;
    let (b, d) = (params.b, params.d);
    let big_f = lct_fast(params, mode, f)?;
    let offending: Vec<String> = points
        .iter()
        .filter(|p| big_f.grid().index_of(p.mu).is_none())
        .map(|p| format!("({}, {})", p.x, p.mu))
        .collect();
    if !offending.is_empty() {
        return Err(Error::GridMismatch(format!(
            "mu off the transform grid (step {}) at points {}",
            big_f.grid().dt,
            offending.join(", ")
        )));
    }
    let lhs = complex_values(stlct(params, mode, g, f, points)?);
    let c_params = LctParams { a: 0.0, b, c: -1.0 / b, d };
    let b_params = LctParams { a: 0.0, b, c: -1.0 / b, d: 0.0 };
    let big_g = lct_fast(&c_params, mode, g)?;
    let swapped: Vec<TfPoint> = points.iter().map(|p| TfPoint::new(p.mu, d * p.mu - p.x)).collect();
    let inner = complex_values(stlct(&b_params, mode, &big_g, &big_f, &swapped)?);
    let rhs: Vec<Complex64> = points
        .iter()
        .zip(inner)
        .map(|(p, v)| v * Complex64::from_polar(1.0, p.mu * (d * p.mu - p.x) / b))
        .collect();
    Ok(max_relative_residual(&rhs, &lhs))
}

/// Residual of the covariance relation
/// `V_g^{(A)}(M_u^{(A)} T_τ f)(x, μ) = P(b)·e^{−id(u²−μ²)/(2b) + iτ(u−μ)/b}·V_g f(x − τ, (μ − u)/b)`
/// where `V_g` is the classical STFT and `P(b)` the mode prefactor. `τ` must be grid-aligned.
pub fn check_covariance<W: Window + ?Sized>(
    params: &LctParams,
    mode: NormalizationMode,
    window: &W,
    f: &Signal,
    u: f64,
    tau: f64,
    points: &[TfPoint],
) -> Result<f64> {
    params.require_nonzero_b()?;
    let (b, d) = (params.b, params.d);
    let moved = crate::lct::generalized_modulation(params, u, &crate::lct::translate(tau, f)?)?;
    let lhs = complex_values(stlct(params, mode, window, &moved, points)?);
    let shifted: Vec<TfPoint> = points.iter().map(|p| TfPoint::new(p.x - tau, (p.mu - u) / b)).collect();
    let classical = stft(window, f, &shifted)?;
    let pre = mode.prefactor(b);
    let rhs: Vec<Complex64> = points
        .iter()
        .zip(classical)
        .map(|(p, v)| {
            let phase = -d * (u * u - p.mu * p.mu) / (2.0 * b) + tau * (u - p.mu) / b;
            pre * Complex64::from_polar(1.0, phase) * v
        })
        .collect();
    Ok(max_relative_residual(&lhs, &rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::gaussian_mixture;
    use crate::windows::make_gaussian;
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::centered(1.0 / 16.0, 512).unwrap()
    }

    fn shear() -> LctParams {
        LctParams::new(1.0, 1.0, 0.0, 1.0).unwrap()
    }

    fn complex(s: &SpectrogramSamples) -> Vec<Complex64> {
        complex_values(s.clone())
    }

    fn square(xs: &[f64], mus: &[f64]) -> Vec<TfPoint> {
        xs.iter().flat_map(|&x| mus.iter().map(move |&mu| TfPoint::new(x, mu))).collect()
    }

    #[test]
    fn zero_signal_gives_zero() {
        let pts = square(&[0.0, 0.5], &[-1.0, 0.3]);
        let s = stlct(&shear(), NormalizationMode::Unitary, &make_gaussian(1.0, grid()).unwrap(), &Signal::zeros(grid()), &pts)
            .unwrap();
        assert!(complex(&s).iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn fourier_case_is_the_stft() {
        let f = gaussian_mixture(3, grid());
        let g = make_gaussian(0.5, grid()).unwrap();
        let step = induced_grid(&LctParams::FOURIER, &grid()).unwrap().dt;
        let on: Vec<f64> = (-10..10).map(|j| j as f64 * step).collect();
        let off = [-2.3, 0.01, 1.7];
        for mus in [&on[..], &off[..]] {
            let pts = square(&[-1.0, 0.0, 0.75], mus);
            let s = stlct(&LctParams::FOURIER, NormalizationMode::PaperKernel, &g, &f, &pts).unwrap();
            let reference = stft(&g, &f, &pts).unwrap();
            assert!(max_relative_residual(&complex(&s), &reference) <= 1e-10);
        }
    }

    #[test]
    fn signal_and_spec_windows_agree_on_aligned_shifts() {
        let f = gaussian_mixture(4, grid());
        let spec = WindowSpec::Gaussian { gamma: 0.7 };
        let sampled = spec.sample(grid()).unwrap();
        let pts = square(&[-0.5, 0.25, 1.0], &[-1.0, 0.0, 2.0]);
        let a = stlct(&shear(), NormalizationMode::Unitary, &spec, &f, &pts).unwrap();
        let b = stlct(&shear(), NormalizationMode::Unitary, &sampled, &f, &pts).unwrap();
        assert!(max_relative_residual(&complex(&a), &complex(&b)) <= 1e-12);
        assert_eq!(a.window, Some(spec.clone()));
        assert_eq!(b.window, None);
        let bad = [TfPoint::new(0.03, 0.0)];
        assert!(matches!(
            stlct(&shear(), NormalizationMode::Unitary, &sampled, &f, &bad),
            Err(Error::Misaligned { .. })
        ));
        assert!(stlct(&shear(), NormalizationMode::Unitary, &spec, &f, &bad).is_ok());
        let other = Signal::zeros(Grid::centered(0.1, 512).unwrap());
        assert!(matches!(
            stlct(&shear(), NormalizationMode::Unitary, &other, &f, &pts),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn fast_and_direct_columns_agree() {
        let f = gaussian_mixture(5, grid());
        let g = WindowSpec::Gaussian { gamma: 1.0 };
        let step = induced_grid(&shear(), &grid()).unwrap().dt;
        let many: Vec<f64> = (-12..12).map(|j| j as f64 * step).collect();
        let pts = square(&[0.5], &many);
        let fast = stlct(&shear(), NormalizationMode::Unitary, &g, &f, &pts).unwrap();
        let one_by_one: Vec<Complex64> = pts
            .iter()
            .map(|p| complex(&stlct(&shear(), NormalizationMode::Unitary, &g, &f, &[*p]).unwrap())[0])
            .collect();
        assert!(max_relative_residual(&complex(&fast), &one_by_one) <= 1e-11);
    }

    #[test]
    fn closed_form_examples() {
        let v = gaussian_gabor_closed_form(0.0, 0.0);
        assert!((v.re - (PI / 2.0).sqrt()).abs() < 1e-15 && v.im == 0.0);
        assert!((v.re - 1.2533).abs() < 1e-4);
        for &(x, w) in &[(0.3, 1.2), (-1.0, 2.5), (2.0, -0.4)] {
            let a = gaussian_gabor_closed_form(x, w).norm();
            let b = gaussian_gabor_closed_form(-x, -w).norm();
            assert_eq!(a, b);
        }
        let phi = WindowSpec::Gaussian { gamma: 1.0 };
        let f = phi.sample(grid()).unwrap();
        let axis: Vec<f64> = (-4..=4).map(|j| j as f64 * 0.5).collect();
        let freqs: Vec<f64> = (-4..=4).map(|j| j as f64).collect();
        let pts = square(&axis, &freqs);
        let s = stlct(&LctParams::FOURIER, NormalizationMode::PaperKernel, &phi, &f, &pts).unwrap();
        let closed: Vec<Complex64> = pts.iter().map(|p| gaussian_gabor_closed_form(p.x, p.mu)).collect();
        assert!(max_relative_residual(&complex(&s), &closed) <= 1e-6);
    }

    #[test]
    fn half_constant_is_not_the_closed_form() {
        // ∫e^{−2t²}dt by adaptive subdivision of the trapezoid rule
        let mut h = 0.5;
        let mut prev = 0.0;
        let integral = loop {
            let n = (16.0 / h) as i64;
            let s: f64 = (-n / 2..=n / 2).map(|k| (-2.0 * (k as f64 * h).powi(2)).exp()).sum::<f64>() * h;
            if (s - prev).abs() < 1e-15 {
                break s;
            }
            prev = s;
            h /= 2.0;
        };
        assert!((integral - gaussian_gabor_closed_form(0.0, 0.0).re).abs() < 1e-12);
        assert!((integral - 0.5).abs() > 0.7);
    }

    #[test]
    fn gaussian_peak_matches_dense_scan() {
        let phi = WindowSpec::Gaussian { gamma: 1.0 };
        let f = phi.sample(grid()).unwrap();
        let xs: Vec<f64> = (-16..=16).map(|j| j as f64 / 8.0).collect();
        let mus: Vec<f64> = (-40..=40).map(|j| j as f64 / 10.0).collect();
        let pts = square(&xs, &mus);
        let mags = magnitudes(&stlct(&shear(), NormalizationMode::Unitary, &phi, &f, &pts).unwrap()).values.moduli();
        let best = (0..pts.len()).max_by(|&i, &j| mags[i].total_cmp(&mags[j])).unwrap();
        assert_eq!(pts[best].x, 0.0);
        // |V| is a Gaussian in (x, μ) centred at the origin
        assert_eq!(pts[best].mu, 0.0);
    }

    #[test]
    fn decays_along_rays_from_peak() {
        let phi = WindowSpec::Gaussian { gamma: 1.0 };
        let f = phi.sample(grid()).unwrap();
        for ray in 0..8 {
            let angle = ray as f64 * PI / 4.0;
            let pts: Vec<TfPoint> = (0..40)
                .map(|r| {
                    let r = r as f64 * 0.1;
                    TfPoint::new(r * angle.cos(), r * angle.sin())
                })
                .collect();
            let mags = stlct(&shear(), NormalizationMode::Unitary, &phi, &f, &pts).unwrap().values.moduli();
            for w in mags.windows(2) {
                assert!(w[1] <= w[0] * (1.0 + 1e-12), "ray {ray}");
            }
        }
    }

    #[test]
    fn magnitude_examples() {
        let f = gaussian_mixture(6, grid());
        let g = WindowSpec::Gaussian { gamma: 0.5 };
        let pts = square(&[-1.0, 0.0, 1.3], &[-2.0, 0.5, 1.1]);
        let s = stlct(&shear(), NormalizationMode::Unitary, &g, &f, &pts).unwrap();
        let m = magnitudes(&s);
        assert_eq!(magnitudes(&m), m);
        let zero = stlct(&shear(), NormalizationMode::Unitary, &g, &Signal::zeros(grid()), &pts).unwrap();
        assert!(magnitudes(&zero).values.moduli().iter().all(|&v| v == 0.0));
        for alpha in [0.3, PI / 2.0, 2.0] {
            let phased = f.scale(Complex64::from_polar(1.0, alpha));
            let mp = magnitudes(&stlct(&shear(), NormalizationMode::Unitary, &g, &phased, &pts).unwrap());
            for (a, b) in mp.values.moduli().iter().zip(m.values.moduli()) {
                assert!((a - b).abs() <= 1e-12 * b.max(1.0));
            }
        }
    }

    #[test]
    fn csv_layout() {
        let f = gaussian_mixture(7, grid());
        let s = stlct(&shear(), NormalizationMode::Unitary, &WindowSpec::Gaussian { gamma: 1.0 }, &f, &[TfPoint::new(0.5, -1.0)])
            .unwrap();
        let csv = s.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("x,mu,re,im,mag"));
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 5);
        assert_eq!(row[0], "5.0000000000000000e-1");
        let re: f64 = row[2].parse().unwrap();
        assert_eq!(re, complex(&s)[0].re);
        let mcsv = magnitudes(&s).to_csv();
        assert!(mcsv.lines().nth(1).unwrap().contains(",,"));
    }

    fn identity_points(params: &LctParams) -> Vec<TfPoint> {
        let step = induced_grid(params, &grid()).unwrap().dt;
        let xs: Vec<f64> = (-4..4).map(|j| j as f64 * 0.5 + 0.25).collect();
        let mus: Vec<f64> = (-4..4).map(|j| j as f64 * step).collect();
        square(&xs, &mus)
    }

    #[test]
    fn fundamental_identity_examples() {
        let f = gaussian_mixture(8, grid());
        let g = make_gaussian(0.5, grid()).unwrap();
        let r = check_fundamental_identity(&LctParams::FOURIER, NormalizationMode::Unitary, &g, &f, &identity_points(&LctParams::FOURIER))
            .unwrap();
        assert!(r <= 1e-6, "fourier: {r:e}");
        let r = check_fundamental_identity(&shear(), NormalizationMode::Unitary, &g, &f, &identity_points(&shear())).unwrap();
        assert!(r <= 1e-5, "shear: {r:e}");
        let general = LctParams::new(0.5, -1.5, 0.5, 0.5).unwrap();
        let r = check_fundamental_identity(&general, NormalizationMode::Unitary, &g, &f, &identity_points(&general)).unwrap();
        assert!(r <= 1e-5, "general: {r:e}");
        let r = check_fundamental_identity(&shear(), NormalizationMode::Unitary, &g, &Signal::zeros(grid()), &identity_points(&shear()))
            .unwrap();
        assert_eq!(r, 0.0);
        let bad = [TfPoint::new(0.0, 0.123)];
        let err = check_fundamental_identity(&shear(), NormalizationMode::Unitary, &g, &f, &bad).unwrap_err();
        assert!(err.to_string().contains("0.123"));
    }

    #[test]
    fn fundamental_identity_kernel_mode_is_off_by_two_pi() {
        let f = gaussian_mixture(9, grid());
        let g = make_gaussian(0.5, grid()).unwrap();
        let r = check_fundamental_identity(&shear(), NormalizationMode::PaperKernel, &g, &f, &identity_points(&shear())).unwrap();
        assert!((r - (2.0 * PI - 1.0)).abs() < 1e-5, "{r}");
    }

    #[test]
    fn covariance_examples() {
        let f = gaussian_mixture(10, grid());
        let g = WindowSpec::Gaussian { gamma: 0.5 };
        let pts = square(&[-1.0, -0.3, 0.4, 1.2], &[-1.5, -0.2, 0.6, 1.9]);
        let r = check_covariance(&LctParams::FOURIER, NormalizationMode::PaperKernel, &g, &f, 0.0, 0.0, &pts).unwrap();
        assert!(r <= 1e-6);
        let r = check_covariance(&shear(), NormalizationMode::Unitary, &g, &f, 1.0, 0.0, &pts).unwrap();
        assert!(r <= 1e-5);
        let r = check_covariance(&LctParams::FOURIER, NormalizationMode::Unitary, &g, &f, 0.7, 0.375, &pts).unwrap();
        assert!(r <= 1e-8);
        let neg = LctParams::new(0.5, -1.5, 0.5, 0.5).unwrap();
        let r = check_covariance(&neg, NormalizationMode::PaperKernel, &g, &f, -0.4, 0.5, &pts).unwrap();
        assert!(r <= 1e-8);
        assert!(check_covariance(&shear(), NormalizationMode::Unitary, &g, &f, 1.0, 0.01, &pts).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(16))]

            #[test]
            fn linear_in_f(seed in 0u64..500, ar in -2.0..2.0f64, ai in -2.0..2.0f64, x in -2.0..2.0f64, mu in -3.0..3.0f64) {
                let g = WindowSpec::Gaussian { gamma: 0.8 };
                let f = gaussian_mixture(seed, grid());
                let h = gaussian_mixture(seed + 1000, grid());
                let alpha = Complex64::new(ar, ai);
                let pts = [TfPoint::new(x, mu), TfPoint::new(-x, 0.5 * mu)];
                let combo = f.combine(alpha, &h, Complex64::new(1.0, 0.0)).unwrap();
                let lhs = complex(&stlct(&shear(), NormalizationMode::Unitary, &g, &combo, &pts).unwrap());
                let vf = complex(&stlct(&shear(), NormalizationMode::Unitary, &g, &f, &pts).unwrap());
                let vh = complex(&stlct(&shear(), NormalizationMode::Unitary, &g, &h, &pts).unwrap());
                for k in 0..2 {
                    let want = alpha * vf[k] + vh[k];
                    prop_assert!((lhs[k] - want).norm() <= 1e-12 * (1.0 + want.norm()));
                }
            }

            #[test]
            fn global_phase_invariance(seed in 0u64..500, alpha in 0.0..6.3f64) {
                let g = WindowSpec::Hermite { k: 1 };
                let f = gaussian_mixture(seed, grid());
                let pts = square(&[-0.5, 0.5], &[-1.0, 1.0]);
                let a = stlct(&shear(), NormalizationMode::Unitary, &g, &f, &pts).unwrap().values.moduli();
                let phased = f.scale(Complex64::from_polar(1.0, alpha));
                let b = stlct(&shear(), NormalizationMode::Unitary, &g, &phased, &pts).unwrap().values.moduli();
                for (x, y) in a.iter().zip(&b) {
                    prop_assert!((x - y).abs() <= 1e-12 * x.max(1.0));
                }
            }
        }
    }
}
