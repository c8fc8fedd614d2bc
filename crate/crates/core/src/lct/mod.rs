//! The linear canonical transform and its companion operators.
//!
//! For `A = (a, b, c, d)` with `ad − bc = 1` and `b ≠ 0` the transform is
//!
//! ```text
//! L_A f(μ) = P(b) ∫ exp(i(a t²/(2b) − tμ/b + d μ²/(2b))) f(t) dt
//!          = P(b) e^{i d μ²/(2b)} 𝓕(f·e^{i a t²/(2b)})(μ/b)
//! ```
//!
//! with the 2π-free Fourier transform `𝓕f(ω) = ∫ f(t) e^{−iωt} dt`. The prefactor
//! `P(b)` depends on the [`NormalizationMode`]:
//!
//! | mode          | `P(b)`         | property                                   |
//! |---------------|----------------|--------------------------------------------|
//! | `PaperKernel` | `1/√b`         | `A = (0,1,−1,0)` gives exactly `𝓕`          |
//! | `Unitary`     | `1/√(2πb)`     | `‖L_A f‖₂ = ‖f‖₂` (discrete Parseval holds) |
//!
//! Square roots of negative `b` take the principal branch, `√b = i√|b|`, in
//! every code path.
//!
//! The chirp convolution `f *_A g` uses the same constant `κ = P(b)` as the
//! transform; with that choice `L_A(f *_A g) = e^{−i d μ²/(2b)} L_A f · L_A g`
//! holds in both modes.

use std::f64::consts::PI;

use log::warn;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier;
use crate::signal::{Grid, Signal};

pub mod identities;

pub use identities::{
    check_convolution_theorem, check_lemma22, check_lemma26, relative_l2_residual, RelationSetup,
};

/// Tolerance on `|ad − bc − 1|`.
pub const DET_TOL: f64 = 1e-12;
/// Below this magnitude `b` is treated as zero.
pub const B_ZERO_TOL: f64 = 1e-12;
/// Edge samples above this fraction of the peak trigger a truncation warning.
pub const EDGE_DECAY: f64 = 1e-10;

/// The parameter matrix `A = [[a, b], [c, d]]`, `det A = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct LctParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

#[derive(Deserialize)]
struct RawParams {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl TryFrom<RawParams> for LctParams {
    type Error = Error;

    fn try_from(r: RawParams) -> Result<Self> {
        LctParams::new(r.a, r.b, r.c, r.d)
    }
}

impl LctParams {
    /// `A = (0, 1, −1, 0)`: the Fourier transform.
    pub const FOURIER: LctParams = LctParams {
        a: 0.0,
        b: 1.0,
        c: -1.0,
        d: 0.0,
    };
    /// `A = (1, 0, 0, 1)`: the identity.
    pub const IDENTITY: LctParams = LctParams {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let p = LctParams { a, b, c, d };
        if ![a, b, c, d].iter().all(|v| v.is_finite()) {
            return Err(Error::Parameter(format!("non-finite entry in {p:?}")));
        }
        let det = p.det();
        if (det - 1.0).abs() > DET_TOL {
            return Err(Error::Parameter(format!(
                "determinant ad - bc = {det} must equal 1"
            )));
        }
        Ok(p)
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    /// `A⁻¹ = (d, −b, −c, a)`.
    pub fn inverse(&self) -> LctParams {
        LctParams {
            a: self.d,
            b: -self.b,
            c: -self.c,
            d: self.a,
        }
    }

    pub fn has_zero_b(&self) -> bool {
        self.b.abs() <= B_ZERO_TOL
    }

    pub(crate) fn require_nonzero_b(&self) -> Result<()> {
        if self.has_zero_b() {
            Err(Error::Parameter(format!(
                "b = {} must be nonzero; use lct_b_zero",
                self.b
            )))
        } else {
            Ok(())
        }
    }

    /// Exponent `a t²/(2b) − tμ/b + d μ²/(2b)` shared by the kernel and the modulation.
    #[inline]
    pub(crate) fn kernel_phase(&self, t: f64, mu: f64) -> f64 {
        (self.a * t * t - 2.0 * t * mu + self.d * mu * mu) / (2.0 * self.b)
    }
}

/// Prefactor convention of the transform kernel.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizationMode {
    /// `1/√b`.
    #[serde(rename = "paper")]
    PaperKernel,
    /// `1/√(2πb)`.
    #[default]
    Unitary,
}

impl NormalizationMode {
    /// `1/√b` or `1/√(2πb)`, principal branch.
    pub fn prefactor(self, b: f64) -> Complex64 {
        let scaled = match self {
            NormalizationMode::PaperKernel => b,
            NormalizationMode::Unitary => 2.0 * PI * b,
        };
        Complex64::new(scaled, 0.0).sqrt().inv()
    }
}

impl std::str::FromStr for NormalizationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(NormalizationMode::PaperKernel),
            "unitary" => Ok(NormalizationMode::Unitary),
            other => Err(Error::Malformed(format!(
                "unknown normalization mode {other:?}"
            ))),
        }
    }
}

#[inline]
fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// `M_μ^{(A)} f(t) = exp(−i(a t²/(2b) − tμ/b + d μ²/(2b))) f(t)`.
pub fn generalized_modulation(params: &LctParams, mu: f64, f: &Signal) -> Result<Signal> {
    params.require_nonzero_b()?;
    Ok(f.map(|t, z| z * cis(-params.kernel_phase(t, mu))))
}

/// Classical modulation `M_ν f(t) = e^{iνt} f(t)`.
pub fn modulate(nu: f64, f: &Signal) -> Signal {
    f.map(|t, z| z * cis(nu * t))
}

/// `T_τ f(t) = f(t − τ)`; `τ` must be a whole number of grid steps.
/// Samples shifted in from outside the grid are zero.
pub fn translate(tau: f64, f: &Signal) -> Result<Signal> {
    let shift = f.grid().steps_for(tau)?;
    Ok(shift_samples(f, shift))
}

pub(crate) fn shift_samples(f: &Signal, shift: i64) -> Signal {
    let n = f.len() as i64;
    let src = f.samples();
    let samples = (0..n)
        .map(|j| {
            let k = j - shift;
            if (0..n).contains(&k) {
                src[k as usize]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Signal::new(*f.grid(), samples).expect("shift keeps length and finiteness")
}

/// Reflection `R f(t) = f(−t)`. Requires the origin on the grid; points whose
/// mirror image falls off the grid are zero.
pub fn reflect(f: &Signal) -> Result<Signal> {
    let grid = f.grid();
    let h = grid
        .origin_offset()
        .ok_or_else(|| Error::GridMismatch(format!("reflection needs the origin on {grid:?}")))?;
    let n = f.len() as i64;
    let src = f.samples();
    let samples = (0..n)
        .map(|j| {
            let k = 2 * h - j;
            if (0..n).contains(&k) {
                src[k as usize]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    Signal::new(*grid, samples)
}

/// Whittaker–Shannon interpolation of `f` at `x`.
pub(crate) fn sinc_interpolate(f: &Signal, x: f64) -> Complex64 {
    let grid = f.grid();
    let z = (x - grid.t0) / grid.dt;
    let nearest = z.round();
    if (z - nearest).abs() < 1e-12 {
        return if nearest >= 0.0 && (nearest as usize) < f.len() {
            f.samples()[nearest as usize]
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
    // sin(π(z−k)) = (−1)^k sin(πz)
    let s = (PI * z).sin() / PI;
    let sum: Complex64 = f
        .samples()
        .iter()
        .enumerate()
        .map(|(k, &v)| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            v * (sign / (z - k as f64))
        })
        .sum();
    sum * s
}

/// `D_s f(t) = s^{−1/2} f(t/s)` on the same grid, via sinc interpolation.
pub fn dilation(s: f64, f: &Signal) -> Result<Signal> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Parameter(format!(
            "dilation factor must be positive, got {s}"
        )));
    }
    let scale = s.powf(-0.5);
    Ok(Signal::from_fn(*f.grid(), |t| {
        sinc_interpolate(f, t / s) * scale
    }))
}

/// Output grid of [`lct_fast`]: `μ_j = b·ω_j` over the Fourier lattice of `grid`,
/// i.e. a centred grid with step `2π|b|/(n·dt)`.
pub fn induced_grid(params: &LctParams, grid: &Grid) -> Result<Grid> {
    params.require_nonzero_b()?;
    Grid::centered(
        2.0 * PI * params.b.abs() / (grid.n as f64 * grid.dt),
        grid.n,
    )
}

fn warn_on_edges(f: &Signal, what: &str) {
    let peak = f.peak();
    if peak == 0.0 {
        return;
    }
    let s = f.samples();
    let edge = s[0].norm().max(s[s.len() - 1].norm());
    if edge > EDGE_DECAY * peak {
        warn!(
            "{what}: edge samples at {:.3e} of peak; truncation error may dominate",
            edge / peak
        );
    }
}

/// Reference quadrature `Σ_k dt·K_A(t_k, μ_j) f_k` on an arbitrary output grid. O(n·m).
pub fn lct_direct(
    params: &LctParams,
    mode: NormalizationMode,
    f: &Signal,
    out: &Grid,
) -> Result<Signal> {
    params.require_nonzero_b()?;
    warn_on_edges(f, "lct_direct");
    let pre = mode.prefactor(params.b) * f.grid().dt;
    let tgrid = f.grid();
    let samples = out
        .points()
        .map(|mu| {
            let sum: Complex64 = f
                .samples()
                .iter()
                .enumerate()
                .map(|(k, &v)| v * cis(params.kernel_phase(tgrid.point(k), mu)))
                .sum();
            pre * sum
        })
        .collect();
    Signal::new(*out, samples)
}

/// Chirp–FFT–chirp evaluation of `L_A f` on [`induced_grid`]. O(n log n).
pub fn lct_fast(params: &LctParams, mode: NormalizationMode, f: &Signal) -> Result<Signal> {
    let out = induced_grid(params, f.grid())?;
    let chirped: Vec<Complex64> = f
        .grid()
        .points()
        .zip(f.samples())
        .map(|(t, &v)| v * cis(params.a * t * t / (2.0 * params.b)))
        .collect();
    let omegas: Vec<f64> = out.points().map(|mu| mu / params.b).collect();
    let spectrum = fourier::riemann_on_dual(&chirped, f.grid(), &omegas);
    let pre = mode.prefactor(params.b);
    let samples = out
        .points()
        .zip(spectrum)
        .map(|(mu, v)| pre * cis(params.d * mu * mu / (2.0 * params.b)) * v)
        .collect();
    Signal::new(out, samples)
}

/// The `b = 0` branch: `√d·e^{i c d μ²/2}·f(dμ)`, resampled with sinc interpolation.
pub fn lct_b_zero(params: &LctParams, f: &Signal) -> Result<Signal> {
    if !params.has_zero_b() {
        return Err(Error::Parameter(format!(
            "b = {} is nonzero; use lct_fast",
            params.b
        )));
    }
    let d = params.d;
    let root = Complex64::new(d, 0.0).sqrt();
    Ok(Signal::from_fn(*f.grid(), |mu| {
        root * cis(params.c * d * mu * mu / 2.0) * sinc_interpolate(f, d * mu)
    }))
}

/// Adjoint of [`lct_fast`]: kernel `conj(P(b))·exp(−i(a t²/(2b) − tμ/b + d μ²/(2b)))`,
/// which is the `A⁻¹ = (d, −b, −c, a)` kernel with the conjugate prefactor.
///
/// In `Unitary` mode this inverts [`lct_fast`]. The output lives on the centred
/// grid whose induced grid is `big_f`'s grid.
pub fn lct_inverse(params: &LctParams, mode: NormalizationMode, big_f: &Signal) -> Result<Signal> {
    params.require_nonzero_b()?;
    let inv = params.inverse();
    let out = induced_grid(&inv, big_f.grid())?;
    let dechirped: Vec<Complex64> = big_f
        .grid()
        .points()
        .zip(big_f.samples())
        .map(|(mu, &v)| v * cis(-params.d * mu * mu / (2.0 * params.b)))
        .collect();
    // Σ_j r_j e^{+i t μ_j / b} = Σ_j r_j e^{−i μ_j ω}, ω = −t/b
    let omegas: Vec<f64> = out.points().map(|t| -t / params.b).collect();
    let sums = fourier::riemann_on_dual(&dechirped, big_f.grid(), &omegas);
    let pre = mode.prefactor(params.b).conj();
    let samples = out
        .points()
        .zip(sums)
        .map(|(t, v)| pre * cis(-params.a * t * t / (2.0 * params.b)) * v)
        .collect();
    Signal::new(out, samples)
}

/// Chirp convolution `(f *_A g)(t) = κ·conj(λ_A(t))·(f_A * g_A)(t)` with
/// `λ_A(t) = e^{i a t²/(2b)}`, `f_A = λ_A f`, and `κ = P(b)` of `mode`.
///
/// The grid must contain the origin so that `t_i − t_k` is again a grid point.
pub fn chirp_convolve(
    params: &LctParams,
    mode: NormalizationMode,
    f: &Signal,
    g: &Signal,
) -> Result<Signal> {
    params.require_nonzero_b()?;
    f.grid().ensure_matches(g.grid())?;
    let grid = *f.grid();
    let h = grid
        .origin_offset()
        .filter(|h| (0..grid.n as i64).contains(h))
        .ok_or_else(|| {
            Error::GridMismatch(format!("chirp convolution needs the origin on {grid:?}"))
        })? as usize;
    let chirp = |t: f64| cis(params.a * t * t / (2.0 * params.b));
    let fa: Vec<_> = grid
        .points()
        .zip(f.samples())
        .map(|(t, &v)| chirp(t) * v)
        .collect();
    let ga: Vec<_> = grid
        .points()
        .zip(g.samples())
        .map(|(t, &v)| chirp(t) * v)
        .collect();
    let full = fourier::linear_convolution(&fa, &ga);
    let kappa = mode.prefactor(params.b) * grid.dt;
    let samples = grid
        .points()
        .enumerate()
        .map(|(i, t)| kappa * chirp(t).conj() * full[i + h])
        .collect();
    Signal::new(grid, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{gaussian_mixture, inner_product, l2_norm};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn gaussian(grid: Grid, gamma: f64, center: f64) -> Signal {
        Signal::from_fn(grid, |t| c((-gamma * (t - center).powi(2)).exp(), 0.0))
    }

    fn mixture(seed: u64, grid: Grid) -> Signal {
        gaussian_mixture(seed, grid)
    }

    fn rel(a: &Signal, b: &Signal) -> f64 {
        relative_l2_residual(a, b).unwrap()
    }

    // Adaptive Simpson on a real integrand, used as an independent oracle.
    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn rec(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 50)
    }

    #[test]
    fn params_validate_determinant() {
        assert!(LctParams::new(1.0, 1.0, 0.0, 1.0).is_ok());
        let err = LctParams::new(1.0, 1.0, 1.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("determinant"));
        let json = r#"{"a":0.0,"b":1.0,"c":-1.0,"d":0.0}"#;
        assert_eq!(
            serde_json::from_str::<LctParams>(json).unwrap(),
            LctParams::FOURIER
        );
        assert!(serde_json::from_str::<LctParams>(r#"{"a":2.0,"b":1.0,"c":0.0,"d":1.0}"#).is_err());
        let inv = LctParams::new(2.0, 0.5, -2.0, 0.0).unwrap().inverse();
        assert_eq!((inv.a, inv.b, inv.c, inv.d), (0.0, -0.5, 2.0, 2.0));
    }

    #[test]
    fn prefactor_branches() {
        let p = NormalizationMode::PaperKernel.prefactor(4.0);
        assert!((p - c(0.5, 0.0)).norm() < 1e-15);
        // √(−4) = 2i, so 1/√(−4) = −i/2
        let p = NormalizationMode::PaperKernel.prefactor(-4.0);
        assert!((p - c(0.0, -0.5)).norm() < 1e-15);
        let u = NormalizationMode::Unitary.prefactor(1.0);
        assert!((u.re - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn modulation_examples() {
        let grid = Grid::centered(0.05, 128).unwrap();
        let f = mixture(1, grid);
        let out = generalized_modulation(&LctParams::FOURIER, 1.7, &f).unwrap();
        let classical = modulate(1.7, &f);
        assert!(rel(&out, &classical) < 1e-14);

        let a0 = LctParams::new(0.0, 2.0, -0.5, 0.3).unwrap();
        assert_eq!(generalized_modulation(&a0, 0.0, &f).unwrap(), f);

        let a = LctParams::new(1.3, -0.7, 0.2, (1.0 + -0.7 * 0.2) / 1.3).unwrap();
        let out = generalized_modulation(&a, 2.4, &f).unwrap();
        for (x, y) in out.samples().iter().zip(f.samples()) {
            assert!((x.norm() - y.norm()).abs() <= 1e-15 * y.norm().max(1.0));
        }
        assert!(generalized_modulation(&LctParams::IDENTITY, 1.0, &f).is_err());
    }

    #[test]
    fn translate_examples() {
        let grid = Grid::centered(0.1, 32).unwrap();
        let f = mixture(2, grid);
        assert_eq!(translate(0.0, &f).unwrap(), f);

        let mut imp = vec![c(0.0, 0.0); 32];
        imp[10] = c(1.0, 0.0);
        let imp = Signal::new(grid, imp).unwrap();
        let moved = translate(0.1, &imp).unwrap();
        assert_eq!(moved.samples()[11], c(1.0, 0.0));
        assert_eq!(moved.samples()[10], c(0.0, 0.0));

        let back = translate(-0.3, &translate(0.3, &f).unwrap()).unwrap();
        for k in 3..29 {
            assert_eq!(back.samples()[k], f.samples()[k]);
        }

        match translate(0.27, &f) {
            Err(Error::Misaligned { nearest, .. }) => assert!((nearest - 0.3).abs() < 1e-12),
            other => panic!("expected misalignment, got {other:?}"),
        }
    }

    #[test]
    fn dilation_examples() {
        let grid = Grid::centered(0.05, 512).unwrap();
        let f = gaussian(grid, 1.0, 0.0);
        let same = dilation(1.0, &f).unwrap();
        assert!(rel(&same, &f) < 1e-12);

        let d2 = dilation(2.0, &f).unwrap();
        let expected = Signal::from_fn(grid, |t| c(2f64.powf(-0.5) * (-t * t / 4.0).exp(), 0.0));
        for k in 128..384 {
            assert!((d2.samples()[k] - expected.samples()[k]).norm() < 1e-6);
        }
        let narrow = dilation(0.5, &f).unwrap();
        assert!((l2_norm(&narrow) - l2_norm(&f)).abs() < 1e-3 * l2_norm(&f));
        assert!((l2_norm(&d2) - l2_norm(&f)).abs() < 1e-3 * l2_norm(&f));
        assert!(dilation(0.0, &f).is_err());
        assert!(dilation(-1.0, &f).is_err());
    }

    #[test]
    fn direct_examples() {
        let grid = Grid::centered(0.0625, 256).unwrap();
        let out = Grid::centered(0.1, 81).unwrap();
        let zero = lct_direct(
            &LctParams::FOURIER,
            NormalizationMode::Unitary,
            &Signal::zeros(grid),
            &out,
        )
        .unwrap();
        assert!(zero.is_zero());

        // PaperKernel mode with A = (0,1,−1,0) is the plain Riemann sum of ∫ f e^{−iμt} dt
        let f = mixture(3, grid);
        let lct = lct_direct(
            &LctParams::FOURIER,
            NormalizationMode::PaperKernel,
            &f,
            &out,
        )
        .unwrap();
        for (j, mu) in out.points().enumerate() {
            let mut acc = c(0.0, 0.0);
            for (k, t) in grid.points().enumerate() {
                acc += f.samples()[k] * c((mu * t).cos(), -(mu * t).sin());
            }
            acc *= grid.dt;
            assert!((acc - lct.samples()[j]).norm() <= 1e-12 * acc.norm().max(1.0));
        }

        // Gaussian e^{−t²/2} is a fixed point of the unitary Fourier transform
        let g = gaussian(grid, 0.5, 0.0);
        let out = Grid::new(-4.0, 0.125, 65).unwrap();
        let lct = lct_direct(&LctParams::FOURIER, NormalizationMode::Unitary, &g, &out).unwrap();
        for (j, mu) in out.points().enumerate() {
            let re = adaptive_simpson(
                &|t| (-t * t / 2.0).exp() * (mu * t).cos(),
                -12.0,
                12.0,
                1e-13,
            );
            let im = adaptive_simpson(
                &|t| -(-t * t / 2.0).exp() * (mu * t).sin(),
                -12.0,
                12.0,
                1e-13,
            );
            let oracle = c(re, im) / (2.0 * PI).sqrt();
            assert!((oracle.re - (-mu * mu / 2.0).exp()).abs() < 1e-9);
            let got = lct.samples()[j];
            assert!(
                (got - oracle).norm() <= 1e-8 * oracle.norm(),
                "mu={mu} got {got} oracle {oracle}"
            );
        }
        assert!(lct_direct(&LctParams::IDENTITY, NormalizationMode::Unitary, &g, &out).is_err());
    }

    #[test]
    fn fast_matches_direct() {
        let grid = Grid::centered(1.0 / 16.0, 512).unwrap();
        let cases = [
            LctParams::FOURIER,
            LctParams::new(1.0, 1.0, 0.0, 1.0).unwrap(),
            LctParams::new(2.0, 0.5, -2.0, 0.0).unwrap(),
            LctParams::new(0.5, -1.5, 0.5, 0.5).unwrap(),
        ];
        for (seed, params) in cases.iter().enumerate() {
            let f = mixture(10 + seed as u64, grid);
            for mode in [NormalizationMode::Unitary, NormalizationMode::PaperKernel] {
                let fast = lct_fast(params, mode, &f).unwrap();
                let direct = lct_direct(params, mode, &f, fast.grid()).unwrap();
                assert!(rel(&fast, &direct) < 1e-10, "{params:?}");
            }
        }
        let zero = lct_fast(&cases[1], NormalizationMode::Unitary, &Signal::zeros(grid)).unwrap();
        assert!(zero.is_zero());
        assert!(lct_fast(
            &LctParams::IDENTITY,
            NormalizationMode::Unitary,
            &Signal::zeros(grid)
        )
        .is_err());
    }

    #[test]
    fn fast_fourier_case_is_the_dft() {
        let grid = Grid::centered(0.1, 64).unwrap();
        let f = mixture(4, grid);
        let fast = lct_fast(&LctParams::FOURIER, NormalizationMode::PaperKernel, &f).unwrap();
        let step = 2.0 * PI / (64.0 * 0.1);
        // textbook DFT at centred bins, shifted to the grid origin
        for (j, jj) in (-32i64..32).enumerate() {
            let w = jj as f64 * step;
            let mut acc = c(0.0, 0.0);
            for k in 0..64 {
                let ang = -2.0 * PI * (jj * k as i64) as f64 / 64.0;
                acc += f.samples()[k] * cis(ang);
            }
            acc *= cis(-w * grid.t0) * grid.dt;
            assert!((acc - fast.samples()[j]).norm() <= 1e-10 * acc.norm().max(1.0));
        }
    }

    #[test]
    fn b_zero_examples() {
        let grid = Grid::centered(0.05, 400).unwrap();
        let f = mixture(5, grid);
        let same = lct_b_zero(&LctParams::IDENTITY, &f).unwrap();
        assert!(rel(&same, &f) < 1e-10);

        let chirp = LctParams::new(1.0, 0.0, 0.7, 1.0).unwrap();
        let out = lct_b_zero(&chirp, &f).unwrap();
        let expected = f.map(|mu, z| z * cis(0.7 * mu * mu / 2.0));
        assert!(rel(&out, &expected) < 1e-12);

        let g = gaussian(grid, 1.0, 0.0);
        let squeeze = LctParams::new(2.0, 0.0, 0.0, 0.5).unwrap();
        let out = lct_b_zero(&squeeze, &g).unwrap();
        for (k, mu) in grid.points().enumerate() {
            let want = 0.5f64.sqrt() * (-(0.5 * mu).powi(2)).exp();
            assert!((out.samples()[k] - c(want, 0.0)).norm() < 1e-6);
        }
        assert!(lct_b_zero(&LctParams::FOURIER, &g).is_err());
    }

    #[test]
    fn inverse_round_trips() {
        let grid = Grid::centered(1.0 / 16.0, 256).unwrap();
        let f = mixture(6, grid);
        let shear = LctParams::new(1.0, 1.0, 0.0, 1.0).unwrap();
        let fwd = lct_fast(&shear, NormalizationMode::Unitary, &f).unwrap();
        let back = lct_inverse(&shear, NormalizationMode::Unitary, &fwd).unwrap();
        assert!(back.grid().matches(&grid));
        assert!(rel(&back, &f) < 1e-6);

        let g = gaussian(grid, 1.0, 0.0);
        let fwd = lct_fast(&LctParams::FOURIER, NormalizationMode::Unitary, &g).unwrap();
        let back = lct_inverse(&LctParams::FOURIER, NormalizationMode::Unitary, &fwd).unwrap();
        assert!(rel(&back, &g) < 1e-8);

        let neg = LctParams::new(0.5, -1.5, 0.5, 0.5).unwrap();
        let fwd = lct_fast(&neg, NormalizationMode::Unitary, &f).unwrap();
        let back = lct_inverse(&neg, NormalizationMode::Unitary, &fwd).unwrap();
        assert!(rel(&back, &f) < 1e-6);

        let z = lct_inverse(
            &shear,
            NormalizationMode::Unitary,
            &Signal::zeros(*fwd.grid()),
        )
        .unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn chirp_convolution_examples() {
        let grid = Grid::centered(0.05, 256).unwrap();
        let f = mixture(7, grid);
        let g = mixture(8, grid);

        // a = 0: plain convolution against an explicit double loop over t-values
        let flat = LctParams::new(0.0, 2.0, -0.5, 0.7).unwrap();
        let out = chirp_convolve(&flat, NormalizationMode::Unitary, &f, &g).unwrap();
        let kappa = NormalizationMode::Unitary.prefactor(2.0);
        for (i, t) in grid.points().enumerate() {
            let mut acc = c(0.0, 0.0);
            for (k, s) in grid.points().enumerate() {
                if let Some(j) = grid.index_of(t - s) {
                    acc += f.samples()[k] * g.samples()[j];
                }
            }
            let want = kappa * acc * grid.dt;
            assert!((out.samples()[i] - want).norm() <= 1e-10);
        }

        // unit-mass impulse at the origin reproduces κ·g
        let shear = LctParams::new(1.0, 1.0, 0.0, 1.0).unwrap();
        let mut imp = vec![c(0.0, 0.0); 256];
        imp[128] = c(1.0 / grid.dt, 0.0);
        let imp = Signal::new(grid, imp).unwrap();
        let out = chirp_convolve(&shear, NormalizationMode::Unitary, &imp, &g).unwrap();
        let want = g.scale(NormalizationMode::Unitary.prefactor(1.0));
        let err = out.combine(c(1.0, 0.0), &want, c(-1.0, 0.0)).unwrap();
        assert!(err.peak() < 1e-6);

        let fg = chirp_convolve(&shear, NormalizationMode::Unitary, &f, &g).unwrap();
        let gf = chirp_convolve(&shear, NormalizationMode::Unitary, &g, &f).unwrap();
        let diff = fg.combine(c(1.0, 0.0), &gf, c(-1.0, 0.0)).unwrap();
        assert!(diff.peak() < 1e-12);

        let other = Signal::zeros(Grid::centered(0.1, 256).unwrap());
        assert!(matches!(
            chirp_convolve(&shear, NormalizationMode::Unitary, &f, &other),
            Err(Error::GridMismatch(_))
        ));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn params() -> impl Strategy<Value = LctParams> {
            (
                -2.0..2.0f64,
                prop_oneof![-2.0..-0.3f64, 0.3..2.0f64],
                -2.0..2.0f64,
            )
                .prop_map(|(a, b, d)| {
                    // solve c from ad − bc = 1
                    LctParams::new(a, b, (a * d - 1.0) / b, d).unwrap()
                })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn oracle_equivalence_and_parseval(p in params(), seed in 0u64..1000) {
                let grid = Grid::centered(1.0 / 16.0, 256).unwrap();
                let f = mixture(seed, grid);
                let fast = lct_fast(&p, NormalizationMode::Unitary, &f).unwrap();
                let direct = lct_direct(&p, NormalizationMode::Unitary, &f, fast.grid()).unwrap();
                prop_assert!(rel(&fast, &direct) <= 1e-6);
                prop_assert!((l2_norm(&fast) - l2_norm(&f)).abs() <= 1e-6 * l2_norm(&f));
                let back = lct_inverse(&p, NormalizationMode::Unitary, &fast).unwrap();
                prop_assert!(rel(&back, &f) <= 1e-6);
            }

            #[test]
            fn linearity(p in params(), seed in 0u64..1000, ar in -2.0..2.0f64, ai in -2.0..2.0f64, br in -2.0..2.0f64) {
                let grid = Grid::centered(1.0 / 16.0, 128).unwrap();
                let f = mixture(seed, grid);
                let g = mixture(seed + 1, grid);
                let (alpha, beta) = (c(ar, ai), c(br, 0.5));
                let lhs = lct_fast(&p, NormalizationMode::Unitary, &f.combine(alpha, &g, beta).unwrap()).unwrap();
                let rhs = lct_fast(&p, NormalizationMode::Unitary, &f).unwrap()
                    .combine(alpha, &lct_fast(&p, NormalizationMode::Unitary, &g).unwrap(), beta).unwrap();
                let scale = l2_norm(&rhs).max(1.0);
                prop_assert!(l2_norm(&lhs.combine(c(1.0, 0.0), &rhs, c(-1.0, 0.0)).unwrap()) <= 1e-12 * scale);
            }

            #[test]
            fn modulation_preserves_modulus(p in params(), mu in -5.0..5.0f64, seed in 0u64..1000) {
                let grid = Grid::centered(0.1, 64).unwrap();
                let f = mixture(seed, grid);
                let out = generalized_modulation(&p, mu, &f).unwrap();
                for (x, y) in out.samples().iter().zip(f.samples()) {
                    prop_assert!((x.norm() - y.norm()).abs() <= 1e-15 * y.norm().max(1.0));
                }
            }
        }
    }

    #[test]
    fn unitary_mode_preserves_inner_products() {
        let grid = Grid::centered(1.0 / 16.0, 256).unwrap();
        let f = mixture(20, grid);
        let g = mixture(21, grid);
        let p = LctParams::new(1.0, 1.0, 0.0, 1.0).unwrap();
        let lf = lct_fast(&p, NormalizationMode::Unitary, &f).unwrap();
        let lg = lct_fast(&p, NormalizationMode::Unitary, &g).unwrap();
        let a = inner_product(&f, &g).unwrap();
        let b = inner_product(&lf, &lg).unwrap();
        assert!((a - b).norm() < 1e-10 * a.norm().max(1.0));
    }
}
