//! Numerical checks of the operator relations between translation, modulation,
//! reflection and the LCT.
//!
//! Every check evaluates both sides on the discrete grid and reports the
//! relative L² residual `‖lhs − rhs‖ / ‖rhs‖`. Relations are numbered 1 to 6:
//!
//! 1. `𝓕T_τ = M_{−τ}𝓕`, `𝓕M_ν = T_ν𝓕`, `𝓕R = R𝓕` (worst of the three)
//! 2. `T_τ M_x = e^{−ixτ} M_x T_τ`
//! 3. `V_g(T_τ M_ν f)(x, ω) = e^{−iωτ} V_g f(x − τ, ω − ν)`
//! 4. `R L_A = L_A R`, `T_τ R = R T_{−τ}` (worst of the two)
//! 5. `T_τ M_μ^{(A)} f(t) = e^{−iμτ/b + i a tτ/b − i aτ²/(2b)} M_μ^{(A)} T_τ f(t)`
//! 6. `L_A M_{−aτ/b} T_τ f(μ) = e^{−i(μτ/b + aτ²/(2b))} L_A f(μ)`
//!
//! Here `𝓕` is the 2π-free Fourier transform, i.e. [`lct_fast`] with
//! `A = (0, 1, −1, 0)` in `PaperKernel` mode, and `V_g` is the short-time
//! Fourier transform with a Gaussian window.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{
    chirp_convolve, generalized_modulation, induced_grid, lct_fast, modulate, reflect, translate,
    LctParams, NormalizationMode,
};
use crate::error::{Error, Result};
use crate::fourier;
use crate::signal::{gaussian_mixture, Grid, Signal, EPS_FLOOR};

/// `‖value − reference‖₂ / ‖reference‖₂` on a shared grid; 0 when both vanish.
pub fn relative_l2_residual(value: &Signal, reference: &Signal) -> Result<f64> {
    value.grid().ensure_matches(reference.grid())?;
    let diff: f64 = value
        .samples()
        .iter()
        .zip(reference.samples())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let scale: f64 = reference
        .samples()
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt();
    if diff == 0.0 {
        return Ok(0.0);
    }
    Ok(diff / scale.max(EPS_FLOOR))
}

fn residual_of(value: &[Complex64], reference: &[Complex64]) -> f64 {
    let diff: f64 = value
        .iter()
        .zip(reference)
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let scale: f64 = reference.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if diff == 0.0 {
        0.0
    } else {
        diff / scale.max(EPS_FLOOR)
    }
}

/// Inputs for [`check_lemma22`].
#[derive(Clone, Debug)]
pub struct RelationSetup {
    pub params: LctParams,
    pub mode: NormalizationMode,
    /// Time shift; must be a multiple of `grid.dt`.
    pub tau: f64,
    /// Generalized modulation frequency for relation 5.
    pub mu: f64,
    /// Classical modulation frequency; relation 1 needs it on the dual lattice.
    pub nu: f64,
    pub seed: u64,
    pub grid: Grid,
}

impl Default for RelationSetup {
    fn default() -> Self {
        let grid = Grid::centered(1.0 / 16.0, 512).expect("static grid");
        RelationSetup {
            params: LctParams {
                a: 1.0,
                b: 1.0,
                c: 0.0,
                d: 1.0,
            },
            mode: NormalizationMode::Unitary,
            tau: 0.5,
            mu: 1.0,
            nu: 3.0 * 2.0 * PI / (grid.n as f64 * grid.dt),
            seed: 7,
            grid,
        }
    }
}

fn fourier(f: &Signal) -> Result<Signal> {
    lct_fast(&LctParams::FOURIER, NormalizationMode::PaperKernel, f)
}

fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// Residual of operator relation `relation_id ∈ 1..=6` on a seeded Gaussian mixture.
pub fn check_lemma22(relation_id: u8, setup: &RelationSetup) -> Result<f64> {
    let f = gaussian_mixture(setup.seed, setup.grid);
    let tau = setup.tau;
    match relation_id {
        1 => {
            let shift = relative_l2_residual(
                &fourier(&translate(tau, &f)?)?,
                &modulate(-tau, &fourier(&f)?),
            )?;
            let fhat = fourier(&f)?;
            let freq = relative_l2_residual(
                &fourier(&modulate(setup.nu, &f))?,
                &translate(setup.nu, &fhat)?,
            )?;
            let refl = relative_l2_residual(&fourier(&reflect(&f)?)?, &reflect(&fhat)?)?;
            Ok(shift.max(freq).max(refl))
        }
        2 => {
            let x = setup.nu;
            let lhs = translate(tau, &modulate(x, &f))?;
            let rhs = modulate(x, &translate(tau, &f)?).scale(cis(-x * tau));
            relative_l2_residual(&lhs, &rhs)
        }
        3 => check_stft_covariance(&f, tau, setup.nu),
        4 => {
            let p = &setup.params;
            let mode = setup.mode;
            let lr = relative_l2_residual(
                &reflect(&lct_fast(p, mode, &f)?)?,
                &lct_fast(p, mode, &reflect(&f)?)?,
            )?;
            let tr = relative_l2_residual(
                &translate(tau, &reflect(&f)?)?,
                &reflect(&translate(-tau, &f)?)?,
            )?;
            Ok(lr.max(tr))
        }
        5 => {
            let p = &setup.params;
            let mu = setup.mu;
            let lhs = translate(tau, &generalized_modulation(p, mu, &f)?)?;
            let rhs = generalized_modulation(p, mu, &translate(tau, &f)?)?.map(|t, z| {
                z * cis(-mu * tau / p.b + p.a * t * tau / p.b - p.a * tau * tau / (2.0 * p.b))
            });
            relative_l2_residual(&lhs, &rhs)
        }
        6 => {
            let p = &setup.params;
            let shifted = modulate(-p.a * tau / p.b, &translate(tau, &f)?);
            let lhs = lct_fast(p, setup.mode, &shifted)?;
            let rhs = lct_fast(p, setup.mode, &f)?
                .map(|mu, z| z * cis(-(mu * tau / p.b + p.a * tau * tau / (2.0 * p.b))));
            relative_l2_residual(&lhs, &rhs)
        }
        other => Err(Error::Parameter(format!(
            "unknown relation id {other}; expected 1 to 6"
        ))),
    }
}

/// Short-time Fourier transform with the window `e^{−t²/2}` at one point.
fn stft_gauss(f: &Signal, x: f64, omega: f64) -> Complex64 {
    let windowed: Vec<Complex64> = f
        .grid()
        .points()
        .zip(f.samples())
        .map(|(t, &v)| v * (-(t - x).powi(2) / 2.0).exp())
        .collect();
    fourier::riemann_at(&windowed, f.grid(), omega)
}

fn check_stft_covariance(f: &Signal, tau: f64, nu: f64) -> Result<f64> {
    let h = translate(tau, &modulate(nu, f))?;
    let mut lhs = Vec::new();
    let mut rhs = Vec::new();
    for xi in -4..=4 {
        let x = xi as f64 * 0.5;
        for wi in -6..=6 {
            let omega = wi as f64 * 0.5;
            lhs.push(stft_gauss(&h, x, omega));
            rhs.push(cis(-omega * tau) * stft_gauss(f, x - tau, omega - nu));
        }
    }
    Ok(residual_of(&lhs, &rhs))
}

/// Residual of `L_A(M_μ^{(A)} f) = M_μ^{(D)} T_μ L_C f` with `C = (0, b, −1/b, d)`
/// and `D = (0, b/d, −d/b, 2)`; for `d = 0` the outer modulation is the identity.
///
/// `μ` must be a whole number of steps of the output grid of [`lct_fast`].
pub fn check_lemma26(
    params: &LctParams,
    mode: NormalizationMode,
    mu: f64,
    f: &Signal,
) -> Result<f64> {
    params.require_nonzero_b()?;
    let out = induced_grid(params, f.grid())?;
    out.steps_for(mu)?;
    let (b, d) = (params.b, params.d);
    let lhs = lct_fast(params, mode, &generalized_modulation(params, mu, f)?)?;
    let c_params = LctParams {
        a: 0.0,
        b,
        c: -1.0 / b,
        d,
    };
    let shifted = translate(mu, &lct_fast(&c_params, mode, f)?)?;
    let rhs = if d.abs() <= super::B_ZERO_TOL {
        shifted
    } else {
        let d_params = LctParams {
            a: 0.0,
            b: b / d,
            c: -d / b,
            d: 2.0,
        };
        generalized_modulation(&d_params, mu, &shifted)?
    };
    relative_l2_residual(&lhs, &rhs)
}

/// Residual of `L_A(f *_A g) = e^{−i d μ²/(2b)} L_A f · L_A g` on the induced grid.
pub fn check_convolution_theorem(
    params: &LctParams,
    mode: NormalizationMode,
    f: &Signal,
    g: &Signal,
) -> Result<f64> {
    f.grid().ensure_matches(g.grid())?;
    let lhs = lct_fast(params, mode, &chirp_convolve(params, mode, f, g)?)?;
    let product = lct_fast(params, mode, f)?.mul(&lct_fast(params, mode, g)?)?;
    let rhs = product.map(|mu, z| z * cis(-params.d * mu * mu / (2.0 * params.b)));
    relative_l2_residual(&lhs, &rhs)
}
