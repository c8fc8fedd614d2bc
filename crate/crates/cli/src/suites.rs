//! Residual suites run by `canonica verify`.

use std::f64::consts::PI;

use canonica::lattices::counterexample_lines;
use canonica::lct::{check_convolution_theorem, check_lemma22, check_lemma26, induced_grid, LctParams, NormalizationMode, RelationSetup};
use canonica::phase_retrieval::{counterexample_pair, verify_ambiguity};
use canonica::signal::{gaussian_mixture, mixture, Grid, MixtureRanges};
use canonica::stlct::{check_covariance, check_fundamental_identity, TfPoint};
use canonica::windows::{make_gaussian, WindowSpec};
use canonica::Result;
use clap::ValueEnum;
use serde::Serialize;

/// Default bound on identity residuals.
pub const IDENTITY_TOL: f64 = 1e-5;
/// Largest magnitude gap allowed on the counterexample lines.
pub const LINE_GAP_TOL: f64 = 1e-8;
/// Smallest gap expected between the lines.
pub const OFF_LINE_GAP: f64 = 1e-3;
/// Smallest relative phase distance expected of an ambiguous pair.
pub const PAIR_SEPARATION: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Suite {
    Lemma22,
    Lemma26,
    ConvThm,
    Fundamental,
    Covariance,
    Counterexample,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// `value ≤ bound` passes
    Max,
    /// `value ≥ bound` passes
    Min,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteRow {
    pub case: String,
    pub quantity: String,
    pub value: f64,
    pub bound: f64,
    pub kind: Bound,
}

impl SuiteRow {
    pub fn pass(&self) -> bool {
        match self.kind {
            Bound::Max => self.value <= self.bound,
            Bound::Min => self.value >= self.bound,
        }
    }
}

/// Options shared by all suites.
#[derive(Clone, Debug, Serialize)]
pub struct SuiteOptions {
    pub seed: u64,
    pub tol_scale: f64,
    pub mode: NormalizationMode,
    /// Modulation parameter of the counterexample suite; `None` runs 1, 2 and 4.
    pub u: Option<f64>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions { seed: 0, tol_scale: 1.0, mode: NormalizationMode::Unitary, u: None }
    }
}

/// Parameter family shared by the identity suites.
pub fn parameter_family() -> Vec<(&'static str, LctParams)> {
    vec![
        ("fourier", LctParams::FOURIER),
        ("shear", LctParams { a: 1.0, b: 1.0, c: 0.0, d: 1.0 }),
        ("scaled", LctParams { a: 2.0, b: 0.5, c: -2.0, d: 0.0 }),
        ("general", LctParams { a: 0.5, b: -1.5, c: 0.5, d: 0.5 }),
    ]
}

/// 256-point grid with step 1/16 used by the identity suites.
pub fn suite_grid() -> Grid {
    Grid::centered(1.0 / 16.0, 256).expect("static grid")
}

/// 8×8 points: abscissae `j/2 + 1/4`, frequencies on the transform grid.
pub fn suite_points(params: &LctParams, grid: &Grid) -> Result<Vec<TfPoint>> {
    let step = induced_grid(params, grid)?.dt;
    Ok((-4..4)
        .flat_map(|j| (-4..4).map(move |k| TfPoint::new(j as f64 * 0.5 + 0.25, k as f64 * step)))
        .collect())
}

pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> Result<Vec<SuiteRow>> {
    let tol = IDENTITY_TOL * opts.tol_scale;
    let grid = suite_grid();
    let max_row = |case: String, quantity: &str, value: f64| SuiteRow {
        case,
        quantity: quantity.into(),
        value,
        bound: tol,
        kind: Bound::Max,
    };
    let mut rows = Vec::new();
    match suite {
        Suite::Lemma22 => {
            for (k, (name, params)) in parameter_family().into_iter().enumerate() {
                let setup = RelationSetup {
                    params,
                    mode: opts.mode,
                    tau: 0.5,
                    mu: 1.0,
                    nu: 3.0 * 2.0 * PI / (grid.n as f64 * grid.dt),
                    seed: opts.seed.wrapping_mul(31).wrapping_add(k as u64),
                    grid,
                };
                for id in 1..=6u8 {
                    rows.push(max_row(name.into(), &format!("relation_{id}"), check_lemma22(id, &setup)?));
                }
            }
        }
        Suite::Lemma26 => {
            for (k, (name, params)) in parameter_family().into_iter().enumerate() {
                let f = gaussian_mixture(opts.seed.wrapping_mul(31).wrapping_add(k as u64), grid);
                let step = induced_grid(&params, &grid)?.dt;
                for j in [-2i32, 3] {
                    let mu = j as f64 * step;
                    let r = check_lemma26(&params, opts.mode, mu, &f)?;
                    rows.push(max_row(format!("{name}_mu{j}"), "residual", r));
                }
            }
        }
        Suite::ConvThm => {
            // the convolution doubles the support, so both factors must be compact
            let ranges = MixtureRanges { centre: 1.0, width: (0.3, 0.6), freq: 2.0 };
            for (k, (name, params)) in parameter_family().into_iter().enumerate() {
                let s = opts.seed.wrapping_mul(31).wrapping_add(2 * k as u64);
                let f = mixture(s, grid, &ranges);
                let g = mixture(s + 1, grid, &ranges);
                rows.push(max_row(name.into(), "residual", check_convolution_theorem(&params, opts.mode, &f, &g)?));
            }
        }
        Suite::Fundamental => {
            let g = make_gaussian(0.5, grid)?;
            for (k, (name, params)) in parameter_family().into_iter().enumerate() {
                let f = gaussian_mixture(opts.seed.wrapping_mul(31).wrapping_add(k as u64), grid);
                let points = suite_points(&params, &grid)?;
                rows.push(max_row(name.into(), "residual", check_fundamental_identity(&params, opts.mode, &g, &f, &points)?));
            }
        }
        Suite::Covariance => {
            let window = WindowSpec::Gaussian { gamma: 0.5 };
            for (k, (name, params)) in parameter_family().into_iter().enumerate() {
                let f = gaussian_mixture(opts.seed.wrapping_mul(31).wrapping_add(k as u64), grid);
                let points = suite_points(&params, &grid)?;
                for (u, tau) in [(1.0, 0.0), (0.7, 0.375), (-0.4, -0.5)] {
                    let r = check_covariance(&params, opts.mode, &window, &f, u, tau, &points)?;
                    rows.push(max_row(format!("{name}_u{u}_tau{tau}"), "residual", r));
                }
            }
        }
        Suite::Counterexample => {
            let us = match opts.u {
                Some(u) => vec![u],
                None => vec![1.0, 2.0, 4.0],
            };
            for u in us {
                for b in [0.5, 1.0, 2.0] {
                    for a in [0.0, 1.0] {
                        rows.extend(counterexample_rows(u, b, a, opts)?);
                    }
                }
            }
        }
    }
    Ok(rows)
}

/// `A = (0, b, −1/b, 0)` for `a = 0`, `A = (1, b, 0, 1)` otherwise.
pub fn counterexample_params(b: f64, a: f64) -> LctParams {
    if a == 0.0 {
        LctParams { a: 0.0, b, c: -1.0 / b, d: 0.0 }
    } else {
        LctParams { a: 1.0, b, c: 0.0, d: 1.0 }
    }
}

/// Grid holding the ambiguous pair: step 1/32 over `[−16, 16)`.
pub fn counterexample_grid() -> Grid {
    Grid::centered(1.0 / 32.0, 1024).expect("static grid")
}

/// 257 frequencies spanning `±(|u| + 8|b|)`.
pub fn counterexample_mu_grid(u: f64, b: f64) -> Result<Grid> {
    let half = u.abs() + 8.0 * b.abs();
    Grid::new(-half, 2.0 * half / 256.0, 257)
}

/// Line gap, off-line gap and separation of the pair for one `(u, b, a)`.
pub fn counterexample_rows(u: f64, b: f64, a: f64, opts: &SuiteOptions) -> Result<Vec<SuiteRow>> {
    let params = counterexample_params(b, a);
    let pair = counterexample_pair(u, &params, counterexample_grid())?;
    let mu_grid = counterexample_mu_grid(u, b)?;
    let lines = counterexample_lines(b, u, 4, &mu_grid)?;
    let on = verify_ambiguity(&pair, opts.mode, lines.points())?;
    let x_off = PI * b / (2.0 * u);
    let off_points: Vec<TfPoint> = mu_grid.points().map(|m| TfPoint::new(x_off, m)).collect();
    let off = verify_ambiguity(&pair, opts.mode, &off_points)?;
    let case = format!("u{u}_b{b}_a{a}");
    let row = |quantity: &str, value: f64, bound: f64, kind: Bound| SuiteRow {
        case: case.clone(),
        quantity: quantity.into(),
        value,
        bound,
        kind,
    };
    Ok(vec![
        row("line_gap", on.max_gap, LINE_GAP_TOL * opts.tol_scale, Bound::Max),
        row("off_line_gap", off.max_gap, OFF_LINE_GAP, Bound::Min),
        row("phase_distance", on.phase_distance, PAIR_SEPARATION, Bound::Min),
    ])
}
