//! Sampling sets in the time-frequency plane.
//!
//! Three families are supported besides explicit point lists:
//!
//! * rectangular square-root lattices `{±τ√k} × {±v√k′}`, `0 ≤ k, k′ ≤ K`;
//! * line families `(πb/u)ℤ × (μ-grid)`, on which the magnitudes of a
//!   Gaussian-built ambiguous pair coincide;
//! * band-limited lattices `{0, …, x_max} × m·b·ℤ`.
//!
//! Every set is deduplicated and sorted lexicographically by `(x, μ)`, so the
//! same spec always yields the same byte-identical CSV.

use std::f64::consts::{E, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{format_sig17, Grid};
use crate::stlct::TfPoint;

/// Which construction produced a [`SamplingSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingKind {
    SqrtLattice,
    LineFamily,
    BandlimitedLattice,
    Explicit,
}

/// A finite, sorted, duplicate-free list of time-frequency points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSet", into = "RawSet")]
pub struct SamplingSet {
    kind: SamplingKind,
    points: Vec<TfPoint>,
}

#[derive(Serialize, Deserialize)]
struct RawSet {
    kind: SamplingKind,
    points: Vec<[f64; 2]>,
}

impl TryFrom<RawSet> for SamplingSet {
    type Error = Error;

    fn try_from(raw: RawSet) -> Result<Self> {
        SamplingSet::new(raw.kind, raw.points.into_iter().map(|[x, mu]| TfPoint::new(x, mu)).collect())
    }
}

impl From<SamplingSet> for RawSet {
    fn from(s: SamplingSet) -> Self {
        RawSet { kind: s.kind, points: s.points.iter().map(|p| [p.x, p.mu]).collect() }
    }
}

impl SamplingSet {
    /// Sorts and deduplicates `points`; rejects non-finite coordinates.
    pub fn new(kind: SamplingKind, mut points: Vec<TfPoint>) -> Result<Self> {
        if let Some(p) = points.iter().find(|p| !p.x.is_finite() || !p.mu.is_finite()) {
            return Err(Error::Malformed(format!("non-finite sampling point {p:?}")));
        }
        // −0.0 and 0.0 are the same point
        for p in &mut points {
            p.x += 0.0;
            p.mu += 0.0;
        }
        points.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.mu.total_cmp(&b.mu)));
        points.dedup();
        Ok(SamplingSet { kind, points })
    }

    pub fn kind(&self) -> SamplingKind {
        self.kind
    }

    pub fn points(&self) -> &[TfPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Distinct `x` values in increasing order.
    pub fn abscissae(&self) -> Vec<f64> {
        let mut xs: Vec<f64> = self.points.iter().map(|p| p.x).collect();
        xs.dedup();
        xs
    }

    /// CSV with header `x,mu` and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,mu\n");
        for p in &self.points {
            out.push_str(&format!("{},{}\n", format_sig17(p.x), format_sig17(p.mu)));
        }
        out
    }
}

/// Square-root lattice `{σ·τ·√k} × {σ′·v·√k′}`, `0 ≤ k, k′ ≤ K`, `σ, σ′ = ±1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqrtLatticeSpec {
    pub tau: f64,
    pub v: f64,
    #[serde(rename = "K")]
    pub k: u32,
}

/// Serialisable description of any sampling set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SamplingSpec {
    Sqrt(SqrtLatticeSpec),
    Lines { b: f64, u: f64, x_count: u32, mu_grid: Grid },
    Bandlimited {
        #[serde(rename = "B")]
        bandwidth: f64,
        m: f64,
        b: f64,
        x_max: u32,
        mu_count: u32,
    },
    Explicit { points: Vec<[f64; 2]> },
}

impl SamplingSpec {
    pub fn build(&self) -> Result<SamplingSet> {
        match self {
            SamplingSpec::Sqrt(spec) => sqrt_lattice(spec),
            SamplingSpec::Lines { b, u, x_count, mu_grid } => counterexample_lines(*b, *u, *x_count, mu_grid),
            SamplingSpec::Bandlimited { bandwidth, m, b, x_max, mu_count } => {
                bandlimited_lattice(*bandwidth, *m, *b, *x_max, *mu_count)
            }
            SamplingSpec::Explicit { points } => SamplingSet::new(
                SamplingKind::Explicit,
                points.iter().map(|&[x, mu]| TfPoint::new(x, mu)).collect(),
            ),
        }
    }
}

fn signed_roots(step: f64, k_max: u32) -> Vec<f64> {
    let mut out = vec![0.0];
    for k in 1..=k_max {
        let r = step * (k as f64).sqrt();
        out.push(r);
        out.push(-r);
    }
    out
}

/// All points of the truncated square-root lattice.
pub fn sqrt_lattice(spec: &SqrtLatticeSpec) -> Result<SamplingSet> {
    if !(spec.tau > 0.0 && spec.v > 0.0 && spec.tau.is_finite() && spec.v.is_finite()) {
        return Err(Error::Parameter(format!("lattice steps must be positive, got tau={}, v={}", spec.tau, spec.v)));
    }
    if spec.k == 0 {
        return Err(Error::Parameter("lattice truncation K must be at least 1".into()));
    }
    let xs = signed_roots(spec.tau, spec.k);
    let mus = signed_roots(spec.v, spec.k);
    let points = xs.iter().flat_map(|&x| mus.iter().map(move |&mu| TfPoint::new(x, mu))).collect();
    SamplingSet::new(SamplingKind::SqrtLattice, points)
}

/// Upper bounds `(τ_max, v_max)` for uniqueness on a square-root lattice.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SqrtBounds {
    pub tau_max: f64,
    pub v_max: f64,
}

/// `τ_max = 1/√(2ne)` and `v_max = |b|·√(2m/e)`.
///
/// With `strict`, `τ_max` is lowered to `min(1/√(2ne), 1/(√(2n)·e))`, the
/// smaller of the two readings of the time bound.
pub fn sqrt_bounds(m: f64, n: f64, b: f64, strict: bool) -> Result<SqrtBounds> {
    if !(m > 0.0 && n > 0.0) {
        return Err(Error::Parameter(format!("envelope parameters must be positive, got m={m}, n={n}")));
    }
    if b == 0.0 || !b.is_finite() {
        return Err(Error::Parameter(format!("b = {b} must be finite and nonzero")));
    }
    let mut tau_max = 1.0 / (2.0 * n * E).sqrt();
    if strict {
        tau_max = tau_max.min(1.0 / ((2.0 * n).sqrt() * E));
    }
    Ok(SqrtBounds { tau_max, v_max: b.abs() * (2.0 * m / E).sqrt() })
}

/// Whether `τ < τ_max` and `v < v_max`. Invalid inputs are never admissible.
pub fn sqrt_admissible(m: f64, n: f64, b: f64, tau: f64, v: f64, strict: bool) -> bool {
    check_sqrt_admissible(m, n, b, tau, v, strict).is_ok()
}

/// Like [`sqrt_admissible`] but explains a failure.
pub fn check_sqrt_admissible(m: f64, n: f64, b: f64, tau: f64, v: f64, strict: bool) -> Result<()> {
    let bounds = sqrt_bounds(m, n, b, strict)?;
    if !(tau > 0.0 && v > 0.0) {
        return Err(Error::Admissibility(format!("lattice steps must be positive, got tau={tau}, v={v}")));
    }
    if tau >= bounds.tau_max {
        return Err(Error::Admissibility(format!("tau = {tau} is not below {}", bounds.tau_max)));
    }
    if v >= bounds.v_max {
        return Err(Error::Admissibility(format!("v = {v} is not below {}", bounds.v_max)));
    }
    Ok(())
}

/// `1/√(ne) − min_{1≤k≤K} λ(k)/√k` for the generator `λ(k) = τ√k`.
pub fn density_margin(tau: f64, n: f64, k_max: u32) -> f64 {
    let ratio = (1..=k_max.max(1))
        .map(|k| tau * (k as f64).sqrt() / (k as f64).sqrt())
        .fold(f64::INFINITY, f64::min);
    1.0 / (n * E).sqrt() - ratio
}

/// `{k·πb/u : |k| ≤ x_count} × mu_grid`.
pub fn counterexample_lines(b: f64, u: f64, x_count: u32, mu_grid: &Grid) -> Result<SamplingSet> {
    if b == 0.0 || !b.is_finite() {
        return Err(Error::Parameter(format!("b = {b} must be finite and nonzero")));
    }
    if !(u > 0.0 && u.is_finite()) {
        return Err(Error::Parameter(format!("u = {u} must be positive")));
    }
    let spacing = PI * b / u;
    let n = x_count as i64;
    let points = (-n..=n)
        .flat_map(|k| mu_grid.points().map(move |mu| TfPoint::new(k as f64 * spacing, mu)))
        .collect();
    SamplingSet::new(SamplingKind::LineFamily, points)
}

/// `{0, 1, …, x_max} × {k·m·b : |k| ≤ mu_count}`; requires `0 < m < 1/(4B)`.
pub fn bandlimited_lattice(bandwidth: f64, m: f64, b: f64, x_max: u32, mu_count: u32) -> Result<SamplingSet> {
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(Error::Parameter(format!("bandwidth {bandwidth} must be positive")));
    }
    if b == 0.0 || !b.is_finite() {
        return Err(Error::Parameter(format!("b = {b} must be finite and nonzero")));
    }
    let limit = 1.0 / (4.0 * bandwidth);
    if !(m > 0.0 && m < limit) {
        return Err(Error::Admissibility(format!("m = {m} must lie in (0, {limit})")));
    }
    let n = mu_count as i64;
    let points = (0..=x_max)
        .flat_map(|x| (-n..=n).map(move |k| TfPoint::new(x as f64, k as f64 * m * b)))
        .collect();
    SamplingSet::new(SamplingKind::BandlimitedLattice, points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xs(set: &SamplingSet) -> Vec<f64> {
        set.abscissae()
    }

    #[test]
    fn sqrt_lattice_examples() {
        let set = sqrt_lattice(&SqrtLatticeSpec { tau: 1.0, v: 1.0, k: 1 }).unwrap();
        assert_eq!(set.len(), 9);
        assert_eq!(xs(&set), vec![-1.0, 0.0, 1.0]);

        let set = sqrt_lattice(&SqrtLatticeSpec { tau: 0.3, v: 1.0, k: 4 }).unwrap();
        let want = [-0.6, -0.3 * 3f64.sqrt(), -0.3 * 2f64.sqrt(), -0.3, 0.0, 0.3, 0.3 * 2f64.sqrt(), 0.3 * 3f64.sqrt(), 0.6];
        let got = xs(&set);
        assert_eq!(got.len(), want.len());
        for (a, b) in got.iter().zip(want) {
            assert!((a - b).abs() < 1e-15);
        }

        let set = sqrt_lattice(&SqrtLatticeSpec { tau: 0.4, v: 0.7, k: 20 }).unwrap();
        assert_eq!(set.len(), 1681);
        assert!(sqrt_lattice(&SqrtLatticeSpec { tau: 0.4, v: 0.7, k: 0 }).is_err());
        assert!(sqrt_lattice(&SqrtLatticeSpec { tau: -0.4, v: 0.7, k: 3 }).is_err());
    }

    #[test]
    fn sqrt_lattice_is_symmetric_and_sorted() {
        let set = sqrt_lattice(&SqrtLatticeSpec { tau: 0.35, v: 0.8, k: 9 }).unwrap();
        let pts = set.points();
        for p in pts {
            assert!(pts.contains(&TfPoint::new(-p.x + 0.0, p.mu)));
            assert!(pts.contains(&TfPoint::new(p.x, -p.mu + 0.0)));
        }
        for w in pts.windows(2) {
            assert!((w[0].x, w[0].mu) < (w[1].x, w[1].mu));
        }
    }

    #[test]
    fn admissibility_examples() {
        let gamma = 0.5;
        let b = 2.0;
        let bounds = sqrt_bounds(gamma, gamma, b, false).unwrap();
        assert!((bounds.tau_max - (1.0 / (2.0 * gamma * E)).sqrt()).abs() < 1e-15);
        assert!((bounds.v_max - b * (2.0 * gamma / E).sqrt()).abs() < 1e-15);

        let b = 1.7;
        let n = 1.0 / (2.0 * b);
        let bounds = sqrt_bounds(1.0, n, b, false).unwrap();
        assert!((bounds.tau_max - (b / E).sqrt()).abs() < 1e-15);

        let bounds = sqrt_bounds(0.5, 0.5, 1.0, false).unwrap();
        assert!((bounds.tau_max - 0.6065).abs() < 1e-4);
        assert!((bounds.v_max - 0.6065).abs() < 1e-4);
        assert!(sqrt_admissible(0.5, 0.5, 1.0, 0.5, 0.5, false));
        assert!(!sqrt_admissible(0.5, 0.5, 1.0, 0.7, 0.5, false));

        // the strict reading is never looser
        let loose = sqrt_bounds(0.5, 0.5, 1.0, false).unwrap();
        let strict = sqrt_bounds(0.5, 0.5, 1.0, true).unwrap();
        assert!(strict.tau_max <= loose.tau_max);
        assert!((strict.tau_max - 1.0 / E).abs() < 1e-15);
        assert!(sqrt_admissible(0.5, 0.5, 1.0, 0.5, 0.5, false) && !sqrt_admissible(0.5, 0.5, 1.0, 0.5, 0.5, true));

        assert!(sqrt_bounds(0.0, 1.0, 1.0, false).is_err());
        assert!(sqrt_bounds(1.0, 1.0, 0.0, false).is_err());
        assert!(matches!(check_sqrt_admissible(0.5, 0.5, 1.0, 0.7, 0.5, false), Err(Error::Admissibility(_))));
        assert!(sqrt_admissible(1.0, 1.0, -2.0, 0.3, 1.0, false));
    }

    #[test]
    fn density_margin_examples() {
        assert!((density_margin(0.5, 1.0, 10) - (1.0 / E.sqrt() - 0.5)).abs() < 1e-15);
        assert!((density_margin(0.5, 1.0, 10) - 0.1065).abs() < 1e-4);
        let n = 0.8;
        let boundary = 1.0 / (n * E).sqrt();
        assert!(density_margin(boundary, n, 25).abs() < 1e-15);
        assert!(density_margin(boundary * 1.01, n, 25) < 0.0);
    }

    #[test]
    fn counterexample_line_examples() {
        let mu = Grid::centered(0.5, 5).unwrap();
        let set = counterexample_lines(1.0, PI, 3, &mu).unwrap();
        let got = xs(&set);
        for (a, b) in got.iter().zip(-3..=3) {
            assert!((a - b as f64).abs() < 1e-15);
        }
        let set = counterexample_lines(1.0, 2.0, 2, &mu).unwrap();
        assert!((xs(&set)[3] - PI / 2.0).abs() < 1e-15);
        assert_eq!(set.len(), 5 * 5);
        assert_eq!(set.kind(), SamplingKind::LineFamily);
        assert!(counterexample_lines(0.0, 2.0, 2, &mu).is_err());
        assert!(counterexample_lines(1.0, 0.0, 2, &mu).is_err());
    }

    #[test]
    fn bandlimited_examples() {
        assert!(bandlimited_lattice(1.0, 0.1, 1.0, 2, 2).is_ok());
        assert!(bandlimited_lattice(1.0, 0.2499, 1.0, 2, 2).is_ok());
        assert!(matches!(bandlimited_lattice(1.0, 0.25, 1.0, 2, 2), Err(Error::Admissibility(_))));
        assert!(matches!(bandlimited_lattice(1.0, 0.0, 1.0, 2, 2), Err(Error::Admissibility(_))));
        let set = bandlimited_lattice(1.0, 0.2, 1.0, 4, 3).unwrap();
        assert_eq!(set.len(), 5 * 7);
        let mus: Vec<f64> = set.points().iter().filter(|p| p.x == 0.0).map(|p| p.mu).collect();
        for (a, k) in mus.iter().zip(-3..=3) {
            assert!((a - 0.2 * k as f64).abs() < 1e-15);
        }
    }

    #[test]
    fn json_and_csv() {
        let spec: SamplingSpec = serde_json::from_str(r#"{"kind":"sqrt","tau":0.5,"v":0.5,"K":20}"#).unwrap();
        assert_eq!(spec, SamplingSpec::Sqrt(SqrtLatticeSpec { tau: 0.5, v: 0.5, k: 20 }));
        let spec: SamplingSpec = serde_json::from_str(r#"{"kind":"explicit","points":[[1,2],[0,0],[1,2]]}"#).unwrap();
        let set = spec.build().unwrap();
        assert_eq!(set.points(), &[TfPoint::new(0.0, 0.0), TfPoint::new(1.0, 2.0)]);

        let set = sqrt_lattice(&SqrtLatticeSpec { tau: 0.3, v: 0.6, k: 3 }).unwrap();
        let json = serde_json::to_string(&set).unwrap();
        assert!(json.starts_with(r#"{"kind":"sqrt_lattice","points":[["#));
        let back: SamplingSet = serde_json::from_str(&json).unwrap();
        assert_eq!(back, set);

        let csv = set.to_csv();
        assert!(csv.starts_with("x,mu\n"));
        assert_eq!(csv.lines().count(), set.len() + 1);
        assert_eq!(csv, sqrt_lattice(&SqrtLatticeSpec { tau: 0.3, v: 0.6, k: 3 }).unwrap().to_csv());
        assert!(serde_json::from_str::<SamplingSet>(r#"{"kind":"explicit","points":[[1e999,0]]}"#).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn admissibility_is_monotone(m in 0.05..3.0f64, n in 0.05..3.0f64, b in -3.0..3.0f64, tau in 0.01..1.5f64, v in 0.01..4.0f64, shrink in 0.0..1.0f64, strict: bool) {
                prop_assume!(b.abs() > 1e-3);
                if sqrt_admissible(m, n, b, tau, v, strict) {
                    prop_assert!(sqrt_admissible(m, n, b, tau * shrink.max(1e-3), v, strict));
                    prop_assert!(sqrt_admissible(m, n, b, tau, v * shrink.max(1e-3), strict));
                }
            }

            #[test]
            fn lattice_is_deterministic_and_symmetric(tau in 0.05..1.0f64, v in 0.05..1.0f64, k in 1u32..12) {
                let spec = SqrtLatticeSpec { tau, v, k };
                let a = sqrt_lattice(&spec).unwrap();
                prop_assert_eq!(a.to_csv(), sqrt_lattice(&spec).unwrap().to_csv());
                prop_assert_eq!(a.len(), ((2 * k + 1) * (2 * k + 1)) as usize);
                for p in a.points() {
                    prop_assert!(a.points().contains(&TfPoint::new(-p.x + 0.0, p.mu)));
                }
            }
        }
    }
}
