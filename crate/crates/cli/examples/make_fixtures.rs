//! Regenerates `fixtures/`: a Gaussian and its Fourier-case transform computed
//! by direct quadrature.

use std::path::Path;

use canonica::lct::{induced_grid, lct_direct, LctParams, NormalizationMode};
use canonica::signal::Grid;
use canonica::windows::make_gaussian;
use canonica_cli::output::to_json;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let grid = Grid::centered(1.0 / 16.0, 256)?;
    let f = make_gaussian(0.5, grid)?;
    let out = induced_grid(&LctParams::FOURIER, &grid)?;
    let big_f = lct_direct(&LctParams::FOURIER, NormalizationMode::Unitary, &f, &out)?;
    std::fs::write(dir.join("gaussian.json"), to_json(&f)?)?;
    std::fs::write(dir.join("gaussian_fourier.json"), to_json(&big_f)?)?;
    Ok(())
}
