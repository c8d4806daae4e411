//! Seeded random mode data: smooth polynomial profiles and their projection
//! onto the domain of `D`.

use crate::dirac::{self, Result};
use crate::mode_space::{ModeIndex, RadialGrid, RadialProfile, SpinorField, SpinorMode};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

pub const DEFAULT_DEGREE: usize = 6;

/// A mode together with its exact radial derivative.
#[derive(Debug, Clone)]
pub struct ModeWithDerivative {
    pub mode: SpinorMode,
    pub derivative: SpinorMode,
}

/// Deterministic per-mode stream so results do not depend on sweep order.
pub fn mode_rng(seed: u64, idx: ModeIndex, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let key = ((idx.m as i64 as u64) << 32) ^ (idx.n as i64 as u64 & 0xffff_ffff);
    rng.set_stream(key.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ stream);
    rng
}

/// `r^a Σ c_k r^k` and its derivative.
fn poly_profile(grid: &Arc<RadialGrid>, a: u32, coeffs: &[Complex64]) -> (RadialProfile, RadialProfile) {
    let a = a as i32;
    let val = |r: f64| -> Complex64 {
        coeffs.iter().enumerate().map(|(k, c)| c * r.powi(a + k as i32)).sum()
    };
    let der = |r: f64| -> Complex64 {
        coeffs
            .iter()
            .enumerate()
            .filter(|(k, _)| a + *k as i32 > 0)
            .map(|(k, c)| c * ((a + k as i32) as f64 * r.powi(a + k as i32 - 1)))
            .sum()
    };
    (
        RadialProfile::from_fn(grid.clone(), val).expect("finite"),
        RadialProfile::from_fn(grid.clone(), der).expect("finite"),
    )
}

fn coeffs(rng: &mut ChaCha8Rng, degree: usize) -> Vec<Complex64> {
    (0..=degree)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

/// Random polynomial mode regular at the origin: `f ~ r^{|n+1|}`, `g ~ r^{|n|}`.
pub fn random_smooth_mode(
    rng: &mut ChaCha8Rng,
    grid: &Arc<RadialGrid>,
    idx: ModeIndex,
    degree: usize,
) -> ModeWithDerivative {
    let cf = coeffs(rng, degree);
    let cg = coeffs(rng, degree);
    let (f, df) = poly_profile(grid, (idx.n + 1).unsigned_abs(), &cf);
    let (g, dg) = poly_profile(grid, idx.n.unsigned_abs(), &cg);
    ModeWithDerivative {
        mode: SpinorMode::new(idx, f, g).expect("shared grid"),
        derivative: SpinorMode::new(idx, df, dg).expect("shared grid"),
    }
}

/// Subtract `β H` where `H` is the regular homogeneous solution and `β` the
/// boundary functional of the input, so the result lies in the domain.
pub fn project_to_domain(data: &ModeWithDerivative) -> Result<ModeWithDerivative> {
    let idx = data.mode.index();
    let beta = dirac::boundary_functional(&data.mode)?;
    let (h, dh) = dirac::regular_solution(data.mode.grid(), idx.m, idx.n)?;
    Ok(ModeWithDerivative {
        mode: data.mode.sub(&h.scale(beta)),
        derivative: data.derivative.sub(&dh.scale(beta)),
    })
}

pub fn random_in_domain_mode(
    rng: &mut ChaCha8Rng,
    grid: &Arc<RadialGrid>,
    idx: ModeIndex,
    degree: usize,
) -> Result<ModeWithDerivative> {
    project_to_domain(&random_smooth_mode(rng, grid, idx, degree))
}

/// Per-mode data for a whole truncation, plus derivatives.
pub fn random_field(
    seed: u64,
    stream: u64,
    grid: &Arc<RadialGrid>,
    big_m: u32,
    big_n: u32,
    in_domain: bool,
) -> Result<(SpinorField, SpinorField)> {
    let mut field = SpinorField::new(grid.clone(), big_m, big_n);
    let mut deriv = SpinorField::new(grid.clone(), big_m, big_n);
    for idx in crate::mode_space::mode_indices(big_m, big_n) {
        let mut rng = mode_rng(seed, idx, stream);
        let data = if in_domain {
            random_in_domain_mode(&mut rng, grid, idx, DEFAULT_DEGREE)?
        } else {
            random_smooth_mode(&mut rng, grid, idx, DEFAULT_DEGREE)
        };
        field.insert(data.mode)?;
        deriv.insert(data.derivative)?;
    }
    Ok((field, deriv))
}
