//! Row transfer matrices for the line (d = 1) and narrow strips of Z^2
//! with open side boundaries.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ModelKind;

const MAX_STRIP_WIDTH: usize = 8;
const TOLERANCE: f64 = 1e-12;
const MAX_ITERATIONS: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferResult {
    /// `log(spectral radius) / width`.
    pub free_energy: f64,
    pub spectral_radius: f64,
    pub width: usize,
    pub states: usize,
    pub iterations: usize,
    /// `lim_n (log Z_n − n · free_energy)` on the line; absent for strips.
    pub surface_offset: Option<f64>,
}

/// Matching polynomial of the path induced on the sites of `free`, at `λ`.
fn path_matchings(free: u32, width: usize, lambda: f64) -> f64 {
    // totals over the sites before the previous one and up to the previous one
    let (mut open, mut total) = (0.0f64, 1.0f64);
    let mut prev_free = false;
    for i in 0..width {
        if free >> i & 1 == 1 {
            let new_total = total + if prev_free { lambda * open } else { 0.0 };
            open = total;
            total = new_total;
            prev_free = true;
        } else {
            open = 0.0;
            prev_free = false;
        }
    }
    total
}

struct Matrix {
    n: usize,
    a: Vec<f64>,
    /// Index of the empty row state.
    empty: usize,
    /// `Z_n = e_empty · T^n · end`.
    end: Vec<f64>,
}

fn build(model: ModelKind, lambda: f64, width: usize) -> Matrix {
    let all: Vec<u32> = (0..1u32 << width).collect();
    let states: Vec<u32> = match model {
        ModelKind::Hardcore => all.into_iter().filter(|s| s & (s >> 1) == 0).collect(),
        ModelKind::Dimer => all,
    };
    let n = states.len();
    let mut a = vec![0.0; n * n];
    for (i, &s) in states.iter().enumerate() {
        for (j, &t) in states.iter().enumerate() {
            if s & t != 0 {
                continue;
            }
            let w = lambda.powi(t.count_ones() as i32);
            a[i * n + j] = match model {
                ModelKind::Hardcore => w,
                ModelKind::Dimer => {
                    let mask = (1u32 << width) - 1;
                    w * path_matchings(mask & !(s | t), width, lambda)
                }
            };
        }
    }
    let empty = states.iter().position(|&s| s == 0).expect("empty state");
    let end = match model {
        ModelKind::Hardcore => vec![1.0; n],
        ModelKind::Dimer => (0..n).map(|i| if i == empty { 1.0 } else { 0.0 }).collect(),
    };
    Matrix { n, a, empty, end }
}

fn apply(m: &Matrix, x: &[f64]) -> Vec<f64> {
    (0..m.n)
        .map(|i| (0..m.n).map(|j| m.a[i * m.n + j] * x[j]).sum())
        .collect()
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Perron root by power iteration from the all-ones vector.
fn perron(m: &Matrix) -> (f64, usize) {
    let mut x = vec![1.0; m.n];
    let s = norm(&x);
    x.iter_mut().for_each(|v| *v /= s);
    let mut rho = 0.0;
    for it in 1..=MAX_ITERATIONS {
        let y = apply(m, &x);
        let r = norm(&y);
        let y: Vec<f64> = y.iter().map(|v| v / r).collect();
        let shift = y.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        x = y;
        if (r - rho).abs() <= TOLERANCE * r && shift <= TOLERANCE {
            return (r, it);
        }
        rho = r;
    }
    (rho, MAX_ITERATIONS)
}

/// `lim_n (log Z_n − n log ρ)` from the rescaled iteration `T^n end / ρ^n`.
fn line_offset(m: &Matrix, rho: f64) -> f64 {
    let mut x = m.end.clone();
    let mut prev = f64::NAN;
    for _ in 0..MAX_ITERATIONS {
        x = apply(m, &x).iter().map(|v| v / rho).collect();
        let cur = x[m.empty].ln();
        if (cur - prev).abs() <= 1e-15 {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// Free energy per site of the line (`dim = 1`, `width = 1`) or of a
/// width-`width` strip of Z^2 (`dim = 2`).
pub fn transfer_matrix_free_energy(
    model: ModelKind,
    lambda: f64,
    width: usize,
    dim: usize,
) -> Result<TransferResult> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::usage(format!("activity must be > 0, got {lambda}")));
    }
    match dim {
        1 if width == 1 => {}
        1 => return Err(Error::usage("the line has width 1")),
        2 if (1..=MAX_STRIP_WIDTH).contains(&width) => {}
        2 => {
            return Err(Error::Capacity(format!(
                "strip width {width} outside 1..={MAX_STRIP_WIDTH}"
            )))
        }
        _ => return Err(Error::usage(format!("transfer matrices cover d = 1, 2 only, got {dim}"))),
    }
    let m = build(model, lambda, width);
    let (rho, iterations) = perron(&m);
    Ok(TransferResult {
        free_energy: rho.ln() / width as f64,
        spectral_radius: rho,
        width,
        states: m.n,
        iterations,
        surface_offset: (dim == 1).then(|| line_offset(&m, rho)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOLDEN_LOG: f64 = 0.481_211_825_059_603_4;

    #[test]
    fn line_is_golden() {
        for model in [ModelKind::Hardcore, ModelKind::Dimer] {
            let r = transfer_matrix_free_energy(model, 1.0, 1, 1).unwrap();
            assert!((r.free_energy - GOLDEN_LOG).abs() < 1e-11, "{model}");
        }
    }

    #[test]
    fn hardcore_line_offset() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let r = transfer_matrix_free_energy(ModelKind::Hardcore, 1.0, 1, 1).unwrap();
        assert!((r.surface_offset.unwrap() - (phi * phi / 5f64.sqrt()).ln()).abs() < 1e-11);
    }

    #[test]
    fn width_two_hardcore_strip() {
        // compatibility matrix on {∅, {1}, {2}} has Perron root 1 + √2
        let r = transfer_matrix_free_energy(ModelKind::Hardcore, 1.0, 2, 2).unwrap();
        assert_eq!(r.states, 3);
        assert!((r.spectral_radius - (1.0 + 2f64.sqrt())).abs() < 1e-10);
        assert!((r.free_energy - (1.0 + 2f64.sqrt()).ln() / 2.0).abs() < 1e-11);
    }

    #[test]
    fn path_matching_weights() {
        assert_eq!(path_matchings(0b111, 3, 1.0), 3.0);
        assert_eq!(path_matchings(0b1111, 4, 1.0), 5.0);
        assert_eq!(path_matchings(0b101, 3, 1.0), 1.0);
        assert_eq!(path_matchings(0b11, 2, 2.0), 3.0);
    }

    #[test]
    fn oversized_strip_is_refused() {
        assert!(matches!(
            transfer_matrix_free_energy(ModelKind::Hardcore, 1.0, 9, 2),
            Err(Error::Capacity(_))
        ));
    }
}
