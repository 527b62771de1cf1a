//! Independent oracles shared by the integration and acceptance tests.
//! Nothing here calls into the library's matrix or phase code.

#![allow(dead_code)]

use num_complex::Complex64;
use std::f64::consts::PI;

pub type Mat = [[Complex64; 2]; 2];

const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let mut out = [[c(0.0); 2]; 2];
    for r in 0..2 {
        for col in 0..2 {
            out[r][col] = a[r][0] * b[0][col] + a[r][1] * b[1][col];
        }
    }
    out
}

fn add(a: &Mat, b: &Mat) -> Mat {
    [
        [a[0][0] + b[0][0], a[0][1] + b[0][1]],
        [a[1][0] + b[1][0], a[1][1] + b[1][1]],
    ]
}

fn scale(a: &Mat, s: Complex64) -> Mat {
    [[a[0][0] * s, a[0][1] * s], [a[1][0] * s, a[1][1] * s]]
}

/// `x σx + y σy + z σz`.
pub fn pauli_combo(x: f64, y: f64, z: f64) -> Mat {
    [[c(z), Complex64::new(x, -y)], [Complex64::new(x, y), c(-z)]]
}

/// `exp(−iθH/2)` by truncated Taylor series with scaling and squaring.
pub fn series_exp(theta: f64, h: &Mat, terms: usize) -> Mat {
    let gen = scale(h, Complex64::new(0.0, -theta / 2.0));
    let norm: f64 = gen.iter().flatten().map(|z| z.norm()).sum();
    let squarings = norm.log2().ceil().max(0.0) as u32;
    let gen = scale(&gen, c(0.5f64.powi(squarings as i32)));
    let mut term = [[c(1.0), c(0.0)], [c(0.0), c(1.0)]];
    let mut sum = term;
    for k in 1..=terms {
        term = scale(&matmul(&term, &gen), c(1.0 / k as f64));
        sum = add(&sum, &term);
    }
    for _ in 0..squarings {
        sum = matmul(&sum, &sum);
    }
    sum
}

/// Series oracle for a pulse under both errors.
pub fn series_pulse(theta: f64, phase: f64, eps: f64, f: f64) -> Mat {
    let drive = 1.0 + eps;
    let h = pauli_combo(drive * phase.cos(), drive * phase.sin(), f);
    series_exp(theta, &h, 40)
}

/// Ideal rotation written out entry by entry.
pub fn explicit_rotation(theta: f64, phase: f64) -> Mat {
    let (s, co) = (theta / 2.0).sin_cos();
    [
        [c(co), -I * s * Complex64::from_polar(1.0, -phase)],
        [-I * s * Complex64::from_polar(1.0, phase), c(co)],
    ]
}

/// The alternative joint-error convention, in which the detuning scales
/// with the drive: `exp[−i(1+ε)θ(σφ + fσz)/2]`.
pub fn alternative_pulse(theta: f64, phase: f64, eps: f64, f: f64) -> Mat {
    let norm = (1.0 + f * f).sqrt();
    let half = (1.0 + eps) * theta * norm / 2.0;
    let (s, co) = half.sin_cos();
    let (nx, ny, nz) = (phase.cos() / norm, phase.sin() / norm, f / norm);
    [
        [
            Complex64::new(co, -s * nz),
            Complex64::new(-s * ny, -s * nx),
        ],
        [Complex64::new(s * ny, -s * nx), Complex64::new(co, s * nz)],
    ]
}

/// `|tr(Z(Φ)† U)| / 2`.
pub fn z_fidelity(phi: f64, u: &Mat) -> f64 {
    let tr = Complex64::from_polar(1.0, phi / 2.0) * u[0][0]
        + Complex64::from_polar(1.0, -phi / 2.0) * u[1][1];
    tr.norm() / 2.0
}

/// Applies pulses first-to-last under a given pulse model.
pub fn product<F: Fn(f64, f64) -> Mat>(pulses: &[(f64, f64)], model: F) -> Mat {
    pulses
        .iter()
        .fold([[c(1.0), c(0.0)], [c(0.0), c(1.0)]], |acc, &(t, p)| {
            matmul(&model(t, p), &acc)
        })
}

pub fn max_diff(a: &Mat, b: &Mat) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..2 {
        for col in 0..2 {
            worst = worst.max((a[r][col] - b[r][col]).norm());
        }
    }
    worst
}

pub fn circ(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Toggling transform written directly from its defining sum.
pub fn toggling_by_sum(lab: &[f64]) -> Vec<f64> {
    (0..lab.len())
        .map(|j| {
            let sign = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
            sign(j) * lab[j] + (0..j).map(|k| 2.0 * sign(k) * lab[k]).sum::<f64>()
        })
        .collect()
}

fn antisym_lab(a: f64, b: f64, phi: f64) -> Vec<f64> {
    vec![
        a,
        2.0 * a - b,
        a - b + phi / 4.0,
        -a + b + 3.0 * phi / 4.0,
        -2.0 * a + b + phi,
        -a + phi,
    ]
}

/// `(Σcos φ', Σ_j Σ_{k<j} sin(φ'_j − φ'_k))` for the two-parameter
/// antisymmetric six-pulse phases.
pub fn antisym_residuals(a: f64, b: f64, phi: f64) -> [f64; 2] {
    let t = toggling_by_sum(&antisym_lab(a, b, phi));
    let cos_sum: f64 = t.iter().map(|x| x.cos()).sum();
    let mut pair = 0.0;
    for j in 0..t.len() {
        for k in 0..j {
            pair += (t[j] - t[k]).sin();
        }
    }
    [cos_sum, pair]
}

/// All roots of the antisymmetric conditions in `(α, β)` reached by Newton
/// iteration from a grid of seeds.
pub fn antisym_roots(phi: f64) -> Vec<(f64, f64)> {
    let mut roots = Vec::new();
    let seeds = 20;
    for ia in 0..seeds {
        for ib in 0..seeds {
            let mut a = -PI + 2.0 * PI * (ia as f64 + 0.5) / seeds as f64;
            let mut b = -PI + 2.0 * PI * (ib as f64 + 0.5) / seeds as f64;
            for _ in 0..60 {
                let r = antisym_residuals(a, b, phi);
                let h = 1e-7;
                let ra = antisym_residuals(a + h, b, phi);
                let rb = antisym_residuals(a, b + h, phi);
                let ra2 = antisym_residuals(a - h, b, phi);
                let rb2 = antisym_residuals(a, b - h, phi);
                let j00 = (ra[0] - ra2[0]) / (2.0 * h);
                let j10 = (ra[1] - ra2[1]) / (2.0 * h);
                let j01 = (rb[0] - rb2[0]) / (2.0 * h);
                let j11 = (rb[1] - rb2[1]) / (2.0 * h);
                let det = j00 * j11 - j01 * j10;
                if det.abs() < 1e-14 {
                    break;
                }
                let da = (j11 * r[0] - j01 * r[1]) / det;
                let db = (-j10 * r[0] + j00 * r[1]) / det;
                a -= da;
                b -= db;
                if da.abs().max(db.abs()) < 1e-15 {
                    break;
                }
            }
            let r = antisym_residuals(a, b, phi);
            if r[0].abs().max(r[1].abs()) < 1e-12 {
                roots.push((a, b));
            }
        }
    }
    roots
}
