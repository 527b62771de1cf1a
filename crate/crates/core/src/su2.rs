//! Closed-form SU(2) algebra for single-qubit pulses.
//!
//! Every propagator in the crate is a [`Unitary2`]. Rotations are evaluated
//! with the axis-angle formula, never by a general matrix exponential.

use std::fmt;
use std::ops::Mul;

pub use num_complex::Complex64;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Slack allowed above 1 before [`fidelity`] stops clamping.
const FIDELITY_CLAMP_SLACK: f64 = 1e-12;

/// A 2x2 complex matrix, row-major. Used for unitary propagators and gates.
#[derive(Clone, Copy, PartialEq)]
pub struct Unitary2 {
    m: [[Complex64; 2]; 2],
}

impl Unitary2 {
    pub const IDENTITY: Unitary2 = Unitary2 {
        m: [[ONE, ZERO], [ZERO, ONE]],
    };

    pub const fn new(u00: Complex64, u01: Complex64, u10: Complex64, u11: Complex64) -> Self {
        Unitary2 {
            m: [[u00, u01], [u10, u11]],
        }
    }

    /// `a·I − i·(bx·σx + by·σy + bz·σz)` for real `a`, `b`.
    ///
    /// Every SU(2) element can be written this way with `a² + |b|² = 1`.
    pub fn from_axis_form(a: f64, bx: f64, by: f64, bz: f64) -> Self {
        Unitary2::new(
            Complex64::new(a, -bz),
            Complex64::new(-by, -bx),
            Complex64::new(by, -bx),
            Complex64::new(a, bz),
        )
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.m[row][col]
    }

    pub fn entries(&self) -> [[Complex64; 2]; 2] {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.m;
        Unitary2::new(
            m[0][0].conj(),
            m[1][0].conj(),
            m[0][1].conj(),
            m[1][1].conj(),
        )
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let m = &self.m;
        Unitary2::new(c * m[0][0], c * m[0][1], c * m[1][0], c * m[1][1])
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Unitary2) -> f64 {
        let mut worst = 0.0f64;
        for r in 0..2 {
            for c in 0..2 {
                worst = worst.max((self.m[r][c] - other.m[r][c]).norm());
            }
        }
        worst
    }

    /// Largest entrywise deviation of `U†U` from the identity.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Unitary2::IDENTITY)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol && (self.det().norm() - 1.0).abs() <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.m
            .iter()
            .flatten()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Mul for Unitary2 {
    type Output = Unitary2;

    fn mul(self, rhs: Unitary2) -> Unitary2 {
        let a = &self.m;
        let b = &rhs.m;
        Unitary2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl fmt::Debug for Unitary2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.m;
        write!(
            f,
            "[[{:.6}, {:.6}], [{:.6}, {:.6}]]",
            m[0][0], m[0][1], m[1][0], m[1][1]
        )
    }
}

/// `(θ)_φ = exp(−iθσ_φ/2)` with `σ_φ = cos φ·σx + sin φ·σy`.
pub fn rotation(theta: f64, phase: f64) -> Unitary2 {
    let (s, c) = (theta / 2.0).sin_cos();
    Unitary2::from_axis_form(c, s * phase.cos(), s * phase.sin(), 0.0)
}

/// `exp[−iθ((1+ε)σ_φ + fσz)/2]`: a pulse under both pulse-strength error
/// `epsilon` and off-resonance error `f`.
///
/// PSE scales the in-plane drive only; ORE adds a fixed z component. On
/// `f = 0` this is `rotation((1+ε)θ, φ)`; on `ε = 0` it is the tilted-axis
/// off-resonance pulse.
pub fn perturbed_rotation(theta: f64, phase: f64, epsilon: f64, f: f64) -> Unitary2 {
    let drive = 1.0 + epsilon;
    let omega = drive.hypot(f);
    let half = theta * omega / 2.0;
    // sin(θΩ/2)/Ω, continuous through Ω = 0 where it tends to θ/2.
    let sinc = if omega > 0.0 {
        half.sin() / omega
    } else {
        theta / 2.0
    };
    Unitary2::from_axis_form(
        half.cos(),
        sinc * drive * phase.cos(),
        sinc * drive * phase.sin(),
        sinc * f,
    )
}

/// The target gate `Z_Φ = diag(e^{−iΦ/2}, e^{iΦ/2})`.
pub fn ideal_z(phi: f64) -> Unitary2 {
    let (s, c) = (phi / 2.0).sin_cos();
    Unitary2::new(Complex64::new(c, -s), ZERO, ZERO, Complex64::new(c, s))
}

/// Propagator fidelity `|tr(U†V)| / 2`.
///
/// Round-off overshoot up to 1e-12 above one is clamped; anything larger is
/// returned unchanged so that it stays visible.
pub fn fidelity(u: &Unitary2, v: &Unitary2) -> f64 {
    let f = (u.adjoint() * *v).trace().norm() / 2.0;
    if f > 1.0 && f <= 1.0 + FIDELITY_CLAMP_SLACK {
        1.0
    } else {
        f
    }
}

/// `1 − fidelity(u, v)` evaluated without cancellation.
///
/// For `W = U†V = e^{iγ}(a·I − i b·σ)` the infidelity is `|b|²/(1 + |a|)`,
/// and `|b|²` is read directly from the entries of `W`. This stays accurate
/// far below the ~1e-16 floor of `1 − |tr W|/2`.
pub fn infidelity(u: &Unitary2, v: &Unitary2) -> f64 {
    let w = u.adjoint() * *v;
    let off = (w.get(0, 1).norm_sqr() + w.get(1, 0).norm_sqr()) / 2.0;
    let diag = (w.get(0, 0) - w.get(1, 1)).norm_sqr() / 4.0;
    let fid = (w.trace().norm() / 2.0).min(1.0);
    (off + diag) / (1.0 + fid)
}
