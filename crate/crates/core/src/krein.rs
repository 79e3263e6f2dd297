//! The indefinite scalar product `(psi|phi) = ∫ psi(x) phi*(-x) dx` and the
//! Krein-space structure it induces on sampled wavefunctions.
//!
//! The reflection `P` is an exact index reversal on a [`Grid`], the positive
//! and negative subspaces are the even and odd functions, and the fundamental
//! symmetry `J = Π⁺ - Π⁻` coincides with `P`. Quadrature is the trapezoid rule
//! with implicit zero end points, i.e. `h * Σ`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use thiserror::Error;

use crate::grid::WaveFunction;

/// Default relative neutrality threshold for [`classify_vector`].
pub const DEFAULT_NEUTRAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KreinError {
    #[error("wavefunctions are sampled on different grids")]
    GridMismatch,
    #[error("zero vector has no Krein signature")]
    ZeroVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Signature {
    Positive,
    Negative,
    Neutral,
}

impl Signature {
    pub fn as_str(&self) -> &'static str {
        match self {
            Signature::Positive => "positive",
            Signature::Negative => "negative",
            Signature::Neutral => "neutral",
        }
    }

    pub fn sign(&self) -> Option<i8> {
        match self {
            Signature::Positive => Some(1),
            Signature::Negative => Some(-1),
            Signature::Neutral => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KreinReport {
    /// `(psi|psi)`; real up to rounding.
    pub krein_product: Complex64,
    /// `<psi|psi> = (psi|J psi)`, the positive Krein-space norm squared.
    pub hilbert_norm2: f64,
    pub signature: Signature,
    pub even_share: f64,
    pub odd_share: f64,
}

impl KreinReport {
    /// `|(psi|psi)| / <psi|psi>`.
    pub fn neutrality(&self) -> f64 {
        self.krein_product.norm() / self.hilbert_norm2
    }
}

fn check_grid(a: &WaveFunction, b: &WaveFunction) -> Result<(), KreinError> {
    if a.same_grid(b) {
        Ok(())
    } else {
        Err(KreinError::GridMismatch)
    }
}

/// `P psi(x) = psi(-x)`.
pub fn apply_parity(psi: &WaveFunction) -> WaveFunction {
    let samples = psi.samples().iter().rev().copied().collect();
    WaveFunction::from_samples_unchecked(*psi.grid(), samples)
}

/// `theta psi(x) = psi*(-x)`, the antilinear PT operator.
pub fn apply_theta(psi: &WaveFunction) -> WaveFunction {
    let samples = psi.samples().iter().rev().map(|z| z.conj()).collect();
    WaveFunction::from_samples_unchecked(*psi.grid(), samples)
}

/// `h Σ psi_i phi*_{n-1-i}`.
///
/// Mirror-image terms are added in pairs, so `(psi|psi)` comes out exactly
/// real in floating point.
pub fn krein_inner(psi: &WaveFunction, phi: &WaveFunction) -> Result<Complex64, KreinError> {
    check_grid(psi, phi)?;
    let a = psi.samples();
    let b = phi.samples();
    let n = a.len();
    let mut sum = a[n / 2] * b[n / 2].conj();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        sum += a[i] * b[j].conj() + a[j] * b[i].conj();
    }
    Ok(sum * psi.grid().spacing())
}

pub fn hilbert_inner(psi: &WaveFunction, phi: &WaveFunction) -> Result<Complex64, KreinError> {
    check_grid(psi, phi)?;
    let sum: Complex64 = psi
        .samples()
        .iter()
        .zip(phi.samples().iter())
        .map(|(a, b)| a * b.conj())
        .sum();
    Ok(sum * psi.grid().spacing())
}

/// `<psi|psi>`.
pub fn hilbert_norm2(psi: &WaveFunction) -> f64 {
    psi.samples().iter().map(|z| z.norm_sqr()).sum::<f64>() * psi.grid().spacing()
}

/// `(K⁺ psi, K⁻ psi)` with `K± = (1 ± P) / 2`.
pub fn parity_decompose(psi: &WaveFunction) -> (WaveFunction, WaveFunction) {
    let s = psi.samples();
    let n = s.len();
    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = (s[i], s[n - 1 - i]);
        plus.push((a + b) * 0.5);
        minus.push((a - b) * 0.5);
    }
    let grid = *psi.grid();
    (
        WaveFunction::from_samples_unchecked(grid, plus),
        WaveFunction::from_samples_unchecked(grid, minus),
    )
}

/// Sign of `(psi|psi)` relative to `<psi|psi>`.
pub fn classify_vector(psi: &WaveFunction, tol: f64) -> Result<KreinReport, KreinError> {
    let hilbert = hilbert_norm2(psi);
    if hilbert == 0.0 {
        return Err(KreinError::ZeroVector);
    }
    let krein = krein_inner(psi, psi)?;
    debug_assert!(krein.im.abs() <= 1e-10 * hilbert + f64::EPSILON);
    let threshold = tol * hilbert;
    let signature = if krein.re > threshold {
        Signature::Positive
    } else if krein.re < -threshold {
        Signature::Negative
    } else {
        Signature::Neutral
    };
    let (plus, minus) = parity_decompose(psi);
    let even = hilbert_norm2(&plus);
    let odd = hilbert_norm2(&minus);
    Ok(KreinReport {
        krein_product: krein,
        hilbert_norm2: hilbert,
        signature,
        even_share: even / hilbert,
        odd_share: odd / hilbert,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperpositionCheck {
    pub admissible: bool,
    pub reason: String,
    /// The combined vector, only when admissible.
    pub sum: Option<WaveFunction>,
}

/// Superselection: combinations may not mix the positive and negative sectors
/// and may not produce a neutral vector.
pub fn validate_superposition(
    terms: &[(Complex64, WaveFunction)],
    tol: f64,
) -> Result<SuperpositionCheck, KreinError> {
    let Some((_, first)) = terms.first() else {
        return Err(KreinError::ZeroVector);
    };
    let mut has_positive = false;
    let mut has_negative = false;
    let mut sum = WaveFunction::zeros(*first.grid());
    for (k, (c, psi)) in terms.iter().enumerate() {
        check_grid(first, psi)?;
        match classify_vector(psi, tol)?.signature {
            Signature::Positive => has_positive = true,
            Signature::Negative => has_negative = true,
            Signature::Neutral => {
                return Ok(SuperpositionCheck {
                    admissible: false,
                    reason: format!("term {k} is a neutral vector"),
                    sum: None,
                })
            }
        }
        sum = &sum + &psi.scale(*c);
    }
    if has_positive && has_negative {
        return Ok(SuperpositionCheck {
            admissible: false,
            reason: "mixes positive and negative signatures".to_string(),
            sum: None,
        });
    }
    let report = classify_vector(&sum, tol)?;
    if report.signature == Signature::Neutral {
        return Ok(SuperpositionCheck {
            admissible: false,
            reason: "superposition is neutral".to_string(),
            sum: None,
        });
    }
    Ok(SuperpositionCheck {
        admissible: true,
        reason: format!("single {} sector", report.signature.as_str()),
        sum: Some(sum),
    })
}

/// Continuum-normalized transform `psi~(p_k) = h / sqrt(2 pi) Σ_j psi_j e^{-i p_k x_j}`
/// at `p_k = 2 pi k / (n h)`, `k = 0..n` taken modulo `n`.
pub fn momentum_transform(psi: &WaveFunction) -> Vec<Complex64> {
    let grid = psi.grid();
    let n = grid.len();
    let mut buf = psi.samples().to_vec();
    FftPlanner::<f64>::new()
        .plan_fft_forward(n)
        .process(&mut buf);
    let prefactor = grid.spacing() / (2.0 * PI).sqrt();
    let center = grid.center() as f64;
    buf.iter()
        .enumerate()
        .map(|(k, z)| {
            // x_j = (j - c) h shifts the kernel by e^{2 pi i k c / n}
            let shift = Complex64::from_polar(1.0, 2.0 * PI * (k as f64) * center / n as f64);
            z * shift * prefactor
        })
        .collect()
}

/// `∫ dp psi~(p) phi~*(-p)` on the discrete momentum grid.
///
/// For samples on a symmetric grid this equals [`krein_inner`] up to FFT
/// rounding; the continuum identity is met once the functions have decayed
/// at `±L`.
pub fn momentum_krein_inner(
    psi: &WaveFunction,
    phi: &WaveFunction,
) -> Result<Complex64, KreinError> {
    check_grid(psi, phi)?;
    let n = psi.len();
    let a = momentum_transform(psi);
    let b = momentum_transform(phi);
    let dp = 2.0 * PI / (n as f64 * psi.grid().spacing());
    let sum: Complex64 = (0..n).map(|k| a[k] * b[(n - k) % n].conj()).sum();
    Ok(sum * dp)
}
