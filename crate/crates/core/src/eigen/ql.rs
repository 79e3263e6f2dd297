//! Implicit QL iteration for complex symmetric tridiagonal matrices.
//!
//! Same recurrence as the real symmetric `tqli`, run in complex arithmetic
//! with complex orthogonal rotations (`c² + s² = 1`). The transformations are
//! not unitary, so the eigenvalues returned here serve as shifts for inverse
//! iteration rather than as final values.

use num_complex::Complex64;

/// Number of QL sweeps allowed per eigenvalue before giving up.
pub const MAX_SWEEPS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QlFailure {
    pub index: usize,
}

/// All eigenvalues of the symmetric tridiagonal matrix with diagonal `diag`
/// and off-diagonal `off` (`off[i]` couples `i` and `i + 1`).
pub fn symmetric_tridiagonal_eigenvalues(
    diag: &[Complex64],
    off: &[Complex64],
) -> Result<Vec<Complex64>, QlFailure> {
    let n = diag.len();
    assert_eq!(off.len() + 1, n.max(1));
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(Complex64::new(0.0, 0.0));
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);

    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].l1_norm() + d[m + 1].l1_norm();
                if e[m].l1_norm() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > MAX_SWEEPS {
                return Err(QlFailure { index: l });
            }
            // Wilkinson-type shift from the leading 2x2 block.
            let mut g = (d[l + 1] - d[l]) / (e[l] * 2.0);
            let mut r = (g * g + one).sqrt();
            let denom = if (g + r).l1_norm() >= (g - r).l1_norm() {
                g + r
            } else {
                g - r
            };
            g = d[m] - d[l] + e[l] / denom;
            let mut s = one;
            let mut c = one;
            let mut p = zero;
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = (f * f + g * g).sqrt();
                e[i + 1] = r;
                if r.l1_norm() <= f64::MIN_POSITIVE * (f.l1_norm() + g.l1_norm()) || r == zero {
                    d[i + 1] -= p;
                    e[m] = zero;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                let t = (d[i] - g) * s + c * b * 2.0;
                p = s * t;
                d[i + 1] = g + p;
                g = c * t - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = zero;
        }
    }
    Ok(d)
}
