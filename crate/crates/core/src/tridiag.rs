//! Complex tridiagonal LU with partial pivoting (the `gttrf`/`gttrs` scheme).

use num_complex::Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SingularPivot {
    pub index: usize,
}

#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    lower: Vec<Complex64>,
    diag: Vec<Complex64>,
    upper: Vec<Complex64>,
    upper2: Vec<Complex64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    /// Factors the matrix with sub-diagonal `lower`, diagonal `diag` and
    /// super-diagonal `upper`.
    pub fn factor(
        lower: &[Complex64],
        diag: &[Complex64],
        upper: &[Complex64],
    ) -> Result<Self, SingularPivot> {
        let n = diag.len();
        assert!(n >= 1 && lower.len() + 1 == n && upper.len() + 1 == n);
        let mut dl = lower.to_vec();
        let mut d = diag.to_vec();
        let mut du = upper.to_vec();
        let mut du2 = vec![Complex64::new(0.0, 0.0); n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n - 1 {
            if d[i].l1_norm() >= dl[i].l1_norm() {
                if d[i] == Complex64::new(0.0, 0.0) {
                    return Err(SingularPivot { index: i });
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du[i + 1];
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == Complex64::new(0.0, 0.0) {
            return Err(SingularPivot { index: n - 1 });
        }
        Ok(TridiagonalLu {
            lower: dl,
            diag: d,
            upper: du,
            upper2: du2,
            swapped,
        })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Overwrites `b` with the solution of `A x = b`.
    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let n = self.diag.len();
        assert_eq!(b.len(), n);
        for i in 0..n - 1 {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.lower[i] * b[i];
            } else {
                b[i + 1] -= self.lower[i] * b[i];
            }
        }
        b[n - 1] /= self.diag[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.upper[n - 2] * b[n - 1]) / self.diag[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.upper[i] * b[i + 1] - self.upper2[i] * b[i + 2]) / self.diag[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn matvec(
        lower: &[Complex64],
        diag: &[Complex64],
        upper: &[Complex64],
        x: &[Complex64],
    ) -> Vec<Complex64> {
        let n = diag.len();
        (0..n)
            .map(|i| {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += lower[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    s += upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    #[test]
    fn solves_with_and_without_pivoting() {
        // tiny leading diagonal forces row interchanges
        let diag = vec![
            c(1e-12, 0.0),
            c(2.0, 1.0),
            c(-1.0, 0.5),
            c(3.0, 0.0),
            c(0.1, -2.0),
        ];
        let lower = vec![c(1.0, 0.0), c(0.5, -0.5), c(4.0, 1.0), c(-2.0, 0.0)];
        let upper = vec![c(2.0, 0.0), c(-1.0, 0.0), c(0.0, 1.0), c(1.5, 0.5)];
        let x: Vec<Complex64> = (0..5).map(|k| c(k as f64 + 1.0, -(k as f64))).collect();
        let b = matvec(&lower, &diag, &upper, &x);
        let lu = TridiagonalLu::factor(&lower, &diag, &upper).unwrap();
        let mut sol = b.clone();
        lu.solve_in_place(&mut sol);
        for (a, e) in sol.iter().zip(&x) {
            assert!((a - e).norm() < 1e-10, "{a} vs {e}");
        }
    }

    #[test]
    fn detects_exact_singularity() {
        let diag = vec![c(1.0, 0.0), c(1.0, 0.0)];
        let off = vec![c(1.0, 0.0)];
        assert!(TridiagonalLu::factor(&off, &diag, &off).is_err());
    }

    #[test]
    fn two_by_two_and_three_by_three() {
        for n in [2usize, 3] {
            let diag = vec![c(4.0, 1.0); n];
            let off = vec![c(-1.0, 0.0); n - 1];
            let x: Vec<Complex64> = (0..n).map(|k| c(1.0, k as f64)).collect();
            let b = matvec(&off, &diag, &off, &x);
            let lu = TridiagonalLu::factor(&off, &diag, &off).unwrap();
            let mut sol = b;
            lu.solve_in_place(&mut sol);
            for (a, e) in sol.iter().zip(&x) {
                assert!((a - e).norm() < 1e-13);
            }
        }
    }
}
