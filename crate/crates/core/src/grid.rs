//! Symmetric uniform grids and sampled wavefunctions.

use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("half width must be finite and positive, got {0}")]
    HalfWidth(f64),
    #[error("point count must be odd and at least 3, got {0}")]
    PointCount(usize),
    #[error("expected {expected} samples, got {got}")]
    SampleCount { expected: usize, got: usize },
    #[error("sample {index} is not finite")]
    NonFinite { index: usize },
}

/// Interior points of `[-L, L]` with implicit Dirichlet zeros at both ends.
///
/// Points are `x_i = (i - c) h` with `c = (n - 1) / 2` and `h = 2L / (n + 1)`,
/// so the reflection `x -> -x` maps index `i` to `n - 1 - i` exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    half_width: f64,
    n: usize,
    spacing: f64,
}

impl Grid {
    pub fn new(half_width: f64, n: usize) -> Result<Self, GridError> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(GridError::HalfWidth(half_width));
        }
        if n < 3 || n.is_multiple_of(2) {
            return Err(GridError::PointCount(n));
        }
        Ok(Grid {
            half_width,
            n,
            spacing: 2.0 * half_width / (n as f64 + 1.0),
        })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Index of `x = 0`.
    pub fn center(&self) -> usize {
        (self.n - 1) / 2
    }

    pub fn x(&self, i: usize) -> f64 {
        let c = self.center();
        if i >= c {
            (i - c) as f64 * self.spacing
        } else {
            -((c - i) as f64 * self.spacing)
        }
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(move |i| self.x(i))
    }

    /// Same interval with the spacing halved (`n -> 2n + 1`).
    pub fn refined(&self) -> Grid {
        Grid::new(self.half_width, 2 * self.n + 1).expect("refined grid stays valid")
    }
}

/// Complex samples of a wavefunction on a [`Grid`].
///
/// Samples are immutable once built; clones share the buffer.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Grid,
    samples: Arc<[Complex64]>,
}

impl WaveFunction {
    pub fn new(grid: Grid, samples: Vec<Complex64>) -> Result<Self, GridError> {
        if samples.len() != grid.len() {
            return Err(GridError::SampleCount {
                expected: grid.len(),
                got: samples.len(),
            });
        }
        if let Some(index) = samples
            .iter()
            .position(|z| !(z.re.is_finite() && z.im.is_finite()))
        {
            return Err(GridError::NonFinite { index });
        }
        Ok(WaveFunction {
            grid,
            samples: samples.into(),
        })
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Result<Self, GridError> {
        Self::new(grid, grid.points().map(f).collect())
    }

    pub fn from_real_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Result<Self, GridError> {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn zeros(grid: Grid) -> Self {
        WaveFunction {
            grid,
            samples: vec![Complex64::new(0.0, 0.0); grid.len()].into(),
        }
    }

    /// Builds from samples produced by internal arithmetic on the same grid.
    pub(crate) fn from_samples_unchecked(grid: Grid, samples: Vec<Complex64>) -> Self {
        debug_assert_eq!(samples.len(), grid.len());
        WaveFunction {
            grid,
            samples: samples.into(),
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> WaveFunction {
        Self::from_samples_unchecked(self.grid, self.samples.iter().map(|&z| f(z)).collect())
    }

    pub fn scale(&self, c: Complex64) -> WaveFunction {
        self.map(|z| c * z)
    }

    /// Euclidean norm of the raw samples (no quadrature weight).
    pub fn l2(&self) -> f64 {
        self.samples
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn same_grid(&self, other: &WaveFunction) -> bool {
        self.grid == other.grid
    }

    fn zip_with(
        &self,
        other: &WaveFunction,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> WaveFunction {
        assert!(
            self.same_grid(other),
            "wavefunctions live on different grids"
        );
        Self::from_samples_unchecked(
            self.grid,
            self.samples
                .iter()
                .zip(other.samples.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }
}

impl Add for &WaveFunction {
    type Output = WaveFunction;
    fn add(self, rhs: &WaveFunction) -> WaveFunction {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &WaveFunction {
    type Output = WaveFunction;
    fn sub(self, rhs: &WaveFunction) -> WaveFunction {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &WaveFunction {
    type Output = WaveFunction;
    fn neg(self) -> WaveFunction {
        self.map(|z| -z)
    }
}

impl Mul<&WaveFunction> for Complex64 {
    type Output = WaveFunction;
    fn mul(self, rhs: &WaveFunction) -> WaveFunction {
        rhs.scale(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert_eq!(Grid::new(1.0, 2), Err(GridError::PointCount(2)));
        assert_eq!(Grid::new(1.0, 1), Err(GridError::PointCount(1)));
        assert_eq!(Grid::new(1.0, 2000), Err(GridError::PointCount(2000)));
        assert!(matches!(Grid::new(0.0, 3), Err(GridError::HalfWidth(_))));
        assert!(matches!(
            Grid::new(f64::NAN, 3),
            Err(GridError::HalfWidth(_))
        ));
    }

    #[test]
    fn points_are_reflection_symmetric() {
        let g = Grid::new(10.0, 2001).unwrap();
        assert_eq!(g.x(g.center()), 0.0);
        for i in 0..g.len() {
            assert_eq!(g.x(i), -g.x(g.len() - 1 - i));
        }
        assert!((g.x(0) - (-10.0 + g.spacing())).abs() < 1e-12);
        let small = Grid::new(1.0, 3).unwrap();
        assert_eq!(small.spacing(), 0.5);
        assert_eq!(small.points().collect::<Vec<_>>(), vec![-0.5, 0.0, 0.5]);
    }

    #[test]
    fn refined_halves_spacing() {
        let g = Grid::new(10.0, 1001).unwrap();
        let r = g.refined();
        assert_eq!(r.len(), 2003);
        assert!((r.spacing() * 2.0 - g.spacing()).abs() < 1e-15);
    }

    #[test]
    fn wavefunction_validation() {
        let g = Grid::new(1.0, 3).unwrap();
        assert!(matches!(
            WaveFunction::new(g, vec![Complex64::new(0.0, 0.0); 2]),
            Err(GridError::SampleCount {
                expected: 3,
                got: 2
            })
        ));
        let bad = vec![
            Complex64::new(0.0, 0.0),
            Complex64::new(f64::INFINITY, 0.0),
            Complex64::new(0.0, 0.0),
        ];
        assert_eq!(
            WaveFunction::new(g, bad),
            Err(GridError::NonFinite { index: 1 })
        );
    }
}
