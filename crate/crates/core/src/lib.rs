//! PT-symmetric quantum mechanics on a real line.
//!
//! The crate discretizes `H = -d²/dx² + V(x)` for potentials with
//! `V*(-x) = V(x)` on a symmetric Dirichlet grid and works with the
//! indefinite product `(psi|phi) = ∫ psi(x) phi*(-x) dx`:
//!
//! * [`potential`]: polynomial potential parser and PT check
//! * [`grid`], [`krein`]: wavefunctions, parity, `theta = PT`, the Krein
//!   product and its positive norm
//! * [`eigen`]: Hamiltonian assembly, spectrum, shooting refinement, PT gauge
//! * [`observables`]: currents, amplitudes and operator averages
//! * [`dynamics`]: Crank–Nicolson evolution and Heisenberg-equation checks

pub mod dynamics;
pub mod eigen;
pub mod grid;
pub mod krein;
pub mod observables;
pub mod potential;
pub mod tridiag;

pub use num_complex::Complex64;

pub use eigen::{EigenPair, HamiltonianOp};
pub use grid::{Grid, WaveFunction};
pub use krein::{KreinReport, Signature};
pub use potential::PotentialExpr;
