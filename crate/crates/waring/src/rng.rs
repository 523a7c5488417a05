//! Seeded randomness. Every randomized routine takes an explicit 64-bit seed;
//! no wall-clock entropy anywhere.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::linalg::{c, C64};

pub struct SeededRng(ChaCha8Rng);

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        SeededRng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.0)
    }

    /// Standard complex Gaussian (independent N(0,1) parts).
    pub fn cnormal(&mut self) -> C64 {
        c(self.normal(), self.normal())
    }

    pub fn cvector(&mut self, len: usize) -> DVector<C64> {
        DVector::from_fn(len, |_, _| self.cnormal())
    }

    pub fn cmatrix(&mut self, rows: usize, cols: usize) -> DMatrix<C64> {
        DMatrix::from_fn(rows, cols, |_, _| self.cnormal())
    }

    pub fn uniform01(&mut self) -> f64 {
        use rand::Rng;
        self.0.random::<f64>()
    }

    pub fn below(&mut self, bound: u64) -> u64 {
        use rand::Rng;
        self.0.random_range(0..bound)
    }
}
