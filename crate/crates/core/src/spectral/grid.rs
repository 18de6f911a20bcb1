use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest eigenvalue of the Stokes operator on the mean-free periodic box `[0,1]^d`.
pub const LAMBDA1: f64 = 4.0 * PI * PI;

/// Uniform periodic grid on the unit box `[0,1]^d`, `d` in {2, 3}.
///
/// Physical arrays are row-major with the last coordinate contiguous. Spectral
/// arrays use the real-to-complex layout: full length `n` on every axis but the
/// last, which stores only the `n/2 + 1` non-negative wavenumbers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Grid {
    dim: usize,
    n: usize,
}

impl Grid {
    pub fn new(dim: usize, n: usize) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidGrid(format!("dim must be 2 or 3, got {dim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n must be a power of two >= 8, got {n}"
            )));
        }
        Ok(Grid { dim, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Number of stored wavenumbers along the last axis.
    pub fn half_n(&self) -> usize {
        self.n / 2 + 1
    }

    pub fn physical_shape(&self) -> Vec<usize> {
        vec![self.n; self.dim]
    }

    pub fn spectral_shape(&self) -> Vec<usize> {
        let mut shape = vec![self.n; self.dim];
        shape[self.dim - 1] = self.half_n();
        shape
    }

    pub fn physical_len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn spectral_len(&self) -> usize {
        self.n.pow(self.dim as u32 - 1) * self.half_n()
    }

    /// Signed integer wavenumber for storage index `i` along `axis`.
    fn signed(&self, i: usize, axis: usize) -> i64 {
        if axis == self.dim - 1 || i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Integer wave vector of the mode stored at flat spectral index `idx`.
    /// Unused trailing components are zero.
    pub fn mode(&self, idx: usize) -> [i64; 3] {
        let nh = self.half_n();
        let mut k = [0i64; 3];
        let last = idx % nh;
        k[self.dim - 1] = last as i64;
        let mut rest = idx / nh;
        for axis in (0..self.dim - 1).rev() {
            k[axis] = self.signed(rest % self.n, axis);
            rest /= self.n;
        }
        k
    }

    /// Iterator over the integer wave vectors of all stored modes, in storage order.
    pub fn modes(&self) -> impl Iterator<Item = [i64; 3]> + '_ {
        (0..self.spectral_len()).map(move |idx| self.mode(idx))
    }

    /// Flat storage index of `k`, or `None` if `k` lives in the unstored
    /// (conjugate) half or outside the representable band. The boolean is
    /// `true` when the stored value must be conjugated to obtain `coeff(k)`.
    pub fn index_of(&self, k: [i64; 3]) -> Option<(usize, bool)> {
        let half = (self.n / 2) as i64;
        let mut k = k;
        let mut conj = false;
        if k[self.dim - 1] < 0 {
            for c in k.iter_mut().take(self.dim) {
                *c = -*c;
            }
            conj = true;
        }
        let mut idx = 0usize;
        for (axis, &kj) in k.iter().enumerate().take(self.dim) {
            if axis == self.dim - 1 {
                if kj > half {
                    return None;
                }
                idx = idx * self.half_n() + kj as usize;
            } else {
                if kj < -half || kj >= half {
                    return None;
                }
                let i = if kj < 0 { kj + self.n as i64 } else { kj };
                idx = idx * self.n + i as usize;
            }
        }
        Some((idx, conj))
    }

    /// Physical wave vector `2πk`.
    pub fn wavevector(&self, k: [i64; 3]) -> [f64; 3] {
        [
            2.0 * PI * k[0] as f64,
            2.0 * PI * k[1] as f64,
            2.0 * PI * k[2] as f64,
        ]
    }

    /// A mode touching the Nyquist index `±n/2` on any axis.
    pub fn is_nyquist(&self, k: [i64; 3]) -> bool {
        let half = (self.n / 2) as i64;
        k.iter().take(self.dim).any(|&kj| kj.abs() == half)
    }

    /// Mode survives the 2/3 rule: `|k_j| < n/3` on every axis.
    pub fn is_retained(&self, k: [i64; 3]) -> bool {
        k.iter()
            .take(self.dim)
            .all(|&kj| 3 * kj.unsigned_abs() < self.n as u64)
    }

    /// Multiplicity of a stored mode in Parseval sums: interior last-axis
    /// modes stand for themselves and their conjugate partner.
    pub fn hermitian_weight(&self, k: [i64; 3]) -> f64 {
        let kl = k[self.dim - 1];
        if kl == 0 || kl == (self.n / 2) as i64 {
            1.0
        } else {
            2.0
        }
    }

    /// Physical coordinates of flat physical index `idx`.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let mut x = [0.0; 3];
        let mut rest = idx;
        for axis in (0..self.dim).rev() {
            x[axis] = (rest % self.n) as f64 / self.n as f64;
            rest /= self.n;
        }
        x
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dim == 2 {
            write!(f, "{}^2", self.n)
        } else {
            write!(f, "{}^3", self.n)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(Grid::new(1, 16).is_err());
        assert!(Grid::new(4, 16).is_err());
        assert!(Grid::new(2, 4).is_err());
        assert!(Grid::new(2, 12).is_err());
        assert!(Grid::new(3, 8).is_ok());
    }

    #[test]
    fn mode_index_round_trip() {
        for grid in [Grid::new(2, 8).unwrap(), Grid::new(3, 8).unwrap()] {
            for idx in 0..grid.spectral_len() {
                let k = grid.mode(idx);
                assert_eq!(grid.index_of(k), Some((idx, false)));
            }
        }
    }

    #[test]
    fn negative_last_axis_maps_to_conjugate() {
        let grid = Grid::new(2, 8).unwrap();
        let (idx, conj) = grid.index_of([2, -3, 0]).unwrap();
        assert!(conj);
        assert_eq!(grid.mode(idx), [-2, 3, 0]);
    }

    #[test]
    fn two_thirds_band() {
        let grid = Grid::new(2, 16).unwrap();
        assert!(grid.is_retained([5, -5, 0]));
        assert!(!grid.is_retained([6, 0, 0]));
        assert!(!grid.is_retained([0, 7, 0]));
        assert!(!grid.is_retained([-8, 0, 0]));
    }
}
