//! Exact combinatorics and Monte Carlo checks for mixed *-moments of
//! continuous circular systems and the triangular operator.
//!
//! The exact side sums over noncrossing pair partitions adapted to a star
//! word, colors blocks with points of `[0,1]` (or of a finite grid), and
//! measures the resulting order regions by counting linear extensions. The
//! numerical side samples Gaussian random matrices with the matching variance
//! pattern and estimates normalized traces of the same words.
//!
//! ```
//! use trimoments::{moments, word::StarWord, Limits};
//!
//! let w = StarWord::tt_power(3);
//! let res = moments::eta_moment(&w, &moments::OperatorSpec::Triangular, &Limits::default()).unwrap();
//! assert_eq!(res.value, moments::triangular_moment_closed_form(3));
//! ```

pub mod error;
pub mod partitions;
pub mod randmat;
pub mod rational;
pub mod trees;
pub mod verify;
pub mod volumes;
pub mod word;

pub mod moments;

pub use error::{Error, Result};
pub use rational::Rational;

/// Resource limits guarding the exponential enumerations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest ground set size accepted by partition enumeration.
    pub max_points: usize,
    /// Largest vertex count accepted by ordered tree enumeration.
    pub max_vertices: usize,
    /// Largest `n` for alternating tree enumeration (trees on `n+1` vertices).
    pub max_alternating: usize,
    /// Largest poset accepted by the linear extension DP.
    pub max_poset: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_points: 20,
            max_vertices: 10,
            max_alternating: 6,
            max_poset: 22,
        }
    }
}

impl Limits {
    /// Limits used under `--unsafe-limits`. The poset bound stays at the
    /// width of the 128-bit DP counters.
    pub fn relaxed() -> Self {
        Limits {
            max_points: 30,
            max_vertices: 16,
            max_alternating: 9,
            max_poset: volumes::MAX_POSET_HARD,
        }
    }
}

/// Catalan number `C_n` as an exact integer.
pub fn catalan(n: usize) -> num_bigint::BigUint {
    use num_bigint::BigUint;
    // C_{k+1} = C_k * 2(2k+1) / (k+2)
    let mut c = BigUint::from(1u32);
    for k in 0..n {
        c = c * BigUint::from(2 * (2 * k + 1)) / BigUint::from(k + 2);
    }
    c
}

/// `n!` as an exact integer.
pub fn factorial(n: usize) -> num_bigint::BigUint {
    (1..=n).fold(num_bigint::BigUint::from(1u32), |acc, k| acc * k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalan_small() {
        let got: Vec<u64> = (0..10).map(|n| catalan(n).try_into().unwrap()).collect();
        assert_eq!(got, vec![1, 1, 2, 5, 14, 42, 132, 429, 1430, 4862]);
    }

    #[test]
    fn factorial_small() {
        assert_eq!(factorial(0), 1u32.into());
        assert_eq!(factorial(6), 720u32.into());
    }
}
