//! Finite-dimensional quantum states over explicit subsystem lists.
//!
//! Subsystems are indexed left to right; flat indices are big-endian
//! mixed-radix (the first subsystem is most significant). All entropies
//! are base 2.

mod density;
mod state;

pub use density::DensityMatrix;
pub use state::{MeasBasis, StateVector};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for norm, trace and hermiticity checks.
pub const NORM_TOL: f64 = 1e-9;
/// Eigenvalues in [-EIG_TOL, 0) are clipped to zero; anything lower is an error.
pub const EIG_TOL: f64 = 1e-9;
/// Eigenvalues below this floor contribute nothing to entropies.
pub const ENTROPY_FLOOR: f64 = 1e-12;
/// Conditioning on an outcome below this probability is refused.
pub const ZERO_PROB_TOL: f64 = 1e-15;
/// Default cap on total Hilbert-space dimension.
pub const DEFAULT_DIM_CAP: usize = 1 << 14;

/// Current cap on total dimension, overridable via `SQRNG_DIM_CAP`.
pub fn dim_cap() -> usize {
    std::env::var("SQRNG_DIM_CAP")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&c| c > 0)
        .unwrap_or(DEFAULT_DIM_CAP)
}

pub(crate) fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidState(format!(
            "subsystem dimensions must be positive, got {dims:?}"
        )));
    }
    let cap = dim_cap();
    let mut total = 1usize;
    for &d in dims {
        total = total
            .checked_mul(d)
            .filter(|&t| t <= cap)
            .ok_or(Error::DimensionCapExceeded {
                dim: dims.iter().fold(1usize, |a, &d| a.saturating_mul(d)),
                cap,
            })?;
    }
    Ok(total)
}

/// Binary entropy h(p) in bits. Accepts p within 1e-12 of [0, 1].
pub fn binary_entropy(p: f64) -> Result<f64> {
    if !(-1e-12..=1.0 + 1e-12).contains(&p) {
        return Err(Error::Domain {
            name: "p",
            value: p,
            domain: "[0, 1]",
        });
    }
    let p = p.clamp(0.0, 1.0);
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    Ok(term(p) + term(1.0 - p))
}

/// Single-qubit depolarizing map rho -> (1 - 2q) rho + q I.
/// `q` is the flip weight, in [0, 1/2].
pub fn depolarize(rho: &DensityMatrix, q: f64) -> Result<DensityMatrix> {
    if rho.dims() != [2] {
        return Err(Error::DimensionMismatch {
            context: "depolarize acts on a single qubit",
            expected: 2,
            got: rho.total_dim(),
        });
    }
    if !(-1e-12..=0.5 + 1e-12).contains(&q) {
        return Err(Error::Domain {
            name: "q",
            value: q,
            domain: "[0, 0.5]",
        });
    }
    let q = q.clamp(0.0, 0.5);
    let mut mat = rho.matrix().clone() * Complex64::new(1.0 - 2.0 * q, 0.0);
    mat[(0, 0)] += q;
    mat[(1, 1)] += q;
    DensityMatrix::new(vec![2], mat)
}

/// Overlap squared |<a|b>|^2 of two pure states with equal total dimension.
pub fn pure_fidelity(a: &StateVector, b: &StateVector) -> Result<f64> {
    if a.total_dim() != b.total_dim() {
        return Err(Error::DimensionMismatch {
            context: "fidelity of pure states",
            expected: a.total_dim(),
            got: b.total_dim(),
        });
    }
    Ok(a.inner(b).norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn binary_entropy_reference_values() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_relative_eq!(binary_entropy(0.5).unwrap(), 1.0, max_relative = 1e-15);
        // h(0.1) = -(0.1 log2 0.1 + 0.9 log2 0.9), computed independently.
        assert_relative_eq!(
            binary_entropy(0.1).unwrap(),
            0.4689955935892812,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            binary_entropy(0.1).unwrap(),
            binary_entropy(0.9).unwrap(),
            epsilon = 1e-15
        );
        assert!(binary_entropy(-0.01).is_err());
        assert!(binary_entropy(1.01).is_err());
    }

    #[test]
    fn entropy_is_concave_symmetric_peak() {
        let mut prev = 0.0;
        for k in 0..=50 {
            let p = k as f64 / 100.0;
            let h = binary_entropy(p).unwrap();
            assert!(h >= prev - 1e-12, "not increasing on [0, 1/2] at p={p}");
            prev = h;
        }
    }
}
