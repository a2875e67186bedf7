use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantum::{check_dims, DensityMatrix, NORM_TOL, ZERO_PROB_TOL};

/// Measurement basis for a single qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasBasis {
    /// Computational basis {|0>, |1>}.
    Z,
    /// Hadamard basis {|+>, |->}; outcome 0 is "+", outcome 1 is "-".
    X,
}

/// Normalized pure state over an explicit list of subsystem dimensions.
#[derive(Debug, Clone)]
pub struct StateVector {
    dims: Vec<usize>,
    amps: DVector<Complex64>,
}

impl StateVector {
    /// Builds a state from amplitudes, checking the dimension product,
    /// the global dimension cap, and unit norm (within `NORM_TOL`).
    pub fn new(dims: Vec<usize>, amps: Vec<Complex64>) -> Result<Self> {
        let total = check_dims(&dims)?;
        if amps.len() != total {
            return Err(Error::DimensionMismatch {
                context: "amplitude count",
                expected: total,
                got: amps.len(),
            });
        }
        let amps = DVector::from_vec(amps);
        let norm = amps.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "state norm {norm} deviates from 1 beyond {NORM_TOL:.0e}"
            )));
        }
        Ok(StateVector { dims, amps })
    }

    /// Computational basis state |indices> over `dims`.
    pub fn basis(dims: Vec<usize>, indices: &[usize]) -> Result<Self> {
        let total = check_dims(&dims)?;
        if indices.len() != dims.len() {
            return Err(Error::DimensionMismatch {
                context: "basis index count",
                expected: dims.len(),
                got: indices.len(),
            });
        }
        for (k, (&i, &d)) in indices.iter().zip(&dims).enumerate() {
            if i >= d {
                return Err(Error::SubsystemOutOfRange { index: k, count: d });
            }
        }
        let flat = flat_index(&dims, indices);
        let mut amps = DVector::from_element(total, Complex64::ZERO);
        amps[flat] = Complex64::ONE;
        Ok(StateVector { dims, amps })
    }

    /// Internal constructor for amplitudes already known to be consistent.
    pub(crate) fn from_raw(dims: Vec<usize>, amps: DVector<Complex64>) -> Self {
        debug_assert_eq!(dims.iter().product::<usize>(), amps.len());
        StateVector { dims, amps }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        self.amps.as_slice()
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// Inner product <self|other> (self conjugated).
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        assert_eq!(self.total_dim(), other.total_dim(), "inner product dims");
        self.amps.dotc(&other.amps)
    }

    /// Tensor product; subsystems of `other` follow those of `self`.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        check_dims(&dims)?;
        Ok(StateVector {
            dims,
            amps: self.amps.kronecker(&other.amps),
        })
    }

    /// Reinterprets the subsystem grouping. The total dimension must match.
    pub fn reshape(&self, new_dims: Vec<usize>) -> Result<StateVector> {
        let total = check_dims(&new_dims)?;
        if total != self.total_dim() {
            return Err(Error::DimensionMismatch {
                context: "reshape total dimension",
                expected: self.total_dim(),
                got: total,
            });
        }
        Ok(StateVector {
            dims: new_dims,
            amps: self.amps.clone(),
        })
    }

    /// Reorders subsystems: new position k holds old subsystem `perm[k]`.
    pub fn permute_subsystems(&self, perm: &[usize]) -> Result<StateVector> {
        let n = self.dims.len();
        let mut seen = vec![false; n];
        if perm.len() != n
            || perm
                .iter()
                .any(|&p| p >= n || std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::InvalidState(format!(
                "{perm:?} is not a permutation of 0..{n}"
            )));
        }
        let new_dims: Vec<usize> = perm.iter().map(|&p| self.dims[p]).collect();
        let old_strides = strides(&self.dims);
        let new_strides = strides(&new_dims);
        let mut amps = DVector::from_element(self.total_dim(), Complex64::ZERO);
        for old_flat in 0..self.total_dim() {
            let mut new_flat = 0;
            for (k, &p) in perm.iter().enumerate() {
                let digit = (old_flat / old_strides[p]) % self.dims[p];
                new_flat += digit * new_strides[k];
            }
            amps[new_flat] = self.amps[old_flat];
        }
        Ok(StateVector {
            dims: new_dims,
            amps,
        })
    }

    /// CNOT with the given control and target qubit positions.
    pub fn apply_cnot(&self, control: usize, target: usize) -> Result<StateVector> {
        self.expect_qubit(control)?;
        self.expect_qubit(target)?;
        if control == target {
            return Err(Error::InvalidState(
                "cnot control and target must differ".into(),
            ));
        }
        let st = strides(&self.dims);
        let (cs, ts) = (st[control], st[target]);
        let mut amps = self.amps.clone();
        for flat in 0..self.total_dim() {
            // Visit each control=1, target=0 index once and swap with its partner.
            if (flat / cs) % 2 == 1 && (flat / ts) % 2 == 0 {
                amps.swap_rows(flat, flat + ts);
            }
        }
        Ok(StateVector {
            dims: self.dims.clone(),
            amps,
        })
    }

    /// Projective measurement of one qubit. Returns the outcome probability
    /// and the renormalized post-measurement state (same subsystem list).
    /// Outcomes: Z basis 0/1; X basis 0 = "+", 1 = "-".
    pub fn project_qubit(
        &self,
        position: usize,
        basis: MeasBasis,
        outcome: u8,
    ) -> Result<(f64, StateVector)> {
        self.expect_qubit(position)?;
        if outcome > 1 {
            return Err(Error::InvalidBits(format!(
                "measurement outcome must be 0 or 1, got {outcome}"
            )));
        }
        let ts = strides(&self.dims)[position];
        let mut amps = self.amps.clone();
        match basis {
            MeasBasis::Z => {
                for flat in 0..self.total_dim() {
                    if ((flat / ts) % 2) as u8 != outcome {
                        amps[flat] = Complex64::ZERO;
                    }
                }
            }
            MeasBasis::X => {
                let sign = if outcome == 0 { 1.0 } else { -1.0 };
                for flat in 0..self.total_dim() {
                    if (flat / ts).is_multiple_of(2) {
                        // <s|psi> component for this index pair, s = (|0> + sign |1>)/sqrt2.
                        let overlap = (self.amps[flat] + self.amps[flat + ts] * sign) * 0.5;
                        amps[flat] = overlap;
                        amps[flat + ts] = overlap * sign;
                    }
                }
            }
        }
        let prob = amps.norm_squared();
        if prob < ZERO_PROB_TOL {
            return Err(Error::ZeroProbabilityOutcome { prob });
        }
        amps /= Complex64::new(prob.sqrt(), 0.0);
        Ok((
            prob,
            StateVector {
                dims: self.dims.clone(),
                amps,
            },
        ))
    }

    /// Contracts one qubit against the bra of `ket`, removing that
    /// subsystem. The result is generally unnormalized; its squared norm
    /// is the probability of the corresponding outcome.
    pub(crate) fn contract_qubit(
        &self,
        position: usize,
        ket: [Complex64; 2],
    ) -> Result<(Vec<usize>, DVector<Complex64>)> {
        self.expect_qubit(position)?;
        let ts = strides(&self.dims)[position];
        let mut new_dims = self.dims.clone();
        new_dims.remove(position);
        let new_total = self.total_dim() / 2;
        let mut out = DVector::from_element(new_total, Complex64::ZERO);
        let (b0, b1) = (ket[0].conj(), ket[1].conj());
        let mut new_flat = 0;
        for flat in 0..self.total_dim() {
            if (flat / ts).is_multiple_of(2) {
                out[new_flat] = b0 * self.amps[flat] + b1 * self.amps[flat + ts];
                new_flat += 1;
            }
        }
        Ok((new_dims, out))
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_pure(self)
    }

    fn expect_qubit(&self, position: usize) -> Result<()> {
        if position >= self.dims.len() {
            return Err(Error::SubsystemOutOfRange {
                index: position,
                count: self.dims.len(),
            });
        }
        if self.dims[position] != 2 {
            return Err(Error::DimensionMismatch {
                context: "qubit operation on non-qubit subsystem",
                expected: 2,
                got: self.dims[position],
            });
        }
        Ok(())
    }
}

/// Big-endian strides: stride[k] = product of dims after k.
pub(crate) fn strides(dims: &[usize]) -> Vec<usize> {
    let mut st = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        st[k] = st[k + 1] * dims[k + 1];
    }
    st
}

pub(crate) fn flat_index(dims: &[usize], indices: &[usize]) -> usize {
    strides(dims).iter().zip(indices).map(|(s, i)| s * i).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn plus() -> StateVector {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::new(vec![2], vec![c(a, 0.0), c(a, 0.0)]).unwrap()
    }

    #[test]
    fn new_rejects_unnormalized_and_mismatched() {
        assert!(StateVector::new(vec![2], vec![c(1.0, 0.0), c(0.1, 0.0)]).is_err());
        assert!(StateVector::new(vec![2, 2], vec![c(1.0, 0.0)]).is_err());
        assert!(StateVector::new(vec![2, 0], vec![]).is_err());
    }

    #[test]
    fn strides_are_big_endian() {
        assert_eq!(strides(&[2, 3, 4]), vec![12, 4, 1]);
        assert_eq!(flat_index(&[2, 3, 4], &[1, 2, 3]), 23);
    }

    #[test]
    fn cnot_entangles_plus_zero() {
        // CNOT(|+>|0>) is the Bell state (|00> + |11>)/sqrt2.
        let zero = StateVector::basis(vec![2], &[0]).unwrap();
        let joint = plus().tensor(&zero).unwrap();
        let bell = joint.apply_cnot(0, 1).unwrap();
        let a = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(bell.amplitudes()[0].re, a, epsilon = 1e-12);
        assert_relative_eq!(bell.amplitudes()[3].re, a, epsilon = 1e-12);
        assert_eq!(bell.amplitudes()[1], Complex64::ZERO);
        assert_eq!(bell.amplitudes()[2], Complex64::ZERO);
        assert!(joint.apply_cnot(0, 0).is_err());
        assert!(joint.apply_cnot(0, 5).is_err());
    }

    #[test]
    fn z_projection_of_plus_is_uniform() {
        for outcome in [0u8, 1] {
            let (p, post) = plus().project_qubit(0, MeasBasis::Z, outcome).unwrap();
            assert_relative_eq!(p, 0.5, epsilon = 1e-12);
            assert_relative_eq!(post.amplitudes()[outcome as usize].re, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn x_projection_of_zero_gives_half_and_projected_state() {
        let zero = StateVector::basis(vec![2], &[0]).unwrap();
        let (p, post) = zero.project_qubit(0, MeasBasis::X, 1).unwrap();
        assert_relative_eq!(p, 0.5, epsilon = 1e-12);
        let a = std::f64::consts::FRAC_1_SQRT_2;
        assert_relative_eq!(post.amplitudes()[0].re, a, epsilon = 1e-12);
        assert_relative_eq!(post.amplitudes()[1].re, -a, epsilon = 1e-12);
    }

    #[test]
    fn projecting_plus_onto_minus_is_zero_probability() {
        let err = plus().project_qubit(0, MeasBasis::X, 1).unwrap_err();
        assert!(matches!(
            err,
            crate::error::Error::ZeroProbabilityOutcome { .. }
        ));
    }

    #[test]
    fn x_projection_probabilities_sum_to_one() {
        let v = vec![c(0.5, 0.1), c(0.3, -0.2), c(0.1, 0.4), c(0.6, 0.25)];
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let s = StateVector::new(vec![2, 2], v.into_iter().map(|z| z / n).collect()).unwrap();
        let (p0, _) = s.project_qubit(1, MeasBasis::X, 0).unwrap();
        let (p1, _) = s.project_qubit(1, MeasBasis::X, 1).unwrap();
        assert_relative_eq!(p0 + p1, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn permute_round_trip_and_swap() {
        let s = StateVector::new(
            vec![2, 3],
            (0..6)
                .map(|k| c((k as f64 + 1.0) / 9.539392014169456, 0.0))
                .collect(),
        )
        .unwrap();
        let swapped = s.permute_subsystems(&[1, 0]).unwrap();
        assert_eq!(swapped.dims(), &[3, 2]);
        // Element (i, j) of the original appears at (j, i).
        assert_eq!(
            swapped.amplitudes()[flat_index(&[3, 2], &[2, 1])],
            s.amplitudes()[flat_index(&[2, 3], &[1, 2])]
        );
        let back = swapped.permute_subsystems(&[1, 0]).unwrap();
        assert_eq!(back.amplitudes(), s.amplitudes());
        assert!(s.permute_subsystems(&[0, 0]).is_err());
    }

    #[test]
    fn contract_removes_subsystem_and_tracks_probability() {
        let bell = {
            let zero = StateVector::basis(vec![2], &[0]).unwrap();
            plus().tensor(&zero).unwrap().apply_cnot(0, 1).unwrap()
        };
        let a = std::f64::consts::FRAC_1_SQRT_2;
        let (dims, out) = bell.contract_qubit(0, [c(a, 0.0), c(a, 0.0)]).unwrap();
        assert_eq!(dims, vec![2]);
        // <+| on the first qubit of the Bell state leaves |+>/sqrt2.
        assert_relative_eq!(out.norm_squared(), 0.5, epsilon = 1e-12);
        assert_relative_eq!(out[0].re, 0.5, epsilon = 1e-12);
        assert_relative_eq!(out[1].re, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn reshape_preserves_amplitudes() {
        let s = StateVector::basis(vec![2, 2, 2], &[1, 0, 1]).unwrap();
        let r = s.reshape(vec![8]).unwrap();
        assert_eq!(r.amplitudes()[5].re, 1.0);
        assert!(s.reshape(vec![4]).is_err());
    }

    #[test]
    fn dimension_cap_is_enforced() {
        let dims = vec![2; 20];
        assert!(matches!(
            StateVector::basis(dims, &[0; 20]),
            Err(crate::error::Error::DimensionCapExceeded { .. })
        ));
    }
}
