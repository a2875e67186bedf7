use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quantum::state::{strides, StateVector};
use crate::quantum::{check_dims, EIG_TOL, ENTROPY_FLOOR, NORM_TOL};

/// Density operator over an explicit list of subsystem dimensions.
/// Construction verifies hermiticity, unit trace and positivity
/// (eigenvalues above -EIG_TOL), so a value of this type is always a
/// physical state up to float noise.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    mat: DMatrix<Complex64>,
}

impl DensityMatrix {
    pub fn new(dims: Vec<usize>, mat: DMatrix<Complex64>) -> Result<Self> {
        let total = check_dims(&dims)?;
        if mat.nrows() != total || mat.ncols() != total {
            return Err(Error::DimensionMismatch {
                context: "density matrix shape",
                expected: total,
                got: mat.nrows().max(mat.ncols()),
            });
        }
        let herm_dev = (&mat - mat.adjoint()).camax();
        if herm_dev > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "matrix deviates from hermitian by {herm_dev:.3e}"
            )));
        }
        let trace = mat.trace();
        if (trace.re - 1.0).abs() > NORM_TOL || trace.im.abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "trace {trace} deviates from 1 beyond {NORM_TOL:.0e}"
            )));
        }
        let dm = DensityMatrix { dims, mat };
        dm.eigenvalues()?; // positivity check
        Ok(dm)
    }

    pub fn from_pure(psi: &StateVector) -> Self {
        let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
        DensityMatrix {
            dims: psi.dims().to_vec(),
            mat: &v * v.adjoint(),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    /// Traces out every subsystem not listed in `keep`. `keep` must be
    /// strictly increasing; kept subsystems preserve their order.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let n = self.dims.len();
        if keep.is_empty() || keep.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidState(format!(
                "keep list {keep:?} must be nonempty and strictly increasing"
            )));
        }
        if *keep.last().unwrap() >= n {
            return Err(Error::SubsystemOutOfRange {
                index: *keep.last().unwrap(),
                count: n,
            });
        }
        let traced: Vec<usize> = (0..n).filter(|k| !keep.contains(k)).collect();
        let kept_dims: Vec<usize> = keep.iter().map(|&k| self.dims[k]).collect();
        let traced_dims: Vec<usize> = traced.iter().map(|&k| self.dims[k]).collect();
        let kept_total: usize = kept_dims.iter().product();
        let traced_total: usize = traced_dims.iter().product();
        let st = strides(&self.dims);
        let kept_strides = strides(&kept_dims);
        let traced_strides = strides(&traced_dims);

        // Maps a flat index over kept (resp. traced) subsystems to its
        // contribution in the full flat index.
        let embed = |subs: &[usize], sub_strides: &[usize], flat: usize| -> usize {
            subs.iter()
                .zip(sub_strides)
                .map(|(&k, &ss)| ((flat / ss) % self.dims[k]) * st[k])
                .sum()
        };

        let mut out = DMatrix::from_element(kept_total, kept_total, Complex64::ZERO);
        for r in 0..kept_total {
            let re = embed(keep, &kept_strides, r);
            for c in 0..kept_total {
                let ce = embed(keep, &kept_strides, c);
                let mut acc = Complex64::ZERO;
                for t in 0..traced_total {
                    let te = embed(&traced, &traced_strides, t);
                    acc += self.mat[(re + te, ce + te)];
                }
                out[(r, c)] = acc;
            }
        }
        Ok(DensityMatrix {
            dims: kept_dims,
            mat: out,
        })
    }

    /// Real spectrum with small negatives clipped to zero. Eigenvalues
    /// below -EIG_TOL mean the matrix is not a state and are an error.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let eigs = self.mat.clone().symmetric_eigen().eigenvalues;
        let mut out = Vec::with_capacity(eigs.len());
        for &e in eigs.iter() {
            if e < -EIG_TOL {
                return Err(Error::InvalidState(format!(
                    "eigenvalue {e:.3e} below -{EIG_TOL:.0e}"
                )));
            }
            out.push(e.max(0.0));
        }
        Ok(out)
    }

    /// Von Neumann entropy in bits.
    pub fn von_neumann_entropy(&self) -> Result<f64> {
        Ok(self
            .eigenvalues()?
            .iter()
            .filter(|&&e| e > ENTROPY_FLOOR)
            .map(|&e| -e * e.log2())
            .sum())
    }

    /// Conditional entropy S(A|B) = S(AB) - S(B) where `part_a` and
    /// `part_b` partition the subsystems.
    pub fn conditional_entropy(&self, part_a: &[usize], part_b: &[usize]) -> Result<f64> {
        let n = self.dims.len();
        let mut seen = vec![false; n];
        for &k in part_a.iter().chain(part_b) {
            if k >= n {
                return Err(Error::SubsystemOutOfRange { index: k, count: n });
            }
            if std::mem::replace(&mut seen[k], true) {
                return Err(Error::InvalidState(format!(
                    "subsystem {k} appears in both partitions"
                )));
            }
        }
        if seen.iter().any(|&s| !s) {
            return Err(Error::InvalidState(
                "partitions must cover every subsystem".into(),
            ));
        }
        let mut keep_b: Vec<usize> = part_b.to_vec();
        keep_b.sort_unstable();
        let s_ab = self.von_neumann_entropy()?;
        let s_b = self.partial_trace(&keep_b)?.von_neumann_entropy()?;
        Ok(s_ab - s_b)
    }

    pub fn tensor(&self, other: &DensityMatrix) -> Result<DensityMatrix> {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        check_dims(&dims)?;
        Ok(DensityMatrix {
            dims,
            mat: self.mat.kronecker(&other.mat),
        })
    }
}
