use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::quantum::{DensityMatrix, StateVector, NORM_TOL};
use crate::rate::ObservedStats;

/// One-signal attack of an i.i.d. (collective) adversary.
///
/// The server's action on a single round is fixed by four unnormalized
/// ancilla vectors e[a][c]: `a` is the bit carried by the qubit the
/// server returns, `c` the message it announces (0 = "+", 1 = "-").
/// Squared norms are the joint probabilities P(a, c) on measure-resend
/// rounds.
///
/// Invariants enforced at construction:
/// - total weight: sum of ||e[a][c]||^2 equals 1;
/// - physicality: <e[0][0]|e[1][0]> + <e[0][1]|e[1][1]> = 0, which is
///   what trace preservation of the underlying instrument demands and
///   which pins the test-round accept probability to exactly 1/2.
#[derive(Debug, Clone)]
pub struct CollectiveAttack {
    ancilla_dim: usize,
    e: [[DVector<Complex64>; 2]; 2],
}

impl CollectiveAttack {
    pub fn new(ancilla_dim: usize, e: [[Vec<Complex64>; 2]; 2]) -> Result<Self> {
        if ancilla_dim == 0 {
            return Err(Error::InvalidAttack(
                "ancilla dimension must be >= 1".into(),
            ));
        }
        for row in &e {
            for v in row {
                if v.len() != ancilla_dim {
                    return Err(Error::DimensionMismatch {
                        context: "ancilla vector length",
                        expected: ancilla_dim,
                        got: v.len(),
                    });
                }
            }
        }
        let e = e.map(|row| row.map(DVector::from_vec));
        let total: f64 = e.iter().flatten().map(|v| v.norm_squared()).sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidAttack(format!(
                "total weight {total} deviates from 1 beyond {NORM_TOL:.0e}"
            )));
        }
        let overlap: Complex64 = (0..2).map(|c| e[0][c].dotc(&e[1][c])).sum();
        if overlap.norm() > NORM_TOL {
            return Err(Error::InvalidAttack(format!(
                "physicality violated: message-summed overlap {overlap} != 0"
            )));
        }
        Ok(CollectiveAttack { ancilla_dim, e })
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    pub fn e(&self, a: u8, c: u8) -> &DVector<Complex64> {
        &self.e[a as usize][c as usize]
    }

    /// Joint probability P(a, c) = ||e[a][c]||^2.
    pub fn p_ac(&self, a: u8, c: u8) -> f64 {
        self.e[a as usize][c as usize].norm_squared()
    }

    /// Overlap <e[0][c]|e[1][c]>, the source of the adversary's coherence.
    pub fn overlap(&self, c: u8) -> Complex64 {
        self.e[0][c as usize].dotc(&self.e[1][c as usize])
    }

    /// Honest server over a noiseless line: the returned qubit and the
    /// reported message agree perfectly.
    pub fn honest_noiseless() -> Self {
        let h = Complex64::new(0.5, 0.0);
        CollectiveAttack::new(1, [[vec![h], vec![h]], [vec![h], vec![-h]]])
            .expect("honest attack satisfies the invariants")
    }

    /// Honest server behind a depolarizing line with round-trip flip
    /// probability `q_fr`. Reproduces the uniform joint statistics and
    /// P(+|acc) = 1 - q_fr.
    pub fn depolarizing(q_fr: f64) -> Result<Self> {
        if !(0.0..=0.5).contains(&q_fr) {
            return Err(Error::Domain {
                name: "q_fr",
                value: q_fr,
                domain: "[0, 0.5]",
            });
        }
        let cos = 1.0 - 2.0 * q_fr;
        let sin = (1.0 - cos * cos).max(0.0).sqrt();
        let v = |x: f64, y: f64| vec![Complex64::new(x / 2.0, 0.0), Complex64::new(y / 2.0, 0.0)];
        CollectiveAttack::new(2, [[v(1.0, 0.0), v(1.0, 0.0)], [v(cos, sin), v(-cos, sin)]])
    }

    /// Samples a random attack by drawing a random instrument: a complex
    /// Gaussian branch amplitude per returned bit and a Haar-ish isometry
    /// (QR of a Gaussian matrix) for the message/ancilla dilation.
    pub fn sample_random(ancilla_dim: usize, rng: &mut impl Rng) -> Result<Self> {
        if ancilla_dim == 0 {
            return Err(Error::InvalidAttack(
                "ancilla dimension must be >= 1".into(),
            ));
        }
        let alpha = random_unit_vector(2, rng);
        let iso = random_isometry(2 * ancilla_dim, 2, rng);
        let mut e: [[Vec<Complex64>; 2]; 2] = Default::default();
        for a in 0..2 {
            for c in 0..2 {
                e[a][c] = (0..ancilla_dim)
                    .map(|k| alpha[a] * iso[(c * ancilla_dim + k, a)])
                    .collect();
            }
        }
        CollectiveAttack::new(ancilla_dim, e)
    }

    /// Exact observable statistics this attack induces.
    ///
    /// On accepted test rounds, P(c|acc) = P(0,c) + P(1,c) +
    /// 2 Re<e[0][c]|e[1][c]>. Tiny float residue from the invariant
    /// checks is renormalized away so the result is always well formed.
    pub fn stats(&self) -> ObservedStats {
        let mut p = [[0.0; 2]; 2];
        for (a, row) in p.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = self.p_ac(a as u8, c as u8);
            }
        }
        let joint: f64 = p.iter().flatten().sum();
        for row in &mut p {
            for v in row.iter_mut() {
                *v /= joint;
            }
        }
        let p_plus = (p[0][0] + p[1][0] + 2.0 * self.overlap(0).re / joint).clamp(0.0, 1.0);
        ObservedStats::exact(p, p_plus, 1.0 - p_plus)
            .expect("attack invariants make the statistics consistent")
    }

    /// Entangled single-signal state |mu> on A (returned bit), C (message
    /// qubit, physical |+>/|-> kets) and E (ancilla).
    pub fn build_mu(&self) -> Result<StateVector> {
        let d = self.ancilla_dim;
        let sqrt_half = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut amps = vec![Complex64::ZERO; 4 * d];
        for a in 0..2 {
            for k in 0..d {
                let e0 = self.e[a][0][k];
                let e1 = self.e[a][1][k];
                // |+> and |-> expanded in the computational basis of C.
                amps[(a * 2) * d + k] = (e0 + e1) * sqrt_half;
                amps[(a * 2 + 1) * d + k] = (e0 - e1) * sqrt_half;
            }
        }
        StateVector::new(vec![2, 2, d], amps)
    }

    /// Post-measurement classical-classical-quantum state on A, C, E
    /// after Alice records her bit and the server's message is stored:
    /// block-diagonal over (a, c) with E conditioned on both.
    pub fn build_rho_ace(&self) -> Result<DensityMatrix> {
        let d = self.ancilla_dim;
        let n = 4 * d;
        let mut mat = DMatrix::from_element(n, n, Complex64::ZERO);
        for a in 0..2 {
            for c in 0..2 {
                let off = (a * 2 + c) * d;
                let v = &self.e[a][c];
                for r in 0..d {
                    for s in 0..d {
                        mat[(off + r, off + s)] = v[r] * v[s].conj();
                    }
                }
            }
        }
        DensityMatrix::new(vec![2, 2, d], mat)
    }

    /// Exact conditional entropy S(A | C E) of the post-measurement
    /// state: the adversary's true uncertainty about the raw bit, used
    /// as the oracle the observable bound must stay below.
    pub fn exact_conditional_entropy(&self) -> Result<f64> {
        self.build_rho_ace()?.conditional_entropy(&[0], &[1, 2])
    }
}

/// Unit vector of i.i.d. complex Gaussian entries.
pub(crate) fn random_unit_vector(dim: usize, rng: &mut impl Rng) -> DVector<Complex64> {
    loop {
        let v = DVector::from_fn(dim, |_, _| {
            Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
        });
        let n = v.norm();
        if n > 1e-6 {
            return v / Complex64::new(n, 0.0);
        }
    }
}

/// `cols` orthonormal columns in dimension `rows` (requires rows >= cols),
/// drawn by QR-factorizing a complex Gaussian matrix.
pub(crate) fn random_isometry(rows: usize, cols: usize, rng: &mut impl Rng) -> DMatrix<Complex64> {
    assert!(rows >= cols, "isometry needs rows >= cols");
    let g = DMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    g.qr().q()
}
