use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;

use crate::attack::collective::{random_isometry, random_unit_vector};
use crate::attack::{CollectiveAttack, OperationSchedule};
use crate::error::{Error, Result};
use crate::quantum::{StateVector, NORM_TOL, ZERO_PROB_TOL};

/// Fully general N-round attack, given by the dilation of the server's
/// joint operation: branch amplitudes alpha_a over the 2^N possible
/// returned bit patterns, the server's initial ancilla per branch, and
/// isometry blocks F[a][m] mapping each branch to a message pattern m
/// plus a residual ancilla.
///
/// Invariants: sum |alpha_a|^2 = 1; each initial ancilla is a unit
/// vector; the stacked blocks form an isometry, i.e.
/// sum_m <F[a][m]|F[b][m]> = delta_ab.
#[derive(Debug, Clone)]
pub struct GeneralAttack {
    rounds: usize,
    d_in: usize,
    d_out: usize,
    alpha: Vec<Complex64>,
    ancilla_in: Vec<DVector<Complex64>>,
    f: Vec<Vec<DVector<Complex64>>>,
}

impl GeneralAttack {
    pub fn new(
        rounds: usize,
        d_in: usize,
        d_out: usize,
        alpha: Vec<Complex64>,
        ancilla_in: Vec<Vec<Complex64>>,
        f: Vec<Vec<Vec<Complex64>>>,
    ) -> Result<Self> {
        if rounds == 0 || rounds >= usize::BITS as usize {
            return Err(Error::InvalidAttack(format!("bad round count {rounds}")));
        }
        if d_in == 0 || d_out == 0 {
            return Err(Error::InvalidAttack(
                "ancilla dimensions must be >= 1".into(),
            ));
        }
        let patterns = 1usize << rounds;
        if alpha.len() != patterns || ancilla_in.len() != patterns || f.len() != patterns {
            return Err(Error::DimensionMismatch {
                context: "per-branch data must cover all 2^N bit patterns",
                expected: patterns,
                got: alpha.len().min(ancilla_in.len()).min(f.len()),
            });
        }
        let norm: f64 = alpha.iter().map(|z| z.norm_sqr()).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidAttack(format!(
                "branch amplitudes have total weight {norm}, want 1"
            )));
        }
        let ancilla_in: Vec<DVector<Complex64>> =
            ancilla_in.into_iter().map(DVector::from_vec).collect();
        for v in &ancilla_in {
            if v.len() != d_in {
                return Err(Error::DimensionMismatch {
                    context: "initial ancilla length",
                    expected: d_in,
                    got: v.len(),
                });
            }
            if (v.norm() - 1.0).abs() > NORM_TOL {
                return Err(Error::InvalidAttack(
                    "initial ancilla vectors must be unit norm".into(),
                ));
            }
        }
        let f: Vec<Vec<DVector<Complex64>>> = f
            .into_iter()
            .map(|blocks| blocks.into_iter().map(DVector::from_vec).collect())
            .collect();
        for blocks in &f {
            if blocks.len() != patterns {
                return Err(Error::DimensionMismatch {
                    context: "message blocks must cover all 2^N patterns",
                    expected: patterns,
                    got: blocks.len(),
                });
            }
            for v in blocks {
                if v.len() != d_out {
                    return Err(Error::DimensionMismatch {
                        context: "isometry block length",
                        expected: d_out,
                        got: v.len(),
                    });
                }
            }
        }
        for a in 0..patterns {
            for b in a..patterns {
                let gram: Complex64 = (0..patterns).map(|m| f[a][m].dotc(&f[b][m])).sum();
                let want = if a == b {
                    Complex64::ONE
                } else {
                    Complex64::ZERO
                };
                if (gram - want).norm() > NORM_TOL {
                    return Err(Error::InvalidAttack(format!(
                        "isometry violated: block gram ({a},{b}) = {gram}"
                    )));
                }
            }
        }
        Ok(GeneralAttack {
            rounds,
            d_in,
            d_out,
            alpha,
            ancilla_in,
            f,
        })
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    pub fn d_in(&self) -> usize {
        self.d_in
    }

    pub fn d_out(&self) -> usize {
        self.d_out
    }

    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }

    pub fn ancilla_in(&self, a: usize) -> &DVector<Complex64> {
        &self.ancilla_in[a]
    }

    pub fn f(&self, a: usize, m: usize) -> &DVector<Complex64> {
        &self.f[a][m]
    }

    /// Subsystem list of the joint states: N qubits for Alice's record,
    /// one 2^N-dimensional register for the message pattern, one
    /// d_out-dimensional adversary ancilla.
    fn joint_dims(&self) -> Vec<usize> {
        let mut dims = vec![2usize; self.rounds];
        dims.push(1 << self.rounds);
        dims.push(self.d_out);
        dims
    }

    /// Purified prepare-and-measure state for a given schedule: Alice's
    /// record holds her bit on measure-resend rounds and 0 on reflect
    /// rounds, entangled with the message pattern and the ancilla.
    pub fn build_sqrng_state(&self, schedule: &OperationSchedule) -> Result<StateVector> {
        if schedule.len() != self.rounds {
            return Err(Error::DimensionMismatch {
                context: "schedule length vs attack rounds",
                expected: self.rounds,
                got: schedule.len(),
            });
        }
        let patterns = 1usize << self.rounds;
        let block = patterns * self.d_out;
        let mask = schedule.mask();
        let mut amps = vec![Complex64::ZERO; patterns * block];
        for a in 0..patterns {
            if self.alpha[a] == Complex64::ZERO {
                continue;
            }
            let record = a & mask;
            for m in 0..patterns {
                let base = record * block + m * self.d_out;
                let fv = &self.f[a][m];
                for k in 0..self.d_out {
                    amps[base + k] += self.alpha[a] * fv[k];
                }
            }
        }
        StateVector::new(self.joint_dims(), amps)
    }

    /// Entanglement-based counterpart: Alice's record register carries
    /// the full bit pattern `a` before any measurement.
    pub fn build_eqrng_state(&self) -> Result<StateVector> {
        let patterns = 1usize << self.rounds;
        let block = patterns * self.d_out;
        let mut amps = vec![Complex64::ZERO; patterns * block];
        for a in 0..patterns {
            for m in 0..patterns {
                let base = a * block + m * self.d_out;
                let fv = &self.f[a][m];
                for k in 0..self.d_out {
                    amps[base + k] = self.alpha[a] * fv[k];
                }
            }
        }
        StateVector::new(self.joint_dims(), amps)
    }

    /// Tensor power of a one-round attack: the collective adversary
    /// expressed as a general one.
    pub fn product_power(single: &GeneralAttack, n: usize) -> Result<GeneralAttack> {
        if single.rounds != 1 {
            return Err(Error::InvalidAttack(
                "product_power needs a one-round attack".into(),
            ));
        }
        if n == 0 || n >= usize::BITS as usize {
            return Err(Error::InvalidAttack(format!("bad power {n}")));
        }
        let patterns = 1usize << n;
        let bit = |x: usize, i: usize| (x >> (n - 1 - i)) & 1;
        let mut alpha = Vec::with_capacity(patterns);
        let mut ancilla = Vec::with_capacity(patterns);
        let mut f = Vec::with_capacity(patterns);
        for a in 0..patterns {
            let mut amp = Complex64::ONE;
            let mut anc = DVector::from_element(1, Complex64::ONE);
            for i in 0..n {
                amp *= single.alpha[bit(a, i)];
                anc = anc.kronecker(&single.ancilla_in[bit(a, i)]);
            }
            alpha.push(amp);
            ancilla.push(anc.as_slice().to_vec());
            let mut blocks = Vec::with_capacity(patterns);
            for m in 0..patterns {
                let mut v = DVector::from_element(1, Complex64::ONE);
                for i in 0..n {
                    v = v.kronecker(&single.f[bit(a, i)][bit(m, i)]);
                }
                blocks.push(v.as_slice().to_vec());
            }
            f.push(blocks);
        }
        GeneralAttack::new(
            n,
            single.d_in.pow(n as u32),
            single.d_out.pow(n as u32),
            alpha,
            ancilla,
            f,
        )
    }
}

impl CollectiveAttack {
    /// Reads the collective attack as a one-round general attack:
    /// branch weights are the per-bit masses and the isometry blocks
    /// are the normalized ancilla vectors.
    pub fn to_general(&self) -> Result<GeneralAttack> {
        let mut alpha = Vec::with_capacity(2);
        let mut f = Vec::with_capacity(2);
        for a in 0..2u8 {
            let mass = self.p_ac(a, 0) + self.p_ac(a, 1);
            if mass < 1e-12 {
                return Err(Error::InvalidAttack(format!(
                    "returned-bit branch {a} has zero mass; it has no \
                     general-attack dilation"
                )));
            }
            let w = mass.sqrt();
            alpha.push(Complex64::new(w, 0.0));
            f.push(vec![
                (self.e(a, 0) / Complex64::new(w, 0.0)).as_slice().to_vec(),
                (self.e(a, 1) / Complex64::new(w, 0.0)).as_slice().to_vec(),
            ]);
        }
        GeneralAttack::new(
            1,
            1,
            self.ancilla_dim(),
            alpha,
            vec![vec![Complex64::ONE]; 2],
            f,
        )
    }
}

/// Projects the first `schedule.len()` qubits of `state` onto |+> at
/// every reflect position (the test-round acceptance event), removing
/// those qubits. Returns the accept probability and the conditioned,
/// renormalized state.
pub fn accept_and_condition(
    state: &StateVector,
    schedule: &OperationSchedule,
) -> Result<(f64, StateVector)> {
    if state.dims().len() < schedule.len() {
        return Err(Error::DimensionMismatch {
            context: "state has fewer subsystems than schedule rounds",
            expected: schedule.len(),
            got: state.dims().len(),
        });
    }
    let plus = [
        Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
        Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0),
    ];
    let mut dims = state.dims().to_vec();
    let mut amps = nalgebra::DVector::from_column_slice(state.amplitudes());
    for pos in schedule.reflect_positions().into_iter().rev() {
        let current = StateVector::from_raw(dims, amps);
        let (next_dims, next_amps) = current.contract_qubit(pos, plus)?;
        dims = next_dims;
        amps = next_amps;
    }
    let prob = amps.norm_squared();
    if prob < ZERO_PROB_TOL {
        return Err(Error::ZeroProbabilityOutcome { prob });
    }
    amps /= Complex64::new(prob.sqrt(), 0.0);
    Ok((prob, StateVector::from_raw(dims, amps)))
}

/// Strips deterministic |0> reflect-position qubits from a
/// prepare-and-measure joint state, for comparison against the
/// conditioned entanglement-based state.
pub(crate) fn strip_reflect_zeros(
    state: &StateVector,
    schedule: &OperationSchedule,
) -> Result<StateVector> {
    let zero = [Complex64::ONE, Complex64::ZERO];
    let mut dims = state.dims().to_vec();
    let mut amps = nalgebra::DVector::from_column_slice(state.amplitudes());
    for pos in schedule.reflect_positions().into_iter().rev() {
        let current = StateVector::from_raw(dims, amps);
        let (next_dims, next_amps) = current.contract_qubit(pos, zero)?;
        dims = next_dims;
        amps = next_amps;
    }
    let norm = amps.norm();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(Error::InvalidState(format!(
            "reflect-position record bits were not deterministic (residual \
             norm {norm})"
        )));
    }
    amps /= Complex64::new(norm, 0.0);
    Ok(StateVector::from_raw(dims, amps))
}

/// Samples an isometry-valid attack on `rounds` rounds with output
/// ancilla dimension `d_out` (initial ancilla dimension is fixed at 2).
pub fn sample_random_attack(
    rounds: usize,
    d_out: usize,
    rng: &mut impl Rng,
) -> Result<GeneralAttack> {
    if rounds == 0 || rounds > 16 {
        return Err(Error::InvalidAttack(format!(
            "round count {rounds} outside supported range 1..=16"
        )));
    }
    if d_out == 0 {
        return Err(Error::InvalidAttack("d_out must be >= 1".into()));
    }
    let patterns = 1usize << rounds;
    let alpha = random_unit_vector(patterns, rng);
    let iso = random_isometry(patterns * d_out, patterns, rng);
    let ancilla: Vec<Vec<Complex64>> = (0..patterns)
        .map(|_| random_unit_vector(2, rng).as_slice().to_vec())
        .collect();
    let f: Vec<Vec<Vec<Complex64>>> = (0..patterns)
        .map(|a| {
            (0..patterns)
                .map(|m| (0..d_out).map(|k| iso[(m * d_out + k, a)]).collect())
                .collect()
        })
        .collect();
    GeneralAttack::new(rounds, 2, d_out, alpha.as_slice().to_vec(), ancilla, f)
}
