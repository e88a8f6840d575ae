use num_complex::Complex64;

use crate::circuit::{Circuit, Gate};
use crate::error::{Error, Result};
use crate::hamiltonian::LogicalHamiltonian;

/// Dense simulation is limited to this many qubits (64 MiB of amplitudes).
pub const MAX_QUBITS: usize = 22;

/// Qubit `q` is bit `q` of the basis index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn basis(n: usize, index: usize) -> Result<Self> {
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                qubits: n,
                cap: MAX_QUBITS,
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n];
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn zero(n: usize) -> Result<Self> {
        Self::basis(n, 0)
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let n = amps.len().trailing_zeros() as usize;
        if !amps.len().is_power_of_two() || n > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                qubits: n,
                cap: MAX_QUBITS,
            });
        }
        Ok(Self { n, amps })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn check(&self, q: usize) {
        assert!(q < self.n, "qubit {q} out of range for {} qubits", self.n);
    }

    /// Applies the 2×2 matrix `[[a, b], [c, d]]` to qubit `q`.
    fn apply_1q(&mut self, q: usize, m: [Complex64; 4]) {
        self.check(q);
        let bit = 1usize << q;
        for i in 0..self.amps.len() {
            if i & bit == 0 {
                let (x, y) = (self.amps[i], self.amps[i | bit]);
                self.amps[i] = m[0] * x + m[1] * y;
                self.amps[i | bit] = m[2] * x + m[3] * y;
            }
        }
    }

    fn cnot(&mut self, control: usize, target: usize) {
        self.check(control);
        self.check(target);
        assert_ne!(control, target, "CNOT control equals target");
        let (c, t) = (1usize << control, 1usize << target);
        for i in 0..self.amps.len() {
            if i & c != 0 && i & t == 0 {
                self.amps.swap(i, i | t);
            }
        }
    }

    /// Multiplies each amplitude by `exp(-i θ/2 · (-1)^{popcount(i & mask)})`.
    fn z_phase(&mut self, mask: usize, theta: f64) {
        let plus = Complex64::from_polar(1.0, -theta / 2.0);
        let minus = Complex64::from_polar(1.0, theta / 2.0);
        for (i, a) in self.amps.iter_mut().enumerate() {
            *a *= if (i & mask).count_ones() % 2 == 0 { plus } else { minus };
        }
    }

    pub fn apply_gate(&mut self, g: &Gate) {
        let zero = Complex64::new(0.0, 0.0);
        match *g {
            Gate::H(q) => {
                let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
                self.apply_1q(q, [s, s, s, -s]);
            }
            Gate::Rx(q, theta) => {
                let c = Complex64::new((theta / 2.0).cos(), 0.0);
                let s = Complex64::new(0.0, -(theta / 2.0).sin());
                self.apply_1q(q, [c, s, s, c]);
            }
            Gate::Rz(q, theta) => {
                self.check(q);
                self.apply_1q(
                    q,
                    [
                        Complex64::from_polar(1.0, -theta / 2.0),
                        zero,
                        zero,
                        Complex64::from_polar(1.0, theta / 2.0),
                    ],
                );
            }
            Gate::Zzzz { ref qubits, theta } => {
                let mut mask = 0usize;
                for &q in qubits {
                    self.check(q);
                    mask |= 1 << q;
                }
                self.z_phase(mask, theta);
            }
            _ => {
                for (c, t) in g.cnot_expansion().expect("CNOT-based gate") {
                    self.cnot(c, t);
                }
            }
        }
    }

    pub fn apply_gates(&mut self, gates: &[Gate]) {
        for g in gates {
            self.apply_gate(g);
        }
    }

    pub fn apply_circuit(&mut self, c: &Circuit) -> Result<()> {
        if c.num_qubits != self.n {
            return Err(Error::InvalidParams(format!(
                "circuit has {} qubits, state has {}",
                c.num_qubits, self.n
            )));
        }
        self.apply_gates(&c.gates);
        Ok(())
    }
}

/// Runs `c` on `|0…0⟩`.
pub fn simulate(c: &Circuit) -> Result<StateVector> {
    let mut s = StateVector::zero(c.num_qubits)?;
    s.apply_circuit(c)?;
    Ok(s)
}

/// `⟨ψ| H |ψ⟩` for a diagonal `h` whose spin `i` lives on qubit `layout[i]`.
pub fn expectation_diagonal(h: &LogicalHamiltonian, layout: &[usize], s: &StateVector) -> Result<f64> {
    if layout.len() != h.num_spins() {
        return Err(Error::ConfigLength {
            got: layout.len(),
            expected: h.num_spins(),
        });
    }
    let masks: Vec<(usize, f64)> = h
        .terms()
        .iter()
        .map(|t| (t.spins.iter().fold(0usize, |m, &i| m | 1 << layout[i]), t.coeff))
        .collect();
    let mut total = 0.0;
    for (i, a) in s.amps.iter().enumerate() {
        let p = a.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let e: f64 = masks
            .iter()
            .map(|&(m, c)| if (i & m).count_ones() % 2 == 0 { c } else { -c })
            .sum();
        total += p * (h.constant() + e);
    }
    Ok(total)
}
