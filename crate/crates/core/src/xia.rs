//! Reduction of a general Pauli sum to a σz-only Hamiltonian by replicating
//! the register `r` times.
//!
//! For every replica pair `j < k` and every qubit `i`, the Pauli factor on
//! `i` is replaced by a function of `z_{i,j}` and `z_{i,k}`:
//!
//! | factor | image                       |
//! |--------|-----------------------------|
//! | `I`    | `(1 + z_{i,j} z_{i,k}) / 2` |
//! | `X`    | `(1 - z_{i,j} z_{i,k}) / 2` |
//! | `Y`    | `(z_{i,k} - z_{i,j}) / 2`   |
//! | `Z`    | `(z_{i,j} + z_{i,k}) / 2`   |
//!
//! On replica states `|b⟩` and `|b'⟩` the product of images equals
//! `⟨b|P|b'⟩` up to a factor `(-i)^{#Y}`; strings with an even number of
//! `Y` get the compensating sign `(-1)^{#Y/2}`, strings with an odd number
//! are dropped (their contribution to a real symmetric matrix element is
//! zero).

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::LogicalHamiltonian;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Axis::X => "X",
            Axis::Y => "Y",
            Axis::Z => "Z",
        };
        f.write_str(c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliTerm {
    pub coeff: f64,
    /// Sorted by qubit, one factor per qubit.
    pub factors: Vec<(usize, Axis)>,
}

impl PauliTerm {
    pub fn y_count(&self) -> usize {
        self.factors.iter().filter(|(_, a)| *a == Axis::Y).count()
    }

    pub fn is_diagonal(&self) -> bool {
        self.factors.iter().all(|(_, a)| *a == Axis::Z)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliHamiltonian {
    pub num_qubits: usize,
    pub terms: Vec<PauliTerm>,
}

impl PauliHamiltonian {
    /// Merges equal strings and drops exact cancellations; terms come out
    /// sorted by their factor lists.
    pub fn new(num_qubits: usize, terms: impl IntoIterator<Item = PauliTerm>) -> Result<Self> {
        let mut acc: BTreeMap<Vec<(usize, Axis)>, f64> = BTreeMap::new();
        for mut t in terms {
            if !t.coeff.is_finite() {
                return Err(Error::NonFiniteCoefficient(t.coeff));
            }
            t.factors.sort();
            if let Some(&(q, _)) = t.factors.iter().find(|(q, _)| *q >= num_qubits) {
                return Err(Error::SpinOutOfRange {
                    index: q,
                    num_spins: num_qubits,
                });
            }
            *acc.entry(t.factors).or_insert(0.0) += t.coeff;
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| *c != 0.0)
            .map(|(factors, coeff)| PauliTerm { coeff, factors })
            .collect();
        Ok(Self { num_qubits, terms })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for t in &self.terms {
            out.push_str(&format!("{}", t.coeff));
            for (q, a) in &t.factors {
                out.push_str(&format!(" {a} {q}"));
            }
            out.push('\n');
        }
        out
    }
}

/// Parses lines `coeff P q [P q …]`, `P ∈ {X, Y, Z}`. Blank lines and
/// `#` comments are skipped; a bare coefficient is an identity term. The
/// qubit count is one past the largest index, or `num_qubits` if larger.
pub fn parse_pauli_sum(text: &str, num_qubits: Option<usize>) -> Result<PauliHamiltonian> {
    let mut terms = Vec::new();
    let mut max_q = 0usize;
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: String| Error::PauliParse { line: ln + 1, msg };
        let mut tok = line.split_whitespace();
        let coeff: f64 = tok
            .next()
            .unwrap()
            .replace('\u{2212}', "-")
            .parse()
            .map_err(|_| err(format!("bad coefficient in `{line}`")))?;
        let rest: Vec<&str> = tok.collect();
        if rest.len() % 2 != 0 {
            return Err(err("expected axis/qubit pairs".into()));
        }
        let mut factors: Vec<(usize, Axis)> = Vec::new();
        for pair in rest.chunks(2) {
            let axis = match pair[0] {
                "X" | "x" => Axis::X,
                "Y" | "y" => Axis::Y,
                "Z" | "z" => Axis::Z,
                other => return Err(err(format!("unknown axis `{other}`"))),
            };
            let q: usize = pair[1].parse().map_err(|_| err(format!("bad qubit `{}`", pair[1])))?;
            if factors.iter().any(|&(p, _)| p == q) {
                return Err(err(format!("qubit {q} repeated")));
            }
            max_q = max_q.max(q + 1);
            factors.push((q, axis));
        }
        terms.push(PauliTerm { coeff, factors });
    }
    PauliHamiltonian::new(num_qubits.unwrap_or(0).max(max_q), terms)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignMode {
    /// One sign qubit per replica, multiplying each pair term by `z_{s_j} z_{s_k}`.
    #[default]
    SignQubits,
    FixedPlus,
}

impl FromStr for SignMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "qubits" | "sign_qubits" => Ok(Self::SignQubits),
            "plus" | "fixed_plus" => Ok(Self::FixedPlus),
            _ => Err(format!("unknown sign mode `{s}` (qubits|plus)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicationSpec {
    pub r: usize,
    pub sign_mode: SignMode,
}

/// Replica-major qubit indexing: copy `j` (0-based) of qubit `i` sits at
/// `j·n + i`, sign qubit of replica `j` at `n·r + j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReplicaLayout {
    pub n: usize,
    pub r: usize,
    pub sign_qubits: bool,
}

impl ReplicaLayout {
    pub fn new(n: usize, spec: ReplicationSpec) -> Self {
        Self {
            n,
            r: spec.r,
            sign_qubits: spec.sign_mode == SignMode::SignQubits,
        }
    }

    pub fn qubit(&self, i: usize, replica: usize) -> usize {
        replica * self.n + i
    }

    pub fn sign(&self, replica: usize) -> Option<usize> {
        self.sign_qubits.then(|| self.n * self.r + replica)
    }

    /// Inverse of [`ReplicaLayout::qubit`]; `None` for sign qubits.
    pub fn unmap(&self, index: usize) -> Option<(usize, usize)> {
        (index < self.n * self.r).then(|| (index % self.n, index / self.n))
    }

    pub fn num_qubits(&self) -> usize {
        self.n * self.r + if self.sign_qubits { self.r } else { 0 }
    }
}

/// σz polynomial keyed by qubit mask; multiplication XORs masks (`z² = 1`).
type ZPoly = BTreeMap<u64, f64>;

fn zmul(a: &ZPoly, b: &ZPoly) -> ZPoly {
    let mut out = ZPoly::new();
    for (&ma, &ca) in a {
        for (&mb, &cb) in b {
            *out.entry(ma ^ mb).or_insert(0.0) += ca * cb;
        }
    }
    out
}

/// Maps `h` to a σz-only Hamiltonian on `n·r` (plus `r` sign) qubits,
/// summing every replica pair with weight one.
pub fn replicate(h: &PauliHamiltonian, spec: ReplicationSpec) -> Result<LogicalHamiltonian> {
    if spec.r < 2 {
        return Err(Error::ReplicationFactor(spec.r));
    }
    let layout = ReplicaLayout::new(h.num_qubits, spec);
    let total = layout.num_qubits();
    if total > 64 {
        return Err(Error::Infeasible(format!("{total} mapped qubits exceed 64")));
    }
    let n = h.num_qubits;
    let mut acc = ZPoly::new();
    let mut dropped = 0usize;
    for term in &h.terms {
        let ny = term.y_count();
        if ny % 2 == 1 {
            dropped += 1;
            continue;
        }
        let sign = if (ny / 2) % 2 == 0 { 1.0 } else { -1.0 };
        for j in 0..spec.r {
            for k in (j + 1)..spec.r {
                let mut poly = ZPoly::from([(0u64, sign * term.coeff)]);
                if let (Some(sj), Some(sk)) = (layout.sign(j), layout.sign(k)) {
                    poly = ZPoly::from([(1u64 << sj | 1u64 << sk, sign * term.coeff)]);
                }
                let mut factors = term.factors.iter().peekable();
                for i in 0..n {
                    let (zj, zk) = (1u64 << layout.qubit(i, j), 1u64 << layout.qubit(i, k));
                    let axis = factors.next_if(|(q, _)| *q == i).map(|&(_, a)| a);
                    let image: ZPoly = match axis {
                        None => ZPoly::from([(0, 0.5), (zj | zk, 0.5)]),
                        Some(Axis::X) => ZPoly::from([(0, 0.5), (zj | zk, -0.5)]),
                        Some(Axis::Y) => ZPoly::from([(zk, 0.5), (zj, -0.5)]),
                        Some(Axis::Z) => ZPoly::from([(zj, 0.5), (zk, 0.5)]),
                    };
                    poly = zmul(&poly, &image);
                }
                for (m, c) in poly {
                    *acc.entry(m).or_insert(0.0) += c;
                }
            }
        }
    }
    if dropped > 0 {
        log::warn!("dropped {dropped} Pauli string(s) with an odd number of Y factors");
    }
    let constant = acc.remove(&0).unwrap_or(0.0);
    let largest = acc.values().fold(0.0f64, |a, c| a.max(c.abs()));
    let terms = acc
        .into_iter()
        .filter(|(_, c)| c.abs() > 1e-14 * largest)
        .map(|(m, c)| ((0..64).filter(|b| m >> b & 1 == 1).collect::<Vec<_>>(), c));
    LogicalHamiltonian::new(total, constant, terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fixed(r: usize) -> ReplicationSpec {
        ReplicationSpec {
            r,
            sign_mode: SignMode::FixedPlus,
        }
    }

    #[test]
    fn parsing() {
        let h = parse_pauli_sum("0.5 Z 0", None).unwrap();
        assert_eq!(h.terms.len(), 1);
        assert_eq!(h.num_qubits, 1);
        let h = parse_pauli_sum("1.0 X 0 X 1\n-1.0 X 1 X 0\n", None).unwrap();
        assert!(h.terms.is_empty());
        assert!(matches!(parse_pauli_sum("1.0 X 0 Z 0", None), Err(Error::PauliParse { line: 1, .. })));
        assert!(matches!(parse_pauli_sum("# c\n1.0 W 0", None), Err(Error::PauliParse { line: 2, .. })));
        let h = parse_pauli_sum("-0.8 # identity\n0.2 Z 3\n", None).unwrap();
        assert_eq!(h.num_qubits, 4);
        assert_eq!(h.terms[0].factors, vec![]);
        let again = parse_pauli_sum(&h.to_text(), Some(4)).unwrap();
        assert_eq!(again, h);
    }

    #[test]
    fn single_axis_images() {
        let z = replicate(&parse_pauli_sum("1 Z 0", None).unwrap(), fixed(2)).unwrap();
        assert_eq!(z.len(), 2);
        assert!(z.terms().iter().all(|t| t.coeff == 0.5 && t.order() == 1));
        let x = replicate(&parse_pauli_sum("1 X 0", None).unwrap(), fixed(2)).unwrap();
        assert_eq!(x.constant(), 0.5);
        assert_eq!(x.len(), 1);
        assert_eq!(x.terms()[0].spins, vec![0, 1]);
        assert_eq!(x.terms()[0].coeff, -0.5);
        assert!(matches!(replicate(&parse_pauli_sum("1 X 0", None).unwrap(), fixed(1)), Err(Error::ReplicationFactor(1))));
    }

    #[test]
    fn layout() {
        let spec = ReplicationSpec {
            r: 2,
            sign_mode: SignMode::SignQubits,
        };
        let l = ReplicaLayout::new(2, spec);
        assert_eq!([l.qubit(0, 0), l.qubit(1, 0), l.qubit(0, 1), l.qubit(1, 1)], [0, 1, 2, 3]);
        assert_eq!([l.sign(0), l.sign(1)], [Some(4), Some(5)]);
        let l3 = ReplicaLayout::new(2, ReplicationSpec { r: 3, ..spec });
        assert_eq!(l3.num_qubits(), 9);
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(l3.unmap(l3.qubit(i, j)), Some((i, j)));
            }
        }
        assert_eq!(l3.unmap(6), None);
    }

    fn random_pauli(rng: &mut ChaCha8Rng, n: usize, k: usize) -> PauliHamiltonian {
        let terms = (0..k).map(|_| {
            let factors = (0..n)
                .filter_map(|q| match rng.random_range(0..4) {
                    0 => None,
                    1 => Some((q, Axis::X)),
                    2 => Some((q, Axis::Y)),
                    _ => Some((q, Axis::Z)),
                })
                .collect();
            PauliTerm {
                coeff: rng.random_range(-4i32..=4) as f64 / 4.0,
                factors,
            }
        });
        PauliHamiltonian::new(n, terms).unwrap()
    }

    /// `⟨b|P|b'⟩` for one Pauli string by direct matrix action.
    fn matrix_element(t: &PauliTerm, b: usize, bp: usize, n: usize) -> Complex64 {
        let mut amp = Complex64::new(t.coeff, 0.0);
        for q in 0..n {
            let (x, y) = (b >> q & 1, bp >> q & 1);
            let axis = t.factors.iter().find(|(p, _)| *p == q).map(|&(_, a)| a);
            let e = match axis {
                None => Complex64::new(if x == y { 1.0 } else { 0.0 }, 0.0),
                Some(Axis::X) => Complex64::new(if x != y { 1.0 } else { 0.0 }, 0.0),
                Some(Axis::Z) => Complex64::new(if x == y { 1.0 - 2.0 * x as f64 } else { 0.0 }, 0.0),
                Some(Axis::Y) => match (x, y) {
                    (0, 1) => Complex64::new(0.0, -1.0),
                    (1, 0) => Complex64::new(0.0, 1.0),
                    _ => Complex64::new(0.0, 0.0),
                },
            };
            amp *= e;
        }
        amp
    }

    #[test]
    fn pair_energy_is_real_matrix_element() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 3;
        let h = random_pauli(&mut rng, n, 12);
        let mapped = replicate(&h, fixed(2)).unwrap();
        for b in 0..1usize << n {
            for bp in 0..1usize << n {
                let bits: Vec<u8> = (0..n).map(|q| (b >> q & 1) as u8).chain((0..n).map(|q| (bp >> q & 1) as u8)).collect();
                let want: f64 = h
                    .terms
                    .iter()
                    .filter(|t| t.y_count() % 2 == 0)
                    .map(|t| matrix_element(t, b, bp, n).re)
                    .sum();
                assert!((mapped.diagonal_energy(&bits).unwrap() - want).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn diagonal_preservation(seed in any::<u64>(), r in 2usize..=4, signs in any::<bool>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = 3;
            let h = random_pauli(&mut rng, n, 10);
            let spec = ReplicationSpec { r, sign_mode: if signs { SignMode::SignQubits } else { SignMode::FixedPlus } };
            let mapped = replicate(&h, spec).unwrap();
            let layout = ReplicaLayout::new(n, spec);
            prop_assert_eq!(mapped.num_spins(), n * r + if signs { r } else { 0 });
            let pairs = (r * (r - 1) / 2) as f64;
            for b in 0..1usize << n {
                let mut bits = vec![0u8; layout.num_qubits()];
                for j in 0..r {
                    for i in 0..n {
                        bits[layout.qubit(i, j)] = (b >> i & 1) as u8;
                    }
                }
                let diag: f64 = h.terms.iter().map(|t| matrix_element(t, b, b, n).re).sum();
                prop_assert!((mapped.diagonal_energy(&bits).unwrap() - pairs * diag).abs() < 1e-12);
            }
        }

        #[test]
        fn term_count_grows_with_r(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random_pauli(&mut rng, 3, 8);
            let counts: Vec<usize> = (2..=5).map(|r| replicate(&h, fixed(r)).unwrap().len()).collect();
            prop_assert!(counts.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
