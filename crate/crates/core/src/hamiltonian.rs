//! Higher-order σz Hamiltonians: canonical form, the JSON problem format and
//! diagonal evaluation.
//!
//! A computational-basis bit `b` corresponds to the σz eigenvalue `1 - 2b`,
//! so bit 0 is spin +1 and bit 1 is spin -1.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients whose magnitude falls below this after merging are dropped.
pub const ZERO_TOL: f64 = 1e-15;

/// A product of σz operators on a strictly increasing set of spins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinTerm {
    pub spins: Vec<usize>,
    pub coeff: f64,
}

impl SpinTerm {
    /// Interaction order (number of spins in the product).
    pub fn order(&self) -> usize {
        self.spins.len()
    }

    /// Bit mask of the spins; only valid when every index is below 64.
    pub fn mask(&self) -> u64 {
        self.spins.iter().fold(0u64, |m, &s| m | (1u64 << s))
    }
}

#[derive(Deserialize)]
struct RawHamiltonian {
    num_spins: usize,
    #[serde(default)]
    constant: f64,
    #[serde(default)]
    terms: Vec<SpinTerm>,
}

/// Sum of σz-product terms with real coefficients over `num_spins` spins.
///
/// Always canonical: spins ascending within a term, terms sorted
/// lexicographically by spin set, no repeated spin sets, no zero terms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogicalHamiltonian {
    num_spins: usize,
    constant: f64,
    terms: Vec<SpinTerm>,
    /// Number of input terms folded into an already present spin set.
    #[serde(skip)]
    merges: usize,
}

impl<'de> Deserialize<'de> for LogicalHamiltonian {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawHamiltonian::deserialize(d)?;
        LogicalHamiltonian::new(
            raw.num_spins,
            raw.constant,
            raw.terms.into_iter().map(|t| (t.spins, t.coeff)),
        )
        .map_err(serde::de::Error::custom)
    }
}

/// Parses the JSON problem format into canonical form.
pub fn parse_hamiltonian(text: &str) -> Result<LogicalHamiltonian> {
    let raw: RawHamiltonian = serde_json::from_str(text)?;
    LogicalHamiltonian::new(
        raw.num_spins,
        raw.constant,
        raw.terms.into_iter().map(|t| (t.spins, t.coeff)),
    )
}

impl LogicalHamiltonian {
    /// Builds a canonical Hamiltonian from arbitrary `(spins, coeff)` pairs.
    ///
    /// Repeated spins inside one term cancel pairwise (σz² = 1); a term that
    /// reduces to the empty set is added to the constant.
    pub fn new(
        num_spins: usize,
        constant: f64,
        terms: impl IntoIterator<Item = (Vec<usize>, f64)>,
    ) -> Result<Self> {
        if !constant.is_finite() {
            return Err(Error::NonFiniteCoefficient(constant));
        }
        let mut constant = constant;
        let mut acc: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        let mut merges = 0;
        for (spins, coeff) in terms {
            if !coeff.is_finite() {
                return Err(Error::NonFiniteCoefficient(coeff));
            }
            let mut spins = spins;
            if let Some(&bad) = spins.iter().find(|&&s| s >= num_spins) {
                return Err(Error::SpinOutOfRange {
                    index: bad,
                    num_spins,
                });
            }
            spins.sort_unstable();
            let spins = reduce_squares(spins);
            if spins.is_empty() {
                constant += coeff;
                continue;
            }
            match acc.get_mut(&spins) {
                Some(c) => {
                    *c += coeff;
                    merges += 1;
                }
                None => {
                    acc.insert(spins, coeff);
                }
            }
        }
        Ok(Self::from_sorted(num_spins, constant, acc, merges))
    }

    /// Builds directly from an accumulator whose keys are already strictly
    /// increasing, in-range spin sets.
    pub(crate) fn from_sorted(
        num_spins: usize,
        constant: f64,
        acc: BTreeMap<Vec<usize>, f64>,
        merges: usize,
    ) -> Self {
        let terms = acc
            .into_iter()
            .filter(|(s, c)| !s.is_empty() && c.abs() >= ZERO_TOL)
            .map(|(spins, coeff)| SpinTerm { spins, coeff })
            .collect();
        Self {
            num_spins,
            constant,
            terms,
            merges,
        }
    }

    pub fn num_spins(&self) -> usize {
        self.num_spins
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn terms(&self) -> &[SpinTerm] {
        &self.terms
    }

    /// Number of non-constant terms (K).
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn merges(&self) -> usize {
        self.merges
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.terms.iter().map(|t| t.coeff).collect()
    }

    /// Keeps only the terms accepted by `keep`, preserving canonical order.
    pub fn retain_terms(&self, mut keep: impl FnMut(usize, &SpinTerm) -> bool) -> Self {
        let terms = self
            .terms
            .iter()
            .enumerate()
            .filter(|(i, t)| keep(*i, t))
            .map(|(_, t)| t.clone())
            .collect();
        Self {
            num_spins: self.num_spins,
            constant: self.constant,
            terms,
            merges: self.merges,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("Hamiltonian serialization cannot fail")
    }

    /// Occurrence count `n_k` of each interaction order `k`.
    pub fn interaction_histogram(&self) -> BTreeMap<usize, usize> {
        let mut hist = BTreeMap::new();
        for t in &self.terms {
            *hist.entry(t.order()).or_insert(0) += 1;
        }
        hist
    }

    /// Mean interaction order `(1/K) * sum_k k * n_k`.
    pub fn mean_interaction_order(&self) -> Result<f64> {
        if self.terms.is_empty() {
            return Err(Error::EmptyHamiltonian);
        }
        let total: usize = self.terms.iter().map(SpinTerm::order).sum();
        Ok(total as f64 / self.terms.len() as f64)
    }

    /// Energy of a computational basis state given as one 0/1 entry per spin.
    pub fn diagonal_energy(&self, config: &[u8]) -> Result<f64> {
        if config.len() != self.num_spins {
            return Err(Error::ConfigLength {
                got: config.len(),
                expected: self.num_spins,
            });
        }
        let mut e = self.constant;
        for t in &self.terms {
            let odd = t.spins.iter().filter(|&&s| config[s] & 1 == 1).count() % 2 == 1;
            e += if odd { -t.coeff } else { t.coeff };
        }
        Ok(e)
    }

    /// Precomputed masks for fast evaluation on packed basis states.
    ///
    /// # Panics
    /// Panics if the Hamiltonian has more than 64 spins.
    pub fn diagonal_table(&self) -> DiagonalTable {
        assert!(self.num_spins <= 64, "packed evaluation supports at most 64 spins");
        DiagonalTable {
            constant: self.constant,
            masks: self.terms.iter().map(SpinTerm::mask).collect(),
            coeffs: self.coefficients(),
        }
    }
}

/// Diagonal energy on packed basis states (bit `i` of the index is spin `i`).
#[derive(Clone, Debug)]
pub struct DiagonalTable {
    pub constant: f64,
    pub masks: Vec<u64>,
    pub coeffs: Vec<f64>,
}

impl DiagonalTable {
    #[inline]
    pub fn energy(&self, bits: u64) -> f64 {
        self.constant
            + self
                .masks
                .iter()
                .zip(&self.coeffs)
                .map(|(&m, &c)| if (bits & m).count_ones() & 1 == 1 { -c } else { c })
                .sum::<f64>()
    }
}

/// Removes adjacent equal pairs from a sorted index list.
fn reduce_squares(sorted: Vec<usize>) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(sorted.len());
    for s in sorted {
        if out.last() == Some(&s) {
            out.pop();
        } else {
            out.push(s);
        }
    }
    out
}
