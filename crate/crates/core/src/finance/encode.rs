//! Binary expansion of the crash cost into a σz polynomial.
//!
//! Institution `i` gets `q` bits, `v_i = Σ_k 2^k x_{i,k}` (bit `i·q + k`).
//! The step is replaced by its Legendre series in
//! `x = (v_i - v_c,i) / v_max`, `v_max = 2^q - 1`, the cost is expanded as
//! a multilinear polynomial in the bits, and each bit becomes
//! `x = (1 - σz) / 2`, matching the spin convention of
//! [`LogicalHamiltonian::diagonal_energy`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::legendre::{heaviside_coefficients, heaviside_series, series_degree, HeavisideMode};
use super::FinancialNetwork;
use crate::error::{Error, Result};
use crate::hamiltonian::LogicalHamiltonian;
use crate::kbody::binomial;

/// Default guard on intermediate monomials.
pub const DEFAULT_MONOMIAL_CAP: usize = 10_000_000;
/// Coefficients below this fraction of the largest one are rounding residue.
const NOISE_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    #[default]
    None,
    /// Keep the `T` terms of largest magnitude.
    TopTerms(usize),
    /// Drop terms with `|coeff| < c`.
    Chop(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodingSpec {
    pub q: usize,
    pub r: usize,
    pub mode: HeavisideMode,
    pub truncation: Truncation,
    pub monomial_cap: usize,
}

impl Default for EncodingSpec {
    fn default() -> Self {
        Self {
            q: 5,
            r: 3,
            mode: HeavisideMode::Orthogonal,
            truncation: Truncation::None,
            monomial_cap: DEFAULT_MONOMIAL_CAP,
        }
    }
}

impl EncodingSpec {
    pub fn v_max(&self) -> f64 {
        ((1u64 << self.q) - 1) as f64
    }

    fn validate(&self, n: usize) -> Result<()> {
        if self.q == 0 || self.r == 0 {
            return Err(Error::Infeasible(format!("need q, r >= 1, got q={}, r={}", self.q, self.r)));
        }
        if n * self.q > 64 {
            return Err(Error::Infeasible(format!("{} bits exceed the 64-bit monomial key", n * self.q)));
        }
        Ok(())
    }
}

/// Multilinear polynomial: bit mask → coefficient.
type Poly = BTreeMap<u64, f64>;

struct Budget {
    used: usize,
    cap: usize,
}

impl Budget {
    fn charge(&mut self, n: usize) -> Result<()> {
        self.used += n;
        if self.used > self.cap {
            return Err(Error::ExpansionOverflow {
                count: self.used,
                cap: self.cap,
            });
        }
        Ok(())
    }
}

fn mul(a: &Poly, b: &Poly, budget: &mut Budget) -> Result<Poly> {
    budget.charge(a.len() * b.len())?;
    let mut out = Poly::new();
    for (&ma, &ca) in a {
        for (&mb, &cb) in b {
            *out.entry(ma | mb).or_insert(0.0) += ca * cb;
        }
    }
    Ok(out)
}

fn axpy(acc: &mut Poly, s: f64, p: &Poly) {
    for (&m, &c) in p {
        *acc.entry(m).or_insert(0.0) += s * c;
    }
}

fn scaled(s: f64, p: &Poly) -> Poly {
    p.iter().map(|(&m, &c)| (m, s * c)).collect()
}

/// The cost with the series step, as a multilinear polynomial in the bits.
fn bit_polynomial(net: &FinancialNetwork, spec: &EncodingSpec, budget: &mut Budget) -> Result<Poly> {
    let (n, q) = (net.n, spec.q);
    let coeffs = heaviside_coefficients(spec.r, spec.mode);
    let vmax = spec.v_max();
    let m = net.valuation_matrix()?;
    let dp = net.asset_values();

    let value = |i: usize| -> Poly { (0..q).map(|k| (1u64 << (i * q + k), (1u64 << k) as f64)).collect() };
    let mut thetas = Vec::with_capacity(n);
    for i in 0..n {
        // x = (v_i - v_c) / v_max, then Σ c_l P_l(x) by the recurrence
        let mut x = scaled(1.0 / vmax, &value(i));
        *x.entry(0).or_insert(0.0) -= net.v_crit[i] / vmax;
        let mut prev = Poly::from([(0, 1.0)]);
        let mut cur = x.clone();
        let mut theta = Poly::new();
        axpy(&mut theta, coeffs[0], &prev);
        for l in 1..=spec.r {
            if l > 1 {
                let lf = (l - 1) as f64;
                let mut next = scaled((2.0 * lf + 1.0) / (lf + 1.0), &mul(&x, &cur, budget)?);
                axpy(&mut next, -lf / (lf + 1.0), &prev);
                prev = std::mem::replace(&mut cur, next);
            }
            axpy(&mut theta, coeffs[l], &cur);
        }
        thetas.push(theta);
    }

    let mut f = Poly::new();
    for i in 0..n {
        // R_i = v_i - Σ_j M_ij (dp_j - β_j) - Σ_j M_ij β_j θ_j
        let mut r = value(i);
        let shift: f64 = (0..n).map(|j| m[(i, j)] * (dp[j] - net.beta[j])).sum();
        *r.entry(0).or_insert(0.0) -= shift;
        for j in 0..n {
            axpy(&mut r, -m[(i, j)] * net.beta[j], &thetas[j]);
        }
        let sq = mul(&r, &r, budget)?;
        axpy(&mut f, 1.0, &sq);
    }
    Ok(f)
}

/// The same cost evaluated numerically at the values implied by `bits`.
pub fn series_cost(net: &FinancialNetwork, spec: &EncodingSpec, bits: &[u8]) -> Result<f64> {
    let v = values_from_bits(net.n, spec.q, bits)?;
    let coeffs = heaviside_coefficients(spec.r, spec.mode);
    let vmax = spec.v_max();
    super::crash_cost_with(net, &v, |_, dx| heaviside_series(&coeffs, dx / vmax))
}

pub fn values_from_bits(n: usize, q: usize, bits: &[u8]) -> Result<Vec<f64>> {
    if bits.len() != n * q {
        return Err(Error::ConfigLength {
            got: bits.len(),
            expected: n * q,
        });
    }
    Ok((0..n)
        .map(|i| (0..q).map(|k| f64::from(bits[i * q + k]) * (1u64 << k) as f64).sum())
        .collect())
}

/// Encodes the crash cost of `net` as a Hamiltonian over `n·q` spins.
pub fn encode(net: &FinancialNetwork, spec: &EncodingSpec) -> Result<LogicalHamiltonian> {
    spec.validate(net.n)?;
    let mut budget = Budget {
        used: 0,
        cap: spec.monomial_cap,
    };
    let poly = bit_polynomial(net, spec, &mut budget)?;

    // Π_{k∈S} (1 - s_k)/2 = 2^{-|S|} Σ_{T⊆S} (-1)^{|T|} Π_{k∈T} s_k
    let mut spins: BTreeMap<u64, f64> = BTreeMap::new();
    for (&mask, &c) in &poly {
        let size = mask.count_ones();
        budget.charge(1 << size)?;
        let base = c / f64::from(1u32 << size);
        let mut sub = mask;
        loop {
            let sign = if sub.count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            *spins.entry(sub).or_insert(0.0) += sign * base;
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & mask;
        }
    }
    let constant = spins.remove(&0).unwrap_or(0.0);
    let largest = spins.values().fold(0.0f64, |a, c| a.max(c.abs()));
    let terms: BTreeMap<Vec<usize>, f64> = spins
        .into_iter()
        .filter(|(_, c)| c.abs() > NOISE_FLOOR * largest)
        .map(|(m, c)| ((0..64).filter(|b| m >> b & 1 == 1).collect(), c))
        .collect();
    let full = LogicalHamiltonian::from_sorted(net.n * spec.q, constant, terms, 0);
    Ok(truncate(&full, spec.truncation))
}

/// Applies a truncation mode; the constant is always kept.
pub fn truncate(h: &LogicalHamiltonian, truncation: Truncation) -> LogicalHamiltonian {
    match truncation {
        Truncation::None => h.clone(),
        Truncation::Chop(t) => h.retain_terms(|_, term| term.coeff.abs() >= t),
        Truncation::TopTerms(t) => {
            let terms = h.terms();
            let mut order: Vec<usize> = (0..terms.len()).collect();
            order.sort_by(|&a, &b| terms[b].coeff.abs().total_cmp(&terms[a].coeff.abs()).then(a.cmp(&b)));
            let mut keep = vec![false; terms.len()];
            for &i in order.iter().take(t) {
                keep[i] = true;
            }
            h.retain_terms(|i, _| keep[i])
        }
    }
}

/// Energy of the untruncated encoding on `bits` and the numeric series cost
/// at the same values.
pub fn encoded_energy_consistency(net: &FinancialNetwork, spec: &EncodingSpec, bits: &[u8]) -> Result<(f64, f64)> {
    let exact = EncodingSpec {
        truncation: Truncation::None,
        ..*spec
    };
    let h = encode(net, &exact)?;
    Ok((h.diagonal_energy(bits)?, series_cost(net, &exact, bits)?))
}

/// Number of non-constant terms of an untruncated encoding with generic
/// coefficients: every monomial of degree `≤ 2d` within one institution and
/// every product of degree-`≤ d` monomials of two institutions, where `d` is
/// the degree of the step series.
pub fn expected_term_count(n: usize, q: usize, r: usize, mode: HeavisideMode) -> u128 {
    let d = series_degree(&heaviside_coefficients(r, mode)).max(1);
    let upto = |deg: usize| (1..=deg.min(q)).map(|j| binomial(q, j)).sum::<u128>();
    n as u128 * upto(2 * d) + binomial(n, 2) * upto(d).pow(2)
}

#[cfg(test)]
mod tests {
    use super::super::generate_instance;
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(q: usize, r: usize, mode: HeavisideMode) -> EncodingSpec {
        EncodingSpec {
            q,
            r,
            mode,
            ..EncodingSpec::default()
        }
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn term_count_1968() {
        for seed in 0..5 {
            let net = generate_instance(3, 7, seed).unwrap();
            for mode in [HeavisideMode::Orthogonal, HeavisideMode::Verbatim] {
                let h = encode(&net, &spec(5, 3, mode)).unwrap();
                assert_eq!(h.len(), 1968);
            }
        }
        assert_eq!(expected_term_count(3, 5, 3, HeavisideMode::Orthogonal), 1968);
    }

    #[test]
    fn term_count_formula_on_other_sizes() {
        for (n, q, r) in [(2, 3, 1), (3, 2, 3), (2, 4, 2), (4, 3, 3), (2, 5, 5)] {
            let net = generate_instance(n, 3, 7).unwrap();
            for mode in [HeavisideMode::Orthogonal, HeavisideMode::Verbatim] {
                let h = encode(&net, &spec(q, r, mode)).unwrap();
                assert_eq!(h.len() as u128, expected_term_count(n, q, r, mode), "{n} {q} {r} {mode:?}");
            }
        }
    }

    #[test]
    fn single_bit_hand_expansion() {
        // n = q = r = 1: v = x, v_max = 1, θ = 1/2 + 3/4 (x - v_c),
        // R = x - M(dp - β) - Mβθ with M = 1 (no cross-holdings, C̃ = 1)
        let net = FinancialNetwork {
            n: 1,
            m: 1,
            d: vec![vec![1.0]],
            c: vec![vec![0.0]],
            c_self: vec![1.0],
            prices: vec![2.0],
            v_crit: vec![0.5],
            beta: vec![0.4],
        };
        let h = encode(&net, &spec(1, 1, HeavisideMode::Orthogonal)).unwrap();
        // R(x) = a + b x with
        let b = 1.0 - 0.4 * 0.75;
        let a = -(2.0 - 0.4) - 0.4 * (0.5 - 0.75 * 0.5);
        // R² = a² + (2ab + b²) x, x = (1 - s)/2
        let lin = 2.0 * a * b + b * b;
        assert_eq!(h.len(), 1);
        assert!((h.constant() - (a * a + lin / 2.0)).abs() < 1e-12);
        assert!((h.terms()[0].coeff + lin / 2.0).abs() < 1e-12);
    }

    #[test]
    fn exhaustive_consistency_on_toys() {
        for (n, q, r, seed) in [(2, 3, 3, 1), (3, 4, 3, 2), (2, 6, 5, 3), (4, 3, 2, 4), (3, 4, 1, 5)] {
            let net = generate_instance(n, 4, seed).unwrap();
            for mode in [HeavisideMode::Orthogonal, HeavisideMode::Verbatim] {
                let s = spec(q, r, mode);
                let h = encode(&net, &s).unwrap();
                for z in 0..1u64 << (n * q) {
                    let bits: Vec<u8> = (0..n * q).map(|b| (z >> b & 1) as u8).collect();
                    let e = h.diagonal_energy(&bits).unwrap();
                    let f = series_cost(&net, &s, &bits).unwrap();
                    assert!(rel(e, f) < 1e-6, "{n} {q} {r} {z}: {e} vs {f}");
                }
            }
        }
    }

    #[test]
    fn random_assignments_at_3_5_3() {
        let net = generate_instance(3, 7, 11).unwrap();
        let s = spec(5, 3, HeavisideMode::Orthogonal);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut cases: Vec<Vec<u8>> = vec![vec![0; 15], vec![1; 15]];
        cases.extend((0..100).map(|_| (0..15).map(|_| rng.random_range(0..2u8)).collect()));
        for bits in cases {
            let (e, f) = encoded_energy_consistency(&net, &s, &bits).unwrap();
            assert!(rel(e, f) < 1e-6);
        }
    }

    #[test]
    fn truncation_modes() {
        let net = generate_instance(3, 7, 2).unwrap();
        let full = encode(&net, &spec(5, 3, HeavisideMode::Orthogonal)).unwrap();
        let top = encode(
            &net,
            &EncodingSpec {
                truncation: Truncation::TopTerms(200),
                ..spec(5, 3, HeavisideMode::Orthogonal)
            },
        )
        .unwrap();
        assert_eq!(top.len(), 200);
        let mut mags: Vec<f64> = full.terms().iter().map(|t| t.coeff.abs()).collect();
        mags.sort_by(|a, b| b.total_cmp(a));
        let kept_min = top.terms().iter().map(|t| t.coeff.abs()).fold(f64::MAX, f64::min);
        assert!(kept_min >= mags[200]);
        assert_eq!(kept_min, mags[199]);

        let chop = |c: f64| {
            encode(
                &net,
                &EncodingSpec {
                    truncation: Truncation::Chop(c),
                    ..spec(5, 3, HeavisideMode::Orthogonal)
                },
            )
            .unwrap()
        };
        let (loose, tight) = (chop(0.01), chop(1.0));
        assert!(tight.len() <= loose.len());
        assert!(tight
            .terms()
            .iter()
            .all(|t| loose.terms().iter().any(|u| u.spins == t.spins && u.coeff == t.coeff)));
    }

    #[test]
    fn expansion_cap_is_enforced() {
        let net = generate_instance(3, 7, 0).unwrap();
        let s = EncodingSpec {
            monomial_cap: 1000,
            ..EncodingSpec::default()
        };
        assert!(matches!(encode(&net, &s), Err(Error::ExpansionOverflow { .. })));
    }
}
