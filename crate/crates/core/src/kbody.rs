//! Random k-body hypergraph instances.

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::LogicalHamiltonian;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffMode {
    #[default]
    Unit,
    Gaussian,
}

impl std::str::FromStr for CoeffMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "unit" => Ok(Self::Unit),
            "gaussian" => Ok(Self::Gaussian),
            _ => Err(format!("unknown coefficient mode `{s}` (unit|gaussian)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KBodySpec {
    #[serde(rename = "N")]
    pub n: usize,
    /// Interaction order `k` to number of terms `n_k`.
    pub counts: BTreeMap<usize, usize>,
    pub seed: u64,
    #[serde(default)]
    pub coeff: CoeffMode,
}

impl KBodySpec {
    pub fn num_terms(&self) -> usize {
        self.counts.values().sum()
    }

    /// Term-weighted mean order `Σ k n_k / Σ n_k`.
    pub fn mean_order(&self) -> f64 {
        let k = self.num_terms();
        let s: usize = self.counts.iter().map(|(o, c)| o * c).sum();
        s as f64 / k as f64
    }

    pub fn validate(&self) -> Result<()> {
        for (&k, &nk) in &self.counts {
            if k == 0 || k > self.n {
                if nk > 0 {
                    return Err(Error::Infeasible(format!("order {k} impossible with N={}", self.n)));
                }
                continue;
            }
            let avail = binomial(self.n, k);
            if nk as u128 > avail {
                return Err(Error::Infeasible(format!(
                    "n_{k} = {nk} exceeds C({}, {k}) = {avail}",
                    self.n
                )));
            }
        }
        Ok(())
    }
}

/// Parses `"1:2,2:11,3:2"` into an order→count map.
pub fn parse_counts(s: &str) -> std::result::Result<BTreeMap<usize, usize>, String> {
    let mut out = BTreeMap::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, n) = part
            .split_once(':')
            .ok_or_else(|| format!("expected k:n, got `{part}`"))?;
        let k: usize = k.trim().parse().map_err(|_| format!("bad order `{k}`"))?;
        let n: usize = n.trim().parse().map_err(|_| format!("bad count `{n}`"))?;
        *out.entry(k).or_insert(0) += n;
    }
    Ok(out)
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// The `rank`-th `k`-subset of `0..n` in colexicographic order.
fn unrank(mut rank: u128, n: usize, k: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut top = n;
    for j in (1..=k).rev() {
        // largest c < top with C(c, j) <= rank
        let mut c = top - 1;
        while binomial(c, j) > rank {
            c -= 1;
        }
        out.push(c);
        rank -= binomial(c, j);
        top = c;
    }
    out.reverse();
    out
}

/// `m` distinct values from `0..total`, uniformly (Floyd's algorithm).
fn floyd_sample<R: Rng>(rng: &mut R, total: u128, m: usize) -> Vec<u128> {
    let mut chosen = BTreeSet::new();
    let mut order = Vec::with_capacity(m);
    for j in (total - m as u128)..total {
        let t = rng.random_range(0..=j);
        let pick = if chosen.contains(&t) { j } else { t };
        chosen.insert(pick);
        order.push(pick);
    }
    order
}

/// Draws each order's hyperedges without replacement; deterministic per seed.
pub fn generate(spec: &KBodySpec) -> Result<LogicalHamiltonian> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut terms = Vec::with_capacity(spec.num_terms());
    for (&k, &nk) in &spec.counts {
        if nk == 0 {
            continue;
        }
        for r in floyd_sample(&mut rng, binomial(spec.n, k), nk) {
            let c = match spec.coeff {
                CoeffMode::Unit => 1.0,
                CoeffMode::Gaussian => rng.sample(StandardNormal),
            };
            terms.push((unrank(r, spec.n, k), c));
        }
    }
    LogicalHamiltonian::new(spec.n, 0.0, terms)
}

pub const GRID_N: [usize; 4] = [9, 10, 11, 12];
pub const GRID_N1: [usize; 5] = [0, 2, 4, 6, 8];
pub const GRID_N2: [usize; 5] = [11, 13, 15, 17, 19];
pub const GRID_HIGHER: [usize; 3] = [0, 2, 4];

/// `(N, counts)` for every combination of the benchmark grid.
pub fn grid_combinations(ns: &[usize]) -> Vec<(usize, BTreeMap<usize, usize>)> {
    let mut out = Vec::new();
    for &n in ns {
        for &n1 in &GRID_N1 {
            for &n2 in &GRID_N2 {
                for &n3 in &GRID_HIGHER {
                    for &n4 in &GRID_HIGHER {
                        for &n5 in &GRID_HIGHER {
                            let counts = [(1, n1), (2, n2), (3, n3), (4, n4), (5, n5)]
                                .into_iter()
                                .filter(|&(_, c)| c > 0)
                                .collect();
                            out.push((n, counts));
                        }
                    }
                }
            }
        }
    }
    out
}

/// Cross product over `ns` with `seeds` instances per combination. Instance
/// `s` of combination `i` gets seed `base_seed + i * seeds + s`.
pub fn grid(ns: &[usize], seeds: usize, base_seed: u64) -> Vec<KBodySpec> {
    grid_combinations(ns)
        .into_iter()
        .enumerate()
        .flat_map(|(i, (n, counts))| {
            (0..seeds).map(move |s| KBodySpec {
                n,
                counts: counts.clone(),
                seed: base_seed + (i * seeds + s) as u64,
                coeff: CoeffMode::Unit,
            })
        })
        .collect()
}

/// The full grid: `N ∈ {9..12}`, 10 seeds per combination.
pub fn full_grid() -> Vec<KBodySpec> {
    grid(&GRID_N, 10, 0)
}

/// Single-order family: `n_k = K` for every `K` in `ks`, `per_k` seeds each.
pub fn slope_family(n: usize, k: usize, ks: &[usize], per_k: usize, base_seed: u64) -> Result<Vec<KBodySpec>> {
    let mut out = Vec::with_capacity(ks.len() * per_k);
    for (i, &kk) in ks.iter().enumerate() {
        for s in 0..per_k {
            let spec = KBodySpec {
                n,
                counts: BTreeMap::from([(k, kk)]),
                seed: base_seed + (i * per_k + s) as u64,
                coeff: CoeffMode::Unit,
            };
            spec.validate()?;
            out.push(spec);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(n: usize, counts: &[(usize, usize)], seed: u64) -> KBodySpec {
        KBodySpec {
            n,
            counts: counts.iter().copied().collect(),
            seed,
            coeff: CoeffMode::Unit,
        }
    }

    #[test]
    fn unrank_is_a_bijection() {
        for (n, k) in [(5, 2), (6, 3), (7, 1), (4, 4)] {
            let all: BTreeSet<Vec<usize>> = (0..binomial(n, k)).map(|r| unrank(r, n, k)).collect();
            assert_eq!(all.len() as u128, binomial(n, k));
            assert!(all.iter().all(|s| s.len() == k && s.windows(2).all(|w| w[0] < w[1]) && s[k - 1] < n));
        }
        assert_eq!(binomial(9, 5), 126);
        assert_eq!(binomial(20, 2), 190);
    }

    #[test]
    fn all_pairs_on_five() {
        let h = generate(&spec(5, &[(2, 10)], 3)).unwrap();
        assert_eq!(h.len(), 10);
        assert!(generate(&spec(5, &[(2, 11)], 3)).is_err());
    }

    #[test]
    fn histogram_and_determinism() {
        let s = spec(9, &[(1, 2), (2, 11), (3, 2)], 42);
        let h = generate(&s).unwrap();
        assert_eq!(h.len(), 15);
        assert_eq!(h.interaction_histogram(), s.counts);
        assert_eq!(h, generate(&s).unwrap());
        let other = generate(&KBodySpec { seed: 43, ..s.clone() }).unwrap();
        assert_ne!(h, other);
        let g = generate(&KBodySpec { coeff: CoeffMode::Gaussian, ..s }).unwrap();
        assert!(g.terms().iter().any(|t| t.coeff != 1.0));
    }

    #[test]
    fn grid_shape() {
        let combos = grid_combinations(&GRID_N);
        assert_eq!(combos.len(), 2700);
        assert_eq!(full_grid().len(), 27_000);
        let ks: Vec<usize> = combos.iter().map(|(_, c)| c.values().sum()).collect();
        assert_eq!(*ks.iter().min().unwrap(), 11);
        assert_eq!(*ks.iter().max().unwrap(), 39);
        let kbar = |c: &BTreeMap<usize, usize>| {
            let s: usize = c.iter().map(|(k, n)| k * n).sum();
            (s, c.values().sum::<usize>())
        };
        // extremes of the mean order, as exact fractions
        let frac = |(a, b): (usize, usize)| a as f64 / b as f64;
        let hi = combos.iter().map(|(_, c)| frac(kbar(c))).fold(f64::MIN, f64::max);
        let lo = combos.iter().map(|(_, c)| frac(kbar(c))).fold(f64::MAX, f64::min);
        assert_eq!(hi, 58.0 / 19.0);
        assert_eq!(lo, 30.0 / 19.0);
        // the largest-K combination sits strictly inside the range
        assert_eq!(frac((8 + 38 + 12 + 16 + 20, 39)), 94.0 / 39.0);
        assert!(lo < 94.0 / 39.0 && 94.0 / 39.0 < hi);
    }

    #[test]
    fn slope_families() {
        let ks: Vec<usize> = (10..=70).step_by(10).collect();
        assert_eq!(slope_family(20, 2, &ks, 5, 0).unwrap().len(), 35);
        assert!(slope_family(5, 2, &[5, 10], 5, 0).is_ok());
        assert!(slope_family(5, 2, &[11], 5, 0).is_err());
        assert!(slope_family(9, 5, &[70], 1, 0).is_ok());
        assert!(slope_family(9, 5, &[130], 1, 0).is_err());
    }

    #[test]
    fn single_edge_is_uniform() {
        let mut freq = BTreeMap::new();
        for seed in 0..1000 {
            let h = generate(&spec(4, &[(2, 1)], seed)).unwrap();
            *freq.entry(h.terms()[0].spins.clone()).or_insert(0usize) += 1;
        }
        assert_eq!(freq.len(), 6);
        for (_, c) in freq {
            assert!((c as f64 / 1000.0 - 1.0 / 6.0).abs() < 0.05);
        }
    }

    #[test]
    fn counts_parsing() {
        let c = parse_counts("1:2, 2:11,3:2").unwrap();
        assert_eq!(c, BTreeMap::from([(1, 2), (2, 11), (3, 2)]));
        assert!(parse_counts("1-2").is_err());
    }

    proptest! {
        #[test]
        fn histograms_match_and_edges_are_distinct(
            n in 5usize..12,
            c1 in 0usize..5, c2 in 0usize..10, c3 in 0usize..10, seed in any::<u64>()
        ) {
            let s = spec(n, &[(1, c1), (2, c2), (3, c3)], seed);
            let h = generate(&s).unwrap();
            // LogicalHamiltonian merges duplicates, so K equal to Σ n_k means none occurred
            prop_assert_eq!(h.len(), c1 + c2 + c3);
            prop_assert_eq!(h.merges(), 0);
            let want: BTreeMap<usize, usize> = s.counts.into_iter().filter(|&(_, c)| c > 0).collect();
            prop_assert_eq!(h.interaction_histogram(), want);
        }
    }
}
