//! Financial-network crash model and its spin-Hamiltonian encoding.
//!
//! Institutions hold assets (`D`), each other (`C`) and themselves (`C̃`).
//! Equity values solve `(1 - C) V = D p - b`, market values are `v = C̃ V`,
//! and an institution whose value falls below its critical value `v_c`
//! loses `β` of equity.

pub mod encode;
pub mod legendre;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use encode::{encode, encoded_energy_consistency, expected_term_count, truncate, EncodingSpec, Truncation};
pub use legendre::{heaviside_coefficients, HeavisideMode};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinancialNetwork {
    pub n: usize,
    pub m: usize,
    /// `n × m`, share of asset `j` owned by institution `i`.
    pub d: Vec<Vec<f64>>,
    /// `n × n` cross-holdings, zero diagonal.
    pub c: Vec<Vec<f64>>,
    /// Diagonal of the self-holding matrix `C̃`.
    pub c_self: Vec<f64>,
    pub prices: Vec<f64>,
    pub v_crit: Vec<f64>,
    pub beta: Vec<f64>,
}

/// Minimum self-holding ratio used by the generator.
pub const MIN_SELF_HOLDING: f64 = 0.5;
pub const PRICE_RANGE: (f64, f64) = (5.0, 20.0);
pub const CRASH_DROP: f64 = 0.15;
pub const CRITICAL_RATIO: f64 = 0.8;

impl FinancialNetwork {
    fn matrix(rows: &[Vec<f64>], cols: usize) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j])
    }

    /// `D p`.
    pub fn asset_values(&self) -> DVector<f64> {
        Self::matrix(&self.d, self.m) * DVector::from_column_slice(&self.prices)
    }

    /// `M = C̃ (1 - C)^{-1}`.
    pub fn valuation_matrix(&self) -> Result<DMatrix<f64>> {
        let a = DMatrix::identity(self.n, self.n) - Self::matrix(&self.c, self.n);
        let inv = a
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Singular("1 - C is not invertible".into()))?;
        Ok(DMatrix::from_diagonal(&DVector::from_column_slice(&self.c_self)) * inv)
    }

    /// Equity values `V = (1 - C)^{-1} D p` and market values `v = C̃ V`.
    pub fn equity_and_market_values(&self) -> Result<(Vec<f64>, Vec<f64>)> {
        let a = DMatrix::identity(self.n, self.n) - Self::matrix(&self.c, self.n);
        let dp = self.asset_values();
        let v_eq = a.clone()
            .lu()
            .solve(&dp)
            .ok_or_else(|| Error::Singular("1 - C is not invertible".into()))?;
        let residual = (&a * &v_eq - &dp).norm();
        if !(residual <= 1e-10 * dp.norm().max(1.0)) {
            return Err(Error::Singular(format!("linear solve residual {residual:e}")));
        }
        let market = v_eq.iter().zip(&self.c_self).map(|(v, s)| v * s).collect();
        Ok((v_eq.iter().copied().collect(), market))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Infeasible(msg));
        if self.d.len() != self.n
            || self.d.iter().any(|r| r.len() != self.m)
            || self.c.len() != self.n
            || self.c.iter().any(|r| r.len() != self.n)
            || [&self.c_self, &self.v_crit, &self.beta].iter().any(|v| v.len() != self.n)
            || self.prices.len() != self.m
        {
            return bad("inconsistent network dimensions".into());
        }
        for j in 0..self.m {
            let s: f64 = self.d.iter().map(|r| r[j]).sum();
            if s > 1.0 + 1e-12 || self.d.iter().any(|r| r[j] < 0.0) {
                return bad(format!("asset {j} ownership sums to {s}"));
            }
        }
        for j in 0..self.n {
            if self.c[j][j] != 0.0 {
                return bad(format!("institution {j} holds itself through C"));
            }
            let s: f64 = self.c.iter().map(|r| r[j]).sum::<f64>() + self.c_self[j];
            if s > 1.0 + 1e-12 {
                return bad(format!("institution {j} holdings sum to {s}"));
            }
        }
        self.valuation_matrix().map(|_| ())
    }
}

/// Market values `v = C̃ (1 - C)^{-1} D p`.
pub fn market_values(net: &FinancialNetwork) -> Result<Vec<f64>> {
    Ok(net.equity_and_market_values()?.1)
}

/// Step function with `Θ(0) = 1`.
pub fn step(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// `F(v) = ‖v - C̃ (1 - C)^{-1} (D p - b(v))‖²` with
/// `b_i = β_i (1 - θ(v_i - v_c,i))`, for any step approximation `theta`.
pub fn crash_cost_with(net: &FinancialNetwork, v: &[f64], theta: impl Fn(usize, f64) -> f64) -> Result<f64> {
    if v.len() != net.n {
        return Err(Error::ConfigLength {
            got: v.len(),
            expected: net.n,
        });
    }
    let m = net.valuation_matrix()?;
    let dp = net.asset_values();
    let rhs = DVector::from_fn(net.n, |i, _| {
        dp[i] - net.beta[i] * (1.0 - theta(i, v[i] - net.v_crit[i]))
    });
    let r = DVector::from_column_slice(v) - m * rhs;
    Ok(r.norm_squared())
}

/// Crash cost with the exact step.
pub fn crash_cost(net: &FinancialNetwork, v: &[f64]) -> Result<f64> {
    crash_cost_with(net, v, |_, x| step(x))
}

/// Random network: ownership columns of `D` sum to one, each institution
/// keeps a self-holding `C̃_jj ∈ [0.5, 1]` and spreads the rest over the
/// others, prices are uniform in `[5, 20]`, `β = 0.15 V` and `v_c = 0.8 v`.
pub fn generate_instance(n: usize, m: usize, seed: u64) -> Result<FinancialNetwork> {
    if n == 0 || m == 0 {
        return Err(Error::Infeasible(format!("need n, m >= 1, got n={n}, m={m}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = vec![vec![0.0; m]; n];
    for j in 0..m {
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
        let s: f64 = raw.iter().sum();
        for i in 0..n {
            d[i][j] = raw[i] / s;
        }
    }
    let mut c = vec![vec![0.0; n]; n];
    let mut c_self = vec![1.0; n];
    if n > 1 {
        for j in 0..n {
            let total = rng.random_range(0.0..(1.0 - MIN_SELF_HOLDING));
            let raw: Vec<f64> = (0..n)
                .map(|i| if i == j { 0.0 } else { rng.random_range(0.01..1.0) })
                .collect();
            let s: f64 = raw.iter().sum();
            for i in 0..n {
                c[i][j] = total * raw[i] / s;
            }
            c_self[j] = 1.0 - total;
        }
    }
    let prices = (0..m)
        .map(|_| rng.random_range(PRICE_RANGE.0..=PRICE_RANGE.1))
        .collect();
    let mut net = FinancialNetwork {
        n,
        m,
        d,
        c,
        c_self,
        prices,
        v_crit: vec![0.0; n],
        beta: vec![0.0; n],
    };
    let (equity, market) = net.equity_and_market_values()?;
    net.beta = equity.iter().map(|v| CRASH_DROP * v).collect();
    net.v_crit = market.iter().map(|v| CRITICAL_RATIO * v).collect();
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single(v_crit: f64, beta: f64) -> FinancialNetwork {
        FinancialNetwork {
            n: 1,
            m: 1,
            d: vec![vec![1.0]],
            c: vec![vec![0.0]],
            c_self: vec![1.0],
            prices: vec![10.0],
            v_crit: vec![v_crit],
            beta: vec![beta],
        }
    }

    #[test]
    fn identity_case() {
        assert_eq!(market_values(&single(8.0, 1.5)).unwrap(), vec![10.0]);
    }

    #[test]
    fn two_institution_solve() {
        let net = FinancialNetwork {
            n: 2,
            m: 2,
            d: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            c: vec![vec![0.0, 0.4], vec![0.4, 0.0]],
            c_self: vec![0.6, 0.6],
            prices: vec![10.0, 10.0],
            v_crit: vec![0.0; 2],
            beta: vec![0.0; 2],
        };
        net.validate().unwrap();
        // (1 - C) V = [10, 10] gives V = 10 / 0.6 each, so v = 10
        let v = market_values(&net).unwrap();
        for x in v {
            assert!((x - 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn crash_cost_examples() {
        let net = generate_instance(3, 7, 4).unwrap();
        let v = market_values(&net).unwrap();
        assert!(crash_cost(&net, &v).unwrap() < 1e-20);

        // below the critical value: F = (v - (10 - β))², by hand
        let toy = single(8.0, 1.5);
        assert!((crash_cost(&toy, &[7.0]).unwrap() - (7.0f64 - 8.5).powi(2)).abs() < 1e-12);
        assert!((crash_cost(&toy, &[8.0]).unwrap() - 4.0).abs() < 1e-12);
        assert!(crash_cost(&toy, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn relabeling_symmetry() {
        let net = generate_instance(3, 4, 9).unwrap();
        let perm = [2, 0, 1];
        let pn = FinancialNetwork {
            d: perm.iter().map(|&i| net.d[i].clone()).collect(),
            c: perm.iter().map(|&i| perm.iter().map(|&j| net.c[i][j]).collect()).collect(),
            c_self: perm.iter().map(|&i| net.c_self[i]).collect(),
            v_crit: perm.iter().map(|&i| net.v_crit[i]).collect(),
            beta: perm.iter().map(|&i| net.beta[i]).collect(),
            ..net.clone()
        };
        let v = [12.0, 30.0, 7.5];
        let pv: Vec<f64> = perm.iter().map(|&i| v[i]).collect();
        let a = crash_cost(&net, &v).unwrap();
        let b = crash_cost(&pn, &pv).unwrap();
        assert!((a - b).abs() < 1e-9 * a.max(1.0));
    }

    #[test]
    fn generator_invariants() {
        for seed in 0..10 {
            let net = generate_instance(3, 7, seed).unwrap();
            net.validate().unwrap();
            assert!(net.c_self.iter().all(|&s| s >= MIN_SELF_HOLDING));
            assert!(net.prices.iter().all(|&p| (5.0..=20.0).contains(&p)));
            let (eq, mv) = net.equity_and_market_values().unwrap();
            assert!(mv.iter().all(|&v| v > 0.0));
            for i in 0..3 {
                assert!((net.beta[i] - 0.15 * eq[i]).abs() < 1e-12);
                assert!((net.v_crit[i] - 0.8 * mv[i]).abs() < 1e-12);
            }
            assert_eq!(net, generate_instance(3, 7, seed).unwrap());
        }
        assert!(generate_instance(0, 3, 0).is_err());
    }

    #[test]
    fn singular_system_is_reported() {
        let mut net = generate_instance(2, 2, 0).unwrap();
        net.c = vec![vec![0.0, 1.0], vec![1.0, 0.0]];
        assert!(matches!(market_values(&net), Err(Error::Singular(_))));
    }
}
