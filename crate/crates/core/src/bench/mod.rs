//! Benchmark records, statistics and scenario sweeps.

pub mod scenarios;
pub mod stats;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::hamiltonian::LogicalHamiltonian;
use crate::parity::{parity_gate_count, MappingReport, ParityMode, SearchOptions};
use crate::router::{gm_gate_count, SquareLattice};

pub use scenarios::{run_scenario, write_outputs, Scenario, ScenarioOutput};
pub use stats::{aggregate, linear_fit, Aggregate, FitResult};

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub seed: u64,
    /// Router runs per instance; the minimum CNOT count is recorded.
    pub router_repeats: usize,
    pub parity_mode: ParityMode,
    /// Fixed lattice; by default the smallest near-square one is used.
    pub lattice: Option<SquareLattice>,
    /// Complete sweep grids instead of the scaled-down defaults.
    pub full: bool,
    pub search: SearchOptions,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            router_repeats: 5,
            parity_mode: ParityMode::WorstCase,
            lattice: None,
            full: false,
            search: SearchOptions::default(),
        }
    }
}

/// One row of benchmark output. In coupler mode `n_cnot_pm` holds the
/// coupler count, so `r_gates` is always the parity gate count over the
/// gate-model CNOT count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub scenario: String,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub kbar: f64,
    pub seed: u64,
    pub n_cnot_gm: usize,
    pub n_cnot_pm: usize,
    pub n_coupler_pm: usize,
    pub r_gates: Option<f64>,
    pub grid_w: usize,
    pub grid_h: usize,
}

pub fn gate_ratio(pm: usize, gm: usize) -> Option<f64> {
    (gm > 0).then(|| pm as f64 / gm as f64)
}

/// Counts both embeddings of `h` for one QAOA cycle.
pub fn run_instance(scenario: &str, h: &LogicalHamiltonian, seed: u64, config: &BenchConfig) -> Result<BenchRecord> {
    let lattice = config
        .lattice
        .unwrap_or_else(|| SquareLattice::for_qubits(h.num_spins()));
    let gm = gm_gate_count(h, lattice, seed, config.router_repeats)?;
    let report = match config.parity_mode {
        ParityMode::Basis => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            MappingReport::with_basis(h, &config.search, &mut rng)
        }
        _ => MappingReport::counts_only(h),
    };
    let counts = parity_gate_count(&report, config.parity_mode)?;
    let pm = match config.parity_mode {
        ParityMode::Coupler => counts.coupler,
        _ => counts.cnot,
    };
    Ok(BenchRecord {
        scenario: scenario.to_string(),
        n: h.num_spins(),
        k: h.len(),
        kbar: h.mean_interaction_order().unwrap_or(0.0),
        seed,
        n_cnot_gm: gm.min,
        n_cnot_pm: pm,
        n_coupler_pm: report.n_constraints,
        r_gates: gate_ratio(pm, gm.min),
        grid_w: lattice.width,
        grid_h: lattice.height,
    })
}

/// `n_G ≥ 2(K - N)` and `n_G - N_C ≥ N_C` for a record.
pub fn delta_bound_check(r: &BenchRecord) -> bool {
    let (gm, k, n, nc) = (r.n_cnot_gm as i64, r.k as i64, r.n as i64, r.n_coupler_pm as i64);
    gm >= 2 * (k - n) && gm - nc >= nc
}
