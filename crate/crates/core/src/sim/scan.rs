use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::Serialize;

use super::statevector::{expectation_diagonal, simulate};
use super::verify::parity_observable;
use crate::error::Result;
use crate::hamiltonian::LogicalHamiltonian;
use crate::qaoa::{assemble_qaoa, Embedding, QaoaParams};

/// Grid points per parameter used by default.
pub const DEFAULT_RESOLUTION: usize = 32;
const REFINE_PASSES: usize = 3;

/// Simulated energy of the assembled QAOA state.
///
/// The gate model measures `h` at the output layout; the parity embedding
/// measures `Σ J_k Z_k - penalty Σ_l Z…Z` on the physical qubits.
pub fn qaoa_energy(h: &LogicalHamiltonian, embedding: Embedding<'_>, params: &QaoaParams, penalty: f64) -> Result<f64> {
    let circuit = assemble_qaoa(embedding, params)?;
    let state = simulate(&circuit)?;
    match embedding {
        Embedding::Standard { .. } => expectation_diagonal(h, &circuit.output_layout, &state),
        Embedding::Parity { report, .. } => {
            let obs = parity_observable(h, report, penalty)?;
            let layout: Vec<usize> = (0..obs.num_spins()).collect();
            expectation_diagonal(&obs, &layout, &state)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanResult {
    pub params: QaoaParams,
    /// Best energy on the uniform grid.
    pub grid_energy: f64,
    /// Energy after coordinate-descent refinement.
    pub energy: f64,
    pub evaluations: usize,
}

/// Uniform grid over `β ∈ [0, π)`, `γ ∈ [0, 2π)` and, with `with_omega`,
/// `Ω ∈ [0, 2π)`, for depth `p`, followed by coordinate descent.
///
/// Grid points are evaluated in parallel; the minimum is taken with the
/// lowest grid index winning ties, so the result does not depend on thread
/// scheduling.
pub fn scan_optimize<F>(p: usize, with_omega: bool, resolution: usize, energy: F) -> Result<ScanResult>
where
    F: Fn(&QaoaParams) -> Result<f64> + Sync,
{
    let per_cycle = if with_omega { 3 } else { 2 };
    let dims = p * per_cycle;
    let res = resolution.max(1);
    let periods: Vec<f64> = (0..dims)
        .map(|d| if d % per_cycle == 0 { PI } else { TAU })
        .collect();
    let total = res.pow(dims as u32);

    let to_params = |x: &[f64]| {
        let pick = |off: usize| (0..p).map(|c| x[c * per_cycle + off]).collect::<Vec<_>>();
        QaoaParams {
            betas: pick(0),
            gammas: pick(1),
            omegas: if with_omega { pick(2) } else { Vec::new() },
        }
    };
    let point = |mut idx: usize| {
        let mut x = vec![0.0; dims];
        for (d, v) in x.iter_mut().enumerate() {
            *v = (idx % res) as f64 * periods[d] / res as f64;
            idx /= res;
        }
        x
    };

    let (grid_energy, best_idx) = (0..total)
        .into_par_iter()
        .map(|i| energy(&to_params(&point(i))).map(|e| (e, i)))
        .try_reduce(
            || (f64::INFINITY, usize::MAX),
            |a, b| Ok(if b.0.total_cmp(&a.0).then(b.1.cmp(&a.1)).is_lt() { b } else { a }),
        )?;

    let mut x = point(best_idx);
    let mut best = grid_energy;
    let mut evals = total;
    let mut steps: Vec<f64> = periods.iter().map(|t| t / res as f64 / 2.0).collect();
    for _ in 0..REFINE_PASSES {
        for d in 0..dims {
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                y[d] = (y[d] + dir * steps[d]).rem_euclid(periods[d]);
                let e = energy(&to_params(&y))?;
                evals += 1;
                if e < best {
                    best = e;
                    x = y;
                }
            }
        }
        for s in &mut steps {
            *s /= 2.0;
        }
    }
    Ok(ScanResult {
        params: to_params(&x),
        grid_energy,
        energy: best,
        evaluations: evals,
    })
}
