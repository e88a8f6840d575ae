use num_complex::Complex64;
use serde::Serialize;

use super::statevector::StateVector;
use crate::error::{Error, Result};
use crate::hamiltonian::LogicalHamiltonian;
use crate::parity::{Constraint, MappingReport};
use crate::router::RoutedCircuit;

/// Logical-spin limit for the dense routed-unitary check.
pub const ROUTED_CHECK_MAX_SPINS: usize = 8;
/// Brute-force limits for the parity spectrum check.
pub const SPECTRUM_MAX_SPINS: usize = 10;
pub const SPECTRUM_MAX_TERMS: usize = 16;

/// Maximum elementwise deviation between the routed circuit (with the final
/// placement undone) and `Π exp(-iγ coeff Z…Z)`.
///
/// Every logical basis state is embedded at the initial placement with idle
/// sites in `|0⟩`, run through the circuit and compared against the expected
/// phase at the final placement.
pub fn verify_routed_equivalence(h: &LogicalHamiltonian, routed: &RoutedCircuit, gamma: f64) -> Result<f64> {
    let n = h.num_spins();
    if n > ROUTED_CHECK_MAX_SPINS {
        return Err(Error::TooManyQubits {
            qubits: n,
            cap: ROUTED_CHECK_MAX_SPINS,
        });
    }
    let gates = routed.bind(&h.coefficients(), gamma)?;
    let sites = routed.lattice.num_sites();
    let table = h.diagonal_table();
    let embed = |z: usize, placement: &[usize]| {
        (0..n)
            .filter(|&i| z >> i & 1 == 1)
            .fold(0usize, |acc, i| acc | 1 << placement[i])
    };
    let mut worst = 0.0f64;
    for z in 0..1usize << n {
        let mut s = StateVector::basis(sites, embed(z, &routed.initial_placement))?;
        s.apply_gates(&gates);
        let target = embed(z, &routed.final_placement);
        let phase = -gamma * (table.energy(z as u64) - table.constant);
        let expected = Complex64::from_polar(1.0, phase);
        for (i, a) in s.amplitudes().iter().enumerate() {
            let want = if i == target { expected } else { Complex64::new(0.0, 0.0) };
            worst = worst.max((a - want).norm());
        }
    }
    Ok(worst)
}

/// Outcome of the brute-force comparison between the logical spectrum and
/// the constrained physical spectrum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectrumCheck {
    pub passed: bool,
    pub logical_ground: f64,
    pub physical_min: f64,
    /// Number of physical configurations satisfying every constraint.
    pub valid_configs: usize,
    pub images_satisfy_constraints: bool,
    pub images_preserve_energy: bool,
    pub penalty_ground_decodes: bool,
}

fn constraint_masks(report: &MappingReport) -> Result<Vec<u64>> {
    let all: Vec<&Constraint> = report.constraints.iter().chain(&report.residual).collect();
    if all.len() != report.n_constraints {
        return Err(Error::UnresolvedConstraints {
            unresolved: report.n_constraints - all.len().min(report.n_constraints),
            weights: Vec::new(),
        });
    }
    Ok(all
        .iter()
        .map(|c| c.terms.iter().fold(0u64, |m, &k| m | 1 << k))
        .collect())
}

/// Physical energy `Σ J_k q_k - penalty Σ_l Π q`, with `q = ±1` and bit `k`
/// of `bits` set meaning `q_k = -1`.
fn physical_energy(coeffs: &[f64], masks: &[u64], penalty: f64, bits: u64) -> (f64, bool) {
    let e: f64 = coeffs
        .iter()
        .enumerate()
        .map(|(k, &j)| if bits >> k & 1 == 0 { j } else { -j })
        .sum();
    let mut all_ok = true;
    let mut pen = 0.0;
    for &m in masks {
        let ok = (bits & m).count_ones() % 2 == 0;
        all_ok &= ok;
        pen += if ok { 1.0 } else { -1.0 };
    }
    (e - penalty * pen, all_ok)
}

/// Default penalty for [`verify_parity_spectrum`]: `1 + Σ|J_k|`.
pub fn default_penalty(h: &LogicalHamiltonian) -> f64 {
    1.0 + h.terms().iter().map(|t| t.coeff.abs()).sum::<f64>()
}

/// Brute-force check that the parity encoding preserves the spectrum.
///
/// Requires the report to carry a full constraint basis (regular plus
/// residual constraints).
pub fn verify_parity_spectrum(h: &LogicalHamiltonian, report: &MappingReport, penalty: f64) -> Result<SpectrumCheck> {
    let n = h.num_spins();
    let k = h.len();
    if n > SPECTRUM_MAX_SPINS || k > SPECTRUM_MAX_TERMS {
        return Err(Error::TooManyQubits {
            qubits: n.max(k),
            cap: SPECTRUM_MAX_TERMS,
        });
    }
    let masks = constraint_masks(report)?;
    let coeffs = h.coefficients();
    let table = h.diagonal_table();
    let scale = 1.0 + coeffs.iter().map(|c| c.abs()).sum::<f64>();
    let tol = 1e-9 * scale;

    let mut logical_ground = f64::INFINITY;
    let mut images_ok = true;
    let mut energy_ok = true;
    for z in 0..1u64 << n {
        let e = table.energy(z);
        logical_ground = logical_ground.min(e);
        let image = table
            .masks
            .iter()
            .enumerate()
            .fold(0u64, |acc, (kk, &m)| acc | u64::from((z & m).count_ones() % 2) << kk);
        let (pe, ok) = physical_energy(&coeffs, &masks, 0.0, image);
        images_ok &= ok;
        energy_ok &= (pe + h.constant() - e).abs() <= tol;
    }

    let mut physical_min = f64::INFINITY;
    let mut valid = 0;
    let mut pen_ground = f64::INFINITY;
    for bits in 0..1u64 << k {
        let (e, ok) = physical_energy(&coeffs, &masks, 0.0, bits);
        if ok {
            valid += 1;
            physical_min = physical_min.min(e + h.constant());
        }
        pen_ground = pen_ground.min(physical_energy(&coeffs, &masks, penalty, bits).0);
    }
    // every penalized ground state must be valid and decode to a logical ground state
    let mut decodes = true;
    for bits in 0..1u64 << k {
        let (e, ok) = physical_energy(&coeffs, &masks, penalty, bits);
        if (e - pen_ground).abs() <= tol {
            let logical = e + penalty * masks.len() as f64 + h.constant();
            decodes &= ok && (logical - logical_ground).abs() <= tol;
        }
    }
    let spectrum_ok = (physical_min - logical_ground).abs() <= tol;
    Ok(SpectrumCheck {
        passed: images_ok && energy_ok && spectrum_ok && decodes,
        logical_ground,
        physical_min,
        valid_configs: valid,
        images_satisfy_constraints: images_ok,
        images_preserve_energy: energy_ok,
        penalty_ground_decodes: decodes,
    })
}

/// Diagonal observable on the `K` physical qubits:
/// `Σ J_k Z_k - penalty Σ_l Z…Z` over each constraint, plus the logical constant.
pub fn parity_observable(h: &LogicalHamiltonian, report: &MappingReport, penalty: f64) -> Result<LogicalHamiltonian> {
    let k = h.len();
    let singles = h.terms().iter().enumerate().map(|(i, t)| (vec![i], t.coeff));
    let cons = report
        .constraints
        .iter()
        .chain(&report.residual)
        .map(|c| (c.terms.clone(), -penalty));
    LogicalHamiltonian::new(k, h.constant(), singles.chain(cons))
}
