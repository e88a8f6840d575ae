//! QAOA circuits for the gate-model and parity embeddings.
//!
//! Gate model: `U_x(β_p) U_p(γ_p) … U_x(β_1) U_p(γ_1) H^n`.
//! Parity: `U_x(β_p) U_c(Ω_p) U_z(γ_p) … H^K`, with
//! `U_z(γ) = Π_k exp(-iγ J_k Z_k)` and `U_c(Ω) = Π_l exp(-iΩ Z…Z)` over each
//! constraint's qubits.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, EmbeddingTag, Gate};
use crate::error::{Error, Result};
use crate::hamiltonian::LogicalHamiltonian;
use crate::parity::MappingReport;
use crate::router::RoutedCircuit;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QaoaParams {
    pub betas: Vec<f64>,
    pub gammas: Vec<f64>,
    /// Constraint angles; empty for the gate model.
    #[serde(default)]
    pub omegas: Vec<f64>,
}

impl QaoaParams {
    /// Checks lengths, finiteness and the ranges `β ∈ [0, π)`,
    /// `γ, Ω ∈ [0, 2π)`. `omegas` must be empty or have length `p`.
    pub fn new(betas: Vec<f64>, gammas: Vec<f64>, omegas: Vec<f64>) -> Result<Self> {
        if betas.len() != gammas.len() || !(omegas.is_empty() || omegas.len() == betas.len()) {
            return Err(Error::InvalidParams(format!(
                "lengths differ: {} betas, {} gammas, {} omegas",
                betas.len(),
                gammas.len(),
                omegas.len()
            )));
        }
        let in_range = |v: &[f64], hi: f64| v.iter().all(|&a| a.is_finite() && (0.0..hi).contains(&a));
        if !in_range(&betas, PI) {
            return Err(Error::InvalidParams(format!("betas outside [0, π): {betas:?}")));
        }
        if !in_range(&gammas, TAU) || !in_range(&omegas, TAU) {
            return Err(Error::InvalidParams("gammas/omegas outside [0, 2π)".into()));
        }
        Ok(Self {
            betas,
            gammas,
            omegas,
        })
    }

    pub fn p(&self) -> usize {
        self.betas.len()
    }
}

pub fn build_initial_state_prep(n: usize) -> Circuit {
    let mut c = Circuit::new(n, EmbeddingTag::StandardGateModel);
    c.gates = (0..n).map(Gate::H).collect();
    c.finish()
}

/// `exp(-iβ X)` on every qubit, i.e. `RX(2β)`.
pub fn build_driver(n: usize, beta: f64) -> Circuit {
    let mut c = Circuit::new(n, EmbeddingTag::StandardGateModel);
    c.gates = (0..n).map(|q| Gate::Rx(q, 2.0 * beta)).collect();
    c.finish()
}

/// Routed phase-separation unitary `exp(-iγ Σ coeff Z…Z)` over lattice sites.
pub fn build_gm_problem_unitary(
    h: &LogicalHamiltonian,
    gamma: f64,
    routed: &RoutedCircuit,
) -> Result<Circuit> {
    let mut c = Circuit::new(routed.lattice.num_sites(), EmbeddingTag::StandardGateModel);
    c.gates = routed.bind(&h.coefficients(), gamma)?;
    c.output_layout = routed.final_placement.clone();
    Ok(c.finish())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleMode {
    Cnot,
    Coupler,
}

/// One parity cycle `U_c(Ω) U_z(γ)` on `K` physical qubits indexed by term.
pub fn build_parity_cycle(
    report: &MappingReport,
    coeffs: &[f64],
    gamma: f64,
    omega: f64,
    mode: CycleMode,
) -> Result<Circuit> {
    if coeffs.len() != report.num_terms {
        return Err(Error::AngleBinding {
            rz: report.num_terms,
            terms: coeffs.len(),
        });
    }
    if !report.is_complete() {
        return Err(Error::UnresolvedConstraints {
            unresolved: report.unresolved,
            weights: report.residual.iter().map(|c| c.weight).collect(),
        });
    }
    let tag = match mode {
        CycleMode::Cnot => EmbeddingTag::ParityCnot,
        CycleMode::Coupler => EmbeddingTag::ParityCoupler,
    };
    let mut c = Circuit::new(report.num_terms, tag);
    for (k, &j) in coeffs.iter().enumerate() {
        c.push(Gate::Rz(k, 2.0 * gamma * j));
    }
    for con in &report.constraints {
        let theta = 2.0 * omega * con.strength;
        match mode {
            CycleMode::Coupler => c.push(Gate::Zzzz {
                qubits: con.terms.clone(),
                theta,
            }),
            CycleMode::Cnot => {
                let q = &con.terms;
                for w in q.windows(2) {
                    c.push(Gate::Cnot {
                        control: w[0],
                        target: w[1],
                    });
                }
                c.push(Gate::Rz(*q.last().unwrap(), theta));
                for w in q.windows(2).rev() {
                    c.push(Gate::Cnot {
                        control: w[0],
                        target: w[1],
                    });
                }
            }
        }
    }
    Ok(c.finish())
}

/// What `assemble_qaoa` builds on.
#[derive(Clone, Copy, Debug)]
pub enum Embedding<'a> {
    Standard {
        h: &'a LogicalHamiltonian,
        routed: &'a RoutedCircuit,
    },
    Parity {
        report: &'a MappingReport,
        coeffs: &'a [f64],
        mode: CycleMode,
    },
}

/// State preparation followed by `p` cycles of problem unitary and driver.
///
/// In the gate model, SWAPs leave the qubits permuted after each cycle, so
/// even-numbered cycles replay the routed gate list backwards (its
/// transpose), which applies the same phases and restores the initial
/// placement. `output_layout` gives the site of each logical spin at the end.
pub fn assemble_qaoa(embedding: Embedding<'_>, params: &QaoaParams) -> Result<Circuit> {
    let p = params.p();
    if params.gammas.len() != p {
        return Err(Error::InvalidParams("betas and gammas differ in length".into()));
    }
    match embedding {
        Embedding::Standard { h, routed } => {
            let sites = routed.lattice.num_sites();
            let mut c = Circuit::new(sites, EmbeddingTag::StandardGateModel);
            let mut layout = routed.initial_placement.clone();
            c.gates.extend(layout.iter().map(|&s| Gate::H(s)));
            for cycle in 0..p {
                let mut gates = routed.bind(&h.coefficients(), params.gammas[cycle])?;
                if cycle % 2 == 1 {
                    gates.reverse();
                    layout = routed.initial_placement.clone();
                } else {
                    layout = routed.final_placement.clone();
                }
                c.gates.extend(gates);
                let beta = params.betas[cycle];
                c.gates.extend(layout.iter().map(|&s| Gate::Rx(s, 2.0 * beta)));
            }
            c.output_layout = layout;
            Ok(c.finish())
        }
        Embedding::Parity {
            report,
            coeffs,
            mode,
        } => {
            if p > 0 && params.omegas.len() != p {
                return Err(Error::InvalidParams(format!(
                    "parity embedding needs {p} omegas, got {}",
                    params.omegas.len()
                )));
            }
            let k = report.num_terms;
            let mut c = build_initial_state_prep(k);
            for cycle in 0..p {
                let u = build_parity_cycle(
                    report,
                    coeffs,
                    params.gammas[cycle],
                    params.omegas[cycle],
                    mode,
                )?;
                c.extend(&u);
                c.extend(&build_driver(k, params.betas[cycle]));
            }
            c.embedding = match mode {
                CycleMode::Cnot => EmbeddingTag::ParityCnot,
                CycleMode::Coupler => EmbeddingTag::ParityCoupler,
            };
            Ok(c.finish())
        }
    }
}
