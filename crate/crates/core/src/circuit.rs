//! Gate alphabet and circuit container shared by the router, the QAOA
//! builders and the simulator.
//!
//! Rotation conventions: `RZ(θ) = exp(-iθZ/2)`, `RX(θ) = exp(-iθX/2)` and
//! `ZZZZ(θ) = exp(-iθ Z⊗…⊗Z / 2)` over the listed qubits.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "GateRecord", try_from = "GateRecord")]
pub enum Gate {
    H(usize),
    Rx(usize, f64),
    Rz(usize, f64),
    Cnot { control: usize, target: usize },
    Swap(usize, usize),
    /// CNOT between next-nearest neighbours through `middle`, 4 CNOTs.
    Bridge {
        control: usize,
        middle: usize,
        target: usize,
    },
    /// Native multi-body Z coupler on a 3- or 4-qubit constraint.
    Zzzz { qubits: Vec<usize>, theta: f64 },
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::H(q) | Gate::Rx(q, _) | Gate::Rz(q, _) => vec![*q],
            Gate::Cnot { control, target } => vec![*control, *target],
            Gate::Swap(a, b) => vec![*a, *b],
            Gate::Bridge {
                control,
                middle,
                target,
            } => vec![*control, *middle, *target],
            Gate::Zzzz { qubits, .. } => qubits.clone(),
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match self {
            Gate::Rx(_, a) | Gate::Rz(_, a) => Some(*a),
            Gate::Zzzz { theta, .. } => Some(*theta),
            _ => None,
        }
    }

    /// CNOT-equivalent cost: 1 per CNOT, 3 per SWAP, 4 per BRIDGE.
    pub fn cnot_cost(&self) -> usize {
        match self {
            Gate::Cnot { .. } => 1,
            Gate::Swap(..) => 3,
            Gate::Bridge { .. } => 4,
            _ => 0,
        }
    }

    /// The CNOT sequence this gate stands for, if it is CNOT-based.
    pub fn cnot_expansion(&self) -> Option<Vec<(usize, usize)>> {
        match *self {
            Gate::Cnot { control, target } => Some(vec![(control, target)]),
            Gate::Swap(a, b) => Some(vec![(a, b), (b, a), (a, b)]),
            Gate::Bridge {
                control,
                middle,
                target,
            } => Some(vec![
                (control, middle),
                (middle, target),
                (control, middle),
                (middle, target),
            ]),
            _ => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GateRecord {
    gate: String,
    q: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    angle: Option<f64>,
}

impl From<Gate> for GateRecord {
    fn from(g: Gate) -> Self {
        let name = match g {
            Gate::H(_) => "H",
            Gate::Rx(..) => "RX",
            Gate::Rz(..) => "RZ",
            Gate::Cnot { .. } => "CNOT",
            Gate::Swap(..) => "SWAP",
            Gate::Bridge { .. } => "BRIDGE",
            Gate::Zzzz { .. } => "ZZZZ",
        };
        GateRecord {
            gate: name.to_string(),
            q: g.qubits(),
            angle: g.angle(),
        }
    }
}

impl TryFrom<GateRecord> for Gate {
    type Error = String;

    fn try_from(r: GateRecord) -> Result<Self, String> {
        let arity = |n: usize| {
            if r.q.len() == n {
                Ok(())
            } else {
                Err(format!("{} expects {n} qubits, got {}", r.gate, r.q.len()))
            }
        };
        let angle = || r.angle.ok_or_else(|| format!("{} needs an angle", r.gate));
        match r.gate.as_str() {
            "H" => arity(1).map(|_| Gate::H(r.q[0])),
            "RX" => arity(1).and_then(|_| Ok(Gate::Rx(r.q[0], angle()?))),
            "RZ" => arity(1).and_then(|_| Ok(Gate::Rz(r.q[0], angle()?))),
            "CNOT" => arity(2).map(|_| Gate::Cnot {
                control: r.q[0],
                target: r.q[1],
            }),
            "SWAP" => arity(2).map(|_| Gate::Swap(r.q[0], r.q[1])),
            "BRIDGE" => arity(3).map(|_| Gate::Bridge {
                control: r.q[0],
                middle: r.q[1],
                target: r.q[2],
            }),
            "ZZZZ" => Ok(Gate::Zzzz {
                qubits: r.q.clone(),
                theta: angle()?,
            }),
            other => Err(format!("unknown gate `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateSummary {
    pub n_cnot: usize,
    pub n_swap: usize,
    pub n_bridge: usize,
    pub n_zzzz: usize,
    pub n_rz: usize,
    pub n_rx: usize,
    pub n_h: usize,
    pub cnot_equivalent: usize,
}

impl GateSummary {
    pub fn of(gates: &[Gate]) -> Self {
        let mut s = GateSummary::default();
        for g in gates {
            match g {
                Gate::H(_) => s.n_h += 1,
                Gate::Rx(..) => s.n_rx += 1,
                Gate::Rz(..) => s.n_rz += 1,
                Gate::Cnot { .. } => s.n_cnot += 1,
                Gate::Swap(..) => s.n_swap += 1,
                Gate::Bridge { .. } => s.n_bridge += 1,
                Gate::Zzzz { .. } => s.n_zzzz += 1,
            }
            s.cnot_equivalent += g.cnot_cost();
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingTag {
    StandardGateModel,
    ParityCnot,
    ParityCoupler,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub num_qubits: usize,
    pub embedding: EmbeddingTag,
    pub gates: Vec<Gate>,
    /// Where each problem variable sits when the circuit ends
    /// (logical spin for the gate model, physical qubit for parity).
    pub output_layout: Vec<usize>,
    #[serde(default)]
    pub summary: GateSummary,
}

impl Circuit {
    pub fn new(num_qubits: usize, embedding: EmbeddingTag) -> Self {
        Self {
            num_qubits,
            embedding,
            gates: Vec::new(),
            output_layout: (0..num_qubits).collect(),
            summary: GateSummary::default(),
        }
    }

    pub fn push(&mut self, g: Gate) {
        self.gates.push(g);
    }

    pub fn extend(&mut self, other: &Circuit) {
        self.gates.extend(other.gates.iter().cloned());
    }

    /// Recounts the gate list into `summary`.
    pub fn finish(mut self) -> Self {
        self.summary = GateSummary::of(&self.gates);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_json_shapes() {
        let cnot = serde_json::to_value(Gate::Cnot {
            control: 1,
            target: 2,
        })
        .unwrap();
        assert_eq!(cnot, serde_json::json!({"gate": "CNOT", "q": [1, 2]}));
        let rz = serde_json::to_value(Gate::Rz(3, 0.5)).unwrap();
        assert_eq!(rz, serde_json::json!({"gate": "RZ", "q": [3], "angle": 0.5}));
        let back: Gate = serde_json::from_value(rz).unwrap();
        assert_eq!(back, Gate::Rz(3, 0.5));
        let bad: Result<Gate, _> = serde_json::from_value(serde_json::json!({"gate": "CNOT", "q": [1]}));
        assert!(bad.is_err());
        let unknown: Result<Gate, _> = serde_json::from_value(serde_json::json!({"gate": "T", "q": [1]}));
        assert!(unknown.is_err());
    }

    #[test]
    fn summary_counts() {
        let gates = vec![
            Gate::H(0),
            Gate::Cnot {
                control: 0,
                target: 1,
            },
            Gate::Swap(1, 2),
            Gate::Bridge {
                control: 0,
                middle: 1,
                target: 2,
            },
            Gate::Zzzz {
                qubits: vec![0, 1, 2, 3],
                theta: 0.1,
            },
        ];
        let s = GateSummary::of(&gates);
        assert_eq!(s.n_cnot, 1);
        assert_eq!(s.n_swap, 1);
        assert_eq!(s.n_bridge, 1);
        assert_eq!(s.n_zzzz, 1);
        assert_eq!(s.cnot_equivalent, 1 + 3 + 4);
        let expanded: usize = gates
            .iter()
            .filter_map(Gate::cnot_expansion)
            .map(|v| v.len())
            .sum();
        assert_eq!(expanded, s.cnot_equivalent);
    }
}
