//! The parity transformation: one physical qubit per Hamiltonian term, with
//! the consistency constraints given by the left kernel of the term/spin
//! incidence matrix over GF(2).
//!
//! A constraint is a set of physical qubits whose σz product is +1 on every
//! state that comes from a logical configuration. Each logical spin appears
//! an even number of times across the constraint's terms, so the product of
//! the induced physical values is always +1; coefficient signs only change
//! the local fields `J_k`.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{rank_and_left_kernel, BitVec, EchelonBasis};
use crate::hamiltonian::LogicalHamiltonian;

/// Row `k` has bit `i` set iff spin `i` appears in term `k`.
#[derive(Clone, Debug)]
pub struct ParityMatrix {
    num_spins: usize,
    rows: Vec<BitVec>,
}

impl ParityMatrix {
    pub fn num_spins(&self) -> usize {
        self.num_spins
    }

    pub fn num_terms(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[BitVec] {
        &self.rows
    }

    /// True when the selected rows sum to zero.
    pub fn is_null_combination(&self, terms: &[usize]) -> bool {
        let mut acc = BitVec::zeros(self.num_spins);
        for &t in terms {
            acc.xor_assign(&self.rows[t]);
        }
        acc.is_zero()
    }
}

pub fn build_parity_matrix(h: &LogicalHamiltonian) -> ParityMatrix {
    let n = h.num_spins();
    ParityMatrix {
        num_spins: n,
        rows: h
            .terms()
            .iter()
            .map(|t| BitVec::from_indices(n, t.spins.iter().copied()))
            .collect(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ConstraintCount {
    pub rank: usize,
    pub n_constraints: usize,
}

/// GF(2) rank of the parity matrix and `N_C = K - rank`.
pub fn count_constraints(m: &ParityMatrix) -> ConstraintCount {
    let rank = crate::gf2::rank(&m.rows, m.num_spins);
    ConstraintCount {
        rank,
        n_constraints: m.num_terms() - rank,
    }
}

/// A parity constraint over physical qubits (term indices, ascending).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub terms: Vec<usize>,
    pub weight: usize,
    #[serde(skip, default = "plus_one")]
    pub sign: i8,
    #[serde(skip, default = "unit_strength")]
    pub strength: f64,
}

fn plus_one() -> i8 {
    1
}

fn unit_strength() -> f64 {
    1.0
}

impl Constraint {
    fn from_terms(mut terms: Vec<usize>) -> Self {
        terms.sort_unstable();
        Self {
            weight: terms.len(),
            terms,
            sign: 1,
            strength: 1.0,
        }
    }

    fn from_vector(v: &BitVec) -> Self {
        Self::from_terms(v.ones().collect())
    }

    /// CNOT cost of a ladder implementation: `2 (w - 1)`.
    pub fn cnot_cost(&self) -> usize {
        2 * self.weight.saturating_sub(1)
    }
}

/// Knobs for the constraint-basis search.
#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub max_weight: usize,
    /// Upper bound on exhaustively examined combinations before falling back
    /// to randomized weight reduction.
    pub enumeration_budget: usize,
    pub random_trials: usize,
    /// Randomized phase stops after this many consecutive unproductive trials.
    pub stall_limit: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            max_weight: 4,
            enumeration_budget: 10_000_000,
            random_trials: 100_000,
            stall_limit: 2_000,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct ConstraintBasis {
    /// Independent constraints of weight at most `max_weight`.
    pub constraints: Vec<Constraint>,
    /// Heavier kernel vectors completing the basis; their weights are the
    /// smallest the search found.
    pub residual: Vec<Constraint>,
}

/// Greedy search for a kernel basis of low-weight constraints.
///
/// Weight-2, then weight-3, then weight-4 combinations are enumerated in
/// lexicographic order and kept when independent of those already chosen.
/// If the enumeration budget runs out or some dimensions have no
/// representative of weight at most 4, random kernel combinations are
/// weight-reduced by pairwise XOR. Whatever remains is reported in
/// `residual`.
pub fn find_constraint_basis<R: Rng + ?Sized>(
    m: &ParityMatrix,
    opts: &SearchOptions,
    rng: &mut R,
) -> ConstraintBasis {
    let k = m.num_terms();
    let target = count_constraints(m).n_constraints;
    let mut out = ConstraintBasis::default();
    if target == 0 {
        return out;
    }
    let mut span = EchelonBasis::new(k);
    let mut budget = opts.enumeration_budget;
    let rows = &m.rows;

    let try_add = |terms: &[usize], span: &mut EchelonBasis, out: &mut ConstraintBasis| {
        let v = BitVec::from_indices(k, terms.iter().copied());
        if span.insert(&v) {
            out.constraints.push(Constraint::from_terms(terms.to_vec()));
        }
        span.rank() == target
    };

    let mut by_row: HashMap<u64, Vec<usize>> = HashMap::new();
    for (i, r) in rows.iter().enumerate() {
        by_row.entry(r.digest()).or_default().push(i);
    }

    'enumerate: {
        if opts.max_weight >= 2 {
            for a in 0..k {
                for &b in &by_row[&rows[a].digest()] {
                    if b > a && rows[b] == rows[a] && try_add(&[a, b], &mut span, &mut out) {
                        break 'enumerate;
                    }
                }
            }
        }
        if opts.max_weight >= 3 {
            for a in 0..k {
                for b in (a + 1)..k {
                    if budget == 0 {
                        break 'enumerate;
                    }
                    budget -= 1;
                    let v = rows[a].xor(&rows[b]);
                    let Some(bucket) = by_row.get(&v.digest()) else {
                        continue;
                    };
                    for &c in bucket {
                        if c > b && rows[c] == v && try_add(&[a, b, c], &mut span, &mut out) {
                            break 'enumerate;
                        }
                    }
                }
            }
        }
        if opts.max_weight >= 4 && k >= 4 {
            let pair_count = k * (k - 1) / 2;
            if pair_count > budget {
                break 'enumerate;
            }
            budget -= pair_count;
            let mut by_pair: HashMap<u64, Vec<(u32, u32)>> = HashMap::new();
            for c in 0..k {
                for d in (c + 1)..k {
                    by_pair
                        .entry(rows[c].xor(&rows[d]).digest())
                        .or_default()
                        .push((c as u32, d as u32));
                }
            }
            for a in 0..k {
                for b in (a + 1)..k {
                    if budget == 0 {
                        break 'enumerate;
                    }
                    budget -= 1;
                    let v = rows[a].xor(&rows[b]);
                    let Some(bucket) = by_pair.get(&v.digest()) else {
                        continue;
                    };
                    for &(c, d) in bucket {
                        let (c, d) = (c as usize, d as usize);
                        if c > b
                            && rows[c].xor(&rows[d]) == v
                            && try_add(&[a, b, c, d], &mut span, &mut out)
                        {
                            break 'enumerate;
                        }
                    }
                }
            }
        }
    }

    if span.rank() == target {
        return out;
    }

    // Randomized weight reduction over the full kernel.
    let (_, kernel) = rank_and_left_kernel(rows, m.num_spins);
    let mut pool: Vec<BitVec> = kernel.clone();
    pool.extend(
        out.constraints
            .iter()
            .map(|c| BitVec::from_indices(k, c.terms.iter().copied())),
    );
    let mut stall = 0;
    for _ in 0..opts.random_trials {
        if span.rank() == target || stall >= opts.stall_limit {
            break;
        }
        let mut x = BitVec::zeros(k);
        while x.is_zero() {
            for z in &kernel {
                if rng.random_bool(0.5) {
                    x.xor_assign(z);
                }
            }
        }
        reduce_weight(&mut x, &pool);
        if x.count_ones() <= opts.max_weight && span.insert(&x) {
            out.constraints.push(Constraint::from_vector(&x));
            pool.push(x);
            stall = 0;
        } else {
            stall += 1;
        }
    }

    for z in &kernel {
        if span.rank() == target {
            break;
        }
        let mut x = z.clone();
        reduce_weight(&mut x, &pool);
        let pick = if span.insert(&x) {
            x
        } else if span.insert(z) {
            z.clone()
        } else {
            continue;
        };
        if pick.count_ones() <= opts.max_weight {
            out.constraints.push(Constraint::from_vector(&pick));
        } else {
            out.residual.push(Constraint::from_vector(&pick));
        }
    }
    out
}

/// Greedily XORs in pool vectors while that lowers the weight.
fn reduce_weight(x: &mut BitVec, pool: &[BitVec]) {
    loop {
        let mut improved = false;
        for y in pool {
            let w = x.xor_weight(y);
            if w > 0 && w < x.count_ones() {
                x.xor_assign(y);
                improved = true;
            }
        }
        if !improved {
            return;
        }
    }
}

/// Summary of a parity mapping, serialized as the mapping-report JSON.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MappingReport {
    #[serde(rename = "N")]
    pub num_spins: usize,
    #[serde(rename = "K")]
    pub num_terms: usize,
    pub rank: usize,
    pub n_constraints: usize,
    /// Duplicate-term merges performed during canonicalization.
    #[serde(rename = "D")]
    pub merges: usize,
    pub constraints: Vec<Constraint>,
    pub unresolved: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub residual: Vec<Constraint>,
}

impl MappingReport {
    /// Counts constraints without searching for a basis; every dimension is
    /// then reported as unresolved.
    pub fn counts_only(h: &LogicalHamiltonian) -> Self {
        let m = build_parity_matrix(h);
        let count = count_constraints(&m);
        Self {
            num_spins: h.num_spins(),
            num_terms: h.len(),
            rank: count.rank,
            n_constraints: count.n_constraints,
            merges: h.merges(),
            constraints: Vec::new(),
            unresolved: count.n_constraints,
            residual: Vec::new(),
        }
    }

    pub fn with_basis<R: Rng + ?Sized>(
        h: &LogicalHamiltonian,
        opts: &SearchOptions,
        rng: &mut R,
    ) -> Self {
        let m = build_parity_matrix(h);
        let count = count_constraints(&m);
        let basis = find_constraint_basis(&m, opts, rng);
        Self {
            num_spins: h.num_spins(),
            num_terms: h.len(),
            rank: count.rank,
            n_constraints: count.n_constraints,
            merges: h.merges(),
            unresolved: count.n_constraints - basis.constraints.len(),
            constraints: basis.constraints,
            residual: basis.residual,
        }
    }

    pub fn is_complete(&self) -> bool {
        self.unresolved == 0 && self.constraints.len() == self.n_constraints
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParityMode {
    /// Every constraint assumed 4-body: 6 CNOTs each.
    WorstCase,
    /// Ladder cost of the constraint basis actually found.
    Basis,
    /// One native multi-qubit coupler per constraint.
    Coupler,
}

impl std::str::FromStr for ParityMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "worst" | "worst_case" => Ok(Self::WorstCase),
            "basis" => Ok(Self::Basis),
            "coupler" => Ok(Self::Coupler),
            other => Err(format!("unknown parity mode `{other}`")),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateCount {
    pub cnot: usize,
    pub rz: usize,
    pub coupler: usize,
}

/// Gates for one parity QAOA cycle's problem part (`U_z` and `U_c`).
pub fn parity_gate_count(report: &MappingReport, mode: ParityMode) -> Result<GateCount> {
    let rz = report.num_terms;
    match mode {
        ParityMode::WorstCase => Ok(GateCount {
            cnot: 6 * report.n_constraints,
            rz,
            coupler: 0,
        }),
        ParityMode::Coupler => Ok(GateCount {
            cnot: 0,
            rz,
            coupler: report.n_constraints,
        }),
        ParityMode::Basis => {
            if !report.is_complete() {
                return Err(Error::UnresolvedConstraints {
                    unresolved: report.unresolved,
                    weights: report.residual.iter().map(|c| c.weight).collect(),
                });
            }
            Ok(GateCount {
                cnot: report.constraints.iter().map(Constraint::cnot_cost).sum(),
                rz: rz + report.n_constraints,
                coupler: 0,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ham(n: usize, terms: &[&[usize]]) -> LogicalHamiltonian {
        LogicalHamiltonian::new(n, 0.0, terms.iter().map(|t| (t.to_vec(), 1.0))).unwrap()
    }

    fn complete_graph(n: usize) -> LogicalHamiltonian {
        let terms: Vec<Vec<usize>> = (0..n)
            .flat_map(|a| ((a + 1)..n).map(move |b| vec![a, b]))
            .collect();
        LogicalHamiltonian::new(n, 0.0, terms.into_iter().map(|t| (t, 1.0))).unwrap()
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn matrix_rows() {
        let m = build_parity_matrix(&ham(3, &[&[0, 1]]));
        assert_eq!(m.rows()[0].ones().collect::<Vec<_>>(), vec![0, 1]);
        let tri = build_parity_matrix(&ham(3, &[&[0, 1], &[1, 2], &[0, 2]]));
        let rows: Vec<Vec<usize>> = tri.rows().iter().map(|r| r.ones().collect()).collect();
        // canonical term order is lexicographic: [0,1], [0,2], [1,2]
        assert_eq!(rows, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
        let k4 = build_parity_matrix(&complete_graph(4));
        assert_eq!(k4.num_terms(), 6);
        assert!(k4.rows().iter().all(|r| r.count_ones() == 2));
    }

    #[test]
    fn constraint_counts() {
        let tri = build_parity_matrix(&ham(3, &[&[0, 1], &[1, 2], &[0, 2]]));
        assert_eq!(
            count_constraints(&tri),
            ConstraintCount {
                rank: 2,
                n_constraints: 1
            }
        );
        let k4 = build_parity_matrix(&complete_graph(4));
        assert_eq!(count_constraints(&k4).rank, 3);
        assert_eq!(count_constraints(&k4).n_constraints, 3);
        let single = build_parity_matrix(&ham(2, &[&[0, 1]]));
        assert_eq!(count_constraints(&single).n_constraints, 0);
    }

    #[test]
    fn lhz_constraint_count_matches_construction() {
        for n in 3..9 {
            let m = build_parity_matrix(&complete_graph(n));
            assert_eq!(count_constraints(&m).n_constraints, (n - 1) * (n - 2) / 2);
        }
    }

    #[test]
    fn triangle_basis() {
        let m = build_parity_matrix(&ham(3, &[&[0, 1], &[1, 2], &[0, 2]]));
        let b = find_constraint_basis(&m, &SearchOptions::default(), &mut rng());
        assert_eq!(b.constraints.len(), 1);
        assert_eq!(b.constraints[0].terms, vec![0, 1, 2]);
        assert_eq!(b.constraints[0].weight, 3);
        assert!(b.residual.is_empty());
    }

    #[test]
    fn complete_graph_basis_matches_enumeration() {
        let m = build_parity_matrix(&complete_graph(4));
        let b = find_constraint_basis(&m, &SearchOptions::default(), &mut rng());
        assert_eq!(b.constraints.len(), 3);
        assert!(b.residual.is_empty());
        // independent oracle: every 3- and 4-subset of the 6 rows, checked by summation
        let mut null_subsets = Vec::new();
        for mask in 0u32..64 {
            let w = mask.count_ones();
            if (w == 3 || w == 4) && m.is_null_combination(&bits_of(mask)) {
                null_subsets.push(bits_of(mask));
            }
        }
        let mut span = EchelonBasis::new(6);
        let oracle_rank = null_subsets
            .iter()
            .filter(|s| span.insert(&BitVec::from_indices(6, s.iter().copied())))
            .count();
        assert_eq!(oracle_rank, 3);
        for c in &b.constraints {
            assert!(c.weight == 3 || c.weight == 4);
            assert!(null_subsets.contains(&c.terms));
        }
    }

    fn bits_of(mask: u32) -> Vec<usize> {
        (0..32).filter(|i| mask >> i & 1 == 1).collect()
    }

    #[test]
    fn star_has_no_constraints() {
        let m = build_parity_matrix(&ham(4, &[&[0, 1], &[0, 2], &[0, 3]]));
        assert_eq!(count_constraints(&m).rank, 3);
        let b = find_constraint_basis(&m, &SearchOptions::default(), &mut rng());
        assert!(b.constraints.is_empty());
    }

    #[test]
    fn weight_limited_search_reports_residual() {
        // the only kernel vector has weight 6: a hexagon of 2-body terms
        let h = ham(6, &[&[0, 1], &[1, 2], &[2, 3], &[3, 4], &[4, 5], &[0, 5]]);
        let report = MappingReport::with_basis(&h, &SearchOptions::default(), &mut rng());
        assert_eq!(report.n_constraints, 1);
        assert_eq!(report.unresolved, 1);
        assert_eq!(report.residual[0].weight, 6);
        let err = parity_gate_count(&report, ParityMode::Basis).unwrap_err();
        assert!(matches!(err, Error::UnresolvedConstraints { unresolved: 1, .. }));

        let wide = SearchOptions {
            max_weight: 6,
            ..SearchOptions::default()
        };
        let report = MappingReport::with_basis(&h, &wide, &mut rng());
        assert!(report.is_complete());
        assert_eq!(parity_gate_count(&report, ParityMode::Basis).unwrap().cnot, 10);
    }

    #[test]
    fn randomized_fallback_finds_low_weight_basis() {
        let h = complete_graph(6);
        let opts = SearchOptions {
            enumeration_budget: 0,
            ..SearchOptions::default()
        };
        let report = MappingReport::with_basis(&h, &opts, &mut rng());
        assert_eq!(report.n_constraints, 10);
        let m = build_parity_matrix(&h);
        let mut span = EchelonBasis::new(report.num_terms);
        for c in report.constraints.iter().chain(&report.residual) {
            assert!(m.is_null_combination(&c.terms));
            assert!(span.insert(&BitVec::from_indices(report.num_terms, c.terms.iter().copied())));
        }
        assert_eq!(span.rank(), 10);
    }

    #[test]
    fn gate_counts() {
        let k4 = complete_graph(4);
        let report = MappingReport::with_basis(&k4, &SearchOptions::default(), &mut rng());
        assert_eq!(report.n_constraints, 3);
        let worst = parity_gate_count(&report, ParityMode::WorstCase).unwrap();
        assert_eq!(worst.cnot, 18);
        assert_eq!(worst.rz, 6);
        let coupler = parity_gate_count(&report, ParityMode::Coupler).unwrap();
        assert_eq!(coupler.coupler, 3);
        assert_eq!(coupler.cnot, 0);
        let basis = parity_gate_count(&report, ParityMode::Basis).unwrap();
        assert!((12..=18).contains(&basis.cnot));

        let tri = ham(3, &[&[0, 1], &[1, 2], &[0, 2]]);
        let report = MappingReport::with_basis(&tri, &SearchOptions::default(), &mut rng());
        assert_eq!(parity_gate_count(&report, ParityMode::Basis).unwrap().cnot, 4);
    }

    #[test]
    fn report_json_schema() {
        let tri = ham(3, &[&[0, 1], &[1, 2], &[0, 2]]);
        let report = MappingReport::with_basis(&tri, &SearchOptions::default(), &mut rng());
        let v: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(v["N"], 3);
        assert_eq!(v["K"], 3);
        assert_eq!(v["rank"], 2);
        assert_eq!(v["n_constraints"], 1);
        assert_eq!(v["unresolved"], 0);
        assert_eq!(v["constraints"][0]["weight"], 3);
        assert_eq!(v["constraints"][0]["terms"], serde_json::json!([0, 1, 2]));
    }

    #[test]
    fn adding_a_term_changes_n_c_by_dependence() {
        let base = ham(4, &[&[0, 1], &[1, 2], &[2, 3], &[0]]);
        let base_nc = count_constraints(&build_parity_matrix(&base)).n_constraints;
        for extra in [vec![0usize, 2], vec![1, 3], vec![0, 1, 2, 3], vec![3]] {
            let mut terms: Vec<(Vec<usize>, f64)> =
                base.terms().iter().map(|t| (t.spins.clone(), 1.0)).collect();
            terms.push((extra.clone(), 1.0));
            let h = LogicalHamiltonian::new(4, 0.0, terms).unwrap();
            let nc = count_constraints(&build_parity_matrix(&h)).n_constraints;
            // base has rank 4 = N, so every new row is dependent
            assert_eq!(nc, base_nc + 1, "extra term {extra:?}");
        }
    }
}
