//! Standard gate-model embedding on a nearest-neighbour square lattice.
//!
//! Every Hamiltonian term becomes a phase gadget: a CNOT ladder along a
//! chain of the term's qubits, an `RZ` on the chain terminal and the mirrored
//! ladder. Non-adjacent CNOTs are fixed up either by SWAP chains (3 CNOTs
//! per SWAP, the placement moves) or, at distance 2, by a BRIDGE (4 CNOTs,
//! placement unchanged). SWAPs are never undone; the final placement is
//! carried in the result.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Gate, GateSummary};
use crate::error::{Error, Result};
use crate::hamiltonian::{LogicalHamiltonian, SpinTerm};

/// Number of pending terms considered when choosing the next gadget.
pub const LOOKAHEAD: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SquareLattice {
    pub width: usize,
    pub height: usize,
}

impl SquareLattice {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height }
    }

    /// Smallest near-square lattice holding `n` qubits:
    /// `width = ceil(sqrt(n))`, `height = ceil(n / width)`.
    pub fn for_qubits(n: usize) -> Self {
        let n = n.max(1);
        let mut width = (n as f64).sqrt().ceil() as usize;
        while width * width < n {
            width += 1;
        }
        while width > 1 && (width - 1) * (width - 1) >= n {
            width -= 1;
        }
        Self {
            width,
            height: n.div_ceil(width),
        }
    }

    pub fn num_sites(&self) -> usize {
        self.width * self.height
    }

    pub fn coord(&self, site: usize) -> (usize, usize) {
        (site % self.width, site / self.width)
    }

    pub fn site(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    pub fn distance(&self, a: usize, b: usize) -> usize {
        let (ax, ay) = self.coord(a);
        let (bx, by) = self.coord(b);
        ax.abs_diff(bx) + ay.abs_diff(by)
    }

    /// Neighbours in ascending site order.
    pub fn neighbors(&self, site: usize) -> impl Iterator<Item = usize> {
        let (x, y) = self.coord(site);
        let (w, h) = (self.width, self.height);
        [
            (y > 0).then(|| site - w),
            (x > 0).then(|| site - 1),
            (x + 1 < w).then(|| site + 1),
            (y + 1 < h).then(|| site + w),
        ]
        .into_iter()
        .flatten()
    }

    pub fn center(&self) -> usize {
        self.site(self.width / 2, self.height / 2)
    }
}

impl fmt::Display for SquareLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}

impl FromStr for SquareLattice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (w, h) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected WxH, got `{s}`"))?;
        let parse = |v: &str| {
            v.trim()
                .parse::<usize>()
                .ok()
                .filter(|&n| n > 0)
                .ok_or_else(|| format!("bad lattice dimension `{v}`"))
        };
        Ok(Self::new(parse(w)?, parse(h)?))
    }
}

/// Bijection between logical qubits and lattice sites.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Placement {
    site_of: Vec<usize>,
    qubit_at: Vec<Option<usize>>,
}

impl Placement {
    pub fn new(num_sites: usize, site_of: Vec<usize>) -> Result<Self> {
        let mut qubit_at = vec![None; num_sites];
        for (q, &s) in site_of.iter().enumerate() {
            if s >= num_sites || qubit_at[s].is_some() {
                return Err(Error::Routing(format!("invalid placement {site_of:?}")));
            }
            qubit_at[s] = Some(q);
        }
        Ok(Self { site_of, qubit_at })
    }

    pub fn site_of(&self, q: usize) -> usize {
        self.site_of[q]
    }

    pub fn qubit_at(&self, site: usize) -> Option<usize> {
        self.qubit_at[site]
    }

    pub fn sites(&self) -> &[usize] {
        &self.site_of
    }

    pub fn swap_sites(&mut self, a: usize, b: usize) {
        let (qa, qb) = (self.qubit_at[a], self.qubit_at[b]);
        self.qubit_at[a] = qb;
        self.qubit_at[b] = qa;
        if let Some(q) = qa {
            self.site_of[q] = b;
        }
        if let Some(q) = qb {
            self.site_of[q] = a;
        }
    }
}

/// Pairwise interaction weights: number of terms shared by two qubits.
fn interaction_weights(h: &LogicalHamiltonian) -> Vec<Vec<usize>> {
    let n = h.num_spins();
    let mut w = vec![vec![0; n]; n];
    for t in h.terms() {
        for (i, &a) in t.spins.iter().enumerate() {
            for &b in &t.spins[i + 1..] {
                w[a][b] += 1;
                w[b][a] += 1;
            }
        }
    }
    w
}

/// Greedy placement: the most connected qubit goes to the lattice centre,
/// then the qubit most strongly tied to the placed set goes to the free site
/// minimizing its weighted Manhattan distance to its placed partners.
///
/// Seed 0 breaks ties by lowest qubit, then lowest site. Other seeds break
/// ties by a seeded permutation and randomize the starting qubit and site,
/// which is what makes repeated routing runs differ.
pub fn initial_placement(
    h: &LogicalHamiltonian,
    lattice: SquareLattice,
    seed: u64,
) -> Result<Placement> {
    let n = h.num_spins();
    let sites = lattice.num_sites();
    if sites < n {
        return Err(Error::LatticeTooSmall {
            width: lattice.width,
            height: lattice.height,
            needed: n,
        });
    }
    let w = interaction_weights(h);
    let degree: Vec<usize> = w.iter().map(|row| row.iter().sum()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut qubit_key: Vec<usize> = (0..n).collect();
    let mut site_key: Vec<usize> = (0..sites).collect();
    let mut start_site = lattice.center();
    if seed != 0 {
        qubit_key.shuffle(&mut rng);
        site_key.shuffle(&mut rng);
        let near: Vec<usize> = std::iter::once(start_site)
            .chain(lattice.neighbors(start_site))
            .collect();
        start_site = near[rng.random_range(0..near.len())];
    }

    let mut site_of = vec![usize::MAX; n];
    let mut free = vec![true; sites];
    if n == 0 {
        return Placement::new(sites, site_of);
    }
    let first = if seed == 0 {
        (0..n).max_by_key(|&q| (degree[q], std::cmp::Reverse(q))).unwrap()
    } else {
        let top = *degree.iter().max().unwrap();
        let pool: Vec<usize> = (0..n).filter(|&q| 2 * degree[q] >= top).collect();
        pool[rng.random_range(0..pool.len())]
    };
    site_of[first] = start_site;
    free[start_site] = false;
    let mut placed = vec![first];
    let mut unplaced: BTreeSet<usize> = (0..n).filter(|&q| q != first).collect();

    while !unplaced.is_empty() {
        let next = *unplaced
            .iter()
            .max_by_key(|&&q| {
                let conn: usize = placed.iter().map(|&p| w[q][p]).sum();
                (conn, degree[q], std::cmp::Reverse(qubit_key[q]))
            })
            .unwrap();
        let site = (0..sites)
            .filter(|&s| free[s])
            .min_by_key(|&s| {
                let cost: usize = placed
                    .iter()
                    .map(|&p| w[next][p] * lattice.distance(s, site_of[p]))
                    .sum();
                (cost, lattice.distance(s, start_site), site_key[s])
            })
            .unwrap();
        site_of[next] = site;
        free[site] = false;
        placed.push(next);
        unplaced.remove(&next);
    }
    Placement::new(sites, site_of)
}

/// Sum over placed term pairs of `weight * distance`.
pub fn weighted_distance(h: &LogicalHamiltonian, lattice: SquareLattice, p: &Placement) -> usize {
    let w = interaction_weights(h);
    let n = h.num_spins();
    (0..n)
        .flat_map(|a| ((a + 1)..n).map(move |b| (a, b)))
        .map(|(a, b)| w[a][b] * lattice.distance(p.site_of(a), p.site_of(b)))
        .sum()
}

/// Nearest-neighbour chain through the term's qubits, starting from the
/// closest pair (lowest indices on ties).
fn gadget_chain(spins: &[usize], lattice: SquareLattice, p: &Placement) -> Vec<usize> {
    if spins.len() < 2 {
        return spins.to_vec();
    }
    let mut best = (usize::MAX, 0, 0);
    for (i, &a) in spins.iter().enumerate() {
        for &b in &spins[i + 1..] {
            let d = lattice.distance(p.site_of(a), p.site_of(b));
            if d < best.0 {
                best = (d, a, b);
            }
        }
    }
    let mut chain = vec![best.1, best.2];
    let mut rest: Vec<usize> = spins.iter().copied().filter(|&q| q != best.1 && q != best.2).collect();
    while !rest.is_empty() {
        let end = p.site_of(*chain.last().unwrap());
        let (idx, _) = rest
            .iter()
            .enumerate()
            .min_by_key(|(_, &q)| (lattice.distance(end, p.site_of(q)), q))
            .unwrap();
        chain.push(rest.remove(idx));
    }
    chain
}

/// Phase gadget for one term on the current placement, without routing.
///
/// Returns the gate list over lattice sites; the `RZ` carries angle
/// `2 * coeff`, i.e. the gadget for `exp(-i coeff Z…Z)`.
pub fn phase_gadget(term: &SpinTerm, lattice: SquareLattice, p: &Placement) -> Vec<Gate> {
    let chain = gadget_chain(&term.spins, lattice, p);
    let sites: Vec<usize> = chain.iter().map(|&q| p.site_of(q)).collect();
    let mut gates = Vec::with_capacity(2 * sites.len() - 1);
    for w in sites.windows(2) {
        gates.push(Gate::Cnot {
            control: w[0],
            target: w[1],
        });
    }
    gates.push(Gate::Rz(*sites.last().unwrap(), 2.0 * term.coeff));
    for w in sites.windows(2).rev() {
        gates.push(Gate::Cnot {
            control: w[0],
            target: w[1],
        });
    }
    gates
}

/// Gate-model circuit for `exp(-i Σ coeff Z…Z)` (γ = 1) over lattice sites.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoutedCircuit {
    pub lattice: SquareLattice,
    pub initial_placement: Vec<usize>,
    pub final_placement: Vec<usize>,
    pub gates: Vec<Gate>,
    /// Term index bound to each `RZ`, in gate order.
    pub rz_terms: Vec<usize>,
}

impl RoutedCircuit {
    pub fn cnot_cost(&self) -> usize {
        self.gates.iter().map(Gate::cnot_cost).sum()
    }

    pub fn summary(&self) -> GateSummary {
        GateSummary::of(&self.gates)
    }

    /// Gate list with each `RZ` angle set to `2 γ coeff` of its term.
    pub fn bind(&self, coeffs: &[f64], gamma: f64) -> Result<Vec<Gate>> {
        let n_rz = self.gates.iter().filter(|g| matches!(g, Gate::Rz(..))).count();
        if n_rz != coeffs.len() || self.rz_terms.len() != n_rz {
            return Err(Error::AngleBinding {
                rz: n_rz,
                terms: coeffs.len(),
            });
        }
        let mut next = self.rz_terms.iter();
        Ok(self
            .gates
            .iter()
            .map(|g| match g {
                Gate::Rz(q, _) => {
                    let t = *next.next().unwrap();
                    Gate::Rz(*q, 2.0 * gamma * coeffs[t])
                }
                other => other.clone(),
            })
            .collect())
    }

    /// Replays the gate list checking locality of every two-site gate and
    /// that SWAPs reproduce the recorded final placement.
    pub fn validate(&self) -> Result<()> {
        let lat = self.lattice;
        let mut p = Placement::new(lat.num_sites(), self.initial_placement.clone())?;
        for g in &self.gates {
            match *g {
                Gate::Cnot { control, target } => {
                    if lat.distance(control, target) != 1 {
                        return Err(Error::Routing(format!("non-local CNOT {control}->{target}")));
                    }
                    if p.qubit_at(control).is_none() || p.qubit_at(target).is_none() {
                        return Err(Error::Routing("CNOT on an idle site".into()));
                    }
                }
                Gate::Swap(a, b) => {
                    if lat.distance(a, b) != 1 {
                        return Err(Error::Routing(format!("non-local SWAP {a}<->{b}")));
                    }
                    p.swap_sites(a, b);
                }
                Gate::Bridge {
                    control,
                    middle,
                    target,
                } => {
                    if lat.distance(control, target) != 2
                        || lat.distance(control, middle) != 1
                        || lat.distance(middle, target) != 1
                    {
                        return Err(Error::Routing(format!(
                            "bad BRIDGE {control}-{middle}-{target}"
                        )));
                    }
                }
                _ => {}
            }
        }
        if p.sites() != self.final_placement.as_slice() {
            return Err(Error::Routing("final placement does not match replay".into()));
        }
        Ok(())
    }
}

struct Router {
    lattice: SquareLattice,
    placement: Placement,
    gates: Vec<Gate>,
    rz_terms: Vec<usize>,
}

impl Router {
    /// Extra distance a term's chain would need to cover right now.
    fn estimate(&self, term: &SpinTerm) -> usize {
        let chain = gadget_chain(&term.spins, self.lattice, &self.placement);
        chain
            .windows(2)
            .map(|w| {
                self.lattice
                    .distance(self.placement.site_of(w[0]), self.placement.site_of(w[1]))
                    - 1
            })
            .sum()
    }

    fn emit_gadget(&mut self, index: usize, term: &SpinTerm) -> Result<()> {
        let p = &self.placement;
        let spins = &term.spins;
        if spins.len() == 1 {
            self.gates.push(Gate::Rz(p.site_of(spins[0]), 2.0 * term.coeff));
            self.rz_terms.push(index);
            return Ok(());
        }
        // The chain grows as we go: each new member is the unvisited qubit
        // closest to the current chain end.
        let mut chain = gadget_chain(spins, self.lattice, p);
        chain.truncate(2);
        let mut rest: Vec<usize> = spins.iter().copied().filter(|q| !chain.contains(q)).collect();
        loop {
            let i = chain.len() - 2;
            self.cnot(chain[i], chain[i + 1], &chain[..i], true)?;
            if rest.is_empty() {
                break;
            }
            let end = self.placement.site_of(chain[i + 1]);
            let (idx, _) = rest
                .iter()
                .enumerate()
                .min_by_key(|(_, &q)| (self.lattice.distance(end, self.placement.site_of(q)), q))
                .unwrap();
            chain.push(rest.remove(idx));
        }
        let terminal = self.placement.site_of(*chain.last().unwrap());
        self.gates.push(Gate::Rz(terminal, 2.0 * term.coeff));
        self.rz_terms.push(index);
        for i in (0..chain.len() - 1).rev() {
            self.cnot(chain[i], chain[i + 1], &chain[..i], false)?;
        }
        Ok(())
    }

    /// Emits CNOT(control -> target) on logical qubits, routing if needed.
    ///
    /// `protected` qubits belong to the part of the ladder still needed;
    /// `mirrored_later` says whether this same CNOT recurs in the mirrored
    /// half of the gadget.
    fn cnot(
        &mut self,
        control: usize,
        target: usize,
        protected: &[usize],
        mirrored_later: bool,
    ) -> Result<()> {
        let lat = self.lattice;
        let cs = self.placement.site_of(control);
        let ts = self.placement.site_of(target);
        let d = lat.distance(cs, ts);
        if d == 1 {
            self.gates.push(Gate::Cnot {
                control: cs,
                target: ts,
            });
            return Ok(());
        }
        let (path, displaced) = self.swap_path(ts, cs, protected)?;
        let later = usize::from(mirrored_later);
        let swap_cost = 3 * (path.len() - 1) + 1 + later + 3 * displaced;
        let bridge_cost = if d == 2 { 4 + 4 * later } else { usize::MAX };
        if bridge_cost <= swap_cost {
            let middle = lat
                .neighbors(cs)
                .find(|&m| lat.distance(m, ts) == 1)
                .expect("distance-2 sites share a neighbour");
            self.gates.push(Gate::Bridge {
                control: cs,
                middle,
                target: ts,
            });
        } else {
            for w in path.windows(2) {
                self.gates.push(Gate::Swap(w[0], w[1]));
                self.placement.swap_sites(w[0], w[1]);
            }
            let ts = self.placement.site_of(target);
            self.gates.push(Gate::Cnot {
                control: cs,
                target: ts,
            });
        }
        Ok(())
    }

    /// Shortest site path from `from` to a neighbour of `anchor`, avoiding
    /// `anchor`, minimizing the number of protected qubits displaced.
    fn swap_path(&self, from: usize, anchor: usize, protected: &[usize]) -> Result<(Vec<usize>, usize)> {
        let lat = self.lattice;
        let n = lat.num_sites();
        let is_protected = |s: usize| {
            self.placement
                .qubit_at(s)
                .is_some_and(|q| protected.contains(&q))
        };
        let mut dist = vec![usize::MAX; n];
        let mut pen = vec![usize::MAX; n];
        let mut pred = vec![usize::MAX; n];
        dist[from] = 0;
        pen[from] = 0;
        let mut frontier = BTreeSet::from([from]);
        while !frontier.is_empty() {
            let mut next = BTreeSet::new();
            for &u in &frontier {
                for v in lat.neighbors(u) {
                    if v == anchor {
                        continue;
                    }
                    let nd = dist[u] + 1;
                    let np = pen[u] + usize::from(is_protected(v));
                    if dist[v] == usize::MAX || (dist[v] == nd && np < pen[v]) {
                        dist[v] = nd;
                        pen[v] = np;
                        pred[v] = u;
                        next.insert(v);
                    }
                }
            }
            frontier = next;
        }
        let goal = lat
            .neighbors(anchor)
            .filter(|&s| dist[s] != usize::MAX)
            .min_by_key(|&s| (dist[s], pen[s], s))
            .ok_or_else(|| Error::Routing(format!("site {anchor} unreachable from {from}")))?;
        let mut path = vec![goal];
        while *path.last().unwrap() != from {
            path.push(pred[*path.last().unwrap()]);
        }
        path.reverse();
        Ok((path, pen[goal]))
    }
}

/// Routes all terms starting from an explicit placement.
///
/// Terms are taken greedily: among the next [`LOOKAHEAD`] pending terms (in
/// canonical order) the one needing the least extra distance goes first.
pub fn route_with_placement(
    h: &LogicalHamiltonian,
    lattice: SquareLattice,
    placement: Placement,
) -> Result<RoutedCircuit> {
    let initial = placement.sites().to_vec();
    let mut router = Router {
        lattice,
        placement,
        gates: Vec::new(),
        rz_terms: Vec::new(),
    };
    let terms = h.terms();
    let mut pending: Vec<usize> = (0..terms.len()).collect();
    while !pending.is_empty() {
        let window = pending.len().min(LOOKAHEAD);
        let pick = (0..window)
            .min_by_key(|&i| (router.estimate(&terms[pending[i]]), i))
            .unwrap();
        let t = pending.remove(pick);
        router.emit_gadget(t, &terms[t])?;
    }
    Ok(RoutedCircuit {
        lattice,
        initial_placement: initial,
        final_placement: router.placement.sites().to_vec(),
        gates: router.gates,
        rz_terms: router.rz_terms,
    })
}

pub fn route(h: &LogicalHamiltonian, lattice: SquareLattice, seed: u64) -> Result<RoutedCircuit> {
    let placement = initial_placement(h, lattice, seed)?;
    route_with_placement(h, lattice, placement)
}

/// CNOT-cost statistics over several routing seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GmStats {
    pub min: usize,
    pub mean: f64,
    pub std: f64,
    pub best_seed: u64,
    pub costs: Vec<usize>,
}

/// Routes with seeds `seed, seed + 1, …` and reports the spread; `min` is
/// the gate-model CNOT count used in comparisons.
pub fn gm_gate_count(
    h: &LogicalHamiltonian,
    lattice: SquareLattice,
    seed: u64,
    repeats: usize,
) -> Result<GmStats> {
    let repeats = repeats.max(1);
    let mut costs = Vec::with_capacity(repeats);
    for r in 0..repeats as u64 {
        costs.push(route(h, lattice, seed + r)?.cnot_cost());
    }
    let (best, &min) = costs
        .iter()
        .enumerate()
        .min_by_key(|(i, &c)| (c, *i))
        .unwrap();
    let mean = costs.iter().sum::<usize>() as f64 / costs.len() as f64;
    let var = costs.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / costs.len() as f64;
    Ok(GmStats {
        min,
        mean,
        std: var.sqrt(),
        best_seed: seed + best as u64,
        costs,
    })
}
