use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::stats::{aggregate, is_non_increasing, linear_fit, median3};
use super::{run_instance, BenchConfig, BenchRecord};
use crate::error::{Error, Result};
use crate::finance::{self, EncodingSpec, Truncation};
use crate::hamiltonian::LogicalHamiltonian;
use crate::kbody::{self, binomial, KBodySpec};
use crate::xia::{self, ReplicationSpec, SignMode};

pub const H2_SAMPLE: &str = include_str!("../../data/h2_like_4q.pauli");
pub const LIH_SAMPLE: &str = include_str!("../../data/lih_like_6q.pauli");

/// Finance sweep: kept term counts; `None` is the untruncated encoding.
pub const TOP_TERMS: [Option<usize>; 7] = [
    Some(100),
    Some(200),
    Some(400),
    Some(800),
    Some(1200),
    Some(1600),
    None,
];
/// Finance sweep: chop thresholds relative to the largest coefficient.
pub const CHOP_FRACTIONS: [f64; 6] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 1e-4];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scenario {
    KbodyGrid,
    KbodySlopes,
    Finance,
    Xia,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Self::KbodyGrid, Self::KbodySlopes, Self::Finance, Self::Xia];

    pub fn name(self) -> &'static str {
        match self {
            Self::KbodyGrid => "kbody_grid",
            Self::KbodySlopes => "kbody_slopes",
            Self::Finance => "finance",
            Self::Xia => "xia",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|sc| sc.name() == s || sc.name().replace('_', "-") == s)
            .ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioOutput {
    pub scenario: Scenario,
    pub records: Vec<BenchRecord>,
    pub summary: Value,
}

impl Serialize for Scenario {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

struct Job {
    label: String,
    h: LogicalHamiltonian,
    seed: u64,
}

fn run_jobs(jobs: Vec<Job>, config: &BenchConfig) -> Result<Vec<BenchRecord>> {
    jobs.into_par_iter()
        .map(|j| run_instance(&j.label, &j.h, j.seed, config))
        .collect()
}

fn config_json(config: &BenchConfig) -> Value {
    json!({
        "seed": config.seed,
        "router_repeats": config.router_repeats,
        "parity_mode": config.parity_mode,
        "lattice": config.lattice.map(|l| l.to_string()),
        "full": config.full,
    })
}

fn mean_of(records: &[&BenchRecord], f: impl Fn(&BenchRecord) -> Option<f64>) -> Value {
    let v: Vec<f64> = records.iter().filter_map(|r| f(r)).collect();
    if v.is_empty() {
        return Value::Null;
    }
    let a = aggregate(&v);
    json!({ "mean": a.mean, "sdom": a.sdom, "count": a.count })
}

/// Coupler-count ratio `N_C / n_G`, independent of the configured mode.
fn coupler_ratio(r: &BenchRecord) -> Option<f64> {
    super::gate_ratio(r.n_coupler_pm, r.n_cnot_gm)
}

fn worst_ratio(r: &BenchRecord) -> Option<f64> {
    super::gate_ratio(6 * r.n_coupler_pm, r.n_cnot_gm)
}

fn group_summary(records: &[&BenchRecord]) -> Value {
    json!({
        "n_cnot_gm": mean_of(records, |r| Some(r.n_cnot_gm as f64)),
        "n_cnot_pm": mean_of(records, |r| Some(r.n_cnot_pm as f64)),
        "n_coupler_pm": mean_of(records, |r| Some(r.n_coupler_pm as f64)),
        "r_gates": mean_of(records, |r| r.r_gates),
        "r_worst": mean_of(records, worst_ratio),
        "r_coupler": mean_of(records, coupler_ratio),
    })
}

fn mean_field(records: &[&BenchRecord], f: impl Fn(&BenchRecord) -> Option<f64>) -> Option<f64> {
    let v: Vec<f64> = records.iter().filter_map(|r| f(r)).collect();
    (!v.is_empty()).then(|| aggregate(&v).mean)
}

/// Splits `records` into four groups of (almost) equal size by ascending k̄
/// and reports the mean k̄ and gate ratio of each.
pub fn kbar_quartiles(records: &[BenchRecord]) -> Vec<(f64, Option<f64>)> {
    let mut sorted: Vec<&BenchRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.kbar.total_cmp(&b.kbar));
    let n = sorted.len();
    (0..4)
        .map(|q| {
            let group = &sorted[q * n / 4..(q + 1) * n / 4];
            (
                mean_field(group, |r| Some(r.kbar)).unwrap_or(f64::NAN),
                mean_field(group, |r| r.r_gates),
            )
        })
        .collect()
}

fn kbody_grid(config: &BenchConfig) -> Result<ScenarioOutput> {
    let specs = if config.full {
        kbody::grid(&kbody::GRID_N, 10, config.seed)
    } else {
        kbody::grid(&[9, 10], 3, config.seed)
    };
    let jobs = specs
        .par_iter()
        .map(|s| {
            Ok(Job {
                label: "kbody_grid".into(),
                h: kbody::generate(s)?,
                seed: s.seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let records = run_jobs(jobs, config)?;
    let quartiles: Vec<Value> = kbar_quartiles(&records)
        .into_iter()
        .map(|(k, r)| json!({ "kbar": k, "r_gates": r }))
        .collect();
    let all: Vec<&BenchRecord> = records.iter().collect();
    let summary = json!({
        "scenario": "kbody_grid",
        "config": config_json(config),
        "instances": records.len(),
        "overall": group_summary(&all),
        "kbar_quartiles": quartiles,
    });
    Ok(ScenarioOutput {
        scenario: Scenario::KbodyGrid,
        records,
        summary,
    })
}

/// Slope-family sweep parameters: `(N, K values, instances per K)`.
pub fn slope_plan(full: bool) -> Vec<(usize, Vec<usize>, usize)> {
    if full {
        vec![
            (5, (5..=10).collect(), 5),
            (10, (10..=70).collect(), 5),
            (15, (10..=70).collect(), 5),
            (20, (10..=70).collect(), 5),
        ]
    } else {
        [10, 15, 20]
            .into_iter()
            .map(|n| (n, (10..=70).step_by(10).collect(), 5))
            .collect()
    }
}

pub const SLOPE_ORDERS: [usize; 4] = [2, 3, 4, 5];

fn fit_json(points: &[(f64, f64)]) -> Value {
    match linear_fit(points) {
        Ok(f) => serde_json::to_value(f).unwrap_or(Value::Null),
        Err(_) => Value::Null,
    }
}

/// Mean of `f` per distinct `K`, in ascending `K`.
fn means_by_k(records: &[&BenchRecord], f: impl Fn(&BenchRecord) -> f64) -> Vec<(f64, f64)> {
    let mut ks: Vec<usize> = records.iter().map(|r| r.k).collect();
    ks.sort_unstable();
    ks.dedup();
    ks.into_iter()
        .map(|k| {
            let v: Vec<f64> = records.iter().filter(|r| r.k == k).map(|r| f(r)).collect();
            (k as f64, aggregate(&v).mean)
        })
        .collect()
}

fn kbody_slopes(config: &BenchConfig) -> Result<ScenarioOutput> {
    let mut specs: Vec<(usize, usize, KBodySpec)> = Vec::new();
    let mut base = config.seed;
    for (n, ks, per_k) in slope_plan(config.full) {
        for k in SLOPE_ORDERS {
            let cap = binomial(n, k);
            let ks: Vec<usize> = ks.iter().copied().filter(|&kk| kk as u128 <= cap).collect();
            let family = kbody::slope_family(n, k, &ks, per_k, base)?;
            base += family.len() as u64;
            specs.extend(family.into_iter().map(|s| (n, k, s)));
        }
    }
    let jobs = specs
        .par_iter()
        .map(|(n, k, s)| {
            Ok(Job {
                label: format!("kbody_slopes/N={n}/k={k}"),
                h: kbody::generate(s)?,
                seed: s.seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let records = run_jobs(jobs, config)?;

    let mut fits = Vec::new();
    for (n, _, _) in slope_plan(config.full) {
        for k in SLOPE_ORDERS {
            let label = format!("kbody_slopes/N={n}/k={k}");
            let group: Vec<&BenchRecord> = records.iter().filter(|r| r.scenario == label).collect();
            if group.is_empty() {
                continue;
            }
            let gm = means_by_k(&group, |r| r.n_cnot_gm as f64);
            let worst = means_by_k(&group, |r| 6.0 * r.n_coupler_pm as f64);
            let best = means_by_k(&group, |r| 4.0 * r.n_coupler_pm as f64);
            fits.push(json!({
                "N": n,
                "k": k,
                "gm": fit_json(&gm),
                "pm_worst": fit_json(&worst),
                "pm_best": fit_json(&best),
            }));
        }
    }
    let summary = json!({
        "scenario": "kbody_slopes",
        "config": config_json(config),
        "instances": records.len(),
        "fits": fits,
    });
    Ok(ScenarioOutput {
        scenario: Scenario::KbodySlopes,
        records,
        summary,
    })
}

/// Finance instances: `(institutions, seeds)`.
pub fn finance_plan(full: bool) -> Vec<(usize, usize)> {
    if full {
        vec![(3, 10), (4, 10)]
    } else {
        vec![(3, 3)]
    }
}

pub const FINANCE_ASSETS: usize = 7;

fn top_label(t: Option<usize>) -> String {
    t.map_or_else(|| "all".to_string(), |t| t.to_string())
}

fn finance(config: &BenchConfig) -> Result<ScenarioOutput> {
    let spec = EncodingSpec::default();
    let mut instances = Vec::new();
    for (n, seeds) in finance_plan(config.full) {
        for s in 0..seeds as u64 {
            instances.push((n, config.seed + s));
        }
    }
    let encoded = instances
        .par_iter()
        .map(|&(n, seed)| {
            let net = finance::generate_instance(n, FINANCE_ASSETS, seed)?;
            Ok((n, seed, finance::encode(&net, &spec)?))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut jobs = Vec::new();
    for (n, seed, h) in &encoded {
        for t in TOP_TERMS {
            let trunc = t.map_or(Truncation::None, Truncation::TopTerms);
            jobs.push(Job {
                label: format!("finance/n={n}/top={}", top_label(t)),
                h: finance::truncate(h, trunc),
                seed: *seed,
            });
        }
        let largest = h.terms().iter().fold(0.0f64, |a, t| a.max(t.coeff.abs()));
        for frac in CHOP_FRACTIONS {
            jobs.push(Job {
                label: format!("finance/n={n}/chop={frac:e}"),
                h: finance::truncate(h, Truncation::Chop(frac * largest)),
                seed: *seed,
            });
        }
    }
    let records = run_jobs(jobs, config)?;

    let mut per_n = Vec::new();
    for (n, _) in finance_plan(config.full) {
        let mut top_rows = Vec::new();
        let mut top_ratios = Vec::new();
        for t in TOP_TERMS {
            let label = format!("finance/n={n}/top={}", top_label(t));
            let group: Vec<&BenchRecord> = records.iter().filter(|r| r.scenario == label).collect();
            let mut row = group_summary(&group);
            row["top_terms"] = json!(t);
            row["K"] = mean_of(&group, |r| Some(r.k as f64));
            top_rows.push(row);
            top_ratios.push(mean_field(&group, |r| r.r_gates).unwrap_or(f64::NAN));
        }
        let mut chop_rows = Vec::new();
        for frac in CHOP_FRACTIONS {
            let label = format!("finance/n={n}/chop={frac:e}");
            let group: Vec<&BenchRecord> = records.iter().filter(|r| r.scenario == label).collect();
            let mut row = group_summary(&group);
            row["chop_fraction"] = json!(frac);
            row["K"] = mean_of(&group, |r| Some(r.k as f64));
            chop_rows.push(row);
        }
        let smoothed = median3(&top_ratios);
        per_n.push(json!({
            "institutions": n,
            "logical_qubits": n * spec.q,
            "top_terms": top_rows,
            "chop": chop_rows,
            "r_gates_vs_top_terms_smoothed": smoothed,
            "r_gates_non_increasing": is_non_increasing(&smoothed),
        }));
    }
    let summary = json!({
        "scenario": "finance",
        "config": config_json(config),
        "encoding": spec,
        "assets": FINANCE_ASSETS,
        "instances": records.len(),
        "sweeps": per_n,
    });
    Ok(ScenarioOutput {
        scenario: Scenario::Finance,
        records,
        summary,
    })
}

pub const XIA_REPLICAS: [usize; 4] = [2, 3, 4, 5];

fn xia_inputs() -> Result<Vec<(&'static str, xia::PauliHamiltonian)>> {
    Ok(vec![
        ("h2_like_4q", xia::parse_pauli_sum(H2_SAMPLE, None)?),
        ("lih_like_6q", xia::parse_pauli_sum(LIH_SAMPLE, None)?),
    ])
}

fn xia_scenario(config: &BenchConfig) -> Result<ScenarioOutput> {
    let mut jobs = Vec::new();
    for (name, h) in xia_inputs()? {
        for r in XIA_REPLICAS {
            let spec = ReplicationSpec {
                r,
                sign_mode: SignMode::SignQubits,
            };
            jobs.push(Job {
                label: format!("xia/{name}/r={r}"),
                h: xia::replicate(&h, spec)?,
                seed: config.seed,
            });
        }
    }
    let records = run_jobs(jobs, config)?;
    let rows: Vec<Value> = records
        .iter()
        .map(|r| {
            json!({
                "input": r.scenario,
                "N": r.n,
                "K": r.k,
                "n_cnot_gm": r.n_cnot_gm,
                "n_coupler_pm": r.n_coupler_pm,
                "r_gates": r.r_gates,
                "r_worst": worst_ratio(r),
                "r_coupler": coupler_ratio(r),
            })
        })
        .collect();
    let coupler_advantage = records.iter().all(|r| coupler_ratio(r).is_some_and(|x| x < 1.0));
    let summary = json!({
        "scenario": "xia",
        "config": config_json(config),
        "instances": records.len(),
        "rows": rows,
        "coupler_ratio_below_one": coupler_advantage,
    });
    Ok(ScenarioOutput {
        scenario: Scenario::Xia,
        records,
        summary,
    })
}

pub fn run_scenario(scenario: Scenario, config: &BenchConfig) -> Result<ScenarioOutput> {
    match scenario {
        Scenario::KbodyGrid => kbody_grid(config),
        Scenario::KbodySlopes => kbody_slopes(config),
        Scenario::Finance => finance(config),
        Scenario::Xia => xia_scenario(config),
    }
}

/// Writes `<name>.csv` and `<name>_summary.json` into `dir` and returns
/// their paths.
pub fn write_outputs(dir: &Path, output: &ScenarioOutput) -> Result<(PathBuf, PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{}.csv", output.scenario));
    let mut w = csv::Writer::from_path(&csv_path)?;
    for r in &output.records {
        w.serialize(r)?;
    }
    w.flush()?;
    let json_path = dir.join(format!("{}_summary.json", output.scenario));
    std::fs::write(&json_path, serde_json::to_string_pretty(&output.summary)?)?;
    Ok((csv_path, json_path))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_names() {
        for s in Scenario::ALL {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
        }
        assert_eq!("kbody-grid".parse::<Scenario>().unwrap(), Scenario::KbodyGrid);
        assert!(matches!("qaoa".parse::<Scenario>(), Err(Error::UnknownScenario(_))));
    }

    #[test]
    fn quartiles_split_evenly() {
        let rec = |kbar: f64, r: f64| BenchRecord {
            scenario: "t".into(),
            n: 9,
            k: 10,
            kbar,
            seed: 0,
            n_cnot_gm: 1,
            n_cnot_pm: 1,
            n_coupler_pm: 1,
            r_gates: Some(r),
            grid_w: 3,
            grid_h: 3,
        };
        let records: Vec<BenchRecord> = (0..8).map(|i| rec(i as f64, 10.0 - i as f64)).collect();
        let q = kbar_quartiles(&records);
        assert_eq!(q.len(), 4);
        assert_eq!(q[0], (0.5, Some(9.5)));
        assert_eq!(q[3], (6.5, Some(3.5)));
    }

    #[test]
    fn sample_inputs_parse() {
        let inputs = xia_inputs().unwrap();
        assert_eq!(inputs[0].1.num_qubits, 4);
        assert_eq!(inputs[1].1.num_qubits, 6);
    }

    #[test]
    fn xia_scenario_outputs() {
        let out = run_scenario(Scenario::Xia, &BenchConfig::default()).unwrap();
        assert_eq!(out.records.len(), 8);
        for (rec, r) in out.records.iter().zip(XIA_REPLICAS.iter().cycle()) {
            let n = if rec.scenario.contains("h2") { 4 } else { 6 };
            assert_eq!(rec.n, n * r + r);
            assert_eq!(rec.n_cnot_pm, 6 * rec.n_coupler_pm);
        }
        assert_eq!(out.summary["coupler_ratio_below_one"], json!(true));

        let dir = tempfile::tempdir().unwrap();
        let (csv_path, json_path) = write_outputs(dir.path(), &out).unwrap();
        let text = std::fs::read_to_string(csv_path).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "scenario,N,K,kbar,seed,n_cnot_gm,n_cnot_pm,n_coupler_pm,r_gates,grid_w,grid_h"
        );
        assert_eq!(text.lines().count(), 9);
        let summary: Value = serde_json::from_str(&std::fs::read_to_string(json_path).unwrap()).unwrap();
        assert_eq!(summary["instances"], json!(8));
    }
}
