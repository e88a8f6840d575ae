//! `parity-bench`: instance generation, compilation, routing, gate counting,
//! verification and benchmark sweeps.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use parity_core::bench::{delta_bound_check, run_instance, run_scenario, write_outputs, BenchConfig, Scenario};
use parity_core::finance::{self, EncodingSpec, HeavisideMode, Truncation};
use parity_core::hamiltonian::parse_hamiltonian;
use parity_core::kbody::{self, parse_counts, CoeffMode, KBodySpec};
use parity_core::parity::{parity_gate_count, MappingReport, ParityMode, SearchOptions};
use parity_core::qaoa::{assemble_qaoa, CycleMode, Embedding, QaoaParams};
use parity_core::router::{gm_gate_count, route, SquareLattice};
use parity_core::sim::{self, default_penalty};
use parity_core::xia::{self, ReplicationSpec, SignMode};
use parity_core::{Error, LogicalHamiltonian};

const EXIT_USAGE: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "parity-bench", version, about = "Parity-architecture QAOA compiler and gate-count benchmarks")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// Master seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output directory; single-artifact commands print to stdout without it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Lattice for the gate-model router, e.g. 4x4.
    #[arg(long, global = true)]
    grid: Option<SquareLattice>,
    #[arg(long, global = true, default_value = "worst")]
    parity_mode: ParityMode,
    /// Router runs per instance; the minimum is reported.
    #[arg(long, global = true, default_value_t = 5)]
    router_repeats: usize,
    /// Run complete sweep grids.
    #[arg(long, global = true)]
    full: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Random k-body Hamiltonian.
    GenKbody {
        #[arg(long)]
        n: usize,
        /// Order-to-count map, e.g. "1:2,2:11,3:2".
        #[arg(long, value_parser = parse_counts)]
        counts: std::collections::BTreeMap<usize, usize>,
        #[arg(long, default_value = "unit")]
        coeff: CoeffMode,
    },
    /// Financial-crash instance and its spin encoding.
    GenFinance {
        #[arg(long, default_value_t = 3)]
        institutions: usize,
        #[arg(long, default_value_t = 7)]
        assets: usize,
        #[arg(long, default_value_t = 5)]
        bits: usize,
        #[arg(long, default_value_t = 3)]
        legendre_order: usize,
        #[arg(long, default_value = "orthogonal")]
        mode: HeavisideMode,
        #[arg(long, conflicts_with = "chop_threshold")]
        top_terms: Option<usize>,
        #[arg(long)]
        chop_threshold: Option<f64>,
    },
    /// Replicated σz-only Hamiltonian from a Pauli-sum file.
    MapXia {
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        replicas: usize,
        #[arg(long, default_value = "qubits")]
        sign_mode: SignMode,
    },
    /// Parity mapping report; optionally a QAOA circuit.
    CompileParity {
        input: PathBuf,
        /// Also emit a parity QAOA circuit with these depth-1 angles.
        #[arg(long)]
        circuit: bool,
        #[arg(long, default_value_t = 0.25)]
        beta: f64,
        #[arg(long, default_value_t = 0.25)]
        gamma: f64,
        #[arg(long, default_value_t = 0.25)]
        omega: f64,
    },
    /// Routed gate-model phase-separation circuit.
    RouteGm {
        input: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        gamma: f64,
        /// Emit a depth-1 QAOA circuit instead of the bare problem unitary.
        #[arg(long)]
        qaoa: bool,
        #[arg(long, default_value_t = 0.25)]
        beta: f64,
    },
    /// Gate counts of both embeddings for one Hamiltonian.
    Count { input: PathBuf },
    /// Benchmark sweep: kbody_grid, kbody_slopes, finance, xia or all.
    Bench {
        #[arg(default_value = "all")]
        scenario: String,
    },
    /// Statevector checks of routing and parity mapping.
    Verify {
        input: PathBuf,
        #[arg(long, default_value_t = 0.7)]
        gamma: f64,
    },
}

/// Writes `text` to `<out>/<name>` when an output directory is set, else
/// prints it.
fn emit(global: &Global, name: &str, text: &str) -> anyhow::Result<()> {
    match &global.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(name);
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            println!("{}", path.display());
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn load(path: &Path) -> anyhow::Result<LogicalHamiltonian> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_hamiltonian(&text)?)
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "input".into(), |s| s.to_string_lossy().into_owned())
}

fn lattice(global: &Global, h: &LogicalHamiltonian) -> SquareLattice {
    global.grid.unwrap_or_else(|| SquareLattice::for_qubits(h.num_spins()))
}

fn config(global: &Global) -> BenchConfig {
    BenchConfig {
        seed: global.seed,
        router_repeats: global.router_repeats,
        parity_mode: global.parity_mode,
        lattice: global.grid,
        full: global.full,
        search: SearchOptions::default(),
    }
}

fn mapping_report(global: &Global, h: &LogicalHamiltonian, need_basis: bool) -> MappingReport {
    if need_basis || global.parity_mode != ParityMode::WorstCase {
        let mut rng = ChaCha8Rng::seed_from_u64(global.seed);
        MappingReport::with_basis(h, &SearchOptions::default(), &mut rng)
    } else {
        MappingReport::counts_only(h)
    }
}

/// Returns `Ok(false)` when a verification failed.
fn run(cli: Cli) -> anyhow::Result<bool> {
    let g = &cli.global;
    match cli.command {
        Command::GenKbody { n, counts, coeff } => {
            let spec = KBodySpec {
                n,
                counts,
                seed: g.seed,
                coeff,
            };
            let h = kbody::generate(&spec)?;
            emit(g, &format!("kbody_N{n}_s{}.json", g.seed), &h.to_json())?;
        }
        Command::GenFinance {
            institutions,
            assets,
            bits,
            legendre_order,
            mode,
            top_terms,
            chop_threshold,
        } => {
            let net = finance::generate_instance(institutions, assets, g.seed)?;
            let truncation = match (top_terms, chop_threshold) {
                (Some(t), _) => Truncation::TopTerms(t),
                (None, Some(c)) => Truncation::Chop(c),
                (None, None) => Truncation::None,
            };
            let spec = EncodingSpec {
                q: bits,
                r: legendre_order,
                mode,
                truncation,
                ..EncodingSpec::default()
            };
            let h = finance::encode(&net, &spec)?;
            let name = format!("finance_n{institutions}_s{}", g.seed);
            emit(g, &format!("{name}.json"), &h.to_json())?;
            let sidecar = json!({ "network": net, "encoding": spec });
            match &g.out {
                Some(_) => emit(g, &format!("{name}.instance.json"), &serde_json::to_string_pretty(&sidecar)?)?,
                None => eprintln!("{}", serde_json::to_string(&sidecar)?),
            }
        }
        Command::MapXia {
            input,
            replicas,
            sign_mode,
        } => {
            let text = fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let ph = xia::parse_pauli_sum(&text, None)?;
            let h = xia::replicate(
                &ph,
                ReplicationSpec {
                    r: replicas,
                    sign_mode,
                },
            )?;
            emit(g, &format!("{}_r{replicas}.json", stem(&input)), &h.to_json())?;
        }
        Command::CompileParity {
            input,
            circuit,
            beta,
            gamma,
            omega,
        } => {
            let h = load(&input)?;
            let report = mapping_report(g, &h, circuit);
            let counts = parity_gate_count(&report, g.parity_mode)?;
            let mut doc = json!({
                "report": serde_json::to_value(&report)?,
                "parity_mode": g.parity_mode,
                "gate_count": counts,
            });
            if circuit {
                let mode = match g.parity_mode {
                    ParityMode::Coupler => CycleMode::Coupler,
                    _ => CycleMode::Cnot,
                };
                let coeffs = h.coefficients();
                let params = QaoaParams::new(vec![beta], vec![gamma], vec![omega])?;
                let c = assemble_qaoa(
                    Embedding::Parity {
                        report: &report,
                        coeffs: &coeffs,
                        mode,
                    },
                    &params,
                )?;
                doc["circuit"] = serde_json::to_value(&c)?;
            }
            emit(g, &format!("{}_parity.json", stem(&input)), &serde_json::to_string_pretty(&doc)?)?;
        }
        Command::RouteGm {
            input,
            gamma,
            qaoa,
            beta,
        } => {
            let h = load(&input)?;
            let lat = lattice(g, &h);
            let stats = gm_gate_count(&h, lat, g.seed, g.router_repeats)?;
            let routed = route(&h, lat, stats.best_seed)?;
            routed.validate()?;
            let circuit = if qaoa {
                let params = QaoaParams::new(vec![beta], vec![gamma], vec![])?;
                assemble_qaoa(Embedding::Standard { h: &h, routed: &routed }, &params)?
            } else {
                parity_core::qaoa::build_gm_problem_unitary(&h, gamma, &routed)?
            };
            let doc = json!({
                "lattice": lat.to_string(),
                "router": stats,
                "initial_placement": routed.initial_placement,
                "circuit": circuit,
            });
            emit(g, &format!("{}_gm.json", stem(&input)), &serde_json::to_string_pretty(&doc)?)?;
        }
        Command::Count { input } => {
            let h = load(&input)?;
            let rec = run_instance("count", &h, g.seed, &config(g))?;
            let doc = json!({ "record": rec, "delta_bound": delta_bound_check(&rec) });
            emit(g, &format!("{}_count.json", stem(&input)), &serde_json::to_string_pretty(&doc)?)?;
        }
        Command::Bench { scenario } => {
            let scenarios = if scenario == "all" {
                Scenario::ALL.to_vec()
            } else {
                vec![scenario.parse::<Scenario>()?]
            };
            let dir = g.out.clone().unwrap_or_else(|| PathBuf::from("results"));
            let cfg = config(g);
            for s in scenarios {
                log::info!("running {s}");
                let out = run_scenario(s, &cfg)?;
                let (csv, summary) = write_outputs(&dir, &out)?;
                println!("{s}: {} records -> {} {}", out.records.len(), csv.display(), summary.display());
            }
        }
        Command::Verify { input, gamma } => return verify(g, &input, gamma),
    }
    Ok(true)
}

fn verify(g: &Global, input: &Path, gamma: f64) -> anyhow::Result<bool> {
    let h = load(input)?;
    let mut ok = true;

    if h.num_spins() <= sim::ROUTED_CHECK_MAX_SPINS {
        let routed = route(&h, lattice(g, &h), g.seed)?;
        let dev = sim::verify_routed_equivalence(&h, &routed, gamma)?;
        let passed = dev < 1e-9;
        ok &= passed;
        println!("{}", json!({ "check": "routed_equivalence", "passed": passed, "max_deviation": dev }));
    } else {
        println!("{}", json!({ "check": "routed_equivalence", "skipped": "too many spins" }));
    }

    if h.num_spins() <= sim::SPECTRUM_MAX_SPINS && h.len() <= sim::SPECTRUM_MAX_TERMS {
        let report = mapping_report(g, &h, true);
        if report.is_complete() {
            let check = sim::verify_parity_spectrum(&h, &report, default_penalty(&h))?;
            ok &= check.passed;
            let mut v = serde_json::to_value(&check)?;
            v["check"] = json!("parity_spectrum");
            println!("{v}");
        } else {
            ok = false;
            println!(
                "{}",
                json!({ "check": "parity_spectrum", "passed": false, "unresolved": report.unresolved })
            );
        }
    } else {
        println!("{}", json!({ "check": "parity_spectrum", "skipped": "instance too large" }));
    }

    let rec = run_instance("verify", &h, g.seed, &config(g))?;
    let orders_ok = h.terms().iter().all(|t| t.order() >= 2);
    if orders_ok {
        let passed = delta_bound_check(&rec);
        ok &= passed;
        println!("{}", json!({ "check": "delta_bound", "passed": passed, "record": rec }));
    } else {
        println!("{}", json!({ "check": "delta_bound", "skipped": "instance has 1-body terms" }));
    }
    Ok(ok)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(
            Error::Infeasible(_)
            | Error::ExpansionOverflow { .. }
            | Error::LatticeTooSmall { .. }
            | Error::TooManyQubits { .. }
            | Error::ReplicationFactor(_)
            | Error::UnresolvedConstraints { .. },
        ) => EXIT_INFEASIBLE,
        _ => EXIT_USAGE,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(EXIT_VERIFY)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
