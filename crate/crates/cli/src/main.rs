use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use aqft::adders::UncomputeStyle;
use aqft::analysis::{artifact_report, error_budget_with, CostRow, ErrorBudget};
use aqft::pipeline::{build_aqft, build_aqft_fused, AqftArtifact, AqftParams};
use aqft::sim::{effective_operator_with, spectral_distance, MeasurementPolicy, SimConfig};
use aqft::GateKind;

#[derive(Parser)]
#[command(name = "aqft", version, about = "Adder-based approximate QFT: build, verify, cost")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build an artifact and write circuit JSON plus sidecar.
    Build {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Also write OpenQASM 2 (built with coherent uncomputation).
        #[arg(long)]
        qasm: bool,
    },
    /// Simulate the artifact and check it against the error bounds.
    Verify {
        #[command(flatten)]
        target: Target,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Force every measurement outcome to this value instead of sampling.
        #[arg(long, value_parser = clap::value_parser!(u8).range(0..=1))]
        force_outcomes: Option<u8>,
        /// Largest data width for matrix extraction.
        #[arg(long, env = "AQFT_MATRIX_CAP", default_value_t = 12)]
        matrix_cap: usize,
    },
    /// One CSV row of census, closed form, baseline and bounds.
    Cost {
        #[command(flatten)]
        target: Target,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV rows for a range of n at fixed ε.
    Sweep {
        #[arg(long)]
        n_min: usize,
        #[arg(long)]
        n_max: usize,
        #[arg(long, default_value_t = 1)]
        step: usize,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        figure_compat: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert a circuit JSON file to OpenQASM 2 or normalized JSON.
    Export {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "qasm")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Copy, Clone, clap::ValueEnum)]
enum Format {
    Qasm,
    Json,
}

#[derive(Args, Clone)]
struct Target {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    epsilon: f64,
    /// Admit b = 3 for reproducing the small worked example.
    #[arg(long)]
    figure_compat: bool,
    /// Keep every rotation; the result is the exact QFT.
    #[arg(long)]
    no_prune: bool,
    #[arg(long)]
    no_swaps: bool,
    #[arg(long)]
    snapshots: bool,
    /// Uncompute ANDs with a CCZ instead of measurement.
    #[arg(long)]
    coherent: bool,
}

impl Target {
    fn params(&self) -> Result<AqftParams> {
        let mut p = if self.figure_compat {
            AqftParams::figure_compat(self.n, self.epsilon)?
        } else {
            AqftParams::new(self.n, self.epsilon)?
        };
        if self.no_prune {
            p = p.unpruned();
        }
        if self.no_swaps {
            p = p.without_final_swaps();
        }
        if self.snapshots {
            p = p.with_snapshots();
        }
        if self.coherent {
            p = p.with_style(UncomputeStyle::CoherentReference);
        }
        Ok(p)
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn cmd_build(target: &Target, out: &Path, qasm: bool) -> Result<()> {
    let params = target.params()?;
    let art = build_aqft(&params)?;
    fs::create_dir_all(out)?;
    let stem = format!("aqft_n{}_b{}", params.n, params.b);
    let circuit_path = out.join(format!("{stem}.json"));
    fs::write(&circuit_path, aqft::json::to_json(&art.circuit))?;
    let sidecar_path = out.join(format!("{stem}.sidecar.json"));
    fs::write(&sidecar_path, serde_json::to_string_pretty(&art.sidecar())?)?;
    println!("wrote {}", circuit_path.display());
    println!("wrote {}", sidecar_path.display());
    for s in &art.snapshots {
        let p = out.join(format!("{stem}.{}.json", s.stage));
        fs::write(&p, aqft::json::to_json(&s.circuit))?;
        println!("wrote {}", p.display());
    }
    if qasm {
        let coherent = build_aqft(&params.with_style(UncomputeStyle::CoherentReference))?;
        let p = out.join(format!("{stem}.qasm"));
        fs::write(&p, aqft::qasm::to_qasm(&coherent.circuit)?)?;
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn check(label: &str, ok: bool, all: &mut bool) {
    println!("{label}: {}", if ok { "PASS" } else { "FAIL" });
    *all &= ok;
}

fn cmd_verify(target: &Target, seed: u64, force: Option<u8>, matrix_cap: usize) -> Result<bool> {
    let params = target.params()?;
    if params.n > matrix_cap {
        bail!(
            "n = {} exceeds the matrix width cap of {matrix_cap}; use a smaller n or raise AQFT_MATRIX_CAP",
            params.n
        );
    }
    if !params.include_final_swaps {
        bail!("verify compares against the DFT matrix and needs the output SWAPs");
    }
    let art = build_aqft(&params)?;
    let cfg = SimConfig {
        matrix_cap,
        ..SimConfig::default()
    };
    let measurements = art.circuit.count_kind(GateKind::is_measurement);
    let policy = match force {
        Some(o) => MeasurementPolicy::forced_all(o, measurements),
        None => MeasurementPolicy::SeededRandom(seed),
    };
    let budget: ErrorBudget = error_budget_with(&art, true, &policy, &cfg)?;
    let exact = budget.exact_error.expect("simulation was requested");
    println!("n = {}, epsilon = {}, b = {}", params.n, params.epsilon, params.b);
    println!("qubits = {}, gates = {}, measurements = {measurements}", art.circuit.num_qubits, art.circuit.gates.len());
    println!("exact error      = {exact:.6e}");
    println!("ledger bound     = {:.6e} ({} removed rotations)", budget.ledger_bound, art.ledger.len());
    println!("pruning bound    = {:.6e}", budget.pruning_bound);
    println!("synthesis bound  = {:.6e}", budget.synthesis_bound);
    println!("total bound      = {:.6e}", budget.total_bound);

    let mut all = true;
    let eff = effective_operator_with(&art.circuit, "data", &art.ancilla_specs(), &policy, &cfg)?;
    println!("ancilla restoration min fidelity = {:.12}", eff.min_fidelity());
    check("ancillas restored", eff.min_fidelity() >= 1.0 - 1e-10, &mut all);
    let zero = effective_operator_with(
        &art.circuit,
        "data",
        &art.ancilla_specs(),
        &MeasurementPolicy::forced_all(0, measurements),
        &cfg,
    )?;
    let one = effective_operator_with(
        &art.circuit,
        "data",
        &art.ancilla_specs(),
        &MeasurementPolicy::forced_all(1, measurements),
        &cfg,
    )?;
    let spread = spectral_distance(&zero.matrix, &one.matrix, false)?;
    check(&format!("outcome independence ({spread:.1e})"), spread <= 1e-9, &mut all);
    if params.prune {
        check(
            "exact ≤ ledger ≤ π(n−b+3)/2^b",
            exact <= budget.ledger_bound + 1e-9 && budget.ledger_bound <= budget.pruning_bound,
            &mut all,
        );
        if params.b >= 4 {
            check(
                "total ≤ ε(π+1)",
                budget.total_bound <= params.epsilon * (std::f64::consts::PI + 1.0),
                &mut all,
            );
        }
    } else {
        check("unpruned exact error ≤ 1e-8", exact <= 1e-8, &mut all);
    }
    Ok(all)
}

fn cost_row(params: &AqftParams) -> Result<CostRow> {
    let art: AqftArtifact = build_aqft_fused(params)?;
    let report = artifact_report(&art);
    let budget = error_budget_with(&art, false, &MeasurementPolicy::SeededRandom(0), &SimConfig::default())?;
    Ok(CostRow::new(&report, params, &budget))
}

fn to_csv(rows: &[CostRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Build { target, out, qasm } => cmd_build(&target, &out, qasm).map(|_| true),
        Command::Verify {
            target,
            seed,
            force_outcomes,
            matrix_cap,
        } => cmd_verify(&target, seed, force_outcomes, matrix_cap),
        Command::Cost { target, out } => {
            let row = cost_row(&target.params()?)?;
            write_out(out.as_deref(), &to_csv(&[row])?)?;
            Ok(true)
        }
        Command::Sweep {
            n_min,
            n_max,
            step,
            epsilon,
            figure_compat,
            out,
        } => {
            if n_min > n_max || step == 0 {
                bail!("empty sweep range");
            }
            let rows = (n_min..=n_max)
                .step_by(step)
                .map(|n| {
                    let p = if figure_compat {
                        AqftParams::figure_compat(n, epsilon)
                    } else {
                        AqftParams::new(n, epsilon)
                    };
                    cost_row(&p?)
                })
                .collect::<Result<Vec<_>>>()?;
            write_out(out.as_deref(), &to_csv(&rows)?)?;
            Ok(true)
        }
        Command::Export { input, format, out } => {
            let text = fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let c = aqft::json::from_json(&text)?;
            let rendered = match format {
                Format::Qasm => aqft::qasm::to_qasm(&c)?,
                Format::Json => aqft::json::to_json(&c),
            };
            write_out(out.as_deref(), &rendered)?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
