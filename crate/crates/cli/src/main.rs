//! Command-line front end for the qudit circuit synthesis toolkit.
//!
//! Exit codes: 0 success, 1 validation error (bad file, non-unitary input,
//! dimension mismatch), 2 verification failure.

mod formats;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use formats::{CircuitFile, MatrixFile, StateFile};
use quditsynth::clubseq::club_sequence_iter;
use quditsynth::counting::{chain_a, chain_total, circuit_histogram, f, total_control_boxes};
use quditsynth::eigensynth::eigen_synthesize;
use quditsynth::gate::Circuit;
use quditsynth::householder::{
    club_householder_onto, global_phase_gate, state_synthesis_from_zero, word_for_term,
};
use quditsynth::lowering::{lower_with_budget, LoweredCircuit};
use quditsynth::state::pow;
use quditsynth::triangle::synthesize;
use quditsynth::verify::{compare, haar_random_unitary};
use quditsynth::{DitString, StateVector, UnitaryMatrix};

#[derive(Parser)]
#[command(
    name = "quditsynth",
    version,
    about = "Exact synthesis, lowering, and gate-count analytics for d-level quantum circuits"
)]
struct Cli {
    /// Render club letters as UTF-8 suits in diagnostics instead of "c".
    #[arg(long, global = true)]
    utf8: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Method {
    Triangle,
    Eigen,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a unitary matrix into controlled one-qudit gates.
    Synth {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "triangle")]
        method: Method,
        /// Drop identity-payload gates from the output.
        #[arg(long)]
        prune: bool,
        /// Append a phase gate canceling any residual global phase.
        #[arg(long)]
        fix_phase: bool,
        /// Skip the automatic reconstruction check.
        #[arg(long)]
        no_verify: bool,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Compile a state vector into a preparation circuit (or, with --onto,
    /// a reduction circuit collapsing it onto a basis state).
    Statesynth {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Target basis state as a base-d digit string, e.g. "21".
        #[arg(long)]
        onto: Option<String>,
        #[arg(long)]
        prune: bool,
        #[arg(long)]
        fix_phase: bool,
        #[arg(long)]
        no_verify: bool,
        /// Print the club-term schedule and derived control words.
        #[arg(long)]
        schedule: bool,
    },
    /// Exact gate-count analytics.
    Count {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        /// Also print the per-arity counts.
        #[arg(long)]
        per_k: bool,
        /// Use the nearest-neighbor chain counts instead.
        #[arg(long)]
        chain: bool,
        /// Write rows for 2..=n as CSV to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Expand multi-controlled gates into local and two-qudit gates.
    Lower {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Fail if any gate needs more ancillas than this.
        #[arg(long)]
        max_ancillas: Option<usize>,
    },
    /// Check a circuit against a unitary matrix.
    Verify {
        #[arg(long)]
        unitary: PathBuf,
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Divide out the global phase maximizing the overlap first.
        #[arg(long)]
        up_to_phase: bool,
        /// Emit the report as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Apply a circuit to a state.
    Simulate {
        #[arg(long)]
        circuit: PathBuf,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Record the state after every gate in the output file.
        #[arg(long)]
        trace: bool,
    },
    /// Sample a seeded Haar-random unitary.
    RandomUnitary {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Stamp the file with this register shape (defaults to one
        /// dim-level qudit).
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
    },
}

enum CliError {
    Validation(anyhow::Error),
    Verification(String),
}

impl<E: Into<anyhow::Error>> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError::Validation(e.into())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(CliError::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?)
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).context("serializing output")?;
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth {
            d,
            n,
            input,
            out,
            method,
            prune,
            fix_phase,
            no_verify,
            tol,
        } => cmd_synth(d, n, &input, &out, method, prune, fix_phase, no_verify, tol),
        Command::Statesynth {
            d,
            n,
            input,
            out,
            onto,
            prune,
            fix_phase,
            no_verify,
            schedule,
        } => cmd_statesynth(
            d, n, &input, &out, onto, prune, fix_phase, no_verify, schedule, cli.utf8,
        ),
        Command::Count {
            d,
            n,
            per_k,
            chain,
            csv,
        } => cmd_count(d, n, per_k, chain, csv.as_deref()),
        Command::Lower {
            input,
            out,
            max_ancillas,
        } => cmd_lower(&input, &out, max_ancillas),
        Command::Verify {
            unitary,
            circuit,
            tol,
            up_to_phase,
            json,
        } => cmd_verify(&unitary, &circuit, tol, up_to_phase, json),
        Command::Simulate {
            circuit,
            state,
            out,
            trace,
        } => cmd_simulate(&circuit, &state, &out, trace),
        Command::RandomUnitary {
            dim,
            seed,
            out,
            d,
            n,
        } => cmd_random_unitary(dim, seed, &out, d, n),
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_synth(
    d: usize,
    n: usize,
    input: &Path,
    out: &Path,
    method: Method,
    prune: bool,
    fix_phase: bool,
    no_verify: bool,
    tol: f64,
) -> Result<(), CliError> {
    let file: MatrixFile = read_json(input)?;
    let u = file.to_unitary(d, n)?;
    let mut circuit = match method {
        Method::Triangle => synthesize(&u, d, n)?,
        Method::Eigen => eigen_synthesize(&u, d, n)?,
    };
    if fix_phase {
        append_phase_fix(&mut circuit, &u)?;
    }
    if prune {
        circuit = circuit.pruned(1e-12);
    }
    if !no_verify {
        let report = compare(&u, &circuit, tol, false)?;
        if !report.pass {
            return Err(CliError::Verification(report.to_string()));
        }
        eprintln!("{report}");
    }
    let hist = circuit_histogram(&circuit);
    eprintln!(
        "synthesized {} gates ({} weighted control boxes)",
        circuit.len(),
        hist.weighted_total()
    );
    write_json(out, &CircuitFile::from_circuit(&circuit))
}

/// Appends a global-phase gate so the circuit matches `u` exactly rather
/// than up to phase.
fn append_phase_fix(circuit: &mut Circuit, u: &UnitaryMatrix) -> Result<(), CliError> {
    let m = circuit.matrix()?;
    let dim = m.dim();
    let overlap: Complex64 = (0..dim)
        .flat_map(|r| (0..dim).map(move |c| (r, c)))
        .map(|(r, c)| m[(r, c)].conj() * u.matrix()[(r, c)])
        .sum();
    if overlap.norm() > 0.0 && overlap.arg() != 0.0 {
        circuit.push(global_phase_gate(circuit.d(), circuit.n(), overlap.arg())?)?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_statesynth(
    d: usize,
    n: usize,
    input: &Path,
    out: &Path,
    onto: Option<String>,
    prune: bool,
    fix_phase: bool,
    no_verify: bool,
    schedule: bool,
    utf8: bool,
) -> Result<(), CliError> {
    let file: StateFile = read_json(input)?;
    if file.d != d || file.n != n {
        return Err(anyhow!(
            "state file is (d = {}, n = {}) but flags say (d = {d}, n = {n})",
            file.d,
            file.n
        )
        .into());
    }
    let psi = file.to_state()?;

    if schedule {
        for term in club_sequence_iter(d, n)? {
            let word = word_for_term(&term)?;
            eprintln!("{} -> {word}", term.render(utf8));
        }
    }

    let target = onto
        .as_deref()
        .map(|j| parse_target(d, n, j))
        .transpose()?;
    let mut circuit = match &target {
        None => state_synthesis_from_zero(&psi)?,
        Some(j) => club_householder_onto(&psi, j)?,
    };

    let (result, reference): (StateVector, StateVector) = match &target {
        None => (circuit.apply(&StateVector::zero_state(d, n)?)?, psi.clone()),
        Some(j) => (circuit.apply(&psi)?, StateVector::basis_state(j)),
    };
    let overlap = reference.inner(&result);
    if fix_phase && overlap.norm() > 0.0 && overlap.arg() != 0.0 {
        circuit.push(global_phase_gate(d, n, -overlap.arg())?)?;
    }
    if prune {
        circuit = circuit.pruned(1e-12);
    }
    if !no_verify {
        let defect = (overlap.norm() - 1.0).abs();
        if defect > 1e-10 {
            return Err(CliError::Verification(format!(
                "synthesized state overlap defect {defect:.3e} exceeds 1e-10"
            )));
        }
        eprintln!("overlap defect {defect:.3e}");
    }
    eprintln!("synthesized {} gates", circuit.len());
    write_json(out, &CircuitFile::from_circuit(&circuit))
}

fn parse_target(d: usize, n: usize, s: &str) -> Result<DitString, CliError> {
    let digits: Vec<u8> = s
        .chars()
        .map(|c| {
            c.to_digit(10)
                .map(|v| v as u8)
                .ok_or_else(|| anyhow!("target digit {c:?} is not a decimal digit"))
        })
        .collect::<Result<_, _>>()?;
    if digits.len() != n {
        return Err(anyhow!("target has {} digits, register has {n}", digits.len()).into());
    }
    Ok(DitString::new(d, digits)?)
}

fn cmd_count(
    d: usize,
    n: usize,
    per_k: bool,
    chain: bool,
    csv: Option<&Path>,
) -> Result<(), CliError> {
    let total = if chain {
        chain_total(d, n)?
    } else {
        total_control_boxes(d, n)?
    };
    println!("{total}");
    if per_k {
        for k in 0..n {
            let v = if chain { chain_a(d, n, k)? } else { f(d, n, k)? };
            println!("k{k} {v}");
        }
    }
    if let Some(path) = csv {
        let mut text = String::from("d,n,total");
        if per_k {
            for k in 0..n {
                text.push_str(&format!(",k{k}"));
            }
        }
        text.push('\n');
        for row_n in 2..=n {
            let row_total = if chain {
                chain_total(d, row_n)?
            } else {
                total_control_boxes(d, row_n)?
            };
            text.push_str(&format!("{d},{row_n},{row_total}"));
            if per_k {
                for k in 0..n {
                    if k < row_n {
                        let v = if chain {
                            chain_a(d, row_n, k)?
                        } else {
                            f(d, row_n, k)?
                        };
                        text.push_str(&format!(",{v}"));
                    } else {
                        text.push(',');
                    }
                }
            }
            text.push('\n');
        }
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn cmd_lower(input: &Path, out: &Path, max_ancillas: Option<usize>) -> Result<(), CliError> {
    let file: CircuitFile = read_json(input)?;
    if file.ancillas != 0 {
        return Err(anyhow!("input circuit already carries ancilla lines").into());
    }
    let circuit = file.to_circuit()?;
    let mut gates = Vec::new();
    let mut ancillas = 0usize;
    for gate in circuit.gates() {
        let low = lower_with_budget(gate, max_ancillas)?;
        ancillas = ancillas.max(low.ancillas);
        gates.push(low);
    }
    // merged onto a shared ancilla block: every lowered gate restores its
    // ancillas, so the lines can be reused across gates
    let merged = LoweredCircuit {
        d: circuit.d(),
        n: circuit.n(),
        ancillas,
        gates: gates.into_iter().flat_map(|lc| lc.gates).collect(),
    };
    eprintln!(
        "lowered {} gates onto {} lines ({} ancillas), {} gates out",
        circuit.len(),
        merged.total_lines(),
        merged.ancillas,
        merged.gates.len()
    );
    write_json(out, &CircuitFile::from_lowered(&merged)?)
}

fn cmd_verify(
    unitary: &Path,
    circuit_path: &Path,
    tol: f64,
    up_to_phase: bool,
    json: bool,
) -> Result<(), CliError> {
    let cfile: CircuitFile = read_json(circuit_path)?;
    let mfile: MatrixFile = read_json(unitary)?;
    let circuit = cfile.to_circuit()?;
    let report = if cfile.ancillas == 0 {
        let u = mfile.to_unitary(cfile.d, cfile.n)?;
        compare(&u, &circuit, tol, up_to_phase)?
    } else {
        subspace_compare(&mfile, &cfile, &circuit, tol)?
    };
    if json {
        println!("{}", report.to_json());
    } else {
        println!("{report}");
    }
    if report.pass {
        Ok(())
    } else {
        Err(CliError::Verification(report.to_string()))
    }
}

/// Compare an ancilla-bearing circuit with a data-register unitary on the
/// `data (x) |0...0>` subspace.
fn subspace_compare(
    mfile: &MatrixFile,
    cfile: &CircuitFile,
    circuit: &Circuit,
    tol: f64,
) -> Result<quditsynth::verify::CompareReport, CliError> {
    let d = cfile.d;
    let n = cfile.n;
    let u = mfile.to_unitary(d, n)?;
    let m = circuit.matrix()?;
    let anc_dim = pow(d, cfile.ancillas);
    let data_dim = pow(d, n);
    let mut residual_sq = 0.0f64;
    for col in 0..data_dim {
        for row in 0..data_dim {
            for a in 0..anc_dim {
                let got = m[(row * anc_dim + a, col * anc_dim)];
                let want = if a == 0 {
                    u.matrix()[(row, col)]
                } else {
                    Complex64::new(0.0, 0.0)
                };
                residual_sq += (got - want).norm_sqr();
            }
        }
    }
    let residual = residual_sq.sqrt();
    Ok(quditsynth::verify::CompareReport {
        residual,
        tol,
        pass: residual <= tol,
        up_to_phase: false,
        phase: None,
    })
}

fn cmd_simulate(
    circuit_path: &Path,
    state_path: &Path,
    out: &Path,
    trace: bool,
) -> Result<(), CliError> {
    let cfile: CircuitFile = read_json(circuit_path)?;
    let sfile: StateFile = read_json(state_path)?;
    let circuit = cfile.to_circuit()?;
    let psi = sfile.to_state()?;
    if psi.d() != cfile.d {
        return Err(anyhow!("state and circuit disagree on d").into());
    }
    let lines = cfile.n + cfile.ancillas;
    let initial = if psi.n() == lines {
        psi
    } else if psi.n() == cfile.n {
        // extend with ancillas in |0>
        let anc_dim = pow(cfile.d, cfile.ancillas);
        let mut amps = vec![Complex64::new(0.0, 0.0); psi.dim() * anc_dim];
        for (i, &z) in psi.amplitudes().iter().enumerate() {
            amps[i * anc_dim] = z;
        }
        StateVector::new(cfile.d, lines, amps)?
    } else {
        return Err(anyhow!(
            "state has {} lines but the circuit acts on {} data lines (+{} ancillas)",
            psi.n(),
            cfile.n,
            cfile.ancillas
        )
        .into());
    };

    let mut current = initial;
    let mut steps = Vec::new();
    for gate in circuit.gates() {
        current = gate.apply(&current)?;
        if trace {
            steps.push(formats::amps_to_pairs(current.amplitudes()));
        }
    }
    let mut outfile = StateFile::from_state(&current);
    if trace {
        outfile.trace = Some(steps);
    }
    write_json(out, &outfile)
}

fn cmd_random_unitary(
    dim: usize,
    seed: u64,
    out: &Path,
    d: Option<usize>,
    n: Option<usize>,
) -> Result<(), CliError> {
    let u = haar_random_unitary(dim, seed)?;
    let (d, n) = match (d, n) {
        (Some(d), Some(n)) => {
            if pow(d, n) != dim {
                return Err(anyhow!("d^n = {} does not match dim = {dim}", pow(d, n)).into());
            }
            (d, n)
        }
        (None, None) => (dim, 1),
        _ => return Err(anyhow!("--d and --n must be given together").into()),
    };
    write_json(out, &MatrixFile::from_matrix(Some(d), Some(n), u.matrix()))
}
