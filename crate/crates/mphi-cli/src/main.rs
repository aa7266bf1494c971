//! Command-line front door: classify operators, compute indices, build
//! catalog and family operators, sweep spectra, estimate radii, run the
//! verification suites and emit refinement diagnostics.
//!
//! Exit codes: 0 success, 1 input error, 2 undecided classification,
//! 3 suite failure.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mphi_core::algebra::{AlgebraSignature, IndexValue};
use mphi_core::constructions::{
    range17_member, range17_rows, sum18_member, sum18_rows, DEFAULT_FAMILY_PARAMS,
};
use mphi_core::dense::DenseOperator;
use mphi_core::lab;
use mphi_core::linalg::Tolerances;
use mphi_core::spectra::{
    classify_shift_polynomial, radii_exact, radii_grid, radii_symbolic, spectrum_partition,
    CentralGrid, ShiftPolynomial,
};
use mphi_core::symbolic::{
    catalog, ClassFlags, ClassificationReport, ClassificationStatus, KernelDescriptor,
    SymbolicOperator,
};

const EXIT_INPUT: u8 = 1;
const EXIT_UNDECIDED: u8 = 2;
const EXIT_SUITE_FAILURE: u8 = 3;

#[derive(Parser)]
#[command(name = "mphi", about = "Semi-Fredholm classification over finite-dimensional C*-algebras", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Relative rank threshold; the ambiguity band scales with it.
    #[arg(long)]
    tol_rank: Option<f64>,
}

impl CommonOpts {
    fn tolerances(&self) -> Tolerances {
        match self.tol_rank {
            Some(t) => Tolerances::with_rank_nominal(t),
            None => Tolerances::default(),
        }
    }

    fn emit(&self, text: &str) -> anyhow::Result<()> {
        match &self.out {
            Some(path) => fs::write(path, text)?,
            None => println!("{text}"),
        }
        Ok(())
    }
}

#[derive(Subcommand)]
enum Command {
    /// Classify an operator file (shift-type or dense JSON).
    Classify {
        file: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Print the K0-valued index of an operator file.
    Index {
        file: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Emit operator JSON: a catalog member or a refinement-family member.
    Construct {
        #[command(subcommand)]
        what: ConstructCmd,
    },
    /// Sweep `F - αI` over a central grid and emit CSV samples.
    Spectrum {
        file: PathBuf,
        #[arg(long, default_value_t = 2.5)]
        grid_radius: f64,
        #[arg(long, default_value_t = 0.25)]
        grid_step: f64,
        /// Use the axis grid (one block character at a time) instead of the
        /// full product grid.
        #[arg(long)]
        axes: bool,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Spectral radii of a shift polynomial or representable shift operator.
    Radii {
        file: PathBuf,
        /// Also compute the sampled grid estimate with this radius.
        #[arg(long)]
        grid_radius: Option<f64>,
        #[arg(long, default_value_t = 0.05)]
        grid_step: f64,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Run one verification suite or all of them.
    Verify {
        /// Suite name or "all".
        suite: String,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Emit refinement diagnostics (d, margin, angle) as CSV.
    Refine {
        /// Family name: range17 or sum18.
        family: String,
        #[arg(long, default_value_t = 64)]
        dmax: u64,
        #[command(flatten)]
        common: CommonOpts,
    },
}

#[derive(Subcommand)]
enum ConstructCmd {
    /// A catalog member by name (ex1..ex9, ex15, ex15g, L, S, I, ...).
    Catalog {
        name: String,
        /// Algebra signature as comma-separated block sizes, e.g. 2,1.
        #[arg(long, default_value = "2,1")]
        signature: String,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// A refinement-family member operator.
    Family {
        /// Family name: range17 or sum18.
        name: String,
        #[arg(long, default_value_t = 8)]
        d: u64,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn parse_signature(text: &str) -> anyhow::Result<AlgebraSignature> {
    let blocks = text
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AlgebraSignature::new(blocks)?)
}

/// Operator file contents: try the shift-type shape first, then dense.
enum OperatorFile {
    Symbolic(SymbolicOperator),
    Dense(DenseOperator),
    Poly(ShiftPolynomial),
}

fn load_operator(path: &PathBuf) -> anyhow::Result<OperatorFile> {
    let text = fs::read_to_string(path)?;
    if let Ok(op) = serde_json::from_str::<SymbolicOperator>(&text) {
        return Ok(OperatorFile::Symbolic(op));
    }
    if let Ok(op) = serde_json::from_str::<DenseOperator>(&text) {
        return Ok(OperatorFile::Dense(op));
    }
    if let Ok(p) = serde_json::from_str::<ShiftPolynomial>(&text) {
        return Ok(OperatorFile::Poly(p));
    }
    anyhow::bail!("file does not parse as a shift-type, dense, or polynomial operator")
}

/// Dense operators over a finite-dimensional algebra always have finitely
/// generated kernel and cokernel; package the computed data as a report.
fn classify_dense(op: &DenseOperator, tol: &Tolerances) -> ClassificationReport {
    let kernel = match op.kernel(tol) {
        Ok(k) => k,
        Err(e) => return ClassificationReport::undecided(format!("{e}")),
    };
    let image = match op.image(tol) {
        Ok(i) => i,
        Err(e) => return ClassificationReport::undecided(format!("{e}")),
    };
    let ker = kernel.dimension_vector();
    let cok = image.orth_complement().dimension_vector();
    let index = IndexValue::from_difference(&ker, &cok);
    ClassificationReport {
        status: ClassificationStatus::Decided,
        flags: Some(ClassFlags {
            in_mphi_plus: true,
            in_mphi_minus: true,
            in_mphi: true,
            in_mphi_zero: index.is_zero(),
            in_mphi_plus_minus: index.is_nonpositive(),
            in_mphi_minus_plus: index.is_nonnegative(),
        }),
        index: Some(index),
        kernel: KernelDescriptor::FinitelyGenerated { dim_vector: ker, window: op.domain_len() as u64 },
        cokernel: KernelDescriptor::FinitelyGenerated { dim_vector: cok, window: op.codomain_len() as u64 },
    }
}

fn run() -> anyhow::Result<u8> {
    let cli = Cli::parse();
    match cli.command {
        Command::Classify { file, common } => {
            let tol = common.tolerances();
            let report = match load_operator(&file)? {
                OperatorFile::Symbolic(op) => op.classify(&tol),
                OperatorFile::Dense(op) => classify_dense(&op, &tol),
                OperatorFile::Poly(p) => classify_shift_polynomial(&p)?,
            };
            common.emit(&serde_json::to_string_pretty(&report)?)?;
            Ok(if report.is_decided() { 0 } else { EXIT_UNDECIDED })
        }
        Command::Index { file, common } => {
            let tol = common.tolerances();
            let report = match load_operator(&file)? {
                OperatorFile::Symbolic(op) => op.classify(&tol),
                OperatorFile::Dense(op) => classify_dense(&op, &tol),
                OperatorFile::Poly(p) => classify_shift_polynomial(&p)?,
            };
            match &report.index {
                Some(ix) => {
                    #[derive(Serialize)]
                    struct IndexOut<'a> {
                        index: &'a IndexValue,
                    }
                    common.emit(&serde_json::to_string_pretty(&IndexOut { index: ix })?)?;
                    Ok(0)
                }
                None => {
                    common.emit("{\"index\":null}")?;
                    Ok(EXIT_UNDECIDED)
                }
            }
        }
        Command::Construct { what } => match what {
            ConstructCmd::Catalog { name, signature, common } => {
                let sig = parse_signature(&signature)?;
                let op = catalog(&name, &sig)?;
                common.emit(&serde_json::to_string_pretty(&op)?)?;
                Ok(0)
            }
            ConstructCmd::Family { name, d, common } => {
                let text = match name.as_str() {
                    "range17" => serde_json::to_string_pretty(&range17_member(d)?.operator)?,
                    "sum18" => serde_json::to_string_pretty(&sum18_member(d)?.operator)?,
                    other => anyhow::bail!("unknown family {other}; use range17 or sum18"),
                };
                common.emit(&text)?;
                Ok(0)
            }
        },
        Command::Spectrum { file, grid_radius, grid_step, axes, common } => {
            let tol = common.tolerances();
            let OperatorFile::Dense(op) = load_operator(&file)? else {
                anyhow::bail!("spectrum sweeps need a dense square operator file");
            };
            let grid = if axes {
                CentralGrid::axes(op.signature(), grid_radius, grid_step)?
            } else {
                CentralGrid::product(op.signature(), grid_radius, grid_step, 250_000)?
            };
            let report = spectrum_partition(&op, &grid, &tol)?;
            let mut csv = String::new();
            let k = op.signature().block_count();
            for i in 0..k {
                csv.push_str(&format!("re_c{0},im_c{0},", i + 1));
            }
            csv.push_str("invertible,is_eigen,gc_weyl,min_sv\n");
            for s in &report.samples {
                for c in s.alpha.central_coefficients() {
                    csv.push_str(&format!("{},{},", c.re, c.im));
                }
                csv.push_str(&format!(
                    "{},{},{},{}\n",
                    s.invertible as u8, s.is_eigen as u8, s.gc_weyl as u8, s.min_sv
                ));
            }
            common.emit(&csv)?;
            Ok(if report.partition_holds { 0 } else { EXIT_SUITE_FAILURE })
        }
        Command::Radii { file, grid_radius, grid_step, common } => {
            let estimate = match load_operator(&file)? {
                OperatorFile::Poly(p) => match grid_radius {
                    Some(r) => radii_grid(&p, r, grid_step)?,
                    None => radii_exact(&p),
                },
                OperatorFile::Symbolic(op) => radii_symbolic(&op)?,
                OperatorFile::Dense(_) => {
                    anyhow::bail!("radii need a shift polynomial or representable shift operator")
                }
            };
            common.emit(&serde_json::to_string_pretty(&estimate)?)?;
            Ok(0)
        }
        Command::Verify { suite, seed, trials, common } => {
            let reports = if suite == "all" {
                lab::run_all(seed, trials)
            } else {
                vec![lab::run_suite(&suite, seed, trials)?]
            };
            let mut all_pass = true;
            for rep in &reports {
                let status = if rep.passed() { "pass" } else { "FAIL" };
                eprintln!("suite {:<24} {} ({} failures, {} redraws)", rep.suite, status, rep.failures.len(), rep.redraws);
                all_pass &= rep.passed();
            }
            common.emit(&serde_json::to_string_pretty(&reports)?)?;
            Ok(if all_pass { 0 } else { EXIT_SUITE_FAILURE })
        }
        Command::Refine { family, dmax, common } => {
            let tol = common.tolerances();
            let params: Vec<u64> = DEFAULT_FAMILY_PARAMS
                .iter()
                .cloned()
                .filter(|&d| d <= dmax)
                .collect();
            let params = if params.is_empty() { vec![dmax.max(2)] } else { params };
            let rows = match family.as_str() {
                "range17" => range17_rows(&params, &tol)?,
                "sum18" => sum18_rows(&params, &tol)?,
                other => anyhow::bail!("unknown family {other}; use range17 or sum18"),
            };
            // monotone decay is part of the contract
            for pair in rows.windows(2) {
                if pair[1].margin >= pair[0].margin {
                    anyhow::bail!("family margins are not strictly decreasing");
                }
            }
            let mut csv = String::from("d,margin,angle\n");
            for row in &rows {
                csv.push_str(&format!("{},{},{}\n", row.d, row.margin, row.angle));
            }
            common.emit(&csv)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
