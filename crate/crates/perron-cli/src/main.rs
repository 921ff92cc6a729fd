//! Command-line front end: load an operator or generator, run the
//! analysis pipeline, and emit a reproducible JSON report plus CSV traces.
//!
//! Exit codes: 0 on success, 2 when a structural hypothesis of the
//! analysis is violated (diagnostics in the error message), 1 on I/O,
//! parse, or usage errors.

mod report;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use perron::testutil::basis_vector;
use perron::{
    check_simple_eigenvalue, find_uniform_index_capped, fundamental_inverse, io,
    limit_decomposition, limit_identities_check, spectral_radius, trace_until, Error,
    Generator, LimitDecomposition, OrderUnit, PositiveOperator, SemigroupOptions,
    Tolerances,
};
use report::*;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "perron", version, about = "Limit analysis of positive operators and semigroups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonOpts {
    /// Convergence tolerance for traces and series
    #[arg(long, default_value_t = 1e-10)]
    eps: f64,
    /// Cap for eventual-positivity index searches (default dim^2 + 1)
    #[arg(long)]
    cap: Option<usize>,
    /// Divide the operator by its computed spectral radius first
    #[arg(long)]
    normalize: bool,
    /// Seed for randomized sampling, recorded in the report
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Report destination
    #[arg(long, default_value = "report.json")]
    output: PathBuf,
    /// Include wall-clock timings (makes reports differ between runs)
    #[arg(long)]
    timings: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Full discrete pipeline: regularity, limit, certificate, identities,
    /// fundamental inverse
    Analyze {
        /// Operator matrix (CSV rows or JSON {"dim", "data"})
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Continuous pipeline for a Metzler generator
    Semigroup {
        /// Generator matrix (CSV rows or JSON {"dim", "data"})
        #[arg(long)]
        input: PathBuf,
        /// Sampling time for the embedded discrete problem
        #[arg(long, default_value_t = 1.0)]
        tau: f64,
        /// Stop the time grid beyond this horizon
        #[arg(long)]
        horizon: Option<f64>,
        /// Random positive unit vectors added to the bound sample
        #[arg(long, default_value_t = 32)]
        samples: usize,
        /// Destination for the bound trace CSV
        #[arg(long, default_value = "bound_trace.csv")]
        bound_csv: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Build a named fixture and feed it through the analysis pipeline
    Example {
        #[command(subcommand)]
        which: ExampleKind,
    },
    /// Emit the oscillation trace of one seed vector as CSV
    Trace {
        /// Operator matrix (CSV rows or JSON {"dim", "data"})
        #[arg(long)]
        input: PathBuf,
        /// Seed vector file (defaults to the first basis vector)
        #[arg(long)]
        x: Option<PathBuf>,
        /// Step budget for the trace
        #[arg(long, default_value_t = 100_000)]
        max_steps: usize,
        /// Destination for the trace CSV
        #[arg(long, default_value = "trace.csv")]
        csv: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
}

#[derive(Subcommand)]
enum ExampleKind {
    /// Integral Markov operator with the square-root kernel on [0, 1]
    Example1 {
        #[arg(long, default_value_t = 0.25)]
        theta: f64,
        #[arg(long, default_value_t = 512)]
        grid: usize,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Truncated dyadic stochastic matrix with closed-form limit
    Example2 {
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[command(flatten)]
        common: CommonOpts,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            eprintln!("{e}");
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_hypothesis_violation() { 2 } else { 1 })
        }
    }
}

fn tolerances(common: &CommonOpts) -> Tolerances {
    Tolerances {
        trace_eps: common.eps,
        index_cap: common.cap,
        ..Tolerances::default()
    }
}

struct Analysis {
    normalization: Normalization,
    regularity: Regularity,
    decomp: LimitDecomposition,
    eigenvalue_check: Option<EigenvalueCheck>,
    residuals: Residuals,
}

/// The discrete pipeline behind `analyze` and `example`. Every number in
/// the report comes straight out of a library operation.
fn analyze_operator(op: &PositiveOperator, common: &CommonOpts) -> Result<Analysis, Error> {
    let opts = tolerances(common);
    let rho = spectral_radius(op.matrix());
    let normalized;
    let op = if common.normalize {
        normalized = PositiveOperator::with_space(op.space, op.matrix() / rho)?;
        &normalized
    } else {
        op
    };
    let cap = common.cap.unwrap_or_else(|| op.default_cap());

    let decomp = limit_decomposition(op, &opts).map_err(|e| {
        if matches!(e, Error::PowerNormsDiverge { .. }) {
            eprintln!(
                "computed spectral radius {rho:.17}; pass --normalize to analyze the rescaled operator"
            );
        }
        e
    })?;

    let uniform_index = match &decomp.certificate {
        Some(cert) => Some(cert.p),
        None if op.dim() <= 64 => find_uniform_index_capped(op, cap)?,
        None => None,
    };
    let regularity = Regularity {
        per_basis_index: decomp.per_basis_index.clone(),
        uniform_index,
        cap,
    };

    let eigenvalue_check = if decomp.is_zero_limit {
        None
    } else {
        let check = check_simple_eigenvalue(op, &decomp)?;
        Some(EigenvalueCheck {
            nullity: check.nullity,
            fixed_vector_residual: check.fixed_vector_residual,
            adjoint_residual: check.adjoint_residual,
        })
    };

    let mut idempotent: f64 = 0.0;
    let mut commute_left: f64 = 0.0;
    let mut commute_right: f64 = 0.0;
    let mut power_identity: f64 = 0.0;
    for n in [1u64, 2, 5, 17] {
        let ids = limit_identities_check(op, &decomp, n)?;
        idempotent = idempotent.max(ids.idempotent);
        commute_left = commute_left.max(ids.commute_left);
        commute_right = commute_right.max(ids.commute_right);
        power_identity = power_identity.max(ids.power_identity);
    }
    let fundamental = fundamental_inverse(op, &decomp, common.eps)?;

    Ok(Analysis {
        normalization: Normalization {
            applied: common.normalize,
            spectral_radius: rho,
        },
        regularity,
        decomp,
        eigenvalue_check,
        residuals: Residuals {
            limit: 0.0,
            idempotent,
            commute_left,
            commute_right,
            power_identity,
            fundamental_inverse: fundamental.residual,
            fundamental_terms: fundamental.terms_used as u64,
        },
    })
}

fn matrix_to_rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn base_report(subcommand: &str, path: Option<&Path>, dim: usize, common: &CommonOpts) -> Report {
    Report {
        schema_version: SCHEMA_VERSION,
        input: InputDescriptor {
            subcommand: subcommand.to_string(),
            path: path.map(|p| p.display().to_string()),
            dim,
            eps: common.eps,
            cap: common.cap,
            normalize: common.normalize,
            seed: common.seed,
        },
        normalization: None,
        regularity: None,
        zero_limit: None,
        u: None,
        f0: None,
        a0: None,
        certificate: None,
        eigenvalue_check: None,
        residuals: None,
        semigroup: None,
        fixture: None,
        trace: None,
        timings: None,
    }
}

fn fill_analysis(report: &mut Report, analysis: Analysis) {
    let mut residuals = analysis.residuals;
    residuals.limit = analysis.decomp.limit_residual;
    report.normalization = Some(analysis.normalization);
    report.regularity = Some(analysis.regularity);
    report.zero_limit = Some(analysis.decomp.is_zero_limit);
    report.u = analysis.decomp.u.as_ref().map(|u| u.iter().cloned().collect());
    report.f0 = analysis.decomp.f0.as_ref().map(|f| f.iter().cloned().collect());
    report.a0 = Some(matrix_to_rows(&analysis.decomp.a0));
    report.certificate = analysis.decomp.certificate.map(|c| Certificate {
        p: c.p,
        beta: c.beta,
        delta0: c.delta0,
    });
    report.eigenvalue_check = analysis.eigenvalue_check;
    report.residuals = Some(residuals);
}

fn write_report(report: &Report, path: &Path) -> Result<(), Error> {
    std::fs::write(path, render(report))?;
    println!("report written to {}", path.display());
    Ok(())
}

fn run(command: Command) -> Result<(), Error> {
    let started = Instant::now();
    match command {
        Command::Analyze { input, common } => {
            let matrix = io::read_matrix(&input)?;
            let op = PositiveOperator::new(matrix)?;
            let analysis_started = Instant::now();
            let analysis = analyze_operator(&op, &common)?;
            let analysis_ms = analysis_started.elapsed().as_millis() as u64;
            let mut report = base_report("analyze", Some(&input), op.dim(), &common);
            fill_analysis(&mut report, analysis);
            if common.timings {
                report.timings = Some(Timings {
                    total_ms: started.elapsed().as_millis() as u64,
                    analysis_ms,
                });
            }
            write_report(&report, &common.output)
        }
        Command::Semigroup {
            input,
            tau,
            horizon,
            samples,
            bound_csv,
            common,
        } => {
            let matrix = io::read_matrix(&input)?;
            let gen = Generator::new(matrix)?;
            let sg_opts = SemigroupOptions {
                tolerances: tolerances(&common),
                random_samples: samples,
                seed: common.seed,
                ..SemigroupOptions::default()
            };
            let analysis_started = Instant::now();
            let lim = perron::semigroup_limit(
                &gen,
                tau,
                horizon.unwrap_or(f64::INFINITY),
                &sg_opts,
            )?;
            let analysis_ms = analysis_started.elapsed().as_millis() as u64;

            std::fs::write(&bound_csv, lim.bound_trace_csv())?;
            let mut report = base_report("semigroup", Some(&input), gen.dim(), &common);
            report.zero_limit = Some(lim.decomp.is_zero_limit);
            report.u = lim.decomp.u.as_ref().map(|u| u.iter().cloned().collect());
            report.f0 = lim.decomp.f0.as_ref().map(|f| f.iter().cloned().collect());
            report.a0 = Some(matrix_to_rows(&lim.decomp.a0));
            report.certificate = lim.decomp.certificate.map(|c| Certificate {
                p: c.p,
                beta: c.beta,
                delta0: c.delta0,
            });
            report.regularity = Some(Regularity {
                per_basis_index: lim.decomp.per_basis_index.clone(),
                uniform_index: lim.decomp.certificate.map(|c| c.p),
                cap: common.cap.unwrap_or(gen.dim() * gen.dim() + 1),
            });
            report.semigroup = Some(SemigroupSection {
                tau,
                horizon,
                row_sum_zero: gen.row_sum_zero,
                commutation_residual: lim.commutation_residual,
                generator_fixed_point_residual: lim.generator_fixed_point_residual,
                sample_mode: match lim.sample_mode {
                    perron::semigroup::SampleMode::ExactCorners { count } => {
                        format!("exact-corners({count})")
                    }
                    perron::semigroup::SampleMode::Sampled { seed, random } => {
                        format!("sampled(seed={seed}, random={random})")
                    }
                },
                bound_points: lim.bound_trace.len(),
                bound_csv: Some(bound_csv.display().to_string()),
            });
            if common.timings {
                report.timings = Some(Timings {
                    total_ms: started.elapsed().as_millis() as u64,
                    analysis_ms,
                });
            }
            write_report(&report, &common.output)
        }
        Command::Example { which } => match which {
            ExampleKind::Example1 {
                theta,
                grid,
                common,
            } => {
                let fixture = perron::fixtures::sqrt_kernel_operator(theta, grid)?;
                let analysis_started = Instant::now();
                let analysis = analyze_operator(&fixture.op, &common)?;
                let analysis_ms = analysis_started.elapsed().as_millis() as u64;
                let mut report = base_report("example example1", None, grid, &common);
                fill_analysis(&mut report, analysis);
                report.fixture = Some(FixtureSection {
                    name: "example1".to_string(),
                    theta: Some(theta),
                    grid: Some(grid),
                    markov_defect: Some(fixture.markov_defect()),
                    truncation: None,
                    closed_form: None,
                    computed_f0: None,
                    leading_deviation: None,
                });
                if common.timings {
                    report.timings = Some(Timings {
                        total_ms: started.elapsed().as_millis() as u64,
                        analysis_ms,
                    });
                }
                write_report(&report, &common.output)
            }
            ExampleKind::Example2 { n, common } => {
                let fixture = perron::fixtures::dyadic_chain(n)?;
                let analysis_started = Instant::now();
                let analysis = analyze_operator(&fixture.op, &common)?;
                let comparison = perron::fixtures::dyadic_chain_limit_distribution(
                    &fixture,
                    &tolerances(&common),
                )?;
                let analysis_ms = analysis_started.elapsed().as_millis() as u64;
                let mut report = base_report("example example2", None, n, &common);
                fill_analysis(&mut report, analysis);
                report.fixture = Some(FixtureSection {
                    name: "example2".to_string(),
                    theta: None,
                    grid: None,
                    markov_defect: None,
                    truncation: Some(n),
                    closed_form: Some(comparison.closed_form.iter().cloned().collect()),
                    computed_f0: Some(comparison.computed.iter().cloned().collect()),
                    leading_deviation: Some(comparison.leading_deviation),
                });
                if common.timings {
                    report.timings = Some(Timings {
                        total_ms: started.elapsed().as_millis() as u64,
                        analysis_ms,
                    });
                }
                write_report(&report, &common.output)
            }
        },
        Command::Trace {
            input,
            x,
            max_steps,
            csv,
            common,
        } => {
            let matrix = io::read_matrix(&input)?;
            let op = PositiveOperator::new(matrix)?;
            let op = if common.normalize {
                let rho = spectral_radius(op.matrix());
                PositiveOperator::with_space(op.space, op.matrix() / rho)?
            } else {
                op
            };
            let seed: DVector<f64> = match &x {
                Some(path) => io::read_vector(path)?,
                None => basis_vector(op.dim(), 0),
            };
            let opts = tolerances(&common);
            let decomp = limit_decomposition(&op, &opts)?;
            let unit = match &decomp.u {
                Some(u) => OrderUnit::new(op.space, u.clone())?,
                None => return Err(Error::VanishingLimit),
            };
            let trace = trace_until(&op, &unit, &seed, common.eps, max_steps)?;
            std::fs::write(&csv, trace.to_csv())?;
            let mut report = base_report("trace", Some(&input), op.dim(), &common);
            let last = trace.last();
            report.trace = Some(TraceSection {
                converged: trace.converged(),
                steps: trace.steps.len(),
                final_delta: last.delta(),
                threshold: trace.threshold,
                csv: csv.display().to_string(),
            });
            write_report(&report, &common.output)
        }
    }
}
