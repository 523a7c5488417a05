//! Command-line driver: decompose, jennrich, monomial, verify, counts,
//! hilbert. Exit codes: 0 success, 1 input error, 2 algorithmic failure,
//! 3 structural infeasibility.

use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;

use waring::error::Error;
use waring::ff::{self, FormatVerdict, PointSource};
use waring::hankel::{self, BinaryParams, MonomialBasis};
use waring::io;
use waring::jennrich;
use waring::linalg::{c, C64};
use waring::linsys;
use waring::monomial;
use waring::tensor::{self, Decomposition, SymTensor};

#[derive(Parser)]
#[command(
    name = "waring",
    about = "Symmetric tensor decomposition via moment matrix extension",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonIo {
    /// Input tensor file (`-` for stdin)
    #[arg(long)]
    input: String,
    /// Output decomposition file (`-` streams to stdout)
    #[arg(long, default_value = "-")]
    output: String,
    /// Seed for every randomized step
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Tolerance (0 selects per-module defaults)
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Apply a seeded random basis change first and undo it afterwards
    #[arg(long)]
    randomize: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a tensor: binary path for n = 1, the order-4 linear path
    /// with a slice-quotient fast path, odd orders via slice quotients
    Decompose {
        #[command(flatten)]
        io: CommonIo,
        /// Target decomposition size (binary path only)
        #[arg(long)]
        size: Option<usize>,
        /// Basis choice: `auto` or `explicit:<file>` with one exponent row per line
        #[arg(long, default_value = "auto")]
        basis: String,
        /// Loop over candidate sizes for binary tensors (the basis collection
        /// is a singleton per size)
        #[arg(long)]
        exhaustive: bool,
        /// Allow the linear path on even orders beyond 4
        #[arg(long)]
        experimental_even_d: bool,
    },
    /// Simultaneous-diagonalization decomposition only
    Jennrich {
        #[command(flatten)]
        io: CommonIo,
    },
    /// Decompose a monomial given by its degree sequence
    Monomial {
        /// Degrees `d0,d1,...,dn`, ascending, d0 >= 1
        #[arg(long, value_delimiter = ',')]
        degrees: Vec<u32>,
        /// Use the roots-of-unity canonical decomposition
        #[arg(long)]
        canonical: bool,
        /// Seed for random free parameters
        #[arg(long)]
        seed: Option<u64>,
        /// File with explicit free-parameter values
        #[arg(long)]
        params: Option<String>,
        #[arg(long, default_value = "-")]
        output: String,
    },
    /// Finite-field full-column-rank certificate for a format (n, r)
    Verify {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: usize,
        #[arg(long, default_value_t = ff::DEFAULT_PRIME)]
        prime: u64,
        #[arg(long, default_value_t = 3)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Restrict to the single-determinant rows
        #[arg(long)]
        e1_only: bool,
        /// Certificate output file (`-` for stdout)
        #[arg(long, default_value = "-")]
        output: String,
    },
    /// Equation and variable counts, or the threshold dimension for a ratio
    Counts {
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        c: Option<usize>,
        #[arg(long)]
        t: Option<f64>,
    },
    /// Catalecticant rank sequence of a tensor
    Hilbert {
        #[arg(long)]
        input: String,
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(classify_exit(&err))
        }
    }
}

fn classify_exit(err: &Error) -> u8 {
    match err.root() {
        Error::Parse { .. } | Error::Io(_) | Error::NotPrime(_) | Error::OutOfRange(_) => 1,
        _ => 2,
    }
}

fn read_input(path: &str) -> Result<String, Error> {
    if path == "-" {
        use std::io::Read;
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        Ok(fs::read_to_string(path)?)
    }
}

fn write_output(path: &str, content: &str) -> Result<(), Error> {
    if path == "-" {
        print!("{content}");
        Ok(())
    } else {
        fs::write(path, content)?;
        Ok(())
    }
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Decompose {
            io,
            size,
            basis,
            exhaustive,
            experimental_even_d,
        } => cmd_decompose(io, size, &basis, exhaustive, experimental_even_d),
        Command::Jennrich { io } => cmd_jennrich(io),
        Command::Monomial {
            degrees,
            canonical,
            seed,
            params,
            output,
        } => cmd_monomial(degrees, canonical, seed, params, &output),
        Command::Verify {
            n,
            r,
            prime,
            trials,
            seed,
            e1_only,
            output,
        } => cmd_verify(n, r, prime, trials, seed, e1_only, &output),
        Command::Counts { n, c, t } => cmd_counts(n, c, t),
        Command::Hilbert { input, tol } => {
            let phi = io::read_tensor(&read_input(&input)?)?;
            let ranks = tensor::hilbert_function(&phi, tol);
            let parts: Vec<String> = ranks.iter().map(|r| r.to_string()).collect();
            println!("hilbert ({})", parts.join(", "));
            Ok(ExitCode::SUCCESS)
        }
    }
}

/// Undoes a basis change on a decomposition: maps each point through the
/// inverse, rescales to the dehomogenized chart and folds the scale into the
/// weight.
fn pull_back(dec: &Decomposition, minv: &DMatrix<C64>, d: u32) -> Result<Decomposition, Error> {
    let n = dec.points.n();
    let mut mat = DMatrix::<C64>::zeros(dec.size(), n + 1);
    let mut weights = Vec::with_capacity(dec.size());
    for i in 0..dec.size() {
        let z = DMatrix::from_fn(n + 1, 1, |j, _| dec.points.mat[(i, j)]);
        let w = minv * z;
        let w0 = w[(0, 0)];
        if w0.norm() < 1e-12 {
            return Err(Error::NormalizationFailure);
        }
        mat[(i, 0)] = c(1.0, 0.0);
        for j in 1..=n {
            mat[(i, j)] = w[(j, 0)] / w0;
        }
        weights.push(dec.weights[i] * w0.powu(d));
    }
    Ok(Decomposition {
        points: tensor::PointSet::new(mat),
        weights,
    })
}

/// Embeds a decomposition of the reduced tensor back into the original
/// coordinates through the adjoint of the reducing unitary.
fn embed_back(
    dec: &Decomposition,
    rotation: &DMatrix<C64>,
    n_full: usize,
    d: u32,
) -> Result<Decomposition, Error> {
    let minv = rotation.adjoint();
    let count = dec.points.n() + 1;
    let mut mat = DMatrix::<C64>::zeros(dec.size(), n_full + 1);
    let mut weights = Vec::with_capacity(dec.size());
    for i in 0..dec.size() {
        let mut padded = DMatrix::<C64>::zeros(n_full + 1, 1);
        for j in 0..count {
            padded[(j, 0)] = dec.points.mat[(i, j)];
        }
        let w = &minv * padded;
        let w0 = w[(0, 0)];
        if w0.norm() < 1e-12 {
            return Err(Error::NormalizationFailure);
        }
        mat[(i, 0)] = c(1.0, 0.0);
        for j in 1..=n_full {
            mat[(i, j)] = w[(j, 0)] / w0;
        }
        weights.push(dec.weights[i] * w0.powu(d));
    }
    Ok(Decomposition {
        points: tensor::PointSet::new(mat),
        weights,
    })
}

struct PipelineResult {
    dec: Decomposition,
    certificate: Option<linsys::Certificate>,
    path: &'static str,
}

fn decompose_routed(
    phi: &SymTensor,
    seed: u64,
    tol: f64,
    size: Option<usize>,
    basis_arg: &str,
    exhaustive: bool,
    experimental_even_d: bool,
) -> Result<PipelineResult, Error> {
    let n = phi.n();
    let d = phi.d();
    if phi.norm() == 0.0 {
        // the zero tensor has the empty decomposition
        return Ok(PipelineResult {
            dec: Decomposition {
                points: tensor::PointSet::new(DMatrix::zeros(0, n + 1)),
                weights: vec![],
            },
            certificate: None,
            path: "trivial",
        });
    }
    if n == 1 {
        let ranks = tensor::hilbert_function(phi, 0.0);
        let lower = ranks.iter().copied().max().unwrap_or(0);
        let sizes: Vec<usize> = match size {
            Some(s) => vec![s],
            None => (lower..=(d as usize + 1)).collect(),
        };
        let _ = exhaustive; // the candidate collection per size is a singleton
        let mut last = Error::Defective;
        for s in sizes {
            match hankel::binary_decompose(phi, s, BinaryParams::Seed(seed), tol) {
                Ok(dec) => {
                    return Ok(PipelineResult {
                        dec,
                        certificate: None,
                        path: "binary",
                    })
                }
                Err(e) => last = e,
            }
        }
        return Err(Error::staged("binary search", last));
    }
    if d >= 3 && d % 2 == 1 {
        let dec = jennrich::jennrich_decompose(phi, seed, tol)?;
        return Ok(PipelineResult {
            dec,
            certificate: None,
            path: "slice quotients",
        });
    }
    if d < 3 {
        return Err(Error::OrderTooSmall);
    }
    // even order: slice-quotient fast path when the most-square catalecticant
    // already carries the full rank
    let dd = (d - 1) / 2;
    let rank_low = waring::numerical_rank(&tensor::catalecticant(phi, dd)?, 0.0);
    let rank_half = waring::numerical_rank(&tensor::catalecticant(phi, d / 2)?, 0.0);
    if rank_low == rank_half {
        if let Ok(dec) = jennrich::jennrich_decompose(phi, seed, tol) {
            return Ok(PipelineResult {
                dec,
                certificate: None,
                path: "slice quotients",
            });
        }
    }
    if d != 4 && !experimental_even_d {
        return Err(Error::OrderUnsupported(d as usize));
    }
    if let Some(file) = basis_arg.strip_prefix("explicit:") {
        let exponents = io::read_basis(&read_input(file)?, n)?;
        let basis = MonomialBasis::new(exponents);
        let outcome = linsys::solve_extension(phi, &basis, seed, tol, 4)?;
        let unique = matches!(outcome.result, linsys::ExtensionResult::Unique(_));
        let assignment = match outcome.result {
            linsys::ExtensionResult::Unique(a) => a,
            linsys::ExtensionResult::Family { particular, .. } => particular,
            linsys::ExtensionResult::Fail(reason) => {
                return Err(Error::staged(
                    "extension solve",
                    Error::InternalMismatch(reason),
                ))
            }
        };
        let h = hankel::hankel(phi);
        let mats = hankel::multiplication_matrices(&h, &basis, &assignment)?;
        let points = hankel::extract_decomposition(&mats, &basis, seed.wrapping_add(1), tol)?;
        let (weights, _) = jennrich::solve_weights(phi, &points);
        let dec = Decomposition { points, weights };
        let residual = jennrich::reconstruction_residual(phi, &dec);
        let cert = linsys::Certificate {
            n,
            r: basis.len(),
            y_count: outcome.y_count,
            e_lin_count: outcome.eq_count,
            rank_a: outcome.rank_a,
            unique,
            residual,
        };
        return Ok(PipelineResult {
            dec,
            certificate: Some(cert),
            path: "linear extension (explicit basis)",
        });
    }
    let (dec, cert) = linsys::decompose_even(phi, seed, tol)?;
    Ok(PipelineResult {
        dec,
        certificate: Some(cert),
        path: "linear extension",
    })
}

fn cmd_decompose(
    io_args: CommonIo,
    size: Option<usize>,
    basis: &str,
    exhaustive: bool,
    experimental_even_d: bool,
) -> Result<ExitCode, Error> {
    let phi = io::read_tensor(&read_input(&io_args.input)?)?;
    let n = phi.n();
    let d = phi.d();

    // conciseness reduction first; randomization and decomposition run in
    // the essential coordinates
    let (count, full_rotation, reduced) = tensor::concise_reduction(&phi, io_args.tol)?;
    let rotation = if count < n + 1 {
        Some(full_rotation)
    } else {
        None
    };
    let target = &reduced;

    let (work, gl) = if io_args.randomize {
        let m = tensor::random_gl(target.n() + 1, io_args.seed ^ 0xD1CE);
        (tensor::apply_gl(target, &m)?, Some(m))
    } else {
        (target.clone(), None)
    };

    let result = decompose_routed(
        &work,
        io_args.seed,
        io_args.tol,
        size,
        basis,
        exhaustive,
        experimental_even_d,
    )?;
    let mut dec = result.dec;
    if let Some(m) = gl {
        let minv = m.try_inverse().ok_or(Error::Singular)?;
        dec = pull_back(&dec, &minv, d)?;
    }
    if let Some(rot) = &rotation {
        dec = embed_back(&dec, rot, n, d)?;
    }
    let residual = jennrich::reconstruction_residual(&phi, &dec);
    if residual > io_args.tol.max(1e-7) {
        return Err(Error::staged(
            "reconstruction",
            Error::ResidualTooLarge {
                residual,
                tol: io_args.tol,
            },
        ));
    }
    write_output(&io_args.output, &io::write_decomposition(&dec))?;
    match result.certificate {
        Some(cert) => println!("{cert}"),
        None => println!(
            "path={} n={} d={} s={} residual={:e}",
            result.path,
            n,
            d,
            dec.size(),
            residual
        ),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_jennrich(io_args: CommonIo) -> Result<ExitCode, Error> {
    let phi = io::read_tensor(&read_input(&io_args.input)?)?;
    let d = phi.d();
    let (work, gl) = if io_args.randomize {
        let m = tensor::random_gl(phi.n() + 1, io_args.seed ^ 0xD1CE);
        (tensor::apply_gl(&phi, &m)?, Some(m))
    } else {
        (phi.clone(), None)
    };
    let mut dec = jennrich::jennrich_decompose(&work, io_args.seed, io_args.tol)?;
    if let Some(m) = gl {
        let minv = m.try_inverse().ok_or(Error::Singular)?;
        dec = pull_back(&dec, &minv, d)?;
    }
    let residual = jennrich::reconstruction_residual(&phi, &dec);
    write_output(&io_args.output, &io::write_decomposition(&dec))?;
    println!(
        "path=slice quotients n={} d={} s={} residual={:e}",
        phi.n(),
        d,
        dec.size(),
        residual
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_monomial(
    degrees: Vec<u32>,
    canonical: bool,
    seed: Option<u64>,
    params: Option<String>,
    output: &str,
) -> Result<ExitCode, Error> {
    let spec = monomial::MonomialSpec::new(degrees)?;
    let choice = if canonical {
        monomial::ParamChoice::Canonical
    } else if let Some(file) = params {
        let text = read_input(&file)?;
        monomial::ParamChoice::Explicit(io::read_params(&text, spec.n())?)
    } else {
        monomial::ParamChoice::Seed(seed.unwrap_or(0))
    };
    let dec = monomial::monomial_decompose(&spec, choice)?;
    let phi = spec.tensor();
    let residual = jennrich::reconstruction_residual(&phi, &dec);
    write_output(output, &io::write_decomposition(&dec))?;
    println!(
        "monomial rank={} parameters={} residual={:e}",
        monomial::monomial_rank(&spec),
        monomial::vsp_dimension(&spec)?,
        residual
    );
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_verify(
    n: usize,
    r: usize,
    prime: u64,
    trials: u64,
    seed: u64,
    e1_only: bool,
    output: &str,
) -> Result<ExitCode, Error> {
    let mut last: Option<FormatVerdict> = None;
    for t in 0..trials.max(1) {
        let source = PointSource::Seed(seed.wrapping_add(t));
        let verdict = if e1_only {
            ff::verify_format_e1(n, r, prime, source)?
        } else {
            ff::verify_format(n, r, prime, source)?
        };
        match verdict {
            FormatVerdict::FullColumnRank(cert) => {
                write_output(output, &io::write_ffcert(&cert))?;
                println!(
                    "full column rank over F_{}: format ({n}, {r}) is efficient for generic tensors (|Y|={}, rank={})",
                    prime, cert.columns, cert.rank
                );
                return Ok(ExitCode::SUCCESS);
            }
            FormatVerdict::NotEnoughEquations { rows, columns } => {
                eprintln!("not enough linear equations: {rows} rows for {columns} variables");
                return Ok(ExitCode::from(3));
            }
            v @ FormatVerdict::Deficient { .. } => last = Some(v),
        }
    }
    if let Some(FormatVerdict::Deficient { rank, columns }) = last {
        eprintln!(
            "deficient at all seeds (rank {rank} of {columns} columns); this certifies nothing"
        );
    }
    Ok(ExitCode::from(2))
}

fn cmd_counts(n: Option<usize>, cparam: Option<usize>, t: Option<f64>) -> Result<ExitCode, Error> {
    if let Some(t) = t {
        let nt = linsys::count_threshold(t)?;
        println!("n_t={nt}");
        return Ok(ExitCode::SUCCESS);
    }
    let (n, cstr) = match (n, cparam) {
        (Some(n), Some(cstr)) => (n, cstr),
        _ => {
            return Err(Error::OutOfRange(
                "counts needs either --t or both --n and --c".into(),
            ))
        }
    };
    let (y, e1) = linsys::count_y_e1(n, cstr)?;
    println!(
        "|Y|={y} |E1|={e1} r={} t*={:.5}",
        linsys::stratum_rank(n, cstr),
        linsys::tstar()
    );
    Ok(ExitCode::SUCCESS)
}
