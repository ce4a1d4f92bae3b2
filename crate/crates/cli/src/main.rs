mod state_arg;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use cvbasis::extremal::{
    cumulative_direct, cumulative_inverse, eigenanalysis, qutrit_form, scan_qutrit, write_coefficients_csv,
    write_spectra_csv,
};
use cvbasis::fock::{coherent_required_cutoff, make_state};
use cvbasis::multipole::{
    equispaced_phases, multipole_table, recover_inverse_multipoles, simulate_quadrature_moments, Basis,
    MomentNoise, SUPPORT_EPS,
};
use cvbasis::verify::{run_suite, Suite};
use cvbasis::{DensityMatrix, Error, Result, StateSpec};

use state_arg::parse_state;

#[derive(Parser, Debug)]
#[command(name = "cvbasis", version, about = "Covariant operator bases, multipoles and extremal analysis for one bosonic mode")]
struct Cli {
    /// Worker threads for parallel scans (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Output {
    /// Output file; relative paths resolve against CVBASIS_OUT_DIR when set.
    /// Without --out, writes to CVBASIS_OUT_DIR/<subcommand>.csv if that is
    /// set, else to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct StateArgs {
    /// fock:N | coherent:a+bi | cat:a+bi,BRANCHES[,amp...] | dyad:M,N,a+bi | file:PATH.json
    #[arg(long)]
    state: String,

    /// Fock cutoff N (default: the state's support plus m2).
    #[arg(long)]
    cutoff: Option<usize>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum TableBasis {
    Inverse,
    Direct,
    InverseWeyl,
    DirectWeyl,
}

impl From<TableBasis> for Basis {
    fn from(b: TableBasis) -> Self {
        match b {
            TableBasis::Inverse => Basis::InverseNormal,
            TableBasis::Direct => Basis::DirectNormal,
            TableBasis::InverseWeyl => Basis::InverseWeyl,
            TableBasis::DirectWeyl => Basis::DirectWeyl,
        }
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ProfileBasis {
    Inverse,
    Direct,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Multipole table. CSV columns: k2,q2,re,im,abs (k2 = 2K, q2 = 2q).
    Multipoles {
        #[command(flatten)]
        state: StateArgs,
        /// Largest 2K.
        #[arg(long)]
        m2: u32,
        #[arg(long, value_enum, default_value = "inverse")]
        basis: TableBasis,
        #[command(flatten)]
        output: Output,
    },
    /// Cumulative distribution profile. CSV columns: m2,value.
    Cumulative {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        m2: u32,
        #[arg(long, value_enum, default_value = "inverse")]
        basis: ProfileBasis,
        #[command(flatten)]
        output: Output,
    },
    /// Largest-magnitude eigenvalues of the joint operator for every order up
    /// to m2/2. CSV columns: M,lambda_rank,lambda,class.
    Eigs {
        #[arg(long)]
        m2: u32,
        /// Cutoff for every order (default: 2M for each order).
        #[arg(long)]
        cutoff: Option<usize>,
        #[arg(long, default_value_t = 8)]
        top: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Qutrit-form coefficients for 2 <= M <= m2/2. CSV columns:
    /// M,p0^2,p1^2,p2^2,p0*p1,p0*p2,p1*p2,p1*sqrt(p0*p2).
    Coeffs {
        #[arg(long)]
        m2: u32,
        #[command(flatten)]
        output: Output,
    },
    /// Cumulative multipoles on the qutrit simplex. CSV columns: p0,p1,value.
    ScanQutrit {
        #[arg(long)]
        m2: u32,
        #[arg(long, default_value_t = 50)]
        grid: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Recovers <T_Kq> from simulated quadrature moments. CSV columns:
    /// k2,q2,re,im,abs; the per-power fit report goes to stderr.
    Homodyne {
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        m2: u32,
        /// Number of equispaced phases in [0, pi).
        #[arg(long, default_value_t = 16)]
        phases: usize,
        /// Standard deviation of Gaussian noise added to each moment.
        #[arg(long, requires = "seed")]
        noise: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        output: Output,
    },
    /// Runs verification suites; exits nonzero if any check fails.
    Verify {
        /// orthonormality | purity | appendixC | closed-forms | reconstruction |
        /// structure | homodyne | weyl | extremal | all
        #[arg(long, default_value = "all")]
        suite: String,
        /// Tolerance for identity checks; reference-value bands are fixed.
        #[arg(long)]
        tol: Option<f64>,
    },
}

fn natural_cutoff(spec: &StateSpec) -> usize {
    match spec {
        StateSpec::Fock(n) => *n,
        StateSpec::Coherent(alpha) | StateSpec::Cat { alpha, .. } => coherent_required_cutoff(*alpha),
        StateSpec::Dyad { m, n, .. } => (*m).max(*n),
        StateSpec::Explicit(op) => op.cutoff(),
    }
}

fn build_state(args: &StateArgs, m2: u32) -> Result<DensityMatrix> {
    let spec = parse_state(&args.state)?;
    let cutoff = args.cutoff.unwrap_or_else(|| natural_cutoff(&spec) + m2 as usize);
    make_state(&spec, cutoff)
}

/// Default cutoff leaves room for the inverse-multipole rule `n0 + 2K <= N`
/// even when the support is read after thresholding.
fn with_room(rho: DensityMatrix, args: &StateArgs, m2: u32) -> DensityMatrix {
    let need = rho.support(SUPPORT_EPS) + m2 as usize;
    if args.cutoff.is_none() && need > rho.cutoff() {
        rho.embed(need)
    } else {
        rho
    }
}

fn open_output(output: &Output, default_name: &str) -> Result<Box<dyn Write>> {
    let dir = std::env::var_os("CVBASIS_OUT_DIR").map(PathBuf::from);
    let path = match (&output.out, dir) {
        (Some(p), Some(d)) if p.is_relative() => Some(d.join(p)),
        (Some(p), _) => Some(p.clone()),
        (None, Some(d)) => Some(d.join(format!("{default_name}.csv"))),
        (None, None) => None,
    };
    Ok(match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|x| !x.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            Box::new(BufWriter::new(File::create(p)?))
        }
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Multipoles { state, m2, basis, output } => {
            let rho = with_room(build_state(&state, m2)?, &state, m2);
            let table = multipole_table(&rho, m2, basis.into())?;
            table.write_csv(open_output(&output, "multipoles")?, true)?;
        }
        Command::Cumulative { state, m2, basis, output } => {
            let rho = with_room(build_state(&state, m2)?, &state, m2);
            let profile = match basis {
                ProfileBasis::Inverse => cumulative_inverse(&rho, m2),
                ProfileBasis::Direct => cumulative_direct(&rho, m2)?,
            };
            profile.write_csv(open_output(&output, "cumulative")?)?;
        }
        Command::Eigs { m2, cutoff, top, output } => {
            let spectra = (0..=m2)
                .map(|k2| eigenanalysis(k2, cutoff.unwrap_or(k2 as usize), top))
                .collect::<Result<Vec<_>>>()?;
            if let Some(s) = spectra.last() {
                eprintln!(
                    "M = {}: vacuum ratio {:.6}, |11> overlap {:.6}, antisymmetric overlap {:.9}",
                    s.m2 as f64 / 2.0,
                    s.vacuum_ratio,
                    s.one_one_overlap,
                    s.antisymmetric_overlap
                );
            }
            write_spectra_csv(&spectra, open_output(&output, "eigs")?)?;
        }
        Command::Coeffs { m2, output } => {
            let forms = (4..=m2).map(qutrit_form).collect::<Result<Vec<_>>>()?;
            if let Some(f) = forms.last() {
                eprintln!("probe design condition number {:.3e}", f.condition);
            }
            write_coefficients_csv(&forms, open_output(&output, "coeffs")?)?;
        }
        Command::ScanQutrit { m2, grid, output } => {
            let scan = scan_qutrit(m2, grid)?;
            eprintln!("argmax at p0 = {}, p1 = {}: {}", scan.argmax.0, scan.argmax.1, scan.argmax.2);
            scan.write_csv(open_output(&output, "scan-qutrit")?)?;
        }
        Command::Homodyne {
            state,
            m2,
            phases,
            noise,
            seed,
            output,
        } => {
            let rho = with_room(build_state(&state, m2)?, &state, m2);
            let noise = match (noise, seed) {
                (Some(sigma), Some(seed)) => Some(MomentNoise { sigma, seed }),
                (Some(_), None) => return Err(Error::Unsupported("--noise requires --seed".into())),
                _ => None,
            };
            let set = simulate_quadrature_moments(&rho, &equispaced_phases(phases), m2, noise)?;
            let rec = recover_inverse_multipoles(&set, m2)?;
            eprintln!("j,condition,residual_rms");
            for f in &rec.fits {
                eprintln!("{},{:e},{:e}", f.j, f.condition, f.residual_rms);
            }
            rec.table.write_csv(open_output(&output, "homodyne")?, true)?;
        }
        Command::Verify { suite, tol } => {
            let suites: Vec<Suite> = if suite == "all" { Suite::ALL.to_vec() } else { vec![suite.parse()?] };
            let mut ok = true;
            for s in suites {
                let report = run_suite(s, tol)?;
                println!("{report}");
                ok &= report.passed();
            }
            return Ok(ok);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
