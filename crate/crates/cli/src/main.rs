use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use tetrablock::analysis::{make_triple, spectral_set_falsifier, FalsifierConfig};
use tetrablock::gallery::GalleryKind;
use tetrablock::geometry::{in_distinguished_boundary, in_tetrablock, TetraPoint};
use tetrablock::lifting::{lift_block_identities, tetra_product_lift, verify_lift};
use tetrablock::operator_core::ToleranceConfig;
use tetrablock_cli::{load, run_dossier, DossierConfig, GalleryOptions, InputError, LoadedInput, Source};

const EXIT_INPUT: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(name = "tetra", version, about = "Dossiers for commuting operator triples on the tetrablock")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SourceArgs {
    /// JSON file or `gallery:NAME`
    input: String,
    /// Truncation degree for Hardy-space gallery entries
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dimension for random gallery families
    #[arg(long, default_value_t = 4)]
    dim: usize,
    /// Residual tolerance
    #[arg(long)]
    tol: Option<f64>,
}

impl SourceArgs {
    fn tolerances(&self) -> ToleranceConfig {
        let mut tol = ToleranceConfig::default();
        if let Some(t) = self.tol {
            tol.residual_tol = t;
        }
        tol
    }

    fn load(&self) -> Result<LoadedInput, InputError> {
        let source: Source = self.input.parse()?;
        load(
            &source,
            &GalleryOptions {
                truncation: self.n,
                seed: self.seed,
                dim: self.dim,
            },
        )
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the full analysis pipeline
    Dossier {
        #[command(flatten)]
        source: SourceArgs,
        /// Lift verification degree
        #[arg(long, default_value_t = 4)]
        degree: usize,
        #[arg(long, default_value_t = 200)]
        polys: usize,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        /// Write the JSON dossier here
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Search for a polynomial violating the spectral-set inequality
    Falsify {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = 200)]
        polys: usize,
        #[arg(long, default_value_t = 20_000)]
        samples: usize,
        #[arg(long, default_value_t = 3)]
        degree: usize,
        #[arg(long, default_value_t = 0.05)]
        margin: f64,
    },
    /// Build and verify an isometric lift of (T1, T2, T1 T2)
    Lift {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long, default_value_t = 6)]
        levels: usize,
        #[arg(long, default_value_t = 4)]
        degree: usize,
    },
    /// Scalar membership tests
    Geometry {
        #[command(subcommand)]
        command: GeometryCommand,
    },
    /// Named examples and random families
    Gallery {
        #[command(subcommand)]
        command: GalleryCommand,
    },
}

#[derive(Subcommand)]
enum GeometryCommand {
    /// Test a point (x1, x2, x3) given as six real numbers
    #[command(allow_negative_numbers = true)]
    Point {
        x1r: f64,
        x1i: f64,
        x2r: f64,
        x2i: f64,
        x3r: f64,
        x3i: f64,
        /// Test the closed tetrablock
        #[arg(long)]
        closed: bool,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

#[derive(Subcommand)]
enum GalleryCommand {
    List,
}

enum Failure {
    Input(String),
    Internal(String),
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        match e {
            InputError::Core(core) if core.is_internal() => Failure::Internal(core.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

impl From<tetrablock::Error> for Failure {
    fn from(e: tetrablock::Error) -> Self {
        if e.is_internal() {
            Failure::Internal(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal check failed: {msg}");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Dossier {
            source,
            degree,
            polys,
            samples,
            json,
        } => {
            let config = DossierConfig {
                tol: source.tolerances(),
                degree,
                falsifier: FalsifierConfig {
                    n_polys: polys,
                    n_samples: samples,
                    seed: source.seed,
                    ..FalsifierConfig::default()
                },
                ..DossierConfig::default()
            };
            config.validate()?;
            let input = source.load()?;
            let report = run_dossier(&input, &config);
            print!("{}", report.render_text());
            if let Some(path) = json {
                std::fs::write(&path, report.to_json())
                    .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display())))?;
            }
            if report.has_internal_failure() {
                return Err(Failure::Internal("a pipeline stage reported an internal failure".into()));
            }
            Ok(())
        }
        Command::Falsify {
            source,
            polys,
            samples,
            degree,
            margin,
        } => {
            let tol = source.tolerances();
            let input = source.load()?;
            let triple = make_triple(input.t1, input.t2, input.t, &tol)?;
            let config = FalsifierConfig {
                degree,
                n_polys: polys,
                n_samples: samples,
                margin,
                seed: source.seed,
            };
            match spectral_set_falsifier(&triple, &config)? {
                Some(c) => {
                    println!(
                        "certificate: polynomial #{} with ‖p(T)‖ = {:.6} > sup {:.6} (ratio {:.4})",
                        c.poly_index, c.operator_norm, c.sup_estimate, c.ratio
                    );
                    for (a, b, e, coef) in &c.terms {
                        println!("  ({:+.6} {:+.6}i) x1^{a} x2^{b} x3^{e}", coef.re, coef.im);
                    }
                }
                None => println!("no violation found ({polys} polynomials, {samples} samples)"),
            }
            Ok(())
        }
        Command::Lift { source, levels, degree } => {
            let tol = source.tolerances();
            let input = source.load()?;
            let triple = make_triple(input.t1, input.t2, input.t, &tol)?;
            let product = tetra_product_lift(&triple.t1, &triple.t2, levels, &tol)?;
            let lift = &product.lift;
            let d = &lift.diagnostics;
            println!(
                "lift on {} dimensions: {} levels of dimension {}, protected degree {}{}",
                lift.space_dim(),
                lift.levels,
                lift.level_dim,
                lift.protected_degree,
                if d.padded { " (levels padded to even)" } else { "" }
            );
            println!(
                "commutation {:.3e}, isometry V1 {:.3e} V2 {:.3e} V {:.3e}, lift property {:.3e}, pairing {:.3e}",
                d.commutation, d.isometry_v1, d.isometry_v2, d.isometry_v, d.lift_property, d.pairing_identity
            );
            println!(
                "tetrablock isometry on the protected range: {}",
                product.isometry.is_isometry()
            );
            let residual = verify_lift(&triple, lift, degree)?;
            println!("verify_lift at degree {degree}: {residual:.3e}");
            match lift_block_identities(&triple, lift, &tol) {
                Ok((report, _)) => {
                    for e in &report.entries {
                        println!("  {:<36} {:.3e}", e.name, e.residual.unwrap_or(0.0));
                    }
                }
                Err(e) => println!("block identities not evaluated: {e}"),
            }
            if residual > tol.residual_tol {
                return Err(Failure::Internal(format!(
                    "lift residual {residual:.3e} exceeds {:.1e}",
                    tol.residual_tol
                )));
            }
            Ok(())
        }
        Command::Geometry {
            command:
                GeometryCommand::Point {
                    x1r,
                    x1i,
                    x2r,
                    x2i,
                    x3r,
                    x3i,
                    closed,
                    tol,
                },
        } => {
            let p = TetraPoint::new(Complex64::new(x1r, x1i), Complex64::new(x2r, x2i), Complex64::new(x3r, x3i));
            let m = in_tetrablock(&p, closed, tol)?;
            let region = if closed { "closed tetrablock" } else { "tetrablock" };
            println!("in {region}: {}", m.member);
            println!("minimal witness norm: {:.12}", m.witness_norm);
            let w = &m.witness;
            println!(
                "witness: [[{}, {}], [{}, {}]]",
                w[(0, 0)],
                w[(0, 1)],
                w[(1, 0)],
                w[(1, 1)]
            );
            println!("distinguished boundary: {}", in_distinguished_boundary(&p, tol));
            Ok(())
        }
        Command::Gallery {
            command: GalleryCommand::List,
        } => {
            for kind in GalleryKind::ALL {
                println!("gallery:{:<18} {}", kind.name(), kind.description());
            }
            Ok(())
        }
    }
}
