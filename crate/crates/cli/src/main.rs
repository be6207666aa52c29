//! `metsob`: generate example domains, build Whitney covers, compute traces
//! and extensions, and run the bundled experiments.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use metsob_core::constants;
use metsob_core::domains::{generate, DomainKind, DomainSpec};
use metsob_core::experiments::{self, ExperimentConfig, ExperimentId, FreezeConfig};
use metsob_core::extension::{extend_besov, extend_lp, ExtensionMode};
use metsob_core::functionals::lp_norm;
use metsob_core::report::write_json;
use metsob_core::space::{io, Region};
use metsob_core::trace::trace_field;
use metsob_core::whitney::{build_cover, check_cover, load_cover, save_cover};

#[derive(Parser)]
#[command(name = "metsob", version, about)]
struct Cli {
    /// Worker threads for the parallel sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized corpora.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an example domain as a point-cloud file.
    Gen {
        /// square | cusp | weighted-square | disc | sharpness-disc
        #[arg(long)]
        domain: String,
        #[arg(long, default_value_t = 64)]
        res: u32,
        /// Boundary samples per unit arclength (default: same as --res).
        #[arg(long)]
        bres: Option<u32>,
        /// Field parameter carried by the disc examples.
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build (and optionally verify) a Whitney cover.
    Whitney {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Run the independent invariant checker after building.
        #[arg(long)]
        check: bool,
    },
    /// Compute the boundary trace of an interior field.
    Trace {
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        field: PathBuf,
        #[arg(long)]
        p: f64,
        /// Boundary codimension used for the reported smoothness.
        #[arg(long)]
        theta: f64,
        #[arg(long, default_value_t = 24)]
        k_max: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Extend boundary data into the interior.
    Extend {
        /// besov | lp
        #[arg(long)]
        mode: String,
        #[arg(long)]
        space: PathBuf,
        #[arg(long)]
        cover: PathBuf,
        #[arg(long)]
        bfield: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        out: PathBuf,
        /// Also dump the extended interior field here.
        #[arg(long)]
        field_out: Option<PathBuf>,
    },
    /// Run a bundled experiment end to end.
    Run {
        /// e1 | e2 | e3 | e4 | e5 | e6
        #[arg(long)]
        experiment: String,
        #[arg(long, value_delimiter = ',')]
        resolutions: Vec<u32>,
        #[arg(long, default_value_t = 2.5)]
        p: f64,
        #[arg(long, default_value_t = 0.25)]
        eps: f64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Measure the comparison constants on the reference corpora and write
    /// the constants file.
    Freeze {
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        corpus: usize,
    },
    /// Re-measure a fast subset of constants and verify drift stays within
    /// the slack.
    Check {
        #[arg(long)]
        constants: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("metsob: could not set thread pool: {e}");
            return ExitCode::FAILURE;
        }
    }
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("metsob: {e}");
            ExitCode::FAILURE
        }
    }
}

fn parse_domain(domain: &str, res: u32, bres: Option<u32>, eps: f64) -> metsob_core::Result<DomainSpec> {
    let kind = match domain {
        "square" => DomainKind::UnitSquareLebesgue,
        "cusp" => DomainKind::CuspParabola,
        "weighted-square" => DomainKind::WeightedSquare,
        "disc" => DomainKind::WeightedDisc { eps },
        "sharpness-disc" => DomainKind::SharpnessDisc {
            n: (2.0 / eps).ceil() as u32,
            eps,
        },
        other => {
            return Err(metsob_core::Error::InvalidParameter(format!(
                "unknown domain `{other}`"
            )))
        }
    };
    let mut spec = DomainSpec::new(kind, res);
    if let Some(b) = bres {
        spec.boundary_resolution = b;
    }
    Ok(spec)
}

fn dispatch(cli: Cli) -> metsob_core::Result<()> {
    match cli.command {
        Command::Gen {
            domain,
            res,
            bres,
            eps,
            out,
        } => {
            let spec = parse_domain(&domain, res, bres, eps)?;
            let space = generate(&spec)?;
            io::save_space(&space, &out)?;
            eprintln!(
                "wrote {} ({} interior, {} boundary points)",
                out.display(),
                space.ids(Region::Interior).len(),
                space.ids(Region::Boundary).len()
            );
            Ok(())
        }
        Command::Whitney { space, out, check } => {
            let space = io::load_space(&space)?;
            let cover = build_cover(&space)?;
            save_cover(&cover, &out)?;
            eprintln!("wrote {} ({} balls, j0 = {})", out.display(), cover.n_balls(), cover.j0);
            if check {
                let report = check_cover(&space, &cover)?;
                if report.violations.is_empty() {
                    eprintln!(
                        "cover ok: overlap {} partition deviation {:.3e}",
                        report.max_overlap, report.max_partition_deviation
                    );
                } else {
                    return Err(metsob_core::Error::InvalidParameter(format!(
                        "cover invariants violated: {}",
                        report.violations.join("; ")
                    )));
                }
            }
            Ok(())
        }
        Command::Trace {
            space,
            field,
            p,
            theta,
            k_max,
            out,
        } => {
            let space = io::load_space(&space)?;
            let u = io::load_field(&space, Region::Interior, &field)?;
            let smoothness = 1.0 - theta / p;
            let report = trace_field(&space, &u, p, k_max, &[smoothness])?;
            write_json(&out, "trace", report)?;
            eprintln!("wrote {}", out.display());
            Ok(())
        }
        Command::Extend {
            mode,
            space,
            cover,
            bfield,
            p,
            out,
            field_out,
        } => {
            let space = io::load_space(&space)?;
            let cover = load_cover(&space, &cover)?;
            let f = io::load_field(&space, Region::Boundary, &bfield)?;
            match mode.as_str() {
                "besov" => {
                    let ef = extend_besov(&space, &cover, &f)?;
                    let rt = metsob_core::extension::roundtrip_error(
                        &space,
                        &cover,
                        &f,
                        p,
                        ExtensionMode::Besov,
                    )?;
                    #[derive(serde::Serialize)]
                    struct Out {
                        extension_lp: f64,
                        data_lp: f64,
                        roundtrip_error: f64,
                    }
                    write_json(
                        &out,
                        "extend-besov",
                        Out {
                            extension_lp: lp_norm(&space, &ef, p),
                            data_lp: lp_norm(&space, &f, p),
                            roundtrip_error: rt,
                        },
                    )?;
                    if let Some(fo) = field_out {
                        io::save_field(&space, &ef, &fo)?;
                    }
                }
                "lp" => {
                    let rep = extend_lp(&space, &cover, &f, p, 12)?;
                    if let Some(fo) = field_out {
                        io::save_field(&space, &rep.extension, &fo)?;
                    }
                    write_json(&out, "extend-lp", rep)?;
                }
                other => {
                    return Err(metsob_core::Error::InvalidParameter(format!(
                        "unknown extension mode `{other}`"
                    )))
                }
            }
            eprintln!("wrote {}", out.display());
            Ok(())
        }
        Command::Run {
            experiment,
            resolutions,
            p,
            eps,
            out_dir,
        } => {
            let id = ExperimentId::parse(&experiment)?;
            let resolutions = if resolutions.is_empty() {
                match id {
                    ExperimentId::E1CuspTrace => vec![64, 128, 256],
                    ExperimentId::E2WeightedSquare => vec![64, 128],
                    ExperimentId::E3WeightedDiscNoTrace => vec![64, 96],
                    ExperimentId::E4SharpnessDisc => vec![64, 96],
                    ExperimentId::E5RoundTrip => vec![64, 128, 256],
                    ExperimentId::E6InequalitySuite => vec![128],
                }
            } else {
                resolutions
            };
            let cfg = ExperimentConfig {
                id,
                resolutions,
                p,
                eps,
                seed: cli.seed,
                out_dir,
            };
            experiments::run(&cfg)?;
            eprintln!("wrote {}", cfg.out_dir.join("report.json").display());
            Ok(())
        }
        Command::Freeze { out, corpus } => {
            let path = out.unwrap_or_else(constants::default_path);
            experiments::freeze_to(
                &path,
                &FreezeConfig {
                    corpus_size: corpus,
                    seed: cli.seed,
                },
            )?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        Command::Check { constants: path } => {
            let path = path.unwrap_or_else(constants::default_path);
            let store = constants::ConstantsStore::load(&path)?;
            let checked = experiments::check_against(&store)?;
            eprintln!("constants within slack: {}", checked.join(", "));
            Ok(())
        }
    }
}
