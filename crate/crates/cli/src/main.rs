use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use cuberamsey::coloring::{verify_red_cube, ColoringOracle, Descriptor, Embedding};
use cuberamsey::embed::{baseline_embed, greedy_embed, EmbedError};
use cuberamsey::pipeline::{run_pipeline, Outcome, PipelineConfig};
use cuberamsey::preprocess::{check_degree_bounds, preprocess, FamilyForest};
use cuberamsey::ramsey_tools::{
    brute_force_arrow, lemma41_bounds, lower_bound_certificate, ArrowResult, Pattern, RamseyInstance,
};
use cuberamsey::refine::{prune, PruneError, PrunedAssignment};
use cuberamsey::regime::{RegimeError, RegimeParams};
use cuberamsey::separator::{degeneracy, recursive_decompose, rounds_for, BfsLayer, GridCut, SeparatorOracle, SimpleGraph, TreeCentroid};
use cuberamsey::tiling::{audit, Checkpoint, StepOutcome, TilingRun};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "cuberamsey", version, about = "Red hypercubes in two-colorings of K_N")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Materialize a coloring descriptor as an explicit matrix file.
    Gen {
        /// Coloring descriptor (TOML).
        descriptor: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Build the leveled family and write it as JSON.
    Preprocess {
        config: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        /// Also run the degree-bound diagnostics.
        #[arg(long)]
        degrees: bool,
    },
    /// Run the tiling process; writes a checkpoint and an event log.
    Tile {
        config: PathBuf,
        #[arg(long)]
        forest: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Prune the deepest-level sets of a completed tiling.
    Prune {
        config: PathBuf,
        #[arg(long)]
        forest: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Greedy embedding into pruned sets, or the plain baseline.
    Embed {
        config: PathBuf,
        #[arg(long, required_unless_present = "baseline")]
        pruned: Option<PathBuf>,
        #[arg(long, required_unless_present = "baseline")]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        baseline: bool,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Check an embedding against a coloring.
    Verify {
        /// Coloring descriptor (TOML).
        descriptor: PathBuf,
        embedding: PathBuf,
    },
    /// All stages end to end; prints the run report.
    Pipeline {
        config: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        timings: Option<PathBuf>,
        /// Directory for forest, checkpoint, events, pruned sets and embedding.
        #[arg(long)]
        artifacts: Option<PathBuf>,
    },
    /// Exhaustive arrowing check for tiny instances.
    RamseyBrute {
        /// Cube dimension of the red pattern (≤ 2).
        #[arg(long, default_value_t = 1)]
        cube: u8,
        #[arg(long, default_value_t = 3)]
        s: u8,
        #[arg(long = "N")]
        n_vertices: u8,
    },
    /// Sum bounds and lower-bound certificates.
    Bounds {
        #[arg(long)]
        s: u32,
        /// Also certify the block construction for this n.
        #[arg(long)]
        lower_bound_n: Option<u32>,
    },
    /// Degeneracy and recursive separator decomposition of a graph file.
    Separator {
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = OracleKind::Bfs)]
        oracle: OracleKind,
        /// Grid width, for the grid oracle.
        #[arg(long)]
        width: Option<usize>,
        #[arg(long, default_value_t = 0.1)]
        eta: f64,
        #[arg(long)]
        depth: Option<u32>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleKind {
    Tree,
    Grid,
    Bfs,
}

#[derive(Debug)]
struct Failure {
    outcome: Outcome,
    message: String,
}

impl Failure {
    fn config(e: impl std::fmt::Display) -> Self {
        Failure {
            outcome: Outcome::ConfigError,
            message: e.to_string(),
        }
    }

    fn honest(e: impl std::fmt::Display) -> Self {
        Failure {
            outcome: Outcome::HonestFailure,
            message: e.to_string(),
        }
    }

    fn breach(e: impl std::fmt::Display) -> Self {
        Failure {
            outcome: Outcome::InvariantBreach,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<Outcome, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(Failure::breach)?;
    fs::write(path, text + "\n").map_err(|e| Failure::config(format!("{}: {e}", path.display())))
}

fn print_json<T: Serialize>(value: &T) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

struct Setup {
    config: PipelineConfig,
    oracle: ColoringOracle,
    params: RegimeParams,
}

fn setup(path: &Path) -> Result<Setup, Failure> {
    let config = PipelineConfig::from_toml(&read(path)?).map_err(Failure::config)?;
    let oracle = config.oracle().map_err(Failure::config)?;
    let params = config.params(oracle.n() as u64).map_err(|e| match e {
        cuberamsey::pipeline::ConfigError::Regime(r @ RegimeError::Refused { .. }) => Failure {
            outcome: Outcome::Refused,
            message: r.to_string(),
        },
        e => Failure::config(e),
    })?;
    if let Some(stamp) = params.stamp() {
        log::warn!("{stamp}");
    }
    Ok(Setup { config, oracle, params })
}

fn load_run(path: &Path) -> Result<TilingRun, Failure> {
    let cp = Checkpoint::load(path).map_err(Failure::config)?;
    TilingRun::from_checkpoint(&cp).map_err(Failure::breach)
}

fn make_oracle(kind: OracleKind, width: Option<usize>, g: &SimpleGraph) -> Box<dyn SeparatorOracle> {
    match kind {
        OracleKind::Tree => Box::new(TreeCentroid),
        OracleKind::Grid => Box::new(GridCut {
            width: width.unwrap_or_else(|| (g.n() as f64).sqrt().round() as usize),
        }),
        OracleKind::Bfs => Box::new(BfsLayer),
    }
}

fn run(cmd: Cmd) -> CmdResult {
    match cmd {
        Cmd::Gen { descriptor, out } => {
            let d = Descriptor::from_toml(&read(&descriptor)?).map_err(Failure::config)?;
            let o = ColoringOracle::from_descriptor(&d).map_err(Failure::config)?;
            o.to_matrix().save(&out).map_err(Failure::config)?;
            log::info!("wrote {} vertices to {}", o.n(), out.display());
            Ok(Outcome::VerifiedSuccess)
        }
        Cmd::Preprocess { config, out, degrees } => {
            let st = setup(&config)?;
            let forest = preprocess(&st.oracle, &st.params, &st.config.finder, st.config.strategy).map_err(Failure::breach)?;
            forest.validate(&st.params).map_err(Failure::breach)?;
            write_json(&out, &forest)?;
            print_json(&cuberamsey::pipeline::family_stats(&forest));
            if degrees {
                let rep = check_degree_bounds(&st.oracle, &forest, &st.params, st.config.degree_check_budget);
                print_json(&rep);
            }
            Ok(Outcome::VerifiedSuccess)
        }
        Cmd::Tile {
            config,
            forest,
            out,
            events,
        } => {
            let st = setup(&config)?;
            let forest: FamilyForest = read_json(&forest)?;
            forest.validate(&st.params).map_err(Failure::breach)?;
            let mut tr = TilingRun::new(&st.params).map_err(Failure::breach)?;
            let outcome = tr.run(&st.oracle, &forest, &st.params, st.config.max_steps).map_err(Failure::breach)?;
            tr.checkpoint().save(&out).map_err(Failure::config)?;
            if let Some(p) = events {
                let f = fs::File::create(&p).map_err(|e| Failure::config(format!("{}: {e}", p.display())))?;
                tr.write_events(std::io::BufWriter::new(f)).map_err(Failure::config)?;
            }
            match outcome {
                StepOutcome::Complete => {
                    let rep = audit(&st.oracle, &tr, &forest, &st.params);
                    print_json(&rep);
                    if rep.pass {
                        Ok(Outcome::VerifiedSuccess)
                    } else {
                        Err(Failure::breach("tiling audit failed"))
                    }
                }
                StepOutcome::Failure(f) => {
                    print_json(&f);
                    Err(Failure::honest("tiling found no admissible cube"))
                }
                StepOutcome::Inserted { .. } => Err(Failure::breach("run stopped mid-way")),
            }
        }
        Cmd::Prune {
            config,
            forest,
            checkpoint,
            out,
        } => {
            let st = setup(&config)?;
            let forest: FamilyForest = read_json(&forest)?;
            let tr = load_run(&checkpoint)?;
            let pruned = prune(&st.oracle, &tr, &forest, &st.params).map_err(|e| match e {
                PruneError::TooMuchRemoved { .. } => Failure::honest(e),
                e => Failure::breach(e),
            })?;
            write_json(&out, &pruned)?;
            print_json(&pruned.certification);
            if pruned.certification.pass {
                Ok(Outcome::VerifiedSuccess)
            } else {
                Err(Failure::honest("max-degree condition not certified"))
            }
        }
        Cmd::Embed {
            config,
            pruned,
            checkpoint,
            baseline,
            out,
        } => {
            let st = setup(&config)?;
            let e = if baseline {
                baseline_embed(&st.oracle, st.params.n).map_err(|e| match e {
                    EmbedError::Refused { .. } => Failure {
                        outcome: Outcome::Refused,
                        message: e.to_string(),
                    },
                    e => Failure::breach(e),
                })?
            } else {
                let pruned: PrunedAssignment = read_json(pruned.as_deref().expect("required by clap"))?;
                let tr = load_run(checkpoint.as_deref().expect("required by clap"))?;
                let rep = greedy_embed(&st.oracle, &pruned, &tr, &st.params).map_err(|e| match e {
                    EmbedError::NoImage { .. } => Failure::honest(e),
                    e => Failure::breach(e),
                })?;
                print_json(&rep.cubes);
                rep.embedding
            };
            write_json(&out, &e)?;
            let v = verify_red_cube(&st.oracle, &e);
            print_json(&v);
            if v.is_valid() {
                Ok(Outcome::VerifiedSuccess)
            } else {
                Err(Failure::breach("embedding failed verification"))
            }
        }
        Cmd::Verify { descriptor, embedding } => {
            let d = Descriptor::from_toml(&read(&descriptor)?).map_err(Failure::config)?;
            let o = ColoringOracle::from_descriptor(&d).map_err(Failure::config)?;
            let e: Embedding = read_json(&embedding)?;
            let v = verify_red_cube(&o, &e);
            print_json(&v);
            if v.is_valid() {
                Ok(Outcome::VerifiedSuccess)
            } else {
                Err(Failure::honest("not a red copy of Q_n"))
            }
        }
        Cmd::Pipeline {
            config,
            report,
            timings,
            artifacts,
        } => {
            let cfg = PipelineConfig::from_toml(&read(&config)?).map_err(Failure::config)?;
            let res = run_pipeline(&cfg);
            let json = res.report_json();
            match report {
                Some(p) => fs::write(&p, json + "\n").map_err(|e| Failure::config(format!("{}: {e}", p.display())))?,
                None => println!("{json}"),
            }
            for (stage, secs) in &res.timings {
                log::info!("{stage}: {secs:.3} s");
            }
            if let Some(p) = timings {
                let map: serde_json::Map<String, serde_json::Value> =
                    res.timings.iter().map(|(k, v)| (k.clone(), serde_json::json!(v))).collect();
                write_json(&p, &map)?;
            }
            if let Some(dir) = artifacts {
                fs::create_dir_all(&dir).map_err(Failure::config)?;
                if let Some(f) = &res.forest {
                    write_json(&dir.join("forest.json"), f)?;
                }
                if let Some(c) = &res.checkpoint {
                    write_json(&dir.join("checkpoint.json"), c)?;
                }
                if let Some(r) = &res.events {
                    let f = fs::File::create(dir.join("events.jsonl")).map_err(Failure::config)?;
                    r.write_events(std::io::BufWriter::new(f)).map_err(Failure::config)?;
                }
                if let Some(p) = &res.pruned {
                    write_json(&dir.join("pruned.json"), p)?;
                }
                if let Some(e) = &res.embedding {
                    write_json(&dir.join("embedding.json"), e)?;
                }
            }
            if let Some(m) = &res.report.message {
                eprintln!("{m}");
            }
            Ok(res.report.outcome)
        }
        Cmd::RamseyBrute { cube, s, n_vertices } => {
            let inst = RamseyInstance {
                pattern: Pattern::Cube { n: cube },
                s,
                n_vertices,
            };
            let r = brute_force_arrow(&inst).map_err(Failure::config)?;
            print_json(&r);
            match r {
                ArrowResult::Witness { red_edges } if !cuberamsey::ramsey_tools::avoids_both(&inst, &red_edges) => {
                    Err(Failure::breach("witness does not avoid both patterns"))
                }
                _ => Ok(Outcome::VerifiedSuccess),
            }
        }
        Cmd::Bounds { s, lower_bound_n } => {
            let rep = lemma41_bounds(s).map_err(Failure::config)?;
            print_json(&rep);
            let mut ok = rep.routes_agree && rep.bound_holds;
            if let Some(n) = lower_bound_n {
                let c = lower_bound_certificate(s, n).map_err(Failure::config)?;
                print_json(&c);
                ok &= c.holds();
            }
            if ok {
                Ok(Outcome::VerifiedSuccess)
            } else {
                Err(Failure::breach("bound checks disagree"))
            }
        }
        Cmd::Separator {
            graph,
            oracle,
            width,
            eta,
            depth,
        } => {
            let g = SimpleGraph::parse(&read(&graph)?).map_err(Failure::config)?;
            let (k, _) = degeneracy(&g);
            let o = make_oracle(oracle, width, &g);
            let depth = depth.unwrap_or_else(|| rounds_for(eta));
            let d = recursive_decompose(&g, o.as_ref(), depth).map_err(Failure::breach)?;
            print_json(&serde_json::json!({
                "n": g.n(),
                "m": g.m(),
                "degeneracy": k,
                "depth": d.depth,
                "oracle": d.oracle,
                "separator_size": d.separator.len(),
                "parts": d.parts.len(),
                "max_part": d.max_part(),
                "rounds": d.rounds,
            }));
            Ok(Outcome::VerifiedSuccess)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match run(cli.cmd) {
        Ok(o) => o,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.outcome
        }
    };
    ExitCode::from(outcome.exit_code() as u8)
}
