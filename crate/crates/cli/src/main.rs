use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use morphcx::complexity::ComplexityPoint;
use morphcx::platbaseline::{cond_dist, display_exponent};
use morphcx_cli::commands::{self, load_plat, load_scorer, PlatReport};
use morphcx_cli::config::{ConfigArgs, ConfigError, RunConfig};
use morphcx_cli::exit_code;

/// Measure paradigm size against held-out paradigm entropy.
#[derive(Parser, Debug)]
#[command(name = "morphcx", version)]
struct Cli {
    /// Flat `key = value` config; flags override it. `run` accepts several.
    #[arg(long, global = true)]
    config: Vec<PathBuf>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(flatten)]
    overrides: ConfigArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a UniMorph lexicon into paradigms.json and print coverage.
    Ingest,
    /// Sample train/dev/test from paradigms.json (needs --seed).
    Split {
        #[arg(long)]
        store: PathBuf,
    },
    /// Fit the reference string model on split.json.
    Train {
        #[arg(long)]
        split: PathBuf,
    },
    /// Slot-pair weights from dev paradigms.
    Weights {
        #[arg(long)]
        split: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Best spanning tree over slots.
    LearnTree {
        #[arg(long)]
        weights: PathBuf,
    },
    /// Held-out i-complexity under a tree.
    Measure {
        #[arg(long)]
        split: PathBuf,
        #[arg(long)]
        tree: PathBuf,
        #[arg(long)]
        model: Option<PathBuf>,
    },
    /// Full pipeline from lexicon (or synthetic system) to a point.
    Run,
    /// Pareto areas and permutation tests per POS, with SVG plots.
    Pareto {
        /// Point CSVs from `run`; the bundled published table if none.
        #[arg(long)]
        points: Vec<PathBuf>,
    },
    /// Conditional entropies of an exponent plat (bundled Greek by default).
    Plat {
        #[arg(long)]
        plat: Option<PathBuf>,
        /// Also compare against a tree and show the suppletion case.
        #[arg(long)]
        critique: bool,
        /// Print one distribution: target slot ...
        #[arg(long, requires = "given")]
        target: Option<String>,
        /// ... given SLOT=EXPONENT.
        #[arg(long, requires = "target")]
        given: Option<String>,
    },
    /// Same as `plat --critique`.
    Critique {
        #[arg(long)]
        plat: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}

fn single_config(cli: &Cli) -> Result<RunConfig> {
    if cli.config.len() > 1 {
        return Err(ConfigError("only `run` accepts several --config files".into()).into());
    }
    RunConfig::resolve(cli.config.first().map(PathBuf::as_path), &cli.overrides)
}

fn print_point(p: &ComplexityPoint) -> Result<()> {
    ComplexityPoint::write_csv(std::slice::from_ref(p), std::io::stdout().lock())?;
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    if let Command::Run = cli.command {
        return run(&cli);
    }
    let cfg = single_config(&cli)?;
    match &cli.command {
        Command::Ingest => {
            let s = commands::cmd_ingest(&cfg)?;
            println!("language   {}", s.language);
            println!("pos        {}", s.pos);
            println!("paradigms  {}", s.lexemes);
            println!("slots      {}", s.slots.len());
            println!("forms      {}", s.forms);
            println!("full       {}", s.full_paradigms);
            println!("coverage   {:.4}", s.coverage);
            for w in &s.warnings {
                println!("warning    {w}");
            }
        }
        Command::Split { store } => {
            let s = commands::cmd_split(&cfg, store)?;
            println!(
                "{} {}: {} train pairs, {} dev, {} test paradigms (e-complexity {})",
                s.language,
                s.pos,
                s.split.train.len(),
                s.split.dev.len(),
                s.split.test.len(),
                s.e_complexity
            );
        }
        Command::Train { split } => {
            let m = commands::cmd_train(&cfg, split)?;
            for (l, ce) in m.dev_cross_entropy() {
                println!("lambda {l:<8} dev cross-entropy {ce:.4} bits/pair");
            }
            println!("selected lambda {}", m.lambda());
        }
        Command::Weights { split, model } => {
            let scorer = load_scorer(model.as_deref(), cfg.scores.as_deref())?;
            let w = commands::cmd_weights(&cfg, split, &scorer)?;
            println!("{} slots, {} unobserved", w.len(), w.unobserved.len());
        }
        Command::LearnTree { weights } => {
            let t = commands::cmd_learn_tree(&cfg, weights)?;
            println!("root {}", t.root());
            for (v, p) in t.parents().iter().enumerate() {
                if let Some(p) = p {
                    println!("{p} -> {v}");
                }
            }
        }
        Command::Measure { split, tree, model } => {
            let scorer = load_scorer(model.as_deref(), cfg.scores.as_deref())?;
            print_point(&commands::cmd_measure(&cfg, split, tree, &scorer)?)?;
        }
        Command::Pareto { points } => {
            let r = commands::cmd_pareto(&cfg, points)?;
            for (pos, p) in &r.by_pos {
                match (&p.error, p.area, p.p_value) {
                    (Some(e), _, _) => println!("{pos}: {} points, error: {e}", p.n_points),
                    (None, Some(a), Some(pv)) => {
                        println!("{pos}: {} points, area {a:.4}, p = {pv:.4}", p.n_points)
                    }
                    _ => {}
                }
            }
        }
        Command::Plat {
            plat,
            critique,
            target,
            given,
        } => {
            let p = load_plat(plat.as_deref())?;
            if let (Some(t), Some(g)) = (target, given) {
                let (gs, ge) = g
                    .split_once('=')
                    .ok_or_else(|| ConfigError("--given wants SLOT=EXPONENT".into()))?;
                let e = gs.trim();
                let exp = ge.trim();
                let exp = if matches!(exp, "∅" | "-∅" | "-") { "" } else { exp.trim_start_matches('-') };
                let d = cond_dist(&p, p.slot_index(t)?, p.slot_index(e)?, exp)?;
                println!("{t} | {e}={}: {d}  (H = {:.6} bits)", display_exponent(exp), d.entropy());
            }
            print_plat(&commands::cmd_plat(&cfg, &p, *critique)?);
        }
        Command::Critique { plat } => {
            let p = load_plat(plat.as_deref())?;
            print_plat(&commands::cmd_plat(&cfg, &p, true)?);
        }
        Command::Run => unreachable!(),
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    let cfgs: Vec<(String, RunConfig)> = if cli.config.is_empty() {
        vec![("run".into(), RunConfig::resolve(None, &cli.overrides)?)]
    } else {
        cli.config
            .iter()
            .map(|p| {
                let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                Ok((name, RunConfig::resolve(Some(Path::new(p)), &cli.overrides)?))
            })
            .collect::<Result<_>>()?
    };
    let mut first_err = None;
    let mut header = true;
    for (res, (name, _)) in commands::cmd_run_batch(&cfgs).into_iter().zip(&cfgs) {
        match res {
            Ok(out) => {
                let mut buf = Vec::new();
                ComplexityPoint::write_csv(std::slice::from_ref(&out.point), &mut buf)?;
                let text = String::from_utf8(buf)?;
                let body = if header { text.as_str() } else { text.split_once('\n').map_or("", |x| x.1) };
                print!("{body}");
                header = false;
            }
            Err(e) => {
                eprintln!("error in {name}: {e:#}");
                first_err.get_or_insert(e);
            }
        }
    }
    match first_err {
        Some(e) => Err(e).context("run failed"),
        None => Ok(()),
    }
}

fn print_plat(r: &PlatReport) {
    println!("{} classes, {} slots", r.classes, r.slots.len());
    for p in &r.pairs {
        println!("H({} | {}) = {:.6}", p.target, p.given, p.entropy);
    }
    println!("average conditional entropy {:.6} bits", r.avg_cond_entropy);
    if let Some(j) = &r.joint_vs_average {
        println!();
        println!("best tree: root {}, mean edge entropy {:.6} bits", j.tree_root, j.tree_edge_mean);
        println!("tree joint {:.6} bits, exact joint {:.6} bits", j.tree_joint_bits, j.joint_entropy_bits);
        println!(
            "exact joint per slot {:.6} bits vs average {:.6}",
            j.joint_entropy_bits / j.n_slots as f64,
            j.avg_cond_entropy
        );
    }
    if let Some(s) = &r.suppletion {
        println!();
        println!("{} -> {}: plat probability {}", s.source, s.target, s.plat_prob);
        println!("{} -> {}: string model {:.3} bits", s.source, s.target, -s.model_log2prob);
        println!("{} -> {}: string model {:.3} bits", s.source, s.regular_target, -s.regular_log2prob);
    }
}
