//! Batch entry points for the escape workbench: reduce a tiling instance to
//! its language bundle, run plays, verify counterexamples, search shadings,
//! replay transcripts and export structures.
//!
//! Exit codes: 0 success / valid, 2 invalid / fugitive lost, 3 budget
//! exhausted, 4 shape assertion mismatch, 1 usage or input errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use escape_core::chase::{validate_counterexample, Verdict};
use escape_core::fixtures::{
    assemble_counterexample, parse_strategy, DefaultShading, ShadeOracle, UniformShading,
};
use escape_core::game::{
    self, CanonicalPolicy, GameConfig, LiftingPolicy, Outcome, Policy, RandomPrincipledPolicy,
    Schedule, ScriptedPolicy, ScriptedStart, StageDepth,
};
use escape_core::graph::{to_dot, Structure};
use escape_core::reduce::{bundle_from_json, bundle_to_json, reduce, ReductionOutput};
use escape_core::symbol::Shade;
use escape_core::tiling::{
    check_shading, instance_from_json, search_shading, shading_from_json, shading_to_json,
    Condition, TilingInstance,
};

const EXIT_OK: u8 = 0;
const EXIT_USAGE: u8 = 1;
const EXIT_INVALID: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_MISMATCH: u8 = 4;

#[derive(Parser)]
#[command(name = "escape", about = "determinacy workbench: chase, game and tiling tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the language bundle for a tiling instance
    Reduce {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run one play of the game, or a staged shape pipeline
    Play(PlayArgs),
    /// Check the three counterexample clauses of a structure
    Verify {
        #[arg(long)]
        structure: PathBuf,
        #[command(flatten)]
        input: InstanceOrBundle,
    },
    /// Search for a proper shading of one grid size
    Search {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        k: u32,
        /// conditions to honor, e.g. a1,a2,b1,b3 (default: all five)
        #[arg(long)]
        conditions: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Assemble the counterexample structure for a properly shaded grid
    Assemble {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        shading: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-execute a transcript and report the final structure hash
    Replay {
        #[arg(long)]
        transcript: PathBuf,
        #[command(flatten)]
        input: InstanceOrBundle,
        #[arg(long)]
        expect_hash: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a structure (dot or json), optionally shade-erased
    Export {
        #[arg(long)]
        structure: PathBuf,
        #[arg(long, default_value = "dot")]
        format: String,
        #[arg(long)]
        erase_shades: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InstanceOrBundle {
    #[arg(long)]
    instance: Option<PathBuf>,
    #[arg(long)]
    bundle: Option<PathBuf>,
}

#[derive(Args)]
struct PlayArgs {
    #[command(flatten)]
    input: InstanceOrBundle,
    /// S_start, S_color, S_cycle, S_odd, S_even, S_k:3, S_layer:2, good:1,2
    #[arg(long, default_value = "S_start")]
    strategy: String,
    /// canonical[:exit=K] | scripted:start=qstart|bad1|ugly1 | lifting:target=FILE | random:seed=N
    #[arg(long, default_value = "canonical")]
    fugitive: String,
    /// staged (default) | random:seed=N
    #[arg(long)]
    schedule: Option<String>,
    /// dollar exit size for the canonical fugitive
    #[arg(long)]
    exit_script: Option<u32>,
    /// run the staged pipeline for this size and assert the forced shape
    #[arg(long)]
    pipeline_m: Option<u32>,
    /// pipeline depth: path | grid
    #[arg(long, default_value = "grid")]
    depth: String,
    /// oracle for shades: default | gray | file=shading.json
    #[arg(long, default_value = "default")]
    shades: String,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = game::DEFAULT_STEP_BUDGET)]
    budget: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn read_json(path: &Path) -> Result<serde_json::Value> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_instance(path: &Path) -> Result<TilingInstance> {
    instance_from_json(&read_json(path)?).map_err(|e| anyhow!(e))
}

fn load_reduction(input: &InstanceOrBundle) -> Result<ReductionOutput> {
    match (&input.instance, &input.bundle) {
        (Some(path), _) => Ok(reduce(&load_instance(path)?)),
        (None, Some(path)) => bundle_from_json(&read_json(path)?).map_err(|e| anyhow!(e)),
        (None, None) => bail!("need --instance or --bundle"),
    }
}

fn load_structure(path: &Path) -> Result<Structure> {
    serde_json::from_value(read_json(path)?).with_context(|| format!("parsing {}", path.display()))
}

fn write_out(out: &Option<PathBuf>, name: &str, content: &str) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            let path = dir.join(name);
            fs::write(&path, content)?;
            println!("wrote {}", path.display());
        }
        None => println!("{content}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Reduce { instance, out } => {
            let inst = load_instance(&instance)?;
            let r = reduce(&inst);
            let bundle = bundle_to_json(&r);
            write_out(&out, "bundle.json", &serde_json::to_string_pretty(&bundle)?)?;
            let mut listing = String::new();
            for t in r.tagged() {
                let (words, truncated) = t.language.enumerate_words(r.shades(), 40);
                listing.push_str(&format!(
                    "{} ({} words{}):\n",
                    t.id,
                    t.language.count_words(r.shades()),
                    if truncated { ", first 40 shown" } else { "" }
                ));
                for w in words {
                    listing.push_str(&format!("  {}\n", escape_core::symbol::word_to_string(&w)));
                }
            }
            if out.is_some() {
                write_out(&out, "languages.txt", &listing)?;
            }
            println!(
                "alphabet size {}, {} good + {} bad + {} ugly languages",
                r.alphabet().len(),
                r.good.len(),
                r.bad.len(),
                r.ugly.len()
            );
            Ok(EXIT_OK)
        }
        Command::Play(args) => cmd_play(args),
        Command::Verify { structure, input } => {
            let r = load_reduction(&input)?;
            let m = load_structure(&structure)?;
            match validate_counterexample(&m, &r) {
                Verdict::Valid => {
                    println!("valid: all constraints hold, green query yes, red query no");
                    Ok(EXIT_OK)
                }
                Verdict::Invalid(reason) => {
                    println!("invalid: {reason}");
                    Ok(EXIT_INVALID)
                }
            }
        }
        Command::Search { instance, k, conditions, out } => {
            let inst = load_instance(&instance)?;
            let conds = match conditions {
                None => Condition::all().to_vec(),
                Some(list) => parse_conditions(&list)?,
            };
            match search_shading(&inst, k, &conds).map_err(|e| anyhow!(e.to_string()))? {
                Some(shading) => {
                    let json = shading_to_json(&shading);
                    write_out(&out, "shading.json", &serde_json::to_string_pretty(&json)?)?;
                    println!("witness found for k={k}");
                }
                None => {
                    let cert = serde_json::json!({
                        "instance": escape_core::tiling::instance_to_json(&inst),
                        "k": k,
                        "conditions": conds,
                        "result": "exhausted",
                    });
                    write_out(&out, "exhaustion.json", &serde_json::to_string_pretty(&cert)?)?;
                    println!("no shading of size {k} satisfies the requested conditions");
                }
            }
            Ok(EXIT_OK)
        }
        Command::Assemble { instance, shading, out } => {
            let inst = load_instance(&instance)?;
            let shading = shading_from_json(&read_json(&shading)?).map_err(|e| anyhow!(e))?;
            let report = check_shading(&inst, &shading).map_err(|e| anyhow!(e.to_string()))?;
            if !report.proper() {
                println!("shading is not proper: {report:?}");
                return Ok(EXIT_INVALID);
            }
            let m = assemble_counterexample(&inst, &shading).map_err(|e| anyhow!(e.to_string()))?;
            write_out(&out, "counterexample.json", &serde_json::to_string_pretty(&m)?)?;
            println!("assembled and validated ({} vertices, {} edges)", m.vertex_count(), m.edge_count());
            Ok(EXIT_OK)
        }
        Command::Replay { transcript, input, expect_hash, out } => {
            let r = load_reduction(&input)?;
            let cfg = GameConfig::new(r);
            let text = fs::read_to_string(&transcript)?;
            let t = game::transcript_from_tsv(&text).map_err(|e| anyhow!(e))?;
            let structure = game::replay(&cfg, &t).map_err(|e| anyhow!(e))?;
            let hash = structure.content_hash();
            println!("replayed {} steps, final hash {hash}", t.steps.len());
            if let Some(dir) = &out {
                write_out(&Some(dir.clone()), "replayed.json", &serde_json::to_string_pretty(&structure)?)?;
            }
            match expect_hash {
                Some(expected) if expected != hash => {
                    println!("hash mismatch: expected {expected}");
                    Ok(EXIT_INVALID)
                }
                _ => Ok(EXIT_OK),
            }
        }
        Command::Export { structure, format, erase_shades, out } => {
            let m = load_structure(&structure)?;
            match format.as_str() {
                "dot" => write_out(&out, "structure.dot", &to_dot(&m, erase_shades))?,
                "json" => write_out(&out, "structure.json", &serde_json::to_string_pretty(&m)?)?,
                other => bail!("unknown format {other:?} (dot or json)"),
            }
            Ok(EXIT_OK)
        }
    }
}

fn parse_conditions(list: &str) -> Result<Vec<Condition>> {
    list.split(',')
        .map(|c| match c.trim() {
            "a1" => Ok(Condition::A1),
            "a2" => Ok(Condition::A2),
            "b1" => Ok(Condition::B1),
            "b2" => Ok(Condition::B2),
            "b3" => Ok(Condition::B3),
            other => bail!("unknown condition {other:?}"),
        })
        .collect()
}

fn parse_shade_oracle(spec: &str, exit: Option<u32>) -> Result<Box<dyn ShadeOracle>> {
    if spec == "default" {
        return Ok(Box::new(DefaultShading::for_exit(exit)));
    }
    if let Some(path) = spec.strip_prefix("file=") {
        let shading = shading_from_json(&read_json(Path::new(path))?).map_err(|e| anyhow!(e))?;
        return Ok(Box::new(shading));
    }
    Ok(Box::new(UniformShading(Shade::new(spec))))
}

fn parse_fugitive(
    spec: &str,
    exit: Option<u32>,
    shades: &str,
) -> Result<Box<dyn Policy>> {
    let (kind, rest) = match spec.split_once(':') {
        Some((k, r)) => (k, Some(r)),
        None => (spec, None),
    };
    match kind {
        "canonical" => {
            let mut exit = exit;
            if let Some(rest) = rest {
                for part in rest.split(':') {
                    if let Some(k) = part.strip_prefix("exit=") {
                        exit = Some(k.parse().context("exit size")?);
                    }
                }
            }
            Ok(Box::new(CanonicalPolicy::new(parse_shade_oracle(shades, exit)?, exit)))
        }
        "scripted" => {
            let start = match rest.and_then(|r| r.strip_prefix("start=")) {
                None | Some("qstart") => ScriptedStart::LanguageWord { id: None, rank: 0 },
                Some(name) => {
                    let id = parse_language_name(name)?;
                    ScriptedStart::LanguageWord { id: Some(id), rank: 0 }
                }
            };
            Ok(Box::new(ScriptedPolicy::new(start, Vec::new(), true)))
        }
        "lifting" => {
            let path = rest
                .and_then(|r| r.strip_prefix("target="))
                .ok_or_else(|| anyhow!("lifting needs target=FILE"))?;
            Ok(Box::new(LiftingPolicy::new(load_structure(Path::new(path))?)))
        }
        "random" => {
            let seed = rest
                .and_then(|r| r.strip_prefix("seed="))
                .map(|s| s.parse())
                .transpose()?
                .unwrap_or(0);
            Ok(Box::new(RandomPrincipledPolicy::new(seed)))
        }
        other => bail!("unknown fugitive {other:?}"),
    }
}

fn parse_language_name(name: &str) -> Result<escape_core::reduce::LanguageId> {
    use escape_core::reduce::LanguageId;
    for (prefix, make) in [
        ("good", LanguageId::good as fn(u32) -> LanguageId),
        ("bad", LanguageId::bad),
        ("ugly", LanguageId::ugly),
    ] {
        if let Some(i) = name.strip_prefix(prefix) {
            return Ok(make(i.parse().context("language index")?));
        }
    }
    bail!("unknown language {name:?} (use e.g. good15, bad1, ugly2)")
}

fn cmd_play(args: PlayArgs) -> Result<u8> {
    let r = load_reduction(&args.input)?;
    let mut cfg = GameConfig::new(r);
    cfg.step_budget = args.budget;

    if let Some(m) = args.pipeline_m {
        let depth = match args.depth.as_str() {
            "path" => StageDepth::PathOnly,
            "grid" => StageDepth::FullGrid,
            other => bail!("unknown depth {other:?} (path or grid)"),
        };
        let oracle = parse_shade_oracle(&args.shades, args.exit_script)?;
        let fixture_oracle = DefaultShading::for_exit(args.exit_script);
        let report = game::run_stage_pipeline(
            &cfg.reduction.instance,
            m,
            args.exit_script,
            depth,
            oracle,
            &fixture_oracle,
        )
        .map_err(|e| anyhow!(e.to_string()))?;
        write_play_artifacts(&args.out, &cfg, &report.play, args.seed)?;
        return match &report.shape {
            Ok(()) => {
                println!("pipeline m={m}: final structure equals {}", report.expected_name);
                Ok(EXIT_OK)
            }
            Err(mismatch) => {
                println!("pipeline m={m}: {mismatch}");
                Ok(EXIT_MISMATCH)
            }
        };
    }

    let phases = parse_strategy(&args.strategy)
        .ok_or_else(|| anyhow!("unknown strategy {:?}", args.strategy))?;
    let schedule = match args.schedule.as_deref() {
        None | Some("staged") => Schedule::Staged { phases, shuffle_seed: args.seed },
        Some(spec) => {
            let seed = spec
                .strip_prefix("random:seed=")
                .or_else(|| spec.strip_prefix("random:"))
                .map(|s| s.parse())
                .transpose()?
                .or(args.seed)
                .unwrap_or(0);
            Schedule::RandomPending { seed }
        }
    };
    let mut fugitive = parse_fugitive(&args.fugitive, args.exit_script, &args.shades)?;
    let result = game::play(&cfg, fugitive.as_mut(), &schedule).map_err(|e| anyhow!(e.to_string()))?;
    write_play_artifacts(&args.out, &cfg, &result, args.seed)?;
    println!("{}", result.transcript.outcome);
    Ok(match result.transcript.outcome {
        Outcome::Quiescent { .. } => EXIT_OK,
        Outcome::FugitiveLost { .. } | Outcome::PolicyFault { .. } => EXIT_INVALID,
        Outcome::BudgetExhausted => EXIT_BUDGET,
    })
}

fn write_play_artifacts(
    out: &Option<PathBuf>,
    _cfg: &GameConfig,
    result: &game::PlayResult,
    seed: Option<u64>,
) -> Result<()> {
    let Some(dir) = out else { return Ok(()) };
    fs::create_dir_all(dir)?;
    fs::write(dir.join("transcript.tsv"), game::transcript_to_tsv(&result.transcript))?;
    fs::write(
        dir.join("final.json"),
        serde_json::to_string_pretty(&result.final_structure)?,
    )?;
    fs::write(dir.join("final.dot"), to_dot(&result.final_structure, false))?;
    let descriptor = serde_json::json!({
        "seed": seed.or(result.transcript.seed),
        "steps": result.transcript.steps.len(),
        "outcome": format!("{}", result.transcript.outcome),
        "final_hash": result.final_structure.content_hash(),
        "certificate_ok": result.certificate_ok,
    });
    fs::write(dir.join("run.json"), serde_json::to_string_pretty(&descriptor)?)?;
    println!("wrote transcript.tsv, final.json, final.dot, run.json under {}", dir.display());
    Ok(())
}
