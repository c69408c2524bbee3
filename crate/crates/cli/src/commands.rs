//! Command implementations. Each returns the process exit code:
//! 0 success / clean verdict, 1 validation error, 2 runtime game error or
//! replay violation, 3 diagnostic flag raised.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use ludus_core::diagnostics::{compare_capabilities, deprivation_test, CapabilityRole};
use ludus_core::games::{
    replay_verify, run_game, verify_with_rerun, ActivityClass, GameError, GameSpec, ReplayReport,
    RunOptions, Transcript,
};
use ludus_core::refgames::load_builtin;
use ludus_core::tasks::{verify_dataset, Dataset, TaskSpec};

use crate::config::{parse_config, ConfigError, Document, ResolvedRun};

#[derive(Debug)]
pub struct CliFailure {
    pub code: u8,
    pub message: String,
}

impl CliFailure {
    fn validation(message: impl Into<String>) -> Self {
        CliFailure {
            code: 1,
            message: message.into(),
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        CliFailure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Vec<ConfigError>> for CliFailure {
    fn from(errors: Vec<ConfigError>) -> Self {
        let message = errors
            .iter()
            .map(|e| e.to_string())
            .collect::<Vec<_>>()
            .join("\n");
        CliFailure::validation(message)
    }
}

impl From<ConfigError> for CliFailure {
    fn from(e: ConfigError) -> Self {
        CliFailure::validation(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Ndjson,
}

fn read(path: &Path) -> Result<String, CliFailure> {
    fs::read_to_string(path)
        .map_err(|e| CliFailure::validation(format!("cannot read {}: {e}", path.display())))
}

fn parse_document(path: &Path) -> Result<Document, CliFailure> {
    let text = read(path)?;
    parse_config(&text).map_err(|errors| {
        let mut message = format!("{}:", path.display());
        for e in errors {
            message.push_str(&format!("\n  {e}"));
        }
        CliFailure::validation(message)
    })
}

/// A `--game` argument is either a path to a game/run document or a
/// built-in name.
fn load_game_argument(arg: &str) -> Result<(GameSpec, Option<ResolvedRun>), CliFailure> {
    let path = Path::new(arg);
    if path.exists() {
        match parse_document(path)? {
            Document::Game(config) => Ok((config.resolve()?, None)),
            Document::Run(config) => {
                let resolved = config.resolve()?;
                Ok((resolved.spec.clone(), Some(resolved)))
            }
            other => Err(CliFailure::validation(format!(
                "{}: expected a game or run document, found {}",
                path.display(),
                other.kind()
            ))),
        }
    } else {
        let spec = load_builtin(arg, &json!({}))
            .map_err(|e| CliFailure::validation(format!("{arg}: {e}")))?;
        Ok((spec, None))
    }
}

fn load_task(path: &Path) -> Result<TaskSpec, CliFailure> {
    match parse_document(path)? {
        Document::Task(config) => Ok(config.resolve()?),
        other => Err(CliFailure::validation(format!(
            "{}: expected a task document, found {}",
            path.display(),
            other.kind()
        ))),
    }
}

fn load_dataset(path: &Path) -> Result<Dataset, CliFailure> {
    let text = read(path)?;
    Dataset::from_ndjson(&text)
        .map_err(|e| CliFailure::validation(format!("{}: {e}", path.display())))
}

fn emit<T: Serialize>(format: Format, value: &T, text: impl FnOnce() -> String) {
    match format {
        Format::Text => println!("{}", text()),
        Format::Ndjson => {
            println!("{}", serde_json::to_string(value).expect("report serialization"))
        }
    }
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct RunSummary {
    run: u32,
    seed: u64,
    verdict: String,
    tokens: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    file: Option<String>,
}

fn output_path(base: &str, index: u32, total: u32) -> PathBuf {
    if total == 1 {
        return PathBuf::from(base);
    }
    let path = Path::new(base);
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("transcript");
    let ext = path.extension().and_then(|s| s.to_str());
    let name = match ext {
        Some(ext) => format!("{stem}-{index:04}.{ext}"),
        None => format!("{stem}-{index:04}"),
    };
    path.with_file_name(name)
}

#[allow(clippy::too_many_arguments)]
pub fn run(
    config: &Path,
    seed: Option<u64>,
    max_steps: Option<u32>,
    out: Option<PathBuf>,
    jobs: usize,
    format: Format,
) -> Result<u8, CliFailure> {
    let Document::Run(run_config) = parse_document(config)? else {
        return Err(CliFailure::validation(format!(
            "{}: `run` takes a run document",
            config.display()
        )));
    };
    let mut resolved = run_config.resolve()?;
    if let Some(seed) = seed {
        resolved.seed = seed;
    }
    if let Some(max_steps) = max_steps {
        resolved.max_steps = max_steps;
    }
    if let Some(out) = out {
        resolved.out = Some(out.display().to_string());
    }

    let options = RunOptions {
        max_steps: resolved.max_steps,
        scheduling: resolved.scheduling,
    };
    let seeds: Vec<u64> = (0..resolved.runs).map(|i| resolved.seed + i as u64).collect();

    let execute = |seed: u64| -> Result<Transcript, CliFailure> {
        let mut policies = resolved.policies()?;
        run_game(&resolved.spec, &mut policies, options, seed).map_err(|e| match e {
            GameError::Deadlock { .. } | GameError::AbortedRun { .. } => {
                CliFailure::runtime(format!("seed {seed}: {e}"))
            }
            other => CliFailure::runtime(format!("seed {seed}: {other}")),
        })
    };

    let results: Vec<Result<Transcript, CliFailure>> = if jobs > 1 && seeds.len() > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| CliFailure::runtime(e.to_string()))?;
        pool.install(|| {
            use rayon::prelude::*;
            seeds.par_iter().map(|&s| execute(s)).collect()
        })
    } else {
        seeds.iter().map(|&s| execute(s)).collect()
    };

    let mut summaries = Vec::new();
    for (i, result) in results.into_iter().enumerate() {
        let transcript = result?;
        let index = i as u32 + 1;
        let file = match &resolved.out {
            Some(base) => {
                let path = output_path(base, index, resolved.runs);
                fs::write(&path, transcript.to_ndjson()).map_err(|e| {
                    CliFailure::runtime(format!("cannot write {}: {e}", path.display()))
                })?;
                Some(path.display().to_string())
            }
            None => {
                print!("{}", transcript.to_ndjson());
                None
            }
        };
        summaries.push(RunSummary {
            run: index,
            seed: seeds[i],
            verdict: transcript.final_verdict.as_str().to_string(),
            tokens: transcript.len(),
            file,
        });
    }

    for summary in &summaries {
        let line = || {
            let mut line = format!(
                "run {}: seed={} verdict={} tokens={}",
                summary.run, summary.seed, summary.verdict, summary.tokens
            );
            if let Some(file) = &summary.file {
                line.push_str(&format!(" file={file}"));
            }
            line
        };
        if resolved.out.is_some() {
            emit(format, summary, line);
        } else {
            // transcripts went to stdout; keep it parseable
            eprintln!("{}", line());
        }
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// replay
// ---------------------------------------------------------------------------

pub fn replay(transcript_path: &Path, game: &str, format: Format) -> Result<u8, CliFailure> {
    let text = read(transcript_path)?;
    let transcript = Transcript::parse(&text)
        .map_err(|e| CliFailure::validation(format!("{}: {e}", transcript_path.display())))?;
    let (spec, run) = load_game_argument(game)?;

    let report: ReplayReport = match run {
        Some(resolved) => {
            let mut policies = resolved.policies()?;
            verify_with_rerun(&spec, &mut policies, resolved.scheduling, &transcript)
        }
        None => replay_verify(&spec, &transcript),
    };

    emit(format, &report, || {
        let mut out = String::new();
        for v in &report.violations {
            let seq = v.seq.map(|s| format!(" token {s}")).unwrap_or_default();
            out.push_str(&format!("violation{seq}: {:?}: {}\n", v.kind, v.detail));
        }
        out.push_str(&format!(
            "checked {} tokens: {}",
            report.tokens_checked,
            if report.is_clean() {
                "clean".to_string()
            } else {
                format!("{} violation(s)", report.violations.len())
            }
        ));
        out
    });
    Ok(if report.is_clean() { 0 } else { 2 })
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

pub fn verify(task_config: &Path, dataset: &Path, format: Format) -> Result<u8, CliFailure> {
    let task = load_task(task_config)?;
    let data = load_dataset(dataset)?;
    let report = verify_dataset(&task, &data)
        .map_err(|e| CliFailure::validation(e.to_string()))?;

    match format {
        Format::Ndjson => {
            for verdict in &report.verdicts {
                println!("{}", serde_json::to_string(verdict).expect("verdict serialization"));
            }
            println!(
                "{}",
                json!({"pass_rate": report.pass_rate, "pairs": report.verdicts.len(),
                       "failures": report.failing_indices()})
            );
        }
        Format::Text => {
            for verdict in report.verdicts.iter().filter(|v| !v.pass) {
                match &verdict.note {
                    Some(note) => {
                        println!("pair {}: FAIL (loss {:.3}) {note}", verdict.index, verdict.loss)
                    }
                    None => println!("pair {}: FAIL (loss {:.3})", verdict.index, verdict.loss),
                }
            }
            println!(
                "verified {} pairs: pass rate {:.4}, {} failure(s)",
                report.verdicts.len(),
                report.pass_rate,
                report.failing_indices().len()
            );
        }
    }
    Ok(if report.all_pass() { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

pub fn classify(config: &Path, format: Format) -> Result<u8, CliFailure> {
    let path_str = config.display().to_string();
    if config.exists() {
        match parse_document(config)? {
            Document::Task(task_config) => {
                let task = task_config.resolve()?;
                let flags = task.classify();
                emit(format, &flags, || {
                    format!(
                        "task {}: interpretation={} generation={} reference={} inference={}",
                        task.name(),
                        flags.interpretation,
                        flags.generation,
                        flags.reference,
                        flags.inference
                    )
                });
                return Ok(0);
            }
            Document::Game(game_config) => {
                let spec = game_config.resolve()?;
                return classify_spec(&spec, format);
            }
            Document::Run(run_config) => {
                let resolved = run_config.resolve()?;
                return classify_spec(&resolved.spec, format);
            }
            other => {
                return Err(CliFailure::validation(format!(
                    "{path_str}: cannot classify a {} document",
                    other.kind()
                )))
            }
        }
    }
    let (spec, _) = load_game_argument(&path_str)?;
    classify_spec(&spec, format)
}

fn classify_spec(spec: &GameSpec, format: Format) -> Result<u8, CliFailure> {
    let class = spec.classify();
    #[derive(Serialize)]
    struct Classification<'a> {
        name: &'a str,
        class: ActivityClass,
    }
    emit(
        format,
        &Classification {
            name: spec.name(),
            class,
        },
        || format!("{}: {class}", spec.name()),
    );
    Ok(0)
}

// ---------------------------------------------------------------------------
// diagnose bias
// ---------------------------------------------------------------------------

pub fn diagnose_bias(
    task_config: &Path,
    dataset: &Path,
    deprive: &[String],
    margin: f64,
    seed: u64,
    format: Format,
) -> Result<u8, CliFailure> {
    let task = load_task(task_config)?;
    let data = load_dataset(dataset)?;
    let deprive: BTreeSet<String> = deprive.iter().cloned().collect();
    let report = deprivation_test(&task, &data, &deprive, margin, seed)
        .map_err(|e| CliFailure::validation(e.to_string()))?;

    emit(format, &report, || {
        let deprived: Vec<&str> = report.deprived_fields.iter().map(|s| s.as_str()).collect();
        let mut rows = vec![
            ("deprived fields".to_string(), deprived.join(", ")),
            ("deprived accuracy".to_string(), format!("{:.4}", report.deprived_accuracy)),
            ("majority accuracy".to_string(), format!("{:.4}", report.majority_accuracy)),
            ("reference accuracy".to_string(), format!("{:.4}", report.reference_accuracy)),
            ("margin".to_string(), format!("{:.4}", report.margin)),
            ("train/test".to_string(), format!("{}/{}", report.train_size, report.test_size)),
            ("flagged".to_string(), report.flagged.to_string()),
        ];
        if report.non_informative {
            rows.push(("note".to_string(), "non-informative: nothing was deprived".to_string()));
        }
        let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
        rows.iter()
            .map(|(k, v)| format!("{k:width$}  {v}"))
            .collect::<Vec<_>>()
            .join("\n")
    });
    Ok(if report.flagged { 3 } else { 0 })
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

pub fn compare(
    caps_a: &Path,
    caps_b: &Path,
    inventory: Option<&Path>,
    format: Format,
) -> Result<u8, CliFailure> {
    let a = crate::config::capability_set_from(&parse_document(caps_a)?, "caps-a")?;
    let b = crate::config::capability_set_from(&parse_document(caps_b)?, "caps-b")?;
    let inventory = match inventory {
        Some(path) => crate::config::capability_set_from(&parse_document(path)?, "inventory")?,
        None => {
            if a.role == CapabilityRole::Inventory {
                a.clone()
            } else if b.role == CapabilityRole::Inventory {
                b.clone()
            } else {
                return Err(CliFailure::validation(
                    "neither capability set is an inventory; pass --inventory FILE",
                ));
            }
        }
    };
    let comparison = compare_capabilities(&a, &b, &inventory)
        .map_err(|e| CliFailure::validation(e.to_string()))?;

    emit(format, &comparison, || {
        let list = |set: &BTreeSet<String>| {
            if set.is_empty() {
                "(none)".to_string()
            } else {
                set.iter().cloned().collect::<Vec<_>>().join(", ")
            }
        };
        format!(
            "inventory: {}\nshared: {}\nadded: {}\ndropped: {}\ncoverage: {:.4} vs {:.4}",
            comparison.inventory,
            list(&comparison.shared),
            list(&comparison.added),
            list(&comparison.dropped),
            comparison.coverage_a,
            comparison.coverage_b
        )
    });
    Ok(0)
}

// ---------------------------------------------------------------------------
// rubric
// ---------------------------------------------------------------------------

pub fn rubric(rubric_file: &Path, format: Format) -> Result<u8, CliFailure> {
    let Document::Rubric(config) = parse_document(rubric_file)? else {
        return Err(CliFailure::validation(format!(
            "{}: expected a rubric document",
            rubric_file.display()
        )));
    };
    let report = config.criteria.report();
    emit(format, &report, || {
        let mut out = String::new();
        for (key, entry) in &report.entries {
            let answer = serde_json::to_value(entry.answer)
                .ok()
                .and_then(|v| v.as_str().map(|s| s.to_string()))
                .unwrap_or_default();
            if entry.note.is_empty() {
                out.push_str(&format!("{key}: {answer}\n"));
            } else {
                out.push_str(&format!("{key}: {answer} — {}\n", entry.note));
            }
        }
        out.push_str(&format!("coverage score: {:.4}", report.score));
        out
    });
    Ok(0)
}
