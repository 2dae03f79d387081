use std::fs;
use std::io::Write;
use std::path::Path;

use aha_core::analysis::{analyze, behavior_table, AnalyzeOptions, Factor};
use aha_core::clock::Clock;
use aha_core::crowd::{self, PlanOptions, SimulateOptions};
use aha_core::generate::{approve, generate_stakeholders};
use aha_core::harvest::{complete_matrix, HarvestOptions};
use aha_core::matrix::{build_matrix, enumerate_variants_multi};
use aha_core::project::{Project, ProjectLock};
use aha_core::provider::{CompletionProvider, HttpProvider, MockProvider, ModelParams, RetryPolicy, WireFormat};
use aha_core::report::emit_report;
use aha_core::scenario::{bundled, load_scenario, Stakeholder};
use aha_core::taxonomy::{apply_codes, load_taxonomy, read_assignments};
use aha_core::vignette::render_all;
use aha_core::Error;
use anyhow::{Context, Result};
use serde_json::json;

use crate::cli::*;

pub fn read(path: &Path) -> Result<String, Error> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn write_or_print(out: Option<&Path>, content: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, content).map_err(|e| Error::io(p, e))?,
        None => std::io::stdout().write_all(content).context("writing to standard output")?,
    }
    Ok(())
}

fn load(path: &Path) -> Result<Project, Error> {
    Project::load(path).map_err(|e| match e {
        Error::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => {
            Error::Precondition(format!("project file {} not found (run `aha init` first)", path.display()))
        }
        other => other,
    })
}

/// Arguments as recorded in the run log: argv without the program name and
/// the `--project` option, so logs do not depend on where the file lives.
pub fn logged_args(argv: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--project" {
            it.next();
        } else if !a.starts_with("--project=") {
            out.push(a.clone());
        }
    }
    out
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Init(_) => "init",
        Command::Stakeholders(StakeholdersCmd::Gen(_)) => "stakeholders gen",
        Command::Stakeholders(StakeholdersCmd::Approve(_)) => "stakeholders approve",
        Command::Matrix(MatrixCmd::Build(_)) => "matrix build",
        Command::Matrix(MatrixCmd::Export(_)) => "matrix export",
        Command::Vignettes(VignettesCmd::Render) => "vignettes render",
        Command::Vignettes(VignettesCmd::Export(_)) => "vignettes export",
        Command::Complete(_) => "complete",
        Command::Crowd(CrowdCmd::Plan(_)) => "crowd plan",
        Command::Crowd(CrowdCmd::Export(_)) => "crowd export",
        Command::Crowd(CrowdCmd::Import(_)) => "crowd import",
        Command::Crowd(CrowdCmd::Qc(_)) => "crowd qc",
        Command::Crowd(CrowdCmd::Requeue) => "crowd requeue",
        Command::Crowd(CrowdCmd::Simulate(_)) => "crowd simulate",
        Command::Codes(CodesCmd::Apply(_)) => "codes apply",
        Command::Analyze(_) => "analyze",
        Command::Report(_) => "report",
        Command::ServeReport(_) => "serve-report",
    }
}

fn provider(args: &ProviderArgs) -> Result<Box<dyn CompletionProvider>, Error> {
    Ok(match args.provider {
        ProviderKind::Mock => Box::new(MockProvider::new()),
        ProviderKind::Openai => Box::new(HttpProvider::from_env("openai", WireFormat::Completions, args.endpoint.clone())?),
        ProviderKind::OpenaiChat => Box::new(HttpProvider::from_env("openai-chat", WireFormat::Chat, args.endpoint.clone())?),
    })
}

fn params(args: &ProviderArgs, n: u32) -> ModelParams {
    ModelParams { model_name: args.model.clone(), temperature: args.temperature, n_completions: n, max_tokens: args.max_tokens }
}

fn retry(args: &ProviderArgs) -> RetryPolicy {
    if args.no_retry {
        RetryPolicy::none()
    } else {
        RetryPolicy::default()
    }
}

pub fn run(cli: Cli, argv: &[String]) -> Result<()> {
    let clock = Clock::from_env();
    let path = cli.project.as_path();
    let name = command_name(&cli.command);

    if let Command::ServeReport(args) = &cli.command {
        return crate::serve::serve(path, args);
    }
    let _lock = ProjectLock::acquire(path)?;
    let mut project = match &cli.command {
        Command::Init(args) => {
            if path.exists() && !args.force {
                return Err(Error::Precondition(format!("{} already exists (use --force to overwrite)", path.display())).into());
            }
            let config = match (&args.scenario, &args.bundled) {
                (Some(file), _) => load_scenario(&read(file)?)?,
                (None, Some(id)) => bundled(id)?,
                (None, None) => unreachable!("clap requires one of --scenario/--bundled"),
            };
            Project::from_config(config)
        }
        _ => load(path)?,
    };
    project.log_event(clock.now(), name, logged_args(argv), Some(cli.seed));

    match cli.command {
        Command::Init(_) => {
            eprintln!("initialized project for scenario '{}' with {} stakeholders", project.scenario.id, project.stakeholders.len());
        }
        Command::Stakeholders(StakeholdersCmd::Gen(args)) => {
            let exemplar = bundled(&args.exemplar)?;
            let p = provider(&args.provider)?;
            let draft = generate_stakeholders(
                &project.scenario,
                p.as_ref(),
                &exemplar.scenario,
                &exemplar.stakeholders,
                &params(&args.provider, 1),
                &retry(&args.provider),
                cli.seed,
            )?;
            println!("{}", serde_json::to_string_pretty(&draft.stakeholders)?);
            eprintln!("drafted {} stakeholders; review and run `aha stakeholders approve`", draft.stakeholders.len());
            project.stakeholder_draft = Some(draft);
        }
        Command::Stakeholders(StakeholdersCmd::Approve(args)) => {
            let edited: Option<Vec<Stakeholder>> = match &args.file {
                Some(f) => Some(serde_json::from_str(&read(f)?).map_err(|e| Error::schema(f.display().to_string(), e.to_string()))?),
                None => None,
            };
            let draft = match (&project.stakeholder_draft, &edited) {
                (Some(d), _) => d.clone(),
                (None, Some(_)) => Default::default(),
                (None, None) => return Err(Error::Precondition("no stakeholder draft to approve (run `aha stakeholders gen` or pass --file)".into()).into()),
            };
            if project.matrix.is_some() {
                return Err(Error::Precondition("the matrix is already built; stakeholders can no longer change".into()).into());
            }
            project.stakeholders = approve(&draft, edited)?;
            project.stakeholder_draft = None;
            eprintln!("approved {} stakeholders", project.stakeholders.len());
        }
        Command::Matrix(MatrixCmd::Build(args)) => {
            if !project.completions.is_empty() {
                return Err(Error::Precondition("completions exist; rebuilding the matrix would orphan them".into()).into());
            }
            let labels = if args.harm_labels.is_empty() { project.scenario.harm_labels.clone() } else { args.harm_labels };
            let variants = enumerate_variants_multi(&labels)?;
            let m = build_matrix(&project.scenario, &project.stakeholders, &variants)?;
            eprintln!("built matrix: {} stakeholders × {} behaviors = {} cells", m.rows.len(), m.columns.len(), m.n_cells());
            project.matrix = Some(m);
        }
        Command::Matrix(MatrixCmd::Export(args)) => {
            let m = project.require_matrix()?;
            let bytes = match args.format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    m.write_csv(&mut buf)?;
                    buf
                }
                Format::Json => (serde_json::to_string_pretty(m)? + "\n").into_bytes(),
            };
            write_or_print(args.out.as_deref(), &bytes)?;
        }
        Command::Vignettes(VignettesCmd::Render) => {
            let stakeholders = project.stakeholders.clone();
            let scenario = project.scenario.clone();
            let m = project.matrix.as_mut().ok_or_else(|| Error::Precondition("matrix not built yet (run `aha matrix build`)".into()))?;
            render_all(m, &scenario, &stakeholders)?;
            eprintln!("rendered {} vignettes", m.n_cells());
        }
        Command::Vignettes(VignettesCmd::Export(args)) => {
            let m = project.require_vignettes()?;
            let bytes = match args.format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    m.write_csv(&mut buf)?;
                    buf
                }
                Format::Json => {
                    let records: Vec<_> = (0..m.n_cells())
                        .map(|i| {
                            let c = m.cell_ref(i);
                            json!({
                                "stakeholder_id": c.stakeholder_id,
                                "variant": c.variant,
                                "variant_key": c.variant.key(),
                                "vignette": m.cells[i].vignette,
                            })
                        })
                        .collect();
                    (serde_json::to_string_pretty(&records)? + "\n").into_bytes()
                }
            };
            write_or_print(args.out.as_deref(), &bytes)?;
        }
        Command::Complete(args) => {
            let p = provider(&args.provider)?;
            let options = HarvestOptions {
                params: params(&args.provider, args.n),
                parallelism: args.parallelism,
                seed: cli.seed,
                retry: retry(&args.provider),
                checkpoint_every: args.checkpoint_every,
                clock,
            };
            let summary = complete_matrix(&mut project, p.as_ref(), &options, &mut |p: &Project| p.save(path))?;
            eprintln!(
                "completed {} cells ({} already done), {} completions added, {} flagged empty",
                summary.cells_completed, summary.cells_skipped, summary.completions_added, summary.rejected
            );
        }
        Command::Crowd(cmd) => crowd_command(&mut project, cmd, cli.seed)?,
        Command::Codes(CodesCmd::Apply(args)) => {
            let taxonomy = match &args.taxonomy {
                Some(f) => {
                    let t = load_taxonomy(&read(f)?)?;
                    project.taxonomy = Some(t.clone());
                    t
                }
                None => project.taxonomy(),
            };
            let outcome = apply_codes(&mut project, &taxonomy, read_assignments(&read(&args.file)?)?)?;
            if let Some(w) = &args.worklist {
                fs::write(w, serde_json::to_string_pretty(&outcome.worklist)? + "\n").map_err(|e| Error::io(w, e))?;
            }
            eprintln!("applied {} assignments; {} accepted completions still uncoded", outcome.applied, outcome.worklist.len());
        }
        Command::Analyze(args) => {
            let by = args.by.as_deref().map(str::parse::<Factor>).transpose()?;
            let others: Vec<Project> = args.include.iter().map(|p| load(p)).collect::<Result<_, _>>()?;
            let mut all: Vec<&Project> = vec![&project];
            all.extend(others.iter());
            let report = analyze(&all, &project.taxonomy(), AnalyzeOptions { by })?;
            let doc = serde_json::to_string_pretty(&report)? + "\n";
            if let Some(out) = &args.out {
                fs::write(out, &doc).map_err(|e| Error::io(out, e))?;
            } else {
                print!("{doc}");
            }
            if let Some(csv_path) = &args.csv {
                let f = fs::File::create(csv_path).map_err(|e| Error::io(csv_path, e))?;
                report.write_csv(f)?;
            }
            if by.is_none() {
                eprint!("{}", behavior_table(&report));
            }
            project.analyses = Some(report);
        }
        Command::Report(args) => {
            let report = emit_report(&project, &project.taxonomy())?;
            write_or_print(args.out.as_deref(), report.to_json()?.as_bytes())?;
        }
        Command::ServeReport(_) => unreachable!("handled above"),
    }
    project.validate()?;
    project.save(path)?;
    Ok(())
}

fn crowd_command(project: &mut Project, cmd: CrowdCmd, seed: u64) -> Result<()> {
    match cmd {
        CrowdCmd::Plan(args) => {
            if !project.crowd.responses.is_empty() {
                return Err(Error::Precondition("responses already imported; use `aha crowd requeue` for new rounds".into()).into());
            }
            if !project.crowd.tasks.is_empty() && !args.force {
                return Err(Error::Precondition("a crowd plan already exists (use --force to replace it)".into()).into());
            }
            let settings = crowd::CrowdSettings {
                judgments_per_vignette: args.judgments,
                vignettes_per_task: args.task_size,
                max_tasks_per_judge: args.cap,
            };
            let plan = crowd::plan_assignments(project.require_vignettes()?, &PlanOptions { settings, seed })?;
            eprintln!(
                "planned {} tasks over {} judge slots (lower bound {} at cap {})",
                plan.tasks.len(),
                plan.judges.len(),
                plan.min_judges,
                args.cap
            );
            project.crowd.settings = settings;
            project.crowd.tasks = plan.tasks;
            project.crowd.judges = plan.judges;
            project.crowd.refresh_ledger();
        }
        CrowdCmd::Export(args) => {
            let tasks: Vec<_> = match args.round {
                Some(r) => project.crowd.tasks.iter().filter(|t| t.round == r).cloned().collect(),
                None => project.crowd.pending_tasks().into_iter().cloned().collect(),
            };
            let records = crowd::task_records(&tasks, project.require_matrix()?)?;
            let bytes = match args.format {
                Format::Csv => {
                    let mut buf = Vec::new();
                    crowd::export_tasks_csv(&records, project.crowd.settings.vignettes_per_task, &mut buf)?;
                    buf
                }
                Format::Json => crowd::export_tasks_json(&records)?.into_bytes(),
            };
            write_or_print(args.out.as_deref(), &bytes)?;
            eprintln!("exported {} tasks", records.len());
        }
        CrowdCmd::Import(args) => {
            let doc = read(&args.responses)?;
            let responses = if is_json(&args.responses) { crowd::read_responses_json(&doc)? } else { crowd::read_responses_csv(doc.as_bytes())? };
            let annotations = match &args.annotations {
                Some(a) => crowd::read_annotations(&read(a)?)?,
                None => Vec::new(),
            };
            let s = crowd::import_responses(project, responses, annotations, Clock::from_env())?;
            eprintln!(
                "imported {} responses ({} accepted): {} completions, {} accepted",
                s.responses, s.accepted_responses, s.completions_added, s.accepted_completions
            );
        }
        CrowdCmd::Qc(args) => {
            if let Some(a) = &args.annotations {
                for ann in crowd::read_annotations(&read(a)?)? {
                    project.crowd.annotations.retain(|b| !(b.judge_id == ann.judge_id && b.task_id == ann.task_id));
                    project.crowd.annotations.push(ann);
                }
            }
            crowd::rerun_quality_checks(project);
            let flagged = project.crowd.responses.iter().filter(|r| !r.qc.accepted).count();
            eprintln!("{} of {} responses flagged", flagged, project.crowd.responses.len());
        }
        CrowdCmd::Requeue => {
            let tasks = crowd::requeue_rejected(project, seed)?;
            let slots: usize = tasks.iter().map(|t| t.cells.len()).sum();
            eprintln!("requeued {slots} judgments in {} tasks", tasks.len());
        }
        CrowdCmd::Simulate(args) => {
            let pending: Vec<_> = project.crowd.pending_tasks().into_iter().cloned().collect();
            let responses = crowd::simulate_responses(&project.crowd, &pending, &SimulateOptions { seed, flag_fraction: args.flag_fraction });
            let bytes = if is_json(&args.out) {
                crowd::write_responses_json(&responses)?.into_bytes()
            } else {
                let mut buf = Vec::new();
                crowd::write_responses_csv(&responses, project.crowd.settings.vignettes_per_task, &mut buf)?;
                buf
            };
            fs::write(&args.out, bytes).map_err(|e| Error::io(&args.out, e))?;
            eprintln!("wrote {} simulated responses", responses.len());
        }
    }
    Ok(())
}

fn is_json(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"))
}
