use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "aha", version, about = "Anticipate harms of AI deployments with ethical matrices")]
pub struct Cli {
    /// Project file.
    #[arg(long, global = true, default_value = "aha-project.json")]
    pub project: PathBuf,
    /// Seed for every random choice (assignment planning, mock provider).
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create a project from a scenario document or a bundled scenario.
    Init(InitArgs),
    #[command(subcommand)]
    Stakeholders(StakeholdersCmd),
    #[command(subcommand)]
    Matrix(MatrixCmd),
    #[command(subcommand)]
    Vignettes(VignettesCmd),
    /// Fill every matrix cell with model completions.
    Complete(CompleteArgs),
    #[command(subcommand)]
    Crowd(CrowdCmd),
    #[command(subcommand)]
    Codes(CodesCmd),
    /// Run the statistical analyses and store them in the project.
    Analyze(AnalyzeArgs),
    /// Write the report document for the review UI.
    Report(ReportArgs),
    /// Serve the report and UI assets over local HTTP (read-only).
    ServeReport(ServeArgs),
}

#[derive(Debug, Args)]
pub struct InitArgs {
    /// Scenario document (JSON).
    #[arg(long, conflicts_with = "bundled", required_unless_present = "bundled")]
    pub scenario: Option<PathBuf>,
    /// Id of a bundled scenario.
    #[arg(long)]
    pub bundled: Option<String>,
    /// Overwrite an existing project file.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Subcommand)]
pub enum StakeholdersCmd {
    /// Draft a stakeholder list with a one-shot prompt.
    Gen(StakeholdersGenArgs),
    /// Approve the pending draft, optionally replaced by an edited list.
    Approve(StakeholdersApproveArgs),
}

#[derive(Debug, Args)]
pub struct StakeholdersGenArgs {
    /// Bundled scenario whose stakeholder list serves as the exemplar.
    #[arg(long, default_value = "loan-application")]
    pub exemplar: String,
    #[command(flatten)]
    pub provider: ProviderArgs,
}

#[derive(Debug, Args)]
pub struct StakeholdersApproveArgs {
    /// JSON list of stakeholders to approve instead of the draft.
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum MatrixCmd {
    /// Build the stakeholder × behavior matrix.
    Build(MatrixBuildArgs),
    /// Write the matrix cells.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct MatrixBuildArgs {
    /// Harm label for the specified-harm columns (repeatable). Defaults to
    /// the scenario's labels.
    #[arg(long = "harm-label")]
    pub harm_labels: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum VignettesCmd {
    /// Render every cell's vignette.
    Render,
    /// Write one record per cell with its vignette.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProviderKind {
    Mock,
    /// OpenAI-style completions endpoint.
    Openai,
    /// OpenAI-style chat endpoint.
    OpenaiChat,
}

#[derive(Debug, Args)]
pub struct ProviderArgs {
    #[arg(long, value_enum, default_value = "mock")]
    pub provider: ProviderKind,
    /// Endpoint URL (otherwise AHA_PROVIDER_URL).
    #[arg(long)]
    pub endpoint: Option<String>,
    #[arg(long, default_value = "davinci")]
    pub model: String,
    #[arg(long, default_value_t = 0.95)]
    pub temperature: f64,
    #[arg(long, default_value_t = 150)]
    pub max_tokens: u32,
    /// Fail on the first transient error instead of backing off.
    #[arg(long)]
    pub no_retry: bool,
}

#[derive(Debug, Args)]
pub struct CompleteArgs {
    #[command(flatten)]
    pub provider: ProviderArgs,
    /// Completions per cell.
    #[arg(long, default_value_t = 3)]
    pub n: u32,
    /// Concurrent provider calls.
    #[arg(long, default_value_t = 4)]
    pub parallelism: usize,
    /// Save the project after this many finished cells.
    #[arg(long, default_value_t = 16)]
    pub checkpoint_every: usize,
}

#[derive(Debug, Subcommand)]
pub enum CrowdCmd {
    /// Plan crowd tasks over the rendered vignettes.
    Plan(CrowdPlanArgs),
    /// Write the task bundle for the crowd platform.
    Export(CrowdExportArgs),
    /// Import a response bundle and apply quality checks.
    Import(CrowdImportArgs),
    /// Re-run quality checks over every stored response.
    Qc(CrowdQcArgs),
    /// Schedule a re-judgment round for vignettes short of accepted judgments.
    Requeue,
    /// Write scripted responses for pending tasks (dry runs and fixtures).
    Simulate(CrowdSimulateArgs),
}

#[derive(Debug, Args)]
pub struct CrowdPlanArgs {
    #[arg(long, default_value_t = 3)]
    pub judgments: usize,
    #[arg(long, default_value_t = 4)]
    pub task_size: usize,
    #[arg(long, default_value_t = 5)]
    pub cap: u32,
    /// Replace an existing plan that has no responses yet.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct CrowdExportArgs {
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Only tasks of this round; all pending tasks when omitted.
    #[arg(long)]
    pub round: Option<u32>,
}

#[derive(Debug, Args)]
pub struct CrowdImportArgs {
    /// Response bundle (.csv or .json).
    #[arg(long)]
    pub responses: PathBuf,
    /// Manual annotation file (JSON list of {judge_id, task_id, flag}).
    #[arg(long)]
    pub annotations: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CrowdQcArgs {
    #[arg(long)]
    pub annotations: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CrowdSimulateArgs {
    #[arg(long)]
    pub out: PathBuf,
    /// Share of responses that fail a check.
    #[arg(long, default_value_t = 0.4)]
    pub flag_fraction: f64,
}

#[derive(Debug, Subcommand)]
pub enum CodesCmd {
    /// Attach human code assignments to completions.
    Apply(CodesApplyArgs),
}

#[derive(Debug, Args)]
pub struct CodesApplyArgs {
    /// Assignments document: JSON list of {completion_id, coder_id, subcategory_ids}.
    #[arg(long)]
    pub file: PathBuf,
    /// Taxonomy document; the bundled taxonomy when omitted.
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
    /// Write the ids of accepted but uncoded completions here.
    #[arg(long)]
    pub worklist: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Only test this factor (scenario, error_direction, frequency, severity,
    /// conditioning, source).
    #[arg(long)]
    pub by: Option<String>,
    /// Other project files to include in cross-scenario tests.
    #[arg(long)]
    pub include: Vec<PathBuf>,
    /// Write the analysis JSON here as well.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the flat CSV of test results here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Serve this report file instead of generating one from the project.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Directory of static UI assets.
    #[arg(long)]
    pub assets: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8765")]
    pub addr: String,
}
