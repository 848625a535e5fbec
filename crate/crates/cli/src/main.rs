//! `atmohub`: run crawls, harvest endpoints, query the catalogue, export
//! statistics and serve the HTTP API.
//!
//! Exit codes: 0 on success, 1 when an operation fails, 2 for usage errors.

mod output;

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use atmohub_core::api::{search_query_from_params, serve, ApiError, ApiErrorCode, AppState};
use atmohub_core::catalogue::{CatalogueError, Symbol};
use atmohub_core::config::Config;
use atmohub_core::cql::search;
use atmohub_core::crawl::{read_seed_file, CrawlControl, CrawlSpec};
use atmohub_core::stats::{
    classify_countries, countries_csv, country_counts, providers_csv, top_providers, DEFAULT_CLASSES,
};
use atmohub_core::{LayerId, WorkspaceId};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::output::Table;

#[derive(Debug, Parser)]
#[command(
    name = "atmohub",
    version,
    about = "Focused OGC service crawler and atmospheric data catalogue"
)]
struct Cli {
    /// TOML configuration file shared with the API service.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Catalogue database file; overrides the configuration.
    #[arg(long, global = true, value_name = "PATH")]
    store: Option<PathBuf>,
    /// Vocabulary file for the relevance filter; overrides the configuration.
    #[arg(long, global = true, value_name = "FILE")]
    vocab: Option<PathBuf>,
    /// Tab-separated tables without alignment.
    #[arg(long, global = true)]
    plain: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Crawl from seed URLs or keywords and ingest the services found.
    Crawl(CrawlArgs),
    /// Fetch and ingest a single capabilities URL.
    Harvest {
        url: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Search the catalogue.
    Search(SearchArgs),
    /// Export discovery statistics.
    Stats(StatsArgs),
    /// Run the HTTP API until interrupted.
    Serve {
        /// Listen address; overrides the configuration.
        #[arg(long, value_name = "HOST:PORT")]
        listen: Option<String>,
    },
    /// Manage user workspaces.
    #[command(subcommand)]
    Workspace(WorkspaceCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ListFormat {
    Table,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ExportFormat {
    Csv,
    Json,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).multiple(true).args(["keywords", "seeds"]))]
struct CrawlArgs {
    /// Search keywords resolved to seeds through the configured seed index.
    #[arg(long, num_args = 1.., value_name = "WORD")]
    keywords: Vec<String>,
    /// File with one seed URL per line.
    #[arg(long, value_name = "FILE")]
    seeds: Option<PathBuf>,
    #[arg(long)]
    max_depth: Option<u32>,
    #[arg(long)]
    max_pages: Option<u32>,
    #[arg(long, value_name = "MS")]
    per_host_delay_ms: Option<u64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Debug, Args)]
struct SearchArgs {
    /// Free-text terms; every term must match.
    #[arg(long)]
    q: Option<String>,
    /// CQL constraint.
    #[arg(long)]
    cql: Option<String>,
    #[arg(long, requires = "time_end")]
    time_start: Option<String>,
    #[arg(long, requires = "time_start")]
    time_end: Option<String>,
    /// Comma-separated formats; a layer matches if it offers any of them.
    #[arg(long)]
    formats: Option<String>,
    /// minLon,minLat,maxLon,maxLat
    #[arg(long, allow_hyphen_values = true)]
    bbox: Option<String>,
    #[arg(long)]
    srs: Option<String>,
    #[arg(long, default_value_t = 0)]
    offset: usize,
    #[arg(long, default_value_t = 20)]
    limit: usize,
    #[arg(long, value_enum, default_value_t = ListFormat::Table)]
    format: ListFormat,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("kind").required(true).args(["countries", "providers"]))]
struct StatsArgs {
    /// Services per country with natural-breaks classes.
    #[arg(long)]
    countries: bool,
    /// Number of classes for --countries.
    #[arg(long, default_value_t = DEFAULT_CLASSES, requires = "countries", value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
    classes: usize,
    /// The N providers with most services.
    #[arg(long, value_name = "N", value_parser = clap::builder::RangedU64ValueParser::<usize>::new().range(1..))]
    providers: Option<usize>,
    /// Restrict --providers to one country code.
    #[arg(long, requires = "providers")]
    country: Option<String>,
    #[arg(long, value_enum, default_value_t = ExportFormat::Csv)]
    format: ExportFormat,
}

#[derive(Debug, Subcommand)]
enum WorkspaceCommand {
    /// Register a workspace owner. The password is read from ATMOHUB_PASSWORD.
    RegisterUser {
        #[arg(long)]
        email: String,
        #[arg(long)]
        name: String,
        #[arg(long, default_value = "")]
        institution: String,
        #[arg(long, env = "ATMOHUB_PASSWORD", hide_env_values = true)]
        password: String,
    },
    /// Create an empty workspace and print its id.
    Create {
        #[arg(long)]
        owner: String,
        #[arg(long)]
        name: String,
        #[arg(long, default_value = "EPSG:4326")]
        srs: String,
    },
    /// Link a catalogue layer into a workspace.
    AddLayer {
        workspace: i64,
        layer: i64,
        #[arg(long)]
        order: u32,
        /// Style override as JSON, e.g. '{"opacity":0.5}'.
        #[arg(long)]
        style: Option<String>,
    },
    /// Unlink a layer from a workspace; the layer stays in the catalogue.
    RemoveLayer { workspace: i64, layer: i64 },
    /// Print a workspace document.
    Show { workspace: i64 },
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
enum CliError {
    Usage(String),
    Failed(String),
}

impl CliError {
    fn failed(e: impl std::fmt::Display) -> Self {
        CliError::Failed(e.to_string())
    }

    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Failed(_) => ExitCode::from(1),
        }
    }
}

impl From<CatalogueError> for CliError {
    fn from(e: CatalogueError) -> Self {
        CliError::failed(e)
    }
}

/// Argument problems are usage errors; everything else failed at run time.
fn api_error(e: ApiError, usage: bool) -> CliError {
    let text = match &e.locator {
        Some(l) => format!("{l}: {}", e.message),
        None => e.message.clone(),
    };
    if usage && e.code == ApiErrorCode::InvalidParameter {
        CliError::Usage(text)
    } else {
        CliError::Failed(text)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let default_level = if matches!(cli.command, Command::Serve { .. }) {
        "info"
    } else {
        "warn"
    };
    tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| default_level.into()))
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (CliError::Usage(msg) | CliError::Failed(msg)) = &e;
            eprintln!("error: {msg}");
            e.exit_code()
        }
    }
}

fn load_config(cli: &Cli) -> Result<Config, CliError> {
    let mut config = match &cli.config {
        Some(path) => Config::load(path).map_err(CliError::failed)?,
        None => {
            let mut c = Config::default();
            c.apply_env(|name| std::env::var(name).ok()).map_err(CliError::failed)?;
            c
        }
    };
    if let Some(store) = &cli.store {
        config.store_path = Some(store.clone());
    }
    if let Some(vocab) = &cli.vocab {
        config.vocabulary_path = Some(vocab.clone());
    }
    Ok(config)
}

fn open_state(config: &Config) -> Result<AppState, CliError> {
    AppState::from_config(config).map_err(CliError::failed)
}

fn print_json(value: &impl serde::Serialize) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("output values serialize")
    );
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = load_config(&cli)?;
    match &cli.command {
        Command::Crawl(args) => crawl(&config, args),
        Command::Harvest { url, format } => harvest(&config, url, *format),
        Command::Search(args) => search_cmd(&config, args, cli.plain),
        Command::Stats(args) => stats(&config, args),
        Command::Serve { listen } => serve_cmd(config, listen.clone()),
        Command::Workspace(cmd) => workspace(&config, cmd),
    }
}

fn crawl(config: &Config, args: &CrawlArgs) -> Result<(), CliError> {
    let seed_urls = match &args.seeds {
        Some(path) => read_seed_file(path)
            .map_err(CliError::failed)?
            .into_iter()
            .map(String::from)
            .collect(),
        None => Vec::new(),
    };
    let spec = CrawlSpec {
        keywords: args.keywords.clone(),
        seed_urls,
        max_depth: args.max_depth.unwrap_or(config.crawl.max_depth),
        max_pages: args.max_pages.unwrap_or(config.crawl.max_pages),
        per_host_delay_ms: args.per_host_delay_ms.unwrap_or(config.crawl.per_host_delay_ms),
    };
    let state = open_state(config)?;
    let mut task = state.build_task("cli", &spec).map_err(|e| api_error(e, false))?;
    let report = state
        .run_task(&mut task, &CrawlControl::default())
        .map_err(|e| api_error(e, false))?;
    match args.format {
        Format::Json => print_json(&report),
        Format::Text => {
            println!("pages visited:        {}", report.pages_visited);
            println!("capabilities found:   {}", report.capabilities_found);
            println!("services ingested:    {}", report.services_ingested);
            println!("rejected by semantics: {}", report.services_rejected_by_semantics);
            println!("errors:               {}", report.errors.len());
            for e in &report.errors {
                println!("  {} {:?}", e.url, e.error);
            }
        }
    }
    Ok(())
}

fn harvest(config: &Config, url: &str, format: Format) -> Result<(), CliError> {
    let state = open_state(config)?;
    let summary = state.harvest(url).map_err(|e| match e.code {
        ApiErrorCode::InvalidParameter if url::Url::parse(url).is_err() => api_error(e, true),
        _ => api_error(e, false),
    })?;
    match format {
        Format::Json => print_json(&summary),
        Format::Text if summary.accepted > 0 => println!(
            "ingested {} as service {}: {} layers ({} new), matched {}",
            summary.url,
            summary.service_id.map(|id| id.to_string()).unwrap_or_default(),
            summary.layer_count,
            summary.layers_added,
            summary.matched_terms.join(", ")
        ),
        Format::Text => println!("rejected {}: no vocabulary term matched", summary.url),
    }
    Ok(())
}

fn search_cmd(config: &Config, args: &SearchArgs, plain: bool) -> Result<(), CliError> {
    let mut p: HashMap<String, String> = HashMap::new();
    let pairs = [
        ("q", &args.q),
        ("cql", &args.cql),
        ("timestart", &args.time_start),
        ("timeend", &args.time_end),
        ("formats", &args.formats),
        ("bbox", &args.bbox),
        ("srs", &args.srs),
    ];
    for (key, value) in pairs {
        if let Some(v) = value {
            p.insert(key.to_string(), v.clone());
        }
    }
    p.insert("offset".into(), args.offset.to_string());
    p.insert("limit".into(), args.limit.to_string());
    let query = search_query_from_params(&p).map_err(|e| api_error(e, true))?;
    let state = open_state(config)?;
    let page = search(state.catalogue(), &query).map_err(|e| match e {
        atmohub_core::cql::SearchError::InvalidQuery(m) => CliError::Usage(m),
        other => CliError::failed(other),
    })?;
    match args.format {
        ListFormat::Json => print_json(&page),
        ListFormat::Table => {
            let mut table = Table::new(&["layer", "service", "rank", "quality", "title"]);
            for r in &page.results {
                table.row(vec![
                    r.layer_id.to_string(),
                    r.service_id.to_string(),
                    format!("{:.2}", r.match_rank),
                    format!("{:.3}", r.quality_score),
                    r.title.clone(),
                ]);
            }
            if !page.results.is_empty() {
                print!("{}", table.render(plain));
            }
        }
    }
    Ok(())
}

fn stats(config: &Config, args: &StatsArgs) -> Result<(), CliError> {
    let state = open_state(config)?;
    let catalogue = state.catalogue();
    if args.countries {
        let result = classify_countries(&country_counts(catalogue, None)?, args.classes);
        match args.format {
            ExportFormat::Csv => print!("{}", countries_csv(&result)),
            ExportFormat::Json => print_json(&result),
        }
    } else {
        let n = args.providers.expect("clap requires --countries or --providers");
        let result = top_providers(catalogue, n, args.country.as_deref()).map_err(CliError::failed)?;
        match args.format {
            ExportFormat::Csv => print!("{}", providers_csv(&result)),
            ExportFormat::Json => print_json(&result),
        }
    }
    Ok(())
}

fn serve_cmd(mut config: Config, listen: Option<String>) -> Result<(), CliError> {
    if let Some(addr) = listen {
        config.listen = addr;
        config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let state = Arc::new(open_state(&config)?);
    let runtime = tokio::runtime::Runtime::new().map_err(CliError::failed)?;
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&config.listen)
            .await
            .map_err(CliError::failed)?;
        let addr = listener.local_addr().map_err(CliError::failed)?;
        println!("listening on http://{addr}");
        tracing::info!(%addr, "serving");
        serve(listener, state, shutdown_signal())
            .await
            .map_err(CliError::failed)?;
        tracing::info!("stopped");
        Ok(())
    })
}

async fn shutdown_signal() {
    let interrupt = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    {
        use tokio::signal::unix::{signal, SignalKind};
        match signal(SignalKind::terminate()) {
            Ok(mut term) => {
                tokio::select! {
                    _ = interrupt => {}
                    _ = term.recv() => {}
                }
            }
            Err(_) => interrupt.await,
        }
    }
    #[cfg(not(unix))]
    interrupt.await;
}

fn workspace(config: &Config, cmd: &WorkspaceCommand) -> Result<(), CliError> {
    let state = open_state(config)?;
    let catalogue = state.catalogue();
    let usage_or_failed = |e: CatalogueError| match e {
        CatalogueError::InvalidEmail(_) | CatalogueError::InvalidStyle(_) => CliError::Usage(e.to_string()),
        other => CliError::failed(other),
    };
    let ws = match cmd {
        WorkspaceCommand::RegisterUser {
            email,
            name,
            institution,
            password,
        } => {
            let id = catalogue
                .register_user(email, name, institution, password)
                .map_err(usage_or_failed)?;
            println!("{id}");
            return Ok(());
        }
        WorkspaceCommand::Create { owner, name, srs } => {
            let id = catalogue.create_workspace(owner, name, srs).map_err(usage_or_failed)?;
            println!("{id}");
            return Ok(());
        }
        WorkspaceCommand::AddLayer {
            workspace,
            layer,
            order,
            style,
        } => {
            let style: Option<Symbol> = style
                .as_deref()
                .map(serde_json::from_str)
                .transpose()
                .map_err(|e| CliError::Usage(format!("--style: {e}")))?;
            catalogue
                .add_styled_layer_to_workspace(WorkspaceId(*workspace), LayerId(*layer), *order, style)
                .map_err(usage_or_failed)?
        }
        WorkspaceCommand::RemoveLayer { workspace, layer } => catalogue
            .remove_layer_from_workspace(WorkspaceId(*workspace), LayerId(*layer))
            .map_err(usage_or_failed)?,
        WorkspaceCommand::Show { workspace } => catalogue.get_workspace(WorkspaceId(*workspace))?,
    };
    println!("{}", ws.to_json());
    Ok(())
}
