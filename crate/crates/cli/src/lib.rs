//! Command-line front end: single campaigns, the corpus benchmark, and the
//! debugging helpers around them.

mod output;

use clap::{Args, Parser, Subcommand, ValueEnum};
use greycone::budget::{Budget, Stall};
use greycone::campaign::{run_campaign, CampaignConfig, CampaignError, CampaignState, Mode};
use greycone::corpus::CORPUS;
use greycone::dut::{load, InstrumentedProgram};
use greycone::oracle::reachable_branch_edges;
use greycone::report::{table_csv, table_text, CampaignStats, RunRecord};
use greycone::solver;
use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

pub use output::{write_bench, write_campaign, BenchOutput};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "greycone", version, about = "Hybrid fuzzing and concolic test generation for MiniDUT programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run one campaign on a program.
    Run(RunArgs),
    /// Run every corpus program in every mode and print the comparison table.
    Bench(BenchArgs),
    /// Parse and type-check programs, then print their branch sites.
    ParseCheck {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Solve a dumped path predicate.
    Solve {
        file: PathBuf,
        #[arg(long, default_value_t = solver::DEFAULT_NODE_BUDGET)]
        node_budget: u64,
    },
    /// Regenerate coverage.lcov and series.csv from a campaign's stats.json.
    Report {
        /// Campaign directory holding stats.json.
        dir: PathBuf,
        /// Program source, if it has moved since the campaign ran.
        #[arg(long)]
        dut: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Greycone,
    Fuzz,
    Concolic,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Greycone => Mode::Greycone,
            ModeArg::Fuzz => Mode::FuzzOnly,
            ModeArg::Concolic => Mode::ConcolicOnly,
        }
    }
}

/// Budget and threshold flags shared by `run` and `bench`.
#[derive(Args, Debug, Clone)]
pub struct CampaignArgs {
    /// Target branch coverage in percent.
    #[arg(long, default_value_t = 100.0)]
    pub target: f64,
    /// Global budget in executions (reproducible).
    #[arg(long, conflicts_with = "budget_secs")]
    pub budget_execs: Option<u64>,
    /// Global budget in wall-clock seconds.
    #[arg(long)]
    pub budget_secs: Option<f64>,
    /// Fuzzer stall threshold: executions with an execution budget, seconds otherwise.
    #[arg(long)]
    pub fuzz_stall: Option<u64>,
    /// Concolic stall threshold: solver calls with an execution budget, seconds otherwise.
    #[arg(long)]
    pub conc_stall: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Symbolic iterations per loop site before concretizing.
    #[arg(long, default_value_t = greycone::concolic::DEFAULT_FORK_LIMIT)]
    pub fork_limit: u32,
    /// Output directory.
    #[arg(long, env = "GREYCONE_OUT", default_value = "greycone-out")]
    pub out: PathBuf,
}

impl CampaignArgs {
    pub fn config(&self, mode: Mode) -> CampaignConfig {
        let mut cfg = match (self.budget_execs, self.budget_secs) {
            (Some(n), _) => CampaignConfig::logical(mode, n, self.seed),
            (None, Some(s)) => CampaignConfig { mode, budget: Budget::Secs(s), rng_seed: self.seed, ..CampaignConfig::default() },
            (None, None) => CampaignConfig { mode, rng_seed: self.seed, ..CampaignConfig::default() },
        };
        let logical = matches!(cfg.budget, Budget::Execs(_));
        if let Some(n) = self.fuzz_stall {
            cfg.fuzz_stall = if logical { Stall::Executions(n) } else { Stall::Seconds(n as f64) };
        }
        if let Some(n) = self.conc_stall {
            cfg.concolic_stall = if logical { Stall::SolverCalls(n) } else { Stall::Seconds(n as f64) };
        }
        cfg.target_coverage_pct = self.target;
        cfg.fork_limit = self.fork_limit;
        cfg
    }
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(long)]
    pub dut: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Greycone)]
    pub mode: ModeArg,
    /// Write every solver query to predicates/ in the campaign directory.
    #[arg(long)]
    pub dump_predicates: bool,
    #[command(flatten)]
    pub campaign: CampaignArgs,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[command(flatten)]
    pub campaign: CampaignArgs,
}

/// Failure of a subcommand, mapped to an exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Internal(_) => EXIT_INTERNAL,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "error: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<CampaignError> for CliError {
    fn from(e: CampaignError) -> Self {
        match e {
            CampaignError::Config(c) => CliError::Usage(c.to_string()),
            CampaignError::Tree(t) => CliError::Internal(t.to_string()),
        }
    }
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Usage(format!("{}: {e}", path.display()))
}

pub fn read_program(path: &Path) -> Result<InstrumentedProgram, CliError> {
    let src = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let name = path.file_stem().map_or("main".into(), |s| s.to_string_lossy().into_owned());
    load(&name, &src).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Everything the user should see goes to `out` and `err`.
pub fn cli_main<I, T>(args: I, out: &mut dyn std::io::Write, err: &mut dyn std::io::Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn std::io::Write) -> Result<(), CliError> {
    let w = |out: &mut dyn std::io::Write, s: &str| out.write_all(s.as_bytes()).map_err(|e| CliError::Internal(e.to_string()));
    match cmd {
        Command::Run(a) => {
            let text = run(&a)?;
            w(out, &text)
        }
        Command::Bench(a) => {
            let b = bench(&a.campaign)?;
            let dir = a.campaign.out.join("bench");
            write_bench(&dir, &b).map_err(|e| io_err(&dir, e))?;
            w(out, &b.table)
        }
        Command::ParseCheck { files } => {
            for f in files {
                let ip = read_program(&f)?;
                let mut text = format!("{}: ok, {} inputs, {} blocks, {} branch sites\n", f.display(), ip.program.inputs.len(), ip.program.blocks.len(), ip.sites().len());
                for s in ip.sites() {
                    text += &format!("  site {} at line {}\n", s.block, ip.program.lines[s.block]);
                }
                w(out, &text)?;
            }
            Ok(())
        }
        Command::Solve { file, node_budget } => {
            let text = std::fs::read_to_string(&file).map_err(|e| io_err(&file, e))?;
            let conjuncts = greycone::sym::parse_conjuncts(&text).map_err(|e| CliError::Usage(format!("{}: {e}", file.display())))?;
            let r = solver::solve(&conjuncts, node_budget).map_err(|e| CliError::Usage(format!("{}: {e}", file.display())))?;
            let mut text = format!("status: {:?}\nnodes: {}\n", r.status, r.stats.nodes_explored).to_lowercase();
            for (name, v) in r.model.iter().flatten() {
                text += &format!("{name} = {v}\n");
            }
            w(out, &text)
        }
        Command::Report { dir, dut } => {
            let text = output::regenerate(&dir, dut.as_deref())?;
            w(out, &text)
        }
    }
}

fn run(a: &RunArgs) -> Result<String, CliError> {
    let ip = read_program(&a.dut)?;
    let mut cfg = a.campaign.config(a.mode.into());
    cfg.dump_predicates = a.dump_predicates;
    let st = run_campaign(&ip, &[], &cfg)?;
    st.check_invariants().map_err(CliError::Internal)?;
    let dir = a.campaign.out.join(format!("{}-{}", ip.name(), cfg.mode));
    let source = a.dut.display().to_string();
    write_campaign(&dir, &ip, &st, &source).map_err(|e| io_err(&dir, e))?;
    let mut text = String::new();
    for p in &st.phase_log {
        text += &format!("{:<8} {:>9} execs {:>5} tests {:>6.1}%  {}\n", p.phase, p.executions, p.retained, p.coverage_pct, p.stop_reason);
    }
    text += &format!("coverage {:.1}% after {} executions, {} tests in {}\n", st.coverage_pct(), st.executions, st.queue.len(), dir.display());
    Ok(text)
}

/// One row per corpus program and mode, computed on worker threads and
/// assembled in corpus order.
pub fn bench(a: &CampaignArgs) -> Result<BenchOutput, CliError> {
    let jobs: Vec<(usize, Mode)> = (0..CORPUS.len()).flat_map(|i| Mode::ALL.map(|m| (i, m))).collect();
    let programs: Vec<InstrumentedProgram> = CORPUS
        .iter()
        .map(|e| load(e.name, e.source).map_err(|err| CliError::Internal(format!("corpus {}: {err}", e.name))))
        .collect::<Result<_, _>>()?;
    let results: Vec<Result<(CampaignState, Option<f64>), CliError>> = std::thread::scope(|s| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(i, mode)| {
                let ip = &programs[i];
                let cfg = a.config(mode);
                s.spawn(move || -> Result<_, CliError> {
                    let st = run_campaign(ip, &[], &cfg)?;
                    st.check_invariants().map_err(CliError::Internal)?;
                    let reach = reachable_branch_edges(ip, cfg.step_limit).map(|r| r.pct());
                    Ok((st, reach))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap_or_else(|_| Err(CliError::Internal("worker panicked".into())))).collect()
    });
    let mut records = Vec::new();
    let mut stats = Vec::new();
    for (&(i, _), r) in jobs.iter().zip(results) {
        let (st, reach) = r?;
        let name = CORPUS[i].name;
        records.push(RunRecord::new(name, &st, reach));
        stats.push(CampaignStats::new(&st, name, &format!("corpus/{name}.dut")));
    }
    Ok(BenchOutput { table: table_text(&records), csv: table_csv(&records), records, stats })
}
