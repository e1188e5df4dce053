//! Campaign and benchmark directories on disk.

use crate::{read_program, CliError};
use greycone::campaign::CampaignState;
use greycone::coverage::CoverageMap;
use greycone::dut::InstrumentedProgram;
use greycone::report::{emit_lcov, series_csv, CampaignStats, RunRecord, Timing};
use std::fs;
use std::io;
use std::path::Path;

pub struct BenchOutput {
    pub table: String,
    pub csv: String,
    pub records: Vec<RunRecord>,
    pub stats: Vec<CampaignStats>,
}

fn json<T: serde::Serialize>(v: &T) -> io::Result<String> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(io::Error::other)
}

/// Writes `queue/`, `stats.json`, `coverage.lcov`, `series.csv`,
/// `campaign.toml`, `tree_stats.json`, `timing.json` and, when requested,
/// `predicates/`.
pub fn write_campaign(dir: &Path, ip: &InstrumentedProgram, st: &CampaignState, source: &str) -> io::Result<()> {
    let queue = dir.join("queue");
    if queue.exists() {
        fs::remove_dir_all(&queue)?;
    }
    fs::create_dir_all(&queue)?;
    for (i, t) in st.queue.entries.iter().enumerate() {
        fs::write(queue.join(format!("id:{i:06},src:{}", t.origin.as_str())), &t.bytes)?;
    }
    let stats = CampaignStats::new(st, ip.name(), source);
    fs::write(dir.join("stats.json"), json(&stats)?)?;
    fs::write(dir.join("coverage.lcov"), emit_lcov(&st.tracker.map, ip, source))?;
    fs::write(dir.join("series.csv"), series_csv(&st.tracker.series))?;
    fs::write(dir.join("campaign.toml"), toml::to_string(&st.config).map_err(io::Error::other)?)?;
    fs::write(dir.join("tree_stats.json"), json(&st.tree_stats)?)?;
    fs::write(dir.join("timing.json"), json(&Timing::new(st))?)?;
    if !st.predicates.is_empty() {
        let pdir = dir.join("predicates");
        fs::create_dir_all(&pdir)?;
        for (i, (phase, p)) in st.predicates.iter().enumerate() {
            let name = format!("id:{i:06},phase:{phase},site:{},outcome:{}", p.target.0, p.target.1);
            fs::write(pdir.join(name), format!("; {phase} site {} outcome {}: {}\n{}", p.target.0, p.target.1, p.verdict, p.text))?;
        }
    }
    Ok(())
}

pub fn write_bench(dir: &Path, b: &BenchOutput) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("table.txt"), &b.table)?;
    fs::write(dir.join("table.csv"), &b.csv)?;
    fs::write(dir.join("stats.json"), json(&b.stats)?)?;
    for r in &b.records {
        fs::write(dir.join(format!("series-{}-{}.csv", r.benchmark, r.mode)), series_csv(&r.series))?;
    }
    Ok(())
}

/// Rebuilds `coverage.lcov` and `series.csv` in `dir` from its `stats.json`.
pub fn regenerate(dir: &Path, dut: Option<&Path>) -> Result<String, CliError> {
    let path = dir.join("stats.json");
    let text = fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let stats: CampaignStats = serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let source = dut.map_or_else(|| Path::new(&stats.source).to_path_buf(), Path::to_path_buf);
    let ip = read_program(&source)?;
    if ip.edge_count() != stats.coverage_flags.len() {
        return Err(CliError::Usage(format!("{} does not match the program in {}", source.display(), path.display())));
    }
    let map = CoverageMap::from_flags(stats.coverage_flags);
    let lcov = emit_lcov(&map, &ip, &stats.source);
    let write = |name: &str, body: &str| fs::write(dir.join(name), body).map_err(|e| CliError::Usage(format!("{}: {e}", dir.display())));
    write("coverage.lcov", &lcov)?;
    write("series.csv", &series_csv(&stats.series))?;
    Ok(format!("{}: {:.1}% branch coverage, lcov and series rewritten\n", stats.program, map.coverage_pct(&ip)))
}
