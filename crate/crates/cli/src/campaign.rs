//! Campaign files and the report layout on disk.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use kglab::checks::{CheckName, CheckOutcome, CheckParams, CheckReport};
use serde::{Deserialize, Serialize};

/// Bumped whenever the report layout changes.
pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCampaign {
    name: String,
    #[serde(default)]
    checks: Vec<String>,
    output: Option<PathBuf>,
    seed: Option<u64>,
    #[serde(default)]
    params: CheckParams,
}

#[derive(Debug, Clone)]
pub struct Campaign {
    pub name: String,
    pub checks: Vec<CheckName>,
    pub output: Option<PathBuf>,
    pub seed: Option<u64>,
    pub params: CheckParams,
}

impl Campaign {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let raw: RawCampaign = toml::from_str(text)?;
        let mut checks = Vec::with_capacity(raw.checks.len());
        for (i, name) in raw.checks.iter().enumerate() {
            match name.parse::<CheckName>() {
                Ok(c) if checks.contains(&c) => bail!("checks[{i}]: `{name}` listed twice"),
                Ok(c) => checks.push(c),
                Err(_) => {
                    let known: Vec<&str> = CheckName::ALL.iter().map(|c| c.as_str()).collect();
                    bail!("checks[{i}]: unknown check `{name}` (known: {})", known.join(", "))
                }
            }
        }
        Ok(Self { name: raw.name, checks, output: raw.output, seed: raw.seed, params: raw.params })
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }
}

#[derive(Debug, Serialize)]
struct ReportFile<'a> {
    schema_version: u32,
    campaign: &'a str,
    check: &'a str,
    seed: u64,
    #[serde(flatten)]
    report: &'a CheckReport,
    tables: Vec<String>,
}

#[derive(Debug, Serialize)]
struct ErrorFile<'a> {
    schema_version: u32,
    campaign: &'a str,
    check: &'a str,
    seed: u64,
    paper_anchor: &'a str,
    error: String,
    pass: bool,
}

/// Writes `<check>.json` and `<check>.<table>.csv`; returns whether the check passed.
pub fn write_result(
    dir: &Path,
    campaign: &str,
    check: CheckName,
    seed: u64,
    result: &kglab::Result<CheckOutcome>,
) -> anyhow::Result<bool> {
    let json_path = dir.join(format!("{check}.json"));
    match result {
        Ok(out) => {
            let mut tables = Vec::new();
            for t in &out.tables {
                let prefix = check.as_str().replace('-', "_");
                let file = match t.name.strip_prefix(&prefix) {
                    Some("") => format!("{check}.csv"),
                    Some(rest) => format!("{check}.{}.csv", rest.trim_start_matches('_')),
                    None => format!("{check}.{}.csv", t.name),
                };
                let f = fs::File::create(dir.join(&file))?;
                t.write_csv(std::io::BufWriter::new(f))?;
                tables.push(file);
            }
            let body = ReportFile { schema_version: SCHEMA_VERSION, campaign, check: check.as_str(), seed, report: &out.report, tables };
            fs::write(&json_path, serde_json::to_string_pretty(&body)? + "\n")?;
            Ok(out.report.pass)
        }
        Err(e) => {
            let body = ErrorFile {
                schema_version: SCHEMA_VERSION,
                campaign,
                check: check.as_str(),
                seed,
                paper_anchor: check.anchor(),
                error: e.to_string(),
                pass: false,
            };
            fs::write(&json_path, serde_json::to_string_pretty(&body)? + "\n")?;
            Ok(false)
        }
    }
}
