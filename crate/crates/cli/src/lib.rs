//! Command-line front end for the `twmk-core` engines.
//!
//! [`run`] does all the work and returns the text and exit status, so tests can
//! drive it without spawning processes.

pub mod cache;
pub mod commands;
pub mod report;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use twmk_core::catalog::find_space;

use crate::cache::{cache_key, sha256_hex, Cache, RunRecord, ENGINE_VERSION};
use crate::commands::CommandError;
use crate::report::Format;

/// Environment variable naming the cache directory; caching is off when unset.
pub const CACHE_ENV: &str = "TWMK_CACHE_DIR";
/// Environment variable overriding the default catalog directory.
pub const CATALOG_ENV: &str = "TWMK_CATALOG";

#[derive(Debug, Parser)]
#[command(name = "twmk", version, about = "Twisted Morava K-theory at the prime 2")]
pub struct Cli {
    /// Directory of space documents.
    #[arg(long, global = true, value_name = "DIR")]
    pub catalog: Option<PathBuf>,
    /// Output layout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    /// Skip the result cache even if it is configured.
    #[arg(long, global = true)]
    pub no_cache: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// K(n)_*(K(Z, n+2); k), the Eilenberg-MacLane vanishing table.
    TwistedEm {
        #[arg(long)]
        height: u32,
        #[arg(long, allow_negative_numbers = true)]
        multiplier: i64,
        #[arg(long, default_value_t = 2)]
        truncation: u32,
        #[arg(long, default_value_t = 2)]
        prime: u32,
    },
    /// First differential and next page of the twisted spectral sequence.
    Ahss {
        #[arg(long)]
        space: String,
        /// Defaults to the height recorded in the catalog.
        #[arg(long)]
        height: Option<u32>,
        /// `[k*]class`, e.g. `1*sigma3`.
        #[arg(long, allow_hyphen_values = true)]
        twist: String,
        /// Also print E_2 and the differential ranks.
        #[arg(long)]
        pages: bool,
    },
    /// Twisted homology through the universal coefficient theorem.
    Uct {
        #[arg(long)]
        space: String,
        #[arg(long, allow_hyphen_values = true)]
        twist: String,
    },
    /// Characters of an Eilenberg-MacLane algebra, e.g. `em-mod-p(2,2)`.
    Characters {
        #[arg(long)]
        algebra: String,
        #[arg(long)]
        height: u32,
        #[arg(long, default_value_t = 2)]
        prime: u32,
        #[arg(long, default_value_t = 1)]
        truncation: u32,
    },
    /// Bounds on K(1) ranks from twisted integral K-groups, e.g. `Z^2 + Z/6`.
    Sandwich {
        #[arg(long)]
        group_even: String,
        #[arg(long)]
        group_odd: String,
    },
    /// List the catalog.
    Spaces,
}

impl Command {
    /// Canonical text of the request, independent of flag order and spelling.
    fn normal_form(&self) -> String {
        match self {
            Command::TwistedEm {
                height,
                multiplier,
                truncation,
                prime,
            } => format!("twisted-em prime={prime} height={height} multiplier={multiplier} truncation={truncation}"),
            Command::Ahss {
                space,
                height,
                twist,
                pages,
            } => format!(
                "ahss space={space} height={} twist={} pages={pages}",
                height.map_or("default".to_string(), |h| h.to_string()),
                twist.trim()
            ),
            Command::Uct { space, twist } => format!("uct space={space} twist={}", twist.trim()),
            Command::Characters {
                algebra,
                height,
                prime,
                truncation,
            } => format!(
                "characters algebra={} prime={prime} height={height} truncation={truncation}",
                algebra.replace(' ', "")
            ),
            Command::Sandwich { group_even, group_odd } => {
                format!("sandwich even={} odd={}", group_even.trim(), group_odd.trim())
            }
            Command::Spaces => "spaces".to_string(),
        }
    }

    fn space(&self) -> Option<&str> {
        match self {
            Command::Ahss { space, .. } | Command::Uct { space, .. } => Some(space),
            _ => None,
        }
    }
}

/// What a run printed and how it exited.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub stdout: String,
    pub stderr: String,
    pub code: i32,
    pub cache_hit: bool,
}

impl Outcome {
    fn error(code: i32, message: String) -> Self {
        Outcome {
            stdout: String::new(),
            stderr: message,
            code,
            cache_hit: false,
        }
    }
}

fn execute(cli: &Cli, catalog: &Path) -> Result<String, CommandError> {
    use commands::*;
    let report = match &cli.command {
        Command::TwistedEm {
            height,
            multiplier,
            truncation,
            prime,
        } => twisted_em_cmd(*prime, *height, *multiplier, *truncation)?,
        Command::Ahss {
            space,
            height,
            twist,
            pages,
        } => ahss_cmd(catalog, space, *height, twist, *pages)?,
        Command::Uct { space, twist } => uct_cmd(catalog, space, twist)?,
        Command::Characters {
            algebra,
            height,
            prime,
            truncation,
        } => characters_cmd(algebra, *prime, *height, *truncation)?,
        Command::Sandwich { group_even, group_odd } => sandwich_cmd(group_even, group_odd)?,
        Command::Spaces => spaces_cmd(catalog)?,
    };
    Ok(report.render(cli.format))
}

/// Hashes of the catalog documents the command reads.
fn input_hashes(cli: &Cli, catalog: &Path) -> Result<Vec<(String, String)>, CommandError> {
    if let Some(space) = cli.command.space() {
        let (_, text) = find_space(catalog, space)?;
        return Ok(vec![(space.to_string(), sha256_hex(text.as_bytes()))]);
    }
    if matches!(cli.command, Command::Spaces) {
        let mut out = Vec::new();
        for d in twmk_core::catalog::list_spaces(catalog)? {
            let (_, text) = find_space(catalog, &d.name)?;
            out.push((d.name, sha256_hex(text.as_bytes())));
        }
        return Ok(out);
    }
    Ok(Vec::new())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, cache_dir: Option<PathBuf>, default_catalog: Option<PathBuf>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome::error(2, text)
            } else {
                Outcome {
                    stdout: text,
                    stderr: String::new(),
                    code: 0,
                    cache_hit: false,
                }
            };
        }
    };
    let catalog = cli
        .catalog
        .clone()
        .or(default_catalog)
        .unwrap_or_else(|| PathBuf::from("catalog"));
    let command_line: Vec<String> = args.iter().map(|a| a.to_string_lossy().into_owned()).collect();

    let cache = cache_dir.filter(|_| !cli.no_cache).map(Cache::new);
    let start = Instant::now();
    let inputs = match input_hashes(&cli, &catalog) {
        Ok(i) => i,
        Err(e) => return Outcome::error(e.exit_code(), format!("error: {e}\n")),
    };
    let normal = format!("{} format={}", cli.command.normal_form(), cli.format.as_str());
    let key = cache_key(&normal, &inputs);
    if let Some(cache) = &cache {
        if let Ok(Some(rec)) = cache.get(&key) {
            return Outcome {
                stdout: rec.output,
                stderr: String::new(),
                code: rec.exit_code,
                cache_hit: true,
            };
        }
    }
    match execute(&cli, &catalog) {
        Ok(stdout) => {
            let mut stderr = String::new();
            if let Some(cache) = &cache {
                let record = RunRecord {
                    command_line,
                    config_hash: sha256_hex(normal.as_bytes()),
                    input_hashes: inputs,
                    engine_version: ENGINE_VERSION.to_string(),
                    exit_code: 0,
                    output: stdout.clone(),
                    wall_time_ms: start.elapsed().as_millis() as u64,
                };
                if let Err(e) = cache.put(&key, &record) {
                    stderr = format!("warning: {e}\n");
                }
            }
            Outcome {
                stdout,
                stderr,
                code: 0,
                cache_hit: false,
            }
        }
        Err(e) => {
            let label = match e {
                CommandError::Usage(_) => "error",
                CommandError::Refused(_) => "refused",
            };
            Outcome::error(e.exit_code(), format!("{label}: {e}\n"))
        }
    }
}
