//! Report emission: JSON to stdout, plus report, CSV and metadata files
//! when an output directory is configured.

use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::json;
use shellspec::report::{to_json, LongTable};

use crate::config::RunConfig;
use crate::CliError;

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    command: &'a str,
    version: &'a str,
    config: &'a RunConfig,
    results: &'a R,
}

pub struct Emitter {
    pub command: &'static str,
    pub started: Instant,
    pub started_at: SystemTime,
    pub threads: usize,
}

impl Emitter {
    pub fn emit<R: Serialize>(
        &self,
        config: &RunConfig,
        results: &R,
        table: &LongTable,
        extra: &[(String, String)],
    ) -> Result<(), CliError> {
        let env = Envelope { command: self.command, version: env!("CARGO_PKG_VERSION"), config, results };
        let text = to_json(&env)?;
        print!("{text}");
        if let Some(dir) = &config.output {
            std::fs::create_dir_all(dir)?;
            write(dir, &format!("{}.json", self.command), &text)?;
            write(dir, &format!("{}.csv", self.command), &table.to_csv())?;
            for (name, body) in extra {
                write(dir, name, body)?;
            }
            let secs = |t: SystemTime| t.duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
            let meta = json!({
                "command": self.command,
                "started_unix": secs(self.started_at),
                "finished_unix": secs(SystemTime::now()),
                "elapsed_seconds": self.started.elapsed().as_secs_f64(),
                "threads": self.threads,
                "argv": std::env::args().collect::<Vec<_>>(),
            });
            write(dir, &format!("{}.meta.json", self.command), &serde_json::to_string_pretty(&meta)?)?;
        }
        Ok(())
    }
}

fn write(dir: &Path, name: &str, body: &str) -> Result<(), CliError> {
    std::fs::write(dir.join(name), body)?;
    Ok(())
}
