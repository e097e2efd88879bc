//! Run configuration and the artifact writers for `report.json`,
//! `tables/*.csv` and `plots/*.svg`.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use hypgeo::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::svg::Figure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

/// Everything that determines a run. Stored in every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: String,
    #[serde(default)]
    pub parameters: BTreeMap<String, serde_json::Value>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

pub fn default_seed() -> u64 {
    42
}

pub fn default_output_dir() -> PathBuf {
    PathBuf::from("hypgeo-out")
}

pub fn default_formats() -> Vec<Format> {
    vec![Format::Json]
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = fs::read_to_string(path)?;
        let cfg: RunConfig = serde_json::from_str(&text)?;
        Ok(cfg)
    }

    /// Command line equivalent to this configuration.
    pub fn to_args(&self) -> Result<Vec<String>> {
        let mut args = vec!["hypgeo".to_string()];
        args.extend(self.command.split_whitespace().map(str::to_string));
        for (key, value) in &self.parameters {
            let flag = format!("--{}", key.replace('_', "-"));
            match value {
                serde_json::Value::Null | serde_json::Value::Bool(false) => {}
                serde_json::Value::Bool(true) => args.push(flag),
                serde_json::Value::Array(items) => {
                    for item in items {
                        args.push(flag.clone());
                        args.push(scalar(item)?);
                    }
                }
                other => {
                    args.push(flag);
                    args.push(scalar(other)?);
                }
            }
        }
        args.extend(["--seed".into(), self.seed.to_string(), "--output-dir".into()]);
        args.push(self.output_dir.to_string_lossy().into_owned());
        let formats: Vec<&str> = self.formats.iter().map(|f| f.name()).collect();
        args.extend(["--format".into(), formats.join(",")]);
        Ok(args)
    }
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        }
    }
}

fn scalar(v: &serde_json::Value) -> Result<String> {
    match v {
        serde_json::Value::String(s) => Ok(s.clone()),
        serde_json::Value::Number(n) => Ok(n.to_string()),
        serde_json::Value::Bool(b) => Ok(b.to_string()),
        other => Err(Error::Domain(format!("unsupported parameter value {other}"))),
    }
}

/// Writes the artifacts of one run and remembers their paths.
pub struct Output {
    pub run: RunConfig,
    timestamp: bool,
    pub written: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    run: &'a RunConfig,
    result: &'a T,
}

impl Output {
    pub fn new(run: RunConfig, timestamp: bool) -> Self {
        Output { run, timestamp, written: Vec::new() }
    }

    pub fn wants(&self, f: Format) -> bool {
        self.run.formats.contains(&f)
    }

    fn create(&mut self, sub: Option<&str>, name: &str) -> Result<(PathBuf, fs::File)> {
        let dir = match sub {
            Some(s) => self.run.output_dir.join(s),
            None => self.run.output_dir.clone(),
        };
        fs::create_dir_all(&dir)?;
        let path = dir.join(name);
        let file = fs::File::create(&path)?;
        self.written.push(path.clone());
        Ok((path, file))
    }

    /// `report.json` holding the run configuration and `result`.
    pub fn json<T: Serialize>(&mut self, result: &T) -> Result<()> {
        if !self.wants(Format::Json) {
            return Ok(());
        }
        let run = self.run.clone();
        let mut text = serde_json::to_string_pretty(&Report { run: &run, result })?;
        text.push('\n');
        let (_, mut f) = self.create(None, "report.json")?;
        f.write_all(text.as_bytes())?;
        Ok(())
    }

    /// `tables/<name>.csv`, led by a `# run:` comment line.
    pub fn csv(&mut self, name: &str, header: &[&str], rows: Vec<Vec<String>>) -> Result<()> {
        self.csv_with(name, |w| {
            let mut c = csv::Writer::from_writer(w);
            c.write_record(header)?;
            for r in rows {
                c.write_record(r)?;
            }
            c.flush()?;
            Ok(())
        })
    }

    /// Like [`Output::csv`] for library writers that emit their own header.
    pub fn csv_with(&mut self, name: &str, body: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        if !self.wants(Format::Csv) {
            return Ok(());
        }
        let mut buf = format!("# run: {}\n", serde_json::to_string(&self.run)?).into_bytes();
        body(&mut buf)?;
        let (_, mut f) = self.create(Some("tables"), &format!("{name}.csv"))?;
        f.write_all(&buf)?;
        Ok(())
    }

    /// `plots/<name>.svg`.
    pub fn svg(&mut self, name: &str, fig: Figure) -> Result<()> {
        if !self.wants(Format::Svg) {
            return Ok(());
        }
        let stamp = self.timestamp.then(|| {
            let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
            format!("unix {secs}")
        });
        let text = fig.describe(format!("run: {}", serde_json::to_string(&self.run)?)).timestamp(stamp).render();
        let (_, mut f) = self.create(Some("plots"), &format!("{name}.svg"))?;
        f.write_all(text.as_bytes())?;
        Ok(())
    }
}

pub fn num(x: f64) -> String {
    format!("{x:e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_rejects_unknown_keys() {
        let ok = r#"{"command": "polygon pentagon", "parameters": {"a": 1.2, "b": 1.3}, "seed": 7}"#;
        let cfg: RunConfig = serde_json::from_str(ok).unwrap();
        assert_eq!(cfg.formats, vec![Format::Json]);
        let args = cfg.to_args().unwrap();
        assert_eq!(&args[..6], ["hypgeo", "polygon", "pentagon", "--a", "1.2", "--b"]);
        assert!(args.windows(2).any(|w| w == ["--seed", "7"]));
        let bad = r#"{"command": "polygon pentagon", "colour": "red"}"#;
        assert!(serde_json::from_str::<RunConfig>(bad).is_err());
    }

    #[test]
    fn flags_and_lists() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"command": "verify-all", "parameters": {"suite": ["cheng", "surface"], "quiet": true, "off": false},
                "formats": ["json", "svg"]}"#,
        )
        .unwrap();
        let args = cfg.to_args().unwrap();
        assert_eq!(args.iter().filter(|a| *a == "--suite").count(), 2);
        assert!(args.contains(&"--quiet".to_string()) && !args.contains(&"--off".to_string()));
        assert_eq!(args.last().unwrap(), "json,svg");
    }
}
