//! Config files supply default flag values.
//!
//! A config file is a TOML table whose keys are long flag names. Top-level
//! keys apply to every subcommand that accepts them; a `[<subcommand>]` table
//! applies only to that subcommand and must name real flags. Values are
//! spliced into the argument list after the subcommand unless the same flag
//! was given on the command line, which always wins.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::CommandFactory;

use crate::cli::Cli;

/// Flags that take a value and may appear before the subcommand.
const GLOBAL_VALUED: [&str; 2] = ["--config", "--threads"];

pub struct LoadedConfig {
    pub path: PathBuf,
    pub text: String,
}

/// Locate `--config` and the subcommand position in raw arguments.
fn scan(args: &[OsString]) -> (Option<PathBuf>, Option<usize>) {
    let mut config = None;
    let mut i = 1;
    while i < args.len() {
        let a = args[i].to_string_lossy();
        if let Some(v) = a.strip_prefix("--config=") {
            config = Some(PathBuf::from(v));
        } else if GLOBAL_VALUED.contains(&a.as_ref()) {
            if a == "--config" {
                config = args.get(i + 1).map(PathBuf::from);
            }
            i += 1;
        } else if !a.starts_with('-') {
            let sub = Some(i);
            // `--config` may also follow the subcommand
            for (j, b) in args.iter().enumerate().skip(i + 1) {
                let b = b.to_string_lossy();
                if let Some(v) = b.strip_prefix("--config=") {
                    config = Some(PathBuf::from(v));
                } else if b == "--config" {
                    config = args.get(j + 1).map(PathBuf::from);
                }
            }
            return (config, sub);
        }
        i += 1;
    }
    (config, None)
}

fn value_to_args(key: &str, value: &toml::Value, out: &mut Vec<OsString>) -> Result<()> {
    let flag = format!("--{key}");
    let scalar = |v: &toml::Value| -> Result<String> {
        Ok(match v {
            toml::Value::String(s) => s.clone(),
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => f.to_string(),
            other => bail!("config key '{key}': unsupported value {other}"),
        })
    };
    match value {
        toml::Value::Boolean(true) => out.push(flag.into()),
        toml::Value::Boolean(false) => {}
        toml::Value::Array(items) => {
            let joined = items.iter().map(scalar).collect::<Result<Vec<_>>>()?.join(",");
            out.push(format!("{flag}={joined}").into());
        }
        v => out.push(format!("{flag}={}", scalar(v)?).into()),
    }
    Ok(())
}

fn accepted_flags(sub: &str) -> Vec<String> {
    let cmd = Cli::command();
    let mut names: Vec<String> = cmd
        .get_arguments()
        .filter_map(|a| a.get_long())
        .map(String::from)
        .collect();
    if let Some(s) = cmd.find_subcommand(sub) {
        names.extend(s.get_arguments().filter_map(|a| a.get_long()).map(String::from));
    }
    names
}

fn read(path: &Path) -> Result<(String, toml::Table)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| crate::Invalid(format!("config {}: {e}", path.display())))?;
    Ok((text, table))
}

/// Arguments with config-file defaults spliced in after the subcommand.
pub fn expand_args(args: Vec<OsString>) -> Result<(Vec<OsString>, Option<LoadedConfig>)> {
    let (path, sub_at) = scan(&args);
    let (Some(path), Some(sub_at)) = (path, sub_at) else {
        return Ok((args, None));
    };
    let (text, table) = read(&path)?;
    let sub = args[sub_at].to_string_lossy().into_owned();
    let accepted = accepted_flags(&sub);
    let given: Vec<String> = args[1..]
        .iter()
        .filter_map(|a| {
            a.to_str()?
                .strip_prefix("--")
                .map(|f| f.split('=').next().unwrap_or(f).to_string())
        })
        .collect();
    let mut injected = Vec::new();
    for (key, value) in &table {
        match value {
            toml::Value::Table(section) => {
                if *key != sub {
                    continue;
                }
                for (k, v) in section {
                    if !accepted.contains(k) {
                        return Err(crate::Invalid(format!("config [{sub}]: unknown flag '{k}'")).into());
                    }
                    if !given.contains(k) {
                        value_to_args(k, v, &mut injected)?;
                    }
                }
            }
            v => {
                if accepted.contains(key) && key != "config" && !given.contains(key) {
                    value_to_args(key, v, &mut injected)?;
                }
            }
        }
    }
    let mut out = args[..=sub_at].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[sub_at + 1..]);
    Ok((out, Some(LoadedConfig { path, text })))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn scan_finds_config_and_subcommand() {
        let (c, s) = scan(&os(&["hl", "--config", "a.toml", "compare", "--k", "3"]));
        assert_eq!(c, Some(PathBuf::from("a.toml")));
        assert_eq!(s, Some(3));
        let (c, s) = scan(&os(&["hl", "--threads", "2", "eval", "--config=b.toml"]));
        assert_eq!(c, Some(PathBuf::from("b.toml")));
        assert_eq!(s, Some(3));
    }

    #[test]
    fn values_become_flags() {
        let mut out = Vec::new();
        value_to_args("k", &toml::Value::Array(vec![10.into(), 20.into()]), &mut out).unwrap();
        value_to_args("zero-is-negative", &toml::Value::Boolean(true), &mut out).unwrap();
        value_to_args("split", &toml::Value::Float(0.25), &mut out).unwrap();
        assert_eq!(out, os(&["--k=10,20", "--zero-is-negative", "--split=0.25"]));
    }
}
