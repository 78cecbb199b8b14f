//! `--config` support: TOML values are turned into command-line flags
//! placed before the user's own, so explicit flags override them.

use std::path::Path;

use anyhow::{bail, Context, Result};

const SUBCOMMANDS: [&str; 7] = ["plan", "capture", "train", "eval", "run", "gradcheck", "bench"];

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter().skip(1);
    let mut found = None;
    while let Some(a) = it.next() {
        if a == "--" {
            break;
        }
        if a == "--config" {
            found = it.next().cloned();
        } else if let Some(v) = a.strip_prefix("--config=") {
            found = Some(v.to_string());
        }
    }
    found
}

fn flag_args(key: &str, value: &toml::Value, out: &mut Vec<String>) -> Result<()> {
    let flag = format!("--{}", key.replace('_', "-"));
    match value {
        toml::Value::Boolean(true) => out.push(flag),
        toml::Value::Boolean(false) => {}
        toml::Value::String(s) => out.extend([flag, s.clone()]),
        toml::Value::Integer(i) => out.extend([flag, i.to_string()]),
        toml::Value::Float(x) => out.extend([flag, x.to_string()]),
        other => bail!("config key {key:?}: unsupported value {other}"),
    }
    Ok(())
}

/// Expands `--config FILE` into explicit flags for the chosen subcommand.
pub fn merge_config(args: Vec<String>) -> Result<Vec<String>> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(Path::new(&path)).with_context(|| format!("reading config {path}"))?;
    let table: toml::Table = text.parse().with_context(|| format!("parsing config {path}"))?;
    let Some(pos) = args.iter().position(|a| SUBCOMMANDS.contains(&a.as_str())) else {
        return Ok(args);
    };
    let command = args[pos].as_str();
    let mut injected = Vec::new();
    for (key, value) in &table {
        match value {
            toml::Value::Table(section) => {
                if !SUBCOMMANDS.contains(&key.as_str()) {
                    bail!("config {path}: unknown section [{key}]");
                }
                if key == command {
                    for (k, v) in section {
                        flag_args(k, v, &mut injected)?;
                    }
                }
            }
            v => {
                if key == "config" {
                    bail!("config {path}: nested config files are not supported");
                }
                flag_args(key, v, &mut injected)?;
            }
        }
    }
    let mut out = args[..=pos].to_vec();
    out.extend(injected);
    out.extend_from_slice(&args[pos + 1..]);
    Ok(out)
}
