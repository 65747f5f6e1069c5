//! `--config` files: one `key = value` per line, `#` comments, keys named
//! like the long flags without dashes (`n-blocks` or `n_blocks`).

use std::fs;

use anyhow::{bail, Context};
use clap::Command;

fn config_path(argv: &[String]) -> anyhow::Result<Option<String>> {
    let mut it = argv.iter().skip(1);
    while let Some(a) = it.next() {
        if a == "--config" {
            return match it.next() {
                Some(p) => Ok(Some(p.clone())),
                None => bail!("--config needs a path"),
            };
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Ok(Some(p.to_string()));
        }
    }
    Ok(None)
}

pub fn parse_config(text: &str) -> anyhow::Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("config line {}: expected key = value", i + 1);
        };
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            bail!("config line {}: empty key", i + 1);
        }
        out.push((key, v.trim().to_string()));
    }
    Ok(out)
}

/// Inserts the config entries as flags right after the subcommand name, so
/// flags given on the command line, which come later, override them.
pub fn merge_config(argv: &[String], cmd: &Command) -> anyhow::Result<Vec<String>> {
    let Some(path) = config_path(argv)? else {
        return Ok(argv.to_vec());
    };
    let text = fs::read_to_string(&path).with_context(|| format!("reading config {path}"))?;
    let entries = parse_config(&text)?;
    let names: Vec<String> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
    let Some(pos) = argv.iter().skip(1).position(|a| names.contains(a)) else {
        return Ok(argv.to_vec());
    };
    let pos = pos + 1;
    let mut out = argv[..=pos].to_vec();
    for (k, v) in entries {
        match v.as_str() {
            "true" => out.push(format!("--{k}")),
            "false" => {}
            _ => {
                out.push(format!("--{k}"));
                out.push(v);
            }
        }
    }
    out.extend_from_slice(&argv[pos + 1..]);
    Ok(out)
}
