//! Experiment manifests: `key = value` lines turned into command-line flags.
//!
//! ```text
//! # sandwich on Z/12
//! command = sandwich
//! group = cyclic:12
//! random = 20
//! seed = 7
//! window = modulus
//! output = z12.csv
//! ```
//!
//! `command` names the subcommand; every other key becomes `--key value`
//! (underscores become dashes, `output` is `--out`). A key may repeat. The
//! value `true` gives a bare flag. Relative `element` and `output` paths, and
//! `finite:` tables, resolve against the manifest's directory.

use std::fs;
use std::path::Path;

use redgrp_core::Error;

const PATH_KEYS: [&str; 2] = ["element", "out"];

pub fn load(path: &Path) -> Result<Vec<String>, Error> {
    let text = fs::read_to_string(path)?;
    let dir = path.parent().unwrap_or(Path::new(""));
    parse(&text, dir)
}

pub fn parse(text: &str, dir: &Path) -> Result<Vec<String>, Error> {
    let mut command = None;
    let mut flags = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                line: i + 1,
                column: 1,
                message: "expected `key = value`".into(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() {
            return Err(Error::Parse {
                line: i + 1,
                column: 1,
                message: "empty key".into(),
            });
        }
        let key = match key.replace('_', "-").as_str() {
            "output" => "out".to_string(),
            k => k.to_string(),
        };
        if key == "command" {
            if command.replace(value.to_string()).is_some() {
                return Err(Error::Parse {
                    line: i + 1,
                    column: 1,
                    message: "command given twice".into(),
                });
            }
            continue;
        }
        flags.push(format!("--{key}"));
        if value != "true" {
            if PATH_KEYS.contains(&key.as_str()) && Path::new(value).is_relative() {
                flags.push(dir.join(value).display().to_string());
            } else {
                flags.push(value.to_string());
            }
        }
    }
    let command = command.ok_or_else(|| Error::InvalidInput("manifest has no `command`".into()))?;
    let mut args = vec!["redgrp".to_string(), command, "--base-dir".to_string()];
    args.push(if dir.as_os_str().is_empty() { ".".into() } else { dir.display().to_string() });
    args.extend(flags);
    Ok(args)
}
