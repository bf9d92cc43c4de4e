//! `--config` files: flat `key = value` lines whose keys are long flag
//! names. The pairs are spliced into argv right after the subcommand, except
//! for flags the user already gave, so the command line always wins.

use std::ffi::OsString;
use std::path::Path;

use anyhow::{bail, Context};
use clap::CommandFactory;

use crate::args::Cli;

pub fn parse_config(text: &str) -> anyhow::Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            bail!("config line {}: expected `key = value`", i + 1);
        };
        let key = k.trim().trim_start_matches("--").replace('_', "-");
        if key.is_empty() {
            bail!("config line {}: empty key", i + 1);
        }
        pairs.push((key, v.trim().to_string()));
    }
    Ok(pairs)
}

fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

fn user_gave(argv: &[String], key: &str) -> bool {
    let flag = format!("--{key}");
    argv.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")))
}

/// Returns argv with the config file's pairs spliced in. Keys that belong to
/// another subcommand are ignored; keys no subcommand knows are an error.
pub fn expand_argv(argv: Vec<OsString>) -> anyhow::Result<Vec<OsString>> {
    let Some(strings) = argv.iter().map(|a| a.to_str().map(str::to_string)).collect::<Option<Vec<String>>>() else {
        return Ok(argv);
    };
    let Some(path) = config_path(&strings) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(Path::new(&path)).with_context(|| format!("reading config {path}"))?;
    let pairs = parse_config(&text)?;

    let cmd = Cli::command();
    let Some((pos, sub)) = strings
        .iter()
        .enumerate()
        .skip(1)
        .find_map(|(i, a)| cmd.find_subcommand(a).map(|s| (i, s)))
    else {
        return Ok(argv);
    };
    let longs = |c: &clap::Command| -> Vec<String> { c.get_arguments().filter_map(|a| a.get_long().map(str::to_string)).collect() };
    let own = longs(sub);
    let any: Vec<String> = cmd.get_subcommands().flat_map(longs).collect();

    let mut injected = Vec::new();
    for (key, value) in pairs {
        if key == "config" {
            bail!("config files cannot include other config files");
        }
        if !own.contains(&key) {
            if any.contains(&key) {
                continue;
            }
            bail!("config key {key:?} is not a known flag");
        }
        if user_gave(&strings, &key) {
            continue;
        }
        injected.push(format!("--{key}={value}"));
    }
    let mut out: Vec<OsString> = strings[..=pos].iter().map(OsString::from).collect();
    out.extend(injected.into_iter().map(OsString::from));
    out.extend(strings[pos + 1..].iter().map(OsString::from));
    Ok(out)
}
