//! Optional `key = value` configuration files, merged under explicit flags.

use std::ffi::OsString;

use clap::CommandFactory;

use crate::{Cli, CliError};

/// Parses `key = value` lines; blank lines and `#` comments are skipped.
/// Keys may be written with or without a leading `--`.
pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!("config line {}: expected key = value", i + 1))
        })?;
        let k = k.trim().trim_start_matches("--");
        if k.is_empty() {
            return Err(CliError::Usage(format!("config line {}: empty key", i + 1)));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Locates `--config PATH` or `--config=PATH` in raw arguments.
pub fn find_config_path(args: &[OsString]) -> Option<OsString> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some(p.into());
        }
    }
    None
}

fn flag_given(args: &[OsString], key: &str) -> bool {
    let long = format!("--{key}");
    let with_value = format!("--{key}=");
    args.iter().any(|a| {
        let s = a.to_string_lossy();
        s == long || s.starts_with(&with_value)
    })
}

/// Appends config entries as flags unless the same flag was given explicitly.
/// Keys must name a long flag of the chosen subcommand or a global flag.
pub fn merge(args: Vec<OsString>, entries: &[(String, String)]) -> Result<Vec<OsString>, CliError> {
    let root = Cli::command();
    let sub = args
        .iter()
        .skip(1)
        .map(|a| a.to_string_lossy().into_owned())
        .find_map(|a| root.find_subcommand(&a).cloned());
    let mut out = args.clone();
    for (key, value) in entries {
        if key == "config" {
            continue;
        }
        let arg = sub
            .iter()
            .flat_map(|s| s.get_arguments())
            .chain(root.get_arguments())
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| {
                CliError::Usage(format!("config key `{key}` is not a flag of this command"))
            })?;
        if flag_given(&args, key) {
            continue;
        }
        if arg.get_action().takes_values() {
            out.push(format!("--{key}={value}").into());
        } else {
            match value.as_str() {
                "true" | "1" | "yes" => out.push(format!("--{key}").into()),
                "false" | "0" | "no" => {}
                _ => {
                    return Err(CliError::Usage(format!(
                        "config key `{key}` is a switch; use true or false"
                    )))
                }
            }
        }
    }
    Ok(out)
}
