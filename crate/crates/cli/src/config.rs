//! Flat `key = value` files. Keys are flag names without the leading
//! dashes; `#` starts a comment.

use std::ffi::OsString;

use crate::error::CliError;

pub fn parse(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() || k.starts_with('-') {
            return Err(CliError::Usage(format!("config line {}: malformed entry {line:?}", n + 1)));
        }
        if k == "config" {
            return Err(CliError::Usage("config files cannot include other config files".into()));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// `argv` with the config entries spliced in right after the subcommand
/// name, so flags given on the command line still win.
pub fn splice(argv: &[OsString], subcommand: &str, entries: &[(String, String)]) -> Vec<OsString> {
    let at = argv.iter().skip(1).position(|a| a == subcommand).map_or(argv.len(), |i| i + 2);
    let mut out = argv[..at].to_vec();
    for (k, v) in entries {
        out.push(format!("--{k}").into());
        out.push(v.into());
    }
    out.extend_from_slice(&argv[at..]);
    out
}
