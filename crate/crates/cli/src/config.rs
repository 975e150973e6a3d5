//! Flat `key = value` config files. Each key is a long flag name without the
//! leading dashes; the file is spliced in front of the command line so that
//! flags given there win.

use std::ffi::OsString;
use std::path::Path;

pub fn read_args(path: &Path) -> Result<Vec<OsString>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    parse_args(&text).map_err(|e| format!("{}: {e}", path.display()))
}

pub fn parse_args(text: &str) -> Result<Vec<OsString>, String> {
    let mut args = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected `key = value`", n + 1))?;
        let key = key.trim().replace('_', "-");
        if key.is_empty() || key == "config" {
            return Err(format!("line {}: invalid key `{}`", n + 1, key));
        }
        args.push(OsString::from(format!("--{key}")));
        args.push(OsString::from(value.trim()));
    }
    Ok(args)
}

/// Inserts `extra` right after the subcommand name in `argv`.
pub fn splice(argv: &[OsString], subcommand: &str, extra: Vec<OsString>) -> Vec<OsString> {
    let at = argv.iter().position(|a| a == subcommand).map_or(argv.len(), |i| i + 1);
    let mut out = argv[..at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[at..]);
    out
}
