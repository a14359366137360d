//! `--config` TOML files: flag defaults injected ahead of the user's own
//! arguments so that anything on the command line wins.
//!
//! ```toml
//! seed = 7
//!
//! [validate]
//! train_size = 100
//! outlier_sigma = 2.5
//! parallel = true
//! ```

use std::ffi::OsString;
use std::path::PathBuf;

use crate::args::SUBCOMMANDS;
use crate::CliError;

/// Global options that take a value, so their values are not mistaken for a
/// subcommand name while scanning.
const GLOBAL_VALUE_FLAGS: [&str; 4] = ["--config", "--seed", "--out", "--manifest"];

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    let mut found = None;
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--" {
            break;
        }
        if s == "--config" {
            found = it.next().map(PathBuf::from);
        } else if let Some(v) = s.strip_prefix("--config=") {
            found = Some(PathBuf::from(v));
        }
    }
    found
}

fn subcommand_position(args: &[OsString]) -> Option<usize> {
    let mut skip_next = false;
    for (i, a) in args.iter().enumerate().skip(1) {
        let s = a.to_string_lossy();
        if skip_next {
            skip_next = false;
            continue;
        }
        if GLOBAL_VALUE_FLAGS.contains(&s.as_ref()) {
            skip_next = true;
        } else if SUBCOMMANDS.contains(&s.as_ref()) {
            return Some(i);
        } else if !s.starts_with('-') {
            return None;
        }
    }
    None
}

fn flag_args(key: &str, value: &toml::Value) -> Result<Vec<OsString>, CliError> {
    let flag = format!("--{}", key.replace('_', "-"));
    let text = match value {
        toml::Value::Boolean(true) => return Ok(vec![flag.into()]),
        toml::Value::Boolean(false) => return Ok(Vec::new()),
        toml::Value::String(s) => s.clone(),
        toml::Value::Integer(i) => i.to_string(),
        toml::Value::Float(f) => f.to_string(),
        other => {
            return Err(CliError::Usage(format!(
                "config key '{key}' has unsupported type {}",
                other.type_str()
            )))
        }
    };
    Ok(vec![flag.into(), text.into()])
}

/// Returns `args` with the config file's flags spliced in right after the
/// subcommand name. Without `--config` the arguments are returned unchanged.
pub fn expand(args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let Some(pos) = subcommand_position(&args) else {
        return Ok(args);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    let table: toml::Table = text
        .parse()
        .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))?;
    let command = args[pos].to_string_lossy().into_owned();

    let mut injected = Vec::new();
    for (key, value) in &table {
        match value {
            toml::Value::Table(section) if key == &command => {
                for (k, v) in section {
                    injected.extend(flag_args(k, v)?);
                }
            }
            toml::Value::Table(_) => {
                if !SUBCOMMANDS.contains(&key.as_str()) {
                    return Err(CliError::Usage(format!("unknown config section [{key}]")));
                }
            }
            _ if key == "config" => {}
            _ => injected.extend(flag_args(key, value)?),
        }
    }
    let mut out = args;
    out.splice(pos + 1..pos + 1, injected);
    Ok(out)
}
