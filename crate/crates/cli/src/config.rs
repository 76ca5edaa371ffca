//! Flat `key = value` configuration files. Keys are long option names,
//! optionally scoped to one subcommand (`revise.max-depth = 4`); unscoped
//! keys apply wherever the option exists. Options given on the command line
//! win over the file.

use std::ffi::OsString;
use std::path::Path;

use clap::Command;

use crate::output::{read_string, CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub scope: Option<String>,
    pub key: String,
    pub value: String,
    pub line: usize,
}

pub fn parse(text: &str) -> Result<Vec<Entry>, String> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(format!("line {}: expected `key = value`", i + 1));
        };
        let k = k.trim().replace('_', "-");
        let mut v = v.trim();
        if v.len() >= 2 && (v.starts_with('"') && v.ends_with('"') || v.starts_with('\'') && v.ends_with('\'')) {
            v = &v[1..v.len() - 1];
        }
        let (scope, key) = match k.split_once('.') {
            Some((s, k)) => (Some(s.to_string()), k.to_string()),
            None => (None, k),
        };
        if key.is_empty() {
            return Err(format!("line {}: empty key", i + 1));
        }
        out.push(Entry {
            scope,
            key,
            value: v.to_string(),
            line: i + 1,
        });
    }
    Ok(out)
}

fn long_value(argv: &[OsString], name: &str) -> Option<OsString> {
    let flag = format!("--{name}");
    let prefix = format!("--{name}=");
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == flag {
            return it.next().cloned();
        }
        if let Some(v) = s.strip_prefix(&prefix) {
            return Some(v.into());
        }
    }
    None
}

fn given(argv: &[OsString], name: &str) -> bool {
    let flag = format!("--{name}");
    let prefix = format!("--{name}=");
    argv.iter().any(|a| {
        let s = a.to_string_lossy();
        s == flag || s.starts_with(&prefix)
    })
}

/// Position of the subcommand name in `argv`.
fn subcommand_index(cmd: &Command, argv: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < argv.len() {
        let s = argv[i].to_string_lossy();
        if let Some(name) = s.strip_prefix("--") {
            let takes = cmd
                .get_arguments()
                .find(|a| a.get_long() == Some(name))
                .is_some_and(|a| a.get_action().takes_values());
            i += if takes { 2 } else { 1 };
        } else if s.starts_with('-') {
            i += 1;
        } else {
            return Some(i);
        }
    }
    None
}

fn has_long(cmd: &Command, key: &str) -> Option<bool> {
    cmd.get_arguments()
        .find(|a| a.get_long() == Some(key))
        .map(|a| a.get_action().takes_values())
}

/// Returns `argv` with the config file's options inserted after the
/// subcommand name, skipping any the user already passed.
pub fn inject(cmd: &Command, argv: Vec<OsString>) -> CliResult<Vec<OsString>> {
    let Some(path) = long_value(&argv, "config") else {
        return Ok(argv);
    };
    let path = Path::new(&path).to_path_buf();
    if !path.is_file() {
        return Err(CliError::at(&path, "config file not found"));
    }
    let entries = parse(&read_string(&path)?).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let Some(at) = subcommand_index(cmd, &argv) else {
        return Ok(argv);
    };
    let sub_name = argv[at].to_string_lossy().to_string();
    let Some(sub) = cmd.find_subcommand(&sub_name) else {
        return Ok(argv);
    };
    let mut extra: Vec<OsString> = Vec::new();
    for e in entries {
        let bad = |msg: &str| CliError::Usage(format!("{}:{}: {msg}", path.display(), e.line));
        if e.key == "config" {
            return Err(bad("`config` cannot be set from a config file"));
        }
        if let Some(scope) = &e.scope {
            let Some(other) = cmd.find_subcommand(scope) else {
                return Err(bad(&format!("unknown subcommand `{scope}`")));
            };
            if has_long(other, &e.key).is_none() {
                return Err(bad(&format!("`{scope}` has no option `--{}`", e.key)));
            }
            if scope != &sub_name {
                continue;
            }
        }
        let takes = match has_long(sub, &e.key).or_else(|| has_long(cmd, &e.key)) {
            Some(t) => t,
            None if e.scope.is_none() && cmd.get_subcommands().any(|s| has_long(s, &e.key).is_some()) => continue,
            None => return Err(bad(&format!("unknown option `{}`", e.key))),
        };
        if given(&argv, &e.key) {
            continue;
        }
        if takes {
            extra.push(format!("--{}", e.key).into());
            extra.push(e.value.clone().into());
        } else {
            match e.value.as_str() {
                "true" | "yes" | "1" => extra.push(format!("--{}", e.key).into()),
                "false" | "no" | "0" => {}
                v => return Err(bad(&format!("`{}` is a switch; expected true or false, got {v:?}", e.key))),
            }
        }
    }
    let mut out = argv[..=at].to_vec();
    out.extend(extra);
    out.extend_from_slice(&argv[at + 1..]);
    Ok(out)
}
