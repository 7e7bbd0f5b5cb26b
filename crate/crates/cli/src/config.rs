//! `--config` files: one `key=value` per line, `#` starts a comment. Keys
//! are flag names without the leading dashes. Entries are spliced in right
//! after the subcommand; a flag typed on the command line replaces the file's
//! entry for it.

use std::collections::{HashMap, HashSet};
use std::ffi::OsString;
use std::path::Path;

use clap::CommandFactory;

use crate::output::Failure;
use crate::Cli;

pub fn expand_args(mut args: Vec<OsString>) -> Result<Vec<OsString>, Failure> {
    let Some((pos, path, width)) = find_config(&args) else {
        return Ok(args);
    };
    args.drain(pos..pos + width);
    let text = std::fs::read_to_string(&path).map_err(|e| Failure::io(Path::new(&path), &e))?;
    let entries = parse(&text)?;

    let Some(sub_pos) = args.iter().skip(1).position(|a| !a.to_string_lossy().starts_with('-')) else {
        return Ok(args);
    };
    let sub_pos = sub_pos + 1;
    let sub_name = args[sub_pos].to_string_lossy().into_owned();
    let command = Cli::command();
    let Some(sub) = command.find_subcommand(&sub_name) else {
        return Ok(args);
    };

    // long name or alias -> argument id
    let ids: HashMap<String, String> = sub
        .get_arguments()
        .flat_map(|a| {
            let id = a.get_id().to_string();
            let mut names: Vec<&str> = a.get_long().into_iter().collect();
            names.extend(a.get_all_aliases().unwrap_or_default());
            names.into_iter().map(move |n| (n.to_string(), id.clone()))
        })
        .collect();
    let given: HashSet<&String> = args[sub_pos + 1..]
        .iter()
        .filter_map(|a| {
            let a = a.to_string_lossy();
            let name = a.strip_prefix("--")?.split('=').next().unwrap_or_default().to_string();
            ids.get(&name)
        })
        .collect();
    let map_given = given.iter().any(|id| id.as_str() == "preset" || id.as_str() == "coeffs");

    let mut injected = Vec::new();
    for (key, value) in entries {
        let Some(id) = ids.get(&key) else {
            continue;
        };
        // the map flags are mutually exclusive, so one on the command line
        // displaces either from the file
        if given.contains(id) || (map_given && (id == "preset" || id == "coeffs")) {
            continue;
        }
        if is_switch(sub, &key) {
            match value.as_str() {
                "true" | "yes" | "1" => injected.push(OsString::from(format!("--{key}"))),
                "false" | "no" | "0" => {}
                other => {
                    return Err(Failure::usage(format!(
                        "config key '{key}' expects true/false, got '{other}'"
                    )))
                }
            }
        } else {
            injected.push(OsString::from(format!("--{key}={value}")));
        }
    }
    args.splice(sub_pos + 1..sub_pos + 1, injected);
    Ok(args)
}

fn is_switch(sub: &clap::Command, key: &str) -> bool {
    sub.get_arguments()
        .find(|a| a.get_long() == Some(key))
        .map(|a| matches!(a.get_action(), clap::ArgAction::SetTrue))
        .unwrap_or(false)
}

/// Returns (index, path, number of argv slots used).
fn find_config(args: &[OsString]) -> Option<(usize, OsString, usize)> {
    for (i, a) in args.iter().enumerate().skip(1) {
        let s = a.to_string_lossy();
        if s == "--config" {
            return args.get(i + 1).map(|p| (i, p.clone(), 2));
        }
        if let Some(p) = s.strip_prefix("--config=") {
            return Some((i, OsString::from(p), 1));
        }
    }
    None
}

fn parse(text: &str) -> Result<Vec<(String, String)>, Failure> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or_default().trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Failure::usage(format!("config line {}: expected key=value", n + 1)))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        out.push((key, value.trim().to_string()));
    }
    Ok(out)
}
