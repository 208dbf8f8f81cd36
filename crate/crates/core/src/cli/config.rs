//! `--config` files: `key=value` lines naming long flags of the invoked
//! command. Entries are spliced in ahead of the explicit arguments, so a
//! flag given on the command line wins.

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::ArgAction;
use vernacular::{Error, Result};

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut found = None;
    let mut it = args.iter();
    while let Some(a) = it.next() {
        let Some(s) = a.to_str() else { continue };
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

/// Parses `key=value` lines; blank lines and `#` comments are skipped.
pub(crate) fn parse(text: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
        let key = k.trim().replace('_', "-");
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", i + 1)));
        }
        out.push((i + 1, key, v.trim().to_string()));
    }
    Ok(out)
}

pub(crate) fn expand(cmd: &clap::Command, args: Vec<OsString>) -> Result<Vec<OsString>> {
    let Some(name) = args.get(1).and_then(|a| a.to_str()) else {
        return Ok(args);
    };
    let Some(sub) = cmd.find_subcommand(name) else {
        return Ok(args);
    };
    let Some(path) = config_path(&args[2..]) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut injected: Vec<OsString> = Vec::new();
    for (line, key, value) in parse(&text)? {
        if key == "config" || key == "help" {
            return Err(Error::Config(format!("line {line}: `{key}` cannot be set from a config file")));
        }
        let arg = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(key.as_str()))
            .ok_or_else(|| Error::Config(format!("line {line}: unknown key `{key}` for `{name}`")))?;
        match arg.get_action() {
            ArgAction::SetTrue => match value.as_str() {
                "true" => injected.push(format!("--{key}").into()),
                "false" => {}
                _ => {
                    return Err(Error::Config(format!(
                        "line {line}: `{key}` takes true or false, got `{value}`"
                    )))
                }
            },
            _ => injected.push(format!("--{key}={value}").into()),
        }
    }
    let mut out = Vec::with_capacity(args.len() + injected.len());
    out.extend_from_slice(&args[..2]);
    out.extend(injected);
    out.extend_from_slice(&args[2..]);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs_and_comments() {
        let p = parse("# c\nseed = 3\n\nweight_threshold=1e-4\n").unwrap();
        assert_eq!(p, vec![(2, "seed".into(), "3".into()), (4, "weight-threshold".into(), "1e-4".into())]);
        assert!(parse("seed").is_err());
    }

    #[test]
    fn explicit_flags_follow_config() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("run.cfg");
        fs::write(&cfg, "threshold=3\nseed=9\n").unwrap();
        let args: Vec<OsString> = ["v", "types", "--config", cfg.to_str().unwrap(), "--seed", "1"]
            .iter()
            .map(OsString::from)
            .collect();
        let out = expand(&super::super::command(), args).unwrap();
        let s: Vec<&str> = out.iter().map(|a| a.to_str().unwrap()).collect();
        assert_eq!(&s[..4], &["v", "types", "--threshold=3", "--seed=9"]);
        assert_eq!(s.last(), Some(&"1"));
        fs::write(&cfg, "bogus=1\n").unwrap();
        let args: Vec<OsString> = ["v", "types", "--config", cfg.to_str().unwrap()]
            .iter()
            .map(OsString::from)
            .collect();
        assert!(matches!(expand(&super::super::command(), args), Err(Error::Config(_))));
    }
}
