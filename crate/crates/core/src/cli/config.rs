use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Arg, ArgAction, Command};

use super::CliError;

/// Options that take a value and may precede the subcommand.
const GLOBAL_VALUED: [&str; 2] = ["--config", "--workers"];

fn config_path(args: &[OsString]) -> Option<PathBuf> {
    let mut it = args.iter().skip(1);
    while let Some(a) = it.next() {
        let s = a.to_string_lossy();
        if s == "--config" {
            return it.next().map(PathBuf::from);
        }
        if let Some(v) = s.strip_prefix("--config=") {
            return Some(PathBuf::from(v));
        }
    }
    std::env::var_os("KNNMT_CONFIG").map(PathBuf::from)
}

/// Position of the subcommand name in `args`.
fn subcommand_position(args: &[OsString]) -> Option<usize> {
    let mut i = 1;
    while i < args.len() {
        let s = args[i].to_string_lossy();
        if GLOBAL_VALUED.contains(&s.as_ref()) {
            i += 2;
        } else if s.starts_with('-') {
            i += 1;
        } else {
            return Some(i);
        }
    }
    None
}

fn parse_bool(value: &str) -> Option<bool> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" | "on" => Some(true),
        "false" | "0" | "no" | "off" => Some(false),
        _ => None,
    }
}

fn given_on_command_line(args: &[OsString], long: &str) -> bool {
    let flag = format!("--{long}");
    let with_value = format!("--{long}=");
    args.iter().any(|a| {
        let s = a.to_string_lossy();
        s == flag || s.starts_with(&with_value)
    })
}

/// Turns the entries of the `--config` file into flags placed right after
/// the subcommand name. Entries whose flag is already on the command line
/// or whose environment variable is set are dropped, so flags beat the
/// environment and the environment beats the file.
pub(crate) fn apply_config_file(cmd: &Command, args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(path) = config_path(&args) else {
        return Ok(args);
    };
    let Some(pos) = subcommand_position(&args) else {
        return Ok(args);
    };
    let mut cmd = cmd.clone();
    cmd.build();
    let name = args[pos].to_string_lossy().into_owned();
    let Some(sub) = cmd.find_subcommand(&name) else {
        return Ok(args);
    };
    let text = fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let known: Vec<&Arg> = sub.get_arguments().chain(cmd.get_arguments()).collect();

    let mut injected = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |msg: String| CliError::Usage(format!("{}: line {}: {msg}", path.display(), i + 1));
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| bad("expected `key = value`".into()))?;
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let value = value.trim().trim_matches('"');
        let arg = known
            .iter()
            .find(|a| a.get_long() == Some(key.as_str()) && key != "config")
            .ok_or_else(|| bad(format!("unknown key `{key}` for `{name}`")))?;
        if given_on_command_line(&args, &key) {
            continue;
        }
        if arg.get_env().is_some_and(|env| std::env::var_os(env).is_some()) {
            continue;
        }
        if matches!(arg.get_action(), ArgAction::SetTrue) {
            let on = parse_bool(value).ok_or_else(|| bad(format!("`{key}` expects true or false")))?;
            if on {
                injected.push(OsString::from(format!("--{key}")));
            }
        } else {
            injected.push(OsString::from(format!("--{key}={value}")));
        }
    }
    let mut out = args;
    out.splice(pos + 1..pos + 1, injected);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::Cli;
    use clap::CommandFactory;
    use std::io::Write;

    fn os(v: &[&str]) -> Vec<OsString> {
        v.iter().map(OsString::from).collect()
    }

    #[test]
    fn flags_beat_file_and_bools_expand() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# comment\nbeam = 3\nk=8\nno_length_norm = true\nlambda = 0.25").unwrap();
        let p = f.path().to_str().unwrap();
        let args = os(&["knnmt", "--config", p, "translate", "--model", "m", "--k", "16"]);
        let out = apply_config_file(&Cli::command(), args).unwrap();
        let s: Vec<String> = out.iter().map(|a| a.to_string_lossy().into_owned()).collect();
        assert_eq!(&s[4..8], ["--beam=3", "--no-length-norm", "--lambda=0.25", "--model"]);
        assert!(!s.iter().any(|a| a == "--k=8"));
    }

    #[test]
    fn unknown_key_is_usage_error() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "beams = 3").unwrap();
        let p = f.path().to_str().unwrap();
        let err = apply_config_file(&Cli::command(), os(&["knnmt", "--config", p, "translate"])).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("beams"));
    }

    #[test]
    fn without_config_args_pass_through() {
        let args = os(&["knnmt", "bleu", "--hypotheses", "a"]);
        assert_eq!(apply_config_file(&Cli::command(), args.clone()).unwrap(), args);
    }
}
