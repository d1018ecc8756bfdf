//! Reading JSON payloads from files or stdin with path-aware schema errors.

use std::io::Read;

use serde::de::DeserializeOwned;
use serde_json::Value;

use super::CliError;
use crate::rational::Rat;
use crate::space::{to_atoms, AtomicRV, FiniteDist};
use crate::witness::Grid;

/// Raw text of `path`, of stdin when `path` is `-`, or `path` itself when it is inline JSON.
pub fn read_source(path: &str) -> Result<String, CliError> {
    if is_inline(path) {
        return Ok(path.to_string());
    }
    if path == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Usage(format!("cannot read stdin: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {path}: {e}")))
}

fn is_inline(s: &str) -> bool {
    s.trim_start().starts_with(['{', '['])
}

pub fn parse_value(text: &str, origin: &str) -> Result<Value, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Schema { path: origin.to_string(), message: e.to_string() })
}

/// Deserializes `v`, reporting the offending path prefixed by `origin`.
pub fn decode<T: DeserializeOwned>(v: Value, origin: &str) -> Result<T, CliError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." { origin.to_string() } else { format!("{origin}:{inner}") };
        CliError::Schema { path, message: e.into_inner().to_string() }
    })
}

pub fn load<T: DeserializeOwned>(path: &str) -> Result<T, CliError> {
    let text = read_source(path)?;
    let path = origin(path);
    decode(parse_value(&text, path)?, path)
}

/// A random variable given either as `{"atoms": [...]}` or `{"points": [[v, p], ...]}`.
pub fn rv_from_value(v: Value, origin: &str) -> Result<AtomicRV, CliError> {
    let has = |k: &str| v.as_object().is_some_and(|o| o.contains_key(k));
    if has("points") {
        let d: FiniteDist = decode(v, origin)?;
        return to_atoms(&d).map_err(|e| CliError::Schema { path: origin.to_string(), message: e.to_string() });
    }
    if has("atoms") {
        return decode(v, origin);
    }
    Err(CliError::Schema {
        path: origin.to_string(),
        message: "expected an object with \"atoms\" or \"points\"".into(),
    })
}

pub fn load_rv(path: &str) -> Result<AtomicRV, CliError> {
    let text = read_source(path)?;
    let path = origin(path);
    rv_from_value(parse_value(&text, path)?, path)
}

/// Pair file `{"x": ..., "y": ...}`; other keys are ignored so `gen` output feeds straight in.
pub fn load_pair(path: &str) -> Result<(AtomicRV, AtomicRV), CliError> {
    let text = read_source(path)?;
    let path = origin(path);
    let mut v = parse_value(&text, path)?;
    let mut take = |k: &str| {
        v.get_mut(k)
            .map(Value::take)
            .ok_or_else(|| CliError::Schema { path: format!("{path}:{k}"), message: "missing field".into() })
    };
    let x = take("x")?;
    let y = take("y")?;
    Ok((rv_from_value(x, &format!("{path}:x"))?, rv_from_value(y, &format!("{path}:y"))?))
}

pub fn rat_arg(s: &str, flag: &str) -> Result<Rat, CliError> {
    Rat::parse_lenient(s).map_err(|e| CliError::Usage(format!("--{flag}: {e}")))
}

/// Inline JSON when the argument starts with `{` or `[`, otherwise a file path.
pub fn json_arg(s: &str, flag: &str) -> Result<Value, CliError> {
    let t = s.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        return parse_value(t, &format!("--{flag}"));
    }
    parse_value(&read_source(s)?, s)
}

/// Name used for `path` in schema errors.
fn origin(path: &str) -> &str {
    if is_inline(path) {
        "<inline>"
    } else {
        path
    }
}

/// `lo:step:hi`, a comma list of rationals, or JSON (inline or file).
pub fn grid_arg(s: &str, flag: &str) -> Result<Value, CliError> {
    let t = s.trim();
    if t.starts_with('{') || t.starts_with('[') || std::path::Path::new(t).is_file() {
        let v = json_arg(t, flag)?;
        let g: Grid = decode(v.clone(), &format!("--{flag}"))?;
        return Ok(serde_json::to_value(g).expect("grid serializes"));
    }
    let parts: Vec<&str> = t.split(':').collect();
    let grid = if parts.len() == 3 {
        Grid::Lattice { lo: rat_arg(parts[0], flag)?, step: rat_arg(parts[1], flag)?, hi: rat_arg(parts[2], flag)? }
    } else {
        Grid::points(t.split(',').map(|p| rat_arg(p.trim(), flag)).collect::<Result<_, _>>()?)
    };
    if let Grid::Lattice { step, .. } = &grid {
        if !step.is_positive() {
            return Err(CliError::Usage(format!("--{flag}: lattice step must be positive")));
        }
    }
    Ok(serde_json::to_value(grid).expect("grid serializes"))
}
