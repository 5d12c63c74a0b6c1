//! Helpers shared by the CLI integration tests: running the compiled
//! binary, and a small JSON-Schema checker covering the keyword subset the
//! published schemas use, so outputs are validated against the exact files
//! shipped in `schemas/`.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

/// Runs the compiled `evidential` binary with the given arguments.
pub fn run_bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evidential"))
        .args(args)
        .output()
        .expect("spawning the evidential binary")
}

/// Runs the binary and panics (with captured output) unless it exits 0.
pub fn run_bin_ok(args: &[&str]) -> Output {
    let output = run_bin(args);
    assert!(
        output.status.success(),
        "command failed: evidential {}\nstdout:\n{}\nstderr:\n{}",
        args.join(" "),
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr),
    );
    output
}

pub fn stderr_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

pub fn stdout_of(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

/// Repo-root `schemas/` directory, located relative to this crate.
pub fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

pub fn load_json(path: &Path) -> Value {
    let text = std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("reading {}: {e}", path.display()));
    serde_json::from_str(&text).unwrap_or_else(|e| panic!("parsing {}: {e}", path.display()))
}

/// Asserts `value` against the named schema file in `schemas/`.
pub fn assert_matches_schema(schema_file: &str, value: &Value) {
    let schema = load_json(&schema_dir().join(schema_file));
    if let Err(msg) = validate(&schema, &schema, value, "$") {
        panic!("{schema_file} violation: {msg}");
    }
}

/// Validates `value` against `schema`. Supports the draft 2020-12 keywords
/// the published schemas use: $ref (document-local), type, enum, const,
/// required, properties, additionalProperties: false, items, minItems, and
/// the four numeric bound keywords. Unknown annotation keywords are ignored,
/// matching standard JSON-Schema semantics.
pub fn validate(root: &Value, schema: &Value, value: &Value, path: &str) -> Result<(), String> {
    let schema = match schema.get("$ref") {
        Some(Value::String(reference)) => {
            let pointer = reference
                .strip_prefix("#")
                .ok_or_else(|| format!("{path}: unsupported $ref {reference}"))?;
            root.pointer(pointer)
                .ok_or_else(|| format!("{path}: dangling $ref {reference}"))?
        }
        _ => schema,
    };

    if let Some(expected) = schema.get("type") {
        let names: Vec<&str> = match expected {
            Value::String(s) => vec![s.as_str()],
            Value::Array(list) => list.iter().filter_map(Value::as_str).collect(),
            other => return Err(format!("{path}: bad type keyword {other}")),
        };
        if !names.iter().any(|n| type_matches(n, value)) {
            return Err(format!("{path}: expected type {names:?}, got {value}"));
        }
    }

    if let Some(allowed) = schema.get("enum").and_then(Value::as_array) {
        if !allowed.contains(value) {
            return Err(format!("{path}: {value} not in enum {allowed:?}"));
        }
    }
    if let Some(expected) = schema.get("const") {
        if value != expected {
            return Err(format!("{path}: expected const {expected}, got {value}"));
        }
    }

    for (keyword, is_max, strict) in [
        ("minimum", false, false),
        ("exclusiveMinimum", false, true),
        ("maximum", true, false),
        ("exclusiveMaximum", true, true),
    ] {
        if let (Some(bound), Some(x)) = (
            schema.get(keyword).and_then(Value::as_f64),
            value.as_f64(),
        ) {
            let ok = match (is_max, strict) {
                (false, false) => x >= bound,
                (false, true) => x > bound,
                (true, false) => x <= bound,
                (true, true) => x < bound,
            };
            if !ok {
                return Err(format!("{path}: {x} violates {keyword} {bound}"));
            }
        }
    }

    if let Value::Object(map) = value {
        if let Some(required) = schema.get("required").and_then(Value::as_array) {
            for name in required.iter().filter_map(Value::as_str) {
                if !map.contains_key(name) {
                    return Err(format!("{path}: missing required property {name:?}"));
                }
            }
        }
        let properties = schema.get("properties").and_then(Value::as_object);
        if schema.get("additionalProperties") == Some(&Value::Bool(false)) {
            for key in map.keys() {
                if properties.is_none_or(|p| !p.contains_key(key)) {
                    return Err(format!("{path}: unexpected property {key:?}"));
                }
            }
        }
        if let Some(properties) = properties {
            for (key, subschema) in properties {
                if let Some(subvalue) = map.get(key) {
                    validate(root, subschema, subvalue, &format!("{path}.{key}"))?;
                }
            }
        }
    }

    if let Value::Array(items) = value {
        if let Some(min) = schema.get("minItems").and_then(Value::as_u64) {
            if (items.len() as u64) < min {
                return Err(format!("{path}: {} items < minItems {min}", items.len()));
            }
        }
        if let Some(subschema) = schema.get("items") {
            for (i, item) in items.iter().enumerate() {
                validate(root, subschema, item, &format!("{path}[{i}]"))?;
            }
        }
    }

    Ok(())
}

fn type_matches(name: &str, value: &Value) -> bool {
    match name {
        "object" => value.is_object(),
        "array" => value.is_array(),
        "string" => value.is_string(),
        "boolean" => value.is_boolean(),
        "null" => value.is_null(),
        "number" => value.is_number(),
        "integer" => {
            value.is_i64()
                || value.is_u64()
                || value.as_f64().is_some_and(|x| x.fract() == 0.0)
        }
        _ => false,
    }
}

/// Parses a CSV written by the CLI into (header, rows-of-f64).
pub fn read_numeric_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("reading {}: {e}", path.display()));
    let mut lines = text.lines();
    let header = lines
        .next()
        .expect("CSV has a header")
        .split(',')
        .map(str::to_owned)
        .collect();
    let rows = lines
        .map(|line| {
            line.split(',')
                .map(|cell| cell.parse::<f64>().expect("numeric cell"))
                .collect()
        })
        .collect();
    (header, rows)
}
