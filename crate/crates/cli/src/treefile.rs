//! Tree lists on disk: CSV with an `id,x,y[,r]` header, or a JSON array of
//! `{"id", "x", "y", "r"?}` objects. The format is sniffed from content.

use std::collections::HashMap;
use std::path::Path;

use cppdip_core::coverage::Tree;
use cppdip_core::pipeline::Scenario;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::output::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Row {
    id: u64,
    x: f64,
    y: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<f64>,
}

/// Parse tree rows; `default_radius` fills rows without `r`.
pub fn parse_trees(text: &str, default_radius: f64) -> CliResult<Vec<Tree>> {
    let rows = if text.trim_start().starts_with('[') {
        parse_json(text)?
    } else {
        parse_csv(text)?
    };
    if rows.is_empty() {
        return Err(CliError::input("tree file has no rows"));
    }
    let mut seen: HashMap<u64, usize> = HashMap::new();
    let mut out = Vec::with_capacity(rows.len());
    for (k, (label, row)) in rows.into_iter().enumerate() {
        if let Some(first) = seen.insert(row.id, k) {
            return Err(CliError::input(format!(
                "{label}: duplicate id {} (first seen in row {})",
                row.id,
                first + 1
            )));
        }
        if !row.x.is_finite() {
            return Err(CliError::input(format!("{label}: field x is not finite")));
        }
        if !row.y.is_finite() {
            return Err(CliError::input(format!("{label}: field y is not finite")));
        }
        let r = row.r.unwrap_or(default_radius);
        if !(r.is_finite() && r > 0.0) {
            return Err(CliError::input(format!("{label}: field r must be a positive number")));
        }
        out.push(Tree::new(row.id, row.x, row.y, r));
    }
    Ok(out)
}

fn parse_csv(text: &str) -> CliResult<Vec<(String, Row)>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| CliError::input(format!("tree CSV header: {e}")))?
        .clone();
    for required in ["id", "x", "y"] {
        if !headers.iter().any(|h| h == required) {
            return Err(CliError::input(format!("tree CSV header is missing field {required}")));
        }
    }
    let mut rows = Vec::new();
    for (k, rec) in reader.deserialize::<Row>().enumerate() {
        let label = format!("row {}", k + 1);
        let row = rec.map_err(|e| CliError::input(format!("{label}: {}", csv_reason(&e))))?;
        rows.push((label, row));
    }
    Ok(rows)
}

fn csv_reason(e: &csv::Error) -> String {
    match e.kind() {
        csv::ErrorKind::Deserialize { err, .. } => match err.field() {
            Some(f) => format!("field {}: {}", field_name(f), err.kind()),
            None => err.kind().to_string(),
        },
        _ => e.to_string(),
    }
}

fn field_name(i: u64) -> &'static str {
    ["id", "x", "y", "r"].get(i as usize).copied().unwrap_or("?")
}

fn parse_json(text: &str) -> CliResult<Vec<(String, Row)>> {
    let values: Vec<serde_json::Value> =
        serde_json::from_str(text).map_err(|e| CliError::input(format!("tree JSON: {e}")))?;
    values
        .into_iter()
        .enumerate()
        .map(|(k, v)| {
            let label = format!("row {}", k + 1);
            serde_json::from_value::<Row>(v)
                .map(|r| (label.clone(), r))
                .map_err(|e| CliError::input(format!("{label}: {e}")))
        })
        .collect()
}

pub fn load_trees(path: &Path, default_radius: f64) -> CliResult<Vec<Tree>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read tree file {}: {e}", path.display())))?;
    parse_trees(&text, default_radius)
        .map_err(|e| CliError::input(format!("{}: {}", path.display(), e.message)))
}

/// Load a tree file as a scenario named after the file stem.
pub fn load_scenario(path: &Path, default_radius: f64) -> CliResult<Scenario> {
    let trees = load_trees(path, default_radius)?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("trees").to_string();
    Ok(Scenario::from_trees(name, trees))
}

pub fn trees_to_csv(trees: &[Tree]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for t in trees {
        w.serialize(Row { id: t.id, x: t.center.x, y: t.center.y, r: Some(t.radius) })
            .expect("in-memory CSV write");
    }
    String::from_utf8(w.into_inner().expect("in-memory CSV flush")).expect("CSV is UTF-8")
}

pub fn trees_to_json(trees: &[Tree]) -> String {
    let rows: Vec<Row> = trees
        .iter()
        .map(|t| Row { id: t.id, x: t.center.x, y: t.center.y, r: Some(t.radius) })
        .collect();
    let mut s = serde_json::to_string_pretty(&rows).expect("rows serialize");
    s.push('\n');
    s
}

/// Writes JSON when the extension is `.json`, CSV otherwise.
pub fn save_trees(path: &Path, trees: &[Tree]) -> CliResult<()> {
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let body = if is_json { trees_to_json(trees) } else { trees_to_csv(trees) };
    write_atomic(path, body.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_with_and_without_radius() {
        let t = parse_trees("id,x,y,r\n1,10,20,30\n2,5,5,\n", 50.0).unwrap();
        assert_eq!(t[0], Tree::new(1, 10.0, 20.0, 30.0));
        assert_eq!(t[1].radius, 50.0);
        let t = parse_trees("id,x,y\n7,1.5,2.5\n", 40.0).unwrap();
        assert_eq!(t, vec![Tree::new(7, 1.5, 2.5, 40.0)]);
    }

    #[test]
    fn json_rows() {
        let t = parse_trees(r#"[{"id": 3, "x": 1, "y": 2}, {"id": 4, "x": 3, "y": 4, "r": 10}]"#, 50.0).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[1].radius, 10.0);
    }

    #[test]
    fn errors_name_row_and_field() {
        let e = parse_trees("id,x,y\n1,2,3\n2,abc,4\n", 50.0).unwrap_err();
        assert!(e.message.contains("row 2") && e.message.contains("field x"), "{}", e.message);
        let e = parse_trees("id,x,y\n1,2,3\n1,4,5\n", 50.0).unwrap_err();
        assert!(e.message.contains("duplicate id 1"), "{}", e.message);
        let e = parse_trees("id,y\n1,2\n", 50.0).unwrap_err();
        assert!(e.message.contains("missing field x"), "{}", e.message);
        let e = parse_trees(r#"[{"id": 1, "x": 0}]"#, 50.0).unwrap_err();
        assert!(e.message.contains("row 1") && e.message.contains('y'), "{}", e.message);
        assert!(parse_trees("id,x,y\n", 50.0).is_err());
        assert!(parse_trees("id,x,y,r\n1,0,0,-2\n", 50.0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let trees = vec![Tree::new(0, 0.1, 1.0 / 3.0, 50.0), Tree::new(9, 2999.5, 7.25, 42.0)];
        assert_eq!(parse_trees(&trees_to_csv(&trees), 1.0).unwrap(), trees);
        assert_eq!(parse_trees(&trees_to_json(&trees), 1.0).unwrap(), trees);
    }
}
