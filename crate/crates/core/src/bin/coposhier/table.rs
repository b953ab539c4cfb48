use serde_json::{Map, Value};

/// Renders a JSON result as aligned text: scalars as `key  value` lines,
/// arrays of objects as column tables.
pub fn render(v: &Value) -> String {
    let mut out = String::new();
    match v {
        Value::Object(map) => render_object(map, "", &mut out),
        other => out.push_str(&format!("{}\n", scalar(other))),
    }
    out
}

fn render_object(map: &Map<String, Value>, prefix: &str, out: &mut String) {
    let mut nested = Vec::new();
    let scalars: Vec<(String, String)> = map
        .iter()
        .filter_map(|(k, v)| {
            let key = format!("{prefix}{k}");
            match v {
                Value::Object(_) => {
                    nested.push((key, v));
                    None
                }
                Value::Array(a) if a.iter().any(Value::is_object) => {
                    nested.push((key, v));
                    None
                }
                _ => Some((key, scalar(v))),
            }
        })
        .collect();
    let w = scalars.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, s) in &scalars {
        out.push_str(&format!("{k:<w$}  {s}\n"));
    }
    for (k, v) in nested {
        match v {
            Value::Object(m) => render_object(m, &format!("{k}."), out),
            Value::Array(rows) => {
                out.push_str(&format!("\n{k}:\n"));
                render_rows(rows, out);
                out.push('\n');
            }
            _ => unreachable!(),
        }
    }
}

fn render_rows(rows: &[Value], out: &mut String) {
    let mut cols: Vec<String> = Vec::new();
    for r in rows {
        if let Value::Object(m) = r {
            for k in m.keys() {
                if !cols.contains(k) {
                    cols.push(k.clone());
                }
            }
        }
    }
    let cells: Vec<Vec<String>> =
        rows.iter().map(|r| cols.iter().map(|c| r.get(c).map(scalar).unwrap_or_default()).collect()).collect();
    let widths: Vec<usize> = (0..cols.len())
        .map(|j| cells.iter().map(|row| row[j].len()).chain([cols[j].len()]).max().unwrap_or(0))
        .collect();
    let line = |items: &[String]| {
        items.iter().zip(&widths).map(|(s, w)| format!("{s:<w$}")).collect::<Vec<_>>().join("  ").trim_end().to_string()
    };
    out.push_str(&line(&cols));
    out.push('\n');
    for row in &cells {
        out.push_str(&line(row));
        out.push('\n');
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::Null => "-".into(),
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(x) if n.is_f64() => format!("{x:.6e}"),
            _ => n.to_string(),
        },
        Value::Object(_) => "{..}".into(),
        other => other.to_string(),
    }
}
