//! CSV, JSON and SVG writers. All output is a pure function of the table.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::{Map, Value};

use crate::LabError;

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }
}

/// Shortest round-trip text; integers without a fraction; non-finite values quoted.
pub fn csv_number(x: f64) -> String {
    if x.is_nan() {
        "\"nan\"".into()
    } else if x.is_infinite() {
        if x > 0.0 { "\"inf\"" } else { "\"-inf\"" }.into()
    } else if x.fract() == 0.0 && x.abs() < 9.0e15 && !(x == 0.0 && x.is_sign_negative()) {
        format!("{}", x as i64)
    } else {
        format!("{x:?}")
    }
}

/// JSON numbers, with `"nan"`, `"inf"` and `"-inf"` as strings.
pub fn json_number(x: f64) -> Value {
    if x.is_finite() {
        if x.fract() == 0.0 && x.abs() < 9.0e15 && !(x == 0.0 && x.is_sign_negative()) {
            Value::from(x as i64)
        } else {
            Value::from(x)
        }
    } else if x.is_nan() {
        Value::from("nan")
    } else if x > 0.0 {
        Value::from("inf")
    } else {
        Value::from("-inf")
    }
}

pub fn to_csv(table: &Table) -> String {
    let mut s = table.columns.join(",");
    s.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row.iter().map(|&x| csv_number(x)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

pub fn to_json(meta: Map<String, Value>, summary: Value, table: &Table) -> String {
    let mut doc = meta;
    doc.insert("summary".into(), summary);
    doc.insert("columns".into(), table.columns.iter().map(|c| Value::from(c.as_str())).collect());
    doc.insert(
        "rows".into(),
        table.rows.iter().map(|r| Value::Array(r.iter().map(|&x| json_number(x)).collect())).collect(),
    );
    let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("json serializes");
    s.push('\n');
    s
}

pub fn write(path: &Path, text: &str) -> Result<(), LabError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| LabError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| LabError::io(path, e))
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x: String,
    pub ys: Vec<String>,
    pub log_y: bool,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const MARGIN: [f64; 4] = [40.0, 160.0, 50.0, 80.0]; // top, right, bottom, left
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn nice(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-2 || x.abs() >= 1e4) {
        format!("{x:.2e}")
    } else {
        format!("{}", (x * 1000.0).round() / 1000.0)
    }
}

/// A line chart of `ys` against `x`; non-finite points (and non-positive ones
/// on a log axis) are skipped.
pub fn to_svg(plot: &Plot, table: &Table) -> String {
    let xs = table.column(&plot.x).unwrap_or_default();
    let map_y = |y: f64| if plot.log_y { y.log10() } else { y };
    let series: Vec<(String, Vec<(f64, f64)>)> = plot
        .ys
        .iter()
        .map(|name| {
            let ys = table.column(name).unwrap_or_default();
            let pts = xs
                .iter()
                .zip(&ys)
                .filter(|(x, y)| x.is_finite() && y.is_finite() && (!plot.log_y || **y > 0.0))
                .map(|(&x, &y)| (x, map_y(y)))
                .collect();
            (name.clone(), pts)
        })
        .collect();
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.1.iter().copied()).collect();
    let bounds = |f: fn(&(f64, f64)) -> f64| {
        let lo = all.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = all.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        match (lo.is_finite(), hi > lo) {
            (false, _) => (0.0, 1.0),
            (true, true) => (lo, hi),
            (true, false) => (lo - 0.5, hi + 0.5),
        }
    };
    let (x0, x1) = bounds(|p| p.0);
    let (y0, y1) = bounds(|p| p.1);
    let [top, right, bottom, left] = MARGIN;
    let (pw, ph) = (WIDTH - left - right, HEIGHT - top - bottom);
    let px = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let py = |y: f64| top + ph - (y - y0) / (y1 - y0) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        left + pw / 2.0,
        plot.title
    );
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let ylabel = if plot.log_y { nice(10f64.powf(yv)) } else { nice(yv) };
        let _ = writeln!(
            s,
            r##"<line x1="{0:.2}" y1="{1}" x2="{0:.2}" y2="{2}" stroke="#ddd"/><text x="{0:.2}" y="{3}" text-anchor="middle">{4}</text>"##,
            px(xv),
            top,
            top + ph,
            top + ph + 18.0,
            nice(xv)
        );
        let _ = writeln!(
            s,
            r##"<line x1="{0}" y1="{1:.2}" x2="{2}" y2="{1:.2}" stroke="#ddd"/><text x="{3}" y="{4:.2}" text-anchor="end">{5}</text>"##,
            left,
            py(yv),
            left + pw,
            left - 6.0,
            py(yv) + 4.0,
            ylabel
        );
    }
    let _ =
        writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, left + pw / 2.0, HEIGHT - 12.0, plot.x);
    for (i, (name, pts)) in series.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        if !pts.is_empty() {
            let path: Vec<String> = pts.iter().map(|&(x, y)| format!("{:.2},{:.2}", px(x), py(y))).collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                path.join(" ")
            );
        }
        let ly = top + 16.0 + 18.0 * i as f64;
        let lx = left + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">{name}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0
        );
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_roundtrip_and_specials_are_quoted() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 1e300, 587.0, 0.0] {
            let s = csv_number(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
        }
        assert_eq!(csv_number(f64::NAN), "\"nan\"");
        assert_eq!(csv_number(f64::NEG_INFINITY), "\"-inf\"");
        assert_eq!(csv_number(-0.0), "-0.0");
        assert_eq!(json_number(f64::INFINITY), Value::from("inf"));
    }

    #[test]
    fn empty_table_has_header_only() {
        let t = Table::new(&["a", "b"]);
        assert_eq!(to_csv(&t), "a,b\n");
        let svg = to_svg(&Plot { title: "t".into(), x: "a".into(), ys: vec!["b".into()], log_y: true }, &t);
        assert!(svg.starts_with("<svg") && svg.ends_with("</svg>\n"));
    }

    #[test]
    fn svg_skips_bad_points() {
        let mut t = Table::new(&["x", "y"]);
        t.push(vec![1.0, 2.0]);
        t.push(vec![2.0, f64::NAN]);
        t.push(vec![3.0, -1.0]);
        t.push(vec![4.0, 8.0]);
        let svg = to_svg(&Plot { title: "t".into(), x: "x".into(), ys: vec!["y".into()], log_y: true }, &t);
        let line = svg.lines().find(|l| l.starts_with("<polyline")).unwrap();
        assert_eq!(line.matches(',').count(), 2);
    }
}
