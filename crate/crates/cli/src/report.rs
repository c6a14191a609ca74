//! Report documents. Floats are written as `{:.16e}` (17 significant
//! digits) and object keys keep insertion order, so equal inputs give equal
//! bytes.

use std::fs;
use std::path::Path;

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::registry::is_registered;

pub const TOOL: &str = "discofield";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Minimal ordered JSON tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Null,
    Bool(bool),
    Int(i64),
    Num(f64),
    Str(String),
    Arr(Vec<Node>),
    Obj(Vec<(String, Node)>),
}

/// Float text with 17 significant digits; `None` for NaN and infinities.
pub fn format_float(v: f64) -> Option<String> {
    v.is_finite().then(|| format!("{v:.16e}"))
}

impl Serialize for Node {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Node::Null => s.serialize_none(),
            Node::Bool(b) => s.serialize_bool(*b),
            Node::Int(i) => s.serialize_i64(*i),
            Node::Num(v) => match format_float(*v) {
                Some(text) => RawValue::from_string(text)
                    .map_err(serde::ser::Error::custom)?
                    .serialize(s),
                None => s.serialize_none(),
            },
            Node::Str(t) => s.serialize_str(t),
            Node::Arr(items) => {
                let mut seq = s.serialize_seq(Some(items.len()))?;
                for it in items {
                    seq.serialize_element(it)?;
                }
                seq.end()
            }
            Node::Obj(fields) => {
                let mut map = s.serialize_map(Some(fields.len()))?;
                for (k, v) in fields {
                    map.serialize_entry(k, v)?;
                }
                map.end()
            }
        }
    }
}

impl From<f64> for Node {
    fn from(v: f64) -> Self {
        Node::Num(v)
    }
}

impl From<usize> for Node {
    fn from(v: usize) -> Self {
        Node::Int(v as i64)
    }
}

impl From<u64> for Node {
    fn from(v: u64) -> Self {
        Node::Int(v as i64)
    }
}

impl From<bool> for Node {
    fn from(v: bool) -> Self {
        Node::Bool(v)
    }
}

impl From<&str> for Node {
    fn from(v: &str) -> Self {
        Node::Str(v.to_string())
    }
}

impl From<String> for Node {
    fn from(v: String) -> Self {
        Node::Str(v)
    }
}

impl<T: Into<Node>> From<Vec<T>> for Node {
    fn from(v: Vec<T>) -> Self {
        Node::Arr(v.into_iter().map(Into::into).collect())
    }
}

impl<T: Into<Node> + Clone, const N: usize> From<[T; N]> for Node {
    fn from(v: [T; N]) -> Self {
        Node::Arr(v.into_iter().map(Into::into).collect())
    }
}

impl<T: Into<Node>> From<Option<T>> for Node {
    fn from(v: Option<T>) -> Self {
        v.map_or(Node::Null, Into::into)
    }
}

/// Object from `(key, value)` pairs.
pub fn obj<I, K>(fields: I) -> Node
where
    I: IntoIterator<Item = (K, Node)>,
    K: Into<String>,
{
    Node::Obj(fields.into_iter().map(|(k, v)| (k.into(), v)).collect())
}

/// One verified quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub id: String,
    pub eq_ref: &'static str,
    pub value: f64,
    /// `None` for informational rows that report a finding.
    pub tolerance: Option<f64>,
    pub pass: bool,
    pub note: Option<String>,
}

impl Check {
    fn new(
        id: impl Into<String>,
        eq_ref: &'static str,
        value: f64,
        tolerance: Option<f64>,
        pass: bool,
    ) -> Self {
        debug_assert!(is_registered(eq_ref), "unregistered eq_ref {eq_ref}");
        Self {
            id: id.into(),
            eq_ref,
            value,
            tolerance,
            pass,
            note: None,
        }
    }

    /// Passes when `value <= tol`; NaN fails.
    pub fn at_most(id: impl Into<String>, eq_ref: &'static str, value: f64, tol: f64) -> Self {
        Self::new(id, eq_ref, value, Some(tol), value <= tol)
    }

    /// Passes when `value >= tol`.
    pub fn at_least(id: impl Into<String>, eq_ref: &'static str, value: f64, tol: f64) -> Self {
        Self::new(id, eq_ref, value, Some(tol), value >= tol)
    }

    /// Exact integer agreement; the value is the absolute difference.
    pub fn count_equal(
        id: impl Into<String>,
        eq_ref: &'static str,
        got: usize,
        want: usize,
    ) -> Self {
        Self::new(
            id,
            eq_ref,
            got.abs_diff(want) as f64,
            Some(0.0),
            got == want,
        )
        .with_note(format!("got {got}, expected {want}"))
    }

    /// Boolean condition, value 1 when it holds.
    pub fn flag(id: impl Into<String>, eq_ref: &'static str, holds: bool) -> Self {
        Self::new(id, eq_ref, if holds { 1.0 } else { 0.0 }, Some(1.0), holds)
    }

    /// Reported value without a pass criterion.
    pub fn info(id: impl Into<String>, eq_ref: &'static str, value: f64) -> Self {
        Self::new(id, eq_ref, value, None, true)
    }

    /// A sub-check that could not be computed.
    pub fn error(id: impl Into<String>, eq_ref: &'static str, message: impl Into<String>) -> Self {
        Self::new(id, eq_ref, f64::NAN, None, false).with_note(message)
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }

    fn to_node(&self) -> Node {
        let mut f = vec![
            ("id".to_string(), Node::from(self.id.as_str())),
            ("eq_ref".to_string(), Node::from(self.eq_ref)),
            ("value".to_string(), Node::from(self.value)),
            ("tolerance".to_string(), Node::from(self.tolerance)),
            ("pass".to_string(), Node::from(self.pass)),
        ];
        if let Some(n) = &self.note {
            f.push(("note".to_string(), Node::from(n.as_str())));
        }
        Node::Obj(f)
    }
}

/// CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(v) => format_float(*v).unwrap_or_else(|| {
                if v.is_nan() {
                    "nan".into()
                } else {
                    v.to_string()
                }
            }),
            Cell::Text(t) => t.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Bool(v)
    }
}

/// Plot-ready table written next to the report.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// File name suffix, e.g. `tuples` for `<command>.tuples.csv`.
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r.iter().map(Cell::render))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 cells")
    }
}

/// Outcome of one command.
#[derive(Debug, Clone)]
pub struct Report {
    pub command: String,
    pub seed: u64,
    pub config: Node,
    pub checks: Vec<Check>,
    pub data: Vec<(String, Node)>,
    pub tables: Vec<Table>,
    /// Computation errors; any entry makes the exit code 2.
    pub errors: Vec<String>,
    pub wall_time_s: Option<f64>,
}

impl Report {
    pub fn new(command: &str, seed: u64, config: Node) -> Self {
        Self {
            command: command.into(),
            seed,
            config,
            checks: Vec::new(),
            data: Vec::new(),
            tables: Vec::new(),
            errors: Vec::new(),
            wall_time_s: None,
        }
    }

    pub fn passed(&self) -> usize {
        self.checks.iter().filter(|c| c.pass).count()
    }

    pub fn failed(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    /// 0 when every check passes, 2 on any computation error, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if !self.errors.is_empty() {
            2
        } else if self.checks.iter().all(|c| c.pass) {
            0
        } else {
            1
        }
    }

    pub fn check(&self, id: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn to_node(&self) -> Node {
        let mut f: Vec<(String, Node)> = vec![
            ("tool".into(), TOOL.into()),
            ("version".into(), VERSION.into()),
            ("command".into(), self.command.as_str().into()),
            ("seed".into(), self.seed.into()),
            ("config".into(), self.config.clone()),
            (
                "checks".into(),
                Node::Arr(self.checks.iter().map(Check::to_node).collect()),
            ),
            ("data".into(), Node::Obj(self.data.clone())),
            (
                "summary".into(),
                obj([
                    ("total", self.checks.len().into()),
                    ("passed", self.passed().into()),
                    ("failed", (self.checks.len() - self.passed()).into()),
                    ("errors", Node::from(self.errors.clone())),
                    ("exit_code", Node::Int(self.exit_code() as i64)),
                ]),
            ),
        ];
        if let Some(t) = self.wall_time_s {
            f.push(("wall_time_s".into(), t.into()));
        }
        Node::Obj(f)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_node()).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn checks_table(&self) -> Table {
        let mut t = Table::new(
            "checks",
            &["check_id", "eq_ref", "value", "tolerance", "pass"],
        );
        for c in &self.checks {
            t.push(vec![
                c.id.as_str().into(),
                c.eq_ref.into(),
                c.value.into(),
                c.tolerance.map_or(Cell::Text(String::new()), Cell::Num),
                c.pass.into(),
            ]);
        }
        t
    }

    /// Writes `<command>.report.json`, `<command>.checks.csv` and one CSV per
    /// extra table into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(
            dir.join(format!("{}.report.json", self.command)),
            self.to_json(),
        )?;
        for t in std::iter::once(self.checks_table()).chain(self.tables.iter().cloned()) {
            fs::write(
                dir.join(format!("{}.{}.csv", self.command, t.name)),
                t.to_csv(),
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits() {
        let v = 0.1_f64 + 0.2;
        let text = format_float(v).unwrap();
        assert_eq!(text.parse::<f64>().unwrap(), v);
        let json =
            serde_json::to_string(&obj([("x", Node::from(v)), ("nan", Node::from(f64::NAN))]))
                .unwrap();
        assert_eq!(json, "{\"x\":3.0000000000000004e-1,\"nan\":null}");
        let back: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(back["x"].as_f64().unwrap(), v);
    }

    #[test]
    fn exit_codes() {
        let mut r = Report::new("x", 1, Node::Null);
        r.checks.push(Check::at_most("a", "mass-shell", 0.0, 1e-12));
        assert_eq!(r.exit_code(), 0);
        r.checks
            .push(Check::at_most("b", "mass-shell", f64::NAN, 1e-12));
        assert_eq!(r.exit_code(), 1);
        r.errors.push("boom".into());
        assert_eq!(r.exit_code(), 2);
    }

    #[test]
    fn checks_csv_header() {
        let mut r = Report::new("x", 1, Node::Null);
        r.checks.push(Check::info("a", "mass-shell", 2.5));
        let csv = r.checks_table().to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("check_id,eq_ref,value,tolerance,pass"));
        assert_eq!(
            lines.next(),
            Some("a,mass-shell,2.5000000000000000e0,,true")
        );
    }
}
