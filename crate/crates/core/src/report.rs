//! Line-delimited JSON reports.
//!
//! The first line is a header carrying `format_version` and the timestamp;
//! every later line is a record whose content depends only on the job and
//! its seed.

use crate::error::Result;
use serde::Serialize;
use serde_json::{json, Value};
use std::io::Write;

pub const FORMAT_VERSION: u32 = 1;

/// A numeric claim together with the tolerance it is judged against.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRecord {
    /// Passes when `value ≤ tolerance`.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        CheckRecord { name: name.into(), value, tolerance, pass: value <= tolerance }
    }

    /// Exact integer comparison, reported as `|got − want|` with tolerance 0.
    pub fn exact(name: impl Into<String>, got: usize, want: usize) -> Self {
        let d = got.abs_diff(want) as f64;
        CheckRecord { name: name.into(), value: d, tolerance: 0.0, pass: d == 0.0 }
    }

    /// A boolean condition, reported as value 0 (holds) or 1.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        CheckRecord { name: name.into(), value: if ok { 0.0 } else { 1.0 }, tolerance: 0.0, pass: ok }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Fail,
    Undecided,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::Fail => 1,
            Outcome::Undecided => 2,
        }
    }
}

/// Collected records of one job.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub command: String,
    records: Vec<Value>,
    failed: bool,
    undecided: bool,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report { command: command.to_string(), ..Default::default() }
    }

    pub fn check(&mut self, rec: CheckRecord) {
        self.failed |= !rec.pass;
        self.records.push(json!({ "kind": "check", "name": rec.name, "value": rec.value,
            "tolerance": rec.tolerance, "pass": rec.pass }));
    }

    pub fn checks(&mut self, recs: impl IntoIterator<Item = CheckRecord>) {
        for r in recs {
            self.check(r);
        }
    }

    /// Non-numeric or descriptive data.
    pub fn data(&mut self, name: &str, value: impl Serialize) {
        let value = serde_json::to_value(value).unwrap_or(Value::Null);
        self.records.push(json!({ "kind": "data", "name": name, "value": value }));
    }

    pub fn undecided(&mut self, name: &str, detail: impl Serialize) {
        self.undecided = true;
        let detail = serde_json::to_value(detail).unwrap_or(Value::Null);
        self.records.push(json!({ "kind": "undecided", "name": name, "detail": detail }));
    }

    pub fn error(&mut self, context: &str, message: &str) {
        self.failed = true;
        self.records.push(json!({ "kind": "error", "context": context, "message": message }));
    }

    pub fn outcome(&self) -> Outcome {
        if self.failed {
            Outcome::Fail
        } else if self.undecided {
            Outcome::Undecided
        } else {
            Outcome::Pass
        }
    }

    pub fn records(&self) -> &[Value] {
        &self.records
    }

    /// Iterates over the check records as `(name, value, tolerance, pass)`.
    pub fn check_records(&self) -> impl Iterator<Item = &Value> {
        self.records.iter().filter(|r| r["kind"] == "check")
    }

    fn header(&self, timestamp: Option<&str>) -> Value {
        json!({ "kind": "header", "format_version": FORMAT_VERSION, "command": self.command,
            "timestamp": timestamp })
    }

    fn footer(&self) -> Value {
        let checks = self.check_records().count();
        let failed = self.check_records().filter(|r| r["pass"] == false).count();
        json!({ "kind": "summary", "outcome": self.outcome(), "checks": checks, "failed": failed })
    }

    /// Writes header, records and summary, one JSON value per line.
    pub fn write_jsonl<W: Write>(&self, mut w: W, timestamp: Option<&str>) -> Result<()> {
        writeln!(w, "{}", serde_json::to_string(&self.header(timestamp))?)?;
        for r in &self.records {
            writeln!(w, "{}", serde_json::to_string(r)?)?;
        }
        writeln!(w, "{}", serde_json::to_string(&self.footer())?)?;
        Ok(())
    }

    pub fn to_jsonl(&self, timestamp: Option<&str>) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf, timestamp).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8 JSON")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outcome_precedence() {
        let mut r = Report::new("x");
        assert_eq!(r.outcome(), Outcome::Pass);
        r.undecided("orbit", "residual between thresholds");
        assert_eq!(r.outcome(), Outcome::Undecided);
        r.check(CheckRecord::at_most("a", 2.0, 1.0));
        assert_eq!(r.outcome(), Outcome::Fail);
        assert_eq!(r.outcome().exit_code(), 1);
    }

    #[test]
    fn lines_are_json() {
        let mut r = Report::new("x");
        r.check(CheckRecord::exact("dim", 4, 4));
        r.data("names", ["a11", "b12"]);
        let text = r.to_jsonl(Some("now"));
        let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0]["format_version"], 1);
        assert_eq!(lines[1]["pass"], true);
        assert_eq!(lines[3]["outcome"], "pass");
    }
}
