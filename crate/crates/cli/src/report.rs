//! One row per check: `(suite, case, quantity, value, bound, pass)`.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Text,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub suite: String,
    pub case: String,
    pub quantity: String,
    pub value: f64,
    pub bound: Option<f64>,
    pub pass: bool,
}

impl Row {
    pub fn new(suite: &str, case: impl Into<String>, quantity: impl Into<String>, value: f64) -> Self {
        Row {
            suite: suite.to_string(),
            case: case.into(),
            quantity: quantity.into(),
            value,
            bound: None,
            pass: value.is_finite(),
        }
    }

    /// Passes when `value ≥ bound − slack`.
    pub fn at_least(mut self, bound: f64, slack: f64) -> Self {
        self.bound = Some(bound);
        self.pass = self.value >= bound - slack;
        self
    }

    /// Passes when `value ≤ bound + slack`.
    pub fn at_most(mut self, bound: f64, slack: f64) -> Self {
        self.bound = Some(bound);
        self.pass = self.value <= bound + slack;
        self
    }

    /// Passes when `|value − bound| ≤ slack`.
    pub fn near(mut self, bound: f64, slack: f64) -> Self {
        self.bound = Some(bound);
        self.pass = (self.value - bound).abs() <= slack;
        self
    }

    pub fn passing(mut self, pass: bool) -> Self {
        self.pass = pass;
        self
    }
}

pub fn render(rows: &[Row], format: Format) -> String {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r).expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
        }
        Format::Text => {
            let mut out = String::new();
            for r in rows {
                let bound = r.bound.map_or("-".to_string(), |b| b.to_string());
                out += &format!(
                    "{:<4} {:<10} {:<28} {:<22} {:>24} {:>24}\n",
                    if r.pass { "ok" } else { "FAIL" },
                    r.suite,
                    r.case,
                    r.quantity,
                    r.value,
                    bound
                );
            }
            let failed = rows.iter().filter(|r| !r.pass).count();
            out += &format!("{} checks, {failed} failed\n", rows.len());
            out
        }
    }
}
