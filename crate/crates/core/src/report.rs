//! Pass/fail check rows and their CSV form `(check_name, value, tolerance, pass)`.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Bound {
    /// pass iff `value ≤ tolerance`
    AtMost,
    /// pass iff `value ≥ tolerance`
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub bound: Bound,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Check {
        Check {
            name: name.into(),
            value,
            tolerance,
            bound: Bound::AtMost,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, tolerance: f64) -> Check {
        Check {
            name: name.into(),
            value,
            tolerance,
            bound: Bound::AtLeast,
        }
    }

    /// NaN never passes.
    pub fn pass(&self) -> bool {
        match self.bound {
            Bound::AtMost => self.value <= self.tolerance,
            Bound::AtLeast => self.value >= self.tolerance,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

#[derive(Serialize)]
struct Row<'a> {
    check_name: &'a str,
    value: String,
    tolerance: String,
    pass: bool,
}

/// Fixed-width scientific formatting keeps CSV output byte-stable.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.12e}")
}

impl Report {
    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(Check::pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass())
    }

    pub fn len(&self) -> usize {
        self.checks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checks.is_empty()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        for c in &self.checks {
            wtr.serialize(Row {
                check_name: &c.name,
                value: fmt_f64(c.value),
                tolerance: fmt_f64(c.tolerance),
                pass: c.pass(),
            })?;
        }
        wtr.flush()?;
        Ok(())
    }
}
