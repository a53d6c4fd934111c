//! Structured check reports shared by every verifier.

use std::fmt;

use serde::Serialize;

/// One numeric claim: the residual that was measured and the tolerance it
/// was compared against.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub operation: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl Report {
    pub fn new(operation: impl Into<String>) -> Self {
        Report {
            operation: operation.into(),
            passed: true,
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    /// Records `residual <= tolerance`. NaN residuals fail.
    pub fn check(&mut self, name: impl Into<String>, residual: f64, tolerance: f64) -> bool {
        self.check_with(name, residual, tolerance, None)
    }

    pub fn check_with(
        &mut self,
        name: impl Into<String>,
        residual: f64,
        tolerance: f64,
        detail: Option<String>,
    ) -> bool {
        let passed = residual <= tolerance;
        self.passed &= passed;
        self.checks.push(Check {
            name: name.into(),
            residual,
            tolerance,
            passed,
            detail,
        });
        passed
    }

    /// Records an exact count that must be zero.
    pub fn check_exact(&mut self, name: impl Into<String>, violations: usize) -> bool {
        self.check(name, violations as f64, 0.0)
    }

    /// Records a boolean condition; the residual is 0 or 1.
    pub fn require(&mut self, name: impl Into<String>, ok: bool, detail: Option<String>) -> bool {
        self.check_with(name, if ok { 0.0 } else { 1.0 }, 0.0, detail)
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// Appends another report's checks under a name prefix.
    pub fn absorb(&mut self, prefix: &str, other: Report) {
        for mut c in other.checks {
            c.name = format!("{prefix}: {}", c.name);
            self.passed &= c.passed;
            self.checks.push(c);
        }
        self.notes
            .extend(other.notes.into_iter().map(|n| format!("{prefix}: {n}")));
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn max_residual(&self) -> f64 {
        self.checks.iter().map(|c| c.residual).fold(0.0, f64::max)
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{}: {}",
            self.operation,
            if self.passed { "PASS" } else { "FAIL" }
        )?;
        for c in &self.checks {
            write!(
                f,
                "  [{}] {}: residual {:.3e} (tol {:.1e})",
                if c.passed { "ok" } else { "FAIL" },
                c.name,
                c.residual,
                c.tolerance
            )?;
            if let Some(d) = &c.detail {
                write!(f, " -- {d}")?;
            }
            writeln!(f)?;
        }
        for n in &self.notes {
            writeln!(f, "  note: {n}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_residual_fails() {
        let mut r = Report::new("t");
        assert!(!r.check("nan", f64::NAN, 1.0));
        assert!(!r.passed);
    }

    #[test]
    fn absorb_prefixes_and_propagates_failure() {
        let mut inner = Report::new("inner");
        inner.check("x", 2.0, 1.0);
        let mut outer = Report::new("outer");
        outer.check("y", 0.0, 1.0);
        outer.absorb("sub", inner);
        assert!(!outer.passed);
        assert_eq!(outer.checks[1].name, "sub: x");
    }
}
