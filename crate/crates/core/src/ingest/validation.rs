use std::fmt;

/// Where a validation issue was found.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Locator {
    Header,
    /// 1-based line number in the input file (the header is line 1).
    Line(u64),
    /// A series or year that is at fault as a whole, e.g. `crop=rice`.
    Key(String),
}

impl fmt::Display for Locator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Locator::Header => write!(f, "header"),
            Locator::Line(n) => write!(f, "line {n}"),
            Locator::Key(k) => write!(f, "{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub locator: Locator,
    pub rule: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.locator, self.rule)
    }
}

/// Outcome of validating one input file. The file is accepted iff `errors` is empty.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub errors: Vec<Issue>,
    pub warnings: Vec<Issue>,
    /// Informational flags that are neither errors nor rule relaxations,
    /// e.g. a synthesized cropland series.
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn is_accepted(&self) -> bool {
        self.errors.is_empty()
    }

    pub(crate) fn error(&mut self, locator: Locator, rule: impl Into<String>) {
        self.errors.push(Issue { locator, rule: rule.into() });
    }

    pub(crate) fn warn(&mut self, locator: Locator, rule: impl Into<String>) {
        self.warnings.push(Issue { locator, rule: rule.into() });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.errors {
            writeln!(f, "error: {e}")?;
        }
        for w in &self.warnings {
            writeln!(f, "warning: {w}")?;
        }
        for n in &self.notes {
            writeln!(f, "note: {n}")?;
        }
        Ok(())
    }
}
