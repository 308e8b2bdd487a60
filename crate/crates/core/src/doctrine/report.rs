use std::fmt;

/// Violations kept in full; further ones are only counted.
const MAX_STORED: usize = 2_000;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Violation {
    pub kind: String,
    pub fields: Vec<(String, String)>,
}

impl Violation {
    pub fn new(kind: &str) -> Self {
        Self {
            kind: kind.to_string(),
            fields: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl fmt::Display) -> Self {
        self.fields.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VIOLATION {}", self.kind)?;
        for (k, v) in &self.fields {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

/// The outcome of a verifier: every violation found, in sorted order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Report {
    violations: Vec<Violation>,
    total: usize,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, v: Violation) {
        self.total += 1;
        if self.violations.len() < MAX_STORED {
            self.violations.push(v);
        }
    }

    pub fn extend(&mut self, other: Report) {
        self.total += other.total - other.violations.len();
        for v in other.violations {
            self.push(v);
        }
    }

    pub fn passed(&self) -> bool {
        self.total == 0
    }

    pub fn total(&self) -> usize {
        self.total
    }

    /// Stored violations, sorted.
    pub fn violations(&self) -> Vec<Violation> {
        let mut v = self.violations.clone();
        v.sort();
        v.dedup();
        v
    }

    pub fn has_kind(&self, kind: &str) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }

    /// One line per violation followed by a verdict line.
    pub fn lines(&self) -> Vec<String> {
        let mut out: Vec<String> = self.violations().iter().map(|v| v.to_string()).collect();
        if self.total > self.violations.len() {
            out.push(format!("NOTE {} further violations not listed", self.total - self.violations.len()));
        }
        out.push(format!("VERDICT {}", if self.passed() { "pass" } else { "fail" }));
        out
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in self.lines() {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}
