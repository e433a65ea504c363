//! Named residuals with a pass/fail verdict.

use std::fmt;

use crate::Real;

/// Ordered list of named residuals compared against one tolerance.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport<T: Real> {
    entries: Vec<(String, T)>,
    tol: T,
}

impl<T: Real> ResidualReport<T> {
    pub fn new(tol: T) -> Self {
        Self {
            entries: Vec::new(),
            tol,
        }
    }

    pub fn push(&mut self, name: impl Into<String>, residual: T) {
        self.entries.push((name.into(), residual));
    }

    /// Appends every entry of `other`, prefixing names with `prefix`.
    pub fn extend_prefixed(&mut self, prefix: &str, other: &Self) {
        for (name, r) in &other.entries {
            let full = if prefix.is_empty() {
                name.clone()
            } else {
                format!("{prefix}{name}")
            };
            self.entries.push((full, *r));
        }
    }

    pub fn extend(&mut self, other: &Self) {
        self.extend_prefixed("", other);
    }

    pub fn entries(&self) -> &[(String, T)] {
        &self.entries
    }

    pub fn tol(&self) -> T {
        self.tol
    }

    pub fn get(&self, name: &str) -> Option<T> {
        self.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, r)| *r)
    }

    fn fails(&self, r: T) -> bool {
        !(r <= self.tol)
    }

    /// True when every residual is at most the tolerance. NaN residuals fail.
    pub fn verdict(&self) -> bool {
        self.entries.iter().all(|(_, r)| !self.fails(*r))
    }

    pub fn first_failure(&self) -> Option<(&str, T)> {
        self.entries
            .iter()
            .find(|(_, r)| self.fails(*r))
            .map(|(n, r)| (n.as_str(), *r))
    }

    pub fn failures(&self) -> Vec<(&str, T)> {
        self.entries
            .iter()
            .filter(|(_, r)| self.fails(*r))
            .map(|(n, r)| (n.as_str(), *r))
            .collect()
    }

    pub fn max_residual(&self) -> T {
        self.entries.iter().fold(
            T::zero(),
            |m, (_, r)| if *r > m || r.is_nan() { *r } else { m },
        )
    }
}

impl<T: Real> fmt::Display for ResidualReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .entries
            .iter()
            .map(|(n, _)| n.len())
            .max()
            .unwrap_or(8)
            .max(8);
        for (name, r) in &self.entries {
            let status = if self.fails(*r) { "FAIL" } else { "ok" };
            writeln!(f, "{name:<width$}  {:>12.3e}  {status}", r.to_f64_lossy())?;
        }
        write!(
            f,
            "verdict: {} (tol {:e})",
            if self.verdict() { "PASS" } else { "FAIL" },
            self.tol.to_f64_lossy()
        )
    }
}
