//! Reporting helpers for the acceptance gate in `tests/acceptance.rs`.

use std::time::{Duration, Instant};

/// Outcome of one criterion.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }

    /// Conjunction of named clauses; the detail lists each clause.
    pub fn all(clauses: &[(&str, bool, String)]) -> Self {
        let pass = clauses.iter().all(|c| c.1);
        let detail = clauses
            .iter()
            .map(|(name, ok, info)| format!("{name}: {} ({info})", if *ok { "ok" } else { "FAILED" }))
            .collect::<Vec<_>>()
            .join("; ");
        Self { pass, detail }
    }
}

/// Runs criteria in order, printing one PASS/FAIL line for each.
#[derive(Debug, Default)]
pub struct Suite {
    results: Vec<(String, bool, Duration)>,
    filter: Option<Vec<String>>,
}

impl Suite {
    /// `SRPAT_ACCEPT=1,5,12` restricts the run to those criteria.
    pub fn from_env() -> Self {
        let filter = std::env::var("SRPAT_ACCEPT")
            .ok()
            .map(|s| s.split(',').map(|x| x.trim().to_string()).collect());
        Self { results: Vec::new(), filter }
    }

    pub fn wants(&self, id: &str) -> bool {
        self.filter.as_ref().is_none_or(|f| f.iter().any(|x| x == id))
    }

    pub fn run(&mut self, id: &str, title: &str, limit: Duration, f: impl FnOnce() -> Verdict) {
        if !self.wants(id) {
            return;
        }
        let start = Instant::now();
        let v = f();
        let took = start.elapsed();
        let over = took > limit;
        let pass = v.pass && !over;
        let budget = if over { format!(" over the {:.0}s budget", limit.as_secs_f64()) } else { String::new() };
        println!(
            "{} criterion {id} ({title}) [{:.1}s{budget}]: {}",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            v.detail
        );
        self.results.push((id.to_string(), pass, took));
    }

    pub fn failed(&self) -> Vec<&str> {
        self.results.iter().filter(|r| !r.1).map(|r| r.0.as_str()).collect()
    }

    /// Prints the summary; returns the process exit code.
    pub fn finish(&self) -> i32 {
        let failed = self.failed();
        println!(
            "acceptance: {} passed, {} failed{}",
            self.results.len() - failed.len(),
            failed.len(),
            if failed.is_empty() { String::new() } else { format!(" (criteria {})", failed.join(", ")) }
        );
        i32::from(!failed.is_empty())
    }
}
