use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{verify_text, Verdict};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Expect {
    #[default]
    Zero,
    /// A documented discrepancy: the printed solution is known not to solve
    /// its equation.
    Nonzero,
}

/// One corpus record; strings use the equation grammar plus kernel calls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub equation: String,
    pub solution: String,
    #[serde(default)]
    pub params: Vec<String>,
    #[serde(default)]
    pub relations: Vec<String>,
    #[serde(default)]
    pub expect: Expect,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixtureOutcome {
    pub name: String,
    pub expect: Expect,
    /// `None` when the fixture could not be parsed or verified.
    pub verdict: Option<Verdict>,
    pub error: Option<String>,
    /// Cleared residual, `0` for zero verdicts.
    pub residual: String,
    pub spot_max: Option<f64>,
}

impl FixtureOutcome {
    /// Nonzero or erroring without being whitelisted.
    pub fn is_failure(&self) -> bool {
        match self.verdict {
            Some(Verdict::Zero) => false,
            Some(Verdict::Nonzero) => self.expect != Expect::Nonzero,
            None => true,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct CorpusSummary {
    pub outcomes: Vec<FixtureOutcome>,
}

impl CorpusSummary {
    pub fn zero_count(&self) -> usize {
        self.outcomes.iter().filter(|o| o.verdict == Some(Verdict::Zero)).count()
    }

    pub fn documented(&self) -> Vec<&FixtureOutcome> {
        self.outcomes
            .iter()
            .filter(|o| o.verdict == Some(Verdict::Nonzero) && o.expect == Expect::Nonzero)
            .collect()
    }

    pub fn failures(&self) -> Vec<&FixtureOutcome> {
        self.outcomes.iter().filter(|o| o.is_failure()).collect()
    }

    /// Whitelisted discrepancies that now verify; the whitelist is out of date.
    pub fn stale(&self) -> Vec<&FixtureOutcome> {
        self.outcomes
            .iter()
            .filter(|o| o.verdict == Some(Verdict::Zero) && o.expect == Expect::Nonzero)
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.failures().is_empty()
    }
}

fn run(f: &Fixture) -> FixtureOutcome {
    let params: Vec<&str> = f.params.iter().map(String::as_str).collect();
    let relations: Vec<&str> = f.relations.iter().map(String::as_str).collect();
    match verify_text(&f.equation, &f.solution, &params, &relations) {
        Ok(r) => FixtureOutcome {
            name: f.name.clone(),
            expect: f.expect,
            verdict: Some(r.verdict),
            error: None,
            residual: r.residual_poly().to_string(),
            spot_max: (!r.spot_check.samples.is_empty()).then(|| r.spot_check.max()),
        },
        Err(e) => FixtureOutcome {
            name: f.name.clone(),
            expect: f.expect,
            verdict: None,
            error: Some(e.to_string()),
            residual: String::new(),
            spot_max: None,
        },
    }
}

/// Verifies every fixture in parallel; outcomes keep the input order.
pub fn verify_corpus(fixtures: &[Fixture]) -> CorpusSummary {
    CorpusSummary {
        outcomes: fixtures.par_iter().map(run).collect(),
    }
}

/// The bundled corpus of published solutions.
pub fn bundled() -> Vec<Fixture> {
    serde_json::from_str(include_str!("../../fixtures/corpus.json")).expect("bundled corpus is valid JSON")
}
