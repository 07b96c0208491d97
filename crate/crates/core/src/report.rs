//! Outcome of an inequality scan.
//!
//! Every check in this crate compares a left-hand side against a right-hand
//! side over a set of samples (λ values, offsets t, point triples). The
//! *deficit* of a sample is `lhs - rhs`; a sample is a violation when its
//! deficit is below `-tolerance`, where the tolerance may differ per sample.
//! The report keeps the sample with the smallest margin `deficit + tolerance`
//! so that `verdict == Violation` iff `worst_deficit < -tolerance` holds for
//! the reported pair.

use std::collections::BTreeMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Absolute plus relative slack: `abs + rel * scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }

    /// Slack for data computed in closed form.
    pub const fn exact() -> Self {
        Tolerance::new(1e-12, 1e-12)
    }

    pub fn threshold(&self, scale: f64) -> f64 {
        self.abs + self.rel * scale.abs()
    }

    /// Error bound on a value `v` known to this tolerance.
    pub fn bound(&self, v: f64) -> f64 {
        self.threshold(v)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Tolerance::new(self.abs * factor, self.rel * factor)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Violation,
    Vacuous,
}

/// Parameters identifying one sample of a scan.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub lambda: Option<f64>,
    pub t: Option<f64>,
    #[serde(flatten)]
    pub params: BTreeMap<String, f64>,
}

impl Witness {
    pub fn lambda(lambda: f64) -> Self {
        Witness {
            lambda: Some(lambda),
            ..Default::default()
        }
    }

    pub fn t(t: f64) -> Self {
        Witness {
            t: Some(t),
            ..Default::default()
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }
}

/// One evaluated sample of a scan.
#[derive(Debug, Clone, PartialEq)]
pub struct DeficitSample {
    pub witness: Witness,
    pub lhs: f64,
    pub rhs: f64,
    pub deficit: f64,
    pub tolerance: f64,
}

impl DeficitSample {
    pub fn margin(&self) -> f64 {
        self.deficit + self.tolerance
    }

    pub fn is_violation(&self) -> bool {
        self.deficit < -self.tolerance
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcavityReport {
    pub verdict: Verdict,
    #[serde(serialize_with = "finite_or_null", deserialize_with = "null_as_infinity")]
    pub worst_deficit: f64,
    pub witness: Option<Witness>,
    pub samples: usize,
    #[serde(serialize_with = "finite_or_null", deserialize_with = "null_as_infinity")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    /// Per-sample breakdown in scan order.
    #[serde(skip)]
    pub trace: Vec<DeficitSample>,
}

impl ConcavityReport {
    /// Builds a report from evaluated samples. An empty list yields a vacuous verdict.
    pub fn from_samples(trace: Vec<DeficitSample>) -> Self {
        let worst = trace
            .iter()
            .enumerate()
            .min_by(|(i, a), (j, b)| a.margin().total_cmp(&b.margin()).then(i.cmp(j)))
            .map(|(_, s)| s.clone());
        match worst {
            None => ConcavityReport::vacuous("no samples to check"),
            Some(w) => ConcavityReport {
                verdict: if w.is_violation() {
                    Verdict::Violation
                } else {
                    Verdict::Pass
                },
                worst_deficit: w.deficit,
                witness: Some(w.witness),
                samples: trace.len(),
                tolerance: w.tolerance,
                reason: None,
                trace,
            },
        }
    }

    pub fn vacuous(reason: impl Into<String>) -> Self {
        ConcavityReport {
            verdict: Verdict::Vacuous,
            worst_deficit: f64::INFINITY,
            witness: None,
            samples: 0,
            tolerance: f64::INFINITY,
            reason: Some(reason.into()),
            trace: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn is_violation(&self) -> bool {
        self.verdict == Verdict::Violation
    }

    pub fn is_vacuous(&self) -> bool {
        self.verdict == Verdict::Vacuous
    }

    /// Smallest raw deficit over the trace, regardless of per-sample tolerance.
    pub fn min_deficit(&self) -> f64 {
        self.trace
            .iter()
            .map(|s| s.deficit)
            .fold(f64::INFINITY, f64::min)
    }

    /// Concatenates the traces of several reports and re-selects the worst sample.
    pub fn merge(reports: impl IntoIterator<Item = ConcavityReport>) -> Self {
        let mut trace = Vec::new();
        let mut reasons = Vec::new();
        for r in reports {
            if let Some(reason) = r.reason {
                reasons.push(reason);
            }
            trace.extend(r.trace);
        }
        let mut merged = ConcavityReport::from_samples(trace);
        if merged.is_vacuous() && !reasons.is_empty() {
            merged.reason = Some(reasons.join("; "));
        }
        merged
    }
}

fn finite_or_null<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else {
        s.serialize_none()
    }
}

fn null_as_infinity<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
}
