//! Numeric certification of the discrepancy-propagation inequalities.
//!
//! Each check evaluates both sides of one inequality on a concrete instance
//! and returns a [`BoundReport`]. Deterministic inequalities must hold on every
//! valid instance; the generalization bounds hold with probability `1 - delta`
//! over the demonstration sample and are checked by resampling.

mod deterministic;
pub mod formulas;
mod probabilistic;

pub use deterministic::{
    check_eq14, check_lemma1, check_lemma2, check_lemma3, check_lemma6, check_pinsker, check_theorem1,
    check_theorem1_kl, check_theorem3,
};
pub use probabilistic::{
    check_gail_generalization, check_lemma4_generalization, gail_generalization_reports, check_lemma5_neural_gen, check_lemma7,
    check_theorem5, run_gail_trials, GailGeneralization, GailTrial, ProbabilisticOutcome, TrialParams,
};

use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Slack below which a report counts as a violation.
pub const SLACK_TOLERANCE: f64 = -1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundId {
    Lemma1,
    Lemma2,
    Lemma3,
    Theorem1,
    Theorem1Kl,
    Theorem3,
    Eq14JsTv,
    Pinsker,
    Lemma4Generalization,
    Lemma5NeuralGen,
    Lemma6Left,
    Lemma6Right,
    Lemma7Tv,
    Theorem5Value,
}

impl BoundId {
    pub const ALL: [BoundId; 14] = [
        BoundId::Lemma1,
        BoundId::Lemma2,
        BoundId::Lemma3,
        BoundId::Theorem1,
        BoundId::Theorem1Kl,
        BoundId::Theorem3,
        BoundId::Eq14JsTv,
        BoundId::Pinsker,
        BoundId::Lemma4Generalization,
        BoundId::Lemma5NeuralGen,
        BoundId::Lemma6Left,
        BoundId::Lemma6Right,
        BoundId::Lemma7Tv,
        BoundId::Theorem5Value,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundId::Lemma1 => "lemma1",
            BoundId::Lemma2 => "lemma2",
            BoundId::Lemma3 => "lemma3",
            BoundId::Theorem1 => "theorem1",
            BoundId::Theorem1Kl => "theorem1_kl",
            BoundId::Theorem3 => "theorem3",
            BoundId::Eq14JsTv => "eq14_js_tv",
            BoundId::Pinsker => "pinsker",
            BoundId::Lemma4Generalization => "lemma4_generalization",
            BoundId::Lemma5NeuralGen => "lemma5_neural_gen",
            BoundId::Lemma6Left => "lemma6_left",
            BoundId::Lemma6Right => "lemma6_right",
            BoundId::Lemma7Tv => "lemma7_tv",
            BoundId::Theorem5Value => "theorem5_value",
        }
    }

    /// Inequalities that hold on every valid instance. The left half of the
    /// neural-distance/TV sandwich is excluded: for the complete class it reads
    /// `2 TV <= TV`, which is false whenever the distributions differ.
    pub fn is_deterministic(self) -> bool {
        !matches!(
            self,
            BoundId::Lemma4Generalization
                | BoundId::Lemma5NeuralGen
                | BoundId::Lemma7Tv
                | BoundId::Theorem5Value
                | BoundId::Lemma6Left
        )
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Instance descriptor attached to a report.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundContext {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mdp_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policies: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl BoundContext {
    pub fn with_gamma(gamma: f64) -> Self {
        Self { gamma: Some(gamma), ..Self::default() }
    }
}

/// Both sides of one inequality instance `lhs <= rhs`.
///
/// `rhs` is `+inf` when the bound is vacuous on the instance (for example a
/// KL term with a support violation); such reports hold trivially. Non-finite
/// values serialize as the strings `"inf"`, `"-inf"` and `"nan"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar")]
pub struct BoundReport<T> {
    pub bound_id: BoundId,
    #[serde(with = "extended_float")]
    pub lhs: T,
    #[serde(with = "extended_float")]
    pub rhs: T,
    #[serde(with = "extended_float")]
    pub slack: T,
    pub holds: bool,
    pub context: BoundContext,
}

impl<T: Scalar> BoundReport<T> {
    pub fn new(bound_id: BoundId, lhs: T, rhs: T, context: BoundContext) -> Self {
        let slack = rhs - lhs;
        let holds = slack >= T::lit(SLACK_TOLERANCE);
        Self { bound_id, lhs, rhs, slack, holds, context }
    }

    pub fn with_context(mut self, context: BoundContext) -> Self {
        self.context = context;
        self
    }
}

/// Writes one JSON object per line.
pub fn write_json_lines<T: Scalar, W: Write>(reports: &[BoundReport<T>], mut out: W) -> std::io::Result<()> {
    for r in reports {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Serde adapter writing non-finite floats as "inf", "-inf" or "nan".
pub mod extended_float {
    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::scalar::Scalar;

    pub fn serialize<T: Scalar, S: Serializer>(x: &T, s: S) -> Result<S::Ok, S::Error> {
        let v = x.as_f64();
        if v.is_finite() {
            s.serialize_f64(v)
        } else if v.is_nan() {
            s.serialize_str("nan")
        } else if v > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, T: Scalar, D: Deserializer<'de>>(d: D) -> Result<T, D::Error> {
        let v = match Repr::deserialize(d)? {
            Repr::Num(v) => v,
            Repr::Text(t) => match t.as_str() {
                "inf" => f64::INFINITY,
                "-inf" => f64::NEG_INFINITY,
                "nan" => f64::NAN,
                other => return Err(D::Error::custom(format!("not a number: {other}"))),
            },
        };
        T::from_f64(v).ok_or_else(|| D::Error::custom("value not representable"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn holds_iff_slack_above_tolerance() {
        let ok = BoundReport::new(BoundId::Lemma1, 1.0, 1.0 - 5e-10, BoundContext::default());
        assert!(ok.holds);
        let bad = BoundReport::new(BoundId::Lemma1, 1.0, 1.0 - 2e-9, BoundContext::default());
        assert!(!bad.holds);
    }

    #[test]
    fn json_lines_round_trip_with_infinite_rhs() {
        let reports = vec![
            BoundReport::new(BoundId::Theorem1Kl, 0.25, f64::INFINITY, BoundContext::with_gamma(0.9)),
            BoundReport::new(BoundId::Pinsker, 0.1, 0.2, BoundContext::default()),
        ];
        let mut buf = Vec::new();
        write_json_lines(&reports, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().next().unwrap().contains("\"rhs\":\"inf\""));
        let back: Vec<BoundReport<f64>> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(back, reports);
    }

    #[test]
    fn bound_ids_serialize_to_their_names() {
        for id in BoundId::ALL {
            assert_eq!(serde_json::to_string(&id).unwrap(), format!("\"{}\"", id.as_str()));
        }
    }
}
