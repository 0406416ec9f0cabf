//! Scenario files: the JSON description of a batch of verification jobs.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::bounds::BoundLimits;
use crate::error::{Error, Result};
use crate::functions::PwlFunction;
use crate::iterations::Scheme;
use crate::numerics::{PosRational, Rational, UnitRational};
use crate::oracle::{OracleCaps, Problem, Theorem};
use crate::schedules::{CounterFunc, Modulus, ParamSchedule, Rate};

pub const FORMAT_VERSION: u32 = 1;

/// Per-scenario resource limits; anything unset falls back to the run's
/// defaults.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Caps {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nat_bits: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
}

impl Caps {
    pub fn is_empty(&self) -> bool {
        *self == Caps::default()
    }

    /// `self` where set, `base` otherwise.
    pub fn resolve(&self, base: &OracleCaps) -> OracleCaps {
        OracleCaps {
            horizon: self.horizon.unwrap_or(base.horizon),
            search: self.search.or(base.search),
            limits: BoundLimits {
                cap_bits: self.nat_bits.unwrap_or(base.limits.cap_bits),
                max_steps: self.steps.unwrap_or(base.limits.max_steps),
                log_cap: base.limits.log_cap,
            },
        }
    }
}

/// One verification job.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub id: String,
    pub theorem: Theorem,
    /// Defaults to `ishikawa` for the Ishikawa theorem and `km` otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<Scheme>,
    pub f: PwlFunction,
    /// Omitted for Picard runs, where `t ≡ 1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<ParamSchedule>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<ParamSchedule>,
    pub x0: UnitRational,
    pub epsilon: PosRational,
    pub g: CounterFunc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Modulus>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Rate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Rate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<PosRational>,
    #[serde(default, skip_serializing_if = "Caps::is_empty")]
    pub caps: Caps,
}

impl Scenario {
    pub fn scheme(&self) -> Scheme {
        self.scheme.unwrap_or(match self.theorem {
            Theorem::Ishikawa => Scheme::Ishikawa,
            _ => Scheme::Km,
        })
    }

    fn err(&self, field: &str, message: impl Into<String>) -> Error {
        Error::Scenario {
            id: self.id.clone(),
            field: field.into(),
            message: message.into(),
        }
    }

    fn require(&self, field: &str, present: bool) -> Result<()> {
        if present {
            Ok(())
        } else {
            Err(self.err(field, format!("required for theorem {}", self.theorem)))
        }
    }

    fn forbid(&self, field: &str, present: bool) -> Result<()> {
        if present {
            Err(self.err(field, format!("not used by theorem {}", self.theorem)))
        } else {
            Ok(())
        }
    }

    /// Checks that exactly the fields the theorem uses are present and that
    /// every value is in range.
    pub fn validate(&self) -> Result<()> {
        if self.id.is_empty() {
            return Err(self.err("id", "must be non-empty"));
        }
        let scheme = self.scheme();
        match (self.theorem, scheme) {
            (Theorem::Ishikawa, Scheme::Ishikawa) => {}
            (Theorem::Ishikawa, _) | (_, Scheme::Ishikawa) => {
                return Err(self.err("scheme", format!("{scheme} runs cannot be checked against theorem {}", self.theorem)));
            }
            _ => {}
        }
        if scheme == Scheme::Picard {
            if self.t.is_some() {
                return Err(self.err("t", "picard runs use t ≡ 1; omit t"));
            }
        } else {
            self.require("t", self.t.is_some())?;
        }
        let ish = self.theorem == Theorem::Ishikawa;
        let uc = matches!(self.theorem, Theorem::Km | Theorem::Ishikawa);
        self.require("s", !ish || self.s.is_some())?;
        self.forbid("s", !ish && self.s.is_some())?;
        for (field, present) in [("omega", self.omega.is_some()), ("beta", self.beta.is_some())] {
            self.require(field, !uc || present)?;
            self.forbid(field, !uc && present)?;
        }
        self.require("gamma", !ish || self.gamma.is_some())?;
        self.forbid("gamma", !ish && self.gamma.is_some())?;
        let lip = self.theorem == Theorem::Lipschitz;
        self.require("delta", !lip || self.delta.is_some())?;
        self.forbid("delta", !lip && self.delta.is_some())?;
        if let Some(d) = &self.delta {
            if d.value() >= &Rational::one() {
                return Err(self.err("delta", "must lie in (0,1)"));
            }
        }
        for (field, rate) in [("beta", &self.beta), ("gamma", &self.gamma)] {
            if let Some(r) = rate {
                r.validate().map_err(|e| self.err(field, e.to_string()))?;
            }
        }
        if self.caps.horizon == Some(0) {
            return Err(self.err("caps.horizon", "must be positive"));
        }
        Ok(())
    }

    pub fn problem(&self) -> Problem {
        Problem {
            scheme: self.scheme(),
            f: self.f.clone(),
            t: self
                .t
                .clone()
                .unwrap_or_else(|| ParamSchedule::constant(UnitRational::one())),
            s: self.s.clone(),
            x0: self.x0.clone(),
            eps: self.epsilon.clone(),
            g: self.g.clone(),
        }
    }
}

/// A whole scenario file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub version: u32,
    pub scenarios: Vec<Scenario>,
}

impl ScenarioFile {
    pub fn new(scenarios: Vec<Scenario>) -> Self {
        ScenarioFile {
            version: FORMAT_VERSION,
            scenarios,
        }
    }

    /// Parses and validates. Syntax errors carry serde's line and column;
    /// validation errors name the scenario and field.
    pub fn parse(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text)?;
        file.validate()?;
        Ok(file)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != FORMAT_VERSION {
            return Err(Error::Json(format!(
                "unsupported scenario file version {} (expected {FORMAT_VERSION})",
                self.version
            )));
        }
        let mut seen = HashSet::new();
        for s in &self.scenarios {
            s.validate()?;
            if !seen.insert(s.id.as_str()) {
                return Err(s.err("id", "duplicate id"));
            }
        }
        Ok(())
    }

    /// Canonical text form: pretty-printed with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenario files always serialise");
        s.push('\n');
        s
    }
}
