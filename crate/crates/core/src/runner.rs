//! Runs a scenario file through the oracle.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{fmcp_bound, phi_i, phi_km, psi_km, BoundLimits, KmBoundTrace, PsiBoundTrace};
use crate::error::{Error, Result};
use crate::numerics::Nat;
use crate::oracle::{
    verify_fmcp, verify_ishikawa_theorem, verify_km_theorem, verify_lipschitz_theorem, Extras, OracleCaps,
    TheoremCheck, Theorem,
};
use crate::report::{Report, ReportEntry};
use crate::scenario::{Caps, Scenario, ScenarioFile};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunOptions {
    /// Worker threads; 1 runs everything on the calling thread.
    pub jobs: usize,
    /// Used where a scenario sets no cap of its own.
    pub defaults: OracleCaps,
    /// Take precedence over both the defaults and the scenario's caps.
    pub overrides: Caps,
    pub extras: Extras,
    /// Record wall time per scenario (makes reports non-reproducible).
    pub timings: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            jobs: 1,
            defaults: OracleCaps::default(),
            overrides: Caps::default(),
            extras: Extras::default(),
            timings: false,
        }
    }
}

impl RunOptions {
    pub fn caps_for(&self, scenario: &Scenario) -> OracleCaps {
        self.overrides.resolve(&scenario.caps.resolve(&self.defaults))
    }
}

fn missing(field: &str) -> Error {
    Error::Domain(format!("scenario lacks `{field}`; validate it first"))
}

/// Verifies one scenario against its theorem.
pub fn verify_scenario(scenario: &Scenario, caps: &OracleCaps, extras: Extras) -> Result<TheoremCheck> {
    let problem = scenario.problem();
    match scenario.theorem {
        Theorem::Fmcp => verify_fmcp(&problem, caps, extras),
        Theorem::Km => verify_km_theorem(
            &problem,
            scenario.omega.as_ref().ok_or_else(|| missing("omega"))?,
            scenario.beta.as_ref().ok_or_else(|| missing("beta"))?,
            caps,
            extras,
        ),
        Theorem::Ishikawa => verify_ishikawa_theorem(
            &problem,
            scenario.omega.as_ref().ok_or_else(|| missing("omega"))?,
            scenario.beta.as_ref().ok_or_else(|| missing("beta"))?,
            scenario.gamma.as_ref().ok_or_else(|| missing("gamma"))?,
            caps,
            extras,
        ),
        Theorem::Lipschitz => verify_lipschitz_theorem(
            &problem,
            scenario.delta.as_ref().ok_or_else(|| missing("delta"))?,
            caps,
            extras,
        ),
    }
}

/// The full recursion behind one bound.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum BoundTrace {
    Fmcp { iterations: Nat },
    Km(KmBoundTrace),
    Psi(PsiBoundTrace),
}

/// A scenario's bound without running the oracle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub id: String,
    pub theorem: Theorem,
    pub bound: Option<Nat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace: Option<BoundTrace>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn compute_bound(scenario: &Scenario, limits: &BoundLimits) -> Result<(Nat, BoundTrace)> {
    let (eps, g) = (&scenario.epsilon, &scenario.g);
    match scenario.theorem {
        Theorem::Fmcp => {
            let b = fmcp_bound(eps, g, limits)?;
            Ok((b, BoundTrace::Fmcp { iterations: eps.recip().ceil() }))
        }
        Theorem::Km => {
            let omega = scenario.omega.as_ref().ok_or_else(|| missing("omega"))?;
            let beta = scenario.beta.as_ref().ok_or_else(|| missing("beta"))?;
            let tr = phi_km(eps, g, omega, beta, limits)?;
            Ok((tr.phi.clone(), BoundTrace::Km(tr)))
        }
        Theorem::Ishikawa => {
            let omega = scenario.omega.as_ref().ok_or_else(|| missing("omega"))?;
            let beta = scenario.beta.as_ref().ok_or_else(|| missing("beta"))?;
            let gamma = scenario.gamma.as_ref().ok_or_else(|| missing("gamma"))?;
            let tr = phi_i(eps, g, omega, beta, gamma, limits)?;
            Ok((tr.phi.clone(), BoundTrace::Km(tr)))
        }
        Theorem::Lipschitz => {
            let delta = scenario.delta.as_ref().ok_or_else(|| missing("delta"))?;
            let tr = psi_km(eps, g, delta, limits)?;
            Ok((tr.psi.clone(), BoundTrace::Psi(tr)))
        }
    }
}

/// Bounds for every scenario, in file order; errors are recorded per entry.
pub fn bound_scenarios(file: &ScenarioFile, options: &RunOptions) -> Result<Vec<BoundEntry>> {
    file.validate()?;
    Ok(file
        .scenarios
        .iter()
        .map(|s| {
            let limits = options.caps_for(s).limits;
            let (bound, trace, error) = match compute_bound(s, &limits) {
                Ok((b, t)) => (Some(b), Some(t), None),
                Err(e) => (None, None, Some(e.to_string())),
            };
            BoundEntry {
                id: s.id.clone(),
                theorem: s.theorem,
                bound,
                trace,
                error,
            }
        })
        .collect())
}

fn run_one(scenario: &Scenario, options: &RunOptions) -> ReportEntry {
    let start = Instant::now();
    let caps = options.caps_for(scenario);
    let extras = Extras {
        keep_run: false,
        ..options.extras
    };
    let (id, th, eps) = (scenario.id.clone(), scenario.theorem, scenario.epsilon.clone());
    let mut entry = match verify_scenario(scenario, &caps, extras) {
        Ok(check) => ReportEntry::from_check(id, th, eps, check),
        Err(e) => ReportEntry::from_error(id, th, eps, e.to_string()),
    };
    if options.timings {
        entry.wall_ms = Some(start.elapsed().as_millis() as u64);
    }
    entry
}

/// Verifies every scenario; one scenario's failure never aborts the rest.
/// The report is sorted by id whatever the thread count.
pub fn run_scenarios(file: &ScenarioFile, options: &RunOptions) -> Result<Report> {
    file.validate()?;
    let entries: Vec<ReportEntry> = if options.jobs <= 1 {
        file.scenarios.iter().map(|s| run_one(s, options)).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(options.jobs)
            .build()
            .map_err(|e| Error::Domain(format!("thread pool: {e}")))?;
        pool.install(|| file.scenarios.par_iter().map(|s| run_one(s, options)).collect())
    };
    Ok(Report::new(entries))
}
