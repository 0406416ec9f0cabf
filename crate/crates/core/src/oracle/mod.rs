//! Brute-force verification of the bounds.
//!
//! The search in [`search`] is written against the metastability definition
//! alone and shares no code with [`crate::bounds`]. The `verify_*` functions
//! certify each theorem's hypotheses on a concrete instance, compute the
//! bound, generate the run far enough to decide every `N` up to it, and
//! compare.

pub mod bullets;
pub mod lemmas;
pub mod search;

use serde::{Deserialize, Serialize};

use crate::bounds::{fmcp_bound, phi_i, phi_km, psi_km, BoundLimits, KmBoundTrace, PsiBoundTrace};
use crate::error::{Error, Result};
use crate::functions::{ModulusVerdict, PwlFunction};
use crate::iterations::{IterationRun, Scheme};
use crate::numerics::{Difference, Nat, PosRational, Rational, UnitRational};
use crate::schedules::{check_rate, CounterFunc, Modulus, ParamSchedule, Rate, RateVerdict};

pub use bullets::BulletReport;
pub use lemmas::{check_lemma_dl1, check_lemma_dl3, Dl1Summary, Dl1Verdict, Dl3Report};
pub use search::{least_metastable, least_metastable_pairwise, needed_horizon, witnesses_valid, MetaSearch, Witness};

/// Default longest run the oracle will generate.
pub const DEFAULT_HORIZON: u64 = 20_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem {
    /// Monotone sequences.
    Fmcp,
    Km,
    Ishikawa,
    Lipschitz,
}

impl std::fmt::Display for Theorem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Theorem::Fmcp => "fmcp",
            Theorem::Km => "km",
            Theorem::Ishikawa => "ishikawa",
            Theorem::Lipschitz => "lipschitz",
        })
    }
}

/// The sequence under test and the metastability parameters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Problem {
    pub scheme: Scheme,
    pub f: PwlFunction,
    pub t: ParamSchedule,
    pub s: Option<ParamSchedule>,
    pub x0: UnitRational,
    pub eps: PosRational,
    pub g: CounterFunc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCaps {
    /// Longest run generated, in points.
    pub horizon: u64,
    /// Largest `N` examined; defaults to the bound.
    pub search: Option<u64>,
    pub limits: BoundLimits,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps {
            horizon: DEFAULT_HORIZON,
            search: None,
            limits: BoundLimits::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum CheckStatus {
    /// Holds for the whole infinite sequence, by an exact argument.
    Proved,
    /// Holds on the first `horizon` terms.
    Certified { horizon: u64 },
    Failed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    #[serde(flatten)]
    pub status: CheckStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl HypothesisCheck {
    fn new(name: &str, status: CheckStatus, detail: Option<String>) -> Self {
        HypothesisCheck {
            name: name.into(),
            status,
            detail,
        }
    }

    pub fn failed(&self) -> bool {
        self.status == CheckStatus::Failed
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum Outcome {
    /// The least metastable point is at most the bound.
    Sound,
    /// A theorem-level fact failed on a certified instance.
    Unsound { reason: String },
    /// A hypothesis did not certify; no evidence either way.
    Skipped { hypothesis: String },
    /// The bound was (or was not) computed but could not be checked.
    BoundOnly { reason: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum TraceSummary {
    Fmcp {
        iterations: u64,
    },
    Km {
        m: Nat,
        c: PosRational,
        steps: u64,
        u0: Nat,
        beta_queries: usize,
        gamma_queries: usize,
    },
    Psi {
        log_term: i64,
        t: i64,
        b: Nat,
        p_t: Nat,
        eps_at_least_one: bool,
    },
}

impl TraceSummary {
    fn km(tr: &KmBoundTrace) -> Self {
        TraceSummary::Km {
            m: tr.m.clone(),
            c: tr.c.clone(),
            steps: tr.u.len() as u64 - 1,
            u0: tr.u[0].clone(),
            beta_queries: tr.beta_queries.len(),
            gamma_queries: tr.gamma_queries.len(),
        }
    }

    fn psi(tr: &PsiBoundTrace) -> Self {
        TraceSummary::Psi {
            log_term: tr.log_term,
            t: tr.t,
            b: tr.b.clone(),
            p_t: tr.p[tr.t.max(0) as usize].clone(),
            eps_at_least_one: tr.eps_at_least_one,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub dl1: Dl1Summary,
    pub dl3: Dl3Report,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.dl1.violations.is_empty() && self.dl3.passed()
    }
}

/// Everything one verification learned.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremCheck {
    pub theorem: Theorem,
    #[serde(flatten)]
    pub outcome: Outcome,
    pub bound: Option<Nat>,
    pub trace: Option<TraceSummary>,
    pub hypotheses: Vec<HypothesisCheck>,
    pub bullets: Option<BulletReport>,
    /// Number of points generated.
    pub run_length: Option<u64>,
    pub search: Option<MetaSearch>,
    /// Pairwise cross-check of the search; set when requested.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairwise_agrees: Option<bool>,
    pub witnesses_valid: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemmas: Option<LemmaReport>,
    /// The generated run itself, kept only on request.
    #[serde(skip)]
    pub run: Option<IterationRun>,
}

impl TheoremCheck {
    fn new(theorem: Theorem) -> Self {
        TheoremCheck {
            theorem,
            outcome: Outcome::BoundOnly {
                reason: "not evaluated".into(),
            },
            bound: None,
            trace: None,
            hypotheses: Vec::new(),
            bullets: None,
            run_length: None,
            search: None,
            pairwise_agrees: None,
            witnesses_valid: None,
            lemmas: None,
            run: None,
        }
    }

    pub fn least_n(&self) -> Option<u64> {
        self.search.as_ref().and_then(|s| s.least_n)
    }

    fn hypothesis(&mut self, name: &str, status: CheckStatus, detail: Option<String>) -> bool {
        let ok = status != CheckStatus::Failed;
        self.hypotheses.push(HypothesisCheck::new(name, status, detail));
        if !ok && !matches!(self.outcome, Outcome::Skipped { .. }) {
            self.outcome = Outcome::Skipped {
                hypothesis: name.into(),
            };
        }
        ok
    }

    fn skipped(&self) -> bool {
        matches!(self.outcome, Outcome::Skipped { .. })
    }
}

/// Extra work the caller may ask for.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Extras {
    /// Re-run the search with the pairwise checker.
    pub pairwise: bool,
    /// Keep the generated run in [`TheoremCheck::run`].
    pub keep_run: bool,
}

struct Search<'a> {
    problem: &'a Problem,
    caps: &'a OracleCaps,
    extras: Extras,
}

impl Search<'_> {
    fn start_run(&self) -> Result<IterationRun> {
        let p = self.problem;
        IterationRun::start(p.scheme, p.f.clone(), p.t.clone(), p.s.clone(), p.x0.clone())
    }

    /// Generates enough points to decide every `N ≤ cap`, if the horizon allows.
    fn run_for(&self, cap: &Nat, check: &mut TheoremCheck) -> Result<Option<IterationRun>> {
        let needed = match needed_horizon(cap, &self.problem.g) {
            Ok(n) => n,
            Err(e) if e.is_cap_exceeded() => {
                if !check.skipped() {
                    check.outcome = Outcome::BoundOnly { reason: e.to_string() };
                }
                return Ok(None);
            }
            Err(e) => return Err(e),
        };
        match needed.to_u64().filter(|n| *n <= self.caps.horizon) {
            Some(len) => {
                let mut run = self.start_run()?;
                run.extend_to(len as usize);
                check.run_length = Some(len);
                Ok(Some(run))
            }
            None => {
                if !check.skipped() {
                    check.outcome = Outcome::BoundOnly {
                        reason: format!("needs {needed} points, horizon is {}", self.caps.horizon),
                    };
                }
                Ok(None)
            }
        }
    }

    fn cap_for(&self, bound: &Nat) -> Nat {
        match self.caps.search {
            Some(s) if Nat::from(s) < *bound => Nat::from(s),
            _ => bound.clone(),
        }
    }

    /// Searches up to `cap` and records the search on `check`.
    fn search(&self, run: &IterationRun, cap: u64, check: &mut TheoremCheck) -> Result<()> {
        let p = self.problem;
        let s = least_metastable(&run.xs, &p.eps, &p.g, cap)?;
        check.witnesses_valid = Some(witnesses_valid(&run.xs, &p.eps, &p.g, &s));
        if self.extras.pairwise {
            let naive = least_metastable_pairwise(&run.xs, &p.eps, &p.g, cap)?;
            check.pairwise_agrees = Some(naive == s.least_n);
        }
        check.search = Some(s);
        Ok(())
    }

    /// Compares the search against the bound: the final step of every theorem.
    fn judge(&self, run: IterationRun, bound: &Nat, check: &mut TheoremCheck) -> Result<()> {
        let cap = self.cap_for(bound);
        let cap = cap.to_u64().expect("search cap below the horizon");
        self.search(&run, cap, check)?;
        let s = check.search.as_ref().expect("search recorded");
        check.outcome = match s.least_n {
            Some(_) if check.witnesses_valid == Some(false) => Outcome::Unsound {
                reason: "search witnesses do not check out".into(),
            },
            Some(n) if Nat::from(n) <= *bound => Outcome::Sound,
            Some(n) => Outcome::Unsound {
                reason: format!("least metastable point {n} exceeds the bound {bound}"),
            },
            None if Nat::from(cap) >= *bound => Outcome::Unsound {
                reason: format!("no metastable point up to the bound {bound}"),
            },
            None => Outcome::BoundOnly {
                reason: format!("no metastable point up to the search cap {cap}"),
            },
        };
        if let Some(b) = &check.bullets {
            if !b.passed() {
                check.outcome = Outcome::Unsound {
                    reason: format!("trace fact violated: {}", b.violations[0]),
                };
            }
        }
        if self.extras.keep_run {
            check.run = Some(run);
        }
        Ok(())
    }

    /// After a skip, still searches up to an explicit search cap if one was
    /// given, so the report can show what the sequence actually does.
    fn probe(&self, check: &mut TheoremCheck) -> Result<()> {
        let Some(cap) = self.caps.search else {
            return Ok(());
        };
        if let Some(run) = self.run_for(&Nat::from(cap), check)? {
            self.search(&run, cap, check)?;
            if self.extras.keep_run {
                check.run = Some(run);
            }
        }
        Ok(())
    }
}

fn bound_failed(check: &mut TheoremCheck, err: Error) -> Result<()> {
    if err.is_cap_exceeded() {
        check.outcome = Outcome::BoundOnly {
            reason: err.to_string(),
        };
        Ok(())
    } else {
        Err(err)
    }
}

fn modulus_hypothesis(check: &mut TheoremCheck, f: &PwlFunction, omega: &Modulus, eps: &PosRational) -> bool {
    match f.check_modulus(omega, std::slice::from_ref(eps)) {
        ModulusVerdict::Pass => check.hypothesis("modulus", CheckStatus::Proved, None),
        ModulusVerdict::Fail { delta, witness } => {
            let detail = match witness {
                Some((x, y)) => format!("ω·L > δ at δ = {delta}; counterexample pair ({x}, {y})"),
                None => format!("ω·L > δ at δ = {delta}"),
            };
            check.hypothesis("modulus", CheckStatus::Failed, Some(detail))
        }
    }
}

fn rate_hypothesis(
    check: &mut TheoremCheck,
    name: &str,
    seq: &[Difference],
    rate: &Rate,
    deltas: Vec<PosRational>,
) -> Result<bool> {
    let horizon = seq.len() as u64;
    Ok(match check_rate(seq, rate, &deltas, horizon)? {
        RateVerdict::CertifiedUpTo { horizon } => {
            check.hypothesis(name, CheckStatus::Certified { horizon }, None)
        }
        RateVerdict::Fail { delta, n } => check.hypothesis(
            name,
            CheckStatus::Failed,
            Some(format!("|term {n}| > δ = {delta}")),
        ),
    })
}

/// `x_{n+1}` between `x_n` and `f(x_n)`; for Ishikawa also `y_n` between
/// `x_n` and `f(x_n)` and `x_{n+1}` between `x_n` and `f(y_n)`.
fn betweenness_hypothesis(check: &mut TheoremCheck, run: &IterationRun) -> bool {
    let f = &run.f;
    let image = |x: &UnitRational| f.segment_at(x.value()).apply(x.value());
    let bad = (0..run.len() - 1).find(|&n| {
        let x = run.xs[n].value();
        let next = run.xs[n + 1].value();
        let fx = image(&run.xs[n]);
        match run.scheme {
            Scheme::Ishikawa => {
                let y = run.ys[n].value();
                !lemmas::between(y, x, &fx) || !lemmas::between(next, x, &image(&run.ys[n]))
            }
            _ => !lemmas::between(next, x, &fx),
        }
    });
    let horizon = run.len() as u64;
    match bad {
        None => check.hypothesis("betweenness", CheckStatus::Certified { horizon }, None),
        Some(n) => check.hypothesis("betweenness", CheckStatus::Failed, Some(format!("fails at n = {n}"))),
    }
}

fn km_schemes(problem: &Problem) -> Result<()> {
    match problem.scheme {
        Scheme::Km | Scheme::Picard => Ok(()),
        Scheme::Ishikawa => Err(Error::Domain("this theorem concerns Krasnoselski–Mann runs".into())),
    }
}

/// Bound for uniformly continuous `f` with `x_{n+1}` between `x_n` and `f(x_n)`.
pub fn verify_km_theorem(
    problem: &Problem,
    omega: &Modulus,
    beta: &Rate,
    caps: &OracleCaps,
    extras: Extras,
) -> Result<TheoremCheck> {
    km_schemes(problem)?;
    let mut check = TheoremCheck::new(Theorem::Km);
    let ctx = Search { problem, caps, extras };
    if !modulus_hypothesis(&mut check, &problem.f, omega, &problem.eps) {
        ctx.probe(&mut check)?;
        return Ok(check);
    }
    let trace = match phi_km(&problem.eps, &problem.g, omega, beta, &caps.limits) {
        Ok(t) => t,
        Err(e) => {
            bound_failed(&mut check, e)?;
            return Ok(check);
        }
    };
    check.bound = Some(trace.phi.clone());
    check.trace = Some(TraceSummary::km(&trace));
    check.bullets = Some(bullets::km_bullets(&trace, &problem.eps, &problem.g, omega, beta)?);
    let Some(run) = ctx.run_for(&ctx.cap_for(&trace.phi), &mut check)? else {
        return Ok(check);
    };
    let diffs: Vec<Difference> = run.successive_differences().collect();
    let deltas = trace.beta_queries.iter().map(|q| q.delta.clone()).collect();
    let ok = rate_hypothesis(&mut check, "beta", &diffs, beta, deltas)? && betweenness_hypothesis(&mut check, &run);
    if !ok {
        ctx.search(&run, ctx.cap_for(&trace.phi).to_u64().expect("fits"), &mut check)?;
        return Ok(check);
    }
    ctx.judge(run, &trace.phi, &mut check)?;
    Ok(check)
}

/// Bound for the Ishikawa scheme, with `γ` a rate for `x_n − y_n → 0`.
pub fn verify_ishikawa_theorem(
    problem: &Problem,
    omega: &Modulus,
    beta: &Rate,
    gamma: &Rate,
    caps: &OracleCaps,
    extras: Extras,
) -> Result<TheoremCheck> {
    if problem.scheme != Scheme::Ishikawa {
        return Err(Error::Domain("this theorem concerns Ishikawa runs".into()));
    }
    let mut check = TheoremCheck::new(Theorem::Ishikawa);
    let ctx = Search { problem, caps, extras };
    if !modulus_hypothesis(&mut check, &problem.f, omega, &problem.eps) {
        ctx.probe(&mut check)?;
        return Ok(check);
    }
    let trace = match phi_i(&problem.eps, &problem.g, omega, beta, gamma, &caps.limits) {
        Ok(t) => t,
        Err(e) => {
            bound_failed(&mut check, e)?;
            return Ok(check);
        }
    };
    check.bound = Some(trace.phi.clone());
    check.trace = Some(TraceSummary::km(&trace));
    check.bullets = Some(bullets::ishikawa_bullets(&trace, &problem.eps, &problem.g, omega, beta, gamma)?);
    let Some(run) = ctx.run_for(&ctx.cap_for(&trace.phi), &mut check)? else {
        return Ok(check);
    };
    let diffs: Vec<Difference> = run.successive_differences().collect();
    let gaps: Vec<Difference> = run.stage_gaps().collect();
    let beta_deltas = trace.beta_queries.iter().map(|q| q.delta.clone()).collect();
    let gamma_deltas = trace.gamma_queries.iter().map(|q| q.delta.clone()).collect();
    let ok = rate_hypothesis(&mut check, "beta", &diffs, beta, beta_deltas)?
        && rate_hypothesis(&mut check, "gamma", &gaps, gamma, gamma_deltas)?
        && betweenness_hypothesis(&mut check, &run);
    if !ok {
        ctx.search(&run, ctx.cap_for(&trace.phi).to_u64().expect("fits"), &mut check)?;
        return Ok(check);
    }
    ctx.judge(run, &trace.phi, &mut check)?;
    Ok(check)
}

/// Bound `g̃^(⌈1/ε⌉)(0)` for monotone sequences, applied to a KM run.
pub fn verify_fmcp(problem: &Problem, caps: &OracleCaps, extras: Extras) -> Result<TheoremCheck> {
    let mut check = TheoremCheck::new(Theorem::Fmcp);
    let ctx = Search { problem, caps, extras };
    let bound = match fmcp_bound(&problem.eps, &problem.g, &caps.limits) {
        Ok(b) => b,
        Err(e) => {
            bound_failed(&mut check, e)?;
            return Ok(check);
        }
    };
    check.bound = Some(bound.clone());
    check.trace = Some(TraceSummary::Fmcp {
        iterations: problem.eps.recip().ceil().to_u64().unwrap_or(u64::MAX),
    });
    let Some(run) = ctx.run_for(&ctx.cap_for(&bound), &mut check)? else {
        return Ok(check);
    };
    let monotone_run = lemmas::is_monotone_run(&run.xs);
    // A nondecreasing f keeps each KM step on the side it started.
    let status = if !monotone_run {
        CheckStatus::Failed
    } else if problem.f.is_nondecreasing() && problem.scheme != Scheme::Ishikawa {
        CheckStatus::Proved
    } else {
        CheckStatus::Certified {
            horizon: run.len() as u64,
        }
    };
    if !check.hypothesis("monotone", status, None) {
        ctx.search(&run, ctx.cap_for(&bound).to_u64().expect("fits"), &mut check)?;
        return Ok(check);
    }
    ctx.judge(run, &bound, &mut check)?;
    Ok(check)
}

/// Bound for `L`-Lipschitz `f` with `t_n ≤ (2−δ)/(L+1)`; also replays the
/// two lemmas behind it on the generated run.
pub fn verify_lipschitz_theorem(
    problem: &Problem,
    delta: &PosRational,
    caps: &OracleCaps,
    extras: Extras,
) -> Result<TheoremCheck> {
    km_schemes(problem)?;
    let mut check = TheoremCheck::new(Theorem::Lipschitz);
    let ctx = Search { problem, caps, extras };
    if delta.value() >= &Rational::one() {
        check.hypothesis("delta", CheckStatus::Failed, Some(format!("δ = {delta} is not below 1")));
        ctx.probe(&mut check)?;
        return Ok(check);
    }
    let l = problem.f.lipschitz_constant();
    let admissible = lemmas::step_bound(delta, &l);
    let t = match problem.scheme {
        Scheme::Picard => ParamSchedule::constant(UnitRational::one()),
        _ => problem.t.clone(),
    };
    let sup = t.sup();
    let detail = format!("sup t = {sup}, (2−δ)/(L+1) = {admissible} with L = {l}");
    let status = if sup.value() <= &admissible {
        CheckStatus::Proved
    } else {
        CheckStatus::Failed
    };
    if !check.hypothesis("step-size", status, Some(detail)) {
        ctx.probe(&mut check)?;
        return Ok(check);
    }
    let trace = match psi_km(&problem.eps, &problem.g, delta, &caps.limits) {
        Ok(t) => t,
        Err(e) => {
            bound_failed(&mut check, e)?;
            return Ok(check);
        }
    };
    check.bound = Some(trace.psi.clone());
    check.trace = Some(TraceSummary::psi(&trace));
    check.bullets = Some(bullets::psi_bullets(&trace, &problem.eps, &problem.g, delta)?);
    let Some(run) = ctx.run_for(&ctx.cap_for(&trace.psi), &mut check)? else {
        return Ok(check);
    };
    let lemmas = LemmaReport {
        dl1: lemmas::check_dl1_along_run(&run, delta),
        dl3: check_lemma_dl3(&run, delta)?,
    };
    let lemmas_ok = lemmas.passed();
    let first_violation = lemmas
        .dl3
        .violations
        .first()
        .cloned()
        .or_else(|| lemmas.dl1.violations.first().map(|n| format!("contraction step fails at n = {n}")));
    check.lemmas = Some(lemmas);
    ctx.judge(run, &trace.psi, &mut check)?;
    if !lemmas_ok {
        check.outcome = Outcome::Unsound {
            reason: format!("lemma violated: {}", first_violation.unwrap_or_default()),
        };
    }
    Ok(check)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(n: i64, d: i64) -> UnitRational {
        UnitRational::frac(n, d)
    }

    fn problem(f: PwlFunction, scheme: Scheme, t: ParamSchedule, x0: UnitRational, g: CounterFunc) -> Problem {
        Problem {
            scheme,
            f,
            t,
            s: None,
            x0,
            eps: PosRational::frac(1, 2),
            g,
        }
    }

    #[test]
    fn identity_run_is_sound_everywhere() {
        let p = problem(PwlFunction::identity(), Scheme::Km, ParamSchedule::Harmonic, u(1, 3), CounterFunc::constant(3));
        let c = verify_km_theorem(&p, &Modulus::identity(), &Rate::Zero, &OracleCaps::default(), Extras::default())
            .unwrap();
        assert_eq!(c.outcome, Outcome::Sound);
        assert_eq!(c.least_n(), Some(0));
        assert!(c.bullets.as_ref().unwrap().passed());
    }

    #[test]
    fn reflection_harmonic_km_is_sound() {
        let p = problem(PwlFunction::reflection(), Scheme::Km, ParamSchedule::Harmonic, u(0, 1), CounterFunc::constant(1));
        let extras = Extras { pairwise: true, keep_run: false };
        let c = verify_km_theorem(&p, &Modulus::identity(), &Rate::Harmonic, &OracleCaps::default(), extras).unwrap();
        assert_eq!(c.outcome, Outcome::Sound, "{c:?}");
        assert_eq!(c.bound, Some(Nat::from(718u64)));
        assert_eq!(c.pairwise_agrees, Some(true));
        assert_eq!(c.witnesses_valid, Some(true));
        assert!(c.hypotheses.iter().all(|h| !h.failed()));
    }

    #[test]
    fn tent_with_identity_modulus_is_skipped() {
        let p = problem(PwlFunction::tent(), Scheme::Km, ParamSchedule::Harmonic, u(0, 1), CounterFunc::constant(1));
        let c = verify_km_theorem(&p, &Modulus::identity(), &Rate::Harmonic, &OracleCaps::default(), Extras::default())
            .unwrap();
        assert_eq!(c.outcome, Outcome::Skipped { hypothesis: "modulus".into() });
        assert_eq!(c.bound, None);
    }

    #[test]
    fn tent_lipschitz_is_sound_and_lemmas_hold() {
        let p = problem(PwlFunction::tent(), Scheme::Km, ParamSchedule::constant(u(1, 4)), u(1, 8), CounterFunc::constant(1));
        let c = verify_lipschitz_theorem(&p, &PosRational::frac(1, 2), &OracleCaps::default(), Extras::default()).unwrap();
        assert_eq!(c.outcome, Outcome::Sound, "{c:?}");
        assert_eq!(c.bound, Some(Nat::from(54u64)));
        assert!(c.lemmas.as_ref().unwrap().passed());
        assert!(c.bullets.as_ref().unwrap().passed());
    }

    #[test]
    fn picard_oscillator_is_skipped_and_never_settles() {
        let p = problem(PwlFunction::reflection(), Scheme::Picard, ParamSchedule::Harmonic, u(0, 1), CounterFunc::constant(1));
        let caps = OracleCaps { search: Some(500), ..Default::default() };
        let c = verify_lipschitz_theorem(&p, &PosRational::frac(1, 2), &caps, Extras::default()).unwrap();
        assert_eq!(c.outcome, Outcome::Skipped { hypothesis: "step-size".into() });
        let s = c.search.unwrap();
        assert_eq!(s.least_n, None);
        assert_eq!(s.search_cap, 500);
        assert_eq!(c.witnesses_valid, Some(true));
    }

    #[test]
    fn fmcp_on_monotone_map() {
        let f = PwlFunction::from_quads(&[[0, 1, 1, 2], [1, 1, 1, 1]]).unwrap();
        let p = problem(f, Scheme::Km, ParamSchedule::constant(u(1, 3)), u(0, 1), CounterFunc::affine(1, 1));
        let c = verify_fmcp(&p, &OracleCaps::default(), Extras::default()).unwrap();
        assert_eq!(c.outcome, Outcome::Sound);
        assert_eq!(c.bound, Some(Nat::from(3u64)));
        assert_eq!(c.hypotheses[0].status, CheckStatus::Proved);
    }

    #[test]
    fn horizon_cap_degrades_to_bound_only() {
        let p = problem(PwlFunction::reflection(), Scheme::Km, ParamSchedule::Harmonic, u(0, 1), CounterFunc::constant(1));
        let caps = OracleCaps { horizon: 100, ..Default::default() };
        let c = verify_km_theorem(&p, &Modulus::identity(), &Rate::Harmonic, &caps, Extras::default()).unwrap();
        assert!(matches!(c.outcome, Outcome::BoundOnly { .. }));
        assert_eq!(c.bound, Some(Nat::from(718u64)));
    }
}
