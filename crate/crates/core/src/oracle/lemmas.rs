//! Exact checks of the two lemmas behind the Lipschitz-case bound, and of the
//! structural facts about generated runs.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::functions::{FixedComponent, PwlFunction};
use crate::iterations::{switching_sequence, IterationRun, Scheme, SwitchIndex};
use crate::numerics::{Difference, PosRational, Rational, UnitRational};

/// `v` lies in the closed interval spanned by `a` and `b`.
pub fn between(v: &Rational, a: &Rational, b: &Rational) -> bool {
    let sa = Difference::between(v, a).signum();
    let sb = Difference::between(v, b).signum();
    sa == Ordering::Equal || sb == Ordering::Equal || sa != sb
}

/// `(2 − δ)/(L + 1)`, the largest admissible step size.
pub fn step_bound(delta: &PosRational, l: &PosRational) -> Rational {
    (Rational::from(2) - delta.value()) / (l.value() + &Rational::one())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum Dl1Verdict {
    Pass { fixed_points: usize },
    Fail { p: UnitRational },
    /// The step size exceeds `(2 − δ)/(L + 1)`.
    NotApplicable,
}

impl Dl1Verdict {
    pub fn passed(&self) -> bool {
        !matches!(self, Dl1Verdict::Fail { .. })
    }
}

/// With `x* = (1−t)x + t·f(x)`, checks `|x* − p| ≤ (1−δ)|x − p|` for every
/// fixed point `p` of `f` between `x` and `x*`.
///
/// On a fixed interval the inequality is linear in `p`, so its endpoints
/// settle it.
pub fn check_lemma_dl1(f: &PwlFunction, x: &UnitRational, t: &UnitRational, delta: &PosRational) -> Dl1Verdict {
    if t.value() > &step_bound(delta, &f.lipschitz_constant()) {
        return Dl1Verdict::NotApplicable;
    }
    let seg = f.segment_at(x.value());
    let tv = t.value();
    let lambda = Rational::one() - tv + &(tv * &seg.slope);
    let star = UnitRational::new_unchecked(x.value().affine(&lambda, &(tv * &seg.intercept)));
    dl1_with_image(f, x, &star, delta)
}

fn dl1_with_image(f: &PwlFunction, x: &UnitRational, star: &UnitRational, delta: &PosRational) -> Dl1Verdict {
    let (lo, hi) = if x <= star { (x, star) } else { (star, x) };
    let factor = Rational::one() - delta.value();
    let mut count = 0;
    for comp in f.fixed_point_set_in(lo, hi) {
        let ends: Vec<&UnitRational> = match &comp {
            FixedComponent::Point(p) => vec![p],
            FixedComponent::Interval(a, b) => vec![a, b],
        };
        for p in ends {
            count += 1;
            let near = Difference::between(star.value(), p.value());
            let far = Difference::between(x.value(), p.value());
            if !near.abs_le_scaled(&factor, &far) {
                return Dl1Verdict::Fail { p: p.clone() };
            }
        }
    }
    Dl1Verdict::Pass { fixed_points: count }
}

/// Lemma checks over a whole run: one step-contraction check per point.
pub fn check_dl1_along_run(run: &IterationRun, delta: &PosRational) -> Dl1Summary {
    let bound = step_bound(delta, &run.f.lipschitz_constant());
    let mut summary = Dl1Summary::default();
    for (n, w) in run.xs.windows(2).enumerate() {
        let t = run.t.eval(n as u64);
        if t.value() > &bound {
            summary.not_applicable += 1;
            continue;
        }
        match dl1_with_image(&run.f, &w[0], &w[1], delta) {
            Dl1Verdict::Pass { fixed_points } => {
                summary.points += 1;
                summary.fixed_points += fixed_points as u64;
            }
            _ => summary.violations.push(n as u64),
        }
    }
    summary
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dl1Summary {
    pub points: u64,
    pub fixed_points: u64,
    pub not_applicable: u64,
    pub violations: Vec<u64>,
}

/// Outcome of replaying the switching-pair lemma on a run.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dl3Report {
    /// Finite switching indices found, including `q_0 = 0`.
    pub switches: usize,
    pub terminal: Option<SwitchIndex>,
    /// Consecutive finite pairs `(q_r, q_{r+1})`, `r ≥ 1`, checked.
    pub pairs_checked: u64,
    /// Pairs whose step sizes fall outside the lemma's hypothesis.
    pub pairs_skipped: u64,
    /// Indices `r` at which `|x_{q_r−1} − x_{q_r}| ≤ (1−δ/2)^(r−1)` was checked.
    pub chain_checked: u64,
    /// Maximal runs between switches checked for monotonicity.
    pub monotone_segments: u64,
    pub violations: Vec<String>,
}

impl Dl3Report {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

fn monotone(xs: &[UnitRational]) -> bool {
    let mut dir = Ordering::Equal;
    for w in xs.windows(2) {
        let s = Difference::between(w[1].value(), w[0].value()).signum();
        if s == Ordering::Equal {
            continue;
        }
        if dir != Ordering::Equal && s != dir {
            return false;
        }
        dir = s;
    }
    true
}

/// Every consecutive pair of the run moves in one direction.
pub fn is_monotone_run(xs: &[UnitRational]) -> bool {
    monotone(xs)
}

/// For every `r ≥ 1` with `q_{r+1}` finite, puts `n1 = q_r − 1`,
/// `n2 = q_{r+1} − 1` and checks
/// (i) `x_n` between `x_{n1}` and `x_{n1+1}` for `n ∈ [n1+1, n2+1]`, and
/// (ii) `|x_{n2} − x_{n2+1}| ≤ (1−δ/2)|x_{n1} − x_{n1+1}|`,
/// then replays the induction `|x_{q_r−1} − x_{q_r}| ≤ (1−δ/2)^(r−1)`.
pub fn check_lemma_dl3(run: &IterationRun, delta: &PosRational) -> Result<Dl3Report> {
    let mut report = Dl3Report::default();
    if !matches!(run.scheme, Scheme::Km | Scheme::Picard) {
        report.violations.push("lemma applies to Krasnoselski–Mann runs only".into());
        return Ok(report);
    }
    let len = run.len();
    let trace = switching_sequence(run, len)?;
    let q = trace.finite();
    report.switches = q.len();
    report.terminal = trace.q.last().copied();
    let xs = &run.xs;
    let bound = step_bound(delta, &run.f.lipschitz_constant());
    let contraction = Rational::one() - &(delta.value() / &Rational::from(2));

    for (r, w) in q.windows(2).enumerate() {
        report.monotone_segments += 1;
        if !monotone(&xs[w[0] as usize..w[1] as usize]) {
            report.violations.push(format!("x not monotone on [q_{r}, q_{})", r + 1));
        }
    }
    let last = *q.last().expect("q_0 present") as usize;
    report.monotone_segments += 1;
    if !monotone(&xs[last..]) {
        report.violations.push(format!("x not monotone after the last switch q_{}", q.len() - 1));
    }

    let step_ok = |n: u64| run.t.eval(n).value() <= &bound;
    let mut chain_valid = true;
    let mut power = Rational::one();
    for r in 1..q.len() {
        let qr = q[r];
        if r >= 2 {
            power = &power * &contraction;
        }
        if r + 1 < q.len() {
            let (n1, n2) = (qr - 1, q[r + 1] - 1);
            if !(step_ok(n1) && step_ok(n2)) {
                report.pairs_skipped += 1;
                chain_valid = false;
            } else {
                report.pairs_checked += 1;
                let (a, b) = (xs[n1 as usize].value(), xs[n1 as usize + 1].value());
                if let Some(n) = (n1 + 1..=n2 + 1).find(|&n| !between(xs[n as usize].value(), a, b)) {
                    report
                        .violations
                        .push(format!("(i) fails at r={r}: x_{n} outside [x_{n1}, x_{}]", n1 + 1));
                }
                let first = Difference::between(a, b);
                let second = Difference::between(xs[n2 as usize].value(), xs[n2 as usize + 1].value());
                if !second.abs_le_scaled(&contraction, &first) {
                    report.violations.push(format!("(ii) fails at r={r}"));
                }
            }
        }
        // The induction needs the lemma for every earlier pair.
        if chain_valid {
            report.chain_checked += 1;
            let gap = Difference::between(xs[qr as usize - 1].value(), xs[qr as usize].value());
            if !gap.abs_le(&power) {
                report.violations.push(format!("chained contraction fails at r={r}"));
            }
        }
    }
    Ok(report)
}
