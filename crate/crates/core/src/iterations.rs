//! Exact Picard, Krasnoselski–Mann and Ishikawa sequences, and the sign and
//! switching sequences derived from them.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::PwlFunction;
use crate::numerics::{Rational, UnitRational};
use crate::schedules::ParamSchedule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// `x_{n+1} = f(x_n)`; run internally as KM with `t ≡ 1`.
    Picard,
    Km,
    Ishikawa,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Picard => "picard",
            Scheme::Km => "km",
            Scheme::Ishikawa => "ishikawa",
        })
    }
}

/// A generated sequence together with everything needed to extend it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterationRun {
    pub scheme: Scheme,
    pub f: PwlFunction,
    pub t: ParamSchedule,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<ParamSchedule>,
    pub x0: UnitRational,
    pub xs: Vec<UnitRational>,
    /// `y_n` for every stored `x_n` (Ishikawa only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ys: Vec<UnitRational>,
}

impl IterationRun {
    /// An empty-but-seeded run holding just `x_0`.
    pub fn start(
        scheme: Scheme,
        f: PwlFunction,
        t: ParamSchedule,
        s: Option<ParamSchedule>,
        x0: UnitRational,
    ) -> Result<Self> {
        let (t, s) = match scheme {
            Scheme::Picard => (ParamSchedule::constant(UnitRational::one()), None),
            Scheme::Km => (t, None),
            Scheme::Ishikawa => {
                let s = s.ok_or_else(|| Error::Domain("ishikawa run needs an s schedule".into()))?;
                (t, Some(s))
            }
        };
        let mut run = IterationRun {
            scheme,
            f,
            t,
            s,
            x0: x0.clone(),
            xs: vec![x0],
            ys: Vec::new(),
        };
        run.push_y();
        Ok(run)
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    fn push_y(&mut self) {
        if let Some(s) = &self.s {
            let n = self.xs.len() - 1;
            let x = self.xs[n].value();
            let sn = s.eval(n as u64);
            let seg = self.f.segment_at(x);
            // y = (1−s)x + s(ax+b) = (1−s+sa)x + sb
            let lambda = Rational::one() - sn.value() + &(sn.value() * &seg.slope);
            let mu = sn.value() * &seg.intercept;
            self.ys.push(UnitRational::new_unchecked(x.affine(&lambda, &mu)));
        }
    }

    /// Appends points until the run holds `length` of them.
    pub fn extend_to(&mut self, length: usize) {
        while self.xs.len() < length {
            let n = self.xs.len() - 1;
            let x = self.xs[n].value();
            let tn = self.t.eval(n as u64);
            let t = tn.value();
            let next = match self.scheme {
                Scheme::Picard | Scheme::Km => {
                    let seg = self.f.segment_at(x);
                    // (1−t)x + t(ax+b) = (1−t+ta)x + tb
                    let lambda = Rational::one() - t + &(t * &seg.slope);
                    x.affine(&lambda, &(t * &seg.intercept))
                }
                Scheme::Ishikawa => {
                    let y = self.ys[n].value();
                    let seg = self.f.segment_at(y);
                    // y = λx + μ, so (1−t)x + t(a·y + b) collapses to one
                    // affine map of x with small coefficients.
                    let s = self.s.as_ref().expect("ishikawa has s").eval(n as u64);
                    let sx = self.f.segment_at(x);
                    let lambda1 = Rational::one() - s.value() + &(s.value() * &sx.slope);
                    let mu1 = s.value() * &sx.intercept;
                    let lambda = Rational::one() - t + &(t * &(&seg.slope * &lambda1));
                    let mu = t * &(&(&seg.slope * &mu1) + &seg.intercept);
                    x.affine(&lambda, &mu)
                }
            };
            debug_assert!(!next.is_negative() && next <= Rational::one());
            self.xs.push(UnitRational::new_unchecked(next));
            self.push_y();
        }
    }

    /// `x_n − x_{n+1}` for every `n` with both points stored.
    pub fn successive_differences(&self) -> impl Iterator<Item = crate::numerics::Difference> + '_ {
        self.xs
            .windows(2)
            .map(|w| crate::numerics::Difference::between(w[0].value(), w[1].value()))
    }

    /// `x_n − y_n` for every stored `n` (empty unless Ishikawa).
    pub fn stage_gaps(&self) -> impl Iterator<Item = crate::numerics::Difference> + '_ {
        self.stage_gaps_from(0)
    }

    /// `x_n − y_n` for `n ≥ start`.
    pub fn stage_gaps_from(&self, start: usize) -> impl Iterator<Item = crate::numerics::Difference> + '_ {
        let start = start.min(self.xs.len());
        self.xs[start..]
            .iter()
            .zip(&self.ys[start..])
            .map(|(x, y)| crate::numerics::Difference::between(x.value(), y.value()))
    }
}

/// Generates `length` points of the chosen scheme exactly.
pub fn run_iteration(
    scheme: Scheme,
    f: &PwlFunction,
    t: &ParamSchedule,
    s: Option<&ParamSchedule>,
    x0: &UnitRational,
    length: usize,
) -> Result<IterationRun> {
    if length == 0 {
        return Err(Error::Domain("run length must be at least 1".into()));
    }
    let mut run = IterationRun::start(scheme, f.clone(), t.clone(), s.cloned(), x0.clone())?;
    run.extend_to(length);
    Ok(run)
}

/// `σ_0 .. σ_length`, where `σ_{n+1}` is the sign of `f(x_n) − x_n` with the
/// previous sign carried over at exact zeros.
pub fn sign_sequence(run: &IterationRun, length: usize) -> Result<Vec<i8>> {
    if run.len() < length {
        return Err(Error::InsufficientLength {
            needed: length.to_string(),
            available: run.len(),
        });
    }
    let mut sigma = Vec::with_capacity(length + 1);
    sigma.push(1i8);
    for x in &run.xs[..length] {
        let next = match run.f.displacement_sign(x.value()) {
            Ordering::Greater => 1,
            Ordering::Less => -1,
            Ordering::Equal => *sigma.last().expect("σ_0 present"),
        };
        sigma.push(next);
    }
    Ok(sigma)
}

/// A switching index, or the first infinite one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum SwitchIndex {
    Finite(u64),
    /// No further switch can ever occur.
    Infinite,
    /// No further switch within the examined horizon.
    NoneUpToHorizon,
}

impl SwitchIndex {
    pub fn finite(&self) -> Option<u64> {
        match self {
            SwitchIndex::Finite(k) => Some(*k),
            _ => None,
        }
    }
}

impl fmt::Display for SwitchIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SwitchIndex::Finite(k) => write!(f, "{k}"),
            SwitchIndex::Infinite => f.write_str("∞"),
            SwitchIndex::NoneUpToHorizon => f.write_str("∞?"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchTrace {
    pub sigma: Vec<i8>,
    /// The finite switching indices followed by one terminal non-finite entry.
    pub q: Vec<SwitchIndex>,
}

impl SwitchTrace {
    pub fn finite(&self) -> Vec<u64> {
        self.q.iter().filter_map(SwitchIndex::finite).collect()
    }
}

/// `q_0 = 0`, `q_{r+1}` the least `k > q_r` with `σ_{k+1} = −σ_{q_r+1}`.
///
/// Only the first `length` points are consulted. The terminal entry is
/// [`SwitchIndex::Infinite`] when the examined prefix ends at an exact fixed
/// point (the sequence is then constant forever) or `f` is the identity, and
/// [`SwitchIndex::NoneUpToHorizon`] otherwise.
pub fn switching_sequence(run: &IterationRun, length: usize) -> Result<SwitchTrace> {
    let sigma = sign_sequence(run, length)?;
    let mut q = vec![SwitchIndex::Finite(0)];
    let mut current = 0usize;
    loop {
        let want = -sigma.get(current + 1).copied().unwrap_or(1);
        let found = (current + 1..length).find(|&k| sigma[k + 1] == want);
        match found {
            Some(k) => {
                q.push(SwitchIndex::Finite(k as u64));
                current = k;
            }
            None => {
                let settled = length > 0
                    && run.f.displacement_sign(run.xs[length - 1].value()) == Ordering::Equal;
                let identity = run.f == PwlFunction::identity();
                q.push(if settled || identity {
                    SwitchIndex::Infinite
                } else {
                    SwitchIndex::NoneUpToHorizon
                });
                break;
            }
        }
    }
    Ok(SwitchTrace { sigma, q })
}
