//! Symbolic counter functions, moduli, rates of convergence, and parameter
//! schedules.
//!
//! All four are closed families rather than callbacks so that a scenario can
//! be written to JSON and replayed exactly. Each serialises as an object with a
//! `kind` tag; rationals are `"num/den"` strings and naturals decimal strings.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{log_ceil_base_lt1, Nat, PosRational, Rational, UnitRational};
use crate::numerics::{Difference, DEFAULT_LOG_CAP};

/// Longest table scan [`CounterFunc::max_wt_up_to`] will perform for
/// non-monotone counters.
pub const MAX_COUNTER_SCAN: u64 = 10_000_000;

/// A counter function `g: ℕ → ℕ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CounterFunc {
    Constant {
        value: Nat,
    },
    Identity,
    /// `n ↦ a·n + b`.
    Affine {
        a: Nat,
        b: Nat,
    },
    /// `values[n]` inside the table, `default(n)` beyond it.
    Table {
        values: Vec<Nat>,
        default: Box<CounterFunc>,
    },
    /// `n ↦ outer(inner(n))`.
    Compose {
        outer: Box<CounterFunc>,
        inner: Box<CounterFunc>,
    },
}

impl CounterFunc {
    pub fn constant(c: u64) -> Self {
        CounterFunc::Constant { value: Nat::from(c) }
    }

    pub fn affine(a: u64, b: u64) -> Self {
        CounterFunc::Affine {
            a: Nat::from(a),
            b: Nat::from(b),
        }
    }

    pub fn table(values: &[u64], default: CounterFunc) -> Self {
        CounterFunc::Table {
            values: values.iter().map(|&v| Nat::from(v)).collect(),
            default: Box::new(default),
        }
    }

    /// `n ↦ min(n, cap)`, as a table with a constant tail.
    pub fn identity_capped(cap: u64) -> Self {
        let values: Vec<u64> = (0..cap).collect();
        CounterFunc::table(&values, CounterFunc::constant(cap))
    }

    pub fn eval(&self, n: &Nat) -> Nat {
        match self {
            CounterFunc::Constant { value } => value.clone(),
            CounterFunc::Identity => n.clone(),
            CounterFunc::Affine { a, b } => &(a * n) + b,
            CounterFunc::Table { values, default } => match n.to_usize() {
                Some(i) if i < values.len() => values[i].clone(),
                _ => default.eval(n),
            },
            CounterFunc::Compose { outer, inner } => outer.eval(&inner.eval(n)),
        }
    }

    /// `g̃(n) = n + g(n)`.
    pub fn wt(&self, n: &Nat) -> Nat {
        n + &self.eval(n)
    }

    /// `g̃` applied `k` times to 0.
    pub fn wt_iter(&self, k: u64, cap_bits: u64) -> Result<Nat> {
        let mut z = Nat::zero();
        for _ in 0..k {
            z = self.wt(&z);
            z.check_bits(cap_bits, "iterated counter value")?;
        }
        Ok(z)
    }

    /// Whether `g` is non-decreasing (which makes `g̃` non-decreasing too).
    pub fn is_monotone(&self) -> bool {
        match self {
            CounterFunc::Constant { .. } | CounterFunc::Identity | CounterFunc::Affine { .. } => {
                true
            }
            CounterFunc::Table { values, default } => {
                values.windows(2).all(|w| w[0] <= w[1])
                    && default.is_monotone()
                    && values
                        .last()
                        .map_or(true, |last| *last <= default.eval(&Nat::from(values.len())))
            }
            CounterFunc::Compose { outer, inner } => outer.is_monotone() && inner.is_monotone(),
        }
    }

    /// Whether `g` takes only finitely many values, and if so which.
    pub fn finite_range(&self) -> Option<Vec<Nat>> {
        let mut out = match self {
            CounterFunc::Constant { value } => vec![value.clone()],
            CounterFunc::Identity => return None,
            CounterFunc::Affine { a, b } => {
                if a.is_zero() {
                    vec![b.clone()]
                } else {
                    return None;
                }
            }
            CounterFunc::Table { values, default } => {
                let mut v = values.clone();
                v.extend(default.finite_range()?);
                v
            }
            CounterFunc::Compose { outer, inner } => match (outer.finite_range(), inner.finite_range()) {
                (Some(o), _) => o,
                (None, Some(i)) => i.iter().map(|n| outer.eval(n)).collect(),
                (None, None) => return None,
            },
        };
        out.sort();
        out.dedup();
        Some(out)
    }

    /// `max_{N ≤ bound} (N + g(N))`.
    pub fn max_wt_up_to(&self, bound: &Nat) -> Result<Nat> {
        if self.is_monotone() {
            return Ok(self.wt(bound));
        }
        if let CounterFunc::Table { values, default } = self {
            if default.is_monotone() {
                let len = Nat::from(values.len());
                let mut best = Nat::zero();
                let scan_to = match bound.to_usize() {
                    Some(b) if b < values.len() => b + 1,
                    _ => values.len(),
                };
                for (i, v) in values.iter().take(scan_to).enumerate() {
                    let w = &Nat::from(i) + v;
                    if w > best {
                        best = w;
                    }
                }
                if bound >= &len {
                    let tail = default.wt(bound);
                    if tail > best {
                        best = tail;
                    }
                }
                return Ok(best);
            }
        }
        let limit = bound
            .to_u64()
            .filter(|b| *b <= MAX_COUNTER_SCAN)
            .ok_or_else(|| Error::cap("counter scan length", MAX_COUNTER_SCAN))?;
        Ok((0..=limit)
            .map(|n| self.wt(&Nat::from(n)))
            .max()
            .unwrap_or_default())
    }
}

/// A modulus of uniform continuity `ω: (0,∞) → (0,∞)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Modulus {
    /// `δ ↦ factor·δ`; `factor = 1/L` for an `L`-Lipschitz map.
    Linear { factor: PosRational },
}

impl Modulus {
    /// `δ ↦ δ/L`.
    pub fn lipschitz(l: &PosRational) -> Self {
        Modulus::Linear { factor: l.recip() }
    }

    pub fn identity() -> Self {
        Modulus::Linear {
            factor: PosRational::one(),
        }
    }

    pub fn eval(&self, delta: &PosRational) -> PosRational {
        match self {
            Modulus::Linear { factor } => factor.mul(delta),
        }
    }
}

/// One entry of a tabulated rate: `|s_n| ≤ delta` for every `n ≥ n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateStep {
    pub delta: PosRational,
    pub n: Nat,
}

/// A rate of convergence towards 0, `β: (0,∞) → ℕ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rate {
    /// `δ ↦ ⌈1/δ⌉`.
    Harmonic,
    /// `δ ↦` least `n ≥ 0` with `q^n ≤ δ`, for `0 < q < 1`.
    Geometric { q: PosRational },
    /// For sequences that are identically zero.
    Zero,
    /// `δ ↦ min { n_i : delta_i ≤ δ }`, or `default` when no step applies.
    Table { steps: Vec<RateStep>, default: Nat },
}

impl Rate {
    pub fn eval(&self, delta: &PosRational) -> Result<Nat> {
        match self {
            Rate::Harmonic => Ok(delta.recip().ceil()),
            Rate::Geometric { q } => {
                let k = log_ceil_base_lt1(q, delta, DEFAULT_LOG_CAP)?;
                Ok(Nat::from(k.max(0) as u64))
            }
            Rate::Zero => Ok(Nat::zero()),
            Rate::Table { steps, default } => Ok(steps
                .iter()
                .filter(|s| s.delta <= *delta)
                .map(|s| s.n.clone())
                .min()
                .unwrap_or_else(|| default.clone())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Rate::Geometric { q } = self {
            if q.value() >= &Rational::one() {
                return Err(Error::Domain(format!("geometric rate ratio {q} is not below 1")));
            }
        }
        Ok(())
    }
}

/// A parameter sequence `(t_n) ⊆ [0,1]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamSchedule {
    Constant {
        value: UnitRational,
    },
    /// `t_n = 1/(n+1)`.
    Harmonic,
    /// `t_n = t0·q^n`.
    Geometric {
        t0: UnitRational,
        q: UnitRational,
    },
    Table {
        values: Vec<UnitRational>,
        default: UnitRational,
    },
}

impl ParamSchedule {
    pub fn constant(value: UnitRational) -> Self {
        ParamSchedule::Constant { value }
    }

    pub fn eval(&self, n: u64) -> UnitRational {
        match self {
            ParamSchedule::Constant { value } => value.clone(),
            ParamSchedule::Harmonic => {
                UnitRational::new(Rational::new(1, n + 1).expect("n+1 > 0")).expect("1/(n+1) in [0,1]")
            }
            ParamSchedule::Geometric { t0, q } => {
                let pow = u32::try_from(n).map(|e| q.pow(e)).unwrap_or_else(|_| {
                    // q^n for astronomically large n: only 0 and 1 stay representable.
                    if q.value() == &Rational::one() {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                });
                UnitRational::new_unchecked(t0.value() * &pow)
            }
            ParamSchedule::Table { values, default } => usize::try_from(n)
                .ok()
                .and_then(|i| values.get(i))
                .unwrap_or(default)
                .clone(),
        }
    }

    /// Exact supremum of the schedule over all `n`.
    pub fn sup(&self) -> UnitRational {
        match self {
            ParamSchedule::Constant { value } => value.clone(),
            ParamSchedule::Harmonic => UnitRational::one(),
            ParamSchedule::Geometric { t0, .. } => t0.clone(),
            ParamSchedule::Table { values, default } => {
                values.iter().chain(std::iter::once(default)).max().cloned().expect("non-empty")
            }
        }
    }

    pub fn is_identically_zero(&self) -> bool {
        self.sup().is_zero()
    }
}

/// Something whose absolute value can be compared against a bound exactly.
pub trait Magnitude {
    fn abs_le(&self, bound: &Rational) -> bool;
}

impl Magnitude for Rational {
    fn abs_le(&self, bound: &Rational) -> bool {
        &self.abs() <= bound
    }
}

impl Magnitude for UnitRational {
    fn abs_le(&self, bound: &Rational) -> bool {
        self.value() <= bound
    }
}

impl Magnitude for Difference {
    fn abs_le(&self, bound: &Rational) -> bool {
        Difference::abs_le(self, bound)
    }
}

/// Outcome of a finite-horizon rate certification.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "result", rename_all = "snake_case")]
pub enum RateVerdict {
    /// Every checked `δ` holds on `[rate(δ), horizon)`.
    CertifiedUpTo { horizon: u64 },
    Fail { delta: PosRational, n: u64 },
}

impl RateVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, RateVerdict::CertifiedUpTo { .. })
    }
}

/// Checks `|seq_n| ≤ δ` for every `δ` in `deltas` and every `n` in
/// `[rate(δ), horizon)`.
pub fn check_rate<M: Magnitude>(
    seq: &[M],
    rate: &Rate,
    deltas: &[PosRational],
    horizon: u64,
) -> Result<RateVerdict> {
    if (seq.len() as u64) < horizon {
        return Err(Error::InsufficientLength {
            needed: horizon.to_string(),
            available: seq.len(),
        });
    }
    for delta in deltas {
        let start = rate.eval(delta)?;
        let Some(start) = start.to_u64().filter(|s| *s < horizon) else {
            continue;
        };
        for n in start..horizon {
            if !seq[n as usize].abs_le(delta.value()) {
                return Ok(RateVerdict::Fail {
                    delta: delta.clone(),
                    n,
                });
            }
        }
    }
    Ok(RateVerdict::CertifiedUpTo { horizon })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(v: u64) -> Nat {
        Nat::from(v)
    }

    #[test]
    fn counter_examples() {
        assert_eq!(CounterFunc::constant(0).eval(&n(17)), n(0));
        assert_eq!(CounterFunc::Identity.eval(&n(5)), n(5));
        assert_eq!(CounterFunc::affine(2, 1).eval(&n(3)), n(7));
        assert_eq!(CounterFunc::constant(0).wt(&n(4)), n(4));
        assert_eq!(CounterFunc::Identity.wt(&n(4)), n(8));
        assert_eq!(CounterFunc::constant(1).wt(&n(0)), n(1));
    }

    #[test]
    fn iterated_counter_examples() {
        let cap = crate::numerics::DEFAULT_CAP_BITS;
        assert_eq!(CounterFunc::constant(0).wt_iter(9, cap).unwrap(), n(0));
        assert_eq!(CounterFunc::affine(1, 1).wt_iter(2, cap).unwrap(), n(3));
        let k = PosRational::frac(1, 2).recip().ceil().to_u64().unwrap();
        assert_eq!(CounterFunc::constant(1).wt_iter(k, cap).unwrap(), n(2));
    }

    #[test]
    fn iterated_counter_hits_cap() {
        // g̃(n) = 2n + 1 doubles each round
        let err = CounterFunc::affine(1, 1).wt_iter(100, 64).unwrap_err();
        assert!(err.is_cap_exceeded());
    }

    #[test]
    fn table_counter_and_capped_identity() {
        let g = CounterFunc::table(&[5, 0, 0, 0], CounterFunc::constant(0));
        assert_eq!(g.eval(&n(0)), n(5));
        assert_eq!(g.eval(&n(10)), n(0));
        assert!(!g.is_monotone());
        assert_eq!(g.max_wt_up_to(&n(3)).unwrap(), n(5));
        let capped = CounterFunc::identity_capped(3);
        assert_eq!(capped.eval(&n(2)), n(2));
        assert_eq!(capped.eval(&n(40)), n(3));
        assert!(capped.is_monotone());
        assert_eq!(capped.finite_range().unwrap(), vec![n(0), n(1), n(2), n(3)]);
    }

    #[test]
    fn rate_and_schedule_examples() {
        assert_eq!(Rate::Harmonic.eval(&PosRational::frac(1, 48)).unwrap(), n(48));
        assert_eq!(ParamSchedule::Harmonic.eval(0), UnitRational::one());
        assert_eq!(ParamSchedule::Harmonic.eval(6), UnitRational::frac(1, 7));
        let geo = Rate::Geometric {
            q: PosRational::frac(1, 2),
        };
        assert_eq!(geo.eval(&PosRational::frac(1, 8)).unwrap(), n(3));
        assert_eq!(geo.eval(&PosRational::frac(3, 1)).unwrap(), n(0));
        assert_eq!(Rate::Zero.eval(&PosRational::frac(1, 1000)).unwrap(), n(0));
    }

    #[test]
    fn table_rate_uses_smallest_applicable_step() {
        let r = Rate::Table {
            steps: vec![
                RateStep { delta: PosRational::frac(1, 2), n: n(3) },
                RateStep { delta: PosRational::frac(1, 10), n: n(40) },
            ],
            default: n(1000),
        };
        assert_eq!(r.eval(&PosRational::frac(1, 1)).unwrap(), n(3));
        assert_eq!(r.eval(&PosRational::frac(1, 5)).unwrap(), n(40));
        assert_eq!(r.eval(&PosRational::frac(1, 100)).unwrap(), n(1000));
    }

    #[test]
    fn check_rate_examples() {
        let ones = vec![Rational::one(); 8];
        let verdict = check_rate(&ones, &Rate::Harmonic, &[PosRational::frac(1, 2)], 4).unwrap();
        assert_eq!(
            verdict,
            RateVerdict::Fail {
                delta: PosRational::frac(1, 2),
                n: 2
            }
        );
        let zeros = vec![Rational::zero(); 8];
        assert!(check_rate(&zeros, &Rate::Zero, &[PosRational::frac(1, 9)], 8)
            .unwrap()
            .passed());
        assert!(check_rate(&zeros, &Rate::Zero, &[PosRational::frac(1, 9)], 9).is_err());
    }

    #[test]
    fn harmonic_schedule_is_certified_by_harmonic_rate() {
        let seq: Vec<UnitRational> = (0..300).map(|i| ParamSchedule::Harmonic.eval(i)).collect();
        let deltas: Vec<PosRational> = (1..60).map(|d| PosRational::frac(1, d)).collect();
        assert!(check_rate(&seq, &Rate::Harmonic, &deltas, 300).unwrap().passed());
    }

    #[test]
    fn json_shape() {
        let g = CounterFunc::affine(2, 1);
        assert_eq!(
            serde_json::to_string(&g).unwrap(),
            r#"{"kind":"affine","a":"2","b":"1"}"#
        );
        let s: ParamSchedule = serde_json::from_str(r#"{"kind":"constant","value":"1/4"}"#).unwrap();
        assert_eq!(s.eval(3), UnitRational::frac(1, 4));
        let m: Modulus = serde_json::from_str(r#"{"kind":"linear","factor":"1/2"}"#).unwrap();
        assert_eq!(m.eval(&PosRational::frac(1, 2)), PosRational::frac(1, 4));
        assert!(serde_json::from_str::<ParamSchedule>(r#"{"kind":"constant","value":"5/4"}"#).is_err());
    }
}
