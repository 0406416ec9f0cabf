//! Piecewise-linear self-maps of `[0,1]` with rational breakpoints.
//!
//! PWL maps are dense in `C[0,1]` and admit exact evaluation, exact Lipschitz
//! constants, and exact fixed-point location, so every hypothesis the theorems
//! need can be decided without tolerances.

use std::cmp::Ordering;

use num_traits::ToPrimitive;
use serde::de::Error as _;
use serde::ser::{Error as _, SerializeSeq};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::numerics::{PosRational, Rational, UnitRational};
use crate::schedules::Modulus;

/// One linear piece `f(x) = slope·x + intercept` on `[x0, x1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub x0: Rational,
    pub x1: Rational,
    pub slope: Rational,
    pub intercept: Rational,
}

impl Segment {
    fn new(p: &(UnitRational, UnitRational), q: &(UnitRational, UnitRational)) -> Self {
        let slope = (q.1.value() - p.1.value()) / (q.0.value() - p.0.value());
        let intercept = p.1.value() - &(&slope * p.0.value());
        Segment {
            x0: p.0.value().clone(),
            x1: q.0.value().clone(),
            slope,
            intercept,
        }
    }

    pub fn apply(&self, x: &Rational) -> Rational {
        x.affine(&self.slope, &self.intercept)
    }

    pub fn len(&self) -> Rational {
        &self.x1 - &self.x0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixedPointKind {
    /// Strictly inside a linear piece.
    ExactOnSegment,
    /// At one of the function's breakpoints.
    SegmentEndpoint,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub location: UnitRational,
    pub kind: FixedPointKind,
}

/// A connected component of the fixed-point set, clipped to a query interval.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FixedComponent {
    Point(UnitRational),
    /// Closed interval `[lo, hi]`, `lo < hi`, on which `f` is the identity.
    Interval(UnitRational, UnitRational),
}

impl FixedComponent {
    pub fn lo(&self) -> &UnitRational {
        match self {
            FixedComponent::Point(p) => p,
            FixedComponent::Interval(lo, _) => lo,
        }
    }

    pub fn hi(&self) -> &UnitRational {
        match self {
            FixedComponent::Point(p) => p,
            FixedComponent::Interval(_, hi) => hi,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ModulusVerdict {
    Pass,
    /// `ω(delta)` is not certified. `witness`, when present, is a pair with
    /// `|x − y| < ω(delta)` and `|f(x) − f(y)| ≥ delta`.
    Fail {
        delta: PosRational,
        witness: Option<(UnitRational, UnitRational)>,
    },
}

impl ModulusVerdict {
    pub fn passed(&self) -> bool {
        matches!(self, ModulusVerdict::Pass)
    }
}

/// Piecewise-linear `f: [0,1] → [0,1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PwlFunction {
    breakpoints: Vec<(UnitRational, UnitRational)>,
    segments: Vec<Segment>,
}

impl PwlFunction {
    pub fn new(breakpoints: Vec<(UnitRational, UnitRational)>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidFunction("need at least two breakpoints".into()));
        }
        if !breakpoints[0].0.is_zero() {
            return Err(Error::InvalidFunction("first breakpoint must have x = 0".into()));
        }
        if breakpoints.last().map(|b| b.0.value() != &Rational::one()) == Some(true) {
            return Err(Error::InvalidFunction("last breakpoint must have x = 1".into()));
        }
        if let Some(w) = breakpoints.windows(2).find(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidFunction(format!(
                "breakpoint x values not strictly increasing at {}",
                w[1].0
            )));
        }
        let segments = breakpoints.windows(2).map(|w| Segment::new(&w[0], &w[1])).collect();
        Ok(PwlFunction {
            breakpoints,
            segments,
        })
    }

    /// From `(x_num, x_den, y_num, y_den)` quadruples.
    pub fn from_quads(quads: &[[i64; 4]]) -> Result<Self> {
        let pts = quads
            .iter()
            .map(|q| {
                Ok((
                    UnitRational::new(Rational::new(q[0], q[1])?)?,
                    UnitRational::new(Rational::new(q[2], q[3])?)?,
                ))
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::InvalidFunction(e.to_string()))?;
        PwlFunction::new(pts)
    }

    pub fn identity() -> Self {
        PwlFunction::from_quads(&[[0, 1, 0, 1], [1, 1, 1, 1]]).expect("valid")
    }

    /// `x ↦ 1 − x`.
    pub fn reflection() -> Self {
        PwlFunction::from_quads(&[[0, 1, 1, 1], [1, 1, 0, 1]]).expect("valid")
    }

    /// Breakpoints `(0,0), (1/2,1), (1,0)`.
    pub fn tent() -> Self {
        PwlFunction::from_quads(&[[0, 1, 0, 1], [1, 2, 1, 1], [1, 1, 0, 1]]).expect("valid")
    }

    pub fn constant(y: UnitRational) -> Self {
        PwlFunction::new(vec![(UnitRational::zero(), y.clone()), (UnitRational::one(), y)])
            .expect("valid")
    }

    pub fn breakpoints(&self) -> &[(UnitRational, UnitRational)] {
        &self.breakpoints
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// The piece containing `x` (the left one at an interior breakpoint;
    /// both agree there).
    pub fn segment_at(&self, x: &Rational) -> &Segment {
        let i = self.breakpoints[1..].partition_point(|(bx, _)| bx.value() < x);
        &self.segments[i.min(self.segments.len() - 1)]
    }

    pub fn eval(&self, x: &UnitRational) -> UnitRational {
        UnitRational::new_unchecked(self.segment_at(x.value()).apply(x.value()))
    }

    /// Sign of `f(x) − x`.
    pub fn displacement_sign(&self, x: &Rational) -> Ordering {
        let seg = self.segment_at(x);
        x.affine(&(&seg.slope - &Rational::one()), &seg.intercept).signum()
    }

    /// Largest absolute slope; 0 for a constant map.
    pub fn max_abs_slope(&self) -> Rational {
        self.segments
            .iter()
            .map(|s| s.slope.abs())
            .max()
            .expect("at least one segment")
    }

    /// Least Lipschitz constant, or the conventional 1 for a constant map.
    pub fn lipschitz_constant(&self) -> PosRational {
        PosRational::new(self.max_abs_slope()).unwrap_or_else(|_| PosRational::one())
    }

    /// Every slope non-negative.
    pub fn is_nondecreasing(&self) -> bool {
        self.segments.iter().all(|s| !s.slope.is_negative())
    }

    /// Components of `{x ∈ [a,b] : f(x) = x}`, in increasing order.
    pub fn fixed_point_set_in(&self, a: &UnitRational, b: &UnitRational) -> Vec<FixedComponent> {
        let mut out: Vec<FixedComponent> = Vec::new();
        if a > b {
            return out;
        }
        let one = Rational::one();
        for seg in &self.segments {
            if &seg.x1 < a.value() || &seg.x0 > b.value() {
                continue;
            }
            let lo = seg.x0.clone().max(a.value().clone());
            let hi = seg.x1.clone().min(b.value().clone());
            let comp = if seg.slope == one {
                if !seg.intercept.is_zero() {
                    continue;
                }
                if lo == hi {
                    FixedComponent::Point(UnitRational::new_unchecked(lo))
                } else {
                    FixedComponent::Interval(
                        UnitRational::new_unchecked(lo),
                        UnitRational::new_unchecked(hi),
                    )
                }
            } else {
                let root = &seg.intercept / &(&one - &seg.slope);
                if root < lo || root > hi {
                    continue;
                }
                FixedComponent::Point(UnitRational::new_unchecked(root))
            };
            push_merged(&mut out, comp);
        }
        out
    }

    /// Smallest fixed point in `[a, b]`, if any.
    pub fn least_fixed_point_in(&self, a: &UnitRational, b: &UnitRational) -> Option<FixedPoint> {
        let location = self.fixed_point_set_in(a, b).into_iter().next()?.lo().clone();
        let kind = if self.breakpoints.iter().any(|(bx, _)| *bx == location) {
            FixedPointKind::SegmentEndpoint
        } else {
            FixedPointKind::ExactOnSegment
        };
        Some(FixedPoint { location, kind })
    }

    /// Certifies `|x − y| < ω(δ) ⇒ |f(x) − f(y)| < δ` for each `δ`.
    ///
    /// Passes exactly when `ω(δ)·L ≤ δ` with `L` the largest absolute slope,
    /// which is a proof of the implication. A failure carries a concrete
    /// counterexample pair whenever one fits inside the steepest piece.
    pub fn check_modulus(&self, omega: &Modulus, deltas: &[PosRational]) -> ModulusVerdict {
        let l = self.max_abs_slope();
        for delta in deltas {
            let w = omega.eval(delta);
            if &(&l * w.value()) <= delta.value() {
                continue;
            }
            let steep = self
                .segments
                .iter()
                .find(|s| s.slope.abs() == l)
                .expect("steepest segment exists");
            let reach = w.value().clone().min(steep.len());
            let witness = if &(&l * &reach) > delta.value() {
                let x = steep.x0.clone();
                let y = &x + &(delta.value() / &l);
                Some((UnitRational::new_unchecked(x), UnitRational::new_unchecked(y)))
            } else {
                None
            };
            return ModulusVerdict::Fail {
                delta: delta.clone(),
                witness,
            };
        }
        ModulusVerdict::Pass
    }
}

fn push_merged(out: &mut Vec<FixedComponent>, comp: FixedComponent) {
    if let Some(last) = out.last_mut() {
        if last.hi() >= comp.lo() {
            let lo = last.lo().clone();
            let hi = if last.hi() >= comp.hi() { last.hi().clone() } else { comp.hi().clone() };
            *last = if lo == hi {
                FixedComponent::Point(lo)
            } else {
                FixedComponent::Interval(lo, hi)
            };
            return;
        }
    }
    out.push(comp);
}

/// `ω(δ) = δ/L`, a modulus for every `L`-Lipschitz map.
pub fn modulus_from_lipschitz(l: &PosRational) -> Modulus {
    Modulus::lipschitz(l)
}

impl Serialize for PwlFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.breakpoints.len()))?;
        for (x, y) in &self.breakpoints {
            let quad = [x.numer(), x.denom(), y.numer(), y.denom()]
                .map(|v| v.to_u64().ok_or_else(|| S::Error::custom("breakpoint component exceeds u64")));
            let [a, b, c, d] = quad;
            seq.serialize_element(&[a?, b?, c?, d?])?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for PwlFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let quads = Vec::<[u64; 4]>::deserialize(deserializer)?;
        let quads: Vec<[i64; 4]> = quads
            .iter()
            .map(|q| {
                let mut out = [0i64; 4];
                for (o, v) in out.iter_mut().zip(q) {
                    *o = i64::try_from(*v).map_err(D::Error::custom)?;
                }
                Ok(out)
            })
            .collect::<std::result::Result<_, D::Error>>()?;
        PwlFunction::from_quads(&quads).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(n: i64, d: i64) -> UnitRational {
        UnitRational::frac(n, d)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(PwlFunction::identity().eval(&u(1, 3)), u(1, 3));
        assert_eq!(PwlFunction::reflection().eval(&u(1, 4)), u(3, 4));
        assert_eq!(PwlFunction::tent().eval(&u(1, 4)), u(1, 2));
        assert_eq!(PwlFunction::tent().eval(&u(1, 2)), u(1, 1));
        assert_eq!(PwlFunction::tent().eval(&u(1, 1)), u(0, 1));
    }

    #[test]
    fn lipschitz_examples() {
        assert_eq!(PwlFunction::identity().lipschitz_constant(), PosRational::one());
        assert_eq!(PwlFunction::tent().lipschitz_constant(), PosRational::frac(2, 1));
        assert_eq!(PwlFunction::constant(u(1, 2)).lipschitz_constant(), PosRational::one());
    }

    #[test]
    fn modulus_examples() {
        let q = PosRational::frac;
        assert_eq!(modulus_from_lipschitz(&q(1, 1)).eval(&q(1, 4)), q(1, 4));
        assert_eq!(modulus_from_lipschitz(&q(2, 1)).eval(&q(1, 2)), q(1, 4));
        assert_eq!(modulus_from_lipschitz(&q(1, 2)).eval(&q(1, 3)), q(2, 3));
    }

    #[test]
    fn fixed_point_examples() {
        let fp = PwlFunction::reflection().least_fixed_point_in(&u(0, 1), &u(1, 1)).unwrap();
        assert_eq!(fp.location, u(1, 2));
        assert_eq!(fp.kind, FixedPointKind::ExactOnSegment);
        let fp = PwlFunction::identity().least_fixed_point_in(&u(1, 4), &u(3, 4)).unwrap();
        assert_eq!(fp.location, u(1, 4));
        let half_up = PwlFunction::from_quads(&[[0, 1, 1, 2], [1, 1, 1, 1]]).unwrap();
        let fp = half_up.least_fixed_point_in(&u(0, 1), &u(1, 1)).unwrap();
        assert_eq!(fp.location, u(1, 1));
        assert_eq!(fp.kind, FixedPointKind::SegmentEndpoint);
        assert!(half_up.least_fixed_point_in(&u(0, 1), &u(1, 2)).is_none());
    }

    #[test]
    fn fixed_components_merge_across_breakpoints() {
        // identity on [1/4, 3/4] made of two pieces
        let f = PwlFunction::from_quads(&[
            [0, 1, 1, 2],
            [1, 4, 1, 4],
            [1, 2, 1, 2],
            [3, 4, 3, 4],
            [1, 1, 1, 2],
        ])
        .unwrap();
        let comps = f.fixed_point_set_in(&u(0, 1), &u(1, 1));
        assert_eq!(comps, vec![FixedComponent::Interval(u(1, 4), u(3, 4))]);
    }

    #[test]
    fn check_modulus_examples() {
        let deltas = [PosRational::frac(1, 2), PosRational::frac(1, 7), PosRational::frac(3, 1)];
        assert!(PwlFunction::identity().check_modulus(&Modulus::identity(), &deltas).passed());
        let verdict = PwlFunction::tent().check_modulus(&Modulus::identity(), &[PosRational::frac(1, 2)]);
        match verdict {
            ModulusVerdict::Fail { delta, witness: Some((x, y)) } => {
                assert_eq!(delta, PosRational::frac(1, 2));
                let f = PwlFunction::tent();
                assert!(y.value() - x.value() < Rational::frac(1, 2));
                assert!((f.eval(&y).value() - f.eval(&x).value()).abs() >= Rational::frac(1, 2));
            }
            other => panic!("unexpected {other:?}"),
        }
        let half = Modulus::Linear { factor: PosRational::frac(1, 2) };
        assert!(PwlFunction::tent().check_modulus(&half, &deltas).passed());
    }

    #[test]
    fn rejects_malformed_functions() {
        assert!(PwlFunction::from_quads(&[[0, 1, 0, 1]]).is_err());
        assert!(PwlFunction::from_quads(&[[1, 4, 0, 1], [1, 1, 0, 1]]).is_err());
        assert!(PwlFunction::from_quads(&[[0, 1, 0, 1], [1, 2, 0, 1], [1, 2, 1, 1], [1, 1, 0, 1]]).is_err());
        assert!(PwlFunction::from_quads(&[[0, 1, 0, 1], [1, 1, 3, 2]]).is_err());
    }

    #[test]
    fn json_quadruples() {
        let f = PwlFunction::tent();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, "[[0,1,0,1],[1,2,1,1],[1,1,0,1]]");
        let back: PwlFunction = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
    }
}
