//! Piecewise-linear maps checked against direct interpolation.

use metarate::functions::{FixedComponent, PwlFunction};
use metarate::numerics::{PosRational, Rational, UnitRational};
use metarate::schedules::Modulus;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn q(r: &Rational) -> BigRational {
    BigRational::new(r.numer().clone(), r.denom().clone())
}

/// Breakpoints on the 1/`d` grid: strictly increasing xs from 0 to 1, any ys.
fn pwl() -> impl Strategy<Value = PwlFunction> {
    (prop::sample::select(vec![4i64, 8, 16, 64]), 1usize..7).prop_flat_map(|(d, inner)| {
        let xs = prop::collection::btree_set(1..d, 0..=inner.min(d as usize - 1));
        let ys = prop::collection::vec(0..=d, inner + 2);
        (Just(d), xs, ys)
    })
    .prop_map(|(d, xs, ys)| {
        let mut grid: Vec<i64> = vec![0];
        grid.extend(xs);
        grid.push(d);
        let quads: Vec<[i64; 4]> = grid.iter().zip(&ys).map(|(&x, &y)| [x, d, y, d]).collect();
        PwlFunction::from_quads(&quads).unwrap()
    })
}

fn point() -> impl Strategy<Value = UnitRational> {
    (1i64..=200).prop_flat_map(|d| (0..=d, Just(d))).prop_map(|(n, d)| UnitRational::frac(n, d))
}

/// Linear interpolation between the surrounding breakpoints.
fn interpolate(f: &PwlFunction, x: &UnitRational) -> BigRational {
    let bp = f.breakpoints();
    let xv = q(x.value());
    for w in bp.windows(2) {
        let (x0, y0) = (q(w[0].0.value()), q(w[0].1.value()));
        let (x1, y1) = (q(w[1].0.value()), q(w[1].1.value()));
        if xv >= x0 && xv <= x1 {
            return &y0 + (&y1 - &y0) * (&xv - &x0) / (&x1 - &x0);
        }
    }
    unreachable!("x in [0,1]")
}

proptest! {
    #[test]
    fn eval_interpolates_and_stays_in_unit_interval(f in pwl(), x in point()) {
        let y = f.eval(&x);
        prop_assert_eq!(q(y.value()), interpolate(&f, &x));
        prop_assert!(!y.value().is_negative() && y.value() <= &Rational::one());
        let sign = f.displacement_sign(x.value());
        prop_assert_eq!(sign, (q(y.value()) - q(x.value())).cmp(&BigRational::zero()));
    }

    #[test]
    fn lipschitz_constant_is_sound(f in pwl(), x in point(), y in point()) {
        let l = q(f.lipschitz_constant().value());
        let lhs = (q(f.eval(&x).value()) - q(f.eval(&y).value())).abs();
        prop_assert!(lhs <= l * (q(x.value()) - q(y.value())).abs());
    }

    #[test]
    fn lipschitz_constant_is_attained(f in pwl()) {
        let l = q(&f.max_abs_slope());
        let attained = f.breakpoints().windows(2).any(|w| {
            let dy = (q(w[1].1.value()) - q(w[0].1.value())).abs();
            let dx = q(w[1].0.value()) - q(w[0].0.value());
            dy == &l * dx
        });
        prop_assert!(attained || l.is_zero());
    }

    #[test]
    fn modulus_verdicts_are_honest(f in pwl(), k in 1i64..=16, dn in 1i64..=8, x in point(), y in point()) {
        let omega = Modulus::Linear { factor: PosRational::frac(k, 8) };
        let delta = PosRational::frac(dn, 8);
        let verdict = f.check_modulus(&omega, std::slice::from_ref(&delta));
        let w = q(omega.eval(&delta).value());
        let d = q(delta.value());
        let gap = |a: &UnitRational, b: &UnitRational| (q(a.value()) - q(b.value())).abs();
        if verdict.passed() {
            if gap(&x, &y) < w {
                prop_assert!(gap(&f.eval(&x), &f.eval(&y)) < d);
            }
        } else if let metarate::functions::ModulusVerdict::Fail { witness: Some((a, b)), .. } = verdict {
            prop_assert!(gap(&a, &b) < w);
            prop_assert!(gap(&f.eval(&a), &f.eval(&b)) >= d);
        }
        // The Lipschitz modulus always certifies.
        prop_assert!(f.check_modulus(&Modulus::lipschitz(&f.lipschitz_constant()), &[delta]).passed());
    }

    #[test]
    fn fixed_points_are_fixed_and_least(f in pwl(), a in point(), b in point()) {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        let comps = f.fixed_point_set_in(&a, &b);
        for c in &comps {
            for p in [c.lo(), c.hi()] {
                prop_assert!(p >= &a && p <= &b);
                prop_assert_eq!(&f.eval(p), p);
            }
            if let FixedComponent::Interval(lo, hi) = c {
                prop_assert!(lo < hi);
                let mid = UnitRational::new((lo.value() + hi.value()) * Rational::frac(1, 2)).unwrap();
                prop_assert_eq!(&f.eval(&mid), &mid);
            }
        }
        prop_assert!(comps.windows(2).all(|w| w[0].hi() < w[1].lo()));
        let least = f.least_fixed_point_in(&a, &b).map(|p| p.location);
        prop_assert_eq!(least.as_ref(), comps.first().map(|c| c.lo()));
        // Any fixed breakpoint in [a, b] is covered by a component.
        for (x, y) in f.breakpoints() {
            if x == y && x >= &a && x <= &b {
                prop_assert!(comps.iter().any(|c| c.lo() <= x && x <= c.hi()));
            }
        }
        let fa = q(f.eval(&a).value()) - q(a.value());
        let fb = q(f.eval(&b).value()) - q(b.value());
        if fa.is_negative() != fb.is_negative() || fa.is_zero() || fb.is_zero() {
            prop_assert!(!comps.is_empty(), "a sign change forces a fixed point");
        }
    }

    #[test]
    fn json_round_trip(f in pwl()) {
        let text = serde_json::to_string(&f).unwrap();
        let back: PwlFunction = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, f);
    }
}

#[test]
fn invalid_breakpoints_are_rejected() {
    assert!(PwlFunction::from_quads(&[[0, 1, 0, 1]]).is_err());
    assert!(PwlFunction::from_quads(&[[0, 1, 0, 1], [1, 2, 3, 2], [1, 1, 0, 1]]).is_err());
    assert!(PwlFunction::from_quads(&[[0, 1, 0, 1], [1, 2, 0, 1], [1, 3, 0, 1], [1, 1, 0, 1]]).is_err());
    assert!(PwlFunction::from_quads(&[[1, 4, 0, 1], [1, 1, 0, 1]]).is_err());
}
