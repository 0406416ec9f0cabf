//! The facts each bound proof opens with, asserted on calculator traces.
//!
//! Every quantity is recomputed here from the formulas by separate code, so a
//! transcription slip in [`crate::bounds`] shows up as a violation rather
//! than agreeing with itself.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::bounds::{KmBoundTrace, PsiBoundTrace};
use crate::error::Result;
use crate::numerics::{Nat, PosRational, Rational};
use crate::schedules::{CounterFunc, Modulus, Rate};

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BulletReport {
    /// Individual facts checked.
    pub checked: u64,
    pub violations: Vec<String>,
}

impl BulletReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn assert(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations.push(what());
        }
    }
}

fn big(n: &Nat) -> BigInt {
    BigInt::from(n.as_biguint().clone())
}

/// `⌈a/b⌉` for positive integers.
fn ceil_ratio(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_ceil(b)
}

fn m_eps(eps: &PosRational) -> BigInt {
    // ⌈6/(p/q)⌉ = ⌈6q/p⌉
    ceil_ratio(&(eps.denom() * 6), eps.numer())
}

fn pos(r: Rational) -> Result<PosRational> {
    PosRational::new(r)
}

fn recip_of_max_one(x: BigInt) -> Rational {
    let d = if x > BigInt::from(0) { x } else { BigInt::from(1) };
    Rational::new(1, d).expect("positive denominator")
}

struct Memo<'a>(&'a Rate, HashMap<PosRational, Nat>);

impl Memo<'_> {
    fn get(&mut self, d: &PosRational) -> Result<Nat> {
        if let Some(v) = self.1.get(d) {
            return Ok(v.clone());
        }
        let v = self.0.eval(d)?;
        self.1.insert(d.clone(), v.clone());
        Ok(v)
    }
}

fn common_u_facts(
    report: &mut BulletReport,
    trace: &KmBoundTrace,
    eps: &PosRational,
    g: &CounterFunc,
    u0_expected: &Nat,
) -> BigInt {
    let m = m_eps(eps);
    report.assert(big(&trace.m) == m, || format!("m = {} but ⌈6/ε⌉ = {m}", trace.m));
    let steps = &m * &m * 2;
    report.assert(BigInt::from(trace.u.len()) == &steps + 1, || {
        format!("trace has {} entries, expected 2m²+1 = {}", trace.u.len(), &steps + 1)
    });
    report.assert(trace.u.first() == Some(u0_expected), || {
        format!("u_0 = {:?} but β(c) = {u0_expected}", trace.u.first())
    });
    report.assert(trace.u.last() == Some(&trace.phi), || "Φ is not the last u".into());
    for (n, w) in trace.u.windows(2).enumerate() {
        let floor = &w[0] + &g.eval(&w[0]);
        report.assert(w[1] > floor, || format!("u_{} ≤ u_{n} + g(u_{n})", n + 1));
    }
    m
}

/// Facts about the Krasnoselski–Mann trace: `u_0 = β(c)`, `u_{n+1} > u_n + g(u_n)`
/// and `u_{n+1} ≥ β(C(u_n))`.
pub fn km_bullets(
    trace: &KmBoundTrace,
    eps: &PosRational,
    g: &CounterFunc,
    omega: &Modulus,
    beta: &Rate,
) -> Result<BulletReport> {
    let mut report = BulletReport::default();
    let mut betas = Memo(beta, HashMap::new());
    let m = m_eps(eps);
    let c = pos(Rational::new(1, &m * 4)?)?;
    report.assert(trace.c == c, || format!("c = {} but 1/(4m) = {c}", trace.c));
    let u0 = betas.get(&c)?;
    let m = common_u_facts(&mut report, trace, eps, g, &u0);
    for (n, w) in trace.u.windows(2).enumerate() {
        let a = pos(recip_of_max_one(&m * 12 * big(&g.eval(&w[0]))))?;
        let wa = omega.eval(&a);
        let cc = if wa < a { wa } else { a };
        let need = betas.get(&cc)?;
        report.assert(w[1] >= need, || format!("u_{} < β(C(u_{n})) = {need}", n + 1));
    }
    Ok(report)
}

/// The Ishikawa analogue, with `β(C/2)` and `γ(C/2)`.
pub fn ishikawa_bullets(
    trace: &KmBoundTrace,
    eps: &PosRational,
    g: &CounterFunc,
    omega: &Modulus,
    beta: &Rate,
    gamma: &Rate,
) -> Result<BulletReport> {
    let mut report = BulletReport::default();
    let mut betas = Memo(beta, HashMap::new());
    let mut gammas = Memo(gamma, HashMap::new());
    let m = m_eps(eps);
    let c = pos(Rational::new(1, &m * 4)?)?;
    report.assert(trace.c == c, || format!("c = {} but 1/(4m) = {c}", trace.c));
    let u0 = betas.get(&c)?;
    let m = common_u_facts(&mut report, trace, eps, g, &u0);
    let three = Rational::from(3);
    let two = Rational::from(2);
    for (n, w) in trace.u.windows(2).enumerate() {
        let b = pos(recip_of_max_one(&m * 8 * big(&g.eval(&w[0]))))?;
        let wb = omega.eval(&b);
        let z = if wb < b { wb } else { b };
        let third = pos(z.value() / &three)?;
        let wt = omega.eval(&third);
        let cc = if wt < third { wt } else { third };
        let half = pos(cc.value() / &two)?;
        let nb = betas.get(&half)?;
        let ng = gammas.get(&half)?;
        report.assert(w[1] >= nb, || format!("u_{} < β(C(u_{n})/2) = {nb}", n + 1));
        report.assert(w[1] >= ng, || format!("u_{} < γ(C(u_{n})/2) = {ng}", n + 1));
    }
    Ok(report)
}

/// Facts about the Lipschitz-case trace: `P` non-decreasing,
/// `(1−δ/2)^(T−1) ≤ ε` with `T` least such, and the recurrences for `P`, `B`
/// and `Ψ` replayed.
pub fn psi_bullets(trace: &PsiBoundTrace, eps: &PosRational, g: &CounterFunc, delta: &PosRational) -> Result<BulletReport> {
    let mut report = BulletReport::default();
    for (n, w) in trace.p.windows(2).enumerate() {
        report.assert(w[0] <= w[1], || format!("P_{n} > P_{}", n + 1));
    }

    let base = Rational::one() - &(delta.value() / &Rational::from(2));
    let power = |e: i64| -> Result<Rational> {
        let mag = u32::try_from(e.unsigned_abs()).map_err(|_| crate::Error::cap("exponent", u32::MAX))?;
        Ok(if e >= 0 { base.pow(mag) } else { base.recip()?.pow(mag) })
    };
    let t = trace.t;
    report.assert(&power(t - 1)? <= eps.value(), || format!("(1−δ/2)^(T−1) > ε with T = {t}"));
    report.assert(&power(t - 2)? > eps.value(), || format!("T = {t} is not the least admissible exponent plus one"));

    // P_{n+1} − P_n = h̃_{P_n}^(⌈1/ε⌉+1)(0), h_m(n) = g(m + n)
    let k = ceil_ratio(eps.denom(), eps.numer()) + 1;
    let k = u64::try_from(k).unwrap_or(u64::MAX);
    for (n, w) in trace.p.windows(2).enumerate() {
        let mut z = Nat::zero();
        let mut i = 0;
        while i < k && z.bits() <= w[1].bits() + 1 {
            let h = g.eval(&(&w[0] + &z));
            z = &z + &h;
            i += 1;
        }
        let expect = &w[0] + &z;
        report.assert(i == k && w[1] == expect, || format!("P_{} does not follow from P_{n}", n + 1));
    }
    report.assert(trace.p.first() == Some(&Nat::zero()), || "P_0 ≠ 0".into());

    let tt = usize::try_from(t.max(0)).unwrap_or(usize::MAX);
    if let Some(pt) = trace.p.get(tt) {
        let b = BigInt::from(t) + big(pt) + big(&g.eval(pt)) + 1;
        let b = if b < BigInt::from(0) { BigInt::from(0) } else { b };
        report.assert(big(&trace.b) == b, || format!("B = {} but T + g̃(P_T) + 1 = {b}", trace.b));
    } else {
        report.assert(false, || "trace stops before P_T".into());
    }
    let last_ok = trace.b.to_usize().and_then(|b| trace.p.get(b)) == Some(&trace.psi)
        && trace.b.to_usize() == Some(trace.p.len() - 1);
    report.assert(last_ok, || "Ψ is not P_B".into());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{phi_i, phi_km, psi_km, BoundLimits};

    #[test]
    fn fixture_traces_satisfy_their_bullets() {
        let lim = BoundLimits::default();
        let half = PosRational::frac(1, 2);
        let g0 = CounterFunc::constant(0);
        let om = Modulus::identity();
        let t = phi_km(&half, &g0, &om, &Rate::Harmonic, &lim).unwrap();
        assert!(km_bullets(&t, &half, &g0, &om, &Rate::Harmonic).unwrap().passed());
        let t = phi_i(&half, &g0, &om, &Rate::Harmonic, &Rate::Harmonic, &lim).unwrap();
        let r = ishikawa_bullets(&t, &half, &g0, &om, &Rate::Harmonic, &Rate::Harmonic).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        let g1 = CounterFunc::constant(1);
        let t = psi_km(&half, &g1, &half, &lim).unwrap();
        let r = psi_bullets(&t, &half, &g1, &half).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
    }

    #[test]
    fn tampered_traces_are_caught() {
        let lim = BoundLimits::default();
        let half = PosRational::frac(1, 2);
        let g = CounterFunc::constant(2);
        let om = Modulus::lipschitz(&PosRational::frac(3, 1));
        let mut t = phi_km(&half, &g, &om, &Rate::Harmonic, &lim).unwrap();
        assert!(km_bullets(&t, &half, &g, &om, &Rate::Harmonic).unwrap().passed());
        t.u[10] = &t.u[9] + 2;
        let r = km_bullets(&t, &half, &g, &om, &Rate::Harmonic).unwrap();
        assert!(!r.passed());
        // Checked against a different β the same trace disagrees on u_0.
        let t = phi_km(&half, &g, &om, &Rate::Zero, &lim).unwrap();
        assert!(!km_bullets(&t, &half, &g, &om, &Rate::Harmonic).unwrap().passed());

        let mut p = psi_km(&half, &g, &half, &lim).unwrap();
        p.p[3] = &p.p[3] + 1;
        assert!(!psi_bullets(&p, &half, &g, &half).unwrap().passed());
        let mut p = psi_km(&half, &g, &half, &lim).unwrap();
        p.t += 1;
        assert!(!psi_bullets(&p, &half, &g, &half).unwrap().passed());
    }
}
