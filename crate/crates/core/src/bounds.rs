//! The rate-of-metastability calculators.
//!
//! Each returns the full recursion trace rather than just the final number so
//! that the proof-internal facts about the recursion can be asserted
//! independently (see [`crate::oracle::bullets`]).

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ceil_div, log_ceil_base_lt1, Nat, PosRational, Rational};
use crate::numerics::{DEFAULT_CAP_BITS, DEFAULT_LOG_CAP};
use crate::schedules::{CounterFunc, Modulus, Rate};

/// Limits shared by all calculators.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundLimits {
    /// Largest bit length any intermediate natural may reach.
    pub cap_bits: u64,
    /// Longest recursion (`2m²` steps, or `B` for the Lipschitz bound).
    pub max_steps: u64,
    /// Iteration cap for the exact discrete logarithm.
    pub log_cap: u64,
}

impl Default for BoundLimits {
    fn default() -> Self {
        BoundLimits {
            cap_bits: DEFAULT_CAP_BITS,
            max_steps: 10_000_000,
            log_cap: DEFAULT_LOG_CAP,
        }
    }
}

/// A rate evaluated at one argument during a recursion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateQuery {
    pub delta: PosRational,
    pub value: Nat,
}

/// Memoised rate evaluation that remembers every distinct argument, in order.
struct QueryLog<'a> {
    rate: &'a Rate,
    seen: HashMap<PosRational, usize>,
    queries: Vec<RateQuery>,
}

impl<'a> QueryLog<'a> {
    fn new(rate: &'a Rate) -> Self {
        QueryLog {
            rate,
            seen: HashMap::new(),
            queries: Vec::new(),
        }
    }

    fn eval(&mut self, delta: &PosRational) -> Result<Nat> {
        if let Some(&i) = self.seen.get(delta) {
            return Ok(self.queries[i].value.clone());
        }
        let value = self.rate.eval(delta)?;
        self.seen.insert(delta.clone(), self.queries.len());
        self.queries.push(RateQuery {
            delta: delta.clone(),
            value: value.clone(),
        });
        Ok(value)
    }
}

/// Trace of the Krasnoselski–Mann or Ishikawa recursion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KmBoundTrace {
    pub m: Nat,
    pub c: PosRational,
    /// `u_0 .. u_{2m²}`.
    pub u: Vec<Nat>,
    pub phi: Nat,
    /// Distinct arguments at which `β` was evaluated.
    pub beta_queries: Vec<RateQuery>,
    /// Distinct arguments at which `γ` was evaluated (Ishikawa only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gamma_queries: Vec<RateQuery>,
}

/// Trace of the Lipschitz-case recursion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PsiBoundTrace {
    /// `P_0 .. P_B`.
    pub p: Vec<Nat>,
    /// `⌈log_{1−δ/2} ε⌉`.
    pub log_term: i64,
    /// `T = log_term + 1`; may be `≤ 0` when `ε ≥ 1`.
    pub t: i64,
    pub b: Nat,
    pub psi: Nat,
    /// Set when `ε ≥ 1`, where several proof facts become vacuous.
    pub eps_at_least_one: bool,
}

/// `m_ε = ⌈6/ε⌉`.
pub fn m_eps(eps: &PosRational) -> Nat {
    ceil_div(&PosRational::frac(6, 1), eps)
}

fn c_eps(m: &Nat) -> Result<PosRational> {
    Ok(PosRational::from_nat(&(m * 4))?.recip())
}

/// `1 / max(1, scale·m·g(p))`, shared by `A` and the Ishikawa `B`.
fn inverse_window(scale: u64, m: &Nat, gp: &Nat) -> Result<PosRational> {
    let denom = &(m * scale) * gp;
    let denom = if denom.is_zero() { Nat::one() } else { denom };
    Ok(PosRational::from_nat(&denom)?.recip())
}

fn min_with_modulus(x: &PosRational, omega: &Modulus) -> PosRational {
    x.min(&omega.eval(x))
}

/// `C(p)` of the Krasnoselski–Mann bound, given `g(p)`.
pub fn km_rate_argument(m: &Nat, gp: &Nat, omega: &Modulus) -> Result<PosRational> {
    let a = inverse_window(12, m, gp)?;
    Ok(min_with_modulus(&a, omega))
}

/// `C(p)/2` of the Ishikawa bound, given `g(p)`.
pub fn ishikawa_rate_argument(m: &Nat, gp: &Nat, omega: &Modulus) -> Result<PosRational> {
    let b = inverse_window(8, m, gp)?;
    let z = min_with_modulus(&b, omega);
    let third = z.div(&PosRational::frac(3, 1));
    let c = min_with_modulus(&third, omega);
    Ok(c.div(&PosRational::frac(2, 1)))
}

fn recursion_length(m: &Nat, limits: &BoundLimits) -> Result<u64> {
    (&(m * m) * 2)
        .to_u64()
        .filter(|s| *s <= limits.max_steps)
        .ok_or_else(|| Error::cap("recursion length 2m²", limits.max_steps))
}

/// `g̃^(⌈1/ε⌉)(0)`, the bound for monotone sequences.
pub fn fmcp_bound(eps: &PosRational, g: &CounterFunc, limits: &BoundLimits) -> Result<Nat> {
    let k = eps
        .recip()
        .ceil()
        .to_u64()
        .filter(|k| *k <= limits.max_steps)
        .ok_or_else(|| Error::cap("⌈1/ε⌉ iterations", limits.max_steps))?;
    g.wt_iter(k, limits.cap_bits)
}

/// Krasnoselski–Mann bound `Φ^KM_{ω,β}(ε, g)`.
pub fn phi_km(
    eps: &PosRational,
    g: &CounterFunc,
    omega: &Modulus,
    beta: &Rate,
    limits: &BoundLimits,
) -> Result<KmBoundTrace> {
    let m = m_eps(eps);
    let steps = recursion_length(&m, limits)?;
    let c = c_eps(&m)?;
    let mut betas = QueryLog::new(beta);
    let mut u = Vec::with_capacity(steps as usize + 1);
    let mut cur = betas.eval(&c)?;
    cur.check_bits(limits.cap_bits, "u_0")?;
    u.push(cur.clone());
    for _ in 0..steps {
        let gu = g.eval(&cur);
        let step = &(&cur + &gu) + 1;
        let arg = km_rate_argument(&m, &gu, omega)?;
        let next = step.max(betas.eval(&arg)?);
        next.check_bits(limits.cap_bits, "u_n")?;
        u.push(next.clone());
        cur = next;
    }
    Ok(KmBoundTrace {
        m,
        c,
        phi: cur,
        u,
        beta_queries: betas.queries,
        gamma_queries: Vec::new(),
    })
}

/// Ishikawa bound `Φ^I_{ω,β,γ}(ε, g)`.
pub fn phi_i(
    eps: &PosRational,
    g: &CounterFunc,
    omega: &Modulus,
    beta: &Rate,
    gamma: &Rate,
    limits: &BoundLimits,
) -> Result<KmBoundTrace> {
    let m = m_eps(eps);
    let steps = recursion_length(&m, limits)?;
    let c = c_eps(&m)?;
    let mut betas = QueryLog::new(beta);
    let mut gammas = QueryLog::new(gamma);
    let mut u = Vec::with_capacity(steps as usize + 1);
    let mut cur = betas.eval(&c)?;
    cur.check_bits(limits.cap_bits, "u_0")?;
    u.push(cur.clone());
    for _ in 0..steps {
        let gu = g.eval(&cur);
        let step = &(&cur + &gu) + 1;
        let half_c = ishikawa_rate_argument(&m, &gu, omega)?;
        let next = step.max(betas.eval(&half_c)?).max(gammas.eval(&half_c)?);
        next.check_bits(limits.cap_bits, "u_n")?;
        u.push(next.clone());
        cur = next;
    }
    Ok(KmBoundTrace {
        m,
        c,
        phi: cur,
        u,
        beta_queries: betas.queries,
        gamma_queries: gammas.queries,
    })
}

/// `h̃_{offset}^{(k)}(0)` where `h_offset(n) = g(offset + n)`.
fn shifted_wt_iter(g: &CounterFunc, offset: &Nat, k: u64, cap_bits: u64) -> Result<Nat> {
    let mut z = Nat::zero();
    for _ in 0..k {
        z = &z + &g.eval(&(offset + &z));
        z.check_bits(cap_bits, "shifted counter iterate")?;
    }
    Ok(z)
}

/// Lipschitz-case bound `Ψ^KM_δ(ε, g)`, for `δ ∈ (0, 1)`.
pub fn psi_km(
    eps: &PosRational,
    g: &CounterFunc,
    delta: &PosRational,
    limits: &BoundLimits,
) -> Result<PsiBoundTrace> {
    if delta.value() >= &Rational::one() {
        return Err(Error::Domain(format!("δ = {delta} must lie in (0,1)")));
    }
    let inner = eps
        .recip()
        .ceil()
        .to_u64()
        .and_then(|k| k.checked_add(1))
        .filter(|k| *k <= limits.max_steps)
        .ok_or_else(|| Error::cap("⌈1/ε⌉+1 iterations", limits.max_steps))?;
    let base = PosRational::new(Rational::one() - &(delta.value() / &Rational::from(2)))?;
    let log_term = log_ceil_base_lt1(&base, eps, limits.log_cap)?;
    let t = log_term + 1;

    let mut p = vec![Nat::zero()];
    let extend_to = |p: &mut Vec<Nat>, idx: u64| -> Result<()> {
        if idx > limits.max_steps {
            return Err(Error::cap("Lipschitz recursion length", limits.max_steps));
        }
        while (p.len() as u64) <= idx {
            let last = p.last().expect("P_0 present").clone();
            let next = &last + &shifted_wt_iter(g, &last, inner, limits.cap_bits)?;
            next.check_bits(limits.cap_bits, "P_n")?;
            p.push(next);
        }
        Ok(())
    };

    let t_idx = t.max(0) as u64;
    extend_to(&mut p, t_idx)?;
    let p_t = &p[t_idx as usize];
    let tail = g.wt(p_t) + Nat::one();
    // B = T + g̃(P_T) + 1, with a non-positive T only possible when ε ≥ 1.
    let b = if t >= 0 {
        &tail + t as u64
    } else {
        tail.checked_sub(&Nat::from(t.unsigned_abs())).unwrap_or_default()
    };
    b.check_bits(limits.cap_bits, "B")?;
    let b_idx = b
        .to_u64()
        .ok_or_else(|| Error::cap("Lipschitz recursion length", limits.max_steps))?;
    extend_to(&mut p, b_idx)?;
    p.truncate(b_idx as usize + 1);
    let psi = p[b_idx as usize].clone();
    Ok(PsiBoundTrace {
        p,
        log_term,
        t,
        b,
        psi,
        eps_at_least_one: eps.value() >= &Rational::one(),
    })
}
