//! Seeded random scenario corpora whose hypotheses hold by construction.

use std::fmt;
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{ishikawa_rate_argument, m_eps, phi_i, BoundLimits};
use crate::error::{Error, Result};
use crate::functions::PwlFunction;
use crate::iterations::{IterationRun, Scheme};
use crate::numerics::{Difference, Nat, PosRational, Rational, UnitRational};
use crate::oracle::{needed_horizon, Theorem, DEFAULT_HORIZON};
use crate::scenario::{Caps, Scenario, ScenarioFile};
use crate::schedules::{CounterFunc, Modulus, ParamSchedule, Rate, RateStep};

/// Common denominator of every generated breakpoint coordinate.
const GRID: i64 = 64;

/// Attempts per Ishikawa scenario before keeping an infeasible draw.
const ISHIKAWA_ATTEMPTS: usize = 40;

/// Longest prefix an Ishikawa draw may need; exact runs get slow past it.
const ISHIKAWA_PREFIX: u64 = 8192;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// Quick corpora: gentle slopes, `ε = 1/2`, small counters.
    Tiny,
    /// The full parameter ranges.
    #[default]
    Desk,
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Profile::Tiny => "tiny",
            Profile::Desk => "desk",
        })
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tiny" => Ok(Profile::Tiny),
            "desk" => Ok(Profile::Desk),
            _ => Err(Error::Parse { what: "profile", input: s.into() }),
        }
    }
}

/// Ranges drawn from for one theorem under one profile.
struct Ranges {
    max_slope: i64,
    eps: &'static [(i64, i64)],
    max_const: u64,
    capped_identity: &'static [u64],
}

fn ranges(theorem: Theorem, profile: Profile) -> Ranges {
    match (profile, theorem) {
        (Profile::Tiny, _) => Ranges {
            max_slope: 2,
            eps: &[(1, 2)],
            max_const: 1,
            capped_identity: &[],
        },
        (Profile::Desk, Theorem::Km) => Ranges {
            max_slope: 8,
            eps: &[(1, 2), (1, 3)],
            max_const: 3,
            capped_identity: &[2, 4],
        },
        (Profile::Desk, Theorem::Ishikawa) => Ranges {
            max_slope: 2,
            eps: &[(1, 2), (1, 3)],
            max_const: 2,
            capped_identity: &[],
        },
        (Profile::Desk, Theorem::Lipschitz) => Ranges {
            max_slope: 8,
            eps: &[(1, 2), (1, 3), (1, 4)],
            max_const: 3,
            capped_identity: &[2, 4],
        },
        (Profile::Desk, Theorem::Fmcp) => Ranges {
            max_slope: 8,
            eps: &[(1, 2), (1, 3), (1, 4)],
            max_const: 3,
            capped_identity: &[4],
        },
    }
}

/// A PWL map on the 1/64 grid with 2–8 breakpoints and slopes bounded by
/// `max_slope`; nondecreasing when `monotone`.
pub fn random_pwl(rng: &mut impl Rng, max_slope: i64, monotone: bool) -> PwlFunction {
    let k = rng.gen_range(2..=8usize);
    let mut xs: Vec<i64> = sample(rng, (GRID - 1) as usize, k - 2)
        .into_iter()
        .map(|i| i as i64 + 1)
        .collect();
    xs.sort_unstable();
    xs.insert(0, 0);
    xs.push(GRID);
    let mut ys = vec![rng.gen_range(0..=GRID)];
    for w in xs.windows(2) {
        let reach = max_slope * (w[1] - w[0]);
        let prev = *ys.last().expect("y_0 present");
        let lo = if monotone { prev } else { (prev - reach).max(0) };
        let hi = (prev + reach).min(GRID);
        ys.push(rng.gen_range(lo..=hi));
    }
    let quads: Vec<[i64; 4]> = xs.iter().zip(&ys).map(|(&x, &y)| [x, GRID, y, GRID]).collect();
    PwlFunction::from_quads(&quads).expect("grid breakpoints form a valid map")
}

fn grid_point(rng: &mut impl Rng) -> UnitRational {
    UnitRational::frac(rng.gen_range(0..=GRID), GRID)
}

fn pick_eps(rng: &mut impl Rng, r: &Ranges) -> PosRational {
    let (n, d) = r.eps[rng.gen_range(0..r.eps.len())];
    PosRational::frac(n, d)
}

fn pick_counter(rng: &mut impl Rng, r: &Ranges, allow_capped: bool) -> CounterFunc {
    let options = r.max_const as usize + 1 + if allow_capped { r.capped_identity.len() } else { 0 };
    let i = rng.gen_range(0..options);
    if i <= r.max_const as usize {
        CounterFunc::constant(i as u64)
    } else {
        CounterFunc::identity_capped(r.capped_identity[i - r.max_const as usize - 1])
    }
}

fn blank(id: String, theorem: Theorem, f: PwlFunction, x0: UnitRational, epsilon: PosRational, g: CounterFunc) -> Scenario {
    Scenario {
        id,
        theorem,
        scheme: None,
        f,
        t: None,
        s: None,
        x0,
        epsilon,
        g,
        omega: None,
        beta: None,
        gamma: None,
        delta: None,
        caps: Caps::default(),
    }
}

fn km_scenario(rng: &mut impl Rng, id: String, r: &Ranges) -> Scenario {
    let f = random_pwl(rng, r.max_slope, false);
    let omega = Modulus::lipschitz(&f.lipschitz_constant());
    let mut s = blank(id, Theorem::Km, f, grid_point(rng), pick_eps(rng, r), pick_counter(rng, r, true));
    // |x_n − x_{n+1}| = t_n|x_n − f(x_n)| ≤ 1/(n+1), so the harmonic rate is exact.
    s.t = Some(ParamSchedule::Harmonic);
    s.omega = Some(omega);
    s.beta = Some(Rate::Harmonic);
    s
}

fn lipschitz_scenario(rng: &mut impl Rng, id: String, r: &Ranges) -> Scenario {
    let f = random_pwl(rng, r.max_slope, false);
    let l = f.lipschitz_constant();
    let delta = PosRational::new(Rational::new(1, l.ceil().as_biguint().clone() + 1u32).expect("positive"))
        .expect("positive");
    let admissible = (Rational::from(2) - delta.value()) / (l.value() + &Rational::one());
    let top = admissible.min(Rational::one());
    let c = &top * &Rational::frac(rng.gen_range(1..=4), 4);
    let mut s = blank(id, Theorem::Lipschitz, f, grid_point(rng), pick_eps(rng, r), pick_counter(rng, r, true));
    s.t = Some(ParamSchedule::constant(UnitRational::new(c).expect("step in [0,1]")));
    s.delta = Some(delta);
    s
}

fn fmcp_scenario(rng: &mut impl Rng, id: String, r: &Ranges) -> Scenario {
    let f = random_pwl(rng, r.max_slope, true);
    let t = if rng.gen_bool(0.5) {
        ParamSchedule::Harmonic
    } else {
        ParamSchedule::constant(UnitRational::frac(rng.gen_range(1..=8), 8))
    };
    let g = if rng.gen_range(0..4) == 0 {
        CounterFunc::affine(1, 1)
    } else {
        pick_counter(rng, r, true)
    };
    let mut s = blank(id, Theorem::Fmcp, f, grid_point(rng), pick_eps(rng, r), g);
    s.t = Some(t);
    s
}

/// The least `n0` with `|gap_n| ≤ δ` for every stored `n ≥ n0`.
fn settle_index(gaps: &[Difference], delta: &PosRational) -> u64 {
    gaps.iter()
        .rposition(|d| !d.abs_le(delta.value()))
        .map_or(0, |i| i as u64 + 1)
}

/// Measures a tabulated `γ` for `x_n − y_n → 0` good on a prefix long enough
/// for the resulting bound, or `None` if that prefix exceeds `horizon`.
fn measured_gamma(s: &Scenario, horizon: u64) -> Result<Option<Rate>> {
    let omega = s.omega.as_ref().expect("set before measuring");
    let beta = s.beta.as_ref().expect("set before measuring");
    let range = s.g.finite_range().ok_or_else(|| Error::Domain("γ measurement needs a finite-range g".into()))?;
    let m = m_eps(&s.epsilon);
    let deltas = range
        .iter()
        .map(|gv| ishikawa_rate_argument(&m, gv, omega))
        .collect::<Result<Vec<_>>>()?;
    let p = s.problem();
    let mut run = IterationRun::start(p.scheme, p.f, p.t, p.s, p.x0)?;
    let mut len = horizon.min(2048);
    let mut gaps: Vec<Difference> = Vec::new();
    loop {
        run.extend_to(len as usize);
        gaps.extend(run.stage_gaps_from(gaps.len()));
        let steps = deltas
            .iter()
            .map(|d| RateStep {
                delta: d.clone(),
                n: Nat::from(settle_index(&gaps, d)),
            })
            .collect();
        let gamma = Rate::Table {
            steps,
            default: Nat::from(len),
        };
        let phi = match phi_i(&s.epsilon, &s.g, omega, beta, &gamma, &BoundLimits::default()) {
            Ok(t) => t.phi,
            Err(e) if e.is_cap_exceeded() => return Ok(None),
            Err(e) => return Err(e),
        };
        let needed = needed_horizon(&phi, &s.g)?;
        match needed.to_u64() {
            Some(n) if n <= len => return Ok(Some(gamma)),
            Some(n) if n <= horizon => len = n.max(2 * len).min(horizon),
            _ => return Ok(None),
        }
    }
}

fn ishikawa_scenario(rng: &mut impl Rng, id: String, r: &Ranges, horizon: u64) -> Result<Scenario> {
    let mut last = None;
    for _ in 0..ISHIKAWA_ATTEMPTS {
        let f = random_pwl(rng, r.max_slope, false);
        let omega = Modulus::lipschitz(&f.lipschitz_constant());
        let q = UnitRational::frac(rng.gen_range(0..=2), 4);
        let mut s = blank(id.clone(), Theorem::Ishikawa, f, grid_point(rng), pick_eps(rng, r), pick_counter(rng, r, false));
        s.t = Some(ParamSchedule::Harmonic);
        s.s = Some(ParamSchedule::constant(q.clone()));
        s.omega = Some(omega);
        // |x_n − x_{n+1}| = t_n|x_n − f(y_n)| ≤ 1/(n+1).
        s.beta = Some(Rate::Harmonic);
        if q.is_zero() {
            s.gamma = Some(Rate::Zero);
            return Ok(s);
        }
        match measured_gamma(&s, horizon.min(ISHIKAWA_PREFIX))? {
            Some(gamma) => {
                s.gamma = Some(gamma);
                return Ok(s);
            }
            None => {
                s.gamma = Some(Rate::Table {
                    steps: Vec::new(),
                    default: Nat::from(horizon),
                });
                last = Some(s);
            }
        }
    }
    Ok(last.expect("at least one attempt"))
}

/// `count` scenarios for `theorem`, or cycling through all four when `None`.
/// The same arguments always give the same file.
pub fn generate_corpus(seed: u64, count: usize, theorem: Option<Theorem>, profile: Profile) -> Result<ScenarioFile> {
    generate_corpus_with_horizon(seed, count, theorem, profile, DEFAULT_HORIZON)
}

/// As [`generate_corpus`], sizing measured rates for runs of at most `horizon` points.
pub fn generate_corpus_with_horizon(
    seed: u64,
    count: usize,
    theorem: Option<Theorem>,
    profile: Profile,
    horizon: u64,
) -> Result<ScenarioFile> {
    const ALL: [Theorem; 4] = [Theorem::Km, Theorem::Ishikawa, Theorem::Lipschitz, Theorem::Fmcp];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scenarios = Vec::with_capacity(count);
    for i in 0..count {
        let th = theorem.unwrap_or(ALL[i % ALL.len()]);
        let r = ranges(th, profile);
        let id = format!("{th}-{seed}-{i:04}");
        let s = match th {
            Theorem::Km => km_scenario(&mut rng, id, &r),
            Theorem::Ishikawa => ishikawa_scenario(&mut rng, id, &r, horizon)?,
            Theorem::Lipschitz => lipschitz_scenario(&mut rng, id, &r),
            Theorem::Fmcp => fmcp_scenario(&mut rng, id, &r),
        };
        debug_assert!(s.validate().is_ok());
        scenarios.push(s);
    }
    Ok(ScenarioFile::new(scenarios))
}

/// Whether a scenario produced here satisfies its theorem's hypotheses by
/// construction: the checks that can be made without generating a run.
pub fn hypotheses_hold_by_construction(s: &Scenario) -> bool {
    let l = s.f.lipschitz_constant();
    match s.theorem {
        Theorem::Km | Theorem::Ishikawa => {
            s.omega.as_ref().is_some_and(|w| s.f.check_modulus(w, std::slice::from_ref(&s.epsilon)).passed())
        }
        Theorem::Lipschitz => match (&s.delta, &s.t) {
            (Some(d), Some(t)) => {
                let admissible = (Rational::from(2) - d.value()) / (l.value() + &Rational::one());
                d.value() < &Rational::one() && t.sup().value() <= &admissible
            }
            _ => false,
        },
        Theorem::Fmcp => s.f.is_nondecreasing() && s.scheme() != Scheme::Ishikawa,
    }
}
