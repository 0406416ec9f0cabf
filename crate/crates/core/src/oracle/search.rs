//! Exhaustive search for the least metastable point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{Difference, Nat, PosRational, Rational, UnitRational};
use crate::schedules::CounterFunc;

/// A pair in the window of a rejected `N` that is more than `ε` apart.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub n: u64,
    pub i: u64,
    pub j: u64,
}

/// Result of scanning `N = 0, 1, …, search_cap`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaSearch {
    /// Least `N` whose window has diameter `≤ ε`, if one was found.
    pub least_n: Option<u64>,
    /// Largest `N` examined.
    pub search_cap: u64,
    /// One witness for every rejected `N`, in order.
    #[serde(skip)]
    pub witnesses: Vec<Witness>,
}

impl MetaSearch {
    pub fn rejected(&self) -> usize {
        self.witnesses.len()
    }
}

fn window_end(n: u64, g: &CounterFunc, available: usize) -> Result<usize> {
    let end = g.wt(&Nat::from(n));
    match end.to_usize() {
        Some(e) if e < available => Ok(e),
        _ => Err(Error::InsufficientLength {
            needed: (&end + 1).to_string(),
            available,
        }),
    }
}

/// Least `N ≤ search_cap` with `|x_i − x_j| ≤ ε` for all `i, j ∈ [N, N+g(N)]`.
///
/// Each window is judged by its extrema, so one `N` costs one pass over its
/// window. Fails if some examined window runs past the end of `xs`.
pub fn least_metastable(
    xs: &[UnitRational],
    eps: &PosRational,
    g: &CounterFunc,
    search_cap: u64,
) -> Result<MetaSearch> {
    let mut out = MetaSearch {
        least_n: None,
        search_cap,
        witnesses: Vec::new(),
    };
    if eps.value() >= &Rational::one() {
        // Every point lies in [0,1].
        out.least_n = Some(0);
        return Ok(out);
    }
    for n in 0..=search_cap {
        let end = window_end(n, g, xs.len())?;
        let start = n as usize;
        let (mut lo, mut hi) = (start, start);
        for k in start + 1..=end {
            if xs[k] < xs[lo] {
                lo = k;
            }
            if xs[k] > xs[hi] {
                hi = k;
            }
        }
        if Difference::between(xs[hi].value(), xs[lo].value()).abs_le(eps.value()) {
            out.least_n = Some(n);
            return Ok(out);
        }
        out.witnesses.push(Witness {
            n,
            i: lo.min(hi) as u64,
            j: lo.max(hi) as u64,
        });
    }
    Ok(out)
}

/// The same search, comparing every pair of every window.
pub fn least_metastable_pairwise(
    xs: &[UnitRational],
    eps: &PosRational,
    g: &CounterFunc,
    search_cap: u64,
) -> Result<Option<u64>> {
    for n in 0..=search_cap {
        let end = window_end(n, g, xs.len())?;
        let window = &xs[n as usize..=end];
        let ok = window.iter().enumerate().all(|(a, xa)| {
            window[a + 1..]
                .iter()
                .all(|xb| Difference::between(xa.value(), xb.value()).abs_le(eps.value()))
        });
        if ok {
            return Ok(Some(n));
        }
    }
    Ok(None)
}

/// Whether every stored witness lies in its window and is more than `ε` apart,
/// and every rejected `N` has one.
pub fn witnesses_valid(xs: &[UnitRational], eps: &PosRational, g: &CounterFunc, search: &MetaSearch) -> bool {
    let rejected = match search.least_n {
        Some(n) => n,
        None if eps.value() >= &Rational::one() => return false,
        None => search.search_cap + 1,
    };
    if search.witnesses.len() as u64 != rejected {
        return false;
    }
    search.witnesses.iter().enumerate().all(|(k, w)| {
        let end = g.wt(&Nat::from(w.n));
        w.n == k as u64
            && w.n <= w.i
            && w.i <= w.j
            && Nat::from(w.j) <= end
            && (w.j as usize) < xs.len()
            && !Difference::between(xs[w.i as usize].value(), xs[w.j as usize].value()).abs_le(eps.value())
    })
}

/// `max_{N ≤ bound} (N + g(N)) + 1`: how many points a search up to `bound`
/// consults.
pub fn needed_horizon(bound: &Nat, g: &CounterFunc) -> Result<Nat> {
    Ok(&g.max_wt_up_to(bound)? + 1)
}
