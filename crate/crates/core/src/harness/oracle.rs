use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::sim::Window;

/// Largest state space `exact_small_system` accepts.
pub const MAX_STATES: usize = 100_000;

/// Exact law of `(X_t(1), ..., X_t(k))` for a few particles on a closed window.
#[derive(Debug, Clone)]
pub struct SmallSystemLaw {
    /// Decreasing position tuples.
    pub states: Vec<Vec<i64>>,
    pub probs: Vec<f64>,
    /// Poisson mass dropped by the uniformization truncation.
    pub truncation: f64,
}

impl SmallSystemLaw {
    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Law of `X_t(label)`, labels starting at 1.
    pub fn marginal(&self, label: usize) -> BTreeMap<i64, f64> {
        let mut m = BTreeMap::new();
        for (s, p) in self.states.iter().zip(&self.probs) {
            *m.entry(s[label - 1]).or_insert(0.0) += p;
        }
        m
    }

    /// `P(X_t(label) > a)`.
    pub fn survival(&self, label: usize, a: i64) -> f64 {
        self.states.iter().zip(&self.probs).filter(|(s, _)| s[label - 1] > a).map(|(_, p)| p).sum()
    }

    pub fn prob_of(&self, state: &[i64]) -> f64 {
        self.states.iter().position(|s| s == state).map_or(0.0, |i| self.probs[i])
    }
}

fn enumerate(k: usize, lo: i64, hi: i64, prefix: &mut Vec<i64>, out: &mut Vec<Vec<i64>>) {
    if prefix.len() == k {
        out.push(prefix.clone());
        return;
    }
    let top = prefix.last().map_or(hi, |&x| x - 1);
    let remaining = (k - prefix.len() - 1) as i64;
    let mut x = top;
    while x - remaining >= lo {
        prefix.push(x);
        enumerate(k, lo, hi, prefix, out);
        prefix.pop();
        x -= 1;
    }
}

fn state_count(width: u64, k: u64) -> u64 {
    let mut c = 1u64;
    for i in 0..k {
        c = c.saturating_mul(width.saturating_sub(i)) / (i + 1);
    }
    c
}

/// Forward equation solved by uniformization with rate bound `k`; the Poisson
/// series is cut once the remaining mass is below `1e-13`.
pub fn exact_small_system(positions: &[i64], t: f64, window: Window) -> Result<SmallSystemLaw> {
    let k = positions.len();
    if k == 0 || k > 3 {
        return Err(Error::invalid("positions", "need 1 to 3 particles"));
    }
    if positions.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::invalid("positions", "must be strictly decreasing"));
    }
    if !positions.iter().all(|&x| window.contains(x)) {
        return Err(Error::invalid("positions", "must lie in the window"));
    }
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::invalid("t", "must be finite and non-negative"));
    }
    let count = state_count(window.len() as u64, k as u64);
    if count > MAX_STATES as u64 {
        return Err(Error::StateSpaceTooLarge { states: count as usize, limit: MAX_STATES });
    }
    let mut states = Vec::with_capacity(count as usize);
    enumerate(k, window.lo, window.hi, &mut Vec::with_capacity(k), &mut states);
    let index: HashMap<Vec<i64>, usize> = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();

    // one uniformized step: each particle attempts a jump with probability 1/k
    let lambda = k as f64;
    let moves: Vec<Vec<usize>> = states
        .iter()
        .map(|s| {
            (0..k)
                .filter_map(|i| {
                    let target = s[i] + 1;
                    let blocked = if i == 0 { target > window.hi } else { target == s[i - 1] };
                    if blocked {
                        return None;
                    }
                    let mut n = s.clone();
                    n[i] = target;
                    Some(index[&n])
                })
                .collect()
        })
        .collect();

    let mut v = vec![0.0; states.len()];
    v[index[positions]] = 1.0;
    let mut out = vec![0.0; states.len()];
    let mu = lambda * t;
    let mut log_w = -mu;
    let mut mass = 0.0;
    let mut m = 0u64;
    loop {
        let w = log_w.exp();
        for (o, x) in out.iter_mut().zip(&v) {
            *o += w * x;
        }
        mass += w;
        if 1.0 - mass < 1e-13 && m as f64 > mu {
            break;
        }
        let mut next = vec![0.0; states.len()];
        for (i, p) in v.iter().enumerate() {
            if *p == 0.0 {
                continue;
            }
            let go = p / lambda;
            let mut stay = *p;
            for &j in &moves[i] {
                next[j] += go;
                stay -= go;
            }
            next[i] += stay;
        }
        v = next;
        m += 1;
        log_w += mu.ln() - (m as f64).ln();
        if m > 100_000 {
            return Err(Error::NonConvergence { last_term: w });
        }
    }
    Ok(SmallSystemLaw { states, probs: out, truncation: (1.0 - mass).max(0.0) })
}
