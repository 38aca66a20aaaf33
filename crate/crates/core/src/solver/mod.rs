//! Strategy search: exhaustive optimization with tie reporting, seeded local search, and
//! bounds over the admissible strategy space.

mod space;

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use space::StrategySpace;

use crate::engine::{EUReport, Engine, Strategy};
use crate::error::{Error, Result};
use crate::TOLERANCE;

/// Default bound on the number of admissible strategies evaluated exhaustively.
pub const DEFAULT_STRATEGY_CAP: u64 = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Exhaustive,
    Local,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub best: EUReport,
    /// Number of distinct strategies evaluated.
    pub explored: usize,
    pub method: Method,
    /// Strategies within tolerance of the best total, in canonical order (exhaustive only).
    pub ties: Vec<Strategy>,
    /// Whether the result is a proven optimum.
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    pub min: f64,
    pub argmin: Strategy,
    pub max: f64,
    pub argmax: Strategy,
    pub explored: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Guarantee {
    pub threshold: f64,
    pub holds: bool,
    /// The worst strategy and its expected utility when the guarantee fails.
    pub counterexample: Option<(Strategy, f64)>,
}

fn evaluate_all(
    engine: &dyn Engine,
    space: &StrategySpace<'_>,
    cap: u64,
) -> Result<Vec<(Strategy, f64)>> {
    let strategies = space.enumerate(cap)?;
    if strategies.is_empty() {
        return Err(Error::NoAdmissibleStrategy);
    }
    strategies
        .into_iter()
        .map(|s| {
            let total = engine.expected_utility(&s)?.total;
            Ok((s, total))
        })
        .collect()
}

/// Evaluates every admissible strategy and returns the best one. Ties within tolerance are
/// broken towards the smallest strategy in canonical order.
pub fn solve_exhaustive(
    engine: &dyn Engine,
    space: &StrategySpace<'_>,
    cap: u64,
) -> Result<Solution> {
    let evaluated = evaluate_all(engine, space, cap)?;
    let max = evaluated
        .iter()
        .map(|(_, t)| *t)
        .fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<Strategy> = evaluated
        .iter()
        .filter(|(_, t)| *t >= max - TOLERANCE)
        .map(|(s, _)| s.clone())
        .collect();
    Ok(Solution {
        best: engine.expected_utility(&ties[0])?,
        explored: evaluated.len(),
        method: Method::Exhaustive,
        ties,
        certified: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LocalOptions {
    pub seed: u64,
    pub restarts: usize,
    pub max_steps: usize,
}

impl Default for LocalOptions {
    fn default() -> Self {
        LocalOptions {
            seed: 0,
            restarts: 8,
            max_steps: 1000,
        }
    }
}

struct Search<'e, 's> {
    engine: &'e dyn Engine,
    space: &'s StrategySpace<'s>,
    cache: HashMap<Strategy, f64>,
}

impl Search<'_, '_> {
    fn value(&mut self, s: &Strategy) -> Result<f64> {
        if let Some(&v) = self.cache.get(s) {
            return Ok(v);
        }
        let v = self.engine.expected_utility(s)?.total;
        self.cache.insert(s.clone(), v);
        Ok(v)
    }

    fn group_moves(&self, s: &Strategy) -> Vec<Strategy> {
        let gp = self.space.program();
        let mut out = Vec::new();
        for (g, group) in gp.groups.iter().enumerate() {
            for alt in 0..group.members.len() {
                if alt != s.groups[g] {
                    let mut n = s.clone();
                    n.groups[g] = alt;
                    out.push(n);
                }
            }
        }
        out
    }

    fn flips(&self, s: &Strategy) -> Vec<Strategy> {
        (0..s.free.len())
            .map(|i| {
                let mut n = s.clone();
                n.free[i] = !n.free[i];
                n
            })
            .collect()
    }

    /// Single moves: reassign one group, or flip one free decision, in canonical order.
    fn moves(&self, s: &Strategy) -> Vec<Strategy> {
        let mut out = self.group_moves(s);
        out.extend(self.flips(s));
        out
    }

    /// Best admissible candidate, ties broken towards the canonically smallest strategy.
    fn best_of(&mut self, candidates: Vec<Strategy>) -> Result<Option<(Strategy, f64)>> {
        let mut best: Option<(Strategy, f64)> = None;
        for m in candidates {
            let Some(m) = self.repair(m) else { continue };
            let v = self.value(&m)?;
            let better = match &best {
                None => true,
                Some((bs, bv)) => v > bv + TOLERANCE || (v >= bv - TOLERANCE && m < *bs),
            };
            if better {
                best = Some((m, v));
            }
        }
        Ok(best)
    }

    /// Improves the free decisions of `s` by single flips while that strictly helps. Free
    /// decisions guarded by one group alternative only pay off together with it, so a group
    /// reassignment is judged after this completion.
    fn complete(&mut self, mut s: Strategy, max_steps: usize) -> Result<(Strategy, f64)> {
        let mut value = self.value(&s)?;
        for _ in 0..max_steps {
            match self.best_of(self.flips(&s))? {
                Some((m, v)) if v > value + TOLERANCE => {
                    s = m;
                    value = v;
                }
                _ => break,
            }
        }
        Ok((s, value))
    }

    /// Greedily applies the move that most reduces the number of violated constraints.
    fn repair(&self, mut s: Strategy) -> Option<Strategy> {
        let limit = self.space.program().decisions.len() + 1;
        for _ in 0..limit {
            let violations = self.space.violations(&s);
            if violations == 0 {
                return Some(s);
            }
            let (best, fewer) = self
                .moves(&s)
                .into_iter()
                .map(|m| {
                    let v = self.space.violations(&m);
                    (m, v)
                })
                .min_by_key(|(_, v)| *v)?;
            if fewer >= violations {
                return None;
            }
            s = best;
        }
        None
    }

    fn climb(&mut self, start: Strategy, max_steps: usize) -> Result<(Strategy, f64)> {
        let mut current = start;
        let mut value = self.value(&current)?;
        for _ in 0..max_steps {
            let mut candidates = Vec::new();
            for m in self.group_moves(&current) {
                if let Some(m) = self.repair(m) {
                    candidates.push(self.complete(m, max_steps)?.0);
                }
            }
            candidates.extend(self.flips(&current));
            match self.best_of(candidates)? {
                Some((m, v)) if v > value + TOLERANCE => {
                    current = m;
                    value = v;
                }
                _ => break,
            }
        }
        Ok((current, value))
    }
}

/// Seeded steepest-ascent hill climbing with random admissible restarts. Deterministic for
/// a given seed; the result is not certified optimal.
pub fn solve_local(
    engine: &dyn Engine,
    space: &StrategySpace<'_>,
    options: LocalOptions,
) -> Result<Solution> {
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut search = Search {
        engine,
        space,
        cache: HashMap::new(),
    };
    let mut best: Option<(Strategy, f64)> = None;
    for _ in 0..options.restarts.max(1) {
        let start = space.sample(&mut rng).ok_or(Error::NoAdmissibleStrategy)?;
        let (s, v) = search.climb(start, options.max_steps)?;
        let better = match &best {
            None => true,
            Some((bs, bv)) => v > bv + TOLERANCE || (v >= bv - TOLERANCE && s < *bs),
        };
        if better {
            best = Some((s, v));
        }
    }
    let (strategy, _) = best.expect("at least one restart");
    Ok(Solution {
        best: engine.expected_utility(&strategy)?,
        explored: search.cache.len(),
        method: Method::Local,
        ties: Vec::new(),
        certified: false,
    })
}

/// Minimum and maximum expected utility over all admissible strategies, with the smallest
/// witness in canonical order for each.
pub fn verify_bounds(
    engine: &dyn Engine,
    space: &StrategySpace<'_>,
    cap: u64,
) -> Result<BoundsReport> {
    let evaluated = evaluate_all(engine, space, cap)?;
    let min = evaluated
        .iter()
        .map(|(_, t)| *t)
        .fold(f64::INFINITY, f64::min);
    let max = evaluated
        .iter()
        .map(|(_, t)| *t)
        .fold(f64::NEG_INFINITY, f64::max);
    let witness = |target: f64| {
        evaluated
            .iter()
            .find(|(_, t)| (t - target).abs() <= TOLERANCE)
            .map(|(s, _)| s.clone())
            .expect("extremum is attained")
    };
    Ok(BoundsReport {
        min,
        argmin: witness(min),
        max,
        argmax: witness(max),
        explored: evaluated.len(),
    })
}

/// Holds iff every admissible strategy reaches at least `threshold` (within tolerance).
pub fn check_guarantee(bounds: &BoundsReport, threshold: f64) -> Guarantee {
    let holds = bounds.min + TOLERANCE >= threshold;
    Guarantee {
        threshold,
        holds,
        counterexample: (!holds).then(|| (bounds.argmin.clone(), bounds.min)),
    }
}
