//! Greedy generators for `B_h[g]` sequences.
//!
//! [`classic_greedy`] always takes the smallest integer above the previous
//! term that keeps the set `B_h[g]`. [`strong_greedy`] takes the smallest
//! positive integer not yet used that keeps the set *strong*: `B_h[g]`, and
//! for every `s = 1..=g` the number of sums with at least `s`
//! representations stays at most `n^(h + (1 - s)(h - 1)/g)`. That extra
//! condition is what yields the growth bound `a_n <= 2g * n^(h + (h-1)/g)`.
//!
//! Candidate testing reads a frozen [`SumTableSet`] and may run on several
//! threads; the accepted candidate is always the smallest admissible one.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sumrep::{CandidateDelta, RepProfile, SumTable, SumTableSet, DEFAULT_ENTRY_CAP};
use crate::threshold::{greedy_bound, Threshold};

/// Candidates handed to the worker pool per round.
const SCAN_BLOCK: u64 = 8192;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Params {
    pub h: usize,
    pub g: usize,
    pub n_terms: usize,
}

impl Params {
    pub fn new(h: usize, g: usize, n_terms: usize) -> Result<Self> {
        let p = Self { h, g, n_terms };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.h < 2 {
            return Err(Error::InvalidParams(format!(
                "h must be at least 2, got {}",
                self.h
            )));
        }
        if self.g < 1 {
            return Err(Error::InvalidParams("g must be at least 1".into()));
        }
        if self.n_terms < 1 {
            return Err(Error::InvalidParams("n_terms must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Classic,
    Strong,
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Classic => "classic",
            Algorithm::Strong => "strong",
        })
    }
}

impl std::str::FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "classic" => Ok(Algorithm::Classic),
            "strong" => Ok(Algorithm::Strong),
            other => Err(format!("unknown algorithm {other:?}")),
        }
    }
}

/// Bookkeeping for one generated term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepMeta {
    /// 1-based index of the term.
    pub n: usize,
    pub term: u64,
    /// Candidates actually tested (members skipped by the scan excluded).
    pub scan_length: u64,
    /// Largest value the scan was allowed to reach for this term.
    pub bound_value: u64,
    #[serde(with = "micros")]
    pub elapsed: Duration,
}

mod micros {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_micros() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        u64::deserialize(d).map(Duration::from_micros)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub params: Params,
    pub algorithm: Algorithm,
    /// Terms in generation order.
    pub terms: Vec<u64>,
    pub per_step: Vec<StepMeta>,
}

impl SequenceRecord {
    /// Whether the terms happen to come out increasing.
    pub fn is_sorted(&self) -> bool {
        self.terms.windows(2).all(|w| w[0] < w[1])
    }
}

/// Why a candidate is not admissible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rejection {
    /// Already an element.
    Member,
    /// Adding the candidate gives `x` more than `g` representations.
    NotBhg { x: u64, count: u64 },
    /// `R_s` of the enlarged set would exceed its strong-set cap.
    Strong { s: usize, count: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Accept,
    Reject(Rejection),
}

impl Verdict {
    pub fn is_accept(&self) -> bool {
        matches!(self, Verdict::Accept)
    }
}

/// Per-step state shared by every candidate test: the frozen tables, the
/// current `R_s` profile and the integer caps `floor(n^(h + (1-s)(h-1)/g))`.
#[derive(Debug)]
pub struct StepContext<'a> {
    table: &'a SumTableSet,
    g: usize,
    profile: RepProfile,
    /// `caps[s - 1]`; `R_s <= caps[s - 1]` iff `R_s` meets its threshold.
    caps: Vec<u64>,
    strong: bool,
}

impl<'a> StepContext<'a> {
    /// Context for choosing element number `n_next = |A| + 1` of a strong set.
    pub fn strong(table: &'a SumTableSet, g: usize, n_next: usize) -> Self {
        let h = table.order();
        let caps = (1..=g)
            .map(|s| {
                Threshold::strong_condition(n_next as u64, h, g, s)
                    .floor_u64()
                    .unwrap_or(u64::MAX)
            })
            .collect();
        Self {
            table,
            g,
            profile: table.rep_histogram(g),
            caps,
            strong: true,
        }
    }

    /// Context that only checks the `B_h[g]` property.
    pub fn bhg_only(table: &'a SumTableSet, g: usize) -> Self {
        Self {
            table,
            g,
            profile: table.rep_histogram(g),
            caps: Vec::new(),
            strong: false,
        }
    }

    pub fn profile(&self) -> &RepProfile {
        &self.profile
    }

    /// Full verdict for a precomputed delta. Reports the smallest
    /// overloaded sum, or the smallest failing `s`.
    pub fn judge(&self, delta: &CandidateDelta) -> Verdict {
        if self.table.contains(delta.m) {
            return Verdict::Reject(Rejection::Member);
        }
        let mut worst: Option<(u64, u64)> = None;
        for (&x, &add) in &delta.added {
            let count = self.table.rep_count(x) + add;
            if count > self.g as u64 && worst.is_none_or(|(wx, _)| x < wx) {
                worst = Some((x, count));
            }
        }
        if let Some((x, count)) = worst {
            return Verdict::Reject(Rejection::NotBhg { x, count });
        }
        if !self.strong {
            return Verdict::Accept;
        }
        let mut raised = vec![0u64; self.g];
        for (&x, &add) in &delta.added {
            self.bump(&mut raised, self.table.rep_count(x), add);
        }
        self.strong_verdict(&raised)
    }

    fn bump(&self, raised: &mut [u64], old: u64, add: u64) {
        // sums whose count moves from `old` to `old + add` newly reach
        // every level s in old+1..=old+add
        let lo = old as usize;
        let hi = ((old + add) as usize).min(self.g);
        for slot in raised.iter_mut().take(hi).skip(lo) {
            *slot += 1;
        }
    }

    fn strong_verdict(&self, raised: &[u64]) -> Verdict {
        for s in 1..=self.g {
            let count = self.profile.get(s) + raised[s - 1];
            if count > self.caps[s - 1] {
                return Verdict::Reject(Rejection::Strong { s, count });
            }
        }
        Verdict::Accept
    }

    /// Fast admissibility test without materialising a [`CandidateDelta`].
    /// Stops at the first overloaded sum, so the reported `x` is whichever
    /// one the scan met first. Callers must ensure `h*m` plus the largest
    /// `(h-1)`-fold sum fits in a `u64`.
    pub fn evaluate(&self, m: u64, scratch: &mut SumTable) -> Verdict {
        if self.table.contains(m) {
            return Verdict::Reject(Rejection::Member);
        }
        let h = self.table.order();
        let g = self.g as u64;
        scratch.clear();
        for k in 1..=h {
            let shift = m * k as u64;
            for (&y, &c) in self.table.table(h - k) {
                let x = y + shift;
                let slot = scratch.entry(x).or_insert(0);
                *slot += c;
                let count = self.table.rep_count(x) + *slot;
                if count > g {
                    return Verdict::Reject(Rejection::NotBhg { x, count });
                }
            }
        }
        if !self.strong {
            return Verdict::Accept;
        }
        let mut raised = vec![0u64; self.g];
        for (&x, &add) in scratch.iter() {
            self.bump(&mut raised, self.table.rep_count(x), add);
        }
        self.strong_verdict(&raised)
    }
}

/// Whether `A ∪ {m}` is a strong `B_h[g]` set, given `A`'s tables and the
/// delta of `m`. `n_next` must be `|A| + 1`.
pub fn is_strong_candidate(t: &SumTableSet, delta: &CandidateDelta, n_next: usize, g: usize) -> Verdict {
    debug_assert_eq!(n_next, t.len() + 1);
    StepContext::strong(t, g, n_next).judge(delta)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GreedyOptions {
    /// Scan threads; `1` runs inline, `0` uses every available core.
    pub workers: usize,
    pub entry_cap: usize,
    /// Overrides the default classic-greedy scan ceiling for every step.
    pub classic_ceiling: Option<u64>,
    /// Abort once a step starts after this much wall time.
    pub time_limit: Option<Duration>,
}

impl Default for GreedyOptions {
    fn default() -> Self {
        Self {
            workers: 1,
            entry_cap: DEFAULT_ENTRY_CAP,
            classic_ceiling: None,
            time_limit: None,
        }
    }
}

/// What an observer sees after each step is decided, before it is committed.
pub struct StepEvent<'a> {
    /// Tables of the terms generated so far (the new term not yet added).
    pub table: &'a SumTableSet,
    pub meta: &'a StepMeta,
}

pub type Observer<'o> = &'o mut dyn FnMut(&StepEvent<'_>);

/// Default classic-greedy scan ceiling for term `n`: `2n^(2h-1) + 1` when
/// `g = 1`, otherwise the unproven guard `2g * n^(2h-1)`.
pub fn classic_ceiling(n: usize, h: usize, g: usize) -> u64 {
    let base = Threshold::classic_bound(n as u64, h)
        .floor_u64()
        .unwrap_or(u64::MAX);
    if g == 1 {
        base.saturating_add(1)
    } else {
        base.saturating_mul(g as u64)
    }
}

/// Generates `params.n_terms` terms with the strong greedy rule.
pub fn strong_greedy(
    params: Params,
    opts: &GreedyOptions,
    observer: Option<Observer<'_>>,
) -> Result<SequenceRecord> {
    run(params, Algorithm::Strong, opts, observer)
}

/// Generates `params.n_terms` terms with the classic increasing greedy rule.
pub fn classic_greedy(
    params: Params,
    opts: &GreedyOptions,
    observer: Option<Observer<'_>>,
) -> Result<SequenceRecord> {
    run(params, Algorithm::Classic, opts, observer)
}

pub fn generate(
    params: Params,
    algorithm: Algorithm,
    opts: &GreedyOptions,
    observer: Option<Observer<'_>>,
) -> Result<SequenceRecord> {
    run(params, algorithm, opts, observer)
}

fn run(
    params: Params,
    algorithm: Algorithm,
    opts: &GreedyOptions,
    mut observer: Option<Observer<'_>>,
) -> Result<SequenceRecord> {
    params.validate()?;
    let Params { h, g, n_terms } = params;
    let pool = build_pool(opts.workers)?;
    let mut table = SumTableSet::with_entry_cap(h, opts.entry_cap)?;
    let mut terms = Vec::with_capacity(n_terms);
    let mut per_step = Vec::with_capacity(n_terms);
    let run_started = Instant::now();

    for n in 1..=n_terms {
        if let Some(limit) = opts.time_limit {
            if run_started.elapsed() > limit {
                return Err(Error::TimeLimitExceeded {
                    n,
                    limit_ms: limit.as_millis() as u64,
                });
            }
        }
        let started = Instant::now();
        let (lo, ceiling) = match algorithm {
            Algorithm::Strong => {
                let ceiling = greedy_bound(n as u64, h, g).floor_u64().unwrap_or(u64::MAX);
                (1, ceiling)
            }
            Algorithm::Classic => {
                let ceiling = opts.classic_ceiling.unwrap_or_else(|| classic_ceiling(n, h, g));
                (terms.last().map_or(1, |&t: &u64| t + 1), ceiling)
            }
        };
        check_scan_range(&table, ceiling)?;
        let ctx = match algorithm {
            Algorithm::Strong => StepContext::strong(&table, g, n),
            Algorithm::Classic => StepContext::bhg_only(&table, g),
        };
        let found = scan_smallest(pool.as_ref(), lo, ceiling, |scratch, m| {
            ctx.evaluate(m, scratch).is_accept()
        });
        let term = match found {
            Some(m) => m,
            None => {
                return Err(match algorithm {
                    Algorithm::Strong => Error::ScanExceededBound { n, ceiling },
                    Algorithm::Classic => Error::ScanExceededConfiguredLimit { n, ceiling },
                })
            }
        };
        let members_below = table.elements().iter().filter(|&&a| a >= lo && a < term).count() as u64;
        let meta = StepMeta {
            n,
            term,
            scan_length: term - lo + 1 - members_below,
            bound_value: ceiling,
            elapsed: started.elapsed(),
        };
        if let Some(obs) = observer.as_mut() {
            obs(&StepEvent {
                table: &table,
                meta: &meta,
            });
        }
        table.add_element(term)?;
        terms.push(term);
        per_step.push(meta);
    }

    Ok(SequenceRecord {
        params,
        algorithm,
        terms,
        per_step,
    })
}

fn build_pool(workers: usize) -> Result<Option<rayon::ThreadPool>> {
    if workers == 1 {
        return Ok(None);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map(Some)
        .map_err(|e| Error::InvalidParams(format!("cannot start scan workers: {e}")))
}

/// Every sum formed while testing candidates up to `ceiling` must fit in a
/// `u64`: at most `h * ceiling` plus the largest `(h-1)`-fold sum.
fn check_scan_range(table: &SumTableSet, ceiling: u64) -> Result<()> {
    let h = table.order() as u64;
    let largest = table.elements().last().copied().unwrap_or(0);
    ceiling
        .checked_mul(h)
        .and_then(|v| largest.checked_mul(h - 1).and_then(|w| v.checked_add(w)))
        .map(|_| ())
        .ok_or(Error::Overflow("scanning candidates"))
}

/// Smallest `m` in `lo..=hi` with `accept(m)`. Blocks of candidates are
/// tested in parallel; a block is only consulted once every earlier block
/// came up empty, and within a block the leftmost hit wins.
fn scan_smallest<F>(pool: Option<&rayon::ThreadPool>, lo: u64, hi: u64, accept: F) -> Option<u64>
where
    F: Fn(&mut SumTable, u64) -> bool + Sync,
{
    if lo > hi {
        return None;
    }
    let Some(pool) = pool else {
        let mut scratch = SumTable::default();
        return (lo..=hi).find(|&m| accept(&mut scratch, m));
    };
    pool.install(|| {
        let mut start = lo;
        loop {
            let end = start.saturating_add(SCAN_BLOCK - 1).min(hi);
            let hit = (0..(end - start) as usize + 1)
                .into_par_iter()
                .with_min_len(64)
                .map_init(SumTable::default, |scratch, i| {
                    let m = start + i as u64;
                    (m, accept(scratch, m))
                })
                .find_first(|&(_, ok)| ok)
                .map(|(m, _)| m);
            if hit.is_some() || end == hi {
                return hit;
            }
            start = end + 1;
        }
    })
}
