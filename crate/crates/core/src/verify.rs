//! From-scratch validation.
//!
//! Nothing in this module reads [`SumTableSet`](crate::sumrep::SumTableSet)
//! or the generator's cached state. Representation counts are rebuilt by
//! enumerating multisets, candidate windows are scanned exhaustively, and
//! every inequality of the growth-bound argument is evaluated exactly on the
//! generated data:
//!
//! * `|F_{1,n}| = 0`, and `|F_{0,n}|`, `|F_{s,n}|` at most `2n^(h+(h-1)/g)`;
//! * members plus all forbidden candidates number at most
//!   `2g(n+1)^(h+(h-1)/g) - 1`;
//! * `R_s(A ∪ m) <= R_s(A) + T_s(m)` for every candidate `m` in the window;
//! * `T_s(m) > n^(h-1+(1-s)(h-1)/g)` for every `m` in `F_{s,n}`;
//! * `Σ_m T_s(m) <= (1 + n + ... + n^(h-1)) R_{s-1}(A)`.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greedy::{Algorithm, SequenceRecord};
use crate::sumrep::multiset_count;
use crate::threshold::Threshold;

/// Default cap on multisets enumerated by a single brute-force pass.
pub const DEFAULT_ENUMERATION_LIMIT: u128 = 50_000_000;

/// Default cap on `window length * per-candidate work` for a window scan.
pub const DEFAULT_SCAN_BUDGET: u128 = 2_000_000_000;

/// Detailed, fully brute-forced `(R)` instances recorded per step.
const DETAILED_SAMPLES: usize = 6;

// ---------------------------------------------------------------------------
// enumeration

/// Sum histogram of all size-`j` multisets of `elements` (which must be
/// distinct), by direct recursion.
pub fn multiset_sums(elements: &[u64], j: usize, limit: u128) -> Result<BTreeMap<u64, u64>> {
    let mut sorted = elements.to_vec();
    sorted.sort_unstable();
    if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::RepeatedTerm(w[0]));
    }
    let needed = multiset_count(sorted.len() as u64, j as u32).unwrap_or(u128::MAX);
    if needed > limit {
        return Err(Error::EnumerationLimit { needed, limit });
    }
    if let Some(&top) = sorted.last() {
        top.checked_mul(j as u64)
            .ok_or(Error::Overflow("enumerating sums"))?;
    }
    fn walk(sorted: &[u64], start: usize, left: usize, acc: u64, out: &mut BTreeMap<u64, u64>) {
        if left == 0 {
            *out.entry(acc).or_insert(0) += 1;
            return;
        }
        for i in start..sorted.len() {
            walk(sorted, i, left - 1, acc + sorted[i], out);
        }
    }
    let mut out = BTreeMap::new();
    walk(&sorted, 0, j, 0, &mut out);
    Ok(out)
}

fn profile_of(r: &BTreeMap<u64, u64>, g: usize) -> Vec<u64> {
    (1..=g)
        .map(|s| r.values().filter(|&&c| c >= s as u64).count() as u64)
        .collect()
}

// ---------------------------------------------------------------------------
// B_h[g] and strong-set checks

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum BhgCheck {
    Ok,
    /// Smallest `x` with more than `g` representations.
    Violation {
        x: u64,
        count: u64,
    },
}

impl BhgCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, BhgCheck::Ok)
    }
}

pub fn verify_bhg(elements: &[u64], h: usize, g: usize, limit: u128) -> Result<BhgCheck> {
    let r = multiset_sums(elements, h, limit)?;
    Ok(bhg_of(&r, g))
}

fn bhg_of(r: &BTreeMap<u64, u64>, g: usize) -> BhgCheck {
    r.iter()
        .find(|(_, &c)| c > g as u64)
        .map_or(BhgCheck::Ok, |(&x, &count)| BhgCheck::Violation { x, count })
}

/// `R_s` against its strong-set cap.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelCheck {
    pub s: usize,
    pub count: u64,
    pub threshold: Threshold,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixReport {
    pub n: usize,
    pub bhg: BhgCheck,
    pub levels: Vec<LevelCheck>,
}

impl PrefixReport {
    pub fn is_strong(&self) -> bool {
        self.bhg.is_ok() && self.levels.iter().all(|l| l.ok)
    }
}

/// Checks both strong-set conditions on every prefix of `terms`.
pub fn verify_strong_prefixes(terms: &[u64], h: usize, g: usize, limit: u128) -> Result<Vec<PrefixReport>> {
    check_distinct(terms)?;
    (1..=terms.len())
        .map(|n| {
            let r = multiset_sums(&terms[..n], h, limit)?;
            let levels = profile_of(&r, g)
                .into_iter()
                .enumerate()
                .map(|(i, count)| {
                    let threshold = Threshold::strong_condition(n as u64, h, g, i + 1);
                    LevelCheck {
                        s: i + 1,
                        count,
                        threshold,
                        ok: threshold.admits(count),
                    }
                })
                .collect();
            Ok(PrefixReport {
                n,
                bhg: bhg_of(&r, g),
                levels,
            })
        })
        .collect()
}

/// Checks only the `B_h[g]` property on every prefix.
pub fn verify_bhg_prefixes(terms: &[u64], h: usize, g: usize, limit: u128) -> Result<Vec<(usize, BhgCheck)>> {
    check_distinct(terms)?;
    (1..=terms.len())
        .map(|n| verify_bhg(&terms[..n], h, g, limit).map(|c| (n, c)))
        .collect()
}

fn check_distinct(terms: &[u64]) -> Result<()> {
    let mut seen = HashSet::with_capacity(terms.len());
    for &t in terms {
        if t == 0 {
            return Err(Error::NonPositiveElement(t));
        }
        if !seen.insert(t) {
            return Err(Error::RepeatedTerm(t));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// growth bounds

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundEntry {
    pub n: usize,
    pub term: u64,
    pub bound: Threshold,
    /// Largest integer allowed by the bound.
    pub floor: String,
    pub ok: bool,
    /// `term^denom / bound^denom`, for display.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub entries: Vec<BoundEntry>,
    pub passed: bool,
    pub first_failure: Option<usize>,
    pub max_ratio: f64,
}

fn bound_report(terms: &[u64], bound_for: impl Fn(u64) -> Threshold) -> BoundReport {
    let entries: Vec<BoundEntry> = terms
        .iter()
        .enumerate()
        .map(|(i, &term)| {
            let bound = bound_for(i as u64 + 1);
            BoundEntry {
                n: i + 1,
                term,
                bound,
                floor: bound.floor().to_string(),
                ok: bound.admits(term),
                ratio: bound.ratio(term),
            }
        })
        .collect();
    let first_failure = entries.iter().find(|e| !e.ok).map(|e| e.n);
    let max_ratio = entries.iter().map(|e| e.ratio).fold(0.0, f64::max);
    BoundReport {
        passed: first_failure.is_none(),
        first_failure,
        max_ratio,
        entries,
    }
}

/// `a_n^g <= (2g)^g n^(hg+h-1)` for every `n`.
pub fn strong_bound_check(rec: &SequenceRecord) -> BoundReport {
    let (h, g) = (rec.params.h, rec.params.g);
    bound_report(&rec.terms, |n| Threshold::growth_bound(n, h, g))
}

/// `a_n <= 2n^(2h-1)`; only proven for `g = 1`.
pub fn classic_bound_check(rec: &SequenceRecord) -> Result<BoundReport> {
    if rec.params.g != 1 {
        return Err(Error::InvalidParams(format!(
            "the classic growth bound is only known for g = 1, got g = {}",
            rec.params.g
        )));
    }
    let h = rec.params.h;
    Ok(bound_report(&rec.terms, |n| Threshold::classic_bound(n, h)))
}

// ---------------------------------------------------------------------------
// window scans

/// Enumerated sum tables of a fixed `A_n` plus the derived thresholds used
/// to classify candidates.
struct Snapshot {
    elements: Vec<u64>,
    h: usize,
    g: usize,
    /// `lower[j]`: size-`j` multiset sums of `A`, `j = 0..h`.
    lower: Vec<Vec<(u64, u64)>>,
    rep: HashMap<u64, u64>,
    profile: Vec<u64>,
    /// `floor((n+1)^(h + (1-s)(h-1)/g))` for `s = 1..=g`.
    next_caps: Vec<u64>,
}

impl Snapshot {
    fn new(elements: &[u64], h: usize, g: usize, limit: u128) -> Result<Self> {
        check_distinct(elements)?;
        let n = elements.len() as u64;
        let lower = (0..h)
            .map(|j| multiset_sums(elements, j, limit).map(|t| t.into_iter().collect()))
            .collect::<Result<Vec<_>>>()?;
        let r = multiset_sums(elements, h, limit)?;
        let profile = profile_of(&r, g);
        let next_caps = (1..=g)
            .map(|s| {
                Threshold::strong_condition(n + 1, h, g, s)
                    .floor_u64()
                    .unwrap_or(u64::MAX)
            })
            .collect();
        let mut sorted = elements.to_vec();
        sorted.sort_unstable();
        Ok(Self {
            elements: sorted,
            h,
            g,
            lower,
            rep: r.into_iter().collect(),
            profile,
            next_caps,
        })
    }

    fn n(&self) -> u64 {
        self.elements.len() as u64
    }

    fn is_member(&self, m: u64) -> bool {
        self.elements.binary_search(&m).is_ok()
    }

    fn rep(&self, x: u64) -> u64 {
        self.rep.get(&x).copied().unwrap_or(0)
    }

    fn work_per_candidate(&self) -> u128 {
        self.lower.iter().map(|t| t.len() as u128).sum::<u128>().max(1)
    }

    /// Window `[1, floor(2g (n+1)^(h+(h-1)/g))]` after checking the scan
    /// budget and that every sum formed stays in range.
    fn window(&self, budget: u128) -> Result<u64> {
        let top = Threshold::growth_bound(self.n() + 1, self.h, self.g)
            .floor_u64()
            .ok_or(Error::Overflow("sizing the candidate window"))?;
        let needed = u128::from(top) * self.work_per_candidate();
        if needed > budget {
            return Err(Error::ScanBudgetExceeded {
                needed,
                limit: budget,
            });
        }
        let largest = self.elements.last().copied().unwrap_or(0);
        top.checked_mul(self.h as u64)
            .and_then(|v| v.checked_add(largest * (self.h as u64 - 1)))
            .ok_or(Error::Overflow("sizing the candidate window"))?;
        Ok(top)
    }

    /// Extra representations contributed by `m`: `x -> Σ_k |(h-k)-multisets at x - k m|`.
    fn added(&self, m: u64) -> HashMap<u64, u64> {
        let mut added = HashMap::new();
        for k in 1..=self.h {
            for &(y, c) in &self.lower[self.h - k] {
                *added.entry(y + k as u64 * m).or_insert(0) += c;
            }
        }
        added
    }

    fn classify(&self, m: u64) -> Classified {
        let added = self.added(m);
        let g = self.g;
        let mut not_bhg = false;
        let mut raised = vec![0u64; g];
        // t[s-2] for s = 2..=g: sums reached by m whose old count is >= s-1
        let mut t = vec![0u64; g.saturating_sub(1)];
        for (&x, &add) in &added {
            let old = self.rep(x);
            let new = old + add;
            if new > g as u64 {
                not_bhg = true;
            }
            for s in (old as usize + 1)..=(new as usize).min(g) {
                raised[s - 1] += 1;
            }
            for s in 2..=g {
                if old >= s as u64 - 1 {
                    t[s - 2] += 1;
                }
            }
        }
        let r_new: Vec<u64> = (0..g).map(|i| self.profile[i] + raised[i]).collect();
        let in_fs = (0..g).map(|i| r_new[i] > self.next_caps[i]).collect();
        Classified {
            not_bhg,
            r_new,
            in_fs,
            t,
        }
    }
}

struct Classified {
    not_bhg: bool,
    /// `R_s(A ∪ m)` for `s = 1..=g`.
    r_new: Vec<u64>,
    in_fs: Vec<bool>,
    /// `T_s(m)` for `s = 2..=g`.
    t: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ForbiddenSetReport {
    pub n: usize,
    /// Candidates scanned: `1..=window`.
    pub window: u64,
    pub size_f_n: u64,
    pub size_f_0: u64,
    /// `size_f_s[s - 1] = |F_{s,n}|`.
    pub size_f_s: Vec<u64>,
    pub union_size: u64,
    /// `2g (n+1)^(h+(h-1)/g)`; the union must stay at least one below it.
    pub bound_rhs: Threshold,
    pub union_within_bound: bool,
    pub f1_empty: bool,
    /// Smallest candidate outside every forbidden set.
    pub first_admissible: Option<u64>,
    /// Sums already at the multiplicity cap, `|{x : r(x) = g}|`.
    pub saturated_sums: u64,
}

/// Scan accumulator for one step. Additive, so partial scans merge
/// deterministically regardless of how the window was split.
#[derive(Debug, Clone, Default)]
struct StepTally {
    f0: u64,
    fs: Vec<u64>,
    union: u64,
    first_admissible: Option<u64>,
    /// per s = 2..=g
    t_sum: Vec<u128>,
    r: Vec<ExhaustiveTally>,
    tt: Vec<ExhaustiveTally>,
}

#[derive(Debug, Clone, Default)]
struct ExhaustiveTally {
    instances: u64,
    violations: u64,
    /// (m, lhs, rhs) of the smallest violating candidate
    first: Option<(u64, u64, u64)>,
}

impl ExhaustiveTally {
    fn record(&mut self, m: u64, lhs: u64, rhs: u64, holds: bool) {
        self.instances += 1;
        if !holds {
            self.violations += 1;
            if self.first.is_none_or(|(fm, _, _)| m < fm) {
                self.first = Some((m, lhs, rhs));
            }
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.instances += other.instances;
        self.violations += other.violations;
        self.first = match (self.first, other.first) {
            (Some(a), Some(b)) => Some(if a.0 <= b.0 { a } else { b }),
            (a, b) => a.or(b),
        };
        self
    }
}

impl StepTally {
    fn empty(g: usize) -> Self {
        let extra = g.saturating_sub(1);
        Self {
            fs: vec![0; g],
            t_sum: vec![0; extra],
            r: vec![ExhaustiveTally::default(); extra],
            tt: vec![ExhaustiveTally::default(); extra],
            ..Self::default()
        }
    }

    fn merge(mut self, other: Self) -> Self {
        self.f0 += other.f0;
        self.union += other.union;
        for (a, b) in self.fs.iter_mut().zip(&other.fs) {
            *a += b;
        }
        for (a, b) in self.t_sum.iter_mut().zip(&other.t_sum) {
            *a += b;
        }
        self.r = self.r.into_iter().zip(other.r).map(|(a, b)| a.merge(b)).collect();
        self.tt = self
            .tt
            .into_iter()
            .zip(other.tt)
            .map(|(a, b)| a.merge(b))
            .collect();
        self.first_admissible = match (self.first_admissible, other.first_admissible) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        self
    }
}

fn scan_window(snap: &Snapshot, window: u64) -> StepTally {
    let g = snap.g;
    let n = snap.n();
    let h = snap.h;
    // T_s(m) must exceed n^(h-1+(1-s)(h-1)/g) for every m in F_{s,n}
    let tt_caps: Vec<Threshold> = (2..=g)
        .map(|s| Threshold::new(1, n, ((h - 1) * (g - s + 1)) as u32, g as u32))
        .collect();
    (1..=window)
        .into_par_iter()
        .fold(
            || StepTally::empty(g),
            |mut tally, m| {
                if snap.is_member(m) {
                    tally.union += 1;
                    return tally;
                }
                let c = snap.classify(m);
                if c.not_bhg {
                    tally.f0 += 1;
                }
                for (i, &hit) in c.in_fs.iter().enumerate() {
                    if hit {
                        tally.fs[i] += 1;
                    }
                }
                let forbidden = c.not_bhg || c.in_fs.iter().any(|&b| b);
                if forbidden {
                    tally.union += 1;
                } else if tally.first_admissible.is_none_or(|f| m < f) {
                    tally.first_admissible = Some(m);
                }
                for s in 2..=g {
                    let t = c.t[s - 2];
                    tally.t_sum[s - 2] += u128::from(t);
                    let lhs = c.r_new[s - 1];
                    let rhs = snap.profile[s - 1] + t;
                    tally.r[s - 2].record(m, lhs, rhs, lhs <= rhs);
                    if c.in_fs[s - 1] {
                        let cap = tt_caps[s - 2];
                        let floor = cap.floor_u64().unwrap_or(u64::MAX);
                        tally.tt[s - 2].record(m, t, floor, !cap.admits(t));
                    }
                }
                tally
            },
        )
        .reduce(|| StepTally::empty(g), StepTally::merge)
}

fn forbidden_report(snap: &Snapshot, window: u64, tally: &StepTally) -> ForbiddenSetReport {
    let n = snap.n();
    let bound_rhs = Threshold::growth_bound(n + 1, snap.h, snap.g);
    ForbiddenSetReport {
        n: n as usize,
        window,
        size_f_n: n,
        size_f_0: tally.f0,
        size_f_s: tally.fs.clone(),
        union_size: tally.union,
        bound_rhs,
        union_within_bound: bound_rhs.admits(tally.union + 1),
        f1_empty: tally.fs.first().is_none_or(|&c| c == 0),
        first_admissible: tally.first_admissible,
        saturated_sums: snap.rep.values().filter(|&&c| c == snap.g as u64).count() as u64,
    }
}

/// Classifies every candidate in `[1, floor(2g (n+1)^(h+(h-1)/g))]` as a
/// member, a `B_h[g]` breaker (`F_0`), an `R_s` breaker (`F_s`), or
/// admissible, where `n = |A|`.
pub fn forbidden_set_sizes(
    elements: &[u64],
    h: usize,
    g: usize,
    limit: u128,
    budget: u128,
) -> Result<ForbiddenSetReport> {
    validate_hg(h, g)?;
    let snap = Snapshot::new(elements, h, g, limit)?;
    let window = snap.window(budget)?;
    let tally = scan_window(&snap, window);
    Ok(forbidden_report(&snap, window, &tally))
}

/// `T_s(m)`: the number of distinct `x` with `r_A(x) >= s - 1` that can be
/// written as `k*m` plus a sum of `h - k` elements of `A` for some
/// `1 <= k <= h` (for `k = h` that is `x = h*m`).
pub fn t_count(elements: &[u64], m: u64, s: usize, h: usize, limit: u128) -> Result<u64> {
    if s < 2 {
        return Err(Error::InvalidParams(format!(
            "T_s is defined for s >= 2, got {s}"
        )));
    }
    let r = multiset_sums(elements, h, limit)?;
    let mut reached = BTreeSet::new();
    for k in 1..=h {
        let shift = m
            .checked_mul(k as u64)
            .ok_or(Error::Overflow("shifting a candidate"))?;
        for &y in multiset_sums(elements, h - k, limit)?.keys() {
            reached.insert(
                y.checked_add(shift)
                    .ok_or(Error::Overflow("shifting a candidate"))?,
            );
        }
    }
    Ok(reached
        .into_iter()
        .filter(|x| r.get(x).copied().unwrap_or(0) >= s as u64 - 1)
        .count() as u64)
}

// ---------------------------------------------------------------------------
// proof diagnostics

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    /// `R_s(A_n) <= n^(h+(1-s)(h-1)/g)`.
    StrongCondition,
    /// `|F_{1,n}| = 0`.
    F1Empty,
    /// `|F_{0,n}| <= 2n^(h+(h-1)/g)`.
    F0Bound,
    /// `|F_{s,n}| <= 2n^(h+(h-1)/g)`.
    FsBound,
    /// members plus forbidden `<= 2g(n+1)^(h+(h-1)/g) - 1`.
    UnionBound,
    /// `Σ_m T_s(m) <= (1 + n + ... + n^(h-1)) R_{s-1}(A_n)`.
    TSumBound,
    /// `R_s(A_n ∪ m) <= R_s(A_n) + T_s(m)`.
    RIncrement,
    /// `T_s(m) > n^(h-1+(1-s)(h-1)/g)` for `m` in `F_{s,n}`.
    TLowerOnForbidden,
    /// The smallest admissible candidate is the next generated term.
    NextTermIsSmallestAdmissible,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Check::StrongCondition => "R_s(A_n) <= n^(h+(1-s)(h-1)/g)",
            Check::F1Empty => "|F_1| = 0",
            Check::F0Bound => "|F_0| <= 2n^(h+(h-1)/g)",
            Check::FsBound => "|F_s| <= 2n^(h+(h-1)/g)",
            Check::UnionBound => "|members ∪ forbidden| <= 2g(n+1)^(h+(h-1)/g) - 1",
            Check::TSumBound => "sum_m T_s(m) <= (1+n+...+n^(h-1)) R_{s-1}",
            Check::RIncrement => "R_s(A_n ∪ m) <= R_s(A_n) + T_s(m)",
            Check::TLowerOnForbidden => "T_s(m) > n^(h-1+(1-s)(h-1)/g) on F_s",
            Check::NextTermIsSmallestAdmissible => "a_(n+1) = smallest admissible",
        };
        f.write_str(name)
    }
}

/// Right-hand side of a recorded inequality.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Rhs {
    Exact { value: String },
    Power { threshold: Threshold },
    PowerMinusOne { threshold: Threshold },
}

impl std::fmt::Display for Rhs {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Rhs::Exact { value } => f.write_str(value),
            Rhs::Power { threshold } => write!(f, "{threshold}"),
            Rhs::PowerMinusOne { threshold } => write!(f, "{threshold} - 1"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub check: Check,
    pub n: usize,
    pub s: Option<usize>,
    pub m: Option<u64>,
    pub lhs: String,
    pub rhs: Rhs,
    pub holds: bool,
}

impl std::fmt::Display for Instance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "n={}", self.n)?;
        if let Some(s) = self.s {
            write!(f, " s={s}")?;
        }
        if let Some(m) = self.m {
            write!(f, " m={m}")?;
        }
        write!(
            f,
            " [{}] lhs={} rhs={} {}",
            self.check,
            self.lhs,
            self.rhs,
            if self.holds { "holds" } else { "VIOLATED" }
        )
    }
}

/// A per-candidate inequality checked over a whole window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowCheck {
    pub check: Check,
    pub n: usize,
    pub s: usize,
    pub instances: u64,
    pub violations: u64,
    /// Smallest violating candidate with both sides.
    pub first_violation: Option<Instance>,
}

impl WindowCheck {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }
}

/// A sampled candidate with `R_s(A ∪ m)` rebuilt by full enumeration and
/// `T_s(m)` taken from [`t_count`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TSample {
    pub m: u64,
    pub s: usize,
    pub r_before: u64,
    pub r_after: u64,
    pub t: u64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepDiagnostics {
    pub n: usize,
    pub profile: Vec<u64>,
    pub forbidden: ForbiddenSetReport,
    pub next_term: u64,
    pub instances: Vec<Instance>,
    pub window_checks: Vec<WindowCheck>,
    pub samples: Vec<TSample>,
}

impl StepDiagnostics {
    pub fn holds(&self) -> bool {
        self.instances.iter().all(|i| i.holds)
            && self.window_checks.iter().all(WindowCheck::holds)
            && self.samples.iter().all(|s| s.holds)
    }

    /// Every failing instance, window check or sample, described.
    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .instances
            .iter()
            .filter(|i| !i.holds)
            .map(|i| i.to_string())
            .collect();
        for w in self.window_checks.iter().filter(|w| !w.holds()) {
            let first = w
                .first_violation
                .as_ref()
                .map(|i| i.to_string())
                .unwrap_or_default();
            out.push(format!(
                "n={} s={} [{}] {} of {} candidates violate; first: {}",
                w.n, w.s, w.check, w.violations, w.instances, first
            ));
        }
        for t in self.samples.iter().filter(|t| !t.holds) {
            out.push(format!(
                "n={} s={} m={} [{}] sampled: R_s after={} > R_s before={} + T={}",
                self.n,
                t.s,
                t.m,
                Check::RIncrement,
                t.r_after,
                t.r_before,
                t.t
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofDiagnostics {
    pub h: usize,
    pub g: usize,
    pub algorithm: Algorithm,
    pub n_terms: usize,
    pub steps: Vec<StepDiagnostics>,
    /// Steps `n` that were eligible but not scanned because of the budget.
    pub skipped_steps: Vec<usize>,
}

impl ProofDiagnostics {
    pub fn holds(&self) -> bool {
        self.steps.iter().all(StepDiagnostics::holds)
    }

    pub fn failures(&self) -> Vec<String> {
        self.steps.iter().flat_map(StepDiagnostics::failures).collect()
    }

    /// Whether every recorded instance of `check` holds.
    pub fn check_holds(&self, check: Check) -> bool {
        self.steps.iter().all(|st| {
            st.instances.iter().filter(|i| i.check == check).all(|i| i.holds)
                && st
                    .window_checks
                    .iter()
                    .filter(|w| w.check == check)
                    .all(WindowCheck::holds)
                && (check != Check::RIncrement || st.samples.iter().all(|s| s.holds))
        })
    }

    /// Number of recorded instances of `check` (window checks count each candidate).
    pub fn check_instances(&self, check: Check) -> u64 {
        self.steps
            .iter()
            .map(|st| {
                st.instances.iter().filter(|i| i.check == check).count() as u64
                    + st.window_checks
                        .iter()
                        .filter(|w| w.check == check)
                        .map(|w| w.instances)
                        .sum::<u64>()
                    + if check == Check::RIncrement {
                        st.samples.len() as u64
                    } else {
                        0
                    }
            })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiagnosticsBudget {
    /// At most this many steps are scanned, spread evenly.
    pub max_steps: usize,
    pub enumeration_limit: u128,
    pub scan_budget: u128,
}

impl Default for DiagnosticsBudget {
    fn default() -> Self {
        Self {
            max_steps: usize::MAX,
            enumeration_limit: DEFAULT_ENUMERATION_LIMIT,
            scan_budget: DEFAULT_SCAN_BUDGET,
        }
    }
}

/// Steps `2..=len-1` (the argument needs `n >= 2` and a next term), thinned
/// to at most `max_steps` evenly spaced ones that keep both ends.
fn pick_steps(len: usize, max_steps: usize) -> (Vec<usize>, Vec<usize>) {
    let eligible: Vec<usize> = (2..len).collect();
    if eligible.len() <= max_steps {
        return (eligible, Vec::new());
    }
    if max_steps == 0 {
        return (Vec::new(), eligible);
    }
    let mut chosen: Vec<usize> = if max_steps == 1 {
        vec![eligible[0]]
    } else {
        (0..max_steps)
            .map(|i| eligible[i * (eligible.len() - 1) / (max_steps - 1)])
            .collect()
    };
    chosen.dedup();
    let skipped = eligible.into_iter().filter(|n| !chosen.contains(n)).collect();
    (chosen, skipped)
}

/// Re-derives every inequality of the growth-bound argument on the steps of
/// a strong-greedy run.
pub fn proof_diagnostics(rec: &SequenceRecord, budget: DiagnosticsBudget) -> Result<ProofDiagnostics> {
    let (h, g) = (rec.params.h, rec.params.g);
    validate_hg(h, g)?;
    check_distinct(&rec.terms)?;
    let (chosen, skipped_steps) = pick_steps(rec.terms.len(), budget.max_steps);
    let steps = chosen
        .into_iter()
        .map(|n| step_diagnostics(&rec.terms[..n], rec.terms[n], h, g, budget))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProofDiagnostics {
        h,
        g,
        algorithm: rec.algorithm,
        n_terms: rec.terms.len(),
        steps,
        skipped_steps,
    })
}

fn step_diagnostics(
    prefix: &[u64],
    next_term: u64,
    h: usize,
    g: usize,
    budget: DiagnosticsBudget,
) -> Result<StepDiagnostics> {
    let snap = Snapshot::new(prefix, h, g, budget.enumeration_limit)?;
    let window = snap.window(budget.scan_budget)?;
    let tally = scan_window(&snap, window);
    let forbidden = forbidden_report(&snap, window, &tally);
    let n = prefix.len();
    let nn = n as u64;
    let mut instances = Vec::new();
    let inst = |check, s, m, lhs: String, rhs: Rhs, holds| Instance {
        check,
        n,
        s,
        m,
        lhs,
        rhs,
        holds,
    };

    for s in 1..=g {
        let threshold = Threshold::strong_condition(nn, h, g, s);
        let count = snap.profile[s - 1];
        instances.push(inst(
            Check::StrongCondition,
            Some(s),
            None,
            count.to_string(),
            Rhs::Power { threshold },
            threshold.admits(count),
        ));
    }

    instances.push(inst(
        Check::F1Empty,
        Some(1),
        None,
        forbidden.size_f_s[0].to_string(),
        Rhs::Exact { value: "0".into() },
        forbidden.f1_empty,
    ));

    let per_set = Threshold::new(2, nn, (h * g + h - 1) as u32, g as u32);
    instances.push(inst(
        Check::F0Bound,
        None,
        None,
        forbidden.size_f_0.to_string(),
        Rhs::Power { threshold: per_set },
        per_set.admits(forbidden.size_f_0),
    ));
    for s in 2..=g {
        let size = forbidden.size_f_s[s - 1];
        instances.push(inst(
            Check::FsBound,
            Some(s),
            None,
            size.to_string(),
            Rhs::Power { threshold: per_set },
            per_set.admits(size),
        ));
    }

    instances.push(inst(
        Check::UnionBound,
        None,
        None,
        forbidden.union_size.to_string(),
        Rhs::PowerMinusOne {
            threshold: forbidden.bound_rhs,
        },
        forbidden.union_within_bound,
    ));

    // 1 + n + ... + n^(h-1)
    let geometric: u128 = (0..h as u32).map(|i| u128::from(nn).pow(i)).sum();
    for s in 2..=g {
        let lhs = tally.t_sum[s - 2];
        let rhs = geometric * u128::from(snap.profile[s - 2]);
        instances.push(inst(
            Check::TSumBound,
            Some(s),
            None,
            lhs.to_string(),
            Rhs::Exact {
                value: rhs.to_string(),
            },
            lhs <= rhs,
        ));
    }

    instances.push(inst(
        Check::NextTermIsSmallestAdmissible,
        None,
        Some(next_term),
        next_term.to_string(),
        Rhs::Exact {
            value: forbidden
                .first_admissible
                .map_or("none".into(), |m| m.to_string()),
        },
        forbidden.first_admissible == Some(next_term),
    ));

    let mut window_checks = Vec::new();
    for s in 2..=g {
        let r = &tally.r[s - 2];
        window_checks.push(WindowCheck {
            check: Check::RIncrement,
            n,
            s,
            instances: r.instances,
            violations: r.violations,
            first_violation: r.first.map(|(m, lhs, rhs)| {
                inst(
                    Check::RIncrement,
                    Some(s),
                    Some(m),
                    lhs.to_string(),
                    Rhs::Exact {
                        value: rhs.to_string(),
                    },
                    false,
                )
            }),
        });
        let tt = &tally.tt[s - 2];
        let cap = Threshold::new(1, nn, ((h - 1) * (g - s + 1)) as u32, g as u32);
        window_checks.push(WindowCheck {
            check: Check::TLowerOnForbidden,
            n,
            s,
            instances: tt.instances,
            violations: tt.violations,
            first_violation: tt.first.map(|(m, lhs, _)| {
                inst(
                    Check::TLowerOnForbidden,
                    Some(s),
                    Some(m),
                    lhs.to_string(),
                    Rhs::Power { threshold: cap },
                    false,
                )
            }),
        });
    }

    let samples = sample_candidates(&snap, window, next_term, budget.enumeration_limit)?;

    Ok(StepDiagnostics {
        n,
        profile: snap.profile.clone(),
        forbidden,
        next_term,
        instances,
        window_checks,
        samples,
    })
}

/// Evenly spaced non-members of the window plus the next term, each with
/// both sides of the `R_s` increment inequality rebuilt independently.
fn sample_candidates(snap: &Snapshot, window: u64, next_term: u64, limit: u128) -> Result<Vec<TSample>> {
    if snap.g < 2 {
        return Ok(Vec::new());
    }
    let mut picks: Vec<u64> = (0..DETAILED_SAMPLES as u64)
        .map(|i| 1 + i * (window - 1) / (DETAILED_SAMPLES as u64 - 1))
        .filter(|&m| !snap.is_member(m))
        .collect();
    if !snap.is_member(next_term) {
        picks.push(next_term);
    }
    picks.sort_unstable();
    picks.dedup();

    let mut out = Vec::new();
    for m in picks {
        let mut with = snap.elements.clone();
        with.push(m);
        let after = profile_of(&multiset_sums(&with, snap.h, limit)?, snap.g);
        for s in 2..=snap.g {
            let t = t_count(&snap.elements, m, s, snap.h, limit)?;
            let (r_before, r_after) = (snap.profile[s - 1], after[s - 1]);
            out.push(TSample {
                m,
                s,
                r_before,
                r_after,
                t,
                holds: r_after <= r_before + t,
            });
        }
    }
    Ok(out)
}

fn validate_hg(h: usize, g: usize) -> Result<()> {
    if h < 2 || g < 1 {
        return Err(Error::InvalidParams(format!(
            "need h >= 2 and g >= 1, got h={h} g={g}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::greedy::Params;

    const LIM: u128 = DEFAULT_ENUMERATION_LIMIT;
    const BUDGET: u128 = DEFAULT_SCAN_BUDGET;

    fn record(h: usize, g: usize, terms: Vec<u64>) -> SequenceRecord {
        SequenceRecord {
            params: Params {
                h,
                g,
                n_terms: terms.len(),
            },
            algorithm: Algorithm::Strong,
            terms,
            per_step: Vec::new(),
        }
    }

    #[test]
    fn verify_bhg_examples() {
        assert_eq!(verify_bhg(&[1, 2, 4, 8, 13], 2, 1, LIM).unwrap(), BhgCheck::Ok);
        assert_eq!(
            verify_bhg(&[1, 2, 3], 2, 1, LIM).unwrap(),
            BhgCheck::Violation { x: 4, count: 2 }
        );
        assert_eq!(verify_bhg(&[1, 2, 3], 2, 2, LIM).unwrap(), BhgCheck::Ok);
        assert!(matches!(
            verify_bhg(&(1..200).collect::<Vec<_>>(), 4, 1, 1000),
            Err(Error::EnumerationLimit { .. })
        ));
    }

    #[test]
    fn multiset_sums_small() {
        let t = multiset_sums(&[1, 2], 2, LIM).unwrap();
        assert_eq!(t.into_iter().collect::<Vec<_>>(), vec![(2, 1), (3, 1), (4, 1)]);
        assert_eq!(
            multiset_sums(&[5, 7], 0, LIM)
                .unwrap()
                .into_iter()
                .collect::<Vec<_>>(),
            vec![(0, 1)]
        );
        assert!(multiset_sums(&[], 3, LIM).unwrap().is_empty());
        assert_eq!(multiset_sums(&[3, 3], 2, LIM), Err(Error::RepeatedTerm(3)));
    }

    #[test]
    fn strong_prefix_examples() {
        let r = verify_strong_prefixes(&[1, 2], 2, 1, LIM).unwrap();
        assert!(r.iter().all(PrefixReport::is_strong));
        let r = verify_strong_prefixes(&[1, 2, 3], 2, 1, LIM).unwrap();
        assert!(r[0].is_strong() && r[1].is_strong());
        assert!(!r[2].is_strong());
        assert_eq!(r[2].bhg, BhgCheck::Violation { x: 4, count: 2 });
        assert_eq!(
            verify_strong_prefixes(&[1, 2, 1], 2, 1, LIM),
            Err(Error::RepeatedTerm(1))
        );
    }

    #[test]
    fn strong_prefix_levels() {
        // {1,2,3}, h = 2, g = 2: R_1 = 5 <= 9 and R_2 = 1 <= 3^(3/2)
        let r = verify_strong_prefixes(&[1, 2, 3], 2, 2, LIM).unwrap();
        let last = &r[2];
        assert_eq!(
            last.levels.iter().map(|l| l.count).collect::<Vec<_>>(),
            vec![5, 1]
        );
        assert!(last.is_strong());
    }

    #[test]
    fn bound_checks() {
        let rec = record(2, 1, vec![1, 2, 4, 8, 13, 21, 31, 45, 66, 81]);
        let rep = strong_bound_check(&rec);
        assert!(rep.passed);
        assert_eq!(rep.entries[9].floor, "2000");
        assert!(rep.entries.iter().all(|e| e.ratio <= 1.0));
        let rep = classic_bound_check(&rec).unwrap();
        assert!(rep.passed);
        assert_eq!(rep.entries[1].floor, "16");

        // a_1 = 1 <= 2g for every g
        for g in 1..5 {
            assert!(strong_bound_check(&record(3, g, vec![1])).passed);
        }

        let bad = record(2, 1, vec![1, 2, 4, 200]);
        let rep = strong_bound_check(&bad);
        // 200 > 2 * 4^3 = 128
        assert!(!rep.passed);
        assert_eq!(rep.first_failure, Some(4));
        assert_eq!(rep.entries[3].floor, "128");

        assert!(classic_bound_check(&record(2, 2, vec![1])).is_err());
    }

    #[test]
    fn forbidden_sets_tiny() {
        let r = forbidden_set_sizes(&[1], 2, 1, LIM, BUDGET).unwrap();
        assert_eq!(r.size_f_0, 0);
        assert_eq!(r.size_f_n, 1);
        assert_eq!(r.union_size, 1);
        assert_eq!(r.window, 16);
        assert_eq!(r.first_admissible, Some(2));

        let r = forbidden_set_sizes(&[1, 2], 2, 1, LIM, BUDGET).unwrap();
        // 3 breaks 1+3 = 2+2; window is 2 * 3^3 = 54
        assert_eq!(r.window, 54);
        assert_eq!(r.first_admissible, Some(4));
        assert!(r.size_f_0 >= 1);
        assert!(r.f1_empty && r.union_within_bound);
    }

    #[test]
    fn forbidden_sets_budget() {
        assert!(matches!(
            forbidden_set_sizes(&[1, 2, 4], 2, 1, LIM, 10),
            Err(Error::ScanBudgetExceeded { .. })
        ));
    }

    #[test]
    fn t_count_examples() {
        assert_eq!(t_count(&[1, 2], 4, 2, 2, LIM).unwrap(), 0);
        for m in 1..10 {
            for s in 2..4 {
                assert_eq!(t_count(&[], m, s, 3, LIM).unwrap(), 0);
            }
        }
        // {1,2}, m = 3, h = 3: reached sums {5,6,7,8,7,8,9} ∩ {3,4,5,6} = {5,6}
        assert_eq!(t_count(&[1, 2], 3, 2, 3, LIM).unwrap(), 2);
        assert!(t_count(&[1, 2], 3, 1, 3, LIM).is_err());
    }

    #[test]
    fn window_t_matches_t_count() {
        let a = [1, 2, 3, 6, 12];
        for (h, g) in [(2, 3), (3, 2), (3, 3)] {
            let snap = Snapshot::new(&a, h, g, LIM).unwrap();
            for m in 1..60 {
                if a.contains(&m) {
                    continue;
                }
                let c = snap.classify(m);
                for s in 2..=g {
                    assert_eq!(
                        c.t[s - 2],
                        t_count(&a, m, s, h, LIM).unwrap(),
                        "h={h} m={m} s={s}"
                    );
                }
                let mut with = a.to_vec();
                with.push(m);
                let r = multiset_sums(&with, h, LIM).unwrap();
                assert_eq!(c.r_new, profile_of(&r, g));
                assert_eq!(c.not_bhg, !bhg_of(&r, g).is_ok());
            }
        }
    }

    #[test]
    fn increment_inequality_can_fail_for_h3() {
        // {1,2} + 3 with h = 3: 7 = 1+3+3 = 2+2+3 and 8 reach two
        // representations at once although neither was a sum before.
        let snap = Snapshot::new(&[1, 2], 3, 2, LIM).unwrap();
        let c = snap.classify(3);
        assert_eq!(snap.profile[1], 0);
        assert_eq!(c.r_new[1], 3);
        assert_eq!(c.t[0], 2);
    }

    #[test]
    fn pick_steps_spreads_evenly() {
        assert_eq!(pick_steps(6, 10), (vec![2, 3, 4, 5], vec![]));
        assert_eq!(pick_steps(2, 10), (vec![], vec![]));
        let (chosen, skipped) = pick_steps(12, 3);
        assert_eq!(chosen, vec![2, 6, 11]);
        assert_eq!(skipped.len(), 7);
        assert_eq!(pick_steps(5, 0), (vec![], vec![2, 3, 4]));
    }

    #[test]
    fn diagnostics_on_g1_have_no_level_checks() {
        let rec = record(2, 1, vec![1, 2, 4, 8, 13, 21]);
        let d = proof_diagnostics(&rec, DiagnosticsBudget::default()).unwrap();
        assert!(d.holds(), "{:?}", d.failures());
        for st in &d.steps {
            assert!(st.window_checks.is_empty());
            assert!(st.samples.is_empty());
            assert!(st
                .instances
                .iter()
                .all(|i| i.check != Check::FsBound && i.check != Check::TSumBound));
        }
    }

    #[test]
    fn diagnostics_flag_a_corrupted_record() {
        // 9 is not the smallest admissible fourth term after 1, 2, 4
        let rec = record(2, 1, vec![1, 2, 4, 9, 13]);
        let d = proof_diagnostics(&rec, DiagnosticsBudget::default()).unwrap();
        assert!(!d.holds());
        assert!(!d.check_holds(Check::NextTermIsSmallestAdmissible));
        let failures = d.failures();
        assert!(failures[0].contains("n=3"), "{failures:?}");
        assert!(failures[0].contains("smallest admissible"), "{failures:?}");
    }
}
