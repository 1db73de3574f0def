//! Incremental multiset-sum tables.
//!
//! For a finite set `A` of distinct positive integers and an order `h`,
//! [`SumTableSet`] keeps, for every `j = 0..=h`, the number of size-`j`
//! multisets of `A` with each sum. The order-`h` table is the
//! representation function `r_A`. Inserting an element updates every table
//! in place, so a greedy scan never recounts representations from scratch.

use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

/// Default cap on the total number of stored `(sum, count)` entries.
pub const DEFAULT_ENTRY_CAP: usize = 50_000_000;

/// Sum value to multiset count. Zero counts are never stored. The hasher is
/// unseeded, so iteration order is reproducible across runs.
pub type SumTable = FxHashMap<u64, u64>;

/// Number of size-`j` multisets drawn from `n` distinct elements,
/// `C(n + j - 1, j)`. `None` if it does not fit in a `u128`.
pub fn multiset_count(n: u64, j: u32) -> Option<u128> {
    if j == 0 {
        return Some(1);
    }
    if n == 0 {
        return Some(0);
    }
    let mut acc: u128 = 1;
    for i in 1..=u128::from(j) {
        // acc * (n - 1 + i) / i stays integral at every step
        acc = acc.checked_mul(u128::from(n) - 1 + i)? / i;
    }
    Some(acc)
}

#[derive(Debug, Clone)]
pub struct SumTableSet {
    order: usize,
    tables: Vec<SumTable>,
    elements: Vec<u64>,
    entry_cap: usize,
}

impl PartialEq for SumTableSet {
    fn eq(&self, other: &Self) -> bool {
        self.order == other.order && self.elements == other.elements && self.tables == other.tables
    }
}

impl Eq for SumTableSet {}

impl SumTableSet {
    /// Empty set for order `h >= 2`.
    pub fn new(h: usize) -> Result<Self> {
        Self::with_entry_cap(h, DEFAULT_ENTRY_CAP)
    }

    pub fn with_entry_cap(h: usize, entry_cap: usize) -> Result<Self> {
        if h < 2 {
            return Err(Error::InvalidParams(format!(
                "order h must be at least 2, got {h}"
            )));
        }
        let mut tables = vec![SumTable::default(); h + 1];
        tables[0].insert(0, 1);
        Ok(Self {
            order: h,
            tables,
            elements: Vec::new(),
            entry_cap,
        })
    }

    /// Builds the tables for `elements`, inserted in the given order.
    pub fn from_elements(h: usize, elements: &[u64]) -> Result<Self> {
        let mut set = Self::new(h)?;
        for &a in elements {
            set.add_element(a)?;
        }
        Ok(set)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Current elements in increasing order.
    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, a: u64) -> bool {
        self.elements.binary_search(&a).is_ok()
    }

    /// The table of size-`j` multiset sums.
    ///
    /// # Panics
    ///
    /// Panics if `j > h`.
    pub fn table(&self, j: usize) -> &SumTable {
        &self.tables[j]
    }

    /// Total number of stored entries across all tables.
    pub fn entry_count(&self) -> usize {
        self.tables.iter().map(|t| t.len()).sum()
    }

    pub fn entry_cap(&self) -> usize {
        self.entry_cap
    }

    /// Inserts `a`, updating every table.
    ///
    /// On error the set is left unchanged.
    pub fn add_element(&mut self, a: u64) -> Result<()> {
        if a == 0 {
            return Err(Error::NonPositiveElement(a));
        }
        let pos = match self.elements.binary_search(&a) {
            Ok(_) => return Err(Error::DuplicateElement(a)),
            Err(pos) => pos,
        };
        let h = self.order;
        let largest = self.elements.last().copied().unwrap_or(0).max(a);
        // Every key after the update is at most h * largest and every count
        // is at most the number of size-j multisets, so checking both up
        // front means the update below cannot overflow part way.
        largest
            .checked_mul(h as u64)
            .ok_or(Error::Overflow("forming h-fold sums"))?;
        multiset_count(self.elements.len() as u64 + 1, h as u32)
            .filter(|&t| t <= u128::from(u64::MAX))
            .ok_or(Error::Overflow("counting representations"))?;

        for j in (1..=h).rev() {
            let (lower, upper) = self.tables.split_at_mut(j);
            let target = &mut upper[0];
            for k in 1..=j {
                let shift = a * k as u64;
                for (&y, &c) in &lower[j - k] {
                    *target.entry(y + shift).or_insert(0) += c;
                }
            }
        }
        self.elements.insert(pos, a);

        let needed = self.entry_count();
        if needed > self.entry_cap {
            self.remove_element(a);
            return Err(Error::MemoryCapExceeded {
                needed,
                cap: self.entry_cap,
            });
        }
        Ok(())
    }

    /// Inverse of [`add_element`](Self::add_element); `a` must be present.
    fn remove_element(&mut self, a: u64) {
        let pos = self
            .elements
            .binary_search(&a)
            .expect("removing an element that is not present");
        self.elements.remove(pos);
        // Ascending j: tables[j - k] for k >= 1 are already restored.
        for j in 1..=self.order {
            let (lower, upper) = self.tables.split_at_mut(j);
            let target = &mut upper[0];
            for k in 1..=j {
                let shift = a * k as u64;
                for (&y, &c) in &lower[j - k] {
                    let key = y + shift;
                    let slot = target.get_mut(&key).expect("inconsistent sum table");
                    *slot -= c;
                    if *slot == 0 {
                        target.remove(&key);
                    }
                }
            }
        }
    }

    /// `r_A(x)`: the number of size-`h` multisets of `A` summing to `x`.
    pub fn rep_count(&self, x: u64) -> u64 {
        self.tables[self.order].get(&x).copied().unwrap_or(0)
    }

    /// `R_s = |{x : r_A(x) >= s}|` for `s = 1..=s_max`.
    pub fn rep_histogram(&self, s_max: usize) -> RepProfile {
        let mut counts = vec![0u64; s_max];
        for &c in self.tables[self.order].values() {
            let top = (c as usize).min(s_max);
            for slot in &mut counts[..top] {
                *slot += 1;
            }
        }
        RepProfile { counts }
    }

    /// Representations of each `x` in `A ∪ {m}` that use `m` at least once.
    ///
    /// Using `m` exactly `k` times leaves a size-`(h - k)` multiset of `A`
    /// summing to `x - k*m`; the `k = h` term is the single sum `h*m`.
    pub fn candidate_delta(&self, m: u64) -> Result<CandidateDelta> {
        let h = self.order;
        let mut added = SumTable::default();
        for k in 1..=h {
            let shift = m
                .checked_mul(k as u64)
                .ok_or(Error::Overflow("shifting a candidate"))?;
            for (&y, &c) in &self.tables[h - k] {
                let x = y
                    .checked_add(shift)
                    .ok_or(Error::Overflow("shifting a candidate"))?;
                *added.entry(x).or_insert(0) += c;
            }
        }
        Ok(CandidateDelta { m, added })
    }
}

/// `counts[s - 1] = R_s`, the number of sums with at least `s` representations.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct RepProfile {
    pub counts: Vec<u64>,
}

impl RepProfile {
    /// `R_s` for `s >= 1`; zero beyond the tracked range.
    pub fn get(&self, s: usize) -> u64 {
        assert!(s >= 1, "R_s is defined for s >= 1");
        self.counts.get(s - 1).copied().unwrap_or(0)
    }

    pub fn s_max(&self) -> usize {
        self.counts.len()
    }
}

/// Extra representation counts contributed by a candidate `m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateDelta {
    pub m: u64,
    pub added: SumTable,
}

impl CandidateDelta {
    pub fn added_at(&self, x: u64) -> u64 {
        self.added.get(&x).copied().unwrap_or(0)
    }

    /// Entries sorted by sum.
    pub fn sorted(&self) -> Vec<(u64, u64)> {
        let mut v: Vec<_> = self.added.iter().map(|(&x, &c)| (x, c)).collect();
        v.sort_unstable();
        v
    }
}

/// Counts non-decreasing `h`-tuples of `elements` summing to `x` by plain
/// enumeration. Independent of [`SumTableSet`]; `limit` caps the number of
/// tuples visited.
pub fn brute_force_rep(elements: &[u64], h: usize, x: u64, limit: u128) -> Result<u64> {
    let mut sorted = elements.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let needed = multiset_count(sorted.len() as u64, h as u32).unwrap_or(u128::MAX);
    if needed > limit {
        return Err(Error::EnumerationLimit { needed, limit });
    }
    fn walk(sorted: &[u64], start: usize, left: usize, remaining: u64) -> u64 {
        if left == 0 {
            return u64::from(remaining == 0);
        }
        let mut count = 0;
        for i in start..sorted.len() {
            let a = sorted[i];
            if a > remaining {
                break;
            }
            count += walk(sorted, i, left - 1, remaining - a);
        }
        count
    }
    Ok(walk(&sorted, 0, h, x))
}
