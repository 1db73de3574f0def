//! Straightforward reference generators. They share no code with the
//! library: every candidate is judged from histograms rebuilt by
//! enumeration, and thresholds are compared with plain integer powers.

#![allow(dead_code)]

use std::collections::HashMap;

/// Sum histogram of the size-`h` multisets of `elements`.
pub fn histogram(elements: &[u64], h: usize) -> HashMap<u64, u64> {
    let mut sorted = elements.to_vec();
    sorted.sort_unstable();
    let mut out = HashMap::new();
    let mut stack = vec![(0usize, h, 0u64)];
    while let Some((start, left, acc)) = stack.pop() {
        if left == 0 {
            *out.entry(acc).or_insert(0) += 1;
            continue;
        }
        for (i, &a) in sorted.iter().enumerate().skip(start) {
            stack.push((i, left - 1, acc + a));
        }
    }
    out
}

/// Sums of the size-`h` multisets of `base ∪ {m}` that use `m` at least once.
fn sums_with(base: &[u64], m: u64, h: usize) -> HashMap<u64, u64> {
    let mut with = base.to_vec();
    with.push(m);
    // a multiset containing m is m plus any size-(h-1) multiset of base ∪ {m}
    histogram(&with, h - 1)
        .into_iter()
        .map(|(x, c)| (x + m, c))
        .collect()
}

fn pow(base: u64, exp: usize) -> u128 {
    u128::from(base)
        .checked_pow(exp as u32)
        .expect("power overflow in oracle")
}

/// `R_s <= n^(h + (1 - s)(h - 1)/g)` for every `s`, via `R_s^g <= n^(hg + (1-s)(h-1))`.
pub fn condition_ii(r: &HashMap<u64, u64>, n: u64, h: usize, g: usize) -> bool {
    (1..=g).all(|s| {
        let count = r.values().filter(|&&c| c >= s as u64).count() as u64;
        pow(count, g) <= pow(n, h * g - (s - 1) * (h - 1))
    })
}

fn admissible(base: &[u64], base_hist: &HashMap<u64, u64>, m: u64, h: usize, g: usize, strong: bool) -> bool {
    if base.contains(&m) {
        return false;
    }
    let extra = sums_with(base, m, h);
    if extra
        .iter()
        .any(|(x, c)| base_hist.get(x).copied().unwrap_or(0) + c > g as u64)
    {
        return false;
    }
    if !strong {
        return true;
    }
    let mut with = base.to_vec();
    with.push(m);
    condition_ii(&histogram(&with, h), with.len() as u64, h, g)
}

fn greedy(h: usize, g: usize, n_terms: usize, strong: bool) -> Vec<u64> {
    let mut terms: Vec<u64> = Vec::new();
    while terms.len() < n_terms {
        let base_hist = histogram(&terms, h);
        let mut m = if strong {
            1
        } else {
            terms.last().map_or(1, |t| t + 1)
        };
        while !admissible(&terms, &base_hist, m, h, g, strong) {
            m += 1;
        }
        terms.push(m);
    }
    terms
}

pub fn naive_classic(h: usize, g: usize, n_terms: usize) -> Vec<u64> {
    greedy(h, g, n_terms, false)
}

pub fn naive_strong(h: usize, g: usize, n_terms: usize) -> Vec<u64> {
    greedy(h, g, n_terms, true)
}
