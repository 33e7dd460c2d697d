//! Partial bubble sorting.
//!
//! One bubble sort iteration is a single left-to-right pass of adjacent
//! compare-and-swap operations; `k` iterations leave the `k` largest values
//! sorted at the end of the array while the rest is only partially ordered.
//!
//! Positions handed out by this module ([`OnePositions`],
//! [`frontier_position`]) are 1-based.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// An ordered, non-empty sequence of finite observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample(Vec<f64>);

impl Sample {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Sample(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// `T^k` applied with `k = level.iterations(n)`.
    pub fn partially_sorted(&self, level: SortLevel) -> Sample {
        Sample(partial_bubble_sort(&self.0, level.iterations(self.len())))
    }
}

impl AsRef<[f64]> for Sample {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Sorting level `beta` in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct SortLevel(f64);

impl SortLevel {
    pub const FULL: SortLevel = SortLevel(1.0);

    pub fn new(beta: f64) -> Result<Self> {
        if beta > 0.0 && beta <= 1.0 {
            Ok(SortLevel(beta))
        } else {
            Err(Error::param(format!("sorting level must lie in (0, 1], got {beta}")))
        }
    }

    pub fn beta(self) -> f64 {
        self.0
    }

    /// Number of passes for a sample of size `n`: `beta * n` rounded to the
    /// nearest integer, halves rounding up.
    pub fn iterations(self, n: usize) -> usize {
        let k = (self.0 * n as f64 + 0.5).floor() as usize;
        k.min(n)
    }
}

/// One bubble sort iteration in place. Only strictly out-of-order neighbours
/// are swapped. Returns whether any swap happened.
pub fn swap_pass<T: PartialOrd>(values: &mut [T]) -> bool {
    swap_pass_upto(values, values.len())
}

fn swap_pass_upto<T: PartialOrd>(values: &mut [T], end: usize) -> bool {
    let mut swapped = false;
    for i in 1..end {
        if values[i - 1] > values[i] {
            values.swap(i - 1, i);
            swapped = true;
        }
    }
    swapped
}

/// Apply `k` bubble sort iterations, returning `T^k(values)`.
pub fn partial_bubble_sort<T: PartialOrd + Clone>(values: &[T], k: usize) -> Vec<T> {
    let mut out = values.to_vec();
    partial_bubble_sort_in_place(&mut out, k);
    out
}

pub fn partial_bubble_sort_in_place<T: PartialOrd>(values: &mut [T], k: usize) {
    let n = values.len();
    for pass in 0..k.min(n) {
        // after `pass` iterations the last `pass` slots already hold the
        // largest values in order, so no swap can fire there
        if !swap_pass_upto(values, n - pass) {
            break;
        }
    }
}

/// Running maximum of `T^k(values)` computed without sorting.
///
/// The first `i` entries of `T^k(v)` are the first `i + k` entries of `v`
/// with their `k` largest removed, so the prefix maximum is the `(k+1)`-th
/// largest of `v[..i + k]`. Beyond position `n - k` the array is the sorted
/// top block. Runs in `O(n log k)`.
pub fn running_max_after_k(values: &[f64], k: usize) -> Vec<f64> {
    let n = values.len();
    let k = k.min(n);
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    // min-heap holding the k+1 largest values seen so far
    let mut heap: BinaryHeap<Reverse<TotalF64>> = BinaryHeap::with_capacity(k + 2);
    for &v in &values[..k.min(n - 1)] {
        heap.push(Reverse(TotalF64(v)));
    }
    for &v in &values[k.min(n - 1)..] {
        heap.push(Reverse(TotalF64(v)));
        if heap.len() > k + 1 {
            heap.pop();
        }
        out.push(heap.peek().expect("heap is non-empty").0 .0);
    }
    // the remaining positions run through the top block in increasing order
    while out.len() < n {
        heap.pop();
        out.push(heap.peek().expect("top block is non-empty").0 .0);
    }
    out
}

/// Running maximum of a sequence.
pub fn running_max(values: &[f64]) -> Vec<f64> {
    let mut acc = f64::NEG_INFINITY;
    values
        .iter()
        .map(|&v| {
            if v > acc {
                acc = v;
            }
            acc
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct TotalF64(f64);

impl PartialEq for TotalF64 {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for TotalF64 {}

impl PartialOrd for TotalF64 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TotalF64 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Positions (1-based, strictly increasing) of the ones in a binary array
/// of length `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OnePositions {
    n: usize,
    positions: Vec<usize>,
}

impl OnePositions {
    pub fn new(n: usize, positions: Vec<usize>) -> Result<Self> {
        let increasing = positions.windows(2).all(|w| w[0] < w[1]);
        let in_range = positions.iter().all(|&p| p >= 1 && p <= n);
        if !increasing || !in_range {
            return Err(Error::param(format!(
                "positions must be strictly increasing within 1..={n}"
            )));
        }
        Ok(OnePositions { n, positions })
    }

    pub fn from_binary(bits: &[bool]) -> Self {
        let positions = bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| i + 1)
            .collect();
        OnePositions {
            n: bits.len(),
            positions,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    pub fn to_binary(&self) -> Vec<bool> {
        let mut bits = vec![false; self.n];
        for &p in &self.positions {
            bits[p - 1] = true;
        }
        bits
    }
}

/// Positions of the ones after `k` iterations, from the closed form:
/// the `i`-th one sits at `I[i+k] - k` while `k <= m - i`, and at
/// `n - (m - i)` once it has joined the sorted block.
pub fn binary_positions_after_k(p: &OnePositions, k: usize) -> Result<OnePositions> {
    if k > p.n {
        return Err(Error::param(format!(
            "iteration count {k} exceeds array length {}",
            p.n
        )));
    }
    let m = p.positions.len();
    let positions = (1..=m)
        .map(|i| {
            if k <= m - i {
                p.positions[i + k - 1] - k
            } else {
                p.n - (m - i)
            }
        })
        .collect();
    Ok(OnePositions { n: p.n, positions })
}

/// 1-based position of the first value exceeding `x` in `T^k(values)`,
/// or `n + 1` if nothing exceeds `x`, computed from the exceedance
/// positions of the unsorted data:
/// `min(I[1+k], n) - min(k, H - 1)` with `H` the exceedance count.
pub fn frontier_position(values: &[f64], x: f64, k: usize) -> usize {
    let n = values.len() as i64;
    let k = k.min(values.len()) as i64;
    let mut exceed = 0i64;
    let mut target = None;
    for (i, &v) in values.iter().enumerate() {
        if v > x {
            exceed += 1;
            if exceed == k + 1 {
                target = Some(i as i64 + 1);
            }
        }
    }
    let first = target.unwrap_or(n).min(n);
    (first - k.min(exceed - 1)) as usize
}
