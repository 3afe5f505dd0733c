//! Closed intervals and finite unions of them on the real line.

use alloc::vec;
use alloc::vec::Vec;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// A finite union of closed intervals.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalSet {
    parts: Vec<Interval>,
}

impl IntervalSet {
    pub fn new(parts: Vec<Interval>) -> Self {
        Self { parts }
    }

    pub fn full() -> Self {
        Self::new(vec![Interval::new(f64::NEG_INFINITY, f64::INFINITY)])
    }

    pub fn empty() -> Self {
        Self::new(Vec::new())
    }

    pub fn single(lo: f64, hi: f64) -> Self {
        Self::new(vec![Interval::new(lo, hi)])
    }

    pub fn is_full(&self) -> bool {
        self.parts
            .iter()
            .any(|p| p.lo == f64::NEG_INFINITY && p.hi == f64::INFINITY)
    }

    pub fn is_empty(&self) -> bool {
        self.parts.iter().all(|p| p.lo > p.hi)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.parts.iter().any(|p| p.contains(v))
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }
}
