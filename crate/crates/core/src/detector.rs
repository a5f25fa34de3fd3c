//! ADWIN adaptive-windowing change detector.
//!
//! The window is stored as an exponential histogram: row `i` holds buckets
//! that each summarise `2^i` consecutive items, at most `max_buckets` per
//! row. After every insert each boundary between two buckets is a candidate
//! cut `(W0 | W1)` with `W0` the older part; the oldest bucket is dropped
//! while some cut satisfies
//!
//! ```text
//! |mean(W0) - mean(W1)| >= sqrt( ln(4 n / delta) / (2 m) ),   m = 1 / (1/n0 + 1/n1)
//! ```
//!
//! where `n` is the current window length.

use std::collections::VecDeque;

use crate::error::{invalid, Error, Result};

pub const DEFAULT_DELTA: f64 = 0.002;
pub const DEFAULT_MAX_BUCKETS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Bucket {
    count: u64,
    sum: f64,
}

/// Outcome of one insert.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriftSignal {
    pub detected: bool,
    pub window_length_after: u64,
    pub mean_after: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Adwin {
    delta: f64,
    max_buckets: usize,
    /// `rows[i]` holds buckets of `2^i` items, newest at the front.
    rows: Vec<VecDeque<Bucket>>,
    total_count: u64,
    total_sum: f64,
}

impl Default for Adwin {
    fn default() -> Self {
        Self::new(DEFAULT_DELTA).expect("default delta is valid")
    }
}

impl Adwin {
    pub fn new(delta: f64) -> Result<Self> {
        Self::with_max_buckets(delta, DEFAULT_MAX_BUCKETS)
    }

    pub fn with_max_buckets(delta: f64, max_buckets: usize) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(invalid("delta", format!("{delta} not in (0, 1)")));
        }
        if max_buckets < 2 {
            return Err(invalid("max_buckets", "must be at least 2"));
        }
        Ok(Self {
            delta,
            max_buckets,
            rows: Vec::new(),
            total_count: 0,
            total_sum: 0.0,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn max_buckets(&self) -> usize {
        self.max_buckets
    }

    pub fn len(&self) -> u64 {
        self.total_count
    }

    pub fn is_empty(&self) -> bool {
        self.total_count == 0
    }

    pub fn sum(&self) -> f64 {
        self.total_sum
    }

    pub fn mean(&self) -> f64 {
        if self.total_count == 0 {
            0.0
        } else {
            self.total_sum / self.total_count as f64
        }
    }

    /// Number of buckets in each row, row 0 first.
    pub fn row_sizes(&self) -> Vec<usize> {
        self.rows.iter().map(VecDeque::len).collect()
    }

    /// Empties the window, keeping `delta` and `max_buckets`.
    pub fn reset(&mut self) {
        self.rows.clear();
        self.total_count = 0;
        self.total_sum = 0.0;
    }

    pub fn insert(&mut self, value: f64) -> Result<DriftSignal> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::ValueOutOfRange(value));
        }
        self.push(value);
        let mut detected = false;
        while self.total_count > 1 && self.has_cut() {
            self.drop_oldest();
            detected = true;
        }
        Ok(DriftSignal {
            detected,
            window_length_after: self.total_count,
            mean_after: self.mean(),
        })
    }

    fn push(&mut self, value: f64) {
        if self.rows.is_empty() {
            self.rows.push(VecDeque::new());
        }
        self.rows[0].push_front(Bucket { count: 1, sum: value });
        self.total_count += 1;
        self.total_sum += value;

        let mut row = 0;
        while row < self.rows.len() && self.rows[row].len() > self.max_buckets {
            let older = self.rows[row].pop_back().expect("row over capacity");
            let newer = self.rows[row].pop_back().expect("row over capacity");
            if row + 1 == self.rows.len() {
                self.rows.push(VecDeque::new());
            }
            self.rows[row + 1].push_front(Bucket {
                count: older.count + newer.count,
                sum: older.sum + newer.sum,
            });
            row += 1;
        }
    }

    fn drop_oldest(&mut self) {
        while let Some(last) = self.rows.last_mut() {
            if let Some(bucket) = last.pop_back() {
                self.total_count -= bucket.count;
                self.total_sum -= bucket.sum;
                if last.is_empty() {
                    self.rows.pop();
                }
                if self.total_count == 0 {
                    // keep the running sum exact for an empty window
                    self.total_sum = 0.0;
                }
                return;
            }
            self.rows.pop();
        }
    }

    /// Tests every bucket boundary, oldest first.
    fn has_cut(&self) -> bool {
        let n = self.total_count as f64;
        let log_term = (4.0 * n / self.delta).ln();
        let mut n0 = 0u64;
        let mut s0 = 0.0;
        for row in self.rows.iter().rev() {
            for bucket in row.iter().rev() {
                n0 += bucket.count;
                s0 += bucket.sum;
                let n1 = self.total_count - n0;
                if n1 == 0 {
                    return false;
                }
                let (n0f, n1f) = (n0 as f64, n1 as f64);
                let m = 1.0 / (1.0 / n0f + 1.0 / n1f);
                let eps = (log_term / (2.0 * m)).sqrt();
                let diff = s0 / n0f - (self.total_sum - s0) / n1f;
                if diff.abs() >= eps {
                    return true;
                }
            }
        }
        false
    }
}
