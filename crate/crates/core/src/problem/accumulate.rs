//! Scatter targets and reductions.

use alloc::vec::Vec;
use core::sync::atomic::{AtomicU64, Ordering};

/// Buffer of `f64` cells updated with compare-and-swap additions.
#[derive(Default)]
pub(crate) struct AtomicBuffer {
    cells: Vec<AtomicU64>,
}

impl AtomicBuffer {
    /// Resizes to `len` and zeroes every cell.
    pub fn reset(&mut self, len: usize) {
        if self.cells.len() != len {
            self.cells = (0..len).map(|_| AtomicU64::new(0)).collect();
        } else {
            let zero = 0.0f64.to_bits();
            for c in &self.cells {
                c.store(zero, Ordering::Relaxed);
            }
        }
    }

    #[inline]
    pub fn add(&self, i: usize, v: f64) {
        let cell = &self.cells[i];
        let mut cur = cell.load(Ordering::Relaxed);
        loop {
            let next = (f64::from_bits(cur) + v).to_bits();
            match cell.compare_exchange_weak(cur, next, Ordering::Relaxed, Ordering::Relaxed) {
                Ok(_) => break,
                Err(seen) => cur = seen,
            }
        }
    }

    pub fn copy_to(&self, out: &mut [f64]) {
        for (o, c) in out.iter_mut().zip(&self.cells) {
            *o = f64::from_bits(c.load(Ordering::Relaxed));
        }
    }
}

/// Pairwise (tree) summation; the result depends only on the order of `values`.
pub(crate) fn tree_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n => {
            let (a, b) = values.split_at(n / 2);
            tree_sum(a) + tree_sum(b)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_buffer_accumulates() {
        let mut b = AtomicBuffer::default();
        b.reset(3);
        b.add(1, 0.5);
        b.add(1, 0.25);
        b.add(2, -1.0);
        let mut out = [9.0; 3];
        b.copy_to(&mut out);
        assert_eq!(out, [0.0, 0.75, -1.0]);
        b.reset(3);
        b.copy_to(&mut out);
        assert_eq!(out, [0.0; 3]);
    }

    #[test]
    fn tree_sum_pairs() {
        assert_eq!(tree_sum(&[]), 0.0);
        assert_eq!(tree_sum(&[1.0, 2.0, 3.0, 4.0, 5.0]), 15.0);
    }
}
