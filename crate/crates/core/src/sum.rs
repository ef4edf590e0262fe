//! Pairwise floating-point summation.
//!
//! Blocks of `BLOCK` elements are summed with four interleaved accumulators
//! and the block sums are combined recursively, giving `O(log n)` error growth.

const BLOCK: usize = 128;

pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= BLOCK {
        let mut acc = [0.0f64; 4];
        let chunks = xs.chunks_exact(4);
        let tail = chunks.remainder();
        for c in chunks {
            acc[0] += c[0];
            acc[1] += c[1];
            acc[2] += c[2];
            acc[3] += c[3];
        }
        let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
        for &x in tail {
            s += x;
        }
        return s;
    }
    let mid = split_point(xs.len());
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

fn split_point(len: usize) -> usize {
    // keep the left half a multiple of the block size
    let half = len / 2;
    (half / BLOCK).max(1) * BLOCK
}
