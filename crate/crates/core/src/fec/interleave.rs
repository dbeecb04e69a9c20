use rand::seq::SliceRandom;

use crate::rng::{stream, Stream};

/// Seeded uniformly random permutation of `0..n`.
pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut stream(seed, Stream::Interleaver));
    perm
}

/// `out[i] = input[perm[i]]`.
pub fn interleave<T: Copy>(input: &[T], seed: u64) -> Vec<T> {
    permutation(input.len(), seed).into_iter().map(|p| input[p]).collect()
}

/// Inverse of [`interleave`] for the same seed.
pub fn deinterleave<T: Copy + Default>(input: &[T], seed: u64) -> Vec<T> {
    let mut out = vec![T::default(); input.len()];
    for (i, p) in permutation(input.len(), seed).into_iter().enumerate() {
        out[p] = input[i];
    }
    out
}
