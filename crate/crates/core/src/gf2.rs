//! Dense bit vectors and Gaussian elimination over the two-element field.

use std::hash::{Hash, Hasher};

const WORD: usize = 64;

/// A fixed-length vector over GF(2), packed into 64-bit limbs.
///
/// Bits beyond `len` are always zero, so the derived equality and hashing
/// are exact.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl Hash for BitVec {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.words.hash(state);
    }
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; len.div_ceil(WORD)],
        }
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in indices {
            v.flip(i);
        }
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    #[inline]
    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Weight of `self ^ other` without allocating.
    pub fn xor_weight(&self, other: &BitVec) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a ^ b).count_ones() as usize)
            .sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn lowest_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * WORD + w.trailing_zeros() as usize)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * WORD + tz)
            })
        })
    }

    /// A cheap 64-bit digest used to bucket vectors in hash maps.
    pub fn digest(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for &w in &self.words {
            h ^= w;
            h = h.wrapping_mul(0x0000_0100_0000_01b3).rotate_left(17);
        }
        h
    }
}

/// Incrementally maintained echelon basis, used to test linear independence.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    len: usize,
    rows: Vec<BitVec>,
    /// pivot column -> index into `rows`
    pivot_of: Vec<Option<usize>>,
}

impl EchelonBasis {
    pub fn new(len: usize) -> Self {
        Self {
            len,
            rows: Vec::new(),
            pivot_of: vec![None; len],
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &mut BitVec) {
        while let Some(p) = v.lowest_one() {
            match self.pivot_of[p] {
                Some(r) => v.xor_assign(&self.rows[r]),
                None => return,
            }
        }
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        let mut w = v.clone();
        self.reduce(&mut w);
        w.is_zero()
    }

    /// Inserts `v` if it is independent of the current span; returns whether it was.
    pub fn insert(&mut self, v: &BitVec) -> bool {
        debug_assert_eq!(v.len(), self.len);
        let mut w = v.clone();
        self.reduce(&mut w);
        match w.lowest_one() {
            None => false,
            Some(p) => {
                self.pivot_of[p] = Some(self.rows.len());
                self.rows.push(w);
                true
            }
        }
    }
}

/// Row rank of `rows` together with a basis of the left kernel, i.e. of all
/// combinations `x` (one bit per row) with `sum_k x_k rows[k] = 0`.
pub fn rank_and_left_kernel(rows: &[BitVec], width: usize) -> (usize, Vec<BitVec>) {
    let k = rows.len();
    let mut work: Vec<(BitVec, BitVec)> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| (r.clone(), BitVec::from_indices(k, [i])))
        .collect();
    let mut rank = 0;
    for col in 0..width {
        let Some(p) = (rank..k).find(|&r| work[r].0.get(col)) else {
            continue;
        };
        work.swap(rank, p);
        let (pivot_row, pivot_tag) = work[rank].clone();
        for (r, (row, tag)) in work.iter_mut().enumerate() {
            if r != rank && row.get(col) {
                row.xor_assign(&pivot_row);
                tag.xor_assign(&pivot_tag);
            }
        }
        rank += 1;
    }
    let kernel = work.into_iter().skip(rank).map(|(_, tag)| tag).collect();
    (rank, kernel)
}

pub fn rank(rows: &[BitVec], width: usize) -> usize {
    let mut basis = EchelonBasis::new(width);
    rows.iter().filter(|r| basis.insert(r)).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_ops() {
        let mut v = BitVec::zeros(130);
        v.set(0, true);
        v.set(64, true);
        v.set(129, true);
        assert_eq!(v.count_ones(), 3);
        assert_eq!(v.ones().collect::<Vec<_>>(), vec![0, 64, 129]);
        v.flip(0);
        assert_eq!(v.lowest_one(), Some(64));
        let w = BitVec::from_indices(130, [64, 129]);
        assert_eq!(v, w);
        assert!(v.xor(&w).is_zero());
        assert_eq!(v.xor_weight(&BitVec::zeros(130)), 2);
    }

    #[test]
    fn triangle_rank_and_kernel() {
        let rows = vec![
            BitVec::from_indices(3, [0, 1]),
            BitVec::from_indices(3, [1, 2]),
            BitVec::from_indices(3, [0, 2]),
        ];
        let (rank, kernel) = rank_and_left_kernel(&rows, 3);
        assert_eq!(rank, 2);
        assert_eq!(kernel.len(), 1);
        assert_eq!(kernel[0].ones().collect::<Vec<_>>(), vec![0, 1, 2]);
        assert_eq!(super::rank(&rows, 3), 2);
    }

    #[test]
    fn echelon_independence() {
        let mut b = EchelonBasis::new(4);
        assert!(b.insert(&BitVec::from_indices(4, [0, 1])));
        assert!(b.insert(&BitVec::from_indices(4, [1, 2])));
        assert!(!b.insert(&BitVec::from_indices(4, [0, 2])));
        assert!(b.contains(&BitVec::from_indices(4, [0, 2])));
        assert!(!b.insert(&BitVec::zeros(4)));
        assert_eq!(b.rank(), 2);
    }
}
