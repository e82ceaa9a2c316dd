//! Multi-index helpers for dense symmetric `m^d` arrays stored row-major.

/// Row-major flat offset of a multi-index.
#[inline]
pub fn flat(m: usize, idx: &[usize]) -> usize {
    idx.iter().fold(0, |acc, &i| acc * m + i)
}

/// Inverse of [`flat`].
pub fn unflat(m: usize, d: usize, mut offset: usize) -> Vec<usize> {
    let mut idx = vec![0; d];
    for slot in idx.iter_mut().rev() {
        *slot = offset % m;
        offset /= m;
    }
    idx
}

/// Advance `idx` to the next tuple of `[m]^len` in lexicographic order.
/// Returns `false` after the last tuple.
#[inline]
pub fn odometer(idx: &mut [usize], m: usize) -> bool {
    for slot in idx.iter_mut().rev() {
        *slot += 1;
        if *slot < m {
            return true;
        }
        *slot = 0;
    }
    false
}

/// Non-decreasing multi-indices `i_1 <= ... <= i_d` in lexicographic order.
/// These are the free coordinates of a symmetric array.
pub fn canonical_indices(m: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if m == 0 {
        return out;
    }
    let mut idx = vec![0; d];
    loop {
        out.push(idx.clone());
        // find rightmost slot that can be incremented
        let mut p = d;
        while p > 0 && idx[p - 1] == m - 1 {
            p -= 1;
        }
        if p == 0 {
            break;
        }
        let v = idx[p - 1] + 1;
        for slot in idx[p - 1..].iter_mut() {
            *slot = v;
        }
    }
    out
}

/// Product of `pi` over the entries of a multi-index.
#[inline]
pub fn weight(pi: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&i| pi[i]).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::binomial;

    #[test]
    fn canonical_counts_match_binomial() {
        for m in 1..5 {
            for d in 1..4 {
                assert_eq!(canonical_indices(m, d).len(), binomial(m + d - 1, d));
            }
        }
        assert_eq!(
            canonical_indices(2, 2),
            vec![vec![0, 0], vec![0, 1], vec![1, 1]]
        );
    }

    #[test]
    fn flat_roundtrip() {
        for off in 0..27 {
            assert_eq!(flat(3, &unflat(3, 3, off)), off);
        }
    }
}
