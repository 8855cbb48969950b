//! Exact counting and lexicographic (un)ranking of combinations and
//! permutations. All counts are exact in `u128`; overflow is reported
//! rather than wrapped.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CombinatoricsError {
    #[error("subset size {k} exceeds ground set size {n}")]
    KTooLarge { n: usize, k: usize },
    #[error("rank {rank} out of range: only {count} objects")]
    RankOutOfRange { rank: u128, count: u128 },
    #[error("count overflows u128")]
    Overflow,
    #[error("not a strictly increasing subset of 0..{n}")]
    MalformedSubset { n: usize },
}

/// Binomial coefficient C(n, k), or `None` on u128 overflow.
///
/// The running product is a binomial coefficient at every step, so each
/// intermediate division is exact.
pub fn binomial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k) as u128;
    let n = n as u128;
    let mut c: u128 = 1;
    for i in 1..=k {
        c = c.checked_mul(n - k + i)? / i;
    }
    Some(c)
}

/// Falling factorial n · (n-1) · … · (n-k+1), or `None` on overflow.
pub fn falling_factorial(n: usize, k: usize) -> Option<u128> {
    if k > n {
        return Some(0);
    }
    let mut c: u128 = 1;
    for i in 0..k {
        c = c.checked_mul((n - i) as u128)?;
    }
    Some(c)
}

/// k!, or `None` on overflow (k ≥ 35 overflows u128).
pub fn factorial(k: usize) -> Option<u128> {
    falling_factorial(k, k)
}

/// The `rank`-th k-subset of {0, …, n-1} in lexicographic order of the
/// sorted tuples, so rank 0 is (0, 1, …, k-1).
pub fn unrank_combination(rank: u128, n: usize, k: usize) -> Result<Vec<usize>, CombinatoricsError> {
    if k > n {
        return Err(CombinatoricsError::KTooLarge { n, k });
    }
    let total = binomial(n, k).ok_or(CombinatoricsError::Overflow)?;
    if rank >= total {
        return Err(CombinatoricsError::RankOutOfRange { rank, count: total });
    }
    let mut out = Vec::with_capacity(k);
    let mut r = rank;
    let mut x = 0usize;
    for i in 0..k {
        // Subsets beginning with x fill C(n-1-x, k-1-i) consecutive ranks.
        loop {
            let c = binomial(n - 1 - x, k - 1 - i).ok_or(CombinatoricsError::Overflow)?;
            if r < c {
                break;
            }
            r -= c;
            x += 1;
        }
        out.push(x);
        x += 1;
    }
    Ok(out)
}

/// Lexicographic rank of a strictly increasing k-subset of {0, …, n-1}.
/// Inverse of [`unrank_combination`].
pub fn rank_combination(subset: &[usize], n: usize) -> Result<u128, CombinatoricsError> {
    let k = subset.len();
    if k > n {
        return Err(CombinatoricsError::KTooLarge { n, k });
    }
    let mut prev: Option<usize> = None;
    for &v in subset {
        if v >= n || prev.is_some_and(|p| v <= p) {
            return Err(CombinatoricsError::MalformedSubset { n });
        }
        prev = Some(v);
    }
    let mut rank: u128 = 0;
    let mut lo = 0usize;
    for (i, &v) in subset.iter().enumerate() {
        for x in lo..v {
            rank = rank
                .checked_add(binomial(n - 1 - x, k - 1 - i).ok_or(CombinatoricsError::Overflow)?)
                .ok_or(CombinatoricsError::Overflow)?;
        }
        lo = v + 1;
    }
    Ok(rank)
}

/// The `rank`-th k-arrangement (ordered selection without repetition) of
/// {0, …, n-1} in lexicographic order, so rank 0 is (0, 1, …, k-1).
pub fn unrank_arrangement(rank: u128, n: usize, k: usize) -> Result<Vec<usize>, CombinatoricsError> {
    if k > n {
        return Err(CombinatoricsError::KTooLarge { n, k });
    }
    let total = falling_factorial(n, k).ok_or(CombinatoricsError::Overflow)?;
    if rank >= total {
        return Err(CombinatoricsError::RankOutOfRange { rank, count: total });
    }
    let mut pool: Vec<usize> = (0..n).collect();
    let mut out = Vec::with_capacity(k);
    let mut r = rank;
    for i in 0..k {
        // Arrangements sharing the first i entries step through the pool in
        // blocks of (n-1-i) · (n-2-i) · … arrangements of the remainder.
        let base = falling_factorial(n - 1 - i, k - 1 - i).ok_or(CombinatoricsError::Overflow)?;
        let d = (r / base) as usize;
        r %= base;
        out.push(pool.remove(d));
    }
    Ok(out)
}

/// The `rank`-th permutation of (0, …, k-1) in lexicographic order,
/// decoded from the factorial number system.
pub fn unrank_permutation(rank: u128, k: usize) -> Result<Vec<usize>, CombinatoricsError> {
    let total = factorial(k).ok_or(CombinatoricsError::Overflow)?;
    if rank >= total {
        return Err(CombinatoricsError::RankOutOfRange { rank, count: total });
    }
    let mut digits = vec![0u128; k];
    let mut r = rank;
    for i in (1..=k).rev() {
        let base = factorial(i - 1).ok_or(CombinatoricsError::Overflow)?;
        digits[k - i] = r / base;
        r %= base;
    }
    let mut pool: Vec<usize> = (0..k).collect();
    let mut out = Vec::with_capacity(k);
    for d in digits {
        out.push(pool.remove(d as usize));
    }
    Ok(out)
}
