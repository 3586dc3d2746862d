//! Enumeration of multisets of indices, i.e. non-decreasing index tuples.

use std::ops::ControlFlow;

use num_bigint::BigUint;
use num_traits::One;

/// C(n + k − 1, k): the number of size-k multisets drawn from n items.
pub fn multiset_count(n: usize, k: usize) -> BigUint {
    if n == 0 {
        return if k == 0 { BigUint::one() } else { BigUint::default() };
    }
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - 1 + k - i) / BigUint::from(i + 1);
    }
    acc
}

/// Visit every non-decreasing `k`-tuple over `start..n` in lexicographic
/// order. The visitor may stop the walk early.
pub fn for_each_multiset<F>(n: usize, k: usize, start: usize, mut f: F) -> ControlFlow<()>
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    if k == 0 {
        return f(&[]);
    }
    if start >= n {
        return ControlFlow::Continue(());
    }
    let mut idx = vec![start; k];
    loop {
        f(&idx)?;
        // advance the rightmost index that can still grow
        let mut i = k;
        loop {
            if i == 0 {
                return ControlFlow::Continue(());
            }
            i -= 1;
            if idx[i] + 1 < n {
                break;
            }
        }
        let v = idx[i] + 1;
        for x in &mut idx[i..] {
            *x = v;
        }
    }
}
