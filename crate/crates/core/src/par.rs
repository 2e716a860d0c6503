//! Deterministic data-parallel reductions.
//!
//! All quadrature sums in this crate go through [`sum_indexed`], which
//! reduces over a fixed binary tree: leaves are contiguous index blocks of
//! at most [`LEAF`] elements summed in index order, and internal nodes
//! combine left-then-right at the block midpoint. The tree shape depends
//! only on the index range, never on thread scheduling, so results are
//! bitwise identical with the `parallel` feature on or off and for any
//! thread count.

/// Largest block summed sequentially before the range splits.
const LEAF: usize = 256;

/// Values that can be accumulated by the deterministic reducer.
pub trait SumItem: Send + Copy {
    fn zero() -> Self;
    fn add(self, other: Self) -> Self;
}

impl SumItem for f64 {
    fn zero() -> Self {
        0.0
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
}

impl SumItem for crate::expr::C {
    fn zero() -> Self {
        crate::expr::C::new(0.0, 0.0)
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
}

impl<A: SumItem, B: SumItem> SumItem for (A, B) {
    fn zero() -> Self {
        (A::zero(), B::zero())
    }
    fn add(self, other: Self) -> Self {
        (self.0.add(other.0), self.1.add(other.1))
    }
}

impl<T: SumItem, const N: usize> SumItem for [T; N] {
    fn zero() -> Self {
        [T::zero(); N]
    }
    fn add(self, other: Self) -> Self {
        let mut out = self;
        for (o, r) in out.iter_mut().zip(other.iter()) {
            *o = o.add(*r);
        }
        out
    }
}

/// Sum `f(0) + f(1) + ... + f(len-1)` over the fixed reduction tree.
pub fn sum_indexed<T, F>(len: usize, f: F) -> T
where
    T: SumItem,
    F: Fn(usize) -> T + Sync,
{
    sum_range(0, len, &f)
}

fn sum_range<T, F>(start: usize, len: usize, f: &F) -> T
where
    T: SumItem,
    F: Fn(usize) -> T + Sync,
{
    if len <= LEAF {
        let mut acc = T::zero();
        for i in start..start + len {
            acc = acc.add(f(i));
        }
        return acc;
    }
    let half = len / 2;
    #[cfg(feature = "parallel")]
    {
        let (a, b) = rayon::join(
            || sum_range(start, half, f),
            || sum_range(start + half, len - half, f),
        );
        a.add(b)
    }
    #[cfg(not(feature = "parallel"))]
    {
        let a = sum_range(start, half, f);
        let b = sum_range(start + half, len - half, f);
        a.add(b)
    }
}

/// Pairwise sum of a slice over the same tree as [`sum_indexed`].
pub fn pairwise_sum<T: SumItem + Sync>(xs: &[T]) -> T {
    sum_indexed(xs.len(), |i| xs[i])
}

/// Map `f` over `0..len`, collecting results in index order. Each element
/// is computed independently, so the output is identical with or without
/// the `parallel` feature.
pub fn map_indexed<T, F>(len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..len).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..len).map(f).collect()
    }
}

/// Cap the global thread pool from `CRLAB_THREADS`. Returns the cap if one
/// was applied. Call once at startup; later calls are ignored by rayon.
/// Without the `parallel` feature the variable has no effect.
pub fn configure_threads_from_env() -> Option<usize> {
    let raw = std::env::var("CRLAB_THREADS").ok()?;
    let k: usize = raw.trim().parse().ok().filter(|&k| k >= 1)?;
    #[cfg(feature = "parallel")]
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
        Some(k)
    }
    #[cfg(not(feature = "parallel"))]
    {
        Some(k)
    }
}
