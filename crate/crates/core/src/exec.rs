//! Parallel map helpers.
//!
//! Every scan in this crate is a pure map over independent inputs followed by
//! order-preserving collection, so results are bitwise identical whether the
//! `parallel` feature is on (rayon) or off (plain iterator). Reductions are
//! always performed sequentially on the collected vector to keep floating
//! point evaluation order fixed.

/// Maps `f` over `items`, in parallel when the `parallel` feature is enabled.
/// Output order matches input order.
#[cfg(feature = "parallel")]
pub fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

/// Maps `f` over `items`, in parallel when the `parallel` feature is enabled.
/// Output order matches input order.
#[cfg(not(feature = "parallel"))]
pub fn par_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Always-sequential map with the same signature contract as [`par_map`].
/// Exists so benchmarks can compare the two paths inside one binary.
pub fn seq_map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn par_map_preserves_order() {
        let xs: Vec<i64> = (0..1000).collect();
        let doubled = par_map(&xs, |x| x * 2);
        let expected = seq_map(&xs, |x| x * 2);
        assert_eq!(doubled, expected);
    }
}
