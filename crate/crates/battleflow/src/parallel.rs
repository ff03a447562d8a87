//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) these run on rayon; without it
//! they degrade to plain iterators. Both variants preserve input order,
//! so pipeline output is identical either way.

pub use imp::map_collect;

#[cfg(feature = "parallel")]
mod imp {
    use rayon::prelude::*;

    /// Maps `f` over `items` and collects the results in input order.
    pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        items.par_iter().map(f).collect()
    }
}

#[cfg(not(feature = "parallel"))]
mod imp {
    /// Maps `f` over `items` and collects the results in input order.
    pub fn map_collect<T, R, F>(items: &[T], f: F) -> Vec<R>
    where
        T: Sync,
        R: Send,
        F: Fn(&T) -> R + Sync + Send,
    {
        items.iter().map(f).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preserves_input_order() {
        let items: Vec<u32> = (0..1000).collect();
        let doubled = map_collect(&items, |x| x * 2);
        assert_eq!(doubled, (0..1000).map(|x| x * 2).collect::<Vec<_>>());
    }
}
