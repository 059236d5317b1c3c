pub mod builders;
pub mod complex;
pub mod error;
pub mod kernels;
pub mod metrics;
pub mod reduction;
pub mod rng;
pub mod stabilize;
pub mod summaries;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/complexes.md")]
    mod complexes {}
    #[doc = include_str!("../../../book/src/persistence.md")]
    mod persistence {}
    #[doc = include_str!("../../../book/src/builders.md")]
    mod builders {}
    #[doc = include_str!("../../../book/src/summaries.md")]
    mod summaries {}
    #[doc = include_str!("../../../book/src/kernels.md")]
    mod kernels {}
    #[doc = include_str!("../../../book/src/stabilize.md")]
    mod stabilize {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
}
