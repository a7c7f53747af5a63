pub mod zeta_eval;
pub mod zero_locator;
pub mod ce_engine;
pub mod rh_search;
pub mod strip_sweep;
pub mod decoding;
pub mod cli;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/zeta.md")]
    mod zeta {}
    #[doc = include_str!("../../../book/src/zeros.md")]
    mod zeros {}
    #[doc = include_str!("../../../book/src/cross_entropy.md")]
    mod cross_entropy {}
    #[doc = include_str!("../../../book/src/rh_search.md")]
    mod rh_search {}
    #[doc = include_str!("../../../book/src/sweep.md")]
    mod sweep {}
    #[doc = include_str!("../../../book/src/decoding.md")]
    mod decoding {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
