pub mod error;
pub mod params;
pub mod rational;
pub mod weights;
pub mod series;
pub mod rates;
pub mod diagonal;
pub mod fit;
pub mod seqspace;
pub mod nuclear;
pub mod sweep;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/parameters.md")]
    mod parameters {}
    #[doc = include_str!("../../../book/src/weights.md")]
    mod weights {}
    #[doc = include_str!("../../../book/src/diagonal.md")]
    mod diagonal {}
    #[doc = include_str!("../../../book/src/sequence-spaces.md")]
    mod sequence_spaces {}
    #[doc = include_str!("../../../book/src/rates-nuclearity.md")]
    mod rates_nuclearity {}
    #[doc = include_str!("../../../book/src/sweeps.md")]
    mod sweeps {}
}
