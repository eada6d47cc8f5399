//! Runs the code samples of the guide in `book/` as doc-tests.

#[doc = include_str!("../../../book/src/overview.md")]
pub mod overview {}

#[doc = include_str!("../../../book/src/heatmaps.md")]
pub mod heatmaps {}

#[doc = include_str!("../../../book/src/codecharts.md")]
pub mod codecharts {}

#[doc = include_str!("../../../book/src/quality.md")]
pub mod quality {}

#[doc = include_str!("../../../book/src/metrics.md")]
pub mod metrics {}

#[doc = include_str!("../../../book/src/simulation.md")]
pub mod simulation {}

#[doc = include_str!("../../../book/src/service.md")]
pub mod service {}
