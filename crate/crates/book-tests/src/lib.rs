//! Compiles the guide in `book/src` as doc-tests of this crate.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}
#[doc = include_str!("../../../book/src/operator.md")]
pub mod operator {}
#[doc = include_str!("../../../book/src/coefficients.md")]
pub mod coefficients {}
#[doc = include_str!("../../../book/src/special.md")]
pub mod special {}
#[doc = include_str!("../../../book/src/boxes.md")]
pub mod boxes {}
#[doc = include_str!("../../../book/src/disk.md")]
pub mod disk {}
#[doc = include_str!("../../../book/src/asymptotics.md")]
pub mod asymptotics {}
#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
