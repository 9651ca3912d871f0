//! Reduced group algebra computations at desk scale: word problems, balls,
//! group-algebra elements, compression norms, approximate invariant means and
//! marked-group experiments.

pub mod algebra;
pub mod ball;
pub mod compression;
pub mod dehn;
pub mod error;
pub mod finite;
pub mod group;
pub mod marked;
pub mod means;
pub mod notation;
pub mod stallings;
pub mod word;

pub use ball::Ball;
pub use error::{Error, Result};
pub use group::{Element, Group};
pub use notation::parse_group;
pub use word::{Letter, Word};
