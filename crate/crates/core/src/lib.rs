//! Security-hardened XML validation against a vetted XSD subset.

pub mod content;
pub mod diag;
pub mod limits;
pub mod pipeline;
pub mod simple;
pub mod text;
pub mod validate;
pub mod xsd;
pub mod xml;

pub use diag::{DiagCode, Diagnostic};
pub use limits::Limits;
pub use text::{SecureText, TextError};
