pub mod eval;
pub mod fit;
pub mod simulate;
pub mod study;
