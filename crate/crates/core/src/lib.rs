pub mod constraint;
pub mod decoder;
pub mod extract;
pub mod matching;
pub mod metrics;
pub mod scorer;
pub mod state;
pub mod synth;
pub mod tokens;
pub mod tune;
