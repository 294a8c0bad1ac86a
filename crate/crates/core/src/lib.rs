pub mod netlist;
pub mod truth;
pub mod isa;
pub mod simulator;
pub mod generators;
pub mod lut;
pub mod esop;
pub mod report;
pub mod area;
pub mod delay;
pub mod verifier;
