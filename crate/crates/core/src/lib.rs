pub mod arith;
pub mod counting;
pub mod dwcore;
pub mod flowavg;
pub mod thermo;
