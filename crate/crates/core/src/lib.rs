//! Exact network-calculus delay bounds for packetized flows.

pub mod num;
pub mod pwfn;
pub mod regulation;
pub mod service;
pub mod bounds;
pub mod trace;
pub mod units;
pub mod scenario;
