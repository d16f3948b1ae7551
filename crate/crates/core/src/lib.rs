pub mod commuting;
pub mod exactmath;
pub mod groebner;
pub mod idealgen;
pub mod mub;
pub mod polyring;
pub mod realpoints;
