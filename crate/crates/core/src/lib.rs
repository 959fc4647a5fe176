pub mod birkhoff;
pub mod catalog;
pub mod dmod;
pub mod evolve;
pub mod exact;
pub mod gw;
pub mod rings;
pub mod text;
pub mod weyl;
