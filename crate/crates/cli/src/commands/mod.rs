pub mod coupled;
pub mod dump_tables;
pub mod potential;
pub mod threshold;
pub mod verify;
