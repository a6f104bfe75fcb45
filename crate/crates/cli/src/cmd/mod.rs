pub mod batch;
pub mod coverage;
pub mod push;
pub mod reproduce;
