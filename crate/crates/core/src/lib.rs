pub mod cli;
pub mod dga;
pub mod dichotomy;
pub mod graded_algebra;
pub mod les;
pub mod linalg;
pub mod minimal_model;
pub mod rational;
pub mod spaces;
