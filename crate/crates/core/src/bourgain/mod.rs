pub mod bilinear;
pub mod cutoff;
pub mod embedding;
pub mod epsilon;
pub mod kernels;
pub mod linear_estimates;
pub mod membership;
pub mod nonequivalence;
pub mod norm;
