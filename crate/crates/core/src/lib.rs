pub mod cmatrix;
pub mod corpus;
pub mod discover;
pub mod error;
pub mod opspace;
pub mod product;
pub mod runner;
pub mod sample;
pub mod symmetry;
pub mod triple;
pub mod verify;
