pub mod cli;
pub mod definetti;
pub mod error;
pub mod fock;
pub mod gibbs;
pub mod hartree;
pub mod lanczos;
pub mod linalg;
pub mod localize;
pub mod model;
pub mod output;
pub mod rdm;
pub mod sparse;
pub mod spectra;
pub mod verify;
