pub mod bits;
pub mod circuit;
pub mod dense;
pub mod diagonalize;
pub mod error;
pub mod evolution;
pub mod hamiltonian;
pub mod pauli;
pub mod statevec;
pub mod tableau;
pub mod models;
pub mod bench;
