//! Pauli algebra, Clifford circuits and stabilizer utilities.

pub mod circuit;
pub mod pauli;
pub mod random;
pub mod stabilizer;
pub mod tableau;

pub use circuit::{CliffordCircuit, CliffordGate};
pub use pauli::{Pauli, PauliOperator};
pub use random::{random_clifford, random_clifford_with_rng};
pub use stabilizer::{
    basis_images, conjugate_pauli, output_stabilizers, random_group_element, resource_stabilizers,
    StabilizerGroupView,
};
pub use tableau::Tableau;
