//! Model operators: rotated spin creators, Hamiltonians, packet states.

pub mod hamiltonian;
pub mod packet;
pub mod spin;

pub use hamiltonian::{
    build_comparator_hamiltonian, build_free_hamiltonian, build_measurement_hamiltonian, comparator_generator,
    gate, lab_positions, measurement_generator, number_operator, one_body_matrix, CouplingSpec,
};
pub use packet::{build_packet_state, Internal, PacketEntry, WavepacketSpec};
pub use spin::{rotated_creator, SpinAxis, Updown};
