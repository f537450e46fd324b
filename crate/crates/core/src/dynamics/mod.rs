//! Truncated Fock-space dynamics: operators, Hamiltonian variants,
//! propagation and fidelity between branches.

pub mod echo;
pub mod evolve;
pub mod hamiltonian;
pub mod operator;
pub mod space;
pub mod state;

pub use echo::{loschmidt_echo, EchoOptions, EchoResult};
pub use evolve::{evolve, evolve_terms, uniform_times, Trajectory};
pub use hamiltonian::{assemble_terms, Frame, HamiltonianSpec, Term, TermList, Variant};
pub use operator::SparseOperator;
pub use space::{BasisState, CavityMode, HilbertSpace, Level};
pub use state::{coherent_state, AtomicState, StateVector};
