//! Vaccine distribution network design: instance model, MIP formulation,
//! exact and cyclic solvers, enumeration oracle and benchmark harness.

pub mod bench;
pub mod cyclic;
pub mod exact;
pub mod formulation;
pub mod generator;
pub mod instance;
pub mod network;
pub mod oracle;
pub mod solution;

pub use cyclic::{cyclic_solve, CyclicOptions, CyclicState};
pub use exact::{solve_exact, ExactOutcome};
pub use formulation::{build_program1, decode_solution, restrict_frequencies, restrict_locations, VarIndex};
pub use generator::{generate_instance, Density, GeneratorConfig};
pub use instance::{read_instance, validate_instance, write_instance, Frequency, Instance, Violation};
pub use oracle::{oracle_enumerate, validate_solution};
pub use solution::NetworkSolution;
