//! ConGolog programs with single-step transition semantics.

mod program;
mod semantics;

pub use program::{Part, Program};
pub use semantics::{
    do_end_states, do_executions, executions_up_to, is_final, is_situation_determined, trans,
    Configuration, Execution, SdWitness, Transition, DEFAULT_CONFIG_BUDGET,
};
pub(crate) use semantics::{final_with, successors, trans_with};
