//! Theory and mapping files, reports and the command surface.

mod command;
mod lexer;
mod parser;
mod printer;
mod project;

pub use command::{
    error_output, exit_code, run_command, CommandOutput, GraphFormat, Level, Options, Verb,
    EXIT_BUDGET, EXIT_FAILED, EXIT_OK, EXIT_USAGE,
};
pub use parser::{
    parse_actions, parse_formula, parse_mapping, parse_program, parse_theory, ActionDecl, Literal,
    MappingDecl, TheoryDecl,
};
pub use printer::{print_mapping, print_theory};
pub use project::{
    build_mapping, build_theory, joint_domain, load_project, parse_project, ProjectSource,
};
