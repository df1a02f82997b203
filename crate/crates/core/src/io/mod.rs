//! The `.n2` problem format, the pipeline that runs it, and JSON results.

mod document;
mod pipeline;
mod print;
mod problem;
mod syntax;

pub use document::{
    Checked, ClawDoc, ConfigEcho, EulerEntry, ExpectationDoc, Flux, GoldenMismatch, NamedCheck,
    PerFunction, PotentialLinkDoc, ProblemEcho, ResultDocument, SpecializationDoc, Variational,
    VerdictDoc, SCHEMA,
};
pub use pipeline::{run_pipeline, Options, Stage};
pub use print::print;
pub use problem::{parse, Expectation, FieldDecl, ParamDecl, ProblemFile, Specialization, Target};
pub use syntax::ParseError;
