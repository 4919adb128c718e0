//! Surface syntax: lexer, parser, source-file model and printer.

mod lexer;
mod parser;
mod source;

pub use crate::ast::pretty;
pub use lexer::{lex, Diagnostic, Pos};
pub use parser::{parse_file, parse_process, parse_process_with};
pub use source::{build_register, used_types, Check, CheckKind, SourceFile, StateDecl};
