pub mod ast;
pub mod corpus;
pub mod names;
pub mod parse;
pub mod qnum;
pub mod sos;
pub mod reduce;
pub mod equiv;
pub mod gen;
