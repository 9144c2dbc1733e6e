pub mod field;
pub mod linalg;
pub mod bivar;
pub mod poly;
pub mod proj;
pub mod variety;
pub mod seed;
pub mod join;
pub mod oracle;
pub mod instance;
pub mod commands;
