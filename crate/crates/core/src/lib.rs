//! Task-data-user assignment for mobile crowd sensing with data reuse, and
//! the auctions built on it.

pub mod assign;
pub mod cli;
pub mod harness;
pub mod model;
pub mod oracle;
pub mod randomized;
pub mod simgen;
pub mod vcg;
