pub mod cli;
pub mod criteria;
pub mod decisive;
pub mod dynamics;
pub mod epmodels;
pub mod error;
pub mod linalg2;
pub mod simplewave;
