pub mod corpus;
pub mod crossed;
pub mod euler;
pub mod gamma;
pub mod matrix;
pub mod padic;
pub mod poly;
pub mod series;
pub mod workbench;
