pub mod circuit;
pub mod cost;
pub mod graph;
pub mod model;
pub mod solve;
pub mod knit;
