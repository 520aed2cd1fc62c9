pub mod pointset;
pub mod poset;
pub mod sections;
pub mod retraction;
pub mod known;
pub mod split;
pub mod criteria;
pub mod solver;
pub mod report;
pub mod dot;
pub mod verify;
