pub mod baseline;
pub mod bench;
pub mod geometry;
pub mod grasp;
pub mod motion;
pub mod plan;
pub mod refine;
pub mod rmap;
pub mod scene;
pub mod svg;
