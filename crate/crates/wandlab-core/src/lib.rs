pub mod bigfloat;
pub mod compose;
pub mod graph;
pub mod interval;
pub mod model;
pub mod orbit;
pub mod params;
pub mod render;
pub mod tower;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
