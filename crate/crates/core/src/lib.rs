pub mod geometry;
pub mod vision;
pub mod trajectory;
pub mod control;
pub mod metrics;
pub mod scenario;
pub mod pipeline;
