pub mod apls;
pub mod buildings;
pub mod geometry;
pub mod ingest;
pub mod mask;
pub mod pipeline;
pub mod road_graph;
