//! File formats, preset scenes and the command-line front end.

pub mod artifacts;
pub mod cli;
pub mod presets;
pub mod report;
pub mod scene_file;
pub mod sdf_file;
pub mod trace;

pub use scene_file::{load_scene, LoadedScene, SceneFile};
