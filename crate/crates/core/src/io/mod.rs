//! On-disk formats: raw float arrays, ASCII PLY point clouds, checkpoints.

mod ply;
mod raw;

pub mod checkpoint;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
pub use ply::write_ply;
pub use raw::{read_raw, write_raw, RawArray};
