//! Checkpoint surgery: hop-axis interpolation of the generator head and the
//! on-disk checkpoint container.

pub mod baseline;
pub mod checkpoint;
pub mod interp;
pub mod retarget;

pub use baseline::desk_baseline;
pub use checkpoint::{Checkpoint, FORMAT_VERSION};
pub use interp::{interp1d, interp_axis, interp_axis_f64};
pub use retarget::{retarget, HeadInit, RetargetPlan};
