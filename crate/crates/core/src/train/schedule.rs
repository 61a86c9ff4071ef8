use std::f64::consts::PI;

use super::config::TrainConfig;

/// Cyclic learning rate: linear warmup from `min_lr` to `max_lr`, cosine decay
/// back to `min_lr` at the end of the cycle, then repeat.
pub fn lr_at(step: u64, tc: &TrainConfig) -> f64 {
    let (lo, hi) = (tc.min_lr, tc.max_lr);
    let c = step % tc.cycle_steps.max(1);
    let w = tc.warmup_steps;
    if c == w {
        return hi;
    }
    let lr = if c < w {
        lo + (hi - lo) * (c as f64 / w as f64)
    } else {
        let p = (c - w) as f64 / (tc.cycle_steps - w) as f64;
        lo + (hi - lo) * 0.5 * (1.0 + (PI * p).cos())
    };
    lr.clamp(lo, hi)
}
