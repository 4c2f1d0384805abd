//! Live-buffer accounting for [`Grid`](crate::Grid) allocations.
//!
//! Every grid constructed or cloned increments a process-wide counter and
//! every drop decrements it; the high-water mark lets tests bound the number
//! of image-sized buffers a transform keeps alive at once.

use core::sync::atomic::{AtomicUsize, Ordering};

static LIVE: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);

#[inline]
pub(crate) fn acquire() {
    let now = LIVE.fetch_add(1, Ordering::Relaxed) + 1;
    PEAK.fetch_max(now, Ordering::Relaxed);
}

#[inline]
pub(crate) fn release() {
    LIVE.fetch_sub(1, Ordering::Relaxed);
}

/// Number of grids currently alive.
pub fn live() -> usize {
    LIVE.load(Ordering::Relaxed)
}

/// Highest number of simultaneously live grids since the last reset.
pub fn peak() -> usize {
    PEAK.load(Ordering::Relaxed)
}

/// Resets the high-water mark to the current live count.
pub fn reset_peak() {
    PEAK.store(LIVE.load(Ordering::Relaxed), Ordering::Relaxed);
}
