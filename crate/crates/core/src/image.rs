//! Raster containers: a generic row-major [`Grid`], validated intensity
//! channels, multi-channel [`Image`]s and integer-labelled [`Mask`]s.

use alloc::vec::Vec;
use alloc::{format, vec};

use crate::buffers;
use crate::error::{Error, Result};
use crate::math;

/// Row-major 2-D buffer.
#[derive(Debug, PartialEq)]
pub struct Grid<T> {
    height: usize,
    width: usize,
    data: Vec<T>,
}

impl<T> Grid<T> {
    pub fn from_vec(height: usize, width: usize, data: Vec<T>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::invalid(
                "grid",
                format!("dimensions must be positive, got {height}x{width}"),
            ));
        }
        if data.len() != height * width {
            return Err(Error::invalid(
                "grid",
                format!(
                    "buffer holds {} values, {height}x{width} needs {}",
                    data.len(),
                    height * width
                ),
            ));
        }
        Ok(Self::from_parts(height, width, data))
    }

    pub(crate) fn from_parts(height: usize, width: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), height * width);
        buffers::acquire();
        Grid {
            height,
            width,
            data,
        }
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self::from_parts(height, width, data)
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> &T {
        &self.data[row * self.width + col]
    }

    #[inline]
    pub fn get_mut(&mut self, row: usize, col: usize) -> &mut T {
        &mut self.data[row * self.width + col]
    }

    #[inline]
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.data[row * self.width..(row + 1) * self.width]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Grid<U> {
        Grid::from_parts(self.height, self.width, self.data.iter().map(f).collect())
    }

    pub fn into_vec(mut self) -> Vec<T> {
        core::mem::take(&mut self.data)
    }

    pub(crate) fn ensure_same_dims<U>(&self, other: &Grid<U>) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::DimensionMismatch {
                expected: self.dims(),
                found: other.dims(),
            });
        }
        Ok(())
    }
}

impl<T: Clone> Grid<T> {
    pub fn filled(height: usize, width: usize, value: T) -> Self {
        Self::from_parts(height, width, vec![value; height * width])
    }
}

impl<T: Clone> Clone for Grid<T> {
    fn clone(&self) -> Self {
        Self::from_parts(self.height, self.width, self.data.clone())
    }
}

impl<T> Drop for Grid<T> {
    fn drop(&mut self) {
        buffers::release();
    }
}

/// One intensity plane with every value finite and inside `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageChannel(Grid<f64>);

impl ImageChannel {
    /// Validates finiteness and the unit range.
    pub fn new(grid: Grid<f64>) -> Result<Self> {
        if let Some((i, v)) = grid
            .as_slice()
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0 || **v > 1.0)
        {
            return Err(Error::invalid(
                "image channel",
                format!("value {v} at index {i} is outside [0, 1]"),
            ));
        }
        Ok(ImageChannel(grid))
    }

    /// Clamps every value into `[0, 1]`; non-finite values become 0.
    pub fn from_clamped(mut grid: Grid<f64>) -> Self {
        for v in grid.as_mut_slice() {
            *v = if v.is_finite() { math::clamp01(*v) } else { 0.0 };
        }
        ImageChannel(grid)
    }

    pub fn from_vec(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        Self::new(Grid::from_vec(height, width, data)?)
    }

    pub fn constant(height: usize, width: usize, value: f64) -> Result<Self> {
        Self::from_vec(height, width, vec![value; height * width])
    }

    #[inline]
    pub fn grid(&self) -> &Grid<f64> {
        &self.0
    }

    #[inline]
    pub fn into_grid(self) -> Grid<f64> {
        self.0
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.0.height()
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.0.width()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        *self.0.get(row, col)
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }
}

/// Planar multi-channel image with intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    channels: Vec<ImageChannel>,
}

impl Image {
    pub fn from_channels(channels: Vec<ImageChannel>) -> Result<Self> {
        let first = channels
            .first()
            .ok_or_else(|| Error::invalid("image", "at least one channel is required"))?;
        let dims = first.dims();
        for ch in &channels[1..] {
            if ch.dims() != dims {
                return Err(Error::DimensionMismatch {
                    expected: dims,
                    found: ch.dims(),
                });
            }
        }
        Ok(Image { channels })
    }

    /// Builds an image from an interleaved (`HWC`) buffer.
    pub fn from_interleaved(
        height: usize,
        width: usize,
        channels: usize,
        data: &[f64],
    ) -> Result<Self> {
        if channels == 0 {
            return Err(Error::invalid("image", "at least one channel is required"));
        }
        if data.len() != height * width * channels {
            return Err(Error::invalid(
                "image",
                format!(
                    "interleaved buffer holds {} values, {height}x{width}x{channels} needs {}",
                    data.len(),
                    height * width * channels
                ),
            ));
        }
        let planes = (0..channels)
            .map(|c| {
                let plane = data.iter().skip(c).step_by(channels).copied().collect();
                ImageChannel::from_vec(height, width, plane)
            })
            .collect::<Result<Vec<_>>>()?;
        Image::from_channels(planes)
    }

    pub fn from_fn(
        height: usize,
        width: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let planes = (0..channels)
            .map(|c| ImageChannel::new(Grid::from_fn(height, width, |r, col| f(r, col, c))))
            .collect::<Result<Vec<_>>>()?;
        Image::from_channels(planes)
    }

    pub fn to_interleaved(&self) -> Vec<f64> {
        let n = self.height() * self.width();
        let c = self.channels.len();
        let mut out = vec![0.0; n * c];
        for (ci, ch) in self.channels.iter().enumerate() {
            for (i, v) in ch.as_slice().iter().enumerate() {
                out[i * c + ci] = *v;
            }
        }
        out
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.channels[0].height()
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.channels[0].width()
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        self.channels[0].dims()
    }

    #[inline]
    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    #[inline]
    pub fn channel(&self, index: usize) -> &ImageChannel {
        &self.channels[index]
    }

    pub fn channels(&self) -> &[ImageChannel] {
        &self.channels
    }

    pub fn into_channels(self) -> Vec<ImageChannel> {
        self.channels
    }

    /// Applies `f` to each channel plane and reassembles the result.
    pub fn map_channels(&self, mut f: impl FnMut(&ImageChannel) -> ImageChannel) -> Image {
        Image {
            channels: self.channels.iter().map(&mut f).collect(),
        }
    }

    /// Largest absolute per-pixel difference; `None` when shapes differ.
    pub fn max_abs_diff(&self, other: &Image) -> Option<f64> {
        if self.dims() != other.dims() || self.channel_count() != other.channel_count() {
            return None;
        }
        Some(
            self.channels
                .iter()
                .zip(&other.channels)
                .flat_map(|(a, b)| a.as_slice().iter().zip(b.as_slice()))
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max),
        )
    }

    /// Luma plane (ITU-R 601 weights) for RGB images; the mean of channels
    /// otherwise.
    pub fn luma(&self) -> Grid<f64> {
        let (h, w) = self.dims();
        if self.channels.len() == 3 {
            let (r, g, b) = (
                self.channels[0].as_slice(),
                self.channels[1].as_slice(),
                self.channels[2].as_slice(),
            );
            Grid::from_parts(
                h,
                w,
                (0..h * w)
                    .map(|i| 0.299 * r[i] + 0.587 * g[i] + 0.114 * b[i])
                    .collect(),
            )
        } else {
            let k = self.channels.len() as f64;
            Grid::from_parts(
                h,
                w,
                (0..h * w)
                    .map(|i| self.channels.iter().map(|c| c.as_slice()[i]).sum::<f64>() / k)
                    .collect(),
            )
        }
    }

    /// Bilinear resample to `(height, width)` with half-pixel centres.
    pub fn resize_bilinear(&self, height: usize, width: usize) -> Result<Image> {
        if height == 0 || width == 0 {
            return Err(Error::invalid("resize", "target dimensions must be positive"));
        }
        if self.dims() == (height, width) {
            return Ok(self.clone());
        }
        Ok(self.map_channels(|ch| {
            ImageChannel::from_clamped(resize_bilinear(ch.grid(), height, width))
        }))
    }

    /// Area-average (box filter) resample.
    pub fn resize_box(&self, height: usize, width: usize) -> Result<Image> {
        if height == 0 || width == 0 {
            return Err(Error::invalid("resize", "target dimensions must be positive"));
        }
        Ok(self.map_channels(|ch| ImageChannel::from_clamped(resize_box(ch.grid(), height, width))))
    }
}

/// Per-pixel class labels; 0 is background.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask(Grid<u8>);

impl Mask {
    pub fn new(grid: Grid<u8>) -> Self {
        Mask(grid)
    }

    pub fn from_vec(height: usize, width: usize, labels: Vec<u8>) -> Result<Self> {
        Ok(Mask(Grid::from_vec(height, width, labels)?))
    }

    /// Checks every label is below `class_count`.
    pub fn validate_labels(&self, class_count: usize) -> Result<()> {
        match self.0.as_slice().iter().find(|&&l| l as usize >= class_count) {
            Some(l) => Err(Error::invalid(
                "mask",
                format!("label {l} exceeds declared class count {class_count}"),
            )),
            None => Ok(()),
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid<u8> {
        &self.0
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u8 {
        *self.0.get(row, col)
    }

    #[inline]
    pub fn as_slice(&self) -> &[u8] {
        self.0.as_slice()
    }

    /// Sorted set of labels present.
    pub fn labels(&self) -> Vec<u8> {
        let mut seen = [false; 256];
        for &l in self.0.as_slice() {
            seen[l as usize] = true;
        }
        (0..=255u8).filter(|&l| seen[l as usize]).collect()
    }

    pub fn resize_nearest(&self, height: usize, width: usize) -> Result<Mask> {
        if height == 0 || width == 0 {
            return Err(Error::invalid("resize", "target dimensions must be positive"));
        }
        let (h, w) = self.dims();
        let sy = h as f64 / height as f64;
        let sx = w as f64 / width as f64;
        Ok(Mask(Grid::from_fn(height, width, |r, c| {
            let y = (math::floor((r as f64 + 0.5) * sy) as usize).min(h - 1);
            let x = (math::floor((c as f64 + 0.5) * sx) as usize).min(w - 1);
            *self.0.get(y, x)
        })))
    }
}

/// Samples `grid` at fractional `(y, x)` with bilinear weights; positions
/// outside the grid read as `fill`.
#[inline]
pub(crate) fn sample_bilinear(grid: &Grid<f64>, y: f64, x: f64, fill: f64) -> f64 {
    let (h, w) = grid.dims();
    let y0 = math::floor(y);
    let x0 = math::floor(x);
    let fy = y - y0;
    let fx = x - x0;
    let (y0, x0) = (y0 as isize, x0 as isize);
    let at = |r: isize, c: isize| -> f64 {
        if r < 0 || c < 0 || r >= h as isize || c >= w as isize {
            fill
        } else {
            *grid.get(r as usize, c as usize)
        }
    };
    let top = at(y0, x0) * (1.0 - fx) + at(y0, x0 + 1) * fx;
    let bottom = at(y0 + 1, x0) * (1.0 - fx) + at(y0 + 1, x0 + 1) * fx;
    top * (1.0 - fy) + bottom * fy
}

/// Bilinear resize with half-pixel centres and edge replication.
pub(crate) fn resize_bilinear(grid: &Grid<f64>, height: usize, width: usize) -> Grid<f64> {
    let (h, w) = grid.dims();
    let sy = h as f64 / height as f64;
    let sx = w as f64 / width as f64;
    Grid::from_fn(height, width, |r, c| {
        let y = ((r as f64 + 0.5) * sy - 0.5).clamp(0.0, (h - 1) as f64);
        let x = ((c as f64 + 0.5) * sx - 0.5).clamp(0.0, (w - 1) as f64);
        let y0 = math::floor(y) as usize;
        let x0 = math::floor(x) as usize;
        let y1 = (y0 + 1).min(h - 1);
        let x1 = (x0 + 1).min(w - 1);
        let fy = y - y0 as f64;
        let fx = x - x0 as f64;
        let top = *grid.get(y0, x0) * (1.0 - fx) + *grid.get(y0, x1) * fx;
        let bottom = *grid.get(y1, x0) * (1.0 - fx) + *grid.get(y1, x1) * fx;
        top * (1.0 - fy) + bottom * fy
    })
}

/// Box-filter resize: each output pixel is the area-weighted mean of the
/// source pixels its footprint covers.
pub(crate) fn resize_box(grid: &Grid<f64>, height: usize, width: usize) -> Grid<f64> {
    let (h, w) = grid.dims();
    let rows = box_weights(h, height);
    let cols = box_weights(w, width);
    Grid::from_fn(height, width, |r, c| {
        let mut acc = 0.0;
        let mut norm = 0.0;
        for &(sy, wy) in &rows[r] {
            for &(sx, wx) in &cols[c] {
                acc += *grid.get(sy, sx) * wy * wx;
                norm += wy * wx;
            }
        }
        acc / norm
    })
}

/// Source indices and overlap lengths for each destination cell of a
/// 1-D box resample from `src` to `dst` samples.
fn box_weights(src: usize, dst: usize) -> Vec<Vec<(usize, f64)>> {
    let scale = src as f64 / dst as f64;
    (0..dst)
        .map(|d| {
            let lo = d as f64 * scale;
            let hi = (d + 1) as f64 * scale;
            let first = math::floor(lo) as usize;
            let last = (math::ceil(hi) as usize).min(src);
            (first..last)
                .filter_map(|s| {
                    let overlap = (hi.min((s + 1) as f64) - lo.max(s as f64)).max(0.0);
                    (overlap > 0.0).then_some((s, overlap))
                })
                .collect()
        })
        .collect()
}
