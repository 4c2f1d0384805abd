//! 2-D DFT of image planes and the amplitude/phase split.
//!
//! Conventions, fixed so golden values are stable:
//!
//! * forward transform is unnormalized, `F[u,v] = Σ x[r,c]·exp(-2πi(ur/H + vc/W))`;
//! * inverse carries the `1/(HW)` factor, so `Σ|x|² = (1/HW)·Σ|F|²`;
//! * spectra are stored DC-centred: frequency `(0, 0)` sits at
//!   `(⌊H/2⌋, ⌊W/2⌋)`;
//! * the phase of an exactly-zero bin is 0 and phases lie in `(-π, π]`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fft::{Direction, FftPlan};
use crate::image::{Grid, ImageChannel};
use crate::math;

/// DC-centred complex spectrum of one image plane.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumChannel(Grid<Complex64>);

impl SpectrumChannel {
    /// Wraps a DC-centred grid after checking every bin is finite.
    pub fn new(grid: Grid<Complex64>) -> Result<Self> {
        if let Some(i) = grid
            .as_slice()
            .iter()
            .position(|v| !v.re.is_finite() || !v.im.is_finite())
        {
            return Err(Error::invalid(
                "spectrum",
                format!("non-finite bin at index {i}"),
            ));
        }
        Ok(SpectrumChannel(grid))
    }

    #[inline]
    pub fn grid(&self) -> &Grid<Complex64> {
        &self.0
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    /// Bin at a signed frequency offset from DC.
    pub fn at_frequency(&self, du: isize, dv: isize) -> Complex64 {
        let (h, w) = self.dims();
        let r = (h / 2) as isize + du;
        let c = (w / 2) as isize + dv;
        *self.0.get(
            r.rem_euclid(h as isize) as usize,
            c.rem_euclid(w as isize) as usize,
        )
    }

    /// `Σ|F|²`.
    pub fn energy(&self) -> f64 {
        self.0.as_slice().iter().map(|v| v.norm_sqr()).sum()
    }
}

/// Non-negative spectral magnitudes on the DC-centred grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeChannel(Grid<f64>);

impl AmplitudeChannel {
    pub fn new(grid: Grid<f64>) -> Result<Self> {
        if let Some(i) = grid
            .as_slice()
            .iter()
            .position(|v| !v.is_finite() || *v < 0.0)
        {
            return Err(Error::invalid(
                "amplitude",
                format!("value at index {i} is negative or non-finite"),
            ));
        }
        Ok(AmplitudeChannel(grid))
    }

    pub(crate) fn from_grid_unchecked(grid: Grid<f64>) -> Self {
        AmplitudeChannel(grid)
    }

    #[inline]
    pub fn grid(&self) -> &Grid<f64> {
        &self.0
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }
}

/// Spectral phases in `(-π, π]` on the DC-centred grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseChannel(Grid<f64>);

impl PhaseChannel {
    pub fn new(grid: Grid<f64>) -> Result<Self> {
        if let Some(i) = grid
            .as_slice()
            .iter()
            .position(|v| !v.is_finite() || *v <= -PI || *v > PI)
        {
            return Err(Error::invalid(
                "phase",
                format!("value at index {i} is outside (-pi, pi]"),
            ));
        }
        Ok(PhaseChannel(grid))
    }

    #[inline]
    pub fn grid(&self) -> &Grid<f64> {
        &self.0
    }

    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        self.0.dims()
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }
}

/// Result of an inverse transform before clamping to the unit range.
#[derive(Debug, Clone)]
pub struct RealInverse {
    pub real: Grid<f64>,
    /// Largest `|Im|` that was dropped.
    pub max_imaginary: f64,
}

/// Row and column plans for one grid shape and direction.
pub struct Planner2d {
    rows: FftPlan,
    cols: FftPlan,
}

impl Planner2d {
    pub fn new(height: usize, width: usize, direction: Direction) -> Self {
        Planner2d {
            rows: FftPlan::new(width, direction),
            cols: FftPlan::new(height, direction),
        }
    }

    /// In-place 2-D transform of a natural-order (DC at `(0,0)`) buffer.
    pub fn process(&self, data: &mut [Complex64]) {
        let w = self.rows.len();
        let h = self.cols.len();
        debug_assert_eq!(data.len(), w * h);
        let mut scratch = Vec::new();
        for row in data.chunks_exact_mut(w) {
            self.rows.process(row, &mut scratch);
        }
        if h > 1 {
            let mut column = vec![Complex64::new(0.0, 0.0); h];
            for c in 0..w {
                for (r, v) in column.iter_mut().enumerate() {
                    *v = data[r * w + c];
                }
                self.cols.process(&mut column, &mut scratch);
                for (r, v) in column.iter().enumerate() {
                    data[r * w + c] = *v;
                }
            }
        }
    }
}

/// Moves natural-order bins to DC-centred order.
fn shift_to_centre(height: usize, width: usize, natural: &[Complex64]) -> Grid<Complex64> {
    let (oh, ow) = (height / 2, width / 2);
    let mut out = vec![Complex64::new(0.0, 0.0); natural.len()];
    for r in 0..height {
        let rr = (r + oh) % height;
        for c in 0..width {
            out[rr * width + (c + ow) % width] = natural[r * width + c];
        }
    }
    Grid::from_parts(height, width, out)
}

/// Inverse of [`shift_to_centre`].
fn shift_to_natural(centred: &Grid<Complex64>) -> Vec<Complex64> {
    let (height, width) = centred.dims();
    let (oh, ow) = (height / 2, width / 2);
    let src = centred.as_slice();
    let mut out = vec![Complex64::new(0.0, 0.0); src.len()];
    for r in 0..height {
        let rr = (r + oh) % height;
        for c in 0..width {
            out[r * width + c] = src[rr * width + (c + ow) % width];
        }
    }
    out
}

/// Forward transform of an arbitrary real plane. Rejects non-finite values.
pub fn forward_dft_real(plane: &Grid<f64>) -> Result<SpectrumChannel> {
    if let Some(i) = plane.as_slice().iter().position(|v| !v.is_finite()) {
        return Err(Error::invalid(
            "image channel",
            format!("non-finite value at index {i}"),
        ));
    }
    let (h, w) = plane.dims();
    let mut data: Vec<Complex64> = plane
        .as_slice()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    Planner2d::new(h, w, Direction::Forward).process(&mut data);
    Ok(SpectrumChannel(shift_to_centre(h, w, &data)))
}

/// DC-centred forward DFT of an image plane.
pub fn forward_dft(channel: &ImageChannel) -> Result<SpectrumChannel> {
    forward_dft_real(channel.grid())
}

/// Forward transforms of two planes of equal shape with one complex FFT,
/// using the real-input symmetry `F(a + ib) = A + iB`.
pub fn forward_dft_pair(
    a: &ImageChannel,
    b: &ImageChannel,
) -> Result<(SpectrumChannel, SpectrumChannel)> {
    a.grid().ensure_same_dims(b.grid())?;
    let (h, w) = a.dims();
    let mut data: Vec<Complex64> = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(&x, &y)| Complex64::new(x, y))
        .collect();
    Planner2d::new(h, w, Direction::Forward).process(&mut data);
    let mut first = vec![Complex64::new(0.0, 0.0); h * w];
    let mut second = vec![Complex64::new(0.0, 0.0); h * w];
    for r in 0..h {
        let mr = (h - r) % h;
        for c in 0..w {
            let mc = (w - c) % w;
            let z = data[r * w + c];
            let zm = data[mr * w + mc].conj();
            first[r * w + c] = (z + zm) * 0.5;
            // (z - conj(z_mirror)) / 2i
            let d = (z - zm) * 0.5;
            second[r * w + c] = Complex64::new(d.im, -d.re);
        }
    }
    Ok((
        SpectrumChannel(shift_to_centre(h, w, &first)),
        SpectrumChannel(shift_to_centre(h, w, &second)),
    ))
}

/// Inverse transform keeping the raw real part (no clamping).
pub fn inverse_dft_unclamped(spectrum: &SpectrumChannel) -> RealInverse {
    let (h, w) = spectrum.dims();
    let mut data = shift_to_natural(spectrum.grid());
    Planner2d::new(h, w, Direction::Inverse).process(&mut data);
    let scale = 1.0 / (h * w) as f64;
    let mut max_imaginary = 0.0f64;
    let real = data
        .iter()
        .map(|v| {
            max_imaginary = max_imaginary.max((v.im * scale).abs());
            v.re * scale
        })
        .collect();
    RealInverse {
        real: Grid::from_parts(h, w, real),
        max_imaginary,
    }
}

/// Inverse transforms of two spectra of real planes with one complex FFT.
///
/// Both spectra must be Hermitian-symmetric (spectra of real planes, or
/// amplitude edits of them that keep the symmetry); the first plane comes
/// back in the real part and the second in the imaginary part.
pub fn inverse_dft_pair_unclamped(
    a: &SpectrumChannel,
    b: &SpectrumChannel,
) -> Result<(Grid<f64>, Grid<f64>)> {
    a.grid().ensure_same_dims(b.grid())?;
    let (h, w) = a.dims();
    let mut data = shift_to_natural(a.grid());
    let second = shift_to_natural(b.grid());
    for (z, s) in data.iter_mut().zip(&second) {
        *z += Complex64::new(-s.im, s.re);
    }
    Planner2d::new(h, w, Direction::Inverse).process(&mut data);
    let scale = 1.0 / (h * w) as f64;
    let first = data.iter().map(|v| v.re * scale).collect();
    let second = data.iter().map(|v| v.im * scale).collect();
    Ok((Grid::from_parts(h, w, first), Grid::from_parts(h, w, second)))
}

/// Inverse DFT back to an image plane: imaginary residue dropped, values
/// clamped to `[0, 1]`.
pub fn inverse_dft(spectrum: &SpectrumChannel) -> ImageChannel {
    ImageChannel::from_clamped(inverse_dft_unclamped(spectrum).real)
}

#[inline]
pub(crate) fn phase_of(v: Complex64) -> f64 {
    if v.re == 0.0 && v.im == 0.0 {
        return 0.0;
    }
    let p = math::atan2(v.im, v.re);
    if p <= -PI {
        PI
    } else {
        p
    }
}

/// Splits a spectrum into magnitude and phase.
pub fn decompose(spectrum: &SpectrumChannel) -> (AmplitudeChannel, PhaseChannel) {
    let g = spectrum.grid();
    let amp = g.map(|v| math::hypot(v.re, v.im));
    let phase = g.map(|v| phase_of(*v));
    (AmplitudeChannel(amp), PhaseChannel(phase))
}

/// `A·exp(iP)` elementwise.
pub fn recompose(amplitude: &AmplitudeChannel, phase: &PhaseChannel) -> Result<SpectrumChannel> {
    amplitude.grid().ensure_same_dims(phase.grid())?;
    let (h, w) = amplitude.dims();
    let data = amplitude
        .as_slice()
        .iter()
        .zip(phase.as_slice())
        .map(|(&a, &p)| Complex64::new(a * math::cos(p), a * math::sin(p)))
        .collect();
    Ok(SpectrumChannel(Grid::from_parts(h, w, data)))
}
