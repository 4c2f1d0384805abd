//! Complex FFT of arbitrary length.
//!
//! Lengths whose prime factors are all small run through a recursive
//! mixed-radix Cooley-Tukey decomposition (radix-4 and radix-2 butterflies,
//! a generic butterfly for 3, 5, 7, ...). Lengths with a prime factor above
//! [`MAX_DIRECT_RADIX`] fall back to Bluestein's chirp-z algorithm over a
//! power-of-two convolution.
//!
//! Transforms are unnormalized in both directions.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::math;

/// Largest prime handled by the generic butterfly before switching to
/// Bluestein.
pub const MAX_DIRECT_RADIX: usize = 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `X[k] = Σ x[j]·exp(-2πi·jk/n)`
    Forward,
    /// `x[j] = Σ X[k]·exp(+2πi·jk/n)` (no `1/n` factor)
    Inverse,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Forward => -1.0,
            Direction::Inverse => 1.0,
        }
    }
}

/// Precomputed transform for one length and direction.
#[derive(Debug, Clone)]
pub struct FftPlan {
    len: usize,
    direction: Direction,
    algorithm: Algorithm,
}

#[derive(Debug, Clone)]
enum Algorithm {
    Identity,
    MixedRadix(MixedRadix),
    Bluestein(Bluestein),
}

impl FftPlan {
    /// # Panics
    /// When `len == 0`.
    pub fn new(len: usize, direction: Direction) -> Self {
        assert!(len > 0, "FFT length must be positive");
        let algorithm = if len == 1 {
            Algorithm::Identity
        } else if largest_prime_factor(len) <= MAX_DIRECT_RADIX {
            Algorithm::MixedRadix(MixedRadix::new(len, direction))
        } else {
            Algorithm::Bluestein(Bluestein::new(len, direction))
        };
        FftPlan {
            len,
            direction,
            algorithm,
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Transforms `buffer` in place. `scratch` is resized as needed.
    ///
    /// # Panics
    /// When `buffer.len()` differs from the planned length.
    pub fn process(&self, buffer: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        assert_eq!(buffer.len(), self.len, "buffer length does not match plan");
        match &self.algorithm {
            Algorithm::Identity => {}
            Algorithm::MixedRadix(p) => {
                scratch.clear();
                scratch.extend_from_slice(buffer);
                p.run(scratch, buffer);
            }
            Algorithm::Bluestein(p) => p.run(buffer, scratch),
        }
    }
}

fn largest_prime_factor(mut n: usize) -> usize {
    let mut largest = 1;
    let mut p = 2;
    while p * p <= n {
        while n % p == 0 {
            largest = p;
            n /= p;
        }
        p += 1;
    }
    if n > 1 {
        largest = largest.max(n);
    }
    largest
}

fn twiddle_table(len: usize, sign: f64) -> Vec<Complex64> {
    (0..len)
        .map(|k| {
            let angle = sign * 2.0 * PI * k as f64 / len as f64;
            Complex64::new(math::cos(angle), math::sin(angle))
        })
        .collect()
}

#[derive(Debug, Clone)]
struct MixedRadix {
    len: usize,
    inverse: bool,
    /// `(radix, remaining length)` per recursion level.
    stages: Vec<(usize, usize)>,
    twiddles: Vec<Complex64>,
}

impl MixedRadix {
    fn new(len: usize, direction: Direction) -> Self {
        let mut stages = Vec::new();
        let mut n = len;
        let mut p = 4;
        while n > 1 {
            while n % p != 0 {
                p = match p {
                    4 => 2,
                    2 => 3,
                    _ => p + 2,
                };
                if p * p > n {
                    p = n;
                }
            }
            n /= p;
            stages.push((p, n));
        }
        MixedRadix {
            len,
            inverse: direction == Direction::Inverse,
            stages,
            twiddles: twiddle_table(len, direction.sign()),
        }
    }

    fn run(&self, input: &[Complex64], output: &mut [Complex64]) {
        let mut tmp = Vec::new();
        self.work(output, input, 0, 1, &self.stages, &mut tmp);
    }

    /// Decimation in time: `out` receives the DFT of the subsequence
    /// `input[offset + j·stride]`.
    fn work(
        &self,
        out: &mut [Complex64],
        input: &[Complex64],
        offset: usize,
        stride: usize,
        stages: &[(usize, usize)],
        tmp: &mut Vec<Complex64>,
    ) {
        let (radix, m) = stages[0];
        if m == 1 {
            for (q, o) in out.iter_mut().enumerate().take(radix) {
                *o = input[offset + q * stride];
            }
        } else {
            for q in 0..radix {
                self.work(
                    &mut out[q * m..(q + 1) * m],
                    input,
                    offset + q * stride,
                    stride * radix,
                    &stages[1..],
                    tmp,
                );
            }
        }
        match radix {
            2 => self.butterfly2(out, stride, m),
            4 => self.butterfly4(out, stride, m),
            _ => self.butterfly_generic(out, stride, radix, m, tmp),
        }
    }

    fn butterfly2(&self, out: &mut [Complex64], stride: usize, m: usize) {
        let (lo, hi) = out.split_at_mut(m);
        for k in 0..m {
            let t = hi[k] * self.twiddles[k * stride];
            hi[k] = lo[k] - t;
            lo[k] += t;
        }
    }

    fn butterfly4(&self, out: &mut [Complex64], stride: usize, m: usize) {
        let tw = &self.twiddles;
        for k in 0..m {
            let a0 = out[k];
            let a1 = out[k + m] * tw[k * stride];
            let a2 = out[k + 2 * m] * tw[2 * k * stride];
            let a3 = out[k + 3 * m] * tw[3 * k * stride];
            let s0 = a0 + a2;
            let d0 = a0 - a2;
            let s1 = a1 + a3;
            let d1 = a1 - a3;
            // multiply by -i (forward) or +i (inverse)
            let rot = if self.inverse {
                Complex64::new(-d1.im, d1.re)
            } else {
                Complex64::new(d1.im, -d1.re)
            };
            out[k] = s0 + s1;
            out[k + m] = d0 + rot;
            out[k + 2 * m] = s0 - s1;
            out[k + 3 * m] = d0 - rot;
        }
    }

    fn butterfly_generic(
        &self,
        out: &mut [Complex64],
        stride: usize,
        radix: usize,
        m: usize,
        tmp: &mut Vec<Complex64>,
    ) {
        let n = self.len;
        let tw = &self.twiddles;
        tmp.clear();
        tmp.resize(radix, Complex64::new(0.0, 0.0));
        for u in 0..m {
            for (q, t) in tmp.iter_mut().enumerate() {
                *t = out[u + q * m];
            }
            for q1 in 0..radix {
                let k = u + q1 * m;
                let step = (stride * k) % n;
                let mut idx = 0usize;
                let mut acc = tmp[0];
                for t in tmp.iter().skip(1) {
                    idx += step;
                    if idx >= n {
                        idx -= n;
                    }
                    acc += *t * tw[idx];
                }
                out[k] = acc;
            }
        }
    }
}

#[derive(Debug, Clone)]
struct Bluestein {
    len: usize,
    conv_len: usize,
    /// `exp(sign·πi·k²/n)` for `k < n`.
    chirp: Vec<Complex64>,
    /// Forward transform of the conjugate chirp kernel, pre-scaled by
    /// `1/conv_len`.
    kernel_spectrum: Vec<Complex64>,
    conv_forward: FftPlanPow2,
    conv_inverse: FftPlanPow2,
}

/// Power-of-two plans used inside Bluestein; never recurses into
/// Bluestein again.
#[derive(Debug, Clone)]
struct FftPlanPow2(MixedRadix);

impl FftPlanPow2 {
    fn process(&self, buffer: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        scratch.clear();
        scratch.extend_from_slice(buffer);
        self.0.run(scratch, buffer);
    }
}

impl Bluestein {
    fn new(len: usize, direction: Direction) -> Self {
        let sign = direction.sign();
        let conv_len = (2 * len - 1).next_power_of_two();
        let modulus = 2 * len as u128;
        let chirp: Vec<Complex64> = (0..len)
            .map(|k| {
                // k² mod 2n keeps the angle argument small and exact
                let k2 = ((k as u128 * k as u128) % modulus) as f64;
                let angle = sign * PI * k2 / len as f64;
                Complex64::new(math::cos(angle), math::sin(angle))
            })
            .collect();
        let conv_forward = FftPlanPow2(MixedRadix::new(conv_len, Direction::Forward));
        let conv_inverse = FftPlanPow2(MixedRadix::new(conv_len, Direction::Inverse));
        let mut kernel = vec![Complex64::new(0.0, 0.0); conv_len];
        kernel[0] = chirp[0].conj();
        for k in 1..len {
            let c = chirp[k].conj();
            kernel[k] = c;
            kernel[conv_len - k] = c;
        }
        let mut scratch = Vec::new();
        conv_forward.process(&mut kernel, &mut scratch);
        let scale = 1.0 / conv_len as f64;
        for v in &mut kernel {
            *v *= scale;
        }
        Bluestein {
            len,
            conv_len,
            chirp,
            kernel_spectrum: kernel,
            conv_forward,
            conv_inverse,
        }
    }

    fn run(&self, buffer: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let mut work = vec![Complex64::new(0.0, 0.0); self.conv_len];
        for ((w, x), c) in work.iter_mut().zip(buffer.iter()).zip(&self.chirp) {
            *w = *x * *c;
        }
        self.conv_forward.process(&mut work, scratch);
        for (w, k) in work.iter_mut().zip(&self.kernel_spectrum) {
            *w *= *k;
        }
        self.conv_inverse.process(&mut work, scratch);
        for ((x, w), c) in buffer.iter_mut().zip(&work).zip(&self.chirp) {
            *x = *w * *c;
        }
        debug_assert_eq!(buffer.len(), self.len);
    }
}
