//! Symmetric Toeplitz products `c_i = sum_{k != i} w_|i-k| f_k` on a finite
//! lattice, by banded summation or by zero-padded real FFT.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use realfft::num_complex::Complex;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use serde::{Deserialize, Serialize};

/// Outputs computed together by the banded kernel.
const BLOCK: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    /// Pick by estimated cost.
    #[default]
    Auto,
    Direct,
    Transform,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Auto => "auto",
            Backend::Direct => "direct",
            Backend::Transform => "transform",
        })
    }
}

pub(crate) enum Convolver {
    Direct(Direct),
    Transform(Transform),
}

impl Convolver {
    /// `stencil[j - 1]` multiplies offset `j`.
    pub(crate) fn new(stencil: &[f64], n: usize, backend: Backend) -> Self {
        match resolve(backend, stencil.len(), n) {
            Backend::Transform => Convolver::Transform(Transform::new(stencil, n)),
            _ => Convolver::Direct(Direct::new(stencil, n)),
        }
    }

    pub(crate) fn backend(&self) -> Backend {
        match self {
            Convolver::Direct(_) => Backend::Direct,
            Convolver::Transform(_) => Backend::Transform,
        }
    }

    pub(crate) fn apply(&self, f: &[f64], out: &mut [f64]) {
        match self {
            Convolver::Direct(d) => d.apply(f, out),
            Convolver::Transform(t) => t.apply(f, out),
        }
    }
}

fn resolve(backend: Backend, j: usize, n: usize) -> Backend {
    match backend {
        Backend::Auto => {
            let l = padded_len(n + j) as f64;
            // one banded multiply-add costs about a sixth of one unit of
            // `L log2 L` transform work (measured with `levyspec bench`)
            if (n as f64) * (2 * j + BLOCK) as f64 <= 6.0 * l * l.log2() {
                Backend::Direct
            } else {
                Backend::Transform
            }
        }
        b => b,
    }
}

/// Smallest even `2^a 3^b 5^c >= n`.
pub(crate) fn padded_len(n: usize) -> usize {
    let mut best = n.next_power_of_two().max(2);
    let mut p5 = 1usize;
    while p5 < best {
        let mut p35 = p5;
        while p35 < best {
            let mut v = p35;
            while v < n || v % 2 == 1 {
                v *= 2;
            }
            best = best.min(v);
            p35 *= 3;
        }
        p5 *= 5;
    }
    best
}

pub(crate) struct Direct {
    /// Symmetric stencil, padded with `BLOCK` zeros on either side:
    /// `padded[BLOCK + J + d] = w_|d|` for `|d| <= J`.
    padded: Vec<f64>,
    j: usize,
    #[cfg(target_arch = "x86_64")]
    avx2: bool,
}

impl Direct {
    fn new(stencil: &[f64], _n: usize) -> Self {
        let j = stencil.len();
        let mut padded = vec![0.0; 2 * j + 1 + 2 * BLOCK];
        for (d, &w) in stencil.iter().enumerate() {
            padded[BLOCK + j + d + 1] = w;
            padded[BLOCK + j - d - 1] = w;
        }
        Self {
            padded,
            j,
            #[cfg(target_arch = "x86_64")]
            avx2: std::is_x86_feature_detected!("avx2"),
        }
    }

    fn apply(&self, f: &[f64], out: &mut [f64]) {
        out.par_chunks_mut(BLOCK).enumerate().for_each(|(b, chunk)| {
            let i0 = b * BLOCK;
            #[cfg(target_arch = "x86_64")]
            if self.avx2 {
                // SAFETY: the feature was detected at construction
                unsafe { block_avx2(&self.padded, self.j, f, i0, chunk) };
                return;
            }
            block(&self.padded, self.j, f, i0, chunk);
        });
    }
}

#[cfg(target_arch = "x86_64")]
#[target_feature(enable = "avx2")]
unsafe fn block_avx2(padded: &[f64], j: usize, f: &[f64], i0: usize, out: &mut [f64]) {
    block(padded, j, f, i0, out)
}

/// Outputs `i0..i0 + out.len()`, each summed in ascending `k`. Offsets
/// outside the band meet zero weights, which leave the sums unchanged.
#[inline(always)]
fn block(padded: &[f64], j: usize, f: &[f64], i0: usize, out: &mut [f64]) {
    let lo = i0.saturating_sub(j);
    let hi = (i0 + BLOCK - 1 + j).min(f.len() - 1);
    let mut acc = [0.0f64; BLOCK];
    for (k, &fk) in f.iter().enumerate().take(hi + 1).skip(lo) {
        let base = BLOCK + j + i0 - k;
        let w: &[f64; BLOCK] = padded[base..base + BLOCK].try_into().unwrap();
        for b in 0..BLOCK {
            acc[b] += w[b] * fk;
        }
    }
    out.copy_from_slice(&acc[..out.len()]);
}

pub(crate) struct Transform {
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
    /// Spectrum of the circulant stencil, including the `1/L` factor.
    symbol: Vec<f64>,
    len: usize,
}

impl Transform {
    fn new(stencil: &[f64], n: usize) -> Self {
        let j = stencil.len();
        let len = padded_len(n + j);
        let mut planner = RealFftPlanner::<f64>::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);
        let mut kernel = vec![0.0; len];
        for (d, &w) in stencil.iter().enumerate() {
            kernel[d + 1] = w;
            kernel[len - d - 1] = w;
        }
        let mut spectrum = forward.make_output_vec();
        forward
            .process(&mut kernel, &mut spectrum)
            .expect("buffer sizes come from the plan");
        let scale = 1.0 / len as f64;
        let symbol = spectrum.iter().map(|c| c.re * scale).collect();
        Self {
            forward,
            inverse,
            symbol,
            len,
        }
    }

    fn apply(&self, f: &[f64], out: &mut [f64]) {
        let mut buf = vec![0.0; self.len];
        buf[..f.len()].copy_from_slice(f);
        let mut spectrum = vec![Complex::new(0.0, 0.0); self.len / 2 + 1];
        let mut scratch = vec![
            Complex::new(0.0, 0.0);
            self.forward
                .get_scratch_len()
                .max(self.inverse.get_scratch_len())
        ];
        self.forward
            .process_with_scratch(&mut buf, &mut spectrum, &mut scratch)
            .expect("buffer sizes come from the plan");
        for (c, s) in spectrum.iter_mut().zip(&self.symbol) {
            *c *= *s;
        }
        // the product of a real symbol with a real-input spectrum keeps the
        // DC and Nyquist bins real
        spectrum[0].im = 0.0;
        spectrum[self.len / 2].im = 0.0;
        self.inverse
            .process_with_scratch(&mut spectrum, &mut buf, &mut scratch)
            .expect("buffer sizes come from the plan");
        out.copy_from_slice(&buf[..out.len()]);
    }
}
