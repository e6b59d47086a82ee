//! Multi-dimensional FFT on periodic unit-cell grids.
//!
//! Arrays are row major over `dims` axes of equal length `pts`, last axis
//! fastest. Forward transforms are unnormalised; `inverse` divides by the total
//! number of points so that `inverse(forward(f)) == f`.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub struct Spectral {
    pts: usize,
    dims: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Spectral {
    pub fn new(pts: usize, dims: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { pts, dims, fwd: planner.plan_fft_forward(pts), inv: planner.plan_fft_inverse(pts) }
    }

    pub fn len(&self) -> usize {
        self.pts.pow(self.dims as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.fwd);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inv);
        let scale = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }

    pub fn forward_real(&self, data: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut buf);
        buf
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.len(), "spectral buffer has the wrong length");
        let pts = self.pts;
        let mut scratch = vec![Complex64::default(); plan.get_inplace_scratch_len()];
        // Last axis: contiguous lines.
        plan.process_with_scratch(data, &mut scratch);
        // Other axes: transpose each block so its lines are contiguous, then
        // transform all of them in one batched call.
        let mut lines = Vec::new();
        for axis in 0..self.dims.saturating_sub(1) {
            let stride = pts.pow((self.dims - 1 - axis) as u32);
            let block = stride * pts;
            lines.resize(block, Complex64::default());
            for chunk in data.chunks_exact_mut(block) {
                for (i, row) in chunk.chunks_exact(stride).enumerate() {
                    for (offset, v) in row.iter().enumerate() {
                        lines[offset * pts + i] = *v;
                    }
                }
                plan.process_with_scratch(&mut lines, &mut scratch);
                for (i, row) in chunk.chunks_exact_mut(stride).enumerate() {
                    for (offset, v) in row.iter_mut().enumerate() {
                        *v = lines[offset * pts + i];
                    }
                }
            }
        }
    }

    /// Integer wavenumber of index `i` along one axis.
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i <= self.pts / 2 {
            i as i64
        } else {
            i as i64 - self.pts as i64
        }
    }

    pub fn is_nyquist(&self, i: usize) -> bool {
        self.pts % 2 == 0 && i == self.pts / 2
    }

    /// Per-axis index decomposition of a flat index.
    pub fn axis_indices(&self, mut flat: usize, out: &mut [usize]) {
        for axis in (0..self.dims).rev() {
            out[axis] = flat % self.pts;
            flat /= self.pts;
        }
    }

    /// Calls `f(flat_index, wavenumbers, has_nyquist)` for every mode.
    pub fn for_each_mode(&self, mut f: impl FnMut(usize, &[i64], bool)) {
        let mut idx = vec![0usize; self.dims];
        let mut ks = vec![0i64; self.dims];
        // Axes carrying a Nyquist index; the multi-index advances like an odometer.
        let mut nyq_axes = 0usize;
        for flat in 0..self.len() {
            f(flat, &ks, nyq_axes > 0);
            for a in (0..self.dims).rev() {
                nyq_axes -= usize::from(self.is_nyquist(idx[a]));
                idx[a] += 1;
                if idx[a] == self.pts {
                    idx[a] = 0;
                }
                ks[a] = self.wavenumber(idx[a]);
                nyq_axes += usize::from(self.is_nyquist(idx[a]));
                if idx[a] != 0 {
                    break;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_and_single_mode() {
        let sp = Spectral::new(8, 2);
        let data: Vec<Complex64> = (0..64).map(|i| Complex64::new((i as f64).sin(), (i as f64 * 0.3).cos())).collect();
        let mut buf = data.clone();
        sp.forward(&mut buf);
        sp.inverse(&mut buf);
        for (a, b) in data.iter().zip(&buf) {
            assert!((a - b).norm() < 1e-13);
        }
        // cos(2 pi x) along the first axis has weight len/2 at k = +-1.
        let f: Vec<f64> = (0..64).map(|i| (2.0 * std::f64::consts::PI * (i / 8) as f64 / 8.0).cos()).collect();
        let spec = sp.forward_real(&f);
        sp.for_each_mode(|flat, ks, _| {
            let expected = if ks == [1, 0] || ks == [-1, 0] { 32.0 } else { 0.0 };
            assert!((spec[flat].re - expected).abs() < 1e-12, "{ks:?}");
        });
    }

    #[test]
    fn mode_walk_matches_index_decomposition() {
        for (pts, dims) in [(8, 1), (4, 2), (6, 3), (4, 4)] {
            let sp = Spectral::new(pts, dims);
            let mut idx = vec![0; dims];
            let mut count = 0;
            sp.for_each_mode(|flat, ks, nyq| {
                sp.axis_indices(flat, &mut idx);
                let expected: Vec<i64> = idx.iter().map(|&i| sp.wavenumber(i)).collect();
                assert_eq!(ks, expected.as_slice());
                assert_eq!(nyq, idx.iter().any(|&i| sp.is_nyquist(i)));
                assert_eq!(flat, count);
                count += 1;
            });
            assert_eq!(count, sp.len());
        }
    }
}
