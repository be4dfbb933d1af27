use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

fn transpose(data: &[Complex64], w: usize, h: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); w * h];
    for y in 0..h {
        for x in 0..w {
            out[x * h + y] = data[y * w + x];
        }
    }
    out
}

fn rows(data: &mut [Complex64], len: usize, fft: &Arc<dyn Fft<f64>>) {
    data.par_chunks_mut(len).for_each(|row| fft.process(row));
}

/// Signed frequency of bin `k` in cycles per pixel.
fn frequency(k: usize, n: usize) -> f64 {
    let k = k as f64;
    let n_f = n as f64;
    if k < n_f / 2.0 {
        k / n_f
    } else {
        (k - n_f) / n_f
    }
}

/// Radial raised-cosine response. `radius` and `cutoff` are in units of the
/// Nyquist frequency; the pass band ends at `cutoff / 2` and the response
/// reaches zero at `cutoff`.
pub fn raised_cosine(radius: f64, cutoff: f64) -> f64 {
    let knee = 0.5 * cutoff;
    if radius <= knee {
        1.0
    } else if radius >= cutoff {
        0.0
    } else {
        0.5 * (1.0 + (std::f64::consts::PI * (radius - knee) / knee).cos())
    }
}

/// Low-pass filters a row-major `w x h` real image in place.
pub fn low_pass(pixels: &mut [f64], w: usize, h: usize, cutoff: f64) {
    let mut planner = FftPlanner::<f64>::new();
    let fw = planner.plan_fft_forward(w);
    let fh = planner.plan_fft_forward(h);
    let iw = planner.plan_fft_inverse(w);
    let ih = planner.plan_fft_inverse(h);

    let mut data: Vec<Complex64> = pixels.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    rows(&mut data, w, &fw);
    let mut cols = transpose(&data, w, h);
    rows(&mut cols, h, &fh);

    // `cols` is indexed [x][y].
    cols.par_chunks_mut(h).enumerate().for_each(|(x, col)| {
        let fx = frequency(x, w);
        for (y, v) in col.iter_mut().enumerate() {
            let fy = frequency(y, h);
            let r = (fx * fx + fy * fy).sqrt() / 0.5;
            *v *= raised_cosine(r, cutoff);
        }
    });

    rows(&mut cols, h, &ih);
    let mut data = transpose(&cols, h, w);
    rows(&mut data, w, &iw);
    let norm = 1.0 / (w * h) as f64;
    for (p, v) in pixels.iter_mut().zip(&data) {
        *p = v.re * norm;
    }
}
