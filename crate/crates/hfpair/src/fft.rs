//! Minimal 3D complex FFT built on rustfft, with the padded-corner fast paths
//! used by the free-space Coulomb solver.
//!
//! Layout convention: `data[x + m*(y + m*z)]`, x fastest. A forward transform
//! leaves the spectrum in the x<->z transposed layout (`[z + m*(y + m*x)]`);
//! the inverse expects that layout and restores the spatial one. Pointwise
//! multipliers that are symmetric in x<->z (radial kernels, |k|^2) are
//! unaffected by the transposition.

use once_cell::sync::Lazy;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

type Plan = Arc<dyn Fft<f64>>;

static PLANS: Lazy<Mutex<HashMap<(usize, bool), Plan>>> = Lazy::new(|| Mutex::new(HashMap::new()));

pub(crate) fn plan(len: usize, forward: bool) -> Plan {
    let mut cache = PLANS.lock().unwrap();
    cache
        .entry((len, forward))
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            if forward {
                planner.plan_fft_forward(len)
            } else {
                planner.plan_fft_inverse(len)
            }
        })
        .clone()
}

/// Transform contiguous x-lines. Only lines whose (y, z) chunk index satisfies
/// `active` are touched; the rest are assumed zero or not needed.
fn pass_x(data: &mut [Complex64], m: usize, forward: bool, active: impl Fn(usize, usize) -> bool + Sync) {
    let fft = plan(m, forward);
    data.par_chunks_mut(m).enumerate().for_each(|(c, line)| {
        let (y, z) = (c % m, c / m);
        if active(y, z) {
            fft.process(line);
        }
    });
}

/// Transform y-lines (stride m) slab by slab; a slab is one contiguous z-plane.
fn pass_y(data: &mut [Complex64], m: usize, forward: bool, active_z: impl Fn(usize) -> bool + Sync) {
    let fft = plan(m, forward);
    data.par_chunks_mut(m * m).enumerate().for_each(|(z, slab)| {
        if !active_z(z) {
            return;
        }
        let mut line = vec![Complex64::default(); m];
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        for x in 0..m {
            for y in 0..m {
                line[y] = slab[x + m * y];
            }
            fft.process_with_scratch(&mut line, &mut scratch);
            for y in 0..m {
                slab[x + m * y] = line[y];
            }
        }
    });
}

/// Out-of-place x<->z transpose: dst[z + m*(y + m*x)] = src[x + m*(y + m*z)].
fn transpose_xz(src: &[Complex64], dst: &mut [Complex64], m: usize) {
    dst.par_chunks_mut(m * m).enumerate().for_each(|(x, slab)| {
        for y in 0..m {
            let row = &mut slab[m * y..m * (y + 1)];
            for (z, out) in row.iter_mut().enumerate() {
                *out = src[x + m * (y + m * z)];
            }
        }
    });
}

/// Full forward 3D FFT. On return `data` holds the spectrum in transposed
/// layout; `scratch` is clobbered.
pub(crate) fn forward_full(data: &mut Vec<Complex64>, scratch: &mut Vec<Complex64>, m: usize) {
    pass_x(data, m, true, |_, _| true);
    pass_y(data, m, true, |_| true);
    transpose_xz(data, scratch, m);
    std::mem::swap(data, scratch);
    pass_x(data, m, true, |_, _| true);
}

/// Forward 3D FFT of data that is nonzero only on the corner `[0,ext)^3`.
pub(crate) fn forward_padded(data: &mut Vec<Complex64>, scratch: &mut Vec<Complex64>, m: usize, ext: usize) {
    pass_x(data, m, true, |y, z| y < ext && z < ext);
    pass_y(data, m, true, |z| z < ext);
    transpose_xz(data, scratch, m);
    std::mem::swap(data, scratch);
    pass_x(data, m, true, |_, _| true);
}

/// Inverse of `forward_full`/`forward_padded` when only the corner `[0,ext)^3`
/// of the result is needed (pass `ext = m` for everything). No 1/m^3 scaling.
pub(crate) fn inverse_cropped(data: &mut Vec<Complex64>, scratch: &mut Vec<Complex64>, m: usize, ext: usize) {
    pass_x(data, m, false, |_, _| true);
    transpose_xz(data, scratch, m);
    std::mem::swap(data, scratch);
    pass_y(data, m, false, |z| z < ext);
    pass_x(data, m, false, |y, z| y < ext && z < ext);
}

/// fftfreq-style angular wavenumbers for an n-point periodic axis of length 2L.
pub(crate) fn wavenumbers(n: usize, half_width: f64) -> Vec<f64> {
    let base = std::f64::consts::PI / half_width; // 2π / (2L)
    (0..n)
        .map(|i| {
            let j = if i <= n / 2 { i as isize } else { i as isize - n as isize };
            base * j as f64
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip(m: usize) {
        let mut rng = 1234567u64;
        let mut next = || {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (rng >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let src: Vec<Complex64> = (0..m * m * m).map(|_| Complex64::new(next(), next())).collect();
        let mut data = src.clone();
        let mut scratch = vec![Complex64::default(); m * m * m];
        forward_full(&mut data, &mut scratch, m);
        inverse_cropped(&mut data, &mut scratch, m, m);
        let scale = (m * m * m) as f64;
        for (a, b) in data.iter().zip(&src) {
            assert!((a / scale - b).norm() < 1e-12);
        }
    }

    #[test]
    fn roundtrip_identity() {
        roundtrip(8);
        roundtrip(12);
    }

    #[test]
    fn padded_matches_full() {
        let m = 12;
        let ext = 6;
        let mut dense = vec![Complex64::default(); m * m * m];
        for z in 0..ext {
            for y in 0..ext {
                for x in 0..ext {
                    let v = (x + 2 * y + 3 * z) as f64 * 0.1 - 0.7;
                    dense[x + m * (y + m * z)] = Complex64::new(v, 0.0);
                }
            }
        }
        let mut full = dense.clone();
        let mut padded = dense.clone();
        let mut scratch = vec![Complex64::default(); m * m * m];
        forward_full(&mut full, &mut scratch, m);
        forward_padded(&mut padded, &mut scratch, m, ext);
        for (a, b) in full.iter().zip(&padded) {
            assert!((a - b).norm() < 1e-10 * (1.0 + a.norm()));
        }
    }
}
