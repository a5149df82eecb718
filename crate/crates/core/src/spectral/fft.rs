//! Discrete Fourier transforms: iterative radix-2 for power-of-two lengths,
//! Bluestein's chirp-z algorithm otherwise. Unnormalized; callers apply the
//! unitary scale. Twiddles come from `libm`, so outputs are bit-stable
//! across platforms.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

use crate::float::F64Ext;

/// Precomputed transform for one length.
pub struct Fft {
    n: usize,
    kind: Kind,
}

enum Kind {
    Identity,
    Radix2 {
        // exp(-2πi j / n) for j in 0..n/2
        twiddles: Vec<Complex64>,
    },
    Bluestein {
        // exp(-iπ k² / n) for k in 0..n
        chirp: Vec<Complex64>,
        // FFT of the wrapped conjugate chirp filter, length m
        filter_spectrum: Vec<Complex64>,
        inner: Vec<Fft>, // single element; boxed indirection without Box<dyn>
        m: usize,
    },
}

impl Fft {
    pub fn new(n: usize) -> Self {
        assert!(n > 0);
        if n == 1 {
            return Self {
                n,
                kind: Kind::Identity,
            };
        }
        if n.is_power_of_two() {
            let twiddles = (0..n / 2)
                .map(|j| unit_phasor(-2.0 * PI * j as f64 / n as f64))
                .collect();
            return Self {
                n,
                kind: Kind::Radix2 { twiddles },
            };
        }
        // Bluestein: convolve with a chirp through a power-of-two FFT.
        let m = (2 * n - 1).next_power_of_two();
        let chirp: Vec<Complex64> = (0..n).map(|k| chirp_phasor(k, n)).collect();
        let inner = Fft::new(m);
        let mut filter = vec![Complex64::new(0.0, 0.0); m];
        for t in 0..n {
            let h = chirp[t].conj();
            filter[t] = h;
            if t > 0 {
                filter[m - t] = h;
            }
        }
        inner.forward(&mut filter);
        Self {
            n,
            kind: Kind::Bluestein {
                chirp,
                filter_spectrum: filter,
                inner: vec![inner],
                m,
            },
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    /// In-place unnormalized DFT with the e^{-2πi jk/n} kernel.
    pub fn forward(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        match &self.kind {
            Kind::Identity => {}
            Kind::Radix2 { twiddles } => radix2(buf, twiddles, false),
            Kind::Bluestein {
                chirp,
                filter_spectrum,
                inner,
                m,
            } => bluestein(buf, chirp, filter_spectrum, &inner[0], *m),
        }
    }

    /// In-place unnormalized inverse DFT (e^{+2πi jk/n} kernel, no 1/n).
    pub fn inverse(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.n);
        match &self.kind {
            Kind::Identity => {}
            Kind::Radix2 { twiddles } => radix2(buf, twiddles, true),
            Kind::Bluestein {
                chirp,
                filter_spectrum,
                inner,
                m,
            } => {
                // IDFT(x) = conj(DFT(conj(x)))
                for v in buf.iter_mut() {
                    *v = v.conj();
                }
                bluestein(buf, chirp, filter_spectrum, &inner[0], *m);
                for v in buf.iter_mut() {
                    *v = v.conj();
                }
            }
        }
    }
}

fn unit_phasor(theta: f64) -> Complex64 {
    Complex64::new(theta.cos(), theta.sin())
}

/// exp(-iπ k² / n) with the k² reduced mod 2n to keep the angle small.
fn chirp_phasor(k: usize, n: usize) -> Complex64 {
    let sq = ((k as u64).wrapping_mul(k as u64)) % (2 * n as u64);
    unit_phasor(-PI * sq as f64 / n as f64)
}

fn radix2(buf: &mut [Complex64], twiddles: &[Complex64], inverse: bool) {
    let n = buf.len();
    // Bit-reversal permutation.
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            buf.swap(i, j);
        }
    }
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let step = n / len;
        let mut base = 0;
        while base < n {
            for k in 0..half {
                let mut w = twiddles[k * step];
                if inverse {
                    w = w.conj();
                }
                let a = buf[base + k];
                let b = buf[base + k + half] * w;
                buf[base + k] = a + b;
                buf[base + k + half] = a - b;
            }
            base += len;
        }
        len <<= 1;
    }
}

fn bluestein(
    buf: &mut [Complex64],
    chirp: &[Complex64],
    filter_spectrum: &[Complex64],
    inner: &Fft,
    m: usize,
) {
    let n = buf.len();
    let mut work = vec![Complex64::new(0.0, 0.0); m];
    for (w, (x, c)) in work.iter_mut().zip(buf.iter().zip(chirp.iter())) {
        *w = x * c;
    }
    inner.forward(&mut work);
    for (w, f) in work.iter_mut().zip(filter_spectrum.iter()) {
        *w *= f;
    }
    inner.inverse(&mut work);
    let scale = 1.0 / m as f64;
    for k in 0..n {
        buf[k] = work[k] * chirp[k] * scale;
    }
}
