//! Exact-length discrete Fourier transform.
//!
//! Lengths whose prime factors are all small run through a recursive
//! mixed-radix Cooley-Tukey decomposition. Lengths with a large prime factor
//! go through Bluestein's chirp-z algorithm on a power-of-two convolution.
//! No zero padding is ever visible to the caller: the output always has the
//! input's length.

use std::f64::consts::PI;

use num_complex::Complex64;

/// Largest prime handled by a direct butterfly before switching to Bluestein.
const MAX_DIRECT_RADIX: usize = 31;

#[derive(Debug, Clone)]
enum Algorithm {
    MixedRadix { factors: Vec<usize> },
    Bluestein(Box<Bluestein>),
}

/// A reusable transform plan for one length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    len: usize,
    /// `twiddles[k] = exp(-2πi k / len)`
    twiddles: Vec<Complex64>,
    algorithm: Algorithm,
}

#[derive(Debug, Clone)]
struct Bluestein {
    /// `chirp[k] = exp(-iπ k² / n)`
    chirp: Vec<Complex64>,
    /// Forward transform of the conjugate chirp, wrapped to length `inner.len`.
    kernel: Vec<Complex64>,
    inner: FftPlan,
}

fn unit_root(k: usize, n: usize) -> Complex64 {
    let angle = -2.0 * PI * (k as f64) / (n as f64);
    Complex64::new(angle.cos(), angle.sin())
}

fn factorize(mut n: usize) -> Vec<usize> {
    let mut factors = Vec::new();
    while n.is_multiple_of(4) {
        factors.push(4);
        n /= 4;
    }
    let mut p = 2;
    while p * p <= n {
        while n.is_multiple_of(p) {
            factors.push(p);
            n /= p;
        }
        p += 1;
    }
    if n > 1 {
        factors.push(n);
    }
    factors
}

impl FftPlan {
    /// Panics if `len` is zero.
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "FFT length must be positive");
        let twiddles = (0..len).map(|k| unit_root(k, len)).collect();
        let factors = factorize(len);
        let algorithm = if factors.iter().all(|&f| f <= MAX_DIRECT_RADIX) {
            Algorithm::MixedRadix { factors }
        } else {
            Algorithm::Bluestein(Box::new(Bluestein::new(len)))
        };
        Self {
            len,
            twiddles,
            algorithm,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place forward transform: `X[k] = Σ_j x[j] exp(-2πi jk/n)`.
    pub fn forward(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len, "buffer length does not match plan");
        match &self.algorithm {
            Algorithm::MixedRadix { factors } => {
                let input = data.to_vec();
                let mut scratch =
                    vec![Complex64::default(); factors.iter().copied().max().unwrap_or(1)];
                self.recurse(&input, 0, 1, data, factors, 1, &mut scratch);
            }
            Algorithm::Bluestein(b) => b.process(data),
        }
    }

    /// In-place inverse transform, normalized by `1/n`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        for v in data.iter_mut() {
            *v = v.conj();
        }
        self.forward(data);
        let scale = 1.0 / self.len as f64;
        for v in data.iter_mut() {
            *v = v.conj() * scale;
        }
    }

    /// Decimation in time. `out` receives the length-`out.len()` DFT of
    /// `input[offset + stride * j]`; `tw_step` maps its roots of unity onto
    /// the full-length twiddle table.
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        &self,
        input: &[Complex64],
        offset: usize,
        stride: usize,
        out: &mut [Complex64],
        factors: &[usize],
        tw_step: usize,
        scratch: &mut [Complex64],
    ) {
        let n = out.len();
        if n == 1 {
            out[0] = input[offset];
            return;
        }
        let radix = factors[0];
        let m = n / radix;
        for q in 0..radix {
            self.recurse(
                input,
                offset + q * stride,
                stride * radix,
                &mut out[q * m..(q + 1) * m],
                &factors[1..],
                tw_step * radix,
                scratch,
            );
        }

        let full = self.len;
        let radix_step = full / radix;
        for k in 0..m {
            // Twiddle the k-th output of each sub-transform.
            for q in 0..radix {
                let w = self.twiddles[(q * k * tw_step) % full];
                scratch[q] = out[q * m + k] * w;
            }
            match radix {
                2 => {
                    let (a, b) = (scratch[0], scratch[1]);
                    out[k] = a + b;
                    out[k + m] = a - b;
                }
                4 => {
                    let (a, b, c, d) = (scratch[0], scratch[1], scratch[2], scratch[3]);
                    let s0 = a + c;
                    let s1 = a - c;
                    let s2 = b + d;
                    // -i (b - d)
                    let bd = b - d;
                    let s3 = Complex64::new(bd.im, -bd.re);
                    out[k] = s0 + s2;
                    out[k + m] = s1 + s3;
                    out[k + 2 * m] = s0 - s2;
                    out[k + 3 * m] = s1 - s3;
                }
                _ => {
                    for r in 0..radix {
                        let mut acc = Complex64::default();
                        for (q, &v) in scratch[..radix].iter().enumerate() {
                            acc += v * self.twiddles[((q * r) % radix) * radix_step];
                        }
                        out[k + r * m] = acc;
                    }
                }
            }
        }
    }
}

impl Bluestein {
    fn new(n: usize) -> Self {
        let inner_len = (2 * n - 1).next_power_of_two();
        let inner = FftPlan::new(inner_len);
        // k² mod 2n keeps the chirp angle small and exact.
        let chirp: Vec<Complex64> = (0..n)
            .map(|k| {
                let k2 = (k as u128 * k as u128 % (2 * n) as u128) as f64;
                let angle = -PI * k2 / n as f64;
                Complex64::new(angle.cos(), angle.sin())
            })
            .collect();
        let mut kernel = vec![Complex64::default(); inner_len];
        kernel[0] = chirp[0].conj();
        for k in 1..n {
            kernel[k] = chirp[k].conj();
            kernel[inner_len - k] = chirp[k].conj();
        }
        inner.forward(&mut kernel);
        Self {
            chirp,
            kernel,
            inner,
        }
    }

    fn process(&self, data: &mut [Complex64]) {
        let n = data.len();
        let mut buf = vec![Complex64::default(); self.inner.len()];
        for k in 0..n {
            buf[k] = data[k] * self.chirp[k];
        }
        self.inner.forward(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.kernel) {
            *b *= k;
        }
        self.inner.inverse(&mut buf);
        for k in 0..n {
            data[k] = buf[k] * self.chirp[k];
        }
    }
}
