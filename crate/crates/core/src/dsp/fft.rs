use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Precomputed radix-2 plan for one transform length.
#[derive(Debug, Clone)]
pub struct Fft {
    len: usize,
    /// `e^{-j 2 pi k / len}` for `k < len / 2`.
    twiddles: Vec<Complex64>,
}

impl Fft {
    pub fn new(len: usize) -> Result<Self> {
        if !len.is_power_of_two() {
            return Err(Error::LengthNotPowerOfTwo(len));
        }
        let twiddles = (0..len / 2)
            .map(|k| Complex64::from_polar(1.0, -TAU * k as f64 / len as f64))
            .collect();
        Ok(Self { len, twiddles })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Unnormalized forward DFT, in place.
    pub fn process(&self, buf: &mut [Complex64]) -> Result<()> {
        let n = self.len;
        if buf.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "FFT plan for length {n} applied to {} values",
                buf.len()
            )));
        }
        if n <= 1 {
            return Ok(());
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if i < j {
                buf.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
        Ok(())
    }
}

/// `X[k] = sum_n x[n] e^{-j 2 pi k n / N}` for power-of-two `N`.
pub fn fft(x: &[Complex64]) -> Result<Vec<Complex64>> {
    let plan = Fft::new(x.len())?;
    let mut buf = x.to_vec();
    plan.process(&mut buf)?;
    Ok(buf)
}

/// Direct O(N^2) evaluation of the DFT, for any length. Reference only.
pub fn naive_dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            x.iter()
                .enumerate()
                .map(|(t, &v)| {
                    // Reduce k*t mod n first so the angle stays small and exact.
                    let phase = ((k * t) % n) as f64 / n as f64;
                    v * Complex64::from_polar(1.0, -TAU * phase)
                })
                .sum()
        })
        .collect()
}
