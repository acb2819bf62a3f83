//! Dense row-major real tensors (rank 1 to 3) and the handful of kernels the
//! classifier needs.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn new(shape: &[usize], data: Vec<f64>) -> Result<Self> {
        if shape.is_empty() || shape.len() > 3 || shape.contains(&0) {
            return Err(Error::ShapeMismatch(format!("invalid tensor shape {shape:?}")));
        }
        let len: usize = shape.iter().product();
        if data.len() != len {
            return Err(Error::ShapeMismatch(format!(
                "shape {shape:?} needs {len} values, got {}",
                data.len()
            )));
        }
        Ok(Self {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn zeros(shape: &[usize]) -> Self {
        let len = shape.iter().product();
        Self::new(shape, vec![0.0; len]).expect("valid shape")
    }

    pub fn identity(n: usize) -> Self {
        let mut t = Self::zeros(&[n, n]);
        for i in 0..n {
            t.data[i * n + i] = 1.0;
        }
        t
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    fn dims2(&self, what: &str) -> Result<(usize, usize)> {
        match self.shape[..] {
            [r, c] => Ok((r, c)),
            _ => Err(Error::ShapeMismatch(format!(
                "{what} must be rank 2, has shape {:?}",
                self.shape
            ))),
        }
    }
}

/// `(m x n) * (n x p)`.
pub fn matmul(a: &Tensor, b: &Tensor) -> Result<Tensor> {
    let (m, n) = a.dims2("left operand")?;
    let (n2, p) = b.dims2("right operand")?;
    if n != n2 {
        return Err(Error::ShapeMismatch(format!(
            "matmul inner dimensions {n} and {n2} differ"
        )));
    }
    let mut out = vec![0.0; m * p];
    for i in 0..m {
        let row = &mut out[i * p..(i + 1) * p];
        for k in 0..n {
            let aik = a.data[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for (o, &bkj) in row.iter_mut().zip(&b.data[k * p..(k + 1) * p]) {
                *o += aik * bkj;
            }
        }
    }
    Tensor::new(&[m, p], out)
}

pub fn relu(x: &Tensor) -> Tensor {
    Tensor {
        shape: x.shape.clone(),
        data: x.data.iter().map(|&v| v.max(0.0)).collect(),
    }
}

/// Valid cross-correlation of an `f x t` input with an `h x t` filter that
/// spans the whole time axis, sliding along frequency only. Output length is
/// `f - h + 1`.
pub fn conv_freq(x: &Tensor, w: &Tensor) -> Result<Tensor> {
    let (f, t) = x.dims2("input")?;
    let (h, tw) = w.dims2("filter")?;
    if tw != t || h > f {
        return Err(Error::ShapeMismatch(format!(
            "filter {h}x{tw} does not fit input {f}x{t}"
        )));
    }
    let mut out = vec![0.0; f - h + 1];
    conv_freq_into(&x.data, t, &w.data, &mut out);
    Tensor::new(&[f - h + 1], out)
}

/// Slice form of [`conv_freq`]. Rows `j..j+h` of a row-major input are
/// contiguous, so each output is a single dot product of length `h * t`.
pub(crate) fn conv_freq_into(x: &[f64], t: usize, w: &[f64], out: &mut [f64]) {
    let span = w.len();
    for (j, o) in out.iter_mut().enumerate() {
        *o = dot(&x[j * t..j * t + span], w);
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    // Four accumulators break the serial dependency chain.
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for i in 0..chunks {
        let k = 4 * i;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut tail = 0.0;
    for k in 4 * chunks..a.len() {
        tail += a[k] * b[k];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}
