//! Forward and backward kernels for each layer type.
//!
//! Conventions: dense weights are [out, in]; conv filters are
//! [filters, in_channels, width]; deconv filters are
//! [in_channels, filters, width] (the adjoint of a conv with the same
//! width and stride). Convolutions are valid (no padding).

use crate::error::{Error, Result};
use crate::nn::tensor::Tensor;
use crate::num::Real;

pub fn dense_forward<R: Real>(w: &Tensor<R>, b: &Tensor<R>, input: &Tensor<R>) -> Result<Tensor<R>> {
    let out = w.shape()[0];
    let cols = w.shape()[1];
    if input.len() != cols {
        return Err(Error::Shape(format!(
            "dense expects {cols} inputs, got {}",
            input.len()
        )));
    }
    let x = input.data();
    let wd = w.data();
    let mut y = b.data().to_vec();
    for (o, yo) in y.iter_mut().enumerate() {
        let row = &wd[o * cols..(o + 1) * cols];
        let mut acc = R::zero();
        for (wi, xi) in row.iter().zip(x) {
            acc += *wi * *xi;
        }
        *yo += acc;
    }
    Tensor::new(vec![out], y)
}

pub fn dense_backward<R: Real>(
    w: &Tensor<R>,
    input: &Tensor<R>,
    grad_out: &Tensor<R>,
) -> Result<(Tensor<R>, Tensor<R>, Tensor<R>)> {
    let out = w.shape()[0];
    let cols = w.shape()[1];
    let x = input.data();
    let g = grad_out.data();
    let wd = w.data();

    let mut dw = vec![R::zero(); out * cols];
    for o in 0..out {
        let go = g[o];
        let row = &mut dw[o * cols..(o + 1) * cols];
        for (di, xi) in row.iter_mut().zip(x) {
            *di = go * *xi;
        }
    }
    let db = g.to_vec();
    let mut dx = vec![R::zero(); cols];
    for o in 0..out {
        let go = g[o];
        let row = &wd[o * cols..(o + 1) * cols];
        for (dxi, wi) in dx.iter_mut().zip(row) {
            *dxi += go * *wi;
        }
    }
    Ok((
        Tensor::new(vec![out, cols], dw)?,
        Tensor::new(vec![out], db)?,
        Tensor::new(input.shape().to_vec(), dx)?,
    ))
}

pub fn conv1d_forward<R: Real>(w: &Tensor<R>, b: &Tensor<R>, input: &Tensor<R>) -> Result<Tensor<R>> {
    let (c_in, len) = input.as_2d()?;
    let filters = w.shape()[0];
    let width = w.shape()[2];
    if w.shape()[1] != c_in {
        return Err(Error::Shape(format!(
            "conv1d filter expects {} channels, input has {c_in}",
            w.shape()[1]
        )));
    }
    let lo = len - width + 1;
    let x = input.data();
    let wd = w.data();
    let mut y = vec![R::zero(); filters * lo];
    for f in 0..filters {
        let bias = b.data()[f];
        for ci in 0..c_in {
            let xrow = &x[ci * len..(ci + 1) * len];
            let frow = &wd[(f * c_in + ci) * width..(f * c_in + ci + 1) * width];
            let yrow = &mut y[f * lo..(f + 1) * lo];
            for i in 0..lo {
                let mut acc = R::zero();
                for (t, wt) in frow.iter().enumerate() {
                    acc += *wt * xrow[i + t];
                }
                yrow[i] += acc;
            }
        }
        for v in &mut y[f * lo..(f + 1) * lo] {
            *v += bias;
        }
    }
    Tensor::new(vec![filters, lo], y)
}

pub fn conv1d_backward<R: Real>(
    w: &Tensor<R>,
    input: &Tensor<R>,
    grad_out: &Tensor<R>,
) -> Result<(Tensor<R>, Tensor<R>, Tensor<R>)> {
    let (c_in, len) = input.as_2d()?;
    let filters = w.shape()[0];
    let width = w.shape()[2];
    let lo = len - width + 1;
    let x = input.data();
    let g = grad_out.data();
    let wd = w.data();

    let mut dw = vec![R::zero(); filters * c_in * width];
    let mut db = vec![R::zero(); filters];
    let mut dx = vec![R::zero(); c_in * len];
    for f in 0..filters {
        let grow = &g[f * lo..(f + 1) * lo];
        db[f] = grow.iter().copied().sum();
        for ci in 0..c_in {
            let xrow = &x[ci * len..(ci + 1) * len];
            let frow = &wd[(f * c_in + ci) * width..(f * c_in + ci + 1) * width];
            let dwrow = &mut dw[(f * c_in + ci) * width..(f * c_in + ci + 1) * width];
            for (t, dwt) in dwrow.iter_mut().enumerate() {
                let mut acc = R::zero();
                for i in 0..lo {
                    acc += grow[i] * xrow[i + t];
                }
                *dwt += acc;
            }
            let dxrow = &mut dx[ci * len..(ci + 1) * len];
            for i in 0..lo {
                let gi = grow[i];
                for (t, wt) in frow.iter().enumerate() {
                    dxrow[i + t] += gi * *wt;
                }
            }
        }
    }
    Ok((
        Tensor::new(vec![filters, c_in, width], dw)?,
        Tensor::new(vec![filters], db)?,
        Tensor::new(vec![c_in, len], dx)?,
    ))
}

pub fn deconv1d_forward<R: Real>(
    w: &Tensor<R>,
    b: &Tensor<R>,
    stride: usize,
    input: &Tensor<R>,
) -> Result<Tensor<R>> {
    let (c_in, len) = input.as_2d()?;
    if w.shape()[0] != c_in {
        return Err(Error::Shape(format!(
            "deconv1d filter expects {} channels, input has {c_in}",
            w.shape()[0]
        )));
    }
    let filters = w.shape()[1];
    let width = w.shape()[2];
    let lo = stride * (len - 1) + width;
    let x = input.data();
    let wd = w.data();
    let mut y = vec![R::zero(); filters * lo];
    for ci in 0..c_in {
        let xrow = &x[ci * len..(ci + 1) * len];
        for f in 0..filters {
            let frow = &wd[(ci * filters + f) * width..(ci * filters + f + 1) * width];
            let yrow = &mut y[f * lo..(f + 1) * lo];
            for (i, xi) in xrow.iter().enumerate() {
                let base = stride * i;
                for (t, wt) in frow.iter().enumerate() {
                    yrow[base + t] += *xi * *wt;
                }
            }
        }
    }
    for f in 0..filters {
        let bias = b.data()[f];
        for v in &mut y[f * lo..(f + 1) * lo] {
            *v += bias;
        }
    }
    Tensor::new(vec![filters, lo], y)
}

pub fn deconv1d_backward<R: Real>(
    w: &Tensor<R>,
    stride: usize,
    input: &Tensor<R>,
    grad_out: &Tensor<R>,
) -> Result<(Tensor<R>, Tensor<R>, Tensor<R>)> {
    let (c_in, len) = input.as_2d()?;
    let filters = w.shape()[1];
    let width = w.shape()[2];
    let lo = stride * (len - 1) + width;
    let x = input.data();
    let g = grad_out.data();
    let wd = w.data();

    let mut dw = vec![R::zero(); c_in * filters * width];
    let mut db = vec![R::zero(); filters];
    let mut dx = vec![R::zero(); c_in * len];
    for f in 0..filters {
        db[f] = g[f * lo..(f + 1) * lo].iter().copied().sum();
    }
    for ci in 0..c_in {
        let xrow = &x[ci * len..(ci + 1) * len];
        let dxrow = &mut dx[ci * len..(ci + 1) * len];
        for f in 0..filters {
            let grow = &g[f * lo..(f + 1) * lo];
            let frow = &wd[(ci * filters + f) * width..(ci * filters + f + 1) * width];
            let dwrow = &mut dw[(ci * filters + f) * width..(ci * filters + f + 1) * width];
            for i in 0..len {
                let base = stride * i;
                let xi = xrow[i];
                let mut acc = R::zero();
                for t in 0..width {
                    dwrow[t] += xi * grow[base + t];
                    acc += frow[t] * grow[base + t];
                }
                dxrow[i] += acc;
            }
        }
    }
    Ok((
        Tensor::new(vec![c_in, filters, width], dw)?,
        Tensor::new(vec![filters], db)?,
        Tensor::new(vec![c_in, len], dx)?,
    ))
}

pub fn maxpool1d_forward<R: Real>(window: usize, stride: usize, input: &Tensor<R>) -> Result<Tensor<R>> {
    let (c, len) = input.as_2d()?;
    let lo = (len - window) / stride + 1;
    let x = input.data();
    let mut y = vec![R::zero(); c * lo];
    for ci in 0..c {
        let xrow = &x[ci * len..(ci + 1) * len];
        let yrow = &mut y[ci * lo..(ci + 1) * lo];
        for (i, yi) in yrow.iter_mut().enumerate() {
            let start = i * stride;
            let mut best = xrow[start];
            for &v in &xrow[start + 1..start + window] {
                if v > best {
                    best = v;
                }
            }
            *yi = best;
        }
    }
    Tensor::new(vec![c, lo], y)
}

/// Max-pool gradient: routed to the argmax of each window, ties to the
/// lowest index.
pub fn maxpool1d_backward<R: Real>(
    window: usize,
    stride: usize,
    input: &Tensor<R>,
    grad_out: &Tensor<R>,
) -> Result<Tensor<R>> {
    let (c, len) = input.as_2d()?;
    let lo = (len - window) / stride + 1;
    let x = input.data();
    let g = grad_out.data();
    let mut dx = vec![R::zero(); c * len];
    for ci in 0..c {
        let xrow = &x[ci * len..(ci + 1) * len];
        let grow = &g[ci * lo..(ci + 1) * lo];
        let dxrow = &mut dx[ci * len..(ci + 1) * len];
        for (i, &gi) in grow.iter().enumerate() {
            let start = i * stride;
            let mut best = start;
            for j in start + 1..start + window {
                if xrow[j] > xrow[best] {
                    best = j;
                }
            }
            dxrow[best] += gi;
        }
    }
    Tensor::new(vec![c, len], dx)
}

pub fn relu_forward<R: Real>(input: &Tensor<R>) -> Tensor<R> {
    let data = input.data().iter().map(|&v| if v > R::zero() { v } else { R::zero() }).collect();
    Tensor::new(input.shape().to_vec(), data).expect("same shape")
}

pub fn relu_backward<R: Real>(input: &Tensor<R>, grad_out: &Tensor<R>) -> Tensor<R> {
    let data = input
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(&x, &g)| if x > R::zero() { g } else { R::zero() })
        .collect();
    Tensor::new(input.shape().to_vec(), data).expect("same shape")
}

pub fn sigmoid_forward<R: Real>(input: &Tensor<R>) -> Tensor<R> {
    let data = input.data().iter().map(|&v| sigmoid(v)).collect();
    Tensor::new(input.shape().to_vec(), data).expect("same shape")
}

pub fn sigmoid_backward<R: Real>(input: &Tensor<R>, grad_out: &Tensor<R>) -> Tensor<R> {
    let data = input
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(&x, &g)| {
            let s = sigmoid(x);
            g * s * (R::one() - s)
        })
        .collect();
    Tensor::new(input.shape().to_vec(), data).expect("same shape")
}

#[inline]
pub fn sigmoid<R: Real>(x: R) -> R {
    R::one() / (R::one() + (-x).exp())
}
