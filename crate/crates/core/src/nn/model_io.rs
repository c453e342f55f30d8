//! Versioned binary model container.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic "NRNN" | u32 version | u32 meta_count | meta entries (u32-length
//! key, u32-length value, UTF-8) | u64 init_seed | u32 rank + u64 dims
//! (input shape) | u32 layer_count | layer descriptors | parameter blobs
//! (per layer: u32 tensor count; per tensor: u32 rank, u64 dims, f64 data)
//! | u64 FNV-1a checksum of everything before it
//! ```
//!
//! Parameters are stored as 64-bit floats regardless of the in-memory
//! scalar type.

use std::path::Path;

use crate::error::{Error, Result};
use crate::nn::tensor::Tensor;
use crate::nn::{LayerGraph, LayerSpec};
use crate::num::Real;
use crate::util::fnv1a64;

const MAGIC: &[u8; 4] = b"NRNN";
const VERSION: u32 = 1;

/// A deserialized model plus its metadata, before shape validation against
/// any particular use.
#[derive(Debug, Clone)]
pub struct ModelFile<R: Real> {
    pub graph: LayerGraph<R>,
    pub meta: Vec<(String, String)>,
}

impl<R: Real> ModelFile<R> {
    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub fn save_model<R: Real>(graph: &LayerGraph<R>, meta: &[(String, String)]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    push_u32(&mut out, VERSION);
    push_u32(&mut out, meta.len() as u32);
    for (k, v) in meta {
        push_str(&mut out, k);
        push_str(&mut out, v);
    }
    push_u64(&mut out, graph.init_seed());
    push_shape(&mut out, graph.input_shape());
    push_u32(&mut out, graph.specs().len() as u32);
    for spec in graph.specs() {
        match *spec {
            LayerSpec::Dense { out: o } => {
                out.push(1);
                push_u64(&mut out, o as u64);
            }
            LayerSpec::Conv1d { filters, width } => {
                out.push(2);
                push_u64(&mut out, filters as u64);
                push_u64(&mut out, width as u64);
            }
            LayerSpec::MaxPool1d { window, stride } => {
                out.push(3);
                push_u64(&mut out, window as u64);
                push_u64(&mut out, stride as u64);
            }
            LayerSpec::Deconv1d { filters, width, stride } => {
                out.push(4);
                push_u64(&mut out, filters as u64);
                push_u64(&mut out, width as u64);
                push_u64(&mut out, stride as u64);
            }
            LayerSpec::Relu => out.push(5),
            LayerSpec::Sigmoid => out.push(6),
        }
    }
    for layer in graph.params() {
        push_u32(&mut out, layer.len() as u32);
        for t in layer {
            let (shape, data) = t.to_f64();
            push_shape(&mut out, &shape);
            for v in data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    let checksum = fnv1a64(&out);
    push_u64(&mut out, checksum);
    out
}

pub fn save_model_path<R: Real>(
    path: &Path,
    graph: &LayerGraph<R>,
    meta: &[(String, String)],
) -> Result<()> {
    std::fs::write(path, save_model(graph, meta))?;
    Ok(())
}

pub fn load_model<R: Real>(bytes: &[u8]) -> Result<ModelFile<R>> {
    if bytes.len() < 8 {
        return Err(Error::ModelFormat("file too short".into()));
    }
    let (body, tail) = bytes.split_at(bytes.len() - 8);
    let stored = u64::from_le_bytes(tail.try_into().unwrap());
    let actual = fnv1a64(body);
    if stored != actual {
        return Err(Error::ModelFormat(format!(
            "checksum mismatch: stored {stored:016x}, computed {actual:016x}"
        )));
    }
    let mut r = Reader { bytes: body, pos: 0 };
    let magic = r.take(4)?;
    if magic != MAGIC {
        return Err(Error::ModelFormat("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::ModelFormat(format!("unsupported version {version}")));
    }
    let meta_count = r.u32()? as usize;
    let mut meta = Vec::with_capacity(meta_count);
    for _ in 0..meta_count {
        let k = r.string()?;
        let v = r.string()?;
        meta.push((k, v));
    }
    let init_seed = r.u64()?;
    let input_shape = r.shape()?;
    let layer_count = r.u32()? as usize;
    let mut specs = Vec::with_capacity(layer_count);
    for _ in 0..layer_count {
        let tag = r.take(1)?[0];
        specs.push(match tag {
            1 => LayerSpec::Dense { out: r.u64()? as usize },
            2 => LayerSpec::Conv1d { filters: r.u64()? as usize, width: r.u64()? as usize },
            3 => LayerSpec::MaxPool1d { window: r.u64()? as usize, stride: r.u64()? as usize },
            4 => LayerSpec::Deconv1d {
                filters: r.u64()? as usize,
                width: r.u64()? as usize,
                stride: r.u64()? as usize,
            },
            5 => LayerSpec::Relu,
            6 => LayerSpec::Sigmoid,
            other => return Err(Error::ModelFormat(format!("unknown layer tag {other}"))),
        });
    }
    let mut params = Vec::with_capacity(layer_count);
    for _ in 0..layer_count {
        let count = r.u32()? as usize;
        let mut layer = Vec::with_capacity(count);
        for _ in 0..count {
            let shape = r.shape()?;
            let len: usize = shape.iter().product();
            let mut data = Vec::with_capacity(len);
            for _ in 0..len {
                data.push(r.f64()?);
            }
            layer.push(Tensor::<R>::from_f64(shape, &data)?);
        }
        params.push(layer);
    }
    if r.pos != body.len() {
        return Err(Error::ModelFormat(format!(
            "{} trailing bytes",
            body.len() - r.pos
        )));
    }
    let graph = LayerGraph::from_parts(input_shape, specs, params, init_seed)?;
    Ok(ModelFile { graph, meta })
}

pub fn load_model_path<R: Real>(path: &Path) -> Result<ModelFile<R>> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::ModelFormat(format!("{}: {e}", path.display())))?;
    load_model(&bytes)
}

fn push_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn push_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn push_str(out: &mut Vec<u8>, s: &str) {
    push_u32(out, s.len() as u32);
    out.extend_from_slice(s.as_bytes());
}

fn push_shape(out: &mut Vec<u8>, shape: &[usize]) {
    push_u32(out, shape.len() as u32);
    for &d in shape {
        push_u64(out, d as u64);
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.bytes.len() {
            return Err(Error::ModelFormat("unexpected end of file".into()));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn string(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        let bytes = self.take(len)?;
        String::from_utf8(bytes.to_vec())
            .map_err(|_| Error::ModelFormat("invalid UTF-8 in metadata".into()))
    }

    fn shape(&mut self) -> Result<Vec<usize>> {
        let rank = self.u32()? as usize;
        if rank > 8 {
            return Err(Error::ModelFormat(format!("implausible tensor rank {rank}")));
        }
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(self.u64()? as usize);
        }
        Ok(shape)
    }
}
