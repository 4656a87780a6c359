//! OCCW weights files.
//!
//! Layout, little-endian: `"OCCW"`, u32 version, u32-length-prefixed UTF-8
//! descriptor (`key = value` lines), u32 tensor count, then per tensor a
//! u32-length-prefixed name, u32 rank, u32 dims and the f32 values.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::generator::{Generator, GeneratorArch, DEPTH};
use super::train::Method;
use crate::binio::{len_u32, put_f32s, put_text, put_u32, Reader};
use crate::nn::Tensor;
use crate::{Error, Result};

pub const OCCW_MAGIC: &str = "OCCW";
pub const OCCW_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct ModelWeights {
    pub generator: Generator<f32>,
    pub method: Method,
    pub seed: u64,
    pub config_hash: String,
}

fn descriptor(w: &ModelWeights) -> String {
    let a = &w.generator.arch;
    let mut s = String::new();
    let _ = writeln!(s, "arch = generator");
    let _ = writeln!(s, "base_channels = {}", a.base_channels);
    let _ = writeln!(s, "depth = {DEPTH}");
    let _ = writeln!(s, "input_gain = {}", a.input_gain);
    let _ = writeln!(s, "logit_scale = {}", a.logit_scale);
    let _ = writeln!(s, "method = {}", w.method);
    let _ = writeln!(s, "seed = {}", w.seed);
    let _ = writeln!(s, "config_hash = {}", w.config_hash);
    s
}

pub fn encode_weights(w: &ModelWeights) -> Result<Vec<u8>> {
    let g = &w.generator;
    let mut out = Vec::with_capacity(64 + 4 * g.param_count());
    out.extend_from_slice(OCCW_MAGIC.as_bytes());
    put_u32(&mut out, OCCW_VERSION);
    put_text(&mut out, &descriptor(w));
    let params = g.params();
    put_u32(&mut out, len_u32(params.len(), "tensor count")?);
    for (name, t) in g.param_names().iter().zip(params) {
        put_text(&mut out, name);
        put_u32(&mut out, len_u32(t.shape().len(), "rank")?);
        for &d in t.shape() {
            put_u32(&mut out, len_u32(d, "dimension")?);
        }
        put_f32s(&mut out, t.data());
    }
    Ok(out)
}

fn parse_descriptor(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for line in text.lines().filter(|l| !l.trim().is_empty()) {
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad descriptor line {line:?}")))?;
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

pub fn decode_weights(bytes: &[u8]) -> Result<ModelWeights> {
    let mut r = Reader::new(bytes);
    r.magic(OCCW_MAGIC)?;
    let version = r.u32("version")?;
    if version != OCCW_VERSION {
        return Err(Error::BadVersion { found: version, expected: OCCW_VERSION });
    }
    let desc = parse_descriptor(&r.text("descriptor")?)?;
    let get = |k: &str| desc.get(k).ok_or_else(|| Error::Format(format!("descriptor lacks {k}")));
    let num = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| Error::Format(format!("bad {k}"))) };
    if get("arch")? != "generator" {
        return Err(Error::ArchitectureMismatch(format!("unknown arch {:?}", get("arch")?)));
    }
    if get("depth")? != &DEPTH.to_string() {
        return Err(Error::ArchitectureMismatch(format!("depth {} (expected {DEPTH})", get("depth")?)));
    }
    let arch = GeneratorArch {
        base_channels: get("base_channels")?
            .parse()
            .map_err(|_| Error::Format("bad base_channels".into()))?,
        input_gain: num("input_gain")?,
        logit_scale: num("logit_scale")?,
    };
    arch.validate().map_err(|e| Error::Format(e.to_string()))?;
    let method: Method = get("method")?.parse().map_err(|_| Error::Format("bad method".into()))?;
    let seed = get("seed")?.parse().map_err(|_| Error::Format("bad seed".into()))?;
    let config_hash = get("config_hash")?.clone();

    // shapes come from a zero-std init of the declared architecture
    let mut g = Generator::<f32>::with_init_std(arch, 0.0, &mut crate::rng::seeded(0, 0))?;
    let names = g.param_names();
    let count = r.u32("tensor count")? as usize;
    if count != names.len() {
        return Err(Error::ArchitectureMismatch(format!(
            "{count} tensors, architecture has {}",
            names.len()
        )));
    }
    for (name, param) in names.iter().zip(g.params_mut()) {
        let got = r.text("tensor name")?;
        if &got != name {
            return Err(Error::ArchitectureMismatch(format!("tensor {got:?}, expected {name:?}")));
        }
        let rank = r.u32("rank")? as usize;
        if rank > 8 {
            return Err(Error::Format(format!("tensor {name}: rank {rank}")));
        }
        let shape: Vec<usize> = (0..rank).map(|_| r.u32("dimension").map(|d| d as usize)).collect::<Result<_>>()?;
        if shape != param.shape() {
            return Err(Error::ArchitectureMismatch(format!(
                "tensor {name}: shape {shape:?}, expected {:?}",
                param.shape()
            )));
        }
        let data = r.f32s(param.len(), name)?;
        *param = Tensor::from_vec(&shape, data)?;
    }
    r.finish()?;
    Ok(ModelWeights { generator: g, method, seed, config_hash })
}

pub fn save_weights(w: &ModelWeights, path: &Path) -> Result<()> {
    std::fs::write(path, encode_weights(w)?).map_err(|e| Error::io(path, e))
}

pub fn load_weights(path: &Path) -> Result<ModelWeights> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_weights(&bytes)
}

/// Load and require a specific architecture.
pub fn load_weights_for(path: &Path, arch: &GeneratorArch) -> Result<ModelWeights> {
    let w = load_weights(path)?;
    if w.generator.arch != *arch {
        return Err(Error::ArchitectureMismatch(format!(
            "file has {:?}, expected {arch:?}",
            w.generator.arch
        )));
    }
    Ok(w)
}
