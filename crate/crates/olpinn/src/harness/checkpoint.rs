//! Self-describing binary checkpoints for trained networks.
//!
//! Layout (all integers little-endian):
//!   magic "OPCK" | format version u32 | payload kind u8 |
//!   [DeepONet only: m u64, has_norm u8, lo f64, hi f64] |
//!   net count u64 | per net: name len u64, name bytes, activation name
//!   (len-prefixed), width count u64, widths u64..., value count u64,
//!   values f64 (little-endian bits)... | sha256 of everything above.

use crate::deeponet::{DeepONetModel, InputDescriptor};
use crate::error::{Error, Result};
use crate::nn::{Activation, NetworkParams};
use sha2::{Digest, Sha256};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"OPCK";
const VERSION: u32 = 1;

const KIND_DEEPONET: u8 = 1;
const KIND_NETWORKS: u8 = 2;

/// Checkpoint payload: either one pretrained operator model or a named
/// collection of plain networks (e.g. trained PINN + correction nets).
#[derive(Debug, Clone, PartialEq)]
pub enum CheckpointPayload {
    DeepONet(DeepONetModel),
    Networks(Vec<(String, NetworkParams)>),
}

fn put_u64(buf: &mut Vec<u8>, v: u64) {
    buf.extend_from_slice(&v.to_le_bytes());
}

fn put_str(buf: &mut Vec<u8>, s: &str) {
    put_u64(buf, s.len() as u64);
    buf.extend_from_slice(s.as_bytes());
}

fn put_net(buf: &mut Vec<u8>, name: &str, net: &NetworkParams) {
    put_str(buf, name);
    put_str(buf, net.activation().name());
    put_u64(buf, net.widths().len() as u64);
    for &w in net.widths() {
        put_u64(buf, w as u64);
    }
    put_u64(buf, net.values().len() as u64);
    for &v in net.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Checkpoint("truncated checkpoint".into()));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn str(&mut self) -> Result<String> {
        let n = self.u64()? as usize;
        if n > 1 << 20 {
            return Err(Error::Checkpoint("implausible string length".into()));
        }
        String::from_utf8(self.take(n)?.to_vec())
            .map_err(|_| Error::Checkpoint("invalid utf-8 in checkpoint".into()))
    }

    fn net(&mut self) -> Result<(String, NetworkParams)> {
        let name = self.str()?;
        let activation = Activation::from_name(&self.str()?)
            .map_err(|e| Error::Checkpoint(e.to_string()))?;
        let n_widths = self.u64()? as usize;
        if n_widths > 64 {
            return Err(Error::Checkpoint("implausible layer count".into()));
        }
        let mut widths = Vec::with_capacity(n_widths);
        for _ in 0..n_widths {
            widths.push(self.u64()? as usize);
        }
        let n_values = self.u64()? as usize;
        let mut values = Vec::with_capacity(n_values);
        for _ in 0..n_values {
            values.push(self.f64()?);
        }
        let net = NetworkParams::from_values(&widths, activation, values)
            .map_err(|e| Error::Checkpoint(format!("architecture mismatch: {e}")))?;
        Ok((name, net))
    }
}

fn encode(payload: &CheckpointPayload) -> Vec<u8> {
    let mut buf = Vec::new();
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    match payload {
        CheckpointPayload::DeepONet(model) => {
            buf.push(KIND_DEEPONET);
            put_u64(&mut buf, model.input.m as u64);
            match model.input.normalize {
                Some((lo, hi)) => {
                    buf.push(1);
                    buf.extend_from_slice(&lo.to_le_bytes());
                    buf.extend_from_slice(&hi.to_le_bytes());
                }
                None => {
                    buf.push(0);
                    buf.extend_from_slice(&0.0f64.to_le_bytes());
                    buf.extend_from_slice(&0.0f64.to_le_bytes());
                }
            }
            put_u64(&mut buf, 3);
            put_net(&mut buf, "branch", &model.branch);
            put_net(&mut buf, "trunk", &model.trunk);
            put_net(&mut buf, "bias_transform", &model.bias_transform);
        }
        CheckpointPayload::Networks(nets) => {
            buf.push(KIND_NETWORKS);
            put_u64(&mut buf, nets.len() as u64);
            for (name, net) in nets {
                put_net(&mut buf, name, net);
            }
        }
    }
    let digest = Sha256::digest(&buf);
    buf.extend_from_slice(&digest);
    buf
}

pub fn save_checkpoint(payload: &CheckpointPayload, path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(&encode(payload))?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<CheckpointPayload> {
    let mut buf = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut buf)?;
    if buf.len() < 4 + 4 + 1 + 32 {
        return Err(Error::Checkpoint("truncated checkpoint".into()));
    }
    let (body, digest) = buf.split_at(buf.len() - 32);
    let expect = Sha256::digest(body);
    if digest != expect.as_slice() {
        return Err(Error::Checkpoint("checksum mismatch".into()));
    }
    let mut r = Reader { buf: body, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Checkpoint("not a checkpoint file".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!(
            "unsupported checkpoint version {version} (expected {VERSION})"
        )));
    }
    match r.u8()? {
        KIND_DEEPONET => {
            let m = r.u64()? as usize;
            let has_norm = r.u8()? != 0;
            let lo = r.f64()?;
            let hi = r.f64()?;
            let n = r.u64()?;
            if n != 3 {
                return Err(Error::Checkpoint(format!("operator checkpoint with {n} nets")));
            }
            let (_, branch) = r.net()?;
            let (_, trunk) = r.net()?;
            let (_, bias) = r.net()?;
            let input = InputDescriptor { m, normalize: has_norm.then_some((lo, hi)) };
            let model = DeepONetModel::new(branch, trunk, bias, input)
                .map_err(|e| Error::Checkpoint(e.to_string()))?;
            Ok(CheckpointPayload::DeepONet(model))
        }
        KIND_NETWORKS => {
            let n = r.u64()? as usize;
            if n > 64 {
                return Err(Error::Checkpoint("implausible network count".into()));
            }
            let mut nets = Vec::with_capacity(n);
            for _ in 0..n {
                nets.push(r.net()?);
            }
            Ok(CheckpointPayload::Networks(nets))
        }
        other => Err(Error::Checkpoint(format!("unknown payload kind {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Rng;

    fn sample_model() -> DeepONetModel {
        let mut rng = Rng::new(3);
        let branch = NetworkParams::init(&[1, 6, 3], Activation::Tanh, &mut rng).unwrap();
        let trunk = NetworkParams::init(&[1, 3, 3], Activation::Tanh, &mut rng).unwrap();
        let bias = NetworkParams::init(&[1, 1], Activation::Identity, &mut rng).unwrap();
        DeepONetModel::new(branch, trunk, bias, InputDescriptor { m: 1, normalize: Some((0.0, 1.0)) })
            .unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let model = sample_model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        save_checkpoint(&CheckpointPayload::DeepONet(model.clone()), &path).unwrap();
        let loaded = match load_checkpoint(&path).unwrap() {
            CheckpointPayload::DeepONet(m) => m,
            _ => panic!("wrong payload kind"),
        };
        assert_eq!(model, loaded);
        // bit-identical predictions on a spread of inputs
        let mut rng = Rng::new(9);
        for _ in 0..100 {
            let a = rng.uniform(0.0, 1.0);
            let x = rng.uniform(-1.0, 1.0);
            let p0 = model.predict(&[a], &[x]).unwrap();
            let p1 = loaded.predict(&[a], &[x]).unwrap();
            assert_eq!(p0.to_bits(), p1.to_bits());
        }
    }

    #[test]
    fn corrupted_byte_fails_checksum() {
        let model = sample_model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        save_checkpoint(&CheckpointPayload::DeepONet(model), &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x40;
        std::fs::write(&path, &bytes).unwrap();
        let err = load_checkpoint(&path).unwrap_err();
        assert!(matches!(err, Error::Checkpoint(ref m) if m.contains("checksum")));
    }

    #[test]
    fn unknown_version_is_rejected() {
        let model = sample_model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        save_checkpoint(&CheckpointPayload::DeepONet(model), &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[4] = 99; // version field
        // recompute checksum so only the version is wrong
        let body_len = bytes.len() - 32;
        let digest = Sha256::digest(&bytes[..body_len]);
        bytes[body_len..].copy_from_slice(&digest);
        std::fs::write(&path, &bytes).unwrap();
        let err = load_checkpoint(&path).unwrap_err();
        assert!(matches!(err, Error::Checkpoint(ref m) if m.contains("version")));
    }

    #[test]
    fn truncated_file_is_rejected() {
        let model = sample_model();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        save_checkpoint(&CheckpointPayload::DeepONet(model), &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() / 3]).unwrap();
        assert!(load_checkpoint(&path).is_err());
    }

    #[test]
    fn network_collection_round_trip() {
        let mut rng = Rng::new(1);
        let a = NetworkParams::init(&[2, 8, 1], Activation::Tanh, &mut rng).unwrap();
        let b = NetworkParams::init(&[3, 4, 2], Activation::Relu, &mut rng).unwrap();
        let payload =
            CheckpointPayload::Networks(vec![("pinn".into(), a), ("branch".into(), b)]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nets.ckpt");
        save_checkpoint(&payload, &path).unwrap();
        assert_eq!(load_checkpoint(&path).unwrap(), payload);
    }
}
