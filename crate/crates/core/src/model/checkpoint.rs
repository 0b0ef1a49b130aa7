//! Binary checkpoint container.
//!
//! Layout (all integers little-endian):
//!
//! | bytes         | content                                   |
//! |---------------|-------------------------------------------|
//! | 8             | magic `GFCKPT\0\0`                        |
//! | 4             | format version (`u32`)                    |
//! | 8             | header length `n` (`u64`)                 |
//! | n             | UTF-8 JSON header                         |
//! | rest          | tensors as `f64` LE, in header order      |
//!
//! The header records the feature configuration (including the hash
//! algorithm and seed), the label spaces, the training configuration and the
//! name and length of every tensor.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ClasswiseHead, FrameHeads, Linear, MultiTaskModel, Parameters, TrainConfig};
use crate::error::{Error, Result};
use crate::features::{FeatureConfig, HASH_ALGORITHM};
use crate::labels::{Task, TaskSpec, NUM_FRAMES, NUM_GENRES};

pub const CHECKPOINT_MAGIC: &[u8; 8] = b"GFCKPT\0\0";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    hash_algorithm: String,
    feature_config: FeatureConfig,
    hidden_dim: usize,
    classwise: bool,
    label_spaces: Vec<TaskSpec>,
    train_config: Option<TrainConfig>,
    tensors: Vec<TensorInfo>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TensorInfo {
    name: String,
    len: usize,
}

fn tensor_names(classwise: bool) -> Vec<String> {
    let mut names = vec![
        "encoder.weight".to_string(),
        "encoder.bias".into(),
        "genre_head.weight".into(),
        "genre_head.bias".into(),
    ];
    if classwise {
        for k in 0..NUM_FRAMES {
            for part in ["encoder.weight", "encoder.bias", "head.weight", "head.bias"] {
                names.push(format!("frames.{k}.{part}"));
            }
        }
    } else {
        names.push("frame_head.weight".into());
        names.push("frame_head.bias".into());
    }
    names
}

pub fn checkpoint_bytes(model: &MultiTaskModel) -> Vec<u8> {
    let classwise = model.is_classwise();
    let tensors = model.params.tensors();
    let header = Header {
        hash_algorithm: HASH_ALGORITHM.into(),
        feature_config: model.feature_config.clone(),
        hidden_dim: model.hidden_dim,
        classwise,
        label_spaces: Task::ALL.iter().map(|t| t.spec()).collect(),
        train_config: model.train_config.clone(),
        tensors: tensor_names(classwise)
            .into_iter()
            .zip(&tensors)
            .map(|(name, (t, _))| TensorInfo { name, len: t.len() })
            .collect(),
    };
    let header = serde_json::to_vec(&header).expect("header serializes");
    let mut out = Vec::with_capacity(20 + header.len() + 8 * model.params.num_params());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    out.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    out.extend_from_slice(&(header.len() as u64).to_le_bytes());
    out.extend_from_slice(&header);
    for (t, _) in tensors {
        for v in t {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn save_checkpoint(model: &MultiTaskModel, path: &Path) -> Result<()> {
    fs::write(path, checkpoint_bytes(model)).map_err(|e| Error::io(path, e))
}

pub fn load_checkpoint(path: &Path) -> Result<MultiTaskModel> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_checkpoint(&bytes).map_err(|message| Error::Checkpoint {
        path: path.to_path_buf(),
        message,
    })
}

fn take<'a>(bytes: &mut &'a [u8], n: usize) -> std::result::Result<&'a [u8], String> {
    if bytes.len() < n {
        return Err("truncated file".into());
    }
    let (head, rest) = bytes.split_at(n);
    *bytes = rest;
    Ok(head)
}

pub fn parse_checkpoint(mut bytes: &[u8]) -> std::result::Result<MultiTaskModel, String> {
    let cur = &mut bytes;
    if take(cur, 8)? != CHECKPOINT_MAGIC {
        return Err("not a checkpoint (bad magic)".into());
    }
    let version = u32::from_le_bytes(take(cur, 4)?.try_into().unwrap());
    if version != CHECKPOINT_VERSION {
        return Err(format!("unsupported checkpoint version {version}"));
    }
    let hlen = u64::from_le_bytes(take(cur, 8)?.try_into().unwrap()) as usize;
    let header: Header = serde_json::from_slice(take(cur, hlen)?).map_err(|e| format!("bad header: {e}"))?;
    if header.hash_algorithm != HASH_ALGORITHM {
        return Err(format!("unsupported hash algorithm {}", header.hash_algorithm));
    }
    header.feature_config.validate().map_err(|e| e.to_string())?;

    let d = header.feature_config.hash_dim;
    let h = header.hidden_dim;
    let expected = tensor_names(header.classwise);
    if header.tensors.len() != expected.len() || header.tensors.iter().zip(&expected).any(|(t, n)| &t.name != n) {
        return Err("tensor list does not match the declared architecture".into());
    }
    let mut read = |len: usize| -> std::result::Result<Vec<f64>, String> {
        let raw = take(cur, len * 8)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    };
    let mut linear = |in_dim: usize, out_dim: usize| -> std::result::Result<Linear, String> {
        Ok(Linear {
            in_dim,
            out_dim,
            weights: read(in_dim * out_dim)?,
            bias: read(out_dim)?,
        })
    };
    let encoder = linear(d, h)?;
    let genre_head = linear(h, NUM_GENRES)?;
    let frames = if header.classwise {
        let mut heads = Vec::with_capacity(NUM_FRAMES);
        for _ in 0..NUM_FRAMES {
            heads.push(ClasswiseHead {
                encoder: linear(d, h)?,
                head: linear(h, 1)?,
            });
        }
        FrameHeads::Classwise(heads)
    } else {
        FrameHeads::Joint(linear(h, NUM_FRAMES)?)
    };
    let params = Parameters {
        encoder,
        genre_head,
        frames,
    };
    for ((t, _), info) in params.tensors().iter().zip(&header.tensors) {
        if t.len() != info.len {
            return Err(format!("tensor {} has length {} but header says {}", info.name, t.len(), info.len));
        }
    }
    if !cur.is_empty() {
        return Err(format!("{} trailing bytes", cur.len()));
    }
    Ok(MultiTaskModel {
        feature_config: header.feature_config,
        hidden_dim: h,
        params,
        train_config: header.train_config,
    })
}
