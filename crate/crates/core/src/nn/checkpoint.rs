//! Network checkpoints: a one-line JSON header describing the network,
//! followed by the raw `f32` little-endian parameter blocks in declaration
//! order. Loading validates the byte count exactly, so truncated or padded
//! files are rejected rather than silently mis-read.

use std::fs;
use std::path::Path;

use crate::error::{PalError, Result};
use crate::nn::{Architecture, ScoringNetwork, TaskNetwork};

/// Metadata stored ahead of the parameter bytes.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CheckpointHeader {
    /// `"task"` or `"scoring"`.
    pub kind: String,
    pub architecture: Architecture,
    pub class_count: u32,
    /// Seed the run that produced this network was configured with.
    pub seed: u64,
    /// Epochs the network was trained for.
    pub epochs: u64,
}

fn encode(header: &CheckpointHeader, blocks: &[&ndarray::ArrayD<f32>]) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec(header)?;
    out.push(b'\n');
    for block in blocks {
        for &v in block.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

fn split_header(bytes: &[u8]) -> Result<(CheckpointHeader, &[u8])> {
    let pos = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| PalError::Checkpoint("missing header line".into()))?;
    let header: CheckpointHeader = serde_json::from_slice(&bytes[..pos])
        .map_err(|e| PalError::Checkpoint(format!("bad header: {e}")))?;
    Ok((header, &bytes[pos + 1..]))
}

fn fill_blocks(blocks: Vec<&mut ndarray::ArrayD<f32>>, mut body: &[u8]) -> Result<()> {
    let expected: usize = blocks.iter().map(|b| b.len() * 4).sum();
    if body.len() != expected {
        return Err(PalError::Checkpoint(format!(
            "parameter payload is {} bytes, expected {expected}",
            body.len()
        )));
    }
    for block in blocks {
        for v in block.iter_mut() {
            let (chunk, rest) = body.split_at(4);
            *v = f32::from_le_bytes(chunk.try_into().unwrap());
            body = rest;
        }
    }
    Ok(())
}

/// Write a task-network checkpoint.
pub fn save_task_checkpoint(
    path: &Path,
    net: &TaskNetwork,
    seed: u64,
    epochs: u64,
) -> Result<()> {
    let header = CheckpointHeader {
        kind: "task".into(),
        architecture: net.architecture().clone(),
        class_count: net.class_count(),
        seed,
        epochs,
    };
    fs::write(path, encode(&header, &net.param_blocks())?)?;
    Ok(())
}

/// Write a scoring-network checkpoint.
pub fn save_scoring_checkpoint(
    path: &Path,
    net: &ScoringNetwork,
    seed: u64,
    epochs: u64,
) -> Result<()> {
    let header = CheckpointHeader {
        kind: "scoring".into(),
        architecture: net.architecture().clone(),
        class_count: net.class_count(),
        seed,
        epochs,
    };
    fs::write(path, encode(&header, &net.param_blocks())?)?;
    Ok(())
}

/// Read back a task-network checkpoint, restoring parameters bit-exactly.
pub fn load_task_checkpoint(path: &Path) -> Result<(TaskNetwork, CheckpointHeader)> {
    let bytes = fs::read(path)?;
    let (header, body) = split_header(&bytes)?;
    if header.kind != "task" {
        return Err(PalError::Checkpoint(format!(
            "expected a task checkpoint, found kind {:?}",
            header.kind
        )));
    }
    let mut net = TaskNetwork::new(header.architecture.clone(), header.class_count, 0)?;
    fill_blocks(net.param_blocks_mut(), body)?;
    Ok((net, header))
}

/// Read back a scoring-network checkpoint, restoring parameters bit-exactly.
pub fn load_scoring_checkpoint(path: &Path) -> Result<(ScoringNetwork, CheckpointHeader)> {
    let bytes = fs::read(path)?;
    let (header, body) = split_header(&bytes)?;
    if header.kind != "scoring" {
        return Err(PalError::Checkpoint(format!(
            "expected a scoring checkpoint, found kind {:?}",
            header.kind
        )));
    }
    let mut net = ScoringNetwork::new(header.architecture.clone(), header.class_count, 0)?;
    fill_blocks(net.param_blocks_mut(), body)?;
    Ok((net, header))
}
