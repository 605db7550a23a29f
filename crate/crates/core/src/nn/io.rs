//! Parameter files: magic, JSON network spec, then every parameter as a
//! little-endian `f64` in layer declaration order.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::net::{NetworkSpec, QNetwork};
use crate::error::NetError;

const MAGIC: &[u8; 8] = b"RQNETv1\n";

pub fn write_params<W: Write>(net: &QNetwork, mut out: W) -> Result<(), NetError> {
    let header = serde_json::to_vec(net.spec()).map_err(|e| NetError::Format(e.to_string()))?;
    out.write_all(MAGIC)?;
    out.write_all(&(header.len() as u32).to_le_bytes())?;
    out.write_all(&header)?;
    out.write_all(&(net.param_count() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(net.param_count() * 8);
    for p in net.params() {
        buf.extend_from_slice(&p.to_le_bytes());
    }
    out.write_all(&buf)?;
    Ok(())
}

pub fn read_params<R: Read>(mut input: R) -> Result<QNetwork, NetError> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(NetError::Format("bad magic".into()));
    }
    let mut len4 = [0u8; 4];
    input.read_exact(&mut len4)?;
    let mut header = vec![0u8; u32::from_le_bytes(len4) as usize];
    input.read_exact(&mut header)?;
    let spec: NetworkSpec =
        serde_json::from_slice(&header).map_err(|e| NetError::Format(format!("header: {e}")))?;
    let mut net = QNetwork::zeros(spec)?;
    let mut len8 = [0u8; 8];
    input.read_exact(&mut len8)?;
    let count = u64::from_le_bytes(len8) as usize;
    if count != net.param_count() {
        return Err(NetError::Shape {
            what: "parameter count",
            expected: net.param_count(),
            actual: count,
        });
    }
    let mut raw = vec![0u8; count * 8];
    input.read_exact(&mut raw)?;
    for (p, chunk) in net.params_mut().iter_mut().zip(raw.chunks_exact(8)) {
        *p = f64::from_le_bytes(chunk.try_into().expect("8-byte chunk"));
        if !p.is_finite() {
            return Err(NetError::Format("non-finite parameter".into()));
        }
    }
    let mut rest = [0u8; 1];
    if input.read(&mut rest)? != 0 {
        return Err(NetError::Format("trailing bytes".into()));
    }
    Ok(net)
}

pub fn save_params(net: &QNetwork, path: &Path) -> Result<(), NetError> {
    let mut buf = Vec::new();
    write_params(net, &mut buf)?;
    fs::write(path, buf)?;
    Ok(())
}

pub fn load_params(path: &Path) -> Result<QNetwork, NetError> {
    read_params(fs::read(path)?.as_slice())
}
