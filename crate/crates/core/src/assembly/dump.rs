//! Binary dump of dense operators for cross-run regression.
//!
//! Layout (little endian): 8-byte magic, `n: u64` (panels), `d: u64`
//! (components), `a: f64`, `m: f64`, `mesh_hash: u64`, then the `(d·n)²`
//! operator entries row-major as `(re, im)` pairs of `f64`.

use std::io::{Read, Write};

use faer::{c64, Mat};

use super::operators::DenseOperator;
use super::AssemblyError;

const MAGIC: &[u8; 8] = b"SHSPMAT1";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DumpHeader {
    pub panels: u64,
    pub components: u64,
    pub a: f64,
    pub m: f64,
    pub mesh_hash: u64,
}

/// First eight bytes of a mesh content hash as a little-endian integer.
pub fn mesh_hash64(hash: &[u8; 32]) -> u64 {
    u64::from_le_bytes(hash[..8].try_into().expect("8 bytes"))
}

pub fn write_dump(mut w: impl Write, op: &DenseOperator, header: &DumpHeader) -> Result<(), AssemblyError> {
    let n = op.dim();
    if header.panels * header.components != n as u64 {
        return Err(AssemblyError::Parameter("dump header does not match the operator size".into()));
    }
    w.write_all(MAGIC)?;
    w.write_all(&header.panels.to_le_bytes())?;
    w.write_all(&header.components.to_le_bytes())?;
    w.write_all(&header.a.to_le_bytes())?;
    w.write_all(&header.m.to_le_bytes())?;
    w.write_all(&header.mesh_hash.to_le_bytes())?;
    let entries = op.entries();
    let mut buf = Vec::with_capacity(16 * n);
    for i in 0..n {
        buf.clear();
        for j in 0..n {
            let z = entries[(i, j)];
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

/// Reads a dump back as its header and the row-major entry matrix.
pub fn read_dump(mut r: impl Read) -> Result<(DumpHeader, Mat<c64>), AssemblyError> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(AssemblyError::Parameter("not an operator dump (bad magic)".into()));
    }
    let mut word = [0u8; 8];
    let mut next = |r: &mut dyn Read| -> Result<[u8; 8], AssemblyError> {
        r.read_exact(&mut word)?;
        Ok(word)
    };
    let panels = u64::from_le_bytes(next(&mut r)?);
    let components = u64::from_le_bytes(next(&mut r)?);
    let a = f64::from_le_bytes(next(&mut r)?);
    let m = f64::from_le_bytes(next(&mut r)?);
    let mesh_hash = u64::from_le_bytes(next(&mut r)?);
    let n = usize::try_from(panels * components).map_err(|_| AssemblyError::Parameter("dump too large".into()))?;
    let mut data = vec![0u8; 16 * n * n];
    r.read_exact(&mut data)?;
    let at = |k: usize| f64::from_le_bytes(data[8 * k..8 * k + 8].try_into().expect("8 bytes"));
    let entries = Mat::from_fn(n, n, |i, j| c64::new(at(2 * (i * n + j)), at(2 * (i * n + j) + 1)));
    Ok((DumpHeader { panels, components, a, m, mesh_hash }, entries))
}
