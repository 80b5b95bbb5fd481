//! Versioned binary dump of assembled operator matrices, for debugging and
//! external inspection.
//!
//! Layout (little endian): magic `PTOP`, format version u32, operator kind
//! u8, node count u32, then n*n matrix entries as f64, row major.

use std::io::{self, Read, Write};

use nalgebra::DMatrix;
use thiserror::Error;

use crate::layerops::{DenseOperator, OperatorKind};

const MAGIC: &[u8; 4] = b"PTOP";
const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("bad magic bytes; not an operator dump")]
    BadMagic,
    #[error("unsupported format version {0}")]
    BadVersion(u32),
    #[error("unknown operator kind tag {0}")]
    BadKind(u8),
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn kind_tag(kind: OperatorKind) -> u8 {
    match kind {
        OperatorKind::SingleLayer => 0,
        OperatorKind::DoubleLayer => 1,
        OperatorKind::DoubleLayerAdjoint => 2,
        OperatorKind::SqrtSingleLayer => 3,
        OperatorKind::InvSqrtSingleLayer => 4,
        OperatorKind::Symmetrized => 5,
    }
}

fn tag_kind(tag: u8) -> Result<OperatorKind, DumpError> {
    Ok(match tag {
        0 => OperatorKind::SingleLayer,
        1 => OperatorKind::DoubleLayer,
        2 => OperatorKind::DoubleLayerAdjoint,
        3 => OperatorKind::SqrtSingleLayer,
        4 => OperatorKind::InvSqrtSingleLayer,
        5 => OperatorKind::Symmetrized,
        other => return Err(DumpError::BadKind(other)),
    })
}

pub fn write_operator<W: Write>(mut out: W, op: &DenseOperator) -> Result<(), DumpError> {
    out.write_all(MAGIC)?;
    out.write_all(&FORMAT_VERSION.to_le_bytes())?;
    out.write_all(&[kind_tag(op.kind)])?;
    out.write_all(&(op.n() as u32).to_le_bytes())?;
    for i in 0..op.n() {
        for j in 0..op.n() {
            out.write_all(&op.matrix[(i, j)].to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_operator<R: Read>(mut input: R) -> Result<(OperatorKind, DMatrix<f64>), DumpError> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(DumpError::BadMagic);
    }
    let mut word = [0u8; 4];
    input.read_exact(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != FORMAT_VERSION {
        return Err(DumpError::BadVersion(version));
    }
    let mut tag = [0u8; 1];
    input.read_exact(&mut tag)?;
    let kind = tag_kind(tag[0])?;
    input.read_exact(&mut word)?;
    let n = u32::from_le_bytes(word) as usize;
    let mut buf = [0u8; 8];
    let mut matrix = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            input.read_exact(&mut buf)?;
            matrix[(i, j)] = f64::from_le_bytes(buf);
        }
    }
    Ok((kind, matrix))
}
