//! GSDT binary tensor container.
//!
//! ```text
//! offset  size       field
//! 0       4          magic "GSDT"
//! 4       2          version (u16 LE), currently 1
//! 6       1          dtype code: 1 = u8, 2 = i32, 3 = f32, 4 = f64
//! 7       1          ndim
//! 8       8 * ndim   extents (u64 LE), outermost first
//! ..      count * sz payload, row-major, little-endian
//! ```

use std::fs;
use std::io::Read;
use std::path::Path;

use crate::error::{Error, Result};
use crate::raster::{DType, Tensor, TensorData};

pub const MAGIC: [u8; 4] = *b"GSDT";
pub const VERSION: u16 = 1;
const FIXED_HEADER: usize = 8;

pub fn dtype_code(dtype: DType) -> u8 {
    match dtype {
        DType::U8 => 1,
        DType::I32 => 2,
        DType::F32 => 3,
        DType::F64 => 4,
    }
}

pub fn dtype_from_code(code: u8) -> Result<DType> {
    match code {
        1 => Ok(DType::U8),
        2 => Ok(DType::I32),
        3 => Ok(DType::F32),
        4 => Ok(DType::F64),
        other => Err(Error::UnsupportedDtype(other)),
    }
}

pub fn encode(tensor: &Tensor) -> Result<Vec<u8>> {
    let ndim = u8::try_from(tensor.ndim())
        .map_err(|_| Error::Shape(format!("{} dimensions exceed 255", tensor.ndim())))?;
    let mut out = Vec::with_capacity(
        FIXED_HEADER + 8 * tensor.ndim() + tensor.len() * tensor.dtype().size(),
    );
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(dtype_code(tensor.dtype()));
    out.push(ndim);
    for &extent in tensor.shape() {
        out.extend_from_slice(&(extent as u64).to_le_bytes());
    }
    match tensor.data() {
        TensorData::U8(v) => out.extend_from_slice(v),
        TensorData::I32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        TensorData::F32(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
        TensorData::F64(v) => v.iter().for_each(|x| out.extend_from_slice(&x.to_le_bytes())),
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<Tensor> {
    if bytes.len() < 4 {
        return Err(Error::Truncated {
            expected: FIXED_HEADER,
            found: bytes.len(),
        });
    }
    let magic: [u8; 4] = bytes[..4].try_into().unwrap();
    if magic != MAGIC {
        return Err(Error::BadMagic(magic));
    }
    if bytes.len() < FIXED_HEADER {
        return Err(Error::Truncated {
            expected: FIXED_HEADER,
            found: bytes.len(),
        });
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let dtype = dtype_from_code(bytes[6])?;
    let ndim = bytes[7] as usize;
    let header_len = FIXED_HEADER + 8 * ndim;
    if bytes.len() < header_len {
        return Err(Error::Truncated {
            expected: header_len,
            found: bytes.len(),
        });
    }
    let mut shape = Vec::with_capacity(ndim);
    let mut count: usize = 1;
    for chunk in bytes[FIXED_HEADER..header_len].chunks_exact(8) {
        let extent = usize::try_from(u64::from_le_bytes(chunk.try_into().unwrap()))
            .map_err(|_| Error::Shape("extent exceeds address space".into()))?;
        count = count
            .checked_mul(extent)
            .ok_or_else(|| Error::Shape("element count overflows".into()))?;
        shape.push(extent);
    }
    let payload_len = count
        .checked_mul(dtype.size())
        .ok_or_else(|| Error::Shape("payload size overflows".into()))?;
    let payload = &bytes[header_len..];
    if payload.len() < payload_len {
        return Err(Error::Truncated {
            expected: header_len + payload_len,
            found: bytes.len(),
        });
    }
    if payload.len() > payload_len {
        return Err(Error::TrailingBytes(payload.len() - payload_len));
    }
    let data = match dtype {
        DType::U8 => TensorData::U8(payload.to_vec()),
        DType::I32 => TensorData::I32(
            payload
                .chunks_exact(4)
                .map(|c| i32::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        ),
        DType::F32 => TensorData::F32(
            payload
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        ),
        DType::F64 => TensorData::F64(
            payload
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                .collect(),
        ),
    };
    Tensor::new(shape, data)
}

pub fn read_tensor(path: &Path) -> Result<Tensor> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

pub fn write_tensor(path: &Path, tensor: &Tensor) -> Result<()> {
    let bytes = encode(tensor)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

/// Sniffs the first four bytes for the container magic.
pub fn is_container(path: &Path) -> Result<bool> {
    let mut file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut magic = [0u8; 4];
    match file.read_exact(&mut magic) {
        Ok(()) => Ok(magic == MAGIC),
        Err(e) if e.kind() == std::io::ErrorKind::UnexpectedEof => Ok(false),
        Err(e) => Err(Error::io(path, e)),
    }
}
