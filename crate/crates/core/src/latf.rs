//! LATF: a minimal little-endian container for sets of latents.
//!
//! ```text
//! offset  size  field
//!      0     4  magic  b"LATF"
//!      4     4  version (u32) = 1
//!      8     4  dtype (u32): 1 = f32, 2 = f64
//!     12     4  channels C (u32)
//!     16     4  height H (u32)
//!     20     4  width W (u32)
//!     24     4  count (u32), number of latents
//!     28     …  count·C·H·W values, row-major (channel, row, col),
//!               latents concatenated
//! ```
//!
//! Every multi-byte field is little-endian. Files with trailing bytes after
//! the payload are rejected.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::latent::{Latent, LatentSet, LatentShape};

pub const MAGIC: [u8; 4] = *b"LATF";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 28;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F32,
    F64,
}

impl Dtype {
    pub fn code(self) -> u32 {
        match self {
            Dtype::F32 => 1,
            Dtype::F64 => 2,
        }
    }

    pub fn from_code(code: u32) -> Option<Self> {
        match code {
            1 => Some(Dtype::F32),
            2 => Some(Dtype::F64),
            _ => None,
        }
    }

    pub fn size(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 => 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatfHeader {
    pub dtype: Dtype,
    pub shape: LatentShape,
    pub count: u32,
}

impl LatfHeader {
    pub fn payload_len(&self) -> u64 {
        self.count as u64 * self.shape.len() as u64 * self.dtype.size() as u64
    }

    fn to_bytes(self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[..4].copy_from_slice(&MAGIC);
        let fields = [
            VERSION,
            self.dtype.code(),
            self.shape.channels() as u32,
            self.shape.height() as u32,
            self.shape.width() as u32,
            self.count,
        ];
        for (i, f) in fields.iter().enumerate() {
            out[4 + 4 * i..8 + 4 * i].copy_from_slice(&f.to_le_bytes());
        }
        out
    }
}

#[derive(Debug, Error)]
pub enum LatfError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    #[error("bad magic {found:?} at offset 0, expected \"LATF\"")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported version {found} at offset 4, expected {VERSION}")]
    UnsupportedVersion { found: u32 },

    #[error("unsupported dtype code {found} at offset 8")]
    UnsupportedDtype { found: u32 },

    #[error("header truncated: {found} of {HEADER_LEN} bytes")]
    TruncatedHeader { found: usize },

    #[error("zero dimension in header shape {channels}x{height}x{width}")]
    InvalidShape { channels: u32, height: u32, width: u32 },

    #[error("header declares zero latents")]
    EmptySet,

    #[error("payload truncated at byte offset {offset}: expected {expected} payload bytes, found {found}")]
    TruncatedPayload { offset: u64, expected: u64, found: u64 },

    #[error("trailing data after payload at byte offset {offset}")]
    TrailingData { offset: u64 },

    #[error("non-finite value at byte offset {offset}")]
    NonFiniteValue { offset: u64 },

    #[error("value {value} at latent {latent}, element {index} does not fit in the chosen dtype")]
    Unrepresentable { latent: usize, index: usize, value: f64 },

    #[error("shape {0} does not fit the 32-bit header fields")]
    ShapeTooLarge(String),
}

impl LatfError {
    pub fn name(&self) -> &'static str {
        match self {
            LatfError::Io(_) => "Io",
            LatfError::BadMagic { .. } => "BadMagic",
            LatfError::UnsupportedVersion { .. } => "UnsupportedVersion",
            LatfError::UnsupportedDtype { .. } => "UnsupportedDtype",
            LatfError::TruncatedHeader { .. } => "TruncatedHeader",
            LatfError::InvalidShape { .. } => "InvalidShape",
            LatfError::EmptySet => "EmptySet",
            LatfError::TruncatedPayload { .. } => "TruncatedPayload",
            LatfError::TrailingData { .. } => "TrailingData",
            LatfError::NonFiniteValue { .. } => "NonFiniteValue",
            LatfError::Unrepresentable { .. } => "Unrepresentable",
            LatfError::ShapeTooLarge(_) => "ShapeTooLarge",
        }
    }
}

/// Serializes `set` to `writer`.
pub fn write_set<W: Write>(mut writer: W, set: &LatentSet, dtype: Dtype) -> Result<(), LatfError> {
    let shape = set.shape();
    let fits = |v: usize| u32::try_from(v).is_ok();
    if !(fits(shape.channels()) && fits(shape.height()) && fits(shape.width())) {
        return Err(LatfError::ShapeTooLarge(shape.to_string()));
    }
    let count = u32::try_from(set.len()).map_err(|_| LatfError::ShapeTooLarge(shape.to_string()))?;

    // Validate everything before the first byte goes out.
    if dtype == Dtype::F32 {
        for (latent, z) in set.iter().enumerate() {
            if let Some((index, &value)) = z
                .as_slice()
                .iter()
                .enumerate()
                .find(|(_, v)| !(**v as f32).is_finite())
            {
                return Err(LatfError::Unrepresentable {
                    latent,
                    index,
                    value,
                });
            }
        }
    }

    writer.write_all(&LatfHeader { dtype, shape, count }.to_bytes())?;
    for z in set {
        match dtype {
            Dtype::F32 => {
                for v in z.as_slice() {
                    writer.write_all(&(*v as f32).to_le_bytes())?;
                }
            }
            Dtype::F64 => {
                for v in z.as_slice() {
                    writer.write_all(&v.to_le_bytes())?;
                }
            }
        }
    }
    writer.flush()?;
    Ok(())
}

/// Writes `set` to a file at `path`.
pub fn write_latents(path: impl AsRef<Path>, set: &LatentSet, dtype: Dtype) -> Result<(), LatfError> {
    let file = File::create(path)?;
    write_set(BufWriter::new(file), set, dtype)
}

fn read_full<R: Read>(reader: &mut R, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match reader.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

/// Parses and validates a header.
pub fn read_header<R: Read>(reader: &mut R) -> Result<LatfHeader, LatfError> {
    let mut buf = [0u8; HEADER_LEN];
    let found = read_full(reader, &mut buf)?;
    if found >= 4 && buf[..4] != MAGIC {
        return Err(LatfError::BadMagic {
            found: buf[..4].try_into().unwrap(),
        });
    }
    if found < HEADER_LEN {
        return Err(LatfError::TruncatedHeader { found });
    }
    let field = |i: usize| u32::from_le_bytes(buf[4 + 4 * i..8 + 4 * i].try_into().unwrap());
    let version = field(0);
    if version != VERSION {
        return Err(LatfError::UnsupportedVersion { found: version });
    }
    let code = field(1);
    let dtype = Dtype::from_code(code).ok_or(LatfError::UnsupportedDtype { found: code })?;
    let (channels, height, width) = (field(2), field(3), field(4));
    let shape = LatentShape::new(channels as usize, height as usize, width as usize).map_err(|_| {
        LatfError::InvalidShape {
            channels,
            height,
            width,
        }
    })?;
    let count = field(5);
    if count == 0 {
        return Err(LatfError::EmptySet);
    }
    Ok(LatfHeader { dtype, shape, count })
}

/// Parses a complete LATF stream.
pub fn read_set<R: Read>(mut reader: R) -> Result<LatentSet, LatfError> {
    let header = read_header(&mut reader)?;
    let shape = header.shape;
    let size = header.dtype.size();
    let expected = header.payload_len();
    let mut members = Vec::with_capacity(header.count as usize);
    let mut buf = vec![0u8; shape.len() * size];
    let mut consumed: u64 = 0;

    for _ in 0..header.count {
        let got = read_full(&mut reader, &mut buf)?;
        if got < buf.len() {
            return Err(LatfError::TruncatedPayload {
                offset: HEADER_LEN as u64 + consumed + got as u64,
                expected,
                found: consumed + got as u64,
            });
        }
        let mut data = Vec::with_capacity(shape.len());
        for (i, chunk) in buf.chunks_exact(size).enumerate() {
            let v = match header.dtype {
                Dtype::F32 => f32::from_le_bytes(chunk.try_into().unwrap()) as f64,
                Dtype::F64 => f64::from_le_bytes(chunk.try_into().unwrap()),
            };
            if !v.is_finite() {
                return Err(LatfError::NonFiniteValue {
                    offset: HEADER_LEN as u64 + consumed + (i * size) as u64,
                });
            }
            data.push(v);
        }
        consumed += buf.len() as u64;
        members.push(Latent::from_parts_unchecked(shape, data));
    }

    let mut probe = [0u8; 1];
    if read_full(&mut reader, &mut probe)? != 0 {
        return Err(LatfError::TrailingData {
            offset: HEADER_LEN as u64 + consumed,
        });
    }
    Ok(LatentSet::new(members).expect("non-empty and same shape by construction"))
}

/// Reads a LATF file.
pub fn read_latents(path: impl AsRef<Path>) -> Result<LatentSet, LatfError> {
    read_set(BufReader::new(File::open(path)?))
}
