//! Binary probability tensors.
//!
//! ```text
//! offset  size  field
//! 0       8     magic  b"DIALPST\0"
//! 8       8     version (u64 LE, currently 1)
//! 16      8     point_count (u64 LE)
//! 24      8     pass_count (u64 LE)
//! 32      8     class_count (u64 LE)
//! 40      4·P·N·C  f32 LE, [point][pass][class]
//! ```

use std::path::Path;

use dial_core::uncertainty::UncertaintyError;
use dial_core::PassStack;
use thiserror::Error;

pub const MAGIC: [u8; 8] = *b"DIALPST\0";
pub const VERSION: u64 = 1;
const HEADER_LEN: usize = 40;

/// Float32 payloads are checked against the simplex this loosely.
pub const TENSOR_SIMPLEX_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Error)]
pub enum TensorError {
    #[error("not a probability tensor (bad magic)")]
    Magic,
    #[error("unsupported tensor version {0}")]
    Version(u64),
    #[error("tensor is {actual} bytes, header promises {expected}")]
    Length { expected: u64, actual: u64 },
    #[error("tensor dimensions overflow")]
    Overflow,
    #[error("point {point}: {source}")]
    Simplex { point: usize, source: UncertaintyError },
    #[error(transparent)]
    Shape(UncertaintyError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Raw tensor contents, exactly as stored.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTensor {
    pub points: usize,
    pub passes: usize,
    pub classes: usize,
    pub data: Vec<f32>,
}

impl ProbabilityTensor {
    pub fn from_stack(stack: &PassStack) -> Self {
        ProbabilityTensor {
            points: stack.points(),
            passes: stack.passes(),
            classes: stack.classes(),
            data: stack.data().iter().map(|&v| v as f32).collect(),
        }
    }

    /// Validates the payload and widens it to a [`PassStack`].
    pub fn to_stack(&self) -> Result<PassStack, TensorError> {
        let data = self.data.iter().map(|&v| f64::from(v)).collect();
        PassStack::with_tolerance(self.points, self.passes, self.classes, data, TENSOR_SIMPLEX_TOLERANCE).map_err(|e| match e {
            UncertaintyError::OutOfRange { point, .. } | UncertaintyError::NotNormalized { point, .. } => {
                TensorError::Simplex { point, source: e }
            }
            other => TensorError::Shape(other),
        })
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 4 * self.data.len());
        out.extend_from_slice(&MAGIC);
        for v in [VERSION, self.points as u64, self.passes as u64, self.classes as u64] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    /// Parses the layout without checking the simplex.
    pub fn decode(bytes: &[u8]) -> Result<Self, TensorError> {
        if bytes.len() < HEADER_LEN {
            if bytes.len() < 8 || bytes[..8] != MAGIC {
                return Err(TensorError::Magic);
            }
            return Err(TensorError::Length { expected: HEADER_LEN as u64, actual: bytes.len() as u64 });
        }
        if bytes[..8] != MAGIC {
            return Err(TensorError::Magic);
        }
        let word = |k: usize| u64::from_le_bytes(bytes[8 * k..8 * k + 8].try_into().unwrap());
        if word(1) != VERSION {
            return Err(TensorError::Version(word(1)));
        }
        let (points, passes, classes) = (word(2), word(3), word(4));
        let count = points.checked_mul(passes).and_then(|v| v.checked_mul(classes)).ok_or(TensorError::Overflow)?;
        let expected = count.checked_mul(4).and_then(|v| v.checked_add(HEADER_LEN as u64)).ok_or(TensorError::Overflow)?;
        if bytes.len() as u64 != expected {
            return Err(TensorError::Length { expected, actual: bytes.len() as u64 });
        }
        let data = bytes[HEADER_LEN..].chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
        let size = |v: u64| usize::try_from(v).map_err(|_| TensorError::Overflow);
        Ok(ProbabilityTensor { points: size(points)?, passes: size(passes)?, classes: size(classes)?, data })
    }
}

pub fn read_probability_tensor(path: &Path) -> Result<PassStack, TensorError> {
    ProbabilityTensor::decode(&std::fs::read(path)?)?.to_stack()
}

pub fn write_probability_tensor(path: &Path, stack: &PassStack) -> Result<(), TensorError> {
    std::fs::write(path, ProbabilityTensor::from_stack(stack).encode())?;
    Ok(())
}
