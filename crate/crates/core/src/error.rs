use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("resolution mismatch: {left} vs {right}")]
    ResolutionMismatch { left: u32, right: u32 },

    #[error("index {index} out of range for resolution {resolution} (must be < 2^{resolution})")]
    IndexOutOfRange { index: usize, resolution: u32 },

    #[error("mask position {position} out of range 1..={resolution}")]
    MaskOutOfRange { position: u32, resolution: u32 },

    #[error("resolution {0} unsupported (expected 1..={max})", max = crate::MAX_RESOLUTION)]
    InvalidResolution(u32),

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("expected length {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_resolution(n: u32) -> Result<()> {
    if n == 0 || n > crate::MAX_RESOLUTION {
        Err(Error::InvalidResolution(n))
    } else {
        Ok(())
    }
}

pub(crate) fn check_same(left: u32, right: u32) -> Result<()> {
    if left == right {
        Ok(())
    } else {
        Err(Error::ResolutionMismatch { left, right })
    }
}
