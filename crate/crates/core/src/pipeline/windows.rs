use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub input_len: usize,
    /// Trailing part of the input handed to the decoder as a start token.
    pub label_len: usize,
    pub horizon: usize,
    pub stride: usize,
}

impl Default for WindowSpec {
    fn default() -> Self {
        WindowSpec {
            input_len: 96,
            label_len: 48,
            horizon: 96,
            stride: 1,
        }
    }
}

impl WindowSpec {
    pub fn validate(&self) -> Result<()> {
        if self.input_len == 0 {
            return Err(Error::invalid("input-len", "must be > 0"));
        }
        if self.horizon == 0 {
            return Err(Error::invalid("horizon", "must be > 0"));
        }
        if self.label_len > self.input_len {
            return Err(Error::invalid(
                "label-len",
                format!(
                    "must not exceed input length {}, got {}",
                    self.input_len, self.label_len
                ),
            ));
        }
        if self.stride == 0 {
            return Err(Error::invalid("stride", "must be >= 1"));
        }
        Ok(())
    }

    /// Rows covered by one window.
    pub fn span(&self) -> usize {
        self.input_len + self.horizon
    }

    /// Number of windows that fit in `rows` rows (0 when the series is too
    /// short).
    pub fn count(&self, rows: usize) -> usize {
        if rows < self.span() {
            0
        } else {
            (rows - self.span()) / self.stride + 1
        }
    }
}

/// Row ranges of one window, absolute within the source matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: usize,
    pub input: Range<usize>,
    pub label: Range<usize>,
    pub target: Range<usize>,
}

pub fn make_windows(rows: usize, spec: &WindowSpec) -> Result<Vec<Window>> {
    spec.validate()?;
    if rows < spec.span() {
        return Err(Error::invalid(
            "rows",
            format!(
                "need at least input-len + horizon = {} rows, got {rows}",
                spec.span()
            ),
        ));
    }
    Ok((0..spec.count(rows))
        .map(|i| {
            let start = i * spec.stride;
            let split = start + spec.input_len;
            Window {
                start,
                input: start..split,
                label: split - spec.label_len..split,
                target: split..split + spec.horizon,
            }
        })
        .collect())
}
