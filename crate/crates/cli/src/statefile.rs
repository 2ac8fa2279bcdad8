//! On-disk density-operator format: versioned JSON with labelled register
//! dimensions and row-major `[re, im]` entries.

use entcert_core::{ComplexMatrix, DensityOperator, Register};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub const STATE_FILE_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct RegisterSpec {
    pub label: String,
    pub dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StateFile {
    pub version: u32,
    pub registers: Vec<RegisterSpec>,
    /// Row-major matrix entries as `[re, im]` pairs.
    pub entries: Vec<[f64; 2]>,
}

impl StateFile {
    pub fn from_state(state: &DensityOperator) -> StateFile {
        StateFile {
            version: STATE_FILE_VERSION,
            registers: state
                .registers()
                .iter()
                .map(|r| RegisterSpec {
                    label: r.party.as_str().to_string(),
                    dim: r.dim,
                })
                .collect(),
            entries: state
                .matrix()
                .entries
                .iter()
                .map(|z| [z.re, z.im])
                .collect(),
        }
    }

    /// Validates the file against every density-operator invariant and
    /// returns the state; errors name the offending field.
    pub fn into_state(self) -> Result<DensityOperator, String> {
        if self.version != STATE_FILE_VERSION {
            return Err(format!(
                "version: expected {}, found {}",
                STATE_FILE_VERSION, self.version
            ));
        }
        if self.registers.is_empty() {
            return Err("registers: at least one register is required".to_string());
        }
        let dim: usize = self.registers.iter().map(|r| r.dim).product();
        if self.entries.len() != dim * dim {
            return Err(format!(
                "entries: expected {} values for a {}x{} matrix, found {}",
                dim * dim,
                dim,
                dim,
                self.entries.len()
            ));
        }
        let entries = self
            .entries
            .iter()
            .map(|&[re, im]| Complex64::new(re, im))
            .collect();
        let matrix = ComplexMatrix::new(dim, dim, entries).map_err(|e| e.to_string())?;
        let registers = self
            .registers
            .into_iter()
            .map(|r| Register::new(r.label.as_str(), r.dim))
            .collect();
        DensityOperator::new(matrix, registers).map_err(|e| format!("matrix: {}", e))
    }
}

/// Parses the JSON text; parse errors carry serde's line and column.
pub fn parse_state_file(text: &str) -> Result<DensityOperator, String> {
    let file: StateFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
    file.into_state()
}

pub fn render_state_file(state: &DensityOperator) -> String {
    let mut out = serde_json::to_string_pretty(&StateFile::from_state(state))
        .expect("state file serializes");
    out.push('\n');
    out
}
