//! Encoding circuits for Polar and convolutional Polar codes.
//!
//! A size-`2^n` circuit is one layer of CNOT gates followed by two interleaved
//! size-`2^(n-1)` circuits: the first sub-circuit owns the odd bit-lines, the
//! second the even ones. For the convolutional family the layer is two rows of
//! gates. Seen from the logical input, row A connects `2i -> 2i+1` (plus the
//! wrap-around gate `M -> 1` when periodic) and row B connects `2i-1 -> 2i`.
//! The Polar layer is row B alone.
//!
//! Codewords are row vectors: `x = u . G`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::{BitVec, Gf2Matrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeKind {
    Polar,
    #[serde(rename = "conv")]
    ConvPolar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Open,
    Periodic,
}

/// Code family. The boundary flag only matters for [`CodeKind::ConvPolar`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CodeFamily {
    #[serde(rename = "family")]
    pub kind: CodeKind,
    pub boundary: Boundary,
}

impl CodeFamily {
    pub const POLAR: CodeFamily = CodeFamily {
        kind: CodeKind::Polar,
        boundary: Boundary::Open,
    };
    pub const CONV_OPEN: CodeFamily = CodeFamily {
        kind: CodeKind::ConvPolar,
        boundary: Boundary::Open,
    };
    pub const CONV_PERIODIC: CodeFamily = CodeFamily {
        kind: CodeKind::ConvPolar,
        boundary: Boundary::Periodic,
    };

    pub fn is_conv(&self) -> bool {
        self.kind == CodeKind::ConvPolar
    }

    /// True when wrap-around gates are present.
    pub fn is_periodic(&self) -> bool {
        self.is_conv() && self.boundary == Boundary::Periodic
    }

    /// Canonical form: Polar codes always report an open boundary.
    pub fn normalized(self) -> Self {
        if self.is_conv() {
            self
        } else {
            CodeFamily::POLAR
        }
    }
}

impl fmt::Display for CodeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.kind, self.boundary) {
            (CodeKind::Polar, _) => f.write_str("polar"),
            (CodeKind::ConvPolar, Boundary::Open) => f.write_str("conv-open"),
            (CodeKind::ConvPolar, Boundary::Periodic) => f.write_str("conv-periodic"),
        }
    }
}

impl FromStr for CodeFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "polar" => Ok(CodeFamily::POLAR),
            "conv" | "convpolar" | "conv-open" | "open" => Ok(CodeFamily::CONV_OPEN),
            "conv-periodic" | "periodic" => Ok(CodeFamily::CONV_PERIODIC),
            other => Err(Error::Parse(format!(
                "unknown code family {other:?} (expected polar, conv, conv-open or conv-periodic)"
            ))),
        }
    }
}

/// A CNOT gate on 1-based bit-lines: `target ^= control`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Gate {
    /// Recursion level, `n` for the outermost layer down to 1.
    pub level: u32,
    pub control: usize,
    pub target: usize,
}

/// The gates of a circuit in application order, from logical input toward
/// the codeword.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateList {
    #[serde(flatten)]
    pub family: CodeFamily,
    pub n: u32,
    pub gates: Vec<Gate>,
}

impl GateList {
    /// Number of bit-lines, `2^n`.
    pub fn len(&self) -> usize {
        1usize << self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn gates_at_level(&self, level: u32) -> impl Iterator<Item = &Gate> {
        self.gates.iter().filter(move |g| g.level == level)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Gate count of `build_circuit(family, n)`.
pub fn expected_gate_count(family: CodeFamily, n: u32) -> usize {
    let big_n = 1usize << n;
    let nlog = big_n * n as usize;
    match (family.kind, family.boundary) {
        (CodeKind::Polar, _) => nlog / 2,
        (CodeKind::ConvPolar, Boundary::Periodic) => nlog,
        // each of the N-1 blocks loses its wrap-around gate
        (CodeKind::ConvPolar, Boundary::Open) => nlog - (big_n - 1),
    }
}

/// Local gates `(control, target)` of one layer of a size-`m` block, in order.
pub fn layer_gates(family: CodeFamily, m: usize) -> Vec<(usize, usize)> {
    let mut gates = Vec::with_capacity(m);
    if family.is_conv() {
        for j in 1..m / 2 {
            gates.push((2 * j, 2 * j + 1));
        }
        if family.is_periodic() && m >= 2 {
            gates.push((m, 1));
        }
    }
    for j in 1..=m / 2 {
        gates.push((2 * j - 1, 2 * j));
    }
    gates
}

/// Builds the size-`2^n` circuit of a family.
pub fn build_circuit(family: CodeFamily, n: u32) -> GateList {
    let family = family.normalized();
    let big_n = 1usize << n;
    let mut gates = Vec::with_capacity(expected_gate_count(family, n));
    for level in (1..=n).rev() {
        let m = 1usize << level;
        let stride = big_n / m;
        let local = layer_gates(family, m);
        for offset in 0..stride {
            let line = |q: usize| offset + (q - 1) * stride + 1;
            gates.extend(local.iter().map(|&(c, t)| Gate {
                level,
                control: line(c),
                target: line(t),
            }));
        }
    }
    GateList { family, n, gates }
}

/// Applies the circuit to `input` gate by gate.
pub fn encode(circuit: &GateList, input: &BitVec) -> Result<BitVec> {
    if input.len() != circuit.len() {
        return Err(Error::Dimension(format!(
            "input has {} bits, circuit has {} lines",
            input.len(),
            circuit.len()
        )));
    }
    let mut x = input.clone();
    let bits = x.as_mut_slice();
    for g in &circuit.gates {
        bits[g.target - 1] ^= bits[g.control - 1];
    }
    Ok(x)
}

/// The `N x N` matrix `G` with `encode(u) = u . G`.
pub fn encoding_matrix(circuit: &GateList) -> Gf2Matrix {
    gates_matrix(circuit.len(), circuit.gates.iter().map(|g| (g.control, g.target)))
}

/// Matrix of the outermost layer alone, as applied by the circuit.
pub fn layer_matrix(family: CodeFamily, n: u32) -> Gf2Matrix {
    gates_matrix(1 << n, layer_gates(family.normalized(), 1 << n).into_iter())
}

fn gates_matrix(size: usize, gates: impl Iterator<Item = (usize, usize)>) -> Gf2Matrix {
    // Column t of G gains column c; track the transpose so that is a row add.
    let mut gt = Gf2Matrix::identity(size);
    for (c, t) in gates {
        gt.add_row(c - 1, t - 1);
    }
    gt.transpose()
}
