//! Gate elimination for a single decoding window.
//!
//! Three circuit identities remove most gates: a uniform target swallows the
//! gate, a known control turns it into a constant shift, and a known pair is
//! simply recomputed. What survives is the network actually contracted.

use serde::{Deserialize, Serialize};

use crate::circuit::{CodeFamily, Gate, GateList};
use crate::error::{Error, Result};
use crate::scdecode::plan::{child_window, window_len, KernelKind, Kernel};

/// What is known about a bit-line while walking the circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineState {
    /// Uniformly random and independent of everything else.
    Uniform,
    /// A fixed, known value.
    Known(bool),
    /// Anything else: carries window information.
    Open,
}

/// Applies one of the elimination identities to a CNOT with the given input
/// states, returning the output states. Fails with [`Error::GateRemains`] when
/// the gate has to stay in the network.
pub fn apply_identity(control: LineState, target: LineState) -> Result<(LineState, LineState)> {
    use LineState::*;
    match (control, target) {
        (Known(c), Known(t)) => Ok((Known(c), Known(c ^ t))),
        (c, Uniform) => Ok((c, Uniform)),
        (Known(c), t) => Ok((Known(c), t)),
        _ => Err(Error::GateRemains),
    }
}

/// One kernel application in a bottom-up contraction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    pub level: u32,
    pub offset: usize,
    pub start: usize,
    pub len: usize,
    pub kind: KernelKind,
}

/// The reduced network for one window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub family: CodeFamily,
    pub n: u32,
    /// 1-based start and length of the decoded window.
    pub window: (usize, usize),
    /// Gates left after elimination, in circuit order.
    pub remaining: Vec<Gate>,
    /// Kernel applications, children before parents; the last one produces
    /// the window tensor.
    pub steps: Vec<Step>,
}

impl Schedule {
    pub fn remaining_gates(&self) -> usize {
        self.remaining.len()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Reduces `circuit` for decoding the window starting at `start`. Lines right
/// of the window carry the values in `known`; lines left of it are uniform.
pub fn simplify(circuit: &GateList, start: usize, known: &crate::gf2::BitVec) -> Result<Schedule> {
    let size = circuit.len();
    if !(1..=size).contains(&start) {
        return Err(Error::InvalidArgument(format!("window start {start} outside 1..={size}")));
    }
    if known.len() != size {
        return Err(Error::Dimension(format!("known vector has {} bits, code has {size}", known.len())));
    }
    let len = if circuit.n == 0 {
        1
    } else {
        window_len(circuit.family, size, start)
    };

    let mut state: Vec<LineState> = (1..=size)
        .map(|p| {
            if p < start {
                LineState::Uniform
            } else if p < start + len {
                LineState::Open
            } else {
                LineState::Known(known.get(p - 1))
            }
        })
        .collect();

    let mut remaining = Vec::new();
    for g in &circuit.gates {
        let (c, t) = (state[g.control - 1], state[g.target - 1]);
        match apply_identity(c, t) {
            Ok((c2, t2)) => {
                state[g.control - 1] = c2;
                state[g.target - 1] = t2;
            }
            Err(_) => {
                remaining.push(*g);
                // a surviving gate ties the target to the window; an unknown
                // control becomes correlated with it as well
                state[g.target - 1] = LineState::Open;
                if c == LineState::Uniform {
                    state[g.control - 1] = LineState::Open;
                }
            }
        }
    }

    let mut steps = Vec::new();
    if circuit.n > 0 {
        collect_steps(circuit.family, circuit.n, circuit.n, 0, start, &mut steps);
    }
    Ok(Schedule {
        family: circuit.family,
        n: circuit.n,
        window: (start, len),
        remaining,
        steps,
    })
}

fn collect_steps(family: CodeFamily, n: u32, level: u32, offset: usize, start: usize, out: &mut Vec<Step>) {
    let m = 1usize << level;
    let (cs, _) = child_window(family, m, start);
    if level > 1 {
        let half = 1usize << (n - level);
        collect_steps(family, n, level - 1, offset, cs, out);
        collect_steps(family, n, level - 1, offset + half, cs, out);
    }
    out.push(Step {
        level,
        offset,
        start,
        len: window_len(family, m, start),
        kind: Kernel::compile(family, m, start).kind,
    });
}
