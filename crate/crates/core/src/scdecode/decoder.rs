use std::collections::HashMap;
use std::sync::Arc;

use crate::circuit::GateList;
use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::scdecode::plan::{Kernel, Plan};
use crate::scdecode::simplify::Schedule;
use crate::scdecode::tensor::ProbTensor;

/// Result of one successive-cancellation pass.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub bits: BitVec,
    /// Unfrozen positions whose decision was a coin flip (equal posterior, or
    /// no consistent configuration at all).
    pub undetermined: Vec<usize>,
    /// Some contraction produced an all-zero tensor.
    pub contradiction: bool,
}

#[derive(Clone, Copy, Debug)]
struct Slot {
    stamp: u32,
    tensor: ProbTensor,
}

/// Successive-cancellation decoder with memoized intermediate tensors.
///
/// Positions are decided from `N` down to 1. A window tensor for a block is
/// computed once per codeword and reused by every later window that needs it.
#[derive(Clone, Debug)]
pub struct Decoder {
    plan: Arc<Plan>,
    n: u32,
    cache: Vec<Vec<Slot>>,
    /// `epoch << 1 | value` per (level, block line); stale when the epoch differs.
    tops: Vec<Vec<u32>>,
    epoch: u32,
    decided: Vec<bool>,
    priors: Vec<ProbTensor>,
    contradiction: bool,
    kernel_evals: u64,
}

impl Decoder {
    pub fn new(plan: Arc<Plan>) -> Decoder {
        let n = plan.n;
        let size = plan.size();
        let levels = n as usize + 1;
        Decoder {
            n,
            cache: vec![
                vec![
                    Slot {
                        stamp: 0,
                        tensor: ProbTensor::zeros(1)
                    };
                    size
                ];
                levels
            ],
            tops: vec![vec![0; size]; levels],
            epoch: 1,
            decided: vec![false; size],
            priors: vec![ProbTensor::uniform(1); size],
            contradiction: false,
            kernel_evals: 0,
            plan,
        }
    }

    pub fn for_circuit(circuit: &GateList) -> Decoder {
        Decoder::new(Arc::new(Plan::new(circuit.family, circuit.n)))
    }

    pub fn plan(&self) -> &Arc<Plan> {
        &self.plan
    }

    pub fn size(&self) -> usize {
        self.decided.len()
    }

    /// Kernel contractions performed since construction.
    pub fn kernel_evals(&self) -> u64 {
        self.kernel_evals
    }

    /// Starts a new codeword: clears caches and decisions.
    pub fn reset(&mut self) {
        self.epoch += 1;
        if self.epoch >= 1 << 31 {
            for level in &mut self.cache {
                level.iter_mut().for_each(|slot| slot.stamp = 0);
            }
            self.tops.iter_mut().for_each(|v| v.fill(0));
            self.epoch = 1;
        }
        self.decided.fill(false);
        self.contradiction = false;
    }

    /// Loads per-position channel posteriors and starts a new codeword.
    pub fn set_priors(&mut self, priors: &[ProbTensor]) -> Result<()> {
        if priors.len() != self.size() {
            return Err(Error::Dimension(format!(
                "{} priors for a code of length {}",
                priors.len(),
                self.size()
            )));
        }
        if let Some(p) = priors.iter().find(|p| p.arity() != 1) {
            return Err(Error::InvalidArgument(format!("prior of arity {} (expected 1)", p.arity())));
        }
        self.priors.copy_from_slice(priors);
        self.reset();
        Ok(())
    }

    /// Writes per-position `(P(0), P(1))` pairs and starts a new codeword.
    pub fn set_prior_pairs(&mut self, mut f: impl FnMut(usize) -> (f64, f64)) {
        for (j, p) in self.priors.iter_mut().enumerate() {
            let (p0, p1) = f(j);
            *p = ProbTensor::bit(p0, p1);
        }
        self.reset();
    }

    /// Fixes position `i` (1-based) for the remaining windows.
    pub fn set_decided(&mut self, i: usize, value: bool) {
        self.decided[i - 1] = value;
    }

    pub fn decided(&self) -> &[bool] {
        &self.decided
    }

    pub fn contradiction(&self) -> bool {
        self.contradiction
    }

    /// Posterior of the top-level window starting at `i`. All positions right
    /// of the window must already be decided.
    pub fn window_tensor(&mut self, i: usize) -> ProbTensor {
        if self.n == 0 {
            return self.priors[0].normalized();
        }
        let plan = Arc::clone(&self.plan);
        self.eval(&plan, self.n, 0, i)
    }

    /// `(P(x_i = 0), P(x_i = 1))` given the decided positions right of `i`,
    /// normalized; `None` when the evidence is contradictory.
    pub fn bit_posterior(&mut self, i: usize) -> Option<[f64; 2]> {
        let t = self.window_tensor(i);
        let len = t.arity();
        let mut rest = 0usize;
        for k in 1..len {
            rest |= (self.decided[i - 1 + k] as usize) << (k - 1);
        }
        let [p0, p1] = t.leftmost_given(rest);
        let s = p0 + p1;
        (s > 0.0).then(|| [p0 / s, p1 / s])
    }

    /// Full right-to-left pass. `frozen[j]` holds the value of frozen position
    /// `j + 1`; `tie` supplies the decision whenever the posterior is flat.
    pub fn decode(&mut self, frozen: &[Option<bool>], mut tie: impl FnMut() -> bool) -> DecodeOutcome {
        let size = self.size();
        assert_eq!(frozen.len(), size, "frozen map must cover every position");
        let mut undetermined = Vec::new();
        for i in (1..=size).rev() {
            let value = match frozen[i - 1] {
                Some(v) => v,
                None => match self.bit_posterior(i) {
                    Some([p0, p1]) if (p0 - p1).abs() > 1e-12 => p1 > p0,
                    Some(_) => {
                        undetermined.push(i);
                        tie()
                    }
                    None => {
                        self.contradiction = true;
                        undetermined.push(i);
                        tie()
                    }
                },
            };
            self.decided[i - 1] = value;
        }
        DecodeOutcome {
            bits: BitVec::from_bools(self.decided.clone()),
            undetermined,
            contradiction: self.contradiction,
        }
    }

    /// Genie-aided sweep: for every position, the posterior probability that
    /// it differs from `truth` given the true values of all positions right of
    /// it. Returns one value per position (1-based order).
    pub fn genie_error_probs(&mut self, truth: &[bool]) -> Vec<f64> {
        let size = self.size();
        let mut out = vec![0.0; size];
        for i in (1..=size).rev() {
            out[i - 1] = match self.bit_posterior(i) {
                Some(p) => p[!truth[i - 1] as usize],
                None => 1.0,
            };
            self.decided[i - 1] = truth[i - 1];
        }
        out
    }

    fn eval(&mut self, plan: &Plan, level: u32, offset: usize, s: usize) -> ProbTensor {
        if level == 0 {
            return self.priors[offset];
        }
        let m = 1usize << level;
        let idx = offset * m + s - 1;
        let l = level as usize;
        let slot = &self.cache[l][idx];
        if slot.stamp == self.epoch {
            return slot.tensor;
        }
        let k = plan.kernel(level, s);
        let half = 1usize << (self.n - level);
        let cs = k.child.0;
        let a = self.eval(plan, level - 1, offset, cs);
        let b = self.eval(plan, level - 1, offset + half, cs);
        let (mut af, mut bf) = (0u8, 0u8);
        for f in &k.known {
            if self.top_value(plan, level, offset, f.q as usize) {
                af ^= f.a;
                bf ^= f.b;
            }
        }
        let mut t = k.apply(&a, &b, af, bf);
        self.kernel_evals += 1;
        if !t.normalize() {
            self.contradiction = true;
            t = ProbTensor::uniform(k.len);
        }
        self.cache[l][idx] = Slot {
            stamp: self.epoch,
            tensor: t,
        };
        t
    }

    /// Value of top line `q` of block `(level, offset)`, derived from decided
    /// positions. Only meaningful for tops fixed by those decisions.
    fn top_value(&mut self, plan: &Plan, level: u32, offset: usize, q: usize) -> bool {
        if level == self.n {
            return self.decided[q - 1];
        }
        let m = 1usize << level;
        let idx = offset * m + q - 1;
        let l = level as usize;
        let entry = self.tops[l][idx];
        if entry >> 1 == self.epoch {
            return entry & 1 == 1;
        }
        let half = 1usize << (self.n - level - 1);
        let (po, p) = if offset < half {
            (offset, 2 * q - 1)
        } else {
            (offset - half, 2 * q)
        };
        let mut v = false;
        for t in plan.expr(level + 1, p).tops() {
            v ^= self.top_value(plan, level + 1, po, t);
        }
        self.tops[l][idx] = self.epoch << 1 | v as u32;
        v
    }
}

/// Joint posterior of a schedule's window, evaluated step by step. `known`
/// supplies the positions right of the window; everything else is ignored.
pub fn decode_bit_marginal(schedule: &Schedule, priors: &[ProbTensor], known: &BitVec) -> Result<ProbTensor> {
    let size = 1usize << schedule.n;
    if priors.len() != size || known.len() != size {
        return Err(Error::Dimension(format!(
            "schedule for {size} positions got {} priors and {} known bits",
            priors.len(),
            known.len()
        )));
    }
    if schedule.n == 0 {
        return Ok(priors[0].normalized());
    }
    let (start, len) = schedule.window;
    // line values entering each level, with unknown positions set to 0
    let mut lines: Vec<Vec<bool>> = vec![Vec::new(); schedule.n as usize + 1];
    let mut cur: Vec<bool> = (1..=size).map(|p| p >= start + len && known.get(p - 1)).collect();
    for level in (1..=schedule.n).rev() {
        lines[level as usize] = cur.clone();
        let m = 1usize << level;
        let stride = size / m;
        let mut next = vec![false; size];
        for offset in 0..stride {
            for p in 1..=m {
                let e = crate::scdecode::plan::bottom_expr(schedule.family, m, p);
                let v = e.tops().fold(false, |acc, q| acc ^ cur[offset + (q - 1) * stride]);
                next[offset + (p - 1) * stride] = v;
            }
        }
        cur = next;
    }

    let mut results: HashMap<(u32, usize), ProbTensor> = HashMap::new();
    for step in &schedule.steps {
        let m = 1usize << step.level;
        let k = Kernel::compile(schedule.family, m, step.start);
        let half = size >> step.level;
        let child = |off: usize| -> Result<ProbTensor> {
            if step.level == 1 {
                Ok(priors[off])
            } else {
                results
                    .get(&(step.level - 1, off))
                    .copied()
                    .ok_or_else(|| Error::InvalidArgument("schedule step before its children".into()))
            }
        };
        let a = child(step.offset)?;
        let b = child(step.offset + half)?;
        if a.arity() != k.child.1 || b.arity() != k.child.1 {
            return Err(Error::Dimension("schedule and priors disagree on tensor arity".into()));
        }
        let stride = size / m;
        let (af, bf) = k.flips(|q| lines[step.level as usize][step.offset + (q - 1) * stride]);
        let mut t = k.apply(&a, &b, af, bf);
        if !t.normalize() {
            return Err(Error::Contradiction { position: start });
        }
        results.insert((step.level, step.offset), t);
    }
    results
        .remove(&(schedule.n, 0))
        .ok_or_else(|| Error::InvalidArgument("schedule has no top-level step".into()))
}

/// Decodes every position of `circuit` from per-position priors. Frozen
/// positions (1-based) take their given values; flat posteriors decode to 0.
pub fn sc_decode(circuit: &GateList, priors: &[ProbTensor], frozen: &[(usize, bool)]) -> Result<BitVec> {
    let mut dec = Decoder::for_circuit(circuit);
    dec.set_priors(priors)?;
    let map = frozen_map(circuit.len(), frozen)?;
    let out = dec.decode(&map, || false);
    if out.contradiction {
        let position = out.undetermined.last().copied().unwrap_or(1);
        return Err(Error::Contradiction { position });
    }
    Ok(out.bits)
}

/// Expands a frozen list into a per-position map.
pub fn frozen_map(size: usize, frozen: &[(usize, bool)]) -> Result<Vec<Option<bool>>> {
    let mut map = vec![None; size];
    for &(p, v) in frozen {
        if !(1..=size).contains(&p) {
            return Err(Error::InvalidArgument(format!("frozen position {p} outside 1..={size}")));
        }
        map[p - 1] = Some(v);
    }
    Ok(map)
}
