use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::Channel;
use crate::circuit::{build_circuit, CodeFamily, GateList};
use crate::erasure_exact::{best_positions, complement, first_error_probs};
use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::scdecode::Decoder;

/// Default number of channel draws for the bit-flip heuristic.
pub const DEFAULT_SAMPLES: usize = 128;

/// How a frozen set was chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Construction {
    /// Exact first-error probabilities on the erasure channel.
    ErasureExact { eps: f64 },
    /// Genie-aided error probabilities on a bit-flip channel.
    BitflipHeuristic { p: f64, samples: usize, seed: u64 },
}

/// A concrete code: circuit family and size, data/frozen split, and how the
/// split was obtained. Frozen positions carry the value 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeSpec {
    #[serde(flatten)]
    pub family: CodeFamily,
    pub n: u32,
    pub k: usize,
    /// Frozen positions, 1-based and sorted.
    pub frozen: Vec<usize>,
    pub construction: Construction,
}

impl CodeSpec {
    /// Builds a spec from an explicit frozen set, checking its invariants.
    pub fn new(family: CodeFamily, n: u32, frozen: Vec<usize>, construction: Construction) -> Result<CodeSpec> {
        let size = 1usize << n;
        let k = size.checked_sub(frozen.len()).ok_or_else(|| {
            Error::InvalidArgument(format!("{} frozen positions in a code of length {size}", frozen.len()))
        })?;
        let spec = CodeSpec {
            family: family.normalized(),
            n,
            k,
            frozen,
            construction,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Constructs the rate-`k/N` code suited to `channel`: exact erasure
    /// analysis on the erasure channel, the bit-flip heuristic otherwise
    /// (with the hard-decision flip probability for the Gaussian channel).
    pub fn for_channel(family: CodeFamily, n: u32, k: usize, channel: &Channel, samples: usize, seed: u64) -> Result<CodeSpec> {
        channel.validate()?;
        let circuit = build_circuit(family, n);
        let (frozen, construction) = match channel.equivalent_flip() {
            None => {
                let Channel::Bec { eps } = *channel else { unreachable!() };
                (select_frozen_erasure_exact(&circuit, eps, k)?, Construction::ErasureExact { eps })
            }
            Some(p) => (
                select_frozen_bitflip(&circuit, p, k, samples, seed)?,
                Construction::BitflipHeuristic { p, samples, seed },
            ),
        };
        CodeSpec::new(family, n, frozen, construction)
    }

    pub fn size(&self) -> usize {
        1usize << self.n
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.size() as f64
    }

    pub fn circuit(&self) -> GateList {
        build_circuit(self.family, self.n)
    }

    /// Data positions, 1-based and sorted.
    pub fn data_positions(&self) -> Vec<usize> {
        complement(self.size(), &self.frozen)
    }

    /// Per-position frozen values for [`Decoder::decode`].
    pub fn frozen_map(&self) -> Vec<Option<bool>> {
        let mut map = vec![None; self.size()];
        for &j in &self.frozen {
            map[j - 1] = Some(false);
        }
        map
    }

    /// Places `data` on the data positions, zeros elsewhere.
    pub fn embed(&self, data: &BitVec) -> Result<BitVec> {
        if data.len() != self.k {
            return Err(Error::Dimension(format!("{} data bits for k = {}", data.len(), self.k)));
        }
        let mut u = BitVec::zeros(self.size());
        for (bit, j) in data.iter().zip(self.data_positions()) {
            u.set(j - 1, bit);
        }
        Ok(u)
    }

    /// Reads the data positions out of a full input vector.
    pub fn extract(&self, u: &BitVec) -> BitVec {
        BitVec::from_bools(self.data_positions().into_iter().map(|j| u.get(j - 1)).collect())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n > 24 {
            return Err(Error::InvalidArgument(format!("n = {} is too large", self.n)));
        }
        let size = self.size();
        if self.k + self.frozen.len() != size {
            return Err(Error::InvalidArgument(format!(
                "k = {} with {} frozen positions does not add up to N = {size}",
                self.k,
                self.frozen.len()
            )));
        }
        if self.frozen.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("frozen positions must be sorted and distinct".into()));
        }
        if let Some(&j) = self.frozen.iter().find(|&&j| j == 0 || j > size) {
            return Err(Error::InvalidArgument(format!("frozen position {j} outside 1..={size}")));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<CodeSpec> {
        let spec: CodeSpec = serde_json::from_str(s)?;
        spec.validate()?;
        Ok(CodeSpec {
            family: spec.family.normalized(),
            ..spec
        })
    }

    /// Short label such as `conv-open N=1024 k=512`.
    pub fn label(&self) -> String {
        format!("{} N={} k={}", self.family, self.size(), self.k)
    }
}

/// Frozen set from exact erasure first-error probabilities.
pub fn select_frozen_erasure_exact(circuit: &GateList, eps: f64, k: usize) -> Result<Vec<usize>> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("erasure rate {eps} outside [0, 1]")));
    }
    let p = first_error_probs(circuit, eps);
    let data = best_positions(&p, k)?;
    Ok(complement(circuit.len(), &data))
}

/// Per-position genie-aided error probabilities on BSC(`p`) for the all-zero
/// input. With `samples == 0` every position gets the prior `(1-p, p)`;
/// otherwise the probabilities are averaged over `samples` channel draws.
pub fn bitflip_scores(circuit: &GateList, p: f64, samples: usize, seed: u64) -> Result<Vec<f64>> {
    if !(p > 0.0 && p <= 0.5) {
        return Err(Error::InvalidArgument(format!("flip probability {p} outside (0, 0.5]")));
    }
    let size = circuit.len();
    let truth = vec![false; size];
    let base = Decoder::for_circuit(circuit);
    if samples == 0 {
        let mut dec = base;
        dec.set_prior_pairs(|_| (1.0 - p, p));
        return Ok(dec.genie_error_probs(&truth));
    }
    let channel = Channel::bsc(p)?;
    let zero = BitVec::zeros(size);
    let per_sample: Vec<Vec<f64>> = (0..samples as u64)
        .into_par_iter()
        .map_init(
            || base.clone(),
            |dec, t| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t);
                let y = channel.sample(&zero, &mut rng);
                dec.set_prior_pairs(|j| channel.prior_pair(y[j]).expect("bsc output"));
                dec.genie_error_probs(&truth)
            },
        )
        .collect();
    // summed in sample order so the result does not depend on scheduling
    let mut scores = vec![0.0; size];
    for v in &per_sample {
        for (s, x) in scores.iter_mut().zip(v) {
            *s += x;
        }
    }
    for s in &mut scores {
        *s /= samples as f64;
    }
    Ok(scores)
}

/// Frozen set leaving the `k` positions with the lowest genie-aided error
/// probability on BSC(`p`) as data.
pub fn select_frozen_bitflip(circuit: &GateList, p: f64, k: usize, samples: usize, seed: u64) -> Result<Vec<usize>> {
    let scores = bitflip_scores(circuit, p, samples, seed)?;
    let data = best_positions(&scores, k)?;
    Ok(complement(circuit.len(), &data))
}
