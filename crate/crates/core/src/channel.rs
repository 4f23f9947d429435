//! Binary-input memoryless symmetric channels.
//!
//! BPSK maps bit 0 to +1 and bit 1 to -1.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::BitVec;
use crate::scdecode::ProbTensor;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Channel {
    /// Erasure with probability `eps`.
    Bec { eps: f64 },
    /// Bit flip with probability `p`.
    Bsc { p: f64 },
    /// Unit-energy BPSK plus Gaussian noise of standard deviation `sigma`.
    #[serde(rename = "awgn")]
    BiAwgn { sigma: f64 },
}

/// One received symbol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Symbol {
    Bit(bool),
    Erased,
    Real(f64),
}

pub type ChannelOutput = Vec<Symbol>;

/// Symmetric capacity in bits and Bhattacharyya parameter.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Figures {
    pub mutual_information: f64,
    pub bhattacharyya: f64,
}

impl Channel {
    pub fn bec(eps: f64) -> Result<Self> {
        check_prob("erasure probability", eps)?;
        Ok(Channel::Bec { eps })
    }

    pub fn bsc(p: f64) -> Result<Self> {
        check_prob("flip probability", p)?;
        Ok(Channel::Bsc { p })
    }

    pub fn awgn(sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidArgument(format!("noise deviation {sigma} must be positive")));
        }
        Ok(Channel::BiAwgn { sigma })
    }

    /// Re-checks the parameter range (useful after deserialization).
    pub fn validate(&self) -> Result<()> {
        match *self {
            Channel::Bec { eps } => Channel::bec(eps).map(|_| ()),
            Channel::Bsc { p } => Channel::bsc(p).map(|_| ()),
            Channel::BiAwgn { sigma } => Channel::awgn(sigma).map(|_| ()),
        }
    }

    /// Noisy copy of one transmitted bit.
    #[inline]
    pub fn sample_symbol<R: Rng + ?Sized>(&self, bit: bool, rng: &mut R) -> Symbol {
        match *self {
            Channel::Bec { eps } => {
                if rng.random::<f64>() < eps {
                    Symbol::Erased
                } else {
                    Symbol::Bit(bit)
                }
            }
            Channel::Bsc { p } => Symbol::Bit(bit ^ (rng.random::<f64>() < p)),
            Channel::BiAwgn { sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                Symbol::Real(if bit { -1.0 } else { 1.0 } + sigma * z)
            }
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, codeword: &BitVec, rng: &mut R) -> ChannelOutput {
        codeword.iter().map(|b| self.sample_symbol(b, rng)).collect()
    }

    /// Posterior `(P(0), P(1))` of the transmitted bit under a uniform prior.
    #[inline]
    pub fn prior_pair(&self, symbol: Symbol) -> Result<(f64, f64)> {
        match (*self, symbol) {
            (Channel::Bec { .. }, Symbol::Erased) => Ok((0.5, 0.5)),
            (Channel::Bec { .. }, Symbol::Bit(b)) => Ok(if b { (0.0, 1.0) } else { (1.0, 0.0) }),
            (Channel::Bsc { p }, Symbol::Bit(b)) => Ok(if b { (p, 1.0 - p) } else { (1.0 - p, p) }),
            (Channel::BiAwgn { sigma }, Symbol::Real(r)) => Ok(llr_to_pair(2.0 * r / (sigma * sigma))),
            (ch, s) => Err(Error::InvalidArgument(format!("symbol {s:?} is not an output of {ch}"))),
        }
    }

    pub fn prior(&self, symbol: Symbol) -> Result<ProbTensor> {
        let (p0, p1) = self.prior_pair(symbol)?;
        Ok(ProbTensor::bit(p0, p1))
    }

    pub fn figures(&self) -> Figures {
        match *self {
            Channel::Bec { eps } => Figures {
                mutual_information: 1.0 - eps,
                bhattacharyya: eps,
            },
            Channel::Bsc { p } => Figures {
                mutual_information: 1.0 - h2(p),
                bhattacharyya: 2.0 * (p * (1.0 - p)).sqrt(),
            },
            Channel::BiAwgn { sigma } => Figures {
                mutual_information: awgn_capacity(sigma),
                bhattacharyya: (-1.0 / (2.0 * sigma * sigma)).exp(),
            },
        }
    }

    /// Flip probability of the hard-decision channel, used to build frozen
    /// sets for channels other than the erasure channel.
    pub fn equivalent_flip(&self) -> Option<f64> {
        match *self {
            Channel::Bec { .. } => None,
            Channel::Bsc { p } => Some(p),
            Channel::BiAwgn { sigma } => Some(q_function(1.0 / sigma)),
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Channel::Bec { eps } => write!(f, "bec:{eps}"),
            Channel::Bsc { p } => write!(f, "bsc:{p}"),
            Channel::BiAwgn { sigma } => write!(f, "awgn:{sigma}"),
        }
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, value) = s
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("channel {s:?} is not of the form kind:value")))?;
        let v: f64 = value
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("channel parameter {value:?} is not a number")))?;
        match kind.trim().to_ascii_lowercase().as_str() {
            "bec" => Channel::bec(v),
            "bsc" => Channel::bsc(v),
            "awgn" | "biawgn" => Channel::awgn(v),
            other => Err(Error::Parse(format!("unknown channel kind {other:?} (expected bec, bsc or awgn)"))),
        }
    }
}

fn check_prob(what: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("{what} {v} outside [0, 1]")))
    }
}

/// `(P(0), P(1))` from a log-likelihood ratio `ln(P(0)/P(1))`.
#[inline]
fn llr_to_pair(llr: f64) -> (f64, f64) {
    let e = (-llr.abs()).exp();
    let big = 1.0 / (1.0 + e);
    let small = e / (1.0 + e);
    if llr >= 0.0 {
        (big, small)
    } else {
        (small, big)
    }
}

/// Binary entropy in bits.
pub fn h2(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// `log2(1 + e^-x)` without overflow.
fn log2_one_plus_exp_neg(x: f64) -> f64 {
    if x > 0.0 {
        (-x).exp().ln_1p() / LN_2
    } else {
        (-x + x.exp().ln_1p()) / LN_2
    }
}

/// Gauss-Hermite nodes and weights for `int e^{-x^2} f(x) dx`.
pub fn gauss_hermite(order: usize) -> Vec<(f64, f64)> {
    let n = order;
    let mut out = vec![(0.0, 0.0); n];
    let pim4 = PI.powf(-0.25);
    let mut z = 0.0f64;
    for i in 0..n.div_ceil(2) {
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * out[0].0,
            3 => 1.91 * z - 0.91 * out[1].0,
            _ => 2.0 * z - out[i - 2].0,
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / (j as f64 + 1.0)).sqrt() * p2 - (j as f64 / (j as f64 + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-14 {
                break;
            }
        }
        let w = 2.0 / (pp * pp);
        out[i] = (z, w);
        out[n - 1 - i] = (-z, w);
    }
    out
}

/// Symmetric capacity of the BPSK/AWGN channel, in bits.
pub fn awgn_capacity(sigma: f64) -> f64 {
    // I = 1 - E[log2(1 + e^{-L})], L = 2Y/sigma^2, Y ~ N(1, sigma^2)
    let nodes = gauss_hermite(64);
    let s2 = sigma * sigma;
    let e: f64 = nodes
        .iter()
        .map(|&(x, w)| {
            let y = 1.0 + sigma * std::f64::consts::SQRT_2 * x;
            w * log2_one_plus_exp_neg(2.0 * y / s2)
        })
        .sum::<f64>()
        / PI.sqrt();
    1.0 - e
}

/// Gaussian tail `P(Z > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Complementary error function with relative error below 1.2e-7.
fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let r = t * (-z * z - 1.26551223
        + t * (1.00002368
            + t * (0.37409196
                + t * (0.09678418
                    + t * (-0.18628806
                        + t * (0.27886807 + t * (-1.13520398 + t * (1.48851587 + t * (-0.82215223 + t * 0.17087277)))))))))
        .exp();
    if x >= 0.0 {
        r
    } else {
        2.0 - r
    }
}

/// Eb/N0 in dB for unit-energy BPSK at code rate `rate`.
pub fn ebn0_db(sigma: f64, rate: f64) -> f64 {
    10.0 * (1.0 / (2.0 * rate * sigma * sigma)).log10()
}

/// Noise deviation giving the requested Eb/N0 (dB) at code rate `rate`.
pub fn sigma_for_ebn0_db(ebn0: f64, rate: f64) -> f64 {
    (1.0 / (2.0 * rate * 10f64.powf(ebn0 / 10.0))).sqrt()
}
