use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::scdecode::{Decoder, Plan};
use crate::simulate::construction::CodeSpec;
use crate::simulate::report::{Counts, SimReport};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "CONVPOLAR_THREADS";

/// Trials handled by one work item.
const CHUNK: u64 = 64;

/// Worker count: `requested` if given, else the machine's parallelism, capped
/// by `CONVPOLAR_THREADS` when set.
pub fn worker_count(requested: Option<usize>) -> usize {
    let base = requested.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&c| c > 0)
        .unwrap_or(usize::MAX);
    base.min(cap).max(1)
}

/// Frame and bit error rates of `spec` on `channel`, transmitting the
/// all-zero codeword. Trial `t` draws everything from its own ChaCha stream,
/// so the report depends only on the arguments, not on `threads`.
pub fn run_mc_with_threads(
    spec: &CodeSpec,
    channel: &Channel,
    trials: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<SimReport> {
    spec.validate()?;
    channel.validate()?;
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let started = Instant::now();
    let plan = Arc::new(Plan::new(spec.family, spec.n));
    let frozen = spec.frozen_map();
    let data = spec.data_positions();
    let base = Decoder::new(plan);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(threads))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let chunks = trials.div_ceil(CHUNK);
    let counts = pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map_init(
                || base.clone(),
                |dec, c| {
                    let mut acc = Counts::default();
                    for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                        acc = acc.merge(run_trial(dec, channel, &frozen, &data, seed, t));
                    }
                    acc
                },
            )
            .reduce(Counts::default, Counts::merge)
    });

    let mut report = SimReport::from_counts(spec.label(), channel.to_string(), seed, counts, spec.k);
    report.wall_time = started.elapsed();
    Ok(report)
}

/// [`run_mc_with_threads`] with the default worker count.
pub fn run_mc(spec: &CodeSpec, channel: &Channel, trials: u64, seed: u64) -> Result<SimReport> {
    run_mc_with_threads(spec, channel, trials, seed, None)
}

fn run_trial(dec: &mut Decoder, channel: &Channel, frozen: &[Option<bool>], data: &[usize], seed: u64, t: u64) -> Counts {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(t);
    dec.set_prior_pairs(|_| {
        let y = channel.sample_symbol(false, &mut rng);
        channel.prior_pair(y).expect("symbol produced by this channel")
    });
    let out = dec.decode(frozen, || rng.random::<bool>());
    // a coin-flip decision counts as an error even when the coin was right
    let mut wrong = 0u64;
    for &j in data {
        if out.bits.get(j - 1) || out.undetermined.contains(&j) {
            wrong += 1;
        }
    }
    Counts {
        trials: 1,
        frame_errors: (wrong > 0) as u64,
        bit_errors: wrong,
    }
}
