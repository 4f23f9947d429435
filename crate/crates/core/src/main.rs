use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde::Serialize;

use convpolar::channel::{ebn0_db, Channel, Symbol};
use convpolar::circuit::{build_circuit, encode, CodeFamily};
use convpolar::erasure_exact::{fer_bounds, fer_bounds_for, first_error_probs, fit_error_exponent};
use convpolar::gf2::BitVec;
use convpolar::scdecode::Decoder;
use convpolar::simulate::{run_mc_with_threads, CodeSpec, DEFAULT_SAMPLES};

#[derive(Parser)]
#[command(name = "convpolar", version, about = "Polar and convolutional polar codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Choose a frozen set for a channel and write the code description.
    Construct {
        /// polar, conv (open boundary), conv-open or conv-periodic
        #[arg(long)]
        family: CodeFamily,
        /// log2 of the block length
        #[arg(long)]
        n: u32,
        /// Code rate as k/N or a decimal, e.g. 1/2
        #[arg(long)]
        rate: String,
        /// Design channel: bec:EPS, bsc:P or awgn:SIGMA
        #[arg(long)]
        channel: Channel,
        /// Channel draws for the bit-flip heuristic (0 = fixed priors)
        #[arg(long, default_value_t = DEFAULT_SAMPLES)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encode data bits with a code.
    Encode {
        #[arg(long)]
        code: PathBuf,
        /// k data bits as a 0/1 string
        #[arg(long)]
        data: BitVec,
    },
    /// Decode a received word.
    Decode {
        #[arg(long)]
        code: PathBuf,
        #[arg(long)]
        channel: Channel,
        /// Received symbols: 0/1/? for bec, 0/1 for bsc, reals for awgn,
        /// separated by commas or spaces (bit strings may be unseparated)
        #[arg(long)]
        received: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Exact erasure-channel analysis: per-position first-error
    /// probabilities of a code, or frame-error bounds over a range of sizes.
    AnalyzeBec {
        #[arg(long, conflicts_with_all = ["family", "n_min", "n_max", "rate"])]
        code: Option<PathBuf>,
        #[arg(long)]
        family: Option<CodeFamily>,
        #[arg(long)]
        n_min: Option<u32>,
        #[arg(long)]
        n_max: Option<u32>,
        #[arg(long)]
        rate: Option<String>,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fit Pe = 2^(-gamma N^beta) to an `n,fer_lower,fer_upper` CSV.
    FitExponent {
        #[arg(long)]
        input: PathBuf,
        /// Column holding the error probabilities
        #[arg(long, default_value = "fer_upper")]
        column: String,
    },
    /// Monte Carlo frame and bit error rates.
    Simulate {
        #[arg(long)]
        code: PathBuf,
        #[arg(long)]
        channel: Channel,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Worker threads (capped by CONVPOLAR_THREADS)
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<BadArgs>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

/// Argument combinations clap cannot check on its own.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
struct BadArgs(String);

fn bad(msg: impl Into<String>) -> anyhow::Error {
    BadArgs(msg.into()).into()
}

fn run(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::Construct {
            family,
            n,
            rate,
            channel,
            samples,
            seed,
            out,
        } => {
            let k = parse_rate(&rate, n)?;
            let spec = CodeSpec::for_channel(family, n, k, &channel, samples, seed)?;
            log::info!("constructed {}", spec.label());
            emit(out.as_deref(), &spec.to_json()?)
        }
        Command::Encode { code, data } => {
            let spec = read_code(&code)?;
            let u = spec.embed(&data).map_err(|e| bad(e.to_string()))?;
            let x = encode(&spec.circuit(), &u)?;
            println!("{x}");
            Ok(())
        }
        Command::Decode {
            code,
            channel,
            received,
            seed,
        } => {
            let spec = read_code(&code)?;
            let y = parse_received(&channel, &received)?;
            if y.len() != spec.size() {
                return Err(bad(format!("{} received symbols for N = {}", y.len(), spec.size())));
            }
            let priors = y.iter().map(|&s| channel.prior(s)).collect::<Result<Vec<_>, _>>()?;
            let mut dec = Decoder::for_circuit(&spec.circuit());
            dec.set_priors(&priors)?;
            let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
            let out = dec.decode(&spec.frozen_map(), || rand::Rng::random(&mut rng));
            if out.contradiction {
                log::warn!("received word is inconsistent with the code");
            }
            println!("{}", spec.extract(&out.bits));
            Ok(())
        }
        Command::AnalyzeBec {
            code,
            family,
            n_min,
            n_max,
            rate,
            eps,
            out,
        } => {
            if !(0.0..=1.0).contains(&eps) {
                return Err(bad(format!("--eps {eps} outside [0, 1]")));
            }
            let mut w = csv::Writer::from_writer(Vec::new());
            if let Some(path) = code {
                let spec = read_code(&path)?;
                let p = first_error_probs(&spec.circuit(), eps);
                w.write_record(["position", "p_first_error"])?;
                for (j, v) in p.iter().enumerate() {
                    w.write_record([(j + 1).to_string(), format!("{v:e}")])?;
                }
                let (lo, up) = fer_bounds(&p, &spec.data_positions())?;
                log::info!("{}: fer in [{lo:e}, {up:e}]", spec.label());
            } else {
                let (Some(family), Some(n_min), Some(n_max), Some(rate)) = (family, n_min, n_max, rate) else {
                    return Err(bad("give either --code or all of --family, --n-min, --n-max, --rate"));
                };
                if n_min > n_max || n_max > 20 {
                    return Err(bad(format!("bad size range {n_min}..={n_max}")));
                }
                w.write_record(["n", "fer_lower", "fer_upper"])?;
                for n in n_min..=n_max {
                    let k = parse_rate(&rate, n)?;
                    let (lo, up) = fer_bounds_for(&build_circuit(family, n), eps, k)?;
                    w.write_record([n.to_string(), format!("{lo:e}"), format!("{up:e}")])?;
                }
            }
            let text = String::from_utf8(w.into_inner()?)?;
            emit(out.as_deref(), &text)
        }
        Command::FitExponent { input, column } => {
            let mut r = csv::Reader::from_path(&input).with_context(|| format!("reading {}", input.display()))?;
            let headers = r.headers()?.clone();
            let col = headers
                .iter()
                .position(|h| h.trim() == column)
                .ok_or_else(|| bad(format!("no column {column:?} in {}", input.display())))?;
            let ncol = headers
                .iter()
                .position(|h| h.trim() == "n")
                .ok_or_else(|| bad(format!("no column \"n\" in {}", input.display())))?;
            let mut points = Vec::new();
            for rec in r.records() {
                let rec = rec?;
                let n: f64 = rec[ncol].trim().parse().context("parsing n")?;
                let pe: f64 = rec[col].trim().parse().with_context(|| format!("parsing {column}"))?;
                points.push((n, pe));
            }
            let (gamma, beta) = fit_error_exponent(&points)?;
            #[derive(Serialize)]
            struct Fit {
                gamma: f64,
                beta: f64,
                points: usize,
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&Fit {
                    gamma,
                    beta,
                    points: points.len()
                })?
            );
            Ok(())
        }
        Command::Simulate {
            code,
            channel,
            trials,
            seed,
            threads,
            out,
        } => {
            let spec = read_code(&code)?;
            let report = run_mc_with_threads(&spec, &channel, trials, seed, threads)?;
            if let Channel::BiAwgn { sigma } = channel {
                log::info!("sigma {sigma}, Eb/N0 {:.3} dB", ebn0_db(sigma, spec.rate()));
            }
            log::info!(
                "{} on {}: fer {:e} in {:.1?}",
                report.code,
                report.channel,
                report.fer.value,
                report.wall_time
            );
            emit(out.as_deref(), &serde_json::to_string_pretty(&report)?)
        }
    }
}

fn read_code(path: &Path) -> anyhow::Result<CodeSpec> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    CodeSpec::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, format!("{}\n", text.trim_end())).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{}", text.trim_end())?;
            Ok(())
        }
    }
}

/// Number of data bits for a rate given as `k/N` or a decimal.
fn parse_rate(rate: &str, n: u32) -> anyhow::Result<usize> {
    let size = 1u64 << n;
    let (num, den) = match rate.split_once('/') {
        Some((a, b)) => (
            a.trim().parse::<u64>().map_err(|_| bad(format!("bad rate {rate:?}")))?,
            b.trim().parse::<u64>().map_err(|_| bad(format!("bad rate {rate:?}")))?,
        ),
        None => {
            let r: f64 = rate.trim().parse().map_err(|_| bad(format!("bad rate {rate:?}")))?;
            let k = r * size as f64;
            if !(0.0..=size as f64).contains(&k) || k.fract() != 0.0 {
                return Err(bad(format!("rate {rate} does not give a whole number of bits at N = {size}")));
            }
            return Ok(k as usize);
        }
    };
    if den == 0 || num > den || !(num * size).is_multiple_of(den) {
        return Err(bad(format!("rate {rate} does not give a whole number of bits at N = {size}")));
    }
    Ok((num * size / den) as usize)
}

fn parse_received(channel: &Channel, text: &str) -> anyhow::Result<Vec<Symbol>> {
    let tokens: Vec<&str> = text.split(|c: char| c == ',' || c.is_whitespace()).filter(|t| !t.is_empty()).collect();
    let bitlike = |t: &str| t.chars().all(|c| matches!(c, '0' | '1' | '?'));
    let tokens: Vec<String> = if tokens.len() == 1 && bitlike(tokens[0]) && !matches!(channel, Channel::BiAwgn { .. }) {
        tokens[0].chars().map(String::from).collect()
    } else {
        tokens.into_iter().map(String::from).collect()
    };
    tokens
        .iter()
        .map(|t| match (channel, t.as_str()) {
            (Channel::BiAwgn { .. }, _) => t.parse::<f64>().map(Symbol::Real).map_err(|_| bad(format!("bad sample {t:?}"))),
            (_, "0") => Ok(Symbol::Bit(false)),
            (_, "1") => Ok(Symbol::Bit(true)),
            (Channel::Bec { .. }, "?") => Ok(Symbol::Erased),
            _ => Err(bad(format!("symbol {t:?} is not an output of {channel}"))),
        })
        .collect()
}
