use std::io::{self, BufReader};
use std::net::TcpListener;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use semosd::bounds::na_curve;
use semosd::corpus::{load_sentences, split_train_test};
use semosd::harness::{parse_grid, RunConfig, Simulation, CSV_HEADER};
use semosd::prior::{serve_stream, Endpoint, NgramDenoiser, NgramModel, PriorBackend, RemotePrior};
use semosd::tep_count;

#[derive(Parser)]
#[command(name = "semosd", version, about = "Soft decoding with a byte-level source prior: simulation and tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte-Carlo BLER sweep.
    Simulate(Box<SimulateArgs>),
    /// Normal-approximation BLER of the BI-AWGN channel.
    Bound {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Comma list or start:step:stop.
        #[arg(long)]
        ebn0: String,
        /// Rate for the Eb/N0 conversion; k/n when omitted.
        #[arg(long)]
        rate: Option<f64>,
    },
    /// Train a byte n-gram prior on the training split of a corpus.
    TrainPrior {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 5)]
        order: usize,
        #[arg(long, default_value_t = 0.01)]
        delta: f64,
        #[arg(long, default_value_t = 0.9)]
        train_ratio: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 60)]
        min_len: usize,
        #[arg(long, default_value_t = 64)]
        max_len: usize,
    },
    /// Serve a trained n-gram prior over the prior protocol (stdio unless --listen).
    Serve {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        flip_rate: f64,
        /// TCP address to listen on, e.g. 127.0.0.1:7070.
        #[arg(long)]
        listen: Option<String>,
    },
    /// Send requests to a prior server and check ids and row normalisation.
    ServeCheck {
        /// tcp://host:port, host:port, unix:/path or exec:command.
        #[arg(long)]
        endpoint: String,
        #[arg(long, default_value_t = 10)]
        count: u64,
        #[arg(long, default_value = "The cat is sleeping on t")]
        ctx: String,
        #[arg(long, default_value = "?e s?fa!")]
        hd: String,
        #[arg(long, default_value_t = 10_000)]
        timeout_ms: u64,
    },
    /// Sizes of the two test-error-pattern families and their sum.
    Tepcount {
        #[arg(long)]
        kb: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        omega: usize,
        #[arg(long = "T", alias = "t")]
        t: usize,
    },
}

/// Flags mirror the configuration keys; flags override the config file, which
/// overrides the defaults.
#[derive(Args)]
struct SimulateArgs {
    /// Plain-text file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    code: Option<String>,
    #[arg(long)]
    channel: Option<String>,
    #[arg(long)]
    decoder: Option<String>,
    #[arg(long)]
    m: Option<String>,
    #[arg(long)]
    omega: Option<String>,
    #[arg(long = "T", alias = "t")]
    t: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    prior: Option<String>,
    #[arg(long)]
    prior_model: Option<String>,
    #[arg(long)]
    prior_endpoint: Option<String>,
    #[arg(long)]
    fallback: Option<String>,
    #[arg(long)]
    early_stop: Option<String>,
    #[arg(long)]
    ebn0: Option<String>,
    #[arg(long)]
    rate: Option<String>,
    #[arg(long)]
    noise_var: Option<String>,
    #[arg(long)]
    max_blocks: Option<String>,
    #[arg(long)]
    min_block_errors: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    workers: Option<String>,
    #[arg(long)]
    corpus: Option<String>,
    /// CSV output, appended row by row.
    #[arg(long)]
    output: Option<String>,
    #[arg(long)]
    json: Option<String>,
}

impl SimulateArgs {
    fn into_config(self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            cfg.apply_text(&text)?;
        }
        let flags = [
            ("code", self.code),
            ("channel", self.channel),
            ("decoder", self.decoder),
            ("m", self.m),
            ("omega", self.omega),
            ("t", self.t),
            ("alpha", self.alpha),
            ("prior", self.prior),
            ("prior_model", self.prior_model),
            ("prior_endpoint", self.prior_endpoint),
            ("fallback", self.fallback),
            ("early_stop", self.early_stop),
            ("ebn0", self.ebn0),
            ("rate", self.rate),
            ("noise_var", self.noise_var),
            ("max_blocks", self.max_blocks),
            ("min_block_errors", self.min_block_errors),
            ("seed", self.seed),
            ("workers", self.workers),
            ("corpus", self.corpus),
            ("output", self.output),
            ("json", self.json),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                cfg.set(k, &v)?;
            }
        }
        for kv in &self.set {
            let (k, v) = kv.split_once('=').with_context(|| format!("--set expects KEY=VALUE, got {kv:?}"))?;
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let sim = Simulation::new(args.into_config()?)?;
    println!("{CSV_HEADER}");
    sim.run_sweep_with(|s| {
        println!(
            "{},{},{},{:.4e},{:.2e},{:.4e},{:.1},{:.3},{},{}",
            s.ebn0_db, s.blocks, s.block_errors, s.bler, s.ci_halfwidth, s.ber, s.mean_teps, s.mean_ms, s.wins_bit, s.wins_byte
        );
    })?;
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match Cli::parse().command {
        Command::Simulate(args) => simulate(*args)?,
        Command::Bound { n, k, ebn0, rate } => {
            if !(n > k && k > 0) {
                bail!("need n > k > 0");
            }
            let grid = parse_grid(&ebn0)?;
            for p in na_curve(n, k, rate.unwrap_or(k as f64 / n as f64), &grid)? {
                println!("{} {:.4e}", p.ebn0_db, p.epsilon);
            }
        }
        Command::TrainPrior { corpus, out, order, delta, train_ratio, seed, min_len, max_len } => {
            let sentences = load_sentences(&corpus, min_len, max_len)?;
            let (train, test) = split_train_test(&sentences, train_ratio, seed)?;
            let model = NgramModel::train(&train, order, delta)?;
            model.save(&out)?;
            println!("trained order-{order} model on {} sentences ({} held out) -> {}", train.len(), test.len(), out.display());
        }
        Command::Serve { model, flip_rate, listen } => {
            let backend = NgramDenoiser::new(Arc::new(NgramModel::load(&model)?), flip_rate)?;
            match listen {
                None => {
                    serve_stream(&backend, io::stdin().lock(), io::stdout().lock())?;
                }
                Some(addr) => {
                    let listener = TcpListener::bind(&addr)?;
                    eprintln!("listening on {}", listener.local_addr()?);
                    std::thread::scope(|s| {
                        for stream in listener.incoming() {
                            let Ok(stream) = stream else { continue };
                            let backend = &backend;
                            s.spawn(move || {
                                let reader = BufReader::new(stream.try_clone()?);
                                serve_stream(backend, reader, stream)
                            });
                        }
                    });
                }
            }
        }
        Command::ServeCheck { endpoint, count, ctx, hd, timeout_ms } => {
            let client = RemotePrior::new(Endpoint::parse(&endpoint)?, Duration::from_millis(timeout_ms));
            let mut argmax = Vec::new();
            for _ in 0..count {
                argmax = client.query(ctx.as_bytes(), hd.as_bytes())?.argmax();
            }
            println!(
                "ok: {count} requests, {} rows renormalised, argmax {:?}",
                client.renormalised_rows(),
                String::from_utf8_lossy(&argmax)
            );
        }
        Command::Tepcount { kb, m, k, omega, t } => {
            let (bits, bytes, total) = tep_count(kb, m, k, omega, t)?;
            println!("{bits} {bytes} {total}");
        }
    }
    Ok(())
}
