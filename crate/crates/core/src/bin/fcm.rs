//! `fcm` command-line front end.
//!
//! Results go to stdout as `key=value` lines, diagnostics to stderr. Exit
//! codes: 0 ok, 1 usage, 2 I/O, 3 codec failure, 4 no quality overlap.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fcm_core::bitstream::measure_rate;
use fcm_core::config;
use fcm_core::error::{Error, ErrorKind, Result};
use fcm_core::eval::{self, bd_rate, read_curve, sweep_points, write_curve};
use fcm_core::pipeline::{decode_with, encode, DecoderOptions, EncoderConfig};
use fcm_core::tensor::{load_feature_sequence, FeatureSequence};

#[derive(Parser)]
#[command(name = "fcm", version, about = "Feature coding for machines")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compress a feature file (.fcft) into a container (.fcmb).
    Encode {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        enc: EncodeFlags,
    },
    /// Restore a feature file from a container.
    Decode {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, value_name = "CMD")]
        external_decode: Option<String>,
    },
    /// Encode and decode in memory and report rate and fidelity.
    Roundtrip {
        input: PathBuf,
        #[command(flatten)]
        enc: EncodeFlags,
    },
    /// Sweep the lossy qshift ladder and write a `rate,quality` curve.
    Eval {
        input: PathBuf,
        output: PathBuf,
        /// Comma-separated, at least two distinct values.
        #[arg(long, value_delimiter = ',', default_values_t = [0u8, 1, 2, 3, 4])]
        qshifts: Vec<u8>,
        #[command(flatten)]
        enc: EncodeFlags,
    },
    /// BD-rate of a test curve against a reference curve, in percent.
    Bdrate { reference: PathBuf, test: PathBuf },
}

#[derive(Args, Default)]
struct EncodeFlags {
    /// identity | pyramid_fuse
    #[arg(long)]
    transform: Option<String>,
    #[arg(long, value_name = "N")]
    target_channels: Option<String>,
    /// Temporal downsampling factor, 1 or 2.
    #[arg(long)]
    ratio: Option<String>,
    /// Channel-adjustment threshold scale in (0, 1), or `off`.
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long, value_name = "N")]
    bitdepth: Option<String>,
    /// ref_lossless | ref_lossy | external
    #[arg(long)]
    codec: Option<String>,
    #[arg(long, value_name = "N")]
    qshift: Option<String>,
    #[arg(long, value_name = "N")]
    intra_period: Option<String>,
    /// `key = value` settings file; flags take precedence.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "CMD")]
    external_encode: Option<String>,
    #[arg(long, value_name = "CMD")]
    external_decode: Option<String>,
}

impl EncodeFlags {
    fn resolve(&self) -> Result<EncoderConfig> {
        let mut cfg = EncoderConfig::default();
        if let Some(p) = &self.config {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            for (k, v) in config::parse_config(&text)? {
                config::apply(&mut cfg, &k, &v)?;
            }
        }
        let flags = [
            ("transform", &self.transform),
            ("target_channels", &self.target_channels),
            ("ratio", &self.ratio),
            ("alpha", &self.alpha),
            ("bitdepth", &self.bitdepth),
            ("codec", &self.codec),
            ("qshift", &self.qshift),
            ("intra_period", &self.intra_period),
            ("external_encode", &self.external_encode),
            ("external_decode", &self.external_decode),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                config::apply(&mut cfg, k, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Writes via a sibling temp file so a failed run never leaves a torn output.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

fn signature(seq: &FeatureSequence) -> String {
    seq.shape_signature()
        .iter()
        .map(|s| format!("{}x{}x{}", s.channels, s.height, s.width))
        .collect::<Vec<_>>()
        .join(",")
}

fn rate_lines(bytes: usize, seq: &FeatureSequence) {
    let r = measure_rate(bytes, seq.len(), 1.0, seq.element_count());
    println!("bytes={bytes}");
    println!("bits={}", r.bits);
    println!("bits_per_element={:.6}", r.bits_per_element);
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::Encode { input, output, enc } => {
            let cfg = enc.resolve()?;
            let seq = load_feature_sequence(&input)?;
            let bytes = encode(&seq, &cfg)?;
            write_atomic(&output, &bytes)?;
            println!("sets={}", seq.len());
            println!("elements={}", seq.element_count());
            rate_lines(bytes.len(), &seq);
        }
        Cmd::Decode { input, output, external_decode } => {
            let bytes = read(&input)?;
            let (seq, _) = decode_with(&bytes, &DecoderOptions { external_decode })?;
            write_atomic(&output, &seq.to_fcft_bytes()?)?;
            println!("sets={}", seq.len());
            println!("shapes={}", signature(&seq));
        }
        Cmd::Roundtrip { input, enc } => {
            let cfg = enc.resolve()?;
            let seq = load_feature_sequence(&input)?;
            let bytes = encode(&seq, &cfg)?;
            let opts = DecoderOptions { external_decode: cfg.codec.external_decode.clone() };
            let (rec, _) = decode_with(&bytes, &opts)?;
            let f = eval::fidelity(&seq, &rec)?;
            rate_lines(bytes.len(), &seq);
            println!("mse={:e}", f.mse);
            for (i, m) in f.layer_mse.iter().enumerate() {
                println!("mse_layer{i}={m:e}");
            }
            println!("psnr={:.4}", f.psnr);
            println!("cosine={:.9}", f.cosine);
        }
        Cmd::Eval { input, output, qshifts, enc } => {
            let cfg = enc.resolve()?;
            let seq = load_feature_sequence(&input)?;
            let pts = sweep_points(&seq, &cfg, &qshifts)?;
            let curve = eval::sweep::to_curve(&pts)?;
            let mut buf = Vec::new();
            write_curve(&curve, &mut buf)?;
            write_atomic(&output, &buf)?;
            for p in &pts {
                println!("qshift{}_bits_per_element={:.6}", p.qshift, p.bits_per_element);
                println!("qshift{}_cosine={:.9}", p.qshift, p.cosine);
            }
            println!("points={}", curve.points().len());
        }
        Cmd::Bdrate { reference, test } => {
            let a = read_curve(&read(&reference)?[..])?;
            let b = read_curve(&read(&test)?[..])?;
            println!("bd_rate_percent={:.3}", bd_rate(&a, &b)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fcm: {e}");
            ExitCode::from(match e.kind() {
                ErrorKind::Usage => 1,
                ErrorKind::Io => 2,
                ErrorKind::Codec => 3,
                ErrorKind::NoOverlap => 4,
            })
        }
    }
}
