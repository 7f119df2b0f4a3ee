//! `realseal` command line.
//!
//! Exit codes: 0 success (or an authentic verdict), 1 verification or data
//! failure, 2 usage error. Only `--json` output is meant to be parsed.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::identity::{DeviceId, Location};
use crate::manifest::RealismManifest;
use crate::registry::{load_registry, save_registry, Registry, RegistryEntry};
use crate::scene::{read_capture_dir, write_capture_dir, Scenario, ScenarioParams, SceneError};
use crate::scoring::{score_capture, DimensionScores, ScoringError, ScoringParams};
use crate::sealing::{read_sidecar, seal, verify, DeviceKeyPair, SealError, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

const IMAGE_FILE: &str = "image.pgm";
const SIDECAR_FILE: &str = "image.rsl";

#[derive(Debug, Parser)]
#[command(
    name = "realseal",
    version,
    about = "Score, seal and verify multisensory captures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Create a device keypair as <OUT>/<DEVICE_ID>.sk and .pk
    Keygen {
        device_id: String,
        /// 32-byte secret seed as 64 hex chars (default: OS entropy)
        #[arg(long, value_parser = parse_seed_hex)]
        seed: Option<[u8; 32]>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Overwrite existing key files
        #[arg(long)]
        force: bool,
        /// Also enroll the public key as trusted in this registry file
        #[arg(long)]
        registry: Option<PathBuf>,
    },
    /// Synthesize a capture directory
    Simulate {
        /// genuine, screen-replay or printed-photo
        #[arg(long)]
        scenario: Scenario,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = crate::scene::DEFAULT_DEVICE_ID)]
        device_id: String,
        /// Capture time, UTC seconds
        #[arg(long, default_value_t = crate::scene::DEFAULT_TIMESTAMP_UNIX, allow_hyphen_values = true)]
        timestamp: i64,
        /// Latitude in micro-degrees (requires --lon)
        #[arg(long, requires = "lon", allow_hyphen_values = true)]
        lat: Option<i64>,
        /// Longitude in micro-degrees (requires --lat)
        #[arg(long, requires = "lat", allow_hyphen_values = true)]
        lon: Option<i64>,
    },
    /// Score a capture and write <OUT>/image.pgm plus <OUT>/image.rsl
    Seal {
        capture: PathBuf,
        /// Device secret key file (<device_id>.sk)
        #[arg(long)]
        key: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Verify an image and its sidecar against a registry
    Verify {
        image: PathBuf,
        sidecar: PathBuf,
        #[arg(long)]
        registry: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Show a sidecar's manifest without verifying it
    Inspect {
        sidecar: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Score every scenario for a range of seeds
    Bench {
        /// Inclusive range `A..B`, or a single seed
        #[arg(long)]
        seed: SeedRange,
        #[arg(long)]
        json: bool,
    },
}

fn parse_seed_hex(s: &str) -> Result<[u8; 32], String> {
    let mut seed = [0u8; 32];
    if s.len() != 64 {
        return Err(format!("expected 64 hex chars, got {}", s.len()));
    }
    hex::decode_to_slice(s, &mut seed).map_err(|e| e.to_string())?;
    Ok(seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedRange {
    pub first: u64,
    pub last: u64,
}

impl FromStr for SeedRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|e| format!("bad seed {t:?}: {e}"))
        };
        let (first, last) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if last < first {
            return Err(format!("empty seed range {s}"));
        }
        Ok(Self { first, last })
    }
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Failure(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Failure(_) => EXIT_FAILURE,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Failure(m) => m,
        }
    }
}

type CliResult = Result<i32, CliError>;

fn failure(e: impl std::fmt::Display) -> CliError {
    CliError::Failure(e.to_string())
}

fn is_not_found(e: &io::Error) -> bool {
    e.kind() == io::ErrorKind::NotFound
}

/// Missing inputs are usage errors; unreadable or bad ones are failures.
fn read_input(path: &Path, what: &str) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| {
        let msg = format!("{what} {}: {e}", path.display());
        if is_not_found(&e) {
            CliError::Usage(msg)
        } else {
            CliError::Failure(msg)
        }
    })
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| failure(format!("{}: {e}", path.display())))
}

fn scene_error(e: SceneError) -> CliError {
    match &e {
        SceneError::Io { source, .. } if is_not_found(source) => CliError::Usage(e.to_string()),
        _ => failure(e),
    }
}

fn seal_error(e: SealError) -> CliError {
    match &e {
        SealError::Io { source, .. } if is_not_found(source) => CliError::Usage(e.to_string()),
        _ => failure(e),
    }
}

fn scoring_error(e: ScoringError) -> CliError {
    match e {
        ScoringError::Capture(inner) => scene_error(inner),
        other => failure(other),
    }
}

/// Run the CLI with explicit output streams. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Keygen {
            device_id,
            seed,
            out: dir,
            force,
            registry,
        } => cmd_keygen(&device_id, seed, &dir, force, registry.as_deref(), out),
        Command::Simulate {
            scenario,
            seed,
            out: dir,
            device_id,
            timestamp,
            lat,
            lon,
        } => cmd_simulate(
            scenario,
            seed,
            &dir,
            &device_id,
            timestamp,
            lat.zip(lon),
            out,
        ),
        Command::Seal {
            capture,
            key,
            out: dir,
            json,
        } => cmd_seal(&capture, &key, &dir, json, out),
        Command::Verify {
            image,
            sidecar,
            registry,
            json,
        } => cmd_verify(&image, &sidecar, &registry, json, out),
        Command::Inspect { sidecar, json } => cmd_inspect(&sidecar, json, out),
        Command::Bench { seed, json } => cmd_bench(seed, json, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "realseal: {}", e.message());
            e.exit_code()
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(failure)
}

fn cmd_keygen(
    device_id: &str,
    seed: Option<[u8; 32]>,
    dir: &Path,
    force: bool,
    registry: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult {
    let device_id = DeviceId::new(device_id).map_err(|e| CliError::Usage(e.to_string()))?;
    let seed = match seed {
        Some(s) => s,
        None => {
            let mut s = [0u8; 32];
            getrandom::getrandom(&mut s).map_err(failure)?;
            s
        }
    };
    let kp = DeviceKeyPair::keygen(device_id, &seed).map_err(failure)?;

    // Check the registry before touching any key file.
    let enrolled = match registry {
        Some(path) => {
            let current = match fs::read(path) {
                Ok(bytes) => load_registry(&bytes).map_err(failure)?,
                Err(e) if is_not_found(&e) => Registry::new(),
                Err(e) => return Err(failure(format!("{}: {e}", path.display()))),
            };
            let entry = RegistryEntry::trusted(kp.device_id().clone(), kp.public_key());
            Some((path, current.insert(entry).map_err(failure)?))
        }
        None => None,
    };

    let (sk, pk) = kp.write_key_files(dir, force).map_err(failure)?;
    if let Some((path, reg)) = enrolled {
        write_output(path, &save_registry(&reg))?;
    }
    emit(
        out,
        &format!(
            "device {}\npublic key {}\nwrote {} and {}\n",
            kp.device_id(),
            kp.public_key_hex(),
            sk.display(),
            pk.display()
        ),
    )?;
    Ok(EXIT_OK)
}

fn cmd_simulate(
    scenario: Scenario,
    seed: u64,
    dir: &Path,
    device_id: &str,
    timestamp: i64,
    location: Option<(i64, i64)>,
    out: &mut dyn Write,
) -> CliResult {
    let device_id = DeviceId::new(device_id).map_err(|e| CliError::Usage(e.to_string()))?;
    let location = location
        .map(|(lat, lon)| Location::new(lat, lon))
        .transpose()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let capture = scenario
        .generate(seed, &ScenarioParams::default())
        .map_err(failure)?
        .with_identity(device_id, timestamp, location);
    write_capture_dir(&capture, dir).map_err(failure)?;
    emit(
        out,
        &format!(
            "{scenario} scene (seed {seed}, {}x{} x {} frames) written to {}\n",
            capture.width(),
            capture.height(),
            capture.frame_count(),
            dir.display()
        ),
    )?;
    Ok(EXIT_OK)
}

fn cmd_seal(
    capture_dir: &Path,
    key: &Path,
    dir: &Path,
    json: bool,
    out: &mut dyn Write,
) -> CliResult {
    let identity = DeviceKeyPair::load_secret_key_file(key).map_err(seal_error)?;
    let capture = read_capture_dir(capture_dir).map_err(scene_error)?;
    if &capture.device_id != identity.device_id() {
        return Err(failure(format!(
            "capture was recorded by {} but the key belongs to {}",
            capture.device_id,
            identity.device_id()
        )));
    }
    let (dims, overall) =
        score_capture(&capture, &ScoringParams::default()).map_err(scoring_error)?;
    let image = capture.sealed_image_bytes();
    let bundle = seal(
        &image,
        &dims,
        overall,
        &identity,
        capture.timestamp_unix,
        capture.location,
    )
    .map_err(failure)?;
    let sidecar = bundle.sidecar_bytes().map_err(failure)?;

    fs::create_dir_all(dir).map_err(|e| failure(format!("{}: {e}", dir.display())))?;
    write_output(&dir.join(IMAGE_FILE), &image)?;
    write_output(&dir.join(SIDECAR_FILE), &sidecar)?;

    if json {
        emit(out, &manifest_json(&bundle.manifest)?)?;
        emit(out, "\n")?;
    } else {
        let mut text = format!(
            "sealed {} by {}\n",
            dir.join(IMAGE_FILE).display(),
            identity.device_id()
        );
        text.push_str(&score_lines(&dims, overall.value()));
        emit(out, &text)?;
    }
    Ok(EXIT_OK)
}

fn score_lines(dims: &DimensionScores, overall: f64) -> String {
    format!(
        "  depth       {:.3}\n  thermal     {:.3}\n  audio_sync  {:.3}\n  motion      {:.3}\n  overall     {:.3}\n",
        dims.depth, dims.thermal, dims.audio_sync, dims.motion, overall
    )
}

fn manifest_json(m: &RealismManifest) -> Result<String, CliError> {
    let bytes = m.to_canonical().map_err(failure)?.into_vec();
    String::from_utf8(bytes).map_err(failure)
}

fn manifest_value(m: &RealismManifest) -> Result<serde_json::Value, CliError> {
    serde_json::from_str(&manifest_json(m)?).map_err(failure)
}

#[derive(Serialize)]
struct ReportJson<'a> {
    verdict: &'a str,
    signature_valid: bool,
    image_hash_match: bool,
    device_trusted: bool,
    manifest: Option<serde_json::Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<&'a str>,
}

fn cmd_verify(
    image: &Path,
    sidecar: &Path,
    registry: &Path,
    json: bool,
    out: &mut dyn Write,
) -> CliResult {
    let image = read_input(image, "image")?;
    let sidecar = read_input(sidecar, "sidecar")?;
    let registry = load_registry(&read_input(registry, "registry")?).map_err(failure)?;
    let report = verify(&image, &sidecar, &registry);

    if json {
        let view = ReportJson {
            verdict: report.verdict.as_str(),
            signature_valid: report.signature_valid,
            image_hash_match: report.image_hash_match,
            device_trusted: report.device_trusted,
            manifest: report.manifest.as_ref().map(manifest_value).transpose()?,
            detail: report.detail.as_deref(),
        };
        emit(out, &serde_json::to_string(&view).map_err(failure)?)?;
        emit(out, "\n")?;
    } else {
        let mut text = format!(
            "verdict: {}\nsignature_valid: {}\nimage_hash_match: {}\ndevice_trusted: {}\n",
            report.verdict, report.signature_valid, report.image_hash_match, report.device_trusted
        );
        if let Some(m) = &report.manifest {
            text.push_str(&format!(
                "device_id: {}\noverall: {}\n",
                m.device_id,
                milli(m.scores.overall)
            ));
        }
        if let Some(d) = &report.detail {
            text.push_str(&format!("detail: {d}\n"));
        }
        emit(out, &text)?;
    }
    Ok(if report.verdict == Verdict::Authentic {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}

fn milli(v: u16) -> String {
    format!("{}.{:03}", v / 1000, v % 1000)
}

fn cmd_inspect(sidecar: &Path, json: bool, out: &mut dyn Write) -> CliResult {
    let bytes = read_input(sidecar, "sidecar")?;
    let parsed = read_sidecar(&bytes).map_err(|e| failure(format!("malformed sidecar: {e}")))?;
    if json {
        let text = String::from_utf8(parsed.manifest_bytes).map_err(failure)?;
        emit(out, &text)?;
        emit(out, "\n")?;
        return Ok(EXIT_OK);
    }
    let m = &parsed.manifest;
    let s = &m.scores;
    let mut text = format!(
        "device_id:      {}\ntimestamp_unix: {}\n",
        m.device_id, m.timestamp_unix
    );
    match m.location {
        Some(loc) => text.push_str(&format!(
            "location:       {} {} (micro-degrees)\n",
            loc.lat_microdeg(),
            loc.lon_microdeg()
        )),
        None => text.push_str("location:       -\n"),
    }
    text.push_str(&format!(
        "scores:\n  depth       {}\n  thermal     {}\n  audio_sync  {}\n  motion      {}\n  overall     {}\n",
        milli(s.depth),
        milli(s.thermal),
        milli(s.audio_sync),
        milli(s.motion),
        milli(s.overall)
    ));
    text.push_str(&format!(
        "image_sha256:   {}\nsignature:      {}\n(signature not verified)\n",
        m.image_sha256,
        hex::encode(parsed.signature)
    ));
    emit(out, &text)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Serialize)]
struct BenchRow {
    seed: u64,
    scenario: &'static str,
    depth: f64,
    thermal: f64,
    audio_sync: f64,
    motion: f64,
    overall: f64,
}

#[derive(Debug, Serialize)]
struct BenchMean {
    scenario: &'static str,
    runs: usize,
    depth: f64,
    thermal: f64,
    audio_sync: f64,
    motion: f64,
    overall: f64,
}

#[derive(Debug, Serialize)]
struct BenchReport {
    rows: Vec<BenchRow>,
    means: Vec<BenchMean>,
}

fn bench_rows(seeds: SeedRange) -> Result<Vec<BenchRow>, CliError> {
    let params = ScenarioParams::default();
    let scoring = ScoringParams::default();
    let mut rows = Vec::new();
    for seed in seeds.first..=seeds.last {
        for scenario in Scenario::ALL {
            let capture = scenario.generate(seed, &params).map_err(failure)?;
            let (d, o) = score_capture(&capture, &scoring).map_err(scoring_error)?;
            rows.push(BenchRow {
                seed,
                scenario: scenario.name(),
                depth: d.depth,
                thermal: d.thermal,
                audio_sync: d.audio_sync,
                motion: d.motion,
                overall: o.value(),
            });
        }
    }
    Ok(rows)
}

fn bench_means(rows: &[BenchRow]) -> Vec<BenchMean> {
    Scenario::ALL
        .into_iter()
        .map(|sc| {
            let mine: Vec<&BenchRow> = rows.iter().filter(|r| r.scenario == sc.name()).collect();
            let n = mine.len().max(1) as f64;
            let mean = |f: fn(&BenchRow) -> f64| mine.iter().map(|r| f(r)).sum::<f64>() / n;
            BenchMean {
                scenario: sc.name(),
                runs: mine.len(),
                depth: mean(|r| r.depth),
                thermal: mean(|r| r.thermal),
                audio_sync: mean(|r| r.audio_sync),
                motion: mean(|r| r.motion),
                overall: mean(|r| r.overall),
            }
        })
        .collect()
}

fn cmd_bench(seeds: SeedRange, json: bool, out: &mut dyn Write) -> CliResult {
    let rows = bench_rows(seeds)?;
    let report = BenchReport {
        means: bench_means(&rows),
        rows,
    };
    if json {
        emit(out, &serde_json::to_string(&report).map_err(failure)?)?;
        emit(out, "\n")?;
        return Ok(EXIT_OK);
    }
    let mut text = format!(
        "{:>6}  {:<14} {:>7} {:>7} {:>10} {:>7} {:>7}\n",
        "seed", "scenario", "depth", "thermal", "audio_sync", "motion", "overall"
    );
    for r in &report.rows {
        text.push_str(&format!(
            "{:>6}  {:<14} {:>7.3} {:>7.3} {:>10.3} {:>7.3} {:>7.3}\n",
            r.seed, r.scenario, r.depth, r.thermal, r.audio_sync, r.motion, r.overall
        ));
    }
    text.push('\n');
    for m in &report.means {
        text.push_str(&format!(
            "{:>6}  {:<14} {:>7.3} {:>7.3} {:>10.3} {:>7.3} {:>7.3}\n",
            "mean", m.scenario, m.depth, m.thermal, m.audio_sync, m.motion, m.overall
        ));
    }
    emit(out, &text)?;
    Ok(EXIT_OK)
}
