use std::collections::BTreeMap;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use gpcb_core::sim::{records_to_csv, simulate_point, trace_to_csv};
use gpcb_core::{
    bpsk_modulate, calibrate_confidence, shannon_limit, sigma_from_ebn0, BerRecord, Capacity,
    ChannelConfig, ConfidenceTable, CyclicCode, FrameCodec, HardWord, SihoDecoder, TurboDecoder,
    Uncoded, REGISTERED_CODES,
};

use crate::config::{CodeChoice, RunConfig};
use crate::{CliError, WordFormat};

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn io_err(path: &Path, e: io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

pub fn codes() -> Result<(), CliError> {
    let mut out = String::from("name,n,k,d,rate\n");
    for name in REGISTERED_CODES {
        let c = gpcb_core::code_by_name(name)?;
        out += &format!(
            "{},{},{},{},{:.6}\n",
            c.name(),
            c.n(),
            c.k(),
            c.d(),
            c.rate()
        );
    }
    print!("{out}");
    Ok(())
}

fn parse_rate(text: &str) -> Result<f64, CliError> {
    let bad = || {
        CliError::Config(format!(
            "--rate: cannot parse {text:?}; expected a number in (0, 1) or a/b"
        ))
    };
    let rate = match text.split_once('/') {
        Some((a, b)) => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            a / b
        }
        None => text.trim().parse().map_err(|_| bad())?,
    };
    if !(rate > 0.0 && rate < 1.0) {
        return Err(CliError::Config(format!(
            "--rate: {rate} must lie in (0, 1)"
        )));
    }
    Ok(rate)
}

pub fn limits(rate: &str) -> Result<(), CliError> {
    let rate = parse_rate(rate)?;
    println!("rate,unconstrained_db,bpsk_db");
    println!(
        "{rate},{},{}",
        shannon_limit(rate, Capacity::Unconstrained)?,
        shannon_limit(rate, Capacity::Bpsk)?
    );
    Ok(())
}

/// Distinct component codes of a configuration, in order.
fn components(choice: &CodeChoice) -> Vec<CyclicCode> {
    match choice {
        CodeChoice::Gpcb(g) => {
            let mut v = vec![g.c1().clone()];
            if g.c2().name() != g.c1().name() {
                v.push(g.c2().clone());
            }
            v
        }
        CodeChoice::Component(c) => vec![c.clone()],
        CodeChoice::Uncoded(_) => Vec::new(),
    }
}

/// Loads (or, with `force` or auto-calibration, computes) the table of `code`
/// for calibration point `at` (pooled grid when `None`).
fn table_for(
    cfg: &RunConfig,
    config_path: &Path,
    code: &CyclicCode,
    at: Option<f64>,
    force: bool,
) -> Result<Arc<ConfidenceTable>, CliError> {
    let dcfg = cfg.decoder_config();
    let spec = cfg.calibration_spec(at);
    let dir = cfg.table_dir();
    let path = spec.table_path(&dir, code, &dcfg);
    if !force && path.exists() {
        let t = ConfidenceTable::load(&path)?;
        if t.key() != spec.key(code, &dcfg) {
            return Err(runtime(format!(
                "{} was calibrated for a different recipe; rerun `gpcb calibrate --config {} --force`",
                path.display(),
                config_path.display()
            )));
        }
        return Ok(Arc::new(t));
    }
    if !force && !cfg.calibration.auto_calibrate {
        return Err(runtime(format!(
            "no confidence table for {} at {}; run `gpcb calibrate --config {}` first (or set calibration.auto_calibrate = true)",
            code.name(),
            path.display(),
            config_path.display()
        )));
    }
    eprintln!(
        "calibrating {} (p = {}, {} x {} frames)",
        code.name(),
        dcfg.p,
        spec.ebn0_grid.len(),
        spec.frames_per_point
    );
    let t = calibrate_confidence(code, &dcfg, &spec)?;
    std::fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    t.save(&path)?;
    eprintln!("wrote {}", path.display());
    Ok(Arc::new(t))
}

fn tables(
    cfg: &RunConfig,
    config_path: &Path,
    choice: &CodeChoice,
    ebn0: Option<f64>,
) -> Result<BTreeMap<String, Arc<ConfidenceTable>>, CliError> {
    let at = if cfg.calibration.per_snr { ebn0 } else { None };
    let mut out = BTreeMap::new();
    for c in components(choice) {
        let t = table_for(cfg, config_path, &c, at, false)?;
        out.insert(c.name().to_string(), t);
    }
    Ok(out)
}

enum Codec {
    Turbo(Box<TurboDecoder>),
    Component(SihoDecoder),
    Uncoded(Uncoded),
}

impl Codec {
    fn as_dyn(&self) -> &dyn FrameCodec {
        match self {
            Codec::Turbo(d) => d.as_ref(),
            Codec::Component(d) => d,
            Codec::Uncoded(d) => d,
        }
    }
}

/// Builds the decoder a configuration describes, with its tables bound.
fn codec(cfg: &RunConfig, config_path: &Path, ebn0: Option<f64>) -> Result<Codec, CliError> {
    let choice = cfg.code_choice()?;
    let turbo = cfg.turbo_config()?;
    Ok(match choice {
        CodeChoice::Gpcb(ref g) => {
            let t = tables(cfg, config_path, &choice, ebn0)?;
            let pair = [t.get(g.c1().name()).cloned(), t.get(g.c2().name()).cloned()];
            Codec::Turbo(Box::new(TurboDecoder::new(g.clone(), turbo, pair)?))
        }
        CodeChoice::Component(c) => Codec::Component(SihoDecoder::new(c, turbo.component)?),
        CodeChoice::Uncoded(len) => Codec::Uncoded(Uncoded { len }),
    })
}

fn with_threads<T: Send>(cfg: &RunConfig, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match cfg.run.threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(runtime)?;
            Ok(pool.install(f))
        }
    }
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| io_err(Path::new("<stdout>"), e)),
        Some(p) => {
            let p = RunConfig::resolve(p);
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
            }
            std::fs::write(&p, text).map_err(|e| io_err(&p, e))?;
            eprintln!("wrote {}", p.display());
            Ok(())
        }
    }
}

pub fn calibrate(config_path: &Path, force: bool) -> Result<(), CliError> {
    let cfg = RunConfig::load(config_path)?;
    let choice = cfg.code_choice()?;
    let comps = components(&choice);
    if comps.is_empty() {
        return Err(CliError::Config(
            "code.construction = \"uncoded\" has no confidence table".into(),
        ));
    }
    let points: Vec<Option<f64>> = if cfg.calibration.per_snr {
        if cfg.channel.ebn0.is_empty() {
            return Err(CliError::Config(
                "channel.ebn0: per_snr calibration needs the simulated Eb/N0 list".into(),
            ));
        }
        cfg.channel.ebn0.iter().map(|&e| Some(e)).collect()
    } else {
        vec![None]
    };
    let dcfg = cfg.decoder_config();
    with_threads(&cfg, || {
        for c in &comps {
            for &at in &points {
                let path = cfg
                    .calibration_spec(at)
                    .table_path(&cfg.table_dir(), c, &dcfg);
                let fresh = force || !path.exists();
                table_for(&cfg, config_path, c, at, fresh)?;
                if !fresh {
                    eprintln!("up to date: {}", path.display());
                }
                println!("{}", path.display());
            }
        }
        Ok(())
    })?
}

fn channel(cfg: &RunConfig, ebn0: f64) -> ChannelConfig {
    ChannelConfig::new(ebn0, cfg.channel.seed, cfg.channel.max_frames)
        .with_target(cfg.channel.target_bit_errors)
}

fn progress(records: &[BerRecord]) {
    if let Some(r) = records.last() {
        eprintln!(
            "Eb/N0 {:.2} dB: {} frames, {} bit errors, BER {:.3e} at iteration {}",
            r.ebn0_db, r.frames, r.bit_errors, r.ber, r.iteration
        );
    }
}

pub fn simulate(
    config_path: &Path,
    ebn0: Option<f64>,
    output: Option<PathBuf>,
) -> Result<(), CliError> {
    let cfg = RunConfig::load(config_path)?;
    let ebn0 = match (ebn0, cfg.channel.ebn0.as_slice()) {
        (Some(e), _) => e,
        (None, [e]) => *e,
        (None, []) => {
            return Err(CliError::Config(
                "channel.ebn0: missing; give one value or pass --ebn0".into(),
            ))
        }
        (None, _) => {
            return Err(CliError::Config(
                "channel.ebn0: simulate runs a single point; pass --ebn0 or use `gpcb sweep`"
                    .into(),
            ))
        }
    };
    if ebn0.is_nan() {
        return Err(CliError::Config("--ebn0: NaN is not an Eb/N0 value".into()));
    }
    let codec = codec(&cfg, config_path, Some(ebn0))?;
    let keep_trace = cfg.run.trace.is_some();
    let point = with_threads(&cfg, || {
        simulate_point(codec.as_dyn(), &channel(&cfg, ebn0), keep_trace)
    })??;
    progress(&point.records);
    if let Some(t) = &cfg.run.trace {
        write_text(Some(t), &trace_to_csv(&point.trace))?;
    }
    write_text(
        output.as_deref().or(cfg.run.output.as_deref()),
        &records_to_csv(&point.records),
    )
}

pub fn sweep(config_path: &Path, output: Option<PathBuf>) -> Result<(), CliError> {
    let cfg = RunConfig::load(config_path)?;
    if cfg.channel.ebn0.is_empty() {
        return Err(CliError::Config(
            "channel.ebn0: sweep needs a nonempty Eb/N0 list".into(),
        ));
    }
    if cfg.run.trace.is_some() {
        eprintln!("note: run.trace is written by `gpcb simulate` only");
    }
    let mut records = Vec::new();
    let mut shared = None;
    for &e in &cfg.channel.ebn0 {
        let codec = match (&shared, cfg.calibration.per_snr) {
            (Some(_), false) => shared.take().expect("checked"),
            _ => codec(&cfg, config_path, Some(e))?,
        };
        let part = with_threads(&cfg, || {
            simulate_point(codec.as_dyn(), &channel(&cfg, e), false)
        })??;
        progress(&part.records);
        records.extend(part.records);
        shared = Some(codec);
    }
    write_text(
        output.as_deref().or(cfg.run.output.as_deref()),
        &records_to_csv(&records),
    )
}

fn read_lines(input: &Path) -> Result<Vec<String>, CliError> {
    let lines: io::Result<Vec<String>> = if input == Path::new("-") {
        io::stdin().lock().lines().collect()
    } else {
        let f = std::fs::File::open(input).map_err(|e| io_err(input, e))?;
        io::BufReader::new(f).lines().collect()
    };
    Ok(lines
        .map_err(|e| io_err(input, e))?
        .into_iter()
        .map(|l| l.trim().to_string())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .collect())
}

fn parse_word(
    line: &str,
    len: usize,
    format: WordFormat,
    lineno: usize,
) -> Result<HardWord, CliError> {
    let w = match format {
        WordFormat::Bin => HardWord::parse_binary(line),
        WordFormat::Hex => HardWord::parse_hex(line, len),
    }
    .map_err(|e| runtime(format!("line {lineno}: {e}")))?;
    if w.len() != len {
        return Err(runtime(format!(
            "line {lineno}: expected {len} bits, found {}",
            w.len()
        )));
    }
    Ok(w)
}

fn format_word(w: &HardWord, format: WordFormat) -> String {
    match format {
        WordFormat::Bin => w.to_binary_string(),
        WordFormat::Hex => w.to_hex_string(),
    }
}

type Encoder<'a> = dyn Fn(&[u8]) -> gpcb_core::Result<HardWord> + 'a;

pub fn encode(
    config_path: &Path,
    input: &Path,
    output: Option<&Path>,
    format: WordFormat,
) -> Result<(), CliError> {
    let cfg = RunConfig::load(config_path)?;
    let choice = cfg.code_choice()?;
    let (k, enc): (usize, Box<Encoder>) = match &choice {
        CodeChoice::Gpcb(g) => (g.info_len(), Box::new(|m| g.encode(m))),
        CodeChoice::Component(c) => (
            c.k(),
            Box::new(|m| c.encode_systematic(&HardWord::from(m.to_vec()))),
        ),
        CodeChoice::Uncoded(len) => (*len, Box::new(|m| Ok(HardWord::from(m.to_vec())))),
    };
    let mut out = String::new();
    for (i, line) in read_lines(input)?.iter().enumerate() {
        let msg = parse_word(line, k, format, i + 1)?;
        out += &format_word(&enc(msg.bits())?, format);
        out.push('\n');
    }
    write_text(output, &out)
}

pub fn decode(
    config_path: &Path,
    input: &Path,
    output: Option<&Path>,
    format: WordFormat,
    sigma: Option<f64>,
    ebn0: Option<f64>,
) -> Result<(), CliError> {
    let cfg = RunConfig::load(config_path)?;
    let codec = codec(&cfg, config_path, ebn0)?;
    let c = codec.as_dyn();
    let n = c.code_len();
    let sigma = match (sigma, ebn0) {
        (Some(s), _) if !(s >= 0.0 && s.is_finite()) => {
            return Err(CliError::Config(format!(
                "--sigma: {s} must be finite and nonnegative"
            )))
        }
        (Some(s), _) => Some(s),
        (None, Some(e)) => Some(sigma_from_ebn0(c.rate(), e)?),
        (None, None) => None,
    };
    let mut out = String::new();
    for (i, line) in read_lines(input)?.iter().enumerate() {
        let (r, s) = if line.contains(',') {
            let r = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<Result<Vec<f64>, _>>()
                .map_err(|e| runtime(format!("line {}: {e}", i + 1)))?;
            if r.len() != n {
                return Err(runtime(format!(
                    "line {}: expected {n} values, found {}",
                    i + 1,
                    r.len()
                )));
            }
            let s = sigma.ok_or_else(|| {
                CliError::Config("real-valued input needs --sigma or --ebn0".into())
            })?;
            (r, s)
        } else {
            let w = parse_word(line, n, format, i + 1)?;
            (bpsk_modulate(&w).into_values(), sigma.unwrap_or(0.0))
        };
        let res = c.decode(&r, s)?;
        let msg = res
            .decisions
            .last()
            .ok_or_else(|| runtime("decoder returned no decision"))?;
        out += &format_word(msg, format);
        out.push('\n');
    }
    write_text(output, &out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_parse_as_fractions_or_decimals() {
        assert!((parse_rate("51/75").unwrap() - 0.68).abs() < 1e-15);
        assert_eq!(parse_rate("0.5").unwrap(), 0.5);
        assert!(parse_rate("3/2").is_err());
        assert!(parse_rate("half").is_err());
    }
}
