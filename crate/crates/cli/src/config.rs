//! Run configuration: a TOML file with `[code]`, `[decoder]`,
//! `[calibration]`, `[channel]` and `[run]` sections. Unknown keys are
//! rejected.

use std::path::{Path, PathBuf};

use gpcb_core::interleaver::{Interleaver, InterleaverKind};
use gpcb_core::soft_output::{CalibrationSpec, DEFAULT_BINS};
use gpcb_core::turbo::OutputTap;
use gpcb_core::{code_by_name, CyclicCode, DecoderConfig, GpcbCode, Threshold, TurboConfig};
use serde::Deserialize;

use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_VAR: &str = "GPCB_OUTPUT_DIR";

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub code: CodeSection,
    #[serde(default)]
    pub decoder: DecoderSection,
    #[serde(default)]
    pub calibration: CalibrationSection,
    #[serde(default)]
    pub channel: ChannelSection,
    #[serde(default)]
    pub run: RunSection,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    Gpcb,
    Component,
    Uncoded,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSection {
    #[serde(default = "default_construction")]
    pub construction: Construction,
    /// Registered component name (see `gpcb codes`); also the uncoded frame
    /// length source.
    pub component: Option<String>,
    /// Second component; defaults to `component`.
    pub component2: Option<String>,
    #[serde(default = "one")]
    pub m: usize,
    #[serde(default = "default_interleaver")]
    pub interleaver: String,
    /// Rows of the interleaver matrix; defaults to `m`.
    pub interleaver_rows: Option<usize>,
    #[serde(default)]
    pub interleaver_seed: u64,
    /// Frame length for `construction = "uncoded"`.
    pub length: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecoderSection {
    #[serde(default = "default_p")]
    pub p: usize,
    pub max_shifts: Option<usize>,
    #[serde(default = "yes")]
    pub threshold_enabled: bool,
    #[serde(default = "default_slack")]
    pub threshold_slack: f64,
    /// Stop at candidates that provably beat every other codeword.
    #[serde(default = "yes")]
    pub optimality_stop: bool,
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_tap")]
    pub output_tap: String,
    #[serde(default)]
    pub stop_on_convergence: bool,
}

impl Default for DecoderSection {
    fn default() -> Self {
        DecoderSection {
            p: default_p(),
            max_shifts: None,
            threshold_enabled: true,
            threshold_slack: default_slack(),
            optimality_stop: true,
            iterations: default_iterations(),
            output_tap: default_tap(),
            stop_on_convergence: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationSection {
    #[serde(default = "default_calibration_grid")]
    pub ebn0: Vec<f64>,
    #[serde(default = "default_calibration_frames")]
    pub frames_per_point: usize,
    #[serde(default = "default_bins")]
    pub bins: usize,
    #[serde(default = "one_u64")]
    pub seed: u64,
    /// Directory of persisted tables; defaults to `<output dir>/tables`.
    pub table_dir: Option<PathBuf>,
    /// Calibrate missing tables instead of failing.
    #[serde(default)]
    pub auto_calibrate: bool,
    /// One table per simulated Eb/N0 instead of one pooled table.
    #[serde(default)]
    pub per_snr: bool,
}

impl Default for CalibrationSection {
    fn default() -> Self {
        CalibrationSection {
            ebn0: default_calibration_grid(),
            frames_per_point: default_calibration_frames(),
            bins: DEFAULT_BINS,
            seed: 1,
            table_dir: None,
            auto_calibrate: false,
            per_snr: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    #[serde(default)]
    pub ebn0: Vec<f64>,
    #[serde(default = "one_u64")]
    pub seed: u64,
    #[serde(default = "default_max_frames")]
    pub max_frames: u64,
    #[serde(default = "default_target")]
    pub target_bit_errors: u64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        ChannelSection {
            ebn0: Vec::new(),
            seed: 1,
            max_frames: default_max_frames(),
            target_bit_errors: default_target(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub output: Option<PathBuf>,
    /// Per-frame `frame,iteration,bit_errors` rows.
    pub trace: Option<PathBuf>,
    /// Worker threads; defaults to the machine's parallelism.
    pub threads: Option<usize>,
}

fn default_construction() -> Construction {
    Construction::Gpcb
}
fn one() -> usize {
    1
}
fn one_u64() -> u64 {
    1
}
fn yes() -> bool {
    true
}
fn default_interleaver() -> String {
    "s_random".into()
}
fn default_p() -> usize {
    DecoderConfig::default().p
}
fn default_slack() -> f64 {
    Threshold::DEFAULT_SLACK
}
fn default_iterations() -> usize {
    TurboConfig::DEFAULT_ITERATIONS
}
fn default_tap() -> String {
    "sum".into()
}
fn default_calibration_grid() -> Vec<f64> {
    vec![1.0, 2.0, 3.0, 4.0, 5.0]
}
fn default_calibration_frames() -> usize {
    10_000
}
fn default_bins() -> usize {
    DEFAULT_BINS
}
fn default_max_frames() -> u64 {
    100_000
}
fn default_target() -> u64 {
    gpcb_core::ChannelConfig::DEFAULT_TARGET_BIT_ERRORS
}

fn bad(key: &str, detail: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{key}: {detail}"))
}

/// The code a configuration describes.
#[derive(Clone, Debug)]
pub enum CodeChoice {
    Gpcb(GpcbCode),
    Component(CyclicCode),
    Uncoded(usize),
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.code_choice()?;
        self.turbo_config()?;
        let c = &self.calibration;
        if c.ebn0.is_empty() || c.ebn0.iter().any(|v| !v.is_finite()) {
            return Err(bad(
                "calibration.ebn0",
                "expected a nonempty list of finite values",
            ));
        }
        if c.frames_per_point < CalibrationSpec::MIN_FRAMES {
            return Err(bad(
                "calibration.frames_per_point",
                format!("must be at least {}", CalibrationSpec::MIN_FRAMES),
            ));
        }
        if c.bins < 2 {
            return Err(bad("calibration.bins", "must be at least 2"));
        }
        if self.channel.ebn0.iter().any(|v| v.is_nan()) {
            return Err(bad("channel.ebn0", "NaN is not an Eb/N0 value"));
        }
        if self.channel.max_frames == 0 {
            return Err(bad("channel.max_frames", "must be at least 1"));
        }
        if self.run.threads == Some(0) {
            return Err(bad("run.threads", "must be at least 1"));
        }
        Ok(())
    }

    fn component(&self, key: &str, name: Option<&String>) -> Result<CyclicCode, CliError> {
        let name = name.ok_or_else(|| bad(key, "missing required key"))?;
        code_by_name(name).map_err(|e| bad(key, e))
    }

    pub fn code_choice(&self) -> Result<CodeChoice, CliError> {
        let c = &self.code;
        match c.construction {
            Construction::Uncoded => {
                let len = c
                    .length
                    .ok_or_else(|| bad("code.length", "required for uncoded frames"))?;
                if len == 0 {
                    return Err(bad("code.length", "must be at least 1"));
                }
                Ok(CodeChoice::Uncoded(len))
            }
            Construction::Component => Ok(CodeChoice::Component(
                self.component("code.component", c.component.as_ref())?,
            )),
            Construction::Gpcb => {
                let c1 = self.component("code.component", c.component.as_ref())?;
                let c2 = match &c.component2 {
                    Some(_) => self.component("code.component2", c.component2.as_ref())?,
                    None => c1.clone(),
                };
                if c.m == 0 {
                    return Err(bad("code.m", "must be at least 1"));
                }
                let kind: InterleaverKind = c
                    .interleaver
                    .parse()
                    .map_err(|e| bad("code.interleaver", e))?;
                let n = c.m * c1.k();
                let rows = c.interleaver_rows.unwrap_or(c.m);
                if rows == 0 || !n.is_multiple_of(rows) {
                    return Err(bad(
                        "code.interleaver_rows",
                        format!("rows x cols must equal N = {n}; {rows} rows do not divide it"),
                    ));
                }
                let il = Interleaver::new(kind, rows, n / rows, c.interleaver_seed)
                    .map_err(|e| bad("code.interleaver", e))?;
                let g = GpcbCode::new(c1, c2, c.m, il).map_err(|e| bad("code", e))?;
                Ok(CodeChoice::Gpcb(g))
            }
        }
    }

    pub fn decoder_config(&self) -> DecoderConfig {
        let d = &self.decoder;
        DecoderConfig {
            p: d.p,
            max_shifts: d.max_shifts,
            threshold: if d.threshold_enabled {
                Threshold::Adaptive {
                    slack: d.threshold_slack,
                }
            } else {
                Threshold::Disabled
            },
            optimality_stop: d.optimality_stop,
        }
    }

    pub fn turbo_config(&self) -> Result<TurboConfig, CliError> {
        let d = &self.decoder;
        if d.iterations == 0 {
            return Err(bad("decoder.iterations", "must be at least 1"));
        }
        if !d.threshold_slack.is_finite() {
            return Err(bad("decoder.threshold_slack", "must be finite"));
        }
        let output_tap = match d.output_tap.as_str() {
            "sum" => OutputTap::Sum,
            "last_decision" => OutputTap::LastDecision,
            other => {
                return Err(bad(
                    "decoder.output_tap",
                    format!("unknown tap {other:?}; accepted: sum, last_decision"),
                ))
            }
        };
        let cfg = self.decoder_config();
        let components: Vec<CyclicCode> = match self.code_choice()? {
            CodeChoice::Gpcb(g) => vec![g.c1().clone(), g.c2().clone()],
            CodeChoice::Component(c) => vec![c],
            CodeChoice::Uncoded(_) => vec![],
        };
        for c in &components {
            cfg.validate(c).map_err(|e| bad("decoder", e))?;
        }
        Ok(TurboConfig {
            max_iterations: d.iterations,
            component: cfg,
            output_tap,
            stop_on_convergence: d.stop_on_convergence,
        })
    }

    /// Calibration recipe, optionally restricted to a single Eb/N0.
    pub fn calibration_spec(&self, at: Option<f64>) -> CalibrationSpec {
        let c = &self.calibration;
        CalibrationSpec {
            ebn0_grid: at.map_or_else(|| c.ebn0.clone(), |e| vec![e]),
            frames_per_point: c.frames_per_point,
            bins: c.bins,
            seed: c.seed,
        }
    }

    pub fn output_dir() -> PathBuf {
        std::env::var_os(OUTPUT_DIR_VAR).map_or_else(|| PathBuf::from("."), PathBuf::from)
    }

    /// Relative paths are taken from the output directory.
    pub fn resolve(path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            Self::output_dir().join(path)
        }
    }

    pub fn table_dir(&self) -> PathBuf {
        match &self.calibration.table_dir {
            Some(d) => Self::resolve(d),
            None => Self::output_dir().join("tables"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[code]\ncomponent = \"bch-63-51\"\nm = 10\n[channel]\nebn0 = [2.0, 3.0]\n[run]\noutput = \"out.csv\"\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(cfg.decoder.iterations, 6);
        assert_eq!(cfg.decoder.p, 4);
        assert_eq!(cfg.code.interleaver, "s_random");
        assert_eq!(cfg.channel.target_bit_errors, 100);
        assert_eq!(cfg, RunConfig::parse(MINIMAL).unwrap());
        let bare = RunConfig::parse("[code]\ncomponent = \"qr-7-4\"\n").unwrap();
        assert_eq!(bare.channel.max_frames, 100_000);
        assert_eq!(bare.channel.target_bit_errors, 100);
        match cfg.code_choice().unwrap() {
            CodeChoice::Gpcb(g) => assert_eq!((g.len(), g.info_len()), (750, 510)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_interleaver_lists_supported_kinds() {
        let text = MINIMAL.replace("m = 10", "m = 10\ninterleaver = \"spiral\"");
        let err = RunConfig::parse(&text).unwrap_err().to_string();
        assert!(err.contains("code.interleaver"), "{err}");
        for k in [
            "identity", "block", "diagonal", "cyclic", "helical", "random", "s_random",
        ] {
            assert!(err.contains(k), "{err}");
        }
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(RunConfig::parse(&MINIMAL.replace("m = 10", "m = 10\nspeed = 3")).is_err());
        assert!(RunConfig::parse(&format!("{MINIMAL}colour = 1\n")).is_err());
        let rows = MINIMAL.replace("m = 10", "m = 10\ninterleaver_rows = 7");
        assert!(RunConfig::parse(&rows)
            .unwrap_err()
            .to_string()
            .contains("interleaver_rows"));
        assert!(RunConfig::parse(&MINIMAL.replace("bch-63-51", "bch-63-50")).is_err());
        assert!(RunConfig::parse("[channel]\nebn0 = [1.0]\n").is_err());
        let tap = format!("{MINIMAL}[decoder]\noutput_tap = \"middle\"\n");
        assert!(RunConfig::parse(&tap).is_err());
        let p = format!("{MINIMAL}[decoder]\np = 60\n");
        assert!(RunConfig::parse(&p).is_err());
    }

    #[test]
    fn interleaver_rows_may_differ_from_m() {
        let text = MINIMAL.replace(
            "m = 10",
            "m = 10\ninterleaver = \"block\"\ninterleaver_rows = 30",
        );
        match RunConfig::parse(&text).unwrap().code_choice().unwrap() {
            CodeChoice::Gpcb(g) => {
                assert_eq!((g.interleaver().rows(), g.interleaver().cols()), (30, 17))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn shipped_configs_are_valid() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let mut seen = 0;
        for entry in std::fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "toml") {
                let cfg =
                    RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
                assert!(!cfg.channel.ebn0.is_empty(), "{}", path.display());
                assert!(cfg.run.output.is_some(), "{}", path.display());
                seen += 1;
            }
        }
        assert!(seen >= 10, "{seen}");
    }
}
