use std::fmt;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use ellhyp::combinatorics::MultiIndex;
use ellhyp::identities::{IdentityId, SizeRanges, SuiteConfig};
use ellhyp::KernelVariant;
use serde::{Deserialize, Deserializer};

use crate::{Failure, EXIT_INPUT};

pub const SEED_ENV: &str = "ELLHYP_SEED";
pub const DEFAULT_OUT: &str = "reports";

/// `lo..hi` (inclusive) or a single value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Span(pub RangeInclusive<usize>);

impl FromStr for Span {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("expected `lo..hi` or an integer, got `{s}`"));
        let (lo, hi) = match s.split_once("..") {
            Some((lo, hi)) => (num(lo)?, num(hi.strip_prefix('=').unwrap_or(hi))?),
            None => {
                let v = num(s)?;
                (v, v)
            }
        };
        if lo > hi {
            return Err(format!("empty range `{s}`"));
        }
        Ok(Span(lo..=hi))
    }
}

/// `all` or one named item.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pick<T> {
    All,
    One(T),
}

impl<T: FromStr> FromStr for Pick<T>
where
    T::Err: fmt::Display,
{
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "all" {
            Ok(Pick::All)
        } else {
            s.parse::<T>().map(Pick::One).map_err(|e| e.to_string())
        }
    }
}

fn expand<T: Copy>(picks: &[Pick<T>], all: &[T]) -> Vec<T> {
    if picks.iter().any(|p| matches!(p, Pick::All)) {
        return all.to_vec();
    }
    picks
        .iter()
        .filter_map(|p| match p {
            Pick::One(t) => Some(*t),
            Pick::All => None,
        })
        .collect()
}

fn from_text<'de, D, T>(d: D) -> Result<T, D::Error>
where
    D: Deserializer<'de>,
    T: FromStr,
    T::Err: fmt::Display,
{
    String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
}

macro_rules! text_deserialize {
    ($($t:ty),*) => {$(
        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                from_text(d)
            }
        }
    )*};
}

text_deserialize!(Span, Pick<IdentityId>, Pick<KernelVariant>);

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GaugeMode {
    Random,
    Off,
}

#[derive(Args, Debug, Default)]
pub struct VerifyArgs {
    /// JSON run configuration; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Identity to verify, or `all`; repeatable.
    #[arg(long = "identity")]
    pub identities: Vec<Pick<IdentityId>>,
    /// rational, trigonometric, elliptic or all; repeatable.
    #[arg(long = "kernel")]
    pub kernels: Vec<Pick<KernelVariant>>,
    #[arg(long = "m")]
    pub m: Option<Span>,
    #[arg(long = "n")]
    pub n: Option<Span>,
    /// Terminating degree range.
    #[arg(long = "N")]
    pub big_n: Option<Span>,
    /// Matrix size range for the Cauchy family.
    #[arg(long = "M")]
    pub big_m: Option<Span>,
    /// Multi-index for termination (B), e.g. `2,1,3`.
    #[arg(long)]
    pub alpha: Option<MultiIndex>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Master seed; falls back to ELLHYP_SEED.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Tolerance for every identity instead of the per-kernel defaults.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long, value_enum)]
    pub gauge: Option<GaugeMode>,
    /// Directory for reports.jsonl and summary.csv.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Shift the balancing parameter off its constraint.
    #[arg(long)]
    pub break_balance: bool,
}

/// Contents of a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub identity: Option<Vec<Pick<IdentityId>>>,
    pub kernel: Option<Vec<Pick<KernelVariant>>>,
    pub m: Option<Span>,
    pub n: Option<Span>,
    #[serde(rename = "N")]
    pub big_n: Option<Span>,
    #[serde(rename = "M")]
    pub big_m: Option<Span>,
    #[serde(default, deserialize_with = "alpha_from_text")]
    pub alpha: Option<MultiIndex>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub gauge: Option<GaugeMode>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub break_balance: Option<bool>,
}

fn alpha_from_text<'de, D: Deserializer<'de>>(d: D) -> Result<Option<MultiIndex>, D::Error> {
    from_text(d).map(Some)
}

pub fn read_file_config(path: &Path) -> Result<FileConfig, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| Failure::new(EXIT_INPUT, format!("{}: field `{}`: {}", path.display(), e.path(), e.inner())))
}

/// A fully resolved verification run.
#[derive(Debug)]
pub struct RunConfig {
    pub suite: SuiteConfig,
    pub out: PathBuf,
    pub jobs: Option<usize>,
}

fn seed_from_env(value: Option<String>) -> Result<Option<u64>, Failure> {
    value
        .map(|v| {
            v.trim()
                .parse()
                .map_err(|_| Failure::new(EXIT_INPUT, format!("{SEED_ENV}: expected an unsigned integer, got `{v}`")))
        })
        .transpose()
}

/// Flags override the file, the file overrides defaults.
pub fn resolve(args: VerifyArgs, env_seed: Option<String>) -> Result<RunConfig, Failure> {
    let file = match &args.config {
        Some(path) => read_file_config(path)?,
        None => FileConfig::default(),
    };
    let mut suite = SuiteConfig::default();
    let ranges = SizeRanges::default();
    let identities = if !args.identities.is_empty() { Some(args.identities) } else { file.identity };
    if let Some(picks) = identities {
        suite.ids = expand(&picks, &IdentityId::ALL);
    }
    let kernels = if !args.kernels.is_empty() { Some(args.kernels) } else { file.kernel };
    if let Some(picks) = kernels {
        suite.kernels = expand(&picks, &KernelVariant::ALL);
    }
    let pick = |flag: Option<Span>, file: Option<Span>, default: RangeInclusive<usize>| flag.or(file).map_or(default, |s| s.0);
    suite.ranges = SizeRanges {
        m: pick(args.m, file.m, ranges.m),
        n: pick(args.n, file.n, ranges.n),
        big_n: pick(args.big_n, file.big_n, ranges.big_n),
        big_m: pick(args.big_m, file.big_m, ranges.big_m),
        alpha: args.alpha.or(file.alpha),
    };
    suite.trials = args.trials.or(file.trials).unwrap_or(suite.trials);
    suite.seed = match args.seed.or(file.seed) {
        Some(s) => s,
        None => seed_from_env(env_seed)?.unwrap_or(suite.seed),
    };
    suite.tol = args.tol.or(file.tol);
    if let Some(tol) = suite.tol {
        if !(tol > 0.0) {
            return Err(Failure::new(EXIT_INPUT, format!("tol: must be positive, got {tol}")));
        }
    }
    suite.random_gauge = args.gauge.or(file.gauge).unwrap_or(GaugeMode::Random) == GaugeMode::Random;
    suite.break_balance = args.break_balance || file.break_balance.unwrap_or(false);
    let jobs = args.jobs.or(file.jobs);
    if jobs == Some(0) {
        return Err(Failure::new(EXIT_INPUT, "jobs: must be at least 1"));
    }
    Ok(RunConfig {
        suite,
        out: args.out.or(file.out).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
        jobs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spans() {
        assert_eq!("2..5".parse::<Span>().unwrap(), Span(2..=5));
        assert_eq!("2..=5".parse::<Span>().unwrap(), Span(2..=5));
        assert_eq!("3".parse::<Span>().unwrap(), Span(3..=3));
        assert!("5..2".parse::<Span>().is_err());
        assert!("a..b".parse::<Span>().is_err());
    }

    #[test]
    fn picks() {
        assert_eq!("all".parse::<Pick<IdentityId>>().unwrap(), Pick::All);
        assert_eq!("duality_phi".parse::<Pick<IdentityId>>().unwrap(), Pick::One(IdentityId::DualityPhi));
        assert!("duality".parse::<Pick<IdentityId>>().is_err());
        assert_eq!(expand(&[Pick::One(KernelVariant::Elliptic), Pick::All], &KernelVariant::ALL).len(), 3);
    }

    #[test]
    fn precedence() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"identity": ["cauchy_det"], "seed": 5, "trials": 2, "M": "2..3", "gauge": "off"}"#).unwrap();
        let args = VerifyArgs {
            config: Some(path.clone()),
            trials: Some(7),
            ..VerifyArgs::default()
        };
        let cfg = resolve(args, Some("9".into())).unwrap();
        assert_eq!(cfg.suite.ids, vec![IdentityId::CauchyDet]);
        assert_eq!(cfg.suite.trials, 7);
        assert_eq!(cfg.suite.seed, 5);
        assert_eq!(cfg.suite.ranges.big_m, 2..=3);
        assert!(!cfg.suite.random_gauge);
        let env_only = resolve(VerifyArgs::default(), Some("9".into())).unwrap();
        assert_eq!(env_only.suite.seed, 9);
        assert!(resolve(VerifyArgs::default(), Some("nine".into())).is_err());
    }

    #[test]
    fn file_errors_name_the_field() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"identity": ["cauchy_det", "nope"]}"#).unwrap();
        let err = read_file_config(&path).unwrap_err();
        assert_eq!(err.code, EXIT_INPUT);
        assert!(err.message.contains("identity[1]"), "{}", err.message);
        std::fs::write(&path, r#"{"kernels": "all"}"#).unwrap();
        assert!(read_file_config(&path).unwrap_err().message.contains("kernels"));
    }
}
