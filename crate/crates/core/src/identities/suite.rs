//! Deterministic Cartesian sweeps over identities, kernels and sizes.

use std::io::Write;
use std::ops::RangeInclusive;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::evaluate::verify_identity;
use super::sample::{sample_parameters_with, SampleOptions};
use super::{IdentityId, Sizes, Status, VerificationReport};
use crate::combinatorics::MultiIndex;
use crate::error::{Error, Result};
use crate::kernel::{Gauge, KernelSpec, KernelVariant};

const GAUGE_STREAM: u64 = 0x6761_7567_6500_0001;
const GAUGE_ATTEMPTS: usize = 100;

/// Size ranges swept by [`run_suite`]; each identity keeps the ones it uses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SizeRanges {
    pub m: RangeInclusive<usize>,
    pub n: RangeInclusive<usize>,
    pub big_n: RangeInclusive<usize>,
    /// Matrix sizes for the Cauchy family.
    pub big_m: RangeInclusive<usize>,
    /// Fixed multi-index for termination (B); drawn per case when absent.
    pub alpha: Option<MultiIndex>,
}

impl Default for SizeRanges {
    fn default() -> Self {
        Self {
            m: 1..=2,
            n: 1..=2,
            big_n: 0..=3,
            big_m: 1..=4,
            alpha: None,
        }
    }
}

impl SizeRanges {
    /// Distinct valid size configurations for `id`, in sorted order.
    pub fn configs(&self, id: IdentityId) -> Vec<Sizes> {
        use IdentityId::*;
        let mut out = Vec::new();
        match id {
            CauchyDet | FSymmetry => out.extend(self.big_m.clone().map(|mm| Sizes::new(mm, 0, 0))),
            FCoefficientD => {
                for mm in self.big_m.clone() {
                    out.extend((0..=mm).map(|d| Sizes::new(mm, 0, d)));
                }
            }
            BaileyIB | BaileyIIB | BaileyIIW if self.alpha.is_some() => {
                out.push(Sizes::with_alpha(self.alpha.clone().expect("checked")));
            }
            JacksonSumEm2 => {
                for m in self.m.clone() {
                    out.extend(self.big_n.clone().map(|big_n| Sizes::new(m, 0, big_n)));
                }
            }
            _ => {
                for m in self.m.clone() {
                    for n in self.n.clone() {
                        for big_n in self.big_n.clone() {
                            out.push(Sizes::new(m, n, big_n));
                        }
                    }
                }
            }
        }
        let mut out: Vec<Sizes> = out.into_iter().filter_map(|s| s.canonical(id).ok()).collect();
        out.sort();
        out.dedup();
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub ids: Vec<IdentityId>,
    pub kernels: Vec<KernelVariant>,
    pub ranges: SizeRanges,
    pub trials: usize,
    pub seed: u64,
    /// Overrides the per-identity default tolerance.
    pub tol: Option<f64>,
    pub random_gauge: bool,
    pub break_balance: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            ids: IdentityId::ALL.to_vec(),
            kernels: KernelVariant::ALL.to_vec(),
            ranges: SizeRanges::default(),
            trials: 3,
            seed: 0,
            tol: None,
            random_gauge: true,
            break_balance: false,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Counter-based seed for one case.
fn case_seed(master: u64, coords: &[u64]) -> u64 {
    coords.iter().fold(splitmix64(master), |h, &c| splitmix64(h ^ splitmix64(c)))
}

fn random_gauge(rng: &mut ChaCha8Rng) -> Gauge {
    let mut disc = |radius: f64| {
        let r = radius * rng.gen::<f64>().sqrt();
        Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
    };
    let a = disc(0.5);
    let b = disc(0.5);
    let c = Complex64::from_polar(rng.gen_range(0.5..=2.0), rng.gen_range(0.0..std::f64::consts::TAU));
    Gauge { a, b, c }
}

/// The default kernel of `variant`, with a random gauge drawn from `seed`.
pub(crate) fn case_kernel(variant: KernelVariant, gauge: bool, seed: u64) -> Result<KernelSpec> {
    let base = KernelSpec::default_for(variant);
    if !gauge {
        return Ok(base);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ GAUGE_STREAM));
    let mut last = None;
    for _ in 0..GAUGE_ATTEMPTS {
        match base.with_gauge(random_gauge(&mut rng)) {
            Ok(k) => return Ok(k),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one attempt"))
}

struct Case {
    id: IdentityId,
    variant: KernelVariant,
    sizes: Sizes,
    seed: u64,
}

fn cases(cfg: &SuiteConfig) -> Vec<Case> {
    let mut out = Vec::new();
    for &id in &cfg.ids {
        for &variant in &cfg.kernels {
            if !id.applies_to(variant) {
                continue;
            }
            for (si, sizes) in cfg.ranges.configs(id).into_iter().enumerate() {
                for trial in 0..cfg.trials {
                    let coords = [id.index() as u64, variant as u64, si as u64, trial as u64];
                    out.push(Case {
                        id,
                        variant,
                        sizes: sizes.clone(),
                        seed: case_seed(cfg.seed, &coords),
                    });
                }
            }
        }
    }
    out
}

fn run_case(cfg: &SuiteConfig, case: &Case) -> VerificationReport {
    let start = Instant::now();
    let tol = cfg.tol.unwrap_or_else(|| case.id.default_tolerance(case.variant));
    let opts = SampleOptions {
        break_balance: cfg.break_balance,
    };
    let outcome = case_kernel(case.variant, cfg.random_gauge, case.seed)
        .and_then(|k| sample_parameters_with(case.id, &case.sizes, &k, case.seed, opts))
        .map_err(|e| (e, None))
        .and_then(|draw| verify_identity(case.id, draw.clone(), tol).map_err(|e| (e, Some(draw))));
    let mut report = match outcome {
        Ok(r) => r,
        Err((e, draw)) => {
            let mut r = VerificationReport::inconclusive(case.id, case.variant, case.sizes.clone(), case.seed, tol, &e);
            if !(e.is_resamplable() || matches!(e, Error::SamplingExhausted { .. })) {
                r.status = Status::Fail;
            }
            r.draw = draw;
            r
        }
    };
    report.wall_time = start.elapsed();
    report
}

/// Runs every case of the sweep; reports come back in case order.
pub fn run_suite(cfg: &SuiteConfig) -> Vec<VerificationReport> {
    cases(cfg).par_iter().map(|c| run_case(cfg, c)).collect()
}

/// Writes one JSON object per line.
pub fn write_jsonl<W: Write>(reports: &[VerificationReport], mut out: W) -> std::io::Result<()> {
    for r in reports {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AggregateRow {
    pub id: IdentityId,
    pub kernel: KernelVariant,
    pub m: usize,
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub trials: usize,
    pub passes: usize,
    pub max_rel_err: f64,
    /// Seconds.
    pub mean_wall_time: f64,
}

/// Pass counts per `(id, kernel, m, n, N)`, in order of first appearance.
pub fn aggregate(reports: &[VerificationReport]) -> Vec<AggregateRow> {
    let mut rows: Vec<(AggregateRow, Duration)> = Vec::new();
    for r in reports {
        let key = (r.id, r.kernel, r.sizes.m, r.sizes.n, r.sizes.big_n);
        let pos = rows
            .iter()
            .position(|(a, _)| (a.id, a.kernel, a.m, a.n, a.big_n) == key)
            .unwrap_or_else(|| {
                rows.push((
                    AggregateRow {
                        id: r.id,
                        kernel: r.kernel,
                        m: r.sizes.m,
                        n: r.sizes.n,
                        big_n: r.sizes.big_n,
                        trials: 0,
                        passes: 0,
                        max_rel_err: 0.0,
                        mean_wall_time: 0.0,
                    },
                    Duration::ZERO,
                ));
                rows.len() - 1
            });
        let (row, total) = &mut rows[pos];
        row.trials += 1;
        row.passes += usize::from(r.pass);
        if let Some(e) = r.rel_err {
            row.max_rel_err = row.max_rel_err.max(e);
        }
        *total += r.wall_time;
    }
    rows.into_iter()
        .map(|(mut row, total)| {
            row.mean_wall_time = total.as_secs_f64() / row.trials as f64;
            row
        })
        .collect()
}

pub fn write_csv<W: Write>(rows: &[AggregateRow], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_depend_on_every_coordinate() {
        let base = case_seed(42, &[1, 2, 3, 4]);
        assert_eq!(base, case_seed(42, &[1, 2, 3, 4]));
        for i in 0..4 {
            let mut c = [1u64, 2, 3, 4];
            c[i] += 1;
            assert_ne!(base, case_seed(42, &c));
        }
        assert_ne!(base, case_seed(43, &[1, 2, 3, 4]));
    }

    #[test]
    fn configs_respect_identity_shapes() {
        let r = SizeRanges {
            m: 0..=2,
            n: 0..=2,
            big_n: 1..=2,
            big_m: 1..=3,
            alpha: None,
        };
        assert_eq!(r.configs(IdentityId::CauchyDet).len(), 3);
        assert_eq!(r.configs(IdentityId::FCoefficientD).len(), 2 + 3 + 4);
        assert_eq!(r.configs(IdentityId::DualityPhi).len(), 2 * 2 * 2);
        assert_eq!(r.configs(IdentityId::FrenkelTuraev8e7).len(), 2);
        assert!(r.configs(IdentityId::JacksonSumEm2).iter().all(|s| s.n == 0 && s.m >= 1));
        assert_eq!(SizeRanges::default().configs(IdentityId::JacksonSumEm2).len(), 2 * 4);
        assert!(r.configs(IdentityId::BaileyIB).iter().all(|s| s.big_n == 0 && s.n == 3));
        let fixed = SizeRanges {
            alpha: Some(MultiIndex::new(vec![2, 0, 1])),
            ..r
        };
        assert_eq!(fixed.configs(IdentityId::BaileyIIB), vec![Sizes::with_alpha(MultiIndex::new(vec![2, 0, 1]))
            .canonical(IdentityId::BaileyIIB)
            .unwrap()]);
    }

    #[test]
    fn random_gauges_are_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..200 {
            let g = random_gauge(&mut rng);
            assert!(g.a.norm() <= 0.5 && g.b.norm() <= 0.5);
            assert!((0.5..=2.0 + 1e-12).contains(&g.c.norm()));
        }
    }

    #[test]
    fn empty_suite_is_empty() {
        let cfg = SuiteConfig {
            ids: vec![],
            ..SuiteConfig::default()
        };
        assert!(run_suite(&cfg).is_empty());
    }
}
