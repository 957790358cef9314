//! Constraint-aware random parameter draws.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::evaluate::{balance_residual, evaluate, evaluate_alternative};
use super::{IdentityId, ParameterDraw, Sizes, BREAK_BALANCE_SHIFT};
use crate::combinatorics::MultiIndex;
use crate::error::{Error, Result};
use crate::kernel::{KernelSpec, KernelVariant};

/// Maximum number of rejected draws before giving up.
pub const MAX_RESAMPLES: u32 = 100;

const PPD_MAX_WEIGHT: usize = 5;
const MODE_B_MAX_PART: usize = 3;
const EULER_ABS_Q: (f64, f64) = (0.2, 0.6);
const EULER_ABS_U: (f64, f64) = (0.05, 0.4);
const EULER_LOG_MODULUS: f64 = 0.05;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SampleOptions {
    /// Shift the balancing-dependent parameter by [`BREAK_BALANCE_SHIFT`].
    pub break_balance: bool,
}

pub fn sample_parameters(id: IdentityId, sizes: &Sizes, kernel: &KernelSpec, seed: u64) -> Result<ParameterDraw> {
    sample_parameters_with(id, sizes, kernel, seed, SampleOptions::default())
}

/// Draws parameters for `id` and resamples until both sides evaluate, along
/// with the alternative prefactor form where there is one.
pub fn sample_parameters_with(
    id: IdentityId,
    sizes: &Sizes,
    kernel: &KernelSpec,
    seed: u64,
    opts: SampleOptions,
) -> Result<ParameterDraw> {
    id.check_applicable(kernel.variant())?;
    let sizes = sizes.canonical(id)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..MAX_RESAMPLES {
        let mut draw = match draw_once(id, &sizes, kernel, seed, &mut rng, opts) {
            Ok(d) => d,
            Err(Error::InvalidKernel(_)) => continue,
            Err(e) => return Err(e),
        };
        draw.resamples = attempt;
        let checked = evaluate(&draw).and_then(|pair| match id {
            IdentityId::BaileyIA | IdentityId::BaileyIIA => evaluate_alternative(&draw).map(|_| pair),
            _ => Ok(pair),
        });
        match checked {
            Ok((l, r)) if l.is_zero() && r.is_zero() => continue,
            Ok(_) => return Ok(draw),
            Err(e) if e.is_resamplable() => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::SamplingExhausted {
        id: id.name().into(),
        attempts: MAX_RESAMPLES,
    })
}

struct Drawer<'a> {
    rng: &'a mut ChaCha8Rng,
    e1: Complex64,
    e2: Complex64,
    free: BTreeMap<String, Vec<Complex64>>,
    dependent: BTreeMap<String, Vec<Complex64>>,
    ints: BTreeMap<String, Vec<i64>>,
}

impl Drawer<'_> {
    /// `(t₁e₁ + t₂e₂)/2` with `t` uniform in `[−1, 1]²`.
    fn point(&mut self) -> Complex64 {
        let t1: f64 = self.rng.gen_range(-1.0..=1.0);
        let t2: f64 = self.rng.gen_range(-1.0..=1.0);
        (self.e1 * t1 + self.e2 * t2) * 0.5
    }

    fn free(&mut self, name: &str, count: usize) -> Vec<Complex64> {
        let v: Vec<Complex64> = (0..count).map(|_| self.point()).collect();
        self.free.insert(name.into(), v.clone());
        v
    }

    fn free1(&mut self, name: &str) -> Complex64 {
        self.free(name, 1)[0]
    }

    fn dep(&mut self, name: &str, values: Vec<Complex64>) {
        self.dependent.entry(name.into()).or_default().extend(values);
    }

    fn int(&mut self, name: &str, values: Vec<i64>) {
        self.ints.insert(name.into(), values);
    }
}

fn sum(v: &[Complex64]) -> Complex64 {
    v.iter().sum()
}

/// A uniformly random sequence of `weight` unit increments spread over `m` slots.
fn random_composition(rng: &mut ChaCha8Rng, m: usize, weight: usize) -> Vec<usize> {
    let mut parts = vec![0; m];
    for _ in 0..weight {
        parts[rng.gen_range(0..m)] += 1;
    }
    parts
}

fn as_ints(parts: &[usize]) -> Vec<i64> {
    parts.iter().map(|&p| p as i64).collect()
}

/// Shift vectors in `{−1, 0, 1}` with zero total, not all zero.
fn zero_sum_shifts(rng: &mut ChaCha8Rng, len: usize) -> Vec<i64> {
    loop {
        let v: Vec<i64> = (0..len).map(|_| *[-1, 0, 1].choose(rng).expect("non-empty")).collect();
        if v.iter().sum::<i64>() == 0 && v.iter().any(|&x| x != 0) {
            return v;
        }
    }
}

/// The group whose dependent entry absorbs the balancing condition.
fn balance_group(id: IdentityId) -> Option<&'static str> {
    use IdentityId::*;
    match id {
        DualityPhi | DualityPhiBe | DualityPhiBasic => Some("b"),
        DualityPhiTfpp | EDuality | JacksonSumEm2 | EM3To2m8 | Bailey10e9 | BaileyIA | BaileyIIA | BaileyIB
        | BaileyIIB | BaileyIW | BaileyIIW => Some("c"),
        FrenkelTuraev8e7 => Some("p"),
        _ => None,
    }
}

fn draw_once(
    id: IdentityId,
    sizes: &Sizes,
    kernel: &KernelSpec,
    seed: u64,
    rng: &mut ChaCha8Rng,
    opts: SampleOptions,
) -> Result<ParameterDraw> {
    use IdentityId::*;
    let kernel = match id {
        DualityPhiBasic | BaileyIW | BaileyIIW => KernelSpec::q_difference(kernel.delta())?,
        EulerTransformation => {
            let abs_q = rng.gen_range(EULER_ABS_Q.0..=EULER_ABS_Q.1);
            let delta = Complex64::new(rng.gen_range(-0.5..=0.5), -abs_q.ln() / (2.0 * PI));
            KernelSpec::q_difference(delta)?
        }
        _ => kernel.clone(),
    };
    let (e1, e2) = match kernel.variant() {
        KernelVariant::Elliptic => kernel.effective_periods().expect("elliptic kernel has periods"),
        KernelVariant::Trigonometric => {
            let c = kernel.gauge().c;
            (Complex64::new(1.0, 0.0) / c, Complex64::new(0.0, 1.0) / c)
        }
        KernelVariant::Rational => {
            let c = kernel.gauge().c;
            (Complex64::new(2.0, 0.0) / c, Complex64::new(0.0, 2.0) / c)
        }
    };
    let delta = kernel.delta();
    let (m, n, big_n) = (sizes.m, sizes.n, sizes.big_n);
    let nd = delta * big_n as f64;
    let mut sizes = sizes.clone();
    let mut dr = Drawer {
        rng,
        e1,
        e2,
        free: BTreeMap::new(),
        dependent: BTreeMap::new(),
        ints: BTreeMap::new(),
    };

    match id {
        CauchyDet | FSymmetry | FCoefficientD => {
            dr.free1("lambda");
            dr.free("z", m);
            dr.free("w", m);
            if id != CauchyDet {
                dr.free1("u");
            }
        }
        PpdSpecialized => {
            dr.free("x", m);
            dr.free("y", n);
            let weight = dr.rng.gen_range(0..=PPD_MAX_WEIGHT);
            let alpha = random_composition(dr.rng, m, weight);
            let beta = random_composition(dr.rng, n, weight);
            dr.int("alpha", as_ints(&alpha));
            dr.int("beta", as_ints(&beta));
        }
        DualityPhi | DualityPhiBasic => {
            let a = dr.free("a", m);
            dr.free("x", m);
            dr.free("y", n);
            let b = dr.free("b", n - 1);
            dr.dep("b", vec![sum(&a) - sum(&b)]);
        }
        DualityPhiTfpp => {
            let a = dr.free("a", m);
            dr.free("x", m);
            let b = dr.free("b", n);
            let c = dr.free("c", n - 1);
            dr.dep("c", vec![sum(&a) + sum(&b) - sum(&c)]);
        }
        DualityPhiBe => {
            let a = dr.free("a", m);
            dr.free("x", m);
            dr.free("y", n);
            let e = dr.free1("e");
            let b = dr.free("b", n - 1);
            dr.dep("b", vec![e * n as f64 - sum(&a) - sum(&b)]);
        }
        PhiToE => {
            dr.free("a", m + 1);
            dr.free("x", m + 1);
            dr.free("b", n);
            dr.free("c", n);
        }
        EToPhi => {
            dr.free("a", m);
            dr.free("x", m);
            dr.free1("s");
            dr.free("u", n + 1);
            dr.free("v", n);
            dr.dep("v", vec![-nd]);
        }
        Phi2nReduction => {
            dr.free("a", 2);
            dr.free("x", 2);
            dr.free("b", n);
            dr.free("c", n);
        }
        EDuality | JacksonSumEm2 => {
            let a = dr.free("a", m);
            dr.free("x", m);
            let s = dr.free1("s");
            let u = dr.free("u", n);
            let v = dr.free("v", n);
            let c1 = dr.free1("c");
            let d1 = dr.free1("d");
            let d2 = -nd;
            dr.dep("d", vec![d2]);
            let c2 = delta * (n + 1) as f64 + s * (n + 2) as f64 - sum(&a) - c1 - d1 - d2 - sum(&u) - sum(&v);
            dr.dep("c", vec![c2]);
        }
        FrenkelTuraev8e7 => {
            let s = dr.free1("s");
            let p = dr.free("p", 3);
            let e = -nd;
            dr.dep("p", vec![delta + s * 2.0 - sum(&p) - e, e]);
        }
        EM3To2m8 | BaileyIA | BaileyIIA | BaileyIW => {
            let a = dr.free("a", m);
            dr.free("x", m);
            let s = dr.free1("s");
            let c = dr.free("c", 2);
            let d = dr.free("d", 2);
            dr.dep("d", vec![-nd]);
            dr.dep("c", vec![delta * 2.0 + s * 3.0 - sum(&a) - sum(&c) - sum(&d) + nd]);
        }
        Bailey10e9 => {
            let s = dr.free1("s");
            let c = dr.free("c", 3);
            let d = dr.free("d", 2);
            dr.dep("d", vec![-nd]);
            dr.dep("c", vec![delta * 2.0 + s * 3.0 - sum(&c) - sum(&d) + nd]);
        }
        BaileyIB | BaileyIIB | BaileyIIW => {
            let alpha = match &sizes.alpha {
                Some(alpha) => alpha.clone(),
                None => MultiIndex::new((0..m).map(|_| dr.rng.gen_range(0..=MODE_B_MAX_PART)).collect()),
            };
            let a: Vec<Complex64> = alpha.parts().iter().map(|&k| -delta * k as f64).collect();
            dr.dep("a", a.clone());
            sizes.alpha = Some(alpha);
            dr.free("x", m);
            let s = dr.free1("s");
            let c = dr.free("c", 2);
            let d = dr.free("d", 3);
            dr.dep("c", vec![delta * 2.0 + s * 3.0 - sum(&a) - sum(&c) - sum(&d)]);
        }
        EPeriodicity => {
            dr.free("a", m);
            dr.free("x", m);
            dr.free1("s");
            dr.free("u", n);
            dr.free("v", n - 1);
            dr.dep("v", vec![-nd]);
            let shifts = zero_sum_shifts(dr.rng, m + 2 * n);
            dr.int("l", shifts[..m].to_vec());
            dr.int("p", shifts[m..m + n].to_vec());
            dr.int("q", shifts[m + n..].to_vec());
            let period = dr.rng.gen_range(0..2);
            dr.int("period", vec![period]);
        }
        EulerTransformation => {
            let small = |dr: &mut Drawer, name: &str, count: usize| {
                let v = (0..count)
                    .map(|_| {
                        let im = EULER_LOG_MODULUS / (2.0 * PI);
                        Complex64::new(dr.rng.gen_range(-0.5..=0.5), dr.rng.gen_range(-im..=im))
                    })
                    .collect();
                dr.free.insert(name.into(), v);
            };
            small(&mut dr, "a", m);
            small(&mut dr, "x", m);
            small(&mut dr, "b", n);
            small(&mut dr, "y", n);
            small(&mut dr, "c", 1);
            let r = dr.rng.gen_range(EULER_ABS_U.0..=EULER_ABS_U.1);
            let theta = dr.rng.gen_range(0.0..2.0 * PI);
            dr.free.insert("u".into(), vec![Complex64::from_polar(r, theta)]);
        }
    }

    let mut perturbed = false;
    if opts.break_balance {
        if let Some(group) = balance_group(id) {
            if let Some(first) = dr.dependent.get_mut(group).and_then(|v| v.first_mut()) {
                *first += BREAK_BALANCE_SHIFT;
                perturbed = true;
            }
        }
    }
    let mut draw = ParameterDraw {
        id,
        kernel,
        sizes,
        seed,
        resamples: 0,
        free: dr.free,
        dependent: dr.dependent,
        ints: dr.ints,
        balance_residual: 0.0,
        perturbed,
    };
    draw.balance_residual = balance_residual(&draw)?.unwrap_or(0.0);
    Ok(draw)
}
