//! Multiple hypergeometric series in additive (`Φ`, `E`) and multiplicative
//! (`φ`, `W`) variables.
//!
//! Each evaluator precomputes tables of shifted-factorial ratios once and then
//! sums products of table entries over the index set, so a term costs
//! `O(m² + mn)` multiplications.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{box_indices, compositions, MultiIndex};
use crate::error::{Error, Result};
use crate::kernel::{KernelSpec, POLE_EPS, ZERO_EPS};
use crate::scaled::ScaledComplex;

/// Hard cap on the generating-series degree.
pub const GENERATING_MAX_N: usize = 200;
const INF_PRODUCT_CUTOFF: f64 = 1e-17;
const INF_PRODUCT_MAX: usize = 100_000;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `e^{2πi t}`: the multiplicative variable attached to an additive one.
pub fn exp_mult(t: Complex64) -> Complex64 {
    (2.0 * PI * I * t).exp()
}

/// A series value together with evaluation statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub value: ScaledComplex,
    /// Number of multi-indices visited.
    pub terms: usize,
    /// Effective truncation degree when several parameters terminate the sum
    /// and the smallest one is used; `None` if the requested degree was used.
    pub truncated_at: Option<usize>,
    /// `Σ|terms| / |Σ terms|`; 1 for a single term.
    pub condition: f64,
}

impl Evaluation {
    fn trivial(truncated_at: Option<usize>) -> Self {
        Self {
            value: ScaledComplex::ONE,
            terms: 1,
            truncated_at,
            condition: 1.0,
        }
    }
}

/// Running sum together with the sum of the absolute values of its terms.
struct Accumulator {
    sum: ScaledComplex,
    abs: ScaledComplex,
    terms: usize,
}

impl Accumulator {
    fn new() -> Self {
        Self {
            sum: ScaledComplex::ZERO,
            abs: ScaledComplex::ZERO,
            terms: 0,
        }
    }

    fn push(&mut self, t: ScaledComplex) {
        self.sum += t;
        self.abs += ScaledComplex::new(Complex64::new(t.mantissa().norm(), 0.0), t.exp2());
        self.terms += 1;
    }

    fn finish(self, truncated_at: Option<usize>) -> Evaluation {
        let condition = if self.abs.is_zero() { 1.0 } else { self.abs.abs_ratio(&self.sum) };
        Evaluation {
            value: self.sum,
            terms: self.terms,
            truncated_at,
            condition,
        }
    }
}

fn check_lengths(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::LengthMismatch { expected, found });
    }
    Ok(())
}

/// Parameters of `Φ^{m,n}_N(a; x | b; c)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhiParams {
    pub kernel: KernelSpec,
    pub a: Vec<Complex64>,
    pub x: Vec<Complex64>,
    #[serde(default)]
    pub b: Vec<Complex64>,
    #[serde(default)]
    pub c: Vec<Complex64>,
    #[serde(rename = "N")]
    pub n: usize,
}

impl PhiParams {
    pub fn new(
        kernel: KernelSpec,
        a: Vec<Complex64>,
        x: Vec<Complex64>,
        b: Vec<Complex64>,
        c: Vec<Complex64>,
        n: usize,
    ) -> Result<Self> {
        let p = Self { kernel, a, x, b, c, n };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.a.is_empty() {
            return Err(Error::InvalidSizes("a: m must be at least 1".into()));
        }
        check_lengths(self.a.len(), self.x.len())?;
        check_lengths(self.b.len(), self.c.len())
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    pub fn n_params(&self) -> usize {
        self.b.len()
    }
}

/// How a series `E^{m,n}` terminates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode")]
pub enum Termination {
    /// `v_k = −Nδ` (0-based `k`); the sum runs over `|μ| ≤ N`.
    #[serde(rename = "A")]
    A {
        k: usize,
        #[serde(rename = "N")]
        n: usize,
    },
    /// `a_i = −α_i δ`; the sum runs over the box `μ ≤ α`.
    #[serde(rename = "B")]
    B { alpha: MultiIndex },
}

/// Parameters of the very-well-poised series `E^{m,n}(a; x | s; u; v)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EParams {
    pub kernel: KernelSpec,
    pub a: Vec<Complex64>,
    pub x: Vec<Complex64>,
    pub s: Complex64,
    #[serde(default)]
    pub u: Vec<Complex64>,
    #[serde(default)]
    pub v: Vec<Complex64>,
    pub termination: Termination,
}

impl EParams {
    pub fn validate(&self) -> Result<()> {
        check_lengths(self.a.len(), self.x.len())?;
        check_lengths(self.u.len(), self.v.len())?;
        match &self.termination {
            Termination::A { k, .. } if *k >= self.v.len() => Err(Error::InvalidSizes(format!(
                "termination.k: index {k} out of range for n = {}",
                self.v.len()
            ))),
            Termination::B { alpha } => check_lengths(self.a.len(), alpha.len()),
            _ => Ok(()),
        }
    }
}

/// `[x_i − x_j + dδ] / [x_i − x_j]` for all `i < j` and `|d| ≤ max_shift`.
struct DeltaRatios {
    off: usize,
    tables: Vec<(usize, usize, Vec<ScaledComplex>)>,
}

impl DeltaRatios {
    fn new(kernel: &KernelSpec, x: &[Complex64], max_shift: usize) -> Result<Self> {
        let delta = kernel.delta();
        let mut tables = Vec::new();
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                let diff = x[i] - x[j];
                let den = kernel.denominator(diff)?;
                let row = (-(max_shift as i64)..=max_shift as i64)
                    .map(|d| Ok(kernel.bracket(diff + delta * d as f64)? / den))
                    .collect::<Result<Vec<_>>>()?;
                tables.push((i, j, row));
            }
        }
        Ok(Self { off: max_shift, tables })
    }

    fn at(&self, mu: &[usize]) -> ScaledComplex {
        self.tables
            .iter()
            .map(|(i, j, row)| row[self.off + mu[*i] - mu[*j]])
            .product()
    }
}

/// Ratio tables `[num]_k/[den]_k`, one per `(i, j)` entry, indexed by `k`.
type Grid = Vec<Vec<Vec<ScaledComplex>>>;

fn phi_tables(p: &PhiParams) -> Result<(Grid, Grid)> {
    let k = &p.kernel;
    let delta = k.delta();
    let aa = p
        .x
        .iter()
        .map(|&xi| {
            p.x.iter()
                .zip(&p.a)
                .map(|(&xj, &aj)| k.ratio_table(xi - xj + aj, xi - xj + delta, p.n))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Grid>>()?;
    let bc = p
        .x
        .iter()
        .map(|&xi| {
            p.b.iter()
                .zip(&p.c)
                .map(|(&bk, &ck)| k.ratio_table(xi + bk, xi + ck, p.n))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Grid>>()?;
    Ok((aa, bc))
}

/// `Φ^{m,n}_N(a; x | b; c)`.
pub fn phi(p: &PhiParams) -> Result<ScaledComplex> {
    Ok(phi_eval(p)?.value)
}

pub fn phi_eval(p: &PhiParams) -> Result<Evaluation> {
    p.validate()?;
    let m = p.m();
    if p.n == 0 {
        return Ok(Evaluation::trivial(None));
    }
    let dr = DeltaRatios::new(&p.kernel, &p.x, p.n)?;
    let (aa, bc) = phi_tables(p)?;
    let mut acc = Accumulator::new();
    for mu in compositions(m, p.n) {
        let mu = mu.parts();
        let mut t = dr.at(mu);
        for i in 0..m {
            for row in &aa[i] {
                t *= row[mu[i]];
            }
            for row in &bc[i] {
                t *= row[mu[i]];
            }
        }
        acc.push(t);
    }
    Ok(acc.finish(None))
}

/// Smallest `d ≤ n` with `[arg + dδ] = 0` for some argument.
fn min_termination(kernel: &KernelSpec, args: &[Complex64], n: usize) -> Option<usize> {
    let delta = kernel.delta();
    (0..=n).find(|&d| args.iter().any(|&v| kernel.is_zero_at(v + delta * d as f64)))
}

/// `E^{m,n}(a; x | s; u; v)`.
pub fn e_series(p: &EParams) -> Result<ScaledComplex> {
    Ok(e_eval(p)?.value)
}

pub fn e_eval(p: &EParams) -> Result<Evaluation> {
    p.validate()?;
    let kernel = &p.kernel;
    let delta = kernel.delta();
    let m = p.a.len();
    // Index set, the largest |μ| and the largest μ_i.
    let (indices, max_weight, max_part, truncated_at): (Box<dyn Iterator<Item = MultiIndex>>, usize, Vec<usize>, _) =
        match &p.termination {
            Termination::A { k, n } => {
                if !kernel.is_zero_at(p.v[*k] + delta * *n as f64) {
                    return Err(Error::TerminationUnsatisfied(format!(
                        "v[{k}] = {} is not -{n}·delta",
                        p.v[*k]
                    )));
                }
                let eff = min_termination(kernel, &p.v, *n).unwrap_or(*n);
                let truncated = (eff < *n).then_some(eff);
                let iter = (0..=eff).flat_map(move |d| compositions(m, d));
                (Box::new(iter), eff, vec![eff; m], truncated)
            }
            Termination::B { alpha } => {
                for (i, (&ai, &al)) in p.a.iter().zip(alpha.parts()).enumerate() {
                    if !kernel.is_zero_at(ai + delta * al as f64) {
                        return Err(Error::TerminationUnsatisfied(format!(
                            "a[{i}] = {ai} is not -{al}·delta"
                        )));
                    }
                }
                (Box::new(box_indices(alpha)), alpha.weight(), alpha.parts().to_vec(), None)
            }
        };
    if m == 0 || max_weight == 0 {
        return Ok(Evaluation::trivial(truncated_at));
    }
    let dr = DeltaRatios::new(kernel, &p.x, max_part.iter().copied().max().unwrap_or(0))?;
    // [x_i + s + tδ] / [x_i + s], t ≤ 2·max_weight
    let well_poised = p
        .x
        .iter()
        .map(|&xi| {
            let base = xi + p.s;
            let den = kernel.denominator(base)?;
            (0..=2 * max_weight)
                .map(|t| Ok(kernel.bracket(base + delta * t as f64)? / den))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let sx = p
        .x
        .iter()
        .zip(&p.a)
        .map(|(&xj, &aj)| kernel.ratio_table(p.s + xj, delta + p.s + xj - aj, max_weight))
        .collect::<Result<Vec<_>>>()?;
    let aa = p
        .x
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            p.x.iter()
                .zip(&p.a)
                .map(|(&xj, &aj)| kernel.ratio_table(xi - xj + aj, xi - xj + delta, max_part[i]))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Grid>>()?;
    let vu = p
        .v
        .iter()
        .zip(&p.u)
        .map(|(&vk, &uk)| kernel.ratio_table(vk, delta + p.s - uk, max_weight))
        .collect::<Result<Vec<_>>>()?;
    let xu = p
        .x
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            p.u.iter()
                .zip(&p.v)
                .map(|(&uk, &vk)| kernel.ratio_table(xi + uk, xi + delta + p.s - vk, max_part[i]))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Grid>>()?;

    let mut acc = Accumulator::new();
    for mu in indices {
        let mu = mu.parts();
        let w: usize = mu.iter().sum();
        let mut t = dr.at(mu);
        for i in 0..m {
            t *= well_poised[i][w + mu[i]];
            t *= sx[i][w];
            for row in &aa[i] {
                t *= row[mu[i]];
            }
            for row in &xu[i] {
                t *= row[mu[i]];
            }
        }
        for row in &vu {
            t *= row[w];
        }
        acc.push(t);
    }
    Ok(acc.finish(truncated_at))
}

/// Terminating very-well-poised series
/// `Σ_{k≤N} [s+2kδ]/[s] · [s]_k/[δ]_k · ∏_j [u_j]_k/[δ+s−u_j]_k`.
pub fn e_single(s: Complex64, args: &[Complex64], kernel: &KernelSpec, n: usize) -> Result<ScaledComplex> {
    Ok(e_single_eval(s, args, kernel, n)?.value)
}

pub fn e_single_eval(s: Complex64, args: &[Complex64], kernel: &KernelSpec, n: usize) -> Result<Evaluation> {
    let delta = kernel.delta();
    if n > 0 && !args.iter().any(|&u| kernel.is_zero_at(u + delta * n as f64)) {
        return Err(Error::TerminationUnsatisfied(format!("no argument equals -{n}·delta")));
    }
    let requested = n;
    let n = min_termination(kernel, args, n).unwrap_or(n);
    let truncated_at = (n < requested).then_some(n);
    if n == 0 {
        return Ok(Evaluation::trivial(truncated_at));
    }
    let den = kernel.denominator(s)?;
    let head = kernel.ratio_table(s, delta, n)?;
    let tables = args
        .iter()
        .map(|&u| kernel.ratio_table(u, delta + s - u, n))
        .collect::<Result<Vec<_>>>()?;
    let mut acc = Accumulator::new();
    for k in 0..=n {
        let mut t = kernel.bracket(s + delta * (2 * k) as f64)? / den * head[k];
        for row in &tables {
            t *= row[k];
        }
        acc.push(t);
    }
    Ok(acc.finish(truncated_at))
}

/// Sums `Σ_N u^N f(N)`, stopping after three consecutive terms below
/// `tol·|partial sum|`.
pub fn generating_series<F>(u: Complex64, tol: f64, mut coeff: F) -> Result<ScaledComplex>
where
    F: FnMut(usize) -> Result<ScaledComplex>,
{
    let mut sum = ScaledComplex::ZERO;
    let mut upow = ScaledComplex::ONE;
    let mut small = 0;
    let u = ScaledComplex::from_complex(u);
    for n in 0..=GENERATING_MAX_N {
        let term = if upow.is_zero() { ScaledComplex::ZERO } else { upow * coeff(n)? };
        sum += term;
        if term.is_zero() || term.abs_ratio(&sum) < tol {
            small += 1;
            if small == 3 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
        upow *= u;
    }
    Err(Error::NonConvergent {
        what: "generating series",
        limit: GENERATING_MAX_N,
    })
}

/// `Σ_N u^N Φ_N(a; x | b; c)`; the `N` of `p` is ignored.
pub fn phi_generating(p: &PhiParams, u: Complex64, tol: f64) -> Result<ScaledComplex> {
    let mut q = p.clone();
    generating_series(u, tol, |n| {
        q.n = n;
        phi(&q)
    })
}

// ---------------------------------------------------------------------------
// Multiplicative variables

fn probe(z: Complex64, scale: f64) -> Result<Complex64> {
    if z.norm() < POLE_EPS * scale.max(1.0) {
        return Err(Error::PoleHit { arg: z });
    }
    Ok(z)
}

/// `(x; q)_k = ∏_{j<k} (1 − x qʲ)`.
pub fn q_pochhammer(x: Complex64, q: Complex64, k: usize) -> ScaledComplex {
    let mut p = ScaledComplex::ONE;
    let mut xq = x;
    for _ in 0..k {
        p = p * (1.0 - xq);
        xq *= q;
    }
    p
}

/// `(x; q)_∞`, truncated once `|x qʲ| < 1e−17`.
pub fn q_pochhammer_inf(x: Complex64, q: Complex64) -> Result<ScaledComplex> {
    if q.norm() >= 1.0 {
        return Err(Error::NonConvergent {
            what: "infinite q-product",
            limit: 0,
        });
    }
    let mut p = ScaledComplex::ONE;
    let mut xq = x;
    for _ in 0..INF_PRODUCT_MAX {
        if xq.norm() < INF_PRODUCT_CUTOFF {
            return Ok(p);
        }
        p = p * (1.0 - xq);
        xq *= q;
    }
    Err(Error::NonConvergent {
        what: "infinite q-product",
        limit: INF_PRODUCT_MAX,
    })
}

fn q_ratio_table(num: Complex64, den: Complex64, q: Complex64, len: usize) -> Result<Vec<ScaledComplex>> {
    let mut table = Vec::with_capacity(len + 1);
    let mut acc = ScaledComplex::ONE;
    let (mut nq, mut dq) = (num, den);
    table.push(acc);
    for _ in 0..len {
        acc = acc * (1.0 - nq) / ScaledComplex::from_complex(probe(1.0 - dq, 1.0)?);
        table.push(acc);
        nq *= q;
        dq *= q;
    }
    Ok(table)
}

/// `∏_{i<j} (q^{μ_i} x_i − q^{μ_j} x_j)/(x_i − x_j)` via precomputed powers.
fn vandermonde_ratio(x: &[Complex64], qpow: &[Complex64], mu: &[usize]) -> ScaledComplex {
    let mut p = ScaledComplex::ONE;
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            p = p * ((qpow[mu[i]] * x[i] - qpow[mu[j]] * x[j]) / (x[i] - x[j]));
        }
    }
    p
}

fn check_distinct(x: &[Complex64]) -> Result<()> {
    for i in 0..x.len() {
        for j in i + 1..x.len() {
            probe(x[i] - x[j], x[i].norm().max(x[j].norm()))?;
        }
    }
    Ok(())
}

/// Parameters of the basic series `φ^{m,n}_N(a; x | b; c)` with base `q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasicPhiParams {
    pub q: Complex64,
    pub a: Vec<Complex64>,
    pub x: Vec<Complex64>,
    #[serde(default)]
    pub b: Vec<Complex64>,
    #[serde(default)]
    pub c: Vec<Complex64>,
    #[serde(rename = "N")]
    pub n: usize,
}

impl BasicPhiParams {
    pub fn validate(&self) -> Result<()> {
        if self.a.is_empty() {
            return Err(Error::InvalidSizes("a: m must be at least 1".into()));
        }
        check_lengths(self.a.len(), self.x.len())?;
        check_lengths(self.b.len(), self.c.len())
    }

    /// Multiplicative image `e^{2πi·}` of additive parameters, `q = e^{2πiδ}`.
    pub fn from_additive(p: &PhiParams) -> Self {
        let ex = |v: &[Complex64]| v.iter().map(|&t| exp_mult(t)).collect::<Vec<_>>();
        Self {
            q: exp_mult(p.kernel.delta()),
            a: ex(&p.a),
            x: ex(&p.x),
            b: ex(&p.b),
            c: ex(&p.c),
            n: p.n,
        }
    }
}

/// `φ^{m,n}_N(a; x | b; c)`.
pub fn phi_basic(p: &BasicPhiParams) -> Result<ScaledComplex> {
    Ok(phi_basic_eval(p)?.value)
}

pub fn phi_basic_eval(p: &BasicPhiParams) -> Result<Evaluation> {
    p.validate()?;
    let (m, q, n) = (p.a.len(), p.q, p.n);
    if n == 0 {
        return Ok(Evaluation::trivial(None));
    }
    check_distinct(&p.x)?;
    let qpow: Vec<Complex64> = (0..=n as i32).map(|k| q.powi(k)).collect();
    let mut aa = Vec::with_capacity(m);
    let mut bc = Vec::with_capacity(m);
    for &xi in &p.x {
        let row = p
            .x
            .iter()
            .zip(&p.a)
            .map(|(&xj, &aj)| q_ratio_table(aj * xi / xj, q * xi / xj, q, n))
            .collect::<Result<Vec<_>>>()?;
        aa.push(row);
        let row = p
            .b
            .iter()
            .zip(&p.c)
            .map(|(&bk, &ck)| q_ratio_table(bk * xi, ck * xi, q, n))
            .collect::<Result<Vec<_>>>()?;
        bc.push(row);
    }
    let mut acc = Accumulator::new();
    for mu in compositions(m, n) {
        let mu = mu.parts();
        let mut t = vandermonde_ratio(&p.x, &qpow, mu);
        for i in 0..m {
            for row in aa[i].iter().chain(&bc[i]) {
                t *= row[mu[i]];
            }
        }
        acc.push(t);
    }
    Ok(acc.finish(None))
}

/// `Σ_N u^N φ_N`; the `N` of `p` is ignored.
pub fn phi_basic_generating(p: &BasicPhiParams, u: Complex64, tol: f64) -> Result<ScaledComplex> {
    let mut q = p.clone();
    generating_series(u, tol, |n| {
        q.n = n;
        phi_basic(&q)
    })
}

/// Factor `e^{iπN(δ + Σc − Σa − Σb)}` with
/// `Φ_N(a; x | b; c) = factor · φ_N(e^{2πia}; e^{2πix} | e^{2πib}; e^{2πic})`
/// for the kernel `[ξ] = e^{iπξ} − e^{−iπξ}`.
pub fn phi_basic_prefactor(delta: Complex64, a: &[Complex64], b: &[Complex64], c: &[Complex64], n: usize) -> ScaledComplex {
    let sum = |v: &[Complex64]| v.iter().copied().sum::<Complex64>();
    ScaledComplex::exp(I * PI * n as f64 * (delta + sum(c) - sum(a) - sum(b)))
}

/// Parameters of `W^{m,n}(a; x | s; u; v)` with base `q`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasicEParams {
    pub q: Complex64,
    pub a: Vec<Complex64>,
    pub x: Vec<Complex64>,
    pub s: Complex64,
    #[serde(default)]
    pub u: Vec<Complex64>,
    #[serde(default)]
    pub v: Vec<Complex64>,
    pub termination: Termination,
}

impl BasicEParams {
    pub fn validate(&self) -> Result<()> {
        check_lengths(self.a.len(), self.x.len())?;
        check_lengths(self.u.len(), self.v.len())?;
        match &self.termination {
            Termination::A { k, .. } if *k >= self.v.len() => Err(Error::InvalidSizes(format!(
                "termination.k: index {k} out of range for n = {}",
                self.v.len()
            ))),
            Termination::B { alpha } => check_lengths(self.a.len(), alpha.len()),
            _ => Ok(()),
        }
    }

    /// Multiplicative image of additive parameters, `q = e^{2πiδ}`.
    pub fn from_additive(p: &EParams) -> Self {
        let ex = |v: &[Complex64]| v.iter().map(|&t| exp_mult(t)).collect::<Vec<_>>();
        Self {
            q: exp_mult(p.kernel.delta()),
            a: ex(&p.a),
            x: ex(&p.x),
            s: exp_mult(p.s),
            u: ex(&p.u),
            v: ex(&p.v),
            termination: p.termination.clone(),
        }
    }

    /// `z = qⁿ sⁿ / (a₁⋯a_m u₁⋯u_n v₁⋯v_n)`.
    pub fn z(&self) -> Complex64 {
        let n = self.u.len() as i32;
        let den: Complex64 = self.a.iter().chain(&self.u).chain(&self.v).product();
        (self.q * self.s).powi(n) / den
    }
}

fn is_q_power(value: Complex64, q: Complex64, k: usize) -> bool {
    (value * q.powi(k as i32) - 1.0).norm() < ZERO_EPS
}

/// `W^{m,n}(a; x | s; u; v)`.
pub fn w_series(p: &BasicEParams) -> Result<ScaledComplex> {
    Ok(w_series_eval(p)?.value)
}

pub fn w_series_eval(p: &BasicEParams) -> Result<Evaluation> {
    p.validate()?;
    let (m, q) = (p.a.len(), p.q);
    let (indices, max_weight, max_part): (Box<dyn Iterator<Item = MultiIndex>>, usize, Vec<usize>) =
        match &p.termination {
            Termination::A { k, n } => {
                if !is_q_power(p.v[*k], q, *n) {
                    return Err(Error::TerminationUnsatisfied(format!("v[{k}] is not q^-{n}")));
                }
                let eff = (0..=*n)
                    .find(|&d| p.v.iter().any(|&v| is_q_power(v, q, d)))
                    .unwrap_or(*n);
                let iter = (0..=eff).flat_map(move |d| compositions(m, d));
                (Box::new(iter), eff, vec![eff; m])
            }
            Termination::B { alpha } => {
                for (i, (&ai, &al)) in p.a.iter().zip(alpha.parts()).enumerate() {
                    if !is_q_power(ai, q, al) {
                        return Err(Error::TerminationUnsatisfied(format!("a[{i}] is not q^-{al}")));
                    }
                }
                (Box::new(box_indices(alpha)), alpha.weight(), alpha.parts().to_vec())
            }
        };
    if m == 0 || max_weight == 0 {
        return Ok(Evaluation::trivial(None));
    }
    check_distinct(&p.x)?;
    let qpow: Vec<Complex64> = (0..=2 * max_weight as i32).map(|k| q.powi(k)).collect();
    let z = ScaledComplex::from_complex(p.z());
    let s = p.s;
    let mut well_poised = Vec::with_capacity(m);
    let mut sx = Vec::with_capacity(m);
    let mut aa = Vec::with_capacity(m);
    let mut xu = Vec::with_capacity(m);
    for (i, (&xi, &ai)) in p.x.iter().zip(&p.a).enumerate() {
        let den = probe(1.0 - s * xi, 1.0)?;
        well_poised.push(
            qpow.iter()
                .map(|&qt| ScaledComplex::from_complex((1.0 - qt * s * xi) / den))
                .collect::<Vec<_>>(),
        );
        sx.push(q_ratio_table(s * xi, q * s * xi / ai, q, max_weight)?);
        aa.push(
            p.x.iter()
                .zip(&p.a)
                .map(|(&xj, &aj)| q_ratio_table(aj * xi / xj, q * xi / xj, q, max_part[i]))
                .collect::<Result<Vec<_>>>()?,
        );
        xu.push(
            p.u.iter()
                .zip(&p.v)
                .map(|(&uk, &vk)| q_ratio_table(xi * uk, q * s * xi / vk, q, max_part[i]))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    let vu = p
        .v
        .iter()
        .zip(&p.u)
        .map(|(&vk, &uk)| q_ratio_table(vk, q * s / uk, q, max_weight))
        .collect::<Result<Vec<_>>>()?;
    let zpow: Vec<ScaledComplex> = (0..=max_weight as i64).map(|k| z.powi(k)).collect();

    let mut acc = Accumulator::new();
    for mu in indices {
        let mu = mu.parts();
        let w: usize = mu.iter().sum();
        let mut t = zpow[w] * vandermonde_ratio(&p.x, &qpow, mu);
        for i in 0..m {
            t *= well_poised[i][w + mu[i]];
            t *= sx[i][w];
            for row in aa[i].iter().chain(&xu[i]) {
                t *= row[mu[i]];
            }
        }
        for row in &vu {
            t *= row[w];
        }
        acc.push(t);
    }
    Ok(acc.finish(None))
}
