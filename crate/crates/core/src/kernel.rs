//! The bracket function `[x]`: a nonzero odd entire function satisfying the
//! Riemann relation.
//!
//! Every such function is `e^{a x² + b} K(c x)` where `K` is `x`, `sin(πx)`,
//! or an odd theta function with a given period lattice. [`KernelSpec`]
//! fixes the class, the gauge constants `(a, b, c)` and the shift step `δ`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scaled::ScaledComplex;

/// Relative distance to the zero set below which a denominator counts as a pole.
pub const POLE_EPS: f64 = 1e-6;
/// Distance to the zero set below which a numerator counts as an exact zero
/// (used by the termination checks).
pub const ZERO_EPS: f64 = 1e-9;
/// Number of multiples `kδ` probed for genericity at construction.
pub const GENERICITY_PROBE: i32 = 64;
/// Hard cap on the number of theta-series terms.
pub const THETA_MAX_TERMS: usize = 60;
const THETA_REL_CUTOFF: f64 = 1e-17;
/// Largest accepted nome modulus.
pub const MAX_NOME: f64 = 0.9;
/// Above this `Im τ` the theta series leaves the double range.
const MAX_IM_TAU: f64 = 400.0;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelVariant {
    Rational,
    Trigonometric,
    Elliptic,
}

impl KernelVariant {
    pub const ALL: [KernelVariant; 3] = [
        KernelVariant::Rational,
        KernelVariant::Trigonometric,
        KernelVariant::Elliptic,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            KernelVariant::Rational => "rational",
            KernelVariant::Trigonometric => "trigonometric",
            KernelVariant::Elliptic => "elliptic",
        }
    }

    pub fn default_delta(&self) -> Complex64 {
        match self {
            KernelVariant::Rational => c64(1.0, 0.0),
            _ => c64(0.311, 0.173),
        }
    }
}

impl fmt::Display for KernelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for KernelVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rational" => Ok(KernelVariant::Rational),
            "trigonometric" => Ok(KernelVariant::Trigonometric),
            "elliptic" => Ok(KernelVariant::Elliptic),
            other => Err(Error::InvalidKernel(format!("variant: unknown kernel {other:?}"))),
        }
    }
}

/// Gauge constants of `x ↦ e^{a x² + b} K(c x)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gauge {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

impl Default for Gauge {
    fn default() -> Self {
        Self {
            a: c64(0.0, 0.0),
            b: c64(0.0, 0.0),
            c: c64(1.0, 0.0),
        }
    }
}

impl Gauge {
    /// `[x] = e^{πix} − e^{−πix} = 2i·sin(πx)`, the normalization under which
    /// the trigonometric series turn into q-series with `q = e^{2πiδ}`.
    pub fn q_difference() -> Self {
        Self {
            a: c64(0.0, 0.0),
            b: c64(2f64.ln(), PI / 2.0),
            c: c64(1.0, 0.0),
        }
    }
}

/// A validated bracket function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelSpecJson", into = "KernelSpecJson")]
pub struct KernelSpec {
    variant: KernelVariant,
    periods: Option<(Complex64, Complex64)>,
    gauge: Gauge,
    delta: Complex64,
    tau: Complex64,
}

impl KernelSpec {
    pub fn new(
        variant: KernelVariant,
        periods: Option<(Complex64, Complex64)>,
        gauge: Gauge,
        delta: Complex64,
    ) -> Result<Self> {
        let is_finite = |z: Complex64| z.re.is_finite() && z.im.is_finite();
        if !(is_finite(gauge.a) && is_finite(gauge.b) && is_finite(gauge.c) && is_finite(delta)) {
            return Err(Error::InvalidKernel("gauge/delta: non-finite value".into()));
        }
        if gauge.c.norm() == 0.0 {
            return Err(Error::InvalidKernel("gauge.c: must be nonzero".into()));
        }
        let (periods, tau) = match variant {
            KernelVariant::Elliptic => {
                let (w1, w2) = periods.ok_or_else(|| {
                    Error::InvalidKernel("omega1/omega2: elliptic kernel needs both periods".into())
                })?;
                if w1.norm() == 0.0 || w2.norm() == 0.0 || !is_finite(w1) || !is_finite(w2) {
                    return Err(Error::InvalidKernel("omega1/omega2: periods must be finite and nonzero".into()));
                }
                let mut tau = w2 / w1;
                let (w1, w2) = if tau.im < 0.0 {
                    tau = w1 / w2;
                    (w2, w1)
                } else {
                    (w1, w2)
                };
                if tau.im <= 0.0 {
                    return Err(Error::InvalidKernel("omega2: periods are linearly dependent over R".into()));
                }
                let nome = (-PI * tau.im).exp();
                if nome > MAX_NOME {
                    return Err(Error::InvalidKernel(format!(
                        "omega2: nome |q| = {nome:.4} exceeds {MAX_NOME}"
                    )));
                }
                if tau.im > MAX_IM_TAU {
                    return Err(Error::InvalidKernel(format!(
                        "omega2: Im(omega2/omega1) = {} is too large",
                        tau.im
                    )));
                }
                (Some((w1, w2)), tau)
            }
            _ => {
                if periods.is_some() {
                    return Err(Error::InvalidKernel(format!(
                        "omega1: periods given for the {variant} kernel"
                    )));
                }
                (None, c64(0.0, 0.0))
            }
        };
        let spec = Self {
            variant,
            periods,
            gauge,
            delta,
            tau,
        };
        for k in 1..=GENERICITY_PROBE {
            let dist = spec.zero_distance(delta * k as f64);
            if dist <= POLE_EPS {
                return Err(Error::InvalidKernel(format!(
                    "delta: [{k}·delta] vanishes (distance {dist:.2e} to the zero set)"
                )));
            }
        }
        Ok(spec)
    }

    pub fn rational() -> Self {
        Self::new(KernelVariant::Rational, None, Gauge::default(), KernelVariant::Rational.default_delta())
            .expect("default rational kernel is valid")
    }

    pub fn trigonometric() -> Self {
        Self::new(
            KernelVariant::Trigonometric,
            None,
            Gauge::default(),
            KernelVariant::Trigonometric.default_delta(),
        )
        .expect("default trigonometric kernel is valid")
    }

    /// Elliptic kernel with the period lattice `ω₁ Z + ω₂ Z`.
    pub fn elliptic(omega1: Complex64, omega2: Complex64) -> Result<Self> {
        Self::new(
            KernelVariant::Elliptic,
            Some((omega1, omega2)),
            Gauge::default(),
            KernelVariant::Elliptic.default_delta(),
        )
    }

    /// The default elliptic kernel, `ω = (1, 1.1i)`.
    pub fn elliptic_default() -> Self {
        Self::elliptic(c64(1.0, 0.0), c64(0.0, 1.1)).expect("default elliptic kernel is valid")
    }

    /// Trigonometric kernel `e^{πix} − e^{−πix}` with `q = e^{2πiδ}`.
    pub fn q_difference(delta: Complex64) -> Result<Self> {
        Self::new(KernelVariant::Trigonometric, None, Gauge::q_difference(), delta)
    }

    pub fn default_for(variant: KernelVariant) -> Self {
        match variant {
            KernelVariant::Rational => Self::rational(),
            KernelVariant::Trigonometric => Self::trigonometric(),
            KernelVariant::Elliptic => Self::elliptic_default(),
        }
    }

    pub fn with_gauge(&self, gauge: Gauge) -> Result<Self> {
        Self::new(self.variant, self.periods, gauge, self.delta)
    }

    pub fn with_delta(&self, delta: Complex64) -> Result<Self> {
        Self::new(self.variant, self.periods, self.gauge, delta)
    }

    pub fn variant(&self) -> KernelVariant {
        self.variant
    }

    pub fn periods(&self) -> Option<(Complex64, Complex64)> {
        self.periods
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    pub fn delta(&self) -> Complex64 {
        self.delta
    }

    /// `τ = ω₂/ω₁` (elliptic only).
    pub fn tau(&self) -> Option<Complex64> {
        self.periods.map(|_| self.tau)
    }

    /// The quasi-periods of the gauged bracket, `ω₁/c` and `ω₂/c`.
    pub fn effective_periods(&self) -> Option<(Complex64, Complex64)> {
        self.periods.map(|(w1, w2)| (w1 / self.gauge.c, w2 / self.gauge.c))
    }

    /// Distance from `c·x` to the zero set of `K`, measured in units of the
    /// kernel's natural length (1 for rational and trigonometric, `ω₁` for
    /// elliptic).
    pub fn zero_distance(&self, x: Complex64) -> f64 {
        let y = self.gauge.c * x;
        match self.variant {
            KernelVariant::Rational => y.norm(),
            KernelVariant::Trigonometric => (y - y.re.round()).norm(),
            KernelVariant::Elliptic => {
                let (w1, _) = self.periods.expect("elliptic kernel has periods");
                let w = y / w1;
                let n0 = (w.im / self.tau.im).round();
                (-1..=1)
                    .map(|dn| {
                        let r = w - self.tau * (n0 + dn as f64);
                        (r - r.re.round()).norm()
                    })
                    .fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Whether `[x]` vanishes to within [`ZERO_EPS`].
    pub fn is_zero_at(&self, x: Complex64) -> bool {
        self.zero_distance(x) < ZERO_EPS
    }

    /// The bracket function `[x]`.
    pub fn bracket(&self, x: Complex64) -> Result<ScaledComplex> {
        let y = self.gauge.c * x;
        let core = match self.variant {
            KernelVariant::Rational => ScaledComplex::from_complex(y),
            KernelVariant::Trigonometric => sin_pi(y),
            KernelVariant::Elliptic => {
                let (w1, _) = self.periods.expect("elliptic kernel has periods");
                theta1(self.tau, PI * y / w1)?
            }
        };
        Ok(core * ScaledComplex::exp(self.gauge.a * x * x + self.gauge.b))
    }

    /// `[x]` for use as a divisor: fails with [`Error::PoleHit`] when `x`
    /// lies within [`POLE_EPS`] of the zero set.
    pub fn denominator(&self, x: Complex64) -> Result<ScaledComplex> {
        if self.zero_distance(x) < POLE_EPS {
            return Err(Error::PoleHit { arg: x });
        }
        self.bracket(x)
    }

    /// Shifted factorial `[x]_k = [x][x+δ]⋯[x+(k−1)δ]`.
    pub fn bracket_factorial(&self, x: Complex64, k: usize) -> Result<ScaledComplex> {
        (0..k).try_fold(ScaledComplex::ONE, |acc, j| {
            Ok(acc * self.bracket(x + self.delta * j as f64)?)
        })
    }

    /// `[x]_k` used as a divisor; every factor is pole-probed.
    pub fn denominator_factorial(&self, x: Complex64, k: usize) -> Result<ScaledComplex> {
        (0..k).try_fold(ScaledComplex::ONE, |acc, j| {
            Ok(acc * self.denominator(x + self.delta * j as f64)?)
        })
    }

    /// `[num]_k / [den]_k` with the denominator probed for poles.
    pub fn factorial_ratio(&self, num: Complex64, den: Complex64, k: usize) -> Result<ScaledComplex> {
        Ok(self.bracket_factorial(num, k)? / self.denominator_factorial(den, k)?)
    }

    /// Running ratios `[num]_k / [den]_k` for `k = 0..=len`.
    pub fn ratio_table(&self, num: Complex64, den: Complex64, len: usize) -> Result<Vec<ScaledComplex>> {
        let mut table = Vec::with_capacity(len + 1);
        let mut acc = ScaledComplex::ONE;
        table.push(acc);
        for j in 0..len {
            let shift = self.delta * j as f64;
            acc = acc * self.bracket(num + shift)? / self.denominator(den + shift)?;
            table.push(acc);
        }
        Ok(table)
    }

    /// Normalized defect of the Riemann relation
    /// `[x+y][x−y][u+v][u−v] = [x+u][x−u][y+v][y−v] − [x+v][x−v][y+u][y−u]`.
    pub fn riemann_residual(&self, x: Complex64, y: Complex64, u: Complex64, v: Complex64) -> Result<f64> {
        let b = |t: Complex64| self.bracket(t);
        let lhs = b(x + y)? * b(x - y)? * b(u + v)? * b(u - v)?;
        let t1 = b(x + u)? * b(x - u)? * b(y + v)? * b(y - v)?;
        let t2 = b(x + v)? * b(x - v)? * b(y + u)? * b(y - u)?;
        let scale = [lhs, t1, t2]
            .into_iter()
            .max_by(|p, q| p.cmp_abs(q))
            .expect("three terms");
        if scale.is_zero() {
            return Ok(0.0);
        }
        Ok((lhs - t1 + t2).abs_ratio(&scale))
    }
}

/// `sin(πy)`, switching to the exponential form where `sin` would overflow.
fn sin_pi(y: Complex64) -> ScaledComplex {
    if y.im.abs() < 100.0 {
        // Reduce the real part first so sin(πy) keeps full relative accuracy near integers.
        let n = y.re.round();
        let s = (PI * (y - n)).sin();
        let s = if n.rem_euclid(2.0) == 1.0 { -s } else { s };
        ScaledComplex::from_complex(s)
    } else {
        let iz = I * PI * y;
        (ScaledComplex::exp(iz) - ScaledComplex::exp(-iz)) * c64(0.0, -0.5)
    }
}

/// Odd Jacobi theta function
/// `θ₁(z | τ) = 2 Σ_{n≥0} (−1)ⁿ q^{(n+½)²} sin((2n+1)z)`, `q = e^{iπτ}`.
///
/// The argument is first reduced to `Im(z)/Im(πτ) ∈ [−½, ½)` and
/// `Re(z)/π ∈ [−½, ½]`; the quasi-periodicity multiplier
/// `(−1)^{n+m} q^{−n²} e^{−2inz'}` is carried in [`ScaledComplex`] form.
pub fn theta1(tau: Complex64, z: Complex64) -> Result<ScaledComplex> {
    if !(tau.im > 0.0) {
        return Err(Error::InvalidKernel("theta1: Im(tau) must be positive".into()));
    }
    if (-PI * tau.im).exp() > MAX_NOME {
        return Err(Error::InvalidKernel(format!("theta1: nome exceeds {MAX_NOME}")));
    }
    if tau.im > MAX_IM_TAU {
        return Err(Error::InvalidKernel("theta1: Im(tau) too large".into()));
    }
    let w = z / PI;
    let n = (w.im / tau.im + 0.5).floor();
    let shifted = w - tau * n;
    let m = shifted.re.round();
    let reduced = shifted - m;
    let series = theta1_reduced(tau, PI * reduced)?;
    if n == 0.0 && m == 0.0 {
        return Ok(series);
    }
    let log_mult = -I * PI * tau * (n * n) - I * (2.0 * PI * n) * reduced;
    let sign = if (n + m).rem_euclid(2.0) == 1.0 { -1.0 } else { 1.0 };
    Ok(series * ScaledComplex::exp(log_mult) * c64(sign, 0.0))
}

/// Theta series for an already-reduced argument.
fn theta1_reduced(tau: Complex64, v: Complex64) -> Result<ScaledComplex> {
    // θ₁ = 2 q^{1/4} Σ (−1)ⁿ q^{n(n+1)} sin((2n+1)v)
    let mut sum = Complex64::new(0.0, 0.0);
    let mut max_term = 0.0f64;
    let mut small_run = 0;
    for n in 0..THETA_MAX_TERMS {
        let nf = n as f64;
        let qpow = (I * PI * tau * (nf * (nf + 1.0))).exp();
        let mut term = qpow * (v * (2.0 * nf + 1.0)).sin();
        if n % 2 == 1 {
            term = -term;
        }
        sum += term;
        let size = term.norm();
        max_term = max_term.max(size);
        if size <= THETA_REL_CUTOFF * max_term {
            small_run += 1;
            if small_run == 3 {
                let prefactor = ScaledComplex::exp(I * PI * tau * 0.25) * c64(2.0, 0.0);
                return Ok(prefactor * ScaledComplex::from_complex(sum));
            }
        } else {
            small_run = 0;
        }
    }
    Err(Error::NonConvergent {
        what: "theta series",
        limit: THETA_MAX_TERMS,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KernelSpecJson {
    variant: KernelVariant,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega1: Option<Complex64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    omega2: Option<Complex64>,
    #[serde(default)]
    gauge: Gauge,
    #[serde(default)]
    delta: Option<Complex64>,
}

impl TryFrom<KernelSpecJson> for KernelSpec {
    type Error = Error;
    fn try_from(raw: KernelSpecJson) -> Result<Self> {
        let periods = match (raw.omega1, raw.omega2) {
            (Some(a), Some(b)) => Some((a, b)),
            (None, None) => None,
            (None, Some(_)) => return Err(Error::InvalidKernel("omega1: missing".into())),
            (Some(_), None) => return Err(Error::InvalidKernel("omega2: missing".into())),
        };
        let delta = raw.delta.unwrap_or_else(|| raw.variant.default_delta());
        KernelSpec::new(raw.variant, periods, raw.gauge, delta)
    }
}

impl From<KernelSpec> for KernelSpecJson {
    fn from(spec: KernelSpec) -> Self {
        Self {
            variant: spec.variant,
            omega1: spec.periods.map(|p| p.0),
            omega2: spec.periods.map(|p| p.1),
            gauge: spec.gauge,
            delta: Some(spec.delta),
        }
    }
}
