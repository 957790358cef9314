//! The Cauchy determinant `D(z|w)` and the symmetric function `F(z|w;u)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::combinatorics::{compositions, delta_product, subsets, MultiIndex};
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::linalg::{determinant, Matrix};
use crate::scaled::ScaledComplex;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CauchyConfig {
    pub kernel: KernelSpec,
    pub lambda: Complex64,
    pub z: Vec<Complex64>,
    pub w: Vec<Complex64>,
    #[serde(default)]
    pub u: Complex64,
}

/// Which side of the degree-`d` identity to evaluate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Z,
    W,
}

impl CauchyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.z.is_empty() {
            return Err(Error::InvalidSizes("z: M must be at least 1".into()));
        }
        if self.z.len() != self.w.len() {
            return Err(Error::LengthMismatch {
                expected: self.z.len(),
                found: self.w.len(),
            });
        }
        Ok(())
    }

    pub fn size(&self) -> usize {
        self.z.len()
    }

    /// The configuration with `z` and `w` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            z: self.w.clone(),
            w: self.z.clone(),
            ..self.clone()
        }
    }

    fn total(&self) -> Complex64 {
        self.lambda + self.z.iter().sum::<Complex64>() + self.w.iter().sum::<Complex64>()
    }

    /// Entry `[λ+z_i+w_j+t] / ([λ][z_i+w_j+t])`.
    fn entry(&self, i: usize, j: usize, t: Complex64) -> Result<ScaledComplex> {
        let k = &self.kernel;
        let zw = self.z[i] + self.w[j] + t;
        Ok(k.bracket(self.lambda + zw)? / (k.denominator(self.lambda)? * k.denominator(zw)?))
    }

    fn matrix(&self, u: Option<Complex64>) -> Result<Matrix> {
        let m = self.size();
        let delta = self.kernel.delta();
        let zero = Complex64::new(0.0, 0.0);
        (0..m)
            .map(|i| {
                (0..m)
                    .map(|j| {
                        let base = self.entry(i, j, zero)?;
                        match u {
                            Some(u) => Ok(base + self.entry(i, j, delta)? * u),
                            None => Ok(base),
                        }
                    })
                    .collect()
            })
            .collect()
    }
}

/// `det([λ+z_i+w_j] / ([λ][z_i+w_j]))` by LU factorization.
pub fn cauchy_det_numeric(cfg: &CauchyConfig) -> Result<ScaledComplex> {
    cfg.validate()?;
    determinant(cfg.matrix(None)?)
}

/// `[λ+|z|+|w|] Δ(z) Δ(w) / ([λ] ∏_{i,j} [z_i+w_j])`.
pub fn cauchy_det_closed(cfg: &CauchyConfig) -> Result<ScaledComplex> {
    cfg.validate()?;
    let k = &cfg.kernel;
    let mut den = k.denominator(cfg.lambda)?;
    for &zi in &cfg.z {
        for &wj in &cfg.w {
            den *= k.denominator(zi + wj)?;
        }
    }
    Ok(k.bracket(cfg.total())? * delta_product(k, &cfg.z)? * delta_product(k, &cfg.w)? / den)
}

/// Coefficient of `u^{|K|}` attached to one subset `K` on the `z` side.
fn subset_term(k: &KernelSpec, z: &[Complex64], w: &[Complex64], set: &[usize]) -> Result<ScaledComplex> {
    let delta = k.delta();
    let mut inside = vec![false; z.len()];
    set.iter().for_each(|&i| inside[i] = true);
    let mut t = ScaledComplex::ONE;
    for &i in set {
        for j in (0..z.len()).filter(|&j| !inside[j]) {
            let diff = z[i] - z[j];
            t *= k.bracket(diff + delta)? / k.denominator(diff)?;
        }
        for &wk in w {
            let s = z[i] + wk;
            t *= k.bracket(s)? / k.denominator(s + delta)?;
        }
    }
    Ok(t)
}

/// Degree-`d` subset sum of the named side.
pub fn f_coefficient(cfg: &CauchyConfig, d: usize, side: Side) -> Result<ScaledComplex> {
    cfg.validate()?;
    let (z, w) = match side {
        Side::Z => (&cfg.z, &cfg.w),
        Side::W => (&cfg.w, &cfg.z),
    };
    subsets(z.len(), d).map(|set| subset_term(&cfg.kernel, z, w, &set)).sum()
}

/// `F(z|w;u)` as the sum over all subsets `K`.
pub fn f_direct(cfg: &CauchyConfig) -> Result<ScaledComplex> {
    cfg.validate()?;
    let k = &cfg.kernel;
    let total = cfg.total();
    let base = k.denominator(total)?;
    let u = ScaledComplex::from_complex(cfg.u);
    let mut upow = ScaledComplex::ONE;
    let mut sum = ScaledComplex::ZERO;
    for d in 0..=cfg.size() {
        if !upow.is_zero() {
            let shift = k.bracket(total + k.delta() * d as f64)? / base;
            sum += upow * shift * f_coefficient(cfg, d, Side::Z)?;
        }
        upow *= u;
    }
    Ok(sum)
}

/// `F(z|w;u) = det(A + u A_δ) / D(z|w)` with `D` in closed form.
pub fn f_operator(cfg: &CauchyConfig) -> Result<ScaledComplex> {
    cfg.validate()?;
    Ok(determinant(cfg.matrix(Some(cfg.u))?)? / cauchy_det_closed(cfg)?)
}

/// One side of the degree-`d` identity obtained from `F(z|w;u) = F(w|z;u)`
/// at `z = −(x)_α`, `w = −(y)_β`:
/// `Σ_{|μ|=d} Δ(x+μδ)/Δ(x) ∏[x_i−x_j−α_jδ]_{μ_i}/[x_i−x_j+δ]_{μ_i}
///  ∏[x_i+y_k+β_kδ]_{μ_i}/[x_i+y_k]_{μ_i}`.
///
/// Every factor is evaluated directly from the bracket function.
pub fn specialized_sum(
    kernel: &KernelSpec,
    x: &[Complex64],
    y: &[Complex64],
    alpha: &MultiIndex,
    beta: &MultiIndex,
    d: usize,
) -> Result<ScaledComplex> {
    if alpha.len() != x.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            found: alpha.len(),
        });
    }
    if beta.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: y.len(),
            found: beta.len(),
        });
    }
    let delta = kernel.delta();
    let fac = |t: Complex64, n: usize| kernel.bracket_factorial(t, n);
    let den_fac = |t: Complex64, n: usize| kernel.denominator_factorial(t, n);
    let base_delta = delta_product(kernel, x)?;
    if base_delta.is_zero() {
        return Err(Error::PoleHit { arg: Complex64::new(0.0, 0.0) });
    }
    let mut sum = ScaledComplex::ZERO;
    for mu in compositions(x.len(), d) {
        let mu = mu.parts();
        let shifted: Vec<Complex64> = x.iter().zip(mu).map(|(&xi, &m)| xi + delta * m as f64).collect();
        let mut t = delta_product(kernel, &shifted)? / base_delta;
        for i in 0..x.len() {
            for j in 0..x.len() {
                let diff = x[i] - x[j];
                t *= fac(diff - delta * alpha[j] as f64, mu[i])? / den_fac(diff + delta, mu[i])?;
            }
            for (k, &yk) in y.iter().enumerate() {
                t *= fac(x[i] + yk + delta * beta[k] as f64, mu[i])? / den_fac(x[i] + yk, mu[i])?;
            }
        }
        sum += t;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{Gauge, KernelVariant};
    use crate::linalg::solve;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rc(rng: &mut ChaCha8Rng) -> Complex64 {
        c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5))
    }

    fn random_cfg(rng: &mut ChaCha8Rng, variant: KernelVariant, m: usize) -> CauchyConfig {
        let gauge = Gauge {
            a: rc(rng) * 0.5,
            b: rc(rng),
            c: Complex64::from_polar(rng.gen_range(0.6..1.5), rng.gen_range(-0.4..0.4)),
        };
        CauchyConfig {
            kernel: KernelSpec::default_for(variant).with_gauge(gauge).unwrap(),
            lambda: rc(rng),
            z: (0..m).map(|_| rc(rng)).collect(),
            w: (0..m).map(|_| rc(rng)).collect(),
            u: Complex64::from_polar(rng.gen_range(0.3..3.0), rng.gen_range(0.0..6.28)),
        }
    }

    fn tol(v: KernelVariant) -> f64 {
        if v == KernelVariant::Elliptic { 1e-7 } else { 1e-9 }
    }

    #[test]
    fn one_by_one_is_exact() {
        let cfg = CauchyConfig {
            kernel: KernelSpec::elliptic_default(),
            lambda: c(0.3, 0.1),
            z: vec![c(0.2, -0.1)],
            w: vec![c(-0.4, 0.3)],
            u: c(0.0, 0.0),
        };
        assert!(ScaledComplex::rel_diff(&cauchy_det_numeric(&cfg).unwrap(), &cauchy_det_closed(&cfg).unwrap()) < 1e-15);
        assert_eq!(f_direct(&cfg).unwrap(), ScaledComplex::ONE);
        let cfg1 = CauchyConfig { u: c(0.7, 0.4), ..cfg };
        let k = &cfg1.kernel;
        let t = cfg1.lambda + cfg1.z[0] + cfg1.w[0];
        let zw = cfg1.z[0] + cfg1.w[0];
        let d = k.delta();
        let closed = ScaledComplex::ONE
            + k.bracket(t + d).unwrap() / k.bracket(t).unwrap() * k.bracket(zw).unwrap() / k.bracket(zw + d).unwrap() * cfg1.u;
        assert!(ScaledComplex::rel_diff(&f_direct(&cfg1).unwrap(), &closed) < 1e-14);
        assert!(ScaledComplex::rel_diff(&f_operator(&cfg1).unwrap(), &closed) < 1e-13);
    }

    #[test]
    fn rational_two_by_two() {
        let cfg = CauchyConfig {
            kernel: KernelSpec::rational(),
            lambda: c(1.0, 0.0),
            z: vec![c(2.0, 0.0), c(3.0, 0.0)],
            w: vec![c(4.0, 0.0), c(5.0, 0.0)],
            u: c(0.0, 0.0),
        };
        let n = cauchy_det_numeric(&cfg).unwrap();
        let cl = cauchy_det_closed(&cfg).unwrap();
        assert!(ScaledComplex::rel_diff(&n, &cl) < 1e-12);
    }

    #[test]
    fn two_by_two_defect_is_riemann_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for variant in KernelVariant::ALL {
            let cfg = random_cfg(&mut rng, variant, 2);
            let k = &cfg.kernel;
            let b = |t: Complex64| k.bracket(t).unwrap();
            let (l, z, w) = (cfg.lambda, &cfg.z, &cfg.w);
            let sigma = z[0] + z[1] + w[0] + w[1];
            let (x, y) = (l + sigma * 0.5, sigma * 0.5);
            let u = (z[0] - z[1] + w[0] - w[1]) * 0.5;
            let v = (z[0] - z[1] - w[0] + w[1]) * 0.5;
            // Clearing [λ]²∏[z_i+w_j] maps the determinant to the right side of
            // the Riemann relation and the closed form to its left side.
            let cross: ScaledComplex = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| b(z[i] + w[j])).product();
            let clear = b(l) * b(l) * cross;
            let det_cleared = cauchy_det_numeric(&cfg).unwrap() * clear;
            let closed_cleared = cauchy_det_closed(&cfg).unwrap() * clear;
            let rhs = b(x + u) * b(x - u) * b(y + v) * b(y - v) - b(x + v) * b(x - v) * b(y + u) * b(y - u);
            let lhs = b(x + y) * b(x - y) * b(u + v) * b(u - v);
            assert!(ScaledComplex::rel_diff(&det_cleared, &rhs) < 1e-12, "{variant}");
            assert!(ScaledComplex::rel_diff(&closed_cleared, &lhs) < 1e-12, "{variant}");
            assert!(k.riemann_residual(x, y, u, v).unwrap() < 1e-10);
        }
    }

    #[test]
    fn degenerate_rows_give_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut cfg = random_cfg(&mut rng, KernelVariant::Trigonometric, 3);
        cfg.z[1] = cfg.z[0];
        assert!(cauchy_det_closed(&cfg).unwrap().is_zero());
    }

    #[test]
    fn determinant_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for variant in KernelVariant::ALL {
            for m in 1..=6 {
                let cfg = random_cfg(&mut rng, variant, m);
                let n = cauchy_det_numeric(&cfg).unwrap();
                let cl = cauchy_det_closed(&cfg).unwrap();
                assert!(ScaledComplex::rel_diff(&n, &cl) < tol(variant), "{variant} M={m}");
            }
        }
    }

    #[test]
    fn large_lambda_rational_limit() {
        // λ → ∞ recovers the classical Cauchy determinant det(1/(z_i+w_j)).
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut cfg = random_cfg(&mut rng, KernelVariant::Rational, 3);
        cfg.kernel = KernelSpec::rational();
        cfg.lambda = c(1e9, 0.0);
        let limit = determinant(
            cfg.z.iter().map(|&z| cfg.w.iter().map(|&w| ScaledComplex::from_complex(1.0 / (z + w))).collect()).collect(),
        )
        .unwrap();
        assert!(ScaledComplex::rel_diff(&cauchy_det_numeric(&cfg).unwrap(), &limit) < 1e-7);
    }

    #[test]
    fn f_is_symmetric_and_matches_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for variant in KernelVariant::ALL {
            for m in 1..=5 {
                let cfg = random_cfg(&mut rng, variant, m);
                let f = f_direct(&cfg).unwrap();
                let g = f_direct(&cfg.swapped()).unwrap();
                let h = f_operator(&cfg).unwrap();
                assert!(ScaledComplex::rel_diff(&f, &g) < tol(variant), "{variant} M={m} symmetry");
                assert!(ScaledComplex::rel_diff(&f, &h) < tol(variant), "{variant} M={m} operator");
                for d in 0..=m {
                    let zs = f_coefficient(&cfg, d, Side::Z).unwrap();
                    let ws = f_coefficient(&cfg, d, Side::W).unwrap();
                    assert!(ScaledComplex::rel_diff(&zs, &ws) < tol(variant), "{variant} M={m} d={d}");
                }
            }
        }
    }

    #[test]
    fn coefficient_edges() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cfg = random_cfg(&mut rng, KernelVariant::Elliptic, 3);
        assert_eq!(f_coefficient(&cfg, 0, Side::Z).unwrap(), ScaledComplex::ONE);
        assert_eq!(f_coefficient(&cfg, 0, Side::W).unwrap(), ScaledComplex::ONE);
        let k = &cfg.kernel;
        let full: ScaledComplex = cfg
            .z
            .iter()
            .flat_map(|&z| cfg.w.iter().map(move |&w| z + w))
            .map(|s| k.bracket(s).unwrap() / k.bracket(s + k.delta()).unwrap())
            .product();
        assert!(ScaledComplex::rel_diff(&f_coefficient(&cfg, 3, Side::Z).unwrap(), &full) < 1e-12);
        assert!(ScaledComplex::rel_diff(&f_coefficient(&cfg, 3, Side::W).unwrap(), &full) < 1e-12);
    }

    #[test]
    fn f_is_a_polynomial_in_u_with_known_coefficients() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for variant in KernelVariant::ALL {
            let m = 3;
            let base = random_cfg(&mut rng, variant, m);
            let us: Vec<Complex64> = (0..=m).map(|j| Complex64::from_polar(0.5 + 0.4 * j as f64, 0.9 * j as f64)).collect();
            let vander: Matrix = us
                .iter()
                .map(|&u| (0..=m).map(|p| ScaledComplex::from_complex(u.powi(p as i32))).collect())
                .collect();
            let values: Vec<ScaledComplex> = us.iter().map(|&u| f_direct(&CauchyConfig { u, ..base.clone() }).unwrap()).collect();
            let coeffs = solve(vander, &values).unwrap();
            let k = &base.kernel;
            let total = base.lambda + base.z.iter().sum::<Complex64>() + base.w.iter().sum::<Complex64>();
            for d in 0..=m {
                let shift = k.bracket(total + k.delta() * d as f64).unwrap() / k.bracket(total).unwrap();
                let want = shift * f_coefficient(&base, d, Side::Z).unwrap();
                assert!(ScaledComplex::rel_diff(&coeffs[d], &want) < 1e-8, "{variant} d={d}");
            }
        }
    }

    #[test]
    fn specialized_sums_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for variant in KernelVariant::ALL {
            let k = KernelSpec::default_for(variant);
            let x: Vec<_> = (0..2).map(|_| rc(&mut rng)).collect();
            let y: Vec<_> = (0..3).map(|_| rc(&mut rng)).collect();
            let alpha = MultiIndex::new(vec![2, 1]);
            let beta = MultiIndex::new(vec![1, 0, 2]);
            for d in 0..=4 {
                let l = specialized_sum(&k, &x, &y, &alpha, &beta, d).unwrap();
                let r = specialized_sum(&k, &y, &x, &beta, &alpha, d).unwrap();
                assert!(ScaledComplex::rel_diff(&l, &r) < tol(variant), "{variant} d={d}");
            }
        }
    }
}
