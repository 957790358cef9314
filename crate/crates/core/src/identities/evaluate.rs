//! Left- and right-hand sides of every registered identity.

use std::cell::Cell;
use std::time::Instant;

use num_complex::Complex64;

use super::{IdentityId, ParameterDraw, Status, VerificationReport, BALANCE_TOL, CONDITION_LIMIT};
use crate::cauchy::{cauchy_det_closed, cauchy_det_numeric, f_coefficient, f_direct, specialized_sum, CauchyConfig, Side};
use crate::combinatorics::MultiIndex;
use crate::error::{Error, Result};
use crate::kernel::{KernelSpec, POLE_EPS};
use crate::scaled::ScaledComplex;
use crate::series::{
    e_eval, e_single_eval, exp_mult, phi_basic_eval, phi_basic_generating, phi_eval, q_pochhammer,
    q_pochhammer_inf, w_series_eval, BasicEParams, BasicPhiParams, EParams, Evaluation, PhiParams, Termination,
};

/// Truncation tolerance of the generating series in the Euler transformation.
const EULER_SERIES_TOL: f64 = 1e-9;

type C = Complex64;
type Pair = (ScaledComplex, ScaledComplex);

fn sum(v: &[C]) -> C {
    v.iter().sum()
}

fn shifted(v: &[C], by: C) -> Vec<C> {
    v.iter().map(|&t| t + by).collect()
}

fn sub(a: &[C], b: &[C]) -> Vec<C> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

fn add(a: &[C], b: &[C]) -> Vec<C> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

fn mult(v: &[C]) -> Vec<C> {
    v.iter().map(|&t| exp_mult(t)).collect()
}

/// `∏[num]_{len} / ∏[den]_{len}` with individual lengths.
fn fac_ratio_with(k: &KernelSpec, num: &[(C, usize)], den: &[(C, usize)]) -> Result<ScaledComplex> {
    let mut r = ScaledComplex::ONE;
    for &(x, len) in num {
        r *= k.bracket_factorial(x, len)?;
    }
    for &(x, len) in den {
        r = r / k.denominator_factorial(x, len)?;
    }
    Ok(r)
}

fn fac_ratio(k: &KernelSpec, num: &[C], den: &[C], len: usize) -> Result<ScaledComplex> {
    let tag = |v: &[C]| v.iter().map(|&x| (x, len)).collect::<Vec<_>>();
    fac_ratio_with(k, &tag(num), &tag(den))
}

/// `(x; q)_len`, rejecting vanishing factors.
fn qp_den(x: C, q: C, len: usize) -> Result<ScaledComplex> {
    let mut xq = x;
    for _ in 0..len {
        if (1.0 - xq).norm() < POLE_EPS {
            return Err(Error::PoleHit { arg: xq });
        }
        xq *= q;
    }
    Ok(q_pochhammer(x, q, len))
}

fn qp_ratio(num: &[(C, usize)], den: &[(C, usize)], q: C) -> Result<ScaledComplex> {
    let mut r = ScaledComplex::ONE;
    for &(x, len) in num {
        r *= q_pochhammer(x, q, len);
    }
    for &(x, len) in den {
        r = r / qp_den(x, q, len)?;
    }
    Ok(r)
}

struct Ctx<'a> {
    k: &'a KernelSpec,
    d: C,
    n: usize,
    /// Worst cancellation factor seen so far.
    condition: Cell<f64>,
}

impl<'a> Ctx<'a> {
    fn new(k: &'a KernelSpec, n: usize) -> Self {
        Self {
            k,
            d: k.delta(),
            n,
            condition: Cell::new(1.0),
        }
    }

    fn record(&self, e: Evaluation) -> ScaledComplex {
        self.condition.set(self.condition.get().max(e.condition));
        e.value
    }

    fn phi(&self, a: Vec<C>, x: Vec<C>, b: Vec<C>, c: Vec<C>) -> Result<ScaledComplex> {
        Ok(self.record(phi_eval(&PhiParams::new(self.k.clone(), a, x, b, c, self.n)?)?))
    }

    fn single(&self, s: C, args: &[C]) -> Result<ScaledComplex> {
        Ok(self.record(e_single_eval(s, args, self.k, self.n)?))
    }

    fn e(&self, a: Vec<C>, x: Vec<C>, s: C, u: Vec<C>, v: Vec<C>, termination: Termination) -> Result<ScaledComplex> {
        let p = EParams {
            kernel: self.k.clone(),
            a,
            x,
            s,
            u,
            v,
            termination,
        };
        Ok(self.record(e_eval(&p)?))
    }

    fn mode_a(&self, k: usize) -> Termination {
        Termination::A { k, n: self.n }
    }

    fn fac(&self, num: &[C], den: &[C]) -> Result<ScaledComplex> {
        fac_ratio(self.k, num, den, self.n)
    }
}

fn alpha_of(draw: &ParameterDraw) -> Result<MultiIndex> {
    draw.sizes
        .alpha
        .clone()
        .ok_or_else(|| Error::ConstraintViolated("mode (B) draw without alpha".into()))
}

fn multi_index(draw: &ParameterDraw, name: &str) -> Result<MultiIndex> {
    let v = draw.integers(name)?;
    if v.iter().any(|&x| x < 0) {
        return Err(Error::ConstraintViolated(format!("{name}: negative entry")));
    }
    Ok(MultiIndex::new(v.iter().map(|&x| x as usize).collect()))
}

fn cauchy_config(draw: &ParameterDraw, with_u: bool) -> Result<CauchyConfig> {
    let cfg = CauchyConfig {
        kernel: draw.kernel.clone(),
        lambda: draw.scalar("lambda")?,
        z: draw.group("z")?,
        w: draw.group("w")?,
        u: if with_u { draw.scalar("u")? } else { C::new(0.0, 0.0) },
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Residual of the balancing condition, or `None` if the identity has none.
pub fn balance_residual(draw: &ParameterDraw) -> Result<Option<f64>> {
    use IdentityId::*;
    let d = draw.kernel.delta();
    let g = |name: &str| draw.group(name);
    let r = match draw.id {
        DualityPhi | DualityPhiBasic => sum(&g("a")?) - sum(&g("b")?),
        DualityPhiTfpp => sum(&g("a")?) + sum(&g("b")?) - sum(&g("c")?),
        DualityPhiBe => sum(&g("a")?) + sum(&g("b")?) - draw.scalar("e")? * g("y")?.len() as f64,
        EDuality | JacksonSumEm2 => {
            let n = g("u")?.len() as f64;
            let total = sum(&g("a")?) + sum(&g("c")?) + sum(&g("d")?) + sum(&g("u")?) + sum(&g("v")?);
            d * (n + 1.0) + draw.scalar("s")? * (n + 2.0) - total
        }
        FrenkelTuraev8e7 => d + draw.scalar("s")? * 2.0 - sum(&g("p")?),
        EM3To2m8 | BaileyIA | BaileyIIA | BaileyIB | BaileyIIB | BaileyIW | BaileyIIW => {
            d * 2.0 + draw.scalar("s")? * 3.0 - sum(&g("a")?) - sum(&g("c")?) - sum(&g("d")?)
        }
        Bailey10e9 => d * 2.0 + draw.scalar("s")? * 3.0 - sum(&g("c")?) - sum(&g("d")?),
        _ => return Ok(None),
    };
    Ok(Some(r.norm()))
}

/// Evaluates both sides of the identity recorded in `draw`.
///
/// Fails with [`Error::IllConditioned`] when a series loses more than
/// [`CONDITION_LIMIT`] in cancellation.
pub fn evaluate(draw: &ParameterDraw) -> Result<Pair> {
    conditioned(draw, evaluate_in)
}

fn conditioned(draw: &ParameterDraw, f: impl Fn(&ParameterDraw, &Ctx) -> Result<Pair>) -> Result<Pair> {
    let cx = Ctx::new(&draw.kernel, draw.sizes.big_n);
    let pair = f(draw, &cx)?;
    let condition = cx.condition.get();
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::IllConditioned { condition });
    }
    Ok(pair)
}

fn evaluate_in(draw: &ParameterDraw, cx: &Ctx) -> Result<Pair> {
    use IdentityId::*;
    let k = cx.k;
    let d = cx.d;
    let n_big = cx.n;
    let nd = d * n_big as f64;
    let g = |name: &str| draw.group(name);
    let s1 = |name: &str| draw.scalar(name);

    match draw.id {
        CauchyDet => {
            let cfg = cauchy_config(draw, false)?;
            Ok((cauchy_det_numeric(&cfg)?, cauchy_det_closed(&cfg)?))
        }
        FSymmetry => {
            let cfg = cauchy_config(draw, true)?;
            Ok((f_direct(&cfg)?, f_direct(&cfg.swapped())?))
        }
        FCoefficientD => {
            let cfg = cauchy_config(draw, true)?;
            Ok((f_coefficient(&cfg, n_big, Side::Z)?, f_coefficient(&cfg, n_big, Side::W)?))
        }
        PpdSpecialized => {
            let (x, y) = (g("x")?, g("y")?);
            let (alpha, beta) = (multi_index(draw, "alpha")?, multi_index(draw, "beta")?);
            Ok((
                specialized_sum(k, &x, &y, &alpha, &beta, n_big)?,
                specialized_sum(k, &y, &x, &beta, &alpha, n_big)?,
            ))
        }
        DualityPhi => {
            let (a, x, b, y) = (g("a")?, g("x")?, g("b")?, g("y")?);
            Ok((
                cx.phi(a.clone(), x.clone(), sub(&y, &b), y.clone())?,
                cx.phi(b, y, sub(&x, &a), x)?,
            ))
        }
        DualityPhiTfpp => {
            let (a, x, b, c) = (g("a")?, g("x")?, g("b")?, g("c")?);
            Ok((
                cx.phi(a.clone(), x.clone(), b.clone(), c.clone())?,
                cx.phi(sub(&c, &b), c, sub(&x, &a), x)?,
            ))
        }
        DualityPhiBe => {
            let (a, x, b, y, e) = (g("a")?, g("x")?, g("b")?, g("y")?, s1("e")?);
            let ea: Vec<C> = a.iter().map(|&ai| e - ai).collect();
            let eb: Vec<C> = b.iter().map(|&bk| e - bk).collect();
            Ok((
                cx.phi(a, x.clone(), add(&b, &y), shifted(&y, e))?,
                cx.phi(eb, y, add(&ea, &x), shifted(&x, e))?,
            ))
        }
        DualityPhiBasic => {
            let q = exp_mult(d);
            let (a, x, b, y) = (mult(&g("a")?), mult(&g("x")?), mult(&g("b")?), mult(&g("y")?));
            let div = |u: &[C], v: &[C]| u.iter().zip(v).map(|(&p, &r)| p / r).collect::<Vec<_>>();
            let lhs = BasicPhiParams {
                q,
                a: a.clone(),
                x: x.clone(),
                b: div(&y, &b),
                c: y.clone(),
                n: n_big,
            };
            let rhs = BasicPhiParams {
                q,
                b: div(&x, &a),
                a: b,
                c: x,
                x: y,
                n: n_big,
            };
            Ok((cx.record(phi_basic_eval(&lhs)?), cx.record(phi_basic_eval(&rhs)?)))
        }
        PhiToE => {
            let (a, x, b, c) = (g("a")?, g("x")?, g("b")?, g("c")?);
            let lhs = cx.phi(a.clone(), x.clone(), b.clone(), c.clone())?;
            let (a0, x0) = (a[0], x[0]);
            let mut num = vec![a0];
            let mut den = vec![d];
            for i in 1..a.len() {
                num.push(x0 - x[i] + a[i]);
                den.push(x0 - x[i]);
            }
            num.extend(b.iter().map(|&bk| x0 + bk));
            den.extend(c.iter().map(|&ck| x0 + ck));
            let pre = cx.fac(&num, &den)?;
            let u: Vec<C> = std::iter::once(a0 - x0).chain(b.iter().copied()).collect();
            let v: Vec<C> = std::iter::once(-nd)
                .chain(c.iter().map(|&ck| d * (1.0 - n_big as f64) - x0 - ck))
                .collect();
            let rhs = pre * cx.e(a[1..].to_vec(), x[1..].to_vec(), -nd - x0, u, v, cx.mode_a(0))?;
            Ok((lhs, rhs))
        }
        EToPhi => {
            let (a, x, s, u, v) = (g("a")?, g("x")?, s1("s")?, g("u")?, g("v")?);
            let n = u.len() - 1;
            let lhs = cx.e(a.clone(), x.clone(), s, u.clone(), v.clone(), cx.mode_a(n))?;
            let ut = u[n];
            let mut num = vec![-nd];
            let mut den = vec![d + s - ut];
            for (&xi, &ai) in x.iter().zip(&a) {
                num.push(d + s + xi);
                den.push(d + s + xi - ai);
            }
            for kk in 0..n {
                num.push(v[kk]);
                den.push(d + s - u[kk]);
            }
            let pre = cx.fac(&num, &den)?;
            let pa: Vec<C> = std::iter::once(-nd - s + ut).chain(a).collect();
            let px: Vec<C> = std::iter::once(-nd - s).chain(x).collect();
            let pc: Vec<C> = v[..n].iter().map(|&vk| d + s - vk).collect();
            Ok((lhs, pre * cx.phi(pa, px, u[..n].to_vec(), pc)?))
        }
        Phi2nReduction => {
            let (a, x, b, c) = (g("a")?, g("x")?, g("b")?, g("c")?);
            let lhs = cx.phi(a.clone(), x.clone(), b.clone(), c.clone())?;
            let mut num = vec![a[0], x[0] - x[1] + a[1]];
            let mut den = vec![d, x[0] - x[1]];
            num.extend(b.iter().map(|&bk| x[0] + bk));
            den.extend(c.iter().map(|&ck| x[0] + ck));
            let pre = cx.fac(&num, &den)?;
            let mut args = vec![x[1] - x[0] + a[0], a[1]];
            args.extend(b.iter().map(|&bk| x[1] + bk));
            args.push(-nd);
            args.extend(c.iter().map(|&ck| d * (1.0 - n_big as f64) - x[0] - ck));
            Ok((lhs, pre * cx.single(x[1] - x[0] - nd, &args)?))
        }
        EDuality | JacksonSumEm2 => {
            let (a, x, s, u, v, c, dd) = (g("a")?, g("x")?, s1("s")?, g("u")?, g("v")?, g("c")?, g("d")?);
            let (c1, c2, d1, d2) = (c[0], c[1], dd[0], dd[1]);
            let uf: Vec<C> = c.iter().chain(&u).copied().collect();
            let vf: Vec<C> = dd.iter().chain(&v).copied().collect();
            let lhs = cx.e(a.clone(), x.clone(), s, uf, vf, cx.mode_a(1))?;
            let ds = d + s;
            let mut num = vec![ds - c1 - d1, ds - c2 - d1];
            let mut den = vec![ds - c1, ds - c2];
            for (&xi, &ai) in x.iter().zip(&a) {
                num.extend([ds + xi, ds + xi - ai - d1]);
                den.extend([ds + xi - ai, ds + xi - d1]);
            }
            for (&uk, &vk) in u.iter().zip(&v) {
                num.extend([vk, ds - uk - d1]);
                den.extend([ds - uk, vk - d1]);
            }
            let pre = cx.fac(&num, &den)?;
            if draw.id == JacksonSumEm2 {
                return Ok((lhs, pre));
            }
            let t = d1 + d2 - s - d;
            let bb: Vec<C> = u.iter().zip(&v).map(|(&uk, &vk)| ds - uk - vk).collect();
            let yy: Vec<C> = v.iter().map(|&vk| ds - vk).collect();
            let zz = sub(&x, &a);
            let ww: Vec<C> = x.iter().map(|&xi| d1 + d2 - s - xi).collect();
            let ru: Vec<C> = [-c1, -c2].into_iter().chain(zz).collect();
            let rv: Vec<C> = [d1, d2].into_iter().chain(ww).collect();
            Ok((lhs, pre * cx.e(bb, yy, t, ru, rv, cx.mode_a(1))?))
        }
        FrenkelTuraev8e7 => {
            let (s, p) = (s1("s")?, g("p")?);
            let (b, c, dd) = (p[1], p[2], p[3]);
            let lhs = cx.single(s, &p)?;
            let ds = d + s;
            let rhs = cx.fac(
                &[ds, ds - b - c, ds - b - dd, ds - c - dd],
                &[ds - b, ds - c, ds - dd, ds - b - c - dd],
            )?;
            Ok((lhs, rhs))
        }
        EM3To2m8 => {
            let (a, x, s, c, dd) = (g("a")?, g("x")?, s1("s")?, g("c")?, g("d")?);
            let (d0, d1, d2) = (dd[0], dd[1], dd[2]);
            let lhs = cx.e(a.clone(), x.clone(), s, c.clone(), dd.clone(), cx.mode_a(2))?;
            let ds = d + s;
            let mut num = vec![d0];
            let mut den = vec![d0 - d1];
            for &ck in &c {
                num.push(ds - ck - d1);
                den.push(ds - ck);
            }
            for (&xi, &ai) in x.iter().zip(&a) {
                num.extend([ds + xi, ds + xi - ai - d1]);
                den.extend([ds + xi - ai, ds + xi - d1]);
            }
            let pre = cx.fac(&num, &den)?;
            let mut args = vec![d1, d2];
            args.extend(c.iter().map(|&ck| ds - d0 - ck));
            args.extend(x.iter().zip(&a).map(|(&xi, &ai)| ds - d0 + xi - ai));
            args.extend(x.iter().map(|&xi| d1 + d2 - s - xi));
            Ok((lhs, pre * cx.single(d1 + d2 - d0, &args)?))
        }
        Bailey10e9 => {
            let (s, c, dd) = (s1("s")?, g("c")?, g("d")?);
            let (d0, d1, d2) = (dd[0], dd[1], dd[2]);
            let args: Vec<C> = c.iter().chain(&dd).copied().collect();
            let lhs = cx.single(s, &args)?;
            let ds = d + s;
            let mut num = vec![d0, ds];
            let mut den = vec![d0 - d1, ds - d1];
            for &ck in &c {
                num.push(ds - ck - d1);
                den.push(ds - ck);
            }
            let pre = cx.fac(&num, &den)?;
            let mut rargs: Vec<C> = c.iter().map(|&ck| ds - d0 - ck).collect();
            rargs.extend([d1 + d2 - s, d1, d2]);
            Ok((lhs, pre * cx.single(d1 + d2 - d0, &rargs)?))
        }
        BaileyIA | BaileyIB => bailey_one(draw, cx, false),
        BaileyIIA | BaileyIIB => bailey_two(draw, cx, false),
        BaileyIW | BaileyIIW => bailey_basic(draw, cx),
        EPeriodicity => {
            let (a, x, s, u, v) = (g("a")?, g("x")?, s1("s")?, g("u")?, g("v")?);
            let (w1, w2) = k
                .effective_periods()
                .ok_or_else(|| Error::ConstraintViolated("periodicity requires an elliptic kernel".into()))?;
            let omega = if draw.integers("period")?.first() == Some(&1) { w2 } else { w1 };
            let shift = |vals: &[C], name: &str| -> Result<Vec<C>> {
                let l = draw.integers(name)?;
                if l.len() != vals.len() {
                    return Err(Error::LengthMismatch {
                        expected: vals.len(),
                        found: l.len(),
                    });
                }
                Ok(vals.iter().zip(l).map(|(&t, &j)| t + omega * j as f64).collect())
            };
            let term = cx.mode_a(v.len() - 1);
            let lhs = cx.e(shift(&a, "l")?, x.clone(), s, shift(&u, "p")?, shift(&v, "q")?, term.clone())?;
            Ok((lhs, cx.e(a, x, s, u, v, term)?))
        }
        EulerTransformation => {
            let q = exp_mult(d);
            let (a, x, b, y) = (mult(&g("a")?), mult(&g("x")?), mult(&g("b")?), mult(&g("y")?));
            let c = exp_mult(s1("c")?);
            let u = s1("u")?;
            let n = b.len();
            let lhs = BasicPhiParams {
                q,
                a: a.clone(),
                x: x.clone(),
                b: b.iter().zip(&y).map(|(&bk, &yk)| bk * yk).collect(),
                c: y.iter().map(|&yk| c * yk).collect(),
                n: 0,
            };
            let up = a.iter().chain(&b).product::<C>() * u / c.powi(n as i32);
            let rhs = BasicPhiParams {
                q,
                a: b.iter().map(|&bk| c / bk).collect(),
                x: y,
                b: x.iter().zip(&a).map(|(&xi, &ai)| c * xi / ai).collect(),
                c: x.iter().map(|&xi| c * xi).collect(),
                n: 0,
            };
            let den = q_pochhammer_inf(u, q)?;
            if den.abs() < POLE_EPS {
                return Err(Error::PoleHit { arg: u });
            }
            let ratio = q_pochhammer_inf(up, q)? / den;
            Ok((
                phi_basic_generating(&lhs, u, EULER_SERIES_TOL)?,
                ratio * phi_basic_generating(&rhs, up, EULER_SERIES_TOL)?,
            ))
        }
    }
}

struct BaileyParams {
    a: Vec<C>,
    x: Vec<C>,
    s: C,
    c: Vec<C>,
    d: Vec<C>,
    termination: Termination,
    alpha: Option<MultiIndex>,
}

fn bailey_params(draw: &ParameterDraw, cx: &Ctx) -> Result<BaileyParams> {
    let (alpha, termination) = if draw.id.is_mode_b() {
        let alpha = alpha_of(draw)?;
        (Some(alpha.clone()), Termination::B { alpha })
    } else {
        (None, cx.mode_a(2))
    };
    Ok(BaileyParams {
        a: draw.group("a")?,
        x: draw.group("x")?,
        s: draw.scalar("s")?,
        c: draw.group("c")?,
        d: draw.group("d")?,
        termination,
        alpha,
    })
}

/// Lengths of the shifted factorials in a prefactor: `N` in mode (A); `|α|`
/// for the `c`-factors and `α_i` for the `x_i`-factors in mode (B).
fn lengths(p: &BaileyParams, n: usize) -> (usize, Vec<usize>) {
    match &p.alpha {
        Some(alpha) => (alpha.weight(), alpha.parts().to_vec()),
        None => (n, vec![n; p.a.len()]),
    }
}

/// First Bailey transformation; `alternative` selects the prefactor written
/// through the transformed `s̃` (mode (A) only).
fn bailey_one(draw: &ParameterDraw, cx: &Ctx, alternative: bool) -> Result<Pair> {
    let p = bailey_params(draw, cx)?;
    let d = cx.d;
    let (c0, c1, c2) = (p.c[0], p.c[1], p.c[2]);
    let (d0, d1, d2) = (p.d[0], p.d[1], p.d[2]);
    let a_sum = sum(&p.a);
    let ds = d + p.s;
    let st = d + p.s * 2.0 - c2 - d0 - d1;
    let base = cx.e(p.a.clone(), p.x.clone(), p.s, p.c.clone(), p.d.clone(), p.termination.clone())?;
    let lhs = cx.e(
        p.a.clone(),
        p.x.clone(),
        st,
        vec![c0, c1, ds - d0 - d1],
        vec![ds - c2 - d1, ds - c2 - d0, d2],
        p.termination.clone(),
    )?;
    let (big, small) = lengths(&p, cx.n);
    let mut num = Vec::new();
    let mut den = Vec::new();
    if alternative {
        num.extend([(ds - c0, big), (ds - c1, big)]);
        den.extend([(d + st - c0, big), (d + st - c1, big)]);
        for ((&xi, &ai), &l) in p.x.iter().zip(&p.a).zip(&small) {
            num.extend([(ds + xi - ai, l), (d + st + xi, l)]);
            den.extend([(ds + xi, l), (d + st + xi - ai, l)]);
        }
    } else {
        let shift = if p.alpha.is_some() { d2 } else { a_sum };
        num.extend([(ds - c0, big), (ds - c1, big)]);
        den.extend([(ds - c0 - shift, big), (ds - c1 - shift, big)]);
        for ((&xi, &ai), &l) in p.x.iter().zip(&p.a).zip(&small) {
            if p.alpha.is_some() {
                let e = ds - xi + ai - a_sum - c0 - c1;
                num.extend([(ds + xi - d2, l), (e - d2, l)]);
                den.extend([(ds + xi, l), (e, l)]);
            } else {
                num.extend([(ds + xi - ai, l), (ds - xi - c0 - c1 - a_sum, l)]);
                den.extend([(ds + xi, l), (ds - xi + ai - c0 - c1 - a_sum, l)]);
            }
        }
    }
    Ok((lhs, fac_ratio_with(cx.k, &num, &den)? * base))
}

/// Second Bailey transformation; `alternative` selects the prefactor written
/// through the transformed variables (mode (A) only).
fn bailey_two(draw: &ParameterDraw, cx: &Ctx, alternative: bool) -> Result<Pair> {
    let p = bailey_params(draw, cx)?;
    let d = cx.d;
    let (c0, c1, c2) = (p.c[0], p.c[1], p.c[2]);
    let (d0, d1, d2) = (p.d[0], p.d[1], p.d[2]);
    let a_sum = sum(&p.a);
    let ds = d + p.s;
    let st = d + p.s * 2.0 - c0 - c1 - c2;
    let ct = vec![ds - c1 - c2, ds - c0 - c2, ds - c0 - c1];
    let xt: Vec<C> = p.x.iter().zip(&p.a).map(|(&xi, &ai)| ai - xi - a_sum).collect();
    let base = cx.e(p.a.clone(), p.x.clone(), p.s, p.c.clone(), p.d.clone(), p.termination.clone())?;
    let lhs = cx.e(p.a.clone(), xt.clone(), st, ct, p.d.clone(), p.termination.clone())?;
    let (_, small) = lengths(&p, cx.n);
    let mut num = Vec::new();
    let mut den = Vec::new();
    for (i, ((&xi, &ai), &l)) in p.x.iter().zip(&p.a).zip(&small).enumerate() {
        let y = ds + xi;
        if alternative {
            let z = d + st + xt[i];
            num.extend([(y - ai, l), (y - d1, l), (z, l), (z - ai - d1, l)]);
            den.extend([(y, l), (y - ai - d1, l), (z - ai, l), (z - d1, l)]);
        } else if p.alpha.is_some() {
            num.extend([(y - d0, l), (y - d1, l), (y - d2, l), (y - d0 - d1 - d2, l)]);
            den.extend([(y, l), (y - d0 - d1, l), (y - d0 - d2, l), (y - d1 - d2, l)]);
        } else {
            num.extend([(y - d0, l), (y - d1, l), (y - ai, l), (y - ai - d0 - d1, l)]);
            den.extend([(y, l), (y - d0 - d1, l), (y - ai - d0, l), (y - ai - d1, l)]);
        }
    }
    Ok((lhs, fac_ratio_with(cx.k, &num, &den)? * base))
}

/// Second Bailey transformation for `W^{m,3}` in multiplicative variables.
fn bailey_basic(draw: &ParameterDraw, cx: &Ctx) -> Result<Pair> {
    let n = cx.n;
    let p = bailey_params(draw, cx)?;
    let q = exp_mult(cx.d);
    let (a, x, s, c, d) = (mult(&p.a), mult(&p.x), exp_mult(p.s), mult(&p.c), mult(&p.d));
    let base = BasicEParams {
        q,
        a: a.clone(),
        x: x.clone(),
        s,
        u: c.clone(),
        v: d.clone(),
        termination: p.termination.clone(),
    };
    let a_prod: C = a.iter().product();
    let transformed = BasicEParams {
        q,
        a: a.clone(),
        x: a.iter().zip(&x).map(|(&ai, &xi)| ai / (a_prod * xi)).collect(),
        s: q * s * s / (c[0] * c[1] * c[2]),
        u: vec![q * s / (c[1] * c[2]), q * s / (c[0] * c[2]), q * s / (c[0] * c[1])],
        v: d.clone(),
        termination: p.termination.clone(),
    };
    let (_, small) = lengths(&p, n);
    let mut num = Vec::new();
    let mut den = Vec::new();
    for ((&xi, &ai), &l) in x.iter().zip(&a).zip(&small) {
        let qs = q * s * xi;
        num.extend([(qs / d[0], l), (qs / d[1], l)]);
        den.extend([(qs, l), (qs / (d[0] * d[1]), l)]);
        if p.alpha.is_some() {
            num.extend([(qs / d[2], l), (qs / (d[0] * d[1] * d[2]), l)]);
            den.extend([(qs / (d[0] * d[2]), l), (qs / (d[1] * d[2]), l)]);
        } else {
            num.extend([(qs / ai, l), (qs / (ai * d[0] * d[1]), l)]);
            den.extend([(qs / (ai * d[0]), l), (qs / (ai * d[1]), l)]);
        }
    }
    let pre = qp_ratio(&num, &den, q)?;
    Ok((cx.record(w_series_eval(&transformed)?), pre * cx.record(w_series_eval(&base)?)))
}

/// The equivalent prefactor forms of the mode-(A) Bailey transformations,
/// expressed through the transformed variables.
pub fn evaluate_alternative(draw: &ParameterDraw) -> Result<Pair> {
    match draw.id {
        IdentityId::BaileyIA => conditioned(draw, |d, cx| bailey_one(d, cx, true)),
        IdentityId::BaileyIIA => conditioned(draw, |d, cx| bailey_two(d, cx, true)),
        other => Err(Error::NotApplicable {
            id: other.name().into(),
            kernel: draw.kernel.variant().name().into(),
        }),
    }
}

/// Evaluates the identity recorded in `draw` and compares both sides.
pub fn verify_identity(id: IdentityId, draw: ParameterDraw, tol: f64) -> Result<VerificationReport> {
    if draw.id != id {
        return Err(Error::ConstraintViolated(format!(
            "draw was sampled for {}, not {id}",
            draw.id
        )));
    }
    id.check_applicable(draw.kernel.variant())?;
    if let Some(res) = balance_residual(&draw)? {
        if !draw.perturbed && res > BALANCE_TOL {
            return Err(Error::ConstraintViolated(format!(
                "balancing residual {res:.3e} exceeds {BALANCE_TOL:e}"
            )));
        }
    }
    let start = Instant::now();
    let (lhs, rhs) = evaluate(&draw)?;
    let wall_time = start.elapsed();
    let both_zero = lhs.is_zero() && rhs.is_zero();
    let rel_err = ScaledComplex::rel_diff(&lhs, &rhs);
    let pass = !both_zero && rel_err < tol;
    let status = if both_zero {
        Status::Inconclusive
    } else if pass {
        Status::Pass
    } else {
        Status::Fail
    };
    let note = match id {
        IdentityId::DualityPhi if draw.sizes.m == 1 && draw.sizes.n == 1 => {
            Some("tautological for (m, n) = (1, 1)".to_string())
        }
        _ if both_zero => Some("both sides vanish".to_string()),
        _ => None,
    };
    Ok(VerificationReport {
        id,
        kernel: draw.kernel.variant(),
        sizes: draw.sizes.clone(),
        seed: draw.seed,
        draw: Some(draw),
        lhs: Some(lhs),
        rhs: Some(rhs),
        rel_err: Some(rel_err),
        pass,
        tolerance: tol,
        status,
        error: None,
        note,
        wall_time,
    })
}
