#![allow(dead_code)]

use ellhyp::series::{phi, PhiParams};
use ellhyp::{Gauge, KernelSpec, KernelVariant, ScaledComplex};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn point(rng: &mut ChaCha8Rng, scale: f64) -> Complex64 {
    Complex64::new(rng.gen_range(-scale..=scale), rng.gen_range(-scale..=scale))
}

pub fn points(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<Complex64> {
    (0..n).map(|_| point(rng, scale)).collect()
}

/// Random gauge with `|a|, |b| ≤ 0.5` and `0.5 ≤ |c| ≤ 2`.
pub fn random_gauge(rng: &mut ChaCha8Rng) -> Gauge {
    let disc = |rng: &mut ChaCha8Rng| Complex64::from_polar(0.5 * rng.gen::<f64>().sqrt(), rng.gen_range(0.0..std::f64::consts::TAU));
    Gauge {
        a: disc(rng),
        b: disc(rng),
        c: Complex64::from_polar(rng.gen_range(0.5..=2.0), rng.gen_range(0.0..std::f64::consts::TAU)),
    }
}

pub fn gauged_kernel(variant: KernelVariant, rng: &mut ChaCha8Rng) -> KernelSpec {
    loop {
        if let Ok(k) = KernelSpec::default_for(variant).with_gauge(random_gauge(rng)) {
            return k;
        }
    }
}

pub fn rel(a: &ScaledComplex, b: &ScaledComplex) -> f64 {
    ScaledComplex::rel_diff(a, b)
}

/// `[t]_k` as a product of single brackets.
pub fn fac(k: &KernelSpec, t: Complex64, n: usize) -> ScaledComplex {
    (0..n)
        .map(|j| k.bracket(t + k.delta() * j as f64).unwrap())
        .product()
}

/// `∏[num]_n / ∏[den]_n`, factor by factor.
pub fn fac_ratio(k: &KernelSpec, num: &[Complex64], den: &[Complex64], n: usize) -> ScaledComplex {
    let top: ScaledComplex = num.iter().map(|&t| fac(k, t, n)).product();
    let bottom: ScaledComplex = den.iter().map(|&t| fac(k, t, n)).product();
    top / bottom
}

/// `Φ^{1+m,n}` through its `E^{m,n+1}` form and back, with both prefactors
/// computed factor by factor.
pub fn round_trip(k: &KernelSpec, a: &[Complex64], x: &[Complex64], b: &[Complex64], c: &[Complex64], big_n: usize) -> ellhyp::Result<ScaledComplex> {
    let d = k.delta();
    let nd = d * big_n as f64;
    let (a0, x0) = (a[0], x[0]);
    let n = b.len();
    // Φ → E
    let mut num = vec![a0];
    let mut den = vec![d];
    for i in 1..a.len() {
        num.push(x0 - x[i] + a[i]);
        den.push(x0 - x[i]);
    }
    num.extend(b.iter().map(|&bk| x0 + bk));
    den.extend(c.iter().map(|&ck| x0 + ck));
    let to_e = fac_ratio(k, &num, &den, big_n);
    let s = -nd - x0;
    let mut u: Vec<Complex64> = b.to_vec();
    u.push(a0 - x0);
    let mut v: Vec<Complex64> = c.iter().map(|&ck| d * (1.0 - big_n as f64) - x0 - ck).collect();
    v.push(-nd);
    let (ea, ex) = (a[1..].to_vec(), x[1..].to_vec());
    // E → Φ
    let ut = u[n];
    let mut num = vec![-nd];
    let mut den = vec![d + s - ut];
    for (&xi, &ai) in ex.iter().zip(&ea) {
        num.push(d + s + xi);
        den.push(d + s + xi - ai);
    }
    for kk in 0..n {
        num.push(v[kk]);
        den.push(d + s - u[kk]);
    }
    let to_phi = fac_ratio(k, &num, &den, big_n);
    let pa: Vec<Complex64> = std::iter::once(-nd - s + ut).chain(ea).collect();
    let px: Vec<Complex64> = std::iter::once(-nd - s).chain(ex).collect();
    let pc: Vec<Complex64> = v[..n].iter().map(|&vk| d + s - vk).collect();
    let back = phi(&PhiParams::new(k.clone(), pa, px, u[..n].to_vec(), pc, big_n)?)?;
    Ok(to_e * to_phi * back)
}
