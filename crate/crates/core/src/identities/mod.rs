//! Registry of verifiable identities with constraint-aware samplers and a
//! uniform verification engine.

mod evaluate;
mod sample;
mod suite;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Duration;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::combinatorics::MultiIndex;
use crate::error::{Error, Result};
use crate::kernel::{KernelSpec, KernelVariant};
use crate::scaled::ScaledComplex;

pub use evaluate::{balance_residual, evaluate, evaluate_alternative, verify_identity};
pub use sample::{sample_parameters, sample_parameters_with, SampleOptions, MAX_RESAMPLES};
pub use suite::{aggregate, run_suite, write_csv, write_jsonl, AggregateRow, SizeRanges, SuiteConfig};

/// Tolerance on the balancing residual of an unperturbed draw.
pub const BALANCE_TOL: f64 = 1e-12;
/// Largest cancellation factor `Σ|terms| / |Σ terms|` accepted from a series
/// evaluation; draws beyond it are resampled.
pub const CONDITION_LIMIT: f64 = 1e5;
/// Shift applied to a dependent parameter by the negative control.
pub const BREAK_BALANCE_SHIFT: f64 = 1e-3;

macro_rules! identities {
    ($($variant:ident => $name:literal, $anchor:literal, $desc:literal, $constraints:literal;)*) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum IdentityId {
            $(#[serde(rename = $name)] $variant,)*
        }

        impl IdentityId {
            pub const ALL: [IdentityId; 24] = [$(IdentityId::$variant,)*];

            pub fn name(&self) -> &'static str {
                match self { $(IdentityId::$variant => $name,)* }
            }

            pub fn anchor(&self) -> &'static str {
                match self { $(IdentityId::$variant => $anchor,)* }
            }

            pub fn description(&self) -> &'static str {
                match self { $(IdentityId::$variant => $desc,)* }
            }

            pub fn constraints(&self) -> &'static str {
                match self { $(IdentityId::$variant => $constraints,)* }
            }
        }
    };
}

identities! {
    CauchyDet => "cauchy_det", "Cauchy determinant formula",
        "det([λ+z_i+w_j]/([λ][z_i+w_j])) equals its closed product form",
        "M ≥ 1; λ, z, w free";
    FSymmetry => "f_symmetry", "symmetry of F(z|w;u)",
        "F(z|w;u) = F(w|z;u)",
        "M ≥ 1; λ, z, w, u free";
    FCoefficientD => "f_coefficient_d", "degree-d coefficient identity",
        "the d-subset sums of the z-side and w-side expansions agree for each d",
        "M ≥ 1, 0 ≤ d ≤ M (d = N)";
    PpdSpecialized => "ppd_specialized", "specialization at multi-indices",
        "the degree-d sums at z = −(x)_α and w = −(y)_β agree",
        "m, n ≥ 1; |α| = |β| ≤ 5; d = N";
    DualityPhi => "duality_phi", "duality transformation",
        "Φ^{m,n}_N(a; x | y−b; y) = Φ^{n,m}_N(b; y | x−a; x)",
        "Σa = Σb; b_n dependent";
    DualityPhiTfpp => "duality_phi_tfpp", "duality transformation, two-sided parameter form",
        "Φ^{m,n}_N(a; x | b; c) = Φ^{n,m}_N(c−b; c | x−a; x)",
        "Σa + Σb = Σc; c_n dependent";
    DualityPhiBe => "duality_phi_be", "duality transformation, shifted form",
        "Φ^{m,n}_N(a; x | b+y; e+y) = Φ^{n,m}_N(e−b; y | e−a+x; e+x)",
        "Σa + Σb = n·e; b_n dependent";
    DualityPhiBasic => "duality_phi_basic", "basic duality transformation",
        "φ^{m,n}_N(a; x | y/b; y) = φ^{n,m}_N(b; y | x/a; x)",
        "trigonometric only; a₁⋯a_m = b₁⋯b_n; b_n dependent";
    PhiToE => "phi_to_e", "Φ to E rewrite",
        "Φ^{1+m,n}_N equals a prefactor times a terminating E^{m,n+1}",
        "m, n ≥ 0; all parameters free";
    EToPhi => "e_to_phi", "E to Φ rewrite",
        "a terminating E^{m,n+1} equals a prefactor times Φ^{1+m,n}_N",
        "m, n ≥ 0; last v = −Nδ";
    Phi2nReduction => "phi2n_reduction", "reduction of Φ^{2,n}_N",
        "Φ^{2,n}_N equals a prefactor times a terminating very-well-poised series",
        "m = 2; n ≥ 0";
    EDuality => "e_duality", "E duality transformation",
        "balanced E^{m,n+2} equals a prefactor times E^{n,m+2}",
        "Σa + Σ(u+v) + c₁+c₂+d₁+d₂ = (n+1)δ+(n+2)s; d₂ = −Nδ; c₂ dependent";
    JacksonSumEm2 => "jackson_sum_em2", "Dougall/Jackson summation for E^{m,2}",
        "balanced E^{m,2} equals a closed product",
        "n = 0; Σa + c₁+c₂+d₁+d₂ = δ+2s; d₂ = −Nδ; c₂ dependent";
    FrenkelTuraev8e7 => "frenkel_turaev_8e7", "Frenkel-Turaev summation",
        "balanced terminating 8E7 equals a closed product",
        "a+b+c+d+e = δ+2s; e = −Nδ; d dependent";
    EM3To2m8 => "e_m3_to_2m8", "E^{m,3} to 2m+8E2m+7 rewrite",
        "balanced E^{m,3} equals a prefactor times a very-well-poised single series",
        "Σa + Σc + Σd = 2δ+3s; d₂ = −Nδ; c₂ dependent";
    Bailey10e9 => "bailey_10e9", "transformation of balanced 10E9",
        "balanced terminating 10E9 equals a prefactor times another 10E9",
        "Σc + Σd = 2δ+3s; d₂ = −Nδ; c₃ dependent";
    BaileyIA => "bailey_I_A", "Bailey transformation I, termination (A)",
        "E^{m,3} with (s; c₀,c₁,c₂; d₀,d₁,d₂) transformed by the first Bailey map",
        "Σa + Σc + Σd = 2δ+3s; d₂ = −Nδ; c₂ dependent";
    BaileyIIA => "bailey_II_A", "Bailey transformation II, termination (A)",
        "E^{m,3} with x_i ↦ a_i−x_i−Σa and the second Bailey map",
        "Σa + Σc + Σd = 2δ+3s; d₂ = −Nδ; c₂ dependent";
    BaileyIB => "bailey_I_B", "Bailey transformation I, termination (B)",
        "first Bailey map for E^{m,3} terminating through a_i = −α_iδ",
        "a_i = −α_iδ; Σa + Σc + Σd = 2δ+3s; c₂ dependent";
    BaileyIIB => "bailey_II_B", "Bailey transformation II, termination (B)",
        "second Bailey map for E^{m,3} terminating through a_i = −α_iδ",
        "a_i = −α_iδ; Σa + Σc + Σd = 2δ+3s; c₂ dependent";
    BaileyIW => "bailey_I_W", "basic Bailey transformation for W^{m,3}, termination (A)",
        "W^{m,3} with x_i ↦ a_i/(a₁⋯a_m x_i) and the second Bailey map, d₂ = q^{-N}",
        "trigonometric only; balanced; d₂ = q^{-N}; c₂ dependent";
    BaileyIIW => "bailey_II_W", "basic Bailey transformation for W^{m,3}, termination (B)",
        "W^{m,3} with x_i ↦ a_i/(a₁⋯a_m x_i) and the second Bailey map, a_i = q^{-α_i}",
        "trigonometric only; balanced; a_i = q^{-α_i}; c₂ dependent";
    EPeriodicity => "e_periodicity", "quasi-periodicity of E^{m,n}",
        "E^{m,n} is unchanged when a, u, v are shifted by lω, pω, qω with Σl+Σp+Σq = 0",
        "elliptic only; m, n ≥ 1; last v = −Nδ";
    EulerTransformation => "euler_transformation", "Euler transformation of the generating series",
        "Σ u^N φ_N(a; x | by; cy) = (a·b·u/cⁿ; q)_∞/(u; q)_∞ · Σ u'^N φ_N(c/b; y | cx/a; cx)",
        "trigonometric only; |q| ∈ [0.2, 0.6]; |u| ∈ [0.05, 0.4]";
}

impl IdentityId {
    pub fn index(&self) -> usize {
        Self::ALL.iter().position(|id| id == self).expect("id is registered")
    }

    /// Whether the identity is stated for the given kernel class.
    pub fn applies_to(&self, variant: KernelVariant) -> bool {
        use IdentityId::*;
        match self {
            DualityPhiBasic | BaileyIW | BaileyIIW | EulerTransformation => variant == KernelVariant::Trigonometric,
            EPeriodicity => variant == KernelVariant::Elliptic,
            _ => true,
        }
    }

    pub fn check_applicable(&self, variant: KernelVariant) -> Result<()> {
        if self.applies_to(variant) {
            Ok(())
        } else {
            Err(Error::NotApplicable {
                id: self.name().into(),
                kernel: variant.name().into(),
            })
        }
    }

    /// Default tolerance for this identity on the given kernel class.
    pub fn default_tolerance(&self, variant: KernelVariant) -> f64 {
        match (self, variant) {
            (IdentityId::EulerTransformation, _) => 1e-6,
            (_, KernelVariant::Elliptic) => 1e-7,
            _ => 1e-9,
        }
    }

    /// Whether a balancing condition is imposed, so that the negative control applies.
    pub fn is_balanced(&self) -> bool {
        use IdentityId::*;
        matches!(
            self,
            DualityPhi
                | DualityPhiTfpp
                | DualityPhiBe
                | DualityPhiBasic
                | EDuality
                | JacksonSumEm2
                | FrenkelTuraev8e7
                | EM3To2m8
                | Bailey10e9
                | BaileyIA
                | BaileyIIA
                | BaileyIB
                | BaileyIIB
                | BaileyIW
                | BaileyIIW
        )
    }

    /// Whether termination is through `a_i = −α_iδ`.
    pub fn is_mode_b(&self) -> bool {
        matches!(self, IdentityId::BaileyIB | IdentityId::BaileyIIB | IdentityId::BaileyIIW)
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IdentityId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::InvalidSizes(format!("identity: unknown id {s:?}")))
    }
}

/// One registry entry.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RegistryEntry {
    pub id: IdentityId,
    pub anchor: &'static str,
    pub description: &'static str,
    pub constraints: &'static str,
}

pub fn list_identities() -> Vec<RegistryEntry> {
    IdentityId::ALL
        .iter()
        .map(|&id| RegistryEntry {
            id,
            anchor: id.anchor(),
            description: id.description(),
            constraints: id.constraints(),
        })
        .collect()
}

/// Size configuration `(m, n, N or α)` of a draw.
///
/// For the Cauchy family `m` is the matrix size `M`; for `f_coefficient_d`
/// and `ppd_specialized`, `N` is the degree `d`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sizes {
    #[serde(default)]
    pub m: usize,
    #[serde(default)]
    pub n: usize,
    #[serde(default, rename = "N")]
    pub big_n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<MultiIndex>,
}

impl Sizes {
    pub fn new(m: usize, n: usize, big_n: usize) -> Self {
        Self {
            m,
            n,
            big_n,
            alpha: None,
        }
    }

    pub fn with_alpha(alpha: MultiIndex) -> Self {
        Self {
            m: alpha.len(),
            alpha: Some(alpha),
            ..Self::default()
        }
    }

    /// Projects onto the fields that matter for `id`, rejecting invalid shapes.
    pub fn canonical(&self, id: IdentityId) -> Result<Self> {
        use IdentityId::*;
        let bad = |msg: &str| Err(Error::InvalidSizes(format!("{id}: {msg}")));
        let Sizes { m, n, big_n, .. } = *self;
        let out = match id {
            CauchyDet | FSymmetry => {
                if m == 0 {
                    return bad("m (matrix size M) must be at least 1");
                }
                Sizes::new(m, 0, 0)
            }
            FCoefficientD => {
                if m == 0 || big_n > m {
                    return bad("need M ≥ 1 and degree d = N ≤ M");
                }
                Sizes::new(m, 0, big_n)
            }
            PpdSpecialized | DualityPhi | DualityPhiTfpp | DualityPhiBe | DualityPhiBasic | EPeriodicity => {
                if m == 0 || n == 0 {
                    return bad("m and n must be at least 1");
                }
                Sizes::new(m, n, big_n)
            }
            PhiToE | EToPhi => Sizes::new(m, n, big_n),
            Phi2nReduction => Sizes::new(2, n, big_n),
            EDuality => {
                if m == 0 {
                    return bad("m must be at least 1");
                }
                Sizes::new(m, n, big_n)
            }
            JacksonSumEm2 => {
                if m == 0 || n != 0 {
                    return bad("requires m ≥ 1 and n = 0");
                }
                Sizes::new(m, 0, big_n)
            }
            FrenkelTuraev8e7 | Bailey10e9 => Sizes::new(0, 0, big_n),
            EM3To2m8 | BaileyIA | BaileyIIA | BaileyIW => {
                if m == 0 {
                    return bad("m must be at least 1");
                }
                Sizes::new(m, 3, big_n)
            }
            BaileyIB | BaileyIIB | BaileyIIW => match &self.alpha {
                Some(alpha) if alpha.is_empty() => return bad("alpha must be non-empty"),
                Some(alpha) => Sizes {
                    m: alpha.len(),
                    n: 3,
                    big_n: 0,
                    alpha: Some(alpha.clone()),
                },
                None if m == 0 => return bad("m must be at least 1"),
                None => Sizes::new(m, 3, 0),
            },
            EulerTransformation => {
                if m == 0 || n == 0 {
                    return bad("m and n must be at least 1");
                }
                Sizes::new(m, n, 0)
            }
        };
        Ok(out)
    }
}

impl fmt::Display for Sizes {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m={} n={} N={}", self.m, self.n, self.big_n)?;
        if let Some(alpha) = &self.alpha {
            write!(f, " alpha={alpha}")?;
        }
        Ok(())
    }
}

/// A sampled parameter set for one identity.
///
/// A parameter group is the concatenation of its free entries followed by
/// its dependent entries, so the dependent parameter is always last.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterDraw {
    pub id: IdentityId,
    pub kernel: KernelSpec,
    pub sizes: Sizes,
    pub seed: u64,
    pub resamples: u32,
    pub free: BTreeMap<String, Vec<Complex64>>,
    #[serde(default)]
    pub dependent: BTreeMap<String, Vec<Complex64>>,
    #[serde(default)]
    pub ints: BTreeMap<String, Vec<i64>>,
    pub balance_residual: f64,
    #[serde(default)]
    pub perturbed: bool,
}

impl ParameterDraw {
    /// The full group `name`: free entries then dependent ones.
    pub fn group(&self, name: &str) -> Result<Vec<Complex64>> {
        let free = self.free.get(name);
        let dep = self.dependent.get(name);
        if free.is_none() && dep.is_none() {
            return Err(Error::ConstraintViolated(format!("parameter {name:?} missing from draw")));
        }
        Ok(free.into_iter().chain(dep).flatten().copied().collect())
    }

    /// The single entry of group `name`.
    pub fn scalar(&self, name: &str) -> Result<Complex64> {
        let g = self.group(name)?;
        match g.as_slice() {
            [v] => Ok(*v),
            _ => Err(Error::ConstraintViolated(format!(
                "parameter {name:?} has {} entries, expected 1",
                g.len()
            ))),
        }
    }

    pub fn integers(&self, name: &str) -> Result<&[i64]> {
        self.ints
            .get(name)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::ConstraintViolated(format!("integer parameter {name:?} missing from draw")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
}

/// Outcome of one verification case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub id: IdentityId,
    pub kernel: KernelVariant,
    pub sizes: Sizes,
    pub seed: u64,
    pub draw: Option<ParameterDraw>,
    pub lhs: Option<ScaledComplex>,
    pub rhs: Option<ScaledComplex>,
    pub rel_err: Option<f64>,
    pub pass: bool,
    pub tolerance: f64,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl VerificationReport {
    /// A report for a case that produced no comparable values.
    pub fn inconclusive(id: IdentityId, kernel: KernelVariant, sizes: Sizes, seed: u64, tolerance: f64, err: &Error) -> Self {
        Self {
            id,
            kernel,
            sizes,
            seed,
            draw: None,
            lhs: None,
            rhs: None,
            rel_err: None,
            pass: false,
            tolerance,
            status: Status::Inconclusive,
            error: Some(err.to_string()),
            note: None,
            wall_time: Duration::ZERO,
        }
    }
}
