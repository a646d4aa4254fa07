//! Numerical classification of del Pezzo fibration families of degree 1, 2, 3.
//!
//! A family is a hypersurface in a weighted projective space bundle over
//! `P^{n-2}`:
//!
//! | degree | ambient twists / weights | hypersurface |
//! |--------|--------------------------|--------------|
//! | 1 | `(0, λ, 2μ, 3μ)` / `(1, 1, 2, 3)` | `(6μ, 6)` |
//! | 2 | `(0, λ, μ, ν)` / `(1, 1, 1, 2)` | `(2ν, 4)` |
//! | 3 | `(0, λ, μ, ν)` / `(1, 1, 1, 1)` | `(θ, 3)` |
//!
//! Verdicts concern very general members. A family is `NotStablyRationalVG`
//! when the sheaf `M` attached to its characteristic-`p` degeneration has a
//! nonzero section, which is a linear inequality in the parameters.
//!
//! Rule identifiers in verdict reasons are stable strings of the form
//! `dp<degree>.<name>`; the full list is [`RULES`].

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::bundle::{Bidegree, BundleSpec, DivisorClass};
use crate::error::{Error, Result};

/// Every rule identifier that can appear in a verdict, with a description.
pub const RULES: &[(&str, &str)] = &[
    ("params.n_at_least_three", "n >= 3"),
    ("params.normalized", "twists sorted as required by the degree"),
    ("dp1.mu_positive", "mu > 0"),
    ("dp1.mu_below_lambda_forces_ratio", "mu < lambda implies 6 mu = 5 lambda"),
    ("dp2.nu_positive", "nu >= 1"),
    ("dp2.nu_one_untwisted", "nu = 1 implies lambda = mu = 0"),
    ("dp2.two_nu_ge_three_mu", "2 nu >= 3 mu"),
    ("dp2.two_nu_ge_four_lambda", "2 nu >= 4 lambda"),
    ("dp2.middle_range_threefold", "3 mu < 2 nu < 4 mu and 2 nu != 3 mu + lambda imply n = 3"),
    ("dp2.low_range_equality", "2 nu < 3 mu + lambda implies 2 nu = 3 mu"),
    ("dp3.theta_ge_two_nu", "theta >= 2 nu"),
    ("dp3.theta_ge_three_mu", "theta >= 3 mu"),
    ("dp3.upper_gap_dimension", "2 nu + mu < theta < 3 nu implies n <= 4"),
    ("dp3.middle_gap_threefold", "2 nu + lambda < theta < 2 nu + mu implies n = 3"),
    ("dp3.lower_gap_equality", "theta < 2 nu + lambda implies theta = 2 nu"),
    ("dp3.small_theta_list", "theta <= 2 implies (theta,lambda,mu,nu) in {(2,0,0,0),(2,0,0,1),(1,0,0,0)}"),
    ("dp1.obstruction_inequality", "4 mu - lambda - (n-1) >= 0"),
    ("dp2.obstruction_inequality", "2 nu - lambda - mu - (n-1) >= 0"),
    ("dp2.triple_cover_inequality", "nu - lambda - (n-1) >= 0 on the route 2 nu = 3 mu = 4 lambda"),
    ("dp3.obstruction_inequality", "theta - lambda - mu - (n-1) >= 0"),
    ("dp3.exception_rational", "(theta,lambda,mu,nu) = (1,0,0,0)"),
    ("dp3.exception_cubic_blowup", "(theta,lambda,mu,nu) = (3,1,1,1)"),
    ("dp1.low_dimension", "n in {3,4} forces the obstruction inequality"),
    ("dp2.low_dimension", "n = 3 forces the obstruction inequality"),
    ("dp3.low_dimension", "n = 3 outside the exceptions forces the obstruction inequality"),
    ("anticanonical_not_ample", "-K_X not ample forces the obstruction inequality"),
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "degree")]
pub enum FamilyParams {
    #[serde(rename = "1")]
    Dp1 { n: i64, lambda: i64, mu: i64 },
    #[serde(rename = "2")]
    Dp2 { n: i64, lambda: i64, mu: i64, nu: i64 },
    #[serde(rename = "3")]
    Dp3 {
        n: i64,
        theta: i64,
        lambda: i64,
        mu: i64,
        nu: i64,
    },
}

impl FamilyParams {
    /// Builds parameters from a degree and the list `λ,μ` (degree 1),
    /// `λ,μ,ν` (degree 2) or `θ,λ,μ,ν` (degree 3).
    pub fn from_list(degree: u32, n: i64, values: &[i64]) -> Result<FamilyParams> {
        let want = match degree {
            1 => 2,
            2 => 3,
            3 => 4,
            _ => return Err(Error::InvalidArgument(format!("degree {degree} (expected 1, 2 or 3)"))),
        };
        if values.len() != want {
            return Err(Error::InvalidArgument(format!(
                "degree {degree} takes {want} parameters, got {}",
                values.len()
            )));
        }
        Ok(match degree {
            1 => FamilyParams::Dp1 {
                n,
                lambda: values[0],
                mu: values[1],
            },
            2 => FamilyParams::Dp2 {
                n,
                lambda: values[0],
                mu: values[1],
                nu: values[2],
            },
            _ => FamilyParams::Dp3 {
                n,
                theta: values[0],
                lambda: values[1],
                mu: values[2],
                nu: values[3],
            },
        })
    }

    pub fn degree(&self) -> u32 {
        match self {
            FamilyParams::Dp1 { .. } => 1,
            FamilyParams::Dp2 { .. } => 2,
            FamilyParams::Dp3 { .. } => 3,
        }
    }

    pub fn n(&self) -> i64 {
        match *self {
            FamilyParams::Dp1 { n, .. } | FamilyParams::Dp2 { n, .. } | FamilyParams::Dp3 { n, .. } => n,
        }
    }

    /// Parameters in the order accepted by [`FamilyParams::from_list`].
    pub fn values(&self) -> Vec<i64> {
        match *self {
            FamilyParams::Dp1 { lambda, mu, .. } => vec![lambda, mu],
            FamilyParams::Dp2 { lambda, mu, nu, .. } => vec![lambda, mu, nu],
            FamilyParams::Dp3 {
                theta, lambda, mu, nu, ..
            } => vec![theta, lambda, mu, nu],
        }
    }

    /// Canonical representative under the coordinate changes of the
    /// ambient bundle that permute weight-one fiber variables and shift all
    /// twists.
    pub fn normalize(&self) -> FamilyParams {
        match *self {
            FamilyParams::Dp1 { n, lambda, mu } if lambda < 0 => FamilyParams::Dp1 {
                n,
                lambda: -lambda,
                mu: mu - lambda,
            },
            FamilyParams::Dp1 { .. } => *self,
            FamilyParams::Dp2 { n, lambda, mu, nu } => {
                let mut t = [0, lambda, mu];
                t.sort();
                let s = t[0];
                FamilyParams::Dp2 {
                    n,
                    lambda: t[1] - s,
                    mu: t[2] - s,
                    nu: nu - 2 * s,
                }
            }
            FamilyParams::Dp3 {
                n,
                theta,
                lambda,
                mu,
                nu,
            } => {
                let mut t = [0, lambda, mu, nu];
                t.sort();
                let s = t[0];
                FamilyParams::Dp3 {
                    n,
                    theta: theta - 3 * s,
                    lambda: t[1] - s,
                    mu: t[2] - s,
                    nu: t[3] - s,
                }
            }
        }
    }

    pub fn is_normalized(&self) -> bool {
        match *self {
            FamilyParams::Dp1 { lambda, .. } => lambda >= 0,
            FamilyParams::Dp2 { lambda, mu, .. } => 0 <= lambda && lambda <= mu,
            FamilyParams::Dp3 { lambda, mu, nu, .. } => 0 <= lambda && lambda <= mu && mu <= nu,
        }
    }

    /// The ambient bundle over `P^{n-2}`.
    pub fn ambient(&self) -> Result<BundleSpec> {
        let n = self.n();
        if n < 3 {
            return Err(Error::InvalidArgument(format!("n = {n} (need n >= 3)")));
        }
        let base = (n - 2) as usize;
        match *self {
            FamilyParams::Dp1 { lambda, mu, .. } => {
                BundleSpec::new(base, vec![0, lambda, 2 * mu, 3 * mu], vec![1, 1, 2, 3])
            }
            FamilyParams::Dp2 { lambda, mu, nu, .. } => {
                BundleSpec::new(base, vec![0, lambda, mu, nu], vec![1, 1, 1, 2])
            }
            FamilyParams::Dp3 { lambda, mu, nu, .. } => {
                BundleSpec::new(base, vec![0, lambda, mu, nu], vec![1, 1, 1, 1])
            }
        }
    }

    /// Bidegree of the defining hypersurface.
    pub fn hypersurface_bidegree(&self) -> Bidegree {
        match *self {
            FamilyParams::Dp1 { mu, .. } => Bidegree::new(6 * mu, 6),
            FamilyParams::Dp2 { nu, .. } => Bidegree::new(2 * nu, 4),
            FamilyParams::Dp3 { theta, .. } => Bidegree::new(theta, 3),
        }
    }
}

impl std::fmt::Display for FamilyParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let v: Vec<String> = self.values().iter().map(|x| x.to_string()).collect();
        write!(f, "DP{}({},{})", self.degree(), self.n(), v.join(","))
    }
}

fn reason(id: &str, detail: impl std::fmt::Display) -> String {
    format!("{id}: {detail}")
}

/// Violated validity rules; empty when the parameters are valid.
pub fn validity_violations(params: &FamilyParams) -> Vec<String> {
    let mut out = Vec::new();
    let n = params.n();
    if n < 3 {
        out.push(reason("params.n_at_least_three", format!("n = {n}")));
    }
    if !params.is_normalized() {
        out.push(reason("params.normalized", format!("{params} (normal form {})", params.normalize())));
    }
    match *params {
        FamilyParams::Dp1 { lambda, mu, .. } => {
            if mu <= 0 {
                out.push(reason("dp1.mu_positive", format!("mu = {mu}")));
            }
            if mu < lambda && 6 * mu != 5 * lambda {
                out.push(reason(
                    "dp1.mu_below_lambda_forces_ratio",
                    format!("6 mu = {}, 5 lambda = {}", 6 * mu, 5 * lambda),
                ));
            }
        }
        FamilyParams::Dp2 { lambda, mu, nu, .. } => {
            if nu < 1 {
                out.push(reason("dp2.nu_positive", format!("nu = {nu}")));
            }
            if nu == 1 && (lambda != 0 || mu != 0) {
                out.push(reason("dp2.nu_one_untwisted", format!("lambda = {lambda}, mu = {mu}")));
            }
            if 2 * nu < 3 * mu {
                out.push(reason("dp2.two_nu_ge_three_mu", format!("2 nu = {}, 3 mu = {}", 2 * nu, 3 * mu)));
            }
            if 2 * nu < 4 * lambda {
                out.push(reason(
                    "dp2.two_nu_ge_four_lambda",
                    format!("2 nu = {}, 4 lambda = {}", 2 * nu, 4 * lambda),
                ));
            }
            if 3 * mu < 2 * nu && 2 * nu < 4 * mu && 2 * nu != 3 * mu + lambda && n != 3 {
                out.push(reason("dp2.middle_range_threefold", format!("n = {n}")));
            }
            if 2 * nu < 3 * mu + lambda && 2 * nu != 3 * mu {
                out.push(reason("dp2.low_range_equality", format!("2 nu = {}, 3 mu = {}", 2 * nu, 3 * mu)));
            }
        }
        FamilyParams::Dp3 {
            theta, lambda, mu, nu, ..
        } => {
            if theta < 2 * nu {
                out.push(reason("dp3.theta_ge_two_nu", format!("theta = {theta}, 2 nu = {}", 2 * nu)));
            }
            if theta < 3 * mu {
                out.push(reason("dp3.theta_ge_three_mu", format!("theta = {theta}, 3 mu = {}", 3 * mu)));
            }
            if 2 * nu + mu < theta && theta < 3 * nu && n > 4 {
                out.push(reason("dp3.upper_gap_dimension", format!("n = {n}")));
            }
            if 2 * nu + lambda < theta && theta < 2 * nu + mu && n != 3 {
                out.push(reason("dp3.middle_gap_threefold", format!("n = {n}")));
            }
            if theta < 2 * nu + lambda && theta != 2 * nu {
                out.push(reason("dp3.lower_gap_equality", format!("theta = {theta}, 2 nu = {}", 2 * nu)));
            }
            if theta <= 2 && ![(2, 0, 0, 0), (2, 0, 0, 1), (1, 0, 0, 0)].contains(&(theta, lambda, mu, nu)) {
                out.push(reason("dp3.small_theta_list", format!("({theta},{lambda},{mu},{nu})")));
            }
        }
    }
    out
}

pub fn validate(params: &FamilyParams) -> std::result::Result<(), Vec<String>> {
    let v = validity_violations(params);
    if v.is_empty() {
        Ok(())
    } else {
        Err(v)
    }
}

fn require_valid(params: &FamilyParams) -> Result<()> {
    validate(params).map_err(|v| Error::InvalidArgument(format!("{params} is not a valid family: {}", v.join("; "))))
}

/// `-K_X`, computed by adjunction on the ambient bundle and checked against
/// the closed forms `(n-1+λ-μ)F + D`, `(n-1+λ+μ-ν)F + D`, `(n-1+λ+μ+ν-θ)F + D`.
pub fn anticanonical_class(params: &FamilyParams) -> Result<DivisorClass> {
    require_valid(params)?;
    let p = params.ambient()?;
    let k = -p.adjunction_bidegree(params.hypersurface_bidegree());
    let n1 = params.n() - 1;
    let closed = match *params {
        FamilyParams::Dp1 { lambda, mu, .. } => n1 + lambda - mu,
        FamilyParams::Dp2 { lambda, mu, nu, .. } => n1 + lambda + mu - nu,
        FamilyParams::Dp3 {
            theta, lambda, mu, nu, ..
        } => n1 + lambda + mu + nu - theta,
    };
    if k != Bidegree::new(closed, 1) {
        return Err(Error::Inconsistent(format!(
            "adjunction gives -K = {k}, closed form gives ({closed},1)"
        )));
    }
    Ok(DivisorClass::from(k))
}

/// `t` such that `αF + D` is ample on `X` exactly when `α > t`: the largest
/// slope `twist/weight` of the ambient bundle.
pub fn ample_threshold(params: &FamilyParams) -> Result<Ratio<i64>> {
    require_valid(params)?;
    Ok(params.ambient()?.max_slope())
}

pub fn anticanonical_ample(params: &FamilyParams) -> Result<bool> {
    let k = anticanonical_class(params)?;
    Ok(Ratio::from_integer(k.coeff_f) > ample_threshold(params)?)
}

/// Which degeneration computes `M`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegenerationRoute {
    /// Degree 1, char 2: double cover of the `P(1,1,2)`-bundle.
    Dp1Double,
    /// Degree 2, char 2: double cover of the `P^2`-bundle.
    Dp2Double,
    /// Degree 2 with `2ν = 3μ = 4λ`, char 3: triple cover of a hypersurface
    /// `z̄x + f` in a `P(1,1,3,2)`-bundle.
    Dp2TripleSection,
    /// Degree 3 with `θ > 3ν`, char 3: triple cover of `a w̄ + f` in a
    /// `P(1,1,1,3)`-bundle.
    Dp3TripleSection,
    /// Degree 3 with `θ = 3ν`, char 3: triple cover of the `P^2`-bundle.
    Dp3Triple,
    /// Degree 3 with `θ < 3ν`, char 2: double cover of `w̄ g + f` in a
    /// `P(1,1,1,2)`-bundle.
    Dp3DoubleSection,
}

impl DegenerationRoute {
    pub fn for_params(params: &FamilyParams) -> DegenerationRoute {
        match *params {
            FamilyParams::Dp1 { .. } => DegenerationRoute::Dp1Double,
            FamilyParams::Dp2 { lambda, mu, nu, .. } => {
                if 2 * nu == 3 * mu && 3 * mu == 4 * lambda {
                    DegenerationRoute::Dp2TripleSection
                } else {
                    DegenerationRoute::Dp2Double
                }
            }
            FamilyParams::Dp3 { theta, nu, .. } => match theta.cmp(&(3 * nu)) {
                std::cmp::Ordering::Greater => DegenerationRoute::Dp3TripleSection,
                std::cmp::Ordering::Equal => DegenerationRoute::Dp3Triple,
                std::cmp::Ordering::Less => DegenerationRoute::Dp3DoubleSection,
            },
        }
    }

    pub fn characteristic(self) -> u32 {
        match self {
            DegenerationRoute::Dp1Double | DegenerationRoute::Dp2Double | DegenerationRoute::Dp3DoubleSection => 2,
            _ => 3,
        }
    }
}

/// The cover `X -> Z` of a route: `Z` is either a bundle or a hypersurface in
/// one, branched along a section of `L^p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverData {
    pub route: DegenerationRoute,
    pub cover_degree: u32,
    /// Bundle containing `Z` (equal to `Z` when `z_hypersurface` is `None`).
    pub z_ambient: BundleSpec,
    pub z_hypersurface: Option<Bidegree>,
    pub l: Bidegree,
}

pub fn cover_data(params: &FamilyParams) -> Result<CoverData> {
    let route = DegenerationRoute::for_params(params);
    let base = (params.n() - 2).max(1) as usize;
    let (z_ambient, z_hypersurface, l) = match *params {
        FamilyParams::Dp1 { lambda, mu, .. } => (
            BundleSpec::new(base, vec![0, lambda, 2 * mu], vec![1, 1, 2])?,
            None,
            Bidegree::new(3 * mu, 3),
        ),
        FamilyParams::Dp2 { lambda, mu, nu, .. } => match route {
            DegenerationRoute::Dp2Double => (
                BundleSpec::new(base, vec![0, lambda, mu], vec![1, 1, 1])?,
                None,
                Bidegree::new(nu, 2),
            ),
            _ => (
                BundleSpec::new(base, vec![0, lambda, 3 * mu, nu], vec![1, 1, 3, 2])?
                    .with_names(&["x", "y", "zbar", "w"])?,
                Some(Bidegree::new(2 * nu, 4)),
                Bidegree::new(mu, 1),
            ),
        },
        FamilyParams::Dp3 {
            theta, lambda, mu, nu, ..
        } => match route {
            DegenerationRoute::Dp3TripleSection => (
                BundleSpec::new(base, vec![0, lambda, mu, 3 * nu], vec![1, 1, 1, 3])?
                    .with_names(&["x", "y", "z", "wbar"])?,
                Some(Bidegree::new(theta, 3)),
                Bidegree::new(nu, 1),
            ),
            DegenerationRoute::Dp3Triple => (
                BundleSpec::new(base, vec![0, lambda, mu], vec![1, 1, 1])?,
                None,
                Bidegree::new(nu, 1),
            ),
            _ => (
                BundleSpec::new(base, vec![0, lambda, mu, 2 * nu], vec![1, 1, 1, 2])?
                    .with_names(&["x", "y", "z", "wbar"])?,
                Some(Bidegree::new(theta, 3)),
                Bidegree::new(nu, 1),
            ),
        },
    };
    Ok(CoverData {
        route,
        cover_degree: route.characteristic(),
        z_ambient,
        z_hypersurface,
        l,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheafM {
    pub route: DegenerationRoute,
    /// Closed form for the route.
    pub cited: Bidegree,
    /// `ω_Z ⊗ L^p` from the cover data.
    pub recomputed: Bidegree,
}

/// Closed-form bidegree of `M` for the route.
pub fn cited_sheaf_m(params: &FamilyParams) -> Bidegree {
    let n1 = params.n() - 1;
    match *params {
        FamilyParams::Dp1 { lambda, mu, .. } => Bidegree::new(4 * mu - lambda - n1, 2),
        FamilyParams::Dp2 { lambda, mu, nu, .. } => match DegenerationRoute::for_params(params) {
            DegenerationRoute::Dp2Double => Bidegree::new(2 * nu - lambda - mu - n1, 1),
            _ => Bidegree::new(nu - lambda - n1, 0),
        },
        FamilyParams::Dp3 {
            theta, lambda, mu, ..
        } => Bidegree::new(theta - lambda - mu - n1, 0),
    }
}

/// `ω_Z ⊗ L^p`, with `ω_Z` from the toric canonical class or adjunction.
pub fn recomputed_sheaf_m(cover: &CoverData) -> Bidegree {
    let omega = match cover.z_hypersurface {
        Some(h) => cover.z_ambient.adjunction_bidegree(h),
        None => cover.z_ambient.canonical_bidegree(),
    };
    omega + cover.l.scaled(cover.cover_degree as i64)
}

pub fn sheaf_m_bidegree(params: &FamilyParams) -> Result<SheafM> {
    require_valid(params)?;
    let cover = cover_data(params)?;
    let cited = cited_sheaf_m(params);
    let recomputed = recomputed_sheaf_m(&cover);
    if cited != recomputed {
        return Err(Error::Inconsistent(format!(
            "{params}: closed form M = {cited} but ω_Z ⊗ L^p = {recomputed}"
        )));
    }
    Ok(SheafM {
        route: cover.route,
        cited,
        recomputed,
    })
}

/// A monomial of bidegree `bd` on `spec`, if the graded piece is nonzero.
///
/// Searches fiber exponents first and completes with a power of `u0`, so the
/// cost is independent of `bd.alpha`.
pub fn h0_witness(spec: &BundleSpec, bd: Bidegree) -> Option<Vec<u32>> {
    if bd.beta < 0 {
        return None;
    }
    let b = spec.base_vars();
    let m = spec.fiber_vars();
    let mut cur = vec![0u32; m];
    fn search(spec: &BundleSpec, j: usize, beta: i64, alpha: i64, cur: &mut Vec<u32>) -> Option<i64> {
        if j == cur.len() {
            return (beta == 0 && alpha >= 0).then_some(alpha);
        }
        let w = spec.weights[j] as i64;
        for e in 0..=beta / w {
            cur[j] = e as u32;
            if let Some(a) = search(spec, j + 1, beta - e * w, alpha - e * spec.twists[j], cur) {
                return Some(a);
            }
        }
        cur[j] = 0;
        None
    }
    let alpha = search(spec, 0, bd.beta, bd.alpha, &mut cur)?;
    let mut e = vec![0u32; b];
    e[0] = alpha as u32;
    e.extend(cur);
    Some(e)
}

pub fn h0_positive(spec: &BundleSpec, bd: Bidegree) -> bool {
    h0_witness(spec, bd).is_some()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VerdictTag {
    NotStablyRationalVG,
    ExceptionalRational,
    ExceptionalCubicBlowup,
    Inconclusive,
    Invalid,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub params: FamilyParams,
    pub tag: VerdictTag,
    pub reasons: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sheaf_m: Option<SheafM>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anticanonical: Option<DivisorClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anticanonical_ample: Option<bool>,
}

/// Classifies a family after normalizing it.
pub fn classify(params: &FamilyParams) -> Verdict {
    let params = params.normalize();
    let violations = validity_violations(&params);
    if !violations.is_empty() {
        return Verdict {
            params,
            tag: VerdictTag::Invalid,
            reasons: violations,
            sheaf_m: None,
            anticanonical: None,
            anticanonical_ample: None,
        };
    }
    let mut reasons = Vec::new();
    if let FamilyParams::Dp3 {
        theta, lambda, mu, nu, ..
    } = params
    {
        let tag = match (theta, lambda, mu, nu) {
            (1, 0, 0, 0) => Some((VerdictTag::ExceptionalRational, "dp3.exception_rational")),
            (3, 1, 1, 1) => Some((VerdictTag::ExceptionalCubicBlowup, "dp3.exception_cubic_blowup")),
            _ => None,
        };
        if let Some((tag, id)) = tag {
            return Verdict {
                params,
                tag,
                reasons: vec![reason(id, params)],
                sheaf_m: None,
                anticanonical: anticanonical_class(&params).ok(),
                anticanonical_ample: anticanonical_ample(&params).ok(),
            };
        }
    }
    // Valid parameters always give consistent adjunction and M computations;
    // a failure here is a bug, surfaced as Inconclusive with the error.
    let (m, k, ample) = match (
        sheaf_m_bidegree(&params),
        anticanonical_class(&params),
        anticanonical_ample(&params),
    ) {
        (Ok(m), Ok(k), Ok(a)) => (m, k, a),
        (m, k, a) => {
            let err = [m.err(), k.err(), a.err()].into_iter().flatten().next().unwrap();
            return Verdict {
                params,
                tag: VerdictTag::Inconclusive,
                reasons: vec![err.to_string()],
                sheaf_m: None,
                anticanonical: None,
                anticanonical_ample: None,
            };
        }
    };
    let rule = match m.route {
        DegenerationRoute::Dp1Double => "dp1.obstruction_inequality",
        DegenerationRoute::Dp2Double => "dp2.obstruction_inequality",
        DegenerationRoute::Dp2TripleSection => "dp2.triple_cover_inequality",
        _ => "dp3.obstruction_inequality",
    };
    let value = m.cited.alpha;
    let holds = value >= 0;
    reasons.push(reason(rule, format!("{value} {} 0", if holds { ">=" } else { "<" })));
    if holds {
        let n = params.n();
        let low_dim = match params {
            FamilyParams::Dp1 { .. } => (n == 3 || n == 4).then_some("dp1.low_dimension"),
            FamilyParams::Dp2 { .. } => (n == 3).then_some("dp2.low_dimension"),
            FamilyParams::Dp3 { .. } => (n == 3).then_some("dp3.low_dimension"),
        };
        if let Some(id) = low_dim {
            reasons.push(reason(id, format!("n = {n}")));
        }
        if !ample {
            reasons.push(reason("anticanonical_not_ample", format!("-K = {}F + D", k.coeff_f)));
        }
    }
    Verdict {
        params,
        tag: if holds {
            VerdictTag::NotStablyRationalVG
        } else {
            VerdictTag::Inconclusive
        },
        reasons,
        sheaf_m: Some(m),
        anticanonical: Some(k),
        anticanonical_ample: Some(ample),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationBounds {
    /// Upper bound for every twist `λ, μ, ν`.
    pub max_twist: i64,
    /// Upper bound for `θ` (degree 3 only).
    pub max_theta: i64,
}

/// All valid normalized families of the degree within the bounds, with
/// verdicts, in lexicographic parameter order.
pub fn enumerate_families(degree: u32, n: i64, bounds: EnumerationBounds) -> Result<Vec<(FamilyParams, Verdict)>> {
    let t = bounds.max_twist;
    let mut out = Vec::new();
    let mut push = |p: FamilyParams| {
        if validate(&p).is_ok() {
            out.push((p, classify(&p)));
        }
    };
    match degree {
        1 => {
            for lambda in 0..=t {
                for mu in 0..=t {
                    push(FamilyParams::Dp1 { n, lambda, mu });
                }
            }
        }
        2 => {
            for lambda in 0..=t {
                for mu in lambda..=t {
                    for nu in 0..=t {
                        push(FamilyParams::Dp2 { n, lambda, mu, nu });
                    }
                }
            }
        }
        3 => {
            for theta in 0..=bounds.max_theta {
                for lambda in 0..=t {
                    for mu in lambda..=t {
                        for nu in mu..=t {
                            push(FamilyParams::Dp3 {
                                n,
                                theta,
                                lambda,
                                mu,
                                nu,
                            });
                        }
                    }
                }
            }
        }
        _ => return Err(Error::InvalidArgument(format!("degree {degree} (expected 1, 2 or 3)"))),
    }
    Ok(out)
}

/// The three families of products `P^{n-2} x P^2` and `P^{n-2} x P^3`:
/// 1. double covers branched in bidegree `(2m, 4)`, `DP2(n,0,0,m)`;
/// 2. triple covers branched in bidegree `(3m, 3)`, `DP3(n,3m,0,0,m)`;
/// 3. hypersurfaces of bidegree `(d, 3)`, `DP3(n,d,0,0,0)`.
///
/// The warning is set when the parameter is below the bound `(n-1)/2`,
/// `(n-1)/3` or `n-1` of the case.
pub fn product_family(case: u32, n: i64, m_or_d: i64) -> Result<(FamilyParams, Option<String>)> {
    let k = m_or_d;
    let (params, bound_ok, bound) = match case {
        1 => (
            FamilyParams::Dp2 {
                n,
                lambda: 0,
                mu: 0,
                nu: k,
            },
            2 * k >= n - 1,
            "m >= (n-1)/2",
        ),
        2 => (
            FamilyParams::Dp3 {
                n,
                theta: 3 * k,
                lambda: 0,
                mu: 0,
                nu: k,
            },
            3 * k >= n - 1,
            "m >= (n-1)/3",
        ),
        3 => (
            FamilyParams::Dp3 {
                n,
                theta: k,
                lambda: 0,
                mu: 0,
                nu: 0,
            },
            k >= n - 1,
            "d >= n-1",
        ),
        _ => return Err(Error::InvalidArgument(format!("product family case {case} (expected 1-3)"))),
    };
    let warning = (!bound_ok).then(|| format!("bound {bound} fails for n = {n}, parameter {k}; verdict may be Inconclusive"));
    Ok((params, warning))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dp1(n: i64, l: i64, m: i64) -> FamilyParams {
        FamilyParams::Dp1 { n, lambda: l, mu: m }
    }
    fn dp2(n: i64, l: i64, m: i64, v: i64) -> FamilyParams {
        FamilyParams::Dp2 { n, lambda: l, mu: m, nu: v }
    }
    fn dp3(n: i64, t: i64, l: i64, m: i64, v: i64) -> FamilyParams {
        FamilyParams::Dp3 {
            n,
            theta: t,
            lambda: l,
            mu: m,
            nu: v,
        }
    }

    #[test]
    fn validity_examples() {
        let v = validity_violations(&dp1(3, 0, 0));
        assert!(v[0].starts_with("dp1.mu_positive"));
        assert!(validate(&dp2(3, 0, 0, 1)).is_ok());
        let v = validity_violations(&dp3(5, 6, 1, 3, 2));
        assert!(v.iter().any(|r| r.starts_with("dp3.theta_ge_three_mu")));
        assert!(validate(&dp1(3, 6, 5)).is_ok());
        assert!(validate(&dp1(3, 2, 1)).is_err());
    }

    #[test]
    fn anticanonical_examples() {
        assert_eq!(anticanonical_class(&dp1(3, 0, 1)).unwrap(), DivisorClass { coeff_f: 1, coeff_d: 1 });
        assert_eq!(anticanonical_class(&dp3(3, 3, 0, 0, 1)).unwrap(), DivisorClass { coeff_f: 0, coeff_d: 1 });
        assert_eq!(anticanonical_class(&dp2(3, 0, 0, 1)).unwrap(), DivisorClass { coeff_f: 1, coeff_d: 1 });
    }

    #[test]
    fn ample_thresholds() {
        assert_eq!(ample_threshold(&dp3(3, 6, 0, 1, 2)).unwrap(), Ratio::from_integer(2));
        assert_eq!(ample_threshold(&dp1(3, 0, 1)).unwrap(), Ratio::from_integer(1));
        assert_eq!(ample_threshold(&dp1(3, 6, 5)).unwrap(), Ratio::from_integer(6));
        assert_eq!(ample_threshold(&dp2(3, 0, 0, 3)).unwrap(), Ratio::new(3, 2));
        // nu < 2 mu: the threshold is mu
        assert_eq!(ample_threshold(&dp2(3, 3, 4, 6)).unwrap(), Ratio::from_integer(4));
    }

    #[test]
    fn sheaf_m_examples() {
        assert_eq!(sheaf_m_bidegree(&dp1(3, 0, 1)).unwrap().cited, Bidegree::new(2, 2));
        assert_eq!(sheaf_m_bidegree(&dp2(3, 0, 0, 1)).unwrap().cited, Bidegree::new(0, 1));
        assert_eq!(sheaf_m_bidegree(&dp3(3, 3, 0, 0, 1)).unwrap().cited, Bidegree::new(1, 0));
        let m = sheaf_m_bidegree(&dp2(3, 3, 4, 6)).unwrap();
        assert_eq!(m.route, DegenerationRoute::Dp2TripleSection);
        assert_eq!(m.cited, Bidegree::new(1, 0));
        // canonical classes of the covered varieties
        let c = cover_data(&dp1(5, 1, 2)).unwrap();
        assert_eq!(c.z_ambient.canonical_bidegree(), Bidegree::new(-4 - 1 - 4, -4));
        let c = cover_data(&dp2(5, 1, 2, 3)).unwrap();
        assert_eq!(c.z_ambient.canonical_bidegree(), Bidegree::new(-4 - 1 - 2, -3));
        let c = cover_data(&dp2(5, 3, 4, 6)).unwrap();
        assert_eq!(
            c.z_ambient.adjunction_bidegree(c.z_hypersurface.unwrap()),
            Bidegree::new(-4 - 3 - 12 + 6, -3)
        );
    }

    #[test]
    fn h0_examples() {
        let p = dp1(3, 0, 1).ambient().unwrap();
        assert!(h0_positive(&p, Bidegree::new(2, 2)));
        assert!(!h0_positive(&p, Bidegree::new(-1, 2)));
        assert!(h0_positive(&p, Bidegree::new(0, 0)));
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&dp3(3, 1, 0, 0, 0)).tag, VerdictTag::ExceptionalRational);
        assert_eq!(classify(&dp3(3, 3, 1, 1, 1)).tag, VerdictTag::ExceptionalCubicBlowup);
        assert_eq!(classify(&dp2(3, 0, 0, 1)).tag, VerdictTag::NotStablyRationalVG);
        assert_eq!(classify(&dp1(3, 0, 0)).tag, VerdictTag::Invalid);
        assert_eq!(classify(&dp3(6, 4, 0, 0, 0)).tag, VerdictTag::Inconclusive);
    }

    #[test]
    fn route_selection() {
        assert_eq!(DegenerationRoute::for_params(&dp3(3, 4, 0, 1, 1)), DegenerationRoute::Dp3TripleSection);
        assert_eq!(DegenerationRoute::for_params(&dp3(3, 3, 0, 0, 1)), DegenerationRoute::Dp3Triple);
        assert_eq!(DegenerationRoute::for_params(&dp3(3, 2, 0, 0, 1)), DegenerationRoute::Dp3DoubleSection);
        assert_eq!(DegenerationRoute::for_params(&dp2(3, 3, 4, 6)), DegenerationRoute::Dp2TripleSection);
    }

    #[test]
    fn enumeration_examples() {
        let b = EnumerationBounds {
            max_twist: 3,
            max_theta: 3,
        };
        let e = enumerate_families(3, 3, b).unwrap();
        let odd: Vec<_> = e
            .iter()
            .filter(|(_, v)| v.tag != VerdictTag::NotStablyRationalVG)
            .map(|(p, _)| p.values())
            .collect();
        assert_eq!(odd, vec![vec![1, 0, 0, 0], vec![3, 1, 1, 1]]);
        let b = EnumerationBounds {
            max_twist: 2,
            max_theta: 0,
        };
        assert!(enumerate_families(1, 3, b)
            .unwrap()
            .iter()
            .all(|(_, v)| v.tag == VerdictTag::NotStablyRationalVG));
        let b = EnumerationBounds {
            max_twist: 3,
            max_theta: 0,
        };
        let e = enumerate_families(2, 3, b).unwrap();
        assert!(!e.is_empty());
        assert!(e.iter().all(|(_, v)| v.tag == VerdictTag::NotStablyRationalVG));
    }

    #[test]
    fn product_families() {
        for (case, n, k) in [(1, 3, 1), (2, 3, 1), (3, 3, 2), (3, 4, 3)] {
            let (p, w) = product_family(case, n, k).unwrap();
            assert!(w.is_none());
            assert_eq!(classify(&p).tag, VerdictTag::NotStablyRationalVG, "{p}");
        }
        let (p, w) = product_family(3, 3, 1).unwrap();
        assert!(w.is_some());
        assert_eq!(classify(&p).tag, VerdictTag::ExceptionalRational);
    }

    fn grid() -> Vec<FamilyParams> {
        let mut out = Vec::new();
        for n in 3..=5 {
            for a in 0..=4 {
                for b in 0..=4 {
                    out.push(dp1(n, a, b));
                    for c in 0..=4 {
                        out.push(dp2(n, a, b, c));
                        for t in 0..=12 {
                            out.push(dp3(n, t, a, b, c));
                        }
                    }
                }
            }
        }
        out.retain(|p| validate(p).is_ok());
        out
    }

    #[test]
    fn non_ample_forces_inequality_on_grid() {
        for p in grid() {
            let v = classify(&p);
            if v.anticanonical_ample == Some(false) {
                assert_eq!(v.tag, VerdictTag::NotStablyRationalVG, "{p}: {:?}", v.reasons);
            }
        }
    }

    #[test]
    fn low_dimension_forces_inequality_on_grid() {
        for p in grid() {
            let n = p.n();
            let forced = match p {
                FamilyParams::Dp1 { .. } => n <= 4,
                _ => n == 3,
            };
            let tag = classify(&p).tag;
            if forced {
                assert!(
                    matches!(
                        tag,
                        VerdictTag::NotStablyRationalVG
                            | VerdictTag::ExceptionalRational
                            | VerdictTag::ExceptionalCubicBlowup
                    ),
                    "{p}"
                );
            }
        }
    }

    #[test]
    fn h0_witness_agrees_with_basis() {
        let p = dp2(4, 1, 2, 3).ambient().unwrap();
        for a in -3..8 {
            for b in -1..5 {
                let bd = Bidegree::new(a, b);
                let basis = p.monomial_basis(bd);
                assert_eq!(h0_positive(&p, bd), !basis.is_empty(), "{bd}");
                if let Some(w) = h0_witness(&p, bd) {
                    assert_eq!(p.degree_of(&w), bd);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn theta_monotone(n in 3i64..6, t in 0i64..14, l in 0i64..4, m in 0i64..4, v in 0i64..4) {
            let p = dp3(n, t, l, m.max(l), v.max(m).max(l));
            let q = dp3(n, t + 1, l, m.max(l), v.max(m).max(l));
            if classify(&p).tag == VerdictTag::NotStablyRationalVG && validate(&q).is_ok() {
                prop_assert_eq!(classify(&q).tag, VerdictTag::NotStablyRationalVG);
            }
        }

        #[test]
        fn classify_invariant_under_twist_permutation(n in 3i64..6, t in 0i64..14, a in -3i64..4, b in -3i64..4, c in -3i64..4) {
            let p = dp3(n, t, a, b, c);
            let q = dp3(n, t, b, a, c);
            prop_assert_eq!(classify(&p), classify(&q));
            let p = dp2(n, a, b, c);
            let q = dp2(n, b, a, c);
            prop_assert_eq!(classify(&p), classify(&q));
        }

        #[test]
        fn cited_m_matches_recomputation(n in 3i64..6, t in 0i64..13, a in 0i64..5, b in 0i64..5, c in 0i64..5) {
            for p in [dp1(n, a, b), dp2(n, a, b, c), dp3(n, t, a, b, c)] {
                if validate(&p).is_ok() {
                    let m = sheaf_m_bidegree(&p).unwrap();
                    prop_assert_eq!(m.cited, m.recomputed);
                }
            }
        }
    }
}
