//! Special members in characteristic 2 or 3 and the checks run on them.
//!
//! Each family degenerates to a member `X` that is a degree-p cover of some
//! `Z`, branched along a section of `L^p`. For a random member the pipeline
//! checks, in order:
//!
//! 1. `X` is nonsingular along the locus removed from the cover, by a
//!    structural argument on the equation plus a rational Jacobian scan, and
//!    `Z°` is nonsingular where that is not automatic;
//! 2. each documented positive-dimensional critical locus satisfies the
//!    hypersurface or complete-intersection locus condition on the charts
//!    covering it;
//! 3. the branch section has only (almost) nondegenerate critical points on
//!    `Z°` away from those loci;
//! 4. `M` has a nonzero section.
//!
//! When `Z` is a hypersurface `a w̄ + f` (or `g w̄ + f`), the section `w̄` is
//! replaced on `(a != 0)` by the unit multiple `a^2 f` (or `g f`), which has
//! the same critical points and lives on the `P^2`-bundle `Q`.
//!
//! A failed check on a random member may only mean the member is not
//! general, so attempts are retried with fresh randomness. Each attempt stops
//! at its first failing check.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::{Bidegree, BundleSpec, Chart};
use crate::check::CheckOutcome;
use crate::critical::{common_zeros, critical_points_census, gradient, CensusReport, Classification, ScanOptions};
use crate::error::{Error, Result};
use crate::family::{
    classify, cover_data, h0_witness, sheaf_m_bidegree, CoverData, DegenerationRoute, FamilyParams, SheafM,
    VerdictTag,
};
use crate::field::{Fe, Field};
use crate::poly::{Evaluator, Poly};
use crate::structure::{
    check_complete_intersection_locus, check_hypersurface_locus, check_nonsingular_zero_set, univariate_gcd_degree,
    LocusCheckOptions, LocusConditionReport, LocusKind,
};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_MAX_ATTEMPTS: usize = 50;
/// Largest extension-field census (points per chart) run by default.
pub const DEFAULT_EXTENSION_POINT_LIMIT: u64 = 200_000;

/// Deliberate defects for negative controls. Applied on every attempt.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sabotage {
    /// `Dp3DoubleSection`: `a`, `b`, `c` share a linear factor.
    SharedRootOfCoefficients,
    /// `Dp1Double` with `λ = μ`: the `x y^5` coefficient vanishes.
    VanishingLocusCoefficient,
    /// `Dp3TripleSection`: `a` is divisible by the square of a linear form.
    SquareCoefficient,
    /// `Dp1Double`, `Dp2Double`, `Dp3Triple`: `f` vanishes to order 3 at
    /// the origin of the first census chart.
    PlantedDegeneratePoint,
}

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub max_attempts: usize,
    /// Point budget for base-field scans.
    pub budget: u64,
    pub extension_point_limit: u64,
    pub locus: LocusCheckOptions,
    pub sabotage: Option<Sabotage>,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            budget: crate::field::DEFAULT_BUDGET,
            extension_point_limit: DEFAULT_EXTENSION_POINT_LIMIT,
            locus: LocusCheckOptions::default(),
            sabotage: None,
        }
    }
}

/// A critical locus of the census section known to be positive-dimensional
/// (or at least non-isolated in the family), checked structurally.
#[derive(Clone, Debug)]
pub struct DocumentedLocus {
    pub name: String,
    pub description: String,
    pub kind: LocusKind,
    /// Cox polynomials on the census bundle cutting out the locus.
    pub defining: Vec<Poly>,
    pub charts: Vec<Chart>,
    /// Cox indices of the distinguished variables of the locus condition.
    pub x: usize,
    pub y: usize,
}

#[derive(Clone, Debug)]
pub struct SpecialMember {
    pub params: FamilyParams,
    pub route: DegenerationRoute,
    pub field: Field,
    pub cover: CoverData,
    /// The bundle `P` containing `X`.
    pub ambient: BundleSpec,
    /// Defining equation `F` of `X`.
    pub equation: Poly,
    /// The polynomial `f` of the cover equation.
    pub branch_section: Poly,
    /// Named coefficient forms (`a`, `b`, `c`, ...), as Cox polynomials.
    pub coefficients: Vec<(String, Poly)>,
    /// Bundle and section on which critical points are counted.
    pub census_bundle: BundleSpec,
    pub census_section: Poly,
    /// Points where this form vanishes are outside the census.
    pub census_filter: Option<Poly>,
    pub census_charts: Vec<Chart>,
    pub loci: Vec<DocumentedLocus>,
    /// Coordinate changes applied after sampling.
    pub normalizations: Vec<String>,
    pub seed: u64,
    pub attempt: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemberSummary {
    pub params: FamilyParams,
    pub route: DegenerationRoute,
    pub field: String,
    pub cover_degree: u32,
    pub ambient: BundleSpec,
    pub z_ambient: BundleSpec,
    pub z_hypersurface: Option<Bidegree>,
    pub l: Bidegree,
    pub equation: String,
    pub branch_section: String,
    pub coefficients: Vec<(String, String)>,
    pub census_section: String,
    pub documented_loci: Vec<String>,
    pub normalizations: Vec<String>,
}

impl SpecialMember {
    pub fn summary(&self) -> MemberSummary {
        MemberSummary {
            params: self.params,
            route: self.route,
            field: self.field.descriptor(),
            cover_degree: self.cover.cover_degree,
            ambient: self.ambient.clone(),
            z_ambient: self.cover.z_ambient.clone(),
            z_hypersurface: self.cover.z_hypersurface,
            l: self.cover.l,
            equation: self.equation.to_string(),
            branch_section: self.branch_section.to_string(),
            coefficients: self.coefficients.iter().map(|(n, p)| (n.clone(), p.to_string())).collect(),
            census_section: self.census_section.to_string(),
            documented_loci: self.loci.iter().map(|l| format!("{}: {}", l.name, l.description)).collect(),
            normalizations: self.normalizations.clone(),
        }
    }

    fn var(&self, name: &str) -> usize {
        self.ambient.var_names().iter().position(|v| v == name).unwrap()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SmoothnessReport {
    /// Description of `X \ X°`, or `None` when it is empty by construction.
    pub excluded_locus: Option<String>,
    pub passed: bool,
    pub partial: bool,
    pub checks: Vec<CheckOutcome>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChartCensus {
    pub chart: Chart,
    /// One report per scanned field, base field first.
    pub scans: Vec<CensusReport>,
    /// Fields whose scan did not fit the budget or point limit.
    pub skipped: Vec<String>,
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocusChartReport {
    pub locus: String,
    pub chart: Chart,
    pub report: LocusConditionReport,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Overall {
    ObstructionWitnessed,
    /// Every check that ran passed, but a required base-field scan was
    /// skipped for budget reasons.
    PartialEvidence,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttemptRecord {
    pub attempt: usize,
    pub outcome: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub schema_version: u32,
    pub params: FamilyParams,
    pub route: DegenerationRoute,
    pub field: String,
    pub seed: u64,
    pub sabotage: Option<Sabotage>,
    /// Random draws of attempt `k` come from ChaCha8 seeded with `seed` on
    /// stream `k`.
    pub attempts: Vec<AttemptRecord>,
    pub member: Option<MemberSummary>,
    pub smoothness_outside: Option<SmoothnessReport>,
    pub census: Vec<ChartCensus>,
    pub c2_structure: Vec<LocusChartReport>,
    pub sheaf_m: SheafM,
    pub h0_nonzero: bool,
    pub h0_witness: Option<String>,
    pub incomplete: Vec<String>,
    pub failures: Vec<String>,
    pub overall: Overall,
}

/// Builds the special member for an attempt, or explains why the draw is
/// not general enough to continue.
type Draw = std::result::Result<SpecialMember, String>;

fn rng_for(seed: u64, attempt: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(attempt as u64);
    rng
}

/// Normalized parameters and route after the applicability checks.
fn prepare(params: &FamilyParams, field: &Field) -> Result<(FamilyParams, DegenerationRoute)> {
    let p = params.normalize();
    let verdict = classify(&p);
    match verdict.tag {
        VerdictTag::Invalid => {
            return Err(Error::NotApplicable(format!("{p} is not a valid family: {}", verdict.reasons.join("; "))))
        }
        VerdictTag::ExceptionalRational | VerdictTag::ExceptionalCubicBlowup => {
            return Err(Error::NotApplicable(format!("{p} is an exceptional family ({:?})", verdict.tag)))
        }
        _ => {}
    }
    let route = DegenerationRoute::for_params(&p);
    if field.characteristic() != route.characteristic() {
        return Err(Error::InvalidArgument(format!(
            "{p} degenerates in characteristic {} but the field is {}",
            route.characteristic(),
            field.descriptor()
        )));
    }
    Ok((p, route))
}

/// Draws the special member with the first attempt whose random choices are
/// usable.
pub fn build_special_member(
    params: &FamilyParams,
    field: &Field,
    seed: u64,
    sabotage: Option<Sabotage>,
) -> Result<SpecialMember> {
    let (p, route) = prepare(params, field)?;
    let mut last = String::new();
    for attempt in 0..DEFAULT_MAX_ATTEMPTS {
        match draw_member(&p, route, field, seed, attempt, sabotage)? {
            Ok(m) => return Ok(m),
            Err(why) => last = why,
        }
    }
    Err(Error::RetriesExhausted {
        attempts: DEFAULT_MAX_ATTEMPTS,
        field: field.descriptor(),
        last,
    })
}

fn cox_exps(spec: &BundleSpec, fiber: &[u32]) -> Vec<u32> {
    let mut e = vec![0; spec.base_vars()];
    e.extend_from_slice(fiber);
    e
}

/// Coefficient of a fiber monomial as a form in the base variables.
fn fiber_coefficient(spec: &BundleSpec, f: &Poly, fiber: &[u32]) -> Poly {
    let b = spec.base_vars();
    let mut out = f.zero_like();
    for (e, c) in f.terms() {
        if e[b..] == *fiber {
            let mut ne = e.clone();
            ne[b..].iter_mut().for_each(|v| *v = 0);
            out.add_term(ne, c);
        }
    }
    out
}

fn replace_fiber_coefficient(spec: &BundleSpec, f: &Poly, fiber: &[u32], c: Fe) -> Poly {
    let b = spec.base_vars();
    let mut out = f.filter_terms(|e| e[b..] != *fiber);
    out.add_term(cox_exps(spec, fiber), c);
    out
}

/// `f` in the Cox ring of `target`, whose variables start with those of `f`.
fn widen(f: &Poly, target: &BundleSpec) -> Poly {
    let map: Vec<usize> = (0..f.nvars()).collect();
    f.extend_vars(target.var_names(), &map)
}

/// Substitution `var -> var + t * other^k` (or `var -> t * var` when
/// `other` is `None`) on a Cox ring.
fn substitution(spec: &BundleSpec, field: &Field, var: usize, t: Fe, other: Option<(usize, u32)>) -> Vec<Poly> {
    (0..spec.nvars())
        .map(|v| {
            let x = spec.var(field, v);
            if v != var {
                return x;
            }
            match other {
                Some((o, k)) => x.add(&spec.var(field, o).pow(k).scale(t)),
                None => x.scale(t),
            }
        })
        .collect()
}

fn random_nonzero<R: rand::Rng>(spec: &BundleSpec, field: &Field, bd: Bidegree, rng: &mut R, what: &str) -> Draw0 {
    let p = spec.random_form(field, bd, rng);
    if p.is_zero() && !spec.monomial_basis(bd).is_empty() {
        Err(format!("{what} drawn as zero"))
    } else {
        Ok(p)
    }
}

type Draw0 = std::result::Result<Poly, String>;

/// Removes the terms of degree at most 2 on a chart, which makes the
/// chart origin a critical point with zero Hessian.
fn plant_degenerate_point(spec: &BundleSpec, f: &Poly, c: Chart) -> Poly {
    let vars = spec.chart_var_indices(c);
    f.filter_terms(|e| vars.iter().map(|&v| e[v]).sum::<u32>() > 2)
}

fn sabotage_error(s: Sabotage, route: DegenerationRoute) -> Error {
    Error::InvalidArgument(format!("sabotage {s:?} does not apply to route {route:?}"))
}

fn draw_member(
    params: &FamilyParams,
    route: DegenerationRoute,
    field: &Field,
    seed: u64,
    attempt: usize,
    sabotage: Option<Sabotage>,
) -> Result<Draw> {
    let mut rng = rng_for(seed, attempt);
    let ambient = params.ambient()?;
    let cover = cover_data(params)?;
    let b = ambient.base_vars();
    let mut normalizations = Vec::new();
    let mut coefficients = Vec::new();
    let mut loci = Vec::new();
    let q_bundle = |lambda: i64, mu: i64| BundleSpec::new(ambient.base_dim, vec![0, lambda, mu], vec![1, 1, 1]);
    let applies = |allowed: &[Sabotage]| -> Result<()> {
        match sabotage {
            Some(s) if !allowed.contains(&s) => Err(sabotage_error(s, route)),
            _ => Ok(()),
        }
    };
    let (equation, branch, census_bundle, census_section, census_filter) = match (route, *params) {
        (DegenerationRoute::Dp1Double, FamilyParams::Dp1 { lambda, mu, .. }) => {
            applies(&[Sabotage::VanishingLocusCoefficient, Sabotage::PlantedDegeneratePoint])?;
            let z = cover.z_ambient.clone();
            let mut f = z.random_form(field, Bidegree::new(6 * mu, 6), &mut rng);
            f = replace_fiber_coefficient(&z, &f, &[0, 0, 3], Fe::ONE);
            if lambda == mu {
                let beta = f.coeff(&cox_exps(&z, &[0, 4, 1]));
                let s = field.pth_root(beta);
                f = f.substitute(&substitution(&z, field, b + 2, s, Some((b + 1, 2))));
                normalizations.push(format!("z -> z + ({}) y^2", field.format_coeff(s)));
                if !f.coeff(&cox_exps(&z, &[0, 4, 1])).is_zero() {
                    return Err(Error::Inconsistent("y^4 z coefficient survived normalization".into()));
                }
                if sabotage == Some(Sabotage::VanishingLocusCoefficient) {
                    f = f.filter_terms(|e| e[b..] != [1, 5, 0]);
                }
                let a = fiber_coefficient(&z, &f, &[1, 5, 0]);
                coefficients.push(("a".to_string(), a.clone()));
                loci.push(DocumentedLocus {
                    name: "C2".into(),
                    description: "x = z = a = 0, a the coefficient of x y^5".into(),
                    kind: LocusKind::Hypersurface,
                    defining: vec![z.var(field, b), z.var(field, b + 2), a],
                    charts: (0..b).map(|i| Chart { i, j: 1 }).collect(),
                    x: b,
                    y: b + 2,
                });
            } else if sabotage == Some(Sabotage::VanishingLocusCoefficient) {
                return Err(sabotage_error(Sabotage::VanishingLocusCoefficient, route));
            }
            if sabotage == Some(Sabotage::PlantedDegeneratePoint) {
                f = plant_degenerate_point(&z, &f, z.charts()[0]);
            }
            let w = ambient.var(field, b + 3);
            let big_f = w.pow(2).add(&widen(&f, &ambient));
            (big_f, f.clone(), z, f, None)
        }
        (DegenerationRoute::Dp2Double, FamilyParams::Dp2 { lambda, mu, nu, .. }) => {
            applies(&[Sabotage::PlantedDegeneratePoint])?;
            let z = cover.z_ambient.clone();
            let mut f = z.random_form(field, Bidegree::new(2 * nu, 4), &mut rng);
            if nu == 2 * mu && mu > lambda {
                let a = fiber_coefficient(&z, &f, &[1, 0, 3]);
                let bb = fiber_coefficient(&z, &f, &[0, 1, 3]);
                coefficients.push(("a".to_string(), a.clone()));
                coefficients.push(("b".to_string(), bb.clone()));
                loci.push(DocumentedLocus {
                    name: "C2".into(),
                    description: "x = y = a = b = 0, a and b the coefficients of x z^3 and y z^3".into(),
                    kind: LocusKind::CompleteIntersection,
                    defining: vec![z.var(field, b), z.var(field, b + 1), a, bb],
                    charts: (0..b).map(|i| Chart { i, j: 2 }).collect(),
                    x: b,
                    y: b + 1,
                });
            } else if nu == 2 * mu && mu == lambda {
                let beta = f.coeff(&cox_exps(&z, &[0, 3, 1]));
                let delta = f.coeff(&cox_exps(&z, &[0, 1, 3]));
                if beta.is_zero() {
                    return Ok(Err("y^3 z coefficient is zero".into()));
                }
                let t = field.pth_root(field.div(delta, beta).unwrap());
                f = f.substitute(&substitution(&z, field, b + 1, t, Some((b + 2, 1))));
                let s = field.inv(beta).unwrap();
                f = f.substitute(&substitution(&z, field, b + 2, s, None));
                normalizations.push(format!("y -> y + ({}) z", field.format_coeff(t)));
                normalizations.push(format!("z -> ({}) z", field.format_coeff(s)));
                if !f.coeff(&cox_exps(&z, &[0, 1, 3])).is_zero() || f.coeff(&cox_exps(&z, &[0, 3, 1])) != Fe::ONE {
                    return Err(Error::Inconsistent("y z^3 / y^3 z normalization failed".into()));
                }
                let d = fiber_coefficient(&z, &f, &[1, 0, 3]);
                coefficients.push(("d".to_string(), d.clone()));
                loci.push(DocumentedLocus {
                    name: "C2".into(),
                    description: "x = y = d = 0, d the coefficient of x z^3".into(),
                    kind: LocusKind::Hypersurface,
                    defining: vec![z.var(field, b), z.var(field, b + 1), d],
                    charts: (0..b).map(|i| Chart { i, j: 2 }).collect(),
                    x: b,
                    y: b + 1,
                });
            }
            if sabotage == Some(Sabotage::PlantedDegeneratePoint) {
                f = plant_degenerate_point(&z, &f, z.charts()[0]);
            }
            let w = ambient.var(field, b + 3);
            let big_f = w.pow(2).add(&widen(&f, &ambient));
            (big_f, f.clone(), z, f, None)
        }
        (DegenerationRoute::Dp2TripleSection, FamilyParams::Dp2 { lambda, nu, .. }) => {
            applies(&[])?;
            let r = BundleSpec::new(ambient.base_dim, vec![0, lambda, nu], vec![1, 1, 2])?.with_names(&["x", "y", "w"])?;
            let f = r.random_form(field, Bidegree::new(2 * nu, 4), &mut rng);
            let mut map: Vec<usize> = (0..b + 2).collect();
            map.push(b + 3);
            let f_p = f.extend_vars(ambient.var_names(), &map);
            let x = ambient.var(field, b);
            let zv = ambient.var(field, b + 2);
            let big_f = zv.pow(3).mul(&x).add(&f_p);
            (big_f, f.clone(), r, f, None)
        }
        (DegenerationRoute::Dp3TripleSection, FamilyParams::Dp3 { theta, lambda, mu, nu, .. }) => {
            applies(&[Sabotage::SquareCoefficient])?;
            let q = q_bundle(lambda, mu)?;
            let deg_a = theta - 3 * nu;
            let a = if sabotage == Some(Sabotage::SquareCoefficient) {
                if deg_a < 2 {
                    return Err(sabotage_error(Sabotage::SquareCoefficient, route));
                }
                let l = match random_nonzero(&q, field, Bidegree::new(1, 0), &mut rng, "linear factor") {
                    Ok(l) => l,
                    Err(e) => return Ok(Err(e)),
                };
                let rest = match random_nonzero(&q, field, Bidegree::new(deg_a - 2, 0), &mut rng, "cofactor") {
                    Ok(r) => r,
                    Err(e) => return Ok(Err(e)),
                };
                l.pow(2).mul(&rest)
            } else {
                q.random_form(field, Bidegree::new(deg_a, 0), &mut rng)
            };
            if a.is_zero() {
                return Ok(Err("a drawn as zero".into()));
            }
            let f = q.random_form(field, Bidegree::new(theta, 3), &mut rng);
            coefficients.push(("a".to_string(), a.clone()));
            let w = ambient.var(field, b + 3);
            let big_f = widen(&a, &ambient).mul(&w.pow(3)).add(&widen(&f, &ambient));
            let section = a.pow(2).mul(&f);
            (big_f, f, q, section, Some(a))
        }
        (DegenerationRoute::Dp3Triple, FamilyParams::Dp3 { lambda, mu, nu, .. }) => {
            applies(&[Sabotage::PlantedDegeneratePoint])?;
            let q = cover.z_ambient.clone();
            let mut f = q.random_form(field, params.hypersurface_bidegree(), &mut rng);
            if nu == mu && mu > lambda {
                let a = fiber_coefficient(&q, &f, &[1, 0, 2]);
                let bb = fiber_coefficient(&q, &f, &[0, 1, 2]);
                coefficients.push(("a".to_string(), a.clone()));
                coefficients.push(("b".to_string(), bb.clone()));
                loci.push(DocumentedLocus {
                    name: "C2".into(),
                    description: "x = y = a = b = 0, a and b the coefficients of x z^2 and y z^2".into(),
                    kind: LocusKind::CompleteIntersection,
                    defining: vec![q.var(field, b), q.var(field, b + 1), a, bb],
                    charts: (0..b).map(|i| Chart { i, j: 2 }).collect(),
                    x: b,
                    y: b + 1,
                });
            } else if nu == mu && mu == lambda {
                let beta = f.coeff(&cox_exps(&q, &[0, 2, 1]));
                let gamma = f.coeff(&cox_exps(&q, &[0, 1, 2]));
                if beta.is_zero() {
                    return Ok(Err("y^2 z coefficient is zero".into()));
                }
                let t = field.div(gamma, beta).unwrap();
                f = f.substitute(&substitution(&q, field, b + 1, t, Some((b + 2, 1))));
                let s = field.inv(beta).unwrap();
                f = f.substitute(&substitution(&q, field, b + 2, s, None));
                normalizations.push(format!("y -> y + ({}) z", field.format_coeff(t)));
                normalizations.push(format!("z -> ({}) z", field.format_coeff(s)));
                if !f.coeff(&cox_exps(&q, &[0, 1, 2])).is_zero() || f.coeff(&cox_exps(&q, &[0, 2, 1])) != Fe::ONE {
                    return Err(Error::Inconsistent("y z^2 / y^2 z normalization failed".into()));
                }
                let c = fiber_coefficient(&q, &f, &[1, 0, 2]);
                coefficients.push(("c".to_string(), c.clone()));
                loci.push(DocumentedLocus {
                    name: "C2".into(),
                    description: "x = y = c = 0, c the coefficient of x z^2".into(),
                    kind: LocusKind::Hypersurface,
                    defining: vec![q.var(field, b), q.var(field, b + 1), c],
                    charts: (0..b).map(|i| Chart { i, j: 2 }).collect(),
                    x: b,
                    y: b + 1,
                });
            }
            if sabotage == Some(Sabotage::PlantedDegeneratePoint) {
                f = plant_degenerate_point(&q, &f, q.charts()[0]);
            }
            let w = ambient.var(field, b + 3);
            let big_f = w.pow(3).add(&widen(&f, &ambient));
            (big_f, f.clone(), q, f, None)
        }
        (DegenerationRoute::Dp3DoubleSection, FamilyParams::Dp3 { theta, lambda, mu, nu, .. }) => {
            applies(&[Sabotage::SharedRootOfCoefficients])?;
            let q = q_bundle(lambda, mu)?;
            let degs = [theta - 2 * nu, theta - 2 * nu - lambda, theta - 2 * nu - mu];
            let abc: Vec<Poly> = if sabotage == Some(Sabotage::SharedRootOfCoefficients) {
                if degs.iter().any(|&d| d == 0) {
                    return Err(sabotage_error(Sabotage::SharedRootOfCoefficients, route));
                }
                let l = match random_nonzero(&q, field, Bidegree::new(1, 0), &mut rng, "linear factor") {
                    Ok(l) => l,
                    Err(e) => return Ok(Err(e)),
                };
                degs.iter()
                    .map(|&d| {
                        if d < 0 {
                            q.zero_poly(field)
                        } else {
                            l.mul(&q.random_form(field, Bidegree::new(d - 1, 0), &mut rng))
                        }
                    })
                    .collect()
            } else {
                degs.iter().map(|&d| q.random_form(field, Bidegree::new(d, 0), &mut rng)).collect()
            };
            let g = (0..3).fold(q.zero_poly(field), |acc, k| acc.add(&abc[k].mul(&q.var(field, b + k))));
            if g.is_zero() {
                return Ok(Err("g drawn as zero".into()));
            }
            for (name, p) in ["a", "b", "c"].iter().zip(&abc) {
                coefficients.push((name.to_string(), p.clone()));
            }
            let f = q.random_form(field, Bidegree::new(theta, 3), &mut rng);
            let w = ambient.var(field, b + 3);
            let big_f = w.pow(2).mul(&widen(&g, &ambient)).add(&widen(&f, &ambient));
            let section = g.mul(&f);
            (big_f, f, q, section, Some(g))
        }
        _ => return Err(Error::Inconsistent(format!("route {route:?} does not match {params}"))),
    };
    let expected = params.hypersurface_bidegree();
    if equation.is_zero() || ambient.bidegree_of(&equation)? != Some(expected) {
        return Err(Error::Inconsistent(format!("equation is not of bidegree {expected}")));
    }
    let census_charts = match route {
        DegenerationRoute::Dp2TripleSection => (0..b).map(|i| Chart { i, j: 0 }).collect(),
        _ => census_bundle.charts(),
    };
    Ok(Ok(SpecialMember {
        params: *params,
        route,
        field: field.clone(),
        cover,
        ambient,
        equation,
        branch_section: branch,
        coefficients,
        census_bundle,
        census_section,
        census_filter,
        census_charts,
        loci,
        normalizations,
        seed,
        attempt,
    }))
}

fn set_zero(p: &Poly, vars: &[usize]) -> Poly {
    p.filter_terms(|e| vars.iter().all(|&v| e[v] == 0))
}

/// The single term of `p`, if it has exactly one.
fn single_term(p: &Poly) -> Option<(Vec<u32>, Fe)> {
    let mut it = p.terms();
    let (e, c) = it.next()?;
    if it.next().is_some() {
        return None;
    }
    Some((e.clone(), c))
}

fn term_string(p: &Poly) -> String {
    if p.is_zero() {
        "0".into()
    } else {
        p.to_string()
    }
}

/// Checks that `p`, restricted to the locus, is a nonzero multiple of a
/// monomial in the fiber variables listed in `allowed`.
fn monomial_in(spec: &BundleSpec, p: &Poly, allowed: &[usize]) -> bool {
    match single_term(p) {
        Some((e, _)) => (0..spec.nvars()).all(|v| e[v] == 0 || allowed.contains(&v)),
        None => false,
    }
}

/// Base forms on the affine charts `u_i = 1` of `P^{n-2}`.
fn base_charts(spec: &BundleSpec, form: &Poly) -> Vec<Poly> {
    let b = spec.base_vars();
    (0..b)
        .map(|i| {
            let vals: Vec<Option<Fe>> = (0..spec.nvars())
                .map(|v| {
                    if v == i {
                        Some(Fe::ONE)
                    } else if v >= b {
                        Some(Fe::ZERO)
                    } else {
                        None
                    }
                })
                .collect();
            form.specialize(&vals)
        })
        .collect()
}

fn check_base_hypersurface_nonsingular(
    name: &str,
    spec: &BundleSpec,
    a: &Poly,
    opts: &PipelineOptions,
) -> Result<CheckOutcome> {
    let mut partial = false;
    let mut notes = Vec::new();
    for (i, ai) in base_charts(spec, a).iter().enumerate() {
        let c = check_nonsingular_zero_set(name, &[ai.clone()], &opts.locus)?;
        if !c.passed {
            return Ok(CheckOutcome::fail(name, c.partial, format!("chart u{i} = 1: {}", c.evidence)));
        }
        partial |= c.partial;
        notes.push(format!("u{i} = 1: {}", c.evidence));
    }
    Ok(CheckOutcome::pass(name, partial, notes.join("; ")))
}

/// `(forms = 0)` has no point in `P^{n-2}`.
fn check_base_no_common_zero(name: &str, spec: &BundleSpec, forms: &[Poly], opts: &PipelineOptions) -> Result<CheckOutcome> {
    let field = forms[0].field().clone();
    let per_chart: Vec<Vec<Poly>> = {
        let charted: Vec<Vec<Poly>> = forms.iter().map(|f| base_charts(spec, f)).collect();
        (0..spec.base_vars()).map(|i| charted.iter().map(|c| c[i].clone()).collect()).collect()
    };
    if spec.base_vars() == 2 {
        for (i, polys) in per_chart.iter().enumerate() {
            match univariate_gcd_degree(&field, polys) {
                None => return Ok(CheckOutcome::fail(name, false, "all forms vanish identically")),
                Some(d) if d > 0 => {
                    return Ok(CheckOutcome::fail(
                        name,
                        false,
                        format!("common factor of degree {d} on the chart u{i} = 1"),
                    ))
                }
                _ => {}
            }
        }
        return Ok(CheckOutcome::pass(name, false, "forms have no common factor"));
    }
    let mut notes = Vec::new();
    for big in scan_fields(&field, opts.locus.scan_extension) {
        for (i, polys) in per_chart.iter().enumerate() {
            let emb = embed_all(polys, &big);
            let n = emb[0].nvars();
            let zeros = match common_zeros(&emb, n, &big, &ScanOptions { budget: opts.locus.budget, filter: None }) {
                Ok(z) => z,
                Err(Error::BudgetExceeded { .. }) if big != field => continue,
                Err(e) => return Err(e),
            };
            if let Some(z) = zeros.first() {
                let pt: Vec<String> = z.iter().map(|&c| big.format_coeff(c)).collect();
                return Ok(CheckOutcome::fail(
                    name,
                    true,
                    format!("common zero ({}) on the chart u{i} = 1 over {}", pt.join(", "), big.descriptor()),
                ));
            }
        }
        notes.push(format!("no common zero over {}", big.descriptor()));
    }
    Ok(CheckOutcome::pass(name, true, notes.join("; ")))
}

fn scan_fields(field: &Field, extension: bool) -> Vec<Field> {
    let mut out = vec![field.clone()];
    if extension {
        if let Ok(big) = Field::new(field.characteristic(), field.degree() * 2) {
            out.push(big);
        }
    }
    out
}

fn embed_into(p: &Poly, big: &Field) -> Poly {
    if p.field() == big {
        p.clone()
    } else {
        p.embed(&p.field().embedding_into(big).unwrap())
    }
}

fn embed_all(polys: &[Poly], big: &Field) -> Vec<Poly> {
    polys.iter().map(|p| embed_into(p, big)).collect()
}

/// Normalized points of `P^{d}` over a field.
fn projective_points(field: &Field, d: usize) -> Vec<Vec<Fe>> {
    let mut out = Vec::new();
    for first in 0..=d {
        let free = d - first;
        let range = field.enumerate_points(free, u64::MAX).unwrap();
        let mut buf = vec![Fe::ZERO; free];
        for idx in range.start..range.end {
            range.point_at(idx, &mut buf);
            let mut p = vec![Fe::ZERO; d + 1];
            p[first] = Fe::ONE;
            p[first + 1..].copy_from_slice(&buf);
            out.push(p);
        }
    }
    out
}

/// Rational points of `X` on the coordinate locus `zero_vars = 0` where the
/// Cox gradient of `F` vanishes.
fn scan_excluded_locus(
    spec: &BundleSpec,
    equation: &Poly,
    zero_vars: &[usize],
    field: &Field,
    budget: u64,
) -> Result<Option<Vec<Fe>>> {
    let b = spec.base_vars();
    let free: Vec<usize> = (b..spec.nvars()).filter(|v| !zero_vars.contains(v)).collect();
    let q = field.order() as u128;
    let base_count = (0..b as u32).map(|k| q.pow(k)).sum::<u128>();
    let required = base_count * q.pow(free.len() as u32);
    if required > budget as u128 {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let f = embed_into(equation, field);
    let fe = Evaluator::new(&f);
    let grads: Vec<Evaluator> = gradient(&f).iter().map(Evaluator::new).collect();
    let bases = projective_points(field, b - 1);
    let found: Vec<Vec<Fe>> = bases
        .par_iter()
        .filter_map(|base| {
            let range = field.enumerate_points(free.len(), u64::MAX).unwrap();
            let mut buf = vec![Fe::ZERO; free.len()];
            let mut pt = vec![Fe::ZERO; spec.nvars()];
            pt[..b].copy_from_slice(base);
            let mut logs = Vec::new();
            for idx in range.start..range.end {
                range.point_at(idx, &mut buf);
                if buf.iter().all(|c| c.is_zero()) {
                    continue;
                }
                for (&v, &c) in free.iter().zip(&buf) {
                    pt[v] = c;
                }
                Evaluator::logs(field, &pt, &mut logs);
                if fe.eval_logs(&logs).is_zero() && grads.iter().all(|g| g.eval_logs(&logs).is_zero()) {
                    return Some(pt.clone());
                }
            }
            None
        })
        .collect();
    Ok(found.into_iter().next())
}

fn jacobian_scan_check(member: &SpecialMember, zero_vars: &[usize], opts: &PipelineOptions) -> Result<CheckOutcome> {
    let name = "excluded_locus_jacobian_scan";
    let mut notes = Vec::new();
    for big in scan_fields(&member.field, true) {
        match scan_excluded_locus(&member.ambient, &member.equation, zero_vars, &big, opts.locus.budget) {
            Ok(Some(p)) => {
                let pt: Vec<String> = p.iter().map(|&c| big.format_coeff(c)).collect();
                return Ok(CheckOutcome::fail(
                    name,
                    true,
                    format!("X is singular at ({}) over {}", pt.join(", "), big.descriptor()),
                ));
            }
            Ok(None) => notes.push(format!("no singular point over {}", big.descriptor())),
            Err(Error::BudgetExceeded { .. }) if big != member.field => {
                notes.push(format!("{} skipped (budget)", big.descriptor()))
            }
            Err(e) => return Err(e),
        }
    }
    Ok(CheckOutcome::pass(name, true, notes.join("; ")))
}

/// `(polys = 0)` is nonsingular of the expected codimension on every chart
/// of the census bundle.
fn check_census_bundle_ci(name: &str, member: &SpecialMember, polys: &[Poly], opts: &PipelineOptions) -> Result<CheckOutcome> {
    let spec = &member.census_bundle;
    let mut partial = false;
    let mut notes = Vec::new();
    for c in spec.charts() {
        let dehom: Vec<Poly> = polys.iter().map(|p| spec.dehomogenize(p, c)).collect::<Result<_>>()?;
        let out = check_nonsingular_zero_set(name, &dehom, &opts.locus)?;
        if !out.passed {
            return Ok(CheckOutcome::fail(name, out.partial, format!("chart U({},{}): {}", c.i, c.j, out.evidence)));
        }
        partial |= out.partial;
        notes.push(format!("U({},{}): {}", c.i, c.j, out.evidence));
    }
    Ok(CheckOutcome::pass(name, partial, notes.join("; ")))
}

fn finish_smoothness(excluded: Option<String>, checks: Vec<CheckOutcome>) -> SmoothnessReport {
    SmoothnessReport {
        excluded_locus: excluded,
        passed: checks.iter().all(|c| c.passed),
        partial: checks.iter().any(|c| c.partial),
        checks,
    }
}

/// Smoothness of `X` along `X \ X°` and of `Z°` where it is not automatic.
pub fn verify_smoothness_outside(member: &SpecialMember, opts: &PipelineOptions) -> Result<SmoothnessReport> {
    let f = &member.equation;
    let spec = &member.ambient;
    let (x, y, z, w) = (member.var("x"), member.var("y"), member.var("z"), member.var("w"));
    let mut checks = Vec::new();
    let excluded: Vec<usize>;
    match member.route {
        DegenerationRoute::Dp1Double => {
            excluded = vec![x, y];
            let dz = set_zero(&f.partial(z), &[x, y]);
            let rest = set_zero(f, &[x, y, z]);
            let ok = monomial_in(spec, &dz, &[z]) && monomial_in(spec, &rest, &[w]);
            checks.push(if ok {
                CheckOutcome::pass(
                    "structural_witness",
                    false,
                    format!("dF/dz = {} and F = {} on x = y = z = 0", term_string(&dz), term_string(&rest)),
                )
            } else {
                CheckOutcome::fail(
                    "structural_witness",
                    false,
                    format!("dF/dz on x = y = 0 is {}", term_string(&dz)),
                )
            });
        }
        DegenerationRoute::Dp2Double => {
            checks.push(CheckOutcome::pass(
                "structural_witness",
                false,
                "Z is a P^2-bundle, so X° = X",
            ));
            return Ok(finish_smoothness(None, checks));
        }
        DegenerationRoute::Dp2TripleSection => {
            excluded = vec![x, y, w];
            let dx = set_zero(&f.partial(x), &[x, y, w]);
            checks.push(if monomial_in(spec, &dx, &[z]) {
                CheckOutcome::pass("structural_witness", false, format!("dF/dx = {} on x = y = w = 0", term_string(&dx)))
            } else {
                CheckOutcome::fail("structural_witness", false, format!("dF/dx on x = y = w = 0 is {}", term_string(&dx)))
            });
            // Z° along x = 0: no point with y = 0 since f(u,0,0,w) = c w^2
            let r = &member.census_bundle;
            let b = r.base_vars();
            let c = member.branch_section.coeff(&cox_exps(r, &[0, 0, 2]));
            checks.push(if c.is_zero() {
                CheckOutcome::fail("w_squared_coefficient", false, "coefficient of w^2 in f is zero")
            } else {
                CheckOutcome::pass("w_squared_coefficient", false, field_str(&member.field, c))
            });
            // on U_{i,y}, zbar absorbs dF/dx, so Z is singular on x = 0
            // exactly at singular points of (f(u,0,1,w) = 0)
            let mut partial = false;
            let mut notes = Vec::new();
            let mut failed = None;
            for i in 0..b {
                let chart = r.chart(i, 1)?;
                let fc = r.dehomogenize(&member.branch_section, chart)?;
                let xi = r.chart_var_indices(chart).iter().position(|&v| v == b).unwrap();
                let mut vals = vec![None; fc.nvars()];
                vals[xi] = Some(Fe::ZERO);
                let g = fc.specialize(&vals);
                let out = check_nonsingular_zero_set("z_open_nonsingular", &[g], &opts.locus)?;
                partial |= out.partial;
                if !out.passed {
                    failed = Some(format!("chart U({i},y): {}", out.evidence));
                    break;
                }
                notes.push(format!("U({i},y): {}", out.evidence));
            }
            checks.push(match failed {
                Some(e) => CheckOutcome::fail("z_open_nonsingular", partial, e),
                None => CheckOutcome::pass("z_open_nonsingular", partial, notes.join("; ")),
            });
        }
        DegenerationRoute::Dp3TripleSection => {
            excluded = vec![x, y, z];
            let a = &member.coefficients[0].1;
            let fp = widen(&member.branch_section, spec);
            let vanish = gradient(&fp).iter().all(|d| set_zero(d, &[x, y, z]).is_zero());
            checks.push(if vanish {
                CheckOutcome::pass("structural_witness", false, "F = a w^3 and df = 0 on x = y = z = 0")
            } else {
                CheckOutcome::fail("structural_witness", false, "some partial of f survives on x = y = z = 0")
            });
            checks.push(check_base_hypersurface_nonsingular("base_hypersurface_nonsingular", &member.census_bundle, a, opts)?);
            if checks.iter().all(|c| c.passed) {
                checks.push(check_census_bundle_ci(
                    "z_open_nonsingular",
                    member,
                    &[a.clone(), member.branch_section.clone()],
                    opts,
                )?);
            }
        }
        DegenerationRoute::Dp3Triple => {
            let rest = set_zero(f, &[x, y, z]);
            checks.push(if monomial_in(spec, &rest, &[w]) {
                CheckOutcome::pass(
                    "structural_witness",
                    false,
                    format!("F = {} on x = y = z = 0, so X° = X", term_string(&rest)),
                )
            } else {
                CheckOutcome::fail("structural_witness", false, format!("F = {} on x = y = z = 0", term_string(&rest)))
            });
            return Ok(finish_smoothness(None, checks));
        }
        DegenerationRoute::Dp3DoubleSection => {
            excluded = vec![x, y, z];
            let w2 = spec.var(&member.field, w).pow(2);
            let mut ok = true;
            for (k, v) in [x, y, z].into_iter().enumerate() {
                let expect = widen(&member.coefficients[k].1, spec).mul(&w2);
                ok &= set_zero(&f.partial(v), &[x, y, z]) == expect;
            }
            checks.push(if ok {
                CheckOutcome::pass("structural_witness", false, "(dF/dx, dF/dy, dF/dz) = (a, b, c) w^2 on x = y = z = 0")
            } else {
                CheckOutcome::fail("structural_witness", false, "partials on x = y = z = 0 differ from (a, b, c) w^2")
            });
            let abc: Vec<Poly> = member.coefficients.iter().map(|(_, p)| p.clone()).collect();
            checks.push(check_base_no_common_zero("coefficients_without_common_zero", &member.census_bundle, &abc, opts)?);
            if checks.iter().all(|c| c.passed) {
                let g = member.census_filter.clone().unwrap();
                checks.push(check_census_bundle_ci(
                    "z_open_nonsingular",
                    member,
                    &[g, member.branch_section.clone()],
                    opts,
                )?);
            }
        }
    }
    // runs even after a structural failure so that a singular point, when
    // rational, is reported as the witness
    checks.push(jacobian_scan_check(member, &excluded, opts)?);
    let names = spec.var_names();
    let desc = excluded.iter().map(|&v| format!("{} = 0", names[v])).collect::<Vec<_>>().join(", ");
    Ok(finish_smoothness(Some(desc), checks))
}

fn field_str(field: &Field, c: Fe) -> String {
    field.format_coeff(c)
}

/// Census of one chart over one field, with chart ownership, the census
/// filter and locus tags applied.
fn census_chart(member: &SpecialMember, chart: Chart, scan: &Field, budget: u64) -> Result<CensusReport> {
    let spec = member.census_bundle.clone();
    let fc = spec.dehomogenize(&embed_into(&member.census_section, scan), chart)?;
    let filter = member.census_filter.as_ref().map(|g| embed_into(g, scan));
    let charts = member.census_charts.clone();
    let owner_spec = spec.clone();
    let accept = move |pt: &[Fe]| -> bool {
        let lift = owner_spec.lift_chart_point(chart, pt);
        let owner = charts
            .iter()
            .find(|c| !lift[c.i].is_zero() && !lift[owner_spec.fiber_index(c.j)].is_zero());
        owner == Some(&chart) && filter.as_ref().map_or(true, |g| !g.eval(&lift).is_zero())
    };
    let mut records = critical_points_census(&fc, &ScanOptions { budget, filter: Some(&accept) })?;
    let loci: Vec<(String, Vec<Poly>)> = member
        .loci
        .iter()
        .map(|l| (l.name.clone(), embed_all(&l.defining, scan)))
        .collect();
    for r in &mut records {
        r.chart = Some(chart);
        let lift = spec.lift_chart_point(chart, &r.point);
        r.locus = loci
            .iter()
            .find(|(_, d)| d.iter().all(|p| p.eval(&lift).is_zero()))
            .map(|(n, _)| n.clone());
    }
    Ok(CensusReport::from_records(scan, Some(chart), records))
}

/// Critical point census of the branch section on the charts covering `Z°`.
pub fn census_branch_section(member: &SpecialMember, opts: &PipelineOptions) -> Result<Vec<ChartCensus>> {
    census_charts(member, opts, false)
}

fn census_charts(member: &SpecialMember, opts: &PipelineOptions, stop_at_failure: bool) -> Result<Vec<ChartCensus>> {
    let mut out = Vec::new();
    let dim = member.census_bundle.nvars() - 2;
    for &chart in &member.census_charts {
        let mut cc = ChartCensus {
            chart,
            scans: Vec::new(),
            skipped: Vec::new(),
            failures: Vec::new(),
        };
        for (k, scan) in scan_fields(&member.field, true).into_iter().enumerate() {
            if k > 0 {
                let points = (scan.order() as u128).pow(dim as u32);
                if points > opts.extension_point_limit as u128 {
                    cc.skipped.push(format!("{} ({points} points over the limit)", scan.descriptor()));
                    continue;
                }
            }
            let report = match census_chart(member, chart, &scan, opts.budget) {
                Ok(r) => r,
                Err(Error::BudgetExceeded { required, .. }) => {
                    cc.skipped.push(format!("{} ({required} points over the budget)", scan.descriptor()));
                    continue;
                }
                Err(e) => return Err(e),
            };
            for r in &report.records {
                if r.classification == Classification::Degenerate && r.locus.is_none() {
                    cc.failures.push(format!(
                        "degenerate critical point ({}) on U({},{}) over {} (Hessian rank {}, length {:?})",
                        r.coordinates.join(", "),
                        chart.i,
                        chart.j,
                        scan.descriptor(),
                        r.hessian_rank,
                        r.local_length
                    ));
                }
            }
            cc.scans.push(report);
            if !cc.failures.is_empty() {
                break;
            }
        }
        let failed = !cc.failures.is_empty();
        out.push(cc);
        if failed && stop_at_failure {
            break;
        }
    }
    Ok(out)
}

/// Locus conditions for each documented locus on each chart covering it.
pub fn verify_c2_structure(member: &SpecialMember, opts: &PipelineOptions) -> Result<Vec<LocusChartReport>> {
    let spec = &member.census_bundle;
    let mut out = Vec::new();
    for locus in &member.loci {
        for &chart in &locus.charts {
            let fc = spec.dehomogenize(&member.census_section, chart)?;
            let idx = spec.chart_var_indices(chart);
            let x = idx.iter().position(|&v| v == locus.x).unwrap();
            let y = idx.iter().position(|&v| v == locus.y).unwrap();
            let report = match locus.kind {
                LocusKind::Hypersurface => check_hypersurface_locus(&fc, x, y, &opts.locus)?,
                LocusKind::CompleteIntersection => check_complete_intersection_locus(&fc, x, y, &opts.locus)?,
            };
            out.push(LocusChartReport {
                locus: locus.name.clone(),
                chart,
                report,
            });
        }
    }
    Ok(out)
}

struct AttemptResult {
    member: SpecialMember,
    smoothness: SmoothnessReport,
    c2: Vec<LocusChartReport>,
    census: Vec<ChartCensus>,
    failures: Vec<String>,
}

fn run_checks(member: SpecialMember, opts: &PipelineOptions) -> Result<AttemptResult> {
    let smoothness = verify_smoothness_outside(&member, opts)?;
    let mut failures: Vec<String> = smoothness
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("smoothness {}: {}", c.name, c.evidence))
        .collect();
    let mut c2 = Vec::new();
    let mut census = Vec::new();
    if failures.is_empty() {
        c2 = verify_c2_structure(&member, opts)?;
        for r in &c2 {
            for c in r.report.checks.iter().filter(|c| !c.passed) {
                failures.push(format!("{} on U({},{}) {}: {}", r.locus, r.chart.i, r.chart.j, c.name, c.evidence));
            }
        }
    }
    if failures.is_empty() {
        census = census_charts(&member, opts, true)?;
        failures.extend(census.iter().flat_map(|c| c.failures.iter().cloned()));
    }
    Ok(AttemptResult {
        member,
        smoothness,
        c2,
        census,
        failures,
    })
}

/// Builds members with fresh randomness until one passes every check or the
/// attempts run out.
pub fn run_pipeline(params: &FamilyParams, field: &Field, seed: u64, opts: &PipelineOptions) -> Result<PipelineReport> {
    let (p, route) = prepare(params, field)?;
    let sheaf_m = sheaf_m_bidegree(&p)?;
    let ambient = p.ambient()?;
    let m_bd = sheaf_m.cited;
    let witness = h0_witness(&ambient, m_bd).map(|e| {
        let names = ambient.var_names();
        let parts: Vec<String> = e
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(v, &k)| if k == 1 { names[v].clone() } else { format!("{}^{k}", names[v]) })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    });
    let mut attempts = Vec::new();
    let mut last: Option<AttemptResult> = None;
    let mut last_draw_failure = None;
    for attempt in 0..opts.max_attempts.max(1) {
        let member = match draw_member(&p, route, field, seed, attempt, opts.sabotage)? {
            Ok(m) => m,
            Err(why) => {
                attempts.push(AttemptRecord {
                    attempt,
                    outcome: format!("draw rejected: {why}"),
                });
                last_draw_failure = Some(why);
                continue;
            }
        };
        let result = run_checks(member, opts)?;
        let passed = result.failures.is_empty();
        attempts.push(AttemptRecord {
            attempt,
            outcome: if passed {
                "passed".into()
            } else {
                format!("failed: {}", result.failures[0])
            },
        });
        last = Some(result);
        if passed {
            break;
        }
    }
    let h0_nonzero = witness.is_some();
    let mut failures = Vec::new();
    let mut incomplete = Vec::new();
    let (member, smoothness, census, c2) = match last {
        Some(r) => {
            failures = r.failures;
            for c in &r.census {
                if c.scans.first().map_or(true, |s| s.field != field.descriptor()) {
                    incomplete.push(format!("census on U({},{}) over {} skipped", c.chart.i, c.chart.j, field.descriptor()));
                }
            }
            (Some(r.member.summary()), Some(r.smoothness), r.census, r.c2)
        }
        None => {
            failures.push(format!("no usable draw: {}", last_draw_failure.unwrap_or_default()));
            (None, None, Vec::new(), Vec::new())
        }
    };
    if !failures.is_empty() {
        failures.push(format!(
            "no member passed after {} attempts over {}; a larger field may help",
            attempts.len(),
            field.descriptor()
        ));
    }
    if !h0_nonzero {
        failures.push(format!("M = O({m_bd}) has no nonzero section"));
    }
    let overall = if !failures.is_empty() {
        Overall::Failed
    } else if !incomplete.is_empty() {
        Overall::PartialEvidence
    } else {
        Overall::ObstructionWitnessed
    };
    Ok(PipelineReport {
        schema_version: REPORT_SCHEMA_VERSION,
        params: p,
        route,
        field: field.descriptor(),
        seed,
        sabotage: opts.sabotage,
        attempts,
        member,
        smoothness_outside: smoothness,
        census,
        c2_structure: c2,
        sheaf_m,
        h0_nonzero,
        h0_witness: witness,
        incomplete,
        failures,
        overall,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gf(p: u32, k: u32) -> Field {
        Field::new(p, k).unwrap()
    }

    fn dp(degree: u32, n: i64, v: &[i64]) -> FamilyParams {
        FamilyParams::from_list(degree, n, v).unwrap()
    }

    #[test]
    fn dp1_member_shape() {
        let m = build_special_member(&dp(1, 3, &[0, 1]), &gf(2, 3), 7, None).unwrap();
        assert_eq!(m.route, DegenerationRoute::Dp1Double);
        let w = m.var("w");
        let wsq = m.equation.filter_terms(|e| e[w] > 0);
        assert_eq!(wsq.num_terms(), 1);
        assert_eq!(m.cover.z_ambient.bidegree_of(&m.branch_section).unwrap(), Some(Bidegree::new(6, 6)));
    }

    #[test]
    fn dp2_triple_section_member_shape() {
        let m = build_special_member(&dp(2, 3, &[3, 4, 6]), &gf(3, 2), 1, None).unwrap();
        assert_eq!(m.route, DegenerationRoute::Dp2TripleSection);
        let z = m.var("z");
        let (e, c) = single_term(&m.equation.filter_terms(|e| e[z] > 0)).unwrap();
        assert_eq!((e[z], e[m.var("x")], c), (3, 1, Fe::ONE));
        assert_eq!(m.census_bundle.bidegree_of(&m.branch_section).unwrap(), Some(Bidegree::new(12, 4)));
    }

    #[test]
    fn dp3_triple_member_shape() {
        let m = build_special_member(&dp(3, 3, &[3, 0, 0, 1]), &gf(3, 2), 1, None).unwrap();
        assert_eq!(m.route, DegenerationRoute::Dp3Triple);
        let w = m.var("w");
        let (e, c) = single_term(&m.equation.filter_terms(|e| e[w] > 0)).unwrap();
        assert_eq!((e[w], c), (3, Fe::ONE));
    }

    #[test]
    fn wrong_characteristic_and_exceptions_are_rejected() {
        assert!(matches!(
            build_special_member(&dp(1, 3, &[0, 1]), &gf(3, 2), 0, None),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            run_pipeline(&dp(3, 3, &[1, 0, 0, 0]), &gf(3, 2), 0, &PipelineOptions::default()),
            Err(Error::NotApplicable(_))
        ));
    }

    #[test]
    fn dp1_pipeline_witnesses_obstruction() {
        let r = run_pipeline(&dp(1, 3, &[0, 1]), &gf(2, 3), 42, &PipelineOptions::default()).unwrap();
        assert_eq!(r.overall, Overall::ObstructionWitnessed, "{:?}", r.failures);
        assert_eq!(r.sheaf_m.cited, Bidegree::new(2, 2));
        assert!(r.h0_nonzero && r.h0_witness.is_some());
    }

    #[test]
    fn dp2_pipeline_over_gf4() {
        let r = run_pipeline(&dp(2, 3, &[0, 0, 1]), &gf(2, 2), 3, &PipelineOptions::default()).unwrap();
        assert_eq!(r.overall, Overall::ObstructionWitnessed, "{:?}", r.failures);
        assert_eq!(r.sheaf_m.cited, Bidegree::new(0, 1));
    }

    #[test]
    fn reports_are_deterministic() {
        let opts = PipelineOptions::default();
        let a = run_pipeline(&dp(3, 3, &[3, 0, 0, 1]), &gf(3, 2), 5, &opts).unwrap();
        let b = run_pipeline(&dp(3, 3, &[3, 0, 0, 1]), &gf(3, 2), 5, &opts).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }

    #[test]
    fn dp1_equal_twists_locus_condition() {
        let m = build_special_member(&dp(1, 3, &[1, 1]), &gf(2, 3), 11, None).unwrap();
        assert_eq!(m.loci.len(), 1);
        let reports = verify_c2_structure(&m, &PipelineOptions::default()).unwrap();
        assert_eq!(reports.len(), 2);
        let decomposition = &reports[0].report.checks[0];
        assert_eq!(decomposition.name, "decomposition");
        assert!(decomposition.passed);
    }

    #[test]
    fn vanishing_locus_coefficient_fails_degree_check() {
        let opts = PipelineOptions {
            sabotage: Some(Sabotage::VanishingLocusCoefficient),
            max_attempts: 3,
            ..Default::default()
        };
        let m = build_special_member(&dp(1, 3, &[1, 1]), &gf(2, 3), 0, opts.sabotage).unwrap();
        let reports = verify_c2_structure(&m, &opts).unwrap();
        assert!(reports
            .iter()
            .all(|r| r.report.checks.iter().any(|c| c.name == "deg_a_positive" && !c.passed)));
        let r = run_pipeline(&dp(1, 3, &[1, 1]), &gf(2, 3), 0, &opts).unwrap();
        assert_eq!(r.overall, Overall::Failed);
    }

    #[test]
    fn shared_root_fails_with_witness() {
        let opts = PipelineOptions {
            sabotage: Some(Sabotage::SharedRootOfCoefficients),
            max_attempts: 2,
            ..Default::default()
        };
        let r = run_pipeline(&dp(3, 3, &[5, 0, 0, 2]), &gf(2, 3), 1, &opts).unwrap();
        assert_eq!(r.overall, Overall::Failed);
        assert!(r.failures[0].contains("common factor"), "{:?}", r.failures);
        assert!(r.failures.iter().any(|f| f.contains("singular at (")), "{:?}", r.failures);
    }

    #[test]
    fn planted_degenerate_point_is_found() {
        let opts = PipelineOptions {
            sabotage: Some(Sabotage::PlantedDegeneratePoint),
            ..Default::default()
        };
        let m = build_special_member(&dp(2, 3, &[0, 0, 1]), &gf(2, 3), 2, opts.sabotage).unwrap();
        let census = census_branch_section(&m, &opts).unwrap();
        let origin = census[0].scans[0]
            .records
            .iter()
            .find(|r| r.point.iter().all(|c| c.is_zero()))
            .unwrap();
        assert_eq!(origin.classification, Classification::Degenerate);
        assert!(!census[0].failures.is_empty());
    }

    #[test]
    fn sabotage_must_match_route() {
        assert!(matches!(
            build_special_member(&dp(1, 3, &[0, 1]), &gf(2, 3), 0, Some(Sabotage::SquareCoefficient)),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn complete_intersection_locus_for_dp3() {
        // theta = 3 nu with nu = mu > lambda
        let m = build_special_member(&dp(3, 3, &[3, 0, 1, 1]), &gf(3, 2), 4, None).unwrap();
        assert_eq!(m.loci[0].kind, LocusKind::CompleteIntersection);
        let reports = verify_c2_structure(&m, &PipelineOptions::default()).unwrap();
        assert!(reports.iter().all(|r| r.report.kind == LocusKind::CompleteIntersection));
    }

    #[test]
    fn larger_field_never_loses_critical_points() {
        let m = build_special_member(&dp(2, 3, &[0, 0, 1]), &gf(2, 2), 9, None).unwrap();
        let census = census_branch_section(&m, &PipelineOptions::default()).unwrap();
        for c in census {
            if c.scans.len() == 2 {
                assert!(c.scans[1].records.len() >= c.scans[0].records.len());
            }
        }
    }
}
