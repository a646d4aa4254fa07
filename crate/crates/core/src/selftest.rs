//! The acceptance suite: ten end-to-end criteria, each checked against an
//! oracle coded independently of the module under test, with a time limit.

use std::collections::BTreeSet;
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::{Bidegree, BundleSpec};
use crate::critical::{classify_critical_point, critical_points_census, hessian, Classification, ScanOptions};
use crate::family::{
    cited_sheaf_m, classify, enumerate_families, product_family, DegenerationRoute, EnumerationBounds, FamilyParams,
    VerdictTag,
};
use crate::field::{Fe, Field};
use crate::linalg::rank;
use crate::pipeline::{run_pipeline, Overall, PipelineOptions, Sabotage};
use crate::poly::{indexed_names, Poly};
use crate::restriction::{verify_surjectivity_case, SurjectivityCase, SurjectivityParams};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u32,
    pub name: String,
    /// Oracle agreement and the time limit both hold.
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
    pub limit_seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<28} {:>8.2}s / {:>5.0}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.limit_seconds,
            self.detail
        )
    }
}

type Check = fn() -> Result<String, String>;

/// `(id, name, time limit in seconds, check)`.
pub const CRITERIA: &[(u32, &str, f64, Check)] = &[
    (1, "exceptional_families", 1.0, exceptional_families),
    (2, "monomial_basis_oracle", 10.0, monomial_basis_oracle),
    (3, "sheaf_formula_cross_check", 5.0, sheaf_formula_cross_check),
    (4, "restriction_surjectivity", 60.0, restriction_surjectivity),
    (5, "classification_vs_length", 120.0, classification_vs_length),
    (6, "invariance_laws", 60.0, invariance_laws),
    (7, "char2_hessian_structure", 10.0, char2_hessian_structure),
    (8, "pipeline_runs", 0.0, pipeline_runs),
    (9, "negative_controls", 60.0, negative_controls),
    (10, "product_families", 1.0, product_families),
];

/// Per-run limit for the pipeline criterion; the total is not limited.
pub const PIPELINE_RUN_LIMIT_SECONDS: f64 = 60.0;

pub fn run_criterion(id: u32) -> Option<CriterionResult> {
    let &(id, name, limit, check) = CRITERIA.iter().find(|c| c.0 == id)?;
    let start = Instant::now();
    let outcome = check();
    let seconds = start.elapsed().as_secs_f64();
    let within = limit == 0.0 || seconds <= limit;
    let (ok, mut detail) = match outcome {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    if !within {
        detail = format!("time limit exceeded; {detail}");
    }
    Some(CriterionResult {
        id,
        name: name.to_string(),
        passed: ok && within,
        detail,
        seconds,
        limit_seconds: if limit == 0.0 { f64::INFINITY } else { limit },
    })
}

/// Runs every criterion in order.
pub fn run_all() -> Vec<CriterionResult> {
    CRITERIA.iter().filter_map(|c| run_criterion(c.0)).collect()
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn gf(p: u32, k: u32) -> Field {
    Field::new(p, k).expect("supported field")
}

fn random_fe(field: &Field, rng: &mut ChaCha8Rng) -> Fe {
    field.from_code(rng.gen_range(0..field.order())).unwrap()
}

/// Random polynomial of degree `<= max_deg` in `n` variables, keeping each
/// monomial of degree at least `min_deg` with probability `density`.
fn random_poly(field: &Field, n: usize, min_deg: u32, max_deg: u32, density: f64, rng: &mut ChaCha8Rng) -> Poly {
    let vars = Arc::new(indexed_names("x", n));
    let mut p = Poly::zero(field, vars.clone());
    let mut e = vec![0u32; n];
    loop {
        let deg: u32 = e.iter().sum();
        if deg >= min_deg && deg <= max_deg && rng.gen_bool(density) {
            p.add_term(e.clone(), random_fe(field, rng));
        }
        // odometer over exponents bounded by max_deg
        let mut i = 0;
        loop {
            if i == n {
                return p;
            }
            e[i] += 1;
            if e.iter().sum::<u32>() <= max_deg {
                break;
            }
            e[i] = 0;
            i += 1;
        }
    }
}

fn exceptional_families() -> Result<String, String> {
    let bounds = EnumerationBounds {
        max_twist: 3,
        max_theta: 6,
    };
    let all = enumerate_families(3, 3, bounds).map_err(err)?;
    let odd: BTreeSet<(Vec<i64>, String)> = all
        .iter()
        .filter(|(_, v)| v.tag != VerdictTag::NotStablyRationalVG)
        .map(|(p, v)| (p.values(), format!("{:?}", v.tag)))
        .collect();
    let want: BTreeSet<(Vec<i64>, String)> = [
        (vec![1, 0, 0, 0], "ExceptionalRational".to_string()),
        (vec![3, 1, 1, 1], "ExceptionalCubicBlowup".to_string()),
    ]
    .into_iter()
    .collect();
    if odd == want {
        Ok(format!("{} valid families, exceptions exactly (1,0,0,0) and (3,1,1,1)", all.len()))
    } else {
        Err(format!("non-NSR entries {odd:?}"))
    }
}

/// All exponent vectors of bidegree `bd`: an odometer over the fiber
/// exponents, then one over all base exponents but the last, which is
/// solved for.
fn brute_force_basis(base_vars: usize, twists: &[i64], weights: &[u32], bd: Bidegree) -> BTreeSet<Vec<u32>> {
    let mut out = BTreeSet::new();
    if bd.beta < 0 {
        return out;
    }
    let m = twists.len();
    let caps: Vec<u32> = weights.iter().map(|&a| bd.beta as u32 / a).collect();
    let mut fe = vec![0u32; m];
    loop {
        let beta: i64 = (0..m).map(|j| weights[j] as i64 * fe[j] as i64).sum();
        let rest = bd.alpha - (0..m).map(|j| twists[j] * fe[j] as i64).sum::<i64>();
        if beta == bd.beta && rest >= 0 {
            let rest = rest as u32;
            let mut ue = vec![0u32; base_vars - 1];
            loop {
                let used: u32 = ue.iter().sum();
                if used <= rest {
                    let mut full = ue.clone();
                    full.push(rest - used);
                    full.extend_from_slice(&fe);
                    out.insert(full);
                }
                let mut k = 0;
                while k < ue.len() && ue[k] == rest {
                    ue[k] = 0;
                    k += 1;
                }
                if k == ue.len() {
                    break;
                }
                ue[k] += 1;
            }
        }
        let mut k = 0;
        while k < m && fe[k] == caps[k] {
            fe[k] = 0;
            k += 1;
        }
        if k == m {
            return out;
        }
        fe[k] += 1;
    }
}

fn monomial_basis_oracle() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d6f6e6f);
    let mut total = 0usize;
    let mut nonempty = 0usize;
    for trial in 0..200 {
        let base_vars = rng.gen_range(2..=5usize);
        let m = rng.gen_range(1..=(6 - base_vars));
        let twists: Vec<i64> = (0..m).map(|_| rng.gen_range(-1..=2)).collect();
        let weights: Vec<u32> = (0..m).map(|_| rng.gen_range(1..=3)).collect();
        let bd = Bidegree::new(rng.gen_range(-12..=12), rng.gen_range(-12..=12));
        let spec = BundleSpec::new(base_vars - 1, twists.clone(), weights.clone()).map_err(err)?;
        let got = spec.monomial_basis(bd);
        let got_set: BTreeSet<Vec<u32>> = got.iter().cloned().collect();
        if got_set.len() != got.len() {
            return Err(format!("trial {trial}: duplicate monomials for {spec:?} at {bd}"));
        }
        let want = brute_force_basis(base_vars, &twists, &weights, bd);
        if got_set != want {
            return Err(format!(
                "trial {trial}: twists {twists:?} weights {weights:?} base vars {base_vars} at {bd}: {} monomials, oracle {}",
                got.len(),
                want.len()
            ));
        }
        total += got.len();
        nonempty += usize::from(!got.is_empty());
    }
    Ok(format!("200 specs agree ({nonempty} nonempty pieces, {total} monomials)"))
}

/// `ω_Z ⊗ L^p` from the grading matrix of the bundle containing `Z`: minus
/// the sum of the columns, plus the class of `Z` when it is a hypersurface.
fn sheaf_m_from_grading(params: &FamilyParams) -> [i64; 2] {
    let n = params.n();
    // (fiber columns, hypersurface class of Z, L, p)
    let (fiber, hyper, l, p): (Vec<[i64; 2]>, Option<[i64; 2]>, [i64; 2], i64) = match *params {
        FamilyParams::Dp1 { lambda, mu, .. } => (vec![[0, 1], [lambda, 1], [2 * mu, 2]], None, [3 * mu, 3], 2),
        FamilyParams::Dp2 { lambda, mu, nu, .. } => {
            if 2 * nu == 3 * mu && 3 * mu == 4 * lambda {
                (
                    vec![[0, 1], [lambda, 1], [3 * mu, 3], [nu, 2]],
                    Some([2 * nu, 4]),
                    [mu, 1],
                    3,
                )
            } else {
                (vec![[0, 1], [lambda, 1], [mu, 1]], None, [nu, 2], 2)
            }
        }
        FamilyParams::Dp3 {
            theta, lambda, mu, nu, ..
        } => {
            if theta > 3 * nu {
                (
                    vec![[0, 1], [lambda, 1], [mu, 1], [3 * nu, 3]],
                    Some([theta, 3]),
                    [nu, 1],
                    3,
                )
            } else if theta == 3 * nu {
                (vec![[0, 1], [lambda, 1], [mu, 1]], None, [nu, 1], 3)
            } else {
                (
                    vec![[0, 1], [lambda, 1], [mu, 1], [2 * nu, 2]],
                    Some([theta, 3]),
                    [nu, 1],
                    2,
                )
            }
        }
    };
    let mut columns: Vec<[i64; 2]> = vec![[1, 0]; (n - 1) as usize];
    columns.extend(fiber);
    let mut k = [0i64, 0];
    for c in &columns {
        k[0] -= c[0];
        k[1] -= c[1];
    }
    if let Some(h) = hyper {
        k[0] += h[0];
        k[1] += h[1];
    }
    [k[0] + p * l[0], k[1] + p * l[1]]
}

fn sheaf_formula_cross_check() -> Result<String, String> {
    let bounds = EnumerationBounds {
        max_twist: 4,
        max_theta: 12,
    };
    let mut count = 0;
    let mut routes = BTreeSet::new();
    for n in 3..=5 {
        for degree in 1..=3 {
            for (p, _) in enumerate_families(degree, n, bounds).map_err(err)? {
                let cited = cited_sheaf_m(&p);
                let oracle = sheaf_m_from_grading(&p);
                if [cited.alpha, cited.beta] != oracle {
                    return Err(format!("{p}: closed form {cited}, grading matrix gives {oracle:?}"));
                }
                routes.insert(format!("{:?}", DegenerationRoute::for_params(&p)));
                count += 1;
            }
        }
    }
    Ok(format!("{count} families agree across {} routes", routes.len()))
}

fn restriction_surjectivity() -> Result<String, String> {
    let fields = [gf(2, 4), gf(3, 2)];
    let mut jobs = Vec::new();
    for case in SurjectivityCase::ALL {
        for m in [1u32, 2] {
            for d in [3u32, 4, 6] {
                for lambda in 0..=2 {
                    for mu in 0..=2 {
                        let mut params = SurjectivityParams {
                            m,
                            d,
                            lambda,
                            mu,
                            delta: 0,
                            base_dim: 1,
                        };
                        params.delta = params.delta_bound(case);
                        if !params.hypotheses_hold(case) {
                            continue;
                        }
                        for f in &fields {
                            jobs.push((case, params, f.clone()));
                        }
                    }
                }
            }
        }
    }
    let results: Vec<Result<(), String>> = jobs
        .par_iter()
        .enumerate()
        .map(|(k, (case, params, f))| {
            let r = verify_surjectivity_case(*case, *params, f, 100, k as u64).map_err(err)?;
            if r.all_surjective && r.samples.len() == 100 {
                Ok(())
            } else {
                let bad = r.samples.iter().filter(|s| !s.surjective).count();
                Err(format!(
                    "case {} {params:?} over {}: standard point surjective {}, {bad} of 100 samples not surjective",
                    case.number(),
                    f.descriptor(),
                    r.standard_point.surjective
                ))
            }
        })
        .collect();
    if let Some(Err(e)) = results.iter().find(|r| r.is_err()) {
        return Err(e.clone());
    }
    let mut probe = SurjectivityParams {
        m: 1,
        d: 3,
        lambda: 0,
        mu: 0,
        delta: 0,
        base_dim: 1,
    };
    probe.delta = probe.delta_bound(SurjectivityCase::ThirdOrderOnOpen) - 1;
    for f in &fields {
        let r = verify_surjectivity_case(SurjectivityCase::ThirdOrderOnOpen, probe, f, 0, 0).map_err(err)?;
        if r.standard_point.surjective {
            return Err(format!("δ = {} probe is surjective over {}", probe.delta, f.descriptor()));
        }
    }
    Ok(format!(
        "{} (case, parameters, field) combinations surjective at 101 points each; δ = {} probe fails",
        jobs.len(),
        probe.delta
    ))
}

/// Polynomials over `Z/p` in three variables as `(exponents, coefficient)`.
type IntPoly = Vec<([u32; 3], u32)>;

fn int_partial(f: &IntPoly, i: usize, p: u32) -> IntPoly {
    f.iter()
        .filter(|(e, c)| e[i] > 0 && (c * e[i]) % p != 0)
        .map(|(e, c)| {
            let mut e2 = *e;
            e2[i] -= 1;
            (e2, (c * e[i]) % p)
        })
        .collect()
}

/// Rank of a matrix over `Z/p` by plain Gaussian elimination.
fn int_rank(mut rows: Vec<Vec<u32>>, p: u32) -> usize {
    let inv = |a: u32| (1..p).find(|b| a * b % p == 1).unwrap();
    let cols = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..rows.len()).find(|&i| rows[i][c] != 0) else {
            continue;
        };
        rows.swap(r, piv);
        let s = inv(rows[r][c]);
        for v in rows[r].iter_mut() {
            *v = *v * s % p;
        }
        for i in 0..rows.len() {
            if i != r && rows[i][c] != 0 {
                let t = rows[i][c];
                for k in 0..cols {
                    rows[i][k] = (rows[i][k] + p * p - t * rows[r][k]) % p;
                }
            }
        }
        r += 1;
    }
    r
}

/// `dim k[x]/(J + m^N)` at the origin for `N = 1, 2, ...`, returning the
/// first value repeated by the next `N`, or `None` if none repeats by `cap`.
fn oracle_local_length(gens: &[IntPoly], p: u32, cap: u32) -> Option<u32> {
    let mut prev = None;
    for big_n in 1..=cap {
        let monos: Vec<[u32; 3]> = (0..big_n)
            .flat_map(|d| (0..=d).flat_map(move |a| (0..=d - a).map(move |b| [a, b, d - a - b])))
            .collect();
        let index = |e: &[u32; 3]| monos.iter().position(|m| m == e);
        let mut rows = Vec::new();
        for g in gens {
            for m in &monos {
                let mut row = vec![0u32; monos.len()];
                for (e, c) in g {
                    let prod = [e[0] + m[0], e[1] + m[1], e[2] + m[2]];
                    if let Some(k) = index(&prod) {
                        row[k] = (row[k] + c) % p;
                    }
                }
                if row.iter().any(|&v| v != 0) {
                    rows.push(row);
                }
            }
        }
        let dim = (monos.len() - int_rank(rows, p)) as u32;
        if prev == Some(dim) {
            return Some(dim);
        }
        prev = Some(dim);
    }
    None
}

/// The char-2 normal form condition: the polar form of the quadratic part
/// has rank 2 and the cubic part does not vanish on its radical.
fn almost_normal_form_condition(f: &IntPoly) -> bool {
    let coeff = |e: [u32; 3]| f.iter().find(|(x, _)| *x == e).map_or(0, |t| t.1) % 2;
    // B(e_i, e_j) = coefficient of x_i x_j
    let mut b = [[0u32; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                let mut e = [0u32; 3];
                e[i] += 1;
                e[j] += 1;
                b[i][j] = coeff(e);
            }
        }
    }
    if int_rank(b.iter().map(|r| r.to_vec()).collect(), 2) != 2 {
        return false;
    }
    // radical of an alternating rank-2 form in dimension 3
    let v = [b[1][2], b[0][2], b[0][1]];
    let mut f3 = 0u32;
    for (e, c) in f.iter().filter(|(e, _)| e.iter().sum::<u32>() == 3) {
        let mut t = *c;
        for k in 0..3 {
            for _ in 0..e[k] {
                t *= v[k];
            }
        }
        f3 += t;
    }
    f3 % 2 != 0
}

fn classification_vs_length() -> Result<String, String> {
    const FRAME: [[u32; 3]; 6] = [[2, 0, 0], [0, 1, 1], [3, 0, 0], [1, 1, 0], [0, 0, 2], [0, 2, 1]];
    let mut summary = Vec::new();
    for p in [2u32, 3] {
        let field = gf(p, 1);
        let vars = Arc::new(indexed_names("x", 3));
        let total = p.pow(6);
        let outcomes: Vec<Result<[usize; 3], String>> = (0..total)
            .into_par_iter()
            .map(|code| {
                let mut digits = [0u32; 6];
                let mut c = code;
                for d in digits.iter_mut() {
                    *d = c % p;
                    c /= p;
                }
                let ip: IntPoly = FRAME.iter().zip(digits).filter(|(_, c)| *c != 0).map(|(e, c)| (*e, c)).collect();
                let mut f = Poly::zero(&field, vars.clone());
                for (e, c) in &ip {
                    f.add_term(e.to_vec(), field.from_int(*c as i64));
                }
                let got = classify_critical_point(&f, &[Fe::ZERO; 3]).map_err(err)?.classification;
                let grads: Vec<IntPoly> = (0..3).map(|i| int_partial(&ip, i, p)).collect();
                let length = oracle_local_length(&grads, p, 8);
                let hess: Vec<Vec<u32>> = (0..3)
                    .map(|i| (0..3).map(|j| {
                        let d = int_partial(&grads[i], j, p);
                        d.iter().find(|(e, _)| *e == [0, 0, 0]).map_or(0, |t| t.1)
                    }).collect())
                    .collect();
                let full_hessian = int_rank(hess, p) == 3;
                if full_hessian != (length == Some(1)) {
                    return Err(format!("oracle disagrees with itself on {f}: Hessian full {full_hessian}, length {length:?}"));
                }
                let nf = p == 2 && almost_normal_form_condition(&ip);
                let want = if length == Some(1) {
                    Classification::Nondegenerate
                } else if length == Some(2) && nf {
                    Classification::AlmostNondegenerate
                } else {
                    Classification::Degenerate
                };
                if p == 2 && (length == Some(2)) != nf {
                    return Err(format!("{f} over GF(2): length {length:?} but normal form condition {nf}"));
                }
                if got != want {
                    return Err(format!("{f} over {}: classified {got:?}, oracle {want:?} (length {length:?})", field.descriptor()));
                }
                let mut tally = [0usize; 3];
                tally[match want {
                    Classification::Nondegenerate => 0,
                    Classification::AlmostNondegenerate => 1,
                    _ => 2,
                }] += 1;
                Ok(tally)
            })
            .collect();
        let mut tally = [0usize; 3];
        for o in outcomes {
            let t = o?;
            for k in 0..3 {
                tally[k] += t[k];
            }
        }
        summary.push(format!(
            "GF({p}): {total} polynomials, {} nondegenerate, {} almost, {} degenerate",
            tally[0], tally[1], tally[2]
        ));
    }
    Ok(summary.join("; "))
}

fn census_signature(f: &Poly, filter: Option<&Poly>) -> Result<Vec<(Vec<Fe>, Classification)>, String> {
    let accept = |pt: &[Fe]| filter.map_or(true, |a| !a.eval(pt).is_zero());
    let opts = ScanOptions {
        filter: Some(&accept),
        ..Default::default()
    };
    let mut out: Vec<(Vec<Fe>, Classification)> = critical_points_census(f, &opts)
        .map_err(err)?
        .into_iter()
        .map(|r| (r.point, r.classification))
        .collect();
    out.sort();
    Ok(out)
}

fn invariance_laws() -> Result<String, String> {
    let mut notes = Vec::new();
    for field in [gf(2, 2), gf(3, 2)] {
        let p = field.characteristic();
        let results: Vec<Result<usize, String>> = (0..200u64)
            .into_par_iter()
            .map(|trial| {
                let mut rng = ChaCha8Rng::seed_from_u64(0x696e76 ^ (trial << 8) ^ field.order() as u64);
                // no constant or linear part, so the origin is always critical
                let f = random_poly(&field, 3, 2, 4, 0.5, &mut rng);
                let (lhs, rhs, filter) = if trial % 2 == 0 {
                    let g = random_poly(&field, 3, 0, 2, 0.5, &mut rng);
                    (f.clone(), f.add(&g.pow(p)), None)
                } else {
                    let mut a = random_poly(&field, 3, 0, 2, 0.5, &mut rng);
                    a.add_term(vec![0; 3], Fe::ONE);
                    (f.clone(), a.pow(p).mul(&f), Some(a))
                };
                let l = census_signature(&lhs, filter.as_ref())?;
                let r = census_signature(&rhs, filter.as_ref())?;
                if l != r {
                    return Err(format!(
                        "trial {trial} over {}: censuses of {lhs} and {rhs} differ",
                        field.descriptor()
                    ));
                }
                Ok(l.len())
            })
            .collect();
        let mut points = 0;
        for r in results {
            points += r?;
        }
        notes.push(format!("{}: 100 + 100 trials, {points} critical points compared", field.descriptor()));
    }
    Ok(notes.join("; "))
}

fn char2_hessian_structure() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x686573);
    let mut ranks = [0usize; 6];
    for trial in 0..500 {
        let k = rng.gen_range(1..=4);
        let field = gf(2, k);
        let n = rng.gen_range(1..=5usize);
        let f = random_poly(&field, n, 0, 4, 0.4, &mut rng);
        let pt: Vec<Fe> = (0..n).map(|_| random_fe(&field, &mut rng)).collect();
        let h = hessian(&f, &pt);
        for i in 0..n {
            if !h[i][i].is_zero() {
                return Err(format!("trial {trial}: diagonal entry {i} of the Hessian of {f} is nonzero"));
            }
            for j in 0..n {
                // second partials computed independently of the expansion
                let d = f.partial(i).partial(j).eval(&pt);
                if h[i][j] != d {
                    return Err(format!("trial {trial}: Hessian entry ({i},{j}) of {f} differs from d2f"));
                }
            }
        }
        let r = rank(&field, &h);
        if r % 2 != 0 {
            return Err(format!("trial {trial}: Hessian of {f} has odd rank {r}"));
        }
        ranks[r] += 1;
    }
    Ok(format!("500 draws; rank counts 0/2/4: {}/{}/{}", ranks[0], ranks[2], ranks[4]))
}

/// The acceptance families with their fields.
pub fn pipeline_families() -> Vec<(FamilyParams, Field)> {
    vec![
        (FamilyParams::Dp1 { n: 3, lambda: 0, mu: 1 }, gf(2, 3)),
        (FamilyParams::Dp2 { n: 3, lambda: 0, mu: 0, nu: 1 }, gf(2, 3)),
        (FamilyParams::Dp2 { n: 3, lambda: 3, mu: 4, nu: 6 }, gf(3, 2)),
        (
            FamilyParams::Dp3 {
                n: 3,
                theta: 3,
                lambda: 0,
                mu: 0,
                nu: 1,
            },
            gf(3, 2),
        ),
        (
            FamilyParams::Dp3 {
                n: 3,
                theta: 2,
                lambda: 0,
                mu: 0,
                nu: 1,
            },
            gf(2, 3),
        ),
    ]
}

fn pipeline_runs() -> Result<String, String> {
    let opts = PipelineOptions::default();
    let mut notes = Vec::new();
    let mut problems = Vec::new();
    for (params, field) in pipeline_families() {
        let mut witnessed = 0;
        let mut slowest = 0f64;
        for seed in 1..=20u64 {
            let start = Instant::now();
            let r = run_pipeline(&params, &field, seed, &opts);
            let secs = start.elapsed().as_secs_f64();
            slowest = slowest.max(secs);
            if secs > PIPELINE_RUN_LIMIT_SECONDS {
                problems.push(format!("{params} seed {seed} took {secs:.1}s"));
            }
            match r {
                Ok(r) if r.overall == Overall::ObstructionWitnessed => witnessed += 1,
                // only exhausting the genericity retries is acceptable
                Ok(r) if r.overall == Overall::Failed && r.h0_nonzero && r.attempts.len() == opts.max_attempts => {}
                Ok(r) => problems.push(format!("{params} seed {seed}: {:?}, {:?}", r.overall, r.failures)),
                Err(e) => problems.push(format!("{params} seed {seed}: error {e}")),
            }
        }
        if witnessed < 18 {
            problems.push(format!("{params} over {}: only {witnessed}/20 witnessed", field.descriptor()));
        }
        notes.push(format!("{params}/{} {witnessed}/20 (max {slowest:.2}s)", field.descriptor()));
    }
    if problems.is_empty() {
        Ok(notes.join("; "))
    } else {
        Err(format!("{}; {}", problems.join("; "), notes.join("; ")))
    }
}

/// The negative controls: `(family, field, sabotage, seeds)`.
pub fn negative_control_members() -> Vec<(FamilyParams, Field, Sabotage, Vec<u64>)> {
    vec![
        (
            FamilyParams::Dp3 {
                n: 3,
                theta: 5,
                lambda: 0,
                mu: 0,
                nu: 2,
            },
            gf(2, 3),
            Sabotage::SharedRootOfCoefficients,
            vec![1, 2, 3],
        ),
        (FamilyParams::Dp1 { n: 3, lambda: 1, mu: 1 }, gf(2, 3), Sabotage::VanishingLocusCoefficient, vec![1, 2, 3]),
        (
            FamilyParams::Dp3 {
                n: 3,
                theta: 5,
                lambda: 0,
                mu: 0,
                nu: 1,
            },
            gf(3, 2),
            Sabotage::SquareCoefficient,
            vec![1, 2],
        ),
        (
            FamilyParams::Dp2 { n: 3, lambda: 0, mu: 0, nu: 1 },
            gf(2, 3),
            Sabotage::PlantedDegeneratePoint,
            vec![1, 2],
        ),
    ]
}

/// Marker of the concrete witness each sabotage must produce.
fn witness_marker(s: Sabotage) -> &'static str {
    match s {
        Sabotage::SharedRootOfCoefficients | Sabotage::SquareCoefficient => "singular at (",
        Sabotage::VanishingLocusCoefficient => "a = 0",
        Sabotage::PlantedDegeneratePoint => "degenerate critical point (",
    }
}

fn negative_controls() -> Result<String, String> {
    let mut count = 0;
    let mut notes = Vec::new();
    for (params, field, sabotage, seeds) in negative_control_members() {
        // the sabotage is applied to every draw, so one attempt suffices
        let opts = PipelineOptions {
            sabotage: Some(sabotage),
            max_attempts: 1,
            ..Default::default()
        };
        for seed in seeds {
            let r = run_pipeline(&params, &field, seed, &opts).map_err(err)?;
            let marker = witness_marker(sabotage);
            let witness = r.failures.iter().find(|f| f.contains(marker));
            match (r.overall, witness) {
                (Overall::Failed, Some(w)) => {
                    count += 1;
                    if notes.len() < 4 && !notes.iter().any(|n: &String| n.starts_with(&format!("{sabotage:?}"))) {
                        notes.push(format!("{sabotage:?}: {w}"));
                    }
                }
                _ => {
                    return Err(format!(
                        "{params} {sabotage:?} seed {seed}: {:?} without a `{marker}` witness: {:?}",
                        r.overall, r.failures
                    ))
                }
            }
        }
    }
    Ok(format!("{count} sabotaged members failed with witnesses; {}", notes.join("; ")))
}

fn product_families() -> Result<String, String> {
    let cases = [
        ((1, 3, 1), VerdictTag::NotStablyRationalVG),
        ((2, 3, 1), VerdictTag::NotStablyRationalVG),
        ((3, 3, 2), VerdictTag::NotStablyRationalVG),
        ((3, 4, 3), VerdictTag::NotStablyRationalVG),
        ((3, 3, 1), VerdictTag::ExceptionalRational),
    ];
    let mut notes = Vec::new();
    for ((case, n, k), want) in cases {
        let (params, _) = product_family(case, n, k).map_err(err)?;
        let v = classify(&params);
        if v.tag != want {
            return Err(format!("({case},{n},{k}) -> {params}: {:?}, expected {want:?}", v.tag));
        }
        notes.push(format!("({case},{n},{k}) {params} {:?}", v.tag));
    }
    Ok(notes.join("; "))
}
