//! Structural checks for positive-dimensional critical loci.
//!
//! Both checks take a polynomial `f` in variables `u_1..u_m, x, y` (the
//! positions of `x` and `y` are given) and decompose it modulo p-th powers.
//!
//! * Hypersurface locus: `f ~ a x + b x^2 + c x y + y^3 + g` in characteristic
//!   2 (`y^2` in place of `y^3` in characteristic 3), with `a`, `b`, `c`
//!   polynomials in `u`, `deg a > 0`, `(a = 0)` nonsingular and `g` in
//!   `(x, y)^3`. In characteristic 2 every monomial of `g` divisible by `y^3`
//!   must also be divisible by `x y^3` or `y^4`. The critical locus near
//!   `(x = y = a = 0)` must be exactly that set.
//! * Complete intersection locus: `f ~ a x + b y + g` with `deg a, deg b > 0`,
//!   `(a = b = 0)` a nonsingular complete intersection, `g` in `(x, y)^2`, and
//!   the critical locus near `(x = y = a = b = 0)` equal to that set.
//!
//! The "near the locus" condition is checked at each rational point `P` of the
//! locus: `P` must be critical, and the Jacobian ideal of `f`, restricted to
//! an affine slice through `P` transversal to the locus, must have finite
//! length at `P`. Rational-point scans make these checks partial evidence.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::check::CheckOutcome;
use crate::critical::{common_zeros, gradient, local_length_truncated, LocalLength, ScanOptions, DEFAULT_LENGTH_CAP};
use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::linalg::rank;
use crate::poly::Poly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocusKind {
    Hypersurface,
    CompleteIntersection,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocusConditionReport {
    pub kind: LocusKind,
    pub passed: bool,
    pub partial: bool,
    /// Coefficient polynomials in the base variables, as text.
    pub coefficients: Vec<(String, String)>,
    pub checks: Vec<CheckOutcome>,
}

impl LocusConditionReport {
    fn finish(kind: LocusKind, coefficients: Vec<(String, String)>, checks: Vec<CheckOutcome>) -> Self {
        LocusConditionReport {
            kind,
            passed: checks.iter().all(|c| c.passed),
            partial: checks.iter().any(|c| c.partial),
            coefficients,
            checks,
        }
    }
}

/// Options shared by both checks.
#[derive(Clone, Debug)]
pub struct LocusCheckOptions {
    pub budget: u64,
    /// Also scan the locus over the degree-2 extension of the coefficient
    /// field when the budget allows.
    pub scan_extension: bool,
}

impl Default for LocusCheckOptions {
    fn default() -> Self {
        LocusCheckOptions {
            budget: 2_000_000,
            scan_extension: true,
        }
    }
}

struct Split {
    u_vars: Vec<usize>,
    u_names: Arc<Vec<String>>,
}

impl Split {
    fn new(f: &Poly, x: usize, y: usize) -> Result<Split> {
        if x == y || x >= f.nvars() || y >= f.nvars() {
            return Err(Error::InvalidArgument("x and y must be distinct variables".into()));
        }
        let u_vars: Vec<usize> = (0..f.nvars()).filter(|&v| v != x && v != y).collect();
        let u_names = Arc::new(u_vars.iter().map(|&v| f.vars()[v].clone()).collect());
        Ok(Split { u_vars, u_names })
    }

    fn u_part(&self, e: &[u32]) -> Vec<u32> {
        self.u_vars.iter().map(|&v| e[v]).collect()
    }

    fn empty(&self, field: &Field) -> Poly {
        Poly::zero(field, self.u_names.clone())
    }
}

fn fields_to_scan(field: &Field, opts: &LocusCheckOptions) -> Vec<Field> {
    let mut out = vec![field.clone()];
    if opts.scan_extension {
        if let Ok(big) = Field::new(field.characteristic(), field.degree() * 2) {
            out.push(big);
        }
    }
    out
}

fn embed_all(polys: &[Poly], big: &Field) -> Vec<Poly> {
    polys
        .iter()
        .map(|p| {
            if p.field() == big {
                p.clone()
            } else {
                p.embed(&p.field().embedding_into(big).unwrap())
            }
        })
        .collect()
}

/// Univariate polynomial as a coefficient vector (low to high).
fn univariate(p: &Poly) -> Vec<Fe> {
    let deg = p.total_degree().unwrap_or(0) as usize;
    let mut v = vec![Fe::ZERO; deg + 1];
    for (e, c) in p.terms() {
        v[e[0] as usize] = c;
    }
    v
}

fn trim(v: &mut Vec<Fe>) {
    while v.len() > 1 && v.last().unwrap().is_zero() {
        v.pop();
    }
}

fn uni_rem(field: &Field, a: &[Fe], b: &[Fe]) -> Vec<Fe> {
    let mut r = a.to_vec();
    trim(&mut r);
    let db = b.len() - 1;
    let lead_inv = field.inv(*b.last().unwrap()).unwrap();
    while r.len() > db && !(r.len() == 1 && r[0].is_zero()) {
        let c = field.mul(*r.last().unwrap(), lead_inv);
        let shift = r.len() - 1 - db;
        for (i, &bc) in b.iter().enumerate() {
            r[shift + i] = field.sub(r[shift + i], field.mul(c, bc));
        }
        r.pop();
        if r.is_empty() {
            r.push(Fe::ZERO);
        }
        trim(&mut r);
        if r.len() <= db {
            break;
        }
    }
    r
}

/// Degree of `gcd(a, a')` for a univariate polynomial; 0 means squarefree.
fn squarefree_defect(field: &Field, a: &Poly) -> usize {
    let mut x = univariate(a);
    let mut y = univariate(&a.partial(0));
    trim(&mut x);
    trim(&mut y);
    if y.len() == 1 && y[0].is_zero() {
        // a' = 0 means a is a p-th power (or constant)
        return x.len() - 1;
    }
    while !(y.len() == 1 && y[0].is_zero()) {
        let r = uni_rem(field, &x, &y);
        x = y;
        y = r;
    }
    x.len() - 1
}

/// Degree of the gcd of univariate polynomials, ignoring zero polynomials;
/// `None` when all of them are zero.
pub(crate) fn univariate_gcd_degree(field: &Field, polys: &[Poly]) -> Option<usize> {
    let mut acc: Option<Vec<Fe>> = None;
    for p in polys.iter().filter(|p| !p.is_zero()) {
        let mut y = univariate(p);
        trim(&mut y);
        acc = Some(match acc {
            None => y,
            Some(mut x) => {
                while !(y.len() == 1 && y[0].is_zero()) {
                    let r = uni_rem(field, &x, &y);
                    x = y;
                    y = r;
                }
                x
            }
        });
    }
    acc.map(|v| v.len() - 1)
}

fn fmt_point(field: &Field, p: &[Fe]) -> String {
    let parts: Vec<String> = p.iter().map(|&a| field.format_coeff(a)).collect();
    format!("({})", parts.join(", "))
}

/// Nonsingularity of `(polys = 0)` in affine `u`-space: at every rational
/// zero the Jacobian has rank `polys.len()`.
pub(crate) fn check_nonsingular_zero_set(
    name: &str,
    polys: &[Poly],
    opts: &LocusCheckOptions,
) -> Result<CheckOutcome> {
    let field = polys[0].field().clone();
    let n = polys[0].nvars();
    if polys.len() == 1 && n == 1 {
        let defect = squarefree_defect(&field, &polys[0]);
        return Ok(if defect == 0 {
            CheckOutcome::pass(name, false, "squarefree in one variable")
        } else {
            CheckOutcome::fail(name, false, format!("repeated factor of degree {defect}"))
        });
    }
    let mut scanned = Vec::new();
    for big in fields_to_scan(&field, opts) {
        let ps = embed_all(polys, &big);
        let zeros = match common_zeros(&ps, n, &big, &ScanOptions { budget: opts.budget, filter: None }) {
            Ok(z) => z,
            Err(Error::BudgetExceeded { .. }) if big != field => continue,
            Err(e) => return Err(e),
        };
        let jac: Vec<Vec<Poly>> = ps.iter().map(gradient).collect();
        for z in &zeros {
            let m: Vec<Vec<Fe>> = jac.iter().map(|row| row.iter().map(|d| d.eval(z)).collect()).collect();
            if rank(&big, &m) < polys.len() {
                return Ok(CheckOutcome::fail(
                    name,
                    true,
                    format!("singular point {} over {}", fmt_point(&big, z), big.descriptor()),
                ));
            }
        }
        scanned.push(format!("{} zeros over {}", zeros.len(), big.descriptor()));
    }
    Ok(CheckOutcome::pass(name, true, scanned.join("; ")))
}

/// Every rational point of the locus is critical, and the Jacobian ideal cut
/// down to a transversal slice has finite length there.
fn check_locus_is_critical_set(
    f: &Poly,
    split: &Split,
    x: usize,
    y: usize,
    defining: &[Poly],
    opts: &LocusCheckOptions,
) -> Result<CheckOutcome> {
    let name = "critical_locus_equals_locus";
    let field = f.field().clone();
    let m = split.u_vars.len();
    let mut notes = Vec::new();
    for big in fields_to_scan(&field, opts) {
        let fb = embed_all(&[f.clone()], &big).pop().unwrap();
        let defs = embed_all(defining, &big);
        let zeros = if m == 0 {
            if defs.iter().all(|d| d.constant_term().is_zero()) {
                vec![vec![]]
            } else {
                vec![]
            }
        } else {
            match common_zeros(&defs, m, &big, &ScanOptions { budget: opts.budget, filter: None }) {
                Ok(z) => z,
                Err(Error::BudgetExceeded { .. }) if big != field => continue,
                Err(e) => return Err(e),
            }
        };
        let grad = gradient(&fb);
        let jac: Vec<Vec<Poly>> = defs.iter().map(gradient).collect();
        for uz in &zeros {
            let mut pt = vec![Fe::ZERO; f.nvars()];
            for (k, &v) in split.u_vars.iter().enumerate() {
                pt[v] = uz[k];
            }
            if grad.iter().any(|g| !g.eval(&pt).is_zero()) {
                return Ok(CheckOutcome::fail(
                    name,
                    true,
                    format!("locus point {} is not critical", fmt_point(&big, &pt)),
                ));
            }
            // slice directions: x, y and base directions where the defining
            // equations have an invertible minor
            let mut dirs = vec![x, y];
            let jm: Vec<Vec<Fe>> = jac.iter().map(|row| row.iter().map(|d| d.eval(uz)).collect()).collect();
            let mut chosen: Vec<usize> = Vec::new();
            for k in 0..m {
                let mut trial = chosen.clone();
                trial.push(k);
                let sub: Vec<Vec<Fe>> = jm.iter().map(|row| trial.iter().map(|&c| row[c]).collect()).collect();
                if rank(&big, &sub) == trial.len() {
                    chosen = trial;
                }
                if chosen.len() == defs.len() {
                    break;
                }
            }
            if chosen.len() < defs.len() {
                return Ok(CheckOutcome::fail(
                    name,
                    true,
                    format!("locus is singular at {}", fmt_point(&big, &pt)),
                ));
            }
            dirs.extend(chosen.iter().map(|&k| split.u_vars[k]));
            let slice_names: Arc<Vec<String>> = Arc::new(dirs.iter().map(|&v| fb.vars()[v].clone()).collect());
            let subs: Vec<Poly> = (0..f.nvars())
                .map(|v| {
                    let c = Poly::constant(&big, slice_names.clone(), pt[v]);
                    match dirs.iter().position(|&d| d == v) {
                        Some(k) => c.add(&Poly::var(&big, slice_names.clone(), k)),
                        None => c,
                    }
                })
                .collect();
            let sliced: Vec<Poly> = grad.iter().map(|g| g.substitute(&subs)).collect();
            let len = local_length_truncated(&sliced, &vec![Fe::ZERO; dirs.len()], DEFAULT_LENGTH_CAP)?;
            if len == LocalLength::Infinite {
                return Ok(CheckOutcome::fail(
                    name,
                    true,
                    format!(
                        "critical set is larger than the locus near {}",
                        fmt_point(&big, &pt)
                    ),
                ));
            }
        }
        notes.push(format!("{} locus points over {}", zeros.len(), big.descriptor()));
    }
    Ok(CheckOutcome::pass(name, true, notes.join("; ")))
}

/// Hypersurface-locus condition for `f` with distinguished variables `x`, `y`.
pub fn check_hypersurface_locus(f: &Poly, x: usize, y: usize, opts: &LocusCheckOptions) -> Result<LocusConditionReport> {
    let field = f.field().clone();
    let p = field.characteristic();
    if p != 2 && p != 3 {
        return Err(Error::UnsupportedField { p, k: field.degree() });
    }
    let split = Split::new(f, x, y)?;
    let lead_exp = if p == 2 { 3 } else { 2 };
    let s = f.strip_pth_powers();
    let (mut a, mut b, mut c) = (split.empty(&field), split.empty(&field), split.empty(&field));
    let mut lead = Fe::ZERO;
    let mut g = f.zero_like();
    for (e, coef) in s.terms() {
        let ue = split.u_part(e);
        let u_free = ue.iter().all(|&k| k == 0);
        match (e[x], e[y]) {
            (1, 0) => a.add_term(ue, coef),
            (2, 0) => b.add_term(ue, coef),
            (1, 1) => c.add_term(ue, coef),
            (0, k) if k == lead_exp && u_free => lead = coef,
            _ => g.add_term(e.clone(), coef),
        }
    }
    let coefficients = vec![
        ("a".to_string(), a.to_string()),
        ("b".to_string(), b.to_string()),
        ("c".to_string(), c.to_string()),
    ];
    let mut checks = Vec::new();
    if lead.is_zero() {
        checks.push(CheckOutcome::fail(
            "decomposition",
            false,
            format!("no constant y^{lead_exp} term after removing p-th powers"),
        ));
        return Ok(LocusConditionReport::finish(LocusKind::Hypersurface, coefficients, checks));
    }
    checks.push(CheckOutcome::pass(
        "decomposition",
        false,
        format!("y^{lead_exp} coefficient {}", field.format_coeff(lead)),
    ));
    let deg_a = a.total_degree();
    checks.push(match deg_a {
        Some(d) if d > 0 => CheckOutcome::pass("deg_a_positive", false, format!("deg a = {d}")),
        Some(_) => CheckOutcome::fail("deg_a_positive", false, "a is a nonzero constant"),
        None => CheckOutcome::fail("deg_a_positive", false, "a = 0"),
    });
    if deg_a.map_or(false, |d| d > 0) {
        checks.push(check_nonsingular_zero_set("a_nonsingular", &[a.clone()], opts)?);
    }
    let low: Vec<String> = g
        .terms()
        .filter(|(e, _)| e[x] + e[y] < 3)
        .map(|(e, c)| Poly::monomial(&field, f.vars().clone(), e.clone(), c).to_string())
        .collect();
    checks.push(if low.is_empty() {
        CheckOutcome::pass("remainder_in_cube", false, "")
    } else {
        CheckOutcome::fail("remainder_in_cube", false, format!("low-order terms {}", low.join(", ")))
    });
    if p == 2 {
        let bad: Vec<String> = g
            .terms()
            .filter(|(e, _)| e[y] >= 3 && e[x] == 0 && e[y] < 4)
            .map(|(e, c)| Poly::monomial(&field, f.vars().clone(), e.clone(), c).to_string())
            .collect();
        checks.push(if bad.is_empty() {
            CheckOutcome::pass("y_cubed_divisibility", false, "")
        } else {
            CheckOutcome::fail("y_cubed_divisibility", false, format!("terms {}", bad.join(", ")))
        });
    }
    if checks.iter().all(|c| c.passed) {
        checks.push(check_locus_is_critical_set(f, &split, x, y, &[a], opts)?);
    }
    Ok(LocusConditionReport::finish(LocusKind::Hypersurface, coefficients, checks))
}

/// Complete-intersection-locus condition for `f` with variables `x`, `y`.
pub fn check_complete_intersection_locus(
    f: &Poly,
    x: usize,
    y: usize,
    opts: &LocusCheckOptions,
) -> Result<LocusConditionReport> {
    let field = f.field().clone();
    let split = Split::new(f, x, y)?;
    let s = f.strip_pth_powers();
    let (mut a, mut b) = (split.empty(&field), split.empty(&field));
    let mut g = f.zero_like();
    for (e, coef) in s.terms() {
        let ue = split.u_part(e);
        match (e[x], e[y]) {
            (1, 0) => a.add_term(ue, coef),
            (0, 1) => b.add_term(ue, coef),
            _ => g.add_term(e.clone(), coef),
        }
    }
    let coefficients = vec![("a".to_string(), a.to_string()), ("b".to_string(), b.to_string())];
    let mut checks = Vec::new();
    for (label, q) in [("deg_a_positive", &a), ("deg_b_positive", &b)] {
        checks.push(match q.total_degree() {
            Some(d) if d > 0 => CheckOutcome::pass(label, false, format!("degree {d}")),
            Some(_) => CheckOutcome::fail(label, false, "nonzero constant"),
            None => CheckOutcome::fail(label, false, "zero"),
        });
    }
    if checks.iter().all(|c| c.passed) {
        checks.push(check_nonsingular_zero_set(
            "complete_intersection_nonsingular",
            &[a.clone(), b.clone()],
            opts,
        )?);
    }
    let low: Vec<String> = g
        .terms()
        .filter(|(e, _)| e[x] + e[y] < 2)
        .map(|(e, c)| Poly::monomial(&field, f.vars().clone(), e.clone(), c).to_string())
        .collect();
    checks.push(if low.is_empty() {
        CheckOutcome::pass("remainder_in_square", false, "")
    } else {
        CheckOutcome::fail("remainder_in_square", false, format!("low-order terms {}", low.join(", ")))
    });
    if checks.iter().all(|c| c.passed) {
        checks.push(check_locus_is_critical_set(f, &split, x, y, &[a, b], opts)?);
    }
    Ok(LocusConditionReport::finish(LocusKind::CompleteIntersection, coefficients, checks))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars(names: &[&str]) -> Arc<Vec<String>> {
        Arc::new(names.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn hypersurface_locus_basic_pass() {
        let f2 = Field::new(2, 3).unwrap();
        let f = Poly::parse("u1*x + x^2 + x*y + y^3", &f2, vars(&["u1", "x", "y"])).unwrap();
        let r = check_hypersurface_locus(&f, 1, 2, &LocusCheckOptions::default()).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn hypersurface_locus_needs_leading_term() {
        let f2 = Field::new(2, 3).unwrap();
        let f = Poly::parse("u1*x + x^2 + x*y", &f2, vars(&["u1", "x", "y"])).unwrap();
        let r = check_hypersurface_locus(&f, 1, 2, &LocusCheckOptions::default()).unwrap();
        assert!(!r.passed);
        assert_eq!(r.checks[0].name, "decomposition");
    }

    #[test]
    fn hypersurface_locus_rejects_constant_a_and_bare_y_cubed() {
        let f2 = Field::new(2, 2).unwrap();
        let v = vars(&["u1", "x", "y"]);
        let f = Poly::parse("x + x*y + y^3", &f2, v.clone()).unwrap();
        assert!(!check_hypersurface_locus(&f, 1, 2, &LocusCheckOptions::default()).unwrap().passed);
        let g = Poly::parse("u1*x + y^3 + u1*y^3", &f2, v).unwrap();
        let r = check_hypersurface_locus(&g, 1, 2, &LocusCheckOptions::default()).unwrap();
        assert!(!r.passed);
        assert!(r.checks.iter().any(|c| c.name == "y_cubed_divisibility" && !c.passed));
    }

    #[test]
    fn hypersurface_locus_singular_a() {
        let f3 = Field::new(3, 1).unwrap();
        let f = Poly::parse("u1^2*x + y^2 + x^3", &f3, vars(&["u1", "x", "y"])).unwrap();
        let r = check_hypersurface_locus(&f, 1, 2, &LocusCheckOptions::default()).unwrap();
        assert!(r.checks.iter().any(|c| c.name == "a_nonsingular" && !c.passed && !c.partial));
    }

    #[test]
    fn complete_intersection_examples() {
        let f3 = Field::new(3, 2).unwrap();
        let good = Poly::parse("u1*x + u2*y + x^2*y", &f3, vars(&["u1", "u2", "x", "y"])).unwrap();
        let r = check_complete_intersection_locus(&good, 2, 3, &LocusCheckOptions::default()).unwrap();
        assert!(r.passed, "{r:?}");
        let bad = Poly::parse("u1*x + u1*y + x^2", &f3, vars(&["u1", "x", "y"])).unwrap();
        let r = check_complete_intersection_locus(&bad, 1, 2, &LocusCheckOptions::default()).unwrap();
        assert!(!r.passed);
        assert!(r.checks.iter().any(|c| c.name == "complete_intersection_nonsingular" && !c.passed));
    }

    #[test]
    fn slice_check_detects_larger_critical_set() {
        // crit(x*y^2) is the plane y = 0, strictly larger than the origin
        let f3 = Field::new(3, 1).unwrap();
        let v = vars(&["u1", "x", "y"]);
        let f = Poly::parse("x*y^2", &f3, v.clone()).unwrap();
        let split = Split::new(&f, 1, 2).unwrap();
        let u1 = Poly::parse("u1", &f3, split.u_names.clone()).unwrap();
        let r = check_locus_is_critical_set(&f, &split, 1, 2, &[u1], &LocusCheckOptions::default()).unwrap();
        assert!(!r.passed);
        assert!(r.evidence.contains("larger"), "{}", r.evidence);
    }

    #[test]
    fn squarefree_defect_univariate() {
        let f3 = Field::new(3, 1).unwrap();
        let v = vars(&["u"]);
        let sq = Poly::parse("u^2 + 2*u + 1", &f3, v.clone()).unwrap();
        assert_eq!(squarefree_defect(&f3, &sq), 1);
        let sf = Poly::parse("u^2 + 1", &f3, v.clone()).unwrap();
        assert_eq!(squarefree_defect(&f3, &sf), 0);
        let cube = Poly::parse("u^3 + 1", &f3, v).unwrap();
        assert_eq!(squarefree_defect(&f3, &cube), 3);
    }
}
