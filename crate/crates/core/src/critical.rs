//! Critical points of polynomials on affine space in characteristic p.
//!
//! A point is critical when every first partial vanishes there. It is
//! nondegenerate when the Hessian has full rank, and, in characteristic 2
//! with an odd number of variables (where the Hessian is alternating and so
//! never invertible), almost nondegenerate when the Jacobian ideal has length
//! 2 at the point.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::Chart;
use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::linalg::{rank, EchelonBasis};
use crate::poly::{Evaluator, Poly};

/// Truncation degree used when classifying critical points.
pub const DEFAULT_LENGTH_CAP: u32 = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    NotCritical,
    Nondegenerate,
    AlmostNondegenerate,
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LocalLength {
    Finite(u32),
    /// No stabilization up to the truncation cap.
    Infinite,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CritRecord {
    #[serde(skip)]
    pub point: Vec<Fe>,
    /// Coordinates as `[c0,c1,...]` literals.
    pub coordinates: Vec<String>,
    pub classification: Classification,
    pub hessian_rank: usize,
    pub local_length: Option<LocalLength>,
    pub chart: Option<Chart>,
    /// Name of the documented locus containing the point, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub locus: Option<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusCounts {
    pub nondegenerate: usize,
    pub almost: usize,
    pub degenerate: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CensusReport {
    pub field: String,
    pub chart: Option<[usize; 2]>,
    pub counts: CensusCounts,
    pub records: Vec<CritRecord>,
}

impl CensusReport {
    pub fn from_records(field: &Field, chart: Option<Chart>, records: Vec<CritRecord>) -> CensusReport {
        let mut counts = CensusCounts::default();
        for r in &records {
            match r.classification {
                Classification::Nondegenerate => counts.nondegenerate += 1,
                Classification::AlmostNondegenerate => counts.almost += 1,
                Classification::Degenerate => counts.degenerate += 1,
                Classification::NotCritical => {}
            }
        }
        CensusReport {
            field: field.descriptor(),
            chart: chart.map(|c| [c.i, c.j]),
            counts,
            records,
        }
    }
}

/// Hessian matrix `d^2 f / dx_i dx_j` at a point.
pub fn hessian(f: &Poly, point: &[Fe]) -> Vec<Vec<Fe>> {
    let field = f.field();
    let n = f.nvars();
    let t = f.translate(point, Some(2));
    let mut h = vec![vec![Fe::ZERO; n]; n];
    for (e, c) in t.terms() {
        if e.iter().sum::<u32>() != 2 {
            continue;
        }
        let idx: Vec<usize> = (0..n).filter(|&i| e[i] > 0).collect();
        if idx.len() == 1 {
            let i = idx[0];
            h[i][i] = field.mul(c, field.from_int(2));
        } else {
            h[idx[0]][idx[1]] = c;
            h[idx[1]][idx[0]] = c;
        }
    }
    h
}

pub fn hessian_rank(f: &Poly, point: &[Fe]) -> usize {
    rank(f.field(), &hessian(f, point))
}

pub(crate) fn jet_monomials(n: usize, max_deg: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0u32; n]];
    let mut frontier = vec![vec![0u32; n]];
    for _ in 0..max_deg {
        let mut next = Vec::new();
        for m in &frontier {
            let last = m.iter().rposition(|&k| k > 0).unwrap_or(0);
            for i in last..n {
                let mut e = m.clone();
                e[i] += 1;
                next.push(e);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// `dim O/(I + m^c)` at `point` for increasing `c`, returning the first
/// value with `dim(c-1) = dim(c)`; `Infinite` when it does not stabilize by
/// `c = cap`.
pub fn local_length_truncated(generators: &[Poly], point: &[Fe], cap: u32) -> Result<LocalLength> {
    if cap < 2 {
        return Err(Error::InvalidArgument("truncation cap must be at least 2".into()));
    }
    let Some(first) = generators.first() else {
        return Ok(LocalLength::Infinite);
    };
    let field = first.field().clone();
    let n = first.nvars();
    if point.len() != n {
        return Err(Error::InvalidPoint(format!("expected {n} coordinates")));
    }
    let jets: Vec<Poly> = generators
        .iter()
        .map(|g| g.translate(point, Some(cap - 1)))
        .filter(|g| !g.is_zero())
        .collect();
    let all = jet_monomials(n, cap - 1);
    let mut prev: Option<u32> = None;
    for c in 1..=cap {
        let monos: Vec<&Vec<u32>> = all.iter().filter(|m| m.iter().sum::<u32>() < c).collect();
        let index: HashMap<&Vec<u32>, usize> = monos.iter().enumerate().map(|(i, m)| (*m, i)).collect();
        let mut basis = EchelonBasis::new(&field, monos.len());
        for g in &jets {
            let o = g.order().unwrap();
            if o >= c {
                continue;
            }
            for m in monos.iter().filter(|m| m.iter().sum::<u32>() < c - o) {
                let mut row = vec![Fe::ZERO; monos.len()];
                let mut any = false;
                for (e, coef) in g.terms() {
                    let deg: u32 = e.iter().sum::<u32>() + m.iter().sum::<u32>();
                    if deg >= c {
                        continue;
                    }
                    let prod: Vec<u32> = e.iter().zip(m.iter()).map(|(a, b)| a + b).collect();
                    row[index[&prod]] = coef;
                    any = true;
                }
                if any {
                    basis.insert(row);
                }
            }
        }
        let dim = (monos.len() - basis.rank()) as u32;
        if prev == Some(dim) {
            return Ok(LocalLength::Finite(dim));
        }
        prev = Some(dim);
    }
    Ok(LocalLength::Infinite)
}

/// All first partials of `f`.
pub fn gradient(f: &Poly) -> Vec<Poly> {
    (0..f.nvars()).map(|v| f.partial(v)).collect()
}

/// Classifies `f` at `point` (affine coordinates in the variables of `f`).
pub fn classify_critical_point(f: &Poly, point: &[Fe]) -> Result<CritRecord> {
    classify_with_gradient(f, &gradient(f), point)
}

fn classify_with_gradient(f: &Poly, grad: &[Poly], point: &[Fe]) -> Result<CritRecord> {
    let field = f.field();
    let n = f.nvars();
    if point.len() != n {
        return Err(Error::InvalidPoint(format!(
            "expected {n} coordinates, got {}",
            point.len()
        )));
    }
    let coordinates = point.iter().map(|&a| field.literal(a)).collect();
    let hr = hessian_rank(f, point);
    let critical = grad.iter().all(|g| g.eval(point).is_zero());
    if !critical {
        return Ok(CritRecord {
            point: point.to_vec(),
            coordinates,
            classification: Classification::NotCritical,
            hessian_rank: hr,
            local_length: None,
            chart: None,
            locus: None,
        });
    }
    let length = if n == 0 {
        LocalLength::Finite(1)
    } else {
        local_length_truncated(grad, point, DEFAULT_LENGTH_CAP)?
    };
    let classification = if hr == n {
        Classification::Nondegenerate
    } else if field.characteristic() == 2 && n % 2 == 1 && length == LocalLength::Finite(2) {
        Classification::AlmostNondegenerate
    } else {
        Classification::Degenerate
    };
    Ok(CritRecord {
        point: point.to_vec(),
        coordinates,
        classification,
        hessian_rank: hr,
        local_length: Some(length),
        chart: None,
        locus: None,
    })
}

/// Options for exhaustive critical point scans.
pub struct ScanOptions<'a> {
    pub budget: u64,
    /// Only points accepted by the filter are considered.
    pub filter: Option<&'a (dyn Fn(&[Fe]) -> bool + Sync)>,
}

impl Default for ScanOptions<'_> {
    fn default() -> Self {
        ScanOptions {
            budget: crate::field::DEFAULT_BUDGET,
            filter: None,
        }
    }
}

/// Rational points of `GF(q)^n` where every polynomial in `polys` vanishes.
pub fn common_zeros(polys: &[Poly], n: usize, field: &Field, opts: &ScanOptions) -> Result<Vec<Vec<Fe>>> {
    let range = field.enumerate_points(n, opts.budget)?;
    let evals: Vec<Evaluator> = polys.iter().filter(|p| !p.is_zero()).map(Evaluator::new).collect();
    let chunks = range.split(64);
    let found: Vec<Vec<Vec<Fe>>> = chunks
        .par_iter()
        .map(|r| {
            let mut out = Vec::new();
            let mut pt = vec![Fe::ZERO; n];
            let mut logs = Vec::with_capacity(n);
            for idx in r.start..r.end {
                r.point_at(idx, &mut pt);
                Evaluator::logs(field, &pt, &mut logs);
                if evals.iter().all(|e| e.eval_logs(&logs).is_zero())
                    && opts.filter.map_or(true, |flt| flt(&pt))
                {
                    out.push(pt.clone());
                }
            }
            out
        })
        .collect();
    Ok(found.into_iter().flatten().collect())
}

/// Rational critical points of `f` over its coefficient field, classified.
pub fn critical_points_census(f: &Poly, opts: &ScanOptions) -> Result<Vec<CritRecord>> {
    let grad = gradient(f);
    let pts = common_zeros(&grad, f.nvars(), f.field(), opts)?;
    pts.iter().map(|p| classify_with_gradient(f, &grad, p)).collect()
}

/// Census report for `f` over its coefficient field.
pub fn census_report(f: &Poly, chart: Option<Chart>, opts: &ScanOptions) -> Result<CensusReport> {
    let mut records = critical_points_census(f, opts)?;
    for r in &mut records {
        r.chart = chart;
    }
    Ok(CensusReport::from_records(f.field(), chart, records))
}

/// Compares the classification of `f` and `a^p f` at a point where `a` does
/// not vanish.
pub fn unit_multiple_invariance_check(f: &Poly, a: &Poly, point: &[Fe]) -> Result<bool> {
    if a.eval(point).is_zero() {
        return Err(Error::InvalidArgument("the multiplier vanishes at the point".into()));
    }
    let p = f.field().characteristic();
    let g = a.pow(p).mul(f);
    let c1 = classify_critical_point(f, point)?.classification;
    let c2 = classify_critical_point(&g, point)?.classification;
    Ok(c1 == c2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::sync::Arc;

    fn vars(n: usize) -> Arc<Vec<String>> {
        Arc::new((1..=n).map(|i| format!("x{i}")).collect())
    }

    fn origin(n: usize) -> Vec<Fe> {
        vec![Fe::ZERO; n]
    }

    #[test]
    fn normal_forms() {
        let f2 = Field::new(2, 1).unwrap();
        let even = Poly::parse("x1*x2 + x3*x4", &f2, vars(4)).unwrap();
        let r = classify_critical_point(&even, &origin(4)).unwrap();
        assert_eq!(r.classification, Classification::Nondegenerate);
        assert_eq!(r.hessian_rank, 4);

        let odd = Poly::parse("x1^2 + x2*x3 + x1^3", &f2, vars(3)).unwrap();
        let r = classify_critical_point(&odd, &origin(3)).unwrap();
        assert_eq!(r.classification, Classification::AlmostNondegenerate);
        assert_eq!(r.hessian_rank, 2);
        assert_eq!(r.local_length, Some(LocalLength::Finite(2)));

        let no_cubic = Poly::parse("x1^2 + x2*x3", &f2, vars(3)).unwrap();
        let r = classify_critical_point(&no_cubic, &origin(3)).unwrap();
        assert_eq!(r.classification, Classification::Degenerate);

        let f3 = Field::new(3, 1).unwrap();
        let q = Poly::parse("x1^2 + x2*x3", &f3, vars(3)).unwrap();
        assert_eq!(
            classify_critical_point(&q, &origin(3)).unwrap().classification,
            Classification::Nondegenerate
        );
        let lin = Poly::parse("x1 + x2^2", &f3, vars(2)).unwrap();
        assert_eq!(
            classify_critical_point(&lin, &origin(2)).unwrap().classification,
            Classification::NotCritical
        );
    }

    #[test]
    fn local_length_examples() {
        let f2 = Field::new(2, 1).unwrap();
        let f = Poly::parse("x1^3 + x2^3", &f2, vars(2)).unwrap();
        let g = gradient(&f);
        assert_eq!(local_length_truncated(&g, &origin(2), 8).unwrap(), LocalLength::Finite(4));
        // a non-isolated zero never stabilizes
        let h = vec![Poly::parse("x1", &f2, vars(2)).unwrap()];
        assert_eq!(local_length_truncated(&h, &origin(2), 6).unwrap(), LocalLength::Infinite);
        assert!(local_length_truncated(&g, &origin(2), 1).is_err());
    }

    #[test]
    fn census_of_planted_normal_form() {
        let f3 = Field::new(3, 2).unwrap();
        let f = Poly::parse("x1^2 + x2*x3", &f3, vars(3)).unwrap();
        let recs = critical_points_census(&f, &ScanOptions::default()).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].classification, Classification::Nondegenerate);
        assert!(recs[0].point.iter().all(|a| a.is_zero()));
    }

    #[test]
    fn census_report_shape() {
        let f2 = Field::new(2, 3).unwrap();
        let f = Poly::parse("x1^2 + x2*x3 + x1^3", &f2, vars(3)).unwrap();
        let rep = census_report(&f, Some(Chart { i: 0, j: 1 }), &ScanOptions::default()).unwrap();
        let v = serde_json::to_value(&rep).unwrap();
        assert_eq!(v["field"], "GF(2^3)");
        assert_eq!(v["chart"], serde_json::json!([0, 1]));
        assert!(v["counts"]["almost"].as_u64().unwrap() >= 1);
    }

    #[test]
    fn unit_multiple_rejects_vanishing_multiplier() {
        let f3 = Field::new(3, 1).unwrap();
        let f = Poly::parse("x1^2 + x2^2", &f3, vars(2)).unwrap();
        let a = Poly::parse("x1", &f3, vars(2)).unwrap();
        assert!(unit_multiple_invariance_check(&f, &a, &origin(2)).is_err());
        let b = Poly::parse("x1 + 1", &f3, vars(2)).unwrap();
        assert!(unit_multiple_invariance_check(&f, &b, &origin(2)).unwrap());
    }

    fn arb_poly(p: u32, k: u32, n: usize, max_exp: u32) -> impl Strategy<Value = Poly> {
        let field = Field::new(p, k).unwrap();
        let q = field.order();
        prop::collection::vec((prop::collection::vec(0..=max_exp, n), 1..q), 1..10).prop_map(move |ts| {
            let mut f = Poly::zero(&field, vars(n));
            for (e, c) in ts {
                f.add_term(e, Fe(c as u16));
            }
            f
        })
    }

    fn arb_point(q: u32, n: usize) -> impl Strategy<Value = Vec<Fe>> {
        prop::collection::vec(0..q, n).prop_map(|v| v.into_iter().map(|c| Fe(c as u16)).collect())
    }

    proptest! {
        #[test]
        fn hessian_is_alternating_in_char_two(
            f in arb_poly(2, 3, 4, 4), pt in arb_point(8, 4)
        ) {
            let h = hessian(&f, &pt);
            for i in 0..4 {
                prop_assert!(h[i][i].is_zero());
                for j in 0..4 {
                    prop_assert_eq!(h[i][j], h[j][i]);
                }
            }
            prop_assert_eq!(rank(f.field(), &h) % 2, 0);
        }

        #[test]
        fn nondegenerate_iff_length_one(f in arb_poly(3, 1, 3, 3)) {
            for r in critical_points_census(&f, &ScanOptions::default()).unwrap() {
                let nondeg = r.classification == Classification::Nondegenerate;
                prop_assert_eq!(nondeg, r.local_length == Some(LocalLength::Finite(1)));
                if nondeg {
                    prop_assert_eq!(r.hessian_rank, 3);
                }
            }
        }

        #[test]
        fn pth_power_shift_preserves_census(
            f in arb_poly(2, 2, 3, 3), h in arb_poly(2, 2, 3, 2)
        ) {
            let g = f.add(&h.pow(2));
            let a = critical_points_census(&f, &ScanOptions::default()).unwrap();
            let b = critical_points_census(&g, &ScanOptions::default()).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn unit_pth_multiple_preserves_classification(
            f in arb_poly(3, 2, 3, 3), a in arb_poly(3, 2, 3, 2), pt in arb_point(9, 3)
        ) {
            prop_assume!(!a.eval(&pt).is_zero());
            prop_assert!(unit_multiple_invariance_check(&f, &a, &pt).unwrap());
        }
    }
}
