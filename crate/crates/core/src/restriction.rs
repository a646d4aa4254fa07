//! Ranks of restriction maps from global sections to jets at a point.
//!
//! For a bidegree `(delta, d)` on a bundle and a point `p` in a chart, the map
//! `r_k` sends a section to its Taylor expansion at `p` modulo terms of degree
//! `>= k`. Its matrix has one row per basis monomial and one column per jet
//! monomial.
//!
//! The surjectivity cases concern the `P^2`-bundle with fiber coordinates
//! `x: (0,1)`, `y: (lambda,1)`, `z: (mu,m)`:
//!
//! | case | stratum | jets | hypothesis |
//! |------|---------|------|-----------|
//! | 1 | `x != 0` | order 3 | `delta >= max(2, 2 lambda, 2 mu)` |
//! | 2 | `x != 0` | order 4 | `delta >= max(3, 3 lambda, 3 mu)` |
//! | 3 | `x = 0, y != 0` | order 2 | `mu >= m lambda`, `delta >= max(d lambda + 1, (d-m) lambda + mu)` |
//! | 4 | `x = y = 0` | order 2 | `m = 1`, `lambda <= mu`, `delta >= d mu + 1` |
//!
//! All cases also assume `lambda, mu >= 0` and `d >= 3m`.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::{Bidegree, BundleSpec, Chart};
use crate::critical::jet_monomials;
use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::linalg::rank;
use crate::poly::Poly;

/// Jets of order `order` (degree `< order`) in `dim` variables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JetSpace {
    pub dim: usize,
    pub order: u32,
}

impl JetSpace {
    /// `binom(dim + order - 1, dim)`.
    pub fn dimension(&self) -> usize {
        if self.order == 0 {
            return 0;
        }
        let n = self.dim + self.order as usize - 1;
        let k = self.dim.min(n - self.dim);
        let mut c: u128 = 1;
        for i in 0..k {
            c = c * (n - i) as u128 / (i + 1) as u128;
        }
        c as usize
    }

    pub fn monomials(&self) -> Vec<Vec<u32>> {
        if self.order == 0 {
            return Vec::new();
        }
        jet_monomials(self.dim, self.order - 1)
    }
}

#[derive(Clone, Debug)]
pub struct RestrictionMatrix {
    pub chart: Chart,
    pub chart_point: Vec<Fe>,
    pub jets: JetSpace,
    pub jet_monomials: Vec<Vec<u32>>,
    pub rows: Vec<Vec<Fe>>,
}

impl RestrictionMatrix {
    pub fn rank(&self, field: &Field) -> usize {
        rank(field, &self.rows)
    }

    /// Rank after dropping jet columns of degree `>= order`.
    pub fn rank_truncated(&self, field: &Field, order: u32) -> usize {
        let keep: Vec<usize> = self
            .jet_monomials
            .iter()
            .enumerate()
            .filter(|(_, m)| m.iter().sum::<u32>() < order)
            .map(|(i, _)| i)
            .collect();
        let sub: Vec<Vec<Fe>> = self.rows.iter().map(|r| keep.iter().map(|&i| r[i]).collect()).collect();
        rank(field, &sub)
    }
}

/// Matrix of `r_k` at a Cox point, computed in the first chart (with a
/// weight-one fiber variable) containing it.
pub fn restriction_matrix(
    spec: &BundleSpec,
    field: &Field,
    bd: Bidegree,
    point: &[Fe],
    k: u32,
) -> Result<RestrictionMatrix> {
    spec.check_point(point)?;
    let chart = spec.chart_containing(point).ok_or_else(|| {
        Error::InvalidPoint("point lies in no chart with a weight-one fiber coordinate".into())
    })?;
    let q = spec.chart_coords(field, point, chart).unwrap();
    let jets = JetSpace {
        dim: q.len(),
        order: k,
    };
    let monos = jets.monomials();
    let index: HashMap<&Vec<u32>, usize> = monos.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let names = spec.var_names();
    let basis = spec.monomial_basis(bd);
    let mut rows = Vec::with_capacity(basis.len());
    for e in &basis {
        let m = Poly::monomial(field, names.clone(), e.clone(), Fe::ONE);
        let local = spec.dehomogenize(&m, chart)?;
        let jet = if k == 0 {
            local.zero_like()
        } else {
            local.translate(&q, Some(k - 1))
        };
        let mut row = vec![Fe::ZERO; monos.len()];
        for (je, c) in jet.terms() {
            row[index[je]] = c;
        }
        rows.push(row);
    }
    Ok(RestrictionMatrix {
        chart,
        chart_point: q,
        jets,
        jet_monomials: monos,
        rows,
    })
}

pub fn restriction_rank(spec: &BundleSpec, field: &Field, bd: Bidegree, point: &[Fe], k: u32) -> Result<usize> {
    Ok(restriction_matrix(spec, field, bd, point, k)?.rank(field))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurjectivityCase {
    /// Order-3 jets on `x != 0`.
    ThirdOrderOnOpen,
    /// Order-4 jets on `x != 0`.
    FourthOrderOnOpen,
    /// Order-2 jets on `x = 0, y != 0`.
    SecondOrderOnYStratum,
    /// Order-2 jets on `x = y = 0`.
    SecondOrderOnZStratum,
}

impl SurjectivityCase {
    pub const ALL: [SurjectivityCase; 4] = [
        SurjectivityCase::ThirdOrderOnOpen,
        SurjectivityCase::FourthOrderOnOpen,
        SurjectivityCase::SecondOrderOnYStratum,
        SurjectivityCase::SecondOrderOnZStratum,
    ];

    /// Cases are numbered 1 to 4 as in the module table.
    pub fn from_number(n: u32) -> Result<SurjectivityCase> {
        match n {
            1..=4 => Ok(Self::ALL[n as usize - 1]),
            _ => Err(Error::InvalidArgument(format!("surjectivity case {n} (expected 1-4)"))),
        }
    }

    pub fn number(self) -> u32 {
        Self::ALL.iter().position(|&c| c == self).unwrap() as u32 + 1
    }

    pub fn jet_order(self) -> u32 {
        match self {
            SurjectivityCase::ThirdOrderOnOpen => 3,
            SurjectivityCase::FourthOrderOnOpen => 4,
            _ => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurjectivityParams {
    pub m: u32,
    pub d: u32,
    pub lambda: i64,
    pub mu: i64,
    pub delta: i64,
    pub base_dim: usize,
}

impl SurjectivityParams {
    pub fn bundle(&self) -> Result<BundleSpec> {
        BundleSpec::new(self.base_dim, vec![0, self.lambda, self.mu], vec![1, 1, self.m])
    }

    /// Smallest `delta` allowed by the case hypothesis.
    pub fn delta_bound(&self, case: SurjectivityCase) -> i64 {
        let (d, m, l, u) = (self.d as i64, self.m as i64, self.lambda, self.mu);
        match case {
            SurjectivityCase::ThirdOrderOnOpen => 2.max(2 * l).max(2 * u),
            SurjectivityCase::FourthOrderOnOpen => 3.max(3 * l).max(3 * u),
            SurjectivityCase::SecondOrderOnYStratum => (d * l + 1).max((d - m) * l + u),
            SurjectivityCase::SecondOrderOnZStratum => d * u + 1,
        }
    }

    /// Whether every hypothesis for the case holds.
    pub fn hypotheses_hold(&self, case: SurjectivityCase) -> bool {
        let base = self.lambda >= 0 && self.mu >= 0 && self.m >= 1 && self.d >= 3 * self.m;
        let extra = match case {
            SurjectivityCase::SecondOrderOnYStratum => self.mu >= self.m as i64 * self.lambda,
            SurjectivityCase::SecondOrderOnZStratum => self.m == 1 && self.lambda <= self.mu,
            _ => true,
        };
        base && extra && self.delta >= self.delta_bound(case)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointRank {
    pub coordinates: Vec<String>,
    pub chart: [usize; 2],
    pub rank: usize,
    pub jet_dim: usize,
    pub surjective: bool,
    /// Surjectivity one jet order lower.
    pub lower_order_surjective: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictionReport {
    pub case: u32,
    pub params: SurjectivityParams,
    pub field: String,
    pub hypotheses_hold: bool,
    pub jet_order: u32,
    pub basis_size: usize,
    pub standard_point: PointRank,
    pub samples: Vec<PointRank>,
    pub all_surjective: bool,
}

fn stratum_point<R: Rng>(case: SurjectivityCase, field: &Field, base_vars: usize, rng: &mut R) -> Vec<Fe> {
    let q = field.order();
    let nonzero = |rng: &mut R| Fe(rng.gen_range(1..q) as u16);
    let any = |rng: &mut R| Fe(rng.gen_range(0..q) as u16);
    let mut u: Vec<Fe> = (0..base_vars).map(|_| any(rng)).collect();
    while u.iter().all(|a| a.is_zero()) {
        u = (0..base_vars).map(|_| any(rng)).collect();
    }
    let fiber = match case {
        SurjectivityCase::ThirdOrderOnOpen | SurjectivityCase::FourthOrderOnOpen => {
            vec![nonzero(rng), any(rng), any(rng)]
        }
        SurjectivityCase::SecondOrderOnYStratum => vec![Fe::ZERO, nonzero(rng), any(rng)],
        SurjectivityCase::SecondOrderOnZStratum => vec![Fe::ZERO, Fe::ZERO, nonzero(rng)],
    };
    u.extend(fiber);
    u
}

fn standard_point(case: SurjectivityCase, base_vars: usize) -> Vec<Fe> {
    let mut p = vec![Fe::ZERO; base_vars + 3];
    p[0] = Fe::ONE;
    let j = match case {
        SurjectivityCase::ThirdOrderOnOpen | SurjectivityCase::FourthOrderOnOpen => 0,
        SurjectivityCase::SecondOrderOnYStratum => 1,
        SurjectivityCase::SecondOrderOnZStratum => 2,
    };
    p[base_vars + j] = Fe::ONE;
    p
}

fn rank_at(spec: &BundleSpec, field: &Field, bd: Bidegree, p: &[Fe], k: u32) -> Result<PointRank> {
    let m = restriction_matrix(spec, field, bd, p, k)?;
    let r = m.rank(field);
    let jet_dim = m.jets.dimension();
    let lower_dim = JetSpace { dim: m.jets.dim, order: k - 1 }.dimension();
    let lower = m.rank_truncated(field, k - 1);
    Ok(PointRank {
        coordinates: p.iter().map(|&a| field.literal(a)).collect(),
        chart: [m.chart.i, m.chart.j],
        rank: r,
        jet_dim,
        surjective: r == jet_dim,
        lower_order_surjective: lower == lower_dim,
    })
}

/// Checks one surjectivity case at the standard point of its stratum and at
/// `samples` random stratum points. The check runs whether or not the
/// hypotheses hold; `hypotheses_hold` records which.
pub fn verify_surjectivity_case(
    case: SurjectivityCase,
    params: SurjectivityParams,
    field: &Field,
    samples: usize,
    seed: u64,
) -> Result<RestrictionReport> {
    if case == SurjectivityCase::SecondOrderOnZStratum && params.m != 1 {
        return Err(Error::InvalidArgument(
            "the stratum x = y = 0 has no weight-one chart unless m = 1".into(),
        ));
    }
    let spec = params.bundle()?;
    let bd = Bidegree::new(params.delta, params.d as i64);
    let k = case.jet_order();
    let b = spec.base_vars();
    let standard = rank_at(&spec, field, bd, &standard_point(case, b), k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Vec<Fe>> = (0..samples).map(|_| stratum_point(case, field, b, &mut rng)).collect();
    let ranks: Result<Vec<PointRank>> = pts.par_iter().map(|p| rank_at(&spec, field, bd, p, k)).collect();
    let ranks = ranks?;
    let all = standard.surjective && ranks.iter().all(|r| r.surjective);
    Ok(RestrictionReport {
        case: case.number(),
        params,
        field: field.descriptor(),
        hypotheses_hold: params.hypotheses_hold(case),
        jet_order: k,
        basis_size: spec.monomial_basis(bd).len(),
        standard_point: standard,
        samples: ranks,
        all_surjective: all,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn params(m: u32, d: u32, lambda: i64, mu: i64, delta: i64) -> SurjectivityParams {
        SurjectivityParams {
            m,
            d,
            lambda,
            mu,
            delta,
            base_dim: 1,
        }
    }

    #[test]
    fn jet_dimensions() {
        assert_eq!(JetSpace { dim: 3, order: 3 }.dimension(), 10);
        assert_eq!(JetSpace { dim: 3, order: 4 }.dimension(), 20);
        assert_eq!(JetSpace { dim: 3, order: 2 }.dimension(), 4);
        for dim in 1..5 {
            for order in 1..5 {
                let j = JetSpace { dim, order };
                assert_eq!(j.monomials().len(), j.dimension());
            }
        }
    }

    #[test]
    fn third_order_case_small_example() {
        let f = Field::new(2, 4).unwrap();
        let r = verify_surjectivity_case(SurjectivityCase::ThirdOrderOnOpen, params(1, 3, 0, 0, 2), &f, 5, 1).unwrap();
        assert!(r.hypotheses_hold);
        assert!(r.all_surjective);
        assert_eq!(r.standard_point.rank, 10);
        assert_eq!(r.standard_point.jet_dim, 10);
    }

    #[test]
    fn third_order_fails_below_bound() {
        let f = Field::new(2, 4).unwrap();
        let r = verify_surjectivity_case(SurjectivityCase::ThirdOrderOnOpen, params(1, 3, 0, 0, 1), &f, 0, 1).unwrap();
        assert!(!r.hypotheses_hold);
        assert!(!r.standard_point.surjective);
    }

    #[test]
    fn second_order_on_z_stratum_needs_m_one() {
        let f = Field::new(3, 2).unwrap();
        let e = verify_surjectivity_case(SurjectivityCase::SecondOrderOnZStratum, params(2, 6, 0, 0, 1), &f, 1, 0);
        assert!(e.is_err());
    }

    /// Lifts a local jet monomial in the chart `(u0, x_j)` to a global
    /// monomial of bidegree `bd`, or `None` if some exponent is negative.
    fn lift_witness(spec: &BundleSpec, bd: Bidegree, j: usize, local: &[u32]) -> Option<Vec<u32>> {
        let c = Chart { i: 0, j };
        let idx = spec.chart_var_indices(c);
        let mut e = vec![0u32; spec.nvars()];
        for (&v, &a) in idx.iter().zip(local) {
            e[v] = a;
        }
        let partial = spec.degree_of(&e);
        let xj = spec.fiber_index(j);
        let fiber_deg = spec.variable_degree(xj);
        let need_b = bd.beta - partial.beta;
        if need_b < 0 || need_b % fiber_deg.beta != 0 {
            return None;
        }
        let k = need_b / fiber_deg.beta;
        let need_a = bd.alpha - partial.alpha - k * fiber_deg.alpha;
        if need_a < 0 {
            return None;
        }
        e[xj] = k as u32;
        e[0] = need_a as u32;
        Some(e)
    }

    /// At the standard point the local jet of a monomial is the monomial
    /// itself, so surjectivity follows from lifting every jet monomial.
    fn witness_rank(case: SurjectivityCase, p: SurjectivityParams) -> Option<(usize, usize)> {
        let f = Field::new(3, 2).unwrap();
        let spec = p.bundle().unwrap();
        let bd = Bidegree::new(p.delta, p.d as i64);
        let pt = standard_point(case, spec.base_vars());
        let m = restriction_matrix(&spec, &f, bd, &pt, case.jet_order()).unwrap();
        let basis = spec.monomial_basis(bd);
        let mut rows = Vec::new();
        for local in &m.jet_monomials {
            let w = lift_witness(&spec, bd, m.chart.j, local)?;
            assert_eq!(spec.degree_of(&w), bd);
            rows.push(m.rows[basis.iter().position(|b| *b == w).unwrap()].clone());
        }
        Some((rank(&f, &rows), m.jets.dimension()))
    }

    #[test]
    fn explicit_witnesses_under_hypotheses() {
        let cases = [
            (SurjectivityCase::ThirdOrderOnOpen, params(1, 3, 1, 1, 2)),
            (SurjectivityCase::ThirdOrderOnOpen, params(2, 6, 0, 1, 2)),
            (SurjectivityCase::FourthOrderOnOpen, params(1, 3, 1, 1, 3)),
            (SurjectivityCase::SecondOrderOnYStratum, params(1, 3, 1, 1, 4)),
            (SurjectivityCase::SecondOrderOnYStratum, params(2, 6, 0, 2, 4)),
            (SurjectivityCase::SecondOrderOnZStratum, params(1, 3, 0, 1, 4)),
        ];
        for (case, p) in cases {
            assert!(p.hypotheses_hold(case), "{case:?} {p:?}");
            let (r, dim) = witness_rank(case, p).expect("all witnesses lift");
            assert_eq!(r, dim, "{case:?} {p:?}");
        }
    }

    proptest! {
        #[test]
        fn rank_is_invariant_under_standardization(seed in any::<u64>(), lambda in 0i64..2, mu in 0i64..2) {
            let f = Field::new(2, 3).unwrap();
            let spec = BundleSpec::new(1, vec![0, lambda, mu], vec![1, 1, 1]).unwrap();
            let bd = Bidegree::new(3, 2);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut p: Vec<Fe> = (0..5).map(|_| Fe(rng.gen_range(0..8) as u16)).collect();
            p[0] = Fe(rng.gen_range(1..8) as u16);
            p[2] = Fe(rng.gen_range(1..8) as u16);
            let ch = spec.standardize_point(&f, &p, 0).unwrap();
            let img = ch.apply_to_point(&p);
            for k in 1..4 {
                let r1 = restriction_rank(&spec, &f, bd, &p, k).unwrap();
                let r2 = restriction_rank(&spec, &f, bd, &img, k).unwrap();
                prop_assert_eq!(r1, r2);
                let dim = JetSpace { dim: 3, order: k }.dimension();
                prop_assert!(r1 <= dim);
            }
        }
    }
}
