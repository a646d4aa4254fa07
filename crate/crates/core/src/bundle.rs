//! Weighted projective space bundles over projective space.
//!
//! The Cox ring is `k[u_0..u_b, x_0..x_m]` with `deg u_i = (1, 0)` and
//! `deg x_j = (twist_j, weight_j)`. Variables are ordered `u0..ub` followed by
//! the fiber variables.

use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::poly::Poly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "[i64; 2]", into = "[i64; 2]")]
pub struct Bidegree {
    pub alpha: i64,
    pub beta: i64,
}

impl Bidegree {
    pub const fn new(alpha: i64, beta: i64) -> Bidegree {
        Bidegree { alpha, beta }
    }

    pub fn scaled(self, k: i64) -> Bidegree {
        Bidegree::new(self.alpha * k, self.beta * k)
    }
}

impl From<[i64; 2]> for Bidegree {
    fn from(v: [i64; 2]) -> Self {
        Bidegree::new(v[0], v[1])
    }
}

impl From<Bidegree> for [i64; 2] {
    fn from(b: Bidegree) -> Self {
        [b.alpha, b.beta]
    }
}

impl std::ops::Add for Bidegree {
    type Output = Bidegree;
    fn add(self, o: Bidegree) -> Bidegree {
        Bidegree::new(self.alpha + o.alpha, self.beta + o.beta)
    }
}

impl std::ops::Sub for Bidegree {
    type Output = Bidegree;
    fn sub(self, o: Bidegree) -> Bidegree {
        Bidegree::new(self.alpha - o.alpha, self.beta - o.beta)
    }
}

impl std::ops::Neg for Bidegree {
    type Output = Bidegree;
    fn neg(self) -> Bidegree {
        Bidegree::new(-self.alpha, -self.beta)
    }
}

impl fmt::Display for Bidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.alpha, self.beta)
    }
}

/// A divisor class `coeff_f * F + coeff_d * D`, where `F` is the pullback of a
/// hyperplane of the base and `D` has bidegree `(0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DivisorClass {
    pub coeff_f: i64,
    pub coeff_d: i64,
}

impl DivisorClass {
    pub fn bidegree(self) -> Bidegree {
        Bidegree::new(self.coeff_f, self.coeff_d)
    }
}

impl From<Bidegree> for DivisorClass {
    fn from(b: Bidegree) -> Self {
        DivisorClass {
            coeff_f: b.alpha,
            coeff_d: b.beta,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BundleSpec {
    pub base_dim: usize,
    pub twists: Vec<i64>,
    pub weights: Vec<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Chart {
    /// Base variable set to 1.
    pub i: usize,
    /// Fiber variable (of weight 1) set to 1.
    pub j: usize,
}

/// Replacement of every Cox coordinate by a homogeneous polynomial of the
/// same bidegree; together they define an automorphism of the bundle.
#[derive(Clone, Debug)]
pub struct CoordinateChange {
    pub images: Vec<Poly>,
}

impl BundleSpec {
    pub fn new(base_dim: usize, twists: Vec<i64>, weights: Vec<u32>) -> Result<BundleSpec> {
        let s = BundleSpec {
            base_dim,
            twists,
            weights,
            names: None,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_names(mut self, names: &[&str]) -> Result<BundleSpec> {
        self.names = Some(names.iter().map(|s| s.to_string()).collect());
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.twists.is_empty() {
            return Err(Error::InvalidBundle("no fiber variables".into()));
        }
        if self.twists.len() != self.weights.len() {
            return Err(Error::InvalidBundle(format!(
                "{} twists but {} weights",
                self.twists.len(),
                self.weights.len()
            )));
        }
        if self.weights.iter().any(|&a| a == 0) {
            return Err(Error::InvalidBundle("fiber weights must be positive".into()));
        }
        if let Some(n) = &self.names {
            if n.len() != self.twists.len() {
                return Err(Error::InvalidBundle("one name per fiber variable required".into()));
            }
            let mut all = self.base_names();
            all.extend(n.iter().cloned());
            let mut sorted = all.clone();
            sorted.sort();
            sorted.dedup();
            if sorted.len() != all.len() {
                return Err(Error::InvalidBundle("variable names must be distinct".into()));
            }
        }
        Ok(())
    }

    pub fn base_vars(&self) -> usize {
        self.base_dim + 1
    }

    pub fn fiber_vars(&self) -> usize {
        self.twists.len()
    }

    pub fn nvars(&self) -> usize {
        self.base_vars() + self.fiber_vars()
    }

    /// Index of fiber variable `j` in the Cox variable list.
    pub fn fiber_index(&self, j: usize) -> usize {
        self.base_vars() + j
    }

    fn base_names(&self) -> Vec<String> {
        (0..self.base_vars()).map(|i| format!("u{i}")).collect()
    }

    pub fn fiber_names(&self) -> Vec<String> {
        if let Some(n) = &self.names {
            return n.clone();
        }
        let m = self.fiber_vars();
        if m <= 4 {
            ["x", "y", "z", "w"][..m].iter().map(|s| s.to_string()).collect()
        } else {
            (0..m).map(|j| format!("x{j}")).collect()
        }
    }

    pub fn fiber_position(&self, name: &str) -> Option<usize> {
        self.fiber_names().iter().position(|n| n == name)
    }

    pub fn var_names(&self) -> Arc<Vec<String>> {
        let mut v = self.base_names();
        v.extend(self.fiber_names());
        Arc::new(v)
    }

    pub fn variable_degree(&self, var: usize) -> Bidegree {
        if var < self.base_vars() {
            Bidegree::new(1, 0)
        } else {
            let j = var - self.base_vars();
            Bidegree::new(self.twists[j], self.weights[j] as i64)
        }
    }

    pub fn degree_of(&self, exps: &[u32]) -> Bidegree {
        let b = self.base_vars();
        let mut alpha: i64 = exps[..b].iter().map(|&e| e as i64).sum();
        let mut beta = 0i64;
        for (j, &e) in exps[b..].iter().enumerate() {
            alpha += self.twists[j] * e as i64;
            beta += self.weights[j] as i64 * e as i64;
        }
        Bidegree::new(alpha, beta)
    }

    /// Zero polynomial in this Cox ring.
    pub fn zero_poly(&self, field: &Field) -> Poly {
        Poly::zero(field, self.var_names())
    }

    pub fn var(&self, field: &Field, var: usize) -> Poly {
        Poly::var(field, self.var_names(), var)
    }

    pub fn parse_poly(&self, field: &Field, text: &str) -> Result<Poly> {
        Poly::parse(text, field, self.var_names())
    }

    fn check_vars(&self, f: &Poly) -> Result<()> {
        if f.vars().as_slice() != self.var_names().as_slice() {
            return Err(Error::VariableMismatch(format!(
                "polynomial variables {:?} do not match bundle variables {:?}",
                f.vars(),
                self.var_names()
            )));
        }
        Ok(())
    }

    /// Bidegree of a homogeneous polynomial; `None` for zero.
    pub fn bidegree_of(&self, f: &Poly) -> Result<Option<Bidegree>> {
        self.check_vars(f)?;
        let mut found: Option<Bidegree> = None;
        for (e, _) in f.terms() {
            let d = self.degree_of(e);
            match found {
                None => found = Some(d),
                Some(prev) if prev != d => {
                    return Err(Error::NotHomogeneous(format!("terms of bidegree {prev} and {d}")))
                }
                _ => {}
            }
        }
        Ok(found)
    }

    /// All monomials of the given bidegree, sorted lexicographically by the
    /// exponent vector `(u exponents, fiber exponents)`.
    pub fn monomial_basis(&self, bd: Bidegree) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        if bd.beta < 0 {
            return out;
        }
        let b = self.base_vars();
        let mut fiber = vec![0u32; self.fiber_vars()];
        let mut fibers = Vec::new();
        fiber_partitions(&self.weights, 0, bd.beta as u64, &mut fiber, &mut fibers);
        for fe in fibers {
            let twist: i64 = fe
                .iter()
                .zip(&self.twists)
                .map(|(&e, &t)| e as i64 * t)
                .sum();
            let rest = bd.alpha - twist;
            if rest < 0 {
                continue;
            }
            let mut u = vec![0u32; b];
            let mut us = Vec::new();
            compositions(b, 0, rest as u32, &mut u, &mut us);
            for ue in us {
                let mut e = ue;
                e.extend_from_slice(&fe);
                out.push(e);
            }
        }
        out.sort();
        out
    }

    /// Uniformly random element of the graded piece.
    pub fn random_form<R: Rng>(&self, field: &Field, bd: Bidegree, rng: &mut R) -> Poly {
        let mut p = self.zero_poly(field);
        for e in self.monomial_basis(bd) {
            let c = Fe(rng.gen_range(0..field.order()) as u16);
            p.add_term(e, c);
        }
        p
    }

    pub fn chart(&self, i: usize, j: usize) -> Result<Chart> {
        if i >= self.base_vars() {
            return Err(Error::InvalidChart {
                i,
                j,
                reason: format!("base has only {} coordinates", self.base_vars()),
            });
        }
        if j >= self.fiber_vars() {
            return Err(Error::InvalidChart {
                i,
                j,
                reason: format!("fiber has only {} coordinates", self.fiber_vars()),
            });
        }
        if self.weights[j] != 1 {
            return Err(Error::InvalidChart {
                i,
                j,
                reason: format!("fiber variable has weight {}", self.weights[j]),
            });
        }
        Ok(Chart { i, j })
    }

    /// All charts `U_{i,j}` with `weight_j = 1`, ordered by `(j, i)`.
    pub fn charts(&self) -> Vec<Chart> {
        let mut out = Vec::new();
        for j in 0..self.fiber_vars() {
            if self.weights[j] == 1 {
                for i in 0..self.base_vars() {
                    out.push(Chart { i, j });
                }
            }
        }
        out
    }

    /// Variables surviving in a chart, in Cox order.
    pub fn chart_var_indices(&self, c: Chart) -> Vec<usize> {
        let skip_fiber = self.fiber_index(c.j);
        (0..self.nvars()).filter(|&v| v != c.i && v != skip_fiber).collect()
    }

    pub fn chart_var_names(&self, c: Chart) -> Arc<Vec<String>> {
        let names = self.var_names();
        Arc::new(self.chart_var_indices(c).iter().map(|&v| names[v].clone()).collect())
    }

    /// Restriction of a Cox polynomial to the chart: `u_i = x_j = 1`.
    pub fn dehomogenize(&self, f: &Poly, c: Chart) -> Result<Poly> {
        self.check_vars(f)?;
        self.chart(c.i, c.j)?;
        let mut vals = vec![None; self.nvars()];
        vals[c.i] = Some(Fe::ONE);
        vals[self.fiber_index(c.j)] = Some(Fe::ONE);
        Ok(f.specialize(&vals))
    }

    /// The Cox lift of a chart point, with `u_i = x_j = 1`.
    pub fn lift_chart_point(&self, c: Chart, coords: &[Fe]) -> Vec<Fe> {
        let idx = self.chart_var_indices(c);
        assert_eq!(idx.len(), coords.len());
        let mut full = vec![Fe::ZERO; self.nvars()];
        full[c.i] = Fe::ONE;
        full[self.fiber_index(c.j)] = Fe::ONE;
        for (&v, &a) in idx.iter().zip(coords) {
            full[v] = a;
        }
        full
    }

    /// Applies the torus element `(s, t)` to a Cox point.
    pub fn act(&self, field: &Field, s: Fe, t: Fe, p: &[Fe]) -> Vec<Fe> {
        let b = self.base_vars();
        let mut out = p.to_vec();
        for v in out.iter_mut().take(b) {
            *v = field.mul(*v, s);
        }
        for j in 0..self.fiber_vars() {
            let factor = field.mul(
                field.pow(s, self.twists[j]),
                field.pow(t, self.weights[j] as i64),
            );
            out[b + j] = field.mul(out[b + j], factor);
        }
        out
    }

    pub fn check_point(&self, p: &[Fe]) -> Result<()> {
        if p.len() != self.nvars() {
            return Err(Error::InvalidPoint(format!(
                "expected {} coordinates, got {}",
                self.nvars(),
                p.len()
            )));
        }
        let b = self.base_vars();
        if p[..b].iter().all(|a| a.is_zero()) {
            return Err(Error::InvalidPoint("base coordinates all vanish".into()));
        }
        if p[b..].iter().all(|a| a.is_zero()) {
            return Err(Error::InvalidPoint("fiber coordinates all vanish".into()));
        }
        Ok(())
    }

    /// Affine coordinates of a Cox point in a chart, if it lies there.
    pub fn chart_coords(&self, field: &Field, p: &[Fe], c: Chart) -> Option<Vec<Fe>> {
        let xj = p[self.fiber_index(c.j)];
        if p[c.i].is_zero() || xj.is_zero() {
            return None;
        }
        let s = field.inv(p[c.i]).unwrap();
        let sx = field.mul(field.pow(s, self.twists[c.j]), xj);
        let t = field.inv(sx).unwrap();
        let q = self.act(field, s, t, p);
        debug_assert_eq!(q[c.i], Fe::ONE);
        debug_assert_eq!(q[self.fiber_index(c.j)], Fe::ONE);
        Some(self.chart_var_indices(c).iter().map(|&v| q[v]).collect())
    }

    /// First chart (in `charts()` order) containing the point.
    pub fn chart_containing(&self, p: &[Fe]) -> Option<Chart> {
        self.charts()
            .into_iter()
            .find(|c| !p[c.i].is_zero() && !p[self.fiber_index(c.j)].is_zero())
    }

    /// Normal form of a point under the torus: first nonzero base coordinate
    /// set to 1, then the fiber part normalized as far as the weights allow.
    pub fn normalize_point(&self, field: &Field, p: &[Fe]) -> Result<Vec<Fe>> {
        self.check_point(p)?;
        let b = self.base_vars();
        let first_u = (0..b).find(|&i| !p[i].is_zero()).unwrap();
        let s = field.inv(p[first_u]).unwrap();
        let q = self.act(field, s, Fe::ONE, p);
        // smallest t (in code order) making the first nonzero fiber
        // coordinate 1 if possible, otherwise the lexicographically least
        // representative of the fiber orbit
        let mut best: Option<Vec<Fe>> = None;
        for t in field.elements().skip(1) {
            let r = self.act(field, Fe::ONE, t, &q);
            if best.as_ref().map_or(true, |bst| r[b..] < bst[b..]) {
                best = Some(r);
            }
        }
        Ok(best.unwrap())
    }

    /// Whether two Cox points define the same point of the bundle.
    pub fn same_point(&self, field: &Field, p: &[Fe], q: &[Fe]) -> Result<bool> {
        Ok(self.normalize_point(field, p)? == self.normalize_point(field, q)?)
    }

    /// Coordinate change moving a point with `u_0 != 0` and `x_j != 0`
    /// (`weight_j = 1`) so that every fiber coordinate `x_l` with
    /// `twist_l >= weight_l * twist_j` vanishes at the image.
    pub fn move_point_to_standard(&self, field: &Field, p: &[Fe], j: usize) -> Result<CoordinateChange> {
        self.check_point(p)?;
        if j >= self.fiber_vars() || self.weights[j] != 1 {
            return Err(Error::InvalidArgument(format!(
                "fiber variable {j} must exist and have weight 1"
            )));
        }
        let b = self.base_vars();
        let a0 = p[0];
        let bj = p[b + j];
        if a0.is_zero() || bj.is_zero() {
            return Err(Error::InvalidPoint(
                "point needs u0 != 0 and a nonzero weight-one fiber coordinate".into(),
            ));
        }
        let names = self.var_names();
        let mut images: Vec<Poly> = (0..self.nvars()).map(|v| self.var(field, v)).collect();
        for l in 0..self.fiber_vars() {
            if l == j {
                continue;
            }
            let al = self.weights[l] as i64;
            let e = self.twists[l] - al * self.twists[j];
            if e < 0 {
                continue;
            }
            let scale = field.mul(field.pow(a0, e), field.pow(bj, al));
            let mut shift = vec![0u32; self.nvars()];
            shift[0] = e as u32;
            shift[b + j] = al as u32;
            let correction = Poly::monomial(field, names.clone(), shift, field.neg(p[b + l]));
            images[b + l] = self.var(field, b + l).scale(scale).add(&correction);
        }
        Ok(CoordinateChange { images })
    }

    /// Linear change of base coordinates sending the base part of `p` to
    /// `(1:0:...:0)` up to scaling, composed with `move_point_to_standard`.
    pub fn standardize_point(&self, field: &Field, p: &[Fe], j: usize) -> Result<CoordinateChange> {
        self.check_point(p)?;
        let b = self.base_vars();
        let first = (0..b).find(|&i| !p[i].is_zero()).unwrap();
        let mut images: Vec<Poly> = (0..self.nvars()).map(|v| self.var(field, v)).collect();
        images.swap(0, first);
        let mut perm = p.to_vec();
        perm.swap(0, first);
        let inv0 = field.inv(perm[0]).unwrap();
        for k in 1..b {
            if perm[k].is_zero() {
                continue;
            }
            let c = field.neg(field.mul(perm[k], inv0));
            images[k] = images[k].add(&images[0].scale(c));
        }
        let base = CoordinateChange { images };
        let moved = base.apply_to_point(p);
        let fiber = self.move_point_to_standard(field, &moved, j)?;
        Ok(base.then(&fiber))
    }

    /// Canonical bidegree of the bundle.
    pub fn canonical_bidegree(&self) -> Bidegree {
        let t: i64 = self.twists.iter().sum();
        let a: i64 = self.weights.iter().map(|&w| w as i64).sum();
        Bidegree::new(-(self.base_dim as i64 + 1) - t, -a)
    }

    /// Canonical bidegree of a quasi-smooth hypersurface of bidegree `bd`.
    pub fn adjunction_bidegree(&self, bd: Bidegree) -> Bidegree {
        self.canonical_bidegree() + bd
    }

    /// Generators `F` and `twist_l F + weight_l D` of the nef cone, where `l`
    /// maximizes `twist/weight` (ties: smallest weight, then first index).
    pub fn nef_generators(&self) -> (DivisorClass, DivisorClass) {
        let mut best = 0usize;
        for l in 1..self.fiber_vars() {
            let r = Ratio::new(self.twists[l], self.weights[l] as i64);
            let rb = Ratio::new(self.twists[best], self.weights[best] as i64);
            if r > rb || (r == rb && self.weights[l] < self.weights[best]) {
                best = l;
            }
        }
        (
            DivisorClass { coeff_f: 1, coeff_d: 0 },
            DivisorClass {
                coeff_f: self.twists[best],
                coeff_d: self.weights[best] as i64,
            },
        )
    }

    /// Largest slope `twist/weight`.
    pub fn max_slope(&self) -> Ratio<i64> {
        let (_, g) = self.nef_generators();
        Ratio::new(g.coeff_f, g.coeff_d)
    }

    /// Class of the divisor `(x_j = 0)`.
    pub fn fiber_divisor_class(&self, j: usize) -> DivisorClass {
        DivisorClass {
            coeff_f: self.twists[j],
            coeff_d: self.weights[j] as i64,
        }
    }
}

impl CoordinateChange {
    pub fn apply_to_point(&self, p: &[Fe]) -> Vec<Fe> {
        self.images.iter().map(|f| f.eval(p)).collect()
    }

    /// `f` composed with the change.
    pub fn apply_to_poly(&self, f: &Poly) -> Poly {
        f.substitute(&self.images)
    }

    /// First `self`, then `other` (as point maps).
    pub fn then(&self, other: &CoordinateChange) -> CoordinateChange {
        CoordinateChange {
            images: other.images.iter().map(|g| g.substitute(&self.images)).collect(),
        }
    }
}

fn fiber_partitions(weights: &[u32], j: usize, rest: u64, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if j == weights.len() {
        if rest == 0 {
            out.push(cur.clone());
        }
        return;
    }
    let w = weights[j] as u64;
    let mut e = 0u64;
    while e * w <= rest {
        cur[j] = e as u32;
        fiber_partitions(weights, j + 1, rest - e * w, cur, out);
        e += 1;
    }
    cur[j] = 0;
}

fn compositions(n: usize, i: usize, rest: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if i + 1 == n {
        cur[i] = rest;
        out.push(cur.clone());
        cur[i] = 0;
        return;
    }
    for e in 0..=rest {
        cur[i] = e;
        compositions(n, i + 1, rest - e, cur, out);
    }
    cur[i] = 0;
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Independent enumerator: odometer over a box of exponents, solving for
    /// the last base exponent.
    pub(crate) fn brute_force_count(spec: &BundleSpec, bd: Bidegree) -> usize {
        if bd.beta < 0 {
            return 0;
        }
        let b = spec.base_vars();
        let m = spec.fiber_vars();
        let fiber_bounds: Vec<u32> = spec.weights.iter().map(|&w| bd.beta as u32 / w).collect();
        let mut count = 0;
        let mut fe = vec![0u32; m];
        loop {
            let beta: i64 = fe.iter().zip(&spec.weights).map(|(&e, &w)| e as i64 * w as i64).sum();
            if beta == bd.beta {
                let tw: i64 = fe.iter().zip(&spec.twists).map(|(&e, &t)| e as i64 * t).sum();
                let r = bd.alpha - tw;
                if r >= 0 {
                    let mut ue = vec![0u32; b - 1];
                    loop {
                        let s: i64 = ue.iter().map(|&e| e as i64).sum();
                        if s <= r {
                            count += 1;
                        }
                        let mut k = 0;
                        loop {
                            if k == ue.len() {
                                break;
                            }
                            ue[k] += 1;
                            if ue[k] as i64 <= r {
                                break;
                            }
                            ue[k] = 0;
                            k += 1;
                        }
                        if k == ue.len() {
                            break;
                        }
                    }
                }
            }
            let mut k = 0;
            loop {
                if k == m {
                    break;
                }
                fe[k] += 1;
                if fe[k] <= fiber_bounds[k] {
                    break;
                }
                fe[k] = 0;
                k += 1;
            }
            if k == m {
                break;
            }
        }
        count
    }

    #[test]
    fn basis_of_weighted_fiber() {
        let s = BundleSpec::new(1, vec![0, 0, 0, 0], vec![1, 1, 2, 3]).unwrap();
        let basis = s.monomial_basis(Bidegree::new(0, 6));
        // solutions of j + k + 2l + 3m = 6
        assert_eq!(basis.len(), 23);
        assert!(basis.iter().all(|e| e[0] == 0 && e[1] == 0));
        assert!(basis.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn negative_fiber_degree_is_empty() {
        let s = BundleSpec::new(1, vec![0, 1], vec![1, 1]).unwrap();
        assert!(s.monomial_basis(Bidegree::new(3, -1)).is_empty());
    }

    #[test]
    fn dehomogenize_example() {
        let f = Field::new(2, 1).unwrap();
        let s = BundleSpec::new(1, vec![0, 1], vec![1, 1]).unwrap();
        let p = s.parse_poly(&f, "u0*x + u1*y").unwrap();
        let d = s.dehomogenize(&p, s.chart(0, 0).unwrap()).unwrap();
        assert_eq!(d.to_string(), "1*u1*y + 1");
        assert!(s.chart(0, 1).is_ok());
        let w = BundleSpec::new(1, vec![0, 0], vec![1, 2]).unwrap();
        assert!(matches!(w.chart(0, 1), Err(Error::InvalidChart { .. })));
    }

    #[test]
    fn canonical_of_product() {
        // P^1 x P^2
        let s = BundleSpec::new(1, vec![0, 0, 0], vec![1, 1, 1]).unwrap();
        assert_eq!(s.canonical_bidegree(), Bidegree::new(-2, -3));
    }

    #[test]
    fn nef_cone_examples() {
        let s = BundleSpec::new(1, vec![0, 0, 0, 0], vec![1, 1, 1, 1]).unwrap();
        assert_eq!(s.nef_generators().1, DivisorClass { coeff_f: 0, coeff_d: 1 });
        let dp1 = BundleSpec::new(1, vec![0, 3, 4, 6], vec![1, 1, 2, 3]).unwrap();
        assert_eq!(dp1.nef_generators().1, DivisorClass { coeff_f: 3, coeff_d: 1 });
        let tie = BundleSpec::new(1, vec![0, 0, 0, 0], vec![1, 1, 2, 3]).unwrap();
        assert_eq!(tie.nef_generators().1, DivisorClass { coeff_f: 0, coeff_d: 1 });
    }

    #[test]
    fn bidegree_detects_inhomogeneity() {
        let f = Field::new(3, 1).unwrap();
        let s = BundleSpec::new(1, vec![0, 1], vec![1, 1]).unwrap();
        let g = s.parse_poly(&f, "u0*y + u0^2*x").unwrap();
        assert_eq!(s.bidegree_of(&g).unwrap(), Some(Bidegree::new(2, 1)));
        let h = s.parse_poly(&f, "u0*y + x").unwrap();
        assert!(matches!(s.bidegree_of(&h), Err(Error::NotHomogeneous(_))));
    }

    fn arb_spec() -> impl Strategy<Value = BundleSpec> {
        (0usize..3, prop::collection::vec((-2i64..3, 1u32..4), 1..4)).prop_map(|(b, fs)| {
            let (t, w): (Vec<i64>, Vec<u32>) = fs.into_iter().unzip();
            BundleSpec::new(b, t, w).unwrap()
        })
    }

    proptest! {
        #[test]
        fn basis_matches_brute_force(spec in arb_spec(), a in -4i64..9, b in 0i64..7) {
            let bd = Bidegree::new(a, b);
            let basis = spec.monomial_basis(bd);
            prop_assert_eq!(basis.len(), brute_force_count(&spec, bd));
            for e in &basis {
                prop_assert_eq!(spec.degree_of(e), bd);
            }
            let mut sorted = basis.clone();
            sorted.dedup();
            prop_assert_eq!(sorted.len(), basis.len());
        }

        #[test]
        fn dehomogenize_commutes_with_evaluation(
            spec in arb_spec().prop_filter("needs a weight-one fiber variable", |s| s.weights.contains(&1)),
            a in 0i64..6, b in 0i64..4, seed in any::<u64>()
        ) {
            let field = Field::new(3, 2).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let bd = Bidegree::new(a, b);
            let f = spec.random_form(&field, bd, &mut rng);
            for c in spec.charts() {
                let g = spec.dehomogenize(&f, c).unwrap();
                let p: Vec<Fe> = (0..spec.nvars()).map(|_| Fe(rng.gen_range(1..9) as u16)).collect();
                let q = spec.chart_coords(&field, &p, c).unwrap();
                // f(p) = s^{-alpha} t^{-beta} f(normalized p)
                let s = field.inv(p[c.i]).unwrap();
                let t = field.inv(field.mul(field.pow(s, spec.twists[c.j]), p[spec.fiber_index(c.j)])).unwrap();
                let lhs = f.eval(&p);
                let scale = field.mul(field.pow(s, -bd.alpha), field.pow(t, -bd.beta));
                prop_assert_eq!(lhs, field.mul(scale, g.eval(&q)));
                prop_assert_eq!(spec.lift_chart_point(c, &q).len(), spec.nvars());
            }
        }

        #[test]
        fn move_to_standard_properties(
            seed in any::<u64>(), a in 0i64..6, b in 0i64..4,
            twists in prop::collection::vec(0i64..3, 3)
        ) {
            let field = Field::new(2, 3).unwrap();
            let spec = BundleSpec::new(1, twists, vec![1, 1, 2]).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut p: Vec<Fe> = (0..spec.nvars()).map(|_| Fe(rng.gen_range(0..8) as u16)).collect();
            p[0] = Fe(rng.gen_range(1..8) as u16);
            p[2] = Fe(rng.gen_range(1..8) as u16);
            let ch = spec.move_point_to_standard(&field, &p, 0).unwrap();
            let img = ch.apply_to_point(&p);
            for l in 1..spec.fiber_vars() {
                if spec.twists[l] >= spec.weights[l] as i64 * spec.twists[0] {
                    prop_assert!(img[spec.fiber_index(l)].is_zero());
                }
            }
            let bd = Bidegree::new(a, b);
            let f = spec.random_form(&field, bd, &mut rng);
            let g = ch.apply_to_poly(&f);
            let d = spec.bidegree_of(&g).unwrap();
            prop_assert!(d.is_none() || d == Some(bd));
        }
    }
}
