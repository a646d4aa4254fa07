//! Sparse multivariate polynomials over a finite field.
//!
//! Text form: terms joined by `+`, each term `coeff*v1^e1*v2*...`. A bare
//! coefficient or a bare product of variables is also accepted; a leading `-`
//! negates a term. Coefficients are integers (reduced mod p), `g`, `g^e` or
//! `[c0,...]` literals.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{Embedding, Fe, Field};

#[derive(Clone)]
pub struct Poly {
    field: Field,
    vars: Arc<Vec<String>>,
    terms: BTreeMap<Vec<u32>, Fe>,
}

impl PartialEq for Poly {
    fn eq(&self, other: &Self) -> bool {
        self.field == other.field && self.vars == other.vars && self.terms == other.terms
    }
}

impl Eq for Poly {}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly[{}]({})", self.vars.join(","), self)
    }
}

/// `binom(n, k) mod p` by Lucas' theorem.
pub fn binom_mod(mut n: u64, mut k: u64, p: u64) -> u64 {
    let mut out = 1u64;
    while n > 0 || k > 0 {
        let (a, b) = (n % p, k % p);
        if b > a {
            return 0;
        }
        // small binomial, a < p <= 3
        let mut c = 1u64;
        for i in 0..b {
            c = c * (a - i) / (i + 1);
        }
        out = out * c % p;
        n /= p;
        k /= p;
    }
    out
}

impl Poly {
    pub fn zero(field: &Field, vars: Arc<Vec<String>>) -> Poly {
        Poly {
            field: field.clone(),
            vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn with_var_names(field: &Field, names: &[&str]) -> Poly {
        Poly::zero(field, Arc::new(names.iter().map(|s| s.to_string()).collect()))
    }

    pub fn constant(field: &Field, vars: Arc<Vec<String>>, c: Fe) -> Poly {
        let n = vars.len();
        let mut p = Poly::zero(field, vars);
        p.add_term(vec![0; n], c);
        p
    }

    pub fn one_like(&self) -> Poly {
        Poly::constant(&self.field, self.vars.clone(), Fe::ONE)
    }

    pub fn zero_like(&self) -> Poly {
        Poly::zero(&self.field, self.vars.clone())
    }

    pub fn var(field: &Field, vars: Arc<Vec<String>>, i: usize) -> Poly {
        let mut e = vec![0; vars.len()];
        e[i] = 1;
        Poly::monomial(field, vars, e, Fe::ONE)
    }

    pub fn monomial(field: &Field, vars: Arc<Vec<String>>, exps: Vec<u32>, c: Fe) -> Poly {
        assert_eq!(exps.len(), vars.len());
        let mut p = Poly::zero(field, vars);
        p.add_term(exps, c);
        p
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn vars(&self) -> &Arc<Vec<String>> {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Vec<u32>, Fe)> {
        self.terms.iter().map(|(e, &c)| (e, c))
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, exps: &[u32]) -> Fe {
        self.terms.get(exps).copied().unwrap_or(Fe::ZERO)
    }

    /// Adds `c * x^exps` in place.
    pub fn add_term(&mut self, exps: Vec<u32>, c: Fe) {
        if c.is_zero() {
            return;
        }
        let f = &self.field;
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = f.add(*o.get(), c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    fn check_compatible(&self, other: &Poly) {
        assert!(self.field == other.field, "polynomials over different fields");
        assert!(
            self.vars == other.vars,
            "polynomials in different variables: {:?} vs {:?}",
            self.vars,
            other.vars
        );
    }

    pub fn add(&self, other: &Poly) -> Poly {
        self.check_compatible(other);
        let mut out = self.clone();
        for (e, c) in other.terms() {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn neg(&self) -> Poly {
        let mut out = self.zero_like();
        for (e, c) in self.terms() {
            out.terms.insert(e.clone(), self.field.neg(c));
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: Fe) -> Poly {
        let mut out = self.zero_like();
        if c.is_zero() {
            return out;
        }
        for (e, a) in self.terms() {
            out.terms.insert(e.clone(), self.field.mul(a, c));
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        self.check_compatible(other);
        let mut out = self.zero_like();
        for (e1, c1) in self.terms() {
            for (e2, c2) in other.terms() {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, self.field.mul(c1, c2));
            }
        }
        out
    }

    pub fn pow(&self, mut e: u32) -> Poly {
        let mut base = self.clone();
        let mut acc = self.one_like();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn eval(&self, point: &[Fe]) -> Fe {
        assert_eq!(point.len(), self.nvars());
        let f = &self.field;
        let mut acc = Fe::ZERO;
        for (e, c) in self.terms() {
            let mut t = c;
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = f.mul(t, f.pow(point[i], k as i64));
                }
            }
            acc = f.add(acc, t);
        }
        acc
    }

    /// Total degree, `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    /// Lowest total degree of a term, `None` for the zero polynomial.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).min()
    }

    pub fn degree_in(&self, var: usize) -> Option<u32> {
        self.terms.keys().map(|e| e[var]).max()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.iter().all(|&k| k == 0))
    }

    /// Constant term.
    pub fn constant_term(&self) -> Fe {
        self.coeff(&vec![0; self.nvars()])
    }

    pub fn partial(&self, var: usize) -> Poly {
        let f = &self.field;
        let mut out = self.zero_like();
        for (e, c) in self.terms() {
            let k = e[var];
            if k == 0 {
                continue;
            }
            let m = f.from_int(k as i64);
            if m.is_zero() {
                continue;
            }
            let mut e2 = e.clone();
            e2[var] -= 1;
            out.add_term(e2, f.mul(c, m));
        }
        out
    }

    /// Removes every term whose exponents are all divisible by the
    /// characteristic. Such terms are p-th powers over a perfect field.
    pub fn strip_pth_powers(&self) -> Poly {
        let p = self.field.characteristic();
        let mut out = self.zero_like();
        for (e, c) in self.terms() {
            if !e.iter().all(|&k| k % p == 0) {
                out.terms.insert(e.clone(), c);
            }
        }
        out
    }

    /// Terms of total degree exactly `d`.
    pub fn homogeneous_part(&self, d: u32) -> Poly {
        let mut out = self.zero_like();
        for (e, c) in self.terms() {
            if e.iter().sum::<u32>() == d {
                out.terms.insert(e.clone(), c);
            }
        }
        out
    }

    /// Terms of total degree at most `d`.
    pub fn truncate(&self, d: u32) -> Poly {
        let mut out = self.zero_like();
        for (e, c) in self.terms() {
            if e.iter().sum::<u32>() <= d {
                out.terms.insert(e.clone(), c);
            }
        }
        out
    }

    /// `f(x + point)`, optionally dropping all terms of total degree above
    /// `max_deg`.
    pub fn translate(&self, point: &[Fe], max_deg: Option<u32>) -> Poly {
        assert_eq!(point.len(), self.nvars());
        let f = &self.field;
        let p = f.characteristic() as u64;
        let n = self.nvars();
        let cap = max_deg.unwrap_or(u32::MAX);
        let mut out = self.zero_like();
        for (e, c) in self.terms() {
            // expansion of prod_i (x_i + a_i)^{e_i}: list of (exps, coeff)
            let mut partial: Vec<(Vec<u32>, u32, Fe)> = vec![(vec![0; n], 0, c)];
            for i in 0..n {
                let k = e[i];
                if k == 0 {
                    continue;
                }
                let a = point[i];
                let mut uni: Vec<(u32, Fe)> = Vec::new();
                for t in 0..=k.min(cap) {
                    let b = binom_mod(k as u64, t as u64, p);
                    if b == 0 {
                        continue;
                    }
                    let r = k - t;
                    let coef = if r == 0 { Fe::ONE } else { f.pow(a, r as i64) };
                    if coef.is_zero() {
                        continue;
                    }
                    uni.push((t, f.mul(f.from_int(b as i64), coef)));
                }
                let mut next = Vec::with_capacity(partial.len() * uni.len());
                for (pe, pd, pc) in &partial {
                    for &(t, uc) in &uni {
                        if pd + t > cap {
                            continue;
                        }
                        let mut ne = pe.clone();
                        ne[i] = t;
                        next.push((ne, pd + t, f.mul(*pc, uc)));
                    }
                }
                partial = next;
                if partial.is_empty() {
                    break;
                }
            }
            for (pe, _, pc) in partial {
                out.add_term(pe, pc);
            }
        }
        out
    }

    /// Substitutes `subs[i]` for variable `i`. All substitutes must share one
    /// variable list, which becomes the variable list of the result.
    pub fn substitute(&self, subs: &[Poly]) -> Poly {
        assert_eq!(subs.len(), self.nvars());
        let target = &subs[0];
        let mut out = target.zero_like();
        let mut powers: Vec<Vec<Poly>> = subs.iter().map(|s| vec![s.one_like(), s.clone()]).collect();
        for (e, c) in self.terms() {
            let mut t = target.one_like().scale(c);
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                while powers[i].len() <= k as usize {
                    let next = powers[i].last().unwrap().mul(&subs[i]);
                    powers[i].push(next);
                }
                t = t.mul(&powers[i][k as usize]);
            }
            out = out.add(&t);
        }
        out
    }

    /// Sets some variables to constants and drops them from the variable
    /// list. `values[i] = Some(c)` fixes variable `i`.
    pub fn specialize(&self, values: &[Option<Fe>]) -> Poly {
        assert_eq!(values.len(), self.nvars());
        let f = &self.field;
        let keep: Vec<usize> = (0..self.nvars()).filter(|&i| values[i].is_none()).collect();
        let names: Vec<String> = keep.iter().map(|&i| self.vars[i].clone()).collect();
        let mut out = Poly::zero(f, Arc::new(names));
        for (e, c) in self.terms() {
            let mut t = c;
            for (i, v) in values.iter().enumerate() {
                if let Some(a) = v {
                    if e[i] > 0 {
                        t = f.mul(t, f.pow(*a, e[i] as i64));
                    }
                }
            }
            let ne: Vec<u32> = keep.iter().map(|&i| e[i]).collect();
            out.add_term(ne, t);
        }
        out
    }

    /// Same polynomial with variables renamed; the count must match.
    pub fn rename(&self, vars: Arc<Vec<String>>) -> Poly {
        assert_eq!(vars.len(), self.nvars());
        Poly {
            field: self.field.clone(),
            vars,
            terms: self.terms.clone(),
        }
    }

    /// Re-expresses the polynomial in a larger variable list; `map[i]` is the
    /// new index of old variable `i`.
    pub fn extend_vars(&self, vars: Arc<Vec<String>>, map: &[usize]) -> Poly {
        assert_eq!(map.len(), self.nvars());
        let n = vars.len();
        let mut out = Poly::zero(&self.field, vars);
        for (e, c) in self.terms() {
            let mut ne = vec![0; n];
            for (i, &k) in e.iter().enumerate() {
                ne[map[i]] += k;
            }
            out.add_term(ne, c);
        }
        out
    }

    pub fn embed(&self, emb: &Embedding) -> Poly {
        assert!(emb.source == self.field);
        let mut out = Poly::zero(&emb.target, self.vars.clone());
        for (e, c) in self.terms() {
            out.terms.insert(e.clone(), emb.apply(c));
        }
        out
    }

    /// Keeps only the terms selected by `keep`.
    pub fn filter_terms(&self, keep: impl Fn(&[u32]) -> bool) -> Poly {
        let mut out = self.zero_like();
        for (e, c) in self.terms() {
            if keep(e) {
                out.terms.insert(e.clone(), c);
            }
        }
        out
    }

    pub fn parse(text: &str, field: &Field, vars: Arc<Vec<String>>) -> Result<Poly> {
        let mut out = Poly::zero(field, vars);
        let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if cleaned.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        // split into signed terms; '-' directly after '^' is not allowed
        let mut pieces: Vec<(bool, String)> = Vec::new();
        let mut cur = String::new();
        let mut negative = false;
        let mut pending_op = false;
        for ch in cleaned.chars() {
            match ch {
                '+' | '-' => {
                    if cur.is_empty() {
                        if ch == '+' || pending_op {
                            return Err(Error::Parse(format!("empty term in `{text}`")));
                        }
                        negative = !negative;
                    } else {
                        pieces.push((negative, std::mem::take(&mut cur)));
                        negative = ch == '-';
                    }
                    pending_op = true;
                }
                _ => {
                    cur.push(ch);
                    pending_op = false;
                }
            }
        }
        pieces.push((negative, cur));
        for (neg, piece) in pieces {
            if piece.is_empty() {
                return Err(Error::Parse(format!("empty term in `{text}`")));
            }
            let (exps, c) = out.parse_term(&piece)?;
            let c = if neg { field.neg(c) } else { c };
            out.add_term(exps, c);
        }
        Ok(out)
    }

    fn parse_term(&self, term: &str) -> Result<(Vec<u32>, Fe)> {
        let f = &self.field;
        let mut exps = vec![0u32; self.nvars()];
        let mut coeff = Fe::ONE;
        for factor in term.split('*') {
            if factor.is_empty() {
                return Err(Error::Parse(format!("empty factor in `{term}`")));
            }
            let (base, power) = match factor.split_once('^') {
                Some((b, e)) => (b, Some(e)),
                None => (factor, None),
            };
            if let Some(i) = self.var_index(base) {
                let k = match power {
                    Some(e) => e
                        .parse::<u32>()
                        .map_err(|_| Error::Parse(format!("exponent in `{factor}`")))?,
                    None => 1,
                };
                exps[i] += k;
            } else {
                let c = f.parse_coeff(factor).map_err(|_| {
                    Error::Parse(format!(
                        "`{factor}` is neither a coefficient nor one of the variables {:?}",
                        self.vars
                    ))
                })?;
                coeff = f.mul(coeff, c);
            }
        }
        Ok((exps, coeff))
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(out, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(out, " + ")?;
            }
            first = false;
            write!(out, "{}", self.field.format_coeff(*c))?;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(out, "*{}", self.vars[i])?,
                    _ => write!(out, "*{}^{}", self.vars[i], k)?,
                }
            }
        }
        Ok(())
    }
}

/// Precompiled evaluator for fast repeated evaluation via discrete logs.
#[derive(Clone)]
pub struct Evaluator {
    field: Field,
    order: u64,
    terms: Vec<(u64, Vec<(usize, u64)>)>,
}

impl Evaluator {
    pub fn new(p: &Poly) -> Evaluator {
        let field = p.field().clone();
        let terms = p
            .terms()
            .map(|(e, c)| {
                let lc = field.log(c).unwrap() as u64;
                let vs: Vec<(usize, u64)> = e
                    .iter()
                    .enumerate()
                    .filter(|(_, &k)| k > 0)
                    .map(|(i, &k)| (i, k as u64))
                    .collect();
                (lc, vs)
            })
            .collect();
        Evaluator {
            order: field.order() as u64 - 1,
            field,
            terms,
        }
    }

    /// Discrete logs of the coordinates of a point (`None` for zero).
    pub fn logs(field: &Field, point: &[Fe], buf: &mut Vec<Option<u32>>) {
        buf.clear();
        buf.extend(point.iter().map(|&a| field.log(a)));
    }

    #[inline]
    pub fn eval_logs(&self, logs: &[Option<u32>]) -> Fe {
        let f = &self.field;
        let mut acc = Fe::ZERO;
        'terms: for (lc, vs) in &self.terms {
            let mut s = *lc;
            for &(i, k) in vs {
                match logs[i] {
                    None => continue 'terms,
                    Some(l) => s += l as u64 * k,
                }
            }
            acc = f.add(acc, f.exp((s % self.order) as i64));
        }
        acc
    }

    pub fn eval(&self, point: &[Fe]) -> Fe {
        let mut buf = Vec::new();
        Evaluator::logs(&self.field, point, &mut buf);
        self.eval_logs(&buf)
    }
}

/// Names `prefix0, prefix1, ...`.
pub fn indexed_names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vars3() -> Arc<Vec<String>> {
        Arc::new(vec!["x".into(), "y".into(), "z".into()])
    }

    #[test]
    fn parse_and_print_round_trip() {
        let f = Field::new(2, 3).unwrap();
        let p = Poly::parse("g^3*x^2*y + 1*z + x + 1", &f, vars3()).unwrap();
        assert_eq!(p.num_terms(), 4);
        let again = Poly::parse(&p.to_string(), &f, vars3()).unwrap();
        assert_eq!(p, again);
        assert!(Poly::parse("x + q", &f, vars3()).is_err());
        assert!(Poly::parse("x +", &f, vars3()).is_err());
    }

    #[test]
    fn parse_negative_terms() {
        let f = Field::new(3, 1).unwrap();
        let p = Poly::parse("x - y - 2", &f, vars3()).unwrap();
        let q = Poly::parse("x + 2*y + 1", &f, vars3()).unwrap();
        assert_eq!(p, q);
        let r = Poly::parse("-x^2", &f, vars3()).unwrap();
        assert_eq!(r, Poly::parse("2*x^2", &f, vars3()).unwrap());
    }

    #[test]
    fn partials_in_characteristic_two() {
        let f = Field::new(2, 1).unwrap();
        let p = Poly::parse("x^2*y + x^3 + y*z", &f, vars3()).unwrap();
        assert_eq!(p.partial(0), Poly::parse("x^2", &f, vars3()).unwrap());
        assert_eq!(p.partial(1), Poly::parse("x^2 + z", &f, vars3()).unwrap());
    }

    #[test]
    fn strip_removes_only_pth_powers() {
        let f = Field::new(3, 1).unwrap();
        let p = Poly::parse("x^3*y^6 + x^3*y + 2 + z^2", &f, vars3()).unwrap();
        assert_eq!(p.strip_pth_powers(), Poly::parse("x^3*y + z^2", &f, vars3()).unwrap());
    }

    #[test]
    fn lucas_binomials() {
        for n in 0..40u64 {
            for k in 0..=n {
                let mut exact: u128 = 1;
                for i in 0..k {
                    exact = exact * (n - i) as u128 / (i + 1) as u128;
                }
                for p in [2u64, 3] {
                    assert_eq!(binom_mod(n, k, p), (exact % p as u128) as u64, "C({n},{k}) mod {p}");
                }
            }
        }
    }

    #[test]
    fn specialize_drops_variables() {
        let f = Field::new(3, 1).unwrap();
        let p = Poly::parse("x*y + 2*y*z + x", &f, vars3()).unwrap();
        let s = p.specialize(&[None, Some(Fe::ONE), None]);
        assert_eq!(s.vars().as_slice(), &["x".to_string(), "z".to_string()]);
        assert_eq!(s.to_string(), Poly::parse("2*x + 2*z", &f, s.vars().clone()).unwrap().to_string());
    }

    fn arb_poly(field: Field) -> impl Strategy<Value = Poly> {
        let q = field.order();
        prop::collection::vec((prop::collection::vec(0u32..5, 3), 0..q), 0..8).prop_map(move |ts| {
            let mut p = Poly::zero(&field, vars3());
            for (e, c) in ts {
                p.add_term(e, Fe(c as u16));
            }
            p
        })
    }

    fn arb_point(field: Field) -> impl Strategy<Value = Vec<Fe>> {
        let q = field.order();
        prop::collection::vec(0..q, 3).prop_map(|v| v.into_iter().map(|c| Fe(c as u16)).collect())
    }

    proptest! {
        #[test]
        fn translation_agrees_with_evaluation(
            (p, a, b) in prop::sample::select(vec![(2u32, 2u32), (3, 2), (2, 3)])
                .prop_flat_map(|(p, k)| {
                    let f = Field::new(p, k).unwrap();
                    (arb_poly(f.clone()), arb_point(f.clone()), arb_point(f))
                })
        ) {
            let f = p.field().clone();
            let t = p.translate(&a, None);
            let shifted: Vec<Fe> = a.iter().zip(&b).map(|(x, y)| f.add(*x, *y)).collect();
            prop_assert_eq!(t.eval(&b), p.eval(&shifted));
            let ev = Evaluator::new(&p);
            prop_assert_eq!(ev.eval(&b), p.eval(&b));
        }

        #[test]
        fn product_rule(
            (p, q) in prop::sample::select(vec![(2u32, 1u32), (3, 1), (3, 2)])
                .prop_flat_map(|(p, k)| {
                    let f = Field::new(p, k).unwrap();
                    (arb_poly(f.clone()), arb_poly(f))
                })
        ) {
            for v in 0..3 {
                let lhs = p.mul(&q).partial(v);
                let rhs = p.partial(v).mul(&q).add(&p.mul(&q.partial(v)));
                prop_assert_eq!(lhs, rhs);
            }
        }

        #[test]
        fn stripped_terms_have_zero_derivative(
            p in arb_poly(Field::new(3, 2).unwrap())
        ) {
            let removed = p.sub(&p.strip_pth_powers());
            for v in 0..3 {
                prop_assert!(removed.partial(v).is_zero());
            }
        }
    }
}
