//! Finite fields GF(p^k) for p in {2, 3}, backed by log/antilog tables.
//!
//! An element is stored as its integer code `c0 + c1*p + c2*p^2 + ...`, where
//! `[c0, c1, ...]` is its coordinate vector in the power basis `1, g, g^2, ...`
//! of the fixed generator `g` (the class of `x` modulo the field's modulus).
//! For `k = 1` the modulus is `x + 1`, so `g = -1`, which generates GF(2)^* and
//! GF(3)^*.
//!
//! Point enumeration walks `GF(q)^dim` in increasing code order with the first
//! coordinate most significant.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default number of point evaluations a scan may perform.
pub const DEFAULT_BUDGET: u64 = 100_000_000;

/// Largest supported extension degree for each characteristic.
pub const MAX_DEGREE_CHAR2: u32 = 10;
pub const MAX_DEGREE_CHAR3: u32 = 6;

/// Monic moduli, coefficients from low to high degree. All of them are
/// primitive, which the table construction re-checks.
const MODULI_CHAR2: [&[u8]; 10] = [
    &[1, 1],
    &[1, 1, 1],
    &[1, 1, 0, 1],
    &[1, 1, 0, 0, 1],
    &[1, 0, 1, 0, 0, 1],
    &[1, 1, 0, 0, 0, 0, 1],
    &[1, 1, 0, 0, 0, 0, 0, 1],
    &[1, 0, 1, 1, 1, 0, 0, 0, 1],
    &[1, 0, 0, 0, 1, 0, 0, 0, 0, 1],
    &[1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1],
];

const MODULI_CHAR3: [&[u8]; 6] = [
    &[1, 1],
    &[2, 2, 1],
    &[1, 2, 0, 1],
    &[2, 0, 0, 2, 1],
    &[1, 2, 0, 0, 0, 1],
    &[2, 2, 1, 0, 2, 0, 1],
];

/// A field element, identified by its integer code within its field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Fe(pub u16);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

struct Tables {
    p: u32,
    k: u32,
    q: u32,
    modulus: Vec<u8>,
    /// `exp[i] = g^i`, doubled so that sums of two logs index directly.
    exp: Vec<u16>,
    log: Vec<u16>,
    /// Addition table for odd characteristic; characteristic 2 uses xor.
    add: Vec<u16>,
    neg: Vec<u16>,
}

/// Handle to a finite field. Cloning is cheap; handles for the same `(p, k)`
/// share one set of tables.
#[derive(Clone)]
pub struct Field {
    t: Arc<Tables>,
}

impl PartialEq for Field {
    fn eq(&self, other: &Self) -> bool {
        self.t.p == other.t.p && self.t.k == other.t.k
    }
}

impl Eq for Field {}

impl fmt::Debug for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.descriptor())
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.descriptor())
    }
}

fn cache() -> &'static Mutex<HashMap<(u32, u32), Field>> {
    static CACHE: OnceLock<Mutex<HashMap<(u32, u32), Field>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn digits(mut code: u32, p: u32, k: u32) -> Vec<u32> {
    let mut out = Vec::with_capacity(k as usize);
    for _ in 0..k {
        out.push(code % p);
        code /= p;
    }
    out
}

fn undigits(ds: &[u32], p: u32) -> u32 {
    ds.iter().rev().fold(0, |acc, &d| acc * p + d)
}

/// Remainder of `a` modulo `b` over GF(p); both are coefficient vectors
/// (low to high) and `b` is monic.
fn poly_rem_prime(a: &[u32], b: &[u32], p: u32) -> Vec<u32> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    while r.len() > db {
        let lead = *r.last().unwrap() % p;
        let shift = r.len() - 1 - db;
        if lead != 0 {
            for (i, &bc) in b.iter().enumerate() {
                r[shift + i] = (r[shift + i] + (p - lead) * bc) % p;
            }
        }
        r.pop();
    }
    r
}

/// Brute-force irreducibility test: no monic factor of degree `1..=k/2`.
fn is_irreducible(modulus: &[u32], p: u32) -> bool {
    let k = modulus.len() - 1;
    for d in 1..=k / 2 {
        let count = p.pow(d as u32);
        for low in 0..count {
            let mut h = digits(low, p, d as u32);
            h.push(1);
            if poly_rem_prime(modulus, &h, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

impl Field {
    /// The field GF(p^k). Supported: p = 2 with k <= 10, p = 3 with k <= 6.
    pub fn new(p: u32, k: u32) -> Result<Field> {
        let moduli: &[&[u8]] = match p {
            2 => &MODULI_CHAR2,
            3 => &MODULI_CHAR3,
            _ => return Err(Error::UnsupportedField { p, k }),
        };
        if k == 0 || k as usize > moduli.len() {
            return Err(Error::UnsupportedField { p, k });
        }
        let mut guard = cache().lock().unwrap();
        if let Some(f) = guard.get(&(p, k)) {
            return Ok(f.clone());
        }
        let tables = build_tables(p, k, moduli[k as usize - 1])?;
        let field = Field { t: Arc::new(tables) };
        guard.insert((p, k), field.clone());
        Ok(field)
    }

    /// The field of the given order `q = p^k`.
    pub fn with_order(q: u32) -> Result<Field> {
        for p in [2u32, 3] {
            let mut k = 0;
            let mut v = 1u32;
            while v < q {
                v *= p;
                k += 1;
            }
            if v == q && k > 0 {
                return Field::new(p, k);
            }
        }
        Err(Error::FieldSyntax(format!("GF({q})")))
    }

    /// Parses `GF(p^k)` or `GF(q)`.
    pub fn parse(s: &str) -> Result<Field> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let inner = t
            .strip_prefix("GF(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::FieldSyntax(s.to_string()))?;
        let bad = || Error::FieldSyntax(s.to_string());
        if let Some((a, b)) = inner.split_once('^') {
            let p: u32 = a.parse().map_err(|_| bad())?;
            let k: u32 = b.parse().map_err(|_| bad())?;
            Field::new(p, k)
        } else {
            let q: u32 = inner.parse().map_err(|_| bad())?;
            Field::with_order(q)
        }
    }

    pub fn descriptor(&self) -> String {
        format!("GF({}^{})", self.t.p, self.t.k)
    }

    pub fn characteristic(&self) -> u32 {
        self.t.p
    }

    pub fn degree(&self) -> u32 {
        self.t.k
    }

    pub fn order(&self) -> u32 {
        self.t.q
    }

    /// Coefficients of the monic modulus, low to high.
    pub fn modulus(&self) -> &[u8] {
        &self.t.modulus
    }

    pub fn generator(&self) -> Fe {
        Fe(self.t.exp[1])
    }

    pub fn elements(&self) -> impl Iterator<Item = Fe> {
        (0..self.t.q).map(|c| Fe(c as u16))
    }

    pub fn from_code(&self, code: u32) -> Result<Fe> {
        if code < self.t.q {
            Ok(Fe(code as u16))
        } else {
            Err(Error::Parse(format!(
                "code {code} out of range for {}",
                self.descriptor()
            )))
        }
    }

    /// Image of an integer under `Z -> GF(p) -> GF(p^k)`.
    pub fn from_int(&self, n: i64) -> Fe {
        Fe(n.rem_euclid(self.t.p as i64) as u16)
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        if self.t.p == 2 {
            Fe(a.0 ^ b.0)
        } else {
            Fe(self.t.add[a.0 as usize * self.t.q as usize + b.0 as usize])
        }
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        Fe(self.t.neg[a.0 as usize])
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        self.add(a, self.neg(b))
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if a.0 == 0 || b.0 == 0 {
            return Fe::ZERO;
        }
        let s = self.t.log[a.0 as usize] as usize + self.t.log[b.0 as usize] as usize;
        Fe(self.t.exp[s])
    }

    pub fn inv(&self, a: Fe) -> Option<Fe> {
        if a.is_zero() {
            return None;
        }
        let n = self.t.q as usize - 1;
        let l = self.t.log[a.0 as usize] as usize;
        Some(Fe(self.t.exp[(n - l) % n]))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Option<Fe> {
        self.inv(b).map(|bi| self.mul(a, bi))
    }

    /// Discrete log base the generator, for nonzero elements.
    #[inline]
    pub fn log(&self, a: Fe) -> Option<u32> {
        if a.is_zero() {
            None
        } else {
            Some(self.t.log[a.0 as usize] as u32)
        }
    }

    /// `g^e` for any integer `e`.
    #[inline]
    pub fn exp(&self, e: i64) -> Fe {
        let n = self.t.q as i64 - 1;
        Fe(self.t.exp[e.rem_euclid(n) as usize])
    }

    /// `a^e`; negative exponents require `a != 0`. `0^0 = 1`.
    pub fn pow(&self, a: Fe, e: i64) -> Fe {
        if e == 0 {
            return Fe::ONE;
        }
        match self.log(a) {
            None => {
                assert!(e > 0, "zero raised to a negative power");
                Fe::ZERO
            }
            Some(l) => {
                let n = self.t.q as i128 - 1;
                let r = (l as i128 * e as i128).rem_euclid(n);
                Fe(self.t.exp[r as usize])
            }
        }
    }

    /// The unique `b` with `b^p = a`.
    pub fn pth_root(&self, a: Fe) -> Fe {
        self.pow(a, (self.t.q / self.t.p) as i64)
    }

    /// Power-basis coordinates `[c0, ..., c_{k-1}]`.
    pub fn coords(&self, a: Fe) -> Vec<u32> {
        digits(a.0 as u32, self.t.p, self.t.k)
    }

    pub fn from_coords(&self, cs: &[u32]) -> Result<Fe> {
        if cs.len() != self.t.k as usize || cs.iter().any(|&c| c >= self.t.p) {
            return Err(Error::Parse(format!(
                "coordinate vector {cs:?} does not describe an element of {}",
                self.descriptor()
            )));
        }
        Ok(Fe(undigits(cs, self.t.p) as u16))
    }

    /// The `[c0,c1,...]` literal of an element.
    pub fn literal(&self, a: Fe) -> String {
        let cs: Vec<String> = self.coords(a).iter().map(|c| c.to_string()).collect();
        format!("[{}]", cs.join(","))
    }

    pub fn parse_literal(&self, s: &str) -> Result<Fe> {
        let t = s.trim();
        let inner = t
            .strip_prefix('[')
            .and_then(|r| r.strip_suffix(']'))
            .ok_or_else(|| Error::Parse(format!("element literal `{s}`")))?;
        let cs: std::result::Result<Vec<u32>, _> =
            inner.split(',').map(|c| c.trim().parse::<u32>()).collect();
        self.from_coords(&cs.map_err(|_| Error::Parse(format!("element literal `{s}`")))?)
    }

    /// Text form used inside polynomials: integers for prime fields, `g^e`
    /// otherwise.
    pub fn format_coeff(&self, a: Fe) -> String {
        if self.t.k == 1 || a.0 <= 1 {
            a.0.to_string()
        } else {
            format!("g^{}", self.t.log[a.0 as usize])
        }
    }

    /// Parses an integer, `g`, `g^e` or a `[c0,...]` literal.
    pub fn parse_coeff(&self, s: &str) -> Result<Fe> {
        let t = s.trim();
        if t.starts_with('[') {
            return self.parse_literal(t);
        }
        if let Some(rest) = t.strip_prefix('g') {
            if rest.is_empty() {
                return Ok(self.generator());
            }
            let e: i64 = rest
                .strip_prefix('^')
                .and_then(|r| r.parse().ok())
                .ok_or_else(|| Error::Parse(format!("coefficient `{s}`")))?;
            return Ok(self.exp(e));
        }
        let n: i64 = t
            .parse()
            .map_err(|_| Error::Parse(format!("coefficient `{s}`")))?;
        Ok(self.from_int(n))
    }

    /// Embedding of `self` into `big`, defined when the degree of `self`
    /// divides the degree of `big`.
    pub fn embedding_into(&self, big: &Field) -> Result<Embedding> {
        if self.t.p != big.t.p || big.t.k % self.t.k != 0 {
            return Err(Error::FieldMismatch(format!(
                "{} is not a subfield of {}",
                self.descriptor(),
                big.descriptor()
            )));
        }
        let modulus: Vec<Fe> = self.t.modulus.iter().map(|&c| big.from_int(c as i64)).collect();
        let root = big
            .elements()
            .find(|&h| {
                let v = modulus
                    .iter()
                    .rev()
                    .fold(Fe::ZERO, |acc, &c| big.add(big.mul(acc, h), c));
                v.is_zero()
            })
            .expect("a subfield modulus splits in the larger field");
        let mut map = vec![Fe::ZERO; self.t.q as usize];
        for e in 0..self.t.q - 1 {
            let a = self.exp(e as i64);
            map[a.0 as usize] = big.pow(root, e as i64);
        }
        Ok(Embedding {
            source: self.clone(),
            target: big.clone(),
            map,
        })
    }

    /// Total number of points of `GF(q)^dim`, or an error when it exceeds the
    /// budget.
    pub fn check_budget(&self, dim: usize, budget: u64) -> Result<u64> {
        let required = (self.t.q as u128).checked_pow(dim as u32).unwrap_or(u128::MAX);
        if required > budget as u128 {
            return Err(Error::BudgetExceeded { required, budget });
        }
        Ok(required as u64)
    }

    /// Enumerates `GF(q)^dim` in the documented order, refusing when the
    /// number of points exceeds `budget`.
    pub fn enumerate_points(&self, dim: usize, budget: u64) -> Result<PointRange> {
        let total = self.check_budget(dim, budget)?;
        Ok(PointRange {
            q: self.t.q,
            dim,
            start: 0,
            end: total,
        })
    }
}

fn build_tables(p: u32, k: u32, modulus: &[u8]) -> Result<Tables> {
    let q = p.pow(k);
    let m32: Vec<u32> = modulus.iter().map(|&c| c as u32).collect();
    if m32.len() != k as usize + 1 || *m32.last().unwrap() != 1 {
        return Err(Error::BadModulus {
            p,
            k,
            reason: "not monic of the right degree".into(),
        });
    }
    if !is_irreducible(&m32, p) {
        return Err(Error::BadModulus {
            p,
            k,
            reason: "reducible".into(),
        });
    }
    let n = (q - 1) as usize;
    let mut exp = vec![0u16; 2 * n.max(1)];
    let mut log = vec![0u16; q as usize];
    let mut cur = vec![0u32; k as usize];
    cur[0] = 1;
    let mut seen = vec![false; q as usize];
    for i in 0..n {
        let code = undigits(&cur, p);
        if seen[code as usize] {
            return Err(Error::BadModulus {
                p,
                k,
                reason: "not primitive".into(),
            });
        }
        seen[code as usize] = true;
        exp[i] = code as u16;
        log[code as usize] = i as u16;
        // multiply by x and reduce
        let mut next = vec![0u32; k as usize + 1];
        next[1..].copy_from_slice(&cur);
        let top = next[k as usize];
        if top != 0 {
            for j in 0..=k as usize {
                next[j] = (next[j] + (p - top) * m32[j]) % p;
            }
        }
        cur = next[..k as usize].to_vec();
    }
    for i in n..2 * n {
        exp[i] = exp[i - n];
    }
    let qs = q as usize;
    let mut neg = vec![0u16; qs];
    let mut add = Vec::new();
    for a in 0..q {
        let da = digits(a, p, k);
        let na: Vec<u32> = da.iter().map(|&c| (p - c) % p).collect();
        neg[a as usize] = undigits(&na, p) as u16;
    }
    if p != 2 {
        add = vec![0u16; qs * qs];
        let ds: Vec<Vec<u32>> = (0..q).map(|a| digits(a, p, k)).collect();
        for a in 0..qs {
            for b in 0..qs {
                let s: Vec<u32> = ds[a].iter().zip(&ds[b]).map(|(x, y)| (x + y) % p).collect();
                add[a * qs + b] = undigits(&s, p) as u16;
            }
        }
    }
    Ok(Tables {
        p,
        k,
        q,
        modulus: modulus.to_vec(),
        exp,
        log,
        add,
        neg,
    })
}

/// A field embedding `source -> target` given by a lookup table.
#[derive(Clone)]
pub struct Embedding {
    pub source: Field,
    pub target: Field,
    map: Vec<Fe>,
}

impl Embedding {
    pub fn apply(&self, a: Fe) -> Fe {
        self.map[a.0 as usize]
    }
}

/// A contiguous range of points of `GF(q)^dim` in enumeration order. Ranges
/// can be split for parallel scans.
#[derive(Clone, Copy, Debug)]
pub struct PointRange {
    q: u32,
    dim: usize,
    pub start: u64,
    pub end: u64,
}

impl PointRange {
    pub fn len(&self) -> u64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start >= self.end
    }

    /// Splits into at most `parts` consecutive ranges.
    pub fn split(&self, parts: u64) -> Vec<PointRange> {
        let parts = parts.max(1);
        let len = self.len();
        let step = len.div_ceil(parts).max(1);
        let mut out = Vec::new();
        let mut s = self.start;
        while s < self.end {
            let e = (s + step).min(self.end);
            out.push(PointRange { start: s, end: e, ..*self });
            s = e;
        }
        out
    }

    /// Writes the point with the given index into `buf`.
    pub fn point_at(&self, mut index: u64, buf: &mut [Fe]) {
        for slot in buf.iter_mut().rev() {
            *slot = Fe((index % self.q as u64) as u16);
            index /= self.q as u64;
        }
    }
}

impl IntoIterator for PointRange {
    type Item = Vec<Fe>;
    type IntoIter = PointIter;

    fn into_iter(self) -> PointIter {
        PointIter { range: self, next: self.start }
    }
}

pub struct PointIter {
    range: PointRange,
    next: u64,
}

impl Iterator for PointIter {
    type Item = Vec<Fe>;

    fn next(&mut self) -> Option<Vec<Fe>> {
        if self.next >= self.range.end {
            return None;
        }
        let mut buf = vec![Fe::ZERO; self.range.dim];
        self.range.point_at(self.next, &mut buf);
        self.next += 1;
        Some(buf)
    }
}

/// Serializable field descriptor, written as `GF(p^k)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct FieldSpec(pub String);

impl TryFrom<String> for FieldSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        Field::parse(&s).map(|f| FieldSpec(f.descriptor()))
    }
}

impl From<FieldSpec> for String {
    fn from(f: FieldSpec) -> String {
        f.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn all_fields() -> Vec<Field> {
        let mut v = Vec::new();
        for k in 1..=MAX_DEGREE_CHAR2 {
            v.push(Field::new(2, k).unwrap());
        }
        for k in 1..=MAX_DEGREE_CHAR3 {
            v.push(Field::new(3, k).unwrap());
        }
        v
    }

    #[test]
    fn every_supported_modulus_is_primitive() {
        for f in all_fields() {
            assert_eq!(f.order(), f.characteristic().pow(f.degree()));
            let g = f.generator();
            let mut seen = std::collections::HashSet::new();
            let mut a = Fe::ONE;
            for _ in 0..f.order() - 1 {
                assert!(seen.insert(a));
                a = f.mul(a, g);
            }
            assert_eq!(a, Fe::ONE);
        }
    }

    #[test]
    fn unsupported_fields_are_rejected() {
        assert!(matches!(Field::new(5, 1), Err(Error::UnsupportedField { .. })));
        assert!(Field::new(2, 11).is_err());
        assert!(Field::new(3, 7).is_err());
        assert!(Field::parse("GF(6)").is_err());
    }

    #[test]
    fn gf8_multiplication_matches_schoolbook() {
        // x^3 = x + 1 in GF(8): g^3 = g + 1.
        let f = Field::new(2, 3).unwrap();
        let g = f.generator();
        assert_eq!(f.coords(g), vec![0, 1, 0]);
        assert_eq!(f.pow(g, 3), f.add(g, Fe::ONE));
        let inv = f.inv(g).unwrap();
        assert_eq!(f.mul(inv, g), Fe::ONE);
    }

    #[test]
    fn parsing_descriptors() {
        assert_eq!(Field::parse("GF(2^3)").unwrap().order(), 8);
        assert_eq!(Field::parse("GF(9)").unwrap().descriptor(), "GF(3^2)");
        assert_eq!(Field::parse(" GF( 3 ^ 1 ) ").unwrap().order(), 3);
        assert!(Field::parse("F(8)").is_err());
    }

    #[test]
    fn literal_round_trip() {
        let f = Field::new(3, 2).unwrap();
        for a in f.elements() {
            assert_eq!(f.parse_literal(&f.literal(a)).unwrap(), a);
            assert_eq!(f.parse_coeff(&f.format_coeff(a)).unwrap(), a);
        }
        assert!(f.parse_literal("[3,0]").is_err());
    }

    #[test]
    fn point_enumeration_tiny_field() {
        let f = Field::new(2, 1).unwrap();
        let pts: Vec<Vec<Fe>> = f.enumerate_points(2, 100).unwrap().into_iter().collect();
        let codes: Vec<Vec<u16>> = pts.iter().map(|p| p.iter().map(|a| a.0).collect()).collect();
        assert_eq!(codes, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn enumeration_respects_budget() {
        let f = Field::new(2, 3).unwrap();
        assert!(f.enumerate_points(3, 512).is_ok());
        assert!(matches!(
            f.enumerate_points(3, 511),
            Err(Error::BudgetExceeded { required: 512, .. })
        ));
    }

    #[test]
    fn range_split_covers() {
        let f = Field::new(3, 1).unwrap();
        let r = f.enumerate_points(3, 1000).unwrap();
        let parts = r.split(4);
        let total: u64 = parts.iter().map(|p| p.len()).sum();
        assert_eq!(total, 27);
        assert_eq!(parts[0].start, 0);
        assert_eq!(parts.last().unwrap().end, 27);
    }

    #[test]
    fn embeddings_are_ring_maps() {
        for (p, k, big) in [(2, 3, 6), (2, 2, 8), (3, 2, 4), (3, 1, 6), (3, 3, 6)] {
            let small = Field::new(p, k).unwrap();
            let large = Field::new(p, big).unwrap();
            let e = small.embedding_into(&large).unwrap();
            for a in small.elements() {
                for b in small.elements() {
                    assert_eq!(e.apply(small.add(a, b)), large.add(e.apply(a), e.apply(b)));
                    assert_eq!(e.apply(small.mul(a, b)), large.mul(e.apply(a), e.apply(b)));
                }
            }
        }
        let f8 = Field::new(2, 3).unwrap();
        assert!(f8.embedding_into(&Field::new(2, 4).unwrap()).is_err());
    }

    fn field_and_elems() -> impl Strategy<Value = (Field, u32, u32, u32)> {
        (prop::sample::select(vec![(2u32, 1u32), (2, 2), (2, 3), (2, 4), (2, 8), (2, 10), (3, 1), (3, 2), (3, 3), (3, 6)]), any::<u32>(), any::<u32>(), any::<u32>())
            .prop_map(|((p, k), a, b, c)| {
                let f = Field::new(p, k).unwrap();
                let q = f.order();
                (f, a % q, b % q, c % q)
            })
    }

    proptest! {
        #[test]
        fn field_axioms((f, a, b, c) in field_and_elems()) {
            let (a, b, c) = (Fe(a as u16), Fe(b as u16), Fe(c as u16));
            prop_assert_eq!(f.add(a, b), f.add(b, a));
            prop_assert_eq!(f.mul(a, b), f.mul(b, a));
            prop_assert_eq!(f.add(f.add(a, b), c), f.add(a, f.add(b, c)));
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
            prop_assert_eq!(f.add(a, f.neg(a)), Fe::ZERO);
            if !a.is_zero() {
                prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), Fe::ONE);
            }
            let r = f.pth_root(a);
            prop_assert_eq!(f.pow(r, f.characteristic() as i64), a);
            prop_assert_eq!(f.pow(a, f.order() as i64), a);
        }

        #[test]
        fn addition_is_coordinatewise((f, a, b, _c) in field_and_elems()) {
            let p = f.characteristic();
            let ca = f.coords(Fe(a as u16));
            let cb = f.coords(Fe(b as u16));
            let sum: Vec<u32> = ca.iter().zip(&cb).map(|(x, y)| (x + y) % p).collect();
            prop_assert_eq!(f.coords(f.add(Fe(a as u16), Fe(b as u16))), sum);
        }
    }
}
