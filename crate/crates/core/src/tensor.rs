//! Four-index Bell tensors and the elementary norms on them.
//!
//! A [`Tensor4`] holds coefficients `t(x, a, y, b)` where `x` ranges over
//! Alice's inputs, `a` over her outputs, `y` over Bob's inputs and `b` over his
//! outputs. Storage is dense and row-major in the order `(x, a, y, b)`: `x`
//! varies slowest and `b` fastest. All labels are 0-based; "the last output"
//! means label `k - 1`.

use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Scenario sizes: Alice has `n1` inputs with `k1` outputs each, Bob `n2` and `k2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub n1: usize,
    pub k1: usize,
    pub n2: usize,
    pub k2: usize,
}

impl Dims {
    pub fn new(n1: usize, k1: usize, n2: usize, k2: usize) -> Result<Self> {
        if n1 == 0 || k1 == 0 || n2 == 0 || k2 == 0 {
            return Err(Error::InvalidDims(format!(
                "all sizes must be positive, got ({n1},{k1},{n2},{k2})"
            )));
        }
        Ok(Dims { n1, k1, n2, k2 })
    }

    /// The symmetric scenario `N` inputs and `K` outputs per party.
    pub fn square(n: usize, k: usize) -> Result<Self> {
        Self::new(n, k, n, k)
    }

    pub fn len(&self) -> usize {
        self.n1 * self.k1 * self.n2 * self.k2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn flipped(&self) -> Dims {
        Dims {
            n1: self.n2,
            k1: self.k2,
            n2: self.n1,
            k2: self.k1,
        }
    }

    #[inline]
    pub fn index(&self, x: usize, a: usize, y: usize, b: usize) -> usize {
        debug_assert!(x < self.n1 && a < self.k1 && y < self.n2 && b < self.k2);
        ((x * self.k1 + a) * self.n2 + y) * self.k2 + b
    }

    /// Inverse of [`Dims::index`].
    pub fn unindex(&self, mut i: usize) -> (usize, usize, usize, usize) {
        let b = i % self.k2;
        i /= self.k2;
        let y = i % self.n2;
        i /= self.n2;
        let a = i % self.k1;
        let x = i / self.k1;
        (x, a, y, b)
    }

    pub fn is_square(&self) -> bool {
        self.n1 == self.n2 && self.k1 == self.k2
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Tensor4 {
    dims: Dims,
    coeffs: Vec<Rational>,
}

impl Tensor4 {
    pub fn zeros(dims: Dims) -> Self {
        Tensor4 {
            dims,
            coeffs: vec![Rational::zero(); dims.len()],
        }
    }

    pub fn from_coeffs(dims: Dims, coeffs: Vec<Rational>) -> Result<Self> {
        if coeffs.len() != dims.len() {
            return Err(Error::InvalidInput(format!(
                "expected {} coefficients for {:?}, got {}",
                dims.len(),
                dims,
                coeffs.len()
            )));
        }
        Ok(Tensor4 { dims, coeffs })
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize, usize) -> Rational) -> Self {
        let coeffs = (0..dims.len())
            .map(|i| {
                let (x, a, y, b) = dims.unindex(i);
                f(x, a, y, b)
            })
            .collect();
        Tensor4 { dims, coeffs }
    }

    /// Every entry equal to `1/(k1 k2)`: the uniformly random NS box.
    pub fn uniform(dims: Dims) -> Self {
        let v = Rational::new(1, (dims.k1 * dims.k2) as i64);
        Tensor4 {
            dims,
            coeffs: vec![v; dims.len()],
        }
    }

    /// The local deterministic point `P(a,b|x,y) = [a = alice(x)] [b = bob(y)]`.
    pub fn deterministic(dims: Dims, alice: &[usize], bob: &[usize]) -> Result<Self> {
        if alice.len() != dims.n1 || bob.len() != dims.n2 {
            return Err(Error::InvalidInput("strategy length does not match inputs".into()));
        }
        if alice.iter().any(|&a| a >= dims.k1) || bob.iter().any(|&b| b >= dims.k2) {
            return Err(Error::InvalidInput("strategy output out of range".into()));
        }
        Ok(Tensor4::from_fn(dims, |x, a, y, b| {
            if alice[x] == a && bob[y] == b {
                Rational::one()
            } else {
                Rational::zero()
            }
        }))
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Rational> {
        self.coeffs
    }

    #[inline]
    pub fn get(&self, x: usize, a: usize, y: usize, b: usize) -> &Rational {
        &self.coeffs[self.dims.index(x, a, y, b)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, a: usize, y: usize, b: usize, v: Rational) {
        let i = self.dims.index(x, a, y, b);
        self.coeffs[i] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Rational::is_zero)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    pub fn map(&self, f: impl FnMut(&Rational) -> Rational) -> Tensor4 {
        Tensor4 {
            dims: self.dims,
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Tensor4 {
        self.map(|v| v * c)
    }

    pub fn abs(&self) -> Tensor4 {
        self.map(Rational::abs)
    }

    fn check_same(&self, other: &Tensor4) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(self.dims, other.dims));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Tensor4) -> Result<Tensor4> {
        self.check_same(other)?;
        Ok(Tensor4 {
            dims: self.dims,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(p, q)| p + q).collect(),
        })
    }

    pub fn try_sub(&self, other: &Tensor4) -> Result<Tensor4> {
        self.check_same(other)?;
        Ok(Tensor4 {
            dims: self.dims,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(p, q)| p - q).collect(),
        })
    }

    /// Entrywise `self <= other`.
    pub fn dominated_by(&self, other: &Tensor4) -> bool {
        self.dims == other.dims && self.coeffs.iter().zip(&other.coeffs).all(|(p, q)| p <= q)
    }

    /// `Σ_{a,b} t(x,a,y,b)` for one input pair.
    pub fn slice_sum(&self, x: usize, y: usize) -> Rational {
        let d = self.dims;
        let mut s = Rational::zero();
        for a in 0..d.k1 {
            for b in 0..d.k2 {
                s += self.get(x, a, y, b);
            }
        }
        s
    }

    /// `Σ_b t(x,a,y,b)`.
    pub fn alice_marginal(&self, x: usize, a: usize, y: usize) -> Rational {
        (0..self.dims.k2).map(|b| self.get(x, a, y, b)).sum()
    }

    /// `Σ_a t(x,a,y,b)`.
    pub fn bob_marginal(&self, x: usize, y: usize, b: usize) -> Rational {
        (0..self.dims.k1).map(|a| self.get(x, a, y, b)).sum()
    }
}

impl Add for &Tensor4 {
    type Output = Tensor4;
    fn add(self, rhs: &Tensor4) -> Tensor4 {
        self.try_add(rhs).expect("tensor dimensions differ")
    }
}

impl Sub for &Tensor4 {
    type Output = Tensor4;
    fn sub(self, rhs: &Tensor4) -> Tensor4 {
        self.try_sub(rhs).expect("tensor dimensions differ")
    }
}

impl Neg for &Tensor4 {
    type Output = Tensor4;
    fn neg(self) -> Tensor4 {
        self.map(|v| -v)
    }
}

/// Marginal data of an element of ANS: `Σ_b t = alice[x][a]`, `Σ_a t = bob[y][b]`
/// and `Σ_{a,b} t = total` for every input pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Marginals {
    pub alice: Vec<Vec<Rational>>,
    pub bob: Vec<Vec<Rational>>,
    pub total: Rational,
}

/// Swaps the parties: `out(y,b,x,a) = t(x,a,y,b)`.
pub fn flip(t: &Tensor4) -> Tensor4 {
    let d = t.dims;
    let fd = d.flipped();
    let mut coeffs = vec![Rational::zero(); d.len()];
    for (i, v) in t.coeffs.iter().enumerate() {
        let (x, a, y, b) = d.unindex(i);
        coeffs[fd.index(y, b, x, a)] = v.clone();
    }
    Tensor4 { dims: fd, coeffs }
}

/// `⟨m, p⟩ = Σ m(x,a,y,b) p(x,a,y,b)`.
pub fn pairing(m: &Tensor4, p: &Tensor4) -> Result<Rational> {
    m.check_same(p)?;
    Ok(m.coeffs.iter().zip(&p.coeffs).map(|(u, v)| u * v).sum())
}

/// `max_x Σ_a max_y Σ_b |t(x,a,y,b)|`.
pub fn norm_bns1(t: &Tensor4) -> Rational {
    let d = t.dims;
    let mut best = Rational::zero();
    for x in 0..d.n1 {
        let mut over_a = Rational::zero();
        for a in 0..d.k1 {
            let mut over_y = Rational::zero();
            for y in 0..d.n2 {
                let s: Rational = (0..d.k2).map(|b| t.get(x, a, y, b).abs()).sum();
                over_y = over_y.max_of(s);
            }
            over_a += over_y;
        }
        best = best.max_of(over_a);
    }
    best
}

/// `max_y Σ_b max_x Σ_a |t(x,a,y,b)|`, i.e. [`norm_bns1`] of the flipped tensor.
pub fn norm_bns2(t: &Tensor4) -> Rational {
    let d = t.dims;
    let mut best = Rational::zero();
    for y in 0..d.n2 {
        let mut over_b = Rational::zero();
        for b in 0..d.k2 {
            let mut over_x = Rational::zero();
            for x in 0..d.n1 {
                let s: Rational = (0..d.k1).map(|a| t.get(x, a, y, b).abs()).sum();
                over_x = over_x.max_of(s);
            }
            over_b += over_x;
        }
        best = best.max_of(over_b);
    }
    best
}

/// The non-signalling norm `max(‖t‖₁, ‖t‖₂)`.
pub fn norm_ns(t: &Tensor4) -> Rational {
    norm_bns1(t).max_of(norm_bns2(t))
}

/// `Σ_x max_a Σ_y max_b |t(x,a,y,b)|`, the dual of [`norm_bns1`].
pub fn dual_norm1(t: &Tensor4) -> Rational {
    let d = t.dims;
    let mut total = Rational::zero();
    for x in 0..d.n1 {
        let mut over_a = Rational::zero();
        for a in 0..d.k1 {
            let mut over_y = Rational::zero();
            for y in 0..d.n2 {
                let m = (0..d.k2)
                    .map(|b| t.get(x, a, y, b).abs())
                    .fold(Rational::zero(), Rational::max_of);
                over_y += m;
            }
            over_a = over_a.max_of(over_y);
        }
        total += over_a;
    }
    total
}

/// `Σ_y max_b Σ_x max_a |t(x,a,y,b)|`, the dual of [`norm_bns2`].
pub fn dual_norm2(t: &Tensor4) -> Rational {
    let d = t.dims;
    let mut total = Rational::zero();
    for y in 0..d.n2 {
        let mut over_b = Rational::zero();
        for b in 0..d.k2 {
            let mut over_x = Rational::zero();
            for x in 0..d.n1 {
                let m = (0..d.k1)
                    .map(|a| t.get(x, a, y, b).abs())
                    .fold(Rational::zero(), Rational::max_of);
                over_x += m;
            }
            over_b = over_b.max_of(over_x);
        }
        total += over_b;
    }
    total
}

/// Membership in the set of conditional distributions: non-negative entries and
/// every `(x,y)` slice summing to one.
pub fn membership_c(t: &Tensor4) -> bool {
    let d = t.dims;
    t.is_nonnegative()
        && (0..d.n1).all(|x| (0..d.n2).all(|y| t.slice_sum(x, y).is_one()))
}

/// Membership in NS: a conditional distribution whose marginals do not depend
/// on the other party's input.
pub fn membership_ns(t: &Tensor4) -> bool {
    membership_c(t) && has_independent_marginals(t)
}

fn has_independent_marginals(t: &Tensor4) -> bool {
    let d = t.dims;
    // Bob's marginal Σ_a t(x,a,y,b) independent of x
    for y in 0..d.n2 {
        for b in 0..d.k2 {
            let first = t.bob_marginal(0, y, b);
            if (1..d.n1).any(|x| t.bob_marginal(x, y, b) != first) {
                return false;
            }
        }
    }
    // Alice's marginal Σ_b t(x,a,y,b) independent of y
    for x in 0..d.n1 {
        for a in 0..d.k1 {
            let first = t.alice_marginal(x, a, 0);
            if (1..d.n2).any(|y| t.alice_marginal(x, a, y) != first) {
                return false;
            }
        }
    }
    true
}

/// Returns the marginals when `t` lies in the linear space ANS, i.e. its
/// one-party marginals are input-independent and every slice has the same mass.
pub fn membership_ans(t: &Tensor4) -> Option<Marginals> {
    if !has_independent_marginals(t) {
        return None;
    }
    let d = t.dims;
    let total = t.slice_sum(0, 0);
    for x in 0..d.n1 {
        for y in 0..d.n2 {
            if t.slice_sum(x, y) != total {
                return None;
            }
        }
    }
    let alice = (0..d.n1)
        .map(|x| (0..d.k1).map(|a| t.alice_marginal(x, a, 0)).collect())
        .collect();
    let bob = (0..d.n2)
        .map(|y| (0..d.k2).map(|b| t.bob_marginal(0, y, b)).collect())
        .collect();
    Some(Marginals { alice, bob, total })
}

/// Entries `>= 0` kept, the rest zeroed.
pub fn positive_part(t: &Tensor4) -> Tensor4 {
    t.map(|v| if v.is_negative() { Rational::zero() } else { v.clone() })
}

/// Entries `< 0` kept (so the result is `<= 0`), the rest zeroed.
/// `positive_part(t) + negative_part(t) == t`.
pub fn negative_part(t: &Tensor4) -> Tensor4 {
    t.map(|v| if v.is_negative() { v.clone() } else { Rational::zero() })
}

/// Wire format: `{"dims":[n1,k1,n2,k2],"coeffs":["p/q",...]}` in canonical order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TensorJson {
    pub dims: [usize; 4],
    pub coeffs: Vec<Rational>,
}

impl From<&Tensor4> for TensorJson {
    fn from(t: &Tensor4) -> Self {
        let d = t.dims;
        TensorJson {
            dims: [d.n1, d.k1, d.n2, d.k2],
            coeffs: t.coeffs.clone(),
        }
    }
}

impl TryFrom<TensorJson> for Tensor4 {
    type Error = Error;
    fn try_from(j: TensorJson) -> Result<Self> {
        let [n1, k1, n2, k2] = j.dims;
        Tensor4::from_coeffs(Dims::new(n1, k1, n2, k2)?, j.coeffs)
    }
}

impl Serialize for Tensor4 {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TensorJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Tensor4 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = TensorJson::deserialize(d)?;
        Tensor4::try_from(j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn int(n: i64) -> Rational {
        Rational::from_integer(n)
    }

    fn unit(dims: Dims, x: usize, a: usize, y: usize, b: usize) -> Tensor4 {
        let mut t = Tensor4::zeros(dims);
        t.set(x, a, y, b, Rational::one());
        t
    }

    /// `P(a,b|x,y) = [a = y][b = 0]` for N = K = 2: Alice's output reveals Bob's input.
    fn signalling_example() -> Tensor4 {
        Tensor4::from_fn(Dims::square(2, 2).unwrap(), |_x, a, y, b| {
            if a == y && b == 0 {
                int(1)
            } else {
                int(0)
            }
        })
    }

    #[test]
    fn index_layout_and_flip() {
        let d = Dims::new(2, 3, 4, 5).unwrap();
        assert_eq!(d.len(), 120);
        assert_eq!(d.index(0, 0, 0, 1), 1);
        assert_eq!(d.index(0, 0, 1, 0), 5);
        assert_eq!(d.index(0, 1, 0, 0), 20);
        assert_eq!(d.index(1, 0, 0, 0), 60);
        assert_eq!(d.unindex(d.index(1, 2, 3, 4)), (1, 2, 3, 4));

        let t = unit(d, 1, 2, 3, 4);
        let f = flip(&t);
        assert_eq!(f.dims(), Dims::new(4, 5, 2, 3).unwrap());
        assert_eq!(f, unit(f.dims(), 3, 4, 1, 2));
        assert_eq!(flip(&f), t);
    }

    #[test]
    fn pairing_chsh_with_uniform() {
        let d = Dims::square(2, 2).unwrap();
        let chsh = Tensor4::from_fn(d, |x, a, y, b| {
            if (a ^ b) == (x & y) {
                q(1, 4)
            } else {
                int(0)
            }
        });
        let uniform = Tensor4::uniform(d);
        // 8 winning cells of weight 1/4 each against P = 1/4
        assert_eq!(pairing(&chsh, &uniform).unwrap(), q(1, 2));
        assert_eq!(pairing(&Tensor4::zeros(d), &uniform).unwrap(), int(0));
        assert!(pairing(&chsh, &Tensor4::zeros(Dims::square(2, 3).unwrap())).is_err());
    }

    #[test]
    fn norms_of_uniform_and_zero() {
        for (n, k) in [(1, 1), (2, 2), (3, 2), (2, 3)] {
            let d = Dims::square(n, k).unwrap();
            let u = Tensor4::uniform(d);
            assert_eq!(norm_bns1(&u), int(1));
            assert_eq!(norm_bns2(&u), int(1));
            assert_eq!(norm_ns(&u), int(1));
            let z = Tensor4::zeros(d);
            assert_eq!(norm_ns(&z), int(0));
            assert_eq!(dual_norm1(&z), int(0));
            assert_eq!(dual_norm2(&z), int(0));
            assert_eq!(norm_ns(&u.scale(&q(5, 3))), q(5, 3));
        }
    }

    #[test]
    fn signalling_point_has_norm_above_one() {
        let p = signalling_example();
        assert!(membership_c(&p));
        assert!(!membership_ns(&p));
        // x fixed: Σ_a max_y Σ_b P = 1 + 1
        assert_eq!(norm_bns1(&p), int(2));
        assert_eq!(norm_bns2(&p), int(1));
        assert_eq!(norm_ns(&p), int(2));

        // [a = x][b = 0] only correlates Alice's output with her own input: it is
        // the local deterministic point a(x) = x, b(y) = 0.
        let local = Tensor4::from_fn(Dims::square(2, 2).unwrap(), |x, a, _y, b| {
            if a == x && b == 0 {
                int(1)
            } else {
                int(0)
            }
        });
        assert!(membership_ns(&local));
        assert_eq!(norm_ns(&local), int(1));
    }

    #[test]
    fn membership_predicates() {
        let d = Dims::square(2, 2).unwrap();
        let u = Tensor4::uniform(d);
        assert!(membership_c(&u));
        assert!(membership_ns(&u));
        let mut neg = u.clone();
        neg.set(0, 0, 0, 0, q(-1, 4));
        neg.set(0, 1, 0, 1, q(3, 4));
        assert!(!membership_c(&neg));
        let det = Tensor4::deterministic(d, &[1, 0], &[0, 0]).unwrap();
        assert!(membership_ns(&det));
        assert!(!membership_c(&u.scale(&int(2))));
        // PR box
        let pr = Tensor4::from_fn(d, |x, a, y, b| {
            if (a ^ b) == (x & y) {
                q(1, 2)
            } else {
                int(0)
            }
        });
        assert!(membership_ns(&pr));
    }

    #[test]
    fn ans_marginals() {
        let d = Dims::square(2, 3).unwrap();
        let u = Tensor4::uniform(d);
        let m = membership_ans(&u).unwrap();
        assert_eq!(m.total, int(1));
        assert_eq!(m.alice[1][2], q(1, 3));
        let det = Tensor4::deterministic(d, &[2, 0], &[1, 1]).unwrap();
        let diff = &u - &det;
        assert_eq!(membership_ans(&diff).unwrap().total, int(0));
        let mut broken = u.clone();
        broken.set(1, 1, 1, 1, q(1, 2));
        assert!(membership_ans(&broken).is_none());
    }

    #[test]
    fn positive_and_negative_parts() {
        let d = Dims::square(2, 2).unwrap();
        let vals = [3, -1, 0, 2, -5, 4, -2, 0, 1, 1, -1, -3, 0, 7, -4, 2];
        let t = Tensor4::from_coeffs(d, vals.iter().map(|&v| int(v)).collect()).unwrap();
        let p = positive_part(&t);
        let n = negative_part(&t);
        for (i, &v) in vals.iter().enumerate() {
            assert_eq!(p.coeffs()[i], int(v.max(0)));
            assert_eq!(n.coeffs()[i], int(v.min(0)));
        }
        assert_eq!(&p + &n, t);
        let nonneg = t.abs();
        assert_eq!(positive_part(&nonneg), nonneg);
        assert!(negative_part(&nonneg).is_zero());
        assert!(positive_part(&-&nonneg).is_zero());
        assert_eq!(negative_part(&-&nonneg), -&nonneg);
    }

    #[test]
    fn json_roundtrip() {
        let d = Dims::new(1, 2, 2, 1).unwrap();
        let t = Tensor4::from_coeffs(d, vec![q(1, 2), int(-3), q(7, 9), int(0)]).unwrap();
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(s, r#"{"dims":[1,2,2,1],"coeffs":["1/2","-3","7/9","0"]}"#);
        let back: Tensor4 = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<Tensor4>(r#"{"dims":[1,1,1,1],"coeffs":[]}"#).is_err());
    }
}
