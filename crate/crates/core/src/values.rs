//! Game values and the norms that need optimization: classical (local) value by
//! exhaustive enumeration, NS value and the DNS norm by exact LP, plus the
//! correlation-matrix norms and the co-local hull test.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{self, LinearProgram, LpStatus, Relation, Sense, SolverOptions};
use crate::rational::Rational;
use crate::tensor::{self, Dims, Tensor4};

pub const DEFAULT_MAX_STRATEGIES: u128 = 1 << 24;

/// Limits on exhaustive enumeration and LP work. Exceeding a limit is a hard
/// refusal, never an approximation.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    pub max_strategies: u128,
    pub max_pivots: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_strategies: DEFAULT_MAX_STRATEGIES,
            max_pivots: lp::DEFAULT_MAX_PIVOTS,
        }
    }
}

impl Budget {
    pub fn check(&self, required: u128) -> Result<()> {
        if required > self.max_strategies {
            Err(Error::BudgetExceeded {
                required,
                budget: self.max_strategies,
            })
        } else {
            Ok(())
        }
    }

    fn solver(&self) -> SolverOptions {
        SolverOptions {
            max_pivots: self.max_pivots,
        }
    }
}

/// `base^exp`, saturating at `u128::MAX`.
pub(crate) fn saturating_pow(base: u128, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base);
    }
    acc
}

/// A local deterministic strategy with signs: the extreme point
/// `(s_x e_{a(x)})_x ⊗ (t_y e_{b(y)})_y` of the product of unit balls.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeterministicStrategy {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub signs_x: Vec<i8>,
    pub signs_y: Vec<i8>,
}

impl DeterministicStrategy {
    /// `Σ_{x,y} s_x t_y m(x, a(x), y, b(y))`.
    pub fn evaluate(&self, m: &Tensor4) -> Rational {
        let d = m.dims();
        let mut total = Rational::zero();
        for x in 0..d.n1 {
            for y in 0..d.n2 {
                let v = m.get(x, self.a[x], y, self.b[y]);
                if self.signs_x[x] * self.signs_y[y] > 0 {
                    total += v;
                } else {
                    total -= v;
                }
            }
        }
        total
    }

    fn flipped(self) -> Self {
        DeterministicStrategy {
            a: self.b,
            b: self.a,
            signs_x: self.signs_y,
            signs_y: self.signs_x,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalValue {
    pub value: Rational,
    pub strategy: DeterministicStrategy,
}

/// Number of strategy pairs the budget is charged for: `(2k1)^n1 (2k2)^n2`
/// for signed tensors and `k1^n1 k2^n2` when every entry is non-negative.
pub fn classical_strategy_count(d: Dims, nonnegative: bool) -> u128 {
    let f = if nonnegative { 1 } else { 2 };
    saturating_pow((f * d.k1) as u128, d.n1).saturating_mul(saturating_pow((f * d.k2) as u128, d.n2))
}

/// The classical value `max |⟨m, u⊗v⟩|` over local deterministic strategies.
///
/// One party's choices are enumerated (whichever side is smaller) and the other
/// plays a best response. For non-negative tensors all signs are `+1`.
pub fn classical_value(m: &Tensor4, budget: &Budget) -> Result<ClassicalValue> {
    let d = m.dims();
    let nonneg = m.is_nonnegative();
    budget.check(classical_strategy_count(d, nonneg))?;
    let alice_side = side_count(d.k1, d.n1, nonneg);
    let bob_side = side_count(d.k2, d.n2, nonneg);
    if bob_side < alice_side {
        let f = tensor::flip(m);
        let cv = classical_value_alice(&f, nonneg);
        return Ok(ClassicalValue {
            value: cv.value,
            strategy: cv.strategy.flipped(),
        });
    }
    Ok(classical_value_alice(m, nonneg))
}

fn side_count(k: usize, n: usize, nonneg: bool) -> u128 {
    let base = saturating_pow(k as u128, n);
    if nonneg {
        base
    } else {
        base.saturating_mul(saturating_pow(2, n.saturating_sub(1)))
    }
}

/// Index layout: the low digits (base `k1`) pick `a(x)`, the remaining bits
/// pick signs for `x >= 1` (the sign of `x = 0` is fixed by symmetry).
fn decode_alice(mut idx: u128, d: Dims, nonneg: bool, a: &mut [usize], signs: &mut [i8]) {
    for slot in a.iter_mut() {
        *slot = (idx % d.k1 as u128) as usize;
        idx /= d.k1 as u128;
    }
    signs[0] = 1;
    for s in signs.iter_mut().skip(1) {
        *s = if nonneg || idx & 1 == 0 { 1 } else { -1 };
        if !nonneg {
            idx >>= 1;
        }
    }
}

fn classical_value_alice(m: &Tensor4, nonneg: bool) -> ClassicalValue {
    let d = m.dims();
    let total = side_count(d.k1, d.n1, nonneg);
    const CHUNK: u128 = 512;
    let chunks = total.div_ceil(CHUNK);
    let best = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(total);
            let mut a = vec![0usize; d.n1];
            let mut signs = vec![1i8; d.n1];
            let mut w = vec![Rational::zero(); d.k2];
            let mut best: Option<(Rational, u128)> = None;
            for idx in lo..hi {
                decode_alice(idx, d, nonneg, &mut a, &mut signs);
                let mut v = Rational::zero();
                for y in 0..d.n2 {
                    for (b, slot) in w.iter_mut().enumerate() {
                        let mut s = Rational::zero();
                        for x in 0..d.n1 {
                            let e = m.get(x, a[x], y, b);
                            if signs[x] > 0 {
                                s += e;
                            } else {
                                s -= e;
                            }
                        }
                        *slot = s;
                    }
                    v += w.iter().map(Rational::abs).max().expect("k2 >= 1");
                }
                if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                    best = Some((v, idx));
                }
            }
            best.expect("non-empty chunk")
        })
        .reduce_with(|p, q| {
            if q.0 > p.0 || (q.0 == p.0 && q.1 < p.1) {
                q
            } else {
                p
            }
        })
        .expect("at least one strategy");

    let (value, idx) = best;
    let mut a = vec![0usize; d.n1];
    let mut signs_x = vec![1i8; d.n1];
    decode_alice(idx, d, nonneg, &mut a, &mut signs_x);
    // Bob's best response: per y the output with the largest |w|, sign matching
    let mut b = vec![0usize; d.n2];
    let mut signs_y = vec![1i8; d.n2];
    for y in 0..d.n2 {
        let mut best_b = 0;
        let mut best_w = Rational::zero();
        let mut best_abs: Option<Rational> = None;
        for bb in 0..d.k2 {
            let s: Rational = (0..d.n1)
                .map(|x| {
                    let e = m.get(x, a[x], y, bb).clone();
                    if signs_x[x] > 0 {
                        e
                    } else {
                        -e
                    }
                })
                .sum();
            let abs = s.abs();
            if best_abs.as_ref().is_none_or(|ba| abs > *ba) {
                best_abs = Some(abs);
                best_b = bb;
                best_w = s;
            }
        }
        b[y] = best_b;
        signs_y[y] = if best_w.is_negative() { -1 } else { 1 };
    }
    ClassicalValue {
        value,
        strategy: DeterministicStrategy { a, b, signs_x, signs_y },
    }
}

/// Value and maximizer of an LP over a polytope.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NsValue {
    pub value: Rational,
    pub point: Tensor4,
}

/// The NS polytope as LP constraints over `dims.len()` variables (one per
/// coefficient): non-negativity, normalization and both no-signalling
/// families written against the reference inputs `x = 0`, `y = 0`.
pub fn ns_polytope_lp(d: Dims, sense: Sense) -> Result<LinearProgram> {
    let mut lp = LinearProgram::new(d.len(), sense);
    let one = Rational::one;
    for x in 0..d.n1 {
        for y in 0..d.n2 {
            let terms = (0..d.k1).flat_map(|a| (0..d.k2).map(move |b| (d.index(x, a, y, b), one())));
            lp.add_sparse(terms, Relation::Eq, one())?;
        }
    }
    for x in 0..d.n1 {
        for a in 0..d.k1 {
            for y in 1..d.n2 {
                let terms = (0..d.k2).flat_map(|b| [(d.index(x, a, y, b), one()), (d.index(x, a, 0, b), -one())]);
                lp.add_sparse(terms, Relation::Eq, Rational::zero())?;
            }
        }
    }
    for y in 0..d.n2 {
        for b in 0..d.k2 {
            for x in 1..d.n1 {
                let terms = (0..d.k1).flat_map(|a| [(d.index(x, a, y, b), one()), (d.index(0, a, y, b), -one())]);
                lp.add_sparse(terms, Relation::Eq, Rational::zero())?;
            }
        }
    }
    Ok(lp)
}

/// `max_{P ∈ NS} |⟨m, P⟩|`, with an attaining point.
pub fn ns_value(m: &Tensor4) -> Result<NsValue> {
    ns_value_with(m, &Budget::default())
}

pub fn ns_value_with(m: &Tensor4, budget: &Budget) -> Result<NsValue> {
    let d = m.dims();
    let mut best: Option<NsValue> = None;
    for sense in [Sense::Maximize, Sense::Minimize] {
        let mut lp = ns_polytope_lp(d, sense)?;
        lp.set_objective(m.coeffs().to_vec())?;
        let out = lp.solve_with(&budget.solver())?;
        if out.status != LpStatus::Optimal {
            return Err(Error::Internal(format!("NS polytope LP reported {}", out.status)));
        }
        let value = out.value.expect("optimal").abs();
        let point = Tensor4::from_coeffs(d, out.point.expect("optimal"))?;
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(NsValue { value, point });
        }
    }
    let best = best.expect("two solves");
    if !tensor::membership_ns(&best.point) {
        return Err(Error::Internal("NS LP returned a point outside NS".into()));
    }
    Ok(best)
}

/// A split `m = m1 + m2` attaining the DNS norm.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DnsCertificate {
    pub value: Rational,
    pub m1: Tensor4,
    pub m2: Tensor4,
}

impl DnsCertificate {
    /// Recomputes both dual norms by formula and checks the split.
    pub fn verify(&self, m: &Tensor4) -> bool {
        let sum = self.m1.try_add(&self.m2);
        matches!(sum, Ok(s) if &s == m)
            && tensor::dual_norm1(&self.m1) + tensor::dual_norm2(&self.m2) == self.value
    }
}

/// `inf { ‖m1‖₁* + ‖m2‖₂* : m = m1 + m2 }`, solved directly over the split.
///
/// Epigraph lift: `w_{xay} >= ±m1(x,a,y,b)` for all `b`, `v_x >= Σ_y w_{xay}`
/// for all `a`, and the same on the flipped side for `m2 = m - m1`.
/// The objective is `Σ_x v_x + Σ_y v'_y`.
pub fn dns_norm(m: &Tensor4) -> Result<DnsCertificate> {
    dns_norm_with(m, &Budget::default())
}

pub fn dns_norm_with(m: &Tensor4, budget: &Budget) -> Result<DnsCertificate> {
    let d = m.dims();
    let len = d.len();
    // variable layout
    let m1 = |i: usize| i;
    let w = |x: usize, a: usize, y: usize| len + (x * d.k1 + a) * d.n2 + y;
    let v_off = len + d.n1 * d.k1 * d.n2;
    let v = |x: usize| v_off + x;
    let w2_off = v_off + d.n1;
    let w2 = |y: usize, b: usize, x: usize| w2_off + (y * d.k2 + b) * d.n1 + x;
    let v2_off = w2_off + d.n2 * d.k2 * d.n1;
    let v2 = |y: usize| v2_off + y;
    let num_vars = v2_off + d.n2;

    let mut lp = LinearProgram::new(num_vars, Sense::Minimize);
    for i in 0..len {
        lp.set_free(m1(i));
    }
    for x in 0..d.n1 {
        lp.set_objective_coeff(v(x), Rational::one());
    }
    for y in 0..d.n2 {
        lp.set_objective_coeff(v2(y), Rational::one());
    }
    let one = Rational::one;
    for x in 0..d.n1 {
        for a in 0..d.k1 {
            for y in 0..d.n2 {
                for b in 0..d.k2 {
                    let i = d.index(x, a, y, b);
                    // w - m1 >= 0 and w + m1 >= 0
                    lp.add_sparse([(w(x, a, y), one()), (m1(i), -one())], Relation::Ge, Rational::zero())?;
                    lp.add_sparse([(w(x, a, y), one()), (m1(i), one())], Relation::Ge, Rational::zero())?;
                    // w2 >= ±(m - m1)
                    let e = m.coeffs()[i].clone();
                    lp.add_sparse([(w2(y, b, x), one()), (m1(i), one())], Relation::Ge, e.clone())?;
                    lp.add_sparse([(w2(y, b, x), one()), (m1(i), -one())], Relation::Ge, -e)?;
                }
            }
            let terms = std::iter::once((v(x), one())).chain((0..d.n2).map(|y| (w(x, a, y), -one())));
            lp.add_sparse(terms, Relation::Ge, Rational::zero())?;
        }
    }
    for y in 0..d.n2 {
        for b in 0..d.k2 {
            let terms = std::iter::once((v2(y), one())).chain((0..d.n1).map(|x| (w2(y, b, x), -one())));
            lp.add_sparse(terms, Relation::Ge, Rational::zero())?;
        }
    }
    let out = lp.solve_with(&budget.solver())?;
    if out.status != LpStatus::Optimal {
        return Err(Error::Internal(format!("DNS LP reported {}", out.status)));
    }
    let point = out.point.expect("optimal");
    let m1t = Tensor4::from_coeffs(d, point[..len].to_vec())?;
    let m2t = m.try_sub(&m1t)?;
    let cert = DnsCertificate {
        value: out.value.expect("optimal"),
        m1: m1t,
        m2: m2t,
    };
    if !cert.verify(m) {
        return Err(Error::Internal("DNS split does not reproduce its value".into()));
    }
    Ok(cert)
}

/// `sup { ⟨m, P⟩ : ‖P‖_NS <= 1 }`, the dual description of the DNS norm.
///
/// `P = P⁺ - P⁻` with `Σ_b (P⁺ + P⁻)(x,a,y,b) <= m_{xa}` for every `y`,
/// `Σ_a m_{xa} <= 1`, and the flipped family with `m'_{yb}`.
pub fn dns_norm_dual(m: &Tensor4) -> Result<Rational> {
    dns_norm_dual_with(m, &Budget::default()).map(|(v, _)| v)
}

/// Also returns a maximizing `P` in the NS unit ball.
pub fn dns_norm_dual_with(m: &Tensor4, budget: &Budget) -> Result<(Rational, Tensor4)> {
    let d = m.dims();
    let len = d.len();
    let pos = |i: usize| i;
    let neg = |i: usize| len + i;
    let ma = |x: usize, a: usize| 2 * len + x * d.k1 + a;
    let mb_off = 2 * len + d.n1 * d.k1;
    let mb = |y: usize, b: usize| mb_off + y * d.k2 + b;
    let num_vars = mb_off + d.n2 * d.k2;

    let mut lp = LinearProgram::new(num_vars, Sense::Maximize);
    for (i, c) in m.coeffs().iter().enumerate() {
        lp.set_objective_coeff(pos(i), c.clone());
        lp.set_objective_coeff(neg(i), -c);
    }
    let one = Rational::one;
    for x in 0..d.n1 {
        for a in 0..d.k1 {
            for y in 0..d.n2 {
                let terms = (0..d.k2)
                    .flat_map(|b| {
                        let i = d.index(x, a, y, b);
                        [(pos(i), one()), (neg(i), one())]
                    })
                    .chain(std::iter::once((ma(x, a), -one())));
                lp.add_sparse(terms, Relation::Le, Rational::zero())?;
            }
        }
        lp.add_sparse((0..d.k1).map(|a| (ma(x, a), one())), Relation::Le, one())?;
    }
    for y in 0..d.n2 {
        for b in 0..d.k2 {
            for x in 0..d.n1 {
                let terms = (0..d.k1)
                    .flat_map(|a| {
                        let i = d.index(x, a, y, b);
                        [(pos(i), one()), (neg(i), one())]
                    })
                    .chain(std::iter::once((mb(y, b), -one())));
                lp.add_sparse(terms, Relation::Le, Rational::zero())?;
            }
        }
        lp.add_sparse((0..d.k2).map(|b| (mb(y, b), one())), Relation::Le, one())?;
    }
    let out = lp.solve_with(&budget.solver())?;
    if out.status != LpStatus::Optimal {
        return Err(Error::Internal(format!("NS-ball LP reported {}", out.status)));
    }
    let x = out.point.expect("optimal");
    let p = Tensor4::from_coeffs(d, (0..len).map(|i| &x[pos(i)] - &x[neg(i)]).collect())?;
    let value = out.value.expect("optimal");
    if tensor::norm_ns(&p) > Rational::one() || tensor::pairing(m, &p)? != value {
        return Err(Error::Internal("NS-ball maximizer fails its own check".into()));
    }
    Ok((value, p))
}

/// Sub-normalized non-signalling set: non-negative with `‖p‖_NS <= 1`.
pub fn membership_snos(p: &Tensor4) -> bool {
    p.is_nonnegative() && tensor::norm_ns(p) <= Rational::one()
}

/// `min{N₁, N₂, K₁, K₂}`: the bound on `ω_NS / ω_L` for non-negative games.
pub fn lv_bound(d: Dims) -> usize {
    d.n1.min(d.n2).min(d.k1).min(d.k2)
}

/// `ns_value(g) / classical_value(g)` for a non-negative game.
///
/// A ratio above [`lv_bound`] would contradict the upper bound for
/// non-negative games and is reported as an internal error.
pub fn lv_ratio_nonneg(g: &Tensor4, budget: &Budget) -> Result<Rational> {
    if !g.is_nonnegative() {
        return Err(Error::NegativeEntry);
    }
    let cl = classical_value(g, budget)?.value;
    let ns = ns_value_with(g, budget)?.value;
    if cl.is_zero() {
        if ns.is_zero() {
            return Ok(Rational::one());
        }
        return Err(Error::Internal("zero classical value with nonzero NS value".into()));
    }
    let ratio = &ns / &cl;
    if ratio > Rational::from(lv_bound(g.dims())) {
        return Err(Error::Internal(format!("ratio {ratio} exceeds min(N, K)")));
    }
    Ok(ratio)
}

/// A square matrix of correlation coefficients.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    entries: Vec<Vec<Rational>>,
}

impl CorrelationMatrix {
    pub fn new(entries: Vec<Vec<Rational>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("correlation matrix must be square and non-empty".into()));
        }
        Ok(CorrelationMatrix { entries })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Result<Self> {
        Self::new((0..n).map(|i| (0..n).map(|j| f(i, j)).collect()).collect())
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Vec<Rational>] {
        &self.entries
    }
}

/// `Σ |T_ij|`.
pub fn corr_pi_norm(t: &CorrelationMatrix) -> Rational {
    t.entries.iter().flatten().map(Rational::abs).sum()
}

/// `max_{ε, δ ∈ {±1}ⁿ} Σ ε_i δ_j T_ij`, computed as `max_ε Σ_j |Σ_i ε_i T_ij|`
/// with `ε_0 = +1`.
pub fn corr_eps_norm(t: &CorrelationMatrix, budget: &Budget) -> Result<Rational> {
    let n = t.n();
    let cases = saturating_pow(2, n - 1);
    budget.check(cases)?;
    let best = (0..cases)
        .into_par_iter()
        .map(|mask| {
            (0..n)
                .map(|j| {
                    let s: Rational = (0..n)
                        .map(|i| {
                            let neg = i > 0 && (mask >> (i - 1)) & 1 == 1;
                            if neg {
                                -&t.entries[i][j]
                            } else {
                                t.entries[i][j].clone()
                            }
                        })
                        .sum();
                    s.abs()
                })
                .sum::<Rational>()
        })
        .max()
        .expect("at least one sign pattern");
    Ok(best)
}

/// `‖T‖_π / ‖T‖_ε`. Errors if the ratio breaks `ratio² <= 2n`.
pub fn corr_lv_ratio(t: &CorrelationMatrix, budget: &Budget) -> Result<Rational> {
    let eps = corr_eps_norm(t, budget)?;
    if eps.is_zero() {
        return Err(Error::InvalidInput("zero correlation matrix has no ratio".into()));
    }
    let ratio = corr_pi_norm(t) / eps;
    if ratio.pow(2) > Rational::from(2 * t.n()) {
        return Err(Error::Internal(format!("ratio {ratio} exceeds sqrt(2n)")));
    }
    Ok(ratio)
}

/// All local deterministic points for `d`, Alice's function varying slowest.
pub fn local_deterministic_points(d: Dims) -> Vec<Tensor4> {
    let na = saturating_pow(d.k1 as u128, d.n1) as usize;
    let nb = saturating_pow(d.k2 as u128, d.n2) as usize;
    let digits = |mut i: usize, k: usize, n: usize| -> Vec<usize> {
        (0..n)
            .map(|_| {
                let v = i % k;
                i /= k;
                v
            })
            .collect()
    };
    let mut out = Vec::with_capacity(na * nb);
    for i in 0..na {
        let a = digits(i, d.k1, d.n1);
        for j in 0..nb {
            let b = digits(j, d.k2, d.n2);
            out.push(Tensor4::deterministic(d, &a, &b).expect("digits in range"));
        }
    }
    out
}

/// Budget charged for a co-local hull test: `(2k1)^n1 (2k2)^n2`.
pub fn co_local_vertex_count(d: Dims) -> u128 {
    classical_strategy_count(d, false)
}

/// Is `r / scale` in `co(L ∪ -L)`?
pub fn membership_co_local(r: &Tensor4, scale: &Rational, budget: &Budget) -> Result<bool> {
    if !scale.is_positive() {
        return Err(Error::InvalidInput("scale must be positive".into()));
    }
    let d = r.dims();
    budget.check(co_local_vertex_count(d))?;
    let point: Vec<Rational> = r.coeffs().iter().map(|c| c / scale).collect();
    let mut vertices: Vec<Vec<Rational>> = Vec::new();
    for p in local_deterministic_points(d) {
        vertices.push(p.coeffs().iter().map(|c| -c).collect());
        vertices.push(p.into_coeffs());
    }
    Ok(lp::membership_in_hull(&point, &vertices)?)
}

/// The least `t` with `r ∈ t · co(L ∪ -L)`; `None` if `r` is outside the
/// span of the local points.
pub fn co_local_gauge(r: &Tensor4, budget: &Budget) -> Result<Option<Rational>> {
    let d = r.dims();
    budget.check(co_local_vertex_count(d))?;
    let vertices: Vec<Vec<Rational>> = local_deterministic_points(d).into_iter().map(Tensor4::into_coeffs).collect();
    Ok(lp::symmetric_hull_gauge(r.coeffs(), &vertices)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn chsh_game() -> Tensor4 {
        Tensor4::from_fn(Dims::square(2, 2).unwrap(), |x, a, y, b| {
            if (a ^ b) == (x & y) {
                q(1, 4)
            } else {
                Rational::zero()
            }
        })
    }

    fn pr_box() -> Tensor4 {
        Tensor4::from_fn(Dims::square(2, 2).unwrap(), |x, a, y, b| {
            if (a ^ b) == (x & y) {
                q(1, 2)
            } else {
                Rational::zero()
            }
        })
    }

    /// `M = 1` iff `b = x` and `y = a = 0`, with `N = K`.
    fn sharpness_witness(n: usize) -> Tensor4 {
        Tensor4::from_fn(Dims::square(n, n).unwrap(), |x, a, y, b| {
            if b == x && y == 0 && a == 0 {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
    }

    /// Brute force over every pair of signed deterministic strategies.
    fn classical_oracle(m: &Tensor4) -> Rational {
        let d = m.dims();
        let na = d.k1.pow(d.n1 as u32) * (1 << d.n1);
        let nb = d.k2.pow(d.n2 as u32) * (1 << d.n2);
        let mut best = Rational::zero();
        for i in 0..na {
            for j in 0..nb {
                let (mut ii, mut jj) = (i, j);
                let a: Vec<usize> = (0..d.n1).map(|_| { let v = ii % d.k1; ii /= d.k1; v }).collect();
                let sa: Vec<i64> = (0..d.n1).map(|_| { let v = if ii % 2 == 0 { 1 } else { -1 }; ii /= 2; v }).collect();
                let b: Vec<usize> = (0..d.n2).map(|_| { let v = jj % d.k2; jj /= d.k2; v }).collect();
                let sb: Vec<i64> = (0..d.n2).map(|_| { let v = if jj % 2 == 0 { 1 } else { -1 }; jj /= 2; v }).collect();
                let mut s = Rational::zero();
                for x in 0..d.n1 {
                    for y in 0..d.n2 {
                        s += m.get(x, a[x], y, b[y]) * Rational::from_integer(sa[x] * sb[y]);
                    }
                }
                best = best.max_of(s.abs());
            }
        }
        best
    }

    #[test]
    fn chsh_values() {
        let g = chsh_game();
        let b = Budget::default();
        let cv = classical_value(&g, &b).unwrap();
        assert_eq!(cv.value, q(3, 4));
        assert_eq!(cv.strategy.evaluate(&g).abs(), q(3, 4));
        assert_eq!(classical_oracle(&g), q(3, 4));
        let ns = ns_value(&g).unwrap();
        assert_eq!(ns.value, Rational::one());
        assert_eq!(tensor::pairing(&g, &pr_box()).unwrap(), Rational::one());
        assert_eq!(dns_norm(&g).unwrap().value, Rational::one());
        assert_eq!(dns_norm_dual(&g).unwrap(), Rational::one());
        assert_eq!(lv_ratio_nonneg(&g, &b).unwrap(), q(4, 3));
    }

    #[test]
    fn signed_classical_matches_oracle() {
        let d = Dims::new(2, 2, 3, 2).unwrap();
        let m = Tensor4::from_fn(d, |x, a, y, b| q(((x * 7 + a * 5 + y * 3 + b * 11) % 9) as i64 - 4, 3));
        let cv = classical_value(&m, &Budget::default()).unwrap();
        assert_eq!(cv.value, classical_oracle(&m));
        assert_eq!(cv.strategy.evaluate(&m).abs(), cv.value);
        // the flipped tensor takes the other enumeration branch
        let cf = classical_value(&tensor::flip(&m), &Budget::default()).unwrap();
        assert_eq!(cf.value, cv.value);
    }

    #[test]
    fn sharpness_witness_values() {
        for n in 2..=4 {
            let m = sharpness_witness(n);
            assert_eq!(tensor::dual_norm1(&m), Rational::from(n));
            assert_eq!(tensor::dual_norm2(&m), Rational::one());
            assert_eq!(classical_value(&m, &Budget::default()).unwrap().value, Rational::one());
        }
        let m = sharpness_witness(2);
        assert!(dns_norm(&m).unwrap().value <= Rational::one());
    }

    #[test]
    fn identity_permutation_game() {
        for n in 1..=3 {
            let d = Dims::square(n, n).unwrap();
            let m = Tensor4::from_fn(d, |_, a, _, b| if a == b { Rational::one() } else { Rational::zero() });
            let b = Budget::default();
            assert_eq!(classical_value(&m, &b).unwrap().value, Rational::from(n * n));
            assert_eq!(ns_value(&m).unwrap().value, Rational::from(n * n));
            assert_eq!(lv_ratio_nonneg(&m, &b).unwrap(), Rational::one());
        }
    }

    #[test]
    fn zero_tensor() {
        let z = Tensor4::zeros(Dims::square(2, 2).unwrap());
        assert_eq!(ns_value(&z).unwrap().value, Rational::zero());
        let c = dns_norm(&z).unwrap();
        assert_eq!(c.value, Rational::zero());
        assert!(c.m1.is_zero() && c.m2.is_zero());
        assert_eq!(dns_norm_dual(&z).unwrap(), Rational::zero());
    }

    #[test]
    fn budget_refusal() {
        let m = chsh_game();
        let tight = Budget {
            max_strategies: 15,
            ..Budget::default()
        };
        assert!(matches!(
            classical_value(&m, &tight),
            Err(Error::BudgetExceeded { required: 16, budget: 15 })
        ));
        let signed = m.map(|v| -v);
        let b = Budget {
            max_strategies: 255,
            ..Budget::default()
        };
        assert!(matches!(classical_value(&signed, &b), Err(Error::BudgetExceeded { required: 256, .. })));
    }

    #[test]
    fn snos_membership() {
        let u = Tensor4::uniform(Dims::square(2, 3).unwrap());
        assert!(membership_snos(&u));
        assert!(!membership_snos(&u.scale(&Rational::from(2))));
        assert!(membership_snos(&u.scale(&q(1, 2))));
    }

    #[test]
    fn correlation_norms() {
        let b = Budget::default();
        let chsh = CorrelationMatrix::from_fn(2, |i, j| if i == 1 && j == 1 { -Rational::one() } else { Rational::one() }).unwrap();
        assert_eq!(corr_pi_norm(&chsh), Rational::from(4));
        assert_eq!(corr_eps_norm(&chsh, &b).unwrap(), Rational::from(2));
        assert_eq!(corr_lv_ratio(&chsh, &b).unwrap(), Rational::from(2));

        for n in 1..=5 {
            let id = CorrelationMatrix::from_fn(n, |i, j| if i == j { Rational::one() } else { Rational::zero() }).unwrap();
            assert_eq!(corr_pi_norm(&id), Rational::from(n));
            assert_eq!(corr_eps_norm(&id, &b).unwrap(), Rational::from(n));
            let ones = CorrelationMatrix::from_fn(n, |_, _| Rational::one()).unwrap();
            assert_eq!(corr_pi_norm(&ones), Rational::from(n * n));
            assert_eq!(corr_lv_ratio(&ones, &b).unwrap(), Rational::one());
        }
        assert!(CorrelationMatrix::new(vec![vec![Rational::one()], vec![]]).is_err());
    }

    #[test]
    fn co_local_membership() {
        let d = Dims::square(2, 2).unwrap();
        let b = Budget::default();
        let det = Tensor4::deterministic(d, &[0, 1], &[1, 1]).unwrap();
        assert!(membership_co_local(&det, &Rational::one(), &b).unwrap());
        assert!(!membership_co_local(&pr_box(), &Rational::one(), &b).unwrap());
        assert!(membership_co_local(&pr_box(), &Rational::from(18), &b).unwrap());
        // the PR box sits exactly at gauge 2 in co(L ∪ -L)
        let g = co_local_gauge(&pr_box(), &b).unwrap().unwrap();
        assert!(g > Rational::one());
        assert!(membership_co_local(&pr_box(), &g, &b).unwrap());
        assert!(!membership_co_local(&pr_box(), &(&g * &q(999, 1000)), &b).unwrap());
        // just beyond a vertex on the boundary
        assert!(!membership_co_local(&det.scale(&q(1001, 1000)), &Rational::one(), &b).unwrap());
    }
}
