//! Constructive decompositions: completion of sub-normalized non-signalling
//! tensors, the split of ANS elements into two NS legs, the row decomposition
//! in NSG, and the maps `T`, `T⁻¹` between ANS and a direct-sum model.
//!
//! Whenever a proof patches a coordinate to fix a normalization, the patch is
//! applied at the last label (`k - 1` in 0-based terms).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::tensor::{self, Dims, Tensor4};

type Matrix = Vec<Vec<Rational>>;

fn row_max_l1(m: &Matrix) -> Rational {
    m.iter()
        .map(|r| r.iter().map(Rational::abs).sum::<Rational>())
        .max()
        .unwrap_or_else(Rational::zero)
}

/// `max_y Σ_b p(x,a,y,b)` for every `(x,a)`.
fn alice_row_maxima(p: &Tensor4) -> Matrix {
    let d = p.dims();
    (0..d.n1)
        .map(|x| {
            (0..d.k1)
                .map(|a| {
                    (0..d.n2)
                        .map(|y| p.alice_marginal(x, a, y))
                        .max()
                        .expect("n2 >= 1")
                })
                .collect()
        })
        .collect()
}

/// `max_x Σ_a p(x,a,y,b)` for every `(y,b)`.
fn bob_row_maxima(p: &Tensor4) -> Matrix {
    let d = p.dims();
    (0..d.n2)
        .map(|y| {
            (0..d.k2)
                .map(|b| (0..d.n1).map(|x| p.bob_marginal(x, y, b)).max().expect("n1 >= 1"))
                .collect()
        })
        .collect()
}

/// Replaces the last entry of every row so that the row sums to `total`.
fn patch_last(mut m: Matrix, total: &Rational) -> Matrix {
    for row in m.iter_mut() {
        let k = row.len();
        let head: Rational = row[..k - 1].iter().sum();
        row[k - 1] = total - &head;
    }
    m
}

/// The bounding marginals used to complete a non-negative `p`: the row maxima
/// of each party, patched at the last label so every row sums to `‖p‖_NS`.
pub fn snos_marginals(p: &Tensor4) -> (Matrix, Matrix) {
    let nu = tensor::norm_ns(p);
    (patch_last(alice_row_maxima(p), &nu), patch_last(bob_row_maxima(p), &nu))
}

/// Completes a non-negative `p` to `P̃ >= p` with `P̃ / ‖p‖_NS ∈ NS`.
///
/// Every `(x,y)` slice of the result sums to `‖p‖_NS`. The zero tensor maps
/// to itself.
pub fn snos_complete(p: &Tensor4) -> Result<Tensor4> {
    if !p.is_nonnegative() {
        return Err(Error::NegativeEntry);
    }
    let (q1, q2) = snos_marginals(p);
    snos_complete_with(p, &q1, &q2)
}

/// The completion for caller-supplied marginals `q1` (Alice, `n1 × k1`) and
/// `q2` (Bob, `n2 × k2`). Requires `Σ_b p <= q1`, `Σ_a p <= q2` and every row of
/// `q1`, `q2` to sum to `‖p‖_NS`. The result has `Σ_b P̃ = q1`, `Σ_a P̃ = q2`.
pub fn snos_complete_with(p: &Tensor4, q1: &Matrix, q2: &Matrix) -> Result<Tensor4> {
    if !p.is_nonnegative() {
        return Err(Error::NegativeEntry);
    }
    let d = p.dims();
    if q1.len() != d.n1 || q1.iter().any(|r| r.len() != d.k1) || q2.len() != d.n2 || q2.iter().any(|r| r.len() != d.k2) {
        return Err(Error::InvalidInput("marginal shapes do not match the tensor".into()));
    }
    let nu = tensor::norm_ns(p);
    if q1.iter().chain(q2).any(|r| r.iter().sum::<Rational>() != nu) {
        return Err(Error::InvalidInput("marginal rows must sum to the NS norm".into()));
    }
    let mut out = p.clone();
    for x in 0..d.n1 {
        for y in 0..d.n2 {
            let s: Vec<Rational> = (0..d.k1).map(|a| &q1[x][a] - p.alice_marginal(x, a, y)).collect();
            let t: Vec<Rational> = (0..d.k2).map(|b| &q2[y][b] - p.bob_marginal(x, y, b)).collect();
            if s.iter().chain(&t).any(Rational::is_negative) {
                return Err(Error::InvalidInput("marginals do not dominate the tensor".into()));
            }
            let u = &nu - p.slice_sum(x, y);
            if u.is_positive() {
                for a in 0..d.k1 {
                    if s[a].is_zero() {
                        continue;
                    }
                    for b in 0..d.k2 {
                        let v = p.get(x, a, y, b) + &(&s[a] * &t[b]) / &u;
                        out.set(x, a, y, b, v);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `r = lam · pos - mu · neg` with `pos, neg ∈ NS`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnsSplit {
    pub lam: Rational,
    pub pos: Tensor4,
    pub mu: Rational,
    pub neg: Tensor4,
}

impl AnsSplit {
    pub fn reconstruct(&self) -> Tensor4 {
        &self.pos.scale(&self.lam) - &self.neg.scale(&self.mu)
    }
}

/// Splits an element of ANS into non-signalling legs weighted by the NS norms
/// of its positive and negative parts, so `lam + mu = ‖r‖_NS` and
/// `lam - mu = z`.
///
/// Each part is completed with marginals built from its row maxima and
/// patched at the last label. A leg with zero weight is the uniform point.
pub fn ans_split(r: &Tensor4) -> Result<AnsSplit> {
    let marg = tensor::membership_ans(r).ok_or(Error::NotInAns)?;
    let d = r.dims();
    let plus = tensor::positive_part(r);
    let minus = tensor::negative_part(r).abs();
    let lam = tensor::norm_ns(&plus);
    let mu = tensor::norm_ns(&minus);

    let leg = |part: &Tensor4, weight: &Rational| -> Result<Tensor4> {
        if weight.is_zero() {
            return Ok(Tensor4::uniform(d));
        }
        let q1 = patch_last(alice_row_maxima(part), weight);
        let q2 = patch_last(bob_row_maxima(part), weight);
        Ok(snos_complete_with(part, &q1, &q2)?.scale(&weight.recip()))
    };
    let split = AnsSplit {
        pos: leg(&plus, &lam)?,
        neg: leg(&minus, &mu)?,
        lam,
        mu,
    };

    if &split.reconstruct() != r {
        return Err(Error::Internal("ANS split does not reconstruct its input".into()));
    }
    if !tensor::membership_ns(&split.pos) || !tensor::membership_ns(&split.neg) {
        return Err(Error::Internal("ANS split leg outside NS".into()));
    }
    if &split.lam + &split.mu != tensor::norm_ns(r) || &split.lam - &split.mu != marg.total {
        return Err(Error::Internal("ANS split weights disagree with the norm".into()));
    }
    Ok(split)
}

/// A real `n × k` matrix whose rows share a common sum.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NsgElement {
    entries: Matrix,
    row_sum: Rational,
}

impl NsgElement {
    pub fn new(entries: Matrix) -> Result<Self> {
        let k = entries.first().map(Vec::len).unwrap_or(0);
        if k == 0 || entries.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidInput("NSG element must be a non-empty rectangular matrix".into()));
        }
        let row_sum: Rational = entries[0].iter().sum();
        if entries.iter().any(|r| r.iter().sum::<Rational>() != row_sum) {
            return Err(Error::NonConstantRowSum);
        }
        Ok(NsgElement { entries, row_sum })
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn row_sum(&self) -> &Rational {
        &self.row_sum
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn k(&self) -> usize {
        self.entries[0].len()
    }

    pub fn is_stochastic(&self) -> bool {
        self.row_sum.is_one() && self.entries.iter().flatten().all(|v| !v.is_negative())
    }
}

/// `max_x Σ_a |r(x|a)|`.
pub fn nsg_norm(r: &NsgElement) -> Rational {
    row_max_l1(&r.entries)
}

/// `r = big · p1 - small · p2` with stochastic `p1`, `p2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NsgSplit {
    pub big: Rational,
    pub small: Rational,
    pub p1: NsgElement,
    pub p2: NsgElement,
}

impl NsgSplit {
    pub fn reconstruct(&self) -> Matrix {
        self.p1
            .entries
            .iter()
            .zip(&self.p2.entries)
            .map(|(r1, r2)| r1.iter().zip(r2).map(|(u, v)| &self.big * u - &self.small * v).collect())
            .collect()
    }
}

/// Decomposes `r` with `big = max_x` (positive mass of row `x`) and
/// `small = max_x` (negative mass of row `x`). Entries below the last label
/// are the rescaled positive (resp. negated negative) entries; the last label
/// absorbs the remainder.
pub fn nsg_decompose(r: &NsgElement) -> Result<NsgSplit> {
    let big = r
        .entries
        .iter()
        .map(|row| row.iter().filter(|v| !v.is_negative()).sum::<Rational>())
        .max()
        .expect("non-empty");
    let small = r
        .entries
        .iter()
        .map(|row| -row.iter().filter(|v| v.is_negative()).sum::<Rational>())
        .max()
        .expect("non-empty");
    let build = |keep: fn(&Rational) -> bool, scale: &Rational, sign: Rational| -> Matrix {
        let rows = r
            .entries
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| {
                        if scale.is_zero() || !keep(v) {
                            Rational::zero()
                        } else {
                            &(v * &sign) / scale
                        }
                    })
                    .collect()
            })
            .collect();
        patch_last(rows, &Rational::one())
    };
    let p1 = NsgElement::new(build(|v| !v.is_negative(), &big, Rational::one()))?;
    let p2 = NsgElement::new(build(Rational::is_negative, &small, -Rational::one()))?;
    let split = NsgSplit { big, small, p1, p2 };
    if split.reconstruct() != r.entries || !split.p1.is_stochastic() || !split.p2.is_stochastic() {
        return Err(Error::Internal("NSG split fails its invariants".into()));
    }
    if &split.big - &split.small != r.row_sum || &split.big + &split.small != nsg_norm(r) {
        return Err(Error::Internal("NSG split weights disagree with the norm".into()));
    }
    Ok(split)
}

/// An element of `BNS ⊕∞ ℓ∞(ℓ₁) ⊕∞ ℓ∞(ℓ₁) ⊕∞ ℝ`: the tensor without its last
/// output labels, the two truncated marginals and the total mass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BmImage {
    pub core: Tensor4,
    pub pa: Matrix,
    pub qb: Matrix,
    pub s: Rational,
}

impl BmImage {
    /// Dimensions of the ANS space this image lives over.
    pub fn preimage_dims(&self) -> Result<Dims> {
        let c = self.core.dims();
        if self.pa.len() != c.n1 || self.pa.iter().any(|r| r.len() != c.k1) {
            return Err(Error::InvalidInput("pa must be n1 × (k1 - 1)".into()));
        }
        if self.qb.len() != c.n2 || self.qb.iter().any(|r| r.len() != c.k2) {
            return Err(Error::InvalidInput("qb must be n2 × (k2 - 1)".into()));
        }
        Dims::new(c.n1, c.k1 + 1, c.n2, c.k2 + 1)
    }

    /// The `⊕∞` norm: the largest of the four component norms.
    pub fn norm(&self) -> Rational {
        tensor::norm_ns(&self.core)
            .max_of(row_max_l1(&self.pa))
            .max_of(row_max_l1(&self.qb))
            .max_of(self.s.abs())
    }
}

/// `T`: keeps the entries with both outputs below the last label, and the
/// marginals and total of `r`. Needs at least two outputs per party.
pub fn map_t(r: &Tensor4) -> Result<BmImage> {
    let marg = tensor::membership_ans(r).ok_or(Error::NotInAns)?;
    let d = r.dims();
    if d.k1 < 2 || d.k2 < 2 {
        return Err(Error::InvalidDims("T needs at least two outputs per party".into()));
    }
    let cd = Dims::new(d.n1, d.k1 - 1, d.n2, d.k2 - 1)?;
    let core = Tensor4::from_fn(cd, |x, a, y, b| r.get(x, a, y, b).clone());
    let pa = marg.alice.iter().map(|row| row[..d.k1 - 1].to_vec()).collect();
    let qb = marg.bob.iter().map(|row| row[..d.k2 - 1].to_vec()).collect();
    Ok(BmImage {
        core,
        pa,
        qb,
        s: marg.total,
    })
}

/// `T⁻¹`, by the four-case formula on the last labels.
pub fn map_t_inv(w: &BmImage) -> Result<Tensor4> {
    let d = w.preimage_dims()?;
    let (ka, kb) = (d.k1 - 1, d.k2 - 1);
    let c = &w.core;
    let row_r = |x: usize, a: usize, y: usize| -> Rational { (0..kb).map(|b| c.get(x, a, y, b)).sum() };
    let col_r = |x: usize, y: usize, b: usize| -> Rational { (0..ka).map(|a| c.get(x, a, y, b)).sum() };
    Ok(Tensor4::from_fn(d, |x, a, y, b| match (a < ka, b < kb) {
        (true, true) => c.get(x, a, y, b).clone(),
        (true, false) => &w.pa[x][a] - &row_r(x, a, y),
        (false, true) => &w.qb[y][b] - &col_r(x, y, b),
        (false, false) => {
            let all_r: Rational = (0..ka).map(|a2| row_r(x, a2, y)).sum();
            let sum_q: Rational = w.qb[y].iter().sum();
            let sum_p: Rational = w.pa[x].iter().sum();
            &w.s + &all_r - sum_q - sum_p
        }
    }))
}

/// First component of `T⁻¹`: the core extended by negated row and column sums.
pub fn alpha1(core: &Tensor4) -> Result<Tensor4> {
    let c = core.dims();
    let d = Dims::new(c.n1, c.k1 + 1, c.n2, c.k2 + 1)?;
    let (ka, kb) = (c.k1, c.k2);
    Ok(Tensor4::from_fn(d, |x, a, y, b| match (a < ka, b < kb) {
        (true, true) => core.get(x, a, y, b).clone(),
        (true, false) => -(0..kb).map(|b2| core.get(x, a, y, b2)).sum::<Rational>(),
        (false, true) => -(0..ka).map(|a2| core.get(x, a2, y, b)).sum::<Rational>(),
        (false, false) => (0..ka).flat_map(|a2| (0..kb).map(move |b2| (a2, b2))).map(|(a2, b2)| core.get(x, a2, y, b2)).sum(),
    }))
}

fn check_target(d: Dims) -> Result<()> {
    if d.k1 < 2 || d.k2 < 2 {
        return Err(Error::InvalidDims("target needs at least two outputs per party".into()));
    }
    Ok(())
}

/// Second component: `pa` placed on Bob's last label.
pub fn alpha2(pa: &Matrix, target: Dims) -> Result<Tensor4> {
    check_target(target)?;
    if pa.len() != target.n1 || pa.iter().any(|r| r.len() != target.k1 - 1) {
        return Err(Error::InvalidInput("pa must be n1 × (k1 - 1)".into()));
    }
    let (ka, kb) = (target.k1 - 1, target.k2 - 1);
    Ok(Tensor4::from_fn(target, |x, a, _y, b| {
        if b < kb {
            Rational::zero()
        } else if a < ka {
            pa[x][a].clone()
        } else {
            -pa[x].iter().sum::<Rational>()
        }
    }))
}

/// Third component: `qb` placed on Alice's last label.
pub fn alpha3(qb: &Matrix, target: Dims) -> Result<Tensor4> {
    check_target(target)?;
    if qb.len() != target.n2 || qb.iter().any(|r| r.len() != target.k2 - 1) {
        return Err(Error::InvalidInput("qb must be n2 × (k2 - 1)".into()));
    }
    let (ka, kb) = (target.k1 - 1, target.k2 - 1);
    Ok(Tensor4::from_fn(target, |_x, a, y, b| {
        if a < ka {
            Rational::zero()
        } else if b < kb {
            qb[y][b].clone()
        } else {
            -qb[y].iter().sum::<Rational>()
        }
    }))
}

/// Fourth component: `s` on the `(last, last)` block.
pub fn alpha4(s: &Rational, target: Dims) -> Result<Tensor4> {
    check_target(target)?;
    let (ka, kb) = (target.k1 - 1, target.k2 - 1);
    Ok(Tensor4::from_fn(target, |_x, a, _y, b| {
        if a == ka && b == kb {
            s.clone()
        } else {
            Rational::zero()
        }
    }))
}

/// `α₁(core) + α₂(pa) + α₃(qb) + α₄(s)`.
pub fn alpha_sum(w: &BmImage) -> Result<Tensor4> {
    let d = w.preimage_dims()?;
    let total = alpha1(&w.core)?
        .try_add(&alpha2(&w.pa, d)?)?
        .try_add(&alpha3(&w.qb, d)?)?
        .try_add(&alpha4(&w.s, d)?)?;
    Ok(total)
}
