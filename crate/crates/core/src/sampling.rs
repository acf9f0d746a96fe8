//! Seeded random generators for tensors, polytope points and matrices.
//!
//! All randomness flows from [`rng`], a ChaCha8 stream keyed by a 64-bit seed,
//! so results are bit-reproducible across platforms. Independent streams for
//! trial `i` of an experiment with seed `s` use [`sub_seed`]`(s, i)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, LpStatus, Relation, Sense};
use crate::rational::Rational;
use crate::tensor::{Dims, Tensor4};
use crate::values::{self, CorrelationMatrix};

pub type Prng = ChaCha8Rng;

pub fn rng(seed: u64) -> Prng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for the `index`-th independent stream derived from `seed`: the
/// SplitMix64 output at state `seed + (index + 1) · 0x9E3779B97F4A7C15`.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    mix64(seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// A uniform permutation of `0..n` by Fisher–Yates.
pub fn random_permutation<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        p.swap(i, j);
    }
    p
}

/// `p / q` with `p ∈ [-max_num, max_num]`, `q ∈ [1, max_den]`.
pub fn random_rational<R: Rng>(rng: &mut R, max_num: i64, max_den: i64) -> Rational {
    Rational::new(rng.gen_range(-max_num..=max_num), rng.gen_range(1..=max_den))
}

/// Non-negative entries `p / q` with `p ∈ [0, 9]`, `q ∈ [1, 4]`; roughly a
/// quarter of the entries are zero.
pub fn random_nonneg_tensor<R: Rng>(rng: &mut R, d: Dims) -> Tensor4 {
    Tensor4::from_fn(d, |_, _, _, _| {
        if rng.gen_range(0..4) == 0 {
            Rational::zero()
        } else {
            Rational::new(rng.gen_range(0..=9), rng.gen_range(1..=4))
        }
    })
}

/// Entries with numerator in `[-9, 9]` and denominator in `[1, 4]`.
pub fn random_signed_tensor<R: Rng>(rng: &mut R, d: Dims) -> Tensor4 {
    Tensor4::from_fn(d, |_, _, _, _| random_rational(rng, 9, 4))
}

/// Positive weights summing to one.
pub fn random_convex_weights<R: Rng>(rng: &mut R, m: usize) -> Vec<Rational> {
    let raw: Vec<i64> = (0..m).map(|_| rng.gen_range(1..=12)).collect();
    let total: i64 = raw.iter().sum();
    raw.into_iter().map(|w| Rational::new(w, total)).collect()
}

fn mixture(points: &[Tensor4], weights: &[Rational]) -> Tensor4 {
    let mut acc = Tensor4::zeros(points[0].dims());
    for (p, w) in points.iter().zip(weights) {
        acc = &acc + &p.scale(w);
    }
    acc
}

/// A local deterministic point with uniformly random response functions.
pub fn random_local_deterministic<R: Rng>(rng: &mut R, d: Dims) -> Tensor4 {
    let a: Vec<usize> = (0..d.n1).map(|_| rng.gen_range(0..d.k1)).collect();
    let b: Vec<usize> = (0..d.n2).map(|_| rng.gen_range(0..d.k2)).collect();
    Tensor4::deterministic(d, &a, &b).expect("in range")
}

/// A deterministic conditional distribution: every `(x, y)` gets its own
/// output pair. Usually signalling.
pub fn random_deterministic_conditional<R: Rng>(rng: &mut R, d: Dims) -> Tensor4 {
    let mut t = Tensor4::zeros(d);
    for x in 0..d.n1 {
        for y in 0..d.n2 {
            let (a, b) = (rng.gen_range(0..d.k1), rng.gen_range(0..d.k2));
            t.set(x, a, y, b, Rational::one());
        }
    }
    t
}

fn random_objective<R: Rng>(rng: &mut R, len: usize) -> Vec<Rational> {
    (0..len).map(|_| Rational::from_integer(rng.gen_range(-20..=20))).collect()
}

/// A vertex of the NS polytope maximizing a random integer objective.
pub fn random_ns_vertex<R: Rng>(rng: &mut R, d: Dims) -> Result<Tensor4> {
    let mut lp = values::ns_polytope_lp(d, Sense::Maximize)?;
    lp.set_objective(random_objective(rng, d.len()))?;
    let out = lp.solve()?;
    if out.status != LpStatus::Optimal {
        return Err(Error::Internal(format!("NS vertex LP reported {}", out.status)));
    }
    Tensor4::from_coeffs(d, out.point.expect("optimal"))
}

/// A point of `C`, drawn from one of four families: mixtures of local
/// deterministic points, of deterministic conditionals, of both, or a mixture
/// of an NS vertex with local points.
pub fn random_point_in_c<R: Rng>(rng: &mut R, d: Dims) -> Result<Tensor4> {
    let m = rng.gen_range(1..=3);
    let points: Vec<Tensor4> = match rng.gen_range(0..4) {
        0 => (0..m).map(|_| random_local_deterministic(rng, d)).collect(),
        1 => (0..m).map(|_| random_deterministic_conditional(rng, d)).collect(),
        2 => {
            let mut v: Vec<Tensor4> = (0..m).map(|_| random_local_deterministic(rng, d)).collect();
            v.push(random_deterministic_conditional(rng, d));
            v
        }
        _ => {
            let mut v = vec![random_ns_vertex(rng, d)?];
            v.extend((0..m - 1).map(|_| random_local_deterministic(rng, d)));
            v
        }
    };
    let w = random_convex_weights(rng, points.len());
    Ok(mixture(&points, &w))
}

/// A non-negative tensor with `‖P‖_NS <= 1`: a random non-negative tensor
/// rescaled to a random norm in `(0, 1]`, or a sub-normalized NS point with
/// some mass removed.
pub fn random_snos_point<R: Rng>(rng: &mut R, d: Dims) -> Result<Tensor4> {
    let target = Rational::new(rng.gen_range(1..=6), 6);
    if rng.gen_bool(0.5) {
        let mut t = random_nonneg_tensor(rng, d);
        if t.is_zero() {
            t = Tensor4::uniform(d);
        }
        let nu = crate::tensor::norm_ns(&t);
        Ok(t.scale(&(&target / &nu)))
    } else {
        let p = random_point_in_ns(rng, d)?;
        // thin out entries: anything dominated by an NS point stays in SNOS
        Ok(p.map(|v| if rng.gen_range(0..3) == 0 { Rational::zero() } else { v * &target }))
    }
}

/// A point of NS: a mixture of an NS vertex with local deterministic points.
pub fn random_point_in_ns<R: Rng>(rng: &mut R, d: Dims) -> Result<Tensor4> {
    let mut points = vec![random_ns_vertex(rng, d)?];
    points.extend((0..rng.gen_range(0..=2)).map(|_| random_local_deterministic(rng, d)));
    let w = random_convex_weights(rng, points.len());
    Ok(mixture(&points, &w))
}

/// The unit ball of ANS as an LP over `(R⁺, R⁻, m, m')`: ANS equalities on
/// `R = R⁺ - R⁻` and the NS-norm epigraph on `R⁺ + R⁻`.
fn bans_lp(d: Dims) -> Result<LinearProgram> {
    let len = d.len();
    let pos = |i: usize| i;
    let neg = |i: usize| len + i;
    let ma = |x: usize, a: usize| 2 * len + x * d.k1 + a;
    let mb_off = 2 * len + d.n1 * d.k1;
    let mb = |y: usize, b: usize| mb_off + y * d.k2 + b;
    let mut lp = LinearProgram::new(mb_off + d.n2 * d.k2, Sense::Maximize);
    let one = Rational::one;
    let signed = |i: usize, s: Rational| [(pos(i), s.clone()), (neg(i), -s)];
    // constant slice mass
    for x in 0..d.n1 {
        for y in 0..d.n2 {
            if x == 0 && y == 0 {
                continue;
            }
            let terms = (0..d.k1).flat_map(|a| (0..d.k2).map(move |b| (a, b))).flat_map(|(a, b)| {
                signed(d.index(x, a, y, b), one()).into_iter().chain(signed(d.index(0, a, 0, b), -one()))
            });
            lp.add_sparse(terms, Relation::Eq, Rational::zero())?;
        }
    }
    for x in 0..d.n1 {
        for a in 0..d.k1 {
            for y in 1..d.n2 {
                let terms = (0..d.k2).flat_map(|b| {
                    signed(d.index(x, a, y, b), one()).into_iter().chain(signed(d.index(x, a, 0, b), -one()))
                });
                lp.add_sparse(terms, Relation::Eq, Rational::zero())?;
            }
        }
    }
    for y in 0..d.n2 {
        for b in 0..d.k2 {
            for x in 1..d.n1 {
                let terms = (0..d.k1).flat_map(|a| {
                    signed(d.index(x, a, y, b), one()).into_iter().chain(signed(d.index(0, a, y, b), -one()))
                });
                lp.add_sparse(terms, Relation::Eq, Rational::zero())?;
            }
        }
    }
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
    Ok(lp)
}

/// A boundary point of the ANS unit ball maximizing a random objective.
pub fn random_bans_vertex<R: Rng>(rng: &mut R, d: Dims) -> Result<Tensor4> {
    let len = d.len();
    let mut lp = bans_lp(d)?;
    for (i, c) in random_objective(rng, len).into_iter().enumerate() {
        lp.set_objective_coeff(len + i, -&c);
        lp.set_objective_coeff(i, c);
    }
    let out = lp.solve()?;
    if out.status != LpStatus::Optimal {
        return Err(Error::Internal(format!("ANS ball LP reported {}", out.status)));
    }
    let x = out.point.expect("optimal");
    Tensor4::from_coeffs(d, (0..len).map(|i| &x[i] - &x[len + i]).collect())
}

/// A point of the ANS unit ball: a vertex of the LP above, a mixture of two or
/// three such vertices, or one scaled towards the origin.
pub fn random_bans_point<R: Rng>(rng: &mut R, d: Dims) -> Result<Tensor4> {
    match rng.gen_range(0..3) {
        0 => random_bans_vertex(rng, d),
        1 => {
            let m = rng.gen_range(2..=3);
            let pts = (0..m).map(|_| random_bans_vertex(rng, d)).collect::<Result<Vec<_>>>()?;
            let w = random_convex_weights(rng, m);
            Ok(mixture(&pts, &w))
        }
        _ => {
            let t = Rational::new(rng.gen_range(1..=4), 4);
            Ok(random_bans_vertex(rng, d)?.scale(&t))
        }
    }
}

/// A generic element of ANS: a signed rational combination of local
/// deterministic points (these span ANS).
pub fn random_ans_point<R: Rng>(rng: &mut R, d: Dims) -> Tensor4 {
    let m = rng.gen_range(1..=d.len().min(6));
    let mut acc = Tensor4::zeros(d);
    for _ in 0..m {
        let c = random_rational(rng, 6, 5);
        acc = &acc + &random_local_deterministic(rng, d).scale(&c);
    }
    acc
}

/// Entries with numerator in `[-9, 9]` and denominator in `[1, 4]`, not all zero.
pub fn random_correlation_matrix<R: Rng>(rng: &mut R, n: usize) -> CorrelationMatrix {
    loop {
        let m = CorrelationMatrix::from_fn(n, |_, _| random_rational(rng, 9, 4)).expect("square");
        if m.entries().iter().flatten().any(|v| !v.is_zero()) {
            return m;
        }
    }
}

/// A uniformly random `±1` matrix.
pub fn random_sign_matrix<R: Rng>(rng: &mut R, n: usize) -> CorrelationMatrix {
    CorrelationMatrix::from_fn(n, |_, _| if rng.gen_bool(0.5) { Rational::one() } else { -Rational::one() })
        .expect("square")
}
