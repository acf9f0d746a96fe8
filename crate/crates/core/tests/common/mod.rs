//! Independent oracles used by the integration tests. Nothing here calls the
//! solver or the enumerators under test.

#![allow(dead_code)]

use nsnorm::{Dims, Rational, Relation, Sense, Tensor4};

/// Solves the square system `a x = b` by Gauss–Jordan elimination; `None` if
/// singular.
pub fn solve_square(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = a[col][col].recip();
        for j in col..n {
            a[col][j] = &a[col][j] * &inv;
        }
        b[col] = &b[col] * &inv;
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in col..n {
                    let t = &a[col][j] * &f;
                    a[r][j] = &a[r][j] - &t;
                }
                let t = &b[col] * &f;
                b[r] = &b[r] - &t;
            }
        }
    }
    Some(b)
}

/// A small LP in the form `opt c·x` subject to rows and `x >= 0`.
#[derive(Debug, Clone)]
pub struct SmallLp {
    pub sense: Sense,
    pub c: Vec<Rational>,
    pub rows: Vec<(Vec<Rational>, Relation, Rational)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Oracle {
    Infeasible,
    Unbounded,
    Optimal(Rational),
}

fn dot(u: &[Rational], v: &[Rational]) -> Rational {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn satisfies(rows: &[(Vec<Rational>, Relation, Rational)], x: &[Rational]) -> bool {
    x.iter().all(|v| !v.is_negative())
        && rows.iter().all(|(a, rel, rhs)| {
            let lhs = dot(a, x);
            match rel {
                Relation::Le => lhs <= *rhs,
                Relation::Ge => lhs >= *rhs,
                Relation::Eq => lhs == *rhs,
            }
        })
}

fn subsets(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            f(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, f);
            cur.pop();
        }
    }
    go(0, n, k, &mut Vec::new(), f);
}

/// All vertices of `{x >= 0} ∩ rows`: every choice of `n` tight constraints
/// (rows or bounds) with a unique feasible solution.
fn vertices(n: usize, rows: &[(Vec<Rational>, Relation, Rational)]) -> Vec<Vec<Rational>> {
    let mut cands: Vec<(Vec<Rational>, Rational)> = rows.iter().map(|(a, _, r)| (a.clone(), r.clone())).collect();
    for j in 0..n {
        let mut e = vec![Rational::zero(); n];
        e[j] = Rational::one();
        cands.push((e, Rational::zero()));
    }
    let mut out = Vec::new();
    subsets(cands.len(), n, &mut |idx| {
        let a = idx.iter().map(|&i| cands[i].0.clone()).collect();
        let b = idx.iter().map(|&i| cands[i].1.clone()).collect();
        if let Some(x) = solve_square(a, b) {
            if satisfies(rows, &x) {
                out.push(x);
            }
        }
    });
    out
}

/// Brute-force basis enumeration. The region lies in the orthant so it is
/// pointed: it is empty iff it has no vertex, and the LP is unbounded iff
/// some recession direction (normalized to `Σ d = 1`) improves the objective.
pub fn brute_force_lp(lp: &SmallLp) -> Oracle {
    let n = lp.c.len();
    let verts = vertices(n, &lp.rows);
    if verts.is_empty() {
        return Oracle::Infeasible;
    }
    let signed_c: Vec<Rational> = match lp.sense {
        Sense::Maximize => lp.c.clone(),
        Sense::Minimize => lp.c.iter().map(|v| -v).collect(),
    };
    let mut cone: Vec<(Vec<Rational>, Relation, Rational)> =
        lp.rows.iter().map(|(a, rel, _)| (a.clone(), *rel, Rational::zero())).collect();
    cone.push((vec![Rational::one(); n], Relation::Eq, Rational::one()));
    if vertices(n, &cone).iter().any(|d| dot(&signed_c, d).is_positive()) {
        return Oracle::Unbounded;
    }
    let best = verts.iter().map(|x| dot(&signed_c, x)).max().expect("non-empty");
    Oracle::Optimal(match lp.sense {
        Sense::Maximize => best,
        Sense::Minimize => -best,
    })
}

/// `max |⟨M|A⊗B⟩|` over every pair of deterministic sign-weighted strategies,
/// enumerating both parties in full.
pub fn naive_classical(m: &Tensor4, signed: bool) -> Rational {
    let d = m.dims();
    let ka = if signed { 2 * d.k1 } else { d.k1 };
    let kb = if signed { 2 * d.k2 } else { d.k2 };
    let decode = |mut i: usize, n: usize, k: usize| {
        (0..n)
            .map(|_| {
                let v = i % k;
                i /= k;
                v
            })
            .collect::<Vec<_>>()
    };
    let (na, nb) = (ka.pow(d.n1 as u32), kb.pow(d.n2 as u32));
    let mut best = Rational::zero();
    for ia in 0..na {
        let fa = decode(ia, d.n1, ka);
        for ib in 0..nb {
            let fb = decode(ib, d.n2, kb);
            let mut s = Rational::zero();
            for x in 0..d.n1 {
                for y in 0..d.n2 {
                    let (a, sa) = (fa[x] % d.k1, fa[x] / d.k1);
                    let (b, sb) = (fb[y] % d.k2, fb[y] / d.k2);
                    let v = m.get(x, a, y, b).clone();
                    s += if sa == sb { v } else { -v };
                }
            }
            best = best.max_of(s.abs());
        }
    }
    best
}

/// Every deterministic conditional distribution: one output pair per input pair.
pub fn deterministic_conditionals(d: Dims) -> Vec<Tensor4> {
    let cells = d.n1 * d.n2;
    let per = d.k1 * d.k2;
    let total = per.pow(cells as u32);
    (0..total)
        .map(|mut i| {
            let mut t = Tensor4::zeros(d);
            for x in 0..d.n1 {
                for y in 0..d.n2 {
                    let c = i % per;
                    i /= per;
                    t.set(x, c / d.k2, y, c % d.k2, Rational::one());
                }
            }
            t
        })
        .collect()
}

pub fn dims_cycle(i: usize, max: usize) -> Dims {
    let n = 1 + i % max;
    let k = 1 + (i / max) % max;
    Dims::square(n, k).expect("positive")
}
