//! Random permutation games and XOR-d games, their values, and the seeded
//! experiments built on them.

use std::fmt::Write as _;

use num_bigint::BigInt;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::sampling;
use crate::tensor::{self, Dims, Tensor4};
use crate::values::{self, saturating_pow, Budget, CorrelationMatrix, DeterministicStrategy};

/// `n²` permutations `σ_{xy}` of `0..n`; winning means `b = σ_{xy}(a)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermGame {
    pub n: usize,
    pub sigmas: Vec<Vec<Vec<usize>>>,
    pub seed: u64,
}

impl PermGame {
    pub fn new(n: usize, sigmas: Vec<Vec<Vec<usize>>>, seed: u64) -> Result<Self> {
        let g = PermGame { n, sigmas, seed };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n;
        if n == 0 {
            return Err(Error::InvalidInput("n must be positive".into()));
        }
        if self.sigmas.len() != n || self.sigmas.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("sigmas must be an n × n array".into()));
        }
        for s in self.sigmas.iter().flatten() {
            let mut seen = vec![false; n];
            if s.len() != n || s.iter().any(|&v| v >= n || std::mem::replace(&mut seen[v], true)) {
                return Err(Error::InvalidInput("every sigma must be a permutation of 0..n".into()));
            }
        }
        Ok(())
    }
}

/// `n²` independent uniform permutations from the stream seeded by `seed`,
/// drawn in `(x, y)` row-major order.
pub fn gen_perm_game(n: usize, seed: u64) -> Result<PermGame> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let mut rng = sampling::rng(seed);
    let sigmas = (0..n)
        .map(|_| (0..n).map(|_| sampling::random_permutation(&mut rng, n)).collect())
        .collect();
    Ok(PermGame { n, sigmas, seed })
}

/// `M(x, j, y, b) = 1` iff `b = σ_{xy}(j)`.
pub fn perm_game_tensor(g: &PermGame) -> Tensor4 {
    let n = g.n;
    let d = Dims::square(n, n).expect("n >= 1");
    Tensor4::from_fn(d, |x, a, y, b| {
        if g.sigmas[x][y][a] == b {
            Rational::one()
        } else {
            Rational::zero()
        }
    })
}

/// The NS value `n²` with its witness `P = M / n`, both checked.
pub fn perm_game_ns_value(g: &PermGame) -> Result<(Rational, Tensor4)> {
    let m = perm_game_tensor(g);
    let p = m.scale(&Rational::new(1, g.n as i64));
    let value = tensor::pairing(&m, &p)?;
    let n2 = Rational::from(g.n * g.n);
    if !tensor::membership_ns(&p) || value != n2 {
        return Err(Error::Internal("permutation game witness failed".into()));
    }
    Ok((value, p))
}

/// The number of Alice strategies, `n^n`.
pub fn perm_game_strategy_count(n: usize) -> u128 {
    saturating_pow(n as u128, n)
}

/// Value of Alice's strategy `a` when Bob best-responds, with Bob's outputs
/// (lowest label on ties) written into `b`.
fn perm_strategy_value(g: &PermGame, a: &[usize], counts: &mut [u32], b: &mut [usize]) -> u64 {
    let n = g.n;
    let mut total = 0u64;
    for y in 0..n {
        counts.fill(0);
        for x in 0..n {
            counts[g.sigmas[x][y][a[x]]] += 1;
        }
        let mut best = 0;
        for k in 1..n {
            if counts[k] > counts[best] {
                best = k;
            }
        }
        b[y] = best;
        total += counts[best] as u64;
    }
    total
}

/// `max_a Σ_y max_b #{x : σ_{xy}(a(x)) = b}` by enumerating `a` in odometer
/// order (`a(0)` fastest). Ties go to the earliest strategy.
pub fn perm_game_classical_value(g: &PermGame, budget: &Budget) -> Result<(u64, DeterministicStrategy)> {
    g.validate()?;
    let n = g.n;
    let total = perm_game_strategy_count(n);
    budget.check(total)?;
    let decode = |mut idx: u128, a: &mut [usize]| {
        for slot in a.iter_mut() {
            *slot = (idx % n as u128) as usize;
            idx /= n as u128;
        }
    };
    const CHUNK: u128 = 4096;
    let (value, idx) = (0..total.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut a = vec![0usize; n];
            let mut b = vec![0usize; n];
            let mut counts = vec![0u32; n];
            let mut best = (0u64, u128::MAX);
            for idx in c * CHUNK..((c + 1) * CHUNK).min(total) {
                decode(idx, &mut a);
                let v = perm_strategy_value(g, &a, &mut counts, &mut b);
                if v > best.0 || best.1 == u128::MAX {
                    best = (v, idx);
                }
            }
            best
        })
        .reduce_with(|p, q| if q.0 > p.0 || (q.0 == p.0 && q.1 < p.1) { q } else { p })
        .expect("at least one strategy");
    let mut a = vec![0usize; n];
    let mut b = vec![0usize; n];
    decode(idx, &mut a);
    let v = perm_strategy_value(g, &a, &mut vec![0; n], &mut b);
    debug_assert_eq!(v, value);
    Ok((
        value,
        DeterministicStrategy {
            a,
            b,
            signs_x: vec![1; n],
            signs_y: vec![1; n],
        },
    ))
}

/// Value of the constant strategy `a ≡ 0` with Bob's best response; a lower
/// bound on the classical value.
pub fn perm_game_greedy_value(g: &PermGame) -> u64 {
    let n = g.n;
    perm_strategy_value(g, &vec![0; n], &mut vec![0; n], &mut vec![0; n])
}

/// `[lo, hi]` containing `ln n`, from `terms` terms of
/// `ln n = 2 Σ_k z^{2k+1} / (2k+1)` with `z = (n-1)/(n+1)` and the geometric
/// tail bound `2 z^{2m+1} / ((2m+1)(1 - z²))`.
pub fn ln_interval(n: u64, terms: usize) -> (Rational, Rational) {
    assert!(n >= 1, "ln of zero");
    let z = Rational::from_bigints(BigInt::from(n - 1), BigInt::from(n + 1));
    let z2 = &z * &z;
    let two = Rational::from(2);
    let mut power = z.clone();
    let mut sum = Rational::zero();
    for k in 0..terms {
        sum += &power / &Rational::from(2 * k + 1);
        power *= &z2;
    }
    let lo = &sum * &two;
    let tail = &(&power * &two) / &(Rational::from(2 * terms + 1) * (Rational::one() - z2));
    let hi = &lo + &tail;
    (lo, hi)
}

/// `[lo, hi]` containing `(3 ln n - 1) n`.
pub fn chernoff_threshold_interval(n: u64, terms: usize) -> (Rational, Rational) {
    let (lo, hi) = ln_interval(n, terms);
    let f = |l: Rational| (l * Rational::from(3) - Rational::one()) * Rational::from(n as usize);
    (f(lo), f(hi))
}

/// Decides `omega < (3 ln n - 1) n` exactly, refining the interval on `ln n`
/// until it separates.
pub fn below_chernoff_threshold(n: u64, omega: &Rational) -> bool {
    let mut terms = 8;
    loop {
        let (lo, hi) = chernoff_threshold_interval(n, terms);
        if omega < &lo {
            return true;
        }
        if omega >= &hi {
            return false;
        }
        terms *= 2;
        assert!(terms <= 1 << 16, "threshold comparison failed to separate");
    }
}

/// Upper end of an interval of width below `10⁻²⁴` around the threshold.
pub fn chernoff_threshold(n: u64) -> Rational {
    let eps = Rational::from_bigints(BigInt::from(1), BigInt::from(10).pow(24));
    let mut terms = 8;
    loop {
        let (lo, hi) = chernoff_threshold_interval(n, terms);
        if &hi - &lo < eps {
            return hi;
        }
        terms *= 2;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub omega_l: u64,
    /// `n² / ω_L`.
    pub ratio: Rational,
    pub below_threshold: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub n: usize,
    pub trials: u64,
    pub seed: u64,
    pub ns_value: Rational,
    pub chernoff_threshold: Rational,
    /// `chernoff_threshold` as a float, for reading only.
    pub chernoff_threshold_f64: f64,
    pub below_count: u64,
    pub fraction_below_threshold: Rational,
    pub ratio_min: Rational,
    pub ratio_median: Rational,
    pub ratio_max: Rational,
    pub per_trial: Vec<TrialRecord>,
}

impl ExperimentReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,seed,omega_L,ratio,below_threshold\n");
        for t in &self.per_trial {
            writeln!(out, "{},{},{},{},{}", t.trial, t.seed, t.omega_l, t.ratio, t.below_threshold).expect("string write");
        }
        out
    }
}

fn median(sorted: &[Rational]) -> Rational {
    let m = sorted.len();
    if m % 2 == 1 {
        sorted[m / 2].clone()
    } else {
        (&sorted[m / 2 - 1] + &sorted[m / 2]) / Rational::from(2)
    }
}

/// Runs `trials` independent permutation games of size `n`. Trial `i` uses
/// the game seeded by `sub_seed(seed, i)`; its classical value is computed
/// exactly and compared with `(3 ln n - 1) n`.
pub fn chernoff_experiment(n: usize, trials: u64, seed: u64, budget: &Budget) -> Result<ExperimentReport> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be positive".into()));
    }
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    budget.check(perm_game_strategy_count(n))?;
    let n2 = (n * n) as u64;
    let per_trial = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let s = sampling::sub_seed(seed, trial);
            let g = gen_perm_game(n, s)?;
            let (omega, _) = perm_game_classical_value(&g, budget)?;
            if omega > n2 || omega < perm_game_greedy_value(&g) {
                return Err(Error::Internal("classical value outside its bounds".into()));
            }
            let omega_r = Rational::from(omega as usize);
            Ok(TrialRecord {
                trial,
                seed: s,
                omega_l: omega,
                ratio: Rational::from(n2 as usize) / &omega_r,
                below_threshold: below_chernoff_threshold(n as u64, &omega_r),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let below_count = per_trial.iter().filter(|t| t.below_threshold).count() as u64;
    let mut ratios: Vec<Rational> = per_trial.iter().map(|t| t.ratio.clone()).collect();
    ratios.sort();
    let threshold = chernoff_threshold(n as u64);
    Ok(ExperimentReport {
        n,
        trials,
        seed,
        ns_value: Rational::from(n * n),
        chernoff_threshold_f64: threshold.to_f64(),
        chernoff_threshold: threshold,
        below_count,
        fraction_below_threshold: Rational::new(below_count as i64, trials as i64),
        ratio_min: ratios[0].clone(),
        ratio_median: median(&ratios),
        ratio_max: ratios[ratios.len() - 1].clone(),
        per_trial,
    })
}

/// Winning means `a + b ≡ σ_{xy} (mod d)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct XorDGame {
    pub n: usize,
    pub d: usize,
    pub sigma: Vec<Vec<usize>>,
    pub seed: u64,
}

impl XorDGame {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.d == 0 {
            return Err(Error::InvalidInput("n and d must be positive".into()));
        }
        if self.sigma.len() != self.n || self.sigma.iter().any(|r| r.len() != self.n || r.iter().any(|&v| v >= self.d)) {
            return Err(Error::InvalidInput("sigma must be n × n with entries below d".into()));
        }
        Ok(())
    }
}

pub fn gen_xor_d_game(n: usize, d: usize, seed: u64) -> Result<XorDGame> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidInput("n and d must be positive".into()));
    }
    let mut rng = sampling::rng(seed);
    let sigma = (0..n).map(|_| (0..n).map(|_| rng.gen_range(0..d)).collect()).collect();
    Ok(XorDGame { n, d, sigma, seed })
}

/// `M(x, a, y, b) = 1` iff `(a + b) mod d = σ_{xy}`.
pub fn xor_d_tensor(g: &XorDGame) -> Result<Tensor4> {
    g.validate()?;
    let dims = Dims::square(g.n, g.d)?;
    Ok(Tensor4::from_fn(dims, |x, a, y, b| {
        if (a + b) % g.d == g.sigma[x][y] {
            Rational::one()
        } else {
            Rational::zero()
        }
    }))
}

/// One checked sample of a bound sweep.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRow {
    /// `nonneg` (ω_NS / ω_L against min{N, K}), `bans` (co-local gauge against
    /// 9N), `corr` (squared π/ε ratio of a random matrix against 2n) or `sign`
    /// (the π/ε ratio of a random sign matrix; passes when its square is
    /// at most 2n).
    pub check: String,
    pub scenario: String,
    pub sample: usize,
    pub value: Rational,
    pub bound: Rational,
    pub pass: bool,
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("check,scenario,sample,value,bound,pass\n");
    for r in rows {
        writeln!(out, "{},{},{},{},{},{}", r.check, r.scenario, r.sample, r.value, r.bound, r.pass).expect("string write");
    }
    out
}

/// For every scenario, `samples` draws of each check. The `bans` check also
/// confirms membership at scale `9N` (with `N = max(n1, n2)`) directly.
pub fn bound_sweep(scenarios: &[Dims], samples: usize, seed: u64, budget: &Budget) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::new();
    for (si, &d) in scenarios.iter().enumerate() {
        budget.check(values::classical_strategy_count(d, true))?;
        budget.check(values::co_local_vertex_count(d))?;
        let name = format!("{}x{}x{}x{}", d.n1, d.k1, d.n2, d.k2);
        let mut rng = sampling::rng(sampling::sub_seed(seed, si as u64));
        for i in 0..samples {
            let g = sampling::random_nonneg_tensor(&mut rng, d);
            let bound = Rational::from(values::lv_bound(d));
            let (value, pass) = if g.is_zero() {
                (Rational::zero(), true)
            } else {
                let cl = values::classical_value(&g, budget)?.value;
                let ns = values::ns_value_with(&g, budget)?.value;
                let r = ns / cl;
                let ok = r <= bound;
                (r, ok)
            };
            rows.push(SweepRow {
                check: "nonneg".into(),
                scenario: name.clone(),
                sample: i,
                value,
                bound,
                pass,
            });
        }
        let scale = Rational::from(9 * d.n1.max(d.n2));
        for i in 0..samples {
            let r = sampling::random_bans_point(&mut rng, d)?;
            let gauge = values::co_local_gauge(&r, budget)?
                .ok_or_else(|| Error::Internal("ANS point outside the local span".into()))?;
            let member = values::membership_co_local(&r, &scale, budget)?;
            rows.push(SweepRow {
                check: "bans".into(),
                scenario: name.clone(),
                sample: i,
                pass: member && gauge <= scale,
                value: gauge,
                bound: scale.clone(),
            });
        }
        let n = d.n1;
        for i in 0..samples {
            let t: CorrelationMatrix = sampling::random_correlation_matrix(&mut rng, n);
            let ratio = values::corr_pi_norm(&t) / values::corr_eps_norm(&t, budget)?;
            let sq = ratio.pow(2);
            let bound = Rational::from(2 * n);
            rows.push(SweepRow {
                check: "corr".into(),
                scenario: name.clone(),
                sample: i,
                pass: sq <= bound,
                value: sq,
                bound,
            });
        }
        for i in 0..samples {
            let t = sampling::random_sign_matrix(&mut rng, n);
            let ratio = values::corr_pi_norm(&t) / values::corr_eps_norm(&t, budget)?;
            let bound = Rational::from(2 * n);
            rows.push(SweepRow {
                check: "sign".into(),
                scenario: name.clone(),
                sample: i,
                pass: ratio.pow(2) <= bound,
                value: ratio,
                bound,
            });
        }
    }
    Ok(rows)
}
