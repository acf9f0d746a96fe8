//! The ten acceptance criteria. Each prints one PASS/FAIL line; the process
//! exits non-zero if any fails. All comparisons are exact; only the wall-clock
//! limits below are tolerances.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use nsnorm::constructions::{self, BmImage};
use nsnorm::games;
use nsnorm::sampling::{self, Prng};
use nsnorm::tensor::{self, Dims, Tensor4};
use nsnorm::values::{self, Budget, CorrelationMatrix};
use nsnorm::{LinearProgram, LpStatus, Rational, Relation, Sense};
use rand::Rng;

use common::{brute_force_lp, Oracle, SmallLp};

const SEED: u64 = 0x5eed_2024;
const DUALITY_LIMIT: Duration = Duration::from_secs(300);
const PERM5_LIMIT: Duration = Duration::from_secs(120);
const PERM7_LIMIT: Duration = Duration::from_secs(300);

type Check = std::result::Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn rng_for(criterion: u64) -> Prng {
    sampling::rng(sampling::sub_seed(SEED, criterion))
}

fn nonneg_samples() -> Vec<Tensor4> {
    let mut rng = rng_for(1);
    (0..200)
        .map(|_| {
            let d = Dims::square(rng.gen_range(1..=3), rng.gen_range(1..=3)).unwrap();
            sampling::random_nonneg_tensor(&mut rng, d)
        })
        .collect()
}

fn criterion_1(samples: &[Tensor4]) -> Check {
    let start = Instant::now();
    for (i, m) in samples.iter().enumerate() {
        let ns = values::ns_value(m).map_err(|e| e.to_string())?.value;
        let cert = values::dns_norm(m).map_err(|e| e.to_string())?;
        let dual = values::dns_norm_dual(m).map_err(|e| e.to_string())?;
        ensure!(cert.verify(m), "sample {i}: DNS certificate does not verify");
        ensure!(ns == cert.value && ns == dual, "sample {i}: ns {ns}, dns {}, dual {dual}", cert.value);
    }
    let t = start.elapsed();
    ensure!(t < DUALITY_LIMIT, "took {t:?}");
    Ok(format!("{} tensors, ns = dns = dns_dual exactly, {:.1?}", samples.len(), t))
}

fn criterion_2() -> Check {
    let mut rng = rng_for(2);
    let (mut ns, mut signalling) = (0, 0);
    for i in 0..200 {
        let d = Dims::new(rng.gen_range(1..=3), rng.gen_range(1..=3), rng.gen_range(1..=3), rng.gen_range(1..=3)).unwrap();
        let p = sampling::random_point_in_c(&mut rng, d).map_err(|e| e.to_string())?;
        ensure!(tensor::membership_c(&p), "sample {i} not in C");
        let member = tensor::membership_ns(&p);
        ensure!(member == tensor::norm_ns(&p).is_one(), "sample {i}: membership {member} but norm {}", tensor::norm_ns(&p));
        if member {
            ns += 1;
        } else {
            signalling += 1;
        }
    }
    ensure!(ns > 0 && signalling > 0, "only one side sampled ({ns} NS, {signalling} signalling)");
    Ok(format!("200 points of C ({ns} NS, {signalling} signalling), zero exceptions"))
}

fn criterion_3() -> Check {
    let mut rng = rng_for(3);
    for i in 0..200 {
        let d = Dims::new(rng.gen_range(1..=3), rng.gen_range(1..=3), rng.gen_range(1..=3), rng.gen_range(1..=3)).unwrap();
        let p = sampling::random_snos_point(&mut rng, d).map_err(|e| e.to_string())?;
        let nu = tensor::norm_ns(&p);
        ensure!(p.is_nonnegative() && nu <= Rational::one(), "sample {i} is not in SNOS");
        let q = constructions::snos_complete(&p).map_err(|e| e.to_string())?;
        ensure!(p.dominated_by(&q), "sample {i}: completion does not dominate");
        if nu.is_zero() {
            ensure!(q.is_zero(), "sample {i}: zero input, non-zero completion");
        } else {
            ensure!(tensor::membership_ns(&q.scale(&nu.recip())), "sample {i}: completion not in ‖P‖·NS");
        }
    }
    Ok("200 SNOS points completed inside ‖P‖_NS·NS".into())
}

fn criterion_4() -> Check {
    let mut rng = rng_for(4);
    for i in 0..200 {
        let d = Dims::new(rng.gen_range(1..=3), rng.gen_range(1..=3), rng.gen_range(1..=3), rng.gen_range(1..=3)).unwrap();
        let r = sampling::random_bans_point(&mut rng, d).map_err(|e| e.to_string())?;
        let z = tensor::membership_ans(&r).ok_or(format!("sample {i} not in ANS"))?.total;
        let nu = tensor::norm_ns(&r);
        ensure!(nu <= Rational::one(), "sample {i} outside the unit ball");
        let s = constructions::ans_split(&r).map_err(|e| e.to_string())?;
        ensure!(s.reconstruct() == r, "sample {i}: reconstruction differs");
        ensure!(tensor::membership_ns(&s.pos) && tensor::membership_ns(&s.neg), "sample {i}: leg outside NS");
        ensure!(&s.lam + &s.mu == nu, "sample {i}: lam + mu = {} vs norm {nu}", &s.lam + &s.mu);
        ensure!(&s.lam - &s.mu == z, "sample {i}: lam - mu = {} vs z {z}", &s.lam - &s.mu);
    }
    Ok("200 B_ANS points split exactly, lam + mu = norm, lam - mu = z".into())
}

fn criterion_5() -> Check {
    let budget = Budget::default();
    let start = Instant::now();
    let report = games::chernoff_experiment(5, 100, sampling::sub_seed(SEED, 5), &budget).map_err(|e| e.to_string())?;
    for t in &report.per_trial {
        let g = games::gen_perm_game(5, t.seed).map_err(|e| e.to_string())?;
        let (v, p) = games::perm_game_ns_value(&g).map_err(|e| e.to_string())?;
        ensure!(v == Rational::from(25) && tensor::membership_ns(&p), "trial {}: ns value {v}", t.trial);
    }
    let t5 = start.elapsed();
    ensure!(t5 < PERM5_LIMIT, "n = 5 took {t5:?}");
    ensure!(report.below_count > 0, "no seed below the threshold");

    for n in 1..=4 {
        for s in 0..50u64 {
            let g = games::gen_perm_game(n, sampling::sub_seed(SEED ^ n as u64, s)).map_err(|e| e.to_string())?;
            let (fast, strat) = games::perm_game_classical_value(&g, &budget).map_err(|e| e.to_string())?;
            let m = games::perm_game_tensor(&g);
            let generic = values::classical_value(&m, &budget).map_err(|e| e.to_string())?.value;
            ensure!(Rational::from(fast as usize) == generic, "n = {n}, game {s}: {fast} vs {generic}");
            ensure!(strat.evaluate(&m) == generic, "n = {n}, game {s}: strategy does not attain the value");
        }
    }

    let start = Instant::now();
    let g = games::gen_perm_game(7, sampling::sub_seed(SEED, 7)).map_err(|e| e.to_string())?;
    let (w7, _) = games::perm_game_classical_value(&g, &budget).map_err(|e| e.to_string())?;
    let t7 = start.elapsed();
    ensure!(t7 < PERM7_LIMIT, "n = 7 took {t7:?}");
    ensure!((7..=49).contains(&w7), "n = 7 value {w7} out of range");
    Ok(format!(
        "n=5: ns = 25 on 100 seeds, {}/100 below {:.4} ({:.1?}); fast = generic on 4×50 games; n=7 ω_L = {w7} ({:.1?})",
        report.below_count, report.chernoff_threshold_f64, t5, t7
    ))
}

fn sharpness_witness(n: usize) -> Tensor4 {
    let d = Dims::square(n, n).unwrap();
    Tensor4::from_fn(d, |x, a, y, b| if b == x && y == 0 && a == 0 { Rational::one() } else { Rational::zero() })
}

fn criterion_6(samples: &[Tensor4]) -> Check {
    let budget = Budget::default();
    let mut worst = Rational::zero();
    for (i, m) in samples.iter().enumerate() {
        if m.is_zero() {
            continue;
        }
        let bound = Rational::from(values::lv_bound(m.dims()));
        let r = values::lv_ratio_nonneg(m, &budget).map_err(|e| e.to_string())?;
        ensure!(r <= bound, "sample {i}: ratio {r} > {bound}");
        worst = worst.max_of(&r / &bound);
    }
    for n in 2..=5 {
        let m = sharpness_witness(n);
        ensure!(tensor::dual_norm1(&m) == Rational::from(n), "N = {n}: dual_norm1 {}", tensor::dual_norm1(&m));
        let cl = values::classical_value(&m, &budget).map_err(|e| e.to_string())?.value;
        ensure!(cl.is_one(), "N = {n}: classical value {cl}");
        let dns = values::dns_norm_dual(&m).map_err(|e| e.to_string())?;
        ensure!(dns <= Rational::one(), "N = {n}: dns {dns}");
    }
    Ok(format!("ratio ≤ min{{N,K}} on all samples (max ratio/bound {worst}); sharpness witness exact for N = 2..5"))
}

fn criterion_7() -> Check {
    let budget = Budget::default();
    let mut rng = rng_for(7);
    let d = Dims::square(2, 2).unwrap();
    let scale = Rational::from(18);
    let mut minimal = Rational::zero();
    let samples = 100;
    for i in 0..samples {
        let r = sampling::random_bans_point(&mut rng, d).map_err(|e| e.to_string())?;
        ensure!(values::membership_co_local(&r, &scale, &budget).map_err(|e| e.to_string())?, "sample {i} fails at 18");
        let g = values::co_local_gauge(&r, &budget).map_err(|e| e.to_string())?.ok_or(format!("sample {i}: no gauge"))?;
        minimal = minimal.max_of(g);
    }
    ensure!(minimal <= scale, "minimal passing scale {minimal}");
    Ok(format!("{samples} B_ANS points at N=K=2 co-local at 18; minimal passing scale {minimal} ({:.4})", minimal.to_f64()))
}

fn random_image(rng: &mut Prng, d: Dims) -> BmImage {
    let core = sampling::random_signed_tensor(rng, Dims::new(d.n1, d.k1 - 1, d.n2, d.k2 - 1).unwrap());
    let mat = |rng: &mut Prng, n: usize, k: usize| -> Vec<Vec<Rational>> {
        (0..n).map(|_| (0..k).map(|_| sampling::random_rational(rng, 6, 4)).collect()).collect()
    };
    BmImage {
        core,
        pa: mat(rng, d.n1, d.k1 - 1),
        qb: mat(rng, d.n2, d.k2 - 1),
        s: sampling::random_rational(rng, 6, 4),
    }
}

fn criterion_8() -> Check {
    let mut rng = rng_for(8);
    let nine = Rational::from(9);
    for i in 0..500 {
        let d = Dims::new(rng.gen_range(1..=4), rng.gen_range(2..=4), rng.gen_range(1..=4), rng.gen_range(2..=4)).unwrap();
        let r = sampling::random_ans_point(&mut rng, d);
        let w = constructions::map_t(&r).map_err(|e| e.to_string())?;
        let back = constructions::map_t_inv(&w).map_err(|e| e.to_string())?;
        ensure!(back == r, "sample {i}: T⁻¹T ≠ id");
        ensure!(w.norm() <= tensor::norm_ns(&r), "sample {i}: ‖T(r)‖ > ‖r‖");
        ensure!(constructions::alpha_sum(&w).map_err(|e| e.to_string())? == back, "sample {i}: α-sum ≠ T⁻¹ on T(r)");

        let v = random_image(&mut rng, d);
        let pre = constructions::map_t_inv(&v).map_err(|e| e.to_string())?;
        ensure!(tensor::membership_ans(&pre).is_some(), "sample {i}: T⁻¹(w) not in ANS");
        ensure!(tensor::norm_ns(&pre) <= &nine * &v.norm(), "sample {i}: ‖T⁻¹(w)‖ > 9‖w‖");
        ensure!(constructions::alpha_sum(&v).map_err(|e| e.to_string())? == pre, "sample {i}: α-sum ≠ T⁻¹");
        ensure!(constructions::map_t(&pre).map_err(|e| e.to_string())? == v, "sample {i}: T T⁻¹ ≠ id");
    }
    Ok("500 ANS points and 500 images: T⁻¹T = id, TT⁻¹ = id, norm bounds and α-sum exact".into())
}

fn criterion_9() -> Check {
    let budget = Budget::default();
    let mut rng = rng_for(9);
    let mut worst = 0.0f64;
    for n in 2..=8 {
        let bound = Rational::from(2 * n);
        for i in 0..500 {
            let t = sampling::random_correlation_matrix(&mut rng, n);
            let r = values::corr_pi_norm(&t) / values::corr_eps_norm(&t, &budget).map_err(|e| e.to_string())?;
            let sq = r.pow(2);
            ensure!(sq <= bound, "n = {n}, matrix {i}: ratio² {sq} > {bound}");
            worst = worst.max((&sq / &bound).to_f64());
        }
    }
    let chsh = CorrelationMatrix::new(vec![
        vec![Rational::one(), Rational::one()],
        vec![Rational::one(), -Rational::one()],
    ])
    .map_err(|e| e.to_string())?;
    let r = values::corr_lv_ratio(&chsh, &budget).map_err(|e| e.to_string())?;
    ensure!(r == Rational::from(2), "CHSH ratio {r}");
    Ok(format!("ratio² ≤ 2n on 7×500 matrices (max ratio²/2n {worst:.4}); CHSH ratio exactly 2"))
}

fn random_small_lp(rng: &mut Prng) -> SmallLp {
    let n = rng.gen_range(1..=8);
    let m = rng.gen_range(1..=7);
    let small = |rng: &mut Prng| Rational::from_integer(rng.gen_range(-5..=5));
    let c = (0..n).map(|_| small(rng)).collect();
    let mut rows: Vec<_> = (0..m)
        .map(|_| {
            let a: Vec<Rational> = (0..n).map(|_| small(rng)).collect();
            let rel = match rng.gen_range(0..6) {
                0 => Relation::Eq,
                1 => Relation::Ge,
                _ => Relation::Le,
            };
            (a, rel, Rational::from_integer(rng.gen_range(-3..=10)))
        })
        .collect();
    // half the programs get a box row, so most of those are bounded
    if rng.gen_bool(0.5) {
        rows.push((vec![Rational::one(); n], Relation::Le, Rational::from_integer(rng.gen_range(1..=10))));
    }
    let sense = if rng.gen_bool(0.5) { Sense::Maximize } else { Sense::Minimize };
    SmallLp { sense, c, rows }
}

fn criterion_10() -> Check {
    let mut rng = rng_for(10);
    let (mut opt, mut inf, mut unb, mut max_pivots) = (0, 0, 0, 0);
    for i in 0..500 {
        let small = random_small_lp(&mut rng);
        let mut lp = LinearProgram::new(small.c.len(), small.sense);
        lp.set_objective(small.c.clone()).map_err(|e| e.to_string())?;
        for (a, rel, rhs) in &small.rows {
            lp.add_constraint(a.clone(), *rel, rhs.clone()).map_err(|e| e.to_string())?;
        }
        let out = lp.solve().map_err(|e| format!("LP {i}: {e}"))?;
        max_pivots = max_pivots.max(out.pivots);
        match (brute_force_lp(&small), out.status) {
            (Oracle::Optimal(v), LpStatus::Optimal) => {
                ensure!(out.value.as_ref() == Some(&v), "LP {i}: simplex {:?} vs oracle {v}", out.value);
                opt += 1;
            }
            (Oracle::Infeasible, LpStatus::Infeasible) => inf += 1,
            (Oracle::Unbounded, LpStatus::Unbounded) => unb += 1,
            (o, s) => return Err(format!("LP {i}: simplex {s} vs oracle {o:?}")),
        }
    }
    ensure!(opt > 0 && inf > 0 && unb > 0, "statuses not all exercised ({opt}/{inf}/{unb})");
    Ok(format!("500 LPs agree with basis enumeration ({opt} optimal, {inf} infeasible, {unb} unbounded), max {max_pivots} pivots"))
}

fn run(id: usize, f: impl FnOnce() -> Check) -> bool {
    let start = Instant::now();
    let res = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Err(format!("panicked: {msg}"))
    });
    let t = start.elapsed();
    match res {
        Ok(detail) => {
            println!("criterion {id:>2}: PASS  [{t:.1?}] {detail}");
            true
        }
        Err(detail) => {
            println!("criterion {id:>2}: FAIL  [{t:.1?}] {detail}");
            false
        }
    }
}

fn main() {
    // `cargo test -- <filter>` passes arguments meant for the libtest harness;
    // honour `--list` so test discovery tools see a single entry.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let samples = nonneg_samples();
    let results = [
        run(1, || criterion_1(&samples)),
        run(2, criterion_2),
        run(3, criterion_3),
        run(4, criterion_4),
        run(5, criterion_5),
        run(6, || criterion_6(&samples)),
        run(7, criterion_7),
        run(8, criterion_8),
        run(9, criterion_9),
        run(10, criterion_10),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
