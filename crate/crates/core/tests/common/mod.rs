//! Direct, unoptimized evaluations of the quantities the library computes,
//! shared by the oracle tests and the acceptance run.

use eitest_core::two_sample::{ks_statistic, median_heuristic_bandwidth, mmd2_biased};
use eitest_core::{
    extract_lag_samples, simes_adjust, validate_pair, EventSeries, KernelSpec, Sample, TimeSeries,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `t` belongs to lag set `k` iff `e_{t-k} = 1` and no event occurs in `(t-k, t]`.
fn in_lag_set(marks: &[bool], t: usize, k: usize) -> bool {
    t >= k && marks[t - k] && marks[t - k + 1..=t].iter().all(|&m| !m)
}

fn oracle_lag_sets(marks: &[bool], max_lag: usize, min_gap: usize) -> Vec<Vec<usize>> {
    let mut sets = vec![Vec::new(); max_lag + 1];
    let mut kept: Vec<usize> = Vec::new();
    for t in 0..marks.len() {
        let Some(k) = (0..=max_lag).find(|&k| in_lag_set(marks, t, k)) else {
            continue;
        };
        if min_gap > 0 && kept.iter().any(|&s| t - s <= min_gap) {
            continue;
        }
        kept.push(t);
        sets[k].push(t);
    }
    sets
}

/// Every event series with `T <= 12`, every `K <= 4`, with and without a gap.
pub fn check_lag_extraction() -> Result<String, String> {
    let mut checked = 0usize;
    for len in 2..=12usize {
        for mask in 1u32..(1 << len) - 1 {
            let marks: Vec<bool> = (0..len).map(|t| mask >> t & 1 == 1).collect();
            let series = TimeSeries::univariate((0..len).map(|t| t as f64).collect()).unwrap();
            let pair = validate_pair(series, EventSeries::from_bools(marks.clone())).unwrap();
            for max_lag in 1..=4 {
                for min_gap in [None, Some(1), Some(2)] {
                    let set = extract_lag_samples(&pair, max_lag, min_gap).unwrap();
                    let expected = oracle_lag_sets(&marks, max_lag, min_gap.unwrap_or(0));
                    for (k, want) in expected.iter().enumerate() {
                        let values: Vec<f64> = want.iter().map(|&t| t as f64).collect();
                        if set.indices(k) != &want[..] || set.sample(k).values() != &values[..] {
                            return Err(format!(
                                "marks {marks:?}, K {max_lag}, gap {min_gap:?}, lag {k}: \
                                 got {:?}, want {want:?}",
                                set.indices(k)
                            ));
                        }
                    }
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} (series, K, gap) cases"))
}

/// `sup_x |F_a(x) - F_b(x)|` evaluated at every pooled value by counting.
fn brute_ks(a: &[f64], b: &[f64]) -> f64 {
    let ecdf = |s: &[f64], x: f64| s.iter().filter(|&&v| v <= x).count();
    a.iter()
        .chain(b)
        .map(|&x| (ecdf(a, x) as f64 / a.len() as f64 - ecdf(b, x) as f64 / b.len() as f64).abs())
        .fold(0.0, f64::max)
}

/// 1000 random sample pairs with `n, m <= 50`; exact equality.
pub fn check_ks_statistic() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b73);
    for case in 0..1000 {
        let n = rng.random_range(1..=50);
        let m = rng.random_range(1..=50);
        // every third case draws from a small integer grid to force ties
        let draw = |rng: &mut ChaCha8Rng| {
            if case % 3 == 0 {
                f64::from(rng.random_range(0..6))
            } else {
                rng.random_range(-2.0..2.0)
            }
        };
        let a: Vec<f64> = (0..n).map(|_| draw(&mut rng)).collect();
        let b: Vec<f64> = (0..m).map(|_| draw(&mut rng)).collect();
        let got = ks_statistic(
            &Sample::univariate(a.clone()).unwrap(),
            &Sample::univariate(b.clone()).unwrap(),
        )
        .unwrap();
        let want = brute_ks(&a, &b);
        if got != want {
            return Err(format!("case {case}: {got} vs {want} for {a:?} / {b:?}"));
        }
    }
    Ok("1000 sample pairs".into())
}

/// Biased MMD² as the plain double loop over all kernel evaluations.
fn double_loop_mmd2(a: &Sample, b: &Sample, sigma: f64) -> f64 {
    let k = |u: &[f64], v: &[f64]| {
        let d2: f64 = u.iter().zip(v).map(|(x, y)| (x - y) * (x - y)).sum();
        (-d2 / (2.0 * sigma * sigma)).exp()
    };
    let block = |x: &Sample, y: &Sample| {
        let mut total = 0.0;
        for u in x.points() {
            for v in y.points() {
                total += k(u, v);
            }
        }
        total / (x.len() * y.len()) as f64
    };
    block(a, a) + block(b, b) - 2.0 * block(a, b)
}

/// 300 random sample pairs in up to 3 dimensions, two bandwidth rules.
pub fn check_mmd2() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6d6d64);
    let mut worst = 0.0f64;
    for case in 0..300 {
        let dim = rng.random_range(1..=3);
        let n = rng.random_range(2..=40);
        let m = rng.random_range(2..=40);
        let mut draw = |len: usize, shift: f64| {
            let values = (0..len * dim)
                .map(|_| shift + rng.random_range(-1.5..1.5))
                .collect();
            Sample::new(dim, values).unwrap()
        };
        let a = draw(n, 0.0);
        let b = draw(m, if case % 2 == 0 { 0.0 } else { 0.7 });
        let sigma = median_heuristic_bandwidth(&Sample::concat(&a, &b).unwrap()).unwrap();
        for (spec, s) in [
            (KernelSpec::median_heuristic(), sigma),
            (KernelSpec::rbf(0.8).unwrap(), 0.8),
        ] {
            let got = mmd2_biased(&a, &b, &spec).unwrap();
            let want = double_loop_mmd2(&a, &b, s).max(0.0);
            worst = worst.max((got - want).abs());
            if (got - want).abs() > 1e-10 {
                return Err(format!("case {case}: {got} vs {want}"));
            }
        }
    }
    Ok(format!("300 sample pairs, max |diff| {worst:.1e}"))
}

/// `min(1, min_m (M/m) p_(m))`, with the m-th smallest value found by
/// selection rather than by sorting.
fn exhaustive_simes(p: &[f64]) -> f64 {
    let total = p.len() as f64;
    let mut best = f64::INFINITY;
    for rank in 1..=p.len() {
        let kth = p
            .iter()
            .copied()
            .find(|&x| {
                let below = p.iter().filter(|&&y| y < x).count();
                let at_most = p.iter().filter(|&&y| y <= x).count();
                below < rank && rank <= at_most
            })
            .unwrap();
        best = best.min(total / rank as f64 * kth);
    }
    best.min(1.0)
}

/// 1000 random p-value vectors including ties, zeros and ones; exact equality.
pub fn check_simes() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5133);
    for case in 0..1000 {
        let len = rng.random_range(1..=60);
        let p: Vec<f64> = (0..len)
            .map(|_| match rng.random_range(0..10) {
                0 => 0.0,
                1 => 1.0,
                2 => f64::from(rng.random_range(1..5)) / 10.0,
                3 => rng.random_range(0.0..1e-6),
                _ => rng.random_range(0.0..1.0),
            })
            .collect();
        let got = simes_adjust(&p).map_err(|e| e.to_string())?;
        let want = exhaustive_simes(&p);
        if got != want {
            return Err(format!("case {case}: {got} vs {want} for {p:?}"));
        }
    }
    Ok("1000 p-value vectors".into())
}
