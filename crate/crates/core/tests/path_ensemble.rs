use std::collections::HashMap;

use cplab::delta_bose::{moment2_pairing, Bump, GaussianProfile};
use cplab::paths::io::{read_binary, read_csv, write_binary, write_csv};
use cplab::paths::*;
use cplab::rng::SeedStreams;
use proptest::prelude::*;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn gaussian(sigma: f64) -> GaussianProfile {
    GaussianProfile { bumps: vec![Bump { amplitude: 1.0, center: [0.0, 0.0], sigma }] }
}

fn point_box() -> StartBox {
    StartBox::new((0, 0), (0, 0)).unwrap()
}

#[test]
fn trivial_window_single_point() {
    let b = StartBox::new((-2, 2), (-1, 1)).unwrap();
    let e = sample_reference_walks(1, (3, 3), 64, b, 1).unwrap();
    assert_eq!(e.len(), 1);
    assert_eq!(e.paths()[0].positions().len(), 1);
    assert!((e.weights()[0] - 15.0 * 4.0 / 64.0).abs() < 1e-15);
    assert!(sample_reference_walks(0, (0, 3), 64, b, 1).is_err());
    assert!(sample_reference_walks(1, (3, 2), 64, b, 1).is_err());
}

#[test]
fn endpoints_match_the_walk_kernel() {
    let n = 16u64;
    let e = sample_reference_walks(10_000, (0, 16), n, point_box(), 7).unwrap();
    let mut counts: HashMap<Site, f64> = HashMap::new();
    for p in e.paths() {
        *counts.entry(*p.positions().last().unwrap()).or_default() += 1.0;
    }
    // pool sites with expected count below 5 into one cell
    let (mut stat, mut cells) = (0.0, 0usize);
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for x in -16..=16 {
        for y in -16..=16 {
            let expected = 10_000.0 * transition_probability(16, [x, y]);
            let observed = counts.get(&[x, y]).copied().unwrap_or(0.0);
            if expected >= 5.0 {
                stat += (observed - expected).powi(2) / expected;
                cells += 1;
            } else {
                pooled_obs += observed;
                pooled_exp += expected;
            }
        }
    }
    stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
    cells += 1;
    let p = 1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat);
    assert!(p > 0.001, "chi-square {stat} on {cells} cells, p = {p}");
}

#[test]
fn reproducible_bit_exact() {
    let b = StartBox::new((-3, 3), (-3, 3)).unwrap();
    let a = sample_reference_walks(50, (0, 40), 64, b, 99).unwrap();
    let c = sample_reference_walks(50, (0, 40), 64, b, 99).unwrap();
    assert_eq!(a, c);
    let d = sample_reference_walks(50, (0, 40), 64, b, 100).unwrap();
    assert_ne!(a, d);
    let f = DisorderField::new(5, 64);
    let g1 = gibbs_reweight(&a, &f, 0.4).unwrap();
    let g2 = gibbs_reweight(&c, &f, 0.4).unwrap();
    assert_eq!(g1.weights(), g2.weights());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn intersection_additive_over_split_windows(seed in 0u64..1000, cut in 1i64..30, count in 2usize..12) {
        let b = StartBox::new((-2, 2), (-2, 2)).unwrap();
        let e = sample_reference_walks(count, (0, 30), 64, b, seed).unwrap();
        let mode = IntersectionMode::Lattice(LatticeScale::ErdosTaylor);
        let whole = intersection_matrix(&e, (0, 30), mode).unwrap();
        let left = intersection_matrix(&e, (0, cut), mode).unwrap();
        let right = intersection_matrix(&e, (cut, 30), mode).unwrap();
        let (cw, cl, cr) = (whole.counts().unwrap(), left.counts().unwrap(), right.counts().unwrap());
        prop_assert_eq!(cw, &(cl + cr));
        for i in 0..count {
            for j in 0..count {
                prop_assert_eq!(whole.get(i, j), whole.get(j, i));
                prop_assert!(whole.get(i, j) >= 0.0);
            }
        }
    }

    #[test]
    fn marginal_preserves_mass(seed in 0u64..1000, count in 1usize..20, t in 0i64..12) {
        let b = StartBox::new((-2, 2), (-2, 2)).unwrap();
        let e = sample_reference_walks(count, (0, 12), 64, b, seed).unwrap();
        let m = marginal(&e, &[t]).unwrap();
        prop_assert_eq!(m.total_mass(), e.total_mass());
        prop_assert_eq!(m.weights.as_slice(), e.weights());
    }
}

#[test]
fn marginal_examples() {
    let b = StartBox::new((-1, 1), (-1, 1)).unwrap();
    let e = sample_reference_walks(5, (0, 6), 64, b, 3).unwrap();
    let times: Vec<i64> = (0..=6).collect();
    let full = marginal(&e, &times).unwrap();
    for (i, p) in e.paths().iter().enumerate() {
        assert_eq!(full.points[i], p.positions());
    }
    assert_eq!(full.weights, e.weights());
    let one = sample_reference_walks(1, (0, 6), 64, b, 3).unwrap();
    let m = marginal(&one, &[4]).unwrap();
    assert_eq!(m.points, vec![vec![one.paths()[0].at(4).unwrap()]]);
    assert!(marginal(&e, &[7]).is_err());
}

#[test]
fn intersection_examples() {
    let n = 64;
    let a = LatticePath::from_positions(0, vec![[0, 0], [1, 0], [1, 0], [1, 1], [1, 1]]).unwrap();
    let far = LatticePath::from_positions(0, vec![[20, 20]; 5]).unwrap();
    let e = WeightedPathEnsemble::new(vec![a.clone(), a.clone(), far], vec![1.0; 3], (0, 4), EnsembleMeta::reference(n)).unwrap();
    let lat = intersection_matrix(&e, (0, 4), IntersectionMode::Lattice(LatticeScale::ErdosTaylor)).unwrap();
    let scale = std::f64::consts::PI / (n as f64).ln();
    assert!((lat.get(0, 1) - 4.0 * scale).abs() < 1e-15);
    assert!((lat.get(0, 0) - 4.0 * scale).abs() < 1e-15);
    assert_eq!(lat.get(0, 2), 0.0);
    let eps = intersection_matrix(&e, (0, 4), IntersectionMode::Epsilon(0.3)).unwrap();
    assert_eq!(eps.get(1, 2), 0.0);
    assert!(eps.get(0, 1) > 0.0);
    assert!(intersection_matrix(&e, (0, 4), IntersectionMode::Epsilon(1.0)).is_err());
    assert!(intersection_matrix(&e, (0, 4), IntersectionMode::Epsilon(1.5)).is_err());
    let empty = intersection_matrix(&e, (2, 2), IntersectionMode::Lattice(LatticeScale::ErdosTaylor)).unwrap();
    assert_eq!(empty.entries().amax(), 0.0);
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        for k in i..=j {
            r[idx[k]] = (i + j) as f64 / 2.0;
        }
        i = j + 1;
    }
    r
}

fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

#[test]
fn epsilon_and_lattice_modes_rank_together() {
    // 50 independent pairs, the second walk of pair k started 1.12^k lattice units to the right
    let n = 16384;
    let walks = sample_reference_walks(100, (0, 16384), n, point_box(), 17).unwrap();
    let paths: Vec<LatticePath> = walks
        .paths()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let shift = if i % 2 == 1 { 1.12f64.powi((i / 2) as i32) as i32 } else { 0 };
            let pos = p.positions().iter().map(|z| [z[0] + shift, z[1]]).collect();
            LatticePath::from_positions(0, pos).unwrap()
        })
        .collect();
    let e = WeightedPathEnsemble::new(paths, vec![1.0; 100], (0, 16384), EnsembleMeta::reference(n)).unwrap();
    let lat = intersection_matrix(&e, (0, 16384), IntersectionMode::Lattice(LatticeScale::ErdosTaylor)).unwrap();
    let eps = intersection_matrix(&e, (0, 16384), IntersectionMode::Epsilon(1.01 * spatial_scale(n))).unwrap();
    let x: Vec<f64> = (0..50).map(|k| lat.get(2 * k, 2 * k + 1)).collect();
    let y: Vec<f64> = (0..50).map(|k| eps.get(2 * k, 2 * k + 1)).collect();
    let rho = pearson(&ranks(&x), &ranks(&y));
    assert!(rho > 0.9, "rank correlation {rho}");
}

#[test]
fn gibbs_examples() {
    let b = StartBox::new((-3, 3), (-3, 3)).unwrap();
    let e = sample_reference_walks(40, (0, 64), 64, b, 5).unwrap();
    let same = gibbs_reweight(&e, &DisorderField::new(1, 64), 0.0).unwrap();
    assert_eq!(same.weights(), e.weights());
    assert!(gibbs_reweight(&e, &DisorderField::new(1, 128), 0.3).is_err());
    assert!(gibbs_reweight(&e, &DisorderField::new(1, 64), -0.3).is_err());
    let pg = polymer_gibbs_reweight(&e, 1, 0.0, 64, &CriticalWindow::default()).unwrap();
    assert_eq!(pg.meta.theta, Some(0.0));
    assert!(polymer_gibbs_reweight(&e, 1, -10.0, 64, &CriticalWindow::default()).is_err());
}

#[test]
fn disorder_average_of_a_weight_is_the_reference_weight() {
    let e = sample_reference_walks(1, (0, 64), 64, point_box(), 5).unwrap();
    let beta = 0.3;
    let samples: Vec<f64> = (0..20_000u64)
        .map(|r| gibbs_reweight(&e, &DisorderField::new(r, 64), beta).unwrap().weights()[0])
        .collect();
    let est = MomentEstimate::from_samples(&samples);
    assert!((est.mean - e.weights()[0]).abs() < 3.0 * est.std_error, "{est:?}");
}

#[test]
fn partition_variance_grows_with_theta() {
    // short window: over long ones a few hundred sampled paths cannot resolve the lognormal tail
    let b = StartBox::new((-4, 4), (-4, 4)).unwrap();
    let e = sample_reference_walks(500, (0, 8), 64, b, 8).unwrap();
    let mass = e.total_mass();
    let mut last = 0.0;
    for theta in [-3.0, 0.0, 3.0] {
        let z: Vec<f64> = (0..10)
            .map(|r| polymer_gibbs_reweight(&e, r, theta, 64, &CriticalWindow::default()).unwrap().total_mass() / mass)
            .collect();
        let m = z.iter().sum::<f64>() / 10.0;
        let var = z.iter().map(|x| (x - m).powi(2)).sum::<f64>() / 9.0;
        assert!(var > last, "θ = {theta}: {var} after {last}");
        last = var;
    }
}

#[test]
fn bridge_examples() {
    let n = 64;
    let l = WeightedPathEnsemble::new(vec![LatticePath::from_positions(0, vec![[0, 0], [1, 0]]).unwrap()], vec![2.0], (0, 1), EnsembleMeta::reference(n)).unwrap();
    let r = WeightedPathEnsemble::new(vec![LatticePath::from_positions(2, vec![[1, 0], [1, 1]]).unwrap()], vec![3.0], (2, 3), EnsembleMeta::reference(n)).unwrap();
    let c = bridge_concatenate(&l, &r, 1, BridgeMode::WeightOnly).unwrap();
    assert_eq!(c.len(), 1);
    assert!((c.weights()[0] - 6.0 * transition_probability(1, [0, 0])).abs() < 1e-15);
    assert!((c.weights()[0] - 3.0).abs() < 1e-12);
    assert!(bridge_concatenate(&l, &r, 0, BridgeMode::WeightOnly).is_err());
    assert!(bridge_concatenate(&l, &r, 2, BridgeMode::WeightOnly).is_err());

    // total mass equals the explicit double sum
    let b = StartBox::new((-2, 2), (-2, 2)).unwrap();
    let left = sample_reference_walks(7, (0, 5), n, b, 1).unwrap();
    let right = sample_reference_walks(6, (9, 12), n, b, 2).unwrap();
    let c = bridge_concatenate(&left, &right, 4, BridgeMode::WeightOnly).unwrap();
    let mut direct = 0.0;
    for (lp, wl) in left.paths().iter().zip(left.weights()) {
        for (rp, wr) in right.paths().iter().zip(right.weights()) {
            let (a, z) = (lp.positions().last().unwrap(), rp.positions()[0]);
            direct += wl * wr * transition_probability(4, [z[0] - a[0], z[1] - a[1]]);
        }
    }
    assert!((c.total_mass() - direct).abs() <= 1e-14 * direct);
    let full = bridge_concatenate(&left, &right, 4, BridgeMode::FullPaths { seed: 3 }).unwrap();
    for (a, b) in full.weights().iter().zip(c.weights()) {
        assert!((a - b).abs() <= 1e-14 * b);
    }
    for p in full.paths() {
        assert!(LatticePath::from_positions(p.start_time(), p.positions().to_vec()).is_ok());
    }
    // placeholder gap positions cannot be reweighted by disorder
    assert!(gibbs_reweight(&c, &DisorderField::new(0, n), 0.2).is_err());
    assert!(gibbs_reweight(&full, &DisorderField::new(0, n), 0.2).is_ok());
}

#[test]
fn bridge_composition_matches_heat_kernel() {
    // left walks from a small box, right walks from a box covering every reachable site;
    // the concatenated two-point function is one cell area times the composed kernel sum
    let n = 16;
    let cell = cell_area(n);
    let bl = StartBox::new((-1, 1), (-1, 1)).unwrap();
    let br = StartBox::new((-7, 7), (-7, 7)).unwrap();
    let f = |x: [f64; 2], z: [f64; 2]| (-(z[0] - 0.5 * x[0]).powi(2) - (z[1] + 0.3 * x[1]).powi(2)).exp();
    let mut exact = 0.0;
    for x0 in -1..=1 {
        for x1 in -1..=1 {
            for z0 in -11..=11 {
                for z1 in -11..=11 {
                    let p = transition_probability(10, [z0 - x0, z1 - x1]);
                    exact += cell * cell * p * f(to_continuum([x0, x1], n), to_continuum([z0, z1], n));
                }
            }
        }
    }
    let estimates: Vec<f64> = (0..20u64)
        .map(|r| {
            let left = sample_reference_walks(100, (0, 4), n, bl, 2 * r).unwrap();
            let right = sample_reference_walks(100, (6, 10), n, br, 2 * r + 1).unwrap();
            let c = bridge_concatenate(&left, &right, 2, BridgeMode::WeightOnly).unwrap();
            (0..c.len())
                .map(|i| c.weights()[i] * f(c.position(i, 0).unwrap(), c.position(i, 10).unwrap()))
                .sum::<f64>()
        })
        .collect();
    let est = MomentEstimate::from_samples(&estimates);
    assert!((est.mean - exact).abs() < 4.0 * est.std_error, "{est:?} vs {exact}");
    // the continuum composition, per unit cell, for scale
    assert!((exact / cell / 10.0 - 1.0).abs() < 10.0);
}

#[test]
fn io_round_trips() {
    let b = StartBox::new((-2, 2), (-2, 2)).unwrap();
    let left = sample_reference_walks(4, (0, 5), 64, b, 1).unwrap();
    let right = sample_reference_walks(3, (7, 9), 64, b, 2).unwrap();
    let mut e = bridge_concatenate(&left, &right, 2, BridgeMode::WeightOnly).unwrap();
    e.meta.theta = Some(-1.5);
    e.meta.disorder_seed = Some(77);
    e.meta.beta = 0.25;
    let mut bin = Vec::new();
    write_binary(&e, &mut bin).unwrap();
    assert_eq!(&bin[..16], b"CPLAB-ENS-v1\0\0\0\0");
    assert_eq!(read_binary(bin.as_slice()).unwrap(), e);
    let mut bad = bin.clone();
    bad[0] = b'X';
    assert!(read_binary(bad.as_slice()).is_err());
    assert!(read_binary(&bin[..bin.len() - 3]).is_err());

    let plain = sample_reference_walks(6, (0, 8), 64, b, 4).unwrap();
    let mut csv = Vec::new();
    write_csv(&plain, &mut csv).unwrap();
    let text = String::from_utf8(csv.clone()).unwrap();
    assert!(text.starts_with("path_id,time,x,y,weight\n"));
    let back = read_csv(csv.as_slice(), 64).unwrap();
    assert_eq!(back.paths(), plain.paths());
    assert_eq!(back.weights(), plain.weights());
    assert_eq!(back.window(), plain.window());
}

/// Exact `Z` by enumerating every lazy path that stays in the box.
fn brute_partition(dom: &PolymerDomain, field: &DisorderField, beta: f64, g: &GaussianProfile, gp: &GaussianProfile) -> f64 {
    let n = dom.n;
    let h = dom.half;
    let steps = dom.steps as usize;
    let mut total = 0.0;
    for x in -h..=h {
        for y in -h..=h {
            let mut stack = vec![([x, y], 0usize, 1.0f64)];
            while let Some((z, k, w)) = stack.pop() {
                if k == steps {
                    total += cell_area(n) * g.eval(to_continuum([x, y], n)) * w * gp.eval(to_continuum(z, n));
                    continue;
                }
                for (s, p) in [[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1]].iter().zip([0.5, 0.125, 0.125, 0.125, 0.125]) {
                    let nz = [z[0] + s[0], z[1] + s[1]];
                    if nz[0].abs() > h || nz[1].abs() > h {
                        continue;
                    }
                    let u = (k + 1) as i64;
                    let f = (beta * field.omega(u, nz) - 0.5 * beta * beta).exp();
                    stack.push((nz, k + 1, w * p * f));
                }
            }
        }
    }
    total
}

#[test]
fn transfer_matrix_matches_enumeration() {
    let g = gaussian(0.5);
    let gp = GaussianProfile { bumps: vec![Bump { amplitude: 2.0, center: [0.5, 0.0], sigma: 0.7 }] };
    let dom = PolymerDomain::new(16, 4, 1.2).unwrap();
    let field = DisorderField::new(3, 16);
    let betas = [0.0, 0.4, 0.9];
    let sols = quenched_polymer(&dom, &field, &betas, &g, &gp, 0, 0).unwrap();
    for (s, &b) in sols.iter().zip(&betas) {
        let brute = brute_partition(&dom, &field, b, &g, &gp);
        assert!((s.partition - brute).abs() < 1e-12 * brute, "β = {b}: {} vs {brute}", s.partition);
    }
    assert!(quenched_polymer(&dom, &DisorderField::new(3, 32), &betas, &g, &gp, 0, 0).is_err());
}

#[test]
fn polymer_samples_follow_the_gibbs_measure() {
    let g = gaussian(0.5);
    let dom = PolymerDomain::new(16, 3, 1.0).unwrap();
    let field = DisorderField::new(11, 16);
    let beta = 0.8;
    let m = 20_000;
    let sol = &quenched_polymer(&dom, &field, &[beta], &g, &g, m, 5).unwrap()[0];
    let ens = sol.ensemble.as_ref().unwrap();
    assert_eq!(ens.len(), m);
    assert!((ens.total_mass() - sol.partition).abs() < 1e-12 * sol.partition);
    // exact law of the endpoint pair (start, end) by enumeration
    let n = dom.n;
    let h = dom.half;
    let mut exact: HashMap<(Site, Site), f64> = HashMap::new();
    for x in -h..=h {
        for y in -h..=h {
            let mut stack = vec![([x, y], 0usize, 1.0f64)];
            while let Some((z, k, w)) = stack.pop() {
                if k == 3 {
                    let v = cell_area(n) * g.eval(to_continuum([x, y], n)) * w * g.eval(to_continuum(z, n));
                    *exact.entry(([x, y], z)).or_default() += v / sol.partition;
                    continue;
                }
                for (s, p) in [[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1]].iter().zip([0.5, 0.125, 0.125, 0.125, 0.125]) {
                    let nz = [z[0] + s[0], z[1] + s[1]];
                    if nz[0].abs() > h || nz[1].abs() > h {
                        continue;
                    }
                    let f = (beta * field.omega((k + 1) as i64, nz) - 0.5 * beta * beta).exp();
                    stack.push((nz, k + 1, w * p * f));
                }
            }
        }
    }
    let mut observed: HashMap<(Site, Site), f64> = HashMap::new();
    for p in ens.paths() {
        *observed.entry((p.positions()[0], *p.positions().last().unwrap())).or_default() += 1.0;
    }
    let (mut stat, mut cells, mut po, mut pe) = (0.0, 0usize, 0.0, 0.0);
    for (k, prob) in &exact {
        let e = prob * m as f64;
        let o = observed.get(k).copied().unwrap_or(0.0);
        if e >= 5.0 {
            stat += (o - e).powi(2) / e;
            cells += 1;
        } else {
            po += o;
            pe += e;
        }
    }
    if pe > 0.0 {
        stat += (po - pe).powi(2) / pe;
        cells += 1;
    }
    let p = 1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat);
    assert!(p > 0.001, "chi-square {stat} on {cells} cells, p = {p}");
}

#[test]
fn planted_and_direct_estimators_agree() {
    let g = gaussian(0.5);
    let mut params = PolymerParams::new(64, 0.0, 0.5, 0);
    params.window = CriticalWindow::renewal();
    let (ez_p, planted) = second_moment_samples(&params, &[(0.0, 0.0)], &g, &g, 400, 3).unwrap();
    params.estimator = MomentEstimator::Direct;
    let (ez_d, direct) = second_moment_samples(&params, &[(0.0, 0.0)], &g, &g, 400, 4).unwrap();
    assert_eq!(ez_p, ez_d);
    let a = MomentEstimate::from_samples(&planted[0]);
    let b = MomentEstimate::from_samples(&direct[0]);
    let se = a.std_error.hypot(b.std_error);
    assert!((a.mean - b.mean).abs() < 4.0 * se, "{a:?} vs {b:?}");
    assert!(a.mean > ez_p * ez_p);
}

#[test]
fn beta_zero_trial_is_the_heat_pairing() {
    let g = gaussian(0.5);
    let gp = gaussian(0.8);
    let mut params = PolymerParams::new(1024, 0.0, 0.25, 0);
    params.window.kappa = 0.0;
    let (est, analytic) = annealed_second_moment_trial(&params, &g, &gp, 2, 1).unwrap();
    assert_eq!(est.std_error, 0.0);
    let limit = moment2_pairing(-60.0, params.lattice_time(), &g, &gp, 1e-8).unwrap();
    assert!((est.mean - analytic.heat).abs() < 2e-3 * analytic.heat, "{} vs {}", est.mean, analytic.heat);
    assert!((limit.total - limit.heat) < 2e-2 * limit.heat);
    assert!(annealed_second_moment_trial(&params, &g, &gp, 1, 1).is_err());
}

#[test]
fn second_moment_increases_with_theta() {
    let g = gaussian(0.5);
    let mut params = PolymerParams::new(256, 0.0, 0.5, 0);
    params.window = CriticalWindow::renewal();
    params.estimator = MomentEstimator::Direct;
    let (_, s) = second_moment_samples(&params, &[(-2.0, 0.0), (-1.0, 0.0), (0.0, 0.0)], &g, &g, 60, 12).unwrap();
    let means: Vec<f64> = s.iter().map(|v| v.iter().sum::<f64>() / v.len() as f64).collect();
    assert!(means[0] < means[1] && means[1] < means[2], "{means:?}");
}

#[test]
fn tilted_pairs_reduce_to_gmc_moments_at_beta_zero() {
    // β = 0: the pair average is the off-diagonal Kahane second moment of the polymer sample
    let g = gaussian(0.5);
    let dom = PolymerDomain::new(64, 16, 3.0).unwrap();
    let sol = &quenched_polymer(&dom, &DisorderField::new(0, 64), &[0.0], &g, &g, 30, 2).unwrap()[0];
    let ens = sol.ensemble.as_ref().unwrap();
    let tilt = 0.3;
    let k = intersection_matrix(ens, ens.window(), IntersectionMode::Lattice(LatticeScale::ErdosTaylor)).unwrap();
    let scale = LatticeScale::ErdosTaylor.factor(64).unwrap();
    let masses = ens.weights().to_vec();
    let a = tilt / scale;
    let off = cplab::gmc::gmc_moment_oracle(&masses, k.entries(), a, 2, &|t: &[usize]| if t[0] != t[1] { 1.0 } else { 0.0 }).unwrap();
    let m = ens.len() as f64;
    let from_pairs = sol.partition * sol.partition * (1.0 - 1.0 / m) * pair_tilt_average(ens, tilt).unwrap();
    assert!((off - from_pairs).abs() < 1e-12 * off, "{off} vs {from_pairs}");
}

#[test]
fn seed_streams_differ_by_name() {
    let s = SeedStreams::new(1);
    assert_ne!(s.derive("disorder", 0), s.derive("sampling", 0));
    let mut a = s.stream("disorder", 0);
    let mut b = s.stream("disorder", 0);
    assert_eq!(a.random::<u64>(), b.random::<u64>());
}

#[test]
fn overlap_matches_pair_enumeration() {
    let g = gaussian(0.5);
    let gp = GaussianProfile { bumps: vec![Bump { amplitude: 1.5, center: [0.3, -0.2], sigma: 0.6 }] };
    let dom = PolymerDomain::new(16, 3, 0.9).unwrap();
    let field = DisorderField::new(21, 16);
    let betas = [0.0, 0.7];
    let over = quenched_overlap(&dom, &field, &betas, &g, &gp).unwrap();
    let sols = quenched_polymer(&dom, &field, &betas, &g, &gp, 0, 0).unwrap();
    let n = dom.n;
    let h = dom.half;
    for (b, &beta) in betas.iter().enumerate() {
        let mut all: Vec<(Vec<Site>, f64)> = Vec::new();
        for x in -h..=h {
            for y in -h..=h {
                let mut stack = vec![(vec![[x, y]], 1.0f64)];
                while let Some((p, w)) = stack.pop() {
                    let z = *p.last().unwrap();
                    if p.len() == 4 {
                        let full = cell_area(n) * g.eval(to_continuum([x, y], n)) * w * gp.eval(to_continuum(z, n));
                        all.push((p, full));
                        continue;
                    }
                    for (s, q) in [[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1]].iter().zip([0.5, 0.125, 0.125, 0.125, 0.125]) {
                        let nz = [z[0] + s[0], z[1] + s[1]];
                        if nz[0].abs() > h || nz[1].abs() > h {
                            continue;
                        }
                        let f = (beta * field.omega(p.len() as i64, nz) - 0.5 * beta * beta).exp();
                        let mut np = p.clone();
                        np.push(nz);
                        stack.push((np, w * q * f));
                    }
                }
            }
        }
        let z: f64 = all.iter().map(|(_, w)| w).sum();
        let mut pairs = 0.0;
        for (p, wp) in &all {
            for (q, wq) in &all {
                let c = (1..4).filter(|&k| p[k] == q[k]).count();
                pairs += wp * wq * c as f64;
            }
        }
        assert!((over[b].partition - z).abs() < 1e-12 * z);
        assert!((over[b].partition - sols[b].partition).abs() < 1e-12 * z);
        assert!((over[b].coincidences - pairs).abs() < 1e-11 * pairs, "{} vs {pairs}", over[b].coincidences);
    }
}
