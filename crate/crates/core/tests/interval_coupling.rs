mod support;

use cplab::coupling::*;
use cplab::gmc::*;
use cplab::paths::*;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::{gauss_hermite, random_psd};

fn walks(count: usize, window: (i64, i64), seed: u64) -> WeightedPathEnsemble {
    sample_reference_walks(count, window, 16, StartBox::new((-1, 1), (-1, 1)).unwrap(), seed).unwrap()
}

fn lattice() -> IntersectionMode {
    IntersectionMode::Lattice(LatticeScale::ErdosTaylor)
}

fn factor(k: &DMatrix<f64>, masses: &[f64]) -> FactorMap {
    spectral_factorize_matrix(k, &WeightedInnerProduct::new(masses.to_vec()).unwrap()).unwrap().factor_map()
}

#[test]
fn partition_validation() {
    assert!(IntervalPartition::new((0, 4), vec![(0, 2), (2, 4)]).is_ok());
    assert!(IntervalPartition::new((0, 4), vec![(2, 4), (0, 2)]).is_ok());
    assert!(IntervalPartition::new((0, 4), vec![(0, 2), (1, 4)]).is_err());
    assert!(IntervalPartition::new((0, 4), vec![(0, 2)]).is_err());
    assert!(IntervalPartition::new((0, 4), vec![(0, 2), (2, 2), (2, 4)]).is_err());
    let d = IntervalPartition::dyadic((0, 8), 2).unwrap();
    assert_eq!(d.pieces(), &[(0, 2), (2, 4), (4, 6), (6, 8)]);
    assert_eq!(d.cover((2, 6)), Some(1..3));
    assert_eq!(d.cover((1, 6)), None);
    assert!(IntervalPartition::dyadic((0, 6), 2).is_err());
    let coarse = IntervalPartition::dyadic((0, 8), 1).unwrap();
    assert_eq!(coarse.refined_by(&d).unwrap(), vec![0..2, 2..4]);
    assert!(d.refined_by(&coarse).is_err());
}

#[test]
fn direct_sum_examples() {
    let ens = walks(5, (0, 4), 3);
    let w = WeightedInnerProduct::localized(&ens).unwrap();
    let big = intersection_matrix(&ens, (0, 4), lattice()).unwrap();

    let one = IntervalPartition::new((0, 4), vec![(0, 4)]).unwrap();
    let f = piece_factors(&ens, &one, lattice(), &w).unwrap();
    let sum = direct_sum_factor(&[f[0].factor_map()], big.entries()).unwrap();
    assert_eq!(sum.map, f[0].factor_map());

    let three = IntervalPartition::new((0, 4), vec![(0, 2), (2, 3), (3, 4)]).unwrap();
    let maps: Vec<FactorMap> = piece_factors(&ens, &three, lattice(), &w).unwrap().iter().map(|f| f.factor_map()).collect();
    let sum = direct_sum_factor(&maps, big.entries()).unwrap();
    assert!(sum.gram_error < 1e-10, "{}", sum.gram_error);
    assert_eq!(sum.blocks.len(), 3);

    // a piece kernel that does not add up is rejected
    let wrong = [maps[0].clone(), maps[1].clone()];
    assert!(matches!(direct_sum_factor(&wrong, big.entries()), Err(cplab::Error::Additivity(_))));
}

#[test]
fn gram_additivity_on_random_kernels() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let masses = vec![0.3, 1.2, 0.8, 2.0];
        let ks: Vec<DMatrix<f64>> = (0..3).map(|_| random_psd(&mut rng, 4, 2)).collect();
        let total = ks.iter().fold(DMatrix::zeros(4, 4), |acc, k| acc + k);
        let maps: Vec<FactorMap> = ks.iter().map(|k| factor(k, &masses)).collect();
        let sum = direct_sum_factor(&maps, &total).unwrap();
        assert!(sum.gram_error < 1e-12, "{}", sum.gram_error);
    }
}

#[test]
fn coupling_isometry_examples() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let masses = vec![1.0, 0.5, 2.0];
    // single piece: ι is the projector onto range(Y*)
    let k = random_psd(&mut rng, 3, 2);
    let y = factor(&k, &masses);
    let sum = direct_sum_factor(&[y.clone()], &k).unwrap();
    let iota = coupling_isometry(&y, &sum).unwrap();
    let p = range_projector(&y.y.transpose());
    assert!(max_abs_diff(&iota.matrix, &p) < 1e-10);

    for _ in 0..10 {
        let k1 = random_psd(&mut rng, 3, 2);
        let k2 = random_psd(&mut rng, 3, 1);
        let big = factor(&(&k1 + &k2), &masses);
        let sum = direct_sum_factor(&[factor(&k1, &masses), factor(&k2, &masses)], &(&k1 + &k2)).unwrap();
        let iota = coupling_isometry(&big, &sum).unwrap();
        assert!(iota.factor_error < 1e-10, "{}", iota.factor_error);
        assert!(iota.isometry_error < 1e-10, "{}", iota.isometry_error);
        assert!(iota.range_error < 1e-10, "{}", iota.range_error);
        // norms preserved on null(Y_big)^⊥
        let v = big.y.transpose() * DVector::from_vec(vec![0.3, -1.0, 0.7]);
        assert!(((&iota.matrix * &v).norm() - v.norm()).abs() < 1e-10);
    }
}

#[test]
fn refinement_is_consistent() {
    for seed in 0..5 {
        let ens = walks(5, (0, 8), seed);
        let w = WeightedInnerProduct::localized(&ens).unwrap();
        let big = spectral_factorize(&intersection_matrix(&ens, (0, 8), lattice()).unwrap(), &w).unwrap().factor_map();
        let coarse_p = IntervalPartition::dyadic((0, 8), 1).unwrap();
        let fine_p = IntervalPartition::dyadic((0, 8), 2).unwrap();
        let maps = |p: &IntervalPartition| -> Vec<FactorMap> {
            piece_factors(&ens, p, lattice(), &w).unwrap().iter().map(|f| f.factor_map()).collect()
        };
        let coarse = maps(&coarse_p);
        let fine = maps(&fine_p);
        let grouped: Vec<Vec<FactorMap>> = coarse_p.refined_by(&fine_p).unwrap().into_iter().map(|r| fine[r].to_vec()).collect();
        let err = refinement_consistency(&big, &coarse, &grouped).unwrap();
        assert!(err < 1e-8, "seed {seed}: {err}");
    }
}

#[test]
fn coupled_noise_examples() {
    // identity blocks: concatenation
    let y = FactorMap::new(DMatrix::identity(3, 3));
    let sum = direct_sum_factor(
        &[FactorMap::new(DMatrix::from_fn(3, 2, |i, j| if i == j { 1.0 } else { 0.0 })), FactorMap::new(DMatrix::from_fn(3, 1, |i, _| if i == 2 { 1.0 } else { 0.0 }))],
        &DMatrix::identity(3, 3),
    )
    .unwrap();
    let iota = coupling_isometry(&y, &sum).unwrap();
    let d1 = GaussianDraw::new(1.0, vec![0.5, -0.2]).unwrap();
    let d2 = GaussianDraw::new(1.0, vec![1.5]).unwrap();
    let big = coupled_noise(&[d1.clone(), d2.clone()], &iota).unwrap();
    for (a, b) in big.components.iter().zip([0.5, -0.2, 1.5]) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!(coupled_noise(&[d1.clone()], &iota).is_err());
    assert!(coupled_noise(&[d2.clone(), d1.clone()], &iota).is_err());

    // one path, one mode, split as (cos φ, sin φ)
    let phi: f64 = 0.7;
    let y = FactorMap::new(DMatrix::from_element(1, 1, 1.0));
    let sum = direct_sum_factor(
        &[FactorMap::new(DMatrix::from_element(1, 1, phi.cos())), FactorMap::new(DMatrix::from_element(1, 1, phi.sin()))],
        &DMatrix::from_element(1, 1, 1.0),
    )
    .unwrap();
    let iota = coupling_isometry(&y, &sum).unwrap();
    let big = coupled_noise(&[GaussianDraw::new(2.0, vec![0.3]).unwrap(), GaussianDraw::new(2.0, vec![-1.1]).unwrap()], &iota).unwrap();
    assert!((big.components[0] - (0.3 * phi.cos() - 1.1 * phi.sin())).abs() < 1e-12);
}

#[test]
fn coupled_noise_covariance() {
    // a 4-dimensional big coefficient space coupled to two 3-dimensional pieces
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let masses = vec![1.0; 4];
    let k1 = random_psd(&mut rng, 4, 3);
    let k2 = random_psd(&mut rng, 4, 3);
    let big = factor(&(&k1 + &k2), &masses);
    assert_eq!(big.rank(), 4);
    let sum = direct_sum_factor(&[factor(&k1, &masses), factor(&k2, &masses)], &(&k1 + &k2)).unwrap();
    let iota = coupling_isometry(&big, &sum).unwrap();
    let a = 0.7;
    let draws = 100_000;
    let mut cov = DMatrix::<f64>::zeros(4, 4);
    let mut piece_cross = DMatrix::<f64>::zeros(3, 3);
    for _ in 0..draws {
        let d1 = GaussianDraw::sample(a, 3, &mut rng).unwrap();
        let d2 = GaussianDraw::sample(a, 3, &mut rng).unwrap();
        let x = DVector::from_vec(coupled_noise(&[d1.clone(), d2.clone()], &iota).unwrap().components);
        cov += &x * x.transpose();
        piece_cross += DVector::from_vec(d1.components) * DVector::from_vec(d2.components).transpose();
    }
    cov /= draws as f64;
    piece_cross /= draws as f64;
    let target = DMatrix::<f64>::identity(4, 4) * a;
    let err = (&cov - &target).symmetric_eigen().eigenvalues.amax();
    assert!(err < 0.05 * a, "operator-norm error {err}");
    assert!(piece_cross.svd(false, false).singular_values.amax() < 0.05 * a);
}

#[test]
fn concatenation_trivial_cases() {
    let left = walks(3, (0, 3), 1);
    let right = walks(2, (5, 8), 2);
    let one = |_: [f64; 2], _: [f64; 2]| 1.0;
    let gauss = |x: [f64; 2], y: [f64; 2]| (-(x[0] * x[0] + x[1] * x[1] + y[0] * y[0] + y[1] * y[1])).exp();
    let battery: [&EndpointFn; 2] = [&one, &gauss];
    let r = concatenation_check(&left, &right, 2, lattice(), 0.0, 4, &battery).unwrap();
    assert_eq!(r.discrepancy, 0.0);

    let zero = ConcatenationSetup {
        left_masses: vec![1.0, 2.0],
        right_masses: vec![0.5],
        pairs: vec![(0, 0), (1, 0)],
        gap_factors: vec![0.3, 0.1],
        k_left: DMatrix::zeros(2, 2),
        k_right: DMatrix::zeros(1, 1),
        k_middle: DMatrix::zeros(2, 2),
    };
    let r = concatenation_check_matrices(&zero, 1.5, 8, &[vec![1.0, 1.0], vec![0.2, 3.0]]).unwrap();
    assert!(r.discrepancy <= 1e-12);
    assert!((r.conditional[0] - (0.15 + 0.1)).abs() < 1e-14);
}

fn random_setup(rng: &mut ChaCha8Rng, nl: usize, nr: usize) -> ConcatenationSetup {
    use rand::Rng;
    let pairs: Vec<(usize, usize)> = (0..nl).flat_map(|l| (0..nr).map(move |r| (l, r))).collect();
    let np = pairs.len();
    ConcatenationSetup {
        left_masses: (0..nl).map(|_| rng.random_range(0.2..2.0)).collect(),
        right_masses: (0..nr).map(|_| rng.random_range(0.2..2.0)).collect(),
        gap_factors: (0..np).map(|_| rng.random_range(0.05..0.5)).collect(),
        pairs,
        k_left: random_psd(rng, nl, nl),
        k_right: random_psd(rng, nr, nr),
        k_middle: random_psd(rng, np, np.min(2)),
    }
}

/// Integrates the coupled big GMC over the middle draw by tensor Gauss–Hermite quadrature.
fn quadrature_conditional(setup: &ConcatenationSetup, a: f64, report: &ConcatenationReport, f: &[f64]) -> f64 {
    let mu = setup.big_masses();
    let lift = |k: &DMatrix<f64>, side: usize| {
        let idx = |p: usize| if side == 0 { setup.pairs[p].0 } else { setup.pairs[p].1 };
        DMatrix::from_fn(mu.len(), mu.len(), |p, q| k[(idx(p), idx(q))])
    };
    let k1 = lift(&setup.k_left, 0);
    let k2 = lift(&setup.k_right, 1);
    let kc = setup.k_middle.clone();
    let big = factor(&(&k1 + &kc + &k2), &mu);
    let pieces = [factor(&k1, &mu), factor(&kc, &mu), factor(&k2, &mu)];
    let sum = direct_sum_factor(&pieces, &(&k1 + &kc + &k2)).unwrap();
    let iota = coupling_isometry(&big, &sum).unwrap();
    let yl = factor(&setup.k_left, &setup.left_masses);
    let yr = factor(&setup.k_right, &setup.right_masses);
    let lifted = |y: &FactorMap, side: usize| {
        FactorMap::new(DMatrix::from_fn(mu.len(), y.rank(), |p, j| {
            y.y[(if side == 0 { setup.pairs[p].0 } else { setup.pairs[p].1 }, j)]
        }))
    };
    let xi1 = partial_isometry(&pieces[0], &lifted(&yl, 0)).unwrap().transpose() * DVector::from_column_slice(&report.left_draw);
    let xi2 = partial_isometry(&pieces[2], &lifted(&yr, 1)).unwrap().transpose() * DVector::from_column_slice(&report.right_draw);
    let d1 = GaussianDraw::new(a, xi1.as_slice().to_vec()).unwrap();
    let d2 = GaussianDraw::new(a, xi2.as_slice().to_vec()).unwrap();
    let rc = pieces[1].rank();
    assert!(rc <= 2);
    let gh = gauss_hermite(40);
    let mut total = 0.0;
    let grid: Vec<Vec<(f64, f64)>> = if rc == 0 {
        vec![vec![]]
    } else if rc == 1 {
        gh.iter().map(|&n| vec![n]).collect()
    } else {
        gh.iter().flat_map(|&n1| gh.iter().map(move |&n2| vec![n1, n2])).collect()
    };
    for nodes in grid {
        let weight: f64 = nodes.iter().map(|n| n.1 / std::f64::consts::PI.sqrt()).product();
        let xc = GaussianDraw::new(a, nodes.iter().map(|n| (2.0 * a).sqrt() * n.0).collect()).unwrap();
        let draw = coupled_noise(&[d1.clone(), xc, d2.clone()], &iota).unwrap();
        total += weight * kahane_weights(&mu, &big, &draw).unwrap().pair(f);
    }
    total
}

#[test]
fn concatenation_matches_quadrature_oracle_on_two_paths() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for trial in 0..5 {
        let setup = random_setup(&mut rng, 2, 1);
        let f = vec![1.0, 0.4];
        let r = concatenation_check_matrices(&setup, 0.5, trial, &[f.clone()]).unwrap();
        let oracle = quadrature_conditional(&setup, 0.5, &r, &f);
        assert!(((r.conditional[0] - oracle) / oracle).abs() < 1e-10, "{} vs {oracle}", r.conditional[0]);
        assert!(r.discrepancy < 1e-10);
    }
}

#[test]
fn concatenation_on_random_kernels() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for trial in 0..10 {
        let setup = random_setup(&mut rng, 3, 1);
        let r = concatenation_check_matrices(&setup, 0.5, trial, &[vec![1.0; 3], vec![0.0, 2.0, 0.5]]).unwrap();
        assert!(r.discrepancy <= 1e-6, "{}", r.discrepancy);
        assert!(r.factor_error < 1e-8);
    }
}

#[test]
fn concatenation_on_sampled_walks() {
    let one = |_: [f64; 2], _: [f64; 2]| 1.0;
    let gauss = |x: [f64; 2], y: [f64; 2]| (-(x[0] * x[0] + x[1] * x[1]) - 0.5 * (y[0] * y[0] + y[1] * y[1])).exp();
    let boxed = |x: [f64; 2], _: [f64; 2]| if x[0].abs() <= 0.5 && x[1].abs() <= 0.5 { 1.0 } else { 0.0 };
    let battery: [&EndpointFn; 3] = [&one, &gauss, &boxed];
    for seed in 0..5 {
        let left = walks(3, (0, 6), 10 + seed);
        let right = walks(3, (8, 14), 20 + seed);
        let r = concatenation_check(&left, &right, 2, lattice(), 0.5, seed, &battery).unwrap();
        assert!(r.discrepancy <= 1e-6, "{}", r.discrepancy);
    }
}

#[test]
fn naimark_examples() {
    let ens = walks(4, (0, 8), 7);
    let w = WeightedInnerProduct::localized(&ens).unwrap();
    let two = IntervalPartition::from_cuts((0, 8), &[4]).unwrap();
    for sub in [(0, 4), (4, 8), (0, 8)] {
        let r = partition_check(&ens, &two, sub, lattice(), &w).unwrap();
        assert!(r.naimark_discrepancy <= 1e-8, "{sub:?}: {r:?}");
        assert!(r.isometry_error <= 1e-10 && r.factor_error <= 1e-8 && r.gram_error <= 1e-12);
    }
    assert!(partition_check(&ens, &two, (2, 6), lattice(), &w).is_err());

    // separated paths never meet off the diagonal, and an empty piece has zero operator
    let far = WeightedPathEnsemble::new(
        vec![
            LatticePath::from_positions(0, vec![[0, 0]; 5]).unwrap(),
            LatticePath::from_positions(0, vec![[9, 9]; 5]).unwrap(),
        ],
        vec![1.0, 1.0],
        (0, 4),
        EnsembleMeta::reference(16),
    )
    .unwrap();
    let wf = WeightedInnerProduct::uniform(2);
    let p = IntervalPartition::from_cuts((0, 4), &[2]).unwrap();
    let r = partition_check(&far, &p, (0, 2), lattice(), &wf).unwrap();
    assert!(r.naimark_discrepancy <= 1e-12);
}

#[test]
fn projection_decays_on_shrinking_windows() {
    let ens = walks(5, (0, 16), 12);
    let w = WeightedInnerProduct::localized(&ens).unwrap();
    let psi = vec![1.0, -0.5, 0.3, 0.8, 0.2];
    let norms = projection_decay(&ens, &[(0, 16), (0, 8), (0, 4), (0, 2), (0, 1)], lattice(), &w, &psi).unwrap();
    for pair in norms.windows(2) {
        assert!(pair[1] < pair[0], "{norms:?}");
    }
    // the full window recovers ‖Y* ψ‖
    let big = spectral_factorize(&intersection_matrix(&ens, (0, 16), lattice()).unwrap(), &w).unwrap().factor_map();
    let d_psi = DVector::from_iterator(5, psi.iter().zip(w.masses()).map(|(a, m)| a * m));
    assert!((norms[0] - (big.y.transpose() * d_psi).norm()).abs() < 1e-10);
}
