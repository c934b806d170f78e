mod support;

use cplab::gmc::*;
use cplab::paths::*;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use support::{random_masses, random_orthogonal, random_psd, symbolic_moment, tuple_function};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn spectral_examples() {
    let id = spectral_factorize_matrix(&DMatrix::identity(3, 3), &WeightedInnerProduct::uniform(3)).unwrap();
    assert_eq!(id.eigenvalues.len(), 3);
    for l in &id.eigenvalues {
        assert!((l - 1.0).abs() < 1e-14);
    }
    assert!((id.reconstruct() - DMatrix::identity(3, 3)).amax() < 1e-14);

    let k = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
    let f = spectral_factorize_matrix(&k, &WeightedInnerProduct::uniform(2)).unwrap();
    assert!((f.eigenvalues[0] - 3.0).abs() < 1e-14 && (f.eigenvalues[1] - 1.0).abs() < 1e-14);
    let s = 0.5f64.sqrt();
    assert!((f.eigenvectors[0][0].abs() - s).abs() < 1e-14 && (f.eigenvectors[0][0] - f.eigenvectors[0][1]).abs() < 1e-14);
    assert!((f.eigenvectors[1][0] + f.eigenvectors[1][1]).abs() < 1e-14);

    let zero = spectral_factorize_matrix(&DMatrix::zeros(3, 3), &WeightedInnerProduct::uniform(3)).unwrap();
    assert_eq!(zero.rank(), 0);

    let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
    assert!(spectral_factorize_matrix(&bad, &WeightedInnerProduct::uniform(2)).is_err());
    let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
    assert!(spectral_factorize_matrix(&asym, &WeightedInnerProduct::uniform(2)).is_err());
    assert!(WeightedInnerProduct::new(vec![1.0, 0.0]).is_err());
}

#[test]
fn spectral_factor_invariants() {
    let mut r = rng(1);
    for _ in 0..20 {
        let n = r.random_range(2..8);
        let rank = r.random_range(1..=n);
        let k = random_psd(&mut r, n, rank);
        let w = WeightedInnerProduct::new(random_masses(&mut r, n)).unwrap();
        let f = spectral_factorize_matrix(&k, &w).unwrap();
        for i in 0..f.rank() {
            for j in 0..f.rank() {
                let g = w.inner(&f.eigenvectors[i], &f.eigenvectors[j]);
                assert!((g - if i == j { 1.0 } else { 0.0 }).abs() < 1e-10);
            }
        }
        assert!(f.eigenvalues.windows(2).all(|p| p[0] >= p[1]));
        assert!((f.reconstruct() - &k).amax() < 1e-8);
        assert!((f.factor_map().kernel() - &k).amax() < 1e-8);
        let json: serde_json::Value = serde_json::from_str(&f.to_json().unwrap()).unwrap();
        assert!(json.get("eigenvalues").is_some());
    }
}

#[test]
fn kahane_examples() {
    let base = [0.3, 0.7];
    let k = DMatrix::from_row_slice(2, 2, &[0.8, 0.8, 0.8, 0.8]);
    let y = spectral_factorize_matrix(&k, &WeightedInnerProduct::new(base.to_vec()).unwrap()).unwrap().factor_map();
    let r0 = kahane_weights(&base, &y, &GaussianDraw::zero(0.0, y.rank()).unwrap()).unwrap();
    assert_eq!(r0.new_weights, base.to_vec());
    assert!(kahane_weights(&base, &y, &GaussianDraw::zero(1.0, y.rank() + 1).unwrap()).is_err());
    assert!(GaussianDraw::new(-1.0, vec![]).is_err());

    // single path: factor exp(ξ√ℓ − aℓ/2) with unit mean
    let l: f64 = 0.6;
    let one = FactorMap::new(DMatrix::from_element(1, 1, l.sqrt()));
    let r = kahane_weights(&[1.0], &one, &GaussianDraw::new(1.5, vec![0.4]).unwrap()).unwrap();
    assert!((r.new_weights[0] - (0.4 * l.sqrt() - 0.75 * l).exp()).abs() < 1e-15);
    assert!((expected_factors(&one, 1.5)[0] - 1.0).abs() < 1e-15);

    // two fully overlapping paths: E[M₁M₂] = μ₁μ₂ e^{aℓ}
    let a = 0.5;
    let mut g = rng(2);
    let draws = 100_000;
    let mut s = 0.0;
    let mut s2 = 0.0;
    let mut mean = [0.0; 2];
    for _ in 0..draws {
        let d = GaussianDraw::sample(a, y.rank(), &mut g).unwrap();
        let w = kahane_weights(&base, &y, &d).unwrap().new_weights;
        let p = w[0] * w[1];
        s += p;
        s2 += p * p;
        mean[0] += w[0];
        mean[1] += w[1];
        assert!(w.iter().all(|x| *x > 0.0));
    }
    let m = s / draws as f64;
    let se = ((s2 / draws as f64 - m * m) / draws as f64).sqrt();
    let exact = base[0] * base[1] * (a * 0.8f64).exp();
    assert!((m - exact).abs() < 3.0 * se, "{m} ± {se} vs {exact}");
    assert!((mean[0] / draws as f64 - base[0]).abs() < 0.02 * base[0]);
}

#[test]
fn draws_have_the_requested_strength() {
    let mut g = rng(3);
    let a = 2.5;
    let n = 40_000;
    let d = GaussianDraw::sample(a, n, &mut g).unwrap();
    let mean = d.components.iter().sum::<f64>() / n as f64;
    let var = d.components.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!(mean.abs() < 4.0 * (a / n as f64).sqrt());
    assert!((var - a).abs() < 4.0 * a * (2.0 / n as f64).sqrt());
}

#[test]
fn moment_oracle_examples() {
    let masses = [0.4, 1.3];
    let k = DMatrix::from_row_slice(2, 2, &[0.9, 0.2, 0.2, 0.5]);
    let f = |t: &[usize]| (t[0] + 1) as f64;
    let one = gmc_moment_oracle(&masses, &k, 3.0, 1, &f).unwrap();
    assert!((one - (0.4 + 2.0 * 1.3)).abs() < 1e-15);
    let flat = gmc_moment_oracle(&masses, &k, 0.0, 3, &|_: &[usize]| 1.0).unwrap();
    assert!((flat - 1.7f64.powi(3)).abs() < 1e-13);
    let a = 0.7;
    let two = gmc_moment_oracle(&masses, &k, a, 2, &|_: &[usize]| 1.0).unwrap();
    let exact = 0.16 * (a * 0.9f64).exp() + 2.0 * 0.4 * 1.3 * (a * 0.2f64).exp() + 1.69 * (a * 0.5f64).exp();
    assert!((two - exact).abs() < 1e-14);
    assert!(gmc_moment_oracle(&masses, &k, a, 5, &|_: &[usize]| 1.0).is_err());
    assert!(gmc_moment_oracle(&vec![1.0; 100], &DMatrix::zeros(100, 100), a, 4, &|_: &[usize]| 1.0).is_err());
}

#[test]
fn kahane_moment_formula_is_exact() {
    let mut r = rng(4);
    for trial in 0..15u64 {
        let m = r.random_range(1..=6);
        let rank = r.random_range(1..=m);
        let k = random_psd(&mut r, m, rank);
        let masses = random_masses(&mut r, m);
        let y = spectral_factorize_matrix(&k, &WeightedInnerProduct::new(masses.clone()).unwrap()).unwrap().factor_map();
        let f = tuple_function(trial);
        for n in 1..=4 {
            for a in [0.0, 0.5, 2.0] {
                let oracle = gmc_moment_oracle(&masses, &k, a, n, &f).unwrap();
                let brute = symbolic_moment(&masses, &y.y, a, n, &f);
                assert!((oracle - brute).abs() <= 1e-10 * brute, "m={m} n={n} a={a}: {oracle} vs {brute}");
            }
        }
    }
}

#[test]
fn shamov_identities() {
    let mut r = rng(5);
    let masses = random_masses(&mut r, 3);
    let k = random_psd(&mut r, 3, 3);
    let y = spectral_factorize_matrix(&k, &WeightedInnerProduct::new(masses.clone()).unwrap()).unwrap().factor_map();
    let d = GaussianDraw::sample(1.0, y.rank(), &mut r).unwrap();
    assert_eq!(shamov_shift_check(&masses, &y, &d, &vec![0.0; y.rank()]).unwrap(), 0.0);
    for _ in 0..20 {
        let h: Vec<f64> = (0..y.rank()).map(|_| r.sample::<f64, _>(StandardNormal)).collect();
        assert!(shamov_shift_check(&masses, &y, &d, &h).unwrap() <= 1e-12);
    }
    let mut e1 = vec![0.0; y.rank()];
    e1[0] = 10.0;
    assert!(shamov_shift_check(&masses, &y, &d, &e1).unwrap() <= 1e-10);
    assert!(shamov_shift_check(&masses, &y, &d, &[1.0]).is_err());
    for (f, m) in expected_factors(&y, 1.7).iter().zip(&masses) {
        assert!((f * m - m).abs() <= 1e-15 * m);
    }
    // exponents past the guard are reported
    let huge = GaussianDraw::new(1.0, vec![1e4; y.rank()]).unwrap();
    assert!(kahane_weights(&masses, &y, &huge).is_err());
}

#[test]
fn partial_isometry_between_factorizations() {
    let mut r = rng(6);
    for _ in 0..20 {
        let n = r.random_range(2..7);
        let rank = r.random_range(1..=n);
        let k = random_psd(&mut r, n, rank);
        let masses = random_masses(&mut r, n);
        let y1 = spectral_factorize_matrix(&k, &WeightedInnerProduct::new(masses.clone()).unwrap()).unwrap().factor_map();
        let q = random_orthogonal(&mut r, y1.rank() + 2);
        // Y2 lives in a larger coefficient space: Y1 padded with zero columns, then rotated
        let mut padded = DMatrix::zeros(n, y1.rank() + 2);
        padded.view_mut((0, 0), (n, y1.rank())).copy_from(&y1.y);
        let y2 = FactorMap::new(&padded * &q);
        let iota = partial_isometry(&y1, &y2).unwrap();
        assert!((&y2.y * &iota - &y1.y).amax() < 1e-8);
        // ι*ι projects onto range(Y1*)
        let p = range_projector(&y1.y.transpose());
        assert!((iota.transpose() * &iota - p).amax() < 1e-8);
        let v = DMatrix::from_fn(y1.rank(), 1, |_, _| r.sample::<f64, _>(StandardNormal));
        let v = range_projector(&y1.y.transpose()) * v;
        assert!(((&iota * &v).norm() - v.norm()).abs() < 1e-8 * v.norm().max(1.0));

        // same law: moments under both factors agree
        let f = tuple_function(n as u64);
        for a in [0.5, 2.0] {
            for order in 1..=3 {
                let m1 = symbolic_moment(&masses, &y1.y, a, order, &f);
                let m2 = symbolic_moment(&masses, &y2.y, a, order, &f);
                assert!((m1 - m2).abs() <= 1e-10 * m1);
            }
        }
    }
    let y1 = FactorMap::new(DMatrix::identity(2, 2));
    assert!((partial_isometry(&y1, &y1).unwrap() - DMatrix::identity(2, 2)).amax() < 1e-14);
    let other = FactorMap::new(DMatrix::identity(2, 2) * 2.0);
    assert!(partial_isometry(&y1, &other).is_err());
}

#[test]
fn partial_isometry_recovers_a_rotation() {
    let mut r = rng(7);
    let k = random_psd(&mut r, 5, 5);
    let y1 = spectral_factorize_matrix(&k, &WeightedInnerProduct::uniform(5)).unwrap().factor_map();
    let q = random_orthogonal(&mut r, 5);
    let y2 = FactorMap::new(&y1.y * &q);
    let iota = partial_isometry(&y1, &y2).unwrap();
    assert!((iota - q.transpose()).amax() < 1e-8);
}

/// Walks on `(0, 6)` extended by `extra` random continuations each to `(0, 12)`.
fn extensions(seed: u64, paths: usize, extra: usize) -> (WeightedPathEnsemble, WeightedPathEnsemble) {
    let b = StartBox::new((-1, 1), (-1, 1)).unwrap();
    let small = sample_reference_walks(paths, (0, 6), 64, b, seed).unwrap();
    let mut r = rng(seed);
    let mut big_paths = Vec::new();
    for p in small.paths() {
        for _ in 0..extra {
            let tail = LatticePath::sample(&mut r, 6, *p.positions().last().unwrap(), 6);
            let mut pos = p.positions().to_vec();
            pos.extend_from_slice(&tail.positions()[1..]);
            big_paths.push(LatticePath::from_positions(0, pos).unwrap());
        }
    }
    let w = vec![1.0; big_paths.len()];
    let big = WeightedPathEnsemble::new(big_paths, w, (0, 12), EnsembleMeta::reference(64)).unwrap();
    (small, big)
}

#[test]
fn embedding_reproduces_the_restricted_kernel() {
    let mode = IntersectionMode::Lattice(LatticeScale::ErdosTaylor);
    for seed in 0..10u64 {
        let (small, big) = extensions(seed, 4, 2 + seed as usize % 3);
        let k = intersection_matrix(&small, (0, 6), mode).unwrap();
        let factor = spectral_factorize(&k, &WeightedInnerProduct::localized(&small).unwrap()).unwrap();
        let emb = embed_factor(&factor, &small, &big, mode).unwrap();
        assert!(emb.discrepancy <= 1e-8, "seed {seed}: {}", emb.discrepancy);
        for (p, &q) in emb.matches.iter().enumerate() {
            for kk in 0..factor.rank() {
                assert!((emb.table[kk][p] - factor.eigenvectors[kk][q]).abs() < 1e-8);
            }
        }
    }
    // one path: the embedded eigenvector is constant across its extensions
    let (small, big) = extensions(42, 1, 4);
    let k = intersection_matrix(&small, (0, 6), mode).unwrap();
    let factor = spectral_factorize(&k, &WeightedInnerProduct::localized(&small).unwrap()).unwrap();
    let emb = embed_factor(&factor, &small, &big, mode).unwrap();
    assert!(emb.table[0].iter().all(|v| (v - emb.table[0][0]).abs() < 1e-14));
    // restrictions absent from the small ensemble
    assert!(embed_factor(&factor, &small, &extensions(43, 3, 1).1, mode).is_err());
}

#[test]
fn two_stage_gmc_composes_strengths() {
    let mut r = rng(8);
    for trial in 0..10u64 {
        let m = r.random_range(1..=5);
        let rank = r.random_range(1..=m);
        let k = random_psd(&mut r, m, rank);
        let masses = random_masses(&mut r, m);
        let (a1, a2) = (r.random_range(0.1..1.5), r.random_range(0.1..1.5));
        let y = spectral_factorize_matrix(&k, &WeightedInnerProduct::new(masses.clone()).unwrap()).unwrap().factor_map();
        // second stage re-factorizes the kernel in the weights of a first-stage realization
        let draw = GaussianDraw::sample(a1, y.rank(), &mut r).unwrap();
        let stage1 = kahane_weights(&masses, &y, &draw).unwrap();
        let y2 = spectral_factorize_matrix(&k, &WeightedInnerProduct::new(stage1.new_weights.clone()).unwrap()).unwrap().factor_map();
        let f = tuple_function(trial);
        for n in 1..=2 {
            // E over the second stage is a tuple function of the first-stage weights
            let inner = |t: &[usize]| {
                let mut sum = vec![0.0; y2.rank()];
                let mut sq = 0.0;
                for &i in t {
                    for j in 0..y2.rank() {
                        sum[j] += y2.y[(i, j)];
                        sq += y2.y[(i, j)].powi(2);
                    }
                }
                let lin: f64 = sum.iter().map(|s| s * s).sum();
                (0.5 * a2 * (lin - sq)).exp() * f(t)
            };
            let two_stage = symbolic_moment(&masses, &y.y, a1, n, &inner);
            let one_stage = gmc_moment_oracle(&masses, &k, a1 + a2, n, &f).unwrap();
            assert!((two_stage - one_stage).abs() <= 1e-10 * one_stage, "{two_stage} vs {one_stage}");
        }
    }
}

#[test]
fn flow_examples() {
    let masses = vec![0.5, 1.0, 1.5];
    let mut r = rng(9);
    let k = random_psd(&mut r, 3, 2);
    let y = spectral_factorize_matrix(&k, &WeightedInnerProduct::new(masses.clone()).unwrap()).unwrap().factor_map();
    let f = gmc_flow(&masses, &y, &[0.0], 1, 0).unwrap();
    assert_eq!(f.realizations.len(), 1);
    assert_eq!(f.realizations[0].new_weights, masses);
    assert!(gmc_flow(&masses, &y, &[0.0, 1.0, 1.0], 1, 0).is_err());
    assert!(gmc_flow(&masses, &y, &[0.5, 1.0], 1, 0).is_err());
    assert_eq!(gmc_flow(&masses, &y, &[0.0, 1.0], 1, 3).unwrap(), gmc_flow(&masses, &y, &[0.0, 1.0], 1, 3).unwrap());
}

#[test]
fn flow_is_a_martingale() {
    let masses = vec![0.5, 1.0, 1.5, 0.8];
    let mut r = rng(10);
    let k = random_psd(&mut r, 4, 3) * 0.5;
    let y = spectral_factorize_matrix(&k, &WeightedInnerProduct::new(masses.clone()).unwrap()).unwrap().factor_map();
    let grid = [0.0, 0.5, 1.0, 2.0];
    let test_f = [1.0, 0.0, 2.0, 0.5];
    let flows = 10_000;
    let mut sums = vec![0.0; grid.len()];
    let mut sq = vec![0.0; grid.len()];
    for i in 0..flows {
        let v = gmc_flow(&masses, &y, &grid, 11, i).unwrap().pair(&test_f);
        for (k, x) in v.iter().enumerate() {
            sums[k] += x - v[0];
            sq[k] += (x - v[0]).powi(2);
        }
    }
    for k in 1..grid.len() {
        let m = sums[k] / flows as f64;
        let se = ((sq[k] / flows as f64 - m * m) / flows as f64).sqrt();
        assert!(m.abs() < 3.0 * se, "a = {}: drift {m} ± {se}", grid[k]);
    }
}
