//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use cplab::delta_bose::{j_theta_scaled_log, Point, TwoParticle};
use cplab::quad::{integrate, QuadSettings};
use nalgebra::{DMatrix, Matrix4, Vector4};
use rand::Rng;
use rand_distr::StandardNormal;

/// One heat factor `p(s, L z − c)` over `z = (y, y') ∈ R⁴`, `L` picking `y`, `y'` or `y − y'`.
#[derive(Clone, Copy)]
pub enum Pick {
    Y,
    Yp,
    Diff,
}

fn selector(p: Pick) -> [[f64; 4]; 2] {
    match p {
        Pick::Y => [[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]],
        Pick::Yp => [[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]],
        Pick::Diff => [[1.0, 0.0, -1.0, 0.0], [0.0, 1.0, 0.0, -1.0]],
    }
}

/// `∫_{R⁴} ∏ p(s_k, L_k z − c_k) dz` by completing the square.
pub fn gaussian_integral_4d(factors: &[(Pick, f64, Point)]) -> f64 {
    let mut a = Matrix4::<f64>::zeros();
    let mut b = Vector4::<f64>::zeros();
    let mut c0 = 0.0;
    let mut log_norm = 0.0;
    for &(pick, s, c) in factors {
        let l = selector(pick);
        for i in 0..4 {
            for j in 0..4 {
                a[(i, j)] += (l[0][i] * l[0][j] + l[1][i] * l[1][j]) / s;
            }
            b[i] += (l[0][i] * c[0] + l[1][i] * c[1]) / s;
        }
        c0 += (c[0] * c[0] + c[1] * c[1]) / s;
        log_norm -= (2.0 * PI * s).ln();
    }
    let chol = a.cholesky().expect("positive definite precision");
    let x = chol.solve(&b);
    let det = chol.determinant();
    (log_norm + 2.0 * (2.0 * PI).ln() - 0.5 * det.ln() + 0.5 * b.dot(&x) - 0.5 * c0).exp()
}

/// Unreduced spatial integrand of the single diagram at times `(u, v, w)`.
pub fn diagram_spatial(x: [Point; 2], xp: [Point; 2], u: f64, v: f64, w: f64) -> f64 {
    let v = v.max(1e-12);
    gaussian_integral_4d(&[
        (Pick::Y, u, x[0]),
        (Pick::Y, u, x[1]),
        (Pick::Diff, v / 2.0, [0.0, 0.0]),
        (Pick::Yp, w, xp[0]),
        (Pick::Yp, w, xp[1]),
    ])
}

/// The same integrand as a plain 4D trapezoid sum on a box.
pub fn diagram_spatial_grid(x: [Point; 2], xp: [Point; 2], u: f64, v: f64, w: f64, h: f64, half_width: f64) -> f64 {
    let n = (2.0 * half_width / h).round() as i64;
    let heat = |s: f64, dx: f64, dy: f64| (-(dx * dx + dy * dy) / (2.0 * s)).exp() / (2.0 * PI * s);
    let coords: Vec<f64> = (0..=n).map(|i| -half_width + i as f64 * h).collect();
    let mut total = 0.0;
    for &y0 in &coords {
        for &y1 in &coords {
            let left = heat(u, x[0][0] - y0, x[0][1] - y1) * heat(u, x[1][0] - y0, x[1][1] - y1);
            if left < 1e-300 {
                continue;
            }
            for &z0 in &coords {
                for &z1 in &coords {
                    total += left
                        * heat(v / 2.0, y0 - z0, y1 - z1)
                        * heat(w, z0 - xp[0][0], z1 - xp[0][1])
                        * heat(w, z0 - xp[1][0], z1 - xp[1][1]);
                }
            }
        }
    }
    total * h.powi(4)
}

/// `4π ∫_{u+v+w=t} j^θ(v) S(u, v, w)` with `v` in exp-log variables and `u` plain.
pub fn diagram_bruteforce(theta: f64, t: f64, x: [Point; 2], xp: [Point; 2], tol: f64) -> f64 {
    let ln_t = t.ln();
    let outer = integrate(
        |r: f64| {
            if r <= 0.0 {
                return 0.0;
            }
            let ln_v = ln_t + 1.0 - 1.0 / r;
            let v = ln_v.exp();
            let vj = j_theta_scaled_log(theta, ln_v);
            let rest = t - v;
            if rest <= 0.0 {
                return 0.0;
            }
            let inner = integrate(|u| diagram_spatial(x, xp, u, v, rest - u), 0.0, rest, &QuadSettings::rel(tol * 1e-2));
            vj * inner.value / (r * r)
        },
        0.0,
        1.0,
        &QuadSettings::rel(tol),
    );
    4.0 * PI * outer.value
}

/// `e^{-z} I_0(z)`.
pub fn bessel_i0_scaled(z: f64) -> f64 {
    integrate(|phi: f64| (z * (phi.cos() - 1.0)).exp(), 0.0, PI, &QuadSettings::rel(1e-13)).value / PI
}

/// `∫ R_s(d, δ) R_s(δ, d') dδ` for `s = t/2`, reduced to radial integrals.
pub fn chapman_kolmogorov_lhs(tp: &TwoParticle, s: f64, d: Point, dp: Point, tol: f64) -> f64 {
    let a = (d[0] * d[0] + d[1] * d[1]).sqrt();
    let b = (dp[0] * dp[0] + dp[1] * dp[1]).sqrt();
    let dd = [d[0] - dp[0], d[1] - dp[1]];
    // heat ⋆ heat
    let heat = (-(dd[0] * dd[0] + dd[1] * dd[1]) / (8.0 * s)).exp() / (8.0 * PI * s);
    // angular averages of p(2s, d − δ) against |δ| = ρ
    let ring = |r0: f64, rho: f64| {
        let v = 2.0 * s;
        (-(r0 - rho).powi(2) / (2.0 * v)).exp() * bessel_i0_scaled(r0 * rho / v) / v
    };
    let integrand = |rho: f64| {
        if rho <= 0.0 {
            return 0.0;
        }
        let c_left = tp.correction(s, a, rho).expect("correction").value;
        let c_right = tp.correction(s, rho, b).expect("correction").value;
        rho * (ring(a, rho) * c_right + c_left * ring(b, rho) + 2.0 * PI * c_left * c_right)
    };
    let settings = QuadSettings::rel(tol);
    let cut = 1.0;
    let near = integrate(integrand, 0.0, cut, &settings);
    let far = integrate(integrand, cut, 12.0, &settings);
    heat + near.value + far.value
}

/// Gauss–Hermite nodes and weights for `∫ e^{−x²} f(x) dx` (Golub–Welsch).
pub fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            ((i.max(j)) as f64 / 2.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = jacobi.symmetric_eigen();
    let mut out: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], PI.sqrt() * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// Random PSD matrix `A Aᵀ` with `A` of shape `n × r`.
pub fn random_psd<R: Rng>(rng: &mut R, n: usize, r: usize) -> DMatrix<f64> {
    let a = DMatrix::from_fn(n, r, |_, _| rng.random_range(-1.0..1.0));
    &a * a.transpose()
}

/// Gauss–Legendre nodes and weights on `[a, b]` (Golub–Welsch).
pub fn gauss_legendre(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i + 1 == j || j + 1 == i {
            let k = i.max(j) as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = jacobi.symmetric_eigen();
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut out: Vec<(f64, f64)> = (0..n)
        .map(|k| (mid + half * eig.eigenvalues[k], half * 2.0 * eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out
}

pub fn random_masses(r: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.random_range(0.2..2.0)).collect()
}

/// `E Π_k M_{i_k}` through the lognormal identity `E e^{⟨c, ξ⟩} = e^{(a/2)|c|²}` applied to the
/// rows of `y`, summed over every tuple.
pub fn symbolic_moment(masses: &[f64], y: &DMatrix<f64>, a: f64, n: usize, f: &dyn Fn(&[usize]) -> f64) -> f64 {
    let m = masses.len();
    let mut total = 0.0;
    let mut idx = vec![0usize; n];
    for code in 0..m.pow(n as u32) {
        let mut c = code;
        for k in 0..n {
            idx[k] = c % m;
            c /= m;
        }
        let mut sum = vec![0.0; y.ncols()];
        let mut sq = 0.0;
        let mut mass = 1.0;
        for &i in &idx {
            mass *= masses[i];
            for j in 0..y.ncols() {
                sum[j] += y[(i, j)];
                sq += y[(i, j)] * y[(i, j)];
            }
        }
        let lin: f64 = sum.iter().map(|s| s * s).sum();
        total += mass * (0.5 * a * (lin - sq)).exp() * f(&idx);
    }
    total
}

pub fn tuple_function(seed: u64) -> impl Fn(&[usize]) -> f64 {
    move |t: &[usize]| {
        let mut h = seed;
        for &i in t {
            h = h.wrapping_mul(6364136223846793005).wrapping_add(i as u64 + 1442695040888963407);
        }
        0.5 + (h >> 40) as f64 / (1u64 << 24) as f64
    }
}

pub fn random_orthogonal(r: &mut impl Rng, k: usize) -> DMatrix<f64> {
    let g = DMatrix::from_fn(k, k, |_, _| r.sample::<f64, _>(StandardNormal));
    g.qr().q()
}
