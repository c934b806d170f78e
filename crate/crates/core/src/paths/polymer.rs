//! Quenched directed polymers by transfer matrices.
//!
//! For a fixed disorder field the point-to-field partition function is computed exactly on
//! a lattice box by the backward recursion
//! `u_{n−1}(x) = Σ_s P(s) e^{βω(n, x+s) − β²/2} u_n(x+s)`, `u_T = g'`, and
//! `Z(g, g') = (4/N) Σ_x g(x) u_0(x)`. Paths are then drawn exactly from the normalized
//! polymer measure by the Doob transform, recomputing the backward values segment by
//! segment from √T checkpoints so memory stays at `O(√T)` slices.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::disorder::{DisorderField, TILE};
use super::ensemble::{cell_area, spatial_scale, to_continuum, EnsembleMeta, WeightedPathEnsemble};
use super::walk::{LatticePath, Site, STEPS};
use crate::delta_bose::GaussianProfile;
use crate::error::{domain, Error, Result};
use crate::rng::SeedStreams;

/// Lattice box `[−half, half]²` with a zero frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolymerDomain {
    pub n: u64,
    pub steps: i64,
    pub half: i32,
}

impl PolymerDomain {
    /// Box of diffusive half-width `half_width`.
    pub fn new(n: u64, steps: i64, half_width: f64) -> Result<Self> {
        if n < 2 || steps < 1 || !(half_width > 0.0) {
            return domain(format!("invalid polymer domain N = {n}, steps = {steps}, half-width = {half_width}"));
        }
        let half = (half_width / spatial_scale(n)).ceil() as i32;
        Ok(PolymerDomain { n, steps, half })
    }

    fn width(&self) -> usize {
        (2 * self.half + 3) as usize
    }

    fn sites(&self) -> usize {
        self.width() * self.width()
    }

    #[inline]
    fn index(&self, z: Site) -> usize {
        let w = self.width() as i32;
        ((z[1] + self.half + 1) * w + z[0] + self.half + 1) as usize
    }

    fn site(&self, idx: usize) -> Site {
        let w = self.width() as i32;
        let i = idx as i32;
        [i % w - self.half - 1, i / w - self.half - 1]
    }

    fn interior(&self) -> impl Iterator<Item = Site> + '_ {
        let h = self.half;
        (-h..=h).flat_map(move |y| (-h..=h).map(move |x| [x, y]))
    }

    /// Writes `ω(u, ·)` on the box into `out` (frame untouched).
    fn fill_disorder(&self, field: &DisorderField, u: i64, out: &mut [f64]) {
        let h = self.half;
        let (lo, hi) = ((-h).div_euclid(TILE), h.div_euclid(TILE));
        for ty in lo..=hi {
            for tx in lo..=hi {
                let tile = field.tile(u, tx, ty);
                for ly in 0..TILE {
                    let y = ty * TILE + ly;
                    if y < -h || y > h {
                        continue;
                    }
                    for lx in 0..TILE {
                        let x = tx * TILE + lx;
                        if x < -h || x > h {
                            continue;
                        }
                        out[self.index([x, y])] = tile[(ly * TILE + lx) as usize];
                    }
                }
            }
        }
    }

    fn sample_grid(&self, f: &GaussianProfile) -> Vec<f64> {
        let mut out = vec![0.0; self.sites()];
        for z in self.interior() {
            out[self.index(z)] = f.eval(to_continuum(z, self.n));
        }
        out
    }
}

/// `v = e^{βω − β²/2} ⊙ u` and `prev = P v` on the interior. `plant` adds `β` to the
/// disorder at one site.
fn backward_step(
    dom: &PolymerDomain,
    omega: &[f64],
    beta: f64,
    plant: Option<usize>,
    u: &[f64],
    v: &mut [f64],
    prev: &mut [f64],
) {
    let half_b2 = 0.5 * beta * beta;
    let w = dom.width();
    let h = dom.half as usize;
    for row in 1..=(2 * h + 1) {
        let base = row * w;
        for col in 1..=(2 * h + 1) {
            let i = base + col;
            v[i] = if beta == 0.0 { u[i] } else { (beta * omega[i] - half_b2).exp() * u[i] };
        }
    }
    if let Some(i) = plant {
        v[i] *= (beta * beta).exp();
    }
    for row in 1..=(2 * h + 1) {
        let base = row * w;
        for col in 1..=(2 * h + 1) {
            let i = base + col;
            prev[i] = 0.5 * v[i] + 0.125 * (v[i - 1] + v[i + 1] + v[i - w] + v[i + w]);
        }
    }
}

/// `v_n` for `n ∈ (seg_start, seg_end]`, in increasing time, recomputed from the backward
/// values at `seg_end`.
#[allow(clippy::too_many_arguments)]
fn segment_values(
    dom: &PolymerDomain,
    field: &DisorderField,
    betas: &[f64],
    plant: &dyn Fn(usize, usize) -> Option<usize>,
    at_end: &[&[f64]],
    seg_start: usize,
    seg_end: usize,
    disordered: bool,
) -> Vec<Vec<Vec<f64>>> {
    let sites = dom.sites();
    let nb = betas.len();
    let mut omega = vec![0.0; sites];
    let mut v = vec![0.0; sites];
    let mut prev = vec![0.0; sites];
    let mut stored: Vec<Vec<Vec<f64>>> = vec![Vec::with_capacity(seg_end - seg_start); nb];
    let mut cur: Vec<Vec<f64>> = at_end.iter().map(|c| c.to_vec()).collect();
    for n in ((seg_start + 1)..=seg_end).rev() {
        if disordered {
            dom.fill_disorder(field, n as i64, &mut omega);
        }
        for b in 0..nb {
            backward_step(dom, &omega, betas[b], plant(b, n), &cur[b], &mut v, &mut prev);
            stored[b].push(v.clone());
            std::mem::swap(&mut cur[b], &mut prev);
        }
    }
    for s in stored.iter_mut() {
        s.reverse();
    }
    stored
}

/// Backward values at the checkpoint times (latest first), the checkpoint times, and `u_0`.
type Checkpoints = (Vec<Vec<Vec<f64>>>, Vec<usize>, Vec<Vec<f64>>);

fn backward_pass(
    dom: &PolymerDomain,
    field: &DisorderField,
    betas: &[f64],
    plant: &dyn Fn(usize, usize) -> Option<usize>,
    terminal: &[f64],
    seg: usize,
    disordered: bool,
) -> Checkpoints {
    let steps = dom.steps as usize;
    let sites = dom.sites();
    let nb = betas.len();
    let mut omega = vec![0.0; sites];
    let mut v = vec![0.0; sites];
    let mut checkpoints: Vec<Vec<Vec<f64>>> = vec![Vec::new(); nb];
    let mut current: Vec<Vec<f64>> = vec![terminal.to_vec(); nb];
    let mut prev = vec![0.0; sites];
    for n in (1..=steps).rev() {
        if n % seg == 0 || n == steps {
            for b in 0..nb {
                checkpoints[b].push(current[b].clone());
            }
        }
        if disordered {
            dom.fill_disorder(field, n as i64, &mut omega);
        }
        for b in 0..nb {
            backward_step(dom, &omega, betas[b], plant(b, n), &current[b], &mut v, &mut prev);
            std::mem::swap(&mut current[b], &mut prev);
        }
    }
    let cp_times: Vec<usize> = (1..=steps).rev().filter(|n| n % seg == 0 || *n == steps).collect();
    (checkpoints, cp_times, current)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuenchedSolution {
    pub beta: f64,
    /// `Z(g, g')` for this disorder.
    pub partition: f64,
    /// Paths drawn from the normalized polymer measure, each weighted `Z/M`.
    pub ensemble: Option<WeightedPathEnsemble>,
}

/// Exact partition functions for each `β` on one disorder field, plus `paths` samples from
/// each polymer measure when `paths > 0`.
pub fn quenched_polymer(
    dom: &PolymerDomain,
    field: &DisorderField,
    betas: &[f64],
    g: &GaussianProfile,
    gp: &GaussianProfile,
    paths: usize,
    sample_seed: u64,
) -> Result<Vec<QuenchedSolution>> {
    quenched_polymer_planted(dom, field, betas, &[], g, gp, paths, sample_seed)
}

/// As [`quenched_polymer`], with the disorder raised by `β` along `planted[b]` for the
/// `b`-th temperature. Planting a path drawn from the `β = 0` polymer measure samples the
/// environment size-biased by `Z`, so `E[Z²] = E[Z] · E[Z(planted)]`.
#[allow(clippy::too_many_arguments)]
pub fn quenched_polymer_planted(
    dom: &PolymerDomain,
    field: &DisorderField,
    betas: &[f64],
    planted: &[LatticePath],
    g: &GaussianProfile,
    gp: &GaussianProfile,
    paths: usize,
    sample_seed: u64,
) -> Result<Vec<QuenchedSolution>> {
    if field.horizon != dom.n {
        return Err(Error::Guard(format!("disorder seeded for horizon {} used at horizon {}", field.horizon, dom.n)));
    }
    if betas.iter().any(|b| !b.is_finite() || *b < 0.0) {
        return domain("β must be finite and nonnegative");
    }
    if !planted.is_empty() {
        if planted.len() != betas.len() {
            return domain("one planted path per temperature");
        }
        for p in planted {
            if p.start_time() != 0 || p.end_time() != dom.steps {
                return domain("planted paths must span the polymer window");
            }
            if p.positions().iter().any(|z| z[0].abs() > dom.half || z[1].abs() > dom.half) {
                return Err(Error::SupportMismatch("planted path leaves the polymer domain".into()));
            }
        }
    }
    let plant = |b: usize, n: usize| planted.get(b).map(|p| dom.index(p.positions()[n]));
    g.validate()?;
    gp.validate()?;
    let steps = dom.steps as usize;
    let sites = dom.sites();
    let seg = ((steps as f64).sqrt().ceil() as usize).max(1);
    let nb = betas.len();
    let terminal = dom.sample_grid(gp);
    let start = dom.sample_grid(g);
    let disordered = betas.iter().any(|b| *b != 0.0);
    let (checkpoints, cp_times, current) = backward_pass(dom, field, betas, &plant, &terminal, seg, disordered);

    let cell = cell_area(dom.n);
    let mut out = Vec::with_capacity(nb);
    let streams = SeedStreams::new(sample_seed);
    let mut path_pos: Vec<Vec<Vec<Site>>> = vec![Vec::new(); nb];
    for b in 0..nb {
        let u0 = &current[b];
        let weights: Vec<f64> = (0..sites).map(|i| start[i] * u0[i]).collect();
        let partition = cell * weights.iter().sum::<f64>();
        out.push(QuenchedSolution { beta: betas[b], partition, ensemble: None });
        if paths == 0 {
            continue;
        }
        if !(partition > 0.0) {
            return Err(Error::Guard(format!("partition function {partition} cannot be sampled")));
        }
        let mut rng = streams.stream("polymer", b as u64);
        let mut cum = Vec::with_capacity(sites);
        let mut acc = 0.0;
        for w in &weights {
            acc += w.max(0.0);
            cum.push(acc);
        }
        path_pos[b] = (0..paths)
            .map(|_| {
                let x = rng.random::<f64>() * acc;
                let i = cum.partition_point(|c| *c <= x).min(sites - 1);
                let mut p = Vec::with_capacity(steps + 1);
                p.push(dom.site(i));
                p
            })
            .collect();
    }
    if paths == 0 {
        return Ok(out);
    }

    // Forward sampling, one segment at a time.
    let mut rngs: Vec<_> = (0..nb).map(|b| streams.stream("polymer-steps", b as u64)).collect();
    let mut seg_start = 0;
    while seg_start < steps {
        let seg_end = ((seg_start / seg + 1) * seg).min(steps);
        let cp = cp_times.iter().position(|&t| t == seg_end).expect("checkpoint at segment end");
        let cps: Vec<&[f64]> = (0..nb).map(|b| checkpoints[b][cp].as_slice()).collect();
        let stored = segment_values(dom, field, betas, &plant, &cps, seg_start, seg_end, disordered);
        for b in 0..nb {
            for path in path_pos[b].iter_mut() {
                for n in (seg_start + 1)..=seg_end {
                    let vn = &stored[b][n - seg_start - 1];
                    let x = *path.last().expect("nonempty");
                    let mut probs = [0.0; 5];
                    let mut total = 0.0;
                    for (k, s) in STEPS.iter().enumerate() {
                        let q = if k == 0 { 0.5 } else { 0.125 };
                        let y = [x[0] + s[0], x[1] + s[1]];
                        probs[k] = q * vn[dom.index(y)];
                        total += probs[k];
                    }
                    let mut r = rngs[b].random::<f64>() * total;
                    let mut pick = 0;
                    for (k, p) in probs.iter().enumerate() {
                        if r < *p {
                            pick = k;
                            break;
                        }
                        r -= p;
                        pick = k;
                    }
                    while probs[pick] == 0.0 && pick > 0 {
                        pick -= 1;
                    }
                    path.push([x[0] + STEPS[pick][0], x[1] + STEPS[pick][1]]);
                }
            }
        }
        seg_start = seg_end;
    }
    for (b, sol) in out.iter_mut().enumerate() {
        let w = sol.partition / paths as f64;
        let lp: Vec<LatticePath> =
            std::mem::take(&mut path_pos[b]).into_iter().map(|p| LatticePath::from_positions_unchecked(0, p)).collect();
        let mut meta = EnsembleMeta::reference(dom.n);
        meta.beta = betas[b];
        meta.disorder_seed = Some(field.seed);
        sol.ensemble = Some(WeightedPathEnsemble::new_unchecked(lp, vec![w; paths], (0, dom.steps), meta));
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolymerOverlap {
    pub beta: f64,
    pub partition: f64,
    /// `Σ_{n ∈ (0, T]} Σ_z ρ_n(z)²` with `ρ_n` the unnormalized time-`n` marginal of the
    /// polymer measure: the expected coincidence count of two independent polymer paths,
    /// times `Z²`.
    pub coincidences: f64,
}

/// Exact `M ⊗ M` coincidence counts by a forward pass against the backward values.
pub fn quenched_overlap(
    dom: &PolymerDomain,
    field: &DisorderField,
    betas: &[f64],
    g: &GaussianProfile,
    gp: &GaussianProfile,
) -> Result<Vec<PolymerOverlap>> {
    if field.horizon != dom.n {
        return Err(Error::Guard(format!("disorder seeded for horizon {} used at horizon {}", field.horizon, dom.n)));
    }
    if betas.iter().any(|b| !b.is_finite() || *b < 0.0) {
        return domain("β must be finite and nonnegative");
    }
    g.validate()?;
    gp.validate()?;
    let steps = dom.steps as usize;
    let sites = dom.sites();
    let seg = ((steps as f64).sqrt().ceil() as usize).max(1);
    let nb = betas.len();
    let disordered = betas.iter().any(|b| *b != 0.0);
    let no_plant = |_: usize, _: usize| None;
    let (checkpoints, cp_times, u0) = backward_pass(dom, field, betas, &no_plant, &dom.sample_grid(gp), seg, disordered);
    let cell = cell_area(dom.n);
    let start = dom.sample_grid(g);
    let mut out: Vec<PolymerOverlap> = (0..nb)
        .map(|b| PolymerOverlap {
            beta: betas[b],
            partition: cell * start.iter().zip(&u0[b]).map(|(a, u)| a * u).sum::<f64>(),
            coincidences: 0.0,
        })
        .collect();
    // forward[b] holds cell · g ⊙ ∏ (P then e^{βω − β²/2})
    let mut forward: Vec<Vec<f64>> = vec![start.iter().map(|x| cell * x).collect(); nb];
    let mut spread = vec![0.0; sites];
    let mut omega = vec![0.0; sites];
    let w = dom.width();
    let h = dom.half as usize;
    let mut seg_start = 0;
    while seg_start < steps {
        let seg_end = ((seg_start / seg + 1) * seg).min(steps);
        let cp = cp_times.iter().position(|&t| t == seg_end).expect("checkpoint at segment end");
        let cps: Vec<&[f64]> = (0..nb).map(|b| checkpoints[b][cp].as_slice()).collect();
        let stored = segment_values(dom, field, betas, &no_plant, &cps, seg_start, seg_end, disordered);
        for n in (seg_start + 1)..=seg_end {
            if disordered {
                dom.fill_disorder(field, n as i64, &mut omega);
            }
            for b in 0..nb {
                let f = &mut forward[b];
                let vn = &stored[b][n - seg_start - 1];
                let half_b2 = 0.5 * betas[b] * betas[b];
                let mut acc = 0.0;
                for row in 1..=(2 * h + 1) {
                    let base = row * w;
                    for col in 1..=(2 * h + 1) {
                        let i = base + col;
                        spread[i] = 0.5 * f[i] + 0.125 * (f[i - 1] + f[i + 1] + f[i - w] + f[i + w]);
                        let rho = spread[i] * vn[i];
                        acc += rho * rho;
                    }
                }
                for row in 1..=(2 * h + 1) {
                    let base = row * w;
                    for col in 1..=(2 * h + 1) {
                        let i = base + col;
                        f[i] = if betas[b] == 0.0 { spread[i] } else { spread[i] * (betas[b] * omega[i] - half_b2).exp() };
                    }
                }
                out[b].coincidences += acc;
            }
        }
        seg_start = seg_end;
    }
    Ok(out)
}
