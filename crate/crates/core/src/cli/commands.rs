//! Subcommand bodies. Each returns an artifact and a status; it never writes.

use std::fs::File;
use std::io::BufReader;
use std::path::Path;

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

use super::args::*;
use super::output::{Artifact, Cell, Table};
use super::{Failure, Outcome, RunConfig, Status};
use crate::coupling::{
    concatenation_check, coupling_isometry, direct_sum_factor, partition_check, piece_factors, refinement_consistency,
    IntervalPartition,
};
use crate::delta_bose::{
    centered_moment2, count_diagrams, enumerate_diagrams, j_convolution_power, j_resummed, j_theta, semigroup2,
    variance_functionals, Bump, GaussianProfile, Point, TwoParticle,
};
use crate::experiments::{
    moment_match_trials, positivity_trial, strong_disorder_trial, variance_ratio_trial, TestFunction, TrialReport,
};
use crate::gmc::{
    gmc_flow, gmc_moment_oracle, kahane_gmc, max_abs_diff, partial_isometry, spectral_factorize, FactorMap,
    GaussianDraw, WeightedInnerProduct,
};
use crate::paths::{
    intersection_matrix, io, quenched_polymer, sample_reference_walks, CriticalWindow, DisorderField, IntersectionMode,
    LatticeScale, MomentEstimator, PolymerDomain, PolymerParams, StartBox, WeightedPathEnsemble, WindowCalibration,
};
use crate::rng::SeedStreams;

type Run = std::result::Result<Outcome, Failure>;

fn usage<T>(msg: impl Into<String>) -> std::result::Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

fn table(t: Table, status: Status) -> Run {
    Ok(Outcome { artifact: Artifact::Table(t), status })
}

fn converged(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::NonConvergence
    }
}

fn checked(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Failed
    }
}

pub fn parse_profile(s: &str) -> std::result::Result<GaussianProfile, Failure> {
    let mut bumps = Vec::new();
    for part in s.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let v: Vec<f64> = part
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Failure::Usage(format!("profile bump {part:?}: {e}")))?;
        if v.len() != 4 {
            return usage(format!("profile bump {part:?} needs amplitude,cx,cy,sigma"));
        }
        bumps.push(Bump { amplitude: v[0], center: [v[1], v[2]], sigma: v[3] });
    }
    let g = GaussianProfile { bumps };
    g.validate()?;
    Ok(g)
}

pub fn parse_kernel(s: &str) -> std::result::Result<IntersectionMode, Failure> {
    Ok(match s {
        "erdos-taylor" => IntersectionMode::Lattice(LatticeScale::ErdosTaylor),
        "continuum" => IntersectionMode::Lattice(LatticeScale::Continuum),
        "renewal" => IntersectionMode::Lattice(LatticeScale::Renewal),
        _ => match s.strip_prefix("epsilon:").map(str::parse::<f64>) {
            Some(Ok(e)) if e > 0.0 => IntersectionMode::Epsilon(e),
            _ => return usage(format!("unknown kernel {s:?}; expected erdos-taylor, continuum, renewal or epsilon:<ε>")),
        },
    })
}

fn parse_scale(s: &str) -> std::result::Result<LatticeScale, Failure> {
    match parse_kernel(s)? {
        IntersectionMode::Lattice(l) => Ok(l),
        IntersectionMode::Epsilon(_) => usage("the polymer tilt needs a lattice scale"),
    }
}

fn parse_window(s: &str) -> std::result::Result<CriticalWindow, Failure> {
    match s {
        "erdos-taylor" => Ok(CriticalWindow::default()),
        "renewal" => Ok(CriticalWindow { calibration: WindowCalibration::Renewal, ..Default::default() }),
        _ => usage(format!("unknown critical window {s:?}; expected erdos-taylor or renewal")),
    }
}

fn pair_of<T: Copy>(v: &[T], what: &str) -> std::result::Result<(T, T), Failure> {
    match v {
        [a, b] => Ok((*a, *b)),
        _ => usage(format!("{what} needs exactly two values")),
    }
}

fn points(v: &[f64], what: &str) -> std::result::Result<[Point; 2], Failure> {
    match v {
        [a, b, c, d] => Ok([[*a, *b], [*c, *d]]),
        _ => usage(format!("{what} needs x1,y1,x2,y2")),
    }
}

fn read_ensemble(path: &Path, binary: bool, lattice_n: u64) -> std::result::Result<WeightedPathEnsemble, Failure> {
    let f = File::open(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let r = BufReader::new(f);
    Ok(if binary { io::read_binary(r)? } else { io::read_csv(r, lattice_n)? })
}

fn load(input: &EnsembleArgs, cfg: &RunConfig) -> std::result::Result<WeightedPathEnsemble, Failure> {
    let Some(path) = &input.paths else { return usage("--paths is required") };
    read_ensemble(path, input.binary_in, cfg.lattice_n)
}

fn inner_product(input: &EnsembleArgs, ens: &WeightedPathEnsemble) -> std::result::Result<WeightedInnerProduct, Failure> {
    match input.weights.as_str() {
        "uniform" => Ok(WeightedInnerProduct::uniform(ens.len())),
        "localized" => Ok(WeightedInnerProduct::localized(ens)?),
        w => usage(format!("unknown inner product {w:?}; expected uniform or localized")),
    }
}

fn factor(input: &EnsembleArgs, ens: &WeightedPathEnsemble) -> std::result::Result<FactorMap, Failure> {
    let kernel = intersection_matrix(ens, ens.window(), parse_kernel(&input.kernel)?)?;
    Ok(spectral_factorize(&kernel, &inner_product(input, ens)?)?.factor_map())
}

/// Test functions at the ensemble end time, by name.
fn test_values(name: &str, ens: &WeightedPathEnsemble) -> std::result::Result<Vec<(String, Vec<f64>)>, Failure> {
    let t = ens.window().1;
    let battery = crate::experiments::default_battery();
    if name == "one" {
        return Ok(vec![("one".into(), vec![1.0; ens.len()])]);
    }
    let chosen: Vec<&TestFunction> = battery.iter().filter(|f| name == "all" || f.name() == name).collect();
    if chosen.is_empty() {
        let names: Vec<String> = battery.iter().map(|f| f.name()).collect();
        return usage(format!("unknown test function {name:?}; expected one, all or one of {names:?}"));
    }
    chosen.into_iter().map(|f| Ok((f.name(), f.on_paths(ens, t)?))).collect()
}

fn report_table(reports: &[TrialReport]) -> Table {
    let mut t = Table::new(&["name", "inputs_digest", "samples", "statistic", "standard_error", "verdict", "seed"]);
    for r in reports {
        t.push(vec![
            r.name.clone().into(),
            r.inputs_digest.clone().into(),
            r.samples.into(),
            r.statistic.into(),
            r.standard_error.into(),
            r.verdict.as_str().into(),
            Cell::S(r.seed.to_string()),
        ]);
    }
    t
}

fn reports(reports: Vec<TrialReport>) -> Run {
    let ok = reports.iter().all(|r| r.verdict.passed());
    table(report_table(&reports), checked(ok))
}

pub fn run_command(cfg: &RunConfig) -> Run {
    let streams = SeedStreams::new(cfg.seed);
    match &cfg.run {
        Command::Jtheta(a) => {
            let mut t = Table::new(&["theta", "t", "value", "abs_error", "evaluations", "converged"]);
            let mut ok = true;
            for &time in &a.t {
                let r = j_theta(a.theta, time, a.tol)?;
                ok &= r.converged;
                t.push(vec![a.theta.into(), time.into(), r.value.into(), r.abs_error_estimate.into(), r.evaluations.into(), r.converged.into()]);
            }
            table(t, converged(ok))
        }
        Command::Jconv(a) => {
            let mut t = Table::new(&["theta", "t", "j", "value", "abs_error", "converged"]);
            let mut ok = true;
            for &time in &a.t {
                for &j in &a.powers {
                    let r = j_convolution_power(a.theta, time, j, a.tol)?;
                    ok &= r.converged;
                    t.push(vec![a.theta.into(), time.into(), j.into(), r.value.into(), r.abs_error_estimate.into(), r.converged.into()]);
                }
            }
            table(t, converged(ok))
        }
        Command::ResumCheck(a) => {
            let res = j_resummed(a.theta, a.a, a.t, a.max_terms, a.tol)?;
            let direct = j_theta(a.theta + a.a, a.t, a.tol)?;
            let rel = ((res.value - direct.value) / direct.value).abs();
            let pass = rel < a.threshold;
            let mut t = Table::new(&["theta", "a", "t", "J", "terms", "truncation", "resummed", "direct", "rel_error", "pass"]);
            t.push(vec![
                a.theta.into(),
                a.a.into(),
                a.t.into(),
                a.max_terms.into(),
                res.terms.into(),
                format!("{:?}", res.truncation).to_lowercase().into(),
                res.value.into(),
                direct.value.into(),
                rel.into(),
                pass.into(),
            ]);
            let status = if !direct.converged { Status::NonConvergence } else { checked(pass) };
            table(t, status)
        }
        Command::Semigroup2(a) | Command::Centered2(a) => {
            let (x, xp) = (points(&a.x, "--x")?, points(&a.xp, "--xp")?);
            let full = matches!(cfg.run, Command::Semigroup2(_));
            let r = if full { semigroup2(a.theta, a.t, x, xp, a.tol)? } else { centered_moment2(a.theta, a.t, x, xp, a.tol)? };
            let mut t = Table::new(&["theta", "t", "value", "heat_product", "abs_error", "converged"]);
            t.push(vec![
                a.theta.into(),
                a.t.into(),
                r.value.into(),
                TwoParticle::heat_product(a.t, x, xp).into(),
                r.abs_error_estimate.into(),
                r.converged.into(),
            ]);
            table(t, converged(r.converged))
        }
        Command::Diagrams(a) => {
            if a.list {
                let mut t = Table::new(&["index", "length", "diagram"]);
                for (i, d) in enumerate_diagrams(a.n, a.max_len, a.starred)?.iter().enumerate() {
                    t.push(vec![i.into(), d.len().into(), d.to_string().into()]);
                }
                table(t, Status::Pass)
            } else {
                let mut t = Table::new(&["n", "max_len", "count"]);
                t.push(vec![a.n.into(), a.max_len.into(), Cell::S(count_diagrams(a.n, a.max_len)?.to_string())]);
                table(t, Status::Pass)
            }
        }
        Command::VarianceId(a) => {
            let (g, gp) = (parse_profile(&a.g)?, parse_profile(&a.gp)?);
            let v = variance_functionals(a.t, &g, &gp, a.tol)?;
            let u2 = v.u_pair * v.u_pair;
            let rel = ((v.v_pair - u2) / u2).abs();
            let pass = rel < a.threshold;
            let mut t = Table::new(&["t", "u_pair", "v_pair", "u_pair_squared", "rel_error", "converged", "pass"]);
            t.push(vec![a.t.into(), v.u_pair.into(), v.v_pair.into(), u2.into(), rel.into(), v.converged.into(), pass.into()]);
            table(t, if v.converged { checked(pass) } else { Status::NonConvergence })
        }
        Command::SampleWalks(a) => {
            let window = pair_of(&a.window, "--window")?;
            if a.binary && cfg.out.is_none() {
                return usage("--binary needs --out");
            }
            let start = StartBox::centered(a.box_half, a.horizon)?;
            let ensemble = sample_reference_walks(a.count, window, a.horizon, start, streams.derive("sampling", 0))?;
            Ok(Outcome { artifact: Artifact::Ensemble { ensemble, binary: a.binary }, status: Status::Pass })
        }
        Command::PolymerSim(a) => polymer_sim(a, &streams),
        Command::Intersections(a) => {
            let ens = load(&a.input, cfg)?;
            let window = if a.window.is_empty() { ens.window() } else { pair_of(&a.window, "--window")? };
            let k = intersection_matrix(&ens, window, parse_kernel(&a.input.kernel)?)?;
            let mut t = Table::new(&["i", "j", "value", "count"]);
            for i in 0..k.n() {
                for j in i..k.n() {
                    let count = k.counts().map_or(Cell::Empty, |c| Cell::I(c[(i, j)] as i64));
                    t.push(vec![i.into(), j.into(), k.get(i, j).into(), count]);
                }
            }
            table(t, Status::Pass)
        }
        Command::GmcSim(a) => {
            let ens = load(&a.input, cfg)?;
            let kernel = intersection_matrix(&ens, ens.window(), parse_kernel(&a.input.kernel)?)?;
            let sf = spectral_factorize(&kernel, &inner_product(&a.input, &ens)?)?;
            let mut t = Table::new(&["draw", "path", "base_weight", "weight", "exponent"]);
            for d in 0..a.draws {
                let draw = GaussianDraw::sample(a.a, sf.rank(), &mut streams.stream("gmc", d as u64))?;
                let r = kahane_gmc(&ens, &sf, &draw)?;
                for p in 0..ens.len() {
                    t.push(vec![d.into(), p.into(), r.base_weights[p].into(), r.new_weights[p].into(), r.exponents[p].into()]);
                }
            }
            table(t, Status::Pass)
        }
        Command::GmcFlow(a) => {
            let ens = load(&a.input, cfg)?;
            let y = factor(&a.input, &ens)?;
            let tests = test_values(&a.test, &ens)?;
            let mut t = Table::new(&["flow", "test", "a", "value"]);
            for k in 0..a.flows {
                let flow = gmc_flow(ens.weights(), &y, &a.a_grid, cfg.seed, k as u64)?;
                for (name, f) in &tests {
                    for (s, v) in a.a_grid.iter().zip(flow.pair(f)) {
                        t.push(vec![k.into(), name.clone().into(), (*s).into(), v.into()]);
                    }
                }
            }
            table(t, Status::Pass)
        }
        Command::GmcMoment(a) => {
            let ens = load(&a.input, cfg)?;
            let kernel = intersection_matrix(&ens, ens.window(), parse_kernel(&a.input.kernel)?)?;
            let mut t = Table::new(&["test", "a", "n", "moment", "base_moment", "ratio"]);
            for (name, f) in test_values(&a.test, &ens)? {
                let prod = |idx: &[usize]| idx.iter().map(|&i| f[i]).product::<f64>();
                let moment = gmc_moment_oracle(ens.weights(), kernel.entries(), a.a, a.n, &prod)?;
                let base = base_moment(ens.weights(), &f, a.n);
                t.push(vec![name.into(), a.a.into(), a.n.into(), moment.into(), base.into(), (moment / base).into()]);
            }
            table(t, Status::Pass)
        }
        Command::IsometryCheck(a) => isometry_check(a, cfg, &streams),
        Command::CouplingCheck(a) => {
            let ens = load(&a.input, cfg)?;
            let mode = parse_kernel(&a.input.kernel)?;
            let w = inner_product(&a.input, &ens)?;
            let coarse_p = IntervalPartition::dyadic(ens.window(), a.levels)?;
            let fine_p = IntervalPartition::dyadic(ens.window(), a.levels + 1)?;
            let big_kernel = intersection_matrix(&ens, ens.window(), mode)?;
            let big = spectral_factorize(&big_kernel, &w)?.factor_map();
            let maps = |p: &IntervalPartition| -> crate::Result<Vec<FactorMap>> {
                Ok(piece_factors(&ens, p, mode, &w)?.iter().map(|f| f.factor_map()).collect())
            };
            let coarse = maps(&coarse_p)?;
            let fine = maps(&fine_p)?;
            let sum = direct_sum_factor(&coarse, big_kernel.entries())?;
            let iota = coupling_isometry(&big, &sum)?;
            let grouped: Vec<Vec<FactorMap>> = coarse_p.refined_by(&fine_p)?.into_iter().map(|r| fine[r].to_vec()).collect();
            let refinement = refinement_consistency(&big, &coarse, &grouped)?;
            let checks = [
                ("gram_additivity", sum.gram_error, 1e-12),
                ("isometry", iota.isometry_error, 1e-10),
                ("factor", iota.factor_error, 1e-8),
                ("range", iota.range_error, 1e-8),
                ("refinement", refinement, 1e-8),
            ];
            check_table(&checks)
        }
        Command::NaimarkCheck(a) => {
            let ens = load(&a.input, cfg)?;
            let partition = IntervalPartition::from_cuts(ens.window(), &a.cuts)?;
            let sub = if a.subwindow.is_empty() { partition.pieces()[0] } else { pair_of(&a.subwindow, "--subwindow")? };
            let r = partition_check(&ens, &partition, sub, parse_kernel(&a.input.kernel)?, &inner_product(&a.input, &ens)?)?;
            check_table(&[
                ("gram_additivity", r.gram_error, 1e-12),
                ("isometry", r.isometry_error, 1e-10),
                ("factor", r.factor_error, 1e-8),
                ("naimark", r.naimark_discrepancy, 1e-8),
            ])
        }
        Command::ConcatCheck(a) => {
            let (Some(l), Some(r)) = (&a.left, &a.right) else { return usage("--left and --right are required") };
            let left = read_ensemble(l, false, cfg.lattice_n)?;
            let right = read_ensemble(r, false, cfg.lattice_n)?;
            let one = |_: [f64; 2], _: [f64; 2]| 1.0;
            let spread = |x: [f64; 2], y: [f64; 2]| (-(x[0] - y[0]).powi(2) - (x[1] - y[1]).powi(2)).exp();
            let report =
                concatenation_check(&left, &right, a.gap, parse_kernel(&a.kernel)?, a.a, cfg.seed, &[&one, &spread])?;
            check_table(&[("concatenation", report.discrepancy, 1e-6), ("factor", report.factor_error, 1e-8)])
        }
        Command::TrialPositivity(a) => {
            let ens = load(&a.input, cfg)?;
            let kernel = intersection_matrix(&ens, ens.window(), parse_kernel(&a.input.kernel)?)?;
            let mut out = Vec::new();
            for (name, f) in test_values(&a.test, &ens)? {
                let mut r = positivity_trial(&ens, &kernel, a.a, &f, a.draws, cfg.seed)?;
                r.name = format!("{} {name}", r.name);
                out.push(r);
            }
            reports(out)
        }
        Command::TrialStrongDisorder(a) => {
            let ens = load(&a.input, cfg)?;
            let kernel = intersection_matrix(&ens, ens.window(), parse_kernel(&a.input.kernel)?)?;
            let mut out = Vec::new();
            for (name, f) in test_values(&a.test, &ens)? {
                let mut r = strong_disorder_trial(&ens, &kernel, &a.a_grid, &f, a.flows, cfg.seed)?;
                r.name = format!("{} {name}", r.name);
                out.push(r);
            }
            reports(out)
        }
        Command::TrialMomentMatch(a) => {
            let (mut params, g) = polymer_params(&a.polymer)?;
            params.paths = a.paths;
            params.scale = parse_scale(&a.scale)?;
            params.estimator = match a.estimator.as_str() {
                "planted" => MomentEstimator::Planted,
                "direct" => MomentEstimator::Direct,
                e => return usage(format!("unknown estimator {e:?}; expected planted or direct")),
            };
            let configs: Vec<(f64, f64)> = a.theta.iter().flat_map(|&th| a.a.iter().map(move |&s| (th, s))).collect();
            reports(moment_match_trials(&params, &configs, &g, &g, a.polymer.replicas, cfg.seed)?)
        }
        Command::TrialVarianceRatio(a) => {
            let (params, g) = polymer_params(&a.polymer)?;
            reports(vec![variance_ratio_trial(&params, &a.theta, &g, &g, a.polymer.replicas, cfg.seed, a.frozen)?])
        }
    }
}

/// `(Σ w f)^n` as a sum over index tuples in the oracle's order.
fn base_moment(w: &[f64], f: &[f64], n: usize) -> f64 {
    let m = w.len();
    let mut idx = vec![0usize; n];
    let mut total = 0.0;
    'outer: loop {
        let mass: f64 = idx.iter().map(|&i| w[i]).product();
        let value: f64 = idx.iter().map(|&i| f[i]).product();
        total += mass * value;
        for pos in (0..n).rev() {
            idx[pos] += 1;
            if idx[pos] < m {
                continue 'outer;
            }
            idx[pos] = 0;
        }
        return total;
    }
}

fn check_table(checks: &[(&str, f64, f64)]) -> Run {
    let mut t = Table::new(&["check", "value", "threshold", "pass"]);
    let mut ok = true;
    for &(name, value, threshold) in checks {
        let pass = value <= threshold;
        ok &= pass;
        t.push(vec![name.into(), value.into(), threshold.into(), pass.into()]);
    }
    table(t, checked(ok))
}

fn polymer_params(a: &PolymerTrialArgs) -> std::result::Result<(PolymerParams, GaussianProfile), Failure> {
    let mut params = PolymerParams::new(a.horizon, 0.0, a.t, 0);
    params.window = parse_window(&a.window)?;
    let g = GaussianProfile { bumps: vec![Bump { amplitude: 1.0, center: [0.0, 0.0], sigma: a.sigma }] };
    g.validate()?;
    Ok((params, g))
}

fn polymer_sim(a: &PolymerSimArgs, streams: &SeedStreams) -> Run {
    let (g, gp) = (parse_profile(&a.g)?, parse_profile(&a.gp)?);
    let window = parse_window(&a.window)?;
    if a.paths > 0 && (a.theta.len() != 1 || a.paths_out.is_none()) {
        return usage("sampling polymer paths needs a single θ and --paths-out");
    }
    let steps = (a.t * a.horizon as f64).round() as i64;
    let dom = PolymerDomain::new(a.horizon, steps, g.support_radius().max(gp.support_radius()))?;
    let field = DisorderField::new(streams.derive("disorder", 0), a.horizon);
    let betas = a.theta.iter().map(|&th| window.beta(th, a.horizon)).collect::<crate::Result<Vec<f64>>>()?;
    let sols = quenched_polymer(&dom, &field, &betas, &g, &gp, a.paths, streams.derive("sampling", 0))?;
    let mut t = Table::new(&["theta", "beta", "steps", "partition"]);
    for (th, s) in a.theta.iter().zip(&sols) {
        t.push(vec![(*th).into(), s.beta.into(), steps.into(), s.partition.into()]);
    }
    if let (Some(path), Some(ens)) = (&a.paths_out, sols.first().and_then(|s| s.ensemble.as_ref())) {
        let f = File::create(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        io::write_csv(ens, std::io::BufWriter::new(f))?;
    }
    table(t, Status::Pass)
}

/// Random orthogonal matrix from the QR factors of a Gaussian matrix.
fn random_orthogonal(k: usize, rng: &mut impl rand::Rng) -> DMatrix<f64> {
    let m = DMatrix::<f64>::from_fn(k, k, |_, _| StandardNormal.sample(rng));
    let qr = m.qr();
    let (q, r) = (qr.q(), qr.r());
    let signs = DMatrix::from_diagonal(&r.diagonal().map(|d| if d < 0.0 { -1.0 } else { 1.0 }));
    q * signs
}

/// Compares the standard factor with padded, rotated copies of itself.
fn isometry_check(a: &IsometryCheckArgs, cfg: &RunConfig, streams: &SeedStreams) -> Run {
    let ens = load(&a.input, cfg)?;
    let y1 = factor(&a.input, &ens)?;
    let kernel1 = y1.kernel();
    let f = vec![1.0; ens.len()];
    let prod = |idx: &[usize]| idx.iter().map(|&i| f[i]).product::<f64>();
    let m1 = gmc_moment_oracle(ens.weights(), &kernel1, a.a, 2, &prod)?;
    let mut t = Table::new(&["instance", "rank", "padded_rank", "factor_error", "moment_rel_error", "pass"]);
    let mut ok = true;
    for inst in 0..a.instances {
        let mut rng = streams.stream("sampling", inst as u64);
        let extra = inst % 3;
        let k = y1.rank() + extra;
        let mut padded = DMatrix::zeros(y1.paths(), k);
        padded.columns_mut(0, y1.rank()).copy_from(&y1.y);
        let y2 = FactorMap::new(padded * random_orthogonal(k, &mut rng));
        let iota = partial_isometry(&y1, &y2)?;
        let factor_error = max_abs_diff(&y1.y, &(&y2.y * &iota));
        let m2 = gmc_moment_oracle(ens.weights(), &y2.kernel(), a.a, 2, &prod)?;
        let rel = ((m1 - m2) / m1).abs();
        let pass = factor_error <= 1e-8 && rel <= 1e-10;
        ok &= pass;
        t.push(vec![inst.into(), y1.rank().into(), k.into(), factor_error.into(), rel.into(), pass.into()]);
    }
    table(t, checked(ok))
}
