//! Bridge-weighted concatenation of two ensembles separated by a time gap.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::ensemble::{EnsembleMeta, WeightedPathEnsemble};
use super::walk::{transition_probability, LatticePath, Site, TransitionTable, STEPS, STEP_PROB};
use crate::error::{domain, Error, Result};
use crate::rng::SeedStreams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum BridgeMode {
    /// Gap positions are a deterministic placeholder route, recorded in the metadata.
    #[default]
    WeightOnly,
    /// Gap positions are sampled from the discrete bridge.
    FullPaths { seed: u64 },
}

fn placeholder_route(from: Site, to: Site, gap: usize) -> Vec<Site> {
    let mut cur = from;
    let mut out = Vec::with_capacity(gap - 1);
    for _ in 1..gap {
        if cur[0] != to[0] {
            cur[0] += (to[0] - cur[0]).signum();
        } else if cur[1] != to[1] {
            cur[1] += (to[1] - cur[1]).signum();
        }
        out.push(cur);
    }
    out
}

fn sample_bridge<R: Rng + ?Sized>(rng: &mut R, table: &TransitionTable, from: Site, to: Site, gap: usize) -> Vec<Site> {
    let mut cur = from;
    let mut out = Vec::with_capacity(gap - 1);
    for k in 1..gap {
        let rem = gap - k;
        let mut probs = [0.0; 5];
        for (slot, (s, q)) in probs.iter_mut().zip(STEPS.iter().zip(STEP_PROB)) {
            let next = [cur[0] + s[0], cur[1] + s[1]];
            *slot = q * table.get(rem, [to[0] - next[0], to[1] - next[1]]);
        }
        let total: f64 = probs.iter().sum();
        let mut x = rng.random::<f64>() * total;
        let mut pick = 4;
        for (idx, p) in probs.iter().enumerate() {
            if x < *p {
                pick = idx;
                break;
            }
            x -= p;
        }
        while probs[pick] == 0.0 {
            pick -= 1;
        }
        cur = [cur[0] + STEPS[pick][0], cur[1] + STEPS[pick][1]];
        out.push(cur);
    }
    out
}

/// Product ensemble with weights `w_L · w_R · p_r(X_R(start) − X_L(end))`, `p_r` the
/// lazy-walk transition probability. Pairs with `p_r = 0` are dropped.
pub fn bridge_concatenate(left: &WeightedPathEnsemble, right: &WeightedPathEnsemble, gap: i64, mode: BridgeMode) -> Result<WeightedPathEnsemble> {
    if gap <= 0 {
        return domain(format!("gap {gap} must be positive"));
    }
    let (s1, t1) = left.window();
    let (s2, t2) = right.window();
    if s2 != t1 + gap {
        return Err(Error::InvalidWindow(format!("left ends at {t1}, right starts at {s2}, gap {gap}")));
    }
    let n = left.meta.lattice_n;
    if right.meta.lattice_n != n {
        return Err(Error::Guard(format!("horizons {n} and {} differ", right.meta.lattice_n)));
    }
    let g = gap as usize;
    let table = match mode {
        BridgeMode::FullPaths { .. } => Some(TransitionTable::new(g)?),
        BridgeMode::WeightOnly => None,
    };
    let mut rng = match mode {
        BridgeMode::FullPaths { seed } => Some(SeedStreams::new(seed).stream("bridge", 0)),
        BridgeMode::WeightOnly => None,
    };
    let mut paths = Vec::new();
    let mut weights = Vec::new();
    let mut parents = Vec::new();
    for (i, lp) in left.paths().iter().enumerate() {
        let end = *lp.positions().last().expect("nonempty path");
        for (j, rp) in right.paths().iter().enumerate() {
            let start = rp.positions()[0];
            let dz = [start[0] - end[0], start[1] - end[1]];
            let p = match &table {
                Some(tb) => tb.get(g, dz),
                None => transition_probability(gap as u64, dz),
            };
            if p == 0.0 {
                continue;
            }
            let middle = match (&table, rng.as_mut()) {
                (Some(tb), Some(r)) => sample_bridge(r, tb, end, start, g),
                _ => placeholder_route(end, start, g),
            };
            let mut pos = Vec::with_capacity(lp.positions().len() + middle.len() + rp.positions().len());
            pos.extend_from_slice(lp.positions());
            pos.extend(middle);
            pos.extend_from_slice(rp.positions());
            paths.push(LatticePath::from_positions_unchecked(s1, pos));
            weights.push(left.weights()[i] * right.weights()[j] * p);
            parents.push((i as u32, j as u32));
        }
    }
    let mut meta = EnsembleMeta::reference(n);
    meta.localization_rate = left.meta.localization_rate;
    meta.placeholder = left.meta.placeholder.iter().chain(&right.meta.placeholder).copied().collect();
    if mode == BridgeMode::WeightOnly && gap > 1 {
        meta.placeholder.push((t1, s2));
    }
    meta.parents = Some(parents);
    Ok(WeightedPathEnsemble::new_unchecked(paths, weights, (s1, t2), meta))
}
