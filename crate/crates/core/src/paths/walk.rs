//! The lazy nearest-neighbour walk on Z²: stay with probability 1/2, each of the four
//! neighbours with probability 1/8. Exact transition probabilities come from the
//! decomposition of the lazy walk into a binomial number of simple-walk steps, and the
//! simple walk factorizes in the rotated coordinates `x + y`, `x − y`.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::quad::ln_gamma;

pub type Site = [i32; 2];

pub const STEPS: [Site; 5] = [[0, 0], [1, 0], [-1, 0], [0, 1], [0, -1]];
pub const STEP_PROB: [f64; 5] = [0.5, 0.125, 0.125, 0.125, 0.125];

pub fn is_legal_step(a: Site, b: Site) -> bool {
    (b[0] - a[0]).abs() + (b[1] - a[1]).abs() <= 1
}

/// One lazy step from three random bits.
#[inline]
pub fn random_step<R: RngCore + ?Sized>(rng: &mut R) -> Site {
    match rng.next_u32() & 7 {
        4 => STEPS[1],
        5 => STEPS[2],
        6 => STEPS[3],
        7 => STEPS[4],
        _ => STEPS[0],
    }
}

fn ln_choose(n: u64, k: u64) -> f64 {
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `P(S_j = z)` for the simple random walk, zero on the wrong parity.
fn simple_walk_probability(j: u64, z: Site) -> f64 {
    let u = (z[0] + z[1]) as i64;
    let v = (z[0] - z[1]) as i64;
    let j_i = j as i64;
    if u.abs() > j_i || v.abs() > j_i || (u + j_i) % 2 != 0 {
        return 0.0;
    }
    let ln = ln_choose(j, ((j_i + u) / 2) as u64) + ln_choose(j, ((j_i + v) / 2) as u64) - 2.0 * j as f64 * std::f64::consts::LN_2;
    ln.exp()
}

/// `P(X_r = z | X_0 = 0)` for the lazy walk.
pub fn transition_probability(r: u64, z: Site) -> f64 {
    let dist = (z[0].unsigned_abs() + z[1].unsigned_abs()) as u64;
    if dist > r {
        return 0.0;
    }
    let ln_half_r = r as f64 * std::f64::consts::LN_2;
    let mut total = 0.0;
    for j in dist..=r {
        let p = simple_walk_probability(j, z);
        if p > 0.0 {
            total += (ln_choose(r, j) - ln_half_r).exp() * p;
        }
    }
    total
}

/// `P(X_n = X̃_n)` for two independent lazy walks from the same site.
pub fn collision_probability(n: u64) -> f64 {
    // The difference walk is the lazy walk run for 2n steps, which is a Binomial(2n, 1/2)
    // number of simple-walk steps; the simple walk returns with probability m_j² where
    // m_j = C(j, j/2) / 2^j.
    let two_n = 2 * n;
    let mut ln_binom = -(two_n as f64) * std::f64::consts::LN_2;
    let mut m = 1.0;
    let mut total = 0.0;
    let mut j = 0;
    while j <= two_n {
        total += ln_binom.exp() * m * m;
        if j + 2 > two_n {
            break;
        }
        let (a, b) = ((two_n - j) as f64, (j + 1) as f64);
        ln_binom += (a * (a - 1.0) / (b * (b + 1.0))).ln();
        m *= b / (b + 1.0);
        j += 2;
    }
    total
}

/// Expected number of coincidences `R_N = Σ_{n=1}^{N} P(X_n = X̃_n)`, memoized.
pub fn expected_coincidences(n: u64) -> f64 {
    static CACHE: OnceLock<Mutex<HashMap<u64, f64>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = cache.lock().expect("cache poisoned").get(&n) {
        return *v;
    }
    let v = (1..=n).map(collision_probability).sum();
    cache.lock().expect("cache poisoned").insert(n, v);
    v
}

/// Exact lazy-walk transition table for all step counts up to `max_steps`.
#[derive(Debug, Clone)]
pub struct TransitionTable {
    max_steps: usize,
    layers: Vec<Vec<f64>>,
}

impl TransitionTable {
    /// Cap on `max_steps`; the table holds about `(4/3)·max_steps³` doubles.
    pub const MAX_STEPS: usize = 256;

    pub fn new(max_steps: usize) -> Result<Self> {
        if max_steps > Self::MAX_STEPS {
            return Err(Error::Guard(format!("transition table for {max_steps} steps exceeds {}", Self::MAX_STEPS)));
        }
        let mut layers = vec![vec![1.0]];
        for k in 1..=max_steps {
            let prev = &layers[k - 1];
            let pw = 2 * (k - 1) + 1;
            let w = 2 * k + 1;
            let mut next = vec![0.0; w * w];
            for iy in 0..pw {
                for ix in 0..pw {
                    let p = prev[iy * pw + ix];
                    if p == 0.0 {
                        continue;
                    }
                    for (s, q) in STEPS.iter().zip(STEP_PROB) {
                        let nx = (ix as i64 + 1 + s[0] as i64) as usize;
                        let ny = (iy as i64 + 1 + s[1] as i64) as usize;
                        next[ny * w + nx] += p * q;
                    }
                }
            }
            layers.push(next);
        }
        Ok(TransitionTable { max_steps, layers })
    }

    pub fn max_steps(&self) -> usize {
        self.max_steps
    }

    pub fn get(&self, k: usize, z: Site) -> f64 {
        let r = k as i64;
        let (x, y) = (z[0] as i64, z[1] as i64);
        if k > self.max_steps || x.abs() > r || y.abs() > r {
            return 0.0;
        }
        let w = (2 * k + 1) as i64;
        self.layers[k][((y + r) * w + (x + r)) as usize]
    }
}

/// A lattice path on consecutive integer times `start_time ..= start_time + len − 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticePath {
    start_time: i64,
    positions: Vec<Site>,
}

impl LatticePath {
    /// Checks every increment against the lazy kernel.
    pub fn from_positions(start_time: i64, positions: Vec<Site>) -> Result<Self> {
        if positions.is_empty() {
            return domain("a path needs at least one position");
        }
        if let Some(k) = positions.windows(2).position(|w| !is_legal_step(w[0], w[1])) {
            return domain(format!("illegal step at time {}", start_time + k as i64 + 1));
        }
        Ok(LatticePath { start_time, positions })
    }

    pub(crate) fn from_positions_unchecked(start_time: i64, positions: Vec<Site>) -> Self {
        LatticePath { start_time, positions }
    }

    pub fn sample<R: RngCore + ?Sized>(rng: &mut R, start_time: i64, start: Site, steps: usize) -> Self {
        let mut positions = Vec::with_capacity(steps + 1);
        let mut cur = start;
        positions.push(cur);
        for _ in 0..steps {
            let s = random_step(rng);
            cur = [cur[0] + s[0], cur[1] + s[1]];
            positions.push(cur);
        }
        LatticePath { start_time, positions }
    }

    pub fn start_time(&self) -> i64 {
        self.start_time
    }

    pub fn end_time(&self) -> i64 {
        self.start_time + self.positions.len() as i64 - 1
    }

    pub fn positions(&self) -> &[Site] {
        &self.positions
    }

    pub fn steps(&self) -> impl Iterator<Item = Site> + '_ {
        self.positions.windows(2).map(|w| [w[1][0] - w[0][0], w[1][1] - w[0][1]])
    }

    /// Position at absolute time `u`.
    pub fn at(&self, u: i64) -> Option<Site> {
        let k = u - self.start_time;
        if k < 0 {
            return None;
        }
        self.positions.get(k as usize).copied()
    }

    /// Restriction to `[s, t]`.
    pub fn restrict(&self, s: i64, t: i64) -> Result<Self> {
        if s < self.start_time || t > self.end_time() || t < s {
            return Err(Error::InvalidWindow(format!("[{s}, {t}] not inside [{}, {}]", self.start_time, self.end_time())));
        }
        let a = (s - self.start_time) as usize;
        let b = (t - self.start_time) as usize;
        Ok(LatticePath { start_time: s, positions: self.positions[a..=b].to_vec() })
    }
}
