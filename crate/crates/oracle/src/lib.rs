//! Naive reference implementations used by the test suites.
//!
//! Nothing here is shared with the production crate: networks are plain
//! nested vectors, the selection rate is recomputed from scratch, and every
//! ranking is an exhaustive scan.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ToyKind {
    Ordinary,
    Depthwise,
    Pointwise,
    Grouped,
    BnScale,
    Bias,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ToyLayer {
    pub kind: ToyKind,
    pub in_channels: usize,
    pub kernel: usize,
    pub groups: usize,
    /// `filters[j]` holds `in_channels · kernel²` elements, slice-major.
    pub filters: Vec<Vec<f64>>,
}

impl ToyLayer {
    pub fn filter_count(&self) -> usize {
        self.filters.len()
    }

    /// Groups used for relative importance: depthwise layers are one group.
    pub fn ri_groups(&self) -> usize {
        match self.kind {
            ToyKind::Grouped => self.groups,
            _ => 1,
        }
    }

    pub fn ri_group_of(&self, j: usize) -> usize {
        let per = self.filter_count() / self.ri_groups();
        j / per
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ToyNetwork {
    pub layers: Vec<ToyLayer>,
}

impl ToyNetwork {
    /// Random network with 1–10 layers of at most 32 filters and `K <= 3`.
    /// Magnitudes vary per layer, some filters are nearly dead, some exactly
    /// zero and some duplicated so tie-breaking is exercised.
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_layers = rng.gen_range(1..=10);
        let mut layers = Vec::with_capacity(n_layers);
        for _ in 0..n_layers {
            let kind = match rng.gen_range(0..6) {
                0 => ToyKind::Ordinary,
                1 => ToyKind::Depthwise,
                2 => ToyKind::Pointwise,
                3 => ToyKind::Grouped,
                4 => ToyKind::BnScale,
                _ => ToyKind::Bias,
            };
            let (count, in_channels, kernel, groups) = match kind {
                ToyKind::Ordinary => (rng.gen_range(1..=32), rng.gen_range(1..=4), rng.gen_range(1..=3), 1),
                ToyKind::Depthwise => {
                    let c = rng.gen_range(1..=32);
                    (c, 1, rng.gen_range(1..=3), c)
                }
                ToyKind::Pointwise => (rng.gen_range(1..=32), rng.gen_range(1..=6), 1, 1),
                ToyKind::Grouped => {
                    let g = rng.gen_range(2..=4);
                    (g * rng.gen_range(1..=8), rng.gen_range(1..=3), rng.gen_range(1..=3), g)
                }
                ToyKind::BnScale | ToyKind::Bias => (rng.gen_range(1..=32), 1, 1, 1),
            };
            let scale = 10f64.powf(rng.gen_range(-2.0..1.0));
            let len = in_channels * kernel * kernel;
            let mut filters: Vec<Vec<f64>> = Vec::with_capacity(count);
            for _ in 0..count {
                let roll: f64 = rng.gen();
                let f = if roll < 0.05 {
                    vec![0.0; len]
                } else if roll < 0.10 && !filters.is_empty() {
                    let src = rng.gen_range(0..filters.len());
                    filters[src].clone()
                } else {
                    let damp = if roll < 0.30 { 10f64.powf(rng.gen_range(-4.0..-1.0)) } else { 1.0 };
                    (0..len).map(|_| rng.gen_range(-1.0..1.0) * scale * damp).collect()
                };
                filters.push(f);
            }
            layers.push(ToyLayer {
                kind,
                in_channels,
                kernel,
                groups,
                filters,
            });
        }
        ToyNetwork { layers }
    }

    pub fn filter_total(&self) -> usize {
        self.layers.iter().map(|l| l.filter_count()).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleMode {
    Full,
    GlobalOnly,
    LocalOnly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleConfig {
    pub r_hat: f64,
    pub beta: f64,
    pub eta: f64,
    /// First epoch of each stage, 1-based.
    pub stage_starts: Vec<usize>,
    pub gamma: f64,
    pub mode: OracleMode,
}

pub fn oracle_rate(cfg: &OracleConfig, epoch: usize) -> f64 {
    let mut t = 0;
    let mut e0 = 0;
    for (i, &s) in cfg.stage_starts.iter().enumerate() {
        if s <= epoch {
            t = i + 1;
            e0 = s;
        }
    }
    assert!(t >= 1, "epoch before first stage");
    let x = (epoch - e0) as f64 / cfg.eta;
    cfg.r_hat / cfg.beta.powi(t as i32 - 1) * (1.0 / (1.0 + (-x).exp()))
}

fn abs_sum(v: &[f64]) -> f64 {
    let mut s = 0.0;
    for x in v {
        s += x.abs();
    }
    s
}

/// Selection result for one `(layer, group)`; both lists ascending by ℓ1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleGroup {
    pub layer: usize,
    pub group: usize,
    pub inferior: Vec<usize>,
    pub dominant: Vec<usize>,
}

/// `a` before `b` when `(value, index)` is lexicographically smaller.
fn before(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1)
}

/// Insertion sort by `(value, index)`.
fn naive_sort(items: &mut [(f64, usize)]) {
    for i in 1..items.len() {
        let mut j = i;
        while j > 0 && before(items[j], items[j - 1]) {
            items.swap(j, j - 1);
            j -= 1;
        }
    }
}

pub fn oracle_select(toy: &ToyNetwork, epoch: usize, cfg: &OracleConfig) -> Vec<OracleGroup> {
    // global candidate set by exhaustive rank counting
    let mut all: Vec<(f64, usize, usize)> = Vec::new();
    for (i, layer) in toy.layers.iter().enumerate() {
        for (j, f) in layer.filters.iter().enumerate() {
            all.push((abs_sum(f) / layer.in_channels as f64, i, j));
        }
    }
    let m = all.len();
    let n = match cfg.mode {
        OracleMode::LocalOnly => m,
        _ => ((oracle_rate(cfg, epoch) * m as f64).floor() as usize).min(m),
    };
    let mut tbd = vec![vec![false; 0]; toy.layers.len()];
    for (i, layer) in toy.layers.iter().enumerate() {
        tbd[i] = vec![false; layer.filter_count()];
    }
    for a in &all {
        let rank = all
            .iter()
            .filter(|b| b.0 < a.0 || (b.0 == a.0 && (b.1, b.2) < (a.1, a.2)))
            .count();
        if rank < n {
            tbd[a.1][a.2] = true;
        }
    }

    let mut out = Vec::new();
    for (i, layer) in toy.layers.iter().enumerate() {
        for g in 0..layer.ri_groups() {
            let members: Vec<usize> =
                (0..layer.filter_count()).filter(|&j| layer.ri_group_of(j) == g).collect();
            let l1: Vec<f64> = members.iter().map(|&j| abs_sum(&layer.filters[j])).collect();
            let mut max = 0.0f64;
            for &v in &l1 {
                if v > max {
                    max = v;
                }
            }
            let mut inf: Vec<(f64, usize)> = Vec::new();
            for (k, &j) in members.iter().enumerate() {
                if !tbd[i][j] {
                    continue;
                }
                let ri = if max > 0.0 { l1[k] / max } else { 1.0 };
                if cfg.mode == OracleMode::GlobalOnly || ri < cfg.gamma {
                    inf.push((l1[k], j));
                }
            }
            naive_sort(&mut inf);
            inf.truncate(members.len() / 2);
            let c = inf.len();

            // dominance rank: larger ℓ1 first, lower index first on ties
            let pool: Vec<(f64, usize)> = members
                .iter()
                .zip(&l1)
                .filter(|(j, _)| !inf.iter().any(|x| x.1 == **j))
                .map(|(&j, &v)| (v, j))
                .collect();
            let mut dom: Vec<(f64, usize)> = pool
                .iter()
                .copied()
                .filter(|&(v, j)| {
                    let stronger = pool
                        .iter()
                        .filter(|&&(w, k)| w > v || (w == v && k < j))
                        .count();
                    stronger < c
                })
                .collect();
            naive_sort(&mut dom);
            out.push(OracleGroup {
                layer: i,
                group: g,
                inferior: inf.iter().map(|x| x.1).collect(),
                dominant: dom.iter().map(|x| x.1).collect(),
            });
        }
    }
    out
}

/// Direct transcription of the element update. `alpha = None` selects the
/// adaptive coefficient.
pub fn oracle_crossover(inf: &[f64], dom: &[f64], alpha: Option<f64>) -> Vec<f64> {
    assert_eq!(inf.len(), dom.len());
    assert!(!inf.is_empty());
    let mut q = 0;
    let mut p = 0;
    for k in 0..inf.len() {
        if inf[k].abs() < inf[q].abs() {
            q = k;
        }
        if dom[k].abs() > dom[p].abs() {
            p = k;
        }
    }
    let mut out = inf.to_vec();
    let (wq, wp) = (inf[q], dom[p]);
    if wq.abs() + wp.abs() == 0.0 {
        return out;
    }
    let a = alpha.unwrap_or(wq.abs() / (wq.abs() + wp.abs()));
    out[q] = a * wq + (1.0 - a) * wp;
    out
}
