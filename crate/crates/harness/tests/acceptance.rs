//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wevo::selection::group_scores;
use wevo::{
    apply_plan, crossover_slice, global_select, local_select, score_snapshot, AlphaMode, DenseStore,
    Engine, EngineConfig, EvolutionReport, LayerFamily, LayerKind, LayerSpec, ParameterStore,
    SelectionConfig, SelectionMode, StageSchedule, WeError,
};
use wevo_harness::config::{AlphaSetting, RunConfig};
use wevo_harness::run::{run_single, RunResult, EVOLUTION_FILE, FINAL_CHECKPOINT};
use wevo_harness::sweep::{expand_alpha_sweep, run_many};
use wevo_nn::checkpoint;
use wevo_oracle::{oracle_crossover, oracle_select, OracleConfig, OracleMode, ToyKind, ToyNetwork};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// ---------------------------------------------------------------- toys

fn to_store(toy: &ToyNetwork) -> DenseStore<f64> {
    let mut store = DenseStore::new();
    for (i, l) in toy.layers.iter().enumerate() {
        let (kind, family) = match l.kind {
            ToyKind::Ordinary => (LayerKind::OrdinaryConv, LayerFamily::Conv),
            ToyKind::Depthwise => (LayerKind::DepthwiseConv, LayerFamily::Conv),
            ToyKind::Pointwise => (LayerKind::PointwiseConv, LayerFamily::Conv),
            ToyKind::Grouped => (LayerKind::GroupedConv, LayerFamily::Conv),
            ToyKind::BnScale => (LayerKind::BnScale, LayerFamily::BatchNorm),
            ToyKind::Bias => (LayerKind::Bias, LayerFamily::BatchNorm),
        };
        let values = l.filters.iter().flatten().copied().collect();
        store
            .push(format!("toy{i}"), kind, family, l.filter_count(), l.in_channels, l.kernel, l.groups, values)
            .expect("toy layers are valid");
    }
    store
}

const STAGES: [usize; 3] = [1, 61, 121];

fn core_mode(mode: OracleMode) -> SelectionMode {
    match mode {
        OracleMode::Full => SelectionMode::Full,
        OracleMode::GlobalOnly => SelectionMode::GlobalOnly,
        OracleMode::LocalOnly => SelectionMode::LocalOnly,
    }
}

fn selection(r_hat: f64, gamma: f64, mode: OracleMode) -> SelectionConfig<f64> {
    let sched = StageSchedule::new(200, STAGES.to_vec(), r_hat, 2.5, 15.0).expect("valid schedule");
    SelectionConfig::new(sched, gamma, core_mode(mode)).expect("valid selection")
}

fn engine(r_hat: f64, gamma: f64, mode: OracleMode) -> Engine<f64> {
    Engine::new(EngineConfig::new(selection(r_hat, gamma, mode))).expect("valid engine")
}

// ------------------------------------------------------------ criteria

fn c1_selection_oracle() -> Outcome {
    const TOYS: u64 = 1200;
    let start = Instant::now();
    let modes = [OracleMode::Full, OracleMode::GlobalOnly, OracleMode::LocalOnly];
    let mut groups = 0;
    let mut selected = 0;
    for seed in 0..TOYS {
        let mode = modes[seed as usize % 3];
        let r_hat = [0.05, 0.3, 0.6][(seed as usize / 3) % 3];
        let epoch = 1 + (seed as usize * 37) % 200;
        let toy = ToyNetwork::random(seed);
        let plan = engine(r_hat, 0.05, mode).plan(&to_store(&toy), epoch).map_err(|e| e.to_string())?;
        let oracle_cfg = OracleConfig {
            r_hat,
            beta: 2.5,
            eta: 15.0,
            stage_starts: STAGES.to_vec(),
            gamma: 0.05,
            mode,
        };
        let want: Vec<_> = oracle_select(&toy, epoch, &oracle_cfg)
            .into_iter()
            .map(|g| (g.layer, g.group, g.inferior, g.dominant))
            .collect();
        let got: Vec<_> = plan
            .layers
            .iter()
            .flat_map(|l| l.groups.iter())
            .map(|g| {
                (
                    g.inferior.layer_id,
                    g.inferior.group,
                    g.inferior.members.iter().map(|m| m.filter_index).collect::<Vec<_>>(),
                    g.dominant.iter().map(|m| m.filter_index).collect::<Vec<_>>(),
                )
            })
            .collect();
        check(got == want, || format!("seed {seed} ({mode:?}, epoch {epoch}) differs from the oracle"))?;
        groups += got.len();
        selected += got.iter().map(|g| g.2.len()).sum::<usize>();
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs <= 60.0, || format!("took {secs:.1} s > 60 s"))?;
    Ok(format!(
        "{TOYS} toys, {groups} groups, {selected} inferior filters, exact set+order equality, {secs:.2} s (limit 60 s)"
    ))
}

fn c2_crossover_oracle() -> Outcome {
    const PAIRS: usize = 120_000;
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    let mut non_degenerate = 0;
    for i in 0..PAIRS {
        let len = [1, 4, 9][i % 3];
        let mut gen = |scale: f64| -> Vec<f64> {
            (0..len)
                .map(|_| if rng.gen_bool(0.05) { 0.0 } else { rng.gen_range(-scale..scale) })
                .collect()
        };
        let inf = gen(1.0);
        let dom = gen(2.0);
        let alpha = match i % 4 {
            0 => Some(rng.gen_range(0..=10) as f64 / 10.0),
            _ => None,
        };
        let want = oracle_crossover(&inf, &dom, alpha);
        let mut got = inf.clone();
        crossover_slice(&mut got, &dom, alpha.map_or(AlphaMode::Adaptive, AlphaMode::Fixed))
            .map_err(|e| e.to_string())?;
        for (a, b) in got.iter().zip(&want) {
            let rel = (a - b).abs() / b.abs().max(f64::MIN_POSITIVE);
            if a != b {
                worst = worst.max(rel);
            }
            check(a == b || rel <= 1e-12, || format!("pair {i}: {got:?} vs oracle {want:?}"))?;
        }
        let q = (0..len).fold(0, |m, k| if inf[k].abs() < inf[m].abs() { k } else { m });
        let p = (0..len).fold(0, |m, k| if dom[k].abs() > dom[m].abs() { k } else { m });
        // no-op blends: all-zero pair, equal endpoints, α = 1, or adaptive α = 1 from a zero dominant
        let degenerate =
            (inf[q] == 0.0 && dom[p] == 0.0) || inf[q] == dom[p] || alpha == Some(1.0) || (alpha.is_none() && dom[p] == 0.0);
        let differing = got.iter().zip(&inf).filter(|(a, b)| a.to_bits() != b.to_bits()).count();
        if degenerate {
            check(differing <= 1, || format!("pair {i}: degenerate slice changed {differing} elements"))?;
        } else {
            non_degenerate += 1;
            check(differing == 1, || format!("pair {i}: {differing} elements changed, expected 1"))?;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(secs <= 30.0, || format!("took {secs:.1} s > 30 s"))?;
    Ok(format!(
        "{PAIRS} slice pairs (lengths 1/4/9), max rel err {worst:.1e} (limit 1e-12), exactly one element changed in all {non_degenerate} non-degenerate slices, {secs:.2} s (limit 30 s)"
    ))
}

fn c3_schedule() -> Outcome {
    let s = StageSchedule::<f64>::from_milestones(200, &[60, 120], 0.05, 2.5, 15.0).map_err(|e| e.to_string())?;
    let r: Vec<f64> = (1..=200).map(|e| s.selection_rate(e).unwrap()).collect();
    let at = |e: usize| r[e - 1];
    check((at(1) - 0.025).abs() <= 1e-9, || format!("r(1) = {}", at(1)))?;
    for e in 2..=200 {
        if e == 61 || e == 121 {
            check(at(e) < at(e - 1), || format!("no drop at epoch {e}: {} -> {}", at(e - 1), at(e)))?;
        } else {
            check(at(e) > at(e - 1), || format!("not increasing at epoch {e}: {} -> {}", at(e - 1), at(e)))?;
        }
    }
    let sup = r.iter().cloned().fold(0.0, f64::max);
    check(sup < 0.05, || format!("sup r = {sup}"))?;
    Ok(format!(
        "r(1) = {:.12}, strictly increasing within 3 stages, drops at 61 ({:.5} -> {:.5}) and 121 ({:.5} -> {:.5}), sup r = {sup:.6} < 0.05",
        at(1),
        at(60),
        at(61),
        at(120),
        at(121)
    ))
}

fn c4_alpha_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut below_half = 0;
    const N: usize = 100_000;
    for _ in 0..N {
        // magnitudes within three decades, where 1 − α keeps 1e-12 relative precision
        let mag = |rng: &mut ChaCha8Rng| 10f64.powf(rng.gen_range(-3.0..0.0)) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let wq = mag(&mut rng);
        let wp = mag(&mut rng);
        let alpha = wevo::evolve::adaptive_alpha(wq, wp);
        let target = wq.abs() * wp.abs() / (wq.abs() + wp.abs());
        let lhs = alpha * wp.abs();
        let rhs = (1.0 - alpha) * wq.abs();
        let err = ((lhs - target).abs().max((rhs - target).abs())) / target;
        worst = worst.max(err);
        check(err <= 1e-12, || format!("wq={wq} wp={wp}: {lhs} / {rhs} vs {target}"))?;
        if wp.abs() > wq.abs() {
            check(alpha < 0.5, || format!("alpha {alpha} >= 0.5 with |wp| > |wq|"))?;
            below_half += 1;
        }
    }
    Ok(format!(
        "{N} random nonzero pairs with magnitudes in [1e-3, 1]: α|w_p| = (1−α)|w_q| = |w_q||w_p|/(|w_q|+|w_p|) to {worst:.1e} rel (limit 1e-12); α < 0.5 in all {below_half} cases with |w_p| > |w_q|"
    ))
}

type Decisions = (BTreeSet<wevo::FilterKey>, Vec<(usize, usize, Vec<usize>)>);

fn decisions(store: &DenseStore<f64>, epoch: usize, cfg: &SelectionConfig<f64>) -> Result<Decisions, WeError> {
    let scores = score_snapshot(store)?;
    let tbd = global_select(&scores, epoch, cfg)?;
    let local = local_select(&tbd, &group_scores(&scores), cfg.gamma, cfg.mode)
        .into_iter()
        .map(|s| (s.layer_id, s.group, s.members.iter().map(|m| m.filter_index).collect()))
        .collect();
    Ok((tbd, local))
}

fn c5_scale_invariance() -> Outcome {
    let mut cases = 0;
    for seed in 0..400u64 {
        let store = to_store(&ToyNetwork::random(seed));
        let epoch = 1 + (seed as usize * 53) % 200;
        for mode in [OracleMode::Full, OracleMode::GlobalOnly, OracleMode::LocalOnly] {
            let cfg = selection(0.5, 0.3, mode);
            let base = decisions(&store, epoch, &cfg).map_err(|e| e.to_string())?;
            for s in [0.1, 3.0, 10.0] {
                let mut scaled = store.clone();
                scaled.map_in_place(|w| w * s);
                let got = decisions(&scaled, epoch, &cfg).map_err(|e| e.to_string())?;
                check(got == base, || format!("seed {seed}, mode {mode:?}, scale {s}: decisions changed"))?;
                cases += 1;
            }
        }
    }
    Ok(format!(
        "{cases} (toy, mode, scale ∈ {{0.1, 3, 10}}) cases: global key sets and every local decision identical"
    ))
}

struct FailingStore<'a> {
    inner: &'a mut DenseStore<f64>,
    fail_at: usize,
    calls: usize,
}

impl ParameterStore<f64> for FailingStore<'_> {
    fn layers(&self) -> &[LayerSpec] {
        self.inner.layers()
    }

    fn filter(&self, layer_id: usize, filter_index: usize) -> wevo::Result<&[f64]> {
        self.inner.filter(layer_id, filter_index)
    }

    fn filter_mut(&mut self, layer_id: usize, filter_index: usize) -> wevo::Result<&mut [f64]> {
        self.calls += 1;
        if self.calls == self.fail_at {
            return Err(WeError::Store("injected failure".into()));
        }
        self.inner.filter_mut(layer_id, filter_index)
    }
}

fn c6_atomicity_accounting() -> Outcome {
    let mut failures = 0;
    let mut successes = 0;
    let mut changed_total = 0;
    for seed in 0..500u64 {
        let mut store = to_store(&ToyNetwork::random(seed));
        let mode = [OracleMode::Full, OracleMode::LocalOnly][seed as usize % 2];
        let mut eng = engine(0.6, 0.1, mode);
        let epoch = 1 + seed as usize % 200;
        let plan = eng.plan(&store, epoch).map_err(|e| e.to_string())?;
        let n = plan.total_writes();
        let before: Vec<u64> = store.flatten().iter().map(|v| v.to_bits()).collect();
        if n >= 2 {
            let mut failing = FailingStore {
                inner: &mut store,
                fail_at: 1 + seed as usize % n,
                calls: 0,
            };
            check(apply_plan(&plan, &mut failing).is_err(), || format!("seed {seed}: injected failure not reported"))?;
            let mut failing = FailingStore {
                inner: &mut store,
                fail_at: n,
                calls: 0,
            };
            check(eng.evolve_once(&mut failing, epoch).is_err(), || format!("seed {seed}: engine hid failure"))?;
            let after: Vec<u64> = store.flatten().iter().map(|v| v.to_bits()).collect();
            check(after == before, || format!("seed {seed}: parameters changed after failed plan"))?;
            failures += 1;
        }
        let report = eng.evolve_once(&mut store, epoch).map_err(|e| e.to_string())?;
        let after = store.flatten();
        let diff = before
            .iter()
            .zip(&after)
            .filter(|(a, b)| **a != b.to_bits())
            .count();
        check(diff == report.total_elements_changed, || {
            format!("seed {seed}: reported {} changed, bitwise diff {diff}", report.total_elements_changed)
        })?;
        successes += 1;
        changed_total += diff;
    }
    Ok(format!(
        "{failures} injected mid-plan failures left parameters bitwise unchanged; {successes} successful evolutions reported exactly the bitwise diff ({changed_total} elements)"
    ))
}

// ------------------------------------------------------- training runs

/// Desk-scale smoke setup: toy-cnn on the two-class gratings, 20 epochs,
/// one learning-rate decay after epoch 15, all other WE settings default.
fn smoke_config(dir: &Path) -> RunConfig {
    let mut c = RunConfig::new("toy-cnn", "synthetic-2class", dir);
    c.seed = 7;
    c.data.noise = 1.5;
    c.data.train_size = 512;
    c.data.test_size = 256;
    c.optimizer.batch_size = 64;
    c.optimizer.lr = 0.1;
    c.optimizer.milestones = vec![15];
    c.optimizer.epochs = 20;
    c
}

struct Smoke {
    we: RunResult,
    baseline: RunResult,
    secs: f64,
}

fn smoke(root: &Path) -> Result<Smoke, String> {
    let start = Instant::now();
    let we_cfg = smoke_config(&root.join("smoke-we"));
    let mut base_cfg = smoke_config(&root.join("smoke-baseline"));
    base_cfg.we.enabled = false;
    let we = run_single(&we_cfg, &we_cfg.output_dir).map_err(|e| format!("WE run failed: {e}"))?;
    let baseline = run_single(&base_cfg, &base_cfg.output_dir).map_err(|e| format!("baseline run failed: {e}"))?;
    Ok(Smoke {
        we,
        baseline,
        secs: start.elapsed().as_secs_f64(),
    })
}

fn c7_smoke(s: &Smoke) -> Outcome {
    let mut net_rng = ChaCha8Rng::seed_from_u64(0);
    let net = wevo_nn::models::toy_cnn(3, 2, &mut net_rng);
    let kinds: BTreeSet<LayerKind> = net.layers().iter().map(|l| l.kind).collect();
    for k in [LayerKind::OrdinaryConv, LayerKind::DepthwiseConv, LayerKind::PointwiseConv, LayerKind::BnScale] {
        check(kinds.contains(&k), || format!("toy-cnn lacks {k:?}"))?;
    }
    check(s.we.epochs.len() == 20 && s.baseline.epochs.len() == 20, || "runs did not finish 20 epochs".into())?;
    for r in [&s.we, &s.baseline] {
        check(r.final_train_loss < r.initial_train_loss, || {
            format!("{}: train loss {} -> {}", r.label, r.initial_train_loss, r.final_train_loss)
        })?;
    }
    check(s.we.evolving_epochs >= 10, || format!("only {} of 20 epochs evolved elements", s.we.evolving_epochs))?;
    let gap = 100.0 * (s.baseline.final_test_acc - s.we.final_test_acc);
    check(gap <= 2.0, || format!("WE {:.2}% vs baseline {:.2}%", 100.0 * s.we.final_test_acc, 100.0 * s.baseline.final_test_acc))?;
    check(s.secs <= 600.0, || format!("took {:.0} s > 600 s", s.secs))?;
    Ok(format!(
        "(a) both 20-epoch runs completed; (b) train loss WE {:.4} -> {:.4}, baseline {:.4} -> {:.4}; (c) {} of 20 epochs evolved elements ({} total, need >= 10 epochs); (d) final acc WE {:.2}% vs baseline {:.2}% (bound: >= baseline - 2); {:.1} s (limit 600 s)",
        s.we.initial_train_loss,
        s.we.final_train_loss,
        s.baseline.initial_train_loss,
        s.baseline.final_train_loss,
        s.we.evolving_epochs,
        s.we.total_elements_changed,
        100.0 * s.we.final_test_acc,
        100.0 * s.baseline.final_test_acc,
        s.secs
    ))
}

fn c8_overhead(s: &Smoke) -> Outcome {
    let worst = s
        .we
        .epochs
        .iter()
        .map(|e| e.hook_ms / (e.train_ms + e.hook_ms))
        .fold(0.0, f64::max);
    check(worst <= 0.05, || format!("worst epoch overhead {:.2}%", 100.0 * worst))?;
    Ok(format!(
        "WE hook {:.3} ms vs {:.1} ms training per epoch: mean {:.4}%, worst epoch {:.4}% (limit 5%)",
        s.we.mean_hook_ms,
        s.we.mean_train_ms,
        100.0 * s.we.mean_overhead,
        100.0 * worst
    ))
}

fn reports(dir: &Path) -> Result<Vec<EvolutionReport>, String> {
    wevo::report::read_jsonl(dir.join(EVOLUTION_FILE)).map_err(|e| e.to_string())
}

fn first_report(dir: &Path) -> Result<EvolutionReport, String> {
    reports(dir)?.into_iter().next().ok_or_else(|| format!("{} has no evolution records", dir.display()))
}

/// Inferior filter indices per layer, from the report pairs.
fn inferior_sets(r: &EvolutionReport) -> Vec<(usize, BTreeSet<usize>)> {
    r.layers.iter().map(|l| (l.layer_id, l.pairs.iter().map(|p| p.0).collect())).collect()
}

fn subset_of(small: &EvolutionReport, big: &EvolutionReport) -> bool {
    let big = inferior_sets(big);
    inferior_sets(small).iter().all(|(id, s)| {
        big.iter().find(|(b, _)| b == id).map_or(s.is_empty(), |(_, bs)| s.is_subset(bs))
    })
}

fn c10_ablations(root: &Path) -> Outcome {
    let base = {
        let mut c = smoke_config(&root.join("ablation"));
        c.optimizer.epochs = 3;
        c.optimizer.milestones = Vec::new();
        c
    };
    let variant = |name: &str, f: &dyn Fn(&mut RunConfig)| -> Result<PathBuf, String> {
        let mut c = base.clone();
        c.output_dir = root.join("ablation").join(name);
        f(&mut c);
        run_single(&c, &c.output_dir).map_err(|e| format!("{name}: {e}"))?;
        Ok(c.output_dir)
    };
    let mut notes = Vec::new();

    let full_dir = variant("we", &|_| {})?;
    let full = first_report(&full_dir)?;
    check(full.total_inferior > 0, || "reference WE run evolved nothing at epoch 1".into())?;

    let baseline = variant("baseline", &|c| c.we.enabled = false)?;
    let n = reports(&baseline)?.len();
    check(n == 0, || format!("baseline wrote {n} evolution records"))?;
    notes.push("baseline: 0 evolution records".to_string());

    let g = first_report(&variant("we-g", &|c| c.we.mode = SelectionMode::GlobalOnly)?)?;
    check(g.tbd_count == full.tbd_count && g.total_inferior >= full.total_inferior && subset_of(&full, &g), || {
        format!("WE-G inferior {} vs full {}", g.total_inferior, full.total_inferior)
    })?;
    notes.push(format!("WE-G: {} inferior ⊇ full's {}", g.total_inferior, full.total_inferior));

    let specs = checkpoint::read(&full_dir, FINAL_CHECKPOINT).map_err(|e| e.to_string())?.0.layers;
    let m: usize = specs.iter().filter(|l| l.family != LayerFamily::Classifier).map(|l| l.filter_count).sum();
    let l = first_report(&variant("we-l", &|c| c.we.mode = SelectionMode::LocalOnly)?)?;
    check(l.tbd_count == m && subset_of(&full, &l), || format!("WE-L tbd {} vs M {m}", l.tbd_count))?;
    notes.push(format!("WE-L: tbd = M = {m}, {} inferior", l.total_inferior));

    let rm = first_report(&variant("we-rm", &|c| c.we.matching = wevo::MatchStrategy::Reverse)?)?;
    let mut reversed_layers = 0;
    for (f, r) in full.layers.iter().zip(&rm.layers) {
        let inf_f: Vec<usize> = f.pairs.iter().map(|p| p.0).collect();
        let inf_r: Vec<usize> = r.pairs.iter().map(|p| p.0).collect();
        let mut dom_f: Vec<usize> = f.pairs.iter().map(|p| p.1).collect();
        dom_f.reverse();
        let dom_r: Vec<usize> = r.pairs.iter().map(|p| p.1).collect();
        check(inf_f == inf_r && dom_f == dom_r, || format!("layer {}: {:?} vs {:?}", f.name, f.pairs, r.pairs))?;
        if f.pairs.len() > 1 && f.pairs != r.pairs {
            reversed_layers += 1;
        }
    }
    notes.push(format!("WE-RM: dominant order reversed on identical snapshot ({reversed_layers} layers with ≥2 pairs)"));

    let fl = variant("filter-level", &|c| c.we.level = wevo::CrossoverLevel::Filter)?;
    let mut filter_elems = 0;
    for rep in reports(&fl)? {
        for layer in &rep.layers {
            let per = specs[layer.layer_id].filter_len();
            check(layer.elements_changed == layer.inferior * per, || {
                format!("{}: {} changed for {} inferior of I·K² = {per}", layer.name, layer.elements_changed, layer.inferior)
            })?;
            filter_elems += layer.elements_changed;
        }
    }
    notes.push(format!("filter-level: I·K² elements per inferior filter ({filter_elems} total)"));

    let no_bn = variant("without-bn", &|c| c.we.without_bn = true)?;
    for rep in reports(&no_bn)? {
        check(rep.layers.iter().all(|l| l.family != LayerFamily::BatchNorm), || "BN layer in without-BN report".into())?;
    }
    let no_conv = variant("without-conv", &|c| c.we.without_conv = true)?;
    for rep in reports(&no_conv)? {
        check(rep.layers.iter().all(|l| l.family != LayerFamily::Conv), || "conv layer in without-CONV report".into())?;
    }
    notes.push("without-BN / without-CONV: no entries of the excluded family".into());

    let mut sweep_base = base.clone();
    sweep_base.optimizer.epochs = 2;
    sweep_base.output_dir = root.join("ablation").join("sweep");
    let configs = expand_alpha_sweep(&sweep_base);
    let fixed: Vec<f64> = configs
        .iter()
        .filter_map(|c| match c.we.alpha {
            AlphaSetting::Fixed(a) => Some(a),
            AlphaSetting::Adaptive => None,
        })
        .collect();
    check(configs.len() == 12 && fixed.len() == 11, || format!("sweep expanded to {} runs", configs.len()))?;
    let results: Vec<RunResult> = run_many(&configs, 4).map_err(|e| e.to_string())?.into_iter().flatten().collect();
    for (cfg, r) in configs.iter().zip(&results) {
        let rep = first_report(&cfg.output_dir)?;
        check(r.alpha == cfg.we.alpha.to_string(), || format!("result alpha {} vs {}", r.alpha, cfg.we.alpha))?;
        check(rep.total_inferior > 0, || format!("alpha {}: nothing selected", r.alpha))?;
        if cfg.we.alpha == AlphaSetting::Fixed(1.0) {
            check(r.total_elements_changed == 0, || "alpha = 1 changed elements".into())?;
        } else {
            check(rep.total_elements_changed > 0, || format!("alpha {}: no elements changed", r.alpha))?;
        }
    }
    notes.push("α sweep: 11 fixed + adaptive runs; α = 1 leaves every selected slice unchanged".into());

    Ok(notes.join("; "))
}

// ----------------------------------------------------------------- main

fn main() {
    let scratch = tempfile::tempdir().expect("temporary directory");
    let root = scratch.path().to_path_buf();
    let mut failed = 0;
    let mut report = |id: &str, name: &str, outcome: Outcome| {
        match outcome {
            Ok(detail) => println!("PASS [{id}] {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL [{id}] {name}: {detail}");
            }
        }
    };
    report("1", "oracle equivalence, selection", c1_selection_oracle());
    report("2", "oracle equivalence, crossover", c2_crossover_oracle());
    report("3", "schedule properties", c3_schedule());
    report("4", "adaptive-alpha identity", c4_alpha_identity());
    report("5", "scale invariance", c5_scale_invariance());
    report("6", "engine atomicity and accounting", c6_atomicity_accounting());
    match smoke(&root) {
        Ok(s) => {
            report("7", "smoke training", c7_smoke(&s));
            report("8", "overhead", c8_overhead(&s));
        }
        Err(e) => {
            report("7", "smoke training", Err(e.clone()));
            report("8", "overhead", Err(e));
        }
    }
    println!(
        "SKIP [9] MobileNetV2/CIFAR-10 full protocol: stretch goal, not gated (needs local CIFAR-10 and multi-hour training; see README)"
    );
    report("10", "ablation plumbing", c10_ablations(&root));
    drop(scratch);
    if failed > 0 {
        println!("acceptance: {failed} criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all gated criteria passed");
}
