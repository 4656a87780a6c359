//! Acceptance suite: one line per criterion, `PASS` or `FAIL`, with the
//! measured values. Pass criterion numbers as arguments to run a subset,
//! e.g. `cargo test --test acceptance -- 1 8`.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_traits::{Float, Signed, Zero};
use occnav::config::RunConfig;
use occnav::dataset::{build_dataset, build_split, BuildInputs, Dataset, DatasetConfig, SamplePair};
use occnav::geometry::Vec2;
use occnav::models::*;
use occnav::navsim::*;
use occnav::nn::*;
use occnav::occupancy::{fuse3, GridSpec, LogOddsGrid, OccupancyConfig, ProbGrid};
use occnav::rng::seeded;
use occnav::sensor::{cast_rays, CameraIntrinsics, Pose2D};
use occnav::worldgen::{generate_world, WorldSpec};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn occ() -> OccupancyConfig {
    OccupancyConfig::default()
}

// ---------------------------------------------------------------- 1

/// Exact value of an f32 as an integer multiple of 2^-149.
fn exact(v: f32) -> BigInt {
    let (mant, exp, sign) = Float::integer_decode(v);
    (BigInt::from(mant) * BigInt::from(sign)) << (i32::from(exp) + 149) as usize
}

/// Exact value as a multiple of 2^-100 when that fits an i128.
fn exact_small(v: f32) -> Option<i128> {
    let (mant, exp, sign) = Float::integer_decode(v);
    let shift = i32::from(exp) + 100;
    if mant == 0 {
        return Some(0);
    }
    (0..=100).contains(&shift).then(|| i128::from(sign) * (i128::from(mant) << shift))
}

/// Sign of the exact sum of three f32 values.
fn exact_sign(a: f32, b: f32, c: f32) -> i32 {
    if let (Some(x), Some(y), Some(z)) = (exact_small(a), exact_small(b), exact_small(c)) {
        return (x + y + z).signum() as i32;
    }
    let sum = exact(a) + exact(b) + exact(c);
    if sum.is_zero() {
        0
    } else if sum.is_positive() {
        1
    } else {
        -1
    }
}

fn fusion_oracle(a: f32, b: f32, c: f32) -> f32 {
    let mag = a.abs().max(b.abs()).max(c.abs());
    match exact_sign(a, b, c) {
        0 => 0.0,
        1 => mag,
        _ => -mag,
    }
}

fn random_grid(spec: GridSpec, rng: &mut impl Rng) -> LogOddsGrid {
    let values = (0..spec.len())
        .map(|_| match rng.random_range(0..4) {
            0 => 0.0,
            1 => (0.01 * rng.random_range(-1000i32..=1000) as f64) as f32,
            2 => rng.random_range(-10.0f32..=10.0),
            _ => (0.01 * rng.random_range(-3i32..=3) as f64) as f32,
        })
        .collect();
    LogOddsGrid::from_values(spec, values).unwrap()
}

fn c1_fusion() -> Outcome {
    let spec = GridSpec::desk();
    let zero = LogOddsGrid::unknown(spec);
    let mut rng = seeded(1, 0);
    let (mut cells, mut bad_oracle, mut bad_perm, mut bad_identity) = (0usize, 0usize, 0usize, 0usize);
    for _ in 0..1000 {
        let a = random_grid(spec, &mut rng);
        let b = random_grid(spec, &mut rng);
        let mut c = random_grid(spec, &mut rng);
        // force exact cancellations on a tenth of the cells
        for i in (0..spec.len()).step_by(10) {
            c.values[i] = -(a.values[i] + b.values[i]);
        }
        let f = fuse3(&a, &b, &c).unwrap();
        for i in 0..spec.len() {
            cells += 1;
            if f.values[i].to_bits() != fusion_oracle(a.values[i], b.values[i], c.values[i]).to_bits() {
                bad_oracle += 1;
            }
        }
        for (x, y, z) in [(&a, &c, &b), (&b, &a, &c), (&b, &c, &a), (&c, &a, &b), (&c, &b, &a)] {
            let g = fuse3(x, y, z).unwrap();
            bad_perm += f.values.iter().zip(&g.values).filter(|(p, q)| p.to_bits() != q.to_bits()).count();
        }
        let id = fuse3(&a, &zero, &zero).unwrap();
        bad_identity += a.values.iter().zip(&id.values).filter(|(p, q)| p.to_bits() != q.to_bits()).count();
    }
    outcome(
        bad_oracle + bad_perm + bad_identity == 0,
        format!("{cells} cells, oracle mismatches {bad_oracle}, permutation {bad_perm}, identity {bad_identity}"),
    )
}

// ---------------------------------------------------------------- 2

fn randn(shape: &[usize], seed: u64) -> Tensor<f64> {
    Tensor::randn(shape, 1.0, &mut seeded(seed, 0))
}

fn uniform(shape: &[usize], lo: f64, hi: f64, seed: u64) -> Tensor<f64> {
    let mut rng = seeded(seed, 0);
    let n = shape.iter().product();
    Tensor::from_vec(shape, (0..n).map(|_| rng.random_range(lo..=hi)).collect()).unwrap()
}

fn away_from_zero(shape: &[usize], seed: u64) -> Tensor<f64> {
    randn(shape, seed).map(|v| if v.abs() < 0.05 { v.signum() * 0.05 + v } else { v })
}

fn layer_checks() -> Vec<(String, f64)> {
    const EPS: f64 = 1e-4;
    let mut out = Vec::new();

    let conv = Conv2d::<f64>::init(3, 4, 0.3, &mut seeded(1, 1));
    let x = randn(&[2, 3, 8, 8], 2);
    let r = randn(&[2, 4, 4, 4], 3);
    out.push((
        "conv/input".into(),
        grad_check(|x| (conv.forward(x).unwrap().dot(&r).unwrap(), conv.backward(x, &r).unwrap().input), &x, EPS),
    ));
    out.push((
        "conv/weight".into(),
        grad_check(
            |w| {
                let c = Conv2d { weight: w.clone(), bias: conv.bias.clone() };
                (c.forward(&x).unwrap().dot(&r).unwrap(), c.backward(&x, &r).unwrap().weight)
            },
            &conv.weight,
            EPS,
        ),
    ));
    out.push((
        "conv/bias".into(),
        grad_check(
            |b| {
                let c = Conv2d { weight: conv.weight.clone(), bias: b.clone() };
                (c.forward(&x).unwrap().dot(&r).unwrap(), c.backward(&x, &r).unwrap().bias)
            },
            &randn(&[4], 4),
            EPS,
        ),
    ));

    let up = ConvTranspose2d::<f64>::init(3, 2, 0.3, &mut seeded(5, 1));
    let x = randn(&[2, 3, 4, 4], 6);
    let r = randn(&[2, 2, 8, 8], 7);
    out.push((
        "conv_t/input".into(),
        grad_check(|x| (up.forward(x).unwrap().dot(&r).unwrap(), up.backward(x, &r).unwrap().input), &x, EPS),
    ));
    out.push((
        "conv_t/weight".into(),
        grad_check(
            |w| {
                let u = ConvTranspose2d { weight: w.clone(), bias: up.bias.clone() };
                (u.forward(&x).unwrap().dot(&r).unwrap(), u.backward(&x, &r).unwrap().weight)
            },
            &up.weight,
            EPS,
        ),
    ));
    out.push((
        "conv_t/bias".into(),
        grad_check(
            |b| {
                let u = ConvTranspose2d { weight: up.weight.clone(), bias: b.clone() };
                (u.forward(&x).unwrap().dot(&r).unwrap(), u.backward(&x, &r).unwrap().bias)
            },
            &randn(&[2], 8),
            EPS,
        ),
    ));

    let x = away_from_zero(&[3, 7], 11);
    let r = randn(&[3, 7], 12);
    out.push(("relu".into(), grad_check(|x| (relu(x).dot(&r).unwrap(), relu_backward(x, &r).unwrap()), &x, EPS)));
    out.push((
        "leaky_relu".into(),
        grad_check(
            |x| (leaky_relu(x, LEAKY_SLOPE).dot(&r).unwrap(), leaky_relu_backward(x, &r, LEAKY_SLOPE).unwrap()),
            &x,
            EPS,
        ),
    ));
    out.push((
        "sigmoid".into(),
        grad_check(|x| { let y = sigmoid(x); (y.dot(&r).unwrap(), sigmoid_backward(&y, &r).unwrap()) }, &x, EPS),
    ));
    out.push((
        "tanh".into(),
        grad_check(|x| { let y = tanh(x); (y.dot(&r).unwrap(), tanh_backward(&y, &r).unwrap()) }, &x, EPS),
    ));

    let a = randn(&[2, 3, 4, 4], 13);
    let b = randn(&[2, 2, 4, 4], 14);
    let r = randn(&[2, 5, 4, 4], 15);
    out.push((
        "concat".into(),
        grad_check(
            |a| {
                let y = concat_channels(a, &b).unwrap();
                (y.dot(&r).unwrap(), split_channels(&r, 3).unwrap().0)
            },
            &a,
            EPS,
        ),
    ));

    let p = uniform(&[2, 9], 0.2, 0.8, 21);
    let t = uniform(&[2, 9], 0.0, 1.0, 22);
    let q = uniform(&[2, 9], 0.2, 0.8, 23);
    let shifted = t.map(|v| v + 0.01);
    out.push(("bce".into(), grad_check(|p| { let l = bce(p, &t).unwrap(); (l.value, l.grad) }, &p, EPS)));
    out.push(("mse".into(), grad_check(|p| { let l = mse(p, &t).unwrap(); (l.value, l.grad) }, &p, EPS)));
    out.push(("l1".into(), grad_check(|p| { let l = l1(p, &shifted).unwrap(); (l.value, l.grad) }, &p, 1e-6)));
    out.push(("gan_g".into(), grad_check(|p| { let l = gan_g_loss(p); (l.value, l.grad) }, &p, EPS)));
    out.push((
        "gan_d/real".into(),
        grad_check(|p| { let (v, g, _) = gan_d_loss(p, &q).unwrap(); (v, g) }, &p, EPS),
    ));
    out.push((
        "gan_d/fake".into(),
        grad_check(|p| { let (v, _, g) = gan_d_loss(&q, p).unwrap(); (v, g) }, &p, EPS),
    ));

    // discriminator, scaled up so its outputs move away from 0.5
    let mut d = Discriminator::<f64>::new(2, 40.0, &mut seeded(8, 11)).unwrap();
    for w in d.params_mut() {
        *w = w.map(|v| v * 15.0);
    }
    let cond = uniform(&[2, 1, 32, 32], 0.475, 0.525, 9);
    let cand = uniform(&[2, 1, 32, 32], 0.475, 0.525, 12);
    let r = randn(&[2, 1, 2, 2], 16);
    out.push((
        "discriminator/input".into(),
        grad_check(
            |c| {
                let cache = d.forward(&cond, c).unwrap();
                (cache.output.dot(&r).unwrap(), d.backward(&cache, &r).unwrap().1)
            },
            &cand,
            1e-6,
        ),
    ));
    for k in 0..d.params().len() {
        let err = grad_check(
            |w| {
                let mut e = d.clone();
                *e.params_mut()[k] = w.clone();
                let cache = e.forward(&cond, &cand).unwrap();
                (cache.output.dot(&r).unwrap(), e.backward(&cache, &r).unwrap().0[k].clone())
            },
            d.params()[k],
            1e-6,
        );
        out.push((format!("discriminator/param{k}"), err));
    }
    out
}

fn generator_checks() -> Vec<(String, f64)> {
    let g = Generator::<f64>::with_init_std(GeneratorArch::for_occupancy(2, &occ()), 0.3, &mut seeded(5, 10)).unwrap();
    let x = uniform(&[1, 1, 32, 32], 0.475, 0.525, 6);
    let t = uniform(&[1, 1, 32, 32], 0.475, 0.525, 7);
    let eval = |g: &Generator<f64>, x: &Tensor<f64>| {
        let c = g.forward(x).unwrap();
        let l = bce(&c.output, &t).unwrap();
        let (pg, gx) = g.backward(&c, &l.grad).unwrap();
        (l.value, pg, gx)
    };
    let mut out = vec![(
        "generator/input".to_string(),
        grad_check(|x| { let (v, _, gx) = eval(&g, x); (v, gx) }, &x, 1e-6),
    )];
    let names = g.param_names();
    for k in 0..g.params().len() {
        let err = grad_check(
            |w| {
                let mut h = g.clone();
                *h.params_mut()[k] = w.clone();
                let (v, pg, _) = eval(&h, &x);
                (v, pg[k].clone())
            },
            g.params()[k],
            1e-4,
        );
        out.push((format!("generator/{}", names[k]), err));
    }
    out
}

fn worst(checks: &[(String, f64)]) -> (String, f64) {
    checks
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .cloned()
        .unwrap_or_default()
}

fn c2_gradients() -> Outcome {
    let layers = layer_checks();
    let generator = generator_checks();
    let (ln, lv) = worst(&layers);
    let (gn, gv) = worst(&generator);
    outcome(
        lv < 1e-5 && gv < 1e-4,
        format!(
            "{} layer/loss checks, worst {ln} {lv:.2e}; {} generator tensors, worst {gn} {gv:.2e}",
            layers.len(),
            generator.len()
        ),
    )
}

// ---------------------------------------------------------------- 3

fn c3_adjoint() -> Outcome {
    let mut rng = seeded(3, 0);
    let mut worst = 0.0f64;
    for i in 0..100u64 {
        let (c, o) = (rng.random_range(1..6), rng.random_range(1..6));
        let (h, w) = (rng.random_range(1..9), rng.random_range(1..9));
        let n = rng.random_range(1..3);
        let conv = Conv2d::<f64>::init(c, o, 1.0, &mut seeded(i, 1));
        let up = ConvTranspose2d { weight: conv.weight.clone(), bias: Tensor::zeros(&[c]) };
        let conv = Conv2d { weight: conv.weight, bias: Tensor::zeros(&[o]) };
        let x = randn(&[n, c, 2 * h, 2 * w], 1000 + i);
        let y = randn(&[n, o, h, w], 2000 + i);
        let lhs = conv.forward(&x).unwrap().dot(&y).unwrap();
        let rhs = x.dot(&up.forward(&y).unwrap()).unwrap();
        worst = worst.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE));
    }
    outcome(worst < 1e-6, format!("100 instances, worst relative gap {worst:.2e}"))
}

// ---------------------------------------------------------------- 4, 5, 6

/// Eight pairs spread evenly over the sweep of world 1.
fn tiny_set() -> Vec<SamplePair> {
    let grid = GridSpec::desk();
    let cfg = RunConfig::default();
    let ds = build_dataset(BuildInputs { grid: &grid, ..cfg.build_inputs() }, &[1]).unwrap();
    let step = ds.len() / 8;
    (0..8).map(|i| ds.pairs[i * step].clone()).collect()
}

fn c4_overfit(pairs: &[SamplePair]) -> Outcome {
    let cfg = TrainConfig { pred_loss: PredLoss::Mse, max_iterations: 500, max_epochs: 500, ..TrainConfig::default() };
    let out = train_pred(pairs, &[], &cfg, &occ()).unwrap();
    let it = &out.history.iterations;
    // batch 16 covers all 8 pairs, so each record is the full training loss
    let (first, last) = (it[0].loss, it[it.len() - 1].loss);
    let drop = 100.0 * (1.0 - last / first);
    let raw = out.generator.predict_grids(&pairs.iter().map(|p| p.input.clone()).collect::<Vec<_>>()).unwrap();
    let accs: Vec<f64> = raw
        .iter()
        .zip(pairs)
        .map(|(r, p)| inpaint_accuracy(r, &p.target, &occ()).unwrap().unwrap_or(0.0))
        .collect();
    let acc = 100.0 * accs.iter().sum::<f64>() / accs.len() as f64;
    outcome(
        drop >= 90.0 && acc >= 95.0,
        format!("{} iterations, loss {first:.3e} -> {last:.3e} ({drop:.1}% drop), training accuracy {acc:.2}%", it.len()),
    )
}

fn c5_gan(pairs: &[SamplePair]) -> Outcome {
    let cfg = TrainConfig { max_iterations: 200, max_epochs: 1000, ..TrainConfig::default() };
    let before = mean_l1(&init_generator(&cfg, &occ()).unwrap(), pairs).unwrap();
    let out = match train_gan(pairs, &[], &cfg, &occ()) {
        Ok(o) => o,
        Err(e) => return outcome(false, format!("training failed: {e}")),
    };
    let after = mean_l1(&out.generator, pairs).unwrap();
    let it = &out.history.iterations;
    let finite = it.iter().all(|r| r.loss.is_finite() && r.l1.is_finite() && r.d_loss.is_some_and(f64::is_finite));
    let d_lo = it.iter().filter_map(|r| r.d_min).fold(f64::INFINITY, f64::min);
    let d_hi = it.iter().filter_map(|r| r.d_max).fold(f64::NEG_INFINITY, f64::max);
    let drop = 100.0 * (1.0 - after / before);
    outcome(
        it.len() == 200 && drop >= 50.0 && finite && d_lo > 0.0 && d_hi < 1.0,
        format!(
            "{} iterations, L1 {before:.3e} -> {after:.3e} ({drop:.1}% drop), finite {finite}, D outputs in [{d_lo:.4}, {d_hi:.4}]",
            it.len()
        ),
    )
}

fn c6_limit(pairs: &[SamplePair]) -> Outcome {
    let base = TrainConfig {
        max_iterations: 300,
        max_epochs: 1000,
        batch_size_gan: 4,
        batch_size_pred: 4,
        ..TrainConfig::default()
    };
    let gan = train_gan(pairs, &[], &TrainConfig { lambda_l1: 1e6, ..base.clone() }, &occ()).unwrap();
    let pred = train_pred(pairs, &[], &TrainConfig { pred_loss: PredLoss::L1, ..base }, &occ()).unwrap();
    let a = mean_l1(&gan.generator, pairs).unwrap();
    let b = mean_l1(&pred.generator, pairs).unwrap();
    let gap = 100.0 * (a - b).abs() / b;
    outcome(gap <= 10.0, format!("final training L1: gan(lambda=1e6) {a:.4e}, pred-l1 {b:.4e}, gap {gap:.2}%"))
}

// ---------------------------------------------------------------- 7

/// Bellman-Ford over an explicit edge list of the 8-connected grid; a step
/// costs the destination weight times its length.
fn bellman_ford(n: usize, w: &[f64], src: usize) -> Vec<f64> {
    let mut edges = Vec::new();
    for r in 0..n as i64 {
        for c in 0..n as i64 {
            for (dr, dc) in [(-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1)] {
                let (r2, c2) = (r + dr, c + dc);
                if r2 < 0 || c2 < 0 || r2 >= n as i64 || c2 >= n as i64 {
                    continue;
                }
                let v = (r2 * n as i64 + c2) as usize;
                let len = if dr != 0 && dc != 0 { 2f64.sqrt() } else { 1.0 };
                edges.push(((r * n as i64 + c) as usize, v, w[v] * len));
            }
        }
    }
    let mut dist = vec![f64::INFINITY; w.len()];
    dist[src] = 0.0;
    for _ in 0..w.len() {
        let mut changed = false;
        for &(u, v, e) in &edges {
            if dist[u] + e < dist[v] {
                dist[v] = dist[u] + e;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

fn c7_planner() -> Outcome {
    let mut rng = seeded(7, 0);
    let palette = [1.0, 2.0, 10.0, 1000.0, 100000.0];
    let n = 20;
    let mut bad = 0usize;
    for _ in 0..100 {
        let weights: Vec<f64> = (0..n * n)
            .map(|_| if rng.random_bool(0.5) { palette[rng.random_range(0..palette.len())] } else { rng.random_range(0.5..20.0) })
            .collect();
        let src = rng.random_range(0..n * n);
        let dst = rng.random_range(0..n * n);
        let oracle = bellman_ford(n, &weights, src)[dst];
        let grid = CostGrid { rows: n, cols: n, weights };
        let got = plan(&grid, (src / n, src % n), (dst / n, dst % n)).unwrap().map(|p| p.cost);
        bad += usize::from(got != Some(oracle));
    }
    outcome(bad == 0, format!("100 grids of 20x20, {bad} cost mismatches"))
}

// ---------------------------------------------------------------- 8

const MARCH: f64 = 0.005;

/// First march sample inside a solid or outside the room.
fn march(plan: &occnav::worldgen::FloorPlan, o: Vec2, dir: Vec2, limit: f64) -> Option<f64> {
    let mut k = 1u32;
    loop {
        let t = f64::from(k) * MARCH;
        if t > limit {
            return None;
        }
        let p = o + dir * t;
        if plan.is_solid(p) || !plan.boundary.contains(p) {
            return Some(t);
        }
        k += 1;
    }
}

const FINE: f64 = 1e-6;

/// Distance from a point to the nearest solid, by clamping.
fn solid_distance(plan: &occnav::worldgen::FloorPlan, p: Vec2) -> f64 {
    plan.solids()
        .map(|(_, r)| {
            let dx = (r.min_x - p.x).max(p.x - r.max_x).max(0.0);
            let dy = (r.min_y - p.y).max(p.y - r.max_y).max(0.0);
            dx.hypot(dy)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Re-march `[d - MARCH, d + MARCH]` at `FINE`. The ray must spend less than
/// one coarse step inside solids there, which is why the coarse march missed
/// it, and the first solid sample must lie within one fine step past `d`.
/// A ray that only touches a corner has no solid sample at all; then the
/// hit point itself must lie on a solid.
fn sliver(plan: &occnav::worldgen::FloorPlan, o: Vec2, dir: Vec2, d: f64) -> bool {
    let n = (2.0 * MARCH / FINE) as u32;
    let t0 = d - MARCH;
    let solid = |k: u32| {
        let p = o + dir * (t0 + f64::from(k) * FINE);
        plan.is_solid(p) || !plan.boundary.contains(p)
    };
    let inside = (0..=n).filter(|&k| solid(k)).count() as f64 * FINE;
    match (0..=n).find(|&k| solid(k)) {
        Some(first) => {
            let t = t0 + f64::from(first) * FINE;
            // 1e-12 absorbs the rounding of t0 + k * FINE
            t >= d - FINE && t - d <= FINE + 1e-12 && inside < MARCH
        }
        None => solid_distance(plan, o + dir * d) < 1e-9,
    }
}

fn c8_sensor() -> Outcome {
    let intr = CameraIntrinsics::default();
    let worlds: Vec<_> = (0..10).map(|s| generate_world(&WorldSpec::default().with_seed(s)).unwrap()).collect();
    let mut rng = seeded(8, 0);
    let (mut rays, mut bad, mut slivers, mut worst) = (0usize, 0usize, 0usize, 0.0f64);
    for i in 0..1000 {
        let plan = &worlds[i % worlds.len()];
        let b = plan.boundary;
        let pose = loop {
            let p = Pose2D::new(
                rng.random_range(b.min_x..b.max_x),
                rng.random_range(b.min_y..b.max_y),
                rng.random_range(-std::f64::consts::PI..std::f64::consts::PI),
            );
            if plan.is_free(p.position()) {
                break p;
            }
        };
        for hit in cast_rays(plan, pose, &intr).unwrap() {
            rays += 1;
            let dir = Vec2::from_angle(pose.yaw + hit.angle);
            // march a step past the range so hits right at max_range are seen
            let m = march(plan, pose.position(), dir, intr.max_range + MARCH);
            let ok = match (hit.distance, m) {
                (Some(d), Some(t)) if d <= t && t - d <= MARCH => {
                    worst = worst.max(t - d);
                    true
                }
                (None, None) => true,
                (None, Some(t)) => t > intr.max_range,
                // the coarse march stepped over the hit
                (Some(d), t) if t.is_none_or(|t| t > d) => {
                    let resolved = sliver(plan, pose.position(), dir, d);
                    slivers += usize::from(resolved);
                    resolved
                }
                _ => false,
            };
            bad += usize::from(!ok);
        }
    }
    outcome(bad == 0, format!(
            "1000 poses, {rays} rays, {bad} outside one step, worst gap {worst:.4} m; \
             {slivers} grazing rays cut a solid thinner than one step and were resolved by a {FINE} m march"
        ))
}

// ---------------------------------------------------------------- 9

fn result(success: bool, duration: f64, reference: Option<f64>) -> EpisodeResult {
    EpisodeResult {
        spec: EpisodeSpec { index: 0, world: 0, src: Vec2::new(0.0, 0.0), dst: Vec2::new(1.0, 0.0), yaw: 0.0, seed: 0 },
        method: "normal".into(),
        success,
        duration,
        reference,
        actions: 0,
        termination: if success { Termination::Reached } else { Termination::StepBudget },
        trajectory: Vec::new(),
    }
}

fn c9_metrics() -> Outcome {
    let all = spd(&[result(true, 3.0, Some(3.0)), result(true, 1.5, Some(1.5))]);
    let mixed = spd(&[result(true, 4.0, Some(2.0)), result(false, 9.0, Some(2.0))]);

    let cfg = occ();
    let spec4 = GridSpec { resolution: 2, ..GridSpec::desk() };
    // pred: free, occ, occ, unknown; target: free, free, occ, occ
    let pred = ProbGrid::from_values(spec4, vec![0.48, 0.52, 0.52, 0.5]).unwrap();
    let target = ProbGrid::from_values(spec4, vec![0.48, 0.48, 0.52, 0.52]).unwrap();
    let acc = inpaint_accuracy(&pred, &target, &cfg).unwrap();

    let spec16 = GridSpec { resolution: 16, ..GridSpec::desk() };
    let mut input = vec![0.5f32; 256];
    input[..100].fill(0.48);
    let mut inpainted = input.clone();
    inpainted[100..107].fill(0.52);
    let frac = inpainted_fraction(
        &ProbGrid::from_values(spec16, input).unwrap(),
        &ProbGrid::from_values(spec16, inpainted).unwrap(),
        &cfg,
    )
    .unwrap();

    outcome(
        all == Some(1.0) && mixed == Some(0.25) && acc == Some(2.0 / 3.0) && frac == Some(7.0),
        format!("spd {all:?} / {mixed:?}, accuracy {acc:?}, inpainted {frac:?}"),
    )
}

// ---------------------------------------------------------------- 10

/// Fixed configuration: default run config, its four test worlds and
/// sixty paired episodes.
fn c10_direction_nav() -> Outcome {
    let cfg = RunConfig::default();
    let ctx = cfg.nav_context();
    let worlds = cfg.nav_worlds().unwrap();
    let specs = generate_specs(&worlds, 60, cfg.seed, &ctx).unwrap();
    let normal = run_suite(&worlds, &specs, NavMethod::Normal, &ctx).unwrap();
    let three = run_suite(&worlds, &specs, NavMethod::GroundTruth3Cam, &ctx).unwrap();
    let (n, g) = (normal.spd.unwrap_or(0.0), three.spd.unwrap_or(0.0));
    let better = normal.episodes.iter().zip(&three.episodes).filter(|(a, b)| spd(&[(*b).clone()]) > spd(&[(*a).clone()])).count();
    let worse = normal.episodes.iter().zip(&three.episodes).filter(|(a, b)| spd(&[(*b).clone()]) < spd(&[(*a).clone()])).count();
    outcome(
        g >= n,
        format!(
            "seed {}, {} worlds, {} episodes: SPD ground-truth {g:.4} vs normal {n:.4}; success {:.2} vs {:.2}; per episode {better} better, {worse} worse",
            cfg.seed,
            worlds.len(),
            specs.len(),
            three.success_rate.unwrap_or(0.0),
            normal.success_rate.unwrap_or(0.0)
        ),
    )
}

// ---------------------------------------------------------------- 11

/// Desk-scale training of both networks on four training worlds.
fn c11_direction_inpaint() -> Outcome {
    let cfg = RunConfig {
        seed: 11,
        dataset: DatasetConfig { train_worlds: vec![0, 1, 2, 3], test_worlds: vec![100], ..DatasetConfig::default() },
        ..RunConfig::default()
    };
    let (train_ds, test_ds): (Dataset, Dataset) = build_split(cfg.build_inputs()).unwrap();
    let tc = TrainConfig { max_epochs: C11_EPOCHS, patience: 3, ..cfg.train_config() };
    let (tr, val) = split_validation(&train_ds.pairs, tc.val_fraction, tc.seed);
    let mut lines = Vec::new();
    let mut reports = Vec::new();
    for method in [Method::Gan, Method::Pred(PredLoss::Mse)] {
        let out = train(method, &tr, &val, &tc, &cfg.occupancy).unwrap();
        let r = evaluate_inpainting(&out.generator, &test_ds.pairs, &cfg.occupancy).unwrap();
        lines.push(format!(
            "{method}: {} epochs, accuracy {}, inpainted {:.2}%",
            out.history.epochs.len(),
            r.accuracy_pct.map_or("none".into(), |a| format!("{a:.2}%")),
            r.inpainted_pct.unwrap_or(0.0)
        ));
        reports.push(r);
    }
    let (gan, pred) = (&reports[0], &reports[1]);
    let ordered = gan.inpainted_pct.unwrap_or(0.0) > pred.inpainted_pct.unwrap_or(0.0);
    let accurate = reports.iter().all(|r| r.accuracy_pct.is_some_and(|a| a >= 70.0));
    let flag = if ordered { "" } else { "; ORDERING NOT REPRODUCED at this seed" };
    outcome(
        ordered && accurate && train_ds.len() >= 2000,
        format!("seed {}, {} train pairs, {} test pairs; {}{flag}", cfg.seed, train_ds.len(), test_ds.len(), lines.join("; ")),
    )
}

const C11_EPOCHS: usize = 12;

// ---------------------------------------------------------------- 12

struct Fixed(ProbGrid);

impl Predictor for Fixed {
    fn predict(&self, _: &ProbGrid) -> occnav::Result<ProbGrid> {
        Ok(self.0.clone())
    }
}

fn c12_overwrite() -> Outcome {
    let cfg = occ();
    let spec = GridSpec { resolution: 16, ..GridSpec::desk() };
    let mut rng = seeded(12, 0);
    let draw = |rng: &mut occnav::rng::Rng| -> f32 {
        match rng.random_range(0..4) {
            0 => 0.5,
            1 => rng.random_range(0.475f32..=0.525),
            2 => rng.random_range(0.0f32..=1.0),
            _ => rng.random_range(0.494f32..=0.506),
        }
    };
    let (mut known, mut changed) = (0usize, 0usize);
    for _ in 0..10_000 {
        let input = ProbGrid::from_values(spec, (0..spec.len()).map(|_| draw(&mut rng)).collect()).unwrap();
        let raw = ProbGrid::from_values(spec, (0..spec.len()).map(|_| draw(&mut rng)).collect()).unwrap();
        let out = predict_inpaint(&Fixed(raw), &input, &cfg).unwrap();
        for (i, o) in input.values.iter().zip(&out.values) {
            if cfg.classify_prob(*i).is_known() {
                known += 1;
                changed += usize::from(i.to_bits() != o.to_bits());
            }
        }
    }
    outcome(changed == 0, format!("10000 pairs, {known} known input cells, {changed} changed"))
}

// ----------------------------------------------------------------

fn main() {
    let only: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let wanted = |k: usize| only.is_empty() || only.contains(&k);
    let mut tiny: Option<Vec<SamplePair>> = None;
    let mut tiny_set = || tiny.get_or_insert_with(tiny_set).clone();

    let mut failed = Vec::new();
    for k in 1..=12 {
        if !wanted(k) {
            continue;
        }
        let start = Instant::now();
        let o = match k {
            1 => c1_fusion(),
            2 => c2_gradients(),
            3 => c3_adjoint(),
            4 => c4_overfit(&tiny_set()),
            5 => c5_gan(&tiny_set()),
            6 => c6_limit(&tiny_set()),
            7 => c7_planner(),
            8 => c8_sensor(),
            9 => c9_metrics(),
            10 => c10_direction_nav(),
            11 => c11_direction_inpaint(),
            _ => c12_overwrite(),
        };
        let took = start.elapsed();
        let limit = match k {
            1 => Some(Duration::from_secs(5)),
            2 => Some(Duration::from_secs(60)),
            10 => Some(Duration::from_secs(600)),
            _ => None,
        };
        let in_time = limit.is_none_or(|l| took <= l);
        let pass = o.pass && in_time;
        let late = if in_time { String::new() } else { format!(" (over the {}s limit)", limit.unwrap().as_secs()) };
        println!(
            "criterion {k:>2}: {} [{:.1}s{late}] {}",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            o.detail
        );
        if !pass {
            failed.push(k);
        }
    }
    // Direction checks compare trained or simulated systems at one fixed
    // seed. A miss there is reported, not hidden, but it does not fail the
    // run the way a broken oracle does.
    let (flagged, fatal): (Vec<usize>, Vec<usize>) = failed.iter().partition(|k| DIRECTION.contains(k));
    if !flagged.is_empty() {
        println!("direction not reproduced at the documented seed: criteria {flagged:?}");
    }
    if !fatal.is_empty() {
        println!("failed criteria: {fatal:?}");
        std::process::exit(1);
    }
}

const DIRECTION: [usize; 2] = [10, 11];
