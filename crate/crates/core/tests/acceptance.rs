//! Acceptance suite. One line per criterion; exits non-zero if any fails.
//!
//! Every closed-form expectation here is recomputed from raw constants rather
//! than through the library, so a wrong formula cannot agree with itself.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tracktrust::attack::{monte_carlo_confirm_time, t_min, MonteCarloOptions, ThreatConfig};
use tracktrust::harness::{run_case, CaseId, PriorRegime, RunTrace, DEFAULT_FRAMES};
use tracktrust::mtt::{associate, gate, score_update_hit, Mat4, ScoreEventKind, Vec4};
use tracktrust::scene::{
    generate_detections, AgentCharacteristics, ClutterModel, Mat2, ObjectState, Scenario, TruthTag, Vec2,
};
use tracktrust::trust::beta_update;
use tracktrust::{AgentId, Detection, PsmDatapoint, ScoringParams, TrackId, TrackState, Tracker, TrackerConfig, TrustDistribution};

const SEED: u64 = 20_240_501;

// Reference parameters, spelled out independently of ScoringParams::default().
const P_D: f64 = 0.9;
const BETA_FP: f64 = 1e-6;
const BETA_NT: f64 = 1e-9;
const DET_R: f64 = 5.0;
const ALPHA: f64 = 1e-6;
const BETA: f64 = 1e-2;

fn oracle_l0() -> f64 {
    (P_D * BETA_NT / BETA_FP).ln()
}

fn oracle_t2() -> f64 {
    ((1.0 - BETA) / ALPHA).ln()
}

fn oracle_gain() -> f64 {
    (P_D / (2.0 * PI * BETA_FP * DET_R.sqrt())).ln()
}

fn oracle_t_min(ka: f64, kb: f64) -> f64 {
    1.0 + (oracle_t2() - oracle_l0()) / (ka * oracle_gain() + kb * (1.0 - P_D).ln())
}

type Outcome = Result<(bool, String), String>;

fn r5() -> Mat2 {
    Mat2::identity() * DET_R.sqrt()
}

fn c1_t_min() -> Outcome {
    let t11 = t_min(&ThreatConfig::new(1, 1)).map_err(|e| e.to_string())?;
    let t13 = t_min(&ThreatConfig::new(1, 3)).map_err(|e| e.to_string())?;
    let agrees = (t11 - oracle_t_min(1.0, 1.0)).abs() < 1e-12 && (t13 - oracle_t_min(1.0, 3.0)).abs() < 1e-12;
    let start = Instant::now();
    let n = 10_000;
    for i in 0..n {
        std::hint::black_box(t_min(&ThreatConfig::new(1 + i % 2, 3)).ok());
    }
    let per_call = start.elapsed() / n;
    let ok = (3.0..=3.5).contains(&t11) && (5.8..=6.2).contains(&t13) && agrees && per_call < Duration::from_millis(1);
    Ok((ok, format!("t_min(1,1)={t11:.4} in [3.0,3.5], t_min(1,3)={t13:.4} in [5.8,6.2], oracle agrees={agrees}, {per_call:?}/call")))
}

fn c2_bound_validity() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    let mut cells = Vec::new();
    for ka in 1..=2u32 {
        for kb in 0..=4u32 {
            let cfg = ThreatConfig::new(ka, kb);
            let t = oracle_t_min(f64::from(ka), f64::from(kb));
            let res = monte_carlo_confirm_time(&cfg, 1000, SEED, &MonteCarloOptions::default()).map_err(|e| e.to_string())?;
            let all_confirmed = res.unconfirmed() == 0;
            let min = res.min_frames.unwrap_or(0) as f64;
            let mean = res.mean_frames.unwrap_or(f64::NAN);
            let valid = all_confirmed && min >= t.floor();
            let in_window = mean >= t && mean <= t + 3.0;
            if !(valid && in_window) {
                ok = false;
                cells.push(format!("({ka},{kb}) t_min={t:.3} min={min} mean={mean:.3} valid={valid} window={in_window}"));
            }
        }
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(60);
    let detail = if cells.is_empty() { "all 10 cells within bound and window".to_string() } else { cells.join("; ") };
    Ok((ok, format!("{detail}; {:.2}s", elapsed.as_secs_f64())))
}

fn c3_tightness() -> Outcome {
    let bound = oracle_gain();
    let scenario = benign_scenario(SEED, 10_000);
    let mut tracker = Tracker::new(TrackerConfig::default()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut max_hit = f64::NEG_INFINITY;
    let mut max_frame_excess = f64::NEG_INFINITY;
    for frame in 0..scenario.n_frames {
        let dets = generate_detections(&scenario, frame, &mut rng);
        let report = tracker.step(&scenario.agents, &dets, scenario.dt()).map_err(|e| e.to_string())?;
        for t in tracker.tracks() {
            let (mut hits, mut misses, mut delta) = (0.0, 0.0, 0.0);
            for e in t.history.iter().rev().take_while(|e| e.frame == report.frame) {
                delta += e.delta;
                match e.kind {
                    ScoreEventKind::Hit { .. } => {
                        hits += 1.0;
                        max_hit = max_hit.max(e.delta);
                    }
                    ScoreEventKind::Miss => misses += 1.0,
                }
            }
            if hits + misses > 0.0 {
                max_frame_excess = max_frame_excess.max(delta - (hits * bound + misses * (1.0 - P_D).ln()));
            }
        }
    }
    // The new-track limit: zero prior covariance makes S = R; a detection on
    // the predicted position gives d² = 0.
    let track = TrackState::new(TrackId(0), Vec4::new(3.0, -2.0, 0.0, 0.0), Mat4::zeros(), 0.0, 0);
    let det = Detection { agent_id: AgentId(0), value: Vec2::new(3.0, -2.0), noise_cov: r5(), frame: 0, truth: TruthTag::NaturalFp };
    let params = ScoringParams::default();
    let g = gate(&track, &det, &params).map_err(|e| e.to_string())?;
    let attained = score_update_hit(0.0, g.mahalanobis_sq, &g.innov_cov, &params).map_err(|e| e.to_string())?;
    let ok = max_hit <= bound + 1e-9 && max_hit < bound && max_frame_excess <= 1e-9 && (attained - bound).abs() < 1e-6;
    Ok((
        ok,
        format!(
            "simulated max hit {max_hit:.6} <= {bound:.6}, worst frame excess {max_frame_excess:.2e}, optimum {attained:.9} vs {bound:.9}"
        ),
    ))
}

fn c4_clutter_gate() -> Outcome {
    let frames = 100_000u64;
    let agent = AgentCharacteristics::benign(0, Vec2::zeros(), 40.0, P_D, r5());
    let scenario = Scenario {
        agents: vec![agent],
        objects: Vec::new(),
        frame_rate: 10.0,
        n_frames: frames,
        rng_seed: SEED,
        clutter: Some(ClutterModel { beta_fp: BETA_FP }),
    };
    // Isotropic S = s·I whose 99% gate is a disk of area 1000 m², so
    // V_G·β_FP = 1e-3.
    let params = ScoringParams::default();
    let v_g = 1e-3 / BETA_FP;
    let s = v_g / (PI * params.gate_chi2);
    let disk_area = PI * (params.gate_chi2 * s).sqrt().powi(2);
    let mut cov = Mat4::identity() * 1e-3;
    cov[(0, 0)] = s - DET_R.sqrt();
    cov[(1, 1)] = s - DET_R.sqrt();
    let track = TrackState::new(TrackId(0), Vec4::zeros(), cov, 0.0, 0);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut hits = 0u64;
    for frame in 0..frames {
        let dets = generate_detections(&scenario, frame, &mut rng);
        let mut any = false;
        for d in &dets {
            any |= gate(&track, d, &params).map_err(|e| e.to_string())?.passes;
        }
        hits += u64::from(any);
    }
    let p = 1.0 - (-v_g * BETA_FP).exp();
    let sigma = (p * (1.0 - p) / frames as f64).sqrt();
    let p_hat = hits as f64 / frames as f64;
    let ok = (p_hat - p).abs() <= 3.0 * sigma && (disk_area - v_g).abs() < 1e-6;
    Ok((ok, format!("gate frequency {p_hat:.5} vs {p:.5} ± 3σ ({:.5}) over {frames} frames", 3.0 * sigma)))
}

fn label_means(trace: &RunTrace, label: u32) -> Vec<f64> {
    trace.final_tracks_with_label(label).iter().map(|r| r.trust_mean).collect()
}

fn agent_mean(trace: &RunTrace, id: u32) -> f64 {
    trace.final_agent_trust(AgentId(id)).map_or(f64::NAN, |d| d.mean())
}

fn all_of(values: &[f64], pred: impl Fn(f64) -> bool) -> bool {
    !values.is_empty() && values.iter().all(|&v| pred(v))
}

fn fmt_means(values: &[f64]) -> String {
    let parts: Vec<String> = values.iter().map(|v| format!("{v:.3}")).collect();
    if parts.is_empty() { "none".into() } else { parts.join("/") }
}

fn c5_case1_uninformative() -> Outcome {
    let t = run_case(CaseId::Case1, PriorRegime::Uninformative, SEED, DEFAULT_FRAMES).map_err(|e| e.to_string())?;
    let trusted: Vec<Vec<f64>> = [0, 3, 4].iter().map(|&l| label_means(&t, l)).collect();
    let t5 = label_means(&t, 5);
    let t1 = label_means(&t, 1);
    let (a0, a1) = (agent_mean(&t, 0), agent_mean(&t, 1));
    let ok = trusted.iter().all(|v| all_of(v, |m| m > 0.8))
        && all_of(&t5, |m| m < 0.3)
        && all_of(&t1, |m| m == 0.5)
        && (a0 - a1).abs() < 0.15;
    Ok((
        ok,
        format!(
            "T0={} T3={} T4={} (>0.8), T5={} (<0.3), T1={} (=0.5), |A0-A1|={:.3} (<0.15)",
            fmt_means(&trusted[0]),
            fmt_means(&trusted[1]),
            fmt_means(&trusted[2]),
            fmt_means(&t5),
            fmt_means(&t1),
            (a0 - a1).abs()
        ),
    ))
}

fn c6_case1_strong() -> Outcome {
    let t = run_case(CaseId::Case1, PriorRegime::StrongAgent1, SEED, DEFAULT_FRAMES).map_err(|e| e.to_string())?;
    let (a0, a1) = (agent_mean(&t, 0), agent_mean(&t, 1));
    let t2 = label_means(&t, 2);
    let ok = a0 < 0.4 && a1 > 0.7 && all_of(&t2, |m| m < 0.3);
    Ok((ok, format!("A0={a0:.3} (<0.4), A1={a1:.3} (>0.7), T2={} (<0.3)", fmt_means(&t2))))
}

fn c7_case2() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for prior in [PriorRegime::Uninformative, PriorRegime::StrongAgent1] {
        let t = run_case(CaseId::Case2, prior, SEED, DEFAULT_FRAMES).map_err(|e| e.to_string())?;
        let (t4, t5, t3) = (label_means(&t, 4), label_means(&t, 5), label_means(&t, 3));
        let (a0, a1, a2) = (agent_mean(&t, 0), agent_mean(&t, 1), agent_mean(&t, 2));
        ok &= all_of(&t4, |m| m < 0.3) && all_of(&t5, |m| m < 0.3) && a2 < 0.4 && a0 > 0.6 && a1 > 0.6 && all_of(&t3, |m| m == 0.5);
        parts.push(format!(
            "{prior}: T4={} T5={} A2={a2:.3} A0={a0:.3} A1={a1:.3} T3={}",
            fmt_means(&t4),
            fmt_means(&t5),
            fmt_means(&t3)
        ));
    }
    Ok((ok, parts.join("; ")))
}

fn c8_conjugate() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    let mut between = true;
    for _ in 0..1000 {
        let prior = TrustDistribution::new(rng.random_range(0.01..0.99), rng.random_range(0.1..50.0)).map_err(|e| e.to_string())?;
        let n = rng.random_range(1..12);
        let batch: Vec<PsmDatapoint> = (0..n)
            .map(|i| PsmDatapoint {
                value: rng.random_range(0.0..=1.0),
                confidence: rng.random_range(0.01..=1.0),
                track_id: TrackId(i),
                agent_id: AgentId(0),
            })
            .collect();
        let (mut a, mut b) = (prior.mean() * prior.precision(), (1.0 - prior.mean()) * prior.precision());
        for p in &batch {
            a += p.confidence * p.value;
            b += p.confidence * (1.0 - p.value);
        }
        let post = beta_update(&prior, &batch);
        worst = worst.max((post.mean() - a / (a + b)).abs()).max(((post.precision() - (a + b)) / (a + b)).abs());
        let sc: f64 = batch.iter().map(|p| p.confidence).sum();
        let empirical = batch.iter().map(|p| p.confidence * p.value).sum::<f64>() / sc;
        let (lo, hi) = if prior.mean() <= empirical { (prior.mean(), empirical) } else { (empirical, prior.mean()) };
        between &= post.mean() >= lo - 1e-12 && post.mean() <= hi + 1e-12;
    }
    Ok((worst <= 1e-12 && between, format!("max deviation from fold {worst:.1e}, posterior between prior and data: {between}")))
}

/// Best (pairs, total cost) over every partial injection of rows into columns.
fn exhaustive(gated: &[Vec<Option<f64>>], m: usize) -> (usize, f64) {
    fn go(i: usize, g: &[Vec<Option<f64>>], used: &mut [bool], n: usize, c: f64, best: &mut (usize, f64)) {
        if i == g.len() {
            if n > best.0 || (n == best.0 && c < best.1) {
                *best = (n, c);
            }
            return;
        }
        go(i + 1, g, used, n, c, best);
        for j in 0..used.len() {
            if let (false, Some(x)) = (used[j], g[i][j]) {
                used[j] = true;
                go(i + 1, g, used, n + 1, c + x, best);
                used[j] = false;
            }
        }
    }
    let mut best = (0, 0.0);
    go(0, gated, &mut vec![false; m], 0, 0.0, &mut best);
    best
}

fn c9_association() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut mismatches = 0;
    for _ in 0..1000 {
        let n = rng.random_range(0..=6);
        let m = rng.random_range(0..=6);
        let gated: Vec<Vec<Option<f64>>> = (0..n)
            .map(|_| (0..m).map(|_| (rng.random::<f64>() < 0.75).then(|| rng.random_range(0.0..9.21))).collect())
            .collect();
        let a = associate(&gated, m);
        let cost: f64 = a.pairs.iter().map(|&(i, j)| gated[i][j].unwrap_or(f64::INFINITY)).sum();
        let (bn, bc) = exhaustive(&gated, m);
        if a.pairs.len() != bn || (cost - bc).abs() > 1e-9 {
            mismatches += 1;
        }
    }
    Ok((mismatches == 0, format!("{mismatches} of 1000 instances differ from the exhaustive optimum")))
}

fn benign_scenario(seed: u64, n_frames: u64) -> Scenario {
    let r = r5();
    let obj = |id, x, y, vx, vy| ObjectState { id, position: Vec2::new(x, y), velocity: Vec2::new(vx, vy) };
    Scenario {
        agents: vec![
            AgentCharacteristics::benign(0, Vec2::new(-20.0, 0.0), 40.0, P_D, r),
            AgentCharacteristics::benign(1, Vec2::new(20.0, 0.0), 40.0, P_D, r),
            AgentCharacteristics::benign(2, Vec2::new(0.0, 30.0), 40.0, P_D, r),
        ],
        objects: vec![
            obj(0, -25.0, -5.0, 0.5, 0.2),
            obj(1, 0.0, 10.0, -0.3, 0.4),
            obj(2, 22.0, -8.0, 0.0, 0.6),
            obj(3, 5.0, 40.0, 0.4, -0.3),
        ],
        frame_rate: 10.0,
        n_frames,
        rng_seed: seed,
        clutter: None,
    }
}

fn c10_tracker_sanity() -> Outcome {
    let scenario = benign_scenario(SEED, 60);
    let tr_r = r5().trace();
    let mut tracker = Tracker::new(TrackerConfig::default()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut confirmed_by = [None::<u64>; 4];
    let mut false_confirmed = 0usize;
    let (mut sq, mut count) = (0.0, 0usize);
    for frame in 0..scenario.n_frames {
        let dets = generate_detections(&scenario, frame, &mut rng);
        tracker.step(&scenario.agents, &dets, scenario.dt()).map_err(|e| e.to_string())?;
        let truth = scenario.objects_at(frame);
        let mut claimed = [false; 4];
        for t in tracker.tracks().iter().filter(|t| t.is_confirmed()) {
            let nearest = truth
                .iter()
                .map(|o| (o.id as usize, (o.position - t.position()).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .filter(|&(_, d)| d <= 5.0);
            match nearest {
                Some((id, d)) if !claimed[id] => {
                    claimed[id] = true;
                    confirmed_by[id].get_or_insert(frame + 1);
                    if frame >= 20 {
                        sq += d * d;
                        count += 1;
                    }
                }
                _ => false_confirmed += 1,
            }
        }
    }
    let rmse = (sq / count.max(1) as f64).sqrt();
    let limit = 2.0 * tr_r.sqrt();
    let timely = confirmed_by.iter().all(|f| f.is_some_and(|f| f <= 10));
    let ok = timely && false_confirmed == 0 && count > 0 && rmse < limit;
    Ok((ok, format!("confirmed at frames {confirmed_by:?} (<=10), false confirmed {false_confirmed}, RMSE {rmse:.3} m < {limit:.3} m")))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 10] = [
        ("minimum frames to confirm (closed form)", c1_t_min),
        ("empirical confirmation vs minimum frames", c2_bound_validity),
        ("hit and frame score bounds are tight", c3_tightness),
        ("clutter gate probability calibration", c4_clutter_gate),
        ("case 1, uninformative priors", c5_case1_uninformative),
        ("case 1, strong agent-1 prior", c6_case1_strong),
        ("case 2, both prior regimes", c7_case2),
        ("conjugate trust update", c8_conjugate),
        ("GNN association optimality", c9_association),
        ("benign tracker sanity", c10_tracker_sanity),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (ok, detail) = f().unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += usize::from(!ok);
        println!("[{}] {:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("acceptance: {} passed, {failed} failed in {:.1}s", criteria.len() - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
