//! Quick invariant suite, small enough to run from the command line.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::attack::{frame_delta_bound, max_hit_gain, monte_carlo_confirm_time, t_min, MonteCarloOptions, ThreatConfig};
use crate::error::Result;
use crate::harness::{build_case, run_case, CaseId, PriorRegime, DEFAULT_FRAMES};
use crate::ids::AgentId;
use crate::mtt::{ScoreEventKind, Tracker, TrackerConfig};
use crate::scene::generate_detections;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &str, result: Result<(bool, String)>) -> Check {
    match result {
        Ok((passed, detail)) => Check { name: name.into(), passed, detail },
        Err(e) => Check { name: name.into(), passed: false, detail: format!("error: {e}") },
    }
}

fn t_min_reference() -> Result<(bool, String)> {
    let a = t_min(&ThreatConfig::new(1, 1))?;
    let b = t_min(&ThreatConfig::new(1, 3))?;
    Ok(((3.0..=3.5).contains(&a) && (5.8..=6.2).contains(&b), format!("t_min(1,1)={a:.4} t_min(1,3)={b:.4}")))
}

fn bound_validity(seed: u64, trials: u64) -> Result<(bool, String)> {
    let mut worst = f64::INFINITY;
    for noisy in [false, true] {
        let opts = MonteCarloOptions { noisy_placement: noisy, ..Default::default() };
        for k_a in 1..=2 {
            for k_b in 0..=4 {
                let cfg = ThreatConfig::new(k_a, k_b);
                let bound = t_min(&cfg)?.floor();
                let res = monte_carlo_confirm_time(&cfg, trials, seed, &opts)?;
                if let Some(min) = res.min_frames {
                    worst = worst.min(min as f64 - bound);
                }
            }
        }
    }
    Ok((worst >= 0.0, format!("smallest margin over floor(t_min): {worst} frames")))
}

/// Every hit increment stays under the single-detection bound and every
/// frame's change under the (hits, misses) bound; running scores match a
/// replay of their event history.
fn score_bounds(seed: u64) -> Result<(bool, String)> {
    let built = build_case(CaseId::Case1, PriorRegime::Uninformative, seed)?;
    let scenario = &built.scenario;
    let mut tracker = Tracker::new(TrackerConfig::default())?;
    let params = *tracker.params();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut max_hit, mut frame_violations, mut max_replay_err) = (f64::NEG_INFINITY, 0usize, 0.0f64);
    let hit_bound = max_hit_gain(&params, 5.0);
    for frame in 0..500 {
        let dets = generate_detections(scenario, frame, &mut rng);
        let report = tracker.step(&scenario.agents, &dets, scenario.dt())?;
        for t in tracker.tracks() {
            let events: Vec<_> = t.history.iter().filter(|e| e.frame == report.frame).collect();
            let hits = events.iter().filter(|e| matches!(e.kind, ScoreEventKind::Hit { .. })).count() as u32;
            let misses = events.len() as u32 - hits;
            let delta: f64 = events.iter().map(|e| e.delta).sum();
            if delta > frame_delta_bound(hits, misses, &params, 5.0) + 1e-9 {
                frame_violations += 1;
            }
            for e in events.iter().filter(|e| matches!(e.kind, ScoreEventKind::Hit { .. })) {
                max_hit = max_hit.max(e.delta);
            }
            max_replay_err = max_replay_err.max((t.reconstructed_score(&params)? - t.score).abs());
        }
    }
    Ok((
        max_hit <= hit_bound + 1e-9 && frame_violations == 0 && max_replay_err <= 1e-9,
        format!("max hit {max_hit:.6} vs bound {hit_bound:.6}, frame violations {frame_violations}, replay error {max_replay_err:.1e}"),
    ))
}

fn case_geometry() -> Result<(bool, String)> {
    for case in [CaseId::Case1, CaseId::Case2] {
        build_case(case, PriorRegime::Uninformative, 0)?;
    }
    Ok((true, "both cases satisfy their visibility matrices".into()))
}

fn determinism(seed: u64) -> Result<(bool, String)> {
    let a = run_case(CaseId::Case1, PriorRegime::StrongAgent1, seed, 20)?;
    let b = run_case(CaseId::Case1, PriorRegime::StrongAgent1, seed, 20)?;
    Ok((a == b, format!("{} track records", a.tracks.len())))
}

fn trust_sanity(seed: u64) -> Result<(bool, String)> {
    let mut ok = true;
    let mut notes = Vec::new();
    for case in [CaseId::Case1, CaseId::Case2] {
        let t = run_case(case, PriorRegime::Uninformative, seed, DEFAULT_FRAMES)?;
        let in_range = t.tracks.iter().map(|r| r.trust_mean).chain(t.agents.iter().map(|r| r.trust_mean)).all(|m| m > 0.0 && m < 1.0);
        let lone = if case == CaseId::Case1 { 1 } else { 3 };
        let kept = t.final_tracks_with_label(lone).iter().all(|r| r.trust_mean == 0.5);
        ok &= in_range && kept;
        notes.push(format!("{case}: means in (0,1) {in_range}, lone track kept prior {kept}"));
    }
    Ok((ok, notes.join("; ")))
}

fn prior_monotonicity(seed: u64) -> Result<(bool, String)> {
    let weak = run_case(CaseId::Case1, PriorRegime::Uninformative, seed, DEFAULT_FRAMES)?;
    let strong = run_case(CaseId::Case1, PriorRegime::StrongAgent1, seed, DEFAULT_FRAMES)?;
    let w = weak.final_agent_trust(AgentId(1)).map_or(f64::NAN, |d| d.mean());
    let s = strong.final_agent_trust(AgentId(1)).map_or(f64::NAN, |d| d.mean());
    Ok((s >= w, format!("agent 1: {s:.4} (strong prior) vs {w:.4} (uninformative)")))
}

/// Runs every check; none of them panics.
pub fn invariant_suite(seed: u64) -> Vec<Check> {
    vec![
        check("t_min reference points", t_min_reference()),
        check("confirmation never precedes floor(t_min)", bound_validity(seed, 50)),
        check("score increments within bounds", score_bounds(seed)),
        check("case geometry", case_geometry()),
        check("seeded determinism", determinism(seed)),
        check("trust sanity", trust_sanity(seed)),
        check("strong prior lifts agent 1", prior_monotonicity(seed)),
    ]
}
