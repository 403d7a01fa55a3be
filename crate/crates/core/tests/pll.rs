use std::collections::BTreeSet;

use stochastic_ce::constants::{ConstantsLedger, Preset};
use stochastic_ce::game::{generate_fast_mixing_game, generate_random_game, mixing_probability, GameDims};
use stochastic_ce::pll::*;
use stochastic_ce::seeds::SeedTree;
use stochastic_ce::verify::efce_epsilon;

fn small(dims: GameDims, lock: u64, factor: u64) -> PllConfig {
    PllConfig {
        epsilon: 0.1,
        delta: 0.1,
        runs: 1,
        block: lock,
        lock_threshold: lock,
        epoch_length: factor * dims.states as u64 * lock,
        preset: Preset::Desk,
    }
}

#[test]
fn epoch_bound_closed_form() {
    assert_eq!(epoch_bound(GameDims::new(2, 2, 2, 3)), 28);
    assert_eq!(epoch_bound(GameDims::new(1, 2, 1, 4)), 17);
    assert_eq!(epoch_bound(GameDims::new(3, 2, 3, 1)), 5);
}

#[test]
fn epochs_stay_within_bounds() {
    for seed in 0..30 {
        let (s, h) = (1 + seed as usize % 3, 1 + (seed as usize / 3) % 3);
        let spec = generate_random_game(2, 2, s, h, seed).unwrap();
        let dims = spec.dims();
        // a short epoch makes locks rare per epoch, so more epochs are used
        let factor = if seed % 2 == 0 { 1 } else { 4 };
        let r = pll_run(&spec, &small(dims, 20, factor), &SeedTree::new(seed)).unwrap();
        assert!(r.epochs_used >= h as u64, "seed {seed}: {} epochs", r.epochs_used);
        assert!(r.epochs_used <= epoch_bound(dims));
        assert_eq!(r.trajectories, r.epochs_used * small(dims, 20, factor).epoch_length);
    }
}

#[test]
fn event_log_replays_to_final_locks() {
    for seed in 0..12 {
        let spec = generate_random_game(2, 2, 2, 3, 40 + seed).unwrap();
        let dims = spec.dims();
        let r = pll_run(&spec, &small(dims, 15, 2), &SeedTree::new(seed)).unwrap();
        let mut locked = vec![false; dims.pairs()];
        let mut last_epoch = 0;
        for e in &r.events {
            assert!(e.epoch >= last_epoch);
            last_epoch = e.epoch;
            match e.event {
                EventKind::Lock => {
                    let h = e.step.unwrap();
                    for &x in &e.states {
                        assert!(!locked[dims.pair(x, h)], "relocking a locked pair");
                        locked[dims.pair(x, h)] = true;
                    }
                    // only steps before the lock step reset in this epoch
                    let resets: BTreeSet<usize> = r
                        .events
                        .iter()
                        .filter(|o| o.epoch == e.epoch && o.event == EventKind::Reset)
                        .map(|o| o.step.unwrap())
                        .collect();
                    assert_eq!(resets, (0..h).collect());
                }
                EventKind::Reset => {
                    for &x in &e.states {
                        locked[dims.pair(x, e.step.unwrap())] = false;
                    }
                }
                EventKind::Terminate => assert_eq!(e.epoch, r.epochs_used),
            }
        }
        assert_eq!(locked, r.locked);
        assert_eq!(r.events.last().unwrap().event, EventKind::Terminate);
        for h in 0..dims.horizon {
            assert!((0..dims.states).any(|x| r.locked[dims.pair(x, h)]), "no locked pair at step {h}");
        }
        for (k, hist) in r.histories.iter().enumerate() {
            if r.locked[k] {
                assert!(hist.len() as u64 >= r.windows[k]);
                assert_eq!(r.distribution.profiles(k % dims.states, k / dims.states), &hist[..]);
            } else {
                assert_eq!(r.distribution.profiles(k % dims.states, k / dims.states).len(), dims.profiles());
            }
        }
        let jsonl = r.events_jsonl();
        assert_eq!(jsonl.lines().count(), r.events.len());
    }
}

#[test]
fn values_locked_in_range() {
    let spec = generate_random_game(3, 2, 2, 2, 5).unwrap();
    let r = pll_run(&spec, &small(spec.dims(), 30, 2), &SeedTree::new(5)).unwrap();
    assert!(r.values.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
}

#[test]
fn one_step_game_reaches_desk_accuracy() {
    let spec = generate_random_game(2, 2, 3, 1, 3).unwrap();
    let dims = spec.dims();
    let cfg = PllConfig::resolve(&ConstantsLedger::desk(), dims, 0.1, 0.1).unwrap();
    let r = pll_run(&spec, &cfg, &SeedTree::new(3)).unwrap();
    assert_eq!(r.epochs_used, 2);
    assert!(r.locked.iter().all(|&l| l));
    let eps = efce_epsilon(&spec, &r.distribution).unwrap();
    assert!(eps <= 0.1, "efce {eps}");
}

#[test]
fn reproducible_from_seed() {
    let spec = generate_random_game(2, 2, 2, 2, 9).unwrap();
    let cfg = small(spec.dims(), 25, 2);
    let a = pll_run(&spec, &cfg, &SeedTree::new(1)).unwrap();
    let b = pll_run(&spec, &cfg, &SeedTree::new(1)).unwrap();
    assert_eq!(a.distribution, b.distribution);
    assert_eq!(a.events, b.events);
    assert_eq!(a.values, b.values);
}

#[test]
fn fast_variant_uses_one_epoch_per_step_and_meets_the_visit_floor() {
    let ledger = ConstantsLedger::desk();
    for seed in 0..10 {
        let spec = generate_fast_mixing_game(2, 2, 2, 3, 0.2, seed).unwrap();
        let dims = spec.dims();
        let cfg = FastPllConfig::resolve(&ledger, dims, 0.1, 0.1, 0.2).unwrap();
        let r = fast_pll_run(&spec, &cfg, &SeedTree::new(seed)).unwrap();
        assert_eq!(r.epochs_used, dims.horizon as u64);
        assert_eq!(r.trajectories, dims.horizon as u64 * cfg.epoch_length);
        let floor = cfg.visit_floor();
        for (k, &v) in r.windows.iter().enumerate() {
            assert!(v >= floor, "seed {seed} pair {k}: {v} visits < {floor}");
        }
        let steps: Vec<_> = r.events.iter().filter(|e| e.event == EventKind::Lock).map(|e| e.step.unwrap()).collect();
        assert_eq!(steps, (0..dims.horizon).rev().collect::<Vec<_>>());
    }
}

#[test]
fn fast_variant_rejects_a_slow_game() {
    let spec = generate_random_game(2, 2, 3, 2, 1).unwrap();
    let gamma = mixing_probability(&spec);
    let cfg = FastPllConfig::resolve(&ConstantsLedger::desk(), spec.dims(), 0.1, 0.1, (gamma + 0.1).min(1.0)).unwrap();
    assert!(fast_pll_run(&spec, &cfg, &SeedTree::new(0)).is_err());
}

fn total_variation(counts: &[u64], target: &[f64]) -> f64 {
    let n: u64 = counts.iter().sum();
    counts.iter().zip(target).map(|(&c, &p)| (c as f64 / n as f64 - p).abs()).sum::<f64>() / 2.0
}

#[test]
fn shared_indices_agree_and_play_matches_the_sequences() {
    let spec = generate_fast_mixing_game(2, 2, 2, 2, 0.3, 4).unwrap();
    let dims = spec.dims();
    let ledger = ConstantsLedger::desk();
    for variant in [SharedVariant::Fast, SharedVariant::Pll] {
        let r = pll_sr_run(&spec, 600_000, variant, &ledger, 0.1, Some(0.3), &SeedTree::new(8)).unwrap();
        assert!(r.draws.windows(2).all(|w| w[0] == w[1]));
        assert_eq!(r.rewards[0].len() as u64, r.phase_two_trajectories);
        assert_eq!(r.phase_two_trajectories + r.phase_one.trajectories, 600_000);
        let lens: BTreeSet<usize> = r.sequences.iter().map(Vec::len).filter(|&l| l > 0).collect();
        assert!(lens.len() <= 1, "sequences must share one length: {lens:?}");
        let d = r.shared_distribution().unwrap();
        let mut checked = 0;
        for h in 0..dims.horizon {
            for x in 0..dims.states {
                let counts = &r.play_counts[dims.pair(x, h)];
                if counts.iter().sum::<u64>() >= 100_000 {
                    let tv = total_variation(counts, &d.probabilities(x, h));
                    assert!(tv <= 0.02, "{variant:?} pair ({x},{h}): tv {tv}");
                    checked += 1;
                }
            }
        }
        assert!(checked > 0);
    }
}

#[test]
fn shared_run_needs_trajectories_beyond_learning() {
    let spec = generate_random_game(2, 2, 2, 2, 2).unwrap();
    let r = pll_sr_run(&spec, 10, SharedVariant::Pll, &ConstantsLedger::desk(), 0.1, None, &SeedTree::new(0));
    assert!(r.is_err());
    let r = pll_sr_run(&spec, 10_000_000, SharedVariant::Fast, &ConstantsLedger::desk(), 0.1, None, &SeedTree::new(0));
    assert!(r.is_err());
}
