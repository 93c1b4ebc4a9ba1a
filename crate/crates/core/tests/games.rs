use treemine::adversary::{
    exhaustive_worst, AdversaryStrategy, Greedy, LowerBound, RandomAdversary, RandomParams, Replay,
};
use treemine::game::{cost_at_depth, run_game, AdversaryMove, GameState, GameTrace, Mode, StopRule};
use treemine::player::{BoundedHorizon, PlayerSpec, PlayerStrategy, Recursive, ThreeMiners, TwoMiners};

fn random(seed: u64, cap: u32, c: u32, add: f64) -> RandomAdversary {
    let mut p = RandomParams::new(seed);
    p.depth_cap = cap;
    p.max_children = c;
    p.p_add = add;
    p.p_kill_deep = (seed % 5) as f64 / 4.0;
    p.persist = seed.is_multiple_of(2);
    RandomAdversary::new(p)
}

#[test]
fn two_miners_never_pay() {
    for seed in 0..200 {
        let run = run_game(&mut TwoMiners, &mut random(seed, 20, 2, 0.0), GameState::plain(2), &StopRule::rounds(500)).unwrap();
        assert_eq!(run.trace.max_cost(), 0);
        assert!(run.trace.rounds.iter().all(|r| r.cost == 0));
        // the board stays a line
        let t = run.state.tree();
        assert!(t.nodes().all(|v| t.children(v).len() <= 1));
    }
    let w = exhaustive_worst(&TwoMiners, &GameState::plain(2), 4, 4, 40, 1_000_000);
    assert_eq!(w.cost, 0);
}

#[test]
fn three_miners_within_fourteen_d() {
    let mut advs: Vec<Box<dyn AdversaryStrategy>> = vec![
        Box::new(LowerBound::new(3, 24)),
        Box::new(Greedy::new(Box::new(ThreeMiners), 24)),
    ];
    for seed in 0..300 {
        advs.push(Box::new(random(seed, 24, 2, 0.0)));
    }
    for mut adv in advs {
        let name = adv.name();
        let mut p = ThreeMiners;
        let run = run_game(&mut p, adv.as_mut(), GameState::plain(3), &StopRule::depth(3, 24)).unwrap();
        run.trace.replay().unwrap();
        for d in 1..=24 {
            assert!(cost_at_depth(&run.trace, d) <= 14 * d as i64, "{name} d={d}");
        }
    }
    for d in 1..=3 {
        let w = exhaustive_worst(&ThreeMiners, &GameState::plain(3), d, d + 1, 12, 2_000_000);
        assert!(w.cost <= 14 * d as i64, "exhaustive d={d}: {}", w.cost);
    }
}

#[test]
fn traces_replay_and_survive_json() {
    for seed in 0..30 {
        for k in [2u32, 3, 5] {
            let spec = PlayerSpec::for_k(k);
            let mut p = spec.build(k);
            let mut adv = random(seed, 10, 3, 0.1);
            let run = run_game(p.as_mut(), &mut adv, spec.initial_state(k), &StopRule::rounds(300)).unwrap();
            let end = run.trace.replay().unwrap();
            assert_eq!(end, run.state);
            let back: GameTrace = serde_json::from_str(&serde_json::to_string(&run.trace).unwrap()).unwrap();
            assert_eq!(back, run.trace);
            // the same script against a fresh player gives the same game
            let mut again = spec.build(k);
            let rerun = run_game(again.as_mut(), &mut Replay::from_trace(&run.trace), spec.initial_state(k), &StopRule::rounds(300)).unwrap();
            assert_eq!(rerun.trace, run.trace);
        }
    }
}

#[test]
fn miners_are_conserved() {
    for seed in 0..40 {
        let k = 6;
        let mut p = Recursive::new(k);
        let run = run_game(&mut p, &mut random(seed, 12, 4, 0.2), GameState::extended(2, k), &StopRule::rounds(400)).unwrap();
        let mut state = run.trace.initial_state().unwrap();
        let mut total = state.config().total();
        for r in &run.trace.rounds {
            state.apply_round(&r.adv, &r.resp).unwrap();
            if r.adv == AdversaryMove::AddMiner {
                total += 1;
            }
            if !state.is_finished() {
                assert_eq!(state.config().total(), total);
            }
            assert_eq!(state.cost(), state.raw_cost() as i64 - 2 * state.edges_created() as i64);
        }
    }
}

#[test]
fn responses_are_legal_under_fuzzing() {
    let mut rounds = 0;
    for k in 2..=8u32 {
        for seed in 0..25 {
            let spec = PlayerSpec::for_k(k);
            let mut p = spec.build(k);
            let run = run_game(p.as_mut(), &mut random(seed * 7 + k as u64, 30, k, 0.05), spec.initial_state(k), &StopRule::rounds(1000))
                .unwrap_or_else(|e| panic!("k={k} seed={seed}: {e}"));
            rounds += run.trace.rounds.len();
        }
    }
    assert!(rounds >= 10_000, "only {rounds} rounds fuzzed");
}

#[test]
fn horizon_projection_keeps_one_miner_at_the_horizon() {
    for seed in 0..40 {
        for (k, delta) in [(3u32, 4u32), (4, 5), (5, 6)] {
            let mut p = BoundedHorizon::new(Recursive::new(k), delta);
            let run = run_game(&mut p, &mut random(seed, 40, 3, 0.0), GameState::horizon(k, k, delta), &StopRule::rounds(400))
                .unwrap_or_else(|e| panic!("k={k} seed={seed}: {e}"));
            let mut state = run.trace.initial_state().unwrap();
            for r in &run.trace.rounds {
                state.apply_round(&r.adv, &r.resp).unwrap();
                // stacking is only allowed once every leaf is at the horizon
                let open = state.active_leaves().any(|v| state.tree().depth(v) < delta);
                for v in state.active_leaves() {
                    if open && state.tree().depth(v) >= delta {
                        assert_eq!(state.load(v), 1);
                    }
                }
            }
            if let Some(shadow) = p.shadow() {
                assert!(shadow.raw_cost() >= state.raw_cost());
            }
            assert_eq!(state.mode(), Mode::Horizon(delta));
        }
    }
}

/// Plays `script` against two strategies and compares the responses.
fn same_game(a: &mut dyn PlayerStrategy, b: &mut dyn PlayerStrategy, sa: GameState, sb: GameState, adv: &mut dyn AdversaryStrategy) {
    let run = run_game(a, adv, sa, &StopRule::rounds(300)).unwrap();
    let rerun = run_game(b, &mut Replay::from_trace(&run.trace), sb, &StopRule::rounds(300)).unwrap();
    let pa: Vec<_> = run.trace.rounds.iter().map(|r| (&r.adv, &r.resp, r.cost)).collect();
    let pb: Vec<_> = rerun.trace.rounds.iter().map(|r| (&r.adv, &r.resp, r.cost)).collect();
    assert_eq!(pa, pb);
}

#[test]
fn recursive_strategies_agree_on_small_teams() {
    for seed in 0..30 {
        same_game(
            &mut Recursive::new(2),
            &mut TwoMiners,
            GameState::extended(2, 2),
            GameState::plain(2),
            &mut random(seed, 16, 1, 0.0),
        );
        for (m, k1, k2) in [(3u32, 4u32, 6u32), (4, 5, 8), (2, 3, 7)] {
            same_game(
                &mut Recursive::new(k1),
                &mut Recursive::new(k2),
                GameState::extended(m, k1),
                GameState::extended(m, k2),
                &mut random(seed, 14, m, 0.0),
            );
        }
    }
}
