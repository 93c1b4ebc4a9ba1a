use proptest::prelude::*;
use treemine::adversary::{exhaustive_worst, RandomAdversary, RandomParams};
use treemine::bench::TreeSpec;
use treemine::explore::*;
use treemine::game::{run_game, GameState, StopRule};
use treemine::player::PlayerSpec;
use treemine::{NodeId, RootedTree};

fn ck(k: u32) -> u64 {
    let mut c = vec![0u64, 0, 2];
    for j in 3..=k as usize {
        c.push(c[j - 1] + 2 * j as u64 * c[j.div_ceil(2)] + 20 * (j * j) as u64);
    }
    c[k as usize]
}

fn tree(spec: &str) -> RootedTree {
    spec.parse::<TreeSpec>().unwrap().generate().unwrap()
}

/// Steps TEAM by hand, checking the anchor invariant against the team's own
/// anchors after every step.
fn explore_checked(t: &RootedTree, k: u32, sched: SchedulerSpec, seed: u64) -> Team {
    let mut world = HiddenWorld::new(t.clone(), seed);
    let mut team = Team::with_spec(k, PlayerSpec::for_k(k)).recording();
    let mut s = sched.build();
    let mut step = 0;
    while !world.complete() {
        let r = s.next_robot(&team, step);
        let st = team.step(r, &mut world).unwrap();
        world.observe(k, &st).unwrap();
        world.check_anchors(&team).unwrap();
        assert_eq!(team.anchors().iter().all(Option::is_none), world.complete());
        step += 1;
        assert!(step < 1_000_000);
    }
    team
}

fn parents(max_n: usize) -> impl Strategy<Value = Vec<u32>> {
    (1..=max_n).prop_flat_map(|n| {
        (0..n)
            .map(|i| if i == 0 { Just(0u32).boxed() } else { (i.saturating_sub(4) as u32..i as u32).boxed() })
            .collect::<Vec<_>>()
    })
}

fn scheduler() -> impl Strategy<Value = SchedulerSpec> {
    prop_oneof![
        Just(SchedulerSpec::RoundRobin),
        Just(SchedulerSpec::Single),
        Just(SchedulerSpec::Deepest),
        any::<u64>().prop_map(|seed| SchedulerSpec::Random { seed }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn team_invariants_hold(p in parents(60), k in 2u32..=7, sched in scheduler(), seed in any::<u64>()) {
        let t = RootedTree::from_parents(&p).unwrap();
        let team = explore_checked(&t, k, sched, seed);
        prop_assert_eq!(team.view().len(), t.len());
        prop_assert_eq!(team.explored(), t.len() as u64 - 1);
        prop_assert!(team.moves() <= 2 * t.len() as u64 + ck(k) * t.max_depth() as u64);
        prop_assert!(team.target_movement() <= team.game().raw_cost());
        prop_assert!(team.refined_movement() <= team.game().cost());
    }

    #[test]
    fn traces_verify(p in parents(150), k in 2u32..=9, sched in scheduler(), seed in any::<u64>()) {
        let t = RootedTree::from_parents(&p).unwrap();
        let mut w = HiddenWorld::new(t, seed);
        let run = run_acte(PlayerSpec::for_k(k), &mut w, sched, k, true).unwrap();
        let trace = run.trace.unwrap();
        prop_assert!(is_locally_greedy(&trace));
        let report = verify_targets_inequality(&trace).unwrap();
        prop_assert!(report.min_slack >= 0 && report.min_refined_slack >= 0);
        let back: ExplorationTrace = serde_json::from_str(&serde_json::to_string(&trace).unwrap()).unwrap();
        prop_assert_eq!(&back, &trace);
        let game = trace.game.as_ref().unwrap();
        prop_assert_eq!(game.replay().unwrap().raw_cost(), run.game_raw_cost);
    }
}

#[test]
fn path_with_two_robots_is_free() {
    for n in [1u32, 2, 7, 300] {
        let t = tree(&format!("path:{n}"));
        for sched in ["rr", "single", "deepest", "random@seed=5"] {
            let mut w = HiddenWorld::new(t.clone(), 0);
            let run = run_acte(PlayerSpec::K2, &mut w, sched.parse().unwrap(), 2, false).unwrap();
            assert!(run.moves <= 2 * n as u64, "{sched}: {}", run.moves);
        }
        let mut w = HiddenWorld::new(t, 0);
        let sync = run_cte_sync(PlayerSpec::K2, &mut w, 2, false).unwrap();
        assert!(sync.rounds <= n as u64 + (n as u64 - 1), "n={n}: {}", sync.rounds);
    }
}

#[test]
fn star_and_binary_examples() {
    let star = tree("star:40");
    let mut w = HiddenWorld::new(star, 3);
    let run = run_acte(PlayerSpec::for_k(4), &mut w, SchedulerSpec::RoundRobin, 4, false).unwrap();
    assert_eq!(run.explored, 39);
    assert!(run.moves <= 80 + ck(4));

    let bin = tree("binary:4");
    assert_eq!(bin.len(), 31);
    let mut w = HiddenWorld::new(bin, 3);
    let sync = run_cte_sync(PlayerSpec::for_k(4), &mut w, 4, false).unwrap();
    assert!(sync.rounds <= (62 + ck(4) * 4).div_ceil(4) + 4);
}

#[test]
fn a_single_scheduled_robot_explores_alone() {
    let t = tree("random:200,4,3");
    let mut w = HiddenWorld::new(t, 9);
    let run = run_acte(PlayerSpec::for_k(5), &mut w, SchedulerSpec::Single, 5, true).unwrap();
    // a lone depth-first search: every edge down and up once, except the last branch
    assert!(run.moves <= 2 * 199);
    assert!(run.trace.unwrap().steps.iter().all(|s| s.robot == 0));
}

#[test]
fn trace_checks_catch_bad_traces() {
    let t = tree("random:60,1,3");
    let mut w = HiddenWorld::new(t, 2);
    let run = run_acte(PlayerSpec::for_k(3), &mut w, SchedulerSpec::RoundRobin, 3, true).unwrap();
    let trace = run.trace.unwrap();

    let mut lazy = trace.clone();
    let i = lazy.steps.iter().position(|s| s.rule == Rule::R1).unwrap();
    lazy.steps[i].offered = true;
    lazy.steps[i].rule = Rule::R2;
    assert!(!is_locally_greedy(&lazy));

    let mut empty = trace.clone();
    empty.steps.clear();
    assert!(is_locally_greedy(&empty));

    let mut wrong = trace.clone();
    wrong.moves += 1;
    assert!(matches!(verify_targets_inequality(&wrong), Err(TargetsViolation::Totals(_))));

    let mut moved = trace.clone();
    let j = moved.steps.iter().position(|s| s.rule == Rule::R2).unwrap();
    moved.steps[j].to = moved.steps[j].from;
    assert!(matches!(verify_targets_inequality(&moved), Err(TargetsViolation::Malformed { .. })));
}

#[test]
fn no_target_movement_means_half_the_moves_explore() {
    // A single robot never changes target before the end: S = 0.
    let t = tree("spider:5,6");
    let mut w = HiddenWorld::new(t, 1);
    let run = run_acte(PlayerSpec::K2, &mut w, SchedulerSpec::Single, 2, true).unwrap();
    let trace = run.trace.unwrap();
    let r = verify_targets_inequality(&trace).unwrap();
    assert_eq!(r.target_movement, 0);
    assert!(2 * r.explored >= r.moves);
}

#[test]
fn anchors_start_at_the_root_and_end_empty() {
    let t = tree("caterpillar:30,2");
    let team = Team::with_spec(3, PlayerSpec::K3);
    assert!(team.anchors().iter().all(|a| *a == Some(NodeId::ROOT)));
    let team = explore_checked(&t, 3, SchedulerSpec::RoundRobin, 0);
    assert!(team.anchors().iter().all(Option::is_none));
}

#[test]
fn cte_view_reports_degrees() {
    let t = tree("binary:3");
    let mut w = HiddenWorld::with_mode(t, 0, InfoMode::Cte);
    let mut team = Team::with_spec(2, PlayerSpec::K2);
    assert_eq!(w.dangling(NodeId::ROOT), Some(2));
    team.step(0, &mut w).unwrap();
    assert_eq!(w.dangling(NodeId::ROOT), Some(1));
}

#[test]
fn exploration_player_of_two_robots_never_pays() {
    for seed in 0..100 {
        let mut p = RandomParams::new(seed);
        p.persist = seed % 2 == 0;
        p.max_children = 1;
        p.depth_cap = 20;
        let mut player = ExplorationPlayer::team(2, PlayerSpec::K2);
        let run = run_game(&mut player, &mut RandomAdversary::new(p), GameState::plain(2), &StopRule::rounds(200)).unwrap();
        assert!(run.trace.rounds.iter().all(|r| r.cost == 0));
    }
    let w = exhaustive_worst(&ExplorationPlayer::team(2, PlayerSpec::K2), &GameState::plain(2), 4, 4, 30, 1_000_000);
    assert_eq!(w.cost, 0);
}

#[test]
fn exploration_player_pays_at_most_its_moves() {
    for k in 2..=4u32 {
        for seed in 0..60 {
            let mut p = RandomParams::new(seed * 13 + k as u64);
            p.persist = true;
            p.max_children = k - 1;
            p.depth_cap = 12;
            let mut player = ExplorationPlayer::team(k, PlayerSpec::for_k(k));
            let run = run_game(&mut player, &mut RandomAdversary::new(p), GameState::plain(k), &StopRule::rounds(300))
                .unwrap_or_else(|e| panic!("k={k} seed={seed}: {e}"));
            let mut prev = 0;
            for (r, &moves) in run.trace.rounds.iter().zip(player.round_moves()) {
                let raw = r.raw.unwrap();
                assert!(raw - prev <= moves, "k={k} seed={seed}");
                prev = raw;
            }
        }
    }
}
