use serde::Serialize;

use super::trace::TRACE_VERSION;
use super::{ExploreError, ExplorationTrace, HiddenWorld, Scheduler, SchedulerSpec, Team};
use crate::player::PlayerSpec;

/// Outcome of one asynchronous exploration.
#[derive(Clone, Debug, Serialize)]
pub struct ActeRun {
    pub k: u32,
    pub n: u64,
    pub depth: u32,
    /// Scheduled steps, idle ones included.
    pub steps: u64,
    pub moves: u64,
    pub explored: u64,
    pub target_movement: u64,
    pub refined_movement: i64,
    pub game_rounds: u64,
    pub game_cost: i64,
    pub game_raw_cost: u64,
    #[serde(skip)]
    pub trace: Option<ExplorationTrace>,
}

impl ActeRun {
    /// Moves beyond the `2n` a depth-first search would need.
    pub fn overhead(&self) -> i64 {
        self.moves as i64 - 2 * self.n as i64
    }
}

/// Default step cap: generous, only meant to stop runaway runs.
pub fn default_step_budget(n: u64, k: u32, depth: u32) -> u64 {
    let (k, d) = (k as u64, depth as u64 + 1);
    64 * (n + k * k * d) + 100_000
}

/// Explores `world` with `team`, letting `sched` pick who moves, until every
/// node is mined. Each step goes through the world's anchor check.
pub fn run_team(
    team: Team,
    world: &mut HiddenWorld,
    sched: &mut dyn Scheduler,
    budget: u64,
) -> Result<ActeRun, ExploreError> {
    let mut team = drive(team, world, sched, budget)?;
    Ok(summarize(&mut team, world))
}

fn drive(
    mut team: Team,
    world: &mut HiddenWorld,
    sched: &mut dyn Scheduler,
    budget: u64,
) -> Result<Team, ExploreError> {
    let k = team.k();
    let mut t = 0u64;
    while !world.complete() {
        if t >= budget {
            return Err(ExploreError::Budget(budget));
        }
        let r = sched.next_robot(&team, t);
        let step = team.step(r, world)?;
        world.observe(k, &step)?;
        t += 1;
    }
    Ok(team)
}

fn summarize(team: &mut Team, world: &HiddenWorld) -> ActeRun {
    let (steps, game) = team.take_record();
    let k = team.k();
    let mut run = ActeRun {
        k,
        n: world.n() as u64,
        depth: world.depth(),
        steps: team.steps(),
        moves: team.moves(),
        explored: team.explored(),
        target_movement: team.target_movement(),
        refined_movement: team.refined_movement(),
        game_rounds: team.game().round(),
        game_cost: team.game().cost(),
        game_raw_cost: team.game().raw_cost(),
        trace: None,
    };
    if let Some(steps) = steps {
        run.trace = Some(ExplorationTrace {
            version: TRACE_VERSION,
            k,
            n: run.n,
            depth: run.depth,
            player: team.player().name(),
            scheduler: String::new(),
            view: team.view().to_parents(),
            steps,
            moves: run.moves,
            explored: run.explored,
            target_movement: run.target_movement,
            refined_movement: run.refined_movement,
            game,
        });
    }
    run
}

/// TEAM driven by `player` with `k` robots under the scheduler `sched`.
pub fn run_acte(
    player: PlayerSpec,
    world: &mut HiddenWorld,
    sched: SchedulerSpec,
    k: u32,
    record: bool,
) -> Result<ActeRun, ExploreError> {
    let mut team = Team::with_spec(k, player);
    if record {
        team = team.recording();
    }
    let budget = default_step_budget(world.n() as u64, k, world.depth());
    let mut run = run_team(team, world, sched.build().as_mut(), budget)?;
    if let Some(t) = &mut run.trace {
        t.scheduler = sched.to_string();
    }
    Ok(run)
}

/// Synchronous exploration obtained from the round-robin schedule.
#[derive(Clone, Debug, Serialize)]
pub struct SyncRun {
    /// Rounds until every node is explored: `⌈steps / k⌉`.
    pub exploration_rounds: u64,
    /// Rounds to bring every robot back to the root afterwards.
    pub return_rounds: u64,
    pub rounds: u64,
    pub acte: ActeRun,
}

/// Plays TEAM under the schedule `1, 2, …, k, 1, 2, …`, one synchronous round
/// per `k` consecutive steps, then walks every robot back to the root.
pub fn run_cte_sync(
    player: PlayerSpec,
    world: &mut HiddenWorld,
    k: u32,
    record: bool,
) -> Result<SyncRun, ExploreError> {
    let mut team = Team::with_spec(k, player);
    if record {
        team = team.recording();
    }
    let budget = default_step_budget(world.n() as u64, k, world.depth());
    let mut rr = SchedulerSpec::RoundRobin.build();
    let mut team = drive(team, world, rr.as_mut(), budget)?;
    let return_rounds = team
        .robots()
        .iter()
        .map(|r| team.view().depth(r.pos) as u64)
        .max()
        .unwrap_or(0);
    let mut acte = summarize(&mut team, world);
    if let Some(t) = &mut acte.trace {
        t.scheduler = SchedulerSpec::RoundRobin.to_string();
    }
    let exploration_rounds = acte.steps.div_ceil(k as u64);
    Ok(SyncRun {
        exploration_rounds,
        return_rounds,
        rounds: exploration_rounds + return_rounds,
        acte,
    })
}

/// Synchronous exploration by `k` robots of which only
/// `competitive_team_size(k)` move; the others stay at the root.
pub fn run_competitive(world: &mut HiddenWorld, k: u32) -> Result<SyncRun, ExploreError> {
    let kp = crate::analysis::competitive_team_size(k);
    run_cte_sync(PlayerSpec::for_k(kp), world, kp, false)
}
