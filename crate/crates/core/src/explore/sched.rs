use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Team;

/// Picks the robot allowed to move at step `t`.
pub trait Scheduler: Send {
    fn next_robot(&mut self, team: &Team, t: u64) -> u32;
}

/// `rr`, `single`, `deepest` or `random@seed=S`.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SchedulerSpec {
    RoundRobin,
    Single,
    Deepest,
    Random { seed: u64 },
}

impl SchedulerSpec {
    pub const ALL_FIXED: [SchedulerSpec; 3] =
        [SchedulerSpec::RoundRobin, SchedulerSpec::Single, SchedulerSpec::Deepest];

    pub fn build(self) -> Box<dyn Scheduler> {
        match self {
            SchedulerSpec::RoundRobin => Box::new(|team: &Team, t: u64| (t % team.k() as u64) as u32),
            SchedulerSpec::Single => Box::new(|_: &Team, _: u64| 0),
            SchedulerSpec::Deepest => Box::new(|team: &Team, _: u64| {
                let view = team.view();
                let robots = team.robots();
                (0..robots.len())
                    .max_by_key(|&i| (view.depth(robots[i].pos), std::cmp::Reverse(i)))
                    .unwrap_or(0) as u32
            }),
            SchedulerSpec::Random { seed } => Box::new(RandomScheduler(ChaCha8Rng::seed_from_u64(seed))),
        }
    }
}

impl<F: FnMut(&Team, u64) -> u32 + Send> Scheduler for F {
    fn next_robot(&mut self, team: &Team, t: u64) -> u32 {
        self(team, t)
    }
}

struct RandomScheduler(ChaCha8Rng);

impl Scheduler for RandomScheduler {
    fn next_robot(&mut self, team: &Team, _t: u64) -> u32 {
        self.0.gen_range(0..team.k())
    }
}

impl fmt::Display for SchedulerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchedulerSpec::RoundRobin => f.write_str("rr"),
            SchedulerSpec::Single => f.write_str("single"),
            SchedulerSpec::Deepest => f.write_str("deepest"),
            SchedulerSpec::Random { seed } => write!(f, "random@seed={seed}"),
        }
    }
}

impl FromStr for SchedulerSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rr" => Ok(SchedulerSpec::RoundRobin),
            "single" => Ok(SchedulerSpec::Single),
            "deepest" => Ok(SchedulerSpec::Deepest),
            _ => {
                let seed = s
                    .strip_prefix("random@seed=")
                    .ok_or_else(|| format!("unknown scheduler {s:?}"))?;
                let seed = seed.parse().map_err(|_| format!("bad seed in {s:?}"))?;
                Ok(SchedulerSpec::Random { seed })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selectors() {
        for s in ["rr", "single", "deepest", "random@seed=12"] {
            assert_eq!(s.parse::<SchedulerSpec>().unwrap().to_string(), s);
        }
        assert!("fifo".parse::<SchedulerSpec>().is_err());
    }
}
