use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    check_probability, Direction, GridPoint, InstructionStream, LatticeError, TrialResult,
    WalkConfig,
};

/// The randomness consumed by one step: a uniform real deciding whether the
/// step is a mistake, and an index into [`Direction::ALL`] used if it is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepDraw {
    pub uniform: f64,
    pub choice: u8,
}

/// One transition of the chain. A draw with `uniform < p` is a mistake and
/// moves along `Direction::ALL[choice]`, which may equal the instruction.
pub fn step(position: GridPoint, instruction: Direction, p: f64, draw: StepDraw) -> GridPoint {
    if draw.uniform < p {
        position + Direction::ALL[usize::from(draw.choice & 3)].delta()
    } else {
        position + instruction.delta()
    }
}

/// Step-by-step driver around [`step`] with its own seeded generator.
#[derive(Debug, Clone)]
pub struct Walker {
    p: f64,
    rng: ChaCha8Rng,
    position: GridPoint,
}

impl Walker {
    pub fn new(p: f64, seed: u64) -> Result<Self, LatticeError> {
        check_probability(p)?;
        Ok(Walker {
            p,
            rng: ChaCha8Rng::seed_from_u64(seed),
            position: GridPoint::ORIGIN,
        })
    }

    pub fn position(&self) -> GridPoint {
        self.position
    }

    pub fn advance(&mut self, instruction: Direction) -> GridPoint {
        let draw = StepDraw {
            uniform: self.rng.random::<f64>(),
            choice: self.rng.random_range(0..4u8),
        };
        self.position = step(self.position, instruction, self.p, draw);
        self.position
    }
}

/// Number of faithful steps before the next mistake; `None` means never.
fn faithful_run(rng: &mut ChaCha8Rng, p: f64, log_keep: f64) -> Option<u64> {
    if p <= 0.0 {
        return None;
    }
    if p >= 1.0 {
        return Some(0);
    }
    // inverse CDF of the geometric law P(G = g) = (1-p)^g p
    let u = 1.0 - rng.random::<f64>();
    let g = (u.ln() / log_keep).floor();
    Some(if g >= u64::MAX as f64 { u64::MAX } else { g as u64 })
}

/// First `j` in `1..=run` with `from + j * dir == home`.
fn hit_along(from: GridPoint, dir: Direction, run: u64, home: GridPoint) -> Option<u64> {
    let d = dir.delta();
    let (along, across_ok) = if d.x != 0 {
        ((home.x - from.x) * d.x, home.y == from.y)
    } else {
        ((home.y - from.y) * d.y, home.x == from.x)
    };
    (across_ok && along >= 1 && (along as u64) <= run).then_some(along as u64)
}

/// Runs the chain from the origin until it first stands on `config.home`
/// or `config.max_steps` steps have been taken.
///
/// Mistakes are placed by sampling the geometric gaps between them, so the
/// cost is proportional to the number of mistakes and instruction runs rather
/// than to the number of steps. The law of the trajectory is the same as
/// repeated application of [`step`].
pub fn simulate(
    instructions: &mut InstructionStream,
    config: &WalkConfig,
) -> Result<TrialResult, LatticeError> {
    config.validate()?;
    let home = config.home;
    let max_steps = config.max_steps;
    let mut pos = GridPoint::ORIGIN;
    let mut t = 0u64;
    if pos == home {
        return Ok(TrialResult {
            hit_time: Some(0),
            final_position: pos,
            steps_executed: 0,
        });
    }

    let p = config.p;
    let log_keep = (-p).ln_1p();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut faithful = faithful_run(&mut rng, p, log_keep);

    while let Some(seg) = instructions.next_segment() {
        let mut remaining = seg.len;
        while remaining > 0 {
            if t == max_steps {
                return Ok(TrialResult {
                    hit_time: None,
                    final_position: pos,
                    steps_executed: t,
                });
            }
            let budget = max_steps - t;
            let run = remaining.min(budget).min(faithful.unwrap_or(u64::MAX));
            if run > 0 {
                if let Some(j) = hit_along(pos, seg.direction, run, home) {
                    return Ok(TrialResult {
                        hit_time: Some(t + j),
                        final_position: home,
                        steps_executed: t + j,
                    });
                }
                pos += seg.direction.delta() * run as i64;
                t += run;
                remaining -= run;
                if let Some(f) = faithful.as_mut() {
                    *f -= run;
                }
                continue;
            }
            // faithful == Some(0): this step is a mistake
            let k = rng.random_range(0..4usize);
            pos += Direction::ALL[k].delta();
            t += 1;
            remaining -= 1;
            if pos == home {
                return Ok(TrialResult {
                    hit_time: Some(t),
                    final_position: pos,
                    steps_executed: t,
                });
            }
            faithful = faithful_run(&mut rng, p, log_keep);
        }
    }

    if t < max_steps {
        return Err(LatticeError::StreamExhausted {
            steps: t,
            max_steps,
        });
    }
    Ok(TrialResult {
        hit_time: None,
        final_position: pos,
        steps_executed: t,
    })
}
