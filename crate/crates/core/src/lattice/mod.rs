//! The guided random walk on the square lattice.
//!
//! At every step the walker reads the next instruction (a cardinal direction).
//! With probability `1 - p` it follows the instruction; with probability `p`
//! it moves to one of the four neighbours chosen uniformly, which may happen
//! to be the instructed one. The instructed direction is therefore taken with
//! probability `1 - 3p/4` and every other direction with probability `p/4`.
//!
//! [`simulate`] runs single trajectories; [`exact_distribution`] and
//! [`first_passage_distribution`] compute the law of the walk exactly by
//! repeated convolution with the four-point step kernel.

mod exact;
mod sim;

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use exact::{
    exact_distribution, first_passage_distribution, max_point_probability, DistributionGrid,
    MemoryCap, Window,
};
pub use sim::{simulate, step, StepDraw, Walker};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("error probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("step budget must be at least 1")]
    ZeroStepBudget,
    #[error("instruction stream ran out after {steps} steps (budget {max_steps}) without reaching home")]
    StreamExhausted { steps: u64, max_steps: u64 },
    #[error("a {side}x{side} window needs {required} bytes, above the memory cap of {cap} bytes")]
    MemoryCapExceeded { side: u64, required: u128, cap: u64 },
}

/// A cell of the integer lattice. `x` grows to the east, `y` to the north.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct GridPoint {
    pub x: i64,
    pub y: i64,
}

impl GridPoint {
    pub const ORIGIN: GridPoint = GridPoint { x: 0, y: 0 };

    pub const fn new(x: i64, y: i64) -> Self {
        GridPoint { x, y }
    }

    pub fn l1_norm(self) -> u64 {
        self.x.unsigned_abs() + self.y.unsigned_abs()
    }

    pub fn max_norm(self) -> u64 {
        self.x.unsigned_abs().max(self.y.unsigned_abs())
    }

    /// `true` when `x + y` is even, i.e. the cell is reachable from the
    /// origin in an even number of steps.
    pub fn is_even(self) -> bool {
        (self.x + self.y).rem_euclid(2) == 0
    }
}

impl Add for GridPoint {
    type Output = GridPoint;
    fn add(self, rhs: GridPoint) -> GridPoint {
        GridPoint::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl AddAssign for GridPoint {
    fn add_assign(&mut self, rhs: GridPoint) {
        self.x += rhs.x;
        self.y += rhs.y;
    }
}

impl Sub for GridPoint {
    type Output = GridPoint;
    fn sub(self, rhs: GridPoint) -> GridPoint {
        GridPoint::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for GridPoint {
    type Output = GridPoint;
    fn neg(self) -> GridPoint {
        GridPoint::new(-self.x, -self.y)
    }
}

impl Mul<i64> for GridPoint {
    type Output = GridPoint;
    fn mul(self, k: i64) -> GridPoint {
        GridPoint::new(self.x * k, self.y * k)
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    North,
    East,
    South,
    West,
}

impl Direction {
    /// Order used when a uniformly random direction is drawn by index.
    pub const ALL: [Direction; 4] = [
        Direction::North,
        Direction::East,
        Direction::South,
        Direction::West,
    ];

    pub const fn delta(self) -> GridPoint {
        match self {
            Direction::North => GridPoint::new(0, 1),
            Direction::East => GridPoint::new(1, 0),
            Direction::South => GridPoint::new(0, -1),
            Direction::West => GridPoint::new(-1, 0),
        }
    }

    pub const fn opposite(self) -> Direction {
        match self {
            Direction::North => Direction::South,
            Direction::East => Direction::West,
            Direction::South => Direction::North,
            Direction::West => Direction::East,
        }
    }

    pub const fn letter(self) -> char {
        match self {
            Direction::North => 'N',
            Direction::East => 'E',
            Direction::South => 'S',
            Direction::West => 'W',
        }
    }

    pub fn from_letter(c: char) -> Option<Direction> {
        match c.to_ascii_uppercase() {
            'N' => Some(Direction::North),
            'E' => Some(Direction::East),
            'S' => Some(Direction::South),
            'W' => Some(Direction::West),
            _ => None,
        }
    }
}

/// Net displacement of following `instructions` exactly.
pub fn instructed_displacement(instructions: &[Direction]) -> GridPoint {
    instructions
        .iter()
        .fold(GridPoint::ORIGIN, |acc, d| acc + d.delta())
}

/// Parameters of one walk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    pub p: f64,
    pub home: GridPoint,
    pub max_steps: u64,
    pub seed: u64,
}

impl WalkConfig {
    pub fn validate(&self) -> Result<(), LatticeError> {
        check_probability(self.p)?;
        if self.max_steps == 0 {
            return Err(LatticeError::ZeroStepBudget);
        }
        Ok(())
    }
}

pub(crate) fn check_probability(p: f64) -> Result<(), LatticeError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(LatticeError::InvalidProbability(p))
    }
}

/// Outcome of one simulated walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialResult {
    /// First time the walk stood on home, if it did within the budget.
    pub hit_time: Option<u64>,
    pub final_position: GridPoint,
    pub steps_executed: u64,
}

/// A run of identical instructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Segment {
    pub direction: Direction,
    pub len: u64,
}

impl Segment {
    pub const fn new(direction: Direction, len: u64) -> Self {
        Segment { direction, len }
    }
}

/// Run-length encodes a direction list, dropping nothing.
pub fn to_segments(instructions: &[Direction]) -> Vec<Segment> {
    let mut out: Vec<Segment> = Vec::new();
    for &d in instructions {
        match out.last_mut() {
            Some(seg) if seg.direction == d => seg.len += 1,
            _ => out.push(Segment::new(d, 1)),
        }
    }
    out
}

/// A lazily produced, possibly infinite, sequence of instructions.
///
/// Internally the stream is a sequence of [`Segment`]s so that consumers that
/// understand runs (the simulator) can skip through long straight stretches.
/// It also iterates as plain [`Direction`]s.
pub struct InstructionStream {
    source: Box<dyn Iterator<Item = Segment> + Send>,
    partial: Option<Segment>,
}

impl InstructionStream {
    pub fn from_segments<I>(segments: I) -> Self
    where
        I: IntoIterator<Item = Segment>,
        I::IntoIter: Send + 'static,
    {
        InstructionStream {
            source: Box::new(segments.into_iter().filter(|s| s.len > 0)),
            partial: None,
        }
    }

    pub fn from_directions(instructions: &[Direction]) -> Self {
        Self::from_segments(to_segments(instructions))
    }

    /// Next run of instructions, or `None` once the stream is exhausted.
    pub fn next_segment(&mut self) -> Option<Segment> {
        self.partial.take().or_else(|| self.source.next())
    }

    /// Collects the first `n` instructions (fewer if the stream ends).
    pub fn take_directions(&mut self, n: usize) -> Vec<Direction> {
        self.by_ref().take(n).collect()
    }
}

impl Iterator for InstructionStream {
    type Item = Direction;

    fn next(&mut self) -> Option<Direction> {
        let mut seg = self.next_segment()?;
        let d = seg.direction;
        seg.len -= 1;
        if seg.len > 0 {
            self.partial = Some(seg);
        }
        Some(d)
    }
}

impl fmt::Debug for InstructionStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InstructionStream")
            .field("partial", &self.partial)
            .finish_non_exhaustive()
    }
}

/// Named instruction sequences used by the oracle commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Every instruction is North.
    Straight,
    /// North, South, North, South, ...
    Zigzag,
}

impl Preset {
    pub fn directions(self, len: usize) -> Vec<Direction> {
        match self {
            Preset::Straight => vec![Direction::North; len],
            Preset::Zigzag => (0..len)
                .map(|i| {
                    if i % 2 == 0 {
                        Direction::North
                    } else {
                        Direction::South
                    }
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direction_deltas_cancel() {
        let sum = Direction::ALL
            .iter()
            .fold(GridPoint::ORIGIN, |acc, d| acc + d.delta());
        assert_eq!(sum, GridPoint::ORIGIN);
        for d in Direction::ALL {
            assert_eq!(d.delta().l1_norm(), 1);
            assert_eq!(d.delta() + d.opposite().delta(), GridPoint::ORIGIN);
            assert_eq!(Direction::from_letter(d.letter()), Some(d));
        }
    }

    #[test]
    fn norms() {
        let p = GridPoint::new(-3, 2);
        assert_eq!(p.l1_norm(), 5);
        assert_eq!(p.max_norm(), 3);
        assert!(!p.is_even());
        assert!(GridPoint::new(-1, -1).is_even());
    }

    #[test]
    fn stream_round_trips_directions() {
        use Direction::*;
        let dirs = vec![North, North, East, South, South, South, North];
        let segs = to_segments(&dirs);
        assert_eq!(segs.len(), 4);
        let mut stream = InstructionStream::from_directions(&dirs);
        assert_eq!(stream.next(), Some(North));
        // the remainder of a partially consumed run is returned as a segment
        assert_eq!(stream.next_segment(), Some(Segment::new(North, 1)));
        assert_eq!(stream.take_directions(10), vec![East, South, South, South, North]);
        assert_eq!(stream.next(), None);
    }

    #[test]
    fn presets() {
        use Direction::*;
        assert_eq!(Preset::Zigzag.directions(3), vec![North, South, North]);
        assert_eq!(
            instructed_displacement(&Preset::Straight.directions(7)),
            GridPoint::new(0, 7)
        );
    }
}
