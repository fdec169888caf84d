//! The phased sweeping strategy.
//!
//! A phase that starts at time `t` (with the instructed position back at the
//! origin) walks to the south-west corner of a box of half-width `W` and
//! half-height `H`, climbs a random offset `Z`, sweeps `N` horizontal lines
//! `G` apart, climbs the rest of the offset range and returns to the origin.
//! The box grows like `sqrt(t)` while the number of lines grows like `ln t`.
//!
//! Instructions for times before the first phase start `t0` are a North/South
//! shuttle, so the instructed position is the origin whenever a phase begins.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::sigma;
use crate::lattice::{Direction, GridPoint, InstructionStream, Segment};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SweepError {
    #[error("invalid strategy configuration: {0}")]
    InvalidConfig(String),
    #[error("a phase cannot start at t = {0}; the first phase needs t >= 16")]
    PhaseTooEarly(u64),
    #[error("offset {offset} is outside 1..={range}")]
    OffsetOutOfRange { offset: u64, range: u64 },
    #[error("home {home} is outside the first sweep box (+-{x_extent:.3}, +-{y_extent:.3}) at t0 = {t0}")]
    HomeOutsideBox {
        home: GridPoint,
        x_extent: f64,
        y_extent: f64,
        t0: u64,
    },
    #[error("cannot centre the sweep on {center}: it lies more than t0 = {t0} steps away")]
    CenterUnreachable { center: GridPoint, t0: u64 },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// How the box half-extents `A` and `B` are derived from `(p0, a)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoxConvention {
    /// `A = a * sigma1(p0)`, `B = a * sigma2(p0)`.
    #[default]
    Sigma,
    /// `A = a * (p0/2) * sqrt(3 - 2 p0)`, `B = a * p0 / 2`.
    SigmaSquared,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrategyConfig {
    /// Largest error probability the strategy is designed for.
    pub p0: f64,
    /// Box scale in units of the per-step standard deviations.
    pub a: f64,
    /// Target tail exponent.
    pub alpha: f64,
    /// Time at which the first phase starts.
    pub t0: u64,
    pub instruction_seed: u64,
    pub box_convention: BoxConvention,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            p0: 0.01139,
            a: 4.566,
            alpha: 1.0,
            t0: 256,
            instruction_seed: 0,
            box_convention: BoxConvention::Sigma,
        }
    }
}

impl StrategyConfig {
    pub fn validate(&self) -> Result<(), SweepError> {
        let bad = |m: String| Err(SweepError::InvalidConfig(m));
        if !(self.p0 > 0.0 && self.p0 < 1.0) {
            return bad(format!("p0 = {} must lie in (0, 1)", self.p0));
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return bad(format!("a = {} must be positive", self.a));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha = {} must be positive", self.alpha));
        }
        if self.t0 < 16 {
            return bad(format!("t0 = {} must be at least 16", self.t0));
        }
        if self.t0 % 2 == 1 {
            return bad(format!(
                "t0 = {} must be even so the warm-up returns to the origin",
                self.t0
            ));
        }
        Ok(())
    }

    pub fn box_constants(&self) -> BoxConstants {
        match self.box_convention {
            BoxConvention::Sigma => derive_box_constants(self.p0, self.a),
            BoxConvention::SigmaSquared => derive_box_constants_literal(self.p0, self.a),
        }
    }

    pub fn phase_parameters(&self, t: u64) -> Result<PhaseGeometry, SweepError> {
        let c = self.box_constants();
        phase_parameters(t, self.p0, c.a_width, c.b_height)
    }

    /// Checks that home lies in the first box, `|x| <= A sqrt(t0) / (1 - p0)`
    /// and `|y| <= B sqrt(t0) / (1 - p0)`.
    pub fn check_home(&self, home: GridPoint) -> Result<(), SweepError> {
        let c = self.box_constants();
        let scale = (self.t0 as f64).sqrt() / (1.0 - self.p0);
        let x_extent = c.a_width * scale;
        let y_extent = c.b_height * scale;
        if (home.x.abs() as f64) <= x_extent && (home.y.abs() as f64) <= y_extent {
            Ok(())
        } else {
            Err(SweepError::HomeOutsideBox {
                home,
                x_extent,
                y_extent,
                t0: self.t0,
            })
        }
    }
}

/// Box half-extents per `sqrt(t)`: `A` horizontally, `B` vertically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxConstants {
    pub a_width: f64,
    pub b_height: f64,
}

pub fn derive_box_constants(p0: f64, a: f64) -> BoxConstants {
    let (s1, s2) = sigma(p0);
    BoxConstants {
        a_width: a * s1,
        b_height: a * s2,
    }
}

/// The `sigma^2`-scaled variant of [`derive_box_constants`].
pub fn derive_box_constants_literal(p0: f64, a: f64) -> BoxConstants {
    BoxConstants {
        a_width: a * (p0 / 2.0) * (3.0 - 2.0 * p0).sqrt(),
        b_height: a * p0 / 2.0,
    }
}

/// Smallest `c` with `c^3 >= t`.
pub fn ceil_cbrt(t: u64) -> u64 {
    let mut c = (t as f64).cbrt().round() as u64;
    while c.pow(3) < t {
        c += 1;
    }
    while c > 0 && (c - 1).pow(3) >= t {
        c -= 1;
    }
    c
}

/// Everything about a phase except its random offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseGeometry {
    pub t: u64,
    pub width: u64,
    pub height: u64,
    pub gap: u64,
    pub lines: u64,
}

impl PhaseGeometry {
    /// `G + ceil(t^(1/3))`, the number of values the offset can take.
    pub fn offset_range(&self) -> u64 {
        self.gap + ceil_cbrt(self.t)
    }

    /// Total instruction count; the offset does not enter.
    pub fn length(&self) -> u64 {
        let (w, n, g) = (self.width, self.lines, self.gap);
        2 * w + 2 * w * n + 2 * n * g + 2 * ceil_cbrt(self.t)
    }

    pub fn with_offset(self, offset: u64) -> Result<PhasePlan, SweepError> {
        let range = self.offset_range();
        if !(1..=range).contains(&offset) {
            return Err(SweepError::OffsetOutOfRange { offset, range });
        }
        Ok(PhasePlan {
            geometry: self,
            offset,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhasePlan {
    pub geometry: PhaseGeometry,
    /// `Z`, in `1..=geometry.offset_range()`.
    pub offset: u64,
}

impl PhasePlan {
    pub fn length(&self) -> u64 {
        self.geometry.length()
    }

    /// `t W H G N Z length`, space separated.
    pub fn to_line(&self) -> String {
        let g = &self.geometry;
        format!(
            "{} {} {} {} {} {} {}",
            g.t,
            g.width,
            g.height,
            g.gap,
            g.lines,
            self.offset,
            self.length()
        )
    }

    pub fn parse_line(line: &str) -> Result<PhasePlan, String> {
        let fields: Vec<u64> = line
            .split_whitespace()
            .map(|f| f.parse::<u64>().map_err(|e| format!("{f:?}: {e}")))
            .collect::<Result<_, _>>()?;
        let [t, width, height, gap, lines, offset, length] = fields[..] else {
            return Err(format!("expected 7 fields, found {}", fields.len()));
        };
        let geometry = PhaseGeometry {
            t,
            width,
            height,
            gap,
            lines,
        };
        let plan = geometry.with_offset(offset).map_err(|e| e.to_string())?;
        if plan.length() != length {
            return Err(format!(
                "length {length} does not match the parameters (expected {})",
                plan.length()
            ));
        }
        Ok(plan)
    }
}

/// Phase parameters for a phase starting at `t`:
/// `W = ceil(A sqrt(t) / (1-p0))`, `H = ceil(B sqrt(t) / (1-p0))`,
/// `G = ceil(sqrt(t) / ((1-p0) ln t))`, `N = ceil(2H / G)`.
pub fn phase_parameters(
    t: u64,
    p0: f64,
    a_width: f64,
    b_height: f64,
) -> Result<PhaseGeometry, SweepError> {
    if t < 16 {
        return Err(SweepError::PhaseTooEarly(t));
    }
    let root = (t as f64).sqrt();
    let keep = 1.0 - p0;
    let width = ((a_width * root / keep).ceil() as u64).max(1);
    let height = ((b_height * root / keep).ceil() as u64).max(1);
    let gap = ((root / (keep * (t as f64).ln())).ceil() as u64).max(1);
    let lines = (2 * height).div_ceil(gap);
    Ok(PhaseGeometry {
        t,
        width,
        height,
        gap,
        lines,
    })
}

/// The instruction block of one phase as runs.
pub fn phase_segments(plan: &PhasePlan) -> Vec<Segment> {
    use Direction::*;
    let g = &plan.geometry;
    let cube = ceil_cbrt(g.t);
    let mut out = Vec::with_capacity(2 * g.lines as usize + 6);
    out.push(Segment::new(West, g.width));
    out.push(Segment::new(South, g.height));
    out.push(Segment::new(North, plan.offset));
    for i in 0..g.lines {
        if i > 0 {
            out.push(Segment::new(North, g.gap));
        }
        let dir = if i % 2 == 0 { East } else { West };
        out.push(Segment::new(dir, 2 * g.width));
    }
    out.push(Segment::new(North, g.gap + cube - plan.offset));
    // after an odd number of lines the walk ends on the east side
    let back_x = if g.lines % 2 == 1 { West } else { East };
    out.push(Segment::new(back_x, g.width));
    // climbed N*G + cube - H above the origin, which is positive since N*G >= 2H
    out.push(Segment::new(South, g.lines * g.gap + cube - g.height));
    out.retain(|s| s.len > 0);
    out
}

pub fn phase_instructions(plan: &PhasePlan) -> Vec<Direction> {
    phase_segments(plan)
        .into_iter()
        .flat_map(|s| std::iter::repeat_n(s.direction, s.len as usize))
        .collect()
}

/// Offset `Z` of phase `phase_index`, uniform on `1..=range`.
pub fn draw_offset(instruction_seed: u64, phase_index: u64, range: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(instruction_seed);
    rng.set_stream(phase_index);
    rng.random_range(1..=range)
}

/// Phase start times `t0 < t1 < ...`, all at most `horizon`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule {
    pub starts: Vec<u64>,
}

impl Schedule {
    pub fn durations(&self) -> Vec<u64> {
        self.starts.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

pub fn build_schedule(config: &StrategyConfig, horizon: u64) -> Result<Schedule, SweepError> {
    config.validate()?;
    let mut starts = Vec::new();
    let mut t = config.t0;
    while t <= horizon {
        starts.push(t);
        t += config.phase_parameters(t)?.length();
    }
    Ok(Schedule { starts })
}

/// Plans (with their offsets) of every phase starting at or before `horizon`.
pub fn phase_table(config: &StrategyConfig, horizon: u64) -> Result<Vec<PhasePlan>, SweepError> {
    let schedule = build_schedule(config, horizon)?;
    schedule
        .starts
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let g = config.phase_parameters(t)?;
            g.with_offset(draw_offset(config.instruction_seed, i as u64, g.offset_range()))
        })
        .collect()
}

pub fn write_phase_table(plans: &[PhasePlan]) -> String {
    let mut out = String::from("# t W H G N Z length\n");
    for plan in plans {
        let _ = writeln!(out, "{}", plan.to_line());
    }
    out
}

pub fn parse_phase_table(text: &str) -> Result<Vec<PhasePlan>, SweepError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .map(|(i, l)| {
            PhasePlan::parse_line(l).map_err(|msg| SweepError::Parse { line: i + 1, msg })
        })
        .collect()
}

struct SweepSource {
    config: StrategyConfig,
    next_start: u64,
    phase_index: u64,
    pending: VecDeque<Segment>,
}

impl Iterator for SweepSource {
    type Item = Segment;

    fn next(&mut self) -> Option<Segment> {
        if self.pending.is_empty() {
            let geometry = self
                .config
                .phase_parameters(self.next_start)
                .expect("validated config starts phases at t >= 16");
            let offset = draw_offset(
                self.config.instruction_seed,
                self.phase_index,
                geometry.offset_range(),
            );
            let plan = PhasePlan { geometry, offset };
            self.pending.extend(phase_segments(&plan));
            self.next_start += plan.length();
            self.phase_index += 1;
        }
        self.pending.pop_front()
    }
}

fn shuttle(pairs: u64) -> impl Iterator<Item = Segment> + Send {
    (0..pairs).flat_map(|_| {
        [
            Segment::new(Direction::North, 1),
            Segment::new(Direction::South, 1),
        ]
    })
}

/// The infinite instruction stream: a `t0`-step warm-up shuttle followed by
/// the phases of the schedule.
pub fn instruction_stream(config: &StrategyConfig) -> Result<InstructionStream, SweepError> {
    config.validate()?;
    let source = SweepSource {
        config: *config,
        next_start: config.t0,
        phase_index: 0,
        pending: VecDeque::new(),
    };
    Ok(InstructionStream::from_segments(
        shuttle(config.t0 / 2).chain(source),
    ))
}

/// Variant of [`instruction_stream`] whose sweeps are centred on
/// `ceil(home / (1 - p0))` instead of the origin. The warm-up walks to the
/// centre and shuttles there until `t0`.
pub fn instruction_stream_centered(
    config: &StrategyConfig,
    home: GridPoint,
) -> Result<InstructionStream, SweepError> {
    config.validate()?;
    let keep = 1.0 - config.p0;
    let mut center = GridPoint::new(
        (home.x as f64 / keep).ceil() as i64,
        (home.y as f64 / keep).ceil() as i64,
    );
    // the approach must leave an even number of warm-up steps
    if (center.l1_norm() + config.t0) % 2 == 1 {
        center.x += if center.x >= 0 { 1 } else { -1 };
    }
    let approach = center.l1_norm();
    if approach > config.t0 {
        return Err(SweepError::CenterUnreachable {
            center,
            t0: config.t0,
        });
    }
    let horizontal = if center.x >= 0 {
        Direction::East
    } else {
        Direction::West
    };
    let vertical = if center.y >= 0 {
        Direction::North
    } else {
        Direction::South
    };
    let prefix = vec![
        Segment::new(horizontal, center.x.unsigned_abs()),
        Segment::new(vertical, center.y.unsigned_abs()),
    ];
    let source = SweepSource {
        config: *config,
        next_start: config.t0,
        phase_index: 0,
        pending: VecDeque::new(),
    };
    Ok(InstructionStream::from_segments(
        prefix
            .into_iter()
            .chain(shuttle((config.t0 - approach) / 2))
            .chain(source),
    ))
}
