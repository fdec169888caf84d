use std::env;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_probability, Direction, GridPoint, LatticeError};

/// Upper bound on the bytes the convolution DP may allocate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryCap(pub u64);

impl MemoryCap {
    pub const ENV_VAR: &'static str = "HOMEWALK_MEM_CAP_BYTES";

    /// Reads the cap from `HOMEWALK_MEM_CAP_BYTES`, falling back to the
    /// default when unset or unparsable.
    pub fn from_env() -> Self {
        env::var(Self::ENV_VAR)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .map(MemoryCap)
            .unwrap_or_default()
    }
}

impl Default for MemoryCap {
    fn default() -> Self {
        MemoryCap(2 << 30)
    }
}

/// Inclusive bounding box `[x_min, x_max] x [y_min, y_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub x_min: i64,
    pub x_max: i64,
    pub y_min: i64,
    pub y_max: i64,
}

impl Window {
    pub fn centered(radius: i64) -> Self {
        Window {
            x_min: -radius,
            x_max: radius,
            y_min: -radius,
            y_max: radius,
        }
    }

    pub fn width(&self) -> usize {
        (self.x_max - self.x_min + 1) as usize
    }

    pub fn height(&self) -> usize {
        (self.y_max - self.y_min + 1) as usize
    }

    pub fn contains(&self, p: GridPoint) -> bool {
        (self.x_min..=self.x_max).contains(&p.x) && (self.y_min..=self.y_max).contains(&p.y)
    }

    fn index(&self, p: GridPoint) -> Option<usize> {
        self.contains(p).then(|| {
            (p.y - self.y_min) as usize * self.width() + (p.x - self.x_min) as usize
        })
    }
}

/// Exact law of `X_t` on a window holding every cell reachable in `t` steps.
/// `mass` is row-major with rows running from `y_min` to `y_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistributionGrid {
    t: usize,
    window: Window,
    mass: Vec<f64>,
}

impl DistributionGrid {
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn mass_at(&self, p: GridPoint) -> f64 {
        self.window.index(p).map_or(0.0, |i| self.mass[i])
    }

    pub fn iter(&self) -> impl Iterator<Item = (GridPoint, f64)> + '_ {
        let w = self.window;
        let width = w.width();
        self.mass.iter().enumerate().map(move |(i, &m)| {
            let p = GridPoint::new(w.x_min + (i % width) as i64, w.y_min + (i / width) as i64);
            (p, m)
        })
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn mean(&self) -> (f64, f64) {
        self.iter().fold((0.0, 0.0), |(mx, my), (p, m)| {
            (mx + m * p.x as f64, my + m * p.y as f64)
        })
    }

    /// `(var_x, var_y)`.
    pub fn variance(&self) -> (f64, f64) {
        let (mx, my) = self.mean();
        self.iter().fold((0.0, 0.0), |(vx, vy), (p, m)| {
            let dx = p.x as f64 - mx;
            let dy = p.y as f64 - my;
            (vx + m * dx * dx, vy + m * dy * dy)
        })
    }
}

/// Kernel weights in `Direction::ALL` order for a given instruction.
fn kernel(instruction: Direction, p: f64) -> [f64; 4] {
    let mut w = [p / 4.0; 4];
    let k = Direction::ALL.iter().position(|&d| d == instruction).unwrap();
    w[k] = 1.0 - 0.75 * p;
    w
}

/// Dense double-buffered convolution over a square window of radius `n`
/// padded by one cell so the stencil never leaves the buffer.
struct Convolver {
    n: i64,
    side: usize,
    cur: Vec<f64>,
    next: Vec<f64>,
    steps: i64,
}

impl Convolver {
    fn new(n: usize, cap: MemoryCap) -> Result<Self, LatticeError> {
        let side = 2 * n as u64 + 3;
        let cells = u128::from(side) * u128::from(side);
        // two work buffers plus the cropped output
        let required = cells * 8 * 3;
        if required > u128::from(cap.0) {
            return Err(LatticeError::MemoryCapExceeded {
                side,
                required,
                cap: cap.0,
            });
        }
        let side = side as usize;
        let mut cur = vec![0.0; side * side];
        let next = vec![0.0; side * side];
        let n = n as i64;
        cur[Self::idx_raw(n, side, GridPoint::ORIGIN)] = 1.0;
        Ok(Convolver {
            n,
            side,
            cur,
            next,
            steps: 0,
        })
    }

    fn idx_raw(n: i64, side: usize, p: GridPoint) -> usize {
        (p.y + n + 1) as usize * side + (p.x + n + 1) as usize
    }

    fn idx(&self, p: GridPoint) -> Option<usize> {
        (p.max_norm() as i64 <= self.n).then(|| Self::idx_raw(self.n, self.side, p))
    }

    fn advance(&mut self, instruction: Direction, p: f64) {
        self.steps += 1;
        let s = self.steps;
        let [w_n, w_e, w_s, w_w] = kernel(instruction, p);
        let side = self.side;
        let n = self.n;
        let cur = &self.cur;
        let lo = (n + 1 - s) as usize;
        let hi = (n + 1 + s) as usize;
        self.next[lo * side..(hi + 1) * side]
            .par_chunks_mut(side)
            .enumerate()
            .for_each(|(r, row)| {
                let y = lo + r;
                let below = &cur[(y - 1) * side..y * side];
                let here = &cur[y * side..(y + 1) * side];
                let above = &cur[(y + 1) * side..(y + 2) * side];
                for x in lo..=hi {
                    // mass reaching (x, y) by a North step came from (x, y-1), etc.
                    row[x] = w_n * below[x] + w_e * here[x - 1] + w_s * above[x] + w_w * here[x + 1];
                }
            });
        std::mem::swap(&mut self.cur, &mut self.next);
    }

    fn take_at(&mut self, p: GridPoint) -> f64 {
        match self.idx(p) {
            Some(i) => std::mem::replace(&mut self.cur[i], 0.0),
            None => 0.0,
        }
    }

    fn into_grid(self) -> DistributionGrid {
        let n = self.n;
        let width = (2 * n + 1) as usize;
        let mut mass = Vec::with_capacity(width * width);
        for row in 1..=width {
            mass.extend_from_slice(&self.cur[row * self.side + 1..row * self.side + 1 + width]);
        }
        DistributionGrid {
            t: n as usize,
            window: Window::centered(n),
            mass,
        }
    }
}

/// Exact distribution of the walk after following `instructions` from the
/// origin, by one convolution per instruction.
pub fn exact_distribution(
    instructions: &[Direction],
    p: f64,
    cap: MemoryCap,
) -> Result<DistributionGrid, LatticeError> {
    check_probability(p)?;
    let mut conv = Convolver::new(instructions.len(), cap)?;
    for &d in instructions {
        conv.advance(d, p);
    }
    Ok(conv.into_grid())
}

/// `P(T = t)` for `t = 0..=instructions.len()`, where `T` is the first time
/// the walk stands on `home`. Mass arriving at home is recorded and removed
/// before the next convolution.
pub fn first_passage_distribution(
    instructions: &[Direction],
    p: f64,
    home: GridPoint,
    cap: MemoryCap,
) -> Result<Vec<(u64, f64)>, LatticeError> {
    check_probability(p)?;
    let mut conv = Convolver::new(instructions.len(), cap)?;
    let mut out = Vec::with_capacity(instructions.len() + 1);
    out.push((0, conv.take_at(home)));
    for (i, &d) in instructions.iter().enumerate() {
        conv.advance(d, p);
        out.push((i as u64 + 1, conv.take_at(home)));
    }
    Ok(out)
}

/// Most likely cell, ties going to the lexicographically smallest `(x, y)`.
pub fn max_point_probability(dist: &DistributionGrid) -> (GridPoint, f64) {
    let mut best = (GridPoint::ORIGIN, f64::NEG_INFINITY);
    for (p, m) in dist.iter() {
        if m > best.1 || (m == best.1 && p < best.0) {
            best = (p, m);
        }
    }
    best
}
