use serde::Serialize;

use super::BoundsError;

/// Default largest step count for [`walk_counts`].
pub const DEFAULT_STEP_CAP: u32 = 64;

/// Exact numbers `W_r(a, b)` of `r`-step nearest-neighbour paths from the
/// origin to `(a, b)`, stored densely on `[-r, r]^2`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WalkCountTable {
    r: u32,
    counts: Vec<u128>,
}

impl WalkCountTable {
    fn side(r: u32) -> usize {
        2 * r as usize + 1
    }

    pub fn origin() -> Self {
        WalkCountTable {
            r: 0,
            counts: vec![1],
        }
    }

    pub fn steps(&self) -> u32 {
        self.r
    }

    /// `W_r(a, b)`; zero outside the reachable diamond or at the wrong parity.
    pub fn get(&self, a: i64, b: i64) -> u128 {
        let r = i64::from(self.r);
        if a.abs() > r || b.abs() > r {
            return 0;
        }
        let side = Self::side(self.r);
        self.counts[(b + r) as usize * side + (a + r) as usize]
    }

    /// The table for `r + 1` steps: each count is the sum over the four
    /// neighbours of the previous table.
    pub fn next(&self) -> Self {
        let r = self.r + 1;
        let side = Self::side(r);
        let ri = i64::from(r);
        let mut counts = vec![0u128; side * side];
        for b in -ri..=ri {
            for a in -ri..=ri {
                if a.abs() + b.abs() > ri || (a + b + ri).rem_euclid(2) == 1 {
                    continue;
                }
                counts[(b + ri) as usize * side + (a + ri) as usize] = self.get(a - 1, b)
                    + self.get(a + 1, b)
                    + self.get(a, b - 1)
                    + self.get(a, b + 1);
            }
        }
        WalkCountTable { r, counts }
    }

    /// Nonzero entries as `((a, b), W_r(a, b))`.
    pub fn entries(&self) -> impl Iterator<Item = ((i64, i64), u128)> + '_ {
        let side = Self::side(self.r);
        let r = i64::from(self.r);
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(move |(i, &c)| (((i % side) as i64 - r, (i / side) as i64 - r), c))
    }

    /// `W_{r,s}`: the minimum of `W_r(a, b)` over `|a| + |b| <= s` with
    /// `a + b = s (mod 2)`.
    pub fn min_within(&self, s: u32) -> u128 {
        let s = i64::from(s);
        let mut best = u128::MAX;
        for b in -s..=s {
            let rest = s - b.abs();
            for a in -rest..=rest {
                if (a + b - s).rem_euclid(2) == 0 {
                    best = best.min(self.get(a, b));
                    if best == 0 {
                        return 0;
                    }
                }
            }
        }
        best
    }
}

/// Tables for `0..=r` steps.
pub fn walk_count_tables(r: u32, cap: u32) -> Result<Vec<WalkCountTable>, BoundsError> {
    if r > cap {
        return Err(BoundsError::StepCapExceeded { r, cap });
    }
    let mut tables = Vec::with_capacity(r as usize + 1);
    tables.push(WalkCountTable::origin());
    for i in 0..r as usize {
        let next = tables[i].next();
        tables.push(next);
    }
    Ok(tables)
}

pub fn walk_counts(r: u32) -> Result<WalkCountTable, BoundsError> {
    Ok(walk_count_tables(r, DEFAULT_STEP_CAP)?
        .pop()
        .expect("at least the zero-step table"))
}

pub fn w_min(r: u32, s: u32) -> Result<u128, BoundsError> {
    Ok(walk_counts(r)?.min_within(s))
}

/// `C(n, k)` in exact arithmetic.
pub fn binomial(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * u128::from(n - i) / u128::from(i + 1))
}
