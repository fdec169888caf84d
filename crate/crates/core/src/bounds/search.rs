//! Scalar bracketing: bisection on a boolean condition and golden-section
//! maximisation, each with a sampling check of its shape assumption.

use super::BoundsError;

/// Final bracket of a bisection: the condition holds at `lower` and fails at
/// `upper`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
    pub iterations: u32,
}

impl Bracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// Narrows `[lo, hi]` around the point where `holds` switches from true to
/// false until the bracket is at most `tol` wide.
pub fn bisect<F>(holds: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<Bracket, BoundsError>
where
    F: Fn(f64) -> bool,
{
    if !holds(lo) || holds(hi) {
        return Err(BoundsError::NoSignChange { lo, hi });
    }
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(Bracket {
        lower: lo,
        upper: hi,
        iterations,
    })
}

/// Fails unless `f` is strictly monotone (in the requested sense) over the
/// sample points.
pub fn check_strictly_monotone<F>(
    f: F,
    samples: &[f64],
    increasing: bool,
    what: &str,
) -> Result<(), BoundsError>
where
    F: Fn(f64) -> f64,
{
    let values: Vec<f64> = samples.iter().map(|&x| f(x)).collect();
    for (i, w) in values.windows(2).enumerate() {
        let ok = if increasing { w[1] > w[0] } else { w[1] < w[0] };
        if !ok {
            return Err(BoundsError::NotMonotone {
                what: what.to_string(),
                at: samples[i + 1],
            });
        }
    }
    Ok(())
}

/// `n` evenly spaced interior points of `(lo, hi]`.
pub fn sample_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (1..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .collect()
}

/// Checks that sampled values rise (weakly) to a single peak and then fall.
pub fn check_unimodal<F>(f: F, lo: f64, hi: f64, n: usize) -> Result<(), BoundsError>
where
    F: Fn(f64) -> f64,
{
    let xs: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let mut falling = false;
    for i in 1..ys.len() {
        if ys[i] < ys[i - 1] {
            falling = true;
        } else if falling && ys[i] > ys[i - 1] {
            return Err(BoundsError::NotUnimodal {
                at: xs[i],
                previous: ys[i - 1],
                value: ys[i],
            });
        }
    }
    Ok(())
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`,
/// stopping once the interval is at most `tol` wide. Returns
/// `(argmax, max, iterations)`.
pub fn golden_section_max<F>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64, u32)
where
    F: Fn(f64) -> f64,
{
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
        iterations += 1;
    }
    let x = 0.5 * (lo + hi);
    let fx = f(x);
    // a maximum on the boundary can leave the midpoint just inside it
    [(x, fx), (x1, f1), (x2, f2)]
        .into_iter()
        .fold((x, fx, iterations), |best, (xi, fi)| {
            if fi > best.1 {
                (xi, fi, iterations)
            } else {
                best
            }
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisection_finds_sqrt_two() {
        let b = bisect(|x| x * x < 2.0, 0.0, 2.0, 1e-12).unwrap();
        assert!(b.width() <= 1e-12);
        assert!((b.midpoint() - 2f64.sqrt()).abs() < 1e-12);
        assert!(b.lower * b.lower < 2.0 && b.upper * b.upper >= 2.0);
    }

    #[test]
    fn bisection_needs_a_flip() {
        assert!(matches!(
            bisect(|_| true, 0.0, 1.0, 1e-6),
            Err(BoundsError::NoSignChange { .. })
        ));
    }

    #[test]
    fn golden_section_on_parabola() {
        let (x, fx, _) = golden_section_max(|x| -(x - 1.3) * (x - 1.3) + 2.0, 0.0, 5.0, 1e-9);
        // a flat maximum pins x only to about sqrt(machine epsilon)
        assert!((x - 1.3).abs() < 1e-6);
        assert!((fx - 2.0).abs() < 1e-12);
        // increasing function: maximum on the right end
        let (x, _, _) = golden_section_max(|x| x, 0.0, 1.0, 1e-9);
        assert!((1.0 - x).abs() < 1e-8);
    }

    #[test]
    fn shape_checks() {
        assert!(check_unimodal(|x| -(x - 0.5).powi(2), 0.0, 1.0, 100).is_ok());
        assert!(check_unimodal(|x| (6.0 * x).sin(), 0.0, 3.0, 100).is_err());
        let grid = sample_grid(0.0, 1.0, 50);
        assert!(check_strictly_monotone(|x| -x, &grid, false, "f").is_ok());
        assert!(check_strictly_monotone(|x| (x - 0.5).abs(), &grid, true, "f").is_err());
    }
}
