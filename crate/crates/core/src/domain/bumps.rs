use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::grid::{Grid, GridFunction};
use super::spec::{dist, DomainSpec};
use super::DomainError;
use crate::qalgebra::CQuaternion;

/// `exp(1 - 1/(1 - r^2))` for `r < 1`, zero otherwise. Smooth, peak 1.
pub fn bump_profile(r: f64) -> f64 {
    if r >= 1.0 {
        0.0
    } else {
        (1.0 - 1.0 / (1.0 - r * r)).exp()
    }
}

/// A smooth bump with a random amplitude, supported in a ball inside the
/// domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bump {
    pub center: [f64; 3],
    pub radius: f64,
    pub amplitude: CQuaternion,
}

impl Bump {
    pub fn eval(&self, x: [f64; 3]) -> CQuaternion {
        self.amplitude
            .scale(bump_profile(dist(x, self.center) / self.radius))
    }

    pub fn sample(&self, grid: &Grid) -> GridFunction {
        GridFunction::from_fn(grid, |x| self.eval(x))
    }
}

/// Deterministic suite of `count` bumps. Bump `k` is drawn from its own
/// ChaCha stream, so suites are prefix-stable in `count`.
pub fn bump_suite(
    domain: &DomainSpec,
    grid: &Grid,
    count: usize,
    seed: u64,
) -> Result<Vec<Bump>, DomainError> {
    let b = domain.bounds;
    let h = grid.h_max();
    let min_len = b.lengths.iter().copied().fold(f64::INFINITY, f64::min);
    (0..count)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64 + 1);
            for _ in 0..10_000 {
                let radius = min_len * rng.random_range(0.15..0.35);
                // Keep at least three grid spacings inside the ball.
                if radius < 3.0 * h {
                    continue;
                }
                let margin = radius + h;
                let mut center = [0.0; 3];
                let mut fits = true;
                for axis in 0..3 {
                    let lo = b.origin[axis] + margin;
                    let hi = b.origin[axis] + b.lengths[axis] - margin;
                    if lo >= hi {
                        fits = false;
                        break;
                    }
                    center[axis] = rng.random_range(lo..hi);
                }
                if !fits || domain.clearance(center, radius) <= h {
                    continue;
                }
                let amplitude =
                    CQuaternion::from_array(std::array::from_fn(|_| rng.random_range(-1.0..1.0)));
                return Ok(Bump {
                    center,
                    radius,
                    amplitude,
                });
            }
            Err(DomainError::NoRoomForBump)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::spec::BoxBounds;

    #[test]
    fn profile_is_compact_and_normalized() {
        assert_eq!(bump_profile(0.0), 1.0);
        assert_eq!(bump_profile(1.0), 0.0);
        assert_eq!(bump_profile(1.5), 0.0);
        assert!(bump_profile(0.999) < 1e-200);
    }

    #[test]
    fn suite_is_deterministic_and_inside() {
        let b = BoxBounds::new([-3.0; 3], [6.0; 3]);
        let d = DomainSpec::exterior_ball([0.0; 3], 1.0, b);
        let g = Grid::build(&d, [25, 25, 25]).unwrap();
        let s1 = bump_suite(&d, &g, 10, 7).unwrap();
        let s2 = bump_suite(&d, &g, 10, 7).unwrap();
        assert_eq!(s1, s2);
        for bump in &s1 {
            assert!(dist(bump.center, [0.0; 3]) - bump.radius > 1.0);
            let u = bump.sample(&g);
            // support never touches exterior nodes
            for node in 0..g.len_nodes() {
                if !g.mask()[node] {
                    assert_eq!(bump.eval(g.position(node)), CQuaternion::ZERO);
                }
            }
            assert!(u.norm() > 0.0);
        }
        let s3 = bump_suite(&d, &g, 3, 7).unwrap();
        assert_eq!(&s1[..3], &s3[..]);
    }
}
