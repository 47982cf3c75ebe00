//! One-dimensional quadratics and interval sets for the exact line search
//! inside the randomization step.
//!
//! Restricting the problem to a line `u(a) = q + a d` turns every quadratic
//! piece into a scalar quadratic in `a` with nonnegative leading
//! coefficient. A `>=` constraint then admits a complement-of-interval
//! solution set and a `<=` constraint an interval; feasibility along the
//! line is the intersection of finitely many such sets.

/// `q(a) = c2 a^2 + c1 a + c0` with `c2 >= 0` (pieces are PSD forms).
#[derive(Debug, Clone, Copy)]
pub struct LineQuad {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
}

impl LineQuad {
    pub fn eval(&self, a: f64) -> f64 {
        (self.c2 * a + self.c1) * a + self.c0
    }

    /// Vertex location when strictly convex.
    pub fn vertex(&self) -> Option<f64> {
        (self.c2 > 0.0).then(|| -self.c1 / (2.0 * self.c2))
    }

    fn is_linear(&self) -> bool {
        self.c2 <= 1e-14 * self.c1.abs().max(self.c0.abs()).max(1.0)
    }

    /// Real roots of `q(a) = level`, ascending. Numerically stable form.
    pub fn roots_at(&self, level: f64) -> Option<(f64, f64)> {
        if self.is_linear() {
            return None;
        }
        solve_quadratic(self.c2, self.c1, self.c0 - level)
    }

    /// Crossing points of two quadratics, ascending.
    pub fn crossings(&self, other: &LineQuad) -> Vec<f64> {
        let (c2, c1, c0) = (self.c2 - other.c2, self.c1 - other.c1, self.c0 - other.c0);
        let scale = c1.abs().max(c0.abs()).max(1.0);
        if c2.abs() <= 1e-14 * scale {
            if c1.abs() <= 1e-14 * c0.abs().max(1.0) {
                return vec![];
            }
            return vec![-c0 / c1];
        }
        match solve_quadratic(c2, c1, c0) {
            Some((r1, r2)) => vec![r1, r2],
            None => vec![],
        }
    }
}

/// Both real roots of `c2 x^2 + c1 x + c0 = 0` (c2 != 0), ascending, using
/// the cancellation-free formulation.
fn solve_quadratic(c2: f64, c1: f64, c0: f64) -> Option<(f64, f64)> {
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let sgn = if c1 >= 0.0 { 1.0 } else { -1.0 };
    let q = -0.5 * (c1 + sgn * sq);
    let (r1, r2) = if q != 0.0 {
        (q / c2, c0 / q)
    } else {
        let r = -c1 / (2.0 * c2);
        (r, r)
    };
    Some(if r1 <= r2 { (r1, r2) } else { (r2, r1) })
}

/// A finite union of disjoint closed intervals, sorted ascending.
/// Unbounded ends use `f64::INFINITY`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet {
    pub spans: Vec<(f64, f64)>,
}

impl IntervalSet {
    pub fn all() -> Self {
        Self { spans: vec![(f64::NEG_INFINITY, f64::INFINITY)] }
    }

    pub fn empty() -> Self {
        Self { spans: vec![] }
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn of(lo: f64, hi: f64) -> Self {
        if lo > hi {
            Self::empty()
        } else {
            Self { spans: vec![(lo, hi)] }
        }
    }

    /// Complement of the open interval (lo, hi).
    pub fn outside(lo: f64, hi: f64) -> Self {
        Self { spans: vec![(f64::NEG_INFINITY, lo), (hi, f64::INFINITY)] }
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.spans.iter().any(|&(lo, hi)| x >= lo - tol && x <= hi + tol)
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.spans.len() && j < other.spans.len() {
            let (lo1, hi1) = self.spans[i];
            let (lo2, hi2) = other.spans[j];
            let lo = lo1.max(lo2);
            let hi = hi1.min(hi2);
            if lo <= hi {
                out.push((lo, hi));
            }
            if hi1 < hi2 {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalSet { spans: out }
    }

}

/// Feasible set `{a : q(a) >= level}` for a convex quadratic.
pub fn ge_set(q: &LineQuad, level: f64) -> IntervalSet {
    if q.is_linear() {
        let scale = q.c0.abs().max(level.abs()).max(1.0);
        if q.c1.abs() <= 1e-14 * scale {
            return if q.c0 >= level { IntervalSet::all() } else { IntervalSet::empty() };
        }
        let root = (level - q.c0) / q.c1;
        return if q.c1 > 0.0 {
            IntervalSet::of(root, f64::INFINITY)
        } else {
            IntervalSet::of(f64::NEG_INFINITY, root)
        };
    }
    match q.roots_at(level) {
        None => IntervalSet::all(),
        Some((r1, r2)) => IntervalSet::outside(r1, r2),
    }
}

/// Feasible set `{a : q(a) <= level}` for a convex quadratic.
pub fn le_set(q: &LineQuad, level: f64) -> IntervalSet {
    if q.is_linear() {
        let scale = q.c0.abs().max(level.abs()).max(1.0);
        if q.c1.abs() <= 1e-14 * scale {
            return if q.c0 <= level { IntervalSet::all() } else { IntervalSet::empty() };
        }
        let root = (level - q.c0) / q.c1;
        return if q.c1 > 0.0 {
            IntervalSet::of(f64::NEG_INFINITY, root)
        } else {
            IntervalSet::of(root, f64::INFINITY)
        };
    }
    match q.roots_at(level) {
        None => IntervalSet::empty(),
        Some((r1, r2)) => IntervalSet::of(r1, r2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn roots_are_stable_and_ordered() {
        let q = LineQuad { c2: 1.0, c1: -3.0, c0: 2.0 };
        let (r1, r2) = q.roots_at(0.0).unwrap();
        assert_relative_eq!(r1, 1.0, epsilon = 1e-12);
        assert_relative_eq!(r2, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn ge_set_of_parabola_is_two_rays() {
        let q = LineQuad { c2: 1.0, c1: 0.0, c0: 0.0 }; // a^2 >= 4  ->  |a| >= 2
        let s = ge_set(&q, 4.0);
        assert_eq!(s.spans.len(), 2);
        assert!(s.contains(-2.0, 1e-12) && s.contains(3.0, 0.0));
        assert!(!s.contains(0.0, 1e-12));
    }

    #[test]
    fn le_set_of_parabola_is_interval() {
        let q = LineQuad { c2: 2.0, c1: 0.0, c0: 1.0 };
        let s = le_set(&q, 9.0); // 2a^2 + 1 <= 9 -> |a| <= 2
        assert_eq!(s.spans.len(), 1);
        assert_relative_eq!(s.spans[0].0, -2.0, epsilon = 1e-12);
        assert_relative_eq!(s.spans[0].1, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn intersection_of_rays_and_interval() {
        let rays = IntervalSet::outside(-1.0, 1.0);
        let box_ = IntervalSet::of(0.0, 3.0);
        let got = rays.intersect(&box_);
        assert_eq!(got.spans, vec![(1.0, 3.0)]);
    }

    #[test]
    fn infeasible_constant_ge() {
        let q = LineQuad { c2: 0.0, c1: 0.0, c0: 0.5 };
        assert!(ge_set(&q, 1.0).is_empty());
        assert!(!le_set(&q, 1.0).is_empty());
    }

}
