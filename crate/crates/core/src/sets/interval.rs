use crate::error::{Error, Result};

/// Finite union of disjoint closed intervals, or the whole line.
///
/// Intervals are kept sorted with strict gaps between them; touching or
/// overlapping input intervals are merged. The full-line marker never
/// coexists with finite intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
    full_line: bool,
}

impl IntervalUnion {
    pub fn new(intervals: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut v: Vec<(f64, f64)> = intervals.into_iter().collect();
        for &(a, b) in &v {
            if !(a.is_finite() && b.is_finite() && a <= b) {
                return Err(Error::domain(format!("invalid interval [{a}, {b}]")));
            }
        }
        normalize(&mut v);
        Ok(IntervalUnion {
            intervals: v,
            full_line: false,
        })
    }

    pub fn interval(a: f64, b: f64) -> Result<Self> {
        Self::new([(a, b)])
    }

    /// `[-a, a]`
    pub fn symmetric(a: f64) -> Result<Self> {
        Self::interval(-a, a)
    }

    pub fn full_line() -> Self {
        IntervalUnion {
            intervals: Vec::new(),
            full_line: true,
        }
    }

    pub fn empty() -> Self {
        IntervalUnion {
            intervals: Vec::new(),
            full_line: false,
        }
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_full_line(&self) -> bool {
        self.full_line
    }

    pub fn is_empty(&self) -> bool {
        !self.full_line && self.intervals.is_empty()
    }

    /// A single bounded interval (convex and non-empty).
    pub fn as_single(&self) -> Option<(f64, f64)> {
        match self.intervals.as_slice() {
            [iv] if !self.full_line => Some(*iv),
            _ => None,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.full_line || self.intervals.iter().any(|&(a, b)| a <= x && x <= b)
    }

    pub fn is_symmetric(&self) -> bool {
        if self.full_line {
            return true;
        }
        let n = self.intervals.len();
        (0..n).all(|i| {
            let (a, b) = self.intervals[i];
            let (c, d) = self.intervals[n - 1 - i];
            a == -d && b == -c
        })
    }

    /// Total length; infinite for the full line.
    pub fn length(&self) -> f64 {
        if self.full_line {
            f64::INFINITY
        } else {
            self.intervals.iter().map(|(a, b)| b - a).sum()
        }
    }

    /// Bounds of the convex hull.
    pub fn hull(&self) -> Option<(f64, f64)> {
        if self.full_line {
            return Some((f64::NEG_INFINITY, f64::INFINITY));
        }
        Some((self.intervals.first()?.0, self.intervals.last()?.1))
    }

    pub fn scale(&self, t: f64) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::domain(format!("dilation factor must be >= 0, got {t}")));
        }
        if self.full_line {
            // 0 * R is the origin
            return if t == 0.0 {
                Self::interval(0.0, 0.0)
            } else {
                Ok(self.clone())
            };
        }
        Self::new(self.intervals.iter().map(|&(a, b)| (t * a, t * b)))
    }

    pub fn translate(&self, by: f64) -> Result<Self> {
        if self.full_line {
            return Ok(self.clone());
        }
        Self::new(self.intervals.iter().map(|&(a, b)| (a + by, b + by)))
    }

    /// `alpha A + beta B` for nonnegative weights.
    pub fn linear_combination(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        if self.is_empty() || other.is_empty() {
            return Err(Error::domain("Minkowski combination of an empty set"));
        }
        if !(alpha >= 0.0 && beta >= 0.0) {
            return Err(Error::domain("combination weights must be nonnegative"));
        }
        if beta == 0.0 {
            return self.scale(alpha);
        }
        if alpha == 0.0 {
            return other.scale(beta);
        }
        if self.full_line || other.full_line {
            return Ok(Self::full_line());
        }
        let mut sums = Vec::with_capacity(self.intervals.len() * other.intervals.len());
        for &(a, b) in &self.intervals {
            for &(c, d) in &other.intervals {
                sums.push((alpha * a + beta * c, alpha * b + beta * d));
            }
        }
        Self::new(sums)
    }
}

fn normalize(v: &mut Vec<(f64, f64)>) {
    v.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(v.len());
    for &(a, b) in v.iter() {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    *v = out;
}

/// The Minkowski combination `(1 - lambda) A + lambda B`.
///
/// `lambda = 0` returns `A` and `lambda = 1` returns `B` exactly.
pub fn mink_combine_1d(a: &IntervalUnion, b: &IntervalUnion, lambda: f64) -> Result<IntervalUnion> {
    check_lambda(lambda)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::domain("Minkowski combination of an empty set"));
    }
    if lambda == 0.0 {
        return Ok(a.clone());
    }
    if lambda == 1.0 {
        return Ok(b.clone());
    }
    a.linear_combination(1.0 - lambda, b, lambda)
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if (0.0..=1.0).contains(&lambda) {
        Ok(())
    } else {
        Err(Error::domain(format!("lambda = {lambda} outside [0, 1]")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn iu(v: &[(f64, f64)]) -> IntervalUnion {
        IntervalUnion::new(v.iter().copied()).unwrap()
    }

    #[test]
    fn normalization_merges_touching() {
        let u = iu(&[(1.0, 2.0), (0.0, 1.0), (3.0, 4.0), (3.5, 3.7)]);
        assert_eq!(u.intervals(), &[(0.0, 2.0), (3.0, 4.0)]);
    }

    #[test]
    fn combination_examples() {
        let a = iu(&[(0.0, 1.0), (3.0, 4.0)]);
        let b = iu(&[(0.0, 1.0)]);
        let c = mink_combine_1d(&a, &b, 0.5).unwrap();
        assert_eq!(c.intervals(), &[(0.0, 1.0), (1.5, 2.5)]);

        let a = iu(&[(-1.0, 1.0)]);
        let b = iu(&[(-2.0, 2.0)]);
        assert_eq!(mink_combine_1d(&a, &b, 0.0).unwrap(), a);
        assert_eq!(mink_combine_1d(&a, &b, 1.0).unwrap(), b);

        let (x, y) = (0.3, 1.7);
        let c = mink_combine_1d(
            &IntervalUnion::symmetric(x).unwrap(),
            &IntervalUnion::symmetric(y).unwrap(),
            0.5,
        )
        .unwrap();
        assert_eq!(c.intervals(), &[(-(x + y) / 2.0, (x + y) / 2.0)]);
    }

    #[test]
    fn full_line_absorbs() {
        let a = IntervalUnion::full_line();
        let b = iu(&[(0.0, 1.0)]);
        assert!(mink_combine_1d(&a, &b, 0.5).unwrap().is_full_line());
        assert_eq!(mink_combine_1d(&a, &b, 1.0).unwrap(), b);
    }

    #[test]
    fn empty_is_domain_error() {
        let b = iu(&[(0.0, 1.0)]);
        assert!(mink_combine_1d(&IntervalUnion::empty(), &b, 0.5).is_err());
        assert!(mink_combine_1d(&b, &b, 1.5).is_err());
    }

    #[test]
    fn dilation() {
        let a = iu(&[(-1.0, 1.0)]);
        assert_eq!(a.scale(2.0).unwrap().intervals(), &[(-2.0, 2.0)]);
        assert_eq!(a.scale(0.0).unwrap().length(), 0.0);
        assert!(a.scale(-1.0).is_err());
        let u = iu(&[(-1.0, -0.5), (0.2, 2.0)]);
        assert_eq!(u.scale(0.5).unwrap().scale(3.0).unwrap(), u.scale(1.5).unwrap());
    }

    #[test]
    fn convex_combination_is_idempotent() {
        let a = iu(&[(-0.4, 2.5)]);
        let c = mink_combine_1d(&a, &a, 0.37).unwrap();
        let (lo, hi) = c.as_single().unwrap();
        assert!((lo + 0.4).abs() < 1e-15 && (hi - 2.5).abs() < 1e-15);
    }
}
