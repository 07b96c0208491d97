use std::f64::consts::PI;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

#[inline]
pub fn cross(a: Point, b: Point) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
fn add(a: Point, b: Point) -> Point {
    [a[0] + b[0], a[1] + b[1]]
}

#[inline]
fn norm(a: Point) -> f64 {
    a[0].hypot(a[1])
}

/// Relative threshold under which two edges are treated as parallel.
const PARALLEL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
        }
    }
}

/// A unit vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionUnit([f64; 2]);

impl DirectionUnit {
    pub const E1: DirectionUnit = DirectionUnit([1.0, 0.0]);
    pub const E2: DirectionUnit = DirectionUnit([0.0, 1.0]);

    pub fn new(x: f64, y: f64) -> Result<Self> {
        if ((x * x + y * y).sqrt() - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!("({x}, {y}) is not a unit vector")));
        }
        Ok(DirectionUnit([x, y]))
    }

    pub fn normalized(x: f64, y: f64) -> Result<Self> {
        let n = x.hypot(y);
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::domain("cannot normalize a zero direction"));
        }
        Ok(DirectionUnit([x / n, y / n]))
    }

    pub fn from_angle(theta: f64) -> Self {
        DirectionUnit([theta.cos(), theta.sin()])
    }

    pub fn vector(self) -> Point {
        self.0
    }

    /// The direction rotated by a quarter turn counterclockwise.
    pub fn perp(self) -> Point {
        [-self.0[1], self.0[0]]
    }

    pub fn dot(self, p: Point) -> f64 {
        self.0[0] * p[0] + self.0[1] * p[1]
    }
}

/// A strictly convex polygon with counterclockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    /// Validates a counterclockwise, strictly convex vertex cycle.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::domain("a polygon needs at least 3 vertices"));
        }
        if vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::domain("polygon vertices must be finite"));
        }
        let n = vertices.len();
        for i in 0..n {
            let e0 = sub(vertices[(i + 1) % n], vertices[i]);
            let e1 = sub(vertices[(i + 2) % n], vertices[(i + 1) % n]);
            if !(cross(e0, e1) > 0.0) {
                return Err(Error::domain(format!(
                    "vertex {} breaks strict counterclockwise convexity",
                    (i + 1) % n
                )));
            }
        }
        let p = ConvexPolygon { vertices };
        // a cycle can turn left everywhere and still wind more than once
        let turning: f64 = (0..n)
            .map(|i| {
                let e0 = sub(p.vertices[(i + 1) % n], p.vertices[i]);
                let e1 = sub(p.vertices[(i + 2) % n], p.vertices[(i + 1) % n]);
                cross(e0, e1).atan2(e0[0] * e1[0] + e0[1] * e1[1])
            })
            .sum();
        if (turning - 2.0 * PI).abs() > 1e-6 {
            return Err(Error::domain("vertex cycle winds more than once"));
        }
        Ok(p)
    }

    /// Convex hull of a point cloud (collinear points dropped).
    pub fn hull(points: &[Point]) -> Result<Self> {
        let mut pts: Vec<Point> = points.to_vec();
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        pts.dedup();
        if pts.len() < 3 {
            return Err(Error::domain("hull of fewer than 3 distinct points is degenerate"));
        }
        let mut lower: Vec<Point> = Vec::new();
        for &p in &pts {
            while lower.len() >= 2
                && cross(sub(lower[lower.len() - 1], lower[lower.len() - 2]), sub(p, lower[lower.len() - 1]))
                    <= 0.0
            {
                lower.pop();
            }
            lower.push(p);
        }
        let mut upper: Vec<Point> = Vec::new();
        for &p in pts.iter().rev() {
            while upper.len() >= 2
                && cross(sub(upper[upper.len() - 1], upper[upper.len() - 2]), sub(p, upper[upper.len() - 1]))
                    <= 0.0
            {
                upper.pop();
            }
            upper.push(p);
        }
        lower.pop();
        upper.pop();
        lower.extend(upper);
        Self::cleaned(lower)
    }

    /// Drops repeated and (nearly) collinear vertices, then validates.
    fn cleaned(mut v: Vec<Point>) -> Result<Self> {
        let scale = v
            .iter()
            .flatten()
            .fold(0.0f64, |m, c| m.max(c.abs()))
            .max(1e-300);
        loop {
            let n = v.len();
            if n < 3 {
                return Err(Error::domain("degenerate (collinear) polygon"));
            }
            let mut removed = false;
            for i in 0..n {
                let prev = v[(i + n - 1) % n];
                let cur = v[i];
                let next = v[(i + 1) % n];
                let (e0, e1) = (sub(cur, prev), sub(next, cur));
                let tiny = norm(e0) <= 1e-14 * scale || norm(e1) <= 1e-14 * scale;
                if tiny || cross(e0, e1) <= PARALLEL_EPS * norm(e0) * norm(e1) {
                    v.remove(i);
                    removed = true;
                    break;
                }
            }
            if !removed {
                break;
            }
        }
        Self::new(v)
    }

    pub fn rectangle(x0: f64, x1: f64, y0: f64, y1: f64) -> Result<Self> {
        Self::new(vec![[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    }

    pub fn unit_square() -> Self {
        Self::rectangle(0.0, 1.0, 0.0, 1.0).expect("unit square")
    }

    /// Regular `n`-gon inscribed in the circle of radius `r` around the origin.
    pub fn regular(n: usize, r: f64, phase: f64) -> Result<Self> {
        if n < 3 || !(r > 0.0) {
            return Err(Error::domain("regular polygon needs n >= 3 and r > 0"));
        }
        Self::new(
            (0..n)
                .map(|k| {
                    let a = phase + 2.0 * PI * k as f64 / n as f64;
                    [r * a.cos(), r * a.sin()]
                })
                .collect(),
        )
    }

    /// Inscribed polygonal approximation of the unit disk.
    pub fn disk(n: usize) -> Self {
        Self::regular(n, 1.0, 0.0).expect("n >= 3")
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn area(&self) -> f64 {
        let n = self.vertices.len();
        0.5 * (0..n)
            .map(|i| cross(self.vertices[i], self.vertices[(i + 1) % n]))
            .sum::<f64>()
    }

    pub fn perimeter(&self) -> f64 {
        let n = self.vertices.len();
        (0..n)
            .map(|i| norm(sub(self.vertices[(i + 1) % n], self.vertices[i])))
            .sum()
    }

    pub fn centroid(&self) -> Point {
        let n = self.vertices.len();
        let (mut cx, mut cy, mut a2) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let (p, q) = (self.vertices[i], self.vertices[(i + 1) % n]);
            let c = cross(p, q);
            a2 += c;
            cx += (p[0] + q[0]) * c;
            cy += (p[1] + q[1]) * c;
        }
        [cx / (3.0 * a2), cy / (3.0 * a2)]
    }

    /// Closed containment with a small relative slack.
    pub fn contains(&self, p: Point) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let e = sub(self.vertices[(i + 1) % n], a);
            cross(e, sub(p, a)) >= -1e-12 * norm(e) * (1.0 + norm(sub(p, a)))
        })
    }

    pub fn contains_origin(&self) -> bool {
        self.contains([0.0, 0.0])
    }

    pub fn translate(&self, by: Point) -> Self {
        ConvexPolygon {
            vertices: self.vertices.iter().map(|v| add(*v, by)).collect(),
        }
    }

    /// Dilation about the origin by `t > 0`.
    pub fn scale(&self, t: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::domain(format!("polygon dilation needs t > 0, got {t}")));
        }
        Ok(ConvexPolygon {
            vertices: self.vertices.iter().map(|v| [t * v[0], t * v[1]]).collect(),
        })
    }

    /// Homothety `c + t (P - c)`.
    pub fn scale_about(&self, center: Point, t: f64) -> Result<Self> {
        Ok(self
            .translate([-center[0], -center[1]])
            .scale(t)?
            .translate(center))
    }

    pub fn support(&self, u: Point) -> f64 {
        self.vertices
            .iter()
            .map(|v| u[0] * v[0] + u[1] * v[1])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `[min, max]` of one coordinate over the polygon.
    pub fn project_axis(&self, axis: Axis) -> (f64, f64) {
        let k = axis.index();
        self.vertices.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v[k]), hi.max(v[k]))
        })
    }

    /// `[min, max]` of `x . u` over the polygon.
    pub fn project_direction(&self, u: DirectionUnit) -> (f64, f64) {
        self.vertices.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            let d = u.dot(*v);
            (lo.min(d), hi.max(d))
        })
    }

    /// The chord `P ∩ {x . u = t}` as a parameter range `[s_lo, s_hi]` along
    /// `u.perp()`, i.e. the points `t u + s perp(u)`.
    pub fn chord(&self, u: DirectionUnit, t: f64) -> Option<(f64, f64)> {
        let w = u.perp();
        let base = [t * u.vector()[0], t * u.vector()[1]];
        let scale = self.vertices.iter().map(|v| norm(*v)).fold(0.0, f64::max) + t.abs();
        let eps = 1e-13 * scale.max(1.0);
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        let n = self.vertices.len();
        for i in 0..n {
            let v = self.vertices[i];
            let e = sub(self.vertices[(i + 1) % n], v);
            let a = cross(e, w);
            let b = cross(e, sub(base, v));
            let len = norm(e);
            if a.abs() <= PARALLEL_EPS * len {
                if b < -eps * len {
                    return None;
                }
            } else if a > 0.0 {
                lo = lo.max(-b / a);
            } else {
                hi = hi.min(-b / a);
            }
        }
        (lo <= hi).then_some((lo, hi))
    }

    /// Intersection with the half-plane `{x . n <= c}`.
    pub fn clip_halfplane(&self, n: Point, c: f64) -> Result<Self> {
        let inside = |p: Point| n[0] * p[0] + n[1] * p[1] <= c;
        let mut out = Vec::new();
        let m = self.vertices.len();
        for i in 0..m {
            let (p, q) = (self.vertices[i], self.vertices[(i + 1) % m]);
            let (ip, iq) = (inside(p), inside(q));
            if ip {
                out.push(p);
            }
            if ip != iq {
                let fp = n[0] * p[0] + n[1] * p[1] - c;
                let fq = n[0] * q[0] + n[1] * q[1] - c;
                let s = fp / (fp - fq);
                out.push([p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])]);
            }
        }
        Self::cleaned(out)
    }

    /// Vertex set invariant under both coordinate reflections (within 1e-9).
    pub fn is_unconditional(&self) -> bool {
        let has = |p: Point| {
            self.vertices
                .iter()
                .any(|v| (v[0] - p[0]).abs() <= 1e-9 && (v[1] - p[1]).abs() <= 1e-9)
        };
        self.vertices
            .iter()
            .all(|v| has([-v[0], v[1]]) && has([v[0], -v[1]]))
    }

    pub fn is_centrally_symmetric(&self) -> bool {
        let has = |p: Point| {
            self.vertices
                .iter()
                .any(|v| (v[0] - p[0]).abs() <= 1e-9 && (v[1] - p[1]).abs() <= 1e-9)
        };
        self.vertices.iter().all(|v| has([-v[0], -v[1]]))
    }

    /// `alpha P + beta Q` for positive weights, by merging edge vectors by angle.
    pub fn linear_combination(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        let p = self.scale(alpha)?;
        let q = other.scale(beta)?;
        Self::cleaned(minkowski_sum_vertices(&p.vertices, &q.vertices))
    }
}

/// Index of the lowest vertex, leftmost among ties.
fn bottom_left(v: &[Point]) -> usize {
    (0..v.len())
        .min_by(|&i, &j| v[i][1].total_cmp(&v[j][1]).then(v[i][0].total_cmp(&v[j][0])))
        .expect("non-empty")
}

fn minkowski_sum_vertices(p: &[Point], q: &[Point]) -> Vec<Point> {
    let (n, m) = (p.len(), q.len());
    let (i0, j0) = (bottom_left(p), bottom_left(q));
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::with_capacity(n + m);
    while i < n || j < m {
        let pi = p[(i0 + i) % n];
        let qj = q[(j0 + j) % m];
        out.push(add(pi, qj));
        let ep = sub(p[(i0 + i + 1) % n], pi);
        let eq = sub(q[(j0 + j + 1) % m], qj);
        let c = if i == n {
            -1.0
        } else if j == m {
            1.0
        } else {
            let c = cross(ep, eq);
            if c.abs() <= PARALLEL_EPS * norm(ep) * norm(eq) {
                0.0
            } else {
                c
            }
        };
        if c >= 0.0 {
            i += 1;
        }
        if c <= 0.0 {
            j += 1;
        }
    }
    out
}

/// The Minkowski combination `(1 - lambda) A + lambda B`.
pub fn mink_combine_polygon(a: &ConvexPolygon, b: &ConvexPolygon, lambda: f64) -> Result<ConvexPolygon> {
    super::interval::check_lambda(lambda)?;
    if lambda == 0.0 {
        return Ok(a.clone());
    }
    if lambda == 1.0 {
        return Ok(b.clone());
    }
    a.linear_combination(1.0 - lambda, b, lambda)
}

/// `[min, max]` of one coordinate over the polygon.
pub fn project_axis(p: &ConvexPolygon, axis: Axis) -> (f64, f64) {
    p.project_axis(axis)
}
