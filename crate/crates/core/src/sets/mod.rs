//! Desk-scale Borel sets: interval unions, coordinate products, convex polygons.

mod interval;
mod polygon;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use interval::{mink_combine_1d, IntervalUnion};
pub(crate) use interval::check_lambda;
pub use polygon::{cross, mink_combine_polygon, project_axis, Axis, ConvexPolygon, DirectionUnit, Point};

/// Product of one interval union per coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSet {
    factors: Vec<IntervalUnion>,
}

impl ProductSet {
    pub fn new(factors: Vec<IntervalUnion>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::domain("a product set needs at least one factor"));
        }
        Ok(ProductSet { factors })
    }

    /// `[lo_1, hi_1] x ... x [lo_n, hi_n]`
    pub fn boxed(bounds: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            bounds
                .iter()
                .map(|&(a, b)| IntervalUnion::interval(a, b))
                .collect::<Result<_>>()?,
        )
    }

    /// `A_1 x R^{n-1}`
    pub fn slab(first: IntervalUnion, dimension: usize) -> Result<Self> {
        let mut f = vec![first];
        f.extend((1..dimension).map(|_| IntervalUnion::full_line()));
        Self::new(f)
    }

    pub fn factors(&self) -> &[IntervalUnion] {
        &self.factors
    }

    pub fn dimension(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.iter().any(|f| f.is_empty())
    }

    pub fn contains_origin(&self) -> bool {
        self.factors.iter().all(|f| f.contains(0.0))
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.factors.len() && self.factors.iter().zip(x).all(|(f, v)| f.contains(*v))
    }

    pub fn is_unconditional(&self) -> bool {
        self.factors.iter().all(|f| f.is_symmetric())
    }

    /// Every factor a single bounded interval.
    pub fn is_box(&self) -> bool {
        self.factors.iter().all(|f| f.as_single().is_some())
    }

    pub fn scale(&self, t: f64) -> Result<Self> {
        Self::new(self.factors.iter().map(|f| f.scale(t)).collect::<Result<_>>()?)
    }

    pub fn linear_combination(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        if self.dimension() != other.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: other.dimension(),
            });
        }
        Self::new(
            self.factors
                .iter()
                .zip(&other.factors)
                .map(|(a, b)| a.linear_combination(alpha, b, beta))
                .collect::<Result<_>>()?,
        )
    }

    /// The same box as a polygon, for bounded 2-D boxes of positive area.
    pub fn to_polygon(&self) -> Option<ConvexPolygon> {
        match self.factors.as_slice() {
            [x, y] => {
                let (x0, x1) = x.as_single()?;
                let (y0, y1) = y.as_single()?;
                ConvexPolygon::rectangle(x0, x1, y0, y1).ok()
            }
            _ => None,
        }
    }
}

/// Coordinatewise `(1 - lambda) A + lambda B`.
pub fn mink_combine_product(a: &ProductSet, b: &ProductSet, lambda: f64) -> Result<ProductSet> {
    check_lambda(lambda)?;
    if a.dimension() != b.dimension() {
        return Err(Error::DimensionMismatch {
            expected: a.dimension(),
            found: b.dimension(),
        });
    }
    ProductSet::new(
        a.factors
            .iter()
            .zip(&b.factors)
            .map(|(x, y)| mink_combine_1d(x, y, lambda))
            .collect::<Result<_>>()?,
    )
}

/// Any of the supported set representations.
#[derive(Debug, Clone, PartialEq)]
pub enum SetRep {
    Intervals(IntervalUnion),
    Product(ProductSet),
    Polygon(ConvexPolygon),
    /// A single point; the dilate of a polygon by 0.
    Point(Vec<f64>),
}

impl From<IntervalUnion> for SetRep {
    fn from(s: IntervalUnion) -> Self {
        SetRep::Intervals(s)
    }
}

impl From<ProductSet> for SetRep {
    fn from(s: ProductSet) -> Self {
        SetRep::Product(s)
    }
}

impl From<ConvexPolygon> for SetRep {
    fn from(s: ConvexPolygon) -> Self {
        SetRep::Polygon(s)
    }
}

impl SetRep {
    pub fn dimension(&self) -> usize {
        match self {
            SetRep::Intervals(_) => 1,
            SetRep::Product(p) => p.dimension(),
            SetRep::Polygon(_) => 2,
            SetRep::Point(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            SetRep::Intervals(i) => i.is_empty(),
            SetRep::Product(p) => p.is_empty(),
            _ => false,
        }
    }

    pub fn contains_origin(&self) -> bool {
        match self {
            SetRep::Intervals(i) => i.contains(0.0),
            SetRep::Product(p) => p.contains_origin(),
            SetRep::Polygon(p) => p.contains_origin(),
            SetRep::Point(p) => p.iter().all(|v| *v == 0.0),
        }
    }

    pub fn is_unconditional(&self) -> bool {
        match self {
            SetRep::Intervals(i) => i.is_symmetric(),
            SetRep::Product(p) => p.is_unconditional(),
            SetRep::Polygon(p) => p.is_unconditional(),
            SetRep::Point(p) => p.iter().all(|v| *v == 0.0),
        }
    }

    /// Convex: a single interval per coordinate, or a polygon.
    pub fn is_convex(&self) -> bool {
        match self {
            SetRep::Intervals(i) => i.as_single().is_some() || i.is_full_line(),
            SetRep::Product(p) => p
                .factors()
                .iter()
                .all(|f| f.as_single().is_some() || f.is_full_line()),
            SetRep::Polygon(_) | SetRep::Point(_) => true,
        }
    }

    /// `tA`. For polygons `t = 0` gives the origin as a point.
    pub fn dilate(&self, t: f64) -> Result<SetRep> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::domain(format!("dilation factor must be >= 0, got {t}")));
        }
        Ok(match self {
            SetRep::Intervals(i) => SetRep::Intervals(i.scale(t)?),
            SetRep::Product(p) => SetRep::Product(p.scale(t)?),
            SetRep::Polygon(_) if t == 0.0 => SetRep::Point(vec![0.0; 2]),
            SetRep::Polygon(p) => SetRep::Polygon(p.scale(t)?),
            SetRep::Point(p) => SetRep::Point(p.iter().map(|v| v * t).collect()),
        })
    }

    pub fn translate(&self, by: &[f64]) -> Result<SetRep> {
        if by.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: by.len(),
            });
        }
        Ok(match self {
            SetRep::Intervals(i) => SetRep::Intervals(i.translate(by[0])?),
            SetRep::Product(p) => SetRep::Product(ProductSet::new(
                p.factors()
                    .iter()
                    .zip(by)
                    .map(|(f, b)| f.translate(*b))
                    .collect::<Result<_>>()?,
            )?),
            SetRep::Polygon(p) => SetRep::Polygon(p.translate([by[0], by[1]])),
            SetRep::Point(p) => SetRep::Point(p.iter().zip(by).map(|(a, b)| a + b).collect()),
        })
    }

    /// `alpha A + beta B` for nonnegative weights.
    pub fn linear_combination(&self, alpha: f64, other: &SetRep, beta: f64) -> Result<SetRep> {
        if self.dimension() != other.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                found: other.dimension(),
            });
        }
        if !(alpha >= 0.0 && beta >= 0.0 && alpha.is_finite() && beta.is_finite()) {
            return Err(Error::domain("combination weights must be finite and nonnegative"));
        }
        if self.is_empty() || other.is_empty() {
            return Err(Error::domain("Minkowski combination of an empty set"));
        }
        if beta == 0.0 {
            return self.dilate(alpha);
        }
        if alpha == 0.0 {
            return other.dilate(beta);
        }
        use SetRep::*;
        Ok(match (self, other) {
            (Intervals(a), Intervals(b)) => Intervals(a.linear_combination(alpha, b, beta)?),
            (Product(a), Product(b)) => Product(a.linear_combination(alpha, b, beta)?),
            (Polygon(a), Polygon(b)) => Polygon(a.linear_combination(alpha, b, beta)?),
            (Point(p), b) => {
                let shift: Vec<f64> = p.iter().map(|v| alpha * v).collect();
                b.dilate(beta)?.translate(&shift)?
            }
            (a, Point(q)) => {
                let shift: Vec<f64> = q.iter().map(|v| beta * v).collect();
                a.dilate(alpha)?.translate(&shift)?
            }
            (Polygon(a), Product(b)) => match b.to_polygon() {
                Some(bp) => Polygon(a.linear_combination(alpha, &bp, beta)?),
                None => return Err(mixed()),
            },
            (Product(a), Polygon(b)) => match a.to_polygon() {
                Some(ap) => Polygon(ap.linear_combination(alpha, b, beta)?),
                None => return Err(mixed()),
            },
            (Intervals(a), Product(b)) | (Product(b), Intervals(a)) => {
                // one-factor products are interval unions
                let b1 = &b.factors()[0];
                let (x, y) = if matches!(self, Intervals(_)) { (a, b1) } else { (b1, a) };
                Intervals(x.linear_combination(alpha, y, beta)?)
            }
            _ => return Err(mixed()),
        })
    }
}

fn mixed() -> Error {
    Error::Unsupported("Minkowski combination of a polygon with an unbounded or non-convex product".into())
}

/// `(1 - lambda) A + lambda B`; `lambda = 0` and `lambda = 1` return the inputs exactly.
pub fn combine(a: &SetRep, b: &SetRep, lambda: f64) -> Result<SetRep> {
    check_lambda(lambda)?;
    if a.dimension() != b.dimension() {
        return Err(Error::DimensionMismatch {
            expected: a.dimension(),
            found: b.dimension(),
        });
    }
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

/// `tA` for any representation.
pub fn dilate(a: &SetRep, t: f64) -> Result<SetRep> {
    a.dilate(t)
}

/// Predicate for products and polygons.
pub fn is_unconditional(a: &SetRep) -> bool {
    a.is_unconditional()
}

/// JSON descriptor of a set, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SetDescriptor {
    Intervals {
        intervals: Vec<[f64; 2]>,
    },
    Product {
        factors: Vec<SetDescriptor>,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    /// Regular polygon centered at the origin; the default 64-gon stands in for the unit disk.
    RegularPolygon {
        #[serde(default = "default_sides")]
        sides: usize,
        #[serde(default = "unit")]
        radius: f64,
        #[serde(default)]
        phase: f64,
    },
    FullLine,
}

fn default_sides() -> usize {
    64
}

fn unit() -> f64 {
    1.0
}

impl SetDescriptor {
    pub fn build(&self) -> Result<SetRep> {
        Ok(match self {
            SetDescriptor::Intervals { .. } => SetRep::Intervals(self.build_factor()?),
            SetDescriptor::Product { factors } => SetRep::Product(ProductSet::new(
                factors
                    .iter()
                    .map(|f| f.build_factor())
                    .collect::<Result<_>>()?,
            )?),
            SetDescriptor::Polygon { vertices } => SetRep::Polygon(ConvexPolygon::new(vertices.clone())?),
            SetDescriptor::RegularPolygon {
                sides,
                radius,
                phase,
            } => SetRep::Polygon(ConvexPolygon::regular(*sides, *radius, *phase)?),
            SetDescriptor::FullLine => {
                return Err(Error::domain("full-line is only allowed as a product factor"))
            }
        })
    }

    fn build_factor(&self) -> Result<IntervalUnion> {
        match self {
            SetDescriptor::Intervals { intervals } => {
                IntervalUnion::new(intervals.iter().map(|iv| (iv[0], iv[1])))
            }
            SetDescriptor::FullLine => Ok(IntervalUnion::full_line()),
            other => Err(Error::domain(format!("{other:?} cannot be a product factor"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(b: &[(f64, f64)]) -> ProductSet {
        ProductSet::boxed(b).unwrap()
    }

    #[test]
    fn product_examples() {
        let a = bx(&[(0.0, 1.0), (0.0, 1.0)]);
        let b = bx(&[(-1.0, 0.0), (-1.0, 0.0)]);
        assert_eq!(mink_combine_product(&a, &b, 0.5).unwrap(), bx(&[(-0.5, 0.5), (-0.5, 0.5)]));

        let slab = ProductSet::slab(IntervalUnion::interval(0.0, 2.0).unwrap(), 2).unwrap();
        let c = mink_combine_product(&slab, &bx(&[(0.0, 1.0), (0.0, 1.0)]), 0.5).unwrap();
        assert_eq!(c.factors()[0].as_single(), Some((0.0, 1.5)));
        assert!(c.factors()[1].is_full_line());

        let a = bx(&[(-0.3, 2.0), (1.0, 4.0)]);
        assert_eq!(mink_combine_product(&a, &a, 0.37).unwrap(), a);
        assert!(mink_combine_product(&a, &bx(&[(0.0, 1.0)]), 0.5).is_err());
    }

    #[test]
    fn unconditional_products() {
        assert!(bx(&[(-1.0, 1.0), (-2.0, 2.0)]).is_unconditional());
        assert!(!bx(&[(0.0, 1.0), (-1.0, 1.0)]).is_unconditional());
    }

    #[test]
    fn dilation_rules() {
        let i: SetRep = IntervalUnion::symmetric(1.0).unwrap().into();
        assert_eq!(i.dilate(2.0).unwrap(), IntervalUnion::symmetric(2.0).unwrap().into());
        assert!(i.dilate(-1.0).is_err());
        let p: SetRep = ConvexPolygon::unit_square().into();
        assert_eq!(p.dilate(0.0).unwrap(), SetRep::Point(vec![0.0, 0.0]));
        assert_eq!(p.dilate(1.0).unwrap(), p);
    }

    #[test]
    fn point_combination_translates() {
        let p: SetRep = ConvexPolygon::unit_square().into();
        let z = SetRep::Point(vec![2.0, 0.0]);
        match combine(&z, &p, 0.5).unwrap() {
            SetRep::Polygon(q) => assert!((q.area() - 0.25).abs() < 1e-15 && q.project_axis(Axis::X) == (1.0, 1.5)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn box_and_polygon_mix() {
        let b: SetRep = bx(&[(0.0, 1.0), (0.0, 1.0)]).into();
        let t: SetRep = ConvexPolygon::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap().into();
        match combine(&b, &t, 0.5).unwrap() {
            SetRep::Polygon(q) => assert!((q.area() - 0.875).abs() < 1e-14),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn descriptors() {
        let d: SetDescriptor =
            serde_json::from_str(r#"{"kind":"intervals","intervals":[[0,1],[3,4]]}"#).unwrap();
        assert_eq!(d.build().unwrap().dimension(), 1);
        let d: SetDescriptor = serde_json::from_str(
            r#"{"kind":"product","factors":[{"kind":"intervals","intervals":[[-1,1]]},{"kind":"full-line"}]}"#,
        )
        .unwrap();
        assert_eq!(d.build().unwrap().dimension(), 2);
        let d: SetDescriptor =
            serde_json::from_str(r#"{"kind":"polygon","vertices":[[0,0],[1,0],[0,1]]}"#).unwrap();
        assert!(matches!(d.build().unwrap(), SetRep::Polygon(_)));
        let d: SetDescriptor = serde_json::from_str(r#"{"kind":"full-line"}"#).unwrap();
        assert!(d.build().is_err());
        let d: SetDescriptor = serde_json::from_str(r#"{"kind":"regular-polygon","sides":6}"#).unwrap();
        assert!(d.build().unwrap().is_unconditional());
    }
}
