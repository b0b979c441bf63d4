use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Vertices closer than this (meters) are merged.
const MERGE_TOL: f64 = 1e-9;
/// Intersection areas below this (m^2) are reported as exactly zero.
const AREA_FLOOR: f64 = 1e-12;

/// Convex polygon with counterclockwise vertices. May be empty.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon2D<T> {
    vertices: Vec<[T; 2]>,
}

impl<T: Real> ConvexPolygon2D<T> {
    /// Validates convexity and counterclockwise orientation. Vertices within
    /// 1e-9 m of their predecessor are merged first.
    pub fn new(vertices: Vec<[T; 2]>) -> Result<Self> {
        if vertices.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidPolygon("non-finite vertex".into()));
        }
        let vertices = merge_close(vertices);
        if vertices.len() < 3 {
            return Err(Error::InvalidPolygon(format!(
                "need at least 3 distinct vertices, got {}",
                vertices.len()
            )));
        }
        let tol = T::lit(MERGE_TOL);
        let n = vertices.len();
        for i in 0..n {
            let a = vertices[i];
            let b = vertices[(i + 1) % n];
            let c = vertices[(i + 2) % n];
            if cross(a, b, c) < -tol {
                return Err(Error::InvalidPolygon(
                    "vertices are not convex in counterclockwise order".into(),
                ));
            }
        }
        let poly = Self { vertices };
        if poly.signed_area() < T::zero() {
            return Err(Error::InvalidPolygon("clockwise orientation".into()));
        }
        Ok(poly)
    }

    pub fn empty() -> Self {
        Self { vertices: Vec::new() }
    }

    pub(crate) fn from_vertices_unchecked(vertices: Vec<[T; 2]>) -> Self {
        Self { vertices }
    }

    pub fn vertices(&self) -> &[[T; 2]] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() < 3
    }

    /// Shoelace area, positive for counterclockwise order.
    pub fn signed_area(&self) -> T {
        let n = self.vertices.len();
        if n < 3 {
            return T::zero();
        }
        // anchored at the first vertex to limit cancellation far from origin
        let o = self.vertices[0];
        let mut twice = T::zero();
        for i in 1..n - 1 {
            twice += cross(o, self.vertices[i], self.vertices[i + 1]);
        }
        twice / T::lit(2.0)
    }

    pub fn area(&self) -> T {
        self.signed_area().abs()
    }

    /// Intersection by Sutherland-Hodgman clipping. The result does not
    /// depend on argument order.
    pub fn intersection(&self, other: &Self) -> Self {
        if self.is_empty() || other.is_empty() {
            return Self::empty();
        }
        let (subject, clip) = match cmp_vertices(&self.vertices, &other.vertices) {
            Ordering::Greater => (other, self),
            _ => (self, other),
        };
        let mut output = subject.vertices.clone();
        let m = clip.vertices.len();
        for i in 0..m {
            if output.is_empty() {
                break;
            }
            let a = clip.vertices[i];
            let b = clip.vertices[(i + 1) % m];
            output = clip_half_plane(&output, a, b);
        }
        let output = merge_close(output);
        if output.len() < 3 {
            Self::empty()
        } else {
            Self { vertices: output }
        }
    }
}

/// Area of the intersection of two convex polygons. Areas below 1e-12 m^2
/// are clamped to zero.
pub fn polygon_intersection_area<T: Real>(a: &ConvexPolygon2D<T>, b: &ConvexPolygon2D<T>) -> T {
    let area = a.intersection(b).area();
    if area < T::lit(AREA_FLOOR) {
        T::zero()
    } else {
        area
    }
}

#[inline]
fn cross<T: Real>(o: [T; 2], a: [T; 2], b: [T; 2]) -> T {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Keeps the part of `poly` left of the directed line `a -> b`.
fn clip_half_plane<T: Real>(poly: &[[T; 2]], a: [T; 2], b: [T; 2]) -> Vec<[T; 2]> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let n = poly.len();
    let mut prev = poly[n - 1];
    let mut d_prev = cross(a, b, prev);
    for &cur in poly {
        let d_cur = cross(a, b, cur);
        let cur_in = d_cur >= T::zero();
        let prev_in = d_prev >= T::zero();
        if cur_in != prev_in {
            let t = d_prev / (d_prev - d_cur);
            out.push([prev[0] + (cur[0] - prev[0]) * t, prev[1] + (cur[1] - prev[1]) * t]);
        }
        if cur_in {
            out.push(cur);
        }
        prev = cur;
        d_prev = d_cur;
    }
    out
}

fn merge_close<T: Real>(vertices: Vec<[T; 2]>) -> Vec<[T; 2]> {
    let tol = T::lit(MERGE_TOL);
    let close = |p: [T; 2], q: [T; 2]| (p[0] - q[0]).abs() <= tol && (p[1] - q[1]).abs() <= tol;
    let mut out: Vec<[T; 2]> = Vec::with_capacity(vertices.len());
    for v in vertices {
        if out.last().is_none_or(|&last| !close(last, v)) {
            out.push(v);
        }
    }
    while out.len() > 1 && close(out[0], out[out.len() - 1]) {
        out.pop();
    }
    out
}

fn cmp_vertices<T: Real>(a: &[[T; 2]], b: &[[T; 2]]) -> Ordering {
    for (p, q) in a.iter().flatten().zip(b.iter().flatten()) {
        match p.partial_cmp(q) {
            Some(Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    a.len().cmp(&b.len())
}
