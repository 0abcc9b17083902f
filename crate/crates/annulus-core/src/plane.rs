//! Small helpers for points and vectors of the plane.

/// A point (or vector) of the plane.
pub type Pt = [f64; 2];

#[inline]
pub fn dot(a: Pt, b: Pt) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

/// Wedge product `a₁b₂ − a₂b₁`; zero iff the vectors are parallel.
#[inline]
pub fn wedge(a: Pt, b: Pt) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[inline]
pub fn norm2(a: Pt) -> f64 {
    dot(a, a)
}

#[inline]
pub fn norm(a: Pt) -> f64 {
    crate::math::sqrt(norm2(a))
}

#[inline]
pub fn sub(a: Pt, b: Pt) -> Pt {
    [a[0] - b[0], a[1] - b[1]]
}

#[inline]
pub fn dist(a: Pt, b: Pt) -> f64 {
    norm(sub(a, b))
}
