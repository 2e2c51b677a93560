//! Small fixed-size vector helpers on `[T; 3]`.

use crate::scalar::Real;

pub type Vec3<T> = [T; 3];

#[inline]
pub fn add<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

#[inline]
pub fn sub<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

#[inline]
pub fn scale<T: Real>(a: Vec3<T>, s: T) -> Vec3<T> {
    [a[0] * s, a[1] * s, a[2] * s]
}

#[inline]
pub fn dot<T: Real>(a: Vec3<T>, b: Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross<T: Real>(a: Vec3<T>, b: Vec3<T>) -> Vec3<T> {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm<T: Real>(a: Vec3<T>) -> T {
    dot(a, a).sqrt()
}

#[inline]
pub fn dist<T: Real>(a: Vec3<T>, b: Vec3<T>) -> T {
    norm(sub(a, b))
}

#[inline]
pub fn normalize<T: Real>(a: Vec3<T>) -> Vec3<T> {
    scale(a, T::one() / norm(a))
}

/// Point with barycentric coordinates `l` in triangle `v`.
#[inline]
pub fn barycentric<T: Real>(v: &[Vec3<T>; 3], l: [T; 3]) -> Vec3<T> {
    let mut p = [T::zero(); 3];
    for (k, pk) in p.iter_mut().enumerate() {
        *pk = l[0] * v[0][k] + l[1] * v[1][k] + l[2] * v[2][k];
    }
    p
}

#[inline]
pub fn cast3<T: Real, U: Real>(a: Vec3<T>) -> Vec3<U> {
    [
        U::lit(a[0].to_f64_lossy()),
        U::lit(a[1].to_f64_lossy()),
        U::lit(a[2].to_f64_lossy()),
    ]
}

/// Euclidean distance from `p` to the closed segment `[a, b]`.
pub fn point_segment_distance<T: Real>(p: Vec3<T>, a: Vec3<T>, b: Vec3<T>) -> T {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    let t = if len2 > T::zero() {
        (dot(sub(p, a), ab) / len2).max(T::zero()).min(T::one())
    } else {
        T::zero()
    };
    dist(p, add(a, scale(ab, t)))
}

/// Euclidean distance from `p` to the closed triangle `v`.
pub fn point_triangle_distance<T: Real>(p: Vec3<T>, v: &[Vec3<T>; 3]) -> T {
    let e0 = sub(v[1], v[0]);
    let e1 = sub(v[2], v[0]);
    let n = cross(e0, e1);
    let nn = dot(n, n);
    if nn > T::zero() {
        // Projection inside the triangle: distance is the plane offset.
        let w = sub(p, v[0]);
        let h = dot(w, n) / nn;
        let q = sub(w, scale(n, h));
        let c0 = dot(cross(e0, q), n);
        let c1 = dot(cross(q, e1), n);
        let c2 = dot(cross(sub(v[2], v[1]), sub(add(q, v[0]), v[1])), n);
        if c0 >= T::zero() && c1 >= T::zero() && c2 >= T::zero() {
            return h.abs() * nn.sqrt();
        }
    }
    point_segment_distance(p, v[0], v[1])
        .min(point_segment_distance(p, v[1], v[2]))
        .min(point_segment_distance(p, v[2], v[0]))
}

/// Distance between closed segments `[p0, p1]` and `[q0, q1]`.
pub fn segment_segment_distance<T: Real>(p0: Vec3<T>, p1: Vec3<T>, q0: Vec3<T>, q1: Vec3<T>) -> T {
    let d1 = sub(p1, p0);
    let d2 = sub(q1, q0);
    let r = sub(p0, q0);
    let a = dot(d1, d1);
    let e = dot(d2, d2);
    let f = dot(d2, r);
    let zero = T::zero();
    let one = T::one();
    let (s, t);
    if a <= T::epsilon() && e <= T::epsilon() {
        return norm(r);
    }
    if a <= T::epsilon() {
        s = zero;
        t = (f / e).max(zero).min(one);
    } else {
        let c = dot(d1, r);
        if e <= T::epsilon() {
            t = zero;
            s = (-c / a).max(zero).min(one);
        } else {
            let b = dot(d1, d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > zero { ((b * f - c * e) / denom).max(zero).min(one) } else { zero };
            let mut t0 = (b * s0 + f) / e;
            if t0 < zero {
                t0 = zero;
                s0 = (-c / a).max(zero).min(one);
            } else if t0 > one {
                t0 = one;
                s0 = ((b - c) / a).max(zero).min(one);
            }
            s = s0;
            t = t0;
        }
    }
    dist(add(p0, scale(d1, s)), add(q0, scale(d2, t)))
}
