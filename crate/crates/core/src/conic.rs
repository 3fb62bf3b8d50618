//! Planar conic arcs as quadratic rational Bezier segments.
//!
//! An arc is stored as three control points with a weight triple
//! (w0, w1, w2), all supported by a single plane:
//!
//!   P(t) = (1-t)^2 w0 c0 + 2t(1-t) w1 c1 + t^2 w2 c2.
//!
//! Weights are kept as a full triple rather than the reduced form (1, w, 1)
//! so that projective transport of an arc is a raw linear action on the
//! weighted control vectors: exact over rationals, and preserving the
//! parametrisation pointwise. The reduced weight is recovered on demand as
//! w = w1 / sqrt(w0 w2), a reparametrisation invariant together with its
//! sign. Endpoint tangents are c0 v c1 and c2 v c1; the segment with w1 > 0
//! lies inside the control triangle, w1 < 0 selects the complementary branch.

use crate::error::{GeomError, Result};
use crate::linalg::{self, coords_in_basis, Vecn};
use crate::projective::{plane_through_points, HPlane, HPoint, PLine, ProjMap};
use crate::scalar::{max_abs, Scalar, Tol};

/// Conic arc: control points, weight triple, and supporting plane.
///
/// Invariants: the control points are pairwise distinct, not collinear, and
/// all on `plane`; w0 > 0, w2 > 0, w1 != 0.
#[derive(Clone, Debug)]
pub struct ConicArc<S: Scalar> {
    plane: HPlane<S>,
    c: [HPoint<S>; 3],
    w: [S; 3],
}

impl<S: Scalar> ConicArc<S> {
    /// Validating constructor. Normalises the global weight sign so w0 > 0.
    pub fn new(
        plane: HPlane<S>,
        c0: HPoint<S>,
        c1: HPoint<S>,
        c2: HPoint<S>,
        w: [S; 3],
        tol: Tol,
    ) -> Result<Self> {
        for p in [&c0, &c1, &c2] {
            if !plane.contains(p, tol) {
                return Err(GeomError::NonCoplanarPoint);
            }
        }
        let rows = vec![
            c0.coords().to_vec(),
            c1.coords().to_vec(),
            c2.coords().to_vec(),
        ];
        if linalg::rank(&rows, tol) != 3 {
            return Err(GeomError::DegenerateSpan);
        }
        let [w0, w1, w2] = w;
        if tol.is_zero(&w0) || tol.is_zero(&w2) {
            return Err(GeomError::ControlPointAnnihilated);
        }
        if (w0.clone() * w2.clone()).is_negative() {
            return Err(GeomError::NegativeWeightProduct);
        }
        if tol.is_zero(&w1) {
            // w1 = 0 degenerates the conic to its chord.
            return Err(GeomError::DegeneratePencil);
        }
        let w = if w0.is_negative() {
            [-w0, -w1, -w2]
        } else {
            [w0, w1, w2]
        };
        Ok(ConicArc {
            plane,
            c: [c0, c1, c2],
            w,
        })
    }

    /// Arc in reduced form (1, w, 1); the plane is spanned by the controls.
    pub fn from_standard(
        c0: HPoint<S>,
        c1: HPoint<S>,
        c2: HPoint<S>,
        w: S,
        tol: Tol,
    ) -> Result<Self> {
        let plane = plane_through_points(&c0, &c1, &c2, tol)?;
        ConicArc::new(plane, c0, c1, c2, [S::one(), w, S::one()], tol)
    }

    pub fn plane(&self) -> &HPlane<S> {
        &self.plane
    }

    pub fn c0(&self) -> &HPoint<S> {
        &self.c[0]
    }

    pub fn c1(&self) -> &HPoint<S> {
        &self.c[1]
    }

    pub fn c2(&self) -> &HPoint<S> {
        &self.c[2]
    }

    pub fn weights(&self) -> &[S; 3] {
        &self.w
    }

    /// Weighted control vector w_i c_i, the representative transported by
    /// projective maps.
    pub fn weighted_vector(&self, i: usize) -> Vecn<S> {
        linalg::vec_scale(&self.w[i], self.c[i].coords())
    }

    /// Square of the reduced weight, exact: w^2 = w1^2 / (w0 w2).
    pub fn standard_weight_sq(&self) -> S {
        self.w[1].clone() * self.w[1].clone() / (self.w[0].clone() * self.w[2].clone())
    }

    /// Signed reduced weight w = w1 / sqrt(w0 w2). Negative selects the
    /// branch outside the control triangle.
    pub fn standard_weight(&self) -> f64 {
        let s = self.standard_weight_sq().to_f64().sqrt();
        if self.w[1].is_negative() {
            -s
        } else {
            s
        }
    }

    /// Tangent line at t = 0, spanned by c0 and c1.
    pub fn tangent_start(&self) -> Result<PLine<S>> {
        PLine::through(&self.c[0], &self.c[1])
    }

    /// Tangent line at t = 1, spanned by c2 and c1.
    pub fn tangent_end(&self) -> Result<PLine<S>> {
        PLine::through(&self.c[2], &self.c[1])
    }

    /// Same arc traversed backwards: eval(reversed, t) = eval(self, 1-t).
    pub fn reversed(&self) -> Self {
        ConicArc {
            plane: self.plane.clone(),
            c: [self.c[2].clone(), self.c[1].clone(), self.c[0].clone()],
            w: [self.w[2].clone(), self.w[1].clone(), self.w[0].clone()],
        }
    }

    /// Pointwise equality as parametrised curves: controls match and the
    /// weight triples are proportional.
    pub fn proj_eq_parametrized(&self, other: &Self, tol: Tol) -> bool {
        if !(0..3).all(|i| self.c[i].proj_eq(&other.c[i], tol)) {
            return false;
        }
        let rows = vec![self.w.to_vec(), other.w.to_vec()];
        linalg::rank(&rows, tol) == 1
    }

    /// Equality as unparametrised point sets, orientation included: controls
    /// match and the reparametrisation invariants (sign w1, w1^2/(w0 w2))
    /// agree.
    pub fn proj_eq_segment(&self, other: &Self, tol: Tol) -> bool {
        if !(0..3).all(|i| self.c[i].proj_eq(&other.c[i], tol)) {
            return false;
        }
        if self.w[1].is_negative() != other.w[1].is_negative() {
            return false;
        }
        let d = self.standard_weight_sq() - other.standard_weight_sq();
        let scale = self.standard_weight_sq().abs() + other.standard_weight_sq().abs();
        tol.is_zero_rel(&d, scale.to_f64())
    }

    /// Residual of a coplanar point against the arc's full conic. Zero iff
    /// the point lies on the conic (either branch). Inputs are normalised so
    /// the value is scale-free.
    pub fn on_conic_residual(&self, p: &HPoint<S>, tol: Tol) -> Result<S> {
        if !self.plane.contains(p, tol) {
            return Err(GeomError::NonCoplanarPoint);
        }
        let basis: Vec<Vecn<S>> = (0..3).map(|i| self.c[i].coords().to_vec()).collect();
        let abc = coords_in_basis(&basis, p.coords(), tol)?;
        let m = max_abs(&abc);
        let abc: Vec<S> = abc.iter().map(|x| x.clone() / m.clone()).collect();
        let mw = max_abs(&self.w);
        let w: Vec<S> = self.w.iter().map(|x| x.clone() / mw.clone()).collect();
        // Conic in weighted coordinates: beta^2 = 4 alpha gamma, i.e.
        // b^2 w0 w2 = 4 w1^2 a c for coordinates (a, b, c) in the controls.
        let four = S::from_int(4);
        Ok(abc[1].clone() * abc[1].clone() * w[0].clone() * w[2].clone()
            - four * w[1].clone() * w[1].clone() * abc[0].clone() * abc[2].clone())
    }
}

/// Point of the arc at parameter t (any real t; the curve is global).
pub fn eval_arc<S: Scalar>(arc: &ConicArc<S>, t: &S) -> Result<HPoint<S>> {
    let u = S::one() - t.clone();
    let b = [
        u.clone() * u.clone(),
        S::from_int(2) * t.clone() * u,
        t.clone() * t.clone(),
    ];
    let mut v = vec![S::zero(); arc.c[0].dim_ambient()];
    for i in 0..3 {
        let coef = b[i].clone() * arc.w[i].clone();
        v = linalg::vec_axpy(&v, &coef, arc.c[i].coords());
    }
    HPoint::new(v)
}

/// Like [`eval_arc`] but rejects parameters outside [0, 1].
pub fn eval_arc_strict<S: Scalar>(arc: &ConicArc<S>, t: &S) -> Result<HPoint<S>> {
    if *t < S::zero() || *t > S::one() {
        return Err(GeomError::ParameterOutOfRange(t.to_f64()));
    }
    eval_arc(arc, t)
}

/// Projective tangent line at parameter t, spanned by P(t) and P'(t).
pub fn arc_tangent_at<S: Scalar>(arc: &ConicArc<S>, t: &S, tol: Tol) -> Result<PLine<S>> {
    let p = eval_arc(arc, t)?;
    let u = S::one() - t.clone();
    let two = S::from_int(2);
    let db = [
        -(two.clone() * u.clone()),
        two.clone() * (S::one() - two.clone() * t.clone()),
        two * t.clone(),
    ];
    let mut v = vec![S::zero(); arc.c[0].dim_ambient()];
    for i in 0..3 {
        let coef = db[i].clone() * arc.w[i].clone();
        v = linalg::vec_axpy(&v, &coef, arc.c[i].coords());
    }
    let dp = HPoint::new(v)?;
    if p.proj_eq(&dp, tol) {
        return Err(GeomError::DegenerateSpan);
    }
    PLine::through(&p, &dp)
}

/// Unique arc from endpoint tangency data and one interior point.
///
/// `x`, `xi` are the endpoints, `t`, `ti` their tangent lines (through them,
/// intersecting each other off both endpoints), and `s` the shoulder: the
/// resulting arc satisfies P(1/2) = s. The weight sign follows from `s`; a
/// shoulder whose basis coordinates at the endpoints have opposite signs has
/// no reduced form and is rejected.
pub fn arc_from_tangents_and_point<S: Scalar>(
    x: &HPoint<S>,
    xi: &HPoint<S>,
    t: &PLine<S>,
    ti: &PLine<S>,
    s: &HPoint<S>,
    tol: Tol,
) -> Result<ConicArc<S>> {
    if !t.contains(x, tol) || !ti.contains(xi, tol) {
        return Err(GeomError::TangentChainBroken);
    }
    let c1 = match crate::projective::lines_intersect(t, ti, tol)? {
        Some(p) => p,
        None => return Err(GeomError::NonIntersectingInput),
    };
    if c1.proj_eq(x, tol) || c1.proj_eq(xi, tol) {
        // A tangent passing through the opposite endpoint collapses the arc.
        return Err(GeomError::TangentChainBroken);
    }
    let plane = plane_through_points(x, &c1, xi, tol)?;
    if !plane.contains(s, tol) {
        return Err(GeomError::NonCoplanarPoint);
    }
    let basis = vec![
        x.coords().to_vec(),
        c1.coords().to_vec(),
        xi.coords().to_vec(),
    ];
    let abc = coords_in_basis(&basis, s.coords(), tol)?;
    let (a, b, c) = (abc[0].clone(), abc[1].clone(), abc[2].clone());
    let m = max_abs(&abc).to_f64();
    if tol.is_zero_rel(&a, m) || tol.is_zero_rel(&c, m) {
        return Err(GeomError::PointOnTangent);
    }
    if tol.is_zero_rel(&b, m) {
        // Shoulder on the chord: the conic through it degenerates.
        return Err(GeomError::DegenerateSpan);
    }
    let prod = a.clone() * c.clone();
    if prod.is_negative() {
        return Err(GeomError::NegativeWeightBranch(prod.to_f64()));
    }
    // P(1/2) = (w0 c0 + 2 w1 c1 + w2 c2) / 4, so (w0, w1, w2) = (4a, 2b, 4c).
    let four = S::from_int(4);
    let w = [four.clone() * a, S::from_int(2) * b, four * c];
    ConicArc::new(plane, x.clone(), c1, xi.clone(), w, tol)
}

/// Image arc under a projective map, acting linearly on the weighted control
/// vectors. Exact and parametrisation-preserving: eval(image, t) is the
/// image of eval(source, t) for every t.
pub fn map_arc<S: Scalar>(m: &ProjMap<S>, arc: &ConicArc<S>, tol: Tol) -> Result<ConicArc<S>> {
    let mut c = Vec::with_capacity(3);
    let mut w = Vec::with_capacity(3);
    for i in 0..3 {
        let v = m.apply_raw(&arc.weighted_vector(i));
        let scale = max_abs(&v);
        if tol.is_zero(&scale) {
            return Err(GeomError::ControlPointAnnihilated);
        }
        let ci = HPoint::new(v.clone())?;
        // Recover the transported weight from the scale against the
        // canonical representative, at the entry of largest magnitude.
        let k = v
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.abs().partial_cmp(&y.1.abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        w.push(v[k].clone() / ci.coords()[k].clone());
        c.push(ci);
    }
    let prod = w[0].clone() * w[2].clone();
    if prod.is_negative() {
        // The segment crossed the plane the map sends to the far side:
        // its image has no reduced form between the image endpoints.
        return Err(GeomError::NegativeWeightProduct);
    }
    let plane = plane_through_points(&c[0], &c[1], &c[2], tol)?;
    let c2 = c.pop().unwrap();
    let c1 = c.pop().unwrap();
    let c0 = c.pop().unwrap();
    ConicArc::new(plane, c0, c1, c2, [w[0].clone(), w[1].clone(), w[2].clone()], tol)
}

/// Restriction of the arc to [t0, t1], reparametrised to [0, 1]:
/// eval(sub, t) = eval(arc, t0 + t (t1 - t0)) pointwise.
///
/// Works on the homogeneous weighted controls through the blossom
/// b(s,t) = (1-s)(1-t) V0 + (s(1-t) + t(1-s)) V1 + st V2, so the cut is
/// exact over rationals. A sub-range whose homogeneous path changes the
/// sign of the recovered endpoint weights has no reduced form and is
/// rejected like a transported arc would be.
pub fn subdivide_arc<S: Scalar>(arc: &ConicArc<S>, t0: &S, t1: &S, tol: Tol) -> Result<ConicArc<S>> {
    let zero = S::zero();
    let one = S::one();
    for t in [t0, t1] {
        if *t < zero || *t > one {
            return Err(GeomError::ParameterOutOfRange(t.to_f64()));
        }
    }
    if !(*t0 < *t1) {
        return Err(GeomError::DegenerateSpan);
    }
    let v: Vec<Vecn<S>> = (0..3).map(|i| arc.weighted_vector(i)).collect();
    let blossom = |s: &S, t: &S| -> Vecn<S> {
        let us = one.clone() - s.clone();
        let ut = one.clone() - t.clone();
        let k0 = us.clone() * ut.clone();
        let k1 = s.clone() * ut + t.clone() * us;
        let k2 = s.clone() * t.clone();
        let mut out = linalg::vec_scale(&k0, &v[0]);
        out = linalg::vec_axpy(&out, &k1, &v[1]);
        linalg::vec_axpy(&out, &k2, &v[2])
    };
    let mut c = Vec::with_capacity(3);
    let mut w = Vec::with_capacity(3);
    for u in [blossom(t0, t0), blossom(t0, t1), blossom(t1, t1)] {
        let scale = max_abs(&u);
        if tol.is_zero(&scale) {
            return Err(GeomError::ControlPointAnnihilated);
        }
        let ci = HPoint::new(u.clone())?;
        let k = u
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.abs().partial_cmp(&y.1.abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        w.push(u[k].clone() / ci.coords()[k].clone());
        c.push(ci);
    }
    if (w[0].clone() * w[2].clone()).is_negative() {
        return Err(GeomError::NegativeWeightProduct);
    }
    let c2 = c.pop().unwrap();
    let c1 = c.pop().unwrap();
    let c0 = c.pop().unwrap();
    ConicArc::new(
        arc.plane().clone(),
        c0,
        c1,
        c2,
        [w[0].clone(), w[1].clone(), w[2].clone()],
        tol,
    )
}
