//! SC-patches: conic-arc extensions of planar quadrilaterals.
//!
//! A patch carries a planar vertex quad (x, x1, x12, x2), four boundary arcs
//! b1: x -> x1, b2: x -> x2, b1_2: x2 -> x12, b2_1: x1 -> x12, and the two
//! characteristic lines a1 = pi1 ^ pi1_2, a2 = pi2 ^ pi2_1 cut out by the
//! boundary planes of each direction. Opposite arcs are perspective from the
//! non-corresponding Laplace point of the quad; transport by that
//! perspectivity fixes the parameter correspondence across the patch, and
//! the interior point at (u, v) is the meet of the three planes
//! (x v x~1 v x~2), (x~1 v a2), (x~2 v a1).

use crate::conic::{arc_from_tangents_and_point, eval_arc, map_arc, subdivide_arc, ConicArc};
use crate::error::{GeomError, Result};
use crate::lattice::LatticeBox;
use crate::linalg::coords_in_basis;
use crate::projective::{
    central_projection, lines_intersect, meet_line_plane, meet_planes, meet_three_planes,
    plane_point_line, plane_through_points, HPlane, HPoint, PLine,
};
use crate::qnet::{is_planar_quad, laplace_point, QNet};
use crate::scalar::{Scalar, Tol};
use crate::torsal::CubeLines;

/// Conic-arc extension of a planar quad.
///
/// Vertices are stored cyclically as (x, x1, x12, x2); parameter u runs
/// along direction 1 (arc b1), v along direction 2 (arc b2). The stored
/// opposite arcs always carry the perspectivity-transported parametrisation,
/// so eval at (u, 1) is b1_2 at u and eval at (1, v) is b2_1 at v.
#[derive(Clone, Debug)]
pub struct SCPatch<S: Scalar> {
    verts: [HPoint<S>; 4],
    b1: ConicArc<S>,
    b2: ConicArc<S>,
    b1_2: ConicArc<S>,
    b2_1: ConicArc<S>,
    a1: PLine<S>,
    a2: PLine<S>,
    y1: HPoint<S>,
    y2: HPoint<S>,
}

/// Quadratic cone touching a patch along one boundary arc: the join of the
/// apex with the arc's conic. The apex never lies on the arc's plane.
#[derive(Clone, Debug)]
pub struct QuadraticCone<S: Scalar> {
    apex: HPoint<S>,
    base: ConicArc<S>,
}

impl<S: Scalar> QuadraticCone<S> {
    pub fn apex(&self) -> &HPoint<S> {
        &self.apex
    }

    pub fn base(&self) -> &ConicArc<S> {
        &self.base
    }

    /// Ruling of the cone through the base point at parameter t.
    pub fn generator_at(&self, t: &S) -> Result<PLine<S>> {
        PLine::through(&self.apex, &eval_arc(&self.base, t)?)
    }

    /// Tangent plane of the cone along the generator at parameter t.
    pub fn tangent_plane_at(&self, t: &S, tol: Tol) -> Result<HPlane<S>> {
        let l = crate::conic::arc_tangent_at(&self.base, t, tol)?;
        plane_point_line(&self.apex, &l, tol)
    }
}

impl<S: Scalar> SCPatch<S> {
    /// Assemble and validate a patch from its vertex quad and boundary arcs.
    ///
    /// Checks quad planarity, arc endpoints, Laplace genericity, and that
    /// opposite arcs are perspective images from the non-corresponding
    /// Laplace point. The stored opposite arcs are replaced by the
    /// transported images, which pins the canonical parameter correspondence
    /// (same segments, endpoints fixed).
    pub fn from_boundary(
        verts: [HPoint<S>; 4],
        b1: ConicArc<S>,
        b2: ConicArc<S>,
        b1_2: ConicArc<S>,
        b2_1: ConicArc<S>,
        tol: Tol,
    ) -> Result<Self> {
        if !is_planar_quad(&verts, tol) {
            return Err(GeomError::NonPlanarInput);
        }
        let ends = [
            (&b1, 0usize, 1usize),
            (&b2, 0, 3),
            (&b1_2, 3, 2),
            (&b2_1, 1, 2),
        ];
        for (arc, i, j) in ends {
            if !arc.c0().proj_eq(&verts[i], tol) || !arc.c2().proj_eq(&verts[j], tol) {
                return Err(GeomError::InconsistentCauchyData(
                    "boundary arc endpoints do not match the vertex quad".into(),
                ));
            }
        }
        let y1 = laplace_point(&verts, 0, tol)?;
        let y2 = laplace_point(&verts, 1, tol)?;
        for (y, pa, pb) in [(&y2, b1.plane(), b1_2.plane()), (&y1, b2.plane(), b2_1.plane())] {
            if pa.contains(y, tol) || pb.contains(y, tol) {
                return Err(GeomError::LaplacePointOnBoundaryPlane);
            }
        }
        // Opposite arcs must be the Laplace perspectivity images; store the
        // transported parametrisation.
        let tau2 = central_projection(&y2, b1_2.plane(), tol)?;
        let image1 = map_arc(&tau2, &b1, tol)?;
        if !image1.proj_eq_segment(&b1_2, tol) {
            return Err(GeomError::CommonBoundaryViolated(
                "direction-1 arcs are not perspective from the Laplace point".into(),
            ));
        }
        let tau1 = central_projection(&y1, b2_1.plane(), tol)?;
        let image2 = map_arc(&tau1, &b2, tol)?;
        if !image2.proj_eq_segment(&b2_1, tol) {
            return Err(GeomError::CommonBoundaryViolated(
                "direction-2 arcs are not perspective from the Laplace point".into(),
            ));
        }
        let a1 = meet_planes(b1.plane(), image1.plane(), tol)?;
        let a2 = meet_planes(b2.plane(), image2.plane(), tol)?;
        Ok(SCPatch {
            verts,
            b1,
            b2,
            b1_2: image1,
            b2_1: image2,
            a1,
            a2,
            y1,
            y2,
        })
    }

    /// Vertices in cyclic order (x, x1, x12, x2).
    pub fn verts(&self) -> &[HPoint<S>; 4] {
        &self.verts
    }

    pub fn b1(&self) -> &ConicArc<S> {
        &self.b1
    }

    pub fn b2(&self) -> &ConicArc<S> {
        &self.b2
    }

    pub fn b1_2(&self) -> &ConicArc<S> {
        &self.b1_2
    }

    pub fn b2_1(&self) -> &ConicArc<S> {
        &self.b2_1
    }

    /// Boundary arc of a direction (0 or 1) at the low or high side of the
    /// complementary parameter.
    pub fn boundary_arc(&self, dir: usize, high: bool) -> Result<&ConicArc<S>> {
        match (dir, high) {
            (0, false) => Ok(&self.b1),
            (0, true) => Ok(&self.b1_2),
            (1, false) => Ok(&self.b2),
            (1, true) => Ok(&self.b2_1),
            _ => Err(GeomError::IndexOutOfBounds),
        }
    }

    /// Characteristic line of a direction: the meet of the two boundary
    /// planes carrying that direction's arcs.
    pub fn char_line(&self, dir: usize) -> Result<&PLine<S>> {
        match dir {
            0 => Ok(&self.a1),
            1 => Ok(&self.a2),
            _ => Err(GeomError::IndexOutOfBounds),
        }
    }

    /// Laplace point of a direction: meet of the two extended edges.
    pub fn laplace(&self, dir: usize) -> Result<&HPoint<S>> {
        match dir {
            0 => Ok(&self.y1),
            1 => Ok(&self.y2),
            _ => Err(GeomError::IndexOutOfBounds),
        }
    }

    /// Tangent line of the direction-`dir` parameter curve at a corner
    /// (cyclic corner index into the vertex quad).
    pub fn vertex_tangent(&self, dir: usize, corner: usize) -> Result<PLine<S>> {
        match (dir, corner) {
            (0, 0) => self.b1.tangent_start(),
            (0, 1) => self.b1.tangent_end(),
            (0, 3) => self.b1_2.tangent_start(),
            (0, 2) => self.b1_2.tangent_end(),
            (1, 0) => self.b2.tangent_start(),
            (1, 3) => self.b2.tangent_end(),
            (1, 1) => self.b2_1.tangent_start(),
            (1, 2) => self.b2_1.tangent_end(),
            _ => Err(GeomError::IndexOutOfBounds),
        }
    }

    /// The eight vertex tangents arranged as an elementary cube: lattice
    /// directions 1 and 2 shift the corner, direction 3 switches the tangent
    /// direction.
    pub fn vertex_tangent_cube(&self) -> Result<CubeLines<S>> {
        Ok([
            self.vertex_tangent(0, 0)?,
            self.vertex_tangent(0, 1)?,
            self.vertex_tangent(0, 3)?,
            self.vertex_tangent(1, 0)?,
            self.vertex_tangent(0, 2)?,
            self.vertex_tangent(1, 1)?,
            self.vertex_tangent(1, 3)?,
            self.vertex_tangent(1, 2)?,
        ])
    }

    /// Tangent plane of the patch at a corner, spanned by the two vertex
    /// tangents there.
    pub fn vertex_tangent_plane(&self, corner: usize, tol: Tol) -> Result<HPlane<S>> {
        let v = &self.verts[corner];
        let t1 = self.vertex_tangent(0, corner)?;
        let t2 = self.vertex_tangent(1, corner)?;
        plane_through_points(v, &t1.other_point(v, tol), &t2.other_point(v, tol), tol)
    }

    /// Point of the patch at parameters (u, v) in [0, 1]^2.
    ///
    /// Boundary parameters evaluate the stored arcs directly; interior
    /// points are the meet of the three planes through the arc points and
    /// the characteristic lines. Samples where an arc point falls on a
    /// characteristic line are singular and reported as `DegenerateMeet`.
    pub fn eval(&self, u: &S, v: &S, tol: Tol) -> Result<HPoint<S>> {
        if *v == S::zero() {
            return eval_arc(&self.b1, u);
        }
        if *v == S::one() {
            return eval_arc(&self.b1_2, u);
        }
        if *u == S::zero() {
            return eval_arc(&self.b2, v);
        }
        if *u == S::one() {
            return eval_arc(&self.b2_1, v);
        }
        let x1t = eval_arc(&self.b1, u)?;
        let x2t = eval_arc(&self.b2, v)?;
        let p0 = plane_through_points(&self.verts[0], &x1t, &x2t, tol)
            .map_err(|_| GeomError::DegenerateMeet)?;
        let p1 = plane_point_line(&x1t, &self.a2, tol).map_err(|_| GeomError::DegenerateMeet)?;
        let p2 = plane_point_line(&x2t, &self.a1, tol).map_err(|_| GeomError::DegenerateMeet)?;
        meet_three_planes(&p0, &p1, &p2, tol).map_err(|_| GeomError::DegenerateMeet)
    }

    /// Isoparametric conic of direction `dir` at complementary parameter s:
    /// the perspective image of the direction's base arc from the Laplace
    /// point of the sub-quad cut at s. s = 0 and s = 1 return the stored
    /// boundary arcs.
    pub fn char_conic(&self, dir: usize, s: &S, tol: Tol) -> Result<ConicArc<S>> {
        if dir > 1 {
            return Err(GeomError::IndexOutOfBounds);
        }
        if *s == S::zero() {
            return Ok(if dir == 0 { self.b1.clone() } else { self.b2.clone() });
        }
        if *s == S::one() {
            return Ok(if dir == 0 { self.b1_2.clone() } else { self.b2_1.clone() });
        }
        let sub = |p: Result<HPoint<S>>| p.map_err(|_| GeomError::DegenerateSubQuad);
        let (base, axis, quad, ldir) = if dir == 0 {
            let x2t = sub(eval_arc(&self.b2, s))?;
            let x12t = sub(eval_arc(&self.b2_1, s))?;
            let quad = [self.verts[0].clone(), self.verts[1].clone(), x12t, x2t];
            (&self.b1, &self.a1, quad, 1)
        } else {
            let x1t = sub(eval_arc(&self.b1, s))?;
            let x12t = sub(eval_arc(&self.b1_2, s))?;
            let quad = [self.verts[0].clone(), x1t, x12t, self.verts[3].clone()];
            (&self.b2, &self.a2, quad, 0)
        };
        let y = laplace_point(&quad, ldir, tol).map_err(|_| GeomError::DegenerateSubQuad)?;
        // Target plane: the pencil member through the characteristic line
        // and the moving arc point.
        let moving = if dir == 0 { &quad[3] } else { &quad[1] };
        let target =
            plane_point_line(moving, axis, tol).map_err(|_| GeomError::DegenerateSubQuad)?;
        if base.plane().contains(&y, tol) || target.contains(&y, tol) {
            return Err(GeomError::DegenerateSubQuad);
        }
        let tau = central_projection(&y, &target, tol)
            .map_err(|_| GeomError::DegenerateSubQuad)?;
        map_arc(&tau, base, tol)
    }

    /// Q-net of eval samples over the parameter grid us x vs. Both lists
    /// must start at 0, end at 1, and increase strictly.
    pub fn refine(&self, us: &[S], vs: &[S], tol: Tol) -> Result<QNet<S>> {
        for list in [us, vs] {
            if list.len() < 2 || list[0] != S::zero() || list[list.len() - 1] != S::one() {
                return Err(GeomError::ParameterOutOfRange(
                    list.first().map(|t| t.to_f64()).unwrap_or(f64::NAN),
                ));
            }
            for w in list.windows(2) {
                if w[1] <= w[0] {
                    return Err(GeomError::ParameterOutOfRange(w[1].to_f64()));
                }
            }
        }
        let bx = LatticeBox::new(&[us.len(), vs.len()])?;
        let mut pts = Vec::with_capacity(bx.len());
        for z in bx.iter() {
            pts.push(self.eval(&us[z[0]], &vs[z[1]], tol)?);
        }
        QNet::from_points(bx, pts)
    }

    /// Isoparametric sub-patch over [u0, u1] x [v0, v1], reparametrised to
    /// the unit square. Its boundary arcs are the subdivided characteristic
    /// conics at the cut parameters, so the result is again a patch of the
    /// same surface: sub.eval(u, v) = eval(u0 + u (u1-u0), v0 + v (v1-v0)).
    pub fn sub_patch(&self, u0: &S, u1: &S, v0: &S, v1: &S, tol: Tol) -> Result<SCPatch<S>> {
        for t in [u0, u1, v0, v1] {
            if *t < S::zero() || *t > S::one() {
                return Err(GeomError::ParameterOutOfRange(t.to_f64()));
            }
        }
        if !(*u0 < *u1) || !(*v0 < *v1) {
            return Err(GeomError::DegenerateSpan);
        }
        let b1 = subdivide_arc(&self.char_conic(0, v0, tol)?, u0, u1, tol)?;
        let b1_2 = subdivide_arc(&self.char_conic(0, v1, tol)?, u0, u1, tol)?;
        let b2 = subdivide_arc(&self.char_conic(1, u0, tol)?, v0, v1, tol)?;
        let b2_1 = subdivide_arc(&self.char_conic(1, u1, tol)?, v0, v1, tol)?;
        let verts = [
            b1.c0().clone(),
            b1.c2().clone(),
            b1_2.c2().clone(),
            b1_2.c0().clone(),
        ];
        SCPatch::from_boundary(verts, b1, b2, b1_2, b2_1, tol)
    }

    /// Cone of surface tangent planes along one boundary arc. Its apex is
    /// the meet of the transverse tangents at the arc's endpoints and its
    /// generators are the transverse tangents along the arc.
    pub fn tangent_cone(&self, dir: usize, high: bool, tol: Tol) -> Result<QuadraticCone<S>> {
        let base = self.boundary_arc(dir, high)?.clone();
        let other = 1 - dir;
        // Corners at the two ends of the requested arc.
        let (ca, cb) = match (dir, high) {
            (0, false) => (0, 1),
            (0, true) => (3, 2),
            (1, false) => (0, 3),
            _ => (1, 2),
        };
        let ta = self.vertex_tangent(other, ca)?;
        let tb = self.vertex_tangent(other, cb)?;
        let apex = match lines_intersect(&ta, &tb, tol) {
            Ok(Some(p)) => p,
            _ => return Err(GeomError::DegenerateCone),
        };
        if base.plane().contains(&apex, tol) {
            return Err(GeomError::DegenerateCone);
        }
        Ok(QuadraticCone { apex, base })
    }

    /// Parameters where a base arc crosses the complementary characteristic
    /// line. Evaluation along those parameter lines is singular: the first
    /// list holds singular u (b1 meets a2), the second singular v (b2 meets
    /// a1).
    pub fn singular_params(&self, tol: Tol) -> Result<(Vec<S>, Vec<S>)> {
        let mut us = Vec::new();
        if let Some(t) = arc_line_crossing(&self.b1, &self.a2, tol)? {
            us.push(t);
        }
        let mut vs = Vec::new();
        if let Some(t) = arc_line_crossing(&self.b2, &self.a1, tol)? {
            vs.push(t);
        }
        Ok((us, vs))
    }
}

/// Parameter in [0, 1] where the arc's conic passes through the unique meet
/// of `line` with the arc's plane, if it does.
fn arc_line_crossing<S: Scalar>(
    arc: &ConicArc<S>,
    line: &PLine<S>,
    tol: Tol,
) -> Result<Option<S>> {
    let q = match meet_line_plane(line, arc.plane(), tol) {
        Ok(q) => q,
        Err(GeomError::LineInPlane) => return Err(GeomError::DegenerateMeet),
        Err(e) => return Err(e),
    };
    let r = arc.on_conic_residual(&q, tol)?;
    if !tol.is_zero(&r) {
        return Ok(None);
    }
    let basis = vec![
        arc.c0().coords().to_vec(),
        arc.c1().coords().to_vec(),
        arc.c2().coords().to_vec(),
    ];
    let abc = coords_in_basis(&basis, q.coords(), tol)?;
    let w = arc.weights();
    // With q ~ (1-t)^2 w0 c0 + 2t(1-t) w1 c1 + t^2 w2 c2 the parameter is
    // t = beta / (beta + 2 alpha) for the weighted coordinates.
    let alpha = abc[0].clone() / w[0].clone();
    let beta = abc[1].clone() / w[1].clone();
    let den = beta.clone() + S::from_int(2) * alpha;
    if tol.is_zero_rel(&den, crate::scalar::max_abs(&abc).to_f64()) {
        return Ok(None);
    }
    let t = beta / den;
    if t < S::zero() || t > S::one() {
        return Ok(None);
    }
    if !eval_arc(arc, &t)?.proj_eq(&q, tol) {
        return Ok(None);
    }
    Ok(Some(t))
}

/// Build an adapted SC-patch over a planar quad from per-direction tangent
/// data and shoulder points.
///
/// For direction i the tangents t_i (at x), t_i1 (at x1), t_i2 (at x2) must
/// pass through their vertices and meet t_i; the fourth tangent is
/// determined as (x12 v t_i1) ^ (x12 v t_i2). The base arcs interpolate the
/// shoulders s1, s2; opposite arcs are the Laplace perspectivity images.
#[allow(clippy::too_many_arguments)]
pub fn build_adapted_patch<S: Scalar>(
    quad: &[HPoint<S>; 4],
    t1: &PLine<S>,
    t1_1: &PLine<S>,
    t1_2: &PLine<S>,
    t2: &PLine<S>,
    t2_1: &PLine<S>,
    t2_2: &PLine<S>,
    s1: &HPoint<S>,
    s2: &HPoint<S>,
    tol: Tol,
) -> Result<SCPatch<S>> {
    if !is_planar_quad(quad, tol) {
        return Err(GeomError::NonPlanarInput);
    }
    let [x, x1, _, x2] = quad;
    let chain = |ok: bool| if ok { Ok(()) } else { Err(GeomError::TangentChainBroken) };
    chain(t1.contains(x, tol) && t1_1.contains(x1, tol) && t1_2.contains(x2, tol))?;
    chain(t2.contains(x, tol) && t2_1.contains(x1, tol) && t2_2.contains(x2, tol))?;
    // Fourth tangent of each direction, forced by the cyclic intersection
    // conditions at x12.
    let t1_12 = crate::torsal::extend_quad_lines(quad, t1, t1_1, t1_2, tol)
        .map_err(|_| GeomError::TangentChainBroken)?;
    let t2_12 = crate::torsal::extend_quad_lines(quad, t2, t2_1, t2_2, tol)
        .map_err(|_| GeomError::TangentChainBroken)?;
    let b1 = arc_from_tangents_and_point(x, x1, t1, t1_1, s1, tol)?;
    let b2 = arc_from_tangents_and_point(x, x2, t2, t2_2, s2, tol)?;
    let y1 = laplace_point(quad, 0, tol)?;
    let y2 = laplace_point(quad, 1, tol)?;
    let pi1_2 = plane_of_lines(&t1_2, &t1_12, tol)?;
    let pi2_1 = plane_of_lines(&t2_1, &t2_12, tol)?;
    for (y, pa, pb) in [(&y2, b1.plane(), &pi1_2), (&y1, b2.plane(), &pi2_1)] {
        if pa.contains(y, tol) || pb.contains(y, tol) {
            return Err(GeomError::LaplacePointOnBoundaryPlane);
        }
    }
    let b1_2 = map_arc(&central_projection(&y2, &pi1_2, tol)?, &b1, tol)?;
    let b2_1 = map_arc(&central_projection(&y1, &pi2_1, tol)?, &b2, tol)?;
    SCPatch::from_boundary(quad.clone(), b1, b2, b1_2, b2_1, tol)
}

/// Supporting plane of two distinct intersecting lines.
pub(crate) fn plane_of_lines<S: Scalar>(a: &PLine<S>, b: &PLine<S>, tol: Tol) -> Result<HPlane<S>> {
    let (p, q) = a.span();
    let r = b.span().0;
    let r = if crate::projective::Subspace::from_points(
        &[p.clone(), q.clone(), r.clone()],
        tol,
    )
    .rank()
        == 3
    {
        r.clone()
    } else {
        b.span().1.clone()
    };
    plane_through_points(p, q, &r, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rank;
    use crate::projective::ProjMap;
    use crate::torsal::{is_fundamental_cube, rank_defect_residual};
    use num_rational::BigRational;
    use num_traits::Zero;

    type Q = BigRational;

    fn t() -> Tol {
        Tol::default()
    }

    fn q(n: i64, d: i64) -> Q {
        Q::ratio(n, d)
    }

    fn qpt(x: Q, y: Q, z: Q) -> HPoint<Q> {
        HPoint::affine3(x, y, z)
    }

    fn ipt(x: i64, y: i64, z: i64) -> HPoint<Q> {
        qpt(q(x, 1), q(y, 1), q(z, 1))
    }

    struct TentData {
        quad: [HPoint<Q>; 4],
        t1: PLine<Q>,
        t1_1: PLine<Q>,
        t1_2: PLine<Q>,
        t2: PLine<Q>,
        t2_1: PLine<Q>,
        t2_2: PLine<Q>,
        s1: HPoint<Q>,
        s2: HPoint<Q>,
    }

    /// Unit-square quad with tent-shaped mirror-symmetric tangents and
    /// shoulders; the mirror is x -> 1 - x.
    fn tent_data() -> TentData {
        let quad = [ipt(0, 0, 0), ipt(1, 0, 0), ipt(1, 1, 0), ipt(0, 1, 0)];
        let t1 = PLine::through(&quad[0], &qpt(q(1, 2), q(0, 1), q(1, 1))).unwrap();
        let t1_1 = PLine::through(&quad[1], &qpt(q(1, 2), q(0, 1), q(1, 1))).unwrap();
        let t1_2 = PLine::through(&quad[3], &qpt(q(1, 2), q(1, 1), q(1, 1))).unwrap();
        let t2 = PLine::through(&quad[0], &qpt(q(0, 1), q(1, 2), q(1, 1))).unwrap();
        let t2_2 = PLine::through(&quad[3], &qpt(q(0, 1), q(1, 2), q(1, 1))).unwrap();
        let t2_1 = PLine::through(&quad[1], &qpt(q(1, 1), q(1, 2), q(1, 1))).unwrap();
        let s1 = qpt(q(1, 2), q(0, 1), q(1, 2));
        let s2 = qpt(q(0, 1), q(1, 2), q(1, 2));
        TentData { quad, t1, t1_1, t1_2, t2, t2_1, t2_2, s1, s2 }
    }

    fn build(d: &TentData) -> Result<SCPatch<Q>> {
        build_adapted_patch(
            &d.quad, &d.t1, &d.t1_1, &d.t1_2, &d.t2, &d.t2_1, &d.t2_2, &d.s1, &d.s2,
            t(),
        )
    }

    fn tent_patch() -> SCPatch<Q> {
        build(&tent_data()).unwrap()
    }

    fn mirror() -> ProjMap<Q> {
        ProjMap::from_matrix(vec![
            vec![q(-1, 1), q(0, 1), q(0, 1), q(1, 1)],
            vec![q(0, 1), q(1, 1), q(0, 1), q(0, 1)],
            vec![q(0, 1), q(0, 1), q(1, 1), q(0, 1)],
            vec![q(0, 1), q(0, 1), q(0, 1), q(1, 1)],
        ])
    }

    fn collinear(a: &HPoint<Q>, b: &HPoint<Q>, c: &HPoint<Q>) -> bool {
        let rows = vec![
            a.coords().to_vec(),
            b.coords().to_vec(),
            c.coords().to_vec(),
        ];
        rank(&rows, t()) == 2
    }

    /// Opposite arcs are perspective from the non-corresponding Laplace
    /// point: corresponding parameter points are collinear with it, exactly.
    #[test]
    fn opposite_arcs_are_laplace_perspective() {
        let p = tent_patch();
        let y2 = p.laplace(1).unwrap();
        let y1 = p.laplace(0).unwrap();
        for k in 0..=6i64 {
            let s = q(k, 6);
            let a = eval_arc(p.b1(), &s).unwrap();
            let b = eval_arc(p.b1_2(), &s).unwrap();
            assert!(collinear(&a, &b, y2));
            let a = eval_arc(p.b2(), &s).unwrap();
            let b = eval_arc(p.b2_1(), &s).unwrap();
            assert!(collinear(&a, &b, y1));
        }
        // Rebuilding from the boundary reproduces the same patch.
        let r = SCPatch::from_boundary(
            p.verts().clone(),
            p.b1().clone(),
            p.b2().clone(),
            p.b1_2().clone(),
            p.b2_1().clone(),
            t(),
        )
        .unwrap();
        for k in 0..=3i64 {
            let u = q(k, 3);
            let a = p.eval(&u, &q(1, 2), t()).unwrap();
            let b = r.eval(&u, &q(1, 2), t()).unwrap();
            assert!(a.proj_eq(&b, t()));
        }
    }

    /// The mirror symmetry of the construction data carries over to the
    /// whole patch: M(eval(u, v)) = eval(1 - u, v).
    #[test]
    fn symmetric_patch_is_mirror_invariant() {
        let p = tent_patch();
        let m = mirror();
        for (u, v) in [
            (q(1, 4), q(1, 3)),
            (q(1, 2), q(2, 5)),
            (q(2, 3), q(3, 4)),
            (q(5, 6), q(1, 5)),
        ] {
            let a = m.apply(&p.eval(&u, &v, t()).unwrap()).unwrap();
            let b = p.eval(&(q(1, 1) - u), &v, t()).unwrap();
            assert!(a.proj_eq(&b, t()));
        }
        // The midpoint characteristic conic maps to itself under the mirror.
        let cc = p.char_conic(0, &q(1, 2), t()).unwrap();
        for k in 0..=4i64 {
            let u = q(k, 4);
            let a = m.apply(&eval_arc(&cc, &u).unwrap()).unwrap();
            let b = eval_arc(&cc, &(q(1, 1) - u)).unwrap();
            assert!(a.proj_eq(&b, t()));
        }
    }

    /// Eval hits the corners and restricts to the four boundary arcs.
    #[test]
    fn eval_boundary_restrictions() {
        let p = tent_patch();
        let corners = [
            ((0i64, 0i64), 0usize),
            ((1, 0), 1),
            ((1, 1), 2),
            ((0, 1), 3),
        ];
        for ((u, v), c) in corners {
            let e = p.eval(&q(u, 1), &q(v, 1), t()).unwrap();
            assert!(e.proj_eq(&p.verts()[c], t()));
        }
        for k in 1..4i64 {
            let s = q(k, 4);
            assert!(p
                .eval(&s, &q(0, 1), t())
                .unwrap()
                .proj_eq(&eval_arc(p.b1(), &s).unwrap(), t()));
            assert!(p
                .eval(&s, &q(1, 1), t())
                .unwrap()
                .proj_eq(&eval_arc(p.b1_2(), &s).unwrap(), t()));
            assert!(p
                .eval(&q(0, 1), &s, t())
                .unwrap()
                .proj_eq(&eval_arc(p.b2(), &s).unwrap(), t()));
            assert!(p
                .eval(&q(1, 1), &s, t())
                .unwrap()
                .proj_eq(&eval_arc(p.b2_1(), &s).unwrap(), t()));
        }
    }

    /// Characteristic conics agree with eval pointwise and live in the
    /// plane pencil through the characteristic line.
    #[test]
    fn char_conics_match_eval() {
        let p = tent_patch();
        for (nk, dk) in [(1i64, 3i64), (1, 2), (3, 4)] {
            let s = q(nk, dk);
            let cc = p.char_conic(0, &s, t()).unwrap();
            for j in 0..=4i64 {
                let u = q(j, 4);
                let a = eval_arc(&cc, &u).unwrap();
                let b = p.eval(&u, &s, t()).unwrap();
                assert!(a.proj_eq(&b, t()));
            }
            // Plane of the conic belongs to the pencil through a1.
            let (pa, pb) = p.char_line(0).unwrap().span();
            assert!(cc.plane().contains(pa, t()) && cc.plane().contains(pb, t()));

            let cc = p.char_conic(1, &s, t()).unwrap();
            for j in 0..=4i64 {
                let v = q(j, 4);
                let a = eval_arc(&cc, &v).unwrap();
                let b = p.eval(&s, &v, t()).unwrap();
                assert!(a.proj_eq(&b, t()));
            }
        }
        // Boundary members come back unchanged.
        assert!(p
            .char_conic(0, &q(0, 1), t())
            .unwrap()
            .proj_eq_parametrized(p.b1(), t()));
        assert!(p
            .char_conic(0, &q(1, 1), t())
            .unwrap()
            .proj_eq_parametrized(p.b1_2(), t()));
    }

    /// Vertex coplanarity, the fundamental tangent cube, and concurrent
    /// vertex tangent planes.
    #[test]
    fn patch_vertex_properties() {
        let p = tent_patch();
        assert!(is_planar_quad(p.verts(), t()));
        let cube = p.vertex_tangent_cube().unwrap();
        let check = is_fundamental_cube(&cube, t()).unwrap();
        assert!(check.fundamental, "tangent cube: {:?}", check);
        assert!(check.predicates.iter().all(|b| *b));
        let rows: Vec<Vec<Q>> = (0..4)
            .map(|c| p.vertex_tangent_plane(c, t()).unwrap().coeffs().to_vec())
            .collect();
        assert_eq!(rank(&rows, t()), 3);
        assert!(rank_defect_residual(&rows, 4, t()).is_zero());
    }

    /// Refinement returns exact-planar Q-nets whose vertices are the eval
    /// samples.
    #[test]
    fn refine_produces_planar_qnets() {
        let p = tent_patch();
        let us = vec![q(0, 1), q(1, 1)];
        let quad_net = p.refine(&us, &us, t()).unwrap();
        for (c, z) in [(0usize, [0usize, 0usize]), (1, [1, 0]), (2, [1, 1]), (3, [0, 1])] {
            assert!(quad_net.vertex(&z).unwrap().proj_eq(&p.verts()[c], t()));
        }
        let grid = vec![q(0, 1), q(1, 3), q(1, 2), q(1, 1)];
        let net = p.refine(&grid, &grid, t()).unwrap();
        assert!(net.is_qnet(t()).unwrap());
        assert!(net
            .vertex(&[2, 1])
            .unwrap()
            .proj_eq(&p.eval(&q(1, 2), &q(1, 3), t()).unwrap(), t()));
        // Parameter lists must cover [0, 1] and increase.
        let bad = vec![q(0, 1), q(1, 2)];
        assert!(matches!(
            p.refine(&bad, &grid, t()).unwrap_err(),
            GeomError::ParameterOutOfRange(_)
        ));
    }

    /// Tangent cones: apex on the characteristic line of the conjugate
    /// direction, every surface tangent plane along the arc contains it,
    /// and the symmetric patch puts it on the mirror plane.
    /// A sub-patch is the same surface piece under an affine change of
    /// parameters: every interior sample agrees with the parent, exactly.
    #[test]
    fn sub_patch_is_exact_reparametrisation() {
        let p = tent_patch();
        let (u0, u1) = (q(1, 5), q(3, 4));
        let (v0, v1) = (q(1, 3), q(7, 8));
        let sub = p.sub_patch(&u0, &u1, &v0, &v1, t()).unwrap();
        for a in 0..=3 {
            for b in 0..=3 {
                let (su, sv) = (q(a, 3), q(b, 3));
                let pu = u0.clone() + su.clone() * (u1.clone() - u0.clone());
                let pv = v0.clone() + sv.clone() * (v1.clone() - v0.clone());
                let got = sub.eval(&su, &sv, t()).unwrap();
                let want = p.eval(&pu, &pv, t()).unwrap();
                assert_eq!(got.coords(), want.coords(), "sample ({a},{b})/3");
            }
        }
        assert!(matches!(
            p.sub_patch(&q(1, 2), &q(1, 2), &v0, &v1, t()).unwrap_err(),
            GeomError::DegenerateSpan
        ));
    }

    #[test]
    fn tangent_cones_touch_along_boundaries() {
        let p = tent_patch();
        // Cone along b1: generators are direction-2 tangents.
        let cone = p.tangent_cone(0, false, t()).unwrap();
        let a2 = p.char_line(1).unwrap();
        assert!(a2.contains(cone.apex(), t()));
        let m = mirror();
        assert!(m.apply(cone.apex()).unwrap().proj_eq(cone.apex(), t()));
        for k in 0..=4i64 {
            let u = q(k, 4);
            // Surface tangent plane at (u, 0): span of the b1 tangent and
            // the start tangent of the direction-2 conic through the point.
            let pt = eval_arc(p.b1(), &u).unwrap();
            let along = crate::conic::arc_tangent_at(p.b1(), &u, t()).unwrap();
            let across = p.char_conic(1, &u, t()).unwrap().tangent_start().unwrap();
            assert!(across.contains(&pt, t()));
            let tp = plane_through_points(
                &pt,
                &along.other_point(&pt, t()),
                &across.other_point(&pt, t()),
                t(),
            )
            .unwrap();
            assert!(tp.contains(cone.apex(), t()));
            // The cone's own tangent plane along the shared generator is
            // the same plane.
            let own = cone.tangent_plane_at(&u, t()).unwrap();
            assert!(own.proj_eq(&tp, t()));
        }
        // All four cones exist and their apexes sit on the right lines.
        let a1 = p.char_line(0).unwrap();
        assert!(a2.contains(p.tangent_cone(0, true, t()).unwrap().apex(), t()));
        assert!(a1.contains(p.tangent_cone(1, false, t()).unwrap().apex(), t()));
        assert!(a1.contains(p.tangent_cone(1, true, t()).unwrap().apex(), t()));
    }

    /// A shoulder chosen on the characteristic line produces a declared
    /// singular parameter; evaluation there degenerates, elsewhere it works.
    #[test]
    fn singular_crossing_detected_and_rejected() {
        // Tent tangents, but the b2 shoulder sits at the meet of a1 with
        // b2's plane: the vertical ideal point. The arc runs through it at
        // t = 1/2.
        let mut d = tent_data();
        d.s2 = HPoint::new(vec![q(0, 1), q(0, 1), q(1, 1), q(0, 1)]).unwrap();
        let p = build(&d).unwrap();
        let (su, sv) = p.singular_params(t()).unwrap();
        assert!(su.is_empty());
        assert_eq!(sv, vec![q(1, 2)]);
        assert!(matches!(
            p.eval(&q(1, 3), &q(1, 2), t()).unwrap_err(),
            GeomError::DegenerateMeet
        ));
        assert!(p.eval(&q(1, 3), &q(1, 4), t()).is_ok());
        // A refinement grid through the singular line errors.
        let fine = vec![q(0, 1), q(1, 2), q(1, 1)];
        assert!(p.refine(&fine, &fine, t()).is_err());
        // The regular tent patch reports no singular parameters.
        let (su, sv) = tent_patch().singular_params(t()).unwrap();
        assert!(su.is_empty() && sv.is_empty());
    }

    /// Degenerate inputs are rejected: in-plane tangents put the Laplace
    /// point on a boundary plane, broken chains are reported, and arcs that
    /// are not perspective images fail assembly.
    #[test]
    fn degenerate_patch_inputs_rejected() {
        // All construction data inside the quad plane: the planar "patch"
        // is rejected before any arc leaves the plane.
        let mut d = tent_data();
        d.t1 = PLine::through(&d.quad[0], &qpt(q(1, 2), q(1, 4), q(0, 1))).unwrap();
        d.t1_1 = PLine::through(&d.quad[1], &qpt(q(1, 2), q(1, 4), q(0, 1))).unwrap();
        d.t1_2 = PLine::through(&d.quad[3], &qpt(q(1, 2), q(3, 4), q(0, 1))).unwrap();
        d.t2 = PLine::through(&d.quad[0], &qpt(q(1, 4), q(1, 2), q(0, 1))).unwrap();
        d.t2_2 = PLine::through(&d.quad[3], &qpt(q(1, 4), q(1, 2), q(0, 1))).unwrap();
        d.t2_1 = PLine::through(&d.quad[1], &qpt(q(3, 4), q(1, 2), q(0, 1))).unwrap();
        d.s1 = qpt(q(1, 2), q(1, 8), q(0, 1));
        d.s2 = qpt(q(1, 8), q(1, 2), q(0, 1));
        let err = build(&d).unwrap_err();
        assert!(matches!(
            err,
            GeomError::TangentChainBroken | GeomError::LaplacePointOnBoundaryPlane
        ));

        // In-plane boundary arcs fed directly to assembly: the Laplace
        // points lie on the collapsed boundary planes.
        let quad = tent_data().quad;
        let flat = |c0: &HPoint<Q>, mid: HPoint<Q>, c2: &HPoint<Q>| {
            ConicArc::from_standard(c0.clone(), mid, c2.clone(), q(1, 1), t()).unwrap()
        };
        let err = SCPatch::from_boundary(
            quad.clone(),
            flat(&quad[0], qpt(q(1, 2), q(1, 4), q(0, 1)), &quad[1]),
            flat(&quad[0], qpt(q(1, 4), q(1, 2), q(0, 1)), &quad[3]),
            flat(&quad[3], qpt(q(1, 2), q(3, 4), q(0, 1)), &quad[2]),
            flat(&quad[1], qpt(q(3, 4), q(1, 2), q(0, 1)), &quad[2]),
            t(),
        )
        .unwrap_err();
        assert!(matches!(err, GeomError::LaplacePointOnBoundaryPlane));

        // Tangent not through its vertex.
        let mut d = tent_data();
        d.t1 = PLine::through(&ipt(5, 5, 5), &ipt(6, 5, 5)).unwrap();
        let err = build(&d).unwrap_err();
        assert!(matches!(err, GeomError::TangentChainBroken));

        // Opposite arc replaced by a non-perspective arc: assembly fails.
        let p = tent_patch();
        let other = ConicArc::from_standard(
            p.b1_2().c0().clone(),
            p.b1_2().c1().clone(),
            p.b1_2().c2().clone(),
            p.b1_2().standard_weight_sq() + q(1, 1),
            t(),
        )
        .unwrap();
        let err = SCPatch::from_boundary(
            p.verts().clone(),
            p.b1().clone(),
            p.b2().clone(),
            other,
            p.b2_1().clone(),
            t(),
        )
        .unwrap_err();
        assert!(matches!(err, GeomError::CommonBoundaryViolated(_)));
    }
}
