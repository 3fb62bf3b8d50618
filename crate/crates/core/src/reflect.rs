//! Projective reflections attached to the edges of a Q-net.
//!
//! A frame at a vertex is a spanning bundle of lines through it. Two frames
//! at distinct base points whose corresponding lines intersect determine a
//! unique harmonic homology exchanging them: the mirror is the hyperplane
//! spanned by the focal points of corresponding lines, and the center
//! completes the crossing point on the base line to a harmonic range with
//! the two bases. Transporting one auxiliary frame around an elementary quad
//! propagates a pair of edge reflections to the opposite edges; the result
//! does not depend on the auxiliary frame, which turns the reflections into
//! a consistent 2D system on lattice edges driven by the Q-net alone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GeomError, Result, Site};
use crate::lattice::{LatticeBox, LatticeMap};
use crate::linalg;
use crate::projective::{
    harmonic_conjugate, hyperplane_through, lines_intersect, meet_line_plane,
    projective_reflection, HPlane, HPoint, PLine, ProjMap, ProjReflection,
};
use crate::qnet::{is_planar_quad, QNet};
use crate::scalar::{Scalar, Tol};
use crate::torsal::extend_quad_lines;

/// Bundle of N lines through a common base point of RP^N, jointly spanning
/// the ambient space.
#[derive(Clone, Debug)]
pub struct Frame<S: Scalar> {
    base: HPoint<S>,
    lines: Vec<PLine<S>>,
}

impl<S: Scalar> Frame<S> {
    pub fn new(base: HPoint<S>, lines: Vec<PLine<S>>, tol: Tol) -> Result<Self> {
        let n = base.dim_ambient();
        if lines.len() != n - 1 {
            return Err(GeomError::MalformedFrame);
        }
        let mut rows = vec![base.raw()];
        for l in &lines {
            if !l.contains(&base, tol) {
                return Err(GeomError::MalformedFrame);
            }
            rows.push(l.other_point(&base, tol).raw());
        }
        if linalg::rank(&rows, tol) != n {
            return Err(GeomError::MalformedFrame);
        }
        Ok(Frame { base, lines })
    }

    pub fn base(&self) -> &HPoint<S> {
        &self.base
    }

    pub fn lines(&self) -> &[PLine<S>] {
        &self.lines
    }

    /// Image frame under an invertible projective map.
    pub fn transform(&self, m: &ProjMap<S>, tol: Tol) -> Result<Frame<S>> {
        let base = m.apply(&self.base)?;
        let lines = self
            .lines
            .iter()
            .map(|l| m.apply_line(l, tol))
            .collect::<Result<Vec<_>>>()?;
        Frame::new(base, lines, tol)
    }
}

/// The unique projective reflection exchanging two frames. Focal points of
/// corresponding lines span the mirror; the center is the harmonic conjugate
/// of the mirror's trace on the base line with respect to the two bases.
pub fn reflection_between_frames<S: Scalar>(
    t: &Frame<S>,
    ti: &Frame<S>,
    tol: Tol,
) -> Result<ProjReflection<S>> {
    let (x, xi) = (t.base(), ti.base());
    if t.lines().len() != ti.lines().len() || x.dim_ambient() != xi.dim_ambient() {
        return Err(GeomError::MalformedFrame);
    }
    if x.proj_eq(xi, tol) {
        return Err(GeomError::DegenerateSpan);
    }
    let mut focals = Vec::with_capacity(t.lines().len());
    for (a, b) in t.lines().iter().zip(ti.lines()) {
        focals.push(lines_intersect(a, b, tol)?.ok_or(GeomError::SkewNeighbors)?);
    }
    let mirror =
        hyperplane_through(&focals, tol).map_err(|_| GeomError::FocalSpanDegenerate)?;
    if mirror.contains(x, tol) || mirror.contains(xi, tol) {
        return Err(GeomError::BaseOnMirror);
    }
    let axis = PLine::through(x, xi)?;
    let q = meet_line_plane(&axis, &mirror, tol)?;
    let o = harmonic_conjugate(&q, x, xi, tol)?;
    projective_reflection(&o, &mirror, tol)
}

/// Propagates a pair of edge reflections across one planar quad using an
/// explicit auxiliary frame at the base vertex: the frame is pushed along
/// both edges, completed over the quad line by line, and the two new frame
/// pairs yield the reflections of the far edges.
pub fn propagate_reflections_with_frame<S: Scalar>(
    quad: &[HPoint<S>; 4],
    f1: &ProjReflection<S>,
    f2: &ProjReflection<S>,
    aux: &Frame<S>,
    tol: Tol,
) -> Result<(ProjReflection<S>, ProjReflection<S>)> {
    let [x, x1, x12, x2] = quad;
    if !is_planar_quad(quad, tol) {
        return Err(GeomError::DegenerateQuad);
    }
    if !aux.base().proj_eq(x, tol) {
        return Err(GeomError::MalformedFrame);
    }
    if !f1.apply(x)?.proj_eq(x1, tol) || !f2.apply(x)?.proj_eq(x2, tol) {
        return Err(GeomError::InconsistentCauchyData(
            "reflection does not map the quad edge".into(),
        ));
    }
    let t1 = aux.transform(f1.map(), tol)?;
    let t2 = aux.transform(f2.map(), tol)?;
    let mut lines12 = Vec::with_capacity(aux.lines().len());
    for j in 0..aux.lines().len() {
        lines12.push(extend_quad_lines(quad, &aux.lines()[j], &t1.lines()[j], &t2.lines()[j], tol)?);
    }
    let t12 = Frame::new(x12.clone(), lines12, tol)?;
    let f1_2 = reflection_between_frames(&t2, &t12, tol)?;
    let f2_1 = reflection_between_frames(&t1, &t12, tol)?;
    Ok((f1_2, f2_1))
}

fn seeded_frame<S: Scalar>(seed: u64, x: &HPoint<S>, tol: Tol) -> Result<Frame<S>> {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    let n = x.dim_ambient();
    let mut lines = Vec::with_capacity(n - 1);
    for _ in 0..n - 1 {
        for _ in 0..16 {
            let coords: Vec<S> = (0..n).map(|_| S::from_int(r.gen_range(-9..=9))).collect();
            let Ok(p) = HPoint::new(coords) else { continue };
            if p.proj_eq(x, tol) {
                continue;
            }
            if let Ok(l) = PLine::through(x, &p) {
                lines.push(l);
                break;
            }
        }
    }
    Frame::new(x.clone(), lines, tol)
}

/// Frame independent propagation of a reflection pair across a planar quad.
/// The auxiliary frame is drawn from a fixed seeded generator and reseeded
/// on degeneracy, a bounded number of times.
pub fn propagate_reflections<S: Scalar>(
    quad: &[HPoint<S>; 4],
    f1: &ProjReflection<S>,
    f2: &ProjReflection<S>,
    tol: Tol,
) -> Result<(ProjReflection<S>, ProjReflection<S>)> {
    const ATTEMPTS: usize = 8;
    let [x, x1, _, x2] = quad;
    if !is_planar_quad(quad, tol) {
        return Err(GeomError::DegenerateQuad);
    }
    if !f1.apply(x)?.proj_eq(x1, tol) || !f2.apply(x)?.proj_eq(x2, tol) {
        return Err(GeomError::InconsistentCauchyData(
            "reflection does not map the quad edge".into(),
        ));
    }
    for attempt in 0..ATTEMPTS {
        let seed = 0x5EEDu64.wrapping_add((attempt as u64).wrapping_mul(0x9E3779B97F4A7C15));
        let Ok(frame) = seeded_frame(seed, x, tol) else { continue };
        if let Ok(pair) = propagate_reflections_with_frame(quad, f1, f2, &frame, tol) {
            return Ok(pair);
        }
    }
    Err(GeomError::AuxiliaryFrameDegenerate(ATTEMPTS))
}

/// Projective reflections on every directed edge of a lattice box, one map
/// per direction on the matching edge box.
#[derive(Clone, Debug)]
pub struct ReflectionField<S: Scalar> {
    bx: LatticeBox,
    maps: Vec<LatticeMap<ProjReflection<S>>>,
}

impl<S: Scalar> ReflectionField<S> {
    pub fn new(bx: LatticeBox, maps: Vec<LatticeMap<ProjReflection<S>>>) -> Result<Self> {
        if maps.len() != bx.dims() {
            return Err(GeomError::BoxMismatch("one reflection map per direction".into()));
        }
        for (i, m) in maps.iter().enumerate() {
            if m.bx() != &bx.edge_box(i)? {
                return Err(GeomError::BoxMismatch(format!("edge box mismatch in direction {i}")));
            }
            if !m.is_full() {
                return Err(GeomError::BoxMismatch(format!(
                    "missing reflections in direction {i}"
                )));
            }
        }
        Ok(ReflectionField { bx, maps })
    }

    pub fn bx(&self) -> &LatticeBox {
        &self.bx
    }

    pub fn dims(&self) -> usize {
        self.bx.dims()
    }

    /// Reflection of the direction-i edge starting at z.
    pub fn reflection(&self, i: usize, z: &[usize]) -> Result<&ProjReflection<S>> {
        self.maps.get(i).ok_or(GeomError::IndexOutOfBounds)?.require(z)
    }
}

/// Propagates reflections prescribed on the coordinate axes of a Q-net over
/// the whole box, one planar quad at a time. In three and more dimensions
/// every interior edge is reached along several routes; later routes must
/// reproduce the stored map, otherwise the input data was inconsistent.
pub fn propagate_reflection_field<S: Scalar>(
    net: &QNet<S>,
    cauchy: &[LatticeMap<ProjReflection<S>>],
    tol: Tol,
) -> Result<ReflectionField<S>> {
    let bx = net.bx().clone();
    let m = bx.dims();
    if cauchy.len() != m {
        return Err(GeomError::BoxMismatch("one cauchy reflection map per direction".into()));
    }
    let mut maps: Vec<LatticeMap<ProjReflection<S>>> = Vec::with_capacity(m);
    for i in 0..m {
        maps.push(LatticeMap::new(bx.edge_box(i)?));
    }
    for i in 0..m {
        let ebx = maps[i].bx().clone();
        if cauchy[i].bx() != &ebx {
            return Err(GeomError::BoxMismatch(format!("cauchy edge box mismatch, direction {i}")));
        }
        for w in ebx.iter() {
            let on_axis = (0..m).all(|d| d == i || w[d] == 0);
            match cauchy[i].get(&w) {
                Some(f) if on_axis => {
                    let wi = bx.shifted(&w, i, 1).ok_or(GeomError::IndexOutOfBounds)?;
                    if !f.apply(net.vertex(&w)?)?.proj_eq(net.vertex(&wi)?, tol) {
                        return Err(GeomError::InconsistentCauchyData(
                            "cauchy reflection misses the far vertex".into(),
                        )
                        .at(Site::cell(&w, &[i])));
                    }
                    maps[i].set(&w, f.clone())?;
                }
                Some(_) => {
                    return Err(GeomError::InconsistentCauchyData(
                        "reflection prescribed off the axes".into(),
                    )
                    .at(Site::cell(&w, &[i])))
                }
                None if on_axis => {
                    return Err(GeomError::InconsistentCauchyData(format!(
                        "missing cauchy reflection at {}",
                        Site::cell(&w, &[i])
                    )))
                }
                None => {}
            }
        }
    }
    for z in bx.iter_by_level() {
        let nz: Vec<usize> = (0..m).filter(|&d| z[d] > 0).collect();
        if nz.len() < 2 {
            continue;
        }
        for a in 0..nz.len() {
            for b in (a + 1)..nz.len() {
                let (i, j) = (nz[a], nz[b]);
                let mut base = z.clone();
                base[i] -= 1;
                base[j] -= 1;
                let zi = bx.shifted(&base, i, 1).ok_or(GeomError::IndexOutOfBounds)?;
                let zj = bx.shifted(&base, j, 1).ok_or(GeomError::IndexOutOfBounds)?;
                let quad = [
                    net.vertex(&base)?.clone(),
                    net.vertex(&zi)?.clone(),
                    net.vertex(&z)?.clone(),
                    net.vertex(&zj)?.clone(),
                ];
                let fi = maps[i].require(&base)?.clone();
                let fj = maps[j].require(&base)?.clone();
                let (fi_j, fj_i) = propagate_reflections(&quad, &fi, &fj, tol)
                    .map_err(|e| e.at(Site::cell(&base, &[i, j])))?;
                match maps[i].get(&zj) {
                    Some(existing) if !existing.map().proj_eq(fi_j.map(), tol) => {
                        return Err(GeomError::RouteDisagreement.at(Site::cell(&base, &[i, j])))
                    }
                    Some(_) => {}
                    None => maps[i].set(&zj, fi_j)?,
                }
                match maps[j].get(&zi) {
                    Some(existing) if !existing.map().proj_eq(fj_i.map(), tol) => {
                        return Err(GeomError::RouteDisagreement.at(Site::cell(&base, &[i, j])))
                    }
                    Some(_) => {}
                    None => maps[j].set(&zi, fj_i)?,
                }
            }
        }
    }
    ReflectionField::new(bx, maps)
}

/// Rank witness for the four focal hyperplanes of simultaneous torsal
/// extensions of one planar quad. Each quad edge carries one focal point per
/// extension; the four hyperplanes they span always meet in a subspace of
/// codimension two, so the stacked covectors have rank two.
#[derive(Clone, Debug)]
pub struct Codim2Report<S: Scalar> {
    pub planes: [HPlane<S>; 4],
    pub rank: usize,
    pub codim_two: bool,
}

pub fn lemma_codim2_witness<S: Scalar>(
    quad: &[HPoint<S>; 4],
    extensions: &[[PLine<S>; 4]],
    tol: Tol,
) -> Result<Codim2Report<S>> {
    let n = quad[0].dim_ambient();
    if !is_planar_quad(quad, tol) {
        return Err(GeomError::DegenerateQuad);
    }
    if extensions.len() < n - 1 {
        return Err(GeomError::FocalSpanDegenerate);
    }
    for ext in extensions {
        for (l, p) in ext.iter().zip(quad) {
            if !l.contains(p, tol) {
                return Err(GeomError::InconsistentCauchyData("vertex not on its line".into()));
            }
        }
    }
    // edges in quad order (x, x1, x12, x2): x-x1, x-x2, x2-x12, x1-x12
    let edge_pairs = [(0usize, 1usize), (0, 3), (3, 2), (1, 2)];
    let mut planes = Vec::with_capacity(4);
    for (a, b) in edge_pairs {
        let mut focals = Vec::with_capacity(extensions.len());
        for ext in extensions {
            focals.push(
                lines_intersect(&ext[a], &ext[b], tol)?.ok_or(GeomError::SkewNeighbors)?,
            );
        }
        planes
            .push(hyperplane_through(&focals, tol).map_err(|_| GeomError::FocalSpanDegenerate)?);
    }
    let rows: Vec<Vec<S>> = planes.iter().map(|h| h.coeffs().to_vec()).collect();
    let rank = linalg::rank(&rows, tol);
    let planes: [HPlane<S>; 4] = [
        planes[0].clone(),
        planes[1].clone(),
        planes[2].clone(),
        planes[3].clone(),
    ];
    Ok(Codim2Report { planes, rank, codim_two: rank == 2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use crate::qnet::propagate_qnet;
    use crate::torsal::extend_qnet_lines;
    use num_rational::BigRational;

    type Q = BigRational;

    fn t() -> Tol {
        Tol::default()
    }

    fn q(n: i64, d: i64) -> Q {
        <Q as Scalar>::ratio(n, d)
    }

    fn pt(coords: &[i64]) -> HPoint<Q> {
        HPoint::new(coords.iter().map(|&c| q(c, 1)).collect()).unwrap()
    }

    /// Random harmonic homology mapping a onto b, built from a random frame
    /// pair whose corresponding lines intersect by construction.
    fn rand_reflection(r: &mut ChaCha8Rng, a: &HPoint<Q>, b: &HPoint<Q>) -> ProjReflection<Q> {
        let n = a.dim_ambient();
        loop {
            let mut la = Vec::new();
            let mut lb = Vec::new();
            for _ in 0..n - 1 {
                let (l, p) = loop {
                    let coords: Vec<Q> = (0..n).map(|_| q(r.gen_range(-9..=9), 1)).collect();
                    let Ok(p) = HPoint::new(coords) else { continue };
                    if let Ok(l) = PLine::through(a, &p) {
                        break (l, p);
                    }
                };
                la.push(l);
                let s = q(r.gen_range(1..=7), r.gen_range(1..=5));
                let mix: Vec<Q> = a
                    .coords()
                    .iter()
                    .zip(p.coords())
                    .map(|(u, v)| u.clone() + s.clone() * v.clone())
                    .collect();
                let m = HPoint::new(mix).unwrap();
                let Ok(l) = PLine::through(b, &m) else { continue };
                lb.push(l);
            }
            if la.len() != n - 1 || lb.len() != n - 1 {
                continue;
            }
            let Ok(ta) = Frame::new(a.clone(), la, t()) else { continue };
            let Ok(tb) = Frame::new(b.clone(), lb, t()) else { continue };
            if let Ok(f) = reflection_between_frames(&ta, &tb, t()) {
                return f;
            }
        }
    }

    /// Euclidean reflection exchanging two points of equal norm, as a
    /// homology: mirror is the perpendicular bisector plane through the
    /// origin, center its pole with respect to the absolute.
    fn bisector_reflection(a: &HPoint<Q>, b: &HPoint<Q>) -> ProjReflection<Q> {
        let af = a.to_affine(t()).unwrap();
        let bf = b.to_affine(t()).unwrap();
        let mut cov: Vec<Q> = af.iter().zip(&bf).map(|(u, v)| v.clone() - u.clone()).collect();
        cov.push(q(0, 1));
        let mirror = HPlane::new(cov.clone()).unwrap();
        let center = HPoint::new(cov).unwrap();
        projective_reflection(&center, &mirror, t()).unwrap()
    }

    #[test]
    fn translated_frames_reflect_through_the_midpoint() {
        let x = pt(&[0, 0, 0, 1]);
        let xi = pt(&[2, 0, 0, 1]);
        let dirs = [[0, 0, 1], [0, 1, 0], [1, 1, 1]];
        let mk = |base: &HPoint<Q>| {
            let lines = dirs
                .iter()
                .map(|d| {
                    let b = base.to_affine(t()).unwrap();
                    let p = HPoint::new(vec![
                        b[0].clone() + q(d[0], 1),
                        b[1].clone() + q(d[1], 1),
                        b[2].clone() + q(d[2], 1),
                        q(1, 1),
                    ])
                    .unwrap();
                    PLine::through(base, &p).unwrap()
                })
                .collect();
            Frame::new(base.clone(), lines, t()).unwrap()
        };
        let f = reflection_between_frames(&mk(&x), &mk(&xi), t()).unwrap();
        // parallel lines meet at infinity: mirror is the ideal plane, the
        // center the midpoint, so the map is the point reflection there
        assert!(f.mirror.proj_eq(&HPlane::new(vec![q(0, 1), q(0, 1), q(0, 1), q(1, 1)]).unwrap(), t()));
        assert!(f.center.proj_eq(&pt(&[1, 0, 0, 1]), t()));
        let img = f.apply(&pt(&[1, 2, 3, 1])).unwrap();
        assert!(img.proj_eq(&pt(&[1, -2, -3, 1]), t()));
    }

    #[test]
    fn frame_reflection_exchanges_random_frames() {
        let mut r = gen::rng(3);
        let a = pt(&[1, 2, 1, 1]);
        let b = pt(&[4, 1, 3, 1]);
        for _ in 0..4 {
            let f = rand_reflection(&mut r, &a, &b);
            assert!(f.apply(&a).unwrap().proj_eq(&b, t()));
            assert!(f.apply(&b).unwrap().proj_eq(&a, t()));
            let sq = f.map().compose(f.map());
            assert!(sq.proj_eq(&ProjMap::identity(4), t()));
        }
    }

    #[test]
    fn reflection_construction_is_symmetric_and_maps_lines() {
        let mut r = gen::rng(9);
        let a = pt(&[2, 0, 1, 1]);
        let b = pt(&[1, 3, 2, 1]);
        let n = 4usize;
        let mut la = Vec::new();
        let mut lb = Vec::new();
        for k in 0..n - 1 {
            let p = pt(&[r.gen_range(-9..=9), r.gen_range(-9..=9), 7 + k as i64, 1]);
            let l = PLine::through(&a, &p).unwrap();
            let s = q(r.gen_range(1..=5), 2);
            let mix: Vec<Q> = a
                .coords()
                .iter()
                .zip(p.coords())
                .map(|(u, v)| u.clone() + s.clone() * v.clone())
                .collect();
            la.push(l);
            lb.push(PLine::through(&b, &HPoint::new(mix).unwrap()).unwrap());
        }
        let ta = Frame::new(a.clone(), la, t()).unwrap();
        let tb = Frame::new(b.clone(), lb, t()).unwrap();
        let f = reflection_between_frames(&ta, &tb, t()).unwrap();
        let g = reflection_between_frames(&tb, &ta, t()).unwrap();
        assert!(f.map().proj_eq(g.map(), t()));
        for (l, li) in ta.lines().iter().zip(tb.lines()) {
            assert!(f.apply_line(l, t()).unwrap().proj_eq(li, t()));
            assert!(f.apply_line(li, t()).unwrap().proj_eq(l, t()));
        }
        // the fixed elements realize the focal construction exactly
        for (l, li) in ta.lines().iter().zip(tb.lines()) {
            let p = lines_intersect(l, li, t()).unwrap().unwrap();
            assert!(f.mirror.contains(&p, t()));
        }
        let axis = PLine::through(&a, &b).unwrap();
        assert!(axis.contains(&f.center, t()));
        let qq = meet_line_plane(&axis, &f.mirror, t()).unwrap();
        let conj = harmonic_conjugate(&qq, &a, &b, t()).unwrap();
        assert!(conj.proj_eq(&f.center, t()));
    }

    #[test]
    fn translational_quad_propagates_translational_reflections() {
        let quad = [pt(&[0, 0, 0, 1]), pt(&[2, 0, 0, 1]), pt(&[2, 2, 0, 1]), pt(&[0, 2, 0, 1])];
        let ideal = HPlane::new(vec![q(0, 1), q(0, 1), q(0, 1), q(1, 1)]).unwrap();
        let f1 = projective_reflection(&pt(&[1, 0, 0, 1]), &ideal, t()).unwrap();
        let f2 = projective_reflection(&pt(&[0, 1, 0, 1]), &ideal, t()).unwrap();
        let (f1_2, f2_1) = propagate_reflections(&quad, &f1, &f2, t()).unwrap();
        let e1_2 = projective_reflection(&pt(&[1, 2, 0, 1]), &ideal, t()).unwrap();
        let e2_1 = projective_reflection(&pt(&[2, 1, 0, 1]), &ideal, t()).unwrap();
        assert!(f1_2.map().proj_eq(e1_2.map(), t()));
        assert!(f2_1.map().proj_eq(e2_1.map(), t()));
    }

    #[test]
    fn propagation_is_independent_of_the_auxiliary_frame() {
        let mut r = gen::rng(21);
        let quad = [pt(&[0, 0, 1, 1]), pt(&[3, 1, 1, 1]), pt(&[4, 4, 1, 1]), pt(&[1, 3, 1, 1])];
        let f1 = rand_reflection(&mut r, &quad[0], &quad[1]);
        let f2 = rand_reflection(&mut r, &quad[0], &quad[3]);
        let mut results = Vec::new();
        for seed in [7u64, 1009] {
            let aux = seeded_frame(seed, &quad[0], t()).unwrap();
            results.push(propagate_reflections_with_frame(&quad, &f1, &f2, &aux, t()).unwrap());
        }
        assert!(results[0].0.map().proj_eq(results[1].0.map(), t()));
        assert!(results[0].1.map().proj_eq(results[1].1.map(), t()));
    }

    #[test]
    fn four_reflections_fix_every_line_through_the_base() {
        let mut r = gen::rng(33);
        let quad = [pt(&[0, 1, 0, 1]), pt(&[2, 1, 1, 1]), pt(&[3, 3, 1, 1]), pt(&[1, 3, 0, 1])];
        let f1 = rand_reflection(&mut r, &quad[0], &quad[1]);
        let f2 = rand_reflection(&mut r, &quad[0], &quad[3]);
        let (f1_2, f2_1) = propagate_reflections(&quad, &f1, &f2, t()).unwrap();
        assert!(f1_2.apply(&quad[3]).unwrap().proj_eq(&quad[2], t()));
        assert!(f2_1.apply(&quad[1]).unwrap().proj_eq(&quad[2], t()));
        // x -> x1 -> x12 -> x2 -> x fixes lines through x as sets
        for _ in 0..4 {
            let p = pt(&[r.gen_range(-9..=9), r.gen_range(-9..=9), r.gen_range(2..=9), 1]);
            let Ok(l) = PLine::through(&quad[0], &p) else { continue };
            let c1 = f2_1.apply_line(&f1.apply_line(&l, t()).unwrap(), t()).unwrap();
            let c2 = f1_2.apply_line(&c1, t()).unwrap();
            let back = f2.apply_line(&c2, t()).unwrap();
            assert!(back.proj_eq(&l, t()));
        }
    }

    fn axis_cauchy(
        r: &mut ChaCha8Rng,
        net: &QNet<Q>,
    ) -> Vec<LatticeMap<ProjReflection<Q>>> {
        let bx = net.bx().clone();
        let mut cauchy = Vec::new();
        for i in 0..bx.dims() {
            let ebx = bx.edge_box(i).unwrap();
            let mut map = LatticeMap::new(ebx.clone());
            for w in ebx.iter() {
                if !(0..bx.dims()).all(|d| d == i || w[d] == 0) {
                    continue;
                }
                let wi = bx.shifted(&w, i, 1).unwrap();
                let f = rand_reflection(r, net.vertex(&w).unwrap(), net.vertex(&wi).unwrap());
                map.set(&w, f).unwrap();
            }
            cauchy.push(map);
        }
        cauchy
    }

    #[test]
    fn reflection_field_routes_agree_on_a_cube() {
        let bx = LatticeBox::new(&[2, 2, 2]).unwrap();
        let net: QNet<Q> = gen::qnet(41, &bx, t()).unwrap();
        let mut r = gen::rng(42);
        let cauchy = axis_cauchy(&mut r, &net);
        let field = propagate_reflection_field(&net, &cauchy, t()).unwrap();
        for i in 0..3 {
            let ebx = bx.edge_box(i).unwrap();
            for w in ebx.iter() {
                let wi = bx.shifted(&w, i, 1).unwrap();
                let f = field.reflection(i, &w).unwrap();
                assert!(f.apply(net.vertex(&w).unwrap()).unwrap().proj_eq(net.vertex(&wi).unwrap(), t()));
                assert!(f.apply(net.vertex(&wi).unwrap()).unwrap().proj_eq(net.vertex(&w).unwrap(), t()));
            }
        }
    }

    #[test]
    fn transported_frames_match_the_line_extension() {
        let bx = LatticeBox::new(&[2, 2, 2]).unwrap();
        let net: QNet<Q> = gen::qnet(55, &bx, t()).unwrap();
        let mut r = gen::rng(56);
        let cauchy = axis_cauchy(&mut r, &net);
        let field = propagate_reflection_field(&net, &cauchy, t()).unwrap();
        let seed = seeded_frame(17, net.vertex(&[0, 0, 0]).unwrap(), t()).unwrap();
        let mut frames: LatticeMap<Frame<Q>> = LatticeMap::new(bx.clone());
        frames.set(&[0, 0, 0], seed).unwrap();
        for z in bx.iter_by_level() {
            if z.iter().all(|&c| c == 0) {
                continue;
            }
            let d = (0..3).find(|&d| z[d] > 0).unwrap();
            let prev = bx.shifted(&z, d, -1).unwrap();
            let f = field.reflection(d, &prev).unwrap();
            let moved = frames.require(&prev).unwrap().transform(f.map(), t()).unwrap();
            frames.set(&z, moved).unwrap();
        }
        for j in 0..3 {
            let mut axis: LatticeMap<PLine<Q>> = LatticeMap::new(bx.clone());
            for z in bx.iter().filter(|z| bx.on_axis(z)) {
                axis.set(&z, frames.require(&z).unwrap().lines()[j].clone()).unwrap();
            }
            let sys = extend_qnet_lines(&net, &axis, t()).unwrap();
            for z in bx.iter() {
                assert!(sys.line(&z).unwrap().proj_eq(&frames.require(&z).unwrap().lines()[j], t()));
            }
        }
    }

    #[test]
    fn translation_invariant_net_has_translation_invariant_field() {
        let bx = LatticeBox::new(&[3, 3]).unwrap();
        let mut pts: LatticeMap<HPoint<Q>> = LatticeMap::new(bx.clone());
        for z in bx.iter() {
            // skewed affine lattice, exactly translation invariant
            pts.set(
                &z,
                pt(&[2 * z[0] as i64 + z[1] as i64, 3 * z[1] as i64, z[0] as i64, 1]),
            )
            .unwrap();
        }
        let net = propagate_qnet(&pts, t()).unwrap();
        let ideal = HPlane::new(vec![q(0, 1), q(0, 1), q(0, 1), q(1, 1)]).unwrap();
        let midpoint = |a: &HPoint<Q>, b: &HPoint<Q>| {
            let af = a.to_affine(t()).unwrap();
            let bf = b.to_affine(t()).unwrap();
            let mut c: Vec<Q> =
                af.iter().zip(&bf).map(|(u, v)| (u.clone() + v.clone()) / q(2, 1)).collect();
            c.push(q(1, 1));
            HPoint::new(c).unwrap()
        };
        let mut cauchy = Vec::new();
        for i in 0..2 {
            let ebx = bx.edge_box(i).unwrap();
            let mut map = LatticeMap::new(ebx.clone());
            for w in ebx.iter() {
                if !(0..2).all(|d| d == i || w[d] == 0) {
                    continue;
                }
                let wi = bx.shifted(&w, i, 1).unwrap();
                let o = midpoint(net.vertex(&w).unwrap(), net.vertex(&wi).unwrap());
                map.set(&w, projective_reflection(&o, &ideal, t()).unwrap()).unwrap();
            }
            cauchy.push(map);
        }
        let field = propagate_reflection_field(&net, &cauchy, t()).unwrap();
        for i in 0..2 {
            let ebx = bx.edge_box(i).unwrap();
            for w in ebx.iter() {
                let wi = bx.shifted(&w, i, 1).unwrap();
                let o = midpoint(net.vertex(&w).unwrap(), net.vertex(&wi).unwrap());
                let expect = projective_reflection(&o, &ideal, t()).unwrap();
                assert!(field.reflection(i, &w).unwrap().map().proj_eq(expect.map(), t()));
            }
        }
    }

    /// Rational circular net on the unit sphere: latitude rows and meridian
    /// columns with all sines and cosines rational.
    fn sphere_net(extents: &[usize; 2]) -> QNet<Q> {
        let bx = LatticeBox::new(extents).unwrap();
        let step = |c0: Q, s0: Q, n: usize| {
            let mut cs = vec![(q(1, 1), q(0, 1))];
            for k in 1..n {
                let (c, s) = cs[k - 1].clone();
                cs.push((c.clone() * c0.clone() - s.clone() * s0.clone(), s * c0.clone() + c * s0.clone()));
            }
            cs
        };
        let theta = step(q(3, 5), q(4, 5), extents[0]);
        let phi = step(q(4, 5), q(3, 5), extents[1]);
        let mut pts: LatticeMap<HPoint<Q>> = LatticeMap::new(bx.clone());
        for z in bx.iter() {
            let (ct, st) = theta[z[0]].clone();
            let (cp, sp) = phi[z[1]].clone();
            pts.set(&z, HPoint::new(vec![cp.clone() * ct, cp * st, sp, q(1, 1)]).unwrap())
                .unwrap();
        }
        propagate_qnet(&pts, t()).unwrap()
    }

    #[test]
    fn circular_net_field_is_the_euclidean_bisector_field() {
        let net = sphere_net(&[3, 3]);
        let bx = net.bx().clone();
        let mut cauchy = Vec::new();
        for i in 0..2 {
            let ebx = bx.edge_box(i).unwrap();
            let mut map = LatticeMap::new(ebx.clone());
            for w in ebx.iter() {
                if !(0..2).all(|d| d == i || w[d] == 0) {
                    continue;
                }
                let wi = bx.shifted(&w, i, 1).unwrap();
                map.set(&w, bisector_reflection(net.vertex(&w).unwrap(), net.vertex(&wi).unwrap()))
                    .unwrap();
            }
            cauchy.push(map);
        }
        let field = propagate_reflection_field(&net, &cauchy, t()).unwrap();
        // every propagated edge reflection is the Euclidean reflection in
        // the perpendicular bisector plane of its edge
        for i in 0..2 {
            let ebx = bx.edge_box(i).unwrap();
            for w in ebx.iter() {
                let wi = bx.shifted(&w, i, 1).unwrap();
                let expect =
                    bisector_reflection(net.vertex(&w).unwrap(), net.vertex(&wi).unwrap());
                assert!(field.reflection(i, &w).unwrap().map().proj_eq(expect.map(), t()));
            }
        }
    }

    fn torsal_extensions(
        r: &mut ChaCha8Rng,
        quad: &[HPoint<Q>; 4],
        count: usize,
    ) -> Vec<[PLine<Q>; 4]> {
        let n = quad[0].dim_ambient();
        let mut out = Vec::new();
        while out.len() < count {
            let p = HPoint::new((0..n).map(|_| q(r.gen_range(-9..=9), 1)).collect());
            let Ok(p) = p else { continue };
            let Ok(l) = PLine::through(&quad[0], &p) else { continue };
            let mix = |s: Q| {
                HPoint::new(
                    quad[0]
                        .coords()
                        .iter()
                        .zip(p.coords())
                        .map(|(u, v)| u.clone() + s.clone() * v.clone())
                        .collect::<Vec<Q>>(),
                )
                .unwrap()
            };
            let Ok(l1) = PLine::through(&quad[1], &mix(q(r.gen_range(1..=5), 3))) else { continue };
            let Ok(l2) = PLine::through(&quad[3], &mix(q(r.gen_range(6..=9), 2))) else { continue };
            let Ok(l12) = extend_quad_lines(quad, &l, &l1, &l2, t()) else { continue };
            out.push([l, l1, l12, l2]);
        }
        out
    }

    #[test]
    fn focal_planes_of_simultaneous_extensions_have_rank_two() {
        let mut r = gen::rng(77);
        let quad = [pt(&[0, 0, 2, 1]), pt(&[3, 0, 2, 1]), pt(&[4, 3, 2, 1]), pt(&[1, 2, 2, 1])];
        let exts = torsal_extensions(&mut r, &quad, 3);
        let report = lemma_codim2_witness(&quad, &exts, t()).unwrap();
        assert_eq!(report.rank, 2);
        assert!(report.codim_two);
        // independently random planes have full rank by contrast
        let rows: Vec<Vec<Q>> = (0..4)
            .map(|k| (0..4).map(|j| q(r.gen_range(1..=9) + k * j as i64, 1)).collect())
            .collect();
        assert_eq!(linalg::rank(&rows, t()), 4);
    }

    #[test]
    fn focal_plane_rank_two_holds_in_four_dimensional_space() {
        let mut r = gen::rng(78);
        let quad = [
            pt(&[0, 0, 2, 1, 1]),
            pt(&[3, 1, 2, 1, 1]),
            pt(&[5, 3, 2, 1, 1]),
            pt(&[1, 2, 2, 1, 1]),
        ];
        assert!(is_planar_quad(&quad, t()));
        let exts = torsal_extensions(&mut r, &quad, 4);
        let report = lemma_codim2_witness(&quad, &exts, t()).unwrap();
        assert_eq!(report.rank, 2);
        assert!(report.codim_two);
    }

    #[test]
    fn malformed_frames_are_rejected() {
        let x = pt(&[0, 0, 0, 1]);
        let l1 = PLine::through(&x, &pt(&[1, 0, 0, 1])).unwrap();
        let l2 = PLine::through(&x, &pt(&[0, 1, 0, 1])).unwrap();
        let l3 = PLine::through(&x, &pt(&[1, 1, 0, 1])).unwrap();
        // too few lines
        assert!(matches!(
            Frame::new(x.clone(), vec![l1.clone(), l2.clone()], t()),
            Err(GeomError::MalformedFrame)
        ));
        // lines do not span
        assert!(matches!(
            Frame::new(x.clone(), vec![l1.clone(), l2.clone(), l3], t()),
            Err(GeomError::MalformedFrame)
        ));
        // line missing the base
        let off = PLine::through(&pt(&[5, 5, 5, 1]), &pt(&[6, 5, 5, 1])).unwrap();
        assert!(matches!(
            Frame::new(x, vec![l1, l2, off], t()),
            Err(GeomError::MalformedFrame)
        ));
    }
}
