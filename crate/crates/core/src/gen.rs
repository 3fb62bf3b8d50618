//! Deterministic sample-data builders.
//!
//! Everything here is seeded: the same seed always yields the same net, in
//! both scalar backends. Generated points are grid-anchored with small
//! rational jitter, so float runs stay well conditioned and rational runs
//! stay exact. Coordinate-plane vertices are drawn inside the plane of their
//! three predecessors, which keeps the Cauchy quads planar by construction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conic::{arc_from_tangents_and_point, ConicArc};
use crate::error::{GeomError, Result};
use crate::lattice::{LatticeBox, LatticeMap};
use crate::projective::{lines_intersect, HPoint, PLine};
use crate::qnet::{complete_qcube, propagate_qnet, QNet};
use crate::scalar::{Scalar, Tol};
use crate::scnet::{propagate_scnet_axes, FTransformCauchy, SCNet, ScnetCauchy};
use crate::torsal::{extend_quad_lines, extend_qnet_lines, LineSystem};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small nonzero rational with |value| <= bound.
pub fn rand_ratio<S: Scalar>(r: &mut ChaCha8Rng, bound: i64) -> S {
    let mut num = 0i64;
    while num == 0 {
        num = r.gen_range(-bound..=bound);
    }
    S::ratio(num, r.gen_range(1..=4) * bound.max(1))
}

/// Nonzero rational jitter with |value| <= 1/k.
fn jitter<S: Scalar>(r: &mut ChaCha8Rng, k: i64) -> S {
    rand_ratio::<S>(r, 4) * S::ratio(1, k)
}

fn affine_pt<S: Scalar>(coords: Vec<S>) -> HPoint<S> {
    let mut v = coords;
    v.push(S::one());
    HPoint::new(v).expect("affine point is nonzero")
}

/// Jittered grid position: affine (z_0, z_1, z_2) plus small rational noise.
/// The offset of one keeps every coordinate strictly positive, so all the
/// generated points live deep inside one affine chart and reduced arc forms
/// survive the transports between them.
fn jittered_grid_point<S: Scalar>(r: &mut ChaCha8Rng, z: &[usize]) -> HPoint<S> {
    let coords: Vec<S> = (0..3)
        .map(|d| {
            let base = S::from_int(*z.get(d).unwrap_or(&0) as i64 + 1);
            base + jitter::<S>(r, 4)
        })
        .collect();
    affine_pt(coords)
}

/// Random planar-quad Cauchy data on the coordinate planes of a box.
pub fn qnet_cauchy<S: Scalar>(
    r: &mut ChaCha8Rng,
    bx: &LatticeBox,
    tol: Tol,
) -> Result<LatticeMap<HPoint<S>>> {
    let mut map: LatticeMap<HPoint<S>> = LatticeMap::new(bx.clone());
    for z in bx.iter_by_level() {
        if !bx.on_coordinate_plane(&z) {
            continue;
        }
        let nz: Vec<usize> = (0..bx.dims()).filter(|&d| z[d] > 0).collect();
        let p = if nz.len() <= 1 {
            jittered_grid_point(r, &z)
        } else {
            // in-plane completion x + s (x_i - x) + t (x_j - x), s and t near 1
            let (i, j) = (nz[0], nz[1]);
            let mut base = z.clone();
            base[i] -= 1;
            base[j] -= 1;
            let mut zi = base.clone();
            zi[i] += 1;
            let mut zj = base.clone();
            zj[j] += 1;
            let x = map.require(&base)?.to_affine(tol).ok_or(GeomError::DegenerateSpan)?;
            let xi = map.require(&zi)?.to_affine(tol).ok_or(GeomError::DegenerateSpan)?;
            let xj = map.require(&zj)?.to_affine(tol).ok_or(GeomError::DegenerateSpan)?;
            let s = S::one() + jitter::<S>(r, 2);
            let t = S::one() + jitter::<S>(r, 2);
            let coords: Vec<S> = (0..3)
                .map(|d| {
                    x[d].clone()
                        + s.clone() * (xi[d].clone() - x[d].clone())
                        + t.clone() * (xj[d].clone() - x[d].clone())
                })
                .collect();
            affine_pt(coords)
        };
        map.set(&z, p)?;
    }
    Ok(map)
}

/// Random Q-net: jittered Cauchy data propagated over the box.
pub fn qnet<S: Scalar>(seed: u64, bx: &LatticeBox, tol: Tol) -> Result<QNet<S>> {
    let mut r = rng(seed);
    let cauchy = qnet_cauchy(&mut r, bx, tol)?;
    propagate_qnet(&cauchy, tol)
}

/// Affine point on a line at parameter s between its two span points.
pub fn point_on_line<S: Scalar>(l: &PLine<S>, s: S, tol: Tol) -> Result<HPoint<S>> {
    let a = l.span().0.to_affine(tol).ok_or(GeomError::DegenerateSpan)?;
    let b = l.span().1.to_affine(tol).ok_or(GeomError::DegenerateSpan)?;
    let coords: Vec<S> = a
        .iter()
        .zip(&b)
        .map(|(x, y)| x.clone() + s.clone() * (y.clone() - x.clone()))
        .collect();
    Ok(affine_pt(coords))
}

/// Random torsal Cauchy lines on the axes of a Q-net. Every line keeps a
/// remembered anchor point hovering near its vertex; the successor line is
/// drawn through its own vertex and a fresh point between the predecessor's
/// vertex and anchor. Consecutive lines therefore intersect close to the
/// connecting edge, which keeps the whole chain inside the positive affine
/// region of the net. Distinct successors of one line consume distinct
/// parameters, so no three generated lines are ever concurrent by accident.
pub fn line_cauchy_for<S: Scalar>(
    r: &mut ChaCha8Rng,
    net: &QNet<S>,
    tol: Tol,
) -> Result<LatticeMap<PLine<S>>> {
    let bx = net.bx().clone();
    let mut map: LatticeMap<PLine<S>> = LatticeMap::new(bx.clone());
    let mut anchors: LatticeMap<HPoint<S>> = LatticeMap::new(bx.clone());
    let mut used: Vec<(Vec<usize>, S)> = Vec::new();
    for z in bx.iter_by_level() {
        if !bx.on_axis(&z) {
            continue;
        }
        let x = net.vertex(&z)?;
        let (line, anchor) = if z.iter().all(|&c| c == 0) {
            let mut dir = x.to_affine(tol).ok_or(GeomError::DegenerateSpan)?;
            for c in dir.iter_mut() {
                *c = c.clone() + S::one() + jitter::<S>(r, 2);
            }
            let a = affine_pt(dir);
            (PLine::through(x, &a)?, a)
        } else {
            let d = (0..bx.dims()).find(|&d| z[d] > 0).expect("axis site");
            let mut prev = z.clone();
            prev[d] -= 1;
            let xp = net.vertex(&prev)?.to_affine(tol).ok_or(GeomError::DegenerateSpan)?;
            let ap = anchors.require(&prev)?.to_affine(tol).ok_or(GeomError::DegenerateSpan)?;
            loop {
                let s = S::ratio(1, 2) + jitter::<S>(r, 3);
                if used.iter().any(|(at, v)| *at == prev && *v == s) {
                    continue;
                }
                let coords: Vec<S> = xp
                    .iter()
                    .zip(&ap)
                    .map(|(u, v)| u.clone() + s.clone() * (v.clone() - u.clone()))
                    .collect();
                let p = affine_pt(coords);
                if p.proj_eq(x, tol) {
                    continue;
                }
                used.push((prev, s));
                break (PLine::through(x, &p)?, p);
            }
        };
        anchors.set(&z, anchor)?;
        map.set(&z, line)?;
    }
    Ok(map)
}

/// Random fundamental line system extending a random Q-net.
pub fn fundamental_system<S: Scalar>(
    seed: u64,
    bx: &LatticeBox,
    tol: Tol,
) -> Result<(QNet<S>, LineSystem<S>)> {
    let mut r = rng(seed);
    let cauchy = qnet_cauchy(&mut r, bx, tol)?;
    let net = propagate_qnet(&cauchy, tol)?;
    let lines = line_cauchy_for(&mut r, &net, tol)?;
    let sys = extend_qnet_lines(&net, &lines, tol)?;
    Ok((net, sys))
}

/// Random SC-net Cauchy data over a fresh Q-net: one torsal line field per
/// direction plus axis arcs tangent to it, shoulders drawn strictly inside
/// the tangent triangle so every arc stays on the positive branch.
pub fn scnet_cauchy<S: Scalar>(
    seed: u64,
    bx: &LatticeBox,
    tol: Tol,
) -> Result<(QNet<S>, ScnetCauchy<S>)> {
    let mut r = rng(seed);
    let cauchy = qnet_cauchy::<S>(&mut r, bx, tol)?;
    let net = propagate_qnet(&cauchy, tol)?;
    let mut tangents = Vec::with_capacity(bx.dims());
    for _ in 0..bx.dims() {
        tangents.push(line_cauchy_for(&mut r, &net, tol)?);
    }
    let mut arcs = Vec::with_capacity(bx.dims());
    for (i, field) in tangents.iter().enumerate() {
        let ebx = bx.edge_box(i)?;
        let mut map: LatticeMap<ConicArc<S>> = LatticeMap::new(ebx.clone());
        for w in ebx.iter() {
            if !(0..bx.dims()).all(|d| d == i || w[d] == 0) {
                continue;
            }
            let wi = bx.shifted(&w, i, 1).expect("edge endpoint");
            let x = net.vertex(&w)?;
            let xi = net.vertex(&wi)?;
            let t0 = field.require(&w)?;
            let t1 = field.require(&wi)?;
            let f = lines_intersect(t0, t1, tol)?.ok_or(GeomError::TangentChainBroken)?;
            // shoulder strictly inside the triangle (x, f, xi)
            let mut coords = vec![S::zero(); x.coords().len()];
            for (p, w_lo) in [(x, 4), (&f, 2), (xi, 4)] {
                let c = S::one() + rand_ratio::<S>(&mut r, w_lo).abs();
                for (acc, v) in coords.iter_mut().zip(p.coords()) {
                    *acc = acc.clone() + c.clone() * v.clone();
                }
            }
            let s = HPoint::new(coords)?;
            map.set(&w, arc_from_tangents_and_point(x, xi, t0, t1, &s, tol)?)?;
        }
        arcs.push(map);
    }
    Ok((net, ScnetCauchy { tangents, arcs }))
}

/// Random SC-net: generated Cauchy data propagated over the box.
pub fn scnet<S: Scalar>(seed: u64, bx: &LatticeBox, tol: Tol) -> Result<SCNet<S>> {
    let (net, cauchy) = scnet_cauchy(seed, bx, tol)?;
    propagate_scnet_axes(&net, &cauchy, tol)
}

/// Random admissible F-transform Cauchy data for an SC-net: a lifted image
/// of the origin, axis images kept inside the running vertical planes, and
/// transformed origin tangents meeting the base tangents.
pub fn ftransform_cauchy<S: Scalar>(
    seed: u64,
    net: &SCNet<S>,
    tol: Tol,
) -> Result<FTransformCauchy<S>> {
    let mut r = rng(seed);
    let bx = net.bx().clone();
    let origin = vec![0usize; bx.dims()];
    let mut layer: LatticeMap<HPoint<S>> = LatticeMap::new(bx.clone());
    let base = net.qnet().vertex(&origin)?.to_affine(tol).ok_or(GeomError::DegenerateSpan)?;
    let lifted: Vec<S> = base
        .iter()
        .enumerate()
        .map(|(d, c)| {
            let lift = if d == 2 { S::one() } else { S::zero() };
            c.clone() + lift + jitter::<S>(&mut r, 4)
        })
        .collect();
    layer.set(&origin, affine_pt(lifted))?;
    for z in bx.iter_by_level() {
        if !bx.on_axis(&z) || z == origin {
            continue;
        }
        let d = (0..bx.dims()).find(|&d| z[d] > 0).expect("axis site");
        let mut prev = z.clone();
        prev[d] -= 1;
        let a = net.qnet().vertex(&prev)?.to_affine(tol).ok_or(GeomError::DegenerateSpan)?;
        let b = net.qnet().vertex(&z)?.to_affine(tol).ok_or(GeomError::DegenerateSpan)?;
        let c = layer.require(&prev)?.to_affine(tol).ok_or(GeomError::DegenerateSpan)?;
        // stay inside plane(a, b, c), away from the base and vertical edges
        let s = S::one() + jitter::<S>(&mut r, 2);
        let t = jitter::<S>(&mut r, 2);
        let coords: Vec<S> = (0..a.len())
            .map(|k| {
                c[k].clone()
                    + s.clone() * (b[k].clone() - a[k].clone())
                    + t.clone() * (a[k].clone() - c[k].clone())
            })
            .collect();
        layer.set(&z, affine_pt(coords))?;
    }
    let x0_plus = layer.require(&origin)?.clone();
    let x0 = net.qnet().vertex(&origin)?.to_affine(tol).ok_or(GeomError::DegenerateSpan)?;
    let mut tangents = Vec::with_capacity(bx.dims());
    for d in 0..bx.dims() {
        let t0 = net.tangent(d, &origin)?;
        let a = t0.span().0.to_affine(tol).ok_or(GeomError::DegenerateSpan)?;
        let b = t0.span().1.to_affine(tol).ok_or(GeomError::DegenerateSpan)?;
        // point of t0 near the base vertex, which itself lies on t0
        let p = loop {
            let s = jitter::<S>(&mut r, 2);
            let coords: Vec<S> = (0..x0.len())
                .map(|k| x0[k].clone() + s.clone() * (b[k].clone() - a[k].clone()))
                .collect();
            let p = affine_pt(coords);
            if !p.proj_eq(&x0_plus, tol) {
                break p;
            }
        };
        tangents.push(PLine::through(&x0_plus, &p)?);
    }
    Ok(FTransformCauchy { layer, tangents })
}

/// Bianchi Cauchy data for the double transform: given two F-transforms s1
/// and s2 of one net, seed the composite at a point of the plane through
/// the three origin images and close it up along the axes with elementary
/// cubes. The result is admissible data for transforming s1, and by
/// permutability the propagated net is an F-transform of s2 as well.
pub fn bianchi_cauchy<S: Scalar>(
    seed: u64,
    net: &SCNet<S>,
    s1: &SCNet<S>,
    s2: &SCNet<S>,
    tol: Tol,
) -> Result<FTransformCauchy<S>> {
    let bx = net.bx().clone();
    if s1.bx() != &bx || s2.bx() != &bx {
        return Err(GeomError::BoxMismatch("transforms on a different box".into()));
    }
    let mut r = rng(seed);
    let origin = vec![0usize; bx.dims()];
    let a = net.qnet().vertex(&origin)?.to_affine(tol).ok_or(GeomError::DegenerateSpan)?;
    let b = s1.qnet().vertex(&origin)?.to_affine(tol).ok_or(GeomError::DegenerateSpan)?;
    let c = s2.qnet().vertex(&origin)?.to_affine(tol).ok_or(GeomError::DegenerateSpan)?;
    let u = S::one() + jitter::<S>(&mut r, 2);
    let v = S::one() + jitter::<S>(&mut r, 2);
    let seed_coords: Vec<S> = (0..a.len())
        .map(|k| {
            a[k].clone()
                + u.clone() * (b[k].clone() - a[k].clone())
                + v.clone() * (c[k].clone() - a[k].clone())
        })
        .collect();
    let mut layer: LatticeMap<HPoint<S>> = LatticeMap::new(bx.clone());
    layer.set(&origin, affine_pt(seed_coords))?;
    for z in bx.iter_by_level() {
        if !bx.on_axis(&z) || z == origin {
            continue;
        }
        let d = (0..bx.dims()).find(|&d| z[d] > 0).expect("axis site");
        let mut w = z.clone();
        w[d] -= 1;
        let x12 = complete_qcube(
            &[
                net.qnet().vertex(&w)?.clone(),
                net.qnet().vertex(&z)?.clone(),
                s1.qnet().vertex(&w)?.clone(),
                s2.qnet().vertex(&w)?.clone(),
                s1.qnet().vertex(&z)?.clone(),
                s2.qnet().vertex(&z)?.clone(),
                layer.require(&w)?.clone(),
            ],
            tol,
        )?;
        layer.set(&z, x12)?;
    }
    let quad0 = [
        net.qnet().vertex(&origin)?.clone(),
        s1.qnet().vertex(&origin)?.clone(),
        layer.require(&origin)?.clone(),
        s2.qnet().vertex(&origin)?.clone(),
    ];
    let mut tangents = Vec::with_capacity(bx.dims());
    for d in 0..bx.dims() {
        tangents.push(extend_quad_lines(
            &quad0,
            net.tangent(d, &origin)?,
            s1.tangent(d, &origin)?,
            s2.tangent(d, &origin)?,
            tol,
        )?);
    }
    Ok(FTransformCauchy { layer, tangents })
}
