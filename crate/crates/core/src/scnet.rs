//! Multidimensional supercyclidic nets.
//!
//! An SC-net couples a Q-net with one torsal tangent system per lattice
//! direction and one conic arc per directed edge. Arcs are stored once per
//! edge in the canonical orientation (increasing lattice coordinate), with
//! the full weight triple carrying the transported parametrisation: the two
//! direction-i arcs across any 2-cell are perspective from the cell's
//! Laplace point, so every cell assembles into an [`SCPatch`] whose boundary
//! data is literally shared with its neighbours. Propagation of Cauchy data
//! (axis tangents plus one arc spline per direction) sweeps the lattice by
//! transporting weighted control vectors through these perspectivities; the
//! result is route-independent cell by cell, which the cube completion makes
//! explicit through the concurrency of the four boundary planes of each
//! direction of a 3-cube.

use crate::conic::{eval_arc, map_arc, ConicArc};
use crate::error::{GeomError, Result, Site};
use crate::lattice::{LatticeBox, LatticeMap};
use crate::patch::{plane_of_lines, SCPatch};
use crate::projective::{
    central_projection, meet_three_planes, plane_point_line, HPlane, HPoint, PLine,
};
use crate::qnet::{complete_qcube, is_ftransform_pair, is_planar_quad, laplace_point,
    planar_quad_residual, QNet};
use crate::scalar::{Scalar, Tol};
use crate::torsal::{extend_qnet_lines, extend_quad_lines, is_fundamental_cube,
    rank_defect_residual, LineSystem};

/// Q-net with tangent line systems and boundary arcs on every edge.
///
/// Stored per direction i: the tangent system t^i over all vertices and one
/// arc per i-edge running from the lower to the upper vertex. The arc at an
/// edge is tangent to t^i at both endpoints, and parallel arcs across a cell
/// carry the parametrisation transported by the Laplace perspectivity, so
/// [`SCNet::patch`] reassembles cells without any resampling.
#[derive(Clone, Debug)]
pub struct SCNet<S: Scalar> {
    qnet: QNet<S>,
    tangents: Vec<LineSystem<S>>,
    arcs: Vec<LatticeMap<ConicArc<S>>>,
}

impl<S: Scalar> SCNet<S> {
    /// Structural constructor: checks box agreement and completeness of the
    /// per-direction data. Geometric consistency is the business of
    /// [`validate_scnet`].
    pub fn new(
        qnet: QNet<S>,
        tangents: Vec<LineSystem<S>>,
        arcs: Vec<LatticeMap<ConicArc<S>>>,
    ) -> Result<Self> {
        let bx = qnet.bx().clone();
        if bx.extents().iter().any(|&e| e < 2) {
            return Err(GeomError::BoxMismatch(
                "SC-nets need at least one edge in every direction".into(),
            ));
        }
        let m = bx.dims();
        if tangents.len() != m || arcs.len() != m {
            return Err(GeomError::BoxMismatch(format!(
                "need one tangent system and one arc field per direction, got {} and {}",
                tangents.len(),
                arcs.len()
            )));
        }
        for i in 0..m {
            if tangents[i].bx() != &bx {
                return Err(GeomError::BoxMismatch("tangent system on a different box".into()));
            }
            let ebx = bx.edge_box(i)?;
            if arcs[i].bx() != &ebx {
                return Err(GeomError::BoxMismatch("arc field not on the edge box".into()));
            }
            if !arcs[i].is_full() {
                return Err(GeomError::InconsistentCauchyData(format!(
                    "missing arcs in direction {}",
                    i + 1
                )));
            }
        }
        Ok(SCNet { qnet, tangents, arcs })
    }

    pub fn qnet(&self) -> &QNet<S> {
        &self.qnet
    }

    pub fn bx(&self) -> &LatticeBox {
        self.qnet.bx()
    }

    pub fn dims(&self) -> usize {
        self.bx().dims()
    }

    pub fn tangents(&self, i: usize) -> Result<&LineSystem<S>> {
        self.tangents.get(i).ok_or(GeomError::IndexOutOfBounds)
    }

    /// Tangent line of direction i at vertex z.
    pub fn tangent(&self, i: usize, z: &[usize]) -> Result<&PLine<S>> {
        self.tangents(i)?.line(z)
    }

    /// Arc of direction i at the edge whose lower vertex is z.
    pub fn arc(&self, i: usize, z: &[usize]) -> Result<&ConicArc<S>> {
        self.arcs.get(i).ok_or(GeomError::IndexOutOfBounds)?.require(z)
    }

    /// SC-patch of the cell at base z spanned by directions (i, j); the
    /// patch parameter u runs along i and v along j.
    pub fn patch(&self, z: &[usize], i: usize, j: usize, tol: Tol) -> Result<SCPatch<S>> {
        let verts = self.qnet.quad(z, i, j)?;
        let bx = self.bx();
        let zi = bx.shifted(z, i, 1).ok_or(GeomError::IndexOutOfBounds)?;
        let zj = bx.shifted(z, j, 1).ok_or(GeomError::IndexOutOfBounds)?;
        let b1 = self.arc(i, z)?.clone();
        let b2 = self.arc(j, z)?.clone();
        let b1_2 = self.arc(i, &zj)?.clone();
        let b2_1 = self.arc(j, &zi)?.clone();
        SCPatch::from_boundary(verts, b1, b2, b1_2, b2_1, tol)
            .map_err(|e| e.at(Site::cell(z, &[i, j])))
    }

    /// 2D sub-net in the coordinate plane spanned by (i, j) through the
    /// frozen base point; `frozen` must be zero at i and j.
    pub fn restrict_2d(&self, i: usize, j: usize, frozen: &[usize]) -> Result<SCNet<S>> {
        let q2 = self.qnet.restrict_2d(i, j, frozen)?;
        let bx2 = q2.bx().clone();
        let embed = |a: usize, b: usize| -> Vec<usize> {
            let mut z = frozen.to_vec();
            z[i] = a;
            z[j] = b;
            z
        };
        let mut tangents = Vec::with_capacity(2);
        for d in [i, j] {
            let mut map = LatticeMap::new(bx2.clone());
            for z in bx2.iter() {
                map.set(&z, self.tangent(d, &embed(z[0], z[1]))?.clone())?;
            }
            tangents.push(LineSystem::from_map(map)?);
        }
        let mut arcs = Vec::with_capacity(2);
        for (slot, d) in [(0usize, i), (1usize, j)] {
            let ebx = bx2.edge_box(slot)?;
            let mut map = LatticeMap::new(ebx.clone());
            for z in ebx.iter() {
                map.set(&z, self.arc(d, &embed(z[0], z[1]))?.clone())?;
            }
            arcs.push(map);
        }
        SCNet::new(q2, tangents, arcs)
    }
}

/// Laplace-perspectivity transport of an edge arc across a transversal
/// direction. `quad` is the cell (p, p_i, p_ij, p_j) in cyclic order with
/// the arc running p -> p_i; the image runs p_j -> p_ij inside `target`,
/// with the parameter correspondence of the perspectivity (t maps to t).
pub fn transport_arc<S: Scalar>(
    arc: &ConicArc<S>,
    quad: &[HPoint<S>; 4],
    target: &HPlane<S>,
    tol: Tol,
) -> Result<ConicArc<S>> {
    let y = laplace_point(quad, 1, tol)?;
    if arc.plane().contains(&y, tol) || target.contains(&y, tol) {
        return Err(GeomError::LaplacePointOnBoundaryPlane);
    }
    let tau = central_projection(&y, target, tol)?;
    map_arc(&tau, arc, tol)
}

/// One named residual at one lattice site.
#[derive(Clone, Debug)]
pub struct CheckItem {
    pub name: String,
    pub site: Site,
    pub residual: f64,
    pub pass: bool,
}

/// Diagnostic report of [`validate_scnet`]: per-site residuals for every
/// SC-net invariant, sorted by site then name.
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub items: Vec<CheckItem>,
}

impl ValidationReport {
    pub fn pass(&self) -> bool {
        self.items.iter().all(|it| it.pass)
    }

    pub fn worst(&self) -> f64 {
        self.items.iter().map(|it| it.residual).fold(0.0, f64::max)
    }

    pub fn failures(&self) -> Vec<&CheckItem> {
        self.items.iter().filter(|it| !it.pass).collect()
    }

    fn push(&mut self, name: &str, site: Site, residual: f64, tol: Tol, exact: bool) {
        let pass = if exact { residual == 0.0 } else { residual.abs() <= tol.rel };
        self.items.push(CheckItem { name: name.to_string(), site, residual, pass });
    }

    fn fail(&mut self, name: &str, site: Site) {
        self.items.push(CheckItem {
            name: name.to_string(),
            site,
            residual: f64::INFINITY,
            pass: false,
        });
    }

    fn sort(&mut self) {
        self.items.sort_by(|a, b| {
            (&a.site.index, &a.site.dirs, &a.name).cmp(&(&b.site.index, &b.site.dirs, &b.name))
        });
    }
}

fn line_pair_residual<S: Scalar>(a: &PLine<S>, b: &PLine<S>, tol: Tol) -> f64 {
    let rows = vec![a.plucker(), b.plucker()];
    rank_defect_residual(&rows, 2, tol).to_f64().abs()
}

fn line_point_residual<S: Scalar>(l: &PLine<S>, p: &HPoint<S>, tol: Tol) -> f64 {
    let (a, b) = l.span();
    let rows = vec![a.raw(), b.raw(), p.raw()];
    rank_defect_residual(&rows, 3, tol).to_f64().abs()
}

/// Worst distance between corresponding parameter samples of two arcs.
fn sampled_arc_residual<S: Scalar>(a: &ConicArc<S>, b: &ConicArc<S>) -> f64 {
    let mut worst = 0.0f64;
    for k in 0..=6 {
        let t = S::ratio(k, 6);
        match (eval_arc(a, &t), eval_arc(b, &t)) {
            (Ok(p), Ok(q)) => worst = worst.max(p.residual_to(&q)),
            _ => return f64::INFINITY,
        }
    }
    worst
}

/// Diagnostic validation of every SC-net invariant. Never fails: broken
/// geometry, including construction errors while re-deriving a cell, shows
/// up as failing items localized at their lattice site.
///
/// Checked per direction i: tangents pass through their vertices, neighbour
/// tangents intersect (torsality), arcs join their edge endpoints tangent to
/// the system, and for m >= 3 every tangent cube is fundamental. Checked per
/// cell (i, j): the vertex quad is planar, the two parallel arcs of each
/// direction are related by the cell's Laplace perspectivity sample by
/// sample, and the cell assembles into an SC-patch.
pub fn validate_scnet<S: Scalar>(net: &SCNet<S>, tol: Tol) -> ValidationReport {
    let mut rep = ValidationReport::default();
    let exact = S::EXACT;
    let bx = net.bx().clone();
    let m = bx.dims();

    for i in 0..m {
        // tangents through vertices
        for z in bx.iter() {
            match (net.tangent(i, &z), net.qnet.vertex(&z)) {
                (Ok(l), Ok(x)) => rep.push(
                    "tangent-vertex",
                    Site::cell(&z, &[i]),
                    line_point_residual(l, x, tol),
                    tol,
                    exact,
                ),
                _ => rep.fail("tangent-vertex", Site::cell(&z, &[i])),
            }
        }
        // torsality: neighbouring tangents of one system intersect
        for d in 0..m {
            let Ok(ebx) = bx.edge_box(d) else { continue };
            for z in ebx.iter() {
                let zd = bx.shifted(&z, d, 1).expect("edge endpoint");
                match (net.tangent(i, &z), net.tangent(i, &zd)) {
                    (Ok(a), Ok(b)) => rep.push(
                        "tangent-torsal",
                        Site::cell(&z, &[i, d]),
                        a.incidence(b).to_f64().abs(),
                        tol,
                        exact,
                    ),
                    _ => rep.fail("tangent-torsal", Site::cell(&z, &[i, d])),
                }
            }
        }
        // arcs join their edge endpoints, tangent to the system
        let Ok(ebx) = bx.edge_box(i) else { continue };
        for z in ebx.iter() {
            let site = Site::cell(&z, &[i]);
            let zi = bx.shifted(&z, i, 1).expect("edge endpoint");
            let (Ok(arc), Ok(x), Ok(xi)) =
                (net.arc(i, &z), net.qnet.vertex(&z), net.qnet.vertex(&zi))
            else {
                rep.fail("arc-endpoints", site);
                continue;
            };
            let r_end = arc.c0().residual_to(x).max(arc.c2().residual_to(xi));
            rep.push("arc-endpoints", site.clone(), r_end, tol, exact);
            match (arc.tangent_start(), arc.tangent_end(), net.tangent(i, &z), net.tangent(i, &zi))
            {
                (Ok(ts), Ok(te), Ok(t0), Ok(t1)) => {
                    let r = line_pair_residual(&ts, t0, tol).max(line_pair_residual(&te, t1, tol));
                    rep.push("arc-tangent", site, r, tol, exact);
                }
                _ => rep.fail("arc-tangent", site),
            }
        }
        // fundamentality of the tangent system on every cube
        for (a, b, c) in bx.dir_triples() {
            for z in bx.cubes(a, b, c) {
                let site = Site::cell(&z, &[a, b, c]);
                let name = format!("fundamental-t{}", i + 1);
                let cube = match net.tangents[i].cube(&z, [a, b, c]) {
                    Ok(cu) => cu,
                    Err(_) => {
                        rep.fail(&name, site);
                        continue;
                    }
                };
                match is_fundamental_cube(&cube, tol) {
                    Ok(chk) => {
                        let r = chk
                            .planar_residuals
                            .iter()
                            .chain(chk.concurrency_residuals.iter())
                            .fold(0.0f64, |acc, &v| acc.max(v));
                        rep.items.push(CheckItem {
                            name,
                            site,
                            residual: r,
                            pass: chk.fundamental,
                        });
                    }
                    Err(_) => rep.fail(&name, site),
                }
            }
        }
    }

    // per-cell checks
    for (i, j) in bx.dir_pairs() {
        for z in bx.cells(i, j) {
            let cell = Site::cell(&z, &[i, j]);
            let Ok(quad) = net.qnet.quad(&z, i, j) else {
                rep.fail("cell-planar", cell);
                continue;
            };
            rep.push(
                "cell-planar",
                cell.clone(),
                planar_quad_residual(&quad, tol).to_f64().abs(),
                tol,
                exact,
            );
            // Laplace perspectivity of the parallel arcs, both directions
            for (a, b) in [(i, j), (j, i)] {
                let site = Site::cell(&z, &[a, b]);
                let res = (|| -> Result<f64> {
                    let quad = net.qnet.quad(&z, a, b)?;
                    let zb = bx.shifted(&z, b, 1).ok_or(GeomError::IndexOutOfBounds)?;
                    let src = net.arc(a, &z)?;
                    let dst = net.arc(a, &zb)?;
                    let im = transport_arc(src, &quad, dst.plane(), tol)?;
                    Ok(sampled_arc_residual(&im, dst))
                })();
                match res {
                    Ok(r) => rep.push("perspectivity", site, r, tol, exact),
                    Err(_) => rep.fail("perspectivity", site),
                }
            }
            match net.patch(&z, i, j, tol) {
                Ok(_) => rep.push("patch", cell, 0.0, tol, exact),
                Err(_) => rep.fail("patch", cell),
            }
        }
    }

    rep.sort();
    rep
}

/// Cauchy data for SC-net propagation over a Q-net: per direction i the
/// tangent lines t^i on every coordinate axis, and the arcs b^i along the
/// i-axis itself (one per axis edge, canonical orientation).
#[derive(Clone, Debug)]
pub struct ScnetCauchy<S: Scalar> {
    pub tangents: Vec<LatticeMap<PLine<S>>>,
    pub arcs: Vec<LatticeMap<ConicArc<S>>>,
}

/// Is z on the i-axis (every other component zero)?
fn on_dir_axis(z: &[usize], i: usize) -> bool {
    z.iter().enumerate().all(|(d, &v)| d == i || v == 0)
}

/// Propagate axis Cauchy data over a Q-net of any supported dimension.
///
/// Tangent systems extend by the planarity scheme on quads; each arc field
/// sweeps outward by Laplace-perspectivity transport across the transversal
/// direction of lowest index. For m >= 3 the result does not depend on that
/// choice: the intersection closure of the tangent systems makes parallel
/// transports commute cell by cell.
pub fn propagate_scnet_axes<S: Scalar>(
    qnet: &QNet<S>,
    cauchy: &ScnetCauchy<S>,
    tol: Tol,
) -> Result<SCNet<S>> {
    let bx = qnet.bx().clone();
    let m = bx.dims();
    if bx.extents().iter().any(|&e| e < 2) {
        return Err(GeomError::BoxMismatch(
            "SC-nets need at least one edge in every direction".into(),
        ));
    }
    if cauchy.tangents.len() != m || cauchy.arcs.len() != m {
        return Err(GeomError::BoxMismatch(
            "need tangent and arc Cauchy data for every direction".into(),
        ));
    }

    let mut tangents = Vec::with_capacity(m);
    for i in 0..m {
        tangents.push(extend_qnet_lines(qnet, &cauchy.tangents[i], tol)?);
    }

    let mut arcs = Vec::with_capacity(m);
    for i in 0..m {
        let ebx = bx.edge_box(i)?;
        if cauchy.arcs[i].bx() != &ebx {
            return Err(GeomError::BoxMismatch("arc Cauchy data not on the edge box".into()));
        }
        let mut out: LatticeMap<ConicArc<S>> = LatticeMap::new(ebx.clone());
        for w in ebx.iter_by_level() {
            let wi = bx.shifted(&w, i, 1).expect("edge endpoint");
            if on_dir_axis(&w, i) {
                let site = Site::cell(&w, &[i]);
                let arc = cauchy.arcs[i]
                    .get(&w)
                    .ok_or_else(|| {
                        GeomError::InconsistentCauchyData("missing axis arc".into())
                            .at(site.clone())
                    })?
                    .clone();
                let x = qnet.vertex(&w)?;
                let xi = qnet.vertex(&wi)?;
                if !arc.c0().proj_eq(x, tol) || !arc.c2().proj_eq(xi, tol) {
                    return Err(GeomError::InconsistentCauchyData(
                        "axis arc does not join its edge endpoints".into(),
                    )
                    .at(site));
                }
                let t0 = tangents[i].line(&w)?;
                let t1 = tangents[i].line(&wi)?;
                if !arc.tangent_start()?.proj_eq(t0, tol) || !arc.tangent_end()?.proj_eq(t1, tol) {
                    return Err(GeomError::InconsistentCauchyData(
                        "axis arc is not tangent to the line system".into(),
                    )
                    .at(site));
                }
                out.set(&w, arc)?;
            } else {
                if cauchy.arcs[i].get(&w).is_some() {
                    return Err(GeomError::InconsistentCauchyData(
                        "unexpected arc prescribed off the axis".into(),
                    )
                    .at(Site::cell(&w, &[i])));
                }
                let j = (0..m).find(|&d| d != i && w[d] > 0).expect("off-axis edge");
                let src_w = bx.shifted(&w, j, -1).expect("level order");
                let src = out.require(&src_w)?.clone();
                let quad = qnet.quad(&src_w, i, j)?;
                let target = plane_of_lines(tangents[i].line(&w)?, tangents[i].line(&wi)?, tol)
                    .map_err(|e| e.at(Site::cell(&w, &[i])))?;
                let arc = transport_arc(&src, &quad, &target, tol)
                    .map_err(|e| e.at(Site::cell(&src_w, &[i, j])))?;
                out.set(&w, arc)?;
            }
        }
        arcs.push(out);
    }

    SCNet::new(qnet.clone(), tangents, arcs)
}

/// Two-dimensional SC-net propagation: tangents of both directions on both
/// axes, arcs of each direction along its own axis.
pub fn propagate_scnet_2d<S: Scalar>(
    qnet: &QNet<S>,
    cauchy: &ScnetCauchy<S>,
    tol: Tol,
) -> Result<SCNet<S>> {
    if qnet.bx().dims() != 2 {
        return Err(GeomError::BoxMismatch("expected a 2D Q-net".into()));
    }
    propagate_scnet_axes(qnet, cauchy, tol)
}

/// Propagate an mD SC-net from 2D SC-nets on all coordinate planes.
///
/// `planes` holds one net per unordered direction pair (i < j), living on
/// the coordinate plane through the origin. The nets must restrict the given
/// Q-net and agree along shared axes, tangents and arcs alike; the full net
/// is propagated from the extracted axis data and then checked to restrict
/// to every input plane (parametrisation included), so inputs that are not
/// jointly admissible are rejected rather than silently overridden.
pub fn propagate_scnet<S: Scalar>(
    qnet: &QNet<S>,
    planes: &[((usize, usize), SCNet<S>)],
    tol: Tol,
) -> Result<SCNet<S>> {
    let bx = qnet.bx().clone();
    let m = bx.dims();
    let pairs = bx.dir_pairs();
    if planes.len() != pairs.len() {
        return Err(GeomError::IncompatibleCauchyLayers(format!(
            "need {} coordinate-plane nets, got {}",
            pairs.len(),
            planes.len()
        )));
    }
    for &(i, j) in &pairs {
        if planes.iter().filter(|((a, b), _)| (*a, *b) == (i, j)).count() != 1 {
            return Err(GeomError::IncompatibleCauchyLayers(format!(
                "plane ({},{}) must be given exactly once",
                i + 1,
                j + 1
            )));
        }
    }

    let mut cau = ScnetCauchy {
        tangents: (0..m).map(|_| LatticeMap::new(bx.clone())).collect(),
        arcs: (0..m)
            .map(|i| bx.edge_box(i).map(LatticeMap::new))
            .collect::<Result<Vec<_>>>()?,
    };

    for ((i, j), pnet) in planes {
        let (i, j) = (*i, *j);
        if i >= j || j >= m {
            return Err(GeomError::IncompatibleCauchyLayers("bad direction pair".into()));
        }
        if pnet.dims() != 2
            || pnet.bx().extents() != [bx.extents()[i], bx.extents()[j]]
        {
            return Err(GeomError::IncompatibleCauchyLayers(format!(
                "plane ({},{}) has the wrong extents",
                i + 1,
                j + 1
            )));
        }
        let embed = |a: usize, b: usize| -> Vec<usize> {
            let mut z = vec![0usize; m];
            z[i] = a;
            z[j] = b;
            z
        };
        for z2 in pnet.bx().iter() {
            let big = embed(z2[0], z2[1]);
            if !pnet.qnet().vertex(&z2)?.proj_eq(qnet.vertex(&big)?, tol) {
                return Err(GeomError::IncompatibleCauchyLayers(format!(
                    "plane ({},{}) does not restrict the Q-net at {}",
                    i + 1,
                    j + 1,
                    Site::vertex(&big)
                )));
            }
        }
        // harvest tangents of both in-plane directions on the two axes
        for (slot, d) in [(0usize, i), (1usize, j)] {
            for z2 in pnet.bx().iter().filter(|z2| z2[0] == 0 || z2[1] == 0) {
                let line = pnet.tangent(slot, &z2)?;
                let big = embed(z2[0], z2[1]);
                match cau.tangents[d].get(&big) {
                    Some(prev) if !prev.proj_eq(line, tol) => {
                        return Err(GeomError::IncompatibleCauchyLayers(format!(
                            "tangent t{} disagrees between planes at {}",
                            d + 1,
                            Site::vertex(&big)
                        )));
                    }
                    Some(_) => {}
                    None => cau.tangents[d].set(&big, line.clone())?,
                }
            }
        }
        // harvest axis arcs of both in-plane directions
        for (slot, d) in [(0usize, i), (1usize, j)] {
            let pebx = pnet.bx().edge_box(slot)?;
            for z2 in pebx.iter().filter(|z2| z2[1 - slot] == 0) {
                let arc = pnet.arc(slot, &z2)?;
                let big = embed(z2[0], z2[1]);
                match cau.arcs[d].get(&big) {
                    Some(prev) if !prev.proj_eq_parametrized(arc, tol) => {
                        return Err(GeomError::IncompatibleCauchyLayers(format!(
                            "axis arc b{} disagrees between planes at {}",
                            d + 1,
                            Site::cell(&big, &[d])
                        )));
                    }
                    Some(_) => {}
                    None => cau.arcs[d].set(&big, arc.clone())?,
                }
            }
        }
    }

    let net = propagate_scnet_axes(qnet, &cau, tol)?;

    // the result must restrict to every input plane, interior included
    let frozen = vec![0usize; m];
    for ((i, j), pnet) in planes {
        let got = net.restrict_2d(*i, *j, &frozen)?;
        for z2 in got.bx().iter() {
            for slot in 0..2 {
                if !got.tangent(slot, &z2)?.proj_eq(pnet.tangent(slot, &z2)?, tol) {
                    return Err(GeomError::IncompatibleCauchyLayers(format!(
                        "plane ({},{}) tangents are not reproduced at {}",
                        i + 1,
                        j + 1,
                        Site::vertex(&z2)
                    )));
                }
            }
        }
        for slot in 0..2 {
            for z2 in got.bx().edge_box(slot)?.iter() {
                if !got.arc(slot, &z2)?.proj_eq_parametrized(pnet.arc(slot, &z2)?, tol) {
                    return Err(GeomError::IncompatibleCauchyLayers(format!(
                        "plane ({},{}) arcs are not reproduced at {}",
                        i + 1,
                        j + 1,
                        Site::cell(&z2, &[slot])
                    )));
                }
            }
        }
    }
    Ok(net)
}

/// SC-net over a single combinatorial 3-cube: six patches sharing twelve
/// boundary arcs, plus the concurrency point of each direction's four
/// boundary planes.
#[derive(Clone, Debug)]
pub struct SCCube<S: Scalar> {
    net: SCNet<S>,
    q: [HPoint<S>; 3],
}

impl<S: Scalar> SCCube<S> {
    pub fn net(&self) -> &SCNet<S> {
        &self.net
    }

    /// Common point of the four direction-i boundary planes.
    pub fn concurrency_point(&self, i: usize) -> Result<&HPoint<S>> {
        self.q.get(i).ok_or(GeomError::IndexOutOfBounds)
    }

    /// The four direction-i boundary planes, in edge order
    /// (0, e_j, e_k, e_j + e_k) with j < k the other directions.
    pub fn direction_planes(&self, i: usize) -> Result<[HPlane<S>; 4]> {
        if i > 2 {
            return Err(GeomError::IndexOutOfBounds);
        }
        let (j, k) = other_dirs(i);
        let mut edges = [[0usize; 3]; 4];
        edges[1][j] = 1;
        edges[2][k] = 1;
        edges[3][j] = 1;
        edges[3][k] = 1;
        let mut out = Vec::with_capacity(4);
        for e in edges {
            out.push(self.net.arc(i, &e)?.plane().clone());
        }
        Ok([out[0].clone(), out[1].clone(), out[2].clone(), out[3].clone()])
    }

    /// Face patch spanned by directions (i, j) at the low or high level of
    /// the remaining direction.
    pub fn face(&self, i: usize, j: usize, high: bool, tol: Tol) -> Result<SCPatch<S>> {
        if i == j || i > 2 || j > 2 {
            return Err(GeomError::IndexOutOfBounds);
        }
        let k = 3 - i - j;
        let mut z = [0usize; 3];
        z[k] = high as usize;
        self.net.patch(&z, i, j, tol)
    }
}

fn other_dirs(i: usize) -> (usize, usize) {
    match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

/// Complete an SC-cube from three patches on the faces spanned by
/// directions (1,2), (2,3) and (1,3), sharing the vertex x and, pairwise,
/// the boundary arc through it.
///
/// The supporting Q-cube supplies the eighth vertex; for each direction the
/// three known boundary planes meet in a point q through which the missing
/// fourth plane must pass, and the missing far arcs are transported into it
/// across either transversal direction. Both routes are formed and must
/// agree as parametrised arcs: that agreement is exactly the solvability of
/// the cube, so a discrepancy is rejected as `NonConcurrentPlanes`.
pub fn complete_sc_cube<S: Scalar>(
    f12: &SCPatch<S>,
    f23: &SCPatch<S>,
    f13: &SCPatch<S>,
    tol: Tol,
) -> Result<SCCube<S>> {
    // identify the seven cube vertices, cross-checking every shared one
    let x = f12.verts()[0].clone();
    for (p, which) in [(&f23.verts()[0], "(2,3)"), (&f13.verts()[0], "(1,3)")] {
        if !x.proj_eq(p, tol) {
            return Err(GeomError::InconsistentCauchyData(format!(
                "patch {which} is not based at the shared vertex"
            )));
        }
    }
    let x1 = f12.verts()[1].clone();
    let x2 = f12.verts()[3].clone();
    let x3 = f23.verts()[3].clone();
    if !x1.proj_eq(&f13.verts()[1], tol)
        || !x2.proj_eq(&f23.verts()[1], tol)
        || !x3.proj_eq(&f13.verts()[3], tol)
    {
        return Err(GeomError::InconsistentCauchyData(
            "patches disagree on a shared edge vertex".into(),
        ));
    }
    let x12 = f12.verts()[2].clone();
    let x23 = f23.verts()[2].clone();
    let x13 = f13.verts()[2].clone();

    // shared boundary arcs must be the same segments
    for (a, b, edge) in [
        (f12.b1(), f13.b1(), "x to x1"),
        (f12.b2(), f23.b1(), "x to x2"),
        (f13.b2(), f23.b2(), "x to x3"),
    ] {
        if !a.proj_eq_segment(b, tol) {
            return Err(GeomError::CommonBoundaryViolated(format!("edge {edge}")));
        }
    }

    let x123 = complete_qcube(&[
        x.clone(),
        x1.clone(),
        x2.clone(),
        x3.clone(),
        x12.clone(),
        x13.clone(),
        x23.clone(),
    ], tol)
    .map_err(|_| GeomError::QCubeDegenerate)?;

    // canonical base arcs and their near transports; arcs of the (1,3) and
    // (2,3) faces are re-derived from the canonical parametrisation so the
    // twelve stored edges share one transport structure
    let e1 = f12.b1().clone();
    let e2 = f12.b2().clone();
    let e3 = f13.b2().clone();
    let a1_2 = f12.b1_2().clone();
    let a2_1 = f12.b2_1().clone();
    let a1_3 = transport_arc(
        &e1,
        &[x.clone(), x1.clone(), x13.clone(), x3.clone()],
        f13.b1_2().plane(),
        tol,
    )?;
    let a3_1 = transport_arc(
        &e3,
        &[x.clone(), x3.clone(), x13.clone(), x1.clone()],
        f13.b2_1().plane(),
        tol,
    )?;
    let a2_3 = transport_arc(
        &e2,
        &[x.clone(), x2.clone(), x23.clone(), x3.clone()],
        f23.b1_2().plane(),
        tol,
    )?;
    let a3_2 = transport_arc(
        &e3,
        &[x.clone(), x3.clone(), x23.clone(), x2.clone()],
        f23.b2_1().plane(),
        tol,
    )?;

    // far arcs: concurrency point, induced plane, both transport routes
    let vert = |mask: [usize; 3]| -> &HPoint<S> {
        match mask {
            [0, 0, 0] => &x,
            [1, 0, 0] => &x1,
            [0, 1, 0] => &x2,
            [0, 0, 1] => &x3,
            [1, 1, 0] => &x12,
            [1, 0, 1] => &x13,
            [0, 1, 1] => &x23,
            _ => &x123,
        }
    };
    let mut far = Vec::with_capacity(3);
    let mut qs = Vec::with_capacity(3);
    let bases = [[&e1, &a1_2, &a1_3], [&e2, &a2_1, &a2_3], [&e3, &a3_1, &a3_2]];
    for i in 0..3 {
        let (j, k) = other_dirs(i);
        let [b0, bj, bk] = bases[i];
        let q = meet_three_planes(b0.plane(), bj.plane(), bk.plane(), tol)
            .map_err(|_| GeomError::NonConcurrentPlanes)?;
        let mut far_lo = [0usize; 3];
        far_lo[j] = 1;
        far_lo[k] = 1;
        let edge = PLine::through(vert(far_lo), &x123)?;
        let target =
            plane_point_line(&q, &edge, tol).map_err(|_| GeomError::NonConcurrentPlanes)?;
        let quad_of = |arc_lo: [usize; 3], shift: usize| -> [HPoint<S>; 4] {
            let mut p_i = arc_lo;
            p_i[i] = 1;
            let mut p_s = arc_lo;
            p_s[shift] = 1;
            let mut p_is = p_i;
            p_is[shift] = 1;
            [
                vert(arc_lo).clone(),
                vert(p_i).clone(),
                vert(p_is).clone(),
                vert(p_s).clone(),
            ]
        };
        let mut lo_j = [0usize; 3];
        lo_j[j] = 1;
        let mut lo_k = [0usize; 3];
        lo_k[k] = 1;
        let route_a = transport_arc(bj, &quad_of(lo_j, k), &target, tol)?;
        let route_b = transport_arc(bk, &quad_of(lo_k, j), &target, tol)?;
        if !route_a.proj_eq_parametrized(&route_b, tol) {
            return Err(GeomError::NonConcurrentPlanes);
        }
        far.push(route_a);
        qs.push(q);
    }

    let bx = LatticeBox::new(&[2, 2, 2])?;
    let mut pts = LatticeMap::new(bx.clone());
    for z in bx.iter() {
        pts.set(&z, vert([z[0], z[1], z[2]]).clone())?;
    }
    let qnet = QNet::from_map(pts)?;

    let mut arcs = Vec::with_capacity(3);
    for i in 0..3 {
        let (j, k) = other_dirs(i);
        let [b0, bj, bk] = bases[i];
        let ebx = bx.edge_box(i)?;
        let mut map = LatticeMap::new(ebx);
        let mut set = |dirs: [usize; 2], arc: &ConicArc<S>| -> Result<()> {
            let mut z = [0usize; 3];
            for d in dirs {
                if d < 3 {
                    z[d] = 1;
                }
            }
            map.set(&z, arc.clone())
        };
        set([3, 3], b0)?;
        set([j, 3], bj)?;
        set([k, 3], bk)?;
        set([j, k], &far[i])?;
        arcs.push(map);
    }

    let mut tangents = Vec::with_capacity(3);
    for (i, arc_map) in arcs.iter().enumerate() {
        let mut map = LatticeMap::new(bx.clone());
        for z in bx.iter() {
            let line = if z[i] == 0 {
                arc_map.require(&z)?.tangent_start()?
            } else {
                let w = bx.shifted(&z, i, -1).expect("cube vertex");
                arc_map.require(&w)?.tangent_end()?
            };
            map.set(&z, line)?;
        }
        tangents.push(LineSystem::from_map(map)?);
    }

    let net = SCNet::new(qnet, tangents, arcs)?;
    Ok(SCCube { net, q: [qs[0].clone(), qs[1].clone(), qs[2].clone()] })
}

/// Member of the one-parameter family of patches sweeping an SC-cube in
/// direction `dir`: at parameter s along the direction's arcs, the four
/// characteristic conics of the adjacent faces close up into the boundary
/// of a patch interpolating between the two opposite faces (returned
/// verbatim at s = 0 and s = 1). Degenerate traversal parameters are
/// rejected as `SingularTraversal`; there is no continuation through them.
pub fn cube_family_patch<S: Scalar>(
    cube: &SCCube<S>,
    dir: usize,
    s: &S,
    tol: Tol,
) -> Result<SCPatch<S>> {
    if dir > 2 {
        return Err(GeomError::IndexOutOfBounds);
    }
    if *s < S::zero() || *s > S::one() {
        return Err(GeomError::ParameterOutOfRange(s.to_f64()));
    }
    let (j, k) = other_dirs(dir);
    let net = cube.net();
    if *s == S::zero() || *s == S::one() {
        let mut z = [0usize; 3];
        z[dir] = (*s == S::one()) as usize;
        return net.patch(&z, j, k, tol);
    }
    let sing = |_: GeomError| GeomError::SingularTraversal;
    let zero = [0usize; 3];
    let mut zj = zero;
    zj[j] = 1;
    let mut zk = zero;
    zk[k] = 1;
    let f_ij = net.patch(&zero, dir, j, tol).map_err(sing)?;
    let f_ik = net.patch(&zero, dir, k, tol).map_err(sing)?;
    let f_ij_k = net.patch(&zk, dir, j, tol).map_err(sing)?;
    let f_ik_j = net.patch(&zj, dir, k, tol).map_err(sing)?;
    let b1 = f_ij.char_conic(1, s, tol).map_err(sing)?;
    let b2 = f_ik.char_conic(1, s, tol).map_err(sing)?;
    let b1_2 = f_ij_k.char_conic(1, s, tol).map_err(sing)?;
    let b2_1 = f_ik_j.char_conic(1, s, tol).map_err(sing)?;
    let verts = [
        b1.c0().clone(),
        b1.c2().clone(),
        b2_1.c2().clone(),
        b2.c2().clone(),
    ];
    SCPatch::from_boundary(verts, b1, b2, b1_2, b2_1, tol).map_err(sing)
}

/// Cauchy data of an F-transform: the transformed vertices along every
/// coordinate axis and the transformed tangent lines at the origin.
#[derive(Clone, Debug)]
pub struct FTransformCauchy<S: Scalar> {
    pub layer: LatticeMap<HPoint<S>>,
    pub tangents: Vec<PLine<S>>,
}

/// Fundamental transform of an SC-net.
///
/// The pair (net, image) is treated as one two-layer net in m+1 dimensions:
/// the image Q-net completes layer by layer through elementary cubes over
/// the vertical quads, the image tangents extend by the planarity scheme on
/// those quads, and the image arcs are the Laplace-perspectivity transports
/// of the base arcs through the vertical cells. Axis quads that fail to be
/// planar reject the data as `NonPlanarLayer`; an origin tangent that
/// misses its base tangent as `TangentMismatch`.
pub fn sc_ftransform<S: Scalar>(
    net: &SCNet<S>,
    cauchy: &FTransformCauchy<S>,
    tol: Tol,
) -> Result<SCNet<S>> {
    let bx = net.bx().clone();
    let m = bx.dims();
    if cauchy.layer.bx() != &bx {
        return Err(GeomError::BoxMismatch("transform layer on a different box".into()));
    }
    if cauchy.tangents.len() != m {
        return Err(GeomError::BoxMismatch(
            "need one transformed tangent per direction".into(),
        ));
    }
    let origin = vec![0usize; m];
    let x0_plus = cauchy
        .layer
        .get(&origin)
        .ok_or_else(|| GeomError::InconsistentCauchyData("missing transform origin".into()))?;

    // axis layer quads must be planar; interior ones are planar by cube
    // completion
    for d in 0..m {
        for c in 0..bx.extents()[d] - 1 {
            let mut z = origin.clone();
            z[d] = c;
            let z1 = bx.shifted(&z, d, 1).expect("axis edge");
            let (Some(p), Some(p1)) = (cauchy.layer.get(&z), cauchy.layer.get(&z1)) else {
                return Err(GeomError::InconsistentCauchyData(
                    "missing transform vertex on an axis".into(),
                )
                .at(Site::vertex(&z)));
            };
            let quad = [
                net.qnet.vertex(&z)?.clone(),
                net.qnet.vertex(&z1)?.clone(),
                p1.clone(),
                p.clone(),
            ];
            if !is_planar_quad(&quad, tol) {
                return Err(GeomError::NonPlanarLayer.at(Site::cell(&z, &[d])));
            }
        }
    }
    for d in 0..m {
        let t0 = net.tangent(d, &origin)?;
        let tp = &cauchy.tangents[d];
        if !tp.contains(x0_plus, tol) {
            return Err(GeomError::TangentMismatch);
        }
        match crate::projective::lines_intersect(t0, tp, tol) {
            Ok(Some(_)) => {}
            _ => return Err(GeomError::TangentMismatch),
        }
    }

    // complete the image layer
    let mut plus: LatticeMap<HPoint<S>> = LatticeMap::new(bx.clone());
    for z in bx.iter_by_level() {
        if bx.on_axis(&z) {
            let p = cauchy.layer.get(&z).ok_or_else(|| {
                GeomError::InconsistentCauchyData("missing transform vertex on an axis".into())
                    .at(Site::vertex(&z))
            })?;
            plus.set(&z, p.clone())?;
        } else {
            let nz: Vec<usize> = (0..m).filter(|&d| z[d] > 0).collect();
            let (i, j) = (nz[0], nz[1]);
            let w = bx
                .shifted(&bx.shifted(&z, i, -1).expect("interior"), j, -1)
                .expect("interior");
            let wi = bx.shifted(&w, i, 1).expect("cell");
            let wj = bx.shifted(&w, j, 1).expect("cell");
            let c = complete_qcube(
                &[
                    net.qnet.vertex(&w)?.clone(),
                    net.qnet.vertex(&wi)?.clone(),
                    net.qnet.vertex(&wj)?.clone(),
                    plus.require(&w)?.clone(),
                    net.qnet.vertex(&z)?.clone(),
                    plus.require(&wi)?.clone(),
                    plus.require(&wj)?.clone(),
                ],
                tol,
            )
            .map_err(|e| e.at(Site::cell(&w, &[i, j])))?;
            plus.set(&z, c)?;
        }
    }

    // extend the tangent systems onto the image layer
    let mut tangents = Vec::with_capacity(m);
    for d in 0..m {
        let mut tp: LatticeMap<PLine<S>> = LatticeMap::new(bx.clone());
        for z in bx.iter_by_level() {
            if z == origin {
                tp.set(&z, cauchy.tangents[d].clone())?;
                continue;
            }
            let j = (0..m).find(|&dd| z[dd] > 0).expect("nonzero");
            let w = bx.shifted(&z, j, -1).expect("level order");
            let quad = [
                net.qnet.vertex(&w)?.clone(),
                net.qnet.vertex(&z)?.clone(),
                plus.require(&z)?.clone(),
                plus.require(&w)?.clone(),
            ];
            let line = extend_quad_lines(&quad, net.tangent(d, &w)?, net.tangent(d, &z)?,
                tp.require(&w)?, tol)
                .map_err(|e| e.at(Site::cell(&w, &[j])))?;
            tp.set(&z, line)?;
        }
        tangents.push(tp);
    }

    // transport the arcs through the vertical cells
    let mut arcs = Vec::with_capacity(m);
    for d in 0..m {
        let ebx = bx.edge_box(d)?;
        let mut map = LatticeMap::new(ebx.clone());
        for w in ebx.iter() {
            let w1 = bx.shifted(&w, d, 1).expect("edge endpoint");
            let quad = [
                net.qnet.vertex(&w)?.clone(),
                net.qnet.vertex(&w1)?.clone(),
                plus.require(&w1)?.clone(),
                plus.require(&w)?.clone(),
            ];
            let target = plane_of_lines(tangents[d].require(&w)?, tangents[d].require(&w1)?, tol)
                .map_err(|e| e.at(Site::cell(&w, &[d])))?;
            let arc = transport_arc(net.arc(d, &w)?, &quad, &target, tol)
                .map_err(|e| e.at(Site::cell(&w, &[d])))?;
            map.set(&w, arc)?;
        }
        arcs.push(map);
    }

    let systems = tangents
        .into_iter()
        .map(LineSystem::from_map)
        .collect::<Result<Vec<_>>>()?;
    SCNet::new(QNet::from_map(plus)?, systems, arcs)
}

/// Weight-invariant distance of two arcs as oriented segments.
fn arc_segment_residual<S: Scalar>(a: &ConicArc<S>, b: &ConicArc<S>) -> f64 {
    let mut r = 0.0f64;
    for (p, q) in [(a.c0(), b.c0()), (a.c1(), b.c1()), (a.c2(), b.c2())] {
        r = r.max(p.residual_to(q));
    }
    if a.weights()[1].is_negative() != b.weights()[1].is_negative() {
        return r.max(1.0);
    }
    let wa = a.standard_weight_sq().to_f64();
    let wb = b.standard_weight_sq().to_f64();
    r.max((wa - wb).abs() / (wa.abs() + wb.abs()).max(1.0))
}

/// Does `plus` qualify as an F-transform of `net`? Checks the Q-net layer
/// quads and, for every edge, that the image arc is the perspectivity
/// transport of the base arc through the vertical cell. Returns the verdict
/// together with the worst residual over all checks.
pub fn is_ftransform_scnet_pair<S: Scalar>(
    net: &SCNet<S>,
    plus: &SCNet<S>,
    tol: Tol,
) -> Result<(bool, f64)> {
    let (mut ok, mut worst) = is_ftransform_pair(net.qnet(), plus.qnet(), tol)?;
    let bx = net.bx();
    if plus.bx() != bx {
        return Err(GeomError::BoxMismatch("transform pair on different boxes".into()));
    }
    for d in 0..bx.dims() {
        let ebx = bx.edge_box(d)?;
        for w in ebx.iter() {
            let w1 = bx.shifted(&w, d, 1).expect("edge endpoint");
            let quad = [
                net.qnet.vertex(&w)?.clone(),
                net.qnet.vertex(&w1)?.clone(),
                plus.qnet.vertex(&w1)?.clone(),
                plus.qnet.vertex(&w)?.clone(),
            ];
            let stored = plus.arc(d, &w)?;
            match transport_arc(net.arc(d, &w)?, &quad, stored.plane(), tol) {
                Ok(im) => {
                    let r = arc_segment_residual(&im, stored);
                    worst = worst.max(r);
                    ok &= im.proj_eq_segment(stored, tol);
                }
                Err(_) => {
                    ok = false;
                    worst = f64::INFINITY;
                }
            }
        }
    }
    Ok((ok, worst))
}

/// Evaluate a 2D SC-net on per-cell parameter grids into one Q-net.
///
/// `us[a][b]` and `vs[a][b]` are the direction-1 and direction-2 grids of
/// the cell at (a, b); each must run strictly from 0 to 1. Grids have to
/// agree across shared edges, u-grids along columns and v-grids along rows,
/// because neighbouring patches share their boundary arcs and parameter
/// correspondence: a mismatch is rejected as `GridMismatchAcrossEdge`.
/// Boundary vertices are written once, so shared samples are represented by
/// the identical point.
pub fn refine_scnet<S: Scalar>(
    net: &SCNet<S>,
    us: &[Vec<Vec<S>>],
    vs: &[Vec<Vec<S>>],
    tol: Tol,
) -> Result<QNet<S>> {
    if net.dims() != 2 {
        return Err(GeomError::BoxMismatch("refinement expects a 2D net".into()));
    }
    let bx = net.bx();
    let (n0, n1) = (bx.extents()[0] - 1, bx.extents()[1] - 1);
    let shape_ok = us.len() == n0
        && vs.len() == n0
        && us.iter().all(|col| col.len() == n1)
        && vs.iter().all(|col| col.len() == n1);
    if !shape_ok {
        return Err(GeomError::BoxMismatch("one grid pair per cell expected".into()));
    }
    let check_grid = |g: &Vec<S>| -> Result<()> {
        if g.len() < 2 || g[0] != S::zero() || g[g.len() - 1] != S::one() {
            return Err(GeomError::ParameterOutOfRange(
                g.first().map(|t| t.to_f64()).unwrap_or(f64::NAN),
            ));
        }
        for w in g.windows(2) {
            if w[1] <= w[0] {
                return Err(GeomError::ParameterOutOfRange(w[1].to_f64()));
            }
        }
        Ok(())
    };
    for a in 0..n0 {
        for b in 0..n1 {
            check_grid(&us[a][b]).map_err(|e| e.at(Site::cell(&[a, b], &[0])))?;
            check_grid(&vs[a][b]).map_err(|e| e.at(Site::cell(&[a, b], &[1])))?;
            if b + 1 < n1 && us[a][b] != us[a][b + 1] {
                return Err(GeomError::GridMismatchAcrossEdge.at(Site::cell(&[a, b + 1], &[0])));
            }
            if a + 1 < n0 && vs[a][b] != vs[a + 1][b] {
                return Err(GeomError::GridMismatchAcrossEdge.at(Site::cell(&[a + 1, b], &[1])));
            }
        }
    }
    let mut off0 = vec![0usize; n0 + 1];
    for a in 0..n0 {
        off0[a + 1] = off0[a] + us[a][0].len() - 1;
    }
    let mut off1 = vec![0usize; n1 + 1];
    for b in 0..n1 {
        off1[b + 1] = off1[b] + vs[0][b].len() - 1;
    }
    let out_bx = LatticeBox::new(&[off0[n0] + 1, off1[n1] + 1])?;
    let mut map: LatticeMap<HPoint<S>> = LatticeMap::new(out_bx);
    for a in 0..n0 {
        for b in 0..n1 {
            let patch = net.patch(&[a, b], 0, 1, tol)?;
            for (p, u) in us[a][b].iter().enumerate() {
                for (q, v) in vs[a][b].iter().enumerate() {
                    let gz = [off0[a] + p, off1[b] + q];
                    if map.get(&gz).is_none() {
                        let pt = patch
                            .eval(u, v, tol)
                            .map_err(|e| e.at(Site::cell(&[a, b], &[0, 1])))?;
                        map.set(&gz, pt)?;
                    }
                }
            }
        }
    }
    QNet::from_map(map)
}

/// Uniform parameter grid 0, 1/n, ..., 1.
pub fn uniform_grid<S: Scalar>(segments: usize) -> Vec<S> {
    assert!(segments >= 1, "grid needs at least one segment");
    (0..=segments).map(|k| S::ratio(k as i64, segments as i64)).collect()
}
