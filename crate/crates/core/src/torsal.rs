//! Discrete torsal line systems: focal nets and planes, the fundamental-cube
//! predicates, the two mutually inverse construction schemes (inscribing a
//! Q-net into a line system and extending a Q-net by lines), and the
//! lift-and-project characterization of fundamental systems in RP^3.
//!
//! Cube line order throughout: `(l, l1, l2, l3, l12, l13, l23, l123)`, the
//! same vertex order the Q-net cube completion uses.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{GeomError, Result, Site};
use crate::lattice::{LatticeBox, LatticeMap};
use crate::linalg::{self, coords_in_basis, vec_axpy, Mat, Vecn};
use crate::projective::{central_projection, lines_intersect, HPlane, HPoint, PLine, Subspace};
use crate::qnet::{is_planar_quad, QNet};
use crate::scalar::{Scalar, Tol};

/// Eight lines of a combinatorial 3-cube in the order
/// `(l, l1, l2, l3, l12, l13, l23, l123)`.
pub type CubeLines<S> = [PLine<S>; 8];

// slot of the corner with shift mask, bit d = shifted in direction d
fn slot(mask: usize) -> usize {
    [0, 1, 2, 4, 3, 5, 6, 7][mask]
}

/// Lattice of lines with intersecting neighbors.
#[derive(Clone, Debug)]
pub struct LineSystem<S: Scalar> {
    bx: LatticeBox,
    lines: Vec<PLine<S>>,
}

impl<S: Scalar> LineSystem<S> {
    pub fn from_lines(bx: LatticeBox, lines: Vec<PLine<S>>) -> Result<Self> {
        if lines.len() != bx.len() {
            return Err(GeomError::BoxMismatch(format!(
                "expected {} lines, got {}",
                bx.len(),
                lines.len()
            )));
        }
        Ok(LineSystem { bx, lines })
    }

    pub fn from_map(map: LatticeMap<PLine<S>>) -> Result<Self> {
        let bx = map.bx().clone();
        Ok(LineSystem { bx, lines: map.into_dense()? })
    }

    pub fn bx(&self) -> &LatticeBox {
        &self.bx
    }

    pub fn line(&self, z: &[usize]) -> Result<&PLine<S>> {
        Ok(&self.lines[self.bx.offset(z)?])
    }

    pub fn lines(&self) -> &[PLine<S>] {
        &self.lines
    }

    /// Check the defining property: lattice neighbors intersect.
    pub fn validate_torsal(&self, tol: Tol) -> Result<()> {
        for d in 0..self.bx.dims() {
            if self.bx.extents()[d] < 2 {
                continue;
            }
            for z in self.bx.edge_box(d)?.iter() {
                let zi = self.bx.shifted(&z, d, 1).ok_or(GeomError::IndexOutOfBounds)?;
                match lines_intersect(self.line(&z)?, self.line(&zi)?, tol) {
                    Ok(Some(_)) => {}
                    Ok(None) => return Err(GeomError::SkewNeighbors.at(Site::cell(&z, &[d]))),
                    Err(e) => return Err(e.at(Site::cell(&z, &[d]))),
                }
            }
        }
        Ok(())
    }

    pub fn is_torsal(&self, tol: Tol) -> bool {
        self.validate_torsal(tol).is_ok()
    }

    /// Focal net of a direction: intersections of consecutive lines, indexed
    /// over the edge box of that direction.
    pub fn focal_net(&self, i: usize, tol: Tol) -> Result<LatticeMap<HPoint<S>>> {
        let ebx = self.bx.edge_box(i)?;
        let mut out = LatticeMap::new(ebx.clone());
        for z in ebx.iter() {
            let zi = self.bx.shifted(&z, i, 1).ok_or(GeomError::IndexOutOfBounds)?;
            let f = match lines_intersect(self.line(&z)?, self.line(&zi)?, tol) {
                Ok(Some(p)) => p,
                Ok(None) => return Err(GeomError::SkewNeighbors.at(Site::cell(&z, &[i]))),
                Err(e) => return Err(e.at(Site::cell(&z, &[i]))),
            };
            out.set(&z, f)?;
        }
        Ok(out)
    }

    /// Focal plane of the i-edge at z: the span of the two neighboring lines.
    pub fn focal_plane(&self, z: &[usize], i: usize, tol: Tol) -> Result<Subspace<S>> {
        let zi = self.bx.shifted(z, i, 1).ok_or(GeomError::IndexOutOfBounds)?;
        let sp = self.line(z)?.subspace(tol).join(&self.line(&zi)?.subspace(tol), tol);
        if sp.rank() != 3 {
            return Err(GeomError::NonGenericCube.at(Site::cell(z, &[i])));
        }
        Ok(sp)
    }

    /// Lines of the elementary cube at base z spanned by directions (i, j, k).
    pub fn cube(&self, z: &[usize], dirs: [usize; 3]) -> Result<CubeLines<S>> {
        let mut out: Vec<PLine<S>> = Vec::with_capacity(8);
        for _ in 0..8 {
            out.push(self.lines[0].clone());
        }
        for mask in 0..8usize {
            let mut w = z.to_vec();
            for (b, &d) in dirs.iter().enumerate() {
                if mask & (1 << b) != 0 {
                    w[d] += 1;
                }
            }
            out[slot(mask)] = self.line(&w)?.clone();
        }
        Ok(out.try_into().map_err(|_| GeomError::IndexOutOfBounds)?)
    }

    /// Every elementary cube passes the fundamental predicate.
    pub fn is_fundamental(&self, tol: Tol) -> Result<bool> {
        for (i, j, k) in self.bx.dir_triples() {
            for z in self.bx.cubes(i, j, k) {
                let cube = self.cube(&z, [i, j, k])?;
                let chk = is_fundamental_cube(&cube, tol)
                    .map_err(|e| e.at(Site::cell(&z, &[i, j, k])))?;
                if !chk.fundamental {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// Per-cube diagnostics of the four equivalent fundamental predicates:
/// (i) the first focal quad planar, (ii) all focal quads planar, (iii) the
/// first direction's focal planes concurrent, (iv) all directions concurrent.
#[derive(Clone, Debug)]
pub struct FundamentalCheck {
    pub fundamental: bool,
    pub predicates: [bool; 4],
    pub planar_residuals: [f64; 3],
    pub concurrency_residuals: [f64; 3],
    /// Diagonals of all six faces skew (genericity of the cube).
    pub opposite_skew: bool,
}

fn for_each_combination(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return;
    }
    loop {
        f(&idx);
        // advance lexicographically
        let mut i = k;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Largest k x k minor of the row-normalized matrix: zero iff rank < k.
pub fn rank_defect_residual<S: Scalar>(rows: &Mat<S>, k: usize, tol: Tol) -> S {
    if rows.is_empty() {
        return S::zero();
    }
    let n = rows[0].len();
    if rows.len() < k || n < k {
        return S::zero();
    }
    let normed: Mat<S> = rows.iter().map(|r| linalg::row_normalize(r)).collect();
    let mut worst = S::zero();
    for_each_combination(normed.len(), k, &mut |ri| {
        for_each_combination(n, k, &mut |ci| {
            let sub: Mat<S> = ri
                .iter()
                .map(|&r| ci.iter().map(|&c| normed[r][c].clone()).collect())
                .collect();
            let d = linalg::det(&sub, tol).abs();
            if d > worst {
                worst = d;
            }
        });
    });
    worst
}

fn cube_focal_point<S: Scalar>(
    lines: &CubeLines<S>,
    mask: usize,
    dir_bit: usize,
    tol: Tol,
) -> Result<HPoint<S>> {
    let a = &lines[slot(mask)];
    let b = &lines[slot(mask | (1 << dir_bit))];
    match lines_intersect(a, b, tol) {
        Ok(Some(p)) => Ok(p),
        Ok(None) => Err(GeomError::SkewNeighbors),
        Err(GeomError::CoincidentLines) => Err(GeomError::NonGenericCube),
        Err(e) => Err(e),
    }
}

/// Evaluate the four equivalent fundamental-cube predicates with residual
/// diagnostics. The verdict is predicate (i); agreement of all four is a
/// property of the geometry, not enforced here.
pub fn is_fundamental_cube<S: Scalar>(lines: &CubeLines<S>, tol: Tol) -> Result<FundamentalCheck> {
    let mut planar_res = [0.0f64; 3];
    let mut conc_res = [0.0f64; 3];
    let mut planar_ok = [false; 3];
    let mut conc_ok = [false; 3];
    for i in 0..3usize {
        let (j, k) = match i {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        let base_masks = [0usize, 1 << j, (1 << j) | (1 << k), 1 << k];
        // focal quadrilateral (f^i, f^i_j, f^i_jk, f^i_k)
        let mut pts: Vec<Vecn<S>> = Vec::with_capacity(4);
        for &m in &base_masks {
            pts.push(cube_focal_point(lines, m, i, tol)?.raw());
        }
        let pr = rank_defect_residual(&pts, 4, tol);
        planar_ok[i] = tol.is_zero(&pr);
        planar_res[i] = pr.to_f64().abs();
        // focal planes of the four i-edges, stacked as dual covectors
        let mut covecs: Mat<S> = Vec::new();
        for &m in &base_masks {
            let a = &lines[slot(m)];
            let b = &lines[slot(m | (1 << i))];
            let sp = a.subspace(tol).join(&b.subspace(tol), tol);
            if sp.rank() != 3 {
                return Err(GeomError::NonGenericCube);
            }
            for row in sp.dual(tol).rows() {
                covecs.push(row.clone());
            }
        }
        let ambient = lines[0].ambient();
        let cr = rank_defect_residual(&covecs, ambient, tol);
        conc_ok[i] = tol.is_zero(&cr);
        conc_res[i] = cr.to_f64().abs();
    }
    // genericity diagnostic: the two diagonals of each face
    let mut opposite_skew = true;
    'faces: for di in 0..3usize {
        for dj in di + 1..3 {
            let free: usize = 7 & !((1 << di) | (1 << dj));
            for m in [0usize, free] {
                for (p, q) in [(m, m | (1 << di) | (1 << dj)), (m | (1 << di), m | (1 << dj))] {
                    match lines_intersect(&lines[slot(p)], &lines[slot(q)], tol) {
                        Ok(None) => {}
                        _ => {
                            opposite_skew = false;
                            break 'faces;
                        }
                    }
                }
            }
        }
    }
    Ok(FundamentalCheck {
        fundamental: planar_ok[0],
        predicates: [
            planar_ok[0],
            planar_ok.iter().all(|&b| b),
            conc_ok[0],
            conc_ok.iter().all(|&b| b),
        ],
        planar_residuals: planar_res,
        concurrency_residuals: conc_res,
        opposite_skew,
    })
}

/// Scheme (Q): the fourth vertex of a planar quad inscribed in a torsal line
/// quad `(l, l1, l12, l2)`, given the three vertices x on l, x1 on l1,
/// x2 on l2. The result is `l12` meet the plane of the three points.
pub fn inscribe_quad<S: Scalar>(
    lines: &[PLine<S>; 4],
    x: &HPoint<S>,
    x1: &HPoint<S>,
    x2: &HPoint<S>,
    tol: Tol,
) -> Result<HPoint<S>> {
    let [l, l1, l12, l2] = lines;
    for (line, p) in [(l, x), (l1, x1), (l2, x2)] {
        if !line.contains(p, tol) {
            return Err(GeomError::InconsistentCauchyData("vertex not on its line".into()));
        }
    }
    let ambient = x.dim_ambient();
    let span = Subspace::from_rows(ambient, &[x.raw(), x1.raw(), x2.raw()], tol);
    if span.rank() != 3 {
        return Err(GeomError::DegenerateSpan);
    }
    let m = l12.subspace(tol).meet(&span, tol);
    match m.rank() {
        1 => m.as_point(),
        2 => Err(GeomError::LineInPlane),
        0 => Err(GeomError::DegenerateMeet),
        _ => Err(GeomError::NonGenericMeet),
    }
}

/// Scheme (L): the fourth line of a torsal quad extending a planar quad
/// `(x, x1, x12, x2)`, given l through x, l1 through x1, l2 through x2.
/// The result is `(x12 v l1) meet (x12 v l2)`.
pub fn extend_quad_lines<S: Scalar>(
    quad: &[HPoint<S>; 4],
    l: &PLine<S>,
    l1: &PLine<S>,
    l2: &PLine<S>,
    tol: Tol,
) -> Result<PLine<S>> {
    let [x, x1, x12, x2] = quad;
    for (line, p) in [(l, x), (l1, x1), (l2, x2)] {
        if !line.contains(p, tol) {
            return Err(GeomError::InconsistentCauchyData("vertex not on its line".into()));
        }
    }
    if !is_planar_quad(quad, tol) {
        return Err(GeomError::NonPlanarInput);
    }
    for other in [l1, l2] {
        if lines_intersect(l, other, tol)?.is_none() {
            return Err(GeomError::NonIntersectingInput);
        }
    }
    let ambient = x.dim_ambient();
    let pt = Subspace::from_rows(ambient, &[x12.raw()], tol);
    let p1 = pt.join(&l1.subspace(tol), tol);
    let p2 = pt.join(&l2.subspace(tol), tol);
    if p1.rank() != 3 || p2.rank() != 3 {
        return Err(GeomError::DegenerateSpan);
    }
    let m = p1.meet(&p2, tol);
    if m.rank() != 2 {
        return Err(GeomError::CoplanarDegeneracy);
    }
    m.as_line()
}

/// Extend a Q-net to a fundamental line system from Cauchy lines on the
/// coordinate axes. Lines must pass through their vertices and consecutive
/// axis lines must intersect; scheme (L) then propagates level by level.
pub fn extend_qnet_lines<S: Scalar>(
    x: &QNet<S>,
    cauchy: &LatticeMap<PLine<S>>,
    tol: Tol,
) -> Result<LineSystem<S>> {
    let bx = x.bx().clone();
    if cauchy.bx() != &bx {
        return Err(GeomError::BoxMismatch("cauchy lines on a different box".into()));
    }
    let mut map: LatticeMap<PLine<S>> = LatticeMap::new(bx.clone());
    for z in bx.iter_by_level() {
        let nonzero: Vec<usize> = (0..bx.dims()).filter(|&d| z[d] > 0).collect();
        if nonzero.len() <= 1 {
            let line = cauchy
                .get(&z)
                .ok_or_else(|| {
                    GeomError::InconsistentCauchyData(format!(
                        "missing cauchy line at {}",
                        Site::vertex(&z)
                    ))
                })?
                .clone();
            if !line.contains(x.vertex(&z)?, tol) {
                return Err(GeomError::InconsistentCauchyData(format!(
                    "cauchy line misses its vertex at {}",
                    Site::vertex(&z)
                )));
            }
            if let Some(d) = nonzero.first().copied() {
                let prev = bx.shifted(&z, d, -1).ok_or(GeomError::IndexOutOfBounds)?;
                if lines_intersect(map.require(&prev)?, &line, tol)?.is_none() {
                    return Err(GeomError::SkewNeighbors.at(Site::cell(&prev, &[d])));
                }
            }
            map.set(&z, line)?;
            continue;
        }
        let (i, j) = (nonzero[0], nonzero[1]);
        let mut base = z.clone();
        base[i] -= 1;
        base[j] -= 1;
        let mut zi = base.clone();
        zi[i] += 1;
        let mut zj = base.clone();
        zj[j] += 1;
        let quad = [
            x.vertex(&base)?.clone(),
            x.vertex(&zi)?.clone(),
            x.vertex(&z)?.clone(),
            x.vertex(&zj)?.clone(),
        ];
        let l12 = extend_quad_lines(
            &quad,
            map.require(&base)?,
            map.require(&zi)?,
            map.require(&zj)?,
            tol,
        )
        .map_err(|e| e.at(Site::cell(&base, &[i, j])))?;
        map.set(&z, l12)?;
    }
    LineSystem::from_map(map)
}

/// A fundamental cube lifted to RP^4 together with the data needed to
/// project it back.
#[derive(Clone, Debug)]
pub struct LiftedCube<S: Scalar> {
    pub lines: CubeLines<S>,
    pub center: HPoint<S>,
    pub hyperplane: HPlane<S>,
    pub seed: u64,
    basis: Vec<Vecn<S>>,
}

impl<S: Scalar> LiftedCube<S> {
    pub fn embedding_basis(&self) -> &[Vecn<S>] {
        &self.basis
    }
}

fn embed_point<S: Scalar>(basis: &[Vecn<S>], p: &HPoint<S>) -> Result<HPoint<S>> {
    let n = basis[0].len();
    let mut out = vec![S::zero(); n];
    for (c, b) in p.coords().iter().zip(basis) {
        out = vec_axpy(&out, c, b);
    }
    HPoint::new(out)
}

fn embed_line<S: Scalar>(basis: &[Vecn<S>], l: &PLine<S>) -> Result<PLine<S>> {
    PLine::through(&embed_point(basis, l.span().0)?, &embed_point(basis, l.span().1)?)
}

fn unembed_point<S: Scalar>(basis: &[Vecn<S>], p: &HPoint<S>, tol: Tol) -> Result<HPoint<S>> {
    HPoint::new(coords_in_basis(basis, &p.raw(), tol)?)
}

/// Lift a fundamental cube into RP^4 so that central projection from
/// `center` onto `hyperplane` restores it. The lift of l3 is tilted out of
/// the hyperplane by a seeded choice; everything else is determined.
pub fn lift_complex_cube<S: Scalar>(
    lines: &CubeLines<S>,
    center: &HPoint<S>,
    hyperplane: &HPlane<S>,
    seed: u64,
    tol: Tol,
) -> Result<LiftedCube<S>> {
    if center.dim_ambient() != 5 || hyperplane.coeffs().len() != 5 {
        return Err(GeomError::BoxMismatch("lift target must be a hyperplane of RP^4".into()));
    }
    if tol.is_zero(&hyperplane.eval(center)) {
        return Err(GeomError::CenterOnTarget);
    }
    let chk = is_fundamental_cube(lines, tol)?;
    if !chk.fundamental {
        return Err(GeomError::NotFundamental);
    }
    let basis = linalg::nullspace(&vec![hyperplane.coeffs().to_vec()], tol);
    if basis.len() != 4 {
        return Err(GeomError::DegenerateSpan);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tilt = loop {
        let num = rng.gen_range(-9i64..=9);
        if num != 0 {
            break S::ratio(num, rng.gen_range(1i64..=9));
        }
    };

    let emb = |l: &PLine<S>| embed_line(&basis, l);
    let hl = emb(&lines[0])?;
    let hl1 = emb(&lines[1])?;
    let hl2 = emb(&lines[2])?;
    let hl12 = emb(&lines[4])?;

    // hl3 lives in the plane (l3 v center), through the focal point l3 n l,
    // leaving the hyperplane
    let f3 = cube_focal_point(lines, 0, 2, tol)?; // l n l3
    let y = lines[3].other_point(&f3, tol);
    let yhat = HPoint::new(vec_axpy(&embed_point(&basis, &y)?.raw(), &tilt, &center.raw()))?;
    if tol.is_zero(&hyperplane.eval(&yhat)) {
        return Err(GeomError::DegenerateLift);
    }
    let hl3 = PLine::through(&embed_point(&basis, &f3)?, &yhat)?;

    // hl13 and hl23: one focal point in the hyperplane, one lifted onto hl3
    let lift_adjacent = |lij: &PLine<S>, li: &PLine<S>| -> Result<PLine<S>> {
        let g = match lines_intersect(lij, li, tol)? {
            Some(p) => p,
            None => return Err(GeomError::SkewNeighbors),
        };
        let h = match lines_intersect(lij, &lines[3], tol)? {
            Some(p) => p,
            None => return Err(GeomError::SkewNeighbors),
        };
        let aux = PLine::through(&embed_point(&basis, &h)?, center)?;
        let w = lines_intersect(&hl3, &aux, tol)?.ok_or(GeomError::DegenerateLift)?;
        PLine::through(&embed_point(&basis, &g)?, &w)
    };
    let hl13 = lift_adjacent(&lines[5], &lines[1])?;
    let hl23 = lift_adjacent(&lines[6], &lines[2])?;

    // hl123 = (hl12 v hl13) n (hl12 v hl23) n (hl13 v hl23)
    let mut covecs: Mat<S> = Vec::new();
    for (a, b) in [(&hl12, &hl13), (&hl12, &hl23), (&hl13, &hl23)] {
        let h = a.subspace(tol).join(&b.subspace(tol), tol);
        if h.rank() != 4 {
            return Err(GeomError::DegenerateLift);
        }
        let d = h.dual(tol);
        covecs.push(d.rows()[0].clone());
    }
    let kernel = linalg::nullspace(&covecs, tol);
    if kernel.len() != 2 {
        return Err(GeomError::DegenerateLift);
    }
    let hl123 = PLine::through(&HPoint::new(kernel[0].clone())?, &HPoint::new(kernel[1].clone())?)?;

    Ok(LiftedCube {
        lines: [hl, hl1, hl2, hl3, hl12, hl13, hl23, hl123],
        center: center.clone(),
        hyperplane: hyperplane.clone(),
        seed,
        basis,
    })
}

/// Central projection of a lifted cube back into RP^3 coordinates.
pub fn project_lifted_cube<S: Scalar>(lift: &LiftedCube<S>, tol: Tol) -> Result<CubeLines<S>> {
    let tau = central_projection(&lift.center, &lift.hyperplane, tol)?;
    let mut out: Vec<PLine<S>> = Vec::with_capacity(8);
    for l in &lift.lines {
        let a = unembed_point(&lift.basis, &tau.apply(l.span().0)?, tol)?;
        let b = unembed_point(&lift.basis, &tau.apply(l.span().1)?, tol)?;
        out.push(PLine::through(&a, &b)?);
    }
    Ok(out.try_into().map_err(|_| GeomError::IndexOutOfBounds)?)
}
