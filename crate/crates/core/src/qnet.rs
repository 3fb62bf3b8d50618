//! Q-nets: lattice maps into RP^3 with planar elementary quadrilaterals.
//!
//! The 3D system: seven vertices of an elementary cube determine the eighth
//! as the common point of the three shifted face planes. Propagation from
//! Cauchy data on the 2D coordinate planes sweeps the box by |z|_1 level,
//! always completing the cube over the three lowest incoming directions.

use crate::error::{GeomError, Result, Site};
use crate::lattice::{LatticeBox, LatticeMap};
use crate::linalg::normalized_det;
use crate::projective::{
    lines_intersect, meet_three_planes, plane_through_points, HPoint, PLine, ProjMap,
};
use crate::scalar::{Scalar, Tol};

/// Fully populated Q-net on a lattice box.
#[derive(Clone, Debug)]
pub struct QNet<S: Scalar> {
    bx: LatticeBox,
    pts: Vec<HPoint<S>>,
}

impl<S: Scalar> QNet<S> {
    pub fn from_points(bx: LatticeBox, pts: Vec<HPoint<S>>) -> Result<Self> {
        if pts.len() != bx.len() {
            return Err(GeomError::BoxMismatch(format!(
                "expected {} vertices, got {}",
                bx.len(),
                pts.len()
            )));
        }
        Ok(QNet { bx, pts })
    }

    pub fn from_map(map: LatticeMap<HPoint<S>>) -> Result<Self> {
        let bx = map.bx().clone();
        let pts = map.into_dense()?;
        Ok(QNet { bx, pts })
    }

    pub fn bx(&self) -> &LatticeBox {
        &self.bx
    }

    pub fn vertex(&self, z: &[usize]) -> Result<&HPoint<S>> {
        let off = self.bx.offset(z)?;
        Ok(&self.pts[off])
    }

    pub fn points(&self) -> &[HPoint<S>] {
        &self.pts
    }

    /// Elementary quad at base z spanned by directions i, j, in the cyclic
    /// order (x, x_i, x_ij, x_j).
    pub fn quad(&self, z: &[usize], i: usize, j: usize) -> Result<[HPoint<S>; 4]> {
        let zi = self.bx.shifted(z, i, 1).ok_or(GeomError::IndexOutOfBounds)?;
        let zj = self.bx.shifted(z, j, 1).ok_or(GeomError::IndexOutOfBounds)?;
        let zij = self.bx.shifted(&zi, j, 1).ok_or(GeomError::IndexOutOfBounds)?;
        Ok([
            self.vertex(z)?.clone(),
            self.vertex(&zi)?.clone(),
            self.vertex(&zij)?.clone(),
            self.vertex(&zj)?.clone(),
        ])
    }

    pub fn apply_map(&self, m: &ProjMap<S>) -> Result<QNet<S>> {
        let pts: Result<Vec<HPoint<S>>> = self.pts.iter().map(|p| m.apply(p)).collect();
        Ok(QNet { bx: self.bx.clone(), pts: pts? })
    }

    /// Worst planarity residual over all elementary quads.
    pub fn worst_quad_residual(&self, tol: Tol) -> Result<f64> {
        let mut worst = 0.0f64;
        for (i, j) in self.bx.dir_pairs() {
            for z in self.bx.cells(i, j) {
                let q = self.quad(&z, i, j)?;
                let r = planar_quad_residual(&q, tol).to_f64().abs();
                if r > worst {
                    worst = r;
                }
            }
        }
        Ok(worst)
    }

    pub fn is_qnet(&self, tol: Tol) -> Result<bool> {
        for (i, j) in self.bx.dir_pairs() {
            for z in self.bx.cells(i, j) {
                let q = self.quad(&z, i, j)?;
                if !is_planar_quad(&q, tol) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Restriction to a 2D sub-lattice: directions (i, j) with the other
    /// coordinates frozen at `frozen` (which must have zeros at i and j).
    pub fn restrict_2d(&self, i: usize, j: usize, frozen: &[usize]) -> Result<QNet<S>> {
        let ext = self.bx.extents();
        let sub = LatticeBox::new(&[ext[i], ext[j]])?;
        let mut pts = Vec::with_capacity(sub.len());
        for zz in sub.iter() {
            let mut z = frozen.to_vec();
            z[i] = zz[0];
            z[j] = zz[1];
            pts.push(self.vertex(&z)?.clone());
        }
        QNet::from_points(sub, pts)
    }
}

/// Scale-free planarity residual: determinant of the row-normalized 4x4
/// matrix of homogeneous coordinates. Zero exactly when coplanar.
pub fn planar_quad_residual<S: Scalar>(q: &[HPoint<S>; 4], tol: Tol) -> S {
    let rows: Vec<Vec<S>> = q.iter().map(|p| p.raw()).collect();
    normalized_det(&rows, tol)
}

pub fn is_planar_quad<S: Scalar>(q: &[HPoint<S>; 4], tol: Tol) -> bool {
    tol.is_zero(&planar_quad_residual(q, tol))
}

/// Complete an elementary cube: given (x, x1, x2, x3, x12, x13, x23), the
/// eighth vertex is the meet of the three shifted face planes
/// x3 v x13 v x23, x1 v x12 v x13 and x2 v x12 v x23.
pub fn complete_qcube<S: Scalar>(pts: &[HPoint<S>; 7], tol: Tol) -> Result<HPoint<S>> {
    let [x, x1, x2, x3, x12, x13, x23] = pts;
    for face in [[x, x1, x12, x2], [x, x1, x13, x3], [x, x2, x23, x3]] {
        let q = [face[0].clone(), face[1].clone(), face[2].clone(), face[3].clone()];
        if !is_planar_quad(&q, tol) {
            return Err(GeomError::NonPlanarInput);
        }
    }
    let p12_3 = plane_through_points(x3, x13, x23, tol)?;
    let p23_1 = plane_through_points(x1, x12, x13, tol)?;
    let p13_2 = plane_through_points(x2, x12, x23, tol)?;
    meet_three_planes(&p12_3, &p23_1, &p13_2, tol)
}

/// Propagate a Q-net from Cauchy data prescribed on the union of 2D
/// coordinate planes. Sites are filled level by level; each new vertex
/// completes the cube over its three lowest incoming directions.
pub fn propagate_qnet<S: Scalar>(cauchy: &LatticeMap<HPoint<S>>, tol: Tol) -> Result<QNet<S>> {
    let bx = cauchy.bx().clone();
    let mut map: LatticeMap<HPoint<S>> = LatticeMap::new(bx.clone());
    for z in bx.iter_by_level() {
        if let Some(p) = cauchy.get(&z) {
            map.set(&z, p.clone())?;
            continue;
        }
        if bx.on_coordinate_plane(&z) {
            return Err(GeomError::InconsistentCauchyData(format!(
                "missing cauchy vertex at {}",
                Site::vertex(&z)
            )));
        }
        let dirs: Vec<usize> = (0..bx.dims()).filter(|&d| z[d] > 0).collect();
        let (i, j, k) = (dirs[0], dirs[1], dirs[2]);
        let mut base = z.clone();
        base[i] -= 1;
        base[j] -= 1;
        base[k] -= 1;
        let at = |di: usize, dj: usize, dk: usize| -> Vec<usize> {
            let mut w = base.clone();
            w[i] += di;
            w[j] += dj;
            w[k] += dk;
            w
        };
        let seven = [
            map.require(&at(0, 0, 0))?.clone(),
            map.require(&at(1, 0, 0))?.clone(),
            map.require(&at(0, 1, 0))?.clone(),
            map.require(&at(0, 0, 1))?.clone(),
            map.require(&at(1, 1, 0))?.clone(),
            map.require(&at(1, 0, 1))?.clone(),
            map.require(&at(0, 1, 1))?.clone(),
        ];
        let p = complete_qcube(&seven, tol)
            .map_err(|e| e.at(Site::cell(&z, &[i, j, k])))?;
        map.set(&z, p)?;
    }
    QNet::from_map(map)
}

/// Laplace point of a planar quad (x, x_i, x_ij, x_j): the common point of
/// the two extended edge lines of the stated direction (0 picks the edges
/// x -> x_i and x_j -> x_ij; 1 picks x -> x_j and x_i -> x_ij).
pub fn laplace_point<S: Scalar>(quad: &[HPoint<S>; 4], dir: usize, tol: Tol) -> Result<HPoint<S>> {
    let [x, xi, xij, xj] = quad;
    let (l1, l2) = match dir {
        0 => (PLine::through(x, xi)?, PLine::through(xj, xij)?),
        1 => (PLine::through(x, xj)?, PLine::through(xi, xij)?),
        _ => return Err(GeomError::IndexOutOfBounds),
    };
    match lines_intersect(&l1, &l2, tol) {
        Ok(Some(p)) => Ok(p),
        Ok(None) => Err(GeomError::DegenerateQuad),
        Err(GeomError::CoincidentLines) => Err(GeomError::ParallelCoincidentEdges),
        Err(e) => Err(e),
    }
}

/// Are two nets of the same box an F-transform pair: every vertical quad
/// (x, x_i, x_i^+, x^+) planar? Returns the verdict and the worst residual.
pub fn is_ftransform_pair<S: Scalar>(
    net: &QNet<S>,
    plus: &QNet<S>,
    tol: Tol,
) -> Result<(bool, f64)> {
    if net.bx() != plus.bx() {
        return Err(GeomError::BoxMismatch("F-transform pair on different boxes".into()));
    }
    let bx = net.bx();
    let mut worst = 0.0f64;
    let mut ok = true;
    for d in 0..bx.dims() {
        for z in bx.iter() {
            if let Some(zi) = bx.shifted(&z, d, 1) {
                let q = [
                    net.vertex(&z)?.clone(),
                    net.vertex(&zi)?.clone(),
                    plus.vertex(&zi)?.clone(),
                    plus.vertex(&z)?.clone(),
                ];
                let r = planar_quad_residual(&q, tol).to_f64().abs();
                worst = worst.max(r);
                if !is_planar_quad(&q, tol) {
                    ok = false;
                }
            }
        }
    }
    Ok((ok, worst))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    fn t() -> Tol {
        Tol::default()
    }

    fn q(n: i64, d: i64) -> Q {
        <Q as Scalar>::ratio(n, d)
    }

    fn qpt(v: [i64; 4]) -> HPoint<Q> {
        HPoint::new(v.iter().map(|&x| q(x, 1)).collect()).unwrap()
    }

    fn fpt(v: [f64; 3]) -> HPoint<f64> {
        HPoint::affine3(v[0], v[1], v[2])
    }

    #[test]
    fn unit_cube_completion() {
        let seven = [
            qpt([0, 0, 0, 1]),
            qpt([1, 0, 0, 1]),
            qpt([0, 1, 0, 1]),
            qpt([0, 0, 1, 1]),
            qpt([1, 1, 0, 1]),
            qpt([1, 0, 1, 1]),
            qpt([0, 1, 1, 1]),
        ];
        let x123 = complete_qcube(&seven, t()).unwrap();
        assert!(x123.proj_eq(&qpt([1, 1, 1, 1]), t()));
    }

    #[test]
    fn completion_rejects_nonplanar_face() {
        let seven = [
            fpt([0.0, 0.0, 0.0]),
            fpt([1.0, 0.0, 0.0]),
            fpt([0.0, 1.0, 0.0]),
            fpt([0.0, 0.0, 1.0]),
            fpt([1.0, 1.0, 0.5]), // breaks the (1,2) face
            fpt([1.0, 0.0, 1.0]),
            fpt([0.0, 1.0, 1.0]),
        ];
        assert!(matches!(complete_qcube(&seven, t()), Err(GeomError::NonPlanarInput)));
    }

    #[test]
    fn laplace_point_of_trapezoid() {
        // (0,0), (2,0), (1,1), (0,1) in z=0 as (x, x1, x12, x2)
        let quad = [
            fpt([0.0, 0.0, 0.0]),
            fpt([2.0, 0.0, 0.0]),
            fpt([1.0, 1.0, 0.0]),
            fpt([0.0, 1.0, 0.0]),
        ];
        // direction 0 edges y=0 and y=1 are parallel: ideal point
        let y0 = laplace_point(&quad, 0, t()).unwrap();
        assert!(y0.proj_eq(&HPoint::new(vec![1.0, 0.0, 0.0, 0.0]).unwrap(), t()));
        // direction 1 edges x=0 and x+y=2 meet at (0,2,0)
        let y1 = laplace_point(&quad, 1, t()).unwrap();
        assert!(y1.proj_eq(&fpt([0.0, 2.0, 0.0]), t()));
    }

    #[test]
    fn translation_is_ftransform() {
        let bx = LatticeBox::new(&[3, 3]).unwrap();
        let mut pts = Vec::new();
        for z in bx.iter() {
            pts.push(fpt([z[0] as f64, z[1] as f64, (z[0] * z[1]) as f64]));
        }
        let net = QNet::from_points(bx.clone(), pts.clone()).unwrap();
        let shifted: Vec<HPoint<f64>> = pts
            .iter()
            .map(|p| {
                let a = p.to_affine(t()).unwrap();
                fpt([a[0] + 0.5, a[1] - 1.0, a[2] + 2.0])
            })
            .collect();
        let plus = QNet::from_points(bx, shifted).unwrap();
        let (ok, worst) = is_ftransform_pair(&net, &plus, t()).unwrap();
        assert!(ok, "worst residual {worst}");
    }

    #[test]
    fn propagation_fills_a_cube_box() {
        // 2x2x2 rational cauchy data on coordinate planes, then propagate
        let bx = LatticeBox::new(&[2, 2, 2]).unwrap();
        let mut cauchy: LatticeMap<HPoint<Q>> = LatticeMap::new(bx.clone());
        let pts = [
            ([0, 0, 0], [0, 0, 0, 1]),
            ([1, 0, 0], [2, 0, 0, 1]),
            ([0, 1, 0], [0, 3, 0, 1]),
            ([0, 0, 1], [0, 0, 1, 1]),
            ([1, 1, 0], [3, 2, 0, 1]),
            ([1, 0, 1], [2, 0, 2, 1]),
            ([0, 1, 1], [0, 2, 2, 1]),
        ];
        for (z, p) in pts {
            cauchy.set(&z, qpt(p)).unwrap();
        }
        let net = propagate_qnet(&cauchy, t()).unwrap();
        assert!(net.is_qnet(t()).unwrap());
        // the filled vertex agrees with direct completion
        let seven = [
            qpt([0, 0, 0, 1]),
            qpt([2, 0, 0, 1]),
            qpt([0, 3, 0, 1]),
            qpt([0, 0, 1, 1]),
            qpt([3, 2, 0, 1]),
            qpt([2, 0, 2, 1]),
            qpt([0, 2, 2, 1]),
        ];
        let direct = complete_qcube(&seven, t()).unwrap();
        assert!(net.vertex(&[1, 1, 1]).unwrap().proj_eq(&direct, t()));
    }

    #[test]
    fn propagation_requires_full_cauchy_planes() {
        let bx = LatticeBox::new(&[2, 2, 2]).unwrap();
        let mut cauchy: LatticeMap<HPoint<Q>> = LatticeMap::new(bx);
        cauchy.set(&[0, 0, 0], qpt([0, 0, 0, 1])).unwrap();
        assert!(matches!(
            propagate_qnet(&cauchy, t()),
            Err(GeomError::InconsistentCauchyData(_))
        ));
    }
}
