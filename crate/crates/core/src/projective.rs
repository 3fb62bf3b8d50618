//! Projective primitives in RP^N (N = 3 or 4 throughout this crate).
//!
//! Points and hyperplanes are homogeneous vectors identified up to scale,
//! stored max-abs normalized with the first significantly nonzero component
//! positive. Lines are stored as spanning point pairs in every dimension;
//! the Plücker 6-vector is derived on demand in RP^3, where skewness is
//! decided by the incidence pairing.

use crate::error::{GeomError, Result};
use crate::linalg::{
    self, dot, mat_mul, mat_vec, nullspace, proportional, row_echelon, row_normalize, transpose,
    Mat, Vecn,
};
use crate::scalar::{max_abs, Scalar, Tol};

/// Threshold used only to pick the sign-fixing component during
/// normalization of float vectors; it does not enter any rank decision.
const SIGN_EPS: f64 = 1e-12;

fn canonical<S: Scalar>(v: &[S]) -> Result<Vecn<S>> {
    let m = max_abs(v);
    if m.is_zero() {
        return Err(GeomError::ZeroVector);
    }
    let mut out: Vecn<S> = v.iter().map(|x| x.clone() / m.clone()).collect();
    for x in out.iter() {
        if (S::EXACT && !x.is_zero()) || (!S::EXACT && x.to_f64().abs() > SIGN_EPS) {
            if x.is_negative() {
                out = out.iter().map(|y| -y.clone()).collect();
            }
            break;
        }
    }
    Ok(out)
}

/// Point of RP^N as a homogeneous (N+1)-vector.
#[derive(Clone, Debug, PartialEq)]
pub struct HPoint<S: Scalar>(Vecn<S>);

/// Hyperplane of RP^N as a homogeneous covector.
#[derive(Clone, Debug, PartialEq)]
pub struct HPlane<S: Scalar>(Vecn<S>);

impl<S: Scalar> HPoint<S> {
    pub fn new(coords: Vecn<S>) -> Result<Self> {
        Ok(HPoint(canonical(&coords)?))
    }

    /// Affine point (x, y, z) embedded in RP^3.
    pub fn affine3(x: S, y: S, z: S) -> Self {
        HPoint(canonical(&[x, y, z, S::one()]).expect("nonzero"))
    }

    pub fn coords(&self) -> &[S] {
        &self.0
    }

    pub fn dim_ambient(&self) -> usize {
        self.0.len()
    }

    /// Dehomogenize against the last coordinate. `None` for ideal points.
    pub fn to_affine(&self, tol: Tol) -> Option<Vecn<S>> {
        let w = self.0.last().unwrap().clone();
        if tol.is_zero(&w) {
            return None;
        }
        Some(self.0[..self.0.len() - 1].iter().map(|x| x.clone() / w.clone()).collect())
    }

    pub fn proj_eq(&self, other: &Self, tol: Tol) -> bool {
        proportional(&self.0, &other.0, tol)
    }

    /// Residual distance used in reports: Euclidean distance of the
    /// normalized representatives (choosing the closer sign).
    pub fn residual_to(&self, other: &Self) -> f64 {
        let mut d_plus = 0.0f64;
        let mut d_minus = 0.0f64;
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            let (a, b) = (a.to_f64(), b.to_f64());
            d_plus += (a - b) * (a - b);
            d_minus += (a + b) * (a + b);
        }
        d_plus.min(d_minus).sqrt()
    }

    pub fn raw(&self) -> Vecn<S> {
        self.0.clone()
    }
}

impl<S: Scalar> HPlane<S> {
    pub fn new(coeffs: Vecn<S>) -> Result<Self> {
        Ok(HPlane(canonical(&coeffs)?))
    }

    pub fn coeffs(&self) -> &[S] {
        &self.0
    }

    pub fn eval(&self, p: &HPoint<S>) -> S {
        dot(&self.0, p.coords())
    }

    /// Incidence at relative tolerance; representatives are normalized, so
    /// the raw pairing is already a scale-free residual.
    pub fn contains(&self, p: &HPoint<S>, tol: Tol) -> bool {
        tol.is_zero(&self.eval(p))
    }

    pub fn proj_eq(&self, other: &Self, tol: Tol) -> bool {
        proportional(&self.0, &other.0, tol)
    }
}

/// Projective subspace given by an echelon row basis of its linear span.
#[derive(Clone, Debug)]
pub struct Subspace<S: Scalar> {
    ambient: usize,
    rows: Mat<S>,
}

impl<S: Scalar> Subspace<S> {
    pub fn from_rows(ambient: usize, rows: &[Vecn<S>], tol: Tol) -> Self {
        let (ech, rank) = row_echelon(rows, tol);
        Subspace { ambient, rows: ech[..rank].to_vec() }
    }

    pub fn from_points(points: &[HPoint<S>], tol: Tol) -> Self {
        let rows: Vec<Vecn<S>> = points.iter().map(|p| p.raw()).collect();
        let ambient = points.first().map(|p| p.dim_ambient()).unwrap_or(0);
        Self::from_rows(ambient, &rows, tol)
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Projective dimension: rank - 1 (-1 encodes the empty set).
    pub fn proj_dim(&self) -> i32 {
        self.rows.len() as i32 - 1
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn rows(&self) -> &Mat<S> {
        &self.rows
    }

    pub fn join(&self, other: &Subspace<S>, tol: Tol) -> Subspace<S> {
        let mut rows = self.rows.clone();
        rows.extend(other.rows.clone());
        Subspace::from_rows(self.ambient, &rows, tol)
    }

    /// Orthogonal complement (dual subspace under the standard pairing).
    pub fn dual(&self, tol: Tol) -> Subspace<S> {
        if self.rows.is_empty() {
            return Subspace {
                ambient: self.ambient,
                rows: linalg::identity::<S>(self.ambient),
            };
        }
        let ns = nullspace(&self.rows, tol);
        Subspace::from_rows(self.ambient, &ns, tol)
    }

    pub fn meet(&self, other: &Subspace<S>, tol: Tol) -> Subspace<S> {
        self.dual(tol).join(&other.dual(tol), tol).dual(tol)
    }

    pub fn contains_point(&self, p: &HPoint<S>, tol: Tol) -> bool {
        let mut rows = self.rows.clone();
        rows.push(p.raw());
        linalg::rank(&rows, tol) == self.rows.len()
    }

    pub fn as_point(&self) -> Result<HPoint<S>> {
        if self.rank() != 1 {
            return Err(GeomError::NonGenericMeet);
        }
        HPoint::new(self.rows[0].clone())
    }

    pub fn as_line(&self) -> Result<PLine<S>> {
        if self.rank() != 2 {
            return Err(GeomError::NonGenericMeet);
        }
        PLine::through(&HPoint::new(self.rows[0].clone())?, &HPoint::new(self.rows[1].clone())?)
    }

    /// Hyperplane covector when the subspace has codimension 1.
    pub fn as_hyperplane(&self, tol: Tol) -> Result<HPlane<S>> {
        if self.rank() + 1 != self.ambient {
            return Err(GeomError::NonGenericMeet);
        }
        let ns = nullspace(&self.rows, tol);
        if ns.len() != 1 {
            return Err(GeomError::NonGenericMeet);
        }
        HPlane::new(ns[0].clone())
    }
}

/// Projective line as a spanning pair of points. Valid in RP^3 and RP^4;
/// Plücker coordinates are available in RP^3.
#[derive(Clone, Debug)]
pub struct PLine<S: Scalar> {
    a: HPoint<S>,
    b: HPoint<S>,
}

impl<S: Scalar> PLine<S> {
    pub fn through(a: &HPoint<S>, b: &HPoint<S>) -> Result<Self> {
        // representatives are canonical, so equality up to scale is equality
        if a.coords() == b.coords() {
            return Err(GeomError::DegenerateSpan);
        }
        Ok(PLine { a: a.clone(), b: b.clone() })
    }

    pub fn span(&self) -> (&HPoint<S>, &HPoint<S>) {
        (&self.a, &self.b)
    }

    pub fn ambient(&self) -> usize {
        self.a.dim_ambient()
    }

    pub fn subspace(&self, tol: Tol) -> Subspace<S> {
        Subspace::from_points(&[self.a.clone(), self.b.clone()], tol)
    }

    /// Plücker coordinates (p01, p02, p03, p12, p13, p23) in RP^3.
    pub fn plucker(&self) -> Vecn<S> {
        assert_eq!(self.ambient(), 4, "plucker coordinates are RP^3 only");
        let a = self.a.coords();
        let b = self.b.coords();
        let p = |i: usize, j: usize| a[i].clone() * b[j].clone() - a[j].clone() * b[i].clone();
        vec![p(0, 1), p(0, 2), p(0, 3), p(1, 2), p(1, 3), p(2, 3)]
    }

    /// Rebuild a line from Plücker coordinates, validating the quadratic
    /// identity p01 p23 - p02 p13 + p03 p12 = 0.
    pub fn from_plucker(p: &[S], tol: Tol) -> Result<Self> {
        if p.len() != 6 {
            return Err(GeomError::DegenerateSpan);
        }
        let pn = row_normalize(p);
        let q = pn[0].clone() * pn[5].clone() - pn[1].clone() * pn[4].clone()
            + pn[2].clone() * pn[3].clone();
        if !tol.is_zero(&q) {
            return Err(GeomError::DegenerateSpan);
        }
        // columns of the skew matrix P[i][j] = p_ij span the line
        let z = S::zero;
        let m: Mat<S> = vec![
            vec![z(), p[0].clone(), p[1].clone(), p[2].clone()],
            vec![-p[0].clone(), z(), p[3].clone(), p[4].clone()],
            vec![-p[1].clone(), -p[3].clone(), z(), p[5].clone()],
            vec![-p[2].clone(), -p[4].clone(), -p[5].clone(), z()],
        ];
        let cols = transpose(&m);
        let sub = Subspace::from_rows(4, &cols, tol);
        if sub.rank() != 2 {
            return Err(GeomError::DegenerateSpan);
        }
        sub.as_line()
    }

    /// Plücker incidence pairing; zero iff the RP^3 lines intersect.
    pub fn incidence(&self, other: &PLine<S>) -> S {
        let p = self.plucker();
        let q = other.plucker();
        let pn = row_normalize(&p);
        let qn = row_normalize(&q);
        pn[0].clone() * qn[5].clone() - pn[1].clone() * qn[4].clone()
            + pn[2].clone() * qn[3].clone()
            + pn[5].clone() * qn[0].clone()
            - pn[4].clone() * qn[1].clone()
            + pn[3].clone() * qn[2].clone()
    }

    pub fn contains(&self, p: &HPoint<S>, tol: Tol) -> bool {
        let rows = vec![self.a.raw(), self.b.raw(), p.raw()];
        linalg::rank(&rows, tol) == 2
    }

    pub fn proj_eq(&self, other: &Self, tol: Tol) -> bool {
        if self.ambient() == 4 {
            return proportional(&self.plucker(), &other.plucker(), tol);
        }
        let rows = vec![self.a.raw(), self.b.raw(), other.a.raw(), other.b.raw()];
        linalg::rank(&rows, tol) == 2
    }

    /// A point of the line other than `p`, used when rebasing spans.
    pub fn other_point(&self, p: &HPoint<S>, tol: Tol) -> HPoint<S> {
        if !self.a.proj_eq(p, tol) {
            self.a.clone()
        } else {
            self.b.clone()
        }
    }
}

// ---------------------------------------------------------------------------
// join / meet convenience layer
// ---------------------------------------------------------------------------

/// Typed geometric element for the generic join/meet entry points.
#[derive(Clone, Debug)]
pub enum GeoElement<S: Scalar> {
    Empty,
    Point(HPoint<S>),
    Line(PLine<S>),
    Hyperplane(HPlane<S>),
    Flat(Subspace<S>),
}

impl<S: Scalar> GeoElement<S> {
    pub fn subspace(&self, ambient: usize, tol: Tol) -> Subspace<S> {
        match self {
            GeoElement::Empty => Subspace::from_rows(ambient, &[], tol),
            GeoElement::Point(p) => Subspace::from_points(std::slice::from_ref(p), tol),
            GeoElement::Line(l) => l.subspace(tol),
            GeoElement::Hyperplane(h) => {
                Subspace::from_rows(ambient, &[h.coeffs().to_vec()], tol).dual(tol)
            }
            GeoElement::Flat(s) => s.clone(),
        }
    }

    pub fn classify(sub: Subspace<S>, tol: Tol) -> GeoElement<S> {
        match sub.rank() {
            0 => GeoElement::Empty,
            1 => GeoElement::Point(sub.as_point().expect("rank 1")),
            2 => GeoElement::Line(sub.as_line().expect("rank 2")),
            r if r + 1 == sub.ambient() => {
                GeoElement::Hyperplane(sub.as_hyperplane(tol).expect("codim 1"))
            }
            _ => GeoElement::Flat(sub),
        }
    }

    pub fn proj_dim(&self, ambient: usize, tol: Tol) -> i32 {
        self.subspace(ambient, tol).proj_dim()
    }
}

/// Join of two elements together with the projective dimension of the result.
pub fn join_elements<S: Scalar>(
    a: &GeoElement<S>,
    b: &GeoElement<S>,
    ambient: usize,
    tol: Tol,
) -> (GeoElement<S>, i32) {
    let s = a.subspace(ambient, tol).join(&b.subspace(ambient, tol), tol);
    let d = s.proj_dim();
    (GeoElement::classify(s, tol), d)
}

/// Meet of two elements together with the projective dimension of the result.
pub fn meet_elements<S: Scalar>(
    a: &GeoElement<S>,
    b: &GeoElement<S>,
    ambient: usize,
    tol: Tol,
) -> (GeoElement<S>, i32) {
    let s = a.subspace(ambient, tol).meet(&b.subspace(ambient, tol), tol);
    let d = s.proj_dim();
    (GeoElement::classify(s, tol), d)
}

/// Plane through three points in RP^3.
pub fn plane_through_points<S: Scalar>(
    a: &HPoint<S>,
    b: &HPoint<S>,
    c: &HPoint<S>,
    tol: Tol,
) -> Result<HPlane<S>> {
    let sub = Subspace::from_points(&[a.clone(), b.clone(), c.clone()], tol);
    if sub.rank() != 3 {
        return Err(GeomError::DegenerateSpan);
    }
    sub.as_hyperplane(tol)
}

/// Plane spanned by a point and a line in RP^3.
pub fn plane_point_line<S: Scalar>(p: &HPoint<S>, l: &PLine<S>, tol: Tol) -> Result<HPlane<S>> {
    let (a, b) = l.span();
    plane_through_points(p, a, b, tol)
}

/// Hyperplane through N points in RP^N (N = points.len()).
pub fn hyperplane_through<S: Scalar>(points: &[HPoint<S>], tol: Tol) -> Result<HPlane<S>> {
    let ambient = points[0].dim_ambient();
    if points.len() + 1 != ambient + 0 && points.len() != ambient - 1 {
        return Err(GeomError::DegenerateSpan);
    }
    let sub = Subspace::from_points(points, tol);
    if sub.rank() != ambient - 1 {
        return Err(GeomError::FocalSpanDegenerate);
    }
    sub.as_hyperplane(tol)
}

/// Intersection line of two distinct planes in RP^3.
pub fn meet_planes<S: Scalar>(p: &HPlane<S>, q: &HPlane<S>, tol: Tol) -> Result<PLine<S>> {
    let rows = vec![p.coeffs().to_vec(), q.coeffs().to_vec()];
    if linalg::rank(&rows, tol) != 2 {
        return Err(GeomError::NonGenericMeet);
    }
    let ns = nullspace(&rows, tol);
    if ns.len() != 2 {
        return Err(GeomError::NonGenericMeet);
    }
    PLine::through(&HPoint::new(ns[0].clone())?, &HPoint::new(ns[1].clone())?)
}

/// Common point of three planes in RP^3 (rank must be exactly 3).
pub fn meet_three_planes<S: Scalar>(
    p: &HPlane<S>,
    q: &HPlane<S>,
    r: &HPlane<S>,
    tol: Tol,
) -> Result<HPoint<S>> {
    let rows = vec![p.coeffs().to_vec(), q.coeffs().to_vec(), r.coeffs().to_vec()];
    if linalg::rank(&rows, tol) != 3 {
        return Err(GeomError::DegeneratePencil);
    }
    let ns = nullspace(&rows, tol);
    if ns.len() != 1 {
        return Err(GeomError::DegeneratePencil);
    }
    HPoint::new(ns[0].clone())
}

/// Point where a line crosses a plane in RP^3.
pub fn meet_line_plane<S: Scalar>(l: &PLine<S>, h: &HPlane<S>, tol: Tol) -> Result<HPoint<S>> {
    let (a, b) = l.span();
    let fa = h.eval(a);
    let fb = h.eval(b);
    if tol.is_zero(&fa) && tol.is_zero(&fb) {
        return Err(GeomError::LineInPlane);
    }
    // fa * b - fb * a lies on both the line and the plane
    let v = linalg::vec_sub(&linalg::vec_scale(&fa, b.coords()), &linalg::vec_scale(&fb, a.coords()));
    HPoint::new(v)
}

/// Intersection behaviour of two lines.
///
/// `Ok(Some(p))`: unique common point. `Ok(None)`: skew. In RP^3 skewness is
/// decided by the Plücker incidence pairing; the rank test distinguishes
/// coincident lines (an error: no unique point).
pub fn lines_intersect<S: Scalar>(
    l: &PLine<S>,
    m: &PLine<S>,
    tol: Tol,
) -> Result<Option<HPoint<S>>> {
    let rows = vec![l.span().0.raw(), l.span().1.raw(), m.span().0.raw(), m.span().1.raw()];
    let rk = linalg::rank(&rows, tol);
    if rk == 2 {
        return Err(GeomError::CoincidentLines);
    }
    if l.ambient() == 4 {
        let inc = l.incidence(m);
        if !tol.is_zero(&inc) {
            return Ok(None);
        }
    } else if rk == 4 {
        return Ok(None);
    }
    let meet = l.subspace(tol).meet(&m.subspace(tol), tol);
    if meet.rank() != 1 {
        // pairing said incident but elimination disagrees: borderline data
        return if rk >= 3 { Ok(None) } else { Err(GeomError::CoincidentLines) };
    }
    Ok(Some(meet.as_point()?))
}

// ---------------------------------------------------------------------------
// cross-ratio
// ---------------------------------------------------------------------------

/// Value of a cross-ratio on the projective line: a field element or infinity.
#[derive(Clone, Debug, PartialEq)]
pub enum CrossRatio<S: Scalar> {
    Finite(S),
    Infinite,
}

impl<S: Scalar> CrossRatio<S> {
    pub fn to_f64(&self) -> f64 {
        match self {
            CrossRatio::Finite(x) => x.to_f64(),
            CrossRatio::Infinite => f64::INFINITY,
        }
    }

    pub fn is(&self, v: i64, tol: Tol) -> bool {
        match self {
            CrossRatio::Finite(x) => tol.is_zero(&(x.clone() - S::from_int(v))),
            CrossRatio::Infinite => false,
        }
    }
}

fn line_coords<S: Scalar>(
    x: &HPoint<S>,
    p: &HPoint<S>,
    q: &HPoint<S>,
    ci: usize,
    cj: usize,
) -> (S, S) {
    // solve x = lambda p + mu q on the chosen coordinate pair
    let d = p.coords()[ci].clone() * q.coords()[cj].clone()
        - p.coords()[cj].clone() * q.coords()[ci].clone();
    let lambda = (x.coords()[ci].clone() * q.coords()[cj].clone()
        - x.coords()[cj].clone() * q.coords()[ci].clone())
        / d.clone();
    let mu = (p.coords()[ci].clone() * x.coords()[cj].clone()
        - p.coords()[cj].clone() * x.coords()[ci].clone())
        / d;
    (lambda, mu)
}

/// Cross-ratio cr(a,b;c,d) = ((a-c)(b-d)) / ((b-c)(a-d)) of four collinear
/// points, evaluated chart-free through 2x2 brackets. With this convention
/// cr = -1 exactly when the pairs (a,b) and (c,d) separate harmonically.
pub fn cross_ratio<S: Scalar>(
    a: &HPoint<S>,
    b: &HPoint<S>,
    c: &HPoint<S>,
    d: &HPoint<S>,
    tol: Tol,
) -> Result<CrossRatio<S>> {
    let pts = [a, b, c, d];
    let rows: Vec<Vecn<S>> = pts.iter().map(|p| p.raw()).collect();
    let (ech, rank) = row_echelon(&rows, tol);
    if rank > 2 {
        return Err(GeomError::NotCollinear);
    }
    if rank < 2 {
        return Err(GeomError::UndefinedCrossRatio);
    }
    let p = HPoint::new(ech[0].clone())?;
    let q = HPoint::new(ech[1].clone())?;
    // coordinate pair where the basis is best conditioned
    let n = p.dim_ambient();
    let mut best = (0usize, 1usize, S::zero());
    for i in 0..n {
        for j in (i + 1)..n {
            let m = (p.coords()[i].clone() * q.coords()[j].clone()
                - p.coords()[j].clone() * q.coords()[i].clone())
            .abs();
            if m > best.2 {
                best = (i, j, m);
            }
        }
    }
    let (ci, cj, _) = best;
    let co: Vec<(S, S)> = pts.iter().map(|x| line_coords(x, &p, &q, ci, cj)).collect();
    let br = |x: usize, y: usize| -> S {
        co[x].0.clone() * co[y].1.clone() - co[y].0.clone() * co[x].1.clone()
    };
    let num = br(0, 2) * br(1, 3); // [ac][bd]
    let den = br(1, 2) * br(0, 3); // [bc][ad]
    let den_zero = tol.is_zero(&den);
    let num_zero = tol.is_zero(&num);
    if den_zero && num_zero {
        return Err(GeomError::UndefinedCrossRatio);
    }
    if den_zero {
        return Ok(CrossRatio::Infinite);
    }
    Ok(CrossRatio::Finite(num / den))
}

/// Harmonic conjugate of `x` with respect to the pair (p, q): the unique
/// point y with cr(x,y;p,q) = -1.
pub fn harmonic_conjugate<S: Scalar>(
    x: &HPoint<S>,
    p: &HPoint<S>,
    q: &HPoint<S>,
    tol: Tol,
) -> Result<HPoint<S>> {
    let rows = vec![p.raw(), q.raw(), x.raw()];
    if linalg::rank(&rows, tol) != 2 {
        return Err(GeomError::NotCollinear);
    }
    let n = p.dim_ambient();
    let mut best = (0usize, 1usize, S::zero());
    for i in 0..n {
        for j in (i + 1)..n {
            let m = (p.coords()[i].clone() * q.coords()[j].clone()
                - p.coords()[j].clone() * q.coords()[i].clone())
            .abs();
            if m > best.2 {
                best = (i, j, m);
            }
        }
    }
    let (ci, cj, denom) = best;
    if tol.is_zero(&denom) {
        return Err(GeomError::DegenerateSpan);
    }
    let (lambda, mu) = line_coords(x, p, q, ci, cj);
    if tol.is_zero(&lambda) || tol.is_zero(&mu) {
        // x coincides with p or q: conjugate undefined
        return Err(GeomError::UndefinedCrossRatio);
    }
    let y = linalg::vec_sub(
        &linalg::vec_scale(&lambda, p.coords()),
        &linalg::vec_scale(&mu, q.coords()),
    );
    HPoint::new(y)
}

// ---------------------------------------------------------------------------
// projective maps
// ---------------------------------------------------------------------------

/// Projective map as an (N+1)x(N+1) matrix up to scale. Central projections
/// are legitimately rank-deficient; operations that need the inverse check
/// invertibility explicitly.
#[derive(Clone, Debug)]
pub struct ProjMap<S: Scalar> {
    m: Mat<S>,
}

impl<S: Scalar> ProjMap<S> {
    pub fn from_matrix(m: Mat<S>) -> Self {
        ProjMap { m }
    }

    pub fn identity(ambient: usize) -> Self {
        ProjMap { m: linalg::identity(ambient) }
    }

    pub fn matrix(&self) -> &Mat<S> {
        &self.m
    }

    pub fn apply(&self, p: &HPoint<S>) -> Result<HPoint<S>> {
        let v = mat_vec(&self.m, p.coords());
        HPoint::new(v).map_err(|_| GeomError::MapAnnihilatesPoint)
    }

    /// Raw image vector, preserving scale relative to the input
    /// representative. Used by arc transport where scales carry weights.
    pub fn apply_raw(&self, v: &[S]) -> Vecn<S> {
        mat_vec(&self.m, v)
    }

    pub fn apply_line(&self, l: &PLine<S>, tol: Tol) -> Result<PLine<S>> {
        let a = self.apply(l.span().0)?;
        let b = self.apply(l.span().1)?;
        if a.proj_eq(&b, tol) {
            return Err(GeomError::DegenerateSpan);
        }
        PLine::through(&a, &b)
    }

    /// Image of a hyperplane: covector transported by the inverse transpose.
    pub fn apply_plane(&self, h: &HPlane<S>, tol: Tol) -> Result<HPlane<S>> {
        let inv = linalg::inverse(&self.m, tol).ok_or(GeomError::NonInvertibleMap)?;
        let it = transpose(&inv);
        HPlane::new(mat_vec(&it, h.coeffs()))
    }

    pub fn compose(&self, inner: &ProjMap<S>) -> ProjMap<S> {
        ProjMap { m: mat_mul(&self.m, &inner.m) }
    }

    pub fn inverse(&self, tol: Tol) -> Result<ProjMap<S>> {
        let inv = linalg::inverse(&self.m, tol).ok_or(GeomError::NonInvertibleMap)?;
        Ok(ProjMap { m: inv })
    }

    pub fn is_invertible(&self, tol: Tol) -> bool {
        linalg::inverse(&self.m, tol).is_some()
    }

    /// Equality up to scale. Exact backend: proportionality of the flattened
    /// matrices. Float: unit-Frobenius normalization with the sign fixed by
    /// the largest-magnitude entry, then Frobenius distance against `tol`.
    pub fn proj_eq(&self, other: &ProjMap<S>, tol: Tol) -> bool {
        let flat = |m: &Mat<S>| -> Vecn<S> { m.iter().flatten().cloned().collect() };
        let a = flat(&self.m);
        let b = flat(&other.m);
        if S::EXACT {
            return proportional(&a, &b, tol);
        }
        self.frobenius_distance(other) <= tol.rel
    }

    /// Frobenius distance of the sign-fixed unit-Frobenius normalizations.
    pub fn frobenius_distance(&self, other: &ProjMap<S>) -> f64 {
        let norm = |m: &Mat<S>| -> Vec<f64> {
            let flat: Vec<f64> = m.iter().flatten().map(|x| x.to_f64()).collect();
            let n = flat.iter().map(|x| x * x).sum::<f64>().sqrt();
            let mut out: Vec<f64> = flat.iter().map(|x| x / n).collect();
            let lead = out
                .iter()
                .cloned()
                .max_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap())
                .unwrap_or(0.0);
            if lead < 0.0 {
                for x in out.iter_mut() {
                    *x = -*x;
                }
            }
            out
        };
        let a = norm(&self.m);
        let b = norm(&other.m);
        a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
    }
}

/// Central projection from `center` onto the hyperplane `target`:
/// x maps to <target, center> x - <target, x> center, which fixes `target`
/// pointwise and collapses lines through the center onto it.
pub fn central_projection<S: Scalar>(
    center: &HPoint<S>,
    target: &HPlane<S>,
    tol: Tol,
) -> Result<ProjMap<S>> {
    let s = target.eval(center);
    if tol.is_zero(&s) {
        return Err(GeomError::CenterOnTarget);
    }
    let n = center.dim_ambient();
    let mut m = linalg::identity::<S>(n);
    for i in 0..n {
        for j in 0..n {
            m[i][j] = m[i][j].clone() * s.clone()
                - center.coords()[i].clone() * target.coeffs()[j].clone();
        }
    }
    Ok(ProjMap { m })
}

/// Projective reflection (harmonic homology) with center `o` and mirror `h`.
#[derive(Clone, Debug)]
pub struct ProjReflection<S: Scalar> {
    pub center: HPoint<S>,
    pub mirror: HPlane<S>,
    map: ProjMap<S>,
}

/// Matrix of the harmonic homology: <h,o> I - 2 o h^T. It fixes the mirror
/// pointwise, fixes the center, is an involution, and sends each x to the
/// harmonic conjugate of x with respect to ((x v o) n h, o).
pub fn projective_reflection<S: Scalar>(
    o: &HPoint<S>,
    h: &HPlane<S>,
    tol: Tol,
) -> Result<ProjReflection<S>> {
    let s = h.eval(o);
    if tol.is_zero(&s) {
        return Err(GeomError::CenterOnMirror);
    }
    let n = o.dim_ambient();
    let two = S::from_int(2);
    let mut m = linalg::identity::<S>(n);
    for i in 0..n {
        for j in 0..n {
            m[i][j] = m[i][j].clone() * s.clone()
                - two.clone() * o.coords()[i].clone() * h.coeffs()[j].clone();
        }
    }
    Ok(ProjReflection { center: o.clone(), mirror: h.clone(), map: ProjMap { m } })
}

impl<S: Scalar> ProjReflection<S> {
    pub fn map(&self) -> &ProjMap<S> {
        &self.map
    }

    pub fn apply(&self, p: &HPoint<S>) -> Result<HPoint<S>> {
        self.map.apply(p)
    }

    pub fn apply_line(&self, l: &PLine<S>, tol: Tol) -> Result<PLine<S>> {
        self.map.apply_line(l, tol)
    }
}
