//! Finite lattice boxes Z^m (2 <= m <= 4) and dense per-site storage.
//!
//! Vertices are indexed row-major with the last direction varying fastest.
//! Edge data of direction i lives on a box whose i-th extent is one less.

use crate::error::{GeomError, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeBox {
    extents: Vec<usize>,
}

impl LatticeBox {
    pub fn new(extents: &[usize]) -> Result<Self> {
        if extents.len() < 2 || extents.len() > 4 {
            return Err(GeomError::BoxMismatch(format!(
                "supported lattice dimensions are 2..=4, got {}",
                extents.len()
            )));
        }
        if extents.iter().any(|&e| e == 0) {
            return Err(GeomError::BoxMismatch("zero extent".into()));
        }
        Ok(LatticeBox { extents: extents.to_vec() })
    }

    pub fn dims(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn len(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, idx: &[usize]) -> bool {
        idx.len() == self.dims() && idx.iter().zip(&self.extents).all(|(&i, &e)| i < e)
    }

    pub fn offset(&self, idx: &[usize]) -> Result<usize> {
        if !self.contains(idx) {
            return Err(GeomError::IndexOutOfBounds);
        }
        let mut off = 0usize;
        for (i, &x) in idx.iter().enumerate() {
            off = off * self.extents[i] + x;
        }
        Ok(off)
    }

    pub fn index_of(&self, mut off: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dims()];
        for i in (0..self.dims()).rev() {
            idx[i] = off % self.extents[i];
            off /= self.extents[i];
        }
        idx
    }

    /// All vertices in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.len()).map(|o| self.index_of(o))
    }

    /// Vertices ordered by |z|_1 level, lexicographic within a level: the
    /// sweep order of every propagation in this crate.
    pub fn iter_by_level(&self) -> Vec<Vec<usize>> {
        let mut all: Vec<Vec<usize>> = self.iter().collect();
        all.sort_by_key(|z| (z.iter().sum::<usize>(), z.clone()));
        all
    }

    pub fn shifted(&self, idx: &[usize], dir: usize, by: i64) -> Option<Vec<usize>> {
        let mut out = idx.to_vec();
        let v = out[dir] as i64 + by;
        if v < 0 || v as usize >= self.extents[dir] {
            return None;
        }
        out[dir] = v as usize;
        Some(out)
    }

    /// Box indexing the direction-`dir` edges.
    pub fn edge_box(&self, dir: usize) -> Result<LatticeBox> {
        let mut e = self.extents.clone();
        if e[dir] < 2 {
            return Err(GeomError::BoxMismatch("no edges in this direction".into()));
        }
        e[dir] -= 1;
        // edge boxes may drop below the net-dimension floor of 2 vertices,
        // so bypass the constructor's range check
        Ok(LatticeBox { extents: e })
    }

    /// Elementary cells spanned by directions i < j: base vertices z with
    /// z + e_i + e_j still inside.
    pub fn cells(&self, i: usize, j: usize) -> Vec<Vec<usize>> {
        self.iter()
            .filter(|z| z[i] + 1 < self.extents[i] && z[j] + 1 < self.extents[j])
            .collect()
    }

    /// Elementary cubes spanned by directions i < j < k.
    pub fn cubes(&self, i: usize, j: usize, k: usize) -> Vec<Vec<usize>> {
        self.iter()
            .filter(|z| {
                z[i] + 1 < self.extents[i]
                    && z[j] + 1 < self.extents[j]
                    && z[k] + 1 < self.extents[k]
            })
            .collect()
    }

    /// Direction pairs (i, j), i < j.
    pub fn dir_pairs(&self) -> Vec<(usize, usize)> {
        let m = self.dims();
        let mut out = Vec::new();
        for i in 0..m {
            for j in (i + 1)..m {
                out.push((i, j));
            }
        }
        out
    }

    /// Direction triples (i, j, k), i < j < k.
    pub fn dir_triples(&self) -> Vec<(usize, usize, usize)> {
        let m = self.dims();
        let mut out = Vec::new();
        for i in 0..m {
            for j in (i + 1)..m {
                for k in (j + 1)..m {
                    out.push((i, j, k));
                }
            }
        }
        out
    }

    /// Is the vertex on the union of 2D coordinate planes (at most two
    /// nonzero components)?
    pub fn on_coordinate_plane(&self, idx: &[usize]) -> bool {
        idx.iter().filter(|&&x| x > 0).count() <= 2
    }

    /// Is the vertex on a coordinate axis (at most one nonzero component)?
    pub fn on_axis(&self, idx: &[usize]) -> bool {
        idx.iter().filter(|&&x| x > 0).count() <= 1
    }
}

/// Dense optional storage per lattice site.
#[derive(Clone, Debug)]
pub struct LatticeMap<T> {
    bx: LatticeBox,
    data: Vec<Option<T>>,
}

impl<T: Clone> LatticeMap<T> {
    pub fn new(bx: LatticeBox) -> Self {
        let n = bx.len();
        LatticeMap { bx, data: vec![None; n] }
    }

    pub fn bx(&self) -> &LatticeBox {
        &self.bx
    }

    pub fn get(&self, idx: &[usize]) -> Option<&T> {
        let off = self.bx.offset(idx).ok()?;
        self.data[off].as_ref()
    }

    pub fn set(&mut self, idx: &[usize], v: T) -> Result<()> {
        let off = self.bx.offset(idx)?;
        self.data[off] = Some(v);
        Ok(())
    }

    pub fn require(&self, idx: &[usize]) -> Result<&T> {
        self.get(idx).ok_or(GeomError::IndexOutOfBounds)
    }

    pub fn is_full(&self) -> bool {
        self.data.iter().all(|x| x.is_some())
    }

    pub fn filled(&self) -> usize {
        self.data.iter().filter(|x| x.is_some()).count()
    }

    /// Unwrap into a dense vector; requires all sites present.
    pub fn into_dense(self) -> Result<Vec<T>> {
        self.data
            .into_iter()
            .map(|x| x.ok_or(GeomError::InconsistentCauchyData("missing lattice site".into())))
            .collect()
    }
}
