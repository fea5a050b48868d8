use crate::grasp::Signature;
use std::collections::VecDeque;

/// Dimensions of a voxel lattice, x fastest, then y, then theta.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
}

impl Dims {
    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, ix: usize, iy: usize, it: usize) -> usize {
        (it * self.ny + iy) * self.nx + ix
    }

    pub fn coords(&self, i: usize) -> (usize, usize, usize) {
        (i % self.nx, (i / self.nx) % self.ny, i / (self.nx * self.ny))
    }

    /// 4-neighbourhood in (x, y) plus the adjacent theta bins, wrapping.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let (ix, iy, it) = self.coords(i);
        let mut out = [usize::MAX; 6];
        if ix > 0 {
            out[0] = self.index(ix - 1, iy, it);
        }
        if ix + 1 < self.nx {
            out[1] = self.index(ix + 1, iy, it);
        }
        if iy > 0 {
            out[2] = self.index(ix, iy - 1, it);
        }
        if iy + 1 < self.ny {
            out[3] = self.index(ix, iy + 1, it);
        }
        if self.nt > 1 {
            out[4] = self.index(ix, iy, (it + 1) % self.nt);
            let prev = self.index(ix, iy, (it + self.nt - 1) % self.nt);
            if prev != out[4] {
                out[5] = prev;
            }
        }
        out.into_iter().filter(|&n| n != usize::MAX)
    }
}

/// Labels connected components of equal signature; `None` marks occupied
/// voxels. Components are numbered in scan order of their first voxel.
pub fn label_components(dims: Dims, cells: &[Option<Signature>]) -> (Vec<Option<usize>>, usize) {
    assert_eq!(cells.len(), dims.len());
    let mut labels = vec![None; cells.len()];
    let mut next = 0;
    let mut queue = VecDeque::new();
    for start in 0..cells.len() {
        let Some(sig) = cells[start] else { continue };
        if labels[start].is_some() {
            continue;
        }
        labels[start] = Some(next);
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            for n in dims.neighbors(i) {
                if labels[n].is_none() && cells[n] == Some(sig) {
                    labels[n] = Some(next);
                    queue.push_back(n);
                }
            }
        }
        next += 1;
    }
    (labels, next)
}
