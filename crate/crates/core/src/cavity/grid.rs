//! Dense cell array covering the window ball plus one layer of padding, so
//! every neighbor lookup of a window cell stays in bounds.

use crate::error::{Error, Result};
use crate::lattice::{unit_offsets, Region};

/// Refuse grids larger than this many cells.
const MAX_CELLS: usize = 1 << 28;

#[derive(Debug)]
pub(crate) struct Grid {
    pub dim: usize,
    pub half: i32,
    pub strides: Vec<isize>,
    /// Neighbor index deltas in ascending lexicographic order of the target.
    pub steps: Vec<isize>,
    /// Region membership, window included.
    pub member: Vec<bool>,
    /// Flattened coordinates, `dim` entries per cell.
    pub coords: Vec<i32>,
}

impl Grid {
    pub fn new(region: &Region) -> Result<Self> {
        let dim = region.dim();
        let half = region.window_radius() as i32 + 1;
        let side = 2 * half as usize + 1;
        let cells = (0..dim).try_fold(1usize, |acc, _| acc.checked_mul(side));
        let cells = match cells {
            Some(n) if n <= MAX_CELLS => n,
            _ => {
                return Err(Error::usage(format!(
                    "window radius {} in dimension {dim} needs more than {MAX_CELLS} cells",
                    region.window_radius()
                )))
            }
        };
        let mut strides = Vec::with_capacity(dim);
        let mut s = 1isize;
        for _ in 0..dim {
            strides.push(s);
            s *= side as isize;
        }
        let steps = unit_offsets(dim)
            .into_iter()
            .map(|(axis, delta)| strides[axis] * delta as isize)
            .collect();

        let mut member = vec![false; cells];
        let mut coords = vec![0i32; cells * dim];
        let mut c = vec![-half; dim];
        for cell in 0..cells {
            coords[cell * dim..(cell + 1) * dim].copy_from_slice(&c);
            member[cell] = region.contains_raw(&c);
            for x in c.iter_mut() {
                *x += 1;
                if *x > half {
                    *x = -half;
                } else {
                    break;
                }
            }
        }
        Ok(Self {
            dim,
            half,
            strides,
            steps,
            member,
            coords,
        })
    }

    /// Cell index of `c`, or `None` when it lies outside the padded grid.
    pub fn index(&self, c: &[i32]) -> Option<usize> {
        let mut idx = 0isize;
        for (x, s) in c.iter().zip(&self.strides) {
            if x.abs() > self.half {
                return None;
            }
            idx += (*x + self.half) as isize * s;
        }
        Some(idx as usize)
    }

    pub fn coords_of(&self, cell: usize) -> &[i32] {
        &self.coords[cell * self.dim..(cell + 1) * self.dim]
    }

    pub fn l1(&self, a: usize, b: usize) -> u32 {
        self.coords_of(a)
            .iter()
            .zip(self.coords_of(b))
            .map(|(x, y)| x.abs_diff(*y))
            .sum()
    }

    pub fn cells(&self) -> usize {
        self.member.len()
    }
}
