use super::AxiGrid;
use crate::error::{input, Result};
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

/// Nodal values on an [`AxiGrid`].
#[derive(Clone, Debug)]
pub struct Field {
    grid: Arc<AxiGrid>,
    pub values: Vec<f64>,
}

/// Extremes of the gradient over a node set.
#[derive(Clone, Copy, Debug, Default, Serialize)]
pub struct GradientStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Field {
    pub fn new(grid: Arc<AxiGrid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return input(format!("expected {} values, got {}", grid.len(), values.len()));
        }
        Ok(Field { grid, values })
    }

    /// Samples `f(r, z)` at every node, boundary included.
    pub fn from_fn(grid: &Arc<AxiGrid>, f: impl Fn(f64, f64) -> f64 + Sync) -> Self {
        let s = grid.nz + 1;
        let mut values = vec![0.0; grid.len()];
        values.par_chunks_mut(s).enumerate().for_each(|(i, row)| {
            let r = grid.r(i);
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(r, grid.z(j));
            }
        });
        Field { grid: grid.clone(), values }
    }

    pub fn constant(grid: &Arc<AxiGrid>, c: f64) -> Self {
        Field { grid: grid.clone(), values: vec![c; grid.len()] }
    }

    /// `u(r, z) = ω(z)`; consistent with the boundary data.
    pub fn omega_extension(grid: &Arc<AxiGrid>) -> Self {
        let col: Vec<f64> = (0..=grid.nz).map(|j| grid.omega(grid.z(j))).collect();
        Field::from_fn(grid, |_, z| {
            let j = ((z / grid.hz).round() as usize).min(grid.nz);
            col[j]
        })
    }

    /// `H^{-1}(u)` at every node, clamped to `±(t_eps + 30 eps)` in the flat tails.
    pub fn profile_coordinate(&self) -> Vec<f64> {
        let prof = &self.grid.model().profile;
        let cap = prof.t_eps + 30.0 * prof.eps;
        self.values
            .par_iter()
            .map(|&v| if v >= 1.0 { cap } else if v <= -1.0 { -cap } else { prof.inverse(v).clamp(-cap, cap) })
            .collect()
    }

    /// Transfers the field to another discretization of the same cylinder by
    /// bilinear interpolation of the profile coordinate `H^{-1}(u)`, which stays
    /// smooth across the layer where `u` itself saturates.
    pub fn resample(&self, target: &Arc<AxiGrid>) -> Result<Field> {
        let g = &self.grid;
        if g.dim != target.dim || g.a != target.a || g.k != target.k || g.eps != target.eps {
            return input("resampling needs the same dimension, radius, k and eps");
        }
        let coord = Field { grid: g.clone(), values: self.profile_coordinate() };
        let tprof = &target.model().profile;
        let mut out = Field::from_fn(target, |r, z| tprof.value(coord.interp(r, z)));
        out.impose_boundary();
        Ok(out)
    }

    pub fn grid(&self) -> &Arc<AxiGrid> {
        &self.grid
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    /// Overwrites the Dirichlet nodes with `ω`.
    pub fn impose_boundary(&mut self) {
        let g = self.grid.clone();
        let bd = g.boundary_omega();
        for j in 0..=g.nz {
            self.values[g.idx(g.nr, j)] = bd.column[j];
        }
        for i in 0..=g.nr {
            self.values[g.idx(i, g.nz)] = bd.row[i];
        }
    }

    /// Largest deviation of the Dirichlet nodes from `ω`.
    pub fn boundary_mismatch(&self) -> f64 {
        let g = &self.grid;
        let bd = g.boundary_omega();
        let col = (0..=g.nz).map(|j| (self.at(g.nr, j) - bd.column[j]).abs());
        let row = (0..=g.nr).map(|i| (self.at(i, g.nz) - bd.row[i]).abs());
        col.chain(row).fold(0.0, f64::max)
    }

    /// Discrete Laplacian at the free nodes (zero on Dirichlet nodes).
    pub fn laplacian(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.values.len()];
        let g = &*self.grid;
        out.par_chunks_mut(g.nz + 1).enumerate().for_each(|(i, row)| {
            if i < g.nr {
                laplacian_row(g, &self.values, i, row);
            }
        });
        out
    }

    /// `-Δu + F_eps'(u)/2` at the free nodes (zero on Dirichlet nodes).
    pub fn operator(&self) -> Vec<f64> {
        let react = &self.grid.model().reaction;
        let mut out = self.laplacian();
        let g = &*self.grid;
        out.par_chunks_mut(g.nz + 1).enumerate().for_each(|(i, row)| {
            if i < g.nr {
                let u = &self.values[i * (g.nz + 1)..(i + 1) * (g.nz + 1)];
                for j in 0..g.nz {
                    row[j] = react.half_deriv(u[j]) - row[j];
                }
            }
        });
        out
    }

    /// `∫ |Δu - F_eps'(u)/2|² r^{n-2}` over the free nodes.
    pub fn residual_norm(&self) -> f64 {
        let op = self.operator();
        let g = &self.grid;
        let mut acc = 0.0;
        for i in 0..g.nr {
            for j in 0..g.nz {
                let v = op[g.idx(i, j)];
                acc += g.weight(i, j) * v * v;
            }
        }
        acc
    }

    /// Discrete energy `∫ (|∇u|² + F_eps(u)) r^{n-2} dr dz`: edge differences for the
    /// gradient, nodal quadrature for the potential. Its gradient with respect to
    /// `u_ij` is `2 weight(i, j) (-Δu + F'/2)_ij`.
    pub fn energy(&self) -> f64 {
        let g = &*self.grid;
        let spec = &g.model().spec;
        let s = g.nz + 1;
        let u = &self.values;
        // rows are summed in order so the result does not depend on the thread count
        let rows: Vec<f64> = (0..=g.nr)
            .into_par_iter()
            .map(|i| {
                let row = &u[i * s..(i + 1) * s];
                let mut acc = 0.0;
                for j in 0..=g.nz {
                    let zf = if j == 0 || j == g.nz { 0.5 } else { 1.0 };
                    if i < g.nr {
                        let d = u[(i + 1) * s + j] - row[j];
                        acc += g.r_face[i] * zf * g.hz * d * d / g.hr;
                    }
                    if j < g.nz {
                        let d = row[j + 1] - row[j];
                        acc += g.vol[i] * g.hr * d * d / g.hz;
                    }
                    acc += g.vol[i] * zf * g.hr * g.hz * spec.value(row[j].clamp(-1.0, 1.0));
                }
                acc
            })
            .collect();
        rows.iter().sum()
    }

    /// Central-difference gradient `(∂_r u, ∂_z u)` at a node, one-sided on the edges
    /// that are not symmetry lines.
    pub fn gradient_at(&self, i: usize, j: usize) -> (f64, f64) {
        let g = &self.grid;
        let ur = if i == 0 {
            0.0
        } else if i == g.nr {
            (self.at(i, j) - self.at(i - 1, j)) / g.hr
        } else {
            (self.at(i + 1, j) - self.at(i - 1, j)) / (2.0 * g.hr)
        };
        let uz = if j == 0 {
            0.0
        } else if j == g.nz {
            (self.at(i, j) - self.at(i, j - 1)) / g.hz
        } else {
            (self.at(i, j + 1) - self.at(i, j - 1)) / (2.0 * g.hz)
        };
        (ur, uz)
    }

    /// Gradient magnitude at the midpoint of cell `(i, j)` from its four corners.
    pub fn cell_gradient(&self, i: usize, j: usize) -> f64 {
        let g = &self.grid;
        let (a, b, c, d) = (self.at(i, j), self.at(i + 1, j), self.at(i, j + 1), self.at(i + 1, j + 1));
        let ur = 0.5 * ((b - a) + (d - c)) / g.hr;
        let uz = 0.5 * ((c - a) + (d - b)) / g.hz;
        ur.hypot(uz)
    }

    /// Statistics of the cell-centred gradient over cells whose four corners satisfy
    /// `|u| < level`.
    pub fn gradient_stats_inside(&self, level: f64) -> GradientStats {
        let g = &self.grid;
        let mut st = GradientStats { mean: 0.0, min: f64::INFINITY, max: 0.0, count: 0 };
        for i in 0..g.nr {
            for j in 0..g.nz {
                let corners = [self.at(i, j), self.at(i + 1, j), self.at(i, j + 1), self.at(i + 1, j + 1)];
                if corners.iter().all(|v| v.abs() < level) {
                    let m = self.cell_gradient(i, j);
                    st.mean += m;
                    st.min = st.min.min(m);
                    st.max = st.max.max(m);
                    st.count += 1;
                }
            }
        }
        if st.count > 0 {
            st.mean /= st.count as f64;
        } else {
            st.min = 0.0;
        }
        st
    }

    /// Largest cell gradient over cells none of whose corners is a Dirichlet node.
    pub fn interior_max_gradient(&self) -> f64 {
        let g = &self.grid;
        let mut m = 0.0f64;
        for i in 0..g.nr.saturating_sub(1) {
            for j in 0..g.nz.saturating_sub(1) {
                m = m.max(self.cell_gradient(i, j));
            }
        }
        m
    }

    /// Bilinear interpolation; `(r, z)` is clamped into the cylinder.
    pub fn interp(&self, r: f64, z: f64) -> f64 {
        let g = &self.grid;
        let x = (r / g.hr).clamp(0.0, g.nr as f64);
        let y = (z / g.hz).clamp(0.0, g.nz as f64);
        let i = (x as usize).min(g.nr - 1);
        let j = (y as usize).min(g.nz - 1);
        let (tx, ty) = (x - i as f64, y - j as f64);
        let (a, b, c, d) = (self.at(i, j), self.at(i + 1, j), self.at(i, j + 1), self.at(i + 1, j + 1));
        (1.0 - ty) * ((1.0 - tx) * a + tx * b) + ty * ((1.0 - tx) * c + tx * d)
    }

    /// `min (other - self)` over all nodes.
    pub fn min_gap_to(&self, other: &Field) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| b - a).fold(f64::INFINITY, f64::min)
    }

    pub fn sup_distance(&self, other: &Field) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (b - a).abs()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `(min ∂_z u, max ∂_r u)` from one-sided differences over interior edges.
    pub fn monotonicity(&self) -> (f64, f64) {
        let g = &self.grid;
        let mut min_z = f64::INFINITY;
        let mut max_r = f64::NEG_INFINITY;
        for i in 0..=g.nr {
            for j in 0..=g.nz {
                if j < g.nz {
                    min_z = min_z.min((self.at(i, j + 1) - self.at(i, j)) / g.hz);
                }
                if i < g.nr {
                    max_r = max_r.max((self.at(i + 1, j) - self.at(i, j)) / g.hr);
                }
            }
        }
        (min_z, max_r)
    }
}

/// Laplacian of row `i < Nr` into `out[0..Nz]`.
#[inline]
pub(crate) fn laplacian_row(g: &AxiGrid, u: &[f64], i: usize, out: &mut [f64]) {
    let s = g.nz + 1;
    let c = &u[i * s..(i + 1) * s];
    let up = &u[(i + 1) * s..(i + 2) * s];
    let cp = g.cr_plus[i];
    let iz2 = 1.0 / (g.hz * g.hz);
    if i == 0 {
        for j in 0..g.nz {
            out[j] = cp * (up[j] - c[j]);
        }
    } else {
        let dn = &u[(i - 1) * s..i * s];
        let cm = g.cr_minus[i];
        for j in 0..g.nz {
            out[j] = cp * (up[j] - c[j]) + cm * (dn[j] - c[j]);
        }
    }
    out[0] += 2.0 * iz2 * (c[1] - c[0]);
    for j in 1..g.nz {
        out[j] += iz2 * (c[j + 1] - 2.0 * c[j] + c[j - 1]);
    }
}
