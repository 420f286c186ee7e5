//! The truncated cylinder `Ω_a = [0, a] × [0, b_eps]` in the meridian half-plane,
//! its boundary data, a symmetric finite-volume operator, the discrete energy and
//! level-set areas.
//!
//! Nodes sit at `r_i = i hr`, `z_j = j hz` and are stored with `j` fastest
//! (index `i (Nz + 1) + j`). The outer column `r = a` and the top row `z = b_eps`
//! carry Dirichlet data; the axis and the bottom are symmetry (Neumann) edges.

mod field;
mod io;
mod level;

pub use field::{Field, GradientStats};
pub(crate) use field::laplacian_row;
pub use io::{read_binary, write_binary, write_csv};
pub use level::{level_area, level_segments, Segment};

use crate::catenoid::{Catenoid, Convention};
use crate::error::{domain, input, Result};
use crate::potential::{Model, SubsolutionProfile};
use serde::Serialize;
use std::sync::Arc;

/// Geometry, stencil weights and boundary profile of one discretized cylinder.
#[derive(Debug)]
pub struct AxiGrid {
    pub dim: usize,
    pub a: f64,
    pub b_eps: f64,
    pub nr: usize,
    pub nz: usize,
    pub hr: f64,
    pub hz: f64,
    pub k: f64,
    pub eps: f64,
    /// Catenoid height at `r = a`; the boundary interface sits there.
    pub z_cat: f64,
    pub delta_eps: f64,
    pub catenoid: Catenoid,
    model: Arc<Model>,
    sub: SubsolutionProfile,
    /// Dual-cell weight `V_i ≈ r_i^{n-2}` (exact half-cell integrals at both ends).
    pub(crate) vol: Vec<f64>,
    /// Radial coupling to `i + 1` and `i - 1`, already divided by `V_i hr²`.
    pub(crate) cr_plus: Vec<f64>,
    pub(crate) cr_minus: Vec<f64>,
    pub(crate) r_face: Vec<f64>,
}

/// Summary of a grid for reports.
#[derive(Clone, Debug, Serialize)]
pub struct GridInfo {
    pub dim: usize,
    pub a: f64,
    pub b_eps: f64,
    pub nr: usize,
    pub nz: usize,
    pub hr: f64,
    pub hz: f64,
    pub k: f64,
    pub eps: f64,
    pub z_cat: f64,
    pub delta_eps: f64,
}

/// Dirichlet data on the outer column and the top row.
#[derive(Clone, Debug)]
pub struct BoundaryData {
    /// `ω(a, z_j)` for `j = 0..=Nz`.
    pub column: Vec<f64>,
    /// `ω(r_i, b_eps)` for `i = 0..=Nr`.
    pub row: Vec<f64>,
}

/// Builds the cylinder for dimension `n`, catenoid parameter `k` and potential `eps`.
pub fn build_domain(n: usize, a: f64, k: f64, eps: f64, nr: usize, nz: usize) -> Result<Arc<AxiGrid>> {
    let model = Arc::new(Model::new(eps)?);
    build_domain_with(model, n, a, k, nr, nz)
}

/// As [`build_domain`], sharing an existing potential model.
pub fn build_domain_with(model: Arc<Model>, n: usize, a: f64, k: f64, nr: usize, nz: usize) -> Result<Arc<AxiGrid>> {
    if n < 3 {
        return domain(format!("dimension must be at least 3, got {n}"));
    }
    if nr < 16 || nz < 16 {
        return input(format!("need at least 16 cells per direction, got {nr} x {nz}"));
    }
    if !(k > 0.0 && a.is_finite()) {
        return domain(format!("need k > 0 and finite a, got k={k}, a={a}"));
    }
    let catenoid = if n == 3 {
        if !(a > 2.0 * k) {
            return domain(format!("need a > 2k, got a={a}, k={k}"));
        }
        Catenoid::centered(3, k)?
    } else {
        let c = Catenoid::new(n, k, Convention::Asymptotic)?;
        if !(a > 2.0 * c.neck()) {
            return domain(format!("need a > 2 * neck = {}, got a={a}", 2.0 * c.neck()));
        }
        c
    };
    let eps = model.spec.eps;
    let z_cat = catenoid.eval(a)?;
    let sub = SubsolutionProfile::build(&model.profile, z_cat - eps)
        .map_err(|e| crate::Error::Domain(format!("boundary interface too low (z_cat = {z_cat}): {e}")))?;
    let delta_eps = sub.delta_eps;
    let b_eps = z_cat + 2.0 + delta_eps;
    let hr = a / nr as f64;
    let hz = b_eps / nz as f64;
    if hz > 0.25 * eps {
        log::warn!("hz = {hz:.4} exceeds eps/4 = {:.4}; the transition layer is under-resolved", 0.25 * eps);
    }
    if hz > 0.25 {
        return input(format!("hz = {hz} is too coarse for any transition layer"));
    }
    let m = (n - 2) as i32;
    let mp1 = (m + 1) as f64;
    let r_face: Vec<f64> = (0..nr).map(|i| ((i as f64 + 0.5) * hr).powi(m)).collect();
    let vol: Vec<f64> = (0..=nr)
        .map(|i| {
            if i == 0 {
                (0.5 * hr).powi(m + 1) / (mp1 * hr)
            } else if i == nr {
                (a.powi(m + 1) - (a - 0.5 * hr).powi(m + 1)) / (mp1 * hr)
            } else {
                (i as f64 * hr).powi(m)
            }
        })
        .collect();
    let h2 = hr * hr;
    let cr_plus = (0..nr).map(|i| r_face[i] / (vol[i] * h2)).collect();
    let cr_minus = (0..nr).map(|i| if i == 0 { 0.0 } else { r_face[i - 1] / (vol[i] * h2) }).collect();
    Ok(Arc::new(AxiGrid {
        dim: n,
        a,
        b_eps,
        nr,
        nz,
        hr,
        hz,
        k,
        eps,
        z_cat,
        delta_eps,
        catenoid,
        model,
        sub,
        vol,
        cr_plus,
        cr_minus,
        r_face,
    }))
}

impl AxiGrid {
    pub fn model(&self) -> &Arc<Model> {
        &self.model
    }

    pub fn subsolution(&self) -> &SubsolutionProfile {
        &self.sub
    }

    /// Same geometry and potential (possibly a different instance).
    pub fn same_as(&self, other: &AxiGrid) -> bool {
        std::ptr::eq(self, other)
            || (self.dim == other.dim
                && self.a == other.a
                && self.k == other.k
                && self.eps == other.eps
                && self.nr == other.nr
                && self.nz == other.nz)
    }

    pub fn info(&self) -> GridInfo {
        GridInfo {
            dim: self.dim,
            a: self.a,
            b_eps: self.b_eps,
            nr: self.nr,
            nz: self.nz,
            hr: self.hr,
            hz: self.hz,
            k: self.k,
            eps: self.eps,
            z_cat: self.z_cat,
            delta_eps: self.delta_eps,
        }
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.nz + 1) + j
    }

    pub fn len(&self) -> usize {
        (self.nr + 1) * (self.nz + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn r(&self, i: usize) -> f64 {
        if i == self.nr {
            self.a
        } else {
            i as f64 * self.hr
        }
    }

    #[inline]
    pub fn z(&self, j: usize) -> f64 {
        if j == self.nz {
            self.b_eps
        } else {
            j as f64 * self.hz
        }
    }

    /// Quadrature weight of node `(i, j)`: `V_i Z_j hr hz`.
    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        let zf = if j == 0 || j == self.nz { 0.5 } else { 1.0 };
        self.vol[i] * zf * self.hr * self.hz
    }

    /// Whether `(i, j)` is an unknown (not on the Dirichlet part of the boundary).
    #[inline]
    pub fn is_free(&self, i: usize, j: usize) -> bool {
        i < self.nr && j < self.nz
    }

    /// Largest diagonal entry of the discrete Laplacian.
    pub fn max_diag(&self) -> f64 {
        let radial = (0..self.nr).map(|i| self.cr_plus[i] + self.cr_minus[i]).fold(0.0, f64::max);
        radial + 2.0 / (self.hz * self.hz)
    }

    /// `ω` as a function of height.
    pub fn omega(&self, z: f64) -> f64 {
        let (lo, hi) = self.sub.domain();
        let x = (z - self.z_cat).clamp(lo, hi);
        self.sub.eval3_unchecked(x).0
    }

    pub fn boundary_omega(&self) -> BoundaryData {
        BoundaryData {
            column: (0..=self.nz).map(|j| self.omega(self.z(j))).collect(),
            row: vec![self.omega(self.b_eps); self.nr + 1],
        }
    }

    /// Effective time-step limit of the explicit scheme (maximum principle and
    /// energy decay): `1 / (max_diag + 1/eps²)`.
    pub fn explicit_dt_limit(&self) -> f64 {
        1.0 / (self.max_diag() + self.model.reaction.lipschitz())
    }
}
