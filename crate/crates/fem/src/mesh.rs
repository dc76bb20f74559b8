use crate::element::{GaussPoint, GAUSS};
use crate::{FemError, Result};
use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub struct Mesh {
    pub nodes: Vec<[f64; 3]>,
    pub elements: Vec<[usize; 8]>,
    /// Prescribed displacement per global dof at full load.
    pub dirichlet: BTreeMap<usize, f64>,
}

impl Mesh {
    /// Structured `nx × ny × nz` hex grid, `map` taking the unit cube onto
    /// the domain.
    pub fn structured(n: [usize; 3], map: impl Fn(f64, f64, f64) -> [f64; 3]) -> Self {
        let [nx, ny, nz] = n;
        let id = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);
        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1) * (nz + 1));
        for k in 0..=nz {
            for j in 0..=ny {
                for i in 0..=nx {
                    nodes.push(map(i as f64 / nx as f64, j as f64 / ny as f64, k as f64 / nz as f64));
                }
            }
        }
        let mut elements = Vec::with_capacity(nx * ny * nz);
        for k in 0..nz {
            for j in 0..ny {
                for i in 0..nx {
                    elements.push([
                        id(i, j, k),
                        id(i + 1, j, k),
                        id(i + 1, j + 1, k),
                        id(i, j + 1, k),
                        id(i, j, k + 1),
                        id(i + 1, j, k + 1),
                        id(i + 1, j + 1, k + 1),
                        id(i, j + 1, k + 1),
                    ]);
                }
            }
        }
        Mesh { nodes, elements, dirichlet: BTreeMap::new() }
    }

    pub fn n_dofs(&self) -> usize {
        3 * self.nodes.len()
    }

    /// Prescribe component `dir` of every node selected by `pick`.
    pub fn fix(&mut self, pick: impl Fn(&[f64; 3]) -> bool, dir: usize, value: f64) {
        for (i, x) in self.nodes.iter().enumerate() {
            if pick(x) {
                self.dirichlet.insert(3 * i + dir, value);
            }
        }
    }

    pub fn element_coords(&self, e: usize) -> [[f64; 3]; 8] {
        self.elements[e].map(|n| self.nodes[n])
    }

    /// Integration data of every element, checking connectivity and
    /// orientation.
    pub fn gauss_points(&self) -> Result<Vec<[GaussPoint; 8]>> {
        let n = self.nodes.len();
        if let Some(&d) = self.dirichlet.keys().next_back() {
            if d >= self.n_dofs() {
                return Err(FemError::InvalidMesh(format!("prescribed dof {d} out of range")));
            }
        }
        self.elements
            .iter()
            .enumerate()
            .map(|(e, conn)| {
                if conn.iter().any(|&i| i >= n) {
                    return Err(FemError::InvalidMesh(format!("element {e} references a missing node")));
                }
                let c = self.element_coords(e);
                let gps: Option<Vec<GaussPoint>> = GAUSS.iter().map(|xi| GaussPoint::new(&c, *xi)).collect();
                let gps = gps.ok_or_else(|| FemError::InvalidMesh(format!("non-positive Jacobian in element {e}")))?;
                Ok(gps.try_into().expect("eight Gauss points"))
            })
            .collect()
    }
}

const TOL: f64 = 1e-9;

/// Unit cube on a vertical roller support, pinned at the origin against
/// rigid motion, pushed down by `u0` on the top-face quarter
/// `x, y ≤ 1/2`.
pub fn punch_mesh(n: usize, u0: f64) -> Mesh {
    let mut m = Mesh::structured([n, n, n], |x, y, z| [x, y, z]);
    m.fix(|p| p[2].abs() < TOL, 2, 0.0);
    m.fix(|p| p.iter().all(|v| v.abs() < TOL), 0, 0.0);
    m.fix(|p| p.iter().all(|v| v.abs() < TOL), 1, 0.0);
    m.fix(|p| (p[0] - 1.0).abs() < TOL && p[1].abs() < TOL && p[2].abs() < TOL, 1, 0.0);
    m.fix(|p| (p[2] - 1.0).abs() < TOL && p[0] <= 0.5 + TOL && p[1] <= 0.5 + TOL, 2, -u0);
    m
}

/// Tapered panel with corners (0,0), (48,44), (48,60), (0,44) and unit
/// thickness, clamped on the left and sheared by `u0` on the right.
pub fn cook_mesh(nx: usize, ny: usize, u0: f64) -> Mesh {
    let mut m = Mesh::structured([nx, ny, 1], |s, t, z| {
        let x = 48.0 * s;
        let lo = 44.0 * s;
        let hi = 44.0 + 16.0 * s;
        [x, lo + t * (hi - lo), z]
    });
    for d in 0..3 {
        m.fix(|p| p[0].abs() < TOL, d, 0.0);
    }
    m.fix(|p| (p[0] - 48.0).abs() < TOL, 1, u0);
    m
}
