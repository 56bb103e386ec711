//! Isoparametric shape functions and Gauss rules for QUAD4 and HEX8.

use serde::{Deserialize, Serialize};

const QUAD4_NODES: [[f64; 2]; 4] = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]];

const HEX8_NODES: [[f64; 3]; 8] = [
    [-1.0, -1.0, -1.0],
    [1.0, -1.0, -1.0],
    [1.0, 1.0, -1.0],
    [-1.0, 1.0, -1.0],
    [-1.0, -1.0, 1.0],
    [1.0, -1.0, 1.0],
    [1.0, 1.0, 1.0],
    [-1.0, 1.0, 1.0],
];

/// Abscissa of the two-point Gauss-Legendre rule (weights are 1).
pub const GAUSS_2: f64 = 0.577_350_269_189_625_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ElementKind {
    Quad4,
    Hex8,
}

impl ElementKind {
    pub fn node_count(self) -> usize {
        match self {
            ElementKind::Quad4 => 4,
            ElementKind::Hex8 => 8,
        }
    }

    pub fn dim(self) -> usize {
        match self {
            ElementKind::Quad4 => 2,
            ElementKind::Hex8 => 3,
        }
    }

    pub fn dof_count(self) -> usize {
        self.node_count() * self.dim()
    }

    /// Number of independent strain components (3 in plane stress, 6 in 3D).
    pub fn strain_count(self) -> usize {
        match self {
            ElementKind::Quad4 => 3,
            ElementKind::Hex8 => 6,
        }
    }

    /// Full 2x2 (2D) or 2x2x2 (3D) integration points in natural coordinates.
    /// Unused coordinates are zero; all weights are one.
    pub fn gauss_points(self) -> Vec<[f64; 3]> {
        let g = [-GAUSS_2, GAUSS_2];
        match self {
            ElementKind::Quad4 => {
                // counterclockwise, matching the node order
                vec![[g[0], g[0], 0.0], [g[1], g[0], 0.0], [g[1], g[1], 0.0], [g[0], g[1], 0.0]]
            }
            ElementKind::Hex8 => {
                let mut pts = Vec::with_capacity(8);
                for &z in &g {
                    for &(x, y) in &[(g[0], g[0]), (g[1], g[0]), (g[1], g[1]), (g[0], g[1])] {
                        pts.push([x, y, z]);
                    }
                }
                pts
            }
        }
    }

    pub fn shape_values(self, natural: [f64; 3]) -> Vec<f64> {
        match self {
            ElementKind::Quad4 => {
                QUAD4_NODES.iter().map(|n| 0.25 * (1.0 + n[0] * natural[0]) * (1.0 + n[1] * natural[1])).collect()
            }
            ElementKind::Hex8 => HEX8_NODES
                .iter()
                .map(|n| 0.125 * (1.0 + n[0] * natural[0]) * (1.0 + n[1] * natural[1]) * (1.0 + n[2] * natural[2]))
                .collect(),
        }
    }

    /// Derivatives of the shape functions with respect to natural coordinates.
    fn natural_gradients(self, natural: [f64; 3]) -> Vec<[f64; 3]> {
        let [xi, eta, zeta] = natural;
        match self {
            ElementKind::Quad4 => QUAD4_NODES
                .iter()
                .map(|n| [0.25 * n[0] * (1.0 + n[1] * eta), 0.25 * n[1] * (1.0 + n[0] * xi), 0.0])
                .collect(),
            ElementKind::Hex8 => HEX8_NODES
                .iter()
                .map(|n| {
                    let a = 1.0 + n[0] * xi;
                    let b = 1.0 + n[1] * eta;
                    let c = 1.0 + n[2] * zeta;
                    [0.125 * n[0] * b * c, 0.125 * n[1] * a * c, 0.125 * n[2] * a * b]
                })
                .collect(),
        }
    }
}

/// Shape-function gradients in physical coordinates at one natural point.
#[derive(Debug, Clone)]
pub struct PhysicalGradients {
    pub det_j: f64,
    /// `dn[a][i]` = dN_a / dx_i
    pub dn: Vec<[f64; 3]>,
}

/// Maps natural-coordinate derivatives to physical ones. `coords` holds the
/// element's node coordinates in local node order.
///
/// Returns the Jacobian determinant even when it is non-positive; callers
/// decide whether that is an error. The gradients are meaningless in that case.
pub fn physical_gradients(kind: ElementKind, coords: &[[f64; 3]], natural: [f64; 3]) -> PhysicalGradients {
    let dnat = kind.natural_gradients(natural);
    let dim = kind.dim();
    let mut j = [[0.0f64; 3]; 3];
    for (g, x) in dnat.iter().zip(coords) {
        for r in 0..dim {
            for c in 0..dim {
                j[r][c] += g[r] * x[c];
            }
        }
    }
    let (det, inv) = match dim {
        2 => {
            let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
            let inv = [[j[1][1] / det, -j[0][1] / det, 0.0], [-j[1][0] / det, j[0][0] / det, 0.0], [0.0, 0.0, 0.0]];
            (det, inv)
        }
        _ => {
            let det = j[0][0] * (j[1][1] * j[2][2] - j[1][2] * j[2][1])
                - j[0][1] * (j[1][0] * j[2][2] - j[1][2] * j[2][0])
                + j[0][2] * (j[1][0] * j[2][1] - j[1][1] * j[2][0]);
            let mut inv = [[0.0; 3]; 3];
            inv[0][0] = (j[1][1] * j[2][2] - j[1][2] * j[2][1]) / det;
            inv[0][1] = (j[0][2] * j[2][1] - j[0][1] * j[2][2]) / det;
            inv[0][2] = (j[0][1] * j[1][2] - j[0][2] * j[1][1]) / det;
            inv[1][0] = (j[1][2] * j[2][0] - j[1][0] * j[2][2]) / det;
            inv[1][1] = (j[0][0] * j[2][2] - j[0][2] * j[2][0]) / det;
            inv[1][2] = (j[0][2] * j[1][0] - j[0][0] * j[1][2]) / det;
            inv[2][0] = (j[1][0] * j[2][1] - j[1][1] * j[2][0]) / det;
            inv[2][1] = (j[0][1] * j[2][0] - j[0][0] * j[2][1]) / det;
            inv[2][2] = (j[0][0] * j[1][1] - j[0][1] * j[1][0]) / det;
            (det, inv)
        }
    };
    // dN/dx_i = sum_r invJ[i][r] dN/dxi_r
    let dn = dnat
        .iter()
        .map(|g| {
            let mut out = [0.0; 3];
            for (i, o) in out.iter_mut().enumerate().take(dim) {
                *o = (0..dim).map(|r| inv[i][r] * g[r]).sum();
            }
            out
        })
        .collect();
    PhysicalGradients { det_j: det, dn }
}

/// Strain-displacement matrix rows at a point, row-major `strain_count x dof_count`.
///
/// Rows are (exx, eyy, gxy) in 2D and (exx, eyy, ezz, gyz, gxz, gxy) in 3D,
/// with engineering shear strains.
pub fn strain_displacement(kind: ElementKind, dn: &[[f64; 3]]) -> Vec<f64> {
    let ndof = kind.dof_count();
    let mut b = vec![0.0; kind.strain_count() * ndof];
    match kind {
        ElementKind::Quad4 => {
            for (a, g) in dn.iter().enumerate() {
                let (u, v) = (2 * a, 2 * a + 1);
                b[u] = g[0];
                b[ndof + v] = g[1];
                b[2 * ndof + u] = g[1];
                b[2 * ndof + v] = g[0];
            }
        }
        ElementKind::Hex8 => {
            for (a, g) in dn.iter().enumerate() {
                let (u, v, w) = (3 * a, 3 * a + 1, 3 * a + 2);
                b[u] = g[0];
                b[ndof + v] = g[1];
                b[2 * ndof + w] = g[2];
                b[3 * ndof + v] = g[2];
                b[3 * ndof + w] = g[1];
                b[4 * ndof + u] = g[2];
                b[4 * ndof + w] = g[0];
                b[5 * ndof + u] = g[1];
                b[5 * ndof + v] = g[0];
            }
        }
    }
    b
}

/// Map a natural point to physical coordinates.
pub fn interpolate_position(kind: ElementKind, coords: &[[f64; 3]], natural: [f64; 3]) -> [f64; 3] {
    let n = kind.shape_values(natural);
    let mut x = [0.0; 3];
    for (w, c) in n.iter().zip(coords) {
        for i in 0..3 {
            x[i] += w * c[i];
        }
    }
    x
}
