use crate::error::{Error, Result};
use crate::geometry::{Face, Mesh};
use serde::{Deserialize, Serialize};

/// How the fixed face is held.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Support {
    /// Every displacement component pinned on the face.
    #[default]
    Clamped,
    /// Normal component pinned on the face; the remaining rigid-body modes
    /// are removed at one or two face nodes, leaving lateral contraction free.
    Roller,
}

/// Prescribed displacements, as a sorted list of `(dof, value)` pairs with
/// `dof = node * dim + component`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryConditions {
    prescribed: Vec<(usize, f64)>,
}

impl BoundaryConditions {
    /// Displacement-controlled tension: `fixed_face` held per `support`,
    /// `loaded_face` displaced by `u_applied` along its outward axis (other
    /// components free).
    pub fn tension(
        mesh: &Mesh,
        fixed_face: Face,
        support: Support,
        loaded_face: Face,
        u_applied: f64,
    ) -> Result<BoundaryConditions> {
        if !u_applied.is_finite() {
            return Err(Error::invalid(format!("applied displacement must be finite, got {u_applied}")));
        }
        let dim = mesh.dim();
        let fixed = mesh.face_nodes(fixed_face);
        let loaded = mesh.face_nodes(loaded_face);
        if fixed.is_empty() || loaded.is_empty() {
            return Err(Error::invalid(format!(
                "faces {fixed_face:?}/{loaded_face:?} must both select nodes of a {dim}D mesh"
            )));
        }
        if fixed.iter().any(|n| loaded.binary_search(n).is_ok()) {
            return Err(Error::invalid("fixed and loaded faces share nodes"));
        }
        let mut entries = Vec::new();
        let (axis, _) = fixed_face.axis();
        match support {
            Support::Clamped => {
                for &n in &fixed {
                    entries.extend((0..dim).map(|c| (n * dim + c, 0.0)));
                }
            }
            Support::Roller => {
                for &n in &fixed {
                    entries.push((n * dim + axis, 0.0));
                }
                let nodes = mesh.nodes();
                let lexi = |a: &&usize, b: &&usize| {
                    let (p, q) = (nodes[**a], nodes[**b]);
                    p[2].total_cmp(&q[2]).then(p[1].total_cmp(&q[1])).then(p[0].total_cmp(&q[0]))
                };
                let anchor = *fixed.iter().min_by(lexi).unwrap();
                entries.extend((0..dim).filter(|&c| c != axis).map(|c| (anchor * dim + c, 0.0)));
                if dim == 3 {
                    // block the spin about the face normal
                    let b = (axis + 1) % 3;
                    let c = (axis + 2) % 3;
                    let c0 = nodes[anchor][c];
                    let far = *fixed
                        .iter()
                        .filter(|&&n| nodes[n][c] == c0)
                        .max_by(|&&m, &&n| nodes[m][b].total_cmp(&nodes[n][b]).then(n.cmp(&m)))
                        .unwrap();
                    if far == anchor {
                        return Err(Error::invalid("roller face too small to remove rigid rotation"));
                    }
                    entries.push((far * dim + c, 0.0));
                }
            }
        }
        let (load_axis, upper) = loaded_face.axis();
        let signed = if upper { u_applied } else { -u_applied };
        entries.extend(loaded.iter().map(|&n| (n * dim + load_axis, signed)));
        BoundaryConditions::from_dofs(mesh, entries)
    }

    /// Impose `u = grad · x` on the given nodes (the rows of `grad` index the
    /// displacement component).
    pub fn affine(mesh: &Mesh, grad: [[f64; 3]; 3], nodes: &[usize]) -> Result<BoundaryConditions> {
        let dim = mesh.dim();
        let pts = mesh.nodes();
        let mut entries = Vec::with_capacity(nodes.len() * dim);
        for &n in nodes {
            if n >= pts.len() {
                return Err(Error::invalid(format!("node {n} out of range")));
            }
            for c in 0..dim {
                let v: f64 = (0..dim).map(|j| grad[c][j] * pts[n][j]).sum();
                entries.push((n * dim + c, v));
            }
        }
        BoundaryConditions::from_dofs(mesh, entries)
    }

    /// Build from raw `(dof, value)` pairs. A dof listed twice must carry the
    /// same value.
    pub fn from_dofs(mesh: &Mesh, mut entries: Vec<(usize, f64)>) -> Result<BoundaryConditions> {
        let ndof = mesh.node_count() * mesh.dim();
        entries.sort_by_key(|e| e.0);
        let mut out: Vec<(usize, f64)> = Vec::with_capacity(entries.len());
        for (dof, v) in entries {
            if dof >= ndof || !v.is_finite() {
                return Err(Error::invalid(format!("bad prescribed dof {dof} = {v}")));
            }
            match out.last() {
                Some(&(d, prev)) if d == dof => {
                    if prev != v {
                        return Err(Error::invalid(format!("dof {dof} prescribed twice ({prev} and {v})")));
                    }
                }
                _ => out.push((dof, v)),
            }
        }
        if out.is_empty() {
            return Err(Error::invalid("no prescribed displacements"));
        }
        Ok(BoundaryConditions { prescribed: out })
    }

    pub fn prescribed(&self) -> &[(usize, f64)] {
        &self.prescribed
    }

    pub fn value(&self, dof: usize) -> Option<f64> {
        self.prescribed.binary_search_by_key(&dof, |e| e.0).ok().map(|i| self.prescribed[i].1)
    }
}
