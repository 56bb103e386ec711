use super::bc::BoundaryConditions;
use super::element::element_stiffness;
use super::material::{validate_moduli, validate_poisson};
use super::skyline::{reverse_cuthill_mckee, SkylineLayout};
use super::sparse::node_adjacency;
use super::{DisplacementField, StrainField, Surface};
use crate::error::{Error, Result};
use crate::geometry::{Mesh, PatchMap};
use crate::shape::{physical_gradients, strain_displacement, ElementKind, GAUSS_2};

/// Relative equilibrium residual a solve must reach.
pub const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy)]
enum Slot {
    Free(usize),
    Fixed(usize),
}

/// A mesh, patch layout and set of boundary conditions prepared for repeated
/// solves with different moduli.
///
/// Unit-modulus element matrices, the equation ordering and the profile of
/// the reduced stiffness are computed once; each [`ForwardModel::solve`] then
/// only scales, scatters and factors. Elements are always visited in index
/// order, so results do not depend on how many solves run concurrently.
#[derive(Debug, Clone)]
pub struct ForwardModel {
    mesh: Mesh,
    patch_map: PatchMap,
    poisson_ratio: f64,
    unit_stiffness: Vec<f64>,
    slots: Vec<Slot>,
    prescribed: Vec<f64>,
    free_dofs: Vec<usize>,
    layout: SkylineLayout,
}

impl ForwardModel {
    pub fn new(mesh: &Mesh, patch_map: &PatchMap, bcs: &BoundaryConditions, poisson_ratio: f64) -> Result<Self> {
        validate_poisson(poisson_ratio)?;
        if patch_map.element_count() != mesh.element_count() {
            return Err(Error::invalid(format!(
                "patch map covers {} elements, mesh has {}",
                patch_map.element_count(),
                mesh.element_count()
            )));
        }
        let kind = mesh.kind();
        let dim = mesh.dim();
        let ndof_e = kind.dof_count();
        let thickness = (kind == ElementKind::Quad4).then(|| mesh.thickness());

        let mut unit_stiffness = Vec::with_capacity(mesh.element_count() * ndof_e * ndof_e);
        for e in 0..mesh.element_count() {
            let k =
                element_stiffness(kind, &mesh.element_coords(e), 1.0, poisson_ratio, thickness).map_err(
                    |err| match err {
                        Error::DegenerateElement { point, det, .. } => {
                            Error::DegenerateElement { element: e, point, det }
                        }
                        other => other,
                    },
                )?;
            // row-major
            for a in 0..ndof_e {
                for b in 0..ndof_e {
                    unit_stiffness.push(k[(a, b)]);
                }
            }
        }

        // equation numbering: RCM over nodes, free dofs in that order
        let ndof = mesh.node_count() * dim;
        let mut dof_slot = vec![None; ndof];
        let mut prescribed = Vec::with_capacity(bcs.prescribed().len());
        for &(dof, v) in bcs.prescribed() {
            if dof >= ndof {
                return Err(Error::invalid(format!("prescribed dof {dof} out of range")));
            }
            dof_slot[dof] = Some(Slot::Fixed(prescribed.len()));
            prescribed.push(v);
        }
        let mut free_dofs = Vec::with_capacity(ndof - prescribed.len());
        for node in reverse_cuthill_mckee(&node_adjacency(mesh)) {
            for c in 0..dim {
                let dof = node * dim + c;
                if dof_slot[dof].is_none() {
                    dof_slot[dof] = Some(Slot::Free(free_dofs.len()));
                    free_dofs.push(dof);
                }
            }
        }

        let mut slots = Vec::with_capacity(mesh.element_count() * ndof_e);
        let mut first: Vec<usize> = (0..free_dofs.len()).collect();
        for conn in mesh.elements() {
            let start = slots.len();
            for &n in conn {
                for c in 0..dim {
                    slots.push(dof_slot[n * dim + c].expect("every dof is numbered"));
                }
            }
            let lowest = slots[start..]
                .iter()
                .filter_map(|s| match s {
                    Slot::Free(i) => Some(*i),
                    Slot::Fixed(_) => None,
                })
                .min();
            if let Some(lowest) = lowest {
                for s in &slots[start..] {
                    if let Slot::Free(i) = *s {
                        first[i] = first[i].min(lowest);
                    }
                }
            }
        }

        Ok(ForwardModel {
            mesh: mesh.clone(),
            patch_map: patch_map.clone(),
            poisson_ratio,
            unit_stiffness,
            slots,
            prescribed,
            free_dofs,
            layout: SkylineLayout::new(first),
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn patch_map(&self) -> &PatchMap {
        &self.patch_map
    }

    pub fn poisson_ratio(&self) -> f64 {
        self.poisson_ratio
    }

    pub fn free_dof_count(&self) -> usize {
        self.free_dofs.len()
    }

    fn check_moduli(&self, moduli: &[f64]) -> Result<()> {
        if moduli.len() != self.patch_map.patch_count() {
            return Err(Error::invalid(format!(
                "design has {} entries but the patch map has {} patches",
                moduli.len(),
                self.patch_map.patch_count()
            )));
        }
        validate_moduli(moduli)
    }

    /// Static solve with prescribed displacements eliminated from the system.
    pub fn solve(&self, moduli: &[f64]) -> Result<DisplacementField> {
        self.check_moduli(moduli)?;
        let n = self.mesh.kind().dof_count();
        let nfree = self.free_dofs.len();
        let mut values = vec![0.0; self.layout.storage()];
        let mut rhs = vec![0.0; nfree];
        for e in 0..self.mesh.element_count() {
            let modulus = moduli[self.patch_map.patch_of(e)];
            let k = &self.unit_stiffness[e * n * n..(e + 1) * n * n];
            let slots = &self.slots[e * n..(e + 1) * n];
            for (a, sa) in slots.iter().enumerate() {
                let Slot::Free(i) = *sa else { continue };
                for (b, sb) in slots.iter().enumerate() {
                    let kab = modulus * k[a * n + b];
                    match *sb {
                        Slot::Free(j) if j <= i => values[self.layout.index(i, j)] += kab,
                        Slot::Free(_) => {}
                        Slot::Fixed(p) => rhs[i] -= kab * self.prescribed[p],
                    }
                }
            }
        }

        let rhs_norm = norm(&rhs);
        let mut x = rhs;
        if nfree > 0 {
            self.layout.factor(&mut values)?;
            self.layout.solve(&values, &mut x);
        }

        let dim = self.mesh.dim();
        let mut u = vec![0.0; self.mesh.node_count() * dim];
        for (i, &dof) in self.free_dofs.iter().enumerate() {
            u[dof] = x[i];
        }
        for (e_slot, slot) in self.slots.iter().enumerate() {
            if let Slot::Fixed(p) = *slot {
                let e = e_slot / n;
                let a = e_slot % n;
                let dof = self.mesh.element(e)[a / dim] * dim + a % dim;
                u[dof] = self.prescribed[p];
            }
        }
        let field = DisplacementField { dim, values: u };

        if rhs_norm > 0.0 {
            let f = self.internal_forces(moduli, &field)?;
            let residual = norm(&self.free_dofs.iter().map(|&d| f[d]).collect::<Vec<_>>()) / rhs_norm;
            if !(residual < RESIDUAL_TOL) {
                return Err(Error::NotConverged { residual });
            }
        }
        Ok(field)
    }

    /// Internal nodal forces `K u` for every dof; on prescribed dofs these are
    /// the support reactions.
    pub fn internal_forces(&self, moduli: &[f64], u: &DisplacementField) -> Result<Vec<f64>> {
        self.check_moduli(moduli)?;
        let dim = self.mesh.dim();
        let n = self.mesh.kind().dof_count();
        let mut f = vec![0.0; u.values.len()];
        let mut ue = vec![0.0; n];
        for (e, conn) in self.mesh.elements().enumerate() {
            for (a, &node) in conn.iter().enumerate() {
                for c in 0..dim {
                    ue[a * dim + c] = u.values[node * dim + c];
                }
            }
            let modulus = moduli[self.patch_map.patch_of(e)];
            let k = &self.unit_stiffness[e * n * n..(e + 1) * n * n];
            for a in 0..n {
                let fa: f64 = k[a * n..(a + 1) * n].iter().zip(&ue).map(|(kk, v)| kk * v).sum();
                f[conn[a / dim] * dim + a % dim] += modulus * fa;
            }
        }
        Ok(f)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Precomputed strain-displacement rows at the surface sample points.
#[derive(Debug, Clone)]
pub struct SurfaceSampler {
    points: Vec<[f64; 2]>,
    elements: Vec<usize>,
    /// three rows (exx, eyy, gxy) of `dof_count` entries per point
    rows: Vec<f64>,
    dofs_per_element: usize,
}

impl SurfaceSampler {
    pub fn new(mesh: &Mesh, surface: Surface) -> Result<SurfaceSampler> {
        let kind = mesh.kind();
        let (lo, hi) = mesh.bounds();
        let tol = 1e-9 * (hi[2] - lo[2]).abs().max(1.0);
        let candidates: Vec<(usize, f64)> = match (kind, surface) {
            (ElementKind::Quad4, Surface::Midplane) => (0..mesh.element_count()).map(|e| (e, 0.0)).collect(),
            (ElementKind::Hex8, Surface::Front | Surface::Back) => {
                let (local, zeta, target) = match surface {
                    Surface::Front => (4..8, 1.0, hi[2]),
                    _ => (0..4, -1.0, lo[2]),
                };
                (0..mesh.element_count())
                    .filter(|&e| {
                        let conn = mesh.element(e);
                        local.clone().all(|a| (mesh.nodes()[conn[a]][2] - target).abs() <= tol)
                    })
                    .map(|e| (e, zeta))
                    .collect()
            }
            _ => {
                return Err(Error::invalid(format!("surface {surface:?} is not defined for {kind:?} meshes")));
            }
        };
        if candidates.is_empty() {
            return Err(Error::invalid(format!("surface {surface:?} selects no elements")));
        }

        let ndof = kind.dof_count();
        let g = [-GAUSS_2, GAUSS_2];
        let face_points = [(g[0], g[0]), (g[1], g[0]), (g[1], g[1]), (g[0], g[1])];
        let mut sampler =
            SurfaceSampler { points: Vec::new(), elements: Vec::new(), rows: Vec::new(), dofs_per_element: ndof };
        // which B rows hold exx, eyy, gxy
        let picks: [usize; 3] = match kind {
            ElementKind::Quad4 => [0, 1, 2],
            ElementKind::Hex8 => [0, 1, 5],
        };
        for (e, zeta) in candidates {
            let coords = mesh.element_coords(e);
            for &(xi, eta) in &face_points {
                let nat = [xi, eta, zeta];
                let grads = physical_gradients(kind, &coords, nat);
                let b = strain_displacement(kind, &grads.dn);
                for r in picks {
                    sampler.rows.extend_from_slice(&b[r * ndof..(r + 1) * ndof]);
                }
                let x = crate::shape::interpolate_position(kind, &coords, nat);
                sampler.points.push([x[0], x[1]]);
                sampler.elements.push(e);
            }
        }
        Ok(sampler)
    }

    pub fn points(&self) -> &[[f64; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn sample(&self, mesh: &Mesh, u: &DisplacementField) -> StrainField {
        let dim = mesh.dim();
        let n = self.dofs_per_element;
        let mut ue = vec![0.0; n];
        let mut out = StrainField {
            points: self.points.clone(),
            exx: Vec::with_capacity(self.len()),
            eyy: Vec::with_capacity(self.len()),
            exy: Vec::with_capacity(self.len()),
        };
        for (p, &e) in self.elements.iter().enumerate() {
            for (a, &node) in mesh.element(e).iter().enumerate() {
                ue[a * dim..(a + 1) * dim].copy_from_slice(&u.values[node * dim..(node + 1) * dim]);
            }
            let rows = &self.rows[p * 3 * n..(p + 1) * 3 * n];
            let dot = |r: usize| rows[r * n..(r + 1) * n].iter().zip(&ue).map(|(b, v)| b * v).sum::<f64>();
            out.exx.push(dot(0));
            out.eyy.push(dot(1));
            out.exy.push(dot(2));
        }
        out
    }
}
