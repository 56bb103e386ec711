//! Linear elastic forward model.
//!
//! Strains use the engineering shear convention throughout:
//! `exy` holds `du/dy + dv/dx`, twice the tensorial shear component.

mod bc;
mod element;
mod material;
mod model;
mod skyline;
mod sparse;

pub use bc::{BoundaryConditions, Support};
pub use element::{constitutive, element_stiffness};
pub use material::{Bounds, DesignVector, MaterialField};
pub use model::{ForwardModel, SurfaceSampler, RESIDUAL_TOL};
pub use sparse::CsrMatrix;

use crate::error::{Error, Result};
use crate::geometry::{Mesh, PatchMap};
use crate::shape::ElementKind;
use serde::{Deserialize, Serialize};

/// Nodal displacements (mm), node-major with `dim` components per node.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    pub dim: usize,
    pub values: Vec<f64>,
}

impl DisplacementField {
    pub fn node(&self, n: usize) -> &[f64] {
        &self.values[n * self.dim..(n + 1) * self.dim]
    }

    pub fn node_count(&self) -> usize {
        self.values.len() / self.dim
    }
}

/// In-plane strains at surface sample points. `exy` is engineering shear.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StrainField {
    pub points: Vec<[f64; 2]>,
    pub exx: Vec<f64>,
    pub eyy: Vec<f64>,
    pub exy: Vec<f64>,
}

impl StrainField {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn component(&self, c: usize) -> &[f64] {
        match c {
            0 => &self.exx,
            1 => &self.eyy,
            _ => &self.exy,
        }
    }
}

/// Where strains are observed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Surface {
    /// The whole plane-stress sheet (2D meshes).
    Midplane,
    /// The `z = T` face of a 3D coupon, where the camera looks.
    Front,
    /// The `z = 0` face of a 3D coupon.
    Back,
}

impl Surface {
    /// The observable surface for a mesh: midplane in 2D, front face in 3D.
    pub fn default_for(mesh: &Mesh) -> Surface {
        match mesh.kind() {
            ElementKind::Quad4 => Surface::Midplane,
            ElementKind::Hex8 => Surface::Front,
        }
    }
}

/// Global stiffness in compressed-row form. Element `k` uses the modulus of
/// its patch; contributions are summed in element order.
pub fn assemble(mesh: &Mesh, patch_map: &PatchMap, material: &MaterialField) -> Result<CsrMatrix> {
    if patch_map.patch_count() != material.moduli.len() {
        return Err(Error::invalid(format!(
            "patch map has {} patches, material has {} moduli",
            patch_map.patch_count(),
            material.moduli.len()
        )));
    }
    if patch_map.element_count() != mesh.element_count() {
        return Err(Error::invalid("patch map does not match mesh"));
    }
    material::validate_moduli(&material.moduli)?;
    let kind = mesh.kind();
    let dim = mesh.dim();
    let thickness = (kind == ElementKind::Quad4).then(|| mesh.thickness());
    let mut k = CsrMatrix::stiffness_pattern(mesh);
    for e in 0..mesh.element_count() {
        let modulus = material.moduli[patch_map.patch_of(e)];
        let ke = element_stiffness(kind, &mesh.element_coords(e), modulus, material.poisson_ratio, thickness).map_err(
            |err| match err {
                Error::DegenerateElement { point, det, .. } => Error::DegenerateElement { element: e, point, det },
                other => other,
            },
        )?;
        let conn = mesh.element(e);
        let dof = |a: usize| conn[a / dim] * dim + a % dim;
        for a in 0..kind.dof_count() {
            for b in 0..kind.dof_count() {
                k.add(dof(a), dof(b), ke[(a, b)]);
            }
        }
    }
    Ok(k)
}

pub fn solve_static(
    mesh: &Mesh,
    patch_map: &PatchMap,
    material: &MaterialField,
    bcs: &BoundaryConditions,
) -> Result<DisplacementField> {
    ForwardModel::new(mesh, patch_map, bcs, material.poisson_ratio)?.solve(&material.moduli)
}

/// Strains at the in-plane Gauss points of each surface element (2D), or at
/// the Gauss points of the selected face of each surface element (3D).
pub fn surface_strains(mesh: &Mesh, displacement: &DisplacementField, surface: Surface) -> Result<StrainField> {
    if displacement.dim != mesh.dim() || displacement.node_count() != mesh.node_count() {
        return Err(Error::invalid("displacement field does not match mesh"));
    }
    Ok(SurfaceSampler::new(mesh, surface)?.sample(mesh, displacement))
}

/// `K u` at every dof: zero at free dofs up to solver round-off, reactions
/// at prescribed ones.
pub fn reactions(
    mesh: &Mesh,
    patch_map: &PatchMap,
    material: &MaterialField,
    bcs: &BoundaryConditions,
    displacement: &DisplacementField,
) -> Result<Vec<f64>> {
    ForwardModel::new(mesh, patch_map, bcs, material.poisson_ratio)?.internal_forces(&material.moduli, displacement)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_coupon_mesh, Face};

    fn bar(nx: usize, ny: usize) -> (Mesh, PatchMap, BoundaryConditions) {
        let mesh = build_coupon_mesh(100.0, 20.0, 2.0, nx, ny, None).unwrap();
        let patches = PatchMap::uniform(mesh.element_count());
        let bcs = BoundaryConditions::tension(&mesh, Face::XMin, Support::Roller, Face::XMax, 0.1).unwrap();
        (mesh, patches, bcs)
    }

    #[test]
    fn single_element_assembly_equals_element_matrix() {
        let mesh = build_coupon_mesh(3.0, 2.0, 0.5, 1, 1, None).unwrap();
        let mat = MaterialField::homogeneous(1, 7.0, 0.2).unwrap();
        let k = assemble(&mesh, &PatchMap::uniform(1), &mat).unwrap();
        let ke = element_stiffness(ElementKind::Quad4, &mesh.element_coords(0), 7.0, 0.2, Some(0.5)).unwrap();
        let conn = mesh.element(0);
        let dof = |a: usize| conn[a / 2] * 2 + a % 2;
        for a in 0..8 {
            for b in 0..8 {
                assert_eq!(k.get(dof(a), dof(b)), ke[(a, b)]);
            }
        }
    }

    #[test]
    fn assembly_checks_patch_count() {
        let (mesh, patches, _) = bar(4, 2);
        let mat = MaterialField::homogeneous(2, 1.0, 0.3).unwrap();
        assert!(matches!(assemble(&mesh, &patches, &mat), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn uniaxial_bar_is_linear() {
        let (mesh, patches, bcs) = bar(8, 3);
        let mat = MaterialField::homogeneous(1, 200_000.0, 0.3).unwrap();
        let u = solve_static(&mesh, &patches, &mat, &bcs).unwrap();
        for (n, p) in mesh.nodes().iter().enumerate() {
            assert!((u.node(n)[0] - 1e-3 * p[0]).abs() < 1e-8 * 0.1, "node {n}");
            assert!((u.node(n)[1] + 0.3e-3 * p[1]).abs() < 1e-8 * 0.1);
        }
        let s = surface_strains(&mesh, &u, Surface::Midplane).unwrap();
        assert_eq!(s.len(), 4 * mesh.element_count());
        assert!(s.exx.iter().all(|v| (v - 1e-3).abs() < 1e-11));
    }

    #[test]
    fn zero_load_gives_zero_field() {
        let mesh = build_coupon_mesh(100.0, 20.0, 2.0, 6, 3, None).unwrap();
        let bcs = BoundaryConditions::tension(&mesh, Face::XMin, Support::Clamped, Face::XMax, 0.0).unwrap();
        let mat = MaterialField::homogeneous(1, 1.0, 0.3).unwrap();
        let u = solve_static(&mesh, &PatchMap::uniform(mesh.element_count()), &mat, &bcs).unwrap();
        assert!(u.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn insufficient_constraints_are_singular() {
        let mesh = build_coupon_mesh(10.0, 2.0, 1.0, 5, 2, None).unwrap();
        // only the normal component on both ends: free to slide in y
        let mut entries: Vec<(usize, f64)> = mesh.face_nodes(Face::XMin).iter().map(|&n| (2 * n, 0.0)).collect();
        entries.extend(mesh.face_nodes(Face::XMax).iter().map(|&n| (2 * n, 0.01)));
        let bcs = BoundaryConditions::from_dofs(&mesh, entries).unwrap();
        let mat = MaterialField::homogeneous(1, 1.0, 0.3).unwrap();
        let err = solve_static(&mesh, &PatchMap::uniform(mesh.element_count()), &mat, &bcs).unwrap_err();
        assert!(matches!(err, Error::Singular { .. }), "{err}");
    }

    #[test]
    fn prescribed_values_are_exact() {
        let (mesh, patches, bcs) = bar(10, 4);
        let mat = MaterialField::homogeneous(1, 3.0, 0.3).unwrap();
        let u = solve_static(&mesh, &patches, &mat, &bcs).unwrap();
        for &(dof, v) in bcs.prescribed() {
            assert_eq!(u.values[dof], v);
        }
    }

    #[test]
    fn surface_selection_errors() {
        let (mesh, patches, bcs) = bar(4, 2);
        let mat = MaterialField::homogeneous(1, 3.0, 0.3).unwrap();
        let u = solve_static(&mesh, &patches, &mat, &bcs).unwrap();
        assert!(surface_strains(&mesh, &u, Surface::Front).is_err());
    }

    #[test]
    fn front_face_sampling_3d() {
        let mesh = build_coupon_mesh(30.0, 8.0, 4.0, 6, 2, Some(2)).unwrap();
        let s = SurfaceSampler::new(&mesh, Surface::Front).unwrap();
        assert_eq!(s.len(), 4 * 12);
        let bcs = BoundaryConditions::tension(&mesh, Face::XMin, Support::Roller, Face::XMax, 0.03).unwrap();
        let mat = MaterialField::homogeneous(1, 1000.0, 0.25).unwrap();
        let u = solve_static(&mesh, &PatchMap::uniform(mesh.element_count()), &mat, &bcs).unwrap();
        let f = s.sample(&mesh, &u);
        for i in 0..f.len() {
            assert!((f.exx[i] - 1e-3).abs() < 1e-11);
            assert!((f.eyy[i] + 0.25e-3).abs() < 1e-11);
            assert!(f.exy[i].abs() < 1e-11);
        }
    }
}
