//! Structured coupon meshes and their partition into modulus patches.
//!
//! Nodes of a structured mesh are numbered `i + (nx+1)*(j + (ny+1)*k)` and
//! elements `i + nx*(j + ny*k)`, so x runs fastest. QUAD4 connectivity is
//! counterclockwise seen from +z; HEX8 lists the bottom face counterclockwise
//! followed by the top face.

use crate::error::{Error, Result};
use crate::shape::{physical_gradients, ElementKind};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone)]
pub struct Mesh {
    kind: ElementKind,
    nodes: Vec<[f64; 3]>,
    connectivity: Vec<usize>,
    thickness: f64,
    divisions: Option<[usize; 3]>,
    lower: [f64; 3],
    upper: [f64; 3],
}

/// Build a structured grid over `[0,L] x [0,W]` (QUAD4, plane stress with the
/// given thickness) or, when `nz` is given, over `[0,L] x [0,W] x [0,T]` (HEX8).
pub fn build_coupon_mesh(
    length_mm: f64,
    width_mm: f64,
    thickness_mm: f64,
    nx: usize,
    ny: usize,
    nz: Option<usize>,
) -> Result<Mesh> {
    for (name, v) in [("length", length_mm), ("width", width_mm), ("thickness", thickness_mm)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::invalid(format!("{name} must be positive and finite, got {v}")));
        }
    }
    if nx == 0 || ny == 0 || nz == Some(0) {
        return Err(Error::invalid(format!("mesh subdivisions must be at least 1, got nx={nx} ny={ny} nz={nz:?}")));
    }
    let lerp = |extent: f64, n: usize, i: usize| {
        if i == n {
            extent
        } else {
            extent * i as f64 / n as f64
        }
    };

    let (kind, layers) = match nz {
        None => (ElementKind::Quad4, 0),
        Some(nz) => (ElementKind::Hex8, nz),
    };
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1) * (layers + 1));
    for k in 0..=layers {
        let z = if layers == 0 { 0.0 } else { lerp(thickness_mm, layers, k) };
        for j in 0..=ny {
            for i in 0..=nx {
                nodes.push([lerp(length_mm, nx, i), lerp(width_mm, ny, j), z]);
            }
        }
    }

    let id = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);
    let mut connectivity = Vec::new();
    if layers == 0 {
        for j in 0..ny {
            for i in 0..nx {
                connectivity.extend([id(i, j, 0), id(i + 1, j, 0), id(i + 1, j + 1, 0), id(i, j + 1, 0)]);
            }
        }
    } else {
        for k in 0..layers {
            for j in 0..ny {
                for i in 0..nx {
                    connectivity.extend([
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
    }

    let mut mesh = Mesh::from_parts(kind, nodes, connectivity, thickness_mm)?;
    mesh.divisions = Some([nx, ny, layers]);
    if kind == ElementKind::Quad4 {
        mesh.upper[2] = thickness_mm;
    }
    Ok(mesh)
}

impl Mesh {
    /// Assemble a mesh from raw parts, checking connectivity and element
    /// orientation. `thickness` is the out-of-plane thickness for QUAD4 and is
    /// informational for HEX8.
    pub fn from_parts(
        kind: ElementKind,
        nodes: Vec<[f64; 3]>,
        connectivity: Vec<usize>,
        thickness: f64,
    ) -> Result<Mesh> {
        let npe = kind.node_count();
        if connectivity.is_empty() || !connectivity.len().is_multiple_of(npe) {
            return Err(Error::invalid(format!(
                "connectivity length {} is not a positive multiple of {npe}",
                connectivity.len()
            )));
        }
        if !(thickness.is_finite() && thickness > 0.0) {
            return Err(Error::invalid(format!("thickness must be positive, got {thickness}")));
        }
        for (e, conn) in connectivity.chunks(npe).enumerate() {
            for (a, &n) in conn.iter().enumerate() {
                if n >= nodes.len() {
                    return Err(Error::invalid(format!("element {e} references node {n} out of range")));
                }
                if conn[..a].contains(&n) {
                    return Err(Error::invalid(format!("element {e} repeats node {n}")));
                }
            }
        }
        let mut lower = [f64::INFINITY; 3];
        let mut upper = [f64::NEG_INFINITY; 3];
        for p in &nodes {
            for i in 0..3 {
                lower[i] = lower[i].min(p[i]);
                upper[i] = upper[i].max(p[i]);
            }
        }
        let mesh = Mesh { kind, nodes, connectivity, thickness, divisions: None, lower, upper };
        for e in 0..mesh.element_count() {
            let coords = mesh.element_coords(e);
            for (point, p) in kind.gauss_points().into_iter().enumerate() {
                let det = physical_gradients(kind, &coords, p).det_j;
                if !(det > 0.0) {
                    return Err(Error::DegenerateElement { element: e, point, det });
                }
            }
        }
        Ok(mesh)
    }

    pub fn kind(&self) -> ElementKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.kind.dim()
    }

    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn element_count(&self) -> usize {
        self.connectivity.len() / self.kind.node_count()
    }

    pub fn element(&self, e: usize) -> &[usize] {
        let npe = self.kind.node_count();
        &self.connectivity[e * npe..(e + 1) * npe]
    }

    pub fn elements(&self) -> impl Iterator<Item = &[usize]> {
        self.connectivity.chunks(self.kind.node_count())
    }

    pub fn element_coords(&self, e: usize) -> Vec<[f64; 3]> {
        self.element(e).iter().map(|&n| self.nodes[n]).collect()
    }

    pub fn thickness(&self) -> f64 {
        self.thickness
    }

    /// `[nx, ny, nz]` for structured meshes (`nz = 0` in 2D).
    pub fn divisions(&self) -> Option<[usize; 3]> {
        self.divisions
    }

    /// Axis-aligned bounding box; in 2D the z-extent is `[0, thickness]`.
    pub fn bounds(&self) -> ([f64; 3], [f64; 3]) {
        (self.lower, self.upper)
    }

    pub fn centroid(&self, e: usize) -> [f64; 3] {
        let conn = self.element(e);
        let mut c = [0.0; 3];
        for &n in conn {
            for i in 0..3 {
                c[i] += self.nodes[n][i];
            }
        }
        c.map(|v| v / conn.len() as f64)
    }

    /// Gauss-integrated element volume (area times thickness in 2D).
    pub fn element_volume(&self, e: usize) -> f64 {
        let coords = self.element_coords(e);
        let jac: f64 =
            self.kind.gauss_points().into_iter().map(|p| physical_gradients(self.kind, &coords, p).det_j).sum();
        match self.kind {
            ElementKind::Quad4 => jac * self.thickness,
            ElementKind::Hex8 => jac,
        }
    }

    pub fn volume(&self) -> f64 {
        (0..self.element_count()).map(|e| self.element_volume(e)).sum()
    }

    /// Nodes lying on a bounding face of the mesh.
    pub fn face_nodes(&self, face: Face) -> Vec<usize> {
        let (axis, at_max) = face.axis();
        let target = if at_max { self.upper[axis] } else { self.lower[axis] };
        let span = (0..3).map(|i| self.upper[i] - self.lower[i]).fold(0.0, f64::max);
        let tol = 1e-9 * span.max(1.0);
        if axis == 2 && self.dim() == 2 {
            return Vec::new();
        }
        (0..self.nodes.len()).filter(|&n| (self.nodes[n][axis] - target).abs() <= tol).collect()
    }
}

/// A bounding face of the coupon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Face {
    XMin,
    XMax,
    YMin,
    YMax,
    ZMin,
    ZMax,
}

impl Face {
    /// (axis index, whether the face is at the upper end).
    pub fn axis(self) -> (usize, bool) {
        match self {
            Face::XMin => (0, false),
            Face::XMax => (0, true),
            Face::YMin => (1, false),
            Face::YMax => (1, true),
            Face::ZMin => (2, false),
            Face::ZMax => (2, true),
        }
    }
}

/// Assignment of every element to exactly one modulus patch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatchMap {
    patch_of_element: Vec<usize>,
    patch_count: usize,
}

impl PatchMap {
    /// Fails if any index is out of range or any patch is left empty.
    pub fn new(patch_of_element: Vec<usize>, patch_count: usize) -> Result<PatchMap> {
        let mut owned = vec![0usize; patch_count];
        for (e, &p) in patch_of_element.iter().enumerate() {
            if p >= patch_count {
                return Err(Error::invalid(format!("element {e} assigned to patch {p} >= {patch_count}")));
            }
            owned[p] += 1;
        }
        if let Some(empty) = owned.iter().position(|&n| n == 0) {
            return Err(Error::invalid(format!("patch {empty} owns no elements")));
        }
        Ok(PatchMap { patch_of_element, patch_count })
    }

    /// Every element in a single patch.
    pub fn uniform(element_count: usize) -> PatchMap {
        PatchMap { patch_of_element: vec![0; element_count], patch_count: 1 }
    }

    pub fn patch_count(&self) -> usize {
        self.patch_count
    }

    pub fn patch_of(&self, element: usize) -> usize {
        self.patch_of_element[element]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.patch_of_element
    }

    pub fn element_count(&self) -> usize {
        self.patch_of_element.len()
    }

    /// Number of elements in each patch.
    pub fn sizes(&self) -> Vec<usize> {
        let mut n = vec![0; self.patch_count];
        for &p in &self.patch_of_element {
            n[p] += 1;
        }
        n
    }
}

/// Split the coupon into `n_sections` equal-length slabs along x, assigning
/// each element by its centroid.
pub fn partition_longitudinal(mesh: &Mesh, n_sections: usize) -> Result<PatchMap> {
    let columns = mesh.divisions().map(|d| d[0]).unwrap_or(mesh.element_count());
    if n_sections == 0 || n_sections > columns {
        return Err(Error::invalid(format!("n_sections must be in 1..={columns} (element columns), got {n_sections}")));
    }
    let (lo, hi) = mesh.bounds();
    let width = (hi[0] - lo[0]) / n_sections as f64;
    let assign = (0..mesh.element_count())
        .map(|e| {
            let s = ((mesh.centroid(e)[0] - lo[0]) / width).floor();
            (s.max(0.0) as usize).min(n_sections - 1)
        })
        .collect();
    PatchMap::new(assign, n_sections)
}

/// Axis-aligned box (rectangle in 2D, cuboid in 3D) marking a defect region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DefectSpec {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl DefectSpec {
    /// Accepts two (rectangle, unbounded in z) or three coordinates per corner.
    pub fn new(min: &[f64], max: &[f64]) -> Result<DefectSpec> {
        if min.len() != max.len() || !(2..=3).contains(&min.len()) {
            return Err(Error::invalid("defect corners need 2 or 3 coordinates each"));
        }
        let mut lo = [f64::NEG_INFINITY; 3];
        let mut hi = [f64::INFINITY; 3];
        for i in 0..min.len() {
            if !(min[i] < max[i]) {
                return Err(Error::invalid(format!(
                    "defect box min {:?} must be below max {:?} componentwise",
                    min, max
                )));
            }
            lo[i] = min[i];
            hi[i] = max[i];
        }
        Ok(DefectSpec { min: lo, max: hi })
    }

    pub fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<DefectSpec> {
        DefectSpec::new(&[x0, y0], &[x1, y1])
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        (0..3).all(|i| self.min[i] <= p[i] && p[i] <= self.max[i])
    }
}

/// Move the elements whose centroid lies inside defect `k` into a new patch
/// `patch_count + k`. Later defects win where boxes overlap.
pub fn stamp_defect_patches(patch_map: &PatchMap, mesh: &Mesh, defects: &[DefectSpec]) -> Result<PatchMap> {
    if patch_map.element_count() != mesh.element_count() {
        return Err(Error::invalid("patch map does not match mesh element count"));
    }
    let base = patch_map.patch_count();
    let mut assign = patch_map.as_slice().to_vec();
    for (k, defect) in defects.iter().enumerate() {
        let mut hit = false;
        for (e, slot) in assign.iter_mut().enumerate() {
            if defect.contains(mesh.centroid(e)) {
                *slot = base + k;
                hit = true;
            }
        }
        if !hit {
            return Err(Error::invalid(format!("defect {k} contains no element centroid")));
        }
    }
    PatchMap::new(assign, base + defects.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupon_counts() {
        let m = build_coupon_mesh(100.0, 20.0, 2.0, 2, 2, None).unwrap();
        assert_eq!((m.node_count(), m.element_count()), (9, 4));
        let m = build_coupon_mesh(100.0, 20.0, 2.0, 1, 1, Some(1)).unwrap();
        assert_eq!((m.node_count(), m.element_count()), (8, 1));
        assert_eq!(m.kind(), ElementKind::Hex8);
        let m = build_coupon_mesh(100.0, 20.0, 2.0, 40, 10, None).unwrap();
        assert_eq!((m.node_count(), m.element_count()), (451, 400));
    }

    #[test]
    fn rejects_bad_dimensions() {
        assert!(matches!(build_coupon_mesh(0.0, 20.0, 2.0, 2, 2, None), Err(Error::InvalidArgument(_))));
        assert!(matches!(build_coupon_mesh(10.0, -1.0, 2.0, 2, 2, None), Err(Error::InvalidArgument(_))));
        assert!(matches!(build_coupon_mesh(10.0, 1.0, 2.0, 0, 2, None), Err(Error::InvalidArgument(_))));
        assert!(matches!(build_coupon_mesh(10.0, 1.0, 2.0, 2, 2, Some(0)), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn mesh_volume_matches_box() {
        let m = build_coupon_mesh(100.0, 20.0, 2.0, 40, 10, None).unwrap();
        assert!((m.volume() / 4000.0 - 1.0).abs() < 1e-12);
        let m = build_coupon_mesh(100.0, 20.0, 2.0, 30, 8, Some(4)).unwrap();
        assert!((m.volume() / 4000.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn from_parts_rejects_bad_connectivity() {
        let nodes = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0], [0.0, 1.0, 0.0]];
        let r = Mesh::from_parts(ElementKind::Quad4, nodes.clone(), vec![0, 1, 1, 3], 1.0);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
        let r = Mesh::from_parts(ElementKind::Quad4, nodes.clone(), vec![0, 1, 2, 7], 1.0);
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
        // clockwise ordering flips the Jacobian
        let r = Mesh::from_parts(ElementKind::Quad4, nodes, vec![0, 3, 2, 1], 1.0);
        assert!(matches!(r, Err(Error::DegenerateElement { element: 0, .. })));
    }

    #[test]
    fn one_column_per_section() {
        let m = build_coupon_mesh(90.0, 10.0, 1.0, 9, 3, None).unwrap();
        let p = partition_longitudinal(&m, 9).unwrap();
        for e in 0..m.element_count() {
            assert_eq!(p.patch_of(e), e % 9);
        }
    }

    #[test]
    fn nine_sections_on_forty_columns() {
        let m = build_coupon_mesh(100.0, 20.0, 2.0, 40, 10, None).unwrap();
        let p = partition_longitudinal(&m, 9).unwrap();
        assert_eq!(p.patch_count(), 9);
        assert!(p.sizes().iter().all(|&n| n > 0));
        let single = partition_longitudinal(&m, 1).unwrap();
        assert!(single.as_slice().iter().all(|&p| p == 0));
        assert!(partition_longitudinal(&m, 41).is_err());
        assert!(partition_longitudinal(&m, 0).is_err());
    }

    #[test]
    fn stamping_two_defects() {
        let m = build_coupon_mesh(100.0, 20.0, 2.0, 40, 10, None).unwrap();
        let p = partition_longitudinal(&m, 9).unwrap();
        let defects =
            [DefectSpec::rect(25.0, 6.0, 35.0, 14.0).unwrap(), DefectSpec::rect(62.0, 4.0, 72.0, 10.0).unwrap()];
        let s = stamp_defect_patches(&p, &m, &defects).unwrap();
        assert_eq!(s.patch_count(), 11);
        assert_eq!(s.sizes()[9], 16);
        assert_eq!(s, stamp_defect_patches(&p, &m, &defects).unwrap());
        assert_eq!(stamp_defect_patches(&p, &m, &[]).unwrap(), p);
    }

    #[test]
    fn stamping_errors() {
        let m = build_coupon_mesh(100.0, 20.0, 2.0, 40, 10, None).unwrap();
        let p = partition_longitudinal(&m, 9).unwrap();
        let everything = DefectSpec::rect(-1.0, -1.0, 101.0, 21.0).unwrap();
        assert!(stamp_defect_patches(&p, &m, &[everything]).is_err());
        let tiny = DefectSpec::rect(0.1, 0.1, 0.2, 0.2).unwrap();
        let ok = DefectSpec::rect(25.0, 6.0, 35.0, 14.0).unwrap();
        let err = stamp_defect_patches(&p, &m, &[ok, tiny]).unwrap_err();
        assert!(err.to_string().contains("defect 1"), "{err}");
        assert!(DefectSpec::rect(5.0, 0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn later_defect_wins_overlap() {
        let m = build_coupon_mesh(100.0, 20.0, 2.0, 40, 10, None).unwrap();
        let p = partition_longitudinal(&m, 9).unwrap();
        let a = DefectSpec::rect(20.0, 4.0, 40.0, 16.0).unwrap();
        let b = DefectSpec::rect(30.0, 4.0, 50.0, 16.0).unwrap();
        let s = stamp_defect_patches(&p, &m, &[a, b]).unwrap();
        for e in 0..m.element_count() {
            let [x, y, _] = m.centroid(e);
            if !(4.0..=16.0).contains(&y) {
                assert!(s.patch_of(e) < 9);
            } else if (30.0..=50.0).contains(&x) {
                assert_eq!(s.patch_of(e), 10);
            } else if (20.0..30.0).contains(&x) {
                assert_eq!(s.patch_of(e), 9);
            }
        }
    }

    #[test]
    fn face_nodes_of_coupon() {
        let m = build_coupon_mesh(100.0, 20.0, 2.0, 4, 2, Some(2)).unwrap();
        assert_eq!(m.face_nodes(Face::XMin).len(), 9);
        assert_eq!(m.face_nodes(Face::ZMax).len(), 15);
        let m2 = build_coupon_mesh(100.0, 20.0, 2.0, 4, 2, None).unwrap();
        assert_eq!(m2.face_nodes(Face::XMax).len(), 3);
        assert!(m2.face_nodes(Face::ZMax).is_empty());
    }
}
