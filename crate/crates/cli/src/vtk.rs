//! Legacy ASCII VTK unstructured-grid writer.

use femu::geometry::Mesh;
use femu::measurement::MeasurementGrid;
use femu::shape::ElementKind;
use std::fmt::Write;

const VTK_QUAD: u8 = 9;
const VTK_HEXAHEDRON: u8 = 12;

pub struct VtkWriter {
    head: String,
    cell_data: String,
    point_data: String,
    cells: usize,
    points: usize,
}

impl VtkWriter {
    pub fn new(title: &str, points: &[[f64; 3]], cells: &[&[usize]], cell_type: u8) -> VtkWriter {
        let mut head = String::new();
        let _ = writeln!(head, "# vtk DataFile Version 3.0\n{title}\nASCII\nDATASET UNSTRUCTURED_GRID");
        let _ = writeln!(head, "POINTS {} double", points.len());
        for p in points {
            let _ = writeln!(head, "{} {} {}", p[0], p[1], p[2]);
        }
        let size: usize = cells.iter().map(|c| c.len() + 1).sum();
        let _ = writeln!(head, "CELLS {} {size}", cells.len());
        for c in cells {
            let _ = write!(head, "{}", c.len());
            for n in *c {
                let _ = write!(head, " {n}");
            }
            head.push('\n');
        }
        let _ = writeln!(head, "CELL_TYPES {}", cells.len());
        for _ in cells {
            let _ = writeln!(head, "{cell_type}");
        }
        VtkWriter {
            head,
            cell_data: String::new(),
            point_data: String::new(),
            cells: cells.len(),
            points: points.len(),
        }
    }

    pub fn for_mesh(title: &str, mesh: &Mesh) -> VtkWriter {
        let cells: Vec<&[usize]> = mesh.elements().collect();
        let cell_type = match mesh.kind() {
            ElementKind::Quad4 => VTK_QUAD,
            ElementKind::Hex8 => VTK_HEXAHEDRON,
        };
        VtkWriter::new(title, mesh.nodes(), &cells, cell_type)
    }

    /// The measurement grid as a quad surface at height `z`.
    pub fn for_grid(title: &str, grid: &MeasurementGrid, z: f64) -> VtkWriter {
        let [gx, gy] = grid.counts;
        let points: Vec<[f64; 3]> = grid.points().into_iter().map(|p| [p[0], p[1], z]).collect();
        let quads: Vec<[usize; 4]> = (0..gy - 1)
            .flat_map(|j| {
                (0..gx - 1).map(move |i| [j * gx + i, j * gx + i + 1, (j + 1) * gx + i + 1, (j + 1) * gx + i])
            })
            .collect();
        let cells: Vec<&[usize]> = quads.iter().map(|q| &q[..]).collect();
        VtkWriter::new(title, &points, &cells, VTK_QUAD)
    }

    pub fn cell_scalars(mut self, name: &str, values: &[f64]) -> Self {
        assert_eq!(values.len(), self.cells, "cell field {name}");
        scalars(&mut self.cell_data, name, "double", values.iter().map(|v| v.to_string()));
        self
    }

    pub fn cell_ints(mut self, name: &str, values: &[usize]) -> Self {
        assert_eq!(values.len(), self.cells, "cell field {name}");
        scalars(&mut self.cell_data, name, "int", values.iter().map(|v| v.to_string()));
        self
    }

    pub fn point_scalars(mut self, name: &str, values: &[f64]) -> Self {
        assert_eq!(values.len(), self.points, "point field {name}");
        scalars(&mut self.point_data, name, "double", values.iter().map(|v| v.to_string()));
        self
    }

    /// Per-point vectors; 2D input is padded with a zero z component.
    pub fn point_vectors(mut self, name: &str, dim: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), self.points * dim, "point field {name}");
        let _ = writeln!(self.point_data, "VECTORS {name} double");
        for v in values.chunks(dim) {
            let z = if dim == 3 { v[2] } else { 0.0 };
            let _ = writeln!(self.point_data, "{} {} {}", v[0], v[1], z);
        }
        self
    }

    pub fn finish(self) -> String {
        let mut out = self.head;
        if !self.cell_data.is_empty() {
            let _ = writeln!(out, "CELL_DATA {}", self.cells);
            out.push_str(&self.cell_data);
        }
        if !self.point_data.is_empty() {
            let _ = writeln!(out, "POINT_DATA {}", self.points);
            out.push_str(&self.point_data);
        }
        out
    }
}

fn scalars(out: &mut String, name: &str, ty: &str, values: impl Iterator<Item = String>) {
    let _ = writeln!(out, "SCALARS {name} {ty} 1\nLOOKUP_TABLE default");
    for v in values {
        out.push_str(&v);
        out.push('\n');
    }
}
