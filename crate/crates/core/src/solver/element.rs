use crate::error::{Error, Result};
use crate::shape::{physical_gradients, strain_displacement, ElementKind};
use nalgebra::DMatrix;

/// Constitutive matrix in engineering-shear Voigt order: plane stress
/// (xx, yy, xy) for QUAD4, full 3D (xx, yy, zz, yz, xz, xy) for HEX8.
pub fn constitutive(kind: ElementKind, modulus: f64, nu: f64) -> DMatrix<f64> {
    match kind {
        ElementKind::Quad4 => {
            let c = modulus / (1.0 - nu * nu);
            DMatrix::from_row_slice(3, 3, &[c, c * nu, 0.0, c * nu, c, 0.0, 0.0, 0.0, c * 0.5 * (1.0 - nu)])
        }
        ElementKind::Hex8 => {
            let lambda = modulus * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
            let mu = modulus / (2.0 * (1.0 + nu));
            let mut d = DMatrix::zeros(6, 6);
            for i in 0..3 {
                for j in 0..3 {
                    d[(i, j)] = lambda;
                }
                d[(i, i)] = lambda + 2.0 * mu;
                d[(i + 3, i + 3)] = mu;
            }
            d
        }
    }
}

/// Fully integrated isoparametric stiffness (8x8 QUAD4, 24x24 HEX8). Node
/// coordinates are in local node order; `thickness` multiplies the QUAD4
/// integral and is ignored for HEX8.
///
/// A non-positive Jacobian yields [`Error::DegenerateElement`] with element
/// id 0; mesh-aware callers substitute the real id.
pub fn element_stiffness(
    kind: ElementKind,
    coords: &[[f64; 3]],
    modulus: f64,
    nu: f64,
    thickness: Option<f64>,
) -> Result<DMatrix<f64>> {
    if coords.len() != kind.node_count() {
        return Err(Error::invalid(format!("{kind:?} needs {} nodes, got {}", kind.node_count(), coords.len())));
    }
    if !(modulus.is_finite() && modulus > 0.0) {
        return Err(Error::invalid(format!("modulus must be positive, got {modulus}")));
    }
    super::material::validate_poisson(nu)?;
    let scale = match kind {
        ElementKind::Quad4 => thickness.unwrap_or(1.0),
        ElementKind::Hex8 => 1.0,
    };
    let d = constitutive(kind, modulus, nu);
    let ndof = kind.dof_count();
    let nstr = kind.strain_count();
    let mut k = DMatrix::zeros(ndof, ndof);
    for (point, p) in kind.gauss_points().into_iter().enumerate() {
        let g = physical_gradients(kind, coords, p);
        if !(g.det_j > 0.0) {
            return Err(Error::DegenerateElement { element: 0, point, det: g.det_j });
        }
        let b = DMatrix::from_row_slice(nstr, ndof, &strain_displacement(kind, &g.dn));
        k += b.transpose() * &d * &b * (g.det_j * scale);
    }
    // symmetrize away round-off so assembled matrices are exactly symmetric
    let kt = k.transpose();
    Ok((k + kt) * 0.5)
}
