use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Per-entry box bounds on the design vector (MPa). An entry with `lo == hi`
/// is held fixed by the optimizers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl Bounds {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Bounds> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::invalid(format!(
                "bounds need matching non-empty lo/hi, got {} and {}",
                lo.len(),
                hi.len()
            )));
        }
        for (k, (&l, &h)) in lo.iter().zip(&hi).enumerate() {
            if !(l.is_finite() && h.is_finite() && l > 0.0 && l <= h) {
                return Err(Error::invalid(format!("bounds entry {k}: need 0 < lo <= hi, got [{l}, {h}]")));
            }
        }
        Ok(Bounds { lo, hi })
    }

    pub fn uniform(n: usize, lo: f64, hi: f64) -> Result<Bounds> {
        Bounds::new(vec![lo; n], vec![hi; n])
    }

    pub fn len(&self) -> usize {
        self.lo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lo.is_empty()
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn range(&self, k: usize) -> f64 {
        self.hi[k] - self.lo[k]
    }

    pub fn is_fixed(&self, k: usize) -> bool {
        self.hi[k] == self.lo[k]
    }

    /// Pin entry `k` to `value` (which must lie inside the current bounds).
    pub fn pin(&mut self, k: usize, value: f64) -> Result<()> {
        if k >= self.len() || !(self.lo[k] <= value && value <= self.hi[k]) {
            return Err(Error::invalid(format!("cannot pin entry {k} to {value}")));
        }
        self.lo[k] = value;
        self.hi[k] = value;
        Ok(())
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.len() && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (l, h))| l <= v && v <= h)
    }

    pub fn clamp(&self, k: usize, v: f64) -> f64 {
        v.clamp(self.lo[k], self.hi[k])
    }

    pub fn project(&self, x: &mut [f64]) {
        for (k, v) in x.iter_mut().enumerate() {
            *v = self.clamp(k, *v);
        }
    }
}

/// Per-patch moduli together with their admissible box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesignVector {
    pub values: Vec<f64>,
    pub bounds: Bounds,
}

impl DesignVector {
    pub fn new(values: Vec<f64>, bounds: Bounds) -> Result<DesignVector> {
        if !bounds.contains(&values) {
            return Err(Error::invalid(format!("design {values:?} outside bounds")));
        }
        Ok(DesignVector { values, bounds })
    }
}

/// Linear isotropic material: one Young's modulus per patch and a shared
/// Poisson ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialField {
    pub moduli: Vec<f64>,
    pub poisson_ratio: f64,
}

impl MaterialField {
    pub fn new(moduli: Vec<f64>, poisson_ratio: f64) -> Result<MaterialField> {
        validate_poisson(poisson_ratio)?;
        validate_moduli(&moduli)?;
        Ok(MaterialField { moduli, poisson_ratio })
    }

    pub fn homogeneous(patches: usize, modulus: f64, poisson_ratio: f64) -> Result<MaterialField> {
        MaterialField::new(vec![modulus; patches], poisson_ratio)
    }
}

pub(crate) fn validate_poisson(nu: f64) -> Result<()> {
    if !(0.0..0.5).contains(&nu) {
        return Err(Error::invalid(format!("poisson ratio must be in [0, 0.5), got {nu}")));
    }
    Ok(())
}

pub(crate) fn validate_moduli(moduli: &[f64]) -> Result<()> {
    if let Some((k, e)) = moduli.iter().enumerate().find(|(_, e)| !(e.is_finite() && **e > 0.0)) {
        return Err(Error::invalid(format!("modulus of patch {k} must be positive, got {e}")));
    }
    Ok(())
}
