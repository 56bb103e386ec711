use super::evaluate_all;
use crate::error::{Error, Result};
use crate::solver::Bounds;

#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub values: Vec<f64>,
    /// Cost evaluations spent.
    pub evaluations: usize,
}

/// Finite-difference gradient with per-coordinate step
/// `h_k = step_rel * (hi_k - lo_k)`.
///
/// Central differences are used where `x_k ± h_k` stays inside the bounds,
/// otherwise a one-sided difference pointing into the box. Fixed coordinates
/// (`lo == hi`) get a zero derivative. `cost_at_design` saves one evaluation
/// when a one-sided difference is needed and the caller already knows `F(x)`.
pub fn fd_gradient<F>(
    cost: &F,
    design: &[f64],
    bounds: &Bounds,
    step_rel: f64,
    cost_at_design: Option<f64>,
) -> Result<Gradient>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    if design.len() != bounds.len() {
        return Err(Error::invalid("design and bounds differ in length"));
    }
    if !(step_rel > 0.0 && step_rel <= 0.5) {
        return Err(Error::invalid(format!("fd step must be in (0, 0.5], got {step_rel}")));
    }

    enum Scheme {
        Fixed,
        Central(f64),
        Forward(f64),
        Backward(f64),
    }
    let schemes: Vec<Scheme> = (0..design.len())
        .map(|k| {
            if bounds.is_fixed(k) {
                return Scheme::Fixed;
            }
            let h = step_rel * bounds.range(k);
            let x = design[k];
            if x - h >= bounds.lo()[k] && x + h <= bounds.hi()[k] {
                Scheme::Central(h)
            } else if x + h <= bounds.hi()[k] {
                Scheme::Forward(h)
            } else {
                Scheme::Backward(h)
            }
        })
        .collect();

    let mut points = Vec::new();
    let shifted = |k: usize, delta: f64| {
        let mut x = design.to_vec();
        x[k] += delta;
        x
    };
    let needs_center = schemes.iter().any(|s| matches!(s, Scheme::Forward(_) | Scheme::Backward(_)));
    if needs_center && cost_at_design.is_none() {
        points.push(design.to_vec());
    }
    for (k, s) in schemes.iter().enumerate() {
        match *s {
            Scheme::Fixed => {}
            Scheme::Central(h) => {
                points.push(shifted(k, h));
                points.push(shifted(k, -h));
            }
            Scheme::Forward(h) => points.push(shifted(k, h)),
            Scheme::Backward(h) => points.push(shifted(k, -h)),
        }
    }
    let values = evaluate_all(cost, &points)?;
    let evaluations = values.len();
    let mut it = values.into_iter();
    let f0 = match cost_at_design {
        Some(f) => f,
        None if needs_center => it.next().expect("centre evaluated"),
        None => f64::NAN,
    };
    let grad = schemes
        .iter()
        .map(|s| match *s {
            Scheme::Fixed => 0.0,
            Scheme::Central(h) => {
                let (fp, fm) = (it.next().unwrap(), it.next().unwrap());
                (fp - fm) / (2.0 * h)
            }
            Scheme::Forward(h) => (it.next().unwrap() - f0) / h,
            Scheme::Backward(h) => (f0 - it.next().unwrap()) / h,
        })
        .collect();
    Ok(Gradient { values: grad, evaluations })
}
