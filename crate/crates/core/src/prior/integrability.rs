use super::PhiField;
use crate::error::{Error, Result};
use crate::tensor::{fd_hessian, DerivativeBundle, ParamPoint, TensorTolerance};

/// Outcome of a Jacobian-symmetry test over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IntegrabilityReport {
    pub points_tested: usize,
    /// Grid points that could not be evaluated, with the reason.
    pub skipped: Vec<(ParamPoint, String)>,
    /// Largest asymmetry at each tested point, in grid order.
    pub per_point: Vec<(ParamPoint, f64)>,
    pub max_asymmetry: f64,
    /// `(t, u, theta)` where the largest asymmetry occurred.
    pub worst: Option<(usize, usize, ParamPoint)>,
    /// Largest absolute derivative entry seen on the grid.
    pub max_jacobian: f64,
    /// `rel * (1 + max_jacobian) + abs`.
    pub threshold: f64,
    pub verdict: bool,
}

impl IntegrabilityReport {
    /// Asymmetry recorded at `theta`, if that point was tested.
    pub fn asymmetry_at(&self, theta: &[f64]) -> Option<f64> {
        self.per_point
            .iter()
            .find(|(p, _)| p.coords() == theta)
            .map(|(_, a)| *a)
    }
}

struct Accumulator {
    skipped: Vec<(ParamPoint, String)>,
    per_point: Vec<(ParamPoint, f64)>,
    max_asymmetry: f64,
    worst: Option<(usize, usize, ParamPoint)>,
    max_jacobian: f64,
}

impl Accumulator {
    fn new() -> Self {
        Self {
            skipped: Vec::new(),
            per_point: Vec::new(),
            max_asymmetry: 0.0,
            worst: None,
            max_jacobian: 0.0,
        }
    }

    /// Records a point given its derivative matrix `d`, whose symmetry is tested.
    fn record(&mut self, theta: &ParamPoint, d: &nalgebra::DMatrix<f64>) {
        let p = d.nrows();
        let mut local = 0.0;
        let mut at = (0, 0);
        for t in 0..p {
            for u in (t + 1)..p {
                let a = (d[(t, u)] - d[(u, t)]).abs();
                if a > local {
                    local = a;
                    at = (t, u);
                }
            }
        }
        self.max_jacobian = self.max_jacobian.max(d.amax());
        if local > self.max_asymmetry || self.worst.is_none() {
            self.max_asymmetry = self.max_asymmetry.max(local);
            self.worst = Some((at.0, at.1, theta.clone()));
        }
        self.per_point.push((theta.clone(), local));
    }

    fn finish(self, tol: &TensorTolerance) -> IntegrabilityReport {
        let threshold = tol.rel * (1.0 + self.max_jacobian) + tol.abs;
        let tested = self.per_point.len();
        IntegrabilityReport {
            points_tested: tested,
            verdict: tested > 0
                && self.max_asymmetry.is_finite()
                && self.max_asymmetry <= threshold,
            skipped: self.skipped,
            per_point: self.per_point,
            max_asymmetry: self.max_asymmetry,
            worst: self.worst,
            max_jacobian: self.max_jacobian,
            threshold,
        }
    }
}

fn require_grid(grid: &[ParamPoint]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("integrability grid is empty".into()));
    }
    Ok(())
}

/// Tests `d phi_t / d theta_u = d phi_u / d theta_t` at every grid point.
///
/// Points whose stencil leaves the domain (or whose field cannot be
/// evaluated) are skipped and listed in the report. The verdict requires at
/// least one tested point and every tested point below the shared threshold.
pub fn integrability_check(
    phi: &PhiField<'_>,
    grid: &[ParamPoint],
    tol: &TensorTolerance,
) -> Result<IntegrabilityReport> {
    require_grid(grid)?;
    let mut acc = Accumulator::new();
    for theta in grid {
        phi.domain().require_dim(theta.dim())?;
        match phi.jacobian(theta, tol) {
            Ok(jac) => acc.record(theta, &jac),
            Err(e) => acc.skipped.push((theta.clone(), e.to_string())),
        }
    }
    Ok(acc.finish(tol))
}

/// Integrability test specialized to a diagonal information matrix:
/// `d/du d/dt log I_tt = d/dt d/du log I_uu`.
///
/// Second derivatives use a product stencil with step `10 * fd_step`.
pub fn diagonal_integrability_check(
    bundle: &dyn DerivativeBundle,
    grid: &[ParamPoint],
    tol: &TensorTolerance,
) -> Result<IntegrabilityReport> {
    require_grid(grid)?;
    let p = bundle.dim();
    let outer = TensorTolerance {
        fd_step: 10.0 * tol.fd_step,
        ..*tol
    };
    let mut acc = Accumulator::new();
    for theta in grid {
        bundle.domain().require_dim(theta.dim())?;
        if let Err(e) = bundle.domain().require_interior(theta) {
            acc.skipped.push((theta.clone(), e.to_string()));
            continue;
        }
        let info = bundle.info(theta);
        let mut off = 0.0_f64;
        for r in 0..p {
            for s in 0..p {
                if r != s {
                    off = off.max(info[(r, s)].abs());
                }
            }
        }
        if off > tol.rel * (1.0 + info.amax()) + tol.abs {
            return Err(Error::NotDiagonal { off_diagonal: off });
        }
        // d[(t, u)] = d/du d/dt log I_tt
        let mut d = nalgebra::DMatrix::zeros(p, p);
        let mut failed = None;
        for t in 0..p {
            match fd_hessian(
                |x| bundle.info(x)[(t, t)].ln(),
                bundle.domain(),
                theta,
                &outer,
            ) {
                Ok(hess) => d.set_row(t, &hess.row(t)),
                Err(e) => {
                    failed = Some(e);
                    break;
                }
            }
        }
        match failed {
            None => acc.record(theta, &d),
            Some(e) => acc.skipped.push((theta.clone(), e.to_string())),
        }
    }
    Ok(acc.finish(tol))
}
