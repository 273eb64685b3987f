use nalgebra::DMatrix;

use super::{DerivativeBundle, RectDomain, Tensor3};

/// Deliberate corruption applied to a bundle's tensors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Fault {
    ZeroJ,
    ZeroK,
    /// Multiplies `H` (only) by the given factor.
    ScaleH(f64),
}

/// Wraps a bundle and corrupts one tensor; used to exercise failure paths.
pub struct FaultInjected<'a> {
    inner: &'a dyn DerivativeBundle,
    fault: Fault,
}

impl<'a> FaultInjected<'a> {
    pub fn new(inner: &'a dyn DerivativeBundle, fault: Fault) -> Self {
        Self { inner, fault }
    }
}

impl DerivativeBundle for FaultInjected<'_> {
    fn name(&self) -> &str {
        self.inner.name()
    }

    fn domain(&self) -> &RectDomain {
        self.inner.domain()
    }

    fn h(&self, theta: &[f64]) -> DMatrix<f64> {
        match self.fault {
            Fault::ScaleH(c) => self.inner.h(theta) * c,
            _ => self.inner.h(theta),
        }
    }

    fn info(&self, theta: &[f64]) -> DMatrix<f64> {
        self.inner.info(theta)
    }

    fn j(&self, theta: &[f64]) -> Tensor3 {
        match self.fault {
            Fault::ZeroJ => Tensor3::zeros(self.dim()),
            _ => self.inner.j(theta),
        }
    }

    fn k(&self, theta: &[f64]) -> Tensor3 {
        match self.fault {
            Fault::ZeroK => Tensor3::zeros(self.dim()),
            _ => self.inner.k(theta),
        }
    }

    fn is_iid(&self) -> bool {
        self.inner.is_iid()
    }

    fn satisfies_information_identity(&self) -> bool {
        self.inner.satisfies_information_identity()
    }

    fn log_density(&self, x: f64, theta: &[f64]) -> Option<f64> {
        self.inner.log_density(x, theta)
    }
}
