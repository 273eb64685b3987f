//! Worked models: derivative tensors, closed-form priors, posterior means
//! and data generators.
//!
//! | id                | parameters            | log prior                         |
//! |-------------------|-----------------------|-----------------------------------|
//! | `binomial`        | `theta`               | `-ln theta - ln(1 - theta)`       |
//! | `normal-meanvar`  | `(mu, sigma^2)`       | `-2 ln sigma^2`                   |
//! | `normal-locscale` | `(mu, sigma)`         | `-2 ln sigma`                     |
//! | `gamma`           | `(shape, scale)`      | none exists                       |
//! | `linreg-var`      | `(beta, sigma^2)`     | `-2 ln sigma^2`                   |
//! | `linreg-sd`       | `(beta, sigma)`       | `-2 ln sigma`                     |
//! | `ner`             | `(beta, tau^2, sigma^2)` | `-2 ln sigma^2 + ln g`         |
//! | `ner-balanced`    | `(beta, tau^2, sigma^2)` | `-2 ln sigma^2 - 2 ln(sigma^2 + n tau^2)` |

mod binomial;
mod gamma;
mod linreg;
mod ner;
mod ner_data;
mod normal;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::RngCore;

use crate::error::{Error, Result};
use crate::prior::{LogPrior, PhiField};
use crate::rng;
use crate::tensor::{Bound, DerivativeBundle, ParamPoint};

pub use binomial::BinomialModel;
pub use gamma::GammaModel;
pub use linreg::{LinRegModel, LinRegParam};
pub use ner::{ner_g, ner_g_balanced, NerG, NerModel};
pub use ner_data::{
    check_propriety_conditions, generate_ner, CovariateSpec, NerArea, NerDataset, NerDesign,
    ProprietyReport,
};
pub use normal::{NormalLocScaleModel, NormalMeanVarModel};

/// Catalog model identifiers, in the order used for listings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelId {
    Binomial,
    NormalMeanVar,
    NormalLocScale,
    Gamma,
    LinRegVar,
    LinRegSd,
    Ner,
    NerBalanced,
}

impl ModelId {
    pub const ALL: [ModelId; 8] = [
        ModelId::Binomial,
        ModelId::NormalMeanVar,
        ModelId::NormalLocScale,
        ModelId::Gamma,
        ModelId::LinRegVar,
        ModelId::LinRegSd,
        ModelId::Ner,
        ModelId::NerBalanced,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelId::Binomial => "binomial",
            ModelId::NormalMeanVar => "normal-meanvar",
            ModelId::NormalLocScale => "normal-locscale",
            ModelId::Gamma => "gamma",
            ModelId::LinRegVar => "linreg-var",
            ModelId::LinRegSd => "linreg-sd",
            ModelId::Ner => "ner",
            ModelId::NerBalanced => "ner-balanced",
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ModelId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

/// Observed data for the models with closed-form posterior means.
#[derive(Debug, Clone, PartialEq)]
pub enum Sample {
    /// i.i.d. scalar observations (0/1 outcomes for the binomial model).
    Univariate(Vec<f64>),
    /// `y = X beta + e` with `X` of size `n x p`.
    Regression { x: DMatrix<f64>, y: DVector<f64> },
}

impl Sample {
    pub fn univariate(&self) -> Result<&[f64]> {
        match self {
            Sample::Univariate(v) => Ok(v),
            Sample::Regression { .. } => Err(Error::InvalidConfig(
                "expected univariate observations, got regression data".into(),
            )),
        }
    }
}

/// A [`DerivativeBundle`] with the catalog extras.
pub trait CatalogModel: DerivativeBundle {
    fn id(&self) -> ModelId;

    /// Closed-form log prior up to an additive constant. Models without an
    /// asymptotically unbiased prior return `NonIntegrable`.
    fn log_prior(&self, theta: &[f64]) -> Result<f64>;

    /// Posterior mean under the catalog prior, where it has a closed form.
    fn closed_posterior_mean(&self, _data: &Sample) -> Result<ParamPoint> {
        Err(Error::InvalidConfig(format!(
            "`{}` has no closed-form posterior mean",
            self.id()
        )))
    }

    /// Draws a sample of the given size at `theta`.
    fn generate(&self, _theta: &[f64], _size: usize, _rng: &mut dyn RngCore) -> Result<Sample> {
        Err(Error::InvalidConfig(format!(
            "`{}` has no sample generator",
            self.id()
        )))
    }

    /// Zero on unbounded axes, one on half-lines, the midpoint on bounded
    /// intervals.
    fn default_anchor(&self) -> ParamPoint {
        let d = self.domain();
        d.lower()
            .iter()
            .zip(d.upper())
            .map(|(lo, hi)| match (lo, hi) {
                (Bound::Finite(a), Bound::Finite(b)) => 0.5 * (a + b),
                (Bound::Finite(a), _) => a + 1.0,
                (_, Bound::Finite(b)) => b - 1.0,
                _ => 0.0,
            })
            .collect::<Vec<_>>()
            .into()
    }
}

/// Closed-form prior of `model` as a [`LogPrior`].
pub fn closed_log_prior(model: &dyn CatalogModel) -> LogPrior<'_> {
    LogPrior::closed_form(move |theta| model.log_prior(theta))
}

/// The `phi` field of a model in the general form, which uses the analytic
/// tensors only. The i.i.d. form agrees up to finite-difference error.
pub fn model_phi(model: &dyn CatalogModel) -> PhiField<'_> {
    PhiField::general(model)
}

/// Default instance of a model. Regression and NER models use fixed
/// deterministic designs:
///
/// * `linreg-*`: `n = 20`, intercept plus a slope on an even grid over `[-1, 1]`;
/// * `ner-balanced`: `m = 10`, `n = 5`, two covariates drawn under seed 0;
/// * `ner`: `m = 10` with `n_i` cycling through `2..=6`, same covariates.
pub fn default_model(id: ModelId) -> Box<dyn CatalogModel> {
    match id {
        ModelId::Binomial => Box::new(BinomialModel::new()),
        ModelId::NormalMeanVar => Box::new(NormalMeanVarModel::new()),
        ModelId::NormalLocScale => Box::new(NormalLocScaleModel::new()),
        ModelId::Gamma => Box::new(GammaModel::new()),
        ModelId::LinRegVar => Box::new(default_linreg(LinRegParam::Variance)),
        ModelId::LinRegSd => Box::new(default_linreg(LinRegParam::StdDev)),
        ModelId::Ner => Box::new(default_ner(&[2, 3, 4, 5, 6].repeat(2), false)),
        ModelId::NerBalanced => Box::new(default_ner(&[5; 10], true)),
    }
}

/// Intercept plus an evenly spaced slope column over `[-1, 1]`.
pub fn linreg_grid_design(n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, 2, |i, j| {
        if j == 0 {
            1.0
        } else {
            -1.0 + 2.0 * i as f64 / (n - 1).max(1) as f64
        }
    })
}

fn default_linreg(param: LinRegParam) -> LinRegModel {
    LinRegModel::new(linreg_grid_design(20), param).expect("grid design has full rank")
}

fn default_ner(sizes: &[usize], balanced: bool) -> NerModel {
    let design = NerDesign::new(sizes.to_vec(), CovariateSpec::simulation_default());
    let x = design.draw_covariates(&mut rng::stream(0, &[0]));
    let model = NerModel::new(x).expect("Gaussian design has full rank");
    if balanced {
        model.into_balanced().expect("equal sizes")
    } else {
        model
    }
}

/// Log prior of the default instance of `id` at `theta`.
pub fn catalog_prior(id: &str, theta: &[f64]) -> Result<f64> {
    default_model(id.parse()?).log_prior(theta)
}

/// Closed-form posterior mean for `id` given `data`.
pub fn closed_posterior_mean(id: &str, data: &Sample) -> Result<ParamPoint> {
    let id: ModelId = id.parse()?;
    match (id, data) {
        (ModelId::LinRegVar | ModelId::LinRegSd, Sample::Regression { x, .. }) => {
            let param = if id == ModelId::LinRegVar {
                LinRegParam::Variance
            } else {
                LinRegParam::StdDev
            };
            LinRegModel::new(x.clone(), param)?.closed_posterior_mean(data)
        }
        _ => default_model(id).closed_posterior_mean(data),
    }
}
