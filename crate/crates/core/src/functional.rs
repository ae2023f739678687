//! Length functionals on conjugacy classes.

use std::fmt;
use std::sync::Arc;

use crate::error::Result;
use crate::group::ConjClass;
use crate::kleinian::KleinianRep;
use crate::par;
use crate::rep::Representation;

/// A positive class function whose values are periods of a reparameterized
/// geodesic flow.
#[derive(Debug, Clone)]
pub enum LengthFunctional {
    /// Word length of the cyclically reduced representative.
    WordLength,
    /// `log Lambda(rho(gamma))`.
    LogSpectralRadius(Arc<Representation>),
    /// Hyperbolic translation length `2 log|lambda|` in `SL_2(C)`.
    TranslationLength(Arc<KleinianRep>),
    Scaled(f64, Box<LengthFunctional>),
}

impl LengthFunctional {
    pub fn log_radius(rep: Representation) -> Self {
        LengthFunctional::LogSpectralRadius(Arc::new(rep))
    }

    pub fn translation(rep: KleinianRep) -> Self {
        LengthFunctional::TranslationLength(Arc::new(rep))
    }

    pub fn scaled(self, c: f64) -> Self {
        LengthFunctional::Scaled(c, Box::new(self))
    }

    pub fn label(&self) -> String {
        self.to_string()
    }

    pub fn value(&self, class: &ConjClass) -> Result<f64> {
        match self {
            LengthFunctional::WordLength => Ok(class.length() as f64),
            LengthFunctional::LogSpectralRadius(rep) => rep.log_spectral_radius(class.rep()),
            LengthFunctional::TranslationLength(rep) => rep.translation_length(class.rep()),
            LengthFunctional::Scaled(c, inner) => Ok(c * inner.value(class)?),
        }
    }

    /// Values on every class, computed in parallel, in class order.
    pub fn values(&self, classes: &[ConjClass]) -> Result<Vec<f64>> {
        par::try_map(classes, |c| self.value(c))
    }
}

impl fmt::Display for LengthFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LengthFunctional::WordLength => write!(f, "word_length"),
            LengthFunctional::LogSpectralRadius(r) => write!(f, "log_radius[{}]", r.label()),
            LengthFunctional::TranslationLength(r) => write!(f, "translation[{}]", r.label()),
            LengthFunctional::Scaled(c, inner) => write!(f, "{c}*{inner}"),
        }
    }
}
