//! The two reference systems: a Hopf normal form under Pyragas delayed
//! feedback and a scalar DDE from a periodic leukemia model. Each comes
//! with analytic Taylor tensors and closed-form reference quantities.

pub mod leukemia;
pub mod pyragas;

use crate::model::{parse_model, Aux, Params, Realization, TaylorTensors};
use crate::{Error, Result};

pub const PYRAGAS_JSON: &str = include_str!("../../models/pyragas.json");
pub const LEUKEMIA_JSON: &str = include_str!("../../models/leukemia.json");

/// Names accepted by [`by_name`].
pub const NAMES: [&str; 2] = ["pyragas", "leukemia"];

/// Nonlinearities with hand-derived tensors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuiltinG {
    Pyragas,
    Leukemia,
}

impl BuiltinG {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "pyragas" => Ok(BuiltinG::Pyragas),
            "leukemia" => Ok(BuiltinG::Leukemia),
            other => Err(Error::Validation(format!("unknown builtin nonlinearity `{other}`"))),
        }
    }

    pub fn default_params(&self) -> Aux {
        let pairs: &[(&str, f64)] = match self {
            BuiltinG::Pyragas => &[("kappa", 0.0), ("beta", std::f64::consts::FRAC_PI_4), ("gamma", -10.0)],
            BuiltinG::Leukemia => &[("beta", 2.5), ("n", 2.0), ("k", 1.5)],
        };
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    pub(crate) fn check_dims(&self, m: usize, p: usize) -> Result<()> {
        let want = match self {
            BuiltinG::Pyragas => 2,
            BuiltinG::Leukemia => 1,
        };
        if m != want || p != want {
            return Err(Error::Validation(format!("builtin {self:?} needs m = p = {want}")));
        }
        Ok(())
    }

    pub fn eval(&self, z1: &[f64], z2: &[f64], params: &Params) -> Result<Vec<f64>> {
        match self {
            BuiltinG::Pyragas => pyragas::g(z1, z2, params),
            BuiltinG::Leukemia => leukemia::g(z1[0], z2[0], params).map(|v| vec![v]),
        }
    }

    pub fn tensors(&self, y: &[f64], params: &Params, order: usize) -> Result<TaylorTensors> {
        match self {
            BuiltinG::Pyragas => pyragas::tensors(y, params, order),
            BuiltinG::Leukemia => leukemia::tensors(y[0], params, order),
        }
    }

    pub fn equilibrium_guess(&self, params: &Params) -> Option<Vec<f64>> {
        match self {
            BuiltinG::Pyragas => Some(vec![0.0, 0.0]),
            BuiltinG::Leukemia => leukemia::x_hat(params.mu, params).ok().map(|x| vec![-x]),
        }
    }
}

pub fn pyragas_model() -> Realization {
    parse_model(PYRAGAS_JSON).expect("shipped pyragas model is valid")
}

pub fn leukemia_model() -> Realization {
    parse_model(LEUKEMIA_JSON).expect("shipped leukemia model is valid")
}

/// Look up a shipped model by name.
pub fn by_name(name: &str) -> Option<Realization> {
    match name {
        "pyragas" => Some(pyragas_model()),
        "leukemia" => Some(leukemia_model()),
        _ => None,
    }
}
