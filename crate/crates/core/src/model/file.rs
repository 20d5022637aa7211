use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DVector;
use serde::Deserialize;

use super::{Entry, Nonlinearity, ParamMatrix, Realization, Seed, TaylorTensors};
use crate::builtin::BuiltinG;
use crate::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    name: String,
    n: usize,
    m: usize,
    p: usize,
    #[serde(rename = "A0")]
    a0: Vec<Vec<EntrySpec>>,
    #[serde(rename = "A1")]
    a1: Vec<Vec<EntrySpec>>,
    #[serde(rename = "B")]
    b: Vec<Vec<EntrySpec>>,
    #[serde(rename = "C")]
    c: Vec<Vec<EntrySpec>>,
    g: GSpec,
    #[serde(default = "default_mu_name")]
    mu_name: String,
    #[serde(default)]
    aux: BTreeMap<String, f64>,
    #[serde(default)]
    seed: Option<SeedSpec>,
}

fn default_mu_name() -> String {
    "mu".into()
}

#[derive(Deserialize)]
#[serde(untagged)]
enum EntrySpec {
    Number(f64),
    Expr(String),
}

#[derive(Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
enum GSpec {
    Builtin {
        name: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
    Polynomial {
        order: usize,
        tensors: Vec<TensorSpec>,
        #[serde(default)]
        reference_point: Option<Vec<f64>>,
        #[serde(default)]
        constant: Option<Vec<f64>>,
    },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorSpec {
    multi_index: Vec<usize>,
    value: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SeedSpec {
    omega: f64,
    mu: f64,
    #[serde(default)]
    y0: Option<Vec<f64>>,
}

fn matrix(label: &str, rows: Vec<Vec<EntrySpec>>) -> Result<ParamMatrix> {
    let rows = rows
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|e| match e {
                    EntrySpec::Number(v) => Ok(Entry::Const(v)),
                    EntrySpec::Expr(s) => Entry::parse(&s),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()
        .map_err(|e| Error::Validation(format!("{label}: {e}")))?;
    ParamMatrix::from_rows(rows).map_err(|e| Error::Validation(format!("{label}: {e}")))
}

/// Parse and validate a model from JSON text.
pub fn parse_model(text: &str) -> Result<Realization> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ModelFile = serde_path_to_error::deserialize(de).map_err(|e| Error::Parse {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;

    let mut aux = file.aux;
    let tau = aux
        .remove("tau")
        .ok_or_else(|| Error::Validation("aux must provide a default `tau`".into()))?;

    let g = match file.g {
        GSpec::Builtin { name, params } => {
            let b = BuiltinG::from_name(&name)?;
            for (k, v) in b.default_params().into_iter().chain(params) {
                aux.entry(k).or_insert(v);
            }
            Nonlinearity::Builtin(b)
        }
        GSpec::Polynomial { order, tensors, reference_point, constant } => {
            let mut t = TaylorTensors::new(file.m, file.p, order);
            for (i, spec) in tensors.into_iter().enumerate() {
                if spec.multi_index.iter().any(|&s| s == 0 || s > 2 * file.m) {
                    return Err(Error::Parse {
                        path: format!("g.tensors[{i}].multi_index"),
                        message: format!("slots are numbered 1..={}", 2 * file.m),
                    });
                }
                if spec.multi_index.windows(2).any(|w| w[0] > w[1]) {
                    return Err(Error::Parse {
                        path: format!("g.tensors[{i}].multi_index"),
                        message: "multi-index must be sorted".into(),
                    });
                }
                let idx: Vec<usize> = spec.multi_index.iter().map(|s| s - 1).collect();
                t.insert(&idx, DVector::from_vec(spec.value)).map_err(|e| Error::Parse {
                    path: format!("g.tensors[{i}]"),
                    message: e.to_string(),
                })?;
            }
            let constant = constant.unwrap_or_else(|| vec![0.0; file.p]);
            Nonlinearity::Polynomial {
                constant: DVector::from_vec(constant),
                tensors: t,
                reference_point: reference_point.unwrap_or_else(|| vec![0.0; file.m]),
            }
        }
    };

    let r = Realization {
        name: file.name,
        n: file.n,
        m: file.m,
        p: file.p,
        a0: matrix("A0", file.a0)?,
        a1: matrix("A1", file.a1)?,
        b: matrix("B", file.b)?,
        c: matrix("C", file.c)?,
        g,
        mu_name: file.mu_name,
        aux,
        tau,
        seed: file.seed.map(|s| Seed { omega: s.omega, mu: s.mu, y0: s.y0 }),
    };
    r.validate()?;
    Ok(r)
}

/// Read a model file from disk.
pub fn load_model(path: impl AsRef<Path>) -> Result<Realization> {
    let text = std::fs::read_to_string(path)?;
    parse_model(&text)
}
