use nalgebra::DMatrix;

use super::Params;
use crate::{Error, Result};

/// A matrix entry: a number or an arithmetic expression in `mu` (or the
/// model's own name for it), `tau` and the auxiliary parameters.
#[derive(Clone, Debug)]
pub enum Entry {
    Const(f64),
    Expr { source: String, expr: meval::Expr },
}

impl Entry {
    pub fn parse(source: &str) -> Result<Self> {
        let expr = source
            .parse::<meval::Expr>()
            .map_err(|e| Error::Validation(format!("cannot parse `{source}`: {e}")))?;
        Ok(Entry::Expr { source: source.to_string(), expr })
    }

    fn eval(&self, ctx: &meval::Context) -> Result<f64> {
        match self {
            Entry::Const(v) => Ok(*v),
            Entry::Expr { source, expr } => expr
                .eval_with_context(ctx)
                .map_err(|e| Error::Validation(format!("cannot evaluate `{source}`: {e}"))),
        }
    }
}

/// Row-major matrix of [`Entry`] values.
#[derive(Clone, Debug)]
pub struct ParamMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Entry>,
}

impl ParamMatrix {
    pub fn from_rows(rows: Vec<Vec<Entry>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Validation("matrix rows have different lengths".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn constant(m: &DMatrix<f64>) -> Self {
        let entries = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| Entry::Const(m[(i, j)]))
            .collect();
        Self { rows: m.nrows(), cols: m.ncols(), entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub(crate) fn eval(&self, ctx: &meval::Context) -> Result<DMatrix<f64>> {
        let vals = self.entries.iter().map(|e| e.eval(ctx)).collect::<Result<Vec<_>>>()?;
        Ok(DMatrix::from_row_slice(self.rows, self.cols, &vals))
    }
}

pub(crate) fn context<'a>(params: &Params, mu_name: &str) -> meval::Context<'a> {
    let mut ctx = meval::Context::new();
    for (k, v) in &params.aux {
        ctx.var(k.clone(), *v);
    }
    ctx.var("mu", params.mu);
    ctx.var(mu_name.to_string(), params.mu);
    ctx.var("tau", params.tau);
    ctx
}
