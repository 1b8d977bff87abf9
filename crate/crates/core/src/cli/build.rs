use super::spec::{ImpuritySpec, JobSpec, OperatorSpec, SymbolSpec};
use crate::bounds::BoundConfig;
use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::operator::{
    example21_operator, fish_symbol, grcar_matrix, singular_integral_operator, truncate_to_band, BandOperator,
    LaurentSymbol,
};
use num_complex::Complex64;

/// The operator of a job together with its truncation error `eta_d`.
#[derive(Clone, Debug)]
pub struct BuiltOperator {
    pub op: BandOperator,
    pub eta_d: f64,
}

fn triples(c: &[[f64; 3]]) -> Vec<(i64, Complex64)> {
    c.iter().map(|t| (t[0] as i64, Complex64::new(t[1], t[2]))).collect()
}

fn symbol(s: &SymbolSpec) -> LaurentSymbol {
    match (&s.builtin, &s.coefficients) {
        (Some(_), _) => fish_symbol(),
        (None, Some(c)) => LaurentSymbol::with_tail(triples(c), s.tail.unwrap_or(0.0)),
        (None, None) => LaurentSymbol::from_coefficients([]),
    }
}

/// `sum_{|k| > d} max(|a_k|, |b_k|)` plus both unlisted tails.
fn pair_tail(a: &LaurentSymbol, b: &LaurentSymbol, d: usize) -> f64 {
    let r = a.support_radius().max(b.support_radius()) as i64;
    let di = d as i64;
    let listed: f64 = (-r..=r)
        .filter(|k| k.abs() > di)
        .map(|k| a.coefficient(k).norm().max(b.coefficient(k).norm()))
        .sum();
    listed + a.tail_beyond() + b.tail_beyond()
}

fn impurity_matrix(imp: &ImpuritySpec) -> DenseMatrix {
    let shift = Complex64::new(imp.shift[0], imp.shift[1]);
    match &imp.matrix {
        None => grcar_matrix(10, imp.scale, shift),
        Some(rows) => DenseMatrix::from_fn(rows.len(), rows[0].len(), |i, j| {
            let v = Complex64::new(rows[i][j][0], rows[i][j][1]) * imp.scale;
            if i == j {
                v + shift
            } else {
                v
            }
        }),
    }
}

/// Build the operator with bandwidth `d` (overriding `operator.d`).
pub fn build_operator(spec: &OperatorSpec, d: Option<usize>) -> Result<BuiltOperator> {
    let d = d.or(spec.d);
    let need_d = || d.ok_or_else(|| Error::config("operator.d", "missing truncation bandwidth"));
    let (op, eta_d) = match (spec.builtin.as_deref(), &spec.symbol) {
        (Some("fish"), _) => truncate_to_band(&fish_symbol(), need_d()?),
        (Some("example21"), _) => (example21_operator(), 0.0),
        (Some("identity"), _) => (BandOperator::identity(), 0.0),
        (Some("singint"), _) => {
            let d = need_d()?;
            let a = symbol(spec.a.as_ref().expect("validated"));
            let b = symbol(spec.b.as_ref().expect("validated"));
            (singular_integral_operator(&a, &b, d), pair_tail(&a, &b, d))
        }
        (None, Some(c)) => truncate_to_band(&LaurentSymbol::from_coefficients(triples(c)), need_d()?),
        (other, _) => return Err(Error::config("operator.builtin", format!("unknown operator {other:?}"))),
    };
    let op = match &spec.impurity {
        Some(imp) => op.add_impurity(&impurity_matrix(imp), imp.row, imp.col)?,
        None => op,
    };
    Ok(BuiltOperator { op, eta_d })
}

/// Bound configuration for `op`; explicit `eta_d` and `delta_n` in the job win.
pub fn bound_config(job: &JobSpec, built: &BuiltOperator) -> Result<BoundConfig> {
    let mut cfg = BoundConfig::new(&built.op, job.bounds.blocks);
    if let Some(b) = job.bounds.b {
        cfg.b = b;
    }
    cfg.offsets = job.bounds.offsets.clone();
    cfg.eps_list = job.bounds.eps.clone();
    cfg.eta_d = job.bounds.eta_d.unwrap_or(built.eta_d);
    cfg.delta_n = job.bounds.delta_n;
    cfg.solver = job.solver;
    cfg.validate(&built.op).map_err(|e| match e {
        Error::Config { message, .. } if message.contains("eps") => Error::config(
            "bounds.eps",
            format!("{message}; the enclosures need eps > eta_d"),
        ),
        Error::Config { message, .. } => Error::config("bounds", message),
        other => other,
    })?;
    Ok(cfg)
}
