use serde::Serialize;

use super::ModelError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OlsFit {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Residual sum of squares.
    pub rss: f64,
}

/// Least squares via the normal equations `X'X b = X'y`, solved by a
/// Cholesky factorisation that doubles as the rank check: a column whose
/// pivot collapses relative to its own squared norm lies (numerically) in
/// the span of the columns before it, and is reported by name.
///
/// `rows` is the design in row-major form, normally with a leading
/// intercept column. `names` labels the columns in error messages and in
/// the result; columns are numbered when it is `None`.
pub fn ols_fit(rows: &[Vec<f64>], y: &[f64], names: Option<&[String]>) -> Result<OlsFit, ModelError> {
    let n = rows.len();
    if n != y.len() {
        return Err(ModelError::Input(format!("design has {n} rows but y has {} values", y.len())));
    }
    let p = rows.first().map_or(0, Vec::len);
    if p == 0 {
        return Err(ModelError::Input("design has no columns".into()));
    }
    if rows.iter().any(|r| r.len() != p) {
        return Err(ModelError::Input("design rows have unequal lengths".into()));
    }
    if n < p {
        return Err(ModelError::Input(format!("{n} rows cannot identify {p} coefficients")));
    }
    let names: Vec<String> = match names {
        Some(ns) if ns.len() == p => ns.to_vec(),
        Some(ns) => {
            return Err(ModelError::Input(format!("{} column names for {p} columns", ns.len())));
        }
        None => (0..p).map(|j| format!("column {j}")).collect(),
    };

    let mut xtx = vec![vec![0.0; p]; p];
    let mut xty = vec![0.0; p];
    for (row, &yi) in rows.iter().zip(y) {
        for i in 0..p {
            xty[i] += row[i] * yi;
            for j in 0..=i {
                xtx[i][j] += row[i] * row[j];
            }
        }
    }

    let mut l = vec![vec![0.0; p]; p];
    for j in 0..p {
        let s: f64 = (0..j).map(|k| l[j][k] * l[j][k]).sum();
        let pivot = xtx[j][j] - s;
        if !(pivot > 1e-10 * xtx[j][j]) || xtx[j][j] == 0.0 {
            return Err(ModelError::SingularDesign {
                column: j,
                name: names[j].clone(),
            });
        }
        l[j][j] = pivot.sqrt();
        for i in j + 1..p {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            l[i][j] = (xtx[i][j] - s) / l[j][j];
        }
    }

    let coefficients = cholesky_solve(&l, &xty);
    let rss: f64 = rows
        .iter()
        .zip(y)
        .map(|(row, yi)| {
            let fit: f64 = row.iter().zip(&coefficients).map(|(x, b)| x * b).sum();
            (yi - fit).powi(2)
        })
        .sum();
    let sigma2 = if n > p { rss / (n - p) as f64 } else { f64::NAN };
    let std_errors = (0..p)
        .map(|j| {
            let mut e = vec![0.0; p];
            e[j] = 1.0;
            (cholesky_solve(&l, &e)[j] * sigma2).sqrt()
        })
        .collect();

    Ok(OlsFit {
        names,
        coefficients,
        std_errors,
        rss,
    })
}

fn cholesky_solve(l: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let p = b.len();
    let mut z = vec![0.0; p];
    for i in 0..p {
        let s: f64 = (0..i).map(|k| l[i][k] * z[k]).sum();
        z[i] = (b[i] - s) / l[i][i];
    }
    let mut x = vec![0.0; p];
    for i in (0..p).rev() {
        let s: f64 = (i + 1..p).map(|k| l[k][i] * x[k]).sum();
        x[i] = (z[i] - s) / l[i][i];
    }
    x
}
