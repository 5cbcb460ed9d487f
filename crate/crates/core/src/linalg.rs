//! Dense least squares for the small design matrices used by the ANOVA.

/// Pivots smaller than this fraction of the largest pivot (or matrix entry)
/// are treated as zero.
pub const SINGULAR_TOLERANCE: f64 = 1e-10;

/// Inverts a symmetric positive semi-definite matrix by Gauss-Jordan
/// elimination with partial pivoting. On failure returns the index of the
/// first column found to be linearly dependent on the earlier ones.
pub fn invert(a: &[Vec<f64>]) -> Result<Vec<Vec<f64>>, usize> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            r
        })
        .collect();
    let mut scale = a
        .iter()
        .flatten()
        .fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        scale = 1.0;
    }
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .expect("non-empty");
        let pivot = m[pivot_row][col];
        if pivot.abs() < SINGULAR_TOLERANCE * scale {
            return Err(col);
        }
        scale = scale.max(pivot.abs());
        m.swap(col, pivot_row);
        let inv = 1.0 / pivot;
        m[col].iter_mut().for_each(|v| *v *= inv);
        for r in 0..n {
            if r != col {
                let factor = m[r][col];
                if factor != 0.0 {
                    for c in 0..2 * n {
                        m[r][c] -= factor * m[col][c];
                    }
                }
            }
        }
    }
    Ok(m.into_iter().map(|row| row[n..].to_vec()).collect())
}

/// Cross product XᵀX of a row-major design.
pub fn gram(x: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let p = x.first().map_or(0, Vec::len);
    let mut g = vec![vec![0.0; p]; p];
    for row in x {
        for i in 0..p {
            for j in i..p {
                g[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..p {
        for j in 0..i {
            g[i][j] = g[j][i];
        }
    }
    g
}

pub fn xt_y(x: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let p = x.first().map_or(0, Vec::len);
    let mut out = vec![0.0; p];
    for (row, &yi) in x.iter().zip(y) {
        for (o, v) in out.iter_mut().zip(row) {
            *o += v * yi;
        }
    }
    out
}

pub fn mat_vec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    a.iter().map(|row| dot(row, v)).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Result of an ordinary least-squares solve.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub coefficients: Vec<f64>,
    pub gram_inverse: Vec<Vec<f64>>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    pub sse: f64,
}

/// Solves the normal equations for `x β ≈ y`.
pub fn least_squares(x: &[Vec<f64>], y: &[f64]) -> Result<LeastSquares, usize> {
    let gram_inverse = invert(&gram(x))?;
    let coefficients = mat_vec(&gram_inverse, &xt_y(x, y));
    let fitted: Vec<f64> = x.iter().map(|row| dot(row, &coefficients)).collect();
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let sse = residuals.iter().map(|r| r * r).sum();
    Ok(LeastSquares {
        coefficients,
        gram_inverse,
        fitted,
        residuals,
        sse,
    })
}
