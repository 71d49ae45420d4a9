use crate::error::{Error, Result};
use crate::stats::average_ranks;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sigma {
    /// Schweizer–Wolff sigma from the empirical copula.
    pub raw: f64,
    /// `4 sin^2(pi/6 * raw)`, equal to the squared correlation under
    /// bivariate normality.
    pub rescaled: f64,
}

/// Schweizer–Wolff sigma on the empirical copula grid:
///
/// ```text
/// raw = 12 / (n^2 - 1) * sum_{i,j=1..n} |C_n(i/n, j/n) - i j / n^2|
/// ```
///
/// with `C_n(i/n, j/n) = #{k : rank(u_k) <= i, rank(v_k) <= j} / n` and
/// average ranks for ties. The double sum is accumulated exactly in integer
/// arithmetic, so the estimate is symmetric in its arguments bit for bit.
pub fn schweizer_wolff_sigma(u: &[f64], v: &[f64]) -> Result<Sigma> {
    if u.len() < 10 {
        return Err(Error::invalid(format!(
            "coefficient sigma needs at least 10 cases, got {}",
            u.len()
        )));
    }
    empirical_copula_sigma(u, v)
}

/// The same double sum without the minimum sample size of
/// [`schweizer_wolff_sigma`]; useful for checking small hand-ranked cases.
pub fn empirical_copula_sigma(u: &[f64], v: &[f64]) -> Result<Sigma> {
    let n = u.len();
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            what: "paired sample length",
            expected: n,
            got: v.len(),
        });
    }
    if n < 2 {
        return Err(Error::invalid("coefficient sigma needs at least 2 cases"));
    }
    if u.iter().chain(v).any(|x| x.is_nan()) {
        return Err(Error::invalid("coefficient sigma inputs must not be NaN"));
    }
    let ru = grid_entry(&average_ranks(u));
    let rv = grid_entry(&average_ranks(v));
    let total = copula_deviation_sum(&ru, &rv);
    let nf = n as f64;
    let raw = 12.0 * total as f64 / (nf * nf * (nf * nf - 1.0));
    let s = (std::f64::consts::PI / 6.0 * raw).sin();
    Ok(Sigma {
        raw,
        rescaled: 4.0 * s * s,
    })
}

/// First grid index `i` with `rank <= i`.
fn grid_entry(ranks: &[f64]) -> Vec<usize> {
    ranks.iter().map(|r| r.ceil() as usize).collect()
}

/// `sum_{i,j} |n * count(i, j) - i * j|`, i.e. `n^2` times the copula
/// deviation sum.
fn copula_deviation_sum(ru: &[usize], rv: &[usize]) -> u128 {
    let n = ru.len();
    // points grouped by the row at which they enter
    let mut entering: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
    for (&a, &b) in ru.iter().zip(rv) {
        entering[a].push(b);
    }
    // cum[j] = #{k : ru_k <= i, rv_k <= j}, j = 1..=n
    let mut cum = vec![0i64; n + 1];
    let nn = n as i64;
    let mut total: u128 = 0;
    for (i, cols) in entering.iter().enumerate().skip(1) {
        for &c in cols {
            cum[c..].iter_mut().for_each(|x| *x += 1);
        }
        let i = i as i64;
        let row: u64 = (1..=n)
            .map(|j| (nn * cum[j] - i * j as i64).unsigned_abs())
            .sum();
        total += row as u128;
    }
    total
}
