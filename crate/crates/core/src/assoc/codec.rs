use ndarray::ArrayView2;

use super::jitter::jitter_columns;
use crate::error::{Error, Result};
use crate::par;
use crate::rng::{mix, unit_interval};

/// Azadkia–Chatterjee coefficient estimate `T_n` of `u` on `x`.
///
/// With `R_i = #{j : u_j <= u_i}`, `L_i = #{j : u_j >= u_i}` and `N(i)` the
/// Euclidean nearest neighbour of `x_i`,
///
/// ```text
/// T_n = sum_i (n min(R_i, R_N(i)) - L_i^2) / sum_i L_i (n - L_i)
/// ```
///
/// The outcome enters only through its ranks. Predictors are jittered at
/// `1e-9` SD; remaining exact distance ties are broken uniformly at random
/// from `seed`.
pub fn codec_t(u: &[f64], x: ArrayView2<f64>, seed: u64) -> Result<f64> {
    let n = u.len();
    if x.nrows() != n {
        return Err(Error::DimensionMismatch {
            what: "predictor rows",
            expected: n,
            got: x.nrows(),
        });
    }
    if n < 30 {
        return Err(Error::invalid(format!(
            "coefficient T needs at least 30 cases, got {n}"
        )));
    }
    if x.ncols() == 0 {
        return Err(Error::invalid("coefficient T needs at least one predictor"));
    }
    if u.iter().chain(x.iter()).any(|v| !v.is_finite()) {
        return Err(Error::invalid("coefficient T inputs must be finite"));
    }

    let (r, l) = outcome_counts(u);
    let jx = jitter_columns(x, seed);
    let jx = jx.as_standard_layout();
    let flat = jx.as_slice().expect("standard layout");
    let p = x.ncols();

    let nn = par::map_range(n, |i| {
        let xi = &flat[i * p..(i + 1) * p];
        let mut best = f64::INFINITY;
        let mut ties: Vec<usize> = Vec::new();
        for j in (0..n).filter(|&j| j != i) {
            let d: f64 = flat[j * p..(j + 1) * p]
                .iter()
                .zip(xi)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            if d < best {
                best = d;
                ties.clear();
                ties.push(j);
            } else if d == best {
                ties.push(j);
            }
        }
        if ties.len() == 1 {
            ties[0]
        } else {
            let pick = unit_interval(mix(&[seed, i as u64, 0x7E5])) * ties.len() as f64;
            ties[(pick as usize).min(ties.len() - 1)]
        }
    });

    let n_i = n as i128;
    let mut num: i128 = 0;
    let mut den: i128 = 0;
    for i in 0..n {
        let (ri, li) = (r[i] as i128, l[i] as i128);
        num += n_i * ri.min(r[nn[i]] as i128) - li * li;
        den += li * (n_i - li);
    }
    if den == 0 {
        return Err(Error::DegenerateOutcome("outcome is constant".into()));
    }
    Ok(num as f64 / den as f64)
}

/// `(R_i, L_i)` counts of outcomes at or below / at or above each case.
fn outcome_counts(u: &[f64]) -> (Vec<usize>, Vec<usize>) {
    let n = u.len();
    let mut sorted = u.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut r = vec![0; n];
    let mut l = vec![0; n];
    for i in 0..n {
        let below_or_eq = sorted.partition_point(|v| v.total_cmp(&u[i]).is_le());
        let below = sorted.partition_point(|v| v.total_cmp(&u[i]).is_lt());
        r[i] = below_or_eq;
        l[i] = n - below;
    }
    (r, l)
}
