use ndarray::ArrayView2;

use super::jitter::{count_duplicate_rows, jitter_columns};
use crate::error::{Error, Result};
use crate::par;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MutualInformation {
    /// Estimate in nats, floored at zero.
    pub nats: f64,
    /// `1 - exp(-2 nats)`.
    pub rescaled: f64,
}

/// Kraskov–Stögbauer–Grassberger estimator (first variant) with max-norm
/// distances in the joint and marginal spaces.
///
/// Each column is scaled to unit variance, so the joint max-norm weighs the
/// two score vectors comparably, then jittered at `1e-9` SD before the
/// neighbour searches.
pub fn ksg_mutual_information(
    u: ArrayView2<f64>,
    v: ArrayView2<f64>,
    k: usize,
    seed: u64,
) -> Result<MutualInformation> {
    let n = u.nrows();
    if v.nrows() != n {
        return Err(Error::DimensionMismatch {
            what: "paired sample rows",
            expected: n,
            got: v.nrows(),
        });
    }
    if n < 100 {
        return Err(Error::invalid(format!(
            "mutual information needs at least 100 cases, got {n}"
        )));
    }
    if k < 2 || k >= n {
        return Err(Error::invalid(format!(
            "neighbour count must lie in [2, n), got {k}"
        )));
    }
    if u.ncols() == 0 || v.ncols() == 0 {
        return Err(Error::invalid(
            "mutual information needs non-empty score vectors",
        ));
    }
    if u.iter().chain(v.iter()).any(|x| !x.is_finite()) {
        return Err(Error::invalid("mutual information inputs must be finite"));
    }
    let dups = count_duplicate_rows(u, v);
    if dups * 100 > n {
        log::warn!("{dups} of {n} joint points are duplicates; relying on jitter to separate them");
    }

    let scaled = |x: ArrayView2<f64>| {
        stats::standardize_columns(x).map_err(|c| {
            Error::DegenerateInput(format!("score column {} has zero variance", c + 1))
        })
    };
    let ju = jitter_columns(scaled(u)?.view(), seed);
    let jv = jitter_columns(scaled(v)?.view(), seed);
    let (p, q) = (u.ncols(), v.ncols());
    let ju = ju.as_standard_layout();
    let jv = jv.as_standard_layout();
    let fu = ju.as_slice().expect("standard layout");
    let fv = jv.as_slice().expect("standard layout");

    let digamma = digamma_table(n + 1);
    let terms = par::map_range(n, |i| {
        let ui = &fu[i * p..(i + 1) * p];
        let vi = &fv[i * q..(i + 1) * q];
        let mut du = Vec::with_capacity(n - 1);
        let mut dv = Vec::with_capacity(n - 1);
        for j in (0..n).filter(|&j| j != i) {
            du.push(max_norm(&fu[j * p..(j + 1) * p], ui));
            dv.push(max_norm(&fv[j * q..(j + 1) * q], vi));
        }
        let mut joint: Vec<f64> = du.iter().zip(&dv).map(|(a, b)| a.max(*b)).collect();
        let (_, eps, _) = joint.select_nth_unstable_by(k - 1, f64::total_cmp);
        let eps = *eps;
        let nu = du.iter().filter(|&&d| d < eps).count();
        let nv = dv.iter().filter(|&&d| d < eps).count();
        digamma[nu + 1] + digamma[nv + 1]
    });
    let avg = terms.iter().sum::<f64>() / n as f64;
    let nats = (digamma[k] + digamma[n] - avg).max(0.0);
    Ok(MutualInformation {
        nats,
        rescaled: 1.0 - (-2.0 * nats).exp(),
    })
}

#[inline]
fn max_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// `table[m] = psi(m)` for `m` in `1..=max`; `table[0]` is unused.
fn digamma_table(max: usize) -> Vec<f64> {
    let mut t = vec![f64::NAN; max + 1];
    t[1] = -0.577_215_664_901_532_9;
    for m in 2..=max {
        t[m] = t[m - 1] + 1.0 / (m - 1) as f64;
    }
    t
}
