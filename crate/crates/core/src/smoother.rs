//! Nonparametric conditional-mean estimation `E[u | x]` at the sample points.
//!
//! Predictors are standardised per column, so neighbourhoods are formed on
//! Euclidean distance in SD units. Each fitted value is a linear combination
//! of the outcomes; when several outcomes share the same predictors the
//! neighbourhoods and local weights are computed once.

use nalgebra::{DMatrix, DVector};
use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SmootherMethod {
    /// Weighted least squares on `(1, x - x_i)` within a span neighbourhood.
    LocalLinear,
    /// Weighted mean of the `k` nearest neighbours.
    KnnMean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kernel {
    Tricube,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmootherConfig {
    pub method: SmootherMethod,
    /// Fraction of the sample in each local-linear neighbourhood.
    pub span: f64,
    /// Neighbour count for `knn-mean`.
    pub k: usize,
    pub kernel: Kernel,
}

impl Default for SmootherConfig {
    fn default() -> Self {
        Self {
            method: SmootherMethod::LocalLinear,
            span: 0.75,
            k: 50,
            kernel: Kernel::Tricube,
        }
    }
}

impl SmootherConfig {
    pub fn local_linear(span: f64) -> Self {
        Self {
            span,
            ..Self::default()
        }
    }

    pub fn knn_mean(k: usize) -> Self {
        Self {
            method: SmootherMethod::KnnMean,
            k,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.method {
            SmootherMethod::LocalLinear if !(self.span > 0.0 && self.span <= 1.0) => {
                Err(Error::invalid(format!(
                    "smoother span must lie in (0, 1], got {}",
                    self.span
                )))
            }
            SmootherMethod::KnnMean if self.k < 2 => Err(Error::invalid(format!(
                "smoother neighbour count must be at least 2, got {}",
                self.k
            ))),
            _ => Ok(()),
        }
    }

    fn neighbourhood_size(&self, n: usize, p: usize) -> usize {
        let q = match self.method {
            SmootherMethod::LocalLinear => ((self.span * n as f64).floor() as usize).max(p + 2),
            SmootherMethod::KnnMean => self.k,
        };
        q.min(n)
    }
}

/// Fitted values of `u` regressed on `x`.
pub fn fit_predict(x: ArrayView2<f64>, u: &[f64], config: &SmootherConfig) -> Result<Vec<f64>> {
    Ok(fit_predict_many(x, &[u], config)?
        .pop()
        .expect("one outcome"))
}

/// Fitted values for several outcomes sharing the predictors `x`.
pub fn fit_predict_many(
    x: ArrayView2<f64>,
    outcomes: &[&[f64]],
    config: &SmootherConfig,
) -> Result<Vec<Vec<f64>>> {
    config.validate()?;
    let (n, p) = x.dim();
    if !(1..=2).contains(&p) {
        return Err(Error::invalid(format!(
            "smoother supports 1 or 2 predictors, got {p}"
        )));
    }
    if n < 10 * p {
        return Err(Error::invalid(format!(
            "smoother needs at least {} cases for {p} predictor(s), got {n}",
            10 * p
        )));
    }
    for u in outcomes {
        if u.len() != n {
            return Err(Error::DimensionMismatch {
                what: "outcome length",
                expected: n,
                got: u.len(),
            });
        }
        if u.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("outcome contains non-finite values"));
        }
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("predictors contain non-finite values"));
    }
    let z =
        stats::standardize_columns(x).map_err(|column| Error::DegeneratePredictor { column })?;
    let z = z.as_standard_layout();
    let flat = z.as_slice().expect("standard layout");
    let q = config.neighbourhood_size(n, p);
    if p == 1 {
        return Ok(fit_sorted_1d(flat, outcomes, q, config));
    }

    Ok(fit_by_scan(flat, p, outcomes, q, config))
}

/// General fit: a full distance scan per point.
fn fit_by_scan(
    flat: &[f64],
    p: usize,
    outcomes: &[&[f64]],
    q: usize,
    config: &SmootherConfig,
) -> Vec<Vec<f64>> {
    let n = flat.len() / p;
    let rows = par::map_range(n, |i| {
        let xi = &flat[i * p..(i + 1) * p];
        let dist: Vec<f64> = flat
            .chunks_exact(p)
            .map(|xj| {
                xj.iter()
                    .zip(xi)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        let mut scratch = dist.clone();
        let (_, h, _) = scratch.select_nth_unstable_by(q - 1, f64::total_cmp);
        let h = *h;

        // (index, kernel weight) for the neighbourhood
        let neigh: Vec<(usize, f64)> = dist
            .iter()
            .enumerate()
            .filter_map(|(j, &d)| {
                let w = kernel_weight(config.kernel, d, h);
                (w > 0.0).then_some((j, w))
            })
            .collect();

        let coef = match config.method {
            SmootherMethod::KnnMean => local_constant(&neigh),
            SmootherMethod::LocalLinear => {
                local_linear(&neigh, flat, xi, p).unwrap_or_else(|| local_constant(&neigh))
            }
        };
        outcomes
            .iter()
            .map(|u| coef.iter().map(|&(j, l)| l * u[j]).sum::<f64>())
            .collect::<Vec<f64>>()
    });

    let mut out = vec![Vec::with_capacity(n); outcomes.len()];
    for row in rows {
        for (o, v) in out.iter_mut().zip(row) {
            o.push(v);
        }
    }
    out
}

/// Single-predictor fit. Nearest neighbours of a point form a contiguous
/// window of the sorted predictor, so each neighbourhood is found by sliding
/// rather than by a full distance scan.
fn fit_sorted_1d(
    z: &[f64],
    outcomes: &[&[f64]],
    q: usize,
    config: &SmootherConfig,
) -> Vec<Vec<f64>> {
    let n = z.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then(a.cmp(&b)));
    let zs: Vec<f64> = order.iter().map(|&i| z[i]).collect();
    let sorted_outcomes: Vec<Vec<f64>> = outcomes
        .iter()
        .map(|u| order.iter().map(|&i| u[i]).collect())
        .collect();

    // left end of the q-nearest window for each sorted position
    let mut starts = Vec::with_capacity(n);
    let mut lo = 0usize;
    for k in 0..n {
        lo = lo.max(k.saturating_sub(q - 1));
        while lo + q < n && zs[lo + q] - zs[k] < zs[k] - zs[lo] {
            lo += 1;
        }
        starts.push(lo);
    }

    let rows = par::map_range(n, |k| {
        let x0 = zs[k];
        let lo = starts[k];
        let h = (x0 - zs[lo]).max(zs[lo + q - 1] - x0);
        let (mut l, mut r) = (lo, lo + q);
        while l > 0 && x0 - zs[l - 1] <= h {
            l -= 1;
        }
        while r < n && zs[r] - x0 <= h {
            r += 1;
        }
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for &zj in &zs[l..r] {
            let d = zj - x0;
            let w = kernel_weight(config.kernel, d.abs(), h);
            s0 += w;
            s1 += w * d;
            s2 += w * d * d;
        }
        // equivalent kernel l_j = w_j (s2 - s1 d_j) / (s0 s2 - s1^2), or the
        // local mean when the local design is singular
        let half_trace = 0.5 * (s0 + s2);
        let spread = (0.25 * (s0 - s2) * (s0 - s2) + s1 * s1).sqrt();
        let (max, min) = (half_trace + spread, half_trace - spread);
        let linear =
            matches!(config.method, SmootherMethod::LocalLinear) && max > 0.0 && min > 1e-10 * max;
        let det = s0 * s2 - s1 * s1;
        sorted_outcomes
            .iter()
            .map(|u| {
                let mut acc = 0.0;
                for (j, &zj) in zs.iter().enumerate().take(r).skip(l) {
                    let d = zj - x0;
                    let w = kernel_weight(config.kernel, d.abs(), h);
                    acc += if linear { w * (s2 - s1 * d) } else { w } * u[j];
                }
                acc / if linear { det } else { s0 }
            })
            .collect::<Vec<f64>>()
    });

    let mut out = vec![vec![0.0; n]; outcomes.len()];
    for (k, row) in rows.into_iter().enumerate() {
        for (o, v) in out.iter_mut().zip(row) {
            o[order[k]] = v;
        }
    }
    out
}

fn kernel_weight(kernel: Kernel, d: f64, h: f64) -> f64 {
    if h == 0.0 {
        return if d == 0.0 { 1.0 } else { 0.0 };
    }
    match kernel {
        Kernel::Uniform => f64::from(u8::from(d <= h)),
        Kernel::Tricube => {
            let r = d / h;
            if r < 1.0 {
                let t = 1.0 - r * r * r;
                t * t * t
            } else {
                0.0
            }
        }
    }
}

fn local_constant(neigh: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let total: f64 = neigh.iter().map(|(_, w)| w).sum();
    neigh.iter().map(|&(j, w)| (j, w / total)).collect()
}

/// Equivalent-kernel coefficients `l_j` with `fitted_i = sum_j l_j u_j`.
/// `None` when the local design is numerically singular.
fn local_linear(
    neigh: &[(usize, f64)],
    flat: &[f64],
    xi: &[f64],
    p: usize,
) -> Option<Vec<(usize, f64)>> {
    let dim = p + 1;
    let mut design = vec![0.0; dim];
    let mut gram = DMatrix::<f64>::zeros(dim, dim);
    for &(j, w) in neigh {
        fill_design(&mut design, &flat[j * p..(j + 1) * p], xi);
        for a in 0..dim {
            for b in a..dim {
                gram[(a, b)] += w * design[a] * design[b];
            }
        }
    }
    for a in 0..dim {
        for b in 0..a {
            gram[(a, b)] = gram[(b, a)];
        }
    }
    let eig = gram.symmetric_eigen();
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if max.is_nan() || max <= 0.0 || min <= 1e-10 * max {
        return None;
    }
    // v = gram^{-1} e1
    let mut v = DVector::<f64>::zeros(dim);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        let q = eig.eigenvectors.column(k);
        v += q * (q[0] / lambda);
    }
    Some(
        neigh
            .iter()
            .map(|&(j, w)| {
                fill_design(&mut design, &flat[j * p..(j + 1) * p], xi);
                (
                    j,
                    w * design.iter().zip(v.iter()).map(|(a, b)| a * b).sum::<f64>(),
                )
            })
            .collect(),
    )
}

#[inline]
fn fill_design(design: &mut [f64], xj: &[f64], xi: &[f64]) {
    design[0] = 1.0;
    for (c, (a, b)) in xj.iter().zip(xi).enumerate() {
        design[c + 1] = a - b;
    }
}
