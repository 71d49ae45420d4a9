use ndarray::Array2;

use super::items::ItemBank;
use super::latent::LatentSpec;
use crate::error::{Error, Result};
use crate::par;
use crate::stats::normal_cdf;

/// Rectangular tensor-product grid for posterior expectations.
///
/// Axis `k` holds `nodes_per_dim` equally spaced points spanning
/// `mean_k + sd_k * [lower, upper]`. Weights are the prior density at each
/// node, normalised to sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    nodes_per_dim: usize,
    lower: f64,
    upper: f64,
    axes: Vec<Vec<f64>>,
    log_prior: Vec<f64>,
    prior_weights: Vec<f64>,
}

impl QuadratureGrid {
    pub const DEFAULT_NODES: usize = 61;
    pub const DEFAULT_BOUND: f64 = 5.0;

    /// Builds a grid with bounds `lower`, `upper` in prior standard deviations.
    pub fn new(spec: &LatentSpec, nodes_per_dim: usize, lower: f64, upper: f64) -> Result<Self> {
        if nodes_per_dim < 2 {
            return Err(Error::invalid(
                "quadrature needs at least two nodes per dimension",
            ));
        }
        if lower.is_nan() || upper.is_nan() || lower >= upper {
            return Err(Error::invalid(
                "quadrature lower bound must be below the upper bound",
            ));
        }
        if normal_cdf(upper) - normal_cdf(lower) < 0.9999 {
            return Err(Error::invalid(format!(
                "quadrature bounds [{lower}, {upper}] bracket less than 99.99% of the prior"
            )));
        }
        let d = spec.dim();
        let step = (upper - lower) / (nodes_per_dim - 1) as f64;
        let axes: Vec<Vec<f64>> = (0..d)
            .map(|k| {
                (0..nodes_per_dim)
                    .map(|g| spec.mean()[k] + spec.sd(k) * (lower + step * g as f64))
                    .collect()
            })
            .collect();
        let total = nodes_per_dim
            .checked_pow(d as u32)
            .ok_or_else(|| Error::invalid("quadrature grid too large"))?;
        let mut node = vec![0.0; d];
        let mut log_w: Vec<f64> = (0..total)
            .map(|t| {
                for (k, idx) in tensor_index(t, nodes_per_dim, d).enumerate() {
                    node[k] = axes[k][idx];
                }
                spec.log_kernel(&node)
            })
            .collect();
        let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let norm: f64 = log_w.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
        log_w.iter_mut().for_each(|v| *v -= norm);
        let prior_weights = log_w.iter().map(|v| v.exp()).collect();
        Ok(Self {
            nodes_per_dim,
            lower,
            upper,
            axes,
            log_prior: log_w,
            prior_weights,
        })
    }

    /// 61 nodes per dimension over five prior SDs either side of the mean.
    pub fn for_spec(spec: &LatentSpec) -> Self {
        Self::new(
            spec,
            Self::DEFAULT_NODES,
            -Self::DEFAULT_BOUND,
            Self::DEFAULT_BOUND,
        )
        .expect("default quadrature is valid")
    }

    pub fn nodes_per_dim(&self) -> usize {
        self.nodes_per_dim
    }

    pub fn bounds(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, k: usize) -> &[f64] {
        &self.axes[k]
    }

    pub fn prior_weights(&self) -> &[f64] {
        &self.prior_weights
    }

    /// Number of tensor nodes.
    pub fn len(&self) -> usize {
        self.prior_weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prior_weights.is_empty()
    }
}

/// Per-axis indices of tensor node `t`, last axis fastest.
fn tensor_index(t: usize, g: usize, d: usize) -> impl Iterator<Item = usize> {
    let mut stride = g.pow(d as u32);
    (0..d).map(move |_| {
        stride /= g;
        (t / stride) % g
    })
}

/// Posterior means `E[eta | y]` for each response row.
///
/// Item log-likelihoods are tabulated once per axis node; with simple
/// structure the joint log-likelihood at a tensor node is the sum of one
/// partial sum per latent variable.
pub fn eap_scores(
    y: &Array2<u8>,
    bank: &ItemBank,
    spec: &LatentSpec,
    grid: &QuadratureGrid,
) -> Result<Array2<f64>> {
    let d = spec.dim();
    if grid.dim() != d {
        return Err(Error::DimensionMismatch {
            what: "quadrature dimension",
            expected: d,
            got: grid.dim(),
        });
    }
    if y.ncols() != bank.len() {
        return Err(Error::DimensionMismatch {
            what: "response columns",
            expected: bank.len(),
            got: y.ncols(),
        });
    }
    if bank.required_dims() > d {
        return Err(Error::DimensionMismatch {
            what: "latent dimensions referenced by the item bank",
            expected: d,
            got: bank.required_dims(),
        });
    }
    if y.iter().any(|&v| v > 1) {
        return Err(Error::invalid("responses must be 0 or 1"));
    }

    let g = grid.nodes_per_dim;
    // table[j] = [(ln p, ln q) at each node of the item's axis]
    let table: Vec<Vec<(f64, f64)>> = bank
        .items()
        .iter()
        .map(|it| grid.axes[it.dim].iter().map(|&t| it.log_probs(t)).collect())
        .collect();
    let tensor: Vec<Vec<usize>> = (0..grid.len())
        .map(|t| tensor_index(t, g, d).collect())
        .collect();

    let rows = par::map_range(y.nrows(), |i| -> Result<Vec<f64>> {
        let mut partial = vec![0.0; d * g];
        for ((item, logs), &resp) in bank.items().iter().zip(&table).zip(y.row(i)) {
            let acc = &mut partial[item.dim * g..(item.dim + 1) * g];
            if resp == 1 {
                acc.iter_mut().zip(logs).for_each(|(a, (lp, _))| *a += lp);
            } else {
                acc.iter_mut().zip(logs).for_each(|(a, (_, lq))| *a += lq);
            }
        }
        let log_post: Vec<f64> = tensor
            .iter()
            .zip(&grid.log_prior)
            .map(|(idx, lp)| {
                lp + idx
                    .iter()
                    .enumerate()
                    .map(|(k, &ix)| partial[k * g + ix])
                    .sum::<f64>()
            })
            .collect();
        let max = log_post.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::PosteriorUnderflow { row: i });
        }
        let mut mass = 0.0;
        let mut moment = vec![0.0; d];
        for (idx, lp) in tensor.iter().zip(&log_post) {
            let w = (lp - max).exp();
            mass += w;
            for (k, &ix) in idx.iter().enumerate() {
                moment[k] += w * grid.axes[k][ix];
            }
        }
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::PosteriorUnderflow { row: i });
        }
        Ok(moment.into_iter().map(|v| v / mass).collect())
    });

    let mut out = Array2::zeros((y.nrows(), d));
    for (i, row) in rows.into_iter().enumerate() {
        for (k, v) in row?.into_iter().enumerate() {
            out[[i, k]] = v;
        }
    }
    Ok(out)
}
