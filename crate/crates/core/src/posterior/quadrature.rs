use serde::{Deserialize, Serialize};

use super::{Diagnostics, PosteriorEnsemble, Provenance};
use crate::error::{Error, Result};
use crate::models::{Dataset, Fiber, Model, ParamBox};

/// Placement of grid nodes along one axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridSpacing {
    /// Cell-centred midpoint rule.
    Uniform,
    /// Midpoint rule in `u` with `w = c + scale * sinh(u)`, `c` the box centre.
    /// Concentrates nodes near the centre, where singular posteriors pile up.
    Sinh { scale: f64 },
    /// Sinh-spaced cells over the scalar that determines the density, for models
    /// exposing [`Fiber`]; each cell carries its exact prior mass.
    Fiber { scale: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points_per_dim: usize,
    pub spacing: GridSpacing,
}

impl GridSpec {
    pub fn uniform(points_per_dim: usize) -> Self {
        Self {
            points_per_dim,
            spacing: GridSpacing::Uniform,
        }
    }

    pub fn sinh(points_per_dim: usize, scale: f64) -> Self {
        Self {
            points_per_dim,
            spacing: GridSpacing::Sinh { scale },
        }
    }

    pub fn fiber(points: usize, scale: f64) -> Self {
        Self {
            points_per_dim: points,
            spacing: GridSpacing::Fiber { scale },
        }
    }
}

/// Nodes and log quadrature weights (log cell volume) along one axis.
pub(crate) fn axis_nodes(lo: f64, hi: f64, spec: &GridSpec) -> Result<Vec<(f64, f64)>> {
    let g = spec.points_per_dim;
    if g == 0 {
        return Err(Error::InvalidInput("grid needs at least one point per dimension".into()));
    }
    match spec.spacing {
        GridSpacing::Uniform => {
            let h = (hi - lo) / g as f64;
            Ok((0..g).map(|k| (lo + (k as f64 + 0.5) * h, h.ln())).collect())
        }
        GridSpacing::Sinh { scale } | GridSpacing::Fiber { scale } => {
            if !(scale > 0.0) {
                return Err(Error::InvalidInput(format!("sinh grid scale must be positive, got {scale}")));
            }
            let c = 0.5 * (lo + hi);
            let (ulo, uhi) = (((lo - c) / scale).asinh(), ((hi - c) / scale).asinh());
            let du = (uhi - ulo) / g as f64;
            Ok((0..g)
                .map(|k| {
                    let u = ulo + (k as f64 + 0.5) * du;
                    (c + scale * u.sinh(), (scale * u.cosh() * du).ln())
                })
                .collect())
        }
    }
}

fn sinh_edges(lo: f64, hi: f64, g: usize, scale: f64) -> (Vec<f64>, Vec<f64>) {
    let c = 0.5 * (lo + hi);
    let (ulo, uhi) = (((lo - c) / scale).asinh(), ((hi - c) / scale).asinh());
    let du = (uhi - ulo) / g as f64;
    let mut edges: Vec<f64> = (0..=g).map(|k| c + scale * (ulo + k as f64 * du).sinh()).collect();
    edges[0] = lo;
    edges[g] = hi;
    let mids = (0..g).map(|k| c + scale * (ulo + (k as f64 + 0.5) * du).sinh()).collect();
    (edges, mids)
}

/// Level-set representatives and their log prior masses.
pub(crate) fn fiber_nodes(fiber: &dyn Fiber, spec: &GridSpec) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let GridSpacing::Fiber { scale } = spec.spacing else {
        return Err(Error::InvalidInput("fiber nodes need fiber spacing".into()));
    };
    if spec.points_per_dim == 0 || !(scale > 0.0) {
        return Err(Error::InvalidInput("fiber grid needs points >= 1 and scale > 0".into()));
    }
    let (lo, hi) = fiber.fiber_range();
    let (edges, mids) = sinh_edges(lo, hi, spec.points_per_dim, scale);
    let mut nodes = Vec::new();
    let mut log_mass = Vec::new();
    for (k, c) in mids.into_iter().enumerate() {
        let mass = fiber.fiber_mass(edges[k], edges[k + 1]);
        if mass <= 0.0 {
            continue;
        }
        let pts = fiber.fiber_points(c);
        let share = (mass / pts.len() as f64).ln();
        for w in pts {
            nodes.push(w);
            log_mass.push(share);
        }
    }
    Ok((nodes, log_mass))
}

/// Tensor-grid nodes and their log cell volumes for `d <= 2`.
pub(crate) fn grid_nodes(bounds: &ParamBox, spec: &GridSpec) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let d = bounds.dim();
    if d > 2 {
        return Err(Error::UnsupportedDimension(d));
    }
    let axes: Vec<Vec<(f64, f64)>> = (0..d)
        .map(|j| axis_nodes(bounds.lo[j], bounds.hi[j], spec))
        .collect::<Result<_>>()?;
    let mut nodes = Vec::new();
    let mut log_vol = Vec::new();
    match d {
        1 => {
            for &(w, lv) in &axes[0] {
                nodes.push(vec![w]);
                log_vol.push(lv);
            }
        }
        2 => {
            for &(a, la) in &axes[0] {
                for &(b, lb) in &axes[1] {
                    nodes.push(vec![a, b]);
                    log_vol.push(la + lb);
                }
            }
        }
        _ => {
            nodes.push(Vec::new());
            log_vol.push(0.0);
        }
    }
    Ok((nodes, log_vol))
}

/// Dense-grid representation of the tempered posterior for models with `d <= 2`.
///
/// Node `m` carries `log_weight = beta * sum_i log p(X_i|w_m) + log phi(w_m) + log vol_m`;
/// with fiber spacing the last two terms are replaced by the exact prior mass of the cell.
/// The log-sum-exp of the weights is the log marginal likelihood `-F(beta)`.
pub fn quadrature_posterior(
    model: &dyn Model,
    dataset: &Dataset,
    beta: f64,
    grid: &GridSpec,
) -> Result<PosteriorEnsemble> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::InvalidInput(format!("beta must be finite and >= 0, got {beta}")));
    }
    let d = model.dim();
    // log prior mass carried by each node
    let (nodes, log_mass) = match grid.spacing {
        GridSpacing::Fiber { .. } => {
            let fiber = model
                .fiber()
                .ok_or(Error::Unsupported("fiber quadrature for this model and prior"))?;
            fiber_nodes(fiber, grid)?
        }
        _ => {
            if d > 2 {
                return Err(Error::UnsupportedDimension(d));
            }
            let (nodes, log_vol) = grid_nodes(model.domain(), grid)?;
            let log_mass = nodes.iter().zip(&log_vol).map(|(w, lv)| model.log_prior(w) + lv).collect();
            (nodes, log_mass)
        }
    };
    let loglik = super::log_likelihood_matrix(model, dataset, &nodes);
    let m_count = nodes.len();
    let n = dataset.len();
    let mut log_weights = Vec::with_capacity(m_count);
    for m in 0..m_count {
        // fixed summation order over samples
        let mut total = 0.0;
        for i in 0..n {
            total += loglik[i * m_count + m];
        }
        let lw = if beta == 0.0 { 0.0 } else { beta * total };
        log_weights.push(lw + log_mass[m]);
    }
    let draws: Vec<f64> = nodes.into_iter().flatten().collect();
    let log_evidence = crate::numeric::log_sum_exp(&log_weights);
    PosteriorEnsemble::assemble(
        d,
        draws,
        log_weights,
        beta,
        Provenance::Quadrature {
            grid: *grid,
            log_evidence,
        },
        n,
        loglik,
        Diagnostics::default(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinh_axis_integrates_smooth_function() {
        let spec = GridSpec::sinh(400, 0.05);
        let nodes = axis_nodes(-10.0, 10.0, &spec).unwrap();
        let total: f64 = nodes.iter().map(|(w, lv)| (-w * w).exp() * lv.exp()).sum();
        assert!((total - std::f64::consts::PI.sqrt()).abs() < 1e-10);
        // midpoint rule on cosh: relative error about du^2 / 24
        let du = 2.0 * 200.0f64.asinh() / 400.0;
        let width: f64 = nodes.iter().map(|(_, lv)| lv.exp()).sum();
        assert!((width - 20.0).abs() < 20.0 * du * du / 24.0 * 1.1, "{width}");
    }

    #[test]
    fn single_point_grid_is_box_centre() {
        let b = ParamBox::new(vec![-1.0, 0.0], vec![3.0, 2.0]).unwrap();
        let (nodes, _) = grid_nodes(&b, &GridSpec::uniform(1)).unwrap();
        assert_eq!(nodes, vec![vec![1.0, 1.0]]);
        let (nodes, _) = grid_nodes(&b, &GridSpec::sinh(1, 0.3)).unwrap();
        assert_eq!(nodes, vec![vec![1.0, 1.0]]);
    }

    #[test]
    fn three_dims_unsupported() {
        let b = ParamBox::cube(3, -1.0, 1.0).unwrap();
        assert!(matches!(
            grid_nodes(&b, &GridSpec::uniform(3)),
            Err(Error::UnsupportedDimension(3))
        ));
    }
}
