//! Return-probability numerics: lattice Green sums over the Brillouin
//! zone, recurrence/transience classification, and position-resolved
//! return probabilities.
//!
//! The cumulative on-site Green sum `Σ_n p_n(0) = ∫ d^Dk/(2π)^D
//! [1 - f̃(k)]^{-1}` fixes the return probability through
//! `p_return = 1 - 1/Σ p_n(0)`; the walk is recurrent exactly when the
//! integral diverges at `k = 0`.

use crate::error::{Error, Result};
use crate::lattice::{Kernel, LatticeSpec, Site, StructureFunction};
use crate::quadrature::{
    nn_green_sum, shell_refined_integral, QuadratureSpec, Scheme, ShellOpts, ShellOutcome,
};
use std::cell::Cell;

/// Long-run fate of an unbiased walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recurrence {
    Recurrent,
    Transient,
}

impl std::fmt::Display for Recurrence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Recurrence::Recurrent => write!(f, "Recurrent"),
            Recurrence::Transient => write!(f, "Transient"),
        }
    }
}

/// Analytic recurrence criterion. Short-range walks are recurrent for
/// `D ≤ 2`; heavy-tailed walks with exponent `alpha` for `D ≤ min(alpha, 2)`.
/// The dimension may be any positive real; the marginal case is recurrent
/// (the underlying divergence is logarithmic).
pub fn recurrence_classification(dimension: f64, alpha: Option<f64>) -> Recurrence {
    let threshold = match alpha {
        Some(a) => a.min(2.0),
        None => 2.0,
    };
    if dimension <= threshold {
        Recurrence::Recurrent
    } else {
        Recurrence::Transient
    }
}

/// Classification of a concrete lattice spec.
pub fn classify_spec(spec: &LatticeSpec) -> Recurrence {
    let alpha = match spec.kernel {
        Kernel::NearestNeighbor => None,
        Kernel::LongRange { alpha, .. } => Some(alpha),
    };
    recurrence_classification(spec.dimension as f64, alpha)
}

/// Value of `Σ_n p_n(0)`, or a certified divergence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GreenSum {
    Finite { value: f64, error: f64 },
    Divergent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnProbabilityResult {
    /// In [0, 1]; exactly 1 for recurrent walks.
    pub p_return: f64,
    pub green_sum: GreenSum,
    pub quadrature_error: f64,
}

/// Default structure-function tail tolerance per dimension; chosen so the
/// truncated lattice sum stays affordable while the residual bound remains
/// below the quadrature error targets.
fn tail_tolerance_for(d: usize) -> f64 {
    match d {
        1 => 1e-7,
        2 => 0.02,
        _ => 0.2,
    }
}

/// `∫ d^Dk/(2π)^D 1/(1 - f̃(k))` with divergence detection. The dyadic
/// shell sequence around `k = 0` supplies the divergent/finite verdict; for
/// finite nearest-neighbor integrals the singularity-subtracted tensor rule
/// supplies the high-precision value.
pub fn green_sum_integral(spec: &LatticeSpec, quad: &QuadratureSpec) -> Result<GreenSum> {
    spec.validate()?;
    quad.validate()?;
    green_sum_at(spec, quad, None)
}

fn green_sum_at(spec: &LatticeSpec, quad: &QuadratureSpec, x: Option<&[i64]>) -> Result<GreenSum> {
    let d = spec.dimension;
    match spec.kernel {
        Kernel::NearestNeighbor => {
            let opts = shell_opts_for(d, quad, x);
            let numer = numer_for(x);
            let dd = d as f64;
            let shell = shell_refined_integral(
                d,
                &numer,
                |k: &[f64]| 1.0 - k.iter().map(|v| v.cos()).sum::<f64>() / dd,
                &opts,
            )?;
            match shell {
                ShellOutcome::Divergent { .. } => Ok(GreenSum::Divergent),
                ShellOutcome::Finite { value, error } => match quad.scheme {
                    Scheme::SingularitySubtracted if d >= 3 => {
                        let target: Vec<i64> = match x {
                            Some(x) => x.to_vec(),
                            None => vec![0; d],
                        };
                        let (v, e) = nn_green_sum(d, quad.nodes_per_axis, &target);
                        Ok(GreenSum::Finite {
                            value: v,
                            error: e.max(1e-12),
                        })
                    }
                    _ => Ok(GreenSum::Finite { value, error }),
                },
            }
        }
        Kernel::LongRange { .. } => {
            let sf = StructureFunction::new(spec, tail_tolerance_for(d))?;
            let rel = Cell::new(0.0f64);
            let denom = |k: &[f64]| {
                let s = sf.eval(k);
                let k_norm = k.iter().map(|v| v * v).sum::<f64>().sqrt();
                if s > 0.0 {
                    let r = sf.eval_error_bound(k_norm) / s;
                    if r > rel.get() {
                        rel.set(r);
                    }
                }
                s
            };
            let opts = shell_opts_for(d, quad, x);
            let numer = numer_for(x);
            match shell_refined_integral(d, &numer, denom, &opts)? {
                ShellOutcome::Divergent { .. } => Ok(GreenSum::Divergent),
                ShellOutcome::Finite { value, error } => Ok(GreenSum::Finite {
                    value,
                    error: error + rel.get() * value.abs(),
                }),
            }
        }
    }
}

fn shell_opts_for(d: usize, quad: &QuadratureSpec, x: Option<&[i64]>) -> ShellOpts {
    let mut opts = ShellOpts::from_spec(d, quad);
    if let Some(x) = x {
        let x_max = x.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0) as usize;
        opts.tensor_nodes = opts.tensor_nodes.max(8 * x_max + 16);
        opts.radial_nodes = opts.radial_nodes.max(x_max + 8);
        if d >= 2 {
            opts.azimuth_nodes = opts.azimuth_nodes.max(4 * x_max + 16);
            opts.polar_nodes = opts.polar_nodes.max(2 * x_max + 8);
        }
    }
    opts
}

fn numer_for(x: Option<&[i64]>) -> impl Fn(&[f64]) -> f64 + 'static {
    let x = x.map(|x| x.to_vec());
    move |k: &[f64]| match &x {
        None => 1.0,
        Some(x) => {
            let dot: f64 = k.iter().zip(x.iter()).map(|(kj, &c)| kj * c as f64).sum();
            dot.cos()
        }
    }
}

/// Return probability of the walk described by `spec`.
pub fn return_probability(
    spec: &LatticeSpec,
    quad: &QuadratureSpec,
) -> Result<ReturnProbabilityResult> {
    match green_sum_integral(spec, quad)? {
        GreenSum::Divergent => Ok(ReturnProbabilityResult {
            p_return: 1.0,
            green_sum: GreenSum::Divergent,
            quadrature_error: 0.0,
        }),
        GreenSum::Finite { value, error } => {
            let p = 1.0 - 1.0 / value;
            Ok(ReturnProbabilityResult {
                p_return: p,
                green_sum: GreenSum::Finite { value, error },
                quadrature_error: error / (value * value),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteReturnProbability {
    /// Probability the walk ever reaches the target site; 1 when recurrent.
    pub value: f64,
    pub recurrent: bool,
    pub error: f64,
}

/// Probability of ever reaching site `x ≠ 0`, the ratio of the off-site to
/// the on-site Green sum. Recurrent walks reach every site, so the result
/// is flagged and pinned to 1.
pub fn return_probability_to_site(
    spec: &LatticeSpec,
    x: &Site,
    quad: &QuadratureSpec,
) -> Result<SiteReturnProbability> {
    Ok(site_return_scan(spec, std::slice::from_ref(x), quad)?
        .pop()
        .expect("one site in, one result out"))
}

/// [`return_probability_to_site`] over several sites, computing the on-site
/// normalization once.
pub fn site_return_scan(
    spec: &LatticeSpec,
    sites: &[Site],
    quad: &QuadratureSpec,
) -> Result<Vec<SiteReturnProbability>> {
    spec.validate()?;
    quad.validate()?;
    for x in sites {
        if x.coords().len() != spec.dimension {
            return Err(Error::DimensionMismatch {
                expected: spec.dimension,
                got: x.coords().len(),
            });
        }
        if x.coords().iter().all(|&c| c == 0) {
            return Err(Error::InvalidArgument(
                "site return probability requires x ≠ 0".into(),
            ));
        }
    }
    let on_site = green_sum_integral(spec, quad)?;
    let (g0, e0) = match on_site {
        GreenSum::Divergent => {
            return Ok(sites
                .iter()
                .map(|_| SiteReturnProbability {
                    value: 1.0,
                    recurrent: true,
                    error: 0.0,
                })
                .collect())
        }
        GreenSum::Finite { value, error } => (value, error),
    };
    sites
        .iter()
        .map(|x| {
            let gx = match green_sum_at(spec, quad, Some(x.coords()))? {
                GreenSum::Finite { value, error } => (value, error),
                GreenSum::Divergent => {
                    return Err(Error::QuadratureUndecided(
                        "off-site integral diverged while the on-site one converged".into(),
                    ))
                }
            };
            let value = gx.0 / g0;
            let error = (gx.1 / g0).abs() + (gx.0 * e0 / (g0 * g0)).abs();
            Ok(SiteReturnProbability {
                value,
                recurrent: false,
                error,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Phase-diagram table
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseDiagramRow {
    pub dimension: usize,
    pub alpha: f64,
    pub p_return: f64,
    pub error: f64,
    pub classification: Recurrence,
}

/// Return-probability grid over heavy-tailed kernels; the classification
/// column reflects the numeric divergence verdict.
pub fn phase_diagram(
    dims: &[usize],
    alphas: &[f64],
    quad: &QuadratureSpec,
) -> Result<Vec<PhaseDiagramRow>> {
    let mut rows = Vec::with_capacity(dims.len() * alphas.len());
    for &d in dims {
        for &alpha in alphas {
            let spec = LatticeSpec::long_range(d, alpha)?;
            let res = return_probability(&spec, quad)?;
            let classification = match res.green_sum {
                GreenSum::Divergent => Recurrence::Recurrent,
                GreenSum::Finite { .. } => Recurrence::Transient,
            };
            rows.push(PhaseDiagramRow {
                dimension: d,
                alpha,
                p_return: res.p_return,
                error: res.quadrature_error,
                classification,
            });
        }
    }
    Ok(rows)
}

pub fn phase_diagram_csv(rows: &[PhaseDiagramRow]) -> String {
    let mut out = String::from("D,alpha,p_return,error,classification\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.dimension, r.alpha, r.p_return, r.error, r.classification
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const POLYA_3D: f64 = 0.340_537;

    #[test]
    fn recurrence_rule_cases() {
        assert_eq!(recurrence_classification(3.0, None), Recurrence::Transient);
        assert_eq!(recurrence_classification(2.0, None), Recurrence::Recurrent);
        assert_eq!(recurrence_classification(1.0, Some(0.5)), Recurrence::Transient);
        assert_eq!(recurrence_classification(2.0, Some(3.0)), Recurrence::Recurrent);
        // Marginal cases are recurrent.
        assert_eq!(recurrence_classification(2.0, Some(2.0)), Recurrence::Recurrent);
        assert_eq!(recurrence_classification(1.0, Some(1.0)), Recurrence::Recurrent);
        // Real dimensions are admitted.
        assert_eq!(recurrence_classification(2.5, None), Recurrence::Transient);
        assert_eq!(recurrence_classification(1.7, Some(1.8)), Recurrence::Recurrent);
    }

    #[test]
    fn polya_value_in_three_dimensions() {
        let spec = LatticeSpec::nearest_neighbor(3).unwrap();
        let res = return_probability(&spec, &QuadratureSpec::default()).unwrap();
        assert!(
            (res.p_return - POLYA_3D).abs() < 1e-4,
            "p_return {} (err {})",
            res.p_return,
            res.quadrature_error
        );
    }

    #[test]
    fn low_dimensional_walks_are_recurrent() {
        for d in [1usize, 2] {
            let spec = LatticeSpec::nearest_neighbor(d).unwrap();
            let res = return_probability(&spec, &QuadratureSpec::default()).unwrap();
            assert_eq!(res.green_sum, GreenSum::Divergent, "d={d}");
            assert_eq!(res.p_return, 1.0);
        }
    }

    #[test]
    fn transient_levy_walk_in_one_dimension() {
        let spec = LatticeSpec::long_range(1, 0.5).unwrap();
        let res = return_probability(&spec, &QuadratureSpec::default()).unwrap();
        assert!(
            res.p_return > 0.0 && res.p_return < 1.0,
            "p_return {}",
            res.p_return
        );
    }

    #[test]
    fn marginal_levy_walk_diverges() {
        let spec = LatticeSpec::long_range(1, 1.0).unwrap();
        let res = return_probability(&spec, &QuadratureSpec::default()).unwrap();
        assert_eq!(res.green_sum, GreenSum::Divergent);
    }

    #[test]
    fn quadrature_convergence_under_node_doubling() {
        let spec = LatticeSpec::nearest_neighbor(3).unwrap();
        let coarse = QuadratureSpec {
            nodes_per_axis: 32,
            ..Default::default()
        };
        let fine = QuadratureSpec {
            nodes_per_axis: 64,
            ..Default::default()
        };
        let (a, ea) = match green_sum_integral(&spec, &coarse).unwrap() {
            GreenSum::Finite { value, error } => (value, error),
            _ => panic!(),
        };
        let (b, _) = match green_sum_integral(&spec, &fine).unwrap() {
            GreenSum::Finite { value, error } => (value, error),
            _ => panic!(),
        };
        assert!(
            (a - b).abs() < 10.0 * ea.max(1e-9),
            "doubling moved the value by {} vs error {}",
            (a - b).abs(),
            ea
        );
    }

    #[test]
    fn return_probability_decreases_with_dimension() {
        let quad = QuadratureSpec {
            nodes_per_axis: 24,
            ..Default::default()
        };
        let mut prev = f64::INFINITY;
        for d in [3usize, 4, 5] {
            let spec = LatticeSpec::nearest_neighbor(d).unwrap();
            let res = return_probability(&spec, &quad).unwrap();
            assert!(
                res.p_return < prev,
                "d={d}: {} not below {prev}",
                res.p_return
            );
            assert!(res.p_return > 0.0);
            prev = res.p_return;
        }
    }

    #[test]
    fn site_return_probability_decreases_along_axis() {
        let spec = LatticeSpec::nearest_neighbor(3).unwrap();
        let quad = QuadratureSpec::default();
        let sites: Vec<Site> = (1..=3).map(|x| Site(vec![x, 0, 0])).collect();
        let ps = site_return_scan(&spec, &sites, &quad).unwrap();
        for w in ps.windows(2) {
            assert!(w[1].value < w[0].value, "{ps:?}");
        }
        for p in &ps {
            assert!(p.value > 0.0 && p.value < 1.0);
            assert!(!p.recurrent);
        }
    }

    #[test]
    fn site_return_is_one_for_recurrent_walks() {
        let spec = LatticeSpec::nearest_neighbor(2).unwrap();
        let res =
            return_probability_to_site(&spec, &Site(vec![3, 0]), &QuadratureSpec::default())
                .unwrap();
        assert!(res.recurrent);
        assert_eq!(res.value, 1.0);
    }

    #[test]
    fn site_return_rejects_origin() {
        let spec = LatticeSpec::nearest_neighbor(3).unwrap();
        assert!(return_probability_to_site(
            &spec,
            &Site(vec![0, 0, 0]),
            &QuadratureSpec::default()
        )
        .is_err());
    }

    #[test]
    fn phase_diagram_matches_rule_on_small_grid() {
        let rows = phase_diagram(&[1, 2], &[0.5, 2.0], &QuadratureSpec::default()).unwrap();
        for row in rows {
            let rule = recurrence_classification(row.dimension as f64, Some(row.alpha));
            assert_eq!(row.classification, rule, "row {row:?}");
            if row.classification == Recurrence::Recurrent {
                assert_eq!(row.p_return, 1.0);
            } else {
                assert!(row.p_return < 1.0);
            }
        }
    }
}
