use serde::{Deserialize, Serialize};

use super::jam::elementary_rates_unchecked;
use super::{full_rank_allocation, MimoSpec, PowerAllocation};
use crate::error::{ensure_positive, GavcError, Result};
use crate::rates::half_log;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case221 {
    /// `nu1 + lambda <= nu2`: the jammer cannot lift the quiet antenna past
    /// the loud one and the upper bound is tight.
    UpperBoundTight,
    /// `gamma > nu1 + lambda - nu2`: capacity at the waterfilling point.
    Capacity,
    /// `gamma <= nu1 + lambda - nu2`: the indifference point is achievable.
    Achievable,
}

impl Case221 {
    pub fn label(self) -> &'static str {
        match self {
            Case221::UpperBoundTight | Case221::Capacity => "capacity",
            Case221::Achievable => "achievable",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxMin221 {
    pub rate: f64,
    pub allocation: PowerAllocation,
    pub case: Case221,
    /// Power on antenna 0 at which the jammer is indifferent between axes.
    pub beta: f64,
    /// Unconstrained maximizer of the rate with the jammer on axis 0.
    pub gamma_point: f64,
    /// True when `gamma_point` had to be moved into `[beta, gamma]`.
    pub clamped: bool,
}

fn two_antenna_rate(a: f64, nu1: f64, nu2: f64, gamma: f64, lambda: f64) -> f64 {
    half_log(1.0 + a / (lambda + nu1)) + half_log(1.0 + (gamma - a) / nu2)
}

/// Root in `[0, gamma]` of the jammer-indifference quadratic.
fn indifference_power(nu1: f64, nu2: f64, gamma: f64, lambda: f64) -> Result<f64> {
    let a = nu1 - nu2;
    let b = nu2 * (gamma + nu2 + lambda) - nu1 * gamma + nu1 * (nu1 + lambda);
    let c = -nu1 * gamma * (nu1 + lambda);
    let roots: Vec<f64> = if a == 0.0 {
        vec![-c / b]
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            vec![]
        } else {
            let q = -0.5 * (b + b.signum() * disc.sqrt());
            vec![q / a, if q != 0.0 { c / q } else { 0.0 }]
        }
    };
    let slack = 1e-9 * gamma.max(1.0);
    roots
        .into_iter()
        .filter(|r| r.is_finite() && *r >= -slack && *r <= gamma + slack)
        .map(|r| r.clamp(0.0, gamma))
        .min_by(f64::total_cmp)
        .ok_or_else(|| GavcError::Numeric("no indifference root in [0, gamma]".into()))
}

/// Closed-form max-min rate for two antennas with a rank-one jammer.
pub fn maxmin_rate_221(spec: &MimoSpec) -> Result<MaxMin221> {
    if spec.m() != 2 {
        return Err(GavcError::DimensionMismatch {
            expected: 2,
            actual: spec.m(),
        });
    }
    spec.require_sorted()?;
    let (nu1, nu2) = (spec.nu()[0], spec.nu()[1]);
    let (gamma, lambda) = (spec.gamma(), spec.lambda());

    let gamma_point = 0.5 * (gamma - (nu1 + lambda - nu2));
    // Without a jammer both axes give the same rate and every split is
    // "indifferent"; plain waterfilling is optimal.
    let beta = if lambda == 0.0 {
        0.0
    } else {
        indifference_power(nu1, nu2, gamma, lambda)?
    };
    let case = if nu1 + lambda <= nu2 {
        Case221::UpperBoundTight
    } else if gamma > nu1 + lambda - nu2 {
        Case221::Capacity
    } else {
        Case221::Achievable
    };
    let a = gamma_point.max(beta).min(gamma);
    Ok(MaxMin221 {
        rate: two_antenna_rate(a, nu1, nu2, gamma, lambda),
        allocation: PowerAllocation {
            powers: vec![a, gamma - a],
            water_level: None,
        },
        case,
        beta,
        gamma_point,
        clamped: a != gamma_point,
    })
}

/// Mutual-waterfilling input, evaluated against a jammer on the quietest
/// antenna.
pub fn rate_wfillnew(spec: &MimoSpec) -> Result<f64> {
    spec.require_sorted()?;
    let (_, tx, _) = full_rank_allocation(spec);
    let nu = spec.nu();
    Ok(half_log(1.0 + tx.powers[0] / (nu[0] + spec.lambda()))
        + (1..spec.m()).map(|m| half_log(1.0 + tx.powers[m] / nu[m])).sum::<f64>())
}

/// Limit of the two-antenna max-min rate as the jammer power grows: the
/// transmitter equalizes SNR so the jammer gains nothing by choosing.
pub fn asymptotic_rate_221(spec: &MimoSpec) -> Result<(f64, PowerAllocation)> {
    if spec.m() != 2 {
        return Err(GavcError::DimensionMismatch {
            expected: 2,
            actual: spec.m(),
        });
    }
    spec.require_sorted()?;
    let (nu1, nu2, g) = (spec.nu()[0], spec.nu()[1], spec.gamma());
    let s = nu1 + nu2;
    Ok((
        half_log(1.0 + g / s),
        PowerAllocation {
            powers: vec![g * nu1 / s, g * nu2 / s],
            water_level: None,
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxMinSolution {
    /// Guaranteed rate of `allocation` (min over jamming axes).
    pub rate: f64,
    pub allocation: PowerAllocation,
    /// Upper bound on the max-min value from the jammer's mixed strategy.
    pub dual_bound: f64,
    /// Jammer's mixing weights over the coordinate axes.
    pub jammer_mix: Vec<f64>,
    /// Axes whose rate is within `tol` of the minimum at the solution.
    pub binding: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
}

/// Euclidean projection onto the probability simplex.
pub(crate) fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (k, &x) in u.iter().enumerate() {
        css += x;
        let t = (css - 1.0) / (k + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Transmitter's best response to a jammer that hits axis `m` with
/// probability `w[m]`. The weighted objective separates over antennas, so
/// this is a waterfilling-style search on the common marginal value.
fn best_response(spec: &MimoSpec, w: &[f64]) -> Vec<f64> {
    let gamma = spec.gamma();
    let m = spec.m();
    if gamma == 0.0 {
        return vec![0.0; m];
    }
    let lambda = spec.lambda();
    let nu = spec.nu();
    let slope0 = |j: usize| (1.0 - w[j]) / nu[j] + w[j] / (nu[j] + lambda);
    let power_at = |j: usize, mu: f64| -> f64 {
        if mu >= slope0(j) {
            return 0.0;
        }
        let (a, b) = (nu[j], nu[j] + lambda);
        let bq = mu * (a + b) - 1.0;
        let c0 = mu * a * b - (1.0 - w[j]) * b - w[j] * a;
        let disc = (bq * bq - 4.0 * mu * c0).sqrt();
        if bq >= 0.0 {
            -2.0 * c0 / (bq + disc)
        } else {
            (-bq + disc) / (2.0 * mu)
        }
    };
    let total = |mu: f64| (0..m).map(|j| power_at(j, mu)).sum::<f64>();
    let mut hi = (0..m).map(slope0).fold(0.0, f64::max);
    let mut lo = hi;
    while total(lo) < gamma {
        lo *= 0.5;
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if total(mid) >= gamma {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x: Vec<f64> = (0..m).map(|j| power_at(j, lo)).collect();
    let s: f64 = x.iter().sum();
    x.into_iter().map(|p| p * gamma / s).collect()
}

/// Max-min rate over diagonal inputs against a jammer restricted to the
/// coordinate axes, for any number of antennas.
///
/// Works on the equivalent min-max over the jammer's mixed strategies:
/// projected gradient descent on the jammer weights, with the transmitter's
/// exact best response inside. Stops when the duality gap is below `tol`.
pub fn maxmin_solver_general(spec: &MimoSpec, tol: f64) -> Result<MaxMinSolution> {
    ensure_positive("tol", tol)?;
    const MAX_ITER: usize = 20_000;
    let m = spec.m();
    let mut w = vec![1.0 / m as f64; m];
    let dual = |w: &[f64]| {
        let x = best_response(spec, w);
        let l = elementary_rates_unchecked(spec, &x);
        let d: f64 = l.iter().zip(w).map(|(a, b)| a * b).sum();
        (d, l, x)
    };

    let (mut d, mut l, mut x) = dual(&w);
    let mut best_dual = d;
    let mut best_w = w.clone();
    let mut best_primal = l.iter().copied().fold(f64::INFINITY, f64::min);
    let mut best_x = x.clone();
    let mut step = 1.0;
    let mut iterations = 0;

    while best_dual - best_primal > tol && iterations < MAX_ITER {
        iterations += 1;
        let mut moved = false;
        while step > 1e-18 {
            let trial: Vec<f64> = w.iter().zip(&l).map(|(wi, gi)| wi - step * gi).collect();
            let trial = project_simplex(&trial);
            let delta: Vec<f64> = trial.iter().zip(&w).map(|(a, b)| a - b).collect();
            let lin: f64 = delta.iter().zip(&l).map(|(a, b)| a * b).sum();
            let quad: f64 = delta.iter().map(|a| a * a).sum::<f64>() / (2.0 * step);
            let (d2, l2, x2) = dual(&trial);
            if d2 <= d + lin + quad + 1e-15 {
                moved = delta.iter().any(|v| *v != 0.0);
                w = trial;
                (d, l, x) = (d2, l2, x2);
                step *= 1.5;
                break;
            }
            step *= 0.5;
        }
        if d < best_dual {
            best_dual = d;
            best_w = w.clone();
        }
        let p = l.iter().copied().fold(f64::INFINITY, f64::min);
        if p > best_primal {
            best_primal = p;
            best_x = x.clone();
        }
        if !moved {
            break;
        }
    }

    let rates = elementary_rates_unchecked(spec, &best_x);
    let binding = rates
        .iter()
        .enumerate()
        .filter(|(_, r)| **r - best_primal <= tol.max(1e-12))
        .map(|(i, _)| i)
        .collect();
    Ok(MaxMinSolution {
        rate: best_primal,
        allocation: PowerAllocation {
            powers: best_x,
            water_level: None,
        },
        dual_bound: best_dual,
        jammer_mix: best_w,
        binding,
        iterations,
        converged: best_dual - best_primal <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ScalarAvcSpec, SeededRng};
    use crate::mimo::{full_rank_rate, upper_bound_rate};
    use crate::rates::randomized_capacity;
    use rand::Rng;

    fn spec(nu: &[f64], g: f64, l: f64) -> MimoSpec {
        MimoSpec::new(nu.to_vec(), g, l).unwrap()
    }

    fn grid_maxmin(s: &MimoSpec, steps: usize) -> f64 {
        let g = s.gamma();
        let mut best = f64::NEG_INFINITY;
        match s.m() {
            2 => {
                for i in 0..=steps {
                    let a = g * i as f64 / steps as f64;
                    let r = elementary_rates_unchecked(s, &[a, g - a]);
                    best = best.max(r.into_iter().fold(f64::INFINITY, f64::min));
                }
            }
            3 => {
                for i in 0..=steps {
                    for j in 0..=steps - i {
                        let a = g * i as f64 / steps as f64;
                        let b = g * j as f64 / steps as f64;
                        let r = elementary_rates_unchecked(s, &[a, b, (g - a - b).max(0.0)]);
                        best = best.max(r.into_iter().fold(f64::INFINITY, f64::min));
                    }
                }
            }
            _ => unreachable!(),
        }
        best
    }

    #[test]
    fn closed_form_case_one() {
        let r = maxmin_rate_221(&spec(&[1.0, 3.0], 4.0, 2.0)).unwrap();
        assert_eq!(r.case, Case221::UpperBoundTight);
        assert_eq!(r.case.label(), "capacity");
        assert!((r.rate - (5.0f64 / 3.0).log2()).abs() < 1e-12);
        assert!((r.rate - upper_bound_rate(&spec(&[1.0, 3.0], 4.0, 2.0))).abs() < 1e-12);
    }

    #[test]
    fn closed_form_case_two() {
        let s = spec(&[1.0, 3.0], 4.0, 4.0);
        let r = maxmin_rate_221(&s).unwrap();
        assert_eq!(r.case, Case221::Capacity);
        assert!((r.gamma_point - 1.0).abs() < 1e-15);
        assert!((r.beta - (17.0 - 249f64.sqrt()) / 2.0).abs() < 1e-12);
        let expect = 0.5 * 1.2f64.log2() + 0.5;
        assert!((r.rate - expect).abs() < 1e-12, "{}", r.rate);
        assert!(r.rate > full_rank_rate(&s) + 0.04);
        let g = grid_maxmin(&s, 200_000);
        assert!(r.rate >= g - 1e-12 && r.rate - g < 1e-5);
    }

    #[test]
    fn closed_form_case_three() {
        let s = spec(&[1.0, 3.0], 4.0, 10.0);
        let r = maxmin_rate_221(&s).unwrap();
        assert_eq!(r.case, Case221::Achievable);
        assert_eq!(r.case.label(), "achievable");
        let beta = (29.0 - 753f64.sqrt()) / 2.0;
        assert!((r.beta - beta).abs() < 1e-12);
        assert!((r.allocation.powers[0] - beta).abs() < 1e-12);
        assert!((r.rate - 0.575_417_184_730_012_3).abs() < 1e-12, "{}", r.rate);
        let g = grid_maxmin(&s, 200_000);
        assert!(r.rate >= g - 1e-12 && r.rate - g < 1e-5);
    }

    #[test]
    fn closed_form_matches_grid_randomly() {
        let mut rng = SeededRng::new(31).stream();
        for _ in 0..300 {
            let n1 = rng.random_range(0.1..4.0);
            let s = spec(
                &[n1, n1 + rng.random_range(0.0..4.0)],
                rng.random_range(0.0..10.0),
                rng.random_range(0.0..10.0),
            );
            let r = maxmin_rate_221(&s).unwrap();
            let g = grid_maxmin(&s, 20_000);
            assert!(r.rate >= g - 1e-9 && r.rate <= g + 2e-4, "{s:?}: {} vs {g}", r.rate);
            let tot: f64 = r.allocation.total();
            assert!((tot - s.gamma()).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_needs_ordering() {
        assert!(maxmin_rate_221(&spec(&[3.0, 1.0], 4.0, 4.0)).is_err());
        assert!(maxmin_rate_221(&spec(&[1.0, 2.0, 3.0], 4.0, 4.0)).is_err());
    }

    #[test]
    fn large_jammer_limit() {
        let (r, a) = asymptotic_rate_221(&spec(&[1.0, 3.0], 4.0, 1.0)).unwrap();
        assert!((r - 0.5).abs() < 1e-15);
        assert_eq!(a.powers, vec![1.0, 3.0]);
        let big = maxmin_rate_221(&spec(&[1.0, 3.0], 4.0, 1e6)).unwrap();
        assert!((big.rate - 0.5).abs() < 1e-3, "{}", big.rate);
        let (sym, _) = asymptotic_rate_221(&spec(&[1.0, 1.0 + 1e-9], 4.0, 1.0)).unwrap();
        assert!((sym - 0.5 * 3f64.log2()).abs() < 1e-8);
    }

    #[test]
    fn wfillnew_examples() {
        let s = spec(&[1.0, 3.0], 4.0, 2.0);
        assert!((rate_wfillnew(&s).unwrap() - upper_bound_rate(&s)).abs() < 1e-12);
        let s = spec(&[1.0, 3.0], 4.0, 4.0);
        assert!(rate_wfillnew(&s).unwrap() > full_rank_rate(&s) + 0.01);
        let s1 = spec(&[0.5], 2.0, 1.5);
        let c = randomized_capacity(&ScalarAvcSpec::new(2.0, 1.5, 0.5).unwrap()).unwrap();
        assert!((rate_wfillnew(&s1).unwrap() - c).abs() < 1e-12);
        assert!(rate_wfillnew(&spec(&[3.0, 1.0], 4.0, 4.0)).is_err());
    }

    #[test]
    fn wfillnew_is_guaranteed_by_first_axis() {
        // The formula assumes the jammer's best axis is the quietest one.
        let mut rng = SeededRng::new(37).stream();
        for _ in 0..2000 {
            let m = rng.random_range(1..6);
            let mut nu: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..5.0)).collect();
            nu.sort_by(f64::total_cmp);
            let s = spec(&nu, rng.random_range(0.0..10.0), rng.random_range(0.0..10.0));
            let (_, tx, _) = full_rank_allocation(&s);
            let worst = elementary_rates_unchecked(&s, &tx.powers)
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            assert!((rate_wfillnew(&s).unwrap() - worst).abs() < 1e-12);
        }
    }

    #[test]
    fn solver_matches_closed_form() {
        for l in [4.0, 1.0, 10.0, 0.3, 0.0] {
            let s = spec(&[1.0, 3.0], 4.0, l);
            let sol = maxmin_solver_general(&s, 1e-6).unwrap();
            let cf = maxmin_rate_221(&s).unwrap();
            assert!(sol.converged, "lambda {l}: {sol:?}");
            assert!(
                (sol.rate - cf.rate).abs() < 1e-5,
                "lambda {l}: {} vs {}",
                sol.rate,
                cf.rate
            );
        }
    }

    #[test]
    fn solver_symmetric_no_jammer() {
        let sol = maxmin_solver_general(&spec(&[1.0, 1.0, 1.0], 3.0, 0.0), 1e-9).unwrap();
        assert!((sol.rate - 1.5).abs() < 1e-12);
        for p in &sol.allocation.powers {
            assert!((p - 1.0).abs() < 1e-9);
        }
        assert!(maxmin_solver_general(&spec(&[1.0], 1.0, 1.0), 0.0).is_err());
    }

    #[test]
    fn solver_matches_grid_three_antennas() {
        let mut rng = SeededRng::new(41).stream();
        for _ in 0..20 {
            let nu: Vec<f64> = (0..3).map(|_| rng.random_range(0.2..4.0)).collect();
            let s = spec(&nu, rng.random_range(0.5..8.0), rng.random_range(0.1..8.0));
            let sol = maxmin_solver_general(&s, 1e-7).unwrap();
            let g = grid_maxmin(&s, 600);
            assert!(sol.converged);
            assert!(sol.rate >= g - 1e-7, "{s:?}: {} vs grid {g}", sol.rate);
            assert!(sol.rate <= g + 2e-3);
        }
    }

    #[test]
    fn sandwich() {
        let mut rng = SeededRng::new(43).stream();
        for _ in 0..300 {
            let m = rng.random_range(1..6);
            let mut nu: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..5.0)).collect();
            nu.sort_by(f64::total_cmp);
            let s = spec(&nu, rng.random_range(0.0..10.0), rng.random_range(0.0..10.0));
            let sol = maxmin_solver_general(&s, 1e-8).unwrap();
            assert!(sol.converged);
            assert!(full_rank_rate(&s) <= sol.rate + 1e-9, "{s:?}");
            assert!(sol.rate <= upper_bound_rate(&s) + 1e-9, "{s:?}");
            assert!(rate_wfillnew(&s).unwrap() <= sol.rate + 1e-9);
        }
    }

    #[test]
    fn simplex_projection() {
        assert_eq!(project_simplex(&[0.5, 0.5]), vec![0.5, 0.5]);
        assert_eq!(project_simplex(&[2.0, 0.0]), vec![1.0, 0.0]);
        let p = project_simplex(&[0.3, -0.2, 0.9]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(p.iter().all(|x| *x >= 0.0));
    }
}
