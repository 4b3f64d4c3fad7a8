use serde::{Deserialize, Serialize};

use super::{gaussian_capacity, half_log};
use crate::error::{ensure_finite, ensure_nonneg, ensure_positive, GavcError, Result};

/// Channel `Y = X + T + s + W` where the encoder knows the Gaussian
/// interference `T ~ N(0, sigma_t2)` non-causally.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpcSpec {
    pub gamma: f64,
    pub lambda: f64,
    pub sigma_w2: f64,
    pub sigma_t2: f64,
}

impl DpcSpec {
    pub fn new(gamma: f64, lambda: f64, sigma_w2: f64, sigma_t2: f64) -> Result<Self> {
        ensure_positive("sigma_w2", sigma_w2)?;
        let spec = Self {
            gamma,
            lambda,
            sigma_w2,
            sigma_t2,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Noiseless variant used for watermarking (`sigma_w2 = 0`); the attack
    /// power must then be positive.
    pub fn watermark(gamma: f64, lambda: f64, sigma_t2: f64) -> Result<Self> {
        ensure_positive("lambda", lambda)?;
        let spec = Self {
            gamma,
            lambda,
            sigma_w2: 0.0,
            sigma_t2,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_nonneg("gamma", self.gamma)?;
        ensure_nonneg("lambda", self.lambda)?;
        ensure_nonneg("sigma_w2", self.sigma_w2)?;
        ensure_nonneg("sigma_t2", self.sigma_t2)?;
        if self.lambda + self.sigma_w2 <= 0.0 {
            return Err(GavcError::param(
                "sigma_w2",
                "lambda + sigma_w2 must be > 0 (noise-free, jammer-free channel)",
            ));
        }
        Ok(())
    }

    /// `sqrt(gamma * sigma_t2)`, the cross-term scale.
    fn cross(&self) -> f64 {
        (self.gamma * self.sigma_t2).sqrt()
    }
}

/// Costa's inflation factor `gamma / (gamma + lambda + sigma_w2)`.
pub fn costa_alpha(spec: &DpcSpec) -> f64 {
    spec.gamma / (spec.gamma + spec.lambda + spec.sigma_w2)
}

/// A dirty-paper design point `(alpha, rho)` and the powers it induces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpcParams {
    pub alpha: f64,
    pub rho: f64,
    /// Auxiliary codeword power `P_U`.
    pub p_u: f64,
    /// Interference-plus-noise power `P_I`.
    pub p_i: f64,
    /// Received power `P_Y`.
    pub p_y: f64,
    /// Quantizer gain squared; `None` unless `P_U > (1 - rho^2) gamma` and
    /// `sigma_t2 > 0`.
    pub beta2: Option<f64>,
    /// Power of the received signal along the auxiliary codeword.
    pub received_power: f64,
}

impl DpcParams {
    pub fn new(spec: &DpcSpec, alpha: f64, rho: f64) -> Result<Self> {
        spec.validate()?;
        ensure_finite("alpha", alpha)?;
        ensure_finite("rho", rho)?;
        if rho.abs() > 1.0 {
            return Err(GavcError::param("rho", format!("must lie in [-1, 1], got {rho}")));
        }
        let c = spec.cross();
        let p_u = spec.gamma + 2.0 * rho * alpha * c + alpha * alpha * spec.sigma_t2;
        if p_u <= 0.0 {
            return Err(GavcError::Degenerate(format!(
                "auxiliary power P_U = {p_u} at alpha = {alpha}, rho = {rho}"
            )));
        }
        let p_i = spec.lambda + spec.sigma_w2;
        let p_y = spec.gamma + 2.0 * rho * c + spec.sigma_t2 + p_i;
        let innov = (1.0 - rho * rho) * spec.gamma;
        let beta2 = (p_u > innov && spec.sigma_t2 > 0.0).then(|| (p_u / spec.sigma_t2) * (1.0 + innov / (p_u - innov)));
        let along = spec.gamma + (1.0 + alpha) * rho * c + alpha * spec.sigma_t2;
        Ok(Self {
            alpha,
            rho,
            p_u,
            p_i,
            p_y,
            beta2,
            received_power: along * along / p_u,
        })
    }

    pub fn beta(&self) -> Option<f64> {
        self.beta2.map(f64::sqrt)
    }
}

/// `(received_power > lambda, received_power - lambda)`.
pub fn dpc_feasible(spec: &DpcSpec, params: &DpcParams) -> Result<(bool, f64)> {
    spec.validate()?;
    if params.p_u <= 0.0 {
        return Err(GavcError::Degenerate("auxiliary power P_U = 0".into()));
    }
    let margin = params.received_power - spec.lambda;
    Ok((margin > 0.0, margin))
}

/// Achievable dirty-paper rate at a feasible design point.
pub fn dpc_rate(spec: &DpcSpec, params: &DpcParams) -> Result<f64> {
    let (ok, margin) = dpc_feasible(spec, params)?;
    if !ok {
        return Err(GavcError::Infeasible(format!(
            "received power along U falls short of the jammer by {}",
            -margin
        )));
    }
    if params.rho.abs() >= 1.0 {
        return Err(GavcError::Degenerate("|rho| = 1 leaves no innovation power".into()));
    }
    Ok(rate_expression(spec, params))
}

/// The rate expression without the feasibility gate; the optimizer calls this
/// on points it has already screened.
pub(crate) fn rate_expression(spec: &DpcSpec, p: &DpcParams) -> f64 {
    let innov = (1.0 - p.rho * p.rho) * spec.gamma;
    let one_minus_alpha = 1.0 - p.alpha;
    let num = innov * p.p_y;
    let den = one_minus_alpha * one_minus_alpha * innov * spec.sigma_t2 + p.p_i * p.p_u;
    half_log(num / den)
}

/// Whether Costa's point `(alpha_0, 0)` is feasible, in which case the
/// dirty-paper code reaches `(1/2) log(1 + gamma / (lambda + sigma_w2))`.
pub fn dpc_capacity_condition(spec: &DpcSpec) -> Result<bool> {
    spec.validate()?;
    let a0 = costa_alpha(spec);
    let den = spec.gamma + a0 * a0 * spec.sigma_t2;
    if den <= 0.0 {
        return Ok(false);
    }
    let num = spec.gamma + a0 * spec.sigma_t2;
    Ok(spec.lambda < num * num / den)
}

/// Outer bound: zero once the jammer can imitate `X + T`, otherwise the
/// interference-free capacity.
pub fn dpc_outer_bound(spec: &DpcSpec) -> Result<f64> {
    spec.validate()?;
    let reach = spec.sigma_t2.sqrt() + spec.gamma.sqrt();
    if spec.lambda > reach * reach {
        Ok(0.0)
    } else {
        Ok(gaussian_capacity(spec.gamma / (spec.lambda + spec.sigma_w2)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CovertextPower {
    pub sigma_t2: f64,
    /// The raw expression was negative and has been clamped to zero: no
    /// covertext power is needed at this attack ratio.
    pub clamped: bool,
}

/// Covertext variance at which Costa's point becomes feasible for a noiseless
/// watermarking channel with attack ratio `lambda / gamma`.
pub fn watermark_covertext_power(gamma: f64, lambda: f64) -> Result<CovertextPower> {
    ensure_positive("gamma", gamma)?;
    ensure_nonneg("lambda", lambda)?;
    let b = lambda / gamma;
    let raw = gamma * (0.5 * b * (5.0 + 4.0 * b).sqrt() - 0.5 * b - 1.0);
    Ok(if raw < 0.0 {
        CovertextPower {
            sigma_t2: 0.0,
            clamped: true,
        }
    } else {
        CovertextPower {
            sigma_t2: raw,
            clamped: false,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ScalarAvcSpec;
    use crate::rates::randomized_capacity;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn params_derived_powers() {
        let spec = DpcSpec::new(4.0, 5.0, 1.0, 2.0).unwrap();
        let p = DpcParams::new(&spec, 0.4, 0.0).unwrap();
        assert!(close(p.p_u, 4.32, 1e-15));
        assert!(close(p.p_i, 6.0, 1e-15));
        assert!(close(p.p_y, 12.0, 1e-15));
        // (4 + 0.8)^2 / 4.32
        assert!(close(p.received_power, 23.04 / 4.32, 1e-14));
        // (4.32 / 2) (1 + 4 / 0.32)
        assert!(close(p.beta2.unwrap(), 29.16, 1e-13));
    }

    #[test]
    fn zero_interference_reduces_to_gavc_threshold() {
        for (g, l) in [(2.0, 1.0), (1.0, 2.0), (3.0, 3.0)] {
            let spec = DpcSpec::new(g, l, 1.0, 0.0).unwrap();
            for (a, r) in [(0.0, 0.0), (0.7, 0.3), (-1.0, -0.5)] {
                let p = DpcParams::new(&spec, a, r).unwrap();
                assert!(close(p.received_power, g, 1e-14));
                assert_eq!(dpc_feasible(&spec, &p).unwrap().0, g > l);
            }
        }
    }

    #[test]
    fn boundary_is_infeasible() {
        let spec = DpcSpec::new(5.0, 5.0, 1.0, 0.0).unwrap();
        let p = DpcParams::new(&spec, 0.0, 0.0).unwrap();
        let (ok, margin) = dpc_feasible(&spec, &p).unwrap();
        assert!(!ok);
        assert_eq!(margin, 0.0);
        assert!(matches!(dpc_rate(&spec, &p), Err(GavcError::Infeasible(_))));
    }

    #[test]
    fn zero_aux_power_is_degenerate() {
        let spec = DpcSpec::new(0.0, 1.0, 1.0, 0.0).unwrap();
        assert!(matches!(DpcParams::new(&spec, 0.0, 0.0), Err(GavcError::Degenerate(_))));
    }

    #[test]
    fn unit_correlation_is_degenerate() {
        let spec = DpcSpec::new(4.0, 1.0, 1.0, 2.0).unwrap();
        let p = DpcParams::new(&spec, 0.5, 1.0).unwrap();
        assert!(matches!(dpc_rate(&spec, &p), Err(GavcError::Degenerate(_))));
    }

    #[test]
    fn interference_as_noise_at_origin() {
        let spec = DpcSpec::new(6.0, 1.0, 0.5, 2.0).unwrap();
        let p = DpcParams::new(&spec, 0.0, 0.0).unwrap();
        let r = dpc_rate(&spec, &p).unwrap();
        assert!(close(r, 0.5 * (1.0 + 6.0 / 3.5f64).log2(), 1e-12));
    }

    #[test]
    fn costa_point_reaches_capacity() {
        let spec = DpcSpec::new(4.0, 5.0, 1.0, 2.0).unwrap();
        let a0 = costa_alpha(&spec);
        assert!(close(a0, 0.4, 1e-15));
        let p = DpcParams::new(&spec, a0, 0.0).unwrap();
        let r = dpc_rate(&spec, &p).unwrap();
        let c = randomized_capacity(&ScalarAvcSpec::new(4.0, 5.0, 1.0).unwrap()).unwrap();
        assert!(close(r, c, 1e-12));
        assert!(close(c, 0.5 * (5.0f64 / 3.0).log2(), 1e-12));
    }

    #[test]
    fn capacity_condition_examples() {
        assert!(dpc_capacity_condition(&DpcSpec::new(4.0, 5.0, 1.0, 2.0).unwrap()).unwrap());
        assert!(!dpc_capacity_condition(&DpcSpec::new(3.5, 5.0, 1.0, 2.0).unwrap()).unwrap());
        for (g, l) in [(2.0, 1.0), (1.0, 2.0), (1.0, 1.0)] {
            let spec = DpcSpec::new(g, l, 1.0, 0.0).unwrap();
            assert_eq!(dpc_capacity_condition(&spec).unwrap(), l < g);
        }
    }

    #[test]
    fn outer_bound_examples() {
        assert_eq!(
            dpc_outer_bound(&DpcSpec::new(1.0, 2.0, 1.0, 0.0).unwrap()).unwrap(),
            0.0
        );
        assert_eq!(
            dpc_outer_bound(&DpcSpec::new(1.0, 5.0, 1.0, 1.0).unwrap()).unwrap(),
            0.0
        );
        let r = dpc_outer_bound(&DpcSpec::new(4.0, 5.0, 1.0, 2.0).unwrap()).unwrap();
        assert!(close(r, 0.5 * (1.0 + 4.0f64 / 6.0).log2(), 1e-12));
    }

    #[test]
    fn watermark_power() {
        let w = watermark_covertext_power(1.0, 1.0).unwrap();
        assert!(w.sigma_t2.abs() < 1e-15 && !w.clamped);
        let w = watermark_covertext_power(1.0, 4.0).unwrap();
        assert!(close(w.sigma_t2, 2.0 * 21f64.sqrt() - 3.0, 1e-14));
        let w = watermark_covertext_power(1.0, 0.5).unwrap();
        assert!(w.clamped && w.sigma_t2 == 0.0);
        // Lower-order terms still matter at beta = 4, so the ratio is ~1267
        // rather than 100^1.5; the beta^1.5 growth shows up asymptotically.
        let ratio = watermark_covertext_power(1.0, 400.0).unwrap().sigma_t2
            / watermark_covertext_power(1.0, 4.0).unwrap().sigma_t2;
        assert!(close(ratio, 1_267.039_486_230_03, 1e-9), "{ratio}");
        for b in [1e4, 1e6, 1e8] {
            let s = watermark_covertext_power(1.0, b).unwrap().sigma_t2;
            assert!((s / f64::powf(b, 1.5) - 1.0).abs() < 1.0 / b.sqrt(), "{b}");
        }
        assert!(watermark_covertext_power(0.0, 1.0).is_err());
    }

    #[test]
    fn watermark_power_meets_threshold() {
        // At the returned covertext power Costa's point is exactly on the boundary.
        for (g, l) in [(1.0, 4.0), (2.0, 7.0), (0.5, 3.0)] {
            let st = watermark_covertext_power(g, l).unwrap().sigma_t2;
            let spec = DpcSpec::watermark(g, l, st).unwrap();
            let a0 = costa_alpha(&spec);
            let p = DpcParams::new(&spec, a0, 0.0).unwrap();
            assert!(close(p.received_power, l, 1e-12), "{} vs {l}", p.received_power);
        }
    }
}
