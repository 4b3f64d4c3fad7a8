use serde::{Deserialize, Serialize};

use super::gaussian_capacity;
use crate::error::{ensure_nonneg, ensure_positive, GavcError, Result};

/// Degraded two-receiver Gaussian broadcast channel with one jammer.
/// Receiver 1 (noise `sigma1_2`) is the strong user.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BroadcastSpec {
    pub gamma: f64,
    pub lambda: f64,
    pub sigma1_2: f64,
    pub sigma2_2: f64,
}

impl BroadcastSpec {
    pub fn new(gamma: f64, lambda: f64, sigma1_2: f64, sigma2_2: f64) -> Result<Self> {
        let spec = Self {
            gamma,
            lambda,
            sigma1_2,
            sigma2_2,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_nonneg("gamma", self.gamma)?;
        ensure_nonneg("lambda", self.lambda)?;
        ensure_positive("sigma1_2", self.sigma1_2)?;
        ensure_positive("sigma2_2", self.sigma2_2)?;
        if self.sigma1_2 >= self.sigma2_2 {
            return Err(GavcError::param(
                "sigma1_2",
                format!(
                    "strong user must be less noisy: sigma1_2 = {} >= sigma2_2 = {}",
                    self.sigma1_2, self.sigma2_2
                ),
            ));
        }
        Ok(())
    }

    /// Strong-user rate bound at cloud power fraction `alpha`.
    pub fn strong_rate(&self, alpha: f64) -> f64 {
        gaussian_capacity((1.0 - alpha) * self.gamma / (self.lambda + self.sigma1_2))
    }

    /// Weak-user rate bound at cloud power fraction `alpha`.
    pub fn weak_rate(&self, alpha: f64) -> f64 {
        gaussian_capacity(alpha * self.gamma / ((1.0 - alpha) * self.gamma + self.lambda + self.sigma2_2))
    }

    /// Sum-rate reachable by time sharing from the `alpha = lambda / gamma` corner.
    pub fn sum_rate_cap(&self) -> f64 {
        gaussian_capacity((self.gamma - self.lambda) / (self.lambda + self.sigma1_2))
            + gaussian_capacity(self.lambda / (self.gamma + self.sigma2_2))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateRegionPoint {
    pub r1: f64,
    pub r2: f64,
    /// Cloud (weak-user) power fraction; the time-sharing endpoints carry the
    /// corner value `lambda / gamma`.
    pub alpha: f64,
}

/// Achievable region: the `alpha`-parameterized boundary plus the segment from
/// the `alpha = lambda / gamma` corner to the all-to-strong-user point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BroadcastRegion {
    pub curve: Vec<RateRegionPoint>,
    pub time_sharing: Option<[RateRegionPoint; 2]>,
}

impl BroadcastRegion {
    pub fn empty() -> Self {
        Self {
            curve: Vec::new(),
            time_sharing: None,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.curve.is_empty() && self.time_sharing.is_none()
    }

    /// Curve points followed by the time-sharing endpoints.
    pub fn points(&self) -> Vec<RateRegionPoint> {
        let mut pts = self.curve.clone();
        if let Some(seg) = self.time_sharing {
            pts.extend(seg);
        }
        pts
    }

    /// Membership in the down-closed convex hull of the returned points.
    pub fn contains(&self, r1: f64, r2: f64) -> bool {
        if self.is_empty() || r1 < 0.0 || r2 < 0.0 {
            return false;
        }
        let pts = self.points();
        let max1 = pts.iter().map(|p| p.r1).fold(0.0, f64::max);
        let max2 = pts.iter().map(|p| p.r2).fold(0.0, f64::max);
        if r1 > max1 || r2 > max2 {
            return false;
        }
        let mut xy: Vec<(f64, f64)> = pts.iter().map(|p| (p.r1, p.r2)).collect();
        xy.push((0.0, max2));
        xy.push((max1, 0.0));
        let hull = upper_hull(xy);
        let h = hull
            .windows(2)
            .find(|w| r1 >= w[0].0 && r1 <= w[1].0)
            .map(|w| {
                let (x0, y0) = w[0];
                let (x1, y1) = w[1];
                if x1 == x0 {
                    y0.max(y1)
                } else {
                    y0 + (y1 - y0) * (r1 - x0) / (x1 - x0)
                }
            })
            .unwrap_or(hull[0].1);
        r2 <= h + 1e-12
    }
}

fn upper_hull(mut pts: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for p in pts {
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Achievable rate pairs for deterministic codes. Empty when the jammer is at
/// least as strong as the transmitter.
pub fn broadcast_region(spec: &BroadcastSpec, alpha_grid: &[f64]) -> Result<BroadcastRegion> {
    spec.validate()?;
    if spec.lambda >= spec.gamma {
        return Ok(BroadcastRegion::empty());
    }
    let corner = spec.lambda / spec.gamma;
    let mut curve = Vec::with_capacity(alpha_grid.len());
    for &alpha in alpha_grid {
        if !(alpha > corner && alpha <= 1.0) {
            return Err(GavcError::param(
                "alpha_grid",
                format!("alpha = {alpha} outside ({corner}, 1]"),
            ));
        }
        curve.push(RateRegionPoint {
            r1: spec.strong_rate(alpha),
            r2: spec.weak_rate(alpha),
            alpha,
        });
    }
    let start = RateRegionPoint {
        r1: spec.strong_rate(corner),
        r2: spec.weak_rate(corner),
        alpha: corner,
    };
    let end = RateRegionPoint {
        r1: start.r1 + start.r2,
        r2: 0.0,
        alpha: corner,
    };
    Ok(BroadcastRegion {
        curve,
        time_sharing: Some([start, end]),
    })
}
