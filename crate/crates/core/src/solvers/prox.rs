use serde::{Deserialize, Serialize};

use crate::linalg::{norm2, norm_inf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallKind {
    L2,
    Linf,
}

/// Soft threshold `sign(vᵢ)·max(|vᵢ| − t, 0)`, the proximal map of `t‖·‖₁`.
pub fn prox_l1(v: &[f64], t: f64) -> Vec<f64> {
    v.iter().map(|&x| soft(x, t)).collect()
}

#[inline]
pub(crate) fn soft(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Euclidean projection onto `{u : ‖u − center‖ ≤ radius}` in the chosen norm.
pub fn project_ball(v: &[f64], kind: BallKind, center: &[f64], radius: f64) -> Vec<f64> {
    debug_assert_eq!(v.len(), center.len());
    match kind {
        BallKind::Linf => v
            .iter()
            .zip(center)
            .map(|(&x, &c)| x.clamp(c - radius, c + radius))
            .collect(),
        BallKind::L2 => {
            let diff: Vec<f64> = v.iter().zip(center).map(|(x, c)| x - c).collect();
            let dist = norm2(&diff);
            if dist <= radius {
                v.to_vec()
            } else {
                let s = radius / dist;
                center.iter().zip(&diff).map(|(c, d)| c + s * d).collect()
            }
        }
    }
}

/// Distance from `v` to the ball, measured in the ball's own norm.
pub fn ball_violation(v: &[f64], kind: BallKind, center: &[f64], radius: f64) -> f64 {
    let diff: Vec<f64> = v.iter().zip(center).map(|(x, c)| x - c).collect();
    let dist = match kind {
        BallKind::L2 => norm2(&diff),
        BallKind::Linf => norm_inf(&diff),
    };
    (dist - radius).max(0.0)
}
