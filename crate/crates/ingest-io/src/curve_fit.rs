use thiserror::Error;

/// One sample of a manufacturer head curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpCurvePoint {
    /// Flow (m³/s), nonnegative.
    pub q: f64,
    /// Head gain (m), nonnegative.
    pub g: f64,
}

#[derive(Debug, Error)]
pub enum FitError {
    #[error("need at least 3 curve points, got {0}")]
    TooFewPoints(usize),
    #[error("degenerate points: singular normal equations")]
    Singular,
    #[error("curve points must be strictly increasing in flow")]
    NotIncreasing,
    #[error("curve points must be nonnegative")]
    Negative,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PumpCurveFit {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Root-mean-square residual of the returned coefficients.
    pub rms: f64,
    /// Boundary-pinning notes, empty for a clean unconstrained fit.
    pub warnings: Vec<String>,
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let mut m = [[0.0; 4]; 3];
    for i in 0..3 {
        m[i][..3].copy_from_slice(&a[i]);
        m[i][3] = b[i];
    }
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        if m[piv][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, piv);
        let d = m[col][col];
        for x in m[col].iter_mut() {
            *x /= d;
        }
        for i in 0..3 {
            if i != col {
                let f = m[i][col];
                for k in 0..4 {
                    m[i][k] -= f * m[col][k];
                }
            }
        }
    }
    Some([m[0][3], m[1][3], m[2][3]])
}

fn solve2(a: [[f64; 2]; 2], b: [f64; 2]) -> Option<[f64; 2]> {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    if det.abs() < 1e-12 {
        return None;
    }
    Some([(b[0] * a[1][1] - b[1] * a[0][1]) / det, (a[0][0] * b[1] - a[1][0] * b[0]) / det])
}

fn rms(points: &[PumpCurvePoint], alpha: f64, beta: f64, gamma: f64) -> f64 {
    let ss: f64 = points
        .iter()
        .map(|p| {
            let r = p.g - (alpha * p.q * p.q + beta * p.q + gamma);
            r * r
        })
        .sum();
    (ss / points.len() as f64).sqrt()
}

/// Least-squares quadratic fit of a head curve. When the unconstrained fit
/// violates `alpha < 0` or `gamma > 0`, the violated coefficient is pinned
/// just inside its boundary and the rest is refit, with a warning.
pub fn fit_pump_curve(points: &[PumpCurvePoint]) -> Result<PumpCurveFit, FitError> {
    if points.len() < 3 {
        return Err(FitError::TooFewPoints(points.len()));
    }
    if points.iter().any(|p| p.q < 0.0 || p.g < 0.0) {
        return Err(FitError::Negative);
    }
    if points.windows(2).any(|w| w[0].q >= w[1].q) {
        return Err(FitError::NotIncreasing);
    }

    let s = |f: &dyn Fn(&PumpCurvePoint) -> f64| points.iter().map(|p| f(p)).sum::<f64>();
    let (s4, s3, s2, s1, s0) = (
        s(&|p| p.q.powi(4)),
        s(&|p| p.q.powi(3)),
        s(&|p| p.q * p.q),
        s(&|p| p.q),
        points.len() as f64,
    );
    let (g2, g1, g0) = (s(&|p| p.g * p.q * p.q), s(&|p| p.g * p.q), s(&|p| p.g));

    let sol = solve3([[s4, s3, s2], [s3, s2, s1], [s2, s1, s0]], [g2, g1, g0])
        .ok_or(FitError::Singular)?;
    let (mut alpha, mut beta, mut gamma) = (sol[0], sol[1], sol[2]);
    let mut warnings = Vec::new();

    let pin_alpha = alpha >= 0.0;
    if pin_alpha {
        alpha = -1e-6;
        warnings.push(format!("alpha pinned to {alpha}: unconstrained fit was nonnegative"));
        // refit beta, gamma against the residual g - alpha q^2
        let r1 = s(&|p| (p.g - alpha * p.q * p.q) * p.q);
        let r0 = s(&|p| p.g - alpha * p.q * p.q);
        let sol = solve2([[s2, s1], [s1, s0]], [r1, r0]).ok_or(FitError::Singular)?;
        beta = sol[0];
        gamma = sol[1];
    }
    if gamma <= 0.0 {
        gamma = 1e-6;
        warnings.push(format!("gamma pinned to {gamma}: unconstrained fit was nonpositive"));
        if pin_alpha {
            // only beta left free
            let num = s(&|p| (p.g - alpha * p.q * p.q - gamma) * p.q);
            if s2.abs() < 1e-12 {
                return Err(FitError::Singular);
            }
            beta = num / s2;
        } else {
            let r2 = s(&|p| (p.g - gamma) * p.q * p.q);
            let r1 = s(&|p| (p.g - gamma) * p.q);
            let sol = solve2([[s4, s3], [s3, s2]], [r2, r1]).ok_or(FitError::Singular)?;
            alpha = sol[0];
            beta = sol[1];
            if alpha >= 0.0 {
                alpha = -1e-6;
                warnings.push(format!("alpha pinned to {alpha} after gamma pinning"));
                let num = s(&|p| (p.g - alpha * p.q * p.q - gamma) * p.q);
                beta = num / s2;
            }
        }
    }

    Ok(PumpCurveFit { alpha, beta, gamma, rms: rms(points, alpha, beta, gamma), warnings })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(qs: &[f64], f: impl Fn(f64) -> f64) -> Vec<PumpCurvePoint> {
        qs.iter().map(|&q| PumpCurvePoint { q, g: f(q) }).collect()
    }

    #[test]
    fn exact_quadratic_recovered() {
        let points = pts(&[0.5, 1.0, 1.5], |q| -q * q + 4.0);
        let fit = fit_pump_curve(&points).unwrap();
        assert!((fit.alpha + 1.0).abs() < 1e-9);
        assert!(fit.beta.abs() < 1e-9);
        assert!((fit.gamma - 4.0).abs() < 1e-9);
        assert!(fit.rms < 1e-9);
        assert!(fit.warnings.is_empty());
    }

    #[test]
    fn straight_line_pins_alpha() {
        let points = pts(&[0.5, 1.0, 1.5], |q| 2.0 * q + 1.0);
        let fit = fit_pump_curve(&points).unwrap();
        assert_eq!(fit.alpha, -1e-6);
        assert!(!fit.warnings.is_empty());
    }

    #[test]
    fn too_few_points_rejected() {
        let points = pts(&[0.5, 1.0], |q| -q * q + 4.0);
        assert!(matches!(fit_pump_curve(&points), Err(FitError::TooFewPoints(2))));
    }

    #[test]
    fn duplicate_flows_rejected() {
        let points =
            vec![PumpCurvePoint { q: 1.0, g: 3.0 }, PumpCurvePoint { q: 1.0, g: 2.9 }, PumpCurvePoint { q: 2.0, g: 1.0 }];
        assert!(matches!(fit_pump_curve(&points), Err(FitError::NotIncreasing)));
    }

    /// Independent check: solve the 3×3 normal equations by Cramer's rule.
    #[test]
    fn noisy_fit_matches_normal_equations() {
        let noise = [0.03, -0.02, 0.01, -0.04, 0.02];
        let qs = [0.2, 0.5, 0.8, 1.1, 1.4];
        let points: Vec<PumpCurvePoint> = qs
            .iter()
            .zip(noise)
            .map(|(&q, n)| PumpCurvePoint { q, g: -2.0 * q * q + q + 3.0 + n })
            .collect();

        let det3 = |m: [[f64; 3]; 3]| {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let s = |k: u32| points.iter().map(|p| p.q.powi(k as i32)).sum::<f64>();
        let gs = |k: u32| points.iter().map(|p| p.g * p.q.powi(k as i32)).sum::<f64>();
        let a = [[s(4), s(3), s(2)], [s(3), s(2), s(1)], [s(2), s(1), s(0)]];
        let b = [gs(2), gs(1), gs(0)];
        let d = det3(a);
        let col = |j: usize| {
            let mut m = a;
            for i in 0..3 {
                m[i][j] = b[i];
            }
            det3(m) / d
        };
        let want = (col(0), col(1), col(2));

        let fit = fit_pump_curve(&points).unwrap();
        assert!((fit.alpha - want.0).abs() < 1e-9, "{} vs {}", fit.alpha, want.0);
        assert!((fit.beta - want.1).abs() < 1e-9);
        assert!((fit.gamma - want.2).abs() < 1e-9);
    }
}
