use super::Parameterized;

/// Largest relative discrepancy between analytic and numeric gradients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradCheck {
    pub max_rel_error: f64,
    pub worst_index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub checked: usize,
}

/// `|a - n| / max(|a|, |n|, 1e-6)`.
pub fn relative_error(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-6)
}

/// Compares `analytic` (same shape as `model`) against central differences
/// `(L(θ + h) - L(θ - h)) / 2h` for every parameter.
pub fn check_gradients<M, F>(model: &M, analytic: &M, loss: F, step: f64) -> GradCheck
where
    M: Parameterized + Clone,
    F: Fn(&M) -> f64,
{
    let grads = analytic.to_flat();
    let mut probe = model.clone();
    let mut report = GradCheck {
        max_rel_error: 0.0,
        worst_index: 0,
        analytic: 0.0,
        numeric: 0.0,
        checked: grads.len(),
    };
    for (i, &a) in grads.iter().enumerate() {
        probe.nudge(i, step);
        let plus = loss(&probe);
        probe.nudge(i, -2.0 * step);
        let minus = loss(&probe);
        probe.nudge(i, step);
        let n = (plus - minus) / (2.0 * step);
        let err = relative_error(a, n);
        if err > report.max_rel_error || err.is_nan() {
            report = GradCheck {
                max_rel_error: err,
                worst_index: i,
                analytic: a,
                numeric: n,
                checked: grads.len(),
            };
        }
    }
    report
}
