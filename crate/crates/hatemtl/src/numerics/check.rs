//! Central-difference gradient checker, the independent oracle for every
//! backward rule in this crate.

/// Compare autodiff gradients against central differences, coordinate by
/// coordinate, over a flat parameter list.
///
/// `loss_fn` evaluates the scalar objective at the given parameter values;
/// `grad_fn` returns the autodiff gradient in the same layout. Both must be
/// deterministic. Returns the maximum relative error
/// `|g_ad - g_fd| / max(1e-8, |g_ad| + |g_fd|)`.
pub fn finite_diff_check<L, G>(params: &[Vec<f64>], loss_fn: L, grad_fn: G, eps: f64) -> f64
where
    L: Fn(&[Vec<f64>]) -> f64,
    G: Fn(&[Vec<f64>]) -> Vec<Vec<f64>>,
{
    let g_ad = grad_fn(params);
    assert_eq!(g_ad.len(), params.len(), "gradient layout mismatch");
    let mut worst: f64 = 0.0;
    let mut work: Vec<Vec<f64>> = params.to_vec();
    for (k, p) in params.iter().enumerate() {
        assert_eq!(g_ad[k].len(), p.len(), "gradient layout mismatch");
        for i in 0..p.len() {
            let orig = work[k][i];
            work[k][i] = orig + eps;
            let plus = loss_fn(&work);
            work[k][i] = orig - eps;
            let minus = loss_fn(&work);
            work[k][i] = orig;
            let g_fd = (plus - minus) / (2.0 * eps);
            let err = (g_ad[k][i] - g_fd).abs() / (1e-8f64).max(g_ad[k][i].abs() + g_fd.abs());
            worst = worst.max(err);
        }
    }
    worst
}
