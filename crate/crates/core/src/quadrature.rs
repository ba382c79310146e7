//! Time quadrature and differentiation on sample instants.
//!
//! Integrals use the composite trapezoid rule with the Euler-Maclaurin end
//! correction `-h^2/12 (g'(b) - g'(a))` per interval, the derivatives being
//! three-point estimates from the samples themselves. On uniform samples the
//! interior corrections telescope and the rule is fourth order; with fewer
//! than three samples it degrades to the plain trapezoid rule.

/// Three-point derivative weights at `times[i]` using the stencil
/// `(i-1, i, i+1)` in the interior and a one-sided stencil at the ends.
/// Returns `(stencil start, weights)`.
pub fn derivative_stencil(times: &[f64], i: usize) -> (usize, [f64; 3]) {
    let n = times.len();
    assert!(n >= 3, "three-point stencil needs at least three samples");
    let start = i.saturating_sub(1).min(n - 3);
    let (x0, x1, x2) = (times[start], times[start + 1], times[start + 2]);
    let x = times[i];
    // Derivatives of the Lagrange basis polynomials at x.
    let w0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
    let w1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
    let w2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
    (start, [w0, w1, w2])
}

/// Second-order estimates of `g'` at every sample.
pub fn derivative(times: &[f64], values: &[f64]) -> Vec<f64> {
    assert_eq!(times.len(), values.len());
    let n = times.len();
    match n {
        0 => Vec::new(),
        1 => vec![0.0],
        2 => {
            let d = (values[1] - values[0]) / (times[1] - times[0]);
            vec![d, d]
        }
        _ => (0..n)
            .map(|i| {
                let (s, w) = derivative_stencil(times, i);
                w[0] * values[s] + w[1] * values[s + 1] + w[2] * values[s + 2]
            })
            .collect(),
    }
}

/// `C_i = int_{t_0}^{t_i} g`, with `C_0 = 0`.
pub fn cumulative(times: &[f64], values: &[f64]) -> Vec<f64> {
    assert_eq!(times.len(), values.len());
    let n = times.len();
    let mut out = Vec::with_capacity(n);
    if n == 0 {
        return out;
    }
    out.push(0.0);
    let slopes = if n >= 3 {
        Some(derivative(times, values))
    } else {
        None
    };
    let mut acc = 0.0;
    for i in 1..n {
        let h = times[i] - times[i - 1];
        acc += 0.5 * h * (values[i] + values[i - 1]);
        if let Some(d) = &slopes {
            acc -= h * h / 12.0 * (d[i] - d[i - 1]);
        }
        out.push(acc);
    }
    out
}

/// `int_{t_0}^{t_last} g`.
pub fn integrate(times: &[f64], values: &[f64]) -> f64 {
    cumulative(times, values).last().copied().unwrap_or(0.0)
}
