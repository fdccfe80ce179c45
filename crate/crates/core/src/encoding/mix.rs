/// Standard logistic function, evaluated without overflow for large `|x|`.
#[inline]
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Maps `k - 1` unbounded raw values onto the `k`-simplex by stick-breaking.
///
/// Weight `i < k - 1` takes the fraction `σ(raw[i])` of what is left of the
/// stick, the last weight takes the remainder. For `k = 2` this is
/// `(σ(w), 1 - σ(w))`.
pub fn operator_mix_weights(raw: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; raw.len() + 1];
    operator_mix_weights_into(raw, &mut out);
    out
}

/// Allocation-free variant of [`operator_mix_weights`]; `out.len()` must be `raw.len() + 1`.
pub fn operator_mix_weights_into(raw: &[f64], out: &mut [f64]) {
    debug_assert_eq!(out.len(), raw.len() + 1);
    let mut rest = 1.0;
    for (w, &r) in out.iter_mut().zip(raw) {
        *w = rest * logistic(r);
        // 1 - σ(r) == σ(-r), which keeps precision when σ(r) is close to 1
        rest *= logistic(-r);
    }
    out[raw.len()] = rest;
}
