use alloc::vec;

use super::{LeurnConfig, LeurnParams};
use crate::error::{shape_err, Result};
use crate::numeric::math;

/// Parameter gradients for one trace, as a fresh [`LeurnParams`]-shaped value.
pub fn backward(
    trace: &super::ForwardTrace,
    params: &LeurnParams,
    cfg: &LeurnConfig,
    grad_logits: &[f64],
) -> Result<LeurnParams> {
    let mut grads = LeurnParams::zeros(cfg);
    backward_into(trace, params, cfg, grad_logits, &mut grads)?;
    Ok(grads)
}

/// Accumulates the gradients of one trace into `grads`.
///
/// The quantizer is differentiated with a straight-through estimator whose
/// surrogate derivative is that of `tanh`, so `d e / d tau` is
/// `(1 - tanh^2(x + tau)) tanh(tau) + s (1 - tanh^2(tau))`. For a surrogate-mode
/// trace this is the exact derivative.
pub fn backward_into(
    trace: &super::ForwardTrace,
    params: &LeurnParams,
    cfg: &LeurnConfig,
    grad_logits: &[f64],
    grads: &mut LeurnParams,
) -> Result<()> {
    let n = cfg.n_features;
    let d = cfg.depth;
    if trace.n_features != n || trace.depth != d || params.rule_layers.len() != d {
        return Err(shape_err!(
            "trace ({} features, depth {}) does not match model ({} features, depth {})",
            trace.n_features,
            trace.depth,
            n,
            d
        ));
    }
    if grad_logits.len() != cfg.output_dim() {
        return Err(shape_err!(
            "{} logit gradients for {} outputs",
            grad_logits.len(),
            cfg.output_dim()
        ));
    }
    let masked = !trace.masks.is_empty();
    let mask_at = |layer: usize, a: usize| if masked { trace.masks[layer][a] } else { 1.0 };

    let mut d_embed = vec![0.0; (d + 1) * n];

    // head
    {
        let w = &params.head.weights;
        let gw = &mut grads.head.weights;
        for (a, de) in d_embed.iter_mut().enumerate() {
            let m = mask_at(d, a);
            let input = trace.embedding[a] * m;
            let mut acc = 0.0;
            for (o, &g) in grad_logits.iter().enumerate() {
                gw.set(a, o, gw.get(a, o) + input * g);
                acc += w.get(a, o) * g;
            }
            *de += m * acc;
        }
        for (b, &g) in grads.head.bias.iter_mut().zip(grad_logits) {
            *b += g;
        }
    }

    let mut d_tau = vec![0.0; n];
    for i in (0..=d).rev() {
        for f in 0..n {
            let at = i * n + f;
            let tz = math::tanh(trace.input[f] + trace.tau[at]);
            let tt = trace.tanh_tau[at];
            let de_dtau = (1.0 - tz * tz) * tt + trace.s[at] * (1.0 - tt * tt);
            d_tau[f] = d_embed[at] * de_dtau;
        }
        if i == 0 {
            for (g, dt) in grads.tau0.iter_mut().zip(&d_tau) {
                *g += dt;
            }
            break;
        }
        let layer = i - 1;
        let w = &params.rule_layers[layer].weights;
        let gl = &mut grads.rule_layers[layer];
        for a in 0..i * n {
            let m = mask_at(layer, a);
            let input = trace.embedding[a] * m;
            let grow = gl.weights.row_mut(a);
            let wrow = w.row(a);
            let mut acc = 0.0;
            for f in 0..n {
                grow[f] += input * d_tau[f];
                acc += wrow[f] * d_tau[f];
            }
            d_embed[a] += m * acc;
        }
        for (b, dt) in gl.bias.iter_mut().zip(&d_tau) {
            *b += dt;
        }
    }
    Ok(())
}
