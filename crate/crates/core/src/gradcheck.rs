//! Central-difference check of the hand-derived gradients.
//!
//! Every layer's BMU is frozen at its current value, so the loss becomes a
//! smooth function of all parameters and the analytic gradients
//! (`∂E/∂v = δ·O`, `∂E/∂θ = −δ`, `∂E/∂W^M = −ΔW^M`) can be compared
//! against finite differences.

use crate::error::{Error, Result};
use crate::learning::{compute_deltas, loss, SignConvention};
use crate::network::{network_forward, network_forward_with_bmus, Network};

/// Gradients smaller than this are compared on an absolute scale. A
/// fourth-order stencil with step 1e-3 resolves a gradient to about 1e-13 in
/// double precision, so below 1e-6 a relative comparison measures rounding.
pub const GRADIENT_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradCheckScope {
    /// Output weights and biases only; hidden layers held fixed.
    OutputOnly,
    /// Every parameter of the network.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_relative_error: f64,
    pub checked: usize,
    /// Parameters skipped because a ±ε perturbation moves some BMU.
    pub excluded: usize,
}

/// Relative error `|a − n| / max(|a|, |n|, GRADIENT_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(GRADIENT_FLOOR)
}

/// Worst relative error between analytic and central-difference gradients,
/// with BMUs and neighborhood weights frozen at their values for `x`.
pub fn gradient_check_frozen(
    net: &Network,
    x: &[f64],
    target: &[f64],
    widths: &[f64],
    epsilon: f64,
    scope: GradCheckScope,
) -> Result<GradCheckReport> {
    gradient_check_with_convention(net, x, target, widths, epsilon, scope, SignConvention::ConstantNegative)
}

/// [`gradient_check_frozen`] with an explicit propagation sign convention.
pub fn gradient_check_with_convention(
    net: &Network,
    x: &[f64],
    target: &[f64],
    widths: &[f64],
    epsilon: f64,
    scope: GradCheckScope,
    convention: SignConvention,
) -> Result<GradCheckReport> {
    if !(1e-7..=1e-3).contains(&epsilon) {
        return Err(Error::InvalidConfig(format!("epsilon {epsilon} outside [1e-7, 1e-3]")));
    }
    let pass = network_forward(net, x, widths)?;
    let bmus: Vec<usize> = pass.activations.iter().map(|a| a.bmu_index).collect();
    let signals = compute_deltas(net, &pass, x, target, convention)?;

    let mut analytic = Vec::with_capacity(net.parameter_count());
    let top = pass.top_hidden();
    for &o in top {
        for &d in &signals.output_deltas {
            analytic.push(d * o);
        }
    }
    analytic.extend(signals.output_deltas.iter().map(|d| -d));
    if scope == GradCheckScope::Full {
        for changes in &signals.weight_changes {
            analytic.extend(changes.iter().map(|c| -c));
        }
    }

    let frozen_loss = |n: &Network| -> Result<f64> {
        let p = network_forward_with_bmus(n, x, widths, &bmus)?;
        loss(p.y(), target)
    };
    let bmus_hold = |n: &Network| -> Result<bool> {
        let p = network_forward(n, x, widths)?;
        Ok(p.activations.iter().map(|a| a.bmu_index).eq(bmus.iter().copied()))
    };

    let mut probe = net.clone();
    let mut worst = 0.0f64;
    let mut excluded = 0;
    'params: for (p, &a) in analytic.iter().enumerate() {
        let original = param(&mut probe, p);
        let mut at = [0.0; 4];
        for (value, step) in at.iter_mut().zip([2.0, 1.0, -1.0, -2.0]) {
            *slot(&mut probe, p) = original + step * epsilon;
            let holds = bmus_hold(&probe)?;
            *value = frozen_loss(&probe)?;
            if !holds {
                *slot(&mut probe, p) = original;
                excluded += 1;
                continue 'params;
            }
        }
        *slot(&mut probe, p) = original;
        // fourth-order central stencil
        let numeric = (-at[0] + 8.0 * at[1] - 8.0 * at[2] + at[3]) / (12.0 * epsilon);
        worst = worst.max(relative_error(a, numeric));
    }

    let total = analytic.len();
    if excluded * 10 > total {
        return Err(Error::DegenerateGradientCheck { excluded, total });
    }
    Ok(GradCheckReport {
        max_relative_error: worst,
        checked: total - excluded,
        excluded,
    })
}

fn param(net: &mut Network, p: usize) -> f64 {
    *slot(net, p)
}

/// Parameter `p` in the order: output weights, output biases, then hidden
/// reference vectors of layer 1..N.
fn slot(net: &mut Network, p: usize) -> &mut f64 {
    let (hidden, output) = net.parts_mut();
    let nw = output.weights().len();
    if p < nw {
        return &mut output.weights_mut()[p];
    }
    let p = p - nw;
    let nb = output.biases().len();
    if p < nb {
        return &mut output.biases_mut()[p];
    }
    let mut p = p - nb;
    for layer in hidden.iter_mut() {
        let n = layer.weights().len();
        if p < n {
            return &mut layer.weights_mut()[p];
        }
        p -= n;
    }
    panic!("parameter index out of range");
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::NetworkConfig;
    use crate::topo::GridShape;

    fn net(grids: Vec<GridShape>, dim: usize, classes: usize, seed: u64) -> Network {
        let mut c = NetworkConfig::new(grids, dim, classes);
        c.rng_seed = seed;
        Network::initialize(c, &vec![(0.0, 1.0); dim]).unwrap()
    }

    #[test]
    fn rejects_bad_epsilon() {
        let n = net(vec![GridShape::new(2, 2)], 2, 2, 0);
        for eps in [0.0, 1e-8, 1e-2] {
            assert!(gradient_check_frozen(&n, &[0.1, 0.2], &[1.0, 0.0], &[1.0], eps, GradCheckScope::Full).is_err());
        }
    }

    #[test]
    fn one_and_two_layers_pass() {
        for seed in 0..5 {
            let n1 = net(vec![GridShape::new(3, 3)], 3, 2, seed);
            let r =
                gradient_check_frozen(&n1, &[0.2, 0.5, 0.9], &[0.0, 1.0], &[2.0], 1e-5, GradCheckScope::Full).unwrap();
            assert!(r.max_relative_error < 1e-4, "{r:?}");
            let n2 = net(vec![GridShape::new(3, 3), GridShape::new(2, 3)], 3, 3, seed);
            let r = gradient_check_frozen(
                &n2,
                &[0.2, 0.5, 0.9],
                &[0.0, 1.0, 0.0],
                &[2.0, 1.5],
                1e-5,
                GradCheckScope::Full,
            )
            .unwrap();
            assert!(r.max_relative_error < 1e-4, "{r:?}");
            assert_eq!(r.checked + r.excluded, n2.parameter_count());
        }
    }

    #[test]
    fn three_layers_need_constant_sign() {
        let mut alternating_worst = 0.0f64;
        for seed in 0..5 {
            let n = net(
                vec![GridShape::new(3, 3), GridShape::new(3, 2), GridShape::new(2, 2)],
                3,
                2,
                seed,
            );
            let (x, t, w) = ([0.3, 0.6, 0.1], [1.0, 0.0], [2.0, 2.0, 2.0]);
            let ok = gradient_check_frozen(&n, &x, &t, &w, 1e-5, GradCheckScope::Full).unwrap();
            assert!(ok.max_relative_error < 1e-4, "{ok:?}");
            let alt =
                gradient_check_with_convention(&n, &x, &t, &w, 1e-5, GradCheckScope::Full, SignConvention::Alternating)
                    .unwrap();
            alternating_worst = alternating_worst.max(alt.max_relative_error);
        }
        // flipping the sign at the second step negates layer-1 gradients
        assert!(alternating_worst > 1.0);
    }
}
