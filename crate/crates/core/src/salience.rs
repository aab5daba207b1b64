//! One-time salience tagging and salience readout.
//!
//! Tagging runs a single forward pass, then folds the neuromodulator level
//! into every non-input node's salience in proportion to that node's
//! activation, optionally strengthens the node's input weights, and
//! optionally switches the network to a salience-modulated activation mode.
//! Reading back, the salience response is the activation-weighted sum of
//! node saliences from the latest forward pass.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{ActivationMode, Network};

/// Which scaling the per-node salience update applies to the step size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SalienceUpdate {
    /// Step scaled by (1 - |S|): positive and negative tagging mirror each
    /// other exactly and saturation is approached from both sides.
    #[default]
    Symmetric,
    /// Step scaled by (1 - S): identical to `Symmetric` while S stays
    /// non-negative, kept for side-by-side comparison. Clamping still
    /// confines S to [-1, 1].
    Asymmetric,
}

/// Parameters of one tagging event.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SalienceConfig {
    /// Neuromodulator level N in [-1, 1]; positive for pleasure-like
    /// tagging, negative for fear-like tagging.
    pub level: f64,
    /// Intensity multiplier applied to `level` (the 1x/2x/3x sweep knob).
    pub intensity: f64,
    /// Weight-strengthening constant: each tagged node's input weights are
    /// scaled by 1 + |S * activation * theta|.
    pub theta: f64,
    /// Desire-to-act constant: D = gamma * R.
    pub gamma: f64,
    /// Whether tagging strengthens weights.
    pub affect_weights: bool,
    /// Activation mode the network switches to at tagging time;
    /// `Standard` leaves the mode untouched.
    pub activation_mode: ActivationMode,
    /// Salience update rule.
    pub update_rule: SalienceUpdate,
}

impl Default for SalienceConfig {
    fn default() -> Self {
        SalienceConfig {
            level: 1.0,
            intensity: 1.0,
            theta: 0.1,
            gamma: 1.0,
            affect_weights: true,
            activation_mode: ActivationMode::Standard,
            update_rule: SalienceUpdate::Symmetric,
        }
    }
}

impl SalienceConfig {
    /// Negates the neuromodulator level, leaving everything else unchanged.
    pub fn negated(&self) -> SalienceConfig {
        SalienceConfig {
            level: -self.level,
            ..self.clone()
        }
    }

    /// Level times intensity, clamped to [-1, 1]. The boolean reports
    /// whether the clamp fired.
    pub fn effective_level(&self) -> (f64, bool) {
        let raw = self.level * self.intensity;
        let clamped = raw.clamp(-1.0, 1.0);
        (clamped, clamped != raw)
    }

    fn validate(&self) -> Result<()> {
        if !self.level.is_finite() || self.level.abs() > 1.0 {
            return Err(Error::invalid_input(format!(
                "neuromodulator level must be in [-1, 1], got {}",
                self.level
            )));
        }
        if !self.intensity.is_finite() || self.intensity < 0.0 {
            return Err(Error::invalid_input(format!(
                "intensity factor must be non-negative, got {}",
                self.intensity
            )));
        }
        if !self.theta.is_finite() || self.theta < 0.0 {
            return Err(Error::invalid_input(format!(
                "theta must be non-negative, got {}",
                self.theta
            )));
        }
        if !self.gamma.is_finite() {
            return Err(Error::invalid_input("gamma must be finite"));
        }
        Ok(())
    }
}

/// One node's salience update as applied: S_new = clamp(S + step, -1, 1)
/// with the step equal to activation * level scaled by (1 - |S|)
/// (symmetric rule) or (1 - S) (asymmetric rule).
pub fn updated_salience(
    salience: f64,
    activation: f64,
    effective_level: f64,
    rule: SalienceUpdate,
) -> f64 {
    let headroom = match rule {
        SalienceUpdate::Symmetric => 1.0 - salience.abs(),
        SalienceUpdate::Asymmetric => 1.0 - salience,
    };
    (salience + headroom * activation * effective_level).clamp(-1.0, 1.0)
}

/// Per-node record of a tagging event.
#[derive(Debug, Clone)]
pub struct NodeTag {
    /// Non-input layer index (0 = first hidden layer).
    pub layer: usize,
    pub node: usize,
    pub activation: f64,
    pub salience_before: f64,
    pub salience_after: f64,
    /// Factor every input weight of the node was multiplied by
    /// (1.0 when weights were not affected).
    pub weight_scale: f64,
}

/// Everything one tagging event did to the network.
#[derive(Debug, Clone)]
pub struct TagReport {
    pub effective_level: f64,
    /// True when level x intensity fell outside [-1, 1] and was clamped.
    pub level_clamped: bool,
    pub nodes: Vec<NodeTag>,
    /// Number of weights multiplied by a factor other than exactly 1.
    pub weights_touched: usize,
    /// Sum of (salience_after - salience_before) per non-input layer.
    pub layer_salience_deltas: Vec<f64>,
}

impl TagReport {
    /// Serializes the per-node records as CSV (header row, LF endings).
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(
            w,
            "node,layer,activation,salience_before,salience_after,weight_scale"
        )?;
        for n in &self.nodes {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                n.node, n.layer, n.activation, n.salience_before, n.salience_after, n.weight_scale
            )?;
        }
        Ok(())
    }
}

/// Applies one-time salience tagging for `input` to every non-input node.
///
/// Order of effects: one forward pass to capture activations, then per node
/// the salience update, then (optionally) the weight strengthening using the
/// updated salience, then (optionally) the activation-mode switch.
///
/// A zero effective level means no neuromodulator was released: no event
/// takes place, so neither salience nor weights move (the weight
/// strengthening would otherwise still scale previously tagged nodes).
pub fn tag(net: &mut Network, input: &[f64], cfg: &SalienceConfig) -> Result<TagReport> {
    cfg.validate()?;
    let (effective_level, level_clamped) = cfg.effective_level();
    let event_fires = effective_level != 0.0;
    net.forward(input)?;

    let mut nodes = Vec::new();
    let mut weights_touched = 0usize;
    let mut layer_salience_deltas = Vec::with_capacity(net.layers().len());

    for (layer_idx, layer) in net.layers_mut().iter_mut().enumerate() {
        let mut layer_delta = 0.0;
        for node in 0..layer.out_dim() {
            let activation = layer.last_activation[node];
            let salience_before = layer.salience[node];
            let salience_after = updated_salience(
                salience_before,
                activation,
                effective_level,
                cfg.update_rule,
            );
            layer.salience[node] = salience_after;
            layer_delta += salience_after - salience_before;

            let mut weight_scale = 1.0;
            if cfg.affect_weights && event_fires {
                weight_scale = 1.0 + (salience_after * activation * cfg.theta).abs();
                if weight_scale != 1.0 {
                    for w in layer.weights.row_mut(node) {
                        *w *= weight_scale;
                    }
                    weights_touched += layer.in_dim();
                }
            }
            nodes.push(NodeTag {
                layer: layer_idx,
                node,
                activation,
                salience_before,
                salience_after,
                weight_scale,
            });
        }
        layer_salience_deltas.push(layer_delta);
    }

    if cfg.activation_mode != ActivationMode::Standard {
        net.set_mode(cfg.activation_mode);
    }

    Ok(TagReport {
        effective_level,
        level_clamped,
        nodes,
        weights_touched,
        layer_salience_deltas,
    })
}

/// Applies [`tag`] once per event, in order; later events see the salience,
/// weights and mode left behind by earlier ones.
pub fn tag_sequence(
    net: &mut Network,
    events: &[(Vec<f64>, SalienceConfig)],
) -> Result<Vec<TagReport>> {
    events
        .iter()
        .map(|(input, cfg)| tag(net, input, cfg))
        .collect()
}

/// Salience read back during inference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SalienceResponse {
    /// Activation-weighted sum of node saliences.
    pub response: f64,
    /// gamma * response.
    pub desire_to_act: f64,
}

/// Salience response over the activations cached by the most recent forward
/// pass: one multiply-add per non-input node, no extra forward pass.
pub fn response_from_cache(net: &Network) -> f64 {
    let mut total = 0.0;
    for layer in net.layers() {
        for (s, a) in layer.salience.iter().zip(&layer.last_activation) {
            total += s * a;
        }
    }
    total
}

/// One forward pass followed by the salience readout; weights and salience
/// are left untouched (only the activation cache changes).
pub fn respond(net: &mut Network, input: &[f64], gamma: f64) -> Result<SalienceResponse> {
    net.forward(input)?;
    let response = response_from_cache(net);
    Ok(SalienceResponse {
        response,
        desire_to_act: gamma * response,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Network;
    use proptest::prelude::*;

    fn small_net(seed: u64) -> Network {
        Network::new(&[4, 3, 2], seed).unwrap()
    }

    fn snapshot_params(net: &Network) -> Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        net.layers()
            .iter()
            .map(|l| {
                (
                    l.weights.as_slice().to_vec(),
                    l.biases.clone(),
                    l.salience.clone(),
                )
            })
            .collect()
    }

    #[test]
    fn salience_update_examples() {
        // Fresh node at full activation takes the whole level.
        assert_eq!(
            updated_salience(0.0, 1.0, 0.5, SalienceUpdate::Symmetric),
            0.5
        );
        // Zero activation leaves the node inert.
        assert_eq!(
            updated_salience(0.3, 0.0, 1.0, SalienceUpdate::Symmetric),
            0.3
        );
        // Saturation is a fixed point.
        assert_eq!(
            updated_salience(1.0, 0.9, 1.0, SalienceUpdate::Symmetric),
            1.0
        );
        assert_eq!(
            updated_salience(-1.0, 0.9, -1.0, SalienceUpdate::Symmetric),
            -1.0
        );
        // The asymmetric rule agrees on the non-negative branch.
        assert_eq!(
            updated_salience(0.25, 0.5, 0.5, SalienceUpdate::Symmetric),
            updated_salience(0.25, 0.5, 0.5, SalienceUpdate::Asymmetric),
        );
    }

    #[test]
    fn effective_level_clamps_and_reports() {
        let cfg = SalienceConfig {
            level: 0.8,
            intensity: 2.0,
            ..SalienceConfig::default()
        };
        assert_eq!(cfg.effective_level(), (1.0, true));
        let cfg = SalienceConfig {
            level: 0.3,
            intensity: 2.0,
            ..SalienceConfig::default()
        };
        assert_eq!(cfg.effective_level(), (0.6, false));
    }

    #[test]
    fn config_validation_rejects_out_of_range_values() {
        let mut net = small_net(1);
        for cfg in [
            SalienceConfig {
                level: 1.5,
                ..SalienceConfig::default()
            },
            SalienceConfig {
                intensity: -1.0,
                ..SalienceConfig::default()
            },
            SalienceConfig {
                theta: -0.1,
                ..SalienceConfig::default()
            },
            SalienceConfig {
                gamma: f64::NAN,
                ..SalienceConfig::default()
            },
        ] {
            assert!(tag(&mut net, &[0.1, 0.2, 0.3, 0.4], &cfg).is_err());
        }
    }

    #[test]
    fn tag_report_is_consistent_with_the_update_formulas() {
        let mut net = small_net(5);
        let cfg = SalienceConfig {
            level: 0.5,
            theta: 0.2,
            ..SalienceConfig::default()
        };
        let before = snapshot_params(&net);
        let report = tag(&mut net, &[0.9, -0.3, 0.5, 0.1], &cfg).unwrap();
        assert_eq!(report.effective_level, 0.5);
        assert!(!report.level_clamped);
        assert_eq!(report.nodes.len(), 5); // 3 hidden + 2 output nodes

        for node in &report.nodes {
            let expected = updated_salience(
                node.salience_before,
                node.activation,
                0.5,
                SalienceUpdate::Symmetric,
            );
            assert_eq!(node.salience_after, expected);
            let expected_scale = 1.0 + (node.salience_after * node.activation * 0.2).abs();
            assert_eq!(node.weight_scale, expected_scale);
            assert_eq!(
                net.layers()[node.layer].salience[node.node],
                node.salience_after
            );
            // Every input weight of the node scaled by exactly that factor.
            let w_before = &before[node.layer].0;
            let in_dim = net.layers()[node.layer].in_dim();
            for j in 0..in_dim {
                let idx = node.node * in_dim + j;
                assert_eq!(
                    net.layers()[node.layer].weights.as_slice()[idx],
                    w_before[idx] * expected_scale
                );
            }
        }
        assert_eq!(report.weights_touched, 3 * 4 + 2 * 3);
    }

    #[test]
    fn weights_never_shrink_and_biases_stay_put() {
        let mut net = small_net(9);
        let before = snapshot_params(&net);
        tag(&mut net, &[0.4, 0.6, -0.2, 0.8], &SalienceConfig::default()).unwrap();
        for (layer, (w_before, b_before, _)) in net.layers().iter().zip(&before) {
            for (after, before) in layer.weights.as_slice().iter().zip(w_before) {
                assert!(after.abs() >= before.abs());
            }
            assert_eq!(&layer.biases, b_before);
        }
    }

    #[test]
    fn zero_level_tag_is_a_no_op_on_parameters() {
        let mut net = small_net(3);
        let before = snapshot_params(&net);
        let cfg = SalienceConfig {
            level: 0.0,
            ..SalienceConfig::default()
        };
        let report = tag(&mut net, &[0.2, 0.2, 0.2, 0.2], &cfg).unwrap();
        assert_eq!(snapshot_params(&net), before);
        assert_eq!(report.weights_touched, 0);
        assert!(report.nodes.iter().all(|n| n.weight_scale == 1.0));
    }

    #[test]
    fn zero_level_tag_leaves_previously_tagged_weights_alone() {
        // Without a neuromodulator there is no event, so the weight
        // strengthening must not re-fire on nodes with leftover salience.
        let mut net = small_net(3);
        tag(&mut net, &[0.2, 0.7, 0.1, 0.9], &SalienceConfig::default()).unwrap();
        let before = snapshot_params(&net);
        for zeroed in [
            SalienceConfig {
                level: 0.0,
                ..SalienceConfig::default()
            },
            SalienceConfig {
                intensity: 0.0,
                ..SalienceConfig::default()
            },
        ] {
            tag(&mut net, &[0.5, 0.5, 0.5, 0.5], &zeroed).unwrap();
            assert_eq!(snapshot_params(&net), before);
        }
    }

    #[test]
    fn positive_and_negative_tagging_mirror_exactly() {
        let input = [0.7, -0.1, 0.4, 0.9];
        let cfg = SalienceConfig {
            level: 0.8,
            ..SalienceConfig::default()
        };

        let mut pos = small_net(27);
        let mut neg = pos.clone();
        tag(&mut pos, &input, &cfg).unwrap();
        tag(&mut neg, &input, &cfg.negated()).unwrap();

        for (lp, ln) in pos.layers().iter().zip(neg.layers()) {
            // Salience negates bit-exactly, weights match bit-exactly.
            for (sp, sn) in lp.salience.iter().zip(&ln.salience) {
                assert_eq!(*sp, -*sn);
            }
            assert_eq!(lp.weights, ln.weights);
        }

        // Standard-mode confidences identical, responses exactly opposite.
        let out_pos = pos.forward(&input).unwrap();
        let out_neg = neg.forward(&input).unwrap();
        assert_eq!(out_pos, out_neg);
        assert_eq!(response_from_cache(&pos), -response_from_cache(&neg));
    }

    #[test]
    fn untagged_network_has_zero_response() {
        let mut net = small_net(15);
        let r = respond(&mut net, &[0.5, 0.5, 0.5, 0.5], 2.0).unwrap();
        assert_eq!(r.response, 0.0);
        assert_eq!(r.desire_to_act, 0.0);
    }

    #[test]
    fn single_node_response_is_the_salience_activation_product() {
        // One output node with salience 0.5 and activation 0.8.
        let mut net = Network::new(&[1, 1], 0).unwrap();
        net.layers_mut()[0].weights.set(0, 0, 1.0);
        net.layers_mut()[0].biases[0] = 0.0;
        net.layers_mut()[0].salience[0] = 0.5;
        let x = 4.0f64.ln(); // sigmoid(ln 4) = 0.8
        let r = respond(&mut net, &[x], 1.0).unwrap();
        assert!((r.response - 0.4).abs() < 1e-12);
        assert_eq!(r.desire_to_act, r.response);
    }

    #[test]
    fn respond_does_not_mutate_parameters() {
        let mut net = small_net(8);
        tag(&mut net, &[0.3, 0.3, 0.3, 0.3], &SalienceConfig::default()).unwrap();
        let before = snapshot_params(&net);
        respond(&mut net, &[0.9, -0.9, 0.1, 0.0], 1.5).unwrap();
        assert_eq!(snapshot_params(&net), before);
    }

    #[test]
    fn empty_tag_sequence_changes_nothing() {
        let mut net = small_net(2);
        let before = net.clone();
        let reports = tag_sequence(&mut net, &[]).unwrap();
        assert!(reports.is_empty());
        assert_eq!(net, before);
    }

    #[test]
    fn opposite_tags_on_different_inputs_yield_opposite_responses() {
        // Two inputs that activate disjoint hidden nodes, the way two
        // trained classes do; the shared output nodes keep salience from
        // both events.
        let mut net = Network::new(&[2, 4, 2], 0).unwrap();
        {
            let hidden = &mut net.layers_mut()[0];
            for (node, row) in [[8.0, -8.0], [8.0, -8.0], [-8.0, 8.0], [-8.0, 8.0]]
                .iter()
                .enumerate()
            {
                hidden.weights.row_mut(node).copy_from_slice(row);
                hidden.biases[node] = -4.0;
            }
        }
        for w in net.layers_mut()[1].weights.row_mut(0) {
            *w = 0.0;
        }
        for w in net.layers_mut()[1].weights.row_mut(1) {
            *w = 0.0;
        }

        let first = vec![1.0, 0.0];
        let second = vec![0.0, 1.0];
        let cfg = SalienceConfig::default();
        tag_sequence(
            &mut net,
            &[
                (first.clone(), cfg.clone()),
                (second.clone(), cfg.negated()),
            ],
        )
        .unwrap();
        let r_first = respond(&mut net, &first, 1.0).unwrap().response;
        let r_second = respond(&mut net, &second, 1.0).unwrap().response;
        assert!(r_first > 0.0, "positively tagged input got R = {r_first}");
        assert!(r_second < 0.0, "negatively tagged input got R = {r_second}");
    }

    #[test]
    fn repeated_tagging_approaches_saturation_monotonically() {
        let mut net = small_net(4);
        let input = vec![0.6, 0.2, -0.4, 0.7];
        let cfg = SalienceConfig {
            level: 0.3,
            ..SalienceConfig::default()
        };
        tag(&mut net, &input, &cfg).unwrap();
        let first: Vec<Vec<f64>> = net.layers().iter().map(|l| l.salience.clone()).collect();
        tag(&mut net, &input, &cfg).unwrap();
        for (layer, firsts) in net.layers().iter().zip(&first) {
            for (after, before) in layer.salience.iter().zip(firsts) {
                assert!(after.abs() <= before.abs() + (1.0 - before.abs()) * 0.3 + 1e-15);
                assert!(after.abs() >= before.abs()); // same-sign tagging never backs off
            }
        }
    }

    #[test]
    fn doubling_salience_on_frozen_activations_doubles_the_response() {
        let mut net = small_net(31);
        tag(
            &mut net,
            &[0.2, 0.8, -0.5, 0.3],
            &SalienceConfig {
                level: 0.4,
                ..SalienceConfig::default()
            },
        )
        .unwrap();
        net.forward(&[0.1, 0.4, 0.2, -0.3]).unwrap();
        let r1 = response_from_cache(&net);
        for layer in net.layers_mut() {
            for s in &mut layer.salience {
                *s *= 2.0;
            }
        }
        let r2 = response_from_cache(&net);
        assert!((r2 - 2.0 * r1).abs() < 1e-9);
    }

    #[test]
    fn tag_csv_has_header_and_one_row_per_node() {
        let mut net = small_net(6);
        let report = tag(&mut net, &[0.1, 0.2, 0.3, 0.4], &SalienceConfig::default()).unwrap();
        let mut buf = Vec::new();
        report.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + report.nodes.len());
        assert!(lines[0].starts_with("node,layer,activation"));
        assert!(!text.contains('\r'));
    }

    proptest! {
        #[test]
        fn salience_stays_bounded_under_random_sequences(
            seed in 0u64..1000,
            levels in proptest::collection::vec(-1.0f64..=1.0, 1..8),
            intensity in 0.0f64..4.0,
        ) {
            let mut net = small_net(seed);
            for (i, level) in levels.iter().enumerate() {
                let input = vec![
                    (i as f64).sin(),
                    (i as f64).cos(),
                    *level,
                    0.5,
                ];
                let cfg = SalienceConfig {
                    level: *level,
                    intensity,
                    ..SalienceConfig::default()
                };
                tag(&mut net, &input, &cfg).unwrap();
                for layer in net.layers() {
                    for s in &layer.salience {
                        prop_assert!((-1.0..=1.0).contains(s), "salience {s} escaped");
                    }
                }
            }
        }

        #[test]
        fn update_rule_never_leaves_the_unit_interval(
            s in -1.0f64..=1.0,
            a in 0.0f64..=2.0,
            n in -1.0f64..=1.0,
        ) {
            for rule in [SalienceUpdate::Symmetric, SalienceUpdate::Asymmetric] {
                let next = updated_salience(s, a, n, rule);
                prop_assert!((-1.0..=1.0).contains(&next));
            }
        }
    }
}
