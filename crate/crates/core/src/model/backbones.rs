//! Backbone graph builders.
//!
//! `tiny_test` is a three-weight-layer network that trains in seconds, so
//! the whole suite runs without any pretrained downloads. The full
//! topologies follow the standard published designs: DenseNet-201 (growth
//! 32, blocks 6/12/48/32, bottleneck factor 4, halving transitions) and
//! ResNet-50 (bottleneck stages 3/4/6/3 with projection shortcuts).
//! Batch-norm layers appear as per-channel affine nodes with pretrained
//! statistics folded in at load time.

use crate::nn::{he_normal, ConvShape, Graph, NodeId, PoolShape};
use crate::Scalar;
use ndarray::{Array1, Array2};
use rand_chacha::ChaCha8Rng;

/// Name of the tap used for attribution (the last convolutional feature
/// map after its activation).
pub const FEATURE_LAYER: &str = "features";

struct Builder<'r, F: Scalar> {
    graph: Graph<F>,
    rng: &'r mut ChaCha8Rng,
}

impl<'r, F: Scalar> Builder<'r, F> {
    fn new(input_size: usize, rng: &'r mut ChaCha8Rng) -> Self {
        Builder {
            graph: Graph::new((input_size, input_size, 3)),
            rng,
        }
    }

    fn conv(
        &mut self,
        name: &str,
        input: NodeId,
        k: usize,
        cin: usize,
        cout: usize,
        stride: usize,
        pad: usize,
    ) -> NodeId {
        let shape = ConvShape { kh: k, kw: k, cin, cout, stride, pad };
        let fan_in = k * k * cin;
        let w = Array2::from_shape_vec(
            (fan_in, cout),
            he_normal(self.rng, fan_in * cout, fan_in),
        )
        .expect("init length matches");
        self.graph.conv(name, input, shape, w, Array1::zeros(cout))
    }

    fn bn(&mut self, name: &str, input: NodeId, channels: usize) -> NodeId {
        self.graph.affine(name, input, channels)
    }

    fn dense(&mut self, name: &str, input: NodeId, n_in: usize, n_out: usize) -> NodeId {
        let w = Array2::from_shape_vec((n_in, n_out), he_normal(self.rng, n_in * n_out, n_in))
            .expect("init length matches");
        self.graph.dense(name, input, w, Array1::zeros(n_out))
    }
}

/// Classifier head: global average pool, optional dropout, dense to one
/// logit. The sigmoid lives in the model layer.
fn head<F: Scalar>(b: &mut Builder<F>, input: NodeId, channels: usize, dropout: Option<f64>) {
    let mut x = b.graph.global_avg_pool(input);
    if let Some(rate) = dropout {
        x = b.graph.dropout(x, rate);
    }
    b.dense("head.dense", x, channels, 1);
}

/// conv(3->8) / pool / conv(8->8) / GAP / dense. Three weight layers.
pub fn tiny_test<F: Scalar>(input_size: usize, rng: &mut ChaCha8Rng) -> Graph<F> {
    let mut b = Builder::new(input_size, rng);
    let c1 = b.conv("conv1", 0, 3, 3, 8, 1, 1);
    let r1 = b.graph.relu(c1);
    let p1 = b.graph.avgpool(r1, PoolShape { k: 2, stride: 2, pad: 0 });
    let c2 = b.conv("conv2", p1, 3, 8, 8, 1, 1);
    let r2 = b.graph.relu(c2);
    b.graph.tag(FEATURE_LAYER, r2);
    head(&mut b, r2, 8, None);
    b.graph
}

/// DenseNet-201: stem, four dense blocks of 6/12/48/32 bottleneck layers
/// with growth rate 32, halving transitions, final BN-ReLU feature map of
/// 1920 channels.
pub fn densenet201<F: Scalar>(input_size: usize, rng: &mut ChaCha8Rng) -> Graph<F> {
    const GROWTH: usize = 32;
    const BN_SIZE: usize = 4;
    const BLOCKS: [usize; 4] = [6, 12, 48, 32];

    let mut b = Builder::new(input_size, rng);
    let stem_conv = b.conv("stem.conv", 0, 7, 3, 64, 2, 3);
    let stem_bn = b.bn("stem.bn", stem_conv, 64);
    let stem_relu = b.graph.relu(stem_bn);
    let mut current = b
        .graph
        .maxpool(stem_relu, PoolShape { k: 3, stride: 2, pad: 1 });
    let mut channels = 64usize;

    for (bi, &n_layers) in BLOCKS.iter().enumerate() {
        for li in 0..n_layers {
            let prefix = format!("b{bi}.l{li}");
            let bn1 = b.bn(&format!("{prefix}.bn1"), current, channels);
            let r1 = b.graph.relu(bn1);
            let c1 = b.conv(&format!("{prefix}.conv1"), r1, 1, channels, BN_SIZE * GROWTH, 1, 0);
            let bn2 = b.bn(&format!("{prefix}.bn2"), c1, BN_SIZE * GROWTH);
            let r2 = b.graph.relu(bn2);
            let c2 = b.conv(&format!("{prefix}.conv2"), r2, 3, BN_SIZE * GROWTH, GROWTH, 1, 1);
            current = b.graph.concat(vec![current, c2]);
            channels += GROWTH;
        }
        if bi + 1 < BLOCKS.len() {
            let prefix = format!("t{bi}");
            let bn = b.bn(&format!("{prefix}.bn"), current, channels);
            let r = b.graph.relu(bn);
            let half = channels / 2;
            let c = b.conv(&format!("{prefix}.conv"), r, 1, channels, half, 1, 0);
            current = b.graph.avgpool(c, PoolShape { k: 2, stride: 2, pad: 0 });
            channels = half;
        }
    }

    let final_bn = b.bn("final.bn", current, channels);
    let final_relu = b.graph.relu(final_bn);
    b.graph.tag(FEATURE_LAYER, final_relu);
    head(&mut b, final_relu, channels, Some(0.5));
    b.graph
}

/// ResNet-50: stem plus bottleneck stages 3/4/6/3 with projection
/// shortcuts; final feature map of 2048 channels.
pub fn resnet50<F: Scalar>(input_size: usize, rng: &mut ChaCha8Rng) -> Graph<F> {
    const STAGES: [(usize, usize, usize); 4] =
        [(64, 3, 1), (128, 4, 2), (256, 6, 2), (512, 3, 2)];

    let mut b = Builder::new(input_size, rng);
    let stem_conv = b.conv("stem.conv", 0, 7, 3, 64, 2, 3);
    let stem_bn = b.bn("stem.bn", stem_conv, 64);
    let stem_relu = b.graph.relu(stem_bn);
    let mut current = b
        .graph
        .maxpool(stem_relu, PoolShape { k: 3, stride: 2, pad: 1 });
    let mut in_ch = 64usize;
    let mut last_relu = current;

    for (si, &(mid, blocks, first_stride)) in STAGES.iter().enumerate() {
        let out_ch = mid * 4;
        for bi in 0..blocks {
            let stride = if bi == 0 { first_stride } else { 1 };
            let prefix = format!("s{si}.b{bi}");

            let c1 = b.conv(&format!("{prefix}.conv1"), current, 1, in_ch, mid, 1, 0);
            let bn1 = b.bn(&format!("{prefix}.bn1"), c1, mid);
            let r1 = b.graph.relu(bn1);
            let c2 = b.conv(&format!("{prefix}.conv2"), r1, 3, mid, mid, stride, 1);
            let bn2 = b.bn(&format!("{prefix}.bn2"), c2, mid);
            let r2 = b.graph.relu(bn2);
            let c3 = b.conv(&format!("{prefix}.conv3"), r2, 1, mid, out_ch, 1, 0);
            let bn3 = b.bn(&format!("{prefix}.bn3"), c3, out_ch);

            let shortcut = if stride != 1 || in_ch != out_ch {
                let dc = b.conv(&format!("{prefix}.down.conv"), current, 1, in_ch, out_ch, stride, 0);
                b.bn(&format!("{prefix}.down.bn"), dc, out_ch)
            } else {
                current
            };
            let sum = b.graph.add(bn3, shortcut);
            last_relu = b.graph.relu(sum);
            current = last_relu;
            in_ch = out_ch;
        }
    }

    b.graph.tag(FEATURE_LAYER, last_relu);
    head(&mut b, last_relu, in_ch, Some(0.5));
    b.graph
}
