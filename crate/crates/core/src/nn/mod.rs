//! A small layer-graph engine: enough structure for sequential test
//! networks and for the dense/residual connectivity of the full backbones.
//!
//! Nodes are stored in topological order. The final node must produce a
//! single value, the classification logit; the sigmoid lives in the model
//! layer so losses can work directly with logits.

pub mod adam;
pub mod ops;

pub use adam::Adam;
pub use ops::{ConvShape, PoolShape};

use crate::error::{Error, Result};
use crate::Scalar;
use ndarray::{Array1, Array2, Array3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

pub type NodeId = usize;

#[derive(Debug, Clone)]
pub enum Node<F: Scalar> {
    Input {
        shape: (usize, usize, usize),
    },
    Conv {
        name: String,
        input: NodeId,
        shape: ConvShape,
        w: Array2<F>,
        b: Array1<F>,
    },
    /// Per-channel scale and shift; batch-norm layers load as this with
    /// their statistics folded in.
    Affine {
        name: String,
        input: NodeId,
        scale: Array1<F>,
        shift: Array1<F>,
    },
    Relu {
        input: NodeId,
    },
    MaxPool {
        input: NodeId,
        shape: PoolShape,
    },
    AvgPool {
        input: NodeId,
        shape: PoolShape,
    },
    Concat {
        inputs: Vec<NodeId>,
    },
    Add {
        a: NodeId,
        b: NodeId,
    },
    GlobalAvgPool {
        input: NodeId,
    },
    Dropout {
        input: NodeId,
        rate: f64,
    },
    Dense {
        name: String,
        input: NodeId,
        w: Array2<F>,
        b: Array1<F>,
    },
}

/// Saved per-node state the backward pass needs.
#[derive(Debug)]
enum Aux<F: Scalar> {
    None,
    MaxPool(Vec<u32>),
    Dropout(Array3<F>),
}

#[derive(Debug)]
pub struct ForwardPass<F: Scalar> {
    pub values: Vec<Array3<F>>,
    aux: Vec<Aux<F>>,
}

impl<F: Scalar> ForwardPass<F> {
    /// Scalar output of the graph (the classification logit).
    pub fn logit(&self) -> F {
        let last = self.values.last().expect("graph has nodes");
        last[[0, 0, 0]]
    }
}

/// Flattened parameter gradients keyed by tensor name.
#[derive(Debug, Clone)]
pub struct GradStore<F: Scalar> {
    pub by_name: BTreeMap<String, Vec<F>>,
}

impl<F: Scalar> Default for GradStore<F> {
    fn default() -> Self {
        GradStore {
            by_name: BTreeMap::new(),
        }
    }
}

impl<F: Scalar> GradStore<F> {
    fn insert_flat(&mut self, name: String, data: Vec<F>) {
        self.by_name.insert(name, data);
    }

    /// Elementwise accumulate `other` into `self`.
    pub fn accumulate(&mut self, other: &GradStore<F>) {
        for (name, grad) in &other.by_name {
            match self.by_name.get_mut(name) {
                Some(acc) => {
                    for (a, g) in acc.iter_mut().zip(grad) {
                        *a += *g;
                    }
                }
                None => {
                    self.by_name.insert(name.clone(), grad.clone());
                }
            }
        }
    }

    pub fn scale(&mut self, factor: F) {
        for grad in self.by_name.values_mut() {
            for g in grad.iter_mut() {
                *g *= factor;
            }
        }
    }
}

pub struct BackwardPass<F: Scalar> {
    /// Gradient of the logit with respect to every node value.
    pub d_values: Vec<Array3<F>>,
    pub grads: GradStore<F>,
}

#[derive(Debug, Clone)]
pub struct Graph<F: Scalar> {
    pub nodes: Vec<Node<F>>,
    /// Named taps into the graph (e.g. the Grad-CAM feature layer).
    pub tags: BTreeMap<String, NodeId>,
}

impl<F: Scalar> Graph<F> {
    pub fn new(input_shape: (usize, usize, usize)) -> Self {
        Graph {
            nodes: vec![Node::Input { shape: input_shape }],
            tags: BTreeMap::new(),
        }
    }

    pub fn input_shape(&self) -> (usize, usize, usize) {
        match &self.nodes[0] {
            Node::Input { shape } => *shape,
            _ => unreachable!("node 0 is the input"),
        }
    }

    fn push(&mut self, node: Node<F>) -> NodeId {
        self.nodes.push(node);
        self.nodes.len() - 1
    }

    pub fn tag(&mut self, name: &str, id: NodeId) {
        self.tags.insert(name.to_string(), id);
    }

    pub fn resolve_tag(&self, name: &str) -> Option<NodeId> {
        self.tags.get(name).copied()
    }

    pub fn conv(
        &mut self,
        name: &str,
        input: NodeId,
        shape: ConvShape,
        w: Array2<F>,
        b: Array1<F>,
    ) -> NodeId {
        debug_assert_eq!(w.dim(), (shape.kh * shape.kw * shape.cin, shape.cout));
        debug_assert_eq!(b.len(), shape.cout);
        self.push(Node::Conv {
            name: name.to_string(),
            input,
            shape,
            w,
            b,
        })
    }

    pub fn affine(&mut self, name: &str, input: NodeId, channels: usize) -> NodeId {
        self.push(Node::Affine {
            name: name.to_string(),
            input,
            scale: Array1::ones(channels),
            shift: Array1::zeros(channels),
        })
    }

    pub fn relu(&mut self, input: NodeId) -> NodeId {
        self.push(Node::Relu { input })
    }

    pub fn maxpool(&mut self, input: NodeId, shape: PoolShape) -> NodeId {
        self.push(Node::MaxPool { input, shape })
    }

    pub fn avgpool(&mut self, input: NodeId, shape: PoolShape) -> NodeId {
        self.push(Node::AvgPool { input, shape })
    }

    pub fn concat(&mut self, inputs: Vec<NodeId>) -> NodeId {
        self.push(Node::Concat { inputs })
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(Node::Add { a, b })
    }

    pub fn global_avg_pool(&mut self, input: NodeId) -> NodeId {
        self.push(Node::GlobalAvgPool { input })
    }

    pub fn dropout(&mut self, input: NodeId, rate: f64) -> NodeId {
        self.push(Node::Dropout { input, rate })
    }

    pub fn dense(&mut self, name: &str, input: NodeId, w: Array2<F>, b: Array1<F>) -> NodeId {
        self.push(Node::Dense {
            name: name.to_string(),
            input,
            w,
            b,
        })
    }

    /// Run the graph. `train` enables dropout, which then consumes draws
    /// from `rng`; inference never touches the generator.
    pub fn forward(
        &self,
        x: &Array3<F>,
        train: bool,
        mut rng: Option<&mut ChaCha8Rng>,
    ) -> Result<ForwardPass<F>> {
        if x.dim() != self.input_shape() {
            return Err(Error::ShapeMismatch(format!(
                "input shape {:?} does not match model input {:?}",
                x.dim(),
                self.input_shape()
            )));
        }
        let mut values: Vec<Array3<F>> = Vec::with_capacity(self.nodes.len());
        let mut aux: Vec<Aux<F>> = Vec::with_capacity(self.nodes.len());
        for node in &self.nodes {
            let (value, a) = match node {
                Node::Input { .. } => (x.clone(), Aux::None),
                Node::Conv { input, shape, w, b, .. } => {
                    (ops::conv_forward(&values[*input], w, b, shape), Aux::None)
                }
                Node::Affine { input, scale, shift, .. } => {
                    let mut out = values[*input].clone();
                    for mut lane in out.lanes_mut(ndarray::Axis(2)) {
                        for (v, (&s, &t)) in lane.iter_mut().zip(scale.iter().zip(shift.iter())) {
                            *v = *v * s + t;
                        }
                    }
                    (out, Aux::None)
                }
                Node::Relu { input } => (
                    values[*input].mapv(|v| if v > F::zero() { v } else { F::zero() }),
                    Aux::None,
                ),
                Node::MaxPool { input, shape } => {
                    let (out, argmax) = ops::maxpool_forward(&values[*input], shape);
                    (out, Aux::MaxPool(argmax))
                }
                Node::AvgPool { input, shape } => {
                    (ops::avgpool_forward(&values[*input], shape), Aux::None)
                }
                Node::Concat { inputs } => {
                    let parts: Vec<&Array3<F>> = inputs.iter().map(|&i| &values[i]).collect();
                    let (h, w, _) = parts[0].dim();
                    let total_c: usize = parts.iter().map(|p| p.dim().2).sum();
                    let mut out = Array3::<F>::zeros((h, w, total_c));
                    let mut offset = 0;
                    for p in parts {
                        let c = p.dim().2;
                        out.slice_mut(ndarray::s![.., .., offset..offset + c])
                            .assign(p);
                        offset += c;
                    }
                    (out, Aux::None)
                }
                Node::Add { a, b } => (&values[*a] + &values[*b], Aux::None),
                Node::GlobalAvgPool { input } => {
                    let v = &values[*input];
                    let (h, w, c) = v.dim();
                    let denom = F::cast((h * w) as f64);
                    let mut out = Array3::<F>::zeros((1, 1, c));
                    for ch in 0..c {
                        let mut acc = F::zero();
                        for y in 0..h {
                            for x_ in 0..w {
                                acc += v[[y, x_, ch]];
                            }
                        }
                        out[[0, 0, ch]] = acc / denom;
                    }
                    (out, Aux::None)
                }
                Node::Dropout { input, rate } => {
                    if train && *rate > 0.0 {
                        let rng = rng.as_deref_mut().ok_or_else(|| {
                            Error::Config("dropout in training mode needs a generator".into())
                        })?;
                        let keep = 1.0 - rate;
                        let scale = F::cast(1.0 / keep);
                        let mask = Array3::from_shape_fn(values[*input].dim(), |_| {
                            if rng.random_range(0.0..1.0) < keep {
                                scale
                            } else {
                                F::zero()
                            }
                        });
                        (&values[*input] * &mask, Aux::Dropout(mask))
                    } else {
                        (values[*input].clone(), Aux::None)
                    }
                }
                Node::Dense { input, w, b, .. } => {
                    let v = &values[*input];
                    let flat = v.as_slice().expect("standard layout");
                    let n_out = b.len();
                    let mut out = Array3::<F>::zeros((1, 1, n_out));
                    for o in 0..n_out {
                        let mut acc = b[o];
                        for (i, &vi) in flat.iter().enumerate() {
                            acc += vi * w[[i, o]];
                        }
                        out[[0, 0, o]] = acc;
                    }
                    (out, Aux::None)
                }
            };
            values.push(value);
            aux.push(a);
        }
        Ok(ForwardPass { values, aux })
    }

    /// Backpropagate `d_logit` through the stored forward pass. Activation
    /// gradients are always produced; parameter gradients only when asked.
    pub fn backward(
        &self,
        fp: &ForwardPass<F>,
        d_logit: F,
        need_param_grads: bool,
    ) -> BackwardPass<F> {
        let mut d_values: Vec<Array3<F>> = fp
            .values
            .iter()
            .map(|v| Array3::zeros(v.dim()))
            .collect();
        let mut grads = GradStore::default();

        let last = self.nodes.len() - 1;
        d_values[last][[0, 0, 0]] = d_logit;

        for idx in (0..self.nodes.len()).rev() {
            let d_out = d_values[idx].clone();
            match &self.nodes[idx] {
                Node::Input { .. } => {}
                Node::Conv { name, input, shape, w, .. } => {
                    let g = ops::conv_backward(&fp.values[*input], w, shape, &d_out);
                    d_values[*input] += &g.dx;
                    if need_param_grads {
                        grads.insert_flat(format!("{name}.w"), g.dw.into_raw_vec_and_offset().0);
                        grads.insert_flat(format!("{name}.b"), g.db.to_vec());
                    }
                }
                Node::Affine { name, input, scale, .. } => {
                    let x = &fp.values[*input];
                    let c = scale.len();
                    if need_param_grads {
                        let mut d_scale = vec![F::zero(); c];
                        let mut d_shift = vec![F::zero(); c];
                        for ((idx3, &xv), &dv) in x.indexed_iter().zip(d_out.iter()) {
                            d_scale[idx3.2] += xv * dv;
                            d_shift[idx3.2] += dv;
                        }
                        grads.insert_flat(format!("{name}.scale"), d_scale);
                        grads.insert_flat(format!("{name}.shift"), d_shift);
                    }
                    let mut dx = d_out.clone();
                    for (idx3, v) in dx.indexed_iter_mut() {
                        *v *= scale[idx3.2];
                    }
                    d_values[*input] += &dx;
                }
                Node::Relu { input } => {
                    let x = &fp.values[*input];
                    let mut dx = d_out.clone();
                    dx.zip_mut_with(x, |d, &xv| {
                        if xv <= F::zero() {
                            *d = F::zero();
                        }
                    });
                    d_values[*input] += &dx;
                }
                Node::MaxPool { input, .. } => {
                    let argmax = match &fp.aux[idx] {
                        Aux::MaxPool(a) => a,
                        _ => unreachable!("maxpool stores argmax"),
                    };
                    let dx = ops::maxpool_backward(&d_out, argmax, fp.values[*input].dim());
                    d_values[*input] += &dx;
                }
                Node::AvgPool { input, shape } => {
                    let dx = ops::avgpool_backward(&d_out, shape, fp.values[*input].dim());
                    d_values[*input] += &dx;
                }
                Node::Concat { inputs } => {
                    let mut offset = 0;
                    for &i in inputs {
                        let c = fp.values[i].dim().2;
                        let slice = d_out.slice(ndarray::s![.., .., offset..offset + c]);
                        d_values[i] += &slice;
                        offset += c;
                    }
                }
                Node::Add { a, b } => {
                    d_values[*a] += &d_out;
                    d_values[*b] += &d_out;
                }
                Node::GlobalAvgPool { input } => {
                    let (h, w, c) = fp.values[*input].dim();
                    let denom = F::cast((h * w) as f64);
                    let mut dx = Array3::<F>::zeros((h, w, c));
                    for ch in 0..c {
                        let d = d_out[[0, 0, ch]] / denom;
                        for y in 0..h {
                            for x_ in 0..w {
                                dx[[y, x_, ch]] = d;
                            }
                        }
                    }
                    d_values[*input] += &dx;
                }
                Node::Dropout { input, .. } => match &fp.aux[idx] {
                    Aux::Dropout(mask) => {
                        d_values[*input] += &(&d_out * mask);
                    }
                    _ => {
                        d_values[*input] += &d_out;
                    }
                },
                Node::Dense { name, input, w, .. } => {
                    let x = &fp.values[*input];
                    let flat = x.as_slice().expect("standard layout");
                    let d_flat = d_out.as_slice().expect("standard layout");
                    let (n_in, n_out) = w.dim();
                    if need_param_grads {
                        let mut dw = vec![F::zero(); n_in * n_out];
                        for (i, &xi) in flat.iter().enumerate() {
                            for (o, &d) in d_flat.iter().enumerate() {
                                dw[i * n_out + o] = xi * d;
                            }
                        }
                        grads.insert_flat(format!("{name}.w"), dw);
                        grads.insert_flat(format!("{name}.b"), d_flat.to_vec());
                    }
                    let mut dx = Array3::<F>::zeros(x.dim());
                    {
                        let dx_flat = dx.as_slice_mut().expect("standard layout");
                        for (i, dv) in dx_flat.iter_mut().enumerate() {
                            let mut acc = F::zero();
                            for (o, &d) in d_flat.iter().enumerate() {
                                acc += w[[i, o]] * d;
                            }
                            *dv = acc;
                        }
                    }
                    d_values[*input] += &dx;
                }
            }
        }

        BackwardPass { d_values, grads }
    }

    /// Visit every parameter tensor as `(name, flat data, shape)`.
    pub fn visit_params(&self, f: &mut dyn FnMut(&str, &[F], Vec<usize>)) {
        for node in &self.nodes {
            match node {
                Node::Conv { name, shape, w, b, .. } => {
                    f(
                        &format!("{name}.w"),
                        w.as_slice().expect("standard layout"),
                        vec![shape.kh, shape.kw, shape.cin, shape.cout],
                    );
                    f(&format!("{name}.b"), b.as_slice().expect("standard layout"), vec![shape.cout]);
                }
                Node::Affine { name, scale, shift, .. } => {
                    f(&format!("{name}.scale"), scale.as_slice().expect("layout"), vec![scale.len()]);
                    f(&format!("{name}.shift"), shift.as_slice().expect("layout"), vec![shift.len()]);
                }
                Node::Dense { name, w, b, .. } => {
                    let (n_in, n_out) = w.dim();
                    f(&format!("{name}.w"), w.as_slice().expect("layout"), vec![n_in, n_out]);
                    f(&format!("{name}.b"), b.as_slice().expect("layout"), vec![b.len()]);
                }
                _ => {}
            }
        }
    }

    /// Visit every parameter tensor mutably.
    pub fn visit_params_mut(&mut self, f: &mut dyn FnMut(&str, &mut [F])) {
        for node in &mut self.nodes {
            match node {
                Node::Conv { name, w, b, .. } => {
                    let n = name.clone();
                    f(&format!("{n}.w"), w.as_slice_mut().expect("layout"));
                    f(&format!("{n}.b"), b.as_slice_mut().expect("layout"));
                }
                Node::Affine { name, scale, shift, .. } => {
                    let n = name.clone();
                    f(&format!("{n}.scale"), scale.as_slice_mut().expect("layout"));
                    f(&format!("{n}.shift"), shift.as_slice_mut().expect("layout"));
                }
                Node::Dense { name, w, b, .. } => {
                    let n = name.clone();
                    f(&format!("{n}.w"), w.as_slice_mut().expect("layout"));
                    f(&format!("{n}.b"), b.as_slice_mut().expect("layout"));
                }
                _ => {}
            }
        }
    }

    pub fn param_count(&self) -> usize {
        let mut count = 0;
        self.visit_params(&mut |_, data, _| count += data.len());
        count
    }
}

/// He-normal initialization for a tensor with the given fan-in.
pub fn he_normal<F: Scalar>(rng: &mut ChaCha8Rng, len: usize, fan_in: usize) -> Vec<F> {
    use rand_distr::{Distribution, StandardNormal};
    let std = (2.0 / fan_in as f64).sqrt();
    (0..len)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            F::cast(z * std)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn tiny_graph(size: usize, seed: u64) -> Graph<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut g = Graph::new((size, size, 3));
        let conv_shape = ConvShape { kh: 3, kw: 3, cin: 3, cout: 4, stride: 1, pad: 1 };
        let w = Array2::from_shape_vec(
            (27, 4),
            he_normal(&mut rng, 27 * 4, 27),
        )
        .unwrap();
        let c1 = g.conv("conv1", 0, conv_shape, w, Array1::zeros(4));
        let r1 = g.relu(c1);
        g.tag("features", r1);
        let gap = g.global_avg_pool(r1);
        let dw = Array2::from_shape_vec((4, 1), he_normal(&mut rng, 4, 4)).unwrap();
        g.dense("head.dense", gap, dw, Array1::zeros(1));
        g
    }

    #[test]
    fn forward_produces_scalar_logit() {
        let g = tiny_graph(8, 0);
        let x = Array3::from_elem((8, 8, 3), 0.5);
        let fp = g.forward(&x, false, None).unwrap();
        assert!(fp.logit().is_finite());
    }

    #[test]
    fn forward_rejects_wrong_input_shape() {
        let g = tiny_graph(8, 0);
        let x = Array3::<f64>::zeros((9, 9, 3));
        assert!(matches!(
            g.forward(&x, false, None).unwrap_err(),
            Error::ShapeMismatch(_)
        ));
    }

    #[test]
    fn param_gradients_match_finite_differences() {
        let g = tiny_graph(6, 3);
        let x = Array3::from_shape_fn((6, 6, 3), |(y, x, c)| {
            0.5 + 0.3 * ((y + 2 * x + c) as f64 * 0.37).sin()
        });

        let fp = g.forward(&x, false, None).unwrap();
        let bp = g.backward(&fp, 1.0, true);

        let h = 1e-6;
        let mut g_mut = g.clone();
        let names: Vec<String> = bp.grads.by_name.keys().cloned().collect();
        for name in names {
            let grad = bp.grads.by_name[&name].clone();
            for probe in [0usize, grad.len() / 2, grad.len() - 1] {
                let mut upper = 0.0;
                let mut lower = 0.0;
                for (dir, out) in [(h, &mut upper), (-h, &mut lower)] {
                    g_mut.visit_params_mut(&mut |n, data| {
                        if n == name {
                            data[probe] += dir;
                        }
                    });
                    *out = g_mut.forward(&x, false, None).unwrap().logit();
                    g_mut.visit_params_mut(&mut |n, data| {
                        if n == name {
                            data[probe] -= dir;
                        }
                    });
                }
                let fd = (upper - lower) / (2.0 * h);
                let analytic = grad[probe];
                let denom = fd.abs().max(analytic.abs()).max(1e-8);
                assert!(
                    ((analytic - fd) / denom).abs() < 1e-4,
                    "param {name}[{probe}]: analytic {analytic} vs fd {fd}"
                );
            }
        }
    }

    #[test]
    fn activation_gradient_matches_finite_differences() {
        let g = tiny_graph(5, 9);
        let mut x = Array3::from_shape_fn((5, 5, 3), |(y, x, c)| {
            0.4 + 0.2 * ((y * 3 + x + c) as f64).cos()
        });
        let fp = g.forward(&x, false, None).unwrap();
        let bp = g.backward(&fp, 1.0, false);

        let h = 1e-6;
        for idx in [(0usize, 0usize, 0usize), (2, 3, 1), (4, 4, 2)] {
            let orig = x[idx];
            x[idx] = orig + h;
            let up = g.forward(&x, false, None).unwrap().logit();
            x[idx] = orig - h;
            let down = g.forward(&x, false, None).unwrap().logit();
            x[idx] = orig;
            let fd = (up - down) / (2.0 * h);
            let analytic = bp.d_values[0][idx];
            assert!(
                (analytic - fd).abs() < 1e-6,
                "input grad at {idx:?}: {analytic} vs {fd}"
            );
        }
    }

    #[test]
    fn concat_and_add_backprop_split_gradients() {
        // y = sum(a) where a = concat(x, x) followed by add with itself:
        // every input element should receive gradient 4 through the two
        // paths of concat and the doubling add.
        let mut g = Graph::<f64>::new((2, 2, 1));
        let cat = g.concat(vec![0, 0]);
        let added = g.add(cat, cat);
        let gap = g.global_avg_pool(added);
        let w = Array2::from_elem((2, 1), 1.0);
        g.dense("head.dense", gap, w, Array1::zeros(1));

        let x = Array3::from_elem((2, 2, 1), 1.0);
        let fp = g.forward(&x, false, None).unwrap();
        // gap of (2,2,2) all-ones*2 = 2 -> dense sums two channels -> 4
        assert!((fp.logit() - 4.0).abs() < 1e-12);
        let bp = g.backward(&fp, 1.0, false);
        for v in bp.d_values[0].iter() {
            assert!((v - 1.0).abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn dropout_is_identity_in_eval_and_masks_in_train() {
        let mut g = Graph::<f64>::new((2, 2, 1));
        let d = g.dropout(0, 0.5);
        let gap = g.global_avg_pool(d);
        g.dense("head.dense", gap, Array2::from_elem((1, 1), 1.0), Array1::zeros(1));

        let x = Array3::from_elem((2, 2, 1), 1.0);
        let eval = g.forward(&x, false, None).unwrap();
        assert!((eval.logit() - 1.0).abs() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let train = g.forward(&x, true, Some(&mut rng)).unwrap();
        // masked values are 0 or 1/keep = 2
        for v in train.values[1].iter() {
            assert!(*v == 0.0 || (*v - 2.0).abs() < 1e-12);
        }

        let mut rng_a = ChaCha8Rng::seed_from_u64(7);
        let mut rng_b = ChaCha8Rng::seed_from_u64(7);
        let a = g.forward(&x, true, Some(&mut rng_a)).unwrap();
        let b = g.forward(&x, true, Some(&mut rng_b)).unwrap();
        assert_eq!(a.logit(), b.logit());
    }

    #[test]
    fn he_init_is_seeded() {
        let mut r1 = ChaCha8Rng::seed_from_u64(5);
        let mut r2 = ChaCha8Rng::seed_from_u64(5);
        let a: Vec<f32> = he_normal(&mut r1, 16, 9);
        let b: Vec<f32> = he_normal(&mut r2, 16, 9);
        assert_eq!(a, b);
    }
}
