use picnet::measures::{pair_metric, ContextQuery, PICMeasure};
use picnet::netbuilder::{
    after, before, compose, fix_inputs, parallelize, parallelize_shallow, stack, ActivationParams,
    Affine, CompiledNet, Layer,
};
use picnet::partition::{assign_cells, greedy_packing};
use picnet::sparse::SparseMatrix;
use picnet::transformer::{transformer_eval, transformerify};
use proptest::prelude::*;

fn close(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs())))
}

fn activation() -> impl Strategy<Value = ActivationParams> {
    prop_oneof![
        Just(ActivationParams::IDENTITY),
        Just(ActivationParams::RELU),
        Just(ActivationParams::REQU),
    ]
}

fn weights(rows: usize, cols: usize) -> impl Strategy<Value = SparseMatrix> {
    prop::collection::vec(
        prop::collection::vec(prop_oneof![Just(0.0), -1.0..1.0f64], cols),
        rows,
    )
    .prop_map(move |dense| SparseMatrix::from_dense(cols, &dense).unwrap())
}

fn layer(input: usize, output: usize) -> impl Strategy<Value = Layer> {
    (
        weights(output, input),
        prop::collection::vec(-0.5..0.5f64, input),
        prop::collection::vec(activation(), input),
    )
        .prop_map(|(w, b, a)| Layer::new(w, b, a).unwrap())
}

/// Random nets whose first layer is affine, as every built gadget's is.
fn net(input: usize, output: usize) -> impl Strategy<Value = CompiledNet> {
    prop::collection::vec(1usize..4, 0..3).prop_flat_map(move |hidden| {
        let mut dims = vec![input];
        dims.extend(&hidden);
        dims.push(output);
        let layers: Vec<_> = dims
            .windows(2)
            .enumerate()
            .map(|(i, w)| {
                let (a, b) = (w[0], w[1]);
                if i == 0 {
                    weights(b, a).prop_map(Layer::linear).boxed()
                } else {
                    layer(a, b).boxed()
                }
            })
            .collect();
        layers.prop_map(|ls| CompiledNet::new(ls).unwrap())
    })
}

fn inputs(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0..1.0f64, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn composition_evaluates_in_sequence(
        inner in net(3, 2),
        outer in net(2, 2),
        x in inputs(3),
    ) {
        let joined = compose(&outer, &inner).unwrap();
        let expected = outer.eval(&inner.eval(&x).unwrap()).unwrap();
        prop_assert!(close(&joined.eval(&x).unwrap(), &expected));
        prop_assert_eq!(joined.depth(), inner.depth() + outer.depth());
    }

    #[test]
    fn affine_maps_on_either_side(
        n in net(2, 3),
        w_out in weights(2, 3),
        w_in in weights(2, 3),
        c in inputs(2),
        x in inputs(2),
        z in inputs(3),
    ) {
        let post = Affine::new(w_out, c.clone()).unwrap();
        let got = after(&post, &n).unwrap().eval(&x).unwrap();
        prop_assert!(close(&got, &post.apply(&n.eval(&x).unwrap())));
        let pre = Affine::new(w_in, c).unwrap();
        let got = before(&n, &pre).unwrap().eval(&z).unwrap();
        prop_assert!(close(&got, &n.eval(&pre.apply(&z)).unwrap()));
        // Without an output bias a depth-0 net needs one layer to carry a constant.
        let depth = before(&n, &pre).unwrap().depth();
        prop_assert!(depth == n.depth() || (n.depth() == 0 && depth == 1));
    }

    #[test]
    fn parallel_forms_agree(a in net(2, 1), b in net(1, 2), x in inputs(3)) {
        let mut expected = a.eval(&x[..2]).unwrap();
        expected.extend(b.eval(&x[2..]).unwrap());
        let deep = parallelize(&[a.clone(), b.clone()]).unwrap();
        let shallow = parallelize_shallow(&[a.clone(), b.clone()]).unwrap();
        prop_assert!(close(&deep.eval(&x).unwrap(), &expected));
        prop_assert!(close(&shallow.eval(&x).unwrap(), &expected));
        prop_assert_eq!(deep.depth(), a.depth() + b.depth());
        prop_assert_eq!(shallow.depth(), a.depth().max(b.depth()));
    }

    #[test]
    fn stacking_shares_the_input(a in net(2, 1), b in net(2, 2), x in inputs(2)) {
        let mut expected = a.eval(&x).unwrap();
        expected.extend(b.eval(&x).unwrap());
        prop_assert!(close(&stack(&[a, b]).unwrap().eval(&x).unwrap(), &expected));
    }

    #[test]
    fn fixing_inputs_substitutes_constants(n in net(3, 2), x in inputs(3)) {
        let fixed = fix_inputs(&n, &[(1, x[1])]).unwrap();
        prop_assert_eq!(fixed.input_dim(), 2);
        prop_assert!(close(&fixed.eval(&[x[0], x[2]]).unwrap(), &n.eval(&x).unwrap()));
    }

    #[test]
    fn transformers_reproduce_networks(
        n in net(4, 3),
        tokens in 1usize..5,
        x in inputs(4),
    ) {
        let t = transformerify(&n, tokens).unwrap();
        prop_assert!(close(&transformer_eval(&t, &x).unwrap(), &n.eval(&x).unwrap()));
        prop_assert_eq!((t.depth(), t.width()), (n.depth(), n.width()));
        prop_assert!(t.nnz() <= 2 * n.nnz());
        prop_assert!(t.blocks().iter().all(|b| b.heads.len() == tokens));
    }

    #[test]
    fn json_preserves_networks(n in net(2, 2), x in inputs(2)) {
        let back: CompiledNet = serde_json::from_str(&serde_json::to_string(&n).unwrap()).unwrap();
        prop_assert_eq!(back.eval(&x).unwrap(), n.eval(&x).unwrap());
        prop_assert_eq!(back.meta(), n.meta());
    }

    #[test]
    fn greedy_packing_is_separated_and_covering(
        points in prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 1..40),
        delta in 0.1..0.6f64,
    ) {
        let samples: Vec<ContextQuery> = points
            .iter()
            .map(|&(a, x)| {
                ContextQuery::new(PICMeasure::uniform(vec![vec![a]]).unwrap(), vec![x]).unwrap()
            })
            .collect();
        let packing = greedy_packing(&samples, delta, delta / 2.0).unwrap();
        let marks = packing.landmarks();
        for (i, a) in marks.iter().enumerate() {
            for b in &marks[..i] {
                prop_assert!(pair_metric(a, b).unwrap() >= delta - 1e-12);
            }
        }
        for s in &samples {
            let nearest = marks
                .iter()
                .map(|m| pair_metric(s, m).unwrap())
                .fold(f64::INFINITY, f64::min);
            prop_assert!(nearest < delta);
        }
        let labels = assign_cells(&packing, &samples).unwrap();
        for (s, l) in samples.iter().zip(&labels.labels) {
            if let Some(k) = l.cell() {
                prop_assert!(pair_metric(s, &marks[k]).unwrap() < delta / 2.0);
            }
        }
    }
}
