//! Algebraic laws checked on generated graphs.

use proptest::prelude::*;
use proptest::sample::Index;

use lassokit::colimits::{image_factorization, is_colimit_cocone, pullback, pushout, Span};
use lassokit::contraction::{contract, pushforward_images};
use lassokit::cset::*;
use lassokit::decomposition::{
    aligned_legs, decomposition_colimit, images_decomposition, pullback_decomposition, width_vector,
    StructuredDecomposition,
};
use lassokit::fixtures::{graph, rgraph};
use lassokit::io::*;
use lassokit::lasso::{compose_lassos, congruences, grph_cc, rgrph_lassos};
use lassokit::random::{random_hom_into, random_subobject, random_tree_decomposition, rng, TreeBounds};
use lassokit::universe::enumerate_subobjects;

fn graphs(max_v: usize, max_e: usize) -> impl Strategy<Value = Instance> {
    (1..=max_v).prop_flat_map(move |n| {
        prop::collection::vec((0..n, 0..n), 0..=max_e).prop_map(move |edges| graph(n, &edges))
    })
}

fn rgraphs(max_v: usize, max_extra: usize) -> impl Strategy<Value = Instance> {
    (1..=max_v).prop_flat_map(move |n| {
        prop::collection::vec((0..n, 0..n), 0..=max_extra).prop_map(move |edges| rgraph(n, &edges))
    })
}

fn pick<T: Clone>(xs: &[T], i: Index) -> Option<T> {
    (!xs.is_empty()).then(|| xs[i.index(xs.len())].clone())
}

/// A hom between two generated graphs, when one exists.
fn hom_between(a: &Instance, b: &Instance, i: Index) -> Option<Hom> {
    pick(&enumerate_homs(a, b).ok()?, i)
}

fn same_kernel(a: &Hom, b: &Hom) -> bool {
    kernel_refines(a, b) && kernel_refines(b, a)
}

/// Glues the bags of a tree decomposition one pushout at a time.
fn iterated_pushouts(d: &StructuredDecomposition) -> Instance {
    let mut into: Vec<Option<Hom>> = vec![None; d.bags.len()];
    let Some(first) = d.bags.first() else {
        return Instance::empty(d.schema.clone());
    };
    let mut acc = first.clone();
    into[0] = Some(Hom::identity(first));
    for (k, &(p, c)) in d.shape.edges.iter().enumerate() {
        let (l, r) = &d.legs[k];
        let to_acc = l.then(into[p].as_ref().expect("parent glued first"));
        let po = pushout(&Span::new(to_acc, r.clone()).unwrap());
        for h in into.iter_mut().flatten() {
            *h = h.then(&po.left);
        }
        into[c] = Some(po.right);
        acc = po.apex;
    }
    acc
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn balanced(a in graphs(3, 3), b in graphs(3, 3), i in any::<Index>()) {
        if let Some(h) = hom_between(&a, &b, i) {
            prop_assert_eq!(is_iso(&h), is_mono(&h) && is_epi(&h));
        }
    }

    #[test]
    fn isomorphism_is_symmetric(a in graphs(3, 3), seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut vs: Vec<usize> = (0..a.carrier(0)).collect();
        let mut es: Vec<usize> = (0..a.carrier(1)).collect();
        use rand::seq::SliceRandom;
        vs.shuffle(&mut r);
        es.shuffle(&mut r);
        let b = a.permuted(&[vs, es]);
        prop_assert!(are_isomorphic(&a, &b) && are_isomorphic(&b, &a));
        let f = find_isomorphism(&a, &b).expect("relabelling is an iso");
        let g = find_isomorphism(&b, &a).expect("symmetric");
        prop_assert!(is_iso(&f) && is_iso(&g));
        prop_assert_eq!(check_hom(&f), Ok(()));
    }

    #[test]
    fn image_is_the_least_mono_factorization(a in graphs(3, 2), b in graphs(3, 3), i in any::<Index>()) {
        if let Some(h) = hom_between(&a, &b, i) {
            let im = image_factorization(&h);
            prop_assert!(is_epi(&im.epi) && is_mono(&im.mono));
            prop_assert_eq!(&im.epi.then(&im.mono), &h);
            for m in enumerate_subobjects(&b).unwrap() {
                let through_m = factor_mono(&h, &m).is_some();
                prop_assert_eq!(through_m, factor_mono(&im.mono, &m).is_some());
            }
        }
    }

    #[test]
    fn image_is_unchanged_by_epi_precomposition(
        a in graphs(3, 2), b in graphs(3, 3), i in any::<Index>(), j in any::<Index>()
    ) {
        if let Some(h) = hom_between(&a, &b, i) {
            let e = epi_onto(&a, j);
            let pre = image_factorization(&e.then(&h));
            let direct = image_factorization(&h);
            prop_assert!(are_isomorphic(&pre.image, &direct.image));
            prop_assert_eq!(pre.mono.components(), direct.mono.components());
        }
    }

    #[test]
    fn mono_and_epi_cancellation(a in graphs(2, 2), b in graphs(3, 2), c in graphs(3, 3), i in any::<Index>(), j in any::<Index>()) {
        if let (Some(f), Some(g)) = (hom_between(&a, &b, i), hom_between(&b, &c, j)) {
            let gf = f.then(&g);
            if is_mono(&gf) { prop_assert!(is_mono(&f)); }
            if is_epi(&gf) { prop_assert!(is_epi(&g)); }
            prop_assert_eq!(compose(&g, &f).unwrap(), gf);
        }
    }

    #[test]
    fn pushouts_of_monic_spans(y in graphs(3, 3), seed in any::<u64>()) {
        let mut r = rng(seed);
        let m1 = random_subobject(&mut r, &y);
        let x = m1.dom().clone();
        let m2 = random_subobject(&mut r, &y);
        // Pull the two subobjects back to a common apex.
        let pb = pullback(&m1, &m2).unwrap();
        let po = pushout(&Span::new(pb.left.clone(), pb.right.clone()).unwrap());
        prop_assert!(is_mono(&po.left) && is_mono(&po.right));
        prop_assert_eq!(pb.left.then(&m1), pb.right.then(&m2));
        let span = Span::new(pb.left, pb.right).unwrap();
        let cocone = lassokit::colimits::Cocone {
            diagram: span.to_diagram(),
            apex: po.apex.clone(),
            legs: vec![po.left.clone(), po.right.clone(), span.left.then(&po.left)],
        };
        prop_assert!(is_colimit_cocone(&cocone));
        prop_assert!(x.total_size() <= y.total_size());
    }

    #[test]
    fn tree_colimit_is_iterated_pushouts(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (d, y) = random_tree_decomposition(&mut r, &lassokit::fixtures::grph(), TreeBounds::default()).unwrap();
        prop_assert!(are_isomorphic(&iterated_pushouts(&d), &y));
    }

    #[test]
    fn lasso_composition_is_associative(x in rgraphs(3, 2), i in 0usize..8, j in 0usize..8, k in 0usize..8) {
        let ls = rgrph_lassos();
        let left = compose_lassos(&compose_lassos(&ls[i], &ls[j]).unwrap(), &ls[k]).unwrap();
        let right = compose_lassos(&ls[i], &compose_lassos(&ls[j], &ls[k]).unwrap()).unwrap();
        prop_assert!(same_kernel(&left.eta(&x), &right.eta(&x)));
    }

    #[test]
    fn lasso_units_are_natural(a in rgraphs(2, 2), b in rgraphs(3, 2), i in any::<Index>(), l in 0usize..8) {
        if let Some(f) = hom_between(&a, &b, i) {
            let lasso = &rgrph_lassos()[l];
            let lf = lasso.on_hom(&f).unwrap();
            prop_assert_eq!(lasso.eta(&a).then(&lf), f.then(&lasso.eta(&b)));
        }
    }

    #[test]
    fn pushforward_width_never_grows(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (d, y) = random_tree_decomposition(&mut r, &lassokit::fixtures::grph(), TreeBounds::default()).unwrap();
        let f = random_subobject(&mut r, &y);
        let out = pushforward_images(&d, &f, &grph_cc()).unwrap();
        prop_assert_eq!(&out.output.shape, &d.shape);
        prop_assert!(width_vector(&out.output).le(&width_vector(&d)));
    }

    #[test]
    fn pulled_back_decompositions_glue_to_the_domain(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (d, y) = random_tree_decomposition(&mut r, &lassokit::fixtures::grph(), TreeBounds::default()).unwrap();
        let delta = random_hom_into(&mut r, &y, 3, 3).unwrap();
        let pb = pullback_decomposition(&d, &delta).unwrap();
        prop_assert!(are_isomorphic(&decomposition_colimit(&pb.decomposition).apex, delta.dom()));
    }

    #[test]
    fn images_of_a_colimit_cocone_glue_back(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (d, y) = random_tree_decomposition(&mut r, &lassokit::fixtures::grph(), TreeBounds::default()).unwrap();
        let legs = aligned_legs(&d, &y).unwrap();
        let (images, _) = images_decomposition(&d, &legs);
        prop_assert!(are_isomorphic(&decomposition_colimit(&images).apex, &y));
        for (bag, image) in d.bags.iter().zip(&images.bags) {
            prop_assert!(are_isomorphic(bag, image));
        }
    }

    #[test]
    fn width_never_grows_under_bagwise_epis(seed in any::<u64>(), j in any::<Index>()) {
        let mut r = rng(seed);
        let (d, y) = random_tree_decomposition(&mut r, &lassokit::fixtures::grph(), TreeBounds::default()).unwrap();
        let q = pick(&congruences(&y), j).expect("the identity congruence exists");
        let legs: Vec<Hom> = aligned_legs(&d, &y).unwrap().iter().map(|l| l.then(&q)).collect();
        let (images, _) = images_decomposition(&d, &legs);
        prop_assert_eq!(&images.shape, &d.shape);
        prop_assert!(width_vector(&images).le(&width_vector(&d)));
    }

    #[test]
    fn round_trips(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (d, y) = random_tree_decomposition(&mut r, &lassokit::fixtures::rgrph(), TreeBounds::default()).unwrap();
        prop_assert_eq!(parse_decomposition(&decomposition_to_json(&d)).unwrap(), d);
        prop_assert_eq!(parse_instance(&instance_to_json(&y)).unwrap(), y.clone());
        let f = random_subobject(&mut r, &y);
        prop_assert_eq!(parse_hom(&hom_to_json(&f)).unwrap(), f.clone());
        let c = contract(&f, &lassokit::lasso::rgrph_lasso(lassokit::lasso::RGrphKind::Gather)).unwrap();
        prop_assert_eq!(parse_contraction(&contraction_to_json(&c)).unwrap(), c);
    }
}

/// The unique `u` with `u ∘ m = h` for a mono `m`, if `h` lands inside it.
fn factor_mono(h: &Hom, m: &Hom) -> Option<Hom> {
    let schema = h.dom().schema();
    let mut comps = Vec::new();
    for s in 0..schema.sort_count() {
        let comp: Option<Vec<usize>> = h
            .component(s)
            .iter()
            .map(|y| m.component(s).iter().position(|z| z == y))
            .collect();
        comps.push(comp?);
    }
    Hom::new(h.dom().clone(), m.dom().clone(), comps).ok()
}

/// An epi onto `a`: the first projection of the kernel pair of one of its
/// quotient maps.
fn epi_onto(a: &Instance, j: Index) -> Hom {
    let q = pick(&congruences(a), j).expect("the identity congruence exists");
    let e = pullback(&q, &q).unwrap().left;
    assert!(is_epi(&e));
    e
}
