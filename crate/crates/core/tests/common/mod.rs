#![allow(dead_code)]

use convlab::{ConvexSet, Functional, NormSpec, Rat, Vector, Window};
use proptest::prelude::*;

/// No regression files: integration tests have no `lib.rs` to anchor them.
pub fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

pub fn rat(span: i64) -> impl Strategy<Value = Rat> {
    (-span..=span, 1i64..=4).prop_map(|(n, d)| Rat::new(n, d))
}

pub fn int_vec(w: &Window, span: i64) -> impl Strategy<Value = Vector> {
    let w = w.clone();
    prop::collection::vec(-span..=span, w.len()).prop_map(move |xs| {
        Vector::from_entries(&w, w.indices().iter().zip(xs).map(|(&i, x)| (i, Rat::from_int(x)))).unwrap()
    })
}

pub fn rat_vec(w: &Window, span: i64) -> impl Strategy<Value = Vector> {
    let w = w.clone();
    prop::collection::vec(rat(span), w.len())
        .prop_map(move |xs| Vector::from_entries(&w, w.indices().iter().copied().zip(xs)).unwrap())
}

pub fn rat_fun(w: &Window, span: i64) -> impl Strategy<Value = Functional> {
    rat_vec(w, span).prop_map(|v| v.to_functional())
}

pub fn nonzero_fun(w: &Window, span: i64) -> impl Strategy<Value = Functional> {
    rat_fun(w, span).prop_filter("non-zero functional", |f| !f.is_zero())
}

pub fn polytope(w: &Window, span: i64, max_vertices: usize) -> impl Strategy<Value = ConvexSet> {
    prop::collection::vec(int_vec(w, span), 1..=max_vertices).prop_map(|vs| ConvexSet::polytope(vs).unwrap())
}

pub fn window(max_dim: usize) -> impl Strategy<Value = Window> {
    (2..=max_dim).prop_map(|d| Window::range(0, d - 1))
}

pub fn poly_norm() -> impl Strategy<Value = NormSpec> {
    prop_oneof![Just(NormSpec::SupC0), Just(NormSpec::Ell1), Just(NormSpec::BvC0)]
}

pub fn any_norm() -> impl Strategy<Value = NormSpec> {
    prop_oneof![
        Just(NormSpec::SupC0),
        Just(NormSpec::Ell1),
        Just(NormSpec::BvC0),
        Just(NormSpec::Ell2)
    ]
}

pub fn vertices(c: &ConvexSet) -> &[Vector] {
    match c {
        ConvexSet::Polytope { vertices } => vertices,
        _ => panic!("expected a polytope"),
    }
}
