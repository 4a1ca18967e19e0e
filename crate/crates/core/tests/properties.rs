use std::f64::consts::TAU;

use hecke_spectra::lowlying::{closed_form_pairing, pair_density, PwTestFunction, SymmetryType};
use hecke_spectra::measures::{normalize, pair, sample, MeasureSpec, TorusPoint};
use hecke_spectra::oracle::sublattice_count;
use hecke_spectra::padic_hecke::{Cocharacter, HeckeAlgebra, HeckeElement};
use hecke_spectra::satake::{
    eigenvalue_from_parameter, satake_params_from_eigenvalues, satake_transform_in, SatakeParameter, SymLaurent,
};
use proptest::prelude::*;

fn prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5, 7])
}

fn cochar(n: usize, max: i64) -> impl Strategy<Value = Cocharacter> {
    prop::collection::vec(0..=max, n).prop_map(|v| Cocharacter::new(v).unwrap())
}

fn chart(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..TAU, n - 1)
}

fn transform(alg: &HeckeAlgebra, w: &Cocharacter) -> SymLaurent {
    satake_transform_in(alg, &HeckeElement::basis(w, alg.prime())).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn transform_is_weyl_invariant(p in prime(), w in cochar(3, 2), free in chart(3), perm in Just(vec![0usize, 1, 2]).prop_shuffle()) {
        let alg = HeckeAlgebra::new(3, p).unwrap();
        let ev = transform(&alg, &w).torus_evaluator();
        let x = TorusPoint::from_chart(&free);
        let a = x.angles();
        let permuted: Vec<f64> = perm.iter().map(|&i| a[i]).collect();
        let (u, v) = (ev.eval(a), ev.eval(&permuted));
        prop_assert!((u - v).norm() <= 1e-10 * (1.0 + u.norm()), "{u} vs {v}");
    }

    #[test]
    fn convolution_commutes_and_transform_is_multiplicative(p in prime(), a in cochar(3, 1), b in cochar(3, 1)) {
        let alg = HeckeAlgebra::new(3, p).unwrap();
        let (fa, fb) = (HeckeElement::basis(&a, p), HeckeElement::basis(&b, p));
        let ab = alg.convolve(&fa, &fb).unwrap();
        prop_assert!(ab == alg.convolve(&fb, &fa).unwrap());
        let lhs = satake_transform_in(&alg, &ab).unwrap();
        let rhs = transform(&alg, &a).mul(&transform(&alg, &b)).unwrap();
        prop_assert!(lhs == rhs, "{lhs} != {rhs}");
    }

    #[test]
    fn rank_two_product_is_multiplicative(p in prime(), a in 0i64..4, b in 0i64..4) {
        let alg = HeckeAlgebra::new(2, p).unwrap();
        let (wa, wb) = (Cocharacter::new(vec![a, 0]).unwrap(), Cocharacter::new(vec![b, 0]).unwrap());
        let ab = alg.convolve(&HeckeElement::basis(&wa, p), &HeckeElement::basis(&wb, p)).unwrap();
        let lhs = satake_transform_in(&alg, &ab).unwrap();
        prop_assert!(lhs == transform(&alg, &wa).mul(&transform(&alg, &wb)).unwrap());
    }

    #[test]
    fn degree_matches_lattice_count(p in prime(), w in cochar(3, 2)) {
        let alg = HeckeAlgebra::new(3, p).unwrap();
        prop_assert_eq!(alg.degree(&w).unwrap(), sublattice_count(&w, p));
    }

    #[test]
    fn extraction_round_trip(p in prime(), n in 2usize..=4, seed in prop::collection::vec(0.0..TAU, 3)) {
        let x = TorusPoint::from_chart(&seed[..n - 1]);
        let u = SatakeParameter::from_angles(x.angles()).unwrap();
        let lambdas: Vec<_> = (1..n).map(|t| eigenvalue_from_parameter(&u, t, p).unwrap()).collect();
        let back = satake_params_from_eigenvalues(&lambdas, p).unwrap();
        prop_assert!(back.parameter.distance(&u) < 1e-8, "distance {}", back.parameter.distance(&u));
    }

    #[test]
    fn plancherel_averaging_identity(p in prime(), w in cochar(2, 3)) {
        let alg = HeckeAlgebra::new(2, p).unwrap();
        let spec = normalize(&MeasureSpec::plancherel(2, p).unwrap()).unwrap();
        let v = pair(&spec, &transform(&alg, &w)).unwrap();
        let expected = if w.is_zero() { 1.0 } else { 0.0 };
        prop_assert!((v.re - expected).abs() < 1e-9 && v.im.abs() < 1e-9, "{v}");
    }

    #[test]
    fn low_lying_quadrature_matches_closed_form(beta in 0.05f64..0.99) {
        let phi = PwTestFunction::new(beta).unwrap();
        for s in SymmetryType::ALL {
            let q = pair_density(s, &phi).unwrap();
            let c = closed_form_pairing(s, &phi).unwrap();
            prop_assert!((q - c).abs() < 1e-8, "{} at beta {beta}: {q} vs {c}", s.label());
        }
    }
}

#[test]
fn samples_do_not_depend_on_thread_count() {
    let spec = normalize(&MeasureSpec::plancherel(3, 5).unwrap()).unwrap();
    let draw = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| sample(&spec, 3000, 42).unwrap())
    };
    let (a, b) = (draw(1), draw(4));
    assert_eq!(a.proposals, b.proposals);
    assert!(a.points.iter().zip(&b.points).all(|(x, y)| x.angles() == y.angles()));
}
