use colorgns::catalog::{self, rng};
use colorgns::color_lie::check_axioms;
use colorgns::hc_rep::check_unitary_rep;
use colorgns_cli::docs::{self, Document};
use proptest::prelude::*;
use rand::seq::SliceRandom;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn algebra_documents_round_trip(seed in any::<u64>()) {
        let l = catalog::random_color_algebra(&mut rng(seed), 6);
        let text = docs::to_json(&docs::algebra_doc(&l));
        let Document::Algebra(doc) = docs::parse_document(&text).unwrap() else { panic!() };
        let back = docs::algebra_from(&doc).unwrap();
        prop_assert_eq!(back.basis(), l.basis());
        prop_assert_eq!(back.structure_triples(), l.structure_triples());
        prop_assert!(check_axioms(&back, 1e-9).passed);
    }

    #[test]
    fn representation_documents_round_trip(seed in any::<u64>()) {
        let r = catalog::random_perfect_rep(&mut rng(seed), 6);
        let text = docs::to_json(&docs::rep_doc(&r, None));
        let Document::Rep(doc) = docs::parse_document(&text).unwrap() else { panic!() };
        let (back, cyclic) = docs::unitary_rep_from(&doc).unwrap();
        prop_assert!(cyclic.is_none());
        prop_assert_eq!(back.rho.len(), r.rho.len());
        for (a, b) in back.rho.iter().zip(&r.rho) {
            prop_assert_eq!(&a.matrix, &b.matrix);
        }
        prop_assert_eq!(&back.pi, &r.pi);
        prop_assert_eq!(back.space.grams(), r.space.grams());
        prop_assert_eq!(back.space.twist(), r.space.twist());
        prop_assert!(check_unitary_rep(&back, 1e-9).passed);
        // Serializing the reloaded object reproduces the text.
        prop_assert_eq!(docs::to_json(&docs::rep_doc(&back, None)), text);
    }

    #[test]
    fn extras_survive_basis_reordering(seed in any::<u64>(), shuffle in any::<u64>()) {
        let (r, v0) = catalog::random_rep(seed);
        let mut doc = docs::rep_doc(&r, Some(&v0));
        // Permute the document's basis; ad rows and columns must follow.
        let n = doc.algebra.basis.len();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng(shuffle));
        doc.algebra.basis = perm.iter().map(|&i| doc.algebra.basis[i].clone()).collect();
        for e in &mut doc.extras {
            let old = e.ad.clone();
            e.ad = perm.iter().map(|&i| perm.iter().map(|&j| old[i][j]).collect()).collect();
        }
        let (back, _) = docs::unitary_rep_from(&doc).unwrap();
        for (a, b) in back.pair.extras.iter().zip(&r.pair.extras) {
            prop_assert_eq!(&a.ad, &b.ad);
        }
    }
}
