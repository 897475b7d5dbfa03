//! Algebraic invariants over randomly generated inputs.

use acn_core::backend::lie::{f45_algebra, random_nilpotent_extension, random_rational};
use acn_core::backend::{curvature, GeometryBackend, LieBackend, StructureConstants};
use acn_core::connections::{
    almost_phi_defect, check_connection_flags, f45_family, symmetric_part_residual, ClassGuard, LambdaMu, QTable,
    TenParams,
};
use acn_core::curvature::{check_curvature_like, pi_basis, verify_r_prime_formula};
use acn_core::fundamental::{classify, fundamental_tensor, nijenhuis};
use acn_core::residual::Tolerance;
use acn_core::tensor::invert_metric;
use acn_core::{AcnStructure, FrameTensor, Rational, Scalar};
use num_traits::Zero;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_tensor(rng: &mut ChaCha8Rng, dim: usize, order: usize) -> FrameTensor<Rational> {
    FrameTensor::from_fn(dim, order, |_| random_rational(rng, 4, 3))
}

fn random_backend(seed: u64) -> LieBackend<Rational> {
    let mut r = rng(seed);
    let n = r.gen_range(1..=2);
    let c: StructureConstants<Rational> = random_nilpotent_extension(&mut r, n);
    LieBackend::new(AcnStructure::canonical(n), c).unwrap()
}

fn cases(n: u32) -> ProptestConfig {
    ProptestConfig { cases: n, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(cases(48))]

    #[test]
    fn contraction_is_bilinear(seed in any::<u64>(), dim in prop_oneof![Just(3usize), Just(5)], sa in 0usize..3, sb in 0usize..2) {
        let mut r = rng(seed);
        let (a, c) = (random_tensor(&mut r, dim, 3), random_tensor(&mut r, dim, 3));
        let b = random_tensor(&mut r, dim, 2);
        let k: Rational = random_rational(&mut r, 5, 4);
        let lhs = a.add(&c.scale(&k)).unwrap().contract(&b, sa, sb).unwrap();
        let rhs = a.contract(&b, sa, sb).unwrap().add(&c.contract(&b, sa, sb).unwrap().scale(&k)).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn raise_undoes_lower(seed in any::<u64>(), n in 1usize..3, slot in 0usize..3) {
        let s = AcnStructure::<Rational>::canonical(n);
        let t = random_tensor(&mut rng(seed), s.dim(), 3);
        let back = t.lower(s.g(), slot).unwrap().raise(s.g_inv(), slot).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn metric_inverse_is_an_involution(seed in any::<u64>(), dim in prop_oneof![Just(3usize), Just(5)]) {
        let mut r = rng(seed);
        let m = random_tensor(&mut r, dim, 2);
        let g = m.symmetrized(0, 1).unwrap();
        if let Ok(inv) = invert_metric(&g) {
            prop_assert_eq!(inv.contract(&g, 1, 0).unwrap(), FrameTensor::identity(dim));
            prop_assert_eq!(invert_metric(&inv).unwrap(), g);
        }
    }
}

proptest! {
    #![proptest_config(cases(32))]

    #[test]
    fn ten_parameter_family_is_almost_phi(seed in any::<u64>()) {
        let b = random_backend(seed);
        let s = b.structure();
        let fd = fundamental_tensor(&b, &b.levi_civita().unwrap()).unwrap();
        let table = QTable::new(s, &fd).unwrap();
        let mut r = rng(seed ^ 0x5eed);
        for _ in 0..4 {
            let t = TenParams::random(&mut r, 5, 4);
            let q = table.lowered(&t).unwrap();
            prop_assert!(almost_phi_defect(s, &fd, &q).unwrap().is_zero());
            let qq = table.q(s, &fd, &t).unwrap();
            let conn = qq.apply(&b.levi_civita().unwrap()).unwrap();
            prop_assert!(check_connection_flags(&b, &conn).unwrap().phi.is_exact_zero());
        }
    }

    #[test]
    fn symmetric_part_matches_closed_form(seed in any::<u64>()) {
        let b = random_backend(seed);
        let s = b.structure();
        let fd = fundamental_tensor(&b, &b.levi_civita().unwrap()).unwrap();
        let nd = nijenhuis(&b, &fd).unwrap();
        let table = QTable::new(s, &fd).unwrap();
        let t = TenParams::random(&mut rng(seed ^ 0x17), 5, 4);
        let q = table.q(s, &fd, &t).unwrap();
        prop_assert!(symmetric_part_residual(s, &fd, &nd, &t, &q).unwrap().is_exact_zero());
    }

    #[test]
    fn deformation_torsion_is_antisymmetrized_q(seed in any::<u64>()) {
        let b = random_backend(seed);
        let s = b.structure();
        let lc = b.levi_civita().unwrap();
        let fd = fundamental_tensor(&b, &lc).unwrap();
        let t = TenParams::random(&mut rng(seed ^ 0x71), 5, 4);
        let q = QTable::new(s, &fd).unwrap().q(s, &fd, &t).unwrap();
        let tor = acn_core::connections::torsion(&q.apply(&lc).unwrap(), b.brackets(), s.g()).unwrap();
        let want = q.q.sub(&q.q.swapped(0, 1).unwrap()).unwrap();
        prop_assert_eq!(tor, want);
    }

    #[test]
    fn parameter_conditions_force_parallel_structure(seed in any::<u64>(), natural in any::<bool>()) {
        let b = random_backend(seed);
        let s = b.structure();
        let lc = b.levi_civita().unwrap();
        let fd = fundamental_tensor(&b, &lc).unwrap();
        let mut t = TenParams::random(&mut rng(seed ^ 0x2), 5, 4);
        if natural {
            t.t[8] = Rational::zero();
            t.t[9] = Rational::zero();
            t.t[5] = -t.t[4].clone();
            t.t[7] = -t.t[6].clone();
        }
        t.t[1] = t.t[8].clone() - t.t[0].clone();
        t.t[3] = t.t[9].clone() - t.t[2].clone();
        let cond = t.conditions();
        prop_assert!(cond.almost_contact);
        prop_assert_eq!(cond.natural, natural);
        let q = QTable::new(s, &fd).unwrap().q(s, &fd, &t).unwrap();
        let flags = check_connection_flags(&b, &q.apply(&lc).unwrap()).unwrap();
        prop_assert!(flags.xi.is_exact_zero());
        prop_assert!(flags.eta.is_exact_zero());
        if natural {
            prop_assert!(flags.g.is_exact_zero());
        }
    }
}

proptest! {
    #![proptest_config(cases(12))]

    #[test]
    fn levi_civita_curvature_is_curvature_like(seed in any::<u64>()) {
        let b = random_backend(seed);
        let r = curvature(&b, |b| b.levi_civita()).unwrap();
        prop_assert!(check_curvature_like(&r).unwrap().worst().is_exact_zero());
    }

    #[test]
    fn family_curvature_matches_closed_form(a in -4i64..5, b_ in -4i64..5, l in -6i64..7, m in -6i64..7, n in 1usize..3) {
        let (alpha, beta) = (Rational::ratio(a, 2), Rational::ratio(b_, 3));
        let b = LieBackend::new(AcnStructure::canonical(n), f45_algebra(n, alpha, beta)).unwrap();
        let s = b.structure();
        let lc = b.levi_civita().unwrap();
        let fd = fundamental_tensor(&b, &lc).unwrap();
        let nd = nijenhuis(&b, &fd).unwrap();
        let cr = classify(s, &fd, &nd, Tolerance::default()).unwrap();
        let lm = LambdaMu::new(Rational::ratio(l, 2), Rational::ratio(m, 3));
        let r = curvature(&b, |b| b.levi_civita()).unwrap();
        let r_prime = curvature(&b, |b| {
            let lc = b.levi_civita()?;
            let fd = fundamental_tensor(b, &lc)?;
            f45_family(b.structure(), &lc, &fd, &lm, ClassGuard::Require(&cr))
        })
        .unwrap();
        let report = verify_r_prime_formula(s, &fd, &r, &r_prime, &pi_basis(s).unwrap()).unwrap();
        prop_assert!(report.formula.is_exact_zero());
        prop_assert!(report.phi_kaehler.is_exact_zero());
        prop_assert!(report.xi_slot.is_exact_zero());
        prop_assert!(report.curvature_like.worst().is_exact_zero());
    }
}
