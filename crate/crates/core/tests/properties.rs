//! Randomized algebraic invariants at small resolution.

mod common;

use common::Trig;
use proptest::prelude::*;
use qgs_core::algebra::{
    ad_star, lie_bracket, roger_cocycle, t_operator, CocycleParams,
};
use qgs_core::spectral::snapshot::{read_snapshot, write_snapshot};
use qgs_core::spectral::{l2_inner, SpectralField, VelocityField};

const N: usize = 16;

fn trig(band: i64) -> impl Strategy<Value = Trig> {
    prop::collection::vec(
        (0..=band, -band..=band, -1.0..1.0f64, -1.0..1.0f64)
            .prop_filter("half lattice", |&(k1, k2, _, _)| k1 > 0 || k2 > 0),
        1..5,
    )
    .prop_map(|terms| Trig { terms })
}

fn field(t: &Trig, h: [f64; 2]) -> VelocityField {
    VelocityField::new(t.field(N), h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn t_is_skew_adjoint(a in trig(4), b in trig(4), beta in -3.0..3.0f64) {
        let p = CocycleParams::new(beta);
        let (u, v) = (a.velocity_field(N), b.velocity_field(N));
        let lhs = l2_inner(&t_operator(&u, p), &v).unwrap();
        let rhs = -l2_inner(&u, &t_operator(&v, p)).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn cocycle_is_bilinear(a in trig(4), b in trig(4), c in trig(4), s in -2.0..2.0f64) {
        let p = CocycleParams::new(1.1);
        let (u, v, w) = (a.velocity_field(N), b.velocity_field(N), c.velocity_field(N));
        let lhs = roger_cocycle(&(&u + &(&w * s)), &v, p).unwrap();
        let rhs = roger_cocycle(&u, &v, p).unwrap() + s * roger_cocycle(&w, &v, p).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn bracket_is_antisymmetric(a in trig(3), b in trig(3), h in prop::array::uniform2(-1.0..1.0f64)) {
        let u = field(&a, h);
        let v = b.velocity_field(N);
        let s = &lie_bracket(&u, &v).unwrap() + &lie_bracket(&v, &u).unwrap();
        prop_assert!(s.norm() < 1e-11);
        prop_assert!(lie_bracket(&u, &u).unwrap().norm() < 1e-11);
    }

    // <<ad*_X Y, Z>> = <<Y, ad_X Z>> with the right-invariant ad_X = -[X, .]
    #[test]
    fn coadjoint_is_dual_to_bracket(a in trig(2), b in trig(2), c in trig(2)) {
        let (x, y, z) = (a.velocity_field(N), b.velocity_field(N), c.velocity_field(N));
        let lhs = l2_inner(&ad_star(&x, &y).unwrap(), &z).unwrap();
        let rhs = -l2_inner(&y, &lie_bracket(&x, &z).unwrap()).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn inverse_laplacian_undoes_laplacian(a in trig(6)) {
        let f = a.field(N);
        let back = f.laplacian().inv_laplacian().unwrap();
        prop_assert!((&back - &f).max_coeff() < 1e-14);
    }

    #[test]
    fn dealiasing_is_idempotent(a in trig(7)) {
        let f = a.field(N).dealiased();
        prop_assert_eq!(f.clone().dealiased(), f.clone());
        let cut = SpectralField::dealias_cutoff(N);
        prop_assert!(f.support(0.0).iter().all(|k| k.max_abs() <= cut));
    }

    #[test]
    fn snapshot_round_trip(a in trig(7), h in prop::array::uniform2(-5.0..5.0f64), t in 0.0..100.0f64) {
        let u = field(&a, h);
        let mut buf = Vec::new();
        write_snapshot(&mut buf, t, &u).unwrap();
        let back = read_snapshot(buf.as_slice()).unwrap();
        prop_assert_eq!(back.t, t);
        prop_assert_eq!(back.field, u);
    }
}
