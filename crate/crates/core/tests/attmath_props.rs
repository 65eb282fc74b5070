use proptest::prelude::*;
use swayalign::attmath::*;

fn sym(a: [f64; 6]) -> Mat3 {
    Mat3::new(a[0], a[1], a[2], a[1], a[3], a[4], a[2], a[4], a[5])
}

fn reconstruct(e: &SymEig3) -> Mat3 {
    e.vectors * Mat3::from_diagonal(&Vec3::from(e.values)) * e.vectors.transpose()
}

prop_compose! {
    fn any_rotation()(v in prop::array::uniform3(-3.0f64..3.0)) -> Mat3 {
        rotation_from_vector(&Vec3::from(v))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn eigen_reconstruction_and_gram(a in prop::array::uniform6(-1e3f64..1e3)) {
        let m = sym(a);
        let e = sym_eig3(&m);
        let scale = m.norm().max(f64::MIN_POSITIVE);
        prop_assert!((reconstruct(&e) - m).norm() <= 1e-12 * scale);
        prop_assert!((e.vectors.transpose() * e.vectors - Mat3::identity()).norm() <= 1e-12);
        prop_assert!((e.values.iter().sum::<f64>() - m.trace()).abs() <= 1e-12 * scale);
        prop_assert!(e.values[0] >= e.values[1] && e.values[1] >= e.values[2]);
    }

    #[test]
    fn similar_matrices_share_eigenvalues(a in prop::array::uniform6(-1.0f64..1.0), r in any_rotation()) {
        let t = sym(a);
        let e1 = sym_eig3(&t);
        let e2 = sym_eig3(&(r * t * r.transpose()));
        for i in 0..3 {
            prop_assert!((e1.values[i] - e2.values[i]).abs() <= 1e-11);
        }
    }

    #[test]
    fn eigen_is_deterministic(a in prop::array::uniform6(-10.0f64..10.0)) {
        let m = sym(a);
        prop_assert_eq!(sym_eig3(&m), sym_eig3(&m));
    }

    #[test]
    fn euler_round_trip(p in -1.5f64..1.5, r in -3.1f64..3.1, y in -3.1f64..3.1) {
        let e = EulerAngles::new(p, r, y);
        let back = dcm_to_euler(&euler_to_dcm(&e)).unwrap();
        prop_assert!((back.pitch - p).abs() < 1e-10);
        prop_assert!((back.roll - r).abs() < 1e-10);
        prop_assert!((back.yaw - y).abs() < 1e-10);
    }

    #[test]
    fn orthonormalize_is_polar_factor(r in any_rotation(), e in prop::array::uniform6(-1.0f64..1.0)) {
        let c = r * (Mat3::identity() + sym(e) * 1e-6);
        let o = orthonormalize(&c).unwrap();
        prop_assert!(orthonormality_residual(&o) < 1e-14);
        prop_assert!((o - r).norm() < 1e-5);
    }

    #[test]
    fn log_map_inverts_rodrigues(v in prop::array::uniform3(-1.0f64..1.0)) {
        let phi = Vec3::from(v) * 3.0;
        prop_assume!(phi.norm() < 3.1);
        prop_assert!((rotation_vector(&rotation_from_vector(&phi)) - phi).norm() < 1e-12);
    }

    #[test]
    fn max_eig4_is_an_eigenpair(a in prop::array::uniform10(-5.0f64..5.0)) {
        let k = Mat4::new(
            a[0], a[1], a[2], a[3],
            a[1], a[4], a[5], a[6],
            a[2], a[5], a[7], a[8],
            a[3], a[6], a[8], a[9],
        );
        let (l, v) = max_eig4(&k);
        prop_assert!((v.norm() - 1.0).abs() < 1e-14);
        prop_assert!((k * v - v * l).norm() <= 1e-10 * k.norm());
    }
}
