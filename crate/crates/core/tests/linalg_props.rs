use oliver_core::linalg::{matrix_exp, matrix_log, unipotent_index, vec_mat, FieldSpec, FpMatrix};
use proptest::prelude::*;

fn unitriangular(p: u32, n: usize) -> impl Strategy<Value = FpMatrix> {
    prop::collection::vec(0..p as u8, n * n).prop_map(move |raw| {
        let f = FieldSpec::new(p).unwrap();
        let mut m = FpMatrix::identity(f, n);
        for i in 0..n {
            for j in i + 1..n {
                m.set(i, j, raw[i * n + j]);
            }
        }
        m
    })
}

fn prime_and_dim() -> impl Strategy<Value = (u32, usize)> {
    (prop::sample::select(vec![3u32, 5, 7, 11]), 1usize..=5)
}

proptest! {
    #[test]
    fn inverse_and_associativity(
        (x, y, z) in prime_and_dim().prop_flat_map(|(p, n)| (unitriangular(p, n), unitriangular(p, n), unitriangular(p, n)))
    ) {
        prop_assert!(x.mul(&x.inverse().unwrap()).is_identity());
        prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
    }

    #[test]
    fn log_exp_round_trip(x in unitriangular(7, 5)) {
        // Index at most 5 < 7, so both series are exact.
        let l = matrix_log(&x).unwrap();
        prop_assert_eq!(matrix_exp(&l).unwrap(), x);
    }

    #[test]
    fn index_bounds_the_dimension(x in unitriangular(5, 5)) {
        let d = unipotent_index(&x).unwrap();
        prop_assert!((1..=5).contains(&d));
        prop_assert!(x.minus_identity().pow(d as u64).is_zero());
        if d > 1 {
            prop_assert!(!x.minus_identity().pow(d as u64 - 1).is_zero());
        }
    }

    #[test]
    fn right_action_is_a_homomorphism(x in unitriangular(5, 4), y in unitriangular(5, 4), v in prop::collection::vec(0u8..5, 4)) {
        let f = FieldSpec::new(5).unwrap();
        prop_assert_eq!(vec_mat(f, &vec_mat(f, &v, &x), &y), vec_mat(f, &v, &x.mul(&y)));
    }
}
