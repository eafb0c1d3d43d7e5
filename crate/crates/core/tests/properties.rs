use proptest::prelude::*;
use ultrafriable::{
    count_friable, count_ultrafriable, count_ultrafriable_residues, enumerate_characters,
    modulus_context, PrimePowerTable,
};

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn upsilon_monotone_and_below_psi(x in 1.0f64..1e6, dx in 0.0f64..1e5, y in 2u64..300, q in 1u64..40) {
        let table = PrimePowerTable::build(y).unwrap();
        let ctx = modulus_context(q, &table).unwrap();
        prop_assume!(ctx.require_y_friable(y).is_ok());
        let one = modulus_context(1, &table).unwrap();
        let a = count_ultrafriable(x, &table, &ctx).unwrap();
        let b = count_ultrafriable(x + dx, &table, &ctx).unwrap();
        prop_assert!(a <= b);
        prop_assert!(a <= count_ultrafriable(x, &table, &one).unwrap());
        prop_assert!(a <= count_friable(x, y, q).unwrap());
    }

    #[test]
    fn upsilon_monotone_in_y(x in 1.0f64..1e9, y in 2u64..200, dy in 0u64..100) {
        let small = PrimePowerTable::build(y).unwrap();
        let large = PrimePowerTable::build(y + dy).unwrap();
        let a = count_ultrafriable(x, &small, &modulus_context(1, &small).unwrap()).unwrap();
        let b = count_ultrafriable(x, &large, &modulus_context(1, &large).unwrap()).unwrap();
        prop_assert!(a <= b);
    }

    #[test]
    fn residues_partition_the_count(x in 1.0f64..1e12, y in 2u64..80, q in 1u64..60) {
        let table = PrimePowerTable::build(y).unwrap();
        let v = count_ultrafriable_residues(x, &table, q).unwrap();
        let all = count_ultrafriable(x, &table, &modulus_context(1, &table).unwrap()).unwrap();
        prop_assert_eq!(v.total(), all);
        let ctx = modulus_context(q, &table).unwrap();
        if ctx.require_y_friable(y).is_ok() {
            prop_assert_eq!(v.coprime_total(), count_ultrafriable(x, &table, &ctx).unwrap());
        }
    }

    #[test]
    fn characters_are_multiplicative(q in 1u64..200, m in 1u64..10_000, n in 1u64..10_000) {
        for chi in enumerate_characters(q).unwrap() {
            let lhs = chi.value(m * n);
            let rhs = chi.value(m) * chi.value(n);
            prop_assert!((lhs - rhs).norm() < 1e-9);
            if gcd(m, q) == 1 {
                prop_assert!((chi.value(m).norm() - 1.0).abs() < 1e-12);
            } else {
                prop_assert_eq!(chi.value(m).norm(), 0.0);
            }
        }
    }
}
