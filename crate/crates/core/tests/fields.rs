use proptest::prelude::*;
use rand::Rng;
use simonbench::finitefield::{
    field_inv, field_mul, is_irreducible, lagrange_interpolate, least_irreducible, least_primitive, FieldError,
    FieldPolynomial, FieldSpec,
};
use simonbench::seeded_rng;

/// Carry-less multiply then reduce by long division, bit by bit.
fn schoolbook_mul(a: u64, b: u64, modulus: u64, n: u32) -> u64 {
    let mut prod = 0u128;
    for i in 0..n {
        if b >> i & 1 == 1 {
            prod ^= (a as u128) << i;
        }
    }
    for bit in (n..2 * n).rev() {
        if prod >> bit & 1 == 1 {
            prod ^= (modulus as u128) << (bit - n);
        }
    }
    prod as u64
}

#[test]
fn gf16_examples() {
    let f = FieldSpec::new(4, 0b10011).unwrap();
    let x = f.element(0b0010).unwrap();
    let x3 = f.element(0b1000).unwrap();
    assert_eq!(field_mul(&x, &x3).unwrap().value(), 0b0011);
    assert_eq!(field_inv(&x).unwrap().value(), 0b1001);
    assert_eq!(schoolbook_mul(0b0010, 0b1001, 0b10011, 4), 1);
    assert!(matches!(field_inv(&f.zero()), Err(FieldError::ZeroInverse)));
}

#[test]
fn horner_on_generator() {
    let f = FieldSpec::new(4, 0b10011).unwrap();
    let cube = FieldPolynomial::monomial(f, 1, 3).unwrap();
    let g = 0b0010;
    let g3 = schoolbook_mul(schoolbook_mul(g, g, 0b10011, 4), g, 0b10011, 4);
    assert_eq!(cube.eval_raw(g), g3);
    assert_eq!(g3, 0b1000);
}

#[test]
fn default_moduli() {
    assert_eq!(least_irreducible(4), 0b10011);
    assert_eq!(least_irreducible(8), 0x11b);
    assert_eq!(least_primitive(8), 0x11d);
    // least irreducible by exhaustive trial division
    for n in 2..=10u32 {
        let least = (1u64 << n..1 << (n + 1))
            .find(|&p| {
                (2u64..1 << (n / 2 + 1))
                    .filter(|d| d.leading_zeros() > p.leading_zeros())
                    .all(|d| poly_mod(p, d) != 0)
            })
            .unwrap();
        assert_eq!(least_irreducible(n), least, "n = {n}");
        assert!(is_irreducible(least));
    }
}

fn poly_mod(mut a: u64, d: u64) -> u64 {
    let dd = 63 - d.leading_zeros();
    while a != 0 && 63 - a.leading_zeros() >= dd {
        a ^= d << (63 - a.leading_zeros() - dd);
    }
    a
}

#[test]
fn interpolation_recovers_planted_polynomials() {
    let mut rng = seeded_rng(1);
    for _ in 0..50 {
        let n = rng.gen_range(2..=12);
        let f = FieldSpec::with_default_modulus(n).unwrap();
        let d = rng.gen_range(0..=8.min((1usize << n) - 1));
        let coeffs: Vec<u64> = (0..=d).map(|_| rng.gen_range(0..f.order())).collect();
        let planted = FieldPolynomial::from_coeffs(f, coeffs).unwrap();
        let mut xs: Vec<u64> = Vec::new();
        while xs.len() < d + 1 {
            let x = rng.gen_range(0..f.order());
            if !xs.contains(&x) {
                xs.push(x);
            }
        }
        let points: Vec<_> = xs
            .iter()
            .map(|&x| (f.element(x).unwrap(), f.element(planted.eval_raw(x)).unwrap()))
            .collect();
        let got = lagrange_interpolate(&points).unwrap();
        assert_eq!(got.evaluate_all(), planted.evaluate_all());
        assert_eq!(got.degree(), planted.degree());
    }
}

#[test]
fn interpolation_rejects_repeated_abscissae() {
    let f = FieldSpec::with_default_modulus(4).unwrap();
    let p = (f.element(3).unwrap(), f.element(1).unwrap());
    assert!(lagrange_interpolate(&[p, p]).is_err());
    assert!(lagrange_interpolate(&[]).is_err());
}

fn field_and_triple() -> impl Strategy<Value = (u32, u64, u64, u64)> {
    prop_oneof![Just(4u32), Just(8u32), Just(12u32)]
        .prop_flat_map(|n| (Just(n), 0u64..1 << n, 0u64..1 << n, 0u64..1 << n))
}

proptest! {
    #[test]
    fn field_axioms((n, a, b, c) in field_and_triple()) {
        let f = FieldSpec::with_default_modulus(n).unwrap();
        let m = |x, y| f.mul_raw(x, y);
        prop_assert_eq!(m(a, b), m(b, a));
        prop_assert_eq!(m(a, m(b, c)), m(m(a, b), c));
        prop_assert_eq!(m(a, b ^ c), m(a, b) ^ m(a, c));
        prop_assert_eq!(m(a, b), schoolbook_mul(a, b, f.modulus(), n));
        // Frobenius
        prop_assert_eq!(m(a ^ b, a ^ b), m(a, a) ^ m(b, b));
        if a != 0 {
            prop_assert_eq!(m(a, f.inv_raw(a).unwrap()), 1);
        }
    }
}
