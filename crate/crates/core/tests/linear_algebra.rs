use proptest::prelude::*;
use simonbench::bitlinalg::{BitMatrix, BitVector, LinAlgError};

fn v(bits: u64, len: usize) -> BitVector {
    BitVector::from_u64(bits, len)
}

/// `M x` with rows as integers, computed bit by bit.
fn naive_mul_vec(rows: &[u64], x: u64) -> u64 {
    rows.iter()
        .enumerate()
        .fold(0, |acc, (i, &r)| acc | (((r & x).count_ones() & 1) as u64) << i)
}

fn naive_mul(a: &[u64], b: &[u64], cols: usize) -> Vec<u64> {
    a.iter()
        .map(|&row| (0..cols).filter(|&k| row >> k & 1 == 1).fold(0, |acc, k| acc ^ b[k]))
        .collect()
}

#[test]
fn dot_examples() {
    assert!(v(0b1011, 4).dot(&v(0b1011, 4)).unwrap());
    assert!(v(0b110, 3).dot(&v(0b011, 3)).unwrap());
    assert!(!v(0b110, 3).dot(&v(0b111, 3)).unwrap());
    assert!(matches!(v(1, 3).dot(&v(1, 4)), Err(LinAlgError::LengthMismatch { .. })));
}

#[test]
fn fibonacci_matrix_powers() {
    let rows = [0b10u64, 0b11];
    let m = BitMatrix::from_u64_rows(&rows, 2);
    let sq = naive_mul(&rows, &rows, 2);
    assert_eq!(sq, vec![0b11, 0b01]);
    assert_eq!(m.pow(2).unwrap(), BitMatrix::from_u64_rows(&sq, 2));
    assert_eq!(m.pow(3).unwrap(), BitMatrix::identity(2));
    assert_eq!(m.pow(0).unwrap(), BitMatrix::identity(2));
}

#[test]
fn null_space_example() {
    let m = BitMatrix::from_u64_rows(&[0b101, 0b110], 3);
    let basis = m.null_space();
    assert_eq!(basis, vec![v(0b111, 3)]);
    let kernel: Vec<u64> = (0..8).filter(|&x| naive_mul_vec(&[0b101, 0b110], x) == 0).collect();
    assert_eq!(kernel, vec![0, 0b111]);
}

#[test]
fn solve_affine_example() {
    let rows = [0b11u64, 0b01];
    let m = BitMatrix::from_u64_rows(&rows, 2);
    let sol = m.solve_affine(&v(0b10, 2)).unwrap();
    let exhaustive: Vec<u64> = (0..4).filter(|&x| naive_mul_vec(&rows, x) == 0b10).collect();
    assert_eq!(exhaustive, vec![0b11]);
    assert_eq!(sol.particular, v(0b11, 2));
    assert!(sol.null_basis.is_empty());
}

#[test]
fn inconsistent_system() {
    let m = BitMatrix::from_u64_rows(&[0b11, 0b11], 2);
    assert!(matches!(m.solve_affine(&v(0b01, 2)), Err(LinAlgError::NoSolution)));
}

fn matrix_strategy() -> impl Strategy<Value = (usize, usize, Vec<u64>)> {
    (1usize..=12, 1usize..=12).prop_flat_map(|(r, c)| (Just(r), Just(c), proptest::collection::vec(0u64..1 << c, r)))
}

proptest! {
    #[test]
    fn rank_nullity_matches_exhaustive_kernel((r, c, rows) in matrix_strategy()) {
        let _ = r;
        let m = BitMatrix::from_u64_rows(&rows, c);
        let basis = m.null_space();
        prop_assert_eq!(m.rank() + basis.len(), c);
        let kernel = (0..1u64 << c).filter(|&x| naive_mul_vec(&rows, x) == 0).count();
        prop_assert_eq!(kernel, 1 << basis.len());
        for b in &basis {
            prop_assert_eq!(naive_mul_vec(&rows, b.to_u64().unwrap()), 0);
        }
    }

    #[test]
    fn affine_solutions_are_exact((r, c, rows) in matrix_strategy(), rhs in any::<u64>()) {
        let m = BitMatrix::from_u64_rows(&rows, c);
        let b = rhs & ((1 << r) - 1);
        let exhaustive: Vec<u64> = (0..1u64 << c).filter(|&x| naive_mul_vec(&rows, x) == b).collect();
        match m.solve_affine(&v(b, r)) {
            Ok(sol) => {
                let mut got: Vec<u64> = sol.enumerate().iter().map(|x| x.to_u64().unwrap()).collect();
                got.sort_unstable();
                prop_assert_eq!(got, exhaustive);
            }
            Err(LinAlgError::NoSolution) => prop_assert!(exhaustive.is_empty()),
            Err(e) => prop_assert!(false, "unexpected error {e}"),
        }
    }

    #[test]
    fn powers_add(n in 1usize..=10, seed_rows in proptest::collection::vec(any::<u64>(), 10), i in 0u64..=16, j in 0u64..=16) {
        let rows: Vec<u64> = seed_rows[..n].iter().map(|r| r & ((1 << n) - 1)).collect();
        let m = BitMatrix::from_u64_rows(&rows, n);
        prop_assert_eq!(m.pow(i + j).unwrap(), m.pow(i).unwrap().mul(&m.pow(j).unwrap()).unwrap());
    }

    #[test]
    fn hex_round_trip(bits in any::<u64>(), len in 1usize..=64) {
        let x = BitVector::from_u64(bits, len);
        prop_assert_eq!(BitVector::from_hex(&x.to_hex(), len), Some(x));
    }
}
