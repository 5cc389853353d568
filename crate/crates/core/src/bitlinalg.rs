//! Exact linear algebra over GF(2).
//!
//! Vectors are packed into `u64` words, bit `i` of the vector living in bit
//! `i % 64` of word `i / 64`. Matrices are row-major lists of vectors. All
//! elimination is leftmost-pivot Gauss–Jordan, so the bases returned by
//! [`BitMatrix::null_space`] are canonical and stable across runs.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinAlgError {
    #[error("length mismatch: expected {expected} bits, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("linear system has no solution")]
    NoSolution,
    #[error("a matrix needs at least one row")]
    Empty,
}

/// A fixed-length vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

fn words_for(len: usize) -> usize {
    len.div_ceil(64)
}

impl BitVector {
    /// The all-zero vector. Panics if `len == 0`.
    pub fn zeros(len: usize) -> Self {
        assert!(len >= 1, "BitVector must hold at least one bit");
        BitVector {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// Unit vector `e_i`.
    pub fn unit(len: usize, i: usize) -> Self {
        let mut v = Self::zeros(len);
        v.set(i, true);
        v
    }

    /// Builds a vector from the low `len` bits of `value` (bit `i` of
    /// `value` becomes coordinate `i`). Higher bits are discarded.
    pub fn from_u64(value: u64, len: usize) -> Self {
        let mut v = Self::zeros(len);
        v.words[0] = value & low_mask(len.min(64));
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false; kept for API symmetry with collections.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        let mask = 1u64 << (i % 64);
        if bit {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    /// The vector as an integer, when it fits in 64 bits.
    pub fn to_u64(&self) -> Option<u64> {
        (self.len <= 64).then(|| self.words[0])
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Index of the lowest set coordinate.
    pub fn lowest_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    fn check_len(&self, other: &BitVector) -> Result<(), LinAlgError> {
        if self.len != other.len {
            return Err(LinAlgError::LengthMismatch {
                expected: self.len,
                actual: other.len,
            });
        }
        Ok(())
    }

    pub fn xor(&self, other: &BitVector) -> Result<BitVector, LinAlgError> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    pub fn xor_assign(&mut self, other: &BitVector) -> Result<(), LinAlgError> {
        self.check_len(other)?;
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
        Ok(())
    }

    /// Inner product over GF(2): parity of the bitwise AND.
    pub fn dot(&self, other: &BitVector) -> Result<bool, LinAlgError> {
        self.check_len(other)?;
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        Ok(ones & 1 == 1)
    }

    /// Concatenation `self ‖ other`; `self` occupies the low coordinates.
    pub fn concat(&self, other: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.len + other.len);
        for i in 0..self.len {
            out.set(i, self.get(i));
        }
        for i in 0..other.len {
            out.set(self.len + i, other.get(i));
        }
        out
    }

    /// Hex rendering of the vector read as an integer (coordinate 0 is the
    /// least significant bit), zero-padded to `ceil(len / 4)` digits.
    pub fn to_hex(&self) -> String {
        let digits = self.len.div_ceil(4);
        let mut s = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let mut nibble = 0u8;
            for b in 0..4 {
                let i = d * 4 + b;
                if i < self.len && self.get(i) {
                    nibble |= 1 << b;
                }
            }
            s.push(char::from_digit(nibble as u32, 16).unwrap());
        }
        s
    }

    /// Inverse of [`BitVector::to_hex`].
    pub fn from_hex(hex: &str, len: usize) -> Option<BitVector> {
        let mut v = BitVector::zeros(len);
        for (d, c) in hex.chars().rev().enumerate() {
            let nibble = c.to_digit(16)?;
            for b in 0..4 {
                if nibble >> b & 1 == 1 {
                    let i = d * 4 + b;
                    if i >= len {
                        return None;
                    }
                    v.set(i, true);
                }
            }
        }
        Some(v)
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({}; 0x{})", self.len, self.to_hex())
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl serde::Serialize for BitVector {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

pub(crate) fn low_mask(bits: usize) -> u64 {
    if bits >= 64 {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

/// A dense row-major matrix over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVector>,
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows.len(), self.cols)?;
        for row in &self.rows {
            let s: String = (0..self.cols).map(|j| if row.get(j) { '1' } else { '0' }).collect();
            writeln!(f, "  {s}")?;
        }
        write!(f, "]")
    }
}

/// Full solution set of `Mx = b`: `particular ⊕ span(null_basis)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionSet {
    pub particular: BitVector,
    pub null_basis: Vec<BitVector>,
    pub rank: usize,
}

impl SolutionSet {
    /// Number of solutions, `2^{dim null space}`; `None` if it overflows.
    pub fn size(&self) -> Option<u128> {
        1u128.checked_shl(self.null_basis.len() as u32)
    }

    /// Every solution, in Gray-code order over the null basis.
    pub fn enumerate(&self) -> Vec<BitVector> {
        if self.null_basis.is_empty() {
            return vec![self.particular.clone()];
        }
        span_elements(&self.null_basis)
            .into_iter()
            .map(|v| v.xor(&self.particular).expect("null basis matches particular"))
            .collect()
    }
}

impl BitMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1);
        BitMatrix {
            cols,
            rows: vec![BitVector::zeros(cols); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zero(n, n);
        for i in 0..n {
            m.rows[i].set(i, true);
        }
        m
    }

    pub fn from_rows(rows: Vec<BitVector>) -> Result<Self, LinAlgError> {
        let first = rows.first().ok_or(LinAlgError::Empty)?;
        let cols = first.len();
        for r in &rows {
            if r.len() != cols {
                return Err(LinAlgError::LengthMismatch {
                    expected: cols,
                    actual: r.len(),
                });
            }
        }
        Ok(BitMatrix { cols, rows })
    }

    /// Rows given as integers, bit `j` of `rows[i]` being entry `(i, j)`.
    pub fn from_u64_rows(rows: &[u64], cols: usize) -> Self {
        Self::from_rows(rows.iter().map(|&r| BitVector::from_u64(r, cols)).collect()).expect("non-empty row list")
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, bit: bool) {
        self.rows[i].set(j, bit)
    }

    pub fn is_square(&self) -> bool {
        self.rows.len() == self.cols
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zero(self.cols, self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            for j in 0..self.cols {
                if row.get(j) {
                    t.rows[j].set(i, true);
                }
            }
        }
        t
    }

    pub fn add(&self, other: &BitMatrix) -> Result<BitMatrix, LinAlgError> {
        if self.rows.len() != other.rows.len() {
            return Err(LinAlgError::LengthMismatch {
                expected: self.rows.len(),
                actual: other.rows.len(),
            });
        }
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.xor(b))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(BitMatrix { cols: self.cols, rows })
    }

    /// Matrix–vector product `M v`.
    pub fn mul_vec(&self, v: &BitVector) -> Result<BitVector, LinAlgError> {
        if v.len() != self.cols {
            return Err(LinAlgError::LengthMismatch {
                expected: self.cols,
                actual: v.len(),
            });
        }
        let mut out = BitVector::zeros(self.rows.len());
        for (i, row) in self.rows.iter().enumerate() {
            if row.dot(v)? {
                out.set(i, true);
            }
        }
        Ok(out)
    }

    /// Matrix product `self × other`.
    pub fn mul(&self, other: &BitMatrix) -> Result<BitMatrix, LinAlgError> {
        if self.cols != other.rows.len() {
            return Err(LinAlgError::LengthMismatch {
                expected: self.cols,
                actual: other.rows.len(),
            });
        }
        let mut out = BitMatrix::zero(self.rows.len(), other.cols);
        for (i, row) in self.rows.iter().enumerate() {
            for j in 0..self.cols {
                if row.get(j) {
                    out.rows[i].xor_assign(&other.rows[j])?;
                }
            }
        }
        Ok(out)
    }

    /// `M^e` by square-and-multiply; `M^0` is the identity.
    pub fn pow(&self, mut e: u64) -> Result<BitMatrix, LinAlgError> {
        if !self.is_square() {
            return Err(LinAlgError::NotSquare {
                rows: self.rows.len(),
                cols: self.cols,
            });
        }
        let mut acc = BitMatrix::identity(self.cols);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Stacks `other` below `self`.
    pub fn vstack(&self, other: &BitMatrix) -> Result<BitMatrix, LinAlgError> {
        if self.cols != other.cols {
            return Err(LinAlgError::LengthMismatch {
                expected: self.cols,
                actual: other.cols,
            });
        }
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Ok(BitMatrix { cols: self.cols, rows })
    }

    /// Reduced row-echelon form with leftmost pivots. Returns the reduced
    /// matrix and the pivot column of each of its first `pivots.len()` rows.
    pub fn rref(&self) -> (BitMatrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = eliminate(&mut m.rows, self.cols, None);
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.cols
    }

    pub fn inverse(&self) -> Option<BitMatrix> {
        if !self.is_square() {
            return None;
        }
        let n = self.cols;
        let mut rows = self.rows.clone();
        let mut aug = BitMatrix::identity(n).rows;
        let pivots = eliminate(&mut rows, n, Some(&mut aug));
        (pivots.len() == n).then_some(BitMatrix { cols: n, rows: aug })
    }

    /// Basis of `{v : M v = 0}`, one vector per free column in increasing
    /// column order.
    pub fn null_space(&self) -> Vec<BitVector> {
        let (r, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        (0..self.cols)
            .filter(|&f| !is_pivot[f])
            .map(|f| {
                let mut v = BitVector::unit(self.cols, f);
                for (row, &p) in pivots.iter().enumerate() {
                    if r.rows[row].get(f) {
                        v.set(p, true);
                    }
                }
                v
            })
            .collect()
    }

    /// Solves `M x = b` completely, or reports an inconsistent system.
    pub fn solve_affine(&self, b: &BitVector) -> Result<SolutionSet, LinAlgError> {
        if b.len() != self.rows.len() {
            return Err(LinAlgError::LengthMismatch {
                expected: self.rows.len(),
                actual: b.len(),
            });
        }
        let mut rows = self.rows.clone();
        let mut rhs: Vec<BitVector> = (0..b.len()).map(|i| BitVector::from_u64(b.get(i) as u64, 1)).collect();
        let pivots = eliminate(&mut rows, self.cols, Some(&mut rhs));
        if rhs[pivots.len()..].iter().any(|r| r.get(0)) {
            return Err(LinAlgError::NoSolution);
        }
        let mut particular = BitVector::zeros(self.cols);
        for (row, &p) in pivots.iter().enumerate() {
            particular.set(p, rhs[row].get(0));
        }
        Ok(SolutionSet {
            particular,
            null_basis: self.null_space(),
            rank: pivots.len(),
        })
    }
}

/// Gauss–Jordan elimination in place. Every row operation on `rows` is
/// mirrored on `aug` when given. Returns the pivot columns; the pivot rows
/// end up at the top in pivot order.
fn eliminate(rows: &mut [BitVector], cols: usize, mut aug: Option<&mut Vec<BitVector>>) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut next = 0;
    for col in 0..cols {
        if next == rows.len() {
            break;
        }
        let Some(found) = (next..rows.len()).find(|&r| rows[r].get(col)) else {
            continue;
        };
        rows.swap(next, found);
        if let Some(a) = aug.as_deref_mut() {
            a.swap(next, found);
        }
        let pivot_row = rows[next].clone();
        let pivot_aug = aug.as_deref().map(|a| a[next].clone());
        for r in 0..rows.len() {
            if r != next && rows[r].get(col) {
                rows[r].xor_assign(&pivot_row).expect("equal lengths");
                if let (Some(a), Some(pa)) = (aug.as_deref_mut(), pivot_aug.as_ref()) {
                    a[r].xor_assign(pa).expect("equal lengths");
                }
            }
        }
        pivots.push(col);
        next += 1;
    }
    pivots
}

/// Incrementally maintained basis of a span, used to track the rank of a
/// growing sample set.
#[derive(Debug, Clone)]
pub struct SpanBuilder {
    len: usize,
    // reduced vectors keyed by their lowest set coordinate
    reduced: Vec<Option<BitVector>>,
    basis: Vec<BitVector>,
}

impl SpanBuilder {
    pub fn new(len: usize) -> Self {
        SpanBuilder {
            len,
            reduced: vec![None; len],
            basis: Vec::new(),
        }
    }

    /// Adds `v`; returns true iff it was independent of the current span.
    pub fn insert(&mut self, v: &BitVector) -> bool {
        assert_eq!(v.len(), self.len);
        let mut x = v.clone();
        while let Some(low) = x.lowest_one() {
            match &self.reduced[low] {
                Some(r) => x.xor_assign(r).expect("equal lengths"),
                None => {
                    self.reduced[low] = Some(x);
                    self.basis.push(v.clone());
                    return true;
                }
            }
        }
        false
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        let mut x = v.clone();
        while let Some(low) = x.lowest_one() {
            match &self.reduced[low] {
                Some(r) => x.xor_assign(r).expect("equal lengths"),
                None => return false,
            }
        }
        true
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// The inserted independent vectors, in insertion order.
    pub fn basis(&self) -> &[BitVector] {
        &self.basis
    }
}

/// All `2^k` elements of the span of `basis` (which need not be
/// independent), in Gray-code order starting from zero. An empty basis
/// yields an empty list since the vector length is unknown.
pub fn span_elements(basis: &[BitVector]) -> Vec<BitVector> {
    let Some(first) = basis.first() else {
        return Vec::new();
    };
    assert!(basis.len() < 31, "span too large to enumerate");
    let mut cur = BitVector::zeros(first.len());
    let mut out = Vec::with_capacity(1 << basis.len());
    out.push(cur.clone());
    for i in 1u32..(1 << basis.len()) {
        let flip = i.trailing_zeros() as usize;
        cur.xor_assign(&basis[flip]).expect("basis vectors share a length");
        out.push(cur.clone());
    }
    out
}

/// Row-reduces a list of vectors to a canonical basis of their span.
pub fn canonical_basis(vectors: &[BitVector]) -> Vec<BitVector> {
    if vectors.is_empty() {
        return Vec::new();
    }
    let m = BitMatrix::from_rows(vectors.to_vec()).expect("vectors share a length");
    let (r, pivots) = m.rref();
    r.rows[..pivots.len()].to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bv(value: u64, len: usize) -> BitVector {
        BitVector::from_u64(value, len)
    }

    #[test]
    fn dot_examples() {
        assert!(!bv(0, 4).dot(&bv(0b1101, 4)).unwrap());
        assert!(bv(0b1011, 4).dot(&bv(0b1011, 4)).unwrap());
        assert!(bv(0b110, 3).dot(&bv(0b011, 3)).unwrap());
        assert!(matches!(
            bv(1, 3).dot(&bv(1, 4)),
            Err(LinAlgError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn pow_examples() {
        let m = BitMatrix::from_u64_rows(&[0b1101, 0b0110, 0b1011, 0b0001], 4);
        assert_eq!(m.pow(0).unwrap(), BitMatrix::identity(4));
        assert_eq!(BitMatrix::identity(5).pow(7).unwrap(), BitMatrix::identity(5));

        // [[0,1],[1,1]]: square by hand is [[1,1],[1,0]], cube is I.
        let mut fib = BitMatrix::zero(2, 2);
        fib.set(0, 1, true);
        fib.set(1, 0, true);
        fib.set(1, 1, true);
        let mut sq = BitMatrix::zero(2, 2);
        sq.set(0, 0, true);
        sq.set(0, 1, true);
        sq.set(1, 0, true);
        assert_eq!(fib.pow(2).unwrap(), sq);
        assert_eq!(fib.pow(3).unwrap(), BitMatrix::identity(2));

        assert!(matches!(
            BitMatrix::zero(2, 3).pow(2),
            Err(LinAlgError::NotSquare { .. })
        ));
    }

    #[test]
    fn null_space_examples() {
        assert!(BitMatrix::identity(6).null_space().is_empty());
        assert_eq!(BitMatrix::zero(2, 2).null_space().len(), 2);

        // rows 101 and 011 written with column 0 on the left
        let mut m = BitMatrix::zero(2, 3);
        m.set(0, 0, true);
        m.set(0, 2, true);
        m.set(1, 1, true);
        m.set(1, 2, true);
        assert_eq!(m.null_space(), vec![bv(0b111, 3)]);
    }

    #[test]
    fn solve_affine_examples() {
        let b = bv(0b1011_0110, 8);
        let s = BitMatrix::identity(8).solve_affine(&b).unwrap();
        assert_eq!(s.particular, b);
        assert!(s.null_basis.is_empty());
        assert_eq!(s.rank, 8);

        assert_eq!(
            BitMatrix::zero(3, 3).solve_affine(&bv(0b010, 3)),
            Err(LinAlgError::NoSolution)
        );

        // x0 + x1 = 0, x0 = 1 (row integers 0b11 and 0b01)
        let m = BitMatrix::from_u64_rows(&[0b11, 0b01], 2);
        let s = m.solve_affine(&bv(0b10, 2)).unwrap();
        assert_eq!(s.particular, bv(0b11, 2));
        assert!(s.null_basis.is_empty());
    }

    #[test]
    fn inverse_round_trip() {
        let m = BitMatrix::from_u64_rows(&[0b011, 0b110, 0b001], 3);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), BitMatrix::identity(3));
        assert!(BitMatrix::from_u64_rows(&[0b11, 0b11], 2).inverse().is_none());
    }

    #[test]
    fn hex_round_trip() {
        let v = bv(0x2a5, 10);
        assert_eq!(v.to_hex(), "2a5");
        assert_eq!(BitVector::from_hex("2a5", 10), Some(v));
        assert_eq!(BitVector::from_hex("fff", 10), None);
    }

    #[test]
    fn span_builder_tracks_rank() {
        let mut s = SpanBuilder::new(4);
        assert!(s.insert(&bv(0b0011, 4)));
        assert!(s.insert(&bv(0b0110, 4)));
        assert!(!s.insert(&bv(0b0101, 4)));
        assert!(!s.insert(&bv(0, 4)));
        assert_eq!(s.rank(), 2);
        assert!(s.contains(&bv(0b0101, 4)));
        assert!(!s.contains(&bv(0b1000, 4)));
    }

    #[test]
    fn span_elements_enumerates_all() {
        let elems = span_elements(&[bv(0b001, 3), bv(0b110, 3)]);
        let mut vals: Vec<u64> = elems.iter().map(|v| v.to_u64().unwrap()).collect();
        vals.sort();
        assert_eq!(vals, vec![0, 1, 6, 7]);
    }
}
