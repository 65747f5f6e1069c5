//! Phaseless Pauli strings and GF(2) linear algebra.
//!
//! A Pauli string on `n` qubits is stored as a single packed word vector:
//! the first `ceil(n/64)` words hold the X bits and the next `ceil(n/64)`
//! words hold the Z bits. Qubit `i` lives in word `i / 64`, bit `i % 64`.
//! Phases are never represented.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

pub(crate) const WORD: usize = 64;

#[inline]
pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

#[inline]
pub(crate) fn xor_words(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= *s;
    }
}

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Letter {
    I,
    X,
    Y,
    Z,
}

impl Letter {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Letter::I,
            (true, false) => Letter::X,
            (true, true) => Letter::Y,
            (false, true) => Letter::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Letter::I => (false, false),
            Letter::X => (true, false),
            Letter::Y => (true, true),
            Letter::Z => (false, true),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Letter::I => 'I',
            Letter::X => 'X',
            Letter::Y => 'Y',
            Letter::Z => 'Z',
        }
    }
}

impl TryFrom<char> for Letter {
    type Error = Error;

    fn try_from(c: char) -> Result<Self> {
        match c {
            'I' => Ok(Letter::I),
            'X' => Ok(Letter::X),
            'Y' => Ok(Letter::Y),
            'Z' => Ok(Letter::Z),
            other => Err(Error::InvalidPauliChar(other)),
        }
    }
}

/// Phaseless N-qubit Pauli operator.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    words: Vec<u64>,
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        PauliString {
            n,
            words: vec![0; 2 * words_for(n)],
        }
    }

    /// Single-site operator `letter` on qubit `q`.
    pub fn single(n: usize, q: usize, letter: Letter) -> Self {
        let mut p = Self::identity(n);
        p.set(q, letter);
        p
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut p = Self::identity(n);
        for w in p.words.iter_mut() {
            *w = rng.random();
        }
        p.mask_tail();
        p
    }

    fn mask_tail(&mut self) {
        let nw = words_for(self.n);
        let rem = self.n % WORD;
        if rem != 0 {
            let mask = (1u64 << rem) - 1;
            self.words[nw - 1] &= mask;
            self.words[2 * nw - 1] &= mask;
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub(crate) fn nw(&self) -> usize {
        self.words.len() / 2
    }

    /// Packed words: X block then Z block.
    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    #[inline]
    pub fn x(&self, q: usize) -> bool {
        (self.words[q / WORD] >> (q % WORD)) & 1 == 1
    }

    #[inline]
    pub fn z(&self, q: usize) -> bool {
        (self.words[self.nw() + q / WORD] >> (q % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set_x(&mut self, q: usize, v: bool) {
        let w = &mut self.words[q / WORD];
        let bit = 1u64 << (q % WORD);
        if v {
            *w |= bit
        } else {
            *w &= !bit
        }
    }

    #[inline]
    pub fn set_z(&mut self, q: usize, v: bool) {
        let nw = self.nw();
        let w = &mut self.words[nw + q / WORD];
        let bit = 1u64 << (q % WORD);
        if v {
            *w |= bit
        } else {
            *w &= !bit
        }
    }

    #[inline]
    pub fn letter(&self, q: usize) -> Letter {
        Letter::from_bits(self.x(q), self.z(q))
    }

    pub fn set(&mut self, q: usize, letter: Letter) {
        let (x, z) = letter.bits();
        self.set_x(q, x);
        self.set_z(q, z);
    }

    pub fn is_identity(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        let nw = self.nw();
        (0..nw)
            .map(|i| (self.words[i] | self.words[nw + i]).count_ones() as usize)
            .sum()
    }

    /// First qubit with a non-identity letter.
    pub fn left_endpoint(&self) -> Option<usize> {
        let nw = self.nw();
        (0..nw).find_map(|i| {
            let w = self.words[i] | self.words[nw + i];
            (w != 0).then(|| i * WORD + w.trailing_zeros() as usize)
        })
    }

    /// Last qubit with a non-identity letter.
    pub fn right_endpoint(&self) -> Option<usize> {
        let nw = self.nw();
        (0..nw).rev().find_map(|i| {
            let w = self.words[i] | self.words[nw + i];
            (w != 0).then(|| i * WORD + (WORD - 1 - w.leading_zeros() as usize))
        })
    }

    /// Whether the string acts trivially outside `qubits`.
    pub fn supported_in(&self, qubits: &[usize]) -> bool {
        let mut mask = PauliString::identity(self.n);
        for &q in qubits {
            mask.set(q, Letter::Y);
        }
        self.words
            .iter()
            .zip(&mask.words)
            .all(|(w, m)| w & !m == 0)
    }

    /// Symplectic form without a length check.
    #[inline]
    pub fn anticommutes(&self, other: &PauliString) -> bool {
        let nw = self.nw();
        let (ax, az) = self.words.split_at(nw);
        let (bx, bz) = other.words.split_at(nw);
        let mut acc = 0u32;
        for i in 0..nw {
            acc ^= ((ax[i] & bz[i]) ^ (az[i] & bx[i])).count_ones();
        }
        acc & 1 == 1
    }

    /// In-place phaseless product. Panics on length mismatch.
    #[inline]
    pub fn mul_assign(&mut self, other: &PauliString) {
        assert_eq!(self.n, other.n, "Pauli length mismatch");
        xor_words(&mut self.words, &other.words);
    }

    /// Sub-string on the listed qubits, in the listed order.
    pub fn restrict(&self, qubits: &[usize]) -> PauliString {
        let mut out = PauliString::identity(qubits.len());
        for (j, &q) in qubits.iter().enumerate() {
            out.set_x(j, self.x(q));
            out.set_z(j, self.z(q));
        }
        out
    }

    /// Embeds a string on `qubits.len()` qubits into `n` qubits.
    pub fn embed(&self, n: usize, qubits: &[usize]) -> PauliString {
        debug_assert_eq!(self.n, qubits.len());
        let mut out = PauliString::identity(n);
        for (j, &q) in qubits.iter().enumerate() {
            out.set_x(q, self.x(j));
            out.set_z(q, self.z(j));
        }
        out
    }
}

/// 0 iff `a` and `b` commute.
pub fn symplectic_product(a: &PauliString, b: &PauliString) -> Result<u8> {
    if a.n != b.n {
        return Err(Error::LengthMismatch {
            left: a.n,
            right: b.n,
        });
    }
    Ok(a.anticommutes(b) as u8)
}

/// Phaseless product: componentwise XOR.
pub fn multiply(a: &PauliString, b: &PauliString) -> Result<PauliString> {
    if a.n != b.n {
        return Err(Error::LengthMismatch {
            left: a.n,
            right: b.n,
        });
    }
    let mut out = a.clone();
    xor_words(&mut out.words, &b.words);
    Ok(out)
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.n {
            write!(f, "{}", self.letter(q).as_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliString({self})")
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters = s
            .chars()
            .map(Letter::try_from)
            .collect::<Result<Vec<_>>>()?;
        let mut p = PauliString::identity(letters.len());
        for (q, l) in letters.into_iter().enumerate() {
            p.set(q, l);
        }
        Ok(p)
    }
}

/// Dense GF(2) matrix with packed rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gf2Matrix {
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl Gf2Matrix {
    pub fn new(cols: usize) -> Self {
        Gf2Matrix {
            cols,
            stride: words_for(cols),
            data: Vec::new(),
        }
    }

    pub fn from_bool_rows(cols: usize, rows: &[Vec<bool>]) -> Result<Self> {
        let mut m = Gf2Matrix::new(cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::LengthMismatch {
                    left: r.len(),
                    right: cols,
                });
            }
            let mut words = vec![0u64; m.stride];
            for (c, &b) in r.iter().enumerate() {
                if b {
                    words[c / WORD] |= 1 << (c % WORD);
                }
            }
            m.data.extend_from_slice(&words);
        }
        Ok(m)
    }

    /// Stacks Pauli strings as 2n-bit rows (x bits then z bits).
    pub fn from_paulis<'a, I>(n: usize, rows: I) -> Self
    where
        I: IntoIterator<Item = &'a PauliString>,
    {
        let mut m = Gf2Matrix::new(2 * n);
        for p in rows {
            m.push_pauli(p);
        }
        m
    }

    pub fn push_pauli(&mut self, p: &PauliString) {
        debug_assert_eq!(2 * p.n(), self.cols);
        let start = self.data.len();
        self.data.resize(start + self.stride, 0);
        let row = &mut self.data[start..];
        let n = p.n();
        for q in 0..n {
            if p.x(q) {
                row[q / WORD] |= 1 << (q % WORD);
            }
            if p.z(q) {
                let c = n + q;
                row[c / WORD] |= 1 << (c % WORD);
            }
        }
    }

    pub fn rows(&self) -> usize {
        self.data.len().checked_div(self.stride).unwrap_or(0)
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.stride + c / WORD] >> (c % WORD)) & 1 == 1
    }

    /// Rank over GF(2), consuming the matrix.
    pub fn into_rank(mut self) -> usize {
        let rows = self.rows();
        let stride = self.stride;
        let mut rank = 0;
        for c in 0..self.cols {
            if rank == rows {
                break;
            }
            let (w, b) = (c / WORD, c % WORD);
            let Some(p) = (rank..rows).find(|&r| (self.data[r * stride + w] >> b) & 1 == 1) else {
                continue;
            };
            if p != rank {
                for i in 0..stride {
                    self.data.swap(p * stride + i, rank * stride + i);
                }
            }
            let (head, tail) = self.data.split_at_mut((rank + 1) * stride);
            let pivot = &head[rank * stride..];
            for row in tail.chunks_exact_mut(stride) {
                if (row[w] >> b) & 1 == 1 {
                    xor_words(&mut row[w..], &pivot[w..]);
                }
            }
            rank += 1;
        }
        rank
    }
}

/// Rank over GF(2). An empty matrix has rank 0.
pub fn gf2_rank(m: &Gf2Matrix) -> usize {
    m.clone().into_rank()
}

/// Incrementally built row-echelon basis, used for span membership tests.
#[derive(Clone, Debug, Default)]
pub struct Gf2Basis {
    rows: Vec<(usize, Vec<u64>)>,
}

impl Gf2Basis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn reduce(&self, v: &mut [u64]) {
        for (pivot, row) in &self.rows {
            if (v[pivot / WORD] >> (pivot % WORD)) & 1 == 1 {
                xor_words(v, row);
            }
        }
    }

    fn leading(v: &[u64]) -> Option<usize> {
        v.iter()
            .enumerate()
            .find_map(|(i, &w)| (w != 0).then(|| i * WORD + w.trailing_zeros() as usize))
    }

    /// Adds `v`; returns false if it was already in the span.
    pub fn insert(&mut self, v: &[u64]) -> bool {
        let mut v = v.to_vec();
        self.reduce(&mut v);
        match Self::leading(&v) {
            Some(p) => {
                self.rows.push((p, v));
                true
            }
            None => false,
        }
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        let mut v = v.to_vec();
        self.reduce(&mut v);
        v.iter().all(|&w| w == 0)
    }

    pub fn insert_pauli(&mut self, p: &PauliString) -> bool {
        self.insert(p.words())
    }

    pub fn contains_pauli(&self, p: &PauliString) -> bool {
        self.contains(p.words())
    }
}
