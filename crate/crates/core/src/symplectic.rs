//! Phaseless Clifford unitaries as symplectic matrices over GF(2).
//!
//! A Clifford on `k` qubits is stored by the images of the generators:
//! column `j < k` is the image of `X_j`, column `k + j` the image of `Z_j`.
//! Uniform sampling composes transvections one symplectic pair at a time,
//! so every element of Sp(2k, 2) is reached exactly once per choice of
//! random bits.

use rand::Rng;

use crate::error::{Error, Result};
use crate::pauli::{xor_words, Letter, PauliString};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymplecticMatrix {
    k: usize,
    cols: Vec<PauliString>,
}

impl SymplecticMatrix {
    pub fn identity(k: usize) -> Self {
        let mut cols = Vec::with_capacity(2 * k);
        cols.extend((0..k).map(|j| PauliString::single(k, j, Letter::X)));
        cols.extend((0..k).map(|j| PauliString::single(k, j, Letter::Z)));
        SymplecticMatrix { k, cols }
    }

    /// Builds from the images of `X_0..X_{k-1}, Z_0..Z_{k-1}`; rejects
    /// non-symplectic input.
    pub fn from_images(k: usize, cols: Vec<PauliString>) -> Result<Self> {
        if cols.len() != 2 * k || cols.iter().any(|c| c.n() != k) {
            return Err(Error::SupportMismatch {
                support: cols.len() / 2,
                expected: k,
            });
        }
        let m = SymplecticMatrix { k, cols };
        if m.is_symplectic() {
            Ok(m)
        } else {
            Err(Error::NotSymplectic)
        }
    }

    pub fn hadamard() -> Self {
        SymplecticMatrix {
            k: 1,
            cols: vec![PauliString::single(1, 0, Letter::Z), PauliString::single(1, 0, Letter::X)],
        }
    }

    /// Phase gate: X -> Y, Z -> Z.
    pub fn phase() -> Self {
        SymplecticMatrix {
            k: 1,
            cols: vec![PauliString::single(1, 0, Letter::Y), PauliString::single(1, 0, Letter::Z)],
        }
    }

    /// CNOT with control 0 and target 1.
    pub fn cnot() -> Self {
        let p = |s: &str| s.parse::<PauliString>().unwrap();
        SymplecticMatrix {
            k: 2,
            cols: vec![p("XX"), p("IX"), p("ZI"), p("ZZ")],
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn images(&self) -> &[PauliString] {
        &self.cols
    }

    /// Checks `<col_i, col_j>` against the standard symplectic pairing.
    pub fn is_symplectic(&self) -> bool {
        let k = self.k;
        for i in 0..2 * k {
            for j in i + 1..2 * k {
                let expected = j == i + k && i < k;
                if self.cols[i].anticommutes(&self.cols[j]) != expected {
                    return false;
                }
            }
        }
        true
    }

    /// Image of a `k`-qubit Pauli string.
    pub fn apply(&self, v: &PauliString) -> PauliString {
        assert_eq!(v.n(), self.k);
        let mut out = PauliString::identity(self.k);
        self.apply_into(v, &mut out);
        out
    }

    pub(crate) fn apply_into(&self, v: &PauliString, out: &mut PauliString) {
        let k = self.k;
        let ow = out.words_mut();
        ow.fill(0);
        for j in 0..k {
            if v.x(j) {
                xor_words(ow, self.cols[j].words());
            }
            if v.z(j) {
                xor_words(ow, self.cols[k + j].words());
            }
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &SymplecticMatrix) -> SymplecticMatrix {
        assert_eq!(self.k, other.k);
        SymplecticMatrix {
            k: self.k,
            cols: other.cols.iter().map(|c| self.apply(c)).collect(),
        }
    }

    /// Inverse map: the X_i (Z_i) coefficient of `M^-1 v` is the
    /// symplectic product of `v` with the image of Z_i (X_i).
    pub fn inverse(&self) -> SymplecticMatrix {
        let k = self.k;
        let id = SymplecticMatrix::identity(k);
        let cols = id
            .cols
            .iter()
            .map(|v| {
                let mut out = PauliString::identity(k);
                for i in 0..k {
                    out.set_x(i, v.anticommutes(&self.cols[k + i]));
                    out.set_z(i, v.anticommutes(&self.cols[i]));
                }
                out
            })
            .collect();
        SymplecticMatrix { k, cols }
    }

    /// A symplectic matrix sending `X_i -> e_i`, `Z_i -> f_i` for the
    /// given pairs, completed on the remaining qubits by symplectic
    /// Gram-Schmidt over single-qubit Paulis.
    pub fn extend_pairs(k: usize, pairs: &[(PauliString, PauliString)]) -> Result<Self> {
        if pairs.len() > k || pairs.iter().any(|(e, f)| e.n() != k || f.n() != k) {
            return Err(Error::SupportMismatch {
                support: pairs.len(),
                expected: k,
            });
        }
        let mut es: Vec<PauliString> = pairs.iter().map(|p| p.0.clone()).collect();
        let mut fs: Vec<PauliString> = pairs.iter().map(|p| p.1.clone()).collect();
        for i in 0..es.len() {
            for j in 0..es.len() {
                if es[i].anticommutes(&fs[j]) != (i == j)
                    || (i != j && (es[i].anticommutes(&es[j]) || fs[i].anticommutes(&fs[j])))
                {
                    return Err(Error::NotSymplectic);
                }
            }
        }
        let project = |v: &PauliString, es: &[PauliString], fs: &[PauliString]| {
            let mut w = v.clone();
            for (e, f) in es.iter().zip(fs) {
                if v.anticommutes(f) {
                    w.mul_assign(e);
                }
                if v.anticommutes(e) {
                    w.mul_assign(f);
                }
            }
            w
        };
        let singles: Vec<PauliString> = (0..k)
            .flat_map(|q| [PauliString::single(k, q, Letter::X), PauliString::single(k, q, Letter::Z)])
            .collect();
        while es.len() < k {
            let e = singles
                .iter()
                .map(|c| project(c, &es, &fs))
                .find(|c| !c.is_identity())
                .expect("complement is nonempty");
            let f = singles
                .iter()
                .find(|c| c.anticommutes(&e))
                .map(|c| project(c, &es, &fs))
                .expect("nonzero vector has a partner");
            es.push(e);
            fs.push(f);
        }
        es.extend(fs);
        SymplecticMatrix::from_images(k, es)
    }
}

/// `v -> v + <h, v> h`.
#[inline]
fn transvect(h: &PauliString, v: &mut PauliString) {
    if h.anticommutes(v) {
        v.mul_assign(h);
    }
}

/// Transvections (applied in order) taking `X_j` to `v`; `v` must be
/// nonzero and supported on qubits `>= j`.
fn transvections_from_x(j: usize, v: &PauliString) -> Vec<PauliString> {
    let k = v.n();
    let e = PauliString::single(k, j, Letter::X);
    if *v == e {
        return Vec::new();
    }
    if e.anticommutes(v) {
        let mut h = e;
        h.mul_assign(v);
        return vec![h];
    }
    // Intermediate z with <e,z> = <z,v> = 1.
    let mut z = PauliString::single(k, j, Letter::Z);
    if !v.x(j) {
        let i = (j + 1..k)
            .find(|&i| v.x(i) || v.z(i))
            .expect("v is nonzero off the pivot pair");
        z.set(i, if v.x(i) { Letter::Z } else { Letter::X });
    }
    let mut h1 = e;
    h1.mul_assign(&z);
    let mut h2 = z;
    h2.mul_assign(v);
    vec![h1, h2]
}

/// Transvections fixing `X_j` and taking `Z_j` to `w` (`<X_j, w> = 1`).
fn transvections_from_z(j: usize, w: &PauliString) -> Vec<PauliString> {
    let k = w.n();
    let e = PauliString::single(k, j, Letter::X);
    let f = PauliString::single(k, j, Letter::Z);
    if *w == f {
        return Vec::new();
    }
    if w.x(j) {
        let mut h = w.clone();
        h.mul_assign(&f);
        return vec![h];
    }
    let mut h2 = w.clone();
    h2.mul_assign(&f);
    h2.mul_assign(&e);
    vec![e, h2]
}

/// Uniformly random element of Sp(2k, GF(2)).
pub fn sample_random_clifford<R: Rng + ?Sized>(k: usize, rng: &mut R) -> SymplecticMatrix {
    let mut m = SymplecticMatrix::identity(k);
    for j in (0..k).rev() {
        // Image of X_j: uniform nonzero vector on qubits j..k.
        let v = loop {
            let mut v = PauliString::identity(k);
            for q in j..k {
                v.set_x(q, rng.random());
                v.set_z(q, rng.random());
            }
            if !v.is_identity() {
                break v;
            }
        };
        // Pre-image of the Z_j image: Z_j + a X_j + anything on j+1..k.
        let mut w = PauliString::single(k, j, Letter::Z);
        w.set_x(j, rng.random());
        for q in j + 1..k {
            w.set_x(q, rng.random());
            w.set_z(q, rng.random());
        }
        let mut hs = transvections_from_z(j, &w);
        hs.extend(transvections_from_x(j, &v));
        for col in (j..k).flat_map(|q| [q, k + q]) {
            for h in &hs {
                transvect(h, &mut m.cols[col]);
            }
        }
    }
    m
}
