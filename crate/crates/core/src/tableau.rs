//! Stabilizer tableau: K commuting, independent generator rows on N qubits.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::pauli::{Gf2Basis, Gf2Matrix, Letter, PauliString};
use crate::region::Region;
use crate::symplectic::SymplecticMatrix;

/// Which branch of the complete-depolarization update fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepolarizeCase {
    /// Column already trivial.
    Untouched,
    /// One letter type in the column; one row removed.
    OneRow,
    /// Two letter types; two rows removed.
    TwoRows,
}

impl DepolarizeCase {
    pub fn rows_removed(self) -> usize {
        match self {
            DepolarizeCase::Untouched => 0,
            DepolarizeCase::OneRow => 1,
            DepolarizeCase::TwoRows => 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureCase {
    /// Observable already in the group (up to sign).
    InGroup,
    /// Commutes with the group but is independent; appended.
    Appended,
    /// Anticommutes with some row; replaces one.
    Replaced,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Measurement {
    /// +1 or -1. Reported as +1 when the outcome is deterministic, since
    /// signs are not tracked.
    pub outcome: i8,
    pub deterministic: bool,
    pub case: MeasureCase,
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StabilizerTableau {
    n: usize,
    rows: Vec<PauliString>,
}

const DEBUG_CHECK_MAX_QUBITS: usize = 64;

impl StabilizerTableau {
    /// Maximally mixed state (no generators).
    pub fn empty(n: usize) -> Self {
        StabilizerTableau { n, rows: Vec::new() }
    }

    /// |0...0>: row i is Z on qubit i.
    pub fn from_product_state(n: usize) -> Self {
        StabilizerTableau {
            n,
            rows: (0..n).map(|i| PauliString::single(n, i, Letter::Z)).collect(),
        }
    }

    /// Validates commutation and independence.
    pub fn from_rows(n: usize, rows: Vec<PauliString>) -> Result<Self> {
        let t = StabilizerTableau { n, rows };
        t.check_invariants()?;
        Ok(t)
    }

    pub(crate) fn from_rows_unchecked(n: usize, rows: Vec<PauliString>) -> Self {
        StabilizerTableau { n, rows }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of generators.
    pub fn k(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[PauliString] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<PauliString> {
        self.rows
    }

    pub fn check_invariants(&self) -> Result<()> {
        if self.rows.len() > self.n {
            return Err(Error::InvalidTableau(format!(
                "{} rows on {} qubits",
                self.rows.len(),
                self.n
            )));
        }
        for (i, r) in self.rows.iter().enumerate() {
            if r.n() != self.n {
                return Err(Error::LengthMismatch {
                    left: r.n(),
                    right: self.n,
                });
            }
            if let Some(j) = (i + 1..self.rows.len()).find(|&j| r.anticommutes(&self.rows[j])) {
                return Err(Error::InvalidTableau(format!("rows {i} and {j} anticommute")));
            }
        }
        if self.group_basis().len() != self.rows.len() {
            return Err(Error::InvalidTableau("rows are not independent".into()));
        }
        Ok(())
    }

    #[inline]
    fn debug_check(&self) {
        if cfg!(debug_assertions) && self.n <= DEBUG_CHECK_MAX_QUBITS {
            if let Err(e) = self.check_invariants() {
                panic!("tableau invariant violated: {e}");
            }
        }
    }

    /// Echelon basis of the row span, for membership queries.
    pub fn group_basis(&self) -> Gf2Basis {
        let mut b = Gf2Basis::new();
        for r in &self.rows {
            b.insert_pauli(r);
        }
        b
    }

    /// Whether `g` (up to sign) is an element of the stabilizer group.
    pub fn contains(&self, g: &PauliString) -> bool {
        g.n() == self.n && self.group_basis().contains_pauli(g)
    }

    /// Whether two tableaus generate the same group.
    pub fn same_group(&self, other: &StabilizerTableau) -> bool {
        if self.n != other.n || self.k() != other.k() {
            return false;
        }
        let b = self.group_basis();
        other.rows.iter().all(|r| b.contains_pauli(r))
    }

    /// Conjugates every row by the Clifford `u` acting on `support`.
    pub fn apply_clifford(&mut self, u: &SymplecticMatrix, support: &[usize]) -> Result<()> {
        if support.len() != u.k() {
            return Err(Error::SupportMismatch {
                support: support.len(),
                expected: u.k(),
            });
        }
        if let Some(&q) = support.iter().find(|&&q| q >= self.n) {
            return Err(Error::QubitOutOfRange { index: q, n: self.n });
        }
        let mut local = PauliString::identity(u.k());
        let mut image = PauliString::identity(u.k());
        for row in &mut self.rows {
            let mut any = false;
            for (j, &q) in support.iter().enumerate() {
                let (x, z) = (row.x(q), row.z(q));
                local.set_x(j, x);
                local.set_z(j, z);
                any |= x | z;
            }
            if !any {
                continue;
            }
            u.apply_into(&local, &mut image);
            for (j, &q) in support.iter().enumerate() {
                row.set_x(q, image.x(j));
                row.set_z(q, image.z(j));
            }
        }
        self.debug_check();
        Ok(())
    }

    /// Complete depolarization of qubit `q`: rho -> Tr_q rho (x) I/2.
    pub fn depolarize_qubit(&mut self, q: usize) -> Result<DepolarizeCase> {
        if q >= self.n {
            return Err(Error::QubitOutOfRange { index: q, n: self.n });
        }
        let letters: Vec<Letter> = self.rows.iter().map(|r| r.letter(q)).collect();
        let Some(k1) = letters.iter().position(|&l| l != Letter::I) else {
            return Ok(DepolarizeCase::Untouched);
        };
        let a = letters[k1];
        let k2 = letters.iter().position(|&l| l != Letter::I && l != a);
        let case = match k2 {
            None => {
                let pivot = self.rows[k1].clone();
                for (i, &l) in letters.iter().enumerate() {
                    if i != k1 && l != Letter::I {
                        self.rows[i].mul_assign(&pivot);
                    }
                }
                self.rows.remove(k1);
                DepolarizeCase::OneRow
            }
            Some(k2) => {
                let b = letters[k2];
                let p1 = self.rows[k1].clone();
                let p2 = self.rows[k2].clone();
                for (i, &l) in letters.iter().enumerate() {
                    if i == k1 || i == k2 || l == Letter::I {
                        continue;
                    }
                    if l == a {
                        self.rows[i].mul_assign(&p1);
                    } else if l == b {
                        self.rows[i].mul_assign(&p2);
                    } else {
                        self.rows[i].mul_assign(&p1);
                        self.rows[i].mul_assign(&p2);
                    }
                }
                // k1 < k2 by construction
                self.rows.remove(k2);
                self.rows.remove(k1);
                DepolarizeCase::TwoRows
            }
        };
        self.debug_check();
        Ok(case)
    }

    /// Projective measurement of the Pauli observable `g`.
    pub fn measure_pauli<R: Rng + ?Sized>(
        &mut self,
        g: &PauliString,
        rng: &mut R,
    ) -> Result<Measurement> {
        if g.n() != self.n {
            return Err(Error::LengthMismatch {
                left: g.n(),
                right: self.n,
            });
        }
        if g.is_identity() {
            return Err(Error::IdentityObservable);
        }
        let anti: Vec<usize> = (0..self.rows.len())
            .filter(|&i| self.rows[i].anticommutes(g))
            .collect();
        let m = if let Some((&first, rest)) = anti.split_first() {
            let pivot = self.rows[first].clone();
            for &i in rest {
                self.rows[i].mul_assign(&pivot);
            }
            self.rows[first] = g.clone();
            Measurement {
                outcome: random_sign(rng),
                deterministic: false,
                case: MeasureCase::Replaced,
            }
        } else if self.contains(g) {
            Measurement {
                outcome: 1,
                deterministic: true,
                case: MeasureCase::InGroup,
            }
        } else {
            self.rows.push(g.clone());
            Measurement {
                outcome: random_sign(rng),
                deterministic: false,
                case: MeasureCase::Appended,
            }
        };
        self.debug_check();
        Ok(m)
    }

    /// Rank of the rows restricted to `qubits`.
    pub fn restricted_rank(&self, qubits: &[usize]) -> usize {
        let mut m = Gf2Matrix::new(2 * qubits.len());
        for r in &self.rows {
            m.push_pauli(&r.restrict(qubits));
        }
        m.into_rank()
    }

    /// Von Neumann entropy (bits) of `a`: |A| - dim(subgroup supported in A).
    pub fn entropy(&self, a: &Region) -> Result<usize> {
        a.check(self.n)?;
        let comp = a.complement(self.n);
        let inside = self.k() - self.restricted_rank(comp.qubits());
        Ok(a.len() - inside)
    }

    pub fn mutual_information(&self, a: &Region, b: &Region) -> Result<usize> {
        Region::check_disjoint(&[a, b])?;
        let s = self.entropy(a)? + self.entropy(b)?;
        Ok(s - self.entropy(&a.union(b))?)
    }

    /// I(A:C|B) = S(AB) + S(BC) - S(B) - S(ABC).
    pub fn cmi(&self, a: &Region, b: &Region, c: &Region) -> Result<usize> {
        Region::check_disjoint(&[a, b, c])?;
        let ab = a.union(b);
        let bc = b.union(c);
        let abc = ab.union(c);
        let pos = self.entropy(&ab)? + self.entropy(&bc)?;
        Ok(pos - self.entropy(b)? - self.entropy(&abc)?)
    }
}

fn random_sign<R: Rng + ?Sized>(rng: &mut R) -> i8 {
    if rng.random::<bool>() {
        1
    } else {
        -1
    }
}

impl fmt::Display for StabilizerTableau {
    /// Header `n=<n> k=<K>` then one row per line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n={} k={}", self.n, self.k())?;
        for r in &self.rows {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for StabilizerTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for StabilizerTableau {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut lines = s.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("missing header".into()))?;
        let mut n = None;
        let mut k = None;
        for field in header.split_whitespace() {
            let (key, val) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad header field {field:?}")))?;
            let val: usize = val
                .parse()
                .map_err(|_| Error::Parse(format!("bad header value {val:?}")))?;
            match key {
                "n" => n = Some(val),
                "k" => k = Some(val),
                _ => return Err(Error::Parse(format!("unknown header key {key:?}"))),
            }
        }
        let (n, k) = n
            .zip(k)
            .ok_or_else(|| Error::Parse("header needs n= and k=".into()))?;
        let rows = lines
            .map(|l| l.parse::<PauliString>())
            .collect::<Result<Vec<_>>>()?;
        if rows.len() != k {
            return Err(Error::Parse(format!("header says k={k}, found {} rows", rows.len())));
        }
        StabilizerTableau::from_rows(n, rows)
    }
}
