//! Exact density matrices on at most ten qubits, used as a brute-force
//! oracle for the stabilizer engine and for the Haar toy model.
//!
//! Qubit `q` is bit `q` of the basis index.

use nalgebra::{Complex, DMatrix};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::region::Region;
use crate::tableau::StabilizerTableau;

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;

pub const MAX_QUBITS: usize = 10;
const PSD_TOL: f64 = 1e-9;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    rho: CMatrix,
}

fn check_n(n: usize) -> Result<()> {
    if n > MAX_QUBITS {
        Err(Error::TooManyQubits { n, max: MAX_QUBITS })
    } else {
        Ok(())
    }
}

/// `i^{x.z} X^x Z^z`, the Hermitian Pauli with the given bits.
fn pauli_mask(p: &PauliString) -> (usize, usize, C64) {
    let (mut xm, mut zm, mut y) = (0usize, 0usize, 0u32);
    for q in 0..p.n() {
        if p.x(q) {
            xm |= 1 << q;
        }
        if p.z(q) {
            zm |= 1 << q;
        }
        if p.x(q) && p.z(q) {
            y += 1;
        }
    }
    (xm, zm, I.powu(y))
}

/// `P M` for the Pauli with masks `(x, z)` and global phase `ph`.
fn pauli_left(m: &CMatrix, x: usize, z: usize, ph: C64) -> CMatrix {
    let d = m.nrows();
    let mut out = CMatrix::zeros(d, m.ncols());
    for b in 0..d {
        let sign = if (z & b).count_ones() % 2 == 1 { -ph } else { ph };
        for j in 0..m.ncols() {
            out[(b ^ x, j)] = sign * m[(b, j)];
        }
    }
    out
}

/// `P M P` for a Hermitian Pauli.
fn pauli_conj(m: &CMatrix, x: usize, z: usize, ph: C64) -> CMatrix {
    let left = pauli_left(m, x, z, ph);
    pauli_left(&left.adjoint(), x, z, ph).adjoint()
}

/// `U M` where `u` acts on `qubits` (local bit `j` is `qubits[j]`).
fn apply_local_left(m: &CMatrix, u: &CMatrix, qubits: &[usize]) -> CMatrix {
    let k = qubits.len();
    let dl = 1usize << k;
    let d = m.nrows();
    let mask: usize = qubits.iter().map(|&q| 1 << q).sum();
    let spread = |l: usize| -> usize {
        qubits
            .iter()
            .enumerate()
            .filter(|(j, _)| l >> j & 1 == 1)
            .map(|(_, &q)| 1 << q)
            .sum()
    };
    let offsets: Vec<usize> = (0..dl).map(spread).collect();
    let mut out = CMatrix::zeros(d, m.ncols());
    for base in (0..d).filter(|b| b & mask == 0) {
        for j in 0..m.ncols() {
            for (r, &or) in offsets.iter().enumerate() {
                let mut acc = ZERO;
                for (c, &oc) in offsets.iter().enumerate() {
                    acc += u[(r, c)] * m[(base | oc, j)];
                }
                out[(base | or, j)] = acc;
            }
        }
    }
    out
}

impl DensityMatrix {
    /// `|0...0><0...0|`.
    pub fn zero_state(n: usize) -> Result<Self> {
        check_n(n)?;
        let d = 1 << n;
        let mut rho = CMatrix::zeros(d, d);
        rho[(0, 0)] = ONE;
        Ok(DensityMatrix { n, rho })
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        check_n(n)?;
        let d = 1 << n;
        Ok(DensityMatrix {
            n,
            rho: CMatrix::identity(d, d) / C64::from(d as f64),
        })
    }

    /// `2^-n prod_i (I + g_i)`, taking every generator with sign +1. Trace
    /// stays one because each product of distinct generators is traceless.
    pub fn from_tableau(tab: &StabilizerTableau) -> Result<Self> {
        let mut dm = Self::maximally_mixed(tab.n())?;
        for g in tab.rows() {
            let (x, z, ph) = pauli_mask(g);
            let gr = pauli_left(&dm.rho, x, z, ph);
            dm.rho += gr;
        }
        Ok(dm)
    }

    pub fn from_matrix(n: usize, rho: CMatrix) -> Result<Self> {
        check_n(n)?;
        if rho.nrows() != 1 << n || rho.ncols() != 1 << n {
            return Err(Error::LengthMismatch {
                left: rho.nrows(),
                right: 1 << n,
            });
        }
        Ok(DensityMatrix { n, rho })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub fn trace(&self) -> C64 {
        self.rho.trace()
    }

    /// `U rho U^dag` with `u` acting on `qubits`.
    pub fn apply_unitary(&mut self, u: &CMatrix, qubits: &[usize]) -> Result<()> {
        for &q in qubits {
            if q >= self.n {
                return Err(Error::QubitOutOfRange { index: q, n: self.n });
            }
        }
        if u.nrows() != 1 << qubits.len() || !u.is_square() {
            return Err(Error::SupportMismatch {
                support: qubits.len(),
                expected: u.nrows().trailing_zeros() as usize,
            });
        }
        let left = apply_local_left(&self.rho, u, qubits);
        self.rho = apply_local_left(&left.adjoint(), u, qubits).adjoint();
        Ok(())
    }

    /// `(1-p) rho + p Tr_q(rho) (x) I/2`.
    pub fn depolarize(&mut self, q: usize, p: f64) -> Result<()> {
        if q >= self.n {
            return Err(Error::QubitOutOfRange { index: q, n: self.n });
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("p = {p} outside [0, 1]")));
        }
        if p == 0.0 {
            return Ok(());
        }
        // Tr_q(rho) (x) I/2 is the average of P rho P over the four Paulis.
        let b = 1usize << q;
        let mut twirl = self.rho.clone();
        for (x, z, ph) in [(b, 0, ONE), (b, b, I), (0, b, ONE)] {
            twirl += pauli_conj(&self.rho, x, z, ph);
        }
        twirl *= C64::from(0.25);
        self.rho = &self.rho * C64::from(1.0 - p) + twirl * C64::from(p);
        Ok(())
    }

    /// Full depolarization of `q` with probability `p`; returns whether it
    /// fired.
    pub fn herald_depolarize<R: Rng + ?Sized>(&mut self, q: usize, p: f64, rng: &mut R) -> Result<bool> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("p = {p} outside [0, 1]")));
        }
        let fire = rng.random_bool(p);
        if fire {
            self.depolarize(q, 1.0)?;
        } else if q >= self.n {
            return Err(Error::QubitOutOfRange { index: q, n: self.n });
        }
        Ok(fire)
    }

    /// Reduced density matrix on `region`, in ascending qubit order.
    pub fn partial_trace(&self, region: &Region) -> Result<CMatrix> {
        region.check(self.n)?;
        let keep = region.qubits();
        let rest = region.complement(self.n);
        let spread = |l: usize, qs: &[usize]| -> usize {
            qs.iter()
                .enumerate()
                .filter(|(j, _)| l >> j & 1 == 1)
                .map(|(_, &q)| 1 << q)
                .sum()
        };
        let dk = 1usize << keep.len();
        let keep_off: Vec<usize> = (0..dk).map(|l| spread(l, keep)).collect();
        let rest_off: Vec<usize> = (0..1usize << rest.len()).map(|l| spread(l, rest.qubits())).collect();
        let mut out = CMatrix::zeros(dk, dk);
        for (i, &oi) in keep_off.iter().enumerate() {
            for (j, &oj) in keep_off.iter().enumerate() {
                out[(i, j)] = rest_off.iter().map(|&c| self.rho[(oi | c, oj | c)]).sum();
            }
        }
        Ok(out)
    }

    /// Eigenvalues of the reduced state; fails if one is below `-1e-9`.
    pub fn spectrum(&self, region: &Region) -> Result<Vec<f64>> {
        let red = self.partial_trace(region)?;
        let herm = (&red + red.adjoint()) * C64::from(0.5);
        let ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        if let Some(&min) = ev.iter().min_by(|a, b| a.total_cmp(b)) {
            if min < -PSD_TOL {
                return Err(Error::Domain(format!("negative eigenvalue {min}")));
            }
        }
        Ok(ev)
    }

    /// Von Neumann entropy in bits.
    pub fn von_neumann_entropy(&self, region: &Region) -> Result<f64> {
        Ok(self
            .spectrum(region)?
            .into_iter()
            .filter(|&l| l > 1e-14)
            .map(|l| -l * l.log2())
            .sum())
    }

    /// `-log2 Tr rho_X^2`.
    pub fn renyi2_entropy(&self, region: &Region) -> Result<f64> {
        let red = self.partial_trace(region)?;
        let purity: f64 = red.iter().map(|z| z.norm_sqr()).sum();
        Ok(-purity.log2())
    }

    pub fn von_neumann_cmi(&self, a: &Region, b: &Region, c: &Region) -> Result<f64> {
        self.cmi_with(a, b, c, Self::von_neumann_entropy)
    }

    pub fn renyi2_cmi(&self, a: &Region, b: &Region, c: &Region) -> Result<f64> {
        self.cmi_with(a, b, c, Self::renyi2_entropy)
    }

    fn cmi_with(
        &self,
        a: &Region,
        b: &Region,
        c: &Region,
        s: impl Fn(&Self, &Region) -> Result<f64>,
    ) -> Result<f64> {
        Region::check_disjoint(&[a, b, c])?;
        let ab = a.union(b);
        let bc = b.union(c);
        let abc = ab.union(c);
        Ok(s(self, &ab)? + s(self, &bc)? - s(self, b)? - s(self, &abc)?)
    }
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

impl DensityMatrix {
    /// Largest deviation from Hermiticity, and from unit trace.
    pub fn defects(&self) -> (f64, f64) {
        let herm = max_abs(&(&self.rho - self.rho.adjoint()));
        (herm, (self.trace() - ONE).norm())
    }
}

/// Haar-random `dim x dim` unitary: QR of a complex Ginibre matrix with
/// the phases of `R`'s diagonal moved into `Q`.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    assert!(dim >= 2, "dim must be at least 2");
    let g = CMatrix::from_fn(dim, dim, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn hadamard_gate() -> CMatrix {
    let s = C64::from(std::f64::consts::FRAC_1_SQRT_2);
    CMatrix::from_row_slice(2, 2, &[s, s, s, -s])
}

pub fn phase_gate() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, I])
}

/// CNOT with control on local qubit 0 (low bit) and target on 1.
pub fn cnot_gate() -> CMatrix {
    let mut u = CMatrix::zeros(4, 4);
    for (from, to) in [(0, 0), (1, 3), (2, 2), (3, 1)] {
        u[(to, from)] = ONE;
    }
    u
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Channel {
    Depolarizing,
    Heralded,
}

impl std::fmt::Display for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Channel::Depolarizing => "depolarizing",
            Channel::Heralded => "heralded",
        })
    }
}

impl std::str::FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "depolarizing" => Ok(Channel::Depolarizing),
            "heralded" => Ok(Channel::Heralded),
            _ => Err(Error::Parse(format!("unknown channel {s:?}"))),
        }
    }
}

/// Four qubits from `|0000>`: Haar gates on (0,1) and (2,3), then on
/// (1,2), then the channel on qubits 1 and 2. Returns `I2(A:C|B)` with
/// A = {0}, B = {1,2}, C = {3}. Gates are drawn before any noise, so the
/// gates of a given stream do not depend on the channel.
pub fn toy_four_qudit<R: Rng + ?Sized>(p: f64, channel: Channel, rng: &mut R) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p = {p} outside [0, 1]")));
    }
    let u01 = haar_unitary(4, rng);
    let u23 = haar_unitary(4, rng);
    let u12 = haar_unitary(4, rng);
    let mut dm = DensityMatrix::zero_state(4)?;
    dm.apply_unitary(&u01, &[0, 1])?;
    dm.apply_unitary(&u23, &[2, 3])?;
    dm.apply_unitary(&u12, &[1, 2])?;
    for q in [1, 2] {
        match channel {
            Channel::Depolarizing => dm.depolarize(q, p)?,
            Channel::Heralded => {
                dm.herald_depolarize(q, p, rng)?;
            }
        }
    }
    dm.renyi2_cmi(&Region::from([0]), &Region::from([1, 2]), &Region::from([3]))
}
