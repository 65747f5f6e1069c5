//! Cross-checks the stabilizer engine against dense density matrices on
//! random small Clifford circuits with heralded depolarization.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::clipped::{clip, cmi_endpoints, mi_endpoints};
use crate::dense::{cnot_gate, hadamard_gate, phase_gate, DensityMatrix};
use crate::error::Result;
use crate::region::Region;
use crate::rng;
use crate::symplectic::SymplecticMatrix;
use crate::tableau::StabilizerTableau;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct OracleReport {
    pub circuits: usize,
    pub regions_checked: usize,
    pub partitions_checked: usize,
    /// Largest |dense von Neumann - tableau entropy| seen.
    pub max_entropy_error: f64,
    pub entropy_failures: usize,
    pub endpoint_failures: usize,
}

impl OracleReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.entropy_failures == 0 && self.endpoint_failures == 0 && self.max_entropy_error <= tol
    }

    fn merge(mut self, o: OracleReport) -> OracleReport {
        self.circuits += o.circuits;
        self.regions_checked += o.regions_checked;
        self.partitions_checked += o.partitions_checked;
        self.max_entropy_error = self.max_entropy_error.max(o.max_entropy_error);
        self.entropy_failures += o.entropy_failures;
        self.endpoint_failures += o.endpoint_failures;
        self
    }
}

/// Runs one circuit on `n` qubits with `depth` random operations and
/// returns the matching tableau and density matrix.
pub fn random_circuit_pair<R: Rng + ?Sized>(
    n: usize,
    depth: usize,
    rng: &mut R,
) -> Result<(StabilizerTableau, DensityMatrix)> {
    let mut tab = StabilizerTableau::from_product_state(n);
    let mut dm = DensityMatrix::zero_state(n)?;
    for _ in 0..depth {
        let u: f64 = rng.random();
        let q = rng.random_range(0..n);
        if u < 0.35 && n > 1 {
            let mut t = rng.random_range(0..n - 1);
            if t >= q {
                t += 1;
            }
            tab.apply_clifford(&SymplecticMatrix::cnot(), &[q, t])?;
            dm.apply_unitary(&cnot_gate(), &[q, t])?;
        } else if u < 0.6 {
            tab.apply_clifford(&SymplecticMatrix::hadamard(), &[q])?;
            dm.apply_unitary(&hadamard_gate(), &[q])?;
        } else if u < 0.85 {
            tab.apply_clifford(&SymplecticMatrix::phase(), &[q])?;
            dm.apply_unitary(&phase_gate(), &[q])?;
        } else {
            tab.depolarize_qubit(q)?;
            dm.depolarize(q, 1.0)?;
        }
    }
    Ok((tab, dm))
}

/// Compares every region's entropy and every contiguous MI/CMI split.
pub fn check_pair(tab: &StabilizerTableau, dm: &DensityMatrix, tol: f64) -> Result<OracleReport> {
    let n = tab.n();
    let mut rep = OracleReport {
        circuits: 1,
        ..Default::default()
    };
    for mask in 0u32..1 << n {
        let region = Region::new((0..n).filter(|q| mask >> q & 1 == 1).collect::<Vec<usize>>());
        let exact = tab.entropy(&region)? as f64;
        let err = (dm.von_neumann_entropy(&region)? - exact).abs();
        rep.max_entropy_error = rep.max_entropy_error.max(err);
        rep.entropy_failures += (err > tol) as usize;
        rep.regions_checked += 1;
    }
    let ct = clip(tab);
    for cut in 1..n {
        let rank = tab.mutual_information(&Region::range(0..cut), &Region::range(cut..n))?;
        rep.endpoint_failures += (mi_endpoints(&ct, cut)? != rank) as usize;
        rep.partitions_checked += 1;
    }
    for xl in 1..n {
        for xr in xl + 1..n {
            let rank = tab.cmi(&Region::range(0..xl), &Region::range(xl..xr), &Region::range(xr..n))?;
            rep.endpoint_failures += (cmi_endpoints(&ct, xl, xr)? != rank) as usize;
            rep.partitions_checked += 1;
        }
    }
    Ok(rep)
}

/// Circuit `i` acts on `2 + i % (max_n - 1)` qubits with depth `4n`.
pub fn oracle_suite(circuits: usize, max_n: usize, seed: u64, tol: f64) -> Result<OracleReport> {
    let max_n = max_n.max(2);
    let reports: Vec<OracleReport> = (0..circuits)
        .into_par_iter()
        .map(|i| {
            let n = 2 + i % (max_n - 1);
            let mut rng = rng::stream(seed, i as u64);
            let (tab, dm) = random_circuit_pair(n, 4 * n, &mut rng)?;
            check_pair(&tab, &dm, tol)
        })
        .collect::<Result<_>>()?;
    Ok(reports.into_iter().fold(OracleReport::default(), OracleReport::merge))
}
