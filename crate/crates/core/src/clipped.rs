//! Clipped gauge: a generator choice in which every column hosts at most
//! two row endpoints, and two endpoints sharing a column (on the same side)
//! carry different letters there. In this gauge bipartite and contiguous
//! tripartite correlations are endpoint counts.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pauli::PauliString;
use crate::rng;
use crate::symplectic::sample_random_clifford;
use crate::tableau::StabilizerTableau;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClippedTableau {
    base: StabilizerTableau,
    left: Vec<usize>,
    right: Vec<usize>,
}

impl ClippedTableau {
    /// Wraps `tab` as-is, computing endpoints without changing the gauge.
    /// Useful for validating hand-built tableaus.
    pub fn from_current_gauge(tab: StabilizerTableau) -> Self {
        let left = tab
            .rows()
            .iter()
            .map(|r| r.left_endpoint().unwrap_or(0))
            .collect();
        let right = tab
            .rows()
            .iter()
            .map(|r| r.right_endpoint().unwrap_or(0))
            .collect();
        ClippedTableau { base: tab, left, right }
    }

    pub fn tableau(&self) -> &StabilizerTableau {
        &self.base
    }

    pub fn into_tableau(self) -> StabilizerTableau {
        self.base
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn k(&self) -> usize {
        self.base.k()
    }

    pub fn left(&self) -> &[usize] {
        &self.left
    }

    pub fn right(&self) -> &[usize] {
        &self.right
    }

    /// `r(k) - l(k) + 1` per row.
    pub fn lengths(&self) -> Vec<usize> {
        self.left
            .iter()
            .zip(&self.right)
            .map(|(l, r)| r - l + 1)
            .collect()
    }

    /// Number of left endpoints per column.
    pub fn rho_left(&self) -> Vec<usize> {
        histogram(&self.left, self.n())
    }

    pub fn rho_right(&self) -> Vec<usize> {
        histogram(&self.right, self.n())
    }
}

fn histogram(ends: &[usize], n: usize) -> Vec<usize> {
    let mut h = vec![0; n];
    for &e in ends {
        h[e] += 1;
    }
    h
}

#[derive(Clone, Copy)]
enum Bit {
    X,
    Z,
}

#[inline]
fn has(row: &PauliString, q: usize, bit: Bit) -> bool {
    match bit {
        Bit::X => row.x(q),
        Bit::Z => row.z(q),
    }
}

/// Brings `tab` into clipped gauge. The stabilizer group is unchanged.
pub fn clip(tab: &StabilizerTableau) -> ClippedTableau {
    let n = tab.n();
    let mut rows = tab.rows().to_vec();
    let k = rows.len();

    // Echelon on left endpoints: bits in order x0 z0 x1 z1 ...
    let mut free: Vec<usize> = (0..k).collect();
    'left: for q in 0..n {
        for bit in [Bit::X, Bit::Z] {
            if free.is_empty() {
                break 'left;
            }
            let Some(pos) = free.iter().position(|&r| has(&rows[r], q, bit)) else {
                continue;
            };
            let p = free.remove(pos);
            let pivot = rows[p].clone();
            for &r in &free {
                if has(&rows[r], q, bit) {
                    rows[r].mul_assign(&pivot);
                }
            }
        }
    }

    let left: Vec<usize> = rows
        .iter()
        .map(|r| r.left_endpoint().expect("independent rows are non-identity"))
        .collect();

    // Echelon on right endpoints, scanning from the right. The pivot is the
    // candidate with the largest left endpoint, so folding it into the other
    // candidates never moves their left endpoints.
    let mut free: Vec<usize> = (0..k).collect();
    'right: for q in (0..n).rev() {
        for bit in [Bit::X, Bit::Z] {
            if free.is_empty() {
                break 'right;
            }
            let mut pivot: Option<usize> = None;
            for (pos, &r) in free.iter().enumerate() {
                if has(&rows[r], q, bit) && pivot.is_none_or(|b| left[r] > left[free[b]]) {
                    pivot = Some(pos);
                }
            }
            let Some(pos) = pivot else { continue };
            let p = free.remove(pos);
            let pr = rows[p].clone();
            for &r in &free {
                if has(&rows[r], q, bit) {
                    rows[r].mul_assign(&pr);
                }
            }
        }
    }

    let right: Vec<usize> = rows
        .iter()
        .map(|r| r.right_endpoint().expect("independent rows are non-identity"))
        .collect();

    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by_key(|&i| (left[i] + right[i], left[i]));
    let sorted_rows = order.iter().map(|&i| rows[i].clone()).collect();
    let ct = ClippedTableau {
        base: StabilizerTableau::from_rows_unchecked(n, sorted_rows),
        left: order.iter().map(|&i| left[i]).collect(),
        right: order.iter().map(|&i| right[i]).collect(),
    };
    debug_assert!(n > 64 || validate_clipped(&ct).is_empty());
    ct
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    /// More than two endpoints in one column.
    TooManyEndpoints { column: usize, left: usize, right: usize },
    /// Two same-side endpoints in a column with the same letter there.
    SameLetter { column: usize, side: Side, rows: (usize, usize) },
    /// Midpoints decrease between `row` and `row + 1`.
    Unsorted { row: usize },
    /// Stored endpoints disagree with the row.
    StaleEndpoint { row: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::TooManyEndpoints { column, left, right } => {
                write!(f, "column {column}: {left} left + {right} right endpoints")
            }
            Violation::SameLetter { column, side, rows } => write!(
                f,
                "column {column}: rows {} and {} share a {side:?} endpoint letter",
                rows.0, rows.1
            ),
            Violation::Unsorted { row } => write!(f, "rows {row} and {} out of midpoint order", row + 1),
            Violation::StaleEndpoint { row } => write!(f, "row {row}: stored endpoints are stale"),
        }
    }
}

/// All violations of the clipped-gauge conditions and midpoint ordering.
pub fn validate_clipped(ct: &ClippedTableau) -> Vec<Violation> {
    let mut out = Vec::new();
    let rows = ct.base.rows();
    for (i, r) in rows.iter().enumerate() {
        if r.left_endpoint() != Some(ct.left[i]) || r.right_endpoint() != Some(ct.right[i]) {
            out.push(Violation::StaleEndpoint { row: i });
        }
    }
    if !out.is_empty() {
        return out;
    }
    let rho_l = ct.rho_left();
    let rho_r = ct.rho_right();
    for column in 0..ct.n() {
        if rho_l[column] + rho_r[column] > 2 {
            out.push(Violation::TooManyEndpoints {
                column,
                left: rho_l[column],
                right: rho_r[column],
            });
        }
    }
    for (side, ends) in [(Side::Left, &ct.left), (Side::Right, &ct.right)] {
        let mut by_col: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &c) in ends.iter().enumerate() {
            by_col.entry(c).or_default().push(i);
        }
        for (&column, members) in &by_col {
            for (a, &i) in members.iter().enumerate() {
                for &j in &members[a + 1..] {
                    if rows[i].letter(column) == rows[j].letter(column) {
                        out.push(Violation::SameLetter {
                            column,
                            side,
                            rows: (i, j),
                        });
                    }
                }
            }
        }
    }
    for row in 1..ct.k() {
        if ct.left[row] + ct.right[row] < ct.left[row - 1] + ct.right[row - 1] {
            out.push(Violation::Unsorted { row: row - 1 });
        }
    }
    out
}

/// I(A:B) for A = [0, cut), B = [cut, n).
pub fn mi_endpoints(ct: &ClippedTableau, cut: usize) -> Result<usize> {
    let n = ct.n();
    if cut == 0 || cut >= n {
        return Err(Error::Domain(format!("cut {cut} outside [1, {}]", n.saturating_sub(1))));
    }
    Ok(ct
        .left
        .iter()
        .zip(&ct.right)
        .filter(|&(&l, &r)| l < cut && r >= cut)
        .count())
}

/// I(A:C|B) for A = [0, x_left), B = [x_left, x_right), C = [x_right, n).
pub fn cmi_endpoints(ct: &ClippedTableau, x_left: usize, x_right: usize) -> Result<usize> {
    let n = ct.n();
    if x_left == 0 || x_left >= x_right || x_right >= n {
        return Err(Error::Domain(format!(
            "need 1 <= x_left < x_right <= {}, got {x_left}, {x_right}",
            n.saturating_sub(1)
        )));
    }
    Ok(ct
        .left
        .iter()
        .zip(&ct.right)
        .filter(|&(&l, &r)| l < x_left && r >= x_right)
        .count())
}

/// Random stabilizer state with `k` generators: the first `k` rows of the
/// product state pushed through a uniformly random `n`-qubit Clifford.
pub fn sample_random_stabilizer_state<R: rand::Rng + ?Sized>(
    n: usize,
    k: usize,
    rng: &mut R,
) -> Result<StabilizerTableau> {
    if k > n {
        return Err(Error::InvalidConfig(format!("k = {k} exceeds n = {n}")));
    }
    let u = sample_random_clifford(n, rng);
    // The image of Z_i is column n + i.
    let rows = u.images()[n..n + k].to_vec();
    Ok(StabilizerTableau::from_rows_unchecked(n, rows))
}

/// `n - k/2 + 1`, with odd `k` rounded half-up.
pub fn len_ideal(n: usize, k: usize) -> i64 {
    n as i64 + 1 - (k / 2) as i64
}

/// Histogram of row-length deviations from `len_ideal` over random states.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LengthStats {
    pub n: usize,
    pub k: usize,
    pub len_ideal: i64,
    pub samples: usize,
    pub seed: u64,
    pub deviations: BTreeMap<i64, u64>,
}

impl LengthStats {
    pub fn rows(&self) -> u64 {
        self.deviations.values().sum()
    }

    pub fn mean_abs_delta(&self) -> f64 {
        let rows = self.rows();
        if rows == 0 {
            return 0.0;
        }
        let s: f64 = self
            .deviations
            .iter()
            .map(|(&d, &c)| d.unsigned_abs() as f64 * c as f64)
            .sum();
        s / rows as f64
    }

    /// Fraction of rows with `|delta| > threshold`.
    pub fn tail_fraction(&self, threshold: i64) -> f64 {
        let rows = self.rows();
        if rows == 0 {
            return 0.0;
        }
        let tail: u64 = self
            .deviations
            .iter()
            .filter(|(d, _)| d.abs() > threshold)
            .map(|(_, c)| c)
            .sum();
        tail as f64 / rows as f64
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# n={}", self.n);
        let _ = writeln!(s, "# k={}", self.k);
        let _ = writeln!(s, "# samples={}", self.samples);
        let _ = writeln!(s, "# seed={}", self.seed);
        s.push_str("delta,count\n");
        for (d, c) in &self.deviations {
            let _ = writeln!(s, "{d},{c}");
        }
        s
    }
}

/// Clips `samples` random states and histograms `len - len_ideal`.
/// Sample `i` draws from stream `i` of `seed`.
pub fn length_deviation_stats(samples: usize, n: usize, k: usize, seed: u64) -> Result<LengthStats> {
    if samples == 0 {
        return Err(Error::InvalidConfig("samples must be at least 1".into()));
    }
    if k > n {
        return Err(Error::InvalidConfig(format!("k = {k} exceeds n = {n}")));
    }
    let ideal = len_ideal(n, k);
    let deviations = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng::stream(seed, i as u64);
            let tab = sample_random_stabilizer_state(n, k, &mut rng).expect("k <= n checked");
            let mut h = BTreeMap::new();
            for len in clip(&tab).lengths() {
                *h.entry(len as i64 - ideal).or_insert(0u64) += 1;
            }
            h
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (d, c) in b {
                *a.entry(d).or_insert(0) += c;
            }
            a
        });
    Ok(LengthStats {
        n,
        k,
        len_ideal: ideal,
        samples,
        seed,
        deviations,
    })
}

/// p-value of a chi-square homogeneity test between two deviation
/// histograms. Bins with small expected counts are pooled into the tails.
pub fn two_sample_chi_square(a: &LengthStats, b: &LengthStats) -> f64 {
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    let keys: Vec<i64> = a
        .deviations
        .keys()
        .chain(b.deviations.keys())
        .copied()
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    let (na, nb) = (a.rows() as f64, b.rows() as f64);
    let total = na + nb;
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    // Pool consecutive bins until each pooled bin has expected count >= 5
    // in both samples.
    let min_share = 5.0 / na.min(nb) * total;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for d in keys {
        acc.0 += *a.deviations.get(&d).unwrap_or(&0) as f64;
        acc.1 += *b.deviations.get(&d).unwrap_or(&0) as f64;
        if acc.0 + acc.1 >= min_share {
            bins.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.0 + acc.1 > 0.0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => bins.push(acc),
        }
    }
    if bins.len() < 2 {
        return 1.0;
    }
    let stat: f64 = bins
        .iter()
        .map(|&(ca, cb)| {
            let col = ca + cb;
            let ea = col * na / total;
            let eb = col * nb / total;
            (ca - ea).powi(2) / ea + (cb - eb).powi(2) / eb
        })
        .sum();
    1.0 - ChiSquared::new((bins.len() - 1) as f64)
        .expect("positive dof")
        .cdf(stat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::Region;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::{BTreeSet, HashMap};

    fn tab(n: usize, rows: &[&str]) -> StabilizerTableau {
        StabilizerTableau::from_rows(n, rows.iter().map(|r| r.parse().unwrap()).collect()).unwrap()
    }

    /// Random mixed state with a random number of rows.
    fn random_tableau(seed: u64, n: usize) -> StabilizerTableau {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.random_range(0..=n);
        let mut t = sample_random_stabilizer_state(n, k, &mut rng).unwrap();
        // Local scrambling keeps rows short, which exercises the gauge
        // better than fully random states.
        if rng.random_bool(0.5) {
            t = StabilizerTableau::from_product_state(n);
            for _ in 0..rng.random_range(1..4) {
                let q = rng.random_range(0..n);
                let w = rng.random_range(1..=(n - q).min(4));
                let support: Vec<usize> = (q..q + w).collect();
                t.apply_clifford(&sample_random_clifford(w, &mut rng), &support).unwrap();
            }
            for q in 0..n {
                if rng.random_bool(0.2) {
                    t.depolarize_qubit(q).unwrap();
                }
            }
        }
        t
    }

    #[test]
    fn product_state_has_unit_lengths() {
        let ct = clip(&StabilizerTableau::from_product_state(6));
        assert_eq!(ct.lengths(), vec![1; 6]);
        assert!(validate_clipped(&ct).is_empty());
        for cut in 1..6 {
            assert_eq!(mi_endpoints(&ct, cut).unwrap(), 0);
        }
        assert_eq!(cmi_endpoints(&ct, 2, 4).unwrap(), 0);
    }

    #[test]
    fn bell_pair() {
        let ct = clip(&tab(2, &["XX", "ZZ"]));
        assert_eq!(ct.left(), [0, 0]);
        assert_eq!(ct.right(), [1, 1]);
        assert_eq!(ct.lengths(), [2, 2]);
        assert!(validate_clipped(&ct).is_empty());
        assert_eq!(mi_endpoints(&ct, 1).unwrap(), 2);
    }

    #[test]
    fn ghz_cmi() {
        let t = tab(3, &["XXX", "ZZI", "IZZ"]);
        let ct = clip(&t);
        assert!(validate_clipped(&ct).is_empty());
        let rank = t
            .cmi(&Region::from([0]), &Region::from([1]), &Region::from([2]))
            .unwrap();
        assert_eq!(cmi_endpoints(&ct, 1, 2).unwrap(), 1);
        assert_eq!(rank, 1);
    }

    #[test]
    fn unclipped_tableau_is_flagged() {
        let ct = ClippedTableau::from_current_gauge(tab(2, &["ZI", "ZZ"]));
        let v = validate_clipped(&ct);
        assert!(v.contains(&Violation::SameLetter {
            column: 0,
            side: Side::Left,
            rows: (0, 1)
        }));
        assert!(validate_clipped(&clip(ct.tableau())).is_empty());
        assert!(validate_clipped(&clip(&StabilizerTableau::empty(3))).is_empty());
    }

    #[test]
    fn endpoint_queries_reject_bad_cuts() {
        let ct = clip(&StabilizerTableau::from_product_state(4));
        assert!(mi_endpoints(&ct, 0).is_err());
        assert!(mi_endpoints(&ct, 4).is_err());
        assert!(cmi_endpoints(&ct, 0, 2).is_err());
        assert!(cmi_endpoints(&ct, 2, 2).is_err());
        assert!(cmi_endpoints(&ct, 1, 4).is_err());
    }

    #[test]
    fn clip_agrees_with_rank_measures() {
        for seed in 0..10_000u64 {
            let n = 2 + (seed % 9) as usize;
            let t = random_tableau(seed, n);
            let ct = clip(&t);
            assert!(validate_clipped(&ct).is_empty(), "seed {seed}: {:?}", validate_clipped(&ct));
            assert!(ct.tableau().same_group(&t), "seed {seed}");
            let rl = ct.rho_left();
            assert_eq!(rl.iter().sum::<usize>(), t.k());
            assert_eq!(ct.rho_right().iter().sum::<usize>(), t.k());
            for cut in 1..n {
                let a = Region::range(0..cut);
                let b = Region::range(cut..n);
                assert_eq!(
                    mi_endpoints(&ct, cut).unwrap(),
                    t.mutual_information(&a, &b).unwrap(),
                    "seed {seed} cut {cut}"
                );
            }
            for xl in 1..n {
                for xr in xl + 1..n {
                    let (a, b, c) = (Region::range(0..xl), Region::range(xl..xr), Region::range(xr..n));
                    assert_eq!(
                        cmi_endpoints(&ct, xl, xr).unwrap(),
                        t.cmi(&a, &b, &c).unwrap(),
                        "seed {seed} ({xl},{xr})"
                    );
                }
            }
        }
    }

    #[test]
    fn clip_handles_multiword_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &(n, k) in &[(65, 40), (130, 130), (200, 77)] {
            let t = sample_random_stabilizer_state(n, k, &mut rng).unwrap();
            let ct = clip(&t);
            assert!(validate_clipped(&ct).is_empty());
            assert!(ct.tableau().same_group(&t));
            let cut = n / 2;
            assert_eq!(
                mi_endpoints(&ct, cut).unwrap(),
                t.mutual_information(&Region::range(0..cut), &Region::range(cut..n))
                    .unwrap()
            );
        }
    }

    #[test]
    fn random_states_have_requested_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        assert_eq!(sample_random_stabilizer_state(5, 0, &mut rng).unwrap().k(), 0);
        assert!(sample_random_stabilizer_state(3, 4, &mut rng).is_err());
        for k in 0..=12 {
            let t = sample_random_stabilizer_state(12, k, &mut rng).unwrap();
            t.check_invariants().unwrap();
            assert_eq!(t.k(), k);
        }
    }

    /// Canonical form of a 2-qubit stabilizer group: its sorted
    /// non-identity elements.
    fn group_key(t: &StabilizerTableau) -> Vec<String> {
        let r = t.rows();
        let mut prod = r[0].clone();
        prod.mul_assign(&r[1]);
        let mut v = vec![r[0].to_string(), r[1].to_string(), prod.to_string()];
        v.sort();
        v
    }

    #[test]
    fn two_qubit_pure_states_are_uniform() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};

        // Oracle: enumerate every commuting independent pair.
        let all: Vec<PauliString> = (1..16u32)
            .map(|b| {
                let mut p = PauliString::identity(2);
                for q in 0..2 {
                    p.set_x(q, b >> (2 * q) & 1 == 1);
                    p.set_z(q, b >> (2 * q + 1) & 1 == 1);
                }
                p
            })
            .collect();
        let mut groups = BTreeSet::new();
        for a in &all {
            for b in &all {
                if a != b && !a.anticommutes(b) {
                    let t = StabilizerTableau::from_rows(2, vec![a.clone(), b.clone()]);
                    if let Ok(t) = t {
                        groups.insert(group_key(&t));
                    }
                }
            }
        }
        // 60 signed states, 4 sign choices each
        assert_eq!(groups.len(), 15);

        let draws = 7_500;
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let mut counts: HashMap<Vec<String>, usize> = HashMap::new();
        for _ in 0..draws {
            let t = sample_random_stabilizer_state(2, 2, &mut rng).unwrap();
            *counts.entry(group_key(&t)).or_default() += 1;
        }
        assert_eq!(counts.len(), 15);
        assert!(counts.keys().all(|k| groups.contains(k)));
        let e = draws as f64 / 15.0;
        let stat: f64 = counts.values().map(|&c| (c as f64 - e).powi(2) / e).sum();
        let p = 1.0 - ChiSquared::new(14.0).unwrap().cdf(stat);
        assert!(p > 0.01, "p = {p}");
    }

    /// Every element of the group, sorted: a canonical key for any k.
    fn full_group_key(t: &StabilizerTableau) -> Vec<String> {
        let r = t.rows();
        let mut v: Vec<String> = (1u32..1 << r.len())
            .map(|mask| {
                let mut g = PauliString::identity(t.n());
                for (i, row) in r.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        g.mul_assign(row);
                    }
                }
                g.to_string()
            })
            .collect();
        v.sort();
        v
    }

    /// Isotropic k-dim subspaces of the 2n-dim symplectic space number
    /// prod_{i<k} (4^{n-i} - 1) / (2^{i+1} - 1): 315 for (3, 2), 135 for (3, 3).
    #[test]
    fn three_qubit_states_are_uniform() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};

        for (k, groups) in [(2usize, 315usize), (3, 135)] {
            let draws = groups * 60;
            let mut rng = ChaCha8Rng::seed_from_u64(10 + k as u64);
            let mut counts: HashMap<Vec<String>, usize> = HashMap::new();
            for _ in 0..draws {
                let t = sample_random_stabilizer_state(3, k, &mut rng).unwrap();
                *counts.entry(full_group_key(&t)).or_default() += 1;
            }
            assert_eq!(counts.len(), groups);
            let e = draws as f64 / groups as f64;
            let stat: f64 = counts.values().map(|&c| (c as f64 - e).powi(2) / e).sum();
            let p = 1.0 - ChiSquared::new((groups - 1) as f64).unwrap().cdf(stat);
            assert!(p > 0.001, "k = {k}: p = {p}");
        }
    }

    #[test]
    fn len_ideal_rounding() {
        assert_eq!(len_ideal(100, 70), 66);
        assert_eq!(len_ideal(128, 128), 65);
        // 10 - 1.5 + 1 = 9.5 rounds up to 10
        assert_eq!(len_ideal(10, 3), 10);
        assert_eq!(len_ideal(10, 0), 11);
    }

    #[test]
    fn random_state_lengths_near_ideal() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..5 {
            let t = sample_random_stabilizer_state(100, 70, &mut rng).unwrap();
            for len in clip(&t).lengths() {
                assert!((len as i64 - 66).abs() <= 10, "len {len}");
            }
        }
    }

    #[test]
    fn pure_random_states_are_maximally_scrambled() {
        let n = 64;
        let mut total = 0;
        let reps = 40;
        for i in 0..reps {
            let mut rng = rng::stream(12, i);
            let ct = clip(&sample_random_stabilizer_state(n, n, &mut rng).unwrap());
            // S(A) = I(A:B) / 2 for a pure state
            total += mi_endpoints(&ct, n / 2).unwrap() / 2;
        }
        let mean = total as f64 / reps as f64;
        assert!((mean - 32.0).abs() < 2.0, "mean half-cut entropy {mean}");
    }

    #[test]
    fn empty_state_stats_are_empty() {
        let s = length_deviation_stats(3, 10, 0, 1).unwrap();
        assert_eq!(s.rows(), 0);
        assert!(s.deviations.is_empty());
        assert_eq!(s.mean_abs_delta(), 0.0);
        assert!(length_deviation_stats(0, 10, 5, 1).is_err());
        assert!(length_deviation_stats(1, 10, 11, 1).is_err());
    }

    #[test]
    fn stats_csv_layout() {
        let s = length_deviation_stats(4, 16, 16, 3).unwrap();
        let csv = s.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("# n=16"));
        assert_eq!(lines.next(), Some("# k=16"));
        assert_eq!(lines.next(), Some("# samples=4"));
        assert_eq!(lines.next(), Some("# seed=3"));
        assert_eq!(lines.next(), Some("delta,count"));
        let total: u64 = lines.map(|l| l.split(',').nth(1).unwrap().parse::<u64>().unwrap()).sum();
        assert_eq!(total, 64);
        assert_eq!(s, length_deviation_stats(4, 16, 16, 3).unwrap());
    }

    #[test]
    fn chi_square_detects_shift() {
        let a = length_deviation_stats(200, 32, 32, 1).unwrap();
        let b = length_deviation_stats(200, 32, 32, 2).unwrap();
        assert!(two_sample_chi_square(&a, &b) > 1e-3);
        let mut shifted = b.clone();
        shifted.deviations = b.deviations.iter().map(|(d, c)| (d + 3, *c)).collect();
        assert!(two_sample_chi_square(&a, &shifted) < 1e-6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn clip_is_a_gauge_choice(seed in any::<u64>(), n in 1usize..12) {
            let t = random_tableau(seed, n);
            let ct = clip(&t);
            prop_assert!(validate_clipped(&ct).is_empty());
            prop_assert!(ct.tableau().same_group(&t));
            // endpoint densities are gauge invariants
            let again = clip(ct.tableau());
            prop_assert_eq!(again.rho_left(), ct.rho_left());
            prop_assert_eq!(again.rho_right(), ct.rho_right());
        }
    }
}
