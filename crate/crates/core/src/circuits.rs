//! Experiment drivers: the coarse-grained brickwork circuit with heralded
//! depolarization, and the four-block example.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clipped::{clip, cmi_endpoints, ClippedTableau};
use crate::error::{Error, Result};
use crate::region::Region;
use crate::rng::{self, StreamRng};
use crate::symplectic::sample_random_clifford;
use crate::tableau::StabilizerTableau;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitConfig {
    /// Number of blocks N (even).
    pub n_blocks: usize,
    /// Qubits per block.
    pub m: usize,
    /// Depolarization probability per qubit per timestep.
    pub p: f64,
    pub t_max: usize,
    /// Separations in blocks; each in [1, N/2).
    pub x_values: Vec<usize>,
    pub realizations: usize,
    pub seed: u64,
}

impl CircuitConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_blocks < 2 || !self.n_blocks.is_multiple_of(2) {
            return bad(format!("n_blocks must be even and >= 2, got {}", self.n_blocks));
        }
        if self.m == 0 {
            return bad("m must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.p) {
            return bad(format!("p must lie in [0, 1], got {}", self.p));
        }
        if self.realizations == 0 {
            return bad("realizations must be >= 1".into());
        }
        if let Some(&x) = self.x_values.iter().find(|&&x| x == 0 || x >= self.n_blocks / 2) {
            return bad(format!("x = {x} outside [1, {})", self.n_blocks / 2));
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.n_blocks * self.m
    }

    /// Every admissible separation, 1..N/2.
    pub fn full_x_grid(n_blocks: usize) -> Vec<usize> {
        (1..n_blocks / 2).collect()
    }
}

/// Qubit cuts `(x_left, x_right)` for separation `x`: A is the first
/// N/2 - x blocks, B the 2x middle blocks, C the rest.
pub fn partition_cuts(n_blocks: usize, m: usize, x: usize) -> (usize, usize) {
    ((n_blocks / 2 - x) * m, (n_blocks / 2 + x) * m)
}

/// Spacetime record of heralded depolarization events, one row of
/// `n_qubits` bits per timestep.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ErrorConfiguration {
    n_qubits: usize,
    rows: Vec<Vec<bool>>,
}

impl ErrorConfiguration {
    pub fn new(n_qubits: usize) -> Self {
        ErrorConfiguration {
            n_qubits,
            rows: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn timesteps(&self) -> usize {
        self.rows.len()
    }

    pub fn push(&mut self, mask: Vec<bool>) {
        assert_eq!(mask.len(), self.n_qubits);
        self.rows.push(mask);
    }

    pub fn row(&self, t: usize) -> &[bool] {
        &self.rows[t]
    }

    pub fn get(&self, t: usize, q: usize) -> bool {
        self.rows[t][q]
    }

    /// |r|: number of depolarization events.
    pub fn weight(&self) -> usize {
        self.rows.iter().flatten().filter(|&&b| b).count()
    }

    /// `n=<n> t=<t>` header, then alternating run lengths over the
    /// row-major bit string, starting with a (possibly empty) run of zeros.
    pub fn to_rle(&self) -> String {
        let mut runs = Vec::new();
        let mut current = false;
        let mut len = 0usize;
        for &b in self.rows.iter().flatten() {
            if b == current {
                len += 1;
            } else {
                runs.push(len);
                current = b;
                len = 1;
            }
        }
        runs.push(len);
        let body: Vec<String> = runs.iter().map(usize::to_string).collect();
        format!("n={} t={}\n{}\n", self.n_qubits, self.rows.len(), body.join(" "))
    }
}

impl fmt::Debug for ErrorConfiguration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_rle())
    }
}

impl FromStr for ErrorConfiguration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let perr = |m: &str| Error::Parse(format!("error configuration: {m}"));
        let mut lines = s.lines();
        let header = lines.next().ok_or_else(|| perr("missing header"))?;
        let mut n = None;
        let mut t = None;
        for field in header.split_whitespace() {
            match field.split_once('=') {
                Some(("n", v)) => n = v.parse::<usize>().ok(),
                Some(("t", v)) => t = v.parse::<usize>().ok(),
                _ => return Err(perr("bad header")),
            }
        }
        let (n, t) = n.zip(t).ok_or_else(|| perr("header needs n= and t="))?;
        let mut bits = Vec::with_capacity(n * t);
        let mut value = false;
        for tok in lines.flat_map(str::split_whitespace) {
            let len: usize = tok.parse().map_err(|_| perr("bad run length"))?;
            bits.extend(std::iter::repeat_n(value, len));
            value = !value;
        }
        if bits.len() != n * t {
            return Err(perr("run lengths do not match dimensions"));
        }
        let rows = if n == 0 {
            vec![Vec::new(); t]
        } else {
            bits.chunks(n).map(<[bool]>::to_vec).collect()
        };
        Ok(ErrorConfiguration { n_qubits: n, rows })
    }
}

/// Depolarizes each qubit independently with probability `p`, in ascending
/// order. Returns the event mask.
pub fn heralded_layer<R: Rng + ?Sized>(
    tab: &mut StabilizerTableau,
    p: f64,
    rng: &mut R,
) -> Result<Vec<bool>> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidConfig(format!("p must lie in [0, 1], got {p}")));
    }
    let mask: Vec<bool> = (0..tab.n()).map(|_| rng.random_bool(p)).collect();
    apply_mask(tab, &mask)?;
    Ok(mask)
}

fn apply_mask(tab: &mut StabilizerTableau, mask: &[bool]) -> Result<()> {
    for (q, _) in mask.iter().enumerate().filter(|(_, &b)| b) {
        tab.depolarize_qubit(q)?;
    }
    Ok(())
}

enum Noise {
    Sampled(Box<StreamRng>),
    Replay(ErrorConfiguration),
}

/// Step-by-step evolution of the coarse-grained circuit from the product
/// state. The state is kept in clipped gauge between steps.
pub struct Evolution {
    n_blocks: usize,
    m: usize,
    p: f64,
    t: usize,
    state: ClippedTableau,
    gates: StreamRng,
    noise: Noise,
    errors: ErrorConfiguration,
}

impl Evolution {
    /// Realization `index` of the root `seed`.
    pub fn new(n_blocks: usize, m: usize, p: f64, seed: u64, index: u64) -> Result<Self> {
        let (gates, noise) = rng::realization_streams(seed, index);
        Self::build(n_blocks, m, p, gates, Noise::Sampled(Box::new(noise)))
    }

    /// Same gates as [`Evolution::new`], but the depolarization events are
    /// read from `errors` instead of sampled.
    pub fn replay(
        n_blocks: usize,
        m: usize,
        p: f64,
        seed: u64,
        index: u64,
        errors: ErrorConfiguration,
    ) -> Result<Self> {
        if errors.n_qubits() != n_blocks * m {
            return Err(Error::LengthMismatch {
                left: errors.n_qubits(),
                right: n_blocks * m,
            });
        }
        let (gates, _) = rng::realization_streams(seed, index);
        Self::build(n_blocks, m, p, gates, Noise::Replay(errors))
    }

    fn build(n_blocks: usize, m: usize, p: f64, gates: StreamRng, noise: Noise) -> Result<Self> {
        CircuitConfig {
            n_blocks,
            m,
            p,
            t_max: 0,
            x_values: vec![],
            realizations: 1,
            seed: 0,
        }
        .validate()?;
        let n = n_blocks * m;
        Ok(Evolution {
            n_blocks,
            m,
            p,
            t: 0,
            state: clip(&StabilizerTableau::from_product_state(n)),
            gates,
            noise,
            errors: ErrorConfiguration::new(n),
        })
    }

    /// Layers applied so far; the last one ran at timestep `t() - 1`.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn state(&self) -> &ClippedTableau {
        &self.state
    }

    pub fn errors(&self) -> &ErrorConfiguration {
        &self.errors
    }

    pub fn into_errors(self) -> ErrorConfiguration {
        self.errors
    }

    /// One brickwork layer (block pairs (2i, 2i+1) on even steps, (2i+1,
    /// 2i+2) on odd steps, open boundaries), then heralded depolarization.
    pub fn step(&mut self) -> Result<()> {
        let mut tab = std::mem::replace(&mut self.state, clip(&StabilizerTableau::empty(0))).into_tableau();
        let k_before = tab.k();
        let m = self.m;
        let first = self.t % 2;
        let mut b = first;
        while b + 1 < self.n_blocks {
            let support: Vec<usize> = (b * m..(b + 2) * m).collect();
            let u = sample_random_clifford(2 * m, &mut self.gates);
            tab.apply_clifford(&u, &support)?;
            b += 2;
        }
        let mask = match &mut self.noise {
            Noise::Sampled(rng) => heralded_layer(&mut tab, self.p, &mut **rng)?,
            Noise::Replay(errs) => {
                if self.t >= errs.timesteps() {
                    return Err(Error::InvalidConfig(format!(
                        "replay configuration has only {} timesteps",
                        errs.timesteps()
                    )));
                }
                let mask = errs.row(self.t).to_vec();
                apply_mask(&mut tab, &mask)?;
                mask
            }
        };
        if tab.k() > k_before {
            return Err(Error::Invariant(format!(
                "generator count grew from {k_before} to {}",
                tab.k()
            )));
        }
        self.errors.push(mask);
        self.state = clip(&tab);
        self.t += 1;
        Ok(())
    }

    /// I(A:C|B) in bits at separation `x` blocks.
    pub fn cmi(&self, x: usize) -> Result<usize> {
        let (l, r) = partition_cuts(self.n_blocks, self.m, x);
        cmi_endpoints(&self.state, l, r)
    }
}

/// One realization: raw CMI bits per recorded (t, x), generator count per
/// timestep, and the error configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct RealizationRecord {
    /// `cmi[t][i]` is the CMI at `x_values[i]` after the layer applied at
    /// timestep `t` (timesteps count from 0).
    pub cmi: Vec<Vec<usize>>,
    /// `k[t]` is the generator count after timestep `t`.
    pub k: Vec<usize>,
    pub errors: ErrorConfiguration,
}

impl RealizationRecord {
    /// First timestep at which the state is maximally mixed.
    pub fn critical_time(&self) -> Option<usize> {
        self.k.iter().position(|&k| k == 0)
    }
}

fn record(cfg: &CircuitConfig, mut evo: Evolution) -> Result<RealizationRecord> {
    let mut cmi = Vec::with_capacity(cfg.t_max);
    let mut k = Vec::with_capacity(cfg.t_max);
    let check_rank = cfg!(debug_assertions) && cfg.n_qubits() <= 64;
    for _ in 0..cfg.t_max {
        evo.step()?;
        let row = cfg
            .x_values
            .iter()
            .map(|&x| evo.cmi(x))
            .collect::<Result<Vec<_>>>()?;
        if check_rank {
            for (&x, &v) in cfg.x_values.iter().zip(&row) {
                let (l, r) = partition_cuts(cfg.n_blocks, cfg.m, x);
                let n = cfg.n_qubits();
                let rank = evo.state().tableau().cmi(
                    &Region::range(0..l),
                    &Region::range(l..r),
                    &Region::range(r..n),
                )?;
                if rank != v {
                    return Err(Error::Invariant(format!(
                        "endpoint CMI {v} != rank CMI {rank} at t={} x={x}",
                        evo.t()
                    )));
                }
            }
        }
        cmi.push(row);
        k.push(evo.state().k());
    }
    Ok(RealizationRecord {
        cmi,
        k,
        errors: evo.into_errors(),
    })
}

/// Realization `index` of `cfg`, with its own gate and noise streams.
pub fn run_coarse_grained(cfg: &CircuitConfig, index: u64) -> Result<RealizationRecord> {
    cfg.validate()?;
    record(cfg, Evolution::new(cfg.n_blocks, cfg.m, cfg.p, cfg.seed, index)?)
}

/// Re-runs realization `index` with the given error configuration.
pub fn replay_coarse_grained(
    cfg: &CircuitConfig,
    index: u64,
    errors: ErrorConfiguration,
) -> Result<RealizationRecord> {
    cfg.validate()?;
    record(
        cfg,
        Evolution::replay(cfg.n_blocks, cfg.m, cfg.p, cfg.seed, index, errors)?,
    )
}

/// All realizations of `cfg`, in index order regardless of scheduling.
pub fn run_ensemble(cfg: &CircuitConfig) -> Result<Vec<RealizationRecord>> {
    cfg.validate()?;
    (0..cfg.realizations as u64)
        .into_par_iter()
        .map(|i| run_coarse_grained(cfg, i))
        .collect()
}

/// Realization-averaged I^norm = I(A:C|B)/m on the (t, x) grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpreadingField {
    pub n_blocks: usize,
    pub m: usize,
    pub p: f64,
    pub realizations: usize,
    pub x_values: Vec<usize>,
    /// `mean[t][i]`
    pub mean: Vec<Vec<f64>>,
    pub stderr: Vec<Vec<f64>>,
}

impl SpreadingField {
    pub fn from_records(cfg: &CircuitConfig, records: &[RealizationRecord]) -> Self {
        let r = records.len();
        let m = cfg.m as f64;
        let nx = cfg.x_values.len();
        let mut mean = vec![vec![0.0; nx]; cfg.t_max];
        let mut stderr = vec![vec![0.0; nx]; cfg.t_max];
        for t in 0..cfg.t_max {
            for i in 0..nx {
                let vals: Vec<f64> = records.iter().map(|rec| rec.cmi[t][i] as f64 / m).collect();
                let (mu, se) = mean_stderr(&vals);
                mean[t][i] = mu;
                stderr[t][i] = se;
            }
        }
        SpreadingField {
            n_blocks: cfg.n_blocks,
            m: cfg.m,
            p: cfg.p,
            realizations: r,
            x_values: cfg.x_values.clone(),
            mean,
            stderr,
        }
    }

    pub fn t_max(&self) -> usize {
        self.mean.len()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,x,p,m,n_blocks,realizations,mean_cmi_norm,stderr\n");
        for t in 0..self.t_max() {
            for (i, x) in self.x_values.iter().enumerate() {
                let _ = writeln!(
                    s,
                    "{t},{x},{},{},{},{},{},{}",
                    self.p,
                    self.m,
                    self.n_blocks,
                    self.realizations,
                    self.mean[t][i],
                    self.stderr[t][i]
                );
            }
        }
        s
    }
}

/// Sample mean and standard error of the mean (zero for one sample).
pub fn mean_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let mu = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mu, 0.0);
    }
    let var = v.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1.0);
    (mu, (var / n).sqrt())
}

pub fn average_realizations(cfg: &CircuitConfig) -> Result<SpreadingField> {
    let records = run_ensemble(cfg)?;
    Ok(SpreadingField::from_records(cfg, &records))
}

/// Correlation measures from one run of the four-block circuit, in bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FourBlockRecord {
    pub mi_ab: usize,
    pub mi_bc: usize,
    pub mi_a_bc: usize,
    pub cmi: usize,
}

/// Blocks A = [0, m), B = [m, 3m), C = [3m, 4m). Scrambles A with the first
/// half of B and C with the second half, scrambles B, then depolarizes the
/// last floor(2mp) qubits of B.
pub fn four_block_experiment<R: Rng + ?Sized>(m: usize, p: f64, rng: &mut R) -> Result<FourBlockRecord> {
    if m == 0 {
        return Err(Error::InvalidConfig("m must be >= 1".into()));
    }
    if !(0.0..0.5).contains(&p) {
        return Err(Error::Domain(format!("p must lie in [0, 1/2), got {p}")));
    }
    let n = 4 * m;
    let mut tab = StabilizerTableau::from_product_state(n);
    let u1 = sample_random_clifford(2 * m, rng);
    let u2 = sample_random_clifford(2 * m, rng);
    let u3 = sample_random_clifford(2 * m, rng);
    tab.apply_clifford(&u1, &(0..2 * m).collect::<Vec<_>>())?;
    tab.apply_clifford(&u2, &(2 * m..4 * m).collect::<Vec<_>>())?;
    tab.apply_clifford(&u3, &(m..3 * m).collect::<Vec<_>>())?;
    let depolarized = (2.0 * m as f64 * p).floor() as usize;
    for q in 3 * m - depolarized..3 * m {
        tab.depolarize_qubit(q)?;
    }
    let a = Region::range(0..m);
    let b = Region::range(m..3 * m);
    let c = Region::range(3 * m..n);
    Ok(FourBlockRecord {
        mi_ab: tab.mutual_information(&a, &b)?,
        mi_bc: tab.mutual_information(&b, &c)?,
        mi_a_bc: tab.mutual_information(&a, &b.union(&c))?,
        cmi: tab.cmi(&a, &b, &c)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cfg(n_blocks: usize, m: usize, p: f64, t_max: usize, realizations: usize) -> CircuitConfig {
        CircuitConfig {
            n_blocks,
            m,
            p,
            t_max,
            x_values: CircuitConfig::full_x_grid(n_blocks),
            realizations,
            seed: 42,
        }
    }

    #[test]
    fn config_validation() {
        assert!(cfg(8, 2, 0.1, 4, 1).validate().is_ok());
        assert!(cfg(7, 2, 0.1, 4, 1).validate().is_err());
        assert!(cfg(8, 0, 0.1, 4, 1).validate().is_err());
        assert!(cfg(8, 2, 1.5, 4, 1).validate().is_err());
        assert!(cfg(8, 2, 0.1, 4, 0).validate().is_err());
        let mut c = cfg(8, 2, 0.1, 4, 1);
        c.x_values = vec![4];
        assert!(c.validate().is_err());
        c.x_values = vec![0];
        assert!(c.validate().is_err());
    }

    #[test]
    fn heralded_layer_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut t = StabilizerTableau::from_product_state(12);
        let mask = heralded_layer(&mut t, 0.0, &mut rng).unwrap();
        assert!(mask.iter().all(|&b| !b));
        assert_eq!(t, StabilizerTableau::from_product_state(12));
        let mask = heralded_layer(&mut t, 1.0, &mut rng).unwrap();
        assert!(mask.iter().all(|&b| b));
        assert_eq!(t.k(), 0);
        assert!(heralded_layer(&mut t, -0.1, &mut rng).is_err());
    }

    #[test]
    fn heralded_layer_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut t = StabilizerTableau::empty(10_000);
        let w = heralded_layer(&mut t, 0.5, &mut rng).unwrap().iter().filter(|&&b| b).count();
        // 5 sigma = 250
        assert!((w as i64 - 5000).abs() < 250, "{w}");
    }

    #[test]
    fn depolarization_order_is_irrelevant() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..50 {
            let mut t = crate::clipped::sample_random_stabilizer_state(10, 10, &mut rng).unwrap();
            t.depolarize_qubit(9).unwrap();
            let qs = [0usize, 3, 4, 7];
            let mut fwd = t.clone();
            let mut rev = t.clone();
            for &q in &qs {
                fwd.depolarize_qubit(q).unwrap();
            }
            for &q in qs.iter().rev() {
                rev.depolarize_qubit(q).unwrap();
            }
            assert!(fwd.same_group(&rev));
        }
    }

    #[test]
    fn noiseless_lightcone_every_realization() {
        for m in [1, 2, 3] {
            let c = cfg(16, m, 0.0, 9, 6);
            for rec in run_ensemble(&c).unwrap() {
                for t in 0..c.t_max {
                    for (i, &x) in c.x_values.iter().enumerate() {
                        if x > t {
                            assert_eq!(rec.cmi[t][i], 0, "m={m} t={t} x={x}");
                        }
                    }
                }
                assert_eq!(rec.errors.weight(), 0);
                assert!(rec.k.iter().all(|&k| k == 16 * m));
            }
        }
    }

    #[test]
    fn noiseless_cmi_turns_on_inside_lightcone() {
        // Finite m spreads slower than the lightcone, but the first
        // nonzero value appears right behind it, and profiles decrease in x.
        let c = cfg(16, 4, 0.0, 8, 1);
        let rec = run_coarse_grained(&c, 0).unwrap();
        assert!(rec.cmi[2][0] > 0);
        for t in 1..8 {
            assert_eq!(rec.cmi[t][t - 1], 0, "t={t}");
            assert!(rec.cmi[t].windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn generator_count_never_grows() {
        let c = cfg(8, 3, 0.1, 20, 4);
        for rec in run_ensemble(&c).unwrap() {
            assert!(rec.k.windows(2).all(|w| w[1] <= w[0]));
            // Full-system entropy equals the number of removed rows.
            assert!(rec.k.iter().all(|&k| k <= 24));
        }
    }

    #[test]
    fn realizations_are_deterministic_and_replayable() {
        let c = cfg(8, 2, 0.1, 10, 3);
        let a = run_ensemble(&c).unwrap();
        let b = run_ensemble(&c).unwrap();
        assert_eq!(a, b);
        let rec = &a[1];
        let replayed = replay_coarse_grained(&c, 1, rec.errors.clone()).unwrap();
        assert_eq!(&replayed, rec);
        let parsed: ErrorConfiguration = rec.errors.to_rle().parse().unwrap();
        assert_eq!(parsed, rec.errors);
        assert_eq!(parsed.timesteps(), 10);
        assert_eq!(parsed.n_qubits(), 16);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let c = cfg(8, 2, 0.05, 8, 5);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = one.install(|| average_realizations(&c).unwrap());
        let b = three.install(|| average_realizations(&c).unwrap());
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn rle_edge_cases() {
        let mut e = ErrorConfiguration::new(3);
        e.push(vec![true, true, false]);
        e.push(vec![false, false, true]);
        assert_eq!(e.to_rle(), "n=3 t=2\n0 2 3 1\n");
        assert_eq!(e.weight(), 3);
        assert_eq!(e.to_rle().parse::<ErrorConfiguration>().unwrap(), e);
        let empty = ErrorConfiguration::new(4);
        assert_eq!(empty.to_rle().parse::<ErrorConfiguration>().unwrap(), empty);
        assert!("n=3 t=1\n0 2\n".parse::<ErrorConfiguration>().is_err());
        assert!("n=3\n3\n".parse::<ErrorConfiguration>().is_err());
    }

    #[test]
    fn single_realization_field_is_the_realization() {
        let c = cfg(8, 2, 0.1, 5, 1);
        let rec = run_coarse_grained(&c, 0).unwrap();
        let f = average_realizations(&c).unwrap();
        for t in 0..5 {
            for i in 0..c.x_values.len() {
                assert_eq!(f.mean[t][i], rec.cmi[t][i] as f64 / 2.0);
                assert_eq!(f.stderr[t][i], 0.0);
            }
        }
        let csv = f.to_csv();
        assert!(csv.starts_with("t,x,p,m,n_blocks,realizations,mean_cmi_norm,stderr\n"));
        assert_eq!(csv.lines().count(), 1 + 5 * 3);
    }

    #[test]
    fn full_depolarization_kills_everything() {
        let c = cfg(6, 2, 1.0, 3, 2);
        for rec in run_ensemble(&c).unwrap() {
            assert_eq!(rec.critical_time(), Some(0));
            assert!(rec.cmi.iter().flatten().all(|&v| v == 0));
        }
    }

    #[test]
    fn four_block_noiseless_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for m in [1, 2, 8] {
            let r = four_block_experiment(m, 0.0, &mut rng).unwrap();
            assert_eq!(r.cmi, 0);
        }
        assert!(four_block_experiment(4, 0.5, &mut rng).is_err());
        assert!(four_block_experiment(4, -0.1, &mut rng).is_err());
    }

    #[test]
    fn four_block_identities() {
        // I(A:BC) = I(A:B) + I(A:C|B) is the chain rule.
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let r = four_block_experiment(6, 0.25, &mut rng).unwrap();
            assert_eq!(r.mi_a_bc, r.mi_ab + r.cmi);
        }
    }
}
