//! Frequency-bin mode transforms, gate metrics and simulated readout.
//!
//! Phase convention for a sinusoidal phase modulator of depth `Θ` and drive
//! phase `φ`: bin `n` couples to bin `m` with amplitude
//! `J_{m−n}(Θ) · exp(i (m−n) (φ + π/2))`.

use std::collections::{BTreeMap, HashSet};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::bessel::bessel_j_upto;
use crate::{Error, HermitianOperator, Result};

/// Sidebands kept on each side of the computational pair by default.
pub const DEFAULT_SIDEBANDS: i64 = 32;
/// Minimum guard bins between a pair and the window edge.
pub const MIN_GUARD: i64 = 2;

/// Inclusive range of simulated frequency bins.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeWindow {
    pub n_lo: i64,
    pub n_hi: i64,
    /// Bin spacing; informational only.
    pub spacing: f64,
}

impl ModeWindow {
    pub fn new(n_lo: i64, n_hi: i64) -> Result<Self> {
        if n_lo > n_hi {
            return Err(Error::InvalidArgument(format!("empty window [{n_lo}, {n_hi}]")));
        }
        Ok(ModeWindow { n_lo, n_hi, spacing: 1.0 })
    }

    /// Window spanning `pair` plus `sidebands` bins on each side.
    pub fn around(pair: (i64, i64), sidebands: i64) -> Self {
        let (a, b) = (pair.0.min(pair.1), pair.0.max(pair.1));
        ModeWindow { n_lo: a - sidebands, n_hi: b + sidebands, spacing: 1.0 }
    }

    pub fn len(&self) -> usize {
        (self.n_hi - self.n_lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.n_hi < self.n_lo
    }

    pub fn contains(&self, bin: i64) -> bool {
        bin >= self.n_lo && bin <= self.n_hi
    }

    pub fn index(&self, bin: i64) -> Option<usize> {
        self.contains(bin).then(|| (bin - self.n_lo) as usize)
    }

    pub fn bins(&self) -> impl Iterator<Item = i64> {
        self.n_lo..=self.n_hi
    }
}

/// Sinusoidal electro-optic phase modulation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EomDrive {
    pub depth: f64,
    pub phase: f64,
    /// Drive frequency in units of the bin spacing.
    pub harmonic: i64,
}

impl EomDrive {
    pub fn new(depth: f64, phase: f64) -> Self {
        EomDrive { depth, phase, harmonic: 1 }
    }
}

/// Per-bin complex coefficients of a pulse shaper; unspecified bins pass
/// unchanged.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ShaperMask {
    pub coefficients: BTreeMap<i64, Complex64>,
}

impl ShaperMask {
    pub fn identity() -> Self {
        Self::default()
    }

    /// π phase on every bin `≥ at` within `window`.
    pub fn pi_step(at: i64, window: &ModeWindow) -> Self {
        let coefficients = window.bins().filter(|&n| n >= at).map(|n| (n, Complex64::new(-1.0, 0.0))).collect();
        ShaperMask { coefficients }
    }

    pub fn set(&mut self, bin: i64, c: Complex64) -> &mut Self {
        self.coefficients.insert(bin, c);
        self
    }

    pub fn block(&mut self, bin: i64) -> &mut Self {
        self.set(bin, Complex64::new(0.0, 0.0))
    }

    pub fn coefficient(&self, bin: i64) -> Complex64 {
        self.coefficients.get(&bin).copied().unwrap_or(Complex64::new(1.0, 0.0))
    }
}

/// Linear map on the amplitudes of the bins of a window.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeTransform {
    pub window: ModeWindow,
    pub matrix: DMatrix<Complex64>,
}

impl ModeTransform {
    pub fn identity(window: ModeWindow) -> Self {
        let n = window.len();
        ModeTransform { window, matrix: DMatrix::identity(n, n) }
    }

    /// Element coupling input bin `from` to output bin `to`.
    pub fn element(&self, to: i64, from: i64) -> Complex64 {
        match (self.window.index(to), self.window.index(from)) {
            (Some(i), Some(j)) => self.matrix[(i, j)],
            _ => Complex64::new(0.0, 0.0),
        }
    }

    /// 2×2 block `[[W_kk, W_kl], [W_lk, W_ll]]`.
    pub fn block(&self, k: i64, l: i64) -> [[Complex64; 2]; 2] {
        [[self.element(k, k), self.element(k, l)], [self.element(l, k), self.element(l, l)]]
    }

    pub fn adjoint(&self) -> Self {
        ModeTransform { window: self.window, matrix: self.matrix.adjoint() }
    }

    pub fn column_norms(&self) -> Vec<f64> {
        self.matrix.column_iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect()
    }

    pub fn apply(&self, amplitudes: &[Complex64]) -> Result<Vec<Complex64>> {
        if amplitudes.len() != self.window.len() {
            return Err(Error::Dimension { expected: self.window.len(), found: amplitudes.len() });
        }
        Ok((0..self.window.len())
            .map(|i| (0..self.window.len()).map(|j| self.matrix[(i, j)] * amplitudes[j]).sum())
            .collect())
    }
}

/// Phase-modulator transform restricted to `window`.
pub fn eom_transform(drive: EomDrive, window: ModeWindow) -> ModeTransform {
    let n = window.len();
    let h = drive.harmonic.max(1);
    let js = bessel_j_upto(n, drive.depth);
    let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for i in 0..n {
        for j in 0..n {
            let diff = i as i64 - j as i64;
            if diff % h != 0 {
                continue;
            }
            let k = diff / h;
            let mag = if k < 0 && k % 2 != 0 { -js[(-k) as usize] } else { js[k.unsigned_abs() as usize] };
            m[(i, j)] = Complex64::from_polar(1.0, k as f64 * (drive.phase + std::f64::consts::FRAC_PI_2)) * mag;
        }
    }
    ModeTransform { window, matrix: m }
}

/// Diagonal pulse-shaper transform.
pub fn shaper_transform(mask: &ShaperMask, window: ModeWindow) -> Result<ModeTransform> {
    let n = window.len();
    let mut m = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for (i, bin) in window.bins().enumerate() {
        let c = mask.coefficient(bin);
        if c.norm() > 1.0 + 1e-12 {
            return Err(Error::InvalidMask { bin, magnitude: c.norm() });
        }
        m[(i, i)] = c;
    }
    Ok(ModeTransform { window, matrix: m })
}

/// Matrix product of `sequence`; the last element acts first.
pub fn compose(sequence: &[ModeTransform]) -> Result<ModeTransform> {
    let first = sequence.first().ok_or_else(|| Error::InvalidArgument("empty transform sequence".into()))?;
    let mut acc = first.clone();
    for t in &sequence[1..] {
        if t.window != acc.window {
            return Err(Error::Dimension { expected: acc.window.len(), found: t.window.len() });
        }
        acc.matrix = &acc.matrix * &t.matrix;
    }
    Ok(acc)
}

/// Figures of merit of a two-mode gate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateMetrics {
    pub fidelity: f64,
    pub success_probability: f64,
    pub reflectivity: f64,
    pub transmissivity: f64,
    pub leakage: f64,
}

/// Balanced beamsplitter in the modulator phase convention.
pub fn ideal_hadamard() -> [[Complex64; 2]; 2] {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [[Complex64::new(s, 0.0), Complex64::new(0.0, s)], [Complex64::new(0.0, -s), Complex64::new(-s, 0.0)]]
}

fn check_pair(window: &ModeWindow, pair: (i64, i64)) -> Result<(i64, i64)> {
    let (k, l) = (pair.0.min(pair.1), pair.0.max(pair.1));
    if k == l {
        return Err(Error::InvalidArgument("gate pair needs two distinct bins".into()));
    }
    let available = (k - window.n_lo).min(window.n_hi - l);
    if available < MIN_GUARD {
        return Err(Error::Truncation { needed: MIN_GUARD, available });
    }
    Ok((k, l))
}

/// Modulator–shaper–modulator frequency beamsplitter on `pair`.
pub fn hadamard_transform(depth: f64, window: ModeWindow, pair: (i64, i64)) -> Result<ModeTransform> {
    let (k, l) = check_pair(&window, pair)?;
    let h = l - k;
    let first = eom_transform(EomDrive { depth, phase: 0.0, harmonic: h }, window);
    let step = shaper_transform(&ShaperMask::pi_step(l, &window), window)?;
    let second = eom_transform(EomDrive { depth, phase: std::f64::consts::PI, harmonic: h }, window);
    compose(&[second, step, first])
}

fn metrics_of_block(w: [[Complex64; 2]; 2]) -> GateMetrics {
    let hid = ideal_hadamard();
    let mut tr_ww = 0.0;
    let mut tr_wh = Complex64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            tr_ww += w[i][j].norm_sqr();
            tr_wh += w[i][j].conj() * hid[i][j];
        }
    }
    let reflectivity = w[1][0].norm_sqr();
    let transmissivity = w[0][0].norm_sqr();
    let fidelity = if tr_ww > 0.0 { tr_wh.norm_sqr() / (2.0 * tr_ww) } else { 0.0 };
    GateMetrics {
        fidelity,
        success_probability: tr_ww / 2.0,
        reflectivity,
        transmissivity,
        leakage: 1.0 - reflectivity - transmissivity,
    }
}

/// Metrics of the frequency beamsplitter at modulation depth `depth`.
pub fn hadamard_metrics(depth: f64, window: ModeWindow, pair: (i64, i64)) -> Result<GateMetrics> {
    let u = hadamard_transform(depth, window, pair)?;
    let (k, l) = (pair.0.min(pair.1), pair.0.max(pair.1));
    Ok(metrics_of_block(u.block(k, l)))
}

/// Single-photon state spread over computational bins, probed with a
/// coherent comb of amplitude `reference_scale`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CombState {
    pub amplitudes: Vec<Complex64>,
    pub reference_scale: Complex64,
}

impl CombState {
    pub fn from_real(amps: &[f64]) -> Self {
        CombState {
            amplitudes: amps.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
            reference_scale: Complex64::new(1.0, 0.0),
        }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Real-symmetric single-particle density matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl DensityMatrix {
    pub fn zeros(dim: usize) -> Self {
        DensityMatrix { dim, data: vec![0.0; dim * dim] }
    }

    /// `Re(a_k* a_l)`.
    pub fn from_state(state: &CombState) -> Self {
        let d = state.dim();
        let mut rho = Self::zeros(d);
        for k in 0..d {
            for l in 0..d {
                rho.data[k * d + l] = (state.amplitudes[k].conj() * state.amplitudes[l]).re;
            }
        }
        rho
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, k: usize, l: usize) -> f64 {
        self.data[k * self.dim + l]
    }

    pub fn set(&mut self, k: usize, l: usize, v: f64) {
        self.data[k * self.dim + l] = v;
        self.data[l * self.dim + k] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    /// `Σ_kl ρ_kl h_kl`.
    pub fn energy(&self, h: &HermitianOperator) -> Result<f64> {
        if h.dim() != self.dim {
            return Err(Error::Dimension { expected: self.dim, found: h.dim() });
        }
        Ok(self.data.iter().zip(h.as_slice()).map(|(a, b)| a * b).sum())
    }
}

/// Rounds of pairwise-disjoint beamsplitter settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementPlan {
    pub rounds: Vec<Vec<(usize, usize)>>,
    pub max_parallel: usize,
}

impl MeasurementPlan {
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rounds.iter().flatten().copied()
    }

    pub fn len(&self) -> usize {
        self.rounds.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// Errors on the first pair of `required` absent from the plan.
    pub fn check_covers(&self, required: &[(usize, usize)]) -> Result<()> {
        let have: HashSet<(usize, usize)> = self.pairs().collect();
        for &(k, l) in required {
            let key = (k.min(l), k.max(l));
            if !have.contains(&key) {
                return Err(Error::IncompleteMeasurement(key.0, key.1));
            }
        }
        Ok(())
    }
}

/// Greedy edge colouring: each round takes, in input order, every remaining
/// pair disjoint from those already chosen, up to `max_parallel`.
pub fn plan_measurements(pairs: &[(usize, usize)], max_parallel: usize) -> MeasurementPlan {
    let max_parallel = max_parallel.max(1);
    let mut seen = HashSet::new();
    let mut remaining: Vec<(usize, usize)> = pairs
        .iter()
        .filter(|(k, l)| k != l)
        .map(|&(k, l)| (k.min(l), k.max(l)))
        .filter(|p| seen.insert(*p))
        .collect();
    let mut rounds = Vec::new();
    while !remaining.is_empty() {
        let mut used = HashSet::new();
        let mut round = Vec::new();
        remaining.retain(|&(k, l)| {
            if round.len() < max_parallel && !used.contains(&k) && !used.contains(&l) {
                used.insert(k);
                used.insert(l);
                round.push((k, l));
                false
            } else {
                true
            }
        });
        rounds.push(round);
    }
    MeasurementPlan { rounds, max_parallel }
}

/// Noise applied to simulated readout.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Half-width of the uniform relative scale error on energies.
    pub systematic_fraction: f64,
    /// Gaussian standard deviation added to each normalized power reading.
    pub statistical_sigma: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        NoiseModel { systematic_fraction: 0.0, statistical_sigma: 0.0, seed: 0 }
    }

    pub fn is_noiseless(&self) -> bool {
        self.systematic_fraction == 0.0 && self.statistical_sigma == 0.0
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.systematic_fraction >= 0.0 && self.statistical_sigma >= 0.0) {
            return Err(Error::InvalidArgument("noise magnitudes must be non-negative".into()));
        }
        Ok(())
    }
}

/// Beamsplitter used for pair readout.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GateModel {
    /// Exact 50/50 splitter.
    Ideal,
    /// Modulator construction at the given depth.
    Physical { depth: f64 },
}

impl GateModel {
    /// 2×2 block acting on a computational pair.
    pub fn block(&self) -> Result<[[Complex64; 2]; 2]> {
        match *self {
            GateModel::Ideal => Ok(ideal_hadamard()),
            GateModel::Physical { depth } => {
                let w = ModeWindow::around((0, 1), DEFAULT_SIDEBANDS);
                Ok(hadamard_transform(depth, w, (0, 1))?.block(0, 1))
            }
        }
    }
}

/// Pair readout with the reference phase set so that an in-phase input
/// maximizes the lower output bin.
#[derive(Clone, Copy, Debug)]
pub struct PairReadout {
    w: [[Complex64; 2]; 2],
    /// Flux difference `D = P_k − P_l = m00 ρ_kk + m11 ρ_ll + 2 m01 ρ_kl`.
    m00: f64,
    m11: f64,
    m01: f64,
}

impl PairReadout {
    pub fn new(gate: &GateModel) -> Result<Self> {
        let mut w = gate.block()?;
        let phase = w[0][0].arg() - w[0][1].arg();
        let rot = Complex64::from_polar(1.0, phase);
        w[0][1] *= rot;
        w[1][1] *= rot;
        let m00 = w[0][0].norm_sqr() - w[1][0].norm_sqr();
        let m11 = w[0][1].norm_sqr() - w[1][1].norm_sqr();
        let m01 = (w[0][0].conj() * w[0][1] - w[1][0].conj() * w[1][1]).re;
        if m01.abs() < 1e-9 {
            return Err(Error::InvalidArgument("gate does not mix the computational pair".into()));
        }
        Ok(PairReadout { w, m00, m11, m01 })
    }

    /// Output powers `(P_k, P_l)`.
    pub fn powers(&self, ak: Complex64, al: Complex64) -> (f64, f64) {
        let ok = self.w[0][0] * ak + self.w[0][1] * al;
        let ol = self.w[1][0] * ak + self.w[1][1] * al;
        (ok.norm_sqr(), ol.norm_sqr())
    }

    /// Exact inversion of the flux difference.
    pub fn invert(&self, diff: f64, rho_kk: f64, rho_ll: f64) -> f64 {
        (diff - self.m00 * rho_kk - self.m11 * rho_ll) / (2.0 * self.m01)
    }
}

/// Simulated reconstruction of `ρ` from per-bin powers and beamsplitter flux
/// differences. Only pairs in `plan` are filled off the diagonal.
pub fn measure_rho<R: Rng + ?Sized>(
    state: &CombState,
    plan: &MeasurementPlan,
    readout: &PairReadout,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<DensityMatrix> {
    let d = state.dim();
    let scale = state.reference_scale.norm_sqr();
    if scale == 0.0 {
        return Err(Error::InvalidArgument("zero comb amplitude".into()));
    }
    let normal = Normal::new(0.0, noise.statistical_sigma.max(0.0)).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let read = |p: f64, rng: &mut R| {
        if noise.statistical_sigma > 0.0 {
            p + normal.sample(rng)
        } else {
            p
        }
    };
    let amps: Vec<Complex64> = state.amplitudes.iter().map(|a| a * state.reference_scale).collect();
    let mut rho = DensityMatrix::zeros(d);
    for k in 0..d {
        let p = read(amps[k].norm_sqr() / scale, rng);
        rho.set(k, k, p);
    }
    for round in &plan.rounds {
        for &(k, l) in round {
            if k >= d || l >= d {
                return Err(Error::Dimension { expected: d, found: k.max(l) + 1 });
            }
            let (pk, pl) = readout.powers(amps[k], amps[l]);
            let pk = read(pk / scale, rng);
            let pl = read(pl / scale, rng);
            let v = readout.invert(pk - pl, rho.get(k, k), rho.get(l, l));
            rho.set(k, l, v);
        }
    }
    Ok(rho)
}

/// `|α|² ⟨ψ|H|ψ⟩` for the comb probe.
pub fn comb_expectation(state: &CombState, h: &HermitianOperator) -> Result<f64> {
    let d = state.dim();
    if h.dim() != d {
        return Err(Error::Dimension { expected: d, found: h.dim() });
    }
    let mut e = 0.0;
    for k in 0..d {
        for l in 0..d {
            e += (state.amplitudes[k].conj() * state.amplitudes[l]).re * h.get(k, l);
        }
    }
    Ok(state.reference_scale.norm_sqr() * e)
}
