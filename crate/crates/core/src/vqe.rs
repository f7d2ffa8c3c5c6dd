//! Single-excitation UCC ansatz and the variational loop.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::qfp::{
    measure_rho, plan_measurements, CombState, DensityMatrix, GateModel, MeasurementPlan, NoiseModel, PairReadout,
};
use crate::{Error, HermitianOperator, Result};

pub use crate::linalg::exact_ground;

/// Variational angles; a state of dimension `d` has `d − 1` of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UccState {
    pub theta: Vec<f64>,
}

impl UccState {
    pub fn zeros(dim: usize) -> Self {
        UccState { theta: vec![0.0; dim.saturating_sub(1)] }
    }

    pub fn dim(&self) -> usize {
        self.theta.len() + 1
    }
}

/// Energy estimate with statistical and systematic spreads.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub value: f64,
    pub stat_sigma: f64,
    pub sys_sigma: f64,
}

impl EnergyRecord {
    pub fn exact(value: f64) -> Self {
        EnergyRecord { value, stat_sigma: 0.0, sys_sigma: 0.0 }
    }

    pub fn new(value: f64, stat_sigma: f64, sys_sigma: f64) -> Self {
        EnergyRecord { value, stat_sigma, sys_sigma }
    }

    /// Both spreads in quadrature.
    pub fn sigma(&self) -> f64 {
        self.stat_sigma.hypot(self.sys_sigma)
    }

    /// `Σ cᵢ xᵢ` with each spread added in quadrature.
    pub fn combine(terms: &[(f64, EnergyRecord)]) -> Self {
        let mut out = EnergyRecord::default();
        let mut stat = 0.0;
        let mut sys = 0.0;
        for (c, r) in terms {
            out.value += c * r.value;
            stat += (c * r.stat_sigma).powi(2);
            sys += (c * r.sys_sigma).powi(2);
        }
        out.stat_sigma = stat.sqrt();
        out.sys_sigma = sys.sqrt();
        out
    }
}

/// Real amplitudes `a_0 = cos φ`, `a_k = −(sin φ / φ) θ_k`, `φ = ‖θ‖`.
pub fn ucc_real_amplitudes(theta: &[f64]) -> Vec<f64> {
    let phi = theta.iter().map(|t| t * t).sum::<f64>().sqrt();
    let s = sinc(phi);
    let mut a = Vec::with_capacity(theta.len() + 1);
    a.push(phi.cos());
    a.extend(theta.iter().map(|t| -s * t));
    a
}

pub fn ucc_amplitudes(state: &UccState) -> CombState {
    CombState::from_real(&ucc_real_amplitudes(&state.theta))
}

fn sinc(phi: f64) -> f64 {
    if phi < 1e-4 {
        1.0 - phi * phi / 6.0 + phi.powi(4) / 120.0
    } else {
        phi.sin() / phi
    }
}

// (cos φ − sin φ / φ) / φ², finite at φ → 0
fn dsinc_over_phi(phi: f64) -> f64 {
    if phi < 1e-3 {
        -1.0 / 3.0 + phi * phi / 30.0 - phi.powi(4) / 840.0
    } else {
        (phi.cos() - phi.sin() / phi) / (phi * phi)
    }
}

/// `∂a_i / ∂θ_k`, shape `d × (d − 1)`.
pub fn ucc_jacobian(theta: &[f64]) -> Vec<Vec<f64>> {
    let n = theta.len();
    let phi = theta.iter().map(|t| t * t).sum::<f64>().sqrt();
    let s = sinc(phi);
    let ds = dsinc_over_phi(phi);
    let mut jac = vec![vec![0.0; n]; n + 1];
    for k in 0..n {
        jac[0][k] = -s * theta[k];
    }
    for i in 0..n {
        for k in 0..n {
            let mut v = -ds * theta[i] * theta[k];
            if i == k {
                v -= s;
            }
            jac[i + 1][k] = v;
        }
    }
    jac
}

/// Gradient of `⟨H⟩` from a measured density matrix: `g = 2 Jᵀ (H ρ a(θ))`.
/// With a noiseless `ρ` this is the exact gradient; at `θ = 0` it reduces to
/// `g_k = −2 h_{0k}`.
pub fn acse_gradient(rho: &DensityMatrix, h: &HermitianOperator, theta: &UccState) -> Result<Vec<f64>> {
    let d = h.dim();
    if rho.dim() != d {
        return Err(Error::Dimension { expected: d, found: rho.dim() });
    }
    if theta.dim() != d {
        return Err(Error::Dimension { expected: d, found: theta.dim() });
    }
    let a = ucc_real_amplitudes(&theta.theta);
    let rho_a: Vec<f64> = (0..d).map(|i| (0..d).map(|j| rho.get(i, j) * a[j]).sum()).collect();
    let v = h.matvec(&rho_a);
    let jac = ucc_jacobian(&theta.theta);
    Ok((0..d - 1).map(|k| 2.0 * (0..d).map(|i| jac[i][k] * v[i]).sum::<f64>()).collect())
}

/// Exact `⟨ψ(θ)|H|ψ(θ)⟩`.
pub fn exact_expectation(h: &HermitianOperator, theta: &[f64]) -> f64 {
    h.expectation(&ucc_real_amplitudes(theta))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VqeConfig {
    /// Gradient step; `None` uses `1 / ‖H‖₂`.
    pub step_size: Option<f64>,
    pub max_iter: usize,
    pub trailing_window: usize,
    pub max_parallel: usize,
    pub gate: GateModel,
    /// Relative energy change treated as converged (three in a row).
    pub tolerance: f64,
    pub reference: ReferenceMode,
}

/// Which basis state plays the occupied mode `0` of the ansatz.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReferenceMode {
    /// Basis state `0`.
    First,
    /// The basis state with the lowest diagonal energy (first on ties).
    LowestDiagonal,
}

impl ReferenceMode {
    /// Ansatz mode `i` is basis state `order[i]`.
    pub fn order(&self, h: &HermitianOperator) -> Vec<usize> {
        let d = h.dim();
        let r = match self {
            ReferenceMode::First => 0,
            ReferenceMode::LowestDiagonal => (0..d).fold(0, |best, i| if h.get(i, i) < h.get(best, best) { i } else { best }),
        };
        std::iter::once(r).chain((0..d).filter(|&i| i != r)).collect()
    }
}

fn permuted(h: &HermitianOperator, order: &[usize]) -> Result<HermitianOperator> {
    let d = h.dim();
    HermitianOperator::from_row_major(d, (0..d * d).map(|k| h.get(order[k / d], order[k % d])).collect())
}

impl Default for VqeConfig {
    fn default() -> Self {
        VqeConfig {
            step_size: None,
            max_iter: 50,
            trailing_window: 10,
            max_parallel: 5,
            gate: GateModel::Ideal,
            tolerance: 1e-8,
            reference: ReferenceMode::LowestDiagonal,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub energy: f64,
    pub theta: Vec<f64>,
    /// `(k, l, ρ_kl)` read out for the energy, in mode order.
    pub rho: Vec<(usize, usize, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VqeRun {
    pub iterations: Vec<IterationRecord>,
    pub step_size: f64,
    pub max_iter: usize,
    pub converged: bool,
    pub result: EnergyRecord,
    /// Beamsplitter settings per energy evaluation.
    pub pairs_per_evaluation: usize,
    pub evaluations: usize,
    /// Systematic scale drawn for this run.
    pub systematic_shift: f64,
    /// Ansatz mode `i` is basis state `mode_order[i]`; `θ` refers to modes.
    pub mode_order: Vec<usize>,
}

impl VqeRun {
    pub fn final_theta(&self) -> &[f64] {
        &self.iterations.last().expect("nonempty run").theta
    }

    /// Amplitude vectors of the trailing window in the original basis order.
    pub fn trailing_states(&self, window: usize) -> Vec<Vec<f64>> {
        let n = self.iterations.len();
        self.iterations[n.saturating_sub(window)..]
            .iter()
            .map(|r| {
                let a = ucc_real_amplitudes(&r.theta);
                let mut out = vec![0.0; a.len()];
                for (i, &b) in self.mode_order.iter().enumerate() {
                    out[b] = a[i];
                }
                out
            })
            .collect()
    }

    /// One JSON object per iteration followed by a summary object.
    pub fn write_transcript<W: Write>(&self, mut w: W) -> Result<()> {
        for rec in &self.iterations {
            serde_json::to_writer(&mut w, rec)?;
            writeln!(w)?;
        }
        let summary = serde_json::json!({
            "summary": {
                "value": self.result.value,
                "stat_sigma": self.result.stat_sigma,
                "sys_sigma": self.result.sys_sigma,
                "converged": self.converged,
                "iterations": self.iterations.len(),
                "evaluations": self.evaluations,
                "pairs_per_evaluation": self.pairs_per_evaluation,
                "step_size": self.step_size,
            }
        });
        serde_json::to_writer(&mut w, &summary)?;
        writeln!(w)?;
        Ok(())
    }
}

struct Evaluator<'a> {
    h: &'a HermitianOperator,
    energy_plan: MeasurementPlan,
    gradient_plan: MeasurementPlan,
    readout: PairReadout,
    noise: NoiseModel,
    scale: f64,
    rng: ChaCha8Rng,
    count: usize,
}

impl Evaluator<'_> {
    fn eval(&mut self, theta: &[f64], iteration: usize) -> Result<(f64, DensityMatrix)> {
        self.count += 1;
        let state = CombState::from_real(&ucc_real_amplitudes(theta));
        let rho = measure_rho(&state, &self.energy_plan, &self.readout, &self.noise, &mut self.rng)?;
        let e = rho.energy(self.h)? * self.scale;
        if !e.is_finite() {
            return Err(Error::Divergence { iteration });
        }
        Ok((e, rho))
    }

    fn gradient(&mut self, theta: &[f64], iteration: usize) -> Result<Vec<f64>> {
        let state = CombState::from_real(&ucc_real_amplitudes(theta));
        let rho = measure_rho(&state, &self.gradient_plan, &self.readout, &self.noise, &mut self.rng)?;
        let g = acse_gradient(&rho, self.h, &UccState { theta: theta.to_vec() })?;
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { iteration });
        }
        Ok(g.into_iter().map(|v| v * self.scale).collect())
    }
}

fn measured_pairs(rho: &DensityMatrix, h: &HermitianOperator) -> Vec<(usize, usize, f64)> {
    let d = h.dim();
    (0..d).map(|k| (k, k)).chain(h.sparsity()).map(|(k, l)| (k, l, rho.get(k, l))).collect()
}

/// Gradient descent on the UCC angles starting from `θ = 0`, with energies
/// and gradients taken from simulated measurements. A step that raises the
/// energy is retried with half the step size.
///
/// The systematic scale `1 + u`, `u ~ U[−s, s]`, is drawn once per run and
/// multiplies every energy evaluation.
pub fn vqe_minimize(h: &HermitianOperator, noise: &NoiseModel, config: &VqeConfig) -> Result<VqeRun> {
    noise.validate()?;
    if config.step_size.is_some_and(|s| !(s > 0.0)) {
        return Err(Error::InvalidArgument("step size must be positive".into()));
    }
    if config.max_iter == 0 || config.trailing_window == 0 {
        return Err(Error::InvalidArgument("iteration budget and window must be ≥ 1".into()));
    }
    let d = h.dim();
    let mode_order = config.reference.order(h);
    let hp = permuted(h, &mode_order)?;
    let h = &hp;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let shift = if noise.systematic_fraction > 0.0 {
        rng.random_range(-noise.systematic_fraction..=noise.systematic_fraction)
    } else {
        0.0
    };
    let pairs = h.sparsity();
    let energy_plan = plan_measurements(&pairs, config.max_parallel);
    energy_plan.check_covers(&pairs)?;
    let all: Vec<(usize, usize)> = (0..d).flat_map(|k| (k + 1..d).map(move |l| (k, l))).collect();
    let gradient_plan = plan_measurements(&all, config.max_parallel);
    let readout = PairReadout::new(&config.gate)?;
    let mut ev = Evaluator { h, energy_plan, gradient_plan, readout, noise: *noise, scale: 1.0 + shift, rng, count: 0 };

    let eta0 = config.step_size.unwrap_or_else(|| {
        let n = h.spectral_norm();
        if n > 0.0 {
            1.0 / n
        } else {
            1.0
        }
    });

    let mut theta = vec![0.0; d - 1];
    let mut iterations = Vec::new();
    let mut converged = false;
    let (mut e, mut rho) = ev.eval(&theta, 0)?;
    let mut small_changes = 0;
    for it in 0..config.max_iter {
        iterations.push(IterationRecord { iteration: it, energy: e, theta: theta.clone(), rho: measured_pairs(&rho, h) });
        if d == 1 {
            converged = true;
            break;
        }
        if it + 1 == config.max_iter {
            break;
        }
        let g = ev.gradient(&theta, it)?;
        if g.iter().all(|v| *v == 0.0) {
            converged = true;
            break;
        }
        let mut eta = eta0;
        let mut accepted = None;
        for _ in 0..30 {
            let trial: Vec<f64> = theta.iter().zip(&g).map(|(t, gk)| t - eta * gk).collect();
            let (et, rt) = ev.eval(&trial, it + 1)?;
            if et <= e {
                accepted = Some((trial, et, rt));
                break;
            }
            eta *= 0.5;
        }
        let Some((t_new, e_new, r_new)) = accepted else {
            // no downhill step at this resolution
            converged = noise.is_noiseless();
            break;
        };
        let rel = (e - e_new).abs() / e.abs().max(1e-300);
        small_changes = if rel < config.tolerance { small_changes + 1 } else { 0 };
        theta = t_new;
        e = e_new;
        rho = r_new;
        if small_changes >= 3 {
            iterations.push(IterationRecord { iteration: it + 1, energy: e, theta: theta.clone(), rho: measured_pairs(&rho, h) });
            converged = true;
            break;
        }
    }

    let n = iterations.len();
    let tail: Vec<f64> = iterations[n.saturating_sub(config.trailing_window)..].iter().map(|r| r.energy).collect();
    let value = crate::stats::mean(&tail);
    let result = EnergyRecord {
        value,
        stat_sigma: crate::stats::sample_std(&tail),
        sys_sigma: noise.systematic_fraction * value.abs(),
    };
    Ok(VqeRun {
        iterations,
        step_size: eta0,
        max_iter: config.max_iter,
        converged,
        result,
        pairs_per_evaluation: pairs.len(),
        evaluations: ev.count,
        systematic_shift: shift,
        mode_order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_state() {
        assert_eq!(ucc_real_amplitudes(&[0.0, 0.0]), vec![1.0, 0.0, 0.0]);
        let a = ucc_real_amplitudes(&[std::f64::consts::FRAC_PI_2]);
        assert!(a[0].abs() < 1e-16 && (a[1] + 1.0).abs() < 1e-15);
    }

    #[test]
    fn gradient_at_reference() {
        let h = HermitianOperator::from_rows(&[
            vec![1.0, 0.3, -0.2],
            vec![0.3, 2.0, 0.5],
            vec![-0.2, 0.5, 3.0],
        ])
        .unwrap();
        let th = UccState::zeros(3);
        let rho = DensityMatrix::from_state(&ucc_amplitudes(&th));
        let g = acse_gradient(&rho, &h, &th).unwrap();
        assert!((g[0] + 0.6).abs() < 1e-15);
        assert!((g[1] - 0.4).abs() < 1e-15);
        let hd = HermitianOperator::diagonal(&[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(acse_gradient(&rho, &hd, &th).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn one_dimensional_problem() {
        let h = HermitianOperator::diagonal(&[-2.2246]).unwrap();
        let run = vqe_minimize(&h, &NoiseModel::noiseless(), &VqeConfig::default()).unwrap();
        assert_eq!(run.iterations.len(), 1);
        assert_eq!(run.result.value, -2.2246);
    }

    #[test]
    fn combine_in_quadrature() {
        let a = EnergyRecord::new(1.0, 0.3, 0.0);
        let b = EnergyRecord::new(2.0, 0.4, 0.0);
        let c = EnergyRecord::combine(&[(1.0, a), (-1.0, b)]);
        assert_eq!(c.value, -1.0);
        assert!((c.stat_sigma - 0.5).abs() < 1e-15);
    }
}
