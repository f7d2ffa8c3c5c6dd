use std::collections::BTreeMap;
use std::fs::File;
use std::io::BufReader;

use qfpsim::io::{profile_table, read_energy_table, write_basis_manifest, write_energy_table, write_sparse_hamiltonian, Table};
use qfpsim::nuclear::{
    bound_state_energies, calibrated_couplings, extrapolate, load_problem_dir, nn_phase_shift, scattering_length,
    ChannelCouplings, ExtrapolationOptions, PartialWave,
};
use qfpsim::pipeline::{energy_table, fit_channel, study_rows, EnergyMode};
use qfpsim::potential::{
    channel_potential, charge_radius, heavy_meson_mass, match_eft, three_body_potential, Channel, EnergyTable, ExpFit,
    FitOptions, RadiusKind,
};
use qfpsim::qfp::{hadamard_metrics, GateModel, ModeWindow, NoiseModel};
use qfpsim::schwinger::{
    build_hamiltonian, enumerate_physical_basis, find_study, local_observables, project_symmetry,
    AxisSector, ChargeConfig, LatticeSpec, LocalProfile, ReferenceProfiles, SymmetrySector,
};
use qfpsim::stats::{mean, sample_std};
use qfpsim::vqe::{vqe_minimize, EnergyRecord, VqeConfig, VqeRun};
use qfpsim::{exact_ground, Error, Result};
use serde_json::Value;

use crate::output::Output;
use crate::{AnalyzeArgs, ChannelChoice, EnergiesArgs, FitChoice, GateArgs, NoiseArgs, NuclearArgs, PhaseArgs, SchwingerArgs};

fn sweep_values(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad sweep {spec:?}"))))
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(Error::Parse(format!("sweep must be start:stop:step, got {spec:?}")));
    };
    if !(step > 0.0) || stop < start {
        return Err(Error::InvalidArgument("sweep needs step > 0 and stop ≥ start".into()));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

pub fn gate_metrics(a: &GateArgs, out: &mut Output) -> Result<()> {
    let mut thetas = a.theta.clone();
    if let Some(s) = &a.sweep {
        thetas.extend(sweep_values(s)?);
    }
    if thetas.is_empty() {
        thetas.push(0.8169);
    }
    let pair = (0, 1);
    let window = ModeWindow::around(pair, a.sidebands);
    let mut t = Table::new(&["theta", "reflectivity", "transmissivity", "leakage", "success_probability", "fidelity"]);
    for th in thetas {
        let m = hadamard_metrics(th, window, pair)?;
        t.push(vec![
            th.into(),
            m.reflectivity.into(),
            m.transmissivity.into(),
            m.leakage.into(),
            m.success_probability.into(),
            m.fidelity.into(),
        ])?;
    }
    out.table("gate_metrics", &t)
}

fn noise_model(n: &NoiseArgs) -> NoiseModel {
    NoiseModel { systematic_fraction: n.systematic, statistical_sigma: n.statistical, seed: n.seed }
}

fn vqe_config(n: &NoiseArgs) -> VqeConfig {
    VqeConfig {
        step_size: n.step,
        max_iter: n.iterations,
        trailing_window: n.window,
        gate: n.gate_depth.map_or(GateModel::Ideal, |depth| GateModel::Physical { depth }),
        ..VqeConfig::default()
    }
}

fn parse_sector(spec: &str, axis: Option<usize>, study: Option<SymmetrySector>) -> Result<SymmetrySector> {
    match spec.trim() {
        "auto" => return Ok(study.unwrap_or_default()),
        "none" | "" => return Ok(SymmetrySector::none()),
        _ => {}
    }
    let study_axis = |pick: fn(&SymmetrySector) -> Option<AxisSector>| study.as_ref().and_then(pick).map(|s| s.axis);
    let mut s = SymmetrySector::none();
    for tok in spec.split(',').map(str::trim) {
        match tok {
            "p" | "parity" => {
                let ax = axis.or(study_axis(|s| s.parity)).unwrap_or(0);
                s.parity = Some(AxisSector { axis: ax, eigenvalue: 1 });
            }
            "cp" => {
                let ax = axis.or(study_axis(|s| s.cp)).unwrap_or(1);
                s.cp = Some(AxisSector { axis: ax, eigenvalue: 1 });
            }
            "momentum" | "k" => s.momentum = true,
            other => return Err(Error::Parse(format!("unknown symmetry {other:?}"))),
        }
    }
    Ok(s)
}

fn record_row(r: &EnergyRecord) -> Vec<Value> {
    vec![r.value.into(), r.stat_sigma.into(), r.sys_sigma.into()]
}

fn profile_stats(profiles: &[LocalProfile]) -> (LocalProfile, LocalProfile) {
    let n = profiles[0].len();
    let col = |f: &dyn Fn(&LocalProfile) -> f64| profiles.iter().map(f).collect::<Vec<f64>>();
    let mut m = LocalProfile::zeros(n);
    let mut s = LocalProfile::zeros(n);
    for i in 0..n {
        let rho = col(&|p| p.rho[i]);
        let e2 = col(&|p| p.e2[i]);
        m.rho[i] = mean(&rho);
        m.e2[i] = mean(&e2);
        if profiles.len() > 1 {
            s.rho[i] = sample_std(&rho);
            s.e2[i] = sample_std(&e2);
        }
    }
    (m, s)
}

fn transcript(out: &Output, run: &VqeRun, name: &str) -> Result<()> {
    out.file(name, |w| run.write_transcript(w))
}

/// Subtracts the lower-body content appropriate to the number of charges.
fn subtracted(refs: &ReferenceProfiles, p: &LocalProfile, charges: &ChargeConfig) -> Result<Option<LocalProfile>> {
    Ok(match charges.len() {
        0 => None,
        1 => Some(refs.vacuum_subtracted(p)?),
        2 => Some(refs.one_body_subtracted(p, charges)?),
        _ => Some(refs.two_body_subtracted(p, charges)?),
    })
}

pub fn schwinger(a: &SchwingerArgs, out: &mut Output) -> Result<()> {
    let charges: ChargeConfig = a.charges.parse()?;
    let study = find_study(&charges);
    let lambda = a
        .lambda
        .or(study.as_ref().map(|s| s.lambda))
        .ok_or_else(|| Error::InvalidArgument(format!("{charges} is not in the study set; pass --lambda")))?;
    let sector = parse_sector(&a.project, a.axis, study.as_ref().map(|s| s.sector))?;
    let base = LatticeSpec { x: a.x, mu: a.mu, ..LatticeSpec::standard(lambda) };
    let spec = base.with_lambda(lambda);
    let basis = enumerate_physical_basis(&spec, &charges)?;
    if basis.is_empty() {
        return Err(Error::InvalidArgument(format!("no physical states for {charges} at Λ = {lambda}")));
    }
    let full = build_hamiltonian(&spec, &basis)?;
    let h = project_symmetry(&full, &sector)?;
    let op = h.to_operator()?;
    let (exact, vector) = exact_ground(&op);
    out.file("hamiltonian.txt", |w| write_sparse_hamiltonian(&h, w))?;
    out.file("basis.txt", |w| write_basis_manifest(&basis, w))?;

    let (record, profiles, run) = if a.vqe {
        let run = vqe_minimize(&op, &noise_model(&a.noise), &vqe_config(&a.noise))?;
        let states = run.trailing_states(a.noise.window);
        let profiles = states.iter().map(|v| local_observables(v, &h)).collect::<Result<Vec<_>>>()?;
        (run.result, profiles, Some(run))
    } else {
        (EnergyRecord::exact(exact), vec![local_observables(&vector, &h)?], None)
    };
    if let Some(run) = &run {
        transcript(out, run, "transcript.jsonl")?;
    }

    // lower-body references from the standard study set
    let default_physics = a.x == 0.6 && a.mu == 0.1;
    let mut summary = Table::new(&[
        "config", "lambda", "sector", "d", "d_sym", "energy", "stat_sigma", "sys_sigma", "exact", "iterations", "potential",
    ]);
    let potential = if default_physics && !charges.is_empty() && charges.len() <= 3 {
        let rows = study_rows(&LatticeSpec::standard(1), &EnergyMode::Exact)?;
        let mut t = energy_table(&rows, spec.n_fermion_sites);
        t.insert(charges.clone(), record);
        let v = match charges.len() {
            1 => heavy_meson_mass(&t)?,
            2 => {
                let r = qfpsim::schwinger::ring_distance(charges.positions[0], charges.positions[1], t.n_sites);
                channel_potential(&t, Channel::of_separation(r), r)?
            }
            _ => three_body_potential(&t, &charges)?.1,
        };
        Value::from(v.value)
    } else {
        Value::Null
    };
    summary.push(vec![
        charges.to_string().into(),
        lambda.into(),
        sector.label().into(),
        basis.len().into(),
        h.dim.into(),
        record.value.into(),
        record.stat_sigma.into(),
        record.sys_sigma.into(),
        exact.into(),
        run.as_ref().map_or(0, |r| r.iterations.len()).into(),
        potential,
    ])?;
    out.table("summary", &summary)?;

    let (mean_p, std_p) = profile_stats(&profiles);
    let refs = if default_physics { Some(ReferenceProfiles::exact(&LatticeSpec::standard(1))?) } else { None };
    let sub = match &refs {
        Some(r) => subtracted(r, &mean_p, &charges)?,
        None => None,
    };
    let mut t = profile_table(&mean_p);
    t.columns.extend(["rho_sigma", "e2_sigma", "rho_sub", "e2_sub"].map(String::from));
    for (i, row) in t.rows.iter_mut().enumerate() {
        row.push(std_p.rho[i].into());
        row.push(std_p.e2[i].into());
        row.push(sub.as_ref().map_or(Value::Null, |s| s.rho[i].into()));
        row.push(sub.as_ref().map_or(Value::Null, |s| s.e2[i].into()));
    }
    out.table("observables", &t)
}

pub fn energies(a: &EnergiesArgs, out: &mut Output) -> Result<()> {
    let base = LatticeSpec::standard(1);
    let mode = if a.vqe {
        EnergyMode::Vqe { noise: noise_model(&a.noise), config: vqe_config(&a.noise) }
    } else {
        EnergyMode::Exact
    };
    let rows = study_rows(&base, &mode)?;
    let mut t = Table::new(&[
        "config", "lambda", "sector", "d", "d_sym", "value", "stat_sigma", "sys_sigma", "exact", "iterations",
    ]);
    for r in &rows {
        let s = &r.solution;
        let mut row: Vec<Value> = vec![
            s.config.charges.to_string().into(),
            s.config.lambda.into(),
            s.config.sector.label().into(),
            s.d.into(),
            s.d_sym.into(),
        ];
        row.extend(record_row(&r.record));
        row.push(s.energy.into());
        row.push(r.run.as_ref().map_or(0, |r| r.iterations.len()).into());
        t.push(row)?;
        if let Some(run) = &r.run {
            let name = format!("transcript_{}.jsonl", s.config.charges.to_string().replace(['(', ')'], "").replace(',', "_"));
            transcript(out, run, &name)?;
        }
    }
    let table = energy_table(&rows, base.n_fermion_sites);
    out.file("energy_table.csv", |w| write_energy_table(&table, w))?;
    out.table("energies", &t)
}

fn fit_rows(fit: &ExpFit, t: &mut Table) -> Result<()> {
    let [dg, dm] = fit.uncertainties();
    let ch = match fit.channel {
        Channel::Like => "QQ",
        Channel::Opposite => "QQbar",
    };
    let (r0, r1, angle) = fit.ellipse.as_ref().map_or((Value::Null, Value::Null, Value::Null), |e| {
        (e.radii[0].into(), e.radii[1].into(), e.axes[0][1].atan2(e.axes[0][0]).into())
    });
    t.push(vec![
        ch.into(),
        fit.g_squared.into(),
        dg.into(),
        fit.mass.into(),
        dm.into(),
        fit.chi2.into(),
        fit.resamples_used.into(),
        r0,
        r1,
        angle,
    ])
}

fn fit_table(table: &EnergyTable, channels: &[Channel], opts: &FitOptions, out: &mut Output) -> Result<Vec<ExpFit>> {
    let mut t = Table::new(&[
        "channel", "g2", "g2_sigma", "mass", "mass_sigma", "chi2", "resamples", "ellipse_r0", "ellipse_r1", "ellipse_angle",
    ]);
    let mut fits = Vec::new();
    for &ch in channels {
        let fit = fit_channel(table, ch, opts)?;
        fit_rows(&fit, &mut t)?;
        if let Some(e) = &fit.ellipse {
            let name = format!("ellipse_{}.dat", if ch == Channel::Like { "qq" } else { "qqbar" });
            out.file(&name, |w| {
                writeln!(w, "# g2 mass")?;
                for [g, m] in e.outline(200) {
                    writeln!(w, "{g} {m}")?;
                }
                Ok(())
            })?;
        }
        fits.push(fit);
    }
    out.table("fits", &t)?;
    Ok(fits)
}


pub fn analyze(a: &AnalyzeArgs, out: &mut Output) -> Result<()> {
    let table = read_energy_table(BufReader::new(File::open(&a.table)?), a.sites)?;
    if table.is_empty() {
        return Err(Error::MissingEntry(format!("{} has no energies", a.table.display())));
    }
    let vac = table.get(&ChargeConfig::vacuum())?;
    let mh = heavy_meson_mass(&table)?;
    let mut masses = Table::new(&["quantity", "value", "stat_sigma", "sys_sigma"]);
    for (name, r) in [("E_vac", vac), ("M_H", mh)] {
        let mut row = vec![Value::from(name)];
        row.extend(record_row(&r));
        masses.push(row)?;
    }
    out.table("masses", &masses)?;

    let mut two = Table::new(&["r", "channel", "value", "stat_sigma", "sys_sigma"]);
    for r in 0..=a.sites / 2 {
        if table.get(&ChargeConfig::new(&[0, r])).is_err() {
            continue;
        }
        let ch = Channel::of_separation(r);
        let v = channel_potential(&table, ch, r)?;
        let mut row: Vec<Value> = vec![r.into(), if ch == Channel::Like { "QQ" } else { "QQbar" }.into()];
        row.extend(record_row(&v));
        two.push(row)?;
    }
    out.table("two_body", &two)?;

    let mut three = Table::new(&["config", "r1", "r2", "value", "stat_sigma", "sys_sigma"]);
    for c in table.entries.keys().filter(|c| c.len() == 3) {
        let (j, v) = three_body_potential(&table, c)?;
        let mut row: Vec<Value> = vec![c.to_string().into(), j.r1.into(), j.r2.into()];
        row.extend(record_row(&v));
        three.push(row)?;
    }
    if !three.is_empty() {
        out.table("three_body", &three)?;
    }

    let channels: Vec<Channel> = match a.fit {
        FitChoice::Qq => vec![Channel::Like],
        FitChoice::Qqbar => vec![Channel::Opposite],
        FitChoice::Both => vec![Channel::Like, Channel::Opposite],
        FitChoice::None => vec![],
    };
    if !channels.is_empty() {
        let opts = FitOptions { resamples: a.resamples, seed: a.seed, ..FitOptions::new(a.sites as f64) };
        let fits = fit_table(&table, &channels, &opts, out)?;
        if let Some(f) = fits.iter().find(|f| f.channel == Channel::Opposite) {
            let m = match_eft(f, a.m_h_eft)?;
            let mut t = Table::new(&["m_h_eft", "c0", "scattering_length", "parity", "level", "energy"]);
            for (parity, es) in [("even", &m.bound_state_energies), ("odd", &m.odd_bound_state_energies)] {
                for (k, e) in es.iter().enumerate() {
                    t.push(vec![
                        m.m_h_eft.into(),
                        m.c0.into(),
                        m.scattering_length.into(),
                        parity.into(),
                        k.into(),
                        (*e).into(),
                    ])?;
                }
            }
            out.table("eft", &t)?;
        }
    }

    if a.radii {
        let base = LatticeSpec::standard(1);
        let refs = ReferenceProfiles::exact(&base)?;
        let excess = refs.vacuum_subtracted(&refs.single)?;
        let mut t = Table::new(&["radius", "value", "truncation"]);
        for (name, kind) in [("charge", RadiusKind::Charge), ("field_energy", RadiusKind::FieldEnergy)] {
            let r = charge_radius(&excess, kind, 0)?;
            t.push(vec![name.into(), r.value.into(), r.sys_sigma.into()])?;
        }
        out.table("radii", &t)?;
    }
    Ok(())
}

pub fn nuclear(a: &NuclearArgs, out: &mut Output) -> Result<()> {
    let problems = load_problem_dir(&a.dir)?;
    let mut t = Table::new(&["nucleus", "n_max", "l_fm", "d", "exact", "value", "stat_sigma", "sys_sigma", "iterations"]);
    let mut groups: BTreeMap<String, Vec<(f64, EnergyRecord, Option<f64>)>> = BTreeMap::new();
    for (i, p) in problems.iter().enumerate() {
        let exact = p.exact_energy();
        let (rec, iters) = if a.vqe {
            let noise = NoiseModel { systematic_fraction: p.systematic, statistical_sigma: 0.0, seed: a.seed.wrapping_add(i as u64) };
            let cfg = VqeConfig { max_iter: a.iterations, trailing_window: a.window, ..VqeConfig::default() };
            let run = vqe_minimize(&p.h, &noise, &cfg)?;
            let name = format!("transcript_{}_{}.jsonl", p.label, p.n_max);
            transcript(out, &run, &name)?;
            (run.result, run.iterations.len())
        } else {
            (EnergyRecord::exact(exact), 0)
        };
        t.push(vec![
            p.label.clone().into(),
            p.n_max.into(),
            p.l_fm.into(),
            p.dim().into(),
            exact.into(),
            rec.value.into(),
            rec.stat_sigma.into(),
            rec.sys_sigma.into(),
            iters.into(),
        ])?;
        groups.entry(p.label.clone()).or_default().push((p.l_fm, rec, p.threshold));
    }
    out.table("energies", &t)?;
    if !a.extrapolate {
        return Ok(());
    }
    let mut ext = Table::new(&["nucleus", "e_inf", "e_inf_sigma", "e_inf_lo", "e_inf_hi", "amplitude", "k_inf"]);
    let mut band = Table::new(&["nucleus", "l_fm", "center", "lower", "upper"]);
    for (label, pts) in &groups {
        let threshold = pts
            .iter()
            .find_map(|p| p.2)
            .ok_or_else(|| Error::MissingEntry(format!("threshold for {label} (set `threshold` in a sidecar)")))?;
        let l_max = pts.iter().map(|p| p.0).fold(0.0, f64::max);
        let opts = ExtrapolationOptions {
            replicas: a.replicas,
            seed: a.seed,
            band_extents: (1..=40).map(|i| l_max * (0.5 + 0.05 * i as f64)).collect(),
            ..ExtrapolationOptions::new(threshold)
        };
        let data: Vec<(f64, EnergyRecord)> = pts.iter().map(|p| (p.0, p.1)).collect();
        let f = extrapolate(&data, &opts)?;
        ext.push(vec![
            label.clone().into(),
            f.e_infinity.value.into(),
            f.e_infinity.sigma().into(),
            f.e_infinity_interval.0.into(),
            f.e_infinity_interval.1.into(),
            f.amplitude.into(),
            f.k_infinity.into(),
        ])?;
        for b in &f.band {
            band.push(vec![label.clone().into(), b.l_fm.into(), b.center.into(), b.lower.into(), b.upper.into()])?;
        }
    }
    out.table("extrapolation", &ext)?;
    out.table("band", &band)
}

pub fn phase_shift(a: &PhaseArgs, out: &mut Output) -> Result<()> {
    if !(a.p_step > 0.0) {
        return Err(Error::InvalidArgument("--p-step must be positive".into()));
    }
    let (singlet, triplet) = calibrated_couplings()?;
    let chosen: Vec<ChannelCouplings> = match a.channel {
        ChannelChoice::Singlet => vec![singlet],
        ChannelChoice::Triplet => vec![triplet],
        ChannelChoice::Both => vec![singlet, triplet],
    };
    let name = |c: &ChannelCouplings| match c.channel {
        PartialWave::Singlet => "1S0",
        PartialWave::Triplet => "3S1",
    };
    let mut info = Table::new(&["channel", "normalization", "scattering_length_fm", "bound_states_mev"]);
    let mut t = Table::new(&["channel", "p_mev", "delta_deg"]);
    for c in &chosen {
        let bs: Vec<String> = bound_state_energies(c)?.iter().map(|e| format!("{e:.6}")).collect();
        info.push(vec![name(c).into(), c.normalization.into(), scattering_length(c)?.into(), bs.join(" ").into()])?;
        let mut p = a.p_step;
        while p <= a.p_max + 1e-9 {
            t.push(vec![name(c).into(), p.into(), nn_phase_shift(c, p)?.into()])?;
            p += a.p_step;
        }
    }
    out.table("couplings", &info)?;
    out.table("phase_shifts", &t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_counts() {
        assert_eq!(sweep_values("0:2:0.01").unwrap().len(), 201);
        assert!(sweep_values("0:2").is_err());
        assert!(sweep_values("1:0:0.1").is_err());
    }

    #[test]
    fn sectors() {
        let s = parse_sector("p,momentum", None, None).unwrap();
        assert!(s.momentum && s.parity.unwrap().axis == 0);
        assert!(parse_sector("q", None, None).is_err());
        assert_eq!(parse_sector("none", None, Some(SymmetrySector::parity(2))).unwrap(), SymmetrySector::none());
    }
}
