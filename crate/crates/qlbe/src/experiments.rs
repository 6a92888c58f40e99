//! The experiment kinds: each turns a validated configuration into a table
//! and a JSON record of derived results.

use std::path::{Path, PathBuf};
use std::time::Instant;

use qlbe_core::brownian::{crossover_time, diffusion_coefficients, FrictionlessParams, Gaussian, GaussianSum};
use qlbe_core::decoherence::{coherence_factor, jump_expansion, DecoherenceSpec, VisibilitySetup};
use qlbe_core::observables::{
    decoherence_rate_prediction, diffusive_solutions, equilibrium_u_sq, eta_constant, fit_exponential_auto,
    EnsembleSeries, ExpFit,
};
use qlbe_core::qlbe_generator::{refraction_index, refraction_n2_from_loss, thermal_forward_average, thermal_forward_average_1d};
use qlbe_core::scattering::{Collision, CrossSectionModel, GasSpec, ParticleSpec, Potential, Statistics};
use qlbe_core::structure_factor::{detailed_balance_residual, ideal_gas_density, s_bf, s_mb};
use qlbe_core::trajectory::{Engine, SuperpositionState};
use qlbe_core::units::{SiScales, AMU_SI, HBAR_SI, KB_SI};
use serde::Serialize;
use serde_json::{json, Value as Json};

use crate::config::{ExperimentConfig, Kind, Units};
use crate::ensemble::{run_ensemble, with_threads};
use crate::error::Result;
use crate::output::{self, Table};

/// Table and derived results of one experiment.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub table: Table,
    pub results: Json,
}

/// Execution options that do not affect results.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub threads: Option<usize>,
    pub out_dir: Option<PathBuf>,
}

/// Files written by [`run`].
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub csv_path: PathBuf,
    pub meta_path: PathBuf,
    pub csv: String,
    pub outcome: Outcome,
}

#[derive(Serialize)]
struct Versions {
    qlbe: &'static str,
    qlbe_core: &'static str,
}

/// Run the experiment and compute its outcome without writing files.
pub fn execute(config: &ExperimentConfig, threads: Option<usize>) -> Result<Outcome> {
    with_threads(threads, || match config.kind {
        Kind::Thermalize => thermalize(config, false),
        Kind::RelaxMoments => thermalize(config, true),
        Kind::DecohereMomentum => decohere_momentum(config),
        Kind::DecoherePosition => decohere_position(config),
        Kind::Visibility => visibility(config),
        Kind::Refraction => refraction(config),
        Kind::StructureFactor => structure_factor(config),
        Kind::BrownianCheck => brownian_check(config),
    })?
}

/// Run the experiment and write the CSV and its metadata sidecar.
pub fn run(config: &ExperimentConfig, opts: &RunOptions) -> Result<Artifacts> {
    let start = Instant::now();
    let outcome = execute(config, opts.threads)?;
    let runtime = start.elapsed().as_secs_f64();

    let deterministic = json!({
        "schema": crate::config::SCHEMA_VERSION,
        "experiment": config.kind.name(),
        "seed": config.seed,
        "config": config.values,
        "config_text": config.to_text(),
        "versions": Versions { qlbe: env!("CARGO_PKG_VERSION"), qlbe_core: qlbe_core::VERSION },
        "results": outcome.results,
    });
    let digest = output::sha256_hex(output::to_json(&deterministic).as_bytes());
    let title = vec![
        ("experiment".to_string(), config.kind.name().to_string()),
        ("seed".to_string(), config.seed.to_string()),
        ("schema".to_string(), crate::config::SCHEMA_VERSION.to_string()),
    ];
    let csv = output::render_csv(&title, &digest, &outcome.table);

    let dir = opts.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
    output::ensure_dir(&dir)?;
    let csv_path = dir.join(Path::new(&config.output).file_name().unwrap_or(config.output.as_ref()));
    let meta_path = output::sidecar_path(&csv_path);
    output::write_file(&csv_path, csv.as_bytes())?;

    let mut meta = deterministic;
    meta["metadata_sha256"] = json!(digest);
    meta["csv"] = json!(csv_path.file_name().map(|f| f.to_string_lossy().into_owned()));
    meta["csv_sha256"] = json!(output::sha256_hex(csv.as_bytes()));
    meta["runtime_seconds"] = json!(runtime);
    meta["threads"] = json!(opts.threads.unwrap_or_else(rayon::current_num_threads));
    output::write_file(&meta_path, output::to_json(&meta).as_bytes())?;
    Ok(Artifacts {
        csv_path,
        meta_path,
        csv,
        outcome,
    })
}

fn fit_json(fit: std::result::Result<ExpFit, qlbe_core::Error>) -> Json {
    match fit {
        Ok(f) => json!({
            "rate": f.rate,
            "rate_se": f.rate_se(),
            "intercept": f.intercept,
            "chi2_per_dof": f.chi2_per_dof,
            "n_used": f.n_used,
            "n_excluded": f.n_excluded,
            "window": [f.window.0, f.window.1],
        }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

/// Mass ratio, rate `Γ_β` and time unit of a Monte Carlo experiment. The
/// engine runs in units of `1/Γ_β`.
struct McSetup {
    mass_ratio: f64,
    engine: Engine,
    /// Physical time per unit of `Γ_β t`.
    time_unit: f64,
    time_label: &'static str,
}

fn mc_setup(config: &ExperimentConfig) -> Result<McSetup> {
    match config.units {
        Units::Internal => {
            let r = config.f64("mass_ratio");
            let gamma_beta = config.f64("n_gas") * config.f64("sigma_tot");
            let engine = Engine::with_rate(r, 1.0, 0.5 / r / gamma_beta)?;
            Ok(McSetup {
                mass_ratio: r,
                engine,
                time_unit: 1.0 / gamma_beta,
                time_label: "internal time",
            })
        }
        Units::Si => {
            let m_gas = config.f64("gas_mass_amu") * AMU_SI;
            let big_m = config.f64("particle_mass_amu") * AMU_SI;
            let scales = SiScales::new(m_gas, config.f64("temperature_k"));
            let gamma_beta = config.f64("gas_density_m3") * config.f64("sigma_tot_m2") * scales.velocity;
            let r = m_gas / big_m;
            let omega = big_m * scales.velocity * scales.velocity / (2.0 * HBAR_SI) / gamma_beta;
            Ok(McSetup {
                mass_ratio: r,
                engine: Engine::with_rate(r, 1.0, omega)?,
                time_unit: 1.0 / gamma_beta,
                time_label: "s",
            })
        }
    }
}

fn thermalize(config: &ExperimentConfig, relax: bool) -> Result<Outcome> {
    let setup = mc_setup(config)?;
    let t_max = match config.units {
        Units::Internal => config.f64("t_max") / setup.time_unit,
        Units::Si => config.f64("t_max_s") / setup.time_unit,
    };
    let n = config.u64("n_samples") as usize;
    let times: Vec<f64> = (0..n).map(|i| t_max * i as f64 / (n - 1) as f64).collect();
    let u0 = config.vec3("u0");
    let n_traj = config.u64("n_traj");
    let records = run_ensemble(&setup.engine, &SuperpositionState::eigenstate(u0), 0, n_traj, &times, config.seed)?;
    let s = EnsembleSeries::from_records(&times, &records)?;
    let r = setup.mass_ratio;
    let eq = equilibrium_u_sq(r);
    let eta = eta_constant(r, 1.0);

    let mut cols = vec![
        ("t", setup.time_label),
        ("gamma_t", "1"),
        ("mean_ux", "M v_beta"),
        ("mean_uy", "M v_beta"),
        ("mean_uz", "M v_beta"),
        ("mean_ux_se", "M v_beta"),
        ("mean_uy_se", "M v_beta"),
        ("mean_uz_se", "M v_beta"),
        ("mean_u_squared", "(M v_beta)^2"),
        ("mean_u_squared_se", "(M v_beta)^2"),
        ("mean_u_sq", "(M v_beta)^2"),
        ("mean_u_sq_se", "(M v_beta)^2"),
        ("mean_jumps", "1"),
    ];
    if relax {
        cols.push(("pred_mean_u_squared", "(M v_beta)^2"));
        cols.push(("pred_mean_u_sq", "(M v_beta)^2"));
    }
    let mut table = Table::new(cols);
    for (k, &t) in times.iter().enumerate() {
        let mut row = vec![t * setup.time_unit, t];
        row.extend_from_slice(&s.mean_u[k]);
        row.extend_from_slice(&s.mean_u_se[k]);
        row.extend([
            s.mean_u_squared[k],
            s.mean_u_squared_se[k],
            s.mean_u_sq[k],
            s.mean_u_sq_se[k],
            s.mean_jumps[k],
        ]);
        if relax {
            let p = diffusive_solutions(s.mean_u_squared[0], s.mean_u_sq[0], eta, r, t);
            row.extend([p.mean_u_squared, p.mean_u_sq]);
        }
        table.push(row);
    }

    let last = times.len() - 1;
    let mut results = json!({
        "mass_ratio": r,
        "n_traj": n_traj,
        "time_unit": setup.time_unit,
        "equilibrium_u_sq": eq,
        "final_mean_u_sq": s.mean_u_sq[last],
        "final_mean_u_sq_se": s.mean_u_sq_se[last],
        "final_mean_u": s.mean_u[last],
        "final_mean_u_se": s.mean_u_se[last],
    });
    if relax {
        let excess: Vec<f64> = s.mean_u_sq.iter().map(|v| v - eq).collect();
        results["two_eta"] = json!(2.0 * eta);
        results["fit_mean_u_squared"] = fit_json(fit_exponential_auto(&times, &s.mean_u_squared, &s.mean_u_squared_se));
        results["fit_mean_u_sq_excess"] = fit_json(fit_exponential_auto(&times, &excess, &s.mean_u_sq_se));
    }
    Ok(Outcome { table, results })
}

fn decohere_momentum(config: &ExperimentConfig) -> Result<Outcome> {
    let setup = mc_setup(config)?;
    let n = config.u64("n_samples") as usize;
    let n_traj = config.u64("n_traj");
    let lengths = config.f64("decay_lengths");
    let mut table = Table::new([
        ("u0", "M v_beta"),
        ("t", setup.time_label),
        ("gamma_t", "1"),
        ("coherence", "1"),
        ("coherence_se", "1"),
        ("mean_jumps", "1"),
    ]);
    let mut per_u0 = Vec::new();
    for (j, &u0) in config.list("u0_list").iter().enumerate() {
        let predicted = decoherence_rate_prediction(u0, 1.0);
        let t_end = lengths / predicted;
        let times: Vec<f64> = (0..n).map(|i| t_end * i as f64 / (n - 1) as f64).collect();
        let init = SuperpositionState::pair([u0, 0.0, 0.0], [-u0, 0.0, 0.0]);
        let records = run_ensemble(&setup.engine, &init, j as u64 * n_traj, n_traj, &times, config.seed)?;
        let s = EnsembleSeries::from_records(&times, &records)?;
        let c = s.coherence.as_ref().expect("pair states carry coherence");
        let se = s.coherence_se.as_ref().expect("pair states carry coherence");
        for k in 0..n {
            table.push(vec![u0, times[k] * setup.time_unit, times[k], c[k], se[k], s.mean_jumps[k]]);
        }
        let fit = fit_exponential_auto(&times, c, se);
        let rel = fit.as_ref().map(|f| (f.rate - predicted) / predicted).ok();
        per_u0.push(json!({
            "u0": u0,
            "lambda_predicted": predicted,
            "fit": fit_json(fit),
            "relative_deviation": rel,
        }));
    }
    Ok(Outcome {
        table,
        results: json!({
            "mass_ratio": setup.mass_ratio,
            "n_traj": n_traj,
            "time_unit": setup.time_unit,
            "rate_unit": "Gamma_beta",
            "decoherence": per_u0,
        }),
    })
}

fn model_from(config: &ExperimentConfig) -> CrossSectionModel {
    match config.word("model") {
        "constant" => CrossSectionModel::Constant {
            sigma_tot: config.f64("sigma_tot"),
        },
        "power-law" => CrossSectionModel::PowerLaw {
            c: config.f64("power_c"),
            a: config.f64("power_a"),
        },
        "swave" => CrossSectionModel::SWave {
            length: config.f64("scattering_length"),
        },
        _ => CrossSectionModel::Born(Potential::Gaussian {
            v0: config.f64("potential_v0"),
            r0: config.f64("potential_r0"),
        }),
    }
}

fn internal_collision(config: &ExperimentConfig) -> Result<Collision> {
    let gas = GasSpec::mb(config.f64("n_gas"), 1.0, 2.0);
    Ok(Collision::new(
        model_from(config),
        gas,
        ParticleSpec::new(1.0 / config.f64("mass_ratio")),
        1.0,
    )?)
}

fn decohere_position(config: &ExperimentConfig) -> Result<Outcome> {
    let spec = DecoherenceSpec::new(internal_collision(config)?, None);
    let gamma = spec.gamma_tot()?;
    let n_s = config.u64("n_s") as usize;
    let s_max = config.f64("s_max");
    let n_max = config.u64("n_max") as usize;
    let mut table = Table::new([
        ("s", "hbar/p_beta"),
        ("t", "internal time"),
        ("phi", "1"),
        ("coherence", "1"),
        ("coherence_jump_expansion", "1"),
    ]);
    let mut max_gap: f64 = 0.0;
    for i in 0..n_s {
        let s = s_max * i as f64 / (n_s - 1) as f64;
        let phi = spec.decoherence_function(s)?;
        for &t in config.list("times") {
            let closed = coherence_factor(gamma, phi, t);
            let series = jump_expansion(gamma * t, phi, n_max);
            max_gap = max_gap.max((closed - series).abs());
            table.push(vec![s, t, phi, closed, series]);
        }
    }
    Ok(Outcome {
        table,
        results: json!({
            "model": config.word("model"),
            "gamma_tot": gamma,
            "mass_ratio_warning": spec.mass_ratio_warning(),
            "max_jump_expansion_gap": max_gap,
        }),
    })
}

fn visibility(config: &ExperimentConfig) -> Result<Outcome> {
    let (setup, pressures, p_unit) = match config.units {
        Units::Internal => (
            VisibilitySetup {
                kb: 1.0,
                temperature: 0.5,
                m_gas: 1.0,
                c6: config.f64("c6"),
                hbar: 1.0,
                big_m: config.f64("particle_mass"),
                p0: config.f64("beam_momentum"),
                flight_time: config.f64("flight_time"),
                v0: config.f64("visibility0"),
            },
            config.list("pressures").to_vec(),
            "internal pressure",
        ),
        Units::Si => {
            let big_m = config.f64("particle_mass_amu") * AMU_SI;
            (
                VisibilitySetup {
                    kb: KB_SI,
                    temperature: config.f64("temperature_k"),
                    m_gas: config.f64("gas_mass_amu") * AMU_SI,
                    c6: config.f64("c6_j_m6"),
                    hbar: HBAR_SI,
                    big_m,
                    p0: big_m * config.f64("beam_velocity_m_s"),
                    flight_time: config.f64("flight_time_s"),
                    v0: config.f64("visibility0"),
                },
                config.list("pressures_pa").to_vec(),
                "Pa",
            )
        }
    };
    setup.validate()?;
    let mut table = Table::new([
        ("pressure", p_unit),
        ("density", "1/volume"),
        ("visibility", "1"),
        ("ln_visibility", "1"),
    ]);
    for &p in &pressures {
        table.push(vec![p, setup.density(p), setup.visibility(p)?, setup.ln_visibility(p)?]);
    }
    Ok(Outcome {
        table,
        results: json!({
            "scaled_momentum": setup.scaled_momentum(),
            "critical_pressure": setup.critical_pressure()?,
            "rate_per_density": setup.rate_per_density()?,
            "rate_per_density_truncated": setup.rate_per_density_truncated(),
            "rate_per_density_quadrature": setup.rate_per_density_quadrature()?,
        }),
    })
}

fn refraction(config: &ExperimentConfig) -> Result<Outcome> {
    let c = internal_collision(config)?;
    let mut table = Table::new([
        ("k", "p_beta/hbar"),
        ("n_re", "1"),
        ("n_im", "1"),
        ("f3d_re", "hbar/p_beta"),
        ("f3d_im", "hbar/p_beta"),
        ("f1d_re", "hbar/p_beta"),
        ("f1d_im", "hbar/p_beta"),
        ("n2_from_loss", "1"),
    ]);
    let mut max_dual: f64 = 0.0;
    for &k in config.list("k_list") {
        let p = [0.0, 0.0, c.hbar * k];
        let f3 = thermal_forward_average(&c, p)?;
        let f1 = thermal_forward_average_1d(&c, p)?;
        max_dual = max_dual.max((f3 - f1).norm() / f3.norm());
        let n = refraction_index(&c, k)?;
        let n2 = refraction_n2_from_loss(&c, k)?;
        table.push(vec![k, n.re, n.im, f3.re, f3.im, f1.re, f1.im, n2]);
    }
    Ok(Outcome {
        table,
        results: json!({
            "model": config.word("model"),
            "max_relative_dual_path_gap": max_dual,
        }),
    })
}

fn structure_factor(config: &ExperimentConfig) -> Result<Outcome> {
    let z = config.f64("fugacity");
    let statistics = match config.word("statistics") {
        "be" => Statistics::BoseEinstein { z },
        "fd" => Statistics::FermiDirac { z },
        _ => Statistics::MaxwellBoltzmann,
    };
    let mut gas = GasSpec {
        n_gas: 1.0,
        m: 1.0,
        beta: 2.0,
        statistics,
    };
    gas.n_gas = if config.has("n_gas") {
        config.f64("n_gas")
    } else if matches!(statistics, Statistics::MaxwellBoltzmann) {
        1.0
    } else {
        ideal_gas_density(&gas, 1.0)?
    };
    let n_e = config.u64("n_e") as usize;
    let (lo, hi) = (config.f64("e_min"), config.f64("e_max"));
    let mut table = Table::new([
        ("q", "p_beta"),
        ("e", "p_beta^2/m"),
        ("s", "1/energy"),
        ("s_mb", "1/energy"),
        ("detailed_balance_residual", "1"),
    ]);
    let mut worst: f64 = 0.0;
    for &q in config.list("q_list") {
        for i in 0..n_e {
            let e = lo + (hi - lo) * i as f64 / (n_e - 1) as f64;
            let r = detailed_balance_residual(q, e, &gas, 1.0)?;
            worst = worst.max(r);
            table.push(vec![q, e, s_bf(q, e, &gas, 1.0)?, s_mb(q, e, &gas)?, r]);
        }
    }
    Ok(Outcome {
        table,
        results: json!({
            "statistics": config.word("statistics"),
            "n_gas": gas.n_gas,
            "max_detailed_balance_residual": worst,
        }),
    })
}

fn brownian_check(config: &ExperimentConfig) -> Result<Outcome> {
    let (beta, hbar) = (2.0, 1.0);
    let eta = config.f64("eta");
    let big_m = config.f64("particle_mass");
    let d = diffusion_coefficients(eta, beta, big_m, hbar)?;
    let params = FrictionlessParams {
        d_pp: d.d_pp,
        d_xx: d.d_xx,
        big_m,
        hbar,
    };
    let packet = Gaussian::packet(0.0, config.f64("packet_p0"), config.f64("packet_sigma"), hbar)?;
    let state = GaussianSum::new(vec![packet])?;
    let centre = config.f64("p_center");
    let mut table = Table::new([
        ("t", "internal time"),
        ("k", "1/length"),
        ("rho_re", "1/momentum"),
        ("rho_im", "1/momentum"),
        ("rho_abs", "1/momentum"),
        ("position_diffusion_factor", "1"),
        ("momentum_diffusion_factor", "1"),
    ]);
    for &t in config.list("times") {
        for &k in config.list("k_offsets") {
            let dp = hbar * k;
            let rho = state.momentum_element(centre + dp / 2.0, centre - dp / 2.0, t, &params)?;
            table.push(vec![
                t,
                k,
                rho.re,
                rho.im,
                rho.norm(),
                (-d.d_xx * k * k * t).exp(),
                (-d.d_pp * k * k * t.powi(3) / (12.0 * big_m * big_m)).exp(),
            ]);
        }
    }
    let product = d.d_xx * d.d_pp;
    let target = eta * eta * hbar * hbar / 16.0;
    Ok(Outcome {
        table,
        results: json!({
            "d_pp": d.d_pp,
            "d_xx": d.d_xx,
            "product": product,
            "eta_sq_hbar_sq_over_16": target,
            "relative_deviation": (product - target) / target,
            "crossover_time": crossover_time(beta, hbar),
        }),
    })
}
