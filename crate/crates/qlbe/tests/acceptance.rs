use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use qlbe::ensemble::run_ensemble;
use qlbe::{execute, parse_config, run, RunOptions};
use qlbe_core::brownian::{diffusion_coefficients, friction_coefficient};
use qlbe_core::classical_lbe::{self, entropy_series};
use qlbe_core::decoherence::{coherence_factor, jump_expansion, DecoherenceSpec, VisibilitySetup};
use qlbe_core::qlbe_generator::{
    apply_generator, quantum_gain_kernel, refraction_index, refraction_n2_from_loss, thermal_forward_average,
    thermal_forward_average_1d, DensityMatrixGrid, GeneratorOptions,
};
use qlbe_core::scattering::{Collision, CrossSectionModel, GasSpec, Potential, Statistics};
use qlbe_core::special::{f_m12_32, f_m12_52, f_m32_32};
use qlbe_core::structure_factor::{s_bf, s_mb};
use qlbe_core::trajectory::{jump_density, sample_k_xi, stream, Engine, SuperpositionState};
use qlbe_core::vec3;
use serde_json::Value;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// `₁F₁(a, c; −x²) = e^{−x²} Σ (c−a)_n x^{2n} / ((c)_n n!)`, all terms positive.
fn kummer_negative(a: f64, c: f64, x: f64) -> f64 {
    let (b, y) = (c - a, x * x);
    let (mut term, mut sum) = (1.0f64, 1.0f64);
    for n in 0..2000 {
        let n = n as f64;
        term *= (b + n) * y / ((c + n) * (n + 1.0));
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    (-y).exp() * sum
}

fn config(text: &str) -> qlbe::ExperimentConfig {
    parse_config(text).expect("acceptance configuration is valid")
}

fn results(text: &str) -> Value {
    execute(&config(text), None).expect("experiment runs").results
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap_or(f64::NAN)
}

fn special_functions() -> Verdict {
    let mut worst = 0.0f64;
    for x in linspace(0.0, 8.0, 100) {
        for (closed, a, c) in [
            (f_m12_32(x), -0.5, 1.5),
            (f_m12_52(x), -0.5, 2.5),
            (f_m32_32(x), -1.5, 1.5),
        ] {
            worst = worst.max(rel(closed, kummer_negative(a, c, x)));
        }
    }
    verdict(worst < 1e-10, format!("max rel err {worst:.2e}"))
}

fn friction_integral() -> Verdict {
    let mut worst = 0.0f64;
    for ratio in [0.05, 0.2, 1.0, 3.0] {
        let c = Collision::internal(CrossSectionModel::Constant { sigma_tot: 1.7 }, ratio).unwrap();
        let gamma_beta = c.gas.n_gas * 1.7 * c.gas.v_beta();
        let closed = 8.0 / (3.0 * PI.sqrt()) * ratio * gamma_beta;
        worst = worst.max(rel(friction_coefficient(&c).unwrap(), closed));
    }
    verdict(worst < 1e-8, format!("max rel err {worst:.2e}"))
}

fn equilibration() -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for ratio in [1.0, 0.5] {
        let r = results(&format!(
            "schema = 1\nexperiment = thermalize\nseed = 101\nmass_ratio = {ratio}\nu0 = 4, 0, 0\nn_traj = 5000\nt_max = 30\nn_samples = 2\n"
        ));
        let target = 1.5 * ratio;
        let (u2, se) = (num(&r["final_mean_u_sq"]), num(&r["final_mean_u_sq_se"]));
        let dev = (u2 - target).abs();
        ok &= dev < (3.0 * se).max(0.05 * target);
        let mut worst_sigma = 0.0f64;
        for i in 0..3 {
            let m = num(&r["final_mean_u"][i]);
            let s = num(&r["final_mean_u_se"][i]);
            worst_sigma = worst_sigma.max(m.abs() / s);
        }
        ok &= worst_sigma < 3.0;
        parts.push(format!("m/M={ratio}: <U^2>={u2:.4}±{se:.4} (target {target}), max |<U_i>|/se={worst_sigma:.2}"));
    }
    verdict(ok, parts.join("; "))
}

fn relax_fits(ratio: f64, t_max: f64, n_samples: usize) -> Value {
    results(&format!(
        "schema = 1\nexperiment = relax-moments\nseed = 202\nmass_ratio = {ratio}\nu0 = 4, 0, 0\nn_traj = 5000\nt_max = {t_max}\nn_samples = {n_samples}\n"
    ))
}

fn diffusive_relaxation() -> Verdict {
    let light = relax_fits(0.2, 10.0, 41);
    let two_eta = 16.0 / (3.0 * PI.sqrt()) * 0.2;
    let r1 = num(&light["fit_mean_u_squared"]["rate"]);
    let r2 = num(&light["fit_mean_u_sq_excess"]["rate"]);
    let d1 = (r1 - two_eta) / two_eta;
    let d2 = (r2 - two_eta) / two_eta;
    let light_ok = d1.abs() < 0.1 && d2.abs() < 0.1;

    let equal = relax_fits(1.0, 3.0, 31);
    let (a, sa) = (num(&equal["fit_mean_u_squared"]["rate"]), num(&equal["fit_mean_u_squared"]["rate_se"]));
    let (b, sb) = (num(&equal["fit_mean_u_sq_excess"]["rate"]), num(&equal["fit_mean_u_sq_excess"]["rate_se"]));
    let sigmas = (a - b).abs() / (sa * sa + sb * sb).sqrt();
    verdict(
        light_ok && sigmas > 3.0,
        format!(
            "m/M=0.2: rates {r1:.4} ({d1:+.1}%), {r2:.4} ({d2:+.1}%) vs 2eta={two_eta:.4}; m/M=1: {a:.3}±{sa:.3} vs {b:.3}±{sb:.3} ({sigmas:.1} sigma)",
            d1 = 100.0 * d1,
            d2 = 100.0 * d2
        ),
    )
}

fn momentum_decoherence() -> Verdict {
    let r = results(
        "schema = 1\nexperiment = decohere-momentum\nseed = 303\nmass_ratio = 1\nu0_list = 1, 2, 4\nn_traj = 2000\ndecay_lengths = 3\nn_samples = 31\n",
    );
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for item in r["decoherence"].as_array().expect("decoherence results") {
        let d = num(&item["relative_deviation"]);
        worst = worst.max(d.abs());
        parts.push(format!("U0={}: {:+.2}%", item["u0"], 100.0 * d));
    }
    verdict(worst < 0.05, parts.join(", "))
}

fn detailed_balance() -> Verdict {
    let beta = 2.0;
    let qs = linspace(0.05, 5.0, 50);
    let es = linspace(-5.0, 5.0, 50);
    let residual = |s: &dyn Fn(f64, f64) -> f64| {
        let mut worst = 0.0f64;
        for &q in &qs {
            for &e in &es {
                let (a, b) = (s(q, e), (-beta * e).exp() * s(q, -e));
                let scale = a.abs().max(b.abs());
                if scale > 0.0 {
                    worst = worst.max((a - b).abs() / scale);
                }
            }
        }
        worst
    };
    let mb = GasSpec::mb(1.0, 1.0, beta);
    let quantum = |statistics| GasSpec { n_gas: 1.0, m: 1.0, beta, statistics };
    let be = quantum(Statistics::BoseEinstein { z: 0.5 });
    let fd = quantum(Statistics::FermiDirac { z: 2.0 });
    let r_mb = residual(&|q, e| s_mb(q, e, &mb).unwrap());
    let r_be = residual(&|q, e| s_bf(q, e, &be, 1.0).unwrap());
    let r_fd = residual(&|q, e| s_bf(q, e, &fd, 1.0).unwrap());

    let c = Collision::internal(CrossSectionModel::Constant { sigma_tot: 1.0 }, 0.5).unwrap();
    let mut r_cl = 0.0f64;
    let axis = linspace(-2.0, 2.0, 5);
    for &px in &axis {
        for &qx in &axis {
            for &qy in &axis {
                let p = [px, 0.3 * px - 0.2, 0.7];
                let q = [qx, qy, 0.4 - 0.1 * qx];
                r_cl = r_cl.max(classical_lbe::detailed_balance_residual(&c, p, q).unwrap());
            }
        }
    }
    verdict(
        r_mb < 1e-12 && r_be < 1e-10 && r_fd < 1e-10 && r_cl < 1e-10,
        format!("MB {r_mb:.1e}, BE(z=0.5) {r_be:.1e}, FD(z=2) {r_fd:.1e}, classical {r_cl:.1e}"),
    )
}

fn complete_positivity() -> Verdict {
    let mut worst = 0.0f64;
    for (eta, beta, m, hbar) in [(0.01, 2.0, 100.0, 1.0), (1.3, 0.4, 7.0, 0.5), (25.0, 9.0, 0.3, 2.2)] {
        let d = diffusion_coefficients(eta, beta, m, hbar).unwrap();
        worst = worst.max(rel(d.d_xx * d.d_pp, eta * eta * hbar * hbar / 16.0));
    }
    verdict(worst < 1e-12, format!("max rel err {worst:.1e}"))
}

fn h_theorem() -> Verdict {
    let ratio = 1.0;
    let eng = Engine::new(ratio).unwrap();
    let times = linspace(0.0, 6.0, 13);
    let recs = run_ensemble(&eng, &SuperpositionState::eigenstate([4.0, 0.0, 0.0]), 0, 10_000, &times, 404).unwrap();
    let samples: Vec<Vec<_>> = (0..times.len())
        .map(|k| recs.iter().map(|r| r.snapshots[k].momenta[0]).collect())
        .collect();
    let series = entropy_series(&samples, ratio, 200, &mut stream(404, u64::MAX)).unwrap();
    let bad = series.increases(3.0);
    let worst = (0..series.step_se.len())
        .map(|k| (series.h[k + 1] - series.h[k]) / series.step_se[k])
        .fold(f64::NEG_INFINITY, f64::max);
    verdict(
        bad.is_empty(),
        format!(
            "H {:.3} -> {:.4}, largest step {worst:.2} sigma, increases at {bad:?}",
            series.h[0],
            series.h[series.h.len() - 1]
        ),
    )
}

fn visibility_model() -> Verdict {
    let setup = VisibilitySetup {
        kb: 1.0,
        temperature: 0.5,
        m_gas: 1.0,
        c6: 1.0,
        hbar: 1.0,
        big_m: 100.0,
        p0: 10.0,
        flight_time: 1.0,
        v0: 0.8,
    };
    let u = setup.scaled_momentum();
    let lnv0 = setup.ln_visibility(0.0).unwrap();
    let slope = -1.0 / setup.critical_pressure().unwrap();
    let mut lin = 0.0f64;
    for p in linspace(0.0, 0.05, 21) {
        let v = setup.ln_visibility(p).unwrap();
        lin = lin.max((v - (lnv0 + slope * p)).abs() / v.abs().max(1.0));
    }
    let full = setup.rate_per_density().unwrap();
    let trunc = rel(setup.rate_per_density_truncated(), full);
    let quad = rel(setup.rate_per_density_quadrature().unwrap(), full);
    verdict(
        lin < 8.0 * f64::EPSILON && trunc < u.powi(4) && quad < 1e-3,
        format!("linearity {lin:.1e}, truncation {trunc:.2e} (bound {:.0e}), quadrature {quad:.2e}", u.powi(4)),
    )
}

fn pure_decoherence() -> Verdict {
    let models = [
        CrossSectionModel::Constant { sigma_tot: 1.0 },
        CrossSectionModel::Born(Potential::Gaussian { v0: -0.5, r0: 1.0 }),
    ];
    let mut gap = 0.0f64;
    let mut bounded = true;
    let mut unit = true;
    for model in models {
        let spec = DecoherenceSpec::new(Collision::internal(model, 0.001).unwrap(), None);
        let gamma = spec.gamma_tot().unwrap();
        let t = 3.0 / gamma;
        unit &= spec.decoherence_function(0.0).unwrap() == 1.0;
        for s in linspace(0.0, 10.0, 41) {
            let phi = spec.decoherence_function(s).unwrap();
            bounded &= phi.abs() <= 1.0 + 1e-12;
            gap = gap.max((coherence_factor(gamma, phi, t) - jump_expansion(gamma * t, phi, 30)).abs());
        }
    }
    verdict(gap < 1e-8 && bounded && unit, format!("max gap {gap:.1e}, Phi(0)=1 {unit}, |Phi|<=1 {bounded}"))
}

/// Composite Simpson rule on `[a, b]` with `n` (even) intervals.
fn simpson<F: Fn(f64) -> f64>(a: f64, b: f64, n: usize, f: F) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + i as f64 * h);
    }
    s * h / 3.0
}

fn jump_sampler() -> Verdict {
    let n = 100_000;
    let mut worst = 0.0f64;
    for (ui, u) in [0.0f64, 1.0, 4.0].into_iter().enumerate() {
        let k_max = 2.0 * (u + 7.0);
        let moment = |g: &dyn Fn(f64, f64) -> f64| {
            simpson(-1.0, 1.0, 400, |xi| simpson(0.0, k_max, 2000, |k| g(k, xi) * jump_density(k, xi, u)))
        };
        let norm = moment(&|_, _| 1.0);
        let oracle = [
            moment(&|k, _| k) / norm,
            moment(&|k, xi| k * xi) / norm,
            moment(&|k, _| k * k) / norm,
        ];
        let mut rng = stream(505, ui as u64);
        let mut sum = [0.0; 3];
        let mut sq = [0.0; 3];
        for _ in 0..n {
            let (k, xi) = sample_k_xi(u, &mut rng).unwrap();
            for (j, v) in [k, k * xi, k * k].into_iter().enumerate() {
                sum[j] += v;
                sq[j] += v * v;
            }
        }
        for j in 0..3 {
            let mean = sum[j] / n as f64;
            let var = sq[j] / n as f64 - mean * mean;
            let se = (var / (n - 1) as f64).sqrt();
            worst = worst.max((mean - oracle[j]).abs() / se);
        }
    }
    verdict(worst < 3.0, format!("largest deviation {worst:.2} sigma over 9 moments"))
}

fn generator_oracle() -> Verdict {
    let ratio = 1.0;
    let c = Collision::internal(CrossSectionModel::Constant { sigma_tot: 1.0 }, ratio).unwrap();
    let (n, h) = (7, 0.5);
    let big_m = c.particle.mass;
    let thermal = DensityMatrixGrid::diagonal(n, h, |p| (-vec3::dot(p, p) / big_m).exp()).unwrap();
    let d = thermal.dim();
    let typical = c.loss_rate([0.0; 3]).unwrap();
    let opts = GeneratorOptions { hamiltonian: false };

    let out = apply_generator(&thermal, &c, opts).unwrap();
    let stationary = (0..d).map(|i| out.drho.get(i, i).norm()).fold(0.0, f64::max) / typical;

    // Classical master equation on the same grid from pairwise rates.
    let h3 = h * h * h;
    let mut diag = 0.0f64;
    let shaped = DensityMatrixGrid::diagonal(n, h, |p| (-(p[0] - 0.5).powi(2) - 2.0 * p[1] * p[1] - p[2] * p[2]).exp()).unwrap();
    let out_shaped = apply_generator(&shaped, &c, opts).unwrap();
    for i in 0..d {
        let pi = shaped.momentum(i);
        let mut rate = 0.0;
        for j in 0..d {
            if i != j {
                let pj = shaped.momentum(j);
                rate += (c.gain_rate(pj, vec3::sub(pi, pj)).unwrap() * shaped.get(j, j).re
                    - c.gain_rate(pi, vec3::sub(pj, pi)).unwrap() * shaped.get(i, i).re)
                    * h3;
            }
        }
        diag = diag.max((out_shaped.drho.get(i, i).re - rate).abs() / typical);
    }

    let pure = DensityMatrixGrid::pure(n, h, |p| {
        Complex64::from_polar((-(vec3::dot(p, p)) / 1.5).exp(), 0.7 * p[0] - 0.3 * p[1] * p[2])
    })
    .unwrap();
    let out_pure = apply_generator(&pure, &c, opts).unwrap();
    let trace = out_pure.drho.trace().norm().max(out_shaped.drho.trace().norm()) / typical;
    let herm = out_pure.drho.hermiticity_defect() / typical;
    let mut kernel_herm = 0.0f64;
    for (p, pp, q) in [([0.3, -0.2, 0.5], [-0.4, 0.1, 0.2], [0.5, 0.5, -1.0]), ([1.0, 0.0, 0.0], [0.0, 1.0, 0.5], [0.2, -0.3, 0.4])] {
        let a = quantum_gain_kernel(&c, p, pp, q).unwrap();
        let b = quantum_gain_kernel(&c, pp, p, q).unwrap();
        kernel_herm = kernel_herm.max((a - b.conj()).norm());
    }
    verdict(
        diag < 1e-12 && trace < 1e-12 && herm < 1e-14 && kernel_herm == 0.0 && stationary < 1e-6,
        format!(
            "diagonal vs classical {diag:.1e}, trace {trace:.1e}, hermiticity {herm:.1e} (kernel {kernel_herm:.0e}), thermal residual {stationary:.1e}"
        ),
    )
}

fn refraction_consistency() -> Verdict {
    let born = Collision::internal(CrossSectionModel::Born(Potential::Gaussian { v0: -0.5, r0: 1.0 }), 0.1).unwrap();
    let mut dual = 0.0f64;
    for p in [[0.0, 0.0, 0.5], [0.0, 3.0, 4.0], [20.0, 0.0, 0.0]] {
        let a = thermal_forward_average(&born, p).unwrap();
        let b = thermal_forward_average_1d(&born, p).unwrap();
        dual = dual.max((a - b).norm() / a.norm());
    }
    let swave = Collision::internal(CrossSectionModel::SWave { length: 0.5 }, 0.1).unwrap();
    let mut n2 = 0.0f64;
    for k in [1.0, 10.0, 50.0] {
        let a = refraction_index(&swave, k).unwrap().im;
        n2 = n2.max(rel(a, refraction_n2_from_loss(&swave, k).unwrap()));
    }
    verdict(dual < 1e-8 && n2 < 1e-8, format!("3D vs 1D {dual:.1e}, n2 routes {n2:.1e}"))
}

fn determinism() -> Verdict {
    let configs = [
        "experiment = thermalize\nn_traj = 300\nn_samples = 11\nt_max = 5",
        "experiment = relax-moments\nn_traj = 300\nn_samples = 11\nt_max = 5",
        "experiment = decohere-momentum\nn_traj = 300\nn_samples = 11",
        "experiment = decohere-position\nn_s = 11",
        "experiment = visibility",
        "experiment = refraction",
        "experiment = structure-factor\nstatistics = be",
        "experiment = brownian-check",
    ];
    let dir = tempfile::tempdir().expect("temporary directory");
    let mut mismatched = Vec::new();
    for text in configs {
        let cfg = config(&format!("schema = 1\nseed = 606\n{text}\n"));
        let bytes: Vec<String> = [Some(1), Some(4), Some(1)]
            .into_iter()
            .enumerate()
            .map(|(i, threads)| {
                let opts = RunOptions {
                    threads,
                    out_dir: Some(dir.path().join(format!("{}-{i}", cfg.kind.name()))),
                };
                run(&cfg, &opts).expect("experiment runs").csv
            })
            .collect();
        if bytes.iter().any(|b| b != &bytes[0]) {
            mismatched.push(cfg.kind.name());
        }
    }
    verdict(mismatched.is_empty(), format!("8 experiments, threads 1/4/1, mismatches {mismatched:?}"))
}

fn main() -> ExitCode {
    type Check = fn() -> Verdict;
    let criteria: [(&str, Check, u64); 14] = [
        ("special functions", special_functions, 1),
        ("friction integral", friction_integral, 1),
        ("equilibration", equilibration, 120),
        ("diffusive relaxation", diffusive_relaxation, 180),
        ("momentum decoherence", momentum_decoherence, 120),
        ("detailed balance", detailed_balance, 1),
        ("complete positivity", complete_positivity, 1),
        ("H-theorem", h_theorem, 120),
        ("visibility model", visibility_model, 5),
        ("pure decoherence", pure_decoherence, 5),
        ("jump sampler", jump_sampler, 10),
        ("generator oracle", generator_oracle, 30),
        ("refraction consistency", refraction_consistency, 5),
        ("determinism", determinism, 120),
    ];
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let pass = v.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<24} {} [{:.2}s/{}s] {}",
            i + 1,
            name,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit,
            v.detail
        );
    }
    println!("acceptance: {} of 14 criteria passed", 14 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
