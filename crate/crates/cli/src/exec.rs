//! Execute one run configuration against the library and build its table.

use rabi_ncho::error::{Error, Result};
use rabi_ncho::feynman_kac::{
    fk_ground_energy, fk_matrix_element, ground_test_vector, positivity_scan,
    spectral_matrix_element, TestVector,
};
use rabi_ncho::fiber::{reconstruct_ncho_spectrum, verify_fiber, weighted_gram_check, FiberFamily};
use rabi_ncho::fock::SectorLabel;
use rabi_ncho::model::{ModelFamily, ModelSpec};
use rabi_ncho::perturbation::{coeffs_1p, coeffs_2p, concavity_check, ncho_lambda0_series, xi};
use rabi_ncho::spectral::{converged_spectrum, ground_sector, symmetry_checks};
use rabi_ncho::zeta::{
    hurwitz_zeta, spectral_zeta, zeta_limit_2p, zeta_limit_ncho, Limit2p, TailModel,
};

use crate::config::{Command, RunConfig};
use crate::output::{boolean, int, num, text, Table};

pub fn execute(cfg: &RunConfig) -> Result<Table> {
    let mut table = match cfg.command {
        Command::Spectrum => spectrum(cfg)?,
        Command::Perturb => perturb(cfg)?,
        Command::Fk => fk(cfg)?,
        Command::Zeta => zeta(cfg)?,
        Command::Fiber => fiber(cfg)?,
        Command::Sector => sector(cfg)?,
        Command::Symcheck => symcheck(cfg)?,
    };
    // shared metadata header, prepended in a fixed order
    let mut meta = vec![
        ("tool".to_string(), format!("rabi-ncho {}", env!("CARGO_PKG_VERSION"))),
        ("command".to_string(), cfg.command.name().to_string()),
        ("family".to_string(), cfg.family.name().to_string()),
        ("seed".to_string(), cfg.seed.to_string()),
        ("tol".to_string(), cfg.tol.to_string()),
    ];
    meta.extend(table.metadata.drain(..));
    table.metadata = meta;
    Ok(table)
}

fn model_meta(table: &mut Table, m: &ModelSpec<f64>) {
    match m.family {
        ModelFamily::Rabi2p | ModelFamily::Rabi1p | ModelFamily::Rak => {
            table.meta("delta", m.delta);
            table.meta("g", m.g);
        }
        ModelFamily::Ncho | ModelFamily::Ncho1p | ModelFamily::KAlphaBeta => {
            table.meta("alpha", m.alpha);
            table.meta("beta", m.beta);
        }
        ModelFamily::QuadTs => {
            table.meta("t_coef", m.t_coef);
            table.meta("s_coef", m.s_coef);
        }
    }
}

fn spectrum(cfg: &RunConfig) -> Result<Table> {
    let m = cfg.model();
    let spec = converged_spectrum(&m, cfg.k, cfg.tol)?;
    let mut t = Table::new(&["index", "value", "multiplicity", "converged", "n_max", "tol"]);
    model_meta(&mut t, &m);
    t.meta("converged_count", spec.converged_count);
    for (i, &v) in spec.values.iter().take(cfg.k).enumerate() {
        t.row(vec![
            int(i),
            num(v),
            int(spec.multiplicity_at(i)),
            boolean(i < spec.converged_count),
            int(spec.n_max),
            num(cfg.tol),
        ]);
    }
    Ok(t)
}

fn perturb(cfg: &RunConfig) -> Result<Table> {
    match cfg.mode.as_str() {
        "" | "coeffs" => {
            let c = match cfg.family {
                ModelFamily::Rabi2p => coeffs_2p(cfg.delta)?,
                ModelFamily::Rabi1p => coeffs_1p(cfg.delta)?,
                ModelFamily::Ncho => ncho_lambda0_series(cfg.alpha, cfg.beta)?,
                other => {
                    return Err(Error::Unsupported(format!(
                        "no lowest-eigenvalue series for family {}",
                        other.name()
                    )))
                }
            };
            let mut t = Table::new(&["e0", "e2", "e4", "n_max", "tol"]);
            model_meta(&mut t, &cfg.model());
            t.row(vec![
                num(c.e0),
                num(c.e2),
                c.e4.map(num).unwrap_or(serde_json::Value::Null),
                int(0),
                num(0.0),
            ]);
            Ok(t)
        }
        "xi" => {
            let mut t = Table::new(&["u", "value", "ground_component", "n_max", "tol"]);
            let n_max = cfg.n_max.max(16);
            for &u in &cfg.s_grid {
                let e = xi(u, n_max)?;
                t.row(vec![num(u), num(e.value), num(e.ground_component), int(n_max), num(0.0)]);
            }
            Ok(t)
        }
        "concavity" => {
            // sample the lowest eigenvalue over the window and report the
            // second divided differences
            let lo = cfg.window_lo;
            let hi = cfg.window_hi;
            let steps = cfg.k.max(5);
            let mut pts = Vec::with_capacity(steps + 1);
            for i in 0..=steps {
                let g = lo + (hi - lo) * i as f64 / steps as f64;
                let m = match cfg.family {
                    ModelFamily::Rabi2p => ModelSpec::rabi2p(cfg.delta, g),
                    ModelFamily::Rabi1p => ModelSpec::rabi1p(cfg.delta, g),
                    ModelFamily::Ncho => {
                        let a = (cfg.alpha + cfg.beta) / 2.0;
                        ModelSpec::ncho(a - g, a + g)
                    }
                    other => {
                        return Err(Error::Unsupported(format!(
                            "no concavity scan for family {}",
                            other.name()
                        )))
                    }
                };
                pts.push((g, converged_spectrum(&m, 1, cfg.tol)?.values[0]));
            }
            let rep = concavity_check(&pts, 1e-5)?;
            let mut t = Table::new(&["g", "energy", "second_diff", "n_max", "tol"]);
            t.meta("concave", rep.concave);
            t.meta("max_violation", rep.max_violation);
            for (i, &(g, e)) in pts.iter().enumerate() {
                let sd = if i >= 1 && i + 1 < pts.len() {
                    num(rep.second_diffs[i - 1])
                } else {
                    serde_json::Value::Null
                };
                t.row(vec![num(g), num(e), sd, int(0), num(cfg.tol)]);
            }
            Ok(t)
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown perturb mode '{other}' (coeffs, xi, concavity)"
        ))),
    }
}

fn fk_vector(cfg: &RunConfig, name: &str) -> Result<TestVector<f64>> {
    Ok(match name {
        "const" => TestVector::constant(),
        "up" => TestVector::spin_up(),
        "down" => TestVector::spin_down(),
        "x2" => TestVector::x_squared(),
        "ground" => ground_test_vector(&cfg.model(), 160)?,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown test vector '{other}' (const, up, down, x2, ground)"
            )))
        }
    })
}

fn fk(cfg: &RunConfig) -> Result<Table> {
    let m = cfg.model();
    match cfg.mode.as_str() {
        "" | "element" => {
            let f = fk_vector(cfg, &cfg.left)?;
            let g = fk_vector(cfg, &cfg.right)?;
            let est = fk_matrix_element(&m, &f, &g, cfg.t, cfg.n_samples, cfg.nodes, cfg.seed)?;
            let reference = spectral_matrix_element(&m, &f, &g, cfg.t, 200)?;
            let z = if est.std_error > 0.0 {
                (est.mean - reference) / est.std_error
            } else {
                0.0
            };
            let mut t = Table::new(&[
                "left", "right", "t", "mean", "std_error", "spectral", "z", "n_samples", "n_max", "tol",
            ]);
            model_meta(&mut t, &m);
            t.row(vec![
                text(&cfg.left),
                text(&cfg.right),
                num(cfg.t),
                num(est.mean),
                num(est.std_error),
                num(reference),
                num(z),
                int(est.n_samples),
                int(200),
                num(cfg.tol),
            ]);
            Ok(t)
        }
        "ground" => {
            let est = fk_ground_energy(&m, cfg.t, cfg.n_samples, cfg.nodes, cfg.seed, None)?;
            let mu0 = converged_spectrum(&m, 1, cfg.tol)?.values[0];
            let z = (est.mean - mu0) / est.std_error.max(f64::MIN_POSITIVE);
            let mut t = Table::new(&[
                "t", "energy", "std_error", "spectral", "z", "n_samples", "n_max", "tol",
            ]);
            model_meta(&mut t, &m);
            t.row(vec![
                num(cfg.t),
                num(est.mean),
                num(est.std_error),
                num(mu0),
                num(z),
                int(est.n_samples),
                int(160),
                num(cfg.tol),
            ]);
            Ok(t)
        }
        "positivity" => {
            let names = ["const", "up", "down", "x2"];
            let vectors: Vec<TestVector<f64>> = names
                .iter()
                .map(|n| fk_vector(cfg, n))
                .collect::<Result<_>>()?;
            let rep = positivity_scan(&m, &vectors, cfg.t, cfg.n_samples, cfg.nodes, cfg.seed)?;
            let mut t = Table::new(&[
                "left", "right", "mean", "std_error", "z", "positive", "inconclusive", "n_samples", "tol",
            ]);
            model_meta(&mut t, &m);
            t.meta("min_z", rep.min_z);
            for r in &rep.rows {
                t.row(vec![
                    text(names[r.left]),
                    text(names[r.right]),
                    num(r.estimate.mean),
                    num(r.estimate.std_error),
                    num(r.z),
                    boolean(r.conclusive_positive),
                    boolean(r.inconclusive),
                    int(cfg.n_samples),
                    num(cfg.tol),
                ]);
            }
            Ok(t)
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown fk mode '{other}' (element, ground, positivity)"
        ))),
    }
}

fn zeta(cfg: &RunConfig) -> Result<Table> {
    match cfg.mode.as_str() {
        "" | "value" => {
            let m = cfg.model();
            let spec = converged_spectrum(&m, cfg.k, cfg.tol)?;
            let mut t = Table::new(&["s", "value", "tail_bound", "head_terms", "n_max", "tol"]);
            model_meta(&mut t, &m);
            for &s in &cfg.s_grid {
                let z = spectral_zeta(&spec, s, TailModel::default())?;
                t.row(vec![
                    num(s),
                    num(z.value),
                    num(z.tail_bound),
                    int(z.tail_terms),
                    int(spec.n_max),
                    num(cfg.tol),
                ]);
            }
            Ok(t)
        }
        "hurwitz" => {
            let mut t = Table::new(&["s", "tau", "value", "remainder_bound", "n_max", "tol"]);
            for &s in &cfg.s_grid {
                let z = hurwitz_zeta(s, cfg.tau)?;
                t.row(vec![num(s), num(cfg.tau), num(z.value), num(z.tail_bound), int(0), num(0.0)]);
            }
            Ok(t)
        }
        "limit-delta" | "limit-g" | "limit-beta" => {
            if cfg.sequence.is_empty() {
                return Err(Error::InvalidArgument(
                    "limit modes need a 'sequence' of parameters".into(),
                ));
            }
            let s = *cfg.s_grid.first().unwrap_or(&2.0);
            let table = match cfg.mode.as_str() {
                "limit-delta" => {
                    zeta_limit_2p(s, Limit2p::DeltaToZero { g: cfg.g }, &cfg.sequence, cfg.k, cfg.tol)?
                }
                "limit-g" => zeta_limit_2p(
                    s,
                    Limit2p::GToZero { delta: cfg.delta },
                    &cfg.sequence,
                    cfg.k,
                    cfg.tol,
                )?,
                _ => zeta_limit_ncho(s, cfg.alpha, &cfg.sequence, cfg.k, cfg.tol)?,
            };
            let mut t = Table::new(&["param", "zeta", "distance", "limit", "n_max", "tol"]);
            model_meta(&mut t, &cfg.model());
            t.meta("s", s);
            t.meta("limit", table.limit);
            for row in &table.rows {
                t.row(vec![
                    num(row.param),
                    num(row.zeta),
                    num(row.distance),
                    num(table.limit),
                    int(0),
                    num(cfg.tol),
                ]);
            }
            Ok(t)
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown zeta mode '{other}' (value, hurwitz, limit-delta, limit-g, limit-beta)"
        ))),
    }
}

fn fiber(cfg: &RunConfig) -> Result<Table> {
    let family = match cfg.family {
        ModelFamily::Ncho1p | ModelFamily::Rabi1p => FiberFamily::OnePhoton,
        _ => FiberFamily::TwoPhoton,
    };
    match cfg.mode.as_str() {
        "" | "verify" => {
            let rep = verify_fiber(cfg.alpha, cfg.beta, family, cfg.k_max, cfg.tol)?;
            let mut t = Table::new(&[
                "index", "lambda", "scaled", "distance", "mult_source", "mult_fiber", "pass", "n_max", "tol",
            ]);
            t.meta("alpha", cfg.alpha);
            t.meta("beta", cfg.beta);
            t.meta("all_pass", rep.all_pass);
            for l in &rep.levels {
                t.row(vec![
                    int(l.index),
                    num(l.lambda),
                    num(l.scaled),
                    num(l.distance),
                    int(l.mult_source),
                    int(l.mult_fiber),
                    boolean(l.pass),
                    int(rep.n_max),
                    num(cfg.tol),
                ]);
            }
            Ok(t)
        }
        "reconstruct" => {
            let roots =
                reconstruct_ncho_spectrum(cfg.alpha, cfg.beta, (cfg.window_lo, cfg.window_hi), cfg.tol)?;
            let mut t = Table::new(&["index", "lambda", "n_max", "tol"]);
            t.meta("alpha", cfg.alpha);
            t.meta("beta", cfg.beta);
            t.meta("window", format!("[{}, {}]", cfg.window_lo, cfg.window_hi));
            for (i, &r) in roots.iter().enumerate() {
                t.row(vec![int(i), num(r), int(0), num(cfg.tol)]);
            }
            Ok(t)
        }
        "gram" => {
            let rep = weighted_gram_check(cfg.alpha, cfg.beta, cfg.k_max)?;
            let mut t = Table::new(&[
                "max_gram_deviation", "max_cross_group", "max_norm_deviation", "k_max", "n_max", "tol",
            ]);
            t.meta("alpha", cfg.alpha);
            t.meta("beta", cfg.beta);
            t.row(vec![
                num(rep.max_gram_deviation),
                num(rep.max_cross_group),
                num(rep.max_norm_deviation),
                int(rep.k_max),
                int(rep.n_max),
                num(cfg.tol),
            ]);
            Ok(t)
        }
        other => Err(Error::InvalidArgument(format!(
            "unknown fiber mode '{other}' (verify, reconstruct, gram)"
        ))),
    }
}

fn sector(cfg: &RunConfig) -> Result<Table> {
    let m = ModelSpec::rabi2p(cfg.delta, cfg.g);
    let rep = ground_sector(&m, cfg.n_max)?;
    let mut t = Table::new(&["sector", "overlap", "dominant", "degeneracy", "n_max", "tol"]);
    model_meta(&mut t, &m);
    for (label, overlap) in SectorLabel::ALL.iter().zip(rep.overlaps.iter()) {
        t.row(vec![
            text(label.name()),
            num(*overlap),
            boolean(rep.dominant == Some(*label)),
            int(rep.degeneracy),
            int(cfg.n_max),
            num(cfg.tol),
        ]);
    }
    Ok(t)
}

fn symcheck(cfg: &RunConfig) -> Result<Table> {
    let m = cfg.model();
    let rep = symmetry_checks(&m, cfg.n_max, cfg.k)?;
    let mut t = Table::new(&["transform", "max_deviation", "k", "n_max", "tol"]);
    model_meta(&mut t, &m);
    for (label, dev) in &rep.checks {
        t.row(vec![text(label), num(*dev), int(cfg.k), int(cfg.n_max), num(cfg.tol)]);
    }
    Ok(t)
}
