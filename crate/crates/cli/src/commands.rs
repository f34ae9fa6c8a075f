use std::fmt::Write as _;
use std::net::SocketAddr;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use leafrf_core::discrete::{optimize_discrete, snap_network, ESeries, SearchOptions, SearchReport, ToleranceSpec};
use leafrf_core::ladder::{find_dip, load_impedance, s11_at, sweep_s11, Dip, LoadProfile, MatchingNetwork, SweepResult};
use leafrf_core::leafgeom::{build_leaf_pair, export_dxf, outline_metrics, GeometryError, LeafPair, LeafProfile, OutlineMetrics};
use leafrf_core::linksim::{distance_sweep, ChargeTank, LinkBudget, LinkError};
use leafrf_core::rfcore::{reflection_coefficient, s11_db, skin_depth, Frequency, MaterialSpec};
use leafrf_core::synth::match_and_verify;
use leafrf_core::units::{format_si, format_sig, parse_capacitance};
use leafrf_serve::api::SweepResponse;

use crate::inputs::{self, compute, input};
use crate::{Cli, CliError, Command, Format};

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let text = match &cli.command {
        Command::Match { load } => cmd_match(cli, &inputs::load(load)?)?,
        Command::Sweep { load, network, range } => {
            let p = inputs::load(load)?;
            let (z0, f0) = (inputs::z0(cli)?, inputs::f0(cli)?);
            let n = inputs::network(network, &p, z0, f0)?;
            cmd_sweep(cli, &n, &p, inputs::sweep_spec(range)?)?
        }
        Command::Snap { load, network, series, range } => {
            let p = inputs::load(load)?;
            let (z0, f0) = (inputs::z0(cli)?, inputs::f0(cli)?);
            let n = inputs::network(network, &p, z0, f0)?;
            cmd_snap(cli, &n, &p, series.parse().map_err(input)?, inputs::sweep_spec(range)?)?
        }
        Command::Optimize { load, network, series, k, runner_ups, tolerance, samples } => {
            let p = inputs::load(load)?;
            let (z0, f0) = (inputs::z0(cli)?, inputs::f0(cli)?);
            let n = inputs::network(network, &p, z0, f0)?;
            let opts = SearchOptions {
                series: series.parse().map_err(input)?,
                k: *k,
                runner_ups: *runner_ups,
                tolerance: tolerance.map(|percent| ToleranceSpec { percent, samples: *samples, seed: cli.seed }),
            };
            cmd_optimize(cli, &n, &p, opts)?
        }
        Command::Leaf { profile, dxf } => {
            let profile = match profile {
                Some(path) => inputs::read_json(path)?,
                None => LeafProfile::default(),
            };
            cmd_leaf(cli, &profile, dxf.as_deref())?
        }
        Command::Link { budget, capacitance, threshold, initial, from, to, step } => {
            let lb: LinkBudget = match budget {
                Some(path) => inputs::read_json(path)?,
                None => LinkBudget::default(),
            };
            let tank = ChargeTank {
                capacitance: parse_capacitance(capacitance).map_err(input)?,
                threshold_volts: *threshold,
                initial_volts: *initial,
            };
            let r = distance_sweep(&lb, &tank, *from, *to, *step).map_err(link_error)?;
            match cli.format {
                Format::Json => json(&r)?,
                Format::Csv => r.to_csv(),
                Format::Text => {
                    let mut s = format!("{:>10}  {:>14}  {:>12}\n", "distance_m", "received_w", "charge_s");
                    for row in &r.rows {
                        let _ = writeln!(
                            s,
                            "{:>10}  {:>14}  {:>12}",
                            format_sig(row.distance_m, 6),
                            format_sig(row.received_w, 6),
                            format_sig(row.charge_s, 6)
                        );
                    }
                    s
                }
            }
        }
        Command::Skin { material, rho, mu_r, freq } => {
            let f = match freq {
                Some(t) => inputs::frequency(t)?,
                None => inputs::f0(cli)?,
            };
            cmd_skin(cli, material, *rho, *mu_r, f)?
        }
        Command::Serve { port, expose, journal, ttl_hours, cors_origin } => {
            if !(ttl_hours.is_finite() && *ttl_hours > 0.0) {
                return Err(input(format!("--ttl-hours must be positive, got {ttl_hours}")));
            }
            let ip = if *expose { [0, 0, 0, 0] } else { [127, 0, 0, 1] };
            let config = leafrf_serve::ServeConfig {
                addr: SocketAddr::from((ip, *port)),
                ttl: Duration::from_secs_f64(ttl_hours * 3600.0),
                journal: journal.clone(),
                cors_origin: cors_origin.clone(),
                ..Default::default()
            };
            eprintln!("leafrf: serving on http://{}", config.addr);
            let rt = tokio::runtime::Runtime::new().map_err(compute)?;
            rt.block_on(leafrf_serve::serve(config)).map_err(compute)?;
            return Ok(());
        }
    };
    emit(cli, &text)
}

fn emit(cli: &Cli, text: &str) -> Result<(), CliError> {
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|e| input(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: Serialize>(v: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(v).map_err(compute)?;
    s.push('\n');
    Ok(s)
}

fn db(v: f64) -> String {
    format!("{v:.2} dB")
}

fn mhz(f: Frequency) -> String {
    format!("{} MHz", format_sig(f.hertz() / 1e6, 9))
}

fn network_specs(n: &MatchingNetwork) -> String {
    n.elements().iter().map(inputs::element_spec).collect::<Vec<_>>().join(";")
}

fn describe(n: &MatchingNetwork) -> String {
    if n.is_empty() {
        return "empty network".to_string();
    }
    n.elements().iter().map(|e| e.to_string()).collect::<Vec<_>>().join(", ")
}

fn cmd_match(cli: &Cli, p: &LoadProfile) -> Result<String, CliError> {
    let (z0, f0) = (inputs::z0(cli)?, inputs::f0(cli)?);
    let load = load_impedance(p, f0).map_err(compute)?;
    let sols = match_and_verify(p, z0, f0).map_err(compute)?;
    Ok(match cli.format {
        Format::Json => json(&sols)?,
        Format::Csv => {
            let mut s = String::from("rank,topology,elements,s11_db\n");
            for (i, sol) in sols.iter().enumerate() {
                let _ = writeln!(s, "{},{},{},{}", i + 1, sol.topology_label, network_specs(&sol.network), sol.achieved_s11_db);
            }
            s
        }
        Format::Text => {
            let start = s11_db(reflection_coefficient(load, z0).map_err(compute)?);
            let mut s = format!(
                "load {}{}{}j ohm at {} (z0 {} ohm), unmatched S11 {}\n",
                format_sig(load.resistance, 6),
                if load.reactance < 0.0 { "-" } else { "+" },
                format_sig(load.reactance.abs(), 6),
                mhz(f0),
                z0.ohms(),
                db(leafrf_core::rfcore::floor_db(start))
            );
            if sols.len() == 1 && sols[0].network.is_empty() {
                s.push_str("already matched: empty network\n");
                return Ok(s);
            }
            for (i, sol) in sols.iter().enumerate() {
                let _ = writeln!(s, "{}. {}: {}; S11 {}", i + 1, sol.topology_label, describe(&sol.network), db(sol.achieved_s11_db));
            }
            s
        }
    })
}

fn sweep(n: &MatchingNetwork, p: &LoadProfile, cli: &Cli, spec: leafrf_core::ladder::SweepSpec) -> Result<(SweepResult, Dip), CliError> {
    let r = sweep_s11(n, p, inputs::z0(cli)?, spec).map_err(compute)?;
    let dip = find_dip(&r).map_err(compute)?;
    Ok((r, dip))
}

fn cmd_sweep(cli: &Cli, n: &MatchingNetwork, p: &LoadProfile, spec: leafrf_core::ladder::SweepSpec) -> Result<String, CliError> {
    let (r, dip) = sweep(n, p, cli, spec)?;
    Ok(match cli.format {
        Format::Json => json(&SweepResponse { points: r.points, dip })?,
        Format::Csv => {
            let mut s = String::from("frequency_hz,gamma_re,gamma_im,s11_db\n");
            for pt in &r.points {
                let _ = writeln!(s, "{},{},{},{}", pt.frequency.hertz(), pt.gamma.re, pt.gamma.im, pt.s11_db);
            }
            s
        }
        Format::Text => {
            let mut s = format!("network: {}\n{:>14}  {:>9}\n", describe(n), "frequency_mhz", "s11_db");
            for pt in &r.points {
                let _ = writeln!(s, "{:>14}  {:>9.3}", format_sig(pt.frequency.hertz() / 1e6, 9), pt.s11_db);
            }
            let _ = writeln!(s, "dip: {} at {}", mhz(dip.frequency), db(dip.s11_db));
            s
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapReport {
    pub series: ESeries,
    pub ideal: MatchingNetwork,
    pub snapped: MatchingNetwork,
    pub ideal_s11_db: f64,
    pub snapped_s11_db: f64,
    pub ideal_dip: Dip,
    pub snapped_dip: Dip,
    pub dip_shift_hz: f64,
}

fn cmd_snap(cli: &Cli, n: &MatchingNetwork, p: &LoadProfile, series: ESeries, spec: leafrf_core::ladder::SweepSpec) -> Result<String, CliError> {
    let (z0, f0) = (inputs::z0(cli)?, inputs::f0(cli)?);
    let snapped = snap_network(n, series).map_err(compute)?;
    let (_, ideal_dip) = sweep(n, p, cli, spec)?;
    let (_, snapped_dip) = sweep(&snapped, p, cli, spec)?;
    let rep = SnapReport {
        series,
        ideal: n.clone(),
        snapped: snapped.clone(),
        ideal_s11_db: s11_at(n, p, z0, f0).map_err(compute)?,
        snapped_s11_db: s11_at(&snapped, p, z0, f0).map_err(compute)?,
        ideal_dip,
        snapped_dip,
        dip_shift_hz: snapped_dip.frequency.hertz() - ideal_dip.frequency.hertz(),
    };
    Ok(match cli.format {
        Format::Json => json(&rep)?,
        Format::Csv => {
            let mut s = String::from("index,placement,kind,ideal,snapped\n");
            for (i, (a, b)) in n.elements().iter().zip(snapped.elements()).enumerate() {
                let _ = writeln!(s, "{i},{},{},{},{}", a.placement(), a.kind().letter(), a.value(), b.value());
            }
            s
        }
        Format::Text => {
            let mut s = format!("{series:?} snap at {}\n", mhz(f0));
            for (a, b) in n.elements().iter().zip(snapped.elements()) {
                let _ = writeln!(s, "  {a} -> {}", format_si(b.value(), b.kind().unit()));
            }
            let _ = writeln!(s, "S11 at f0: {} ideal, {} snapped", db(rep.ideal_s11_db), db(rep.snapped_s11_db));
            let _ = writeln!(
                s,
                "dip: {} ideal, {} snapped (shift {} MHz, {}%)",
                mhz(ideal_dip.frequency),
                mhz(snapped_dip.frequency),
                format_sig(rep.dip_shift_hz / 1e6, 6),
                format_sig(100.0 * rep.dip_shift_hz / f0.hertz(), 4)
            );
            s
        }
    })
}

fn cmd_optimize(cli: &Cli, n: &MatchingNetwork, p: &LoadProfile, opts: SearchOptions) -> Result<String, CliError> {
    let (z0, f0) = (inputs::z0(cli)?, inputs::f0(cli)?);
    let rep: SearchReport = optimize_discrete(n, p, z0, f0, opts).map_err(|e| match e {
        leafrf_core::discrete::DiscreteError::CandidateCap { .. } | leafrf_core::discrete::DiscreteError::BadTolerance => input(e),
        other => compute(other),
    })?;
    Ok(match cli.format {
        Format::Json => json(&rep)?,
        Format::Csv => {
            let mut s = String::from("rank,elements,s11_db\n");
            let _ = writeln!(s, "1,{},{}", network_specs(&rep.best_network), rep.best_s11_db);
            for (i, c) in rep.runner_ups.iter().enumerate() {
                let _ = writeln!(s, "{},{},{}", i + 2, network_specs(&c.network), c.s11_db);
            }
            s
        }
        Format::Text => {
            let mut s = format!(
                "{:?}, k={}: {} candidates at {}\nbest: {}; S11 {}\n",
                rep.series,
                rep.k,
                rep.candidates_evaluated,
                mhz(f0),
                describe(&rep.best_network),
                db(rep.best_s11_db)
            );
            for (i, c) in rep.runner_ups.iter().enumerate() {
                let _ = writeln!(s, "{:>4}. {}; S11 {}", i + 2, describe(&c.network), db(c.s11_db));
            }
            if let Some(t) = &rep.tolerance {
                let _ = writeln!(
                    s,
                    "±{}% over {} samples (seed {}): median {}, p95 {}, worst {}",
                    t.percent,
                    t.samples,
                    cli.seed,
                    db(t.p50_s11_db),
                    db(t.p95_s11_db),
                    db(t.worst_s11_db)
                );
            }
            s
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeafReport {
    pub metrics: OutlineMetrics,
    pub pair: LeafPair,
}

fn geometry_error(e: GeometryError) -> CliError {
    match e {
        GeometryError::SelfIntersection(..) | GeometryError::ElementsOverlap(..) | GeometryError::EnvelopeExceeded { .. } => compute(e),
        other => input(other),
    }
}

fn link_error(e: LinkError) -> CliError {
    match e {
        LinkError::Domain { .. } | LinkError::BadCurve => input(e),
        other => compute(other),
    }
}

fn cmd_leaf(cli: &Cli, profile: &LeafProfile, dxf: Option<&std::path::Path>) -> Result<String, CliError> {
    let pair = build_leaf_pair(profile).map_err(geometry_error)?;
    let metrics = outline_metrics(&pair);
    if let Some(path) = dxf {
        std::fs::write(path, export_dxf(&pair)).map_err(|e| input(format!("{}: {e}", path.display())))?;
    }
    Ok(match cli.format {
        Format::Json => json(&LeafReport { metrics, pair })?,
        Format::Csv => {
            let mut s = String::from("element,index,x_mm,y_mm\n");
            for (name, pl) in ["A", "B"].iter().zip(pair.elements()) {
                for (i, p) in pl.points.iter().enumerate() {
                    let _ = writeln!(s, "{name},{i},{},{}", p.x, p.y);
                }
            }
            s
        }
        Format::Text => format!(
            "{} element(s), {} vertices each: area {} mm^2, perimeter {} mm, bbox {} x {} mm\n",
            metrics.element_areas.len(),
            pair.element_a.points.len(),
            format_sig(metrics.area, 6),
            format_sig(metrics.perimeter, 6),
            format_sig(metrics.bbox_width, 6),
            format_sig(metrics.bbox_height, 6)
        ),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkinReport {
    pub material: String,
    pub resistivity: f64,
    pub relative_permeability: f64,
    pub frequency_hz: f64,
    pub depth_m: f64,
}

fn cmd_skin(cli: &Cli, material: &str, rho: Option<f64>, mu_r: f64, f: Frequency) -> Result<String, CliError> {
    let m = if material.eq_ignore_ascii_case("custom") {
        let rho = rho.ok_or_else(|| input("--material custom needs --rho"))?;
        MaterialSpec::new(rho, mu_r).map_err(input)?
    } else {
        let base = MaterialSpec::by_name(material).ok_or_else(|| input(format!("unknown material {material:?}")))?;
        MaterialSpec::new(rho.unwrap_or(base.resistivity), mu_r).map_err(input)?
    };
    let depth = skin_depth(m, f).map_err(compute)?;
    let rep = SkinReport {
        material: material.to_ascii_lowercase(),
        resistivity: m.resistivity,
        relative_permeability: m.relative_permeability,
        frequency_hz: f.hertz(),
        depth_m: depth,
    };
    Ok(match cli.format {
        Format::Json => json(&rep)?,
        Format::Csv => format!("material,frequency_hz,depth_m\n{},{},{}\n", rep.material, rep.frequency_hz, format_sig(depth, 6)),
        Format::Text => format!("{} µm ({} at {})\n", format_sig(depth * 1e6, 6), rep.material, mhz(f)),
    })
}
