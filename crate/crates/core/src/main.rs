//! Batch front-end: runs constructions and checks, emits JSON/CSV reports
//! and SVG partition renders.
//!
//! Exit codes: 0 on success with all asserted bounds holding, 1 with a
//! machine-readable violation report when a measured bound fails, 2 on
//! usage errors.

use bdforge::counterexamples::balls::{balls_csv_row, balls_partial, BallsSpec, BALLS_CSV_HEADER};
use bdforge::counterexamples::caccioppoli::{gsbv_check, random_caccioppoli, PieceMode};
use bdforge::counterexamples::cantor::{build_pure_cantor, CantorPipelineConfig};
use bdforge::counterexamples::ornstein::{trace_csv_row, TRACE_CSV_HEADER};
use bdforge::counterexamples::pure_jump::{assemble_pure_jump, build_pure_jump, PureJumpConfig};
use bdforge::fields::{serial, Caps, PPField, Rect};
use bdforge::fineprops::{
    affine_recovery_ratio, bump_lp_norm, density_partial_sums, lp_tail_bound, omega_area,
    proof_chain_constant, random_trial, DensityProbe, ProbeKind,
};
use bdforge::measures::{strain_report_pp, StrainReport};
use bdforge::numeric::Rat;
use bdforge::quantize::{cantor_quantize, staircase_quantize};
use bdforge::render::render_svg;
use bdforge::report::{fmt_f64, RunManifest};
use clap::{Parser, Subcommand, ValueEnum};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "bdforge", version, about = "piecewise-affine strain calculus workbench")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum QuantizeMode {
    Stair,
    Cantor,
}

#[derive(Clone, Copy, ValueEnum)]
enum CacMode {
    Rigid,
    Affine,
}

#[derive(Clone, Copy, ValueEnum)]
enum Probe {
    Const,
    Bump,
    Remark,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the laminate iteration and emit the pure-jump field
    PureJump {
        #[arg(long = "M")]
        m: String,
        #[arg(long)]
        omega0: Option<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        kmax: u32,
    },
    /// Stack scaled pure-jump blocks on the diagonal
    Assemble {
        #[arg(long = "K")]
        k: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Continuous pipeline with Cantor cut-offs
    PureCantor {
        #[arg(long)]
        kstar: u32,
        #[arg(long)]
        level: u32,
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Strain decomposition of a field document
    Measure {
        input: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Quantize every cell of a piecewise-affine field
    Quantize {
        #[arg(long, value_enum)]
        mode: QuantizeMode,
        #[arg(long)]
        delta: String,
        #[arg(long, default_value_t = 4)]
        level: u32,
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form series for the disjoint-balls example
    Balls {
        #[arg(long)]
        n: u32,
        #[arg(long = "K")]
        k: u32,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random Caccioppoli-affine fields and their divergence inequalities
    Caccioppoli {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        pieces: usize,
        #[arg(long, value_enum)]
        mode: CacMode,
        #[arg(long, default_value_t = 1)]
        trials: u64,
    },
    /// Multiscale density partial sums
    Density {
        #[arg(long, value_enum)]
        probe: Probe,
        #[arg(long = "K")]
        k: u32,
        #[arg(long)]
        x: Option<String>,
        #[arg(long)]
        p: Option<f64>,
    },
    /// Affine recovery inequality trials
    AffineLemma {
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
    },
    /// Render a field document to SVG
    Render {
        input: PathBuf,
        #[arg(long)]
        svg: PathBuf,
    },
}

fn caps_from_env() -> Caps {
    let mut caps = Caps::default();
    if let Ok(v) = std::env::var("BDFORGE_CELL_CAP") {
        if let Ok(n) = v.parse::<usize>() {
            caps.cell_cap = n;
        }
    }
    caps
}

fn parse_rat(s: &str) -> Result<Rat, String> {
    Rat::parse_frac(s).or_else(|_| {
        s.parse::<f64>()
            .map_err(|e| format!("not a rational or float: {}", e))
            .and_then(|f| Rat::from_f64_exact(f).ok_or_else(|| "non-finite".to_string()))
    })
}

fn parse_rect(s: &str) -> Result<Rect, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err("rectangle syntax: x0,x1,y0,y1".into());
    }
    let v: Result<Vec<Rat>, String> = parts.iter().map(|p| parse_rat(p)).collect();
    let v = v?;
    Ok(Rect::new(v[0].clone(), v[1].clone(), v[2].clone(), v[3].clone()))
}

fn write_file(path: &Path, bytes: &str) -> std::io::Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, bytes)
}

fn write_manifest(manifest: &mut RunManifest, started: Instant, primary_out: Option<&Path>) {
    manifest.wall_time_ms = started.elapsed().as_millis();
    if let Some(p) = primary_out {
        let mpath = p.with_extension("manifest.json");
        let _ = write_file(&mpath, &manifest.to_json());
    }
}

fn strain_json(r: &StrainReport) -> String {
    let mut s = serde_json::to_string_pretty(r).expect("report serializes");
    s.push('\n');
    s
}

fn violation(msg: &str, detail: serde_json::Value) -> ExitCode {
    let doc = serde_json::json!({ "violation": msg, "detail": detail });
    println!("{}", serde_json::to_string_pretty(&doc).unwrap());
    ExitCode::from(1)
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {}", msg);
    ExitCode::from(1)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let caps = caps_from_env();
    let started = Instant::now();
    match cli.cmd {
        Cmd::PureJump { m, omega0, out, trace, kmax } => {
            let m_rat = match parse_rat(&m) {
                Ok(v) => v,
                Err(e) => return fail(e),
            };
            let omega0 = match omega0.map(|s| parse_rect(&s)).transpose() {
                Ok(o) => o.unwrap_or_else(|| {
                    Rect::new(Rat::new(1, 4), Rat::new(3, 4), Rat::new(1, 4), Rat::new(3, 4))
                }),
                Err(e) => return fail(e),
            };
            let cfg = PureJumpConfig { m_target: m_rat.to_f64(), omega0, k_max: kmax, caps };
            let outcome = match build_pure_jump(&cfg) {
                Ok(o) => o,
                Err(e) => return fail(e),
            };
            let mut manifest = RunManifest::new("pure-jump")
                .param("M", &m)
                .param("kmax", kmax);
            manifest.outputs.push(out.display().to_string());
            let json = serial::pa_to_json(&outcome.field);
            if write_file(&out, &json).is_err() {
                return fail(format!("cannot write {}", out.display()));
            }
            if let Some(tp) = trace {
                let mut csv = String::from(TRACE_CSV_HEADER);
                csv.push('\n');
                for row in &outcome.trace {
                    csv.push_str(&trace_csv_row(row));
                    csv.push('\n');
                }
                if write_file(&tp, &csv).is_err() {
                    return fail(format!("cannot write {}", tp.display()));
                }
                manifest.outputs.push(tp.display().to_string());
            }
            write_manifest(&mut manifest, started, Some(&out));
            let rep = serde_json::to_value(&outcome.report).unwrap();
            if !outcome.report.targets_met {
                return violation("pure-jump targets not met", rep);
            }
            println!("{}", serde_json::to_string_pretty(&rep).unwrap());
            ExitCode::SUCCESS
        }
        Cmd::Assemble { k, out } => {
            let (field, report) = match assemble_pure_jump(k, 8, &caps) {
                Ok(v) => v,
                Err(e) => return fail(e),
            };
            let mut manifest = RunManifest::new("assemble").param("K", k);
            manifest.outputs.push(out.display().to_string());
            if write_file(&out, &serial::pa_to_json(&field)).is_err() {
                return fail(format!("cannot write {}", out.display()));
            }
            write_manifest(&mut manifest, started, Some(&out));
            let rep = serde_json::to_value(&report).unwrap();
            if !(report.sum_ew_within_2 && report.grad_target_met) {
                return violation("assembly targets not met", rep);
            }
            println!("{}", serde_json::to_string_pretty(&rep).unwrap());
            ExitCode::SUCCESS
        }
        Cmd::PureCantor { kstar, level, gamma, out } => {
            let gamma = match gamma.map(|s| parse_rat(&s)).transpose() {
                Ok(g) => g,
                Err(e) => return fail(e),
            };
            let cfg = CantorPipelineConfig { k_star: kstar, level, gamma, delta_divisor: 16, caps };
            let (field, report) = match build_pure_cantor(&cfg) {
                Ok(v) => v,
                Err(e) => return fail(e),
            };
            let mut manifest = RunManifest::new("pure-cantor")
                .param("kstar", kstar)
                .param("level", level);
            manifest.outputs.push(out.display().to_string());
            if write_file(&out, &serial::pp_to_json(&field)).is_err() {
                return fail(format!("cannot write {}", out.display()));
            }
            write_manifest(&mut manifest, started, Some(&out));
            let rep = serde_json::to_value(&report).unwrap();
            if !(report.continuous_exact && report.skew_off_bands_exact && report.boundary_trace_exact)
            {
                return violation("continuous pipeline invariants failed", rep);
            }
            println!("{}", serde_json::to_string_pretty(&rep).unwrap());
            ExitCode::SUCCESS
        }
        Cmd::Measure { input, csv } => {
            let text = match std::fs::read_to_string(&input) {
                Ok(t) => t,
                Err(e) => return fail(e),
            };
            let field = match serial::pp_from_json(&text, &caps) {
                Ok(f) => f,
                Err(e) => return fail(e),
            };
            let report = match strain_report_pp(&field) {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            if let Some(cp) = csv {
                let mut s = String::from(StrainReport::CSV_HEADER);
                s.push('\n');
                s.push_str(&report.csv_row());
                s.push('\n');
                if write_file(&cp, &s).is_err() {
                    return fail(format!("cannot write {}", cp.display()));
                }
            }
            print!("{}", strain_json(&report));
            ExitCode::SUCCESS
        }
        Cmd::Quantize { mode, delta, level, input, out } => {
            let delta = match parse_rat(&delta) {
                Ok(d) => d,
                Err(e) => return fail(e),
            };
            let text = match std::fs::read_to_string(&input) {
                Ok(t) => t,
                Err(e) => return fail(e),
            };
            let field = match serial::pa_from_json(&text, &caps) {
                Ok(f) => f,
                Err(e) => return fail(e),
            };
            let mut cells = Vec::new();
            for c in &field.cells {
                let produced = match mode {
                    QuantizeMode::Stair => staircase_quantize(&c.map, &c.rect, &delta),
                    QuantizeMode::Cantor => {
                        cantor_quantize(&c.map, &c.rect, &delta, level).map(|q| q.cells)
                    }
                };
                match produced {
                    Ok(mut v) => cells.append(&mut v),
                    Err(e) => return fail(e),
                }
            }
            let mut quantized = bdforge::fields::PAField { domain: field.domain.clone(), cells };
            quantized.canonical_sort();
            if let Err(e) = quantized.validate(&caps) {
                return fail(e);
            }
            let json = serial::pa_to_json(&quantized);
            match out {
                Some(p) => {
                    if write_file(&p, &json).is_err() {
                        return fail(format!("cannot write {}", p.display()));
                    }
                    let mut manifest = RunManifest::new("quantize").param("delta", delta);
                    manifest.outputs.push(p.display().to_string());
                    write_manifest(&mut manifest, started, Some(&p));
                }
                None => print!("{}", json),
            }
            ExitCode::SUCCESS
        }
        Cmd::Balls { n, k, q, out } => {
            let report = balls_partial(&BallsSpec { n, k_max: k, q });
            let mut csv = String::from(BALLS_CSV_HEADER);
            csv.push('\n');
            for row in &report.rows {
                csv.push_str(&balls_csv_row(row));
                csv.push('\n');
            }
            match out {
                Some(p) => {
                    if write_file(&p, &csv).is_err() {
                        return fail(format!("cannot write {}", p.display()));
                    }
                }
                None => print!("{}", csv),
            }
            ExitCode::SUCCESS
        }
        Cmd::Caccioppoli { seed, pieces, mode, trials } => {
            let mode = match mode {
                CacMode::Rigid => PieceMode::Rigid,
                CacMode::Affine => PieceMode::Affine,
            };
            let mut total_violations = 0usize;
            let mut rows = Vec::new();
            for t in 0..trials {
                let field = match random_caccioppoli(seed + t, pieces, mode, 4, &caps) {
                    Ok(f) => f,
                    Err(e) => return fail(e),
                };
                let rep = match gsbv_check(&field) {
                    Ok(r) => r,
                    Err(e) => return fail(e),
                };
                total_violations += rep.violations;
                rows.push(serde_json::json!({
                    "seed": seed + t,
                    "violations": rep.violations,
                    "du_total": rep.du_total,
                    "twice_boundary_sum": rep.twice_boundary_sum,
                    "total_bound_ok": rep.total_bound_ok,
                }));
            }
            let doc = serde_json::json!({ "trials": trials, "violations": total_violations, "rows": rows });
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
            if total_violations > 0 {
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Cmd::Density { probe, k, x, p } => {
            let center = match x {
                Some(s) => {
                    let parts: Vec<&str> = s.split(',').collect();
                    if parts.len() != 2 {
                        return fail("point syntax: x1,x2");
                    }
                    match (parse_rat(parts[0]), parse_rat(parts[1])) {
                        (Ok(a), Ok(b)) => (a.to_f64(), b.to_f64()),
                        _ => return fail("bad point"),
                    }
                }
                None => (0.0, 0.0),
            };
            let kind = match probe {
                Probe::Const => ProbeKind::Constant(1.0),
                Probe::Bump => ProbeKind::Bump,
                Probe::Remark => ProbeKind::Remark,
            };
            let rows = match density_partial_sums(&DensityProbe { kind, center, k_max: k }) {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            println!("probe,k,S_K,err_K");
            let name = match probe {
                Probe::Const => "const",
                Probe::Bump => "bump",
                Probe::Remark => "remark",
            };
            for row in &rows {
                println!(
                    "{},{},{},{}",
                    name,
                    row.k,
                    fmt_f64(row.partial.value),
                    fmt_f64(row.partial.abs_error_bound)
                );
            }
            if let Some(p) = p {
                if kind == ProbeKind::Bump {
                    let norm = bump_lp_norm(p);
                    let tail = lp_tail_bound(norm, p, 2, k);
                    println!("# tail bound: {}", fmt_f64(tail.partial));
                }
            }
            ExitCode::SUCCESS
        }
        Cmd::AffineLemma { trials, seed } => {
            println!("seed,ratio,omega_area,ball_area");
            let mut max_ratio = 0.0f64;
            for t in 0..trials {
                let trial = random_trial(seed + t);
                match affine_recovery_ratio(&trial) {
                    Ok(r) => {
                        max_ratio = max_ratio.max(r);
                        println!(
                            "{},{},{},{}",
                            seed + t,
                            fmt_f64(r),
                            fmt_f64(omega_area(&trial)),
                            fmt_f64(std::f64::consts::PI * trial.radius * trial.radius)
                        );
                    }
                    Err(e) => println!("{},skipped: {},,", seed + t, e),
                }
            }
            println!("# empirical max ratio: {}", fmt_f64(max_ratio));
            println!("# proof-chain bound:  {}", fmt_f64(proof_chain_constant()));
            if max_ratio > proof_chain_constant() {
                return violation(
                    "empirical constant exceeded the proof-chain bound",
                    serde_json::json!({ "max_ratio": max_ratio }),
                );
            }
            ExitCode::SUCCESS
        }
        Cmd::Render { input, svg } => {
            let text = match std::fs::read_to_string(&input) {
                Ok(t) => t,
                Err(e) => return fail(e),
            };
            let field: PPField = match serial::pp_from_json(&text, &caps) {
                Ok(f) => f,
                Err(e) => return fail(e),
            };
            let render_cap = std::env::var("BDFORGE_RENDER_CAP")
                .ok()
                .and_then(|v| v.parse().ok())
                .unwrap_or(50_000usize);
            let doc = match render_svg(&field, render_cap) {
                Ok(d) => d,
                Err(e) => return fail(e),
            };
            if write_file(&svg, &doc).is_err() {
                return fail(format!("cannot write {}", svg.display()));
            }
            let mut manifest = RunManifest::new("render");
            manifest.outputs.push(svg.display().to_string());
            write_manifest(&mut manifest, started, Some(&svg));
            ExitCode::SUCCESS
        }
    }
}
