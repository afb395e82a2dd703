//! Command-line surface for the covsep toolkit.
//!
//! Exit codes: 0 = separable / valid / PPT, 1 = entangled / invalid /
//! non-PPT, 2 = inconclusive, 64 = usage error, 65 = data or i/o error.

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use covsep::analysis::{
    arithmetic_mean, geometric_mean, harmonic_mean, schur_complement, BlockPartition,
};
use covsep::io::{
    load_cert, revalidate_cert, save_cert, save_qcm, CertFile, MatrixData, Metadata, QcmFile,
};
use covsep::passive::{absolute_separability, passive_orbit_check, AbsSepVerdict};
use covsep::sep::{
    full_separability, separability_1vn, separability_general, SeparabilityCert, Verdict, Witness,
};
use covsep::structure::{
    detect_mono_symmetry, is_isotropic, is_pt_invariant, localize, separability_isotropic,
    separability_mono_symmetric, separability_pt_invariant,
};
use covsep::symplectic::{random_qcm, thermal, tmsv, ModeLayout, Purity, Qcm};
use covsep::{SolverConfig, Tolerances};

const EXIT_POSITIVE: u8 = 0;
const EXIT_NEGATIVE: u8 = 1;
const EXIT_INCONCLUSIVE: u8 = 2;
const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;

#[derive(Parser)]
#[command(
    name = "covsep",
    version,
    about = "Decide and certify separability, PPT and absolute separability of Gaussian states at the covariance-matrix level"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Input file (QCM JSON); `-` or omitted reads stdin.
    #[arg(value_name = "FILE")]
    input: Option<PathBuf>,
    /// Relative positivity/conditioning band.
    #[arg(long, value_name = "TOL")]
    tol_psd: Option<f64>,
    /// Relative verdict band; margins inside it are inconclusive.
    #[arg(long, value_name = "TOL")]
    tol_verdict: Option<f64>,
    /// Machine-readable JSON output.
    #[arg(long)]
    json: bool,
}

#[derive(Args, Clone)]
struct SolverOpts {
    /// Regularization for the upper-bound inverse (default: escalate on
    /// demand).
    #[arg(long, value_name = "EPS")]
    epsilon: Option<f64>,
    /// Projection-iteration cap per feasibility level.
    #[arg(long, value_name = "N")]
    max_iter: Option<usize>,
    /// Write the certificate to this path.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Engine {
    /// Route through the structure fast paths when they apply.
    Auto,
    /// Force the general feasibility engine.
    General,
}

#[derive(Subcommand)]
enum Command {
    /// Check the Heisenberg validity of a covariance matrix.
    Check {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Test positivity of the partial transpose.
    Ppt {
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Decide bipartite separability with a constructive certificate.
    Sep {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        solver: SolverOpts,
        #[arg(long, value_enum, default_value = "auto")]
        engine: Engine,
    },
    /// Decide full separability across a k-partite grouping.
    Fullsep {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        solver: SolverOpts,
        /// Mode counts per group, e.g. `1,1,1`.
        #[arg(long, value_name = "G1,G2,...", required = true)]
        groups: String,
    },
    /// Decide absolute (passive-proof) separability.
    AbsSep {
        #[command(flatten)]
        common: CommonOpts,
        #[command(flatten)]
        solver: SolverOpts,
    },
    /// Sweep random passive congruences, checking PPT along the orbit.
    Orbit {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Generate covariance matrices (tmsv, thermal, random).
    #[command(subcommand)]
    Gen(GenCommand),
    /// Detect mono-symmetry and localize correlations onto one mode.
    Localize {
        #[command(flatten)]
        common: CommonOpts,
        /// Write the reduced 1-vs-n state to this path.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Matrix-mean and Schur-complement debug access.
    #[command(subcommand)]
    Means(MeansCommand),
    /// Re-validate a certificate file without any solver.
    Revalidate {
        /// Certificate file.
        #[arg(value_name = "CERT")]
        cert: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Subcommand)]
enum GenCommand {
    /// Two-mode squeezed vacuum with squeezing parameter r (1 vs 1 modes).
    Tmsv {
        r: f64,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Thermal state nu * identity on the given number of modes.
    Thermal {
        nu: f64,
        modes: usize,
        /// Modes assigned to party A (default 1).
        #[arg(long, value_name = "M")]
        split: Option<usize>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Haar-random state with planted symplectic spectrum.
    Random {
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Force all symplectic eigenvalues to 1.
        #[arg(long)]
        pure: bool,
        #[arg(long, default_value_t = 1.0)]
        squeeze_max: f64,
        #[arg(long, default_value_t = 2.0)]
        nu_max: f64,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum MeansCommand {
    /// Geometric mean A # B of two matrices (read from QCM files).
    Geometric { a: PathBuf, b: PathBuf },
    /// Harmonic mean A ! B.
    Harmonic { a: PathBuf, b: PathBuf },
    /// Arithmetic mean (A + B) / 2.
    Arithmetic { a: PathBuf, b: PathBuf },
    /// Schur complement M/A with leading block of size `split`.
    Schur {
        m: PathBuf,
        #[arg(long, value_name = "DIM", required = true)]
        split: usize,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("covsep: error: {e:#}");
            ExitCode::from(EXIT_DATA)
        }
    }
}

fn tolerances(common: &CommonOpts) -> Tolerances<f64> {
    let mut tol = Tolerances::default();
    if let Some(p) = common.tol_psd {
        tol.psd = p;
    }
    if let Some(v) = common.tol_verdict {
        tol.verdict = v;
    }
    tol
}

fn solver_config(common: &CommonOpts, solver: &SolverOpts) -> SolverConfig<f64> {
    let mut cfg = SolverConfig::default().with_tol(tolerances(common));
    if let Some(eps) = solver.epsilon {
        cfg.epsilon = Some(eps);
    }
    if let Some(iters) = solver.max_iter {
        cfg.max_iterations = iters;
    }
    cfg
}

fn read_input(input: &Option<PathBuf>) -> anyhow::Result<QcmFile> {
    match input {
        Some(p) if p.as_os_str() != "-" => {
            let text =
                std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok(QcmFile::parse(&text)?)
        }
        _ => {
            let mut text = String::new();
            std::io::stdin()
                .read_to_string(&mut text)
                .context("reading stdin")?;
            Ok(QcmFile::parse(&text)?)
        }
    }
}

fn load_state(common: &CommonOpts, tol: &Tolerances<f64>) -> anyhow::Result<(QcmFile, Qcm<f64>)> {
    let file = read_input(&common.input)?;
    let validity = file.validity::<f64>(tol)?;
    if !validity.valid {
        eprintln!(
            "covsep: warning: input fails the Heisenberg check (min eig {:.3e})",
            validity.min_eig
        );
    }
    let qcm = file.to_qcm::<f64>(tol)?;
    Ok((file, qcm))
}

fn emit_qcm(file: &QcmFile, out: &Option<PathBuf>) -> anyhow::Result<u8> {
    match out {
        Some(p) => save_qcm(file, p)?,
        None => println!("{}", file.to_json()),
    }
    Ok(EXIT_POSITIVE)
}

fn verdict_exit(verdict: Verdict) -> u8 {
    match verdict {
        Verdict::Separable => EXIT_POSITIVE,
        Verdict::Entangled => EXIT_NEGATIVE,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn print_sep_report(cert: &SeparabilityCert<f64>, routed: &str) {
    let verdict = match cert.verdict {
        Verdict::Separable => "SEPARABLE",
        Verdict::Entangled => "ENTANGLED",
        Verdict::Inconclusive => "INCONCLUSIVE",
    };
    println!("verdict: {verdict}");
    println!("route: {routed}");
    match &cert.witness {
        Witness::Product { gammas } => {
            println!(
                "witness: marginal covariance blocks of dimensions {:?}",
                gammas.iter().map(|g| g.nrows()).collect::<Vec<_>>()
            );
            if let Some(m) = cert.margin {
                println!("feasibility margin: {m:.6e}");
            }
        }
        Witness::PptViolation {
            min_symplectic_eig,
            cut,
        } => {
            println!("min PT symplectic eigenvalue: {min_symplectic_eig:.10}");
            if let Some(c) = cut {
                println!("violating cut: group {c}");
            }
            println!("distillable: yes");
        }
        Witness::DualInfeasibility { value, .. } => {
            println!("solver infeasibility certificate, gap {value:.6e}");
            println!("candidate bound entanglement (PPT holds); distillable: no");
        }
        Witness::Margin { lower, upper } => {
            println!("verified margin bracket: [{lower:.3e}, {upper:.3e}]");
        }
    }
}

fn finish_sep(
    file: &QcmFile,
    cert: &SeparabilityCert<f64>,
    tol: &Tolerances<f64>,
    common: &CommonOpts,
    out: &Option<PathBuf>,
    routed: &str,
) -> anyhow::Result<u8> {
    let cf = CertFile::from_separability(file, cert, tol);
    if let Some(p) = out {
        save_cert(&cf, p)?;
    }
    if common.json {
        println!("{}", cf.to_json());
    } else {
        print_sep_report(cert, routed);
        if let Some(p) = out {
            println!("certificate written to {}", p.display());
        }
    }
    Ok(verdict_exit(cert.verdict))
}

/// Pick the structure fast path that applies, falling back to the closed
/// form for one-mode parties and the general engine otherwise.
fn auto_route(
    v: &Qcm<f64>,
    cfg: &SolverConfig<f64>,
) -> anyhow::Result<(SeparabilityCert<f64>, &'static str)> {
    let tol = &cfg.tol;
    let layout = *v.layout();
    if layout.m == 0 || layout.n == 0 {
        return Ok((separability_general(v, cfg)?, "trivial (single party)"));
    }
    if is_pt_invariant(v, tol).invariant {
        return Ok((separability_pt_invariant(v, cfg)?, "pt_invariant"));
    }
    if layout.m >= 2 {
        if let Ok(blocks) = detect_mono_symmetry(v, tol.alg) {
            if blocks.detected {
                return Ok((separability_mono_symmetric(v, cfg)?, "mono_symmetric"));
            }
        }
    }
    if layout.n >= 2 {
        let sw = v.swap_parties();
        if let Ok(blocks) = detect_mono_symmetry(&sw, tol.alg) {
            if blocks.detected {
                let mut cert = separability_mono_symmetric(&sw, cfg)?;
                if let Witness::Product { gammas } = &mut cert.witness {
                    gammas.reverse();
                }
                cert.groups.reverse();
                return Ok((cert, "mono_symmetric (B side)"));
            }
        }
    }
    if is_isotropic(v, tol.alg * 10.0, tol)?.isotropic {
        return Ok((separability_isotropic(v, cfg)?, "isotropic"));
    }
    if layout.m == 1 || layout.n == 1 {
        return Ok((separability_1vn(v, cfg)?, "one_vs_n"));
    }
    Ok((separability_general(v, cfg)?, "general"))
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    match cli.command {
        Command::Check { common } => {
            let tol = tolerances(&common);
            let file = read_input(&common.input)?;
            let validity = file.validity::<f64>(&tol)?;
            if common.json {
                println!(
                    "{}",
                    serde_json::json!({
                        "valid": validity.valid,
                        "min_eig": validity.min_eig,
                    })
                );
            } else {
                println!(
                    "{} (min eigenvalue of V + i\u{3a9}: {:.6e})",
                    if validity.valid { "VALID" } else { "INVALID" },
                    validity.min_eig
                );
            }
            Ok(if validity.valid {
                EXIT_POSITIVE
            } else {
                EXIT_NEGATIVE
            })
        }
        Command::Ppt { common } => {
            let tol = tolerances(&common);
            let (_file, v) = load_state(&common, &tol)?;
            let spec = v.partial_transpose().symplectic_spectrum(&tol)?;
            let min_nu = *spec.last().ok_or_else(|| anyhow!("empty spectrum"))?;
            let ppt = min_nu >= 1.0 - tol.verdict;
            if common.json {
                println!(
                    "{}",
                    serde_json::json!({
                        "ppt": ppt,
                        "min_pt_symplectic_eig": min_nu,
                        "distillable": !ppt,
                    })
                );
            } else {
                println!(
                    "{} (min PT symplectic eigenvalue {:.10}){}",
                    if ppt { "PPT" } else { "NON-PPT" },
                    min_nu,
                    if ppt { "" } else { "; distillable" }
                );
            }
            Ok(if ppt { EXIT_POSITIVE } else { EXIT_NEGATIVE })
        }
        Command::Sep {
            common,
            solver,
            engine,
        } => {
            let cfg = solver_config(&common, &solver);
            let (file, v) = load_state(&common, &cfg.tol)?;
            let (cert, routed) = match engine {
                Engine::General => (separability_general(&v, &cfg)?, "general (forced)"),
                Engine::Auto => auto_route(&v, &cfg)?,
            };
            finish_sep(&file, &cert, &cfg.tol, &common, &solver.out, routed)
        }
        Command::Fullsep {
            common,
            solver,
            groups,
        } => {
            let cfg = solver_config(&common, &solver);
            let (file, v) = load_state(&common, &cfg.tol)?;
            let parsed: Vec<usize> = groups
                .split(',')
                .map(|s| s.trim().parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| anyhow!("bad --groups: {e}"))?;
            let cert = full_separability(&v, &parsed, &cfg)?;
            finish_sep(&file, &cert, &cfg.tol, &common, &solver.out, "multipartite")
        }
        Command::AbsSep { common, solver } => {
            let cfg = solver_config(&common, &solver);
            let (file, v) = load_state(&common, &cfg.tol)?;
            let cert = absolute_separability(&v, &cfg.tol)?;
            let cf = CertFile::from_abs_sep(&file, &cert, &cfg.tol);
            if let Some(p) = &solver.out {
                save_cert(&cf, p)?;
            }
            if common.json {
                println!("{}", cf.to_json());
            } else {
                match cert.verdict {
                    AbsSepVerdict::AbsolutelySeparable => println!("ABSOLUTELY SEPARABLE"),
                    AbsSepVerdict::NotAbsolute => println!("NOT ABSOLUTELY SEPARABLE"),
                }
                println!(
                    "two smallest eigenvalues: {:.10}, {:.10} (product {:.10})",
                    cert.lambda1,
                    cert.lambda2,
                    cert.lambda1 * cert.lambda2
                );
                if let Some(r1) = &cert.rank_one {
                    println!(
                        "rank-one certificate with k = {:.10}, p = {:.6}",
                        r1.k, r1.p
                    );
                }
            }
            Ok(match cert.verdict {
                AbsSepVerdict::AbsolutelySeparable => EXIT_POSITIVE,
                AbsSepVerdict::NotAbsolute => EXIT_NEGATIVE,
            })
        }
        Command::Orbit {
            common,
            trials,
            seed,
        } => {
            let tol = tolerances(&common);
            let (_file, v) = load_state(&common, &tol)?;
            let report = passive_orbit_check(&v, trials, seed, &tol)?;
            if common.json {
                println!(
                    "{}",
                    serde_json::json!({
                        "trials": report.trials,
                        "non_ppt_trials": report.non_ppt_trials,
                        "min_pt_symplectic_eig": report.min_pt_symplectic_eig,
                        "absolutely_separable": report.absolutely_separable,
                        "certificate_failures": report.certificate_failures,
                    })
                );
            } else {
                println!(
                    "trials: {}, PPT violations: {}, min PT symplectic eigenvalue: {:.10}",
                    report.trials,
                    report.non_ppt_trials.len(),
                    report.min_pt_symplectic_eig
                );
                println!(
                    "absolute-separability inequality: {}",
                    if report.absolutely_separable {
                        "holds (every orbit point certified)"
                    } else {
                        "does not hold"
                    }
                );
                if report.certificate_failures > 0 {
                    println!("certificate failures: {}", report.certificate_failures);
                }
            }
            Ok(if report.non_ppt_trials.is_empty() {
                EXIT_POSITIVE
            } else {
                EXIT_NEGATIVE
            })
        }
        Command::Gen(genc) => match genc {
            GenCommand::Tmsv { r, out } => {
                let v = tmsv(r);
                let file = QcmFile::from_qcm(
                    &v,
                    Some(Metadata {
                        generator: Some(format!("tmsv r={r}")),
                        ..Metadata::default()
                    }),
                );
                emit_qcm(&file, &out)
            }
            GenCommand::Thermal {
                nu,
                modes,
                split,
                out,
            } => {
                let m = split.unwrap_or(1).min(modes);
                let v = thermal(nu, modes)?.with_split(m, modes - m)?;
                let file = QcmFile::from_qcm(
                    &v,
                    Some(Metadata {
                        generator: Some(format!("thermal nu={nu} modes={modes}")),
                        ..Metadata::default()
                    }),
                );
                emit_qcm(&file, &out)
            }
            GenCommand::Random {
                m,
                n,
                seed,
                pure,
                squeeze_max,
                nu_max,
                out,
            } => {
                let layout = ModeLayout::mode_wise(m, n)?;
                let purity = if pure {
                    Purity::Pure
                } else {
                    Purity::Mixed { nu_max }
                };
                let v = random_qcm::<f64>(seed, layout, purity, squeeze_max);
                let file = QcmFile::from_qcm(
                    &v,
                    Some(Metadata {
                        seed: Some(seed),
                        generator: Some(format!(
                            "random m={m} n={n} pure={pure} squeeze_max={squeeze_max} nu_max={nu_max}"
                        )),
                        ..Metadata::default()
                    }),
                );
                emit_qcm(&file, &out)
            }
        },
        Command::Localize { common, out } => {
            let tol = tolerances(&common);
            let (_file, v) = load_state(&common, &tol)?;
            let blocks = detect_mono_symmetry(&v, tol.alg)?;
            if !blocks.detected {
                if common.json {
                    println!(
                        "{}",
                        serde_json::json!({
                            "detected": false,
                            "max_deviation": blocks.max_deviation,
                        })
                    );
                } else {
                    println!(
                        "NOT MONO-SYMMETRIC (max block deviation {:.3e})",
                        blocks.max_deviation
                    );
                }
                return Ok(EXIT_NEGATIVE);
            }
            let loc = localize(&v, &blocks, &tol)?;
            if let Some(p) = &out {
                let file = QcmFile::from_qcm(
                    &loc.reduced,
                    Some(Metadata {
                        generator: Some("localize".to_string()),
                        ..Metadata::default()
                    }),
                );
                save_qcm(&file, p)?;
            }
            if common.json {
                println!(
                    "{}",
                    serde_json::json!({
                        "detected": true,
                        "max_deviation": blocks.max_deviation,
                        "alpha": MatrixData::from_mat(&blocks.alpha),
                        "eps": MatrixData::from_mat(&blocks.eps),
                        "kappas": blocks.kappas.iter().map(MatrixData::from_mat).collect::<Vec<_>>(),
                        "spectators": loc.spectators.iter().map(MatrixData::from_mat).collect::<Vec<_>>(),
                        "reduced": QcmFile::from_qcm(&loc.reduced, None),
                        "residual": loc.residual,
                    })
                );
            } else {
                println!(
                    "MONO-SYMMETRIC (max block deviation {:.3e})",
                    blocks.max_deviation
                );
                println!(
                    "localized onto 1 vs {} modes, {} spectator mode(s), residual {:.3e}",
                    loc.reduced.layout().n,
                    loc.spectators.len(),
                    loc.residual
                );
                if let Some(p) = &out {
                    println!("reduced state written to {}", p.display());
                }
            }
            Ok(EXIT_POSITIVE)
        }
        Command::Means(mc) => {
            let tol = Tolerances::<f64>::default();
            let load = |p: &Path| -> anyhow::Result<covsep::Mat> {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading {}", p.display()))?;
                Ok(QcmFile::parse(&text)?.to_matrix::<f64>()?)
            };
            let result = match &mc {
                MeansCommand::Geometric { a, b } => geometric_mean(&load(a)?, &load(b)?, &tol)?,
                MeansCommand::Harmonic { a, b } => harmonic_mean(&load(a)?, &load(b)?, &tol)?,
                MeansCommand::Arithmetic { a, b } => arithmetic_mean(&load(a)?, &load(b)?),
                MeansCommand::Schur { m, split, epsilon } => {
                    let mat = load(m)?;
                    let part = BlockPartition::new(*split, mat.nrows())?;
                    schur_complement(&mat, part, *epsilon)?
                }
            };
            println!(
                "{}",
                serde_json::to_string_pretty(&MatrixData::from_mat(&result))?
            );
            Ok(EXIT_POSITIVE)
        }
        Command::Revalidate { cert, json } => {
            let cf = load_cert(&cert)?;
            let reval = revalidate_cert(&cf)?;
            if json {
                println!(
                    "{}",
                    serde_json::json!({
                        "digest_ok": reval.digest_ok,
                        "witness_ok": reval.witness_ok,
                        "messages": reval.messages,
                    })
                );
            } else {
                println!(
                    "digest: {}, witness: {}",
                    if reval.digest_ok { "ok" } else { "MISMATCH" },
                    if reval.witness_ok { "ok" } else { "FAILED" }
                );
                for m in &reval.messages {
                    println!("note: {m}");
                }
            }
            Ok(if reval.ok() {
                EXIT_POSITIVE
            } else {
                EXIT_NEGATIVE
            })
        }
    }
}
