use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use autoredux::autoreduce::{AutoreductionProcedure, PsiTable};
use autoredux::cototal::{enumerate_from_complement, Schedule};
use autoredux::diagonal::{
    diag_run, diag_run_degree, encode_compressible_stage, relativized_range, verify_diag,
    DegreeSetting, RunOutcome,
};
use autoredux::enumop::parse_operator_in;
use autoredux::prefixmachine::{machine_encode, Report};
use autoredux::witness::{
    gen_cototal_example, gen_threshold_uie, gen_trivial_uie, is_cototal_witness, is_uie_witness,
    ModeRequest,
};
use autoredux::{BitVector, EnumerationOperator, Estimate64, LeftCEReal, Universe};
use clap::ValueEnum;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::CliError;
use crate::{
    CheckArgs, Cli, Command, CompressArgs, CototalArgs, DiagArgs, FixtureKind, GenArgs,
    MeasureArgs, MeasureMode, PsiChoice, RunConfig, ScheduleChoice, WitnessKind,
};

/// Largest N measured exhaustively in `--mode auto`.
const AUTO_EXHAUSTIVE: usize = 20;

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = &cli.run;
    let text = match &cli.command {
        Command::Measure(args) => measure(cfg, args)?,
        Command::Diag(args) => diag(cfg, args)?,
        Command::Compress(args) => compress(cfg, args)?,
        Command::Cototal(args) => cototal(cfg, args)?,
        Command::Check(args) => check(cfg, args)?,
        Command::Gen(args) => return gen(cfg, args),
    };
    emit(cfg, &text)
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn inputs(cfg: &RunConfig, wanted: &str, min: usize, max: usize) -> Result<Vec<PathBuf>, CliError> {
    let n = cfg.inputs.len();
    if n < min || n > max {
        return Err(CliError::usage(format!(
            "expected --in {wanted}, got {n} path(s)"
        )));
    }
    Ok(cfg.inputs.clone())
}

fn universe_flag(cfg: &RunConfig) -> Result<Option<Universe>, CliError> {
    cfg.universe
        .map(Universe::new)
        .transpose()
        .map_err(CliError::from)
}

fn load_operator(path: &Path, universe: Option<Universe>) -> Result<EnumerationOperator, CliError> {
    let op = parse_operator_in(&read(path)?, universe).map_err(|e| CliError::parse(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(op.with_name(name))
}

fn load_set(path: &Path, universe: Option<Universe>) -> Result<BitVector, CliError> {
    let text = read(path)?;
    let line = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .find(|l| !l.is_empty())
        .ok_or_else(|| CliError::parse(path, "no set line"))?;
    BitVector::parse_line(line, universe).map_err(|e| CliError::parse(path, e))
}

/// Loads a set followed by operators, all in the operators' universe.
fn load_set_and_ops(
    cfg: &RunConfig,
    paths: &[PathBuf],
) -> Result<(BitVector, Vec<EnumerationOperator>), CliError> {
    let flag = universe_flag(cfg)?;
    let ops = paths[1..]
        .iter()
        .map(|p| load_operator(p, flag))
        .collect::<Result<Vec<_>, _>>()?;
    let universe = ops.first().map(EnumerationOperator::universe).or(flag);
    for op in &ops {
        if Some(op.universe()) != universe {
            return Err(CliError::usage(format!(
                "operator {} has universe {}, expected {}",
                op.name(),
                op.universe().size(),
                universe.map_or(0, Universe::size)
            )));
        }
    }
    let set = load_set(&paths[0], universe)?;
    Ok((set, ops))
}

fn tau_for(cfg: &RunConfig, universe: Universe) -> Result<usize, CliError> {
    let tau = cfg.tau.unwrap_or_else(|| universe.default_tau());
    if tau >= universe.size() {
        return Err(CliError::usage(format!(
            "--tau {tau} must lie below N={}",
            universe.size()
        )));
    }
    Ok(tau)
}

fn parse_range(text: &str, what: &str) -> Result<(usize, usize, usize), CliError> {
    let parts: Result<Vec<usize>, _> = text.split(':').map(str::parse).collect();
    let bad = || CliError::usage(format!("bad {what} {text:?}: expected FROM:TO[:STEP]"));
    match parts.map_err(|_| bad())?[..] {
        [one] => Ok((one, one, 1)),
        [from, to] if from <= to => Ok((from, to, 1)),
        [from, to, step] if from <= to && step > 0 => Ok((from, to, step)),
        _ => Err(bad()),
    }
}

fn measure(cfg: &RunConfig, args: &MeasureArgs) -> Result<String, CliError> {
    let loaded = match args.psi {
        PsiChoice::Cototal | PsiChoice::Uie => {
            let want = if args.psi == PsiChoice::Cototal { 1 } else { 3 };
            let paths = inputs(
                cfg,
                if want == 1 {
                    "DELTA"
                } else {
                    "PHI GAMMA DELTA"
                },
                want,
                want,
            )?;
            let flag = universe_flag(cfg)?;
            let ops = paths
                .iter()
                .map(|p| load_operator(p, flag))
                .collect::<Result<Vec<_>, _>>()?;
            Some(ops)
        }
        _ => None,
    };
    let sizes: Vec<usize> = match (&args.sweep, &loaded) {
        (Some(_), Some(_)) => {
            return Err(CliError::usage(
                "--sweep needs a built-in --psi; operator files fix N",
            ));
        }
        (Some(s), None) => {
            let (from, to, step) = parse_range(s, "sweep")?;
            (from..=to).step_by(step).collect()
        }
        (None, Some(ops)) => vec![ops[0].universe().size()],
        (None, None) => vec![cfg
            .universe
            .ok_or_else(|| CliError::usage("measure needs --universe or --sweep"))?],
    };

    let mut out = String::from("psi_kind,N,samples,seed,fraction,ci_low,ci_high,exact_count\n");
    let kind = args.psi.to_possible_value().expect("no skipped variants");
    for n in sizes {
        let universe = Universe::new(n)?;
        let psi = match (args.psi, &loaded) {
            (PsiChoice::CototalExample, _) => {
                AutoreductionProcedure::cototal(gen_cototal_example(n)?.1)
            }
            (PsiChoice::Zero, _) => {
                AutoreductionProcedure::cototal(EnumerationOperator::new(universe, "empty"))
            }
            (PsiChoice::CopyNext, _) => {
                AutoreductionProcedure::custom(PsiTable::copy_next(universe)?)
            }
            (PsiChoice::Cototal, Some(ops)) => AutoreductionProcedure::cototal(ops[0].clone()),
            (PsiChoice::Uie, Some(ops)) => AutoreductionProcedure::uie(
                ops[0].clone(),
                ops[1].clone(),
                ops[2].clone(),
                tau_for(cfg, universe)?,
            )?,
            _ => unreachable!("operator kinds are loaded above"),
        };
        let exhaustive = match args.mode {
            MeasureMode::Auto => n <= AUTO_EXHAUSTIVE,
            MeasureMode::Exhaustive => true,
            MeasureMode::Sampled => false,
        };
        if exhaustive {
            let count = psi.count_autoreducible()?;
            let total = 1u64 << n;
            let fraction = count as f64 / total as f64;
            writeln!(
                out,
                "{},{n},{total},{},{fraction},{fraction},{fraction},{count}",
                kind.get_name(),
                cfg.seed
            )
            .expect("write to string");
        } else {
            let est: Estimate64 = psi.sample_fraction(cfg.samples, cfg.seed)?;
            writeln!(
                out,
                "{},{n},{},{},{},{},{},",
                kind.get_name(),
                est.samples,
                cfg.seed,
                est.fraction,
                est.ci_low,
                est.ci_high
            )
            .expect("write to string");
        }
    }
    Ok(out)
}

fn diag(cfg: &RunConfig, args: &DiagArgs) -> Result<String, CliError> {
    let paths = inputs(cfg, "SET OP [OP...]", 2, usize::MAX)?;
    let (a, ops) = load_set_and_ops(cfg, &paths)?;
    let universe = ops[0].universe();
    let tau = tau_for(cfg, universe)?;
    let mut out = String::new();

    if let (Some(phi), Some(delta)) = (&args.phi, &args.delta) {
        let phi = load_operator(phi, Some(universe))?;
        let delta = load_operator(delta, Some(universe))?;
        let setting = DegreeSetting::new(a, phi, delta, tau)?;
        let outcome = diag_run_degree(&setting, &ops)?;
        out.push_str(&outcome.state().log_text());
        match &outcome {
            RunOutcome::Success { set, .. } => {
                writeln!(out, "verdict: success").unwrap();
                writeln!(out, "{}", set.to_set_line()).unwrap();
                writeln!(out, "verified: {}", verify_diag(&setting.b, &ops, set, tau)).unwrap();
            }
            RunOutcome::Compressible { stage, state } => {
                writeln!(out, "verdict: compressible at stage {stage}").unwrap();
                writeln!(out, "prefix: {}", state.prefix).unwrap();
                writeln!(out, "excluded: {}", state.excluded.to_set_line()).unwrap();
                let psi = setting.procedure(&ops[*stage], state)?;
                let verdict = psi.is_autoreducible(&setting.a);
                writeln!(out, "autoreducible: {}", verdict.holds).unwrap();
            }
        }
        return Ok(out);
    }

    let outcome = diag_run(&a, &ops, tau)?;
    out.push_str(&outcome.state().log_text());
    match &outcome {
        RunOutcome::Success { set, .. } => {
            writeln!(out, "verdict: success").unwrap();
            writeln!(out, "{}", set.to_set_line()).unwrap();
            writeln!(out, "verified: {}", verify_diag(&a, &ops, set, tau)).unwrap();
        }
        RunOutcome::Compressible { stage, state } => {
            writeln!(out, "verdict: compressible at stage {stage}").unwrap();
            writeln!(out, "prefix: {}", state.prefix).unwrap();
            writeln!(out, "{}", Report::CSV_HEADER).unwrap();
            for m in relativized_range(&a, &state.prefix, tau) {
                let input = encode_compressible_stage(&a, &ops[*stage], state, m, tau)?;
                writeln!(out, "{}", Report::from_input(&input)?.to_csv_row()).unwrap();
            }
        }
    }
    Ok(out)
}

fn compress(cfg: &RunConfig, args: &CompressArgs) -> Result<String, CliError> {
    let paths = inputs(cfg, "SET GAMMA", 2, 2)?;
    let (a, ops) = load_set_and_ops(cfg, &paths)?;
    let gamma = &ops[0];
    let size = gamma.universe().size();
    // by default, every window that leaves part of A above it
    let (from, to, step) = match (&args.m, a.max_element()) {
        (Some(range), _) => parse_range(range, "--m")?,
        (None, Some(top)) if top >= 1 => (1, top.min(size - 1), 1),
        (None, _) => return Err(CliError::usage("set has no element above position 0")),
    };
    let mut out = format!("{}\n", Report::CSV_HEADER);
    for m in (from..=to).step_by(step) {
        let input = machine_encode(&a, gamma, m)?;
        writeln!(out, "{}", Report::from_input(&input)?.to_csv_row()).unwrap();
    }
    Ok(out)
}

fn cototal(cfg: &RunConfig, args: &CototalArgs) -> Result<String, CliError> {
    let paths = inputs(cfg, "REAL", 1, 1)?;
    let real = LeftCEReal::parse(&read(&paths[0])?).map_err(|e| CliError::parse(&paths[0], e))?;
    let mut order: Vec<usize> = real.complement_stream().iter().collect();
    if args.shuffle {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(cfg.seed));
    }
    let schedule = match args.schedule {
        ScheduleChoice::RoundRobin => Schedule::RoundRobin,
        ScheduleChoice::CompFirst => Schedule::CompFirst,
        ScheduleChoice::QFirst => Schedule::QFirst,
    };
    let emission = enumerate_from_complement(&real, order, &schedule)?;
    Ok(emission.trace.iter().map(|r| format!("{r}\n")).collect())
}

fn check(cfg: &RunConfig, args: &CheckArgs) -> Result<String, CliError> {
    let paths = inputs(cfg, "SET GAMMA", 2, 2)?;
    let (a, ops) = load_set_and_ops(cfg, &paths)?;
    let report = match args.kind {
        WitnessKind::Cototal => is_cototal_witness(&a, &ops[0])?,
        WitnessKind::Uie => {
            let tau = tau_for(cfg, ops[0].universe())?;
            let request = if args.sampled {
                ModeRequest::Sampled {
                    count: cfg.samples,
                    seed: cfg.seed,
                }
            } else {
                ModeRequest::Auto {
                    samples: cfg.samples,
                    seed: cfg.seed,
                }
            };
            is_uie_witness(&a, &ops[0], tau, request)?
        }
    };
    Ok(report.to_string())
}

fn evens(n: usize) -> Result<BitVector, CliError> {
    Ok(BitVector::from_indices(n, (0..n).step_by(2))?)
}

fn gen(cfg: &RunConfig, args: &GenArgs) -> Result<(), CliError> {
    let dir = cfg
        .out
        .as_ref()
        .ok_or_else(|| CliError::usage("gen needs --out DIR"))?;
    let n = cfg
        .universe
        .ok_or_else(|| CliError::usage("gen needs --universe N"))?;
    let universe = Universe::new(n)?;
    let files: Vec<(&str, String)> = match args.kind {
        FixtureKind::Cototal => {
            let (a, gamma) = gen_cototal_example(n)?;
            vec![
                ("set.txt", format!("{a}\n")),
                ("gamma.txt", gamma.to_text()),
            ]
        }
        FixtureKind::TrivialUie => {
            let a = evens(n)?;
            let gamma = gen_trivial_uie(&a)?;
            vec![
                ("set.txt", format!("{a}\n")),
                ("gamma.txt", gamma.to_text()),
            ]
        }
        FixtureKind::ThresholdUie => {
            let a = evens(n)?;
            let gamma = gen_threshold_uie(&a, tau_for(cfg, universe)?)?;
            vec![
                ("set.txt", format!("{a}\n")),
                ("gamma.txt", gamma.to_text()),
            ]
        }
        FixtureKind::Diag => {
            if n < 8 {
                return Err(CliError::usage(
                    "the diag fixture needs --universe of at least 8",
                ));
            }
            let a = evens(n)?;
            let op0 = EnumerationOperator::from_axioms(universe, "op0", [(5, [0])])?;
            let op1 = EnumerationOperator::from_axioms(
                universe,
                "op1",
                (0..n).step_by(2).map(|x| (x, [2])),
            )?;
            let op2 = gen_trivial_uie(&a)?;
            vec![
                ("set.txt", format!("{a}\n")),
                ("op0.txt", op0.to_text()),
                ("op1.txt", op1.to_text()),
                ("op2.txt", op2.to_text()),
            ]
        }
    };
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut listing = String::new();
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| CliError::io(&path, e))?;
        writeln!(listing, "wrote {name}").unwrap();
    }
    print!("{listing}");
    Ok(())
}
