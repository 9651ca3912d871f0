use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use redgrp_core::algebra::{format_rational, moment_sequence_capped, AlgebraElement, RadialElement};
use redgrp_core::ball::{ball_cap_from_env, unital_symmetric};
use redgrp_core::compression::{
    compression, fmt_sig, increasing_window_profile, norm_oracle, operator_norm, prop_a_window, sandwich_check,
    ModulusTable, NormEstimate, DEFAULT_TOLERANCE,
};
use redgrp_core::marked::{strong_convergence_table, Marking};
use redgrp_core::means::{certify_mean, modulus_estimate, modulus_search, MeanFamily};
use redgrp_core::notation::parse_group_in;
use redgrp_core::{Ball, Error, Group, Word};

mod manifest;

#[derive(Parser, Debug)]
#[command(name = "redgrp", version, about = "Reduced group algebra norm experiments")]
struct Cli {
    /// Worker threads for independent rows (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Ball and support cap; overrides REDGRP_BALL_CAP.
    #[arg(long, global = true)]
    cap: Option<usize>,
    /// Write the table or record here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Directory for relative `finite:` table paths.
    #[arg(long, global = true, hide = true)]
    base_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Size of the ball of a given radius.
    Ball(BallArgs),
    /// Norm of λ(f) by an oracle, a compression or moments.
    Norm(NormArgs),
    /// Exact moments m_{2n} and their roots.
    Srf(SrfArgs),
    /// Compression norms over increasing balls.
    Compress(CompressArgs),
    /// Defect certificate of a Følner or tree mean.
    MeanCertify(MeanArgs),
    /// Certified modulus entries k(|F|).
    Modulus(ModulusArgs),
    /// Strong convergence table along a sequence of markings.
    Converge(ConvergeArgs),
    /// Check ‖compression‖ ≤ reference ≤ (1+ε)·‖compression‖.
    Sandwich(SandwichArgs),
    /// Run a key = value manifest.
    Run { manifest: PathBuf },
}

#[derive(Args, Debug)]
struct BallArgs {
    #[arg(long)]
    group: String,
    #[arg(long)]
    radius: usize,
    /// Comma-separated words; the standard unital symmetric set by default.
    #[arg(long)]
    generators: Option<String>,
    /// Print the elements instead of the size.
    #[arg(long)]
    list: bool,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum NormRoute {
    Oracle,
    Power,
    Moment,
}

#[derive(Args, Debug)]
struct NormArgs {
    #[arg(long)]
    group: String,
    #[arg(long)]
    element: PathBuf,
    #[arg(long, value_enum, default_value = "oracle")]
    method: NormRoute,
    /// Window radius for `power`.
    #[arg(long, default_value_t = 4)]
    radius: usize,
    /// Moment count for `moment`.
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
}

#[derive(Args, Debug)]
struct SrfArgs {
    #[arg(long)]
    group: String,
    #[arg(long)]
    element: PathBuf,
    #[arg(long)]
    n: usize,
}

#[derive(Args, Debug)]
struct CompressArgs {
    #[arg(long)]
    group: String,
    #[arg(long)]
    element: PathBuf,
    /// `a..b` or a comma-separated list.
    #[arg(long)]
    radii: String,
    #[arg(long)]
    generators: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    tol: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MeanKind {
    Folner,
    Tree,
}

#[derive(Args, Debug)]
struct MeanArgs {
    #[arg(long)]
    group: String,
    /// Comma-separated unital symmetric set; the standard one by default.
    #[arg(long)]
    f: Option<String>,
    #[arg(long, value_enum)]
    mean: Option<MeanKind>,
    #[arg(long)]
    n: usize,
    /// Test ball radius; raise it until the outer shells agree.
    #[arg(long, default_value_t = 4)]
    radius: usize,
    /// End letter of tree means.
    #[arg(long, default_value = "a")]
    end: String,
}

#[derive(Args, Debug)]
struct ModulusArgs {
    #[arg(long)]
    group: String,
    /// One set per flag; the standard set when absent.
    #[arg(long)]
    f: Vec<String>,
    #[arg(long, value_enum)]
    mean: Option<MeanKind>,
    #[arg(long, default_value = "a")]
    end: String,
    #[arg(long, default_value_t = 3)]
    radius: usize,
    #[arg(long, default_value_t = 1 << 12)]
    n_cap: usize,
}

#[derive(Args, Debug)]
struct ConvergeArgs {
    /// Limit group; its generators mark the free group.
    #[arg(long)]
    limit: String,
    /// Terms of the sequence, one per flag.
    #[arg(long)]
    term: Vec<String>,
    /// Shorthand for terms cyclic:n, comma-separated.
    #[arg(long)]
    cyclic: Option<String>,
    /// Element of the free group of the limit's rank.
    #[arg(long)]
    element: PathBuf,
    #[arg(long, default_value_t = 64)]
    r_max: usize,
}

#[derive(Args, Debug)]
struct SandwichArgs {
    #[arg(long)]
    group: String,
    #[arg(long, required_unless_present = "random")]
    element: Option<PathBuf>,
    /// Check this many random elements instead of one file.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `full`, `radius:R` or `modulus`.
    #[arg(long, default_value = "modulus")]
    window: String,
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    #[arg(long)]
    f: Option<String>,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Test radius for certificates behind `modulus`.
    #[arg(long, default_value_t = 3)]
    mean_radius: usize,
}

/// A falsified check, as opposed to an error.
struct Falsified(String);

type Outcome = Result<Option<Falsified>, Error>;

struct Ctx {
    cap: usize,
    out: Option<PathBuf>,
    base: PathBuf,
}

impl Ctx {
    fn group(&self, text: &str) -> Result<Group, Error> {
        parse_group_in(text, &self.base)
    }

    fn element(&self, group: &Group, path: &Path) -> Result<AlgebraElement, Error> {
        let text = fs::read_to_string(path)?;
        AlgebraElement::parse(group, &text).map_err(|e| match e {
            Error::Parse { line, column, message } => Error::Parse {
                line,
                column,
                message: format!("{}: {message}", path.display()),
            },
            other => other,
        })
    }

    fn emit(&self, text: &str) -> Result<(), Error> {
        match &self.out {
            Some(p) => fs::write(p, text)?,
            None => io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }
}

fn parse_words(list: &str) -> Result<Vec<Word>, Error> {
    list.split(',').map(|s| Word::parse(s.trim())).collect()
}

fn parse_set(group: &Group, list: Option<&str>) -> Result<Vec<Word>, Error> {
    let words = match list {
        Some(l) => parse_words(l)?,
        None => group.standard_generating_set(),
    };
    unital_symmetric(group, &words)
}

fn parse_radii(text: &str) -> Result<Vec<usize>, Error> {
    let bad = || Error::InvalidInput(format!("bad radii {text:?}"));
    if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        return Ok((a..=b).collect());
    }
    text.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect()
}

fn family(group: &Group, kind: Option<MeanKind>, end: &str) -> Result<MeanFamily, Error> {
    match kind {
        None => MeanFamily::for_group(group),
        Some(MeanKind::Folner) => Ok(MeanFamily::Folner),
        Some(MeanKind::Tree) => {
            let w = Word::parse(end)?;
            match w.letters() {
                [l] => Ok(MeanFamily::Tree { end: *l }),
                _ => Err(Error::InvalidInput(format!("end must be one letter, got {end:?}"))),
            }
        }
    }
}

fn estimate_line(e: &NormEstimate) -> String {
    format!(
        "{},{},{},{}\n",
        fmt_sig(e.value),
        e.method,
        fmt_sig(e.tolerance),
        e.iterations
    )
}

fn cmd_ball(ctx: &Ctx, a: &BallArgs) -> Outcome {
    let g = ctx.group(&a.group)?;
    let gens = parse_set(&g, a.generators.as_deref())?;
    let ball = Ball::new(&g, &gens, a.radius, ctx.cap)?;
    if a.list {
        let words: Vec<String> = ball.words().iter().map(Word::to_string).collect();
        ctx.emit(&(words.join("\n") + "\n"))?;
    } else {
        ctx.emit(&format!("{}\n", ball.len()))?;
    }
    Ok(None)
}

fn cmd_norm(ctx: &Ctx, a: &NormArgs) -> Outcome {
    let g = ctx.group(&a.group)?;
    let f = ctx.element(&g, &a.element)?;
    let est = match a.method {
        NormRoute::Oracle => norm_oracle(&f)?,
        NormRoute::Power => {
            let gens = unital_symmetric(&g, &g.standard_generating_set())?;
            let ball = Ball::new(&g, &gens, a.radius, ctx.cap)?;
            operator_norm(&compression(&f, &ball)?, a.tol)?
        }
        NormRoute::Moment => NormEstimate::from_moments(&moment_sequence_capped(&f, a.n, ctx.cap)?),
    };
    ctx.emit(&format!("value,method,tolerance,iterations\n{}", estimate_line(&est)))?;
    Ok(None)
}

fn cmd_srf(ctx: &Ctx, a: &SrfArgs) -> Outcome {
    let g = ctx.group(&a.group)?;
    let f = ctx.element(&g, &a.element)?;
    let radial = match g {
        Group::Free { .. } => RadialElement::from_algebra(&f),
        _ => None,
    };
    let moments = match radial {
        Some(r) => r.moments(a.n)?,
        None => moment_sequence_capped(&f, a.n, ctx.cap)?,
    };
    let mut out = String::from("n,moment,root\n");
    for (i, (m, r)) in moments.values.iter().zip(&moments.roots).enumerate() {
        out.push_str(&format!("{},{},{}\n", i + 1, format_rational(m), fmt_sig(*r)));
    }
    ctx.emit(&out)?;
    if moments.truncated {
        return Err(Error::SupportOverflow { cap: ctx.cap });
    }
    Ok(None)
}

fn cmd_compress(ctx: &Ctx, a: &CompressArgs) -> Outcome {
    let g = ctx.group(&a.group)?;
    let f = ctx.element(&g, &a.element)?;
    let gens = parse_set(&g, a.generators.as_deref())?;
    let radii = parse_radii(&a.radii)?;
    let profile = increasing_window_profile(&f, &gens, &radii, a.tol, ctx.cap)?;
    ctx.emit(&profile.to_csv())?;
    if !profile.truncated.is_empty() {
        return Err(Error::BallOverflow { cap: ctx.cap });
    }
    if !profile.is_nondecreasing() {
        return Ok(Some(Falsified("compression profile decreased".into())));
    }
    Ok(None)
}

fn cmd_mean_certify(ctx: &Ctx, a: &MeanArgs) -> Outcome {
    let g = ctx.group(&a.group)?;
    let f_set = parse_set(&g, a.f.as_deref())?;
    let mean = family(&g, a.mean, &a.end)?.build(&g, &f_set, a.n)?;
    let cert = certify_mean(mean.as_ref(), &f_set, a.radius, ctx.cap)?;
    ctx.emit(&cert.to_record())?;
    if !cert.stabilized {
        eprintln!("warning: outer shells differ; raise --radius");
    }
    match &cert.tree_bound {
        Some((_, false)) => Ok(Some(Falsified("tree defect bound violated".into()))),
        _ => Ok(None),
    }
}

fn cmd_modulus(ctx: &Ctx, a: &ModulusArgs) -> Outcome {
    let g = ctx.group(&a.group)?;
    let sets: Vec<Vec<Word>> = if a.f.is_empty() {
        vec![parse_set(&g, None)?]
    } else {
        a.f.iter().map(|s| parse_set(&g, Some(s))).collect::<Result<_, _>>()?
    };
    let table = modulus_estimate(&g, family(&g, a.mean, &a.end)?, &sets, a.radius, a.n_cap, ctx.cap)?;
    let mut out = String::from("m,k,defect\n");
    for (m, e) in table.entries() {
        let defect = e.defect.as_ref().map_or(String::new(), format_rational);
        out.push_str(&format!("{m},{},{defect}\n", e.k));
    }
    ctx.emit(&out)?;
    Ok(None)
}

fn cmd_converge(ctx: &Ctx, a: &ConvergeArgs) -> Outcome {
    let limit_group = ctx.group(&a.limit)?;
    let d = limit_group.rank();
    let limit = Marking::new(d, &limit_group)?;
    let mut specs = a.term.clone();
    if let Some(list) = &a.cyclic {
        specs.extend(list.split(',').map(|n| format!("cyclic:{}", n.trim())));
    }
    let terms = specs
        .iter()
        .map(|s| Ok((s.clone(), Marking::new(d, &ctx.group(s)?)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    let f = ctx.element(&Group::free(d), &a.element)?;
    let table = strong_convergence_table(&limit, &terms, &f, a.r_max, ctx.cap)?;
    ctx.emit(&table.to_csv())?;
    Ok(None)
}

/// Random element with at most four support points and ℓ1 norm at most 3.
fn random_element(group: &Group, pool: &[Word], rng: &mut ChaCha8Rng) -> Result<AlgebraElement, Error> {
    let size = rng.gen_range(1..=4usize);
    let terms: Vec<(Word, BigRational)> = (0..size)
        .map(|_| {
            let w = pool[rng.gen_range(0..pool.len())].clone();
            let mut c: i64 = rng.gen_range(1..=3);
            if rng.gen_bool(0.5) {
                c = -c;
            }
            (w, BigRational::new(BigInt::from(c), BigInt::from(4)))
        })
        .collect();
    AlgebraElement::from_words(group, &terms)
}

fn sandwich_window(ctx: &Ctx, g: &Group, a: &SandwichArgs) -> Result<(Ball, f64), Error> {
    let f_set = parse_set(g, a.f.as_deref())?;
    if a.window == "full" {
        let order = g
            .finite_order()
            .ok_or_else(|| Error::InvalidInput("window full needs a finite group".into()))?;
        return Ok((Ball::new(g, &f_set, order as usize, ctx.cap)?, a.eps));
    }
    if let Some(r) = a.window.strip_prefix("radius:") {
        let r: usize = r
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad window {:?}", a.window)))?;
        return Ok((Ball::new(g, &f_set, r, ctx.cap)?, a.eps));
    }
    if a.window != "modulus" {
        return Err(Error::InvalidInput(format!("unknown window {:?}", a.window)));
    }
    // certify defect ≤ 1/m on F with m = |F| + ⌊2/ε⌋, or exact invariance at ε = 0
    let m = if a.eps > 0.0 {
        f_set.len() + (2.0 / a.eps).floor() as usize
    } else {
        f_set.len()
    };
    let target = if a.eps > 0.0 {
        BigRational::new(BigInt::from(1), BigInt::from(m))
    } else {
        BigRational::from_integer(BigInt::from(0))
    };
    let entry = modulus_search(g, MeanFamily::for_group(g)?, &f_set, &target, a.mean_radius, 1 << 12, ctx.cap)?;
    let mut table = ModulusTable::new();
    table.insert(m, entry);
    Ok((prop_a_window(g, &f_set, a.eps, &table, ctx.cap)?, a.eps))
}

fn cmd_sandwich(ctx: &Ctx, a: &SandwichArgs) -> Outcome {
    let g = ctx.group(&a.group)?;
    let elements: Vec<(String, AlgebraElement)> = match (a.random, &a.element) {
        (Some(count), _) => {
            let radius = g.finite_order().map_or(3, |o| o as usize);
            let pool = Ball::new(&g, &parse_set(&g, None)?, radius, ctx.cap)?.words();
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            (0..count)
                .map(|i| Ok((format!("random{i}"), random_element(&g, &pool, &mut rng)?)))
                .collect::<Result<_, Error>>()?
        }
        (None, Some(path)) => vec![(path.display().to_string(), ctx.element(&g, path)?)],
        (None, None) => unreachable!("clap requires one of them"),
    };
    let (window, eps) = sandwich_window(ctx, &g, a)?;
    let mut out = String::from("case,reference,compression,eps,dimension,lower_margin,upper_margin,passed\n");
    let mut failed = 0;
    for (label, f) in &elements {
        let reference = norm_oracle(f)?;
        let r = sandwich_check(f, &window, eps, &reference, a.tol)?;
        if !r.passed {
            failed += 1;
        }
        out.push_str(&format!(
            "{label},{},{},{},{},{},{},{}\n",
            fmt_sig(r.reference.value),
            fmt_sig(r.compression.value),
            fmt_sig(r.eps),
            r.dimension,
            fmt_sig(r.lower_margin),
            fmt_sig(r.upper_margin),
            r.passed
        ));
    }
    ctx.emit(&out)?;
    if failed > 0 {
        return Ok(Some(Falsified(format!("{failed} of {} sandwich checks failed", elements.len()))));
    }
    Ok(None)
}

fn dispatch(ctx: &Ctx, command: &Command) -> Outcome {
    match command {
        Command::Ball(a) => cmd_ball(ctx, a),
        Command::Norm(a) => cmd_norm(ctx, a),
        Command::Srf(a) => cmd_srf(ctx, a),
        Command::Compress(a) => cmd_compress(ctx, a),
        Command::MeanCertify(a) => cmd_mean_certify(ctx, a),
        Command::Modulus(a) => cmd_modulus(ctx, a),
        Command::Converge(a) => cmd_converge(ctx, a),
        Command::Sandwich(a) => cmd_sandwich(ctx, a),
        Command::Run { manifest } => {
            let args = manifest::load(manifest)?;
            let cli = Cli::try_parse_from(args).map_err(|e| Error::InvalidInput(e.to_string()))?;
            if matches!(cli.command, Command::Run { .. }) {
                return Err(Error::InvalidInput("manifests cannot run other manifests".into()));
            }
            run(cli)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    if let Some(j) = cli.jobs {
        // a second call from a manifest keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(j.max(1)).build_global();
    }
    let ctx = Ctx {
        cap: cli.cap.unwrap_or_else(ball_cap_from_env),
        out: cli.out,
        base: cli.base_dir.unwrap_or_else(|| PathBuf::from(".")),
    };
    dispatch(&ctx, &cli.command)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(Falsified(msg))) => {
            eprintln!("falsified: {msg}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use redgrp_core::Letter;

    #[test]
    fn radii_forms() {
        assert_eq!(parse_radii("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_radii("2, 5").unwrap(), vec![2, 5]);
        assert!(parse_radii("x").is_err());
    }

    #[test]
    fn random_elements_respect_bounds() {
        let g = Group::cyclic(12);
        let pool = Ball::new(&g, &parse_set(&g, None).unwrap(), 12, 100).unwrap().words();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let f = random_element(&g, &pool, &mut rng).unwrap();
            assert!(f.support_len() <= 4);
            assert!(f.l1_norm() <= BigRational::from_integer(3.into()));
        }
    }

    #[test]
    fn tree_end_letter() {
        let g = Group::free(2);
        assert_eq!(
            family(&g, Some(MeanKind::Tree), "b").unwrap(),
            MeanFamily::Tree { end: Letter::gen(1) }
        );
        assert!(family(&g, Some(MeanKind::Tree), "ab").is_err());
    }
}
