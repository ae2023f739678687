//! Experiment configuration: a TOML file with a fixed key tree.
//!
//! ```toml
//! [group]
//! rank = 2
//!
//! [run]                      # every key optional
//! max_len = 10
//! depth = 4                  # cylinder depth of the transfer operator
//! flag_depth = 12
//! threads = 0                # 0 = one worker per core
//! seed = 0
//! samples = 0                # random words per representation in `spectrum`
//! sample_len = 24
//! shell_len = 12
//! certify_len = 8
//! step = "1/100"
//! richardson = false
//!
//! [output]
//! dir = "out"
//! cache = "classes.cache"    # optional
//!
//! [[representation]]
//! label = "schottky"
//! generators = [[["3", "0"], ["0", "1/3"]], [["5/3", "4/3"], ["4/3", "5/3"]]]
//! symmetric_power = 3        # optional
//!
//! [[kleinian]]
//! label = "bent"
//! base = "schottky"
//! bend = { generator = 1, axis = ["9/20", "5/2"], angle = "1/5" }
//!
//! [[pair]]
//! f = "schottky"
//! g = "word_length"
//!
//! [[crossratio]]
//! representation = "schottky"
//! alpha = "b"
//! beta = "a"
//! n_max = 12
//!
//! [[rank_scan]]
//! representation = "schottky"
//! pool_len = 3
//! pool_size = 10
//! p_max = 4
//!
//! [[family]]
//! label = "sl2"
//! params = ["t", "s"]
//! generators = [[["1 + (2 + t)^2", "2 + t"], ["2 + t", "1"]], [["1", "2 + s"], ["2 + s", "1 + (2 + s)^2"]]]
//! base_point = ["0", "0"]
//! bounds = [["-1/2", "1/2"], ["-1/2", "1/2"]]
//! conjugations = [{ matrix = [["1", "s"], ["0", "1"]], generators = [1] }]
//! symmetric_power = 3
//! ```
//!
//! Matrix entries and real parameters are strings holding exact rationals
//! (`"5/3"`, `"-0.45"`, `"1e-3"`); they are converted to `f64` once, after
//! validation. Family entries are polynomial expressions in the parameters.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use pressure_lab::families::{PolyMatrix, RepFamily};
use pressure_lab::group::Word;
use pressure_lab::kleinian::KleinianRep;
use pressure_lab::polynomial::Polynomial;
use pressure_lab::rep::Representation;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::Spanned;

use crate::error::CliError;

type Entry = Spanned<String>;
type RawMatrix = Vec<Vec<Entry>>;
type ExactMatrix = Vec<Vec<String>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    group: RawGroup,
    #[serde(default)]
    run: RawRun,
    #[serde(default)]
    output: RawOutput,
    #[serde(default, rename = "representation")]
    representations: Vec<RawRep>,
    #[serde(default)]
    kleinian: Vec<RawKleinian>,
    #[serde(default, rename = "pair")]
    pairs: Vec<RawPair>,
    #[serde(default)]
    crossratio: Vec<RawCrossRatio>,
    #[serde(default)]
    rank_scan: Vec<RawRankScan>,
    #[serde(default, rename = "family")]
    families: Vec<RawFamily>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGroup {
    rank: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    max_len: Option<usize>,
    depth: Option<usize>,
    flag_depth: Option<usize>,
    threads: Option<usize>,
    seed: Option<u64>,
    samples: Option<usize>,
    sample_len: Option<usize>,
    shell_len: Option<usize>,
    certify_len: Option<usize>,
    step: Option<Entry>,
    richardson: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<String>,
    cache: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRep {
    label: Spanned<String>,
    dimension: Option<usize>,
    generators: Vec<RawMatrix>,
    symmetric_power: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKleinian {
    label: Spanned<String>,
    base: Spanned<String>,
    bend: Option<RawBend>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBend {
    generator: usize,
    axis: [Entry; 2],
    angle: Entry,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPair {
    f: Spanned<String>,
    g: Spanned<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCrossRatio {
    representation: Spanned<String>,
    alpha: Spanned<String>,
    beta: Spanned<String>,
    n_max: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRankScan {
    representation: Spanned<String>,
    pool_len: Option<usize>,
    pool_size: Option<usize>,
    p_max: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFamily {
    label: Spanned<String>,
    params: Vec<String>,
    generators: Vec<RawMatrix>,
    base_point: Option<Vec<Entry>>,
    bounds: Option<Vec<[Entry; 2]>>,
    #[serde(default)]
    conjugations: Vec<RawConjugation>,
    symmetric_power: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConjugation {
    matrix: RawMatrix,
    generators: Option<Vec<usize>>,
}

/// Run parameters after defaults and command-line overrides.
#[derive(Debug, Clone, Serialize)]
pub struct RunParams {
    pub max_len: usize,
    pub depth: usize,
    pub flag_depth: usize,
    /// Not part of the hash: results do not depend on it.
    #[serde(skip)]
    pub threads: usize,
    pub seed: u64,
    pub samples: usize,
    pub sample_len: usize,
    pub shell_len: usize,
    pub certify_len: usize,
    pub step: String,
    #[serde(skip)]
    pub step_value: f64,
    pub richardson: bool,
}

/// Command-line overrides of `[run]` and `[output]`.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub max_len: Option<usize>,
    pub depth: Option<usize>,
    pub flag_depth: Option<usize>,
    pub threads: Option<usize>,
    pub seed: Option<u64>,
    pub cache: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RepSpec {
    pub label: String,
    /// Generator matrices as reduced fractions, row-major.
    pub generators: Vec<Vec<Vec<String>>>,
    pub symmetric_power: Option<usize>,
    #[serde(skip)]
    pub rep: Representation,
}

#[derive(Debug, Clone, Serialize)]
pub struct BendSpec {
    pub generator: usize,
    pub axis: [String; 2],
    pub angle: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct KleinianSpec {
    pub label: String,
    pub base: String,
    pub bend: Option<BendSpec>,
    #[serde(skip)]
    pub rep: KleinianRep,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairSpec {
    pub f: String,
    pub g: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossRatioSpec {
    pub representation: String,
    pub alpha: String,
    pub beta: String,
    pub n_max: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RankScanSpec {
    pub representation: String,
    pub pool_len: usize,
    pub pool_size: usize,
    pub p_max: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct FamilySpec {
    pub label: String,
    pub params: Vec<String>,
    pub generators: Vec<Vec<Vec<String>>>,
    pub base_point: Vec<String>,
    pub bounds: Vec<[String; 2]>,
    /// Conjugator entries and the generators they act on.
    pub conjugations: Vec<(ExactMatrix, Option<Vec<usize>>)>,
    pub symmetric_power: Option<usize>,
    #[serde(skip)]
    pub family: RepFamily,
}

/// A validated experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub rank: usize,
    pub run: RunParams,
    pub representations: Vec<RepSpec>,
    pub kleinian: Vec<KleinianSpec>,
    pub pairs: Vec<PairSpec>,
    pub crossratio: Vec<CrossRatioSpec>,
    pub rank_scan: Vec<RankScanSpec>,
    pub families: Vec<FamilySpec>,
    #[serde(skip)]
    pub out_dir: PathBuf,
    #[serde(skip)]
    pub cache: Option<PathBuf>,
}

/// 1-based line and column of a byte offset.
fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let before = &src[..offset.min(src.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rfind('\n').map(|i| before.len() - i).unwrap_or(before.len() + 1);
    (line, col)
}

struct Ctx<'a> {
    src: &'a str,
    path: &'a Path,
}

impl Ctx<'_> {
    fn err_at(&self, span: std::ops::Range<usize>, msg: impl std::fmt::Display) -> CliError {
        let (line, col) = line_col(self.src, span.start);
        CliError::Config(format!("{}:{line}:{col}: {msg}", self.path.display()))
    }

    fn rational(&self, e: &Entry) -> Result<BigRational, CliError> {
        parse_rational(e.get_ref()).map_err(|m| self.err_at(e.span(), format!("'{}': {m}", e.get_ref())))
    }

    fn real(&self, e: &Entry) -> Result<(String, f64), CliError> {
        let q = self.rational(e)?;
        Ok((fraction_string(&q), to_f64(&q)))
    }

    fn matrix(&self, m: &RawMatrix, span_of: &Spanned<String>) -> Result<(Vec<Vec<String>>, DMatrix<f64>), CliError> {
        let n = m.len();
        if n == 0 {
            return Err(self.err_at(span_of.span(), "empty generator matrix"));
        }
        let mut exact = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n * n);
        for row in m {
            if row.len() != n {
                let at = row.first().map(|e| e.span()).unwrap_or(span_of.span());
                return Err(self.err_at(at, format!("row of length {} in a {n}x{n} matrix", row.len())));
            }
            let mut r = Vec::with_capacity(n);
            for e in row {
                let (s, v) = self.real(e)?;
                r.push(s);
                values.push(v);
            }
            exact.push(r);
        }
        Ok((exact, DMatrix::from_row_slice(n, n, &values)))
    }

    fn poly_matrix(&self, m: &RawMatrix, params: &[String], span_of: &Spanned<String>) -> Result<(Vec<Vec<String>>, PolyMatrix), CliError> {
        let n = m.len();
        if n == 0 {
            return Err(self.err_at(span_of.span(), "empty generator matrix"));
        }
        let mut text = Vec::with_capacity(n);
        let mut entries = Vec::with_capacity(n * n);
        for row in m {
            if row.len() != n {
                let at = row.first().map(|e| e.span()).unwrap_or(span_of.span());
                return Err(self.err_at(at, format!("row of length {} in a {n}x{n} matrix", row.len())));
            }
            text.push(row.iter().map(|e| e.get_ref().trim().to_string()).collect());
            for e in row {
                let p = Polynomial::parse(e.get_ref(), params).map_err(|err| self.err_at(e.span(), err))?;
                entries.push(p);
            }
        }
        let pm = PolyMatrix::new(n, entries).map_err(|e| self.err_at(span_of.span(), e))?;
        Ok((text, pm))
    }
}

/// Parses an integer, decimal (with optional exponent) or fraction of
/// such, exactly.
pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let d = parse_decimal(den.trim())?;
        if d.is_zero() {
            return Err("zero denominator".into());
        }
        return Ok(parse_decimal(num.trim())? / d);
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Result<BigRational, String> {
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (mantissa, exp) = match body.find(['e', 'E']) {
        Some(i) => {
            let e: i32 = body[i + 1..].parse().map_err(|_| format!("bad exponent in '{s}'"))?;
            (&body[..i], e)
        }
        None => (body, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int.is_empty() && frac.is_empty() {
        return Err("not a number".into());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err("not an exact rational (expected digits, '.', 'e' or '/')".into());
    }
    if exp.unsigned_abs() > 400 {
        return Err("exponent out of range".into());
    }
    let digits: BigInt = format!("{int}{frac}0").parse::<BigInt>().map_err(|e| e.to_string())? / BigInt::from(10);
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut q = BigRational::from_integer(digits);
    if scale >= 0 {
        q *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        q /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -q } else { q })
}

pub fn fraction_string(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn to_f64(q: &BigRational) -> f64 {
    // correctly rounded for values in range
    q.to_f64().unwrap_or(if q.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

fn check_label(ctx: &Ctx, label: &Spanned<String>, seen: &mut BTreeSet<String>) -> Result<String, CliError> {
    let l = label.get_ref();
    if l.is_empty() || !l.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        return Err(ctx.err_at(label.span(), format!("label '{l}' must be non-empty ASCII letters, digits, '_' or '-'")));
    }
    if l == WORD_LENGTH || !seen.insert(l.clone()) {
        return Err(ctx.err_at(label.span(), format!("duplicate or reserved label '{l}'")));
    }
    Ok(l.clone())
}

/// Reserved name of the word-length functional.
pub const WORD_LENGTH: &str = "word_length";

pub fn load(path: &Path, ov: &Overrides) -> Result<ExperimentConfig, CliError> {
    let src = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse(&src, path, ov)
}

pub fn parse(src: &str, path: &Path, ov: &Overrides) -> Result<ExperimentConfig, CliError> {
    let raw: RawConfig = toml::from_str(src).map_err(|e| {
        let at = e.span().map(|s| line_col(src, s.start));
        match at {
            Some((l, c)) => CliError::Config(format!("{}:{l}:{c}: {}", path.display(), e.message())),
            None => CliError::Config(format!("{}: {}", path.display(), e.message())),
        }
    })?;
    let ctx = Ctx { src, path };
    let rank = raw.group.rank;
    if rank == 0 || rank > pressure_lab::group::MAX_RANK {
        return Err(CliError::Config(format!("group rank {rank} outside 1..={}", pressure_lab::group::MAX_RANK)));
    }

    let step_entry = raw.run.step.as_ref();
    let (step, step_value) = match step_entry {
        Some(e) => ctx.real(e)?,
        None => ("1/100".to_string(), 0.01),
    };
    if !(step_value > 0.0) {
        return Err(ctx.err_at(step_entry.unwrap().span(), "step must be positive"));
    }
    let run = RunParams {
        max_len: ov.max_len.or(raw.run.max_len).unwrap_or(10),
        depth: ov.depth.or(raw.run.depth).unwrap_or(pressure_lab::transfer::DEFAULT_CYLINDER_DEPTH),
        flag_depth: ov.flag_depth.or(raw.run.flag_depth).unwrap_or(pressure_lab::transfer::DEFAULT_FLAG_DEPTH),
        threads: ov.threads.or(raw.run.threads).unwrap_or(0),
        seed: ov.seed.or(raw.run.seed).unwrap_or(0),
        samples: raw.run.samples.unwrap_or(0),
        sample_len: raw.run.sample_len.unwrap_or(24),
        shell_len: raw.run.shell_len.unwrap_or(12),
        certify_len: raw.run.certify_len.unwrap_or(8),
        step,
        step_value,
        richardson: raw.run.richardson.unwrap_or(false),
    };
    if run.max_len == 0 || run.depth == 0 || run.flag_depth == 0 || run.sample_len == 0 || run.shell_len == 0 {
        return Err(CliError::Config("max_len, depth, flag_depth, sample_len and shell_len must be positive".into()));
    }

    let mut seen = BTreeSet::new();
    let mut representations = Vec::new();
    for r in &raw.representations {
        let label = check_label(&ctx, &r.label, &mut seen)?;
        if r.generators.len() != rank {
            return Err(ctx.err_at(r.label.span(), format!("{} generators for a rank {rank} group", r.generators.len())));
        }
        let mut exact = Vec::new();
        let mut mats = Vec::new();
        for g in &r.generators {
            let (e, m) = ctx.matrix(g, &r.label)?;
            if let Some(d) = r.dimension {
                if m.nrows() != d {
                    return Err(ctx.err_at(r.label.span(), format!("generator of dimension {} in a dimension {d} representation", m.nrows())));
                }
            }
            exact.push(e);
            mats.push(m);
        }
        let mut rep = Representation::new(label.clone(), mats).map_err(|e| ctx.err_at(r.label.span(), e))?;
        if let Some(m) = r.symmetric_power {
            rep = rep.symmetric_power(m).map_err(|e| ctx.err_at(r.label.span(), e))?.with_label(label.clone());
        }
        representations.push(RepSpec { label, generators: exact, symmetric_power: r.symmetric_power, rep });
    }

    let mut kleinian = Vec::new();
    for k in &raw.kleinian {
        let label = check_label(&ctx, &k.label, &mut seen)?;
        let base = representations
            .iter()
            .find(|r| r.label == *k.base.get_ref())
            .ok_or_else(|| ctx.err_at(k.base.span(), format!("unknown representation '{}'", k.base.get_ref())))?;
        let mut rep = KleinianRep::from_real(&base.rep).map_err(|e| ctx.err_at(k.base.span(), e))?;
        let bend = match &k.bend {
            None => None,
            Some(b) => {
                let (p, pv) = ctx.real(&b.axis[0])?;
                let (q, qv) = ctx.real(&b.axis[1])?;
                let (a, av) = ctx.real(&b.angle)?;
                if b.generator >= rank {
                    return Err(ctx.err_at(k.label.span(), format!("bending generator {} out of range", b.generator)));
                }
                rep = rep.bend(b.generator, pv, qv, av).map_err(|e| ctx.err_at(b.axis[0].span(), e))?;
                Some(BendSpec { generator: b.generator, axis: [p, q], angle: a })
            }
        };
        let rep = KleinianRep::new(label.clone(), rep.generators().to_vec()).map_err(|e| ctx.err_at(k.label.span(), e))?;
        kleinian.push(KleinianSpec { label, base: k.base.get_ref().clone(), bend, rep });
    }

    let functional_known = |s: &str| s == WORD_LENGTH || seen.contains(s);
    let mut pairs = Vec::new();
    for p in &raw.pairs {
        for x in [&p.f, &p.g] {
            if !functional_known(x.get_ref()) {
                return Err(ctx.err_at(x.span(), format!("unknown functional '{}'", x.get_ref())));
            }
        }
        pairs.push(PairSpec { f: p.f.get_ref().clone(), g: p.g.get_ref().clone() });
    }

    let real_known = |s: &Spanned<String>| -> Result<(), CliError> {
        if representations.iter().any(|r| r.label == *s.get_ref()) {
            Ok(())
        } else {
            Err(ctx.err_at(s.span(), format!("unknown representation '{}'", s.get_ref())))
        }
    };
    let mut crossratio = Vec::new();
    for c in &raw.crossratio {
        real_known(&c.representation)?;
        for w in [&c.alpha, &c.beta] {
            let parsed: Word = w.get_ref().parse().map_err(|e| ctx.err_at(w.span(), e))?;
            if parsed.min_rank() > rank {
                return Err(ctx.err_at(w.span(), format!("word '{}' uses more than {rank} generators", w.get_ref())));
            }
        }
        crossratio.push(CrossRatioSpec {
            representation: c.representation.get_ref().clone(),
            alpha: c.alpha.get_ref().clone(),
            beta: c.beta.get_ref().clone(),
            n_max: c.n_max.unwrap_or(12),
        });
    }
    let mut rank_scan = Vec::new();
    for s in &raw.rank_scan {
        real_known(&s.representation)?;
        rank_scan.push(RankScanSpec {
            representation: s.representation.get_ref().clone(),
            pool_len: s.pool_len.unwrap_or(3),
            pool_size: s.pool_size.unwrap_or(10),
            p_max: s.p_max.unwrap_or(4),
        });
    }

    let mut families = Vec::new();
    for f in &raw.families {
        let label = check_label(&ctx, &f.label, &mut seen)?;
        let d = f.params.len();
        if f.generators.len() != rank {
            return Err(ctx.err_at(f.label.span(), format!("{} generators for a rank {rank} group", f.generators.len())));
        }
        let mut text = Vec::new();
        let mut gens = Vec::new();
        for g in &f.generators {
            let (t, pm) = ctx.poly_matrix(g, &f.params, &f.label)?;
            text.push(t);
            gens.push(pm);
        }
        let mut family = RepFamily::explicit(label.clone(), f.params.clone(), gens);
        let mut conjugations = Vec::new();
        for c in &f.conjugations {
            let (t, pm) = ctx.poly_matrix(&c.matrix, &f.params, &f.label)?;
            family = family.conjugated(pm, c.generators.clone());
            conjugations.push((t, c.generators.clone()));
        }
        if let Some(m) = f.symmetric_power {
            family = family.symmetric_power(m);
        }
        let (base_exact, base) = match &f.base_point {
            Some(v) if v.len() != d => return Err(ctx.err_at(f.label.span(), format!("base point has {} coordinates, expected {d}", v.len()))),
            Some(v) => v.iter().map(|e| ctx.real(e)).collect::<Result<Vec<_>, _>>()?.into_iter().unzip(),
            None => (vec!["0".to_string(); d], vec![0.0; d]),
        };
        let (bounds_exact, bounds) = match &f.bounds {
            Some(v) if v.len() != d => return Err(ctx.err_at(f.label.span(), format!("{} bounds for {d} parameters", v.len()))),
            Some(v) => {
                let mut ex = Vec::new();
                let mut bs = Vec::new();
                for [lo, hi] in v {
                    let (a, av) = ctx.real(lo)?;
                    let (b, bv) = ctx.real(hi)?;
                    if !(av < bv) {
                        return Err(ctx.err_at(lo.span(), "empty parameter interval"));
                    }
                    ex.push([a, b]);
                    bs.push((av, bv));
                }
                (ex, bs)
            }
            None => (vec![["-inf".to_string(), "inf".to_string()]; d], vec![(f64::NEG_INFINITY, f64::INFINITY); d]),
        };
        family = family.with_bounds(bounds).with_base_point(base);
        families.push(FamilySpec {
            label,
            params: f.params.clone(),
            generators: text,
            base_point: base_exact,
            bounds: bounds_exact,
            conjugations,
            symmetric_power: f.symmetric_power,
            family,
        });
    }

    let out_dir = ov.out.clone().or(raw.output.dir.map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("out"));
    let cache = ov.cache.clone().or(raw.output.cache.map(PathBuf::from));
    Ok(ExperimentConfig {
        rank,
        run,
        representations,
        kleinian,
        pairs,
        crossratio,
        rank_scan,
        families,
        out_dir,
        cache,
    })
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl ExperimentConfig {
    /// Hash of the validated experiment with overrides applied. Thread
    /// count and output locations do not affect results and are left out.
    pub fn hash(&self) -> String {
        sha256_hex(serde_json::to_string(self).expect("config serializes").as_bytes())
    }

    pub fn representation(&self, label: &str) -> Option<&RepSpec> {
        self.representations.iter().find(|r| r.label == label)
    }
}

impl RepSpec {
    /// Cache key: depends on the exact generators and the symmetric power,
    /// not on the label.
    pub fn hash(&self, rank: usize) -> String {
        let v = serde_json::json!({ "rank": rank, "generators": self.generators, "symmetric_power": self.symmetric_power });
        sha256_hex(v.to_string().as_bytes())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> String {
        fraction_string(&parse_rational(s).unwrap())
    }

    #[test]
    fn rationals() {
        assert_eq!(q("5/3"), "5/3");
        assert_eq!(q("10/6"), "5/3");
        assert_eq!(q("-0.45"), "-9/20");
        assert_eq!(q("2.5e2"), "250");
        assert_eq!(q("1e-3"), "1/1000");
        assert_eq!(q("+3"), "3");
        assert_eq!(q(".5"), "1/2");
        assert_eq!(q("1.5/0.5"), "3");
        for bad in ["", "1/0", "abc", "1.2.3", "0x10", "1e", "nan"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
        assert_eq!(to_f64(&parse_rational("1/3").unwrap()), 1.0 / 3.0);
        assert_eq!(to_f64(&parse_rational("0.1").unwrap()), 0.1);
    }

    #[test]
    fn line_and_column() {
        let src = "a\nbc\ndef";
        assert_eq!(line_col(src, 0), (1, 1));
        assert_eq!(line_col(src, 3), (2, 2));
        assert_eq!(line_col(src, 5), (3, 1));
    }
}
