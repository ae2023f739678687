use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use pressure_lab::certify::{certify_anosov, CertificationReport};
use pressure_lab::crossratio::{coprime_pool, cr_limit_words, rank_scan, CrossRatioLimit};
use pressure_lab::families::{FamilyProbe, ProbeOptions};
use pressure_lab::functional::LengthFunctional;
use pressure_lab::group::{enumerate_classes, random_word, ConjClass, Word, DEFAULT_CLASS_BUDGET};
use pressure_lab::orbit::{entropy_count, intersection, OrbitTable, PeriodicShell};
use pressure_lab::par;
use pressure_lab::transfer::{cocycle_for, depth_table, write_depth_csv, write_pressure_csv, SubshiftSpec, TransferOperator};
use serde_json::{json, Value};

use crate::cache::{ClassCache, Record};
use crate::config::{ExperimentConfig, PairSpec, RepSpec, WORD_LENGTH};
use crate::error::CliError;

pub const TOOL: &str = "pressure-lab";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Error ratios above this fraction of the limit count towards the decay
/// verdict; below it the sequence sits at rounding level.
const DECAY_FLOOR: f64 = 1e-12;
const DECAY_RATIO: f64 = 0.9;
/// The first terms carry the transient of the subleading eigenvalues.
const DECAY_FROM: usize = 4;
/// Eigenvalues of the pressure form within this fraction of the largest
/// are treated as zero.
const NULL_TOL: f64 = 1e-6;
/// Lower bound for a J estimate to count as consistent with `J >= 1`.
const J_SLACK: f64 = 5e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Verb {
    Enumerate,
    Spectrum,
    Entropy,
    Intersection,
    Jmetric,
    Crossratio,
    Certify,
    Report,
}

impl Verb {
    pub fn name(self) -> &'static str {
        match self {
            Verb::Enumerate => "enumerate",
            Verb::Spectrum => "spectrum",
            Verb::Entropy => "entropy",
            Verb::Intersection => "intersection",
            Verb::Jmetric => "jmetric",
            Verb::Crossratio => "crossratio",
            Verb::Certify => "certify",
            Verb::Report => "report",
        }
    }
}

/// One functional of the orbit table, under its config name.
struct Functional {
    name: String,
    f: LengthFunctional,
}

pub struct Lab {
    cfg: ExperimentConfig,
    hash: String,
    cache: Option<ClassCache>,
    classes: Option<Vec<ConjClass>>,
    records: Vec<Option<Record>>,
    table: Option<OrbitTable>,
    written: Vec<String>,
}

fn csv_field(s: &str) -> String {
    s.replace([',', '\n'], ";")
}

impl Lab {
    pub fn new(cfg: ExperimentConfig) -> Result<Self, CliError> {
        fs::create_dir_all(&cfg.out_dir)
            .map_err(|e| CliError::Io(format!("cannot create {}: {e}", cfg.out_dir.display())))?;
        let cache = cfg.cache.as_deref().map(ClassCache::open);
        let hash = cfg.hash();
        let records = vec![None; cfg.representations.len()];
        Ok(Lab { cfg, hash, cache, classes: None, records, table: None, written: Vec::new() })
    }

    pub fn config_hash(&self) -> &str {
        &self.hash
    }

    fn classes(&mut self) -> Result<&[ConjClass], CliError> {
        if self.classes.is_none() {
            self.classes = Some(enumerate_classes(self.cfg.rank, self.cfg.run.max_len, DEFAULT_CLASS_BUDGET)?);
        }
        Ok(self.classes.as_deref().unwrap())
    }

    fn write_file(&mut self, name: &str, body: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), CliError> {
        let path: PathBuf = self.cfg.out_dir.join(name);
        let mut w = BufWriter::new(fs::File::create(&path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?);
        body(&mut w).and_then(|_| w.flush()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        self.written.push(name.to_string());
        Ok(())
    }

    /// Spectral data of every class for representation `idx`, from the
    /// cache when the key matches.
    fn record(&mut self, idx: usize) -> Result<Record, CliError> {
        if let Some(r) = &self.records[idx] {
            return Ok(r.clone());
        }
        let max_len = self.cfg.run.max_len;
        let n = self.classes()?.len();
        let spec = &self.cfg.representations[idx];
        let key = spec.hash(self.cfg.rank);
        if let Some(hit) = self.cache.as_ref().and_then(|c| c.get(&key, max_len, n)) {
            eprintln!("cache hit: {} (max_len {max_len}, {n} classes)", spec.label);
            let hit = hit.clone();
            self.records[idx] = Some(hit.clone());
            return Ok(hit);
        }
        let rep = spec.rep.clone();
        let classes = self.classes.as_deref().unwrap();
        let results = par::map(classes, |c| rep.spectral_data(c.rep()));
        let mut rec = Record {
            key,
            max_len,
            classes: n,
            log_radius: Vec::with_capacity(n),
            sign: Vec::with_capacity(n),
            gap: Vec::with_capacity(n),
            log_gap: Vec::with_capacity(n),
            errors: Vec::new(),
        };
        for (i, r) in results.into_iter().enumerate() {
            match r {
                Ok(sd) => {
                    rec.log_radius.push(Some(sd.log_radius));
                    rec.sign.push(Some(sd.signed_top as i8));
                    rec.gap.push(Some(sd.gap));
                    rec.log_gap.push(Some(sd.log_gap));
                }
                Err(e) => {
                    rec.log_radius.push(None);
                    rec.sign.push(None);
                    rec.gap.push(None);
                    rec.log_gap.push(None);
                    rec.errors.push((i, e.to_string()));
                }
            }
        }
        if let Some(c) = self.cache.as_mut() {
            c.insert(rec.clone());
        }
        self.records[idx] = Some(rec.clone());
        Ok(rec)
    }

    fn functionals(&self) -> Vec<Functional> {
        let mut out = vec![Functional { name: WORD_LENGTH.into(), f: LengthFunctional::WordLength }];
        for r in &self.cfg.representations {
            out.push(Functional { name: r.label.clone(), f: LengthFunctional::log_radius(r.rep.clone()) });
        }
        for k in &self.cfg.kleinian {
            out.push(Functional { name: k.label.clone(), f: LengthFunctional::translation(k.rep.clone()) });
        }
        out
    }

    /// Orbit table with one column per functional, in [`Lab::functionals`]
    /// order.
    fn table(&mut self) -> Result<OrbitTable, CliError> {
        if let Some(t) = &self.table {
            return Ok(t.clone());
        }
        let classes = self.classes()?.to_vec();
        let mut table = OrbitTable::new(classes.clone());
        table.add_functional(&LengthFunctional::WordLength)?;
        for idx in 0..self.cfg.representations.len() {
            let rec = self.record(idx)?;
            let spec = &self.cfg.representations[idx];
            if let Some((i, msg)) = rec.errors.first() {
                return Err(CliError::Numeric(format!(
                    "{}: {} of {} classes have no proximal spectral data (first {}: {msg}); see `certify`",
                    spec.label,
                    rec.errors.len(),
                    rec.classes,
                    classes[*i]
                )));
            }
            let values = rec.log_radius.iter().map(|v| v.expect("no errors recorded")).collect();
            table.add_values(LengthFunctional::log_radius(spec.rep.clone()).label(), values)?;
        }
        for k in &self.cfg.kleinian {
            table.add_functional(&LengthFunctional::translation(k.rep.clone()))?;
        }
        self.table = Some(table.clone());
        Ok(table)
    }

    fn column(&self, name: &str) -> usize {
        self.functionals().iter().position(|f| f.name == name).expect("validated functional name")
    }

    fn pairs(&self) -> Vec<PairSpec> {
        if !self.cfg.pairs.is_empty() {
            return self.cfg.pairs.clone();
        }
        let names: Vec<String> = self.functionals().into_iter().skip(1).map(|f| f.name).collect();
        let mut out = Vec::new();
        for f in &names {
            for g in &names {
                if f != g {
                    out.push(PairSpec { f: f.clone(), g: g.clone() });
                }
            }
        }
        out
    }

    pub fn run(&mut self, verb: Verb) -> Result<PathBuf, CliError> {
        let results = match verb {
            Verb::Enumerate => self.enumerate()?,
            Verb::Spectrum => self.spectrum()?,
            Verb::Entropy => self.entropy()?,
            Verb::Intersection => self.intersection()?,
            Verb::Jmetric => self.jmetric()?,
            Verb::Crossratio => self.crossratio()?,
            Verb::Certify => self.certify()?,
            Verb::Report => self.report()?,
        };
        if let Some(c) = self.cache.as_mut() {
            c.save()?;
        }
        let name = format!("{}.json", verb.name());
        let report = json!({
            "tool": TOOL,
            "version": VERSION,
            "command": verb.name(),
            "config_hash": self.hash,
            "rank": self.cfg.rank,
            "run": self.cfg.run,
            "files": self.written,
            "results": results,
        });
        let text = serde_json::to_string_pretty(&report).expect("report serializes");
        self.write_file(&name, |w| writeln!(w, "{text}"))?;
        Ok(self.cfg.out_dir.join(name))
    }

    fn enumerate(&mut self) -> Result<Value, CliError> {
        let table = self.table()?;
        self.write_file("classes.csv", |w| table.write_csv(w))?;
        let max_len = self.cfg.run.max_len;
        let mut by_len = vec![(0usize, 0usize); max_len + 1];
        for c in table.classes() {
            by_len[c.length()].0 += 1;
            by_len[c.length()].1 += c.is_primitive() as usize;
        }
        let by_length: Vec<Value> = by_len
            .iter()
            .enumerate()
            .skip(1)
            .map(|(l, (n, p))| json!({ "length": l, "classes": n, "primitive": p }))
            .collect();
        let columns: Vec<Value> = table
            .columns()
            .iter()
            .map(|c| json!({ "label": c.label, "complete_to": c.complete_to, "envelope_slope": c.envelope_slope, "envelope_offset": c.envelope_offset }))
            .collect();
        Ok(json!({ "classes": table.classes().len(), "by_length": by_length, "columns": columns }))
    }

    fn spectrum(&mut self) -> Result<Value, CliError> {
        let mut out = Vec::new();
        for idx in 0..self.cfg.representations.len() {
            let rec = self.record(idx)?;
            let classes = self.classes()?.to_vec();
            let spec = self.cfg.representations[idx].clone();
            let errors: std::collections::BTreeMap<usize, &str> = rec.errors.iter().map(|(i, m)| (*i, m.as_str())).collect();
            self.write_file(&format!("spectrum_{}.csv", spec.label), |w| {
                writeln!(w, "class,length,primitive,log_radius,sign,gap,log_gap,status")?;
                for (i, c) in classes.iter().enumerate() {
                    match (rec.log_radius[i], rec.sign[i], rec.gap[i], rec.log_gap[i]) {
                        (Some(l), Some(s), Some(g), Some(lg)) => {
                            writeln!(w, "{c},{},{},{l:.17e},{s},{g:.17e},{lg:.17e},ok", c.length(), c.is_primitive())?
                        }
                        _ => writeln!(w, "{c},{},{},,,,,{}", c.length(), c.is_primitive(), csv_field(errors.get(&i).copied().unwrap_or("failed")))?,
                    }
                }
                Ok(())
            })?;

            let max_len = self.cfg.run.max_len;
            let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); max_len + 1];
            for (c, l) in classes.iter().zip(&rec.log_radius) {
                if let Some(l) = l {
                    let r = &mut ranges[c.length()];
                    *r = (r.0.min(*l), r.1.max(*l));
                }
            }
            let per_length: Vec<Value> = ranges
                .iter()
                .enumerate()
                .filter(|(_, r)| r.0.is_finite())
                .map(|(l, r)| json!({ "length": l, "min_log_radius": r.0, "max_log_radius": r.1 }))
                .collect();
            let failed: Vec<Value> = rec.errors.iter().take(20).map(|(i, m)| json!({ "class": classes[*i].to_string(), "reason": m })).collect();

            let samples = self.samples(&spec)?;
            out.push(json!({
                "label": spec.label,
                "dimension": spec.rep.dim(),
                "classes": rec.classes,
                "failures": rec.errors.len(),
                "failed_classes": failed,
                "log_radius_by_length": per_length,
                "samples": samples,
            }));
        }
        Ok(Value::Array(out))
    }

    /// Spectral data of seeded random words, `run.samples` of them.
    fn samples(&mut self, spec: &RepSpec) -> Result<usize, CliError> {
        let (n, len, seed, rank) = (self.cfg.run.samples, self.cfg.run.sample_len, self.cfg.run.seed, self.cfg.rank);
        if n == 0 {
            return Ok(0);
        }
        let words: Vec<Word> = (0..n as u64).map(|i| random_word(seed.wrapping_add(i), rank, len)).collect::<Result<_, _>>()?;
        let rep = spec.rep.clone();
        let data = par::map(&words, |w| rep.spectral_data(w));
        self.write_file(&format!("spectrum_{}_samples.csv", spec.label), |w| {
            writeln!(w, "word,length,log_radius,sign,log_gap,status")?;
            for (word, d) in words.iter().zip(&data) {
                match d {
                    Ok(sd) => writeln!(w, "{word},{},{:.17e},{},{:.17e},ok", word.len(), sd.log_radius, sd.signed_top, sd.log_gap)?,
                    Err(e) => writeln!(w, "{word},{},,,,{}", word.len(), csv_field(&e.to_string()))?,
                }
            }
            Ok(())
        })?;
        Ok(n)
    }

    fn entropy(&mut self) -> Result<Value, CliError> {
        let table = self.table()?;
        let (rank, depth, flag_depth) = (self.cfg.rank, self.cfg.run.depth, self.cfg.run.flag_depth);
        let mut out = Vec::new();
        for (col, fl) in self.functionals().into_iter().enumerate() {
            let est = entropy_count(&table, col)?;
            let cocycle = cocycle_for(&fl.f, flag_depth)?;
            let rows = depth_table(rank, cocycle.as_ref(), depth)?;
            let h_root = rows.last().expect("depth is positive").h;
            let op = TransferOperator::new(SubshiftSpec::new(rank, depth)?, cocycle.as_ref())?;
            let grid: Vec<f64> = (0..=20).map(|k| 2.0 * h_root * k as f64 / 20.0).collect();
            let mut pressure = Vec::new();
            write_pressure_csv(&op, &grid, &mut pressure)?;

            self.write_file(&format!("entropy_counts_{}.csv", fl.name), |w| est.write_csv(w))?;
            self.write_file(&format!("depth_{}.csv", fl.name), |w| write_depth_csv(&rows, w))?;
            self.write_file(&format!("pressure_{}.csv", fl.name), |w| w.write_all(&pressure))?;
            out.push(json!({
                "functional": fl.name,
                "column": fl.f.label(),
                "h_count": est.h,
                "stderr": est.stderr,
                "window": [est.window.0, est.window.1],
                "h_count_with_powers": est.h_all,
                "h_root": h_root,
                "depth": depth,
                "flag_depth": flag_depth,
                "depth_table": rows,
                "difference": (est.h - h_root).abs(),
            }));
        }
        Ok(Value::Array(out))
    }

    fn pair_entry(&mut self, table: &OrbitTable, p: &PairSpec) -> Result<Value, CliError> {
        let (fi, gi) = (self.column(&p.f), self.column(&p.g));
        let est = intersection(table, fi, gi)?;
        let n = self.cfg.run.shell_len.min(self.cfg.run.max_len);
        let shell = PeriodicShell::new(table.classes(), n)?;
        let si = shell.intersection(table.values(fi), table.values(gi))?;
        self.write_file(&format!("intersection_{}__{}.csv", p.f, p.g), |w| est.write_csv(w))?;
        Ok(json!({
            "f": p.f,
            "g": p.g,
            "h_f": est.h_f,
            "h_g": est.h_g,
            "intersection": est.extrapolated,
            "trend_limit": est.trend_limit,
            "trend_slope": est.trend_slope,
            "j": est.j,
            "shell": { "length": n, "h_f": si.h_f, "h_g": si.h_g, "intersection": si.i, "j": si.j },
        }))
    }

    fn intersection(&mut self) -> Result<Value, CliError> {
        let pairs = self.pairs();
        if pairs.is_empty() {
            return Err(CliError::Config("intersection needs a [[pair]] entry or at least two representations".into()));
        }
        let table = self.table()?;
        let mut out = Vec::new();
        for p in &pairs {
            out.push(self.pair_entry(&table, p)?);
        }
        Ok(Value::Array(out))
    }

    fn jmetric(&mut self) -> Result<Value, CliError> {
        let pairs = self.pairs();
        if pairs.is_empty() && self.cfg.families.is_empty() {
            return Err(CliError::Config("jmetric needs [[pair]] entries, two representations or a [[family]]".into()));
        }
        let mut pair_out = Vec::new();
        if !pairs.is_empty() {
            let table = self.table()?;
            let max_len = self.cfg.run.max_len;
            for p in &pairs {
                let (fi, gi) = (self.column(&p.f), self.column(&p.g));
                let mut trend = Vec::new();
                for l in max_len.saturating_sub(2).max(1)..=max_len {
                    let t = table.truncate(l);
                    let j_count = intersection(&t, fi, gi).map(|e| e.j).ok();
                    let j_shell = PeriodicShell::new(t.classes(), l)
                        .and_then(|s| s.intersection(t.values(fi), t.values(gi)))
                        .map(|s| s.j)
                        .ok();
                    trend.push(json!({ "max_len": l, "j": j_count, "j_shell": j_shell }));
                }
                let j = intersection(&table, fi, gi)?.j;
                let shell = PeriodicShell::new(table.classes(), max_len)?.intersection(table.values(fi), table.values(gi))?;
                pair_out.push(json!({
                    "f": p.f,
                    "g": p.g,
                    "j": j,
                    "j_shell": shell.j,
                    "consistent_with_j_at_least_one": j >= 1.0 - J_SLACK,
                    "trend": trend,
                }));
            }
        }

        let mut fam_out = Vec::new();
        if !self.cfg.families.is_empty() {
            let opts = ProbeOptions { rank: self.cfg.rank, shell_len: self.cfg.run.shell_len, certify_len: self.cfg.run.certify_len };
            let probe = FamilyProbe::new(opts)?;
            let step = self.cfg.run.step_value;
            for fam in self.cfg.families.clone() {
                let d = fam.params.len();
                let t0 = fam.family.base_point.clone();
                let basis: Vec<Vec<f64>> = (0..d).map(|i| (0..d).map(|j| (i == j) as u8 as f64).collect()).collect();
                let pf = probe.pressure_form(&fam.family, &t0, &basis, step, self.cfg.run.richardson)?;
                let steps = [-2.0 * step, -step, 0.0, step, 2.0 * step];
                let mut profile = Vec::new();
                for (i, v) in basis.iter().enumerate() {
                    for (eps, j) in probe.j_profile(&fam.family, &t0, v, &steps)? {
                        profile.push((fam.params[i].clone(), eps, j));
                    }
                }
                self.write_file(&format!("jprofile_{}.csv", fam.label), |w| {
                    writeln!(w, "direction,eps,J")?;
                    for (p, e, j) in &profile {
                        writeln!(w, "{p},{e:.12},{j:.15}")?;
                    }
                    Ok(())
                })?;
                self.write_file(&format!("pressure_form_{}.csv", fam.label), |w| {
                    writeln!(w, ",{}", fam.params.join(","))?;
                    for (p, row) in fam.params.iter().zip(&pf.matrix) {
                        let cells: Vec<String> = row.iter().map(|x| format!("{x:.15e}")).collect();
                        writeln!(w, "{p},{}", cells.join(","))?;
                    }
                    Ok(())
                })?;
                let top = pf.eigenvalues.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                let psd = pf.eigenvalues.iter().all(|&x| x >= -NULL_TOL * top);
                let null_directions: Vec<&String> =
                    (0..d).filter(|&i| pf.scaled_row_norm(i) < NULL_TOL).map(|i| &fam.params[i]).collect();
                let max_first = pf.first_derivatives.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                fam_out.push(json!({
                    "label": fam.label,
                    "params": fam.params,
                    "base_point": fam.base_point,
                    "first_derivative_residuals": pf.first_derivatives,
                    "max_first_derivative_residual": max_first,
                    "positive_semidefinite": psd,
                    "null_count": pf.null_count,
                    "null_directions": null_directions,
                    "pressure_form": pf,
                }));
            }
        }
        Ok(json!({ "pairs": pair_out, "families": fam_out }))
    }

    fn crossratio(&mut self) -> Result<Value, CliError> {
        let mut limits = Vec::new();
        for c in self.cfg.crossratio.clone() {
            let rep = self.cfg.representation(&c.representation).expect("validated").rep.clone();
            let alpha: Word = c.alpha.parse()?;
            let beta: Word = c.beta.parse()?;
            let lim = cr_limit_words(&rep, &alpha, &beta, c.n_max)?;
            self.write_file(&format!("crossratio_{}_{}_{}.csv", c.representation, c.alpha, c.beta), |w| lim.write_csv(w))?;
            let (paired_rate, paired_ok) = decay(&lim, true);
            let (single_rate, single_ok) = decay(&lim, false);
            limits.push(json!({
                "representation": c.representation,
                "alpha": c.alpha,
                "beta": c.beta,
                "cross_ratio": lim.cross_ratio.value,
                "projector_trace": lim.cross_ratio.trace,
                "discrepancy": lim.cross_ratio.discrepancy,
                "single_limit": lim.single_limit,
                "paired_decay_rate": paired_rate,
                "single_decay_rate": single_rate,
                "geometric_decay": paired_ok && single_ok,
                "paired": lim.paired,
                "single": lim.single,
            }));
        }
        let mut scans = Vec::new();
        for s in self.cfg.rank_scan.clone() {
            let rep = self.cfg.representation(&s.representation).expect("validated").rep.clone();
            let classes = enumerate_classes(self.cfg.rank, s.pool_len, DEFAULT_CLASS_BUDGET)?;
            let pool = coprime_pool(&classes, s.pool_size)?;
            let scan = rank_scan(&rep, &pool, s.p_max)?;
            self.write_file(&format!("rank_{}.csv", s.representation), |w| scan.write_csv(w))?;
            scans.push(json!({
                "representation": s.representation,
                "dimension": rep.dim(),
                "pool": pool.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                "chi": scan.chi,
                "detected_dimension": scan.detected_dimension,
            }));
        }
        Ok(json!({ "limits": limits, "rank_scans": scans }))
    }

    fn certify(&mut self) -> Result<Value, CliError> {
        let classes = self.classes()?.to_vec();
        let out: Vec<Value> = self
            .cfg
            .representations
            .iter()
            .map(|r| {
                let rep = certify_anosov(&r.rep, &classes);
                json!({ "label": r.label, "certified": rep.certified, "failure": failure_summary(&rep), "report": rep })
            })
            .collect();
        Ok(Value::Array(out))
    }

    fn report(&mut self) -> Result<Value, CliError> {
        let mut sections = serde_json::Map::new();
        sections.insert("certify".into(), self.certify()?);
        sections.insert("enumerate".into(), self.enumerate()?);
        sections.insert("spectrum".into(), self.spectrum()?);
        sections.insert("entropy".into(), self.entropy()?);
        if !self.pairs().is_empty() {
            sections.insert("intersection".into(), self.intersection()?);
        }
        if !self.pairs().is_empty() || !self.cfg.families.is_empty() {
            sections.insert("jmetric".into(), self.jmetric()?);
        }
        if !self.cfg.crossratio.is_empty() || !self.cfg.rank_scan.is_empty() {
            sections.insert("crossratio".into(), self.crossratio()?);
        }
        Ok(Value::Object(sections))
    }
}

/// Geometric mean of the error ratios from `n = DECAY_FROM` on, over
/// errors above the rounding floor, and whether every such ratio is below
/// [`DECAY_RATIO`].
fn decay(lim: &CrossRatioLimit, paired: bool) -> (Option<f64>, bool) {
    let (rows, limit) = if paired { (&lim.paired, lim.cross_ratio.value) } else { (&lim.single, lim.single_limit) };
    let floor = DECAY_FLOOR * limit.abs().max(1.0);
    let ratios: Vec<f64> = rows
        .windows(2)
        .filter(|p| p[0].n >= DECAY_FROM && p[0].error > floor && p[1].error > floor)
        .map(|p| p[1].error / p[0].error)
        .collect();
    if ratios.is_empty() {
        // already at rounding level
        let settled = rows.last().map(|r| r.error <= floor).unwrap_or(false);
        return (None, settled);
    }
    let rate = (ratios.iter().map(|r| r.ln()).sum::<f64>() / ratios.len() as f64).exp();
    (Some(rate), ratios.iter().all(|&r| r <= DECAY_RATIO))
}

fn failure_summary(r: &CertificationReport) -> Option<String> {
    if r.certified {
        return None;
    }
    if let Some(f) = r.failures.first() {
        return Some(format!("{} of {} classes failed; first {}: {}", r.failures.len(), r.classes, f.class, f.reason));
    }
    if !(r.delta < 1.0) {
        return Some(format!("gap rate delta = {} is not below one", r.delta));
    }
    if r.sandwich_violations > 0 {
        return Some(format!("{} displacement violations (max {})", r.sandwich_violations, r.max_violation));
    }
    Some(format!("transversality margin {} too small", r.transversality_margin))
}
