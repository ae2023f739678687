//! Acceptance criteria 1-10. Each prints one PASS/FAIL line; the test fails
//! on any red criterion that is not listed in `KNOWN_RED`.

mod common;

use std::collections::HashSet;
use std::sync::Arc;

use common::*;
use nalgebra::DMatrix;
use pressure_lab::certify::{certify_anosov, displacement_fit};
use pressure_lab::crossratio::{coprime_pool, cr_limit_words, rank_scan};
use pressure_lab::families::{FamilyProbe, PolyMatrix, ProbeOptions, RepFamily};
use pressure_lab::functional::LengthFunctional;
use pressure_lab::group::{cyclically_reduced_count, enumerate_classes, Word};
use pressure_lab::orbit::{build_orbit_table, entropy_count, intersection, OrbitTable};
use pressure_lab::rep::Representation;
use pressure_lab::spectral::{dominant_eigendata, projector_decomposition};
use pressure_lab::transfer::{entropy_root, ComplexLineCocycle, LineCocycle, SubshiftSpec, WordLengthCocycle};

/// Criteria whose red verdict is a finding about the stated inputs.
const KNOWN_RED: &[(usize, &str)] = &[(
    2,
    "the stated Fuchsian example has tr[a,b] = -2 (cusped, not Anosov); on a Schottky substitute, counting at L=14 \
     resolves h to a few hundredths, above the 1e-2 tolerance",
)];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn table(l: usize, fs: &[LengthFunctional]) -> pressure_lab::Result<OrbitTable> {
    build_orbit_table(enumerate_classes(2, l, 1 << 24)?, fs)
}

fn c1_enumeration() -> Verdict {
    let mut ok = true;
    for n in 1..=8usize {
        // exhaustive reduced words, closed up cyclically
        let mut words: Vec<Vec<u8>> = vec![vec![]];
        for _ in 0..n {
            words = words
                .into_iter()
                .flat_map(|w| {
                    (0..4u8).filter(|&c| w.last().is_none_or(|&p| p != c ^ 1)).map(|c| [w.clone(), vec![c]].concat()).collect::<Vec<_>>()
                })
                .collect();
        }
        words.retain(|w| w[0] != w[n - 1] ^ 1);
        let closed = 3u128.pow(n as u32) + 2 + if n % 2 == 0 { 1 } else { 0 } - if n % 2 == 1 { 1 } else { 0 };
        ok &= words.len() as u128 == closed && cyclically_reduced_count(2, n) == closed;
        let necklaces: HashSet<Vec<u8>> =
            words.iter().map(|w| (0..n).map(|r| [&w[r..], &w[..r]].concat()).min().unwrap()).collect();
        let enumerated = enumerate_classes(2, n, 1 << 20).unwrap().iter().filter(|c| c.length() == n).count();
        ok &= necklaces.len() == enumerated;
    }
    verdict(ok, "cyclically reduced counts 3^n + 2 + (-1)^n and necklace classes, n <= 8".into())
}

fn c2_entropy() -> Verdict {
    let wl = table(14, &[LengthFunctional::WordLength]).unwrap();
    let hc = entropy_count(&wl, 0).unwrap().h;
    let hr = entropy_root(&SubshiftSpec::new(2, 3).unwrap(), &WordLengthCocycle).unwrap();
    let word_ok = (hc - 3f64.ln()).abs() <= 0.05 && (hr - 3f64.ln()).abs() <= 1e-9;
    let pair = |rep: Representation| -> Result<(f64, f64), String> {
        let root = entropy_root(&SubshiftSpec::new(2, 4).unwrap(), &LineCocycle::new(Arc::new(rep.clone()), 12).unwrap())
            .map_err(|e| e.to_string())?;
        let t = table(14, &[LengthFunctional::log_radius(rep)]).map_err(|e| format!("count: {e}; root {root:.4}"))?;
        let count = entropy_count(&t, 0).map_err(|e| e.to_string())?.h;
        Ok((count, root))
    };
    let literal = pair(cusped_example());
    let substitute = pair(schottky()).unwrap();
    let literal_ok = matches!(literal, Ok((c, r)) if (c - r).abs() <= 1e-2);
    verdict(
        word_ok && literal_ok,
        format!(
            "word length h_count {hc:.4} h_root {hr:.12}; stated example {}; Schottky b' h_count {:.4} h_root {:.4} |diff| {:.4}",
            match literal {
                Ok((c, r)) => format!("h_count {c:.4} h_root {r:.4}"),
                Err(e) => e,
            },
            substitute.0,
            substitute.1,
            (substitute.0 - substitute.1).abs()
        ),
    )
}

fn c3_scaling() -> Verdict {
    let mut worst: f64 = 0.0;
    for f in [LengthFunctional::WordLength, LengthFunctional::log_radius(schottky())] {
        let t = table(12, &[f.clone(), f.scaled(2.5)]).unwrap();
        let (h, hc) = (entropy_count(&t, 0).unwrap().h, entropy_count(&t, 1).unwrap().h);
        worst = worst.max((h / 2.5 - hc).abs()).max((intersection(&t, 0, 1).unwrap().j - 1.0).abs());
    }
    verdict(worst <= 1e-12, format!("max deviation {worst:.2e}"))
}

fn c4_symmetric_powers() -> Verdict {
    let rho = schottky();
    let t = table(
        12,
        &[LengthFunctional::log_radius(rho.symmetric_power(2).unwrap()), LengthFunctional::log_radius(rho.symmetric_power(3).unwrap())],
    )
    .unwrap();
    let i = intersection(&t, 0, 1).unwrap();
    verdict(
        (i.j - 1.0).abs() <= 1e-6 && (i.extrapolated - 2.0).abs() <= 1e-9,
        format!("J {:.12} I {:.12}", i.j, i.extrapolated),
    )
}

fn perturbed(rep: &Representation, eps: f64, seed: u64) -> Representation {
    let gens = rep
        .generators()
        .iter()
        .enumerate()
        .map(|(k, g)| {
            let x = DMatrix::from_fn(3, 3, |i, j| (((i * 7 + j * 3 + k * 5) as u64 * 2654435761 + seed) % 1000) as f64 / 1000.0 - 0.5);
            g * (DMatrix::identity(3, 3) + x * eps)
        })
        .collect();
    Representation::new(format!("{}+{eps}", rep.label()), gens).unwrap()
}

fn diag(t: f64) -> DMatrix<f64> {
    mat(2, &[(t / 2.0).exp(), 0.0, 0.0, (-t / 2.0).exp()])
}

fn hyp(t: f64) -> DMatrix<f64> {
    let (c, s) = ((t / 2.0).cosh(), (t / 2.0).sinh());
    mat(2, &[c, s, s, c])
}

fn c5_lower_bound() -> Verdict {
    // B and C differ by swapping the generators, so no pair below is
    // related by conjugation and J stays well away from its rigid value
    let b = Representation::new("B", vec![diag(4.0), hyp(2.0)]).unwrap();
    let c = Representation::new("C", vec![diag(2.0), hyp(4.0)]).unwrap();
    let pb = perturbed(&b.symmetric_power(3).unwrap(), 0.1, 1);
    let pc = perturbed(&c.symmetric_power(3).unwrap(), 0.1, 2);
    let reps = [b, c, pb, pc];
    let certify_classes = enumerate_classes(2, 8, 1 << 16).unwrap();
    if let Some(r) = reps.iter().find(|r| !certify_anosov(r, &certify_classes).certified) {
        return verdict(false, format!("{} is not certified", r.label()));
    }
    let fs: Vec<LengthFunctional> = reps.iter().cloned().map(LengthFunctional::log_radius).collect();
    let full = table(14, &fs).unwrap();
    let pairs = [(0, 1), (1, 0), (0, 3), (3, 0), (1, 2), (2, 1), (2, 3), (3, 2)];
    let mut ok = true;
    let mut worst = f64::INFINITY;
    let mut worst_deficit: f64 = 0.0;
    for &(f, g) in &pairs {
        let deficits: Vec<f64> = [12, 13, 14]
            .iter()
            .map(|&l| (1.0 - intersection(&full.truncate(l), f, g).unwrap().j).max(0.0))
            .collect();
        let j14 = intersection(&full, f, g).unwrap().j;
        worst = worst.min(j14);
        worst_deficit = deficits.iter().fold(worst_deficit, |m, d| m.max(*d));
        ok &= j14 >= 1.0 - 5e-2 && deficits[1] <= deficits[0] && deficits[2] <= deficits[1];
    }
    verdict(ok, format!("{} pairs, min J at L=14 {worst:.4}, largest deficit over L=12..14 {worst_deficit:.4}", pairs.len()))
}

fn c6_cross_ratio() -> Verdict {
    let rep = cusped_example();
    let (a, b): (Word, Word) = ("b".parse().unwrap(), "a".parse().unwrap());
    let lim = cr_limit_words(&rep, &a, &b, 13).unwrap();
    let paired = lim.paired_ratios(4);
    let single = lim.single_ratios(4);
    let ok = paired.iter().chain(&single).all(|r| *r <= 0.9) && lim.cross_ratio.discrepancy <= 1e-10;
    verdict(
        ok,
        format!(
            "b {:.12} vs Tr(p p) {:.12}; paired ratios max {:.3}; single-sequence ratios (limit {:.6}) max {:.3}",
            lim.cross_ratio.value,
            lim.cross_ratio.trace,
            paired.iter().fold(0.0f64, |m, r| m.max(*r)),
            lim.single_limit,
            single.iter().fold(0.0f64, |m, r| m.max(*r))
        ),
    )
}

fn c7_rank() -> Verdict {
    let pool = coprime_pool(&enumerate_classes(2, 3, 1 << 10).unwrap(), 10).unwrap();
    let scan = rank_scan(&cusped_example().symmetric_power(3).unwrap(), &pool, 4).unwrap();
    let (c3, c4) = (scan.chi[2].1, scan.chi[3].1);
    verdict(c3 > 1e-6 && c4 < 1e-8 && scan.detected_dimension == Some(3), format!("chi3 {c3:.2e} chi4 {c4:.2e} dim {:?}", scan.detected_dimension))
}

fn c8_proximality() -> Verdict {
    let classes = enumerate_classes(2, 10, 1 << 20).unwrap();
    let tau3 = schottky().symmetric_power(3).unwrap();
    let mut ok = true;
    let mut worst_recon: f64 = 0.0;
    let mut details = Vec::new();
    for rep in [schottky(), schottky2(), tau3] {
        for c in &classes {
            let sm = rep.evaluate(c.rep()).unwrap();
            let sd = dominant_eigendata(&sm).unwrap();
            let pd = projector_decomposition(&sm, &sd).unwrap();
            let scale = sm.matrix.amax();
            worst_recon = worst_recon
                .max((pd.reconstruct() - &sm.matrix).amax() / scale)
                .max((&pd.p * &pd.r).amax() / scale)
                .max((&pd.r * &pd.p).amax() / scale);
        }
        let report = certify_anosov(&rep, &classes);
        ok &= report.certified && report.delta < 1.0 && report.sandwich_violations == 0;
        details.push(format!("{} delta {:.3} violations {}", rep.label(), report.delta, report.sandwich_violations));
    }
    ok &= worst_recon <= 1e-12;
    let cusped = certify_anosov(&cusped_example(), &classes);
    details.push(format!("stated example certified: {}", cusped.certified));
    let _ = displacement_fit;
    verdict(ok, format!("reconstruction {worst_recon:.1e}; {}", details.join("; ")))
}

fn c9_pressure_form() -> Verdict {
    let ps: Vec<String> = ["t1", "t2", "t3", "s"].iter().map(|s| s.to_string()).collect();
    let base = RepFamily::explicit(
        "sl2",
        ps.clone(),
        vec![
            PolyMatrix::parse(2, &["1 + (2 + t1)^2", "2 + t1", "2 + t1", "1"], &ps).unwrap(),
            PolyMatrix::parse(2, &["1", "2 + t2", "2 + t2", "1 + (2 + t2)^2"], &ps).unwrap(),
        ],
    );
    let fam = base
        .conjugated(PolyMatrix::parse(2, &["1", "t3", "0", "1"], &ps).unwrap(), Some(vec![1]))
        .conjugated(PolyMatrix::parse(2, &["1", "0", "s", "1"], &ps).unwrap(), None);
    let probe = FamilyProbe::new(ProbeOptions { rank: 2, shell_len: 12, certify_len: 8 }).unwrap();
    let basis: Vec<Vec<f64>> = (0..4).map(|i| (0..4).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();
    let form = match probe.pressure_form(&fam, &[0.0; 4], &basis, 1e-2, false) {
        Ok(f) => f,
        Err(e) => return verdict(false, e.to_string()),
    };
    let dj = form.first_derivatives.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    let sub = DMatrix::from_fn(3, 3, |i, j| form.entry(i, j));
    let sub_min = sub.symmetric_eigenvalues().min();
    let gauge = form.scaled_row_norm(3);
    let mut var_dev: f64 = 0.0;
    for (i, b) in basis.iter().take(3).enumerate() {
        let v = probe.variance_form(&fam, &[0.0; 4], b, 1e-3).unwrap();
        var_dev = var_dev.max((v / form.entry(i, i) - 1.0).abs());
    }
    let ok = dj <= 1e-3
        && form.symmetry_defect == 0.0
        && form.eigenvalues[0] >= -1e-9
        && sub_min > 0.0
        && gauge <= 1e-6
        && var_dev <= 0.2;
    verdict(
        ok,
        format!(
            "|dJ| {dj:.1e}; eigenvalues {:?}; min on t1..t3 {sub_min:.3e}; gauge row {gauge:.1e}; variance route {var_dev:.1e}",
            form.eigenvalues.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>()
        ),
    )
}

fn c10_hausdorff() -> Verdict {
    let base = kleinian_schottky();
    let spec = SubshiftSpec::new(2, 5).unwrap();
    let delta = |theta: f64| {
        let rep = base.bend(1, 0.45, 2.5, theta).unwrap();
        entropy_root(&spec, &ComplexLineCocycle::new(Arc::new(rep), 12).unwrap()).unwrap()
    };
    // second differences on [0, 0.4] at steps 0.1 and 0.05, compared at shared points
    let second = |h: f64, x: f64| (delta(x + h) - 2.0 * delta(x) + delta(x - h)) / (h * h);
    let mut ok = true;
    let mut worst_ratio: f64 = 1.0;
    let mut bound: f64 = 0.0;
    for k in 0..=4 {
        let x = 0.1 * k as f64;
        let (q1, q2) = (second(0.1, x), second(0.05, x));
        let r = (q1 / q2).abs().max((q2 / q1).abs());
        worst_ratio = worst_ratio.max(r);
        bound = bound.max(q1.abs()).max(q2.abs());
        ok &= r <= 2.0 && q1.is_finite();
    }
    let d0 = delta(0.0);
    let oracle = hausdorff_oracle(9);
    ok &= (d0 - oracle).abs() <= 5e-3;
    verdict(ok, format!("delta(0) {d0:.6} oracle {oracle:.6}; |D2| <= {bound:.4}, halving ratio <= {worst_ratio:.3}"))
}

/// Interval refinement on the Schottky disks after x -> 1/(x - 2.5).
fn hausdorff_oracle(n: usize) -> f64 {
    type M = [[f64; 2]; 2];
    let mul = |a: &M, b: &M| -> M {
        [
            [a[0][0] * b[0][0] + a[0][1] * b[1][0], a[0][0] * b[0][1] + a[0][1] * b[1][1]],
            [a[1][0] * b[0][0] + a[1][1] * b[1][0], a[1][0] * b[0][1] + a[1][1] * b[1][1]],
        ]
    };
    let inv = |a: &M| -> M {
        let d = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        [[a[1][1] / d, -a[0][1] / d], [-a[1][0] / d, a[0][0] / d]]
    };
    let apply = |g: &M, x: f64| (g[0][0] * x + g[0][1]) / (g[1][0] * x + g[1][1]);
    let image = |g: &M, (lo, hi): (f64, f64)| {
        let (p, q) = (apply(g, lo), apply(g, hi));
        (p.min(q), p.max(q))
    };
    let phi: M = [[0.0, 1.0], [1.0, -2.5]];
    let a: M = [[3.0, 0.0], [0.0, 1.0 / 3.0]];
    let b: M = [[5.0 / 3.0, 4.0 / 3.0], [4.0 / 3.0, 5.0 / 3.0]];
    let gens: Vec<M> = [a, inv(&a), b, inv(&b)].iter().map(|g| mul(&mul(&phi, g), &inv(&phi))).collect();
    let disks = [
        (apply(&phi, -3.0), apply(&phi, 3.0)),
        image(&phi, (-1.0 / 3.0, 1.0 / 3.0)),
        image(&phi, (0.5, 2.0)),
        image(&phi, (-2.0, -0.5)),
    ];
    let mut levels = vec![(0..4).map(|i| (i, disks[i])).collect::<Vec<_>>()];
    for _ in 0..n {
        let next = levels
            .last()
            .unwrap()
            .iter()
            .flat_map(|&(first, iv)| (0..4).filter(move |g| g ^ 1 != first).map(move |g| (g, iv)))
            .map(|(g, iv)| (g, image(&gens[g], iv)))
            .collect();
        levels.push(next);
    }
    let z = |k: usize, s: f64| -> f64 { levels[k].iter().map(|(_, (lo, hi))| (hi - lo).powf(s)).sum() };
    let (mut lo, mut hi) = (0.3, 1.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if z(n, mid) > z(n - 1, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn main() {
    type Criterion = (usize, &'static str, fn() -> Verdict);
    let criteria: Vec<Criterion> = vec![
        (1, "enumeration oracle", c1_enumeration),
        (2, "entropy, two routes", c2_entropy),
        (3, "scaling laws", c3_scaling),
        (4, "J = 1 on symmetric powers", c4_symmetric_powers),
        (5, "J >= 1 bound", c5_lower_bound),
        (6, "cross-ratio limit", c6_cross_ratio),
        (7, "rank detection", c7_rank),
        (8, "proximality decomposition", c8_proximality),
        (9, "pressure form", c9_pressure_form),
        (10, "Hausdorff dimension smoothness", c10_hausdorff),
    ];
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        let v = run();
        let known = KNOWN_RED.iter().find(|k| k.0 == id);
        println!("criterion {id:>2} {:<4} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        match (v.pass, known) {
            (false, None) => unexpected.push(id),
            (false, Some((_, why))) => println!("             known red: {why}"),
            (true, Some(_)) => println!("             listed as known red but passed"),
            (true, None) => {}
        }
    }
    if !unexpected.is_empty() {
        eprintln!("red criteria: {unexpected:?}");
        std::process::exit(1);
    }
}
