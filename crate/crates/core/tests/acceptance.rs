//! Acceptance run over the certification suite. Prints one PASS/FAIL line per
//! criterion and exits nonzero when any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::Instant;

use common::{dense_rank, random_tets, reference_tet, snf, suite, SuiteMesh};
use distfe::geometry::Point;
use distfe::homology::Family;
use distfe::operators::assemble_with;
use distfe::oracle::{covers, OracleConfig};
use distfe::report::{certify, certify_kind, to_json, CertifyOptions, KindReport};
use distfe::spaces::{local_sequence_ranks, tdnns_bubble_basis, u1_dof_matrix, u1_local_shape_basis, LocalElements};
use distfe::verification::composites;
use distfe::{ComplexKind, Rational};

const TRIALS: usize = 20;
const COMPOSITE_BUDGET_S: f64 = 120.0;
const RANDOM_TETS: usize = 100;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(failures: &[String], ok: impl Into<String>) -> Self {
        if failures.is_empty() {
            Self { pass: true, detail: ok.into() }
        } else {
            let shown: Vec<&str> = failures.iter().take(5).map(String::as_str).collect();
            Self { pass: false, detail: format!("{} failure(s): {}", failures.len(), shown.join("; ")) }
        }
    }
}

fn options() -> CertifyOptions {
    CertifyOptions { oracle: OracleConfig { trials: TRIALS, ..OracleConfig::default() }, fault: None }
}

fn refs(tet: &[Point]) -> Vec<&Point> {
    tet.iter().collect()
}

/// Degrees of the operators with at least one row and one column.
fn nonempty_degrees(kind: ComplexKind, m: &SuiteMesh, local: &LocalElements) -> BTreeSet<usize> {
    let asm = assemble_with(kind, &m.mesh, local).expect("assembly");
    asm.ops.iter().enumerate().filter(|(_, op)| op.rows() > 0 && op.cols() > 0).map(|(k, _)| k).collect()
}

fn criterion_1(suite: &[SuiteMesh]) -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut count = 0;
    for m in suite {
        let local = LocalElements::new(&m.mesh).expect("local elements");
        for kind in ComplexKind::for_dim(m.mesh.dim()) {
            let asm = assemble_with(kind, &m.mesh, &local).expect("assembly");
            for c in composites(&asm).expect("composites") {
                count += 1;
                if !c.zero {
                    failures.push(format!("{} on {}: {} has {} nonzeros", kind, m.name, c.label, c.nnz));
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= COMPOSITE_BUDGET_S {
        failures.push(format!("took {secs:.1}s, budget {COMPOSITE_BUDGET_S}s"));
    }
    Outcome::new(&failures, format!("{count} composites exactly zero in {secs:.1}s"))
}

fn criterion_2(suite: &[SuiteMesh], reports: &[Vec<KindReport>]) -> Outcome {
    let mut failures = Vec::new();
    let mut pairs = 0;
    for (m, reps) in suite.iter().zip(reports) {
        let n = m.mesh.dim();
        let b = snf::betti(&m.mesh);
        let coeff = n + 1;
        for r in reps {
            pairs += 1;
            let expected: Vec<usize> = (0..=n).map(|k| coeff * if r.kind.is_bc() { b[n - k] } else { b[k] }).collect();
            let computed: Vec<usize> = r.cohomology.iter().map(|c| c.computed).collect();
            if computed != expected || r.cohomology.iter().any(|c| c.expected != c.computed) {
                failures.push(format!("{} on {}: computed {computed:?}, expected {expected:?}", r.kind, m.name));
            }
        }
    }
    Outcome::new(&failures, format!("{pairs} (kind, mesh) pairs match Smith normal form Betti numbers"))
}

fn criterion_3(suite: &[SuiteMesh], reports: &[Vec<KindReport>], tets: &[Vec<Point>]) -> Outcome {
    let mut failures = Vec::new();
    for (m, reps) in suite.iter().zip(reports).filter(|(m, _)| m.mesh.dim() == 3) {
        let total: Vec<usize> = snf::closure(&m.mesh).iter().map(Vec::len).collect();
        let interior = snf::interior_counts(&m.mesh);
        let dims = |kind: ComplexKind| reps.iter().find(|r| r.kind == kind).expect("kind certified").dims.clone();
        let hess = dims(ComplexKind::Hessian3d);
        let divdiv = dims(ComplexKind::Divdiv3d);
        if hess[1] != interior[2] {
            failures.push(format!("{}: dim V1 = {} but {} interior faces", m.name, hess[1], interior[2]));
        }
        if hess[2] != 2 * interior[1] {
            failures.push(format!("{}: dim V2 = {} but {} interior edges", m.name, hess[2], interior[1]));
        }
        if divdiv[2] != total[2] + 2 * total[3] {
            failures.push(format!("{}: dim U2 = {} but F = {}, K = {}", m.name, divdiv[2], total[2], total[3]));
        }
    }
    let samples = random_tets(20, 7);
    for (t, tet) in tets.iter().enumerate() {
        let pts = refs(tet);
        let shapes = u1_local_shape_basis(&pts).expect("shape basis");
        let evals: Vec<Vec<Rational>> = shapes
            .iter()
            .map(|f| {
                samples.iter().flat_map(|s| f.iter().flatten().map(|p| p.eval(&s[0])).collect::<Vec<_>>()).collect()
            })
            .collect();
        let u1 = dense_rank(evals);
        if shapes.len() != 14 || u1 != 14 {
            failures.push(format!("tet {t}: local U1 has {} fields spanning {u1}", shapes.len()));
        }
        let bubbles = tdnns_bubble_basis(&pts).expect("bubbles");
        let flat: Vec<Vec<Rational>> = bubbles.iter().map(|b| b.iter().flatten().cloned().collect()).collect();
        let nb = dense_rank(flat);
        if bubbles.len() != 2 || nb != 2 {
            failures.push(format!("tet {t}: bubble space has {} fields spanning {nb}", bubbles.len()));
        }
    }
    Outcome::new(&failures, format!("suite formulas hold, local dims (14, 2) on {} tets", tets.len()))
}

fn criterion_4(tets: &[Vec<Point>]) -> Outcome {
    let mut failures = Vec::new();
    for (t, tet) in tets.iter().enumerate() {
        let pts = refs(tet);
        let dof = u1_dof_matrix(&pts).expect("dof matrix");
        let rank = dense_rank(dof.to_dense());
        if (dof.rows(), dof.cols(), rank) != (14, 14, 14) {
            failures.push(format!("tet {t}: {}x{} dof matrix of rank {rank}", dof.rows(), dof.cols()));
        }
        let seq = local_sequence_ranks(&pts).expect("sequence ranks");
        if seq != (8, 6) {
            failures.push(format!("tet {t}: sequence ranks {seq:?}"));
        }
    }
    Outcome::new(&failures, format!("nonsingular with ranks (8, 6) on {} tets", tets.len()))
}

fn criterion_5(suite: &[SuiteMesh], reports: &[Vec<KindReport>]) -> Outcome {
    let mut failures = Vec::new();
    let mut checked = 0;
    for (m, reps) in suite.iter().zip(reports) {
        let interior = snf::interior_counts(&m.mesh);
        let vertices = snf::closure(&m.mesh)[0].len();
        for r in reps.iter().filter(|r| r.kind.family() == Family::Aux) {
            checked += 1;
            let Some(d) = &r.diagram else {
                failures.push(format!("{} on {}: no diagram report", r.kind, m.name));
                continue;
            };
            let lagrange = if r.kind.is_bc() { interior[0] } else { vertices };
            let mut tilde = vec![0; m.mesh.dim() + 1];
            tilde[0] = lagrange;
            let ok = d.kappa_squares.iter().all(|&b| b)
                && d.columns_exact.iter().all(|&b| b)
                && d.euler
                && d.tilde_cohomology == tilde
                && d.pass;
            if !ok {
                failures.push(format!("{} on {}: {d:?}", r.kind, m.name));
            }
        }
    }
    Outcome::new(&failures, format!("{checked} diagram checks commute and are exact"))
}

fn criterion_6(suite: &[SuiteMesh], reports: &[Vec<KindReport>]) -> Outcome {
    let mut failures = Vec::new();
    let mut pairings = 0;
    for (m, reps) in suite.iter().zip(reports) {
        for r in reps.iter().filter(|r| r.kind.family() != Family::Aux) {
            if r.duality.is_empty() {
                failures.push(format!("{} on {}: no pairing checked", r.kind, m.name));
            }
            for d in &r.duality {
                pairings += 1;
                let ok = d.nondegenerate.iter().all(|n| *n != Some(false))
                    && d.nondegenerate.contains(&Some(true))
                    && d.identities.iter().all(|i| i.holds)
                    && d.harmonic_distribution == d.harmonic_function
                    && d.pass;
                if !ok {
                    failures.push(format!("{} vs {} on {}: {d:?}", d.distribution, d.function, m.name));
                }
            }
        }
    }
    Outcome::new(&failures, format!("{pairings} pairings nondegenerate with matching harmonic dims"))
}

fn fault_detected(r: &KindReport) -> bool {
    r.oracle.iter().any(|o| !o.pass) || r.trimmed_consistent == Some(false)
}

fn criterion_7(suite: &[SuiteMesh], reports: &[Vec<KindReport>]) -> Outcome {
    let mut failures = Vec::new();
    let mut operators = 0;
    for (m, reps) in suite.iter().zip(reports) {
        let local = LocalElements::new(&m.mesh).expect("local elements");
        for r in reps.iter().filter(|r| covers(r.kind)) {
            let wanted = nonempty_degrees(r.kind, m, &local);
            let seen: BTreeSet<usize> = r.oracle.iter().map(|o| o.degree).collect();
            if !wanted.is_subset(&seen) {
                failures.push(format!("{} on {}: oracle saw {seen:?}, operators {wanted:?}", r.kind, m.name));
            }
            for o in &r.oracle {
                operators += 1;
                if !o.pass || o.mismatches != 0 || o.trials != TRIALS {
                    failures.push(format!("{} on {}: {o:?}", r.kind, m.name));
                }
            }
        }
    }
    let mut faults = 0;
    for m in suite.iter().filter(|m| m.name == "gen:criss-cross-square:1" || m.name == "gen:cube:1") {
        let local = LocalElements::new(&m.mesh).expect("local elements");
        for kind in ComplexKind::for_dim(m.mesh.dim()) {
            for k in nonempty_degrees(kind, m, &local) {
                faults += 1;
                let opts = CertifyOptions { fault: Some(k.to_string()), ..options() };
                let r = certify_kind(&m.mesh, &m.name, &local, kind, &opts).expect("faulted certify");
                if r.pass || !fault_detected(&r) {
                    failures.push(format!("fault in {kind} operator {k} on {} went unnoticed", m.name));
                }
            }
        }
    }
    Outcome::new(&failures, format!("{operators} operator checks exact, {faults}/{faults} injected faults detected"))
}

fn without_runtime(reports: &[KindReport]) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(&to_json(reports).expect("json")).expect("valid json");
    for r in v.as_array_mut().expect("report array") {
        r.as_object_mut().expect("report object").remove("runtime_s");
    }
    v
}

fn criterion_8(suite: &[SuiteMesh], reports: &[Vec<KindReport>]) -> Outcome {
    let mut failures = Vec::new();
    let mut reruns = 0;
    for (m, reps) in suite.iter().zip(reports).filter(|(m, _)| m.mesh.num(m.mesh.dim()) <= 16) {
        reruns += 1;
        let kinds: Vec<ComplexKind> = reps.iter().map(|r| r.kind).collect();
        let again = certify(&m.mesh, &m.name, &kinds, &options()).expect("certify");
        if without_runtime(reps) != without_runtime(&again) {
            failures.push(format!("{}: reports differ between runs", m.name));
        }
    }
    Outcome::new(&failures, format!("{reruns} meshes reproduce identical reports"))
}

fn main() -> ExitCode {
    let suite = suite();
    let mut tets = vec![reference_tet()];
    tets.extend(random_tets(RANDOM_TETS, 2024));

    let c1 = criterion_1(&suite);
    let reports: Vec<Vec<KindReport>> = suite
        .iter()
        .map(|m| certify(&m.mesh, &m.name, &ComplexKind::for_dim(m.mesh.dim()), &options()).expect("certify"))
        .collect();
    let outcomes = [
        ("complex property", c1),
        ("cohomology", criterion_2(&suite, &reports)),
        ("dimension formulas", criterion_3(&suite, &reports, &tets)),
        ("unisolvency", criterion_4(&tets)),
        ("diagrams", criterion_5(&suite, &reports)),
        ("duality", criterion_6(&suite, &reports)),
        ("adjointness oracle", criterion_7(&suite, &reports)),
        ("determinism", criterion_8(&suite, &reports)),
    ];
    let mut all = true;
    for (i, (name, o)) in outcomes.iter().enumerate() {
        all &= o.pass;
        println!("criterion {} ({name}): {} | {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
