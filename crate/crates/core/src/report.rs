//! Certification runs and their JSON and CSV reports.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::homology::{ComplexKind, Family};
use crate::mesh::SimplicialComplex;
use crate::operators::{assemble_with, ComplexAssembly};
use crate::oracle::{flip_sign, perturb, run_oracle, OperatorOracle, OracleConfig};
use crate::spaces::LocalElements;
use crate::verification::{
    certify_cohomology, check_diagram, check_duality, check_trimmed, composites, CohomologyEntry, Composite,
    DiagramReport, DualityReport,
};
use crate::{Error, Result};

/// Options of a certification run.
#[derive(Clone, Debug, Default)]
pub struct CertifyOptions {
    pub oracle: OracleConfig,
    /// Single-entry fault: `<operator>` adds one to an entry of the operator
    /// (label or degree), `flip-sign[:<operator>]` negates one, defaulting
    /// to the first nonzero operator.
    pub fault: Option<String>,
}

/// Certification report of one complex on one mesh.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KindReport {
    pub mesh: String,
    pub kind: ComplexKind,
    pub dims: Vec<usize>,
    pub composites: Vec<Composite>,
    pub cohomology: Vec<CohomologyEntry>,
    pub duality: Vec<DualityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagram: Option<DiagramReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trimmed_consistent: Option<bool>,
    pub oracle: Vec<OperatorOracle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fault: Option<String>,
    pub pass: bool,
    pub runtime_s: f64,
}

fn fault_index(asm: &ComplexAssembly, name: &str) -> Result<usize> {
    if let Ok(k) = name.parse::<usize>() {
        if k < asm.ops.len() {
            return Ok(k);
        }
    }
    asm.labels
        .iter()
        .position(|l| l == name || l.replace(' ', "") == name)
        .ok_or_else(|| Error::Invalid(format!("{} has no operator `{name}`; use one of {:?}", asm.kind, asm.labels)))
}

fn inject_fault(asm: &mut ComplexAssembly, fault: &str) -> Result<()> {
    let (flip, name) = match fault.strip_prefix("flip-sign") {
        Some("") => (true, None),
        Some(rest) => match rest.strip_prefix(':') {
            Some(name) => (true, Some(name)),
            None => (false, Some(fault)),
        },
        None => (false, Some(fault)),
    };
    let k = match name {
        Some(name) => fault_index(asm, name)?,
        None => asm
            .ops
            .iter()
            .position(|op| op.nnz() > 0)
            .ok_or_else(|| Error::Invalid(format!("{} has no nonzero operator", asm.kind)))?,
    };
    log::warn!("injecting a fault into operator {} of {}", asm.labels[k], asm.kind);
    asm.ops[k] = if flip { flip_sign(&asm.ops[k])? } else { perturb(&asm.ops[k])? };
    Ok(())
}

/// The complex whose spaces are dual to those of `kind`.
fn partners(kind: ComplexKind) -> Vec<(ComplexKind, ComplexKind)> {
    let n = kind.dim();
    let bc = kind.is_bc();
    let pick = |fam: Family, bc: bool| {
        ComplexKind::for_dim(n).into_iter().find(|k| k.family() == fam && k.is_bc() == bc).expect("family exists")
    };
    match kind.family() {
        Family::Hessian => {
            let mut out = Vec::new();
            if n == 3 {
                out.push((kind, pick(Family::TrimmedDivdiv, !bc)));
            }
            out.push((kind, pick(Family::Divdiv, !bc)));
            out
        }
        Family::Divdiv | Family::TrimmedDivdiv => vec![(pick(Family::Hessian, !bc), kind)],
        Family::Aux => Vec::new(),
    }
}

/// Certifies one complex on a mesh: composites, cohomology, the diagram or
/// duality checks that apply to its family, and the oracle.
pub fn certify_kind(
    mesh: &SimplicialComplex,
    mesh_name: &str,
    local: &LocalElements,
    kind: ComplexKind,
    opts: &CertifyOptions,
) -> Result<KindReport> {
    let start = Instant::now();
    let mut asm = assemble_with(kind, mesh, local)?;
    if let Some(fault) = &opts.fault {
        inject_fault(&mut asm, fault)?;
    }
    log::debug!("{kind}: assembled in {:.2}s", start.elapsed().as_secs_f64());
    let comps = composites(&asm)?;
    let cohomology = certify_cohomology(&asm, mesh)?;
    log::debug!("{kind}: cohomology done at {:.2}s", start.elapsed().as_secs_f64());
    log::info!("{kind}: cohomology {:?}", cohomology.iter().map(|c| c.computed).collect::<Vec<_>>());
    let mut duality = Vec::new();
    for (d, f) in partners(kind) {
        let dist = if d == kind { asm.clone() } else { assemble_with(d, mesh, local)? };
        let func = if f == kind { asm.clone() } else { assemble_with(f, mesh, local)? };
        duality.push(check_duality(mesh, local, &dist, &func)?);
    }
    let diagram = if kind.family() == Family::Aux { Some(check_diagram(mesh, local, kind.is_bc())?) } else { None };
    let trimmed_consistent = if kind.family() == Family::TrimmedDivdiv {
        let full = assemble_with(ComplexKind::Divdiv3d.with_bc(kind.is_bc()), mesh, local)?;
        Some(check_trimmed(&full, &asm)?)
    } else {
        None
    };
    log::debug!("{kind}: structural checks done at {:.2}s", start.elapsed().as_secs_f64());
    let oracle = run_oracle(&asm, mesh, local, &opts.oracle)?;
    log::debug!("{kind}: oracle done at {:.2}s", start.elapsed().as_secs_f64());
    let pass = comps.iter().all(|c| c.zero)
        && cohomology.iter().all(|c| c.pass)
        && duality.iter().all(|d| d.pass)
        && diagram.as_ref().is_none_or(|d| d.pass)
        && trimmed_consistent.unwrap_or(true)
        && oracle.iter().all(|o| o.pass);
    Ok(KindReport {
        mesh: mesh_name.to_string(),
        kind,
        dims: asm.dims(),
        composites: comps,
        cohomology,
        duality,
        diagram,
        trimmed_consistent,
        oracle,
        fault: opts.fault.clone(),
        pass,
        runtime_s: start.elapsed().as_secs_f64(),
    })
}

/// Certifies several complexes on one mesh.
pub fn certify(
    mesh: &SimplicialComplex,
    mesh_name: &str,
    kinds: &[ComplexKind],
    opts: &CertifyOptions,
) -> Result<Vec<KindReport>> {
    let local = LocalElements::new(mesh)?;
    kinds.iter().map(|&k| certify_kind(mesh, mesh_name, &local, k, opts)).collect()
}

/// Pretty-printed JSON array of reports.
pub fn to_json(reports: &[KindReport]) -> Result<String> {
    serde_json::to_string_pretty(reports).map_err(|e| Error::Invalid(format!("JSON encoding failed: {e}")))
}

#[derive(Serialize)]
struct CsvRow<'a> {
    mesh: &'a str,
    kind: ComplexKind,
    k: usize,
    dim: usize,
    rank_in: usize,
    rank_out: usize,
    computed: usize,
    expected: usize,
    pass: bool,
}

/// One CSV row per complex and degree.
pub fn to_csv(reports: &[KindReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        for c in &r.cohomology {
            w.serialize(CsvRow {
                mesh: &r.mesh,
                kind: r.kind,
                k: c.k,
                dim: c.dim,
                rank_in: c.rank_in,
                rank_out: c.rank_out,
                computed: c.computed,
                expected: c.expected,
                pass: c.pass,
            })
            .map_err(|e| Error::Invalid(format!("CSV encoding failed: {e}")))?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Invalid(format!("CSV encoding failed: {e}")))?;
    String::from_utf8(bytes).map_err(|e| Error::Invalid(format!("CSV encoding failed: {e}")))
}
