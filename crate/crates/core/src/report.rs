//! Pipeline orchestration and machine-readable reporting: run the full
//! analysis (complex, flags, factors, graph, theorem verdicts), re-run it
//! at a higher precision and fail loudly on disagreement, and export the
//! results as deterministic JSON and DOT documents.

use crate::complex::{
    classify_vertices, complex_dimension, enumerate_complex, tropical_hull_verify, HullReport,
    InvariantComplex,
};
use crate::error::{Error, Result};
use crate::jobspec::JobSpec;
use crate::lattice::{Representation, StableLattice, VertexKey};
use crate::maxlat::{self, Subquotient};
use crate::modrep::{self, submodule_module};
use crate::ribet::{
    bellaiche_verify, brute_force_edges, edge_witness_sound, extension_graph,
    realised_extensions, residual_factors, BellaicheReport, ExtensionGraph, RealisedList,
    ResidualFactors,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Serialize, Clone)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Serialize)]
pub struct MetaSection {
    pub tool: String,
    pub spec_name: String,
    pub spec_sha256: String,
    pub precision: u32,
    pub recheck_precision: u32,
    pub max_diameter: u32,
    pub enumeration_cap: u64,
}

#[derive(Serialize)]
pub struct RingSection {
    pub p: u64,
    pub flavor: String,
}

#[derive(Serialize)]
pub struct FactorEntry {
    pub id: usize,
    pub label: String,
    pub dim: usize,
    pub multiplicity: usize,
}

#[derive(Serialize)]
pub struct VertexEntry {
    pub index: usize,
    pub key: String,
    pub depth: u32,
    pub maximal: bool,
    pub extremal: bool,
    pub length: usize,
    pub sharp_count: usize,
    pub socle_classes: Vec<usize>,
}

#[derive(Serialize)]
pub struct ComplexSection {
    pub dimension: usize,
    pub vertex_count: usize,
    pub maximal_count: usize,
    pub extremal_count: usize,
    pub base: usize,
    pub vertices: Vec<VertexEntry>,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Serialize)]
pub struct GraphEdgeEntry {
    pub from: String,
    pub to: String,
    pub witness_vertex: String,
    pub witness_dim: usize,
}

#[derive(Serialize)]
pub struct GraphSection {
    pub nodes: Vec<String>,
    pub edges: Vec<GraphEdgeEntry>,
    pub strongly_connected: bool,
}

#[derive(Serialize)]
pub struct HullWitnessEntry {
    pub vertex: String,
    pub using: Vec<String>,
}

#[derive(Serialize)]
pub struct HullSection {
    pub reconstruction_ok: bool,
    pub minimality_ok: bool,
    pub witnesses: Vec<HullWitnessEntry>,
}

#[derive(Serialize)]
pub struct BoundEntry {
    pub from: String,
    pub to: String,
    pub level: usize,
    pub distance: usize,
}

#[derive(Serialize)]
pub struct BellaicheSection {
    pub bounds_ok: bool,
    pub bounds: Vec<BoundEntry>,
}

#[derive(Serialize)]
pub struct ExtensionEntry {
    pub top: String,
    pub socle: String,
    pub classes: usize,
    pub total_witnesses: usize,
    pub unique_required: bool,
    pub unique_ok: Option<bool>,
    pub sources: Vec<String>,
}

#[derive(Serialize)]
pub struct Report {
    pub meta: MetaSection,
    pub ring: RingSection,
    pub factors: Vec<FactorEntry>,
    pub complex: ComplexSection,
    pub graph: GraphSection,
    pub hull: HullSection,
    pub bellaiche: BellaicheSection,
    pub extensions: Vec<ExtensionEntry>,
    pub verdicts: Vec<Verdict>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The mathematical payload: everything except `meta`. Used for the
    /// precision-stability comparison.
    pub fn payload_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().expect("report is an object").remove("meta");
        serde_json::to_string_pretty(&v).expect("payload serializes")
    }
}

/// The full analysis of one job at one working precision.
pub struct Analysis {
    pub spec: JobSpec,
    pub rep: Representation,
    pub base: StableLattice,
    pub complex: InvariantComplex,
    pub factors: ResidualFactors,
    pub graph: ExtensionGraph,
    pub hull: HullReport,
    pub bellaiche: BellaicheReport,
    /// `(top i, socle j) → realised list`, for all ordered pairs.
    pub extensions: Vec<(usize, usize, RealisedList)>,
    pub vertex_socle_classes: Vec<Vec<usize>>,
    pub verdicts: Vec<Verdict>,
}

fn verdict(name: &str, pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { name: name.to_string(), pass, detail: detail.into() }
}

/// Run the whole pipeline at the spec's working precision.
pub fn run_analysis(spec: &JobSpec) -> Result<Analysis> {
    let (rep, base) = spec.load()?;
    let cap = rep.cap();
    let mut complex = enumerate_complex(&rep, &base)?;
    classify_vertices(&rep, &mut complex)?;
    let dimension = complex_dimension(&rep, &mut complex)?;
    let factors = residual_factors(&rep, &complex)?;
    let graph = extension_graph(&rep, &complex, &factors)?;
    let hull = tropical_hull_verify(&rep, &complex)?;
    let bellaiche = bellaiche_verify(&rep, &complex, &factors, &graph)?;

    let mut verdicts: Vec<Verdict> = Vec::new();
    verdicts.push(verdict(
        "semisimplification_consistent",
        true,
        format!("{} factor classes agree on all {} vertices", factors.r(), complex.vertices.len()),
    ));
    verdicts.push(verdict(
        "dimension_cross_check",
        true,
        format!("length − 1 = longest chain − 1 = {dimension} at every vertex"),
    ));
    verdicts.push(verdict(
        "maximal_implies_extremal",
        true,
        "every maximal vertex is flagged extremal",
    ));

    // socle classes per vertex
    let mut vertex_socle_classes = Vec::with_capacity(complex.vertices.len());
    for v in &complex.vertices {
        let mut ids = Vec::new();
        for summand in modrep::decompose_semisimple(&v.reduction, &v.socle, cap)? {
            ids.push(factors.classify(&submodule_module(&v.reduction, &summand), cap)?);
        }
        ids.sort_unstable();
        vertex_socle_classes.push(ids);
    }

    // count bounds
    let n_max = complex.maximal_indices().len();
    let n_ext = complex.extremal_indices().len();
    let multiplicity_free = factors.multiplicities.iter().all(|&m| m == 1);
    let count_ok = n_max >= 1 + dimension && (!multiplicity_free || n_max == 1 + dimension);
    verdicts.push(verdict(
        "count_bound_maximal",
        count_ok,
        format!(
            "|X_max| = {n_max} vs 1 + dim = {}{}",
            1 + dimension,
            if multiplicity_free { " (equality required: multiplicity free)" } else { "" }
        ),
    ));
    verdicts.push(verdict(
        "count_bound_extremal",
        n_ext >= n_max,
        format!("|X_ext| = {n_ext} ≥ |X_max| = {n_max}"),
    ));
    let sharp_ok = complex.vertices.iter().all(|v| v.sharp_count >= v.length);
    verdicts.push(verdict(
        "sharp_count_bound",
        sharp_ok,
        "per vertex: #sharp subquotients ≥ module length",
    ));

    // existence and uniqueness of maximal vertices per socle class
    let mut socle_ok = true;
    let mut socle_detail = String::new();
    for c in 0..factors.r() {
        let count = complex
            .maximal_indices()
            .iter()
            .filter(|&&mi| vertex_socle_classes[mi] == vec![c])
            .count();
        let constructed =
            maxlat::maximal_with_socle(&rep, &base, &factors.classes[c].representative, cap)?;
        let ckey = constructed.0.lattice.key(rep.ctx());
        let cidx = complex.index_of(&ckey);
        let constructed_ok = cidx
            .map(|idx| vertex_socle_classes[idx] == vec![c] && complex.vertices[idx].is_maximal)
            .unwrap_or(false);
        let unique_ok = factors.multiplicities[c] != 1 || count == 1;
        if count == 0 || !constructed_ok || !unique_ok {
            socle_ok = false;
        }
        socle_detail.push_str(&format!(
            "{}:{}{} ",
            factors.classes[c].label,
            count,
            if factors.multiplicities[c] == 1 { " (must be 1)" } else { "" }
        ));
    }
    verdicts.push(verdict("socle_existence_uniqueness", socle_ok, socle_detail.trim()));

    // θ-surjectivity: for every vertex, realize each sharp subquotient by
    // a maximal vertex and pull it back through θ; also every θ image of
    // a maximal vertex must be sharp
    let mut theta_ok = true;
    let mut theta_pairs = 0usize;
    for v in &complex.vertices {
        let sharps = maxlat::sharp_subquotients(&v.reduction, cap)?;
        for q in &sharps {
            let vertex = maxlat::realize_sharp(&rep, &v.lattice, q, cap)?;
            let back = maxlat::theta(&rep, &v.lattice, &vertex.lattice, cap)?;
            if &back != q {
                theta_ok = false;
            }
            if !maxlat::is_maximal_at(&rep, &vertex.lattice, &vertex.witness, cap)? {
                theta_ok = false;
            }
            theta_pairs += 1;
        }
        for &mi in &complex.maximal_indices() {
            let q = maxlat::theta(&rep, &v.lattice, &complex.vertices[mi].lattice, cap)?;
            if !sharps.iter().any(|s| s == &q) {
                theta_ok = false;
            }
        }
    }
    verdicts.push(verdict(
        "theta_surjectivity",
        theta_ok,
        format!("{theta_pairs} sharp subquotients realized and pulled back"),
    ));

    verdicts.push(verdict(
        "tropical_hull_reconstruction",
        hull.reconstruction_ok,
        "every vertex is a finite intersection of normalised maximal representatives",
    ));
    verdicts.push(verdict(
        "tropical_hull_minimality",
        hull.minimality_ok,
        "no maximal vertex lies in the intersection closure of the others",
    ));

    verdicts.push(verdict(
        "bellaiche_path_bounds",
        bellaiche.bounds_ok,
        "directed distance ≤ socle-filtration level − 1 for every ordered pair",
    ));
    verdicts.push(verdict(
        "strong_connectivity",
        bellaiche.strongly_connected,
        "every factor reaches every factor in the extension graph",
    ));

    // edge soundness and the brute-force oracle equivalence
    let mut edges_sound = true;
    for e in &graph.edges {
        if !edge_witness_sound(&rep, &complex, &factors, e)? {
            edges_sound = false;
        }
    }
    verdicts.push(verdict(
        "edge_witness_soundness",
        edges_sound,
        format!("{} edges carry verified non-split witnesses", graph.edges.len()),
    ));
    let mut built = graph.edge_pairs();
    built.sort_unstable();
    let oracle = brute_force_edges(&rep, &complex, &factors)?;
    verdicts.push(verdict(
        "edge_oracle_equivalence",
        built == oracle,
        format!("maximal-vertex edges {built:?} vs all-vertex oracle {oracle:?}"),
    ));

    // realised extensions for all ordered pairs
    let mut extensions = Vec::new();
    let mut unique_ok = true;
    for i in 0..factors.r() {
        for j in 0..factors.r() {
            let list = realised_extensions(&rep, &complex, &factors, i, j)?;
            if list.unique_ok == Some(false) {
                unique_ok = false;
            }
            // consistency: an edge j → i exists iff some extension is realised
            if graph.has_edge(j, i) != (list.total_found > 0) {
                unique_ok = false;
            }
            extensions.push((i, j, list));
        }
    }
    verdicts.push(verdict(
        "extension_uniqueness",
        unique_ok,
        "≤ 1 realised class for every multiplicity-one pair, matching the edge set",
    ));

    // duality: the cosocle of the dual reduction is the dual of the socle
    let dual_rep = rep.dual()?;
    let mut duality_ok = true;
    for &mi in &complex.maximal_indices() {
        let v = &complex.vertices[mi];
        let dual_lat = rep.dual_lattice(&dual_rep, &v.lattice)?;
        let dual_red = dual_rep.reduce_mod_pi(&dual_lat)?;
        let cosoc = modrep::cosocle_module(&dual_red, cap)?;
        let soc_mod = submodule_module(&v.reduction, &v.socle);
        if modrep::is_isomorphic(&cosoc, &soc_mod.dual(), cap)?.is_none() {
            duality_ok = false;
        }
    }
    verdicts.push(verdict(
        "duality_cosocle",
        duality_ok,
        "cosoc(Λ∨/πΛ∨) ≅ soc(Λ/πΛ)∨ for every maximal vertex",
    ));

    complex.dimension = dimension;
    Ok(Analysis {
        spec: spec.clone(),
        rep,
        base,
        complex,
        factors,
        graph,
        hull,
        bellaiche,
        extensions,
        vertex_socle_classes,
        verdicts,
    })
}

impl Analysis {
    pub fn all_verdicts_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn build_report(&self, spec_text: &str, recheck_precision: u32) -> Report {
        let meta = MetaSection {
            tool: format!("latmax {}", env!("CARGO_PKG_VERSION")),
            spec_name: self.spec.name.clone(),
            spec_sha256: hex_sha256(spec_text),
            precision: self.spec.precision,
            recheck_precision,
            max_diameter: self.spec.max_diameter,
            enumeration_cap: self.spec.enumeration_cap,
        };
        let ring = RingSection {
            p: self.spec.p,
            flavor: match self.spec.flavor {
                crate::ring::Flavor::PAdic => "p-adic".to_string(),
                crate::ring::Flavor::PowerSeries => "power-series".to_string(),
            },
        };
        let factors = self
            .factors
            .classes
            .iter()
            .map(|c| FactorEntry {
                id: c.id,
                label: c.label.clone(),
                dim: c.dim,
                multiplicity: self.factors.multiplicities[c.id],
            })
            .collect();
        let vertices = self
            .complex
            .vertices
            .iter()
            .enumerate()
            .map(|(i, v)| VertexEntry {
                index: i,
                key: v.key.to_string(),
                depth: v.depth,
                maximal: v.is_maximal,
                extremal: v.is_extremal,
                length: v.length,
                sharp_count: v.sharp_count,
                socle_classes: self.vertex_socle_classes[i].clone(),
            })
            .collect();
        let complex = ComplexSection {
            dimension: self.complex.dimension,
            vertex_count: self.complex.vertices.len(),
            maximal_count: self.complex.maximal_indices().len(),
            extremal_count: self.complex.extremal_indices().len(),
            base: self.complex.base,
            vertices,
            edges: self.complex.edges.clone(),
        };
        let graph = GraphSection {
            nodes: self.factors.classes.iter().map(|c| c.label.clone()).collect(),
            edges: self
                .graph
                .edges
                .iter()
                .map(|e| GraphEdgeEntry {
                    from: self.factors.classes[e.from].label.clone(),
                    to: self.factors.classes[e.to].label.clone(),
                    witness_vertex: e.witness_vertex.to_string(),
                    witness_dim: e.witness.dim(),
                })
                .collect(),
            strongly_connected: self.bellaiche.strongly_connected,
        };
        let hull = HullSection {
            reconstruction_ok: self.hull.reconstruction_ok,
            minimality_ok: self.hull.minimality_ok,
            witnesses: self
                .hull
                .witnesses
                .iter()
                .map(|(k, using)| HullWitnessEntry {
                    vertex: k.to_string(),
                    using: using.iter().map(VertexKey::to_string).collect(),
                })
                .collect(),
        };
        let bellaiche = BellaicheSection {
            bounds_ok: self.bellaiche.bounds_ok,
            bounds: self
                .bellaiche
                .bounds
                .iter()
                .map(|&(i, j, level, distance)| BoundEntry {
                    from: self.factors.classes[i].label.clone(),
                    to: self.factors.classes[j].label.clone(),
                    level,
                    distance,
                })
                .collect(),
        };
        let extensions = self
            .extensions
            .iter()
            .map(|(i, j, list)| ExtensionEntry {
                top: self.factors.classes[*i].label.clone(),
                socle: self.factors.classes[*j].label.clone(),
                classes: list.classes.len(),
                total_witnesses: list.total_found,
                unique_required: list.unique_ok.is_some(),
                unique_ok: list.unique_ok,
                sources: list.classes.iter().map(|c| c.source_vertex.to_string()).collect(),
            })
            .collect();
        Report {
            meta,
            ring,
            factors,
            complex,
            graph,
            hull,
            bellaiche,
            extensions,
            verdicts: self.verdicts.clone(),
        }
    }

    /// DOT export of the invariant complex; vertices carry socle classes
    /// and flags.
    pub fn complex_dot(&self) -> String {
        let mut out = String::from("graph invariant_complex {\n  node [shape=box];\n");
        for (i, v) in self.complex.vertices.iter().enumerate() {
            let socle: Vec<String> = self.vertex_socle_classes[i]
                .iter()
                .map(|&c| self.factors.classes[c].label.clone())
                .collect();
            let mut flags = String::new();
            if v.is_maximal {
                flags.push_str(" max");
            }
            if v.is_extremal {
                flags.push_str(" ext");
            }
            if i == self.complex.base {
                flags.push_str(" base");
            }
            out.push_str(&format!(
                "  v{} [label=\"v{}: soc={{{}}}{}\\n{}\"];\n",
                i,
                i,
                socle.join(","),
                flags,
                v.key
            ));
        }
        for (a, b) in &self.complex.edges {
            out.push_str(&format!("  v{a} -- v{b};\n"));
        }
        out.push_str("}\n");
        out
    }

    /// DOT export of the extension graph; edges carry witness vertex keys.
    pub fn graph_dot(&self) -> String {
        let mut out = String::from("digraph extension_graph {\n");
        for c in &self.factors.classes {
            out.push_str(&format!(
                "  {} [label=\"{} (dim {}, m={})\"];\n",
                c.label, c.label, c.dim, self.factors.multiplicities[c.id]
            ));
        }
        for e in &self.graph.edges {
            out.push_str(&format!(
                "  {} -> {} [label=\"via {}\"];\n",
                self.factors.classes[e.from].label,
                self.factors.classes[e.to].label,
                e.witness_vertex
            ));
        }
        out.push_str("}\n");
        out
    }
}

fn hex_sha256(text: &str) -> String {
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    let digest = h.finalize();
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Ascend from the base lattice normalised at the given vector; returns
/// the final vertex key and the full ascent trace.
pub fn ascend_trace(
    rep: &Representation,
    base: &StableLattice,
    ints: &[i64],
) -> Result<(VertexKey, Vec<VertexKey>)> {
    let v = rep.vector_from_int(ints, 0)?;
    let start = rep.normalise_at(base, &v)?;
    let (lat, trace) = maxlat::ascend_to_maximal(rep, &start, &v, rep.cap())?;
    let keys = trace.iter().map(|l| l.key(rep.ctx())).collect();
    Ok((lat.key(rep.ctx()), keys))
}

/// θ image of every maximal vertex at a given lattice, as subquotient
/// dimension pairs; used by the CLI for tracing.
pub fn theta_images(
    rep: &Representation,
    complex: &InvariantComplex,
    lat: &StableLattice,
    cap: u64,
) -> Result<Vec<(VertexKey, Subquotient)>> {
    let mut out = Vec::new();
    for &mi in &complex.maximal_indices() {
        let q = maxlat::theta(rep, lat, &complex.vertices[mi].lattice, cap)?;
        out.push((complex.vertices[mi].key.clone(), q));
    }
    Ok(out)
}

/// Parse, analyze at the working precision, re-run at `+4`, and fail
/// loudly if the mathematical payload differs.
pub fn analyze_checked(
    spec_text: &str,
    precision_override: Option<u32>,
    max_diameter_override: Option<u32>,
) -> Result<(Analysis, Report)> {
    let mut spec = crate::jobspec::parse_spec(spec_text)?;
    if let Some(p) = precision_override {
        spec.precision = p;
    }
    if let Some(d) = max_diameter_override {
        spec.max_diameter = d;
    }
    let recheck = spec.precision + 4;
    let analysis = run_analysis(&spec)?;
    let report = analysis.build_report(spec_text, recheck);

    let spec_hi = spec.with_precision(recheck);
    let analysis_hi = run_analysis(&spec_hi)?;
    let report_hi = analysis_hi.build_report(spec_text, recheck);
    if report.payload_json() != report_hi.payload_json() {
        return Err(Error::PrecisionExhausted(format!(
            "results differ between precision {} and {}",
            spec.precision, recheck
        )));
    }
    Ok((analysis, report))
}
