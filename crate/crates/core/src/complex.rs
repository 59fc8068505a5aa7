//! The invariant subcomplex of the Bruhat–Tits building spanned by the
//! stable lattice classes: breadth-first enumeration with a boundedness
//! guard, vertex classification (maximal / extremal), the dimension with
//! an independent cross-check, and the tropical convex hull verification.

use crate::error::{Error, Result};
use crate::lattice::{Representation, StableLattice, VertexKey};
use crate::maxlat;
use crate::modrep::{
    all_submodules, is_indecomposable, is_irreducible, module_length, socle, submodule_module,
    FpGModule, Submodule,
};
use crate::ring::adjugate_times;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

/// Per-vertex data of the invariant complex.
pub struct VertexData {
    pub key: VertexKey,
    /// Canonical class representative (`Λ ⊆ Λ₀`, `Λ ⊄ πΛ₀`).
    pub lattice: StableLattice,
    pub reduction: FpGModule,
    pub depth: u32,
    pub is_maximal: bool,
    pub is_extremal: bool,
    pub length: usize,
    pub sharp_count: usize,
    pub socle: Submodule,
}

/// The enumerated complex: vertices sorted by key, edges as index pairs.
pub struct InvariantComplex {
    pub vertices: Vec<VertexData>,
    pub edges: Vec<(usize, usize)>,
    pub base: usize,
    pub dimension: usize,
}

impl InvariantComplex {
    pub fn index_of(&self, key: &VertexKey) -> Option<usize> {
        self.vertices.binary_search_by(|v| v.key.cmp(key)).ok()
    }

    pub fn maximal_indices(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&i| self.vertices[i].is_maximal).collect()
    }

    pub fn extremal_indices(&self) -> Vec<usize> {
        (0..self.vertices.len()).filter(|&i| self.vertices[i].is_extremal).collect()
    }
}

/// Breadth-first enumeration from the base class: the neighbours of `[Λ]`
/// are the classes of `preimage(Λ, U)` over the proper nonzero submodules
/// `U` of `Λ/πΛ`. Exceeding the diameter or vertex guard reports
/// "possibly reducible".
pub fn enumerate_complex(rep: &Representation, base: &StableLattice) -> Result<InvariantComplex> {
    let ctx = rep.ctx();
    let cap = rep.cap();
    let base_key = base.key(ctx);
    let base_rep = StableLattice::class_representative(base);

    let mut discovered: BTreeMap<VertexKey, (StableLattice, u32)> = BTreeMap::new();
    let mut edge_keys: BTreeSet<(VertexKey, VertexKey)> = BTreeSet::new();
    let mut queue = VecDeque::new();
    discovered.insert(base_key.clone(), (base_rep.clone(), 0));
    queue.push_back(base_key.clone());

    while let Some(key) = queue.pop_front() {
        let (lat, depth) = discovered.get(&key).expect("queued keys are discovered").clone();
        let red = rep.reduce_mod_pi(&lat)?;
        let subs = all_submodules(&red, cap)?;
        for u in &subs {
            if u.is_zero() || u.is_full() {
                continue;
            }
            let neighbour = rep.preimage_lattice(&lat, u)?;
            let nkey = neighbour.key(ctx);
            if nkey != key {
                let (a, b) = if key < nkey { (key.clone(), nkey.clone()) } else { (nkey.clone(), key.clone()) };
                edge_keys.insert((a, b));
            }
            if !discovered.contains_key(&nkey) {
                if depth + 1 > rep.max_diameter() {
                    return Err(Error::DiameterExceeded(format!(
                        "complex reaches depth {} — ρ is possibly reducible",
                        depth + 1
                    )));
                }
                if discovered.len() as u64 + 1 > rep.vertex_cap() {
                    return Err(Error::DiameterExceeded(format!(
                        "complex exceeds {} vertices — ρ is possibly reducible",
                        rep.vertex_cap()
                    )));
                }
                discovered.insert(
                    nkey.clone(),
                    (StableLattice::class_representative(&neighbour), depth + 1),
                );
                queue.push_back(nkey);
            }
        }
    }

    // canonical vertex order = key order (BTreeMap iteration)
    let mut vertices = Vec::with_capacity(discovered.len());
    for (key, (lattice, depth)) in discovered {
        let reduction = rep.reduce_mod_pi(&lattice)?;
        let soc = socle(&reduction, cap)?;
        vertices.push(VertexData {
            key,
            lattice,
            reduction,
            depth,
            is_maximal: false,
            is_extremal: false,
            length: 0,
            sharp_count: 0,
            socle: soc,
        });
    }
    let index: BTreeMap<&VertexKey, usize> =
        vertices.iter().enumerate().map(|(i, v)| (&v.key, i)).collect();
    let edges: Vec<(usize, usize)> = edge_keys
        .iter()
        .map(|(a, b)| {
            let (i, j) = (index[a], index[b]);
            if i < j { (i, j) } else { (j, i) }
        })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let base = index[&base_key];

    Ok(InvariantComplex { vertices, edges, base, dimension: 0 })
}

impl StableLattice {
    /// The canonical representative of the homothety class (shift 0).
    pub fn class_representative(lat: &StableLattice) -> StableLattice {
        StableLattice::from_parts(lat.basis().clone(), 0)
    }
}

/// Fill the maximal/extremal flags, lengths and sharp counts. Every
/// maximal vertex must come out extremal; anything else is an internal
/// inconsistency.
pub fn classify_vertices(rep: &Representation, x: &mut InvariantComplex) -> Result<()> {
    let cap = rep.cap();
    for v in &mut x.vertices {
        let simple_socle = !v.socle.is_zero()
            && is_irreducible(&submodule_module(&v.reduction, &v.socle), cap)?;
        v.is_maximal = simple_socle;
        v.is_extremal = is_indecomposable(&v.reduction, cap)?;
        v.length = module_length(&v.reduction, cap)?;
        v.sharp_count = maxlat::sharp_subquotients(&v.reduction, cap)?.len();
        if v.is_maximal && !v.is_extremal {
            return Err(Error::Internal(format!(
                "maximal vertex {} is not extremal",
                v.key
            )));
        }
    }
    Ok(())
}

/// Dimension of the complex: `length(Λ/πΛ) − 1`, cross-checked against
/// the longest containment chain realized in the submodule poset of each
/// vertex. The two must agree at every vertex.
pub fn complex_dimension(rep: &Representation, x: &mut InvariantComplex) -> Result<usize> {
    let cap = rep.cap();
    let mut dim: Option<usize> = None;
    for v in &x.vertices {
        let len = module_length(&v.reduction, cap)?;
        let chain = longest_submodule_chain(&v.reduction, cap)?;
        if chain != len {
            return Err(Error::Internal(format!(
                "length {len} disagrees with longest chain {chain} at {}",
                v.key
            )));
        }
        match dim {
            None => dim = Some(len - 1),
            Some(d) if d == len - 1 => {}
            Some(d) => {
                return Err(Error::Internal(format!(
                    "vertex {} has length {len} but the complex has dimension {d}",
                    v.key
                )));
            }
        }
    }
    let d = dim.ok_or_else(|| Error::Internal("empty complex".to_string()))?;
    x.dimension = d;
    Ok(d)
}

/// On-demand face enumeration. The building is a flag complex and the
/// invariant subcomplex is full on its vertices, so the simplices are
/// exactly the cliques of the adjacency graph; this returns the maximal
/// ones, each as a sorted vertex-index list.
pub fn maximal_simplices(x: &InvariantComplex) -> Vec<Vec<usize>> {
    let n = x.vertices.len();
    let mut adj = vec![vec![false; n]; n];
    for &(a, b) in &x.edges {
        adj[a][b] = true;
        adj[b][a] = true;
    }
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut current: Vec<usize> = Vec::new();
    fn grow(
        start: usize,
        n: usize,
        adj: &[Vec<bool>],
        current: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let mut extended = false;
        for v in start..n {
            if current.iter().all(|&u| adj[u][v]) {
                current.push(v);
                grow(v + 1, n, adj, current, out);
                current.pop();
                extended = true;
            }
        }
        if !extended && !current.is_empty() {
            // maximal against later vertices; drop it if any earlier
            // vertex extends the clique
            let maximal = (0..n)
                .all(|v| current.contains(&v) || !current.iter().all(|&u| adj[u][v]));
            if maximal && !out.contains(current) {
                out.push(current.clone());
            }
        }
    }
    grow(0, n, &adj, &mut current, &mut out);
    out.sort();
    out
}

/// Longest strict chain from `0` to the full module in the submodule
/// poset — an independent route to the module length.
fn longest_submodule_chain(m: &FpGModule, cap: u64) -> Result<usize> {
    let subs = all_submodules(m, cap)?; // sorted by (dim, entries)
    let mut best = vec![0usize; subs.len()];
    for i in 0..subs.len() {
        for j in 0..i {
            if subs[j].dim() < subs[i].dim() && subs[i].contains(&subs[j]) {
                best[i] = best[i].max(best[j] + 1);
            }
        }
    }
    Ok(*best.last().unwrap_or(&0))
}

/// Report of the tropical-hull verification.
#[derive(Debug)]
pub struct HullReport {
    pub reconstruction_ok: bool,
    /// Per vertex: the maximal-vertex keys whose normalised
    /// representatives were intersected to recover it.
    pub witnesses: Vec<(VertexKey, Vec<VertexKey>)>,
    pub minimality_ok: bool,
    pub minimality_failures: Vec<VertexKey>,
}

/// Verify that every vertex is a finite intersection of normalised
/// maximal representatives, and that no maximal vertex lies in the
/// intersection closure of all the other vertices.
pub fn tropical_hull_verify(rep: &Representation, x: &InvariantComplex) -> Result<HullReport> {
    let ctx = rep.ctx();
    let maximal = x.maximal_indices();
    let mut witnesses = Vec::new();
    let mut reconstruction_ok = true;
    for (vi, v) in x.vertices.iter().enumerate() {
        // a maximal vertex reconstructs from itself (idempotence), so try
        // its own class first
        let mut order = maximal.clone();
        if let Some(pos) = order.iter().position(|&m| m == vi) {
            order.remove(pos);
            order.insert(0, vi);
        }
        let mut used: Vec<VertexKey> = Vec::new();
        let mut current: Option<StableLattice> = None;
        for &mi in &order {
            let mrep = rep.tight_superlattice(x.vertices[mi].lattice.basis(), &v.lattice)?;
            let next = match &current {
                None => mrep,
                Some(c) => rep.intersect(c, &mrep)?,
            };
            let shrank = current.as_ref() != Some(&next);
            if shrank || used.is_empty() {
                used.push(x.vertices[mi].key.clone());
            }
            current = Some(next);
            if current.as_ref() == Some(&v.lattice) {
                break;
            }
        }
        // intersection runs over representatives normalised around Λ, so
        // equality must be on the nose, not just up to homothety
        let ok = current.as_ref() == Some(&v.lattice);
        if !ok {
            reconstruction_ok = false;
        }
        witnesses.push((v.key.clone(), used));
    }

    // minimality: the closure of all vertices except a maximal x₀ under
    // pairwise normalised intersection never produces x₀
    let mut minimality_failures = Vec::new();
    for &mi in &maximal {
        let excluded = &x.vertices[mi].key;
        let mut closure: BTreeSet<VertexKey> = x
            .vertices
            .iter()
            .filter(|v| &v.key != excluded)
            .map(|v| v.key.clone())
            .collect();
        let mut grew = true;
        let mut hit = false;
        'outer: while grew {
            grew = false;
            let items: Vec<VertexKey> = closure.iter().cloned().collect();
            for a in &items {
                for b in &items {
                    if a >= b {
                        continue;
                    }
                    let la = &x.vertices[x.index_of(a).expect("closure stays inside X")].lattice;
                    let lb = &x.vertices[x.index_of(b).expect("closure stays inside X")].lattice;
                    for c in intersection_classes(rep, la, lb)? {
                        let ckey = c.key(ctx);
                        if x.index_of(&ckey).is_none() {
                            return Err(Error::Internal(format!(
                                "intersection produced a class outside the complex: {ckey}"
                            )));
                        }
                        if &ckey == excluded {
                            hit = true;
                            break 'outer;
                        }
                        if closure.insert(ckey) {
                            grew = true;
                        }
                    }
                }
            }
        }
        if hit {
            minimality_failures.push(excluded.clone());
        }
    }
    let minimality_ok = minimality_failures.is_empty();
    Ok(HullReport { reconstruction_ok, witnesses, minimality_ok, minimality_failures })
}

/// All homothety classes of `π^a·A ∩ B` over the relative shifts `a`;
/// outside a finite window the class degenerates to `[A]` or `[B]`.
fn intersection_classes(
    rep: &Representation,
    a: &StableLattice,
    b: &StableLattice,
) -> Result<Vec<StableLattice>> {
    // B ⊆ π^t·A for t ≤ t1;  π^t·A ⊆ B for t ≥ t2
    let (zab, ea) = adjugate_times(a.basis(), b.basis())?;
    let t1 = zab.min_val() as i64 - ea as i64 - b.shift() + a.shift();
    let (zba, eb) = adjugate_times(b.basis(), a.basis())?;
    let t2 = eb as i64 + a.shift() - b.shift() - zba.min_val() as i64;
    let mut out = vec![
        StableLattice::class_representative(a),
        StableLattice::class_representative(b),
    ];
    let mut t = t1 + 1;
    while t < t2 {
        let inter = rep.intersect(&a.scaled(t), b)?;
        out.push(StableLattice::class_representative(&inter));
        t += 1;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{load_representation, GeneratorSpec};
    use crate::ring::{make_ring, DVRMatrix, Flavor};

    const CAP: u64 = 1 << 20;

    pub fn analyze(rep: &Representation, base: &StableLattice) -> InvariantComplex {
        let mut x = enumerate_complex(rep, base).unwrap();
        classify_vertices(rep, &mut x).unwrap();
        complex_dimension(rep, &mut x).unwrap();
        x
    }

    fn fix1() -> (Representation, StableLattice) {
        let ctx = make_ring(3, 16, Flavor::PAdic).unwrap();
        load_representation(
            ctx,
            &[
                GeneratorSpec::integral("a", &[vec![0, -1], vec![1, -1]]),
                GeneratorSpec::integral("b", &[vec![-1, 1], vec![0, 1]]),
            ],
            16,
            CAP,
        )
        .unwrap()
    }

    fn fix2() -> (Representation, StableLattice) {
        let ctx = make_ring(2, 16, Flavor::PAdic).unwrap();
        load_representation(
            ctx,
            &[
                GeneratorSpec::integral("a", &[vec![0, -1], vec![1, -1]]),
                GeneratorSpec::integral("b", &[vec![-1, 1], vec![0, 1]]),
            ],
            16,
            CAP,
        )
        .unwrap()
    }

    fn fix3() -> (Representation, StableLattice) {
        let ctx = make_ring(2, 16, Flavor::PAdic).unwrap();
        load_representation(
            ctx,
            &[
                GeneratorSpec::integral("a", &[vec![-1, 1, 0], vec![0, 1, 0], vec![0, 0, 1]]),
                GeneratorSpec::integral("b", &[vec![0, 0, -1], vec![1, 0, -1], vec![0, 1, -1]]),
            ],
            16,
            CAP,
        )
        .unwrap()
    }

    /// Deeply congruent single-generator representation: the complex is a
    /// branching tree with semisimple middle reductions.
    fn deep(flavor: Flavor) -> (Representation, StableLattice) {
        let ctx = make_ring(3, 16, flavor).unwrap();
        use crate::lattice::EntrySpec;
        let pi3 = match flavor {
            Flavor::PAdic => EntrySpec::Int(27),
            Flavor::PowerSeries => EntrySpec::Digits(vec![0, 0, 0, 1]),
        };
        let spec = GeneratorSpec {
            label: "g".to_string(),
            rows: vec![
                vec![EntrySpec::Int(1), EntrySpec::Int(1)],
                vec![pi3, EntrySpec::Int(1)],
            ],
            shift: 0,
        };
        load_representation(ctx, &[spec], 16, CAP).unwrap()
    }

    #[test]
    fn fix1_complex_matches_bruteforce() {
        let (rep, base) = fix1();
        let x = analyze(&rep, &base);
        assert_eq!(x.vertices.len(), 2);
        assert_eq!(x.edges.len(), 1);
        assert_eq!(x.dimension, 1);
        assert!(x.vertices.iter().all(|v| v.is_maximal && v.is_extremal));

        // oracle: enumerate every sublattice π²Λ₀ ⊆ Λ ⊆ π⁻²Λ₀ via
        // triangular bases and keep the stable ones
        let ctx = rep.ctx();
        let mut keys = std::collections::BTreeSet::new();
        for a in 0..=4u32 {
            for b in 0..=4u32 {
                let pa = 3i64.pow(a);
                let pb = 3i64.pow(b);
                for c in 0..3i64.pow(b) {
                    let h = DVRMatrix::from_int_rows(ctx, &[vec![pa, 0], vec![c, pb]]);
                    if let Ok(lat) = rep.lattice_from_span(&h, 0) {
                        keys.insert(lat.key(ctx));
                    }
                }
            }
        }
        let bfs: std::collections::BTreeSet<_> =
            x.vertices.iter().map(|v| v.key.clone()).collect();
        assert_eq!(keys, bfs);
    }

    #[test]
    fn fix2_single_vertex() {
        let (rep, base) = fix2();
        let x = analyze(&rep, &base);
        assert_eq!(x.vertices.len(), 1);
        assert!(x.edges.is_empty());
        assert_eq!(x.dimension, 0);
        assert!(x.vertices[0].is_maximal);
    }

    #[test]
    fn fix3_path_with_two_maximal_ends() {
        let (rep, base) = fix3();
        let x = analyze(&rep, &base);
        assert_eq!(x.dimension, 1);
        assert_eq!(x.vertices.len(), 3);
        assert_eq!(x.edges.len(), 2);
        assert_eq!(x.maximal_indices().len(), 2);
        assert!(x.extremal_indices().len() >= 2);
    }

    #[test]
    fn deep_tree_has_branching_middles() {
        for flavor in [Flavor::PAdic, Flavor::PowerSeries] {
            let (rep, base) = deep(flavor);
            let x = analyze(&rep, &base);
            assert_eq!(x.vertices.len(), 8, "{flavor:?}");
            assert_eq!(x.dimension, 1);
            assert_eq!(x.maximal_indices().len(), 6);
            // middle vertices have semisimple non-simple reductions:
            // neither maximal nor extremal
            let middles: Vec<_> = x
                .vertices
                .iter()
                .filter(|v| !v.is_maximal)
                .collect();
            assert_eq!(middles.len(), 2);
            for v in middles {
                assert!(!v.is_extremal);
                assert_eq!(v.socle.dim(), 2); // socle = everything
            }
            assert_eq!(x.edges.len(), 7); // a tree on 8 vertices
        }
    }

    #[test]
    fn maximal_simplices_match_the_dimension() {
        // FIX1: one edge
        let (rep, base) = fix1();
        let x = analyze(&rep, &base);
        assert_eq!(maximal_simplices(&x), vec![vec![0, 1]]);

        // totally ramified cubic: a single 2-simplex
        let ctx = make_ring(3, 16, Flavor::PAdic).unwrap();
        let (rep, base) = load_representation(
            ctx,
            &[GeneratorSpec::integral(
                "g",
                &[vec![0, 0, 1], vec![1, 0, 3], vec![0, 1, 0]],
            )],
            16,
            CAP,
        )
        .unwrap();
        let x = analyze(&rep, &base);
        assert_eq!(x.dimension, 2);
        assert_eq!(maximal_simplices(&x), vec![vec![0, 1, 2]]);

        // deep branching tree: 7 edges, no triangles
        let (rep, base) = deep(Flavor::PAdic);
        let x = analyze(&rep, &base);
        let faces = maximal_simplices(&x);
        assert_eq!(faces.len(), 7);
        assert!(faces.iter().all(|f| f.len() == 2));
        // third independent route to the dimension: largest clique − 1
        for (rep, base) in [fix1(), fix2(), fix3()] {
            let x = analyze(&rep, &base);
            let faces = maximal_simplices(&x);
            let clique_dim = faces.iter().map(|f| f.len()).max().unwrap_or(1) - 1;
            assert_eq!(clique_dim, x.dimension);
        }
    }

    #[test]
    fn bfs_is_start_insensitive() {
        let (rep, base) = fix1();
        let x = analyze(&rep, &base);
        let other = &x.vertices[(x.base + 1) % x.vertices.len()].lattice;
        let y = enumerate_complex(&rep, other).unwrap();
        let xs: Vec<_> = x.vertices.iter().map(|v| v.key.clone()).collect();
        let ys: Vec<_> = y.vertices.iter().map(|v| v.key.clone()).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn tropical_hull_fix1() {
        let (rep, base) = fix1();
        let x = analyze(&rep, &base);
        let report = tropical_hull_verify(&rep, &x).unwrap();
        assert!(report.reconstruction_ok);
        assert!(report.minimality_ok);
        // a maximal vertex reconstructs from itself alone
        for &mi in &x.maximal_indices() {
            let w = report.witnesses.iter().find(|(k, _)| k == &x.vertices[mi].key).unwrap();
            assert_eq!(w.1.len(), 1);
            assert_eq!(w.1[0], x.vertices[mi].key);
        }
    }

    #[test]
    fn tropical_hull_middle_vertex_needs_two_leaves() {
        let (rep, base) = deep(Flavor::PAdic);
        let x = analyze(&rep, &base);
        let report = tropical_hull_verify(&rep, &x).unwrap();
        assert!(report.reconstruction_ok);
        for v in x.vertices.iter().filter(|v| !v.is_maximal) {
            let w = report.witnesses.iter().find(|(k, _)| k == &v.key).unwrap();
            assert!(w.1.len() >= 2, "non-maximal vertex needs several leaves");
        }
    }

    #[test]
    fn tropical_hull_deep_tree() {
        let (rep, base) = deep(Flavor::PAdic);
        let x = analyze(&rep, &base);
        let report = tropical_hull_verify(&rep, &x).unwrap();
        assert!(report.reconstruction_ok);
        assert!(report.minimality_ok);
    }

    #[test]
    fn count_bounds_on_fixtures() {
        for (rep, base) in [fix1(), fix2(), fix3(), deep(Flavor::PAdic)] {
            let x = analyze(&rep, &base);
            let n_max = x.maximal_indices().len();
            let n_ext = x.extremal_indices().len();
            assert!(n_max >= 1 + x.dimension);
            assert!(n_ext >= n_max);
            for v in &x.vertices {
                assert!(v.sharp_count >= v.length);
            }
        }
    }
}
