//! Modules over the group algebra with coefficients in the residue field
//! `F_p`: submodule lattices, socle theory, composition factors,
//! indecomposability, and non-split extension witnesses.
//!
//! Submodule enumeration is certified complete at desk scale: every
//! nonzero vector is spun and the results are closed under pairwise sums,
//! guarded by a hard cap on `p^dim`. The radical of the acting algebra is
//! computed as the annihilator of the composition factors, which is exact
//! in any characteristic.

use crate::error::{Error, Result};
use crate::ring::ResidueMatrix;

/// A finite-dimensional representation over `F_p`, given by one invertible
/// action matrix per group generator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpGModule {
    p: u64,
    dim: usize,
    gens: Vec<ResidueMatrix>,
    labels: Vec<String>,
}

impl FpGModule {
    pub fn new(p: u64, gens: Vec<ResidueMatrix>, labels: Vec<String>) -> Result<Self> {
        assert_eq!(gens.len(), labels.len());
        let dim = gens.first().map_or(0, |g| g.rows());
        for (g, l) in gens.iter().zip(&labels) {
            if g.rows() != dim || g.cols() != dim {
                return Err(Error::Internal(format!("generator {l} has wrong shape")));
            }
            if dim > 0 && !g.is_invertible() {
                return Err(Error::NonInvertibleGenerator(l.clone()));
            }
        }
        Ok(FpGModule { p, dim, gens, labels })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gens(&self) -> &[ResidueMatrix] {
        &self.gens
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn act(&self, g: usize, v: &[u64]) -> Vec<u64> {
        self.gens[g].mul_vec(v)
    }

    /// Direct sum with matching generator labels.
    pub fn direct_sum(&self, other: &FpGModule) -> FpGModule {
        assert_eq!(self.labels, other.labels);
        let d = self.dim + other.dim;
        let gens = self
            .gens
            .iter()
            .zip(&other.gens)
            .map(|(a, b)| {
                let mut m = ResidueMatrix::zero(self.p, d, d);
                for i in 0..a.rows() {
                    for j in 0..a.cols() {
                        m.set(i, j, a.at(i, j));
                    }
                }
                for i in 0..b.rows() {
                    for j in 0..b.cols() {
                        m.set(self.dim + i, self.dim + j, b.at(i, j));
                    }
                }
                m
            })
            .collect();
        FpGModule { p: self.p, dim: d, gens, labels: self.labels.clone() }
    }

    /// Conjugate module `T g T^{-1}` for an invertible `T`.
    pub fn conjugate(&self, t: &ResidueMatrix) -> FpGModule {
        let tinv = t.inverse().expect("conjugator must be invertible");
        let gens = self.gens.iter().map(|g| t.mul(g).mul(&tinv)).collect();
        FpGModule { p: self.p, dim: self.dim, gens, labels: self.labels.clone() }
    }

    /// Contragredient module: generators become inverse transposes.
    pub fn dual(&self) -> FpGModule {
        let gens = self
            .gens
            .iter()
            .map(|g| g.inverse().expect("generators are invertible").transpose())
            .collect();
        FpGModule { p: self.p, dim: self.dim, gens, labels: self.labels.clone() }
    }
}

/// A submodule, held as a canonical reduced-echelon row basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Submodule {
    parent_dim: usize,
    basis: ResidueMatrix,
}

impl Submodule {
    pub fn zero(p: u64, parent_dim: usize) -> Self {
        Submodule { parent_dim, basis: ResidueMatrix::zero(p, 0, parent_dim) }
    }

    pub fn full(p: u64, parent_dim: usize) -> Self {
        Submodule { parent_dim, basis: ResidueMatrix::identity(p, parent_dim) }
    }

    pub fn from_rows(p: u64, parent_dim: usize, rows: Vec<Vec<u64>>) -> Self {
        let m = ResidueMatrix::from_vec_rows(p, rows);
        let basis = if m.rows() == 0 {
            ResidueMatrix::zero(p, 0, parent_dim)
        } else {
            m.row_space_basis()
        };
        Submodule { parent_dim, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn parent_dim(&self) -> usize {
        self.parent_dim
    }

    pub fn basis(&self) -> &ResidueMatrix {
        &self.basis
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.parent_dim
    }

    /// Deterministic ordering key: dimension, then flattened basis entries.
    pub fn key(&self) -> (usize, Vec<u64>) {
        (self.dim(), self.basis.entries().to_vec())
    }

    /// Pivot columns of the echelon basis.
    fn pivots(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.dim());
        for i in 0..self.dim() {
            let j = (0..self.parent_dim)
                .find(|&j| self.basis.at(i, j) != 0)
                .expect("echelon basis has no zero rows");
            out.push(j);
        }
        out
    }

    /// Canonical representative of `v` modulo this subspace: pivot
    /// coordinates are cleared.
    pub fn reduce_vec(&self, v: &[u64]) -> Vec<u64> {
        let p = self.basis.p();
        let mut w = v.to_vec();
        for (i, pc) in self.pivots().into_iter().enumerate() {
            let f = w[pc];
            if f != 0 {
                for j in 0..self.parent_dim {
                    w[j] = (w[j] + (p - f) * self.basis.at(i, j)) % p;
                }
            }
        }
        w
    }

    pub fn contains_vec(&self, v: &[u64]) -> bool {
        self.reduce_vec(v).iter().all(|&x| x == 0)
    }

    pub fn contains(&self, other: &Submodule) -> bool {
        (0..other.dim()).all(|i| self.contains_vec(&other.basis.row(i)))
    }

    /// Coefficients of `v` in the echelon basis, or `None`.
    pub fn coords_of(&self, v: &[u64]) -> Option<Vec<u64>> {
        if !self.contains_vec(v) {
            return None;
        }
        Some(self.pivots().iter().map(|&pc| v[pc]).collect())
    }

    pub fn sum(&self, other: &Submodule) -> Submodule {
        assert_eq!(self.parent_dim, other.parent_dim);
        let mut rows = Vec::new();
        for i in 0..self.dim() {
            rows.push(self.basis.row(i));
        }
        for i in 0..other.dim() {
            rows.push(other.basis.row(i));
        }
        Submodule::from_rows(self.basis.p(), self.parent_dim, rows)
    }

    pub fn intersect(&self, other: &Submodule) -> Submodule {
        assert_eq!(self.parent_dim, other.parent_dim);
        let p = self.basis.p();
        let (a, b) = (self.dim(), other.dim());
        if a == 0 || b == 0 {
            return Submodule::zero(p, self.parent_dim);
        }
        // kernel of [A^T | -B^T] yields pairs (u, v) with u·A = v·B
        let mut m = ResidueMatrix::zero(p, self.parent_dim, a + b);
        for j in 0..a {
            for i in 0..self.parent_dim {
                m.set(i, j, self.basis.at(j, i));
            }
        }
        for j in 0..b {
            for i in 0..self.parent_dim {
                m.set(i, a + j, (p - other.basis.at(j, i)) % p);
            }
        }
        let ker = m.kernel_basis();
        let mut rows = Vec::new();
        for r in 0..ker.rows() {
            let mut v = vec![0u64; self.parent_dim];
            for j in 0..a {
                let c = ker.at(r, j);
                for i in 0..self.parent_dim {
                    v[i] = (v[i] + c * self.basis.at(j, i)) % p;
                }
            }
            rows.push(v);
        }
        Submodule::from_rows(p, self.parent_dim, rows)
    }
}

pub(crate) fn pow_within(p: u64, dim: usize, cap: u64) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..dim {
        acc = acc.checked_mul(p)?;
        if acc > cap {
            return None;
        }
    }
    Some(acc)
}

fn check_cap(p: u64, dim: usize, cap: u64, what: &str) -> Result<u64> {
    pow_within(p, dim, cap).ok_or_else(|| {
        Error::CapExceeded(format!("{what}: p^dim = {p}^{dim} exceeds cap {cap}"))
    })
}

fn index_to_vec(mut idx: u64, p: u64, dim: usize) -> Vec<u64> {
    let mut v = Vec::with_capacity(dim);
    for _ in 0..dim {
        v.push(idx % p);
        idx /= p;
    }
    v
}

/// Smallest submodule containing the given vectors, with echelon basis.
pub fn spin(m: &FpGModule, vectors: &[Vec<u64>]) -> Submodule {
    let p = m.p;
    let mut current = Submodule::from_rows(p, m.dim, vectors.to_vec());
    loop {
        let mut rows: Vec<Vec<u64>> = (0..current.dim()).map(|i| current.basis.row(i)).collect();
        for g in &m.gens {
            for i in 0..current.dim() {
                rows.push(g.mul_vec(&current.basis.row(i)));
            }
        }
        let next = Submodule::from_rows(p, m.dim, rows);
        if next.dim() == current.dim() {
            return next;
        }
        current = next;
    }
}

/// Complete, duplicate-free, canonically ordered list of submodules,
/// including `0` and the full module. Spins every nonzero vector, then
/// closes under pairwise sums.
pub fn all_submodules(m: &FpGModule, cap: u64) -> Result<Vec<Submodule>> {
    let total = check_cap(m.p, m.dim, cap, "submodule enumeration")?;
    let mut set = std::collections::BTreeMap::new();
    let zero = Submodule::zero(m.p, m.dim);
    set.insert(zero.key(), zero);
    for idx in 1..total {
        let s = spin(m, &[index_to_vec(idx, m.p, m.dim)]);
        set.insert(s.key(), s);
    }
    loop {
        let items: Vec<Submodule> = set.values().cloned().collect();
        let before = set.len();
        for i in 0..items.len() {
            for j in i + 1..items.len() {
                let s = items[i].sum(&items[j]);
                set.entry(s.key()).or_insert(s);
            }
        }
        if set.len() == before {
            break;
        }
    }
    let full = Submodule::full(m.p, m.dim);
    set.insert(full.key(), full);
    Ok(set.into_values().collect())
}

/// The canonically-least minimal (simple) nonzero submodule, by spinning
/// every nonzero vector. `None` for the zero module.
pub fn minimal_submodule(m: &FpGModule, cap: u64) -> Result<Option<Submodule>> {
    if m.dim == 0 {
        return Ok(None);
    }
    let total = check_cap(m.p, m.dim, cap, "minimal submodule search")?;
    let mut best: Option<Submodule> = None;
    for idx in 1..total {
        let s = spin(m, &[index_to_vec(idx, m.p, m.dim)]);
        if best.as_ref().is_none_or(|b| s.key() < b.key()) {
            best = Some(s);
        }
    }
    Ok(best)
}

/// All minimal nonzero submodules, canonically ordered.
pub fn minimal_submodules(m: &FpGModule, cap: u64) -> Result<Vec<Submodule>> {
    if m.dim == 0 {
        return Ok(vec![]);
    }
    let total = check_cap(m.p, m.dim, cap, "minimal submodule search")?;
    let mut set = std::collections::BTreeMap::new();
    for idx in 1..total {
        let s = spin(m, &[index_to_vec(idx, m.p, m.dim)]);
        set.insert(s.key(), s);
    }
    let cyclics: Vec<Submodule> = set.into_values().collect();
    let minimal: Vec<Submodule> = cyclics
        .iter()
        .filter(|s| !cyclics.iter().any(|t| t.dim() > 0 && t.dim() < s.dim() && s.contains(t)))
        .cloned()
        .collect();
    Ok(minimal)
}

/// The module structure carried by a submodule, in its echelon basis.
pub fn submodule_module(m: &FpGModule, v: &Submodule) -> FpGModule {
    let r = v.dim();
    let p = m.p;
    let gens = m
        .gens
        .iter()
        .map(|g| {
            let mut act = ResidueMatrix::zero(p, r, r);
            for i in 0..r {
                let w = g.mul_vec(&v.basis.row(i));
                let c = v
                    .coords_of(&w)
                    .expect("submodule must be closed under the action");
                for k in 0..r {
                    act.set(k, i, c[k]);
                }
            }
            act
        })
        .collect();
    FpGModule { p, dim: r, gens, labels: m.labels.clone() }
}

/// Quotient `M/V` together with the projection data.
pub struct QuotientMap {
    sub: Submodule,
    complement: Vec<usize>,
}

impl QuotientMap {
    /// Coordinates of `v + V` in the canonical complement basis.
    pub fn project(&self, v: &[u64]) -> Vec<u64> {
        let w = self.sub.reduce_vec(v);
        self.complement.iter().map(|&j| w[j]).collect()
    }

    /// Canonical lift of a quotient vector.
    pub fn lift(&self, w: &[u64]) -> Vec<u64> {
        let mut v = vec![0u64; self.sub.parent_dim];
        for (k, &j) in self.complement.iter().enumerate() {
            v[j] = w[k];
        }
        v
    }

    /// Preimage in `M` of a submodule of the quotient.
    pub fn pull_back(&self, s: &Submodule) -> Submodule {
        let p = self.sub.basis.p();
        let mut rows: Vec<Vec<u64>> = (0..s.dim()).map(|i| self.lift(&s.basis.row(i))).collect();
        for i in 0..self.sub.dim() {
            rows.push(self.sub.basis.row(i));
        }
        Submodule::from_rows(p, self.sub.parent_dim, rows)
    }

    /// Image in the quotient of a submodule of `M`.
    pub fn push_forward(&self, s: &Submodule) -> Submodule {
        let p = self.sub.basis.p();
        let rows: Vec<Vec<u64>> = (0..s.dim()).map(|i| self.project(&s.basis.row(i))).collect();
        Submodule::from_rows(p, self.complement.len(), rows)
    }
}

pub fn quotient_module(m: &FpGModule, v: &Submodule) -> (FpGModule, QuotientMap) {
    let pivots = v.pivots();
    let complement: Vec<usize> = (0..m.dim).filter(|j| !pivots.contains(j)).collect();
    let qmap = QuotientMap { sub: v.clone(), complement };
    let qd = qmap.complement.len();
    let gens = m
        .gens
        .iter()
        .map(|g| {
            let mut act = ResidueMatrix::zero(m.p, qd, qd);
            for (i, &j) in qmap.complement.iter().enumerate() {
                let mut e = vec![0u64; m.dim];
                e[j] = 1;
                let w = qmap.project(&g.mul_vec(&e));
                for k in 0..qd {
                    act.set(k, i, w[k]);
                }
            }
            act
        })
        .collect();
    let q = FpGModule { p: m.p, dim: qd, gens, labels: m.labels.clone() };
    (q, qmap)
}

/// A strictly increasing chain `0 = V_0 ⊊ … ⊊ V_c = M` with simple steps,
/// built by repeatedly adjoining the canonically-least minimal submodule
/// of the quotient.
pub fn composition_chain(m: &FpGModule, cap: u64) -> Result<Vec<Submodule>> {
    let mut chain = vec![Submodule::zero(m.p, m.dim)];
    loop {
        let v = chain.last().unwrap();
        if v.is_full() {
            return Ok(chain);
        }
        let (q, qmap) = quotient_module(m, v);
        let s = minimal_submodule(&q, cap)?.expect("quotient is nonzero");
        chain.push(qmap.pull_back(&s));
    }
}

/// Length of the module (number of composition factors).
pub fn module_length(m: &FpGModule, cap: u64) -> Result<usize> {
    Ok(composition_chain(m, cap)?.len() - 1)
}

/// The composition factors as modules, in chain order.
pub fn composition_factor_modules(m: &FpGModule, cap: u64) -> Result<Vec<FpGModule>> {
    let chain = composition_chain(m, cap)?;
    let mut out = Vec::new();
    for w in chain.windows(2) {
        let (q, qmap) = quotient_module(m, &w[0]);
        let s = qmap.push_forward(&w[1]);
        out.push(submodule_module(&q, &s));
    }
    Ok(out)
}

/// Jordan–Hölder factors grouped by isomorphism, in first-occurrence
/// order: `[(representative, multiplicity)]`.
pub fn composition_factors(m: &FpGModule, cap: u64) -> Result<Vec<(FpGModule, usize)>> {
    let factors = composition_factor_modules(m, cap)?;
    let mut grouped: Vec<(FpGModule, usize)> = Vec::new();
    for f in factors {
        let mut placed = false;
        for (rep, mult) in grouped.iter_mut() {
            if is_isomorphic(rep, &f, cap)?.is_some() {
                *mult += 1;
                placed = true;
                break;
            }
        }
        if !placed {
            grouped.push((f, 1));
        }
    }
    Ok(grouped)
}

/// Basis of the image of the group algebra inside `End(M)`, spun from the
/// identity by left multiplication with the generators.
pub fn algebra_basis(m: &FpGModule) -> Vec<ResidueMatrix> {
    let d = m.dim;
    if d == 0 {
        return vec![];
    }
    let p = m.p;
    let flat = |x: &ResidueMatrix| -> Vec<u64> { x.entries().to_vec() };
    let mut mats = vec![ResidueMatrix::identity(p, d)];
    let mut span = ResidueMatrix::from_vec_rows(p, vec![flat(&mats[0])]).row_space_basis();
    let mut cursor = 0usize;
    while cursor < mats.len() {
        let base = mats[cursor].clone();
        cursor += 1;
        for g in &m.gens {
            let cand = g.mul(&base);
            let mut test_rows: Vec<Vec<u64>> = (0..span.rows()).map(|r| span.row(r)).collect();
            test_rows.push(flat(&cand));
            let test = ResidueMatrix::from_vec_rows(p, test_rows).row_space_basis();
            if test.rows() > span.rows() {
                span = test;
                mats.push(cand);
            }
        }
    }
    mats
}

/// Basis of `rad(A)`, the largest nilpotent ideal of the acting algebra:
/// the elements sending each composition-chain step `V_k` into `V_{k-1}`.
pub fn algebra_radical(m: &FpGModule, cap: u64) -> Result<Vec<ResidueMatrix>> {
    let basis = algebra_basis(m);
    if basis.is_empty() {
        return Ok(vec![]);
    }
    let chain = composition_chain(m, cap)?;
    let p = m.p;
    let t = basis.len();
    // linear conditions on the coefficients over the algebra basis
    let mut rows: Vec<Vec<u64>> = Vec::new();
    for w in chain.windows(2) {
        let (lower, upper) = (&w[0], &w[1]);
        let (_, qmap) = quotient_module(m, lower);
        for i in 0..upper.dim() {
            let v = upper.basis.row(i);
            let qd = qmap.complement.len();
            for coord in 0..qd {
                let mut row = Vec::with_capacity(t);
                for b in &basis {
                    row.push(qmap.project(&b.mul_vec(&v))[coord]);
                }
                rows.push(row);
            }
        }
    }
    let cond = ResidueMatrix::from_vec_rows(p, rows);
    let ker = cond.kernel_basis();
    let mut out = Vec::new();
    for r in 0..ker.rows() {
        let mut mat = ResidueMatrix::zero(p, m.dim, m.dim);
        for (tidx, b) in basis.iter().enumerate() {
            let c = ker.at(r, tidx);
            if c == 0 {
                continue;
            }
            for i in 0..m.dim {
                for j in 0..m.dim {
                    mat.set(i, j, (mat.at(i, j) + c * b.at(i, j)) % p);
                }
            }
        }
        out.push(mat);
    }
    Ok(out)
}

/// The socle: the largest semisimple submodule, computed as the
/// annihilator of `rad(A)` in `M`.
pub fn socle(m: &FpGModule, cap: u64) -> Result<Submodule> {
    let rad = algebra_radical(m, cap)?;
    if rad.is_empty() {
        return Ok(Submodule::full(m.p, m.dim));
    }
    let mut stacked = ResidueMatrix::zero(m.p, rad.len() * m.dim, m.dim);
    for (k, r) in rad.iter().enumerate() {
        for i in 0..m.dim {
            for j in 0..m.dim {
                stacked.set(k * m.dim + i, j, r.at(i, j));
            }
        }
    }
    let ker = stacked.kernel_basis();
    let rows: Vec<Vec<u64>> = (0..ker.rows()).map(|i| ker.row(i)).collect();
    Ok(Submodule::from_rows(m.p, m.dim, rows))
}

/// The radical submodule `rad(A)·M`; the cosocle is `M` modulo this.
pub fn radical_submodule(m: &FpGModule, cap: u64) -> Result<Submodule> {
    let rad = algebra_radical(m, cap)?;
    let mut rows = Vec::new();
    for r in &rad {
        for j in 0..m.dim {
            let mut e = vec![0u64; m.dim];
            e[j] = 1;
            rows.push(r.mul_vec(&e));
        }
    }
    Ok(Submodule::from_rows(m.p, m.dim, rows))
}

pub fn is_semisimple(m: &FpGModule, cap: u64) -> Result<bool> {
    Ok(socle(m, cap)?.is_full())
}

pub fn is_irreducible(m: &FpGModule, cap: u64) -> Result<bool> {
    if m.dim == 0 {
        return Ok(false);
    }
    let total = check_cap(m.p, m.dim, cap, "irreducibility check")?;
    for idx in 1..total {
        if !spin(m, &[index_to_vec(idx, m.p, m.dim)]).is_full() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Ascending socle filtration `soc¹ ⊊ soc² ⊊ … = M` (empty for `M = 0`).
pub fn socle_filtration(m: &FpGModule, cap: u64) -> Result<Vec<Submodule>> {
    let mut layers: Vec<Submodule> = Vec::new();
    if m.dim == 0 {
        return Ok(layers);
    }
    let mut current = Submodule::zero(m.p, m.dim);
    loop {
        let (q, qmap) = quotient_module(m, &current);
        let s = socle(&q, cap)?;
        if s.is_zero() {
            return Err(Error::Internal("socle filtration stalled".to_string()));
        }
        current = qmap.pull_back(&s);
        layers.push(current.clone());
        if current.is_full() {
            return Ok(layers);
        }
    }
}

/// Basis of the space of intertwiners `T` with `T·g = g'·T` for every
/// generator pair.
pub fn hom_basis(m1: &FpGModule, m2: &FpGModule) -> Vec<ResidueMatrix> {
    assert_eq!(m1.gens.len(), m2.gens.len());
    let p = m1.p;
    let (d1, d2) = (m1.dim, m2.dim);
    if d1 == 0 || d2 == 0 {
        return vec![];
    }
    // unknowns T[r][c], r < d2, c < d1, flattened as r*d1 + c
    let mut rows = Vec::new();
    for (g1, g2) in m1.gens.iter().zip(&m2.gens) {
        for i in 0..d2 {
            for j in 0..d1 {
                let mut row = vec![0u64; d1 * d2];
                // (T·g1)[i][j] = Σ_a T[i][a]·g1[a][j]
                for a in 0..d1 {
                    row[i * d1 + a] = (row[i * d1 + a] + g1.at(a, j)) % p;
                }
                // -(g2·T)[i][j] = -Σ_a g2[i][a]·T[a][j]
                for a in 0..d2 {
                    row[a * d1 + j] = (row[a * d1 + j] + p - g2.at(i, a) % p) % p;
                }
                rows.push(row);
            }
        }
    }
    let ker = ResidueMatrix::from_vec_rows(p, rows).kernel_basis();
    (0..ker.rows())
        .map(|r| {
            let mut t = ResidueMatrix::zero(p, d2, d1);
            for i in 0..d2 {
                for j in 0..d1 {
                    t.set(i, j, ker.at(r, i * d1 + j));
                }
            }
            t
        })
        .collect()
}

const HOM_ENUM_CAP: u64 = 1 << 16;

/// An invertible intertwiner `M1 → M2`, or `None`. The Hom-space is
/// enumerated exhaustively, so a `None` is certified.
pub fn is_isomorphic(m1: &FpGModule, m2: &FpGModule, _cap: u64) -> Result<Option<ResidueMatrix>> {
    if m1.dim != m2.dim {
        return Ok(None);
    }
    if m1.dim == 0 {
        return Ok(Some(ResidueMatrix::zero(m1.p, 0, 0)));
    }
    let hom = hom_basis(m1, m2);
    if hom.is_empty() {
        return Ok(None);
    }
    let total = check_cap(m1.p, hom.len(), HOM_ENUM_CAP, "Hom-space enumeration")?;
    let p = m1.p;
    for idx in 1..total {
        let coef = index_to_vec(idx, p, hom.len());
        let mut t = ResidueMatrix::zero(p, m1.dim, m1.dim);
        for (k, b) in hom.iter().enumerate() {
            if coef[k] == 0 {
                continue;
            }
            for i in 0..m1.dim {
                for j in 0..m1.dim {
                    t.set(i, j, (t.at(i, j) + coef[k] * b.at(i, j)) % p);
                }
            }
        }
        if t.is_invertible() {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// True iff the equivariant endomorphism ring contains no idempotent
/// other than `0` and `1`; the ring is enumerated exhaustively.
pub fn is_indecomposable(m: &FpGModule, cap: u64) -> Result<bool> {
    if m.dim == 0 {
        return Ok(false);
    }
    let end = hom_basis(m, m);
    if end.len() == 1 {
        return Ok(true); // End = F_p·1 has no nontrivial idempotents
    }
    let total = check_cap(m.p, end.len(), cap.min(HOM_ENUM_CAP), "endomorphism enumeration")?;
    let p = m.p;
    let id = ResidueMatrix::identity(p, m.dim);
    for idx in 1..total {
        let coef = index_to_vec(idx, p, end.len());
        let mut t = ResidueMatrix::zero(p, m.dim, m.dim);
        for (k, b) in end.iter().enumerate() {
            if coef[k] == 0 {
                continue;
            }
            for i in 0..m.dim {
                for j in 0..m.dim {
                    t.set(i, j, (t.at(i, j) + coef[k] * b.at(i, j)) % p);
                }
            }
        }
        if t == id || t.is_zero() {
            continue;
        }
        if t.mul(&t) == t {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A submodule containing `v1`, not containing `v2`, maximal among such;
/// canonical first on ties.
pub fn maximal_submodule_avoiding(
    m: &FpGModule,
    v1: &Submodule,
    v2: &Submodule,
    cap: u64,
) -> Result<Submodule> {
    assert!(v2.contains(v1) && v2.dim() > v1.dim(), "need V1 ⊊ V2");
    let all = all_submodules(m, cap)?;
    let candidates: Vec<&Submodule> =
        all.iter().filter(|w| w.contains(v1) && !w.contains(v2)).collect();
    let maximal: Vec<&Submodule> = candidates
        .iter()
        .filter(|w| !candidates.iter().any(|x| x.dim() > w.dim() && x.contains(w)))
        .copied()
        .collect();
    maximal
        .into_iter()
        .min_by_key(|w| w.key())
        .cloned()
        .ok_or_else(|| Error::Internal("no avoiding submodule found".to_string()))
}

/// Simple direct summands of a semisimple submodule `s ⊆ M`, greedy in
/// canonical order.
pub fn decompose_semisimple(m: &FpGModule, s: &Submodule, cap: u64) -> Result<Vec<Submodule>> {
    if s.is_zero() {
        return Ok(vec![]);
    }
    let sm = submodule_module(m, s);
    let minimal = minimal_submodules(&sm, cap)?;
    let p = m.p;
    let mut chosen: Vec<Submodule> = Vec::new();
    let mut acc = Submodule::zero(p, sm.dim());
    for cand in &minimal {
        if acc.dim() + cand.dim() == acc.sum(cand).dim() {
            acc = acc.sum(cand);
            chosen.push(cand.clone());
        }
        if acc.is_full() {
            break;
        }
    }
    if !acc.is_full() {
        return Err(Error::Internal("submodule is not semisimple".to_string()));
    }
    // convert back to coordinates of M
    let out = chosen
        .iter()
        .map(|c| {
            let rows: Vec<Vec<u64>> = (0..c.dim())
                .map(|i| {
                    let coef = c.basis().row(i);
                    let mut v = vec![0u64; m.dim];
                    for (k, &ck) in coef.iter().enumerate() {
                        for j in 0..m.dim {
                            v[j] = (v[j] + ck * s.basis.at(k, j)) % p;
                        }
                    }
                    v
                })
                .collect();
            Submodule::from_rows(p, m.dim, rows)
        })
        .collect();
    Ok(out)
}

/// Witness of a non-split extension between consecutive socle layers.
pub struct NonsplitWitness {
    pub v1: Submodule,
    pub v2: Submodule,
    /// The socle factor `U` (at layer `level − 1`).
    pub sub_factor: FpGModule,
    /// The top factor `W` (at layer `level`).
    pub top_factor: FpGModule,
}

/// For a simple `W` in socle layer `level ≥ 2`, produce `V1 ⊆ V2` with
/// `V2/V1` a non-split extension of `W` by a simple `U` from layer
/// `level − 1`, so that `soc(V2/V1) ≅ U`. The target `W` may be pinned by
/// isomorphism class; otherwise the canonically first choice is taken.
pub fn nonsplit_witness(
    m: &FpGModule,
    level: usize,
    target: Option<&FpGModule>,
    cap: u64,
) -> Result<NonsplitWitness> {
    let filt = socle_filtration(m, cap)?;
    if level < 2 || level > filt.len() {
        return Err(Error::LevelOutOfRange(level));
    }
    let below = if level == 2 {
        Submodule::zero(m.p, m.dim)
    } else {
        filt[level - 3].clone()
    };
    let (q, qmap) = quotient_module(m, &below);
    let soc_q = socle(&q, cap)?;
    let (qq, qqmap) = quotient_module(&q, &soc_q);
    let layer2 = socle(&qq, cap)?; // layer `level`, inside q/soc(q)
    let summands = decompose_semisimple(&qq, &layer2, cap)?;
    let mut picked: Option<(Submodule, FpGModule)> = None;
    for s in &summands {
        let smod = submodule_module(&qq, s);
        let ok = match target {
            Some(t) => is_isomorphic(&smod, t, cap)?.is_some(),
            None => true,
        };
        if ok {
            picked = Some((s.clone(), smod));
            break;
        }
    }
    let Some((wbar, wmod)) = picked else {
        return Err(Error::NotAFactor(format!("no matching simple in layer {level}")));
    };
    let v2_q = qqmap.pull_back(&wbar); // contains soc(q), quotient ≅ W
    // split the socle and pick a complement giving a non-split quotient
    let socle_summands = decompose_semisimple(&q, &soc_q, cap)?;
    for j in 0..socle_summands.len() {
        let mut others = Submodule::zero(m.p, q.dim());
        for (k, s) in socle_summands.iter().enumerate() {
            if k != j {
                others = others.sum(s);
            }
        }
        let v2_mod = submodule_module(&q, &v2_q);
        let others_in_v2 = Submodule::from_rows(
            m.p,
            v2_q.dim(),
            (0..others.dim())
                .map(|i| {
                    v2_q.coords_of(&others.basis.row(i))
                        .expect("socle complement sits inside V2")
                })
                .collect(),
        );
        let (e, _) = quotient_module(&v2_mod, &others_in_v2);
        if !is_semisimple(&e, cap)? {
            let u_mod = submodule_module(&q, &socle_summands[j]);
            return Ok(NonsplitWitness {
                v1: qmap.pull_back(&others),
                v2: qmap.pull_back(&v2_q),
                sub_factor: u_mod,
                top_factor: wmod,
            });
        }
    }
    Err(Error::Internal(
        "no non-split complement found in the socle layer".to_string(),
    ))
}

/// Cosocle of `M` as a module (largest semisimple quotient).
pub fn cosocle_module(m: &FpGModule, cap: u64) -> Result<FpGModule> {
    let rad = radical_submodule(m, cap)?;
    Ok(quotient_module(m, &rad).0)
}

/// Preimage of a subspace under a linear map: `{v : φ·v ∈ target}`,
/// computed as the kernel of `v ↦ (φ·v mod target)`.
pub fn kernel_of_composite(phi: &ResidueMatrix, target: &Submodule) -> Submodule {
    let p = phi.p();
    let n = phi.cols();
    let m = phi.rows();
    let mut mat = ResidueMatrix::zero(p, m, n);
    for j in 0..n {
        let mut e = vec![0u64; n];
        e[j] = 1;
        let w = target.reduce_vec(&phi.mul_vec(&e));
        for i in 0..m {
            mat.set(i, j, w[i]);
        }
    }
    let ker = mat.kernel_basis();
    Submodule::from_rows(p, n, (0..ker.rows()).map(|i| ker.row(i)).collect())
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn fix1_reduction() -> FpGModule {
        FpGModule::new(
            3,
            vec![
                ResidueMatrix::from_rows(3, &[vec![0, 2], vec![1, 2]]),
                ResidueMatrix::from_rows(3, &[vec![2, 1], vec![0, 1]]),
            ],
            vec!["a".to_string(), "b".to_string()],
        )
        .unwrap()
    }

    pub fn fix2_reduction() -> FpGModule {
        FpGModule::new(
            2,
            vec![
                ResidueMatrix::from_rows(2, &[vec![0, 1], vec![1, 1]]),
                ResidueMatrix::from_rows(2, &[vec![1, 1], vec![0, 1]]),
            ],
            vec!["a".to_string(), "b".to_string()],
        )
        .unwrap()
    }

    pub fn fix3_reduction() -> FpGModule {
        FpGModule::new(
            2,
            vec![
                ResidueMatrix::from_rows(2, &[vec![1, 1, 0], vec![0, 1, 0], vec![0, 0, 1]]),
                ResidueMatrix::from_rows(2, &[vec![0, 0, 1], vec![1, 0, 1], vec![0, 1, 1]]),
            ],
            vec!["a".to_string(), "b".to_string()],
        )
        .unwrap()
    }

    pub fn trivial_plus_sign() -> FpGModule {
        FpGModule::new(
            3,
            vec![
                ResidueMatrix::from_rows(3, &[vec![1, 0], vec![0, 1]]),
                ResidueMatrix::from_rows(3, &[vec![1, 0], vec![0, 2]]),
            ],
            vec!["a".to_string(), "b".to_string()],
        )
        .unwrap()
    }

    pub fn zero_module() -> FpGModule {
        FpGModule::new(
            3,
            vec![ResidueMatrix::zero(3, 0, 0), ResidueMatrix::zero(3, 0, 0)],
            vec!["a".to_string(), "b".to_string()],
        )
        .unwrap()
    }
}
