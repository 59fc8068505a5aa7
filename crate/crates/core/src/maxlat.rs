//! Maximal stable lattices: the maximality test (irreducible socle
//! generated by the vector's image), the ascent to a maximal lattice,
//! sharp subquotients with the lying-above construction, the map θ from
//! maximal vertices to sharp subquotients, and its constructive inverse.

use crate::error::{Error, Result};
use crate::lattice::{KVector, Representation, StableLattice};
use crate::modrep::{
    all_submodules, composition_chain, composition_factor_modules, is_isomorphic, is_irreducible,
    kernel_of_composite, minimal_submodules, socle, submodule_module, FpGModule, Submodule,
};
use crate::ring::{adjugate_times, ResidueMatrix};

/// A nested pair `(V1, V2)` of submodules of one reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subquotient {
    pub v1: Submodule,
    pub v2: Submodule,
}

impl Subquotient {
    pub fn key(&self) -> ((usize, Vec<u64>), (usize, Vec<u64>)) {
        (self.v1.key(), self.v2.key())
    }
}

/// A maximal lattice together with the vector it is maximal with
/// respect to.
#[derive(Clone, Debug)]
pub struct MaximalVertex {
    pub lattice: StableLattice,
    pub witness: KVector,
}

/// `(V1, V2)` is sharp when every submodule strictly containing `V1`
/// contains `V2`; equivalently the over-set of `V1` has the unique
/// minimal element `V2`.
pub fn is_sharp(m: &FpGModule, q: &Subquotient, cap: u64) -> Result<bool> {
    let all = all_submodules(m, cap)?;
    for w in &all {
        if w.contains(&q.v1) && w.dim() > q.v1.dim() && !w.contains(&q.v2) {
            return Ok(false);
        }
    }
    Ok(q.v2.contains(&q.v1) && q.v2.dim() > q.v1.dim())
}

/// All sharp subquotients, canonically ordered: the pairs `(V1, V2)`
/// where the submodules strictly containing `V1` have a unique minimal
/// element `V2` (which is then automatically an irreducible quotient).
pub fn sharp_subquotients(m: &FpGModule, cap: u64) -> Result<Vec<Subquotient>> {
    let all = all_submodules(m, cap)?;
    let mut out = Vec::new();
    for v1 in &all {
        let overs: Vec<&Submodule> = all
            .iter()
            .filter(|w| w.dim() > v1.dim() && w.contains(v1))
            .collect();
        let minimal: Vec<&Submodule> = overs
            .iter()
            .filter(|w| !overs.iter().any(|x| x.dim() < w.dim() && w.contains(x)))
            .copied()
            .collect();
        if minimal.len() == 1 {
            out.push(Subquotient { v1: v1.clone(), v2: minimal[0].clone() });
        }
    }
    Ok(out)
}

/// A sharp subquotient lying above an irreducible `(V1, V2)`:
/// `V1' = ` a maximal submodule containing `V1` avoiding `V2`, and
/// `V2' = V1' + V2`. Then `V2 ∩ V1' = V1` and `V2'/V1' ≅ V2/V1`.
pub fn sharp_above(m: &FpGModule, q: &Subquotient, cap: u64) -> Result<Subquotient> {
    let v1p = crate::modrep::maximal_submodule_avoiding(m, &q.v1, &q.v2, cap)?;
    let v2p = v1p.sum(&q.v2);
    Ok(Subquotient { v1: v1p, v2: v2p })
}

/// Socle of the reduction, with a flag for simplicity.
fn socle_data(m: &FpGModule, cap: u64) -> Result<(Submodule, bool)> {
    let s = socle(m, cap)?;
    if s.is_zero() {
        return Ok((s, false));
    }
    let simple = is_irreducible(&submodule_module(m, &s), cap)?;
    Ok((s, simple))
}

/// Maximality of `Λ` as a lattice (no vector): the socle of `Λ/πΛ` is
/// irreducible.
pub fn is_maximal_lattice(rep: &Representation, lat: &StableLattice, cap: u64) -> Result<bool> {
    let red = rep.reduce_mod_pi(lat)?;
    Ok(socle_data(&red, cap)?.1)
}

/// Maximality of `Λ` with respect to `v`: the socle of `Λ/πΛ` is
/// irreducible and generated by the image of `v`. Errors when `v`
/// reduces to zero (not normalised).
pub fn is_maximal_at(
    rep: &Representation,
    lat: &StableLattice,
    v: &KVector,
    cap: u64,
) -> Result<bool> {
    let res = rep
        .residue_coordinates(lat, v)?
        .ok_or(Error::NotNormalised)?;
    let red = rep.reduce_mod_pi(lat)?;
    let (soc, simple) = socle_data(&red, cap)?;
    Ok(simple && soc.contains_vec(&res))
}

/// Ascend from a lattice normalised at `v` to one maximal with respect
/// to `v`: while non-maximal, pick the canonically-first simple
/// submodule `S` of the socle avoiding the image of `v` and pass to
/// `π⁻¹·preimage(S)`. Returns the result and the ascent trace
/// (including the starting lattice).
pub fn ascend_to_maximal(
    rep: &Representation,
    lat: &StableLattice,
    v: &KVector,
    cap: u64,
) -> Result<(StableLattice, Vec<StableLattice>)> {
    let mut current = lat.clone();
    let mut trace = vec![current.clone()];
    let guard = 4 * rep.max_diameter() as usize + 16;
    for _ in 0..guard {
        let res = rep
            .residue_coordinates(&current, v)?
            .ok_or(Error::NotNormalised)?;
        let red = rep.reduce_mod_pi(&current)?;
        let (soc, simple) = socle_data(&red, cap)?;
        if simple && soc.contains_vec(&res) {
            return Ok((current, trace));
        }
        let simples = minimal_submodules(&red, cap)?;
        let avoiding = simples
            .iter()
            .find(|s| !s.contains_vec(&res))
            .ok_or_else(|| Error::Internal("no simple submodule avoids the vector".to_string()))?;
        let pre = rep.preimage_lattice(&current, avoiding)?;
        current = pre.scaled(-1);
        trace.push(current.clone());
    }
    Err(Error::DiameterExceeded(
        "ascent did not terminate within the diameter guard".to_string(),
    ))
}

/// The matrix over `F_p` of the induced map `Λ/πΛ → Λ_x/πΛ_x` for a
/// representative `Λ ⊆ Λ_x`, `Λ ⊄ πΛ_x`.
fn reduction_map(
    rep: &Representation,
    lat: &StableLattice,
    lat_x: &StableLattice,
) -> Result<ResidueMatrix> {
    let ctx = rep.ctx();
    let (z, e) = adjugate_times(lat_x.basis(), lat.basis())?;
    let scale = e as i64 + lat.shift() - lat_x.shift();
    if (z.min_val() as i64) < scale {
        return Err(Error::Internal("representative does not contain the lattice".to_string()));
    }
    if e as i64 + scale.max(0) + 1 > ctx.precision() as i64 {
        return Err(Error::PrecisionExhausted(
            "reduction map needs more working precision".to_string(),
        ));
    }
    Ok(z.shift_all(-scale)?.residue_matrix())
}

/// θ: a maximal vertex `x` determines the sharp subquotient
/// `(ker φ, φ⁻¹(soc(Λ_x/πΛ_x)))` of `Λ/πΛ`, where `φ` is induced by the
/// tight representative `Λ ⊆ Λ_x`, `Λ ⊄ πΛ_x`.
pub fn theta(
    rep: &Representation,
    lat: &StableLattice,
    x_lattice: &StableLattice,
    cap: u64,
) -> Result<Subquotient> {
    let lat_x = rep.tight_superlattice(x_lattice.basis(), lat)?;
    let phi = reduction_map(rep, lat, &lat_x)?;
    let p = rep.ctx().p();
    let n = rep.dim();
    let ker_rows = phi.kernel_basis();
    let v1 = Submodule::from_rows(p, n, (0..ker_rows.rows()).map(|i| ker_rows.row(i)).collect());
    let red_x = rep.reduce_mod_pi(&lat_x)?;
    let (soc_x, _) = socle_data(&red_x, cap)?;
    let v2 = kernel_of_composite(&phi, &soc_x);
    Ok(Subquotient { v1, v2 })
}

/// Constructive inverse of θ: realize a sharp subquotient `q` of `Λ/πΛ`
/// by a maximal vertex. Lifts the first echelon vector of `V2` outside
/// `V1`, passes to `π⁻¹·preimage(V1)`, and ascends.
pub fn realize_sharp(
    rep: &Representation,
    lat: &StableLattice,
    q: &Subquotient,
    cap: u64,
) -> Result<MaximalVertex> {
    let row = (0..q.v2.dim())
        .map(|i| q.v2.basis().row(i))
        .find(|r| !q.v1.contains_vec(r))
        .ok_or_else(|| Error::Internal("sharp subquotient has V2 ⊆ V1".to_string()))?;
    let v = rep.lift_residue_vector(lat, &row);
    let pre = rep.preimage_lattice(lat, &q.v1)?;
    let start = pre.scaled(-1);
    let (maximal, _) = ascend_to_maximal(rep, &start, &v, cap)?;
    Ok(MaximalVertex { lattice: maximal, witness: v })
}

/// A maximal vertex whose reduction has socle isomorphic to the given
/// simple class, built along the constructive existence proof: take an
/// irreducible subquotient with the right factor in a composition
/// series, pass to a sharp subquotient above it, and realize that.
/// The uniqueness flag is set exactly when the class has multiplicity 1.
pub fn maximal_with_socle(
    rep: &Representation,
    base: &StableLattice,
    class_rep: &FpGModule,
    cap: u64,
) -> Result<(MaximalVertex, bool)> {
    let red = rep.reduce_mod_pi(base)?;
    let chain = composition_chain(&red, cap)?;
    let factors = composition_factor_modules(&red, cap)?;
    let mut step = None;
    let mut multiplicity = 0usize;
    for (k, f) in factors.iter().enumerate() {
        if is_isomorphic(f, class_rep, cap)?.is_some() {
            multiplicity += 1;
            if step.is_none() {
                step = Some(k);
            }
        }
    }
    let Some(k) = step else {
        return Err(Error::NotAFactor(format!("dimension-{} class", class_rep.dim())));
    };
    let q = Subquotient { v1: chain[k].clone(), v2: chain[k + 1].clone() };
    let sharp = sharp_above(&red, &q, cap)?;
    let vertex = realize_sharp(rep, base, &sharp, cap)?;
    Ok((vertex, multiplicity == 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{load_representation, GeneratorSpec};
    use crate::modrep::{fixtures, spin};
    use crate::ring::{make_ring, Flavor};

    const CAP: u64 = 1 << 20;

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

    #[test]
    fn maximality_test_examples() {
        let (rep, base) = fix1();
        let v = rep.vector_from_int(&[1, 2], 0).unwrap();
        assert!(is_maximal_at(&rep, &base, &v, CAP).unwrap());
        let v = rep.vector_from_int(&[1, 0], 0).unwrap();
        assert!(!is_maximal_at(&rep, &base, &v, CAP).unwrap());
        // a vector reducing to zero is rejected
        let v = rep.vector_from_int(&[3, 0], 0).unwrap();
        assert!(matches!(
            is_maximal_at(&rep, &base, &v, CAP),
            Err(Error::NotNormalised)
        ));
        // vector robustness: maximality holds for every vector whose image
        // generates the socle, i.e. maximal ⟺ socle simple
        assert!(is_maximal_lattice(&rep, &base, CAP).unwrap());
        for (c1, c2) in [(1i64, 2i64), (2, 4), (4, 8), (1, -1)] {
            let v = rep.vector_from_int(&[c1, c2], 0).unwrap();
            assert!(is_maximal_at(&rep, &base, &v, CAP).unwrap(), "({c1},{c2})");
        }
    }

    #[test]
    fn ascent_examples() {
        let (rep, base) = fix1();
        let v = rep.vector_from_int(&[1, 2], 0).unwrap();
        let (lat, trace) = ascend_to_maximal(&rep, &base, &v, CAP).unwrap();
        assert_eq!(lat, base);
        assert_eq!(trace.len(), 1);

        let v = rep.vector_from_int(&[1, 0], 0).unwrap();
        let (lat, trace) = ascend_to_maximal(&rep, &base, &v, CAP).unwrap();
        assert_eq!(trace.len(), 2); // exactly one ascent step
        assert!(is_maximal_at(&rep, &lat, &v, CAP).unwrap());
        // the other homothety class: π⁻¹·(preimage of the socle line)
        let red = rep.reduce_mod_pi(&base).unwrap();
        let line = spin(&red, &[vec![1, 2]]);
        let other = rep.preimage_lattice(&base, &line).unwrap().scaled(-1);
        assert_eq!(lat.key(rep.ctx()), other.key(rep.ctx()));
        assert_ne!(lat.key(rep.ctx()), base.key(rep.ctx()));
    }

    #[test]
    fn sharp_subquotient_examples() {
        let red = fixtures::fix1_reduction();
        let sharps = sharp_subquotients(&red, CAP).unwrap();
        assert_eq!(sharps.len(), 2);
        assert!(sharps[0].v1.is_zero() && sharps[0].v2.dim() == 1);
        assert!(sharps[1].v1.dim() == 1 && sharps[1].v2.is_full());
        for q in &sharps {
            assert!(is_sharp(&red, q, CAP).unwrap());
        }

        let simple = fixtures::fix2_reduction();
        let sharps = sharp_subquotients(&simple, CAP).unwrap();
        assert_eq!(sharps.len(), 1);
        assert!(sharps[0].v1.is_zero() && sharps[0].v2.is_full());

        // two minimal over-modules of 0 kill the (0, ·) pair
        let ts = fixtures::trivial_plus_sign();
        let sharps = sharp_subquotients(&ts, CAP).unwrap();
        assert_eq!(sharps.len(), 2);
        assert!(sharps.iter().all(|q| q.v1.dim() == 1 && q.v2.is_full()));
    }

    #[test]
    fn sharp_above_examples() {
        let red = fixtures::fix1_reduction();
        let line = spin(&red, &[vec![1, 2]]);
        let q = Subquotient { v1: Submodule::zero(3, 2), v2: line.clone() };
        let s = sharp_above(&red, &q, CAP).unwrap();
        assert_eq!(s, q); // already sharp

        let ts = fixtures::trivial_plus_sign();
        let span1 = spin(&ts, &[vec![1, 0]]);
        let span2 = spin(&ts, &[vec![0, 1]]);
        let q = Subquotient { v1: Submodule::zero(3, 2), v2: span1.clone() };
        let s = sharp_above(&ts, &q, CAP).unwrap();
        assert_eq!(s.v1, span2);
        assert!(s.v2.is_full());
        // lying-above identities: V2 ∩ V1' = V1 and V2'/V1' ≅ V2/V1
        assert_eq!(q.v2.intersect(&s.v1), q.v1);
        assert!(is_sharp(&ts, &s, CAP).unwrap());
        let quotient_of = |pair: &Subquotient| {
            let v2_mod = submodule_module(&ts, &pair.v2);
            let v1_in = Submodule::from_rows(
                3,
                pair.v2.dim(),
                (0..pair.v1.dim())
                    .map(|i| pair.v2.coords_of(&pair.v1.basis().row(i)).unwrap())
                    .collect(),
            );
            crate::modrep::quotient_module(&v2_mod, &v1_in).0
        };
        assert!(
            is_isomorphic(&quotient_of(&q), &quotient_of(&s), CAP).unwrap().is_some(),
            "V2'/V1' ≅ V2/V1"
        );
    }

    #[test]
    fn theta_examples() {
        let (rep, base) = fix1();
        // x = the class of Λ itself: θ = (0, socle)
        let q = theta(&rep, &base, &base, CAP).unwrap();
        assert!(q.v1.is_zero());
        assert_eq!(q.v2.dim(), 1);
        assert!(q.v2.contains_vec(&[1, 2]));

        // x = the other vertex: θ = (socle line, everything)
        let red = rep.reduce_mod_pi(&base).unwrap();
        let line = spin(&red, &[vec![1, 2]]);
        let other = rep.preimage_lattice(&base, &line).unwrap().scaled(-1);
        let q = theta(&rep, &base, &other, CAP).unwrap();
        assert_eq!(q.v1.dim(), 1);
        assert!(q.v1.contains_vec(&[1, 2]));
        assert!(q.v2.is_full());
        // outputs satisfy the sharpness predicate
        assert!(is_sharp(&red, &q, CAP).unwrap());
    }

    #[test]
    fn realize_sharp_round_trip() {
        let (rep, base) = fix1();
        let red = rep.reduce_mod_pi(&base).unwrap();
        for q in sharp_subquotients(&red, CAP).unwrap() {
            let vertex = realize_sharp(&rep, &base, &q, CAP).unwrap();
            assert!(is_maximal_at(&rep, &vertex.lattice, &vertex.witness, CAP).unwrap());
            let back = theta(&rep, &base, &vertex.lattice, CAP).unwrap();
            assert_eq!(back, q, "θ∘realize is the identity on sharp subquotients");
        }
    }

    #[test]
    fn maximal_with_socle_examples() {
        let (rep, base) = fix1();
        let red = rep.reduce_mod_pi(&base).unwrap();
        let factors = crate::modrep::composition_factors(&red, CAP).unwrap();
        // the trivial class (b acts by +1) lands on the base vertex
        let trivial = factors.iter().find(|(f, _)| f.gens()[1].at(0, 0) == 1).unwrap();
        let (vx, unique) = maximal_with_socle(&rep, &base, &trivial.0, CAP).unwrap();
        assert!(unique);
        assert_eq!(vx.lattice.key(rep.ctx()), base.key(rep.ctx()));
        // the sign class lands on the other vertex
        let sign = factors.iter().find(|(f, _)| f.gens()[1].at(0, 0) == 2).unwrap();
        let (vx, unique) = maximal_with_socle(&rep, &base, &sign.0, CAP).unwrap();
        assert!(unique);
        assert_ne!(vx.lattice.key(rep.ctx()), base.key(rep.ctx()));
    }
}
