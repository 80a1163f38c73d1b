//! Finite gate-set groups: closure from generators, irrep sector catalogs,
//! twirls, multiplicities and trivial-subspace projectors.

use std::collections::{BTreeMap, HashMap, VecDeque};

use nalgebra::DMatrix;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gates;
use crate::ptm::{coordinate_projector, is_signed_permutation, max_abs_diff, ptm_from_unitary, CMat, EQ_TOL};

/// Catalog names accepted by [`GateSet::by_name`].
pub const CATALOG: [&str; 6] = ["c1", "c2", "g1", "c1xc1", "c1xi", "leakage"];

#[derive(Clone, Debug)]
pub struct Generator {
    pub label: String,
    pub unitary: CMat,
    /// Entangling-gate count contributed by one application.
    pub cnot_cost: usize,
}

impl Generator {
    pub fn new(label: &str, unitary: CMat, cnot_cost: usize) -> Self {
        Generator { label: label.to_string(), unitary, cnot_cost }
    }
}

#[derive(Clone, Debug)]
pub struct GroupElement {
    pub unitary: CMat,
    pub ptm: DMatrix<f64>,
    pub cnot_cost: usize,
}

/// Isotypic component of the PTM representation.
#[derive(Clone, Debug, Serialize)]
pub struct IrrepSector {
    pub label: String,
    /// τ indices on which the projector is supported.
    pub indices: Vec<usize>,
    #[serde(skip)]
    pub projector: DMatrix<f64>,
    pub dim: usize,
    pub multiplicity: usize,
    /// False for invariant subspaces that the catalog keeps whole although
    /// they split further under the group.
    pub irreducible: bool,
}

/// A single irrep copy living on coordinate τ indices; probes act on these.
#[derive(Clone, Debug, Serialize)]
pub struct Block {
    pub label: String,
    pub indices: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum KeyKind {
    Perm,
    Grid,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum PtmKey {
    Perm(Vec<i16>),
    Grid(Vec<i64>),
}

fn ptm_key(m: &DMatrix<f64>, kind: KeyKind) -> Result<PtmKey> {
    match kind {
        KeyKind::Perm => {
            let n = m.nrows();
            let mut key = Vec::with_capacity(n);
            for j in 0..n {
                let mut code = None;
                for i in 0..n {
                    let v = m[(i, j)];
                    if (v.abs() - 1.0).abs() <= EQ_TOL {
                        code = Some((i as i16 + 1) * if v > 0.0 { 1 } else { -1 });
                    }
                }
                key.push(code.ok_or_else(|| {
                    Error::numerical("element PTM is not a signed permutation in a Clifford-type group")
                })?);
            }
            Ok(PtmKey::Perm(key))
        }
        KeyKind::Grid => Ok(PtmKey::Grid(m.iter().map(|v| (v * 1e9).round() as i64).collect())),
    }
}

fn key_bytes(k: &PtmKey) -> Vec<u8> {
    match k {
        PtmKey::Perm(v) => v.iter().flat_map(|x| x.to_le_bytes()).collect(),
        PtmKey::Grid(v) => v.iter().flat_map(|x| x.to_le_bytes()).collect(),
    }
}

/// Closure of `generators` under multiplication, modulo global phase.
///
/// Breadth-first over generator words with 0-1 costs, so each element's
/// `cnot_cost` is the fewest entangling generators in any word reaching it.
pub fn generate_group(generators: &[Generator], cap: usize) -> Result<Vec<GroupElement>> {
    let first = generators.first().ok_or_else(|| Error::config("generator list is empty"))?;
    let d = first.unitary.nrows();
    let gen_ptms = generators
        .iter()
        .map(|g| ptm_from_unitary(&g.unitary).map(|p| p.into_matrix()))
        .collect::<Result<Vec<_>>>()?;
    let kind = if gen_ptms.iter().all(is_signed_permutation) { KeyKind::Perm } else { KeyKind::Grid };
    let d2 = d * d;

    let mut elems: Vec<GroupElement> = vec![GroupElement {
        unitary: CMat::identity(d, d),
        ptm: DMatrix::identity(d2, d2),
        cnot_cost: 0,
    }];
    let mut index: HashMap<PtmKey, usize> = HashMap::new();
    index.insert(ptm_key(&elems[0].ptm, kind)?, 0);
    let mut queue: VecDeque<(usize, usize)> = VecDeque::from([(0, 0)]);

    while let Some((i, cost)) = queue.pop_front() {
        if cost > elems[i].cnot_cost {
            continue;
        }
        for (gi, g) in generators.iter().enumerate() {
            let ptm = &gen_ptms[gi] * &elems[i].ptm;
            let new_cost = cost + g.cnot_cost;
            let key = ptm_key(&ptm, kind)?;
            match index.get(&key) {
                Some(&j) => {
                    if new_cost < elems[j].cnot_cost {
                        elems[j].cnot_cost = new_cost;
                        elems[j].unitary = &g.unitary * &elems[i].unitary;
                        push(&mut queue, j, new_cost, g.cnot_cost);
                    }
                }
                None => {
                    if elems.len() >= cap {
                        return Err(Error::numerical(format!(
                            "closure exceeded cap {cap}: generator '{}' applied to element {i} gives a new element",
                            g.label
                        )));
                    }
                    let unitary = &g.unitary * &elems[i].unitary;
                    elems.push(GroupElement { unitary, ptm, cnot_cost: new_cost });
                    index.insert(key, elems.len() - 1);
                    push(&mut queue, elems.len() - 1, new_cost, g.cnot_cost);
                }
            }
        }
    }

    let mut keyed = elems
        .into_iter()
        .map(|e| ptm_key(&e.ptm, kind).map(|k| (k, e)))
        .collect::<Result<Vec<_>>>()?;
    keyed.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(keyed.into_iter().map(|(_, e)| e).collect())
}

fn push(queue: &mut VecDeque<(usize, usize)>, idx: usize, cost: usize, step: usize) {
    if step == 0 {
        queue.push_front((idx, cost));
    } else {
        queue.push_back((idx, cost));
    }
}

/// A gate set: group elements, sector catalog and probe blocks.
#[derive(Clone, Debug)]
pub struct GateSet {
    pub name: String,
    pub n_qubits: usize,
    pub elements: Vec<GroupElement>,
    pub sectors: Vec<IrrepSector>,
    pub blocks: Vec<Block>,
    /// Qubits touched by the random gates (used by the per-qubit-local noise rule).
    pub active_qubits: Vec<bool>,
    /// Hilbert dimension and per-block traces used for average fidelity.
    pub fidelity: Option<FidelitySpec>,
    kind: KeyKind,
    lookup: HashMap<PtmKey, usize>,
    identity: usize,
    hash: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct FidelitySpec {
    pub dim: usize,
    pub traces: Vec<(String, f64)>,
}

impl GateSet {
    /// Build a catalog gate set by name.
    pub fn by_name(name: &str) -> Result<GateSet> {
        match name {
            "c1" => Self::c1(),
            "c2" => Self::c2(),
            "g1" => Self::g1(),
            "c1xc1" => Self::c1xc1(),
            "c1xi" => Self::c1xi(),
            "leakage" => Self::leakage(),
            other => Err(Error::config(format!(
                "unknown gate set '{other}'; valid names: {}",
                CATALOG.join(", ")
            ))),
        }
    }

    pub fn c1() -> Result<GateSet> {
        let gens = [Generator::new("H", gates::h(), 0), Generator::new("S", gates::s(), 0)];
        let sectors = vec![coord_sector("P0", &[0], 1, 1, 4), coord_sector("P1", &[1, 2, 3], 3, 1, 4)];
        let blocks = vec![block("P1", &[1, 2, 3])];
        let fid = FidelitySpec { dim: 2, traces: vec![("P1".into(), 3.0)] };
        Self::assemble("c1", 1, generate_group(&gens, 100)?, sectors, blocks, vec![true], Some(fid))
    }

    pub fn c2() -> Result<GateSet> {
        let gens = [
            Generator::new("H⊗I", gates::on_first(&gates::h()), 0),
            Generator::new("I⊗H", gates::on_second(&gates::h()), 0),
            Generator::new("S⊗I", gates::on_first(&gates::s()), 0),
            Generator::new("I⊗S", gates::on_second(&gates::s()), 0),
            Generator::new("CNOT01", gates::cnot01(), 1),
        ];
        let rest: Vec<usize> = (1..16).collect();
        let sectors = vec![coord_sector("P0", &[0], 1, 1, 16), coord_sector("P1", &rest, 15, 1, 16)];
        let blocks = vec![block("P1", &rest)];
        let fid = FidelitySpec { dim: 4, traces: vec![("P1".into(), 15.0)] };
        Self::assemble("c2", 2, generate_group(&gens, 20_000)?, sectors, blocks, vec![true, true], Some(fid))
    }

    pub fn g1() -> Result<GateSet> {
        let gens = [
            Generator::new("X⊗I", gates::on_first(&gates::x()), 0),
            Generator::new("I⊗X", gates::on_second(&gates::x()), 0),
            Generator::new("CNOT01", gates::cnot01(), 1),
            Generator::new("CNOT10", gates::cnot10(), 1),
        ];
        let p1 = [3, 6, 15];
        let p2: Vec<usize> = (1..15).filter(|i| *i != 3 && *i != 6).collect();
        let sectors = vec![
            coord_sector("P0", &[0], 1, 1, 16),
            coord_sector("P1", &p1, 3, 1, 16),
            reducible(coord_sector("P2", &p2, 12, 1, 16)),
        ];
        let blocks = vec![block("P1", &p1), block("P2", &p2)];
        let fid = FidelitySpec { dim: 4, traces: vec![("P1".into(), 3.0), ("P2".into(), 12.0)] };
        Self::assemble("g1", 2, generate_group(&gens, 1000)?, sectors, blocks, vec![true, true], Some(fid))
    }

    pub fn c1xc1() -> Result<GateSet> {
        let gens = [
            Generator::new("H⊗I", gates::on_first(&gates::h()), 0),
            Generator::new("S⊗I", gates::on_first(&gates::s()), 0),
            Generator::new("I⊗H", gates::on_second(&gates::h()), 0),
            Generator::new("I⊗S", gates::on_second(&gates::s()), 0),
        ];
        let p3: Vec<usize> = (7..16).collect();
        let sectors = vec![
            coord_sector("P0", &[0], 1, 1, 16),
            coord_sector("P1", &[4, 5, 6], 3, 1, 16),
            coord_sector("P2", &[1, 2, 3], 3, 1, 16),
            coord_sector("P3", &p3, 9, 1, 16),
        ];
        let blocks = vec![block("P1", &[4, 5, 6]), block("P2", &[1, 2, 3]), block("P3", &p3)];
        let fid = FidelitySpec {
            dim: 4,
            traces: vec![("P1".into(), 3.0), ("P2".into(), 3.0), ("P3".into(), 9.0)],
        };
        Self::assemble("c1xc1", 2, generate_group(&gens, 1000)?, sectors, blocks, vec![true, true], Some(fid))
    }

    pub fn c1xi() -> Result<GateSet> {
        let gens = [
            Generator::new("H⊗I", gates::on_first(&gates::h()), 0),
            Generator::new("S⊗I", gates::on_first(&gates::s()), 0),
        ];
        let nontrivial: Vec<usize> = (4..16).collect();
        let sectors = vec![
            coord_sector("trivial", &[0, 1, 2, 3], 1, 4, 16),
            coord_sector("nontrivial", &nontrivial, 3, 4, 16),
        ];
        let blocks = vec![block("P1", &[4, 5, 6])];
        let fid = FidelitySpec { dim: 2, traces: vec![("P1".into(), 3.0)] };
        Self::assemble("c1xi", 2, generate_group(&gens, 100)?, sectors, blocks, vec![true, false], Some(fid))
    }

    /// Four-level system (computational qubit ⊕ leakage qubit), embedded as
    /// two qubits whose first factor labels the subspace.
    pub fn leakage() -> Result<GateSet> {
        let gens = [
            Generator::new("X⊕Z", gates::direct_sum(&gates::x(), &gates::z()), 0),
            Generator::new("Z⊕H", gates::direct_sum(&gates::z(), &gates::h()), 0),
        ];
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let sectors = vec![
            coord_sector("trivial", &[0, 6], 1, 2, 16),
            coord_sector("y", &[2, 14], 1, 2, 16),
            vector_sector("comp_z", &[vec![(3, r), (15, r)]], 1, 1),
            vector_sector("comp_x", &[vec![(1, r), (13, r)]], 1, 1),
            vector_sector("leak_xz", &[vec![(1, r), (13, -r)], vec![(3, r), (15, -r)]], 2, 1),
            coord_sector("mixed_a", &[4, 5, 8, 11], 2, 2, 16),
            coord_sector("mixed_b", &[7, 9, 10, 12], 2, 2, 16),
        ];
        let blocks = vec![block("P0", &[0, 6]), block("P0_2", &[6])];
        Self::assemble("leakage", 2, generate_group(&gens, 100)?, sectors, blocks, vec![true, true], None)
    }

    /// Validate and index a freshly generated element list.
    pub fn assemble(
        name: &str,
        n_qubits: usize,
        elements: Vec<GroupElement>,
        sectors: Vec<IrrepSector>,
        blocks: Vec<Block>,
        active_qubits: Vec<bool>,
        fidelity: Option<FidelitySpec>,
    ) -> Result<GateSet> {
        let kind = if elements.iter().all(|e| is_signed_permutation(&e.ptm)) { KeyKind::Perm } else { KeyKind::Grid };
        let mut lookup = HashMap::new();
        let mut hasher = Sha256::new();
        hasher.update(name.as_bytes());
        for (i, e) in elements.iter().enumerate() {
            let k = ptm_key(&e.ptm, kind)?;
            hasher.update(key_bytes(&k));
            hasher.update((e.cnot_cost as u64).to_le_bytes());
            if lookup.insert(k, i).is_some() {
                return Err(Error::numerical(format!("duplicate element {i} in gate set {name}")));
            }
        }
        let d2 = elements[0].ptm.nrows();
        let id_key = ptm_key(&DMatrix::identity(d2, d2), kind)?;
        let identity = *lookup
            .get(&id_key)
            .ok_or_else(|| Error::numerical(format!("gate set {name} lacks the identity")))?;
        let gs = GateSet {
            name: name.to_string(),
            n_qubits,
            elements,
            sectors,
            blocks,
            active_qubits,
            fidelity,
            kind,
            lookup,
            identity,
            hash: hex::encode(hasher.finalize()),
        };
        gs.validate()?;
        Ok(gs)
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn ptm_dim(&self) -> usize {
        self.elements[0].ptm.nrows()
    }

    pub fn identity_index(&self) -> usize {
        self.identity
    }

    /// Content hash over the canonical element list.
    pub fn content_hash(&self) -> &str {
        &self.hash
    }

    pub fn find_ptm(&self, ptm: &DMatrix<f64>) -> Option<usize> {
        ptm_key(ptm, self.kind).ok().and_then(|k| self.lookup.get(&k).copied())
    }

    pub fn find_unitary(&self, u: &CMat) -> Option<usize> {
        ptm_from_unitary(u).ok().and_then(|p| self.find_ptm(p.matrix()))
    }

    pub fn block(&self, label: &str) -> Result<&Block> {
        self.blocks.iter().find(|b| b.label == label).ok_or_else(|| {
            let names: Vec<&str> = self.blocks.iter().map(|b| b.label.as_str()).collect();
            Error::config(format!(
                "gate set {} has no block '{label}'; available: {}",
                self.name,
                names.join(", ")
            ))
        })
    }

    pub fn sector(&self, label: &str) -> Option<&IrrepSector> {
        self.sectors.iter().find(|s| s.label == label)
    }

    /// Character of the full PTM representation.
    pub fn character(&self) -> Vec<f64> {
        self.elements.iter().map(|e| e.ptm.trace()).collect()
    }

    pub fn cnot_cost_histogram(&self) -> BTreeMap<usize, usize> {
        let mut h = BTreeMap::new();
        for e in &self.elements {
            *h.entry(e.cnot_cost).or_insert(0) += 1;
        }
        h
    }

    /// Structural checks run at load time.
    pub fn validate(&self) -> Result<()> {
        let d2 = self.ptm_dim();
        let total: usize = self.sectors.iter().map(|s| s.dim * s.multiplicity).sum();
        if total != d2 {
            return Err(Error::numerical(format!(
                "{}: sector dimensions sum to {total}, expected {d2}",
                self.name
            )));
        }
        let mut sum = DMatrix::zeros(d2, d2);
        for s in &self.sectors {
            let p = &s.projector;
            if max_abs_diff(&(p * p), p) > EQ_TOL || max_abs_diff(&p.transpose(), p) > EQ_TOL {
                return Err(Error::numerical(format!("{}: sector {} is not an orthogonal projector", self.name, s.label)));
            }
            if (p.trace() - (s.dim * s.multiplicity) as f64).abs() > 1e-6 {
                return Err(Error::numerical(format!("{}: sector {} has wrong rank", self.name, s.label)));
            }
            let mut norm2 = 0.0;
            for e in &self.elements {
                if max_abs_diff(&(&e.ptm * p), &(p * &e.ptm)) > EQ_TOL {
                    return Err(Error::numerical(format!(
                        "{}: sector {} does not commute with the group",
                        self.name, s.label
                    )));
                }
                let chi = (p * &e.ptm).trace();
                norm2 += chi * chi;
            }
            let a2 = norm2 / self.order() as f64;
            let expected = (s.multiplicity * s.multiplicity) as f64;
            let bad = if s.irreducible { (a2 - expected).abs() > 1e-6 } else { (a2 - a2.round()).abs() > 1e-6 };
            if bad {
                return Err(Error::numerical(format!(
                    "{}: sector {} character norm {a2:.6} disagrees with multiplicity {}",
                    self.name, s.label, s.multiplicity
                )));
            }
            sum += p;
        }
        if max_abs_diff(&sum, &DMatrix::identity(d2, d2)) > EQ_TOL {
            return Err(Error::numerical(format!("{}: sector projectors do not resolve the identity", self.name)));
        }
        for b in &self.blocks {
            let p = coordinate_projector(d2, &b.indices);
            for e in &self.elements {
                if max_abs_diff(&(&e.ptm * &p), &(&p * &e.ptm)) > EQ_TOL {
                    return Err(Error::numerical(format!("{}: block {} is not invariant", self.name, b.label)));
                }
            }
        }
        for (i, e) in self.elements.iter().enumerate() {
            if self.find_ptm(&e.ptm.transpose()).is_none() {
                return Err(Error::numerical(format!("{}: inverse of element {i} missing", self.name)));
            }
        }
        Ok(())
    }

    /// Check that products of the listed element pairs stay in the set.
    pub fn check_closure<I: IntoIterator<Item = (usize, usize)>>(&self, pairs: I) -> Result<()> {
        for (i, j) in pairs {
            let prod = &self.elements[i].ptm * &self.elements[j].ptm;
            if self.find_ptm(&prod).is_none() {
                return Err(Error::numerical(format!("{}: product of elements {i} and {j} not in set", self.name)));
            }
        }
        Ok(())
    }

    /// `(1/|G|) Σ_g R(g)`, the projector onto the trivial subspace.
    pub fn trivial_projector(&self) -> DMatrix<f64> {
        let d2 = self.ptm_dim();
        let mut acc = DMatrix::zeros(d2, d2);
        for e in &self.elements {
            acc += &e.ptm;
        }
        acc / self.order() as f64
    }

    /// `(1/|G|) Σ_g R_i(g)⊗R(g)` with `R_i(g) = P R(g) P` for the block
    /// indices; Kronecker index is `16·a + b` (block side first).
    pub fn product_trivial_projector(&self, indices: &[usize]) -> DMatrix<f64> {
        let noisy: Vec<&DMatrix<f64>> = self.elements.iter().map(|e| &e.ptm).collect();
        block_transfer(self, indices, &noisy)
    }

    /// Group twirl of a channel, with decay per probe block and per sector.
    pub fn twirl(&self, channel: &DMatrix<f64>) -> Result<Twirl> {
        let d2 = self.ptm_dim();
        if channel.nrows() != d2 || channel.ncols() != d2 {
            return Err(Error::config(format!("channel is {}x{}, gate set needs {d2}x{d2}", channel.nrows(), channel.ncols())));
        }
        let mut acc = DMatrix::zeros(d2, d2);
        for e in &self.elements {
            acc += &e.ptm * channel * e.ptm.transpose();
        }
        acc /= self.order() as f64;
        let block_lambdas = self
            .blocks
            .iter()
            .map(|b| {
                let t: f64 = b.indices.iter().map(|&i| channel[(i, i)]).sum();
                (b.label.clone(), t / b.indices.len() as f64)
            })
            .collect();
        let sector_lambdas = self
            .sectors
            .iter()
            .map(|s| {
                let t = (&s.projector * channel).trace();
                (s.label.clone(), t / s.projector.trace())
            })
            .collect();
        Ok(Twirl { ptm: acc, block_lambdas, sector_lambdas })
    }

    /// Multiplicity of an irrep given its character, `(1/|G|) Σ χ(g) χ_i(g)`.
    pub fn multiplicity(&self, irrep_character: &[f64]) -> Result<usize> {
        if irrep_character.len() != self.order() {
            return Err(Error::config(format!(
                "character has {} entries, group order is {}",
                irrep_character.len(),
                self.order()
            )));
        }
        let a: f64 = self
            .elements
            .iter()
            .zip(irrep_character)
            .map(|(e, chi)| e.ptm.trace() * chi)
            .sum::<f64>()
            / self.order() as f64;
        let r = a.round();
        if (a - r).abs() > 1e-6 || r < 0.0 {
            return Err(Error::numerical(format!("non-integral multiplicity {a:.8}; character table is wrong")));
        }
        Ok(r as usize)
    }
}

#[derive(Clone, Debug)]
pub struct Twirl {
    pub ptm: DMatrix<f64>,
    /// `Tr(P_b Λ)/|P_b|` for every probe block.
    pub block_lambdas: Vec<(String, f64)>,
    /// `Tr(P_i Λ)/Tr(P_i)` for every isotypic sector.
    pub sector_lambdas: Vec<(String, f64)>,
}

impl Twirl {
    pub fn lambda(&self, label: &str) -> Option<f64> {
        self.block_lambdas
            .iter()
            .chain(&self.sector_lambdas)
            .find(|(l, _)| l == label)
            .map(|(_, v)| *v)
    }
}

/// `(1/|G|) Σ_g (P R(g) P) ⊗ N(g)` accumulated from the sparse block side.
pub fn block_transfer(gs: &GateSet, indices: &[usize], right: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let d2 = gs.ptm_dim();
    let mut out = DMatrix::zeros(d2 * d2, d2 * d2);
    for (e, n) in gs.elements.iter().zip(right) {
        for &a in indices {
            for &b in indices {
                let s = e.ptm[(a, b)];
                if s.abs() < 1e-15 {
                    continue;
                }
                let mut view = out.view_mut((a * d2, b * d2), (d2, d2));
                view.zip_apply(*n, |o, v| *o += s * v);
            }
        }
    }
    out / gs.order() as f64
}

fn block(label: &str, indices: &[usize]) -> Block {
    Block { label: label.to_string(), indices: indices.to_vec() }
}

fn coord_sector(label: &str, indices: &[usize], dim: usize, multiplicity: usize, d2: usize) -> IrrepSector {
    IrrepSector {
        label: label.to_string(),
        indices: indices.to_vec(),
        projector: coordinate_projector(d2, indices),
        dim,
        multiplicity,
        irreducible: true,
    }
}

fn reducible(mut s: IrrepSector) -> IrrepSector {
    s.irreducible = false;
    s
}

/// Sector spanned by orthonormal sparse vectors over τ indices.
fn vector_sector(label: &str, vectors: &[Vec<(usize, f64)>], dim: usize, multiplicity: usize) -> IrrepSector {
    let mut p = DMatrix::zeros(16, 16);
    let mut support = Vec::new();
    for v in vectors {
        for &(i, a) in v {
            for &(j, b) in v {
                p[(i, j)] += a * b;
            }
            support.push(i);
        }
    }
    support.sort_unstable();
    support.dedup();
    IrrepSector { label: label.to_string(), indices: support, projector: p, dim, multiplicity, irreducible: true }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_groups_have_expected_orders() {
        assert_eq!(GateSet::c1().unwrap().order(), 24);
        assert_eq!(GateSet::g1().unwrap().order(), 24);
        assert_eq!(GateSet::c1xi().unwrap().order(), 24);
        assert_eq!(GateSet::leakage().unwrap().order(), 16);
    }

    #[test]
    fn cap_overflow_is_reported() {
        let gens = [Generator::new("H", gates::h(), 0), Generator::new("S", gates::s(), 0)];
        let err = generate_group(&gens, 10).unwrap_err();
        assert!(err.to_string().contains("cap 10"));
    }

    #[test]
    fn g1_cnot_costs_split_into_four_sets() {
        let g = GateSet::g1().unwrap();
        let h = g.cnot_cost_histogram();
        let counts: Vec<(usize, usize)> = h.into_iter().collect();
        assert_eq!(counts, vec![(0, 4), (1, 8), (2, 8), (3, 4)]);
    }
}
