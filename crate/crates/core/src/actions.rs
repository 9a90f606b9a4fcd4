//! Semigroups and their actions on `M_d`.
//!
//! Supported kinds: finite groups (multiplication table or permutation
//! generators), cyclic groups, the circle group acting by diagonal unitary
//! conjugation, and `ℕ^d` generated by commuting maps.

use std::collections::{HashMap, VecDeque};
use std::f64::consts::TAU;

use crate::cbnorm::{cb_norm_cp, cb_norm_factorization_bound};
use crate::error::{Error, Result};
use crate::linalg::{condition_number, op_norm, CMatrix, C64};
use crate::superop::SuperOp;

pub const MAX_GROUP_ORDER: usize = 10_000;
pub const DEFAULT_PROBE_HORIZON: usize = 256;
pub const HOMOMORPHISM_TOL: f64 = 1e-10;
pub const MAX_CIRCLE_WEIGHT: i64 = 64;
pub const MAX_REP_CONDITION: f64 = 1e8;
/// Above this many element pairs the homomorphism check runs on
/// (element, generator) pairs, which implies the all-pairs identity by
/// induction on word length.
pub const ALL_PAIRS_LIMIT: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
enum Law {
    Table(Vec<usize>),
    Perms {
        perms: Vec<Vec<usize>>,
        index: HashMap<Vec<usize>, usize>,
    },
}

/// A finite group with elements `0..order`, element 0 the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteGroup {
    labels: Vec<String>,
    law: Law,
    inverses: Vec<usize>,
    generators: Vec<usize>,
    /// Each element as a product of generators (indices into `generators`).
    words: Vec<Vec<usize>>,
}

fn compose_perm(p: &[usize], q: &[usize]) -> Vec<usize> {
    // (p q)(x) = p(q(x))
    q.iter().map(|&x| p[x]).collect()
}

impl FiniteGroup {
    /// From an explicit multiplication table `table[a][b] = a·b`. Checks
    /// closure, identity, inverses and associativity (Light's test over a
    /// generating set), then relabels so that the identity is element 0.
    pub fn from_table(labels: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidSemigroup("empty multiplication table".into()));
        }
        if n > MAX_GROUP_ORDER {
            return Err(Error::InvalidSemigroup(format!(
                "order {n} exceeds the cap of {MAX_GROUP_ORDER}"
            )));
        }
        if labels.len() != n {
            return Err(Error::InvalidSemigroup("one label per table row required".into()));
        }
        for (a, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidSemigroup(format!("table row {a} has wrong length")));
            }
            if let Some(&bad) = row.iter().find(|&&c| c >= n) {
                return Err(Error::InvalidSemigroup(format!("table entry {bad} out of range")));
            }
        }
        let e = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| Error::InvalidSemigroup("no identity element".into()))?;
        // move the identity to position 0
        let mut perm: Vec<usize> = (0..n).collect();
        perm.swap(0, e);
        let flat: Vec<usize> = (0..n * n)
            .map(|ab| perm[table[perm[ab / n]][perm[ab % n]]])
            .collect();
        let labels: Vec<String> = perm.iter().map(|&i| labels[i].clone()).collect();
        let mut inverses = vec![usize::MAX; n];
        for a in 0..n {
            let inv = (0..n)
                .find(|&b| flat[a * n + b] == 0 && flat[b * n + a] == 0)
                .ok_or_else(|| Error::InvalidSemigroup(format!("element '{}' has no inverse", labels[a])))?;
            inverses[a] = inv;
        }
        let mul = |a: usize, b: usize| flat[a * n + b];
        let (generators, words) = greedy_generators(n, &mul);
        for &g in &generators {
            for x in 0..n {
                let xg = mul(x, g);
                for y in 0..n {
                    if mul(xg, y) != mul(x, mul(g, y)) {
                        return Err(Error::InvalidSemigroup(format!(
                            "table is not associative at ('{}', '{}', '{}')",
                            labels[x], labels[g], labels[y]
                        )));
                    }
                }
            }
        }
        Ok(Self {
            labels,
            law: Law::Table(flat),
            inverses,
            generators,
            words,
        })
    }

    /// Closure of permutations of `0..m` under composition, with exact
    /// bookkeeping of images. Elements are numbered in breadth-first order.
    pub fn from_permutations(gens: &[Vec<usize>]) -> Result<Self> {
        let m = gens.first().map(|g| g.len()).unwrap_or(0);
        for g in gens {
            let mut seen = vec![false; m];
            if g.len() != m || g.iter().any(|&x| x >= m || std::mem::replace(&mut seen[x], true)) {
                return Err(Error::InvalidSemigroup(format!("{g:?} is not a permutation of 0..{m}")));
            }
        }
        let id: Vec<usize> = (0..m).collect();
        let mut perms = vec![id.clone()];
        let mut words = vec![Vec::new()];
        let mut index = HashMap::from([(id, 0usize)]);
        let mut queue = VecDeque::from([0usize]);
        while let Some(p) = queue.pop_front() {
            for (gi, g) in gens.iter().enumerate() {
                let q = compose_perm(&perms[p], g);
                if index.contains_key(&q) {
                    continue;
                }
                if perms.len() == MAX_GROUP_ORDER {
                    return Err(Error::InvalidSemigroup(format!(
                        "generated group exceeds the cap of {MAX_GROUP_ORDER} elements"
                    )));
                }
                let mut w = words[p].clone();
                w.push(gi);
                index.insert(q.clone(), perms.len());
                queue.push_back(perms.len());
                perms.push(q);
                words.push(w);
            }
        }
        let inverses = perms
            .iter()
            .map(|p| {
                let mut inv = vec![0; m];
                for (x, &px) in p.iter().enumerate() {
                    inv[px] = x;
                }
                index[&inv]
            })
            .collect();
        let labels = perms.iter().map(|p| format!("{p:?}")).collect();
        let generators = gens.iter().map(|g| index[g]).collect();
        Ok(Self {
            labels,
            law: Law::Perms { perms, index },
            inverses,
            generators,
            words,
        })
    }

    /// `ℤ_n` with generator 1.
    pub fn cyclic(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSemigroup("cyclic order must be at least 1".into()));
        }
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_table((0..n).map(|a| a.to_string()).collect(), table)
    }

    /// `S_n` generated by `(0 1)` and `(0 1 … n−1)`.
    pub fn symmetric(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSemigroup("symmetric group needs n ≥ 1".into()));
        }
        let mut swap: Vec<usize> = (0..n).collect();
        if n > 1 {
            swap.swap(0, 1);
        }
        let cycle: Vec<usize> = (0..n).map(|x| (x + 1) % n).collect();
        Self::from_permutations(&[swap, cycle])
    }

    pub fn order(&self) -> usize {
        self.labels.len()
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn label(&self, g: usize) -> &str {
        &self.labels[g]
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        match &self.law {
            Law::Table(t) => t[a * self.order() + b],
            Law::Perms { perms, index } => index[&compose_perm(&perms[a], &perms[b])],
        }
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverses[g]
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    /// `g` as a word in the generators.
    pub fn word(&self, g: usize) -> &[usize] {
        &self.words[g]
    }

    /// Permutation of `g`, for groups given by permutations.
    pub fn permutation(&self, g: usize) -> Option<&[usize]> {
        match &self.law {
            Law::Perms { perms, .. } => Some(&perms[g]),
            Law::Table(_) => None,
        }
    }
}

/// Greedy generating set and breadth-first words for a group given by `mul`,
/// identity at 0.
fn greedy_generators(n: usize, mul: &dyn Fn(usize, usize) -> usize) -> (Vec<usize>, Vec<Vec<usize>>) {
    let mut generators = Vec::new();
    let mut words: Vec<Option<Vec<usize>>> = vec![None; n];
    words[0] = Some(Vec::new());
    let close = |generators: &[usize], words: &mut Vec<Option<Vec<usize>>>| {
        let mut queue: VecDeque<usize> = (0..n).filter(|&x| words[x].is_some()).collect();
        while let Some(x) = queue.pop_front() {
            for (gi, &g) in generators.iter().enumerate() {
                let y = mul(x, g);
                if words[y].is_none() {
                    let mut w = words[x].clone().unwrap();
                    w.push(gi);
                    words[y] = Some(w);
                    queue.push_back(y);
                }
            }
        }
    };
    for candidate in 1..n {
        if words[candidate].is_none() {
            generators.push(candidate);
            close(&generators, &mut words);
        }
    }
    (generators, words.into_iter().map(|w| w.unwrap()).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub enum SemigroupDesc {
    FiniteGroup(FiniteGroup),
    /// `ℤ_n`, stored with its table.
    Cyclic(FiniteGroup),
    Circle,
    /// `ℕ^d` with `d` commuting generators.
    CommutingMonoid { generators: usize },
}

impl SemigroupDesc {
    pub fn cyclic(n: usize) -> Result<Self> {
        Ok(Self::Cyclic(FiniteGroup::cyclic(n)?))
    }

    pub fn finite_group(&self) -> Option<&FiniteGroup> {
        match self {
            Self::FiniteGroup(g) | Self::Cyclic(g) => Some(g),
            _ => None,
        }
    }

    pub fn is_group(&self) -> bool {
        !matches!(self, Self::CommutingMonoid { .. })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::FiniteGroup(_) => "finite_group",
            Self::Cyclic(_) => "cyclic",
            Self::Circle => "circle",
            Self::CommutingMonoid { .. } => "free_monoid_commuting",
        }
    }
}

/// A semigroup element of any supported kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Group(usize),
    Angle(f64),
    Power(Vec<usize>),
}

/// A representation `g ↦ ρ(g)` of a finite group by invertible matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupRep {
    group: FiniteGroup,
    mats: Vec<CMatrix>,
}

impl GroupRep {
    /// Extends generator images along the group's words.
    pub fn from_generator_images(group: FiniteGroup, dim: usize, images: &[CMatrix]) -> Result<Self> {
        if images.len() != group.generators().len() {
            return Err(Error::Shape(format!(
                "{} generator images given for {} generators",
                images.len(),
                group.generators().len()
            )));
        }
        let d = dim;
        if d == 0 {
            return Err(Error::EmptyMatrix);
        }
        if images.iter().any(|m| m.shape() != (d, d)) {
            return Err(Error::Shape("representation matrices differ in size".into()));
        }
        let mats = (0..group.order())
            .map(|g| {
                group.word(g).iter().fold(CMatrix::identity(d), |acc, &gi| &acc * &images[gi])
            })
            .collect();
        Self::from_elements(group, mats)
    }

    /// One matrix per group element, in element order.
    pub fn from_elements(group: FiniteGroup, mats: Vec<CMatrix>) -> Result<Self> {
        if mats.len() != group.order() {
            return Err(Error::Shape(format!(
                "{} matrices given for a group of order {}",
                mats.len(),
                group.order()
            )));
        }
        let d = square_dim(mats.first(), "representation")?;
        if mats.iter().any(|m| m.shape() != (d, d)) {
            return Err(Error::Shape("representation matrices differ in size".into()));
        }
        for (g, m) in mats.iter().enumerate() {
            let condition = condition_number(m);
            if !(condition <= MAX_REP_CONDITION) {
                return Err(Error::NotInvertible { element: g, condition });
            }
        }
        let rep = Self { group, mats };
        rep.check_homomorphism()?;
        Ok(rep)
    }

    fn check_homomorphism(&self) -> Result<()> {
        let n = self.group.order();
        let seconds: Vec<usize> = if n * n <= ALL_PAIRS_LIMIT {
            (0..n).collect()
        } else {
            self.group.generators().to_vec()
        };
        for a in 0..n {
            for &b in &seconds {
                let lhs = &self.mats[self.group.mul(a, b)];
                let rhs = &self.mats[a] * &self.mats[b];
                let scale = 1.0f64.max(self.mats[a].max_abs() * self.mats[b].max_abs());
                let residual = (lhs - &rhs).max_abs() / scale;
                if residual > HOMOMORPHISM_TOL {
                    return Err(Error::NotHomomorphism {
                        left: a,
                        right: b,
                        residual,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.mats[0].rows()
    }

    pub fn matrix(&self, g: usize) -> &CMatrix {
        &self.mats[g]
    }

    pub fn matrices(&self) -> &[CMatrix] {
        &self.mats
    }

    /// `max_g ‖ρ(g)‖`.
    pub fn sup_norm(&self) -> f64 {
        self.mats.iter().map(|m| op_norm(m).unwrap_or(0.0)).fold(0.0, f64::max)
    }

    /// `max_g ‖ρ(g)‖ ‖ρ(g)⁻¹‖`, an upper bound for `sup_g ‖Ad ρ(g)‖_cb`.
    pub fn max_condition(&self) -> f64 {
        (0..self.mats.len())
            .map(|g| op_norm(&self.mats[g]).unwrap_or(0.0) * op_norm(self.inverse_matrix(g)).unwrap_or(0.0))
            .fold(0.0, f64::max)
    }

    /// `ρ(g)⁻¹`, taken as `ρ(g⁻¹)`.
    pub fn inverse_matrix(&self, g: usize) -> &CMatrix {
        &self.mats[self.group.inverse(g)]
    }

    /// Contragredient `g ↦ ρ(g⁻¹)ᵀ`.
    pub fn contragredient(&self) -> GroupRep {
        let mats = (0..self.group.order())
            .map(|g| self.inverse_matrix(g).transpose())
            .collect();
        GroupRep {
            group: self.group.clone(),
            mats,
        }
    }

    /// The element's conjugation map `x ↦ ρ(g) x ρ(g)⁻¹`.
    pub fn conjugation(&self, g: usize) -> SuperOp {
        SuperOp::sandwich(&self.mats[g], self.inverse_matrix(g)).expect("square")
    }
}

fn square_dim(m: Option<&CMatrix>, what: &str) -> Result<usize> {
    let m = m.ok_or_else(|| Error::Shape(format!("{what} has no matrices")))?;
    if !m.is_square() {
        return Err(Error::Shape(format!("{what} matrices must be square")));
    }
    Ok(m.rows())
}

/// Growth record of the power-boundedness probe for one generator.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerProbe {
    pub horizon: usize,
    /// `max ‖α^m‖` over `m ≤ horizon/2` and over `horizon/2 < m ≤ horizon`,
    /// natural-matrix spectral norms.
    pub first_half_max: f64,
    pub second_half_max: f64,
    /// Largest cb-norm bound over the probed powers.
    pub cb_cap: f64,
}

impl PowerProbe {
    pub fn growth(&self) -> f64 {
        self.second_half_max / self.first_half_max.max(f64::MIN_POSITIVE)
    }
}

/// The probe fails when the late powers exceed the early ones by this factor.
pub const PROBE_GROWTH_LIMIT: f64 = 1.25;

#[derive(Debug, Clone, PartialEq)]
pub enum Assignment {
    /// `α_g = Ad ρ(g)`.
    Conjugation(GroupRep),
    /// One map per group element.
    Maps(Vec<SuperOp>),
    /// `α_θ = Ad diag(e^{i w_j θ})`.
    Circle(Vec<i64>),
    /// Commuting generators of `ℕ^d`.
    Generators(Vec<SuperOp>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemigroupAction {
    semigroup: SemigroupDesc,
    dim: usize,
    assignment: Assignment,
    norm_cap: f64,
    probes: Vec<PowerProbe>,
    notes: Vec<String>,
}

/// `cb`-norm cap of a single map: exact for CP maps, factorization bound
/// otherwise.
fn map_cap(op: &SuperOp) -> f64 {
    if op.is_completely_positive(1e-9) {
        if let Ok(v) = cb_norm_cp(op, 1e-9) {
            return v;
        }
    }
    cb_norm_factorization_bound(op)
}

/// `α_g = Ad ρ(g)`; the norm cap is `max_g ‖ρ(g)‖ ‖ρ(g)⁻¹‖`.
pub fn build_conjugation_action(semigroup: SemigroupDesc, rep: GroupRep) -> Result<SemigroupAction> {
    match semigroup.finite_group() {
        Some(g) if *g == rep.group => {}
        Some(_) => return Err(Error::InvalidSemigroup("representation belongs to another group".into())),
        None => {
            return Err(Error::InvalidSemigroup(
                "conjugation actions need a finite group".into(),
            ))
        }
    }
    let norm_cap = rep.max_condition();
    Ok(SemigroupAction {
        semigroup,
        dim: rep.dim(),
        norm_cap,
        assignment: Assignment::Conjugation(rep),
        probes: Vec::new(),
        notes: Vec::new(),
    })
}

/// Action of a finite group by arbitrary maps given on the generators and
/// extended along words.
pub fn build_map_action(semigroup: SemigroupDesc, generator_maps: &[SuperOp]) -> Result<SemigroupAction> {
    let group = semigroup
        .finite_group()
        .ok_or_else(|| Error::InvalidSemigroup("map lists need a finite group".into()))?;
    if generator_maps.len() != group.generators().len() {
        return Err(Error::Shape(format!(
            "{} maps given for {} generators",
            generator_maps.len(),
            group.generators().len()
        )));
    }
    let d = square_map_dim(generator_maps)?;
    let maps = (0..group.order())
        .map(|g| {
            group
                .word(g)
                .iter()
                .fold(SuperOp::identity(d), |acc, &gi| acc.compose(&generator_maps[gi]).expect("shape"))
        })
        .collect();
    build_element_map_action(semigroup, maps)
}

/// Action of a finite group given by one map per element; checked to be a
/// homomorphism.
pub fn build_element_map_action(semigroup: SemigroupDesc, maps: Vec<SuperOp>) -> Result<SemigroupAction> {
    let group = semigroup
        .finite_group()
        .ok_or_else(|| Error::InvalidSemigroup("map lists need a finite group".into()))?;
    if maps.len() != group.order() {
        return Err(Error::Shape(format!(
            "{} maps given for a group of order {}",
            maps.len(),
            group.order()
        )));
    }
    let d = square_map_dim(&maps)?;
    let n = group.order();
    let seconds: Vec<usize> = if n * n <= ALL_PAIRS_LIMIT {
        (0..n).collect()
    } else {
        group.generators().to_vec()
    };
    let id_residual = maps[0].distance(&SuperOp::identity(d));
    if id_residual > HOMOMORPHISM_TOL {
        return Err(Error::NotHomomorphism {
            left: 0,
            right: 0,
            residual: id_residual,
        });
    }
    for a in 0..n {
        for &b in &seconds {
            let lhs = &maps[group.mul(a, b)];
            let rhs = maps[a].compose(&maps[b])?;
            let scale = 1.0f64.max(maps[a].natural().max_abs() * maps[b].natural().max_abs());
            let residual = lhs.distance(&rhs) / scale;
            if residual > HOMOMORPHISM_TOL {
                return Err(Error::NotHomomorphism {
                    left: a,
                    right: b,
                    residual,
                });
            }
        }
    }
    let norm_cap = maps.iter().map(map_cap).fold(0.0, f64::max);
    Ok(SemigroupAction {
        semigroup,
        dim: d,
        norm_cap,
        assignment: Assignment::Maps(maps),
        probes: Vec::new(),
        notes: Vec::new(),
    })
}

fn square_map_dim(maps: &[SuperOp]) -> Result<usize> {
    let d = maps
        .first()
        .ok_or_else(|| Error::Shape("no maps given".into()))?
        .in_dim();
    if maps.iter().any(|m| m.in_dim() != d || m.out_dim() != d) {
        return Err(Error::Shape("action maps must all act on the same M_d".into()));
    }
    Ok(d)
}

/// `α_θ = Ad diag(e^{i w₁ θ}, …)`; unitary, so the norm cap is 1.
pub fn build_circle_action(weights: &[i64]) -> Result<SemigroupAction> {
    if weights.is_empty() {
        return Err(Error::Shape("circle action needs at least one weight".into()));
    }
    if let Some(w) = weights.iter().find(|w| w.abs() > MAX_CIRCLE_WEIGHT) {
        return Err(Error::InvalidSemigroup(format!(
            "circle weight {w} exceeds {MAX_CIRCLE_WEIGHT} in magnitude"
        )));
    }
    Ok(SemigroupAction {
        semigroup: SemigroupDesc::Circle,
        dim: weights.len(),
        norm_cap: 1.0,
        assignment: Assignment::Circle(weights.to_vec()),
        probes: Vec::new(),
        notes: Vec::new(),
    })
}

/// `ℕ^d` acting through commuting generators. Commutation is checked to
/// `1e-10` and each generator is probed for power-boundedness over
/// `horizon` powers.
pub fn build_monoid_action(generators: Vec<SuperOp>, horizon: usize) -> Result<SemigroupAction> {
    let d = square_map_dim(&generators)?;
    if horizon < 2 {
        return Err(Error::InvalidSemigroup("probe horizon must be at least 2".into()));
    }
    for a in 0..generators.len() {
        for b in a + 1..generators.len() {
            let ab = generators[a].compose(&generators[b])?;
            let ba = generators[b].compose(&generators[a])?;
            let scale = 1.0f64.max(generators[a].natural().max_abs() * generators[b].natural().max_abs());
            let residual = ab.distance(&ba) / scale;
            if residual > HOMOMORPHISM_TOL {
                return Err(Error::NotCommuting {
                    left: a,
                    right: b,
                    residual,
                });
            }
        }
    }
    let mut probes = Vec::with_capacity(generators.len());
    for (gi, g) in generators.iter().enumerate() {
        let probe = power_probe(g, horizon);
        let bad = !probe.first_half_max.is_finite()
            || !probe.second_half_max.is_finite()
            || probe.growth() > PROBE_GROWTH_LIMIT;
        if bad {
            return Err(Error::NotPowerBounded {
                generator: gi,
                horizon,
                growth: probe.growth(),
            });
        }
        probes.push(probe);
    }
    let norm_cap = probes.iter().map(|p| p.cb_cap).product();
    Ok(SemigroupAction {
        semigroup: SemigroupDesc::CommutingMonoid {
            generators: generators.len(),
        },
        dim: d,
        norm_cap,
        assignment: Assignment::Generators(generators),
        probes,
        notes: Vec::new(),
    })
}

/// Norms of `α, α², …, α^horizon` (natural-matrix spectral norm) and the
/// largest cb bound among them, including `α⁰ = id`.
pub fn power_probe(g: &SuperOp, horizon: usize) -> PowerProbe {
    let half = horizon / 2;
    let mut first = 1.0f64; // α⁰
    let mut second = 0.0f64;
    let mut cb_cap = 1.0f64;
    let mut power = g.clone();
    for m in 1..=horizon {
        let norm = power.natural_norm();
        if m <= half {
            first = first.max(norm);
        } else {
            second = second.max(norm);
        }
        if !norm.is_finite() {
            second = f64::INFINITY;
            break;
        }
        cb_cap = cb_cap.max(map_cap(&power));
        if m < horizon {
            power = power.compose(g).expect("square");
        }
    }
    PowerProbe {
        horizon,
        first_half_max: first,
        second_half_max: second,
        cb_cap,
    }
}

impl SemigroupAction {
    pub fn semigroup(&self) -> &SemigroupDesc {
        &self.semigroup
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn assignment(&self) -> &Assignment {
        &self.assignment
    }

    /// Upper estimate of `sup_s ‖α_s‖_cb`.
    pub fn norm_cap(&self) -> f64 {
        self.norm_cap
    }

    pub fn probes(&self) -> &[PowerProbe] {
        &self.probes
    }

    /// Caveats attached at construction, e.g. for monoid duals.
    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    /// Number of elements for finite groups.
    pub fn order(&self) -> Option<usize> {
        self.semigroup.finite_group().map(|g| g.order())
    }

    /// Circle weights, for circle actions.
    pub fn weights(&self) -> Option<&[i64]> {
        match &self.assignment {
            Assignment::Circle(w) => Some(w),
            _ => None,
        }
    }

    /// The map of group element `g`.
    pub fn element_op(&self, g: usize) -> SuperOp {
        match &self.assignment {
            Assignment::Conjugation(rep) => rep.conjugation(g),
            Assignment::Maps(maps) => maps[g].clone(),
            _ => panic!("element_op needs a finite group action"),
        }
    }

    pub fn circle_op(weights: &[i64], theta: f64) -> SuperOp {
        let phases: Vec<C64> = weights
            .iter()
            .map(|&w| C64::from_polar(1.0, w as f64 * theta))
            .collect();
        let d = weights.len();
        // entry (i, j) picks up e^{i(w_i − w_j)θ}
        let diag: Vec<C64> = (0..d * d)
            .map(|v| {
                let (i, j) = (v % d, v / d);
                phases[i] * phases[j].conj()
            })
            .collect();
        SuperOp::from_natural(d, d, CMatrix::diag(&diag)).expect("shape")
    }

    /// The map of an arbitrary element.
    pub fn op(&self, e: &Element) -> Result<SuperOp> {
        match (&self.assignment, e) {
            (Assignment::Conjugation(_) | Assignment::Maps(_), Element::Group(g)) => {
                let n = self.order().unwrap();
                if *g >= n {
                    return Err(Error::InvalidSemigroup(format!("element {g} out of range")));
                }
                Ok(self.element_op(*g))
            }
            (Assignment::Circle(w), Element::Angle(theta)) => Ok(Self::circle_op(w, *theta)),
            (Assignment::Generators(gens), Element::Power(exps)) => {
                if exps.len() != gens.len() {
                    return Err(Error::Shape("one exponent per generator required".into()));
                }
                let mut out = SuperOp::identity(self.dim);
                for (g, &m) in gens.iter().zip(exps) {
                    out = out.compose(&g.pow(m))?;
                }
                Ok(out)
            }
            _ => Err(Error::InvalidSemigroup(format!(
                "element {e:?} does not belong to a {} action",
                self.semigroup.kind_name()
            ))),
        }
    }

    /// Semigroup product `a·b`.
    pub fn multiply(&self, a: &Element, b: &Element) -> Result<Element> {
        match (a, b) {
            (Element::Group(x), Element::Group(y)) => {
                let g = self
                    .semigroup
                    .finite_group()
                    .ok_or_else(|| Error::InvalidSemigroup("not a finite group".into()))?;
                Ok(Element::Group(g.mul(*x, *y)))
            }
            (Element::Angle(x), Element::Angle(y)) => Ok(Element::Angle((x + y).rem_euclid(TAU))),
            (Element::Power(x), Element::Power(y)) if x.len() == y.len() => {
                Ok(Element::Power(x.iter().zip(y).map(|(a, b)| a + b).collect()))
            }
            _ => Err(Error::InvalidSemigroup("elements of different kinds".into())),
        }
    }

    /// Maps whose common fixed space is `X^S`: the generators of a finite
    /// group or monoid, and for the circle one rotation by an irrational
    /// multiple of `π`, whose fixed space is exactly the frequency-zero
    /// pattern.
    pub fn generator_ops(&self) -> Vec<SuperOp> {
        match &self.assignment {
            Assignment::Conjugation(_) | Assignment::Maps(_) => {
                let g = self.semigroup.finite_group().unwrap();
                g.generators().iter().map(|&x| self.element_op(x)).collect()
            }
            Assignment::Circle(w) => vec![Self::circle_op(w, 1.0)],
            Assignment::Generators(gens) => gens.clone(),
        }
    }

    /// Elements used for invariance checks: every group element, a few
    /// circle angles, and the monoid generators.
    pub fn check_ops(&self) -> Vec<SuperOp> {
        match &self.assignment {
            Assignment::Conjugation(_) | Assignment::Maps(_) => {
                (0..self.order().unwrap()).map(|g| self.element_op(g)).collect()
            }
            Assignment::Circle(w) => [1.0, std::f64::consts::SQRT_2, TAU / 7.0, 2.5]
                .iter()
                .map(|&t| Self::circle_op(w, t))
                .collect(),
            Assignment::Generators(gens) => gens.clone(),
        }
    }

    /// Largest `‖α_{st} − α_s ∘ α_t‖` over the pairs the semigroup kind
    /// allows checking (entrywise on natural matrices).
    pub fn homomorphism_defect(&self) -> f64 {
        match &self.assignment {
            Assignment::Conjugation(_) | Assignment::Maps(_) => {
                let g = self.semigroup.finite_group().unwrap();
                let ops: Vec<SuperOp> = (0..g.order()).map(|x| self.element_op(x)).collect();
                let mut worst = 0.0f64;
                for a in 0..g.order() {
                    for &b in g.generators() {
                        let rhs = ops[a].compose(&ops[b]).expect("shape");
                        worst = worst.max(ops[g.mul(a, b)].distance(&rhs));
                    }
                }
                worst
            }
            Assignment::Circle(w) => {
                let a = Self::circle_op(w, 0.7);
                let b = Self::circle_op(w, 1.9);
                Self::circle_op(w, 2.6).distance(&a.compose(&b).expect("shape"))
            }
            Assignment::Generators(gens) => {
                let mut worst = 0.0f64;
                for a in gens {
                    for b in gens {
                        let ab = a.compose(b).expect("shape");
                        let ba = b.compose(a).expect("shape");
                        worst = worst.max(ab.distance(&ba));
                    }
                }
                worst
            }
        }
    }

    /// True when every element acts by a `*`-automorphism (unitary
    /// conjugation), so that duals preserve states.
    pub fn is_automorphic(&self) -> bool {
        match &self.assignment {
            Assignment::Conjugation(rep) => rep.matrices().iter().all(|m| {
                (&(&m.adjoint() * m) - &CMatrix::identity(m.rows())).max_abs() <= 1e-10
            }),
            Assignment::Circle(_) => true,
            Assignment::Maps(maps) => maps.iter().all(|m| {
                m.is_completely_positive(1e-9)
                    && m.kraus(1e-9).map(|k| k.len() == 1).unwrap_or(false)
                    && m.apply(&CMatrix::identity(m.in_dim()))
                        .map(|y| y.approx_eq(&CMatrix::identity(m.in_dim()), 1e-10))
                        .unwrap_or(false)
            }),
            Assignment::Generators(_) => false,
        }
    }
}

/// Dual action under `⟨y, x⟩ = tr(yᵀ x)`: `β_g = (α_{g⁻¹})'` for groups.
/// Monoids have no inverses, so there the plain dual `β_g = α_g'` is used
/// and the result carries a note.
pub fn dual_action(a: &SemigroupAction) -> SemigroupAction {
    let mut out = match &a.assignment {
        Assignment::Conjugation(rep) => SemigroupAction {
            semigroup: a.semigroup.clone(),
            dim: a.dim,
            norm_cap: rep.contragredient().max_condition(),
            assignment: Assignment::Conjugation(rep.contragredient()),
            probes: Vec::new(),
            notes: Vec::new(),
        },
        Assignment::Maps(maps) => {
            let g = a.semigroup.finite_group().unwrap();
            let duals: Vec<SuperOp> = (0..g.order()).map(|x| maps[g.inverse(x)].dual()).collect();
            SemigroupAction {
                semigroup: a.semigroup.clone(),
                dim: a.dim,
                norm_cap: duals.iter().map(map_cap).fold(0.0, f64::max),
                assignment: Assignment::Maps(duals),
                probes: Vec::new(),
                notes: Vec::new(),
            }
        }
        Assignment::Circle(w) => SemigroupAction {
            semigroup: SemigroupDesc::Circle,
            dim: a.dim,
            norm_cap: 1.0,
            // (Ad D_{−θ})' = Ad D_{−θ} for diagonal D
            assignment: Assignment::Circle(w.iter().map(|x| -x).collect()),
            probes: Vec::new(),
            notes: Vec::new(),
        },
        Assignment::Generators(gens) => {
            let duals: Vec<SuperOp> = gens.iter().map(|g| g.dual()).collect();
            let probes: Vec<PowerProbe> = a
                .probes
                .iter()
                .zip(&duals)
                .map(|(p, g)| power_probe(g, p.horizon))
                .collect();
            SemigroupAction {
                semigroup: a.semigroup.clone(),
                dim: a.dim,
                norm_cap: probes.iter().map(|p| p.cb_cap).product(),
                assignment: Assignment::Generators(duals),
                probes,
                notes: vec!["monoid dual uses the plain dual of each generator (no inverses)".into()],
            }
        }
    };
    out.notes.extend(a.notes.iter().cloned());
    out
}

/// Sampled coefficient function `s ↦ ⟨ψ, α_s(x)⟩ = tr(ψᵀ α_s(x))`.
#[derive(Debug, Clone)]
pub struct CoefficientSample {
    pub x: CMatrix,
    pub psi: CMatrix,
    pub samples: Vec<(Element, C64)>,
}

pub fn coefficient_sample(
    a: &SemigroupAction,
    x: &CMatrix,
    psi: &CMatrix,
    elements: &[Element],
) -> Result<CoefficientSample> {
    let samples = elements
        .iter()
        .map(|e| Ok((e.clone(), psi.pairing(&a.op(e)?.apply(x)?))))
        .collect::<Result<Vec<_>>>()?;
    Ok(CoefficientSample {
        x: x.clone(),
        psi: psi.clone(),
        samples,
    })
}

/// Largest gap between `(L_t f_{x,ψ})(s) = f_{x,ψ}(t s)` and
/// `f_{x, α_t' ψ}(s)` over the sampled `s`.
pub fn shift_covariance_defect(
    a: &SemigroupAction,
    x: &CMatrix,
    psi: &CMatrix,
    t: &Element,
    elements: &[Element],
) -> Result<f64> {
    let shifted: Vec<Element> = elements
        .iter()
        .map(|s| a.multiply(t, s))
        .collect::<Result<_>>()?;
    let lhs = coefficient_sample(a, x, psi, &shifted)?;
    let moved = a.op(t)?.dual().apply(psi)?;
    let rhs = coefficient_sample(a, x, &moved, elements)?;
    Ok(lhs
        .samples
        .iter()
        .zip(&rhs.samples)
        .map(|((_, l), (_, r))| (l - r).norm())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z2(rep: CMatrix) -> SemigroupAction {
        let g = FiniteGroup::cyclic(2).unwrap();
        let r = GroupRep::from_generator_images(g.clone(), rep.rows(), &[rep]).unwrap();
        build_conjugation_action(SemigroupDesc::Cyclic(g), r).unwrap()
    }

    #[test]
    fn cyclic_and_symmetric_groups() {
        let c = FiniteGroup::cyclic(5).unwrap();
        assert_eq!(c.order(), 5);
        assert_eq!(c.mul(3, 4), 2);
        assert_eq!(c.inverse(2), 3);
        let s3 = FiniteGroup::symmetric(3).unwrap();
        assert_eq!(s3.order(), 6);
        for a in 0..6 {
            assert_eq!(s3.mul(a, s3.inverse(a)), 0);
            let w = s3.word(a);
            let rebuilt = w.iter().fold(0, |acc, &gi| s3.mul(acc, s3.generators()[gi]));
            assert_eq!(rebuilt, a);
        }
        assert_eq!(FiniteGroup::symmetric(5).unwrap().order(), 120);
    }

    #[test]
    fn table_validation() {
        let labels = vec!["e".to_string(), "a".to_string()];
        assert!(FiniteGroup::from_table(labels.clone(), vec![vec![0, 1], vec![1, 0]]).is_ok());
        // no inverse for a
        let err = FiniteGroup::from_table(labels.clone(), vec![vec![0, 1], vec![1, 1]]).unwrap_err();
        assert!(matches!(err, Error::InvalidSemigroup(_)));
        // identity listed second
        let g = FiniteGroup::from_table(vec!["a".into(), "e".into()], vec![vec![1, 0], vec![0, 1]]).unwrap();
        assert_eq!(g.label(0), "e");
    }

    #[test]
    fn non_associative_table_rejected() {
        // a loop of order 5 that is not a group
        let t = vec![
            vec![0, 1, 2, 3, 4],
            vec![1, 0, 3, 4, 2],
            vec![2, 4, 0, 1, 3],
            vec![3, 2, 4, 0, 1],
            vec![4, 3, 1, 2, 0],
        ];
        let labels = (0..5).map(|i| i.to_string()).collect();
        let err = FiniteGroup::from_table(labels, t).unwrap_err();
        assert!(err.to_string().contains("associative"), "{err}");
    }

    #[test]
    fn closure_cap_enforced() {
        // S_8 has 40320 elements
        let err = FiniteGroup::symmetric(8).unwrap_err();
        assert!(err.to_string().contains("cap"), "{err}");
    }

    #[test]
    fn trivial_group_gives_identity_action() {
        let g = FiniteGroup::cyclic(1).unwrap();
        let r = GroupRep::from_elements(g.clone(), vec![CMatrix::identity(2)]).unwrap();
        let a = build_conjugation_action(SemigroupDesc::Cyclic(g), r).unwrap();
        assert_eq!(a.element_op(0), SuperOp::identity(2));
        assert!((a.norm_cap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pinching_action_cap() {
        let a = z2(CMatrix::diag_real(&[1.0, -1.0]));
        assert!((a.norm_cap() - 1.0).abs() < 1e-12);
        let up = crate::cbnorm::cb_norm_upper(&a.element_op(1), 1e-7).unwrap().value;
        assert!((up - 1.0).abs() < 1e-6);
    }

    #[test]
    fn non_unitary_cap() {
        let a = z2(CMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, -1.0]));
        let golden = (3.0 + 5f64.sqrt()) / 2.0;
        assert!((a.norm_cap() - golden).abs() < 1e-12, "{}", a.norm_cap());
        let up = crate::cbnorm::cb_norm_upper(&a.element_op(1), 1e-7).unwrap().value;
        assert!(up <= a.norm_cap() + 1e-6);
    }

    #[test]
    fn non_homomorphism_names_pair() {
        let g = FiniteGroup::cyclic(2).unwrap();
        let err = GroupRep::from_generator_images(g, 2, &[CMatrix::diag_real(&[1.0, 2.0])]).unwrap_err();
        assert!(matches!(err, Error::NotHomomorphism { left: 1, right: 1, .. }), "{err:?}");
    }

    #[test]
    fn singular_rep_rejected() {
        let g = FiniteGroup::cyclic(1).unwrap();
        let err = GroupRep::from_elements(g, vec![CMatrix::diag_real(&[1.0, 0.0])]).unwrap_err();
        assert!(matches!(err, Error::NotInvertible { .. }));
    }

    #[test]
    fn circle_actions() {
        let a = build_circle_action(&[0, 0]).unwrap();
        assert!(a.op(&Element::Angle(1.3)).unwrap().distance(&SuperOp::identity(2)) < 1e-15);
        let a = build_circle_action(&[0, 1]).unwrap();
        let x = CMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let y = a.op(&Element::Angle(0.3)).unwrap().apply(&x).unwrap();
        assert!((y[(0, 1)] - C64::from_polar(2.0, -0.3)).norm() < 1e-15);
        assert!((y[(1, 0)] - C64::from_polar(3.0, 0.3)).norm() < 1e-15);
        let a = build_circle_action(&[0, 1, 2]).unwrap();
        let op = a.op(&Element::Angle(TAU)).unwrap();
        assert!(op.distance(&SuperOp::identity(3)) < 1e-12);
        // frequency matrix w_i − w_j
        let e = a.op(&Element::Angle(0.25)).unwrap().apply(&CMatrix::from_fn(3, 3, |_, _| C64::new(1.0, 0.0))).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let f = i as f64 - j as f64;
                assert!((e[(i, j)] - C64::from_polar(1.0, 0.25 * f)).norm() < 1e-15);
            }
        }
        assert!(build_circle_action(&[0, 65]).is_err());
        assert!(a.homomorphism_defect() < 1e-14);
    }

    #[test]
    fn dual_of_unitary_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = FiniteGroup::cyclic(1).unwrap();
        // trivial group dual is trivial
        let r = GroupRep::from_elements(g.clone(), vec![CMatrix::identity(2)]).unwrap();
        let a = build_conjugation_action(SemigroupDesc::Cyclic(g), r).unwrap();
        assert_eq!(dual_action(&a).element_op(0), SuperOp::identity(2));

        // ℤ₄ generated by a unitary of order 4
        let v = CMatrix::random_unitary(3, &mut rng);
        let dgn = CMatrix::diag(&[C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0)]);
        let u = &(&v * &dgn) * &v.adjoint();
        let g4 = FiniteGroup::cyclic(4).unwrap();
        let rep = GroupRep::from_generator_images(g4.clone(), 3, std::slice::from_ref(&u)).unwrap();
        let a = build_conjugation_action(SemigroupDesc::Cyclic(g4), rep).unwrap();
        let b = dual_action(&a);
        let expected = SuperOp::unitary_conjugation(&u.conj()).unwrap();
        assert!(b.element_op(1).distance(&expected) < 1e-12);
        assert!(b.homomorphism_defect() < 1e-10);
        let bb = dual_action(&b);
        for x in 0..4 {
            assert!(bb.element_op(x).distance(&a.element_op(x)) < 1e-12);
        }
    }

    #[test]
    fn dual_of_map_action_matches_conjugation_dual() {
        let rho = CMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, -1.0]);
        let g = FiniteGroup::cyclic(2).unwrap();
        let maps = build_map_action(SemigroupDesc::Cyclic(g.clone()), &[SuperOp::conjugation(&rho).unwrap()]).unwrap();
        let conj = z2(rho);
        let (dm, dc) = (dual_action(&maps), dual_action(&conj));
        for x in 0..2 {
            assert!(dm.element_op(x).distance(&dc.element_op(x)) < 1e-12);
        }
    }

    #[test]
    fn circle_dual_negates_weights() {
        let a = build_circle_action(&[0, 1, 3]).unwrap();
        let b = dual_action(&a);
        assert_eq!(b.weights().unwrap(), &[0, -1, -3]);
        let t = 0.4;
        let expected = a.op(&Element::Angle(-t)).unwrap().dual();
        assert!(b.op(&Element::Angle(t)).unwrap().distance(&expected) < 1e-15);
    }

    #[test]
    fn monoid_checks() {
        let p = SuperOp::unitary_conjugation(&CMatrix::diag(&[C64::new(1.0, 0.0), C64::new(0.0, 1.0)])).unwrap();
        let a = build_monoid_action(vec![p.clone(), SuperOp::pinching(2)], 64).unwrap();
        assert!((a.norm_cap() - 1.0).abs() < 1e-12);
        let err = build_monoid_action(vec![p, SuperOp::transpose_map(2)], 64).unwrap_err();
        assert!(matches!(err, Error::NotCommuting { .. }));
        // x ↦ 1.01 x grows
        let grow = SuperOp::identity(2).scale(C64::new(1.01, 0.0));
        let err = build_monoid_action(vec![grow], 256).unwrap_err();
        assert!(err.to_string().contains("not power-bounded up to horizon"));
        // Jordan block on the natural matrix: linear growth
        let n = CMatrix::from_fn(4, 4, |i, j| {
            if i == j || (i == 0 && j == 1) {
                C64::new(1.0, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let jordan = SuperOp::from_natural(2, 2, n).unwrap();
        assert!(build_monoid_action(vec![jordan], 256).is_err());
        let d = dual_action(&build_monoid_action(vec![SuperOp::pinching(2)], 16).unwrap());
        assert_eq!(d.notes().len(), 1);
    }

    #[test]
    fn shift_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let x = CMatrix::random_gaussian(2, 2, &mut rng);
        let psi = CMatrix::random_gaussian(2, 2, &mut rng);
        let rho = CMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, -1.0]);
        let a = z2(rho);
        let els = [Element::Group(0), Element::Group(1)];
        assert!(shift_covariance_defect(&a, &x, &psi, &Element::Group(1), &els).unwrap() < 1e-12);

        let c = build_circle_action(&[0, 2]).unwrap();
        let els: Vec<Element> = (0..5).map(|k| Element::Angle(0.3 * k as f64)).collect();
        assert!(shift_covariance_defect(&c, &x, &psi, &Element::Angle(0.7), &els).unwrap() < 1e-12);

        let m = build_monoid_action(vec![SuperOp::pinching(2).scale(C64::new(0.5, 0.0))], 16).unwrap();
        let els: Vec<Element> = (0..4).map(|k| Element::Power(vec![k])).collect();
        assert!(shift_covariance_defect(&m, &x, &psi, &Element::Power(vec![2]), &els).unwrap() < 1e-12);

        let s = coefficient_sample(&a, &x, &psi, &[Element::Group(1)]).unwrap();
        let direct = psi.pairing(&a.element_op(1).apply(&x).unwrap());
        assert_eq!(s.samples[0].1, direct);
    }

    #[test]
    fn unitary_reps_have_unit_cb_norms() {
        let s3 = FiniteGroup::symmetric(3).unwrap();
        let h = 3f64.sqrt() / 2.0;
        // standard 2-dim irrep: swap ↦ reflection, 3-cycle ↦ rotation by 2π/3
        let refl = CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let rot = CMatrix::from_real(2, 2, &[-0.5, -h, h, -0.5]);
        let rep = GroupRep::from_generator_images(s3.clone(), 2, &[refl, rot]).unwrap();
        let a = build_conjugation_action(SemigroupDesc::FiniteGroup(s3), rep).unwrap();
        for g in 0..6 {
            let up = crate::cbnorm::cb_norm_upper(&a.element_op(g), 1e-7).unwrap().value;
            assert!((up - 1.0).abs() < 1e-6);
        }
        assert!(a.is_automorphic());
    }
}
