//! Finite group models of the Galois groups around ring class fields.
//!
//! Abelian groups are given by invariant factors, elements by coordinate
//! tuples. Generalized dihedral groups `H x| Z/2` have the flip acting on `H`
//! by inversion; the Galois group of a ring class field over `Q` is of this
//! shape with `H` the Picard group.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::abelian::smith_invariants;
use crate::error::{Error, Result};
use crate::quadform::{class_group, Discriminant};

/// A finite abelian group `Z/d1 x ... x Z/dk` with `d1 | d2 | ... | dk`, all `> 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FinAbGroup {
    elementary_divisors: Vec<u64>,
}

pub type Element = Vec<u64>;

impl FinAbGroup {
    /// Group with the given invariant factors. Fails unless they form a divisor chain `> 1`.
    pub fn new(elementary_divisors: Vec<u64>) -> Result<Self> {
        let chain = elementary_divisors.iter().all(|&d| d > 1)
            && elementary_divisors.windows(2).all(|w| w[1] % w[0] == 0);
        if !chain {
            return Err(Error::Precondition(format!(
                "{elementary_divisors:?} is not an invariant factor chain"
            )));
        }
        Ok(Self { elementary_divisors })
    }

    /// `Z/n1 x Z/n2 x ...` for arbitrary cyclic orders, normalized to invariant factors.
    pub fn from_cyclic_orders(orders: &[u64]) -> Result<Self> {
        if orders.contains(&0) {
            return Err(Error::OutOfRange("cyclic factor of order 0".into()));
        }
        let rows: Vec<Vec<i64>> = (0..orders.len())
            .map(|i| {
                let mut r = vec![0; orders.len()];
                r[i] = orders[i] as i64;
                r
            })
            .collect();
        Self::new(smith_invariants(&rows, orders.len()))
    }

    pub fn trivial() -> Self {
        Self {
            elementary_divisors: vec![],
        }
    }

    pub fn elementary_divisors(&self) -> &[u64] {
        &self.elementary_divisors
    }

    pub fn rank(&self) -> usize {
        self.elementary_divisors.len()
    }

    pub fn order(&self) -> u64 {
        self.elementary_divisors.iter().product()
    }

    pub fn exponent(&self) -> u64 {
        self.elementary_divisors.last().copied().unwrap_or(1)
    }

    pub fn zero(&self) -> Element {
        vec![0; self.rank()]
    }

    pub fn contains(&self, x: &[u64]) -> bool {
        x.len() == self.rank() && x.iter().zip(&self.elementary_divisors).all(|(a, d)| a < d)
    }

    pub fn add(&self, x: &[u64], y: &[u64]) -> Element {
        x.iter()
            .zip(y)
            .zip(&self.elementary_divisors)
            .map(|((a, b), d)| (a + b) % d)
            .collect()
    }

    pub fn neg(&self, x: &[u64]) -> Element {
        x.iter()
            .zip(&self.elementary_divisors)
            .map(|(a, d)| (d - a) % d)
            .collect()
    }

    pub fn scale(&self, x: &[u64], n: u64) -> Element {
        x.iter()
            .zip(&self.elementary_divisors)
            .map(|(a, d)| ((*a as u128 * n as u128) % *d as u128) as u64)
            .collect()
    }

    /// All elements in mixed-radix order. Intended for small groups.
    pub fn elements(&self) -> Vec<Element> {
        let mut out = vec![vec![]];
        for &d in &self.elementary_divisors {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..d).map(move |a| {
                        let mut e = prefix.clone();
                        e.push(a);
                        e
                    })
                })
                .collect();
        }
        out
    }

    /// Relation rows `d_i e_i` presenting the group.
    fn relations(&self) -> Vec<Vec<i64>> {
        (0..self.rank())
            .map(|i| {
                let mut r = vec![0; self.rank()];
                r[i] = self.elementary_divisors[i] as i64;
                r
            })
            .collect()
    }

    /// The quotient by a subgroup, via Smith normal form of the presentation.
    pub fn quotient(&self, h: &Subgroup) -> Result<FinAbGroup> {
        h.check_ambient(self)?;
        let mut rows = self.relations();
        rows.extend(h.generators.iter().map(|g| to_row(g)));
        FinAbGroup::new(smith_invariants(&rows, self.rank()))
    }

    /// All subgroups, each with a generating set. Exponential; small groups only.
    pub fn all_subgroups(&self) -> Result<Vec<Subgroup>> {
        const LIMIT: u64 = 256;
        if self.order() > LIMIT {
            return Err(Error::ResourceLimit(format!(
                "subgroup enumeration limited to order {LIMIT}"
            )));
        }
        let elements = self.elements();
        let mut seen: HashSet<Vec<Element>> = HashSet::new();
        let mut queue = VecDeque::new();
        let trivial = Subgroup {
            generators: vec![],
        };
        seen.insert(trivial.elements(self));
        queue.push_back(trivial);
        let mut out = Vec::new();
        while let Some(s) = queue.pop_front() {
            let members: HashSet<Element> = s.elements(self).into_iter().collect();
            for g in &elements {
                if members.contains(g) {
                    continue;
                }
                let mut gens = s.generators.clone();
                gens.push(g.clone());
                let t = Subgroup { generators: gens };
                if seen.insert(t.elements(self)) {
                    queue.push_back(t);
                }
            }
            out.push(s);
        }
        Ok(out)
    }
}

impl fmt::Display for FinAbGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.elementary_divisors.is_empty() {
            return f.write_str("Z/1");
        }
        let parts: Vec<String> = self
            .elementary_divisors
            .iter()
            .map(|d| format!("Z/{d}"))
            .collect();
        f.write_str(&parts.join(" x "))
    }
}

fn to_row(x: &[u64]) -> Vec<i64> {
    x.iter().map(|&a| a as i64).collect()
}

/// Subgroup of a [`FinAbGroup`] given by generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subgroup {
    generators: Vec<Element>,
}

impl Subgroup {
    /// The subgroup generated by `generators`; every generator must be an element of `ambient`.
    pub fn generated_by(ambient: &FinAbGroup, generators: Vec<Element>) -> Result<Self> {
        let s = Self { generators };
        s.check_ambient(ambient)?;
        Ok(s)
    }

    pub fn trivial() -> Self {
        Self { generators: vec![] }
    }

    /// Whole group, generated by the standard basis.
    pub fn full(ambient: &FinAbGroup) -> Self {
        let generators = (0..ambient.rank())
            .map(|i| {
                let mut e = ambient.zero();
                e[i] = 1;
                e
            })
            .collect();
        Self { generators }
    }

    /// A subgroup given as an explicit element set, checked for closure.
    pub fn from_elements(ambient: &FinAbGroup, elements: &[Element]) -> Result<Self> {
        let set: HashSet<&Element> = elements.iter().collect();
        if elements.iter().any(|x| !ambient.contains(x)) {
            return Err(Error::NotASubgroup("element outside the ambient group".into()));
        }
        if !set.contains(&ambient.zero()) {
            return Err(Error::NotASubgroup("identity missing".into()));
        }
        for x in elements {
            for y in elements {
                if !set.contains(&ambient.add(x, y)) {
                    return Err(Error::NotASubgroup(format!(
                        "{x:?} + {y:?} is not in the set"
                    )));
                }
            }
        }
        Ok(Self {
            generators: elements.to_vec(),
        })
    }

    fn check_ambient(&self, ambient: &FinAbGroup) -> Result<()> {
        match self.generators.iter().find(|g| !ambient.contains(g)) {
            Some(g) => Err(Error::NotASubgroup(format!(
                "generator {g:?} does not lie in {ambient}"
            ))),
            None => Ok(()),
        }
    }

    pub fn generators(&self) -> &[Element] {
        &self.generators
    }

    /// The sorted element list, by closure under the generators.
    pub fn elements(&self, ambient: &FinAbGroup) -> Vec<Element> {
        let mut set: HashSet<Element> = HashSet::new();
        let mut queue = VecDeque::from([ambient.zero()]);
        set.insert(ambient.zero());
        while let Some(x) = queue.pop_front() {
            for g in &self.generators {
                let y = ambient.add(&x, g);
                if set.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
        }
        let mut v: Vec<Element> = set.into_iter().collect();
        v.sort();
        v
    }

    /// `H1 + H2`.
    pub fn sum(&self, other: &Subgroup) -> Subgroup {
        let mut generators = self.generators.clone();
        generators.extend(other.generators.iter().cloned());
        Subgroup { generators }
    }

    /// `H1 n H2`, by enumeration.
    pub fn intersection(&self, other: &Subgroup, ambient: &FinAbGroup) -> Subgroup {
        let theirs: HashSet<Element> = other.elements(ambient).into_iter().collect();
        let common: Vec<Element> = self
            .elements(ambient)
            .into_iter()
            .filter(|x| theirs.contains(x))
            .collect();
        Subgroup { generators: common }
    }

    pub fn is_contained_in(&self, other: &Subgroup, ambient: &FinAbGroup) -> bool {
        let theirs: HashSet<Element> = other.elements(ambient).into_iter().collect();
        self.generators.iter().all(|g| theirs.contains(g))
    }
}

/// Named subgroups of one ambient group, closed under the sums and
/// intersections requested through it.
#[derive(Debug, Clone)]
pub struct SubgroupLattice {
    pub ambient: FinAbGroup,
    subgroups: BTreeMap<String, Subgroup>,
}

impl SubgroupLattice {
    pub fn new(ambient: FinAbGroup) -> Self {
        let mut subgroups = BTreeMap::new();
        subgroups.insert("0".to_string(), Subgroup::trivial());
        subgroups.insert("G".to_string(), Subgroup::full(&ambient));
        Self { ambient, subgroups }
    }

    pub fn insert(&mut self, name: &str, h: Subgroup) -> Result<()> {
        h.check_ambient(&self.ambient)?;
        self.subgroups.insert(name.to_string(), h);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Subgroup> {
        self.subgroups.get(name)
    }

    fn lookup(&self, name: &str) -> Result<&Subgroup> {
        self.get(name)
            .ok_or_else(|| Error::Precondition(format!("no subgroup named {name}")))
    }

    /// Adds `a + b` under the name `"a+b"` and returns that name.
    pub fn add_sum(&mut self, a: &str, b: &str) -> Result<String> {
        let s = self.lookup(a)?.sum(self.lookup(b)?);
        let name = format!("{a}+{b}");
        self.subgroups.insert(name.clone(), s);
        Ok(name)
    }

    /// Adds `a n b` under the name `"a&b"` and returns that name.
    pub fn add_intersection(&mut self, a: &str, b: &str) -> Result<String> {
        let s = self.lookup(a)?.intersection(self.lookup(b)?, &self.ambient);
        let name = format!("{a}&{b}");
        self.subgroups.insert(name.clone(), s);
        Ok(name)
    }

    pub fn includes(&self, small: &str, big: &str) -> Result<bool> {
        Ok(self
            .lookup(small)?
            .is_contained_in(self.lookup(big)?, &self.ambient))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.subgroups.keys().map(String::as_str)
    }
}

/// Cokernel of `G0 -> G0/H1 x G0/H2, g -> (g + H1, g + H2)`.
///
/// Computed from the presentation of `G0/H1 x G0/H2` modulo the diagonal; the
/// result is isomorphic to `G0 / (H1 + H2)`, the finite form of the
/// restriction-to-intersection identity for abelian extensions.
pub fn cokernel_of_restriction(g0: &FinAbGroup, h1: &Subgroup, h2: &Subgroup) -> Result<FinAbGroup> {
    h1.check_ambient(g0)?;
    h2.check_ambient(g0)?;
    let k = g0.rank();
    let mut rows = Vec::new();
    let block = |x: &[u64], second: bool| {
        let mut r = vec![0i64; 2 * k];
        let off = if second { k } else { 0 };
        for (i, &a) in x.iter().enumerate() {
            r[off + i] = a as i64;
        }
        r
    };
    for (i, &d) in g0.elementary_divisors().iter().enumerate() {
        let mut e = g0.zero();
        e[i] = d;
        rows.push(block(&e, false));
        rows.push(block(&e, true));
        // image of the i-th generator under the diagonal map
        let mut diag = vec![0i64; 2 * k];
        diag[i] = 1;
        diag[k + i] = 1;
        rows.push(diag);
    }
    rows.extend(h1.generators().iter().map(|g| block(g, false)));
    rows.extend(h2.generators().iter().map(|g| block(g, true)));
    FinAbGroup::new(smith_invariants(&rows, 2 * k))
}

/// An element `(h, s)` of `H x| Z/2`; `flip = true` is the nontrivial coset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DihedralElement {
    pub base: Element,
    pub flip: bool,
}

/// The generalized dihedral group `H x| Z/2` with the flip acting by inversion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenDihedralGroup {
    pub base: FinAbGroup,
}

pub fn gen_dihedral(h: &FinAbGroup) -> GenDihedralGroup {
    GenDihedralGroup { base: h.clone() }
}

impl GenDihedralGroup {
    pub fn order(&self) -> u64 {
        2 * self.base.order()
    }

    /// Abelian exactly when inversion is trivial on the base, i.e. `e(H) | 2`.
    pub fn is_abelian(&self) -> bool {
        self.base.exponent() <= 2
    }

    /// Largest element order: `lcm(e(H), 2)` since every flip element is an involution.
    pub fn exponent(&self) -> u64 {
        let e = self.base.exponent();
        if e % 2 == 0 {
            e
        } else {
            2 * e
        }
    }

    pub fn identity(&self) -> DihedralElement {
        DihedralElement {
            base: self.base.zero(),
            flip: false,
        }
    }

    pub fn flip(&self) -> DihedralElement {
        DihedralElement {
            base: self.base.zero(),
            flip: true,
        }
    }

    /// `(h1, s1)(h2, s2) = (h1 + (-1)^s1 h2, s1 + s2)`.
    pub fn mul(&self, x: &DihedralElement, y: &DihedralElement) -> DihedralElement {
        let acted = if x.flip {
            self.base.neg(&y.base)
        } else {
            y.base.clone()
        };
        DihedralElement {
            base: self.base.add(&x.base, &acted),
            flip: x.flip ^ y.flip,
        }
    }

    pub fn inv(&self, x: &DihedralElement) -> DihedralElement {
        if x.flip {
            x.clone()
        } else {
            DihedralElement {
                base: self.base.neg(&x.base),
                flip: false,
            }
        }
    }

    pub fn elements(&self) -> Vec<DihedralElement> {
        let base = self.base.elements();
        [false, true]
            .into_iter()
            .flat_map(|flip| {
                base.iter().map(move |b| DihedralElement {
                    base: b.clone(),
                    flip,
                })
            })
            .collect()
    }

    /// The subgroup `H x {0}`.
    pub fn base_subgroup(&self) -> Vec<DihedralElement> {
        self.base
            .elements()
            .into_iter()
            .map(|base| DihedralElement { base, flip: false })
            .collect()
    }

    /// Closure of a set of elements under multiplication.
    pub fn closure(&self, gens: &[DihedralElement]) -> Vec<DihedralElement> {
        let id = self.identity();
        let mut set: HashSet<DihedralElement> = HashSet::from([id]);
        // only generators that enlarge the subgroup are kept
        let mut used: Vec<&DihedralElement> = Vec::new();
        for g in gens {
            if set.contains(g) {
                continue;
            }
            used.push(g);
            let mut queue: VecDeque<DihedralElement> = set.iter().cloned().collect();
            while let Some(x) = queue.pop_front() {
                for u in &used {
                    let y = self.mul(&x, u);
                    if !set.contains(&y) {
                        set.insert(y.clone());
                        queue.push_back(y);
                    }
                }
            }
        }
        let mut v: Vec<_> = set.into_iter().collect();
        v.sort();
        v
    }

    fn conjugates(&self, g: &DihedralElement) -> Vec<DihedralElement> {
        let mut v: Vec<_> = self
            .elements()
            .iter()
            .map(|x| self.mul(&self.mul(x, g), &self.inv(x)))
            .collect();
        v.sort();
        v.dedup();
        v
    }

    /// Generators of `H` followed by the flip.
    fn generators(&self) -> Vec<DihedralElement> {
        let mut gens: Vec<DihedralElement> = (0..self.base.rank())
            .map(|i| {
                let mut base = self.base.zero();
                base[i] = 1;
                DihedralElement { base, flip: false }
            })
            .collect();
        gens.push(self.flip());
        gens
    }

    /// Smallest normal subgroup containing `gens`.
    pub fn normal_closure(&self, gens: &[DihedralElement]) -> Vec<DihedralElement> {
        let conjugates: Vec<DihedralElement> = gens.iter().flat_map(|g| self.conjugates(g)).collect();
        self.closure(&conjugates)
    }

    pub fn is_normal_subgroup(&self, n: &[DihedralElement]) -> bool {
        let set: HashSet<&DihedralElement> = n.iter().collect();
        if !set.contains(&self.identity()) {
            return false;
        }
        let all = self.elements();
        n.iter().all(|a| {
            n.iter().all(|b| set.contains(&self.mul(a, b)))
                && all
                    .iter()
                    .all(|x| set.contains(&self.mul(&self.mul(x, a), &self.inv(x))))
        })
    }

    /// Whether `G / N` is abelian for a normal subgroup `N`: commutators of
    /// generators lie in `N`.
    pub fn quotient_is_abelian(&self, n: &[DihedralElement]) -> bool {
        let set: HashSet<&DihedralElement> = n.iter().collect();
        let gens = self.generators();
        gens.iter().all(|x| {
            gens.iter().all(|y| {
                let c = self.mul(
                    &self.mul(x, y),
                    &self.mul(&self.inv(x), &self.inv(y)),
                );
                set.contains(&c)
            })
        })
    }

    /// Every normal subgroup, by adjoining one conjugacy class at a time.
    pub fn normal_subgroups(&self) -> Vec<Vec<DihedralElement>> {
        let mut classes: Vec<Vec<DihedralElement>> = self.elements().iter().map(|g| self.conjugates(g)).collect();
        classes.sort();
        classes.dedup();
        let trivial = vec![self.identity()];
        let mut seen: HashSet<Vec<DihedralElement>> = HashSet::from([trivial.clone()]);
        let mut queue = VecDeque::from([trivial]);
        let mut out = Vec::new();
        while let Some(n) = queue.pop_front() {
            let members: HashSet<&DihedralElement> = n.iter().collect();
            for class in &classes {
                if members.contains(&class[0]) {
                    continue;
                }
                // n is normal, so n and the class generate a normal subgroup
                let gens: Vec<DihedralElement> = n.iter().chain(class).cloned().collect();
                let m = self.closure(&gens);
                if seen.insert(m.clone()) {
                    queue.push_back(m);
                }
            }
            out.push(n);
        }
        out
    }
}

/// Exponent of `H / (H n H0)` for a normal subgroup `H0` of `H x| Z/2` with
/// abelian quotient. Such quotients are always killed by 2.
pub fn dihedral_quotient_exponent(h: &FinAbGroup, h0: &[DihedralElement]) -> Result<u64> {
    let g = gen_dihedral(h);
    if !g.is_normal_subgroup(h0) {
        return Err(Error::Precondition("H0 is not a normal subgroup".into()));
    }
    if !g.quotient_is_abelian(h0) {
        return Err(Error::Precondition("G/H0 is not abelian".into()));
    }
    let in_h0: HashSet<&DihedralElement> = h0.iter().collect();
    let mut exponent = 1u64;
    for x in g.base_subgroup() {
        // order of x modulo H n H0
        let mut n = 1u64;
        let mut y = x.clone();
        while !in_h0.contains(&y) {
            y = g.mul(&y, &x);
            n += 1;
        }
        exponent = num_integer::lcm(exponent, n);
    }
    Ok(exponent)
}

fn checked_lcm_of_products(deg_k_over_ki: &[u64], deg_kj_over_k: &[u64]) -> Result<u128> {
    let r = deg_k_over_ki.len();
    let mut l = 1u128;
    for i in 0..r {
        for j in (0..r).filter(|&j| j != i) {
            let prod = deg_k_over_ki[i] as u128 * deg_kj_over_k[j] as u128;
            l = (l / l.gcd(&prod))
                .checked_mul(prod)
                .ok_or(Error::Overflow("lcm of degree products"))?;
        }
    }
    Ok(l)
}

/// `e * lcm_{i != j} [K : K_i][K_j : k]`, an annihilator of
/// `Gal(K_r^ab n L / K_r k^ab)` with `L = K_r prod_{i<r} K_i^ab`.
pub fn theorem1_annihilator(
    deg_k_over_ki: &[u64],
    deg_kj_over_k: &[u64],
    exponent_term: u64,
) -> Result<u128> {
    let r = deg_k_over_ki.len();
    if r < 2 {
        return Err(Error::OutOfRange(format!("need r >= 2 fields, got {r}")));
    }
    if deg_kj_over_k.len() != r {
        return Err(Error::Precondition("degree lists differ in length".into()));
    }
    if exponent_term == 0 || deg_k_over_ki.contains(&0) || deg_kj_over_k.contains(&0) {
        return Err(Error::OutOfRange("degrees must be positive".into()));
    }
    let l = checked_lcm_of_products(deg_k_over_ki, deg_kj_over_k)?;
    l.checked_mul(exponent_term as u128)
        .ok_or(Error::Overflow("theorem1_annihilator"))
}

/// Annihilator `2^(r+1)` of `Gal(K_r^tf n L / K_r)` for `r` distinct CM fields.
///
/// In the CM composite `[K : K_i] = 2^(r-1)`, `[K_j : F] = 2` and the exponent
/// term is 1, giving `2^r`; the dihedral quotient contributes one more factor 2.
pub fn corollary2_annihilator(r: u32) -> Result<u128> {
    if r < 2 {
        return Err(Error::OutOfRange(format!("need r >= 2, got {r}")));
    }
    if r > 63 {
        return Err(Error::Overflow("corollary2_annihilator"));
    }
    let r_us = r as usize;
    let deg_composite = vec![1u64 << (r - 1); r_us];
    let base = theorem1_annihilator(&deg_composite, &vec![2; r_us], 1)?;
    base.checked_mul(2).ok_or(Error::Overflow("corollary2_annihilator"))
}

/// Model of `Gal(K[O]/Q)`: the Picard group of `D`, dihedralized.
pub fn ring_class_galois_model(d: &Discriminant) -> Result<GenDihedralGroup> {
    let cg = class_group(d)?;
    Ok(gen_dihedral(&FinAbGroup::new(cg.elementary_divisors)?))
}
