//! Finite coloured symmetric operads with tabulated operations,
//! symmetric actions and composition, plus morphisms, equivalence and
//! fibration checks, and a JSON file format.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index into the operation table of one operad.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OpId(pub u32);

impl OpId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OpData {
    pub name: String,
    pub inputs: Vec<usize>,
    pub output: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OperadError {
    #[error("unknown colour `{0}`")]
    UnknownColour(String),
    #[error("unknown operation `{0}`")]
    UnknownOp(String),
    #[error("law violated: {0}")]
    Law(String),
    #[error("composition entry missing for `{0}`")]
    MissingComposition(String),
    #[error("action entry missing for `{0}`")]
    MissingAction(String),
    #[error("arity {0} exceeds the bound {1}")]
    ArityBound(usize, usize),
    #[error("bad file: {0}")]
    File(String),
}

/// A finite coloured symmetric operad, tabulated up to an arity bound.
#[derive(Debug, Clone)]
pub struct FiniteOperad {
    pub label: String,
    colours: Vec<String>,
    arity_bound: usize,
    ops: Vec<OpData>,
    by_profile: BTreeMap<(Vec<usize>, usize), Vec<OpId>>,
    units: Vec<OpId>,
    action: BTreeMap<(OpId, Vec<usize>), OpId>,
    compose: BTreeMap<(OpId, Vec<OpId>), OpId>,
}

impl FiniteOperad {
    pub fn colours(&self) -> &[String] {
        &self.colours
    }

    pub fn colour_count(&self) -> usize {
        self.colours.len()
    }

    pub fn colour_index(&self, name: &str) -> Option<usize> {
        self.colours.iter().position(|c| c == name)
    }

    pub fn arity_bound(&self) -> usize {
        self.arity_bound
    }

    pub fn op(&self, id: OpId) -> &OpData {
        &self.ops[id.idx()]
    }

    pub fn op_count(&self) -> usize {
        self.ops.len()
    }

    pub fn op_ids(&self) -> impl Iterator<Item = OpId> + '_ {
        (0..self.ops.len()).map(|i| OpId(i as u32))
    }

    pub fn op_by_name(&self, name: &str) -> Option<OpId> {
        self.ops
            .iter()
            .position(|o| o.name == name)
            .map(|i| OpId(i as u32))
    }

    pub fn unit(&self, colour: usize) -> OpId {
        self.units[colour]
    }

    pub fn is_unit(&self, id: OpId) -> bool {
        self.units.contains(&id)
    }

    pub fn profile_ops(&self, inputs: &[usize], output: usize) -> &[OpId] {
        self.by_profile
            .get(&(inputs.to_vec(), output))
            .map(|v| v.as_slice())
            .unwrap_or(&[])
    }

    /// All profiles with at least one operation.
    pub fn profiles(&self) -> impl Iterator<Item = (&Vec<usize>, usize)> {
        self.by_profile.keys().map(|(i, o)| (i, *o))
    }

    /// The symmetric action: inputs of the result at position i is the
    /// input of `f` at position `perm[i]`.
    pub fn act(&self, f: OpId, perm: &[usize]) -> Result<OpId, OperadError> {
        if perm.iter().enumerate().all(|(i, &p)| i == p) {
            return Ok(f);
        }
        self.action
            .get(&(f, perm.to_vec()))
            .copied()
            .ok_or_else(|| {
                OperadError::MissingAction(format!("{} * {:?}", self.ops[f.idx()].name, perm))
            })
    }

    /// Full grafting composition; the args list length matches the arity
    /// of `f`.
    pub fn compose(&self, f: OpId, args: &[OpId]) -> Result<OpId, OperadError> {
        let fx = &self.ops[f.idx()];
        debug_assert_eq!(fx.inputs.len(), args.len());
        if args.iter().all(|&g| self.is_unit(g)) {
            return Ok(f);
        }
        if self.is_unit(f) && args.len() == 1 {
            return Ok(args[0]);
        }
        let total: usize = args.iter().map(|&g| self.ops[g.idx()].inputs.len()).sum();
        if total > self.arity_bound {
            return Err(OperadError::ArityBound(total, self.arity_bound));
        }
        self.compose.get(&(f, args.to_vec())).copied().ok_or_else(|| {
            OperadError::MissingComposition(format!(
                "{}({})",
                fx.name,
                args.iter()
                    .map(|a| self.ops[a.idx()].name.clone())
                    .collect::<Vec<_>>()
                    .join(",")
            ))
        })
    }

    /// Unary operations u: a -> b with a two-sided inverse.
    pub fn invertible_unaries(&self) -> Vec<OpId> {
        let mut out = Vec::new();
        for u in self.op_ids() {
            let ux = self.op(u);
            if ux.inputs.len() != 1 {
                continue;
            }
            let (a, b) = (ux.inputs[0], ux.output);
            let has_inverse = self.profile_ops(&[b], a).iter().any(|&v| {
                self.compose(v, &[u]).ok() == Some(self.unit(a))
                    && self.compose(u, &[v]).ok() == Some(self.unit(b))
            });
            if has_inverse {
                out.push(u);
            }
        }
        out
    }

    /// Checks unit, associativity and equivariance laws on all composites
    /// whose total arity stays within `depth`. Returns the first violated
    /// instance.
    pub fn validate(&self, depth: usize) -> Result<(), OperadError> {
        let depth = depth.min(self.arity_bound);
        // units have the right profile
        for (c, &u) in self.units.iter().enumerate() {
            let ux = self.op(u);
            if ux.inputs != vec![c] || ux.output != c {
                return Err(OperadError::Law(format!(
                    "unit of colour {} has profile ({:?}; {})",
                    self.colours[c], ux.inputs, ux.output
                )));
            }
        }
        // profiles indexed correctly and action well-typed
        for f in self.op_ids() {
            let fx = self.op(f);
            if fx.inputs.len() > self.arity_bound {
                return Err(OperadError::ArityBound(fx.inputs.len(), self.arity_bound));
            }
            for perm in permutations(fx.inputs.len()) {
                let g = self.act(f, &perm)?;
                let gx = self.op(g);
                let expect: Vec<usize> = perm.iter().map(|&i| fx.inputs[i]).collect();
                if gx.inputs != expect || gx.output != fx.output {
                    return Err(OperadError::Law(format!(
                        "action of {:?} on {} has wrong profile",
                        perm, fx.name
                    )));
                }
            }
        }
        // action functoriality
        for f in self.op_ids() {
            let n = self.op(f).inputs.len();
            for sigma in permutations(n) {
                for tau in permutations(n) {
                    let lhs = self.act(self.act(f, &sigma)?, &tau)?;
                    let composed: Vec<usize> = tau.iter().map(|&i| sigma[i]).collect();
                    let rhs = self.act(f, &composed)?;
                    if lhs != rhs {
                        return Err(OperadError::Law(format!(
                            "action not functorial at {}",
                            self.op(f).name
                        )));
                    }
                }
            }
        }
        // unit laws and composition typing
        for f in self.op_ids() {
            let fx = self.op(f).clone();
            let units: Vec<OpId> = fx.inputs.iter().map(|&c| self.unit(c)).collect();
            if self.compose(f, &units)? != f {
                return Err(OperadError::Law(format!("{} . units != {}", fx.name, fx.name)));
            }
            if self.compose(self.unit(fx.output), &[f])? != f {
                return Err(OperadError::Law(format!("unit . {0} != {0}", fx.name)));
            }
        }
        for ((f, args), &r) in &self.compose {
            let fx = self.op(*f);
            if fx.inputs.len() != args.len() {
                return Err(OperadError::Law(format!("arity mismatch composing {}", fx.name)));
            }
            for (i, &g) in args.iter().enumerate() {
                if self.op(g).output != fx.inputs[i] {
                    return Err(OperadError::Law(format!(
                        "colour mismatch composing {} at slot {}",
                        fx.name, i
                    )));
                }
            }
            let expect: Vec<usize> = args
                .iter()
                .flat_map(|&g| self.op(g).inputs.iter().copied())
                .collect();
            let rx = self.op(r);
            if rx.inputs != expect || rx.output != fx.output {
                return Err(OperadError::Law(format!(
                    "composite of {} has wrong profile",
                    fx.name
                )));
            }
        }
        // associativity: gamma(gamma(f; g); h) = gamma(f; gamma(g_i; h_i))
        for f in self.op_ids() {
            let n = self.op(f).inputs.len();
            if n == 0 {
                continue;
            }
            for gs in self.arg_tuples(f, depth) {
                let Ok(fg) = self.compose(f, &gs) else { continue };
                for hs in self.arg_tuples(fg, depth) {
                    let Ok(lhs) = self.compose(fg, &hs) else {
                        continue;
                    };
                    // split hs into blocks per g_i
                    let mut rhs_args = Vec::new();
                    let mut pos = 0usize;
                    let mut ok = true;
                    for &g in &gs {
                        let k = self.op(g).inputs.len();
                        let block = &hs[pos..pos + k];
                        pos += k;
                        match self.compose(g, block) {
                            Ok(gi) => rhs_args.push(gi),
                            Err(_) => {
                                ok = false;
                                break;
                            }
                        }
                    }
                    if !ok {
                        continue;
                    }
                    let Ok(rhs) = self.compose(f, &rhs_args) else {
                        continue;
                    };
                    if lhs != rhs {
                        return Err(OperadError::Law(format!(
                            "associativity fails at {}",
                            self.op(f).name
                        )));
                    }
                }
            }
        }
        // equivariance
        for f in self.op_ids() {
            let n = self.op(f).inputs.len();
            if n == 0 {
                continue;
            }
            for gs in self.arg_tuples(f, depth) {
                let Ok(base) = self.compose(f, &gs) else { continue };
                for sigma in permutations(n) {
                    let fs = self.act(f, &sigma)?;
                    let permuted: Vec<OpId> = sigma.iter().map(|&i| gs[i]).collect();
                    let Ok(lhs) = self.compose(fs, &permuted) else {
                        continue;
                    };
                    // block permutation
                    let arities: Vec<usize> =
                        gs.iter().map(|&g| self.op(g).inputs.len()).collect();
                    let mut offsets = vec![0usize; n];
                    for i in 1..n {
                        offsets[i] = offsets[i - 1] + arities[i - 1];
                    }
                    let mut block: Vec<usize> = Vec::new();
                    for &i in sigma.iter() {
                        for q in 0..arities[i] {
                            block.push(offsets[i] + q);
                        }
                    }
                    let rhs = self.act(base, &block)?;
                    if lhs != rhs {
                        return Err(OperadError::Law(format!(
                            "equivariance fails at {} with {:?}",
                            self.op(f).name,
                            sigma
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// All argument tuples for `f` whose total arity stays within the
    /// bound.
    fn arg_tuples(&self, f: OpId, depth: usize) -> Vec<Vec<OpId>> {
        let inputs = self.op(f).inputs.clone();
        let mut out: Vec<Vec<OpId>> = vec![Vec::new()];
        for &c in &inputs {
            let mut next = Vec::new();
            for partial in &out {
                let used: usize = partial.iter().map(|&g| self.op(g).inputs.len()).sum();
                for g in self.op_ids() {
                    let gx = self.op(g);
                    if gx.output == c && used + gx.inputs.len() <= depth {
                        let mut p = partial.clone();
                        p.push(g);
                        next.push(p);
                    }
                }
            }
            out = next;
        }
        out
    }
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    permute(&mut items, 0, &mut out);
    out.sort();
    out
}

fn permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, out);
        items.swap(k, i);
    }
}

// ---------------------------------------------------------------------------
// Builder
// ---------------------------------------------------------------------------

/// Assembles an operad from parts, indexing profiles. Laws are not
/// checked here; call `validate`.
pub struct OperadBuilder {
    label: String,
    colours: Vec<String>,
    arity_bound: usize,
    ops: Vec<OpData>,
    units: BTreeMap<usize, usize>,
    action: BTreeMap<(usize, Vec<usize>), usize>,
    compose: BTreeMap<(usize, Vec<usize>), usize>,
}

impl OperadBuilder {
    pub fn new(label: &str, colours: &[&str], arity_bound: usize) -> OperadBuilder {
        OperadBuilder {
            label: label.to_string(),
            colours: colours.iter().map(|s| s.to_string()).collect(),
            arity_bound,
            ops: Vec::new(),
            units: BTreeMap::new(),
            action: BTreeMap::new(),
            compose: BTreeMap::new(),
        }
    }

    pub fn op(&mut self, name: &str, inputs: &[usize], output: usize) -> usize {
        self.ops.push(OpData {
            name: name.to_string(),
            inputs: inputs.to_vec(),
            output,
        });
        self.ops.len() - 1
    }

    pub fn unit(&mut self, colour: usize, op: usize) {
        self.units.insert(colour, op);
    }

    pub fn act(&mut self, op: usize, perm: &[usize], to: usize) {
        self.action.insert((op, perm.to_vec()), to);
    }

    pub fn gamma(&mut self, op: usize, args: &[usize], to: usize) {
        self.compose.insert((op, args.to_vec()), to);
    }

    pub fn finish(self) -> FiniteOperad {
        let mut by_profile: BTreeMap<(Vec<usize>, usize), Vec<OpId>> = BTreeMap::new();
        for (i, o) in self.ops.iter().enumerate() {
            by_profile
                .entry((o.inputs.clone(), o.output))
                .or_default()
                .push(OpId(i as u32));
        }
        let units: Vec<OpId> = (0..self.colours.len())
            .map(|c| OpId(self.units[&c] as u32))
            .collect();
        FiniteOperad {
            label: self.label,
            colours: self.colours,
            arity_bound: self.arity_bound,
            ops: self.ops,
            by_profile,
            units,
            action: self
                .action
                .into_iter()
                .map(|((f, p), t)| ((OpId(f as u32), p), OpId(t as u32)))
                .collect(),
            compose: self
                .compose
                .into_iter()
                .map(|((f, a), t)| {
                    (
                        (OpId(f as u32), a.into_iter().map(|x| OpId(x as u32)).collect()),
                        OpId(t as u32),
                    )
                })
                .collect(),
        }
    }
}

// ---------------------------------------------------------------------------
// Morphisms
// ---------------------------------------------------------------------------

/// A morphism of finite operads: a colour map and an operation map.
#[derive(Debug, Clone)]
pub struct OperadMorphism {
    pub colour_map: Vec<usize>,
    pub op_map: Vec<OpId>,
}

impl OperadMorphism {
    pub fn identity(p: &FiniteOperad) -> OperadMorphism {
        OperadMorphism {
            colour_map: (0..p.colour_count()).collect(),
            op_map: p.op_ids().collect(),
        }
    }

    pub fn apply(&self, f: OpId) -> OpId {
        self.op_map[f.idx()]
    }

    /// Checks profile, unit, action and composition preservation on the
    /// tabulated entries.
    pub fn validate(&self, p: &FiniteOperad, q: &FiniteOperad) -> Result<(), OperadError> {
        for f in p.op_ids() {
            let fx = p.op(f);
            let gx = q.op(self.apply(f));
            let expect: Vec<usize> = fx.inputs.iter().map(|&c| self.colour_map[c]).collect();
            if gx.inputs != expect || gx.output != self.colour_map[fx.output] {
                return Err(OperadError::Law(format!(
                    "morphism breaks the profile of {}",
                    fx.name
                )));
            }
        }
        for c in 0..p.colour_count() {
            if self.apply(p.unit(c)) != q.unit(self.colour_map[c]) {
                return Err(OperadError::Law(format!(
                    "morphism breaks the unit of {}",
                    p.colours()[c]
                )));
            }
        }
        for f in p.op_ids() {
            let n = p.op(f).inputs.len();
            for perm in permutations(n) {
                let lhs = self.apply(p.act(f, &perm)?);
                let rhs = q.act(self.apply(f), &perm)?;
                if lhs != rhs {
                    return Err(OperadError::Law(format!(
                        "morphism breaks the action at {}",
                        p.op(f).name
                    )));
                }
            }
        }
        for f in p.op_ids() {
            for gs in p.arg_tuples(f, p.arity_bound) {
                let Ok(c) = p.compose(f, &gs) else { continue };
                let qargs: Vec<OpId> = gs.iter().map(|&g| self.apply(g)).collect();
                let Ok(qc) = q.compose(self.apply(f), &qargs) else {
                    continue;
                };
                if self.apply(c) != qc {
                    return Err(OperadError::Law(format!(
                        "morphism breaks composition at {}",
                        p.op(f).name
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Fully faithful and essentially surjective: all profile maps bijective,
/// every target colour isomorphic to an image colour through an
/// invertible unary operation.
pub fn is_equivalence(f: &OperadMorphism, p: &FiniteOperad, q: &FiniteOperad) -> bool {
    // fully faithful
    let mut profiles: Vec<(Vec<usize>, usize)> = Vec::new();
    let ncol = p.colour_count();
    for arity in 0..=p.arity_bound() {
        let mut tuple = vec![0usize; arity];
        loop {
            for out in 0..ncol {
                profiles.push((tuple.clone(), out));
            }
            let mut i = 0;
            loop {
                if i == arity {
                    break;
                }
                tuple[i] += 1;
                if tuple[i] < ncol {
                    break;
                }
                tuple[i] = 0;
                i += 1;
            }
            if arity == 0 || i == arity {
                break;
            }
        }
    }
    for (inputs, output) in profiles {
        let source = p.profile_ops(&inputs, output);
        let timage: Vec<usize> = inputs.iter().map(|&c| f.colour_map[c]).collect();
        let target = q.profile_ops(&timage, f.colour_map[output]);
        let mapped: Vec<OpId> = source.iter().map(|&g| f.apply(g)).collect();
        let mut sorted = mapped.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != source.len() {
            return false; // not injective
        }
        let mut tgt: Vec<OpId> = target.to_vec();
        tgt.sort();
        if sorted != tgt {
            return false; // not surjective
        }
    }
    // essentially surjective
    let isos = q.invertible_unaries();
    for b in 0..q.colour_count() {
        let hit = f.colour_map.contains(&b)
            || isos.iter().any(|&u| {
                let ux = q.op(u);
                ux.output == b && f.colour_map.contains(&ux.inputs[0])
            });
        if !hit {
            return false;
        }
    }
    true
}

/// Every target isomorphism with a lifted codomain lifts to a source
/// isomorphism.
pub fn is_operadic_fibration(f: &OperadMorphism, p: &FiniteOperad, q: &FiniteOperad) -> bool {
    let q_isos = q.invertible_unaries();
    let p_isos = p.invertible_unaries();
    for &beta in &q_isos {
        let bx = q.op(beta);
        let (b0, b1) = (bx.inputs[0], bx.output);
        let _ = b0;
        for a1 in 0..p.colour_count() {
            if f.colour_map[a1] != b1 {
                continue;
            }
            let lift = p_isos.iter().any(|&alpha| {
                let ax = p.op(alpha);
                ax.output == a1 && f.apply(alpha) == beta
            });
            if !lift {
                return false;
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Built-in operads
// ---------------------------------------------------------------------------

pub mod samples {
    use super::*;

    pub const DEFAULT_BOUND: usize = 4;

    /// One colour, exactly one operation in every arity.
    pub fn comm(bound: usize) -> FiniteOperad {
        let mut b = OperadBuilder::new("comm", &["c"], bound);
        let ids: Vec<usize> = (0..=bound).map(|n| {
            let inputs = vec![0; n];
            b.op(&format!("e{n}"), &inputs, 0)
        }).collect();
        b.unit(0, ids[1]);
        for n in 0..=bound {
            for perm in permutations(n) {
                b.act(ids[n], &perm, ids[n]);
            }
        }
        // gamma(e_n; e_{k1..kn}) = e_{sum}
        for n in 0..=bound {
            for ks in all_tuples(n, bound) {
                let total: usize = ks.iter().sum();
                if total <= bound {
                    let args: Vec<usize> = ks.iter().map(|&k| ids[k]).collect();
                    b.gamma(ids[n], &args, ids[total]);
                }
            }
        }
        b.finish()
    }

    fn all_tuples(n: usize, bound: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for _ in 0..n {
            let mut next = Vec::new();
            for partial in &out {
                let used: usize = partial.iter().sum();
                for k in 0..=(bound.saturating_sub(used)) {
                    let mut p = partial.clone();
                    p.push(k);
                    next.push(p);
                }
            }
            out = next;
        }
        out
    }

    fn order_name(ord: &[usize]) -> String {
        if ord.is_empty() {
            "m0".to_string()
        } else {
            format!(
                "m{}:{}",
                ord.len(),
                ord.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("")
            )
        }
    }

    /// One colour, the associative operad: operations in arity n are the
    /// linear orders of the inputs.
    pub fn ass(bound: usize) -> FiniteOperad {
        let mut b = OperadBuilder::new("ass", &["c"], bound);
        let mut ids: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for n in 0..=bound {
            for ord in permutations(n) {
                let id = b.op(&order_name(&ord), &vec![0; n], 0);
                ids.insert(ord, id);
            }
        }
        b.unit(0, ids[&vec![0usize]]);
        // action: (f sigma).ord[r] = sigma^{-1}[f.ord[r]]
        for (ord, &id) in ids.clone().iter() {
            let n = ord.len();
            for sigma in permutations(n) {
                let mut inv = vec![0usize; n];
                for (i, &s) in sigma.iter().enumerate() {
                    inv[s] = i;
                }
                let new_ord: Vec<usize> = ord.iter().map(|&x| inv[x]).collect();
                b.act(id, &sigma, ids[&new_ord]);
            }
        }
        // composition: blocks ordered by f, within blocks by g_i
        let all_ords: Vec<Vec<usize>> = ids.keys().cloned().collect();
        for ford in &all_ords {
            let n = ford.len();
            for gs in ord_tuples(&all_ords, n, bound) {
                let total: usize = gs.iter().map(|g| g.len()).sum();
                if total > bound {
                    continue;
                }
                let mut offsets = vec![0usize; n];
                for i in 1..n {
                    offsets[i] = offsets[i - 1] + gs[i - 1].len();
                }
                let mut result = Vec::new();
                for &block in ford.iter() {
                    for &q in gs[block].iter() {
                        result.push(offsets[block] + q);
                    }
                }
                let args: Vec<usize> = gs.iter().map(|g| ids[g]).collect();
                b.gamma(ids[ford], &args, ids[&result]);
            }
        }
        b.finish()
    }

    fn ord_tuples(all: &[Vec<usize>], n: usize, bound: usize) -> Vec<Vec<Vec<usize>>> {
        let mut out = vec![Vec::new()];
        for _ in 0..n {
            let mut next = Vec::new();
            for partial in &out {
                let used: usize = partial.iter().map(|g: &Vec<usize>| g.len()).sum();
                for g in all {
                    if used + g.len() <= bound {
                        let mut p = partial.clone();
                        p.push(g.clone());
                        next.push(p);
                    }
                }
            }
            out = next;
        }
        out
    }

    /// A finite group of unary operations on one colour, given by its
    /// Cayley table index `mul`.
    fn group_operad(label: &str, names: &[&str], mul: &dyn Fn(usize, usize) -> usize) -> FiniteOperad {
        let mut b = OperadBuilder::new(label, &["c"], 4);
        let ids: Vec<usize> = names.iter().map(|n| b.op(n, &[0], 0)).collect();
        b.unit(0, ids[0]);
        for (i, &f) in ids.iter().enumerate() {
            b.act(f, &[0], f);
            for (j, &g) in ids.iter().enumerate() {
                b.gamma(f, &[g], ids[mul(i, j)]);
            }
        }
        b.finish()
    }

    /// The group of order two as a one-colour unary operad.
    pub fn cyclic2() -> FiniteOperad {
        group_operad("cyclic2", &["1", "g"], &|i, j| (i + j) % 2)
    }

    /// The cyclic group of order four as a one-colour unary operad.
    pub fn cyclic4() -> FiniteOperad {
        group_operad("cyclic4", &["1", "a", "a2", "a3"], &|i, j| (i + j) % 4)
    }

    /// The group of order two with one extra constant absorbed by it.
    pub fn cyclic2_pointed() -> FiniteOperad {
        let mut b = OperadBuilder::new("cyclic2-pointed", &["c"], 4);
        let one = b.op("1", &[0], 0);
        let g = b.op("g", &[0], 0);
        let z = b.op("z", &[], 0);
        b.unit(0, one);
        for &f in &[one, g] {
            b.act(f, &[0], f);
        }
        b.act(z, &[], z);
        b.gamma(one, &[one], one);
        b.gamma(one, &[g], g);
        b.gamma(g, &[one], g);
        b.gamma(g, &[g], one);
        b.gamma(one, &[z], z);
        b.gamma(g, &[z], z);
        b.finish()
    }

    /// The free monoid on one generator, truncated at length k with the
    /// top power absorbing.
    pub fn free_monoid(k: usize) -> FiniteOperad {
        let mut b = OperadBuilder::new("free-monoid", &["c"], 4);
        let ids: Vec<usize> = (0..=k)
            .map(|i| {
                let name = if i == 0 { "1".to_string() } else { format!("a{i}") };
                b.op(&name, &[0], 0)
            })
            .collect();
        b.unit(0, ids[0]);
        for (i, &f) in ids.iter().enumerate() {
            b.act(f, &[0], f);
            for (j, &g) in ids.iter().enumerate() {
                b.gamma(f, &[g], ids[(i + j).min(k)]);
            }
        }
        b.finish()
    }

    /// Two colours, exactly one operation in every profile.
    pub fn iso2(bound: usize) -> FiniteOperad {
        let mut b = OperadBuilder::new("iso2", &["x", "y"], bound);
        let mut ids: BTreeMap<(Vec<usize>, usize), usize> = BTreeMap::new();
        for arity in 0..=bound {
            for inputs in colour_tuples(arity, 2) {
                for out in 0..2 {
                    let name = format!(
                        "u{}_{}",
                        inputs.iter().map(|c| c.to_string()).collect::<String>(),
                        out
                    );
                    let id = b.op(&name, &inputs, out);
                    ids.insert((inputs.clone(), out), id);
                }
            }
        }
        b.unit(0, ids[&(vec![0], 0)]);
        b.unit(1, ids[&(vec![1], 1)]);
        for ((inputs, out), &id) in ids.clone().iter() {
            for perm in permutations(inputs.len()) {
                let pinputs: Vec<usize> = perm.iter().map(|&i| inputs[i]).collect();
                b.act(id, &perm, ids[&(pinputs, *out)]);
            }
        }
        for ((inputs, out), &id) in ids.clone().iter() {
            for args in profile_tuples(&ids, inputs, bound) {
                let concat: Vec<usize> = args
                    .iter()
                    .flat_map(|(i, _)| i.iter().copied())
                    .collect();
                if concat.len() > bound {
                    continue;
                }
                let arg_ids: Vec<usize> = args.iter().map(|(_, id)| *id).collect();
                b.gamma(id, &arg_ids, ids[&(concat, *out)]);
            }
        }
        b.finish()
    }

    fn colour_tuples(arity: usize, ncol: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new()];
        for _ in 0..arity {
            let mut next = Vec::new();
            for p in &out {
                for c in 0..ncol {
                    let mut q = p.clone();
                    q.push(c);
                    next.push(q);
                }
            }
            out = next;
        }
        out
    }

    fn profile_tuples(
        ids: &BTreeMap<(Vec<usize>, usize), usize>,
        inputs: &[usize],
        bound: usize,
    ) -> Vec<Vec<(Vec<usize>, usize)>> {
        let mut out: Vec<Vec<(Vec<usize>, usize)>> = vec![Vec::new()];
        for &c in inputs {
            let mut next = Vec::new();
            for partial in &out {
                let used: usize = partial.iter().map(|(i, _)| i.len()).sum();
                for ((gin, gout), &gid) in ids {
                    if *gout == c && used + gin.len() <= bound {
                        let mut p = partial.clone();
                        p.push((gin.clone(), gid));
                        next.push(p);
                    }
                }
            }
            out = next;
        }
        out
    }

    /// Two colours with only identity operations.
    pub fn discrete2() -> FiniteOperad {
        let mut b = OperadBuilder::new("discrete2", &["x", "y"], 4);
        let ux = b.op("1x", &[0], 0);
        let uy = b.op("1y", &[1], 1);
        b.unit(0, ux);
        b.unit(1, uy);
        b.act(ux, &[0], ux);
        b.act(uy, &[0], uy);
        b.gamma(ux, &[ux], ux);
        b.gamma(uy, &[uy], uy);
        b.finish()
    }

    /// Two colours with exactly one unary operation between any two, all
    /// invertible; no higher operations.
    pub fn interval_groupoid() -> FiniteOperad {
        let mut b = OperadBuilder::new("interval-groupoid", &["x", "y"], 4);
        let mut ids = BTreeMap::new();
        for a in 0..2usize {
            for c in 0..2usize {
                let id = b.op(&format!("u{a}{c}"), &[a], c);
                ids.insert((a, c), id);
            }
        }
        b.unit(0, ids[&(0, 0)]);
        b.unit(1, ids[&(1, 1)]);
        for (&(a, c), &id) in &ids {
            b.act(id, &[0], id);
            for d in 0..2usize {
                b.gamma(ids[&(c, d)], &[id], ids[&(a, d)]);
            }
        }
        b.finish()
    }

    /// One colour, the group of order two in every arity, with
    /// composition multiplying signs.
    pub fn sign(bound: usize) -> FiniteOperad {
        let mut b = OperadBuilder::new("sign", &["c"], bound);
        let mut ids = BTreeMap::new();
        for n in 0..=bound {
            for s in 0..2usize {
                let id = b.op(&format!("s{n}_{s}"), &vec![0; n], 0);
                ids.insert((n, s), id);
            }
        }
        b.unit(0, ids[&(1, 0)]);
        for (&(n, _s), &id) in &ids {
            for perm in permutations(n) {
                b.act(id, &perm, id);
            }
        }
        // composition: enumerate sign tuples per arity tuple
        let keys: Vec<(usize, usize)> = ids.keys().copied().collect();
        for &(n, s) in &keys {
            let f = ids[&(n, s)];
            let mut stack: Vec<Vec<(usize, usize)>> = vec![Vec::new()];
            for _ in 0..n {
                let mut next = Vec::new();
                for partial in &stack {
                    let used: usize = partial.iter().map(|&(k, _)| k).sum();
                    for &(k, t) in &keys {
                        if used + k <= bound {
                            let mut p = partial.clone();
                            p.push((k, t));
                            next.push(p);
                        }
                    }
                }
                stack = next;
            }
            for args in stack {
                let total: usize = args.iter().map(|&(k, _)| k).sum();
                if total > bound {
                    continue;
                }
                let sign = args.iter().fold(s, |acc, &(_, t)| (acc + t) % 2);
                let arg_ids: Vec<usize> = args.iter().map(|&kt| ids[&kt]).collect();
                b.gamma(f, &arg_ids, ids[&(total, sign)]);
            }
        }
        b.finish()
    }

    /// The quotient morphism from the order-four to the order-two cyclic
    /// operad.
    pub fn cyclic4_to_cyclic2() -> (FiniteOperad, FiniteOperad, OperadMorphism) {
        let p = cyclic4();
        let q = cyclic2();
        let op_map: Vec<OpId> = p
            .op_ids()
            .map(|f| {
                let name = &p.op(f).name;
                let image = match name.as_str() {
                    "1" | "a2" => "1",
                    _ => "g",
                };
                q.op_by_name(image).unwrap()
            })
            .collect();
        let m = OperadMorphism {
            colour_map: vec![0],
            op_map,
        };
        (p, q, m)
    }

    pub fn by_name(name: &str) -> Option<FiniteOperad> {
        match name {
            "comm" => Some(comm(DEFAULT_BOUND)),
            "ass" => Some(ass(DEFAULT_BOUND)),
            "cyclic2" => Some(cyclic2()),
            "cyclic4" => Some(cyclic4()),
            "cyclic2-pointed" => Some(cyclic2_pointed()),
            "free-monoid" => Some(free_monoid(2)),
            "iso2" => Some(iso2(3)),
            "discrete2" => Some(discrete2()),
            "interval-groupoid" => Some(interval_groupoid()),
            "sign" => Some(sign(DEFAULT_BOUND)),
            _ => None,
        }
    }

    pub const NAMES: &[&str] = &[
        "comm",
        "ass",
        "cyclic2",
        "cyclic4",
        "cyclic2-pointed",
        "free-monoid",
        "iso2",
        "discrete2",
        "interval-groupoid",
        "sign",
    ];
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
pub struct OperadDoc {
    pub colours: Vec<String>,
    pub arity_bound: usize,
    pub operations: Vec<OpDoc>,
    pub units: BTreeMap<String, String>,
    pub action: Vec<ActionDoc>,
    pub composition: Vec<CompositionDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct OpDoc {
    pub name: String,
    pub inputs: Vec<String>,
    pub output: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ActionDoc {
    pub op: String,
    pub perm: Vec<usize>,
    pub to: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CompositionDoc {
    pub op: String,
    pub args: Vec<String>,
    pub to: String,
}

impl FiniteOperad {
    pub fn to_doc(&self) -> OperadDoc {
        OperadDoc {
            colours: self.colours.clone(),
            arity_bound: self.arity_bound,
            operations: self
                .ops
                .iter()
                .map(|o| OpDoc {
                    name: o.name.clone(),
                    inputs: o.inputs.iter().map(|&c| self.colours[c].clone()).collect(),
                    output: self.colours[o.output].clone(),
                })
                .collect(),
            units: (0..self.colour_count())
                .map(|c| (self.colours[c].clone(), self.op(self.unit(c)).name.clone()))
                .collect(),
            action: self
                .action
                .iter()
                .filter(|((f, p), &t)| {
                    let identity = p.iter().enumerate().all(|(i, &x)| i == x);
                    !(identity && t == *f)
                })
                .map(|((f, p), t)| ActionDoc {
                    op: self.op(*f).name.clone(),
                    perm: p.clone(),
                    to: self.op(*t).name.clone(),
                })
                .collect(),
            composition: self
                .compose
                .iter()
                .map(|((f, args), t)| CompositionDoc {
                    op: self.op(*f).name.clone(),
                    args: args.iter().map(|&a| self.op(a).name.clone()).collect(),
                    to: self.op(*t).name.clone(),
                })
                .collect(),
        }
    }

    pub fn from_doc(label: &str, doc: &OperadDoc) -> Result<FiniteOperad, OperadError> {
        let colour_refs: Vec<&str> = doc.colours.iter().map(|s| s.as_str()).collect();
        let mut b = OperadBuilder::new(label, &colour_refs, doc.arity_bound);
        let colour = |n: &str| -> Result<usize, OperadError> {
            doc.colours
                .iter()
                .position(|c| c == n)
                .ok_or_else(|| OperadError::UnknownColour(n.to_string()))
        };
        let mut ids: BTreeMap<String, usize> = BTreeMap::new();
        for o in &doc.operations {
            let inputs = o
                .inputs
                .iter()
                .map(|n| colour(n))
                .collect::<Result<Vec<_>, _>>()?;
            let id = b.op(&o.name, &inputs, colour(&o.output)?);
            if ids.insert(o.name.clone(), id).is_some() {
                return Err(OperadError::File(format!("duplicate operation `{}`", o.name)));
            }
        }
        let op = |ids: &BTreeMap<String, usize>, n: &str| -> Result<usize, OperadError> {
            ids.get(n)
                .copied()
                .ok_or_else(|| OperadError::UnknownOp(n.to_string()))
        };
        for (c, u) in &doc.units {
            b.unit(colour(c)?, op(&ids, u)?);
        }
        for c in &doc.colours {
            if !doc.units.contains_key(c) {
                return Err(OperadError::File(format!("missing unit for colour `{c}`")));
            }
        }
        // identity actions are implicit
        for (name, &id) in &ids {
            let arity = doc
                .operations
                .iter()
                .find(|o| &o.name == name)
                .unwrap()
                .inputs
                .len();
            b.act(id, &(0..arity).collect::<Vec<_>>(), id);
        }
        for a in &doc.action {
            b.act(op(&ids, &a.op)?, &a.perm, op(&ids, &a.to)?);
        }
        for c in &doc.composition {
            let args = c
                .args
                .iter()
                .map(|n| op(&ids, n))
                .collect::<Result<Vec<_>, _>>()?;
            b.gamma(op(&ids, &c.op)?, &args, op(&ids, &c.to)?);
        }
        Ok(b.finish())
    }
}

#[cfg(test)]
mod tests {
    use super::samples::*;
    use super::*;

    #[test]
    fn builtins_satisfy_laws() {
        for name in samples::NAMES {
            let p = samples::by_name(name).unwrap();
            let depth = if p.op_count() > 20 { 3 } else { 4 };
            p.validate(depth).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn comm_and_ass_sizes() {
        let c = comm(4);
        for n in 0..=4 {
            assert_eq!(c.profile_ops(&vec![0; n], 0).len(), 1);
        }
        let a = ass(4);
        for n in 0..=4 {
            assert_eq!(
                a.profile_ops(&vec![0; n], 0).len(),
                (1..=n).product::<usize>().max(1),
                "arity {n}"
            );
        }
    }

    #[test]
    fn corrupted_composition_detected() {
        // a 3-element cyclic table with one corrupted entry breaks
        // associativity
        let mut b = OperadBuilder::new("bad3", &["c"], 2);
        let e = b.op("e", &[0], 0);
        let x = b.op("x", &[0], 0);
        let y = b.op("y", &[0], 0);
        b.unit(0, e);
        for &f in &[e, x, y] {
            b.act(f, &[0], f);
        }
        // cyclic group of order three with x.y corrupted
        let table = [[e, x, y], [x, y, e], [y, e, x]];
        for (i, &f) in [e, x, y].iter().enumerate() {
            for (j, &g) in [e, x, y].iter().enumerate() {
                let mut to = table[i][j];
                if (i, j) == (1, 2) {
                    to = x; // corrupt: should be e
                }
                b.gamma(f, &[g], to);
            }
        }
        let p = b.finish();
        let err = p.validate(3).unwrap_err();
        assert!(matches!(err, OperadError::Law(_)), "{err}");
    }

    #[test]
    fn equivalence_examples() {
        let a = ass(3);
        assert!(is_equivalence(&OperadMorphism::identity(&a), &a, &a));

        // inclusion of one colour into the interval groupoid through comm
        // restricted to unary: use discrete1 -> interval_groupoid
        let j = interval_groupoid();
        let mut b = OperadBuilder::new("point", &["x"], 4);
        let u = b.op("1", &[0], 0);
        b.unit(0, u);
        b.act(u, &[0], u);
        b.gamma(u, &[u], u);
        let point = b.finish();
        let incl = OperadMorphism {
            colour_map: vec![0],
            op_map: vec![j.op_by_name("u00").unwrap()],
        };
        incl.validate(&point, &j).unwrap();
        assert!(is_equivalence(&incl, &point, &j));

        // comm -> ass picking one binary element: not full in arity 2
        let c = comm(3);
        let op_map: Vec<OpId> = c
            .op_ids()
            .map(|f| {
                let n = c.op(f).inputs.len();
                let ord: Vec<usize> = (0..n).collect();
                a.op_by_name(&{
                    if ord.is_empty() {
                        "m0".to_string()
                    } else {
                        format!(
                            "m{}:{}",
                            n,
                            ord.iter().map(|i| i.to_string()).collect::<String>()
                        )
                    }
                })
                .unwrap()
            })
            .collect();
        let m = OperadMorphism {
            colour_map: vec![0],
            op_map,
        };
        assert!(!is_equivalence(&m, &c, &a));
    }

    #[test]
    fn fibration_examples() {
        // anything over comm is a fibration
        let c = comm(2);
        let point_map = OperadMorphism::identity(&c);
        assert!(is_operadic_fibration(&point_map, &c, &c));

        // discrete2 -> interval groupoid: the non-identity iso has no lift
        let d = discrete2();
        let j = interval_groupoid();
        let m = OperadMorphism {
            colour_map: vec![0, 1],
            op_map: vec![j.op_by_name("u00").unwrap(), j.op_by_name("u11").unwrap()],
        };
        m.validate(&d, &j).unwrap();
        assert!(!is_operadic_fibration(&m, &d, &j));

        // the cyclic quotient is a fibration
        let (p, q, m) = cyclic4_to_cyclic2();
        m.validate(&p, &q).unwrap();
        assert!(is_operadic_fibration(&m, &p, &q));
    }

    #[test]
    fn file_round_trip() {
        for name in ["comm", "cyclic2", "iso2", "free-monoid"] {
            let p = samples::by_name(name).unwrap();
            let doc = p.to_doc();
            let text = serde_json::to_string_pretty(&doc).unwrap();
            let parsed: OperadDoc = serde_json::from_str(&text).unwrap();
            let q = FiniteOperad::from_doc(name, &parsed).unwrap();
            q.validate(3).unwrap();
            assert_eq!(p.op_count(), q.op_count());
            assert_eq!(p.colours(), q.colours());
        }
    }

    #[test]
    fn invertible_unaries_examples() {
        let z2 = cyclic2();
        assert_eq!(z2.invertible_unaries().len(), 2);
        let f = free_monoid(2);
        assert_eq!(f.invertible_unaries().len(), 1); // only the unit
        let j = interval_groupoid();
        assert_eq!(j.invertible_unaries().len(), 4);
    }
}
