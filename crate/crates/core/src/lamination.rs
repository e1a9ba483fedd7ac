//! Rational laminations: validated partitions of a truncated angle support
//! into unlinked, forward-compatible classes, plus the closure operation
//! that grows a lamination from generator pairs.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use crate::angle::{Angle, AngleError, SupportIndex, SupportSpec};

/// Index of a non-singleton class within a lamination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassId(pub u32);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LaminationError {
    #[error("angle {0}")]
    Angle(#[from] AngleError),
    #[error("angle {0} lies outside the support (d={1}, P={2}, Q={3})")]
    OutsideSupport(Angle, u32, u32, u32),
    #[error("angle {0} appears in two classes")]
    Overlap(Angle),
    #[error("empty class supplied")]
    EmptyClass,
    #[error("unlinked violation: chord {0}-{1} crosses chord {2}-{3}")]
    Unlinked(Angle, Angle, Angle, Angle),
    #[error("forward violation: class {{{}}} has sigma image split across classes", fmt_angles(.0))]
    ForwardSplit(Vec<Angle>),
    #[error("class {{{}}} is not cyclic-order preserving under sigma", fmt_angles(.0))]
    NotConsecutivePreserving(Vec<Angle>),
    #[error(
        "ambiguous pullback of class {{{}}} over preimages {{{}}}; supply more generators",
        fmt_angles(.class), fmt_angles(.preimages)
    )]
    AmbiguousPullback {
        class: Vec<Angle>,
        preimages: Vec<Angle>,
    },
    #[error(
        "no consistent pullback of class {{{}}} over preimages {{{}}}",
        fmt_angles(.class), fmt_angles(.preimages)
    )]
    InconsistentPullback {
        class: Vec<Angle>,
        preimages: Vec<Angle>,
    },
    #[error("supports are incompatible: expected the left support to embed in the right one")]
    SupportMismatch,
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(u32, u32),
    #[error("pullback search exhausted its budget; truncation likely inconsistent")]
    SearchBudget,
}

fn fmt_angles(angles: &[Angle]) -> alloc::string::String {
    use alloc::string::ToString;
    let mut out = alloc::string::String::new();
    for (i, a) in angles.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(&a.to_string());
    }
    out
}

/// Where a class is sent by the d-tupling map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImageTarget {
    Class(ClassId),
    /// Image is a single angle that forms a singleton class.
    Singleton(u32),
}

/// A validated rational lamination over a truncated support.
///
/// Singleton classes are implicit: `class_of` returns `None` for angles
/// that are identified with nothing.
#[derive(Debug, Clone)]
pub struct RationalLamination {
    spec: SupportSpec,
    support: SupportIndex,
    sigma: Vec<u32>,
    class_of: Vec<Option<ClassId>>,
    classes: Vec<Vec<u32>>,
    generators: Option<Vec<(Angle, Angle)>>,
}

impl RationalLamination {
    /// The lamination with no identifications at all.
    pub fn trivial(spec: SupportSpec) -> Result<Self, LaminationError> {
        Self::validate(&[], spec)
    }

    /// Checks a family of classes against all lamination axioms and fills in
    /// the uncovered support angles as singletons.
    pub fn validate(classes: &[Vec<Angle>], spec: SupportSpec) -> Result<Self, LaminationError> {
        let support = SupportIndex::new(spec.enumerate()?);
        let mut class_sets: Vec<Vec<u32>> = Vec::new();
        let mut seen: BTreeMap<u32, ()> = BTreeMap::new();
        for class in classes {
            if class.is_empty() {
                return Err(LaminationError::EmptyClass);
            }
            let mut ids = BTreeSet::new();
            for a in class {
                let id = support.position(a).ok_or_else(|| {
                    LaminationError::OutsideSupport(
                        a.clone(),
                        spec.d,
                        spec.max_period,
                        spec.max_preperiod,
                    )
                })?;
                if seen.insert(id, ()).is_some() {
                    return Err(LaminationError::Overlap(a.clone()));
                }
                ids.insert(id);
            }
            if ids.len() >= 2 {
                class_sets.push(ids.into_iter().collect());
            }
        }
        class_sets.sort_by_key(|c| c[0]);
        Self::from_parts(spec, support, class_sets, None)
    }

    fn from_parts(
        spec: SupportSpec,
        support: SupportIndex,
        classes: Vec<Vec<u32>>,
        generators: Option<Vec<(Angle, Angle)>>,
    ) -> Result<Self, LaminationError> {
        let sigma: Vec<u32> = support
            .angles()
            .iter()
            .map(|a| {
                support
                    .position(&a.sigma(spec.d))
                    .expect("support is sigma-closed")
            })
            .collect();
        let mut class_of = vec![None; support.len()];
        for (ci, class) in classes.iter().enumerate() {
            for &id in class {
                class_of[id as usize] = Some(ClassId(ci as u32));
            }
        }
        let lam = RationalLamination {
            spec,
            support,
            sigma,
            class_of,
            classes,
            generators,
        };
        lam.check_unlinked()?;
        lam.check_forward()?;
        lam.check_consecutive()?;
        Ok(lam)
    }

    /// Unlinkedness of all classes in one circular sweep.
    ///
    /// Cutting the circle between the last and first support angle turns
    /// cyclic unlinkedness into balanced nesting, which a single stack scan
    /// decides; on failure the crossing quadruple is reconstructed.
    fn check_unlinked(&self) -> Result<(), LaminationError> {
        let n = self.support.len();
        let mut remaining: Vec<u32> = self.classes.iter().map(|c| c.len() as u32).collect();
        let mut first_seen: Vec<Option<u32>> = vec![None; self.classes.len()];
        let mut stack: Vec<u32> = Vec::new();
        let mut on_stack = vec![false; self.classes.len()];
        for pos in 0..n as u32 {
            let Some(ClassId(ci)) = self.class_of[pos as usize] else {
                continue;
            };
            let ci = ci as usize;
            if first_seen[ci].is_none() {
                first_seen[ci] = Some(pos);
            }
            if on_stack[ci] {
                while let Some(&top) = stack.last() {
                    if top as usize == ci {
                        break;
                    }
                    // `top` interleaves with `ci`: ci was opened before top,
                    // top is still open, and ci resumes here.
                    let t = top as usize;
                    let a = self.support.angle(first_seen[ci].unwrap()).clone();
                    let b = self.support.angle(pos).clone();
                    let u = self.support.angle(first_seen[t].unwrap()).clone();
                    let v = self
                        .classes[t]
                        .iter()
                        .copied()
                        .find(|&x| x > pos)
                        .map(|x| self.support.angle(x).clone())
                        .unwrap_or_else(|| u.clone());
                    return Err(LaminationError::Unlinked(a, b, u, v));
                }
            } else {
                stack.push(ci as u32);
                on_stack[ci] = true;
            }
            remaining[ci] -= 1;
            if remaining[ci] == 0 {
                if stack.last() == Some(&(ci as u32)) {
                    stack.pop();
                    on_stack[ci] = false;
                } else {
                    // ci completes while something opened after it is still
                    // open: that open class crosses ci.
                    let t = *stack.last().unwrap() as usize;
                    let a = self.support.angle(first_seen[ci].unwrap()).clone();
                    let b = self.support.angle(pos).clone();
                    let u = self.support.angle(first_seen[t].unwrap()).clone();
                    let v = self
                        .classes[t]
                        .iter()
                        .copied()
                        .find(|&x| x > pos)
                        .map(|x| self.support.angle(x).clone())
                        .unwrap_or_else(|| u.clone());
                    return Err(LaminationError::Unlinked(a, b, u, v));
                }
            }
        }
        Ok(())
    }

    fn check_forward(&self) -> Result<(), LaminationError> {
        for class in &self.classes {
            let mut target: Option<Option<ClassId>> = None;
            let mut single_image: Option<u32> = None;
            for &id in class {
                let img = self.sigma[id as usize];
                let t = self.class_of[img as usize];
                match target {
                    None => {
                        target = Some(t);
                        single_image = Some(img);
                    }
                    Some(prev) => {
                        let consistent = match (prev, t) {
                            (Some(a), Some(b)) => a == b,
                            // Two singleton images must be the same angle.
                            (None, None) => single_image == Some(img),
                            _ => false,
                        };
                        if !consistent {
                            return Err(LaminationError::ForwardSplit(self.angles_of(class)));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Kiwi-style consecutive preservation: images of cyclically consecutive
    /// class angles bound an arc containing no other image angle.
    fn check_consecutive(&self) -> Result<(), LaminationError> {
        for class in &self.classes {
            if !self.class_is_consecutive_preserving(class) {
                return Err(LaminationError::NotConsecutivePreserving(
                    self.angles_of(class),
                ));
            }
        }
        Ok(())
    }

    pub(crate) fn class_is_consecutive_preserving(&self, class: &[u32]) -> bool {
        let m = class.len();
        let images: Vec<u32> = class.iter().map(|&id| self.sigma[id as usize]).collect();
        let image_set: BTreeSet<u32> = images.iter().copied().collect();
        let mp = image_set.len();
        if mp == 1 {
            return true;
        }
        if m % mp != 0 {
            return false;
        }
        // Uniform fibers.
        let mut count: BTreeMap<u32, u32> = BTreeMap::new();
        for &im in &images {
            *count.entry(im).or_insert(0) += 1;
        }
        let k = (m / mp) as u32;
        if count.values().any(|&c| c != k) {
            return false;
        }
        // Open arc between consecutive images avoids the image set.
        for i in 0..m {
            let u = images[i];
            let v = images[(i + 1) % m];
            if u == v {
                return false; // mp > 1: equal consecutive images wind wrong
            }
            let has_between = if u < v {
                image_set.range(u + 1..v).next().is_some()
            } else {
                image_set.range(u + 1..).next().is_some() || image_set.range(..v).next().is_some()
            };
            if has_between {
                return false;
            }
        }
        true
    }

    fn angles_of(&self, ids: &[u32]) -> Vec<Angle> {
        ids.iter()
            .map(|&id| self.support.angle(id).clone())
            .collect()
    }

    pub fn spec(&self) -> SupportSpec {
        self.spec
    }

    pub fn d(&self) -> u32 {
        self.spec.d
    }

    pub fn support(&self) -> &SupportIndex {
        &self.support
    }

    /// Non-singleton classes as sorted angle ids.
    pub fn classes(&self) -> &[Vec<u32>] {
        &self.classes
    }

    pub fn class_angles(&self, c: ClassId) -> &[u32] {
        &self.classes[c.0 as usize]
    }

    pub fn class_angle_values(&self, c: ClassId) -> Vec<Angle> {
        self.angles_of(&self.classes[c.0 as usize])
    }

    pub fn class_of(&self, angle_id: u32) -> Option<ClassId> {
        self.class_of[angle_id as usize]
    }

    pub fn sigma_id(&self, angle_id: u32) -> u32 {
        self.sigma[angle_id as usize]
    }

    pub fn generators(&self) -> Option<&[(Angle, Angle)]> {
        self.generators.as_deref()
    }

    /// Where the d-tupling map sends a class.
    pub fn image_target(&self, c: ClassId) -> ImageTarget {
        let first = self.classes[c.0 as usize][0];
        let img = self.sigma[first as usize];
        match self.class_of[img as usize] {
            Some(t) => ImageTarget::Class(t),
            None => ImageTarget::Singleton(img),
        }
    }

    /// Orbit period of a class under the induced map on classes, or `None`
    /// when the class is strictly preperiodic (or falls onto singletons).
    pub fn class_period(&self, c: ClassId) -> Option<u32> {
        let mut seen = BTreeMap::new();
        let mut cur = c;
        let mut step = 0u32;
        loop {
            if let Some(&at) = seen.get(&cur) {
                return if cur == c { Some(step - at) } else { None };
            }
            seen.insert(cur, step);
            match self.image_target(cur) {
                ImageTarget::Class(next) => cur = next,
                ImageTarget::Singleton(_) => return None,
            }
            step += 1;
            if cur == c {
                return Some(step);
            }
        }
    }

    /// Covering degree of sigma on a class: the largest fiber size over its
    /// image angles.
    pub fn class_degree(&self, c: ClassId) -> u32 {
        let mut count: BTreeMap<u32, u32> = BTreeMap::new();
        for &id in &self.classes[c.0 as usize] {
            *count.entry(self.sigma[id as usize]).or_insert(0) += 1;
        }
        count.values().copied().max().unwrap_or(1)
    }

    /// True iff every non-singleton class of `self` is contained in a single
    /// class of `big`.
    pub fn includes(&self, big: &RationalLamination) -> Result<bool, LaminationError> {
        if self.d() != big.d() {
            return Err(LaminationError::DegreeMismatch(self.d(), big.d()));
        }
        // The small support must embed in the big one.
        let map: Option<Vec<u32>> = self
            .support
            .angles()
            .iter()
            .map(|a| big.support.position(a))
            .collect();
        let Some(map) = map else {
            return Err(LaminationError::SupportMismatch);
        };
        for class in &self.classes {
            let mut target: Option<ClassId> = None;
            for &id in class {
                match big.class_of[map[id as usize] as usize] {
                    None => return Ok(false),
                    Some(t) => {
                        if let Some(prev) = target {
                            if prev != t {
                                return Ok(false);
                            }
                        }
                        target = Some(t);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Bit-exact partition equality on the common support.
    pub fn equal_partition(&self, other: &RationalLamination) -> bool {
        if self.d() != other.d() {
            return false;
        }
        let key = |lam: &RationalLamination| -> BTreeSet<Vec<Angle>> {
            lam.classes
                .iter()
                .map(|c| {
                    c.iter()
                        .map(|&id| lam.support.angle(id).clone())
                        .collect::<Vec<_>>()
                })
                .collect()
        };
        key(self) == key(other)
    }

    /// Rebuilds this lamination over the truncation with period bound P+1.
    ///
    /// Saturated laminations re-run the closure from their generators;
    /// explicitly supplied ones keep their classes over the larger support.
    pub fn extend_period(&self) -> Result<RationalLamination, LaminationError> {
        let spec = self.spec.bump_period();
        match &self.generators {
            Some(gens) => RationalLamination::saturate(gens, spec),
            None => {
                let classes: Vec<Vec<Angle>> =
                    self.classes.iter().map(|c| self.angles_of(c)).collect();
                RationalLamination::validate(&classes, spec)
            }
        }
    }

    /// Smallest forward- and pullback-closed partition containing the
    /// generator pairs, restricted to the truncated support.
    pub fn saturate(
        generators: &[(Angle, Angle)],
        spec: SupportSpec,
    ) -> Result<Self, LaminationError> {
        let support = SupportIndex::new(spec.enumerate()?);
        let mut closure = Closure::new(&support, spec)?;
        for (a, b) in generators {
            let ia = support.position(a).ok_or_else(|| {
                LaminationError::OutsideSupport(
                    a.clone(),
                    spec.d,
                    spec.max_period,
                    spec.max_preperiod,
                )
            })?;
            let ib = support.position(b).ok_or_else(|| {
                LaminationError::OutsideSupport(
                    b.clone(),
                    spec.d,
                    spec.max_period,
                    spec.max_preperiod,
                )
            })?;
            closure.union(ia, ib);
        }
        closure.run()?;
        let classes = closure.into_classes();
        Self::from_parts(
            spec,
            support,
            classes,
            Some(generators.to_vec()),
        )
    }
}

/// Union-find based closure engine for `saturate`.
struct Closure<'a> {
    support: &'a SupportIndex,
    spec: SupportSpec,
    sigma: Vec<u32>,
    preimages: Vec<Vec<u32>>,
    parent: Vec<u32>,
}

impl<'a> Closure<'a> {
    fn new(support: &'a SupportIndex, spec: SupportSpec) -> Result<Self, LaminationError> {
        let n = support.len();
        let mut sigma = Vec::with_capacity(n);
        let mut preimages = vec![Vec::new(); n];
        for (i, a) in support.angles().iter().enumerate() {
            let img = support
                .position(&a.sigma(spec.d))
                .expect("support is sigma-closed");
            sigma.push(img);
            preimages[img as usize].push(i as u32);
        }
        Ok(Closure {
            support,
            spec,
            sigma,
            preimages,
            parent: (0..n as u32).collect(),
        })
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let up = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = up;
            x = up;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) -> bool {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi as usize] = lo;
        true
    }

    fn run(&mut self) -> Result<(), LaminationError> {
        loop {
            let mut changed = self.forward_pass();
            changed |= self.pullback_pass()?;
            if !changed {
                return Ok(());
            }
        }
    }

    /// a ~ b implies sigma(a) ~ sigma(b).
    fn forward_pass(&mut self) -> bool {
        let mut changed = false;
        loop {
            let buckets = self.buckets();
            let mut step = false;
            for members in buckets.values() {
                if members.len() < 2 {
                    continue;
                }
                let first = self.sigma[members[0] as usize];
                for &m in &members[1..] {
                    let im = self.sigma[m as usize];
                    step |= self.union(first, im);
                }
            }
            if !step {
                return changed;
            }
            changed = true;
        }
    }

    fn buckets(&mut self) -> BTreeMap<u32, Vec<u32>> {
        let n = self.parent.len();
        let mut out: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for i in 0..n as u32 {
            let r = self.find(i);
            out.entry(r).or_default().push(i);
        }
        out
    }

    /// For each non-singleton class, partitions its sigma-preimage angles
    /// into unlinked transversal groups and merges each group. A unique
    /// partition is required; anything else is surfaced as an error.
    fn pullback_pass(&mut self) -> Result<bool, LaminationError> {
        let mut changed = false;
        let mut deferred: Option<LaminationError> = None;
        let buckets = self.buckets();
        let class_roots: Vec<u32> = buckets
            .iter()
            .filter(|(_, v)| v.len() >= 2)
            .map(|(&r, _)| r)
            .collect();
        for root in class_roots {
            // Re-derive the class each time; earlier merges may have grown it.
            let class: Vec<u32> = {
                let mut c: Vec<u32> = Vec::new();
                for i in 0..self.parent.len() as u32 {
                    if self.find(i) == self.find(root) {
                        c.push(i);
                    }
                }
                c
            };
            if class.len() < 2 {
                continue;
            }
            match self.pullback_class(&class) {
                Ok(merges) => {
                    for (a, b) in merges {
                        changed |= self.union(a, b);
                    }
                }
                Err(e @ LaminationError::AmbiguousPullback { .. }) => {
                    // Later merges may disambiguate; only fail at a fixpoint.
                    if deferred.is_none() {
                        deferred = Some(e);
                    }
                }
                Err(e) => return Err(e),
            }
        }
        if changed {
            Ok(true)
        } else if let Some(e) = deferred {
            Err(e)
        } else {
            Ok(false)
        }
    }

    fn pullback_class(&mut self, class: &[u32]) -> Result<Vec<(u32, u32)>, LaminationError> {
        // X: support preimages of the class; T: targets actually hit.
        let mut xs: BTreeSet<u32> = BTreeSet::new();
        for &c in class {
            for &p in &self.preimages[c as usize] {
                xs.insert(p);
            }
        }
        if xs.is_empty() {
            return Ok(Vec::new());
        }
        let targets: BTreeSet<u32> = xs.iter().map(|&x| self.sigma[x as usize]).collect();
        if targets.len() < 2 {
            return Ok(Vec::new());
        }
        let err_ctx = |this: &Self| {
            (
                class
                    .iter()
                    .map(|&id| this.support.angle(id).clone())
                    .collect::<Vec<_>>(),
                xs.iter()
                    .map(|&id| this.support.angle(id).clone())
                    .collect::<Vec<_>>(),
            )
        };

        // Atoms: existing classes restricted to X (classes either lie inside
        // X or miss it entirely once forward closure has run).
        let mut atom_of: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        let xs_vec: Vec<u32> = xs.iter().copied().collect();
        for &x in &xs_vec {
            let r = self.find(x);
            atom_of.entry(r).or_default().push(x);
        }
        let mut atoms: Vec<Atom> = Vec::new();
        for (_, members) in atom_of {
            let labels: Vec<u32> = members.iter().map(|&x| self.sigma[x as usize]).collect();
            atoms.push(Atom { members, labels });
        }
        atoms.sort_by_key(|a| a.members[0]);

        // Atoms already covering all targets with uniform fibers are complete
        // groups; they stay fixed and act as crossing obstacles.
        let t = targets.len() as u32;
        let mut open_atoms: Vec<Atom> = Vec::new();
        let mut fixed: Vec<Vec<u32>> = Vec::new();
        for atom in atoms {
            let mut count: BTreeMap<u32, u32> = BTreeMap::new();
            for &l in &atom.labels {
                *count.entry(l).or_insert(0) += 1;
            }
            if count.len() as u32 == t {
                let k = count.values().copied().max().unwrap();
                if count.values().all(|&c| c == k) {
                    fixed.push(atom.members);
                    continue;
                }
                let (c, p) = err_ctx(self);
                return Err(LaminationError::InconsistentPullback {
                    class: c,
                    preimages: p,
                });
            }
            if count.values().any(|&c| c > 1) {
                let (c, p) = err_ctx(self);
                return Err(LaminationError::InconsistentPullback {
                    class: c,
                    preimages: p,
                });
            }
            open_atoms.push(atom);
        }
        if open_atoms.is_empty() {
            return Ok(Vec::new());
        }

        // Fiber balance: remaining labels must cover T uniformly.
        let mut label_count: BTreeMap<u32, u32> = BTreeMap::new();
        for atom in &open_atoms {
            for &l in &atom.labels {
                *label_count.entry(l).or_insert(0) += 1;
            }
        }
        let counts: BTreeSet<u32> = label_count.values().copied().collect();
        if label_count.len() as u32 != t || counts.len() != 1 {
            let (c, p) = err_ctx(self);
            return Err(LaminationError::InconsistentPullback {
                class: c,
                preimages: p,
            });
        }

        // Chords the new groups must not cross: every current non-singleton
        // class outside X, plus the fixed complete atoms inside X.
        let mut external: Vec<Vec<u32>> = fixed;
        {
            let buckets = self.buckets();
            for (_, members) in buckets {
                if members.len() >= 2 && !xs.contains(&members[0]) {
                    external.push(members);
                }
            }
        }

        let targets_sorted: Vec<u32> = targets.iter().copied().collect();
        let mut search = GroupSearch {
            targets: &targets_sorted,
            external: &external,
            solutions: Vec::new(),
            budget: 100_000,
        };
        let mut groups: Vec<Group> = Vec::new();
        search.dfs(&open_atoms, 0, &mut groups)?;
        let mut solutions = search.solutions;
        if solutions.len() > 1 {
            // Unlinkedness alone can leave two transversal pairings (the
            // second one belongs to a lamination deeper in the wake). The
            // genuine pullback is the one that keeps the critical count
            // within degree - 1 and does not destroy any existing
            // gap-to-gap edge dynamics.
            let current = self.current_classes();
            let current_index = chord_face_index(self.support.len() as u32, &current);
            let mut kept = Vec::new();
            for groups in solutions {
                let hypo = self.merged_classes(&groups);
                let excess = crate::gaps::critical_excess(
                    self.support.len() as u32,
                    &hypo,
                    &self.sigma,
                );
                if excess <= self.spec.d - 1
                    && !self.breaks_existing_adjacency(&hypo, &current_index)
                {
                    kept.push(groups);
                }
            }
            solutions = kept;
        }
        match solutions.len() {
            1 => {
                let mut merges = Vec::new();
                for group in &solutions[0] {
                    let first = group[0];
                    for &m in &group[1..] {
                        merges.push((first, m));
                    }
                }
                Ok(merges)
            }
            0 => {
                let (c, p) = err_ctx(self);
                Err(LaminationError::InconsistentPullback {
                    class: c,
                    preimages: p,
                })
            }
            _ => {
                let (c, p) = err_ctx(self);
                Err(LaminationError::AmbiguousPullback {
                    class: c,
                    preimages: p,
                })
            }
        }
    }

    fn current_classes(&mut self) -> Vec<Vec<u32>> {
        let mut classes: Vec<Vec<u32>> = self
            .buckets()
            .into_values()
            .filter(|v| v.len() >= 2)
            .collect();
        classes.sort_by_key(|c| c[0]);
        classes
    }

    /// The partition obtained by additionally merging the candidate groups.
    fn merged_classes(&mut self, groups: &[Vec<u32>]) -> Vec<Vec<u32>> {
        let n = self.parent.len() as u32;
        let mut root: Vec<u32> = (0..n).map(|i| self.find(i)).collect();
        for group in groups {
            let lead = root[group[0] as usize];
            for &m in &group[1..] {
                let r = root[m as usize];
                if r != lead {
                    for x in root.iter_mut() {
                        if *x == r {
                            *x = lead;
                        }
                    }
                }
            }
        }
        let mut buckets: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for (i, &r) in root.iter().enumerate() {
            buckets.entry(r).or_default().push(i as u32);
        }
        let mut classes: Vec<Vec<u32>> = buckets.into_values().filter(|v| v.len() >= 2).collect();
        classes.sort_by_key(|c| c[0]);
        classes
    }

    /// Gap invariance requires, up to truncation artifacts, that the image
    /// chords of every face bound a common face. A pullback candidate is
    /// rejected when some face's image chords stop co-bounding even though
    /// they still co-bound a face of the current structure: that adjacency
    /// loss would be the candidate's own doing, not a truncation artifact.
    fn breaks_existing_adjacency(&self, hypo: &[Vec<u32>], current: &ChordFaceIndex) -> bool {
        let n = self.support.len() as u32;
        let hypo_index = chord_face_index(n, hypo);
        for face in &hypo_index.faces {
            let image_chords: BTreeSet<(u32, u32)> = face
                .iter()
                .filter_map(|&(a, b)| {
                    let ia = self.sigma[a as usize];
                    let ib = self.sigma[b as usize];
                    match ia.cmp(&ib) {
                        core::cmp::Ordering::Less => Some((ia, ib)),
                        core::cmp::Ordering::Greater => Some((ib, ia)),
                        core::cmp::Ordering::Equal => None,
                    }
                })
                .collect();
            if image_chords.len() < 2 {
                continue;
            }
            if !hypo_index.cofacial(&image_chords) && current.cofacial(&image_chords) {
                return true;
            }
        }
        false
    }

    fn into_classes(mut self) -> Vec<Vec<u32>> {
        let buckets = self.buckets();
        let mut classes: Vec<Vec<u32>> = buckets
            .into_values()
            .filter(|v| v.len() >= 2)
            .collect();
        classes.sort_by_key(|c| c[0]);
        classes
    }
}

struct Atom {
    members: Vec<u32>,
    labels: Vec<u32>,
}

#[derive(Clone)]
struct Group {
    /// (support position, image position) pairs, sorted by position.
    members: Vec<(u32, u32)>,
    labels: BTreeSet<u32>,
}

impl Group {
    fn positions(&self) -> Vec<u32> {
        self.members.iter().map(|&(p, _)| p).collect()
    }

    /// Walking the members in circle order, the images must rotate through
    /// the targets in their circle order.
    fn order_preserving(&self, targets: &[u32]) -> bool {
        let t = targets.len();
        if self.members.len() != t {
            return false;
        }
        let first = self.members[0].1;
        let Some(offset) = targets.iter().position(|&x| x == first) else {
            return false;
        };
        self.members
            .iter()
            .enumerate()
            .all(|(i, &(_, l))| l == targets[(offset + i) % t])
    }
}

struct GroupSearch<'a> {
    targets: &'a [u32],
    external: &'a [Vec<u32>],
    solutions: Vec<Vec<Vec<u32>>>,
    budget: u32,
}

impl<'a> GroupSearch<'a> {
    /// Enumerates partitions of the atoms into unlinked transversal groups,
    /// stopping after two solutions.
    fn dfs(
        &mut self,
        atoms: &[Atom],
        next: usize,
        groups: &mut Vec<Group>,
    ) -> Result<(), LaminationError> {
        if self.solutions.len() >= 2 {
            return Ok(());
        }
        if self.budget == 0 {
            return Err(LaminationError::SearchBudget);
        }
        self.budget -= 1;
        if next == atoms.len() {
            if groups
                .iter()
                .all(|g| g.labels.len() == self.targets.len() && g.order_preserving(self.targets))
            {
                self.solutions
                    .push(groups.iter().map(|g| g.positions()).collect());
            }
            return Ok(());
        }
        let atom = &atoms[next];
        let atom_pairs: Vec<(u32, u32)> = atom
            .members
            .iter()
            .copied()
            .zip(atom.labels.iter().copied())
            .collect();
        for gi in 0..groups.len() {
            if atom.labels.iter().any(|l| groups[gi].labels.contains(l)) {
                continue;
            }
            let mut candidate = groups[gi].clone();
            candidate.members.extend_from_slice(&atom_pairs);
            candidate.members.sort_unstable();
            candidate.labels.extend(atom.labels.iter().copied());
            if !self.placement_ok(&candidate.positions(), groups, gi) {
                continue;
            }
            let saved = core::mem::replace(&mut groups[gi], candidate);
            self.dfs(atoms, next + 1, groups)?;
            groups[gi] = saved;
        }
        // Open a new group with this atom.
        let mut fresh = Group {
            members: atom_pairs,
            labels: atom.labels.iter().copied().collect(),
        };
        fresh.members.sort_unstable();
        if self.placement_ok(&fresh.positions(), groups, usize::MAX) {
            groups.push(fresh);
            self.dfs(atoms, next + 1, groups)?;
            groups.pop();
        }
        Ok(())
    }

    fn placement_ok(&self, candidate: &[u32], groups: &[Group], skip: usize) -> bool {
        for (gi, g) in groups.iter().enumerate() {
            if gi == skip {
                continue;
            }
            if interleaved(candidate, &g.positions()) {
                return false;
            }
        }
        for ext in self.external {
            if interleaved(candidate, ext) {
                return false;
            }
        }
        true
    }
}

/// Edge-chord sets of every face of a chord structure, with a co-boundary
/// query.
struct ChordFaceIndex {
    /// Per face: its edge chords.
    faces: Vec<Vec<(u32, u32)>>,
    /// Chord -> ids of the (at most two) faces it bounds.
    by_chord: BTreeMap<(u32, u32), Vec<usize>>,
}

impl ChordFaceIndex {
    /// True iff some face has every one of the given chords as an edge.
    fn cofacial(&self, chords: &BTreeSet<(u32, u32)>) -> bool {
        let mut iter = chords.iter();
        let Some(first) = iter.next() else {
            return true;
        };
        let Some(seed) = self.by_chord.get(first) else {
            return false;
        };
        'outer: for &fid in seed {
            for chord in chords.iter().skip(1) {
                match self.by_chord.get(chord) {
                    Some(v) if v.contains(&fid) => {}
                    _ => continue 'outer,
                }
            }
            return true;
        }
        false
    }
}

fn chord_face_index(n: u32, classes: &[Vec<u32>]) -> ChordFaceIndex {
    let raw = crate::gaps::extract_raw_faces(n, classes);
    let mut faces = Vec::with_capacity(raw.len());
    let mut by_chord: BTreeMap<(u32, u32), Vec<usize>> = BTreeMap::new();
    for (fi, f) in raw.into_iter().enumerate() {
        let edges: Vec<(u32, u32)> = f.edges.iter().map(|&(a, b, _)| (a, b)).collect();
        for &chord in &edges {
            by_chord.entry(chord).or_default().push(fi);
        }
        faces.push(edges);
    }
    ChordFaceIndex { faces, by_chord }
}

/// True iff two disjoint sorted position sets interleave on the circle
/// (equivalently: chords of one cross chords of the other).
pub(crate) fn interleaved(a: &[u32], b: &[u32]) -> bool {
    if a.len() < 2 || b.len() < 2 {
        return false;
    }
    // b must fall inside a single cyclic gap of a.
    // Find the gap of `a` containing b[0]: predecessors via binary search.
    let pos = a.partition_point(|&x| x < b[0]);
    // b[0] lies in the cyclic gap (a[pos-1], a[pos]) (wrapping).
    let lo = if pos == 0 { a[a.len() - 1] } else { a[pos - 1] };
    let hi = if pos == a.len() { a[0] } else { a[pos] };
    // All of b must lie in that same open gap.
    if lo < hi {
        b.iter().any(|&x| x <= lo || x >= hi)
    } else {
        // gap wraps through 0
        b.iter().any(|&x| x >= hi && x <= lo)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::Angle;

    fn ang(n: i64, d: u64) -> Angle {
        Angle::new(n, d).unwrap()
    }

    fn spec(d: u32, p: u32, q: u32) -> SupportSpec {
        SupportSpec::new(d, p, q).unwrap()
    }

    fn class_angles(lam: &RationalLamination) -> Vec<Vec<Angle>> {
        lam.classes()
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&id| lam.support().angle(id).clone())
                    .collect()
            })
            .collect()
    }

    #[test]
    fn validate_basilica_truncation() {
        let lam = RationalLamination::validate(
            &[vec![ang(1, 3), ang(2, 3)]],
            spec(2, 2, 1),
        )
        .unwrap();
        assert_eq!(lam.classes().len(), 1);
    }

    #[test]
    fn validate_rabbit_class() {
        let lam = RationalLamination::validate(
            &[vec![ang(1, 7), ang(2, 7), ang(4, 7)]],
            spec(2, 3, 0),
        )
        .unwrap();
        assert_eq!(lam.classes().len(), 1);
        assert_eq!(lam.class_period(ClassId(0)), Some(1));
    }

    #[test]
    fn validate_rejects_crossing_diameters() {
        let err = RationalLamination::validate(
            &[
                vec![Angle::zero(), ang(1, 2)],
                vec![ang(1, 4), ang(3, 4)],
            ],
            spec(2, 2, 2),
        )
        .unwrap_err();
        assert!(matches!(err, LaminationError::Unlinked(..)), "{err}");
    }

    #[test]
    fn validate_rejects_outside_support() {
        let err = RationalLamination::validate(
            &[vec![ang(1, 5), ang(4, 5)]],
            spec(2, 3, 0),
        )
        .unwrap_err();
        assert!(matches!(err, LaminationError::OutsideSupport(..)));
    }

    #[test]
    fn saturate_empty_is_trivial() {
        let lam = RationalLamination::saturate(&[], spec(2, 3, 1)).unwrap();
        assert!(lam.classes().is_empty());
    }

    #[test]
    fn saturate_basilica_contains_alpha_and_its_preimage() {
        let lam =
            RationalLamination::saturate(&[(ang(1, 3), ang(2, 3))], spec(2, 3, 1)).unwrap();
        let classes = class_angles(&lam);
        assert!(classes.contains(&vec![ang(1, 3), ang(2, 3)]));
        assert!(classes.contains(&vec![ang(1, 6), ang(5, 6)]));
    }

    #[test]
    fn saturate_airplane_orbit() {
        let lam =
            RationalLamination::saturate(&[(ang(3, 7), ang(4, 7))], spec(2, 3, 0)).unwrap();
        let classes = class_angles(&lam);
        assert_eq!(classes.len(), 3);
        assert!(classes.contains(&vec![ang(3, 7), ang(4, 7)]));
        assert!(classes.contains(&vec![ang(1, 7), ang(6, 7)]));
        assert!(classes.contains(&vec![ang(2, 7), ang(5, 7)]));
    }

    #[test]
    fn saturate_airplane_preimages_are_forced() {
        let lam =
            RationalLamination::saturate(&[(ang(3, 7), ang(4, 7))], spec(2, 3, 1)).unwrap();
        let classes = class_angles(&lam);
        assert!(classes.contains(&vec![ang(3, 14), ang(11, 14)]));
        assert!(classes.contains(&vec![ang(1, 14), ang(13, 14)]));
        assert!(classes.contains(&vec![ang(5, 14), ang(9, 14)]));
    }

    #[test]
    fn saturate_chebyshev_pullback_is_unique() {
        let lam =
            RationalLamination::saturate(&[(ang(1, 4), ang(3, 4))], spec(2, 2, 3)).unwrap();
        let classes = class_angles(&lam);
        assert!(classes.contains(&vec![ang(1, 8), ang(7, 8)]));
        assert!(classes.contains(&vec![ang(3, 8), ang(5, 8)]));
    }

    #[test]
    fn saturate_is_monotone_in_generators() {
        let s = spec(2, 4, 2);
        let small = RationalLamination::saturate(&[(ang(1, 3), ang(2, 3))], s).unwrap();
        let big = RationalLamination::saturate(
            &[(ang(1, 3), ang(2, 3)), (ang(1, 5), ang(4, 5))],
            s,
        );
        // If the bigger generator set is consistent, everything identified
        // by the smaller one stays identified.
        if let Ok(big) = big {
            assert!(small.includes(&big).unwrap());
        }
    }

    #[test]
    fn includes_examples() {
        let s = spec(2, 3, 1);
        let trivial = RationalLamination::trivial(s).unwrap();
        let basilica = RationalLamination::saturate(&[(ang(1, 3), ang(2, 3))], s).unwrap();
        let airplane = RationalLamination::saturate(&[(ang(3, 7), ang(4, 7))], s).unwrap();
        assert!(trivial.includes(&basilica).unwrap());
        assert!(basilica.includes(&basilica).unwrap());
        assert!(!basilica.includes(&airplane).unwrap());
    }

    #[test]
    fn includes_rejects_support_mismatch() {
        let small = RationalLamination::trivial(spec(2, 4, 1)).unwrap();
        let big = RationalLamination::trivial(spec(2, 3, 0)).unwrap();
        assert!(matches!(
            small.includes(&big),
            Err(LaminationError::SupportMismatch)
        ));
    }

    #[test]
    fn validate_is_idempotent() {
        let lam =
            RationalLamination::saturate(&[(ang(1, 3), ang(2, 3))], spec(2, 4, 2)).unwrap();
        let classes: Vec<Vec<Angle>> = class_angles(&lam);
        let revalidated = RationalLamination::validate(&classes, lam.spec()).unwrap();
        assert!(lam.equal_partition(&revalidated));
    }

    #[test]
    fn interleave_detection() {
        assert!(interleaved(&[0, 4], &[2, 6]));
        assert!(!interleaved(&[0, 4], &[1, 3]));
        assert!(!interleaved(&[0, 1], &[2, 3]));
        assert!(interleaved(&[1, 5, 9], &[3, 7]));
        assert!(!interleaved(&[1, 5, 9], &[2, 3]));
    }
}
