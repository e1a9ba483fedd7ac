//! Fatou chains: combinatorial continua built recursively from periodic
//! Fatou gaps by merging touching pieces and adjoining pullback components,
//! together with the periodic cut-point analysis used by the membership
//! oracles.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::gaps::{GapError, GapKind, GapSet};
use crate::lamination::{ClassId, RationalLamination};

/// Level cap for the maximal-chain iteration.
pub const DEFAULT_LEVEL_CAP: u32 = 16;
/// Pullback rounds allowed inside one continuum generation.
pub const DEFAULT_PULLBACK_DEPTH: u32 = 64;
/// Largest period accepted when merging chains.
pub const MAX_MERGED_PERIOD: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChainError {
    #[error("gap error: {0}")]
    Gap(#[from] GapError),
    #[error("periodic gap {0} has unstable classification at this truncation")]
    UnstableGap(u32),
    #[error("gap {0} is not a periodic infinite gap")]
    NotPeriodicInfinite(u32),
    #[error("chains did not stabilize within {0} levels")]
    LevelCap(u32),
    #[error("merged period {0} exceeds the cap of {1}")]
    PeriodOverflow(u64, u64),
    #[error("period bound {0} exceeds the truncation period {1}")]
    BoundExceedsTruncation(u32, u32),
}

/// A connected combinatorial continuum: member gaps and classes with their
/// angle set, closed under the lamination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Support {
    pub angles: BTreeSet<u32>,
    pub gaps: BTreeSet<u32>,
    pub classes: BTreeSet<ClassId>,
}

impl Support {
    /// Builds a support from member gaps and classes and closes it under
    /// the lamination: any class meeting the angle set is wholly contained.
    pub fn new(
        lam: &RationalLamination,
        gaps: &GapSet,
        member_gaps: impl IntoIterator<Item = u32>,
        member_classes: impl IntoIterator<Item = ClassId>,
    ) -> Self {
        let mut support = Support {
            angles: BTreeSet::new(),
            gaps: member_gaps.into_iter().collect(),
            classes: member_classes.into_iter().collect(),
        };
        for &g in &support.gaps {
            support
                .angles
                .extend(gaps.gaps()[g as usize].vertices.iter().copied());
        }
        let classes = support.classes.clone();
        for c in classes {
            support.angles.extend(lam.class_angles(c).iter().copied());
        }
        support.close(lam);
        support
    }

    fn close(&mut self, lam: &RationalLamination) {
        loop {
            let mut new_angles: Vec<u32> = Vec::new();
            for &a in &self.angles {
                if let Some(c) = lam.class_of(a) {
                    if self.classes.insert(c) {
                        new_angles.extend(lam.class_angles(c).iter().copied());
                    }
                }
            }
            let before = self.angles.len();
            self.angles.extend(new_angles);
            if self.angles.len() == before {
                return;
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty() && self.classes.is_empty()
    }

    /// True iff sigma^p maps the angle set into itself.
    pub fn invariant_under(&self, lam: &RationalLamination, p: u32) -> bool {
        self.angles.iter().all(|&a| {
            let mut x = a;
            for _ in 0..p {
                x = lam.sigma_id(x);
            }
            self.angles.contains(&x)
        })
    }
}

/// A combinatorial Fatou chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FatouChain {
    pub support: Support,
    pub level: u32,
    pub period: u32,
    pub return_degree: u32,
    pub stable: bool,
}

/// Outcome of the periodic cut-class enumeration on a support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutPointReport {
    /// Periodic cut classes with their class periods.
    pub cut_classes: Vec<(ClassId, u32)>,
    /// Cumulative counts per period bound window.
    pub growth_table: Vec<(u32, u32)>,
    pub verdict: CutVerdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutVerdict {
    ChainCompatible,
    GrowthDetected,
}

/// One chain per periodic infinite gap, each at level 0.
pub fn level0_chains(
    lam: &RationalLamination,
    gaps: &GapSet,
) -> Result<Vec<FatouChain>, ChainError> {
    let mut out = Vec::new();
    for &gid in &gaps.periodic_infinite() {
        let gap = gaps.gap(gid)?;
        if !gap.stable {
            return Err(ChainError::UnstableGap(gid));
        }
        let support = Support::new(lam, gaps, [gid], []);
        let period = gap.period.expect("periodic gap");
        let stable = {
            let grown = pullback_component(lam, gaps, &support, period);
            grown == support
        };
        out.push(FatouChain {
            support,
            level: 0,
            period,
            return_degree: gap.return_degree.unwrap_or(1),
            stable,
        });
    }
    Ok(out)
}

fn uf_find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// The chain-graph component of `base` inside its sigma^p preimage: all
/// gaps and classes mapping into the support after p steps, connected to
/// the base through shared angles.
fn pullback_component(
    lam: &RationalLamination,
    gaps: &GapSet,
    base: &Support,
    p: u32,
) -> Support {
    // Candidate gaps: the p-fold gap image lands in a member gap.
    let mut candidate_gaps: BTreeSet<u32> = base.gaps.clone();
    for g in gaps.gaps() {
        let mut cur = g.id;
        let mut ok = true;
        for _ in 0..p {
            match gaps.image(cur) {
                Some(next) => cur = next,
                None => {
                    ok = false;
                    break;
                }
            }
        }
        if ok && base.gaps.contains(&cur) {
            candidate_gaps.insert(g.id);
        }
    }
    // Candidate classes: the p-fold sigma image lies in the angle set.
    let mut candidate_classes: BTreeSet<ClassId> = base.classes.clone();
    for ci in 0..lam.classes().len() as u32 {
        let c = ClassId(ci);
        let all_in = lam.class_angles(c).iter().all(|&a| {
            let mut x = a;
            for _ in 0..p {
                x = lam.sigma_id(x);
            }
            base.angles.contains(&x)
        });
        if all_in {
            candidate_classes.insert(c);
        }
    }

    // Connected component through shared angles.
    let gap_list: Vec<u32> = candidate_gaps.iter().copied().collect();
    let class_list: Vec<ClassId> = candidate_classes.iter().copied().collect();
    let total = gap_list.len() + class_list.len();
    let mut parent: Vec<usize> = (0..total).collect();
    let mut by_angle: BTreeMap<u32, usize> = BTreeMap::new();
    {
        let mut touch = |parent: &mut Vec<usize>, obj: usize, a: u32| {
            match by_angle.get(&a) {
                Some(&other) => {
                    let ra = uf_find(parent, obj);
                    let rb = uf_find(parent, other);
                    if ra != rb {
                        parent[ra] = rb;
                    }
                }
                None => {
                    by_angle.insert(a, obj);
                }
            }
        };
        for (i, &g) in gap_list.iter().enumerate() {
            for &v in &gaps.gaps()[g as usize].vertices {
                touch(&mut parent, i, v);
            }
        }
        for (j, &c) in class_list.iter().enumerate() {
            for &a in lam.class_angles(c) {
                touch(&mut parent, gap_list.len() + j, a);
            }
        }
    }
    // Component containing the base.
    let base_obj = if let Some(&g0) = base.gaps.iter().next() {
        gap_list
            .iter()
            .position(|&g| g == g0)
            .expect("base gap listed")
    } else if let Some(&c0) = base.classes.iter().next() {
        gap_list.len()
            + class_list
                .iter()
                .position(|&c| c == c0)
                .expect("base class listed")
    } else {
        return base.clone();
    };
    let root = uf_find(&mut parent, base_obj);
    let member_gaps: Vec<u32> = (0..gap_list.len())
        .filter(|&i| uf_find(&mut parent, i) == root)
        .map(|i| gap_list[i])
        .collect();
    let member_classes: Vec<ClassId> = (0..class_list.len())
        .filter(|&j| uf_find(&mut parent, gap_list.len() + j) == root)
        .map(|j| class_list[j])
        .collect();
    Support::new(lam, gaps, member_gaps, member_classes)
}

/// The continuum generated by a support: adjoin pullback components until
/// nothing changes (or the depth runs out, which leaves `stable = false`).
pub fn generated_continuum(
    lam: &RationalLamination,
    gaps: &GapSet,
    base: Support,
    period: u32,
    level: u32,
    depth: u32,
) -> Result<FatouChain, ChainError> {
    // Forward invariance of the base is the caller's contract; truncated
    // gap boundaries can miss it by one preperiod level, which the pullback
    // absorbs, so it is not enforced here.
    let mut current = base;
    let mut stable = false;
    for _ in 0..depth {
        let next = pullback_component(lam, gaps, &current, period);
        if next == current {
            stable = true;
            break;
        }
        current = next;
    }
    let return_degree = support_return_degree(lam, &current, period);
    Ok(FatouChain {
        support: current,
        level,
        period,
        return_degree,
        stable,
    })
}

/// Covering degree of sigma^p on the angle set, counting classes as single
/// points.
fn support_return_degree(lam: &RationalLamination, support: &Support, p: u32) -> u32 {
    let mut fibers: BTreeMap<u32, BTreeSet<(u32, u32)>> = BTreeMap::new();
    for &a in &support.angles {
        let mut x = a;
        for _ in 0..p {
            x = lam.sigma_id(x);
        }
        let key = match lam.class_of(a) {
            Some(c) => (0, c.0),
            None => (1, a),
        };
        fibers.entry(x).or_default().insert(key);
    }
    fibers.values().map(|s| s.len() as u32).max().unwrap_or(1)
}

/// Merges chains whose supports meet and regenerates each merged component.
pub fn next_level(
    lam: &RationalLamination,
    gaps: &GapSet,
    chains: &[FatouChain],
) -> Result<Vec<FatouChain>, ChainError> {
    if chains.is_empty() {
        return Ok(Vec::new());
    }
    let n = chains.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in i + 1..n {
            if !chains[i]
                .support
                .angles
                .is_disjoint(&chains[j].support.angles)
            {
                let ri = uf_find(&mut parent, i);
                let rj = uf_find(&mut parent, j);
                if ri != rj {
                    parent[ri] = rj;
                }
            }
        }
    }
    let mut components: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = uf_find(&mut parent, i);
        components.entry(r).or_default().push(i);
    }
    let next_level_no = chains.iter().map(|c| c.level).max().unwrap_or(0) + 1;
    let mut out = Vec::new();
    for (_, members) in components {
        let mut period: u64 = 1;
        for &m in &members {
            period = num_integer::lcm(period, chains[m].period as u64);
            if period > MAX_MERGED_PERIOD {
                return Err(ChainError::PeriodOverflow(period, MAX_MERGED_PERIOD));
            }
        }
        let mut member_gaps: BTreeSet<u32> = BTreeSet::new();
        let mut member_classes: BTreeSet<ClassId> = BTreeSet::new();
        for &m in &members {
            member_gaps.extend(chains[m].support.gaps.iter().copied());
            member_classes.extend(chains[m].support.classes.iter().copied());
        }
        let base = Support::new(lam, gaps, member_gaps, member_classes);
        let chain = generated_continuum(
            lam,
            gaps,
            base,
            period as u32,
            next_level_no,
            DEFAULT_PULLBACK_DEPTH,
        )?;
        out.push(chain);
    }
    Ok(out)
}

/// Iterates `next_level` until the chain list stops changing.
pub fn maximal_chains(
    lam: &RationalLamination,
    gaps: &GapSet,
) -> Result<Vec<FatouChain>, ChainError> {
    let mut chains = level0_chains(lam, gaps)?;
    for _ in 0..DEFAULT_LEVEL_CAP {
        let next = next_level(lam, gaps, &chains)?;
        let same = next.len() == chains.len()
            && next
                .iter()
                .zip(chains.iter())
                .all(|(a, b)| a.support == b.support);
        if same {
            return Ok(next);
        }
        chains = next;
    }
    Err(ChainError::LevelCap(DEFAULT_LEVEL_CAP))
}

/// The maximal chain generated by a single periodic infinite gap.
pub fn chain_from_gap(
    lam: &RationalLamination,
    gaps: &GapSet,
    gap_id: u32,
) -> Result<FatouChain, ChainError> {
    let gap = gaps.gap(gap_id)?;
    let period = match (gap.kind, gap.period) {
        (GapKind::Infinite, Some(p)) => p,
        _ => return Err(ChainError::NotPeriodicInfinite(gap_id)),
    };
    let base = Support::new(lam, gaps, [gap_id], []);
    let mut chain = generated_continuum(lam, gaps, base, period, 0, DEFAULT_PULLBACK_DEPTH)?;
    // The construction is level-by-level; iterate to the maximal stage.
    loop {
        let next = generated_continuum(
            lam,
            gaps,
            chain.support.clone(),
            period,
            chain.level + 1,
            DEFAULT_PULLBACK_DEPTH,
        )?;
        if next.support == chain.support {
            chain.stable = next.stable;
            return Ok(chain);
        }
        chain = next;
    }
}

/// Enumerates periodic classes inside `support` whose removal disconnects
/// its chain graph, with counts per period window.
pub fn periodic_cut_points(
    lam: &RationalLamination,
    gaps: &GapSet,
    support: &Support,
    period_bound: u32,
) -> Result<CutPointReport, ChainError> {
    if period_bound > lam.spec().max_period {
        return Err(ChainError::BoundExceedsTruncation(
            period_bound,
            lam.spec().max_period,
        ));
    }
    let mut cut_classes: Vec<(ClassId, u32)> = Vec::new();
    for &c in &support.classes {
        let Some(p) = lam.class_period(c) else {
            continue;
        };
        if p > period_bound {
            continue;
        }
        if lam
            .class_angles(c)
            .iter()
            .filter(|a| support.angles.contains(a))
            .count()
            < 2
        {
            continue;
        }
        if disconnects(lam, gaps, support, c) {
            cut_classes.push((c, p));
        }
    }
    let mut growth_table = Vec::new();
    let mut bound = 4u32.min(period_bound);
    loop {
        let count = cut_classes.iter().filter(|&&(_, p)| p <= bound).count() as u32;
        growth_table.push((bound, count));
        if bound >= period_bound {
            break;
        }
        bound = (bound + 4).min(period_bound);
    }
    let verdict = match growth_table.len() {
        0 | 1 => CutVerdict::ChainCompatible,
        len => {
            let (_, a) = growth_table[len - 2];
            let (_, b) = growth_table[len - 1];
            if b > a {
                CutVerdict::GrowthDetected
            } else {
                CutVerdict::ChainCompatible
            }
        }
    };
    Ok(CutPointReport {
        cut_classes,
        growth_table,
        verdict,
    })
}

/// True iff removing the class (and its angles) splits the support's chain
/// graph into at least two nonempty parts.
fn disconnects(
    lam: &RationalLamination,
    gaps: &GapSet,
    support: &Support,
    removed: ClassId,
) -> bool {
    let removed_angles: BTreeSet<u32> = lam.class_angles(removed).iter().copied().collect();
    let gap_list: Vec<u32> = support.gaps.iter().copied().collect();
    let class_list: Vec<ClassId> = support
        .classes
        .iter()
        .copied()
        .filter(|&c| c != removed)
        .collect();
    let total = gap_list.len() + class_list.len();
    if total < 2 {
        return false;
    }
    let mut parent: Vec<usize> = (0..total).collect();
    let mut by_angle: BTreeMap<u32, usize> = BTreeMap::new();
    let mut merges = 0usize;
    {
        let mut touch = |parent: &mut Vec<usize>, obj: usize, a: u32| -> usize {
            if removed_angles.contains(&a) {
                return 0;
            }
            match by_angle.get(&a) {
                Some(&other) => {
                    let ra = uf_find(parent, obj);
                    let rb = uf_find(parent, other);
                    if ra != rb {
                        parent[ra] = rb;
                        return 1;
                    }
                    0
                }
                None => {
                    by_angle.insert(a, obj);
                    0
                }
            }
        };
        for (i, &g) in gap_list.iter().enumerate() {
            for &v in &gaps.gaps()[g as usize].vertices {
                merges += touch(&mut parent, i, v);
            }
        }
        for (j, &c) in class_list.iter().enumerate() {
            for &a in lam.class_angles(c) {
                merges += touch(&mut parent, gap_list.len() + j, a);
            }
        }
    }
    total - merges >= 2
}

/// Renormalization predicate on a stable chain.
///
/// A combinatorial attracting point lives inside a periodic infinite gap,
/// and its immediate basin is that gap; the chain contains the point
/// exactly when the gap is a member, in which case the whole gap closure
/// must lie in the chain's angle set.
pub fn induces_renormalization(
    lam: &RationalLamination,
    gaps: &GapSet,
    chain: &FatouChain,
) -> bool {
    let _ = lam;
    gaps.periodic_infinite().iter().all(|&g| {
        !chain.support.gaps.contains(&g)
            || gaps.gaps()[g as usize]
                .vertices
                .iter()
                .all(|v| chain.support.angles.contains(v))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::{Angle, SupportSpec};

    fn ang(n: i64, d: u64) -> Angle {
        Angle::new(n, d).unwrap()
    }

    fn spec(d: u32, p: u32, q: u32) -> SupportSpec {
        SupportSpec::new(d, p, q).unwrap()
    }

    fn basilica() -> RationalLamination {
        RationalLamination::saturate(&[(ang(1, 3), ang(2, 3))], spec(2, 6, 3)).unwrap()
    }

    fn airplane() -> RationalLamination {
        RationalLamination::saturate(&[(ang(3, 7), ang(4, 7))], spec(2, 6, 3)).unwrap()
    }

    fn rabbit() -> RationalLamination {
        RationalLamination::saturate(
            &[(ang(1, 7), ang(2, 7)), (ang(2, 7), ang(4, 7))],
            spec(2, 6, 3),
        )
        .unwrap()
    }

    fn full_angles(lam: &RationalLamination) -> BTreeSet<u32> {
        (0..lam.support().len() as u32).collect()
    }

    #[test]
    fn trivial_has_one_maximal_chain() {
        let lam = RationalLamination::trivial(spec(2, 4, 1)).unwrap();
        let gaps = GapSet::compute(&lam).unwrap();
        let chains = maximal_chains(&lam, &gaps).unwrap();
        assert_eq!(chains.len(), 1);
        assert_eq!(chains[0].support.angles, full_angles(&lam));
        assert!(chains[0].stable);
    }

    #[test]
    fn basilica_level0_and_maximal() {
        let lam = basilica();
        let gaps = GapSet::compute(&lam).unwrap();
        let level0 = level0_chains(&lam, &gaps).unwrap();
        assert_eq!(level0.len(), 2, "period-2 Fatou cycle");
        for c in &level0 {
            assert_eq!(c.period, 2);
            assert!(c.stable, "level-0 basilica chains are stable continua");
        }
        let maximal = maximal_chains(&lam, &gaps).unwrap();
        assert_eq!(maximal.len(), 1, "the two gaps merge through the fixed class");
        assert_eq!(maximal[0].support.angles, full_angles(&lam));
        assert!(maximal[0].stable);
    }

    #[test]
    fn airplane_three_disjoint_chains() {
        let lam = airplane();
        let gaps = GapSet::compute(&lam).unwrap();
        let maximal = maximal_chains(&lam, &gaps).unwrap();
        assert_eq!(maximal.len(), 3);
        for (i, a) in maximal.iter().enumerate() {
            for b in &maximal[i + 1..] {
                assert!(a.support.angles.is_disjoint(&b.support.angles));
            }
        }
        // Fixed point of next_level.
        let again = next_level(&lam, &gaps, &maximal).unwrap();
        let sup: Vec<_> = again.iter().map(|c| c.support.clone()).collect();
        let old: Vec<_> = maximal.iter().map(|c| c.support.clone()).collect();
        assert_eq!(sup, old);
    }

    #[test]
    fn rabbit_merges_to_full_support() {
        let lam = rabbit();
        let gaps = GapSet::compute(&lam).unwrap();
        let maximal = maximal_chains(&lam, &gaps).unwrap();
        assert_eq!(maximal.len(), 1);
        assert_eq!(maximal[0].support.angles, full_angles(&lam));
    }

    #[test]
    fn chain_from_gap_matches_boundary_criticality() {
        // No critical class on any basilica or airplane gap boundary, so the
        // single-gap chain is the gap closure itself.
        for lam in [basilica(), airplane()] {
            let gaps = GapSet::compute(&lam).unwrap();
            for &gid in &gaps.periodic_infinite() {
                let chain = chain_from_gap(&lam, &gaps, gid).unwrap();
                let own = Support::new(&lam, &gaps, [gid], []);
                let boundary_critical = own.classes.iter().any(|&c| lam.class_degree(c) >= 2);
                assert!(!boundary_critical);
                assert_eq!(chain.support, own);
                assert!(chain.stable);
            }
        }
    }

    #[test]
    fn basilica_cut_points_stabilize() {
        let lam = basilica();
        let gaps = GapSet::compute(&lam).unwrap();
        let maximal = maximal_chains(&lam, &gaps).unwrap();
        let report =
            periodic_cut_points(&lam, &gaps, &maximal[0].support, lam.spec().max_period)
                .unwrap();
        assert_eq!(report.cut_classes.len(), 1, "only the fixed class cuts");
        assert_eq!(report.verdict, CutVerdict::ChainCompatible);
    }

    #[test]
    fn airplane_gap_closure_has_no_cut_classes() {
        let lam = airplane();
        let gaps = GapSet::compute(&lam).unwrap();
        let maximal = maximal_chains(&lam, &gaps).unwrap();
        let report =
            periodic_cut_points(&lam, &gaps, &maximal[0].support, lam.spec().max_period)
                .unwrap();
        assert!(report.cut_classes.is_empty());
        assert_eq!(report.verdict, CutVerdict::ChainCompatible);
    }

    #[test]
    fn airplane_full_support_cut_classes_are_the_cycle() {
        let lam = airplane();
        let gaps = GapSet::compute(&lam).unwrap();
        let all_gaps: Vec<u32> = gaps.gaps().iter().map(|g| g.id).collect();
        let support = Support::new(&lam, &gaps, all_gaps, []);
        let report = periodic_cut_points(&lam, &gaps, &support, 6).unwrap();
        assert_eq!(report.cut_classes.len(), 3, "the period-3 leaf orbit");
    }

    #[test]
    fn cut_point_bound_rejected_beyond_truncation() {
        let lam = basilica();
        let gaps = GapSet::compute(&lam).unwrap();
        let maximal = maximal_chains(&lam, &gaps).unwrap();
        assert!(matches!(
            periodic_cut_points(&lam, &gaps, &maximal[0].support, 99),
            Err(ChainError::BoundExceedsTruncation(99, _))
        ));
    }

    #[test]
    fn maximal_chains_induce_renormalization() {
        for lam in [basilica(), airplane(), rabbit()] {
            let gaps = GapSet::compute(&lam).unwrap();
            for chain in maximal_chains(&lam, &gaps).unwrap() {
                assert!(induces_renormalization(&lam, &gaps, &chain));
            }
        }
    }

    #[test]
    fn return_degrees_multiply_along_cycles() {
        for lam in [basilica(), airplane(), rabbit()] {
            let gaps = GapSet::compute(&lam).unwrap();
            for c in level0_chains(&lam, &gaps).unwrap() {
                let gid = *c.support.gaps.iter().next().unwrap();
                let mut product = 1;
                let mut cur = gid;
                for _ in 0..c.period {
                    product *= gaps.step_degree(cur);
                    cur = gaps.image(cur).unwrap();
                }
                assert_eq!(cur, gid);
                assert_eq!(product, c.return_degree);
            }
        }
    }
}
