//! Molecule membership oracles: whether a lamination's polynomial lies in
//! the molecule of a primitive hyperbolic center, whether two centers span
//! the same molecule, and whether subhyperbolic combinatorics sits on the
//! closure of a bounded hyperbolic component.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::angle::Angle;
use crate::chains::{
    self, ChainError, CutVerdict, FatouChain, Support,
};
use crate::gaps::{self, CriticalElement, GapError, GapKind, GapSet};
use crate::lamination::{ClassId, LaminationError, RationalLamination};

/// Period-window ceiling for the cut-point cross-check.
pub const CUT_CHECK_BOUND: u32 = 12;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MoleculeError {
    #[error("lamination error: {0}")]
    Lamination(#[from] LaminationError),
    #[error("gap error: {0}")]
    Gap(#[from] GapError),
    #[error("chain error: {0}")]
    Chain(#[from] ChainError),
    #[error("center lamination is not primitive")]
    NotPrimitive,
    #[error("center lamination is not hyperbolic: critical element on the Julia side")]
    NotHyperbolic,
    #[error("gap {0} is not a gap of the center lamination")]
    BadGap(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    In,
    Out,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailedCondition {
    None,
    Inclusion,
    /// The sector of this center gap is not a maximal chain.
    Chain(u32),
}

/// Diagnostic payloads attached to a membership verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// A center identification missing from the test lamination.
    MissingIdentification(Angle, Angle),
    /// Periodic cut-class counts per period window for a sector.
    GrowthTable(u32, Vec<(u32, u32)>),
    /// A center gap whose sector fails the chain test.
    NonChainGap(u32),
    /// A center gap with unstable classification.
    UnstableGap(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MembershipVerdict {
    pub verdict: Verdict,
    pub failed_condition: FailedCondition,
    pub witnesses: Vec<Witness>,
}

/// Checks that a center lamination is primitive and hyperbolic; returns its
/// gap set.
fn check_center(lam: &RationalLamination) -> Result<GapSet, MoleculeError> {
    let gap_set = GapSet::compute(lam)?;
    if !gaps::is_primitive(lam, &gap_set) {
        return Err(MoleculeError::NotPrimitive);
    }
    for c in gaps::critical_elements(lam, &gap_set) {
        match c {
            CriticalElement::Class { .. } => return Err(MoleculeError::NotHyperbolic),
            CriticalElement::Gap { id, .. } => {
                if gap_set.gap(id)?.kind != GapKind::Infinite {
                    return Err(MoleculeError::NotHyperbolic);
                }
            }
        }
    }
    Ok(gap_set)
}

/// The sub-support of the test lamination on the gap's side of each of its
/// edges, together with all gaps and classes it spans.
pub fn sector_support(
    center: &RationalLamination,
    center_gaps: &GapSet,
    gap_id: u32,
    test: &RationalLamination,
    test_gaps: &GapSet,
) -> Result<Support, MoleculeError> {
    if !center.includes(test)? {
        return Err(MoleculeError::Lamination(LaminationError::SupportMismatch));
    }
    let gap = center_gaps.gap(gap_id)?;
    // Arc constraints from the gap's edges, as angle values.
    let mut constraints: Vec<(Angle, Angle, bool)> = Vec::new();
    for (i, e) in gap.edges.iter().enumerate() {
        let a = center.support().angle(e.a).clone();
        let b = center.support().angle(e.b).clone();
        // The gap sits inside its defining interval (first edge) and
        // outside every other edge; the root gap is outside all of them.
        let inside = i == 0 && gap.id != 0;
        constraints.push((a, b, inside));
    }
    let keep = |x: &Angle| -> bool {
        constraints.iter().all(|(a, b, inside)| {
            let within = a <= x && x <= b;
            if *inside {
                within
            } else {
                !within || x == a || x == b
            }
        })
    };
    let kept: BTreeSet<u32> = (0..test.support().len() as u32)
        .filter(|&i| keep(test.support().angle(i)))
        .collect();
    let member_gaps: Vec<u32> = test_gaps
        .gaps()
        .iter()
        .filter(|g| g.vertices.iter().all(|v| kept.contains(v)))
        .map(|g| g.id)
        .collect();
    let member_classes: Vec<ClassId> = (0..test.classes().len() as u32)
        .map(ClassId)
        .filter(|&c| {
            test.class_angles(c)
                .iter()
                .any(|a| kept.contains(a))
        })
        .collect();
    Ok(Support::new(test, test_gaps, member_gaps, member_classes))
}

/// Theorem-level membership test of the test lamination in the center's
/// molecule: inclusion of laminations plus, for every periodic center gap,
/// the sector being a maximal chain. The periodic cut-class growth test
/// runs as an independent cross-check; disagreement is surfaced as
/// inconclusive.
pub fn molecule_membership(
    center: &RationalLamination,
    test: &RationalLamination,
) -> Result<MembershipVerdict, MoleculeError> {
    let center_gaps = check_center(center)?;

    // Condition (1): every center identification holds in the test map.
    if !center.includes(test)? {
        let witness = inclusion_witness(center, test);
        return Ok(MembershipVerdict {
            verdict: Verdict::Out,
            failed_condition: FailedCondition::Inclusion,
            witnesses: witness.into_iter().collect(),
        });
    }

    let test_gaps = GapSet::compute(test)?;
    let chains = match chains::maximal_chains(test, &test_gaps) {
        Ok(chains) => chains,
        Err(ChainError::UnstableGap(g)) => {
            return Ok(MembershipVerdict {
                verdict: Verdict::Inconclusive,
                failed_condition: FailedCondition::None,
                witnesses: alloc::vec![Witness::UnstableGap(g)],
            });
        }
        Err(e) => return Err(e.into()),
    };

    // Condition (2) on every periodic center gap, with the growth test as
    // the independent cross-check.
    let mut chain_failure: Option<u32> = None;
    let mut growth_failure: Option<(u32, Vec<(u32, u32)>)> = None;
    for &gid in &center_gaps.periodic_infinite() {
        if !center_gaps.gap(gid)?.stable {
            return Ok(MembershipVerdict {
                verdict: Verdict::Inconclusive,
                failed_condition: FailedCondition::None,
                witnesses: alloc::vec![Witness::UnstableGap(gid)],
            });
        }
        let sector = sector_support(center, &center_gaps, gid, test, &test_gaps)?;
        if chain_failure.is_none()
            && !chains.iter().any(|c| c.support.angles == sector.angles)
        {
            chain_failure = Some(gid);
        }
        let bound = CUT_CHECK_BOUND.min(test.spec().max_period);
        let report = chains::periodic_cut_points(test, &test_gaps, &sector, bound)?;
        if growth_failure.is_none() && report.verdict == CutVerdict::GrowthDetected {
            growth_failure = Some((gid, report.growth_table));
        }
    }

    let verdict = match (chain_failure, &growth_failure) {
        (None, None) => MembershipVerdict {
            verdict: Verdict::In,
            failed_condition: FailedCondition::None,
            witnesses: Vec::new(),
        },
        (Some(gid), Some((_, table))) => MembershipVerdict {
            verdict: Verdict::Out,
            failed_condition: FailedCondition::Chain(gid),
            witnesses: alloc::vec![
                Witness::NonChainGap(gid),
                Witness::GrowthTable(gid, table.clone()),
            ],
        },
        // The two routes disagree: truncation too shallow to decide.
        (Some(gid), None) => MembershipVerdict {
            verdict: Verdict::Inconclusive,
            failed_condition: FailedCondition::None,
            witnesses: alloc::vec![Witness::NonChainGap(gid)],
        },
        (None, Some((gid, table))) => MembershipVerdict {
            verdict: Verdict::Inconclusive,
            failed_condition: FailedCondition::None,
            witnesses: alloc::vec![Witness::GrowthTable(*gid, table.clone())],
        },
    };
    Ok(verdict)
}

/// A pair identified by the center but not by the test lamination.
fn inclusion_witness(
    center: &RationalLamination,
    test: &RationalLamination,
) -> Option<Witness> {
    for class in center.classes() {
        for w in class.windows(2) {
            let a = center.support().angle(w[0]);
            let b = center.support().angle(w[1]);
            let (Some(pa), Some(pb)) = (test.support().position(a), test.support().position(b))
            else {
                continue;
            };
            let ca = test.class_of(pa);
            if ca.is_none() || ca != test.class_of(pb) {
                return Some(Witness::MissingIdentification(a.clone(), b.clone()));
            }
        }
    }
    None
}

/// Theorem-level comparison of two molecule centers: their molecules
/// coincide exactly when the center laminations agree on the common
/// support.
pub fn same_molecule(
    c1: &RationalLamination,
    c2: &RationalLamination,
) -> Result<bool, MoleculeError> {
    check_center(c1)?;
    check_center(c2)?;
    if c1.d() != c2.d() {
        return Err(MoleculeError::Lamination(LaminationError::DegreeMismatch(
            c1.d(),
            c2.d(),
        )));
    }
    // Partitions restricted to the common support must coincide.
    let common: Vec<Angle> = c1
        .support()
        .angles()
        .iter()
        .filter(|a| c2.support().position(a).is_some())
        .cloned()
        .collect();
    let restrict = |lam: &RationalLamination| -> BTreeSet<Vec<Angle>> {
        lam.classes()
            .iter()
            .map(|class| {
                class
                    .iter()
                    .map(|&id| lam.support().angle(id).clone())
                    .filter(|a| common.binary_search(a).is_ok())
                    .collect::<Vec<Angle>>()
            })
            .filter(|c| c.len() >= 2)
            .collect()
    };
    Ok(restrict(c1) == restrict(c2))
}

/// Theorem-level boundary test for subhyperbolic combinatorics: every
/// critical element must eventually map into the maximal chain generated by
/// one periodic Fatou gap.
pub fn boundary_membership(lam: &RationalLamination) -> Result<bool, MoleculeError> {
    let gap_set = GapSet::compute(lam)?;
    let periodic = gap_set.periodic_infinite();
    let single_chains: Vec<FatouChain> = periodic
        .iter()
        .map(|&g| chains::chain_from_gap(lam, &gap_set, g))
        .collect::<Result<_, _>>()?;
    let criticals = gaps::critical_elements(lam, &gap_set);
    let max_steps = lam.spec().max_period + lam.spec().max_preperiod + 1;
    for critical in criticals {
        let mut angles: Vec<u32> = match critical {
            CriticalElement::Class { id, .. } => lam.class_angles(id).to_vec(),
            CriticalElement::Gap { id, .. } => gap_set.gap(id)?.vertices.clone(),
        };
        let mut absorbed = false;
        'steps: for _ in 0..=max_steps {
            for chain in &single_chains {
                if angles.iter().all(|a| chain.support.angles.contains(a)) {
                    absorbed = true;
                    break 'steps;
                }
            }
            for a in angles.iter_mut() {
                *a = lam.sigma_id(*a);
            }
            angles.sort_unstable();
            angles.dedup();
        }
        if !absorbed {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::SupportSpec;

    fn ang(n: i64, d: u64) -> Angle {
        Angle::new(n, d).unwrap()
    }

    fn spec(d: u32, p: u32, q: u32) -> SupportSpec {
        SupportSpec::new(d, p, q).unwrap()
    }

    fn trivial() -> RationalLamination {
        RationalLamination::trivial(spec(2, 6, 3)).unwrap()
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

    #[test]
    fn center_checks() {
        assert!(check_center(&trivial()).is_ok());
        assert!(check_center(&airplane()).is_ok());
        assert!(matches!(
            check_center(&basilica()),
            Err(MoleculeError::NotPrimitive)
        ));
    }

    #[test]
    fn trivial_center_contains_itself_and_basilica() {
        let t = trivial();
        let v = molecule_membership(&t, &t).unwrap();
        assert_eq!(v.verdict, Verdict::In);
        assert_eq!(v.failed_condition, FailedCondition::None);

        let v = molecule_membership(&t, &basilica()).unwrap();
        assert_eq!(v.verdict, Verdict::In);

        let v = molecule_membership(&t, &rabbit()).unwrap();
        assert_eq!(v.verdict, Verdict::In);
    }

    #[test]
    fn airplane_center_contains_itself() {
        let a = airplane();
        let v = molecule_membership(&a, &a).unwrap();
        assert_eq!(v.verdict, Verdict::In);
    }

    #[test]
    fn airplane_not_in_trivial_molecule_by_leaf_data() {
        // The leaf-generated airplane truncation carries no growing
        // periodic cut classes, so the two routes disagree and the oracle
        // refuses to decide.
        let v = molecule_membership(&trivial(), &airplane()).unwrap();
        assert_eq!(v.verdict, Verdict::Inconclusive);
    }

    #[test]
    fn inclusion_failure_is_out() {
        let v = molecule_membership(&airplane(), &basilica()).unwrap();
        assert_eq!(v.verdict, Verdict::Out);
        assert_eq!(v.failed_condition, FailedCondition::Inclusion);
        assert!(matches!(
            v.witnesses.first(),
            Some(Witness::MissingIdentification(..))
        ));
    }

    #[test]
    fn same_molecule_examples() {
        let a = airplane();
        assert!(same_molecule(&a, &a).unwrap());
        assert!(!same_molecule(&a, &trivial()).unwrap());
        let p4 = RationalLamination::saturate(&[(ang(7, 15), ang(8, 15))], spec(2, 6, 3))
            .unwrap();
        assert!(!same_molecule(&a, &p4).unwrap());
        assert!(same_molecule(&p4, &p4).unwrap());
    }

    #[test]
    fn boundary_membership_desk_cases() {
        assert!(boundary_membership(&basilica()).unwrap());
        assert!(boundary_membership(&rabbit()).unwrap());
        assert!(boundary_membership(&trivial()).unwrap());
    }

    #[test]
    fn sector_of_trivial_center_is_everything() {
        let t = trivial();
        let b = basilica();
        let tg = GapSet::compute(&t).unwrap();
        let bg = GapSet::compute(&b).unwrap();
        let disk = tg.periodic_infinite()[0];
        let sector = sector_support(&t, &tg, disk, &b, &bg).unwrap();
        assert_eq!(sector.angles.len(), b.support().len());
    }

    #[test]
    fn sector_of_basilica_gap_in_itself_is_the_gap() {
        // Run the sector machinery center-versus-itself on the airplane,
        // which is a valid (primitive) center.
        let a = airplane();
        let ag = GapSet::compute(&a).unwrap();
        let gid = ag.periodic_infinite()[0];
        let sector = sector_support(&a, &ag, gid, &a, &ag).unwrap();
        let own = Support::new(&a, &ag, [gid], []);
        assert_eq!(sector, own);
    }
}
