//! Gaps of the geodesic lamination: the complementary regions of the chord
//! system, their finite/infinite classification, and the induced dynamics
//! on gaps.
//!
//! Since lamination chords never cross, the chord intervals form a laminar
//! family; every gap is the region between an edge and its immediate
//! children in the containment forest (plus one root gap outside all
//! top-level chords).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use crate::lamination::{ClassId, LaminationError, RationalLamination};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GapError {
    #[error("lamination error: {0}")]
    Lamination(#[from] LaminationError),
    #[error("gap {0} has no well-defined image at this truncation")]
    ImageUndefined(u32),
    #[error("gap id {0} out of range")]
    BadGapId(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GapKind {
    Finite,
    Infinite,
}

/// A boundary leaf of a gap; `a < b` as support positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GapEdge {
    pub a: u32,
    pub b: u32,
    pub class: ClassId,
}

#[derive(Debug, Clone)]
pub struct Gap {
    pub id: u32,
    /// Support positions of all circle points on the gap closure, sorted.
    pub vertices: Vec<u32>,
    pub edges: Vec<GapEdge>,
    pub kind: GapKind,
    /// Orbit period under the gap map; `None` when strictly preperiodic or
    /// when the orbit leaves the truncation.
    pub period: Option<u32>,
    /// Product of one-step covering degrees along the cycle, for periodic
    /// gaps.
    pub return_degree: Option<u32>,
    /// Whether the classification survives raising the period bound by one.
    pub stable: bool,
}

impl Gap {
    pub fn is_periodic_infinite(&self) -> bool {
        self.kind == GapKind::Infinite && self.period.is_some()
    }
}

/// All gaps of a lamination, with the induced dynamics.
#[derive(Debug, Clone)]
pub struct GapSet {
    gaps: Vec<Gap>,
    /// Image gap id, when well defined.
    next: Vec<Option<u32>>,
    /// One-step covering degree onto the image.
    step_degree: Vec<u32>,
    /// Gap ids incident to each support angle.
    incident: Vec<Vec<u32>>,
}

impl GapSet {
    /// Computes all gaps, their dynamics, and the stability flags (the
    /// latter by re-running over the truncation with period bound P+1).
    pub fn compute(lam: &RationalLamination) -> Result<GapSet, GapError> {
        let mut set = Self::compute_raw(lam)?;
        let extended = lam.extend_period()?;
        let ext_set = Self::compute_raw(&extended)?;
        set.flag_stability(lam, &extended, &ext_set);
        Ok(set)
    }

    /// Gap extraction and dynamics without the stability pass; every gap is
    /// marked unstable.
    pub fn compute_raw(lam: &RationalLamination) -> Result<GapSet, GapError> {
        let faces = extract_faces(lam);
        let n = lam.support().len();
        let mut incident = vec![Vec::new(); n];
        for face in &faces {
            for &v in &face.vertices {
                incident[v as usize].push(face.id);
            }
        }
        let mut set = GapSet {
            gaps: faces,
            next: Vec::new(),
            step_degree: Vec::new(),
            incident,
        };
        set.compute_dynamics(lam);
        Ok(set)
    }

    pub fn gaps(&self) -> &[Gap] {
        &self.gaps
    }

    pub fn gap(&self, id: u32) -> Result<&Gap, GapError> {
        self.gaps.get(id as usize).ok_or(GapError::BadGapId(id))
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    /// Gaps having the given support angle as a vertex.
    pub fn incident_gaps(&self, angle_id: u32) -> &[u32] {
        &self.incident[angle_id as usize]
    }

    /// The image gap under the d-tupling map, when the image region is a
    /// gap of this truncation.
    pub fn image(&self, id: u32) -> Option<u32> {
        self.next.get(id as usize).copied().flatten()
    }

    /// Spec-level `gap_image`: errors when the image is not a gap.
    pub fn gap_image(&self, id: u32) -> Result<&Gap, GapError> {
        match self.image(id) {
            Some(img) => self.gap(img),
            None => Err(GapError::ImageUndefined(id)),
        }
    }

    pub fn step_degree(&self, id: u32) -> u32 {
        self.step_degree[id as usize]
    }

    /// Ids of gaps that are periodic and infinite (the combinatorial
    /// bounded Fatou cycle members).
    pub fn periodic_infinite(&self) -> Vec<u32> {
        self.gaps
            .iter()
            .filter(|g| g.is_periodic_infinite())
            .map(|g| g.id)
            .collect()
    }

    fn compute_dynamics(&mut self, lam: &RationalLamination) {
        let count = self.gaps.len();
        // Edge chord -> at most two incident gaps.
        let mut chord_gaps: BTreeMap<(u32, u32), Vec<u32>> = BTreeMap::new();
        for gap in &self.gaps {
            for e in &gap.edges {
                chord_gaps.entry((e.a, e.b)).or_default().push(gap.id);
            }
        }
        let vertex_sets: Vec<BTreeSet<u32>> = self
            .gaps
            .iter()
            .map(|g| g.vertices.iter().copied().collect())
            .collect();

        self.next = (0..count as u32)
            .map(|id| self.image_of(lam, id, &chord_gaps, &vertex_sets))
            .collect();
        // One-step covering degree: the largest sigma-fiber among the gap's
        // vertices, counting a whole boundary class as one point.
        self.step_degree = (0..count)
            .map(|i| {
                let mut fibers: BTreeMap<u32, BTreeSet<(u32, u32)>> = BTreeMap::new();
                for &v in &self.gaps[i].vertices {
                    let key = match lam.class_of(v) {
                        Some(c) => (0, c.0),
                        None => (1, v),
                    };
                    fibers.entry(lam.sigma_id(v)).or_default().insert(key);
                }
                fibers
                    .values()
                    .map(|s| s.len() as u32)
                    .max()
                    .unwrap_or(1)
            })
            .collect();

        // Periods: walk the image graph. A genuine periodic Fatou cycle
        // carries its root leaf (a periodic edge class; the whole-disk gap
        // has no edges and is exempt) and absorbs a critical point, so its
        // return degree is at least two. Truncation-artifact strips fail
        // both: their boundary leaves are preperiodic copies and they
        // return with degree one.
        let rooted: Vec<bool> = self
            .gaps
            .iter()
            .map(|g| {
                g.edges.is_empty()
                    || g.edges
                        .iter()
                        .any(|e| lam.class_period(e.class).is_some())
            })
            .collect();
        for id in 0..count as u32 {
            let (period, cycle) = self.detect_cycle(id);
            let degree: u32 = cycle
                .iter()
                .map(|&g| self.step_degree[g as usize])
                .product();
            let kind = self.gaps[id as usize].kind;
            let genuine = period.is_some()
                && (kind == GapKind::Finite || degree >= 2)
                && cycle.iter().all(|&g| rooted[g as usize]);
            let gap = &mut self.gaps[id as usize];
            gap.period = if genuine { period } else { None };
            gap.return_degree = if genuine { Some(degree) } else { None };
        }
    }

    fn detect_cycle(&self, start: u32) -> (Option<u32>, Vec<u32>) {
        let mut path = Vec::new();
        let mut seen: BTreeMap<u32, usize> = BTreeMap::new();
        let mut cur = start;
        loop {
            if let Some(&at) = seen.get(&cur) {
                if cur == start {
                    return (Some(path.len() as u32 - at as u32), path[at..].to_vec());
                }
                return (None, Vec::new());
            }
            seen.insert(cur, path.len());
            path.push(cur);
            match self.next[cur as usize] {
                Some(next) => {
                    if next == start {
                        return (Some(path.len() as u32), path);
                    }
                    cur = next;
                }
                None => return (None, Vec::new()),
            }
        }
    }

    /// Image gap under the d-tupling map.
    ///
    /// Every chord bounds exactly two faces, so the image of one edge plus a
    /// side witness (any vertex whose image lands strictly off that chord)
    /// determines the image face uniquely. Edges are tried in order, the
    /// defining edge first; the whole-disk gap falls back to vertex
    /// containment.
    fn image_of(
        &self,
        lam: &RationalLamination,
        id: u32,
        chord_gaps: &BTreeMap<(u32, u32), Vec<u32>>,
        vertex_sets: &[BTreeSet<u32>],
    ) -> Option<u32> {
        let gap = &self.gaps[id as usize];
        if gap.edges.is_empty() {
            let image: BTreeSet<u32> = gap.vertices.iter().map(|&v| lam.sigma_id(v)).collect();
            let mut candidates: Vec<u32> = Vec::new();
            for (gid, vs) in vertex_sets.iter().enumerate() {
                if image.is_subset(vs) {
                    candidates.push(gid as u32);
                }
            }
            return if candidates.len() == 1 {
                Some(candidates[0])
            } else {
                None
            };
        }
        for e in &gap.edges {
            let ia = lam.sigma_id(e.a);
            let ib = lam.sigma_id(e.b);
            let (a, b) = match ia.cmp(&ib) {
                core::cmp::Ordering::Less => (ia, ib),
                core::cmp::Ordering::Greater => (ib, ia),
                core::cmp::Ordering::Equal => continue,
            };
            let Some(incident) = chord_gaps.get(&(a, b)) else {
                continue;
            };
            for &v in &gap.vertices {
                let p = lam.sigma_id(v);
                if p == a || p == b {
                    continue;
                }
                let inside = a < p && p < b;
                let matched: Vec<u32> = incident
                    .iter()
                    .copied()
                    .filter(|&g| gap_side(&self.gaps[g as usize], a, b) == Some(inside))
                    .collect();
                return match matched.as_slice() {
                    [unique] => Some(*unique),
                    _ => None,
                };
            }
        }
        None
    }

    fn flag_stability(
        &mut self,
        lam: &RationalLamination,
        extended: &RationalLamination,
        ext_set: &GapSet,
    ) {
        // Restrict each extended gap's vertex set to the original support.
        let mut restricted: BTreeMap<Vec<u32>, Vec<GapKind>> = BTreeMap::new();
        for gap in &ext_set.gaps {
            let key: Vec<u32> = gap
                .vertices
                .iter()
                .filter_map(|&v| lam.support().position(extended.support().angle(v)))
                .collect();
            if !key.is_empty() {
                restricted.entry(key).or_default().push(gap.kind);
            }
        }
        for gap in &mut self.gaps {
            gap.stable = restricted
                .get(&gap.vertices)
                .map(|kinds| kinds.contains(&gap.kind))
                .unwrap_or(false);
        }
    }
}

/// Which side of the edge chord `(a, b)` the gap lies on: `Some(true)` when
/// the gap occupies the inside of the position interval `[a, b]`, `None`
/// when the chord is not an edge of the gap.
///
/// Structural convention: every non-root gap's first edge is its defining
/// interval (the gap sits inside it); the gap lies outside all its other
/// edges, and the root gap (id 0) lies outside all of its edges.
fn gap_side(gap: &Gap, a: u32, b: u32) -> Option<bool> {
    if !gap.edges.iter().any(|e| e.a == a && e.b == b) {
        return None;
    }
    if gap.id == 0 {
        return Some(false);
    }
    let own = gap.edges[0];
    Some(own.a == a && own.b == b)
}

struct Interval {
    lo: u32,
    hi: u32,
    class: ClassId,
}

/// A face of the chord arrangement, before any dynamics is attached.
pub(crate) struct RawFace {
    pub vertices: Vec<u32>,
    pub edges: Vec<(u32, u32, ClassId)>,
}

/// Builds all faces of the chord arrangement.
fn extract_faces(lam: &RationalLamination) -> Vec<Gap> {
    let raw = extract_raw_faces(lam.support().len() as u32, lam.classes());
    raw.into_iter()
        .enumerate()
        .map(|(id, f)| {
            make_gap(
                lam,
                id as u32,
                f.vertices,
                f.edges
                    .into_iter()
                    .map(|(a, b, class)| GapEdge { a, b, class })
                    .collect(),
            )
        })
        .collect()
}

/// Sum over classes and faces of (local covering degree - 1), the
/// combinatorial count of critical points. Face degrees are measured on
/// singleton vertices only, so degenerate lenses never contribute.
pub(crate) fn critical_excess(n: u32, classes: &[Vec<u32>], sigma: &[u32]) -> u32 {
    let mut class_of: BTreeMap<u32, u32> = BTreeMap::new();
    let mut excess = 0u32;
    for (ci, class) in classes.iter().enumerate() {
        let mut fibers: BTreeMap<u32, u32> = BTreeMap::new();
        for &v in class {
            class_of.insert(v, ci as u32);
            *fibers.entry(sigma[v as usize]).or_insert(0) += 1;
        }
        excess += fibers.values().copied().max().unwrap_or(1) - 1;
    }
    for face in extract_raw_faces(n, classes) {
        let mut fibers: BTreeMap<u32, u32> = BTreeMap::new();
        for &v in &face.vertices {
            if class_of.contains_key(&v) {
                continue;
            }
            *fibers.entry(sigma[v as usize]).or_insert(0) += 1;
        }
        excess += fibers.values().copied().max().unwrap_or(1).max(1) - 1;
    }
    excess
}

pub(crate) fn extract_raw_faces(n: u32, classes: &[Vec<u32>]) -> Vec<RawFace> {
    let mut intervals: Vec<Interval> = Vec::new();
    for (ci, class) in classes.iter().enumerate() {
        let class_id = ClassId(ci as u32);
        let m = class.len();
        if m == 2 {
            intervals.push(Interval {
                lo: class[0],
                hi: class[1],
                class: class_id,
            });
        } else {
            for w in class.windows(2) {
                intervals.push(Interval {
                    lo: w[0],
                    hi: w[1],
                    class: class_id,
                });
            }
            // The wrap chord spans the whole class.
            intervals.push(Interval {
                lo: class[0],
                hi: class[m - 1],
                class: class_id,
            });
        }
    }
    // Containment forest via a sweep: lo ascending, hi descending.
    let mut order: Vec<usize> = (0..intervals.len()).collect();
    order.sort_by(|&x, &y| {
        intervals[x]
            .lo
            .cmp(&intervals[y].lo)
            .then(intervals[y].hi.cmp(&intervals[x].hi))
    });
    let mut parent: Vec<Option<usize>> = vec![None; intervals.len()];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); intervals.len()];
    let mut top: Vec<usize> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    for &i in &order {
        while let Some(&t) = stack.last() {
            if intervals[i].hi <= intervals[t].hi {
                break;
            }
            stack.pop();
        }
        match stack.last() {
            Some(&t) => {
                parent[i] = Some(t);
                children[t].push(i);
            }
            None => top.push(i),
        }
        stack.push(i);
    }

    let mut faces: Vec<RawFace> = Vec::new();
    // Root face: outside all top-level intervals.
    {
        let mut vertices: Vec<u32> = Vec::new();
        let mut covered: Vec<(u32, u32)> = top
            .iter()
            .map(|&i| (intervals[i].lo, intervals[i].hi))
            .collect();
        covered.sort_unstable();
        let mut pos = 0u32;
        for &(lo, hi) in &covered {
            while pos <= lo && pos < n {
                vertices.push(pos);
                pos += 1;
            }
            pos = pos.max(hi);
        }
        while pos < n {
            vertices.push(pos);
            pos += 1;
        }
        vertices.sort_unstable();
        vertices.dedup();
        let edges: Vec<(u32, u32, ClassId)> = top
            .iter()
            .map(|&i| (intervals[i].lo, intervals[i].hi, intervals[i].class))
            .collect();
        faces.push(RawFace { vertices, edges });
    }
    // One face per interval: inside it, outside its children.
    for (i, iv) in intervals.iter().enumerate() {
        let mut vertices: Vec<u32> = Vec::new();
        let mut covered: Vec<(u32, u32)> = children[i]
            .iter()
            .map(|&c| (intervals[c].lo, intervals[c].hi))
            .collect();
        covered.sort_unstable();
        let mut pos = iv.lo;
        for &(lo, hi) in &covered {
            while pos <= lo {
                vertices.push(pos);
                pos += 1;
            }
            pos = pos.max(hi);
        }
        while pos <= iv.hi {
            vertices.push(pos);
            pos += 1;
        }
        vertices.sort_unstable();
        vertices.dedup();
        let mut edges: Vec<(u32, u32, ClassId)> = vec![(iv.lo, iv.hi, iv.class)];
        edges.extend(
            children[i]
                .iter()
                .map(|&c| (intervals[c].lo, intervals[c].hi, intervals[c].class)),
        );
        faces.push(RawFace { vertices, edges });
    }
    faces
}

fn make_gap(lam: &RationalLamination, id: u32, vertices: Vec<u32>, edges: Vec<GapEdge>) -> Gap {
    let kind = classify(lam, &vertices);
    Gap {
        id,
        vertices,
        edges,
        kind,
        period: None,
        return_degree: None,
        stable: false,
    }
}

/// A gap is finite exactly when all its vertices lie in one lamination
/// class.
fn classify(lam: &RationalLamination, vertices: &[u32]) -> GapKind {
    if vertices.len() < 2 {
        return GapKind::Infinite;
    }
    match lam.class_of(vertices[0]) {
        None => GapKind::Infinite,
        Some(c) => {
            if vertices.iter().all(|&v| lam.class_of(v) == Some(c)) {
                GapKind::Finite
            } else {
                GapKind::Infinite
            }
        }
    }
}

/// True iff no two distinct periodic infinite gaps share a vertex angle or
/// carry vertices of a common class.
pub fn is_primitive(lam: &RationalLamination, gaps: &GapSet) -> bool {
    let cycle_gaps = gaps.periodic_infinite();
    for (i, &g1) in cycle_gaps.iter().enumerate() {
        let v1: BTreeSet<u32> = gaps.gaps[g1 as usize].vertices.iter().copied().collect();
        let c1: BTreeSet<ClassId> = v1.iter().filter_map(|&v| lam.class_of(v)).collect();
        for &g2 in &cycle_gaps[i + 1..] {
            let gap2 = &gaps.gaps[g2 as usize];
            if gap2.vertices.iter().any(|v| v1.contains(v)) {
                return false;
            }
            if gap2
                .vertices
                .iter()
                .filter_map(|&v| lam.class_of(v))
                .any(|c| c1.contains(&c))
            {
                return false;
            }
        }
    }
    true
}

/// A critical element: a class or gap on which the d-tupling map has local
/// degree at least two.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalElement {
    Class { id: ClassId, local_degree: u32 },
    Gap { id: u32, local_degree: u32 },
}

impl CriticalElement {
    pub fn local_degree(&self) -> u32 {
        match self {
            CriticalElement::Class { local_degree, .. } => *local_degree,
            CriticalElement::Gap { local_degree, .. } => *local_degree,
        }
    }
}

/// All classes and gaps carrying critical local degree.
pub fn critical_elements(lam: &RationalLamination, gaps: &GapSet) -> Vec<CriticalElement> {
    let mut out = Vec::new();
    for ci in 0..lam.classes().len() {
        let id = ClassId(ci as u32);
        let deg = lam.class_degree(id);
        if deg >= 2 {
            out.push(CriticalElement::Class {
                id,
                local_degree: deg,
            });
        }
    }
    for gap in gaps.gaps() {
        let deg = gaps.step_degree(gap.id);
        if deg >= 2 {
            out.push(CriticalElement::Gap {
                id: gap.id,
                local_degree: deg,
            });
        }
    }
    out
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

    fn vertex_angles(lam: &RationalLamination, gap: &Gap) -> Vec<Angle> {
        gap.vertices
            .iter()
            .map(|&v| lam.support().angle(v).clone())
            .collect()
    }

    #[test]
    fn trivial_lamination_has_one_gap() {
        let lam = RationalLamination::trivial(spec(2, 4, 1)).unwrap();
        let gaps = GapSet::compute(&lam).unwrap();
        assert_eq!(gaps.len(), 1);
        let g = &gaps.gaps()[0];
        assert_eq!(g.kind, GapKind::Infinite);
        assert_eq!(g.period, Some(1));
        assert_eq!(g.return_degree, Some(2));
        assert!(g.stable);
        assert_eq!(g.vertices.len(), lam.support().len());
    }

    #[test]
    fn basilica_gap_cycle() {
        let lam =
            RationalLamination::saturate(&[(ang(1, 3), ang(2, 3))], spec(2, 6, 3)).unwrap();
        let gaps = GapSet::compute(&lam).unwrap();
        let cycle = gaps.periodic_infinite();
        let periods: Vec<u32> = cycle
            .iter()
            .map(|&g| gaps.gap(g).unwrap().period.unwrap())
            .collect();
        assert_eq!(cycle.len(), 2, "two period-2 Fatou gaps");
        assert!(periods.iter().all(|&p| p == 2));
        for &g in &cycle {
            let gap = gaps.gap(g).unwrap();
            assert_eq!(gap.return_degree, Some(2));
            assert!(gap.stable);
        }
    }

    #[test]
    fn rabbit_fixed_triangle_and_fatou_cycle() {
        let lam = RationalLamination::saturate(
            &[(ang(1, 7), ang(2, 7)), (ang(2, 7), ang(4, 7))],
            spec(2, 6, 3),
        )
        .unwrap();
        let gaps = GapSet::compute(&lam).unwrap();
        let fixed_finite: Vec<&Gap> = gaps
            .gaps()
            .iter()
            .filter(|g| g.kind == GapKind::Finite && g.period == Some(1))
            .collect();
        assert_eq!(fixed_finite.len(), 1);
        assert_eq!(
            vertex_angles(&lam, fixed_finite[0]),
            vec![ang(1, 7), ang(2, 7), ang(4, 7)]
        );
        let cycle = gaps.periodic_infinite();
        assert_eq!(cycle.len(), 3, "period-3 Fatou cycle");
        let mut total_degree = 1;
        for &g in &cycle {
            let gap = gaps.gap(g).unwrap();
            assert_eq!(gap.period, Some(3));
            total_degree = total_degree.max(gap.return_degree.unwrap());
        }
        assert_eq!(total_degree, 2);
    }

    #[test]
    fn airplane_gaps_are_primitive() {
        let lam =
            RationalLamination::saturate(&[(ang(3, 7), ang(4, 7))], spec(2, 6, 3)).unwrap();
        let gaps = GapSet::compute(&lam).unwrap();
        let cycle = gaps.periodic_infinite();
        assert_eq!(cycle.len(), 3);
        assert!(is_primitive(&lam, &gaps));
    }

    #[test]
    fn basilica_and_rabbit_are_not_primitive() {
        for gens in [
            vec![(ang(1, 3), ang(2, 3))],
            vec![(ang(1, 7), ang(2, 7)), (ang(2, 7), ang(4, 7))],
        ] {
            let lam = RationalLamination::saturate(&gens, spec(2, 6, 3)).unwrap();
            let gaps = GapSet::compute(&lam).unwrap();
            assert!(!is_primitive(&lam, &gaps));
        }
    }

    #[test]
    fn trivial_is_primitive_with_one_critical_gap() {
        let lam = RationalLamination::trivial(spec(2, 4, 1)).unwrap();
        let gaps = GapSet::compute(&lam).unwrap();
        assert!(is_primitive(&lam, &gaps));
        let crit = critical_elements(&lam, &gaps);
        assert_eq!(crit.len(), 1);
        assert!(matches!(
            crit[0],
            CriticalElement::Gap { local_degree: 2, .. }
        ));
    }

    #[test]
    fn basilica_critical_gap_is_in_the_cycle() {
        let lam =
            RationalLamination::saturate(&[(ang(1, 3), ang(2, 3))], spec(2, 6, 3)).unwrap();
        let gaps = GapSet::compute(&lam).unwrap();
        let crit = critical_elements(&lam, &gaps);
        let crit_gaps: Vec<u32> = crit
            .iter()
            .filter_map(|c| match c {
                CriticalElement::Gap { id, local_degree: 2 } => Some(*id),
                _ => None,
            })
            .collect();
        assert_eq!(crit_gaps.len(), 1);
        assert!(gaps.gap(crit_gaps[0]).unwrap().is_periodic_infinite());
    }

    #[test]
    fn gap_image_follows_the_cycle() {
        let lam =
            RationalLamination::saturate(&[(ang(1, 3), ang(2, 3))], spec(2, 6, 3)).unwrap();
        let gaps = GapSet::compute(&lam).unwrap();
        let cycle = gaps.periodic_infinite();
        let a = cycle[0];
        let b = gaps.image(a).unwrap();
        assert_ne!(a, b);
        assert_eq!(gaps.image(b), Some(a));
    }

    #[test]
    fn degree_sum_bound() {
        for gens in [
            vec![],
            vec![(ang(1, 3), ang(2, 3))],
            vec![(ang(3, 7), ang(4, 7))],
            vec![(ang(1, 7), ang(2, 7)), (ang(2, 7), ang(4, 7))],
        ] {
            let lam = RationalLamination::saturate(&gens, spec(2, 6, 3)).unwrap();
            let gaps = GapSet::compute(&lam).unwrap();
            let total: u32 = critical_elements(&lam, &gaps)
                .iter()
                .map(|c| c.local_degree() - 1)
                .sum();
            assert!(total <= lam.d() - 1, "criticality exceeds degree budget");
        }
    }
}
