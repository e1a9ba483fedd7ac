//! Exact combinatorics of polynomial Julia sets on the circle: rational
//! angles under the d-tupling map, invariant laminations and their gaps,
//! recursively generated Fatou chains, and the molecule membership oracles,
//! together with a floating-point external-ray tracer for concrete
//! polynomials.
//!
//! Everything except the ray tracer works in exact arbitrary-precision
//! rational arithmetic; the crate is `no_std` (alloc required).

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod angle;
pub mod chains;
pub mod gaps;
pub mod lamination;
pub mod molecule;
pub mod numeric;

pub use angle::{Angle, AngleError, OrbitInfo, SupportSpec};
pub use chains::{ChainError, CutPointReport, CutVerdict, FatouChain, Support};
pub use gaps::{Gap, GapError, GapKind, GapSet};
pub use lamination::{ClassId, LaminationError, RationalLamination};
pub use molecule::{FailedCondition, MembershipVerdict, MoleculeError, Verdict};
pub use numeric::{
    CriticalOrbitReport, CriticalStatus, PolynomialSpec, RayStatus, RayTrace, TraceConfig,
    TraceError,
};
