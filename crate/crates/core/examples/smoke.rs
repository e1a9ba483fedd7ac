use std::time::Instant;

use lamina_core::angle::SupportSpec;
use lamina_core::chains::{maximal_chains, periodic_cut_points, Support, CutVerdict};
use lamina_core::gaps::{is_primitive, GapSet};
use lamina_core::molecule::{molecule_membership, Verdict, FailedCondition};
use lamina_core::numeric::{extract_lamination, PolynomialSpec, TraceConfig};
use lamina_core::lamination::RationalLamination;
use num_complex::Complex64;

fn main() {
    let t0 = Instant::now();
    // Airplane parameter: real root of c^3 + 2c^2 + c + 1 = 0.
    let mut c = -1.75f64;
    for _ in 0..60 {
        let f = c * c * c + 2.0 * c * c + c + 1.0;
        let df = 3.0 * c * c + 4.0 * c + 1.0;
        c -= f / df;
    }
    println!("airplane c = {c:.12}  ({:?})", t0.elapsed());

    let f = PolynomialSpec::quadratic(Complex64::new(c, 0.0));
    let spec = SupportSpec::new(2, 12, 1).unwrap();
    let t1 = Instant::now();
    let (lam, failed) = extract_lamination(&f, spec, 1e-6, &TraceConfig::default()).unwrap();
    println!(
        "extracted: {} classes, {} failed rays, support {} ({:?})",
        lam.classes().len(),
        failed.len(),
        lam.support().len(),
        t1.elapsed()
    );
    let t2 = Instant::now();
    let gaps = GapSet::compute(&lam).unwrap();
    println!("gaps: {} total, periodic infinite {:?} ({:?})",
        gaps.len(), gaps.periodic_infinite(), t2.elapsed());
    println!("primitive: {}", is_primitive(&lam, &gaps));
    let t3 = Instant::now();
    let chains = maximal_chains(&lam, &gaps).unwrap();
    println!("maximal chains: {} ({:?})", chains.len(), t3.elapsed());
    let all: Vec<u32> = gaps.gaps().iter().map(|g| g.id).collect();
    let full = Support::new(&lam, &gaps, all, []);
    let report = periodic_cut_points(&lam, &gaps, &full, 12).unwrap();
    println!("cut growth table: {:?} verdict {:?}", report.growth_table, report.verdict);
    assert_eq!(report.verdict, CutVerdict::GrowthDetected);

    // Membership against the trivial center at the same truncation.
    let trivial = RationalLamination::trivial(spec).unwrap();
    let t4 = Instant::now();
    let v = molecule_membership(&trivial, &lam).unwrap();
    println!("membership(trivial, airplane-extracted) = {:?} / {:?} ({:?})",
        v.verdict, v.failed_condition, t4.elapsed());
    assert_eq!(v.verdict, Verdict::Out);
    assert!(matches!(v.failed_condition, FailedCondition::Chain(_)));
    println!("total {:?}", t0.elapsed());
}
