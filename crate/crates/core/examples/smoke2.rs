use lamina_core::angle::SupportSpec;
use lamina_core::chains::{level0_chains, next_level};
use lamina_core::gaps::GapSet;
use lamina_core::numeric::{extract_lamination, PolynomialSpec, TraceConfig};
use num_complex::Complex64;

fn main() {
    let mut c = -1.75f64;
    for _ in 0..60 {
        let f = c * c * c + 2.0 * c * c + c + 1.0;
        let df = 3.0 * c * c + 4.0 * c + 1.0;
        c -= f / df;
    }
    let f = PolynomialSpec::quadratic(Complex64::new(c, 0.0));
    let spec = SupportSpec::new(2, 12, 1).unwrap();
    let (lam, _) = extract_lamination(&f, spec, 1e-6, &TraceConfig::default()).unwrap();
    let gaps = GapSet::compute(&lam).unwrap();
    println!("periodic infinite: {:?}", gaps.periodic_infinite());
    for &g in &gaps.periodic_infinite() {
        let gap = gaps.gap(g).unwrap();
        let lo = lam.support().angle(gap.vertices[0]);
        let hi = lam.support().angle(*gap.vertices.last().unwrap());
        println!("  gap {g}: period {:?} deg {:?} nv {} zone [{lo} .. {hi}] edges {}",
            gap.period, gap.return_degree, gap.vertices.len(), gap.edges.len());
    }
    let level0 = level0_chains(&lam, &gaps).unwrap();
    println!("level0: {}", level0.len());
    let mut chains = level0;
    for round in 0..5 {
        let next = next_level(&lam, &gaps, &chains).unwrap();
        println!("round {round}: {} chains, sizes {:?}", next.len(),
            next.iter().map(|c| c.support.gaps.len()).collect::<Vec<_>>());
        if next.len() == chains.len()
            && next.iter().zip(&chains).all(|(a, b)| a.support == b.support) {
            break;
        }
        chains = next;
    }
    // Diff: which gaps did chain 0 absorb beyond its core?
    let core = &gaps.periodic_infinite()[..];
    for (i, ch) in chains.iter().enumerate().take(3) {
        let extra: Vec<u32> = ch.support.gaps.iter().copied()
            .filter(|g| !core.contains(g)).take(8).collect();
        println!("chain {i}: {} gaps, extra (first 8): {:?}", ch.support.gaps.len(), extra);
    }
}
