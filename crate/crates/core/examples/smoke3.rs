use lamina_core::angle::{Angle, SupportSpec};
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
    let (lam, failed) = extract_lamination(&f, spec, 1e-6, &TraceConfig::default()).unwrap();
    println!("classes {} failed {}", lam.classes().len(), failed.len());
    // does it contain the expected classes?
    let ang = |n: i64, d: u64| Angle::new(n, d).unwrap();
    for pair in [
        (ang(3, 7), ang(4, 7)),
        (ang(1, 3), ang(2, 3)),
        (ang(2, 9), ang(5, 18)),
        (ang(3, 14), ang(11, 14)),
        (ang(7, 15), ang(8, 15)),
    ] {
        let pa = lam.support().position(&pair.0).unwrap();
        let pb = lam.support().position(&pair.1).unwrap();
        let ca = lam.class_of(pa);
        println!("({}, {}): class {:?} vs {:?}", pair.0, pair.1, ca, lam.class_of(pb));
    }
    let gaps = GapSet::compute_raw(&lam).unwrap();
    // find the gap with edge B = (2/7,5/7)
    let pb1 = lam.support().position(&ang(2, 7)).unwrap();
    let pb2 = lam.support().position(&ang(5, 7)).unwrap();
    for g in gaps.gaps() {
        if g.edges.iter().any(|e| e.a == pb1.min(pb2) && e.b == pb1.max(pb2)) {
            let lo = lam.support().angle(g.vertices[0]);
            let hi = lam.support().angle(*g.vertices.last().unwrap());
            println!("gap {} with edge B: kind {:?} deg {} nv {} zone [{lo}..{hi}] image {:?} period {:?}",
                g.id, g.kind, gaps.step_degree(g.id), g.vertices.len(), gaps.image(g.id), g.period);
        }
    }
}
