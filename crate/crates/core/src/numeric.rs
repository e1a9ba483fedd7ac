//! Concrete-polynomial layer: Green's potential, external-ray tracing with
//! landing detection, numeric extraction of the rational lamination, and
//! critical-orbit classification.
//!
//! Rays are traced orbit-wise: all rays in the sigma-orbit of an angle are
//! pulled back together, so every Newton step has a nearby guide point.
//! Everything here is plain `f64` arithmetic; exactness lives upstream in
//! the combinatorial modules.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::angle::{Angle, AngleError, SupportSpec};
use crate::lamination::{LaminationError, RationalLamination};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TraceError {
    #[error("angle error: {0}")]
    Angle(#[from] AngleError),
    #[error("lamination error: {0}")]
    Lamination(#[from] LaminationError),
    #[error("invalid polynomial: {0}")]
    BadPolynomial(String),
    #[error("critical point root finding did not converge")]
    RootFinding,
    #[error("ray {0} did not land; extraction aborted")]
    RayFailed(Angle),
}

/// A monic centered polynomial `z^d + c_{d-2} z^{d-2} + ... + c_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialSpec {
    degree: u32,
    coeffs: Vec<Complex64>,
}

impl PolynomialSpec {
    pub fn new(degree: u32, coeffs: Vec<Complex64>) -> Result<Self, TraceError> {
        if degree < 2 {
            return Err(TraceError::BadPolynomial(String::from(
                "degree must be at least 2",
            )));
        }
        if coeffs.len() != degree as usize - 1 {
            return Err(TraceError::BadPolynomial(alloc::format!(
                "monic centered degree-{degree} polynomial takes {} coefficients, got {}",
                degree - 1,
                coeffs.len()
            )));
        }
        Ok(PolynomialSpec { degree, coeffs })
    }

    /// The quadratic family `z^2 + c`.
    pub fn quadratic(c: Complex64) -> Self {
        PolynomialSpec {
            degree: 2,
            coeffs: vec![c],
        }
    }

    /// The power map `z^d`.
    pub fn power(degree: u32) -> Result<Self, TraceError> {
        Self::new(degree, vec![Complex64::new(0.0, 0.0); degree as usize - 1])
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        // z^d plus the lower-order Horner part (no z^{d-1} term).
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        z.powu(self.degree) + acc
    }

    pub fn eval_derivative(&self, z: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * z + c * i as f64;
        }
        self.degree as f64 * z.powu(self.degree - 1) + acc
    }

    /// Guaranteed escape radius for monic centered polynomials.
    pub fn escape_radius(&self) -> f64 {
        let max_c = self
            .coeffs
            .iter()
            .map(|c| c.norm())
            .fold(0.0f64, f64::max);
        (2.0f64).max(2.0 * max_c)
    }

    /// Finite critical points, by Durand-Kerner on the derivative.
    pub fn critical_points(&self) -> Result<Vec<Complex64>, TraceError> {
        // f' = d z^{d-1} + sum_{i>=1} i c_i z^{i-1}: normalize to monic.
        let n = self.degree as usize - 1;
        let d = self.degree as f64;
        let mut poly = vec![Complex64::new(0.0, 0.0); n + 1];
        poly[n] = Complex64::new(1.0, 0.0);
        for (i, &c) in self.coeffs.iter().enumerate().skip(1) {
            poly[i - 1] = c * i as f64 / d;
        }
        durand_kerner(&poly)
    }
}

impl core::fmt::Display for PolynomialSpec {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "d={}; coeffs=", self.degree)?;
        for (i, c) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", format_complex(*c))?;
        }
        Ok(())
    }
}

fn format_complex(c: Complex64) -> String {
    if c.im == 0.0 {
        alloc::format!("{}", c.re)
    } else if c.im < 0.0 {
        alloc::format!("{}{}i", c.re, c.im)
    } else {
        alloc::format!("{}+{}i", c.re, c.im)
    }
}

pub fn parse_complex(s: &str) -> Result<Complex64, TraceError> {
    let s = s.trim();
    let bad = || TraceError::BadPolynomial(alloc::format!("bad complex literal `{s}`"));
    if let Some(body) = s.strip_suffix('i') {
        // a+bi, a-bi, bi, i, -i
        let body = body.trim();
        for split in (1..body.len()).rev() {
            let (re, im) = body.split_at(split);
            if !im.starts_with('+') && !im.starts_with('-') {
                continue;
            }
            if let (Ok(re), Ok(im)) = (parse_real(re), parse_imag(im)) {
                return Ok(Complex64::new(re, im));
            }
        }
        let im = parse_imag(body).map_err(|_| bad())?;
        Ok(Complex64::new(0.0, im))
    } else {
        let re = parse_real(s).map_err(|_| bad())?;
        Ok(Complex64::new(re, 0.0))
    }
}

fn parse_real(s: &str) -> Result<f64, ()> {
    s.trim().parse::<f64>().map_err(|_| ())
}

fn parse_imag(s: &str) -> Result<f64, ()> {
    let s = s.trim();
    match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => parse_real(s),
    }
}

impl core::str::FromStr for PolynomialSpec {
    type Err = TraceError;

    /// Parses `d=<int>; coeffs=<c0>,<c1>,...` with complex literals `a+bi`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |m: &str| TraceError::BadPolynomial(String::from(m));
        let mut degree: Option<u32> = None;
        let mut coeffs: Option<Vec<Complex64>> = None;
        for part in s.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| bad("expected key=value"))?;
            match key.trim() {
                "d" => {
                    degree = Some(
                        value
                            .trim()
                            .parse::<u32>()
                            .map_err(|_| bad("bad degree"))?,
                    )
                }
                "coeffs" => {
                    let v = value.trim();
                    let list: Result<Vec<_>, _> = if v.is_empty() {
                        Ok(Vec::new())
                    } else {
                        v.split(',').map(parse_complex).collect()
                    };
                    coeffs = Some(list?);
                }
                other => {
                    return Err(TraceError::BadPolynomial(alloc::format!(
                        "unknown key `{other}`"
                    )))
                }
            }
        }
        let degree = degree.ok_or_else(|| bad("missing d="))?;
        let coeffs = coeffs.ok_or_else(|| bad("missing coeffs="))?;
        PolynomialSpec::new(degree, coeffs)
    }
}

fn durand_kerner(poly: &[Complex64]) -> Result<Vec<Complex64>, TraceError> {
    let n = poly.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let eval = |z: Complex64| {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in poly.iter().rev() {
            acc = acc * z + c;
        }
        acc
    };
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32 + 1)).collect();
    for _ in 0..200 {
        let mut delta = 0.0f64;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            if denom.norm() < 1e-300 {
                return Err(TraceError::RootFinding);
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-13 {
            return Ok(roots);
        }
    }
    Err(TraceError::RootFinding)
}

/// Escape-rate (Green's function) of the point: `lim d^{-n} log|f^n(z)|`,
/// zero on the non-escaping set at this budget.
pub fn green_potential(f: &PolynomialSpec, z: Complex64, max_iter: u32) -> f64 {
    let escape = f.escape_radius();
    let mut w = z;
    let mut scale = 1.0f64;
    for _ in 0..max_iter {
        // Stop well before f64 overflow; the tail correction is O(|w|^-1).
        if w.norm_sqr() > 1e150 {
            return scale * 0.5 * libm::log(w.norm_sqr());
        }
        w = f.eval(w);
        scale /= f.degree() as f64;
    }
    if w.norm() > escape {
        scale * libm::log(w.norm())
    } else {
        0.0
    }
}

/// Tracing parameters; the defaults address desk-scale polynomials.
#[derive(Debug, Clone)]
pub struct TraceConfig {
    /// Potential at which the trace stops.
    pub target_potential: f64,
    /// Sub-steps per division of the potential by the degree.
    pub substeps: u32,
    /// Newton iterations per pullback.
    pub newton_iters: u32,
    /// Newton convergence tolerance.
    pub newton_tol: f64,
    /// Two consecutive samples this close count as landed.
    pub landing_tol: f64,
    /// Potential below which landing may be declared.
    pub landing_potential: f64,
}

impl Default for TraceConfig {
    fn default() -> Self {
        TraceConfig {
            // Distance to a repelling landing point scales like
            // potential^(log|multiplier| / log d), so barely-repelling
            // points need very deep potentials.
            target_potential: 1e-45,
            substeps: 6,
            newton_iters: 30,
            newton_tol: 1e-13,
            landing_tol: 1e-9,
            landing_potential: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RayStatus {
    /// The ray landed; the payload is the extrapolated landing point.
    Landed(Complex64),
    /// A pullback step degenerated (precritical collision); the last good
    /// sample is retained.
    EscapedTolerance,
    /// The trace reached its target potential without the samples
    /// contracting to a point.
    NotLanded,
}

/// A traced external ray.
#[derive(Debug, Clone)]
pub struct RayTrace {
    pub angle: Angle,
    /// Samples as (potential, point), with strictly decreasing potentials.
    pub samples: Vec<(f64, Complex64)>,
    pub status: RayStatus,
}

impl RayTrace {
    pub fn landing_point(&self) -> Option<Complex64> {
        match self.status {
            RayStatus::Landed(z) => Some(z),
            _ => None,
        }
    }
}

/// Traces the whole sigma-orbit of an angle at once and returns one trace
/// per orbit angle, in orbit order.
pub fn trace_orbit(
    f: &PolynomialSpec,
    angle: &Angle,
    cfg: &TraceConfig,
) -> Result<Vec<RayTrace>, TraceError> {
    let d = f.degree();
    let info = angle.orbit_info(d);
    let orbit = &info.orbit;
    let k = orbit.len();
    // Successor index within the orbit under sigma.
    let succ: Vec<usize> = (0..k)
        .map(|i| {
            if i + 1 < k {
                i + 1
            } else {
                // The last orbit entry maps back into the cycle.
                info.preperiod as usize
            }
        })
        .collect();

    let r0 = {
        let r = f.escape_radius();
        (r * r).max(4.0)
    };
    let pot0 = libm::log(r0);
    let m = cfg.substeps.max(1) as usize;
    let step = libm::pow(d as f64, -1.0 / m as f64);

    // Seed the top m samples of every orbit ray on the centered model.
    let mut points: Vec<Vec<Complex64>> = vec![Vec::new(); k];
    let mut potentials: Vec<f64> = Vec::new();
    for j in 0..m {
        let pot = pot0 * libm::pow(step, j as f64);
        potentials.push(pot);
        for (i, theta) in orbit.iter().enumerate() {
            let arg = 2.0 * core::f64::consts::PI * theta.to_f64();
            let radius = libm::exp(pot);
            points[i].push(Complex64::new(
                radius * libm::cos(arg),
                radius * libm::sin(arg),
            ));
        }
    }

    let mut degenerate = vec![false; k];
    let mut level = m;
    loop {
        let pot = potentials[level - m] / d as f64;
        potentials.push(pot);
        for i in 0..k {
            if degenerate[i] {
                continue;
            }
            if points[succ[i]].len() <= level - m || points[i].len() < level {
                // The successor chain already degenerated.
                degenerate[i] = true;
                continue;
            }
            let target = points[succ[i]][level - m];
            let guide = points[i][level - 1];
            match pullback(f, target, guide, cfg) {
                Some(z) => points[i].push(z),
                None => {
                    degenerate[i] = true;
                }
            }
        }
        if degenerate.iter().all(|&x| x) {
            break;
        }
        if pot <= cfg.target_potential {
            break;
        }
        level += 1;
    }

    let traces = (0..k)
        .map(|i| {
            let samples: Vec<(f64, Complex64)> = potentials
                .iter()
                .copied()
                .zip(points[i].iter().copied())
                .collect();
            let status = if degenerate[i] {
                RayStatus::EscapedTolerance
            } else {
                landing_status(&samples, cfg)
            };
            RayTrace {
                angle: orbit[i].clone(),
                samples,
                status,
            }
        })
        .collect();
    Ok(traces)
}

/// One inverse step: solves `f(z) = target` for the branch near `guide`.
fn pullback(
    f: &PolynomialSpec,
    target: Complex64,
    guide: Complex64,
    cfg: &TraceConfig,
) -> Option<Complex64> {
    if f.degree() == 2 {
        // Closed form: z = +-sqrt(target - c), stable even at the critical
        // value.
        let c = f.coeffs()[0];
        let root = (target - c).sqrt();
        let z = if (root - guide).norm_sqr() <= (-root - guide).norm_sqr() {
            root
        } else {
            -root
        };
        return Some(z);
    }
    let mut z = guide;
    for _ in 0..cfg.newton_iters {
        let fz = f.eval(z) - target;
        if fz.norm() < cfg.newton_tol {
            return Some(z);
        }
        let dz = f.eval_derivative(z);
        if dz.norm() < 1e-14 {
            return None;
        }
        z -= fz / dz;
    }
    let fz = f.eval(z) - target;
    if fz.norm() < cfg.newton_tol * 1e3 {
        Some(z)
    } else {
        None
    }
}

fn landing_status(samples: &[(f64, Complex64)], cfg: &TraceConfig) -> RayStatus {
    let n = samples.len();
    if n < 3 {
        return RayStatus::NotLanded;
    }
    let (pot, z2) = samples[n - 1];
    let z1 = samples[n - 2].1;
    let z0 = samples[n - 3].1;
    if pot >= cfg.landing_potential {
        return RayStatus::NotLanded;
    }
    let d1 = (z2 - z1).norm();
    if d1 >= cfg.landing_tol {
        return RayStatus::NotLanded;
    }
    // Geometric extrapolation of the tail.
    let d0 = (z1 - z0).norm();
    let mut z = z2;
    if d0 > 0.0 {
        let rho = (d1 / d0).min(0.95);
        let extrapolated = z2 + (z2 - z1) * (rho / (1.0 - rho));
        if extrapolated.is_finite() {
            z = extrapolated;
        }
    }
    RayStatus::Landed(z)
}

/// Traces one ray (by tracing its whole orbit internally).
pub fn trace_ray(
    f: &PolynomialSpec,
    angle: &Angle,
    cfg: &TraceConfig,
) -> Result<RayTrace, TraceError> {
    let traces = trace_orbit(f, angle, cfg)?;
    Ok(traces.into_iter().next().expect("orbit is nonempty"))
}

/// The landing point of a rational ray, if the trace contracts.
pub fn landing_point(
    f: &PolynomialSpec,
    angle: &Angle,
    cfg: &TraceConfig,
) -> Result<Option<Complex64>, TraceError> {
    Ok(trace_ray(f, angle, cfg)?.landing_point())
}

/// A landed ray: angle id, landing estimate, and the estimate's accuracy
/// (the last sample step plus a floating-point floor).
#[derive(Debug, Clone, Copy)]
pub struct Landing {
    pub angle_id: u32,
    pub point: Complex64,
    pub accuracy: f64,
}

/// Landing points for every angle of the truncated support, one trace per
/// sigma-orbit. Returns the landings and the list of angles whose rays
/// failed.
pub fn landing_table(
    f: &PolynomialSpec,
    spec: SupportSpec,
    cfg: &TraceConfig,
) -> Result<(Vec<Landing>, Vec<Angle>), TraceError> {
    let support = spec.enumerate()?;
    let index: BTreeMap<&Angle, u32> = support
        .iter()
        .enumerate()
        .map(|(i, a)| (a, i as u32))
        .collect();
    let mut landed: BTreeMap<u32, Landing> = BTreeMap::new();
    let mut failed: Vec<Angle> = Vec::new();
    for (i, a) in support.iter().enumerate() {
        if landed.contains_key(&(i as u32)) || failed.contains(a) {
            continue;
        }
        for trace in trace_orbit(f, a, cfg)? {
            let Some(&id) = index.get(&trace.angle) else {
                continue;
            };
            match trace.status {
                RayStatus::Landed(z) => {
                    let n = trace.samples.len();
                    let tail = if n >= 2 {
                        (trace.samples[n - 1].1 - trace.samples[n - 2].1).norm()
                    } else {
                        0.0
                    };
                    landed.insert(
                        id,
                        Landing {
                            angle_id: id,
                            point: z,
                            accuracy: tail + 1e-13,
                        },
                    );
                }
                _ => failed.push(trace.angle.clone()),
            }
        }
    }
    Ok((landed.into_values().collect(), failed))
}

/// Numeric extraction of the rational lamination: land every support ray,
/// cluster coincident landing points, and validate the resulting classes.
pub fn extract_lamination(
    f: &PolynomialSpec,
    spec: SupportSpec,
    cluster_tol: f64,
    cfg: &TraceConfig,
) -> Result<(RationalLamination, Vec<Angle>), TraceError> {
    let (landed, failed) = landing_table(f, spec, cfg)?;
    let classes = cluster_classes(&landed, cluster_tol);
    let support = spec.enumerate()?;
    let class_angles: Vec<Vec<Angle>> = classes
        .iter()
        .map(|ids| ids.iter().map(|&i| support[i as usize].clone()).collect())
        .collect();
    let lam = RationalLamination::validate(&class_angles, spec)?;
    Ok((lam, failed))
}

/// Groups angle ids whose landing points coincide.
///
/// Two landings merge when they agree within the pair's own trace accuracy
/// (distinct landing points can be far closer than any fixed tolerance near
/// strongly repelling points, so a fixed radius would over-merge);
/// `cluster_tol` caps the adaptive radius from above.
pub fn cluster_classes(landed: &[Landing], cluster_tol: f64) -> Vec<Vec<u32>> {
    let mut order: Vec<usize> = (0..landed.len()).collect();
    order.sort_by(|&a, &b| {
        landed[a]
            .point
            .re
            .partial_cmp(&landed[b].point.re)
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let mut parent: Vec<usize> = (0..landed.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..order.len() {
        for j in (i + 1)..order.len() {
            let a = &landed[order[i]];
            let b = &landed[order[j]];
            if b.point.re - a.point.re > cluster_tol {
                break;
            }
            let radius = (8.0 * (a.accuracy + b.accuracy)).min(cluster_tol);
            if (a.point - b.point).norm() <= radius {
                let ra = find(&mut parent, order[i]);
                let rb = find(&mut parent, order[j]);
                if ra != rb {
                    parent[ra] = rb;
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
    for i in 0..landed.len() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(landed[i].angle_id);
    }
    let mut out: Vec<Vec<u32>> = groups
        .into_values()
        .filter(|g| g.len() >= 2)
        .map(|mut g| {
            g.sort_unstable();
            g
        })
        .collect();
    out.sort();
    out
}

/// Classification of one critical orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CriticalStatus {
    Escaping,
    /// Attracted to a cycle of the given period.
    Attracted(u32),
    /// The critical point itself is periodic.
    Periodic(u32),
    /// Preperiod and period of the critical value orbit.
    Preperiodic(u32, u32),
    Undetermined,
}

#[derive(Debug, Clone)]
pub struct CriticalOrbitReport {
    /// (critical point, status) for each finite critical point.
    pub orbits: Vec<(Complex64, CriticalStatus)>,
}

impl CriticalOrbitReport {
    /// True when no critical orbit escapes or stays undetermined, the
    /// numeric proxy for a connected Julia set.
    pub fn all_bounded(&self) -> bool {
        self.orbits.iter().all(|(_, s)| {
            !matches!(s, CriticalStatus::Escaping | CriticalStatus::Undetermined)
        })
    }
}

/// Classifies every critical orbit by escape, cycle detection on the
/// critical value orbit, and the cycle multiplier.
pub fn classify_critical_orbits(
    f: &PolynomialSpec,
    max_iter: u32,
    tol: f64,
) -> Result<CriticalOrbitReport, TraceError> {
    let escape = f.escape_radius();
    let mut orbits = Vec::new();
    for c in f.critical_points()? {
        let mut orbit: Vec<Complex64> = vec![f.eval(c)];
        let mut status = CriticalStatus::Undetermined;
        'iterate: for _ in 0..max_iter {
            let z = *orbit.last().expect("nonempty");
            if z.norm() > escape.max(1e8) {
                status = CriticalStatus::Escaping;
                break;
            }
            let next = f.eval(z);
            // First near-repeat in the stored orbit.
            for (j, &old) in orbit.iter().enumerate() {
                if (next - old).norm() < tol {
                    let preperiod = j as u32;
                    let period = orbit.len() as u32 - j as u32;
                    let mut multiplier = Complex64::new(1.0, 0.0);
                    for &w in &orbit[j..] {
                        multiplier *= f.eval_derivative(w);
                    }
                    let on_cycle = orbit[j..]
                        .iter()
                        .any(|&w| (w - c).norm() < tol)
                        || (next - c).norm() < tol;
                    status = if on_cycle {
                        CriticalStatus::Periodic(period)
                    } else if multiplier.norm() < 1.0 {
                        CriticalStatus::Attracted(period)
                    } else {
                        CriticalStatus::Preperiodic(preperiod, period)
                    };
                    break 'iterate;
                }
            }
            orbit.push(next);
        }
        if !matches!(status, CriticalStatus::Undetermined) || orbit.len() as u32 >= max_iter {
            orbits.push((c, status));
        } else {
            orbits.push((c, CriticalStatus::Undetermined));
        }
    }
    Ok(CriticalOrbitReport { orbits })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ang(n: i64, d: u64) -> Angle {
        Angle::new(n, d).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn green_potential_examples() {
        let square = PolynomialSpec::power(2).unwrap();
        let g = green_potential(&square, c(4.0, 0.0), 200);
        assert!((g - libm::log(4.0)).abs() < 1e-12);
        assert_eq!(green_potential(&square, c(0.5, 0.0), 200), 0.0);

        // Chebyshev-conjugacy oracle: z = w + 1/w with w = (3+sqrt 5)/2.
        let cheb = PolynomialSpec::quadratic(c(-2.0, 0.0));
        let w = (3.0 + libm::sqrt(5.0)) / 2.0;
        let g = green_potential(&cheb, c(3.0, 0.0), 200);
        assert!((g - libm::log(w)).abs() < 1e-10, "got {g}");
    }

    #[test]
    fn green_functional_equation() {
        let f = PolynomialSpec::quadratic(c(-1.0, 0.0));
        for z in [c(2.0, 1.0), c(0.3, 1.7), c(-2.5, 0.2)] {
            let g = green_potential(&f, z, 300);
            let gf = green_potential(&f, f.eval(z), 300);
            assert!((gf - 2.0 * g).abs() < 1e-10, "z={z}: {gf} vs {}", 2.0 * g);
        }
    }

    #[test]
    fn power_map_rays_are_radial() {
        let f = PolynomialSpec::power(2).unwrap();
        let cfg = TraceConfig::default();
        let trace = trace_ray(&f, &ang(1, 3), &cfg).unwrap();
        let want = 2.0 * core::f64::consts::PI / 3.0;
        for &(_, z) in &trace.samples {
            let diff = (z.arg() - want).abs();
            assert!(diff < 1e-9, "sample off the radial line by {diff}");
        }
        let landing = trace.landing_point().expect("power-map rays land");
        let target = c(libm::cos(want), libm::sin(want));
        assert!((landing - target).norm() < 1e-9);
    }

    #[test]
    fn chebyshev_landing_formula() {
        let f = PolynomialSpec::quadratic(c(-2.0, 0.0));
        let cfg = TraceConfig::default();
        for (n, den) in [(0i64, 1u64), (1, 6), (1, 4), (1, 3), (1, 2)] {
            let theta = ang(n, den);
            let z = landing_point(&f, &theta, &cfg).unwrap().expect("lands");
            let want = 2.0 * libm::cos(2.0 * core::f64::consts::PI * theta.to_f64());
            assert!(
                (z - c(want, 0.0)).norm() < 1e-6,
                "theta={theta}: {z} vs {want}"
            );
        }
    }

    #[test]
    fn basilica_ray_pair_colands() {
        let f = PolynomialSpec::quadratic(c(-1.0, 0.0));
        let cfg = TraceConfig::default();
        let z1 = landing_point(&f, &ang(1, 3), &cfg).unwrap().unwrap();
        let z2 = landing_point(&f, &ang(2, 3), &cfg).unwrap().unwrap();
        assert!((z1 - z2).norm() < 1e-8);
        let alpha = (1.0 - libm::sqrt(5.0)) / 2.0;
        assert!((z1 - c(alpha, 0.0)).norm() < 1e-6, "alpha landing: {z1}");
    }

    #[test]
    fn ray_equivariance() {
        let f = PolynomialSpec::quadratic(c(-1.0, 0.0));
        let cfg = TraceConfig::default();
        let t1 = trace_ray(&f, &ang(1, 6), &cfg).unwrap();
        let t2 = trace_ray(&f, &ang(1, 3), &cfg).unwrap();
        // f maps the theta-sample at potential t to the sigma(theta)-sample
        // at potential 2t.
        let by_pot: Vec<(f64, Complex64)> = t2.samples.clone();
        for &(pot, z) in t1.samples.iter().skip(6) {
            let image = f.eval(z);
            let want_pot = 2.0 * pot;
            let closest = by_pot
                .iter()
                .min_by(|a, b| {
                    (a.0 - want_pot)
                        .abs()
                        .partial_cmp(&(b.0 - want_pot).abs())
                        .unwrap()
                })
                .unwrap();
            if (closest.0 - want_pot).abs() < 1e-9 {
                assert!(
                    (closest.1 - image).norm() < 1e-6,
                    "equivariance off by {}",
                    (closest.1 - image).norm()
                );
            }
        }
    }

    #[test]
    fn extraction_matches_saturation_for_basilica() {
        let f = PolynomialSpec::quadratic(c(-1.0, 0.0));
        let spec = SupportSpec::new(2, 4, 2).unwrap();
        let (lam, failed) =
            extract_lamination(&f, spec, 1e-6, &TraceConfig::default()).unwrap();
        assert!(failed.is_empty());
        let sat = RationalLamination::saturate(&[(ang(1, 3), ang(2, 3))], spec).unwrap();
        assert!(lam.equal_partition(&sat));
    }

    #[test]
    fn power_map_lamination_is_trivial() {
        let f = PolynomialSpec::power(2).unwrap();
        let spec = SupportSpec::new(2, 3, 1).unwrap();
        let (lam, failed) =
            extract_lamination(&f, spec, 1e-6, &TraceConfig::default()).unwrap();
        assert!(failed.is_empty());
        assert!(lam.classes().is_empty());
    }

    #[test]
    fn critical_orbit_classification() {
        let square = PolynomialSpec::power(2).unwrap();
        let report = classify_critical_orbits(&square, 200, 1e-9).unwrap();
        assert_eq!(report.orbits.len(), 1);
        assert_eq!(report.orbits[0].1, CriticalStatus::Periodic(1));

        let basilica = PolynomialSpec::quadratic(c(-1.0, 0.0));
        let report = classify_critical_orbits(&basilica, 200, 1e-9).unwrap();
        assert_eq!(report.orbits[0].1, CriticalStatus::Periodic(2));

        let dendrite = PolynomialSpec::quadratic(c(0.0, 1.0));
        let report = classify_critical_orbits(&dendrite, 200, 1e-9).unwrap();
        assert_eq!(report.orbits[0].1, CriticalStatus::Preperiodic(1, 2));

        let escaping = PolynomialSpec::quadratic(c(1.0, 0.0));
        let report = classify_critical_orbits(&escaping, 500, 1e-9).unwrap();
        assert_eq!(report.orbits[0].1, CriticalStatus::Escaping);
    }

    #[test]
    fn polynomial_parsing_round_trip() {
        let f: PolynomialSpec = "d=2; coeffs=-1".parse().unwrap();
        assert_eq!(f, PolynomialSpec::quadratic(c(-1.0, 0.0)));
        let f: PolynomialSpec = "d=2; coeffs=0+1i".parse().unwrap();
        assert_eq!(f, PolynomialSpec::quadratic(c(0.0, 1.0)));
        let f: PolynomialSpec = "d=3; coeffs=0.5-2i,1".parse().unwrap();
        assert_eq!(f.degree(), 3);
        assert_eq!(f.coeffs()[0], c(0.5, -2.0));
        assert_eq!(f.coeffs()[1], c(1.0, 0.0));
        let text = alloc::format!("{f}");
        let back: PolynomialSpec = text.parse().unwrap();
        assert_eq!(back, f);
        assert!("d=1; coeffs=".parse::<PolynomialSpec>().is_err());
        assert!("d=2; coeffs=1,2".parse::<PolynomialSpec>().is_err());
    }

    #[test]
    fn cubic_rays_land_on_roots_of_unity() {
        let f = PolynomialSpec::power(3).unwrap();
        let cfg = TraceConfig::default();
        for (n, den) in [(1i64, 4u64), (3, 13), (7, 80)] {
            let theta = ang(n, den);
            let z = landing_point(&f, &theta, &cfg).unwrap().expect("lands");
            let arg = 2.0 * core::f64::consts::PI * theta.to_f64();
            let want = c(libm::cos(arg), libm::sin(arg));
            assert!((z - want).norm() < 1e-9, "theta={theta}: {z}");
        }
    }
}
