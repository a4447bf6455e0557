//! The scalar nonlinearity `F` (with `f = F'`, `f' = F''`), its critical-point
//! structure, hypothesis classification, and the spliced truncation `F*` that
//! replaces a decaying tail with a coercive quadratic one.
//!
//! Allen-Cahn is carried internally as the stationary equation with
//! `f = W'/eps^2`, `W(u) = (1-u^2)^2/4`; every epsilon scaling of reported
//! quantities goes through [`Potential::energy_scale`] / [`Potential::index_scale`].

use std::fmt;
use std::sync::Arc;

use crate::scalar::Scalar;

type ScalarFn<S> = Arc<dyn Fn(S) -> S + Send + Sync>;

#[derive(Clone)]
pub struct Potential<S> {
    pub name: String,
    value: ScalarFn<S>,
    deriv: ScalarFn<S>,
    deriv2: ScalarFn<S>,
    pub search_interval: (S, S),
    /// Set when this potential is the internal Allen-Cahn W/eps^2.
    pub ac_epsilon: Option<S>,
}

impl<S: Scalar> fmt::Debug for Potential<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Potential({})", self.name)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PotentialError {
    #[error("degenerate critical point near t = {0} (|f'| below tolerance; f is not Morse here)")]
    DegenerateCritical(f64),
    #[error("no critical point found on the search interval")]
    EmptyResult,
    #[error(
        "no local maximum: hypothesis classification needs at least one unstable critical point"
    )]
    NoLocalMax,
    #[error("truncation level M = {m} must exceed the largest critical point c+ = {c_plus}")]
    InvalidM { m: f64, c_plus: f64 },
    #[error("unknown potential name '{0}'")]
    UnknownName(String),
}

impl<S: Scalar> Potential<S> {
    pub fn new(
        name: impl Into<String>,
        value: impl Fn(S) -> S + Send + Sync + 'static,
        deriv: impl Fn(S) -> S + Send + Sync + 'static,
        deriv2: impl Fn(S) -> S + Send + Sync + 'static,
        search_interval: (S, S),
    ) -> Self {
        Potential {
            name: name.into(),
            value: Arc::new(value),
            deriv: Arc::new(deriv),
            deriv2: Arc::new(deriv2),
            search_interval,
            ac_epsilon: None,
        }
    }

    /// F(t)
    pub fn eval(&self, t: S) -> S {
        (self.value)(t)
    }

    /// f(t) = F'(t)
    pub fn d1(&self, t: S) -> S {
        (self.deriv)(t)
    }

    /// f'(t) = F''(t)
    pub fn d2(&self, t: S) -> S {
        (self.deriv2)(t)
    }

    /// Symmetric double well W(t) = (1-t^2)^2 / 4.
    pub fn double_well() -> Self {
        Potential::new(
            "double_well",
            |t: S| {
                let w = S::one() - t * t;
                w * w * S::of(0.25)
            },
            |t: S| t * t * t - t,
            |t: S| S::of(3.0) * t * t - S::one(),
            (S::of(-3.0), S::of(3.0)),
        )
    }

    /// F(t) = -t^2/2: a single unstable critical point with quadratic decay.
    pub fn neg_quadratic() -> Self {
        Potential::new(
            "neg_quadratic",
            |t: S| -t * t * S::of(0.5),
            |t: S| -t,
            |_t: S| -S::one(),
            (S::of(-3.0), S::of(3.0)),
        )
    }

    /// F(t) = 2 exp(-t^2) - t^2/2: still (A2), but with a stiffer hump at 0
    /// (F''(0) = -5), so nonconstant unstable solutions exist on S^3.
    pub fn neg_quadratic_bump() -> Self {
        Potential::new(
            "neg_quadratic_bump",
            |t: S| S::of(2.0) * (-t * t).exp() - t * t * S::of(0.5),
            |t: S| -S::of(4.0) * t * (-t * t).exp() - t,
            |t: S| (S::of(8.0) * t * t - S::of(4.0)) * (-t * t).exp() - S::one(),
            (S::of(-4.0), S::of(4.0)),
        )
    }

    /// F(t) = t^2/2 - t^4/4: superlinear subcritical decay, hypothesis (A3).
    pub fn quartic_decay() -> Self {
        Potential::new(
            "quartic_decay",
            |t: S| t * t * S::of(0.5) - t * t * t * t * S::of(0.25),
            |t: S| t - t * t * t,
            |t: S| S::one() - S::of(3.0) * t * t,
            (S::of(-8.0), S::of(8.0)),
        )
    }

    /// F identically zero (pure Dirichlet energy).
    pub fn zero() -> Self {
        Potential::new(
            "zero",
            |_| S::zero(),
            |_| S::zero(),
            |_| S::zero(),
            (S::of(-1.0), S::of(1.0)),
        )
    }

    /// F(t) = sum of coeffs`[k]` t^k.
    pub fn polynomial(coeffs: &[f64]) -> Self {
        let c: Vec<f64> = coeffs.to_vec();
        let d1: Vec<f64> = c
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, v)| v * k as f64)
            .collect();
        let d2: Vec<f64> = d1
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, v)| v * k as f64)
            .collect();
        let horner = |c: Vec<f64>| {
            move |t: S| {
                let mut acc = S::zero();
                for &ck in c.iter().rev() {
                    acc = acc * t + S::of(ck);
                }
                acc
            }
        };
        Potential::new(
            format!("poly{:?}", c),
            horner(c.clone()),
            horner(d1),
            horner(d2),
            (S::of(-8.0), S::of(8.0)),
        )
    }

    /// Internal Allen-Cahn potential W/eps^2 for eps^2 Lap u = W'(u).
    pub fn allen_cahn(eps: S) -> Self {
        let e2 = eps * eps;
        let mut p = Potential::new(
            format!("allen_cahn(eps={})", eps),
            move |t: S| {
                let w = S::one() - t * t;
                w * w * S::of(0.25) / e2
            },
            move |t: S| (t * t * t - t) / e2,
            move |t: S| (S::of(3.0) * t * t - S::one()) / e2,
            (S::of(-3.0), S::of(3.0)),
        );
        p.ac_epsilon = Some(eps);
        p
    }

    pub fn by_name(name: &str, eps: Option<S>) -> Result<Self, PotentialError> {
        match name {
            "double_well" => Ok(match eps {
                Some(e) => Potential::allen_cahn(e),
                None => Potential::double_well(),
            }),
            "allen_cahn" => {
                let e =
                    eps.ok_or_else(|| PotentialError::UnknownName("allen_cahn needs eps".into()))?;
                Ok(Potential::allen_cahn(e))
            }
            "neg_quadratic" => Ok(Potential::neg_quadratic()),
            "neg_quadratic_bump" => Ok(Potential::neg_quadratic_bump()),
            "quartic_decay" => Ok(Potential::quartic_decay()),
            "zero" => Ok(Potential::zero()),
            other => Err(PotentialError::UnknownName(other.into())),
        }
    }

    /// Factor turning internal energies/residuals into the reported scale
    /// (E_eps = eps * E_internal for Allen-Cahn, identity otherwise).
    pub fn energy_scale(&self) -> S {
        self.ac_epsilon.unwrap_or_else(S::one)
    }

    /// Factor turning internal linearization eigenvalues into the reported
    /// scale (-eps^2 Lap + W'' convention for Allen-Cahn).
    pub fn index_scale(&self) -> S {
        self.ac_epsilon.map(|e| e * e).unwrap_or_else(S::one)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CritKind {
    Min,
    Max,
}

#[derive(Debug, Clone, Copy)]
pub struct CriticalPoint<S> {
    pub t: S,
    pub kind: CritKind,
}

#[derive(Debug, Clone)]
pub struct CriticalPointList<S> {
    pub points: Vec<CriticalPoint<S>>,
    pub c_minus: S,
    pub c_plus: S,
    /// Local maxima c_1 < ... < c_n.
    pub unstable: Vec<S>,
    /// min(0, c_1); 0 when there is no unstable point.
    pub k_minus: S,
    /// max(0, c_n); 0 when there is no unstable point.
    pub k_plus: S,
}

impl<S: Scalar> CriticalPointList<S> {
    pub fn stable(&self) -> Vec<S> {
        self.points
            .iter()
            .filter(|p| p.kind == CritKind::Min)
            .map(|p| p.t)
            .collect()
    }

    pub fn is_stable_point(&self, t: S, tol: S) -> bool {
        self.stable().iter().any(|&s| (s - t).abs() <= tol)
    }
}

const SCAN_POINTS: usize = 10_000;

pub fn find_critical_points<S: Scalar>(
    pot: &Potential<S>,
    tol: S,
) -> Result<CriticalPointList<S>, PotentialError> {
    let (lo, hi) = pot.search_interval;
    let m = SCAN_POINTS;
    let h = (hi - lo) / S::of_usize(m);
    let mut roots: Vec<S> = Vec::new();
    let mut prev_t = lo;
    let mut prev_f = pot.d1(lo);
    for i in 1..=m {
        let t = lo + h * S::of_usize(i);
        let ft = pot.d1(t);
        if prev_f == S::zero() {
            roots.push(prev_t);
        } else if prev_f * ft < S::zero() {
            // bisection refinement
            let (mut a, mut b) = (prev_t, t);
            let (mut fa, _fb) = (prev_f, ft);
            for _ in 0..100 {
                let mid = (a + b) * S::of(0.5);
                if mid <= a || mid >= b {
                    break;
                }
                let fm = pot.d1(mid);
                if fa * fm <= S::zero() {
                    b = mid;
                } else {
                    a = mid;
                    fa = fm;
                }
            }
            roots.push((a + b) * S::of(0.5));
        }
        prev_t = t;
        prev_f = ft;
    }
    if pot.d1(hi) == S::zero() {
        roots.push(hi);
    }
    roots.dedup_by(|a, b| (*a - *b).abs() < h * S::of(0.5));
    if roots.is_empty() {
        return Err(PotentialError::EmptyResult);
    }

    let mut points = Vec::with_capacity(roots.len());
    for &t in &roots {
        if pot.d1(t).abs() >= tol {
            // bisection stalled; treat as a scan artifact, not a root
            continue;
        }
        let fp = pot.d2(t);
        if fp.abs() < tol {
            return Err(PotentialError::DegenerateCritical(t.as_f64()));
        }
        let kind = if fp > S::zero() {
            CritKind::Min
        } else {
            CritKind::Max
        };
        points.push(CriticalPoint { t, kind });
    }
    if points.is_empty() {
        return Err(PotentialError::EmptyResult);
    }
    for w in points.windows(2) {
        if w[0].kind == w[1].kind {
            return Err(PotentialError::DegenerateCritical(w[1].t.as_f64()));
        }
    }
    let c_minus = points.first().unwrap().t;
    let c_plus = points.last().unwrap().t;
    let unstable: Vec<S> = points
        .iter()
        .filter(|p| p.kind == CritKind::Max)
        .map(|p| p.t)
        .collect();
    let (k_minus, k_plus) = match (unstable.first(), unstable.last()) {
        (Some(&c1), Some(&cn)) => (S::zero().min(c1), S::zero().max(cn)),
        _ => (S::zero(), S::zero()),
    };
    Ok(CriticalPointList {
        points,
        c_minus,
        c_plus,
        unstable,
        k_minus,
        k_plus,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HypTag {
    A1,
    A2,
    A3,
    None,
}

/// Sampled hypothesis certificate: grid, fitted constants and margins, so the
/// classification can be reproduced exactly.
#[derive(Debug, Clone)]
pub struct HypothesisClass<S> {
    pub tag: HypTag,
    pub c: S,
    pub p: S,
    pub rho: S,
    pub r0: S,
    /// K = max{|k-|, k+, max_{[k-,k+]} |f|}.
    pub k: S,
    pub grid_lo: S,
    pub grid_hi: S,
    pub grid_points: usize,
    pub margin_factor: S,
    pub margin_offset: S,
}

const HYP_GRID: usize = 4000;

pub fn classify_hypothesis<S: Scalar>(
    pot: &Potential<S>,
    cps: &CriticalPointList<S>,
    n_dim: usize,
) -> Result<HypothesisClass<S>, PotentialError> {
    if cps.unstable.is_empty() {
        return Err(PotentialError::NoLocalMax);
    }
    let (lo, hi) = pot.search_interval;
    let margin_factor = S::of(1.25);
    let margin_offset = S::of(0.1);

    // K over [k-, k+]
    let mut fmax = S::zero();
    for i in 0..=1000 {
        let t = cps.k_minus + (cps.k_plus - cps.k_minus) * S::of_usize(i) / S::of(1000.0);
        fmax = fmax.max(pot.d1(t).abs());
    }
    let k_const = cps.k_minus.abs().max(cps.k_plus).max(fmax);

    let base = |tag: HypTag| HypothesisClass {
        tag,
        c: S::zero(),
        p: S::zero(),
        rho: S::zero(),
        r0: S::zero(),
        k: k_const,
        grid_lo: lo,
        grid_hi: hi,
        grid_points: HYP_GRID,
        margin_factor,
        margin_offset,
    };

    // (A1): extreme critical points are both minima
    let first = cps.points.first().unwrap();
    let last = cps.points.last().unwrap();
    if first.kind == CritKind::Min && last.kind == CritKind::Min {
        return Ok(base(HypTag::A1));
    }

    // (A2): -sgn(t) f(t) <= C (1 + |t|), C fitted on the inner half and
    // required to cover the full grid with margin.
    let ratio = |t: S| {
        let s = if t > S::zero() { S::one() } else { -S::one() };
        (-s * pot.d1(t)) / (S::one() + t.abs())
    };
    let mut c_inner = S::zero();
    let mut c_full = S::zero();
    for i in 0..=HYP_GRID {
        let t = lo + (hi - lo) * S::of_usize(i) / S::of_usize(HYP_GRID);
        if t.abs() < S::of(1e-9) {
            continue;
        }
        let r = ratio(t);
        c_full = c_full.max(r);
        if t.abs() <= lo.abs().max(hi.abs()) * S::of(0.5) {
            c_inner = c_inner.max(r);
        }
    }
    if c_full <= c_inner * margin_factor + margin_offset {
        let mut out = base(HypTag::A2);
        out.c = c_full * margin_factor + margin_offset;
        return Ok(out);
    }

    // (A3): superlinear decay, subcritical power bound and the
    // Ambrosetti-Rabinowitz-type inequality, all sampled on the right tail
    // beyond a threshold R0.
    let a3 = 'a3: {
        let p_limit = if n_dim > 2 {
            S::of(2.0 * n_dim as f64 / (n_dim as f64 - 2.0))
        } else {
            // subcritical range is unbounded for N <= 2; cap the scan
            S::of(12.0)
        };
        // superlinear: -f(t)/t increasing and large at the right end
        let s_at = |t: S| -pot.d1(t) / t;
        let s_hi = s_at(hi);
        let s_q3 = s_at(hi * S::of(0.75));
        if !(s_hi > s_q3 * S::of(1.2) && s_hi > S::of(10.0)) {
            break 'a3 None;
        }
        // exponent from the log-slope of -f at the right end, snapped to a 0.5 grid
        let t1 = hi * S::of(0.9);
        let slope = ((-pot.d1(hi)) / (-pot.d1(t1))).ln() / (hi / t1).ln();
        let p_cand = (slope + S::one()).as_f64();
        let p_snap = S::of((p_cand * 2.0).round() / 2.0);
        if p_snap <= S::of(2.0) || p_snap >= p_limit {
            break 'a3 None;
        }
        // rho and R0 by ascending scan
        let mut found: Option<(S, S)> = None;
        'rho: for irho in 1..=9 {
            let rho = S::of(irho as f64 * 0.05);
            if rho >= S::of(0.5) {
                break;
            }
            let cond = |t: S| -rho * t * pot.d1(t) + pot.eval(t) - t * t;
            // smallest grid R0 with cond >= 0 for all sampled t in (R0, hi]
            let mut r0 = None;
            let steps = 400;
            let mut all_ok_from = steps + 1;
            for i in (0..=steps).rev() {
                let t = hi * S::of_usize(i) / S::of_usize(steps);
                if t <= S::zero() {
                    break;
                }
                if cond(t) >= S::zero() {
                    all_ok_from = i;
                } else {
                    break;
                }
            }
            if all_ok_from <= steps {
                let t0 = hi * S::of_usize(all_ok_from) / S::of_usize(steps);
                if t0 < hi * S::of(0.95) {
                    r0 = Some(t0);
                }
            }
            if let Some(r0) = r0 {
                found = Some((rho, r0));
                break 'rho;
            }
        }
        let Some((rho, r0)) = found else {
            break 'a3 None;
        };
        // fitted power-bound constant on the tail
        let mut c3 = S::zero();
        for i in 0..=400 {
            let t = r0 + (hi - r0) * S::of_usize(i) / S::of(400.0);
            let bound = S::one() + t.abs().powf(p_snap - S::one());
            c3 = c3.max((-pot.d1(t)) / bound);
        }
        Some((c3 * margin_factor + margin_offset, p_snap, rho, r0))
    };
    if let Some((c3, p, rho, r0)) = a3 {
        let mut out = base(HypTag::A3);
        out.c = c3;
        out.p = p;
        out.rho = rho;
        out.r0 = r0;
        return Ok(out);
    }

    Ok(base(HypTag::None))
}

/// Splice data for the truncated potential F*: F below M, a quintic Hermite
/// blend on [M, c*], and the coercive tail a (t - c*)^2 + b beyond.
#[derive(Debug, Clone, Copy)]
struct Splice<S> {
    m: S,
    cstar: S,
    a: S,
    b: S,
    // quintic coefficients in s = (t - M)/w
    q: [S; 6],
    w: S,
}

impl<S: Scalar> Splice<S> {
    fn build(f_m: S, df_m: S, ddf_m: S, m: S, w: S) -> Self {
        let cstar = m + w;
        let a = S::one().max(df_m.abs() / w).max(ddf_m.abs());
        let b = f_m + df_m * w * S::of(0.5);
        // Hermite end data in the scaled variable s in [0,1]
        let (p0, d0, c0) = (f_m, df_m * w, ddf_m * w * w);
        let (p1, d1, c1) = (b, S::zero(), S::of(2.0) * a * w * w);
        // quintic q(s) with q(0)=p0, q'(0)=d0, q''(0)=c0, q(1)=p1, q'(1)=d1, q''(1)=c1
        let half = S::of(0.5);
        let q0 = p0;
        let q1 = d0;
        let q2 = c0 * half;
        let r0 = p1 - (q0 + q1 + q2);
        let r1 = d1 - (q1 + S::of(2.0) * q2);
        let r2 = c1 - S::of(2.0) * q2;
        let q3 = S::of(10.0) * r0 - S::of(4.0) * r1 + half * r2;
        let q4 = -S::of(15.0) * r0 + S::of(7.0) * r1 - r2;
        let q5 = S::of(6.0) * r0 - S::of(3.0) * r1 + half * r2;
        Splice {
            m,
            cstar,
            a,
            b,
            q: [q0, q1, q2, q3, q4, q5],
            w,
        }
    }

    fn eval(&self, t: S) -> S {
        if t >= self.cstar {
            let d = t - self.cstar;
            self.a * d * d + self.b
        } else {
            let s = (t - self.m) / self.w;
            let mut acc = S::zero();
            for &c in self.q.iter().rev() {
                acc = acc * s + c;
            }
            acc
        }
    }

    fn d1(&self, t: S) -> S {
        if t >= self.cstar {
            S::of(2.0) * self.a * (t - self.cstar)
        } else {
            let s = (t - self.m) / self.w;
            let mut acc = S::zero();
            for k in (1..6).rev() {
                acc = acc * s + self.q[k] * S::of_usize(k);
            }
            acc / self.w
        }
    }

    fn d2(&self, t: S) -> S {
        if t >= self.cstar {
            S::of(2.0) * self.a
        } else {
            let s = (t - self.m) / self.w;
            let mut acc = S::zero();
            for k in (2..6).rev() {
                acc = acc * s + self.q[k] * S::of_usize(k * (k - 1));
            }
            acc / (self.w * self.w)
        }
    }

    /// For a decaying F (f(M) < 0) the blend must be strictly decreasing.
    fn monotone_decreasing(&self) -> bool {
        for i in 1..200 {
            let t = self.m + self.w * S::of_usize(i) / S::of(200.0);
            if self.d1(t) > S::zero() {
                return false;
            }
        }
        true
    }
}

/// Lemma-style truncation: F* = F on (-inf, M], F* >= F near M with a single
/// new minimum c* > M and a coercive quadratic tail, C^2 at the splice.
pub fn truncate_potential<S: Scalar>(
    pot: &Potential<S>,
    cps: &CriticalPointList<S>,
    m: S,
) -> Result<Potential<S>, PotentialError> {
    if m <= cps.c_plus {
        return Err(PotentialError::InvalidM {
            m: m.as_f64(),
            c_plus: cps.c_plus.as_f64(),
        });
    }
    let f_m = pot.eval(m);
    let df_m = pot.d1(m);
    let ddf_m = pot.d2(m);
    let span = (cps.c_plus - cps.c_minus).max(S::one());
    let mut w = span * S::of(0.5);
    let mut splice = Splice::build(f_m, df_m, ddf_m, m, w);
    if df_m < S::zero() {
        for _ in 0..48 {
            if splice.monotone_decreasing() {
                break;
            }
            w = w * S::of(2.0);
            splice = Splice::build(f_m, df_m, ddf_m, m, w);
        }
    }
    let base = pot.clone();
    let sp = splice;
    let (lo, _) = pot.search_interval;
    let hi_new = sp.cstar + sp.w;
    let b2 = base.clone();
    let b3 = base.clone();
    let mut out = Potential::new(
        format!("{}*@{}", pot.name, m),
        move |t: S| if t <= sp.m { base.eval(t) } else { sp.eval(t) },
        move |t: S| if t <= sp.m { b2.d1(t) } else { sp.d1(t) },
        move |t: S| if t <= sp.m { b3.d2(t) } else { sp.d2(t) },
        (lo, hi_new),
    );
    out.ac_epsilon = pot.ac_epsilon;
    Ok(out)
}

/// Max central-difference defect of (F, f) and (f, f') over the search grid;
/// second order in h, used by the consistency tests.
pub fn derivative_defect<S: Scalar>(pot: &Potential<S>, h: S, samples: usize) -> S {
    let (lo, hi) = pot.search_interval;
    let mut worst = S::zero();
    for i in 0..=samples {
        let t = lo + (hi - lo) * S::of_usize(i) / S::of_usize(samples);
        let fd1 = (pot.eval(t + h) - pot.eval(t - h)) / (S::of(2.0) * h);
        let fd2 = (pot.d1(t + h) - pot.d1(t - h)) / (S::of(2.0) * h);
        worst = worst
            .max((fd1 - pot.d1(t)).abs())
            .max((fd2 - pot.d2(t)).abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cps(pot: &Potential<f64>) -> CriticalPointList<f64> {
        find_critical_points(pot, 1e-8).unwrap()
    }

    #[test]
    fn double_well_critical_points() {
        let pot = Potential::<f64>::double_well();
        let list = cps(&pot);
        assert_eq!(list.points.len(), 3);
        assert!((list.c_minus + 1.0).abs() < 1e-9);
        assert!((list.c_plus - 1.0).abs() < 1e-9);
        assert_eq!(list.unstable.len(), 1);
        assert!(list.unstable[0].abs() < 1e-9);
        assert!(list.k_minus.abs() < 1e-12);
        assert!(list.k_plus.abs() < 1e-12);
        assert_eq!(list.points[0].kind, CritKind::Min);
        assert_eq!(list.points[1].kind, CritKind::Max);
    }

    #[test]
    fn single_minimum() {
        let pot = Potential::<f64>::polynomial(&[0.0, 0.0, 0.5]); // t^2/2
        let list = cps(&pot);
        assert_eq!(list.points.len(), 1);
        assert!(list.points[0].t.abs() < 1e-9);
        assert_eq!(list.points[0].kind, CritKind::Min);
        assert!(list.unstable.is_empty());
    }

    #[test]
    fn quartic_decay_critical_points() {
        // f = t - t^3: maxima at -1 and 1, minimum at 0 (sign analysis of t - t^3,
        // cross-checked by the scan itself)
        let pot = Potential::<f64>::quartic_decay();
        let list = cps(&pot);
        assert_eq!(list.points.len(), 3);
        assert_eq!(list.points[0].kind, CritKind::Max);
        assert_eq!(list.points[1].kind, CritKind::Min);
        assert_eq!(list.points[2].kind, CritKind::Max);
        assert_eq!(list.unstable.len(), 2);
        assert!((list.k_minus + 1.0).abs() < 1e-9);
        assert!((list.k_plus - 1.0).abs() < 1e-9);
    }

    #[test]
    fn degenerate_detected() {
        // F = t^4/4 has f = t^3 with f'(0) = 0: not Morse at the root
        let pot = Potential::<f64>::polynomial(&[0.0, 0.0, 0.0, 0.0, 0.25]);
        match find_critical_points(&pot, 1e-8) {
            Err(PotentialError::DegenerateCritical(t)) => assert!(t.abs() < 1e-3),
            other => panic!("expected DegenerateCritical, got {other:?}"),
        }
    }

    #[test]
    fn classify_double_well_a1() {
        let pot = Potential::<f64>::double_well();
        let list = cps(&pot);
        for n in [2usize, 3, 4, 7] {
            let h = classify_hypothesis(&pot, &list, n).unwrap();
            assert_eq!(h.tag, HypTag::A1, "N={n}");
        }
        // K = max{0, 0, |f(0)| = 0} for the double well (k- = k+ = 0)
        let h = classify_hypothesis(&pot, &list, 3).unwrap();
        assert!(h.k.abs() < 1e-9);
    }

    #[test]
    fn classify_neg_quadratic_a2() {
        let pot = Potential::<f64>::neg_quadratic();
        let list = cps(&pot);
        let h = classify_hypothesis(&pot, &list, 3).unwrap();
        assert_eq!(h.tag, HypTag::A2);
        // analytic constant is 1 (|t| <= 1 (1+|t|)); sampled certificate lands near it
        assert!(h.c >= 0.9 && h.c <= 1.2, "C = {}", h.c);
    }

    #[test]
    fn classify_quartic_decay_a3() {
        let pot = Potential::<f64>::quartic_decay();
        let list = cps(&pot);
        let h = classify_hypothesis(&pot, &list, 3).unwrap();
        assert_eq!(h.tag, HypTag::A3);
        assert_eq!(h.p, 4.0);
        assert!((h.rho - 0.3).abs() < 1e-12, "rho = {}", h.rho);
        // -0.3 t f + F - t^2 = 0.05 t^4 - 0.8 t^2 >= 0 iff t >= 4
        assert!((h.r0 - 4.0).abs() < 0.1, "R0 = {}", h.r0);
        assert!(h.p > 2.0 && h.p < 6.0);
        assert!(h.rho < 0.5);
    }

    #[test]
    fn classify_requires_local_max() {
        let pot = Potential::<f64>::polynomial(&[0.0, 0.0, 0.5]);
        let list = cps(&pot);
        match classify_hypothesis(&pot, &list, 3) {
            Err(PotentialError::NoLocalMax) => {}
            other => panic!("expected NoLocalMax, got {other:?}"),
        }
    }

    #[test]
    fn truncate_neg_quadratic() {
        let pot = Potential::<f64>::neg_quadratic();
        let list = cps(&pot);
        let m = 2.0;
        let star = truncate_potential(&pot, &list, m).unwrap();
        // F* = F below M
        for i in 0..100 {
            let t = -3.0 + 5.0 * i as f64 / 100.0;
            assert!((star.eval(t) - pot.eval(t)).abs() < 1e-14);
        }
        // F* >= F beyond M, tends to +infinity, exactly one critical point (a min)
        let scan = find_critical_points(&star, 1e-8).unwrap();
        let beyond: Vec<_> = scan.points.iter().filter(|p| p.t > m).collect();
        assert_eq!(beyond.len(), 1);
        assert_eq!(beyond[0].kind, CritKind::Min);
        assert!(beyond[0].t > m);
        let far = star.search_interval.1;
        assert!(star.eval(far) > star.eval(m));
        for i in 0..400 {
            let t = m + (far - m) * i as f64 / 400.0;
            assert!(star.eval(t) >= pot.eval(t) - 1e-12, "t={t}");
        }
        // C2 splice
        let d = derivative_defect(&star, 1e-5, 2000);
        assert!(d < 1e-6, "defect {d}");
    }

    #[test]
    fn truncate_a1_keeps_f_below_m_and_adds_minimum() {
        let pot = Potential::<f64>::double_well();
        let list = cps(&pot);
        let m = 1.5;
        let star = truncate_potential(&pot, &list, m).unwrap();
        assert!((star.eval(1.5) - pot.eval(1.5)).abs() < 1e-14);
        assert!((star.d1(1.5) - pot.d1(1.5)).abs() < 1e-12);
        let scan = find_critical_points(&star, 1e-8).unwrap();
        let mins_beyond: Vec<_> = scan
            .points
            .iter()
            .filter(|p| p.t > m && p.kind == CritKind::Min)
            .collect();
        assert_eq!(mins_beyond.len(), 1);
    }

    #[test]
    fn truncate_quartic_decay_conclusions() {
        // superlinear-decay tail replaced by a coercive one: F* = F up to M,
        // F* >= F beyond, and exactly one new critical point (a minimum)
        let pot = Potential::<f64>::quartic_decay();
        let list = cps(&pot);
        let m = 2.0;
        let star = truncate_potential(&pot, &list, m).unwrap();
        for i in 0..=400 {
            let t = -3.0 + (m + 3.0) * i as f64 / 400.0;
            assert!((star.eval(t) - pot.eval(t)).abs() < 1e-13, "below M at t={t}");
        }
        let far = star.search_interval.1;
        for i in 0..=400 {
            let t = m + (far - m) * i as f64 / 400.0;
            assert!(star.eval(t) >= pot.eval(t) - 1e-12, "above F at t={t}");
        }
        let scan = find_critical_points(&star, 1e-8).unwrap();
        let beyond: Vec<_> = scan.points.iter().filter(|p| p.t > m).collect();
        assert_eq!(beyond.len(), 1);
        assert_eq!(beyond[0].kind, CritKind::Min);
        assert!(derivative_defect(&star, 1e-5, 2000) < 1e-5);
    }

    #[test]
    fn truncate_rejects_small_m() {
        let pot = Potential::<f64>::double_well();
        let list = cps(&pot);
        assert!(matches!(
            truncate_potential(&pot, &list, 0.5),
            Err(PotentialError::InvalidM { .. })
        ));
    }

    #[test]
    fn derivative_consistency_all_builtins() {
        for pot in [
            Potential::<f64>::double_well(),
            Potential::neg_quadratic(),
            Potential::neg_quadratic_bump(),
            Potential::quartic_decay(),
            Potential::allen_cahn(0.4),
        ] {
            let d = derivative_defect(&pot, 1e-5, 2000);
            assert!(d < 2e-5, "{}: defect {d}", pot.name);
        }
    }

    #[test]
    fn generic_scalar_smoke() {
        let pot = Potential::<f32>::double_well();
        assert!((pot.eval(0.0) - 0.25).abs() < 1e-6);
        assert!((pot.d1(1.0)).abs() < 1e-6);
    }
}
