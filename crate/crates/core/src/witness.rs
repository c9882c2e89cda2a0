//! Log-domain positivity witness for the flat function `τ = e^(-1/φ)`,
//! `φ(x) = sin²(1/x)·e^(-1/x²)`.
//!
//! `T(x) = ∫₀ˣ τ` is the only antiderivative of `τ dx` vanishing at 0. Every
//! function in the ideal generated by `φ` vanishes at the zeros `1/(kπ)` of
//! `φ`, so positive values `T(1/n)` witness that `τ dx` has no antiderivative
//! there. Values such as `τ(1/3) ≈ e^(-406886)` are far outside binary64, so
//! integrands and sums are kept as logarithms of high-precision floats.
//!
//! Between consecutive zeros `log φ = 2·log|sin u| - u²` (with `u = 1/x`) is
//! concave in `u`, and `u` is monotone in `x`, so on a cell free of zeros the
//! minimum of `τ` is attained at an endpoint. Cell lower bounds are therefore
//! `width · min(τ(left), τ(right))` with no extra safety factor. The result is
//! numerical evidence at the stated precision: the bound is witnessed, not
//! proved, since floating-point rounding is bounded but not enclosed.

use std::fmt;

use astro_float::{BigFloat, Consts, RoundingMode};

use crate::error::WitnessError;

const RM: RoundingMode = RoundingMode::ToEven;
pub const DEFAULT_PRECISION: usize = 200;
pub const DEFAULT_GRID: usize = 4096;
/// Required ratio between a lower bound and its error bound.
pub const MARGIN: f64 = 10.0;

/// A nonnegative quantity stored by its natural logarithm, with an absolute
/// error bound on the logarithm.
#[derive(Clone, Debug)]
pub enum LogValue {
    Zero,
    Positive { log: BigFloat, err: f64 },
}

impl LogValue {
    pub fn is_zero(&self) -> bool {
        matches!(self, LogValue::Zero)
    }

    /// The logarithm rounded to binary64, `-∞` for zero.
    pub fn log_f64(&self) -> f64 {
        match self {
            LogValue::Zero => f64::NEG_INFINITY,
            LogValue::Positive { log, .. } => to_f64(log),
        }
    }

    pub fn err(&self) -> f64 {
        match self {
            LogValue::Zero => 0.0,
            LogValue::Positive { err, .. } => *err,
        }
    }

    /// Ratio of the value to its absolute error bound.
    pub fn margin(&self) -> f64 {
        match self {
            LogValue::Zero => 0.0,
            LogValue::Positive { err, .. } => 1.0 / err.exp_m1(),
        }
    }
}

fn to_f64(x: &BigFloat) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    x.to_string().parse().unwrap_or(if x.is_negative() { f64::NEG_INFINITY } else { f64::INFINITY })
}

/// High-precision evaluation context.
pub struct Evaluator {
    p: usize,
    cc: Consts,
    pi: BigFloat,
}

impl Evaluator {
    pub fn new(precision_bits: usize) -> Result<Self, WitnessError> {
        if precision_bits < 64 {
            return Err(WitnessError::Precision(precision_bits));
        }
        let mut cc = Consts::new().expect("constant cache allocation");
        let pi = cc.pi(precision_bits, RM);
        Ok(Evaluator { p: precision_bits, cc, pi })
    }

    pub fn precision(&self) -> usize {
        self.p
    }

    fn unit_err(&self) -> f64 {
        2f64.powi(-(self.p as i32))
    }

    pub fn float(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, self.p)
    }

    pub fn pi(&self) -> BigFloat {
        self.pi.clone()
    }

    /// `1/(kπ)`.
    pub fn zero_of_phi(&mut self, k: u64) -> BigFloat {
        let kpi = self.pi().mul(&BigFloat::from_u64(k, self.p), self.p, RM);
        kpi.reciprocal(self.p, RM)
    }

    /// Nearest `k` with `1/x ≈ kπ` when `x` is a zero of `φ` to working
    /// precision.
    fn zero_index(&mut self, u: &BigFloat) -> Option<BigFloat> {
        let pi = self.pi();
        let ratio = u.div(&pi, self.p, RM);
        let half = BigFloat::from_f64(0.5, self.p);
        let k = ratio.add(&half, self.p, RM).floor();
        if k.is_zero() {
            return None;
        }
        let diff = u.sub(&k.mul(&pi, self.p, RM), self.p, RM).abs();
        let tol = u.mul(&BigFloat::from_f64(2f64.powi(8 - self.p as i32), self.p), self.p, RM);
        (diff.cmp(&tol).is_some_and(|c| c <= 0)).then_some(k)
    }

    /// `φ(x)`; exactly zero at `x = 0` and at `1/(kπ)` to working precision.
    pub fn phi(&mut self, x: &BigFloat) -> BigFloat {
        let zero = BigFloat::from_u8(0, self.p);
        if x.is_zero() {
            return zero;
        }
        let u = x.reciprocal(self.p, RM);
        if self.zero_index(&u).is_some() {
            return zero;
        }
        let s = u.sin(self.p, RM, &mut self.cc);
        let e = u.mul(&u, self.p, RM).neg().exp(self.p, RM, &mut self.cc);
        s.mul(&s, self.p, RM).mul(&e, self.p, RM)
    }

    /// `log τ(x) = -1/φ(x)`, or zero where `φ` vanishes.
    pub fn tau_log(&mut self, x: &BigFloat) -> LogValue {
        let phi = self.phi(x);
        if phi.is_zero() {
            return LogValue::Zero;
        }
        let log = phi.reciprocal(self.p, RM).neg();
        let u = to_f64(&x.reciprocal(self.p, RM)).abs();
        let sin_u = u.sin().abs().max(f64::MIN_POSITIVE);
        let rel_phi = self.unit_err() * (8.0 + 2.0 * u / sin_u + 4.0 * u * u);
        let err = to_f64(&log).abs() * rel_phi + self.unit_err();
        LogValue::Positive { log, err }
    }

    /// `log(e^a + e^b)`.
    fn log_add(&mut self, a: LogValue, b: LogValue) -> LogValue {
        match (a, b) {
            (LogValue::Zero, v) | (v, LogValue::Zero) => v,
            (LogValue::Positive { log: la, err: ea }, LogValue::Positive { log: lb, err: eb }) => {
                let (hi, lo) = if la.cmp(&lb).is_some_and(|c| c >= 0) { (la, lb) } else { (lb, la) };
                let gap = lo.sub(&hi, self.p, RM);
                let err = ea.max(eb) + 4.0 * self.unit_err();
                if to_f64(&gap) < -1e9 {
                    return LogValue::Positive { log: hi, err };
                }
                let one = BigFloat::from_u8(1, self.p);
                let t = gap.exp(self.p, RM, &mut self.cc).add(&one, self.p, RM).ln(self.p, RM, &mut self.cc);
                LogValue::Positive { log: hi.add(&t, self.p, RM), err }
            }
        }
    }

    /// Whether some zero `1/(kπ)` lies in `[a, b]` (`a > 0`).
    fn straddles_zero(&mut self, a: &BigFloat, b: &BigFloat) -> bool {
        let pi = self.pi();
        let k_hi = a.mul(&pi, self.p, RM).reciprocal(self.p, RM).floor();
        let k_lo = b.mul(&pi, self.p, RM).reciprocal(self.p, RM).ceil();
        k_hi.cmp(&k_lo).is_some_and(|c| c >= 0) || self.zero_index(&a.reciprocal(self.p, RM)).is_some()
            || self.zero_index(&b.reciprocal(self.p, RM)).is_some()
    }

    /// Lower bound for `∫ₐᵇ τ` on a uniform grid of `grid` cells.
    pub fn log_integral_lower_bound(&mut self, a: &BigFloat, b: &BigFloat, grid: usize) -> Result<LogValue, WitnessError> {
        if grid == 0 {
            return Err(WitnessError::Grid);
        }
        if a.is_negative() || a.cmp(b).is_none_or(|c| c >= 0) {
            return Err(WitnessError::Interval { a: format!("{}", to_f64(a)), b: format!("{}", to_f64(b)) });
        }
        let width = b.sub(a, self.p, RM).div(&BigFloat::from_u64(grid as u64, self.p), self.p, RM);
        let log_width = width.ln(self.p, RM, &mut self.cc);
        let points: Vec<BigFloat> = (0..=grid)
            .map(|i| if i == grid { b.clone() } else { a.add(&width.mul(&BigFloat::from_u64(i as u64, self.p), self.p, RM), self.p, RM) })
            .collect();
        let values: Vec<LogValue> = points.iter().map(|x| self.tau_log(x)).collect();
        let mut total = LogValue::Zero;
        for i in 0..grid {
            if points[i].is_zero() || self.straddles_zero(&points[i], &points[i + 1]) {
                continue;
            }
            let cell = match (&values[i], &values[i + 1]) {
                (LogValue::Positive { log: l0, err: e0 }, LogValue::Positive { log: l1, err: e1 }) => {
                    let (l, e) = if l0.cmp(l1).is_some_and(|c| c <= 0) { (l0, *e0) } else { (l1, *e1) };
                    LogValue::Positive { log: l.add(&log_width, self.p, RM), err: e + 4.0 * self.unit_err() }
                }
                _ => LogValue::Zero,
            };
            total = self.log_add(total, cell);
        }
        Ok(total)
    }

    /// `log((b - a)·exp(-e^(1/b²)))`, an upper bound for `log ∫ₐᵇ τ` since
    /// `φ ≤ e^(-1/x²) ≤ e^(-1/b²)` on `[a, b]`.
    pub fn log_integral_upper_bound(&mut self, a: &BigFloat, b: &BigFloat) -> BigFloat {
        let len = b.sub(a, self.p, RM).ln(self.p, RM, &mut self.cc);
        let inv_b2 = b.mul(b, self.p, RM).reciprocal(self.p, RM);
        len.sub(&inv_b2.exp(self.p, RM, &mut self.cc), self.p, RM)
    }

    /// The sub-interval of `[0, 1/n]` used for `T(1/n)`: from just above
    /// the largest zero `1/(kπ) < 1/n` up to `1/n`.
    pub fn witness_interval(&mut self, n: u64) -> (BigFloat, BigFloat) {
        let k = (n as f64 / std::f64::consts::PI).floor() as u64 + 1;
        let z = self.zero_of_phi(k);
        let b = BigFloat::from_u64(n, self.p).reciprocal(self.p, RM);
        let gap = b.sub(&z, self.p, RM).mul(&BigFloat::from_f64(2f64.powi(-10), self.p), self.p, RM);
        (z.add(&gap, self.p, RM), b)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessVerdict {
    Positive,
    Indeterminate,
}

impl fmt::Display for WitnessVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WitnessVerdict::Positive => "positive",
            WitnessVerdict::Indeterminate => "indeterminate",
        })
    }
}

#[derive(Clone, Debug)]
pub struct WitnessEntry {
    pub n: u64,
    pub interval: (f64, f64),
    pub lower: LogValue,
    pub upper_log: f64,
    pub verdict: WitnessVerdict,
}

impl fmt::Display for WitnessEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n={} logT_lower={:.6} verdict={}", self.n, self.lower.log_f64(), self.verdict)
    }
}

#[derive(Clone, Debug)]
pub struct WitnessReport {
    pub precision: usize,
    pub grid: usize,
    pub entries: Vec<WitnessEntry>,
}

impl fmt::Display for WitnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# positivity of T(1/n) witnessed numerically at {} bits, grid {}", self.precision, self.grid)?;
        for e in &self.entries {
            writeln!(f, "{e}")?;
        }
        Ok(())
    }
}

pub fn nonexactness_witness(n_max: u64, precision_bits: usize, grid: usize) -> Result<WitnessReport, WitnessError> {
    if n_max == 0 {
        return Err(WitnessError::Count);
    }
    let mut ev = Evaluator::new(precision_bits)?;
    let mut entries = Vec::new();
    for n in 1..=n_max {
        let (a, b) = ev.witness_interval(n);
        let lower = ev.log_integral_lower_bound(&a, &b, grid)?;
        let upper_log = to_f64(&ev.log_integral_upper_bound(&a, &b));
        let verdict = if !lower.is_zero() && lower.log_f64().is_finite() && lower.margin() >= MARGIN {
            WitnessVerdict::Positive
        } else {
            WitnessVerdict::Indeterminate
        };
        entries.push(WitnessEntry { n, interval: (to_f64(&a), to_f64(&b)), lower, upper_log, verdict });
    }
    Ok(WitnessReport { precision: ev.precision(), grid, entries })
}

/// The same endpoint lower bound evaluated directly in binary64.
pub fn binary64_lower_bound(a: f64, b: f64, grid: usize) -> f64 {
    let tau = |x: f64| {
        let u = 1.0 / x;
        let phi = u.sin().powi(2) * (-u * u).exp();
        if phi == 0.0 {
            0.0
        } else {
            (-1.0 / phi).exp()
        }
    };
    let width = (b - a) / grid as f64;
    (0..grid).map(|i| tau(a + i as f64 * width).min(tau(a + (i + 1) as f64 * width)) * width).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev() -> Evaluator {
        Evaluator::new(200).unwrap()
    }

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn point_values() {
        let mut e = ev();
        let half = e.float(0.5);
        assert!(close(to_f64(&e.phi(&half)), 0.0151437697, 1e-9));
        assert!(close(e.tau_log(&half).log_f64(), -66.0337564, 1e-6));
        let x = e.float(0.9);
        assert!(close(to_f64(&e.phi(&x)), 0.2336879, 1e-6));
        assert!(close(e.tau_log(&x).log_f64(), -4.2792111, 1e-6));
        assert!(e.phi(&e.float(0.0)).is_zero());
        let third = e.float(1.0 / 3.0);
        assert!(close(e.tau_log(&third).log_f64(), -406886.379, 1e-2));
    }

    #[test]
    fn zeros_are_exact() {
        let mut e = ev();
        for k in 1..=100 {
            let z = e.zero_of_phi(k);
            assert!(e.phi(&z).is_zero(), "k={k}");
            assert!(e.tau_log(&z).is_zero());
        }
    }

    #[test]
    fn integral_bounds() {
        let mut e = ev();
        let (a, b) = (e.float(0.8), e.float(1.0));
        let lo = e.log_integral_lower_bound(&a, &b, 1024).unwrap();
        assert!(lo.log_f64() > -10.0 && lo.log_f64() <= -5.9048);
        assert!(lo.log_f64() <= to_f64(&e.log_integral_upper_bound(&a, &b)));
        let pi = 1.0 / std::f64::consts::PI;
        let (a, b) = (e.float(pi - 1e-6), e.float(pi + 1e-6));
        assert!(e.log_integral_lower_bound(&a, &b, 1).unwrap().is_zero());
        assert!(e.log_integral_lower_bound(&a, &b, 16).unwrap().log_f64() < -1e10);
        let (a, b) = (e.float(0.45), e.float(0.5));
        let lo = e.log_integral_lower_bound(&a, &b, 4096).unwrap();
        assert!(lo.log_f64() > -66.04 + 0.05f64.ln() - 30.0 && lo.log_f64() < -66.0 + 0.05f64.ln());
        assert!(e.log_integral_lower_bound(&b, &a, 4).is_err());
    }

    #[test]
    fn witness_entries() {
        let r = nonexactness_witness(3, 200, 1024).unwrap();
        let logs: Vec<f64> = r.entries.iter().map(|e| e.lower.log_f64()).collect();
        assert!(r.entries.iter().all(|e| e.verdict == WitnessVerdict::Positive));
        assert!(logs[0] > -10.0 && logs[0] <= -5.8255);
        assert!(logs[1] <= -73.2230 && logs[1] > -80.0);
        assert!(logs[2] < -8000.0 && logs[2].is_finite());
        assert!(logs[0] >= logs[1] && logs[1] >= logs[2]);
        for e in &r.entries {
            assert!(e.lower.log_f64() <= e.upper_log);
            assert!(e.lower.margin() >= MARGIN);
        }
        assert_eq!(binary64_lower_bound(r.entries[2].interval.0, r.entries[2].interval.1, 1024), 0.0);
        assert!(binary64_lower_bound(r.entries[0].interval.0, r.entries[0].interval.1, 1024) > 0.0);
        assert!(r.entries[0].to_string().starts_with("n=1 logT_lower=-"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]
        #[test]
        fn refinement_is_monotone(a in 0.25f64..0.9, len in 0.01f64..0.1, g in 1usize..16) {
            let mut e = Evaluator::new(128).unwrap();
            let (x, y) = (e.float(a), e.float(a + len));
            let coarse = e.log_integral_lower_bound(&x, &y, g).unwrap();
            let fine = e.log_integral_lower_bound(&x, &y, 2 * g).unwrap();
            prop_assert!(coarse.log_f64() <= fine.log_f64() + 1e-9);
            prop_assert!(fine.log_f64() <= to_f64(&e.log_integral_upper_bound(&x, &y)));
        }
    }
}
