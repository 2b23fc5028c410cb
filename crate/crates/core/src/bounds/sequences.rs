//! Domain-loss sequence, the `T_{r,s}` maxima over J-multisets, and the
//! integer sequences `mu_{r,s}` and Catalan `nu_r`.

use std::f64::consts::PI;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `d_r = b / r^2` with `b = 6 d / pi^2`, so that `sum_{r>=1} d_r = d`.
/// By convention `d_0 = 1` and `delta_0 = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeltaSequence {
    d: f64,
    b: f64,
}

impl DeltaSequence {
    pub fn new(d: f64) -> Result<Self> {
        if !(d > 0.0 && d < 0.5) {
            return Err(Error::InvalidInput(format!("domain-loss budget d = {d} must lie in (0, 1/2)")));
        }
        Ok(Self {
            d,
            b: 6.0 * d / (PI * PI),
        })
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `d_r`; `d_0 = 1`.
    pub fn step(&self, r: usize) -> f64 {
        if r == 0 {
            1.0
        } else {
            self.b / (r as f64 * r as f64)
        }
    }

    /// `delta_r = d_1 + ... + d_r`.
    pub fn delta(&self, r: usize) -> f64 {
        (1..=r).map(|k| self.step(k)).fold(0.0, |acc, v| acc + v)
    }

    /// `delta_r` plus the asymptotic expansion of the remaining tail.
    pub fn limit_estimate(&self, r: usize) -> f64 {
        let x = r as f64;
        self.delta(r) + self.b * (1.0 / x - 1.0 / (2.0 * x * x) + 1.0 / (6.0 * x * x * x))
    }
}

/// How a `T_{r,s}` value was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TPath {
    /// `T_{0,s} = 1`.
    Definition,
    /// Exact maximum over the admissible multisets.
    Exact,
    /// The closed bound `(16 / b^2)^(s-1)`.
    Closed,
}

impl TPath {
    pub fn as_str(self) -> &'static str {
        match self {
            TPath::Definition => "definition",
            TPath::Exact => "exact",
            TPath::Closed => "closed",
        }
    }
}

/// Largest `s` accepted by [`t_exact`].
pub const T_EXACT_MAX_S: usize = 16;

/// Largest number of multisets [`t_definition`] will visit.
pub const T_DEFINITION_MAX_VISITS: u128 = 50_000_000;

/// Budget for the product of a multiset in `J_{r,s}`: the logarithmic
/// constraint `sum log2 j <= 2 (s - 1 - log2 s)` read as `prod j * s^2 <= 4^(s-1)`.
fn product_budget(s: usize) -> (u128, u128) {
    (1u128 << (2 * (s - 1)), (s as u128) * (s as u128))
}

fn check_indices(r: usize, s: usize) -> Result<()> {
    if r >= s {
        return Err(Error::InvalidInput(format!("T_(r,s) needs r < s, got r = {r}, s = {s}")));
    }
    Ok(())
}

/// `T_{r,s} = max over J in J_{r,s} of prod_{j in J} 1/d_j`.
///
/// Every factor `1/d_j` exceeds 1, so the maximum is reached at full
/// cardinality `2(s-1)`; only the entries `>= 2` are enumerated and the
/// remaining slots are filled with 1.
pub fn t_exact(r: usize, s: usize, dseq: &DeltaSequence) -> Result<f64> {
    check_indices(r, s)?;
    if r == 0 {
        return Ok(1.0);
    }
    if s > T_EXACT_MAX_S {
        return Err(Error::SizeGuard(format!(
            "exact T_(r,s) is limited to s <= {T_EXACT_MAX_S}, got s = {s}"
        )));
    }
    let (num, den) = product_budget(s);
    let slots = 2 * (s - 1);
    let inv: Vec<f64> = (0..=r).map(|j| 1.0 / dseq.step(j)).collect();

    fn visit(from: usize, r: usize, prod: u128, used: usize, value: f64, ctx: &(u128, u128, usize, &[f64]), best: &mut f64) {
        let (num, den, slots, inv) = *ctx;
        let padded = value * inv[1].powi((slots - used) as i32);
        if padded > *best {
            *best = padded;
        }
        if used == slots {
            return;
        }
        for (j, &w) in inv.iter().enumerate().take(r + 1).skip(from) {
            let p = prod * j as u128;
            if p * den > num {
                break;
            }
            visit(j, r, p, used + 1, value * w, ctx, best);
        }
    }

    let mut best = 0.0;
    visit(2, r, 1, 0, 1.0, &(num, den, slots, &inv), &mut best);
    Ok(best)
}

/// `T_{r,s}` by visiting every admissible multiset over `{1..r}` of size
/// `1..=2(s-1)`, without the fill-with-ones shortcut of [`t_exact`].
/// Branches are cut only once their product leaves the budget.
pub fn t_definition(r: usize, s: usize, dseq: &DeltaSequence) -> Result<f64> {
    check_indices(r, s)?;
    if r == 0 {
        return Ok(1.0);
    }
    let slots = 2 * (s - 1);
    let count = multiset_count(r, slots);
    if count > T_DEFINITION_MAX_VISITS {
        return Err(Error::SizeGuard(format!(
            "enumerating J_({r},{s}) could visit {count} multisets"
        )));
    }
    let (num, den) = product_budget(s);
    struct Walk<'a> {
        r: usize,
        slots: usize,
        num: u128,
        den: u128,
        dseq: &'a DeltaSequence,
        best: f64,
    }
    impl Walk<'_> {
        fn go(&mut self, from: usize, size: usize, prod: u128, value: f64) {
            if size > 0 {
                self.best = self.best.max(value);
            }
            if size == self.slots {
                return;
            }
            for j in from..=self.r {
                let p = prod * j as u128;
                if p * self.den > self.num {
                    break;
                }
                self.go(j, size + 1, p, value / self.dseq.step(j));
            }
        }
    }
    let mut walk = Walk {
        r,
        slots,
        num,
        den,
        dseq,
        best: 0.0,
    };
    walk.go(1, 0, 1, 1.0);
    Ok(walk.best)
}

/// Number of multisets of size `1..=k` over `r` symbols.
fn multiset_count(r: usize, k: usize) -> u128 {
    // sum_{m=1}^k C(m + r - 1, r - 1) = C(k + r, r) - 1
    let mut c: u128 = 1;
    for i in 1..=r as u128 {
        c = c * (k as u128 + i) / i;
        if c > u64::MAX as u128 {
            return u128::MAX;
        }
    }
    c - 1
}

/// The closed bound `(16 / b^2)^(s-1)`, valid for `d_r = b / r^2`.
pub fn t_bound(s: usize, b: f64) -> f64 {
    if s <= 1 {
        return 1.0;
    }
    (16.0 / (b * b)).powi((s - 1) as i32)
}

/// `T_{r,s}` along the requested path. `T_{0,s}` is always the definition;
/// an exact request beyond the enumeration limit falls back to the closed bound.
pub fn t_value(r: usize, s: usize, dseq: &DeltaSequence, path: TPath) -> Result<(f64, TPath)> {
    check_indices(r, s)?;
    if r == 0 {
        return Ok((1.0, TPath::Definition));
    }
    match path {
        TPath::Exact | TPath::Definition if s <= T_EXACT_MAX_S => Ok((t_exact(r, s, dseq)?, TPath::Exact)),
        _ => Ok((t_bound(s, dseq.b()), TPath::Closed)),
    }
}

/// One failed instance of a combinatorial property.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyViolation {
    pub property: String,
    pub indices: Vec<usize>,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TPropertyReport {
    pub s_max: usize,
    pub checked_monotone: usize,
    pub checked_product: usize,
    pub violations: Vec<PropertyViolation>,
}

/// Relative slack allowed when both sides of a `T` inequality are equal products.
pub const T_PROPERTY_TOLERANCE: f64 = 1e-12;

/// Checks `T_{r,s} <= T_{r',s}` and `T_{r-1,r} T_{r',s} / d_r^2 <= T_{r',r+s}`
/// for all `0 <= r <= r' < s <= s_max`, every value from [`t_definition`].
pub fn check_t_properties(dseq: &DeltaSequence, s_max: usize) -> Result<TPropertyReport> {
    let s_top = 2 * s_max;
    let mut table = vec![vec![f64::NAN; s_top + 1]; s_max + 1];
    for (r, row) in table.iter_mut().enumerate() {
        for (s, slot) in row.iter_mut().enumerate().skip(r + 1) {
            *slot = t_definition(r, s, dseq)?;
        }
    }
    let t = |r: usize, s: usize| table[r][s];
    let mut report = TPropertyReport {
        s_max,
        checked_monotone: 0,
        checked_product: 0,
        violations: Vec::new(),
    };
    for s in 1..=s_max {
        for rp in 0..s {
            for r in 0..=rp {
                report.checked_monotone += 1;
                if t(r, s) > t(rp, s) * (1.0 + T_PROPERTY_TOLERANCE) {
                    report.violations.push(PropertyViolation {
                        property: "monotone".into(),
                        indices: vec![r, rp, s],
                        lhs: t(r, s),
                        rhs: t(rp, s),
                    });
                }
                if r >= 1 {
                    report.checked_product += 1;
                    let dr = dseq.step(r);
                    let lhs = t(r - 1, r) * t(rp, s) / (dr * dr);
                    let rhs = t(rp, r + s);
                    if lhs > rhs * (1.0 + T_PROPERTY_TOLERANCE) {
                        report.violations.push(PropertyViolation {
                            property: "product".into(),
                            indices: vec![r, rp, s],
                            lhs,
                            rhs,
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Precomputed `mu_{r,s}` for `0 <= r <= max_r`, `0 <= s <= max_s`.
///
/// `mu_{0,0} = 0`, `mu_{0,s} = 1`, and
/// `mu_{r,s} = sum_{0 <= r p < s} mu_{r-1,r}^p mu_{r-1,s-rp}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MuTable {
    rows: Vec<Vec<BigUint>>,
}

impl MuTable {
    pub fn new(max_r: usize, max_s: usize) -> Self {
        let max_s = max_s.max(max_r);
        let mut rows: Vec<Vec<BigUint>> = Vec::with_capacity(max_r + 1);
        rows.push((0..=max_s).map(|s| if s == 0 { BigUint::zero() } else { BigUint::one() }).collect());
        for r in 1..=max_r {
            let prev = &rows[r - 1];
            let base = prev[r].clone();
            let row = (0..=max_s)
                .map(|s| {
                    let mut acc = BigUint::zero();
                    let mut pow = BigUint::one();
                    let mut p = 0;
                    while r * p < s {
                        acc += &pow * &prev[s - r * p];
                        pow *= &base;
                        p += 1;
                    }
                    acc
                })
                .collect();
            rows.push(row);
        }
        Self { rows }
    }

    pub fn max_r(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn max_s(&self) -> usize {
        self.rows[0].len() - 1
    }

    pub fn get(&self, r: usize, s: usize) -> Option<&BigUint> {
        self.rows.get(r).and_then(|row| row.get(s))
    }

    /// `mu_{r,s}` as a float, `+inf` when it does not fit.
    pub fn get_f64(&self, r: usize, s: usize) -> Option<f64> {
        self.get(r, s).map(|v| v.to_f64().unwrap_or(f64::INFINITY))
    }
}

/// Single `mu_{r,s}` value.
pub fn mu(r: usize, s: usize) -> BigUint {
    MuTable::new(r, s).get(r, s).cloned().unwrap_or_default()
}

/// Catalan numbers `nu_1 = 1`, `nu_r = sum_{j=1}^{r-1} nu_j nu_{r-j}`, for `r = 1..=max_r`.
/// Index 0 of the returned vector is unused and holds 0.
pub fn catalan_table(max_r: usize) -> Vec<BigUint> {
    let mut nu = vec![BigUint::zero(); max_r.max(1) + 1];
    nu[1] = BigUint::one();
    for r in 2..=max_r {
        let mut acc = BigUint::zero();
        for j in 1..r {
            acc += &nu[j] * &nu[r - j];
        }
        nu[r] = acc;
    }
    nu
}

pub fn catalan(r: usize) -> BigUint {
    assert!(r >= 1, "Catalan index starts at 1");
    catalan_table(r).swap_remove(r)
}

/// Closed form `2^(r-1) (2r-3)!! / r!`.
pub fn catalan_closed(r: usize) -> BigUint {
    assert!(r >= 1, "Catalan index starts at 1");
    let double_fact: BigUint = (1..=(2 * r).saturating_sub(3)).step_by(2).map(BigUint::from).product();
    let num = (BigUint::one() << (r - 1)) * double_fact;
    let fact: BigUint = (1..=r).map(BigUint::from).product();
    num / fact
}

pub fn pow4(e: usize) -> BigUint {
    BigUint::one() << (2 * e)
}

/// Outcome of [`check_integer_sequences`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub mu_max_r: usize,
    pub catalan_max_r: usize,
    pub checked: usize,
    pub failures: Vec<String>,
}

/// Checks `mu_{0,s} = 1`, `mu_{r,s} = mu_{r-1,s}` for `s <= r` and
/// `mu_{r-1,r} <= 4^(r-1)` up to `mu_max_r`, and that the Catalan recursion
/// matches its closed form and stays below `4^(r-1)` up to `catalan_max_r`.
pub fn check_integer_sequences(mu_max_r: usize, catalan_max_r: usize) -> SequenceReport {
    let mut checked = 0;
    let mut failures = Vec::new();
    let mut check = |ok: bool, what: String| {
        checked += 1;
        if !ok {
            failures.push(what);
        }
    };
    let table = MuTable::new(mu_max_r, mu_max_r);
    let one = BigUint::one();
    for s in 1..=mu_max_r {
        check(table.get(0, s) == Some(&one), format!("mu_(0,{s}) != 1"));
    }
    for r in 1..=mu_max_r {
        for s in 0..=r {
            check(table.get(r, s) == table.get(r - 1, s), format!("mu_({r},{s}) != mu_({},{s})", r - 1));
        }
        check(table.get(r - 1, r).is_some_and(|v| *v <= pow4(r - 1)), format!("mu_({},{r}) > 4^{}", r - 1, r - 1));
    }
    let nu = catalan_table(catalan_max_r);
    for (r, v) in nu.iter().enumerate().skip(1) {
        check(*v == catalan_closed(r), format!("nu_{r} differs from the closed form"));
        check(*v <= pow4(r - 1), format!("nu_{r} > 4^{}", r - 1));
    }
    SequenceReport {
        mu_max_r,
        catalan_max_r,
        checked,
        failures,
    }
}
