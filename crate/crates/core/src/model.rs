//! Domain types shared by the solvers: divergence kinds, RMDP instances,
//! projection queries/results, value vectors and policies.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|sum(row) - 1|` accepted for simplex rows on input.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// The φ-divergences supported by the projection solvers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DivergenceKind {
    #[serde(rename = "kl")]
    Kl,
    #[serde(rename = "burg")]
    Burg,
    #[serde(rename = "variation")]
    Variation,
    #[serde(rename = "chi2")]
    ChiSquared,
}

impl DivergenceKind {
    pub const ALL: [DivergenceKind; 4] = [
        DivergenceKind::Kl,
        DivergenceKind::Burg,
        DivergenceKind::Variation,
        DivergenceKind::ChiSquared,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            DivergenceKind::Kl => "kl",
            DivergenceKind::Burg => "burg",
            DivergenceKind::Variation => "variation",
            DivergenceKind::ChiSquared => "chi2",
        }
    }

    /// Whether next states with zero nominal probability are removed from the
    /// projection's index set. KL and χ² force `p = 0` there.
    pub fn drops_zero_nominal(self) -> bool {
        matches!(self, DivergenceKind::Kl | DivergenceKind::ChiSquared)
    }

    /// Whether the projection is solved exactly (`lower == upper`).
    pub fn is_exact(self) -> bool {
        matches!(self, DivergenceKind::Variation | DivergenceKind::ChiSquared)
    }
}

impl fmt::Display for DivergenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DivergenceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kl" => Ok(DivergenceKind::Kl),
            "burg" => Ok(DivergenceKind::Burg),
            "variation" | "tv" | "l1" => Ok(DivergenceKind::Variation),
            "chi2" | "chisquared" | "chi-squared" => Ok(DivergenceKind::ChiSquared),
            other => Err(Error::InvalidArgument(format!(
                "unknown divergence '{other}' (expected kl, burg, variation or chi2)"
            ))),
        }
    }
}

/// One failed instance invariant, naming the offending field and index.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    States,
    Actions,
    Shape { field: &'static str, expected: usize, found: usize },
    NonFinite { field: &'static str, index: usize },
    NegativeReward { s: usize, a: usize, next: usize },
    NegativeProbability { s: usize, a: usize, next: usize },
    RowSum { s: usize, a: usize, sum: f64 },
    Discount(f64),
    Budget(f64),
    InitialDistribution { index: Option<usize>, sum: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::States => write!(f, "states: must be a positive integer"),
            Violation::Actions => write!(f, "actions: must be a positive integer"),
            Violation::Shape { field, expected, found } => {
                write!(f, "{field}: expected {expected} entries, found {found}")
            }
            Violation::NonFinite { field, index } => write!(f, "{field}[{index}]: not finite"),
            Violation::NegativeReward { s, a, next } => {
                write!(f, "rewards[{s},{a},{next}]: negative reward")
            }
            Violation::NegativeProbability { s, a, next } => {
                write!(f, "nominal[{s},{a},{next}]: negative probability")
            }
            Violation::RowSum { s, a, sum } => {
                write!(f, "nominal[{s},{a},:]: row sums to {sum} (row-sum violation)")
            }
            Violation::Discount(d) => write!(f, "discount: {d} outside (0,1)"),
            Violation::Budget(k) => write!(f, "kappa: {k} is negative or not finite"),
            Violation::InitialDistribution { index: Some(i), .. } => {
                write!(f, "initial_dist[{i}]: negative or not finite")
            }
            Violation::InitialDistribution { index: None, sum } => {
                write!(f, "initial_dist: sums to {sum}")
            }
        }
    }
}

/// Plain data of an RMDP, exactly as stored in an instance document.
///
/// Tensors are flat with index order `s`-major, then `a`, then `s'`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceData {
    pub states: usize,
    pub actions: usize,
    pub discount: f64,
    pub kappa: f64,
    pub divergence: DivergenceKind,
    pub rewards: Vec<f64>,
    pub nominal: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_dist: Option<Vec<f64>>,
}

/// Checks every instance invariant. An empty list means the data is valid.
pub fn validate(data: &InstanceData) -> Vec<Violation> {
    let mut out = Vec::new();
    let (ns, na) = (data.states, data.actions);
    if ns == 0 {
        out.push(Violation::States);
    }
    if na == 0 {
        out.push(Violation::Actions);
    }
    if !(data.discount > 0.0 && data.discount < 1.0) {
        out.push(Violation::Discount(data.discount));
    }
    if !(data.kappa >= 0.0 && data.kappa.is_finite()) {
        out.push(Violation::Budget(data.kappa));
    }

    let expected = ns * na * ns;
    let mut shapes_ok = true;
    for (field, v) in [("rewards", &data.rewards), ("nominal", &data.nominal)] {
        if v.len() != expected {
            out.push(Violation::Shape { field, expected, found: v.len() });
            shapes_ok = false;
        }
    }

    if shapes_ok && ns > 0 {
        for (i, &r) in data.rewards.iter().enumerate() {
            if !r.is_finite() {
                out.push(Violation::NonFinite { field: "rewards", index: i });
            } else if r < 0.0 {
                let (s, a, next) = unflatten(i, na, ns);
                out.push(Violation::NegativeReward { s, a, next });
            }
        }
        for (row_idx, row) in data.nominal.chunks(ns).enumerate() {
            let (s, a) = (row_idx / na, row_idx % na);
            let mut row_ok = true;
            for (next, &p) in row.iter().enumerate() {
                if !p.is_finite() {
                    out.push(Violation::NonFinite { field: "nominal", index: row_idx * ns + next });
                    row_ok = false;
                } else if p < 0.0 {
                    out.push(Violation::NegativeProbability { s, a, next });
                    row_ok = false;
                }
            }
            let sum: f64 = row.iter().sum();
            if row_ok && (sum - 1.0).abs() > SIMPLEX_TOL {
                out.push(Violation::RowSum { s, a, sum });
            }
        }
    }

    if let Some(p0) = &data.initial_dist {
        if p0.len() != ns {
            out.push(Violation::Shape { field: "initial_dist", expected: ns, found: p0.len() });
        } else {
            let mut ok = true;
            for (i, &p) in p0.iter().enumerate() {
                if !(p.is_finite() && p >= 0.0) {
                    out.push(Violation::InitialDistribution { index: Some(i), sum: f64::NAN });
                    ok = false;
                }
            }
            let sum: f64 = p0.iter().sum();
            if ok && (sum - 1.0).abs() > SIMPLEX_TOL {
                out.push(Violation::InitialDistribution { index: None, sum });
            }
        }
    }
    out
}

fn unflatten(i: usize, na: usize, ns: usize) -> (usize, usize, usize) {
    (i / (na * ns), (i / ns) % na, i % ns)
}

/// Divides by the row sum unless the sum is already 1 up to summation
/// rounding; skipping those rows makes loading idempotent.
fn renormalize(row: &mut [f64]) {
    let sum: f64 = row.iter().sum();
    if sum > 0.0 && (sum - 1.0).abs() > row.len() as f64 * f64::EPSILON {
        row.iter_mut().for_each(|p| *p /= sum);
    }
}

/// A validated s-rectangular RMDP. Nominal rows are renormalized on
/// construction so every row lies exactly (to rounding) on the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct MdpInstance {
    data: InstanceData,
}

impl TryFrom<InstanceData> for MdpInstance {
    type Error = Error;

    fn try_from(mut data: InstanceData) -> Result<Self> {
        let violations = validate(&data);
        if !violations.is_empty() {
            return Err(Error::Validation(violations));
        }
        let ns = data.states;
        data.nominal.chunks_mut(ns).for_each(renormalize);
        if let Some(p0) = data.initial_dist.as_mut() {
            renormalize(p0);
        }
        Ok(MdpInstance { data })
    }
}

impl MdpInstance {
    pub fn new(data: InstanceData) -> Result<Self> {
        Self::try_from(data)
    }

    pub fn data(&self) -> &InstanceData {
        &self.data
    }

    pub fn into_data(self) -> InstanceData {
        self.data
    }

    pub fn states(&self) -> usize {
        self.data.states
    }

    pub fn actions(&self) -> usize {
        self.data.actions
    }

    pub fn discount(&self) -> f64 {
        self.data.discount
    }

    pub fn kappa(&self) -> f64 {
        self.data.kappa
    }

    pub fn kind(&self) -> DivergenceKind {
        self.data.divergence
    }

    pub fn initial_dist(&self) -> Option<&[f64]> {
        self.data.initial_dist.as_deref()
    }

    fn row_range(&self, s: usize, a: usize) -> std::ops::Range<usize> {
        let ns = self.data.states;
        let start = (s * self.data.actions + a) * ns;
        start..start + ns
    }

    /// `r[s, a, :]`
    pub fn rewards(&self, s: usize, a: usize) -> &[f64] {
        &self.data.rewards[self.row_range(s, a)]
    }

    /// `p̄[s, a, :]`
    pub fn nominal(&self, s: usize, a: usize) -> &[f64] {
        &self.data.nominal[self.row_range(s, a)]
    }

    /// Same instance with a different uncertainty budget.
    pub fn with_kappa(&self, kappa: f64) -> Result<Self> {
        let mut data = self.data.clone();
        data.kappa = kappa;
        Self::try_from(data)
    }

    /// Same instance with a different divergence kind.
    pub fn with_kind(&self, kind: DivergenceKind) -> Self {
        let mut data = self.data.clone();
        data.divergence = kind;
        MdpInstance { data }
    }

    /// Largest reward in the instance.
    pub fn max_reward(&self) -> f64 {
        self.data.rewards.iter().copied().fold(0.0, f64::max)
    }

    /// `R̄ = max r / (1 - λ)`, an upper bound on every Bellman value reachable
    /// from value estimates in `[0, R̄]`.
    pub fn value_upper_bound(&self) -> f64 {
        self.max_reward() / (1.0 - self.data.discount)
    }

    /// `b = r[s,a,:] + λ v`
    pub fn backup_costs(&self, s: usize, a: usize, v: &[f64]) -> Vec<f64> {
        let lambda = self.data.discount;
        self.rewards(s, a).iter().zip(v).map(|(r, vn)| r + lambda * vn).collect()
    }
}

/// Input of the generalized projection
/// `min d(p, p̄)  s.t.  bᵀp ≤ β,  p ∈ Δ_S`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionQuery {
    pub nominal: Vec<f64>,
    pub cost: Vec<f64>,
    pub threshold: f64,
    /// Requested width of the value interval. Exact solvers ignore it.
    pub accuracy: f64,
}

impl ProjectionQuery {
    pub fn new(nominal: Vec<f64>, cost: Vec<f64>, threshold: f64, accuracy: f64) -> Result<Self> {
        let q = ProjectionQuery { nominal, cost, threshold, accuracy };
        q.check()?;
        Ok(q)
    }

    pub fn check(&self) -> Result<()> {
        if self.nominal.is_empty() || self.nominal.len() != self.cost.len() {
            return Err(Error::InvalidArgument(format!(
                "nominal and cost must be non-empty with equal lengths (got {} and {})",
                self.nominal.len(),
                self.cost.len()
            )));
        }
        if self.nominal.iter().any(|&p| !(p.is_finite() && p >= 0.0)) {
            return Err(Error::InvalidArgument("nominal has negative or non-finite entries".into()));
        }
        let sum: f64 = self.nominal.iter().sum();
        if (sum - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::InvalidArgument(format!("nominal sums to {sum}, not 1")));
        }
        if self.cost.iter().any(|&b| !(b.is_finite() && b >= 0.0)) {
            return Err(Error::InvalidArgument("cost has negative or non-finite entries".into()));
        }
        if !(self.threshold.is_finite() && self.threshold >= 0.0) {
            return Err(Error::InvalidArgument(format!("threshold {} must be >= 0", self.threshold)));
        }
        if !(self.accuracy > 0.0) {
            return Err(Error::InvalidArgument(format!("accuracy {} must be > 0", self.accuracy)));
        }
        Ok(())
    }

    /// `p̄ᵀb`
    pub fn nominal_cost(&self) -> f64 {
        dot(&self.nominal, &self.cost)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionStatus {
    Solved,
    /// `β ≥ p̄ᵀb`: the nominal distribution is feasible, value 0.
    Trivial,
    /// `β < min b`: no distribution satisfies the constraint, value +∞.
    Infeasible,
}

/// Bisection bookkeeping of the KL and Burg solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BisectionTrace {
    pub iterations: usize,
    pub initial_width: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Certified bracket `[lower, upper]` around the projection value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectionResult {
    pub lower: f64,
    pub upper: f64,
    /// Optimal multiplier of the constraint `bᵀp ≤ β`, when finite.
    pub alpha: Option<f64>,
    /// Multiplier of `Σp = 1` paired with `alpha`.
    pub zeta: Option<f64>,
    pub status: ProjectionStatus,
    pub trace: Option<BisectionTrace>,
}

impl ProjectionResult {
    pub fn trivial() -> Self {
        ProjectionResult {
            lower: 0.0,
            upper: 0.0,
            alpha: Some(0.0),
            zeta: Some(0.0),
            status: ProjectionStatus::Trivial,
            trace: None,
        }
    }

    pub fn infeasible() -> Self {
        ProjectionResult {
            lower: f64::INFINITY,
            upper: f64::INFINITY,
            alpha: None,
            zeta: None,
            status: ProjectionStatus::Infeasible,
            trace: None,
        }
    }

    pub fn width(&self) -> f64 {
        if self.lower.is_infinite() && self.upper.is_infinite() {
            0.0
        } else {
            self.upper - self.lower
        }
    }

    /// Midpoint of the bracket (or the common infinite value).
    pub fn value(&self) -> f64 {
        if self.upper.is_infinite() {
            self.upper
        } else {
            0.5 * (self.lower + self.upper)
        }
    }

    pub fn iterations(&self) -> usize {
        self.trace.map_or(0, |t| t.iterations)
    }
}

/// Value-to-go per state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueVector(pub Vec<f64>);

impl ValueVector {
    pub fn zeros(n: usize) -> Self {
        ValueVector(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `‖self - other‖_∞`
    pub fn max_abs_diff(&self, other: &ValueVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

impl std::ops::Deref for ValueVector {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// Randomized stationary policy, one distribution over actions per state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Policy {
    pub states: usize,
    pub actions: usize,
    /// Row-major `S × A`.
    pub probabilities: Vec<f64>,
}

impl Policy {
    pub fn deterministic(actions: usize, choice: &[usize]) -> Self {
        let mut probabilities = vec![0.0; choice.len() * actions];
        for (s, &a) in choice.iter().enumerate() {
            probabilities[s * actions + a] = 1.0;
        }
        Policy { states: choice.len(), actions, probabilities }
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.probabilities[s * self.actions..(s + 1) * self.actions]
    }

    pub fn is_deterministic(&self) -> bool {
        self.probabilities.iter().all(|&p| p == 0.0 || p == 1.0)
    }

    pub fn check(&self) -> Result<()> {
        if self.probabilities.len() != self.states * self.actions {
            return Err(Error::InvalidArgument("policy shape mismatch".into()));
        }
        for s in 0..self.states {
            let row = self.row(s);
            let sum: f64 = row.iter().sum();
            if row.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!("policy row {s} is not a distribution")));
            }
        }
        Ok(())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
