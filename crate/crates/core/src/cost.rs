//! Sampling-overhead cost model.
//!
//! Individual cut prices (multiplicative sampling overhead γ² per cut):
//!
//! | cut            | CC + ancilla          | no CC, no ancilla      |
//! |----------------|-----------------------|------------------------|
//! | wire (single)  | 9                     | 16                     |
//! | CNOT / CZ      | 9                     | 9                      |
//! | SWAP           | 16                    | 49                     |
//! | CR(θ)          | min(4, (1+2\|sin θ\|)²) | (1+2\|sin θ\|)²       |
//!
//! A single wire cut reaches 9 with classical communication alone (no
//! ancilla needed). `k` wire/CNOT/CZ cuts realized together through shared
//! Bell pairs cost `(2^{k+1}-1)²` in total.
//!
//! Encoders work in a base-10 logarithmic fixed-point domain scaled by
//! [`FP_SCALE`]. Cut prices round up and budgets round down, so a model that
//! fits the fixed-point budget also fits the real one.

use thiserror::Error;

use crate::circuit::GateKind;

pub const FP_SCALE: f64 = 1_000_000.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error("no known quasiprobability decomposition for '{0}'")]
    Unpriced(String),
    #[error("{0} cuts cannot join a simultaneous Bell-pair group")]
    IneligibleGroupMember(String),
    #[error("simultaneous cuts need classical communication and ancilla qubits")]
    GroupingUnavailable,
    #[error("invalid budget: {0}")]
    InvalidBudget(String),
}

/// What the partitions may use to realize cuts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Resources {
    pub classical_communication: bool,
    pub ancilla: bool,
}

impl Resources {
    pub const FULL: Resources = Resources {
        classical_communication: true,
        ancilla: true,
    };
    pub const NONE: Resources = Resources {
        classical_communication: false,
        ancilla: false,
    };

    pub fn new(classical_communication: bool, ancilla: bool) -> Self {
        Resources {
            classical_communication,
            ancilla,
        }
    }

    /// Simultaneous Bell-pair groups need both CC and ancillas.
    pub fn allows_grouping(self) -> bool {
        self.classical_communication && self.ancilla
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CutKind {
    Wire,
    GateCnot,
    GateCz,
    GateSwap,
    /// Controlled rotation priced with interaction angle θ.
    GateCr(f64),
}

impl CutKind {
    /// Cut kind for cutting a two-qubit gate.
    ///
    /// `CRZ(φ)` is locally equivalent to `exp(i φ/4 Z⊗Z)`; its cost
    /// `(1+2|sin(φ/2)|)²` corresponds to `GateCr(φ/2)`, so `CRZ(π)` (a CZ up
    /// to local phases) prices like CZ.
    pub fn for_gate(kind: GateKind) -> Result<CutKind, CostError> {
        match kind {
            GateKind::Cnot => Ok(CutKind::GateCnot),
            GateKind::Cz => Ok(CutKind::GateCz),
            GateKind::Swap => Ok(CutKind::GateSwap),
            GateKind::Crz(phi) => Ok(CutKind::GateCr(phi / 2.0)),
            other => Err(CostError::Unpriced(other.to_string())),
        }
    }

    pub fn name(self) -> String {
        match self {
            CutKind::Wire => "wire".into(),
            CutKind::GateCnot => "cnot".into(),
            CutKind::GateCz => "cz".into(),
            CutKind::GateSwap => "swap".into(),
            CutKind::GateCr(t) => format!("cr({t})"),
        }
    }

    /// Wire, CNOT and CZ cuts can share a Bell-pair group.
    pub fn bell_group_eligible(self) -> bool {
        matches!(self, CutKind::Wire | CutKind::GateCnot | CutKind::GateCz)
    }
}

/// Simultaneous-cut cost classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupClass {
    BellGroup,
    Swap,
    Cr,
}

/// Individual γ² for one cut of `kind` under `resources`.
pub fn gamma_sq(kind: CutKind, resources: Resources) -> f64 {
    let cc = resources.classical_communication;
    match kind {
        CutKind::Wire => {
            if cc {
                9.0
            } else {
                16.0
            }
        }
        CutKind::GateCnot | CutKind::GateCz => 9.0,
        CutKind::GateSwap => {
            if resources.allows_grouping() {
                16.0
            } else {
                49.0
            }
        }
        CutKind::GateCr(theta) => {
            let no_cc = (1.0 + 2.0 * theta.sin().abs()).powi(2);
            if resources.allows_grouping() {
                no_cc.min(4.0)
            } else {
                no_cc
            }
        }
    }
}

/// Total cost of `k` simultaneous cuts of one class; 1 for `k = 0`.
pub fn group_cost(k: u32, class: GroupClass) -> f64 {
    match class {
        GroupClass::BellGroup => {
            let base = 2f64.powi(k as i32 + 1) - 1.0;
            base * base
        }
        GroupClass::Swap => 16f64.powi(k as i32),
        GroupClass::Cr => 4f64.powi(k as i32),
    }
}

/// Whether the CR price under `resources` is an upper bound rather than a tight minimum.
pub fn is_bound_only(kind: CutKind, resources: Resources) -> bool {
    matches!(kind, CutKind::GateCr(t) if resources.allows_grouping() && (1.0 + 2.0 * t.sin().abs()).powi(2) > 4.0)
}

/// `ceil(log10(x) * FP_SCALE)`; used for cut prices.
pub fn log_fp_ceil(x: f64) -> i64 {
    (x.log10() * FP_SCALE).ceil() as i64
}

/// `floor(log10(x) * FP_SCALE)`; used for budgets.
pub fn log_fp_floor(x: f64) -> i64 {
    (x.log10() * FP_SCALE).floor() as i64
}

/// A cut as it appears in a solution: its kind and whether it joined the simultaneous group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricedCut {
    pub kind: CutKind,
    pub grouped: bool,
}

/// Sampling overhead `S`: the product of individual γ² over ungrouped cuts
/// times the Bell-group cost for the grouped ones.
pub fn solution_overhead(cuts: &[PricedCut], resources: Resources) -> Result<f64, CostError> {
    let mut grouped = 0u32;
    let mut s = 1.0;
    for cut in cuts {
        if cut.grouped {
            if !cut.kind.bell_group_eligible() {
                return Err(CostError::IneligibleGroupMember(cut.kind.name()));
            }
            if !resources.allows_grouping() {
                return Err(CostError::GroupingUnavailable);
            }
            grouped += 1;
        } else {
            s *= gamma_sq(cut.kind, resources);
        }
    }
    Ok(s * group_cost(grouped, GroupClass::BellGroup))
}

/// Fixed-point counterpart of [`solution_overhead`], summing the same rounded terms the encoder uses.
pub fn solution_overhead_fp(cuts: &[PricedCut], resources: Resources) -> Result<i64, CostError> {
    let mut grouped = 0u32;
    let mut total = 0i64;
    for cut in cuts {
        if cut.grouped {
            if !cut.kind.bell_group_eligible() {
                return Err(CostError::IneligibleGroupMember(cut.kind.name()));
            }
            if !resources.allows_grouping() {
                return Err(CostError::GroupingUnavailable);
            }
            grouped += 1;
        } else {
            total += log_fp_ceil(gamma_sq(cut.kind, resources));
        }
    }
    Ok(total + log_fp_ceil(group_cost(grouped, GroupClass::BellGroup)))
}

/// Quantum computing budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Budget {
    /// Shots the uncut circuit needs.
    pub base_shots: f64,
    pub max_total_samples: f64,
}

pub const DEFAULT_BASE_SHOTS: f64 = 8000.0;
pub const SECONDS_PER_DAY: f64 = 86_400.0;

impl Budget {
    pub fn from_rate(frequency_hz: f64, runtime_s: f64, base_shots: f64) -> Result<Self, CostError> {
        if !(frequency_hz > 0.0 && runtime_s > 0.0) {
            return Err(CostError::InvalidBudget(format!(
                "frequency {frequency_hz} Hz and runtime {runtime_s} s must be positive"
            )));
        }
        Budget::from_total(frequency_hz * runtime_s, base_shots)
    }

    pub fn from_total(max_total_samples: f64, base_shots: f64) -> Result<Self, CostError> {
        if !(max_total_samples > 0.0 && base_shots > 0.0)
            || !max_total_samples.is_finite()
            || !base_shots.is_finite()
        {
            return Err(CostError::InvalidBudget(format!(
                "total samples {max_total_samples} and base shots {base_shots} must be positive"
            )));
        }
        Ok(Budget {
            base_shots,
            max_total_samples,
        })
    }

    /// One day at 1 MHz with 8000 base shots.
    pub fn default_day_at_mhz() -> Self {
        Budget::from_rate(1e6, SECONDS_PER_DAY, DEFAULT_BASE_SHOTS).expect("constants are positive")
    }

    /// Largest admissible sampling overhead.
    pub fn max_overhead(&self) -> f64 {
        self.max_total_samples / self.base_shots
    }

    pub fn max_overhead_fp(&self) -> i64 {
        log_fp_floor(self.max_overhead())
    }
}

/// Per-cut overhead families from the budget comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    /// `(2^{k+1}-1)²`
    BellGroup,
    /// `9^k`
    NinePow,
    /// `16^k`
    SixteenPow,
}

impl Family {
    pub fn cost(self, k: u32) -> f64 {
        match self {
            Family::BellGroup => group_cost(k, GroupClass::BellGroup),
            Family::NinePow => 9f64.powi(k as i32),
            Family::SixteenPow => 16f64.powi(k as i32),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Family::BellGroup => "bell_group",
            Family::NinePow => "nine_pow",
            Family::SixteenPow => "sixteen_pow",
        }
    }

    pub fn parse(s: &str) -> Option<Family> {
        match s.to_ascii_lowercase().as_str() {
            "bell_group" | "bell" | "group" => Some(Family::BellGroup),
            "nine_pow" | "nine" | "9" => Some(Family::NinePow),
            "sixteen_pow" | "sixteen" | "16" => Some(Family::SixteenPow),
            _ => None,
        }
    }
}

/// Largest `k` with `base_shots * family.cost(k) <= max_total_samples`, or `None`
/// if not even the uncut circuit fits.
pub fn max_cuts_within_budget(budget: &Budget, family: Family) -> Option<u32> {
    if budget.base_shots > budget.max_total_samples {
        return None;
    }
    let mut k = 0;
    while budget.base_shots * family.cost(k + 1) <= budget.max_total_samples {
        k += 1;
    }
    Some(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn individual_prices() {
        assert_eq!(gamma_sq(CutKind::GateCnot, Resources::NONE), 9.0);
        assert_eq!(gamma_sq(CutKind::Wire, Resources::new(true, false)), 9.0);
        assert_eq!(gamma_sq(CutKind::Wire, Resources::NONE), 16.0);
        assert_eq!(gamma_sq(CutKind::GateSwap, Resources::NONE), 49.0);
        assert_eq!(gamma_sq(CutKind::GateSwap, Resources::FULL), 16.0);
        assert_eq!(gamma_sq(CutKind::GateCr(FRAC_PI_2), Resources::NONE), 9.0);
        assert_eq!(gamma_sq(CutKind::GateCr(FRAC_PI_2), Resources::FULL), 4.0);
        let small = 0.1f64;
        let expect = (1.0 + 2.0 * small.sin()).powi(2);
        assert_eq!(gamma_sq(CutKind::GateCr(small), Resources::FULL), expect);
    }

    #[test]
    fn crz_maps_to_half_angle() {
        let k = CutKind::for_gate(GateKind::Crz(std::f64::consts::PI)).unwrap();
        assert!((gamma_sq(k, Resources::NONE) - 9.0).abs() < 1e-12);
        assert!(matches!(CutKind::for_gate(GateKind::H), Err(CostError::Unpriced(_))));
    }

    #[test]
    fn group_costs() {
        assert_eq!(group_cost(2, GroupClass::BellGroup), 49.0);
        assert_eq!(group_cost(1, GroupClass::BellGroup), 9.0);
        for class in [GroupClass::BellGroup, GroupClass::Swap, GroupClass::Cr] {
            assert_eq!(group_cost(0, class), 1.0);
        }
        assert_eq!(group_cost(3, GroupClass::Swap), 4096.0);
        assert_eq!(group_cost(3, GroupClass::Cr), 64.0);
    }

    #[test]
    fn overhead_examples() {
        let cnot = |grouped| PricedCut {
            kind: CutKind::GateCnot,
            grouped,
        };
        assert_eq!(solution_overhead(&[cnot(false), cnot(false)], Resources::NONE).unwrap(), 81.0);
        assert_eq!(solution_overhead(&[cnot(true), cnot(true)], Resources::FULL).unwrap(), 49.0);
        assert_eq!(solution_overhead(&[], Resources::FULL).unwrap(), 1.0);
        let swap = PricedCut {
            kind: CutKind::GateSwap,
            grouped: true,
        };
        assert!(matches!(
            solution_overhead(&[swap], Resources::FULL),
            Err(CostError::IneligibleGroupMember(_))
        ));
        assert_eq!(
            solution_overhead(&[cnot(true)], Resources::NONE),
            Err(CostError::GroupingUnavailable)
        );
    }

    #[test]
    fn fixed_point_is_conservative() {
        assert_eq!(log_fp_ceil(1.0), 0);
        assert_eq!(log_fp_ceil(9.0), 954_243);
        assert_eq!(log_fp_floor(9.0), 954_242);
        let b = Budget::default_day_at_mhz();
        assert!((b.max_overhead() - 1.08e7).abs() < 1e-6);
    }

    #[test]
    fn budget_table() {
        let day = |hz| Budget::from_rate(hz, SECONDS_PER_DAY, DEFAULT_BASE_SHOTS).unwrap();
        let expect = [
            (Family::BellGroup, [5, 10, 15]),
            (Family::NinePow, [4, 7, 10]),
            (Family::SixteenPow, [3, 5, 8]),
        ];
        for (family, counts) in expect {
            for (hz, k) in [1e3, 1e6, 1e9].into_iter().zip(counts) {
                assert_eq!(max_cuts_within_budget(&day(hz), family), Some(k), "{family:?} at {hz}");
            }
        }
        let tiny = Budget::from_total(100.0, 8000.0).unwrap();
        assert_eq!(max_cuts_within_budget(&tiny, Family::NinePow), None);
        assert!(Budget::from_rate(0.0, 1.0, 1.0).is_err());
    }
}
