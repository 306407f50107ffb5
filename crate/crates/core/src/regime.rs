//! Regime constants: set sizes, codimension ranges, vertex thresholds and
//! every density bound used by tiling, pruning and embedding.
//!
//! Three regimes exist: s = 3, s = 4 and general s ≥ 5. Each has its own
//! literal constants; nothing is interpolated between them.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cube::MAX_DIM;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    PaperExact,
    Engineering,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    Triangle,
    K4,
    General,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegimeError {
    #[error("refused: paper-exact mode needs {requirement} (got {got})")]
    Refused { requirement: String, got: String },
    #[error("invalid parameters: {0}")]
    Invalid(String),
}

/// The stamp carried by every engineering-mode report.
pub const ENGINEERING_STAMP: &str = "guarantees-void: engineering constants";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegimeParams {
    pub s: u8,
    pub n: u8,
    #[serde(rename = "N")]
    pub n_vertices: u64,
    pub mode: Mode,
    /// Size multipliers for levels 1..=s−2.
    pub multipliers: Vec<u64>,
    /// Largest extraction stage d for levels 1..=s−2.
    pub codim_max: Vec<u8>,
}

fn ceil_log2(n: u8) -> u8 {
    let mut k = 0;
    while (1u32 << k) < n as u32 {
        k += 1;
    }
    k
}

/// c = s^{15s}.
pub fn general_base(s: u8) -> BigUint {
    BigUint::from(s).pow(15 * s as u32)
}

fn check_shape(s: u8, n: u8) -> Result<(), RegimeError> {
    if s < 3 {
        return Err(RegimeError::Invalid(format!("s = {s} must be at least 3")));
    }
    if n == 0 || n > MAX_DIM {
        return Err(RegimeError::Invalid(format!("n = {n} outside 1..={MAX_DIM}")));
    }
    Ok(())
}

impl RegimeParams {
    /// Locks every constant to its published value and refuses undersized N.
    pub fn paper_exact(s: u8, n: u8, n_vertices: u64) -> Result<Self, RegimeError> {
        check_shape(s, n)?;
        let log_n = ceil_log2(n);
        let refuse = |requirement: &str, got: String| RegimeError::Refused {
            requirement: requirement.to_string(),
            got,
        };
        let (multipliers, codim_max) = match s {
            3 => {
                if n < 6 {
                    return Err(refuse("n ≥ 6", format!("n = {n}")));
                }
                let need = 7000u128 << n;
                if (n_vertices as u128) < need {
                    return Err(refuse("N ≥ 7000·2^n", format!("N = {n_vertices} < {need}")));
                }
                (vec![4], vec![log_n + 3])
            }
            4 => {
                if n < 32 {
                    return Err(refuse("n ≥ 32", format!("n = {n}")));
                }
                let need = BigUint::one() << (46 + n as usize);
                if BigUint::from(n_vertices) < need {
                    return Err(refuse("N ≥ 2^46·2^n", format!("N = {n_vertices} < {need}")));
                }
                (vec![1 << 18, 8], vec![log_n + 18, log_n + 3])
            }
            _ => {
                let c = general_base(s);
                let need = c.pow(s as u32) << n as usize;
                if BigUint::from(n_vertices) < need {
                    return Err(refuse(
                        "N ≥ c^s·2^n with c = s^{15s}",
                        format!("N = {n_vertices} < 2^{}", need.bits() - 1),
                    ));
                }
                // Unreachable for 64-bit N, kept for completeness.
                let mults = (1..=s - 2)
                    .map(|l| c.pow((s - l) as u32).to_u64().unwrap_or(u64::MAX))
                    .collect();
                let slogc = (s as f64 * 15.0 * s as f64 * (s as f64).log2()).ceil() as u64;
                let cm = (log_n as u64 + slogc).min(255) as u8;
                (mults, vec![cm; s as usize - 2])
            }
        };
        Ok(RegimeParams {
            s,
            n,
            n_vertices,
            mode: Mode::PaperExact,
            multipliers,
            codim_max,
        })
    }

    /// Free constants; all guarantees become runtime checks.
    pub fn engineering(
        s: u8,
        n: u8,
        n_vertices: u64,
        multipliers: Vec<u64>,
        codim_max: Vec<u8>,
    ) -> Result<Self, RegimeError> {
        check_shape(s, n)?;
        let levels = s as usize - 2;
        if multipliers.len() != levels || codim_max.len() != levels {
            return Err(RegimeError::Invalid(format!(
                "need {levels} multipliers and codim limits, got {} and {}",
                multipliers.len(),
                codim_max.len()
            )));
        }
        if multipliers.contains(&0) {
            return Err(RegimeError::Invalid("multipliers must be positive".into()));
        }
        Ok(RegimeParams {
            s,
            n,
            n_vertices,
            mode: Mode::Engineering,
            multipliers,
            codim_max,
        })
    }

    /// Engineering parameters carrying the published multipliers and codim
    /// ranges of the regime (only the N threshold is waived).
    pub fn engineering_default(s: u8, n: u8, n_vertices: u64) -> Result<Self, RegimeError> {
        check_shape(s, n)?;
        let log_n = ceil_log2(n);
        let (m, c) = match s {
            3 => (vec![4], vec![log_n + 3]),
            4 => (vec![1 << 18, 8], vec![log_n + 18, log_n + 3]),
            _ => (vec![1; s as usize - 2], vec![n; s as usize - 2]),
        };
        Self::engineering(s, n, n_vertices, m, c)
    }

    pub fn regime(&self) -> Regime {
        match self.s {
            3 => Regime::Triangle,
            4 => Regime::K4,
            _ => Regime::General,
        }
    }

    pub fn stamp(&self) -> Option<&'static str> {
        (self.mode == Mode::Engineering).then_some(ENGINEERING_STAMP)
    }

    /// Deepest level, s − 2.
    pub fn top_level(&self) -> u8 {
        self.s - 2
    }

    pub fn multiplier(&self, level: u8) -> u64 {
        self.multipliers[level as usize - 1]
    }

    pub fn codim_max(&self, level: u8) -> u8 {
        self.codim_max[level as usize - 1]
    }

    /// Required size multiplier·2^(n−codim) of a non-exceptional set, or
    /// `None` when it is not an integer or overflows.
    pub fn set_size(&self, level: u8, codim: u32) -> Option<u64> {
        if codim > self.n as u32 {
            return None;
        }
        self.multiplier(level).checked_mul(1u64 << (self.n as u32 - codim))
    }

    /// Base constant c of the general regime; absent for s = 3, 4.
    pub fn base_constant(&self) -> Option<BigUint> {
        (self.regime() == Regime::General).then(|| general_base(self.s))
    }

    /// Denominator D of the properness threshold 1/D between sets of levels
    /// ℓ and ℓ′ with dominating parameter δ. Saturates at u128::MAX.
    pub fn density_denominator(&self, l: u8, l2: u8, delta: u8) -> u128 {
        let delta = delta.max(1) as u128;
        let s = self.s as u128;
        match self.regime() {
            Regime::Triangle => 16 * delta * delta,
            Regime::K4 => sat_pow(8 * delta, 6u32.saturating_sub(l as u32 + l2 as u32)),
            Regime::General => sat_pow(4 * s * s * delta, (2 * s as u32).saturating_sub(l as u32 + l2 as u32)),
        }
    }

    /// Strict ("good") test: blue < |A||B|/D.
    pub fn is_good(&self, blue: u64, a: usize, b: usize, l: u8, l2: u8, delta: u8) -> bool {
        let d = self.density_denominator(l, l2, delta);
        (blue as u128).saturating_mul(d) < (a as u128) * (b as u128)
    }

    /// Properness test: blue ≤ |A||B|/D.
    pub fn is_proper_count(&self, blue: u64, a: usize, b: usize, l: u8, l2: u8, delta: u8) -> bool {
        let d = self.density_denominator(l, l2, delta);
        (blue as u128).saturating_mul(d) <= (a as u128) * (b as u128)
    }

    /// Denominator of the pruning cut: remove v when deg·den ≥ |S_A|.
    pub fn prune_cut_denominator(&self, delta: u8) -> u128 {
        let delta = delta.max(1) as u128;
        let s = self.s as u128;
        match self.regime() {
            Regime::Triangle | Regime::K4 => 8 * delta,
            Regime::General => 4 * s * s * delta,
        }
    }

    /// Denominator of the certified max-degree bound: deg·den < |T_{C′}|.
    pub fn degree_bound_denominator(&self, delta: u8) -> u128 {
        let delta = delta.max(1) as u128;
        let s = self.s as u128;
        match self.regime() {
            Regime::Triangle | Regime::K4 => 4 * delta,
            Regime::General => 2 * s * s * delta,
        }
    }

    /// Denominator for the internal blue-degree bound 2^(n−d)/den of a
    /// deepest-level set.
    pub fn internal_degree_denominator(&self) -> u64 {
        match self.regime() {
            Regime::Triangle => 2 * self.n as u64,
            _ => self.n as u64,
        }
    }

    /// Embedding audit limits as (numerator, denominator) fractions:
    /// external of |T_C| and internal of 2^(n−d).
    pub fn embed_external_fraction(&self) -> (u64, u64) {
        match self.regime() {
            Regime::Triangle => (1, 4),
            _ => (1, 2),
        }
    }

    pub fn embed_internal_fraction(&self) -> (u64, u64) {
        match self.regime() {
            Regime::Triangle => (1, 2),
            _ => (1, 1),
        }
    }
}

fn sat_pow(base: u128, e: u32) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..e {
        acc = acc.saturating_mul(base);
    }
    acc
}
