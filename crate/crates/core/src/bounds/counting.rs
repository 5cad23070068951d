//! Pole-pattern and ξ-function counts, each with an independent oracle.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::BoundsError;

/// `(1 + 2k)^n`, exact.
pub fn pole_free_count(n: u64, k: u64) -> Result<u128, BoundsError> {
    if n == 0 || k == 0 {
        return Err(BoundsError::InvalidArgument {
            field: if n == 0 { "n" } else { "k" },
            reason: "must be at least 1".into(),
        });
    }
    let base = 1u128
        .checked_add(2u128 * k as u128)
        .ok_or(BoundsError::Overflow("pole_free_count"))?;
    let exp = u32::try_from(n).map_err(|_| BoundsError::Overflow("pole_free_count"))?;
    base.checked_pow(exp).ok_or(BoundsError::Overflow("pole_free_count"))
}

/// `Σ_{γ=0}^{n} C(n, γ)(2k)^γ`.
pub fn pole_free_count_binomial(n: u64, k: u64) -> Result<u128, BoundsError> {
    let mut total: u128 = 0;
    let mut binom: u128 = 1;
    for g in 0..=n as u128 {
        if let Some(prev) = g.checked_sub(1) {
            binom = binom
                .checked_mul(n as u128 - prev)
                .ok_or(BoundsError::Overflow("pole_free_count_binomial"))?
                / g;
        }
        let term = (2 * k as u128)
            .checked_pow(g as u32)
            .and_then(|p| p.checked_mul(binom))
            .ok_or(BoundsError::Overflow("pole_free_count_binomial"))?;
        total = total
            .checked_add(term)
            .ok_or(BoundsError::Overflow("pole_free_count_binomial"))?;
    }
    Ok(total)
}

/// Counts distinct zero patterns of the `2nk` pole polynomials
/// `(a_r + α_j)² + (b_r ± β_j)²` by explicit evaluation.
///
/// Basis exponents are fixed generic values (distinct `α_j`, distinct
/// nonzero `β_j`), so each eigenvalue row can sit on at most one pole.
/// Every row ranges over the `2k` pole locations plus one pole-free point;
/// the result is the number of distinct joint zero patterns observed.
pub fn pole_free_count_enumerate(n: usize, k: usize) -> usize {
    let alpha: Vec<f64> = (0..k).map(|j| 0.5 + j as f64).collect();
    let beta: Vec<f64> = (0..k).map(|j| 1.25 + 0.75 * j as f64).collect();
    let mut candidates: Vec<(f64, f64)> = vec![(3.7, -9.1)];
    for j in 0..k {
        candidates.push((-alpha[j], beta[j]));
        candidates.push((-alpha[j], -beta[j]));
    }
    let c = candidates.len();
    let total = c.pow(n as u32);
    let mut seen: HashSet<Vec<bool>> = HashSet::new();
    let mut idx = vec![0usize; n];
    for _ in 0..total {
        let mut pattern = Vec::with_capacity(2 * n * k);
        for &ci in &idx {
            let (a, b) = candidates[ci];
            for j in 0..k {
                let plus = (a + alpha[j]).powi(2) + (b + beta[j]).powi(2);
                let minus = (a + alpha[j]).powi(2) + (b - beta[j]).powi(2);
                pattern.push(plus == 0.0);
                pattern.push(minus == 0.0);
            }
        }
        seen.insert(pattern);
        for d in idx.iter_mut() {
            *d += 1;
            if *d < c {
                break;
            }
            *d = 0;
        }
    }
    seen.len()
}

/// How to compute [`xi_basis_count`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    ClosedSum,
    Enumerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum XiTrig {
    Cos,
    Sin,
    /// Pure exponential `t^p e^{at}` attached to a complex slot or a real eigenvalue.
    Exp,
}

/// One function `t^power e^{a t} trig(b t)` in the covering set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct XiElement {
    pub power: u64,
    /// `0..⌊n/2⌋` are complex slots; `⌊n/2⌋..` are real slots.
    pub slot: u64,
    pub trig: XiTrig,
}

/// The sets `M_{a_i ± ib_i}` and `M_{a_ℓ}` written out element by element.
pub fn xi_basis_elements(n: u64) -> BTreeSet<XiElement> {
    let half = n / 2;
    let mut set = BTreeSet::new();
    for i in 1..=half {
        let slot = i - 1;
        let trig_powers = n / (2 * i);
        for power in 0..trig_powers {
            set.insert(XiElement {
                power,
                slot,
                trig: XiTrig::Cos,
            });
            set.insert(XiElement {
                power,
                slot,
                trig: XiTrig::Sin,
            });
        }
        for power in trig_powers..n / i {
            set.insert(XiElement {
                power,
                slot,
                trig: XiTrig::Exp,
            });
        }
    }
    for r in 0..=half {
        set.insert(XiElement {
            power: 0,
            slot: half + r,
            trig: XiTrig::Exp,
        });
    }
    set
}

/// Number of ξ functions needed to express `e^{At}` for any real `n × n` matrix.
pub fn xi_basis_count(n: u64, mode: CountMode) -> Result<u64, BoundsError> {
    if n == 0 {
        return Err(BoundsError::InvalidArgument {
            field: "n",
            reason: "must be at least 1".into(),
        });
    }
    Ok(match mode {
        CountMode::ClosedSum => {
            let half = n / 2;
            let a: u64 = (1..=half).map(|i| n / (2 * i)).sum();
            let b: u64 = (1..=half).map(|i| n / i).sum();
            a + b + half + 1
        }
        CountMode::Enumerate => xi_basis_elements(n).len() as u64,
    })
}
