use std::fmt;

use serde::{Deserialize, Serialize};

/// A jet coordinate: `x`, `t`, `u_i = ∂ₓⁱu`, `w_j = ∂ₜʲu` or `v_k = ∂ₜᵏu_x`.
///
/// `w_0` and `v_0` are never stored; they collapse to `u_0` and `u_1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum JetVar {
    X,
    T,
    U(u8),
    W(u8),
    V(u8),
}

impl JetVar {
    pub fn u(i: u8) -> Self {
        JetVar::U(i)
    }

    pub fn w(j: u8) -> Self {
        if j == 0 {
            JetVar::U(0)
        } else {
            JetVar::W(j)
        }
    }

    pub fn v(k: u8) -> Self {
        if k == 0 {
            JetVar::U(1)
        } else {
            JetVar::V(k)
        }
    }

    /// Derivative index carried by the coordinate (0 for `x` and `t`).
    pub fn index(self) -> usize {
        match self {
            JetVar::X | JetVar::T => 0,
            JetVar::U(i) | JetVar::W(i) | JetVar::V(i) => i as usize,
        }
    }
}

impl fmt::Display for JetVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            JetVar::X => write!(f, "x"),
            JetVar::T => write!(f, "t"),
            JetVar::U(i) => write!(f, "u{i}"),
            JetVar::W(j) => write!(f, "w{j}"),
            JetVar::V(k) => write!(f, "v{k}"),
        }
    }
}
