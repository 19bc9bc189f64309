use std::collections::HashMap;
use std::fmt;
use std::sync::RwLock;

use super::deriv::diff_wrt;
use super::expr::JetExpr;
use super::var::JetVar;
use crate::error::{Error, Result};
use crate::Rational;

/// Default bound on jet indices.
pub const DEFAULT_JET_ORDER: usize = 8;

/// Right-hand side of the evolution equation.
#[derive(Clone, Debug)]
pub enum PdeKind {
    /// `u₀,t − u₂,t = F`, `F = λu₀²u₃ + G(u₀,u₁,u₂)`.
    ThirdOrder { lambda: Rational, g: JetExpr },
    /// `u₁,t = sin u₀`.
    SineGordon,
}

#[derive(Default)]
struct Cache {
    ut: HashMap<usize, JetExpr>,
    dxf: HashMap<usize, JetExpr>,
}

/// A PDE with a lazily built prolongation table.
///
/// The table maps `i` to the rewrite of `u_{i,t}`; reads and inserts go
/// through a lock so a spec can be shared across threads.
pub struct PdeSpec {
    kind: PdeKind,
    order: usize,
    cache: RwLock<Cache>,
}

impl Clone for PdeSpec {
    fn clone(&self) -> Self {
        PdeSpec {
            kind: self.kind.clone(),
            order: self.order,
            cache: RwLock::new(Cache::default()),
        }
    }
}

impl fmt::Debug for PdeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PdeSpec")
            .field("kind", &self.kind)
            .field("order", &self.order)
            .finish()
    }
}

impl PdeSpec {
    /// Third-order equation with `G` depending on `u₀, u₁, u₂` only.
    pub fn third_order(lambda: Rational, g: JetExpr) -> Result<Self> {
        let allowed = [JetVar::U(0), JetVar::U(1), JetVar::U(2)];
        if let Some(bad) = g.vars().into_iter().find(|v| !allowed.contains(v)) {
            return Err(Error::InvalidPde(format!("G depends on {bad}")));
        }
        Ok(PdeSpec {
            kind: PdeKind::ThirdOrder { lambda, g },
            order: DEFAULT_JET_ORDER,
            cache: RwLock::new(Cache::default()),
        })
    }

    pub fn sine_gordon() -> Self {
        PdeSpec {
            kind: PdeKind::SineGordon,
            order: DEFAULT_JET_ORDER,
            cache: RwLock::new(Cache::default()),
        }
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self.cache = RwLock::new(Cache::default());
        self
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn kind(&self) -> &PdeKind {
        &self.kind
    }

    pub fn lambda(&self) -> Option<&Rational> {
        match &self.kind {
            PdeKind::ThirdOrder { lambda, .. } => Some(lambda),
            PdeKind::SineGordon => None,
        }
    }

    pub fn g(&self) -> Option<&JetExpr> {
        match &self.kind {
            PdeKind::ThirdOrder { g, .. } => Some(g),
            PdeKind::SineGordon => None,
        }
    }

    /// `F = λu₀²u₃ + G`; for sine-Gordon, the right-hand side `sin u₀`.
    pub fn f(&self) -> JetExpr {
        match &self.kind {
            PdeKind::ThirdOrder { lambda, g } => {
                let lead = JetExpr::u(0).pow(2) * JetExpr::u(3);
                &lead.scale(lambda) + g
            }
            PdeKind::SineGordon => JetExpr::sin_u0(),
        }
    }

    fn check(&self, i: usize) -> Result<()> {
        if i > self.order {
            return Err(Error::OrderOverflow {
                requested: i,
                bound: self.order,
            });
        }
        Ok(())
    }

    /// `D_xᵏ F`, cached.
    fn dx_f(&self, k: usize) -> Result<JetExpr> {
        if let Some(e) = self.cache.read().unwrap().dxf.get(&k) {
            return Ok(e.clone());
        }
        let e = if k == 0 {
            self.f()
        } else {
            self.dx(&self.dx_f(k - 1)?)?
        };
        self.cache.write().unwrap().dxf.insert(k, e.clone());
        Ok(e)
    }

    /// Rewrite of `u_{i,t}` from the prolongation table.
    pub fn u_t(&self, i: usize) -> Result<JetExpr> {
        self.check(i)?;
        if let Some(e) = self.cache.read().unwrap().ut.get(&i) {
            return Ok(e.clone());
        }
        let e = match (&self.kind, i) {
            (_, 0) => JetExpr::var(JetVar::W(1)),
            (PdeKind::ThirdOrder { .. }, 1) => JetExpr::var(JetVar::V(1)),
            (PdeKind::ThirdOrder { .. }, _) => &self.u_t(i - 2)? - &self.dx_f(i - 2)?,
            (PdeKind::SineGordon, 1) => JetExpr::sin_u0(),
            (PdeKind::SineGordon, _) => self.dx(&self.u_t(i - 1)?)?,
        };
        self.cache.write().unwrap().ut.insert(i, e.clone());
        Ok(e)
    }

    fn dt_n(&self, e: &JetExpr, n: usize) -> Result<JetExpr> {
        let mut out = e.clone();
        for _ in 0..n {
            out = self.dt(&out)?;
        }
        Ok(out)
    }

    /// Total x-derivative with `w_{j,x}` and `v_{k,x}` rewritten through the
    /// prolongation table.
    pub fn dx(&self, e: &JetExpr) -> Result<JetExpr> {
        total(e, |v| match v {
            JetVar::X => Ok(JetExpr::one()),
            JetVar::T => Ok(JetExpr::zero()),
            JetVar::U(i) => {
                self.check(i as usize + 1)?;
                Ok(JetExpr::u(i + 1))
            }
            JetVar::W(j) => self.dt_n(&self.u_t(1)?, j as usize - 1),
            JetVar::V(k) => self.dt_n(&self.u_t(2)?, k as usize - 1),
        })
    }

    /// Total t-derivative modulo the PDE.
    pub fn dt(&self, e: &JetExpr) -> Result<JetExpr> {
        total(e, |v| match v {
            JetVar::X => Ok(JetExpr::zero()),
            JetVar::T => Ok(JetExpr::one()),
            JetVar::U(i) => self.u_t(i as usize),
            JetVar::W(j) => {
                self.check(j as usize + 1)?;
                Ok(JetExpr::var(JetVar::W(j + 1)))
            }
            JetVar::V(k) => {
                self.check(k as usize + 1)?;
                Ok(JetExpr::var(JetVar::V(k + 1)))
            }
        })
    }
}

/// `Σ_v ∂e/∂v · D(v)` over the coordinates present in `e`.
fn total(e: &JetExpr, mut dv: impl FnMut(JetVar) -> Result<JetExpr>) -> Result<JetExpr> {
    let mut out = JetExpr::zero();
    for v in e.vars() {
        let d = dv(v)?;
        if d.is_zero() {
            continue;
        }
        out = &out + &(&diff_wrt(e, v) * &d);
    }
    Ok(out)
}

/// Total x-derivative without a PDE: `w_{j,x} = v_j`, and `v_k` is rejected.
pub fn total_dx(e: &JetExpr) -> Result<JetExpr> {
    let bound = DEFAULT_JET_ORDER;
    total(e, |v| match v {
        JetVar::X => Ok(JetExpr::one()),
        JetVar::T => Ok(JetExpr::zero()),
        JetVar::U(i) => {
            if i as usize + 1 > bound {
                return Err(Error::OrderOverflow {
                    requested: i as usize + 1,
                    bound,
                });
            }
            Ok(JetExpr::u(i + 1))
        }
        JetVar::W(j) => Ok(JetExpr::var(JetVar::V(j))),
        JetVar::V(_) => Err(Error::UnboundPde(e.to_string())),
    })
}

/// Total t-derivative modulo `pde`.
pub fn total_dt(e: &JetExpr, pde: &PdeSpec) -> Result<JetExpr> {
    pde.dt(e)
}
