use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{neg, pos, Scalar};

/// Valuation `Q` of the contract used at default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QRule {
    /// `Q = P`.
    Clean,
    /// `Q = Π = P − Θ`.
    Predefault,
}

/// Collateral `Γ` posted by the bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CollateralRule {
    Zero,
    EqualToQ,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsaSpec<T> {
    pub name: String,
    /// Recovery of the bank to its unsecured funder, `𝔯`.
    pub funder_recovery: T,
    pub recovery_bank: T,
    pub recovery_investor: T,
    pub q_rule: QRule,
    pub collateral: CollateralRule,
    pub gamma_bank: T,
    pub gamma_investor: T,
    /// First-to-default intensity `γ`.
    pub gamma: T,
    pub b: T,
    pub b_bar: T,
    pub lambda: T,
    pub lambda_bar: T,
}

/// Terms of `g` split into its four adjustments, without the `−rΘ` part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TvaComponents<T> {
    pub cva: T,
    pub dva: T,
    pub lva: T,
    pub rc: T,
}

impl<T: Scalar> TvaComponents<T> {
    pub fn total(&self) -> T {
        self.cva + self.dva + self.lva + self.rc
    }
}

impl<T: Scalar> CsaSpec<T> {
    /// Everything zero, so that `g = −rΘ`.
    pub fn zero(name: &str) -> Self {
        Self {
            name: name.to_string(),
            funder_recovery: T::one(),
            recovery_bank: T::one(),
            recovery_investor: T::one(),
            q_rule: QRule::Clean,
            collateral: CollateralRule::Zero,
            gamma_bank: T::zero(),
            gamma_investor: T::zero(),
            gamma: T::zero(),
            b: T::zero(),
            b_bar: T::zero(),
            lambda: T::zero(),
            lambda_bar: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let unit = [self.funder_recovery, self.recovery_bank, self.recovery_investor];
        if unit.iter().any(|&r| !(r >= T::zero() && r <= T::one())) {
            return Err(Error::invalid(format!("CSA {}: recovery rates must lie in [0, 1]", self.name)));
        }
        let rates = [self.gamma_bank, self.gamma_investor, self.gamma, self.b, self.b_bar, self.lambda, self.lambda_bar];
        if rates.iter().any(|r| !r.is_finite()) {
            return Err(Error::invalid(format!("CSA {}: rates must be finite", self.name)));
        }
        Ok(())
    }

    /// Flags a first-to-default intensity below either party's intensity.
    pub fn gamma_sanity(&self) -> bool {
        self.gamma >= self.gamma_bank.max(self.gamma_investor)
    }

    /// `λ̃ = λ̄ − γ^b (1 − 𝔯)`.
    pub fn lambda_tilde(&self) -> T {
        self.lambda_bar - self.gamma_bank * (T::one() - self.funder_recovery)
    }

    pub fn contract_value(&self, p: T, theta: T) -> T {
        match self.q_rule {
            QRule::Clean => p,
            QRule::Predefault => p - theta,
        }
    }

    pub fn collateral_value(&self, q: T) -> T {
        match self.collateral {
            CollateralRule::Zero => T::zero(),
            CollateralRule::EqualToQ => q,
        }
    }

    pub fn components(&self, p: T, theta: T) -> TvaComponents<T> {
        let q = self.contract_value(p, theta);
        let gamma_c = self.collateral_value(q);
        let exposure = q - gamma_c;
        let funded = p - theta - gamma_c;
        TvaComponents {
            cva: -self.gamma_investor * (T::one() - self.recovery_investor) * neg(exposure),
            dva: self.gamma_bank * (T::one() - self.recovery_bank) * pos(exposure),
            lva: self.b * pos(gamma_c) - self.b_bar * neg(gamma_c) + self.lambda * pos(funded)
                - self.lambda_tilde() * neg(funded),
            rc: self.gamma * (p - theta - q),
        }
    }

    /// TVA coefficient `g_t(r, P, Θ)`.
    pub fn tva_coefficient(&self, r: T, p: T, theta: T) -> T {
        -r * theta + self.components(p, theta).total()
    }

    /// True when `g` is affine in `Θ`, i.e. `Q = P` and `λ = λ̃` up to rounding.
    pub fn is_linear(&self) -> bool {
        let tol = T::c(1e-12) * (T::one() + self.lambda.abs());
        self.q_rule == QRule::Clean && (self.lambda - self.lambda_tilde()).abs() <= tol
    }

    /// For a linear CSA, `g = g̃(P) − (r + c)Θ`; returns `c`.
    pub fn linear_theta_rate(&self) -> Result<T> {
        if !self.is_linear() {
            return Err(Error::Unsupported(format!("CSA {} is not linear in the TVA", self.name)));
        }
        Ok(self.lambda + self.gamma)
    }
}

/// The five contracts of the numerical study with `γ^b = 5%`, `γ^i = 7%`,
/// `γ = 10%`, `b = b̄ = λ = 1.5%`, `λ̄ = 4.5%`.
pub fn reference_csas<T: Scalar>() -> Vec<CsaSpec<T>> {
    let base = |name: &str, rr: f64, rb: f64, ri: f64, q_rule: QRule, collateral: CollateralRule| CsaSpec {
        name: name.to_string(),
        funder_recovery: T::c(rr),
        recovery_bank: T::c(rb),
        recovery_investor: T::c(ri),
        q_rule,
        collateral,
        gamma_bank: T::c(0.05),
        gamma_investor: T::c(0.07),
        gamma: T::c(0.10),
        b: T::c(0.015),
        b_bar: T::c(0.015),
        lambda: T::c(0.015),
        lambda_bar: T::c(0.045),
    };
    vec![
        base("csa1", 0.4, 0.4, 0.4, QRule::Clean, CollateralRule::Zero),
        base("csa2", 1.0, 0.4, 0.4, QRule::Clean, CollateralRule::Zero),
        base("csa3", 1.0, 1.0, 0.4, QRule::Clean, CollateralRule::Zero),
        base("csa4", 1.0, 1.0, 0.4, QRule::Predefault, CollateralRule::Zero),
        base("csa5", 1.0, 0.4, 0.4, QRule::Clean, CollateralRule::EqualToQ),
    ]
}
