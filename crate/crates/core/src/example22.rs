//! The three-state fixture with a transient high-cost state: states
//! {0, 1, 2}, actions {0, 1}, C(x, a) = x, state 0 absorbing, state 2 leaves
//! for 0 with probability 1 − ρ², and at state 1 action 0 stays with
//! probability ρ while action 1 jumps to state 2.
//!
//! Depending on the sign of λ + ln ρ the optimal average cost is either
//! non-constant (`e^λ ρ > 1`) or identically zero, and the multiplicative
//! optimality equation has a solution only when `e^λ ρ < 1`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Choice, Mdp};

/// Which side of `e^λ ρ = 1` a parameter pair falls on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `e^λ ρ > 1`: J* = (0, 1 + ln ρ / λ, 2 (1 + ln ρ / λ)).
    #[serde(rename = "e^λρ>1")]
    Above,
    /// `e^λ ρ = 1`: J* ≡ 0, no solution of the optimality equation.
    #[serde(rename = "e^λρ=1")]
    Critical,
    /// `e^λ ρ < 1`: J* ≡ 0 and the optimality equation is solvable.
    #[serde(rename = "e^λρ<1")]
    Below,
}

impl Regime {
    /// Classifies by the sign of `λ + ln ρ`, treating |λ + ln ρ| ≤ 1e-12 as
    /// the critical case.
    pub fn classify(rho: f64, lambda: f64) -> Self {
        let t = lambda + rho.ln();
        if t.abs() <= 1e-12 {
            Regime::Critical
        } else if t > 0.0 {
            Regime::Above
        } else {
            Regime::Below
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Regime::Above => "e^λρ>1",
            Regime::Critical => "e^λρ=1",
            Regime::Below => "e^λρ<1",
        }
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "rho",
            range: "(0, 1)",
            value: rho,
        })
    }
}

/// Builds the fixture for a given ρ ∈ (0, 1).
pub fn example22(rho: f64) -> Result<Mdp> {
    check_rho(rho)?;
    let rho2 = rho * rho;
    let states = vec!["0".to_string(), "1".to_string(), "2".to_string()];
    let actions = vec!["0".to_string(), "1".to_string()];
    let choices = vec![
        vec![Choice {
            action: 0,
            cost: 0.0,
            row: vec![1.0, 0.0, 0.0],
        }],
        vec![
            Choice {
                action: 0,
                cost: 1.0,
                row: vec![1.0 - rho, rho, 0.0],
            },
            Choice {
                action: 1,
                cost: 1.0,
                row: vec![0.0, 0.0, 1.0],
            },
        ],
        vec![Choice {
            action: 0,
            cost: 2.0,
            row: vec![1.0 - rho2, 0.0, rho2],
        }],
    ];
    Ok(Mdp::from_parts(states, actions, choices)?)
}

/// Known closed-form quantities of the fixture for one (ρ, λ).
#[derive(Clone, Debug, Serialize)]
pub struct ClosedForm {
    pub rho: f64,
    pub lambda: f64,
    pub regime: Regime,
    /// Optimal average cost at states 0, 1, 2.
    pub jstar: [f64; 3],
    /// Doeblin state.
    pub z: &'static str,
    /// max over policies and start states of E[T] for z = 0.
    pub doeblin_bound: f64,
    /// Relative value at γ = 0 (all states), finite only below the critical line.
    pub relative_value: Option<[f64; 3]>,
}

pub fn closed_form(rho: f64, lambda: f64) -> Result<ClosedForm> {
    check_rho(rho)?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidLambda(lambda));
    }
    let regime = Regime::classify(rho, lambda);
    let j1 = 1.0 + rho.ln() / lambda;
    let jstar = match regime {
        Regime::Above => [0.0, j1, 2.0 * j1],
        Regime::Critical | Regime::Below => [0.0; 3],
    };
    let rho2 = rho * rho;
    let stay = 1.0 / (1.0 - rho);
    let via_two = 1.0 + 1.0 / (1.0 - rho2);
    let relative_value = (regime == Regime::Below).then(|| {
        // E[e^{λ Σ C}] until absorption, geometric sums.
        let q2 = (2.0 * lambda).exp();
        let v2 = q2 * (1.0 - rho2) / (1.0 - q2 * rho2);
        let q1 = lambda.exp();
        let v1_stay = q1 * (1.0 - rho) / (1.0 - q1 * rho);
        let v1 = v1_stay.min(q1 * v2);
        [0.0, v1.ln() / lambda, v2.ln() / lambda]
    });
    Ok(ClosedForm {
        rho,
        lambda,
        regime,
        jstar,
        z: "0",
        doeblin_bound: stay.max(via_two),
        relative_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regimes() {
        assert_eq!(Regime::classify(0.5, 1.0), Regime::Above);
        assert_eq!(Regime::classify(0.5, std::f64::consts::LN_2), Regime::Critical);
        assert_eq!(Regime::classify(0.5, 0.5), Regime::Below);
    }

    #[test]
    fn closed_forms_at_half() {
        let above = closed_form(0.5, 1.0).unwrap();
        assert!((above.jstar[1] - 0.306_852_819_440_054_7).abs() < 1e-15);
        assert!((above.jstar[2] - 0.613_705_638_880_109_4).abs() < 1e-15);
        assert!((above.doeblin_bound - 7.0 / 3.0).abs() < 1e-15);
        assert!(above.relative_value.is_none());

        let below = closed_form(0.5, 0.5).unwrap();
        assert_eq!(below.jstar, [0.0; 3]);
        let h = below.relative_value.unwrap();
        assert!((h[2] - 3.700_821_6).abs() < 1e-6);
    }

    #[test]
    fn rejects_rho_outside_unit_interval() {
        assert!(example22(0.0).is_err());
        assert!(example22(1.0).is_err());
        assert!(closed_form(1.5, 1.0).is_err());
    }
}
