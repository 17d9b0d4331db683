use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Closed-form probability and distance bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Bound {
    /// `Pr[X ≥ α] ≤ E[X]/α` for non-negative `X`.
    MarkovUb { expect: f64, alpha: f64 },
    /// `Pr[X > α] ≥ (E[X] − α)/(β − α)` for `X ∈ [0, β]`.
    ConcLb { expect: f64, alpha: f64, beta: f64 },
    /// Lower bound on the `t`-copy trace distance of states at distance `d`.
    CopiesLb { t: u32, d: f64 },
    /// Lower bound on `½‖t0 ρ0 − t1 ρ1‖₁` from `½‖ρ0 − ρ1‖₁ = d`.
    ScaledTdLb { t0: f64, t1: f64, d: f64 },
}

fn require(ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(what.to_string()))
    }
}

impl Bound {
    pub fn eval(&self) -> Result<f64> {
        match *self {
            Bound::MarkovUb { expect, alpha } => {
                require(alpha > 0.0, "MARKOV_UB needs alpha > 0")?;
                Ok(expect / alpha)
            }
            Bound::ConcLb { expect, alpha, beta } => {
                require(0.0 < alpha && alpha < beta, "CONC_LB needs 0 < alpha < beta")?;
                Ok((expect - alpha) / (beta - alpha))
            }
            Bound::CopiesLb { t, d } => {
                require(t >= 1, "COPIES_LB needs t >= 1")?;
                require((0.0..=1.0).contains(&d), "COPIES_LB needs d in [0, 1]")?;
                Ok(1.0 - 2.0 * (-(t as f64) / 2.0 * d * d).exp())
            }
            Bound::ScaledTdLb { t0, t1, d } => {
                require(t0 >= 0.0 && t1 >= 0.0, "SCALED_TD_LB needs t0, t1 >= 0")?;
                require((0.0..=1.0).contains(&d), "SCALED_TD_LB needs d in [0, 1]")?;
                Ok(t0.max(t1) / 2.0 * d)
            }
        }
    }
}

/// Convenience wrapper matching the operation-style API.
pub fn bound_eval(bound: Bound) -> Result<f64> {
    bound.eval()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn markov_ratio() {
        assert_eq!(Bound::MarkovUb { expect: 0.5, alpha: 1.0 }.eval().unwrap(), 0.5);
        assert!(Bound::MarkovUb { expect: 0.5, alpha: 0.0 }.eval().is_err());
    }

    #[test]
    fn copies_two_orthogonal() {
        let v = Bound::CopiesLb { t: 2, d: 1.0 }.eval().unwrap();
        assert!((v - (1.0 - 2.0 / std::f64::consts::E)).abs() < 1e-15);
        assert!((v - 0.26424).abs() < 1e-5);
        assert!(Bound::CopiesLb { t: 0, d: 1.0 }.eval().is_err());
        assert!(Bound::CopiesLb { t: 1, d: 1.5 }.eval().is_err());
    }

    #[test]
    fn scaled_td() {
        assert_eq!(Bound::ScaledTdLb { t0: 1.0, t1: 0.0, d: 1.0 }.eval().unwrap(), 0.5);
    }

    #[test]
    fn concentration_ordering() {
        assert!(Bound::ConcLb { expect: 0.5, alpha: 0.7, beta: 0.6 }.eval().is_err());
        assert_eq!(Bound::ConcLb { expect: 0.75, alpha: 0.5, beta: 1.0 }.eval().unwrap(), 0.5);
    }
}
