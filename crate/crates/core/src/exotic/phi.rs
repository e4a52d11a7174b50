use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::grid::{rat_str, Grid};
use crate::Rational;

/// `φ_t(x) = 2^-t #{P in P^t : P ⊂ [0, x]}` for a binary grid.
pub fn phi_at_depth(grid: &Grid, x: &Rational, t: usize) -> Result<Rational> {
    if x.is_negative() || x > &Rational::one() {
        return Err(Error::InvalidParameter(format!("{x} is outside [0,1]")));
    }
    let den = num_traits::pow(BigInt::from(2), t);
    if x.is_zero() {
        return Ok(Rational::zero());
    }
    let cell = grid.cell_at(x, t, true)?;
    let mut idx = BigInt::zero();
    for &d in cell.address.digits() {
        if d > 1 {
            return Err(Error::NotBinary(d as usize + 1));
        }
        idx = idx * 2 + d;
    }
    if &cell.b == x {
        idx += 1;
    }
    Ok(Rational::new(idx, den))
}

#[derive(Clone, Debug)]
pub struct PhiCheck {
    pub endpoints_checked: usize,
    /// Level-`k` endpoints of the grid sent to `j/2^k` at every depth `t >= k`.
    pub endpoints_exact: bool,
    /// `|φ_t(x) - φ_(t+1)(x)| <= 2^-t` on every tested point.
    pub cauchy: bool,
    pub max_scaled_step: Rational,
}

impl PhiCheck {
    pub fn ok(&self) -> bool {
        self.endpoints_exact && self.cauchy
    }

    pub fn to_json(&self) -> Value {
        json!({
            "endpoints_checked": self.endpoints_checked,
            "endpoints_exact": self.endpoints_exact,
            "cauchy": self.cauchy,
            "max_scaled_step": rat_str(&self.max_scaled_step),
        })
    }
}

/// Checks the conjugacy to the dyadic grid on all endpoints of levels `<= k_max`, at depths up to `t_max`.
pub fn conjugacy_check(grid: &Grid, k_max: usize, t_max: usize) -> Result<PhiCheck> {
    let mut exact = true;
    let mut cauchy = true;
    let mut worst = Rational::zero();
    let mut count = 0;
    let cells = grid.level_cells(k_max, crate::grid::MAX_VALIDATION_CELLS)?;
    for (j, c) in cells.iter().enumerate() {
        let x = &c.b;
        let k = (0..=k_max).find(|&k| {
            let den = Rational::from_integer(num_traits::pow(BigInt::from(2), k_max - k));
            (Rational::from_integer((j + 1).into()) / den).is_integer()
        });
        let k = k.unwrap_or(k_max);
        let want = Rational::new((j + 1).into(), num_traits::pow(BigInt::from(2), k_max));
        let mut prev: Option<Rational> = None;
        for t in k..=t_max {
            let v = phi_at_depth(grid, x, t)?;
            if v != want {
                exact = false;
            }
            if let Some(p) = prev {
                let step = (&v - p).abs() * Rational::from_integer(num_traits::pow(BigInt::from(2), t - 1));
                if step > Rational::one() {
                    cauchy = false;
                }
                worst = worst.max(step);
            }
            prev = Some(v);
        }
        count += 1;
        // an interior point of the cell, where φ_t moves with t
        let mid = (&c.a + &c.b) / Rational::from_integer(3.into());
        let mut prev: Option<Rational> = None;
        for t in 0..=t_max {
            let v = phi_at_depth(grid, &mid, t)?;
            if let Some(p) = prev {
                let step = (&v - p).abs() * Rational::from_integer(num_traits::pow(BigInt::from(2), t - 1));
                if step > Rational::one() {
                    cauchy = false;
                }
                worst = worst.max(step);
            }
            prev = Some(v);
        }
    }
    Ok(PhiCheck { endpoints_checked: count, endpoints_exact: exact, cauchy, max_scaled_step: worst })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    #[test]
    fn weighted_endpoints_go_to_dyadics() {
        let g = Grid::weighted_binary(rat(1, 5), 20).unwrap();
        // level-1 endpoint 1/5 and level-2 endpoint 1/25
        assert_eq!(phi_at_depth(&g, &rat(1, 5), 6).unwrap(), rat(1, 2));
        assert_eq!(phi_at_depth(&g, &rat(1, 25), 6).unwrap(), rat(1, 4));
        assert_eq!(phi_at_depth(&g, &rat(1, 1), 6).unwrap(), rat(1, 1));
        let c = conjugacy_check(&g, 5, 12).unwrap();
        assert!(c.ok(), "{c:?}");
        assert_eq!(c.endpoints_checked, 32);
    }

    #[test]
    fn dyadic_phi_is_identity_on_dyadics() {
        let d = Grid::nadic(2, 20).unwrap();
        assert_eq!(phi_at_depth(&d, &rat(3, 8), 10).unwrap(), rat(3, 8));
        assert_eq!(phi_at_depth(&d, &rat(1, 3), 10).unwrap(), rat(341, 1024));
    }
}
