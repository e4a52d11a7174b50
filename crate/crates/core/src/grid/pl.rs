use crate::error::{Error, Result};
use crate::Rational;

/// Increasing piecewise linear homeomorphism of `[0,1]` given by its knots.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinear {
    knots: Vec<(Rational, Rational)>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<(Rational, Rational)>) -> Result<Self> {
        let zero = Rational::from_integer(0.into());
        let one = Rational::from_integer(1.into());
        let ok_ends = knots.first() == Some(&(zero.clone(), zero)) && knots.last() == Some(&(one.clone(), one));
        let increasing = knots.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 < w[1].1);
        if !ok_ends || !increasing || knots.len() < 2 {
            return Err(Error::InvalidParameter(
                "map knots must increase strictly from (0,0) to (1,1)".into(),
            ));
        }
        Ok(PiecewiseLinear { knots })
    }

    pub fn knots(&self) -> &[(Rational, Rational)] {
        &self.knots
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let i = self.knots.partition_point(|(k, _)| k <= x).clamp(1, self.knots.len() - 1);
        let (x0, y0) = &self.knots[i - 1];
        let (x1, y1) = &self.knots[i];
        y0 + (y1 - y0) * (x - x0) / (x1 - x0)
    }
}
