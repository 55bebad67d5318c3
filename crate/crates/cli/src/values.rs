//! Parsers for flag values: grids, `λ` lists and test-function specs.

use kinetic_interface::grid::{bump, GridFunction};

use crate::config::{grid_ok, SpaceGrid, TimeGrid};
use crate::error::CliError;

fn arg_err(what: &str, text: &str) -> CliError {
    CliError::Argument(format!("cannot parse {what} from `{text}`"))
}

fn numbers(text: &str, sep: char, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(sep).map(|p| p.trim().parse::<f64>().map_err(|_| arg_err(what, text))).collect()
}

/// `half_width:spacing`.
pub fn space_grid(text: &str) -> Result<SpaceGrid, CliError> {
    match numbers(text, ':', "space grid")?[..] {
        [half_width, spacing] if grid_ok(SpaceGrid { half_width, spacing }) => Ok(SpaceGrid { half_width, spacing }),
        _ => Err(arg_err("space grid `half_width:spacing` with spacing dividing half_width", text)),
    }
}

/// `end:steps`.
pub fn time_grid(text: &str) -> Result<TimeGrid, CliError> {
    match numbers(text, ':', "time grid")?[..] {
        [end, steps] if end > 0.0 && steps >= 1.0 && steps.fract() == 0.0 => {
            Ok(TimeGrid { end, steps: steps as usize })
        }
        _ => Err(arg_err("time grid `end:steps`", text)),
    }
}

/// Comma-separated positive values.
pub fn lambda_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let v = numbers(text, ',', "lambda grid")?;
    if v.iter().all(|l| *l > 0.0 && l.is_finite()) {
        Ok(v)
    } else {
        Err(arg_err("lambda grid of positive values", text))
    }
}

/// `lo:hi:count`, logarithmically spaced with both ends included.
pub fn log_grid(text: &str) -> Result<Vec<f64>, CliError> {
    match numbers(text, ':', "log grid")?[..] {
        [lo, hi, n] if lo > 0.0 && hi > lo && n >= 2.0 && n.fract() == 0.0 => {
            let n = n as usize;
            let (a, b) = (lo.ln(), hi.ln());
            let mut g: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
            g[0] = lo;
            g[n - 1] = hi;
            Ok(g)
        }
        _ => Err(arg_err("log grid `lo:hi:count`", text)),
    }
}

/// Shape of a compactly supported test function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Shape {
    /// Smooth bump `a·exp(1 − 1/(1 − r²))`, `r = (y − c)/w`.
    Bump,
    /// Tent `a·max(0, 1 − |y − c|/w)`.
    Tent,
}

/// `shape:center:half_width[:amplitude]`, summands joined by `+`.
#[derive(Clone, Debug, PartialEq)]
pub struct FunctionSpec {
    pub terms: Vec<(Shape, f64, f64, f64)>,
}

impl FunctionSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let terms = text
            .split('+')
            .map(|term| {
                let mut parts = term.trim().split(':');
                let shape = match parts.next() {
                    Some("bump") => Shape::Bump,
                    Some("tent") => Shape::Tent,
                    _ => return Err(arg_err("function `bump|tent:center:half_width[:amplitude]`", text)),
                };
                let rest: Vec<f64> = parts
                    .map(|p| p.parse::<f64>().map_err(|_| arg_err("function parameters", text)))
                    .collect::<Result<_, _>>()?;
                match rest[..] {
                    [c, w] if w > 0.0 => Ok((shape, c, w, 1.0)),
                    [c, w, a] if w > 0.0 => Ok((shape, c, w, a)),
                    _ => Err(arg_err("function `bump|tent:center:half_width[:amplitude]`", text)),
                }
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { terms })
    }

    pub fn eval(&self, y: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(shape, c, w, a)| match shape {
                Shape::Bump => bump(y, c, w, a),
                Shape::Tent => a * (1.0 - (y - c).abs() / w).max(0.0),
            })
            .sum()
    }

    pub fn on_grid(&self, g: SpaceGrid) -> GridFunction {
        GridFunction::symmetric(g.half_width, g.spacing, |y| self.eval(y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids_parse() {
        assert_eq!(space_grid("6:0.125").unwrap(), SpaceGrid { half_width: 6.0, spacing: 0.125 });
        assert!(space_grid("6:0.7").is_err());
        assert_eq!(time_grid("0.5:20").unwrap().times().len(), 21);
        assert_eq!(lambda_grid("1e2, 1e3").unwrap(), vec![100.0, 1000.0]);
        let g = log_grid("1:100:3").unwrap();
        assert!((g[1] - 10.0).abs() < 1e-12 && (g[2] - 100.0).abs() < 1e-12);
    }

    #[test]
    fn function_specs_sum_their_terms() {
        let f = FunctionSpec::parse("tent:0:1:2+tent:3:1").unwrap();
        assert_eq!(f.eval(0.5), 1.0);
        assert_eq!(f.eval(3.0), 1.0);
        assert!(FunctionSpec::parse("wave:0:1").is_err());
        assert!(FunctionSpec::parse("bump:0:-1").is_err());
    }
}
