//! Plain-text design and observation tables, and the frozen data sets shipped
//! with the crate.
//!
//! Design files hold one point per line, `train x1 x2` or `predict x1 x2`;
//! the feature row of a point is `(1, x1, x2)`. Observation files hold one
//! sample per line as whitespace-separated coordinates. `#` starts a comment.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gppredict::{GpDesign, GpParams};
use crate::numcore::ObservationSet;

pub const FROZEN_DESIGN: &str = include_str!("../data/gp_design_v1.txt");
pub const DEMO_OBSERVATIONS: &str = include_str!("../data/mvn_demo_v1.txt");

/// Lengthscale used with the frozen design.
pub const FROZEN_LENGTHSCALE: f64 = 1.0;

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, line)| {
        let line = line.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn parse_numbers(line_no: usize, fields: &[&str]) -> Result<Vec<f64>> {
    fields
        .iter()
        .map(|f| {
            f.parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("line {line_no}: `{f}` is not a number")))
        })
        .collect()
}

/// Parses a design table into spatial features `(1, x1, x2)`.
pub fn parse_design(text: &str, lengthscale: f64) -> Result<GpDesign> {
    let mut train = Vec::new();
    let mut pred = Vec::new();
    for (line_no, line) in content_lines(text) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let target = match fields[0] {
            "train" => &mut train,
            "predict" => &mut pred,
            other => {
                return Err(Error::InvalidInput(format!(
                    "line {line_no}: role must be `train` or `predict`, got `{other}`"
                )))
            }
        };
        if fields.len() != 3 {
            return Err(Error::InvalidInput(format!("line {line_no}: expected role and two coordinates")));
        }
        let xs = parse_numbers(line_no, &fields[1..])?;
        target.push([1.0, xs[0], xs[1]]);
    }
    if train.is_empty() || pred.is_empty() {
        return Err(Error::InvalidInput("design needs at least one train and one predict row".into()));
    }
    let to_matrix = |rows: &[[f64; 3]]| DMatrix::from_fn(rows.len(), 3, |i, j| rows[i][j]);
    GpDesign::new(to_matrix(&train), to_matrix(&pred), lengthscale)
}

/// Parses whitespace-separated samples, one per line.
pub fn parse_observations(text: &str) -> Result<ObservationSet> {
    let mut rows = Vec::new();
    for (line_no, line) in content_lines(text) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        rows.push(parse_numbers(line_no, &fields)?);
    }
    if rows.is_empty() {
        return Err(Error::InvalidInput("no observations".into()));
    }
    ObservationSet::from_rows(&rows)
}

/// Ten training points and one prediction point in the unit square.
pub fn frozen_design() -> GpDesign {
    parse_design(FROZEN_DESIGN, FROZEN_LENGTHSCALE).expect("frozen design is valid")
}

/// Zero regression weights and unit noise scale for a design with `p` features.
pub fn reference_gp_params(p: usize) -> GpParams {
    GpParams::new(DVector::zeros(p), 1.0).expect("unit scale is valid")
}

/// Three bivariate points for log-density grids.
pub fn demo_observations() -> ObservationSet {
    parse_observations(DEMO_OBSERVATIONS).expect("demo data are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frozen_files_parse() {
        let d = frozen_design();
        assert_eq!((d.n(), d.m(), d.p()), (10, 1, 3));
        assert!(d.train_x().column(0).iter().all(|v| *v == 1.0));
        let obs = demo_observations();
        assert_eq!((obs.n(), obs.d()), (3, 2));
    }

    #[test]
    fn comments_and_blank_lines_skipped() {
        let obs = parse_observations("# header\n\n1 2 # trailing\n3 4\n").unwrap();
        assert_eq!(obs.row(1), vec![3.0, 4.0]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_design("train 0.1 0.2\nbogus 1 2\n", 1.0).unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = parse_observations("1 2\n3 x\n").unwrap_err();
        assert!(err.to_string().contains("line 2"));
        assert!(parse_observations("1 2\n3\n").is_err());
        assert!(parse_design("train 0.1 0.2\n", 1.0).is_err());
    }
}
