//! Text dumps of the synthetic datasets, for use outside this crate.
//!
//! Logistic data is written in LIBSVM format. The other families use plain
//! whitespace-separated numbers after a `#` header line naming the layout.

use std::io::Write;

use adaprox::{lasso_synthetic, logistic_synthetic, mc_synthetic, nmf_synthetic};
use ndarray::Array2;

use crate::config::ProblemSpec;
use crate::error::{config, HarnessError, Result};
use crate::libsvm::write_libsvm;

fn write_matrix<W: Write>(a: &Array2<f64>, out: &mut W) -> std::io::Result<()> {
    for row in a.rows() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

/// Writes the data behind `spec` for one seed.
pub fn write_dataset<W: Write>(spec: &ProblemSpec, seed: u64, mut out: W) -> Result<()> {
    let io = |e: std::io::Error| HarnessError::Config(format!("write failed: {e}"));
    match *spec {
        ProblemSpec::Quadratic { .. } => {
            return config("the quadratic toy has no dataset to generate");
        }
        ProblemSpec::Logistic { dataset: Some(_), .. } => {
            return config("logistic with a dataset file is not synthetic");
        }
        ProblemSpec::Logistic { m, n, .. } => {
            write_libsvm(&logistic_synthetic(m, n, seed), &mut out).map_err(io)?;
        }
        ProblemSpec::Lasso { m, n } => {
            let (a, b, w) = lasso_synthetic(m, n, seed);
            writeln!(out, "# lasso m={m} n={n} l1_weight={w}; columns: b a_1 .. a_n").map_err(io)?;
            let mut full = Array2::zeros((m, n + 1));
            full.column_mut(0).assign(&b);
            full.slice_mut(ndarray::s![.., 1..]).assign(&a);
            write_matrix(&full, &mut out).map_err(io)?;
        }
        ProblemSpec::Nmf { n, r, m } => {
            writeln!(out, "# nmf {n}x{m} matrix of rank at most {r}").map_err(io)?;
            write_matrix(&nmf_synthetic(n, r, m, seed), &mut out).map_err(io)?;
        }
        ProblemSpec::Mc { p, q, r, n_obs, noise } => {
            let data = mc_synthetic(p, q, r, n_obs, noise, seed)?;
            writeln!(out, "# mc {p}x{q} rank {r}; rows: i j value (0-based)").map_err(io)?;
            for &(i, j, v) in data.obs.entries() {
                writeln!(out, "{i} {j} {v}").map_err(io)?;
            }
        }
    }
    out.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::libsvm::parse_libsvm;

    #[test]
    fn logistic_dump_parses_back() {
        let spec = ProblemSpec::Logistic {
            m: 30,
            n: 6,
            dataset: None,
            gamma: None,
        };
        let mut buf = Vec::new();
        write_dataset(&spec, 3, &mut buf).unwrap();
        let mut design = parse_libsvm(&buf[..]).unwrap();
        let truth = logistic_synthetic(30, 6, 3);
        design.set_n_cols(truth.n_cols()).unwrap();
        assert_eq!(design, truth);
    }

    #[test]
    fn nmf_dump_has_one_line_per_row() {
        let spec = ProblemSpec::Nmf { n: 7, r: 2, m: 4 };
        let mut buf = Vec::new();
        write_dataset(&spec, 0, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 8);
        assert!(text.lines().skip(1).all(|l| l.split(' ').count() == 4));
    }

    #[test]
    fn quadratic_has_no_dataset() {
        assert!(write_dataset(&ProblemSpec::default_for("quadratic").unwrap(), 0, Vec::new()).is_err());
    }
}
