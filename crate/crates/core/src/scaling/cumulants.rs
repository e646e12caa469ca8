use serde::{Deserialize, Serialize};

use super::{structure_functions_from_atoms, Source, StructureFunctionTable, MAX_CUMULANT_ORDER};
use crate::error::{invalid_arg, Result};
use crate::leaders::LeaderPyramid;
use crate::regression::RegressionConfig;

/// Log-cumulants `c_m` with the intercepts `C0_m` of
/// `C_m(j) = C0_m + c_m ln(2^j)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogCumulants {
    pub c: Vec<f64>,
    pub intercepts: Vec<f64>,
}

impl LogCumulants {
    /// Truncated expansion `sum_m c_m p^m / m!`.
    pub fn zeta_expansion(&self, p: f64) -> f64 {
        let mut term = 1.0;
        let mut acc = 0.0;
        for (m, c) in self.c.iter().enumerate() {
            term *= p / (m + 1) as f64;
            acc += c * term;
        }
        acc
    }
}

/// Unbiased k-statistics `k_1..=k_order` of a sample (`order <= 4`,
/// `len > order`).
pub fn k_statistics(x: &[f64], order: usize) -> Vec<f64> {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in x {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    let k = [
        mean,
        n * m2 / (n - 1.0),
        n * n * m3 / ((n - 1.0) * (n - 2.0)),
        n * n * ((n + 1.0) * m4 - 3.0 * (n - 1.0) * m2 * m2) / ((n - 1.0) * (n - 2.0) * (n - 3.0)),
    ];
    k[..order].to_vec()
}

/// Fits every cumulant row of the table over the configured range.
pub fn fit_log_cumulants(
    table: &StructureFunctionTable,
    order: usize,
    config: &RegressionConfig,
) -> Result<LogCumulants> {
    config.validate()?;
    if order == 0 || order > table.max_cumulant() {
        return invalid_arg(format!(
            "cumulant order {order} not available (table holds {})",
            table.max_cumulant()
        ));
    }
    let ln2 = std::f64::consts::LN_2;
    let mut c = Vec::with_capacity(order);
    let mut intercepts = Vec::with_capacity(order);
    for m in 0..order {
        let points: Vec<(usize, f64, usize)> = table
            .levels
            .iter()
            .map(|l| (l.j, l.cumulants[m], l.nonzero()))
            .collect();
        let fit = config.fit(&points)?;
        c.push(fit.slope / ln2);
        intercepts.push(fit.intercept);
    }
    Ok(LogCumulants { c, intercepts })
}

/// Log-cumulants `c_1..=c_M` of the leaders (`M <= 4`).
pub fn estimate_log_cumulants(
    leaders: &LeaderPyramid,
    order: usize,
    config: &RegressionConfig,
) -> Result<LogCumulants> {
    if order == 0 || order > MAX_CUMULANT_ORDER {
        return invalid_arg(format!(
            "cumulant order must be in 1..={MAX_CUMULANT_ORDER}"
        ));
    }
    let table = structure_functions_from_atoms(Source::Leaders, &leaders.atoms(), &[1.0], order)?;
    fit_log_cumulants(&table, order, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Fisher's power-sum expressions of the k-statistics.
    fn power_sum_oracle(x: &[f64]) -> [f64; 4] {
        let n = x.len() as f64;
        let s = |r: i32| x.iter().map(|v| v.powi(r)).sum::<f64>();
        let (s1, s2, s3, s4) = (s(1), s(2), s(3), s(4));
        [
            s1 / n,
            (n * s2 - s1 * s1) / (n * (n - 1.0)),
            (2.0 * s1.powi(3) - 3.0 * n * s1 * s2 + n * n * s3) / (n * (n - 1.0) * (n - 2.0)),
            (-6.0 * s1.powi(4) + 12.0 * n * s1 * s1 * s2
                - 3.0 * n * (n - 1.0) * s2 * s2
                - 4.0 * n * (n + 1.0) * s1 * s3
                + n * n * (n + 1.0) * s4)
                / (n * (n - 1.0) * (n - 2.0) * (n - 3.0)),
        ]
    }

    proptest! {
        #[test]
        fn k_statistics_match_power_sums(x in prop::collection::vec(-2.0f64..2.0, 5..40)) {
            let k = k_statistics(&x, 4);
            let o = power_sum_oracle(&x);
            for m in 0..4 {
                prop_assert!((k[m] - o[m]).abs() < 1e-9 * (1.0 + o[m].abs()), "k{}: {} vs {}", m + 1, k[m], o[m]);
            }
        }
    }

    #[test]
    fn expansion_of_quadratic() {
        let c = LogCumulants {
            c: vec![0.72, -0.08],
            intercepts: vec![0.0, 0.0],
        };
        assert!((c.zeta_expansion(2.0) - (1.44 - 0.16)).abs() < 1e-15);
    }
}
