use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::harmonic;

use super::genealogy::SampleStats;

/// Variance constants: Tajima's `D` divides by `sqrt(a S + b S (S-1))`,
/// Fu and Li's by `sqrt(c S + d S^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DStatConstants {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl DStatConstants {
    /// Tajima (1989) and Fu and Li (1993, with outgroup) constants.
    pub fn classical(n: usize) -> Result<Self> {
        if n < 4 {
            return Err(Error::Domain(format!("classical normalization needs n >= 4, got {}", n)));
        }
        let nf = n as f64;
        let a1 = harmonic(n - 1);
        let a2: f64 = (1..n).map(|i| 1.0 / (i * i) as f64).sum();
        let b1 = (nf + 1.0) / (3.0 * (nf - 1.0));
        let b2 = 2.0 * (nf * nf + nf + 3.0) / (9.0 * nf * (nf - 1.0));
        let c1 = b1 - 1.0 / a1;
        let c2 = b2 - (nf + 2.0) / (a1 * nf) + a2 / (a1 * a1);
        let cn = 2.0 * (nf * a1 - 2.0 * (nf - 1.0)) / ((nf - 1.0) * (nf - 2.0));
        let v = 1.0 + a1 * a1 / (a2 + a1 * a1) * (cn - (nf + 1.0) / (nf - 1.0));
        let u = a1 - 1.0 - v;
        Ok(DStatConstants {
            a: c1 / a1,
            b: c2 / (a1 * a1 + a2),
            c: u,
            d: v,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Normalization {
    NumeratorOnly,
    Classical,
    Custom(DStatConstants),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DStatConfig {
    pub theta: f64,
    pub normalization: Normalization,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DStatistics {
    pub tajima_numerator: f64,
    pub tajima_d: Option<f64>,
    pub fu_li_numerator: f64,
    pub fu_li_d: Option<f64>,
}

/// Numerators `Delta_n - S_n / h_{n-1}` and `S_n - h_{n-1} eta_e`, and the
/// normalized statistics when requested. With no segregating sites the
/// normalized values are absent.
pub fn d_statistics(stats: &SampleStats, config: &DStatConfig) -> Result<DStatistics> {
    if !(config.theta > 0.0) {
        return Err(Error::Domain(format!("theta must be positive, got {}", config.theta)));
    }
    if stats.n < 2 {
        return Err(Error::Domain("need at least two sampled lineages".into()));
    }
    let h = harmonic(stats.n - 1);
    let s = stats.segregating as f64;
    let taj = stats.pairwise - s / h;
    let fl = s - h * stats.external as f64;
    let constants = match config.normalization {
        Normalization::NumeratorOnly => None,
        Normalization::Classical => Some(DStatConstants::classical(stats.n)?),
        Normalization::Custom(c) => Some(c),
    };
    let (tajima_d, fu_li_d) = match constants {
        Some(k) if stats.segregating > 0 => (
            Some(taj / (k.a * s + k.b * s * (s - 1.0)).sqrt()),
            Some(fl / (k.c * s + k.d * s * s).sqrt()),
        ),
        _ => (None, None),
    };
    Ok(DStatistics {
        tajima_numerator: taj,
        tajima_d,
        fu_li_numerator: fl,
        fu_li_d,
    })
}
