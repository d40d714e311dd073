use serde::{Deserialize, Serialize};

use crate::error::{validation, Error, Result};

/// One atom of the mutation-intensity measure: beneficial mutations at
/// position `x` with advantage `s`, arriving at `rate` per coalescent time unit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepAtom {
    pub rate: f64,
    pub x: f64,
    pub s: f64,
}

/// Atomic mutation-intensity measure on `[-L, L] x (0, 1]` together with the
/// recombination-distance function `r`, piecewise linear through `r_table`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    #[serde(rename = "L")]
    pub half_length: f64,
    pub atoms: Vec<SweepAtom>,
    pub r_table: Vec<[f64; 2]>,
}

impl SweepSpec {
    pub fn new(half_length: f64, atoms: Vec<SweepAtom>, r_table: Vec<[f64; 2]>) -> Result<Self> {
        let spec = SweepSpec {
            half_length,
            atoms,
            r_table,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SweepSpec =
            serde_json::from_str(text).map_err(|e| validation("document", e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let l = self.half_length;
        if !(l.is_finite() && l > 0.0) {
            return Err(validation("L", "must be finite and positive"));
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if !(a.rate.is_finite() && a.rate >= 0.0) {
                return Err(validation(format!("atoms[{}].rate", i), "must be finite and >= 0"));
            }
            if !(a.x.is_finite() && a.x.abs() <= l) {
                return Err(validation(format!("atoms[{}].x", i), "must lie in [-L, L]"));
            }
            if !(a.s > 0.0 && a.s <= 1.0) {
                return Err(validation(format!("atoms[{}].s", i), "must lie in (0, 1]"));
            }
        }
        let t = &self.r_table;
        if t.len() < 2 {
            return Err(validation("r_table", "needs at least two points"));
        }
        for (i, [x, r]) in t.iter().enumerate() {
            if !(x.is_finite() && r.is_finite() && *r >= 0.0) {
                return Err(validation(format!("r_table[{}]", i), "entries must be finite, r >= 0"));
            }
            if i > 0 && t[i - 1][0] >= *x {
                return Err(validation(format!("r_table[{}]", i), "x must be strictly increasing"));
            }
        }
        if t[0][0] > -l || t[t.len() - 1][0] < l {
            return Err(validation("r_table", "must cover [-L, L]"));
        }
        if self.recombination(0.0) != 0.0 {
            return Err(validation("r_table", "r(0) must be 0"));
        }
        for i in 1..t.len() {
            let ([x0, r0], [x1, r1]) = (t[i - 1], t[i]);
            if x1 <= 0.0 && r1 > r0 {
                return Err(validation(format!("r_table[{}]", i), "r must be nonincreasing on [-L, 0]"));
            }
            if x0 >= 0.0 && r1 < r0 {
                return Err(validation(format!("r_table[{}]", i), "r must be nondecreasing on [0, L]"));
            }
        }
        Ok(())
    }

    /// `r(x)` by linear interpolation in the table, clamped at its ends.
    pub fn recombination(&self, x: f64) -> f64 {
        let t = &self.r_table;
        if x <= t[0][0] {
            return t[0][1];
        }
        for w in t.windows(2) {
            let ([x0, r0], [x1, r1]) = (w[0], w[1]);
            if x <= x1 {
                return r0 + (r1 - r0) * (x - x0) / (x1 - x0);
            }
        }
        t[t.len() - 1][1]
    }

    pub fn total_rate(&self) -> f64 {
        self.atoms.iter().map(|a| a.rate).sum()
    }

    /// Mutations at a single site `z = 1` with advantage `s` at rate `alpha`,
    /// with `r(z) = beta`.
    pub fn single_site(alpha: f64, s: f64, beta: f64) -> Result<Self> {
        SweepSpec::new(
            1.0,
            vec![SweepAtom { rate: alpha, x: 1.0, s }],
            vec![[-1.0, beta], [0.0, 0.0], [1.0, beta]],
        )
    }

    /// Mutations uniform along `[-L, L]` at total rate `2 alpha L`, advantage
    /// `s`, `r(x) = beta |x|`, discretised to `grid` equal cells with one atom
    /// at each cell midpoint.
    pub fn uniform_chromosome(alpha: f64, s: f64, beta: f64, half_length: f64, grid: usize) -> Result<Self> {
        if grid == 0 {
            return Err(validation("grid", "must be positive"));
        }
        let l = half_length;
        let width = 2.0 * l / grid as f64;
        let atoms = (0..grid)
            .map(|i| SweepAtom {
                rate: alpha * width,
                x: -l + (i as f64 + 0.5) * width,
                s,
            })
            .collect();
        SweepSpec::new(l, atoms, vec![[-l, beta * l], [0.0, 0.0], [l, beta * l]])
    }

    /// A spec whose limiting `eta` is the given atomic measure: with
    /// `r(x) = |x|` and `s = 1/2`, an atom of rate `2w` at `x = -ln(p)/2`
    /// produces an `eta`-atom of mass `w` at `p`.
    pub fn from_eta_atoms(eta: &[(f64, f64)]) -> Result<Self> {
        let mut eps = 1.0f64;
        for (i, &(p, w)) in eta.iter().enumerate() {
            if !(p > 0.0 && p <= 1.0) {
                return Err(validation(format!("eta[{}].p", i), "must lie in (0, 1]"));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(validation(format!("eta[{}].w", i), "must be positive"));
            }
            eps = eps.min(p);
        }
        let l = if eps < 1.0 { -0.5 * eps.ln() } else { 1.0 };
        let atoms = eta
            .iter()
            .map(|&(p, w)| SweepAtom {
                rate: 2.0 * w,
                x: (-0.5 * p.ln()).min(l),
                s: 0.5,
            })
            .collect();
        SweepSpec::new(l, atoms, vec![[-l, l], [0.0, 0.0], [l, l]])
    }
}

impl std::str::FromStr for SweepSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SweepSpec::from_json(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_and_field_errors() {
        let text = r#"{"L": 2, "atoms": [{"rate": 1.5, "x": 0.5, "s": 0.3}],
                       "r_table": [[-2, 1], [0, 0], [2, 1]]}"#;
        let spec = SweepSpec::from_json(text).unwrap();
        assert_eq!(spec.atoms.len(), 1);
        assert_eq!(SweepSpec::from_json(&spec.to_json()).unwrap(), spec);
        assert!((spec.recombination(0.5) - 0.25).abs() < 1e-15);
        assert!((spec.recombination(-1.0) - 0.5).abs() < 1e-15);

        let bad_s = text.replace("\"s\": 0.3", "\"s\": 1.3");
        match SweepSpec::from_json(&bad_s) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "atoms[0].s"),
            other => panic!("{:?}", other),
        }
        let bad_mono = text.replace("[[-2, 1], [0, 0], [2, 1]]", "[[-2, 1], [0, 0], [1, 2], [2, 1]]");
        assert!(matches!(SweepSpec::from_json(&bad_mono), Err(Error::Validation { .. })));
        let bad_zero = text.replace("[0, 0]", "[0, 0.1]");
        assert!(matches!(SweepSpec::from_json(&bad_zero), Err(Error::Validation { .. })));
        let bad_l = text.replace("\"L\": 2", "\"L\": -1");
        match SweepSpec::from_json(&bad_l) {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "L"),
            other => panic!("{:?}", other),
        }
    }

    #[test]
    fn uniform_discretisation_mass() {
        let spec = SweepSpec::uniform_chromosome(1.0, 0.5, 2.0, 3.0, 100).unwrap();
        assert!((spec.total_rate() - 6.0).abs() < 1e-12);
        assert!((spec.recombination(-1.5) - 3.0).abs() < 1e-12);
    }
}
