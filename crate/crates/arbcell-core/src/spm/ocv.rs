//! Half-cell open-circuit potential tables.
//!
//! Both electrodes store a monotone-decreasing potential-vs-stoichiometry
//! table, interpolated piecewise linearly (linear interpolation of a
//! monotone table is itself monotone, which is the property the rest of
//! the model leans on). The shipped pack is a graphite/NMC-style pair
//! calibrated so the full cell spans 2.70 V discharged to 4.20 V charged,
//! with 3.42 V and 4.08 V landing at 10% and 90% SoC.

use alloc::vec::Vec;

use crate::num;

#[derive(Debug, Clone, PartialEq)]
pub struct OcvCurve {
    /// Negative electrode potential vs Li, (stoichiometry, V), ascending x.
    anode: Vec<(f64, f64)>,
    /// Positive electrode potential vs Li, (stoichiometry, V), ascending x.
    cathode: Vec<(f64, f64)>,
}

/// Graphite-style anode half-cell curve: steep below x ~ 0.1, a stage
/// transition dropping ~36 mV between x = 0.5 and x = 0.6, and a nearly
/// flat plateau above.
const ANODE_TABLE: [(f64, f64); 14] = [
    (0.00, 1.2000),
    (0.02, 0.6500),
    (0.05, 0.4000),
    (0.08, 0.2800),
    (0.125, 0.2100),
    (0.20, 0.1700),
    (0.30, 0.1500),
    (0.40, 0.1380),
    (0.50, 0.1280),
    (0.60, 0.0920),
    (0.70, 0.0870),
    (0.80, 0.0840),
    (0.90, 0.0825),
    (1.00, 0.0810),
];

/// NMC-style cathode half-cell curve (potential falls as lithiation rises)
/// with the end-of-discharge cliff below ~ 3.5 V.
const CATHODE_TABLE: [(f64, f64); 13] = [
    (0.25, 4.3400),
    (0.30, 4.2840),
    (0.36, 4.1660),
    (0.45, 4.1250),
    (0.525, 4.0700),
    (0.60, 4.0200),
    (0.70, 3.9350),
    (0.78, 3.8300),
    (0.84, 3.6300),
    (0.88, 3.4400),
    (0.90, 3.1000),
    (0.95, 2.9000),
    (1.00, 2.7000),
];

pub(crate) fn interp(table: &[(f64, f64)], x: f64) -> f64 {
    let first = table[0];
    let last = table[table.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    // Tables are tiny; a scan beats a binary search in practice.
    for pair in table.windows(2) {
        let (x0, y0) = pair[0];
        let (x1, y1) = pair[1];
        if x <= x1 {
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        }
    }
    last.1
}

impl OcvCurve {
    pub fn new(anode: Vec<(f64, f64)>, cathode: Vec<(f64, f64)>) -> Result<Self, &'static str> {
        for table in [&anode, &cathode] {
            if table.len() < 2 {
                return Err("OCV table needs at least two points");
            }
            for pair in table.windows(2) {
                if pair[1].0 <= pair[0].0 {
                    return Err("OCV table stoichiometry must be strictly increasing");
                }
                if pair[1].1 >= pair[0].1 {
                    return Err("OCV potential must be strictly decreasing in stoichiometry");
                }
            }
            for &(x, u) in table {
                if !x.is_finite() || !u.is_finite() {
                    return Err("OCV table contains non-finite entries");
                }
            }
        }
        Ok(Self { anode, cathode })
    }

    pub fn default_pack() -> Self {
        Self::new(ANODE_TABLE.to_vec(), CATHODE_TABLE.to_vec())
            .expect("built-in OCV tables are valid")
    }

    /// Anode potential vs Li at surface stoichiometry `x`, V.
    pub fn anode_potential(&self, x: f64) -> f64 {
        interp(&self.anode, num::clamp(x, 0.0, 1.0))
    }

    /// Cathode potential vs Li at surface stoichiometry `y`, V.
    pub fn cathode_potential(&self, y: f64) -> f64 {
        interp(&self.cathode, num::clamp(y, 0.0, 1.0))
    }

    pub fn anode_table(&self) -> &[(f64, f64)] {
        &self.anode
    }

    pub fn cathode_table(&self) -> &[(f64, f64)] {
        &self.cathode
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tables_interpolate_through_anchor_points() {
        let ocv = OcvCurve::default_pack();
        assert_eq!(ocv.anode_potential(0.05), 0.40);
        assert_eq!(ocv.cathode_potential(0.90), 3.10);
        // Midpoint of a segment.
        let mid = ocv.anode_potential(0.45);
        assert!((mid - 0.5 * (0.1380 + 0.1280)).abs() < 1e-12);
    }

    #[test]
    fn clamps_outside_table_range() {
        let ocv = OcvCurve::default_pack();
        assert_eq!(ocv.cathode_potential(0.0), 4.34);
        assert_eq!(ocv.cathode_potential(1.5), 2.70);
    }

    #[test]
    fn rejects_non_monotone_tables() {
        let bad = OcvCurve::new(
            alloc::vec![(0.0, 1.0), (0.5, 1.1), (1.0, 0.2)],
            CATHODE_TABLE.to_vec(),
        );
        assert!(bad.is_err());
    }
}
