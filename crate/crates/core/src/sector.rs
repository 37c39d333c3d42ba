//! Bookkeeping for the quantum reduction: conserved-charge labels, sector
//! shape parameters, sector bases and the Fock-to-sector map.
//!
//! A sector is the common eigenspace of the three conserved occupation
//! charges, labeled by `(c1, c2, c3)` in the cone `C3`. Its basis is the
//! family of Fock 4-tuples `(n, c1-n, n-c3, c2+c3-n)` and its dimension is
//! `N + 1`.

use serde::{Deserialize, Serialize};

use crate::error::{FwmError, Result};

/// Conserved-charge triple labeling a sector, in hbar-units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SectorLabel {
    pub c1: i64,
    pub c2: i64,
    pub c3: i64,
}

impl SectorLabel {
    pub fn new(c1: i64, c2: i64, c3: i64) -> Self {
        Self { c1, c2, c3 }
    }

    /// Membership in the cone C3: all four inequalities must hold.
    pub fn is_valid(&self) -> bool {
        self.c1 >= 0 && self.c2 >= 0 && self.c1 - self.c3 >= 0 && self.c2 + self.c3 >= 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(FwmError::InvalidLabel(self.c1, self.c2, self.c3))
        }
    }
}

/// Which of the four (overlapping) linear-parameter subcases applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subcase {
    #[serde(rename = "i")]
    I,
    #[serde(rename = "ii")]
    II,
    #[serde(rename = "iii")]
    III,
    #[serde(rename = "iv")]
    IV,
}

impl std::fmt::Display for Subcase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Subcase::I => "i",
            Subcase::II => "ii",
            Subcase::III => "iii",
            Subcase::IV => "iv",
        };
        f.write_str(s)
    }
}

/// Derived shape parameters of a sector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectorShape {
    /// Sector dimension minus one.
    pub n: u32,
    pub gamma: u32,
    pub delta: u32,
    pub subcase: Subcase,
    /// 0 for subcases i/ii, c3 for iii/iv; the Fock occupation n0 of local
    /// basis state `|n>` is `n + base_offset`.
    pub base_offset: i64,
}

/// Model parameters: mode frequencies (1/time), coupling g
/// (1/(time*action)) and the action unit hbar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourWaveParams {
    pub omega: [f64; 4],
    pub g: f64,
    pub hbar: f64,
}

impl FourWaveParams {
    pub fn new(omega: [f64; 4], g: f64, hbar: f64) -> Self {
        assert!(hbar > 0.0, "hbar must be positive");
        Self { omega, g, hbar }
    }

    /// Detuning omega0 - omega1 + omega2 - omega3.
    pub fn detuning(&self) -> f64 {
        self.omega[0] - self.omega[1] + self.omega[2] - self.omega[3]
    }

    /// Frequency resonance condition, within 1e-12 relative to the
    /// largest frequency magnitude.
    pub fn is_resonant(&self) -> bool {
        let scale = self.omega.iter().fold(1.0f64, |m, w| m.max(w.abs()));
        self.detuning().abs() <= 1e-12 * scale
    }
}

/// True iff the label lies in the cone C3.
pub fn validate_label(c: &SectorLabel) -> bool {
    c.is_valid()
}

/// Shape parameters of the sector, picking the first matching subcase in
/// the order (i), (ii), (iii), (iv). Overlapping subcases agree on N, the
/// basis and lambda0 (tested property).
pub fn shape_of(c: &SectorLabel) -> Result<SectorShape> {
    c.validate()?;
    let lo = 0.max(c.c3);
    let hi = c.c1.min(c.c2 + c.c3);
    let n = (hi - lo) as u32;
    let (subcase, gamma, delta) = if c.c3 <= 0 && hi == c.c1 {
        (Subcase::I, -c.c3, c.c2 + c.c3 - c.c1)
    } else if c.c3 <= 0 {
        (Subcase::II, -c.c3, c.c1 - c.c2 - c.c3)
    } else if hi == c.c1 {
        (Subcase::III, c.c3, c.c2 + c.c3 - c.c1)
    } else {
        (Subcase::IV, c.c3, c.c1 - c.c2 - c.c3)
    };
    debug_assert!(gamma >= 0 && delta >= 0);
    let base_offset = match subcase {
        Subcase::I | Subcase::II => 0,
        Subcase::III | Subcase::IV => c.c3,
    };
    Ok(SectorShape {
        n,
        gamma: gamma as u32,
        delta: delta as u32,
        subcase,
        base_offset,
    })
}

/// The constant lambda_{0c} (units 1/time) of the subcase selected by
/// [`shape_of`].
pub fn lambda0(c: &SectorLabel, p: &FourWaveParams) -> Result<f64> {
    let shape = shape_of(c)?;
    lambda0_for_subcase(c, p, shape.subcase)
}

/// lambda_{0c} computed from a specific subcase formula. Callers other
/// than the overlap-consistency tests should use [`lambda0`].
pub fn lambda0_for_subcase(c: &SectorLabel, p: &FourWaveParams, subcase: Subcase) -> Result<f64> {
    c.validate()?;
    let [_, w1, w2, w3] = p.omega;
    let (c1, c2, c3) = (c.c1 as f64, c.c2 as f64, c.c3 as f64);
    let base = w1 * c1 + w3 * c2 + (w3 - w2) * c3;
    let gh = p.g * p.hbar;
    let extra = match subcase {
        Subcase::I => 0.0,
        Subcase::II => gh * (c1 - c2 - c3) * (1.0 - c3),
        Subcase::III => gh * c3 * (c2 + c3 - c1 + 1.0),
        Subcase::IV => gh * (c1 - c2),
    };
    Ok(base + extra)
}

/// Subcases whose defining conditions hold for this label.
pub fn applicable_subcases(c: &SectorLabel) -> Vec<Subcase> {
    let mut out = Vec::new();
    let max_is_zero = c.c3 <= 0;
    let max_is_c3 = c.c3 >= 0;
    let min_is_c1 = c.c1 <= c.c2 + c.c3;
    let min_is_c23 = c.c2 + c.c3 <= c.c1;
    if max_is_zero && min_is_c1 {
        out.push(Subcase::I);
    }
    if max_is_zero && min_is_c23 {
        out.push(Subcase::II);
    }
    if max_is_c3 && min_is_c1 {
        out.push(Subcase::III);
    }
    if max_is_c3 && min_is_c23 {
        out.push(Subcase::IV);
    }
    out
}

/// The ordered Fock basis of the sector: tuples
/// `(n, c1-n, n-c3, c2+c3-n)` for n from max{0,c3} to min{c1, c2+c3}.
pub fn basis_states(c: &SectorLabel) -> Result<Vec<[u32; 4]>> {
    c.validate()?;
    let lo = 0.max(c.c3);
    let hi = c.c1.min(c.c2 + c.c3);
    Ok((lo..=hi)
        .map(|n| {
            [
                n as u32,
                (c.c1 - n) as u32,
                (n - c.c3) as u32,
                (c.c2 + c.c3 - n) as u32,
            ]
        })
        .collect())
}

/// Sector label and local basis index of a Fock 4-tuple.
pub fn sector_of_fock(n0: u32, n1: u32, n2: u32, n3: u32) -> (SectorLabel, usize) {
    let c = SectorLabel::new(
        n0 as i64 + n1 as i64,
        n2 as i64 + n3 as i64,
        n0 as i64 - n2 as i64,
    );
    let offset = 0.max(c.c3);
    (c, (n0 as i64 - offset) as usize)
}

/// Flat JSON report for one sector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectorReport {
    pub c1: i64,
    pub c2: i64,
    pub c3: i64,
    pub subcase: Subcase,
    #[serde(rename = "N")]
    pub n: u32,
    pub gamma: u32,
    pub delta: u32,
    pub lambda0: f64,
}

pub fn sector_report(c: &SectorLabel, p: &FourWaveParams) -> Result<SectorReport> {
    let shape = shape_of(c)?;
    Ok(SectorReport {
        c1: c.c1,
        c2: c.c2,
        c3: c.c3,
        subcase: shape.subcase,
        n: shape.n,
        gamma: shape.gamma,
        delta: shape.delta,
        lambda0: lambda0(c, p)?,
    })
}

/// All sector labels whose basis states have total quanta <= `t`.
pub fn sectors_within(t: u32) -> Vec<SectorLabel> {
    let mut seen = std::collections::BTreeSet::new();
    let t = t as i64;
    for n0 in 0..=t {
        for n1 in 0..=(t - n0) {
            for n2 in 0..=(t - n0 - n1) {
                for n3 in 0..=(t - n0 - n1 - n2) {
                    let (c, _) = sector_of_fock(n0 as u32, n1 as u32, n2 as u32, n3 as u32);
                    seen.insert((c.c1, c.c2, c.c3));
                }
            }
        }
    }
    seen.into_iter()
        .map(|(c1, c2, c3)| SectorLabel::new(c1, c2, c3))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn resonant_unit_params() -> FourWaveParams {
        FourWaveParams::new([1.0, 1.0, 1.0, 1.0], 1.0, 1.0)
    }

    #[test]
    fn cone_membership() {
        assert!(validate_label(&SectorLabel::new(2, 3, 0)));
        assert!(validate_label(&SectorLabel::new(0, 0, 0)));
        assert!(!validate_label(&SectorLabel::new(1, 0, -2)));
    }

    #[test]
    fn shape_examples() {
        let s = shape_of(&SectorLabel::new(2, 3, 0)).unwrap();
        assert_eq!(s.subcase, Subcase::I);
        assert_eq!((s.n, s.gamma, s.delta), (2, 0, 1));

        let s = shape_of(&SectorLabel::new(3, 1, 1)).unwrap();
        assert_eq!(s.subcase, Subcase::IV);
        assert_eq!((s.n, s.gamma, s.delta), (1, 1, 1));
        assert_eq!(s.base_offset, 1);

        let s = shape_of(&SectorLabel::new(0, 0, 0)).unwrap();
        assert_eq!((s.n, s.gamma, s.delta), (0, 0, 0));
    }

    #[test]
    fn shape_rejects_invalid() {
        assert!(matches!(
            shape_of(&SectorLabel::new(1, 0, -2)),
            Err(FwmError::InvalidLabel(..))
        ));
    }

    #[test]
    fn lambda0_examples() {
        let p = resonant_unit_params();
        assert_eq!(lambda0(&SectorLabel::new(2, 3, 0), &p).unwrap(), 5.0);
        assert_eq!(lambda0(&SectorLabel::new(3, 1, 1), &p).unwrap(), 6.0);
        assert_eq!(lambda0(&SectorLabel::new(0, 0, 0), &p).unwrap(), 0.0);
    }

    #[test]
    fn basis_examples() {
        assert_eq!(
            basis_states(&SectorLabel::new(2, 3, 0)).unwrap(),
            vec![[0, 2, 0, 3], [1, 1, 1, 2], [2, 0, 2, 1]]
        );
        assert_eq!(
            basis_states(&SectorLabel::new(0, 0, 0)).unwrap(),
            vec![[0, 0, 0, 0]]
        );
        assert_eq!(
            basis_states(&SectorLabel::new(3, 1, 1)).unwrap(),
            vec![[1, 2, 0, 1], [2, 1, 1, 0]]
        );
    }

    #[test]
    fn fock_round_trip_examples() {
        let (c, idx) = sector_of_fock(1, 1, 1, 2);
        assert_eq!(c, SectorLabel::new(2, 3, 0));
        assert_eq!(idx, 1);
        let (c, idx) = sector_of_fock(0, 0, 0, 0);
        assert_eq!(c, SectorLabel::new(0, 0, 0));
        assert_eq!(idx, 0);
        let (c, idx) = sector_of_fock(2, 1, 1, 0);
        assert_eq!(c, SectorLabel::new(3, 1, 1));
        assert_eq!(idx, 1);
    }

    #[test]
    fn basis_length_is_dimension() {
        for c in sectors_within(8) {
            let shape = shape_of(&c).unwrap();
            assert_eq!(basis_states(&c).unwrap().len(), shape.n as usize + 1);
        }
    }

    #[test]
    fn round_trip_all_tuples_up_to_12() {
        let t = 12u32;
        for n0 in 0..=t {
            for n1 in 0..=(t - n0) {
                for n2 in 0..=(t - n0 - n1) {
                    for n3 in 0..=(t - n0 - n1 - n2) {
                        let (c, idx) = sector_of_fock(n0, n1, n2, n3);
                        let basis = basis_states(&c).unwrap();
                        assert_eq!(basis[idx], [n0, n1, n2, n3]);
                    }
                }
            }
        }
    }

    #[test]
    fn overlap_consistency() {
        let p = FourWaveParams::new([1.3, 0.4, 2.2, 3.1], 0.7, 0.5);
        for c in sectors_within(10) {
            let cases = applicable_subcases(&c);
            assert!(!cases.is_empty());
            let vals: Vec<f64> = cases
                .iter()
                .map(|&s| lambda0_for_subcase(&c, &p, s).unwrap())
                .collect();
            for v in &vals[1..] {
                assert_eq!(
                    *v, vals[0],
                    "lambda0 disagrees across subcases for {c:?}: {vals:?}"
                );
            }
        }
    }

    #[test]
    fn sectors_partition_truncated_basis() {
        let t = 8u32;
        let mut covered = std::collections::HashSet::new();
        let mut total = 0usize;
        for c in sectors_within(t) {
            for tuple in basis_states(&c).unwrap() {
                let quanta: u32 = tuple.iter().sum();
                if quanta <= t {
                    assert!(covered.insert(tuple), "tuple {tuple:?} in two sectors");
                    total += 1;
                }
            }
        }
        let expected: usize = (0..=t)
            .map(|s| {
                // compositions of s into 4 parts
                ((s + 1) * (s + 2) * (s + 3) / 6) as usize
            })
            .sum();
        assert_eq!(total, expected);
    }

    #[test]
    fn report_serializes_flat() {
        let p = resonant_unit_params();
        let r = sector_report(&SectorLabel::new(2, 3, 0), &p).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["subcase"], "i");
        assert_eq!(json["N"], 2);
        assert_eq!(json["lambda0"], 5.0);
    }

    proptest! {
        #[test]
        fn fock_map_always_lands_in_cone(n0 in 0u32..20, n1 in 0u32..20, n2 in 0u32..20, n3 in 0u32..20) {
            let (c, idx) = sector_of_fock(n0, n1, n2, n3);
            prop_assert!(c.is_valid());
            let shape = shape_of(&c).unwrap();
            prop_assert!(idx <= shape.n as usize);
        }
    }
}
