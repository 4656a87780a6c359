use super::{LogOddsGrid, OccupancyConfig, ProbGrid};
use crate::{Error, Result};

/// Sign with `sign(0) = 0`.
pub fn sign0(v: f64) -> f32 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Per-cell three-view fusion: `max(|a|,|b|,|c|) * sign(a + b + c)`.
///
/// The sum is taken in f64 over the three values sorted ascending, so the
/// result does not depend on argument order and is exact whenever the
/// magnitudes span less than 2^29 (always the case for binned grids).
#[inline]
pub(crate) fn fuse_cell(a: f32, b: f32, c: f32) -> f32 {
    let mut v = [a, b, c];
    v.sort_by(f32::total_cmp);
    let sum = f64::from(v[0]) + f64::from(v[1]) + f64::from(v[2]);
    a.abs().max(b.abs()).max(c.abs()) * sign0(sum)
}

pub fn fuse3(oc: &LogOddsGrid, ol: &LogOddsGrid, or: &LogOddsGrid) -> Result<LogOddsGrid> {
    if oc.spec != ol.spec || oc.spec != or.spec {
        return Err(Error::ShapeMismatch("fuse3: grid specs differ".into()));
    }
    let values = oc
        .values
        .iter()
        .zip(&ol.values)
        .zip(&or.values)
        .map(|((&a, &b), &c)| fuse_cell(a, b, c))
        .collect();
    Ok(LogOddsGrid { spec: oc.spec, values })
}

/// Two-way form used for incremental map updates; equal to
/// `fuse_cell(old, obs, 0)`.
#[inline]
pub fn fuse_pair(old: f32, obs: f32) -> f32 {
    fuse_cell(old, obs, 0.0)
}

pub fn logodds_to_prob(g: &LogOddsGrid) -> ProbGrid {
    let values = g
        .values
        .iter()
        .map(|&l| (1.0 / (1.0 + (-f64::from(l)).exp())) as f32)
        .collect();
    ProbGrid { spec: g.spec, values }
}

pub fn prob_to_logodds(p: &ProbGrid, cfg: &OccupancyConfig) -> LogOddsGrid {
    let values = p
        .values
        .iter()
        .map(|&v| {
            let v = f64::from(v);
            (v / (1.0 - v)).ln().clamp(-cfg.l_max, cfg.l_max) as f32
        })
        .collect();
    LogOddsGrid { spec: p.spec, values }
}

#[cfg(test)]
mod tests {
    use super::super::{classify, CellState, GridSpec};
    use super::*;
    use proptest::prelude::*;

    fn grid(vals: &[f32]) -> LogOddsGrid {
        let spec = GridSpec { resolution: 8, ..GridSpec::default() };
        let mut values = vec![0.0; 64];
        values[..vals.len()].copy_from_slice(vals);
        LogOddsGrid { spec, values }
    }

    #[test]
    fn fuse_examples() {
        let oc = grid(&[0.05, 0.10, -0.03]);
        let z = grid(&[]);
        assert_eq!(fuse3(&oc, &z, &z).unwrap(), oc);
        let out = fuse3(&grid(&[0.05]), &grid(&[-0.10]), &z).unwrap();
        assert_eq!(out.values[0], -0.10);
        let out = fuse3(&grid(&[0.10]), &grid(&[-0.10]), &z).unwrap();
        assert_eq!(out.values[0], 0.0);
    }

    #[test]
    fn fuse_spec_mismatch() {
        let a = grid(&[]);
        let b = LogOddsGrid::unknown(GridSpec::desk());
        assert!(matches!(fuse3(&a, &a, &b), Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn logistic_values() {
        let p = logodds_to_prob(&grid(&[0.0, 0.10, -0.02]));
        assert_eq!(p.values[0], 0.5);
        assert!((p.values[1] - 0.524_979_2).abs() < 1e-6);
        assert!((p.values[2] - 0.495_000_2).abs() < 1e-6);
        // |L| = 0.02 sits just inside the unknown band
        let cfg = OccupancyConfig::default();
        assert_eq!(classify(&p, &cfg)[2], CellState::Unknown);
    }

    #[test]
    fn prob_to_logodds_clamps() {
        let cfg = OccupancyConfig::default();
        let spec = GridSpec { resolution: 8, ..GridSpec::default() };
        let mut v = vec![0.5; 64];
        v[0] = 0.0;
        v[1] = 1.0;
        let l = prob_to_logodds(&ProbGrid { spec, values: v }, &cfg);
        assert_eq!(l.values[0], -10.0);
        assert_eq!(l.values[1], 10.0);
        assert_eq!(l.values[2], 0.0);
    }

    fn cell() -> impl Strategy<Value = f32> {
        prop_oneof![
            Just(0.0f32),
            (-10i32..=10).prop_map(|k| (0.01 * k as f64) as f32),
            -0.1f32..0.1f32,
        ]
    }

    proptest! {
        #[test]
        fn fuse_properties(a in cell(), b in cell(), c in cell()) {
            let f = fuse_cell(a, b, c);
            for perm in [(a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)] {
                prop_assert_eq!(f.to_bits(), fuse_cell(perm.0, perm.1, perm.2).to_bits());
            }
            let exact_sum = f64::from(a) + f64::from(b) + f64::from(c);
            if exact_sum == 0.0 {
                prop_assert_eq!(f, 0.0);
            } else {
                prop_assert_eq!(f.abs(), a.abs().max(b.abs()).max(c.abs()));
                prop_assert_eq!(sign0(f64::from(f)), sign0(exact_sum));
            }
            prop_assert_eq!(fuse_cell(a, a, a), a);
            prop_assert_eq!(fuse_pair(a, b), fuse_cell(a, b, 0.0));
        }

        #[test]
        fn round_trip_and_monotonic(l1 in -5.0f32..5.0, l2 in -5.0f32..5.0) {
            let g = grid(&[l1, l2]);
            let p = logodds_to_prob(&g);
            let back = prob_to_logodds(&p, &OccupancyConfig::default());
            prop_assert!((back.values[0] - l1).abs() < 1e-6 * (1.0 + l1.abs()) * 8.0);
            if l1 < l2 {
                prop_assert!(p.values[0] <= p.values[1]);
            }
        }
    }
}
